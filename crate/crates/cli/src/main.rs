//! `chandef` command-line front end.
//!
//! Exit codes: 0 success, 2 parse error, 3 dimension or validation error,
//! 4 solver failure, 5 verification failure.

mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chandef::deficiency::{self, DeficiencyOptions};
use chandef::ovs::{self, BaseSection};
use chandef::{norms, BlockAlgebra, Error, Experiment, Family, HermitianMap, Povm};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "chandef", version, about = "Diamond norms and deficiencies of quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Positive-cone family used for channels and norms.
    #[arg(long, global = true, value_enum, default_value_t = FamilyArg::Cp)]
    family: FamilyArg,

    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Zero threshold for deficiency verdicts and certified-width threshold for norms.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Block sizes of the decision algebra, e.g. "1,1,1" or "2".
    #[arg(long, global = true)]
    decision_alg: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Cp,
    Eb,
    Pos,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Cp => Family::Cp,
            FamilyArg::Eb => Family::Eb,
            FamilyArg::Pos => Family::Pos,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Post,
    Pre,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diamond norm of a Hermitian map.
    Norm {
        #[arg(long)]
        map: PathBuf,
    },
    /// Dual diamond norm of a Hermitian map.
    DualNorm {
        #[arg(long)]
        map: PathBuf,
    },
    /// Deficiency of psi with respect to phi under post-processing.
    DeficiencyPost {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Deficiency of psi with respect to phi under pre-processing.
    DeficiencyPre {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Pre-processing deficiency restricted to measurements on the outputs.
    RangeInclusion {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Whether POVM n reproduces POVM m by relabeling (post) or a channel (pre).
    Cleanness {
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        n: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Post)]
        direction: DirectionArg,
    },
    /// Deficiency between two experiments (state families on a common index set).
    Experiment {
        #[arg(long)]
        e: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Post)]
        direction: DirectionArg,
    },
    /// Base-section geometry of a polyhedral ordered vector space.
    Ovs {
        #[arg(long)]
        section: PathBuf,
        /// Comma-separated vector whose norms are reported.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
    /// Runs the invariant suites of every module.
    Verify,
}

#[derive(Debug)]
enum CliError {
    Parse(String),
    Core(Error),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(Error::Json(_)) => 2,
            CliError::Core(Error::Solver(_)) => 4,
            CliError::Core(_) => 3,
            CliError::Verify(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(s) => write!(f, "parse error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Verify(s) => write!(f, "verification failed: {s}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn parse_blocks(s: &str) -> Result<BlockAlgebra, CliError> {
    let blocks = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::Parse(format!("decision algebra '{s}': {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BlockAlgebra::from_blocks(&blocks)?)
}

fn parse_vector(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Parse(format!("vector '{s}': {e}"))))
        .collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Core(Error::Json(e)))
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    let family: Family = cli.family.into();
    let opts = DeficiencyOptions { seed: cli.seed, ..Default::default() };
    let decision = cli.decision_alg.as_deref().map(parse_blocks).transpose()?;
    let zero_tol = cli.tol.unwrap_or(deficiency::ZERO_EPS_TOL);
    let deficiency_value = |rep: &deficiency::DeficiencyReport| -> Result<Value, CliError> {
        Ok(json!({ "zero": rep.is_zero(zero_tol), "tol": zero_tol, "result": to_value(rep)? }))
    };
    let norm_value = |rep: &norms::NormResult| -> Result<Value, CliError> {
        let mut v = to_value(rep)?;
        if let Some(t) = cli.tol {
            v["certified"] = json!(rep.width() <= t);
        }
        Ok(v)
    };
    let report = match &cli.command {
        Command::Norm { map } => {
            let m: HermitianMap = load(map)?;
            norm_value(&norms::diamond_norm_with(family, &m, &norms::NormOptions { seed: cli.seed, ..Default::default() })?)?
        }
        Command::DualNorm { map } => {
            let m: HermitianMap = load(map)?;
            norm_value(&norms::dual_diamond_norm_seeded(family, &m, cli.seed)?)?
        }
        Command::DeficiencyPost { phi, psi } => {
            let (phi, psi): (HermitianMap, HermitianMap) = (load(phi)?, load(psi)?);
            deficiency_value(&deficiency::post_deficiency(family, &phi, &psi, decision.as_ref(), &opts)?)?
        }
        Command::DeficiencyPre { phi, psi } => {
            let (phi, psi): (HermitianMap, HermitianMap) = (load(phi)?, load(psi)?);
            deficiency_value(&deficiency::pre_deficiency(family, &phi, &psi, decision.as_ref(), &opts)?)?
        }
        Command::RangeInclusion { phi, psi } => {
            let (phi, psi): (HermitianMap, HermitianMap) = (load(phi)?, load(psi)?);
            deficiency_value(&deficiency::pre_range_inclusion(&phi, &psi, &opts)?)?
        }
        Command::Cleanness { m, n, direction } => {
            let (m, n): (Povm, Povm) = (load(m)?, load(n)?);
            let rep = match direction {
                DirectionArg::Post => deficiency::povm_post_cleanness(&m, &n)?,
                DirectionArg::Pre => deficiency::povm_pre_deficiency(family, &m, &n, &opts)?,
            };
            deficiency_value(&rep)?
        }
        Command::Experiment { e, f, direction } => {
            let (e, f): (Experiment, Experiment) = (load(e)?, load(f)?);
            let rep = match direction {
                DirectionArg::Post => deficiency::experiment_post_deficiency(family, &e, &f, decision.as_ref(), &opts)?,
                DirectionArg::Pre => deficiency::experiment_pre_deficiency(&e, &f)?,
            };
            deficiency_value(&rep)?
        }
        Command::Ovs { section, x } => {
            let b: BaseSection = load(section)?;
            let dual = ovs::dual_section(&b)?;
            let mut v = json!({ "section": to_value(&b)?, "dual_section": to_value(&dual)? });
            if let Some(x) = x {
                let x = parse_vector(x)?;
                if x.len() != b.dim() {
                    return Err(Error::DimensionMismatch { expected: b.dim(), got: x.len() }.into());
                }
                v["norm"] = json!(b.norm(&x)?);
                v["dual_norm"] = json!(dual.norm(&x)?);
                v["ball_sup"] = json!(b.ball_sup(&x)?.0);
            }
            v
        }
        Command::Verify => {
            let suites = verify::run_all(cli.seed);
            let passed = suites.iter().all(|s| s.passed);
            for s in &suites {
                eprintln!("{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
            }
            let v = json!({ "passed": passed, "suites": to_value(&suites)? });
            if !passed {
                emit(cli, &v)?;
                let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
                return Err(CliError::Verify(failed.join(", ")));
            }
            v
        }
    };
    Ok(report)
}

fn emit(cli: &Cli, report: &Value) -> Result<(), CliError> {
    let family: Family = cli.family.into();
    let out = json!({
        "command": command_name(&cli.command),
        "family": family,
        "seed": cli.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "report": report,
    });
    let text = chandef::json::to_string(&out).map_err(|e| CliError::Core(Error::Json(e)))?;
    match &cli.out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Parse(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            // a closed pipe downstream is not an error of this program
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Norm { .. } => "norm",
        Command::DualNorm { .. } => "dual-norm",
        Command::DeficiencyPost { .. } => "deficiency-post",
        Command::DeficiencyPre { .. } => "deficiency-pre",
        Command::RangeInclusion { .. } => "range-inclusion",
        Command::Cleanness { .. } => "cleanness",
        Command::Experiment { .. } => "experiment",
        Command::Ovs { .. } => "ovs",
        Command::Verify => "verify",
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CHANDEF_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            // only fails when a pool already exists, which cannot happen this early
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli).and_then(|r| emit(&cli, &r)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chandef: {e}");
            ExitCode::from(e.code())
        }
    }
}
