//! How far one channel, experiment or POVM is from being simulable by
//! another, through post-processing (after) or pre-processing (before).
//!
//! Every comparison reports the minimal `ε` as a certified interval
//! `[eps_lo, eps_hi]`:
//! * `eps_hi` is half the diamond distance attained by an explicit repaired
//!   channel (or stochastic matrix), evaluated by an independent norm
//!   computation;
//! * `eps_lo` comes from an explicit payoff map `Γ` through the payoff
//!   inequality `‖Φ∘Γ‖^◇ ≤ ‖Ψ∘Γ‖^◇ + ε‖Γ‖^◇`, each dual diamond norm
//!   bounded from the safe side.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cones::{cp_membership, dual_membership, Bounds, Family, EXACT_PRODUCT_DIM};
use crate::conic::{seesaw_multistart, Affine, HermVar, Sdp, SdpSolution};
use crate::error::{Error, Result};
use crate::hmap::{compose, make_cq, make_fe, make_qc, pairing, tensor_map, Experiment, HermitianMap, OperatorListRepr};
use crate::json::ser;
use crate::matops::linalg::*;
use crate::matops::{BlockAlgebra, CMat, HermitianOperator, Povm, State, C64};
use crate::norms::{add_cone, cone_shift, cq_dual_diamond, diamond_norm, dual_diamond_norm, Cone, NormResult};
use crate::random::{derive_seed, Rng};

/// Threshold below which an `ε` counts as zero in the equivalence checks.
pub const ZERO_EPS_TOL: f64 = 1e-6;
/// Violation allowed by the implication checks of the tensor lifts.
pub const LIFT_TOL: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct DeficiencyOptions {
    pub seed: u64,
    /// Random decision channels tried when `D` is not the sufficient algebra.
    pub net: usize,
    /// Random entanglement-breaking payoff maps tried as witnesses.
    pub eb_samples: usize,
    /// Starts of the see-saw searches.
    pub starts: usize,
}

impl Default for DeficiencyOptions {
    fn default() -> Self {
        Self { seed: 0, net: 16, eb_samples: 200, starts: 8 }
    }
}

impl DeficiencyOptions {
    fn without_samples(&self) -> Self {
        Self { eb_samples: 0, ..self.clone() }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub method: String,
    /// Both bounds come from exact cone models (the width is numerical).
    pub exact: bool,
    /// Half the optimal value of the joint SDP, before certification.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp_value: Option<f64>,
    /// Bound from the payoff map read off the SDP multipliers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_witness: Option<f64>,
    /// Best bound over sampled entanglement-breaking payoff maps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_witness_classical: Option<f64>,
    /// Best value of a direct search, where one was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_search: Option<f64>,
    /// Largest per-index violation `½‖α′(ρ_i) − σ_i‖_1` of the certificate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_index_max: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeficiencyReport {
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub family: Family,
    /// The simulating channel `α′` (post) or `β′` (pre).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_channel: Option<HermitianMap>,
    /// Column-stochastic relabeling, row-major `m × n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_stochastic: Option<Vec<Vec<f64>>>,
    /// Mixing weights over the better experiment, one row per target state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_weights: Option<Vec<Vec<f64>>>,
    /// Payoff map attaining `eps_lo`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_payoff: Option<HermitianMap>,
    /// Payoff operator attaining `eps_lo` (range inclusion).
    #[serde(serialize_with = "ser::opt_mat", skip_serializing_if = "Option::is_none")]
    pub witness_operator: Option<CMat>,
    pub diagnostics: Diagnostics,
}

impl DeficiencyReport {
    fn new(lo: f64, hi: f64, family: Family, diagnostics: Diagnostics) -> Self {
        let lo = lo.max(0.0);
        Self {
            eps_lo: lo,
            eps_hi: hi.max(lo),
            family,
            certificate_channel: None,
            certificate_stochastic: None,
            certificate_weights: None,
            witness_payoff: None,
            witness_operator: None,
            diagnostics,
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds { lo: self.eps_lo, hi: self.eps_hi }
    }

    pub fn width(&self) -> f64 {
        self.eps_hi - self.eps_lo
    }

    /// `eps_hi ≤ tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.eps_hi <= tol
    }
}

/// Which side of the channel the simulating map acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Post,
    Pre,
}

// ---------------------------------------------------------------------------
// Decision spaces and payoffs
// ---------------------------------------------------------------------------

fn ser_ops<S: Serializer>(ops: &[HermitianOperator], s: S) -> std::result::Result<S::Ok, S::Error> {
    OperatorListRepr::from_ops(ops).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payoff {
    /// Payoff operators `G_i ⪰ 0` on the decision algebra, one per index.
    Operators {
        #[serde(serialize_with = "ser_ops")]
        ops: Vec<HermitianOperator>,
    },
    /// Payoff map `Γ` from the decision algebra.
    Map { map: HermitianMap },
}

#[derive(Clone, Debug, Serialize)]
pub struct DecisionSpace {
    pub algebra: BlockAlgebra,
    pub payoff: Payoff,
}

impl DecisionSpace {
    pub fn with_operators(ops: Vec<HermitianOperator>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Invalid("empty payoff list".into()))?;
        let algebra = first.algebra().clone();
        for g in &ops {
            if g.algebra() != &algebra {
                return Err(Error::AlgebraMismatch("payoff operators must share an algebra".into()));
            }
            let m = g.min_eig();
            if m < -1e-10 {
                return Err(Error::NotPsd(m));
            }
        }
        Ok(Self { algebra, payoff: Payoff::Operators { ops } })
    }

    /// `Γ` must not be refuted by the dual cone of `family`.
    pub fn with_map(map: HermitianMap, family: Family, seed: u64) -> Result<Self> {
        let v = dual_membership(family, &map, seed);
        if v.is_out() {
            return Err(Error::Invalid(format!("payoff map lies outside the dual {family} cone")));
        }
        Ok(Self { algebra: map.in_alg().clone(), payoff: Payoff::Map { map } })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PayoffReport {
    /// `Tr α(ρ_i) G_i`.
    pub per_index: Vec<f64>,
    pub total: f64,
    /// `⟨α∘Φ^cq_E, Φ^qc_G⟩`.
    pub total_pairing: f64,
}

pub fn payoff(e: &Experiment, alpha: &HermitianMap, g: &[HermitianOperator]) -> Result<PayoffReport> {
    if g.len() != e.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), got: g.len() });
    }
    let per_index = e
        .states()
        .iter()
        .zip(g)
        .map(|(s, gi)| Ok(alpha.apply(s.op())?.inner(gi)))
        .collect::<Result<Vec<f64>>>()?;
    let total = per_index.iter().sum();
    let total_pairing = pairing(&compose(alpha, &e.cq_channel())?, &make_qc(g)?)?;
    Ok(PayoffReport { per_index, total, total_pairing })
}

// ---------------------------------------------------------------------------
// Joint SDP: diamond distance minimized over an affine family of responses
// ---------------------------------------------------------------------------

/// Orthonormal basis of the traceless Hermitian part of `alg`.
fn traceless_basis(alg: &BlockAlgebra) -> Vec<CMat> {
    let n = alg.ambient_dim();
    let id = eye(n);
    let mut out: Vec<CMat> = Vec::new();
    for b in alg.hermitian_basis() {
        let mut v = &b - &id * c(hs(&b, &id) / n as f64);
        for u in &out {
            v -= u * c(hs(u, &v));
        }
        let f = frob(&v);
        if f > 1e-9 {
            out.push(v * c(1.0 / f));
        }
    }
    out
}

/// Channels `in_alg → out_alg` written as `I/d_out ⊗ I + Σ t_k E_k ⊗ F_k`
/// with traceless `E_k`: every `t` gives a trace-preserving map.
struct ChannelParam {
    in_alg: BlockAlgebra,
    out_alg: BlockAlgebra,
    base: CMat,
    basis: Vec<CMat>,
}

impl ChannelParam {
    fn new(in_alg: &BlockAlgebra, out_alg: &BlockAlgebra) -> Self {
        let (din, dout) = (in_alg.ambient_dim(), out_alg.ambient_dim());
        let base = kron(&eye(dout), &eye(din)) * c(1.0 / dout as f64);
        let fs = in_alg.hermitian_basis();
        let basis = traceless_basis(out_alg).iter().flat_map(|e| fs.iter().map(move |f| kron(e, f))).collect();
        Self { in_alg: in_alg.clone(), out_alg: out_alg.clone(), base, basis }
    }

    fn dims(&self) -> (usize, usize) {
        (self.out_alg.ambient_dim(), self.in_alg.ambient_dim())
    }

    fn choi(&self, t: &[f64]) -> CMat {
        let mut m = self.base.clone();
        for (b, x) in self.basis.iter().zip(t) {
            m += b * c(*x);
        }
        herm_part(&m)
    }

    fn map_of(&self, choi: &CMat) -> HermitianMap {
        HermitianMap::from_choi_projected(&self.in_alg, &self.out_alg, choi)
    }

    fn affine(&self, vars: &[usize]) -> Affine {
        Affine { constant: self.base.clone(), terms: vars.iter().copied().zip(self.basis.iter().cloned()).collect() }
    }

    /// Mixes toward the completely depolarizing channel until the Choi
    /// matrix is in the cone; trace preservation is untouched.
    fn repair(&self, choi: &CMat, cone: Cone, q: Option<&CMat>) -> CMat {
        let (dout, din) = self.dims();
        let delta = cone_shift(choi, cone, q, dout, din);
        if delta <= 0.0 {
            return choi.clone();
        }
        let s = delta * dout as f64 / (1.0 + delta * dout as f64);
        choi * c(1.0 - s) + &self.base * c(s)
    }
}

struct Joint {
    /// Optimal `λ`: the diamond distance at the solver's response.
    value: f64,
    dual: f64,
    t: Vec<f64>,
    /// `W₋ − W₊`: Choi matrix of the adjoint of an optimal dual-ball payoff.
    z: CMat,
    q: Option<CMat>,
}

fn finite(sol: &SdpSolution) -> bool {
    sol.y.iter().all(|v| v.is_finite())
}

/// `min λ` over `t` and `Y` with `Y ± (J − R(t))` in the cone and
/// `λI − Tr_out Y ⪰ 0`, where `R(t) = base + Σ t_k terms_k`.
fn joint_min(
    target: &HermitianMap,
    base: &CMat,
    terms: &[CMat],
    cone: Cone,
    constrain: impl FnOnce(&mut Sdp, &[usize]) -> Option<HermVar>,
) -> Result<Joint> {
    let (dout, din) = (target.d_out(), target.d_in());
    let mut sdp = Sdp::new(0);
    let tv: Vec<usize> = terms.iter().map(|_| sdp.add_var()).collect();
    let q = constrain(&mut sdp, &tv);
    let lam = sdp.add_var();
    sdp.set_objective(lam, 1.0);
    let y = HermVar::new(&mut sdp, &target.out_alg().tensor(target.in_alg()));
    let d = Affine {
        constant: target.choi_mat() - base,
        terms: tv.iter().zip(terms).map(|(v, r)| (*v, -r)).collect(),
    };
    let yi = y.image(1.0, |b| b.clone());
    let hp = add_cone(&mut sdp, &yi.clone().plus(d.clone()), cone, dout, din);
    let hm = add_cone(&mut sdp, &yi.plus(d.scaled(-1.0)), cone, dout, din);
    Affine::scalar(din, lam, &eye(din)).plus(y.image(-1.0, |b| ptrace_first(b, dout, din))).psd(&mut sdp);
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("deficiency SDP ended with status {:?}", sol.status)));
    }
    let z = match (hp.blocks.first(), hm.blocks.first()) {
        (Some(p), Some(m)) if cone == Cone::Psd => herm_part(&(&sol.block_duals[m.0] - &sol.block_duals[p.0])),
        _ => CMat::zeros(dout * din, dout * din),
    };
    Ok(Joint {
        value: sol.primal_value,
        dual: sol.dual_value,
        t: tv.iter().map(|v| sol.y[*v]).collect(),
        z,
        q: q.map(|h| h.value(&sol.y)),
    })
}

/// Turns `Z = C(Γ₀*)` into a CP payoff `Γ = Γ₀ + X ⊗ I` from the repaired
/// dual-diamond certificate `X` of `Γ₀`; pairings with channels shift by the
/// constant `Tr X`.
fn positive_witness(target: &HermitianMap, z: &CMat) -> Result<Option<HermitianMap>> {
    if frob(z) < 1e-12 {
        return Ok(None);
    }
    let g0 = HermitianMap::from_choi_projected(target.in_alg(), target.out_alg(), z).adjoint();
    let r = dual_diamond_norm(Family::Cp, &g0)?;
    let Some(x) = r.certificate.operator else { return Ok(None) };
    let choi = g0.choi_mat() + kron(&x, &eye(g0.d_in()));
    Ok(Some(HermitianMap::from_choi_projected(g0.in_alg(), g0.out_alg(), &choi)))
}

/// The two compositions entering the payoff inequality.
fn witness_sides(
    dir: Direction,
    target: &HermitianMap,
    psi: &HermitianMap,
    g: &HermitianMap,
) -> Result<(HermitianMap, HermitianMap)> {
    match dir {
        Direction::Post => Ok((compose(target, g)?, compose(psi, g)?)),
        Direction::Pre => Ok((compose(g, target)?, compose(g, psi)?)),
    }
}

/// `(‖Φ-side‖^◇ − ‖Ψ-side‖^◇) / ‖Γ‖^◇` with the numerator bounded below and
/// the subtracted terms bounded above.
fn witness_eps(phi_side: &HermitianMap, psi_side: &HermitianMap, gamma: &HermitianMap) -> Result<f64> {
    let g = dual_diamond_norm(Family::Cp, gamma)?.value_hi;
    if g <= 1e-12 {
        return Ok(0.0);
    }
    let a = dual_diamond_norm(Family::Cp, phi_side)?.value_lo;
    let b = dual_diamond_norm(Family::Cp, psi_side)?.value_hi;
    Ok(((a - b) / g).max(0.0))
}

fn payoff_bound(dir: Direction, target: &HermitianMap, psi: &HermitianMap, g: &HermitianMap) -> Result<f64> {
    let (a, b) = witness_sides(dir, target, psi, g)?;
    witness_eps(&a, &b, g)
}

struct Core {
    lo: f64,
    hi: f64,
    sdp_value: f64,
    response: HermitianMap,
    witness: Option<HermitianMap>,
    eps_witness: Option<f64>,
    exact: bool,
}

fn family_cone(family: Family) -> Cone {
    match family {
        Family::Cp => Cone::Psd,
        Family::Pos => Cone::Dec,
        Family::Eb => Cone::Ppt,
    }
}

fn small(dout: usize, din: usize) -> bool {
    dout * din <= EXACT_PRODUCT_DIM || dout == 1 || din == 1
}

/// `½ min ‖target − response‖_◇` over channels acting after (`Post`) or
/// before (`Pre`) `psi`.
fn core(family: Family, dir: Direction, target: &HermitianMap, psi: &HermitianMap) -> Result<Core> {
    let param = match dir {
        Direction::Post => ChannelParam::new(psi.out_alg(), target.out_alg()),
        Direction::Pre => ChannelParam::new(target.in_alg(), psi.in_alg()),
    };
    let respond = |ch: &HermitianMap| match dir {
        Direction::Post => compose(ch, psi),
        Direction::Pre => compose(psi, ch),
    };
    let r0 = respond(&param.map_of(&param.base))?.choi_mat().clone();
    let terms = param
        .basis
        .par_iter()
        .map(|b| respond(&param.map_of(b)).map(|m| m.choi_mat().clone()))
        .collect::<Result<Vec<_>>>()?;
    let cone = family_cone(family);
    let (cd_out, cd_in) = param.dims();
    let joint = joint_min(target, &r0, &terms, cone, |sdp, tv| add_cone(sdp, &param.affine(tv), cone, cd_out, cd_in).q)?;
    let fixed = param.repair(&param.choi(&joint.t), cone, joint.q.as_ref());
    let response = param.map_of(&fixed);
    let diff = target - &respond(&response)?;
    match family {
        Family::Cp => {
            let hi = 0.5 * diamond_norm(Family::Cp, &diff)?.value_hi;
            let witness = positive_witness(target, &joint.z)?;
            let eps_witness = match &witness {
                Some(g) => Some(payoff_bound(dir, target, psi, g)?),
                None => None,
            };
            Ok(Core {
                lo: eps_witness.unwrap_or(0.0).min(hi),
                hi,
                sdp_value: 0.5 * joint.value,
                response,
                witness,
                eps_witness,
                exact: true,
            })
        }
        Family::Pos => {
            let dec_hi = 0.5 * diamond_norm(Family::Pos, &diff)?.value_hi;
            // CP responses are Pos responses and the Pos norm is the smaller one
            let cp = core(Family::Cp, dir, target, psi)?;
            let cp_diff = target - &respond(&cp.response)?;
            let cp_hi = 0.5 * diamond_norm(Family::Pos, &cp_diff)?.value_hi;
            let exact = small(cd_out, cd_in) && small(target.d_out(), target.d_in());
            let lo = if exact { (0.5 * joint.dual).max(0.0) } else { 0.0 };
            let (hi, response) = if dec_hi <= cp_hi { (dec_hi, response) } else { (cp_hi, cp.response) };
            Ok(Core {
                lo: lo.min(hi),
                hi,
                sdp_value: 0.5 * joint.value,
                response,
                witness: None,
                eps_witness: None,
                exact,
            })
        }
        // without the identity among the decision channels only the
        // trivial upper bound survives
        Family::Eb => Ok(Core {
            lo: (0.5 * joint.dual).clamp(0.0, 1.0),
            hi: 1.0,
            sdp_value: 0.5 * joint.value,
            response,
            witness: None,
            eps_witness: None,
            exact: false,
        }),
    }
}

/// Random channel `from → to` with Choi matrix on the algebra pattern.
fn random_channel_between(from: &BlockAlgebra, to: &BlockAlgebra, rng: &mut Rng) -> HermitianMap {
    let ch = rng.channel(from.ambient_dim(), to.ambient_dim());
    HermitianMap::from_choi_projected(from, to, ch.choi_mat())
}

/// Random entanglement-breaking map `from → to`: `a ↦ Σ_i Tr(F_i a) ρ_i`.
fn random_eb_map(from: &BlockAlgebra, to: &BlockAlgebra, rng: &mut Rng) -> Result<HermitianMap> {
    let d = from.ambient_dim();
    let n = 2 + rng.index(d * d);
    let f: Vec<HermitianOperator> = rng
        .povm(d, n)
        .effects()
        .iter()
        .map(|e| HermitianOperator::project_into(e.mat(), from.clone()))
        .collect();
    let e: Vec<HermitianOperator> = (0..n).map(|_| rng.state_in(to).op().clone()).collect();
    make_fe(&f, &e)
}

/// Best payoff bound over random entanglement-breaking `Γ`.
fn eb_witness(
    dir: Direction,
    target: &HermitianMap,
    psi: &HermitianMap,
    samples: usize,
    seed: u64,
) -> Result<Option<(f64, HermitianMap)>> {
    if samples == 0 {
        return Ok(None);
    }
    // Γ runs from the target's output to its input in both directions
    let (from, to) = (target.out_alg().clone(), target.in_alg().clone());
    let runs = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = Rng::seed(derive_seed(seed, k as u64));
            let g = random_eb_map(&from, &to, &mut rng)?;
            Ok((payoff_bound(dir, target, psi, &g)?, g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(runs.into_iter().reduce(|a, b| if b.0 > a.0 { b } else { a }))
}

fn check_channel(m: &HermitianMap, name: &str) -> Result<()> {
    let (tp, err) = m.is_trace_preserving();
    if !tp {
        return Err(Error::Invalid(format!("{name} is not trace preserving (defect {err:e})")));
    }
    Ok(())
}

fn deficiency(
    family: Family,
    dir: Direction,
    phi: &HermitianMap,
    psi: &HermitianMap,
    d: Option<&BlockAlgebra>,
    opts: &DeficiencyOptions,
) -> Result<DeficiencyReport> {
    check_channel(phi, "Phi")?;
    check_channel(psi, "Psi")?;
    let sufficient = match dir {
        Direction::Post => phi.out_alg(),
        Direction::Pre => phi.in_alg(),
    };
    let full = core(family, dir, phi, psi)?;
    let mut diag = Diagnostics {
        method: format!("joint-sdp-{}", family_cone(family).name()),
        exact: full.exact,
        sdp_value: Some(full.sdp_value),
        eps_witness: full.eps_witness,
        ..Default::default()
    };
    let mut lo = full.lo;
    let mut witness = full.witness.clone();
    let collapse = d.is_none_or(|d| d == sufficient);
    if !collapse {
        // ε_D ≤ ε for the sufficient algebra; lower bounds come from
        // individual decision channels
        let d = d.expect("checked");
        diag.exact = false;
        diag.eps_witness = None;
        lo = 0.0;
        witness = None;
        let runs = (0..opts.net)
            .into_par_iter()
            .map(|k| {
                let mut rng = Rng::seed(derive_seed(opts.seed, 1 << 20 | k as u64));
                let target = match dir {
                    Direction::Post => compose(&random_channel_between(phi.out_alg(), d, &mut rng), phi)?,
                    Direction::Pre => compose(phi, &random_channel_between(d, phi.in_alg(), &mut rng))?,
                };
                let r = core(family, dir, &target, psi)?;
                Ok((r.lo, r.witness))
            })
            .collect::<Result<Vec<_>>>()?;
        for (l, w) in runs {
            if l > lo {
                lo = l;
                witness = w;
            }
        }
        diag.notes.push(format!("decision algebra blocks {:?}: lower bound from {} random decision channels", d.blocks(), opts.net));
    }
    if family == Family::Cp && collapse {
        if let Some((v, g)) = eb_witness(dir, phi, psi, opts.eb_samples, opts.seed)? {
            diag.eps_witness_classical = Some(v);
            if v > lo {
                lo = v;
                witness = Some(g);
            }
        }
    }
    let mut rep = DeficiencyReport::new(lo.min(full.hi), full.hi, family, diag);
    rep.certificate_channel = Some(full.response);
    rep.witness_payoff = witness;
    Ok(rep)
}

impl Cone {
    fn name(self) -> &'static str {
        match self {
            Cone::Psd => "psd",
            Cone::Ppt => "ppt",
            Cone::Dec => "decomposable",
        }
    }
}

/// Minimal `ε` such that `Ψ` simulates `Φ` by post-processing, for decisions
/// in `d` (`None`: the output algebra of `Φ`, which decides all `D`).
pub fn post_deficiency(
    family: Family,
    phi: &HermitianMap,
    psi: &HermitianMap,
    d: Option<&BlockAlgebra>,
    opts: &DeficiencyOptions,
) -> Result<DeficiencyReport> {
    if phi.in_alg() != psi.in_alg() {
        return Err(Error::AlgebraMismatch("post-processing needs a common input algebra".into()));
    }
    deficiency(family, Direction::Post, phi, psi, d, opts)
}

/// Minimal `ε` such that `Ψ` simulates `Φ` by pre-processing, for inputs
/// prepared on `d` (`None`: the input algebra of `Φ`, which decides all `D`).
pub fn pre_deficiency(
    family: Family,
    phi: &HermitianMap,
    psi: &HermitianMap,
    d: Option<&BlockAlgebra>,
    opts: &DeficiencyOptions,
) -> Result<DeficiencyReport> {
    if phi.out_alg() != psi.out_alg() {
        return Err(Error::AlgebraMismatch("pre-processing needs a common output algebra".into()));
    }
    deficiency(family, Direction::Pre, phi, psi, d, opts)
}

// ---------------------------------------------------------------------------
// Range inclusion
// ---------------------------------------------------------------------------

/// `inf_ρ ‖Φσ − Ψρ‖_1 = max { Tr GΦσ − λ_max Ψ*(G) : −I ≤ G ≤ I }`,
/// returned at a feasible `G`, so the value is a lower bound.
fn range_inner(phi: &HermitianMap, psi_adj: &HermitianMap, phi_sigma: &CMat) -> Result<(f64, CMat)> {
    let b = phi.out_alg();
    let db = b.ambient_dim();
    let da = psi_adj.d_out();
    let mut sdp = Sdp::new(0);
    let g = HermVar::new(&mut sdp, b);
    g.objective_dot(&mut sdp, phi_sigma, -1.0);
    let s = sdp.add_var();
    sdp.set_objective(s, 1.0);
    g.image(-1.0, |m| m.clone()).plus_const(&eye(db)).psd(&mut sdp);
    g.image(1.0, |m| m.clone()).plus_const(&eye(db)).psd(&mut sdp);
    Affine::scalar(da, s, &eye(da)).plus(g.image(-1.0, |m| psi_adj.apply_mat(m))).psd(&mut sdp);
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("range-inclusion SDP ended with status {:?}", sol.status)));
    }
    let gm = b.project(&apply_fn(&herm_part(&g.value(&sol.y)), |v| v.clamp(-1.0, 1.0)));
    Ok((range_value(psi_adj, &gm, phi_sigma), gm))
}

fn range_value(psi_adj: &HermitianMap, g: &CMat, phi_sigma: &CMat) -> f64 {
    hs(g, phi_sigma) - max_eig(&herm_part(&psi_adj.apply_mat(g)))
}

struct RangeSearch {
    /// `sup_σ inf_ρ ½‖Φσ − Ψρ‖_1` from below.
    eps: f64,
    g: CMat,
}

/// Alternates the optimal `G` for a pure `σ` and the top eigenvector of
/// `Φ*(G)` for a fixed `G`.
fn range_search(phi: &HermitianMap, psi: &HermitianMap, starts: usize, seed: u64) -> RangeSearch {
    let phi_adj = phi.adjoint();
    let psi_adj = psi.adjoint();
    let din = phi.d_in();
    let res = seesaw_multistart(
        starts,
        seed,
        |rng| rng.unit_vector(din),
        |x: &DVector<C64>| {
            let sigma = x * x.adjoint();
            match range_inner(phi, &psi_adj, &phi.apply_mat(&sigma)) {
                Ok(r) => r,
                Err(_) => (f64::NEG_INFINITY, CMat::zeros(phi.d_out(), phi.d_out())),
            }
        },
        |g: &CMat| {
            let (w, v) = eigh(&herm_part(&phi_adj.apply_mat(g)));
            let k = w.len() - 1;
            let x = v.column(k).into_owned();
            let sigma = &x * x.adjoint();
            (range_value(&psi_adj, g, &phi.apply_mat(&sigma)), x)
        },
        50,
        1e-11,
    );
    RangeSearch { eps: 0.5 * res.value.max(0.0), g: res.b }
}

/// `(‖Φ*(G′)‖ − ‖Ψ*(G′)‖) / ‖G′‖` for `G′ = (G + I)/2 ⪰ 0`.
fn range_witness(phi: &HermitianMap, psi: &HermitianMap, g: &CMat) -> f64 {
    let n = g.nrows();
    let gp = (g + eye(n)) * c(0.5);
    let nrm = op_norm(&gp);
    if nrm <= 1e-12 {
        return 0.0;
    }
    let a = op_norm(&herm_part(&phi.adjoint().apply_mat(&gp)));
    let b = op_norm(&herm_part(&psi.adjoint().apply_mat(&gp)));
    ((a - b) / nrm).max(0.0)
}

/// `ε` with `sup_σ inf_ρ ‖Φ(σ) − Ψ(ρ)‖_1 = 2ε`: deficiency for a single
/// prepared input (classical pre-processing).
pub fn pre_range_inclusion(phi: &HermitianMap, psi: &HermitianMap, opts: &DeficiencyOptions) -> Result<DeficiencyReport> {
    if phi.out_alg() != psi.out_alg() {
        return Err(Error::AlgebraMismatch("range inclusion needs a common output algebra".into()));
    }
    let s = range_search(phi, psi, opts.starts, opts.seed);
    let w = range_witness(phi, psi, &s.g);
    // the single-input problem is dominated by the full pre-processing one
    let full = pre_deficiency(Family::Cp, phi, psi, None, &opts.without_samples())?;
    let hi = full.eps_hi.min(1.0);
    let mut diag = Diagnostics {
        method: "seesaw-sdp+payoff-witness".into(),
        exact: false,
        eps_witness: Some(w),
        eps_search: Some(s.eps),
        ..Default::default()
    };
    diag.notes.push(format!("search and witness differ by {:.3e}", (s.eps - w).abs()));
    diag.notes.push("upper bound from the full pre-processing deficiency".into());
    let mut rep = DeficiencyReport::new(s.eps.max(w).min(hi), hi, Family::Cp, diag);
    rep.witness_operator = Some(s.g);
    rep.certificate_channel = full.certificate_channel;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Minimal `ε` such that a randomization of `e` reproduces `f`.
pub fn experiment_post_deficiency(
    family: Family,
    e: &Experiment,
    f: &Experiment,
    d: Option<&BlockAlgebra>,
    opts: &DeficiencyOptions,
) -> Result<DeficiencyReport> {
    if e.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), got: f.len() });
    }
    let mut rep = post_deficiency(family, &f.cq_channel(), &e.cq_channel(), d, opts)?;
    if let Some(alpha) = &rep.certificate_channel {
        let worst = e
            .states()
            .iter()
            .zip(f.states())
            .map(|(r, s)| Ok(0.5 * trace_norm(&(alpha.apply(r.op())?.mat() - s.mat()))))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rep.diagnostics.per_index_max = Some(worst);
    }
    Ok(rep)
}

/// `inf_{w ∈ simplex} ‖σ − Σ w_j ρ_j‖_1`, bracketed by a repaired mixture
/// and a repaired dual operator.
fn hull_distance(rhos: &[CMat], sigma: &CMat, alg: &BlockAlgebra) -> Result<(f64, f64, Vec<f64>)> {
    let n = rhos.len();
    let d = alg.ambient_dim();
    let mut sdp = Sdp::new(0);
    let w: Vec<usize> = (0..n).map(|_| sdp.add_var()).collect();
    for v in &w {
        sdp.add_row(0.0, vec![(*v, 1.0)]);
    }
    sdp.add_eq(w.iter().map(|v| (*v, 1.0)).collect(), 1.0);
    let p = HermVar::new(&mut sdp, alg);
    p.objective_dot(&mut sdp, &eye(d), 2.0);
    let pb = p.image(1.0, |m| m.clone()).psd(&mut sdp);
    // N = P − σ + Σ w_j ρ_j ⪰ 0
    let mut nexpr = p.image(1.0, |m| m.clone()).plus_const(&(-sigma));
    for (v, r) in w.iter().zip(rhos) {
        nexpr.terms.push((*v, r.clone()));
    }
    let nb = nexpr.psd(&mut sdp);
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("hull-distance SDP ended with status {:?}", sol.status)));
    }
    let mut wt: Vec<f64> = w.iter().map(|v| sol.y[*v].max(0.0)).collect();
    let s: f64 = wt.iter().sum();
    if s > 0.0 {
        wt.iter_mut().for_each(|x| *x /= s);
    } else {
        wt = vec![1.0 / n as f64; n];
    }
    let mut mix = CMat::zeros(d, d);
    for (x, r) in wt.iter().zip(rhos) {
        mix += r * c(*x);
    }
    let hi = trace_norm(&(sigma - mix));
    // W_P + W_N = 2I at optimality; G = W_N − I lies in [−I, I] after clipping
    let _ = pb;
    let g = apply_fn(&herm_part(&(&sol.block_duals[nb.0] - eye(d))), |v| v.clamp(-1.0, 1.0));
    let lo = hs(&g, sigma) - rhos.iter().map(|r| hs(&g, r)).fold(f64::NEG_INFINITY, f64::max);
    Ok((lo.max(0.0).min(hi), hi, wt))
}

/// Minimal `ε` with every state of `f` within `2ε` of the convex hull of `e`.
pub fn experiment_pre_deficiency(e: &Experiment, f: &Experiment) -> Result<DeficiencyReport> {
    if e.algebra() != f.algebra() {
        return Err(Error::AlgebraMismatch("experiments must share an algebra".into()));
    }
    let rhos: Vec<CMat> = e.states().iter().map(|s| s.mat().clone()).collect();
    let rows = f
        .states()
        .par_iter()
        .map(|s| hull_distance(&rhos, s.mat(), e.algebra()))
        .collect::<Result<Vec<_>>>()?;
    let lo = rows.iter().map(|r| r.0).fold(0.0, f64::max) * 0.5;
    let hi = rows.iter().map(|r| r.1).fold(0.0, f64::max) * 0.5;
    let diag = Diagnostics { method: "hull-distance-sdp".into(), exact: true, ..Default::default() };
    let mut rep = DeficiencyReport::new(lo, hi, Family::Cp, diag);
    rep.certificate_weights = Some(rows.into_iter().map(|r| r.2).collect());
    Ok(rep)
}

/// Lower bound on the deficiency of `e` against `f` over two-outcome
/// classical decisions: `sup_a ½(‖Σ a_i σ_i‖_1 − ‖Σ a_i ρ_i‖_1)/‖a‖_1`,
/// returned with the maximizing `a`.
pub fn classical_two_outcome_deficiency(e: &Experiment, f: &Experiment, seed: u64) -> Result<(f64, Vec<f64>)> {
    if e.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), got: f.len() });
    }
    let n = e.len();
    let comb = |x: &Experiment, a: &[f64]| {
        let d = x.algebra().ambient_dim();
        let mut m = CMat::zeros(d, d);
        for (s, w) in x.states().iter().zip(a) {
            m += s.mat() * c(*w);
        }
        trace_norm(&m)
    };
    let gap = |a: &[f64]| {
        let l1: f64 = a.iter().map(|x| x.abs()).sum();
        if l1 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        0.5 * (comb(f, a) - comb(e, a)) / l1
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    if n == 2 {
        // (a, −a) gives the same gap, so half a turn covers every direction
        let steps = 4000;
        let pt = |th: f64| vec![th.cos(), th.sin()];
        let h = std::f64::consts::PI / steps as f64;
        let mut arg = 0.0;
        for k in 0..steps {
            let th = k as f64 * h;
            let v = gap(&pt(th));
            if v > best.0 {
                best = (v, pt(th));
                arg = th;
            }
        }
        // golden-section refinement around the best grid point
        let (mut a, mut b) = (arg - h, arg + h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (x1, x2) = (b - r * (b - a), a + r * (b - a));
            if gap(&pt(x1)) > gap(&pt(x2)) {
                b = x2;
            } else {
                a = x1;
            }
        }
        let th = 0.5 * (a + b);
        let v = gap(&pt(th));
        if v > best.0 {
            best = (v, pt(th));
        }
    } else {
        let mut rng = Rng::seed(seed);
        for _ in 0..4000 * n {
            let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let v = gap(&a);
            if v > best.0 {
                best = (v, a);
            }
        }
    }
    Ok((best.0.max(0.0), best.1))
}

// ---------------------------------------------------------------------------
// POVMs
// ---------------------------------------------------------------------------

/// Minimal `ε` such that a stochastic relabeling of `n` reproduces `m`.
pub fn povm_post_cleanness(m: &Povm, n: &Povm) -> Result<DeficiencyReport> {
    if m.algebra() != n.algebra() {
        return Err(Error::AlgebraMismatch("POVMs must share an algebra".into()));
    }
    let (mm, nn) = (m.len(), n.len());
    let target = make_qc(m.effects())?;
    let psi = make_qc(n.effects())?;
    let d = m.algebra().ambient_dim();
    let terms: Vec<CMat> = (0..mm)
        .flat_map(|i| n.effects().iter().map(move |e| kron(&unit(mm, i, i), &transpose(e.mat()))))
        .collect();
    let base = CMat::zeros(mm * d, mm * d);
    let joint = joint_min(&target, &base, &terms, Cone::Psd, |sdp, tv| {
        for v in tv {
            sdp.add_row(0.0, vec![(*v, 1.0)]);
        }
        for j in 0..nn {
            sdp.add_eq((0..mm).map(|i| (tv[i * nn + j], 1.0)).collect(), 1.0);
        }
        None
    })?;
    let mut lambda: Vec<Vec<f64>> = (0..mm).map(|i| (0..nn).map(|j| joint.t[i * nn + j].max(0.0)).collect()).collect();
    for j in 0..nn {
        let s: f64 = (0..mm).map(|i| lambda[i][j]).sum();
        for row in lambda.iter_mut() {
            row[j] = if s > 0.0 { row[j] / s } else { 1.0 / mm as f64 };
        }
    }
    let relabeled = n.relabel(&lambda)?;
    let diff = &target - &make_qc(relabeled.effects())?;
    let hi = 0.5 * diamond_norm(Family::Cp, &diff)?.value_hi;
    let witness = positive_witness(&target, &joint.z)?;
    let eps_witness = match &witness {
        Some(g) => Some(payoff_bound(Direction::Post, &target, &psi, g)?),
        None => None,
    };
    let diag = Diagnostics {
        method: "joint-sdp-stochastic".into(),
        exact: true,
        sdp_value: Some(0.5 * joint.value),
        eps_witness,
        ..Default::default()
    };
    // qc maps have an abelian output, where every family gives the same value
    let mut rep = DeficiencyReport::new(eps_witness.unwrap_or(0.0).min(hi), hi, Family::Cp, diag);
    rep.certificate_stochastic = Some(lambda);
    rep.witness_payoff = witness;
    Ok(rep)
}

/// Minimal `ε` such that `n` preceded by a channel reproduces `m`; outcome
/// counts are padded with zero effects.
pub fn povm_pre_deficiency(
    family: Family,
    m: &Povm,
    n: &Povm,
    opts: &DeficiencyOptions,
) -> Result<DeficiencyReport> {
    let k = m.len().max(n.len());
    let (mp, np) = (m.padded(k), n.padded(k));
    pre_deficiency(family, &make_qc(mp.effects())?, &make_qc(np.effects())?, None, opts)
}

/// `Φ*(E)` as a POVM on the input algebra of `Φ`.
pub fn pullback(phi: &HermitianMap, e: &Povm) -> Result<Povm> {
    let adj = phi.adjoint();
    Povm::new(e.effects().iter().map(|x| adj.apply(x)).collect::<Result<Vec<_>>>()?)
}

// ---------------------------------------------------------------------------
// Payoff maps as cq payoff lists
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CqGamma {
    #[serde(serialize_with = "ser_ops")]
    pub operators: Vec<HermitianOperator>,
    /// `Φ^cq_G`, from `k²` classical indices to the output ⊗ input of `Γ`.
    pub map: HermitianMap,
    /// `max |Σ_j U_j* a U_j / k − Tr(a) I|` on a random `a`.
    pub design_error: f64,
    pub norm_gamma: NormResult,
    pub norm_cq: NormResult,
}

/// Shift-and-phase unitaries `X^a Z^b` on `C^k`.
pub fn weyl_group(k: usize) -> Vec<CMat> {
    let w = 2.0 * std::f64::consts::PI / k as f64;
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            out.push(CMat::from_fn(k, k, |i, j| {
                if i == (j + a) % k {
                    C64::from_polar(1.0, w * (b * j) as f64)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
    }
    out
}

/// `G_j = (id ⊗ θ_j)(C(Γ))` with `θ_j(a) = U_j* a U_j / k` over the Weyl
/// group, which turns a CP payoff map into a cq payoff list of equal dual
/// diamond norm.
pub fn cq_gamma_construct(gamma: &HermitianMap) -> Result<CqGamma> {
    if !gamma.in_alg().is_full() {
        return Err(Error::Invalid("the payoff map must act on a full matrix algebra".into()));
    }
    let v = cp_membership(gamma);
    if v.is_out() {
        return Err(Error::NotPsd(v.margin));
    }
    let (k, h) = (gamma.d_in(), gamma.d_out());
    let us = weyl_group(k);
    let mut rng = Rng::seed(0x5eed);
    let a = rng.ginibre(k, k);
    let mut avg = CMat::zeros(k, k);
    for u in &us {
        avg += u.adjoint() * &a * u * c(1.0 / k as f64);
    }
    let design_error = max_abs(&(avg - eye(k) * trace(&a)));
    let alg = gamma.out_alg().tensor(gamma.in_alg());
    let cm = gamma.choi_mat();
    let operators: Vec<HermitianOperator> = us
        .iter()
        .map(|u| {
            let l = kron(&eye(h), u);
            HermitianOperator::project_into(&(l.adjoint() * cm * &l * c(1.0 / k as f64)), alg.clone())
        })
        .collect();
    let map = make_cq(&operators)?;
    let norm_gamma = dual_diamond_norm(Family::Cp, gamma)?;
    let norm_cq = cq_dual_diamond(&operators)?;
    Ok(CqGamma { operators, map, design_error, norm_gamma, norm_cq })
}

// ---------------------------------------------------------------------------
// Bipartite states from a channel and a pure state
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BiState {
    /// Channel from the second factor `D` to the first factor `H`.
    pub beta: HermitianMap,
    /// `|x⟩⟨x|` on `D ⊗ D` with `x = Σ_i |i⟩ ⊗ σ_D^{1/2}|i⟩`.
    #[serde(serialize_with = "ser::mat")]
    pub sigma0: CMat,
    /// `‖σ − (β ⊗ id)(σ₀)‖_1`.
    pub reconstruction_error: f64,
}

/// Writes a state `σ` on `H ⊗ D` as `(β ⊗ id_D)(σ₀)` with `σ₀` pure.
pub fn bi_state_factorize(sigma: &State, d_h: usize, d_d: usize) -> Result<BiState> {
    let n = d_h * d_d;
    if sigma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.dim() });
    }
    let s = sigma.mat();
    let sd = herm_part(&ptrace_first(s, d_h, d_d));
    let (w, p) = pinv_sqrt(&sd);
    let wk = kron(&eye(d_h), &w);
    let choi = &wk * s * &wk + kron(&eye(d_h), &(eye(d_d) - p));
    let beta = HermitianMap::from_choi_projected(&BlockAlgebra::full(d_d), &BlockAlgebra::full(d_h), &herm_part(&choi));
    let r = sqrt_psd(&sd);
    let x = DVector::from_fn(d_d * d_d, |idx, _| r[(idx % d_d, idx / d_d)]);
    let sigma0 = &x * x.adjoint();
    let lifted = tensor_map(&beta, &HermitianMap::identity(&BlockAlgebra::full(d_d)));
    let reconstruction_error = trace_norm(&(lifted.apply_mat(&sigma0) - s));
    Ok(BiState { beta, sigma0, reconstruction_error })
}

// ---------------------------------------------------------------------------
// Tensor lifts
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Slack {
    pub name: String,
    /// Nonnegative when the implication is not contradicted.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorLiftReport {
    pub direction: Direction,
    pub k: usize,
    /// `ε` of the premise (tensored pair).
    pub premise: Bounds,
    /// `ε` of the conclusion (original pair).
    pub conclusion: Bounds,
    pub slacks: Vec<Slack>,
    /// How far the premise lower bound reaches the conclusion upper bound.
    pub tightness: f64,
    pub holds: bool,
}

impl TensorLiftReport {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().map(|s| s.value).fold(f64::INFINITY, f64::min)
    }
}

/// `ε′ = ε + ½√ε`.
pub fn degraded(eps: f64) -> f64 {
    let e = eps.max(0.0);
    e + 0.5 * e.sqrt()
}

/// Evaluates both sides of the tensor-lift implications on one instance.
///
/// `Post`: classical `k²`-outcome deficiency of `(Φ⊗id_k, Ψ⊗id_k)` bounds the
/// `k`-dimensional quantum deficiency of `(Φ, Ψ)` from above. `Pre`: the
/// quantum pre-processing deficiency `ε` dominates the range-inclusion
/// deficiencies of `(Φ⊗ξ, Ψ⊗ξ)`, and is at most `ε′` of the one for `ξ = id`.
pub fn tensor_lift_check(
    phi: &HermitianMap,
    psi: &HermitianMap,
    k: usize,
    direction: Direction,
    opts: &DeficiencyOptions,
) -> Result<TensorLiftReport> {
    let dalg = BlockAlgebra::full(k);
    let id = HermitianMap::identity(&dalg);
    let quiet = opts.without_samples();
    let phi_t = tensor_map(phi, &id);
    let psi_t = tensor_map(psi, &id);
    match direction {
        Direction::Post => {
            let q = post_deficiency(Family::Cp, phi, psi, Some(&dalg), &quiet)?;
            let conclusion = q.bounds();
            // lower bound: a quantum payoff turned into k² classical payoffs
            let premise_lo = match &q.witness_payoff {
                Some(g) if g.in_alg().is_full() => {
                    let cg = cq_gamma_construct(g)?;
                    payoff_bound(Direction::Post, &phi_t, &psi_t, &cg.map)?
                }
                _ => 0.0,
            };
            // upper bound: the certificate tensored with the identity
            let alpha = q.certificate_channel.as_ref().expect("post deficiency returns a channel");
            let resp = compose(&tensor_map(alpha, &id), &psi_t)?;
            let premise_hi = 0.5 * diamond_norm(Family::Cp, &(&phi_t - &resp))?.value_hi;
            let premise = Bounds { lo: premise_lo.min(premise_hi), hi: premise_hi };
            let slacks = vec![Slack { name: "classical lift => quantum".into(), value: premise.hi - conclusion.lo }];
            Ok(finish(direction, k, premise, conclusion, slacks))
        }
        Direction::Pre => {
            let q = pre_deficiency(Family::Cp, phi, psi, Some(&dalg), &quiet)?;
            let conclusion = q.bounds();
            let iii = range_search(&phi_t, &psi_t, opts.starts, opts.seed);
            let iii_w = range_witness(&phi_t, &psi_t, &iii.g);
            let eps_iii = iii.eps.max(iii_w);
            let mut rng = Rng::seed(derive_seed(opts.seed, 7));
            let xi = rng.channel(k, k);
            let ii = range_search(&tensor_map(phi, &xi), &tensor_map(psi, &xi), opts.starts, opts.seed);
            // the range-inclusion values are lower estimates, which makes the
            // degraded-implication check conservative
            let premise = Bounds { lo: eps_iii, hi: eps_iii };
            let slacks = vec![
                Slack { name: "quantum => lift with random channel".into(), value: conclusion.hi - ii.eps },
                Slack { name: "quantum => lift with identity".into(), value: conclusion.hi - eps_iii },
                Slack { name: "lift with identity => degraded quantum".into(), value: degraded(eps_iii) - conclusion.lo },
            ];
            Ok(finish(direction, k, premise, conclusion, slacks))
        }
    }
}

fn finish(direction: Direction, k: usize, premise: Bounds, conclusion: Bounds, slacks: Vec<Slack>) -> TensorLiftReport {
    let tightness = premise.lo - conclusion.hi;
    let mut r = TensorLiftReport { direction, k, premise, conclusion, slacks, tightness, holds: false };
    r.holds = r.min_slack() >= -LIFT_TOL;
    r
}

// ---------------------------------------------------------------------------
// Pointwise and informationally complete checks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseReport {
    pub channel: Bounds,
    pub image: Bounds,
    /// `ε(channels) − ε(images)`, nonnegative up to numerics.
    pub slack: f64,
    /// The experiment spans the input algebra.
    pub spanning: bool,
    /// For a spanning experiment: both deficiencies vanish or neither does.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_equivalence: Option<bool>,
}

/// Compares the deficiency of `(Φ, Ψ)` with that of the images `(Φ(E), Ψ(E))`.
pub fn pointwise_post_check(
    phi: &HermitianMap,
    psi: &HermitianMap,
    e: &Experiment,
    opts: &DeficiencyOptions,
) -> Result<PointwiseReport> {
    let quiet = opts.without_samples();
    let channel = post_deficiency(Family::Cp, phi, psi, None, &quiet)?.bounds();
    let image = experiment_post_deficiency(Family::Cp, &e.map(psi)?, &e.map(phi)?, None, &quiet)?.bounds();
    let mats: Vec<CMat> = e.states().iter().map(|s| s.mat().clone()).collect();
    let spanning = real_span_rank(&mats, 1e-10) == phi.in_alg().real_dim();
    let zero_equivalence = spanning.then(|| (channel.hi <= ZERO_EPS_TOL) == (image.hi <= ZERO_EPS_TOL));
    Ok(PointwiseReport { channel, image, slack: channel.hi - image.lo, spanning, zero_equivalence })
}

/// The effects span the Hermitian part of the algebra.
pub fn ic_check(e: &Povm) -> bool {
    let mats: Vec<CMat> = e.effects().iter().map(|x| x.mat().clone()).collect();
    real_span_rank(&mats, 1e-10) == e.algebra().real_dim()
}

#[derive(Clone, Debug, Serialize)]
pub struct IcReport {
    pub ic: bool,
    /// Pre-processing deficiency of the channels.
    pub channels: Bounds,
    /// Pre-processing deficiency of `Ψ*(E)` against `Φ*(E)`.
    pub pulled_back: Bounds,
    /// The same for random POVMs in place of `E`.
    pub random_povms: Vec<Bounds>,
    /// All three statements agree on whether `ε = 0`.
    pub agree: bool,
}

/// Zero pre-processing deficiency of channels versus that of the measurements
/// they induce, through an informationally complete `E`.
pub fn pre_zero_via_ic(phi: &HermitianMap, psi: &HermitianMap, e: &Povm, opts: &DeficiencyOptions) -> Result<IcReport> {
    let quiet = opts.without_samples();
    let channels = pre_deficiency(Family::Cp, phi, psi, None, &quiet)?.bounds();
    let pulled_back = povm_pre_deficiency(Family::Cp, &pullback(phi, e)?, &pullback(psi, e)?, &quiet)?.bounds();
    let mut rng = Rng::seed(derive_seed(opts.seed, 11));
    let random_povms = (0..3)
        .map(|_| {
            let outcomes = 2 + rng.index(3);
            let f = rng.povm(phi.d_out(), outcomes);
            let f = Povm::new(f.effects().iter().map(|x| HermitianOperator::project_into(x.mat(), phi.out_alg().clone())).collect())?;
            Ok(povm_pre_deficiency(Family::Cp, &pullback(phi, &f)?, &pullback(psi, &f)?, &quiet)?.bounds())
        })
        .collect::<Result<Vec<_>>>()?;
    let zero = |b: &Bounds| b.hi <= ZERO_EPS_TOL;
    let z1 = zero(&channels);
    let agree = if z1 {
        zero(&pulled_back) && random_povms.iter().all(zero)
    } else {
        // a nonzero channel deficiency must show up through an IC measurement
        !ic_check(e) || !zero(&pulled_back)
    };
    Ok(IcReport { ic: ic_check(e), channels, pulled_back, random_povms, agree })
}

/// `(‖ρ^{1/2} − γ^{1/2}‖_F², ‖ρ − γ‖_1)` for PSD `ρ`, `γ`.
pub fn powers_stormer(rho: &CMat, gamma: &CMat) -> (f64, f64) {
    let d = sqrt_psd(&herm_part(rho)) - sqrt_psd(&herm_part(gamma));
    (frob(&d).powi(2), trace_norm(&(rho - gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit() -> BlockAlgebra {
        BlockAlgebra::full(2)
    }

    fn fast() -> DeficiencyOptions {
        DeficiencyOptions { eb_samples: 8, net: 4, ..Default::default() }
    }

    #[test]
    fn reflexive_and_identity_cases() {
        let mut rng = Rng::seed(1);
        let phi = rng.channel(2, 2);
        let r = post_deficiency(Family::Cp, &phi, &phi, None, &fast()).unwrap();
        assert!(r.eps_hi <= 1e-7, "{r:?}");
        let id = HermitianMap::identity(&qubit());
        let r = post_deficiency(Family::Cp, &phi, &id, None, &fast()).unwrap();
        assert!(r.eps_hi <= 1e-7);
        let r = pre_deficiency(Family::Cp, &phi, &phi, None, &fast()).unwrap();
        assert!(r.eps_hi <= 1e-7);
    }

    #[test]
    fn depolarizing_pair_brackets() {
        let phi = HermitianMap::depolarizing(2, 0.5);
        let psi = HermitianMap::depolarizing(2, 0.25);
        let r = post_deficiency(Family::Cp, &phi, &psi, None, &fast()).unwrap();
        assert!(r.eps_hi <= 1e-7, "more noise is a post-processing: {r:?}");
        let r = post_deficiency(Family::Cp, &psi, &phi, None, &fast()).unwrap();
        assert!(r.width() < 1e-5 && r.eps_lo > 0.01, "{r:?}");
        assert!(r.diagnostics.eps_witness.unwrap() >= r.eps_lo - 1e-12);
    }

    #[test]
    fn range_inclusion_of_depolarized_identity() {
        let phi = HermitianMap::identity(&qubit());
        let p = 0.3;
        let psi = HermitianMap::depolarizing(2, p);
        let r = pre_range_inclusion(&phi, &psi, &fast()).unwrap();
        // pure Bloch vectors sit at distance p from the shrunken ball
        assert!((r.eps_lo - p / 2.0).abs() < 1e-6, "{r:?}");
        let s = r.diagnostics.eps_search.unwrap();
        let w = r.diagnostics.eps_witness.unwrap();
        assert!((s - w).abs() < 1e-5);
    }

    #[test]
    fn povm_cleanness_trivial_cases() {
        let mut rng = Rng::seed(3);
        let n = rng.povm(2, 2);
        let m = Povm::trivial(&qubit(), 2);
        let r = povm_post_cleanness(&m, &n).unwrap();
        assert!(r.eps_hi <= 1e-7, "{r:?}");
        let r = povm_post_cleanness(&n, &n).unwrap();
        assert!(r.eps_hi <= 1e-7);
        let lam = r.certificate_stochastic.unwrap();
        for j in 0..2 {
            assert!(((lam[0][j] + lam[1][j]) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weyl_design_and_identity_gamma() {
        let g = cq_gamma_construct(&HermitianMap::identity(&qubit())).unwrap();
        assert!(g.design_error < 1e-10);
        assert_eq!(g.operators.len(), 4);
        assert!((g.norm_gamma.value() - g.norm_cq.value()).abs() < 1e-5);
    }

    #[test]
    fn bi_state_reconstruction_with_rank_deficient_marginal() {
        let mut rng = Rng::seed(4);
        let s = rng.state_rank(4, 1);
        let b = bi_state_factorize(&s, 2, 2).unwrap();
        assert!(b.reconstruction_error < 1e-8);
        assert!(b.beta.is_trace_preserving().0);
    }

    #[test]
    fn hull_distance_of_singleton() {
        let mut rng = Rng::seed(5);
        let (r, s) = (rng.state(2), rng.state(2));
        let e = Experiment::new(vec![r.clone()]).unwrap();
        let f = Experiment::new(vec![s.clone()]).unwrap();
        let rep = experiment_pre_deficiency(&e, &f).unwrap();
        let want = 0.5 * trace_norm(&(r.mat() - s.mat()));
        assert!((rep.eps_lo - want).abs() < 1e-8 && (rep.eps_hi - want).abs() < 1e-8);
    }
}
