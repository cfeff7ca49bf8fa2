//! Invariant suites run by `chandef verify`.

use chandef::cones::{cp_membership, Family};
use chandef::deficiency::{self, DeficiencyOptions};
use chandef::hmap::{self, compose, make_cq, pairing};
use chandef::matops::{linalg, partial_trace};
use chandef::norms::{self, cq_diamond, diamond_norm, norm_duality_check};
use chandef::ovs::{self, dual_section, random_section, same_points};
use chandef::random::derive_seed;
use chandef::{HermitianMap, Result, Rng, Side};
use nalgebra::DMatrix;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type Suite = fn(&mut Rng) -> Result<(bool, String)>;

pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    let suites: [(&str, Suite); 7] = [
        ("matops", matops_suite),
        ("hmap", hmap_suite),
        ("cones", cones_suite),
        ("norms", norms_suite),
        ("deficiency", deficiency_suite),
        ("ovs", ovs_suite),
        ("inequalities", inequality_suite),
    ];
    suites
        .iter()
        .enumerate()
        .map(|(k, (name, f))| {
            let mut rng = Rng::seed(derive_seed(seed, k as u64));
            let (passed, detail) = match f(&mut rng) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            SuiteResult { name: (*name).into(), passed, detail }
        })
        .collect()
}

fn matops_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (a, b) = (rng.state(2), rng.state(3));
        let ab = chandef::matops::tensor(a.op(), b.op());
        let back = partial_trace(&ab, 2, 3, Side::Second)?;
        worst = worst.max(linalg::max_abs(&(back.mat() - a.mat())));
        worst = worst.max((ab.trace() - 1.0).abs());
    }
    Ok((worst <= 1e-12, format!("partial trace of products: max error {worst:.3e}")))
}

fn hmap_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let phi = rng.hermitian_map(2, 3);
        let psi = rng.hermitian_map(3, 2);
        let id = HermitianMap::identity(phi.in_alg());
        let c = compose(&phi, &id)?;
        worst = worst.max(linalg::max_abs(&(c.choi_mat() - phi.choi_mat())));
        let back = hmap::adjoint(&hmap::adjoint(&phi));
        worst = worst.max(linalg::max_abs(&(back.choi_mat() - phi.choi_mat())));
        let lhs = pairing(&phi, &psi)?;
        let rhs = pairing(&psi, &phi)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((worst <= 1e-10, format!("identity, double adjoint and pairing symmetry: max error {worst:.3e}")))
}

fn cones_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let mut ok = true;
    for _ in 0..5 {
        ok &= cp_membership(&rng.channel(2, 2)).is_in();
    }
    ok &= cp_membership(&HermitianMap::transpose(2)).is_out();
    Ok((ok, "random channels are CP and the transpose is not".into()))
}

fn norms_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let mut worst_channel = 0.0f64;
    for _ in 0..3 {
        let r = diamond_norm(Family::Cp, &rng.channel(2, 2))?;
        worst_channel = worst_channel.max((r.value_lo - 1.0).abs()).max((r.value_hi - 1.0).abs());
    }
    let mut worst_gap = 0.0f64;
    for k in 0..3 {
        let m = rng.hermitian_map(2, 2);
        worst_gap = worst_gap.max(norm_duality_check(Family::Cp, &m, k)?.rel_gap);
    }
    let ops: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
    let closed = cq_diamond(&ops).value();
    let general = diamond_norm(Family::Cp, &make_cq(&ops)?)?.value();
    let cq_gap = (closed - general).abs();
    let ok = worst_channel <= 1e-6 && worst_gap <= 1e-5 && cq_gap <= 1e-6;
    Ok((ok, format!("channel norm error {worst_channel:.3e}, duality gap {worst_gap:.3e}, cq closed form gap {cq_gap:.3e}")))
}

fn deficiency_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let opts = DeficiencyOptions { eb_samples: 0, ..Default::default() };
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let phi = rng.channel(2, 2);
        worst = worst.max(deficiency::post_deficiency(Family::Cp, &phi, &phi, None, &opts)?.eps_hi);
        let alpha = rng.channel(2, 2);
        let degraded = compose(&alpha, &phi)?;
        worst = worst.max(deficiency::post_deficiency(Family::Cp, &degraded, &phi, None, &opts)?.eps_hi);
    }
    Ok((worst <= 1e-6, format!("reflexive and factorized pairs: max eps_hi {worst:.3e}")))
}

fn ovs_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let mut dd_ok = true;
    let mut gap = 0.0f64;
    for k in 0..5 {
        let n = 2 + k;
        let b = random_section(rng, n, 2, 1 + k)?;
        let back = dual_section(&dual_section(&b)?)?;
        dd_ok &= same_points(&b.vertices, &back.vertices, 1e-8);
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        gap = gap.max(ovs::dual_norm_check(&b, &x)?.gap);
    }
    let x = DMatrix::from_fn(2, 2, |_, _| rng.normal());
    let bridge = ovs::classical_bridge(&x)?.max_gap();
    let ok = dd_ok && gap <= 1e-8 && bridge <= 1e-8;
    Ok((ok, format!("double dual {dd_ok}, norm duality gap {gap:.3e}, classical bridge gap {bridge:.3e}")))
}

fn inequality_suite(rng: &mut Rng) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let a = rng.psd_rank(3, 3);
        let b = rng.psd_rank(3, 2);
        let (lhs, rhs) = deficiency::powers_stormer(a.mat(), b.mat());
        worst = worst.min(rhs - lhs);
    }
    let phi = rng.hermitian_map(2, 2);
    let alpha = rng.channel(2, 2);
    let mono = norms::diamond_norm(Family::Cp, &compose(&alpha, &phi)?)?.value_lo
        - norms::diamond_norm(Family::Cp, &phi)?.value_hi;
    let ok = worst >= -1e-10 && mono <= 1e-8;
    Ok((ok, format!("Powers-Stormer slack {worst:.3e}, monotonicity excess {mono:.3e}")))
}
