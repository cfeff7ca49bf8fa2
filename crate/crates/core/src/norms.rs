//! Diamond and dual diamond norms under each cone family, with certified
//! two-sided bounds.
//!
//! For `φ: A → B` with Choi matrix `J` on `out ⊗ in`:
//!
//! * `‖φ‖_◇ = min λ` over channels `α` with `λα ± φ` in the family; with
//!   `Y = C(λα)` this is `Y ± J ∈ cone`, `Tr_out Y ⪯ λ I` (any deficit in the
//!   trace is topped up by `I/d_out ⊗ (λI − Tr_out Y)`).
//! * `‖φ‖^◇ = min Tr X` over `X ∈ B⁺` with `X ⊗ I ± J` in the dual-family
//!   order, because `C(a ↦ σ Tr a) = σ ⊗ I`. The optimal replacer state is
//!   `X / Tr X`.
//!
//! Upper bounds come from primal points shifted into exact feasibility.
//! Lower bounds come from repaired dual points or, for the diamond norm,
//! from the trace norm of `(φ ⊗ id)(|ψ><ψ|)` at the best input found.

use nalgebra::DVector;
use serde::Serialize;

use crate::cones::{add_decomposable, Family, EXACT_PRODUCT_DIM};
use crate::conic::{pure_state_search, Affine, BlockId, HermVar, Sdp, SdpSolution, SearchOptions};
use crate::error::{Error, Result};
use crate::hmap::{adjoint_choi, make_qc, pairing, HermitianMap};
use crate::json::ser;
use crate::matops::linalg::*;
use crate::matops::{BlockAlgebra, CMat, HermitianOperator, C64};
use crate::random::Rng;

/// Width allowed between the bounds of an exact computation.
pub const CP_GAP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Default, Serialize)]
pub struct NormCertificate {
    /// Choi matrix of the optimal channel `α` (diamond norm).
    #[serde(serialize_with = "ser::opt_mat", skip_serializing_if = "Option::is_none")]
    pub channel: Option<CMat>,
    /// Optimal state: replacer state `σ` (dual diamond) or input state.
    #[serde(serialize_with = "ser::opt_mat", skip_serializing_if = "Option::is_none")]
    pub state: Option<CMat>,
    /// Optimal `X = λσ` or other operator-valued optimizer.
    #[serde(serialize_with = "ser::opt_mat", skip_serializing_if = "Option::is_none")]
    pub operator: Option<CMat>,
    /// Input vector attaining `value_lo`.
    #[serde(serialize_with = "ser::opt_vec", skip_serializing_if = "Option::is_none")]
    pub input: Option<DVector<C64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormResult {
    pub value_lo: f64,
    pub value_hi: f64,
    pub method: String,
    /// The cone subproblems were solved exactly (the width is numerical).
    pub exact: bool,
    /// The infimum is `+∞` (no feasible point).
    pub infinite: bool,
    pub certificate: NormCertificate,
}

impl NormResult {
    fn new(lo: f64, hi: f64, method: &str, exact: bool, certificate: NormCertificate) -> Self {
        // rounding can put an exactly evaluated lower bound a hair above the
        // repaired upper bound
        let hi = hi.max(lo);
        Self { value_lo: lo, value_hi: hi, method: method.into(), exact, infinite: false, certificate }
    }

    fn closed_form(v: f64, method: &str) -> Self {
        Self::new(v, v, method, true, NormCertificate::default())
    }

    fn infinite(method: &str) -> Self {
        Self {
            value_lo: f64::INFINITY,
            value_hi: f64::INFINITY,
            method: method.into(),
            exact: true,
            infinite: true,
            certificate: NormCertificate::default(),
        }
    }

    pub fn value(&self) -> f64 {
        0.5 * (self.value_lo + self.value_hi)
    }

    pub fn width(&self) -> f64 {
        self.value_hi - self.value_lo
    }
}

#[derive(Clone, Debug)]
pub struct NormOptions {
    pub seed: u64,
    /// Random starts for the input-state search, on top of the SDP seeds.
    pub starts: usize,
    pub max_iter: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { seed: 0, starts: 8, max_iter: 2000 }
    }
}

// ---------------------------------------------------------------------------
// Cone constraints
// ---------------------------------------------------------------------------

/// Choi-level cone used to model a family constraint inside an SDP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cone {
    Psd,
    /// PSD with PSD partial transpose: outer model of separable.
    Ppt,
    /// PSD + PSD^Γ: inner model of block-positive.
    Dec,
}

pub(crate) struct ConeHandle {
    pub(crate) blocks: Vec<BlockId>,
    pub(crate) q: Option<HermVar>,
}

pub(crate) fn add_cone(sdp: &mut Sdp, expr: &Affine, cone: Cone, d1: usize, d2: usize) -> ConeHandle {
    match cone {
        Cone::Psd => ConeHandle { blocks: vec![expr.psd(sdp)], q: None },
        Cone::Ppt => {
            let a = expr.psd(sdp);
            let b = expr.map(|m| ptranspose_second(m, d1, d2)).psd(sdp);
            ConeHandle { blocks: vec![a, b], q: None }
        }
        Cone::Dec => ConeHandle { blocks: Vec::new(), q: Some(add_decomposable(sdp, expr, d1, d2)) },
    }
}

/// Smallest `δ ≥ 0` with `e + δI` in the cone (for `Dec`, using the split
/// found by the solver, shifted to be PSD).
pub(crate) fn cone_shift(e: &CMat, cone: Cone, q: Option<&CMat>, d1: usize, d2: usize) -> f64 {
    match cone {
        Cone::Psd => (-min_eig(e)).max(0.0),
        Cone::Ppt => (-min_eig(e)).max(-min_eig(&ptranspose_second(e, d1, d2))).max(0.0),
        Cone::Dec => {
            let q = herm_part(q.expect("decomposable split"));
            let qs = (-min_eig(&q)).max(0.0);
            // (Q + qs I)^Γ = Q^Γ + qs I, so P loses qs I
            let p = herm_part(&(e - ptranspose_second(&q, d1, d2)));
            (qs - min_eig(&p)).max(0.0)
        }
    }
}

fn finite(sol: &SdpSolution) -> bool {
    sol.y.iter().all(|v| v.is_finite())
}

fn pattern(m: &HermitianMap) -> BlockAlgebra {
    m.out_alg().tensor(m.in_alg())
}

fn one_side_abelian(m: &HermitianMap) -> bool {
    m.in_alg().is_diagonal() || m.out_alg().is_diagonal()
}

fn exact_dims(m: &HermitianMap) -> bool {
    let (a, b) = (m.d_out(), m.d_in());
    a * b <= EXACT_PRODUCT_DIM || a == 1 || b == 1
}

// ---------------------------------------------------------------------------
// Diamond norm
// ---------------------------------------------------------------------------

struct DiamondSdp {
    /// Certified upper bound when the cone is an inner model.
    hi: f64,
    /// Solver lower bound (valid for outer models up to solver accuracy).
    dual: f64,
    alpha: CMat,
    /// Multiplier of the trace block: the optimal input marginal.
    rho: CMat,
}

fn diamond_sdp(m: &HermitianMap, cone: Cone) -> Result<DiamondSdp> {
    let (dout, din) = (m.d_out(), m.d_in());
    let n = dout * din;
    let j = m.choi_mat();
    let mut sdp = Sdp::new(0);
    let lam = sdp.add_var();
    sdp.set_objective(lam, 1.0);
    let y = HermVar::new(&mut sdp, &pattern(m));
    let yi = y.image(1.0, |b| b.clone());
    let hp = add_cone(&mut sdp, &yi.clone().plus_const(j), cone, dout, din);
    let hm = add_cone(&mut sdp, &yi.plus_const(&(-j)), cone, dout, din);
    let tr = Affine::scalar(din, lam, &eye(din)).plus(y.image(-1.0, |b| ptrace_first(b, dout, din))).psd(&mut sdp);
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("diamond SDP ended with status {:?}", sol.status)));
    }
    let ym = herm_part(&y.value(&sol.y));
    let qv = |h: &ConeHandle| h.q.as_ref().map(|q| q.value(&sol.y));
    let delta = cone_shift(&(&ym + j), cone, qv(&hp).as_ref(), dout, din)
        .max(cone_shift(&(&ym - j), cone, qv(&hm).as_ref(), dout, din));
    let yr = &ym + eye(n) * c(delta);
    let t = herm_part(&ptrace_first(&yr, dout, din));
    let hi = max_eig(&t).max(0.0);
    let alpha = if hi > 0.0 {
        let top = m.in_alg().project(&(eye(din) * c(hi) - &t));
        (yr + kron(&eye(dout), &top) * c(1.0 / dout as f64)) * c(1.0 / hi)
    } else {
        kron(&eye(dout), &eye(din)) * c(1.0 / dout as f64)
    };
    Ok(DiamondSdp { hi, dual: sol.dual_value, alpha, rho: herm_part(&sol.block_duals[tr.0]) })
}

/// `‖(φ ⊗ id)(|ψ><ψ|)‖_1` for `|ψ> = Σ_i |i> ⊗ M|i>`, with `M` (ancilla ×
/// input, row-major in `v`) and the ascent gradient `2 ∂/∂M̄`.
pub fn stabilized_value(m: &HermitianMap, v: &DVector<C64>) -> (f64, DVector<C64>) {
    let (dout, din) = (m.d_out(), m.d_in());
    let da = v.len() / din;
    let mm = CMat::from_fn(da, din, |a, i| v[a * din + i]);
    let x = kron(&eye(dout), &mm);
    let xj = &x * m.choi_mat();
    let out = herm_part(&(&xj * x.adjoint()));
    let s = sign(&out);
    let val = hs(&s, &out);
    let sxj = &s * xj;
    let g = DVector::from_fn(da * din, |k, _| {
        let (a, i) = (k / din, k % din);
        let mut acc = C64::new(0.0, 0.0);
        for o in 0..dout {
            acc += sxj[(o * da + a, o * din + i)];
        }
        acc * 2.0
    });
    (val, g)
}

fn purification_seeds(rho: &CMat) -> Vec<DVector<C64>> {
    let t = rho.trace().re;
    if !(t > 0.0) {
        return Vec::new();
    }
    let r = sqrt_psd(&(rho * c(1.0 / t)));
    let d = r.nrows();
    let a = DVector::from_fn(d * d, |k, _| r[(k / d, k % d)]);
    let b = DVector::from_fn(d * d, |k, _| r[(k % d, k / d)]);
    vec![a, b]
}

/// Lower bound `sup_ψ ‖(φ ⊗ id)(|ψ><ψ|)‖_1` by multi-start ascent, ancilla
/// of the input dimension.
pub fn stabilized_lower(m: &HermitianMap, seeds: &[DVector<C64>], opts: &NormOptions) -> (f64, DVector<C64>) {
    let din = m.d_in();
    let so = SearchOptions { starts: opts.starts, max_iter: opts.max_iter, grad_tol: 1e-12, seed: opts.seed };
    let r = pure_state_search(din * din, &so, seeds, |v| stabilized_value(m, v));
    (r.value, r.x)
}

/// `‖φ(|x><x|)‖_1` and its ascent gradient `2 φ*(S) x`.
fn unstabilized_value(m: &HermitianMap, adj: &HermitianMap, x: &DVector<C64>) -> (f64, DVector<C64>) {
    let out = herm_part(&m.apply_mat(&(x * x.adjoint())));
    let s = sign(&out);
    (hs(&s, &out), adj.apply_mat(&s) * x * c(2.0))
}

pub fn diamond_norm(family: Family, m: &HermitianMap) -> Result<NormResult> {
    diamond_norm_with(family, m, &NormOptions::default())
}

pub fn diamond_norm_with(family: Family, m: &HermitianMap, opts: &NormOptions) -> Result<NormResult> {
    if family == Family::Cp || one_side_abelian(m) {
        return diamond_cp(m, opts);
    }
    let cp = diamond_cp(m, opts)?;
    let exact = exact_dims(m);
    match family {
        Family::Pos => {
            let dec = diamond_sdp(m, Cone::Dec)?;
            let hi = dec.hi.min(cp.value_hi);
            let adj = m.adjoint();
            let so = SearchOptions { starts: opts.starts.max(4), max_iter: opts.max_iter, grad_tol: 1e-12, seed: opts.seed };
            let r = pure_state_search(m.d_in(), &so, &[], |x| unstabilized_value(m, &adj, x));
            let mut lo = r.value;
            if exact {
                // decomposable = block-positive here, so the solver bound is tight
                lo = lo.max(dec.dual.min(dec.hi));
            }
            let cert = NormCertificate { channel: Some(dec.alpha), ..Default::default() };
            Ok(NormResult::new(lo.min(hi), hi, "sdp-decomposable+input-search", exact, cert))
        }
        Family::Eb => {
            let ppt = diamond_sdp(m, Cone::Ppt)?;
            let lo = cp.value_lo.max(ppt.dual.min(ppt.hi));
            let (hi, alpha) = if exact {
                (ppt.hi, ppt.alpha)
            } else {
                // c I ± J is separable for c ≥ ‖J‖_F; α = I ⊗ I / d_out
                let dout = m.d_out();
                let ch = kron(&eye(dout), &eye(m.d_in())) * c(1.0 / dout as f64);
                (dout as f64 * frob(m.choi_mat()), ch)
            };
            let cert = NormCertificate { channel: Some(alpha), ..Default::default() };
            Ok(NormResult::new(lo, hi.max(lo), "sdp-ppt", exact, cert))
        }
        Family::Cp => unreachable!(),
    }
}

fn diamond_cp(m: &HermitianMap, opts: &NormOptions) -> Result<NormResult> {
    let sdp = diamond_sdp(m, Cone::Psd)?;
    let seeds = purification_seeds(&sdp.rho);
    let (lo, x) = stabilized_lower(m, &seeds, opts);
    let din = m.d_in();
    let mm = CMat::from_fn(din, din, |a, i| x[a * din + i]);
    let cert = NormCertificate {
        channel: Some(sdp.alpha),
        state: Some((mm.adjoint() * &mm).transpose()),
        input: Some(x),
        ..Default::default()
    };
    Ok(NormResult::new(lo, sdp.hi, "sdp+stabilized-search", true, cert))
}

// ---------------------------------------------------------------------------
// Dual diamond norm
// ---------------------------------------------------------------------------

struct DualDiamondSdp {
    hi: f64,
    /// Certified lower bound (PSD cone only), else the solver bound.
    lo: f64,
    x: CMat,
}

fn dual_diamond_sdp(m: &HermitianMap, cone: Cone) -> Result<DualDiamondSdp> {
    let (dout, din) = (m.d_out(), m.d_in());
    let j = m.choi_mat();
    let mut sdp = Sdp::new(0);
    let x = HermVar::new(&mut sdp, m.out_alg());
    x.objective_dot(&mut sdp, &eye(dout), 1.0);
    let xi = x.image(1.0, |b| kron(b, &eye(din)));
    let hp = add_cone(&mut sdp, &xi.clone().plus_const(j), cone, dout, din);
    let hm = add_cone(&mut sdp, &xi.plus_const(&(-j)), cone, dout, din);
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("dual diamond SDP ended with status {:?}", sol.status)));
    }
    let xm = herm_part(&x.value(&sol.y));
    let xk = kron(&xm, &eye(din));
    let qv = |h: &ConeHandle| h.q.as_ref().map(|q| q.value(&sol.y));
    let delta = cone_shift(&(&xk + j), cone, qv(&hp).as_ref(), dout, din)
        .max(cone_shift(&(&xk - j), cone, qv(&hm).as_ref(), dout, din));
    let xr = &xm + eye(dout) * c(delta);
    let hi = trace(&xr).re;
    let lo = if cone == Cone::Psd {
        dual_diamond_lower(m, &sol.block_duals[hp.blocks[0].0], &sol.block_duals[hm.blocks[0].0])
    } else {
        sol.dual_value
    };
    Ok(DualDiamondSdp { hi, lo: lo.min(hi), x: xr })
}

/// `<J, W₋ − W₊>` after making `W±` PSD and rescaling so that
/// `E_B(Tr_in(W₊ + W₋)) = I`.
fn dual_diamond_lower(m: &HermitianMap, wp: &CMat, wm: &CMat) -> f64 {
    let (dout, din) = (m.d_out(), m.d_in());
    let clip = |w: &CMat| apply_fn(&herm_part(w), |v| v.max(0.0));
    let (wp, wm) = (clip(wp), clip(wm));
    let t = m.out_alg().project(&ptrace_second(&(&wp + &wm), dout, din));
    let t = herm_part(&t) + eye(dout) * c(1e-14);
    let s = kron(&apply_fn(&t, |v| 1.0 / v.max(1e-300).sqrt()), &eye(din));
    let j = m.choi_mat();
    hs(j, &(&s * (wm - wp) * &s))
}

pub fn dual_diamond_norm(family: Family, m: &HermitianMap) -> Result<NormResult> {
    dual_diamond_norm_seeded(family, m, 0)
}

pub fn dual_diamond_norm_seeded(family: Family, m: &HermitianMap, seed: u64) -> Result<NormResult> {
    let cp = dual_diamond_sdp(m, Cone::Psd)?;
    let sigma_of = |x: &CMat| {
        let t = trace(x).re;
        (t > 0.0).then(|| x * c(1.0 / t))
    };
    if family == Family::Cp || one_side_abelian(m) {
        let cert = NormCertificate { state: sigma_of(&cp.x), operator: Some(cp.x.clone()), ..Default::default() };
        return Ok(NormResult::new(cp.lo, cp.hi, "sdp", true, cert));
    }
    let exact = exact_dims(m);
    let (dout, din) = (m.d_out(), m.d_in());
    let j = m.choi_mat();
    match family {
        // order of the EB cone: separable
        Family::Pos => {
            let ppt = dual_diamond_sdp(m, Cone::Ppt)?;
            let lo = cp.lo.max(ppt.lo);
            let (hi, x) = if exact {
                (ppt.hi, ppt.x)
            } else {
                let f = frob(j);
                (f * dout as f64, eye(dout) * c(f))
            };
            let cert = NormCertificate { state: sigma_of(&x), operator: Some(x), ..Default::default() };
            Ok(NormResult::new(lo, hi.max(lo), "sdp-ppt", exact, cert))
        }
        // order of the Pos cone: block-positive
        Family::Eb => {
            let dec = dual_diamond_sdp(m, Cone::Dec)?;
            let hi = dec.hi.min(cp.hi);
            let lo = if exact { dec.lo.min(hi) } else { product_basis_lower(j, dout, din, seed) };
            let x = if dec.hi <= cp.hi { dec.x } else { cp.x };
            let cert = NormCertificate { state: sigma_of(&x), operator: Some(x), ..Default::default() };
            Ok(NormResult::new(lo.min(hi), hi, "sdp-decomposable", exact, cert))
        }
        Family::Cp => unreachable!(),
    }
}

/// `X ⊗ I ± J` block-positive forces `<y|X|y> ≥ max_z |<yz|J|yz>|`, so
/// summing over an orthonormal basis `{y_k}` bounds `Tr X` from below.
fn product_basis_lower(j: &CMat, dout: usize, din: usize, seed: u64) -> f64 {
    let mut rng = Rng::seed(seed);
    let mut bases = vec![eye(dout)];
    for _ in 0..8 {
        bases.push(rng.unitary(dout));
    }
    bases
        .iter()
        .map(|u| {
            (0..dout)
                .map(|k| {
                    let y = u.column(k).into_owned();
                    let nmat = CMat::from_fn(din, din, |i, jj| {
                        let mut s = C64::new(0.0, 0.0);
                        for o in 0..dout {
                            for p in 0..dout {
                                s += y[o].conj() * j[(o * din + i, p * din + jj)] * y[p];
                            }
                        }
                        s
                    });
                    op_norm(&herm_part(&nmat))
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Closed forms for cq and qc maps
// ---------------------------------------------------------------------------

/// `‖Φ^cq_A‖^◇ = min Tr X` subject to `X ⪰ ±A_i`.
pub fn cq_dual_diamond(a: &[HermitianOperator]) -> Result<NormResult> {
    let d = a.first().ok_or_else(|| Error::Invalid("empty operator list".into()))?.dim();
    cq_dual_diamond_on(a, &eye(d))
}

/// As [`cq_dual_diamond`] with the replacer state supported in the range of
/// the projector `support`; `+∞` when some `A_i` leaves that range.
pub fn cq_dual_diamond_on(a: &[HermitianOperator], support: &CMat) -> Result<NormResult> {
    let d = a.first().ok_or_else(|| Error::Invalid("empty operator list".into()))?.dim();
    if a.iter().any(|ai| ai.dim() != d) || support.nrows() != d {
        return Err(Error::Invalid("operators and support must share one dimension".into()));
    }
    let (vals, vecs) = eigh(&herm_part(support));
    let r = vals.iter().filter(|v| **v > 0.5).count();
    let v = vecs.columns(0, r).into_owned();
    let p = &v * v.adjoint();
    let scale = a.iter().map(|ai| op_norm(ai.mat())).fold(1.0, f64::max);
    if a.iter().any(|ai| max_abs(&(ai.mat() - &p * ai.mat() * &p)) > 1e-10 * scale) {
        return Ok(NormResult::infinite("support-mismatch"));
    }
    if r == 0 {
        return Ok(NormResult::closed_form(0.0, "closed-form"));
    }
    let red: Vec<CMat> = a.iter().map(|ai| herm_part(&(v.adjoint() * ai.mat() * &v))).collect();
    let mut sdp = Sdp::new(0);
    let x = HermVar::new(&mut sdp, &BlockAlgebra::full(r));
    x.objective_dot(&mut sdp, &eye(r), 1.0);
    let mut ids = Vec::new();
    for ai in &red {
        let p = x.image(1.0, |b| b.clone()).plus_const(ai).psd(&mut sdp);
        let m = x.image(1.0, |b| b.clone()).plus_const(&(-ai)).psd(&mut sdp);
        ids.push((p, m));
    }
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("cq dual diamond SDP ended with status {:?}", sol.status)));
    }
    let xm = herm_part(&x.value(&sol.y));
    let delta = red
        .iter()
        .map(|ai| (-min_eig(&(&xm + ai))).max(-min_eig(&(&xm - ai))))
        .fold(0.0, f64::max);
    let xr = &xm + eye(r) * c(delta);
    let hi = trace(&xr).re;
    // dual: W±_i ⪰ 0 with Σ_i (W+_i + W-_i) = I, value Σ <A_i, W-_i − W+_i>
    let clip = |w: &CMat| apply_fn(&herm_part(w), |v| v.max(0.0));
    let ws: Vec<(CMat, CMat)> =
        ids.iter().map(|(p, m)| (clip(&sol.block_duals[p.0]), clip(&sol.block_duals[m.0]))).collect();
    let mut t = eye(r) * c(1e-14);
    for (wp, wm) in &ws {
        t += wp + wm;
    }
    let s = apply_fn(&herm_part(&t), |v| 1.0 / v.max(1e-300).sqrt());
    let lo: f64 = red.iter().zip(&ws).map(|(ai, (wp, wm))| hs(ai, &(&s * (wm - wp) * &s))).sum();
    let xfull = &v * &xr * v.adjoint();
    let cert = NormCertificate {
        state: (hi > 0.0).then(|| &xfull * c(1.0 / hi)),
        operator: Some(xfull),
        ..Default::default()
    };
    Ok(NormResult::new(lo.min(hi), hi, "sdp", true, cert))
}

/// `‖Φ^qc_A‖^◇ = Σ_i ‖A_i‖`.
pub fn qc_dual_diamond(a: &[HermitianOperator]) -> NormResult {
    NormResult::closed_form(a.iter().map(|ai| ai.op_norm()).sum(), "closed-form")
}

/// `‖Φ^cq_A‖_◇ = max_i ‖A_i‖_1`.
pub fn cq_diamond(a: &[HermitianOperator]) -> NormResult {
    NormResult::closed_form(a.iter().map(|ai| ai.trace_norm()).fold(0.0, f64::max), "closed-form")
}

/// `Σ_i ‖M† A_i M‖_1 = Σ_i ‖σ^{1/2} A_i σ^{1/2}‖_1` for `σ = M M†`, and its
/// ascent gradient `2 Σ_i A_i M S_i`.
fn qc_objective(a: &[CMat], v: &DVector<C64>) -> (f64, DVector<C64>) {
    let d = a[0].nrows();
    let mm = CMat::from_fn(d, d, |r, k| v[r * d + k]);
    let mut val = 0.0;
    let mut g = CMat::zeros(d, d);
    for ai in a {
        let t = herm_part(&(mm.adjoint() * ai * &mm));
        let s = sign(&t);
        val += hs(&s, &t);
        g += ai * &mm * s * c(2.0);
    }
    (val, DVector::from_fn(d * d, |k, _| g[(k / d, k % d)]))
}

/// `‖Φ^qc_A‖_◇ = sup_σ Σ_i ‖σ^{1/2} A_i σ^{1/2}‖_1`: search over states for
/// the lower bound, general diamond SDP for the upper bound.
pub fn qc_diamond(a: &[HermitianOperator]) -> Result<NormResult> {
    qc_diamond_with(a, &NormOptions::default())
}

pub fn qc_diamond_with(a: &[HermitianOperator], opts: &NormOptions) -> Result<NormResult> {
    let d = a.first().ok_or_else(|| Error::Invalid("empty operator list".into()))?.dim();
    let mats: Vec<CMat> = a.iter().map(|ai| ai.mat().clone()).collect();
    let map = make_qc(a)?;
    let sdp = diamond_sdp(&map, Cone::Psd)?;
    let mut seeds = purification_seeds(&sdp.rho);
    seeds.push(DVector::from_fn(d * d, |k, _| c(if k / d == k % d { 1.0 } else { 0.0 })));
    let so = SearchOptions { starts: opts.starts.max(16), max_iter: opts.max_iter, grad_tol: 1e-12, seed: opts.seed };
    let r = pure_state_search(d * d, &so, &seeds, |v| qc_objective(&mats, v));
    let mm = CMat::from_fn(d, d, |i, k| r.x[i * d + k]);
    let cert = NormCertificate { state: Some(&mm * mm.adjoint()), channel: Some(sdp.alpha), ..Default::default() };
    Ok(NormResult::new(r.value, sdp.hi, "state-search+sdp", true, cert))
}

// ---------------------------------------------------------------------------
// Duality check
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub family: Family,
    /// Diamond norm bounds of the map.
    pub diamond: NormResult,
    /// Certified lower bound of `sup <φ, ψ>` over `‖ψ‖^◇ ≤ 1`.
    pub dual_sup: f64,
    /// Value of the joint program before independent re-normalization.
    pub dual_sup_sdp: f64,
    /// `|dual_sup − diamond| / max(1, diamond)`, using the interval midpoint.
    pub rel_gap: f64,
    #[serde(serialize_with = "ser::mat")]
    pub witness_choi: CMat,
}

/// Compares `‖φ‖_◇` with the supremum of `<φ, ψ>` over the dual-diamond
/// unit ball of maps `ψ: B → A`. The optimizing `ψ` comes from a joint
/// program; its pairing is then divided by an independently computed
/// `‖ψ‖^◇`, and a few random `ψ` are normalized the same way.
pub fn norm_duality_check(family: Family, m: &HermitianMap, seed: u64) -> Result<DualityReport> {
    let opts = NormOptions { seed, ..Default::default() };
    let diamond = diamond_norm_with(family, m, &opts)?;
    let (dout, din) = (m.d_out(), m.d_in());
    // ψ: B → A has Choi on in ⊗ out; X lives on the input algebra of φ
    let cone = match family {
        _ if one_side_abelian(m) => Cone::Psd,
        Family::Cp => Cone::Psd,
        Family::Pos => Cone::Ppt,
        Family::Eb => Cone::Dec,
    };
    let mut sdp = Sdp::new(0);
    let z = HermVar::new(&mut sdp, &m.in_alg().tensor(m.out_alg()));
    for (v, b) in z.vars.iter().zip(&z.basis) {
        let w = hs(m.choi_mat(), &adjoint_choi(b, dout, din));
        sdp.set_objective(*v, -w);
    }
    let x = HermVar::new(&mut sdp, m.in_alg());
    let xi = x.image(1.0, |b| kron(b, &eye(dout)));
    let zi = z.image(1.0, |b| b.clone());
    add_cone(&mut sdp, &xi.clone().plus(zi.clone()), cone, din, dout);
    add_cone(&mut sdp, &xi.plus(zi.scaled(-1.0)), cone, din, dout);
    let trace_terms: Vec<(usize, f64)> = x.vars.iter().zip(&x.basis).map(|(v, b)| (*v, -trace(b).re)).collect();
    sdp.add_row(1.0, trace_terms);
    let sol = sdp.solve();
    if !finite(&sol) {
        return Err(Error::Solver(format!("dual-ball SDP ended with status {:?}", sol.status)));
    }
    let dual_sup_sdp = -sol.primal_value;
    let zm = herm_part(&z.value(&sol.y));
    let mut candidates = vec![HermitianMap::from_choi_projected(m.out_alg(), m.in_alg(), &zm)];
    let mut rng = Rng::seed(seed);
    for _ in 0..4 {
        let g = rng.hermitian(din * dout);
        candidates.push(HermitianMap::from_choi_projected(m.out_alg(), m.in_alg(), g.mat()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut witness = zm.clone();
    for (k, psi) in candidates.iter().enumerate() {
        let nrm = dual_diamond_norm_seeded(family, psi, seed)?.value_hi;
        if nrm <= 0.0 {
            continue;
        }
        let p = pairing(m, psi)?;
        // the sign of ψ is free
        let v = p.abs() / nrm;
        if v > best {
            best = v;
            witness = psi.choi_mat() * c(p.signum() / nrm);
            if k > 0 {
                witness = herm_part(&witness);
            }
        }
    }
    let mid = diamond.value();
    let rel_gap = (best - mid).abs() / mid.max(1.0);
    Ok(DualityReport { family, diamond, dual_sup: best, dual_sup_sdp, rel_gap, witness_choi: witness })
}
