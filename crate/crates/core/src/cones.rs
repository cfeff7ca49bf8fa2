//! Cone families of maps and the order-unit / base norms of their
//! Choi-level cones.
//!
//! Choi matrices live on `out ⊗ in`. The three built-in families and the
//! cones of their Choi matrices:
//!
//! | family | Choi cone of `P` | `P*` | Choi cone of `P̃` (adjoints of `P*`) |
//! |--------|------------------|------|--------------------------------------|
//! | CP     | PSD              | CP   | PSD                                  |
//! | EB     | separable        | Pos  | block-positive                       |
//! | Pos    | block-positive   | EB   | separable                            |
//!
//! Separability is decided exactly through the partial transpose when the
//! product dimension is at most 6; above that, verdicts and norms come with
//! explicit certificates or are reported as intervals.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conic::{seesaw_multistart, Affine, HermVar, Sdp, SolverOptions};
use crate::error::{Error, Result};
use crate::hmap::HermitianMap;
use crate::json::ser;
use crate::matops::linalg::*;
use crate::matops::{BlockAlgebra, CMat, HermitianOperator, C64};

/// Product dimension up to which PPT coincides with separability.
pub const EXACT_PRODUCT_DIM: usize = 6;
/// Threshold for declaring a PSD-type test passed.
pub const PSD_TOL: f64 = 1e-10;
/// Witness values must fall below `-WITNESS_TOL` to count as violations.
pub const WITNESS_TOL: f64 = 1e-8;
/// Default number of starts for product-vector searches.
pub const PRODUCT_STARTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cp,
    Eb,
    Pos,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Cp, Family::Eb, Family::Pos];

    /// Family of the dual cone: `CP* = CP`, `Pos* = EB`, `EB* = Pos`.
    pub fn dual(self) -> Family {
        match self {
            Family::Cp => Family::Cp,
            Family::Eb => Family::Pos,
            Family::Pos => Family::Eb,
        }
    }

    /// Choi-level cone of `P̃`.
    pub fn tilde_cone(self) -> ChoiCone {
        match self {
            Family::Cp => ChoiCone::Psd,
            Family::Pos => ChoiCone::Separable,
            Family::Eb => ChoiCone::BlockPositive,
        }
    }

    /// Whether membership and norms are decided exactly at these dimensions.
    pub fn is_exact(self, d_out: usize, d_in: usize) -> bool {
        self == Family::Cp || d_out * d_in <= EXACT_PRODUCT_DIM || d_out == 1 || d_in == 1
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Cp => "cp",
            Family::Eb => "eb",
            Family::Pos => "pos",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(Family::Cp),
            "eb" => Ok(Family::Eb),
            "pos" => Ok(Family::Pos),
            other => Err(Error::Invalid(format!("unknown cone family '{other}' (expected cp, eb or pos)"))),
        }
    }
}

/// Cones of bipartite operators on `out ⊗ in`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiCone {
    Psd,
    Separable,
    BlockPositive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    In,
    Out,
    Undecided,
}

/// Evidence attached to a verdict. Matrices serialize as row-major
/// `[re, im]` pairs.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Choi matrix is PSD; `min_eigenvalue` is its smallest eigenvalue.
    Psd { min_eigenvalue: f64 },
    /// Unit vector `v` with `<v|X|v> < 0` for the tested operator `X`.
    Eigenvector {
        #[serde(serialize_with = "ser::vec")]
        v: DVector<C64>,
        value: f64,
    },
    /// Choi matrix and its partial transpose are PSD at a dimension where
    /// this implies separability.
    Ppt { min_eigenvalue: f64, min_eigenvalue_pt: f64 },
    /// `X = Σ w_k |y_k><y_k| ⊗ |z_k><z_k| + c I + R` with `‖R‖_F ≤ c`; the
    /// last two terms form a separable operator.
    Separable(SeparableDecomposition),
    /// `X = P + Q^Γ` with `P, Q ⪰ 0`, hence block-positive.
    Decomposable {
        #[serde(serialize_with = "ser::mat")]
        p: CMat,
        #[serde(serialize_with = "ser::mat")]
        q: CMat,
    },
    /// Product vectors with `<y|φ(|x><x|)|y> = value < 0`.
    ProductWitness {
        #[serde(serialize_with = "ser::vec")]
        x: DVector<C64>,
        #[serde(serialize_with = "ser::vec")]
        y: DVector<C64>,
        value: f64,
    },
    /// No verdict; best value seen by the product-vector search.
    Search { best_value: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparableDecomposition {
    pub weights: Vec<f64>,
    #[serde(serialize_with = "ser::vecs")]
    pub left: Vec<DVector<C64>>,
    #[serde(serialize_with = "ser::vecs")]
    pub right: Vec<DVector<C64>>,
    pub identity_weight: f64,
    pub residual_frobenius: f64,
}

impl SeparableDecomposition {
    /// Sum of the product terms, without the identity part.
    pub fn product_part(&self) -> CMat {
        let (d1, d2) = (self.left[0].len(), self.right[0].len());
        let mut s = CMat::zeros(d1 * d2, d1 * d2);
        for ((w, y), z) in self.weights.iter().zip(&self.left).zip(&self.right) {
            let v = kron_vec(y, z);
            s += &v * v.adjoint() * c(*w);
        }
        s
    }

    /// Checks the decomposition against `x`; returns `c − ‖R‖_F`.
    pub fn verify(&self, x: &CMat) -> f64 {
        let n = x.nrows();
        let r = x - self.product_part() - eye(n) * c(self.identity_weight);
        let ok = self.weights.iter().all(|w| *w >= 0.0);
        if ok {
            self.identity_weight - frob(&r)
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipVerdict {
    pub status: Verdict,
    /// Positive slack for `IN`, witness value for `OUT`, best search value
    /// for `UNDECIDED`.
    pub margin: f64,
    pub certificate: Certificate,
}

impl MembershipVerdict {
    fn new(status: Verdict, margin: f64, certificate: Certificate) -> Self {
        Self { status, margin, certificate }
    }

    pub fn is_in(&self) -> bool {
        self.status == Verdict::In
    }

    pub fn is_out(&self) -> bool {
        self.status == Verdict::Out
    }
}

/// Closed interval of certified bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn exact(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

fn one_side_abelian(m: &HermitianMap) -> bool {
    m.in_alg().is_diagonal() || m.out_alg().is_diagonal()
}

/// PSD test of the Choi matrix.
pub fn cp_membership(m: &HermitianMap) -> MembershipVerdict {
    psd_verdict(m.choi_mat())
}

fn psd_verdict(x: &CMat) -> MembershipVerdict {
    let (vals, vecs) = eigh(x);
    let n = vals.len();
    let lmin = vals[n - 1];
    if lmin >= -PSD_TOL {
        MembershipVerdict::new(Verdict::In, lmin, Certificate::Psd { min_eigenvalue: lmin })
    } else {
        let v = vecs.column(n - 1).into_owned();
        MembershipVerdict::new(Verdict::Out, lmin, Certificate::Eigenvector { v, value: lmin })
    }
}

/// Separability of the Choi matrix.
pub fn eb_membership(m: &HermitianMap, seed: u64) -> MembershipVerdict {
    let x = m.choi_mat();
    let cp = psd_verdict(x);
    if !cp.is_in() || one_side_abelian(m) {
        // a PSD Choi matrix with an abelian side is a sum of PSD ⊗ rank-one-diagonal terms
        return cp;
    }
    let (d1, d2) = (m.d_out(), m.d_in());
    separable_verdict(x, d1, d2, seed)
}

fn separable_verdict(x: &CMat, d1: usize, d2: usize, seed: u64) -> MembershipVerdict {
    let lmin = min_eig(x);
    let pt = ptranspose_second(x, d1, d2);
    let (vals, vecs) = eigh(&pt);
    let lpt = vals[vals.len() - 1];
    if lpt < -PSD_TOL {
        let v = vecs.column(vals.len() - 1).into_owned();
        // <v|X^Γ|v> = Tr X (|v><v|)^Γ, so (|v><v|)^Γ is the witness on X
        return MembershipVerdict::new(Verdict::Out, lpt, Certificate::Eigenvector { v, value: lpt });
    }
    if d1 * d2 <= EXACT_PRODUCT_DIM || d1 == 1 || d2 == 1 {
        return MembershipVerdict::new(
            Verdict::In,
            lmin.min(lpt),
            Certificate::Ppt { min_eigenvalue: lmin, min_eigenvalue_pt: lpt },
        );
    }
    match separable_decomposition(x, d1, d2, seed) {
        Some(dec) => {
            let margin = dec.verify(x);
            MembershipVerdict::new(Verdict::In, margin, Certificate::Separable(dec))
        }
        None => MembershipVerdict::new(Verdict::Undecided, lmin.min(lpt), Certificate::Ppt {
            min_eigenvalue: lmin,
            min_eigenvalue_pt: lpt,
        }),
    }
}

/// Positivity of the map: block-positivity of the Choi matrix.
pub fn pos_membership(m: &HermitianMap, seed: u64) -> MembershipVerdict {
    pos_membership_with(m, seed, PRODUCT_STARTS)
}

pub fn pos_membership_with(m: &HermitianMap, seed: u64, starts: usize) -> MembershipVerdict {
    let x = m.choi_mat();
    let (d1, d2) = (m.d_out(), m.d_in());
    let cp = psd_verdict(x);
    if cp.is_in() || one_side_abelian(m) {
        return cp;
    }
    let pm = product_min(x, d1, d2, starts, seed);
    if pm.value < -WITNESS_TOL {
        // y ⊗ z with z = x̄ gives <y|φ(|x><x|)|y>
        let xin = pm.z.map(|z| z.conj());
        return MembershipVerdict::new(
            Verdict::Out,
            pm.value,
            Certificate::ProductWitness { x: xin, y: pm.y, value: pm.value },
        );
    }
    if let Some((t, p, q)) = decomposable_split(x, d1, d2) {
        return MembershipVerdict::new(Verdict::In, t, Certificate::Decomposable { p, q });
    }
    MembershipVerdict::new(Verdict::Undecided, pm.value, Certificate::Search { best_value: pm.value })
}

/// Membership of `m` in the family.
pub fn membership(family: Family, m: &HermitianMap, seed: u64) -> MembershipVerdict {
    match family {
        Family::Cp => cp_membership(m),
        Family::Eb => eb_membership(m, seed),
        Family::Pos => pos_membership(m, seed),
    }
}

/// Membership of `m: B → A` in the dual family `P*(B, A)`.
pub fn dual_membership(family: Family, m: &HermitianMap, seed: u64) -> MembershipVerdict {
    membership(family.dual(), m, seed)
}

// ---------------------------------------------------------------------------
// Product-vector search
// ---------------------------------------------------------------------------

/// Minimum of `<y ⊗ z|X|y ⊗ z>` over unit `y ∈ C^d1`, `z ∈ C^d2`, found by
/// alternating smallest-eigenvector steps.
#[derive(Clone, Debug)]
pub struct ProductMin {
    pub value: f64,
    pub y: DVector<C64>,
    pub z: DVector<C64>,
}

fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    DVector::from_fn(a.len() * b.len(), |r, _| a[r / b.len()] * b[r % b.len()])
}

/// `M[o,p] = Σ_ij X[(o,i),(p,j)] z̄_i z_j`.
fn contract_second(x: &CMat, d1: usize, d2: usize, z: &DVector<C64>) -> CMat {
    CMat::from_fn(d1, d1, |o, p| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..d2 {
            for j in 0..d2 {
                s += x[(o * d2 + i, p * d2 + j)] * z[i].conj() * z[j];
            }
        }
        s
    })
}

/// `N[i,j] = Σ_op ȳ_o X[(o,i),(p,j)] y_p`.
fn contract_first(x: &CMat, d1: usize, d2: usize, y: &DVector<C64>) -> CMat {
    CMat::from_fn(d2, d2, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for o in 0..d1 {
            for p in 0..d1 {
                s += y[o].conj() * x[(o * d2 + i, p * d2 + j)] * y[p];
            }
        }
        s
    })
}

fn bottom(m: &CMat) -> (f64, DVector<C64>) {
    let (vals, vecs) = eigh(&herm_part(m));
    let k = vals.len() - 1;
    (vals[k], vecs.column(k).into_owned())
}

pub fn product_min(x: &CMat, d1: usize, d2: usize, starts: usize, seed: u64) -> ProductMin {
    let res = seesaw_multistart(
        starts,
        seed,
        |rng| rng.unit_vector(d2),
        |z: &DVector<C64>| {
            let (v, y) = bottom(&contract_second(x, d1, d2, z));
            (-v, y)
        },
        |y: &DVector<C64>| {
            let (v, z) = bottom(&contract_first(x, d1, d2, y));
            (-v, z)
        },
        500,
        1e-15,
    );
    let (y, z) = (res.b, res.a);
    let v = kron_vec(&y, &z);
    let value = (v.adjoint() * x * &v)[(0, 0)].re;
    ProductMin { value, y, z }
}

/// `sup |<y ⊗ z|X|y ⊗ z>|` over product unit vectors (lower bound).
pub fn product_abs_max(x: &CMat, d1: usize, d2: usize, starts: usize, seed: u64) -> f64 {
    let lo = product_min(x, d1, d2, starts, seed).value;
    let hi = -product_min(&(-x), d1, d2, starts, seed.wrapping_add(1)).value;
    lo.abs().max(hi.abs())
}

// ---------------------------------------------------------------------------
// Separable decompositions
// ---------------------------------------------------------------------------

fn real_vec(m: &CMat) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_fn(2 * n * n, |k, _| {
        let z = m[(k / 2 / n, (k / 2) % n)];
        if k % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

/// Nonnegative least squares `min ‖A w − b‖, w ≥ 0` (Lawson–Hanson).
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut w = DVector::zeros(n);
    let mut passive = vec![false; n];
    for _ in 0..(3 * n + 10) {
        let grad = a.transpose() * (b - a * &w);
        let cand = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = cand else { break };
        if grad[j] <= 1e-14 {
            break;
        }
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let s = sub.clone().svd(true, true).solve(b, 1e-13).expect("svd solve");
            if s.iter().all(|v| *v > 0.0) {
                for (c, &k) in idx.iter().enumerate() {
                    w[k] = s[c];
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (c, &k) in idx.iter().enumerate() {
                if s[c] <= 0.0 {
                    alpha = alpha.min(w[k] / (w[k] - s[c]));
                }
            }
            for (c, &k) in idx.iter().enumerate() {
                w[k] += alpha * (s[c] - w[k]);
                if w[k] <= 1e-15 {
                    w[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !idx.iter().any(|&k| passive[k]) {
                break;
            }
        }
    }
    w
}

/// Searches `X = Σ w_k |y_k z_k><y_k z_k| + c I + R` with `‖R‖_F ≤ c`,
/// `c = λ_min(X)/2`. The last two terms are separable by the Frobenius ball
/// around the identity, so success certifies separability.
pub fn separable_decomposition(x: &CMat, d1: usize, d2: usize, seed: u64) -> Option<SeparableDecomposition> {
    let n = d1 * d2;
    let cw = 0.5 * min_eig(x);
    if cw <= 1e-12 {
        return None;
    }
    let target = x - eye(n) * c(cw);
    let tvec = real_vec(&target);
    let mut left: Vec<DVector<C64>> = Vec::new();
    let mut right: Vec<DVector<C64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut resid = target.clone();
    for it in 0..400u64 {
        let r = frob(&resid);
        if r <= 0.99 * cw {
            return Some(SeparableDecomposition {
                weights,
                left,
                right,
                identity_weight: cw,
                residual_frobenius: r,
            });
        }
        let pm = product_min(&(-&resid), d1, d2, 8, seed.wrapping_add(it));
        if -pm.value <= 1e-14 {
            return None;
        }
        left.push(pm.y);
        right.push(pm.z);
        let atoms: Vec<DVector<f64>> = left
            .iter()
            .zip(&right)
            .map(|(y, z)| {
                let v = kron_vec(y, z);
                real_vec(&(&v * v.adjoint()))
            })
            .collect();
        let a = DMatrix::from_columns(&atoms);
        let w = nnls(&a, &tvec);
        let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 0.0).collect();
        left = keep.iter().map(|&k| left[k].clone()).collect();
        right = keep.iter().map(|&k| right[k].clone()).collect();
        weights = keep.iter().map(|&k| w[k]).collect();
        let mut s = CMat::zeros(n, n);
        for ((w, y), z) in weights.iter().zip(&left).zip(&right) {
            let v = kron_vec(y, z);
            s += &v * v.adjoint() * c(*w);
        }
        resid = &target - s;
    }
    None
}

// ---------------------------------------------------------------------------
// SDP helpers shared with the norm computations
// ---------------------------------------------------------------------------

/// Adds `Q ⪰ 0` and `expr − Q^Γ ⪰ 0` for a fresh Hermitian `Q`, i.e.
/// `expr ∈ PSD + PSD^Γ`.
pub(crate) fn add_decomposable(sdp: &mut Sdp, expr: &Affine, d1: usize, d2: usize) -> HermVar {
    let q = HermVar::new(sdp, &BlockAlgebra::full(d1 * d2));
    q.image(1.0, |b| b.clone()).psd(sdp);
    expr.clone().plus(q.image(-1.0, |b| ptranspose_second(b, d1, d2))).psd(sdp);
    q
}

/// Adds `expr ⪰ 0` and `expr^Γ ⪰ 0`.
pub(crate) fn add_ppt(sdp: &mut Sdp, expr: &Affine, d1: usize, d2: usize) {
    expr.psd(sdp);
    expr.map(|m| ptranspose_second(m, d1, d2)).psd(sdp);
}

/// Largest `t` with `X − tI ∈ PSD + (PSD + tI)^Γ`; returns the split when
/// both parts are PSD within tolerance.
fn decomposable_split(x: &CMat, d1: usize, d2: usize) -> Option<(f64, CMat, CMat)> {
    let n = d1 * d2;
    let mut sdp = Sdp::new(0);
    let t = sdp.add_var();
    sdp.set_objective(t, -1.0);
    let q = HermVar::new(&mut sdp, &BlockAlgebra::full(n));
    let minus_t = Affine::scalar(n, t, &(-eye(n)));
    q.image(1.0, |b| b.clone()).plus(minus_t.clone()).psd(&mut sdp);
    Affine::constant(x.clone())
        .plus(q.image(-1.0, |b| ptranspose_second(b, d1, d2)))
        .plus(minus_t)
        .psd(&mut sdp);
    // t is unbounded below only through infeasibility; cap the search range
    sdp.add_row(1.0 + op_norm(x), vec![(t, 1.0)]);
    let sol = sdp.solve_with(&SolverOptions::default());
    if sol.y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let qm = herm_part(&q.value(&sol.y));
    let pm = herm_part(&(x - ptranspose_second(&qm, d1, d2)));
    let margin = min_eig(&pm).min(min_eig(&qm));
    (margin >= -WITNESS_TOL).then_some((margin, pm, qm))
}

// ---------------------------------------------------------------------------
// Order-unit and base norms of the tilde cones
// ---------------------------------------------------------------------------

fn check_bipartite(x: &HermitianOperator, d_out: usize, d_in: usize) -> Result<()> {
    crate::error::check_dim(d_out * d_in, x.dim())
}

/// `inf{λ : −λI ≤ X ≤ λI}` in the order of the Choi cone of `P̃`, for `X`
/// on `out ⊗ in`.
pub fn orderunit_norm_tilde(family: Family, x: &HermitianOperator, d_out: usize, d_in: usize) -> Result<Bounds> {
    orderunit_norm_tilde_seeded(family, x, d_out, d_in, 0)
}

pub fn orderunit_norm_tilde_seeded(
    family: Family,
    x: &HermitianOperator,
    d_out: usize,
    d_in: usize,
    seed: u64,
) -> Result<Bounds> {
    check_bipartite(x, d_out, d_in)?;
    let m = x.mat();
    let exact = family.is_exact(d_out, d_in);
    Ok(match family.tilde_cone() {
        ChoiCone::Psd => Bounds::exact(op_norm(m)),
        ChoiCone::Separable => {
            let lo = op_norm(m).max(op_norm(&ptranspose_second(m, d_out, d_in)));
            if exact {
                Bounds::exact(lo)
            } else {
                // λI ± X lies in the separable Frobenius ball once λ ≥ ‖X‖_F
                Bounds { lo, hi: frob(m).max(lo) }
            }
        }
        ChoiCone::BlockPositive => {
            let lo = product_abs_max(m, d_out, d_in, PRODUCT_STARTS, seed);
            let hi = decomposable_orderunit(m, d_out, d_in).unwrap_or(f64::INFINITY).min(op_norm(m));
            // at exact dimensions the decomposable cone is the whole
            // block-positive cone, so both ends meet up to solver accuracy
            Bounds { lo: lo.min(hi), hi }
        }
    })
}

/// `min λ` with `λI ± X` decomposable.
fn decomposable_orderunit(x: &CMat, d1: usize, d2: usize) -> Option<f64> {
    let n = d1 * d2;
    let mut sdp = Sdp::new(0);
    let lam = sdp.add_var();
    sdp.set_objective(lam, 1.0);
    let plus = Affine::scalar(n, lam, &eye(n)).plus_const(x);
    let minus = Affine::scalar(n, lam, &eye(n)).plus_const(&(-x));
    let q1 = add_decomposable(&mut sdp, &plus, d1, d2);
    let q2 = add_decomposable(&mut sdp, &minus, d1, d2);
    let sol = sdp.solve();
    if !sol.y.iter().all(|v| v.is_finite()) {
        return None;
    }
    // certify: shift λ until both splits are PSD
    let l = sol.y[lam];
    let mut need: f64 = 0.0;
    for (q, sgn) in [(&q1, 1.0), (&q2, -1.0)] {
        let qm = herm_part(&q.value(&sol.y));
        let qn = min_eig(&qm);
        if qn < -WITNESS_TOL {
            return None;
        }
        let p = eye(n) * c(l) + x * c(sgn) - ptranspose_second(&qm, d1, d2);
        need = need.max(-min_eig(&herm_part(&p)));
    }
    Some(l + need.max(0.0))
}

/// `sup{Tr XY : −I ≤ Y ≤ I}` in the order of the Choi cone of `P̃`.
pub fn base_norm_tilde(family: Family, x: &HermitianOperator, d_out: usize, d_in: usize) -> Result<Bounds> {
    check_bipartite(x, d_out, d_in)?;
    let m = x.mat();
    let n = d_out * d_in;
    let exact = family.is_exact(d_out, d_in);
    let tn = trace_norm(m);
    Ok(match family.tilde_cone() {
        ChoiCone::Psd => Bounds::exact(tn),
        ChoiCone::Separable => {
            // a smaller unit ball than the PSD one: value ≤ ‖X‖_1
            let hi = ppt_base(m, d_out, d_in).min(tn);
            let tr = trace(m).re.abs();
            if exact || x.min_eig() >= -PSD_TOL {
                let v = if x.min_eig() >= -PSD_TOL { tr } else { hi };
                Bounds::exact(v)
            } else {
                Bounds { lo: frob(m).max(tr).min(hi), hi }
            }
        }
        ChoiCone::BlockPositive => {
            let lo = decomposable_base(m, d_out, d_in).max(tn);
            if exact || x.min_eig() >= -PSD_TOL {
                let v = if x.min_eig() >= -PSD_TOL { trace(m).re } else { lo };
                Bounds::exact(v)
            } else {
                let gb = frob(m) * n as f64;
                Bounds { lo, hi: schmidt_base_bound(m, d_out, d_in).min(gb).max(lo) }
            }
        }
    })
}

/// `sup Tr XY` with `I ± Y` PSD and PPT.
fn ppt_base(x: &CMat, d1: usize, d2: usize) -> f64 {
    let n = d1 * d2;
    let mut sdp = Sdp::new(0);
    let y = HermVar::new(&mut sdp, &BlockAlgebra::full(n));
    y.objective_dot(&mut sdp, x, -1.0);
    let id = eye(n);
    add_ppt(&mut sdp, &y.image(1.0, |b| b.clone()).plus_const(&id), d1, d2);
    add_ppt(&mut sdp, &y.image(-1.0, |b| b.clone()).plus_const(&id), d1, d2);
    let sol = sdp.solve();
    (-sol.primal_value).max(-sol.dual_value)
}

/// `sup Tr XY` with `I ± Y` decomposable (feasible points only).
fn decomposable_base(x: &CMat, d1: usize, d2: usize) -> f64 {
    let n = d1 * d2;
    let mut sdp = Sdp::new(0);
    let y = HermVar::new(&mut sdp, &BlockAlgebra::full(n));
    y.objective_dot(&mut sdp, x, -1.0);
    let id = eye(n);
    let q1 = add_decomposable(&mut sdp, &y.image(1.0, |b| b.clone()).plus_const(&id), d1, d2);
    let q2 = add_decomposable(&mut sdp, &y.image(-1.0, |b| b.clone()).plus_const(&id), d1, d2);
    let sol = sdp.solve();
    if !sol.y.iter().all(|v| v.is_finite()) {
        return 0.0;
    }
    // shrink Y toward 0 until both sides are certified decomposable
    let ym = herm_part(&y.value(&sol.y));
    let mut worst: f64 = 0.0;
    for (q, sgn) in [(&q1, 1.0), (&q2, -1.0)] {
        let qm = herm_part(&q.value(&sol.y));
        let p = &id + &ym * c(sgn) - ptranspose_second(&qm, d1, d2);
        worst = worst.max(-min_eig(&herm_part(&p))).max(-min_eig(&qm));
    }
    // (1−s)(I ± Y) + s I ± … : with s = worst/(1+worst), (I ± (1−s)Y) gains s I
    let s = worst / (1.0 + worst);
    (1.0 - s) * hs(x, &ym)
}

/// Upper bound `Σ_k |λ_k| (2(Σ_i s_i^{(k)})² − 1)` from the spectral
/// decomposition, with `s^{(k)}` the Schmidt coefficients of eigenvector k.
/// A phase-averaged product decomposition writes each `|v><v|` as a
/// difference of separable operators with that total trace.
fn schmidt_base_bound(x: &CMat, d1: usize, d2: usize) -> f64 {
    let (vals, vecs) = eigh(x);
    vals.iter()
        .enumerate()
        .map(|(k, l)| {
            let v = vecs.column(k);
            let r = CMat::from_fn(d1, d2, |o, i| v[o * d2 + i]);
            let s: f64 = r.singular_values().iter().sum();
            l.abs() * (2.0 * s * s - 1.0)
        })
        .sum()
}

/// Hermitian basis of the full algebra on `n` (re-export for callers that
/// build Choi-pattern variables).
pub fn pattern_algebra(m: &HermitianMap) -> BlockAlgebra {
    m.out_alg().tensor(m.in_alg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmap::make_fe;
    use crate::random::Rng;

    fn qubit() -> BlockAlgebra {
        BlockAlgebra::full(2)
    }

    #[test]
    fn cp_examples() {
        assert!(cp_membership(&HermitianMap::identity(&qubit())).is_in());
        assert!(cp_membership(&HermitianMap::tau(&qubit(), &qubit())).is_in());
        let t = cp_membership(&HermitianMap::transpose(2));
        assert!(t.is_out());
        // Choi of the transpose is the swap, spectrum {1,1,1,-1}
        assert!((t.margin + 1.0).abs() < 1e-12);
    }

    #[test]
    fn eb_examples() {
        let id = eb_membership(&HermitianMap::identity(&qubit()), 0);
        assert!(id.is_out());
        // partial transpose of |Ω><Ω| is the swap
        assert!((id.margin + 1.0).abs() < 1e-12);
        assert!(eb_membership(&HermitianMap::tau(&qubit(), &qubit()), 0).is_in());
    }

    #[test]
    fn eb_certificate_above_exact_dims() {
        let mut rng = Rng::seed(3);
        let f: Vec<_> = (0..3).map(|_| rng.psd_rank(3, 3)).collect();
        let e: Vec<_> = (0..3).map(|_| rng.psd_rank(3, 3)).collect();
        let m = make_fe(&f, &e).unwrap();
        let v = eb_membership(&m, 1);
        assert!(v.is_in(), "{:?}", v.status);
        let Certificate::Separable(dec) = &v.certificate else { panic!("expected decomposition") };
        assert!(dec.verify(m.choi_mat()) >= 0.0);
    }

    #[test]
    fn pos_examples() {
        let t = pos_membership(&HermitianMap::transpose(2), 0);
        assert!(t.is_in());
        let neg = HermitianMap::from_choi(&qubit(), &qubit(), -eye(4)).unwrap();
        assert!(pos_membership(&neg, 0).is_out());
        let mut rng = Rng::seed(9);
        let m = rng.cp_map(2, 3);
        assert!(pos_membership(&m, 0).is_in());
        assert!(cp_membership(&m).is_in());
    }

    #[test]
    fn pos_witness_is_genuine() {
        let mut rng = Rng::seed(4);
        let m = rng.hermitian_map(2, 2);
        let v = pos_membership(&m, 0);
        if let Certificate::ProductWitness { x, y, value } = &v.certificate {
            let img = m.apply_mat(&(x * x.adjoint()));
            let direct = (y.adjoint() * img * y)[(0, 0)].re;
            assert!((direct - value).abs() < 1e-10);
            assert!(direct < -WITNESS_TOL);
        } else {
            panic!("gaussian Choi matrices are not block-positive");
        }
    }

    #[test]
    fn dual_examples() {
        let mut rng = Rng::seed(5);
        let f: Vec<_> = (0..2).map(|_| rng.psd_rank(2, 2)).collect();
        let e: Vec<_> = (0..2).map(|_| rng.psd_rank(2, 2)).collect();
        let fe = make_fe(&f, &e).unwrap();
        assert!(dual_membership(Family::Pos, &fe, 0).is_in());
        assert!(dual_membership(Family::Cp, &HermitianMap::identity(&qubit()), 0).is_in());
        assert!(dual_membership(Family::Eb, &HermitianMap::transpose(2), 0).is_in());
    }

    #[test]
    fn family_parse() {
        assert_eq!("EB".parse::<Family>().unwrap(), Family::Eb);
        assert!("kpos".parse::<Family>().is_err());
        assert_eq!(Family::Pos.dual(), Family::Eb);
    }

    #[test]
    fn norms_of_identity() {
        let id = HermitianOperator::identity(&BlockAlgebra::full(4));
        for f in Family::ALL {
            let b = orderunit_norm_tilde(f, &id, 2, 2).unwrap();
            assert!((b.lo - 1.0).abs() < 1e-7 && (b.hi - 1.0).abs() < 1e-7, "{f}: {b:?}");
            let t = base_norm_tilde(f, &id, 2, 2).unwrap();
            assert!((t.lo - 4.0).abs() < 1e-7 && (t.hi - 4.0).abs() < 1e-7, "{f}: {t:?}");
        }
    }

    #[test]
    fn cp_norms_are_schatten() {
        let x = HermitianOperator::diag(&[2.0, -1.0, 0.0, 0.0]);
        assert_eq!(orderunit_norm_tilde(Family::Cp, &x, 2, 2).unwrap().lo, 2.0);
        let y = HermitianOperator::diag(&[1.0, -1.0]);
        assert!((base_norm_tilde(Family::Cp, &y, 1, 2).unwrap().lo - 2.0).abs() < 1e-12);
    }

    #[test]
    fn separable_norms_bracket_cp() {
        let mut rng = Rng::seed(11);
        for _ in 0..5 {
            let x = rng.hermitian(4);
            let cp = orderunit_norm_tilde(Family::Cp, &x, 2, 2).unwrap().lo;
            let sep = orderunit_norm_tilde(Family::Pos, &x, 2, 2).unwrap();
            assert!(sep.lo >= cp - 1e-12);
            let a = rng.state(4);
            let b = rng.state(4);
            let d = a.op() - b.op();
            let tn = d.trace_norm();
            let sb = base_norm_tilde(Family::Pos, &d, 2, 2).unwrap();
            assert!(sb.hi <= tn + 1e-7 && sb.lo <= sb.hi + 1e-9);
            let bp = orderunit_norm_tilde(Family::Eb, &x, 2, 2).unwrap();
            assert!(bp.hi <= cp + 1e-9 && bp.lo <= bp.hi + 1e-7);
            assert!((bp.hi - bp.lo) < 1e-6, "exact dims: {bp:?}");
        }
    }
}
