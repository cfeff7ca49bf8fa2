//! Dense Hermitian linear algebra and finite-dimensional block algebras.
//!
//! Bipartite index convention: `|i>⊗|j>` on `C^d1 ⊗ C^d2` has flat index
//! `i * d2 + j`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Hermiticity tolerance used at construction, relative to the largest entry.
pub const TOL_HERM: f64 = 1e-12;
/// Relative eigenvalue cutoff for support detection.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
/// Absolute tolerance for state and POVM validation.
pub const TOL_STATE: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Raw matrix helpers shared by every module.
pub mod linalg {
    use super::*;

    pub fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    pub fn eye(n: usize) -> CMat {
        CMat::identity(n, n)
    }

    pub fn zeros(n: usize) -> CMat {
        CMat::zeros(n, n)
    }

    pub fn from_real_diag(d: &[f64]) -> CMat {
        let mut m = zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = c(*v);
        }
        m
    }

    pub fn unit(n: usize, i: usize, j: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn max_abs(m: &CMat) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn herm_part(m: &CMat) -> CMat {
        (m + m.adjoint()) * c(0.5)
    }

    pub fn herm_defect(m: &CMat) -> f64 {
        max_abs(&(m - m.adjoint()))
    }

    pub fn trace(m: &CMat) -> C64 {
        m.trace()
    }

    /// `Re Tr(a b)`; the Hilbert-Schmidt pairing on Hermitian matrices.
    pub fn hs(a: &CMat, b: &CMat) -> f64 {
        let n = a.nrows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = a[(i, j)] * b[(j, i)];
                s += x.re;
            }
        }
        s
    }

    pub fn frob(m: &CMat) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn kron(a: &CMat, b: &CMat) -> CMat {
        a.kronecker(b)
    }

    pub fn transpose(m: &CMat) -> CMat {
        m.transpose()
    }

    /// Trace over the second factor of `C^d1 ⊗ C^d2`.
    pub fn ptrace_second(m: &CMat, d1: usize, d2: usize) -> CMat {
        let mut out = CMat::zeros(d1, d1);
        for i in 0..d1 {
            for k in 0..d1 {
                let mut s = ZERO;
                for j in 0..d2 {
                    s += m[(i * d2 + j, k * d2 + j)];
                }
                out[(i, k)] = s;
            }
        }
        out
    }

    /// Trace over the first factor of `C^d1 ⊗ C^d2`.
    pub fn ptrace_first(m: &CMat, d1: usize, d2: usize) -> CMat {
        let mut out = CMat::zeros(d2, d2);
        for j in 0..d2 {
            for l in 0..d2 {
                let mut s = ZERO;
                for i in 0..d1 {
                    s += m[(i * d2 + j, i * d2 + l)];
                }
                out[(j, l)] = s;
            }
        }
        out
    }

    /// Transpose on the second factor of `C^d1 ⊗ C^d2`.
    pub fn ptranspose_second(m: &CMat, d1: usize, d2: usize) -> CMat {
        let mut out = CMat::zeros(d1 * d2, d1 * d2);
        for i in 0..d1 {
            for j in 0..d2 {
                for k in 0..d1 {
                    for l in 0..d2 {
                        out[(i * d2 + j, k * d2 + l)] = m[(i * d2 + l, k * d2 + j)];
                    }
                }
            }
        }
        out
    }

    /// `(I_d1 ⊗ k) m (I_d1 ⊗ k)†` for `m` on `C^d1 ⊗ C^d2` and a square `k`.
    pub fn local_conj_second(m: &CMat, d1: usize, k: &CMat) -> CMat {
        let big = kron(&eye(d1), k);
        &big * m * big.adjoint()
    }

    /// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
    pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
        let n = m.nrows();
        if n == 0 {
            return (Vec::new(), CMat::zeros(0, 0));
        }
        let se = SymmetricEigen::new(herm_part(m));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
        let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut vecs = CMat::zeros(n, n);
        for (col, &i) in idx.iter().enumerate() {
            vecs.set_column(col, &se.eigenvectors.column(i));
        }
        (vals, vecs)
    }

    pub fn eigvals(m: &CMat) -> Vec<f64> {
        eigh(m).0
    }

    pub fn min_eig(m: &CMat) -> f64 {
        eigvals(m).last().copied().unwrap_or(0.0)
    }

    pub fn max_eig(m: &CMat) -> f64 {
        eigvals(m).first().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†` for Hermitian `m`.
    pub fn apply_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
        let (vals, v) = eigh(m);
        let n = vals.len();
        let mut scaled = v.clone();
        for j in 0..n {
            let s = c(f(vals[j]));
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        herm_part(&(scaled * v.adjoint()))
    }

    pub fn trace_norm(m: &CMat) -> f64 {
        eigvals(m).iter().map(|x| x.abs()).sum()
    }

    pub fn op_norm(m: &CMat) -> f64 {
        eigvals(m).iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Principal square root of the positive part.
    pub fn sqrt_psd(m: &CMat) -> CMat {
        apply_fn(m, |x| x.max(0.0).sqrt())
    }

    /// `(pinv_sqrt, support)` with the relative support cutoff.
    pub fn pinv_sqrt(m: &CMat) -> (CMat, CMat) {
        let cut = SUPPORT_CUTOFF * op_norm(m);
        let s = apply_fn(m, |x| if x > cut { 1.0 / x.sqrt() } else { 0.0 });
        let p = apply_fn(m, |x| if x > cut { 1.0 } else { 0.0 });
        (s, p)
    }

    /// Sign of a Hermitian matrix, `0` on the kernel.
    pub fn sign(m: &CMat) -> CMat {
        apply_fn(m, |x| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Orthogonal basis of the real span of Hermitian matrices, returned as
    /// the rank of the Gram matrix.
    pub fn real_span_rank(ms: &[CMat], tol: f64) -> usize {
        let k = ms.len();
        if k == 0 {
            return 0;
        }
        let mut g = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                g[(i, j)] = hs(&ms[i], &ms[j]);
            }
        }
        let se = SymmetricEigen::new(g);
        let top = se.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        se.eigenvalues.iter().filter(|x| **x > tol * top.max(1e-300)).count()
    }
}

use linalg::*;

/// Finite-dimensional C*-algebra `⊕_k B(H_k)` inside an ambient matrix space.
///
/// Stored as index groups that partition `0..ambient_dim`; the algebra is the
/// set of matrices whose entry `(i, j)` vanishes unless `i` and `j` share a
/// group. Constructors from block sizes produce contiguous groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockAlgebra {
    groups: Vec<Vec<usize>>,
    label: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct BlockAlgebraRepr {
    blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<Vec<usize>>>,
}

impl Serialize for BlockAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let groups = if self.is_contiguous() { None } else { Some(self.groups.clone()) };
        BlockAlgebraRepr { blocks: self.blocks(), groups }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BlockAlgebraRepr::deserialize(d)?;
        let alg = match r.groups {
            Some(g) => BlockAlgebra::from_groups(g),
            None => BlockAlgebra::from_blocks(&r.blocks),
        };
        alg.map_err(serde::de::Error::custom)
    }
}

impl BlockAlgebra {
    pub fn from_blocks(blocks: &[usize]) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::Invalid("block list must be nonempty and positive".into()));
        }
        let mut groups = Vec::with_capacity(blocks.len());
        let mut start = 0;
        for &b in blocks {
            groups.push((start..start + b).collect());
            start += b;
        }
        Self::from_groups(groups)
    }

    pub fn from_groups(groups: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = groups.iter().map(Vec::len).sum();
        if n == 0 || groups.iter().any(Vec::is_empty) {
            return Err(Error::Invalid("empty block".into()));
        }
        let mut label = vec![usize::MAX; n];
        for (g, idx) in groups.iter().enumerate() {
            for &i in idx {
                if i >= n || label[i] != usize::MAX {
                    return Err(Error::Invalid("index groups must partition 0..n".into()));
                }
                label[i] = g;
            }
        }
        Ok(Self { groups, label })
    }

    /// `B(C^n)`.
    pub fn full(n: usize) -> Self {
        Self::from_blocks(&[n]).expect("n > 0")
    }

    /// The diagonal algebra `D_n`.
    pub fn diagonal(n: usize) -> Self {
        Self::from_blocks(&vec![1; n]).expect("n > 0")
    }

    pub fn ambient_dim(&self) -> usize {
        self.label.len()
    }

    pub fn blocks(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn is_full(&self) -> bool {
        self.groups.len() == 1
    }

    pub fn is_diagonal(&self) -> bool {
        self.groups.len() == self.ambient_dim()
    }

    fn is_contiguous(&self) -> bool {
        let mut next = 0;
        for g in &self.groups {
            for &i in g {
                if i != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }

    /// Whether matrix entry `(i, j)` lies inside the block pattern.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.label[i] == self.label[j]
    }

    /// Real dimension of the Hermitian part, `Σ d_k²`.
    pub fn real_dim(&self) -> usize {
        self.groups.iter().map(|g| g.len() * g.len()).sum()
    }

    pub fn tensor(&self, other: &BlockAlgebra) -> BlockAlgebra {
        let d2 = other.ambient_dim();
        let mut groups = Vec::new();
        for g in &self.groups {
            for h in &other.groups {
                let mut idx = Vec::with_capacity(g.len() * h.len());
                for &i in g {
                    for &j in h {
                        idx.push(i * d2 + j);
                    }
                }
                groups.push(idx);
            }
        }
        BlockAlgebra::from_groups(groups).expect("product of partitions is a partition")
    }

    /// Zero every entry outside the block pattern.
    pub fn project(&self, m: &CMat) -> CMat {
        let n = self.ambient_dim();
        let mut out = m.clone();
        for i in 0..n {
            for j in 0..n {
                if !self.contains(i, j) {
                    out[(i, j)] = ZERO;
                }
            }
        }
        out
    }

    fn off_block_max(&self, m: &CMat) -> f64 {
        let n = self.ambient_dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if !self.contains(i, j) {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Hilbert-Schmidt orthonormal basis of the Hermitian part.
    pub fn hermitian_basis(&self) -> Vec<CMat> {
        let n = self.ambient_dim();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(self.real_dim());
        for g in &self.groups {
            for (a, &i) in g.iter().enumerate() {
                out.push(unit(n, i, i));
                for &j in &g[a + 1..] {
                    let mut s = CMat::zeros(n, n);
                    s[(i, j)] = c(r);
                    s[(j, i)] = c(r);
                    out.push(s);
                    let mut t = CMat::zeros(n, n);
                    t[(i, j)] = C64::new(0.0, r);
                    t[(j, i)] = C64::new(0.0, -r);
                    out.push(t);
                }
            }
        }
        out
    }

    /// Matrix units `|i><j|` inside the pattern.
    pub fn matrix_units(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for g in &self.groups {
            for &i in g {
                for &j in g {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Self-adjoint matrix attached to a block algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
    alg: BlockAlgebra,
}

impl HermitianOperator {
    /// Validates Hermiticity and the block pattern, then symmetrizes.
    pub fn new(mat: CMat, alg: BlockAlgebra) -> Result<Self> {
        check_dim(alg.ambient_dim(), mat.nrows())?;
        check_dim(alg.ambient_dim(), mat.ncols())?;
        let scale = max_abs(&mat).max(1.0);
        let defect = herm_defect(&mat);
        if defect > TOL_HERM * scale {
            return Err(Error::NotHermitian(defect));
        }
        let off = alg.off_block_max(&mat);
        if off > TOL_HERM * scale {
            return Err(Error::OffBlock(off));
        }
        Ok(Self::project_into(&mat, alg))
    }

    /// Hermitian part of `mat` followed by the conditional expectation onto
    /// `alg`. Total, used for computed quantities.
    pub fn project_into(mat: &CMat, alg: BlockAlgebra) -> Self {
        let mat = alg.project(&herm_part(mat));
        Self { mat, alg }
    }

    /// Operator on the full algebra `B(C^n)`.
    pub fn from_matrix(mat: CMat) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, BlockAlgebra::full(n))
    }

    pub fn full(mat: &CMat) -> Self {
        let n = mat.nrows();
        Self::project_into(mat, BlockAlgebra::full(n))
    }

    pub fn identity(alg: &BlockAlgebra) -> Self {
        Self { mat: eye(alg.ambient_dim()), alg: alg.clone() }
    }

    pub fn zero(alg: &BlockAlgebra) -> Self {
        Self { mat: zeros(alg.ambient_dim()), alg: alg.clone() }
    }

    /// Real diagonal operator on `B(C^n)`.
    pub fn diag(d: &[f64]) -> Self {
        Self::full(&from_real_diag(d))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.alg
    }

    /// Same entries viewed inside another algebra of the same ambient size.
    pub fn with_algebra(&self, alg: &BlockAlgebra) -> Result<Self> {
        Self::new(self.mat.clone(), alg.clone())
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        hs(&self.mat, &other.mat)
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { mat: &self.mat * c(t), alg: self.alg.clone() }
    }

    pub fn eig(&self) -> (Vec<f64>, CMat) {
        eig(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvals(&self.mat)
    }

    pub fn min_eig(&self) -> f64 {
        min_eig(&self.mat)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eig() >= -tol
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(self)
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }

    pub fn frobenius(&self) -> f64 {
        frob(&self.mat)
    }

    fn combine_alg(&self, other: &Self) -> BlockAlgebra {
        if self.alg == other.alg {
            self.alg.clone()
        } else {
            BlockAlgebra::full(self.dim())
        }
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat + &rhs.mat, alg: self.combine_alg(rhs) }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat - &rhs.mat, alg: self.combine_alg(rhs) }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, t: f64) -> HermitianOperator {
        self.scale(t)
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
pub fn eig(h: &HermitianOperator) -> (Vec<f64>, CMat) {
    eigh(&h.mat)
}

pub fn trace_norm(h: &HermitianOperator) -> f64 {
    linalg::trace_norm(&h.mat)
}

pub fn op_norm(h: &HermitianOperator) -> f64 {
    linalg::op_norm(&h.mat)
}

/// `(s, p)` with `s a s = p`, `p` the support projection of `a`.
/// Eigenvalues at or below `1e-10 · ‖a‖` count as zero.
pub fn pinv_sqrt(a: &HermitianOperator) -> (HermitianOperator, HermitianOperator) {
    let (s, p) = linalg::pinv_sqrt(&a.mat);
    (
        HermitianOperator::project_into(&s, a.alg.clone()),
        HermitianOperator::project_into(&p, a.alg.clone()),
    )
}

pub fn sqrt_psd(a: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::project_into(&linalg::sqrt_psd(&a.mat), a.alg.clone())
}

/// Which tensor factor a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    First,
    Second,
}

/// Partial trace of `h` on `C^d1 ⊗ C^d2`; the result lives in the full
/// algebra of the remaining factor.
pub fn partial_trace(h: &HermitianOperator, d1: usize, d2: usize, side: Side) -> Result<HermitianOperator> {
    check_dim(d1 * d2, h.dim())?;
    let m = match side {
        Side::Second => ptrace_second(&h.mat, d1, d2),
        Side::First => ptrace_first(&h.mat, d1, d2),
    };
    Ok(HermitianOperator::full(&m))
}

pub fn tensor(h1: &HermitianOperator, h2: &HermitianOperator) -> HermitianOperator {
    HermitianOperator { mat: kron(&h1.mat, &h2.mat), alg: h1.alg.tensor(&h2.alg) }
}

/// Trace-preserving conditional expectation onto `alg` (block extraction).
pub fn conditional_expectation(h: &HermitianOperator, alg: &BlockAlgebra) -> Result<HermitianOperator> {
    check_dim(alg.ambient_dim(), h.dim())?;
    Ok(HermitianOperator { mat: alg.project(&h.mat), alg: alg.clone() })
}

/// Density operator: PSD with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    op: HermitianOperator,
}

impl State {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let m = op.min_eig();
        if m < -TOL_STATE {
            return Err(Error::NotPsd(m));
        }
        let t = op.trace();
        if (t - 1.0).abs() > TOL_STATE {
            return Err(Error::Invalid(format!("state trace {t} differs from 1")));
        }
        Ok(Self { op })
    }

    /// Maximally mixed state of `alg`.
    pub fn maximally_mixed(alg: &BlockAlgebra) -> Self {
        let n = alg.ambient_dim() as f64;
        Self { op: HermitianOperator::identity(alg).scale(1.0 / n) }
    }

    /// `|x><x| / <x|x>` on the full algebra.
    pub fn pure(x: &nalgebra::DVector<C64>) -> Self {
        let nrm = x.norm();
        let v = x / c(nrm);
        let m = &v * v.adjoint();
        Self { op: HermitianOperator::full(&m) }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn mat(&self) -> &CMat {
        self.op.mat()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Positive operator-valued measure over a common algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::Invalid("empty POVM".into()))?;
        let alg = first.algebra().clone();
        let mut sum = zeros(alg.ambient_dim());
        for e in &effects {
            if e.algebra() != &alg {
                return Err(Error::AlgebraMismatch("POVM effects must share an algebra".into()));
            }
            let m = e.min_eig();
            if m < -TOL_STATE {
                return Err(Error::NotPsd(m));
            }
            sum += e.mat();
        }
        let defect = max_abs(&(sum - eye(alg.ambient_dim())));
        if defect > TOL_STATE {
            return Err(Error::Invalid(format!("POVM effects sum to identity only within {defect:e}")));
        }
        Ok(Self { effects })
    }

    /// `n` equal effects `I/n`.
    pub fn trivial(alg: &BlockAlgebra, n: usize) -> Self {
        let e = HermitianOperator::identity(alg).scale(1.0 / n as f64);
        Self { effects: vec![e; n] }
    }

    /// Projective measurement in the computational basis of `alg`.
    pub fn computational(alg: &BlockAlgebra) -> Self {
        let n = alg.ambient_dim();
        let effects = (0..n)
            .map(|i| HermitianOperator::project_into(&unit(n, i, i), alg.clone()))
            .collect();
        Self { effects }
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        self.effects[0].algebra()
    }

    /// Appends zero effects until there are `n` outcomes.
    pub fn padded(&self, n: usize) -> Self {
        let mut effects = self.effects.clone();
        while effects.len() < n {
            effects.push(HermitianOperator::zero(self.algebra()));
        }
        Self { effects }
    }

    /// `Λ(N)_i = Σ_j λ_ij N_j`; `lambda` is row-major `m × n`.
    pub fn relabel(&self, lambda: &[Vec<f64>]) -> Result<Self> {
        let alg = self.algebra().clone();
        let mut out = Vec::with_capacity(lambda.len());
        for row in lambda {
            check_dim(self.len(), row.len())?;
            let mut m = zeros(alg.ambient_dim());
            for (w, e) in row.iter().zip(&self.effects) {
                m += e.mat() * c(*w);
            }
            out.push(HermitianOperator::project_into(&m, alg.clone()));
        }
        Povm::new(out)
    }
}
