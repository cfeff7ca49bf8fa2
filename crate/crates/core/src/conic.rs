//! Small dense conic solvers and nonconvex search engines.
//!
//! The SDP solver is a primal-dual interior-point method with
//! Nesterov-Todd scaling and Mehrotra predictor-corrector steps. Problems are
//! posed as linear matrix inequalities over free variables,
//!
//! ```text
//! minimize cᵀy  subject to  F0 + Σ_i y_i F_i ⪰ 0  (Hermitian blocks)
//!                           g0 + Σ_i y_i g_i ≥ 0  (scalar rows)
//!                           E y = f
//! ```
//!
//! which is the dual half of the standard pair; the primal half supplies the
//! lower bound and the multipliers.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matops::{CMat, C64, ZERO};
use crate::random::{derive_seed, Rng};

pub const MAX_ITER: usize = 200;
pub const SDP_TOL: f64 = 1e-9;
/// Accuracy at which a stalled solve still meets the optimality contract.
pub const CONTRACT_TOL: f64 = 1e-7;

type RMat = DMatrix<f64>;
type RVec = DVector<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    /// The constraints admit no point; `ray` holds a certificate.
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
    MaxIter,
}

// ---------------------------------------------------------------------------
// Problem builder
// ---------------------------------------------------------------------------

/// Sparse Hermitian coefficient: entries `(row, col, value)`, both triangles.
pub type Entries = Vec<(usize, usize, C64)>;

#[derive(Clone, Debug)]
struct HermBlock {
    n: usize,
    constant: Entries,
    terms: Vec<(usize, Entries)>,
}

#[derive(Clone, Debug)]
struct Row {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

/// Handle of a Hermitian block inside an [`Sdp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockId(pub usize);

/// Linear matrix inequality problem over `n` real variables.
#[derive(Clone, Debug)]
pub struct Sdp {
    nvars: usize,
    c: Vec<f64>,
    blocks: Vec<HermBlock>,
    rows: Vec<Row>,
    eqs: Vec<Row>,
}

pub fn entries_of(m: &CMat) -> Entries {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z != ZERO {
                out.push((i, j, z));
            }
        }
    }
    out
}

impl Sdp {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, c: vec![0.0; nvars], blocks: Vec::new(), rows: Vec::new(), eqs: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Appends a fresh variable and returns its index.
    pub fn add_var(&mut self) -> usize {
        self.nvars += 1;
        self.c.push(0.0);
        self.nvars - 1
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.c[var] = coef;
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn add_block(&mut self, n: usize, constant: &CMat) -> BlockId {
        assert_eq!(constant.nrows(), n);
        self.blocks.push(HermBlock { n, constant: entries_of(constant), terms: Vec::new() });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_term(&mut self, b: BlockId, var: usize, coef: &CMat) {
        let e = entries_of(coef);
        if !e.is_empty() {
            self.blocks[b.0].terms.push((var, e));
        }
    }

    pub fn add_term_entries(&mut self, b: BlockId, var: usize, e: Entries) {
        if !e.is_empty() {
            self.blocks[b.0].terms.push((var, e));
        }
    }

    /// `constant + Σ coef · y ≥ 0`.
    pub fn add_row(&mut self, constant: f64, terms: Vec<(usize, f64)>) {
        self.rows.push(Row { constant, terms });
    }

    /// `Σ coef · y = rhs`.
    pub fn add_eq(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.eqs.push(Row { constant: rhs, terms });
    }

    /// `F0 + Σ y_i F_i` for block `b`.
    pub fn block_value(&self, b: BlockId, y: &[f64]) -> CMat {
        let blk = &self.blocks[b.0];
        let mut m = CMat::zeros(blk.n, blk.n);
        for &(r, c, v) in &blk.constant {
            m[(r, c)] += v;
        }
        for (var, e) in &blk.terms {
            let t = y[*var];
            if t != 0.0 {
                for &(r, c, v) in e {
                    m[(r, c)] += v * t;
                }
            }
        }
        m
    }

    pub fn row_values(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.constant + r.terms.iter().map(|(i, a)| a * y[*i]).sum::<f64>())
            .collect()
    }

    pub fn eq_residuals(&self, y: &[f64]) -> Vec<f64> {
        self.eqs
            .iter()
            .map(|r| r.terms.iter().map(|(i, a)| a * y[*i]).sum::<f64>() - r.constant)
            .collect()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.c.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// Smallest eigenvalue over all blocks and rows at `y` (`+∞` if none).
    pub fn min_slack(&self, y: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for b in 0..self.blocks.len() {
            m = m.min(crate::matops::linalg::min_eig(&self.block_value(BlockId(b), y)));
        }
        for v in self.row_values(y) {
            m = m.min(v);
        }
        m
    }

    pub fn solve(&self) -> SdpSolution {
        self.solve_with(&SolverOptions::default())
    }

    pub fn solve_with(&self, opts: &SolverOptions) -> SdpSolution {
        let reduced = Reduction::new(self);
        let Some(red) = reduced else {
            return SdpSolution::infeasible_eq(self);
        };
        let std = red.standard_form(self);
        let res = ipm(&std, opts);
        red.lift(self, &std, res)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: MAX_ITER, tol: SDP_TOL }
    }
}

/// Outcome of a solve in the variables of the original problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: Status,
    /// `cᵀy` at the returned point.
    pub primal_value: f64,
    /// Lower bound from the multipliers (exact only when they are feasible).
    pub dual_value: f64,
    pub gap: f64,
    pub y: Vec<f64>,
    /// Multipliers of the Hermitian blocks, each PSD.
    #[serde(skip)]
    pub block_duals: Vec<CMat>,
    /// Multipliers of the scalar rows, each nonnegative.
    pub row_duals: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    fn infeasible_eq(p: &Sdp) -> Self {
        Self {
            status: Status::Infeasible,
            primal_value: f64::INFINITY,
            dual_value: f64::INFINITY,
            gap: f64::INFINITY,
            y: vec![0.0; p.nvars],
            block_duals: p.blocks.iter().map(|b| CMat::zeros(b.n, b.n)).collect(),
            row_duals: vec![0.0; p.rows.len()],
            iterations: 0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

// ---------------------------------------------------------------------------
// Equality elimination and real embedding
// ---------------------------------------------------------------------------

/// `y = y0 + N z` parametrization of the affine set `E y = f`.
struct Reduction {
    y0: RVec,
    basis: RMat,
}

impl Reduction {
    fn new(p: &Sdp) -> Option<Self> {
        let n = p.nvars;
        if p.eqs.is_empty() {
            return Some(Self { y0: RVec::zeros(n), basis: RMat::identity(n, n) });
        }
        let k = p.eqs.len();
        let mut e = RMat::zeros(k, n);
        let mut f = RVec::zeros(k);
        for (r, row) in p.eqs.iter().enumerate() {
            for &(i, a) in &row.terms {
                e[(r, i)] += a;
            }
            f[r] = row.constant;
        }
        // SVD of Eᵀ E gives the row space and the null space in one step.
        let gram = e.transpose() * &e;
        let se = nalgebra::SymmetricEigen::new(gram);
        let top = se.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let cut = 1e-12 * top.max(1e-300);
        let mut null_cols = Vec::new();
        let mut pinv = RMat::zeros(n, n);
        for j in 0..n {
            let v = se.eigenvectors.column(j);
            if se.eigenvalues[j] > cut {
                pinv += &v * v.transpose() / se.eigenvalues[j];
            } else {
                null_cols.push(v.into_owned());
            }
        }
        let y0 = &pinv * e.transpose() * &f;
        let res = (&e * &y0 - &f).amax();
        if res > 1e-9 * (1.0 + f.amax()) {
            return None;
        }
        let basis = if null_cols.is_empty() { RMat::zeros(n, 0) } else { RMat::from_columns(&null_cols) };
        Some(Self { y0, basis })
    }

    fn standard_form(&self, p: &Sdp) -> StdProblem {
        let m = self.basis.ncols();
        let y0: Vec<f64> = self.y0.iter().copied().collect();
        let mut kinds = Vec::new();
        let mut cmats = Vec::new();
        // a[j][block] = sparse entries of A_j in the real embedding
        let mut a: Vec<Vec<Vec<(usize, usize, f64)>>> = vec![Vec::new(); m];
        let identity = self.basis.nrows() == m && self.y0.iter().all(|x| *x == 0.0) && is_identity(&self.basis);

        for (bi, blk) in p.blocks.iter().enumerate() {
            let n = blk.n;
            kinds.push(Kind::Psd(2 * n));
            let f0 = p.block_value(BlockId(bi), &y0);
            cmats.push(BlockMat::Psd(embed(&f0)));
            if identity {
                let mut per_var: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); m];
                for (var, e) in &blk.terms {
                    embed_entries(e, n, -1.0, &mut per_var[*var]);
                }
                for (j, ent) in per_var.into_iter().enumerate() {
                    a[j].push(merge(ent));
                }
            } else {
                for j in 0..m {
                    let mut acc = CMat::zeros(n, n);
                    for (var, e) in &blk.terms {
                        let w = self.basis[(*var, j)];
                        if w != 0.0 {
                            for &(r, c, v) in e {
                                acc[(r, c)] += v * w;
                            }
                        }
                    }
                    let mut ent = Vec::new();
                    embed_entries(&entries_of(&acc), n, -1.0, &mut ent);
                    a[j].push(ent);
                }
            }
        }
        if !p.rows.is_empty() {
            let k = p.rows.len();
            kinds.push(Kind::Lp(k));
            let g0 = p.row_values(&y0);
            cmats.push(BlockMat::Lp(RVec::from_vec(g0)));
            let mut per_var: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); m];
            for (r, row) in p.rows.iter().enumerate() {
                for &(var, coef) in &row.terms {
                    if identity {
                        per_var[var].push((r, r, -coef));
                    } else {
                        for j in 0..m {
                            let w = self.basis[(var, j)];
                            if w != 0.0 {
                                per_var[j].push((r, r, -coef * w));
                            }
                        }
                    }
                }
            }
            for (j, ent) in per_var.into_iter().enumerate() {
                a[j].push(merge(ent));
            }
        }
        let c_red = self.basis.transpose() * RVec::from_column_slice(&p.c);
        let b = -c_red;
        StdProblem { kinds, c: cmats, a, b }
    }

    fn lift(&self, p: &Sdp, s: &StdProblem, r: IpmResult) -> SdpSolution {
        let y = &self.y0 + &self.basis * &r.y;
        let y: Vec<f64> = y.iter().copied().collect();
        let mut block_duals = Vec::new();
        let mut row_duals = Vec::new();
        for (k, x) in r.x.iter().enumerate() {
            match (x, &s.kinds[k]) {
                (BlockMat::Psd(xm), Kind::Psd(nn)) => block_duals.push(unembed(xm, nn / 2)),
                (BlockMat::Lp(v), _) => row_duals.extend(v.iter().copied()),
                _ => unreachable!(),
            }
        }
        let c0: f64 = p.c.iter().zip(self.y0.iter()).map(|(a, b)| a * b).sum();
        // std primal value ⟨C, X⟩ bounds bᵀz = −c_redᵀz from above
        let primal_value = p.value(&y);
        let dual_value = -r.pobj + c0;
        SdpSolution {
            status: r.status,
            primal_value,
            dual_value,
            gap: (primal_value - dual_value).abs(),
            y,
            block_duals,
            row_duals,
            iterations: r.iterations,
            primal_residual: r.rp,
            dual_residual: r.rd,
        }
    }
}

fn is_identity(m: &RMat) -> bool {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != if i == j { 1.0 } else { 0.0 } {
                return false;
            }
        }
    }
    true
}

fn merge(mut e: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(e.len());
    for (r, c, v) in e {
        match out.last_mut() {
            Some(l) if l.0 == r && l.1 == c => l.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|x| x.2 != 0.0);
    out
}

/// Real symmetric embedding `[[Re, −Im], [Im, Re]]`.
pub fn embed(m: &CMat) -> RMat {
    let n = m.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i + n, j)] = z.im;
            out[(i, j + n)] = -z.im;
        }
    }
    out
}

fn embed_entries(e: &Entries, n: usize, scale: f64, out: &mut Vec<(usize, usize, f64)>) {
    for &(r, c, z) in e {
        if z.re != 0.0 {
            out.push((r, c, scale * z.re));
            out.push((r + n, c + n, scale * z.re));
        }
        if z.im != 0.0 {
            out.push((r + n, c, scale * z.im));
            out.push((r, c + n, -scale * z.im));
        }
    }
}

/// Complex PSD matrix with `Tr(A X) = ⟨embed(A), X̂⟩` for Hermitian `A`.
pub fn unembed(x: &RMat, n: usize) -> CMat {
    CMat::from_fn(n, n, |r, c| {
        C64::new(x[(r, c)] + x[(r + n, c + n)], x[(r + n, c)] - x[(r, c + n)])
    })
}

// ---------------------------------------------------------------------------
// Standard-form interior point
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum Kind {
    Psd(usize),
    Lp(usize),
}

#[derive(Clone, Debug)]
enum BlockMat {
    Psd(RMat),
    Lp(RVec),
}

impl BlockMat {
    fn identity(kind: Kind, s: f64) -> Self {
        match kind {
            Kind::Psd(n) => BlockMat::Psd(RMat::identity(n, n) * s),
            Kind::Lp(n) => BlockMat::Lp(RVec::from_element(n, s)),
        }
    }

    fn dot(&self, other: &BlockMat) -> f64 {
        match (self, other) {
            (BlockMat::Psd(a), BlockMat::Psd(b)) => a.dot(b),
            (BlockMat::Lp(a), BlockMat::Lp(b)) => a.dot(b),
            _ => unreachable!(),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            BlockMat::Psd(a) => a.norm(),
            BlockMat::Lp(a) => a.norm(),
        }
    }

    fn axpy(&mut self, t: f64, other: &BlockMat) {
        match (self, other) {
            (BlockMat::Psd(a), BlockMat::Psd(b)) => *a += b * t,
            (BlockMat::Lp(a), BlockMat::Lp(b)) => *a += b * t,
            _ => unreachable!(),
        }
    }

    fn sparse_dot(&self, e: &[(usize, usize, f64)]) -> f64 {
        match self {
            BlockMat::Psd(m) => e.iter().map(|&(r, c, v)| v * m[(r, c)]).sum(),
            BlockMat::Lp(x) => e.iter().map(|&(r, _, v)| v * x[r]).sum(),
        }
    }

    fn add_sparse(&mut self, e: &[(usize, usize, f64)], t: f64) {
        match self {
            BlockMat::Psd(m) => {
                for &(r, c, v) in e {
                    m[(r, c)] += t * v;
                }
            }
            BlockMat::Lp(x) => {
                for &(r, _, v) in e {
                    x[r] += t * v;
                }
            }
        }
    }
}

struct StdProblem {
    kinds: Vec<Kind>,
    c: Vec<BlockMat>,
    a: Vec<Vec<Vec<(usize, usize, f64)>>>,
    b: RVec,
}

impl StdProblem {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn a_op(&self, x: &[BlockMat]) -> RVec {
        RVec::from_fn(self.m(), |i, _| self.a[i].iter().zip(x).map(|(e, xb)| xb.sparse_dot(e)).sum())
    }

    fn at_op(&self, y: &RVec) -> Vec<BlockMat> {
        let mut out: Vec<BlockMat> = self.kinds.iter().map(|k| BlockMat::identity(*k, 0.0)).collect();
        for i in 0..self.m() {
            if y[i] != 0.0 {
                for (k, e) in self.a[i].iter().enumerate() {
                    out[k].add_sparse(e, y[i]);
                }
            }
        }
        out
    }

    fn degree(&self) -> f64 {
        self.kinds.iter().map(|k| match k {
            Kind::Psd(n) | Kind::Lp(n) => *n as f64,
        }).sum()
    }
}

struct IpmResult {
    status: Status,
    x: Vec<BlockMat>,
    y: RVec,
    pobj: f64,
    iterations: usize,
    rp: f64,
    rd: f64,
}

/// Per-block NT scaling data.
enum Scaling {
    /// `G` with `GᵀZG = G⁻¹XG⁻ᵀ = diag(lam)`, `W = GGᵀ`.
    Psd { g: RMat, ginv: RMat, w: RMat, lam: RVec },
    /// `w = x/z`, `lam = √(xz)`.
    Lp { x: RVec, z: RVec, lam: RVec },
}

fn nt_scaling(x: &BlockMat, z: &BlockMat) -> Option<Scaling> {
    match (x, z) {
        (BlockMat::Psd(xm), BlockMat::Psd(zm)) => {
            let lx = xm.clone().cholesky()?.l();
            let lz = zm.clone().cholesky()?.l();
            let svd = (lz.transpose() * &lx).svd(true, true);
            let v = svd.v_t?.transpose();
            let u = svd.u?;
            let d = svd.singular_values;
            if d.iter().any(|s| !(*s > 0.0)) {
                return None;
            }
            let dm12 = RVec::from_fn(d.len(), |i, _| 1.0 / d[i].sqrt());
            let dp12 = RVec::from_fn(d.len(), |i, _| d[i].sqrt());
            let g = &lx * &v * RMat::from_diagonal(&dm12);
            // G⁻¹ = D^{1/2} Vᵀ L_X⁻¹ = D^{-1/2} Uᵀ L_Zᵀ
            let ginv = RMat::from_diagonal(&dm12) * u.transpose() * lz.transpose();
            let _ = dp12;
            let w = &g * g.transpose();
            Some(Scaling::Psd { g, ginv, w, lam: d })
        }
        (BlockMat::Lp(xv), BlockMat::Lp(zv)) => {
            if xv.iter().chain(zv.iter()).any(|t| !(*t > 0.0)) {
                return None;
            }
            let lam = xv.component_mul(zv).map(f64::sqrt);
            Some(Scaling::Lp { x: xv.clone(), z: zv.clone(), lam })
        }
        _ => unreachable!(),
    }
}

impl Scaling {
    /// `W A W` for sparse `A`.
    fn waw(&self, e: &[(usize, usize, f64)]) -> BlockMat {
        match self {
            Scaling::Psd { w, .. } => {
                let n = w.nrows();
                let mut t = RMat::zeros(n, n);
                for &(r, c, v) in e {
                    // (A W)[r, :] += v W[c, :]
                    for k in 0..n {
                        t[(r, k)] += v * w[(c, k)];
                    }
                }
                BlockMat::Psd(w * t)
            }
            Scaling::Lp { x, z, .. } => {
                let mut out = RVec::zeros(x.len());
                for &(r, _, v) in e {
                    out[r] += v * x[r] / z[r];
                }
                BlockMat::Lp(out)
            }
        }
    }

    fn wmw(&self, m: &BlockMat) -> BlockMat {
        match (self, m) {
            (Scaling::Psd { w, .. }, BlockMat::Psd(a)) => BlockMat::Psd(w * a * w),
            (Scaling::Lp { x, z, .. }, BlockMat::Lp(a)) => {
                BlockMat::Lp(RVec::from_fn(a.len(), |i, _| a[i] * x[i] / z[i]))
            }
            _ => unreachable!(),
        }
    }

    fn lam_sq_neg(&self, sigma_mu: f64) -> BlockMat {
        match self {
            Scaling::Psd { lam, .. } => {
                BlockMat::Psd(RMat::from_diagonal(&lam.map(|l| sigma_mu - l * l)))
            }
            Scaling::Lp { lam, .. } => BlockMat::Lp(lam.map(|l| sigma_mu - l * l)),
        }
    }

    /// `G L⁻¹(Rc) Gᵀ` where `L(S) = (ΛS + SΛ)/2`.
    fn h(&self, rc: &BlockMat) -> BlockMat {
        match (self, rc) {
            (Scaling::Psd { g, lam, .. }, BlockMat::Psd(r)) => {
                let n = lam.len();
                let s = RMat::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (lam[i] + lam[j]));
                BlockMat::Psd(g * s * g.transpose())
            }
            (Scaling::Lp { z, .. }, BlockMat::Lp(r)) => BlockMat::Lp(RVec::from_fn(r.len(), |i, _| r[i] / z[i])),
            _ => unreachable!(),
        }
    }

    /// Symmetrized product of the scaled directions, `(ΔX̃ΔZ̃ + ΔZ̃ΔX̃)/2`.
    fn second_order(&self, dx: &BlockMat, dz: &BlockMat) -> BlockMat {
        match (self, dx, dz) {
            (Scaling::Psd { g, ginv, .. }, BlockMat::Psd(a), BlockMat::Psd(b)) => {
                let xt = ginv * a * ginv.transpose();
                let zt = g.transpose() * b * g;
                let p = &xt * &zt;
                BlockMat::Psd((&p + p.transpose()) * 0.5)
            }
            (Scaling::Lp { .. }, BlockMat::Lp(a), BlockMat::Lp(b)) => BlockMat::Lp(a.component_mul(b)),
            _ => unreachable!(),
        }
    }
}

/// Largest `α ≤ cap` keeping `x + α dx` in the cone.
fn max_step(x: &BlockMat, dx: &BlockMat) -> f64 {
    match (x, dx) {
        (BlockMat::Psd(xm), BlockMat::Psd(d)) => {
            let Some(ch) = xm.clone().cholesky() else { return 0.0 };
            let l = ch.l();
            let Some(linv) = l.clone().try_inverse() else { return 0.0 };
            let s = &linv * d * linv.transpose();
            let s = (&s + s.transpose()) * 0.5;
            let ev = s.symmetric_eigenvalues();
            let mn = ev.iter().fold(f64::INFINITY, |a, v| a.min(*v));
            if mn >= 0.0 {
                f64::INFINITY
            } else {
                -1.0 / mn
            }
        }
        (BlockMat::Lp(xv), BlockMat::Lp(d)) => {
            let mut a = f64::INFINITY;
            for i in 0..xv.len() {
                if d[i] < 0.0 {
                    a = a.min(-xv[i] / d[i]);
                }
            }
            a
        }
        _ => unreachable!(),
    }
}

fn solve_spd(m: &RMat, rhs: &RVec) -> Option<RVec> {
    if let Some(ch) = m.clone().cholesky() {
        let s = ch.solve(rhs);
        if s.iter().all(|v| v.is_finite()) {
            return Some(s);
        }
    }
    let scale = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = m.clone();
    for i in 0..m.nrows() {
        reg[(i, i)] += 1e-13 * scale;
    }
    let s = reg.lu().solve(rhs)?;
    s.iter().all(|v| v.is_finite()).then_some(s)
}

fn ipm(p: &StdProblem, opts: &SolverOptions) -> IpmResult {
    let m = p.m();
    let nb = p.kinds.len();
    let deg = p.degree().max(1.0);
    let bnorm = p.b.amax();
    let cnorm = p.c.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let anorm = p
        .a
        .iter()
        .map(|blocks| blocks.iter().flatten().map(|e| e.2 * e.2).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let nmax = p.kinds.iter().map(|k| match k {
        Kind::Psd(n) | Kind::Lp(n) => *n,
    }).max().unwrap_or(1) as f64;
    let xi = 10f64.max(nmax.sqrt()).max(nmax * (1.0 + bnorm) / (1.0 + anorm));
    let eta = 10f64.max(nmax.sqrt()).max(anorm).max(cnorm);

    let mut x: Vec<BlockMat> = p.kinds.iter().map(|k| BlockMat::identity(*k, xi)).collect();
    let mut z: Vec<BlockMat> = p.kinds.iter().map(|k| BlockMat::identity(*k, eta)).collect();
    let mut y = RVec::zeros(m);

    let mut best: Option<(f64, Vec<BlockMat>, RVec, f64, f64, f64)> = None;
    let mut status = Status::MaxIter;
    let mut iterations = 0;
    let mut stall = 0;

    for it in 0..opts.max_iter {
        iterations = it;
        let ax = p.a_op(&x);
        let rp = &p.b - &ax;
        let aty = p.at_op(&y);
        let rd: Vec<BlockMat> = (0..nb)
            .map(|k| {
                let mut r = p.c[k].clone();
                r.axpy(-1.0, &aty[k]);
                r.axpy(-1.0, &z[k]);
                r
            })
            .collect();
        let pobj: f64 = p.c.iter().zip(&x).map(|(c, xb)| c.dot(xb)).sum();
        let dobj = p.b.dot(&y);
        let xz: f64 = x.iter().zip(&z).map(|(a, b)| a.dot(b)).sum();
        let mu = xz / deg;
        let rp_rel = rp.amax() / (1.0 + bnorm);
        let rd_rel = rd.iter().map(|r| r.norm()).fold(0.0, f64::max) / (1.0 + cnorm);
        let gap_rel = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = rp_rel.max(rd_rel).max(gap_rel);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, x.clone(), y.clone(), pobj, rp_rel, rd_rel));
        }
        if merit <= opts.tol {
            status = Status::Optimal;
            break;
        }
        // Farkas rays for either side.
        let xnorm = x.iter().map(|b| b.norm()).fold(0.0, f64::max);
        if dobj > 0.0 && it > 5 {
            let ray: f64 = (0..nb)
                .map(|k| {
                    let mut r = aty[k].clone();
                    r.axpy(1.0, &z[k]);
                    r.norm()
                })
                .fold(0.0, f64::max);
            if ray / dobj < 1e-8 && dobj > 1e8 * (1.0 + cnorm) {
                status = Status::Unbounded;
                break;
            }
        }
        if pobj < 0.0 && it > 5 && xnorm > 1e8 * (1.0 + bnorm) && ax.amax() / (-pobj) < 1e-8 {
            status = Status::Infeasible;
            break;
        }

        let Some(sc) = (0..nb).map(|k| nt_scaling(&x[k], &z[k])).collect::<Option<Vec<_>>>() else {
            break;
        };

        // Schur complement M_ij = ⟨A_i, W A_j W⟩.
        let waw: Vec<Vec<BlockMat>> = (0..m)
            .map(|j| (0..nb).map(|k| sc[k].waw(&p.a[j][k])).collect())
            .collect();
        let mut schur = RMat::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let v: f64 = (0..nb).map(|k| waw[j][k].sparse_dot(&p.a[i][k])).sum();
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let wrdw: Vec<BlockMat> = (0..nb).map(|k| sc[k].wmw(&rd[k])).collect();
        let a_wrdw = p.a_op(&wrdw);

        let direction = |rc: &[BlockMat]| -> Option<(Vec<BlockMat>, RVec, Vec<BlockMat>)> {
            let h: Vec<BlockMat> = (0..nb).map(|k| sc[k].h(&rc[k])).collect();
            let rhs = &rp - p.a_op(&h) + &a_wrdw;
            let dy = solve_spd(&schur, &rhs)?;
            let atdy = p.at_op(&dy);
            let dz: Vec<BlockMat> = (0..nb)
                .map(|k| {
                    let mut d = rd[k].clone();
                    d.axpy(-1.0, &atdy[k]);
                    d
                })
                .collect();
            let dx: Vec<BlockMat> = (0..nb)
                .map(|k| {
                    let mut d = h[k].clone();
                    d.axpy(-1.0, &sc[k].wmw(&dz[k]));
                    d
                })
                .collect();
            Some((dx, dy, dz))
        };

        let rc_aff: Vec<BlockMat> = sc.iter().map(|s| s.lam_sq_neg(0.0)).collect();
        let Some((dxa, _dya, dza)) = direction(&rc_aff) else { break };
        let ap = (0..nb).map(|k| max_step(&x[k], &dxa[k])).fold(f64::INFINITY, f64::min).min(1.0);
        let ad = (0..nb).map(|k| max_step(&z[k], &dza[k])).fold(f64::INFINITY, f64::min).min(1.0);
        let mut xz_aff = 0.0;
        for k in 0..nb {
            let mut xa = x[k].clone();
            xa.axpy(ap, &dxa[k]);
            let mut za = z[k].clone();
            za.axpy(ad, &dza[k]);
            xz_aff += xa.dot(&za);
        }
        let mu_aff = xz_aff / deg;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let rc: Vec<BlockMat> = (0..nb)
            .map(|k| {
                let mut r = sc[k].lam_sq_neg(sigma * mu);
                r.axpy(-1.0, &sc[k].second_order(&dxa[k], &dza[k]));
                r
            })
            .collect();
        let Some((dx, dy, dz)) = direction(&rc) else { break };
        let tau = if merit < 1e-6 { 0.995 } else { 0.98 };
        let ap = (tau * (0..nb).map(|k| max_step(&x[k], &dx[k])).fold(f64::INFINITY, f64::min)).min(1.0);
        let ad = (tau * (0..nb).map(|k| max_step(&z[k], &dz[k])).fold(f64::INFINITY, f64::min)).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stall += 1;
            if stall > 3 {
                break;
            }
        } else {
            stall = 0;
        }
        for k in 0..nb {
            x[k].axpy(ap, &dx[k]);
            z[k].axpy(ad, &dz[k]);
            if let BlockMat::Psd(mm) = &mut x[k] {
                *mm = (&*mm + mm.transpose()) * 0.5;
            }
            if let BlockMat::Psd(mm) = &mut z[k] {
                *mm = (&*mm + mm.transpose()) * 0.5;
            }
        }
        y += dy * ad;
    }

    let (merit, bx, by, bp, brp, brd) = best.expect("at least one iterate");
    if status == Status::MaxIter && merit <= CONTRACT_TOL {
        status = Status::Optimal;
    }
    let (x, y, pobj, rp, rd) = if matches!(status, Status::Infeasible | Status::Unbounded) {
        let pobj: f64 = p.c.iter().zip(&x).map(|(c, xb)| c.dot(xb)).sum();
        (x, y, pobj, f64::NAN, f64::NAN)
    } else {
        (bx, by, bp, brp, brd)
    };
    IpmResult { status, x, y, pobj, iterations: iterations + 1, rp, rd }
}

// ---------------------------------------------------------------------------
// Linear programs
// ---------------------------------------------------------------------------

/// `minimize cᵀx` subject to `a x ≥ b` (rows) and `e x = f`.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub c: Vec<f64>,
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    pub value: f64,
    pub x: Vec<f64>,
    /// Multipliers of the inequality rows.
    pub duals: Vec<f64>,
    /// Whether the point was snapped to an exact vertex.
    pub vertex: bool,
}

impl Lp {
    pub fn new(n: usize) -> Self {
        Self { c: vec![0.0; n], ineq: Vec::new(), eq: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn ge(&mut self, a: Vec<f64>, b: f64) {
        self.ineq.push((a, b));
    }

    pub fn le(&mut self, a: Vec<f64>, b: f64) {
        self.ineq.push((a.iter().map(|v| -v).collect(), -b));
    }

    pub fn equal(&mut self, a: Vec<f64>, b: f64) {
        self.eq.push((a, b));
    }

    fn slack(&self, x: &[f64]) -> Vec<f64> {
        self.ineq.iter().map(|(a, b)| dotv(a, x) - b).collect()
    }

    pub fn solve(&self) -> LpSolution {
        let n = self.n();
        let mut sdp = Sdp::new(n);
        for (i, v) in self.c.iter().enumerate() {
            sdp.set_objective(i, *v);
        }
        for (a, b) in &self.ineq {
            let terms = a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect();
            sdp.add_row(-b, terms);
        }
        for (a, b) in &self.eq {
            let terms = a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect();
            sdp.add_eq(terms, *b);
        }
        let sol = sdp.solve_with(&SolverOptions { max_iter: MAX_ITER, tol: 1e-11 });
        let mut out = LpSolution {
            status: sol.status,
            value: sol.primal_value,
            x: sol.y.clone(),
            duals: sol.row_duals.clone(),
            vertex: false,
        };
        if sol.status == Status::Optimal {
            if let Some(v) = self.polish(&sol.y) {
                let val = dotv(&self.c, &v);
                let scale = 1.0 + val.abs();
                if val <= out.value + 1e-8 * scale {
                    out.value = val;
                    out.x = v;
                    out.vertex = true;
                }
            }
        }
        out
    }

    /// Snaps an approximate optimum to the vertex of its tightest rows.
    fn polish(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.n();
        let slack = self.slack(x);
        let mut order: Vec<usize> = (0..slack.len()).collect();
        order.sort_by(|&a, &b| slack[a].abs().total_cmp(&slack[b].abs()));
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let mut q: Vec<RVec> = Vec::new();
        let mut push = |a: &Vec<f64>, b: f64, rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>| -> bool {
            let mut v = RVec::from_column_slice(a);
            let nrm0 = v.norm();
            if nrm0 == 0.0 {
                return false;
            }
            for u in &q {
                let d = u.dot(&v);
                v -= u * d;
            }
            let nrm = v.norm();
            if nrm > 1e-9 * nrm0 {
                q.push(v / nrm);
                rows.push(a.clone());
                rhs.push(b);
                true
            } else {
                false
            }
        };
        for (a, b) in &self.eq {
            push(a, *b, &mut rows, &mut rhs);
        }
        let tol = 1e-6 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for &i in &order {
            if rows.len() == n {
                break;
            }
            if slack[i].abs() > tol {
                break;
            }
            let (a, b) = &self.ineq[i];
            push(a, *b, &mut rows, &mut rhs);
        }
        if rows.len() < n {
            return None;
        }
        let mat = RMat::from_fn(n, n, |i, j| rows[i][j]);
        let v = mat.lu().solve(&RVec::from_vec(rhs))?;
        let v: Vec<f64> = v.iter().copied().collect();
        let worst = self.slack(&v).into_iter().fold(0.0f64, |m, s| m.min(s));
        let eqerr = self.eq.iter().map(|(a, b)| (dotv(a, &v) - b).abs()).fold(0.0, f64::max);
        let scale = 1.0 + v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        (worst >= -1e-11 * scale && eqerr <= 1e-11 * scale).then_some(v)
    }
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve_lp(lp: &Lp) -> LpSolution {
    lp.solve()
}

pub fn solve_sdp(p: &Sdp) -> SdpSolution {
    p.solve()
}

// ---------------------------------------------------------------------------
// See-saw
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SeesawResult<A, B> {
    pub value: f64,
    pub a: A,
    pub b: B,
    /// Best value after each round; nondecreasing.
    pub history: Vec<f64>,
}

/// Alternating maximization of `f(a, b)`: `best_b(a)` and `best_a(b)` each
/// return an optimal partner and the attained value.
pub fn seesaw<A: Clone, B: Clone>(
    init: A,
    best_b: impl Fn(&A) -> (f64, B),
    best_a: impl Fn(&B) -> (f64, A),
    rounds: usize,
    tol: f64,
) -> SeesawResult<A, B> {
    let mut a = init;
    let (mut value, mut b) = best_b(&a);
    let mut history = vec![value];
    for _ in 0..rounds {
        let start = value;
        let (va, na) = best_a(&b);
        if va >= value {
            a = na;
            value = va;
        }
        let (vb, nb) = best_b(&a);
        if vb >= value {
            b = nb;
            value = vb;
        }
        history.push(value);
        if value - start <= tol * (1.0 + value.abs()) {
            break;
        }
    }
    SeesawResult { value, a, b, history }
}

/// Runs [`seesaw`] from `starts` seeded initial points and keeps the best;
/// ties go to the lowest start index.
pub fn seesaw_multistart<A: Clone + Send, B: Clone + Send>(
    starts: usize,
    seed: u64,
    init: impl Fn(&mut Rng) -> A + Sync,
    best_b: impl Fn(&A) -> (f64, B) + Sync,
    best_a: impl Fn(&B) -> (f64, A) + Sync,
    rounds: usize,
    tol: f64,
) -> SeesawResult<A, B> {
    let runs: Vec<SeesawResult<A, B>> = (0..starts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = Rng::seed(derive_seed(seed, k as u64));
            seesaw(init(&mut rng), &best_b, &best_a, rounds, tol)
        })
        .collect();
    runs.into_iter().reduce(|best, r| if r.value > best.value { r } else { best }).expect("nonempty")
}

// ---------------------------------------------------------------------------
// Pure-state search
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub starts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { starts: 100, max_iter: 500, grad_tol: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Objective at `x`; a valid lower bound for the supremum.
    pub value: f64,
    pub x: DVector<C64>,
    pub grad_norm: f64,
}

fn normalize(v: &DVector<C64>) -> DVector<C64> {
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn tangent(x: &DVector<C64>, g: &DVector<C64>) -> DVector<C64> {
    let d = x.dotc(g).re;
    g - x * C64::new(d, 0.0)
}

/// Projected gradient ascent on the unit sphere from `x0`. `f` returns the
/// value and the ascent gradient `2 ∂f/∂x̄`.
pub fn sphere_ascent<F>(x0: &DVector<C64>, f: &F, max_iter: usize, grad_tol: f64) -> SearchResult
where
    F: Fn(&DVector<C64>) -> (f64, DVector<C64>),
{
    let mut x = normalize(x0);
    let (mut val, mut g) = f(&x);
    let mut t = 0.5;
    let mut gn = tangent(&x, &g).norm();
    for _ in 0..max_iter {
        let p = tangent(&x, &g);
        gn = p.norm();
        if gn <= grad_tol {
            break;
        }
        let step = |t: f64| {
            let cand = normalize(&(&x + &p * C64::new(t, 0.0)));
            let (cv, cg) = f(&cand);
            (cv, cg, cand)
        };
        let mut found = None;
        for _ in 0..60 {
            let (cv, cg, cand) = step(t);
            if cv > val + 1e-4 * t * gn * gn {
                found = Some((cv, cg, cand));
                break;
            }
            t *= 0.5;
        }
        let Some(mut best) = found else { break };
        // keep shrinking while it pays; overshooting steps reflect instead of converging
        for _ in 0..60 {
            let (cv, cg, cand) = step(0.5 * t);
            if cv > best.0 {
                best = (cv, cg, cand);
                t *= 0.5;
            } else {
                break;
            }
        }
        val = best.0;
        g = best.1;
        x = best.2;
        t *= 2.0;
    }
    SearchResult { value: val, x, grad_norm: gn }
}

/// Multi-start search for `sup f` over unit vectors of `C^dim`. Extra
/// `seeds_in` vectors are tried before random starts.
pub fn pure_state_search<F>(dim: usize, opts: &SearchOptions, seeds_in: &[DVector<C64>], f: F) -> SearchResult
where
    F: Fn(&DVector<C64>) -> (f64, DVector<C64>) + Sync,
{
    let mut starts: Vec<DVector<C64>> = seeds_in.to_vec();
    let mut rng = Rng::seed(opts.seed);
    for _ in 0..opts.starts {
        starts.push(rng.unit_vector(dim));
    }
    let runs: Vec<SearchResult> =
        starts.par_iter().map(|x0| sphere_ascent(x0, &f, opts.max_iter, opts.grad_tol)).collect();
    runs.into_iter().reduce(|b, r| if r.value > b.value { r } else { b }).expect("at least one start")
}

// ---------------------------------------------------------------------------
// Affine Hermitian expressions
// ---------------------------------------------------------------------------

/// Hermitian matrix variable supported on a block pattern, expanded in the
/// orthonormal Hermitian basis of that pattern.
#[derive(Clone, Debug)]
pub struct HermVar {
    pub vars: Vec<usize>,
    pub basis: Vec<CMat>,
}

impl HermVar {
    pub fn new(sdp: &mut Sdp, alg: &crate::matops::BlockAlgebra) -> Self {
        let basis = alg.hermitian_basis();
        let vars = basis.iter().map(|_| sdp.add_var()).collect();
        Self { vars, basis }
    }

    pub fn value(&self, y: &[f64]) -> CMat {
        let n = self.basis[0].nrows();
        let mut m = CMat::zeros(n, n);
        for (v, b) in self.vars.iter().zip(&self.basis) {
            m += b * C64::new(y[*v], 0.0);
        }
        m
    }

    /// `t · f(Y)` as an affine expression, for a real-linear `f`.
    pub fn image(&self, t: f64, f: impl Fn(&CMat) -> CMat) -> Affine {
        let terms: Vec<(usize, CMat)> =
            self.vars.iter().zip(&self.basis).map(|(v, b)| (*v, f(b) * C64::new(t, 0.0))).collect();
        let n = terms.first().map(|t| t.1.nrows()).unwrap_or(0);
        Affine { constant: CMat::zeros(n, n), terms }
    }

    /// Objective `Σ w_k y_k` with `w_k = ⟨basis_k, c⟩`.
    pub fn objective_dot(&self, sdp: &mut Sdp, c: &CMat, scale: f64) {
        for (v, b) in self.vars.iter().zip(&self.basis) {
            let w = crate::matops::linalg::hs(b, c) * scale;
            let cur = sdp.objective()[*v];
            sdp.set_objective(*v, cur + w);
        }
    }
}

/// `constant + Σ y_v · term_v` over Hermitian matrices.
#[derive(Clone, Debug)]
pub struct Affine {
    pub constant: CMat,
    pub terms: Vec<(usize, CMat)>,
}

impl Affine {
    pub fn constant(m: CMat) -> Self {
        Self { constant: m, terms: Vec::new() }
    }

    pub fn scalar(n: usize, var: usize, coef: &CMat) -> Self {
        Self { constant: CMat::zeros(n, n), terms: vec![(var, coef.clone())] }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn plus(mut self, other: Affine) -> Self {
        if self.constant.nrows() == 0 {
            return other;
        }
        self.constant += &other.constant;
        self.terms.extend(other.terms);
        self
    }

    pub fn plus_const(mut self, m: &CMat) -> Self {
        self.constant += m;
        self
    }

    pub fn scaled(mut self, t: f64) -> Self {
        let z = C64::new(t, 0.0);
        self.constant *= z;
        for (_, m) in &mut self.terms {
            *m *= z;
        }
        self
    }

    /// Applies a real-linear map to every coefficient.
    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self { constant: f(&self.constant), terms: self.terms.iter().map(|(v, m)| (*v, f(m))).collect() }
    }

    pub fn value(&self, y: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for (v, t) in &self.terms {
            m += t * C64::new(y[*v], 0.0);
        }
        m
    }

    /// Adds `self ⪰ 0` as a block.
    pub fn psd(&self, sdp: &mut Sdp) -> BlockId {
        let b = sdp.add_block(self.dim(), &self.constant);
        for (v, t) in &self.terms {
            sdp.add_term(b, *v, t);
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::linalg::*;

    #[test]
    fn operator_norm_as_sdp() {
        // min λ s.t. λI − diag(3,1) ⪰ 0
        let mut p = Sdp::new(1);
        p.set_objective(0, 1.0);
        let b = p.add_block(2, &(-from_real_diag(&[3.0, 1.0])));
        p.add_term(b, 0, &eye(2));
        let s = p.solve();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - 3.0).abs() < 1e-7, "{}", s.primal_value);
        assert!(s.primal_value >= s.dual_value - 1e-9);
    }

    #[test]
    fn trace_norm_as_sdp() {
        // min Tr X s.t. X ⪰ ±diag(1,−1), X real symmetric 2×2 parametrized
        let basis = crate::matops::BlockAlgebra::full(2).hermitian_basis();
        let mut p = Sdp::new(basis.len());
        for (i, e) in basis.iter().enumerate() {
            p.set_objective(i, e.trace().re);
        }
        let a = from_real_diag(&[1.0, -1.0]);
        for s in [1.0, -1.0] {
            let b = p.add_block(2, &(&a * c(-s)));
            for (i, e) in basis.iter().enumerate() {
                p.add_term(b, i, e);
            }
        }
        let s = p.solve();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn random_operator_norm_sdps_match_eigenvalues() {
        let mut rng = Rng::seed(5);
        for n in 2..5 {
            let h = rng.hermitian(n);
            let mut p = Sdp::new(1);
            p.set_objective(0, 1.0);
            let b = p.add_block(n, &(-h.mat().clone()));
            p.add_term(b, 0, &eye(n));
            let b2 = p.add_block(n, h.mat());
            p.add_term(b2, 0, &eye(n));
            let s = p.solve();
            assert!((s.primal_value - h.op_norm()).abs() < 1e-7 * (1.0 + h.op_norm()));
            // certificate: the multipliers are PSD with total trace one
            let t: f64 = s.block_duals.iter().map(|x| x.trace().re).sum();
            assert!((t - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn equality_constraints_are_eliminated() {
        // min x + y s.t. x = 2, y ≥ −1
        let mut p = Sdp::new(2);
        p.set_objective(0, 1.0);
        p.set_objective(1, 1.0);
        p.add_eq(vec![(0, 1.0)], 2.0);
        p.add_row(1.0, vec![(1, 1.0)]);
        let s = p.solve();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - 1.0).abs() < 1e-8);
        assert!((s.y[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_lmi_is_detected() {
        // y ≥ 1 and −y ≥ 0
        let mut p = Sdp::new(1);
        p.set_objective(0, 1.0);
        p.add_row(-1.0, vec![(0, 1.0)]);
        p.add_row(0.0, vec![(0, -1.0)]);
        let s = p.solve();
        assert_ne!(s.status, Status::Optimal);
    }

    #[test]
    fn lp_norms() {
        // ℓ∞ of (1, −2): min t, −t ≤ x_i ≤ t
        let x = [1.0, -2.0];
        let mut lp = Lp::new(1);
        lp.c[0] = 1.0;
        for v in x {
            lp.ge(vec![1.0], v);
            lp.ge(vec![1.0], -v);
        }
        let s = lp.solve();
        assert!((s.value - 2.0).abs() < 1e-12);
        // ℓ1: min Σ t_i, t_i ≥ ±x_i
        let mut lp = Lp::new(2);
        lp.c = vec![1.0, 1.0];
        for (i, v) in x.iter().enumerate() {
            let mut a = vec![0.0; 2];
            a[i] = 1.0;
            lp.ge(a.clone(), *v);
            lp.ge(a, -*v);
        }
        let s = lp.solve();
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!(s.vertex);
    }

    fn brute_force_lp(lp: &Lp) -> f64 {
        // all n-subsets of rows
        let n = lp.n();
        let m = lp.ineq.len();
        let mut best = f64::INFINITY;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let mat = RMat::from_fn(n, n, |i, j| lp.ineq[idx[i]].0[j]);
            let rhs = RVec::from_fn(n, |i, _| lp.ineq[idx[i]].1);
            if mat.determinant().abs() > 1e-10 {
                if let Some(v) = mat.lu().solve(&rhs) {
                    let v: Vec<f64> = v.iter().copied().collect();
                    if lp.slack(&v).iter().all(|s| *s >= -1e-10) {
                        best = best.min(dotv(&lp.c, &v));
                    }
                }
            }
            // next combination
            let mut k = n;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if idx[k] < m - n + k {
                    idx[k] += 1;
                    for l in k + 1..n {
                        idx[l] = idx[l - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = Rng::seed(11);
        for _ in 0..20 {
            let n = 2 + rng.index(3);
            let mut lp = Lp::new(n);
            lp.c = (0..n).map(|_| rng.normal()).collect();
            // bounded box plus random cuts through a neighbourhood of 0
            for i in 0..n {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                lp.ge(a.clone(), -3.0);
                a[i] = -1.0;
                lp.ge(a, -3.0);
            }
            for _ in 0..4 {
                let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
                lp.ge(a, -1.0 - rng.uniform());
            }
            let s = lp.solve();
            let oracle = brute_force_lp(&lp);
            assert!((s.value - oracle).abs() < 1e-9, "{} vs {}", s.value, oracle);
        }
    }

    #[test]
    fn pure_state_search_finds_top_eigenvalue() {
        let h = from_real_diag(&[5.0, 1.0]);
        let f = |x: &DVector<C64>| {
            let hx = &h * x;
            (x.dotc(&hx).re, hx * c(2.0))
        };
        let r = pure_state_search(2, &SearchOptions { starts: 10, ..Default::default() }, &[], f);
        assert!((r.value - 5.0).abs() < 1e-10, "{} {}", r.value, r.grad_norm);

        let mut rng = Rng::seed(3);
        for _ in 0..5 {
            let h = rng.hermitian(4);
            let hm = h.mat().clone();
            let f = |x: &DVector<C64>| {
                let hx = &hm * x;
                (x.dotc(&hx).re, hx * c(2.0))
            };
            let r = pure_state_search(4, &SearchOptions { starts: 20, seed: 9, ..Default::default() }, &[], f);
            assert!((r.value - max_eig(h.mat())).abs() < 1e-8);
        }

        let r = pure_state_search(3, &SearchOptions { starts: 3, ..Default::default() }, &[], |x| {
            (7.0, DVector::zeros(x.len()))
        });
        assert_eq!(r.value, 7.0);
    }

    #[test]
    fn seesaw_on_concave_convex_toy() {
        // f(a, b) = −(a − 1)² − (b − a)² + 3 maximized over a, b ∈ ℝ; optimum 3 at a = b = 1
        let f = |a: f64, b: f64| -(a - 1.0).powi(2) - (b - a).powi(2) + 3.0;
        let best_b = |a: &f64| (f(*a, *a), *a);
        let best_a = |b: &f64| {
            let a = (1.0 + b) / 2.0;
            (f(a, *b), a)
        };
        let r = seesaw(-4.0, best_b, best_a, 200, 0.0);
        assert!((r.value - 3.0).abs() < 1e-6);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        // constant objective settles after one round
        let r = seesaw(0.0, |_: &f64| (2.0, 0.0), |_: &f64| (2.0, 0.0), 10, 0.0);
        assert_eq!(r.value, 2.0);
        assert!(r.history.len() <= 2);
    }
}
