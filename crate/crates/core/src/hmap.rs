//! Hermitian maps between block algebras in Choi representation.
//!
//! `C(φ) = Σ_ij φ(|i><j|) ⊗ |i><j|` lives on `out ⊗ in` (unnormalized
//! `X_H`). A map `A → B` is stored as its embedding `E_B ∘ φ ∘ E_A`, so the
//! Choi matrix is supported on the pattern of `out_alg ⊗ in_alg`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matops::linalg::*;
use crate::matops::{BlockAlgebra, CMat, HermitianOperator, Povm, State, C64, ZERO};

/// Trace-preservation tolerance.
pub const TP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMap {
    in_alg: BlockAlgebra,
    out_alg: BlockAlgebra,
    choi: HermitianOperator,
}

impl HermitianMap {
    /// Validating constructor: `choi` must be Hermitian and respect the
    /// pattern of `out_alg ⊗ in_alg`.
    pub fn from_choi(in_alg: &BlockAlgebra, out_alg: &BlockAlgebra, choi: CMat) -> Result<Self> {
        let alg = out_alg.tensor(in_alg);
        let choi = HermitianOperator::new(choi, alg)?;
        Ok(Self { in_alg: in_alg.clone(), out_alg: out_alg.clone(), choi })
    }

    /// Hermitian part projected onto the admissible pattern.
    pub fn from_choi_projected(in_alg: &BlockAlgebra, out_alg: &BlockAlgebra, choi: &CMat) -> Self {
        let alg = out_alg.tensor(in_alg);
        Self {
            in_alg: in_alg.clone(),
            out_alg: out_alg.clone(),
            choi: HermitianOperator::project_into(choi, alg),
        }
    }

    /// Builds `E_B ∘ f ∘ E_A` from its action on matrix units of `in_alg`.
    pub fn from_fn(in_alg: &BlockAlgebra, out_alg: &BlockAlgebra, f: impl Fn(&CMat) -> CMat) -> Self {
        let (di, dout) = (in_alg.ambient_dim(), out_alg.ambient_dim());
        let mut choi = CMat::zeros(dout * di, dout * di);
        for (i, j) in in_alg.matrix_units() {
            let y = f(&unit(di, i, j));
            for o in 0..dout {
                for p in 0..dout {
                    choi[(o * di + i, p * di + j)] = y[(o, p)];
                }
            }
        }
        Self::from_choi_projected(in_alg, out_alg, &choi)
    }

    pub fn from_kraus(kraus: &[CMat], in_alg: &BlockAlgebra, out_alg: &BlockAlgebra) -> Result<Self> {
        let (di, dout) = (in_alg.ambient_dim(), out_alg.ambient_dim());
        let mut choi = CMat::zeros(dout * di, dout * di);
        for k in kraus {
            check_dim(dout, k.nrows())?;
            check_dim(di, k.ncols())?;
            let v = nalgebra::DVector::from_fn(dout * di, |r, _| k[(r / di, r % di)]);
            choi += &v * v.adjoint();
        }
        Ok(Self::from_choi_projected(in_alg, out_alg, &choi))
    }

    pub fn identity(alg: &BlockAlgebra) -> Self {
        Self::from_fn(alg, alg, |a| a.clone())
    }

    pub fn zero(in_alg: &BlockAlgebra, out_alg: &BlockAlgebra) -> Self {
        let n = in_alg.ambient_dim() * out_alg.ambient_dim();
        Self::from_choi_projected(in_alg, out_alg, &CMat::zeros(n, n))
    }

    /// Transpose map `a ↦ aᵀ` on `B(C^d)`.
    pub fn transpose(d: usize) -> Self {
        let alg = BlockAlgebra::full(d);
        Self::from_fn(&alg, &alg, |a| a.transpose())
    }

    /// `Φ_{I,σ}: a ↦ (Tr a) σ`.
    pub fn replacer(in_alg: &BlockAlgebra, sigma: &HermitianOperator) -> Self {
        let s = sigma.mat().clone();
        Self::from_fn(in_alg, sigma.algebra(), move |a| &s * a.trace())
    }

    /// `τ: a ↦ (Tr a) I`.
    pub fn tau(in_alg: &BlockAlgebra, out_alg: &BlockAlgebra) -> Self {
        Self::replacer(in_alg, &HermitianOperator::identity(out_alg))
    }

    /// `a ↦ U a U†`.
    pub fn unitary(u: &CMat) -> Self {
        let alg = BlockAlgebra::full(u.nrows());
        Self::from_kraus(std::slice::from_ref(u), &alg, &alg).expect("square unitary")
    }

    /// `a ↦ (1 − p) a + p (Tr a) I/d`.
    pub fn depolarizing(d: usize, p: f64) -> Self {
        let alg = BlockAlgebra::full(d);
        let id = Self::identity(&alg);
        let mix = Self::tau(&alg, &alg);
        &(&id * (1.0 - p)) + &(&mix * (p / d as f64))
    }

    pub fn in_alg(&self) -> &BlockAlgebra {
        &self.in_alg
    }

    pub fn out_alg(&self) -> &BlockAlgebra {
        &self.out_alg
    }

    pub fn d_in(&self) -> usize {
        self.in_alg.ambient_dim()
    }

    pub fn d_out(&self) -> usize {
        self.out_alg.ambient_dim()
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    pub fn choi_mat(&self) -> &CMat {
        self.choi.mat()
    }

    /// Same Choi matrix reinterpreted between other algebras.
    pub fn with_algebras(&self, in_alg: &BlockAlgebra, out_alg: &BlockAlgebra) -> Result<Self> {
        Self::from_choi(in_alg, out_alg, self.choi_mat().clone())
    }

    /// Linear extension to arbitrary square matrices on the input space.
    pub fn apply_mat(&self, a: &CMat) -> CMat {
        let (di, dout) = (self.d_in(), self.d_out());
        let c = self.choi_mat();
        let mut out = CMat::zeros(dout, dout);
        for (i, j) in self.in_alg.matrix_units() {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for o in 0..dout {
                for p in 0..dout {
                    out[(o, p)] += c[(o * di + i, p * di + j)] * aij;
                }
            }
        }
        out
    }

    pub fn apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.algebra() != &self.in_alg {
            if a.dim() != self.d_in() || self.in_alg.project(a.mat()) != *a.mat() {
                return Err(Error::AlgebraMismatch("input operator outside the map's input algebra".into()));
            }
        }
        Ok(HermitianOperator::project_into(&self.apply_mat(a.mat()), self.out_alg.clone()))
    }

    /// `φ(|i><j|)`, read off the Choi matrix.
    pub fn image_of_unit(&self, i: usize, j: usize) -> CMat {
        let (di, dout) = (self.d_in(), self.d_out());
        let c = self.choi_mat();
        CMat::from_fn(dout, dout, |o, p| c[(o * di + i, p * di + j)])
    }

    /// Adjoint with respect to `Tr a φ*(b) = Tr φ(a) b`.
    pub fn adjoint(&self) -> Self {
        let out = adjoint_choi(self.choi_mat(), self.d_in(), self.d_out());
        Self::from_choi_projected(&self.out_alg, &self.in_alg, &out)
    }

    /// `Tr_out C(φ) − I`, the Choi-level trace defect.
    fn tp_defect_matrix(&self) -> CMat {
        let t = ptrace_first(self.choi_mat(), self.d_out(), self.d_in());
        self.in_alg.project(&(t - eye(self.d_in())))
    }

    pub fn is_trace_preserving(&self) -> (bool, f64) {
        let d = max_abs(&self.tp_defect_matrix());
        (d <= TP_TOL, d)
    }

    /// `Σ_k t_k φ_k` over maps with matching algebras.
    pub fn linear_combination(terms: &[(f64, &HermitianMap)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| Error::Invalid("empty combination".into()))?;
        let mut acc = CMat::zeros(first.choi.dim(), first.choi.dim());
        for (t, m) in terms {
            if m.in_alg != first.in_alg || m.out_alg != first.out_alg {
                return Err(Error::AlgebraMismatch("combination of maps between different algebras".into()));
            }
            acc += m.choi_mat() * c(*t);
        }
        Ok(Self::from_choi_projected(&first.in_alg, &first.out_alg, &acc))
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { in_alg: self.in_alg.clone(), out_alg: self.out_alg.clone(), choi: self.choi.scale(t) }
    }
}

impl Add for &HermitianMap {
    type Output = HermitianMap;
    fn add(self, rhs: Self) -> HermitianMap {
        HermitianMap::linear_combination(&[(1.0, self), (1.0, rhs)]).expect("matching algebras")
    }
}

impl Sub for &HermitianMap {
    type Output = HermitianMap;
    fn sub(self, rhs: Self) -> HermitianMap {
        HermitianMap::linear_combination(&[(1.0, self), (-1.0, rhs)]).expect("matching algebras")
    }
}

impl Mul<f64> for &HermitianMap {
    type Output = HermitianMap;
    fn mul(self, t: f64) -> HermitianMap {
        self.scale(t)
    }
}

pub fn apply(m: &HermitianMap, a: &HermitianOperator) -> Result<HermitianOperator> {
    m.apply(a)
}

/// `m2 ∘ m1`, obtained by pushing the output blocks of `C(m1)` through `m2`.
pub fn compose(m2: &HermitianMap, m1: &HermitianMap) -> Result<HermitianMap> {
    if m1.d_out() != m2.d_in() {
        return Err(Error::AlgebraMismatch(format!(
            "cannot compose: inner output dim {} vs outer input dim {}",
            m1.d_out(),
            m2.d_in()
        )));
    }
    if m1.out_alg != m2.in_alg {
        return Err(Error::AlgebraMismatch("inner output algebra differs from outer input algebra".into()));
    }
    let m2c = m2.clone();
    let m1c = m1.clone();
    Ok(HermitianMap::from_fn(&m1.in_alg, &m2.out_alg, move |a| m2c.apply_mat(&m1c.apply_mat(a))))
}

/// Choi matrix of `φ*` from that of `φ`: an index permutation,
/// `C*[(j,p),(i,o)] = C[(o,i),(p,j)]`.
pub fn adjoint_choi(c: &CMat, d_in: usize, d_out: usize) -> CMat {
    let n = d_in * d_out;
    let mut out = CMat::zeros(n, n);
    for o in 0..d_out {
        for i in 0..d_in {
            for p in 0..d_out {
                for j in 0..d_in {
                    out[(j * d_out + p, i * d_out + o)] = c[(o * d_in + i, p * d_in + j)];
                }
            }
        }
    }
    out
}

pub fn adjoint(m: &HermitianMap) -> HermitianMap {
    m.adjoint()
}

/// `s(φ) = Σ_ij <i|φ(|i><j|)|j> = Tr C(φ) X_H`.
pub fn s_functional(m: &HermitianMap) -> Result<f64> {
    if m.d_in() != m.d_out() {
        return Err(Error::Invalid("s is defined for maps with equal input and output dimension".into()));
    }
    let d = m.d_in();
    let c = m.choi_mat();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += c[(i * d + i, j * d + j)].re;
        }
    }
    Ok(s)
}

/// `<φ, ψ> = Tr C(φ) C(ψ*)` for `φ: A → B`, `ψ: B → A`.
pub fn pairing(phi: &HermitianMap, psi: &HermitianMap) -> Result<f64> {
    if phi.d_in() != psi.d_out() || phi.d_out() != psi.d_in() {
        return Err(Error::AlgebraMismatch("pairing requires ψ: B → A for φ: A → B".into()));
    }
    let psi_star = psi.adjoint();
    Ok(hs(phi.choi_mat(), psi_star.choi_mat()))
}

fn common_algebra(ops: &[HermitianOperator]) -> Result<BlockAlgebra> {
    let first = ops.first().ok_or_else(|| Error::Invalid("empty operator list".into()))?;
    let alg = first.algebra().clone();
    if ops.iter().any(|o| o.algebra() != &alg) {
        return Err(Error::AlgebraMismatch("operators must share an algebra".into()));
    }
    Ok(alg)
}

/// `Φ^cq_B: a ↦ Σ_i <i|a|i> B_i`, from `D_n`.
pub fn make_cq(b: &[HermitianOperator]) -> Result<HermitianMap> {
    let out = common_algebra(b)?;
    let n = b.len();
    let dout = out.ambient_dim();
    let mut choi = CMat::zeros(dout * n, dout * n);
    for (i, bi) in b.iter().enumerate() {
        choi += kron(bi.mat(), &unit(n, i, i));
    }
    Ok(HermitianMap::from_choi_projected(&BlockAlgebra::diagonal(n), &out, &choi))
}

/// `Φ^qc_A: b ↦ Σ_i Tr(A_i b) |i><i|`, into `D_m`.
pub fn make_qc(a: &[HermitianOperator]) -> Result<HermitianMap> {
    let inp = common_algebra(a)?;
    let m = a.len();
    let di = inp.ambient_dim();
    let mut choi = CMat::zeros(m * di, m * di);
    for (i, ai) in a.iter().enumerate() {
        choi += kron(&unit(m, i, i), &ai.mat().transpose());
    }
    Ok(HermitianMap::from_choi_projected(&inp, &BlockAlgebra::diagonal(m), &choi))
}

/// `Φ_{F,E}: a ↦ Σ_i E_i Tr(F_i a)`.
pub fn make_fe(f: &[HermitianOperator], e: &[HermitianOperator]) -> Result<HermitianMap> {
    if f.len() != e.len() {
        return Err(Error::Invalid(format!("length mismatch: {} effects, {} outputs", f.len(), e.len())));
    }
    let inp = common_algebra(f)?;
    let out = common_algebra(e)?;
    let (di, dout) = (inp.ambient_dim(), out.ambient_dim());
    let mut choi = CMat::zeros(dout * di, dout * di);
    for (fi, ei) in f.iter().zip(e) {
        choi += kron(ei.mat(), &fi.mat().transpose());
    }
    Ok(HermitianMap::from_choi_projected(&inp, &out, &choi))
}

/// Rearranges `Φ_{F,E}` so the effects form a POVM: `t = ‖Σ F_i‖`,
/// `F'_i = F_i / t`, `F'_{k+1} = I − Σ F'_i`, `E'_i = t E_i`, `E'_{k+1} = 0`.
pub fn normalize_eb(f: &[HermitianOperator], e: &[HermitianOperator]) -> Result<(Povm, Vec<HermitianOperator>)> {
    if f.len() != e.len() {
        return Err(Error::Invalid("length mismatch".into()));
    }
    let inp = common_algebra(f)?;
    let out = common_algebra(e)?;
    for fi in f {
        let m = fi.min_eig();
        if m < -crate::matops::TOL_STATE {
            return Err(Error::NotPsd(m));
        }
    }
    let mut sum = zeros(inp.ambient_dim());
    for fi in f {
        sum += fi.mat();
    }
    let t = op_norm(&sum);
    if t == 0.0 {
        return Err(Error::Invalid("all effects vanish".into()));
    }
    let mut fp: Vec<HermitianOperator> = f.iter().map(|x| x.scale(1.0 / t)).collect();
    let rest = eye(inp.ambient_dim()) - sum * c(1.0 / t);
    fp.push(HermitianOperator::project_into(&rest, inp.clone()));
    let mut ep: Vec<HermitianOperator> = e.iter().map(|x| x.scale(t)).collect();
    ep.push(HermitianOperator::zero(&out));
    let povm = Povm::new(fp)?;
    Ok((povm, ep))
}

pub fn is_trace_preserving(m: &HermitianMap) -> (bool, f64) {
    m.is_trace_preserving()
}

/// `m1 ⊗ m2` with Choi on `(B1⊗B2) ⊗ (A1⊗A2)`.
pub fn tensor_map(m1: &HermitianMap, m2: &HermitianMap) -> HermitianMap {
    let (a1, b1, a2, b2) = (m1.d_in(), m1.d_out(), m2.d_in(), m2.d_out());
    let c1 = m1.choi_mat();
    let c2 = m2.choi_mat();
    let n = a1 * b1 * a2 * b2;
    let mut out = CMat::zeros(n, n);
    let ia = a1 * a2;
    for o1 in 0..b1 {
        for i1 in 0..a1 {
            for p1 in 0..b1 {
                for j1 in 0..a1 {
                    let x = c1[(o1 * a1 + i1, p1 * a1 + j1)];
                    if x == ZERO {
                        continue;
                    }
                    for o2 in 0..b2 {
                        for i2 in 0..a2 {
                            for p2 in 0..b2 {
                                for j2 in 0..a2 {
                                    let y = c2[(o2 * a2 + i2, p2 * a2 + j2)];
                                    let r = (o1 * b2 + o2) * ia + i1 * a2 + i2;
                                    let s = (p1 * b2 + p2) * ia + j1 * a2 + j2;
                                    out[(r, s)] = x * y;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let in_alg = m1.in_alg.tensor(&m2.in_alg);
    let out_alg = m1.out_alg.tensor(&m2.out_alg);
    HermitianMap::from_choi_projected(&in_alg, &out_alg, &out)
}

/// Finite family of states over a common algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    states: Vec<State>,
}

impl Experiment {
    pub fn new(states: Vec<State>) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::Invalid("empty experiment".into()))?;
        let alg = first.op().algebra().clone();
        if states.iter().any(|s| s.op().algebra() != &alg) {
            return Err(Error::AlgebraMismatch("experiment states must share an algebra".into()));
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        self.states[0].op().algebra()
    }

    pub fn operators(&self) -> Vec<HermitianOperator> {
        self.states.iter().map(|s| s.op().clone()).collect()
    }

    /// The cq-channel `Φ^cq_E`.
    pub fn cq_channel(&self) -> HermitianMap {
        make_cq(&self.operators()).expect("nonempty common algebra")
    }

    /// `α(E)` for a channel `α`.
    pub fn map(&self, alpha: &HermitianMap) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| {
                let out = alpha.apply(s.op())?;
                State::new(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Experiment::new(states)
    }

    /// Experiment of products `ρ_i ⊗ σ_l`, index `i * |other| + l`.
    pub fn tensor(&self, other: &Experiment) -> Experiment {
        let mut out = Vec::new();
        for a in &self.states {
            for b in &other.states {
                out.push(State::new(crate::matops::tensor(a.op(), b.op())).expect("product of states"));
            }
        }
        Experiment { states: out }
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Complex entries as `[re, im]` pairs, row-major.
pub fn mat_to_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn pairs_to_mat(p: &[[f64; 2]]) -> Result<CMat> {
    let n = (p.len() as f64).sqrt().round() as usize;
    if n * n != p.len() || n == 0 {
        return Err(Error::Invalid(format!("{} entries do not form a square matrix", p.len())));
    }
    Ok(CMat::from_fn(n, n, |i, j| C64::new(p[i * n + j][0], p[i * n + j][1])))
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    in_blocks: Vec<usize>,
    out_blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_groups: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out_groups: Option<Vec<Vec<usize>>>,
    choi: Vec<[f64; 2]>,
}

fn alg_parts(a: &BlockAlgebra) -> (Vec<usize>, Option<Vec<Vec<usize>>>) {
    let v = serde_json::to_value(a).expect("algebra serializes");
    let groups = v.get("groups").map(|g| serde_json::from_value(g.clone()).expect("groups"));
    (a.blocks(), groups)
}

fn alg_from_parts(blocks: &[usize], groups: Option<Vec<Vec<usize>>>) -> Result<BlockAlgebra> {
    match groups {
        Some(g) => BlockAlgebra::from_groups(g),
        None => BlockAlgebra::from_blocks(blocks),
    }
}

impl Serialize for HermitianMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (in_blocks, in_groups) = alg_parts(&self.in_alg);
        let (out_blocks, out_groups) = alg_parts(&self.out_alg);
        MapRepr { in_blocks, out_blocks, in_groups, out_groups, choi: mat_to_pairs(self.choi_mat()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = MapRepr::deserialize(d)?;
        let in_alg = alg_from_parts(&r.in_blocks, r.in_groups).map_err(D::Error::custom)?;
        let out_alg = alg_from_parts(&r.out_blocks, r.out_groups).map_err(D::Error::custom)?;
        let m = pairs_to_mat(&r.choi).map_err(D::Error::custom)?;
        if m.nrows() != in_alg.ambient_dim() * out_alg.ambient_dim() {
            return Err(D::Error::custom("choi size does not match the algebras"));
        }
        HermitianMap::from_choi(&in_alg, &out_alg, m).map_err(D::Error::custom)
    }
}

/// Operator list as nested `[re, im]` matrices; shared by experiments and POVMs.
#[derive(Serialize, Deserialize)]
pub struct OperatorListRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    pub operators: Vec<Vec<[f64; 2]>>,
}

impl OperatorListRepr {
    pub fn from_ops(ops: &[HermitianOperator]) -> Self {
        let blocks = ops.first().map(|o| o.algebra().blocks()).filter(|b| b.len() > 1);
        Self { blocks, operators: ops.iter().map(|o| mat_to_pairs(o.mat())).collect() }
    }

    pub fn to_ops(&self) -> Result<Vec<HermitianOperator>> {
        self.operators
            .iter()
            .map(|p| {
                let m = pairs_to_mat(p)?;
                let alg = match &self.blocks {
                    Some(b) => BlockAlgebra::from_blocks(b)?,
                    None => BlockAlgebra::full(m.nrows()),
                };
                HermitianOperator::new(m, alg)
            })
            .collect()
    }
}

impl Serialize for Experiment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorListRepr::from_ops(&self.operators()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Experiment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = OperatorListRepr::deserialize(d)?;
        let ops = r.to_ops().map_err(D::Error::custom)?;
        let states = ops.into_iter().map(State::new).collect::<Result<Vec<_>>>().map_err(D::Error::custom)?;
        Experiment::new(states).map_err(D::Error::custom)
    }
}

impl Serialize for Povm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorListRepr::from_ops(self.effects()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = OperatorListRepr::deserialize(d)?;
        let ops = r.to_ops().map_err(D::Error::custom)?;
        Povm::new(ops).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Rng;

    fn basis_apply_err(m: &HermitianMap, f: impl Fn(&CMat) -> CMat) -> f64 {
        let d = m.d_in();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let e = unit(d, i, j);
                worst = worst.max(max_abs(&(m.apply_mat(&e) - f(&e))));
            }
        }
        worst
    }

    #[test]
    fn identity_and_replacer_act_as_expected() {
        let mut rng = Rng::seed(21);
        let alg = BlockAlgebra::full(3);
        let a = rng.hermitian(3);
        let id = HermitianMap::identity(&alg);
        assert!(max_abs(&(id.apply(&a).unwrap().mat() - a.mat())) < 1e-15);

        let mut d = a.mat().clone();
        let t = d.trace().re;
        d[(0, 0)] += c(3.0 - t);
        let a3 = HermitianOperator::full(&d);
        let out = HermitianMap::tau(&alg, &alg).apply(&a3).unwrap();
        assert!(max_abs(&(out.mat() - eye(3) * c(3.0))) < 1e-13);
    }

    #[test]
    fn channels_preserve_trace() {
        let mut rng = Rng::seed(22);
        let ch = rng.channel(2, 3);
        let rho = rng.state(2);
        let out = ch.apply(rho.op()).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-10);
        assert!(ch.is_trace_preserving().0);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut rng = Rng::seed(23);
        let m1 = rng.hermitian_map(2, 3);
        let m2 = rng.hermitian_map(3, 2);
        let comp = compose(&m2, &m1).unwrap();
        let err = basis_apply_err(&comp, |e| m2.apply_mat(&m1.apply_mat(e)));
        assert!(err < 1e-10, "{err}");
        let id = HermitianMap::identity(m1.out_alg());
        let same = compose(&id, &m1).unwrap();
        assert!(max_abs(&(same.choi_mat() - m1.choi_mat())) < 1e-14);
        assert!(compose(&m1, &m1).is_err());
    }

    #[test]
    fn cq_after_qc_is_fe_map() {
        let mut rng = Rng::seed(24);
        let b: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
        let f: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
        let comp = compose(&make_cq(&b).unwrap(), &make_qc(&f).unwrap()).unwrap();
        let direct = |a: &CMat| {
            let mut out = CMat::zeros(2, 2);
            for (bi, fi) in b.iter().zip(&f) {
                out += bi.mat() * (fi.mat() * a).trace();
            }
            out
        };
        assert!(basis_apply_err(&comp, direct) < 1e-10);
        let fe = make_fe(&f, &b).unwrap();
        assert!(max_abs(&(fe.choi_mat() - comp.choi_mat())) < 1e-10);
    }

    #[test]
    fn adjoint_pairing_identity() {
        let mut rng = Rng::seed(25);
        let m = rng.hermitian_map(3, 2);
        let ma = m.adjoint();
        for _ in 0..20 {
            let a = rng.hermitian(3);
            let b = rng.hermitian(2);
            let l = hs(a.mat(), &ma.apply_mat(b.mat()));
            let r = hs(&m.apply_mat(a.mat()), b.mat());
            assert!((l - r).abs() < 1e-9);
        }
        assert!(max_abs(&(ma.adjoint().choi_mat() - m.choi_mat())) == 0.0);
        let id = HermitianMap::identity(&BlockAlgebra::full(2));
        assert_eq!(id.adjoint(), id);
    }

    #[test]
    fn adjoint_of_qc_returns_effects() {
        let mut rng = Rng::seed(26);
        let a: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
        let qa = make_qc(&a).unwrap().adjoint();
        for (i, ai) in a.iter().enumerate() {
            let out = qa.apply_mat(&unit(3, i, i));
            assert!(max_abs(&(out - ai.mat())) < 1e-14);
        }
    }

    #[test]
    fn s_functional_values() {
        let id = HermitianMap::identity(&BlockAlgebra::full(2));
        assert!((s_functional(&id).unwrap() - 4.0).abs() < 1e-15);
        let mut rng = Rng::seed(27);
        let a = rng.hermitian(3);
        let b = rng.hermitian(3);
        // Φ_{b,a}: x ↦ Tr(b x) a
        let m = make_fe(std::slice::from_ref(&b), std::slice::from_ref(&a)).unwrap();
        let expect = hs(a.mat(), b.mat());
        assert!((s_functional(&m).unwrap() - expect).abs() < 1e-12);
        assert!(s_functional(&rng.hermitian_map(2, 3)).is_err());
    }

    #[test]
    fn pairing_special_cases() {
        let mut rng = Rng::seed(28);
        let b: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
        let f: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
        let v = pairing(&make_cq(&b).unwrap(), &make_qc(&f).unwrap()).unwrap();
        let expect: f64 = b.iter().zip(&f).map(|(x, y)| hs(x.mat(), y.mat())).sum();
        assert!((v - expect).abs() < 1e-12);

        let omega = rng.channel(3, 2);
        let sigma = rng.state(3);
        let t = 2.5;
        let rep = HermitianMap::replacer(omega.out_alg(), sigma.op()).scale(t);
        assert!((pairing(&omega, &rep).unwrap() - t).abs() < 1e-12);
    }

    #[test]
    fn normalize_eb_cases() {
        let alg = BlockAlgebra::full(2);
        let mut rng = Rng::seed(29);
        let e = vec![rng.hermitian(2)];
        let f = vec![HermitianOperator::identity(&alg).scale(0.25)];
        let (fp, ep) = normalize_eb(&f, &e).unwrap();
        assert!(max_abs(&(fp.effects()[0].mat() - eye(2))) < 1e-14);
        assert!(max_abs(fp.effects()[1].mat()) < 1e-14);
        assert!(max_abs(&(ep[0].mat() - e[0].mat() * c(0.25))) < 1e-14);

        let povm = rng.povm(2, 3);
        let e: Vec<_> = (0..3).map(|_| rng.hermitian(2)).collect();
        let (fp, ep) = normalize_eb(povm.effects(), &e).unwrap();
        assert!(max_abs(fp.effects()[3].mat()) < 1e-12);
        for (x, y) in ep.iter().zip(&e) {
            assert!(max_abs(&(x.mat() - y.mat())) < 1e-12);
        }
        let bad = vec![HermitianOperator::diag(&[1.0, -1.0])];
        assert!(normalize_eb(&bad, &e[..1]).is_err());
    }

    #[test]
    fn trace_preservation_defects() {
        let id = HermitianMap::identity(&BlockAlgebra::full(2));
        assert_eq!(id.is_trace_preserving(), (true, 0.0));
        let (ok, d) = id.scale(0.5).is_trace_preserving();
        assert!(!ok && (d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tensor_map_factorizes() {
        let mut rng = Rng::seed(30);
        let m1 = rng.hermitian_map(2, 3);
        let m2 = rng.hermitian_map(2, 2);
        let t = tensor_map(&m1, &m2);
        let a = rng.hermitian(2);
        let b = rng.hermitian(2);
        let lhs = t.apply_mat(&kron(a.mat(), b.mat()));
        let rhs = kron(&m1.apply_mat(a.mat()), &m2.apply_mat(b.mat()));
        assert!(max_abs(&(lhs - rhs)) < 1e-9);
        let triv = tensor_map(&m1, &HermitianMap::identity(&BlockAlgebra::full(1)));
        assert!(max_abs(&(triv.choi_mat() - m1.choi_mat())) < 1e-15);
        let alg = BlockAlgebra::full(2);
        let tt = tensor_map(&HermitianMap::tau(&alg, &alg), &HermitianMap::tau(&alg, &alg));
        let prod = kron(rng.state(2).mat(), rng.state(2).mat());
        assert!(max_abs(&(tt.apply_mat(&prod) - eye(4))) < 1e-13);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = Rng::seed(31);
        let m = make_cq(&[rng.state(2).op().clone(), rng.state(2).op().clone()]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: HermitianMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let e = Experiment::new(vec![rng.state(2), rng.state(2)]).unwrap();
        let back: Experiment = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
