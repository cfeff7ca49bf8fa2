//! Seeded generators for test data, benchmarks and multi-start searches.

use nalgebra::DVector;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hmap::HermitianMap;
use crate::matops::linalg::*;
use crate::matops::{BlockAlgebra, CMat, HermitianOperator, Povm, State, C64};

/// Deterministic generator; identical seeds give identical streams.
pub struct Rng {
    inner: ChaCha8Rng,
}

/// Seed for the `k`-th independent stream derived from `master`.
pub fn derive_seed(master: u64, k: u64) -> u64 {
    // splitmix64 finalizer keeps derived streams decorrelated
    let mut z = master ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn fork(&mut self) -> Self {
        Self::seed(self.inner.random())
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn cgauss(&mut self) -> C64 {
        C64::new(self.normal(), self.normal())
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| self.cgauss())
    }

    pub fn vector(&mut self, n: usize) -> DVector<C64> {
        DVector::from_fn(n, |_, _| self.cgauss())
    }

    pub fn unit_vector(&mut self, n: usize) -> DVector<C64> {
        let v = self.vector(n);
        let nrm = v.norm();
        v / c(nrm)
    }

    /// Hermitian matrix with independent Gaussian entries.
    pub fn hermitian(&mut self, n: usize) -> HermitianOperator {
        let g = self.ginibre(n, n);
        HermitianOperator::full(&herm_part(&g))
    }

    pub fn hermitian_in(&mut self, alg: &BlockAlgebra) -> HermitianOperator {
        let g = self.ginibre(alg.ambient_dim(), alg.ambient_dim());
        HermitianOperator::project_into(&g, alg.clone())
    }

    pub fn psd_rank(&mut self, n: usize, rank: usize) -> HermitianOperator {
        let g = self.ginibre(n, rank);
        HermitianOperator::full(&(&g * g.adjoint()))
    }

    pub fn psd_in(&mut self, alg: &BlockAlgebra) -> HermitianOperator {
        let n = alg.ambient_dim();
        let g = alg.project(&self.ginibre(n, n));
        HermitianOperator::project_into(&(&g * g.adjoint()), alg.clone())
    }

    /// Hilbert-Schmidt random state of full rank.
    pub fn state(&mut self, n: usize) -> State {
        self.state_in(&BlockAlgebra::full(n))
    }

    pub fn state_in(&mut self, alg: &BlockAlgebra) -> State {
        let p = self.psd_in(alg);
        let t = p.trace();
        State::new(p.scale(1.0 / t)).expect("normalized PSD")
    }

    pub fn state_rank(&mut self, n: usize, rank: usize) -> State {
        let p = self.psd_rank(n, rank);
        let t = p.trace();
        State::new(p.scale(1.0 / t)).expect("normalized PSD")
    }

    pub fn pure_state(&mut self, n: usize) -> State {
        State::pure(&self.unit_vector(n))
    }

    /// Haar-distributed unitary via QR with phase correction.
    pub fn unitary(&mut self, n: usize) -> CMat {
        let g = self.ginibre(n, n);
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        let mut u = q;
        for j in 0..n {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
            for i in 0..n {
                u[(i, j)] *= ph;
            }
        }
        u
    }

    /// Isometry `C^d_in → C^d_out`, `d_out >= d_in`.
    pub fn isometry(&mut self, d_in: usize, d_out: usize) -> CMat {
        let u = self.unitary(d_out);
        u.columns(0, d_in).into_owned()
    }

    /// Random CPTP map from a Stinespring isometry with `kraus` Kraus operators.
    pub fn channel_rank(&mut self, d_in: usize, d_out: usize, kraus: usize) -> HermitianMap {
        let v = self.isometry(d_in, d_out * kraus);
        let ks: Vec<CMat> = (0..kraus)
            .map(|a| CMat::from_fn(d_out, d_in, |o, i| v[(o * kraus + a, i)]))
            .collect();
        HermitianMap::from_kraus(&ks, &BlockAlgebra::full(d_in), &BlockAlgebra::full(d_out))
            .expect("Kraus dimensions consistent")
    }

    pub fn channel(&mut self, d_in: usize, d_out: usize) -> HermitianMap {
        let k = 1 + self.index(d_in * d_out);
        self.channel_rank(d_in, d_out, k)
    }

    /// Random completely positive map (not trace preserving).
    pub fn cp_map(&mut self, d_in: usize, d_out: usize) -> HermitianMap {
        let n = d_in * d_out;
        let g = self.ginibre(n, n);
        HermitianMap::from_choi_projected(
            &BlockAlgebra::full(d_in),
            &BlockAlgebra::full(d_out),
            &(&g * g.adjoint()),
        )
    }

    /// Hermitian map with Gaussian Choi matrix.
    pub fn hermitian_map(&mut self, d_in: usize, d_out: usize) -> HermitianMap {
        let h = self.hermitian(d_in * d_out);
        HermitianMap::from_choi_projected(&BlockAlgebra::full(d_in), &BlockAlgebra::full(d_out), h.mat())
    }

    /// Random POVM with `n` effects: `S^{-1/2} G_i S^{-1/2}` for PSD `G_i`.
    pub fn povm(&mut self, d: usize, n: usize) -> Povm {
        let alg = BlockAlgebra::full(d);
        let gs: Vec<HermitianOperator> = (0..n)
            .map(|_| {
                let r = 1 + self.index(d);
                self.psd_rank(d, r)
            })
            .collect();
        let mut s = zeros(d);
        for g in &gs {
            s += g.mat();
        }
        let (w, _) = pinv_sqrt(&s);
        let effects = gs
            .iter()
            .map(|g| HermitianOperator::project_into(&(&w * g.mat() * &w), alg.clone()))
            .collect();
        Povm::new(effects).expect("normalized effects")
    }

    /// Strictly positive probability vector (Dirichlet(1,…,1)).
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let xs: Vec<f64> = (0..n).map(|_| -self.uniform().max(1e-300).ln()).collect();
        let s: f64 = xs.iter().sum();
        xs.iter().map(|x| x / s).collect()
    }

    /// Column-stochastic `m × n` matrix, row-major.
    pub fn stochastic(&mut self, m: usize, n: usize) -> Vec<Vec<f64>> {
        let cols: Vec<Vec<f64>> = (0..n).map(|_| self.simplex(m)).collect();
        (0..m).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
    }
}
