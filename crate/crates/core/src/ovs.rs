//! Ordered vector spaces with polyhedral proper cones.
//!
//! A [`PolyCone`] keeps both its generators and its facet normals (the
//! latter are the generators of the dual cone). A [`BaseSection`] is the
//! polytope `B = T ∩ {q ∈ Q : ⟨q, b̃⟩ = 1}` for a subspace `T` meeting the
//! interior of `Q`; its order-interval hull `O_B = {x : ∃b ∈ B, −b ≤ x ≤ b}`
//! is the unit ball of the norm `‖·‖_B`. Every quantity is computed by
//! vertex enumeration or by a small linear program.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cones::Family;
use crate::conic::{Lp, Status};
use crate::error::{Error, Result};
use crate::hmap::HermitianMap;
use crate::matops::{BlockAlgebra, CMat, C64};
use crate::norms::{diamond_norm, dual_diamond_norm};
use crate::random::Rng;

/// Largest ambient dimension handled by the double description method.
pub const MAX_DIM: usize = 12;
/// Largest number of extreme rays kept during enumeration.
pub const MAX_RAYS: usize = 10_000;
/// Zero test for inner products between unit vectors.
const GEOM_TOL: f64 = 1e-9;
/// Feasibility slack accepted on LP outputs.
const LP_TOL: f64 = 1e-8;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(a);
    (n > 0.0 && n.is_finite()).then(|| a.iter().map(|v| v / n).collect())
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    axpy(-1.0, y, x)
}

fn rank_of(rows: &[&[f64]], n: usize) -> usize {
    if rows.is_empty() || n == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    sv.iter().filter(|&&s| s > 1e-9 * top.max(1.0)).count()
}

/// Orthonormal basis of the span of `vs` (modified Gram-Schmidt, run twice).
fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let scale = norm2(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = dot(u, &w);
                w = axpy(-c, u, &w);
            }
        }
        let n = norm2(&w);
        if n > 1e-10 * scale {
            out.push(w.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of an orthonormal set.
fn complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all = basis.to_vec();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push(e);
    }
    orthonormalize(&all).split_off(basis.len())
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn dedup_directions(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut units: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let Some(u) = unit(&v) else { continue };
        if units.iter().all(|w| norm2(&sub(w, &u)) > 1e-7) {
            units.push(u);
            out.push(v);
        }
    }
    out
}

/// Extreme rays (unit length) of `{y ∈ R^n : ⟨a_i, y⟩ ≥ 0}`.
///
/// Double description with the algebraic adjacency test: two rays are
/// adjacent when their common tight rows have rank `n − 2`. The rows must
/// span `R^n`, so the cone is pointed.
fn extreme_rays(rows: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    if n > MAX_DIM {
        return Err(Error::Invalid(format!("dimension too large: {n} > {MAX_DIM}")));
    }
    let rows: Vec<Vec<f64>> = rows.iter().filter_map(|r| unit(r)).collect();
    let mut basis: Vec<usize> = Vec::new();
    let mut q: Vec<Vec<f64>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if basis.len() == n {
            break;
        }
        let before = q.len();
        q = orthonormalize(&[q.clone(), vec![r.clone()]].concat());
        if q.len() > before {
            basis.push(i);
        }
    }
    if basis.len() < n {
        return Err(Error::Invalid("inequalities do not span the space (cone has a line)".into()));
    }
    let a0 = DMatrix::from_fn(n, n, |i, j| rows[basis[i]][j]);
    let inv = a0.try_inverse().ok_or_else(|| Error::Invalid("singular initial basis".into()))?;

    struct Ray {
        v: Vec<f64>,
        tight: Vec<usize>,
    }
    let mut rays: Vec<Ray> = (0..n)
        .map(|j| {
            let col: Vec<f64> = inv.column(j).iter().copied().collect();
            let mut tight: Vec<usize> = basis.iter().copied().filter(|&b| b != basis[j]).collect();
            tight.sort_unstable();
            Ray { v: unit(&col).expect("column of an inverse"), tight }
        })
        .collect();

    for k in 0..rows.len() {
        if basis.contains(&k) {
            continue;
        }
        let vals: Vec<f64> = rays.iter().map(|r| dot(&rows[k], &r.v)).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -GEOM_TOL).collect();
        if neg.is_empty() {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.abs() <= GEOM_TOL {
                    r.tight.push(k);
                    r.tight.sort_unstable();
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > GEOM_TOL).collect();
        let mut fresh: Vec<Ray> = Vec::new();
        if n >= 2 {
            for &p in &pos {
                for &m in &neg {
                    let common = sorted_intersection(&rays[p].tight, &rays[m].tight);
                    if common.len() + 2 < n {
                        continue;
                    }
                    let sub_rows: Vec<&[f64]> = common.iter().map(|&c| rows[c].as_slice()).collect();
                    if rank_of(&sub_rows, n) != n - 2 {
                        continue;
                    }
                    let v = axpy(-vals[m], &rays[p].v, &rays[m].v.iter().map(|x| x * vals[p]).collect::<Vec<_>>());
                    let Some(v) = unit(&v) else { continue };
                    let mut tight = common;
                    tight.push(k);
                    tight.sort_unstable();
                    fresh.push(Ray { v, tight });
                }
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i] < -GEOM_TOL {
                continue;
            }
            if vals[i].abs() <= GEOM_TOL {
                r.tight.push(k);
                r.tight.sort_unstable();
            }
            kept.push(r);
        }
        kept.extend(fresh);
        if kept.len() > MAX_RAYS {
            return Err(Error::Invalid(format!("more than {MAX_RAYS} extreme rays")));
        }
        rays = kept;
    }
    Ok(dedup_directions(rays.into_iter().map(|r| r.v).collect()))
}

/// Keeps the generators that are extreme for the given facets.
fn prune_generators(gens: Vec<Vec<f64>>, facets: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let gens = dedup_directions(gens);
    if n < 2 {
        return gens;
    }
    gens.into_iter()
        .filter(|g| {
            let u = unit(g).expect("deduplicated generators are nonzero");
            let tight: Vec<&[f64]> = facets.iter().filter(|f| dot(f, &u).abs() <= 1e-8).map(|f| f.as_slice()).collect();
            rank_of(&tight, n) == n - 1
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Cones
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
struct PolyConeRepr {
    #[serde(default)]
    generators: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    facets: Option<Vec<Vec<f64>>>,
}

/// Polyhedral proper cone `Q = cone(generators) = {x : ⟨f, x⟩ ≥ 0 ∀ facets f}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyConeRepr")]
pub struct PolyCone {
    pub ambient_dim: usize,
    pub generators: Vec<Vec<f64>>,
    pub facets: Vec<Vec<f64>>,
}

impl TryFrom<PolyConeRepr> for PolyCone {
    type Error = Error;

    fn try_from(r: PolyConeRepr) -> Result<Self> {
        match (r.generators, r.facets) {
            (Some(g), _) => PolyCone::from_generators(g),
            (None, Some(f)) => PolyCone::from_facets(f),
            (None, None) => Err(Error::Invalid("cone needs generators or facets".into())),
        }
    }
}

fn common_dim(vs: &[Vec<f64>]) -> Result<usize> {
    let n = vs.first().map(Vec::len).ok_or_else(|| Error::Invalid("empty vector list".into()))?;
    if n == 0 || vs.iter().any(|v| v.len() != n) {
        return Err(Error::Invalid("vectors must share a positive dimension".into()));
    }
    if vs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite coordinate".into()));
    }
    Ok(n)
}

impl PolyCone {
    /// Cone generated by the given vectors; redundant generators are dropped.
    pub fn from_generators(gens: Vec<Vec<f64>>) -> Result<Self> {
        let n = common_dim(&gens)?;
        if n > MAX_DIM {
            return Err(Error::Invalid(format!("dimension too large: {n} > {MAX_DIM}")));
        }
        let refs: Vec<&[f64]> = gens.iter().map(Vec::as_slice).collect();
        if rank_of(&refs, n) < n {
            return Err(Error::Invalid("generators do not span the space".into()));
        }
        let facets = extreme_rays(&gens, n)?;
        let frefs: Vec<&[f64]> = facets.iter().map(Vec::as_slice).collect();
        if rank_of(&frefs, n) < n {
            return Err(Error::Invalid("cone contains a line".into()));
        }
        let generators = prune_generators(gens, &facets, n);
        let cone = Self { ambient_dim: n, generators, facets };
        cone.check()?;
        Ok(cone)
    }

    /// Cone cut out by `⟨f, x⟩ ≥ 0` for the given normals.
    pub fn from_facets(facets: Vec<Vec<f64>>) -> Result<Self> {
        common_dim(&facets)?;
        Ok(Self::from_generators(facets)?.dual())
    }

    /// `R^n_+`.
    pub fn orthant(n: usize) -> Result<Self> {
        Self::from_generators(
            (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect(),
        )
    }

    /// Dual cone `Q* = {y : ⟨x, y⟩ ≥ 0 ∀x ∈ Q}`: generators and facets swap.
    pub fn dual(&self) -> Self {
        Self { ambient_dim: self.ambient_dim, generators: self.facets.clone(), facets: self.generators.clone() }
    }

    /// Every generator satisfies every facet inequality.
    pub fn check(&self) -> Result<()> {
        for g in &self.generators {
            let scale = norm2(g);
            for f in &self.facets {
                let v = dot(f, g);
                if v < -1e-10 * scale * norm2(f) {
                    return Err(Error::Invalid(format!("generator violates facet by {v:e}")));
                }
            }
        }
        Ok(())
    }

    /// Smallest facet value relative to `‖x‖`; positive exactly on `int Q`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let s = norm2(x).max(f64::MIN_POSITIVE);
        self.facets.iter().map(|f| dot(f, x) / (s * norm2(f))).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| dot(f, x) >= -tol * norm2(f))
    }
}

pub fn dual_cone(q: &PolyCone) -> PolyCone {
    q.dual()
}

/// Whether two cones have the same extreme rays.
pub fn same_rays(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let ua: Vec<Vec<f64>> = a.iter().filter_map(|v| unit(v)).collect();
    let ub: Vec<Vec<f64>> = b.iter().filter_map(|v| unit(v)).collect();
    let covers = |x: &[Vec<f64>], y: &[Vec<f64>]| x.iter().all(|u| y.iter().any(|w| norm2(&sub(u, w)) <= tol));
    covers(&ua, &ub) && covers(&ub, &ua)
}

/// Whether two point sets agree up to permutation.
pub fn same_points(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let covers = |x: &[Vec<f64>], y: &[Vec<f64>]| x.iter().all(|u| y.iter().any(|w| norm2(&sub(u, w)) <= tol));
    a.len() == b.len() && covers(a, b) && covers(b, a)
}

// ---------------------------------------------------------------------------
// Base sections
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Deserialize)]
struct BaseSectionRepr {
    cone: PolyCone,
    base_functional: Vec<f64>,
    #[serde(default)]
    subspace_basis: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    interior_point: Option<Vec<f64>>,
}

/// `B = T ∩ S` with `S = {q ∈ Q : ⟨q, b̃⟩ = 1}` and `T` a subspace meeting
/// `int Q`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BaseSectionRepr")]
pub struct BaseSection {
    pub cone: PolyCone,
    pub base_functional: Vec<f64>,
    /// Orthonormal basis of `T`.
    pub subspace_basis: Vec<Vec<f64>>,
    /// A point of `B ∩ int Q`.
    pub interior_point: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
}

impl TryFrom<BaseSectionRepr> for BaseSection {
    type Error = Error;

    fn try_from(r: BaseSectionRepr) -> Result<Self> {
        let n = r.cone.ambient_dim;
        let basis = r.subspace_basis.unwrap_or_else(|| standard_basis(n));
        let mut b = BaseSection::new(r.cone, r.base_functional, &basis)?;
        if let Some(p) = r.interior_point {
            b = b.with_interior_point(p)?;
        }
        Ok(b)
    }
}

fn standard_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

impl BaseSection {
    pub fn new(cone: PolyCone, base_functional: Vec<f64>, subspace: &[Vec<f64>]) -> Result<Self> {
        let n = cone.ambient_dim;
        if base_functional.len() != n || subspace.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: base_functional.len() });
        }
        if cone.dual().margin(&base_functional) <= 1e-10 {
            return Err(Error::Invalid("base functional is not strictly positive on the cone".into()));
        }
        let basis = orthonormalize(subspace);
        if basis.is_empty() {
            return Err(Error::Invalid("empty subspace".into()));
        }
        let m = basis.len();
        // facets of T ∩ Q in the coordinates of the basis
        let rows: Vec<Vec<f64>> = cone.facets.iter().map(|f| basis.iter().map(|u| dot(u, f)).collect()).collect();
        let rays = extreme_rays(&rows, m)?;
        let mut vertices = Vec::with_capacity(rays.len());
        for t in rays {
            let x = basis.iter().zip(&t).fold(vec![0.0; n], |acc, (u, c)| axpy(*c, u, &acc));
            let s = dot(&x, &base_functional);
            if s <= 0.0 {
                return Err(Error::Invalid("section ray outside the cone".into()));
            }
            vertices.push(x.iter().map(|v| v / s).collect::<Vec<f64>>());
        }
        if vertices.is_empty() {
            return Err(Error::Invalid("empty section".into()));
        }
        let k = vertices.len() as f64;
        let interior_point = vertices.iter().fold(vec![0.0; n], |acc, v| axpy(1.0 / k, v, &acc));
        if cone.margin(&interior_point) <= 1e-10 {
            return Err(Error::Invalid("section does not meet the interior of the cone".into()));
        }
        Ok(Self { cone, base_functional, subspace_basis: basis, interior_point, vertices })
    }

    /// The full base `S` (`T` = whole space).
    pub fn full(cone: PolyCone, base_functional: Vec<f64>) -> Result<Self> {
        let n = cone.ambient_dim;
        Self::new(cone, base_functional, &standard_basis(n))
    }

    /// The single point `b / ⟨b, b̃⟩` for `b ∈ int Q`.
    pub fn point(cone: PolyCone, b: Vec<f64>, base_functional: Vec<f64>) -> Result<Self> {
        Self::new(cone, base_functional, &[b])
    }

    /// Replaces the interior point after checking it lies in `B ∩ int Q`.
    pub fn with_interior_point(mut self, p: Vec<f64>) -> Result<Self> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        if self.cone.margin(&p) <= 1e-10 || self.section_defect(&p) > 1e-9 {
            return Err(Error::Invalid("interior point is not in B ∩ int Q".into()));
        }
        self.interior_point = p;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.cone.ambient_dim
    }

    /// Projection of `x` onto `T`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.subspace_basis.iter().fold(vec![0.0; x.len()], |acc, u| axpy(dot(u, x), u, &acc))
    }

    /// Distance of `x` from `T ∩ {⟨·, b̃⟩ = 1}` plus its cone violation.
    pub fn section_defect(&self, x: &[f64]) -> f64 {
        let off = norm2(&sub(x, &self.project(x)));
        let level = (dot(x, &self.base_functional) - 1.0).abs();
        let cone = self.cone.facets.iter().map(|f| (-dot(f, x) / norm2(f)).max(0.0)).fold(0.0, f64::max);
        off + level + cone
    }

    /// `‖x‖_B`; `+∞` when no `c ∈ cone(B)` dominates `±x`.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.norm_with_center(x)?.0)
    }

    /// `‖x‖_B` together with a minimizing `c` (`−c ≤ x ≤ c`, `c ∈ cone(B)`).
    pub fn norm_with_center(&self, x: &[f64]) -> Result<(f64, Option<Vec<f64>>)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let m = self.subspace_basis.len();
        let mut lp = Lp::new(m);
        lp.c = self.subspace_basis.iter().map(|u| dot(u, &self.base_functional)).collect();
        for f in &self.cone.facets {
            let row: Vec<f64> = self.subspace_basis.iter().map(|u| dot(u, f)).collect();
            let fx = dot(f, x);
            lp.ge(row.clone(), fx);
            lp.ge(row, -fx);
        }
        let sol = lp.solve();
        match sol.status {
            Status::Optimal => {
                let c = self.lift(&sol.x);
                Ok((sol.value.max(0.0), Some(c)))
            }
            Status::Infeasible => Ok((f64::INFINITY, None)),
            s => Err(Error::Solver(format!("section norm LP ended with {s:?}"))),
        }
    }

    fn lift(&self, t: &[f64]) -> Vec<f64> {
        self.subspace_basis.iter().zip(t).fold(vec![0.0; self.dim()], |acc, (u, c)| axpy(*c, u, &acc))
    }

    /// `sup {⟨x, y⟩ : y ∈ O_B}` and the centre `d ∈ B` of an optimal order interval.
    pub fn ball_sup(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let m = self.subspace_basis.len();
        // variables: t (centre coordinates in T), then y
        let mut lp = Lp::new(m + n);
        for (i, v) in x.iter().enumerate() {
            lp.c[m + i] = -v;
        }
        let level: Vec<f64> = self.subspace_basis.iter().map(|u| dot(u, &self.base_functional)).chain(std::iter::repeat_n(0.0, n)).collect();
        lp.equal(level, 1.0);
        for f in &self.cone.facets {
            let tf: Vec<f64> = self.subspace_basis.iter().map(|u| dot(u, f)).collect();
            lp.ge(tf.iter().copied().chain(f.iter().copied()).collect(), 0.0);
            lp.ge(tf.iter().copied().chain(f.iter().map(|v| -v)).collect(), 0.0);
        }
        let sol = lp.solve();
        if sol.status != Status::Optimal {
            return Err(Error::Solver(format!("order-interval LP ended with {:?}", sol.status)));
        }
        Ok((-sol.value, self.lift(&sol.x[..m])))
    }

    /// Order-unit norm `‖x‖_b = inf {λ : −λb ≤ x ≤ λb}` for `b ∈ int Q`.
    pub fn order_unit_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        self.cone.facets.iter().map(|f| dot(f, x).abs() / dot(f, b)).fold(0.0, f64::max)
    }

    /// Distance (sup norm) from `x` to the convex hull of the vertices.
    pub fn hull_distance(&self, x: &[f64]) -> Result<f64> {
        let n = self.dim();
        let k = self.vertices.len();
        // variables: weights w (k), then r
        let mut lp = Lp::new(k + 1);
        lp.c[k] = 1.0;
        let mut sum = vec![1.0; k];
        sum.push(0.0);
        lp.equal(sum, 1.0);
        for i in 0..k {
            let mut e = vec![0.0; k + 1];
            e[i] = 1.0;
            lp.ge(e, 0.0);
        }
        for j in 0..n {
            let row: Vec<f64> = self.vertices.iter().map(|v| v[j]).collect();
            let mut up = row.clone();
            up.push(1.0);
            lp.ge(up, x[j]);
            let mut down: Vec<f64> = row.iter().map(|v| -v).collect();
            down.push(1.0);
            lp.ge(down, -x[j]);
        }
        let sol = lp.solve();
        if sol.status != Status::Optimal {
            return Err(Error::Solver(format!("hull LP ended with {:?}", sol.status)));
        }
        Ok(sol.value.max(0.0))
    }

    /// Whether `x ∈ O_B`, decided by LP feasibility of `b ± x ∈ Q`, `b ∈ B`.
    pub fn ball_contains(&self, x: &[f64]) -> Result<bool> {
        let n = self.dim();
        let k = self.vertices.len();
        // variables: weights w, then slack r; maximize r with b ± x ≥ r·|f|
        let mut lp = Lp::new(k + 1);
        lp.c[k] = -1.0;
        let mut sum = vec![1.0; k];
        sum.push(0.0);
        lp.equal(sum, 1.0);
        for i in 0..k {
            let mut e = vec![0.0; k + 1];
            e[i] = 1.0;
            lp.ge(e, 0.0);
        }
        let mut cap = vec![0.0; k + 1];
        cap[k] = -1.0;
        lp.ge(cap, -1.0);
        for f in &self.cone.facets {
            let fv: Vec<f64> = self.vertices.iter().map(|v| dot(f, v)).collect();
            let fx = dot(f, x);
            let nf = norm2(f);
            for s in [1.0, -1.0] {
                let mut row = fv.clone();
                row.push(-nf);
                lp.ge(row, -s * fx);
            }
        }
        let sol = lp.solve();
        if sol.status != Status::Optimal {
            return Err(Error::Solver(format!("membership LP ended with {:?}", sol.status)));
        }
        debug_assert_eq!(n, x.len());
        Ok(-sol.value >= -LP_TOL)
    }
}

/// `B̃ = {b* ∈ Q* : ⟨b, b*⟩ = 1 ∀b ∈ B} = (b̃ + B^⊥) ∩ Q*`.
///
/// Its subspace is `span(b̃) + T^⊥`, its base functional the interior point
/// of `B` and its interior point `b̃`, so dualizing twice returns `B`.
pub fn dual_section(b: &BaseSection) -> Result<BaseSection> {
    let n = b.dim();
    let mut span = vec![b.base_functional.clone()];
    span.extend(complement(&b.subspace_basis, n));
    BaseSection::new(b.cone.dual(), b.interior_point.clone(), &span)?.with_interior_point(b.base_functional.clone())
}

/// Affine functional `x ↦ ⟨linear, x⟩ + constant`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineFunctional {
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl AffineFunctional {
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.linear, x) + self.constant
    }
}

/// `q* ∈ Q*` with `⟨b, q*⟩ = f(b)` on `B`, as a nonnegative combination of
/// the generators of `Q*`.
pub fn krein_extend(b: &BaseSection, f: &AffineFunctional) -> Result<Vec<f64>> {
    let n = b.dim();
    if f.linear.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.linear.len() });
    }
    let vals: Vec<f64> = b.vertices.iter().map(|v| f.eval(v)).collect();
    let scale = 1.0 + vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if vals.iter().any(|&v| v < -1e-12 * scale) {
        return Err(Error::Invalid("functional is negative on the section".into()));
    }
    let h = &b.cone.facets;
    let k = h.len();
    let mut lp = Lp::new(k);
    // smallest total weight keeps the LP bounded and the answer canonical
    lp.c = h.iter().map(|g| dot(g, &b.interior_point)).collect();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        lp.ge(e, 0.0);
    }
    // agreement on a basis of the vertices' span is agreement on B
    let mut span: Vec<Vec<f64>> = Vec::new();
    for (v, val) in b.vertices.iter().zip(&vals) {
        let before = span.len();
        span = orthonormalize(&[span.clone(), vec![v.clone()]].concat());
        if span.len() > before {
            lp.equal(h.iter().map(|g| dot(g, v)).collect(), *val);
        }
    }
    let sol = lp.solve();
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!("extension LP ended with {:?}", sol.status)));
    }
    Ok(h.iter().zip(&sol.x).fold(vec![0.0; n], |acc, (g, w)| axpy(w.max(0.0), g, &acc)))
}

pub fn base_section_norm(b: &BaseSection, x: &[f64]) -> Result<f64> {
    b.norm(x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualNormReport {
    /// `sup {⟨x, x*⟩ : x ∈ O_B}`.
    pub ball_sup: f64,
    /// `‖x*‖_{B̃}`.
    pub dual_norm: f64,
    pub gap: f64,
}

pub fn dual_norm_check(b: &BaseSection, x_star: &[f64]) -> Result<DualNormReport> {
    let (ball_sup, _) = b.ball_sup(x_star)?;
    let dual_norm = dual_section(b)?.norm(x_star)?;
    Ok(DualNormReport { ball_sup, dual_norm, gap: (ball_sup - dual_norm).abs() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfIdentityReport {
    /// `sup {⟨b − b′, q*⟩ : q* ∈ O_{B̃} ∩ Q*}`.
    pub lhs: f64,
    /// `½‖b − b′‖_B`.
    pub rhs: f64,
    pub gap: f64,
}

pub fn half_identity_check(b: &BaseSection, x: &[f64], y: &[f64]) -> Result<HalfIdentityReport> {
    for p in [x, y] {
        if p.len() != b.dim() {
            return Err(Error::DimensionMismatch { expected: b.dim(), got: p.len() });
        }
        if b.section_defect(p) > 1e-8 {
            return Err(Error::Invalid("point is not in the section".into()));
        }
    }
    let diff = sub(x, y);
    let d = dual_section(b)?;
    let n = b.dim();
    let m = d.subspace_basis.len();
    // variables: q (n), then centre coordinates s (m); 0 ≤* q ≤* centre
    let mut lp = Lp::new(n + m);
    for (i, v) in diff.iter().enumerate() {
        lp.c[i] = -v;
    }
    let level: Vec<f64> =
        std::iter::repeat_n(0.0, n).chain(d.subspace_basis.iter().map(|u| dot(u, &d.base_functional))).collect();
    lp.equal(level, 1.0);
    for g in &d.cone.facets {
        let ug: Vec<f64> = d.subspace_basis.iter().map(|u| dot(u, g)).collect();
        lp.ge(g.iter().copied().chain(std::iter::repeat_n(0.0, m)).collect(), 0.0);
        lp.ge(g.iter().map(|v| -v).chain(ug).collect(), 0.0);
    }
    let sol = lp.solve();
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!("half-identity LP ended with {:?}", sol.status)));
    }
    let lhs = -sol.value;
    let rhs = 0.5 * b.norm(&diff)?;
    Ok(HalfIdentityReport { lhs, rhs, gap: (lhs - rhs).abs() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapNormReport {
    /// `sup_{b ∈ B₁} ‖T b‖_{B₂}` over the vertices of `B₁`.
    pub value: f64,
    /// Largest `‖T x‖_{B₂}` over sampled boundary points of `O_{B₁}`.
    pub sampled_max: f64,
    pub samples: usize,
}

/// Norm of a positive map `T : (V₁, B₁) → (V₂, B₂)`, given as a
/// `dim V₂ × dim V₁` matrix.
pub fn positive_map_norm(t: &DMatrix<f64>, b1: &BaseSection, b2: &BaseSection, samples: usize, seed: u64) -> Result<MapNormReport> {
    if t.ncols() != b1.dim() || t.nrows() != b2.dim() {
        return Err(Error::DimensionMismatch { expected: b1.dim() * b2.dim(), got: t.ncols() * t.nrows() });
    }
    let apply = |x: &[f64]| -> Vec<f64> { (t * DVector::from_column_slice(x)).iter().copied().collect() };
    for g in &b1.cone.generators {
        let tg = apply(g);
        if !b2.cone.contains(&tg, 1e-10 * norm2(g)) {
            return Err(Error::Invalid("map is not positive".into()));
        }
    }
    let mut value = 0.0f64;
    for v in &b1.vertices {
        value = value.max(b2.norm(&apply(v))?);
    }
    let mut rng = Rng::seed(seed);
    let mut sampled_max = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = (0..b1.dim()).map(|_| rng.normal()).collect();
        let nx = b1.norm(&x)?;
        if nx > 0.0 && nx.is_finite() {
            let y: Vec<f64> = x.iter().map(|v| v / nx).collect();
            sampled_max = sampled_max.max(b2.norm(&apply(&y))?);
        }
    }
    Ok(MapNormReport { value, sampled_max, samples })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    pub norm: f64,
    /// `sup_{b̃ ∈ B̃} ⟨x, b̃⟩`, present when `x ∈ Q`.
    pub vertex_sup: Option<f64>,
    /// `min ‖x‖_b` over the sampled `b ∈ ri(B)`.
    pub inf_side: f64,
    /// `max ‖x‖_{S_b̃}` over the sampled `b̃ ∈ ri(B̃)`.
    pub sup_side: f64,
    pub samples: usize,
}

impl SandwichReport {
    /// Deviation in the cone identity (zero when `x ∉ Q`).
    pub fn vertex_gap(&self) -> f64 {
        self.vertex_sup.map_or(0.0, |v| (v - self.norm).abs())
    }
}

/// Base norm of `x` for the base `{q ∈ Q : ⟨q, d⟩ = 1}`, `d ∈ int Q*`.
pub fn cone_base_norm(q: &PolyCone, d: &[f64], x: &[f64]) -> Result<f64> {
    let n = q.ambient_dim;
    let mut lp = Lp::new(n);
    lp.c = x.iter().map(|v| -v).collect();
    for g in &q.generators {
        let gd = dot(g, d);
        lp.ge(g.clone(), -gd);
        lp.ge(g.iter().map(|v| -v).collect(), -gd);
    }
    let sol = lp.solve();
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!("base norm LP ended with {:?}", sol.status)));
    }
    Ok(-sol.value)
}

/// Checks `‖x‖_B = inf_{b ∈ ri B} ‖x‖_b = sup_{b̃ ∈ ri B̃} ‖x‖_{S_b̃}` on
/// sampled relative-interior points, and `‖x‖_B = sup_{B̃} ⟨x, ·⟩` for `x ∈ Q`.
///
/// Samples are Dirichlet mixtures of the vertices plus points on the
/// segment from the interior point to the optimal centres, which lie in the
/// relative interior and approach the extremum.
pub fn sandwich_check(b: &BaseSection, x: &[f64], samples: usize, seed: u64) -> Result<SandwichReport> {
    let (norm, centre) = b.norm_with_center(x)?;
    let d = dual_section(b)?;
    let vertex_sup = b.cone.contains(x, 1e-12).then(|| d.vertices.iter().map(|v| dot(x, v)).fold(f64::NEG_INFINITY, f64::max));

    let mut rng = Rng::seed(seed);
    let mixture = |rng: &mut Rng, s: &BaseSection| -> Vec<f64> {
        let w = rng.simplex(s.vertices.len());
        s.vertices.iter().zip(&w).fold(vec![0.0; s.dim()], |acc, (v, wi)| axpy(*wi, v, &acc))
    };
    let approach = |target: &[f64], from: &[f64], eps: f64| axpy(1.0 - eps, target, &from.iter().map(|v| eps * v).collect::<Vec<_>>());
    let eps_ladder = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

    let mut inf_side = f64::INFINITY;
    for _ in 0..samples {
        let p = mixture(&mut rng, b);
        inf_side = inf_side.min(b.order_unit_norm(x, &p));
    }
    if let Some(c) = centre.filter(|_| norm > 0.0) {
        let c: Vec<f64> = c.iter().map(|v| v / norm).collect();
        for eps in eps_ladder {
            inf_side = inf_side.min(b.order_unit_norm(x, &approach(&c, &b.interior_point, eps)));
        }
    }

    let mut sup_side = f64::NEG_INFINITY;
    for _ in 0..samples {
        let p = mixture(&mut rng, &d);
        sup_side = sup_side.max(cone_base_norm(&b.cone, &p, x)?);
    }
    let (_, best) = d.ball_sup(x)?;
    for eps in eps_ladder {
        sup_side = sup_side.max(cone_base_norm(&b.cone, &approach(&best, &d.interior_point, eps), x)?);
    }
    Ok(SandwichReport { norm, vertex_sup, inf_side, sup_side, samples })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosureReport {
    pub trials: usize,
    /// Largest distance from `t b₁ − s b₂` to the vertex hull of `B`.
    pub worst_distance: f64,
    /// Largest `s` used.
    pub largest_step: f64,
}

/// For random `b₁, b₂ ∈ B` and `t − s = 1` with `t b₁ − s b₂ ∈ Q`, checks
/// that `t b₁ − s b₂` lies in `B`.
pub fn section_closure_check(b: &BaseSection, trials: usize, seed: u64) -> Result<ClosureReport> {
    let mut rng = Rng::seed(seed);
    let mut worst = 0.0f64;
    let mut largest = 0.0f64;
    for _ in 0..trials {
        let w1 = rng.simplex(b.vertices.len());
        let w2 = rng.simplex(b.vertices.len());
        let p1 = b.vertices.iter().zip(&w1).fold(vec![0.0; b.dim()], |acc, (v, w)| axpy(*w, v, &acc));
        let p2 = b.vertices.iter().zip(&w2).fold(vec![0.0; b.dim()], |acc, (v, w)| axpy(*w, v, &acc));
        let mut s_max = 10.0f64;
        for f in &b.cone.facets {
            let (a1, a2) = (dot(f, &p1), dot(f, &p2));
            if a2 > a1 {
                s_max = s_max.min(a1 / (a2 - a1));
            }
        }
        let s = rng.uniform() * s_max;
        let x = axpy(-s, &p2, &p1.iter().map(|v| (1.0 + s) * v).collect::<Vec<_>>());
        worst = worst.max(b.hull_distance(&x)?);
        largest = largest.max(s);
    }
    Ok(ClosureReport { trials, worst_distance: worst, largest_step: largest })
}

// ---------------------------------------------------------------------------
// Random instances and the classical bridge
// ---------------------------------------------------------------------------

/// Random proper cone in `R^n` with `extra` generators beyond `n`, a base
/// functional near its axis and a random subspace of dimension `sub_dim`
/// through an interior point.
pub fn random_section(rng: &mut Rng, n: usize, extra: usize, sub_dim: usize) -> Result<BaseSection> {
    let axis = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..100 {
        let gens: Vec<Vec<f64>> = (0..n + extra)
            .map(|_| {
                let r: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
                let r = unit(&r).expect("gaussian vector");
                axpy(0.8 * rng.uniform(), &r, &axis)
            })
            .collect();
        let Ok(cone) = PolyCone::from_generators(gens) else { continue };
        let noise: Vec<f64> = (0..n).map(|_| 0.1 * rng.normal()).collect();
        let functional = axpy(1.0, &noise, &axis);
        let centre = cone.generators.iter().fold(vec![0.0; n], |acc, g| axpy(1.0, g, &acc));
        let mut span = vec![centre];
        for _ in 1..sub_dim.clamp(1, n) {
            span.push((0..n).map(|_| rng.normal()).collect());
        }
        if let Ok(b) = BaseSection::new(cone, functional, &span) {
            return Ok(b);
        }
    }
    Err(Error::Invalid("could not draw a random section".into()))
}

/// The channel base of classical maps `D_n → D_m`: column-stochastic
/// `m × n` matrices inside the orthant, vectorized row-major (`i * n + j`).
pub fn classical_channel_section(n: usize, m: usize) -> Result<BaseSection> {
    let dim = n * m;
    let cone = PolyCone::orthant(dim)?;
    let functional = vec![1.0 / n as f64; dim];
    // matrices whose columns all have the same sum
    let mut span = vec![vec![1.0; dim]];
    for j in 0..n {
        for i in 0..m.saturating_sub(1) {
            let mut v = vec![0.0; dim];
            v[i * n + j] = 1.0;
            v[(i + 1) * n + j] = -1.0;
            span.push(v);
        }
    }
    BaseSection::new(cone, functional, &span)
}

fn classical_map(x: &DMatrix<f64>) -> HermitianMap {
    let (m, n) = (x.nrows(), x.ncols());
    let diag: Vec<f64> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[(i, j)]).collect();
    let choi = CMat::from_fn(m * n, m * n, |r, c| if r == c { C64::new(diag[r], 0.0) } else { C64::new(0.0, 0.0) });
    HermitianMap::from_choi_projected(&BlockAlgebra::diagonal(n), &BlockAlgebra::diagonal(m), &choi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BridgeReport {
    pub diamond_section: f64,
    pub diamond_sdp: f64,
    pub dual_section: f64,
    pub dual_sdp: f64,
}

impl BridgeReport {
    pub fn max_gap(&self) -> f64 {
        (self.diamond_section - self.diamond_sdp).abs().max((self.dual_section - self.dual_sdp).abs())
    }
}

/// Compares the section norms of a classical map `D_n → D_m` (an `m × n`
/// real matrix) with the diamond and dual-diamond SDP values.
pub fn classical_bridge(x: &DMatrix<f64>) -> Result<BridgeReport> {
    let (m, n) = (x.nrows(), x.ncols());
    let b = classical_channel_section(n, m)?;
    let v: Vec<f64> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[(i, j)]).collect();
    let diamond_section = b.norm(&v)?;
    let dual_section = dual_section(&b)?.norm(&v)?;
    let phi = classical_map(x);
    let psi = classical_map(&x.transpose());
    let diamond_sdp = diamond_norm(Family::Cp, &phi)?.value();
    let dual_sdp = dual_diamond_norm(Family::Cp, &psi)?.value();
    Ok(BridgeReport { diamond_section, diamond_sdp, dual_section, dual_sdp })
}
