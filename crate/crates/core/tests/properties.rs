//! Invariants checked on randomly seeded instances.

use chandef::cones::{cp_membership, Family};
use chandef::deficiency::{self, DeficiencyOptions};
use chandef::hmap::{adjoint, compose, pairing, tensor_map};
use chandef::matops::{linalg, partial_trace, tensor};
use chandef::norms::{diamond_norm, dual_diamond_norm};
use chandef::ovs::{self, random_section, BaseSection};
use chandef::{HermitianMap, Rng, Side};
use proptest::prelude::*;

fn section(seed: u64, n: usize) -> BaseSection {
    let mut rng = Rng::seed(seed);
    let extra = rng.index(4);
    let sub = 1 + rng.index(n);
    random_section(&mut rng, n, extra, sub).unwrap()
}

fn vector(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

fn light() -> ProptestConfig {
    ProptestConfig { cases: 16, ..ProptestConfig::default() }
}

proptest! {
    #[test]
    fn partial_trace_undoes_tensor(seed in any::<u64>(), d1 in 1usize..4, d2 in 1usize..4) {
        let mut rng = Rng::seed(seed);
        let (a, b) = (rng.state(d1), rng.state(d2));
        let ab = tensor(a.op(), b.op());
        let first = partial_trace(&ab, d1, d2, Side::Second).unwrap();
        let second = partial_trace(&ab, d1, d2, Side::First).unwrap();
        prop_assert!(linalg::max_abs(&(first.mat() - a.mat())) < 1e-12);
        prop_assert!(linalg::max_abs(&(second.mat() - b.mat())) < 1e-12);
    }

    #[test]
    fn trace_norm_bounds_trace_and_frobenius(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = Rng::seed(seed);
        let h = rng.hermitian(d);
        prop_assert!(h.trace().abs() <= h.trace_norm() + 1e-12);
        prop_assert!(h.frobenius() <= h.trace_norm() + 1e-12);
        prop_assert!(h.trace_norm() <= (d as f64).sqrt() * h.frobenius() + 1e-12);
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let (a, b, c) = (rng.hermitian_map(2, 3), rng.hermitian_map(3, 2), rng.hermitian_map(2, 2));
        let left = compose(&c, &compose(&b, &a).unwrap()).unwrap();
        let right = compose(&compose(&c, &b).unwrap(), &a).unwrap();
        prop_assert!(linalg::max_abs(&(left.choi_mat() - right.choi_mat())) < 1e-10);
    }

    #[test]
    fn adjoint_reverses_composition(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let (a, b) = (rng.hermitian_map(2, 3), rng.hermitian_map(3, 2));
        let lhs = adjoint(&compose(&b, &a).unwrap());
        let rhs = compose(&adjoint(&a), &adjoint(&b)).unwrap();
        prop_assert!(linalg::max_abs(&(lhs.choi_mat() - rhs.choi_mat())) < 1e-10);
    }

    #[test]
    fn pairing_is_symmetric(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let (phi, psi) = (rng.hermitian_map(2, 3), rng.hermitian_map(3, 2));
        prop_assert!((pairing(&phi, &psi).unwrap() - pairing(&psi, &phi).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn channels_and_their_products_are_cp(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let (a, b) = (rng.channel(2, 2), rng.channel(2, 3));
        prop_assert!(cp_membership(&a).is_in());
        prop_assert!(cp_membership(&tensor_map(&a, &b)).is_in());
        prop_assert!(cp_membership(&compose(&b, &a).unwrap()).is_in());
    }
}

proptest! {
    #![proptest_config(light())]

    #[test]
    fn channels_have_unit_norms(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let c = rng.channel(2, 2);
        let d = diamond_norm(Family::Cp, &c).unwrap();
        prop_assert!(d.value_lo <= 1.0 + 1e-7 && d.value_hi >= 1.0 - 1e-7);
        prop_assert!(d.width() <= 1e-6);
    }

    #[test]
    fn diamond_norm_is_a_norm(seed in any::<u64>(), t in -3.0f64..3.0) {
        let mut rng = Rng::seed(seed);
        let (a, b) = (rng.hermitian_map(2, 2), rng.hermitian_map(2, 2));
        let sum = HermitianMap::linear_combination(&[(1.0, &a), (1.0, &b)]).unwrap();
        let (na, nb, ns) = (
            diamond_norm(Family::Cp, &a).unwrap(),
            diamond_norm(Family::Cp, &b).unwrap(),
            diamond_norm(Family::Cp, &sum).unwrap(),
        );
        prop_assert!(ns.value_lo <= na.value_hi + nb.value_hi + 1e-8);
        let scaled = diamond_norm(Family::Cp, &a.scale(t)).unwrap();
        prop_assert!((scaled.value() - t.abs() * na.value()).abs() <= 1e-6 * (1.0 + na.value()));
        prop_assert!(na.value_lo >= 0.0);
    }

    #[test]
    fn dual_diamond_norm_is_subadditive(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let (a, b) = (rng.hermitian_map(2, 2), rng.hermitian_map(2, 2));
        let sum = HermitianMap::linear_combination(&[(1.0, &a), (1.0, &b)]).unwrap();
        let lhs = dual_diamond_norm(Family::Cp, &sum).unwrap().value_lo;
        let rhs = dual_diamond_norm(Family::Cp, &a).unwrap().value_hi + dual_diamond_norm(Family::Cp, &b).unwrap().value_hi;
        prop_assert!(lhs <= rhs + 1e-8);
    }

    #[test]
    fn post_deficiency_is_bounded_and_reflexive(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let opts = DeficiencyOptions { eb_samples: 0, ..Default::default() };
        let (phi, psi) = (rng.channel(2, 2), rng.channel(2, 2));
        let rep = deficiency::post_deficiency(Family::Cp, &phi, &psi, None, &opts).unwrap();
        prop_assert!(rep.eps_lo <= rep.eps_hi + 1e-9);
        prop_assert!(rep.eps_lo >= -1e-9 && rep.eps_hi <= 1.0 + 1e-9);
        let same = deficiency::post_deficiency(Family::Cp, &phi, &phi, None, &opts).unwrap();
        prop_assert!(same.eps_hi <= 1e-6);
    }

    #[test]
    fn post_deficiency_satisfies_triangle_inequality(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let opts = DeficiencyOptions { eb_samples: 0, ..Default::default() };
        let (a, b, c) = (rng.channel(2, 2), rng.channel(2, 2), rng.channel(2, 2));
        let ac = deficiency::post_deficiency(Family::Cp, &a, &c, None, &opts).unwrap();
        let ab = deficiency::post_deficiency(Family::Cp, &a, &b, None, &opts).unwrap();
        let bc = deficiency::post_deficiency(Family::Cp, &b, &c, None, &opts).unwrap();
        prop_assert!(ac.eps_lo <= ab.eps_hi + bc.eps_hi + 1e-6);
    }

    #[test]
    fn post_processing_never_helps(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let opts = DeficiencyOptions { eb_samples: 0, ..Default::default() };
        let (phi, psi, alpha) = (rng.channel(2, 2), rng.channel(2, 2), rng.channel(2, 2));
        let before = deficiency::post_deficiency(Family::Cp, &phi, &psi, None, &opts).unwrap();
        let degraded = compose(&alpha, &psi).unwrap();
        let after = deficiency::post_deficiency(Family::Cp, &phi, &degraded, None, &opts).unwrap();
        prop_assert!(before.eps_lo <= after.eps_hi + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn section_norm_is_a_norm(seed in any::<u64>(), n in 2usize..8, t in -4.0f64..4.0) {
        let b = section(seed, n);
        let mut rng = Rng::seed(seed ^ 1);
        let (x, y) = (vector(&mut rng, n), vector(&mut rng, n));
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let scaled: Vec<f64> = x.iter().map(|a| t * a).collect();
        let (nx, ny) = (b.norm(&x).unwrap(), b.norm(&y).unwrap());
        prop_assert!(nx >= -1e-12);
        prop_assert!(b.norm(&sum).unwrap() <= nx + ny + 1e-8 * (1.0 + nx + ny));
        prop_assert!((b.norm(&scaled).unwrap() - t.abs() * nx).abs() <= 1e-8 * (1.0 + nx.abs()));
        prop_assert!(b.norm(&vec![0.0; n]).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn unit_ball_membership_matches_norm(seed in any::<u64>(), n in 2usize..8) {
        let b = section(seed, n);
        let mut rng = Rng::seed(seed ^ 2);
        let x = vector(&mut rng, n);
        let nx = b.norm(&x).unwrap();
        prop_assume!(nx.is_finite() && nx > 1e-6);
        let inside: Vec<f64> = x.iter().map(|a| a / nx * 0.999).collect();
        let outside: Vec<f64> = x.iter().map(|a| a / nx * 1.001).collect();
        prop_assert!(b.ball_contains(&inside).unwrap());
        prop_assert!(!b.ball_contains(&outside).unwrap());
    }

    #[test]
    fn dual_norm_is_the_ball_supremum(seed in any::<u64>(), n in 2usize..8) {
        let b = section(seed, n);
        let mut rng = Rng::seed(seed ^ 3);
        let x = vector(&mut rng, n);
        prop_assert!(ovs::dual_norm_check(&b, &x).unwrap().gap <= 1e-8);
    }

    #[test]
    fn section_is_closed_under_base_mixtures(seed in any::<u64>(), n in 2usize..8) {
        let b = section(seed, n);
        let r = ovs::section_closure_check(&b, 100, seed).unwrap();
        prop_assert!(r.worst_distance <= 1e-8, "distance {}", r.worst_distance);
    }

    #[test]
    fn sandwich_brackets_the_norm(seed in any::<u64>(), n in 2usize..6) {
        let b = section(seed, n);
        let mut rng = Rng::seed(seed ^ 4);
        let x = b.project(&vector(&mut rng, n));
        let r = ovs::sandwich_check(&b, &x, 1000, seed).unwrap();
        prop_assert!(r.vertex_gap() <= 1e-8);
        prop_assert!(r.inf_side >= r.norm - 1e-8 * (1.0 + r.norm));
        prop_assert!(r.sup_side <= r.norm + 1e-8 * (1.0 + r.norm));
        prop_assert!(r.inf_side - r.sup_side <= 1e-3 * (1.0 + r.norm));
    }
}
