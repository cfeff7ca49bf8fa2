//! Fixed benchmark instances, shared by the benches in `benches/`.

use chandef::ovs::{random_section, BaseSection};
use chandef::{HermitianMap, Rng};

/// A random Hermitian map and a random channel with the same dimensions.
pub fn map_pair(d_in: usize, d_out: usize, seed: u64) -> (HermitianMap, HermitianMap) {
    let mut rng = Rng::seed(seed);
    (rng.hermitian_map(d_in, d_out), rng.channel(d_in, d_out))
}

/// Two random channels `A → B`.
pub fn channel_pair(d_in: usize, d_out: usize, seed: u64) -> (HermitianMap, HermitianMap) {
    let mut rng = Rng::seed(seed);
    (rng.channel(d_in, d_out), rng.channel(d_in, d_out))
}

/// A random polyhedral base section in `R^n` with a vector to measure.
pub fn section(n: usize, seed: u64) -> (BaseSection, Vec<f64>) {
    let mut rng = Rng::seed(seed);
    let b = random_section(&mut rng, n, 3, n).expect("random section");
    let x = (0..n).map(|_| rng.normal()).collect();
    (b, x)
}
