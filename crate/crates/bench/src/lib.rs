//! Deterministic inputs shared by the benchmarks.

use phylon::fixtures::{self, FixtureShape};
use phylon::{PairInstance, PhylonMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A pair with `f` known to `trunc` and `b` to `trunc - 2`, and a map to transport it.
pub fn instance(seed: u64, dim: usize, trunc: usize) -> (PairInstance, PhylonMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = fixtures::random_pair(&mut rng, &FixtureShape::new(dim, trunc), &FixtureShape::new(dim, trunc - 2));
    let psi = fixtures::random_phylon(&mut rng, &FixtureShape::new(dim, trunc));
    (pair, psi)
}

/// `T(X)` for a fixed `X ∈ K`, i.e. a valid right-hand side for `solve_t`.
pub fn solvable_tensor(dim: usize, k: usize) -> phylon::SymTensor {
    use phylon::tensor::{t_contract, KTensor};
    let raw = KTensor::from_fn(dim, k + 2, |i, tail| {
        phylon::rational::int((3 * i + tail.iter().sum::<usize>()) as i64 % 5 - 2)
    });
    let sym = raw.full_symmetrization();
    let x = KTensor::from_fn(dim, k + 2, |i, tail| {
        let mut idx = tail.to_vec();
        idx.push(i);
        raw.get(i, tail) - sym.get(&idx)
    });
    t_contract(&x)
}
