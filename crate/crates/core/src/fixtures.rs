//! Seeded random instances with small rational coefficients.
//!
//! Morse functions have quadratic part `xᵀ MᵀM x` with `M` upper triangular
//! and random maps have upper-triangular linear parts, so every Hessian that
//! appears (before or after transport) has pivots that are rational squares.

use num_traits::Zero;
use rand::Rng;

use crate::matrix::Matrix;
use crate::phylon::{PairInstance, PhylonMap};
use crate::rational::{self, Rational};
use crate::series::TruncatedSeries;
use crate::tensor::sorted_tuples;

/// Knobs for random instances.
#[derive(Clone, Copy, Debug)]
pub struct FixtureShape {
    pub dim: usize,
    pub trunc: usize,
    /// Probability that a given higher-order monomial gets a nonzero coefficient.
    pub density: f64,
    /// Numerators are drawn from `-max_num..=max_num`.
    pub max_num: i64,
    /// Denominators are drawn from `1..=max_den`.
    pub max_den: i64,
}

impl FixtureShape {
    pub fn new(dim: usize, trunc: usize) -> Self {
        FixtureShape { dim, trunc, density: 0.3, max_num: 3, max_den: 2 }
    }
}

pub fn small_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rational::ratio(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn nonzero_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    loop {
        let r = small_rational(rng, max_num, max_den);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Upper-triangular matrix with nonzero diagonal.
pub fn upper_triangular<R: Rng>(rng: &mut R, shape: &FixtureShape) -> Matrix {
    Matrix::from_fn(shape.dim, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => nonzero_rational(rng, shape.max_num, shape.max_den),
        std::cmp::Ordering::Less => small_rational(rng, shape.max_num, shape.max_den),
        std::cmp::Ordering::Greater => Rational::zero(),
    })
}

fn exponents(dim: usize, labels: &[usize]) -> Vec<u32> {
    let mut e = vec![0u32; dim];
    for &l in labels {
        e[l - 1] += 1;
    }
    e
}

/// Sparse random terms of degrees `lo..=hi`.
pub fn random_terms<R: Rng>(rng: &mut R, shape: &FixtureShape, lo: usize, hi: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(shape.dim, shape.trunc);
    for degree in lo..=hi.min(shape.trunc) {
        for labels in sorted_tuples(shape.dim, degree) {
            if rng.gen_bool(shape.density) {
                s.add_term(&exponents(shape.dim, &labels), small_rational(rng, shape.max_num, shape.max_den));
            }
        }
    }
    s
}

/// `xᵀ MᵀM x + (random terms of degree ≥ 3)`.
pub fn random_morse<R: Rng>(rng: &mut R, shape: &FixtureShape) -> TruncatedSeries {
    let m = upper_triangular(rng, shape);
    let mut f = random_terms(rng, shape, 3, shape.trunc);
    let s = &m.transpose() * &m;
    for i in 0..shape.dim {
        for j in i..shape.dim {
            let c = if i == j { s[(i, j)].clone() } else { &s[(i, j)] * rational::int(2) };
            let mut e = vec![0u32; shape.dim];
            e[i] += 1;
            e[j] += 1;
            f.add_term(&e, c);
        }
    }
    f
}

/// A density with nonzero constant term.
pub fn random_density<R: Rng>(rng: &mut R, shape: &FixtureShape) -> TruncatedSeries {
    let mut b = random_terms(rng, shape, 1, shape.trunc);
    b.add_term(&vec![0; shape.dim], nonzero_rational(rng, shape.max_num, shape.max_den));
    b
}

pub fn random_pair<R: Rng>(rng: &mut R, f_shape: &FixtureShape, b_shape: &FixtureShape) -> PairInstance {
    PairInstance::new(random_morse(rng, f_shape), random_density(rng, b_shape)).expect("valid by construction")
}

/// A phylon map with upper-triangular linear part and sparse higher terms.
pub fn random_phylon<R: Rng>(rng: &mut R, shape: &FixtureShape) -> PhylonMap {
    let a = upper_triangular(rng, shape);
    let linear = PhylonMap::linear(&a, shape.trunc).expect("nonzero diagonal");
    let components = linear
        .into_components()
        .into_iter()
        .map(|c| &c + &random_terms(rng, shape, 2, shape.trunc))
        .collect();
    PhylonMap::new(components).expect("invertible linear part")
}

/// Adds `ε (x·x)^{k/2}` for even `k`; changes `Λ_k` and no lower invariant
/// of a pair whose function is `q`-normalizable.
pub fn radial_bump(b: &TruncatedSeries, k: usize, eps: &Rational) -> TruncatedSeries {
    assert!(k.is_multiple_of(2), "radial bumps have even degree");
    let dim = b.dim();
    let r2 = crate::series::standard_quadratic(dim, b.trunc());
    let bump = if k == 0 { TruncatedSeries::one(dim, b.trunc()) } else { r2.pow(k / 2) };
    b + &bump.scale(eps)
}
