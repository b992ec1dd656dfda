//! Centered Gaussian moments with exact rational covariance.
//!
//! Two independent routes to `E[P(x)]` for a polynomial `P`:
//! pair partitions (Isserlis/Wick) on each monomial, and the heat operator
//! `E[P] = (exp(½ Σ^{jk} ∂_j ∂_k) P)(0)`.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, Rational};
use crate::series::TruncatedSeries;

/// Covariance `Σ^{ij}` of a centered normal distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec {
    covariance: Matrix,
}

impl MomentSpec {
    pub fn new(covariance: Matrix) -> Result<Self> {
        if !covariance.is_symmetric() {
            return Err(Error::NotPositiveDefinite { minor: 0 });
        }
        if let Some(minor) = covariance.first_nonpositive_minor() {
            return Err(Error::NotPositiveDefinite { minor });
        }
        Ok(MomentSpec { covariance })
    }

    /// Covariance `f^{ij}` of the Gaussian weight `exp(-½ f_ij x^i x^j)`.
    pub fn from_hessian(hessian: &Matrix) -> Result<Self> {
        if let Some(minor) = hessian.first_nonpositive_minor() {
            return Err(Error::NotPositiveDefinite { minor });
        }
        Self::new(hessian.inverse()?)
    }

    pub fn dim(&self) -> usize {
        self.covariance.size()
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// `Σ_{ij}`, the precision matrix.
    pub fn precision(&self) -> Matrix {
        self.covariance.inverse().expect("positive-definite")
    }
}

/// `E[x^{i_1}…x^{i_m}]` for 1-based labels: the sum over all pair partitions
/// of `Π Σ^{kk'}`. Partitions are grouped by the partner of the first index,
/// with the remaining multiset memoized.
pub fn gaussian_moment(spec: &MomentSpec, labels: &[usize]) -> Rational {
    let mut exps = vec![0u32; spec.dim()];
    for &l in labels {
        exps[l - 1] += 1;
    }
    MomentTable::new(spec).moment(&exps)
}

/// The same sum, enumerating every perfect matching individually. Exponential;
/// kept as a literal cross-check for small `m`.
pub fn gaussian_moment_by_enumeration(spec: &MomentSpec, labels: &[usize]) -> Rational {
    fn rec(spec: &MomentSpec, rest: &mut Vec<usize>) -> Rational {
        if rest.is_empty() {
            return rational::int(1);
        }
        if rest.len() % 2 == 1 {
            return Rational::zero();
        }
        let first = rest.remove(0);
        let mut total = Rational::zero();
        for j in 0..rest.len() {
            let partner = rest.remove(j);
            let cov = &spec.covariance[(first - 1, partner - 1)];
            if !cov.is_zero() {
                total += cov * rec(spec, rest);
            }
            rest.insert(j, partner);
        }
        rest.insert(0, first);
        total
    }
    rec(spec, &mut labels.to_vec())
}

/// Memoized monomial moments `E[x^α]` for one covariance.
pub struct MomentTable<'a> {
    spec: &'a MomentSpec,
    memo: HashMap<Vec<u32>, Rational>,
}

impl<'a> MomentTable<'a> {
    pub fn new(spec: &'a MomentSpec) -> Self {
        MomentTable { spec, memo: HashMap::new() }
    }

    pub fn moment(&mut self, exps: &[u32]) -> Rational {
        let deg: u32 = exps.iter().sum();
        if deg == 0 {
            return rational::int(1);
        }
        if deg % 2 == 1 {
            return Rational::zero();
        }
        if let Some(v) = self.memo.get(exps) {
            return v.clone();
        }
        let first = exps.iter().position(|&e| e > 0).expect("nonzero degree");
        let mut rest = exps.to_vec();
        rest[first] -= 1;
        let mut total = Rational::zero();
        for j in 0..exps.len() {
            let partners = rest[j];
            if partners == 0 {
                continue;
            }
            let cov = self.spec.covariance[(first, j)].clone();
            if cov.is_zero() {
                continue;
            }
            let mut sub = rest.clone();
            sub[j] -= 1;
            total += cov * rational::int(partners as i64) * self.moment(&sub);
        }
        self.memo.insert(exps.to_vec(), total.clone());
        total
    }

    /// `E[P]` by summing pair-partition moments over the monomials of `P`.
    pub fn expectation(&mut self, p: &TruncatedSeries) -> Rational {
        p.terms().fold(Rational::zero(), |acc, (m, c)| acc + c * self.moment(m.exponents()))
    }
}

/// `E[P]` via pair partitions.
pub fn expectation_by_pairings(spec: &MomentSpec, p: &TruncatedSeries) -> Rational {
    MomentTable::new(spec).expectation(p)
}

/// `½ Σ^{jk} ∂_j ∂_k P`, keeping the jet order of `P` (polynomial semantics).
pub fn heat_generator(spec: &MomentSpec, p: &TruncatedSeries) -> TruncatedSeries {
    let dim = p.dim();
    let n = p.trunc();
    let mut out = TruncatedSeries::zero(dim, n);
    if n < 2 {
        return out;
    }
    let half = rational::ratio(1, 2);
    for j in 0..dim {
        let dj = p.derivative(j).expect("trunc ≥ 1");
        for k in 0..dim {
            let s = &spec.covariance[(j, k)];
            if s.is_zero() {
                continue;
            }
            let djk = dj.derivative(k).expect("trunc ≥ 1").as_polynomial_to(n);
            out = &out + &djk.scale(&(s * &half));
        }
    }
    out
}

/// `E[P] = Σ_m (L^m P)(0) / m!` with `L` the heat generator.
pub fn expectation_by_heat(spec: &MomentSpec, p: &TruncatedSeries) -> Rational {
    let mut acc = p.clone();
    let mut total = acc.constant_term().clone();
    let mut m = 0i64;
    while !acc.is_zero() {
        m += 1;
        acc = heat_generator(spec, &acc).scale(&rational::ratio(1, m));
        total += acc.constant_term();
    }
    total
}

/// Jet of the moment generating function `Σ_α E[x^α] t^α / α!` through `trunc`.
pub fn moment_generating_series(spec: &MomentSpec, trunc: usize) -> TruncatedSeries {
    let dim = spec.dim();
    let mut table = MomentTable::new(spec);
    let mut out = TruncatedSeries::zero(dim, trunc);
    for exps in all_monomials(dim, trunc) {
        let m = table.moment(&exps);
        if m.is_zero() {
            continue;
        }
        let fact: num_bigint::BigInt = exps.iter().map(|&e| rational::factorial(e as usize)).product();
        out.add_term(&exps, m / Rational::from_integer(fact));
    }
    out
}

fn all_monomials(dim: usize, trunc: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    rec(dim, trunc as u32, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn spec2() -> MomentSpec {
        MomentSpec::new(Matrix::from_rows(vec![vec![int(2), ratio(1, 2)], vec![ratio(1, 2), int(1)]]).unwrap())
            .unwrap()
    }

    #[test]
    fn moment_examples() {
        let s = spec2();
        assert_eq!(gaussian_moment(&s, &[1, 2]), ratio(1, 2));
        assert_eq!(gaussian_moment(&s, &[1, 1]), int(2));
        let id = MomentSpec::new(Matrix::identity(2)).unwrap();
        assert_eq!(gaussian_moment(&id, &[1, 1, 1, 1]), int(3));
        assert_eq!(gaussian_moment(&s, &[1, 2, 2]), int(0));
        assert_eq!(gaussian_moment(&s, &[]), int(1));
    }

    #[test]
    fn memoized_matches_enumeration() {
        let s = spec2();
        for labels in [vec![1, 1, 2, 2], vec![1, 2, 1, 2, 2, 2], vec![1, 1, 1, 1, 2, 2, 2, 2], vec![2; 6]] {
            assert_eq!(gaussian_moment(&s, &labels), gaussian_moment_by_enumeration(&s, &labels), "{labels:?}");
        }
    }

    #[test]
    fn heat_matches_pairings_on_polynomial() {
        let s = spec2();
        let p = TruncatedSeries::from_terms(
            2,
            6,
            vec![
                (vec![0, 0], int(3)),
                (vec![2, 0], int(1)),
                (vec![1, 1], int(-2)),
                (vec![3, 1], ratio(1, 3)),
                (vec![2, 4], int(5)),
                (vec![1, 2], int(7)),
            ],
        )
        .unwrap();
        assert_eq!(expectation_by_heat(&s, &p), expectation_by_pairings(&s, &p));
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let bad = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(1)]]).unwrap();
        assert!(MomentSpec::new(bad).is_err());
    }
}
