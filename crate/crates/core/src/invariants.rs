//! The Laplace-expansion invariants `Λ_i(f, b)`.
//!
//! With `f̃ = f - ½ f_ij x^i x^j` and `(f^{ij})` the inverse Hessian,
//!
//! ```text
//! Λ_i = (2π)^{d/2} det(f_ij)^{-1/2} · P_i,
//! P_i = Σ_l (-1)^l / l! · E[ degree-(i+2l) part of f̃^l · b ]
//! ```
//!
//! where `E` is the expectation under the centered Gaussian with covariance
//! `f^{ij}`. In tensor form this is the sum over `r + s - 2l = i` of
//! `(-1)^l/(l! r! s!) (f̃^l)_{i_1…i_r} b_{j_1…j_s}` contracted by all pairings
//! of the `r + s` indices. Only `jet_{i+2}(f)` and `jet_i(b)` enter.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gaussian::{self, MomentSpec, MomentTable};
use crate::phylon::{hessian, PairInstance};
use crate::rational::{self, Rational};
use crate::series::TruncatedSeries;
use crate::tensor::{complete_trace, SymTensor};

/// `Λ_i = (2π)^{d/2} · det_f^{-1/2} · rational_part`, kept in factored form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledInvariant {
    pub dim: usize,
    pub order: usize,
    pub det_f: Rational,
    pub rational_part: Rational,
}

impl ScaledInvariant {
    pub fn to_f64(&self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        two_pi.powf(self.dim as f64 / 2.0) / rational::to_f64(&self.det_f).sqrt()
            * rational::to_f64(&self.rational_part)
    }

    /// Exact equality of the represented real numbers.
    pub fn same_value(&self, other: &ScaledInvariant) -> bool {
        self.dim == other.dim
            && self.rational_part.signum() == other.rational_part.signum()
            && &self.rational_part * &self.rational_part * &other.det_f
                == &other.rational_part * &other.rational_part * &self.det_f
    }
}

/// `Λ_0 … Λ_max_order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantSequence {
    pub dim: usize,
    pub values: Vec<ScaledInvariant>,
}

impl InvariantSequence {
    pub fn max_order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

/// Which expectation routine evaluates the Gaussian contractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ContractionRoute {
    /// Sum over pair partitions of every monomial, memoized per exponent vector.
    #[default]
    PairPartitions,
    /// `exp(½ f^{jk} ∂_j ∂_k)` applied to each homogeneous part.
    HeatOperator,
}

fn check_orders(pair: &PairInstance, max_order: usize) -> Result<()> {
    if pair.f.trunc() < max_order + 2 {
        return Err(Error::JetOrderExceeded { requested: max_order + 2, available: pair.f.trunc() });
    }
    if pair.b.trunc() < max_order {
        return Err(Error::JetOrderExceeded { requested: max_order, available: pair.b.trunc() });
    }
    Ok(())
}

/// Exact rational parts `P_0 … P_max_order`.
pub fn rational_parts(pair: &PairInstance, max_order: usize, route: ContractionRoute) -> Result<Vec<Rational>> {
    check_orders(pair, max_order)?;
    let dim = pair.dim();
    let spec = MomentSpec::from_hessian(&pair.hessian())?;
    let f = pair.f.jet(max_order + 2)?;
    let f_tilde = &f - &f.homogeneous_part(2)?;
    let b = pair.b.jet(max_order)?;
    let mut table = MomentTable::new(&spec);
    let mut parts = vec![Rational::zero(); max_order + 1];

    // f̃^l · b, needed through degree max_order + 2l; f̃ has order ≥ 3 so l ≤ max_order.
    let mut f_power = TruncatedSeries::one(dim, max_order);
    let mut l_factorial = BigInt::one();
    for l in 0..=max_order {
        if l > 0 {
            l_factorial *= BigInt::from(l);
            let top = max_order + 2 * l;
            f_power = &f_power.as_polynomial_to(top) * &f_tilde.as_polynomial_to(top);
            if f_power.is_zero() {
                break;
            }
        }
        let top = max_order + 2 * l;
        let product = &f_power.as_polynomial_to(top) * &b.as_polynomial_to(top);
        let weight = Rational::new(if l % 2 == 0 { BigInt::one() } else { -BigInt::one() }, l_factorial.clone());
        for (i, part) in parts.iter_mut().enumerate() {
            let degree = i + 2 * l;
            if degree < 3 * l {
                continue;
            }
            let h = product.homogeneous_part(degree)?;
            if h.is_zero() {
                continue;
            }
            let e = match route {
                ContractionRoute::HeatOperator => gaussian::expectation_by_heat(&spec, &h),
                ContractionRoute::PairPartitions => table.expectation(&h),
            };
            *part += &weight * e;
        }
    }
    Ok(parts)
}

/// `Λ_i(f, b)` from the general formula.
pub fn lambda_general(pair: &PairInstance, i: usize) -> Result<ScaledInvariant> {
    let parts = rational_parts(pair, i, ContractionRoute::default())?;
    Ok(ScaledInvariant { dim: pair.dim(), order: i, det_f: hessian(&pair.f).det(), rational_part: parts[i].clone() })
}

/// `Λ_0 … Λ_max_order` in one pass.
pub fn invariant_sequence(pair: &PairInstance, max_order: usize) -> Result<InvariantSequence> {
    invariant_sequence_via(pair, max_order, ContractionRoute::default())
}

pub fn invariant_sequence_via(
    pair: &PairInstance,
    max_order: usize,
    route: ContractionRoute,
) -> Result<InvariantSequence> {
    let det_f = pair.hessian().det();
    let parts = rational_parts(pair, max_order, route)?;
    let dim = pair.dim();
    let values = parts
        .into_iter()
        .enumerate()
        .map(|(order, rational_part)| ScaledInvariant { dim, order, det_f: det_f.clone(), rational_part })
        .collect();
    Ok(InvariantSequence { dim, values })
}

/// `Λ_i(b) = Λ_i(q, b) = π^{d/2} ctr_i(b) / ((i/2)! 2^i)` for `q = ‖x‖²`,
/// reported with `det_f = 2^d`.
pub fn lambda_reduced(b: &TruncatedSeries, i: usize) -> Result<ScaledInvariant> {
    if b.trunc() < i {
        return Err(Error::JetOrderExceeded { requested: i, available: b.trunc() });
    }
    let dim = b.dim();
    let det_f = Rational::from_integer(BigInt::one() << dim);
    let rational_part = if i % 2 == 1 {
        Rational::zero()
    } else {
        let ctr = complete_trace(&SymTensor::from_series(b, i)?);
        ctr / Rational::from_integer(rational::factorial(i / 2) * (BigInt::one() << i))
    };
    Ok(ScaledInvariant { dim, order: i, det_f, rational_part })
}

/// Exact equality of two invariant sequences without forming square roots:
/// `P_i(a)² det_f(c) = P_i(c)² det_f(a)` with matching signs, for every `i`.
pub fn invariant_equal(a: &InvariantSequence, c: &InvariantSequence) -> Result<bool> {
    Ok(first_invariant_difference(a, c)?.is_none())
}

/// The lowest order at which two sequences differ.
pub fn first_invariant_difference(a: &InvariantSequence, c: &InvariantSequence) -> Result<Option<usize>> {
    if a.dim != c.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: c.dim });
    }
    if a.max_order() != c.max_order() {
        return Err(Error::JetOrderExceeded { requested: a.max_order(), available: c.max_order() });
    }
    Ok(a.values.iter().zip(&c.values).position(|(x, y)| !x.same_value(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::series::standard_quadratic;

    fn pair(f: TruncatedSeries, b: TruncatedSeries) -> PairInstance {
        PairInstance::new(f, b).unwrap()
    }

    #[test]
    fn order_zero_is_b0() {
        let f = TruncatedSeries::from_terms(2, 4, vec![(vec![2, 0], int(1)), (vec![0, 2], int(3)), (vec![3, 0], int(1))])
            .unwrap();
        let b = TruncatedSeries::from_terms(2, 2, vec![(vec![0, 0], ratio(5, 2)), (vec![1, 0], int(1))]).unwrap();
        let l0 = lambda_general(&pair(f, b), 0).unwrap();
        assert_eq!(l0.rational_part, ratio(5, 2));
        assert_eq!(l0.det_f, int(12));
    }

    #[test]
    fn closed_form_gaussian_anchor() {
        // ∫ exp(-n x²)(1 + x²) dx = √(π/n)(1 + 1/(2n)) so Λ_2 = √π/2.
        let f = TruncatedSeries::monomial(1, 4, &[2], int(1));
        let b = TruncatedSeries::from_terms(1, 2, vec![(vec![0], int(1)), (vec![2], int(1))]).unwrap();
        let l2 = lambda_general(&pair(f, b.clone()), 2).unwrap();
        assert_eq!(l2.rational_part, ratio(1, 2));
        assert_eq!(l2.det_f, int(2));
        assert!((l2.to_f64() - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        assert!(lambda_reduced(&b, 2).unwrap().same_value(&l2));
    }

    #[test]
    fn reduced_examples() {
        let one = TruncatedSeries::one(3, 4);
        let l0 = lambda_reduced(&one, 0).unwrap();
        assert!((l0.to_f64() - std::f64::consts::PI.powf(1.5)).abs() < 1e-12);
        assert_eq!(lambda_reduced(&one, 3).unwrap().rational_part, int(0));
        assert!(lambda_reduced(&one, 5).is_err());
    }

    #[test]
    fn odd_orders_vanish() {
        let f = TruncatedSeries::from_terms(1, 7, vec![(vec![2], int(1)), (vec![3], int(1)), (vec![5], int(2))]).unwrap();
        let b = TruncatedSeries::from_terms(1, 5, (0..6).map(|k| (vec![k], int(k as i64 + 1)))).unwrap();
        let seq = invariant_sequence(&pair(f, b), 5).unwrap();
        for v in seq.values.iter().filter(|v| v.order % 2 == 1) {
            assert!(v.rational_part.is_zero());
        }
    }

    #[test]
    fn equality_is_exact() {
        let q = standard_quadratic(2, 4);
        let s1 = invariant_sequence(&pair(q.clone(), TruncatedSeries::one(2, 2)), 2).unwrap();
        let s2 = invariant_sequence(&pair(q, TruncatedSeries::constant(2, 2, int(2))), 2).unwrap();
        assert!(invariant_equal(&s1, &s1).unwrap());
        assert!(!invariant_equal(&s1, &s2).unwrap());
        assert_eq!(first_invariant_difference(&s1, &s2).unwrap(), Some(0));
        let neg = ScaledInvariant { dim: 1, order: 0, det_f: int(1), rational_part: int(-1) };
        let pos = ScaledInvariant { dim: 1, order: 0, det_f: int(1), rational_part: int(1) };
        assert!(!neg.same_value(&pos));
        let scaled = ScaledInvariant { dim: 1, order: 0, det_f: int(4), rational_part: int(2) };
        assert!(scaled.same_value(&pos));
    }

    #[test]
    fn insufficient_jets() {
        let f = TruncatedSeries::monomial(1, 3, &[2], int(1));
        let p = pair(f, TruncatedSeries::one(1, 4));
        assert!(matches!(lambda_general(&p, 2), Err(Error::JetOrderExceeded { .. })));
    }
}
