//! Morse reduction to `q = ‖x‖²` and the degree-by-degree equivalence
//! procedure for pairs `(f, b)` in dimension `d > 1`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::invariants::{first_invariant_difference, invariant_sequence};
use crate::matrix::Matrix;
use crate::phylon::{hessian, validate_morse, PairInstance, PhylonMap};
use crate::rational::{self, Rational};
use crate::series::{standard_quadratic, MultiIndex, TruncatedSeries};
use crate::tensor::{solve_t, SymTensor};

/// A map carrying the source pair onto the target through `verified_to`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceWitness {
    pub psi: PhylonMap,
    /// `jet_k(ψb) = jet_k(c)` and `jet_{k+2}(ψf) = jet_{k+2}(g)` were checked.
    pub verified_to: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub witness: Option<EquivalenceWitness>,
    pub failure_order: Option<usize>,
}

impl EquivalenceVerdict {
    fn equivalent(witness: EquivalenceWitness) -> Self {
        EquivalenceVerdict { equivalent: true, witness: Some(witness), failure_order: None }
    }

    fn different(order: usize) -> Self {
        EquivalenceVerdict { equivalent: false, witness: None, failure_order: Some(order) }
    }
}

/// `M` with `Mᵀ M = ½ H`, from `½ H = L D Lᵀ` and `M = √D Lᵀ`.
fn quadratic_factor(f: &TruncatedSeries, sqrt: impl Fn(usize, &Rational) -> Result<Rational>) -> Result<Matrix> {
    let half_h = hessian(f).scale(&rational::ratio(1, 2));
    let (l, pivots) = half_h.ldl()?;
    let roots = pivots.iter().enumerate().map(|(i, p)| sqrt(i + 1, p)).collect::<Result<Vec<_>>>()?;
    let lt = l.transpose();
    Ok(Matrix::from_fn(half_h.size(), |i, j| &roots[i] * &lt[(i, j)]))
}

/// Given `M` with `q(Mx)` the quadratic part of `f`, solves `‖φ̂‖² = f ∘ M⁻¹`
/// degree by degree with `φ̂ = x + …` and returns `φ = φ̂ ∘ M`.
///
/// If `φ̂` is known through degree `k - 2` and `R_k` is the degree-`k` part of
/// `f ∘ M⁻¹ - ‖φ̂‖²`, the degree-`(k-1)` term `v^i = ∂_i R_k / (2k)` satisfies
/// `2 x·v = R_k` by Euler's identity. The top degree of `φ` is fixed by
/// treating `f` as a polynomial one order further.
fn absorb_higher_terms(f: &TruncatedSeries, m: &Matrix) -> Result<PhylonMap> {
    let dim = f.dim();
    let top = f.trunc();
    let n = top + 1;
    let m_inv = PhylonMap::linear(&m.inverse()?, n)?;
    let f_hat = f.as_polynomial_to(n).compose(m_inv.components())?;
    let mut phi_hat: Vec<TruncatedSeries> = (0..dim).map(|i| TruncatedSeries::variable(dim, n, i)).collect();
    // ‖φ̂‖² for the terms found so far
    let mut norm_sq = standard_quadratic(dim, n);
    for k in 3..=n {
        let r = (&f_hat - &norm_sq).homogeneous_part(k)?;
        if r.is_zero() {
            continue;
        }
        let scale = rational::ratio(1, 2 * k as i64);
        for (i, c) in phi_hat.iter_mut().enumerate() {
            let v = r.derivative(i)?.as_polynomial_to(n).scale(&scale);
            if v.is_zero() {
                continue;
            }
            // ‖φ̂ + v e_i‖² = ‖φ̂‖² + 2 φ̂^i v + v²
            let grow = &(&c.scale(&rational::int(2)) + &v) * &v;
            norm_sq = &norm_sq + &grow;
            *c = &*c + &v;
        }
    }
    let lin = PhylonMap::linear(m, n)?;
    PhylonMap::new(phi_hat)?.compose(&lin)?.jet(top)
}

/// `φ` with `q ∘ φ = f` through the jet order of `f`, so that `φf = q`.
///
/// Requires every pivot of `½ f_ij = L D Lᵀ` to be the square of a rational.
pub fn morse_normalize(f: &TruncatedSeries) -> Result<PhylonMap> {
    validate_morse(f)?;
    let m = quadratic_factor(f, |pivot, p| {
        rational::sqrt_exact(p).ok_or_else(|| Error::NonSquarePivot { pivot, value: rational::format(p) })
    })?;
    absorb_higher_terms(f, &m)
}

/// Result of [`morse_normalize_approx`].
#[derive(Clone, Debug, PartialEq)]
pub struct ApproximateMorse {
    pub map: PhylonMap,
    /// Largest coefficient of `f ∘ φ⁻¹ - q` in absolute value.
    pub residual: Rational,
}

/// Morse reduction for arbitrary positive-definite Hessians, with pivot
/// square roots rounded to `bits` binary digits.
pub fn morse_normalize_approx(f: &TruncatedSeries, bits: u32) -> Result<ApproximateMorse> {
    validate_morse(f)?;
    let m = quadratic_factor(f, |_, p| Ok(rational::sqrt_exact(p).unwrap_or_else(|| rational::sqrt_approx(p, bits))))?;
    let map = absorb_higher_terms(f, &m)?;
    let diff = &f.compose(map.inverse().components())? - &standard_quadratic(f.dim(), f.trunc());
    let residual = diff.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(Rational::zero);
    Ok(ApproximateMorse { map, residual })
}

/// `Σ_i x^i ψ^i_{k+1}(x) = 0`: the degree-`(k+1)` part of `ψ - id` is
/// tangent to the spheres, which is the symmetrized condition
/// `δ_{i(j_1} ψ^i_{j_2…j_{k+2})} = 0`.
pub fn satisfies_spherical_condition(psi: &PhylonMap, k: usize) -> Result<bool> {
    let dim = psi.dim();
    let n = k + 2;
    let mut radial = TruncatedSeries::zero(dim, n);
    for (i, c) in psi.components().iter().enumerate() {
        let p = c.homogeneous_part(k + 1)?.as_polynomial_to(n);
        radial = &radial + &(&TruncatedSeries::variable(dim, n, i) * &p);
    }
    Ok(radial.is_zero())
}

/// One step of the spherical normal form: `ψ_k`, the identity through degree
/// `k`, with `ψ_k q = q` and `jet_k(ψ_k b_cur) = jet_k(c_target)`.
///
/// The returned map has jet order `min(b_cur, c_target) + 2`.
pub fn spherical_step(b_cur: &TruncatedSeries, c_target: &TruncatedSeries, k: usize) -> Result<PhylonMap> {
    let dim = b_cur.dim();
    if dim != c_target.dim() {
        return Err(Error::DimensionMismatch { left: dim, right: c_target.dim() });
    }
    if dim <= 1 {
        return Err(Error::OneDimensional);
    }
    let jet = b_cur.trunc().min(c_target.trunc());
    if k > jet {
        return Err(Error::JetOrderExceeded { requested: k, available: jet });
    }
    if k == 0 {
        return Err(Error::JetOrderExceeded { requested: 0, available: jet });
    }
    let b0 = b_cur.constant_term().clone();
    if b0.is_zero() {
        return Err(Error::ZeroDensity);
    }
    let diff = b_cur.jet(jet)?.try_sub(&c_target.jet(jet)?)?;
    if let Some(order) = diff.order() {
        if order < k {
            return Err(Error::LowerJetsDiffer { order: k });
        }
    }
    let n = jet + 2;
    let z = SymTensor::from_series(&diff, k)?.scale(&(Rational::from_integer(1.into()) / &b0));
    if z.is_zero() {
        return Ok(PhylonMap::identity(dim, n));
    }
    // div P = Z as a degree-k polynomial; then (ψ̂ b)_k = B_k - b(0) div P = C_k.
    let x = solve_t(&z)?;
    let mut p: Vec<TruncatedSeries> = (0..dim).map(|i| TruncatedSeries::variable(dim, n, i)).collect();
    for ((i, tail), v) in x.entries() {
        let m = MultiIndex::from_labels(dim, tail)?;
        p[i - 1].add_term(m.exponents(), v / Rational::from_integer(m.factorial()));
    }
    let psi_hat = PhylonMap::new(p)?;
    // ψ̂ q = q + O(2k+2); a Morse correction that is the identity through 2k+1 restores q exactly.
    let f_k = psi_hat.act_on_f(&standard_quadratic(dim, n))?;
    let mu = morse_normalize(&f_k)?;
    mu.compose(&psi_hat)
}

fn check_pair_orders(pair: &PairInstance, degree: usize) -> Result<()> {
    if pair.f.trunc() < degree + 2 {
        return Err(Error::JetOrderExceeded { requested: degree + 2, available: pair.f.trunc() });
    }
    if pair.b.trunc() < degree {
        return Err(Error::JetOrderExceeded { requested: degree, available: pair.b.trunc() });
    }
    Ok(())
}

/// Checks `jet_{degree+2}(ψ f_a) = jet(f_c)` and `jet_degree(ψ b_a) = jet(b_c)`.
pub fn verify_witness(psi: &PhylonMap, a: &PairInstance, c: &PairInstance, degree: usize) -> Result<bool> {
    let f = psi.act_on_f(&a.f)?;
    let b = psi.act_on_b(&a.b)?;
    if f.trunc() < degree + 2 || b.trunc() < degree {
        return Ok(false);
    }
    Ok(f.agrees_through(&c.f, degree + 2)? && b.agrees_through(&c.b, degree)?)
}

/// Decides whether `a` and `c` are equivalent through jets of order `degree`
/// of the densities (and `degree + 2` of the functions), returning either a
/// verified witness `ψ` with `ψa = c` or the first order at which `Λ_i` differ.
pub fn decide_equivalence(a: &PairInstance, c: &PairInstance, degree: usize) -> Result<EquivalenceVerdict> {
    let dim = a.dim();
    if dim != c.dim() {
        return Err(Error::DimensionMismatch { left: dim, right: c.dim() });
    }
    if dim <= 1 {
        return Err(Error::OneDimensional);
    }
    check_pair_orders(a, degree)?;
    check_pair_orders(c, degree)?;

    let la = invariant_sequence(a, degree)?;
    let lc = invariant_sequence(c, degree)?;
    if let Some(order) = first_invariant_difference(&la, &lc)? {
        return Ok(EquivalenceVerdict::different(order));
    }

    let n = degree + 2;
    let a = PairInstance::new(a.f.jet(n)?, a.b.jet(degree)?)?;
    let c = PairInstance::new(c.f.jet(n)?, c.b.jet(degree)?)?;
    let phi_a = morse_normalize(&a.f)?;
    let phi_c = morse_normalize(&c.f)?;
    let mut b_cur = phi_a.act_on_b(&a.b)?.jet(degree)?;
    let c_norm = phi_c.act_on_b(&c.b)?.jet(degree)?;

    if b_cur.constant_term() != c_norm.constant_term() {
        return Ok(EquivalenceVerdict::different(0));
    }
    let mut sigma = PhylonMap::identity(dim, n);
    for k in 1..=degree {
        let step = match spherical_step(&b_cur, &c_norm, k) {
            Ok(step) => step,
            Err(Error::NonzeroCompleteTrace { order }) => return Ok(EquivalenceVerdict::different(order)),
            Err(e) => return Err(e),
        };
        b_cur = step.act_on_b(&b_cur)?.jet(degree)?;
        sigma = step.compose(&sigma)?;
    }

    let psi = phi_c.inverse().compose(&sigma)?.compose(&phi_a)?;
    if !verify_witness(&psi, &a, &c, degree)? {
        return Err(Error::WitnessVerification { order: degree });
    }
    Ok(EquivalenceVerdict::equivalent(EquivalenceWitness { psi, verified_to: degree }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn series(dim: usize, trunc: usize, terms: Vec<(Vec<u32>, Rational)>) -> TruncatedSeries {
        TruncatedSeries::from_terms(dim, trunc, terms).unwrap()
    }

    #[test]
    fn morse_of_q_is_identity() {
        let q = standard_quadratic(3, 5);
        assert_eq!(morse_normalize(&q).unwrap(), PhylonMap::identity(3, 5));
    }

    #[test]
    fn morse_in_one_variable_is_a_square_root() {
        let f = series(1, 5, vec![(vec![2], int(1)), (vec![3], int(1))]);
        let phi = morse_normalize(&f).unwrap();
        let expected = series(1, 5, vec![(vec![1], int(1)), (vec![2], ratio(1, 2)), (vec![3], ratio(-1, 8)), (vec![4], ratio(1, 16)), (vec![5], ratio(-5, 128))]);
        assert_eq!(phi.components()[0], expected);
        assert_eq!(phi.act_on_f(&f).unwrap(), standard_quadratic(1, 5));
    }

    #[test]
    fn morse_reproduces_f() {
        // ½H = [[1, 1], [1, 5]] = L diag(1, 4) Lᵀ
        let f = series(
            2,
            5,
            vec![
                (vec![2, 0], int(1)),
                (vec![1, 1], int(2)),
                (vec![0, 2], int(5)),
                (vec![3, 0], int(1)),
                (vec![1, 2], ratio(-2, 3)),
                (vec![2, 2], int(4)),
            ],
        );
        let phi = morse_normalize(&f).unwrap();
        let q_phi = standard_quadratic(2, 5).compose(phi.components()).unwrap();
        assert_eq!(q_phi, f);
    }

    #[test]
    fn morse_rejects_non_square_pivots() {
        let f = series(1, 3, vec![(vec![2], int(2))]);
        assert!(matches!(morse_normalize(&f), Err(Error::NonSquarePivot { pivot: 1, .. })));
        let approx = morse_normalize_approx(&f, 60).unwrap();
        assert!(approx.residual < ratio(1, 1 << 50));
    }

    #[test]
    fn spherical_step_kills_linear_part() {
        let b = series(2, 2, vec![(vec![0, 0], int(1)), (vec![1, 0], int(1))]);
        let c = TruncatedSeries::one(2, 2);
        let psi = spherical_step(&b, &c, 1).unwrap();
        assert!(psi.kernel_level() >= 1);
        assert!(satisfies_spherical_condition(&psi, 1).unwrap());
        let q = standard_quadratic(2, psi.trunc());
        assert_eq!(psi.act_on_f(&q).unwrap(), q);
        assert!(psi.act_on_b(&b).unwrap().agrees_through(&c, 1).unwrap());
    }

    #[test]
    fn spherical_step_identity_and_trace_error() {
        let b = series(2, 4, vec![(vec![0, 0], int(1)), (vec![1, 1], int(3))]);
        assert!(spherical_step(&b, &b, 2).unwrap().components().iter().zip(PhylonMap::identity(2, 6).components()).all(|(x, y)| x == y));
        let c = series(2, 4, vec![(vec![0, 0], int(1)), (vec![1, 1], int(3)), (vec![2, 0], int(1)), (vec![0, 2], int(1))]);
        assert!(matches!(spherical_step(&b, &c, 2), Err(Error::NonzeroCompleteTrace { order: 2 })));
    }

    #[test]
    fn constant_density_mismatch() {
        let q = standard_quadratic(2, 4);
        let a = PairInstance::new(q.clone(), TruncatedSeries::one(2, 2)).unwrap();
        let c = PairInstance::new(q, TruncatedSeries::constant(2, 2, int(2))).unwrap();
        let v = decide_equivalence(&a, &c, 2).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.failure_order, Some(0));
        let same = decide_equivalence(&a, &a, 2).unwrap();
        assert!(same.equivalent);
        assert!(same.witness.unwrap().psi.components().iter().zip(PhylonMap::identity(2, 4).components()).all(|(x, y)| x == y));
    }

    #[test]
    fn one_dimensional_input_is_rejected() {
        let q = standard_quadratic(1, 4);
        let a = PairInstance::new(q, TruncatedSeries::one(1, 2)).unwrap();
        assert_eq!(decide_equivalence(&a, &a, 2), Err(Error::OneDimensional));
    }
}
