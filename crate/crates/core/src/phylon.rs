//! The phylon group of formal diffeomorphism jets fixing the origin, and its
//! actions on Morse functions `f` and densities `b`.
//!
//! The actions follow the pushforward convention `(ψf)(x) = f(ψ⁻¹(x))` and
//! `(ψb)(x) = b(ψ⁻¹(x)) |det ∂(ψ⁻¹)^i/∂x^j|`, so that `(ψ∘φ)f = ψ(φf)`.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::Rational;
use crate::series::TruncatedSeries;

/// A `dim`-tuple of jets with zero constant term and invertible linear part.
#[derive(Clone, Debug, PartialEq)]
pub struct PhylonMap {
    components: Vec<TruncatedSeries>,
}

impl PhylonMap {
    pub fn new(components: Vec<TruncatedSeries>) -> Result<Self> {
        let dim = components.len();
        let trunc = components.iter().map(|c| c.trunc()).min().unwrap_or(0);
        if dim == 0 {
            return Err(Error::DimensionMismatch { left: 1, right: 0 });
        }
        if trunc == 0 {
            return Err(Error::JetOrderExceeded { requested: 1, available: 0 });
        }
        for (index, c) in components.iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: c.dim() });
            }
            if !c.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm { index });
            }
        }
        let components: Vec<_> = components.into_iter().map(|c| c.as_polynomial_to(trunc)).collect();
        let map = PhylonMap { components };
        if map.linear_part().det().is_zero() {
            return Err(Error::SingularLinearPart);
        }
        Ok(map)
    }

    pub fn identity(dim: usize, trunc: usize) -> Self {
        PhylonMap { components: (0..dim).map(|i| TruncatedSeries::variable(dim, trunc, i)).collect() }
    }

    /// The linear map `x ↦ A x`.
    pub fn linear(a: &Matrix, trunc: usize) -> Result<Self> {
        let dim = a.size();
        let components = (0..dim)
            .map(|i| {
                let mut c = TruncatedSeries::zero(dim, trunc);
                for j in 0..dim {
                    let mut exps = vec![0; dim];
                    exps[j] = 1;
                    c.add_term(&exps, a[(i, j)].clone());
                }
                c
            })
            .collect();
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn trunc(&self) -> usize {
        self.components[0].trunc()
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn into_components(self) -> Vec<TruncatedSeries> {
        self.components
    }

    /// `(ψ^i_j)`: row `i` holds the linear coefficients of component `i`.
    pub fn linear_part(&self) -> Matrix {
        let dim = self.dim();
        Matrix::from_fn(dim, |i, j| {
            let mut exps = vec![0; dim];
            exps[j] = 1;
            self.components[i].coeff(&exps)
        })
    }

    pub fn jet(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::JetOrderExceeded { requested: 0, available: self.trunc() });
        }
        let components = self.components.iter().map(|c| c.jet(k)).collect::<Result<Vec<_>>>()?;
        Ok(PhylonMap { components })
    }

    pub fn as_polynomial_to(&self, n: usize) -> Self {
        PhylonMap { components: self.components.iter().map(|c| c.as_polynomial_to(n.max(1))).collect() }
    }

    /// Group product `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &PhylonMap) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let components = TruncatedSeries::compose_all(&self.components, &other.components)?;
        Ok(PhylonMap { components })
    }

    /// Two-sided inverse, solved degree by degree against the inverse linear part.
    pub fn inverse(&self) -> Self {
        let dim = self.dim();
        let n = self.trunc();
        let a_inv = self.linear_part().inverse().expect("linear part is invertible by construction");
        let mut inv = PhylonMap::linear(&a_inv, n).expect("inverse of an invertible matrix");
        for m in 2..=n {
            let psi_m = self.as_polynomial_to(m);
            let phi_m = inv.as_polynomial_to(m);
            let comp = psi_m.compose(&phi_m).expect("same dimension");
            let errors: Vec<TruncatedSeries> =
                comp.components.iter().map(|c| c.homogeneous_part(m).expect("m ≤ trunc")).collect();
            if errors.iter().all(TruncatedSeries::is_zero) {
                continue;
            }
            let correction = apply_matrix(&a_inv, &errors);
            for (c, e) in inv.components.iter_mut().zip(correction) {
                *c = &*c - &e.as_polynomial_to(n);
            }
        }
        debug_assert_eq!(inv.dim(), dim);
        inv
    }

    /// Largest `k ≤ trunc - 1` with `jet_k(ψ) = id`; 0 if the linear part is not the identity.
    pub fn kernel_level(&self) -> usize {
        if !self.linear_part().is_identity() {
            return 0;
        }
        let mut k = 1;
        while k + 1 < self.trunc() {
            let clean = self.components.iter().all(|c| c.homogeneous_part(k + 1).expect("≤ trunc").is_zero());
            if !clean {
                break;
            }
            k += 1;
        }
        k
    }

    /// `det(∂ψ^i/∂x^j)` as a jet of order `trunc - 1`.
    pub fn jacobian_determinant(&self) -> TruncatedSeries {
        let dim = self.dim();
        let jac: Vec<Vec<TruncatedSeries>> = self
            .components
            .iter()
            .map(|c| (0..dim).map(|j| c.derivative(j).expect("trunc ≥ 1")).collect())
            .collect();
        series_determinant(&jac)
    }

    /// `(ψf)(x) = f(ψ⁻¹(x))`.
    pub fn act_on_f(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: f.dim() });
        }
        f.compose(self.inverse().components())
    }

    /// `(ψb)(x) = b(ψ⁻¹(x)) |det ∂(ψ⁻¹)^i/∂x^j|`, known to order `min(trunc - 1, b.trunc)`.
    pub fn act_on_b(&self, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        if b.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: b.dim() });
        }
        let inv = self.inverse();
        Ok(transport_density(&inv, b))
    }

    /// Acts on a pair with one inversion shared by both actions.
    pub fn act_on_pair(&self, pair: &PairInstance) -> Result<PairInstance> {
        if pair.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: pair.dim() });
        }
        let inv = self.inverse();
        let f = pair.f.compose(inv.components())?;
        let b = transport_density(&inv, &pair.b);
        PairInstance::new(f, b)
    }
}

/// `b(φ(x)) |det ∂φ/∂x|` for a map `φ` already inverted by the caller.
fn transport_density(phi: &PhylonMap, b: &TruncatedSeries) -> TruncatedSeries {
    let pulled = b.compose(phi.components()).expect("dimensions checked");
    let det = modulus(&phi.jacobian_determinant());
    &pulled * &det
}

/// `|a|`: negate the whole series iff its constant term is negative.
pub fn modulus(a: &TruncatedSeries) -> TruncatedSeries {
    if a.constant_term().is_negative() {
        -a
    } else {
        a.clone()
    }
}

/// `(A v)^i = Σ_j A_ij v^j` for a vector of series.
pub fn apply_matrix(a: &Matrix, v: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    let n = a.size();
    (0..n)
        .map(|i| {
            let mut acc = TruncatedSeries::zero(v[0].dim(), v[0].trunc());
            for (j, vj) in v.iter().enumerate() {
                if !a[(i, j)].is_zero() {
                    acc = &acc + &vj.scale(&a[(i, j)]);
                }
            }
            acc
        })
        .collect()
}

/// Determinant of a square matrix of series by cofactor expansion along rows,
/// memoized on the set of remaining columns.
pub fn series_determinant(m: &[Vec<TruncatedSeries>]) -> TruncatedSeries {
    fn minor(
        m: &[Vec<TruncatedSeries>],
        row: usize,
        cols: u32,
        memo: &mut HashMap<u32, TruncatedSeries>,
    ) -> TruncatedSeries {
        let n = m.len();
        if row == n {
            let (dim, trunc) = (m[0][0].dim(), m[0][0].trunc());
            return TruncatedSeries::one(dim, trunc);
        }
        if let Some(v) = memo.get(&cols) {
            return v.clone();
        }
        let mut acc: Option<TruncatedSeries> = None;
        let mut sign_flip = false;
        for j in 0..n {
            if cols & (1 << j) == 0 {
                continue;
            }
            let entry = &m[row][j];
            if !entry.is_zero() {
                let sub = minor(m, row + 1, cols & !(1 << j), memo);
                let term = entry * &sub;
                let term = if sign_flip { -term } else { term };
                acc = Some(match acc {
                    None => term,
                    Some(a) => &a + &term,
                });
            }
            sign_flip = !sign_flip;
        }
        let out = acc.unwrap_or_else(|| TruncatedSeries::zero(m[0][0].dim(), m[0][0].trunc()));
        memo.insert(cols, out.clone());
        out
    }
    let n = m.len();
    minor(m, 0, (1u32 << n) - 1, &mut HashMap::new())
}

/// `(f_ij)`, the Hessian at the origin.
pub fn hessian(f: &TruncatedSeries) -> Matrix {
    let dim = f.dim();
    Matrix::from_fn(dim, |i, j| {
        let mut exps = vec![0; dim];
        exps[i] += 1;
        exps[j] += 1;
        let c = f.coeff(&exps);
        if i == j {
            c * Rational::from_integer(2.into())
        } else {
            c
        }
    })
}

/// A pair `(f, b)` with `f` Morse at the origin and `b(0) ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairInstance {
    pub f: TruncatedSeries,
    pub b: TruncatedSeries,
}

impl PairInstance {
    pub fn new(f: TruncatedSeries, b: TruncatedSeries) -> Result<Self> {
        if f.dim() != b.dim() {
            return Err(Error::DimensionMismatch { left: f.dim(), right: b.dim() });
        }
        validate_morse(&f)?;
        if b.constant_term().is_zero() {
            return Err(Error::ZeroDensity);
        }
        Ok(PairInstance { f, b })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn hessian(&self) -> Matrix {
        hessian(&self.f)
    }

    /// Largest `i` for which `Λ_i` is determined by the stored jets.
    pub fn max_order(&self) -> usize {
        self.b.trunc().min(self.f.trunc() - 2)
    }
}

/// Checks zero constant and linear terms and a positive-definite Hessian.
pub fn validate_morse(f: &TruncatedSeries) -> Result<()> {
    if f.trunc() < 2 {
        return Err(Error::JetOrderExceeded { requested: 2, available: f.trunc() });
    }
    if let Some(order) = f.order() {
        if order < 2 {
            return Err(Error::NotMorse { degree: order });
        }
    }
    if let Some(minor) = hessian(f).first_nonpositive_minor() {
        return Err(Error::NotPositiveDefinite { minor });
    }
    Ok(())
}

/// Whether `det(ψ^i_j) > 0`.
pub fn preserves_orientation(psi: &PhylonMap) -> bool {
    psi.linear_part().det() > Rational::zero()
}

/// The identity's linear part check used by callers building kernel elements.
pub fn is_identity_through(psi: &PhylonMap, k: usize) -> bool {
    let id = PhylonMap::identity(psi.dim(), psi.trunc());
    k <= psi.trunc()
        && psi.components.iter().zip(&id.components).all(|(a, b)| a.agrees_through(b, k).unwrap_or(false))
}
