//! The one-dimensional theory: the unique orientation-preserving normalizer
//! `ψ` with `ψ(x)² = f(x)`, and the refined invariants `λ_i`.
//!
//! `ψ_1 = √(f_2/2)` is generally irrational, so normalization runs over the
//! quadratic field `ℚ(√s)` with `s` the coefficient of `x²` in `f`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::normalization::{EquivalenceVerdict, EquivalenceWitness};
use crate::phylon::{validate_morse, PairInstance, PhylonMap};
use crate::rational::{self, Rational};
use crate::series::TruncatedSeries;

/// `a + b√s` with `s > 0`. When `s` is a rational square the radical is
/// folded into `a`, so `b ≠ 0` implies `√s` is irrational.
#[derive(Clone, Debug)]
pub struct QuadExtScalar {
    a: Rational,
    b: Rational,
    s: Rational,
}

impl QuadExtScalar {
    pub fn new(a: Rational, b: Rational, s: Rational) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::Parse(format!("radicand must be positive, got {}", rational::format(&s))));
        }
        Ok(Self::canonical(a, b, s))
    }

    fn canonical(a: Rational, b: Rational, s: Rational) -> Self {
        match rational::sqrt_exact(&s) {
            Some(r) if !b.is_zero() => QuadExtScalar { a: a + b * r, b: Rational::zero(), s },
            _ => QuadExtScalar { a, b, s },
        }
    }

    pub fn rational(a: Rational, s: &Rational) -> Self {
        QuadExtScalar { a, b: Rational::zero(), s: s.clone() }
    }

    /// `√s`.
    pub fn root(s: &Rational) -> Self {
        Self::canonical(Rational::zero(), Rational::one(), s.clone())
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn radicand(&self) -> &Rational {
        &self.s
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.a) + rational::to_f64(&self.b) * rational::to_f64(&self.s).sqrt()
    }

    /// Exact sign of `a + b√s`.
    pub fn signum(&self) -> i32 {
        let sign = |r: &Rational| if r.is_positive() { 1 } else if r.is_negative() { -1 } else { 0 };
        let (sa, sb) = (sign(&self.a), sign(&self.b));
        if sa == sb || sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        // opposite signs: compare a² with b² s
        let a2 = &self.a * &self.a;
        let b2s = &self.b * &self.b * &self.s;
        if a2 > b2s {
            sa
        } else {
            sb
        }
    }

    /// The same number written over the radicand `s_new`, if `s / s_new` is a
    /// rational square (or the number is rational).
    pub fn rebase(&self, s_new: &Rational) -> Option<Self> {
        if self.b.is_zero() {
            return Some(Self::rational(self.a.clone(), s_new));
        }
        let r = rational::sqrt_exact(&(&self.s / s_new))?;
        Some(Self::canonical(self.a.clone(), &self.b * r, s_new.clone()))
    }

    pub fn inverse(&self) -> Self {
        let norm = &self.a * &self.a - &self.b * &self.b * &self.s;
        assert!(!norm.is_zero(), "inverse of zero in a quadratic field");
        QuadExtScalar { a: &self.a / &norm, b: -(&self.b / &norm), s: self.s.clone() }
    }

    fn align(&self, other: &Self) -> Rational {
        if self.b.is_zero() {
            other.s.clone()
        } else {
            assert!(
                other.b.is_zero() || self.s == other.s,
                "arithmetic across different quadratic fields"
            );
            self.s.clone()
        }
    }
}

/// Exact equality even across radicands: `a + b√s = a' + b'√s'` with both
/// radicals irrational forces `a = a'` and `b√s = b'√s'`.
impl PartialEq for QuadExtScalar {
    fn eq(&self, other: &Self) -> bool {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => self.a == other.a,
            (false, false) => {
                self.a == other.a
                    && self.b.signum() == other.b.signum()
                    && &self.b * &self.b * &self.s == &other.b * &other.b * &other.s
            }
            _ => false,
        }
    }
}

impl Eq for QuadExtScalar {}

impl fmt::Display for QuadExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", rational::format(&self.a))
        } else {
            write!(f, "{} + {}*sqrt({})", rational::format(&self.a), rational::format(&self.b), rational::format(&self.s))
        }
    }
}

impl Add for &QuadExtScalar {
    type Output = QuadExtScalar;
    fn add(self, o: &QuadExtScalar) -> QuadExtScalar {
        let s = self.align(o);
        QuadExtScalar { a: &self.a + &o.a, b: &self.b + &o.b, s }
    }
}

impl Sub for &QuadExtScalar {
    type Output = QuadExtScalar;
    fn sub(self, o: &QuadExtScalar) -> QuadExtScalar {
        let s = self.align(o);
        QuadExtScalar { a: &self.a - &o.a, b: &self.b - &o.b, s }
    }
}

impl Mul for &QuadExtScalar {
    type Output = QuadExtScalar;
    fn mul(self, o: &QuadExtScalar) -> QuadExtScalar {
        let s = self.align(o);
        let a = &self.a * &o.a + &self.b * &o.b * &s;
        let b = &self.a * &o.b + &self.b * &o.a;
        QuadExtScalar { a, b, s }
    }
}

impl Neg for &QuadExtScalar {
    type Output = QuadExtScalar;
    fn neg(self) -> QuadExtScalar {
        QuadExtScalar { a: -&self.a, b: -&self.b, s: self.s.clone() }
    }
}

/// A univariate jet `Σ_{k ≤ trunc} c_k x^k` with coefficients in `ℚ(√s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSeries {
    s: Rational,
    coeffs: Vec<QuadExtScalar>,
}

impl QuadSeries {
    pub fn zero(s: &Rational, trunc: usize) -> Self {
        QuadSeries { s: s.clone(), coeffs: vec![QuadExtScalar::rational(Rational::zero(), s); trunc + 1] }
    }

    pub fn from_rational(series: &TruncatedSeries, s: &Rational) -> Result<Self> {
        if series.dim() != 1 {
            return Err(Error::NotOneDimensional { dim: series.dim() });
        }
        let coeffs = (0..=series.trunc()).map(|k| QuadExtScalar::rational(series.coeff(&[k as u32]), s)).collect();
        Ok(QuadSeries { s: s.clone(), coeffs })
    }

    pub fn radicand(&self) -> &Rational {
        &self.s
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &QuadExtScalar {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[QuadExtScalar] {
        &self.coeffs
    }

    fn truncated(&self, n: usize) -> Self {
        let mut out = Self::zero(&self.s, n);
        for (o, c) in out.coeffs.iter_mut().zip(&self.coeffs) {
            *o = c.clone();
        }
        out
    }

    /// Rewrites every coefficient over `s_new`; fails unless `s / s_new` is a
    /// rational square or every coefficient is rational.
    pub fn rebase(&self, s_new: &Rational) -> Option<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.rebase(s_new)).collect::<Option<Vec<_>>>()?;
        Some(QuadSeries { s: s_new.clone(), coeffs })
    }

    /// The rational series, if every coefficient is rational.
    pub fn to_rational(&self) -> Option<TruncatedSeries> {
        let mut out = TruncatedSeries::zero(1, self.trunc());
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_rational() {
                return None;
            }
            out.add_term(&[k as u32], c.a().clone());
        }
        Some(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.trunc().min(other.trunc());
        let mut out = Self::zero(&self.s, n);
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                if !other.coeffs[j].is_zero() {
                    out.coeffs[i + j] = &out.coeffs[i + j] + &(&self.coeffs[i] * &other.coeffs[j]);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.trunc().min(other.trunc());
        QuadSeries { s: self.s.clone(), coeffs: (0..=n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect() }
    }

    pub fn derivative(&self) -> Self {
        let n = self.trunc();
        let coeffs = (1..=n.max(1))
            .map(|k| match self.coeffs.get(k) {
                Some(c) => c * &QuadExtScalar::rational(rational::int(k as i64), &self.s),
                None => QuadExtScalar::rational(Rational::zero(), &self.s),
            })
            .collect();
        QuadSeries { s: self.s.clone(), coeffs }
    }

    /// `self ∘ inner` for `inner` with zero constant term (Horner scheme).
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm { index: 0 });
        }
        let n = self.trunc().min(inner.trunc());
        let inner = inner.truncated(n);
        let mut acc = Self::zero(&self.s, n);
        for k in (0..=n).rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = &acc.coeffs[0] + &self.coeffs[k];
        }
        Ok(acc)
    }

    /// Compositional inverse of a series `c_1 x + c_2 x² + …` with `c_1 ≠ 0`.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm { index: 0 });
        }
        let n = self.trunc();
        if n == 0 || self.coeffs[1].is_zero() {
            return Err(Error::SingularLinearPart);
        }
        let inv1 = self.coeffs[1].inverse();
        let mut g = Self::zero(&self.s, n);
        g.coeffs[1] = inv1.clone();
        for m in 2..=n {
            // self(g(x)) = x through degree m - 1; the degree-m defect is fixed by g_m = -defect / c_1.
            let defect = self.truncated(m).compose(&g.truncated(m))?.coeffs[m].clone();
            g.coeffs[m] = -&(&defect * &inv1);
        }
        Ok(g)
    }
}

/// The `ψ ∈ 𝒫₀(1)` with `ψ(x)² = f(x)` through the jet order of `f`; the top
/// coefficient is fixed by treating `f` as a polynomial one order further.
pub fn sqrt_series(f: &TruncatedSeries) -> Result<QuadSeries> {
    if f.dim() != 1 {
        return Err(Error::NotOneDimensional { dim: f.dim() });
    }
    validate_morse(f)?;
    let s = f.coeff(&[2]);
    let n = f.trunc();
    let c = |k: usize| QuadExtScalar::rational(if k <= n { f.coeff(&[k as u32]) } else { Rational::zero() }, &s);
    let mut psi = QuadSeries::zero(&s, n);
    psi.coeffs[1] = QuadExtScalar::root(&s);
    let inv_2p1 = (&psi.coeffs[1] * &QuadExtScalar::rational(rational::int(2), &s)).inverse();
    for k in 2..=n {
        // coefficient of x^{k+1} in ψ²: 2 p_1 p_k + Σ_{i=2}^{k-1} p_i p_{k+1-i}
        let mut rest = c(k + 1);
        for i in 2..k {
            rest = &rest - &(&psi.coeffs[i] * &psi.coeffs[k + 1 - i]);
        }
        psi.coeffs[k] = &rest * &inv_2p1;
    }
    Ok(psi)
}

/// `λ_0 … λ_max` over the radicand `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaSequence {
    pub radicand: Rational,
    pub values: Vec<QuadExtScalar>,
}

/// `(ψb)(x) = b(ψ⁻¹(x)) |(ψ⁻¹)'(x)|` over `ℚ(√s)`; `ψ_1 > 0` so no sign flip.
fn normalized_density(psi: &QuadSeries, b: &TruncatedSeries) -> Result<QuadSeries> {
    let inv = psi.reversion()?;
    let b = QuadSeries::from_rational(b, psi.radicand())?;
    Ok(b.compose(&inv)?.mul(&inv.derivative()))
}

/// `λ_i(f, b) = i! · [x^i](ψb)` where `ψf = q`, for `i ≤ max`.
pub fn lambda_1d(pair: &PairInstance, max: usize) -> Result<LambdaSequence> {
    if pair.dim() != 1 {
        return Err(Error::NotOneDimensional { dim: pair.dim() });
    }
    if pair.f.trunc() < max + 2 {
        return Err(Error::JetOrderExceeded { requested: max + 2, available: pair.f.trunc() });
    }
    if pair.b.trunc() < max {
        return Err(Error::JetOrderExceeded { requested: max, available: pair.b.trunc() });
    }
    // ψ through degree max + 1 feeds λ_max, and its top coefficient needs f_{max+2}
    let psi = sqrt_series(&pair.f.jet(max + 2)?)?;
    let nb = normalized_density(&psi, &pair.b.jet(max)?)?;
    let s = psi.radicand().clone();
    let values = (0..=max)
        .map(|i| &nb.coeffs[i] * &QuadExtScalar::rational(Rational::from_integer(rational::factorial(i)), &s))
        .collect();
    Ok(LambdaSequence { radicand: s, values })
}

/// `(g⁺, g⁻)` with `g⁺(x) = (g(x) + g(-x))/2` and `g⁻(x) = (g(x) - g(-x))/2`.
pub fn even_odd_split(g: &TruncatedSeries) -> Result<(TruncatedSeries, TruncatedSeries)> {
    if g.dim() != 1 {
        return Err(Error::NotOneDimensional { dim: g.dim() });
    }
    let mut even = TruncatedSeries::zero(1, g.trunc());
    let mut odd = TruncatedSeries::zero(1, g.trunc());
    for (m, c) in g.terms() {
        let target = if m.degree() % 2 == 0 { &mut even } else { &mut odd };
        target.add_term(m.exponents(), c.clone());
    }
    Ok((even, odd))
}

/// Decides equivalence under `𝒫₀(1)` through jets of order `degree` of the
/// densities: equivalent iff `λ_i(a) = λ_i(c)` for `i ≤ degree`, in which case
/// `ψ_c⁻¹ ∘ ψ_a` is rational and is returned after verification.
pub fn decide_equivalence_1d(a: &PairInstance, c: &PairInstance, degree: usize) -> Result<EquivalenceVerdict> {
    let la = lambda_1d(a, degree)?;
    let lc = lambda_1d(c, degree)?;
    if let Some(order) = la.values.iter().zip(&lc.values).position(|(x, y)| x != y) {
        return Ok(EquivalenceVerdict { equivalent: false, witness: None, failure_order: Some(order) });
    }
    let n = degree + 2;
    let psi_a = sqrt_series(&a.f.jet(n)?)?;
    let psi_c = sqrt_series(&c.f.jet(n)?)?;
    // λ_0 agreement gives √(s_a/s_c) = b_a(0)/b_c(0), so the fields coincide.
    let inv_c = psi_c.reversion()?.rebase(psi_a.radicand()).ok_or(Error::WitnessVerification { order: 0 })?;
    let composite = inv_c.compose(&psi_a)?;
    let series = composite.to_rational().ok_or(Error::WitnessVerification { order: 0 })?;
    let psi = PhylonMap::new(vec![series])?;
    let a_jet = PairInstance::new(a.f.jet(n)?, a.b.jet(degree)?)?;
    let c_jet = PairInstance::new(c.f.jet(n)?, c.b.jet(degree)?)?;
    if !crate::normalization::verify_witness(&psi, &a_jet, &c_jet, degree)? {
        return Err(Error::WitnessVerification { order: degree });
    }
    Ok(EquivalenceVerdict { equivalent: true, witness: Some(EquivalenceWitness { psi, verified_to: degree }), failure_order: None })
}
