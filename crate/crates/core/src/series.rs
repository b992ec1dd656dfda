//! Truncated multivariate formal power series over exact rationals.
//!
//! A [`TruncatedSeries`] is a jet: every coefficient of total degree at most
//! [`TruncatedSeries::trunc`] is known exactly, nothing above it is. Binary
//! operations return a jet of the smallest order at which both operands are
//! known, so the recorded order is always the order through which the result
//! is exact.
//!
//! Two coefficient conventions appear throughout: the stored monomial
//! coefficients `c_α` of `x^α`, and the symmetric derivative tensors
//! `a_{i_1…i_r} = α! c_α` (the Taylor convention `a = Σ (1/r!) a_{i_1…i_r} x^{i_1}…x^{i_r}`).
//! Only the former is stored; [`TruncatedSeries::tensor_coeff`] converts on demand.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::rc::Rc;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Exponent vector of a monomial `x^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: usize,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().map(|&e| e as usize).sum();
        MultiIndex { exponents, degree }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    /// The multi-index of a tuple of 1-based variable labels.
    pub fn from_labels(dim: usize, labels: &[usize]) -> Result<Self> {
        let mut exps = vec![0u32; dim];
        for &l in labels {
            if l == 0 || l > dim {
                return Err(Error::InvalidLabel { label: l, dim });
            }
            exps[l - 1] += 1;
        }
        Ok(Self::new(exps))
    }

    /// Sorted 1-based labels, the inverse of [`MultiIndex::from_labels`].
    pub fn labels(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i + 1, e as usize))
            .collect()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> BigInt {
        self.exponents.iter().map(|&e| rational::factorial(e as usize)).product()
    }
}

/// All monomials of degree `≤ trunc` in `dim` variables, in graded order
/// (by degree, then lexicographically descending exponent vectors).
#[derive(Debug)]
struct Basis {
    dim: usize,
    trunc: usize,
    monomials: Vec<MultiIndex>,
    binom: Vec<Vec<usize>>,
}

type BasisCache = Mutex<HashMap<(usize, usize), Arc<Basis>>>;

impl Basis {
    fn get(dim: usize, trunc: usize) -> Arc<Basis> {
        static CACHE: OnceLock<BasisCache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard.entry((dim, trunc)).or_insert_with(|| Arc::new(Basis::build(dim, trunc))).clone()
    }

    fn build(dim: usize, trunc: usize) -> Basis {
        let top = dim + trunc + 2;
        let mut binom = vec![vec![0usize; top + 1]; top + 1];
        for n in 0..=top {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
            }
        }
        let mut monomials = Vec::new();
        for m in 0..=trunc {
            let mut current = vec![0u32; dim];
            push_degree(&mut monomials, &mut current, 0, m as u32);
        }
        Basis { dim, trunc, monomials, binom }
    }

    /// Number of exponent vectors in `vars` variables of degree exactly `m`.
    fn count(&self, vars: usize, m: usize) -> usize {
        if vars == 0 {
            return usize::from(m == 0);
        }
        self.binom[m + vars - 1][vars - 1]
    }

    /// Position of the first monomial of degree `m`.
    fn offset(&self, m: usize) -> usize {
        if m == 0 {
            0
        } else {
            self.count(self.dim + 1, m - 1)
        }
    }

    fn len_to(&self, m: usize) -> usize {
        self.offset(m + 1)
    }

    fn rank(&self, exps: &[u32]) -> usize {
        let m: usize = exps.iter().map(|&e| e as usize).sum();
        let mut r = self.offset(m);
        let mut rem = m;
        for (i, &a) in exps.iter().enumerate() {
            let a = a as usize;
            if rem > a {
                r += self.count(self.dim - i, rem - a - 1);
            }
            rem -= a;
        }
        r
    }

    fn rank_sum(&self, a: &[u32], b: &[u32], scratch: &mut Vec<u32>) -> usize {
        scratch.clear();
        scratch.extend(a.iter().zip(b).map(|(x, y)| x + y));
        self.rank(scratch)
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, rem: u32) {
    if pos + 1 == current.len() {
        current[pos] = rem;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    if current.is_empty() {
        if rem == 0 {
            out.push(MultiIndex::new(Vec::new()));
        }
        return;
    }
    for v in (0..=rem).rev() {
        current[pos] = v;
        push_degree(out, current, pos + 1, rem - v);
    }
    current[pos] = 0;
}

/// A formal power series in `dim` variables known exactly through degree `trunc`.
#[derive(Clone)]
pub struct TruncatedSeries {
    basis: Arc<Basis>,
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    pub fn zero(dim: usize, trunc: usize) -> Self {
        let basis = Basis::get(dim, trunc);
        let coeffs = vec![Rational::zero(); basis.monomials.len()];
        TruncatedSeries { basis, coeffs }
    }

    pub fn constant(dim: usize, trunc: usize, c: Rational) -> Self {
        let mut s = Self::zero(dim, trunc);
        s.coeffs[0] = c;
        s
    }

    pub fn one(dim: usize, trunc: usize) -> Self {
        Self::constant(dim, trunc, Rational::one())
    }

    /// The coordinate function `x^{var+1}` (0-based `var`).
    pub fn variable(dim: usize, trunc: usize, var: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[var] = 1;
        Self::monomial(dim, trunc, &exps, Rational::one())
    }

    pub fn monomial(dim: usize, trunc: usize, exps: &[u32], c: Rational) -> Self {
        let mut s = Self::zero(dim, trunc);
        s.add_term(exps, c);
        s
    }

    /// Builds a jet from monomial terms; terms above `trunc` are discarded and
    /// repeated exponent vectors accumulate.
    pub fn from_terms<I>(dim: usize, trunc: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut s = Self::zero(dim, trunc);
        for (exps, c) in terms {
            if exps.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: exps.len() });
            }
            s.add_term(&exps, c);
        }
        Ok(s)
    }

    /// Adds `c·x^exps`, ignoring it if its degree exceeds the jet order.
    pub fn add_term(&mut self, exps: &[u32], c: Rational) {
        assert_eq!(exps.len(), self.dim(), "exponent vector length");
        let deg: usize = exps.iter().map(|&e| e as usize).sum();
        if deg > self.trunc() {
            return;
        }
        let r = self.basis.rank(exps);
        self.coeffs[r] += c;
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn trunc(&self) -> usize {
        self.basis.trunc
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        let deg: usize = exps.iter().map(|&e| e as usize).sum();
        if exps.len() != self.dim() || deg > self.trunc() {
            return Rational::zero();
        }
        self.coeffs[self.basis.rank(exps)].clone()
    }

    pub fn constant_term(&self) -> &Rational {
        &self.coeffs[0]
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> + '_ {
        self.basis.monomials.iter().zip(&self.coeffs).filter(|(_, c)| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.terms().next().map(|(m, _)| m.degree())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    /// The same coefficients re-truncated at `n`. When `n` exceeds the current
    /// order the stored jet is reinterpreted as an exact polynomial; callers use
    /// this only where the higher coefficients provably do not matter.
    pub fn as_polynomial_to(&self, n: usize) -> Self {
        let mut out = Self::zero(self.dim(), n);
        let keep = self.basis.len_to(self.trunc().min(n));
        out.coeffs[..keep].clone_from_slice(&self.coeffs[..keep]);
        out
    }

    pub fn jet(&self, k: usize) -> Result<Self> {
        if k > self.trunc() {
            return Err(Error::JetOrderExceeded { requested: k, available: self.trunc() });
        }
        Ok(self.as_polynomial_to(k))
    }

    /// Degree-`m` homogeneous component, carrying the same jet order.
    pub fn homogeneous_part(&self, m: usize) -> Result<Self> {
        if m > self.trunc() {
            return Err(Error::JetOrderExceeded { requested: m, available: self.trunc() });
        }
        let mut out = Self::zero(self.dim(), self.trunc());
        let range = self.basis.offset(m)..self.basis.offset(m + 1);
        out.coeffs[range.clone()].clone_from_slice(&self.coeffs[range]);
        Ok(out)
    }

    /// Symmetric tensor coefficient `a_{i_1…i_r} = α! c_α` for 1-based labels.
    pub fn tensor_coeff(&self, labels: &[usize]) -> Result<Rational> {
        if labels.len() > self.trunc() {
            return Err(Error::JetOrderExceeded { requested: labels.len(), available: self.trunc() });
        }
        let alpha = MultiIndex::from_labels(self.dim(), labels)?;
        Ok(self.coeff(alpha.exponents()) * Rational::from_integer(alpha.factorial()))
    }

    /// Whether all coefficients through degree `k` coincide.
    pub fn agrees_through(&self, other: &Self, k: usize) -> Result<bool> {
        self.check_dim(other)?;
        let avail = self.trunc().min(other.trunc());
        if k > avail {
            return Err(Error::JetOrderExceeded { requested: k, available: avail });
        }
        let n = self.basis.len_to(k);
        Ok(self.coeffs[..n] == other.coeffs[..n])
    }

    /// Lowest degree at which two series differ, if any (within the common order).
    pub fn first_difference(&self, other: &Self) -> Result<Option<usize>> {
        self.check_dim(other)?;
        let n = self.basis.len_to(self.trunc().min(other.trunc()));
        Ok((0..n).find(|&i| self.coeffs[i] != other.coeffs[i]).map(|i| self.basis.monomials[i].degree()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncatedSeries { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.trunc().min(other.trunc());
        let mut out = Self::zero(self.dim(), n);
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c = f(&self.coeffs[i], &other.coeffs[i]);
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Product truncated to the smaller of the two jet orders.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.trunc().min(other.trunc());
        let basis = Basis::get(self.dim(), n);
        let lhs = ScaledTerms::new(self, n);
        let rhs = ScaledTerms::new(other, n);
        let mut acc = vec![BigInt::zero(); basis.len_to(n)];
        let mut scratch = Vec::with_capacity(self.dim());
        for (da, ma, na) in &lhs.terms {
            for (db, mb, nb) in &rhs.terms {
                if da + db > n {
                    break;
                }
                let r = basis.rank_sum(ma.exponents(), mb.exponents(), &mut scratch);
                acc[r] += na * nb;
            }
        }
        let den = &lhs.den * &rhs.den;
        let coeffs = acc.into_iter().map(|a| if a.is_zero() { Rational::zero() } else { Rational::new(a, den.clone()) }).collect();
        Ok(TruncatedSeries { basis, coeffs })
    }

    pub fn pow(&self, l: usize) -> Self {
        let mut acc = Self::one(self.dim(), self.trunc());
        for _ in 0..l {
            acc = &acc * self;
        }
        acc
    }

    /// `∂/∂x^{var+1}`; the result is known to one order less.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        if self.trunc() == 0 {
            return Err(Error::JetOrderExceeded { requested: 1, available: 0 });
        }
        let mut out = Self::zero(self.dim(), self.trunc() - 1);
        let mut exps = Vec::with_capacity(self.dim());
        for (m, c) in self.terms() {
            let e = m.exponents()[var];
            if e == 0 {
                continue;
            }
            exps.clear();
            exps.extend_from_slice(m.exponents());
            exps[var] -= 1;
            out.add_term(&exps, c * Rational::from_integer(BigInt::from(e)));
        }
        Ok(out)
    }

    /// `self ∘ inner`, where `inner` lists one series per variable of `self`.
    pub fn compose(&self, inner: &[TruncatedSeries]) -> Result<Self> {
        Ok(Self::compose_all(std::slice::from_ref(self), inner)?.pop().expect("one output"))
    }

    /// Composes several outer series with the same inner map, sharing the
    /// monomial powers of `inner`.
    pub fn compose_all(outers: &[TruncatedSeries], inner: &[TruncatedSeries]) -> Result<Vec<Self>> {
        let Some(first) = inner.first() else {
            return outers
                .iter()
                .map(|o| {
                    if o.dim() != 0 {
                        Err(Error::DimensionMismatch { left: o.dim(), right: 0 })
                    } else {
                        Ok(o.clone())
                    }
                })
                .collect();
        };
        let inner_dim = first.dim();
        for (index, s) in inner.iter().enumerate() {
            if s.dim() != inner_dim {
                return Err(Error::DimensionMismatch { left: inner_dim, right: s.dim() });
            }
            if !s.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm { index });
            }
        }
        for o in outers {
            if o.dim() != inner.len() {
                return Err(Error::DimensionMismatch { left: o.dim(), right: inner.len() });
            }
        }
        let inner_trunc = inner.iter().map(|s| s.trunc()).min().expect("nonempty");
        let top = outers.iter().map(|o| o.trunc()).max().unwrap_or(0).min(inner_trunc);
        let inner: Vec<TruncatedSeries> = inner.iter().map(|s| s.as_polynomial_to(top)).collect();
        let mut powers = PowerCache::new(&inner, top);

        outers
            .iter()
            .map(|outer| {
                let n = outer.trunc().min(inner_trunc);
                let basis = Basis::get(inner_dim, n);
                let mut sum = LinearCombination::new(basis.len_to(n));
                for (m, c) in outer.terms() {
                    if m.degree() > n {
                        break;
                    }
                    sum.add_scaled(c, &powers.get(m.exponents()));
                }
                Ok(TruncatedSeries { basis, coeffs: sum.finish() })
            })
            .collect()
    }
}

/// The nonzero terms of degree `≤ n` as integers over one common denominator.
struct ScaledTerms<'a> {
    den: BigInt,
    terms: Vec<(usize, &'a MultiIndex, BigInt)>,
}

impl<'a> ScaledTerms<'a> {
    fn new(s: &'a TruncatedSeries, n: usize) -> Self {
        let raw: Vec<(&MultiIndex, &Rational)> = s.terms().take_while(|(m, _)| m.degree() <= n).collect();
        let den = raw.iter().fold(BigInt::one(), |d, (_, c)| d.lcm(c.denom()));
        let terms = raw.into_iter().map(|(m, c)| (m.degree(), m, c.numer() * (&den / c.denom()))).collect();
        ScaledTerms { den, terms }
    }
}

/// Running sum `Σ c_j s_j` of series kept as integers over a common denominator.
struct LinearCombination {
    den: BigInt,
    nums: Vec<BigInt>,
}

impl LinearCombination {
    fn new(len: usize) -> Self {
        LinearCombination { den: BigInt::one(), nums: vec![BigInt::zero(); len] }
    }

    fn add_scaled(&mut self, c: &Rational, s: &TruncatedSeries) {
        let len = self.nums.len().min(s.coeffs.len());
        let s_den = s.coeffs[..len].iter().fold(BigInt::one(), |d, x| if x.is_zero() { d } else { d.lcm(x.denom()) });
        let term_den = c.denom() * &s_den;
        let new_den = self.den.lcm(&term_den);
        let grow = &new_den / &self.den;
        if !grow.is_one() {
            for a in self.nums.iter_mut().filter(|a| !a.is_zero()) {
                *a *= &grow;
            }
        }
        let factor = c.numer() * (&new_den / &term_den);
        for (a, x) in self.nums.iter_mut().zip(&s.coeffs[..len]) {
            if !x.is_zero() {
                *a += &factor * x.numer() * (&s_den / x.denom());
            }
        }
        self.den = new_den;
    }

    fn finish(self) -> Vec<Rational> {
        let den = self.den;
        self.nums.into_iter().map(|a| if a.is_zero() { Rational::zero() } else { Rational::new(a, den.clone()) }).collect()
    }
}

/// Memoized monomials `Π inner_i^{α_i}`.
struct PowerCache<'a> {
    inner: &'a [TruncatedSeries],
    cache: HashMap<Vec<u32>, Rc<TruncatedSeries>>,
    trunc: usize,
}

impl<'a> PowerCache<'a> {
    fn new(inner: &'a [TruncatedSeries], trunc: usize) -> Self {
        PowerCache { inner, cache: HashMap::new(), trunc }
    }

    fn get(&mut self, exps: &[u32]) -> Rc<TruncatedSeries> {
        if let Some(p) = self.cache.get(exps) {
            return p.clone();
        }
        let p = Rc::new(match exps.iter().rposition(|&e| e > 0) {
            None => TruncatedSeries::one(self.inner[0].dim(), self.trunc),
            Some(j) => {
                let mut lower = exps.to_vec();
                lower[j] -= 1;
                let base = self.get(&lower);
                &*base * &self.inner[j]
            }
        });
        self.cache.insert(exps.to_vec(), p.clone());
        p
    }
}

/// Equality at the common jet order of the two operands.
impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.agrees_through(other, self.trunc().min(other.trunc())).unwrap_or(false)
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", rational::format(c))?;
            for (i, &e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({})", self.trunc() + 1)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&TruncatedSeries> for &TruncatedSeries {
            type Output = TruncatedSeries;
            /// Panics on dimension mismatch; use the `try_` form for fallible use.
            fn $method(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                self.$checked(rhs).expect("series dimension mismatch")
            }
        }
        impl $trait<TruncatedSeries> for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: TruncatedSeries) -> TruncatedSeries {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        -&self
    }
}

/// The standard quadratic form `‖x‖²` as a jet of order `trunc`.
pub fn standard_quadratic(dim: usize, trunc: usize) -> TruncatedSeries {
    let mut q = TruncatedSeries::zero(dim, trunc);
    for i in 0..dim {
        let mut exps = vec![0; dim];
        exps[i] = 2;
        q.add_term(&exps, Rational::one());
    }
    q
}
