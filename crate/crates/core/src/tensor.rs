//! Exact symmetric tensors over `ℝ^d` with the Euclidean metric.
//!
//! Index tuples use 1-based variable labels. Round-bracket symmetrization
//! `T_{(i_1…i_n)}` always means the *average* over permutations, so
//! `Sym[δ^m W]` below is normalized to agree with `W` when `m = 0`.
//!
//! Every `Z ∈ S^k` splits uniquely as `Σ_m Sym[δ^m W_{k-2m}]` with each
//! `W_q` trace-free. The split is computed by recursive trace subtraction
//! using the exact identity
//! `tr Sym[δ^m W_q] = 2m(2m + 2q + d - 2) / (k(k-1)) · Sym[δ^{m-1} W_q]`
//! for trace-free `W_q` and `k = q + 2m`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::series::{MultiIndex, TruncatedSeries};

/// All non-decreasing tuples of length `order` over labels `1..=dim`.
pub fn sorted_tuples(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for l in start..=dim {
            cur.push(l);
            rec(dim, left - 1, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 || order == 0 {
        rec(dim, order, 1, &mut Vec::with_capacity(order), &mut out);
    }
    out
}

/// Number of distinct arrangements of a sorted tuple (multinomial coefficient).
fn arrangements(sorted: &[usize]) -> BigInt {
    let mut counts = BTreeMap::new();
    for &l in sorted {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts.values().fold(rational::factorial(sorted.len()), |acc, &c| acc / rational::factorial(c))
}

/// Average over all ways of choosing `pairs` disjoint unordered pairs of
/// positions in `labels` of `Π δ(pair) · f(rest)`, where `rest` lists the
/// unpaired labels. This is `Sym[δ^pairs F]` evaluated at `labels` for a
/// symmetric `F`.
pub fn matching_average(labels: &[usize], pairs: usize, f: &dyn Fn(&[usize]) -> Rational) -> Rational {
    let n = labels.len();
    if 2 * pairs > n {
        return Rational::zero();
    }
    let free = n - 2 * pairs;
    let mut used = vec![false; n];
    let mut rest = Vec::with_capacity(free);
    let mut sum = Rational::zero();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        labels: &[usize],
        pos: usize,
        pairs_left: usize,
        free_left: usize,
        used: &mut [bool],
        rest: &mut Vec<usize>,
        f: &dyn Fn(&[usize]) -> Rational,
        sum: &mut Rational,
    ) {
        let n = labels.len();
        let mut p = pos;
        while p < n && used[p] {
            p += 1;
        }
        if p == n {
            *sum += f(rest);
            return;
        }
        used[p] = true;
        if free_left > 0 {
            rest.push(labels[p]);
            rec(labels, p + 1, pairs_left, free_left - 1, used, rest, f, sum);
            rest.pop();
        }
        if pairs_left > 0 {
            for j in p + 1..n {
                if !used[j] && labels[j] == labels[p] {
                    used[j] = true;
                    rec(labels, p + 1, pairs_left - 1, free_left, used, rest, f, sum);
                    used[j] = false;
                }
            }
        }
        used[p] = false;
    }
    rec(labels, 0, pairs, free, &mut used, &mut rest, f, &mut sum);
    // n! / (pairs! 2^pairs free!)
    let total = rational::factorial(n)
        / (rational::factorial(pairs) * (BigInt::one() << pairs) * rational::factorial(free));
    sum / Rational::from_integer(total)
}

/// A totally symmetric tensor of order `order`, stored on sorted index tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymTensor {
    dim: usize,
    order: usize,
    entries: BTreeMap<Vec<usize>, Rational>,
}

impl SymTensor {
    pub fn zero(dim: usize, order: usize) -> Self {
        SymTensor { dim, order, entries: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, value: Rational) -> Self {
        Self::from_fn(dim, 0, |_| value.clone())
    }

    /// Builds a tensor by evaluating a symmetric function on sorted tuples.
    pub fn from_fn(dim: usize, order: usize, f: impl Fn(&[usize]) -> Rational) -> Self {
        let mut t = Self::zero(dim, order);
        for idx in sorted_tuples(dim, order) {
            let v = f(&idx);
            t.insert_sorted(idx, v);
        }
        t
    }

    /// Degree-`order` part of a series in the Taylor convention `a_{i…} = α! c_α`.
    pub fn from_series(a: &TruncatedSeries, order: usize) -> Result<Self> {
        if order > a.trunc() {
            return Err(Error::JetOrderExceeded { requested: order, available: a.trunc() });
        }
        let mut t = Self::zero(a.dim(), order);
        for (m, c) in a.terms() {
            if m.degree() == order {
                t.insert_sorted(m.labels(), c * Rational::from_integer(m.factorial()));
            }
        }
        Ok(t)
    }

    /// The homogeneous polynomial `(1/k!) T_{i_1…i_k} x^{i_1}…x^{i_k}` as a jet of order `trunc`.
    pub fn to_series(&self, trunc: usize) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(self.dim, trunc);
        for (idx, v) in &self.entries {
            let m = MultiIndex::from_labels(self.dim, idx).expect("labels in range");
            s.add_term(m.exponents(), v / Rational::from_integer(m.factorial()));
        }
        s
    }

    fn insert_sorted(&mut self, idx: Vec<usize>, v: Rational) {
        if v.is_zero() {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, v);
        }
    }

    pub fn set(&mut self, idx: &[usize], v: Rational) {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.insert_sorted(key, v);
    }

    pub fn get(&self, idx: &[usize]) -> Rational {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nonzero entries keyed by sorted tuple.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let nv = out.entries.get(k).cloned().unwrap_or_else(Rational::zero) + v;
            out.insert_sorted(k.clone(), nv);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        if !c.is_zero() {
            for (k, v) in &self.entries {
                out.entries.insert(k.clone(), v * c);
            }
        }
        out
    }

    /// `δ^{ij} T_{ij j_1…j_{k-2}}`.
    pub fn trace(&self) -> Self {
        assert!(self.order >= 2, "trace needs order ≥ 2");
        Self::from_fn(self.dim, self.order - 2, |rest| {
            let mut idx = Vec::with_capacity(rest.len() + 2);
            (1..=self.dim).fold(Rational::zero(), |acc, i| {
                idx.clear();
                idx.extend_from_slice(rest);
                idx.push(i);
                idx.push(i);
                acc + self.get(&idx)
            })
        })
    }

    pub fn is_trace_free(&self) -> bool {
        self.order < 2 || self.trace().is_zero()
    }

    /// Full contraction `Σ_{i_1…i_k} A_{i…} B_{i…}` over all (unsorted) tuples.
    pub fn inner(&self, other: &Self) -> Result<Rational> {
        self.check_same_shape(other)?;
        Ok(self.entries.iter().fold(Rational::zero(), |acc, (k, v)| {
            match other.entries.get(k) {
                Some(w) => acc + v * w * Rational::from_integer(arrangements(k)),
                None => acc,
            }
        }))
    }

    /// `Sym[δ^m W]`, the embedding of `W ∈ S^q` into `S^{q+2m}`.
    pub fn metric_embed(&self, m: usize) -> Self {
        if m == 0 {
            return self.clone();
        }
        let w = self;
        Self::from_fn(self.dim, self.order + 2 * m, |idx| matching_average(idx, m, &|rest| w.get(rest)))
    }
}

/// `ctr_k`: zero for odd `k`, otherwise `Σ b_{k_1k_1…k_jk_j}` over all `k_1…k_j`.
pub fn complete_trace(b: &SymTensor) -> Rational {
    if b.order % 2 == 1 {
        return Rational::zero();
    }
    let mut t = b.clone();
    while t.order > 0 {
        t = t.trace();
    }
    t.get(&[])
}

/// A tensor `X_{i; i_1…i_{k+1}}` symmetric in its last `k+1` slots whose full
/// symmetrization vanishes (the space `K`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KTensor {
    dim: usize,
    order: usize,
    entries: BTreeMap<(usize, Vec<usize>), Rational>,
}

impl KTensor {
    /// Zero tensor of total order `order = k + 2`.
    pub fn zero(dim: usize, order: usize) -> Self {
        assert!(order >= 2, "K tensors have order ≥ 2");
        KTensor { dim, order, entries: BTreeMap::new() }
    }

    /// Builds a tensor from `f(i, sorted tail)`. Membership in `K` is not
    /// enforced here; see [`KTensor::is_in_k`].
    pub fn from_fn(dim: usize, order: usize, f: impl Fn(usize, &[usize]) -> Rational) -> Self {
        let mut x = Self::zero(dim, order);
        for tail in sorted_tuples(dim, order - 1) {
            for i in 1..=dim {
                let v = f(i, &tail);
                if !v.is_zero() {
                    x.entries.insert((i, tail.clone()), v);
                }
            }
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total order `k + 2`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, tail: &[usize]) -> Rational {
        let mut key = tail.to_vec();
        key.sort_unstable();
        self.entries.get(&(i, key)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, Vec<usize>), &Rational)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let nv = out.entries.get(k).cloned().unwrap_or_else(Rational::zero) + v;
            if nv.is_zero() {
                out.entries.remove(k);
            } else {
                out.entries.insert(k.clone(), nv);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.dim, self.order);
        if !c.is_zero() {
            for (k, v) in &self.entries {
                out.entries.insert(k.clone(), v * c);
            }
        }
        out
    }

    /// `X_{(i i_1…i_{k+1})}`.
    pub fn full_symmetrization(&self) -> SymTensor {
        SymTensor::from_fn(self.dim, self.order, |idx| {
            let n = idx.len();
            let mut tail = Vec::with_capacity(n - 1);
            let sum = (0..n).fold(Rational::zero(), |acc, p| {
                tail.clear();
                tail.extend(idx.iter().enumerate().filter(|&(j, _)| j != p).map(|(_, &l)| l));
                acc + self.get(idx[p], &tail)
            });
            sum / rational::int(n as i64)
        })
    }

    pub fn is_in_k(&self) -> bool {
        self.full_symmetrization().is_zero()
    }
}

/// `T(X)_{j_1…j_k} = Σ_i X_{i; i j_1…j_k}`.
pub fn t_contract(x: &KTensor) -> SymTensor {
    let k = x.order - 2;
    SymTensor::from_fn(x.dim, k, |js| {
        let mut tail = Vec::with_capacity(k + 1);
        (1..=x.dim).fold(Rational::zero(), |acc, i| {
            tail.clear();
            tail.push(i);
            tail.extend_from_slice(js);
            acc + x.get(i, &tail)
        })
    })
}

/// One summand `Sym[δ^m W]` of the trace decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceComponent {
    /// Order of the trace-free generator.
    pub q: usize,
    /// Trace-free `W ∈ S^{[q]}`.
    pub generator: SymTensor,
    /// `Sym[δ^{(k-q)/2} W] ∈ S^k`.
    pub component: SymTensor,
}

/// `tr Sym[δ^m W_q] = c · Sym[δ^{m-1} W_q]` for trace-free `W_q`.
fn trace_factor(dim: usize, q: usize, m: usize) -> Rational {
    let k = (q + 2 * m) as i64;
    let (m, q, d) = (m as i64, q as i64, dim as i64);
    rational::ratio(2 * m * (2 * m + 2 * q + d - 2), k * (k - 1))
}

fn trace_free_generators(b: &SymTensor) -> Vec<(usize, SymTensor)> {
    let k = b.order;
    if k < 2 {
        return vec![(k, b.clone())];
    }
    let lower = trace_free_generators(&b.trace());
    let mut gens = Vec::with_capacity(lower.len() + 1);
    let mut top = b.clone();
    for (q, w_lower) in lower {
        let m = (k - q) / 2;
        let w = w_lower.scale(&(Rational::one() / trace_factor(b.dim, q, m)));
        top = top.try_sub(&w.metric_embed(m)).expect("same shape");
        gens.push((q, w));
    }
    let mut out = vec![(k, top)];
    out.extend(gens);
    out
}

/// Components for `q = k, k-2, …` (zero components included) summing to `b`.
pub fn trace_decompose(b: &SymTensor) -> Vec<TraceComponent> {
    trace_free_generators(b)
        .into_iter()
        .map(|(q, generator)| {
            let component = generator.metric_embed((b.order - q) / 2);
            TraceComponent { q, generator, component }
        })
        .collect()
}

/// The unscaled preimage of `Z = Sym[δ^m W]` (order `k = q + 2m`):
/// `X_{i; I} = Sym_I[δ_{i i_1} δ^m W] - Sym_I[δ^{m+1} W_{… i}]`, with
/// `T(X) = (d + q - 2)/(k + 1) · Z`.
pub fn embedding_preimage(w: &SymTensor, k: usize) -> KTensor {
    let q = w.order;
    assert!(k >= q && (k - q).is_multiple_of(2), "k - q must be even and non-negative");
    let m = (k - q) / 2;
    KTensor::from_fn(w.dim, k + 2, |i, tail| {
        let n = tail.len();
        let mut rest = Vec::with_capacity(n - 1);
        let mut first = Rational::zero();
        for p in 0..n {
            if tail[p] != i {
                continue;
            }
            rest.clear();
            rest.extend(tail.iter().enumerate().filter(|&(j, _)| j != p).map(|(_, &l)| l));
            first += matching_average(&rest, m, &|r| w.get(r));
        }
        first /= rational::int(n as i64);
        let second = matching_average(tail, m + 1, &|r| {
            let mut idx = r.to_vec();
            idx.push(i);
            w.get(&idx)
        });
        first - second
    })
}

/// Some `X ∈ K` with `T(X) = z`; exists iff `ctr_k(z) = 0` (for `d > 1`).
pub fn solve_t(z: &SymTensor) -> Result<KTensor> {
    if z.dim <= 1 {
        return Err(Error::OneDimensional);
    }
    let k = z.order;
    if !complete_trace(z).is_zero() {
        return Err(Error::NonzeroCompleteTrace { order: k });
    }
    let mut x = KTensor::zero(z.dim, k + 2);
    for comp in trace_decompose(z) {
        if comp.generator.is_zero() {
            continue;
        }
        // ctr vanishes exactly when the q = 0 part does
        debug_assert!(comp.q > 0);
        let scale = rational::ratio((k + 1) as i64, (z.dim + comp.q - 2) as i64);
        x = x.try_add(&embedding_preimage(&comp.generator, k).scale(&scale))?;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::series::standard_quadratic;

    #[test]
    fn complete_trace_examples() {
        let q = standard_quadratic(2, 2);
        let t = SymTensor::from_series(&q, 2).unwrap();
        assert_eq!(t.get(&[1, 1]), int(2));
        assert_eq!(t.get(&[1, 2]), int(0));
        assert_eq!(complete_trace(&t), int(4));
        let x4 = TruncatedSeries::monomial(1, 4, &[4], int(1));
        let t4 = SymTensor::from_series(&x4, 4).unwrap();
        assert_eq!(t4.get(&[1, 1, 1, 1]), int(24));
        assert_eq!(complete_trace(&t4), int(24));
        let odd = SymTensor::from_fn(3, 3, |_| int(1));
        assert_eq!(complete_trace(&odd), int(0));
    }

    #[test]
    fn series_round_trip() {
        let s = TruncatedSeries::from_terms(
            2,
            3,
            vec![(vec![3, 0], ratio(1, 6)), (vec![1, 2], int(2)), (vec![0, 3], int(-1))],
        )
        .unwrap();
        let t = SymTensor::from_series(&s, 3).unwrap();
        assert_eq!(t.get(&[2, 1, 2]), int(4));
        assert_eq!(t.to_series(3), s);
    }

    #[test]
    fn t_of_zero_is_zero() {
        assert!(t_contract(&KTensor::zero(3, 4)).is_zero());
    }

    #[test]
    fn preimage_of_unit_vector() {
        let e1 = SymTensor::from_fn(2, 1, |i| if i[0] == 1 { int(1) } else { int(0) });
        let x = embedding_preimage(&e1, 1);
        assert!(x.is_in_k());
        assert_eq!(t_contract(&x), e1.scale(&ratio(1, 2)));
        let solved = solve_t(&e1).unwrap();
        assert!(solved.is_in_k());
        assert_eq!(t_contract(&solved), e1);
    }

    #[test]
    fn solve_t_rejects_pure_trace() {
        let delta = SymTensor::from_fn(2, 2, |i| if i[0] == i[1] { int(3) } else { int(0) });
        assert_eq!(solve_t(&delta), Err(Error::NonzeroCompleteTrace { order: 2 }));
        assert!(solve_t(&SymTensor::zero(2, 2)).unwrap().is_zero());
        let one_d = SymTensor::from_fn(1, 1, |_| int(1));
        assert_eq!(solve_t(&one_d), Err(Error::OneDimensional));
    }

    #[test]
    fn decomposition_of_trace_free_and_metric() {
        let w = SymTensor::from_fn(2, 2, |i| match (i[0], i[1]) {
            (1, 1) => int(1),
            (2, 2) => int(-1),
            _ => int(5),
        });
        let comps = trace_decompose(&w);
        let nonzero: Vec<_> = comps.iter().filter(|c| !c.component.is_zero()).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].component, w);

        let delta = SymTensor::from_fn(2, 2, |i| if i[0] == i[1] { int(1) } else { int(0) });
        let comps = trace_decompose(&delta);
        let nonzero: Vec<_> = comps.iter().filter(|c| !c.component.is_zero()).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].q, 0);
        assert_eq!(nonzero[0].component, delta);
    }

    #[test]
    fn trace_factor_identity() {
        let w = SymTensor::from_fn(3, 2, |i| match (i[0], i[1]) {
            (1, 1) => int(2),
            (2, 2) => int(-1),
            (3, 3) => int(-1),
            (1, 3) => int(4),
            _ => int(0),
        });
        assert!(w.is_trace_free());
        for m in 1..=3 {
            let lhs = w.metric_embed(m).trace();
            let rhs = w.metric_embed(m - 1).scale(&trace_factor(3, 2, m));
            assert_eq!(lhs, rhs, "m = {m}");
        }
    }

    #[test]
    fn matching_average_counts() {
        // Sym[δ]_{11} = 1, Sym[δ]_{12} = 0, Sym[δδ]_{1122} = 1/3
        let one = |_: &[usize]| int(1);
        assert_eq!(matching_average(&[1, 1], 1, &one), int(1));
        assert_eq!(matching_average(&[1, 2], 1, &one), int(0));
        assert_eq!(matching_average(&[1, 1, 2, 2], 2, &one), ratio(1, 3));
        assert_eq!(matching_average(&[1, 1, 1, 1], 2, &one), int(1));
    }
}
