//! Floating-point check of the expansion
//! `n^{d/2} ∫ exp(-n f) b dx ≈ Σ_i Λ_i n^{-i/2}` on polynomial truncations.
//!
//! The integral is taken over the cube `[-R, R]^d` with a tensorized composite
//! Gauss–Legendre rule, doubling the panel count until successive values agree.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::invariants::invariant_sequence;
use crate::phylon::PairInstance;
use crate::rational;
use crate::series::TruncatedSeries;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radius {
    /// `R` with `exp(-n c R²) ≤ tail_tolerance`, `c` a quarter of the smallest Hessian eigenvalue.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel and axis.
    pub points: usize,
    pub radius: Radius,
    /// Relative agreement required between successive refinements.
    pub tolerance: f64,
    pub tail_tolerance: f64,
    /// Panels per axis at the first refinement level.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            points: 16,
            radius: Radius::Auto,
            tolerance: 1e-10,
            tail_tolerance: 1e-18,
            initial_panels: 2,
            max_panels: 64,
        }
    }
}

/// Numeric integrals against the truncated expansion for several `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureReport {
    pub n_values: Vec<f64>,
    pub partial_order: usize,
    /// `∫ exp(-n f) b dx` for each `n`.
    pub numeric_integrals: Vec<f64>,
    /// `Σ_{i ≤ K} Λ_i n^{-i/2}`.
    pub series_values: Vec<f64>,
    /// `n^{d/2} · integral - series`.
    pub residuals: Vec<f64>,
    /// Least-squares decay rate `-d log|residual| / d log n`.
    pub fitted_slope: f64,
}

/// A polynomial as `(exponents, coefficient)` pairs in double precision.
struct FloatPolynomial {
    terms: Vec<(Vec<usize>, f64)>,
    max_exp: usize,
}

impl FloatPolynomial {
    fn new(s: &TruncatedSeries) -> Self {
        let terms: Vec<(Vec<usize>, f64)> = s
            .terms()
            .map(|(m, c)| (m.exponents().iter().map(|&e| e as usize).collect(), rational::to_f64(c)))
            .collect();
        let max_exp = terms.iter().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0);
        FloatPolynomial { terms, max_exp }
    }

    /// `powers[j][e] = x_j^e`.
    fn eval(&self, powers: &[Vec<f64>]) -> f64 {
        self.terms.iter().map(|(e, c)| e.iter().enumerate().fold(*c, |acc, (j, &k)| acc * powers[j][k])).sum()
    }
}

fn smallest_hessian_eigenvalue(pair: &PairInstance) -> f64 {
    let h = pair.hessian().to_f64_rows();
    let d = h.len();
    let m = DMatrix::from_fn(d, d, |i, j| h[i][j]);
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

struct Integrand {
    f: FloatPolynomial,
    b: FloatPolynomial,
    dim: usize,
    n: f64,
    /// `f(x) ≥ coercivity · ‖x‖²` is required at every node.
    coercivity: f64,
}

impl Integrand {
    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let top = self.f.max_exp.max(self.b.max_exp);
        x.iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(top + 1);
                let mut acc = 1.0;
                for _ in 0..=top {
                    p.push(acc);
                    acc *= xi;
                }
                p
            })
            .collect()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let powers = self.powers(x);
        let fx = self.f.eval(&powers);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if fx < self.coercivity * r2 - 1e-12 * (1.0 + r2) {
            return Err(Error::Quadrature(format!(
                "truncated f is not coercive on the integration cube: f({x:?}) = {fx:e}"
            )));
        }
        Ok((-self.n * fx).exp() * self.b.eval(&powers))
    }
}

fn composite_nodes(rule: &GaussLegendre, radius: f64, panels: usize) -> Vec<(f64, f64)> {
    let width = 2.0 * radius / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.as_node_weight_pairs().len());
    for p in 0..panels {
        let lo = -radius + width * p as f64;
        for &(node, weight) in rule.as_node_weight_pairs() {
            out.push((lo + 0.5 * width * (node + 1.0), 0.5 * width * weight));
        }
    }
    out
}

fn tensor_sum(integrand: &Integrand, nodes: &[(f64, f64)]) -> Result<f64> {
    let d = integrand.dim;
    let mut index = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..d {
            x[j] = nodes[index[j]].0;
            w *= nodes[index[j]].1;
        }
        total += w * integrand.value(&x)?;
        let mut j = 0;
        loop {
            if j == d {
                return Ok(total);
            }
            index[j] += 1;
            if index[j] < nodes.len() {
                break;
            }
            index[j] = 0;
            j += 1;
        }
    }
}

/// `∫_{[-R,R]^d} exp(-n f_N(x)) b_N(x) dx` for the stored polynomial jets.
pub fn laplace_integral_numeric(pair: &PairInstance, n: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let dim = pair.dim();
    if dim > 3 {
        return Err(Error::Quadrature(format!("tensorized quadrature supports d ≤ 3, got {dim}")));
    }
    if n <= 0.0 || !n.is_finite() {
        return Err(Error::Quadrature(format!("n must be positive, got {n}")));
    }
    let points = NonZeroUsize::new(cfg.points).ok_or_else(|| Error::Quadrature("points must be positive".into()))?;
    let coercivity = smallest_hessian_eigenvalue(pair) / 4.0;
    let radius = match cfg.radius {
        Radius::Auto => (-cfg.tail_tolerance.ln() / (n * coercivity)).sqrt(),
        Radius::Fixed(r) if r > 0.0 => r,
        Radius::Fixed(r) => return Err(Error::Quadrature(format!("radius must be positive, got {r}"))),
    };
    let integrand =
        Integrand { f: FloatPolynomial::new(&pair.f), b: FloatPolynomial::new(&pair.b), dim, n, coercivity };
    let rule = GaussLegendre::new(points);
    let mut panels = cfg.initial_panels.max(1);
    let mut previous = tensor_sum(&integrand, &composite_nodes(&rule, radius, panels))?;
    while panels < cfg.max_panels {
        panels *= 2;
        let current = tensor_sum(&integrand, &composite_nodes(&rule, radius, panels))?;
        if (current - previous).abs() <= cfg.tolerance * current.abs().max(f64::MIN_POSITIVE) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::Quadrature(format!("no convergence to {:e} within {} panels", cfg.tolerance, cfg.max_panels)))
}

/// Least-squares slope of `log y` against `log x`, negated.
pub fn fitted_decay(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.abs().max(f64::MIN_POSITIVE).ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

/// Compares `n^{d/2} I(n)` with `Σ_{i ≤ K} Λ_i n^{-i/2}` for each `n`.
pub fn compare_expansion(
    pair: &PairInstance,
    orders: usize,
    n_values: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadratureReport> {
    let lambdas: Vec<f64> = invariant_sequence(pair, orders)?.values.iter().map(|v| v.to_f64()).collect();
    let half_d = pair.dim() as f64 / 2.0;
    let mut report = QuadratureReport {
        n_values: n_values.to_vec(),
        partial_order: orders,
        numeric_integrals: Vec::new(),
        series_values: Vec::new(),
        residuals: Vec::new(),
        fitted_slope: f64::NAN,
    };
    for &n in n_values {
        let integral = laplace_integral_numeric(pair, n, cfg)?;
        let series: f64 = lambdas.iter().enumerate().map(|(i, l)| l * n.powf(-(i as f64) / 2.0)).sum();
        report.numeric_integrals.push(integral);
        report.series_values.push(series);
        report.residuals.push(n.powf(half_d) * integral - series);
    }
    if n_values.len() >= 2 {
        report.fitted_slope = fitted_decay(n_values, &report.residuals);
    }
    Ok(report)
}
