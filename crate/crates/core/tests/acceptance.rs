//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Exact criteria compare rationals with `==`. Floating-point tolerances are
//! pinned in the constants below.

use std::cell::RefCell;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phylon::fixtures::{self, FixtureShape};
use phylon::gaussian::{moment_generating_series, MomentSpec};
use phylon::invariants::{invariant_sequence_via, rational_parts};
use phylon::one_dim::QuadSeries;
use phylon::quadrature::{compare_expansion, laplace_integral_numeric, QuadratureConfig};
use phylon::rational::{int, ratio};
use phylon::series::standard_quadratic;
use phylon::tensor::{complete_trace, embedding_preimage, solve_t, t_contract, trace_decompose};
use phylon::{
    decide_equivalence, decide_equivalence_1d, invariant_equal, invariant_sequence, lambda_1d, lambda_general,
    lambda_reduced, sqrt_series, ContractionRoute, KTensor, Matrix, PairInstance, QuadExtScalar, Rational, SymTensor,
    TruncatedSeries,
};

const ANCHOR_TOL: f64 = 1e-8;
const SLOPE_MARGIN: f64 = 0.2;
const QUAD_REL_TOL: f64 = 1e-13;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: phylon::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn series(dim: usize, trunc: usize, terms: &[(&[u32], Rational)]) -> TruncatedSeries {
    TruncatedSeries::from_terms(dim, trunc, terms.iter().map(|(e, c)| (e.to_vec(), c.clone()))).unwrap()
}

/// Random pair with `f` known to `trunc` and `b` to `trunc - 2`.
fn random_pair(r: &mut ChaCha8Rng, dim: usize, trunc: usize) -> PairInstance {
    fixtures::random_pair(r, &FixtureShape::new(dim, trunc), &FixtureShape::new(dim, trunc - 2))
}

fn transport(r: &mut ChaCha8Rng, pair: &PairInstance, trunc: usize) -> phylon::Result<PairInstance> {
    let psi = fixtures::random_phylon(r, &FixtureShape::new(pair.dim(), trunc));
    psi.act_on_pair(pair)
}

fn criterion_1() -> Outcome {
    let mut r = rng(101);
    let mut odd_checked = 0;
    for t in 0..100 {
        let dim = 2 + t % 2;
        let a = random_pair(&mut r, dim, 8);
        let c = ok(transport(&mut r, &a, 8), "transport")?;
        let la = ok(invariant_sequence(&a, 6), "Λ(a)")?;
        let lc = ok(invariant_sequence(&c, 6), "Λ(ψa)")?;
        check(ok(invariant_equal(&la, &lc), "compare")?, || format!("triple {t} (d={dim}): Λ differs"))?;
        odd_checked += 2;
    }
    Ok(format!("100 triples, Λ_0..Λ_6 equal; {odd_checked} sequences"))
}

fn criterion_2() -> Outcome {
    let mut r = rng(202);
    let mut fixtures_seen = 0;
    for t in 0..60 {
        let dim = 1 + t % 3;
        let a = random_pair(&mut r, dim, 8);
        let mut pairs = vec![a.clone()];
        if dim > 1 {
            pairs.push(ok(transport(&mut r, &a, 8), "transport")?);
        }
        for p in pairs {
            let seq = ok(invariant_sequence(&p, 6), "Λ")?;
            for i in (1..=5).step_by(2) {
                check(seq.values[i].rational_part.is_zero(), || format!("fixture {t}: Λ_{i} ≠ 0"))?;
            }
            fixtures_seen += 1;
        }
    }
    for dim in 1..=3 {
        let shape = FixtureShape { density: 0.6, ..FixtureShape::new(dim, 6) };
        for _ in 0..5 {
            let b = fixtures::random_density(&mut r, &shape);
            let pair = ok(PairInstance::new(standard_quadratic(dim, 8), b.clone()), "pair")?;
            for i in 0..=6 {
                let general = ok(lambda_general(&pair, i), "general")?;
                let reduced = ok(lambda_reduced(&b, i), "reduced")?;
                check(general == reduced, || format!("d={dim} i={i}: {general:?} vs {reduced:?}"))?;
            }
        }
    }
    Ok(format!("odd Λ vanish on {fixtures_seen} fixtures; reduced = general for d ≤ 3, i ≤ 6"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(303);
    for t in 0..50 {
        let dim = 1 + t % 3;
        let p = random_pair(&mut r, dim, 8);
        let pairings = ok(rational_parts(&p, 6, ContractionRoute::PairPartitions), "pairings")?;
        let heat = ok(rational_parts(&p, 6, ContractionRoute::HeatOperator), "heat")?;
        check(pairings == heat, || format!("fixture {t} (d={dim}): {pairings:?} vs {heat:?}"))?;
        let via = ok(invariant_sequence_via(&p, 6, ContractionRoute::HeatOperator), "heat Λ")?;
        check(via == ok(invariant_sequence(&p, 6), "Λ")?, || format!("fixture {t}: sequences differ"))?;
    }
    Ok("50 fixtures, P_0..P_6 identical by both routes".into())
}

/// A random element of `K`: `X' - Sym X'`.
fn random_k_tensor(r: &mut ChaCha8Rng, dim: usize, k: usize) -> KTensor {
    let cell = RefCell::new(r);
    let raw = KTensor::from_fn(dim, k + 2, |_, _| {
        let mut g = cell.borrow_mut();
        fixtures::small_rational(&mut **g, 3, 2)
    });
    let sym = raw.full_symmetrization();
    KTensor::from_fn(dim, k + 2, |i, tail| {
        let mut idx = tail.to_vec();
        idx.push(i);
        raw.get(i, tail) - sym.get(&idx)
    })
}

fn random_sym(r: &mut ChaCha8Rng, dim: usize, order: usize) -> SymTensor {
    let cell = RefCell::new(r);
    SymTensor::from_fn(dim, order, |_| {
        let mut g = cell.borrow_mut();
        fixtures::small_rational(&mut **g, 3, 2)
    })
}

fn criterion_4() -> Outcome {
    let mut r = rng(404);
    for t in 0..100 {
        let dim = 2 + t % 3;
        let k = 1 + (t / 3) % 6;
        let x = random_k_tensor(&mut r, dim, k);
        check(x.is_in_k(), || format!("tensor {t} not in K"))?;
        let tx = t_contract(&x);
        check(complete_trace(&tx).is_zero(), || format!("tensor {t} (d={dim}, k={k}): ctr T(X) ≠ 0"))?;
    }
    let mut cases = 0;
    for dim in 2..=4 {
        for k in 0..=6 {
            // W_{…i} needs a free slot, so q ≥ 1; the q = 0 part is the complete trace
            for q in (k % 2..=k).step_by(2).filter(|&q| q >= 1) {
                let w = if q < 2 {
                    random_sym(&mut r, dim, q)
                } else {
                    trace_decompose(&random_sym(&mut r, dim, q)).swap_remove(0).generator
                };
                check(w.is_trace_free(), || format!("generator d={dim} q={q} not trace-free"))?;
                let z = w.metric_embed((k - q) / 2);
                let x = embedding_preimage(&w, k);
                check(x.is_in_k(), || format!("preimage d={dim} k={k} q={q} not in K"))?;
                let factor = ratio((dim + q) as i64 - 2, (k + 1) as i64);
                check(t_contract(&x) == z.scale(&factor), || format!("T(X) ≠ factor·Z at d={dim} k={k} q={q}"))?;
                cases += 1;
            }
        }
    }
    for dim in 2..=4 {
        for k in (2..=6).step_by(2) {
            let pure_trace = SymTensor::scalar(dim, int(1)).metric_embed(k / 2);
            check(solve_t(&pure_trace).is_err(), || format!("d={dim} k={k}: δ^m accepted as T(X)"))?;
        }
    }
    Ok(format!("ctr∘T = 0 on 100 K-tensors; T(X) = (d+q-2)/(k+1)·Z in {cases} cases; δ^m has no preimage"))
}

const ROUNDTRIP_DEGREE: usize = 8;

fn criterion_5() -> Outcome {
    let n = ROUNDTRIP_DEGREE;
    let mut r = rng(505);
    let mut by_dim = [0usize; 4];
    for t in 0..50 {
        // one in five in three dimensions keeps the run inside a minute on one core
        let dim = if t % 5 == 4 { 3 } else { 2 };
        let a = random_pair(&mut r, dim, n + 2);
        let c = ok(transport(&mut r, &a, n + 2), "transport")?;
        let verdict = ok(decide_equivalence(&a, &c, n), "decide")?;
        check(verdict.equivalent, || format!("instance {t}: rejected at {:?}", verdict.failure_order))?;
        let w = verdict.witness.ok_or_else(|| format!("instance {t}: no witness"))?;
        check(w.verified_to >= n, || format!("instance {t}: verified only to {}", w.verified_to))?;
        let moved = ok(w.psi.act_on_pair(&a), "apply witness")?;
        check(ok(moved.f.agrees_through(&c.f, n + 2), "f jets")?, || format!("instance {t}: f jets differ"))?;
        check(ok(moved.b.agrees_through(&c.b, n), "b jets")?, || format!("instance {t}: b jets differ"))?;
        by_dim[dim] += 1;
    }
    let eps = ratio(1, 3);
    for t in 0..20 {
        let dim = 2 + t % 2;
        let k = 2 * (t % 5);
        let a = random_pair(&mut r, dim, n + 2);
        let c = ok(transport(&mut r, &a, n + 2), "transport")?;
        let bumped = ok(PairInstance::new(c.f.clone(), fixtures::radial_bump(&c.b, k, &eps)), "bump")?;
        let verdict = ok(decide_equivalence(&a, &bumped, n), "decide")?;
        check(!verdict.equivalent && verdict.failure_order == Some(k), || {
            format!("perturbed {t} (d={dim}, k={k}): got {:?}", verdict.failure_order)
        })?;
    }
    Ok(format!(
        "{} roundtrips (d=2: {}, d=3: {}) reproduce jets through degree {n}; 20 perturbations rejected at the bumped order",
        by_dim[2] + by_dim[3],
        by_dim[2],
        by_dim[3]
    ))
}

fn criterion_6() -> Outcome {
    let cfg = QuadratureConfig { tolerance: QUAD_REL_TOL, ..Default::default() };
    let anchor = ok(PairInstance::new(series(1, 4, &[(&[2], int(1))]), series(1, 2, &[(&[0], int(1)), (&[2], int(1))])), "anchor")?;
    let root_pi = std::f64::consts::PI.sqrt();
    let lambdas = ok(invariant_sequence(&anchor, 2), "Λ")?;
    let mut worst = 0.0f64;
    for n in [10.0f64, 100.0, 1000.0] {
        let scaled = n.sqrt() * ok(laplace_integral_numeric(&anchor, n, &cfg), "integral")?;
        let closed = root_pi * (1.0 + 1.0 / (2.0 * n));
        let series_value = lambdas.values[0].to_f64() + lambdas.values[2].to_f64() / n;
        check((series_value - closed).abs() < ANCHOR_TOL, || format!("Λ_0 + Λ_2/n = {series_value} vs {closed}"))?;
        let err = (scaled - closed).abs();
        worst = worst.max(err);
        check(err < ANCHOR_TOL, || format!("n={n}: √n I(n) = {scaled} vs {closed}"))?;
    }
    let f1 = series(1, 6, &[(&[2], int(1)), (&[3], ratio(1, 2)), (&[4], ratio(1, 2)), (&[6], ratio(1, 4))]);
    let b1 = series(1, 4, &[(&[0], int(1)), (&[1], ratio(1, 2)), (&[2], ratio(1, 3)), (&[3], ratio(-1, 2)), (&[4], ratio(1, 5))]);
    let f2 = series(
        2,
        6,
        &[
            (&[2, 0], int(1)),
            (&[1, 1], ratio(1, 2)),
            (&[0, 2], int(1)),
            (&[3, 0], ratio(1, 3)),
            (&[1, 2], ratio(-1, 3)),
            (&[4, 0], ratio(1, 2)),
            (&[0, 4], ratio(1, 2)),
            (&[2, 2], ratio(1, 2)),
        ],
    );
    let b2 = series(2, 4, &[(&[0, 0], int(1)), (&[1, 0], ratio(1, 2)), (&[0, 2], ratio(1, 3)), (&[2, 1], ratio(-1, 2)), (&[0, 4], ratio(1, 5))]);
    let mut slopes = Vec::new();
    for (f, b) in [(f1, b1), (f2, b2)] {
        let p = ok(PairInstance::new(f, b), "pair")?;
        for k in [0usize, 2, 4] {
            let report = ok(compare_expansion(&p, k, &[10.0, 100.0, 1000.0], &cfg), "compare")?;
            let need = (k as f64 + 1.0) / 2.0 - SLOPE_MARGIN;
            check(report.fitted_slope >= need, || {
                format!("d={} K={k}: slope {:.3} < {need:.2}", p.dim(), report.fitted_slope)
            })?;
            slopes.push(format!("d={} K={k}: {:.2}", p.dim(), report.fitted_slope));
        }
    }
    Ok(format!("anchor error {worst:.1e}; slopes {}", slopes.join(", ")))
}

fn criterion_7() -> Outcome {
    let q1 = series(1, 6, &[(&[2], int(1))]);
    let base = ok(PairInstance::new(q1.clone(), series(1, 4, &[(&[0], int(1))])), "pair")?;
    let plus = ok(PairInstance::new(q1.clone(), series(1, 4, &[(&[0], int(1)), (&[1], int(1))])), "pair")?;
    let minus = ok(PairInstance::new(q1, series(1, 4, &[(&[0], int(1)), (&[1], int(-1))])), "pair")?;
    let l_plus = ok(invariant_sequence(&plus, 4), "Λ")?;
    let l_plus_raw = ok(lambda_1d(&plus, 4), "λ")?;
    for other in [&minus, &base] {
        check(l_plus == ok(invariant_sequence(other, 4), "Λ")?, || "Λ sequences differ".into())?;
        let lam = ok(lambda_1d(other, 4), "λ")?;
        check(lam.values[1] != l_plus_raw.values[1], || "λ_1 agrees".into())?;
        let verdict = ok(decide_equivalence_1d(&plus, other, 4), "decide 1d")?;
        check(!verdict.equivalent && verdict.failure_order == Some(1), || {
            format!("1d verdict {:?}", verdict.failure_order)
        })?;
    }
    let q2 = standard_quadratic(2, 8);
    let a = ok(PairInstance::new(q2.clone(), series(2, 6, &[(&[0, 0], int(1)), (&[1, 0], int(1))])), "pair")?;
    let c = ok(PairInstance::new(q2, series(2, 6, &[(&[0, 0], int(1))])), "pair")?;
    let verdict = ok(decide_equivalence(&a, &c, 6), "decide")?;
    let w = verdict.witness.ok_or_else(|| format!("d=2 pair rejected at {:?}", verdict.failure_order))?;
    let moved = ok(w.psi.act_on_pair(&a), "apply")?;
    check(ok(moved.b.agrees_through(&c.b, 6), "b")?, || "witness does not carry 1+x to 1".into())?;
    check(ok(moved.f.agrees_through(&c.f, 8), "f")?, || "witness does not fix q".into())?;
    Ok("d=1 pairs share Λ, differ in λ_1 and are rejected; d=2 analogue equivalent with witness".into())
}

fn criterion_8() -> Outcome {
    let mut r = rng(808);
    let radicands = [ratio(2, 1), ratio(3, 1), ratio(3, 2), ratio(5, 3), ratio(7, 1), ratio(1, 1), ratio(4, 1), ratio(9, 4)];
    let mut irrational = 0;
    for t in 0..50 {
        let s = radicands[t % radicands.len()].clone();
        let shape = FixtureShape { density: 0.7, ..FixtureShape::new(1, 10) };
        let mut f = fixtures::random_terms(&mut r, &shape, 3, 10);
        f.add_term(&[2], s.clone());
        let psi = ok(sqrt_series(&f), "sqrt")?;
        check(psi.coeff(1).signum() > 0, || format!("instance {t}: ψ_1 ≤ 0"))?;
        if !psi.coeff(1).is_rational() {
            irrational += 1;
        }
        let square = psi.mul(&psi);
        let target = ok(QuadSeries::from_rational(&f, &s), "lift")?;
        for k in 0..=10 {
            check(square.coeff(k) == target.coeff(k), || format!("instance {t}: [x^{k}] ψ² ≠ f"))?;
        }
        let first = QuadExtScalar::root(&s);
        check(psi.coeff(1) == &first, || format!("instance {t}: ψ_1 ≠ √s"))?;
    }
    check(irrational >= 25, || format!("only {irrational} irrational cases"))?;
    Ok(format!("50 instances ({irrational} with irrational ψ_1), ψ² = f through x^10"))
}

fn criterion_9() -> Outcome {
    let mut r = rng(909);
    let trunc = 8;
    for t in 0..10 {
        let dim = 1 + t % 3;
        let a = Matrix::from_fn(dim, |_, _| int(r.gen_range(-2..=2)));
        let shift = ratio(1, 1 + r.gen_range(0..3));
        let gram = &a.transpose() * &a;
        let sigma = Matrix::from_fn(dim, |i, j| if i == j { &gram[(i, j)] + &shift } else { gram[(i, j)].clone() });
        let spec = ok(MomentSpec::new(sigma.clone()), "spec")?;
        let mgf = moment_generating_series(&spec, trunc);
        let mut half_quad = TruncatedSeries::zero(dim, trunc);
        for i in 0..dim {
            for j in 0..dim {
                let mut e = vec![0u32; dim];
                e[i] += 1;
                e[j] += 1;
                half_quad.add_term(&e, &sigma[(i, j)] * ratio(1, 2));
            }
        }
        let mut exp = TruncatedSeries::one(dim, trunc);
        let mut power = TruncatedSeries::one(dim, trunc);
        let mut fact = Rational::one();
        for l in 1..=trunc / 2 {
            power = ok(power.try_mul(&half_quad), "mul")?;
            fact *= int(l as i64);
            exp = ok(exp.try_add(&power.scale(&(Rational::one() / &fact))), "add")?;
        }
        check(mgf == exp, || format!("Σ #{t} (d={dim}): moment series differs from exp(½ tᵀΣt)"))?;
    }
    Ok("10 covariances, moment series = exp(½ tᵀΣt) through degree 8".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact invariance under random maps", criterion_1),
        ("odd orders vanish; reduced formula", criterion_2),
        ("pair partitions vs heat operator", criterion_3),
        ("ctr∘T = 0 and the T(X) factor", criterion_4),
        ("equivalence roundtrip and perturbations", criterion_5),
        ("quadrature anchor and residual decay", criterion_6),
        ("one-dimensional completeness", criterion_7),
        ("square-root series", criterion_8),
        ("moment generating function", criterion_9),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
