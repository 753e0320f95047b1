//! Property tests for the invariance machinery.

use invariant_gof::estimation::loglikelihood;
use invariant_gof::statistics::{ad_statistic, hm_statistic, rb_statistic, StatisticKind};
use invariant_gof::{
    fit_mle, root_transform, standardize, weibull_profile_score, FamilySpec, ParamPair, Sample,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FAMILIES: [FamilySpec; 4] = [
    FamilySpec::Weibull,
    FamilySpec::ParetoI,
    FamilySpec::Frechet,
    FamilySpec::BurrXII { xi: 1.5 },
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn draw(spec: FamilySpec, c: f64, k: f64, n: usize, seed: u64) -> Sample {
    spec.sample(
        &ParamPair::new(c, k).unwrap(),
        n,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
    .unwrap()
}

fn family() -> impl Strategy<Value = FamilySpec> {
    prop::sample::select(FAMILIES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn root_transform_preserves_distribution(
        spec in family(),
        c in 0.2f64..5.0, k in 0.2f64..5.0,
        a in 0.2f64..5.0, b in 0.2f64..5.0,
        u in 0.01f64..0.99,
    ) {
        let p = ParamPair::new(c, k).unwrap();
        let x = spec.quantile(&p, u).unwrap();
        let q = p.root_transformed(a, b).unwrap();
        let lhs = spec.cdf(&p, x).unwrap();
        let rhs = spec.cdf(&q, a * x.powf(1.0 / b)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn pdf_is_derivative_of_cdf(
        spec in family(), c in 0.3f64..3.0, k in 0.3f64..4.0, u in 0.05f64..0.95,
    ) {
        let p = ParamPair::new(c, k).unwrap();
        let x = spec.quantile(&p, u).unwrap();
        let h = 1e-5 * x;
        let fd = (spec.cdf(&p, x + h).unwrap() - spec.cdf(&p, x - h).unwrap()) / (2.0 * h);
        let pdf = spec.pdf(&p, x).unwrap();
        prop_assert!(rel(fd, pdf) <= 1e-6, "fd {fd} pdf {pdf}");
    }

    #[test]
    fn quantile_inverts_cdf(
        spec in family(), c in 0.2f64..5.0, k in 0.2f64..5.0, u in 0.001f64..0.999,
    ) {
        let p = ParamPair::new(c, k).unwrap();
        let x = spec.quantile(&p, u).unwrap();
        prop_assert!(rel(spec.cdf(&p, x).unwrap(), u) <= 1e-12);
        let y = spec.quantile(&p, spec.cdf(&p, x).unwrap()).unwrap();
        prop_assert!(rel(y, x) <= 1e-10);
        prop_assert!(spec.quantile(&p, u * 0.999).unwrap() < x);
    }

    #[test]
    fn mle_is_equivariant(
        spec in family(), seed in any::<u64>(), n in 5usize..60,
        a in 0.2f64..5.0, b in 0.2f64..5.0,
    ) {
        let s = draw(spec, 1.0, 1.5, n, seed);
        let fit = fit_mle(&spec, &s).unwrap();
        let t = root_transform(&s, a, b).unwrap();
        let moved = fit_mle(&spec, &t).unwrap();
        let want = fit.params.root_transformed(a, b).unwrap();
        prop_assert!(rel(moved.params.c(), want.c()) <= 1e-6, "{:?} vs {:?}", moved.params, want);
        prop_assert!(rel(moved.params.kappa(), want.kappa()) <= 1e-6, "{:?} vs {:?}", moved.params, want);
    }

    #[test]
    fn statistics_are_invariant(
        seed in any::<u64>(), n in 5usize..80, a in 0.2f64..5.0, b in 0.2f64..5.0,
    ) {
        let s = draw(FamilySpec::Weibull, 2.0, 0.8, n, seed);
        let y0 = standardize(&s, &fit_mle(&FamilySpec::Weibull, &s).unwrap()).unwrap();
        let t = root_transform(&s, a, b).unwrap();
        let y1 = standardize(&t, &fit_mle(&FamilySpec::Weibull, &t).unwrap()).unwrap();
        for kind in StatisticKind::ALL {
            let v0 = kind.evaluate(&y0.exponential_scores());
            let v1 = kind.evaluate(&y1.exponential_scores());
            prop_assert!((v0 - v1).abs() <= 1e-6 * v0.abs().max(1.0), "{kind}: {v0} vs {v1}");
        }
    }

    #[test]
    fn standardizing_stabilizes_the_fit(spec in family(), seed in any::<u64>(), n in 5usize..100) {
        let s = draw(spec, 3.0, 0.7, n, seed);
        let y = standardize(&s, &fit_mle(&spec, &s).unwrap()).unwrap();
        let refit = fit_mle(&spec, &Sample::new(y.values().to_vec()).unwrap()).unwrap();
        prop_assert!((refit.params.c() - 1.0).abs() <= 1e-6, "{:?}", refit.params);
        prop_assert!((refit.params.kappa() - 1.0).abs() <= 1e-6, "{:?}", refit.params);
    }

    #[test]
    fn standardize_preserves_ranks(spec in family(), seed in any::<u64>(), n in 2usize..50) {
        let s = draw(spec, 1.0, 2.0, n, seed);
        let y = standardize(&s, &fit_mle(&spec, &s).unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                if s.values()[i] < s.values()[j] {
                    prop_assert!(y.values()[i] <= y.values()[j]);
                }
            }
        }
    }

    #[test]
    fn profile_score_ignores_rescaling(seed in any::<u64>(), lambda in 1e-3f64..1e3, k in 0.1f64..10.0) {
        let s = draw(FamilySpec::Weibull, 1.0, 1.0, 20, seed);
        let scaled = Sample::new(s.values().iter().map(|x| lambda * x).collect()).unwrap();
        let g0 = weibull_profile_score(k, &s).unwrap();
        let g1 = weibull_profile_score(k, &scaled).unwrap();
        prop_assert!((g0 - g1).abs() <= 1e-12 * g0.abs().max(1.0), "{g0} vs {g1}");
    }

    #[test]
    fn fit_ignores_order(spec in family(), seed in any::<u64>(), n in 2usize..40) {
        let s = draw(spec, 1.0, 1.0, n, seed);
        let mut shuffled = s.values().to_vec();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let a = fit_mle(&spec, &s).unwrap();
        let b = fit_mle(&spec, &Sample::new(shuffled).unwrap()).unwrap();
        prop_assert_eq!(a.params, b.params);
    }

    #[test]
    fn statistics_are_permutation_invariant(seed in any::<u64>(), n in 1usize..60) {
        let y = draw(FamilySpec::Weibull, 1.0, 1.0, n, seed).into_values();
        let mut p = y.clone();
        p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(3)));
        for kind in StatisticKind::ALL {
            let (a, b) = (kind.evaluate(&y), kind.evaluate(&p));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{kind}");
        }
    }

    #[test]
    fn rb_is_nonnegative(values in prop::collection::vec(1e-6f64..30.0, 1..40)) {
        prop_assert!(rb_statistic(&values) >= 0.0);
    }

    #[test]
    fn hm_matches_naive_double_loop(values in prop::collection::vec(1e-6f64..20.0, 1..40)) {
        let n = values.len() as f64;
        let mut double = 0.0;
        for &a in &values {
            for &b in &values {
                let s = a + b;
                double += (1.0 + (s + 2.0) * (s + 2.0)) / ((s + 1.0) * (s + 1.0) * (s + 1.0));
            }
        }
        let single: f64 = values.iter().map(|&a| (a + 2.0) / ((a + 1.0) * (a + 1.0))).sum();
        let naive = double / n - 2.0 * single + n;
        let fast = hm_statistic(&values);
        prop_assert!((naive - fast).abs() <= 1e-12 * naive.abs().max(1.0), "{naive} vs {fast}");
    }

    #[test]
    fn ad_matches_quadrature(values in prop::collection::vec(0.01f64..6.0, 1..=5)) {
        let quad = ad_by_quadrature(&values);
        let formula = ad_statistic(&values);
        prop_assert!((quad - formula).abs() <= 1e-6, "{quad} vs {formula}");
    }
}

/// `n * int_0^1 (F_n(z) - z)^2 / (z (1 - z)) dz` on the probability scale.
/// Substituting `t = logit z` turns each piece where the empirical DF is
/// constant into `int (F_n - z(t))^2 dt`, which is smooth; the pieces
/// touching 0 and 1 decay exponentially and are cut at `|t| = 40`.
fn ad_by_quadrature(y: &[f64]) -> f64 {
    let n = y.len();
    let mut z: Vec<f64> = y.iter().map(|v| 1.0 - (-v).exp()).collect();
    z.sort_by(f64::total_cmp);
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let mut knots = vec![-40.0];
    knots.extend(z.iter().map(|&p| logit(p)));
    knots.push(40.0);
    let mut total = 0.0;
    for i in 0..=n {
        let level = i as f64 / n as f64;
        let (lo, hi) = (knots[i], knots[i + 1]);
        if hi <= lo {
            continue;
        }
        let f = |t: f64| {
            let p = 1.0 / (1.0 + (-t).exp());
            (level - p).powi(2)
        };
        let m = 20_000;
        let h = (hi - lo) / m as f64;
        let mut s = f(lo) + f(hi);
        for k in 1..m {
            s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    n as f64 * total
}

#[test]
fn pdf_integrates_to_one() {
    for spec in FAMILIES {
        let p = ParamPair::new(1.3, 1.7).unwrap();
        // Integrate over u-space: int f(x) dx = int_0^1 du, so instead check
        // the density against the increments of the cdf on a fine quantile
        // grid, where midpoint sums are accurate.
        let m = 200_000;
        let lo = spec.quantile(&p, 1e-9).unwrap();
        let hi = spec.quantile(&p, 1.0 - 1e-9).unwrap();
        let (la, lb) = (lo.ln(), hi.ln());
        let h = (lb - la) / m as f64;
        let mut total = 0.0;
        for i in 0..m {
            let x = (la + (i as f64 + 0.5) * h).exp();
            total += spec.pdf(&p, x).unwrap() * x * h;
        }
        assert!((total - 1.0).abs() < 1e-6, "{spec}: {total}");
    }
}

#[test]
fn grid_never_beats_the_mle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (i, spec) in FAMILIES.iter().cycle().take(40).enumerate() {
        let n = 5 + i % 16;
        let s = spec
            .sample(&ParamPair::new(1.0, 1.2).unwrap(), n, &mut rng)
            .unwrap();
        let fit = fit_mle(spec, &s).unwrap();
        let best = loglikelihood(spec, &fit.params, &s).unwrap();
        assert!((best - fit.loglik).abs() < 1e-9);
        for a in 0..50 {
            for b in 0..50 {
                let c = fit.params.c() * (0.5 + a as f64 / 49.0);
                let k = fit.params.kappa() * (0.5 + b as f64 / 49.0);
                let Ok(ll) = loglikelihood(spec, &ParamPair::new(c, k).unwrap(), &s) else {
                    continue;
                };
                assert!(
                    ll <= best + 1e-8,
                    "{spec} n={n}: grid ({c},{k}) {ll} > {best}"
                );
            }
        }
    }
}
