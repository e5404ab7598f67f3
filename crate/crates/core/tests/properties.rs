use proptest::prelude::*;
use resetfpt::optimize::{minimize_over_r, minimize_over_r_with, profile_over_x, scan_over_r, OptOptions};
use resetfpt::resetting::{lt_with_reset, mean_with_reset, survival_lt_with_reset};
use resetfpt::transform::{baseline_no_reset, m0_fpt_cir, m0_fpt_ou, no_reset_lt};
use resetfpt::{ModelSpec, ProblemKind, ProblemSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn model() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (-2.0..2.0f64).prop_map(ModelSpec::bm),
        (0.1..3.0f64, 0.3..2.0f64).prop_map(|(mu, s)| ModelSpec::ou(mu, s)),
        (0.1..3.0f64, 0.3..2.0f64).prop_map(|(mu, s)| ModelSpec::cir(mu, s)),
        Just(ModelSpec::feller()),
        Just(ModelSpec::wright_fisher()),
    ]
}

/// Problem with interior start and reset points, exit problems included.
fn problem() -> impl Strategy<Value = ProblemSpec> {
    (model(), any::<bool>(), 0.02..0.98f64, 0.02..0.98f64).prop_map(|(m, exit, u, w)| {
        let b = match m {
            ModelSpec::Conjugated(_) if !exit => 0.9,
            ModelSpec::Conjugated(_) => 0.8,
            _ => 2.5,
        };
        if exit {
            ProblemSpec::fet(m, u * b, w * b, b)
        } else {
            ProblemSpec::fpt(m, u * b, w * b)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_and_density_transforms_agree(spec in problem(), lam in 0.05..20.0f64) {
        let v = no_reset_lt(&spec.model, spec.kind, spec.x, lam).unwrap();
        prop_assert!(v.m0 > 0.0 && v.m0 <= 1.0);
        prop_assert!(rel(v.q0_hat, (1.0 - v.m0) / lam) <= 1e-10);
    }

    #[test]
    fn no_reset_transform_decreases_in_argument(spec in problem(), lam in 0.05..10.0f64) {
        let lo = no_reset_lt(&spec.model, spec.kind, spec.x, lam).unwrap().m0;
        let hi = no_reset_lt(&spec.model, spec.kind, spec.x, 1.5 * lam).unwrap().m0;
        prop_assert!(hi < lo, "{hi} !< {lo}");
    }

    #[test]
    fn resetting_transform_identity(spec in problem(), r in 0.0..10.0f64, lam in 0.05..10.0f64) {
        let m = lt_with_reset(&spec, r, lam).unwrap();
        let q = survival_lt_with_reset(&spec, r, lam).unwrap();
        prop_assert!(rel(1.0 - lam * q, m) <= 1e-10, "{m} vs {q}");
    }

    #[test]
    fn reset_at_start_reduction(spec in problem(), r in 0.01..20.0f64) {
        let spec = spec.with_x_r(spec.x);
        let m0 = no_reset_lt(&spec.model, spec.kind, spec.x, r).unwrap().m0;
        let mean = mean_with_reset(&spec, r).unwrap();
        prop_assert!(rel(mean, (1.0 / m0 - 1.0) / r) <= 1e-12);
    }

    #[test]
    fn exit_boundaries_are_immediate(spec in problem(), lam in 0.05..20.0f64) {
        if let ProblemKind::Fet { b } = spec.kind {
            for x in [0.0, b] {
                let v = no_reset_lt(&spec.model, spec.kind, x, lam).unwrap();
                prop_assert_eq!(v.m0, 1.0);
                prop_assert_eq!(v.complement, 0.0);
            }
        }
    }

    #[test]
    fn cir_delegates_to_ou(mu in 0.1..3.0f64, sigma in 0.3..2.0f64, x in 0.01..5.0f64, lam in 0.05..20.0f64) {
        let cir = m0_fpt_cir(mu, sigma, x, lam).unwrap();
        let ou = m0_fpt_ou(mu, sigma, x.sqrt(), lam).unwrap();
        prop_assert_eq!(cir.to_bits(), ou.to_bits());
    }

    #[test]
    fn symmetric_exit_times(x in 0.01..0.99f64, x_r in 0.01..0.99f64, r in 0.01..100.0f64) {
        let here = mean_with_reset(&ProblemSpec::fet(ModelSpec::bm(0.0), x, x_r, 1.0), r).unwrap();
        let mirrored = ProblemSpec::fet(ModelSpec::bm(0.0), 1.0 - x, 1.0 - x_r, 1.0);
        prop_assert!(rel(mean_with_reset(&mirrored, r).unwrap(), here) <= 1e-10);
    }

    #[test]
    fn passage_mean_grows_with_reset_distance(x in 0.05..3.0f64, x_r in 0.05..3.0f64, r in 0.05..5.0f64) {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), x, x_r);
        let near = mean_with_reset(&spec, r).unwrap();
        let far = mean_with_reset(&spec.with_x_r(1.1 * x_r), r).unwrap();
        prop_assert!(far > near);
    }
}

#[test]
fn exit_time_symmetric_about_midpoint() {
    for x_r in [0.2, 0.5, 0.7] {
        for x in [0.05, 0.3, 0.45] {
            for r in [0.5, 10.0, 80.0] {
                let spec = ProblemSpec::fet(ModelSpec::bm(0.0), x, x_r, 1.0);
                let a = mean_with_reset(&spec, r).unwrap();
                let b = mean_with_reset(&spec.with_x(1.0 - x), r).unwrap();
                assert!(rel(a, b) <= 1e-10, "x_R={x_r} x={x} r={r}");
            }
        }
    }
}

#[test]
fn passage_mean_diverges_at_both_rate_limits() {
    for x in [0.2, 1.0, 3.0] {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), x, 1.0);
        let mid = mean_with_reset(&spec, 1.0).unwrap();
        assert!(mean_with_reset(&spec, 1e-6).unwrap() > mid);
        assert!(mean_with_reset(&spec, 1e6).unwrap() > mid);
        assert_eq!(mean_with_reset(&spec, 0.0).unwrap(), f64::INFINITY);
    }
}

#[test]
fn small_rate_slope_matches_ou_baseline() {
    for x in [0.5, 1.0, 2.0] {
        let h = 1e-6;
        let m0 = no_reset_lt(&ModelSpec::ou(1.0, 1.0), ProblemKind::Fpt, x, h).unwrap();
        let baseline = baseline_no_reset(&ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), x, x)).unwrap();
        assert!(rel(m0.complement / h, baseline) < 1e-4, "x={x}");
    }
}

#[test]
fn survival_transform_at_small_argument_is_the_mean() {
    for spec in [
        ProblemSpec::fpt(ModelSpec::bm(0.0), 0.7, 1.0),
        ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 0.5, 0.8),
        ProblemSpec::fet(ModelSpec::bm(0.4), 0.3, 0.2, 1.0),
    ] {
        let q = survival_lt_with_reset(&spec, 1.5, 1e-9).unwrap();
        assert!(rel(q, mean_with_reset(&spec, 1.5).unwrap()) < 1e-6, "{spec:?}");
    }
}

#[test]
fn refined_minimum_beats_its_bracket() {
    for spec in [
        ProblemSpec::fpt(ModelSpec::bm(0.0), 0.3, 1.0),
        ProblemSpec::fpt(ModelSpec::bm(-0.1), 2.0, 2.0),
        ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 0.4, 0.4),
        ProblemSpec::fet(ModelSpec::bm(0.0), 0.4, 0.2, 1.0),
        ProblemSpec::fet(ModelSpec::bm(1.0), 0.5, 0.2, 1.0),
    ] {
        let opt = minimize_over_r(&spec).unwrap();
        assert!(!opt.boundary_optimum && opt.converged, "{spec:?}");
        let (lo, hi) = opt.bracket;
        let edge = mean_with_reset(&spec, lo).unwrap().min(mean_with_reset(&spec, hi).unwrap());
        assert!(opt.m < edge, "{spec:?}: {opt:?}");
        assert!(lo < opt.r_m && opt.r_m < hi);
    }
}

#[test]
fn tighter_tolerance_moves_optimum_little() {
    let tight = OptOptions {
        rel_tol: 5e-7,
        ..OptOptions::default()
    };
    for x in [0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0] {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), x, x);
        let a = minimize_over_r(&spec).unwrap();
        let b = minimize_over_r_with(&spec, &tight).unwrap();
        assert!(rel(a.r_m, b.r_m) < 1e-5, "x={x}");
    }
}

#[test]
fn scaling_anchor_for_reset_at_start() {
    for x in [0.5f64, 1.0, 2.0, 5.0] {
        let opt = minimize_over_r(&ProblemSpec::fpt(ModelSpec::bm(0.0), x, x)).unwrap();
        assert!(rel(opt.r_m * x * x, 1.27) < 0.01, "x={x}: {opt:?}");
        assert!(rel(opt.m / (x * x), 3.088) < 0.01, "x={x}: {opt:?}");
    }
}

#[test]
fn optimal_rate_limits_in_start_position() {
    for x_r in [0.5f64, 1.0, 2.0] {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), x_r, x_r);
        let profile = profile_over_x(&spec, &[1e-4 * x_r, x_r, 50.0 * x_r]).unwrap();
        let alpha = profile.alpha.unwrap();
        let beta = profile.beta.unwrap();
        assert!(rel(alpha, 0.5 / (x_r * x_r)) < 0.05, "x_R={x_r}: {alpha}");
        assert!(rel(beta, 2.0 / (x_r * x_r)) < 0.05, "x_R={x_r}: {beta}");
        let rates: Vec<f64> = profile.results.iter().map(|r| r.as_ref().unwrap().r_m).collect();
        assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
    }
}

#[test]
fn exit_transition_in_reset_position() {
    let xs = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
    let far = profile_over_x(&ProblemSpec::fet(ModelSpec::bm(0.0), 0.5, 0.3, 1.0), &xs).unwrap();
    for (x, res) in xs.iter().zip(&far.results) {
        let opt = res.as_ref().unwrap();
        assert!(opt.boundary_optimum && opt.r_m == 0.0, "x={x}: {opt:?}");
    }
    let near = minimize_over_r(&ProblemSpec::fet(ModelSpec::bm(0.0), 0.5, 0.2, 1.0)).unwrap();
    assert!(near.r_m > 0.0 && near.m < near.baseline);
}

#[test]
fn scan_locates_the_optimum() {
    let spec = ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 0.4, 0.4);
    let grid: Vec<f64> = (1..=200).map(|i| 0.05 * i as f64).collect();
    let scan = scan_over_r(&spec, &grid).unwrap();
    let best = scan.best().unwrap();
    assert!((best.r - 6.05).abs() <= 0.05, "{best:?}");
    let opt = minimize_over_r(&spec).unwrap();
    assert!(opt.m <= best.mean);

    let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
    let scan = scan_over_r(&spec, &[0.0, 1.0, 1.27, 2.0]).unwrap();
    assert_eq!(scan.grid[0].mean, f64::INFINITY);
    assert!((scan.best().unwrap().r - 1.27).abs() < 1e-12);
    assert!(scan_over_r(&spec, &[1.0, 1.0]).is_err());
    assert!(scan_over_r(&spec, &[-1.0, 1.0]).is_err());
}
