//! Parabolic cylinder function `D_ν(z)` for real `ν ≤ 0` and real `z`.
//!
//! For `ν < 0` we use the integral representation
//!
//! ```text
//! D_ν(z) = e^{-z²/4} / Γ(a) · I(a, z),   a = -ν,
//! I(a, z) = ∫_0^∞ t^{a-1} e^{-t²/2 - z t} dt,
//! ```
//!
//! evaluated in log scale: the integrand is divided by its maximum before
//! integration, so `ln I` is available even when `I` itself overflows.
//! `I(a, 0) = 2^{a/2-1} Γ(a/2)` in closed form.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, GaussLegendre};

/// Relative tolerance of the kernel integrals.
const REL_TOL: f64 = 1e-13;

/// Half-width, in units of the Gaussian envelope, kept around the peak.
/// The neglected mass is below `e^{-60}` of the peak value.
const HALF_WIDTH: f64 = 11.0;

fn rule() -> &'static GaussLegendre<f64> {
    static RULE: OnceLock<GaussLegendre<f64>> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

fn options() -> AdaptiveOptions<f64> {
    AdaptiveOptions {
        rel_tol: REL_TOL,
        abs_tol: 0.0,
        max_panels: 2000,
    }
}

/// Order and argument of `D_ν(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcfArgs {
    pub nu: f64,
    pub z: f64,
}

impl PcfArgs {
    pub fn new(nu: f64, z: f64) -> Self {
        Self { nu, z }
    }

    fn check(&self) -> Result<()> {
        if !self.nu.is_finite() || !self.z.is_finite() {
            return Err(Error::Domain(format!(
                "parabolic cylinder arguments must be finite (nu = {}, z = {})",
                self.nu, self.z
            )));
        }
        if self.nu > 0.0 {
            return Err(Error::Domain(format!(
                "parabolic cylinder order must be <= 0, got {}",
                self.nu
            )));
        }
        Ok(())
    }
}

/// `D_ν(z)`.
pub fn pcf_d(args: PcfArgs) -> Result<f64> {
    args.check()?;
    if args.nu == 0.0 {
        return Ok((-0.25 * args.z * args.z).exp());
    }
    Ok(ln_pcf_d(args)?.exp())
}

/// `ln D_ν(z)`; `D_ν(z) > 0` for every `ν ≤ 0` on the real line.
pub fn ln_pcf_d(args: PcfArgs) -> Result<f64> {
    args.check()?;
    if args.nu == 0.0 {
        return Ok(-0.25 * args.z * args.z);
    }
    let a = -args.nu;
    Ok(-0.25 * args.z * args.z + ln_pcf_integral(a, args.z)? - ln_gamma(a))
}

/// `D_ν(0) = 2^{ν/2} √π / Γ((1-ν)/2)`.
pub fn pcf_d_at_zero(nu: f64) -> f64 {
    ln_pcf_d_at_zero(nu).exp()
}

pub fn ln_pcf_d_at_zero(nu: f64) -> f64 {
    0.5 * nu * std::f64::consts::LN_2 + 0.5 * std::f64::consts::PI.ln() - ln_gamma(0.5 * (1.0 - nu))
}

/// `ln I(a, 0) = (a/2 - 1) ln 2 + ln Γ(a/2)`.
pub fn ln_pcf_integral_at_zero(a: f64) -> f64 {
    (0.5 * a - 1.0) * std::f64::consts::LN_2 + ln_gamma(0.5 * a)
}

fn check_order(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "kernel integral needs a finite positive order, got {a}"
        )));
    }
    Ok(())
}

/// `ln I(a, z)` with `I(a, z) = ∫_0^∞ t^{a-1} e^{-t²/2 - z t} dt`, `a > 0`.
pub fn ln_pcf_integral(a: f64, z: f64) -> Result<f64> {
    check_order(a)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!(
            "kernel integral needs finite z, got {z}"
        )));
    }
    let am1 = a - 1.0;
    let psi = |t: f64| -0.5 * t * t - z * t;

    // Peak of the log-integrand, or of the Gaussian part when t^{a-1} is
    // non-increasing.
    let (peak, shift) = if am1 > 0.0 {
        let disc = (z * z + 4.0 * am1).sqrt();
        let t = if z >= 0.0 {
            2.0 * am1 / (z + disc)
        } else {
            0.5 * (disc - z)
        };
        (t, am1 * t.ln() + psi(t))
    } else {
        let t = (-z).max(0.0);
        (t, psi(t))
    };

    let lo = (peak - HALF_WIDTH).max(0.0);
    let hi = peak + HALF_WIDTH;
    let log_rel = log_relative_to_peak(am1, z, peak, shift);
    let scaled = |t: f64| {
        if t <= 0.0 {
            return if am1 == 0.0 { (-shift).exp() } else { 0.0 };
        }
        log_rel(t).exp()
    };

    let mut total = 0.0;
    let mut start = lo;
    if lo == 0.0 && a < 2.0 {
        // ∫_0^c t^{a-1} g = g(0) c^a / a + ∫_0^c t^{a-1} (g - g(0)),
        // g(t) = e^{ψ(t) - shift}; the remainder integrand is O(t^a).
        let c = hi.min(1.0).min(1.0 / z.abs().max(1e-300));
        let head = (a * c.ln() - a.ln() - shift).exp();
        let rest = integrate_adaptive(
            rule(),
            |t: f64| {
                if t <= 0.0 {
                    0.0
                } else {
                    (am1 * t.ln() - shift).exp() * psi(t).exp_m1()
                }
            },
            0.0,
            c,
            &options_abs(head),
        )?;
        total += head + rest.value;
        start = c;
    }
    let mut breaks = vec![start];
    if peak > start && peak < hi {
        breaks.push(peak);
    }
    breaks.push(hi);
    for w in breaks.windows(2) {
        total += integrate_adaptive(rule(), scaled, w[0], w[1], &options_abs(total))?.value;
    }
    Ok(shift + total.ln())
}

/// `ln(1 + v) - v` without cancellation for small `v`.
fn ln1p_minus_identity(v: f64) -> f64 {
    if v.abs() >= 0.25 {
        return v.ln_1p() - v;
    }
    let mut power = v * v;
    let mut sum = 0.0;
    let mut k = 2.0;
    loop {
        let term = if k % 2.0 == 0.0 {
            -power / k
        } else {
            power / k
        };
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return sum;
        }
        power *= v;
        k += 1.0;
    }
}

/// `(a-1) ln t - t²/2 - z t - shift` expanded around the peak, so that large
/// orders do not lose digits to cancelling logarithms.
fn log_relative_to_peak(am1: f64, z: f64, peak: f64, shift: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        if am1 > 0.0 {
            let u = t - peak;
            am1 * ln1p_minus_identity(u / peak) + u * (am1 / peak - peak - z) - 0.5 * u * u
        } else {
            am1 * t.ln() - 0.5 * t * t - z * t - shift
        }
    }
}

/// Options whose absolute floor is a fraction of an already accumulated
/// positive part of the same integral.
fn options_abs(reference: f64) -> AdaptiveOptions<f64> {
    AdaptiveOptions {
        abs_tol: 1e-3 * REL_TOL * reference.abs(),
        ..options()
    }
}

/// `ln [I(a, z0) - I(a, z0 + δ)]` for `δ > 0`, computed without cancellation
/// as `ln ∫_0^∞ t^{a-1} e^{-t²/2 - z0 t} (1 - e^{-δ t}) dt`.
pub fn ln_pcf_integral_gap(a: f64, z0: f64, delta: f64) -> Result<f64> {
    check_order(a)?;
    if !(delta > 0.0 && delta.is_finite()) || !z0.is_finite() {
        return Err(Error::Domain(format!(
            "kernel gap needs finite z0 and positive finite delta, got ({z0}, {delta})"
        )));
    }
    let am1 = a - 1.0;
    let psi = |t: f64| -0.5 * t * t - z0 * t;
    let (peak, shift) = if am1 > 0.0 {
        let disc = (z0 * z0 + 4.0 * am1).sqrt();
        let t = if z0 >= 0.0 {
            2.0 * am1 / (z0 + disc)
        } else {
            0.5 * (disc - z0)
        };
        (t, am1 * t.ln() + psi(t))
    } else {
        let t = (-z0).max(0.0);
        (t, psi(t))
    };
    let lo = (peak - HALF_WIDTH).max(0.0);
    let hi = peak + HALF_WIDTH;
    let log_rel = log_relative_to_peak(am1, z0, peak, shift);
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        log_rel(t).exp() * -(-delta * t).exp_m1()
    };
    let mut breaks = vec![lo];
    // Resolve the O(t^a) behaviour near zero separately from the bulk.
    let knee = (1.0 / delta).min(1.0);
    if lo == 0.0 && knee < hi {
        breaks.push(knee);
    }
    if peak > *breaks.last().unwrap() && peak < hi {
        breaks.push(peak);
    }
    breaks.push(hi);
    let mut total = 0.0;
    for w in breaks.windows(2).rev() {
        total += integrate_adaptive(rule(), f, w[0], w[1], &options_abs(total))?.value;
    }
    Ok(shift + total.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Composite fixed-rule evaluation of the defining integral, with ten
    /// times the node density of the adaptive path's first pass.
    fn brute_force_d(nu: f64, z: f64) -> f64 {
        let a = -nu;
        let g = GaussLegendre::<f64>::new(30);
        let panels = 20_000;
        let upper = 40.0 + z.abs();
        let h = upper / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let lo = k as f64 * h;
            if k == 0 {
                if a < 1.0 {
                    // t = u^{1/a} absorbs t^{a-1}
                    let top = h.powf(a);
                    sum += g.integrate(
                        &|u: f64| (-0.5 * u.powf(2.0 / a) - z * u.powf(1.0 / a)).exp(),
                        0.0,
                        top,
                    ) / a;
                } else {
                    // dyadic grading towards the t^{a-1} kink at zero
                    let f = |t: f64| t.powf(a - 1.0) * (-0.5 * t * t - z * t).exp();
                    let mut right = h;
                    for _ in 0..200 {
                        sum += g.integrate(&f, 0.5 * right, right);
                        right *= 0.5;
                    }
                }
                continue;
            }
            sum += g.integrate(
                &|t: f64| t.powf(a - 1.0) * (-0.5 * t * t - z * t).exp(),
                lo,
                lo + h,
            );
        }
        (-0.25 * z * z).exp() * sum / statrs::function::gamma::gamma(a)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn order_zero_is_gaussian() {
        let v = pcf_d(PcfArgs::new(0.0, 1.3)).unwrap();
        assert_eq!(v, (-1.69f64 / 4.0).exp());
    }

    #[test]
    fn order_minus_one_at_zero() {
        let v = pcf_d(PcfArgs::new(-1.0, 0.0)).unwrap();
        assert!(rel(v, (PI / 2.0).sqrt()) < 1e-13);
        assert!(rel(pcf_d_at_zero(-1.0), (PI / 2.0).sqrt()) < 1e-14);
    }

    #[test]
    fn closed_form_at_zero() {
        assert!((pcf_d_at_zero(0.0) - 1.0).abs() < 1e-15);
        assert!(rel(pcf_d_at_zero(-4.0), 1.0 / 3.0) < 1e-14);
    }

    #[test]
    fn order_minus_one_matches_erfc_form() {
        // D_{-1}(z) = √(π/2) e^{z²/4} erfc(z/√2)
        for &z in &[-3.0f64, -0.7, 0.4, 1.0, 2.5, 6.0] {
            let expect = (PI / 2.0).sqrt()
                * (0.25 * z * z).exp()
                * statrs::function::erf::erfc(z / 2f64.sqrt());
            let got = pcf_d(PcfArgs::new(-1.0, z)).unwrap();
            // statrs erfc is good to about 1e-10
            assert!(rel(got, expect) < 1e-9, "z={z}: {got} vs {expect}");
        }
    }

    #[test]
    fn matches_brute_force_oracle() {
        for &(nu, z) in &[
            (-2.5, 1.7),
            (-0.3, 2.0),
            (-0.5, -1.5),
            (-7.25, 0.6),
            (-1.5, 4.0),
        ] {
            let got = pcf_d(PcfArgs::new(nu, z)).unwrap();
            let expect = brute_force_d(nu, z);
            assert!(rel(got, expect) < 1e-10, "nu={nu} z={z}: {got} vs {expect}");
        }
    }

    #[test]
    fn matches_high_precision_reference() {
        // 30-digit values of D_nu(z)
        let table = [
            (-1.0, 1.0, 0.51064374107966067),
            (-1.5, 4.0, 0.0020703503217836858),
            (-0.3, 2.0, 0.28816164197541082),
            (-2.5, 1.7, 0.057993978421688685),
            (-7.25, 0.6, 0.0042581887388911264),
            (-0.5, -1.5, 2.2757018820403529),
            (-30.0, 5.0, 9.7393759819989028e-29),
            (-0.01, 8.0, 1.1021073290771014e-7),
        ];
        for (nu, z, expect) in table {
            let got = pcf_d(PcfArgs::new(nu, z)).unwrap();
            assert!(rel(got, expect) < 1e-12, "nu={nu} z={z}: {got} vs {expect}");
        }
    }

    #[test]
    fn refuses_positive_order() {
        assert!(matches!(
            pcf_d(PcfArgs::new(0.5, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn small_order_log_scale() {
        // ln I(a, 0) ~ -ln a for a -> 0
        let a = 5e-5;
        let v = ln_pcf_integral(a, 0.0).unwrap();
        assert!(rel(v, ln_pcf_integral_at_zero(a)) < 1e-13);
    }

    #[test]
    fn large_orders_match_closed_form() {
        for a in [500.0, 2500.0, 2e5] {
            let got = ln_pcf_integral(a, 0.0).unwrap();
            let want = ln_pcf_integral_at_zero(a);
            assert!(
                (got - want).abs() < 1e-13 * want.abs().max(1.0),
                "{a}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn gap_matches_difference() {
        for &(a, z0, d) in &[
            (0.2, 0.0, 0.5),
            (1.0, 0.0, 1.0),
            (3.5, 0.0, 2.0),
            (40.0, 0.0, 0.3),
            (0.7, -2.0, 1.5),
            (6.0, 1.0, 3.0),
        ] {
            let lhs = ln_pcf_integral(a, z0).unwrap().exp();
            let rhs = ln_pcf_integral(a, z0 + d).unwrap().exp();
            let gap = ln_pcf_integral_gap(a, z0, d).unwrap().exp();
            assert!(rel(gap, lhs - rhs) < 1e-11, "a={a} z0={z0} d={d}");
        }
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        for &(nu, z) in &[
            (-200.0, 30.0),
            (-200.0, -30.0),
            (-1e-4, 30.0),
            (-1e-4, -30.0),
            (-60.0, 0.0),
        ] {
            let v = ln_pcf_d(PcfArgs::new(nu, z)).unwrap();
            assert!(v.is_finite(), "nu={nu} z={z}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn value_at_zero_is_consistent(nu in -50.0f64..-1e-3) {
            let direct = pcf_d(PcfArgs::new(nu, 0.0)).unwrap();
            prop_assert!(rel(direct, pcf_d_at_zero(nu)) < 1e-12);
        }

        #[test]
        fn positive_on_nonnegative_axis(nu in -100.0f64..0.0, z in 0.0f64..30.0) {
            prop_assert!(pcf_d(PcfArgs::new(nu, z)).unwrap() > 0.0);
        }

        #[test]
        fn three_term_recurrence(nu in -49.0f64..-1.0, z in -10.0f64..10.0) {
            let d = |n: f64| pcf_d(PcfArgs::new(n, z)).unwrap();
            let (up, mid, down) = (d(nu + 1.0), d(nu), d(nu - 1.0));
            let scale = up.abs().max((z * mid).abs()).max((nu * down).abs());
            prop_assert!((up - z * mid + nu * down).abs() <= 1e-8 * scale);
        }

        #[test]
        fn weber_equation_residual(nu in -20.0f64..0.0, z in -5.0f64..5.0) {
            let h = 1e-3;
            let d = |x: f64| pcf_d(PcfArgs::new(nu, x)).unwrap();
            let (l, c, r) = (d(z - h), d(z), d(z + h));
            let second = (l - 2.0 * c + r) / (h * h);
            let coef = nu + 0.5 - 0.25 * z * z;
            let scale = second.abs().max((coef * c).abs());
            prop_assert!((second + coef * c).abs() <= 1e-5 * scale);
        }
    }
}
