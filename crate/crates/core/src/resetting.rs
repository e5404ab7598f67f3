//! Transforms and moments of the passage time under Poissonian resetting.
//!
//! With `s = λ + r` and the no-reset transforms at `x` and at `x_R`:
//!
//! ```text
//! M_r(x, λ)  = (r M_0(x_R, s) + λ M_0(x, s)) / (λ + r M_0(x_R, s))
//! Q̂_r(x, λ)  = Q̂_0(x, s) / (1 - r Q̂_0(x_R, s))
//! E[τ]       = (1 - M_0(x, r)) / (r M_0(x_R, r))
//! E[τ²]      = -2 {Q̂₀'(x) M_0(x_R) + r Q̂₀'(x_R) Q̂_0(x)} / M_0(x_R)²
//! ```
//!
//! where `Q̂₀'` is the λ-derivative at `λ = r`.

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, ProblemKind, ProblemSpec};
use crate::transform::{baseline_no_reset, bm_fet_parts, bm_fpt_parts, no_reset_lt, LtParts};

/// Mean, and when requested second moment and variance, of `τ(x, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    pub mean: f64,
    pub second: Option<f64>,
    pub variance: Option<f64>,
}

/// How `∂Q̂_0/∂λ` is obtained for the second moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    /// Exact derivative of the closed form where one exists (Brownian
    /// and conjugated models), central differences otherwise.
    #[default]
    Auto,
    /// Forward-mode differentiation of the closed form; Brownian family only.
    Analytic,
    /// Central difference with step `max(1e-5 r, 1e-7)`.
    FiniteDifference,
}

/// Smallest rate accepted by the second-moment routines.
pub const MIN_DERIVATIVE_RATE: f64 = 1e-8;

/// Mean beyond `e^{700}` is reported as `+∞`.
const LN_OVERFLOW: f64 = 700.0;

fn check_rate(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Validation(format!(
            "resetting rate must be finite and >= 0, got {r}"
        )));
    }
    Ok(())
}

fn check_lam(lam: f64) -> Result<()> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::Validation(format!(
            "transform argument must be positive, got {lam}"
        )));
    }
    Ok(())
}

/// `M_r(x, λ; x_R) = E[e^{-λ τ(x, r)}]`.
pub fn lt_with_reset(spec: &ProblemSpec, r: f64, lam: f64) -> Result<f64> {
    spec.check()?;
    check_rate(r)?;
    check_lam(lam)?;
    let s = lam + r;
    let at_x = no_reset_lt(&spec.model, spec.kind, spec.x, s)?;
    if r == 0.0 {
        return Ok(at_x.m0);
    }
    let at_r = no_reset_lt(&spec.model, spec.kind, spec.x_r, s)?;
    Ok((r * at_r.m0 + lam * at_x.m0) / (lam + r * at_r.m0))
}

/// `Q̂_r(x, λ; x_R)`, the transform of `P[τ(x, r) > t]`.
pub fn survival_lt_with_reset(spec: &ProblemSpec, r: f64, lam: f64) -> Result<f64> {
    spec.check()?;
    check_rate(r)?;
    check_lam(lam)?;
    let s = lam + r;
    let at_x = no_reset_lt(&spec.model, spec.kind, spec.x, s)?;
    if r == 0.0 {
        return Ok(at_x.q0_hat);
    }
    let at_r = no_reset_lt(&spec.model, spec.kind, spec.x_r, s)?;
    // 1 - r Q̂_0(x_R, s) = (λ + r M_0(x_R, s)) / s
    Ok(at_x.complement / (lam + r * at_r.m0))
}

/// `E[τ(x, r)]`; at `r = 0` the no-reset mean (possibly `+∞`).
pub fn mean_with_reset(spec: &ProblemSpec, r: f64) -> Result<f64> {
    spec.check()?;
    check_rate(r)?;
    if r == 0.0 {
        return baseline_no_reset(spec);
    }
    let at_x = no_reset_lt(&spec.model, spec.kind, spec.x, r)?;
    if at_x.complement == 0.0 {
        return Ok(0.0);
    }
    let at_r = no_reset_lt(&spec.model, spec.kind, spec.x_r, r)?;
    let ln_mean = at_x.complement.ln() - r.ln() - at_r.ln_m0;
    if ln_mean > LN_OVERFLOW {
        return Ok(f64::INFINITY);
    }
    Ok(ln_mean.exp())
}

/// `Q̂_0` and `∂Q̂_0/∂λ` at `λ = r`.
#[derive(Debug, Clone, Copy)]
struct Slope {
    q: f64,
    dq: f64,
    m0: f64,
}

fn analytic_slope(spec: &ProblemSpec, x: f64, r: f64) -> Result<Slope> {
    let lam = Dual::variable(r);
    let c = Dual::constant;
    let parts: LtParts<Dual<f64>> = match (&spec.model, spec.kind) {
        (ModelSpec::DriftedBm { eta }, ProblemKind::Fpt) => bm_fpt_parts(c(*eta), c(x), lam),
        (ModelSpec::DriftedBm { eta }, ProblemKind::Fet { b }) => {
            bm_fet_parts(c(*eta), c(x), c(b), lam)
        }
        (ModelSpec::Conjugated(map), ProblemKind::Fpt) => {
            bm_fpt_parts(c(0.0), c(map.forward(x)), lam)
        }
        (ModelSpec::Conjugated(map), ProblemKind::Fet { b }) => {
            bm_fet_parts(c(0.0), c(map.forward(x)), c(map.forward(b)), lam)
        }
        (model, _) => {
            return Err(Error::Domain(format!(
                "no closed-form derivative for the '{}' model",
                model.label()
            )))
        }
    };
    let q = parts.complement / lam;
    Ok(Slope {
        q: q.re,
        dq: q.eps,
        m0: parts.m0.re,
    })
}

fn difference_slope(spec: &ProblemSpec, x: f64, r: f64) -> Result<Slope> {
    let h = (1e-5 * r).max(1e-7).min(0.5 * r);
    let at = |lam: f64| no_reset_lt(&spec.model, spec.kind, x, lam);
    let mid = at(r)?;
    let up = at(r + h)?.q0_hat;
    let down = at(r - h)?.q0_hat;
    Ok(Slope {
        q: mid.q0_hat,
        dq: (up - down) / (2.0 * h),
        m0: mid.m0,
    })
}

/// `E[τ²(x, r)]` with the default derivative strategy.
pub fn second_moment_with_reset(spec: &ProblemSpec, r: f64) -> Result<f64> {
    second_moment_with(spec, r, DerivativeMode::Auto)
}

pub fn second_moment_with(spec: &ProblemSpec, r: f64, mode: DerivativeMode) -> Result<f64> {
    spec.check()?;
    check_rate(r)?;
    if r < MIN_DERIVATIVE_RATE {
        return Err(Error::DerivativeStep(r));
    }
    let closed_form = matches!(
        spec.model,
        ModelSpec::DriftedBm { .. } | ModelSpec::Conjugated(_)
    );
    let slope = |x: f64| match mode {
        DerivativeMode::Analytic => analytic_slope(spec, x, r),
        DerivativeMode::FiniteDifference => difference_slope(spec, x, r),
        DerivativeMode::Auto if closed_form => analytic_slope(spec, x, r),
        DerivativeMode::Auto => difference_slope(spec, x, r),
    };
    let sx = slope(spec.x)?;
    let sr = slope(spec.x_r)?;
    Ok(-2.0 * (sx.dq * sr.m0 + r * sr.dq * sx.q) / (sr.m0 * sr.m0))
}

/// Mean and, for `r > 0`, second moment and variance.
pub fn moments(spec: &ProblemSpec, r: f64) -> Result<MomentResult> {
    let mean = mean_with_reset(spec, r)?;
    if r < MIN_DERIVATIVE_RATE || !mean.is_finite() {
        return Ok(MomentResult {
            mean,
            second: None,
            variance: None,
        });
    }
    let second = second_moment_with_reset(spec, r)?;
    Ok(MomentResult {
        mean,
        second: Some(second),
        variance: Some((second - mean * mean).max(0.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MonotoneMap;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn mean_examples() {
        let bm = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
        assert!((mean_with_reset(&bm, 1.269).unwrap() - 3.088).abs() < 1e-3);
        let fet = ProblemSpec::fet(ModelSpec::bm(0.0), 0.5, 0.2, 1.0);
        assert!((mean_with_reset(&fet, 45.009).unwrap() - 0.1451).abs() < 1e-4);
        let ou = ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 0.5, 0.5);
        assert!((mean_with_reset(&ou, 3.10).unwrap() - 0.59).abs() < 5e-3);
    }

    #[test]
    fn brownian_mean_closed_form() {
        // (1/r) e^{x_R k} (1 - e^{-x k}), k = η + √(η² + 2r)
        let (eta, x, xr, r) = (0.4f64, 1.3f64, 0.6f64, 0.9f64);
        let k = eta + (eta * eta + 2.0 * r).sqrt();
        let expect = (xr * k).exp() * (1.0 - (-x * k).exp()) / r;
        let got = mean_with_reset(&ProblemSpec::fpt(ModelSpec::bm(eta), x, xr), r).unwrap();
        assert!(rel(got, expect) < 1e-13);
    }

    #[test]
    fn zero_rate_falls_back_to_baseline() {
        let spec = ProblemSpec::fet(ModelSpec::bm(0.0), 0.3, 0.3, 1.0);
        assert!((mean_with_reset(&spec, 0.0).unwrap() - 0.21).abs() < 1e-15);
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
        assert!(mean_with_reset(&spec, 0.0).unwrap().is_infinite());
        assert_eq!(lt_with_reset(&spec, 0.0, 2.0).unwrap(), (-2.0f64).exp());
    }

    #[test]
    fn start_on_boundary() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 0.0, 1.0);
        assert_eq!(mean_with_reset(&spec, 5.0).unwrap(), 0.0);
        assert_eq!(lt_with_reset(&spec, 2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn huge_reset_position_overflows_to_infinity() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 800.0);
        assert!(mean_with_reset(&spec, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn reset_transform_closed_form() {
        let (x, xr, r, lam) = (0.7f64, 1.0f64, 2.0f64, 1.0f64);
        let k = (2.0f64 * (lam + r)).sqrt();
        let expect = (lam * (-x * k).exp() + r * (-xr * k).exp()) / (lam + r * (-xr * k).exp());
        let got = lt_with_reset(&ProblemSpec::fpt(ModelSpec::bm(0.0), x, xr), r, lam).unwrap();
        assert!(rel(got, expect) < 1e-14);
    }

    #[test]
    fn survival_transform_tends_to_mean() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(-0.2), 1.5, 0.8);
        let r = 0.7;
        let q = survival_lt_with_reset(&spec, r, 1e-9).unwrap();
        assert!(rel(q, mean_with_reset(&spec, r).unwrap()) < 1e-6);
    }

    #[test]
    fn second_moment_on_diagonal() {
        // x = x_R: E[τ²] = -2 (M - r ∂M - 1) / (r M)², M = e^{-x√(2r)}
        let (x, r) = (1.0f64, 1.269f64);
        let m = (-x * (2.0 * r).sqrt()).exp();
        let dm = -x / (2.0 * r).sqrt() * m;
        let expect = -2.0 * (m - r * dm - 1.0) / (r * m).powi(2);
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), x, x);
        assert!(rel(second_moment_with_reset(&spec, r).unwrap(), expect) < 1e-13);
    }

    #[test]
    fn derivative_modes_agree() {
        let specs = [
            ProblemSpec::fpt(ModelSpec::bm(0.3), 0.8, 1.4),
            ProblemSpec::fet(ModelSpec::bm(-1.0), 0.3, 0.6, 1.0),
            ProblemSpec::fpt(ModelSpec::Conjugated(MonotoneMap::feller()), 1.0, 2.0),
        ];
        for spec in &specs {
            for r in [0.05, 1.0, 30.0] {
                let a = second_moment_with(spec, r, DerivativeMode::Analytic).unwrap();
                let f = second_moment_with(spec, r, DerivativeMode::FiniteDifference).unwrap();
                assert!(rel(f, a) < 1e-6, "{spec:?} r={r}: {a} vs {f}");
            }
        }
    }

    #[test]
    fn small_rate_is_refused() {
        let spec = ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 1.0, 1.0);
        assert_eq!(
            second_moment_with_reset(&spec, 1e-9),
            Err(Error::DerivativeStep(1e-9))
        );
        let m = moments(&spec, 0.0).unwrap();
        assert!(m.second.is_none());
    }

    #[test]
    fn analytic_mode_needs_closed_form() {
        let spec = ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 1.0, 1.0);
        assert!(second_moment_with(&spec, 1.0, DerivativeMode::Analytic).is_err());
    }

    #[test]
    fn variance_is_nonnegative() {
        let spec = ProblemSpec::fpt(ModelSpec::ou(1.0, 1.0), 0.5, 0.5);
        let m = moments(&spec, 3.1).unwrap();
        assert!(m.second.unwrap() >= m.mean * m.mean);
        assert!(m.variance.unwrap() >= 0.0);
    }
}
