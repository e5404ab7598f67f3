//! Laplace transforms of passage times without resetting.
//!
//! `M_0(x, λ) = E[e^{-λτ}]` and `Q̂_0(x, λ) = (1 - M_0(x, λ)) / λ`, the
//! transform of the survival function. The complement `1 - M_0` is computed
//! directly (never as a difference with `M_0 ≈ 1`), so `Q̂_0` stays accurate
//! as `λ → 0`.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, MonotoneMap, ProblemKind, ProblemSpec};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, GaussLegendre};
use crate::special::{ln_pcf_integral, ln_pcf_integral_at_zero, ln_pcf_integral_gap};

/// `M_0`, its complement and its logarithm at one `(x, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtParts<F> {
    pub m0: F,
    pub complement: F,
    pub ln_m0: F,
}

impl<F: Float> LtParts<F> {
    fn trivial() -> Self {
        Self {
            m0: F::one(),
            complement: F::zero(),
            ln_m0: F::zero(),
        }
    }

    /// Reconciles independently computed `ln M_0` and `1 - M_0`, keeping
    /// whichever of `M_0`, `1 - M_0` is the smaller and deriving the other.
    fn from_log_and_complement(ln_m0: F, complement: F) -> Self {
        let half = F::from(0.5).unwrap();
        let ln_m0 = ln_m0.min(F::zero());
        if complement < half {
            let complement = complement.max(F::zero());
            Self {
                m0: F::one() - complement,
                complement,
                ln_m0: (-complement).ln_1p(),
            }
        } else {
            let m0 = ln_m0.exp();
            Self {
                m0,
                complement: F::one() - m0,
                ln_m0,
            }
        }
    }
}

/// Transform of the no-reset passage time at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtValue {
    pub lam: f64,
    /// `M_0(x, λ)` in `(0, 1]`.
    pub m0: f64,
    /// `Q̂_0(x, λ) = (1 - M_0) / λ`.
    pub q0_hat: f64,
    /// `1 - M_0`.
    pub complement: f64,
    /// `ln M_0`, finite even where `M_0` underflows.
    pub ln_m0: f64,
}

impl LtValue {
    fn from_parts(parts: LtParts<f64>, lam: f64) -> Self {
        Self {
            lam,
            m0: parts.m0,
            q0_hat: parts.complement / lam,
            complement: parts.complement,
            ln_m0: parts.ln_m0,
        }
    }
}

fn one_minus_exp<F: Float>(k: F, u: F) -> F {
    -(-k * u).exp_m1()
}

/// `(η + β, β - η)` with `β = √(η² + 2λ)`, each free of cancellation;
/// their product is `2λ`.
fn bm_rates<F: Float>(eta: F, lam: F) -> (F, F) {
    let two = F::one() + F::one();
    let beta = (eta * eta + two * lam).sqrt();
    if eta >= F::zero() {
        let kp = eta + beta;
        (kp, two * lam / kp)
    } else {
        let km = beta - eta;
        (two * lam / km, km)
    }
}

/// Drifted Brownian motion `x + ηt + B_t`, passage through 0.
pub fn bm_fpt_parts<F: Float>(eta: F, x: F, lam: F) -> LtParts<F> {
    if x <= F::zero() {
        return LtParts::trivial();
    }
    let (kp, _) = bm_rates(eta, lam);
    let ln_m0 = -kp * x;
    LtParts {
        m0: ln_m0.exp(),
        complement: one_minus_exp(kp, x),
        ln_m0,
    }
}

/// Drifted Brownian motion, exit from `(0, b)`.
pub fn bm_fet_parts<F: Float>(eta: F, x: F, b: F, lam: F) -> LtParts<F> {
    if x <= F::zero() || x >= b {
        return LtParts::trivial();
    }
    let (kp, km) = bm_rates(eta, lam);
    let y = b - x;
    let two_beta = kp + km;
    let big_a = one_minus_exp(two_beta, y);
    let big_b = one_minus_exp(two_beta, x);
    let ln_d = one_minus_exp(two_beta, b).ln();

    // M_0 = e^{-(η+β)x} A/D + e^{(η-β)(b-x)} B/D
    let l1 = -kp * x + big_a.ln();
    let l2 = -km * y + big_b.ln();
    let top = l1.max(l2);
    let ln_m0 = top + ((l1 - top).exp() + (l2 - top).exp()).ln() - ln_d;

    // D(1 - M_0) = f(kp, x) f(km, y) [1 - g R] with
    // g R = e^{-kp x - km y} f(kp, y) f(km, x) / (f(kp, x) f(km, y)),
    // f(k, u) = 1 - e^{-k u}.
    let fpx = one_minus_exp(kp, x);
    let fmy = one_minus_exp(km, y);
    let ln_gr = -kp * x - km * y + one_minus_exp(kp, y).ln() + one_minus_exp(km, x).ln()
        - fpx.ln()
        - fmy.ln();
    let complement = (fpx * fmy * -ln_gr.exp_m1()).ln() - ln_d;
    LtParts::from_log_and_complement(ln_m0, complement.exp())
}

/// `M_0(x, λ) = e^{-x(η + √(η² + 2λ))}`.
pub fn m0_fpt_bm<F: Float>(eta: F, x: F, lam: F) -> F {
    bm_fpt_parts(eta, x, lam).m0
}

pub fn m0_fet_bm<F: Float>(eta: F, x: F, b: F, lam: F) -> F {
    bm_fet_parts(eta, x, b, lam).m0
}

/// `Q̂_0(x, λ)` for the Brownian exit problem.
pub fn q0_hat_fet_bm<F: Float>(eta: F, x: F, b: F, lam: F) -> F {
    bm_fet_parts(eta, x, b, lam).complement / lam
}

/// Mean exit time of drifted Brownian motion from `(0, b)`:
/// `(b (1 - e^{-2ηx}) / (1 - e^{-2ηb}) - x) / η`, `x (b - x)` at `η = 0`.
pub fn fet_bm_mean<F: Float>(eta: F, x: F, b: F) -> F {
    let c = |v: f64| F::from(v).unwrap();
    if x <= F::zero() || x >= b {
        return F::zero();
    }
    let y = b - x;
    if (eta * b).abs() < c(1e-3) {
        // Taylor expansion in η through fourth order.
        let e = eta;
        let b2 = b * b;
        let x2 = x * x;
        return x * y + e * x * y * (b - c(2.0) * x) / c(3.0) - e * e * x2 * y * y / c(3.0)
            + e * e
                * e
                * x
                * (-b2 * b2 + c(10.0) * b2 * x2 - c(15.0) * b * x2 * x + c(6.0) * x2 * x2)
                / c(45.0)
            + e * e * e * e * x2 * y * y * (b2 + c(2.0) * b * x - c(2.0) * x2) / c(45.0);
    }
    let two = c(2.0);
    let ratio = if eta > F::zero() {
        (-two * eta * x).exp_m1() / (-two * eta * b).exp_m1()
    } else {
        // rewritten to avoid overflow of e^{-2ηb} for η < 0
        (two * eta * y).exp() * (two * eta * x).exp_m1() / (two * eta * b).exp_m1()
    };
    (b * ratio - x) / eta
}

fn check_lam(lam: f64) -> Result<()> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::Domain(format!(
            "transform argument must be positive, got {lam}"
        )));
    }
    Ok(())
}

/// OU `dX = -μX dt + σ dB`, passage through 0:
/// `M_0 = e^{μx²/2σ²} D_{-λ/μ}(x√(2μ/σ²)) / D_{-λ/μ}(0)`.
pub fn ou_fpt_parts(mu: f64, sigma: f64, x: f64, lam: f64) -> Result<LtParts<f64>> {
    check_lam(lam)?;
    if x <= 0.0 {
        return Ok(LtParts::trivial());
    }
    let a = lam / mu;
    let z = x * (2.0 * mu).sqrt() / sigma;
    let ln_i0 = ln_pcf_integral_at_zero(a);
    let ln_m0 = (ln_pcf_integral(a, z)? - ln_i0).min(0.0);
    let complement = if ln_m0 > -std::f64::consts::LN_2 {
        (ln_pcf_integral_gap(a, 0.0, z)? - ln_i0).exp()
    } else {
        -ln_m0.exp_m1()
    };
    Ok(LtParts::from_log_and_complement(ln_m0, complement))
}

/// Condition threshold beyond which the OU exit system is declared singular.
const MAX_CONDITION: f64 = 1e13;

/// OU exit from `(0, b)`. With `w₁(x) = I(a, -z)`, `w₂(x) = I(a, z)`
/// (`I` the kernel integral of [`crate::special`], `z = x√(2μ)/σ`), the
/// transform is `c₁ ŵ₁ + c₂ ŵ₂` for the columns normalised to one at `b`
/// and at `0`. The boundary system `[[ŵ₁(0), 1], [1, ŵ₂(b)]] c = 1` is
/// eliminated in the complement variables `1 - ŵ₁(0)`, `1 - ŵ₂(b)`.
pub fn ou_fet_parts(mu: f64, sigma: f64, x: f64, b: f64, lam: f64) -> Result<LtParts<f64>> {
    check_lam(lam)?;
    if x <= 0.0 || x >= b {
        return Ok(LtParts::trivial());
    }
    let a = lam / mu;
    let k = (2.0 * mu).sqrt() / sigma;
    let (z, zb) = (x * k, b * k);
    let ln_i0 = ln_pcf_integral_at_zero(a);
    let ln_i_neg_b = ln_pcf_integral(a, -zb)?;
    let ln_w1 = ln_pcf_integral(a, -z)? - ln_i_neg_b;
    let ln_w2 = ln_pcf_integral(a, z)? - ln_i0;

    let h1_zero = (ln_pcf_integral_gap(a, -zb, zb)? - ln_i_neg_b).exp();
    let g2_b = (ln_pcf_integral_gap(a, 0.0, zb)? - ln_i0).exp();
    let det = h1_zero + g2_b * (1.0 - h1_zero);
    let p = 1.0 - h1_zero;
    let q = 1.0 - g2_b;
    let norm = 1.0 + p.max(q);
    let condition = norm * norm / det;
    if !(condition.is_finite() && condition < MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let (c1, c2) = (g2_b / det, h1_zero / det);

    let l1 = c1.ln() + ln_w1;
    let l2 = c2.ln() + ln_w2;
    let top = l1.max(l2);
    let ln_m0 = top + ((l1 - top).exp() + (l2 - top).exp()).ln();

    let complement = if ln_m0 > -std::f64::consts::LN_2 {
        // 1 - M_0 = [g₂(b) h₁(x) - h₁(0) (ŵ₂(x) - ŵ₂(b))] / det
        let h1_x = (ln_pcf_integral_gap(a, -zb, zb - z)? - ln_i_neg_b).exp();
        let w2_drop = (ln_pcf_integral_gap(a, z, zb - z)? - ln_i0).exp();
        (g2_b * h1_x - h1_zero * w2_drop) / det
    } else {
        -ln_m0.exp_m1()
    };
    Ok(LtParts::from_log_and_complement(ln_m0, complement))
}

pub fn m0_fpt_ou(mu: f64, sigma: f64, x: f64, lam: f64) -> Result<f64> {
    Ok(ou_fpt_parts(mu, sigma, x, lam)?.m0)
}

/// CIR through `Y = √X`: `M_0^{CIR}(x, λ) = M_0^{OU}(√x, λ)`.
pub fn m0_fpt_cir(mu: f64, sigma: f64, x: f64, lam: f64) -> Result<f64> {
    m0_fpt_ou(mu, sigma, x.sqrt(), lam)
}

fn mapped(map: &MonotoneMap, x: f64) -> Result<f64> {
    if !map.contains(x) {
        let (lo, hi) = map.domain();
        return Err(Error::Domain(format!(
            "{x} outside the '{}' map domain [{lo}, {hi}]",
            map.name()
        )));
    }
    Ok(map.forward(x))
}

/// Passage of BM through 0 started at `v(x)`.
pub fn m0_fpt_conjugated(map: &MonotoneMap, x: f64, lam: f64) -> Result<f64> {
    check_lam(lam)?;
    Ok(m0_fpt_bm(0.0, mapped(map, x)?, lam))
}

pub fn m0_fet_ou(mu: f64, sigma: f64, x: f64, b: f64, lam: f64) -> Result<f64> {
    Ok(ou_fet_parts(mu, sigma, x, b, lam)?.m0)
}

/// Exit of BM from `(0, v(b))` started at `v(x)`.
pub fn m0_fet_conjugated(map: &MonotoneMap, x: f64, b: f64, lam: f64) -> Result<f64> {
    check_lam(lam)?;
    Ok(m0_fet_bm(0.0, mapped(map, x)?, mapped(map, b)?, lam))
}

/// `M_0`, `Q̂_0` at start `x` for any model and geometry.
pub fn no_reset_lt(model: &ModelSpec, kind: ProblemKind, x: f64, lam: f64) -> Result<LtValue> {
    check_lam(lam)?;
    let parts = match (model, kind) {
        (ModelSpec::DriftedBm { eta }, ProblemKind::Fpt) => bm_fpt_parts(*eta, x, lam),
        (ModelSpec::DriftedBm { eta }, ProblemKind::Fet { b }) => bm_fet_parts(*eta, x, b, lam),
        (ModelSpec::Ou { mu, sigma }, ProblemKind::Fpt) => ou_fpt_parts(*mu, *sigma, x, lam)?,
        (ModelSpec::Ou { mu, sigma }, ProblemKind::Fet { b }) => {
            ou_fet_parts(*mu, *sigma, x, b, lam)?
        }
        (ModelSpec::Cir { mu, sigma }, ProblemKind::Fpt) => {
            ou_fpt_parts(*mu, *sigma, x.sqrt(), lam)?
        }
        (ModelSpec::Cir { mu, sigma }, ProblemKind::Fet { b }) => {
            ou_fet_parts(*mu, *sigma, x.sqrt(), b.sqrt(), lam)?
        }
        (ModelSpec::Conjugated(map), ProblemKind::Fpt) => bm_fpt_parts(0.0, mapped(map, x)?, lam),
        (ModelSpec::Conjugated(map), ProblemKind::Fet { b }) => {
            bm_fet_parts(0.0, mapped(map, x)?, mapped(map, b)?, lam)
        }
    };
    Ok(LtValue::from_parts(parts, lam))
}

/// `E[τ(x, 0)] = (1/μ) ∫_0^∞ e^{-(σ²/2μ) y²/2} (1 - e^{-xy}) / y dy` for
/// the OU passage through 0.
pub fn ou_fpt_mean(mu: f64, sigma: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let s = sigma * sigma / (2.0 * mu);
    // Gaussian factor below 1e-18 beyond y_max.
    let y_max = (2.0 * 41.5 / s).sqrt();
    let f = |y: f64| {
        if y == 0.0 {
            x
        } else {
            -(-x * y).exp_m1() / y * (-0.5 * s * y * y).exp()
        }
    };
    let rule = GaussLegendre::<f64>::new(15);
    let opts = AdaptiveOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_panels: 2000,
    };
    let knee = (1.0 / x).min(y_max);
    let mut total = 0.0;
    for (lo, hi) in [(0.0, knee), (knee, y_max)] {
        total += integrate_adaptive(&rule, f, lo, hi, &opts)?.value;
    }
    Ok(total / mu)
}

/// Small-λ arguments of the Richardson step for exit-time baselines.
const RICHARDSON_LAMS: (f64, f64) = (1e-4, 5e-5);

/// `E[τ(x, 0)]`, the mean passage time without resetting (possibly `+∞`).
pub fn baseline_no_reset(spec: &ProblemSpec) -> Result<f64> {
    spec.check()?;
    let x = spec.x;
    if x == 0.0 || spec.kind.upper() == Some(x) {
        return Ok(0.0);
    }
    match (&spec.model, spec.kind) {
        (ModelSpec::DriftedBm { eta }, ProblemKind::Fpt) => {
            Ok(if *eta >= 0.0 { f64::INFINITY } else { -x / eta })
        }
        (ModelSpec::Ou { mu, sigma }, ProblemKind::Fpt) => ou_fpt_mean(*mu, *sigma, x),
        (ModelSpec::Cir { mu, sigma }, ProblemKind::Fpt) => ou_fpt_mean(*mu, *sigma, x.sqrt()),
        (ModelSpec::Conjugated(_), ProblemKind::Fpt) => Ok(f64::INFINITY),
        (ModelSpec::DriftedBm { eta }, ProblemKind::Fet { b }) => Ok(fet_bm_mean(*eta, x, b)),
        (ModelSpec::Conjugated(map), ProblemKind::Fet { b }) => {
            let (v, vb) = (map.forward(x), map.forward(b));
            Ok(v * (vb - v))
        }
        (model, kind) => {
            let (l1, l2) = RICHARDSON_LAMS;
            let q1 = no_reset_lt(model, kind, x, l1)?.q0_hat;
            let q2 = no_reset_lt(model, kind, x, l2)?.q0_hat;
            // Q̂_0(λ) = T - λ E[τ²]/2 + O(λ²); eliminate the linear term.
            Ok((l1 * q2 - l2 * q1) / (l1 - l2))
        }
    }
}
