//! Direct simulation of the resetting diffusion.
//!
//! Each path owns a ChaCha stream selected by its index, so estimates do not
//! depend on how paths are scheduled across threads.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ProblemSpec};
use crate::resetting::mean_with_reset;

/// Censoring above this fraction marks an estimate unreliable.
pub const UNRELIABLE_CENSORING: f64 = 1e-4;
/// Censoring above this fraction is a configuration error.
pub const MAX_CENSORING: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub t_max: f64,
    pub seed: u64,
    /// Count crossings between grid points through the Brownian-bridge
    /// hitting probability.
    pub bridge_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            n_paths: 100_000,
            t_max: 1e3,
            seed: 0x5eed,
            bridge_correction: true,
        }
    }
}

impl SimConfig {
    /// Default settings with `t_max` set to 50 times the analytic mean, or
    /// to `2500 / r` when the mean is infinite.
    pub fn for_query(spec: &ProblemSpec, r: f64) -> Result<Self> {
        let base = Self::default();
        let mean = mean_with_reset(spec, r)?;
        let scale = if mean.is_finite() && mean > 0.0 {
            mean
        } else if r > 0.0 {
            50.0 / r
        } else {
            50.0
        };
        Ok(Self {
            t_max: (50.0 * scale).max(100.0 * base.dt),
            ..base
        })
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self {
            dt,
            t_max: self.t_max.max(100.0 * dt),
            ..self
        }
    }

    pub fn with_paths(self, n_paths: usize) -> Self {
        Self { n_paths, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_bridge(self, bridge_correction: bool) -> Self {
        Self {
            bridge_correction,
            ..self
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !(self.t_max >= 100.0 * self.dt) || !self.t_max.is_finite() {
            return Err(Error::Config(format!(
                "t_max = {} must be finite and at least 100 dt",
                self.t_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exact Gaussian increments of Brownian motion, possibly in conjugated
    /// coordinates.
    Brownian,
    EulerMaruyama,
    /// Exact one-step Ornstein–Uhlenbeck transition.
    ExactOu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub second_moment: f64,
    pub second_moment_std_err: f64,
    pub censored_fraction: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub bridge_correction: bool,
}

impl McEstimate {
    pub fn unreliable(&self) -> bool {
        self.censored_fraction > UNRELIABLE_CENSORING
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_err
    }
}

#[derive(Debug, Clone, Copy)]
enum Dynamics {
    Bm { eta: f64 },
    OuEuler { mu: f64, sigma: f64 },
    OuExact { mu: f64, sigma: f64 },
}

/// Problem in simulation coordinates.
#[derive(Debug, Clone, Copy)]
struct Walk {
    dynamics: Dynamics,
    x: f64,
    x_r: f64,
    upper: Option<f64>,
    r: f64,
}

impl Walk {
    fn outside(&self, y: f64) -> bool {
        y <= 0.0 || self.upper.is_some_and(|b| y >= b)
    }

    /// Advances `a` by `h`; returns the new state and the probability that
    /// the path touched a boundary in between.
    fn step(&self, a: f64, h: f64, rng: &mut ChaCha8Rng, bridge: bool) -> (f64, f64) {
        let z: f64 = rng.sample(StandardNormal);
        let (c, lower_var, upper_var, c_lower) = match self.dynamics {
            Dynamics::Bm { eta } => (a + eta * h + h.sqrt() * z, h, h, None),
            Dynamics::OuEuler { mu, sigma } => {
                let s2h = sigma * sigma * h;
                (a - mu * a * h + sigma * h.sqrt() * z, s2h, s2h, None)
            }
            Dynamics::OuExact { mu, sigma } => {
                let decay = (-mu * h).exp();
                let var = sigma * sigma * -(-2.0 * mu * h).exp_m1() / (2.0 * mu);
                let c = a * decay + var.sqrt() * z;
                // e^{μt} X_t is a time-changed Brownian motion, so the lower
                // bridge is exact in those coordinates.
                let rho = var / (decay * decay);
                (c, rho, sigma * sigma * h, Some(c / decay))
            }
        };
        if !bridge || self.outside(c) {
            return (c, 0.0);
        }
        let c_lo = c_lower.unwrap_or(c);
        let p_lo = bridge_hit(a * c_lo, lower_var);
        let p_hi = self.upper.map_or(0.0, |b| bridge_hit((b - a) * (b - c), upper_var));
        (c, p_lo + p_hi - p_lo * p_hi)
    }
}

/// `exp(-2 d_a d_c / v)`, flushed to zero below `e^{-40}`.
fn bridge_hit(product: f64, var: f64) -> f64 {
    let e = -2.0 * product / var;
    if e < -40.0 {
        0.0
    } else {
        e.exp()
    }
}

fn walk_for(spec: &ProblemSpec, r: f64, exact_ou: bool) -> Walk {
    let upper = spec.kind.upper();
    let ou = |mu, sigma| {
        if exact_ou {
            Dynamics::OuExact { mu, sigma }
        } else {
            Dynamics::OuEuler { mu, sigma }
        }
    };
    let (dynamics, x, x_r, upper) = match &spec.model {
        ModelSpec::DriftedBm { eta } => (Dynamics::Bm { eta: *eta }, spec.x, spec.x_r, upper),
        ModelSpec::Ou { mu, sigma } => (ou(*mu, *sigma), spec.x, spec.x_r, upper),
        ModelSpec::Cir { mu, sigma } => (
            ou(*mu, *sigma),
            spec.x.sqrt(),
            spec.x_r.sqrt(),
            upper.map(f64::sqrt),
        ),
        ModelSpec::Conjugated(map) => (
            Dynamics::Bm { eta: 0.0 },
            map.forward(spec.x),
            map.forward(spec.x_r),
            upper.map(|b| map.forward(b)),
        ),
    };
    Walk {
        dynamics,
        x,
        x_r,
        upper,
        r,
    }
}

fn next_reset(t: f64, r: f64, rng: &mut ChaCha8Rng) -> f64 {
    if r > 0.0 {
        let e: f64 = rng.sample(Exp1);
        t + e / r
    } else {
        f64::INFINITY
    }
}

/// One path; returns `(τ, censored)`.
fn run_path(walk: &Walk, cfg: &SimConfig, index: u64) -> (f64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut t = 0.0;
    let mut y = walk.x;
    if walk.outside(y) {
        return (0.0, false);
    }
    let mut reset_at = next_reset(t, walk.r, &mut rng);
    loop {
        if t >= cfg.t_max {
            return (cfg.t_max, true);
        }
        let resetting = reset_at - t <= cfg.dt;
        let h = if resetting { reset_at - t } else { cfg.dt };
        if h > 0.0 {
            let (c, p_hit) = walk.step(y, h, &mut rng, cfg.bridge_correction);
            if walk.outside(c) || (p_hit > 0.0 && rng.random::<f64>() < p_hit) {
                return (t + h, false);
            }
            y = c;
        }
        if resetting {
            t = reset_at;
            y = walk.x_r;
            if walk.outside(y) {
                return (t, false);
            }
            reset_at = next_reset(t, walk.r, &mut rng);
        } else {
            t += h;
        }
    }
}

fn run_all(walk: &Walk, r: f64, cfg: &SimConfig) -> Result<Vec<(f64, bool)>> {
    cfg.check()?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Validation(format!(
            "r must be finite and >= 0, got {r}"
        )));
    }
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| run_path(walk, cfg, i))
        .collect())
}

fn estimate(walk: Walk, r: f64, cfg: &SimConfig, scheme: Scheme) -> Result<McEstimate> {
    let samples = run_all(&walk, r, cfg)?;
    let n = cfg.n_paths as f64;
    let (mut s1, mut s2, mut s4, mut censored) = (0.0, 0.0, 0.0, 0usize);
    for &(tau, c) in &samples {
        let t2 = tau * tau;
        s1 += tau;
        s2 += t2;
        s4 += t2 * t2;
        censored += c as usize;
    }
    let mean = s1 / n;
    let second = s2 / n;
    let denom = (n - 1.0).max(1.0);
    let var = ((s2 - n * mean * mean) / denom).max(0.0);
    let var2 = ((s4 - n * second * second) / denom).max(0.0);
    let censored_fraction = censored as f64 / n;
    if censored_fraction > MAX_CENSORING {
        return Err(Error::Config(format!(
            "{:.3}% of paths reached t_max = {}; increase t_max",
            100.0 * censored_fraction,
            cfg.t_max
        )));
    }
    Ok(McEstimate {
        mean,
        std_err: (var / n).sqrt(),
        second_moment: second,
        second_moment_std_err: (var2 / n).sqrt(),
        censored_fraction,
        n_paths: cfg.n_paths,
        dt: cfg.dt,
        scheme,
        bridge_correction: cfg.bridge_correction,
    })
}

/// Estimates `E[τ]` and `E[τ²]` at rate `r`. Brownian and conjugated models
/// use exact increments; OU and CIR use Euler–Maruyama.
pub fn simulate_tau(spec: &ProblemSpec, r: f64, cfg: &SimConfig) -> Result<McEstimate> {
    spec.check()?;
    let scheme = match spec.model {
        ModelSpec::Ou { .. } | ModelSpec::Cir { .. } => Scheme::EulerMaruyama,
        _ => Scheme::Brownian,
    };
    estimate(walk_for(spec, r, false), r, cfg, scheme)
}

/// Same estimator with the exact OU transition; CIR runs as `√X`.
pub fn simulate_ou_exact(spec: &ProblemSpec, r: f64, cfg: &SimConfig) -> Result<McEstimate> {
    spec.check()?;
    if !matches!(spec.model, ModelSpec::Ou { .. } | ModelSpec::Cir { .. }) {
        return Err(Error::Validation(format!(
            "exact OU simulation needs an OU or CIR model, got {}",
            spec.model.label()
        )));
    }
    estimate(walk_for(spec, r, true), r, cfg, Scheme::ExactOu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageSample {
    /// Passage time, or `t_max` when censored.
    pub tau: f64,
    pub censored: bool,
}

/// Raw per-path passage times in path order, without the censoring check.
/// OU and CIR use the exact transition.
pub fn sample_passage_times(
    spec: &ProblemSpec,
    r: f64,
    cfg: &SimConfig,
) -> Result<Vec<PassageSample>> {
    spec.check()?;
    let exact = matches!(spec.model, ModelSpec::Ou { .. } | ModelSpec::Cir { .. });
    Ok(run_all(&walk_for(spec, r, exact), r, cfg)?
        .into_iter()
        .map(|(tau, censored)| PassageSample { tau, censored })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SimConfig {
        SimConfig {
            dt: 1e-3,
            n_paths: 2000,
            t_max: 200.0,
            seed: 7,
            bridge_correction: true,
        }
    }

    #[test]
    fn config_is_checked() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(-1.0), 1.0, 1.0);
        let bad = SimConfig {
            t_max: 0.01,
            ..quick()
        };
        assert!(matches!(
            simulate_tau(&spec, 0.0, &bad),
            Err(Error::Config(_))
        ));
        let bad = SimConfig {
            n_paths: 0,
            ..quick()
        };
        assert!(simulate_tau(&spec, 0.0, &bad).is_err());
    }

    #[test]
    fn start_on_boundary() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 0.0, 1.0);
        let est = simulate_tau(&spec, 5.0, &quick()).unwrap();
        assert_eq!((est.mean, est.std_err), (0.0, 0.0));
    }

    #[test]
    fn seed_determinism() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(-1.0), 1.0, 1.0);
        let a = simulate_tau(&spec, 0.5, &quick()).unwrap();
        let b = simulate_tau(&spec, 0.5, &quick()).unwrap();
        assert_eq!(a, b);
        let c = simulate_tau(&spec, 0.5, &quick().with_seed(8)).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn heavy_censoring_is_an_error() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.5), 1.0, 1.0);
        let cfg = SimConfig {
            t_max: 1.0,
            ..quick()
        };
        assert!(matches!(
            simulate_tau(&spec, 0.0, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn drifted_passage_mean() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(-1.0), 2.0, 2.0);
        let est = simulate_tau(&spec, 0.0, &quick().with_paths(5000)).unwrap();
        assert!(est.z_score(2.0) < 4.0, "{est:?}");
    }

    #[test]
    fn exact_ou_rejects_brownian() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
        assert!(simulate_ou_exact(&spec, 1.0, &quick()).is_err());
    }
}
