//! Optimal resetting rate: `r_m = argmin_{r ≥ 0} E[τ(x, r)]`.
//!
//! The mean is scanned on a logarithmic grid, the best grid point is refined
//! by golden-section search in `ln r`, and the interior optimum is finally
//! compared with the no-reset mean at `r = 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::minimize::golden_section;
use crate::model::{ProblemKind, ProblemSpec};
use crate::resetting::mean_with_reset;
use crate::transform::baseline_no_reset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    /// Optimal rate; exactly 0 when resetting does not help.
    pub r_m: f64,
    /// `E[τ(x, r_m)]`.
    pub m: f64,
    /// `E[τ(x, 0)]`, possibly `+∞`.
    pub baseline: f64,
    /// Rates bracketing the refined interior minimum.
    pub bracket: (f64, f64),
    pub evaluations: usize,
    pub boundary_optimum: bool,
    /// False when the search ran into the edge of the admissible rate range
    /// or exhausted its iteration budget.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptOptions {
    pub grid_points: usize,
    /// Rate range for passage problems.
    pub fpt_range: (f64, f64),
    /// Rate range for exit problems, in units of `1/L²` with `L` the
    /// interval length in the Brownian coordinate.
    pub fet_range: (f64, f64),
    /// Relative tolerance on `r_m`.
    pub rel_tol: f64,
    /// Outermost rates reachable by grid expansion.
    pub limits: (f64, f64),
    /// `r = 0` wins when `baseline ≤ (1 + boundary_slack) · interior minimum`.
    pub boundary_slack: f64,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            grid_points: 61,
            fpt_range: (1e-4, 1e4),
            fet_range: (1e-4, 1e5),
            rel_tol: 1e-6,
            limits: (1e-12, 1e12),
            boundary_slack: 1e-9,
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => lo + (hi - lo) * i as f64 / (n - 1) as f64,
        })
        .collect()
}

fn on_boundary(spec: &ProblemSpec) -> bool {
    spec.x == 0.0 || spec.kind.upper() == Some(spec.x)
}

pub fn minimize_over_r(spec: &ProblemSpec) -> Result<OptResult> {
    minimize_over_r_with(spec, &OptOptions::default())
}

pub fn minimize_over_r_with(spec: &ProblemSpec, opts: &OptOptions) -> Result<OptResult> {
    spec.check()?;
    let baseline = baseline_no_reset(spec)?;
    if on_boundary(spec) {
        return Ok(OptResult {
            r_m: 0.0,
            m: 0.0,
            baseline,
            bracket: (0.0, 0.0),
            evaluations: 0,
            boundary_optimum: true,
            converged: true,
        });
    }

    let (lo, hi) = match spec.kind {
        ProblemKind::Fpt => opts.fpt_range,
        ProblemKind::Fet { .. } => {
            let l2 = spec.length_scale().powi(2);
            (opts.fet_range.0 / l2, opts.fet_range.1 / l2)
        }
    };
    let n = opts.grid_points.max(3);
    let step = (hi / lo).ln() / (n - 1) as f64;

    let mut evaluations = 0usize;
    let mut first_error: Option<Error> = None;
    let mut eval = |r: f64, evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        match mean_with_reset(spec, r) {
            Ok(v) if v.is_nan() => f64::INFINITY,
            Ok(v) => v,
            Err(e) => {
                first_error.get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    let mut us: Vec<f64> = (0..n).map(|i| lo.ln() + step * i as f64).collect();
    let mut ts: Vec<f64> = us.iter().map(|u| eval(u.exp(), &mut evaluations)).collect();
    let argmin = |ts: &[f64]| {
        ts.iter()
            .enumerate()
            .fold((0usize, f64::INFINITY), |(bi, bv), (i, &v)| {
                if v < bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            })
            .0
    };

    let mut converged = true;
    let mut best = argmin(&ts);
    // Walk the grid outwards while the minimum sits on an edge.
    while best == ts.len() - 1 {
        let u = us[best] + step;
        if u > opts.limits.1.ln() {
            converged = false;
            break;
        }
        let t = eval(u.exp(), &mut evaluations);
        us.push(u);
        ts.push(t);
        if t >= ts[best] {
            break;
        }
        best += 1;
    }
    while best == 0 && !(baseline <= (1.0 + opts.boundary_slack) * ts[0]) {
        let u = us[0] - step;
        if u < opts.limits.0.ln() {
            converged = false;
            break;
        }
        let t = eval(u.exp(), &mut evaluations);
        us.insert(0, u);
        ts.insert(0, t);
        if t >= ts[1] {
            best = 1;
            break;
        }
    }

    if !ts[best].is_finite() {
        if baseline.is_finite() {
            return Ok(OptResult {
                r_m: 0.0,
                m: baseline,
                baseline,
                bracket: (0.0, 0.0),
                evaluations,
                boundary_optimum: true,
                converged: false,
            });
        }
        return Err(first_error.unwrap_or_else(|| {
            Error::Domain("expected time is infinite at every scanned rate".into())
        }));
    }

    let (mut r_m, mut m) = (us[best].exp(), ts[best]);
    let bracket;
    if best > 0 && best + 1 < us.len() {
        let (a, b) = (us[best - 1], us[best + 1]);
        bracket = (a.exp(), b.exp());
        let found = golden_section(
            |u: f64| {
                evaluations += 1;
                mean_with_reset(spec, u.exp()).map(|v| if v.is_nan() { f64::INFINITY } else { v })
            },
            a,
            b,
            opts.rel_tol,
            200,
        )?;
        converged &= found.converged;
        if found.f < m {
            r_m = found.x.exp();
            m = found.f;
        }
    } else {
        bracket = (r_m, r_m);
        converged = false;
    }

    if baseline <= (1.0 + opts.boundary_slack) * m {
        return Ok(OptResult {
            r_m: 0.0,
            m: baseline,
            baseline,
            bracket,
            evaluations,
            boundary_optimum: true,
            converged: true,
        });
    }
    Ok(OptResult {
        r_m,
        m,
        baseline,
        bracket,
        evaluations,
        boundary_optimum: false,
        converged,
    })
}

/// One grid point of a rate scan; failed evaluations keep their message.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub r: f64,
    pub mean: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub grid: Vec<ScanPoint>,
    pub x: f64,
    pub x_r: f64,
    pub model: String,
}

impl ScanResult {
    /// Grid point with the smallest finite mean.
    pub fn best(&self) -> Option<&ScanPoint> {
        self.grid
            .iter()
            .filter(|p| p.mean.is_finite())
            .min_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap())
    }
}

/// `E[τ(x, r)]` on a strictly increasing grid of rates `r ≥ 0`.
pub fn scan_over_r(spec: &ProblemSpec, r_grid: &[f64]) -> Result<ScanResult> {
    spec.check()?;
    if r_grid.is_empty() {
        return Err(Error::Validation("rate grid is empty".into()));
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Validation(
            "rate grid values must be finite and >= 0".into(),
        ));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation(
            "rate grid must be strictly increasing".into(),
        ));
    }
    let grid = r_grid
        .par_iter()
        .map(|&r| match mean_with_reset(spec, r) {
            Ok(mean) => ScanPoint {
                r,
                mean,
                error: None,
            },
            Err(e) => ScanPoint {
                r,
                mean: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(ScanResult {
        grid,
        x: spec.x,
        x_r: spec.x_r,
        model: spec.model.label(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    /// Parameter values in input order.
    pub points: Vec<f64>,
    pub results: Vec<std::result::Result<OptResult, Error>>,
    /// `r_m` at the first grid value.
    pub alpha: Option<f64>,
    /// Largest `r_m` over the grid.
    pub beta: Option<f64>,
}

fn profile<F>(points: &[f64], build: F) -> Result<Profile>
where
    F: Fn(f64) -> ProblemSpec + Sync,
{
    if points.is_empty() {
        return Err(Error::Validation("profile grid is empty".into()));
    }
    let results: Vec<_> = points
        .par_iter()
        .map(|&p| minimize_over_r(&build(p)))
        .collect();
    let alpha = results.first().and_then(|r| r.as_ref().ok()).map(|o| o.r_m);
    let beta = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|o| o.r_m)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
    Ok(Profile {
        points: points.to_vec(),
        results,
        alpha,
        beta,
    })
}

/// Optimal rate as a function of the start position, other settings taken
/// from `spec`.
pub fn profile_over_x(spec: &ProblemSpec, x_grid: &[f64]) -> Result<Profile> {
    profile(x_grid, |x| spec.with_x(x))
}

/// Optimal rate as a function of the reset position.
pub fn profile_over_reset(spec: &ProblemSpec, x_r_grid: &[f64]) -> Result<Profile> {
    profile(x_r_grid, |x_r| spec.with_x_r(x_r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn grids() {
        let g = log_grid(1e-2, 1e2, 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1e-2);
        assert_eq!(g[4], 1e2);
        assert!((g[2] - 1.0).abs() < 1e-14);
        assert_eq!(lin_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(log_grid(3.0, 9.0, 1), vec![3.0]);
    }

    #[test]
    fn brownian_diagonal_optimum() {
        let o = minimize_over_r(&ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0)).unwrap();
        assert!((o.r_m - 1.2698).abs() < 1e-3, "{o:?}");
        assert!((o.m - 3.0883).abs() < 1e-3);
        assert!(!o.boundary_optimum);
        assert!(o.baseline.is_infinite());
        assert!(o.converged);
        assert!(o.bracket.0 < o.r_m && o.r_m < o.bracket.1);
    }

    #[test]
    fn boundary_optima() {
        let o = minimize_over_r(&ProblemSpec::fet(ModelSpec::bm(0.0), 0.3, 0.3, 1.0)).unwrap();
        assert!(o.boundary_optimum);
        assert_eq!(o.r_m, 0.0);
        assert!((o.m - 0.21).abs() < 1e-12);
        let o = minimize_over_r(&ProblemSpec::fpt(ModelSpec::bm(-1.0), 2.0, 2.0)).unwrap();
        assert!(o.boundary_optimum);
        assert_eq!(o.m, 2.0);
    }

    #[test]
    fn start_on_boundary_needs_no_search() {
        let o = minimize_over_r(&ProblemSpec::fpt(ModelSpec::bm(0.0), 0.0, 1.0)).unwrap();
        assert_eq!((o.r_m, o.m, o.evaluations), (0.0, 0.0, 0));
    }

    #[test]
    fn scan_validates_grid() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
        assert!(scan_over_r(&spec, &[1.0, 1.0]).is_err());
        assert!(scan_over_r(&spec, &[-1.0]).is_err());
        let one = scan_over_r(&spec, &[2.0]).unwrap();
        assert_eq!(one.grid.len(), 1);
        let with_zero = scan_over_r(&spec, &[0.0, 1.0]).unwrap();
        assert!(with_zero.grid[0].mean.is_infinite());
    }

    #[test]
    fn scan_minimum_near_optimum() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
        let scan = scan_over_r(&spec, &log_grid(1e-2, 1e2, 81)).unwrap();
        let best = scan.best().unwrap();
        assert!((best.r / 1.27 - 1.0).abs() < 0.06);
    }

    #[test]
    fn profile_keeps_order() {
        let spec = ProblemSpec::fpt(ModelSpec::bm(0.0), 1.0, 1.0);
        let p = profile_over_x(&spec, &[0.5, 1.0, 3.0]).unwrap();
        let rs: Vec<f64> = p.results.iter().map(|r| r.as_ref().unwrap().r_m).collect();
        assert!(rs[0] < rs[1] && rs[1] < rs[2]);
        assert_eq!(p.alpha, Some(rs[0]));
        assert_eq!(p.beta, Some(rs[2]));
    }
}
