use resetfpt::montecarlo::{simulate_ou_exact, simulate_tau};
use resetfpt::optimize::{minimize_over_r, profile_over_reset, profile_over_x, scan_over_r};
use resetfpt::resetting::{
    lt_with_reset, mean_with_reset, second_moment_with, survival_lt_with_reset,
};
use resetfpt::tables::{compute, table};
use resetfpt::{ModelSpec, OptResult, ProblemKind, ProblemSpec, SimConfig};

use crate::args::{Command, ProblemArgs, SchemeArg, SimArgs};
use crate::output::{Cell, Document};
use crate::CliError;

fn describe(doc: &mut Document, spec: &ProblemSpec) {
    doc.meta("model", spec.model.label());
    doc.meta("kind", spec.kind.label());
    match spec.model {
        ModelSpec::DriftedBm { eta } => doc.meta("eta", eta),
        ModelSpec::Ou { mu, sigma } | ModelSpec::Cir { mu, sigma } => {
            doc.meta("mu", mu);
            doc.meta("sigma", sigma);
        }
        ModelSpec::Conjugated(_) => {}
    }
    if let ProblemKind::Fet { b } = spec.kind {
        doc.meta("b", b);
    }
}

const OPT_COLUMNS: [&str; 9] = [
    "r_m",
    "m",
    "baseline",
    "boundary_optimum",
    "converged",
    "bracket_lo",
    "bracket_hi",
    "evaluations",
    "error",
];

fn opt_cells(result: &Result<OptResult, resetfpt::Error>) -> Vec<Cell> {
    match result {
        Ok(o) => vec![
            o.r_m.into(),
            o.m.into(),
            o.baseline.into(),
            o.boundary_optimum.into(),
            o.converged.into(),
            o.bracket.0.into(),
            o.bracket.1.into(),
            o.evaluations.into(),
            Cell::Empty,
        ],
        Err(e) => {
            let mut cells = vec![Cell::Empty; OPT_COLUMNS.len() - 1];
            cells.push(e.to_string().into());
            cells
        }
    }
}

fn with_columns(lead: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(tail).copied().collect()
}

pub fn run(command: &Command) -> Result<Document, CliError> {
    let mut doc = match command {
        Command::Lt { problem, r, lam, .. } => lt(problem, *r, *lam)?,
        Command::Mean { problem, r, .. } => {
            let spec = problem.spec()?;
            let mean = mean_with_reset(&spec, *r)?;
            let mut doc = Document::new(&["x", "x_r", "r", "mean"]);
            describe(&mut doc, &spec);
            doc.push(vec![spec.x.into(), spec.x_r.into(), (*r).into(), mean.into()]);
            doc
        }
        Command::SecondMoment {
            problem,
            r,
            derivative,
            ..
        } => {
            let spec = problem.spec()?;
            let mean = mean_with_reset(&spec, *r)?;
            let second = second_moment_with(&spec, *r, (*derivative).into())?;
            let mut doc = Document::new(&["x", "x_r", "r", "mean", "second_moment", "variance"]);
            describe(&mut doc, &spec);
            doc.meta("derivative", format!("{derivative:?}").to_lowercase());
            doc.push(vec![
                spec.x.into(),
                spec.x_r.into(),
                (*r).into(),
                mean.into(),
                second.into(),
                (second - mean * mean).into(),
            ]);
            doc
        }
        Command::Optimize { problem, .. } => {
            let spec = problem.spec()?;
            let result = minimize_over_r(&spec);
            if let Err(e) = &result {
                return Err(e.clone().into());
            }
            let mut doc = Document::new(&with_columns(&["x", "x_r"], &OPT_COLUMNS));
            describe(&mut doc, &spec);
            let mut row = vec![spec.x.into(), spec.x_r.into()];
            row.extend(opt_cells(&result));
            doc.push(row);
            doc
        }
        Command::Scan { problem, r_grid, .. } => {
            let spec = problem.spec()?;
            let scan = scan_over_r(&spec, &r_grid.points())?;
            let mut doc = Document::new(&["r", "mean", "error"]);
            describe(&mut doc, &spec);
            doc.meta("x", spec.x);
            doc.meta("x_r", spec.x_r);
            if let Some(best) = scan.best() {
                doc.meta("best_r", best.r);
                doc.meta("best_mean", best.mean);
            }
            for p in &scan.grid {
                let error = p.error.clone().map_or(Cell::Empty, Cell::Text);
                doc.push(vec![p.r.into(), p.mean.into(), error]);
            }
            doc
        }
        Command::Profile {
            problem,
            x_grid,
            x_r_grid,
            ..
        } => {
            let (over, points) = match (x_grid, x_r_grid) {
                (Some(g), None) => ("x", g.points()),
                (None, Some(g)) => ("x_r", g.points()),
                _ => return Err(CliError::Usage("give exactly one of --x-grid and --x-r-grid".into())),
            };
            let fixed = if over == "x" { problem.x_r } else { problem.x };
            if fixed.is_none() {
                let key = if over == "x" { "x-r" } else { "x" };
                return Err(CliError::Usage(format!("profile over {over} needs a fixed --{key}")));
            }
            let spec = match over {
                "x" => problem.spec_with(Some(points[0]))?,
                _ => problem.spec()?,
            };
            let profile = if over == "x" {
                profile_over_x(&spec, &points)?
            } else {
                profile_over_reset(&spec, &points)?
            };
            let mut doc = Document::new(&with_columns(&[over], &OPT_COLUMNS));
            describe(&mut doc, &spec);
            doc.meta("over", over);
            if over == "x" {
                doc.meta("x_r", spec.x_r);
            } else {
                doc.meta("x", spec.x);
            }
            doc.meta("alpha", profile.alpha);
            doc.meta("beta", profile.beta);
            for (p, result) in profile.points.iter().zip(&profile.results) {
                let mut row = vec![(*p).into()];
                row.extend(opt_cells(result));
                doc.push(row);
            }
            doc
        }
        Command::Simulate { problem, r, sim, .. } => simulate(problem, *r, sim)?,
        Command::Table { name, .. } => reference_table(name)?,
    };
    doc.meta("command", command.name());
    Ok(doc)
}

fn lt(problem: &ProblemArgs, r: f64, lam: f64) -> Result<Document, CliError> {
    let spec = problem.spec()?;
    let value = lt_with_reset(&spec, r, lam)?;
    let survival = survival_lt_with_reset(&spec, r, lam)?;
    let mut doc = Document::new(&["x", "x_r", "r", "lam", "lt", "survival_lt"]);
    describe(&mut doc, &spec);
    doc.push(vec![
        spec.x.into(),
        spec.x_r.into(),
        r.into(),
        lam.into(),
        value.into(),
        survival.into(),
    ]);
    Ok(doc)
}

fn simulate(problem: &ProblemArgs, r: f64, sim: &SimArgs) -> Result<Document, CliError> {
    let spec = problem.spec()?;
    let mut cfg = SimConfig::for_query(&spec, r)?;
    if let Some(dt) = sim.dt {
        cfg = cfg.with_dt(dt);
    }
    if let Some(paths) = sim.paths {
        cfg = cfg.with_paths(paths);
    }
    if let Some(seed) = sim.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(t_max) = sim.t_max {
        cfg.t_max = t_max;
    }
    cfg = cfg.with_bridge(!sim.no_bridge);
    let diffusive = matches!(spec.model, ModelSpec::Ou { .. } | ModelSpec::Cir { .. });
    let est = if diffusive && sim.scheme == SchemeArg::Exact {
        simulate_ou_exact(&spec, r, &cfg)?
    } else {
        simulate_tau(&spec, r, &cfg)?
    };
    let analytic = mean_with_reset(&spec, r).ok();
    let mut doc = Document::new(&[
        "x",
        "x_r",
        "r",
        "mean",
        "std_err",
        "second_moment",
        "second_moment_std_err",
        "censored_fraction",
        "analytic_mean",
        "z",
    ]);
    describe(&mut doc, &spec);
    doc.meta("dt", est.dt);
    doc.meta("paths", est.n_paths);
    doc.meta("seed", cfg.seed);
    doc.meta("t_max", cfg.t_max);
    doc.meta("scheme", format!("{:?}", est.scheme).to_lowercase());
    doc.meta("bridge_correction", est.bridge_correction);
    if est.unreliable() {
        doc.meta("warning", "censored fraction above 1e-4; mean biased low");
    }
    let z = analytic.filter(|a| a.is_finite()).map(|a| est.z_score(a));
    doc.push(vec![
        spec.x.into(),
        spec.x_r.into(),
        r.into(),
        est.mean.into(),
        est.std_err.into(),
        est.second_moment.into(),
        est.second_moment_std_err.into(),
        est.censored_fraction.into(),
        analytic.into(),
        z.into(),
    ]);
    Ok(doc)
}

/// Signed relative difference; absolute when the reference is zero.
fn rel_diff(value: Option<f64>, reference: Option<f64>) -> Cell {
    match (value, reference) {
        (Some(v), Some(0.0)) => Cell::Num(v),
        (Some(v), Some(r)) if v.is_finite() => Cell::Num((v - r) / r.abs()),
        _ => Cell::Empty,
    }
}

fn reference_table(name: &str) -> Result<Document, CliError> {
    let t = table(name)?;
    let rows = compute(&t);
    let mut doc = Document::new(&[
        "panel",
        "x",
        "x_r",
        "r_m",
        "m",
        "baseline",
        "ref_r_m",
        "ref_m",
        "ref_baseline",
        "rel_diff_r_m",
        "rel_diff_m",
        "rel_diff_baseline",
        "suspect",
        "error",
    ]);
    doc.meta("name", t.name);
    doc.meta("title", t.title);
    if let Some(first) = t.panels.first() {
        describe(&mut doc, &first.spec);
    }
    for row in &rows {
        let ok = row.result.as_ref().ok();
        let (r_m, m, baseline) = (ok.map(|o| o.r_m), ok.map(|o| o.m), ok.map(|o| o.baseline));
        let reference = &row.reference;
        doc.push(vec![
            row.panel.as_str().into(),
            row.spec.x.into(),
            row.spec.x_r.into(),
            r_m.into(),
            m.into(),
            baseline.into(),
            reference.r_m.into(),
            reference.m.into(),
            reference.baseline.into(),
            rel_diff(r_m, reference.r_m),
            rel_diff(m, reference.m),
            rel_diff(baseline, reference.baseline),
            reference.suspect.into(),
            row.result
                .as_ref()
                .err()
                .map_or(Cell::Empty, |e| e.to_string().into()),
        ]);
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_differences() {
        assert_eq!(rel_diff(Some(1.1), Some(1.0)), Cell::Num(1.1 - 1.0));
        assert_eq!(rel_diff(Some(0.0), Some(0.0)), Cell::Num(0.0));
        assert_eq!(rel_diff(Some(0.5), Some(-2.0)), Cell::Num(1.25));
        assert_eq!(rel_diff(None, Some(1.0)), Cell::Empty);
        assert_eq!(rel_diff(Some(f64::INFINITY), Some(1.0)), Cell::Empty);
    }
}
