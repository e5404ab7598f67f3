//! Golden-section search for a minimum inside a bracket.

use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<F> {
    pub x: F,
    pub f: F,
    pub evaluations: usize,
    /// Bracket width fell below the tolerance within the iteration budget.
    pub converged: bool,
}

/// Minimizes `f` on `[a, b]` until the bracket is narrower than `tol`.
///
/// `f` is assumed unimodal on the bracket; otherwise a local minimum is
/// returned. Errors from `f` abort the search.
pub fn golden_section<F, E, G>(
    mut f: G,
    a: F,
    b: F,
    tol: F,
    max_iter: usize,
) -> Result<Minimum<F>, E>
where
    F: Float,
    G: FnMut(F) -> Result<F, E>,
{
    let inv_phi = (F::from(5.0).unwrap().sqrt() - F::one()) / F::from(2.0).unwrap();
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    let mut converged = false;
    for _ in 0..max_iter {
        if b - a <= tol {
            converged = true;
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    if !converged && b - a <= tol {
        converged = true;
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(Minimum {
        x,
        f: fx,
        evaluations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn finds_parabola_vertex() {
        let m = golden_section(
            |x: f64| Ok::<_, Infallible>((x - 0.3).powi(2) + 1.0),
            -1.0,
            2.0,
            1e-9,
            200,
        )
        .unwrap();
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!(m.converged);
    }

    #[test]
    fn generic_in_scalar() {
        let m = golden_section(
            |x: f32| Ok::<_, Infallible>((x - 2.0).abs()),
            0.0f32,
            5.0,
            1e-4,
            200,
        )
        .unwrap();
        assert!((m.x - 2.0).abs() < 1e-3);
    }

    #[test]
    fn reports_budget_exhaustion() {
        let m = golden_section(|x: f64| Ok::<_, Infallible>(x * x), -1.0, 1.0, 1e-12, 5).unwrap();
        assert!(!m.converged);
        assert_eq!(m.evaluations, 7);
    }

    #[test]
    fn propagates_errors() {
        let out = golden_section(
            |x: f64| if x > 0.5 { Err("boom") } else { Ok(x) },
            0.0,
            1.0,
            1e-6,
            100,
        );
        assert_eq!(out.unwrap_err(), "boom");
    }
}
