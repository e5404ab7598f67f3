//! Globally adaptive Gauss-Legendre quadrature on finite intervals.
//!
//! Each panel is integrated with an n-point rule on the whole panel and on
//! its two halves; the difference is the panel's error estimate. The panel
//! with the largest estimate is bisected until the summed estimate meets the
//! tolerance.

use num_traits::Float;

use crate::error::{Error, Result};

/// n-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<F> {
    nodes: Vec<F>,
    weights: Vec<F>,
}

impl<F: Float> GaussLegendre<F> {
    /// Builds the rule by Newton iteration on the Legendre polynomial `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let one = F::one();
        let two = one + one;
        let nf = F::from(n).unwrap();
        let pi = F::from(std::f64::consts::PI).unwrap();
        let quarter = F::from(0.25).unwrap();
        let half = F::from(0.5).unwrap();

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 1..=n {
            let mut x = (pi * (F::from(i).unwrap() - quarter) / (nf + half)).cos();
            let mut dp = one;
            for _ in 0..100 {
                let (p, p_prev) = legendre_pair(n, x);
                dp = nf * (x * p - p_prev) / (x * x - one);
                let dx = p / dp;
                x = x - dx;
                if dx.abs() <= F::epsilon() {
                    break;
                }
            }
            let (p, p_prev) = legendre_pair(n, x);
            if !p.is_zero() || dp.is_zero() {
                dp = nf * (x * p - p_prev) / (x * x - one);
            }
            nodes.push(x);
            weights.push(two / ((one - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fixed-rule estimate of `∫_a^b f`.
    pub fn integrate<G: Fn(F) -> F>(&self, f: &G, a: F, b: F) -> F {
        let half = F::from(0.5).unwrap();
        let mid = half * (a + b);
        let rad = half * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(F::zero(), |acc, (&x, &w)| acc + w * f(mid + rad * x))
            * rad
    }
}

fn legendre_pair<F: Float>(n: usize, x: F) -> (F, F) {
    let one = F::one();
    let mut p_prev = one;
    let mut p = x;
    if n == 0 {
        return (one, F::zero());
    }
    for k in 2..=n {
        let kf = F::from(k).unwrap();
        let next = ((kf + kf - one) * x * p - (kf - one) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions<F> {
    pub rel_tol: F,
    pub abs_tol: F,
    pub max_panels: usize,
}

impl<F: Float> Default for AdaptiveOptions<F> {
    fn default() -> Self {
        Self {
            rel_tol: F::from(1e-12).unwrap_or_else(F::epsilon),
            abs_tol: F::min_positive_value(),
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<F> {
    pub value: F,
    pub error: F,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Panel<F> {
    a: F,
    b: F,
    left: F,
    right: F,
    error: F,
}

impl<F: Float> Panel<F> {
    fn value(&self) -> F {
        self.left + self.right
    }
}

/// Adaptive estimate of `∫_a^b f` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F, G>(
    rule: &GaussLegendre<F>,
    f: G,
    a: F,
    b: F,
    opts: &AdaptiveOptions<F>,
) -> Result<QuadResult<F>>
where
    F: Float,
    G: Fn(F) -> F,
{
    if a == b {
        return Ok(QuadResult {
            value: F::zero(),
            error: F::zero(),
            panels: 0,
            evaluations: 0,
        });
    }
    let half = F::from(0.5).unwrap();
    let n = rule.len();
    let mut evaluations = 0usize;

    let make_panel = |a: F, b: F, whole: F, evaluations: &mut usize| -> Panel<F> {
        let m = half * (a + b);
        let left = rule.integrate(&f, a, m);
        let right = rule.integrate(&f, m, b);
        *evaluations += 2 * n;
        Panel {
            a,
            b,
            left,
            right,
            error: (whole - (left + right)).abs(),
        }
    };

    let whole = rule.integrate(&f, a, b);
    evaluations += n;
    let mut panels = vec![make_panel(a, b, whole, &mut evaluations)];

    loop {
        let (total, err) = panels.iter().fold((F::zero(), F::zero()), |(v, e), p| {
            (v + p.value(), e + p.error)
        });
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Convergence {
                estimate: total.to_f64().unwrap_or(f64::NAN),
                error: err.to_f64().unwrap_or(f64::NAN),
                panels: panels.len(),
            });
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                panels: panels.len(),
                evaluations,
            });
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Convergence {
                estimate: total.to_f64().unwrap_or(f64::NAN),
                error: err.to_f64().unwrap_or(f64::NAN),
                panels: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let m = half * (p.a + p.b);
        // Interval too small to split further in this precision.
        if m <= p.a || m >= p.b {
            return Err(Error::Convergence {
                estimate: total.to_f64().unwrap_or(f64::NAN),
                error: err.to_f64().unwrap_or(f64::NAN),
                panels: panels.len() + 1,
            });
        }
        panels.push(make_panel(p.a, m, p.left, &mut evaluations));
        panels.push(make_panel(m, p.b, p.right, &mut evaluations));
    }
}
