//! Underlying diffusions and passage-problem geometry.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which built-in conjugating map, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// `v(x) = 2√x` on `[0, 100]`.
    Feller,
    /// `v(x) = 2 arcsin √x` on `[0, 1]`.
    WrightFisher,
    Custom,
}

/// Increasing map `v` with `v(0) = 0` taking a diffusion to standard
/// Brownian motion: `X(t) = v⁻¹(B_t + v(x))`.
#[derive(Clone)]
pub struct MonotoneMap {
    name: String,
    kind: MapKind,
    forward: ScalarFn,
    inverse: ScalarFn,
    domain: (f64, f64),
}

impl MonotoneMap {
    pub fn feller() -> Self {
        Self {
            name: "feller".into(),
            kind: MapKind::Feller,
            forward: Arc::new(|x: f64| 2.0 * x.sqrt()),
            inverse: Arc::new(|y: f64| 0.25 * y * y),
            domain: (0.0, 100.0),
        }
    }

    pub fn wright_fisher() -> Self {
        Self {
            name: "wright_fisher".into(),
            kind: MapKind::WrightFisher,
            forward: Arc::new(|x: f64| 2.0 * x.sqrt().asin()),
            inverse: Arc::new(|y: f64| {
                let s = (0.5 * y).sin();
                s * s
            }),
            domain: (0.0, 1.0),
        }
    }

    /// User-supplied map. Checked on a 1000-point grid of `domain` for
    /// `v(0) = 0`, strict increase, and `v(v⁻¹(y)) = y` to `1e-12`.
    pub fn custom<F, G>(name: &str, forward: F, inverse: G, domain: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let map = Self {
            name: name.to_string(),
            kind: MapKind::Custom,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            domain,
        };
        map.check()?;
        Ok(map)
    }

    fn check(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if !(lo <= 0.0 && 0.0 <= hi && lo < hi && hi.is_finite() && lo.is_finite()) {
            return Err(Error::Validation(format!(
                "map '{}' domain [{lo}, {hi}] must be finite and contain 0",
                self.name
            )));
        }
        if self.forward(0.0) != 0.0 {
            return Err(Error::Validation(format!(
                "map '{}' must satisfy v(0) = 0",
                self.name
            )));
        }
        let n = 1000;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let y = self.forward(x);
            if !(y > prev) {
                return Err(Error::Validation(format!(
                    "map '{}' is not strictly increasing near x = {x}",
                    self.name
                )));
            }
            let back = self.forward(self.inverse(y));
            if (back - y).abs() > 1e-12 * y.abs().max(1.0) {
                return Err(Error::Validation(format!(
                    "map '{}' inverse is inconsistent at y = {y}",
                    self.name
                )));
            }
            prev = y;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    pub fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl PartialEq for MonotoneMap {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.kind == other.kind && self.domain == other.domain
    }
}

/// Diffusion without resetting.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// `dX = η dt + dB`.
    DriftedBm {
        eta: f64,
    },
    /// `dX = -μX dt + σ dB`.
    Ou {
        mu: f64,
        sigma: f64,
    },
    /// `dX = (σ² - 2μX) dt + 2σ√X dB`, so that `√X` is OU(μ, σ).
    Cir {
        mu: f64,
        sigma: f64,
    },
    Conjugated(MonotoneMap),
}

impl ModelSpec {
    pub fn bm(eta: f64) -> Self {
        ModelSpec::DriftedBm { eta }
    }

    pub fn ou(mu: f64, sigma: f64) -> Self {
        ModelSpec::Ou { mu, sigma }
    }

    pub fn cir(mu: f64, sigma: f64) -> Self {
        ModelSpec::Cir { mu, sigma }
    }

    pub fn feller() -> Self {
        ModelSpec::Conjugated(MonotoneMap::feller())
    }

    pub fn wright_fisher() -> Self {
        ModelSpec::Conjugated(MonotoneMap::wright_fisher())
    }

    pub fn label(&self) -> String {
        match self {
            ModelSpec::DriftedBm { .. } => "bm".into(),
            ModelSpec::Ou { .. } => "ou".into(),
            ModelSpec::Cir { .. } => "cir".into(),
            ModelSpec::Conjugated(m) => match m.kind() {
                MapKind::Feller => "feller".into(),
                MapKind::WrightFisher => "wf".into(),
                MapKind::Custom => m.name().to_string(),
            },
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            ModelSpec::DriftedBm { eta } => {
                if !eta.is_finite() {
                    return Err(Error::Validation("eta must be finite".into()));
                }
            }
            ModelSpec::Ou { mu, sigma } | ModelSpec::Cir { mu, sigma } => {
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(Error::Validation("mu must be positive".into()));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Validation("sigma must be positive".into()));
                }
            }
            ModelSpec::Conjugated(_) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// Passage through 0.
    Fpt,
    /// Exit from `(0, b)`.
    Fet { b: f64 },
}

impl ProblemKind {
    pub fn upper(&self) -> Option<f64> {
        match *self {
            ProblemKind::Fpt => None,
            ProblemKind::Fet { b } => Some(b),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProblemKind::Fpt => "fpt",
            ProblemKind::Fet { .. } => "fet",
        }
    }
}

/// Start `x`, reset position `x_r`, boundary geometry and diffusion.
///
/// Starting on an absorbing boundary (`x = 0`, or `x = b` for exits) is
/// accepted and gives `τ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub x: f64,
    pub x_r: f64,
    pub model: ModelSpec,
}

impl ProblemSpec {
    pub fn fpt(model: ModelSpec, x: f64, x_r: f64) -> Self {
        Self {
            kind: ProblemKind::Fpt,
            x,
            x_r,
            model,
        }
    }

    pub fn fet(model: ModelSpec, x: f64, x_r: f64, b: f64) -> Self {
        Self {
            kind: ProblemKind::Fet { b },
            x,
            x_r,
            model,
        }
    }

    pub fn with_x(&self, x: f64) -> Self {
        Self { x, ..self.clone() }
    }

    pub fn with_x_r(&self, x_r: f64) -> Self {
        Self {
            x_r,
            ..self.clone()
        }
    }

    /// Returns the spec unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self> {
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        self.model.check()?;
        let (x, x_r) = (self.x, self.x_r);
        if !x.is_finite() || !x_r.is_finite() {
            return Err(Error::Validation("x and x_r must be finite".into()));
        }
        match self.kind {
            ProblemKind::Fpt => {
                if x < 0.0 {
                    return Err(Error::Validation(format!(
                        "x must be >= 0 for FPT, got {x}"
                    )));
                }
                if x_r < 0.0 {
                    return Err(Error::Validation(format!(
                        "x_r must be >= 0 for FPT, got {x_r}"
                    )));
                }
            }
            ProblemKind::Fet { b } => {
                if !(b > 0.0 && b.is_finite()) {
                    return Err(Error::Validation(format!(
                        "b must be positive and finite, got {b}"
                    )));
                }
                if !(0.0..=b).contains(&x) {
                    return Err(Error::Validation(format!(
                        "x must lie in [0, b] = [0, {b}], got {x}"
                    )));
                }
                if !(x_r > 0.0 && x_r < b) {
                    return Err(Error::Validation(format!(
                        "x_r must lie in (0, b) = (0, {b}), got {x_r}"
                    )));
                }
            }
        }
        if let ModelSpec::Conjugated(map) = &self.model {
            let (lo, hi) = map.domain();
            for (label, v) in [("x", Some(x)), ("x_r", Some(x_r)), ("b", self.kind.upper())] {
                if let Some(v) = v {
                    if !map.contains(v) {
                        return Err(Error::Validation(format!(
                            "{label} = {v} outside the '{}' map domain [{lo}, {hi}]",
                            map.name()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Length scale used to place the resetting-rate search grid.
    pub fn length_scale(&self) -> f64 {
        match self.kind {
            ProblemKind::Fpt => 1.0,
            ProblemKind::Fet { b } => match &self.model {
                ModelSpec::Cir { .. } => b.sqrt(),
                ModelSpec::Conjugated(map) => map.forward(b),
                _ => b,
            },
        }
    }
}
