//! Margin domains and the catalogue of gauge functions.
//!
//! A gauge is a continuous, 1-homogeneous function `g` on the margin domain
//! with `g(x) >= max_i |x_i|`. Exponential-margin gauges live on `[0, inf)^d`,
//! Laplace-margin gauges on all of `R^d`. The catalogue carries the closed
//! forms used throughout: logistic, Gaussian (exponential margins), inverted
//! logistic, square, the asymmetric two-parameter family, and the Gaussian
//! gauge in Laplace margins; anything else comes in through [`Gauge::custom`].

use std::fmt;
use std::sync::Arc;

use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::numerics::{invert_spd, NumericsError};

/// Coordinate domain of a model's margins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Margin {
    /// Coordinates live on `[0, inf)`.
    Exponential,
    /// Coordinates live on `(-inf, inf)`.
    Laplace,
}

/// Errors from gauge construction and evaluation.
#[derive(Debug, Error)]
pub enum GaugeError {
    #[error("parameter {name} = {value} is outside its valid range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("correlation matrix is invalid: {0}")]
    NotPositiveDefinite(String),
    #[error("gauge has dimension {expected} but the point has {got} coordinates")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {index} = {value} lies outside the {margin:?} margin domain")]
    DomainViolation { index: usize, value: f64, margin: Margin },
    #[error("dimension {got} is not supported: {detail}")]
    UnsupportedDimension { got: usize, detail: &'static str },
}

/// User-supplied gauge evaluator (margin and dimension are self-declared;
/// admissibility is checked lazily via [`check_gauge_axioms`]).
#[derive(Clone)]
pub struct CustomGauge {
    pub(crate) eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomGauge(..)")
    }
}

/// The parametric family of a [`Gauge`], with its parameters.
#[derive(Clone, Debug)]
pub enum GaugeKind {
    /// `(sum x_i)/theta + (1 - d/theta) min_i x_i`, `theta` in (0,1).
    Logistic { theta: f64 },
    /// `(x1 + x2 - 2 rho sqrt(x1 x2)) / (1 - rho^2)`, `rho` in [0,1). Two-dimensional.
    GaussianExp { rho: f64 },
    /// `(sum x_i^{1/theta})^theta`, `theta` in (0,1].
    InvertedLogistic { theta: f64 },
    /// `max{(x1-x2)/theta, (x2-x1)/theta, (x1+x2)/(2-theta)}`, `theta` in (0,1). Two-dimensional.
    Square { theta: f64 },
    /// `x1/theta + x2/gamma + (1 - 1/theta - 1/gamma) min(x1,x2)`, both in (0,1). Two-dimensional.
    AsymmetricAd { theta: f64, gamma: f64 },
    /// `s' inv(Sigma) s` with `s_i = sgn(x_i) sqrt(|x_i|)`; `Sigma` a correlation matrix. Laplace margins.
    GaussianLaplace {
        sigma: Vec<Vec<f64>>,
        /// Cached inverse of `sigma`.
        inv: Vec<Vec<f64>>,
    },
    /// Self-declared evaluator.
    Custom(CustomGauge),
}

/// An evaluable gauge function together with its dimension and margin.
#[derive(Clone, Debug)]
pub struct Gauge {
    dimension: usize,
    margin: Margin,
    kind: GaugeKind,
}

fn param_in_open_unit(name: &'static str, value: f64) -> Result<(), GaugeError> {
    if value.is_finite() && 0.0 < value && value < 1.0 {
        Ok(())
    } else {
        Err(GaugeError::ParameterOutOfRange { name, value, range: "(0, 1)" })
    }
}

impl Gauge {
    /// Logistic gauge in `dim >= 2` variables with `theta` in (0,1).
    pub fn logistic(dim: usize, theta: f64) -> Result<Gauge, GaugeError> {
        if dim < 2 {
            return Err(GaugeError::UnsupportedDimension { got: dim, detail: "logistic needs at least 2 variables" });
        }
        param_in_open_unit("theta", theta)?;
        Ok(Gauge { dimension: dim, margin: Margin::Exponential, kind: GaugeKind::Logistic { theta } })
    }

    /// Bivariate Gaussian gauge in exponential margins with `rho` in [0,1).
    pub fn gaussian_exp(rho: f64) -> Result<Gauge, GaugeError> {
        if !(rho.is_finite() && (0.0..1.0).contains(&rho)) {
            return Err(GaugeError::ParameterOutOfRange { name: "rho", value: rho, range: "[0, 1)" });
        }
        Ok(Gauge { dimension: 2, margin: Margin::Exponential, kind: GaugeKind::GaussianExp { rho } })
    }

    /// Inverted-logistic gauge in `dim >= 2` variables with `theta` in (0,1].
    pub fn inverted_logistic(dim: usize, theta: f64) -> Result<Gauge, GaugeError> {
        if dim < 2 {
            return Err(GaugeError::UnsupportedDimension {
                got: dim,
                detail: "inverted logistic needs at least 2 variables",
            });
        }
        if !(theta.is_finite() && 0.0 < theta && theta <= 1.0) {
            return Err(GaugeError::ParameterOutOfRange { name: "theta", value: theta, range: "(0, 1]" });
        }
        Ok(Gauge { dimension: dim, margin: Margin::Exponential, kind: GaugeKind::InvertedLogistic { theta } })
    }

    /// Bivariate square gauge with `theta` in (0,1).
    pub fn square(theta: f64) -> Result<Gauge, GaugeError> {
        param_in_open_unit("theta", theta)?;
        Ok(Gauge { dimension: 2, margin: Margin::Exponential, kind: GaugeKind::Square { theta } })
    }

    /// Bivariate asymmetric gauge with `theta, gamma` in (0,1); `theta`
    /// belongs to the first argument, `gamma` to the second.
    pub fn asymmetric_ad(theta: f64, gamma: f64) -> Result<Gauge, GaugeError> {
        param_in_open_unit("theta", theta)?;
        param_in_open_unit("gamma", gamma)?;
        Ok(Gauge { dimension: 2, margin: Margin::Exponential, kind: GaugeKind::AsymmetricAd { theta, gamma } })
    }

    /// Gaussian gauge in Laplace margins from a correlation matrix (symmetric
    /// positive definite with unit diagonal). The inverse is cached.
    pub fn gaussian_laplace(sigma: Vec<Vec<f64>>) -> Result<Gauge, GaugeError> {
        let d = sigma.len();
        if d < 2 {
            return Err(GaugeError::UnsupportedDimension {
                got: d,
                detail: "a correlation matrix needs at least 2 variables",
            });
        }
        for (i, row) in sigma.iter().enumerate() {
            if row.len() != d {
                return Err(GaugeError::NotPositiveDefinite(format!(
                    "row {i} has {} entries in a {d}x{d} matrix",
                    row.len()
                )));
            }
            if (row[i] - 1.0).abs() > 1e-12 {
                return Err(GaugeError::NotPositiveDefinite(format!(
                    "diagonal entry ({i},{i}) = {} is not 1",
                    row[i]
                )));
            }
        }
        let inv = invert_spd(&sigma).map_err(|e| match e {
            NumericsError::NotPositiveDefinite { index, pivot } => {
                GaugeError::NotPositiveDefinite(format!("pivot {pivot:.3e} at index {index}"))
            }
            other => GaugeError::NotPositiveDefinite(other.to_string()),
        })?;
        Ok(Gauge { dimension: d, margin: Margin::Laplace, kind: GaugeKind::GaussianLaplace { sigma, inv } })
    }

    /// Wraps a user evaluator as a gauge; `margin` and `dim` are taken on
    /// trust and should be vetted with [`check_gauge_axioms`].
    pub fn custom<F>(dim: usize, margin: Margin, eval: F) -> Result<Gauge, GaugeError>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(GaugeError::UnsupportedDimension { got: 0, detail: "a gauge needs at least 1 variable" });
        }
        Ok(Gauge {
            dimension: dim,
            margin,
            kind: GaugeKind::Custom(CustomGauge { eval: Arc::new(eval) }),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn margin(&self) -> Margin {
        self.margin
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    /// Evaluates the gauge after checking dimension and margin domain.
    pub fn eval(&self, x: &[f64]) -> Result<f64, GaugeError> {
        if x.len() != self.dimension {
            return Err(GaugeError::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        for (index, &v) in x.iter().enumerate() {
            if !v.is_finite() || (self.margin == Margin::Exponential && v < 0.0) {
                return Err(GaugeError::DomainViolation { index, value: v, margin: self.margin });
            }
        }
        Ok(self.eval_raw(x))
    }

    /// Evaluates without domain checks; callers guarantee `x` is a valid
    /// point of the right length (the minimizers do, by construction of
    /// their boxes).
    pub(crate) fn eval_raw(&self, x: &[f64]) -> f64 {
        match &self.kind {
            GaugeKind::Logistic { theta } => {
                let sum: f64 = x.iter().sum();
                let min = x.iter().copied().fold(f64::INFINITY, f64::min);
                sum / theta + (1.0 - x.len() as f64 / theta) * min
            }
            GaugeKind::GaussianExp { rho } => {
                (x[0] + x[1] - 2.0 * rho * (x[0] * x[1]).sqrt()) / (1.0 - rho * rho)
            }
            GaugeKind::InvertedLogistic { theta } => {
                let sum: f64 = x.iter().map(|&v| v.powf(1.0 / theta)).sum();
                sum.powf(*theta)
            }
            GaugeKind::Square { theta } => {
                let a = (x[0] - x[1]) / theta;
                let b = (x[1] - x[0]) / theta;
                let c = (x[0] + x[1]) / (2.0 - theta);
                a.max(b).max(c)
            }
            GaugeKind::AsymmetricAd { theta, gamma } => {
                x[0] / theta + x[1] / gamma + (1.0 - 1.0 / theta - 1.0 / gamma) * x[0].min(x[1])
            }
            GaugeKind::GaussianLaplace { inv, .. } => {
                let d = x.len();
                let s: Vec<f64> = x.iter().map(|&v| v.signum() * v.abs().sqrt()).collect();
                let mut q = 0.0;
                for i in 0..d {
                    // diagonal + twice the upper triangle
                    q += inv[i][i] * s[i] * s[i];
                    for j in (i + 1)..d {
                        q += 2.0 * inv[i][j] * s[i] * s[j];
                    }
                }
                q
            }
            GaugeKind::Custom(c) => (c.eval)(x),
        }
    }
}

/// Outcome of an axiom check on a gauge.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub n_rays: usize,
    pub tol: f64,
    /// Largest observed `|g(2x) - 2 g(x)|`.
    pub max_homogeneity_defect: f64,
    /// Largest observed `max(0, max_i |x_i| - g(x))`.
    pub max_lower_bound_violation: f64,
    pub pass: bool,
}

pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    // 53 uniform mantissa bits in [0, 1)
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Samples `n_rays` random domain points and reports the worst homogeneity
/// defect `|g(2x) - 2 g(x)|` and lower-bound violation
/// `max(0, max_i |x_i| - g(x))`; passes iff both stay at or below `tol`.
/// Sampling is deterministic (fixed seed).
pub fn check_gauge_axioms(g: &Gauge, n_rays: usize, tol: f64) -> AxiomReport {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9a6e_5eed);
    let d = g.dimension();
    let mut max_hom = 0.0f64;
    let mut max_lb = 0.0f64;
    let mut x = vec![0.0f64; d];
    let mut x2 = vec![0.0f64; d];
    for _ in 0..n_rays.max(1) {
        for v in x.iter_mut() {
            let u = unit_f64(&mut rng);
            *v = match g.margin() {
                Margin::Exponential => 3.0 * u,
                Margin::Laplace => 3.0 * (2.0 * u - 1.0),
            };
        }
        let gx = g.eval_raw(&x);
        for (a, b) in x2.iter_mut().zip(x.iter()) {
            *a = 2.0 * b;
        }
        let g2x = g.eval_raw(&x2);
        max_hom = max_hom.max((g2x - 2.0 * gx).abs());
        let sup = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        max_lb = max_lb.max(sup - gx);
    }
    max_lb = max_lb.max(0.0);
    AxiomReport {
        n_rays,
        tol,
        max_homogeneity_defect: max_hom,
        max_lower_bound_violation: max_lb,
        pass: max_hom <= tol && max_lb <= tol,
    }
}
