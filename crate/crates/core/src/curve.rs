//! Oriented bivariate curves: the view of a pairwise gauge along one edge.
//!
//! Everything the coefficient machinery needs from an edge is the section
//! `y -> g(s*1, y)` with the conditioning coordinate pinned to `s = +/-1`.
//! Evaluating `g - 1` directly loses all precision near the contact point
//! (the difference of two ~1 doubles has absolute noise ~1e-16, which is
//! fatal for flat contacts where the excess behaves like `c*y^sigma` with
//! `sigma` up to 5). Each curve therefore exposes `excess(s, y) = g(s,y) - 1`
//! through a cancellation-free closed form with *relative* precision, plus an
//! `excess_floor` describing the absolute noise that remains. Chain-composed
//! curves (see the chain module) stay in excess space end to end.

use crate::gauge::{Gauge, GaugeKind, Margin};

/// Sign of the conditioning coordinate (`Minus` is meaningful only under
/// Laplace margins).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Sign of a real number with `sign(0) = +`.
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// An oriented bivariate gauge section with precision metadata.
///
/// `eval2(x1, x2)` is the two-argument gauge with the conditioning variable
/// first; `excess(s, y) = eval2(s, y) - 1` computed without cancellation.
pub(crate) trait PairCurve: Send + Sync {
    fn margin(&self) -> Margin;

    /// Whether `y -> excess(s, y)` is convex (true for every
    /// exponential-margin catalogue family; convexity is preserved by chain
    /// composition, and it licenses golden-section search as a global
    /// minimizer).
    fn convex(&self) -> bool {
        false
    }

    fn eval2(&self, x1: f64, x2: f64) -> f64;

    fn excess(&self, s: Sign, y: f64) -> f64;

    /// Absolute noise level of `excess` near its zero set: 0 for exact closed
    /// forms, small positive for anything evaluated through a minimization.
    fn excess_floor(&self) -> f64;

    /// Closed-form contact coordinate for this orientation, when the family
    /// has one.
    fn known_alpha(&self, s: Sign) -> Option<f64>;

    /// Closed-form scale exponent for this orientation, when the family has
    /// one (exponential margins only).
    fn known_beta(&self) -> Option<f64>;
}

/// A catalogue gauge viewed along an edge; `swapped` means the stored gauge's
/// arguments are `(second, first)` relative to this orientation.
pub(crate) struct CatalogueCurve {
    gauge: Gauge,
    swapped: bool,
}

impl CatalogueCurve {
    /// Wraps a two-dimensional catalogue gauge. Returns `None` for custom
    /// gauges (use [`CustomCurve`]) and non-bivariate gauges.
    pub(crate) fn new(gauge: &Gauge, swapped: bool) -> Option<CatalogueCurve> {
        if gauge.dimension() != 2 {
            return None;
        }
        match gauge.kind() {
            GaugeKind::Custom(_) => None,
            _ => Some(CatalogueCurve { gauge: gauge.clone(), swapped }),
        }
    }

    /// The off-diagonal correlation when this is a 2x2 Gaussian-Laplace curve.
    fn gl_rho(&self) -> Option<f64> {
        match self.gauge.kind() {
            GaugeKind::GaussianLaplace { sigma, .. } => Some(sigma[0][1]),
            _ => None,
        }
    }
}

impl PairCurve for CatalogueCurve {
    fn margin(&self) -> Margin {
        self.gauge.margin()
    }

    fn convex(&self) -> bool {
        self.gauge.margin() == Margin::Exponential
    }

    fn eval2(&self, x1: f64, x2: f64) -> f64 {
        if self.swapped {
            self.gauge.eval_raw(&[x2, x1])
        } else {
            self.gauge.eval_raw(&[x1, x2])
        }
    }

    fn excess(&self, s: Sign, y: f64) -> f64 {
        debug_assert!(
            s == Sign::Plus || self.margin() == Margin::Laplace,
            "negative conditioning sign needs Laplace margins"
        );
        match self.gauge.kind() {
            GaugeKind::Logistic { theta } => {
                // g(1,y) = 1 + (1-y)(1-theta)/theta for y <= 1, 1 + (y-1)/theta above
                if y <= 1.0 {
                    (1.0 - y) * (1.0 - theta) / theta
                } else {
                    (y - 1.0) / theta
                }
            }
            GaugeKind::GaussianExp { rho } => {
                // g(1,y) - 1 = (sqrt(y) - rho)^2 / (1 - rho^2)
                let d = y.sqrt() - rho;
                d * d / (1.0 - rho * rho)
            }
            GaugeKind::InvertedLogistic { theta } => {
                // (1 + y^{1/theta})^theta - 1, full relative precision
                (theta * y.powf(1.0 / theta).ln_1p()).exp_m1()
            }
            GaugeKind::Square { theta } => {
                let a = (1.0 - y - theta) / theta;
                let b = (y - 1.0 - theta) / theta;
                let c = (y - (1.0 - theta)) / (2.0 - theta);
                a.max(b).max(c)
            }
            GaugeKind::AsymmetricAd { theta, gamma } => {
                // oriented: the parameter of the conditioning slot governs the
                // rise toward y = 1 from below, the other one above
                let (down, up) = if self.swapped { (*gamma, *theta) } else { (*theta, *gamma) };
                if y <= 1.0 {
                    (1.0 - y) * (1.0 - down) / down
                } else {
                    (y - 1.0) / up
                }
            }
            GaugeKind::GaussianLaplace { sigma, .. } => {
                // g(s,y) - 1 = (u - s*rho)^2 / (1 - rho^2), u = sgn(y) sqrt(|y|)
                let rho = sigma[0][1];
                let u = y.signum() * y.abs().sqrt();
                let d = u - s.as_f64() * rho;
                d * d / (1.0 - rho * rho)
            }
            GaugeKind::Custom(_) => unreachable!("CatalogueCurve::new rejects custom gauges"),
        }
    }

    fn excess_floor(&self) -> f64 {
        0.0
    }

    fn known_alpha(&self, s: Sign) -> Option<f64> {
        match self.gauge.kind() {
            GaugeKind::Logistic { .. } => Some(1.0),
            GaugeKind::GaussianExp { rho } => Some(rho * rho),
            GaugeKind::InvertedLogistic { .. } => Some(0.0),
            GaugeKind::Square { theta } => Some(1.0 - theta),
            GaugeKind::AsymmetricAd { .. } => Some(1.0),
            GaugeKind::GaussianLaplace { .. } => {
                let rho = self.gl_rho().unwrap();
                Some(s.as_f64() * rho.signum() * rho * rho)
            }
            GaugeKind::Custom(_) => None,
        }
    }

    fn known_beta(&self) -> Option<f64> {
        match self.gauge.kind() {
            GaugeKind::Logistic { .. } => Some(0.0),
            GaugeKind::GaussianExp { rho } => Some(if *rho == 0.0 { 0.0 } else { 0.5 }),
            GaugeKind::InvertedLogistic { theta } => Some(1.0 - theta),
            GaugeKind::Square { .. } => Some(0.0),
            GaugeKind::AsymmetricAd { .. } => Some(0.0),
            // scale exponents in Laplace margins are out of scope
            GaugeKind::GaussianLaplace { .. } => None,
            GaugeKind::Custom(_) => None,
        }
    }
}

/// A user-supplied two-dimensional gauge viewed along an edge; the excess is
/// the plain difference, so the noise floor is that of double subtraction.
pub(crate) struct CustomCurve {
    gauge: Gauge,
    swapped: bool,
}

impl CustomCurve {
    pub(crate) fn new(gauge: &Gauge, swapped: bool) -> Option<CustomCurve> {
        if gauge.dimension() != 2 {
            return None;
        }
        Some(CustomCurve { gauge: gauge.clone(), swapped })
    }
}

impl PairCurve for CustomCurve {
    fn margin(&self) -> Margin {
        self.gauge.margin()
    }

    fn eval2(&self, x1: f64, x2: f64) -> f64 {
        if self.swapped {
            self.gauge.eval_raw(&[x2, x1])
        } else {
            self.gauge.eval_raw(&[x1, x2])
        }
    }

    fn excess(&self, s: Sign, y: f64) -> f64 {
        self.eval2(s.as_f64(), y) - 1.0
    }

    fn excess_floor(&self) -> f64 {
        1e-12
    }

    fn known_alpha(&self, _s: Sign) -> Option<f64> {
        None
    }

    fn known_beta(&self) -> Option<f64> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Gauge;

    fn curve(g: &Gauge) -> CatalogueCurve {
        CatalogueCurve::new(g, false).unwrap()
    }

    #[test]
    fn excess_matches_plain_difference_away_from_contact() {
        let gauges = vec![
            Gauge::logistic(2, 0.4).unwrap(),
            Gauge::gaussian_exp(0.6).unwrap(),
            Gauge::inverted_logistic(2, 0.3).unwrap(),
            Gauge::square(0.25).unwrap(),
            Gauge::asymmetric_ad(0.3, 0.7).unwrap(),
        ];
        for g in &gauges {
            let c = curve(g);
            for k in 0..60 {
                let y = 0.025 * k as f64;
                let direct = c.eval2(1.0, y) - 1.0;
                let fast = c.excess(Sign::Plus, y);
                assert!(
                    (direct - fast).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "{:?} at y = {y}: direct {direct}, excess {fast}",
                    g.kind()
                );
            }
        }
    }

    #[test]
    fn gaussian_laplace_excess_both_signs() {
        let g = Gauge::gaussian_laplace(vec![vec![1.0, -0.9], vec![-0.9, 1.0]]).unwrap();
        let c = curve(&g);
        for (s, sf) in [(Sign::Plus, 1.0), (Sign::Minus, -1.0)] {
            for k in -40..=40 {
                let y = 0.05 * k as f64;
                let direct = c.eval2(sf, y) - 1.0;
                let fast = c.excess(s, y);
                assert!(
                    (direct - fast).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "sign {sf} at y = {y}"
                );
            }
        }
        // contact coordinates: alpha^+ = sgn(rho) rho^2 = -0.81, alpha^- = +0.81
        assert_eq!(c.known_alpha(Sign::Plus), Some(-0.81));
        assert_eq!(c.known_alpha(Sign::Minus), Some(0.81));
        assert!(c.excess(Sign::Plus, -0.81).abs() <= 1e-15);
        assert!(c.excess(Sign::Minus, 0.81).abs() <= 1e-15);
    }

    #[test]
    fn excess_keeps_relative_precision_near_flat_contact() {
        // inverted logistic theta = 0.2: excess ~ 0.2 y^5; plain subtraction
        // would be pure noise below y ~ 6e-4
        let g = Gauge::inverted_logistic(2, 0.2).unwrap();
        let c = curve(&g);
        for &y in &[1e-6, 1e-5, 1e-4, 1e-3] {
            let e = c.excess(Sign::Plus, y);
            let lead = 0.2 * y.powi(5);
            assert!(
                (e - lead).abs() <= 1e-9 * lead,
                "y = {y}: excess {e:.6e}, leading term {lead:.6e}"
            );
        }
    }

    #[test]
    fn asymmetric_ad_orientation_swap() {
        let g = Gauge::asymmetric_ad(0.3, 0.7).unwrap();
        let fwd = CatalogueCurve::new(&g, false).unwrap();
        let bwd = CatalogueCurve::new(&g, true).unwrap();
        // forward: descent slope (1-theta)/theta, rise 1/gamma
        assert!((fwd.excess(Sign::Plus, 0.5) - 0.5 * (0.7 / 0.3)).abs() <= 1e-12);
        assert!((fwd.excess(Sign::Plus, 1.2) - 0.2 / 0.7).abs() <= 1e-12);
        // swapped: parameters trade places
        assert!((bwd.excess(Sign::Plus, 0.5) - 0.5 * (0.3 / 0.7)).abs() <= 1e-12);
        assert!((bwd.excess(Sign::Plus, 1.2) - 0.2 / 0.3).abs() <= 1e-12);
        // and eval2 swaps arguments
        assert_eq!(fwd.eval2(1.0, 0.5), bwd.eval2(0.5, 1.0));
    }

    #[test]
    fn known_coefficients_match_catalogue() {
        let cases: Vec<(Gauge, f64, f64)> = vec![
            (Gauge::logistic(2, 0.4).unwrap(), 1.0, 0.0),
            (Gauge::gaussian_exp(0.6).unwrap(), 0.36, 0.5),
            (Gauge::inverted_logistic(2, 0.3).unwrap(), 0.0, 0.7),
            (Gauge::square(0.25).unwrap(), 0.75, 0.0),
            (Gauge::asymmetric_ad(0.3, 0.7).unwrap(), 1.0, 0.0),
        ];
        for (g, alpha, beta) in cases {
            let c = curve(&g);
            assert_eq!(c.known_alpha(Sign::Plus), Some(alpha), "{:?}", g.kind());
            assert_eq!(c.known_beta(), Some(beta), "{:?}", g.kind());
            // the claimed contact really is a contact
            assert!(c.excess(Sign::Plus, alpha).abs() <= 1e-12);
        }
        let indep = Gauge::gaussian_exp(0.0).unwrap();
        assert_eq!(curve(&indep).known_beta(), Some(0.0));
    }

    #[test]
    fn custom_curve_plain_excess() {
        let g = Gauge::custom(2, Margin::Exponential, |x: &[f64]| {
            (x[0] * x[0] + x[1] * x[1]).sqrt()
        })
        .unwrap();
        let c = CustomCurve::new(&g, false).unwrap();
        assert!((c.excess(Sign::Plus, 0.0)).abs() <= 1e-15);
        assert!((c.eval2(1.0, 1.0) - 2.0f64.sqrt()).abs() <= 1e-15);
        assert!(c.known_alpha(Sign::Plus).is_none());
    }
}
