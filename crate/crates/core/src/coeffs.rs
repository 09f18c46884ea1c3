//! Conditional-extremes coefficients.
//!
//! For a bivariate gauge `g` normalized so that `g(1, y)` reaches 1, the
//! dependence coefficient `alpha` is the *rightmost* contact coordinate
//! `max {y : g(1, y) = 1}`, and the scale coefficient `beta = 1 - 1/sigma`
//! comes from the growth rate `g(1, alpha + x) - 1 ~ c * x^sigma`.
//!
//! On a block model, pairwise coefficients obey path recurrences: `alpha`
//! multiplies along the unique shortest path (with a signed variant under
//! Laplace margins), and `beta` folds through a four-case rule keyed on
//! which accumulated/edge alphas vanish. The recurrences here use closed
//! forms of the catalogue families; the numeric routines are deliberately
//! independent so the two can cross-check each other.

use std::sync::Arc;

use crate::curve::{CatalogueCurve, CustomCurve, PairCurve, Sign};
use crate::gauge::{Gauge, Margin};
use crate::graph::GraphError;
use crate::model::{MarginalGauge, Model, ModelError};
use crate::numerics::{
    bisect_sublevel_edge, fit_loglog_slope, golden_min, rightmost_min_1d_with_threshold,
    MinimizerConfig, NumericsError, SlopeFitConfig,
};

/// How a coefficient was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffMethod {
    /// Closed-form path recurrence.
    Recurrence,
    /// Direct numeric contact search.
    Numeric,
    /// Log-log slope fit near the contact.
    NumericFit,
}

/// A dependence coefficient `alpha` with its provenance.
#[derive(Debug, Clone)]
pub struct AlphaResult {
    /// In `[0, 1]` (exponential) or `[-1, 1]` (Laplace).
    pub value: f64,
    pub conditioning_sign: Sign,
    pub method: CoeffMethod,
    /// Gauge value at the contact point; 1 within tolerance for `Numeric`.
    pub contact_value: f64,
}

/// A scale coefficient `beta` with the associated growth index `sigma`.
#[derive(Debug, Clone)]
pub struct BetaResult {
    /// In `[0, 1)`; always equal to `1 - 1/sigma`.
    pub value: f64,
    pub sigma: f64,
    pub method: CoeffMethod,
    /// Goodness of the log-log fit (`NumericFit` only).
    pub fit_r2: Option<f64>,
    pub low_quality: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CoeffError {
    #[error("a negative conditioning sign requires Laplace margins")]
    SignRequiresLaplace,
    #[error("edge coefficients need a bivariate gauge; got dimension {got}")]
    NotBivariate { got: usize },
    #[error("scale coefficients are not supported under Laplace margins")]
    BetaNotSupported,
    #[error("this recurrence requires {expected:?} margins; the model uses {got:?}")]
    WrongMargin { expected: Margin, got: Margin },
    #[error("gauge value {value} at the contact point is not 1; the gauge is likely inadmissible")]
    ContactValueNotOne { value: f64 },
    #[error("edge alpha {value} outside the exponential range [0, 1]")]
    EdgeAlphaOutOfRange { value: f64 },
    #[error("edge beta {value} outside [0, 1)")]
    EdgeBetaOutOfRange { value: f64 },
    #[error("no edge data supplied")]
    EmptyEdgeData,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Absolute noise floor of multi-edge composed excess evaluations. The
/// numeric contact search thresholds its sublevel bisection at 8x the
/// curve's floor, so a contact whose excess grows like `c * y^sigma` is
/// located to about `(8 * floor / c)^(1/sigma)`: exact for single edges
/// (floor 0), and increasingly coarse for flat composed contacts.
pub const COMPOSED_EXCESS_FLOOR: f64 = crate::chain::COMPOSED_FLOOR;

/// Contact-value tolerance for numeric alpha searches.
fn contact_tol(cfg: &MinimizerConfig) -> f64 {
    cfg.tolerance.max(1e-7)
}

fn wrap_curve(g: &Gauge) -> Result<Arc<dyn PairCurve>, CoeffError> {
    if g.dimension() != 2 {
        return Err(CoeffError::NotBivariate { got: g.dimension() });
    }
    Ok(match CatalogueCurve::new(g, false) {
        Some(c) => Arc::new(c),
        None => Arc::new(CustomCurve::new(g, false).expect("dimension checked")),
    })
}

/// Numeric `alpha` of a bivariate gauge: the rightmost `y` with
/// `g(sign, y) = 1`.
pub fn edge_alpha(g: &Gauge, cond_sign: Sign, cfg: &MinimizerConfig) -> Result<AlphaResult, CoeffError> {
    let curve = wrap_curve(g)?;
    edge_alpha_curve(curve.as_ref(), cond_sign, cfg)
}

/// Numeric `alpha` of a (pairwise) marginal gauge: the independent oracle
/// for the path recurrences.
pub fn edge_alpha_marginal(
    mg: &MarginalGauge,
    cond_sign: Sign,
    cfg: &MinimizerConfig,
) -> Result<AlphaResult, CoeffError> {
    match mg.chain() {
        Some(curve) => edge_alpha_curve(curve.as_ref(), cond_sign, cfg),
        None => {
            if mg.dimension() != 2 {
                return Err(CoeffError::NotBivariate { got: mg.dimension() });
            }
            let adapter = MarginalPairCurve { mg: mg.clone() };
            edge_alpha_curve(&adapter, cond_sign, cfg)
        }
    }
}

/// Shared numeric contact search over a pair curve.
///
/// The sublevel threshold scales with the curve's own excess noise floor
/// (not with `cfg.tolerance`): a flat contact like the inverted logistic's
/// has excess `~ 0.2 y^5`, so a threshold of 1e-8 would misplace `alpha = 0`
/// by ~1e-2 while the closed-form excess resolves it to ~5e-7.
pub(crate) fn edge_alpha_curve(
    curve: &dyn PairCurve,
    cond_sign: Sign,
    cfg: &MinimizerConfig,
) -> Result<AlphaResult, CoeffError> {
    if cond_sign == Sign::Minus && curve.margin() == Margin::Exponential {
        return Err(CoeffError::SignRequiresLaplace);
    }
    cfg.validate()?;
    let (lo, hi) = match curve.margin() {
        Margin::Exponential => (0.0, 1.0),
        Margin::Laplace => (-1.0, 1.0),
    };
    let f = |y: f64| curve.excess(cond_sign, y);
    let threshold = (8.0 * curve.excess_floor()).max(1e-32);

    let (alpha, m_ref) = if curve.convex() {
        // Convex excess: golden section pins the minimum, and the sublevel
        // set {excess <= tau} is an interval whose right edge is the answer.
        let (y0, m_ref) = golden_min(&f, lo, hi, 160);
        let tau = m_ref + threshold;
        let alpha = if f(hi) <= tau { hi } else { bisect_sublevel_edge(&f, y0, hi, tau, 160) };
        (alpha, m_ref)
    } else {
        let n = cfg.grid_points_per_dim.max(241);
        let refine = cfg.refine_iters.max(90);
        rightmost_min_1d_with_threshold(f, lo, hi, n, refine, threshold, cfg.multistart_count.max(8))?
    };

    if m_ref.abs() > contact_tol(cfg) {
        return Err(CoeffError::ContactValueNotOne { value: 1.0 + m_ref });
    }
    Ok(AlphaResult {
        value: alpha.clamp(lo, hi),
        conditioning_sign: cond_sign,
        method: CoeffMethod::Numeric,
        contact_value: 1.0 + m_ref,
    })
}

/// Numeric `beta` of a bivariate gauge by a log-log slope fit at the given
/// contact coordinate `alpha` (exponential margins only).
pub fn edge_beta(g: &Gauge, alpha: f64, cfg: &SlopeFitConfig) -> Result<BetaResult, CoeffError> {
    let curve = wrap_curve(g)?;
    edge_beta_curve(curve.as_ref(), alpha, cfg)
}

/// Numeric `beta` of a (pairwise) marginal gauge; see [`edge_beta`].
pub fn edge_beta_marginal(
    mg: &MarginalGauge,
    alpha: f64,
    cfg: &SlopeFitConfig,
) -> Result<BetaResult, CoeffError> {
    match mg.chain() {
        Some(curve) => edge_beta_curve(curve.as_ref(), alpha, cfg),
        None => {
            if mg.dimension() != 2 {
                return Err(CoeffError::NotBivariate { got: mg.dimension() });
            }
            let adapter = MarginalPairCurve { mg: mg.clone() };
            edge_beta_curve(&adapter, alpha, cfg)
        }
    }
}

pub(crate) fn edge_beta_curve(
    curve: &dyn PairCurve,
    alpha: f64,
    cfg: &SlopeFitConfig,
) -> Result<BetaResult, CoeffError> {
    if curve.margin() != Margin::Exponential {
        return Err(CoeffError::BetaNotSupported);
    }
    cfg.validate()?;
    // The fit floor follows the curve's own noise: closed-form excesses are
    // accurate in relative terms, so even values like 1e-26 carry signal and
    // the configured absolute floor would starve flat fits of points.
    let fit_cfg = SlopeFitConfig { value_floor: curve.excess_floor().max(1e-300), ..cfg.clone() };
    let fit = fit_loglog_slope(|x| curve.excess(Sign::Plus, alpha + x), &fit_cfg)?;
    let beta = if fit.sigma > 1.0 { (1.0 - 1.0 / fit.sigma).min(1.0 - 1e-9) } else { 0.0 };
    Ok(BetaResult {
        value: beta,
        sigma: 1.0 / (1.0 - beta),
        method: CoeffMethod::NumericFit,
        fit_r2: Some(fit.r2),
        low_quality: fit.low_quality,
    })
}

/// Closed-form `(alpha, beta)` of one oriented path edge, falling back to
/// numerics for custom gauges. Beta is skipped when `want_beta` is false
/// (it is undefined under Laplace margins).
fn edge_data(
    m: &Model,
    a: usize,
    b: usize,
    sign: Sign,
    want_beta: bool,
) -> Result<(f64, Option<f64>), CoeffError> {
    let curve = m.edge_curve(a, b)?;
    let alpha = match curve.known_alpha(sign) {
        Some(v) => v,
        None => edge_alpha_curve(curve.as_ref(), sign, &MinimizerConfig::default())?.value,
    };
    if !want_beta {
        return Ok((alpha, None));
    }
    let beta = match curve.known_beta() {
        Some(v) => v,
        None => edge_beta_curve(curve.as_ref(), alpha, &SlopeFitConfig::default())?.value,
    };
    Ok((alpha, Some(beta)))
}

/// Pathwise `alpha` recurrence under exponential margins: the product of
/// the edge alphas along the unique shortest path. Zero-propagating: any
/// zero edge factor gives exactly 0.
pub fn alpha_path(m: &Model, i: usize, j: usize) -> Result<AlphaResult, CoeffError> {
    if m.margin() != Margin::Exponential {
        return Err(CoeffError::WrongMargin { expected: Margin::Exponential, got: m.margin() });
    }
    let edges = m.graph().chain_reduction(i, j)?;
    let mut value = 1.0f64;
    for (a, b) in edges {
        let (alpha_e, _) = edge_data(m, a, b, Sign::Plus, false)?;
        if alpha_e == 0.0 {
            value = 0.0;
            break;
        }
        value *= alpha_e;
    }
    Ok(AlphaResult {
        value,
        conditioning_sign: Sign::Plus,
        method: CoeffMethod::Recurrence,
        contact_value: 1.0,
    })
}

/// Signed pathwise `alpha` recurrence under Laplace margins, conditioning
/// on `+1` at `i`: the magnitude multiplies along the path while the sign
/// threads through which of the two edge coefficients applies next.
/// `sign(0)` is taken as `+`; the product is 0 anyway once a factor is 0.
pub fn alpha_path_signed(m: &Model, i: usize, j: usize) -> Result<AlphaResult, CoeffError> {
    if m.margin() != Margin::Laplace {
        return Err(CoeffError::WrongMargin { expected: Margin::Laplace, got: m.margin() });
    }
    let edges = m.graph().chain_reduction(i, j)?;
    let mut cur = 1.0f64;
    let mut sign = Sign::Plus;
    for (a, b) in edges {
        let (alpha_e, _) = edge_data(m, a, b, sign, false)?;
        cur = cur.abs() * alpha_e;
        sign = Sign::of(cur);
    }
    Ok(AlphaResult {
        value: cur,
        conditioning_sign: Sign::Plus,
        method: CoeffMethod::Recurrence,
        contact_value: 1.0,
    })
}

/// Numeric `alpha` vector against all other vertices at once: pins
/// coordinate `i` to `sign * 1`, minimizes the joint gauge over the others,
/// then pushes every coordinate as far right as the unit level allows.
///
/// Entries follow `m.graph().vertices()` order with `i` removed.
pub fn alpha_vector(
    m: &Model,
    i: usize,
    cond_sign: Sign,
    cfg: &MinimizerConfig,
) -> Result<Vec<AlphaResult>, CoeffError> {
    if cond_sign == Sign::Minus && m.margin() == Margin::Exponential {
        return Err(CoeffError::SignRequiresLaplace);
    }
    cfg.validate()?;
    let ix = m.graph().vertex_index(i).ok_or(ModelError::UnknownVertex(i))?;
    let d = m.vertex_count();
    let rest: Vec<usize> = (0..d).filter(|&k| k != ix).collect();
    let (lo, hi) = match m.margin() {
        Margin::Exponential => (0.0, 1.0),
        Margin::Laplace => (-1.0, 1.0),
    };

    let joint = |z: &[f64]| {
        let mut x = vec![0.0f64; d];
        x[ix] = cond_sign.as_f64();
        for (t, &k) in rest.iter().enumerate() {
            x[k] = z[t];
        }
        m.eval_joint_raw(&x)
    };

    let bounds = vec![(lo, hi); rest.len()];
    let m0 = crate::numerics::minimize_box(&joint, &bounds, cfg)?;
    if (m0.value - 1.0).abs() > contact_tol(cfg) {
        return Err(CoeffError::ContactValueNotOne { value: m0.value });
    }

    // Rightward refinement: grow each coordinate to the largest value that
    // keeps the joint within 1 + tol, repeating until a full pass is stable.
    let tau = 1.0 + cfg.tolerance;
    let mut z = m0.point.clone();
    for _pass in 0..8 {
        let mut moved = 0.0f64;
        for t in 0..z.len() {
            let line = |y: f64| {
                let mut p = z.clone();
                p[t] = y;
                joint(&p)
            };
            let cur = z[t];
            let new = if line(hi) <= tau {
                hi
            } else if line(cur) <= tau {
                bisect_sublevel_edge(&line, cur, hi, tau, 120)
            } else {
                cur
            };
            if new > cur {
                moved = moved.max(new - cur);
                z[t] = new;
            }
        }
        if moved <= 1e-12 {
            break;
        }
    }

    let final_value = joint(&z);
    if (final_value - 1.0).abs() > contact_tol(cfg) + cfg.tolerance {
        return Err(CoeffError::ContactValueNotOne { value: final_value });
    }
    Ok(z
        .iter()
        .map(|&v| AlphaResult {
            value: v,
            conditioning_sign: cond_sign,
            method: CoeffMethod::Numeric,
            contact_value: final_value,
        })
        .collect())
}

/// Pathwise `beta` recurrence: collects per-edge `(alpha, beta)` (closed
/// forms where available, numerics otherwise) and folds them with
/// [`beta_path_with_edges`].
pub fn beta_path(m: &Model, i: usize, j: usize) -> Result<BetaResult, CoeffError> {
    if m.margin() != Margin::Exponential {
        return Err(CoeffError::BetaNotSupported);
    }
    let edges = m.graph().chain_reduction(i, j)?;
    let mut data = Vec::with_capacity(edges.len());
    for (a, b) in edges {
        let (alpha_e, beta_e) = edge_data(m, a, b, Sign::Plus, true)?;
        data.push((alpha_e, beta_e.expect("beta requested")));
    }
    beta_path_with_edges(&data)
}

/// Folds per-edge `(alpha, beta)` pairs along a path. The running state is
/// the pair `(alpha, beta)` of the conditioned vertex against the path's
/// current endpoint; each new edge updates `alpha` by product and `beta` by
/// the four-case rule on which alphas vanish.
pub fn beta_path_with_edges(edge_data: &[(f64, f64)]) -> Result<BetaResult, CoeffError> {
    if edge_data.is_empty() {
        return Err(CoeffError::EmptyEdgeData);
    }
    for &(a, b) in edge_data {
        if !(0.0..=1.0).contains(&a) {
            return Err(CoeffError::EdgeAlphaOutOfRange { value: a });
        }
        if !(0.0..1.0).contains(&b) {
            return Err(CoeffError::EdgeBetaOutOfRange { value: b });
        }
    }
    let (mut alpha_acc, mut beta_acc) = edge_data[0];
    for &(alpha_e, beta_e) in &edge_data[1..] {
        beta_acc = match (alpha_acc != 0.0, alpha_e != 0.0) {
            (true, true) => beta_acc.max(beta_e),
            (false, true) => beta_acc,
            (true, false) => beta_e,
            (false, false) => beta_acc * beta_e,
        };
        alpha_acc *= alpha_e;
    }
    Ok(BetaResult {
        value: beta_acc,
        sigma: 1.0 / (1.0 - beta_acc),
        method: CoeffMethod::Recurrence,
        fit_r2: None,
        low_quality: false,
    })
}

/// Shortcut for paths whose edge alphas are all nonzero: `beta` is the
/// maximum of the edge betas.
pub fn beta_path_all_positive(betas: &[f64]) -> f64 {
    betas.iter().fold(0.0f64, |a, &b| a.max(b))
}

/// Shortcut for paths whose edge alphas are all zero: `beta` is the product
/// of the edge betas.
pub fn beta_path_all_zero(betas: &[f64]) -> f64 {
    betas.iter().product()
}

/// Elimination-backed marginals seen as a pair curve; plain differences, so
/// precision is capped by the inner minimization noise.
struct MarginalPairCurve {
    mg: MarginalGauge,
}

impl PairCurve for MarginalPairCurve {
    fn margin(&self) -> Margin {
        self.mg.margin()
    }

    fn eval2(&self, x1: f64, x2: f64) -> f64 {
        self.mg.eval(&[x1, x2]).unwrap_or(f64::NAN)
    }

    fn excess(&self, s: Sign, y: f64) -> f64 {
        self.eval2(s.as_f64(), y) - 1.0
    }

    fn excess_floor(&self) -> f64 {
        1e-9
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
    use crate::model::Model;

    fn cfg() -> MinimizerConfig {
        MinimizerConfig::default()
    }

    #[test]
    fn edge_alpha_catalogue_values() {
        let cases: Vec<(Gauge, f64)> = vec![
            (Gauge::gaussian_exp(0.6).unwrap(), 0.36),
            (Gauge::logistic(2, 0.4).unwrap(), 1.0),
            (Gauge::square(0.25).unwrap(), 0.75),
            (Gauge::asymmetric_ad(0.3, 0.7).unwrap(), 1.0),
        ];
        for (g, want) in cases {
            let r = edge_alpha(&g, Sign::Plus, &cfg()).unwrap();
            assert!((r.value - want).abs() <= 1e-9, "{:?}: alpha {} want {want}", g.kind(), r.value);
            assert!((r.contact_value - 1.0).abs() <= 1e-9);
            assert_eq!(r.method, CoeffMethod::Numeric);
        }
    }

    #[test]
    fn edge_alpha_resolves_flat_contacts() {
        // inverted logistic: alpha = 0 but the excess is ~ theta * y^(1/theta),
        // flat enough that only a relative-precision excess can pin it down
        for theta in [0.2, 0.5, 0.8] {
            let g = Gauge::inverted_logistic(2, theta).unwrap();
            let r = edge_alpha(&g, Sign::Plus, &cfg()).unwrap();
            assert!(r.value >= 0.0 && r.value <= 1e-6, "theta {theta}: alpha {:.3e}", r.value);
        }
    }

    #[test]
    fn edge_alpha_signed_gaussian_laplace() {
        let g = Gauge::gaussian_laplace(vec![vec![1.0, -0.9], vec![-0.9, 1.0]]).unwrap();
        let plus = edge_alpha(&g, Sign::Plus, &cfg()).unwrap();
        let minus = edge_alpha(&g, Sign::Minus, &cfg()).unwrap();
        assert!((plus.value + 0.81).abs() <= 1e-9, "alpha+ {}", plus.value);
        assert!((minus.value - 0.81).abs() <= 1e-9, "alpha- {}", minus.value);

        let exp_gauge = Gauge::gaussian_exp(0.5).unwrap();
        assert!(matches!(
            edge_alpha(&exp_gauge, Sign::Minus, &cfg()),
            Err(CoeffError::SignRequiresLaplace)
        ));
    }

    #[test]
    fn edge_alpha_plateau_takes_rightmost_point() {
        // g(1, y) = 1 exactly on [0.2, 0.75]: the maximal contact is 0.75
        let g = Gauge::custom(2, Margin::Exponential, |x: &[f64]| {
            (x[0].abs())
                .max(x[1].abs())
                .max(1.25 * (x[0] - x[1]))
                .max(8.0 * x[1] - 5.0 * x[0])
        })
        .unwrap();
        let r = edge_alpha(&g, Sign::Plus, &cfg()).unwrap();
        assert!((r.value - 0.75).abs() <= 1e-9, "plateau right end: {}", r.value);
    }

    #[test]
    fn edge_alpha_rejects_inadmissible_gauge() {
        let g = Gauge::custom(2, Margin::Exponential, |x: &[f64]| 2.0 * x[0].abs() + x[1].abs())
            .unwrap();
        assert!(matches!(
            edge_alpha(&g, Sign::Plus, &cfg()),
            Err(CoeffError::ContactValueNotOne { .. })
        ));
    }

    #[test]
    fn edge_beta_catalogue_values() {
        let fit = SlopeFitConfig::default();
        let cases: Vec<(Gauge, f64, f64)> = vec![
            (Gauge::gaussian_exp(0.6).unwrap(), 0.36, 0.5),
            (Gauge::inverted_logistic(2, 0.3).unwrap(), 0.0, 0.7),
            (Gauge::inverted_logistic(2, 0.2).unwrap(), 0.0, 0.8),
            (Gauge::logistic(2, 0.4).unwrap(), 1.0, 0.0),
            (Gauge::square(0.25).unwrap(), 0.75, 0.0),
        ];
        for (g, alpha, want) in cases {
            let r = edge_beta(&g, alpha, &fit).unwrap();
            assert!(
                (r.value - want).abs() <= 0.02,
                "{:?}: beta {} want {want}",
                g.kind(),
                r.value
            );
            assert!((r.value - (1.0 - 1.0 / r.sigma)).abs() <= 1e-12);
            assert_eq!(r.method, CoeffMethod::NumericFit);
        }
    }

    #[test]
    fn edge_beta_rejects_laplace() {
        let g = Gauge::gaussian_laplace(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!(matches!(
            edge_beta(&g, 0.25, &SlopeFitConfig::default()),
            Err(CoeffError::BetaNotSupported)
        ));
    }

    fn chain_model(gauges: Vec<Gauge>, margin: Margin) -> Model {
        let cliques: Vec<Vec<usize>> =
            (0..gauges.len()).map(|k| vec![k + 1, k + 2]).collect();
        Model::from_cliques(&cliques, gauges, margin).unwrap()
    }

    #[test]
    fn alpha_path_products() {
        // logistic - gaussian(0.6) - logistic: alpha = 1 * 0.36 * 1
        let m = chain_model(
            vec![
                Gauge::logistic(2, 0.4).unwrap(),
                Gauge::gaussian_exp(0.6).unwrap(),
                Gauge::logistic(2, 0.7).unwrap(),
            ],
            Margin::Exponential,
        );
        let r = alpha_path(&m, 1, 4).unwrap();
        assert_eq!(r.value, 0.36, "closed-form product should be exact");
        assert_eq!(r.method, CoeffMethod::Recurrence);

        // an inverted-logistic edge zeroes the whole product
        let m0 = chain_model(
            vec![
                Gauge::inverted_logistic(2, 0.3).unwrap(),
                Gauge::gaussian_exp(0.6).unwrap(),
                Gauge::gaussian_exp(0.8).unwrap(),
            ],
            Margin::Exponential,
        );
        assert_eq!(alpha_path(&m0, 1, 4).unwrap().value, 0.0);

        // single-edge path: the edge coefficient itself
        let r1 = alpha_path(&m, 3, 4).unwrap();
        assert_eq!(r1.value, 1.0);

        let lap = chain_model(
            vec![Gauge::gaussian_laplace(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap()],
            Margin::Laplace,
        );
        assert!(matches!(alpha_path(&lap, 1, 2), Err(CoeffError::WrongMargin { .. })));
    }

    #[test]
    fn alpha_path_signed_recursion() {
        let gl = |rho: f64| {
            Gauge::gaussian_laplace(vec![vec![1.0, rho], vec![rho, 1.0]]).unwrap()
        };
        // signs thread through: 0.81 -> |.|*(-0.64) -> |.|*(-0.49)
        let m = chain_model(vec![gl(-0.9), gl(0.8), gl(0.7)], Margin::Laplace);
        let r = alpha_path_signed(&m, 1, 4).unwrap();
        assert!((r.value + 0.254016).abs() <= 1e-12, "signed product {}", r.value);

        // all-positive correlations reduce to the plain product
        let mp = chain_model(vec![gl(0.9), gl(0.8)], Margin::Laplace);
        let rp = alpha_path_signed(&mp, 1, 3).unwrap();
        assert!((rp.value - 0.81 * 0.64).abs() <= 1e-12);

        let exp_m = chain_model(vec![Gauge::logistic(2, 0.4).unwrap()], Margin::Exponential);
        assert!(matches!(alpha_path_signed(&exp_m, 1, 2), Err(CoeffError::WrongMargin { .. })));
    }

    #[test]
    fn alpha_vector_on_a_two_edge_chain() {
        let m = chain_model(
            vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::gaussian_exp(0.6).unwrap()],
            Margin::Exponential,
        );
        // conditioning on 1: alphas against (2, 3) are (1, 0.36)
        let v1 = alpha_vector(&m, 1, Sign::Plus, &cfg()).unwrap();
        assert_eq!(v1.len(), 2);
        assert!((v1[0].value - 1.0).abs() <= 1e-4, "alpha_2|1 = {}", v1[0].value);
        assert!((v1[1].value - 0.36).abs() <= 1e-4, "alpha_3|1 = {}", v1[1].value);
        assert!((v1[0].contact_value - 1.0).abs() <= 1e-7);

        // conditioning on 3: (0.36, 0.36)
        let v3 = alpha_vector(&m, 3, Sign::Plus, &cfg()).unwrap();
        assert!((v3[0].value - 0.36).abs() <= 1e-4, "alpha_1|3 = {}", v3[0].value);
        assert!((v3[1].value - 0.36).abs() <= 1e-4, "alpha_2|3 = {}", v3[1].value);

        // pairwise entries track the path recurrence
        let rec = alpha_path(&m, 1, 3).unwrap();
        assert!((v1[1].value - rec.value).abs() <= 1e-4);
    }

    #[test]
    fn beta_fold_four_cases() {
        // both alphas positive: max rule
        let a = beta_path_with_edges(&[(1.0, 0.0), (0.36, 0.5), (1.0, 0.0)]).unwrap();
        assert_eq!(a.value, 0.5);
        // accumulated zero, edge positive: accumulated beta survives
        let b = beta_path_with_edges(&[(0.0, 0.7), (0.36, 0.5), (0.49, 0.5)]).unwrap();
        assert_eq!(b.value, 0.7);
        // both zero: product rule
        let c = beta_path_with_edges(&[(0.0, 0.7), (1.0, 0.0), (0.0, 0.8)]).unwrap();
        assert!((c.value - 0.56).abs() <= 1e-15);
        // positive then zero edge: edge beta replaces
        let d = beta_path_with_edges(&[(1.0, 0.0), (0.0, 0.0)]).unwrap();
        assert_eq!(d.value, 0.0);
        assert!((c.sigma - 1.0 / (1.0 - 0.56)).abs() <= 1e-12);

        assert!(matches!(beta_path_with_edges(&[]), Err(CoeffError::EmptyEdgeData)));
        assert!(matches!(
            beta_path_with_edges(&[(0.5, 1.0)]),
            Err(CoeffError::EdgeBetaOutOfRange { .. })
        ));
        assert!(matches!(
            beta_path_with_edges(&[(1.5, 0.5)]),
            Err(CoeffError::EdgeAlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn beta_shortcuts_agree_with_fold() {
        let all_pos = [(0.36, 0.5), (0.81, 0.25), (0.49, 0.4)];
        let fold = beta_path_with_edges(&all_pos).unwrap().value;
        let betas: Vec<f64> = all_pos.iter().map(|e| e.1).collect();
        assert_eq!(fold, beta_path_all_positive(&betas));

        let all_zero = [(0.0, 0.7), (0.0, 0.8), (0.0, 0.5)];
        let fold0 = beta_path_with_edges(&all_zero).unwrap().value;
        let betas0: Vec<f64> = all_zero.iter().map(|e| e.1).collect();
        assert!((fold0 - beta_path_all_zero(&betas0)).abs() <= 1e-15);
    }

    #[test]
    fn beta_path_on_mixed_chain() {
        // inverted-logistic(0.3) - logistic - inverted-logistic(0.2):
        // beta = 0.7 * 0.8 through the both-zero branch
        let m = chain_model(
            vec![
                Gauge::inverted_logistic(2, 0.3).unwrap(),
                Gauge::logistic(2, 0.5).unwrap(),
                Gauge::inverted_logistic(2, 0.2).unwrap(),
            ],
            Margin::Exponential,
        );
        let r = beta_path(&m, 1, 4).unwrap();
        assert!((r.value - 0.56).abs() <= 1e-12, "beta {}", r.value);
        assert_eq!(r.method, CoeffMethod::Recurrence);
        assert!(r.fit_r2.is_none());
    }

    #[test]
    fn composed_marginal_alpha_matches_recurrence() {
        let m = chain_model(
            vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::gaussian_exp(0.6).unwrap()],
            Margin::Exponential,
        );
        let pm = m.pairwise_marginal(1, 3, &cfg()).unwrap();
        let numeric = edge_alpha_marginal(&pm, Sign::Plus, &cfg()).unwrap();
        let rec = alpha_path(&m, 1, 3).unwrap();
        assert!(
            (numeric.value - rec.value).abs() <= 1e-5,
            "numeric {} vs recurrence {}",
            numeric.value,
            rec.value
        );
    }

    #[test]
    fn elimination_marginal_alpha_agrees_too() {
        let m = chain_model(
            vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::gaussian_exp(0.6).unwrap()],
            Margin::Exponential,
        );
        let mg = m.marginal_gauge(&[1, 3], &cfg()).unwrap();
        let numeric = edge_alpha_marginal(&mg, Sign::Plus, &cfg()).unwrap();
        assert!((numeric.value - 0.36).abs() <= 1e-3, "elimination alpha {}", numeric.value);
    }
}
