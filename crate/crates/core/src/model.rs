//! Block models: clique gauges assembled over a block graph, joint
//! evaluation, and marginalization.
//!
//! The joint gauge of a block model is
//!
//! ```text
//! g(x) = sum over cliques C of g_C(x_C)  -  sum over separators D of |x_D|
//! ```
//!
//! with one (singleton) separator per clique beyond the first. Marginal
//! gauges are minima of the joint over the eliminated coordinates; because
//! the joint dominates the magnitude of every coordinate, the minimization
//! box is always bounded by the joint value at zeroed eliminated coordinates.

use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::ComposedCurve;
use crate::curve::{CatalogueCurve, CustomCurve, PairCurve, Sign};
use crate::gauge::{unit_f64, Gauge, GaugeError, GaugeKind, Margin};
use crate::graph::{BlockGraph, GraphError};
use crate::numerics::{minimize_box, MinimizerConfig, NumericsError};

/// Largest supported clique; keeps per-evaluation scratch on the stack.
pub const MAX_CLIQUE: usize = 32;

/// Errors from model assembly and marginal evaluation.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("no gauge supplied for clique {clique:?}")]
    MissingCliqueGauge { clique: Vec<usize> },
    #[error("a gauge was supplied for {clique:?}, which is not a clique of the graph")]
    UnknownClique { clique: Vec<usize> },
    #[error("clique {clique:?} has {clique_size} vertices but its gauge is {gauge_dim}-dimensional")]
    DimensionMismatch { clique: Vec<usize>, clique_size: usize, gauge_dim: usize },
    #[error("clique {clique:?} gauge uses {got:?} margins but the model uses {expected:?}")]
    MarginMismatch { clique: Vec<usize>, expected: Margin, got: Margin },
    #[error("clique {clique:?} has {size} vertices; at most {max} are supported")]
    CliqueTooLarge { clique: Vec<usize>, size: usize, max: usize },
    #[error("the kept vertex set is empty")]
    EmptyKeptSet,
    #[error("vertex {0} is not in the model")]
    UnknownVertex(usize),
    #[error("vertex {0} appears more than once in the kept set")]
    DuplicateKeptVertex(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A joint gauge on a block graph: one gauge per clique, minus separators.
#[derive(Debug, Clone)]
pub struct Model {
    graph: BlockGraph,
    /// Clique gauges, aligned with `graph.cliques()` order.
    gauges: Vec<Gauge>,
    margin: Margin,
    /// Vertex indices (into the sorted vertex list) per clique.
    clique_idx: Vec<Vec<usize>>,
    /// Vertex indices of the separator multiset.
    sep_idx: Vec<usize>,
}

/// Assembles a model from a built graph and a clique → gauge map, supplied
/// as `(clique vertices, gauge)` entries in any order.
pub fn assemble_model(
    graph: BlockGraph,
    gauges: Vec<(Vec<usize>, Gauge)>,
    margin: Margin,
) -> Result<Model, ModelError> {
    let sorted = |v: &[usize]| {
        let mut s = v.to_vec();
        s.sort_unstable();
        s
    };
    let mut entries: Vec<(Vec<usize>, Gauge, bool)> =
        gauges.into_iter().map(|(c, g)| (sorted(&c), g, false)).collect();

    let mut aligned: Vec<Gauge> = Vec::with_capacity(graph.cliques().len());
    for clique in graph.cliques() {
        let key = sorted(clique);
        let slot = entries
            .iter_mut()
            .find(|(c, _, used)| !*used && *c == key)
            .ok_or_else(|| ModelError::MissingCliqueGauge { clique: clique.clone() })?;
        slot.2 = true;
        aligned.push(slot.1.clone());
    }
    if let Some((c, _, _)) = entries.iter().find(|(_, _, used)| !*used) {
        return Err(ModelError::UnknownClique { clique: c.clone() });
    }

    for (clique, gauge) in graph.cliques().iter().zip(&aligned) {
        if clique.len() > MAX_CLIQUE {
            return Err(ModelError::CliqueTooLarge {
                clique: clique.clone(),
                size: clique.len(),
                max: MAX_CLIQUE,
            });
        }
        if gauge.dimension() != clique.len() {
            return Err(ModelError::DimensionMismatch {
                clique: clique.clone(),
                clique_size: clique.len(),
                gauge_dim: gauge.dimension(),
            });
        }
        if gauge.margin() != margin {
            return Err(ModelError::MarginMismatch {
                clique: clique.clone(),
                expected: margin,
                got: gauge.margin(),
            });
        }
    }

    let clique_idx: Vec<Vec<usize>> = graph
        .cliques()
        .iter()
        .map(|c| c.iter().map(|&v| graph.vertex_index(v).expect("clique vertex")).collect())
        .collect();
    let sep_idx: Vec<usize> =
        graph.separators().iter().map(|&v| graph.vertex_index(v).expect("separator")).collect();

    Ok(Model { graph, gauges: aligned, margin, clique_idx, sep_idx })
}

impl Model {
    /// Builds graph and model in one step, pairing `gauges` with `cliques`
    /// positionally (both in declared order).
    pub fn from_cliques(
        cliques: &[Vec<usize>],
        gauges: Vec<Gauge>,
        margin: Margin,
    ) -> Result<Model, ModelError> {
        if cliques.len() != gauges.len() {
            return Err(ModelError::MissingCliqueGauge {
                clique: cliques.get(gauges.len()).cloned().unwrap_or_default(),
            });
        }
        let graph = crate::graph::build_block_graph(cliques)?;
        let entries = cliques.iter().cloned().zip(gauges).collect();
        assemble_model(graph, entries, margin)
    }

    pub fn graph(&self) -> &BlockGraph {
        &self.graph
    }

    pub fn margin(&self) -> Margin {
        self.margin
    }

    /// Clique gauges in `graph().cliques()` order.
    pub fn gauges(&self) -> &[Gauge] {
        &self.gauges
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Joint gauge at `x`, ordered like `graph().vertices()`.
    pub fn eval_joint(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.vertex_count() {
            return Err(GaugeError::DimensionMismatch {
                expected: self.vertex_count(),
                got: x.len(),
            }
            .into());
        }
        check_domain(self.margin, x)?;
        Ok(self.eval_joint_raw(x))
    }

    /// Joint gauge without domain checks.
    pub(crate) fn eval_joint_raw(&self, x: &[f64]) -> f64 {
        let mut buf = [0.0f64; MAX_CLIQUE];
        let mut total = 0.0;
        for (k, idxs) in self.clique_idx.iter().enumerate() {
            for (slot, &ix) in idxs.iter().enumerate() {
                buf[slot] = x[ix];
            }
            total += self.gauges[k].eval_raw(&buf[..idxs.len()]);
        }
        for &s in &self.sep_idx {
            total -= x[s].abs();
        }
        total
    }

    /// Marginal gauge over `kept` (vertex labels), by numeric elimination of
    /// the complementary coordinates.
    pub fn marginal_gauge(
        &self,
        kept: &[usize],
        cfg: &MinimizerConfig,
    ) -> Result<MarginalGauge, ModelError> {
        if kept.is_empty() {
            return Err(ModelError::EmptyKeptSet);
        }
        cfg.validate()?;
        let mut kept_idx = Vec::with_capacity(kept.len());
        for &v in kept {
            let ix = self.graph.vertex_index(v).ok_or(ModelError::UnknownVertex(v))?;
            if kept_idx.contains(&ix) {
                return Err(ModelError::DuplicateKeptVertex(v));
            }
            kept_idx.push(ix);
        }
        let elim_idx: Vec<usize> =
            (0..self.vertex_count()).filter(|ix| !kept_idx.contains(ix)).collect();
        Ok(MarginalGauge {
            inner: Arc::new(MarginalInner {
                kept: kept.to_vec(),
                margin: self.margin,
                body: MarginalBody::Elimination {
                    model: self.clone(),
                    kept_idx,
                    elim_idx,
                    cfg: cfg.clone(),
                },
            }),
        })
    }

    /// Pairwise marginal gauge for `(i, j)`, composed along the unique
    /// shortest path between them instead of eliminating a full box.
    pub fn pairwise_marginal(
        &self,
        i: usize,
        j: usize,
        _cfg: &MinimizerConfig,
    ) -> Result<MarginalGauge, ModelError> {
        let curve = self.chain_curve(i, j)?;
        Ok(MarginalGauge {
            inner: Arc::new(MarginalInner {
                kept: vec![i, j],
                margin: self.margin,
                body: MarginalBody::Chain { curve },
            }),
        })
    }

    /// The composed chain curve for the ordered pair `(i, j)`.
    pub(crate) fn chain_curve(&self, i: usize, j: usize) -> Result<Arc<ComposedCurve>, ModelError> {
        let edges = self.graph.chain_reduction(i, j)?;
        let mut curves = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            curves.push(self.edge_curve(a, b)?);
        }
        Ok(Arc::new(ComposedCurve::new(curves)))
    }

    /// Oriented bivariate curve for two adjacent vertices: the marginal of
    /// their common clique onto `(a, b)`.
    ///
    /// Within one clique, the rest of the model marginalizes out exactly
    /// (every other clique hangs off a singleton separator `s` and
    /// contributes `min over its coordinates = |x_s|`, cancelling the
    /// subtracted separator term), so only the clique gauge matters here.
    pub(crate) fn edge_curve(&self, a: usize, b: usize) -> Result<Arc<dyn PairCurve>, ModelError> {
        let _ = self.graph.vertex_index(a).ok_or(ModelError::UnknownVertex(a))?;
        let _ = self.graph.vertex_index(b).ok_or(ModelError::UnknownVertex(b))?;
        let k = self
            .graph
            .clique_containing(a, b)
            .unwrap_or_else(|| panic!("vertices {a} and {b} are not adjacent"));
        let clique = &self.graph.cliques()[k];
        let gauge = &self.gauges[k];

        if clique.len() == 2 {
            let swapped = clique[0] == b;
            return Ok(match CatalogueCurve::new(gauge, swapped) {
                Some(c) => Arc::new(c),
                None => Arc::new(
                    CustomCurve::new(gauge, swapped).expect("clique of size 2 has a 2-d gauge"),
                ),
            });
        }

        let pa = clique.iter().position(|&v| v == a).expect("a in clique");
        let pb = clique.iter().position(|&v| v == b).expect("b in clique");
        match gauge.kind() {
            // Multivariate logistic: eliminated coordinates sit at the pair
            // minimum, collapsing to the bivariate logistic with the same
            // dependence parameter.
            GaugeKind::Logistic { theta } => {
                let g2 = Gauge::logistic(2, *theta).expect("validated parameter");
                Ok(Arc::new(CatalogueCurve::new(&g2, false).expect("catalogue pair")))
            }
            // Multivariate inverted logistic: eliminated coordinates sit at
            // zero, collapsing likewise.
            GaugeKind::InvertedLogistic { theta } => {
                let g2 = Gauge::inverted_logistic(2, *theta).expect("validated parameter");
                Ok(Arc::new(CatalogueCurve::new(&g2, false).expect("catalogue pair")))
            }
            // Gaussian quadratic form: partial minimization over the signed
            // square-root coordinates keeps the quadratic exactly, with the
            // pair's own 2x2 correlation submatrix.
            GaugeKind::GaussianLaplace { sigma, .. } => {
                let rho = sigma[pa][pb];
                let g2 = Gauge::gaussian_laplace(vec![vec![1.0, rho], vec![rho, 1.0]])
                    .expect("submatrix of a correlation matrix");
                Ok(Arc::new(CatalogueCurve::new(&g2, false).expect("catalogue pair")))
            }
            _ => Ok(Arc::new(EliminatedPairCurve {
                gauge: gauge.clone(),
                ia: pa,
                ib: pb,
                cfg: MinimizerConfig::default(),
            })),
        }
    }

    /// Samples `n` points on the unit level set `{g = 1}` of the joint
    /// gauge. Directions are uniform on the unit simplex (exponential) or
    /// the unit sup-norm sphere (Laplace); each maps to `w / g(w)`.
    /// Two-dimensional output is ordered by angle.
    pub fn sample_level_set(&self, n: usize) -> Vec<Vec<f64>> {
        level_set_points(self.vertex_count(), self.margin, n, |w| self.eval_joint_raw(w))
    }
}

/// Samples `n` points on `{g = 1}` for a single gauge; see
/// [`Model::sample_level_set`].
pub fn sample_level_set(g: &Gauge, n: usize) -> Vec<Vec<f64>> {
    level_set_points(g.dimension(), g.margin(), n, |w| g.eval_raw(w))
}

fn level_set_points(
    dim: usize,
    margin: Margin,
    n: usize,
    eval: impl Fn(&[f64]) -> f64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e_55ed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while points.len() < n && attempts < 10 * n + 64 {
        attempts += 1;
        let mut w = vec![0.0f64; dim];
        match margin {
            Margin::Exponential => {
                // iid standard exponentials normalized to the simplex
                let mut total = 0.0;
                for wi in w.iter_mut() {
                    let e = -(1.0 - unit_f64(&mut rng)).ln();
                    *wi = e;
                    total += e;
                }
                if total <= 0.0 {
                    continue;
                }
                for wi in w.iter_mut() {
                    *wi /= total;
                }
            }
            Margin::Laplace => {
                // uniform over the 2d faces of the sup-norm sphere
                let face = (rng.next_u64() % (2 * dim as u64)) as usize;
                for wi in w.iter_mut() {
                    *wi = 2.0 * unit_f64(&mut rng) - 1.0;
                }
                w[face / 2] = if face % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
        let v = eval(&w);
        if !(v > 0.0) || !v.is_finite() {
            continue;
        }
        points.push(w.iter().map(|wi| wi / v).collect());
    }
    if dim == 2 {
        points.sort_by(|p, q| p[1].atan2(p[0]).total_cmp(&q[1].atan2(q[0])));
    }
    points
}

fn check_domain(margin: Margin, x: &[f64]) -> Result<(), GaugeError> {
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() || (margin == Margin::Exponential && v < 0.0) {
            return Err(GaugeError::DomainViolation { index: i, value: v, margin });
        }
    }
    Ok(())
}

/// How a marginal gauge is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalMethod {
    /// Direct minimization of the joint over the eliminated box.
    NumericElimination,
    /// Composition along the shortest path (pairs only).
    ChainComposition,
}

/// A marginal of a block model's joint gauge: `g_J(x_J) = min g(x)` over the
/// eliminated coordinates. Thread-safe and cheap to clone.
#[derive(Clone)]
pub struct MarginalGauge {
    inner: Arc<MarginalInner>,
}

struct MarginalInner {
    kept: Vec<usize>,
    margin: Margin,
    body: MarginalBody,
}

enum MarginalBody {
    Elimination { model: Model, kept_idx: Vec<usize>, elim_idx: Vec<usize>, cfg: MinimizerConfig },
    Chain { curve: Arc<ComposedCurve> },
}

impl std::fmt::Debug for MarginalGauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MarginalGauge")
            .field("kept", &self.inner.kept)
            .field("method", &self.method())
            .finish()
    }
}

impl MarginalGauge {
    /// Kept vertex labels, in the order coordinates are supplied to
    /// [`MarginalGauge::eval`].
    pub fn kept(&self) -> &[usize] {
        &self.inner.kept
    }

    pub fn margin(&self) -> Margin {
        self.inner.margin
    }

    pub fn dimension(&self) -> usize {
        self.inner.kept.len()
    }

    pub fn method(&self) -> MarginalMethod {
        match self.inner.body {
            MarginalBody::Elimination { .. } => MarginalMethod::NumericElimination,
            MarginalBody::Chain { .. } => MarginalMethod::ChainComposition,
        }
    }

    /// Evaluates the marginal at `x`, ordered like [`MarginalGauge::kept`].
    pub fn eval(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.dimension() {
            return Err(GaugeError::DimensionMismatch { expected: self.dimension(), got: x.len() }
                .into());
        }
        check_domain(self.inner.margin, x)?;
        match &self.inner.body {
            MarginalBody::Chain { curve } => Ok(curve.eval2(x[0], x[1])),
            MarginalBody::Elimination { model, kept_idx, elim_idx, cfg } => {
                let mut full = vec![0.0f64; model.vertex_count()];
                for (t, &ix) in kept_idx.iter().enumerate() {
                    full[ix] = x[t];
                }
                if elim_idx.is_empty() {
                    return Ok(model.eval_joint_raw(&full));
                }
                // The joint dominates each eliminated |coordinate|, so no
                // minimizer leaves the box bounded by the value at zero.
                let u = model.eval_joint_raw(&full);
                if !(u > 0.0) {
                    return Ok(u.max(0.0));
                }
                let bounds: Vec<(f64, f64)> = match self.inner.margin {
                    Margin::Exponential => vec![(0.0, u); elim_idx.len()],
                    Margin::Laplace => vec![(-u, u); elim_idx.len()],
                };
                let objective = |t: &[f64]| {
                    let mut point = full.clone();
                    for (s, &ix) in elim_idx.iter().enumerate() {
                        point[ix] = t[s];
                    }
                    model.eval_joint_raw(&point)
                };
                let m = minimize_box(&objective, &bounds, cfg)?;
                Ok(m.value.min(u))
            }
        }
    }

    /// The inner pair curve of a chain-composed marginal.
    pub(crate) fn chain(&self) -> Option<&Arc<ComposedCurve>> {
        match &self.inner.body {
            MarginalBody::Chain { curve } => Some(curve),
            _ => None,
        }
    }

    /// Wraps the marginal as a custom [`Gauge`] (e.g. for the axiom checker
    /// or for use as a clique gauge of another model).
    pub fn to_gauge(&self) -> Gauge {
        let me = self.clone();
        Gauge::custom(self.dimension(), self.inner.margin, move |x| {
            me.eval(x).unwrap_or(f64::NAN)
        })
        .expect("marginal dimensions are valid")
    }

    /// Samples points on the marginal's unit level set; see
    /// [`Model::sample_level_set`].
    pub fn sample_level_set(&self, n: usize) -> Vec<Vec<f64>> {
        level_set_points(self.dimension(), self.inner.margin, n, |w| {
            self.eval(w).unwrap_or(f64::NAN)
        })
    }
}

/// Numeric in-clique pair marginal for clique gauges with no analytic
/// bivariate reduction (custom multivariate gauges).
struct EliminatedPairCurve {
    gauge: Gauge,
    ia: usize,
    ib: usize,
    cfg: MinimizerConfig,
}

impl EliminatedPairCurve {
    fn pair_eval(&self, a: f64, b: f64) -> f64 {
        let dim = self.gauge.dimension();
        let mut full = vec![0.0f64; dim];
        full[self.ia] = a;
        full[self.ib] = b;
        let u = self.gauge.eval_raw(&full);
        if !(u > 0.0) {
            return u.max(0.0);
        }
        let others: Vec<usize> = (0..dim).filter(|&k| k != self.ia && k != self.ib).collect();
        let bounds: Vec<(f64, f64)> = match self.gauge.margin() {
            Margin::Exponential => vec![(0.0, u); others.len()],
            Margin::Laplace => vec![(-u, u); others.len()],
        };
        let objective = |t: &[f64]| {
            let mut point = full.clone();
            for (s, &ix) in others.iter().enumerate() {
                point[ix] = t[s];
            }
            self.gauge.eval_raw(&point)
        };
        match minimize_box(&objective, &bounds, &self.cfg) {
            Ok(m) => m.value.min(u),
            Err(_) => u,
        }
    }
}

impl PairCurve for EliminatedPairCurve {
    fn margin(&self) -> Margin {
        self.gauge.margin()
    }

    fn convex(&self) -> bool {
        false
    }

    fn eval2(&self, x1: f64, x2: f64) -> f64 {
        self.pair_eval(x1, x2)
    }

    fn excess(&self, s: Sign, y: f64) -> f64 {
        self.pair_eval(s.as_f64(), y) - 1.0
    }

    fn excess_floor(&self) -> f64 {
        // plain difference of an inner minimization: absolute noise only
        1e-9
    }

    fn known_alpha(&self, _s: Sign) -> Option<f64> {
        None
    }

    fn known_beta(&self) -> Option<f64> {
        None
    }
}
