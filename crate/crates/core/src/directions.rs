//! Geometric extreme directions and clique-level joint extremes.
//!
//! A subset `A` of vertices is an extreme direction when the joint gauge
//! reaches 1 at a witness vector with ones on `A` and off-`A` coordinates
//! strictly inside the unit box. The off-coordinates live in `[0, 1)`
//! (exponential) or `(-1, 1)` (Laplace); the interval is open at magnitude
//! 1, which is why a minimizer that runs into the clipped corner must be
//! re-checked on a strictly interior box before the subset is accepted.

use rayon::prelude::*;

use crate::coeffs::{alpha_vector, CoeffError};
use crate::curve::Sign;
use crate::gauge::{Gauge, GaugeKind, Margin};
use crate::model::{Model, ModelError};
use crate::numerics::{minimize_box, MinimizerConfig, NumericsError};

/// A subset is a direction when its witness gap is at most this.
pub const DIRECTION_GAP_TOL: f64 = 1e-4;
/// Off-coordinates are boxed at magnitude `1 - CORNER_SHRINK` (the
/// defining constraint is strict).
pub const CORNER_SHRINK: f64 = 1e-6;
/// A witness coordinate this close to the shrunken face counts as pinned.
const FACE_TOL: f64 = 1e-5;
/// Pinned coordinates are re-checked on a box shrunk to this margin; a
/// subset whose gap only closes in the corner limit is not a direction.
const FACE_RECHECK_CAP: f64 = 1e-3;
/// Hard cap for exhaustive subset enumeration.
pub const MAX_ENUMERATION_VERTICES: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum JointExtremesError {
    #[error("the vertex subset is empty")]
    EmptySubset,
    #[error("vertex {0} appears more than once in the subset")]
    DuplicateVertex(usize),
    #[error("{got} vertices exceed the enumeration cap of {max}")]
    DimensionTooLarge { got: usize, max: usize },
    #[error("the subset omits no path separator, so the obstruction bound is vacuous")]
    SeparatorsIncluded,
    #[error("clique {clique:?} has more than two vertices; the model is not a tree of edges")]
    NotATree { clique: Vec<usize> },
    #[error("clique {clique:?} does not carry an asymmetric AD gauge")]
    NotAllAsymmetricAd { clique: Vec<usize> },
    #[error("this operation requires {expected:?} margins; the model uses {got:?}")]
    WrongMargin { expected: Margin, got: Margin },
    #[error("eps {0} outside (0, 1)")]
    InvalidEps(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Outcome of testing one subset.
#[derive(Debug, Clone)]
pub struct DirectionReport {
    /// The tested subset, sorted ascending.
    pub subset: Vec<usize>,
    /// Minimizing witness over the full vertex set (ones on the subset),
    /// ordered like `graph().vertices()`.
    pub witness: Vec<f64>,
    /// `min g(z) - 1` over the witness box.
    pub gap: f64,
    pub is_direction: bool,
    /// Whether the corner re-check fired (a coordinate pinned at the box
    /// face); when true, `gap` is the re-checked interior value.
    pub face_pinned: bool,
}

/// Candidate directions read off the numeric alpha vectors.
#[derive(Debug, Clone)]
pub struct AlphaDirections {
    /// Deduplicated candidate subsets, lexicographically ordered.
    pub sets: Vec<Vec<usize>>,
    /// Set when some candidate equals the whole vertex set; the alpha route
    /// cannot distinguish finer structure in that case.
    pub possibly_incomplete: bool,
}

/// Both directions of the clique-level joint-extremes equivalence.
#[derive(Debug, Clone)]
pub struct CliqueEquivalence {
    pub joint_value: f64,
    /// Per-clique gauge values at the clique's all-ones vector, in
    /// `graph().cliques()` order.
    pub clique_values: Vec<f64>,
    /// all cliques at 1 implies joint at 1.
    pub forward: bool,
    /// joint at 1 implies all cliques at 1.
    pub backward: bool,
}

/// Effective parameters of the closed-form pairwise marginal on an
/// all-AD-edge tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeAdMarginal {
    pub theta_eff: f64,
    pub gamma_eff: f64,
}

impl TreeAdMarginal {
    /// The induced bivariate gauge with the effective parameters.
    pub fn induced_gauge(&self) -> Gauge {
        Gauge::asymmetric_ad(self.theta_eff, self.gamma_eff)
            .expect("effective parameters stay within the open unit interval")
    }
}

fn sorted_subset(m: &Model, a: &[usize]) -> Result<Vec<usize>, JointExtremesError> {
    if a.is_empty() {
        return Err(JointExtremesError::EmptySubset);
    }
    let mut s = a.to_vec();
    s.sort_unstable();
    for w in s.windows(2) {
        if w[0] == w[1] {
            return Err(JointExtremesError::DuplicateVertex(w[0]));
        }
    }
    for &v in &s {
        if m.graph().vertex_index(v).is_none() {
            return Err(JointExtremesError::Model(ModelError::UnknownVertex(v)));
        }
    }
    Ok(s)
}

/// Tests whether `a` is a geometric extreme direction of the model.
pub fn is_direction(
    m: &Model,
    a: &[usize],
    cfg: &MinimizerConfig,
) -> Result<DirectionReport, JointExtremesError> {
    cfg.validate()?;
    let subset = sorted_subset(m, a)?;
    let d = m.vertex_count();
    let mut on = vec![false; d];
    for &v in &subset {
        on[m.graph().vertex_index(v).expect("validated")] = true;
    }
    let off: Vec<usize> = (0..d).filter(|&k| !on[k]).collect();

    let mut witness = vec![1.0f64; d];
    if off.is_empty() {
        let gap = m.eval_joint_raw(&witness) - 1.0;
        return Ok(DirectionReport {
            subset,
            witness,
            gap,
            is_direction: gap <= DIRECTION_GAP_TOL,
            face_pinned: false,
        });
    }

    let objective = |g: &[f64]| {
        let mut x = vec![1.0f64; d];
        for (t, &k) in off.iter().enumerate() {
            x[k] = g[t];
        }
        m.eval_joint_raw(&x)
    };
    let cap = 1.0 - CORNER_SHRINK;
    let bounds: Vec<(f64, f64)> = match m.margin() {
        Margin::Exponential => vec![(0.0, cap); off.len()],
        Margin::Laplace => vec![(-cap, cap); off.len()],
    };
    let m0 = minimize_box(&objective, &bounds, cfg)?;
    let mut gap = m0.value - 1.0;
    let mut arg = m0.point;
    let mut face_pinned = false;

    if gap <= DIRECTION_GAP_TOL {
        // Corner re-check: a gap that only closes as an off-coordinate tends
        // to magnitude 1 does not certify the subset (the constraint is
        // strict there). Exponential margins pin at the upper face only; the
        // lower face 0 is legitimately inside the domain.
        let pinned: Vec<usize> = (0..off.len())
            .filter(|&t| {
                let v = arg[t];
                (cap - v).abs() <= FACE_TOL
                    || (m.margin() == Margin::Laplace && (v + cap).abs() <= FACE_TOL)
            })
            .collect();
        if !pinned.is_empty() {
            face_pinned = true;
            let inner = 1.0 - FACE_RECHECK_CAP;
            let mut bounds2 = bounds;
            for &t in &pinned {
                bounds2[t].1 = inner;
                if m.margin() == Margin::Laplace {
                    bounds2[t].0 = -inner;
                }
            }
            let m1 = minimize_box(&objective, &bounds2, cfg)?;
            gap = m1.value - 1.0;
            arg = m1.point;
        }
    }

    for (t, &k) in off.iter().enumerate() {
        witness[k] = arg[t];
    }
    Ok(DirectionReport { subset, witness, gap, is_direction: gap <= DIRECTION_GAP_TOL, face_pinned })
}

/// Exhaustively tests every nonempty subset and returns the directions, in
/// canonical (ascending bitmask) order.
pub fn enumerate_directions(
    m: &Model,
    cfg: &MinimizerConfig,
) -> Result<Vec<DirectionReport>, JointExtremesError> {
    let d = m.vertex_count();
    if d > MAX_ENUMERATION_VERTICES {
        return Err(JointExtremesError::DimensionTooLarge {
            got: d,
            max: MAX_ENUMERATION_VERTICES,
        });
    }
    let labels = m.graph().vertices();
    let reports: Vec<Option<DirectionReport>> = (1u32..(1u32 << d))
        .into_par_iter()
        .map(|mask| {
            let subset: Vec<usize> =
                (0..d).filter(|k| mask & (1 << k) != 0).map(|k| labels[k]).collect();
            is_direction(m, &subset, cfg).map(|r| if r.is_direction { Some(r) } else { None })
        })
        .collect::<Result<_, _>>()?;
    Ok(reports.into_iter().flatten().collect())
}

/// Builds candidate directions from the numeric alpha vectors: for each
/// vertex `i`, the set of vertices whose alpha against `i` equals 1.
pub fn directions_from_alphas(
    m: &Model,
    cfg: &MinimizerConfig,
) -> Result<AlphaDirections, JointExtremesError> {
    if m.margin() != Margin::Exponential {
        return Err(JointExtremesError::WrongMargin {
            expected: Margin::Exponential,
            got: m.margin(),
        });
    }
    let labels = m.graph().vertices();
    let d = labels.len();
    let mut sets = std::collections::BTreeSet::<Vec<usize>>::new();
    for &i in labels {
        let alphas = alpha_vector(m, i, Sign::Plus, cfg)?;
        let others = labels.iter().copied().filter(|&v| v != i);
        let mut a: Vec<usize> = others
            .zip(&alphas)
            .filter(|(_, r)| (r.value - 1.0).abs() <= DIRECTION_GAP_TOL)
            .map(|(v, _)| v)
            .collect();
        a.push(i);
        a.sort_unstable();
        sets.insert(a);
    }
    let possibly_incomplete = sets.iter().any(|s| s.len() == d);
    Ok(AlphaDirections { sets: sets.into_iter().collect(), possibly_incomplete })
}

/// Evaluates both directions of the equivalence: the joint gauge is 1 at
/// the all-ones vector exactly when every clique gauge is 1 at its own
/// all-ones vector. Both implications hold for admissible gauges; a failure
/// flags an inadmissible custom clique.
pub fn check_clique_equivalence(m: &Model, tol: f64) -> CliqueEquivalence {
    let joint_value = m.eval_joint_raw(&vec![1.0; m.vertex_count()]);
    let clique_values: Vec<f64> = m
        .graph()
        .cliques()
        .iter()
        .zip(m.gauges())
        .map(|(c, g)| g.eval_raw(&vec![1.0; c.len()]))
        .collect();
    let all_cliques_one = clique_values.iter().all(|v| (v - 1.0).abs() <= tol);
    let joint_one = (joint_value - 1.0).abs() <= tol;
    CliqueEquivalence {
        joint_value,
        clique_values,
        forward: !all_cliques_one || joint_one,
        backward: !joint_one || all_cliques_one,
    }
}

/// Quantitative separator obstruction: when `a` spans several cliques but
/// omits a separator on some connecting path, the gauge stays at least
/// `eps` above 1 whenever the omitted separator coordinates are capped at
/// `1 - eps`. Returns that minimum gap.
pub fn separator_gap(m: &Model, a: &[usize], eps: f64) -> Result<f64, JointExtremesError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(JointExtremesError::InvalidEps(eps));
    }
    let subset = sorted_subset(m, a)?;
    let d = m.vertex_count();
    let mut on = vec![false; d];
    for &v in &subset {
        on[m.graph().vertex_index(v).expect("validated")] = true;
    }

    // Omitted separators: interior vertices of paths between subset members
    // that are not themselves in the subset.
    let mut omitted = vec![false; d];
    let mut any_omitted = false;
    for (s, &va) in subset.iter().enumerate() {
        for &vb in &subset[s + 1..] {
            let path = m.graph().shortest_path(va, vb)?;
            for &v in path.interior() {
                let ix = m.graph().vertex_index(v).expect("path vertex");
                if !on[ix] && !omitted[ix] {
                    omitted[ix] = true;
                    any_omitted = true;
                }
            }
        }
    }
    if !any_omitted {
        return Err(JointExtremesError::SeparatorsIncluded);
    }

    let off: Vec<usize> = (0..d).filter(|&k| !on[k]).collect();
    let bounds: Vec<(f64, f64)> = off
        .iter()
        .map(|&k| {
            let cap = if omitted[k] { 1.0 - eps } else { 1.0 - CORNER_SHRINK };
            match m.margin() {
                Margin::Exponential => (0.0, cap),
                Margin::Laplace => (-cap, cap),
            }
        })
        .collect();
    let objective = |g: &[f64]| {
        let mut x = vec![1.0f64; d];
        for (t, &k) in off.iter().enumerate() {
            x[k] = g[t];
        }
        m.eval_joint_raw(&x)
    };
    let m0 = minimize_box(&objective, &bounds, &MinimizerConfig::default())?;
    Ok(m0.value - 1.0)
}

/// Closed-form pairwise marginal parameters on a tree whose edges all carry
/// asymmetric AD gauges: the effective `(theta, gamma)` are the maxima of
/// the orientation-adjusted edge parameters along the path.
pub fn tree_ad_marginal(
    m: &Model,
    k: usize,
    l: usize,
) -> Result<TreeAdMarginal, JointExtremesError> {
    if m.margin() != Margin::Exponential {
        return Err(JointExtremesError::WrongMargin {
            expected: Margin::Exponential,
            got: m.margin(),
        });
    }
    for (clique, gauge) in m.graph().cliques().iter().zip(m.gauges()) {
        if clique.len() != 2 {
            return Err(JointExtremesError::NotATree { clique: clique.clone() });
        }
        if !matches!(gauge.kind(), GaugeKind::AsymmetricAd { .. }) {
            return Err(JointExtremesError::NotAllAsymmetricAd { clique: clique.clone() });
        }
    }
    let edges = m.graph().chain_reduction(k, l).map_err(ModelError::Graph)?;
    let mut theta_eff = 0.0f64;
    let mut gamma_eff = 0.0f64;
    for (u, v) in edges {
        let kc = m.graph().clique_containing(u, v).expect("path edge lies in a clique");
        let clique = &m.graph().cliques()[kc];
        let (theta, gamma) = match m.gauges()[kc].kind() {
            GaugeKind::AsymmetricAd { theta, gamma } => (*theta, *gamma),
            _ => unreachable!("checked above"),
        };
        // walking against the stored orientation swaps the two roles
        let (t_or, g_or) = if clique[0] == u { (theta, gamma) } else { (gamma, theta) };
        theta_eff = theta_eff.max(t_or);
        gamma_eff = gamma_eff.max(g_or);
    }
    Ok(TreeAdMarginal { theta_eff, gamma_eff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Gauge;

    fn cfg() -> MinimizerConfig {
        MinimizerConfig::default()
    }

    fn example3() -> Model {
        Model::from_cliques(
            &[vec![1, 2], vec![2, 3]],
            vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::gaussian_exp(0.6).unwrap()],
            Margin::Exponential,
        )
        .unwrap()
    }

    #[test]
    fn example3_direction_set() {
        let m = example3();
        let dirs = enumerate_directions(&m, &cfg()).unwrap();
        let sets: Vec<Vec<usize>> = dirs.iter().map(|r| r.subset.clone()).collect();
        assert_eq!(sets, vec![vec![1, 2], vec![3]], "direction sets: {sets:?}");

        // witnesses: (1, 1, 0.36) and (0.36, 0.36, 1)
        let w12 = &dirs[0].witness;
        assert!((w12[0] - 1.0).abs() <= 1e-9 && (w12[1] - 1.0).abs() <= 1e-9);
        assert!((w12[2] - 0.36).abs() <= 1e-3, "witness gamma: {}", w12[2]);
        let w3 = &dirs[1].witness;
        assert!((w3[0] - 0.36).abs() <= 1e-3 && (w3[1] - 0.36).abs() <= 1e-3);
        assert!((w3[2] - 1.0).abs() <= 1e-9);

        // every vertex is represented in at least one direction
        let mut covered: Vec<usize> = sets.concat();
        covered.sort_unstable();
        covered.dedup();
        assert_eq!(covered, vec![1, 2, 3]);
    }

    #[test]
    fn corner_limit_subsets_are_rejected() {
        let m = example3();
        // {1}: the gap closes only as gamma_2 -> 1, which the strict
        // constraint excludes; the re-check must catch it
        let r = is_direction(&m, &[1], &cfg()).unwrap();
        assert!(!r.is_direction, "gap {} face_pinned {}", r.gap, r.face_pinned);
        assert!(r.face_pinned);
        assert!(r.gap > DIRECTION_GAP_TOL);

        // {1,3}: plainly blocked (the separator 2 cannot reach 1)
        let r13 = is_direction(&m, &[1, 3], &cfg()).unwrap();
        assert!(!r13.is_direction);
        assert!(r13.gap > 0.2, "gap {}", r13.gap);
    }

    #[test]
    fn inverted_logistic_pair_splits() {
        let m = Model::from_cliques(
            &[vec![1, 2]],
            vec![Gauge::inverted_logistic(2, 0.5).unwrap()],
            Margin::Exponential,
        )
        .unwrap();
        let dirs = enumerate_directions(&m, &cfg()).unwrap();
        let sets: Vec<Vec<usize>> = dirs.iter().map(|r| r.subset.clone()).collect();
        assert_eq!(sets, vec![vec![1], vec![2]]);
        assert!((dirs[0].witness[1]).abs() <= 1e-6, "witness (1, 0)");
    }

    #[test]
    fn all_logistic_chain_has_only_the_full_direction() {
        let m = Model::from_cliques(
            &[vec![1, 2], vec![2, 3]],
            vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::logistic(2, 0.7).unwrap()],
            Margin::Exponential,
        )
        .unwrap();
        let dirs = enumerate_directions(&m, &cfg()).unwrap();
        let sets: Vec<Vec<usize>> = dirs.iter().map(|r| r.subset.clone()).collect();
        assert_eq!(sets, vec![vec![1, 2, 3]]);
        assert!(dirs[0].gap.abs() <= 1e-9, "exact contact at the all-ones vector");
    }

    #[test]
    fn subset_validation_errors() {
        let m = example3();
        assert!(matches!(is_direction(&m, &[], &cfg()), Err(JointExtremesError::EmptySubset)));
        assert!(matches!(
            is_direction(&m, &[1, 1], &cfg()),
            Err(JointExtremesError::DuplicateVertex(1))
        ));
        assert!(matches!(
            is_direction(&m, &[9], &cfg()),
            Err(JointExtremesError::Model(ModelError::UnknownVertex(9)))
        ));
    }

    #[test]
    fn alpha_candidates_match_enumeration() {
        let m = example3();
        let cand = directions_from_alphas(&m, &cfg()).unwrap();
        assert_eq!(cand.sets, vec![vec![1, 2], vec![3]]);
        assert!(!cand.possibly_incomplete);

        let all_log = Model::from_cliques(
            &[vec![1, 2], vec![2, 3]],
            vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::logistic(2, 0.7).unwrap()],
            Margin::Exponential,
        )
        .unwrap();
        let cand2 = directions_from_alphas(&all_log, &cfg()).unwrap();
        assert_eq!(cand2.sets, vec![vec![1, 2, 3]]);
        assert!(cand2.possibly_incomplete);
    }

    #[test]
    fn clique_equivalence_report() {
        let ad = Model::from_cliques(
            &[vec![1, 2], vec![2, 3]],
            vec![
                Gauge::asymmetric_ad(0.3, 0.4).unwrap(),
                Gauge::asymmetric_ad(0.5, 0.2).unwrap(),
            ],
            Margin::Exponential,
        )
        .unwrap();
        let r = check_clique_equivalence(&ad, 1e-9);
        assert!(r.forward && r.backward);
        assert!((r.joint_value - 1.0).abs() <= 1e-12);

        // a gaussian clique pushes both sides above 1 together
        let mixed = example3();
        let r2 = check_clique_equivalence(&mixed, 1e-9);
        assert!(r2.forward && r2.backward);
        assert!((r2.joint_value - 1.25).abs() <= 1e-12, "joint {}", r2.joint_value);
        assert!((r2.clique_values[1] - 1.25).abs() <= 1e-12);
    }

    #[test]
    fn separator_gap_bound() {
        let m = Model::from_cliques(
            &[vec![1, 2, 3], vec![3, 4, 5]],
            vec![Gauge::logistic(3, 0.4).unwrap(), Gauge::logistic(3, 0.6).unwrap()],
            Margin::Exponential,
        )
        .unwrap();
        for eps in [1e-1, 1e-2, 1e-3] {
            let gap = separator_gap(&m, &[1, 5], eps).unwrap();
            assert!(gap >= eps - 1e-6, "eps {eps}: gap {gap:.3e}");
        }
        assert!(matches!(
            separator_gap(&m, &[1, 3, 5], 1e-3),
            Err(JointExtremesError::SeparatorsIncluded)
        ));
        assert!(matches!(
            separator_gap(&m, &[1, 5], 0.0),
            Err(JointExtremesError::InvalidEps(_))
        ));
    }

    #[test]
    fn tree_ad_effective_parameters() {
        let m = Model::from_cliques(
            &[vec![1, 2], vec![2, 3]],
            vec![
                Gauge::asymmetric_ad(0.3, 0.4).unwrap(),
                Gauge::asymmetric_ad(0.5, 0.2).unwrap(),
            ],
            Margin::Exponential,
        )
        .unwrap();
        let fwd = tree_ad_marginal(&m, 1, 3).unwrap();
        assert_eq!(fwd, TreeAdMarginal { theta_eff: 0.5, gamma_eff: 0.4 });
        // walking backwards swaps every edge's roles
        let bwd = tree_ad_marginal(&m, 3, 1).unwrap();
        assert_eq!(bwd, TreeAdMarginal { theta_eff: 0.4, gamma_eff: 0.5 });
        // single edge: its own parameters
        let single = tree_ad_marginal(&m, 1, 2).unwrap();
        assert_eq!(single, TreeAdMarginal { theta_eff: 0.3, gamma_eff: 0.4 });
    }

    #[test]
    fn tree_ad_marginal_matches_numeric_composition() {
        let m = Model::from_cliques(
            &[vec![1, 2], vec![2, 3], vec![3, 4]],
            vec![
                Gauge::asymmetric_ad(0.3, 0.4).unwrap(),
                Gauge::asymmetric_ad(0.5, 0.2).unwrap(),
                Gauge::asymmetric_ad(0.35, 0.45).unwrap(),
            ],
            Margin::Exponential,
        )
        .unwrap();
        let eff = tree_ad_marginal(&m, 1, 4).unwrap();
        assert_eq!(eff, TreeAdMarginal { theta_eff: 0.5, gamma_eff: 0.45 });
        let induced = eff.induced_gauge();
        let pm = m.pairwise_marginal(1, 4, &MinimizerConfig::default()).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=7 {
            for j in 0..=7 {
                let x = [i as f64 / 7.0, j as f64 / 7.0];
                let a = induced.eval(&x).unwrap();
                let b = pm.eval(&x).unwrap();
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= 1e-3, "sup deviation {worst:.3e}");
    }

    #[test]
    fn tree_ad_checks_shape_and_margin() {
        let not_tree = Model::from_cliques(
            &[vec![1, 2, 3]],
            vec![Gauge::logistic(3, 0.4).unwrap()],
            Margin::Exponential,
        )
        .unwrap();
        assert!(matches!(
            tree_ad_marginal(&not_tree, 1, 3),
            Err(JointExtremesError::NotATree { .. })
        ));

        let not_ad = Model::from_cliques(
            &[vec![1, 2]],
            vec![Gauge::logistic(2, 0.4).unwrap()],
            Margin::Exponential,
        )
        .unwrap();
        assert!(matches!(
            tree_ad_marginal(&not_ad, 1, 2),
            Err(JointExtremesError::NotAllAsymmetricAd { .. })
        ));
    }
}
