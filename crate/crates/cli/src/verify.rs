//! The invariant suite behind `verify`: gauge axioms for every clique and
//! for the assembled joint, level-set residuals, recurrence-versus-numeric
//! coefficient agreement on all vertex pairs, marginal-gauge axioms,
//! separator gap bounds, and direction coverage.

use gauge_graph::{
    alpha_path, alpha_path_signed, beta_path, check_clique_equivalence, check_gauge_axioms,
    directions_from_alphas, edge_alpha_marginal, edge_beta_marginal, enumerate_directions,
    is_direction, separator_gap, tree_ad_marginal, Gauge, GaugeKind, Margin, MinimizerConfig,
    Sign, SlopeFitConfig, COMPOSED_EXCESS_FLOOR,
};
use rayon::prelude::*;

use crate::modelfile::LabeledModel;
use crate::report::{CheckEntry, VerifyReport};

/// Rays per axiom check on closed-form gauges.
const CLIQUE_RAYS: usize = 1000;
/// Axiom tolerance for closed-form clique gauges.
const CLIQUE_TOL: f64 = 1e-9;
/// Axiom tolerance for composed and marginal gauges, which accumulate
/// minimization noise.
const COMPOSED_TOL: f64 = 1e-6;
/// Agreement bound between the alpha recurrence and the numeric oracle.
const ALPHA_TOL: f64 = 1e-3;
/// Agreement bound between the beta recurrence and the slope-fit oracle.
const BETA_TOL: f64 = 0.05;
/// Direction enumeration is exponential in the vertex count; larger models
/// skip that check rather than stall the suite.
const DIRECTION_BUDGET: usize = 6;

/// Runs every check and aggregates the report.
pub fn verify_model(m: &LabeledModel) -> VerifyReport {
    let checks = vec![
        clique_gauge_axioms(m),
        joint_gauge_axioms(m),
        level_set_residuals(m),
        clique_equivalence(m),
        alpha_recurrence_vs_numeric(m),
        beta_recurrence_vs_numeric(m),
        marginal_gauge_axioms(m),
        separator_gaps(m),
        direction_coverage(m),
        tree_ad_closed_form(m),
    ];
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport { checks, pass }
}

fn clique_gauge_axioms(m: &LabeledModel) -> CheckEntry {
    let mut worst_hom = 0.0f64;
    let mut worst_dom = 0.0f64;
    let mut pass = true;
    for g in m.model.gauges() {
        let r = check_gauge_axioms(g, CLIQUE_RAYS, CLIQUE_TOL);
        worst_hom = worst_hom.max(r.max_homogeneity_defect);
        worst_dom = worst_dom.max(r.max_lower_bound_violation);
        pass &= r.pass;
    }
    CheckEntry {
        detail: format!(
            "{} clique gauges, {CLIQUE_RAYS} rays each: max homogeneity defect {worst_hom:.2e}, \
             max sup-norm violation {worst_dom:.2e} (tol {CLIQUE_TOL:.0e})",
            m.model.gauges().len()
        ),
        name: "clique_gauge_axioms",
        pass,
    }
}

fn joint_gauge_axioms(m: &LabeledModel) -> CheckEntry {
    let model = m.model.clone();
    let d = model.vertex_count();
    let joint = Gauge::custom(d, m.margin(), move |x| {
        model.eval_joint(x).unwrap_or(f64::NAN)
    })
    .expect("joint wrapper is well-formed");
    let r = check_gauge_axioms(&joint, CLIQUE_RAYS, COMPOSED_TOL);
    CheckEntry {
        detail: format!(
            "joint gauge, {CLIQUE_RAYS} rays: max homogeneity defect {:.2e}, max sup-norm \
             violation {:.2e} (tol {COMPOSED_TOL:.0e})",
            r.max_homogeneity_defect, r.max_lower_bound_violation
        ),
        name: "joint_gauge_axioms",
        pass: r.pass,
    }
}

fn level_set_residuals(m: &LabeledModel) -> CheckEntry {
    const N: usize = 200;
    const TOL: f64 = 1e-9;
    let pts = m.model.sample_level_set(N);
    let mut worst = 0.0f64;
    for p in &pts {
        match m.model.eval_joint(p) {
            Ok(v) => worst = worst.max((v - 1.0).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckEntry {
        detail: format!("max |g - 1| = {worst:.2e} over {} boundary points (tol {TOL:.0e})", pts.len()),
        name: "level_set_residuals",
        pass: worst <= TOL,
    }
}

fn clique_equivalence(m: &LabeledModel) -> CheckEntry {
    let eq = check_clique_equivalence(&m.model, CLIQUE_TOL);
    CheckEntry {
        detail: format!(
            "joint value {:.12} at the all-ones vector; forward {} / backward {}",
            eq.joint_value, eq.forward, eq.backward
        ),
        name: "clique_equivalence",
        pass: eq.forward && eq.backward,
    }
}

/// All ordered vertex pairs, in deterministic (i, j) order.
fn ordered_pairs(m: &LabeledModel) -> Vec<(usize, usize)> {
    let vs = m.model.graph().vertices();
    let mut pairs = Vec::new();
    for &i in vs {
        for &j in vs {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Attainable resolution of the numeric contact search on a composed pair:
/// it bisects the edge of the sublevel set `{excess <= 8 * floor}`, and an
/// excess growing like `c * y^sigma` near the contact puts that edge at
/// `(8 * floor / c)^(1/sigma) = (8 * floor / c)^(1 - beta)`. The factor 3
/// covers growth constants `c` well below 1.
fn alpha_resolution(beta: f64) -> f64 {
    3.0 * (8.0 * COMPOSED_EXCESS_FLOOR).powf(1.0 - beta)
}

fn alpha_recurrence_vs_numeric(m: &LabeledModel) -> CheckEntry {
    let cfg = MinimizerConfig::default();
    let pairs = ordered_pairs(m);
    let results: Vec<Result<(f64, f64), String>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let rec = match m.margin() {
                Margin::Exponential => alpha_path(&m.model, i, j),
                Margin::Laplace => alpha_path_signed(&m.model, i, j),
            }
            .map_err(|e| e.to_string())?;
            let mg = m.model.pairwise_marginal(i, j, &cfg).map_err(|e| e.to_string())?;
            let num = edge_alpha_marginal(&mg, Sign::Plus, &cfg).map_err(|e| e.to_string())?;
            // flat contacts (large beta) dilute the numeric resolution; the
            // recurrence beta supplies the growth exponent where it exists
            let bound = match m.margin() {
                Margin::Exponential => {
                    let beta = beta_path(&m.model, i, j).map_err(|e| e.to_string())?;
                    ALPHA_TOL.max(alpha_resolution(beta.value))
                }
                Margin::Laplace => ALPHA_TOL,
            };
            Ok(((rec.value - num.value).abs(), bound))
        })
        .collect();
    let mut worst_dev = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok((dev, bound)) => {
                worst_dev = worst_dev.max(*dev);
                worst_ratio = worst_ratio.max(dev / bound);
            }
            Err(e) => {
                let (i, j) = pairs[k];
                return CheckEntry {
                    detail: format!("pair ({}, {}): {e}", m.label_of(i), m.label_of(j)),
                    name: "alpha_recurrence_vs_numeric",
                    pass: false,
                };
            }
        }
    }
    CheckEntry {
        detail: format!(
            "max |recurrence - numeric| = {worst_dev:.2e} over {} ordered pairs; worst \
             deviation-to-bound ratio {worst_ratio:.2} (base tol {ALPHA_TOL:.0e}, widened per \
             pair for flat contacts)",
            pairs.len()
        ),
        name: "alpha_recurrence_vs_numeric",
        pass: worst_ratio <= 1.0,
    }
}

fn beta_recurrence_vs_numeric(m: &LabeledModel) -> CheckEntry {
    if m.margin() == Margin::Laplace {
        return CheckEntry {
            detail: "skipped: scale coefficients are undefined under Laplace margins".into(),
            name: "beta_recurrence_vs_numeric",
            pass: true,
        };
    }
    let cfg = MinimizerConfig::default();
    // Wider window and denser sampling than the defaults: a flat composed
    // excess (sigma up to ~5) only clears the curve's noise floor near the
    // top of the fit range, and the fit needs enough surviving points.
    let fit_cfg = SlopeFitConfig { x_max: 3e-2, points: 40, ..SlopeFitConfig::default() };
    let results: Vec<Result<f64, String>> = ordered_pairs(m)
        .par_iter()
        .map(|&(i, j)| {
            let rec = beta_path(&m.model, i, j).map_err(|e| e.to_string())?;
            let alpha = alpha_path(&m.model, i, j).map_err(|e| e.to_string())?;
            let mg = m.model.pairwise_marginal(i, j, &cfg).map_err(|e| e.to_string())?;
            let num = edge_beta_marginal(&mg, alpha.value, &fit_cfg).map_err(|e| e.to_string())?;
            Ok((rec.value - num.value).abs())
        })
        .collect();
    summarize_pairs(m, results, BETA_TOL, "beta_recurrence_vs_numeric")
}

/// Folds per-pair deviations (or errors) into one check entry.
fn summarize_pairs(
    m: &LabeledModel,
    results: Vec<Result<f64, String>>,
    tol: f64,
    name: &'static str,
) -> CheckEntry {
    let pairs = ordered_pairs(m);
    let mut worst = 0.0f64;
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(d) => worst = worst.max(*d),
            Err(e) => {
                let (i, j) = pairs[k];
                return CheckEntry {
                    detail: format!("pair ({}, {}): {e}", m.label_of(i), m.label_of(j)),
                    name,
                    pass: false,
                };
            }
        }
    }
    CheckEntry {
        detail: format!(
            "max |recurrence - numeric| = {worst:.2e} over {} ordered pairs (tol {tol:.0e})",
            results.len()
        ),
        name,
        pass: worst <= tol,
    }
}

fn marginal_gauge_axioms(m: &LabeledModel) -> CheckEntry {
    const RAYS: usize = 200;
    let cfg = MinimizerConfig::default();
    let vs = m.model.graph().vertices();
    let mut pairs = Vec::new();
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            pairs.push((i, j));
        }
    }
    let reports: Vec<Result<(f64, f64, bool), String>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mg = m.model.pairwise_marginal(i, j, &cfg).map_err(|e| e.to_string())?;
            let r = check_gauge_axioms(&mg.to_gauge(), RAYS, COMPOSED_TOL);
            Ok((r.max_homogeneity_defect, r.max_lower_bound_violation, r.pass))
        })
        .collect();
    let mut worst_hom = 0.0f64;
    let mut worst_dom = 0.0f64;
    let mut pass = true;
    for (k, r) in reports.iter().enumerate() {
        match r {
            Ok((h, d, p)) => {
                worst_hom = worst_hom.max(*h);
                worst_dom = worst_dom.max(*d);
                pass &= p;
            }
            Err(e) => {
                let (i, j) = pairs[k];
                return CheckEntry {
                    detail: format!("pair ({}, {}): {e}", m.label_of(i), m.label_of(j)),
                    name: "marginal_gauge_axioms",
                    pass: false,
                };
            }
        }
    }
    CheckEntry {
        detail: format!(
            "{} pairwise marginals, {RAYS} rays each: max homogeneity defect {worst_hom:.2e}, \
             max sup-norm violation {worst_dom:.2e} (tol {COMPOSED_TOL:.0e})",
            pairs.len()
        ),
        name: "marginal_gauge_axioms",
        pass,
    }
}

fn separator_gaps(m: &LabeledModel) -> CheckEntry {
    const EPS: f64 = 1e-3;
    const SLACK: f64 = 1e-6;
    let seps = m.model.graph().separators();
    if seps.is_empty() {
        return CheckEntry {
            detail: "skipped: single clique, no separators".into(),
            name: "separator_gap",
            pass: true,
        };
    }
    let mut worst = f64::INFINITY;
    for &s in seps {
        // one vertex from each side of the separator, omitting it
        let sides: Vec<&Vec<usize>> =
            m.model.graph().cliques().iter().filter(|c| c.contains(&s)).take(2).collect();
        let pick = |c: &[usize]| c.iter().copied().filter(|&v| v != s).min();
        let (u, v) = match (pick(sides[0]), pick(sides[1])) {
            (Some(u), Some(v)) => (u, v),
            _ => continue,
        };
        match separator_gap(&m.model, &[u, v], EPS) {
            Ok(gap) => worst = worst.min(gap),
            Err(e) => {
                return CheckEntry {
                    detail: format!("separator {}: {e}", m.label_of(s)),
                    name: "separator_gap",
                    pass: false,
                }
            }
        }
    }
    CheckEntry {
        detail: format!(
            "min gap {worst:.6e} over {} separators at eps {EPS:.0e} (bound {:.6e})",
            seps.len(),
            EPS - SLACK
        ),
        name: "separator_gap",
        pass: worst >= EPS - SLACK,
    }
}

fn direction_coverage(m: &LabeledModel) -> CheckEntry {
    let d = m.model.vertex_count();
    if d > DIRECTION_BUDGET {
        return CheckEntry {
            detail: format!("skipped: {d} vertices exceed the {DIRECTION_BUDGET}-vertex enumeration budget"),
            name: "direction_coverage",
            pass: true,
        };
    }
    let cfg = MinimizerConfig::default();
    let dirs = match enumerate_directions(&m.model, &cfg) {
        Ok(d) => d,
        Err(e) => {
            return CheckEntry { detail: e.to_string(), name: "direction_coverage", pass: false }
        }
    };
    let mut covered = vec![false; d];
    for r in &dirs {
        for &v in &r.subset {
            let ix = m.model.graph().vertex_index(v).expect("report vertex exists");
            covered[ix] = true;
        }
    }
    let coverage_ok = covered.iter().all(|&c| c);

    if m.margin() == Margin::Laplace {
        return CheckEntry {
            detail: format!(
                "{} directions cover {}/{d} vertices; alpha candidates skipped under Laplace \
                 margins",
                dirs.len(),
                covered.iter().filter(|&&c| c).count()
            ),
            name: "direction_coverage",
            pass: coverage_ok,
        };
    }

    let af = match directions_from_alphas(&m.model, &cfg) {
        Ok(af) => af,
        Err(e) => {
            return CheckEntry { detail: e.to_string(), name: "direction_coverage", pass: false }
        }
    };
    let mut confirmed = 0usize;
    for set in &af.sets {
        match is_direction(&m.model, set, &cfg) {
            Ok(r) if r.is_direction => confirmed += 1,
            Ok(_) | Err(_) => {}
        }
    }
    let upward_ok = confirmed == af.sets.len();
    CheckEntry {
        detail: format!(
            "{} directions cover {}/{d} vertices; {confirmed}/{} alpha candidates confirmed",
            dirs.len(),
            covered.iter().filter(|&&c| c).count(),
            af.sets.len()
        ),
        name: "direction_coverage",
        pass: coverage_ok && upward_ok,
    }
}

fn tree_ad_closed_form(m: &LabeledModel) -> CheckEntry {
    const TOL: f64 = 1e-3;
    const GRID: usize = 21;
    let all_ad = m.model.graph().cliques().iter().all(|c| c.len() == 2)
        && m.model.gauges().iter().all(|g| matches!(g.kind(), GaugeKind::AsymmetricAd { .. }))
        && m.margin() == Margin::Exponential;
    if !all_ad {
        return CheckEntry {
            detail: "skipped: not an all-AD tree under exponential margins".into(),
            name: "tree_ad_closed_form",
            pass: true,
        };
    }
    let cfg = MinimizerConfig::default();
    let vs = m.model.graph().vertices();
    let axis: Vec<f64> = (0..GRID).map(|k| k as f64 / (GRID - 1) as f64).collect();
    let mut worst = 0.0f64;
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            let closed = match tree_ad_marginal(&m.model, i, j) {
                Ok(t) => t.induced_gauge(),
                Err(e) => {
                    return CheckEntry {
                        detail: format!("pair ({}, {}): {e}", m.label_of(i), m.label_of(j)),
                        name: "tree_ad_closed_form",
                        pass: false,
                    }
                }
            };
            let mg = match m.model.pairwise_marginal(i, j, &cfg) {
                Ok(mg) => mg,
                Err(e) => {
                    return CheckEntry {
                        detail: format!("pair ({}, {}): {e}", m.label_of(i), m.label_of(j)),
                        name: "tree_ad_closed_form",
                        pass: false,
                    }
                }
            };
            for &x in &axis {
                for &y in &axis {
                    let c = closed.eval(&[x, y]).unwrap_or(f64::NAN);
                    let n = mg.eval(&[x, y]).unwrap_or(f64::NAN);
                    let dev = (c - n).abs();
                    if !(dev <= worst) {
                        worst = dev;
                    }
                }
            }
        }
    }
    CheckEntry {
        detail: format!(
            "max |closed - numeric| = {worst:.2e} on the {GRID}x{GRID} grid over all pairs \
             (tol {TOL:.0e})",
            ),
        name: "tree_ad_closed_form",
        pass: worst <= TOL,
    }
}
