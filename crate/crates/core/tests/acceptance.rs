//! Acceptance gate: one test per release criterion, each printing a single
//! machine-greppable `[acceptance]` line. Tolerances are pinned here, not
//! configurable, so a regression cannot be hidden by loosening a knob.

use std::time::{Duration, Instant};

use gauge_graph::{
    alpha_path, alpha_path_signed, beta_path, build_block_graph, check_gauge_axioms,
    directions_from_alphas, edge_alpha, edge_alpha_marginal, edge_beta, edge_beta_marginal,
    enumerate_directions, separator_gap, tree_ad_marginal, assemble_model, Gauge, Margin,
    MinimizerConfig, Model, Sign, SlopeFitConfig,
};
use rand_core::{RngCore, SeedableRng};

fn unit(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Prints the per-criterion verdict line and enforces it plus the runtime
/// budget (when the criterion pins one).
fn conclude(n: usize, label: &str, failures: &[String], t0: Instant, budget: Option<Duration>) {
    let elapsed = t0.elapsed();
    let ok = failures.is_empty() && budget.map_or(true, |b| elapsed <= b);
    println!(
        "[acceptance] criterion {n} ({label}): {} ({:.2}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(
        failures.is_empty(),
        "criterion {n} ({label}) failed:\n{}",
        failures.join("\n")
    );
    if let Some(b) = budget {
        assert!(
            elapsed <= b,
            "criterion {n} ({label}) exceeded its {:.0}s budget: {:.2}s",
            b.as_secs_f64(),
            elapsed.as_secs_f64()
        );
    }
}

/// Criterion 1 — catalogue edge coefficients: numeric alpha within 1e-6 and
/// numeric beta within 0.02 of the closed forms, across a parameter sweep.
#[test]
fn criterion_1_catalogue_edge_coefficients() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let fit = SlopeFitConfig::default();
    let mut failures = Vec::new();

    let mut cases: Vec<(String, Gauge, f64, f64)> = Vec::new();
    for &theta in &[0.2, 0.5, 0.8] {
        cases.push((
            format!("logistic({theta})"),
            Gauge::logistic(2, theta).unwrap(),
            1.0,
            0.0,
        ));
        cases.push((
            format!("inverted-logistic({theta})"),
            Gauge::inverted_logistic(2, theta).unwrap(),
            0.0,
            1.0 - theta,
        ));
        cases.push((
            format!("square({theta})"),
            Gauge::square(theta).unwrap(),
            1.0 - theta,
            0.0,
        ));
    }
    for &rho in &[0.3, 0.6, 0.9] {
        cases.push((
            format!("gaussian({rho})"),
            Gauge::gaussian_exp(rho).unwrap(),
            rho * rho,
            0.5,
        ));
    }

    for (name, g, alpha_true, beta_true) in &cases {
        match edge_alpha(g, Sign::Plus, &cfg) {
            Ok(a) => {
                if (a.value - alpha_true).abs() > 1e-6 {
                    failures.push(format!(
                        "{name}: alpha {} vs expected {alpha_true} (|diff| > 1e-6)",
                        a.value
                    ));
                }
                match edge_beta(g, a.value, &fit) {
                    Ok(b) => {
                        if (b.value - beta_true).abs() > 0.02 {
                            failures.push(format!(
                                "{name}: beta {} vs expected {beta_true} (|diff| > 0.02)",
                                b.value
                            ));
                        }
                    }
                    Err(e) => failures.push(format!("{name}: edge_beta failed: {e}")),
                }
            }
            Err(e) => failures.push(format!("{name}: edge_alpha failed: {e}")),
        }
    }

    conclude(1, "catalogue edge coefficients", &failures, t0, Some(Duration::from_secs(10)));
}

/// Criterion 2 — beta propagation along a four-vertex chain: the recurrence
/// hits the hand values exactly, and the numeric slope fit on the composed
/// pairwise marginal lands within 0.05 of each.
#[test]
fn criterion_2_chain_beta_propagation() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let fit = SlopeFitConfig::default();
    let cliques = vec![vec![1usize, 2], vec![2, 3], vec![3, 4]];
    let mut failures = Vec::new();

    let cases: Vec<(&str, Vec<Gauge>, f64)> = vec![
        (
            "(a) logistic-gaussian-logistic",
            vec![
                Gauge::logistic(2, 0.4).unwrap(),
                Gauge::gaussian_exp(0.6).unwrap(),
                Gauge::logistic(2, 0.7).unwrap(),
            ],
            0.5,
        ),
        (
            "(b) gaussian-gaussian-inverted-logistic",
            vec![
                Gauge::gaussian_exp(0.5).unwrap(),
                Gauge::gaussian_exp(0.6).unwrap(),
                Gauge::inverted_logistic(2, 0.3).unwrap(),
            ],
            0.7,
        ),
        (
            "(c) inverted-logistic-logistic-inverted-logistic",
            vec![
                Gauge::inverted_logistic(2, 0.3).unwrap(),
                Gauge::logistic(2, 0.5).unwrap(),
                Gauge::inverted_logistic(2, 0.2).unwrap(),
            ],
            0.56,
        ),
        (
            "(d) logistic-square-square",
            vec![
                Gauge::logistic(2, 0.4).unwrap(),
                Gauge::square(0.3).unwrap(),
                Gauge::square(0.5).unwrap(),
            ],
            0.0,
        ),
    ];

    for (name, gauges, beta_true) in cases {
        let m = Model::from_cliques(&cliques, gauges, Margin::Exponential).unwrap();
        let rec = beta_path(&m, 1, 4).unwrap();
        if (rec.value - beta_true).abs() > 1e-12 {
            failures.push(format!(
                "{name}: recurrence beta {} vs {beta_true} (|diff| > 1e-12)",
                rec.value
            ));
        }
        // independent numeric leg: slope fit on the composed pairwise
        // marginal, expanded at the recurrence alpha
        let alpha = alpha_path(&m, 1, 4).unwrap().value;
        let mg = m.pairwise_marginal(1, 4, &cfg).unwrap();
        match edge_beta_marginal(&mg, alpha, &fit) {
            Ok(num) => {
                if (num.value - beta_true).abs() > 0.05 {
                    failures.push(format!(
                        "{name}: numeric beta {} vs {beta_true} (|diff| > 0.05)",
                        num.value
                    ));
                }
            }
            Err(e) => failures.push(format!("{name}: numeric beta failed: {e}")),
        }
    }

    conclude(2, "chain beta propagation", &failures, t0, Some(Duration::from_secs(60)));
}

/// Criterion 3 — signed alpha on a six-vertex Laplace chain with a
/// four-vertex end clique: recurrence exact, numeric oracle within 1e-3.
#[test]
fn criterion_3_signed_alpha_six_vertices() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let mut failures = Vec::new();

    let two = |rho: f64| vec![vec![1.0, rho], vec![rho, 1.0]];
    let sigma4 = vec![
        vec![1.0, 0.3, 0.2, 0.7],
        vec![0.3, 1.0, 0.4, 0.3],
        vec![0.2, 0.4, 1.0, 0.2],
        vec![0.7, 0.3, 0.2, 1.0],
    ];
    let graph = build_block_graph(&[vec![1, 2], vec![2, 3], vec![3, 4, 5, 6]]).unwrap();
    let m = assemble_model(
        graph,
        vec![
            (vec![1, 2], Gauge::gaussian_laplace(two(-0.9)).unwrap()),
            (vec![2, 3], Gauge::gaussian_laplace(two(0.8)).unwrap()),
            (vec![3, 4, 5, 6], Gauge::gaussian_laplace(sigma4).unwrap()),
        ],
        Margin::Laplace,
    )
    .unwrap();

    let expected = -(0.9f64 * 0.9) * (0.8 * 0.8) * (0.7 * 0.7); // -0.254016
    let rec = alpha_path_signed(&m, 1, 6).unwrap();
    if (rec.value - expected).abs() > 1e-12 {
        failures.push(format!("recurrence alpha {} vs {expected} (|diff| > 1e-12)", rec.value));
    }

    let mg = m.pairwise_marginal(1, 6, &cfg).unwrap();
    match edge_alpha_marginal(&mg, Sign::Plus, &cfg) {
        Ok(num) => {
            if (num.value - expected).abs() > 1e-3 {
                failures.push(format!("numeric alpha {} vs {expected} (|diff| > 1e-3)", num.value));
            }
        }
        Err(e) => failures.push(format!("numeric alpha failed: {e}")),
    }

    conclude(3, "signed alpha, six vertices", &failures, t0, Some(Duration::from_secs(30)));
}

/// Criterion 4 — direction enumeration on the three-vertex
/// logistic–gaussian chain: exactly {1,2} and {3}, with the expected
/// witnesses, and the alpha-vector route agrees.
#[test]
fn criterion_4_direction_enumeration() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let mut failures = Vec::new();

    let m = Model::from_cliques(
        &[vec![1, 2], vec![2, 3]],
        vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::gaussian_exp(0.6).unwrap()],
        Margin::Exponential,
    )
    .unwrap();

    let reports = enumerate_directions(&m, &cfg).unwrap();
    let sets: Vec<Vec<usize>> = reports.iter().map(|r| r.subset.clone()).collect();
    if sets != vec![vec![1, 2], vec![3]] {
        failures.push(format!("direction sets {sets:?} vs expected [[1, 2], [3]]"));
    } else {
        let w12 = &reports[0].witness;
        if (w12[0] - 1.0).abs() > 1e-3 || (w12[1] - 1.0).abs() > 1e-3 || (w12[2] - 0.36).abs() > 1e-3
        {
            failures.push(format!("witness for {{1,2}} = {w12:?} vs expected (1, 1, 0.36)"));
        }
        let w3 = &reports[1].witness;
        if (w3[0] - 0.36).abs() > 1e-3 || (w3[1] - 0.36).abs() > 1e-3 || (w3[2] - 1.0).abs() > 1e-3
        {
            failures.push(format!("witness for {{3}} = {w3:?} vs expected (0.36, 0.36, 1)"));
        }
    }

    match directions_from_alphas(&m, &cfg) {
        Ok(cand) => {
            if cand.sets != vec![vec![1, 2], vec![3]] {
                failures.push(format!(
                    "alpha-vector candidates {:?} vs expected [[1, 2], [3]]",
                    cand.sets
                ));
            }
        }
        Err(e) => failures.push(format!("directions_from_alphas failed: {e}")),
    }

    conclude(4, "direction enumeration", &failures, t0, Some(Duration::from_secs(20)));
}

/// A random tree on `d` labeled vertices with random catalogue edge gauges.
/// Parameters stay inside comfortable interior ranges so every pairwise
/// contact is numerically resolvable at the 1e-3 comparison scale.
fn random_tree_model(rng: &mut rand_chacha::ChaCha8Rng, d: usize) -> Model {
    let mut cliques = Vec::with_capacity(d - 1);
    let mut gauges = Vec::with_capacity(d - 1);
    for k in 2..=d {
        let parent = 1 + (rng.next_u64() as usize) % (k - 1);
        cliques.push(vec![parent, k]);
        let u = unit(rng);
        let g = match rng.next_u64() % 4 {
            0 => Gauge::logistic(2, 0.15 + 0.75 * u).unwrap(),
            1 => Gauge::gaussian_exp(0.15 + 0.75 * u).unwrap(),
            2 => Gauge::inverted_logistic(2, 0.35 + 0.6 * u).unwrap(),
            _ => Gauge::square(0.15 + 0.7 * u).unwrap(),
        };
        gauges.push(g);
    }
    Model::from_cliques(&cliques, gauges, Margin::Exponential).unwrap()
}

/// Criterion 5 — recurrence vs numeric alpha over 25 random trees on 4 to 7
/// vertices: every ordered pair agrees within 1e-3.
#[test]
fn criterion_5_alpha_recurrence_sweep() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xa11a_57e3);
    let models: Vec<Model> =
        (0..25).map(|k| random_tree_model(&mut rng, 4 + (k % 4))).collect();

    use rayon::prelude::*;
    let failures: Vec<String> = models
        .par_iter()
        .enumerate()
        .flat_map_iter(|(mi, m)| {
            let mut local = Vec::new();
            let labels: Vec<usize> = m.graph().vertices().to_vec();
            for &i in &labels {
                for &j in &labels {
                    if i == j {
                        continue;
                    }
                    let rec = match alpha_path(m, i, j) {
                        Ok(r) => r.value,
                        Err(e) => {
                            local.push(format!("model {mi}, pair ({i},{j}): recurrence failed: {e}"));
                            continue;
                        }
                    };
                    let mg = m.pairwise_marginal(i, j, &cfg).unwrap();
                    match edge_alpha_marginal(&mg, Sign::Plus, &cfg) {
                        Ok(num) => {
                            if (num.value - rec).abs() > 1e-3 {
                                local.push(format!(
                                    "model {mi}, pair ({i},{j}): recurrence {rec} vs numeric {} (|diff| > 1e-3)",
                                    num.value
                                ));
                            }
                        }
                        Err(e) => {
                            local.push(format!("model {mi}, pair ({i},{j}): numeric alpha failed: {e}"))
                        }
                    }
                }
            }
            local
        })
        .collect();

    conclude(5, "alpha recurrence sweep", &failures, t0, Some(Duration::from_secs(300)));
}

/// Criterion 6 — separator obstruction: on random AD trees, any subset that
/// crosses cliques while omitting a separator keeps a gap of at least eps
/// (up to numerical slack) when the omitted coordinates are capped.
#[test]
fn criterion_6_separator_gap() {
    let t0 = Instant::now();
    let eps = 1e-3;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5e9a_9a97);
    let mut failures = Vec::new();

    for trial in 0..10 {
        let n_cliques = 2 + (rng.next_u64() as usize) % 2;
        let star = rng.next_u64() % 2 == 0;
        let mut cliques = Vec::new();
        let mut gauges = Vec::new();
        for k in 0..n_cliques {
            // path: 1-2, 2-3, 3-4 ; star: 1-2, 1-3, 1-4
            let edge = if star { vec![1, k + 2] } else { vec![k + 1, k + 2] };
            cliques.push(edge);
            let theta = 0.15 + 0.75 * unit(&mut rng);
            let gamma = 0.15 + 0.75 * unit(&mut rng);
            gauges.push(Gauge::asymmetric_ad(theta, gamma).unwrap());
        }
        let m = Model::from_cliques(&cliques, gauges, Margin::Exponential).unwrap();
        // two leaves of the tree always span cliques and omit the vertex
        // between them (the path interior is exactly the separators)
        let a = if star { vec![2, n_cliques + 1] } else { vec![1, n_cliques + 1] };
        match separator_gap(&m, &a, eps) {
            Ok(gap) => {
                if gap < eps - 1e-6 {
                    failures.push(format!(
                        "trial {trial}: gap {gap:.3e} below eps - 1e-6 = {:.3e} (A = {a:?})",
                        eps - 1e-6
                    ));
                }
            }
            Err(e) => failures.push(format!("trial {trial}: separator_gap failed: {e}")),
        }
    }

    conclude(6, "separator gap", &failures, t0, None);
}

/// Criterion 7 — closed-form pairwise marginal on AD trees: the induced
/// two-parameter gauge matches the numeric composed marginal to 1e-3 in
/// sup norm on the standard 21x21 grid.
#[test]
fn criterion_7_ad_tree_closed_form() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xad73_ee01);
    let mut failures = Vec::new();

    for trial in 0..10 {
        let d = 3 + (rng.next_u64() as usize) % 4; // 3..=6 vertices
        let mut cliques = Vec::new();
        let mut gauges = Vec::new();
        for k in 2..=d {
            let parent = 1 + (rng.next_u64() as usize) % (k - 1);
            cliques.push(vec![parent, k]);
            let theta = 0.15 + 0.75 * unit(&mut rng);
            let gamma = 0.15 + 0.75 * unit(&mut rng);
            gauges.push(Gauge::asymmetric_ad(theta, gamma).unwrap());
        }
        let m = Model::from_cliques(&cliques, gauges, Margin::Exponential).unwrap();

        let labels: Vec<usize> = m.graph().vertices().to_vec();
        for &k in &labels {
            for &l in &labels {
                if k == l {
                    continue;
                }
                let closed = tree_ad_marginal(&m, k, l).unwrap().induced_gauge();
                let mg = m.pairwise_marginal(k, l, &cfg).unwrap();
                let mut sup = 0.0f64;
                for a in 0..=20 {
                    for b in 0..=20 {
                        let x = [a as f64 / 20.0, b as f64 / 20.0];
                        let cv = closed.eval(&x).unwrap();
                        let nv = mg.eval(&x).unwrap();
                        sup = sup.max((cv - nv).abs());
                    }
                }
                if sup > 1e-3 {
                    failures.push(format!(
                        "trial {trial}, pair ({k},{l}): sup deviation {sup:.3e} > 1e-3"
                    ));
                }
            }
        }
    }

    conclude(7, "AD tree closed form", &failures, t0, None);
}

/// Criterion 8 — axiom suite: homogeneity and max-domination hold on 1000
/// random rays for every catalogue gauge (1e-9) and for composed and
/// eliminated marginal gauges (1e-6).
#[test]
fn criterion_8_axiom_suite() {
    let t0 = Instant::now();
    let cfg = MinimizerConfig::default();
    let mut failures = Vec::new();

    let sigma4 = vec![
        vec![1.0, 0.3, 0.2, 0.7],
        vec![0.3, 1.0, 0.4, 0.3],
        vec![0.2, 0.4, 1.0, 0.2],
        vec![0.7, 0.3, 0.2, 1.0],
    ];
    let catalogue: Vec<(&str, Gauge)> = vec![
        ("logistic(2, 0.5)", Gauge::logistic(2, 0.5).unwrap()),
        ("logistic(3, 0.3)", Gauge::logistic(3, 0.3).unwrap()),
        ("gaussian(0.6)", Gauge::gaussian_exp(0.6).unwrap()),
        ("inverted-logistic(2, 0.5)", Gauge::inverted_logistic(2, 0.5).unwrap()),
        ("inverted-logistic(3, 0.7)", Gauge::inverted_logistic(3, 0.7).unwrap()),
        ("square(0.4)", Gauge::square(0.4).unwrap()),
        ("asymmetric-ad(0.3, 0.6)", Gauge::asymmetric_ad(0.3, 0.6).unwrap()),
        (
            "gaussian-laplace(2)",
            Gauge::gaussian_laplace(vec![vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap(),
        ),
        ("gaussian-laplace(4)", Gauge::gaussian_laplace(sigma4).unwrap()),
    ];
    for (name, g) in &catalogue {
        let rep = check_gauge_axioms(g, 1000, 1e-9);
        if !rep.pass {
            failures.push(format!(
                "catalogue {name}: homogeneity defect {:.3e}, lower-bound violation {:.3e} (tol 1e-9)",
                rep.max_homogeneity_defect, rep.max_lower_bound_violation
            ));
        }
    }

    // composed and eliminated marginals of a three-vertex chain, both
    // margins; these carry minimization noise, hence the looser 1e-6
    let exp_chain = Model::from_cliques(
        &[vec![1, 2], vec![2, 3]],
        vec![Gauge::logistic(2, 0.4).unwrap(), Gauge::gaussian_exp(0.6).unwrap()],
        Margin::Exponential,
    )
    .unwrap();
    let two = |rho: f64| vec![vec![1.0, rho], vec![rho, 1.0]];
    let lap_chain = Model::from_cliques(
        &[vec![1, 2], vec![2, 3]],
        vec![
            Gauge::gaussian_laplace(two(-0.9)).unwrap(),
            Gauge::gaussian_laplace(two(0.8)).unwrap(),
        ],
        Margin::Laplace,
    )
    .unwrap();
    let marginals: Vec<(&str, Gauge)> = vec![
        ("composed pair marginal (exp)", exp_chain.pairwise_marginal(1, 3, &cfg).unwrap().to_gauge()),
        ("eliminated pair marginal (exp)", exp_chain.marginal_gauge(&[1, 3], &cfg).unwrap().to_gauge()),
        ("composed pair marginal (laplace)", lap_chain.pairwise_marginal(1, 3, &cfg).unwrap().to_gauge()),
        ("eliminated pair marginal (laplace)", lap_chain.marginal_gauge(&[1, 3], &cfg).unwrap().to_gauge()),
    ];
    for (name, g) in &marginals {
        let rep = check_gauge_axioms(g, 1000, 1e-6);
        if !rep.pass {
            failures.push(format!(
                "{name}: homogeneity defect {:.3e}, lower-bound violation {:.3e} (tol 1e-6)",
                rep.max_homogeneity_defect, rep.max_lower_bound_violation
            ));
        }
    }

    conclude(8, "axiom suite", &failures, t0, None);
}
