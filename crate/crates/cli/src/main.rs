//! Command-line front end for gauge models on block graphs: validates model
//! files, evaluates joint and marginal gauges, computes conditional-extremes
//! coefficients by recurrence and by numeric oracle, enumerates geometric
//! extreme directions, samples unit level sets, and runs an invariant suite.
//!
//! Exit codes: 0 success, 2 usage error, 3 model error, 4 verification
//! failure. Failures print one JSON object on stderr:
//! `{"error":{"code":...,"kind":...,"message":...}}`.

mod modelfile;
mod report;
mod verify;

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use gauge_graph::{
    alpha_path, alpha_path_signed, beta_path, directions_from_alphas, edge_alpha_marginal,
    edge_beta_marginal, enumerate_directions, AlphaResult, CoeffMethod, Margin, MinimizerConfig,
    Sign, SlopeFitConfig,
};

use modelfile::{canonical_json, parse_model, LabeledModel};
use report::{
    csv_record, level_set_svg, print_json, sig9, AlphaEntry, AlphaReport, AlphasReport,
    BetaEntry, BetaReport, BothDirectionsReport, DirectionEntry, PathEntry, ValidateReport,
};

/// A command failure carrying its exit code and machine-readable kind.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "usage", message: message.into() }
    }

    pub fn model(message: impl Into<String>) -> Self {
        CliError { code: 3, kind: "model", message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        CliError { code: 4, kind: "verification", message: message.into() }
    }
}

#[derive(Parser)]
#[command(
    name = "gauge-graph",
    version,
    about = "Gauge models on block graphs: evaluation, marginals, conditional-extremes \
             coefficients, extreme directions, level sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model file and print a graph summary.
    Validate {
        /// Model file (JSON).
        model: PathBuf,
        /// Print the canonical model serialization instead of the summary.
        #[arg(long)]
        emit_model: bool,
    },
    /// Evaluate the joint gauge at a point.
    Eval {
        /// Model file (JSON).
        model: PathBuf,
        /// Comma-separated coordinates, one per vertex in sorted label order.
        #[arg(long, value_name = "X1,X2,...", allow_hyphen_values = true)]
        point: String,
    },
    /// Tabulate a marginal gauge on a grid (CSV on stdout).
    Marginal {
        /// Model file (JSON).
        model: PathBuf,
        /// Comma-separated labels of the kept vertices.
        #[arg(long, value_name = "I,J,...")]
        keep: String,
        /// Grid points per axis on [0,1] (exponential) or [-1,1] (Laplace).
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Conditional-extremes location coefficient for an ordered vertex pair.
    Alpha {
        /// Model file (JSON).
        model: PathBuf,
        /// Label of the conditioning vertex.
        #[arg(long)]
        from: String,
        /// Label of the target vertex.
        #[arg(long)]
        to: String,
        /// Conditioning sign, + or - (Laplace margins only).
        #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Conditional-extremes scale coefficient for an ordered vertex pair.
    Beta {
        /// Model file (JSON).
        model: PathBuf,
        /// Label of the conditioning vertex.
        #[arg(long)]
        from: String,
        /// Label of the target vertex.
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Geometric extreme directions of the unit level set.
    Directions {
        /// Model file (JSON).
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionsMethod::Enumerate)]
        method: DirectionsMethod,
    },
    /// Sample the unit level set (CSV on stdout; optional SVG for bivariate
    /// models).
    Levelset {
        /// Model file (JSON).
        model: PathBuf,
        /// Number of boundary points.
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Render the level set to an SVG file (bivariate models only).
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
    },
    /// Run the full invariant suite on a model.
    Verify {
        /// Model file (JSON).
        model: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Recurrence,
    Numeric,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionsMethod {
    Enumerate,
    Alphas,
    Both,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("expected + or -, got {s:?}")),
    }
}

fn main() {
    // die like cat(1) when the reader closes the pipe, instead of panicking
    // mid-print: Rust masks SIGPIPE by default
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => fail(&CliError::usage(e.to_string())),
        },
    };
    if let Err(e) = init_thread_pool().and_then(|()| run(cli.command)) {
        fail(&e);
    }
}

/// Prints the error JSON on stderr and exits with the error's code.
fn fail(e: &CliError) -> ! {
    let body = serde_json::json!({
        "error": { "code": e.code, "kind": e.kind, "message": e.message }
    });
    eprintln!("{body}");
    std::process::exit(e.code)
}

/// Applies the optional GAUGE_GRAPH_THREADS worker cap.
fn init_thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GAUGE_GRAPH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!("GAUGE_GRAPH_THREADS: expected a positive integer, got {raw:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("GAUGE_GRAPH_THREADS: {e}")))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { model, emit_model } => cmd_validate(&model, emit_model),
        Command::Eval { model, point } => cmd_eval(&model, &point),
        Command::Marginal { model, keep, grid } => cmd_marginal(&model, &keep, grid),
        Command::Alpha { model, from, to, sign, method } => {
            cmd_alpha(&model, &from, &to, sign, method)
        }
        Command::Beta { model, from, to, method } => cmd_beta(&model, &from, &to, method),
        Command::Directions { model, method } => cmd_directions(&model, method),
        Command::Levelset { model, n, svg } => cmd_levelset(&model, n, svg.as_deref()),
        Command::Verify { model } => cmd_verify(&model),
    }
}

fn load_model(path: &Path) -> Result<LabeledModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

fn margin_name(margin: Margin) -> &'static str {
    match margin {
        Margin::Exponential => "exponential",
        Margin::Laplace => "laplace",
    }
}

fn method_name(method: CoeffMethod) -> &'static str {
    match method {
        CoeffMethod::Recurrence => "recurrence",
        CoeffMethod::Numeric => "numeric",
        CoeffMethod::NumericFit => "numeric_fit",
    }
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

/// Comma-separated coordinate list.
fn parse_coords(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("point: {:?} is not a number", p.trim())))
        })
        .collect()
}

/// Ordered pair of distinct vertex indices from two labels.
fn vertex_pair(m: &LabeledModel, from: &str, to: &str) -> Result<(usize, usize), CliError> {
    let i = m.index_of(from)?;
    let j = m.index_of(to)?;
    if i == j {
        return Err(CliError::model(format!("from and to must differ; both are {from:?}")));
    }
    Ok((i, j))
}

fn cmd_validate(path: &Path, emit_model: bool) -> Result<(), CliError> {
    let m = load_model(path)?;
    if emit_model {
        print!("{}", canonical_json(&m));
        return Ok(());
    }
    let labels_of = |vs: &[usize]| -> Vec<String> {
        let mut ls: Vec<String> = vs.iter().map(|&v| m.label_of(v).to_owned()).collect();
        ls.sort();
        ls
    };
    let mut cliques: Vec<Vec<String>> =
        m.model.graph().cliques().iter().map(|c| labels_of(c)).collect();
    cliques.sort();
    let mut separators = labels_of(m.model.graph().separators());
    separators.sort();
    let vs = m.model.graph().vertices();
    let mut paths = Vec::new();
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            let p = m.model.graph().shortest_path(i, j).map_err(|e| CliError::model(e.to_string()))?;
            paths.push(PathEntry {
                from: m.label_of(i).to_owned(),
                to: m.label_of(j).to_owned(),
                via: p.vertices.iter().map(|&v| m.label_of(v).to_owned()).collect(),
            });
        }
    }
    print_json(&ValidateReport {
        cliques,
        margin: margin_name(m.margin()).to_owned(),
        paths,
        separators,
        vertices: m.labels.clone(),
    });
    Ok(())
}

fn cmd_eval(path: &Path, point: &str) -> Result<(), CliError> {
    let m = load_model(path)?;
    let x = parse_coords(point)?;
    let d = m.model.vertex_count();
    if x.len() != d {
        return Err(CliError::model(format!(
            "point: expected {d} coordinates, got {}",
            x.len()
        )));
    }
    let v = m.model.eval_joint(&x).map_err(|e| CliError::model(format!("point: {e}")))?;
    println!("{v:.12}");
    Ok(())
}

fn cmd_marginal(path: &Path, keep: &str, grid: usize) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::usage(format!("grid: need at least 2 points per axis, got {grid}")));
    }
    let m = load_model(path)?;
    let kept_labels: Vec<String> = keep.split(',').map(|s| s.trim().to_owned()).collect();
    let kept: Vec<usize> =
        kept_labels.iter().map(|l| m.index_of(l)).collect::<Result<_, _>>()?;
    for (a, l) in kept_labels.iter().enumerate() {
        if kept_labels[..a].contains(l) {
            return Err(CliError::model(format!("keep: duplicate label {l:?}")));
        }
    }
    if kept.len() >= m.model.vertex_count() {
        return Err(CliError::model(
            "keep: must leave at least one vertex to eliminate".to_owned(),
        ));
    }
    let cfg = MinimizerConfig::default();
    let mg = if kept.len() == 2 {
        m.model.pairwise_marginal(kept[0], kept[1], &cfg)
    } else {
        m.model.marginal_gauge(&kept, &cfg)
    }
    .map_err(|e| CliError::model(format!("keep: {e}")))?;

    let lo = match m.margin() {
        Margin::Exponential => 0.0,
        Margin::Laplace => -1.0,
    };
    let axis: Vec<f64> =
        (0..grid).map(|t| lo + (1.0 - lo) * t as f64 / (grid - 1) as f64).collect();

    let mut header = kept_labels.clone();
    header.push("value".to_owned());
    println!("{}", csv_record(header));

    let k = kept.len();
    let mut idx = vec![0usize; k];
    loop {
        let x: Vec<f64> = idx.iter().map(|&t| axis[t]).collect();
        let v = mg.eval(&x).map_err(|e| CliError::model(e.to_string()))?;
        let mut fields: Vec<String> = x.iter().map(|&c| sig9(c)).collect();
        fields.push(sig9(v));
        println!("{}", csv_record(fields));
        // odometer over the grid, last coordinate fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < grid {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Closed-form path alpha for the model's margin. Under Laplace margins a
/// negative conditioning sign negates the value: every catalogue Laplace
/// family is even, so the two signed coefficients are negatives of each
/// other.
fn recurrence_alpha(
    m: &LabeledModel,
    i: usize,
    j: usize,
    sign: Sign,
) -> Result<AlphaResult, CliError> {
    let mut r = match m.margin() {
        Margin::Exponential => alpha_path(&m.model, i, j),
        Margin::Laplace => alpha_path_signed(&m.model, i, j),
    }
    .map_err(|e| CliError::model(e.to_string()))?;
    if sign == Sign::Minus {
        r.value = -r.value;
        r.conditioning_sign = Sign::Minus;
    }
    Ok(r)
}

fn cmd_alpha(path: &Path, from: &str, to: &str, sign: Sign, method: Method) -> Result<(), CliError> {
    let m = load_model(path)?;
    let (i, j) = vertex_pair(&m, from, to)?;
    if sign == Sign::Minus && m.margin() == Margin::Exponential {
        return Err(CliError::model(
            "sign: a negative conditioning sign requires Laplace margins".to_owned(),
        ));
    }
    let cfg = MinimizerConfig::default();

    let recurrence = if method != Method::Numeric {
        let r = recurrence_alpha(&m, i, j, sign)?;
        Some(AlphaEntry {
            contact_value: r.contact_value,
            method: method_name(r.method),
            value: r.value,
        })
    } else {
        None
    };
    let numeric = if method != Method::Recurrence {
        let mg = m.model.pairwise_marginal(i, j, &cfg).map_err(|e| CliError::model(e.to_string()))?;
        let r = edge_alpha_marginal(&mg, sign, &cfg).map_err(|e| CliError::model(e.to_string()))?;
        Some(AlphaEntry {
            contact_value: r.contact_value,
            method: method_name(r.method),
            value: r.value,
        })
    } else {
        None
    };
    let discrepancy = match (&recurrence, &numeric) {
        (Some(r), Some(n)) => Some((r.value - n.value).abs()),
        _ => None,
    };
    print_json(&AlphaReport {
        discrepancy,
        from: from.to_owned(),
        numeric,
        recurrence,
        sign: sign_name(sign).to_owned(),
        to: to.to_owned(),
    });
    Ok(())
}

fn cmd_beta(path: &Path, from: &str, to: &str, method: Method) -> Result<(), CliError> {
    let m = load_model(path)?;
    if m.margin() == Margin::Laplace {
        return Err(CliError::model(
            "scale coefficients are not supported under Laplace margins".to_owned(),
        ));
    }
    let (i, j) = vertex_pair(&m, from, to)?;
    let cfg = MinimizerConfig::default();

    let recurrence = if method != Method::Numeric {
        let r = beta_path(&m.model, i, j).map_err(|e| CliError::model(e.to_string()))?;
        Some(BetaEntry {
            fit_r2: r.fit_r2,
            low_quality: r.low_quality,
            method: method_name(r.method),
            sigma: r.sigma,
            value: r.value,
        })
    } else {
        None
    };
    let numeric = if method != Method::Recurrence {
        // the slope fit needs the contact coordinate; the closed-form alpha
        // is exact and cheap, so the fit always anchors there
        let alpha = alpha_path(&m.model, i, j).map_err(|e| CliError::model(e.to_string()))?;
        let mg = m.model.pairwise_marginal(i, j, &cfg).map_err(|e| CliError::model(e.to_string()))?;
        let r = edge_beta_marginal(&mg, alpha.value, &SlopeFitConfig::default())
            .map_err(|e| CliError::model(e.to_string()))?;
        Some(BetaEntry {
            fit_r2: r.fit_r2,
            low_quality: r.low_quality,
            method: method_name(r.method),
            sigma: r.sigma,
            value: r.value,
        })
    } else {
        None
    };
    let discrepancy = match (&recurrence, &numeric) {
        (Some(r), Some(n)) => Some((r.value - n.value).abs()),
        _ => None,
    };
    print_json(&BetaReport {
        discrepancy,
        from: from.to_owned(),
        numeric,
        recurrence,
        to: to.to_owned(),
    });
    Ok(())
}

fn enumerate_entries(m: &LabeledModel, cfg: &MinimizerConfig) -> Result<Vec<DirectionEntry>, CliError> {
    let reports =
        enumerate_directions(&m.model, cfg).map_err(|e| CliError::model(e.to_string()))?;
    Ok(reports
        .into_iter()
        .map(|r| DirectionEntry {
            a: r.subset.iter().map(|&v| m.label_of(v).to_owned()).collect(),
            gap: r.gap,
            witness: r.witness,
        })
        .collect())
}

fn alphas_report(m: &LabeledModel, cfg: &MinimizerConfig) -> Result<AlphasReport, CliError> {
    let af = directions_from_alphas(&m.model, cfg).map_err(|e| CliError::model(e.to_string()))?;
    Ok(AlphasReport {
        directions: af
            .sets
            .iter()
            .map(|s| s.iter().map(|&v| m.label_of(v).to_owned()).collect())
            .collect(),
        possibly_incomplete: af.possibly_incomplete,
    })
}

fn cmd_directions(path: &Path, method: DirectionsMethod) -> Result<(), CliError> {
    let m = load_model(path)?;
    let cfg = MinimizerConfig::default();
    match method {
        DirectionsMethod::Enumerate => print_json(&enumerate_entries(&m, &cfg)?),
        DirectionsMethod::Alphas => print_json(&alphas_report(&m, &cfg)?),
        DirectionsMethod::Both => {
            let enumerated = enumerate_entries(&m, &cfg)?;
            if m.margin() == Margin::Laplace {
                print_json(&BothDirectionsReport {
                    agree: None,
                    enumerated,
                    from_alphas: None,
                    note: Some(
                        "alpha-based candidates require exponential margins; enumeration only"
                            .to_owned(),
                    ),
                });
            } else {
                let from_alphas = alphas_report(&m, &cfg)?;
                let mut enumerated_sets: Vec<Vec<String>> =
                    enumerated.iter().map(|e| e.a.clone()).collect();
                enumerated_sets.sort();
                let agree = enumerated_sets == from_alphas.directions;
                print_json(&BothDirectionsReport {
                    agree: Some(agree),
                    enumerated,
                    from_alphas: Some(from_alphas),
                    note: None,
                });
            }
        }
    }
    Ok(())
}

fn cmd_levelset(path: &Path, n: usize, svg: Option<&Path>) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::usage("n: need at least one boundary point".to_owned()));
    }
    let m = load_model(path)?;
    let d = m.model.vertex_count();
    if svg.is_some() && d != 2 {
        return Err(CliError::usage(format!(
            "--svg requires a bivariate model; this one has {d} vertices"
        )));
    }
    let pts = m.model.sample_level_set(n);
    println!("{}", csv_record(m.labels.clone()));
    for p in &pts {
        println!("{}", csv_record(p.iter().map(|&c| sig9(c))));
    }
    if let Some(file) = svg {
        let vs = m.model.graph().vertices();
        let alpha = recurrence_alpha(&m, vs[0], vs[1], Sign::Plus)?;
        let body = level_set_svg(&pts, (1.0, alpha.value), m.margin());
        std::fs::write(file, body)
            .map_err(|e| CliError::usage(format!("{}: {e}", file.display())))?;
    }
    Ok(())
}

fn cmd_verify(path: &Path) -> Result<(), CliError> {
    let m = load_model(path)?;
    let rep = verify::verify_model(&m);
    print_json(&rep);
    if rep.pass {
        Ok(())
    } else {
        let failed: Vec<&str> =
            rep.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(CliError::verification(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            rep.checks.len(),
            failed.join(", ")
        )))
    }
}
