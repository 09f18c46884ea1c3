//! Deterministic derivative-free numerical kernel.
//!
//! Everything downstream (marginalization, contact-point extraction, slope
//! fits) is built on four primitives:
//!
//! * [`minimize_box`] — dense-grid seeding plus compass refinement over an
//!   axis-aligned box;
//! * [`rightmost_minimizer_1d`] — one-dimensional global minimization with a
//!   *rightmost* tie-break: among all points whose value ties the minimum
//!   within a tolerance, the largest coordinate wins (plateaus resolve to
//!   their right edge);
//! * [`fit_loglog_slope`] — least-squares power-law index estimation on a
//!   geometric grid;
//! * [`invert_spd`] — Cholesky inversion of small symmetric positive-definite
//!   matrices.
//!
//! There is no randomness anywhere in this module: seeds come from dense
//! grids, refinement is compass/coordinate search with shrinking steps, and
//! identical inputs produce bit-identical outputs.

use thiserror::Error;

/// Errors from the numerical kernel.
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("objective returned a non-finite value at {point:?}")]
    NonFiniteObjective { point: Vec<f64> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("search box is empty: lower bound {lo} exceeds upper bound {hi} in coordinate {index}")]
    EmptyBox { index: usize, lo: f64, hi: f64 },
    #[error("log-log fit has only {got} usable points above the value floor; at least {need} are required")]
    TooFewPoints { got: usize, need: usize },
    #[error("objective is negative ({value:.3e}) at offset {x:.3e}; the expansion point lies above the contact")]
    NegativeValue { x: f64, value: f64 },
    #[error("matrix is not symmetric within 1e-12 (entries ({i},{j}) and ({j},{i}) differ by {diff:.3e})")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("matrix dimension {0} exceeds the supported maximum of 32")]
    DimensionTooLarge(usize),
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
}

/// Configuration for the box minimizers.
#[derive(Clone, Debug)]
pub struct MinimizerConfig {
    /// Grid points per dimension for the dense seeding pass. In high
    /// dimensions the effective count is reduced so the total grid stays
    /// within a fixed budget (the reduction is deterministic).
    pub grid_points_per_dim: usize,
    /// Rounds of compass refinement (each failed round halves the steps).
    pub refine_iters: usize,
    /// Value-scale tolerance: minimum-plateau membership threshold for the
    /// rightmost tie-break, and the convergence floor for refinement.
    pub tolerance: f64,
    /// Number of best grid cells used as refinement starting points.
    pub multistart_count: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            grid_points_per_dim: 41,
            refine_iters: 60,
            tolerance: 1e-8,
            multistart_count: 8,
        }
    }
}

impl MinimizerConfig {
    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.grid_points_per_dim < 3 {
            return Err(NumericsError::InvalidConfig(format!(
                "grid_points_per_dim = {} (need at least 3)",
                self.grid_points_per_dim
            )));
        }
        if self.refine_iters == 0 {
            return Err(NumericsError::InvalidConfig("refine_iters = 0".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(NumericsError::InvalidConfig(format!(
                "tolerance = {} (need a positive finite value)",
                self.tolerance
            )));
        }
        if self.multistart_count == 0 {
            return Err(NumericsError::InvalidConfig("multistart_count = 0".into()));
        }
        Ok(())
    }
}

/// Configuration for [`fit_loglog_slope`].
#[derive(Clone, Debug)]
pub struct SlopeFitConfig {
    /// Largest offset of the geometric evaluation grid.
    pub x_max: f64,
    /// Smallest offset of the geometric evaluation grid.
    pub x_min: f64,
    /// Number of grid points.
    pub points: usize,
    /// Values at or below this floor are dropped (they carry no slope
    /// information once they sink into evaluation noise).
    pub value_floor: f64,
    /// Fits with r-squared below this are flagged as low quality.
    pub min_r2: f64,
}

impl Default for SlopeFitConfig {
    fn default() -> Self {
        SlopeFitConfig {
            x_max: 1e-2,
            x_min: 1e-5,
            points: 25,
            value_floor: 1e-12,
            min_r2: 0.99,
        }
    }
}

impl SlopeFitConfig {
    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && 0.0 < self.x_min && self.x_min < self.x_max) {
            return Err(NumericsError::InvalidConfig(format!(
                "slope-fit window [{}, {}] is not an increasing positive interval",
                self.x_min, self.x_max
            )));
        }
        if self.points < 5 {
            return Err(NumericsError::InvalidConfig(format!(
                "points = {} (need at least 5)",
                self.points
            )));
        }
        if !(self.value_floor >= 0.0 && self.value_floor.is_finite()) {
            return Err(NumericsError::InvalidConfig("value_floor must be finite and non-negative".into()));
        }
        if !(self.min_r2 > 0.0 && self.min_r2 <= 1.0) {
            return Err(NumericsError::InvalidConfig(format!("min_r2 = {}", self.min_r2)));
        }
        Ok(())
    }
}

/// Result of a box minimization.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Result of a log-log slope fit.
#[derive(Clone, Debug)]
pub struct SlopeFit {
    /// Fitted power-law index.
    pub sigma: f64,
    /// Intercept of the regression in log space.
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r2: f64,
    /// Points that survived the value floor.
    pub points_used: usize,
    /// Set when `r2 < cfg.min_r2`.
    pub low_quality: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Total dense-grid budget for [`minimize_box`]; the per-dimension count is
/// reduced (deterministically) in high dimensions so the product stays below
/// this.
const GRID_BUDGET: usize = 200_000;

fn check_finite(v: f64, point: &[f64]) -> Result<f64, NumericsError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFiniteObjective { point: point.to_vec() })
    }
}

fn grid_points_for_dims(requested: usize, dims: usize) -> usize {
    let mut n = 3usize;
    loop {
        let next = n + 1;
        if next > requested {
            break;
        }
        // next^dims <= GRID_BUDGET, computed in floating point to dodge overflow
        if (next as f64).powi(dims as i32) > GRID_BUDGET as f64 {
            break;
        }
        n = next;
    }
    n.min(requested).max(3)
}

/// Minimizes `f` over the axis-aligned box `bounds` by dense-grid seeding
/// followed by compass refinement (axis moves plus adjacent-coordinate
/// diagonals, shrinking steps) and per-coordinate golden-section sweeps from
/// the `multistart_count` best seeds. Deterministic for a fixed `cfg`; the
/// returned value never exceeds the best dense-grid value.
pub fn minimize_box<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    cfg: &MinimizerConfig,
) -> Result<Minimum, NumericsError> {
    cfg.validate()?;
    let dims = bounds.len();
    if dims == 0 {
        return Err(NumericsError::InvalidConfig("empty bounds".into()));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(NumericsError::EmptyBox { index: i, lo, hi });
        }
    }

    let n = grid_points_for_dims(cfg.grid_points_per_dim, dims);
    let steps: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 })
        .collect();

    // Dense-grid scan, keeping the `multistart_count` best distinct cells.
    let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0f64; dims];
    loop {
        for d in 0..dims {
            point[d] = bounds[d].0 + steps[d] * idx[d] as f64;
        }
        let v = check_finite(f(&point), &point)?;
        if seeds.len() < cfg.multistart_count {
            seeds.push((v, point.clone()));
            seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        } else if v < seeds.last().unwrap().0 {
            seeds.pop();
            seeds.push((v, point.clone()));
            seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        // mixed-radix increment
        let mut d = 0;
        loop {
            if d == dims {
                break;
            }
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dims {
            break;
        }
    }

    let grid_best = seeds[0].0;
    let mut best = Minimum { point: seeds[0].1.clone(), value: grid_best };

    for (v0, seed) in &seeds {
        let refined = compass_refine(&f, bounds, seed.clone(), *v0, &steps, cfg)?;
        if refined.value < best.value {
            best = refined;
        }
    }

    if dims >= 2 {
        best = run_direction_polish(&f, bounds, best, cfg);
    }

    debug_assert!(best.value <= grid_best + 1e-15 * (1.0 + grid_best.abs()));
    Ok(best)
}

/// Golden-section sweeps along contiguous coordinate runs, applied to the
/// best candidate after multistart refinement.
///
/// Piecewise couplings between neighbouring coordinates (separator
/// magnitudes, min/max terms in the clique gauges) kink along rays through
/// the origin and along diagonal creases; a point pinned on an intersection
/// of several such manifolds has no descent direction among axis moves or
/// fixed diagonals, so compass search stalls there. Moving a whole run
/// `[a..=b]` together — rescaling it about the origin, or translating it by
/// a constant (the only family that moves runs parked at zero) — walks along
/// those manifolds instead of across them.
fn run_direction_polish<F: Fn(&[f64]) -> f64>(
    f: &F,
    bounds: &[(f64, f64)],
    mut best: Minimum,
    cfg: &MinimizerConfig,
) -> Minimum {
    let dims = bounds.len();
    let iters = cfg.refine_iters.max(80);
    for _cycle in 0..3 {
        let before = best.value;
        for d in 0..dims {
            let (lo, hi) = bounds[d];
            if !(hi > lo) {
                continue;
            }
            let line = |y: f64| {
                let mut p = best.point.clone();
                p[d] = y;
                f(&p)
            };
            let (y, v) = golden_min(&line, lo, hi, iters);
            if v.is_finite() && v < best.value {
                best.value = v;
                best.point[d] = y;
            }
        }
        for a in 0..dims {
            for b in (a + 1)..dims {
                let span =
                    bounds[a..=b].iter().map(|&(lo, hi)| hi - lo).fold(0.0f64, f64::max);
                if !(span > 0.0) {
                    continue;
                }
                let scale = best.point[a..=b].iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                if scale > 0.0 {
                    let line = |c: f64| {
                        let mut p = best.point.clone();
                        for k in a..=b {
                            p[k] = (p[k] + c * p[k] / scale).clamp(bounds[k].0, bounds[k].1);
                        }
                        f(&p)
                    };
                    let (c, v) = golden_min(&line, -span, span, iters);
                    if v.is_finite() && v < best.value {
                        best.value = v;
                        for k in a..=b {
                            best.point[k] = (best.point[k] + c * best.point[k] / scale)
                                .clamp(bounds[k].0, bounds[k].1);
                        }
                    }
                }
                let line = |c: f64| {
                    let mut p = best.point.clone();
                    for k in a..=b {
                        p[k] = (p[k] + c).clamp(bounds[k].0, bounds[k].1);
                    }
                    f(&p)
                };
                let (c, v) = golden_min(&line, -span, span, iters);
                if v.is_finite() && v < best.value {
                    best.value = v;
                    for k in a..=b {
                        best.point[k] = (best.point[k] + c).clamp(bounds[k].0, bounds[k].1);
                    }
                }
            }
        }
        if !(best.value < before - 1e-18 * (1.0 + before.abs())) {
            break;
        }
    }
    best
}

/// Compass search with shrinking steps plus golden-section coordinate sweeps.
fn compass_refine<F: Fn(&[f64]) -> f64>(
    f: &F,
    bounds: &[(f64, f64)],
    mut x: Vec<f64>,
    mut fx: f64,
    init_steps: &[f64],
    cfg: &MinimizerConfig,
) -> Result<Minimum, NumericsError> {
    let dims = bounds.len();
    let extent: f64 = bounds
        .iter()
        .map(|&(lo, hi)| hi - lo)
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut step: Vec<f64> = init_steps
        .iter()
        .map(|&s| if s > 0.0 { s } else { extent * 0.1 })
        .collect();
    let step_floor = extent * 1e-15;

    let mut trial = vec![0.0f64; dims];
    for _round in 0..cfg.refine_iters {
        let mut improved = false;
        // Axis moves, then diagonals between adjacent coordinates: the
        // diagonals matter because piecewise-linear objectives (min/max
        // couplings between neighbouring chain coordinates) have valleys that
        // axis moves alone cannot descend.
        let mut try_move = |delta: &dyn Fn(&mut [f64])| -> Result<(), NumericsError> {
            trial.copy_from_slice(&x);
            delta(&mut trial);
            for d in 0..dims {
                trial[d] = trial[d].clamp(bounds[d].0, bounds[d].1);
            }
            let v = check_finite(f(&trial), &trial)?;
            if v < fx {
                fx = v;
                x.copy_from_slice(&trial);
                improved = true;
            }
            Ok(())
        };
        for d in 0..dims {
            let s = step[d];
            try_move(&|t: &mut [f64]| t[d] += s)?;
            try_move(&|t: &mut [f64]| t[d] -= s)?;
        }
        for d in 0..dims.saturating_sub(1) {
            let (sa, sb) = (step[d], step[d + 1]);
            try_move(&|t: &mut [f64]| {
                t[d] += sa;
                t[d + 1] += sb;
            })?;
            try_move(&|t: &mut [f64]| {
                t[d] -= sa;
                t[d + 1] -= sb;
            })?;
            try_move(&|t: &mut [f64]| {
                t[d] += sa;
                t[d + 1] -= sb;
            })?;
            try_move(&|t: &mut [f64]| {
                t[d] -= sa;
                t[d + 1] += sb;
            })?;
        }
        if !improved {
            for s in step.iter_mut() {
                *s *= 0.5;
            }
            if step.iter().all(|&s| s < step_floor) {
                break;
            }
        }
    }

    // Per-coordinate golden-section polish over the full box range; greedy, so
    // it can only improve the value.
    for _sweep in 0..2 {
        for d in 0..dims {
            let (lo, hi) = bounds[d];
            if hi - lo <= 0.0 {
                continue;
            }
            let line = |y: f64| {
                let mut p = x.clone();
                p[d] = y;
                f(&p)
            };
            let (y, v) = golden_min(&line, lo, hi, cfg.refine_iters);
            if v.is_finite() && v < fx {
                fx = v;
                x[d] = y;
            }
        }
    }

    Ok(Minimum { point: x, value: fx })
}

/// Golden-section minimization on `[a, b]` with a rightmost tie-break: among
/// candidates whose values are exactly equal, the larger coordinate is
/// preferred, so exact plateaus resolve to their right end.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: &F, a0: f64, b0: f64, iters: usize) -> (f64, f64) {
    let (mut a, mut b) = (a0, b0);
    if !(b > a) {
        return (a, f(a));
    }
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            // ties walk right
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        if b - a < f64::EPSILON * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let mut best = (c, fc);
    for cand in [(d, fd), (b0, f(b0)), (a0, f(a0)), (b, f(b))] {
        if cand.1 < best.1 || (cand.1 == best.1 && cand.0 > best.0) {
            best = cand;
        }
    }
    best
}

/// Bisection for the right boundary of the sublevel set `{f <= tau}` between
/// an inside point `l` (`f(l) <= tau`) and an outside point `r` (`f(r) > tau`).
pub(crate) fn bisect_sublevel_edge<F: Fn(f64) -> f64>(f: &F, mut l: f64, mut r: f64, tau: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        if f(m) <= tau {
            l = m;
        } else {
            r = m;
        }
    }
    l
}

/// Core of the rightmost-minimizer search with an explicit tie threshold.
///
/// Scans `n_grid` uniform points, refines the best cells to locate the global
/// minimum `m`, then finds the right edge of the sublevel set
/// `{f <= m + threshold}` and polishes the minimizer inside the rightmost
/// qualifying bracket with a right-biased golden section.
pub(crate) fn rightmost_min_1d_with_threshold<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    n_grid: usize,
    refine_iters: usize,
    threshold: f64,
    multistart: usize,
) -> Result<(f64, f64), NumericsError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(NumericsError::EmptyBox { index: 0, lo, hi });
    }
    if hi == lo {
        let v = check_finite(f(lo), &[lo])?;
        return Ok((lo, v));
    }
    let n = n_grid.max(5);
    let h = (hi - lo) / (n - 1) as f64;
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let y = lo + h * k as f64;
        vals.push(check_finite(f(y), &[y])?);
    }

    // Refine the best cells (by value) to pin down the global minimum.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let mut m_ref = f64::INFINITY;
    let mut argmin_ref = lo;
    for &k in order.iter().take(multistart.max(1)) {
        let a = if k == 0 { lo } else { lo + h * (k - 1) as f64 };
        let b = if k == n - 1 { hi } else { lo + h * (k + 1) as f64 };
        let (y, v) = golden_min(&f, a, b, refine_iters.max(40));
        if v < m_ref || (v == m_ref && y > argmin_ref) {
            m_ref = v;
            argmin_ref = y;
        }
    }

    let tau = m_ref + threshold;

    // Rightmost grid point inside the sublevel set; the refined minimizer
    // itself is a fallback bracket seed when no grid point qualifies (a
    // minimum narrower than the grid spacing).
    let mut k_right: Option<usize> = None;
    for k in (0..n).rev() {
        if vals[k] <= tau {
            k_right = Some(k);
            break;
        }
    }
    let (bracket_l, edge_r) = match k_right {
        Some(k) => {
            let yk = lo + h * k as f64;
            let inside = yk.max(argmin_ref.min(hi));
            if k == n - 1 {
                (yk.min(argmin_ref), hi)
            } else {
                let y_next = lo + h * (k + 1) as f64;
                let edge = bisect_sublevel_edge(&f, inside.min(y_next), y_next, tau, 120);
                ((yk - h).max(lo).min(argmin_ref), edge)
            }
        }
        None => {
            // The sublevel set lies strictly between grid points around the
            // refined minimizer.
            let l = (argmin_ref - h).max(lo);
            let r = (argmin_ref + h).min(hi);
            let edge = if f(r) > tau {
                bisect_sublevel_edge(&f, argmin_ref, r, tau, 120)
            } else {
                r
            };
            (l, edge)
        }
    };

    let (mut y_star, mut v_star) = golden_min(&f, bracket_l.min(edge_r), edge_r, refine_iters.max(60));
    // The sublevel edge itself is a valid rightmost candidate when its value
    // ties the polished one.
    let v_edge = f(edge_r);
    if v_edge <= v_star && edge_r > y_star {
        y_star = edge_r;
        v_star = v_edge;
    }
    if v_star > tau {
        // Polishing never leaves the sublevel set by more than round-off;
        // keep the refined global minimizer if it somehow did.
        y_star = argmin_ref;
        v_star = m_ref;
    }
    Ok((y_star, v_star))
}

/// Finds the rightmost global minimizer of `f` on `[lo, hi]`.
///
/// A dense scan locates the global minimum `m`; points with
/// `f <= m + cfg.tolerance` count as tied, and the returned minimizer is the
/// right edge of the rightmost tied region (polished by a right-biased golden
/// section, so an isolated smooth minimum is returned to full precision while
/// a plateau resolves to its right end).
pub fn rightmost_minimizer_1d<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &MinimizerConfig,
) -> Result<(f64, f64), NumericsError> {
    cfg.validate()?;
    rightmost_min_1d_with_threshold(
        f,
        lo,
        hi,
        cfg.grid_points_per_dim,
        cfg.refine_iters,
        cfg.tolerance,
        cfg.multistart_count,
    )
}

/// Fits `f(x) ~ c * x^sigma` on a geometric grid of `cfg.points` offsets in
/// `[cfg.x_min, cfg.x_max]` by least squares in log-log space. Points with
/// values at or below `cfg.value_floor` are dropped; a negative value is an
/// error (it means the expansion point sits above the true contact).
pub fn fit_loglog_slope<F: Fn(f64) -> f64>(f: F, cfg: &SlopeFitConfig) -> Result<SlopeFit, NumericsError> {
    cfg.validate()?;
    let p = cfg.points;
    let ratio = (cfg.x_max / cfg.x_min).powf(1.0 / (p - 1) as f64);
    let mut xs = Vec::with_capacity(p);
    let mut ys = Vec::with_capacity(p);
    let mut x = cfg.x_min;
    for k in 0..p {
        let v = f(x);
        if !v.is_finite() {
            return Err(NumericsError::NonFiniteObjective { point: vec![x] });
        }
        if v < -cfg.value_floor {
            return Err(NumericsError::NegativeValue { x, value: v });
        }
        if v > cfg.value_floor {
            xs.push(x.ln());
            ys.push(v.ln());
        }
        x = if k + 2 == p { cfg.x_max } else { x * ratio };
    }
    let used = xs.len();
    if used < 5 {
        return Err(NumericsError::TooFewPoints { got: used, need: 5 });
    }
    let nf = used as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for k in 0..used {
        let dx = xs[k] - mx;
        let dy = ys[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let sigma = sxy / sxx;
    let intercept = my - sigma * mx;
    let ss_res: f64 = (0..used)
        .map(|k| {
            let r = ys[k] - (intercept + sigma * xs[k]);
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit {
        sigma,
        intercept,
        r2,
        points_used: used,
        low_quality: r2 < cfg.min_r2,
    })
}

/// Inverts a symmetric positive-definite matrix (dimension at most 32) by
/// Cholesky factorization. Symmetry is required within 1e-12 entrywise.
pub fn invert_spd(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NumericsError> {
    let d = m.len();
    if d == 0 {
        return Err(NumericsError::InvalidConfig("empty matrix".into()));
    }
    if d > 32 {
        return Err(NumericsError::DimensionTooLarge(d));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != d {
            return Err(NumericsError::InvalidConfig(format!(
                "row {i} has {} entries in a {d}x{d} matrix",
                row.len()
            )));
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let diff = (m[i][j] - m[j][i]).abs();
            if diff > 1e-12 {
                return Err(NumericsError::NotSymmetric { i, j, diff });
            }
        }
    }

    // Cholesky: m = L L^T.
    let mut l = vec![vec![0.0f64; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(NumericsError::NotPositiveDefinite { index: i, pivot: s });
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }

    // Invert via L z = e_k (forward), L^T x = z (backward).
    let mut inv = vec![vec![0.0f64; d]; d];
    let mut z = vec![0.0f64; d];
    for col in 0..d {
        for i in 0..d {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * z[k];
            }
            z[i] = s / l[i][i];
        }
        for i in (0..d).rev() {
            let mut s = z[i];
            for k in (i + 1)..d {
                s -= l[k][i] * inv[k][col];
            }
            inv[i][col] = s / l[i][i];
        }
    }
    // Symmetrize against round-off.
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = avg;
            inv[j][i] = avg;
        }
    }
    Ok(inv)
}
