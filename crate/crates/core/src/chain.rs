//! Chain composition of edge curves.
//!
//! The pairwise marginal between two vertices of a block model reduces to the
//! chain of edges along their unique shortest path. For the chain on
//! coordinates `(x0, t1, .., t_{m-1}, y)` with edge gauges `g_1..g_m`, the
//! joint gauge is `sum_k g_k - sum of interior |t_k|`, and the pair marginal
//! is its minimum over the interior.
//!
//! Evaluated naively, that minimum is a difference of ~1-sized terms and
//! carries absolute noise ~1e-15 — far too coarse for flat contact points.
//! Grouping the terms per edge instead gives the identity
//!
//! ```text
//! g_pair(s, y) - 1 = min over t of  [g_1(s, t1) - 1]
//!                                 + sum_{k=2..m} [g_k(t_{k-1}, t_k) - |t_{k-1}|]
//! ```
//!
//! where every bracket is nonnegative (each gauge dominates the magnitude of
//! each of its arguments) and equals `|u| * excess(sgn u, v/|u|)` of the edge
//! curve — a cancellation-free closed form. The composed excess is therefore
//! a sum of nonnegative terms, each with relative precision, and the whole
//! pipeline stays accurate near contacts. The only remaining noise is the
//! interior minimization itself, reflected in [`PairCurve::excess_floor`].

use std::sync::{Arc, Mutex};

use crate::curve::{PairCurve, Sign};
use crate::gauge::Margin;
use crate::numerics::golden_min;

/// Noise floor of the composed excess: interior golden-section/compass
/// refinement resolves kinked objectives to roughly this absolute level.
pub(crate) const COMPOSED_FLOOR: f64 = 1e-12;

/// Local refinement on a box: compass search (axes plus adjacent-coordinate
/// diagonals, shrinking steps) followed by cyclic golden-section line
/// sweeps. The sweeps run over each coordinate and along two families of
/// contiguous-run directions `[a..=b]`: proportional to the current values
/// (rescaling the run) and constant across the run (translating it). Chain
/// terms couple neighbouring coordinates through kinks along rays
/// `t_k / t_{k-1} = const` and creases `t_k = t_{k-1}`, so descent from a
/// point sitting on several of them needs whole runs moved together — axis
/// and fixed-step diagonal moves both stall there, and a run parked at zero
/// only responds to the translation family.
fn refine_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: f64,
    hi: f64,
    mut t: Vec<f64>,
    mut ft: f64,
    init_step: f64,
) -> (Vec<f64>, f64) {
    let dims = t.len();
    let span = hi - lo;
    let floor = 1e-18 * span;
    let mut step = vec![init_step; dims];
    let mut trial = vec![0.0f64; dims];

    for _round in 0..230 {
        let mut improved = false;
        let mut probe = |delta: &dyn Fn(&mut [f64])| {
            trial.copy_from_slice(&t);
            delta(&mut trial);
            for v in trial.iter_mut() {
                *v = v.clamp(lo, hi);
            }
            let fv = f(&trial);
            if fv < ft {
                ft = fv;
                t.copy_from_slice(&trial);
                improved = true;
            }
        };
        for d in 0..dims {
            let sd = step[d];
            probe(&|z: &mut [f64]| z[d] += sd);
            probe(&|z: &mut [f64]| z[d] -= sd);
        }
        for d in 0..dims.saturating_sub(1) {
            let (sa, sb) = (step[d], step[d + 1]);
            probe(&|z: &mut [f64]| {
                z[d] += sa;
                z[d + 1] += sb;
            });
            probe(&|z: &mut [f64]| {
                z[d] -= sa;
                z[d + 1] -= sb;
            });
            probe(&|z: &mut [f64]| {
                z[d] += sa;
                z[d + 1] -= sb;
            });
            probe(&|z: &mut [f64]| {
                z[d] -= sa;
                z[d + 1] += sb;
            });
        }
        if !improved {
            for v in step.iter_mut() {
                *v *= 0.5;
            }
            if step.iter().all(|&v| v < floor) {
                break;
            }
        }
    }

    // Golden-section sweeps, repeated until a full cycle yields no
    // improvement.
    for _cycle in 0..6 {
        let before = ft;
        for d in 0..dims {
            let line = |v: f64| {
                let mut p = t.clone();
                p[d] = v;
                f(&p)
            };
            let (v, fv) = golden_min(&line, lo, hi, 95);
            if fv < ft {
                ft = fv;
                t[d] = v;
            }
        }
        for a in 0..dims {
            for b in (a + 1)..dims {
                // rescaling the run [a..=b]
                let scale = t[a..=b].iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                if scale > 0.0 {
                    let line = |c: f64| {
                        let mut p = t.clone();
                        for k in a..=b {
                            p[k] = (p[k] + c * p[k] / scale).clamp(lo, hi);
                        }
                        f(&p)
                    };
                    let (c, fv) = golden_min(&line, -span, span, 95);
                    if fv < ft {
                        ft = fv;
                        for k in a..=b {
                            t[k] = (t[k] + c * t[k] / scale).clamp(lo, hi);
                        }
                    }
                }
                // translating the run [a..=b]
                let line = |c: f64| {
                    let mut p = t.clone();
                    for k in a..=b {
                        p[k] = (p[k] + c).clamp(lo, hi);
                    }
                    f(&p)
                };
                let (c, fv) = golden_min(&line, -span, span, 95);
                if fv < ft {
                    ft = fv;
                    for k in a..=b {
                        t[k] = (t[k] + c).clamp(lo, hi);
                    }
                }
            }
        }
        if !(ft < before - 1e-22 * (1.0 + before.abs())) {
            break;
        }
    }
    (t, ft)
}

/// A chain of oriented edge curves, evaluated as a single pair curve.
pub(crate) struct ComposedCurve {
    edges: Vec<Arc<dyn PairCurve>>,
    margin: Margin,
    convex: bool,
    /// Recent `(sign, y, interior argmin)` solutions, reused as refinement
    /// seeds for nearby queries (monotone query sequences dominate usage).
    warm: Mutex<Vec<(f64, f64, Vec<f64>)>>,
}

impl ComposedCurve {
    pub(crate) fn new(edges: Vec<Arc<dyn PairCurve>>) -> ComposedCurve {
        assert!(!edges.is_empty(), "a chain needs at least one edge");
        let margin = edges[0].margin();
        debug_assert!(edges.iter().all(|e| e.margin() == margin));
        let convex = margin == Margin::Exponential && edges.iter().all(|e| e.convex());
        ComposedCurve { edges, margin, convex, warm: Mutex::new(Vec::new()) }
    }

    /// One chain term `g(u, v) - |u|` in excess form.
    fn link_term(&self, k: usize, u: f64, v: f64) -> f64 {
        let au = u.abs();
        if au > 1e-300 {
            let r = v / au;
            if r.is_finite() && r.abs() < 1e12 {
                return au * self.edges[k].excess(Sign::of(u), r);
            }
        }
        self.edges[k].eval2(u, v) - au
    }

    /// The excess-space chain objective at interior point `t`.
    fn objective(&self, s: Sign, y: f64, t: &[f64]) -> f64 {
        let m = self.edges.len();
        let mut total = self.edges[0].excess(s, t[0]);
        for k in 1..m - 1 {
            total += self.link_term(k, t[k - 1], t[k]);
        }
        total += self.link_term(m - 1, t[m - 2], y);
        total
    }

    /// Minimizes the chain objective over the interior box. Dense-grid
    /// seeding (or a warm seed from a nearby earlier query), then compass
    /// refinement with adjacent-coordinate diagonals and per-coordinate
    /// golden-section sweeps. Deterministic for a fixed query sequence.
    fn minimize_interior(&self, s: Sign, y: f64) -> f64 {
        let dims = self.edges.len() - 1;
        let b = 2.0 + y.abs();
        let (lo, hi) = match self.margin {
            Margin::Exponential => (0.0, b),
            Margin::Laplace => (-b, b),
        };

        let warm_seed: Option<Vec<f64>> = {
            let cache = self.warm.lock().unwrap_or_else(|e| e.into_inner());
            cache
                .iter()
                .filter(|(cs, cy, _)| *cs == s.as_f64() && (cy - y).abs() <= 0.25 * (1.0 + y.abs()))
                .min_by(|a, b2| (a.1 - y).abs().total_cmp(&(b2.1 - y).abs()))
                .map(|(_, _, t)| t.clone())
        };

        let n = if warm_seed.is_some() {
            3
        } else {
            match dims {
                1 => 65,
                2 => 25,
                3 => 13,
                4 => 9,
                5 => 7,
                _ => 5,
            }
        };

        // Dense scan, keeping the 4 best cells as refinement seeds.
        let h = (hi - lo) / (n - 1) as f64;
        let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut keep = |v: f64, t: &[f64], cap: usize| {
            if seeds.len() < cap {
                seeds.push((v, t.to_vec()));
                seeds.sort_by(|a, b2| a.0.total_cmp(&b2.0));
            } else if v < seeds.last().unwrap().0 {
                seeds.pop();
                seeds.push((v, t.to_vec()));
                seeds.sort_by(|a, b2| a.0.total_cmp(&b2.0));
            }
        };
        let mut idx = vec![0usize; dims];
        let mut t = vec![0.0f64; dims];
        'grid: loop {
            for d in 0..dims {
                t[d] = lo + h * idx[d] as f64;
            }
            keep(self.objective(s, y, &t), &t, 4);
            let mut d = 0;
            loop {
                if d == dims {
                    break 'grid;
                }
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
        if let Some(seed) = warm_seed {
            let clamped: Vec<f64> = seed.iter().map(|v| v.clamp(lo, hi)).collect();
            keep(self.objective(s, y, &clamped), &clamped, 5);
        }

        let mut best_v = f64::INFINITY;
        let mut best_t: Vec<f64> = Vec::new();
        let init_step = h.max(1e-3 * b);
        for (v0, t0) in &seeds {
            let (tr, vr) = self.refine(s, y, lo, hi, t0.clone(), *v0, init_step);
            if vr < best_v {
                best_v = vr;
                best_t = tr;
            }
        }

        {
            let mut cache = self.warm.lock().unwrap_or_else(|e| e.into_inner());
            cache.push((s.as_f64(), y, best_t));
            if cache.len() > 6 {
                cache.remove(0);
            }
        }
        best_v
    }

    fn refine(
        &self,
        s: Sign,
        y: f64,
        lo: f64,
        hi: f64,
        t: Vec<f64>,
        ft: f64,
        init_step: f64,
    ) -> (Vec<f64>, f64) {
        refine_box(&|z| self.objective(s, y, z), lo, hi, t, ft, init_step)
    }

    /// Plain-space evaluation used only when the conditioning argument is 0
    /// (no excess form exists there); accuracy is relative to the value,
    /// which is fine away from the unit level.
    fn eval_plain(&self, x0: f64, xm: f64) -> f64 {
        let m = self.edges.len();
        if m == 1 {
            return self.edges[0].eval2(x0, xm);
        }
        let dims = m - 1;
        // Bound: at the minimizer every interior |t_k| is at most the value
        // at the all-zero interior point.
        let zero = vec![0.0f64; dims];
        let plain = |t: &[f64]| {
            let mut total = self.edges[0].eval2(x0, t[0]);
            for k in 1..m - 1 {
                total += self.edges[k].eval2(t[k - 1], t[k]) - t[k - 1].abs();
            }
            total + self.edges[m - 1].eval2(t[m - 2], xm) - t[m - 2].abs()
        };
        let u0 = plain(&zero);
        let (lo, hi) = match self.margin {
            Margin::Exponential => (0.0, u0),
            Margin::Laplace => (-u0, u0),
        };
        if !(hi > lo) {
            return u0;
        }
        let n = match dims {
            1 => 65,
            2 => 25,
            3 => 13,
            4 => 9,
            5 => 7,
            _ => 5,
        };
        let h = (hi - lo) / (n - 1) as f64;
        let mut idx = vec![0usize; dims];
        let mut t = vec![0.0f64; dims];
        let mut best_v = f64::INFINITY;
        let mut best_t = zero;
        'grid: loop {
            for d in 0..dims {
                t[d] = lo + h * idx[d] as f64;
            }
            let v = plain(&t);
            if v < best_v {
                best_v = v;
                best_t = t.clone();
            }
            let mut d = 0;
            loop {
                if d == dims {
                    break 'grid;
                }
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
        let (_, refined) = refine_box(&plain, lo, hi, best_t, best_v, h.max(1e-3 * (hi - lo)));
        refined
    }
}

impl PairCurve for ComposedCurve {
    fn margin(&self) -> Margin {
        self.margin
    }

    fn convex(&self) -> bool {
        self.convex
    }

    fn eval2(&self, x1: f64, x2: f64) -> f64 {
        if self.edges.len() == 1 {
            return self.edges[0].eval2(x1, x2);
        }
        let a = x1.abs();
        if a > 1e-300 {
            a * (1.0 + self.excess(Sign::of(x1), x2 / a))
        } else {
            self.eval_plain(x1, x2)
        }
    }

    fn excess(&self, s: Sign, y: f64) -> f64 {
        if self.edges.len() == 1 {
            return self.edges[0].excess(s, y);
        }
        self.minimize_interior(s, y)
    }

    fn excess_floor(&self) -> f64 {
        if self.edges.len() == 1 {
            return self.edges[0].excess_floor();
        }
        self.edges
            .iter()
            .map(|e| e.excess_floor())
            .fold(COMPOSED_FLOOR, f64::max)
    }

    fn known_alpha(&self, s: Sign) -> Option<f64> {
        if self.edges.len() == 1 {
            return self.edges[0].known_alpha(s);
        }
        // composed curves are the numeric oracle; they never advertise
        // closed forms, so recurrence-vs-oracle comparisons stay independent
        None
    }

    fn known_beta(&self) -> Option<f64> {
        if self.edges.len() == 1 {
            return self.edges[0].known_beta();
        }
        None
    }
}
