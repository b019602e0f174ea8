//! Weak-limit machinery: local matching of windows around the origin, the
//! two-sided weak distance, orbit sampling and return-vector scans.
//!
//! The core ball `B_r(0)` is closed here; points in the annulus
//! `r < |p| < r + guard` may serve as partners but are never reported as
//! unmatched.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::frames::{apply_frame_operator, norm_sq, ExpPolynomial};
use crate::pointset::{translate, FrequencyGenerator, WindowedPointSet};
use crate::spectrum::Spectrum;

pub const DEFAULT_GUARD: f64 = 1.0;

/// Number of trailing translates that must agree before a candidate limit
/// is declared.
pub const CLUSTER_TAIL: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<(usize, usize)>,
    pub epsilon_achieved: f64,
    pub unmatched_a: Vec<usize>,
    pub unmatched_b: Vec<usize>,
}

fn check_window(w: &WindowedPointSet, reach: f64, name: &str) -> Result<()> {
    if w.center.abs() + reach > w.radius {
        return Err(invalid(format!(
            "window {name} = B_{}({}) does not contain B_{reach}(0)",
            w.radius, w.center
        )));
    }
    Ok(())
}

fn check_args(a: &WindowedPointSet, b: &WindowedPointSet, r: f64, guard: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(format!("r must be positive, got {r}")));
    }
    if !(guard.is_finite() && guard > 0.0) {
        return Err(invalid(format!("guard must be positive, got {guard}")));
    }
    check_window(a, r + guard, "A")?;
    check_window(b, r + guard, "B")
}

/// Greedy nearest-neighbour matching of `A ∩ B_r(0)` against
/// `B ∩ B_r(0)`. Candidate pairs need one endpoint in the closed core and
/// both inside `B_{r+guard}(0)`, and are at most `guard` apart; pairs are
/// taken in order of increasing distance, ties broken by index.
pub fn local_match(a: &WindowedPointSet, b: &WindowedPointSet, r: f64, guard: f64) -> Result<MatchResult> {
    check_args(a, b, r, guard)?;
    let reach = r + guard;
    let in_core = |p: f64| p.abs() <= r;

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &p) in a.points.iter().enumerate() {
        if p.abs() >= reach {
            continue;
        }
        let lo = b.points.partition_point(|&q| q < p - guard);
        for (j, &q) in b.points.iter().enumerate().skip(lo) {
            if q > p + guard {
                break;
            }
            if q.abs() < reach && (in_core(p) || in_core(q)) {
                candidates.push(((p - q).abs(), i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    let mut eps: f64 = 0.0;
    for (d, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
            eps = eps.max(d);
        }
    }
    pairs.sort_unstable();
    let unmatched = |pts: &[f64], used: &[bool]| -> Vec<usize> {
        (0..pts.len()).filter(|&k| in_core(pts[k]) && !used[k]).collect()
    };
    Ok(MatchResult {
        unmatched_a: unmatched(&a.points, &used_a),
        unmatched_b: unmatched(&b.points, &used_b),
        pairs,
        epsilon_achieved: eps,
    })
}

fn nearest_distance(sorted: &[f64], p: f64) -> f64 {
    let k = sorted.partition_point(|&q| q < p);
    let right = sorted.get(k).map_or(f64::INFINITY, |q| q - p);
    let left = k.checked_sub(1).map_or(f64::INFINITY, |k| p - sorted[k]);
    left.min(right)
}

fn one_sided(from: &[f64], to: &[f64], r: f64) -> f64 {
    from.iter()
        .filter(|p| p.abs() <= r)
        .map(|&p| nearest_distance(to, p))
        .fold(0.0, f64::max)
}

/// Smallest `ε` with `A ∩ B_r ⊆ B + [-ε, ε]` and `B ∩ B_r ⊆ A + [-ε, ε]`,
/// partners drawn from `B_{r+guard}(0)`. Infinite when a core point has no
/// partner at all.
pub fn weak_distance(a: &WindowedPointSet, b: &WindowedPointSet, r: f64, guard: f64) -> Result<f64> {
    check_args(a, b, r, guard)?;
    Ok(weak_distance_unchecked(&a.points, &b.points, r, guard))
}

fn weak_distance_unchecked(a: &[f64], b: &[f64], r: f64, guard: f64) -> f64 {
    let reach = r + guard;
    let clip = |pts: &[f64]| -> Vec<f64> { pts.iter().copied().filter(|p| p.abs() < reach).collect() };
    let (a, b) = (clip(a), clip(b));
    one_sided(&a, &b, r).max(one_sided(&b, &a, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub translates: Vec<f64>,
    /// `(Λ - x_n) ∩ B_{r+guard}(0)`, all centered at 0.
    pub windows: Vec<WindowedPointSet>,
    /// Largest weak distance among the trailing windows.
    pub tail_spread: Option<f64>,
    pub candidate_limit: Option<WindowedPointSet>,
    pub r: f64,
    pub eps_cluster: f64,
}

/// `(Λ - x) ∩ B_radius(0)`.
pub fn translate_window(gen: &FrequencyGenerator, x: f64, radius: f64) -> Result<WindowedPointSet> {
    let mut w = translate(&gen.realize(x, radius)?, x);
    w.center = 0.0;
    // rounding in p - x can push a point onto the boundary
    w.points.retain(|p| p.abs() < radius);
    Ok(w)
}

/// Realizes `Λ - x_n` near the origin for every translate and declares the
/// last window a candidate weak limit when the trailing
/// [`CLUSTER_TAIL`] windows are pairwise within `eps_cluster`.
pub fn orbit_sample(gen: &FrequencyGenerator, translates: &[f64], r: f64, eps_cluster: f64) -> Result<OrbitSample> {
    if translates.is_empty() {
        return Err(invalid("orbit needs at least one translate"));
    }
    if !(r.is_finite() && r > 0.0) || !(eps_cluster >= 0.0) {
        return Err(invalid("orbit needs r > 0 and eps_cluster >= 0"));
    }
    let radius = r + DEFAULT_GUARD;
    let windows: Vec<WindowedPointSet> = translates
        .par_iter()
        .map(|&x| translate_window(gen, x, radius))
        .collect::<Result<_>>()?;

    let tail = &windows[windows.len().saturating_sub(CLUSTER_TAIL)..];
    let tail_spread = (tail.len() >= 2).then(|| {
        let mut spread: f64 = 0.0;
        for (i, u) in tail.iter().enumerate() {
            for v in &tail[i + 1..] {
                spread = spread.max(weak_distance_unchecked(&u.points, &v.points, r, DEFAULT_GUARD));
            }
        }
        spread
    });
    let candidate_limit = match tail_spread {
        Some(s) if s <= eps_cluster => windows.last().cloned(),
        _ => None,
    };
    Ok(OrbitSample {
        translates: translates.to_vec(),
        windows,
        tail_spread,
        candidate_limit,
        r,
        eps_cluster,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnVector {
    pub x: f64,
    pub distance: f64,
}

/// Scans `x = k·step` over `[-halfwidth, halfwidth]` and keeps those with
/// `weak_distance(Λ, Λ - x, r) ≤ eps`.
pub fn repetitivity_probe(
    gen: &FrequencyGenerator,
    r: f64,
    eps: f64,
    search_halfwidth: f64,
    step: f64,
) -> Result<Vec<ReturnVector>> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(format!("r must be positive, got {r}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if !(step > 0.0 && step <= eps / 2.0) {
        return Err(invalid(format!("step must satisfy 0 < step <= eps/2, got {step}")));
    }
    if !(search_halfwidth.is_finite() && search_halfwidth >= 0.0) {
        return Err(invalid("search_halfwidth must be finite and >= 0"));
    }
    let reach = r + DEFAULT_GUARD;
    let all = gen.realize(0.0, search_halfwidth + reach + 1.0)?;
    let base = all.restrict(0.0, reach).points;
    let k_max = (search_halfwidth / step + 1e-9).floor() as i64;
    let hits: Vec<Option<ReturnVector>> = (-k_max..=k_max)
        .into_par_iter()
        .map(|k| {
            let x = k as f64 * step;
            let lo = all.points.partition_point(|&p| p <= x - reach);
            let hi = all.points.partition_point(|&p| p < x + reach);
            let shifted: Vec<f64> = all.points[lo..hi].iter().map(|p| p - x).collect();
            let d = weak_distance_unchecked(&base, &shifted, r, DEFAULT_GUARD);
            (d <= eps).then_some(ReturnVector { x, distance: d })
        })
        .collect();
    Ok(hits.into_iter().flatten().collect())
}

/// Largest gap between consecutive return translates; `None` with fewer
/// than two.
pub fn max_return_gap(returns: &[ReturnVector]) -> Option<f64> {
    returns.windows(2).map(|w| w[1].x - w[0].x).reduce(f64::max)
}

/// `‖S_{(Λ - x_n) ∩ B_R} f - S_limit f‖` for each translate.
///
/// Points of `Λ - x_n` that cross `|y| = R` as `n` varies leave a floor of
/// order `1/R` in the sequence; pick `R` away from them.
pub fn sot_convergence_probe(
    s: &Spectrum,
    gen: &FrequencyGenerator,
    translates: &[f64],
    limit: &WindowedPointSet,
    f: &ExpPolynomial,
    r_truncation: f64,
) -> Result<Vec<f64>> {
    if !(r_truncation.is_finite() && r_truncation > 0.0) {
        return Err(invalid(format!("truncation radius must be positive, got {r_truncation}")));
    }
    if f.freqs().iter().any(|g| g.abs() >= r_truncation / 2.0) {
        return Err(invalid("frequencies of f must lie in B_{R/2}(0)"));
    }
    let target = apply_frame_operator(s, limit, f);
    translates
        .par_iter()
        .map(|&x| {
            let w = translate_window(gen, x, r_truncation)?;
            let diff = apply_frame_operator(s, &w, f).sub(&target);
            Ok(norm_sq(s, &diff).sqrt())
        })
        .collect()
}
