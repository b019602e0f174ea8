//! Discrete frequency sets `Λ ⊂ ℝ`: symbolic generators, windowed
//! realization, separation statistics and Beurling density scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Largest number of points a single realization may produce.
pub const MAX_REALIZED_POINTS: usize = 10_000_000;

/// Symbolic description of a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyGenerator {
    /// `step·ℤ + offset`.
    Lattice {
        step: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Union of the parts; coincident points are kept once.
    UnionOf { parts: Vec<FrequencyGenerator> },
    /// Every base point moved by an i.i.d. uniform offset in
    /// `[-amplitude, amplitude]`, drawn from a stream keyed by the point's
    /// index in the base so that realizations agree across windows.
    Perturbed {
        base: Box<FrequencyGenerator>,
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `{ p₁(γ) + offset : γ = basis·(n, m), p₂(γ) ∈ [window₀, window₁) }`.
    CutProject {
        basis: [[f64; 2]; 2],
        window: [f64; 2],
        #[serde(default)]
        offset: f64,
    },
    /// A finite, strictly increasing list.
    Explicit { points: Vec<f64> },
}

/// `Λ ∩ B_radius(center)`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedPointSet {
    pub points: Vec<f64>,
    pub center: f64,
    pub radius: f64,
}

impl WindowedPointSet {
    pub fn new(points: Vec<f64>, center: f64, radius: f64) -> Result<Self> {
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("window points must be strictly increasing"));
        }
        if let Some(p) = points.iter().find(|p| (*p - center).abs() >= radius) {
            return Err(invalid(format!(
                "point {p} lies outside B_{radius}({center})"
            )));
        }
        Ok(Self {
            points,
            center,
            radius,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The sub-window `B_radius(center)` of this window.
    pub fn restrict(&self, center: f64, radius: f64) -> WindowedPointSet {
        let points = self
            .points
            .iter()
            .copied()
            .filter(|p| (p - center).abs() < radius)
            .collect();
        WindowedPointSet {
            points,
            center,
            radius,
        }
    }
}

/// `Λ - x`: shifts every point and the window center.
pub fn translate(pts: &WindowedPointSet, x: f64) -> WindowedPointSet {
    WindowedPointSet {
        points: pts.points.iter().map(|p| p - x).collect(),
        center: pts.center - x,
        radius: pts.radius,
    }
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over a combined word
    let mut z = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b)
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_count(requested: f64) -> Result<()> {
    if !(requested <= MAX_REALIZED_POINTS as f64) {
        return Err(LabError::ResourceLimit {
            what: "realized points",
            requested: if requested.is_finite() {
                requested as usize
            } else {
                usize::MAX
            },
            limit: MAX_REALIZED_POINTS,
        });
    }
    Ok(())
}

impl FrequencyGenerator {
    pub fn lattice(step: f64, offset: f64) -> Self {
        Self::Lattice { step, offset }
    }

    /// The Fibonacci cut-and-project set: basis `[[1, φ], [1, -1/φ]]`,
    /// window `[0, 1)`, density `1/√5`.
    pub fn fibonacci() -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        Self::CutProject {
            basis: [[1.0, phi], [1.0, -1.0 / phi]],
            window: [0.0, 1.0],
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Lattice { step, offset } => {
                if !(step.is_finite() && *step > 0.0) || !offset.is_finite() {
                    return Err(invalid(format!(
                        "lattice step must be positive and finite (got step={step}, offset={offset})"
                    )));
                }
            }
            Self::UnionOf { parts } => {
                if parts.is_empty() {
                    return Err(invalid("union needs at least one part"));
                }
                for p in parts {
                    p.validate()?;
                }
            }
            Self::Perturbed {
                base, amplitude, ..
            } => {
                base.validate()?;
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(invalid(format!(
                        "perturbation amplitude must be finite and >= 0 (got {amplitude})"
                    )));
                }
                if let Self::Lattice { step, .. } = base.as_ref() {
                    if 2.0 * amplitude >= *step {
                        return Err(invalid(format!(
                            "perturbation amplitude {amplitude} must be below half the lattice step {step}"
                        )));
                    }
                }
            }
            Self::CutProject {
                basis,
                window,
                offset,
            } => {
                if basis.iter().flatten().any(|v| !v.is_finite())
                    || window.iter().any(|v| !v.is_finite())
                    || !offset.is_finite()
                {
                    return Err(invalid("cut-and-project parameters must be finite"));
                }
                let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
                if det.abs() < 1e-9 {
                    return Err(invalid(format!(
                        "cut-and-project basis is (near-)singular: det = {det}"
                    )));
                }
            }
            Self::Explicit { points } => {
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(invalid("explicit points must be finite"));
                }
                if points.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("explicit points must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    /// The generator of `Λ - x`. Perturbation keys are preserved, so the
    /// translated set is exactly the translate of the realized set.
    pub fn translated(&self, x: f64) -> Self {
        match self {
            Self::Lattice { step, offset } => Self::Lattice {
                step: *step,
                offset: offset - x,
            },
            Self::UnionOf { parts } => Self::UnionOf {
                parts: parts.iter().map(|p| p.translated(x)).collect(),
            },
            Self::Perturbed {
                base,
                amplitude,
                seed,
            } => Self::Perturbed {
                base: Box::new(base.translated(x)),
                amplitude: *amplitude,
                seed: *seed,
            },
            Self::CutProject {
                basis,
                window,
                offset,
            } => Self::CutProject {
                basis: *basis,
                window: *window,
                offset: offset - x,
            },
            Self::Explicit { points } => Self::Explicit {
                points: points.iter().map(|p| p - x).collect(),
            },
        }
    }

    /// Replaces the seed of every perturbation in the tree.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            Self::UnionOf { parts } => Self::UnionOf {
                parts: parts.iter().map(|p| p.with_seed(new_seed)).collect(),
            },
            Self::Perturbed {
                base, amplitude, ..
            } => Self::Perturbed {
                base: Box::new(base.with_seed(new_seed)),
                amplitude: *amplitude,
                seed: new_seed,
            },
            other => other.clone(),
        }
    }

    /// `Λ ∩ B_radius(center)`.
    pub fn realize(&self, center: f64, radius: f64) -> Result<WindowedPointSet> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(invalid(format!(
                "window needs finite center and positive radius (got center={center}, radius={radius})"
            )));
        }
        self.validate()?;
        let mut keyed = self.realize_keyed(center, radius)?;
        keyed.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut points: Vec<f64> = keyed.into_iter().map(|(_, p)| p).collect();
        points.dedup();
        Ok(WindowedPointSet {
            points,
            center,
            radius,
        })
    }

    /// Points in the window paired with a stable identity key.
    fn realize_keyed(&self, center: f64, radius: f64) -> Result<Vec<(u64, f64)>> {
        match self {
            Self::Lattice { step, offset } => {
                check_count(2.0 * radius / step + 2.0)?;
                let lo = ((center - radius - offset) / step).floor() as i64 - 1;
                let hi = ((center + radius - offset) / step).ceil() as i64 + 1;
                Ok((lo..=hi)
                    .map(|n| (n as u64, n as f64 * step + offset))
                    .filter(|&(_, p)| (p - center).abs() < radius)
                    .collect())
            }
            Self::UnionOf { parts } => {
                let mut out = Vec::new();
                for (idx, part) in parts.iter().enumerate() {
                    let sub = part.realize_keyed(center, radius)?;
                    out.extend(sub.into_iter().map(|(k, p)| (mix(idx as u64 + 1, k), p)));
                    check_count(out.len() as f64)?;
                }
                Ok(out)
            }
            Self::Perturbed {
                base,
                amplitude,
                seed,
            } => {
                let eta = *amplitude;
                let mut raw = base.realize_keyed(center, radius + eta)?;
                if eta > 0.0 && raw.len() >= 2 {
                    raw.sort_by(|a, b| a.1.total_cmp(&b.1));
                    let sep = raw
                        .windows(2)
                        .map(|w| w[1].1 - w[0].1)
                        .fold(f64::INFINITY, f64::min);
                    if 2.0 * eta >= sep {
                        return Err(invalid(format!(
                            "perturbation amplitude {eta} must be below half the base separation {sep}"
                        )));
                    }
                }
                Ok(raw
                    .into_iter()
                    .map(|(key, p)| {
                        if eta == 0.0 {
                            return (key, p);
                        }
                        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                        rng.set_stream(key);
                        (key, p + rng.random_range(-eta..=eta))
                    })
                    .filter(|&(_, p)| (p - center).abs() < radius)
                    .collect())
            }
            Self::CutProject {
                basis,
                window,
                offset,
            } => cut_and_project_keyed(basis, *window, center - offset, radius)
                .map(|v| v.into_iter().map(|(k, p)| (k, p + offset)).collect()),
            Self::Explicit { points } => Ok(points
                .iter()
                .enumerate()
                .filter(|(_, p)| (*p - center).abs() < radius)
                .map(|(i, &p)| (i as u64, p))
                .collect()),
        }
    }
}

/// Cut-and-project points `p₁(γ)` in `B_radius(center)` with `p₂(γ)` in the
/// half-open window, for `γ = basis·(n, m)`.
pub fn cut_and_project_points(
    basis: [[f64; 2]; 2],
    window: [f64; 2],
    center: f64,
    radius: f64,
) -> Result<WindowedPointSet> {
    FrequencyGenerator::CutProject {
        basis,
        window,
        offset: 0.0,
    }
    .realize(center, radius)
}

fn cut_and_project_keyed(
    basis: &[[f64; 2]; 2],
    window: [f64; 2],
    center: f64,
    radius: f64,
) -> Result<Vec<(u64, f64)>> {
    let [c, d] = window;
    if c >= d {
        return Ok(Vec::new());
    }
    let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
    if det.abs() < 1e-9 {
        return Err(invalid(format!("near-singular basis, det = {det}")));
    }
    check_count(2.0 * radius * (d - c) / det.abs() + 2.0)?;

    // Preimage of the box (center ± radius) × [c, d) under the basis.
    let inv = [
        [basis[1][1] / det, -basis[0][1] / det],
        [-basis[1][0] / det, basis[0][0] / det],
    ];
    let mut n_rng = (f64::INFINITY, f64::NEG_INFINITY);
    let mut m_rng = (f64::INFINITY, f64::NEG_INFINITY);
    for u in [center - radius, center + radius] {
        for v in [c, d] {
            let n = inv[0][0] * u + inv[0][1] * v;
            let m = inv[1][0] * u + inv[1][1] * v;
            n_rng = (n_rng.0.min(n), n_rng.1.max(n));
            m_rng = (m_rng.0.min(m), m_rng.1.max(m));
        }
    }
    // Iterate the shorter index range; solve for the other one.
    let outer_is_m = m_rng.1 - m_rng.0 <= n_rng.1 - n_rng.0;
    let (outer, inner_col, outer_col) = if outer_is_m {
        (m_rng, 0usize, 1usize)
    } else {
        (n_rng, 1usize, 0usize)
    };
    let span = outer.1 - outer.0;
    check_count(span)?;

    let lo = outer.0.floor() as i64 - 1;
    let hi = outer.1.ceil() as i64 + 1;
    let mut out = Vec::new();
    for k in lo..=hi {
        let kf = k as f64;
        // Each row gives coeff·j + rest ∈ [lo_b, hi_b].
        let rows = [
            (basis[0][inner_col], basis[0][outer_col] * kf, center - radius, center + radius),
            (basis[1][inner_col], basis[1][outer_col] * kf, c, d),
        ];
        let mut j_lo = f64::NEG_INFINITY;
        let mut j_hi = f64::INFINITY;
        let mut feasible = true;
        for &(coef, rest, lo_b, hi_b) in &rows {
            if coef == 0.0 {
                if rest < lo_b - 1e-9 * lo_b.abs().max(1.0) || rest > hi_b + 1e-9 * hi_b.abs().max(1.0) {
                    feasible = false;
                }
                continue;
            }
            let (a, b) = ((lo_b - rest) / coef, (hi_b - rest) / coef);
            j_lo = j_lo.max(a.min(b));
            j_hi = j_hi.min(a.max(b));
        }
        if !feasible || j_lo > j_hi + 1.0 {
            continue;
        }
        for j in (j_lo.floor() as i64 - 1)..=(j_hi.ceil() as i64 + 1) {
            let (n, m) = if outer_is_m { (j, k) } else { (k, j) };
            let (nf, mf) = (n as f64, m as f64);
            let p1 = basis[0][0] * nf + basis[0][1] * mf;
            let p2 = basis[1][0] * nf + basis[1][1] * mf;
            if (p1 - center).abs() < radius && p2 >= c && p2 < d {
                out.push((mix(n as u64, m as u64), p1));
            }
        }
        check_count(out.len() as f64)?;
    }
    Ok(out)
}

/// Minimal gap and maximal closed-unit-window count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationStats {
    pub sep: f64,
    pub rel: usize,
}

/// Largest number of points in any closed window `[t, t + 1]`.
fn max_unit_window_count(points: &[f64]) -> usize {
    let mut best = 0;
    let mut hi = 0;
    for (lo, &p) in points.iter().enumerate() {
        if hi < lo {
            hi = lo;
        }
        while hi < points.len() && points[hi] <= p + 1.0 {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    best
}

pub fn separation_stats(pts: &WindowedPointSet) -> Result<SeparationStats> {
    let p = &pts.points;
    if p.is_empty() {
        return Err(LabError::Degenerate {
            reason: "separation statistics need at least one point".into(),
            partial: None,
        });
    }
    let rel = max_unit_window_count(p);
    if p.len() < 2 {
        return Err(LabError::Degenerate {
            reason: "separation needs at least two points".into(),
            partial: Some(rel as f64),
        });
    }
    let sep = p
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(SeparationStats { sep, rel })
}

/// Window-count ratios at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityCurvePoint {
    pub r: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub d_minus_est: f64,
    pub d_plus_est: f64,
    /// Absent when the scanned region holds fewer than two points.
    pub sep: Option<f64>,
    pub rel: usize,
    pub radii_used: Vec<f64>,
    pub curve: Vec<DensityCurvePoint>,
    pub center_grid_step: f64,
    pub scan_halfwidth: f64,
    pub centers_scanned: usize,
}

/// Default scan parameters: grid step `sep/4` of the realized set and
/// half-width `4·max(radii)`.
pub fn default_scan_params(gen: &FrequencyGenerator, radii: &[f64]) -> Result<(f64, f64)> {
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    if !(rmax > 0.0) {
        return Err(invalid("radii must be positive"));
    }
    let halfwidth = 4.0 * rmax;
    let pts = gen.realize(0.0, halfwidth + rmax)?;
    let step = match separation_stats(&pts) {
        Ok(s) => s.sep / 4.0,
        Err(_) => rmax / 8.0,
    };
    Ok((step, halfwidth))
}

/// Finite-window surrogate of the lower/upper Beurling densities: for each
/// radius, the min and max of `#(Λ ∩ B_r(x)) / 2r` over a grid of centers.
pub fn beurling_density(
    gen: &FrequencyGenerator,
    radii: &[f64],
    center_grid_step: f64,
    scan_halfwidth: f64,
) -> Result<DensityReport> {
    if radii.is_empty() {
        return Err(invalid("radii must be nonempty"));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(invalid("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("radii must be strictly increasing"));
    }
    let rmax = *radii.last().unwrap();
    if !(center_grid_step.is_finite() && center_grid_step > 0.0) {
        return Err(invalid("center_grid_step must be positive"));
    }
    if !(scan_halfwidth >= rmax) {
        return Err(invalid(format!(
            "scan_halfwidth {scan_halfwidth} must be at least the largest radius {rmax}"
        )));
    }
    let n_centers = (2.0 * scan_halfwidth / center_grid_step + 1e-9).floor() + 1.0;
    check_count(n_centers)?;
    let n_centers = n_centers as usize;

    let all = gen.realize(0.0, scan_halfwidth + rmax)?;
    let pts = &all.points;

    let curve: Vec<DensityCurvePoint> = radii
        .iter()
        .map(|&r| {
            let (lo, hi) = (0..n_centers)
                .into_par_iter()
                .map(|k| {
                    let x = -scan_halfwidth + k as f64 * center_grid_step;
                    let first = pts.partition_point(|&p| p <= x - r);
                    let last = pts.partition_point(|&p| p < x + r);
                    let count = last.saturating_sub(first);
                    (count, count)
                })
                .reduce(|| (usize::MAX, 0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
            DensityCurvePoint {
                r,
                d_minus: lo as f64 / (2.0 * r),
                d_plus: hi as f64 / (2.0 * r),
            }
        })
        .collect();

    let (sep, rel) = match separation_stats(&all) {
        Ok(s) => (Some(s.sep), s.rel),
        Err(LabError::Degenerate { partial, .. }) => (None, partial.map_or(0, |r| r as usize)),
        Err(e) => return Err(e),
    };
    let last = curve.last().copied().unwrap();
    Ok(DensityReport {
        d_minus_est: last.d_minus,
        d_plus_est: last.d_plus,
        sep,
        rel,
        radii_used: radii.to_vec(),
        curve,
        center_grid_step,
        scan_halfwidth,
        centers_scanned: n_centers,
    })
}
