//! Frame-theoretic functionals of `E(Λ)` in `L²(S)`, evaluated on finite
//! windows of `Λ`.
//!
//! Every quantity here is a finite surrogate: infinite sums over `Λ` are
//! truncated to a ball, and suprema over centers are replaced by a
//! caller-supplied grid that is echoed back in the result.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::numeric::pairwise_sum;
use crate::pointset::{FrequencyGenerator, WindowedPointSet};
use crate::specmat::{assemble_gram, HermitianMatrix, SpectralCutoff};
use crate::spectrum::Spectrum;

/// Default quadrature step for integrals over `y`.
pub const DEFAULT_Y_STEP: f64 = 1.0 / 32.0;

/// Default relative cutoff for probe-Gram directions in
/// [`frame_bounds_probe`].
pub const DEFAULT_PROBE_REG_TOL: f64 = 0.1;

/// `f = Σ_k c_k e_{γ_k}` with strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolynomial {
    freqs: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl ExpPolynomial {
    pub fn new(freqs: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(invalid(format!(
                "{} frequencies but {} coefficients",
                freqs.len(),
                coeffs.len()
            )));
        }
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(invalid("frequencies must be finite"));
        }
        if freqs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("frequencies must be strictly increasing"));
        }
        Ok(Self { freqs, coeffs })
    }

    pub fn zero() -> Self {
        Self {
            freqs: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    /// The single exponential `e_x`.
    pub fn exponential(x: f64) -> Self {
        Self {
            freqs: vec![x],
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Builds a polynomial from unsorted terms, adding coefficients of equal
    /// frequencies.
    pub fn from_terms(mut terms: Vec<(f64, Complex64)>) -> Result<Self> {
        if terms.iter().any(|(f, _)| !f.is_finite()) {
            return Err(invalid("frequencies must be finite"));
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut freqs: Vec<f64> = Vec::with_capacity(terms.len());
        let mut coeffs: Vec<Complex64> = Vec::with_capacity(terms.len());
        for (f, c) in terms {
            if freqs.last() == Some(&f) {
                *coeffs.last_mut().unwrap() += c;
            } else {
                freqs.push(f);
                coeffs.push(c);
            }
        }
        Ok(Self { freqs, coeffs })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// `self - other` on the merged frequency set.
    pub fn sub(&self, other: &ExpPolynomial) -> ExpPolynomial {
        let terms = self
            .freqs
            .iter()
            .copied()
            .zip(self.coeffs.iter().copied())
            .chain(other.freqs.iter().copied().zip(other.coeffs.iter().map(|c| -c)))
            .collect();
        Self::from_terms(terms).expect("operands have finite frequencies")
    }
}

/// `S_Λ f = Σ_{λ ∈ pts} ⟨f, e_λ⟩ e_λ` with `⟨f, e_λ⟩ = Σ_k c_k 1̂_S(λ - γ_k)`.
pub fn apply_frame_operator(s: &Spectrum, pts: &WindowedPointSet, f: &ExpPolynomial) -> ExpPolynomial {
    if f.is_empty() || pts.is_empty() {
        return ExpPolynomial::zero();
    }
    let coeffs: Vec<Complex64> = pts
        .points
        .par_iter()
        .map(|&lam| {
            let terms: Vec<Complex64> = f
                .freqs
                .iter()
                .zip(&f.coeffs)
                .map(|(&g, &c)| c * s.ft_indicator_unchecked(lam - g))
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    ExpPolynomial {
        freqs: pts.points.clone(),
        coeffs,
    }
}

/// `‖f‖²_{L²(S)} = c* G c` over the frequencies of `f`.
pub fn norm_sq(s: &Spectrum, f: &ExpPolynomial) -> f64 {
    let n = f.len();
    let rows: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let terms: Vec<Complex64> = (0..n)
                .map(|k| f.coeffs[j].conj() * s.ft_indicator_unchecked(f.freqs[j] - f.freqs[k]) * f.coeffs[k])
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows).re.max(0.0)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_centers(centers: &[f64]) -> Result<()> {
    if centers.is_empty() {
        return Err(invalid("center grid must be nonempty"));
    }
    if centers.iter().any(|c| !c.is_finite()) {
        return Err(invalid("centers must be finite"));
    }
    Ok(())
}

/// Projection onto `span E(pts)`, factored once for many `‖P e_y‖²`.
pub struct SpanProjector<'a> {
    spectrum: &'a Spectrum,
    points: Vec<f64>,
    cutoff: SpectralCutoff,
}

impl<'a> SpanProjector<'a> {
    pub fn new(s: &'a Spectrum, pts: &WindowedPointSet, rank_tol: f64) -> Result<Self> {
        let g = assemble_gram(s, pts)?;
        Ok(Self {
            spectrum: s,
            points: pts.points.clone(),
            cutoff: SpectralCutoff::new(&g, rank_tol)?,
        })
    }

    /// `‖P e_y‖² = g* G⁺ g`, `g_j = 1̂_S(λ_j - y)`, clamped to `[0, |S|]`.
    pub fn norm_sq(&self, y: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let g: Vec<Complex64> = self
            .points
            .iter()
            .map(|&lam| self.spectrum.ft_indicator_unchecked(lam - y))
            .collect();
        self.cutoff
            .pinv_quadratic_form(&g)
            .clamp(0.0, self.spectrum.measure())
    }
}

/// `‖P_{pts} e_y‖²`.
pub fn projection_norm_sq(s: &Spectrum, pts: &WindowedPointSet, y: f64, rank_tol: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(invalid(format!("y = {y} is not finite")));
    }
    Ok(SpanProjector::new(s, pts, rank_tol)?.norm_sq(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualDiagEntry {
    pub point: f64,
    pub value: f64,
    /// Whether the point lies in the trimmed core `B_{r - trim}(center)`.
    pub core: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterDiagnostics {
    pub center: f64,
    pub n_points: usize,
    pub n_core: usize,
    pub core_average: f64,
    pub retained_rank: usize,
    pub lambda_min_retained: f64,
    pub lambda_max: f64,
    pub dual_diag: Vec<DualDiagEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCenter {
    pub center: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub m_plus_est: f64,
    /// Smallest retained Gram eigenvalue across windows.
    pub a_est: f64,
    /// Largest Gram eigenvalue across windows.
    pub b_est: f64,
    pub r: f64,
    pub trim: f64,
    pub rank_tol: f64,
    pub per_center: Vec<CenterDiagnostics>,
    pub skipped: Vec<SkippedCenter>,
}

/// Finite surrogate of the upper frame measure: for each center, the
/// average of the projection diagonal `diag(G G⁺)` over the trimmed core of
/// `Λ ∩ B_r(x)`; the estimate is the maximum over centers.
pub fn frame_measure_upper(
    s: &Spectrum,
    gen: &FrequencyGenerator,
    r: f64,
    centers: &[f64],
    trim: f64,
    rank_tol: f64,
) -> Result<FrameDiagnostics> {
    check_positive("r", r)?;
    check_centers(centers)?;
    if !(trim >= 0.0 && trim < r) {
        return Err(invalid(format!("trim must satisfy 0 <= trim < r, got trim={trim}, r={r}")));
    }
    let core_r = r - trim;
    let results: Vec<Result<std::result::Result<CenterDiagnostics, SkippedCenter>>> = centers
        .par_iter()
        .map(|&x| {
            let pts = gen.realize(x, r)?;
            let n_core = pts.points.iter().filter(|p| (*p - x).abs() < core_r).count();
            if n_core == 0 {
                return Ok(Err(SkippedCenter {
                    center: x,
                    reason: format!("no points in core B_{core_r}({x})"),
                }));
            }
            let g = assemble_gram(s, &pts)?;
            let cutoff = SpectralCutoff::new(&g, rank_tol)?;
            let diag = cutoff.projection_diag();
            let dual_diag: Vec<DualDiagEntry> = pts
                .points
                .iter()
                .zip(&diag)
                .map(|(&p, &v)| DualDiagEntry {
                    point: p,
                    value: v,
                    core: (p - x).abs() < core_r,
                })
                .collect();
            let core_vals: Vec<f64> = dual_diag.iter().filter(|e| e.core).map(|e| e.value).collect();
            Ok(Ok(CenterDiagnostics {
                center: x,
                n_points: pts.len(),
                n_core,
                core_average: pairwise_sum(&core_vals) / n_core as f64,
                retained_rank: cutoff.rank(),
                lambda_min_retained: cutoff.lambda_min_retained(),
                lambda_max: cutoff.lambda_max,
                dual_diag,
            }))
        })
        .collect();

    let mut per_center = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r? {
            Ok(d) => per_center.push(d),
            Err(s) => skipped.push(s),
        }
    }
    if per_center.is_empty() {
        return Err(LabError::Degenerate {
            reason: "every center has an empty core window".into(),
            partial: None,
        });
    }
    let m_plus_est = per_center.iter().map(|d| d.core_average).fold(f64::NEG_INFINITY, f64::max);
    let a_est = per_center.iter().map(|d| d.lambda_min_retained).fold(f64::INFINITY, f64::min);
    let b_est = per_center.iter().map(|d| d.lambda_max).fold(0.0, f64::max);
    Ok(FrameDiagnostics {
        m_plus_est,
        a_est,
        b_est,
        r,
        trim,
        rank_tol,
        per_center,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCenter {
    pub center: f64,
    /// `None` when `B_r(center)` holds no points.
    pub min_diag: Option<f64>,
    pub n_inner: usize,
    pub n_window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalScan {
    pub best_center: f64,
    pub best_min_diag: f64,
    pub r: f64,
    pub r_truncation: f64,
    pub per_center: Vec<CriticalCenter>,
}

/// For each center `x`, `m(x) = min` of the dual diagonal over
/// `Λ ∩ B_r(x)`, with the dual diagonal taken from the window
/// `Λ ∩ B_R(x)`. Values of the best `m(x)` near 1 indicate critical
/// density; values bounded away from 1 indicate oversampling.
pub fn critical_frame_scan(
    s: &Spectrum,
    gen: &FrequencyGenerator,
    r: f64,
    centers: &[f64],
    r_truncation: f64,
    rank_tol: f64,
) -> Result<CriticalScan> {
    check_positive("r", r)?;
    check_centers(centers)?;
    if !(r_truncation >= 4.0 * r) {
        return Err(invalid(format!(
            "truncation radius {r_truncation} must be at least 4r = {}",
            4.0 * r
        )));
    }
    let per_center: Vec<CriticalCenter> = centers
        .par_iter()
        .map(|&x| -> Result<CriticalCenter> {
            let pts = gen.realize(x, r_truncation)?;
            let inner: Vec<usize> = (0..pts.len()).filter(|&j| (pts.points[j] - x).abs() < r).collect();
            if inner.is_empty() {
                return Ok(CriticalCenter {
                    center: x,
                    min_diag: None,
                    n_inner: 0,
                    n_window: pts.len(),
                });
            }
            let diag = SpectralCutoff::new(&assemble_gram(s, &pts)?, rank_tol)?.projection_diag();
            let min = inner.iter().map(|&j| diag[j]).fold(f64::INFINITY, f64::min);
            Ok(CriticalCenter {
                center: x,
                min_diag: Some(min),
                n_inner: inner.len(),
                n_window: pts.len(),
            })
        })
        .collect::<Result<_>>()?;

    let best = per_center
        .iter()
        .filter_map(|c| c.min_diag.map(|m| (c.center, m)))
        .fold(None, |acc: Option<(f64, f64)>, (x, m)| match acc {
            Some((_, bm)) if bm >= m => acc,
            _ => Some((x, m)),
        });
    let (best_center, best_min_diag) = best.ok_or_else(|| LabError::Degenerate {
        reason: "no center has points inside B_r".into(),
        partial: None,
    })?;
    Ok(CriticalScan {
        best_center,
        best_min_diag,
        r,
        r_truncation,
        per_center,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBoundsEstimate {
    pub a_est: f64,
    pub b_est: f64,
    pub probe_count: usize,
    /// Dimension of the probe span after the `reg_tol` cutoff.
    pub retained_dim: usize,
    pub window_r: f64,
    pub window_points: usize,
    /// Largest change of either bound when the window radius is doubled;
    /// a direct readout of truncation leakage.
    pub truncation_drift: f64,
}

fn probe_extremes(
    s: &Spectrum,
    window: &WindowedPointSet,
    probes: &[f64],
    whitening: &nalgebra::DMatrix<Complex64>,
) -> Result<(f64, f64)> {
    let (m, p) = (window.len(), probes.len());
    // F[λ, k] = ⟨e_{γ_k}, e_λ⟩; A = F*F has A_jk = ⟨S_Λ e_{γ_k}, e_{γ_j}⟩.
    let f = nalgebra::DMatrix::from_fn(m, p, |i, k| s.ft_indicator_unchecked(window.points[i] - probes[k]));
    let ft = &f * whitening;
    let reduced = HermitianMatrix::new(ft.adjoint() * &ft)?;
    let eig = reduced.eigen();
    let hi = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let lo = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    Ok((lo, hi))
}

/// Rayleigh-quotient bracket for the frame bounds restricted to the span of
/// the probe exponentials `e_γ`, `γ ∈ {-h, -h + step, …, h}`: the extreme
/// generalized eigenvalues of `(A, B)` with `A_jk = ⟨S_Λ e_{γ_k}, e_{γ_j}⟩`
/// (Λ truncated to `B_window_r(0)`) and `B` the probe Gram matrix, after
/// dropping `B`-directions below `reg_tol·λ_max(B)`.
pub fn frame_bounds_probe(
    s: &Spectrum,
    gen: &FrequencyGenerator,
    window_r: f64,
    probe_freq_step: f64,
    probe_halfwidth: f64,
    reg_tol: f64,
) -> Result<FrameBoundsEstimate> {
    check_positive("window_r", window_r)?;
    check_positive("probe_freq_step", probe_freq_step)?;
    if !(probe_halfwidth.is_finite() && probe_halfwidth >= 0.0) {
        return Err(invalid("probe_halfwidth must be finite and >= 0"));
    }
    if !(reg_tol > 0.0 && reg_tol < 1.0) {
        return Err(invalid(format!("reg_tol must lie in (0, 1), got {reg_tol}")));
    }
    let count = (2.0 * probe_halfwidth / probe_freq_step + 1e-9).floor() as usize + 1;
    if count > crate::specmat::MAX_DENSE_DIM {
        return Err(LabError::ResourceLimit {
            what: "probe count",
            requested: count,
            limit: crate::specmat::MAX_DENSE_DIM,
        });
    }
    let probes: Vec<f64> = (0..count).map(|k| -probe_halfwidth + k as f64 * probe_freq_step).collect();
    let probe_pts = WindowedPointSet {
        points: probes.clone(),
        center: 0.0,
        radius: probe_halfwidth + probe_freq_step,
    };
    let cutoff = SpectralCutoff::new(&assemble_gram(s, &probe_pts)?, reg_tol)?;
    if cutoff.rank() == 0 {
        return Err(LabError::Degenerate {
            reason: "every probe direction falls below the regularization cutoff".into(),
            partial: None,
        });
    }
    // T = V_keep Λ_keep^{-1/2}; the generalized problem becomes T* A T.
    let mut whitening = cutoff.vectors.clone();
    for (c, &v) in cutoff.values.iter().enumerate() {
        let scale = 1.0 / v.sqrt();
        whitening.column_mut(c).iter_mut().for_each(|z| *z *= scale);
    }
    let window = gen.realize(0.0, window_r)?;
    let (a_est, b_est) = probe_extremes(s, &window, &probes, &whitening)?;
    let wide = gen.realize(0.0, 2.0 * window_r)?;
    let (a_wide, b_wide) = probe_extremes(s, &wide, &probes, &whitening)?;
    Ok(FrameBoundsEstimate {
        a_est,
        b_est,
        probe_count: count,
        retained_dim: cutoff.rank(),
        window_r,
        window_points: window.len(),
        truncation_drift: (a_wide - a_est).abs().max((b_wide - b_est).abs()),
    })
}

/// Midpoint nodes covering `(center - r, center + r)` with spacing at most
/// `y_step`; returns the nodes and the actual spacing.
pub fn midpoint_nodes(center: f64, r: f64, y_step: f64) -> (Vec<f64>, f64) {
    let n = ((2.0 * r / y_step) - 1e-9).ceil().max(1.0) as usize;
    let h = 2.0 * r / n as f64;
    ((0..n).map(|k| center - r + (k as f64 + 0.5) * h).collect(), h)
}

/// `(1/2r) ∫_{B_r(center)} ‖P_{Λ ∩ B_r(center)} e_y‖² dy` by the composite
/// midpoint rule. Meaningful as a density surrogate for uniformly minimal
/// systems, which this function does not check.
pub fn riesz_density_functional(
    s: &Spectrum,
    gen: &FrequencyGenerator,
    r: f64,
    center: f64,
    y_step: f64,
    rank_tol: f64,
) -> Result<f64> {
    check_positive("r", r)?;
    check_positive("y_step", y_step)?;
    if y_step > 0.125 {
        return Err(invalid(format!("y_step must be at most 1/8, got {y_step}")));
    }
    let pts = gen.realize(center, r)?;
    if pts.is_empty() {
        return Ok(0.0);
    }
    let proj = SpanProjector::new(s, &pts, rank_tol)?;
    let (nodes, h) = midpoint_nodes(center, r, y_step);
    let values: Vec<f64> = nodes.par_iter().map(|&y| proj.norm_sq(y)).collect();
    Ok(pairwise_sum(&values) * h / (2.0 * r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualCenter {
    pub center: f64,
    pub measure: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualScan {
    pub best_center: f64,
    pub best_measure: f64,
    pub eps: f64,
    pub r: f64,
    pub r_truncation: f64,
    pub y_step: f64,
    pub per_center: Vec<ResidualCenter>,
}

/// For each center `x`, the measure of `{y ∈ B_r(x) : ‖(I - P)e_y‖ ≥ eps}`
/// with `P` the projection onto `span E(Λ ∩ B_R(x))`; reports the center
/// with the smallest measure.
#[allow(clippy::too_many_arguments)]
pub fn residual_set_scan(
    s: &Spectrum,
    gen: &FrequencyGenerator,
    eps: f64,
    r: f64,
    centers: &[f64],
    r_truncation: f64,
    y_step: f64,
    rank_tol: f64,
) -> Result<ResidualScan> {
    let total = s.measure();
    if !(eps > 0.0 && eps < total.sqrt()) {
        return Err(invalid(format!(
            "eps must satisfy 0 < eps < sqrt(|S|) = {}, got {eps}",
            total.sqrt()
        )));
    }
    check_positive("r", r)?;
    check_positive("y_step", y_step)?;
    check_centers(centers)?;
    if !(r_truncation >= r) {
        return Err(invalid(format!("truncation radius {r_truncation} must be at least r = {r}")));
    }
    let threshold = eps * eps;
    let per_center: Vec<ResidualCenter> = centers
        .par_iter()
        .map(|&x| -> Result<ResidualCenter> {
            let pts = gen.realize(x, r_truncation)?;
            let proj = SpanProjector::new(s, &pts, rank_tol)?;
            let (nodes, h) = midpoint_nodes(x, r, y_step);
            let hits = nodes.iter().filter(|&&y| total - proj.norm_sq(y) >= threshold).count();
            Ok(ResidualCenter {
                center: x,
                measure: hits as f64 * h,
                n_points: pts.len(),
            })
        })
        .collect::<Result<_>>()?;
    let best = per_center
        .iter()
        .fold(&per_center[0], |b, c| if c.measure < b.measure { c } else { b });
    Ok(ResidualScan {
        best_center: best.center,
        best_measure: best.measure,
        eps,
        r,
        r_truncation,
        y_step,
        per_center: per_center.clone(),
    })
}
