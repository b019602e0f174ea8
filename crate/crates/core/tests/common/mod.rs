//! Helpers shared by the integration tests. The oracles at the top do not
//! call into the library's numerical kernels.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use framelab::Spectrum;

/// Composite Simpson rule for `∫_S e^{-2πiξt} dt` with `n` panels per
/// unit length.
pub fn quadrature_ft(s: &Spectrum, xi: f64, per_unit: usize) -> Complex64 {
    let f = |t: f64| Complex64::from_polar(1.0, -2.0 * PI * xi * t);
    let mut total = Complex64::new(0.0, 0.0);
    for &(a, b) in s.intervals() {
        let n = 2 * (((b - a) * per_unit as f64).ceil() as usize).max(1);
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(a + k as f64 * h) * w;
        }
        total += acc * (h / 3.0);
    }
    total
}

/// Eigenvalues (descending) of a Hermitian matrix by cyclic Jacobi
/// rotations on its real symmetric embedding `[[A, -B], [B, A]]`, where
/// every eigenvalue appears twice.
pub fn jacobi_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[(i, j)] = z.re;
            a[(i + n, j + n)] = z.re;
            a[(i, j + n)] = -z.im;
            a[(i + n, j)] = z.im;
        }
    }
    let dim = 2 * n;
    for _sweep in 0..100 {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() < 1e-14 * a.norm().max(1e-300) {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..dim).map(|i| a[(i, i)]).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals.into_iter().step_by(2).collect()
}

/// `Σ_{|n| < r} (π(n - 1/2))⁻²`, the squared projection of `e_{1/2}` onto
/// the span of `{e_n : |n| < r}` in `L²[0, 1]`.
pub fn half_integer_series(r: f64) -> f64 {
    let m = r.ceil() as i64;
    (-m..=m)
        .filter(|&n| (n as f64).abs() < r)
        .map(|n| 1.0 / (PI * (n as f64 - 0.5)).powi(2))
        .sum()
}

/// Translation-covariance harness: every scalar diagnostic of a
/// configuration, in a fixed order, plus the Gram matrix of the window
/// `B_8(c0)`. Evaluating `(gen.translated(x), c - x, y - x)` must give the
/// same list.
pub mod covariance {
    use framelab::frames::{critical_frame_scan, frame_measure_upper, projection_norm_sq, residual_set_scan, riesz_density_functional};
    use framelab::specmat::{assemble_gram, HermitianMatrix, DEFAULT_RANK_TOL};
    use framelab::{FrequencyGenerator, Spectrum};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub struct Config {
        pub spectrum: Spectrum,
        pub gen: FrequencyGenerator,
        pub centers: Vec<f64>,
        pub y: f64,
    }

    fn dyadic(rng: &mut ChaCha8Rng, lo: f64, hi: f64, denom: f64) -> f64 {
        (rng.random_range(lo..hi) * denom).round() / denom
    }

    /// Random configurations whose coordinates are all dyadic, so that
    /// translation by a dyadic `x` is exact in floating point.
    pub fn random_config(rng: &mut ChaCha8Rng) -> Config {
        let a = dyadic(rng, -1.0, 1.0, 16.0);
        let len = dyadic(rng, 0.25, 1.0, 16.0);
        let spectrum = if rng.random_bool(0.5) {
            Spectrum::new(vec![(a, a + len)]).unwrap()
        } else {
            let gap = dyadic(rng, 0.25, 1.0, 16.0);
            Spectrum::new(vec![(a, a + len), (a + len + gap, a + 2.0 * len + gap)]).unwrap()
        };
        let lattice = |rng: &mut ChaCha8Rng| FrequencyGenerator::Lattice {
            step: dyadic(rng, 0.375, 1.5, 8.0),
            offset: dyadic(rng, -1.0, 1.0, 64.0),
        };
        let gen = match rng.random_range(0..4) {
            0 => lattice(rng),
            1 => FrequencyGenerator::UnionOf {
                parts: vec![lattice(rng), lattice(rng)],
            },
            2 => FrequencyGenerator::CutProject {
                basis: [[1.0, 0.5], [0.25, -1.0]],
                window: [0.0, dyadic(rng, 0.5, 2.0, 8.0)],
                offset: dyadic(rng, -1.0, 1.0, 64.0),
            },
            _ => {
                let mut pts: Vec<f64> = (0..60).map(|_| dyadic(rng, -20.0, 20.0, 32.0)).collect();
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                FrequencyGenerator::Explicit { points: pts }
            }
        };
        let c0 = dyadic(rng, -2.0, 2.0, 32.0);
        Config {
            spectrum,
            gen,
            centers: vec![c0, c0 + 0.5, c0 - 1.25],
            y: dyadic(rng, -3.0, 3.0, 128.0),
        }
    }

    pub fn translated(cfg: &Config, x: f64) -> Config {
        Config {
            spectrum: cfg.spectrum.clone(),
            gen: cfg.gen.translated(x),
            centers: cfg.centers.iter().map(|c| c - x).collect(),
            y: cfg.y - x,
        }
    }

    pub fn random_shift(rng: &mut ChaCha8Rng) -> f64 {
        dyadic(rng, -50.0, 50.0, 1024.0)
    }

    pub fn scalars(cfg: &Config) -> (Vec<f64>, HermitianMatrix) {
        let s = &cfg.spectrum;
        let c0 = cfg.centers[0];
        let mut out = Vec::new();
        let fm = frame_measure_upper(s, &cfg.gen, 8.0, &cfg.centers, 2.0, DEFAULT_RANK_TOL).unwrap();
        out.extend([fm.m_plus_est, fm.a_est, fm.b_est]);
        for c in &fm.per_center {
            out.push(c.core_average);
            out.extend(c.dual_diag.iter().map(|e| e.value));
        }
        let window = cfg.gen.realize(c0, 8.0).unwrap();
        out.push(projection_norm_sq(s, &window, cfg.y, DEFAULT_RANK_TOL).unwrap());
        out.push(riesz_density_functional(s, &cfg.gen, 4.0, c0, 1.0 / 16.0, DEFAULT_RANK_TOL).unwrap());
        let eps = 0.5 * s.measure().sqrt();
        let res = residual_set_scan(s, &cfg.gen, eps, 4.0, &cfg.centers, 8.0, 1.0 / 16.0, DEFAULT_RANK_TOL).unwrap();
        out.extend(res.per_center.iter().map(|c| c.measure));
        let crit = critical_frame_scan(s, &cfg.gen, 2.0, &cfg.centers, 8.0, DEFAULT_RANK_TOL).unwrap();
        out.extend(crit.per_center.iter().filter_map(|c| c.min_diag));
        (out, assemble_gram(s, &window).unwrap())
    }
}
