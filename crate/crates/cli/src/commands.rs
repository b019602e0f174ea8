//! The `density`, `frames` and `hull` subcommands.

use serde::Serialize;
use serde_json::{Map, Value};

use framelab::frames::{
    critical_frame_scan, frame_bounds_probe, frame_measure_upper, residual_set_scan, riesz_density_functional,
    DEFAULT_PROBE_REG_TOL, DEFAULT_Y_STEP,
};
use framelab::hull::{
    local_match, max_return_gap, orbit_sample, repetitivity_probe, sot_convergence_probe, translate_window,
    weak_distance, DEFAULT_GUARD,
};
use framelab::pointset::{beurling_density, default_scan_params};
use framelab::specmat::{assemble_gram, EigenDecomposition, DEFAULT_RANK_TOL};
use framelab::Spectrum;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::{cell, CsvTable};

/// Payload plus the CSV projections of it.
#[derive(Debug)]
pub struct CommandOutput {
    pub payload: Value,
    pub tables: Vec<CsvTable>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

fn missing(what: &str) -> CliError {
    CliError::Config(format!("missing required table `{what}`"))
}

fn spectrum(cfg: &ExperimentConfig) -> Result<&Spectrum, CliError> {
    cfg.spectrum.as_ref().ok_or_else(|| missing("[spectrum]"))
}

pub fn run_density(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let block = cfg.density.as_ref().ok_or_else(|| missing("[density]"))?;
    let gen = &cfg.pointset;
    let (step, halfwidth) = match (block.step, block.halfwidth) {
        (Some(s), Some(h)) => (s, h),
        (s, h) => {
            let (ds, dh) = default_scan_params(gen, &block.radii)?;
            (s.unwrap_or(ds), h.unwrap_or(dh))
        }
    };
    let report = beurling_density(gen, &block.radii, step, halfwidth)?;
    let mut curve = CsvTable::new("density_curve", &["r", "d_minus", "d_plus"]);
    for p in &report.curve {
        curve.push(vec![cell(p.r), cell(p.d_minus), cell(p.d_plus)]);
    }
    Ok(CommandOutput {
        payload: to_value(&report)?,
        tables: vec![curve],
    })
}

pub fn run_frames(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let block = cfg.frames.as_ref().ok_or_else(|| missing("[frames]"))?;
    let s = spectrum(cfg)?;
    let gen = &cfg.pointset;
    let tol = block.rank_tol.unwrap_or(DEFAULT_RANK_TOL);
    let mut payload = Map::new();
    let mut tables = Vec::new();

    if let Some(m) = &block.measure {
        let centers = m.center_source().resolve("frames.measure")?;
        let d = frame_measure_upper(s, gen, m.r, &centers, m.trim, tol)?;
        let mut per = CsvTable::new(
            "frames_measure",
            &["center", "n_points", "n_core", "core_average", "retained_rank", "lambda_min_retained", "lambda_max"],
        );
        let mut diag = CsvTable::new("frames_dual_diag", &["center", "point", "value", "core"]);
        for c in &d.per_center {
            per.push(vec![
                cell(c.center),
                c.n_points.to_string(),
                c.n_core.to_string(),
                cell(c.core_average),
                c.retained_rank.to_string(),
                cell(c.lambda_min_retained),
                cell(c.lambda_max),
            ]);
            for e in &c.dual_diag {
                diag.push(vec![cell(c.center), cell(e.point), cell(e.value), e.core.to_string()]);
            }
        }
        tables.extend([per, diag]);
        payload.insert("measure".into(), to_value(&d)?);
    }

    if let Some(c) = &block.critical {
        let centers = c.center_source().resolve("frames.critical")?;
        let scan = critical_frame_scan(s, gen, c.r, &centers, c.r_truncation, tol)?;
        let mut t = CsvTable::new("frames_critical", &["center", "min_diag", "n_inner", "n_window"]);
        for p in &scan.per_center {
            t.push(vec![
                cell(p.center),
                p.min_diag.map(cell).unwrap_or_default(),
                p.n_inner.to_string(),
                p.n_window.to_string(),
            ]);
        }
        tables.push(t);
        payload.insert("critical".into(), to_value(&scan)?);
    }

    if let Some(b) = &block.bounds {
        let est = frame_bounds_probe(
            s,
            gen,
            b.window_r,
            b.probe_step,
            b.probe_halfwidth,
            b.reg_tol.unwrap_or(DEFAULT_PROBE_REG_TOL),
        )?;
        payload.insert("bounds".into(), to_value(&est)?);
    }

    if let Some(f) = &block.density_functional {
        let y_step = f.y_step.unwrap_or(DEFAULT_Y_STEP);
        let value = riesz_density_functional(s, gen, f.r, f.center, y_step, tol)?;
        payload.insert(
            "density_functional".into(),
            serde_json::json!({ "r": f.r, "center": f.center, "y_step": y_step, "value": value }),
        );
    }

    if let Some(r) = &block.residual {
        let centers = r.center_source().resolve("frames.residual")?;
        let y_step = r.y_step.unwrap_or(DEFAULT_Y_STEP);
        let scan = residual_set_scan(s, gen, r.eps, r.r, &centers, r.r_truncation, y_step, tol)?;
        let mut t = CsvTable::new("frames_residual", &["center", "measure", "n_points"]);
        for p in &scan.per_center {
            t.push(vec![cell(p.center), cell(p.measure), p.n_points.to_string()]);
        }
        tables.push(t);
        payload.insert("residual".into(), to_value(&scan)?);
    }

    if let Some(g) = &block.gram_spectrum {
        let pts = gen.realize(g.center, g.r)?;
        let gram = assemble_gram(s, &pts)?;
        let eig = EigenDecomposition::of(&gram);
        let mut t = CsvTable::new("frames_gram_spectrum", &["index", "eigenvalue"]);
        for (k, v) in eig.values.iter().enumerate() {
            t.push(vec![k.to_string(), cell(*v)]);
        }
        tables.push(t);
        payload.insert(
            "gram_spectrum".into(),
            serde_json::json!({
                "r": g.r,
                "center": g.center,
                "dim": pts.len(),
                "eigenvalues": eig.values,
                "lambda_max": eig.values.first(),
                "lambda_min": eig.values.last(),
                "reconstruction_residual": eig.reconstruction_residual(&gram),
            }),
        );
    }

    if payload.is_empty() {
        return Err(CliError::Config(
            "[frames] needs at least one of measure, critical, bounds, density_functional, residual, gram_spectrum"
                .into(),
        ));
    }
    Ok(CommandOutput {
        payload: Value::Object(payload),
        tables,
    })
}

pub fn run_hull(cfg: &ExperimentConfig) -> Result<CommandOutput, CliError> {
    let block = cfg.hull.as_ref().ok_or_else(|| missing("[hull]"))?;
    let gen = &cfg.pointset;
    let guard = block.guard.unwrap_or(DEFAULT_GUARD);
    let mut payload = Map::new();
    let mut tables = Vec::new();

    if let Some(m) = &block.match_ {
        let reach = m.r + guard;
        let a = translate_window(gen, 0.0, reach)?;
        let other = m.other.as_ref().unwrap_or(gen);
        let b = translate_window(other, m.translate, reach)?;
        let result = local_match(&a, &b, m.r, guard)?;
        let distance = weak_distance(&a, &b, m.r, guard)?;
        payload.insert(
            "match".into(),
            serde_json::json!({
                "r": m.r,
                "guard": guard,
                "translate": m.translate,
                "a_points": a.points,
                "b_points": b.points,
                "result": to_value(&result)?,
                "weak_distance": distance,
            }),
        );
    }

    if let Some(o) = &block.orbit {
        let xs = o.translate_source().resolve("hull.orbit")?;
        let sample = orbit_sample(gen, &xs, o.r, o.eps_cluster)?;
        let mut t = CsvTable::new("hull_orbit", &["n", "x", "window_points"]);
        for (n, (x, w)) in sample.translates.iter().zip(&sample.windows).enumerate() {
            t.push(vec![(n + 1).to_string(), cell(*x), w.len().to_string()]);
        }
        tables.push(t);
        payload.insert("orbit".into(), to_value(&sample)?);
    }

    if let Some(r) = &block.repetitivity {
        let returns = repetitivity_probe(gen, r.r, r.eps, r.halfwidth, r.step)?;
        let mut t = CsvTable::new("hull_repetitivity", &["x", "weak_distance"]);
        for rv in &returns {
            t.push(vec![cell(rv.x), cell(rv.distance)]);
        }
        tables.push(t);
        payload.insert(
            "repetitivity".into(),
            serde_json::json!({
                "r": r.r,
                "eps": r.eps,
                "halfwidth": r.halfwidth,
                "step": r.step,
                "count": returns.len(),
                "max_gap": max_return_gap(&returns),
                "returns": to_value(&returns)?,
            }),
        );
    }

    if let Some(p) = &block.sot {
        let s = spectrum(cfg)?;
        let xs = p.translate_source().resolve("hull.sot")?;
        let f = p.f.build()?;
        let limit_gen = p.limit.as_ref().unwrap_or(gen);
        let limit = limit_gen.realize(0.0, p.r_truncation)?;
        let seq = sot_convergence_probe(s, gen, &xs, &limit, &f, p.r_truncation)?;
        let mut t = CsvTable::new("hull_sot", &["n", "x", "norm"]);
        for (n, (x, v)) in xs.iter().zip(&seq).enumerate() {
            t.push(vec![(n + 1).to_string(), cell(*x), cell(*v)]);
        }
        tables.push(t);
        payload.insert(
            "sot".into(),
            serde_json::json!({
                "r_truncation": p.r_truncation,
                "translates": xs,
                "norms": seq,
            }),
        );
    }

    if payload.is_empty() {
        return Err(CliError::Config(
            "[hull] needs at least one of match, orbit, repetitivity, sot".into(),
        ));
    }
    Ok(CommandOutput {
        payload: Value::Object(payload),
        tables,
    })
}
