//! Experiment configuration: one TOML file with a `[spectrum]`, a
//! `[pointset]` and one table per command.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use framelab::frames::ExpPolynomial;
use framelab::{Complex64, FrequencyGenerator, Spectrum};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spectrum: Option<Spectrum>,
    pub pointset: FrequencyGenerator,
    pub density: Option<DensityBlock>,
    pub frames: Option<FramesBlock>,
    pub hull: Option<HullBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub report: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityBlock {
    pub radii: Vec<f64>,
    pub step: Option<f64>,
    pub halfwidth: Option<f64>,
}

/// `from`, `from + h`, …, `to` with `count` nodes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterGrid {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Centers {
    pub centers: Option<Vec<f64>>,
    pub center_grid: Option<CenterGrid>,
}

impl Centers {
    /// Explicit list, or grid, or `[0]` when neither is given.
    pub fn resolve(&self, block: &str) -> Result<Vec<f64>, CliError> {
        match (&self.centers, &self.center_grid) {
            (Some(_), Some(_)) => Err(CliError::Config(format!(
                "[{block}]: give either `centers` or `center_grid`, not both"
            ))),
            (Some(c), None) => Ok(c.clone()),
            (None, Some(g)) => {
                if g.count == 0 || !(g.from.is_finite() && g.to.is_finite()) {
                    return Err(CliError::Config(format!(
                        "[{block}].center_grid needs finite bounds and count >= 1"
                    )));
                }
                if g.count == 1 {
                    return Ok(vec![g.from]);
                }
                let h = (g.to - g.from) / (g.count - 1) as f64;
                Ok((0..g.count).map(|k| g.from + k as f64 * h).collect())
            }
            (None, None) => Ok(vec![0.0]),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesBlock {
    pub rank_tol: Option<f64>,
    pub measure: Option<MeasureBlock>,
    pub critical: Option<CriticalBlock>,
    pub bounds: Option<BoundsBlock>,
    pub density_functional: Option<DensityFunctionalBlock>,
    pub residual: Option<ResidualBlock>,
    pub gram_spectrum: Option<GramSpectrumBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureBlock {
    pub r: f64,
    pub trim: f64,
    pub centers: Option<Vec<f64>>,
    pub center_grid: Option<CenterGrid>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalBlock {
    pub r: f64,
    pub r_truncation: f64,
    pub centers: Option<Vec<f64>>,
    pub center_grid: Option<CenterGrid>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsBlock {
    pub window_r: f64,
    pub probe_step: f64,
    pub probe_halfwidth: f64,
    pub reg_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFunctionalBlock {
    pub r: f64,
    #[serde(default)]
    pub center: f64,
    pub y_step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualBlock {
    pub eps: f64,
    pub r: f64,
    pub r_truncation: f64,
    pub y_step: Option<f64>,
    pub centers: Option<Vec<f64>>,
    pub center_grid: Option<CenterGrid>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramSpectrumBlock {
    pub r: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullBlock {
    pub guard: Option<f64>,
    #[serde(rename = "match")]
    pub match_: Option<MatchBlock>,
    pub orbit: Option<OrbitBlock>,
    pub repetitivity: Option<RepetitivityBlock>,
    pub sot: Option<SotBlock>,
}

/// Matches `A = Λ` against `B = other - translate` (or `Λ - translate`)
/// near the origin.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchBlock {
    pub r: f64,
    #[serde(default)]
    pub translate: f64,
    pub other: Option<FrequencyGenerator>,
}

/// `x_n = n·period + 1/n` for `n = 1..=count`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reciprocal {
    pub count: usize,
    #[serde(default)]
    pub period: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Translates {
    pub translates: Option<Vec<f64>>,
    pub reciprocal: Option<Reciprocal>,
}

impl Translates {
    pub fn resolve(&self, block: &str) -> Result<Vec<f64>, CliError> {
        match (&self.translates, &self.reciprocal) {
            (Some(t), None) if !t.is_empty() => Ok(t.clone()),
            (None, Some(r)) if r.count > 0 => Ok((1..=r.count)
                .map(|n| n as f64 * r.period + 1.0 / n as f64)
                .collect()),
            _ => Err(CliError::Config(format!(
                "[{block}]: give exactly one of a nonempty `translates` list or `reciprocal`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitBlock {
    pub r: f64,
    pub eps_cluster: f64,
    pub translates: Option<Vec<f64>>,
    pub reciprocal: Option<Reciprocal>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepetitivityBlock {
    pub r: f64,
    pub eps: f64,
    pub halfwidth: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpPolynomialSpec {
    pub freqs: Vec<f64>,
    pub coeffs: Vec<[f64; 2]>,
}

impl ExpPolynomialSpec {
    pub fn build(&self) -> Result<ExpPolynomial, CliError> {
        let coeffs = self.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ExpPolynomial::new(self.freqs.clone(), coeffs).map_err(|e| CliError::Config(format!("[hull.sot].f: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SotBlock {
    pub r_truncation: f64,
    pub f: ExpPolynomialSpec,
    /// Generator of the limit set; defaults to the configured pointset.
    pub limit: Option<FrequencyGenerator>,
    pub translates: Option<Vec<f64>>,
    pub reciprocal: Option<Reciprocal>,
}

macro_rules! center_source {
    ($($block:ty),*) => {$(
        impl $block {
            pub fn center_source(&self) -> Centers {
                Centers {
                    centers: self.centers.clone(),
                    center_grid: self.center_grid.clone(),
                }
            }
        }
    )*};
}

center_source!(MeasureBlock, CriticalBlock, ResidualBlock);

macro_rules! translate_source {
    ($($block:ty),*) => {$(
        impl $block {
            pub fn translate_source(&self) -> Translates {
                Translates {
                    translates: self.translates.clone(),
                    reciprocal: self.reciprocal.clone(),
                }
            }
        }
    )*};
}

translate_source!(OrbitBlock, SotBlock);

/// A parsed configuration together with its canonical hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub hash: String,
}

/// SHA-256 of the canonical JSON form (sorted keys, compact) of the
/// configuration table and the seed override.
pub fn config_hash(table: &toml::Table, seed: Option<u64>) -> Result<String, CliError> {
    let mut value = serde_json::to_value(table).map_err(|e| CliError::Config(e.to_string()))?;
    if let (Some(seed), serde_json::Value::Object(map)) = (seed, &mut value) {
        map.insert("seed_override".into(), serde_json::Value::from(seed));
    }
    let canonical = serde_json::to_string(&value).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

pub fn parse_config(text: &str, origin: &str, seed: Option<u64>) -> Result<LoadedConfig, CliError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    if let Some(seed) = seed {
        config.pointset = config.pointset.with_seed(seed);
    }
    Ok(LoadedConfig {
        hash: config_hash(&table, seed)?,
        config,
    })
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[spectrum]
intervals = [[0.0, 1.0]]

[pointset]
kind = "lattice"
step = 1.0

[density]
radii = [8.0, 16.0]
"#;

    #[test]
    fn hash_ignores_key_order_and_layout() {
        let reordered = r#"
[density]
radii = [8.0, 16.0]
[pointset]
step = 1.0
kind = "lattice"
[spectrum]
intervals = [ [0.0, 1.0] ]
"#;
        let a = parse_config(BASIC, "a", None).unwrap();
        let b = parse_config(reordered, "b", None).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.hash.len(), 64);
        assert_ne!(a.hash, parse_config(BASIC, "a", Some(3)).unwrap().hash);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = BASIC.replace("radii", "radius");
        let err = parse_config(&bad, "cfg.toml", None).unwrap_err().to_string();
        assert!(err.contains("cfg.toml") && err.contains("line"), "{err}");
        let bad = format!("{BASIC}\n[extra]\nx = 1\n");
        assert!(parse_config(&bad, "cfg.toml", None).is_err());
    }

    #[test]
    fn center_resolution() {
        let c = Centers {
            centers: None,
            center_grid: Some(CenterGrid {
                from: -1.0,
                to: 1.0,
                count: 5,
            }),
        };
        assert_eq!(c.resolve("x").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(Centers::default().resolve("x").unwrap(), vec![0.0]);
        let both = Centers {
            centers: Some(vec![0.0]),
            ..c
        };
        assert!(both.resolve("x").is_err());
    }

    #[test]
    fn reciprocal_translates() {
        let t = Translates {
            translates: None,
            reciprocal: Some(Reciprocal { count: 3, period: 1.0 }),
        };
        assert_eq!(t.resolve("x").unwrap(), vec![2.0, 2.5, 3.0 + 1.0 / 3.0]);
        assert!(Translates::default().resolve("x").is_err());
    }
}
