//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment = "spectrum"
//! seed = 7
//!
//! [measure]
//! variant = "sphere"
//! ambient_dim = 3
//! radius = 1.0
//! level = 2000
//!
//! [kernel]
//! spec = "riesz:3:1"
//! diagonal = "cell-average"
//! ```

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::WindowRule;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::measure::{AtomicMeasure, GraphTable, MeasureSpec};
use crate::operators::DiagonalRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Spectrum,
    Localization,
    Nonsa,
    Covering,
    Clr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    /// `ifs`, `cantor`, `dust`, `sphere`, `circle` or `graph`.
    pub variant: String,
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// IFS offsets, one list per map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_per_axis: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
}

fn need<T: Clone>(v: &Option<T>, key: &str, variant: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("measure variant `{variant}` needs `{key}`")))
}

impl MeasureConfig {
    pub fn to_spec(&self) -> Result<MeasureSpec> {
        let variant = self.variant.to_ascii_lowercase();
        let spec = match variant.as_str() {
            "cantor" => MeasureSpec::middle_thirds_cantor(),
            "dust" => MeasureSpec::cantor_dust(),
            "ifs" => MeasureSpec::Ifs {
                ratio: need(&self.ratio, "ratio", &variant)?,
                offsets: need(&self.maps, "maps", &variant)?,
                mass: self.mass.unwrap_or(1.0),
            },
            "sphere" => MeasureSpec::Sphere {
                ambient_dim: self.ambient_dim.unwrap_or(3),
                radius: self.radius.unwrap_or(1.0),
            },
            "circle" => MeasureSpec::Circle {
                ambient_dim: self.ambient_dim.unwrap_or(2),
                radius: self.radius.unwrap_or(1.0),
                plane: self.plane.map_or((0, 1), |p| (p[0], p[1])),
            },
            "graph" => MeasureSpec::LipschitzGraph {
                base_dim: need(&self.base_dim, "base_dim", &variant)?,
                ambient_dim: need(&self.ambient_dim, "ambient_dim", &variant)?,
                table: GraphTable {
                    nodes_per_axis: need(&self.nodes_per_axis, "nodes_per_axis", &variant)?,
                    values: need(&self.values, "values", &variant)?,
                },
                domain: need(&self.domain, "domain", &variant)?.iter().map(|d| (d[0], d[1])).collect(),
            },
            other => return Err(Error::Config(format!("unknown measure variant `{other}`"))),
        };
        // scale presets and IFS masses by `mass`, spheres and circles keep their surface measure
        Ok(match (spec, self.mass) {
            (MeasureSpec::Ifs { ratio, offsets, .. }, Some(mass)) => MeasureSpec::Ifs { ratio, offsets, mass },
            (spec, _) => spec,
        })
    }

    /// Whether the support is a rectifiable surface (Weyl asymptotics apply).
    pub fn is_surface(&self) -> bool {
        matches!(self.variant.to_ascii_lowercase().as_str(), "sphere" | "circle" | "graph")
    }

    /// The next coarser level used by refinement studies (half the atoms or one generation less).
    pub fn coarser_level(&self) -> usize {
        match self.variant.to_ascii_lowercase().as_str() {
            "sphere" | "circle" => self.level / 2,
            _ => self.level.saturating_sub(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// `riesz:N:l`, `bessel:N:2l` or `power:alpha:c`.
    pub spec: String,
    #[serde(default)]
    pub diagonal: DiagonalRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    #[default]
    Constant,
    /// Independent uniform values in [low, high) from the config seed.
    Random,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default)]
    pub kind: DensityKind,
    #[serde(default = "one")]
    pub value: f64,
    #[serde(default = "half")]
    pub low: f64,
    #[serde(default = "three_halves")]
    pub high: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn three_halves() -> f64 {
    1.5
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig { kind: DensityKind::Constant, value: 1.0, low: 0.5, high: 1.5, values: None }
    }
}

impl DensityConfig {
    /// Density values on the atoms of `m`; `stream` separates independent random tables.
    pub fn table(&self, m: &AtomicMeasure, seed: u64, stream: u64) -> Result<Vec<f64>> {
        match self.kind {
            DensityKind::Constant => Ok(vec![self.value; m.len()]),
            DensityKind::Random => {
                if !(self.high > self.low) {
                    return Err(Error::Config("random density needs high > low".into()));
                }
                let mut rng = rng_for(seed, stream);
                Ok((0..m.len()).map(|_| rng.gen_range(self.low..self.high)).collect())
            }
            DensityKind::Table => {
                let v = self.values.clone().ok_or_else(|| Error::Config("density table needs `values`".into()))?;
                if v.len() != m.len() {
                    return Err(Error::Config(format!("density table has {} values for {} atoms", v.len(), m.len())));
                }
                Ok(v)
            }
        }
    }
}

/// Deterministic generator for stream `stream` of the config seed.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "auto")]
    pub window: String,
}

fn auto() -> String {
    "auto".into()
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window: auto() }
    }
}

/// Thresholds turned into pass flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "ten_percent")]
    pub theta_rel_tol: f64,
    #[serde(default = "twenty_percent")]
    pub coefficient_rel_tol: f64,
    /// Rerun one level coarser and compare.
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "quarter")]
    pub stability_rel_tol: f64,
    #[serde(default = "ten_percent")]
    pub defect_max: f64,
    #[serde(default = "ten_percent")]
    pub dilation_rel_tol: f64,
    #[serde(default = "three")]
    pub clr_refinement_factor: f64,
}

fn ten_percent() -> f64 {
    0.1
}
fn twenty_percent() -> f64 {
    0.2
}
fn quarter() -> f64 {
    0.25
}
fn three() -> f64 {
    3.0
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            theta_rel_tol: 0.1,
            coefficient_rel_tol: 0.2,
            refine: false,
            stability_rel_tol: 0.25,
            defect_max: 0.1,
            dilation_rel_tol: 0.1,
            clr_refinement_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationConfig {
    /// Translation of the second copy of the measure.
    pub offset: Vec<f64>,
    /// Optional second offset whose defect should be larger (closer copies).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_offset: Option<Vec<f64>>,
    /// Points of the geometric λ grid over one decade.
    #[serde(default = "sixty")]
    pub grid_points: usize,
}

fn sixty() -> usize {
    60
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeConfig {
    #[default]
    WeightsOutside,
    KernelsOutside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonsaConfig {
    #[serde(default)]
    pub shape: ShapeConfig,
    /// Lebesgue exponents of V₁ and V₂.
    pub r1: f64,
    pub r2: f64,
    /// Second kernel for the kernels-outside shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_kernel: Option<String>,
    /// Dilation factor of the set-independence probe.
    #[serde(default = "two")]
    pub dilation: f64,
    #[serde(default)]
    pub v1: DensityConfig,
    #[serde(default)]
    pub v2: DensityConfig,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringConfig {
    /// Number of random measures (uniform points with random weights in the unit cube).
    pub trials: usize,
    pub dims: Vec<usize>,
    pub atoms: usize,
    pub target_n: usize,
    #[serde(default = "quarter")]
    pub tol: f64,
    #[serde(default = "two")]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClrConfig {
    pub l: f64,
    pub cutoff: usize,
    pub g: Vec<f64>,
    /// Box side as a multiple of the measure diameter.
    #[serde(default = "four")]
    pub box_factor: f64,
}

fn four() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub measure: MeasureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonsa: Option<NonsaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering: Option<CoveringConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clr: Option<ClrConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form; output paths are excluded.
    pub fn config_hash(&self) -> String {
        let mut canon = self.clone();
        canon.output = OutputConfig::default();
        let json = serde_json::to_string(&canon).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let k = self.kernel.as_ref().ok_or_else(|| Error::Config("this experiment needs a [kernel] section".into()))?;
        k.spec.parse().map_err(|e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })
    }

    pub fn diagonal_rule(&self) -> DiagonalRule {
        self.kernel.as_ref().map(|k| k.diagonal).unwrap_or_default()
    }

    pub fn window(&self) -> Result<WindowRule> {
        WindowRule::parse(&self.fit.window).map_err(|e| Error::Config(e.to_string()))
    }

    /// Check that the kernel regime is admissible for the measure dimension before running.
    pub fn validate(&self) -> Result<()> {
        let spec = self.measure.to_spec().map_err(|e| Error::Config(e.to_string()))?;
        let s = spec.nominal_dim().map_err(|e| Error::Config(e.to_string()))?;
        self.window()?;
        if let Some(kc) = &self.kernel {
            let k = self.kernel_spec()?;
            crate::asymptotics::theta_from_gap(k.order_gap(), s)
                .map_err(|e| Error::Config(format!("kernel {} on a dimension-{s} measure: {e}", kc.spec)))?;
            if let Some((n, _)) = k.dims() {
                let ambient = spec.ambient_dim().map_err(|e| Error::Config(e.to_string()))?;
                if n != ambient {
                    return Err(Error::Config(format!("kernel acts in R^{n} but the measure lives in R^{ambient}")));
                }
            }
        }
        let needs = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("experiment needs a [{section}] section")))
            }
        };
        match self.experiment {
            ExperimentKind::Spectrum => needs(self.kernel.is_some(), "kernel"),
            ExperimentKind::Localization => {
                needs(self.kernel.is_some(), "kernel")?;
                needs(self.localization.is_some(), "localization")
            }
            ExperimentKind::Nonsa => {
                needs(self.kernel.is_some(), "kernel")?;
                needs(self.nonsa.is_some(), "nonsa")
            }
            ExperimentKind::Covering => needs(self.covering.is_some(), "covering"),
            ExperimentKind::Clr => needs(self.clr.is_some(), "clr"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = r#"
experiment = "spectrum"
seed = 3

[measure]
variant = "sphere"
ambient_dim = 3
radius = 1.0
level = 100

[kernel]
spec = "riesz:3:1"
diagonal = "cell-average"
"#;

    #[test]
    fn parses_and_hashes() {
        let cfg = ExperimentConfig::from_toml(SPHERE).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Spectrum);
        assert_eq!(cfg.diagonal_rule(), DiagonalRule::CellAverage);
        cfg.validate().unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.config_hash(), cfg.config_hash());
        let mut other = cfg.clone();
        other.seed = 4;
        assert_ne!(other.config_hash(), cfg.config_hash());
        let mut moved = cfg.clone();
        moved.output.dir = Some("elsewhere".into());
        assert_eq!(moved.config_hash(), cfg.config_hash());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("experiment = \"spectrum\"").is_err());
        let critical = SPHERE.replace("riesz:3:1", "riesz:3:0.5");
        // s = 2 = N − 2l is the excluded boundary
        assert!(matches!(ExperimentConfig::from_toml(&critical).unwrap().validate(), Err(Error::Config(_))));
        let typo = SPHERE.replace("radius", "raduis");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let wrong_space = SPHERE.replace("riesz:3:1", "riesz:2:0.75");
        assert!(ExperimentConfig::from_toml(&wrong_space).unwrap().validate().is_err());
    }

    #[test]
    fn random_densities_are_reproducible() {
        let cfg = ExperimentConfig::from_toml(SPHERE).unwrap();
        let m = crate::measure::discretize(&cfg.measure.to_spec().unwrap(), 50).unwrap();
        let d = DensityConfig { kind: DensityKind::Random, ..Default::default() };
        let a = d.table(&m, 9, 0).unwrap();
        assert_eq!(a, d.table(&m, 9, 0).unwrap());
        assert_ne!(a, d.table(&m, 9, 1).unwrap());
        assert!(a.iter().all(|x| (0.5..1.5).contains(x)));
    }
}
