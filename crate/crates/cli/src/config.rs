//! Experiment configuration: a single TOML file describing grid, physics,
//! initial data, weights, Hölder indices, time stepping, checks and output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use mflab_core::counting::WeightSpec;
use mflab_core::error::{Error as CoreError, Result as CoreResult};
use mflab_core::lattice::{GridSpec, LatticeField};
use mflab_core::meanfield::{Scheme, TrapKind, TrapProtocol};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub particles: ParticleSpec,
    pub interaction: InteractionConfig,
    pub trap: TrapConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightConfig>,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    pub time: TimeConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub points: usize,
}

/// A single particle number or a sweep list.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ParticleSpec {
    Single(u32),
    Sweep(Vec<u32>),
}

impl ParticleSpec {
    pub fn list(&self) -> Vec<u32> {
        match self {
            ParticleSpec::Single(n) => vec![*n],
            ParticleSpec::Sweep(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionProfile {
    Box,
    Gaussian,
    CosineBump,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub profile: InteractionProfile,
    pub amplitude: f64,
    /// Half-width of the support (box, cosine bump) or standard deviation
    /// (gaussian).
    pub width: f64,
    #[serde(default)]
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TrapKindConfig {
    Constant,
    LinearRampOff,
    Quench,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub kind: TrapKindConfig,
    pub amplitude: f64,
    #[serde(default)]
    pub ramp_time: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Product,
    OneDefect,
    Custom,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitalProfile {
    Flat,
    Bump,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "default_initial_state")]
    pub state: InitialState,
    #[serde(default = "default_orbital")]
    pub orbital: OrbitalProfile,
    /// Two-column text file (re im per site), used when `state = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbital_file: Option<String>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            state: default_initial_state(),
            orbital: default_orbital(),
            orbital_file: None,
        }
    }
}

fn default_initial_state() -> InitialState {
    InitialState::Product
}

fn default_orbital() -> OrbitalProfile {
    OrbitalProfile::Bump
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "family")]
pub enum WeightConfig {
    Linear,
    Power { exponent: f64 },
    Truncated { gamma: f64 },
    Custom { table: Vec<f64> },
}

fn default_weights() -> Vec<WeightConfig> {
    vec![WeightConfig::Linear]
}

fn default_r_values() -> Vec<f64> {
    vec![1.0, 1.5, 2.0, 4.0]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeConfig {
    Splitting,
    ExplicitRk4,
}

fn default_sample_every() -> usize {
    1
}

fn default_scheme() -> SchemeConfig {
    SchemeConfig::Splitting
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "default_true")]
    pub lemma2: bool,
    #[serde(default = "default_true")]
    pub theorem1: bool,
    #[serde(default = "default_true")]
    pub lemma1: bool,
    #[serde(default = "default_true")]
    pub conservation: bool,
    /// Re-run the physics at dt/2 and verify second-order consistency of the
    /// counting derivative.  Costs roughly three extra runs.
    #[serde(default)]
    pub derivative: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            lemma2: true,
            theorem1: true,
            lemma1: true,
            conservation: true,
            derivative: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub directory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: default_out_dir() }
    }
}

fn default_out_dir() -> String {
    "out".to_string()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(Self::from_toml_str(&text)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid_spec(&self) -> CoreResult<GridSpec> {
        GridSpec::new(self.grid.length, self.grid.points)
    }

    /// The unscaled interaction profile sampled on the grid.
    pub fn base_interaction(&self, grid: GridSpec) -> LatticeField {
        let amp = self.interaction.amplitude;
        let w = self.interaction.width;
        match self.interaction.profile {
            InteractionProfile::Box => LatticeField::from_real_fn(grid, move |x| {
                if x.abs() <= w + 1e-12 {
                    amp
                } else {
                    0.0
                }
            }),
            InteractionProfile::Gaussian => {
                LatticeField::from_real_fn(grid, move |x| amp * (-x * x / (2.0 * w * w)).exp())
            }
            InteractionProfile::CosineBump => LatticeField::from_real_fn(grid, move |x| {
                if x.abs() <= w + 1e-12 {
                    amp * 0.5 * (1.0 + (std::f64::consts::PI * x / w).cos())
                } else {
                    0.0
                }
            }),
        }
    }

    /// Smooth periodic well, zero at the box center.
    pub fn trap_protocol(&self, grid: GridSpec) -> CoreResult<TrapProtocol> {
        let amp = self.trap.amplitude;
        let l = grid.length();
        let profile = LatticeField::from_real_fn(grid, move |x| {
            amp * 0.5 * (1.0 - (2.0 * std::f64::consts::PI * x / l).cos())
        });
        match self.trap.kind {
            TrapKindConfig::Constant => Ok(TrapProtocol::constant(profile)),
            TrapKindConfig::LinearRampOff => {
                TrapProtocol::new(TrapKind::LinearRampOff, profile, self.trap.ramp_time)
            }
            TrapKindConfig::Quench => {
                TrapProtocol::new(TrapKind::Quench, profile, self.trap.ramp_time)
            }
        }
    }

    pub fn initial_orbital_field(&self, grid: GridSpec) -> CoreResult<LatticeField> {
        if let Some(path) = &self.initial.orbital_file {
            return load_orbital_file(Path::new(path), grid);
        }
        Ok(match self.initial.orbital {
            OrbitalProfile::Flat => LatticeField::constant(grid, C64::new(1.0, 0.0)),
            OrbitalProfile::Bump => {
                let l = grid.length();
                LatticeField::from_real_fn(grid, move |x| {
                    1.0 + 0.5 * (2.0 * std::f64::consts::PI * x / l).cos()
                })
            }
        })
    }

    pub fn weight_specs(&self, particles: u32) -> CoreResult<Vec<(String, WeightSpec)>> {
        self.weights
            .iter()
            .map(|w| {
                Ok(match w {
                    WeightConfig::Linear => ("linear".to_string(), WeightSpec::linear(particles)),
                    WeightConfig::Power { exponent } => (
                        format!("power_{exponent}"),
                        WeightSpec::power(particles, *exponent)?,
                    ),
                    WeightConfig::Truncated { gamma } => (
                        format!("truncated_{gamma}"),
                        WeightSpec::truncated(particles, *gamma)?,
                    ),
                    WeightConfig::Custom { table } => {
                        let spec = WeightSpec::custom(table.clone())?;
                        if spec.particles() != particles {
                            return Err(CoreError::InvalidArgument(format!(
                                "custom weight table has {} entries, need {}",
                                table.len(),
                                particles + 1
                            )));
                        }
                        ("custom".to_string(), spec)
                    }
                })
            })
            .collect()
    }

    pub fn scheme(&self) -> Scheme {
        match self.time.scheme {
            SchemeConfig::Splitting => Scheme::Splitting,
            SchemeConfig::ExplicitRk4 => Scheme::ExplicitRk4,
        }
    }

    /// Resolve the sweep into a per-run config with a single particle number.
    pub fn with_particles(&self, n: u32) -> ExperimentConfig {
        let mut cfg = self.clone();
        cfg.particles = ParticleSpec::Single(n);
        cfg
    }

    pub fn validate(&self) -> CoreResult<()> {
        if self.particles.list().is_empty() {
            return Err(CoreError::InvalidArgument("particle list must not be empty".into()));
        }
        if self.r_values.is_empty() || self.r_values.iter().any(|&r| r < 1.0) {
            return Err(CoreError::InvalidArgument(
                "r_values must be nonempty with every r >= 1".into(),
            ));
        }
        if self.time.sample_every == 0 {
            return Err(CoreError::InvalidArgument("sample_every must be positive".into()));
        }
        self.grid_spec()?;
        Ok(())
    }
}

fn load_orbital_file(path: &Path, grid: GridSpec) -> CoreResult<LatticeField> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CoreError::InvalidArgument(format!("cannot read orbital file {}: {e}", path.display()))
    })?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| CoreError::InvalidArgument(format!("orbital file line {}", lineno + 1)))?;
        let im: f64 = parts.next().map(|p| p.parse().unwrap_or(0.0)).unwrap_or(0.0);
        values.push(C64::new(re, im));
    }
    LatticeField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const EXAMPLE: &str = r#"
seed = 42
particles = 3
r_values = [1.0, 2.0]

[grid]
length = 6.283185307179586
points = 8

[interaction]
profile = "box"
amplitude = 0.5
width = 1.0

[trap]
kind = "constant"
amplitude = 0.3

[initial]
state = "product"
orbital = "bump"

[[weights]]
family = "linear"

[[weights]]
family = "power"
exponent = 2.0

[time]
dt = 0.002
t_final = 0.1

[output]
directory = "out/demo"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.particles.list(), vec![3]);
        assert_eq!(cfg.weights.len(), 2);
        cfg.validate().unwrap();

        let text = cfg.to_toml_string();
        let again = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn missing_grid_is_a_parse_error() {
        let broken = EXAMPLE.replace("[grid]", "[grd]");
        assert!(ExperimentConfig::from_toml_str(&broken).is_err());
    }

    #[test]
    fn sweep_lists_parse() {
        let text = EXAMPLE.replace("particles = 3", "particles = [2, 3, 4]");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.particles.list(), vec![2, 3, 4]);
    }

    #[test]
    fn interaction_profiles_are_even() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        let g = cfg.grid_spec().unwrap();
        for profile in [
            InteractionProfile::Box,
            InteractionProfile::Gaussian,
            InteractionProfile::CosineBump,
        ] {
            let mut c = cfg.clone();
            c.interaction.profile = profile;
            let v = c.base_interaction(g);
            assert!(v.evenness_defect() <= 1e-12);
        }
    }
}
