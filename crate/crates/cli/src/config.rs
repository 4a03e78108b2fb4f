//! Experiment configuration: JSON files, named presets and unit handling.

use std::path::{Path, PathBuf};

use loc1d::potential::PotentialSpec;
use loc1d::profile::EnergyWindow;
use loc1d::spectral::WavePacketSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Boundaries of the default energy windows.
pub const WINDOW_BOUNDARIES: [f64; 5] = [0.0, 0.103, 0.178, 0.278, 0.403];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub wavepacket: WavePacketConfig,
    #[serde(rename = "box")]
    pub box_: BoxConfig,
    pub ensemble: EnsembleConfig,
    #[serde(default = "default_windows")]
    pub windows: Vec<WindowBounds>,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    #[serde(default)]
    pub pofe: PofeConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub v0: Strengths,
    #[serde(default = "one")]
    pub sigma_c: f64,
}

/// One disorder strength or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strengths {
    One(f64),
    Many(Vec<f64>),
}

impl Strengths {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Strengths::One(v) => vec![*v],
            Strengths::Many(v) => v.clone(),
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Strengths {
        match self {
            Strengths::One(v) => Strengths::One(f(*v)),
            Strengths::Many(v) => Strengths::Many(v.iter().map(|&x| f(x)).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacketConfig {
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub length: f64,
    pub n_grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub n_real: u64,
}

/// Energy window (lo, hi]; null stands for an infinite end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowBounds(pub Option<f64>, pub Option<f64>);

impl WindowBounds {
    pub fn window(&self) -> Result<EnergyWindow, CliError> {
        EnergyWindow::new(
            self.0.unwrap_or(f64::NEG_INFINITY),
            self.1.unwrap_or(f64::INFINITY),
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv],
        }
    }
}

/// Energy grid and transfer-matrix effort of the `lyapunov` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    pub energies: Vec<f64>,
    /// Total propagation length per energy, split over the realizations.
    pub total_length: f64,
    pub n_real: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            energies: (0..15).map(|k| 0.05 + 1.95 * k as f64 / 14.0).collect(),
            total_length: 2e5,
            n_real: 16,
        }
    }
}

/// Energy bins of the numerical energy distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PofeConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub bins: usize,
}

impl Default for PofeConfig {
    fn default() -> Self {
        PofeConfig {
            e_min: -0.2,
            e_max: 2.0,
            bins: 11000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// Approximate number of output rows; the ring grid is subsampled.
    pub n_points: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { n_points: 801 }
    }
}

fn one() -> f64 {
    1.0
}

fn default_windows() -> Vec<WindowBounds> {
    let mut edges = vec![None];
    edges.extend(WINDOW_BOUNDARIES.iter().map(|&b| Some(b)));
    edges.push(None);
    edges.windows(2).map(|w| WindowBounds(w[0], w[1])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Desk,
    /// Long-running: hours on a workstation.
    Paper,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        let desk = ExperimentConfig {
            model: ModelConfig {
                v0: Strengths::Many(vec![0.0165, 0.0325]),
                sigma_c: 1.0,
            },
            wavepacket: WavePacketConfig {
                a: std::f64::consts::SQRT_2,
            },
            box_: BoxConfig {
                length: 200.0,
                n_grid: 3200,
            },
            ensemble: EnsembleConfig {
                seed: 1,
                n_real: 200,
            },
            windows: default_windows(),
            outputs: OutputConfig::default(),
            lyapunov: LyapunovConfig::default(),
            pofe: PofeConfig::default(),
            profile: ProfileConfig::default(),
        };
        match p {
            Preset::Desk => desk,
            Preset::Paper => ExperimentConfig {
                box_: BoxConfig {
                    length: 800.0,
                    n_grid: 40000,
                },
                ensemble: EnsembleConfig {
                    seed: 1,
                    n_real: 2000,
                },
                ..desk
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Converts to units where sigma_c = 1: lengths are divided by sigma_c
    /// and energies multiplied by sigma_c^2.
    pub fn normalized(&self) -> Self {
        let s = self.model.sigma_c;
        let e = |x: f64| x * s * s;
        let bound = |b: Option<f64>| b.map(e);
        ExperimentConfig {
            model: ModelConfig {
                v0: self.model.v0.map(e),
                sigma_c: 1.0,
            },
            wavepacket: WavePacketConfig {
                a: self.wavepacket.a / s,
            },
            box_: BoxConfig {
                length: self.box_.length / s,
                n_grid: self.box_.n_grid,
            },
            ensemble: self.ensemble,
            windows: self
                .windows
                .iter()
                .map(|w| WindowBounds(bound(w.0), bound(w.1)))
                .collect(),
            outputs: self.outputs.clone(),
            lyapunov: LyapunovConfig {
                energies: self.lyapunov.energies.iter().map(|&x| e(x)).collect(),
                total_length: self.lyapunov.total_length / s,
                n_real: self.lyapunov.n_real,
            },
            pofe: PofeConfig {
                e_min: e(self.pofe.e_min),
                e_max: e(self.pofe.e_max),
                bins: self.pofe.bins,
            },
            profile: self.profile,
        }
    }

    /// Checks every field against the preconditions of the modules that use
    /// it. Expects a normalized config.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.model.sigma_c > 0.0 && self.model.sigma_c.is_finite()) {
            return usage(format!("sigma_c must be > 0, got {}", self.model.sigma_c));
        }
        let v0s = self.model.v0.values();
        if v0s.is_empty() {
            return usage("model.v0 is an empty list".into());
        }
        WavePacketSpec::new(self.wavepacket.a).map_err(|e| CliError::Usage(e.to_string()))?;
        for &v0 in &v0s {
            self.potential_spec(v0)
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if self.ensemble.n_real < 2 {
            return usage(format!(
                "ensemble.n_real must be >= 2, got {}",
                self.ensemble.n_real
            ));
        }
        for w in &self.windows {
            w.window()?;
        }
        if self.outputs.formats.is_empty() {
            return usage("outputs.formats is empty".into());
        }
        if self.lyapunov.energies.is_empty() {
            return usage("lyapunov.energies is empty".into());
        }
        if self.lyapunov.energies.iter().any(|e| !e.is_finite()) {
            return usage("lyapunov.energies must be finite".into());
        }
        if !(self.lyapunov.total_length > 0.0) || self.lyapunov.n_real < 2 {
            return usage("lyapunov needs total_length > 0 and n_real >= 2".into());
        }
        if !(self.pofe.e_min < self.pofe.e_max) || self.pofe.bins == 0 {
            return usage(format!(
                "pofe bins need e_min < e_max and bins > 0, got [{}, {}) x {}",
                self.pofe.e_min, self.pofe.e_max, self.pofe.bins
            ));
        }
        if self.profile.n_points < 2 {
            return usage("profile.n_points must be >= 2".into());
        }
        Ok(())
    }

    pub fn potential_spec(&self, v0: f64) -> PotentialSpec {
        PotentialSpec {
            v0,
            sigma_c: self.model.sigma_c,
            box_length: self.box_.length,
            n_grid: self.box_.n_grid,
            seed: self.ensemble.seed,
        }
    }

    pub fn wave_packet(&self) -> WavePacketSpec {
        WavePacketSpec {
            a: self.wavepacket.a,
        }
    }

    pub fn energy_windows(&self) -> Result<Vec<EnergyWindow>, CliError> {
        self.windows.iter().map(WindowBounds::window).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_windows_cover_the_line() {
        let w = default_windows();
        assert_eq!(w.len(), 6);
        assert_eq!(w[0], WindowBounds(None, Some(0.0)));
        assert_eq!(w[5], WindowBounds(Some(0.403), None));
    }

    #[test]
    fn rescaling_to_unit_correlation_length() {
        let mut c = ExperimentConfig::preset(Preset::Desk);
        c.model.sigma_c = 2.0;
        c.model.v0 = Strengths::One(0.01);
        c.box_.length = 400.0;
        let n = c.normalized();
        assert_eq!(n.model.sigma_c, 1.0);
        assert_eq!(n.model.v0, Strengths::One(0.04));
        assert_eq!(n.box_.length, 200.0);
        assert_eq!(n.wavepacket.a, std::f64::consts::SQRT_2 / 2.0);
        assert_eq!(n.windows[1], WindowBounds(Some(0.0), Some(0.412)));
        assert_eq!(n.normalized(), n);
    }
}
