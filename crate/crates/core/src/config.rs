//! JSON run configuration in human units (dB/km, ps/nm/km, GHz, dBm),
//! converted to SI when a [`Scenario`] is built. See `docs/config.md`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NliError, Result};
use crate::fiber::{FiberParams, FiberSpec};
use crate::grid::{Channel, ChannelGrid};
use crate::integral::{IntegralOptions, LinkKernel};
use crate::modulation::{ConstellationPoint, ModulationFormat};
use crate::plan::{AseModel, LinkPlan};
use crate::raman::{
    fit_effective_params, log_z_grid, solve_raman_odes, EffectiveParams, RamanGainSpectrum, RamanOdeOptions,
    Validity,
};
use crate::ssfm::{SimulationPlan, StepDistribution};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Smf,
    Nzdsf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub fiber: FiberConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub raman: RamanConfig,
    #[serde(default)]
    pub integral: IntegralConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub identity: IdentityConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub attenuation_db_per_km: Option<f64>,
    pub effective_attenuation_db_per_km: Option<f64>,
    pub dispersion_ps_nm_km: Option<f64>,
    pub slope_ps_nm2_km: Option<f64>,
    pub gamma_per_w_km: Option<f64>,
    pub raman_slope_per_w_km_thz: Option<f64>,
    pub span_length_km: Option<f64>,
    pub reference_wavelength_nm: Option<f64>,
}

/// A format by name (`"qpsk"`, `"64qam"`, `"gaussian"`), by excess kurtosis,
/// by Maxwell–Boltzmann shaping of a square QAM, or by explicit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FormatConfig {
    Name(String),
    Kurtosis { name: String, kurtosis: f64 },
    Shaped { qam: usize, shaping: f64 },
    Points { name: String, points: Vec<[f64; 2]>, probabilities: Option<Vec<f64>> },
}

impl FormatConfig {
    pub fn build(&self) -> Result<ModulationFormat> {
        match self {
            FormatConfig::Name(n) => ModulationFormat::by_name(n),
            FormatConfig::Kurtosis { name, kurtosis } => ModulationFormat::with_kurtosis(name.clone(), *kurtosis),
            FormatConfig::Shaped { qam, shaping } => ModulationFormat::maxwell_boltzmann_qam(*qam, *shaping),
            FormatConfig::Points { name, points, probabilities } => {
                let n = points.len();
                let probs = match probabilities {
                    Some(p) if p.len() != n => {
                        return Err(NliError::Config("points and probabilities differ in length".into()))
                    }
                    Some(p) => p.clone(),
                    None => vec![1.0 / n as f64; n],
                };
                let pts = points
                    .iter()
                    .zip(probs)
                    .map(|(p, probability)| ConstellationPoint { point: Complex64::new(p[0], p[1]), probability })
                    .collect();
                ModulationFormat::from_constellation(name.clone(), pts)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub freq_ghz: f64,
    pub bandwidth_ghz: f64,
    pub power_w: f64,
    pub format: FormatConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelOverride {
    pub index: usize,
    pub format: Option<FormatConfig>,
    pub power_dbm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub channels: Option<usize>,
    pub spacing_ghz: Option<f64>,
    pub bandwidth_ghz: Option<f64>,
    pub power_dbm: Option<f64>,
    /// Linear launch-power tilt across the band, dB/THz.
    pub tilt_db_per_thz: Option<f64>,
    pub format: Option<FormatConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ChannelOverride>,
    /// Explicit channel list; replaces the uniform comb when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<ChannelConfig>>,
    pub reference_wavelength_nm: Option<f64>,
}

impl GridConfig {
    /// Explicit-channel form of an existing grid. Formats without a point set
    /// are written by kurtosis.
    pub fn from_grid(grid: &ChannelGrid) -> Self {
        let explicit = grid
            .channels()
            .iter()
            .map(|c| ChannelConfig {
                freq_ghz: c.center_freq / 1e9,
                bandwidth_ghz: c.bandwidth / 1e9,
                power_w: c.launch_power,
                format: match c.modulation.constellation() {
                    Some(points) => FormatConfig::Points {
                        name: c.modulation.name().to_string(),
                        points: points.iter().map(|p| [p.point.re, p.point.im]).collect(),
                        probabilities: Some(points.iter().map(|p| p.probability).collect()),
                    },
                    None if c.modulation.is_gaussian() => FormatConfig::Name("gaussian".into()),
                    None => FormatConfig::Kurtosis {
                        name: c.modulation.name().to_string(),
                        kurtosis: c.modulation.excess_kurtosis(),
                    },
                },
            })
            .collect();
        Self {
            explicit: Some(explicit),
            reference_wavelength_nm: Some(grid.reference_wavelength() * 1e9),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AseConfig {
    UniformW(f64),
    PerChannelW(Vec<f64>),
    NoiseFigureDb(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub spans: Option<usize>,
    pub epsilon: Option<f64>,
    pub ase: Option<AseConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RamanMode {
    /// Closed-form triangular profile with the fiber's (α, C_r).
    #[default]
    Triangular,
    /// Per-channel (α, ᾱ, C_r) fitted to a numerically solved profile.
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumConfig {
    /// `"linear"` or `"silica"`.
    Named(String),
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanConfig {
    pub mode: Option<RamanMode>,
    pub spectrum: Option<SpectrumConfig>,
    pub photon_correction: Option<bool>,
    /// Allow the triangular model beyond 15 THz.
    pub extrapolate: Option<bool>,
    pub fit_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralConfig {
    /// `"approx"` (default) or `"exact"`.
    pub kernel: Option<String>,
    pub channels: Option<Vec<usize>>,
    pub relative_tolerance_1d: Option<f64>,
    pub relative_tolerance_2d: Option<f64>,
    pub link_panels: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub symbols_log2: Option<u32>,
    pub samples_per_symbol: Option<usize>,
    pub steps_per_span: Option<usize>,
    /// `"logarithmic"` or `"uniform"`.
    pub step_distribution: Option<String>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
    pub roll_off: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub spans: Option<Vec<usize>>,
    pub channels: Option<Vec<usize>>,
    /// Any of `"cf"`, `"int"`, `"ssfm"`.
    pub tiers: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub spans: Option<Vec<usize>>,
    pub formats: Option<Vec<FormatConfig>>,
    pub power_dbm: Option<Vec<f64>>,
    pub channels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    /// `(a, b)` pairs with `b ≥ a > 0`.
    pub pairs: Option<Vec<[f64; 2]>>,
    pub n: Option<Vec<usize>>,
}

/// Everything a command needs, in SI.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: ChannelGrid,
    pub fiber: FiberSpec,
    pub plan: LinkPlan,
    /// Per-channel parameters when the Raman mode is `fitted`.
    pub params: Option<EffectiveParams>,
    pub validity: Validity,
    pub integral: IntegralOptions,
    pub integral_channels: Vec<usize>,
    pub simulation: SimulationPlan,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| NliError::Config(format!("line {}: {e}", e.line())))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            NliError::Config(m) => NliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn preset(preset: Preset) -> Self {
        Self { preset: Some(preset), ..Default::default() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build_fiber(&self) -> Result<FiberSpec> {
        let base = match self.preset.unwrap_or(Preset::Smf) {
            Preset::Smf => FiberSpec::standard_smf(),
            Preset::Nzdsf => FiberSpec::nzdsf(),
        };
        let f = &self.fiber;
        let mut p: FiberParams = base.params();
        if let Some(v) = f.attenuation_db_per_km {
            p.attenuation = units::attenuation_db_per_km_to_natural(v)?;
        }
        if let Some(v) = f.dispersion_ps_nm_km {
            p.dispersion = units::ps_per_nm_km(v);
        }
        if let Some(v) = f.slope_ps_nm2_km {
            p.dispersion_slope = units::ps_per_nm2_km(v);
        }
        if let Some(v) = f.gamma_per_w_km {
            p.gamma = units::per_w_km(v);
        }
        if let Some(v) = f.raman_slope_per_w_km_thz {
            p.raman_slope = units::per_w_km_thz(v);
        }
        if let Some(v) = f.span_length_km {
            p.span_length = v * 1e3;
        }
        if let Some(v) = f.reference_wavelength_nm {
            p.reference_wavelength = v / 1e9;
        }
        let fiber = FiberSpec::new(p)?;
        match f.effective_attenuation_db_per_km {
            Some(v) => fiber.with_effective_attenuation(units::attenuation_db_per_km_to_natural(v)?),
            None => Ok(fiber),
        }
    }

    pub fn build_grid(&self) -> Result<ChannelGrid> {
        let g = &self.grid;
        let wavelength = g.reference_wavelength_nm.or(self.fiber.reference_wavelength_nm).unwrap_or(1550.0) / 1e9;
        if let Some(explicit) = &g.explicit {
            let channels = explicit
                .iter()
                .map(|c| {
                    Ok(Channel {
                        center_freq: c.freq_ghz * 1e9,
                        bandwidth: c.bandwidth_ghz * 1e9,
                        launch_power: c.power_w,
                        modulation: c.format.build()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return ChannelGrid::new(channels, wavelength);
        }
        let default_power = match self.preset.unwrap_or(Preset::Smf) {
            Preset::Smf => 0.0,
            Preset::Nzdsf => -2.0,
        };
        let count = g.channels.unwrap_or(251);
        let spacing = g.spacing_ghz.unwrap_or(40.005) * 1e9;
        let bandwidth = g.bandwidth_ghz.unwrap_or(40.004) * 1e9;
        let power = units::dbm_to_watt(g.power_dbm.unwrap_or(default_power));
        let format = match &g.format {
            Some(f) => f.build()?,
            None => ModulationFormat::gaussian(),
        };
        let mut grid = ChannelGrid::uniform(count, spacing, bandwidth, power, format, wavelength)?;
        let tilt = g.tilt_db_per_thz.unwrap_or(0.0);
        if tilt != 0.0 || !g.overrides.is_empty() {
            let mut channels = grid.channels().to_vec();
            for c in channels.iter_mut() {
                c.launch_power *= units::db_to_linear(tilt * c.center_freq / 1e12);
            }
            for o in &g.overrides {
                let c = channels
                    .get_mut(o.index)
                    .ok_or_else(|| NliError::Config(format!("override index {} outside the grid", o.index)))?;
                if let Some(f) = &o.format {
                    c.modulation = f.build()?;
                }
                if let Some(p) = o.power_dbm {
                    c.launch_power = units::dbm_to_watt(p);
                }
            }
            grid = ChannelGrid::new(channels, wavelength)?;
        }
        Ok(grid)
    }

    pub fn build_plan(&self, spans: Option<usize>, epsilon: Option<f64>) -> Result<LinkPlan> {
        let l = &self.link;
        let plan = LinkPlan::new(spans.or(l.spans).unwrap_or(1))?
            .with_coherence_exponent(epsilon.or(l.epsilon).unwrap_or(0.0))?;
        match &l.ase {
            None => Ok(plan),
            Some(AseConfig::UniformW(p)) => plan.with_ase(AseModel::Uniform(*p)),
            Some(AseConfig::PerChannelW(v)) => plan.with_ase(AseModel::PerChannel(v.clone())),
            Some(AseConfig::NoiseFigureDb(nf)) => plan.with_ase(AseModel::Amplifier { noise_figure_db: *nf }),
        }
    }

    pub fn build_simulation(&self, seed: Option<u64>) -> Result<SimulationPlan> {
        let s = &self.simulation;
        let d = SimulationPlan::default();
        let step_distribution = match s.step_distribution.as_deref() {
            None | Some("logarithmic") => StepDistribution::Logarithmic,
            Some("uniform") => StepDistribution::Uniform,
            Some(other) => return Err(NliError::Config(format!("unknown step distribution '{other}'"))),
        };
        let plan = SimulationPlan {
            symbols_per_channel: s.symbols_log2.map_or(d.symbols_per_channel, |k| 1usize << k),
            samples_per_symbol: s.samples_per_symbol.unwrap_or(d.samples_per_symbol),
            steps_per_span: s.steps_per_span.unwrap_or(d.steps_per_span),
            step_distribution,
            realizations: s.realizations.unwrap_or(d.realizations),
            rng_seed: seed.or(s.seed).unwrap_or(d.rng_seed),
            roll_off: s.roll_off.unwrap_or(d.roll_off),
        };
        plan.validate()?;
        Ok(plan)
    }

    fn build_integral(&self, grid: &ChannelGrid) -> Result<(IntegralOptions, Vec<usize>)> {
        let c = &self.integral;
        let kernel = match c.kernel.as_deref() {
            None | Some("approx") => LinkKernel::XpmApprox,
            Some("exact") => LinkKernel::Exact,
            Some(other) => return Err(NliError::Config(format!("unknown link kernel '{other}'"))),
        };
        let mut opts = IntegralOptions { kernel, ..Default::default() };
        if let Some(r) = c.relative_tolerance_1d {
            opts.quad_1d = opts.quad_1d.with_relative_tolerance(r);
        }
        if let Some(r) = c.relative_tolerance_2d {
            opts.quad_2d = opts.quad_2d.with_relative_tolerance(r);
        }
        if let Some(p) = c.link_panels {
            opts.link_panels = p;
        }
        let channels = c.channels.clone().unwrap_or_else(|| vec![grid.len() / 2]);
        check_channels(&channels, grid)?;
        Ok((opts, channels))
    }

    fn build_params(&self, grid: &ChannelGrid, fiber: &FiberSpec) -> Result<Option<EffectiveParams>> {
        let r = &self.raman;
        if r.mode.unwrap_or_default() == RamanMode::Triangular {
            return Ok(None);
        }
        let spectrum = match &r.spectrum {
            None => RamanGainSpectrum::silica_like(fiber.raman_slope()),
            Some(SpectrumConfig::Named(n)) if n == "linear" => RamanGainSpectrum::Linear { slope: fiber.raman_slope() },
            Some(SpectrumConfig::Named(n)) if n == "silica" => RamanGainSpectrum::silica_like(fiber.raman_slope()),
            Some(SpectrumConfig::Named(n)) => return Err(NliError::Config(format!("unknown Raman spectrum '{n}'"))),
            Some(SpectrumConfig::Csv { csv }) => RamanGainSpectrum::from_csv(csv)?,
        };
        let z = log_z_grid(fiber.attenuation(), fiber.span_length(), r.fit_points.unwrap_or(64))?;
        let options = RamanOdeOptions { photon_correction: r.photon_correction.unwrap_or(false), ..Default::default() };
        let profile = solve_raman_odes(grid, fiber, &spectrum, &z, &options)?;
        Ok(Some(fit_effective_params(&profile, grid)?))
    }

    /// Builds the SI scenario, applying command-line overrides.
    pub fn scenario(&self, spans: Option<usize>, epsilon: Option<f64>, seed: Option<u64>) -> Result<Scenario> {
        let fiber = self.build_fiber()?;
        let grid = self.build_grid()?;
        let plan = self.build_plan(spans, epsilon)?;
        let validity = if self.raman.extrapolate.unwrap_or(false) { Validity::Extrapolate } else { Validity::Enforce };
        let (integral, integral_channels) = self.build_integral(&grid)?;
        let params = self.build_params(&grid, &fiber)?;
        let simulation = self.build_simulation(seed)?;
        Ok(Scenario { grid, fiber, plan, params, validity, integral, integral_channels, simulation })
    }
}

pub(crate) fn check_channels(channels: &[usize], grid: &ChannelGrid) -> Result<()> {
    match channels.iter().find(|&&i| i >= grid.len()) {
        Some(i) => Err(NliError::Config(format!("channel index {i} outside a {}-channel grid", grid.len()))),
        None => Ok(()),
    }
}
