//! Signal power evolution along one span under inter-channel stimulated
//! Raman scattering, and per-channel effective parameters fitted to it.

use std::path::Path;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DMatrix, DVector, Dyn, Owned, U3};
use ode_solvers::continuous_output_model::ContinuousOutputModel;
use ode_solvers::{Dopri5, System};

use crate::error::{domain, NliError, Result};
use crate::fiber::{effective_length, FiberSpec};
use crate::grid::ChannelGrid;
use crate::units::{linear_to_db, sinhc};

/// Largest optical bandwidth for which the linear (triangular) Raman gain
/// approximation holds.
pub const TRIANGULAR_LIMIT: f64 = 15e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validity {
    /// Reject grids wider than [`TRIANGULAR_LIMIT`].
    #[default]
    Enforce,
    /// Evaluate regardless of bandwidth.
    Extrapolate,
}

/// Per-channel power (W) sampled on a common z-grid (m).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    z: Vec<f64>,
    power: Vec<Vec<f64>>,
}

impl PowerProfile {
    pub fn new(z: Vec<f64>, power: Vec<Vec<f64>>) -> Result<Self> {
        if z.is_empty() {
            return domain("power profile needs at least one z sample");
        }
        if z.windows(2).any(|w| w[1] <= w[0]) || z[0] < 0.0 {
            return domain("z grid must be non-negative and strictly increasing");
        }
        for (i, row) in power.iter().enumerate() {
            if row.len() != z.len() {
                return domain(format!("channel {i}: {} samples for {} positions", row.len(), z.len()));
            }
            if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return domain(format!("channel {i}: powers must be finite and non-negative"));
            }
        }
        Ok(Self { z, power })
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Power of `channel` at every z sample.
    pub fn channel(&self, channel: usize) -> &[f64] {
        &self.power[channel]
    }

    pub fn channel_count(&self) -> usize {
        self.power.len()
    }

    /// Sum over channels at z sample `j`.
    pub fn total(&self, j: usize) -> f64 {
        self.power.iter().map(|row| row[j]).sum()
    }

    /// Power at the last z sample for every channel.
    pub fn output(&self) -> Vec<f64> {
        self.power.iter().map(|row| *row.last().expect("non-empty")).collect()
    }
}

/// `count` positions on `[0, length]` with equal attenuation-weighted
/// effective length between neighbours: dense where the power is high.
pub fn log_z_grid(attenuation: f64, length: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return domain("z grid needs at least two points");
    }
    if !(attenuation > 0.0) || !(length > 0.0) {
        return domain("attenuation and length must be positive");
    }
    let total = -(-attenuation * length).exp_m1();
    let mut z: Vec<f64> = (0..count)
        .map(|j| -(-(j as f64) * total / (count - 1) as f64).ln_1p() / attenuation)
        .collect();
    z[count - 1] = length;
    Ok(z)
}

/// Fails with [`NliError::RamanValidity`] when `validity` is `Enforce` and the
/// grid is wider than [`TRIANGULAR_LIMIT`].
pub fn check_bandwidth(grid: &ChannelGrid, validity: Validity) -> Result<()> {
    let bw = grid.optical_bandwidth();
    if validity == Validity::Enforce && bw > TRIANGULAR_LIMIT {
        return Err(NliError::RamanValidity { bandwidth_thz: bw * 1e-12, limit_thz: TRIANGULAR_LIMIT * 1e-12 });
    }
    Ok(())
}

/// Power of every channel under the linear-gain (triangular) Raman model:
/// `P_i(z) = P_i e^{-αz} e^{-x f_i} sinhc(x B_i/2) / N(x)` with
/// `x = P_tot C_r L_eff(z)` and `N` the band-integrated normalization, so the
/// total power decays exactly as `e^{-αz}`.
pub fn triangular_profile(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    z: &[f64],
    validity: Validity,
) -> Result<PowerProfile> {
    check_bandwidth(grid, validity)?;
    let mut power = vec![Vec::with_capacity(z.len()); grid.len()];
    for &zz in z {
        let x = grid.total_power() * fiber.raman_slope() * fiber.effective_length(zz);
        let norm = grid.spectrum_normalization(x);
        let decay = (-fiber.attenuation() * zz).exp();
        for (row, ch) in power.iter_mut().zip(grid.channels()) {
            row.push(ch.launch_power * decay * (-x * ch.center_freq).exp() * sinhc(0.5 * x * ch.bandwidth) / norm);
        }
    }
    PowerProfile::new(z.to_vec(), power)
}

/// Raman gain coefficient `g(Δ)` in 1/(W·m) for a pump `Δ` Hz above the
/// signal. Negative offsets are handled by odd extension.
#[derive(Debug, Clone, PartialEq)]
pub enum RamanGainSpectrum {
    /// `g(Δ) = C_r·Δ`.
    Linear { slope: f64 },
    /// `g(Δ) = g_p sin(πΔ/(2Δ_p))` for `0 ≤ Δ ≤ 2Δ_p`, zero beyond: a smooth
    /// single-lobe stand-in for the silica gain curve.
    SineLobe { peak_offset: f64, peak_gain: f64 },
    /// Piecewise-linear samples, offsets ascending from 0.
    Sampled { offsets: Vec<f64>, gains: Vec<f64> },
}

impl RamanGainSpectrum {
    /// Sine lobe peaking at 13.2 THz whose slope at the origin equals `slope`.
    pub fn silica_like(slope: f64) -> Self {
        let peak_offset = 13.2e12;
        Self::SineLobe { peak_offset, peak_gain: 2.0 * slope * peak_offset / std::f64::consts::PI }
    }

    pub fn sampled(offsets: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        if offsets.len() != gains.len() || offsets.len() < 2 {
            return domain("gain spectrum needs at least two (offset, gain) samples");
        }
        if offsets[0] != 0.0 || offsets.windows(2).any(|w| w[1] <= w[0]) {
            return domain("gain spectrum offsets must start at 0 and increase strictly");
        }
        if gains.iter().chain(&offsets).any(|v| !v.is_finite()) {
            return domain("gain spectrum contains non-finite values");
        }
        Ok(Self::Sampled { offsets, gains })
    }

    /// Reads a two-column CSV (offset in Hz, gain in 1/(W·m)); a header row
    /// and `#` comments are allowed.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path.as_ref())
            .map_err(|e| NliError::Config(e.to_string()))?;
        let (mut offsets, mut gains) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| NliError::Config(e.to_string()))?;
            if record.len() != 2 {
                return Err(NliError::Config(format!("gain CSV line {}: expected 2 columns", line + 1)));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(f), Ok(g)) => {
                    offsets.push(f);
                    gains.push(g);
                }
                _ if line == 0 => continue,
                _ => return Err(NliError::Config(format!("gain CSV line {}: not numeric", line + 1))),
            }
        }
        Self::sampled(offsets, gains)
    }

    fn max_offset(&self) -> f64 {
        match self {
            Self::Linear { .. } | Self::SineLobe { .. } => f64::INFINITY,
            Self::Sampled { offsets, .. } => *offsets.last().expect("validated"),
        }
    }

    pub fn gain(&self, offset: f64) -> f64 {
        if offset < 0.0 {
            return -self.gain(-offset);
        }
        match self {
            Self::Linear { slope } => slope * offset,
            Self::SineLobe { peak_offset, peak_gain } => {
                if offset >= 2.0 * peak_offset {
                    0.0
                } else {
                    peak_gain * (std::f64::consts::FRAC_PI_2 * offset / peak_offset).sin()
                }
            }
            Self::Sampled { offsets, gains } => {
                let k = offsets.partition_point(|&f| f <= offset).clamp(1, offsets.len() - 1);
                let t = (offset - offsets[k - 1]) / (offsets[k] - offsets[k - 1]);
                gains[k - 1] + t * (gains[k] - gains[k - 1])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanOdeOptions {
    pub relative_tolerance: f64,
    /// Scale the depletion of a higher-frequency pump by `ν_pump/ν_signal`
    /// (one photon in, one photon out). Off by default.
    pub photon_correction: bool,
}

impl Default for RamanOdeOptions {
    fn default() -> Self {
        Self { relative_tolerance: 1e-8, photon_correction: false }
    }
}

struct RamanSystem {
    attenuation: f64,
    coupling: DMatrix<f64>,
}

// The state is ln P_i, which keeps the powers positive.
impl System<f64, DVector<f64>> for RamanSystem {
    fn system(&self, _z: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let p = y.map(f64::exp);
        let gain = &self.coupling * p;
        for (d, g) in dy.iter_mut().zip(gain.iter()) {
            *d = g - self.attenuation;
        }
    }
}

/// Integrates `dP_i/dz = −αP_i + Σ_k g(f_k − f_i) P_k P_i` over the z-grid.
pub fn solve_raman_odes(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    spectrum: &RamanGainSpectrum,
    z: &[f64],
    options: &RamanOdeOptions,
) -> Result<PowerProfile> {
    if z.is_empty() || z[0] != 0.0 {
        return domain("z grid must start at 0");
    }
    let n = grid.len();
    let first = grid.channel(0).center_freq;
    let last = grid.channel(n - 1).center_freq;
    if last - first > spectrum.max_offset() {
        return domain(format!(
            "gain spectrum covers offsets up to {:.3} THz, grid needs {:.3} THz",
            spectrum.max_offset() * 1e-12,
            (last - first) * 1e-12
        ));
    }
    let nu0 = grid.reference_frequency();
    let coupling = DMatrix::from_fn(n, n, |i, k| {
        let (fi, fk) = (grid.channel(i).center_freq, grid.channel(k).center_freq);
        let g = spectrum.gain(fk - fi);
        if options.photon_correction && fk < fi {
            g * (nu0 + fi) / (nu0 + fk)
        } else {
            g
        }
    });
    let y0 = DVector::from_iterator(n, grid.channels().iter().map(|c| c.launch_power.ln()));
    let length = *z.last().expect("non-empty");
    let system = RamanSystem { attenuation: fiber.attenuation(), coupling };
    let mut power = vec![Vec::with_capacity(z.len()); n];
    if length == 0.0 {
        for (row, c) in power.iter_mut().zip(grid.channels()) {
            row.push(c.launch_power);
        }
        return PowerProfile::new(z.to_vec(), power);
    }
    let rtol = options.relative_tolerance;
    let mut stepper = Dopri5::new(system, 0.0, length, length, y0, rtol, rtol);
    let mut dense = ContinuousOutputModel::default();
    stepper.integrate_with_continuous_output_model(&mut dense).map_err(|e| {
        let z_fail = match e {
            ode_solvers::dop_shared::IntegrationError::MaxNumStepReached { x, .. }
            | ode_solvers::dop_shared::IntegrationError::StepSizeUnderflow { x }
            | ode_solvers::dop_shared::IntegrationError::StiffnessDetected { x } => x,
        };
        NliError::Convergence { z: z_fail, residual: rtol }
    })?;
    for &zz in z {
        let y = dense.evaluate(zz.min(length)).ok_or(NliError::Convergence { z: zz, residual: rtol })?;
        for (row, v) in power.iter_mut().zip(y.iter()) {
            row.push(v.exp());
        }
    }
    PowerProfile::new(z.to_vec(), power)
}

/// Channel-dependent `(α, ᾱ, C_r)` reproducing one channel's power profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub attenuation: f64,
    pub effective_attenuation: f64,
    pub raman_slope: f64,
    /// RMS of the natural-log power residual.
    pub rms_residual: f64,
    /// Largest deviation between fitted and given power, in dB.
    pub max_deviation_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveParams {
    pub channels: Vec<ChannelParams>,
}

impl EffectiveParams {
    /// The global fiber parameters for every channel.
    pub fn uniform(fiber: &FiberSpec, channels: usize) -> Self {
        let p = ChannelParams {
            attenuation: fiber.attenuation(),
            effective_attenuation: fiber.effective_attenuation(),
            raman_slope: fiber.raman_slope(),
            rms_residual: 0.0,
            max_deviation_db: 0.0,
        };
        Self { channels: vec![p; channels] }
    }

    pub fn max_deviation_db(&self) -> f64 {
        self.channels.iter().map(|c| c.max_deviation_db).fold(0.0, f64::max)
    }
}

/// `ln(P_i(z)/P_i(0))` of the triangular model with parameters `(α, ᾱ, C)`.
fn model_log_gain(grid: &ChannelGrid, channel: usize, a: f64, abar: f64, c: f64, z: f64) -> f64 {
    let ch = grid.channel(channel);
    let leff = if (abar * z).abs() < 1e-12 { z } else { effective_length(abar, z) };
    let x = grid.total_power() * c * leff;
    -a * z - x * ch.center_freq + sinhc(0.5 * x * ch.bandwidth).ln() - grid.spectrum_normalization(x).ln()
}

struct ChannelFit<'a> {
    grid: &'a ChannelGrid,
    channel: usize,
    z: &'a [f64],
    target: Vec<f64>,
    scale: [f64; 3],
    params: nalgebra::Vector3<f64>,
}

impl ChannelFit<'_> {
    fn residuals_at(&self, p: &nalgebra::Vector3<f64>) -> DVector<f64> {
        let (a, abar, c) = (p[0] * self.scale[0], p[1] * self.scale[1], p[2] * self.scale[2]);
        DVector::from_iterator(
            self.z.len(),
            self.z
                .iter()
                .zip(&self.target)
                .map(|(&z, t)| model_log_gain(self.grid, self.channel, a, abar, c, z) - t),
        )
    }
}

impl LeastSquaresProblem<f64, Dyn, U3> for ChannelFit<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, x: &nalgebra::Vector3<f64>) {
        self.params = *x;
    }

    fn params(&self) -> nalgebra::Vector3<f64> {
        self.params
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = self.residuals_at(&self.params);
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<nalgebra::OMatrix<f64, Dyn, U3>> {
        let mut jac = nalgebra::OMatrix::<f64, Dyn, U3>::zeros(self.z.len());
        for col in 0..3 {
            let h = 1e-6 * self.params[col].abs().max(1e-3);
            let (mut up, mut down) = (self.params, self.params);
            up[col] += h;
            down[col] -= h;
            let d = (self.residuals_at(&up) - self.residuals_at(&down)) / (2.0 * h);
            jac.set_column(col, &d);
        }
        jac.iter().all(|v| v.is_finite()).then_some(jac)
    }
}

fn linear_slope(z: &[f64], y: &[f64]) -> f64 {
    // Least-squares slope through the origin.
    let num: f64 = z.iter().zip(y).map(|(z, y)| z * y).sum();
    let den: f64 = z.iter().map(|z| z * z).sum();
    num / den
}

/// Fits `(α_eff, ᾱ_eff, C_r,eff)` per channel by Levenberg–Marquardt on the
/// log-power residual of the triangular model. When the profile shows no
/// Raman coupling, `ᾱ_eff` is unidentifiable and set to `α_eff`.
pub fn fit_effective_params(profile: &PowerProfile, grid: &ChannelGrid) -> Result<EffectiveParams> {
    let z = profile.z();
    if profile.channel_count() != grid.len() {
        return domain("profile and grid have different channel counts");
    }
    if z.len() < 4 {
        return domain("fit needs at least four z samples");
    }
    if z[0] != 0.0 {
        return domain("profile must start at z = 0");
    }
    let length = *z.last().expect("non-empty");
    let logs: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            let row = profile.channel(i);
            row.iter().map(|p| (p / row[0]).ln()).collect()
        })
        .collect();
    if logs.iter().flatten().any(|v| !v.is_finite()) {
        return domain("profile contains zero power");
    }

    // Starting point: α from the total power, C from a joint first-order fit.
    let total_log: Vec<f64> = (0..z.len()).map(|j| (profile.total(j) / profile.total(0)).ln()).collect();
    let alpha0 = -linear_slope(z, &total_log);
    if !(alpha0 > 0.0) {
        return domain("profile does not decay; cannot fit an attenuation");
    }
    let f_mean: f64 =
        grid.channels().iter().map(|c| c.launch_power * c.center_freq).sum::<f64>() / grid.total_power();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, row) in logs.iter().enumerate() {
        let df = grid.channel(i).center_freq - f_mean;
        for (j, &zz) in z.iter().enumerate() {
            let u = -grid.total_power() * effective_length(alpha0, zz) * df;
            num += u * (row[j] + alpha0 * zz);
            den += u * u;
        }
    }
    let c0 = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
    let c_scale = alpha0 / (grid.total_power() * grid.optical_bandwidth());

    let mut out = Vec::with_capacity(grid.len());
    for (i, target) in logs.iter().enumerate() {
        let alpha_i = -linear_slope(z, target);
        let flat: f64 =
            (target.iter().zip(z).map(|(t, zz)| (t + alpha_i * zz).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
        let (a, abar, c) = if flat < 1e-12 {
            (alpha_i, alpha_i, 0.0)
        } else {
            let problem = ChannelFit {
                grid,
                channel: i,
                z,
                target: target.clone(),
                scale: [alpha0, alpha0, c_scale],
                params: nalgebra::Vector3::new(1.0, 1.0, c0 / c_scale),
            };
            let (fitted, report) = LevenbergMarquardt::new().with_patience(400).minimize(problem);
            if report.termination.was_usage_issue() && !matches!(
                report.termination,
                levenberg_marquardt::TerminationReason::NoImprovementPossible(_)
            ) {
                return Err(NliError::Convergence { z: length, residual: report.objective_function });
            }
            let p = fitted.params;
            (p[0] * alpha0, p[1] * alpha0, p[2] * c_scale)
        };
        if !(a > 0.0) || !a.is_finite() || !abar.is_finite() || !c.is_finite() {
            return Err(NliError::Convergence { z: length, residual: f64::NAN });
        }
        let residual: Vec<f64> =
            z.iter().zip(target).map(|(&zz, t)| model_log_gain(grid, i, a, abar, c, zz) - t).collect();
        let rms = (residual.iter().map(|r| r * r).sum::<f64>() / residual.len() as f64).sqrt();
        let max_db = residual.iter().map(|r| linear_to_db(r.exp()).abs()).fold(0.0, f64::max);
        out.push(ChannelParams {
            attenuation: a,
            effective_attenuation: abar,
            raman_slope: c,
            rms_residual: rms,
            max_deviation_db: max_db,
        });
    }
    Ok(EffectiveParams { channels: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::ModulationFormat;
    use crate::units::dbm_to_watt;
    use approx::assert_relative_eq;

    fn smf_grid(channels: usize) -> ChannelGrid {
        ChannelGrid::uniform(channels, 40.005e9, 40.004e9, dbm_to_watt(0.0), ModulationFormat::gaussian(), 1550e-9)
            .unwrap()
    }

    #[test]
    fn log_grid_endpoints_and_density() {
        let z = log_z_grid(4.6e-5, 100e3, 1000).unwrap();
        assert_eq!(z[0], 0.0);
        assert_eq!(z[999], 100e3);
        assert!(z[1] - z[0] < z[999] - z[998]);
        assert!(log_z_grid(4.6e-5, 100e3, 1).is_err());
    }

    #[test]
    fn launch_powers_at_origin() {
        let grid = smf_grid(251);
        let fiber = FiberSpec::standard_smf();
        let p = triangular_profile(&grid, &fiber, &[0.0, 50e3], Validity::Enforce).unwrap();
        for i in 0..grid.len() {
            assert_eq!(p.channel(i)[0], grid.channel(i).launch_power);
        }
    }

    #[test]
    fn validity_limit() {
        let grid = ChannelGrid::uniform(81, 200e9, 190e9, 1e-3, ModulationFormat::gaussian(), 1550e-9).unwrap();
        let fiber = FiberSpec::standard_smf();
        let err = triangular_profile(&grid, &fiber, &[0.0], Validity::Enforce).unwrap_err();
        assert!(matches!(err, NliError::RamanValidity { .. }));
        assert!(triangular_profile(&grid, &fiber, &[0.0], Validity::Extrapolate).is_ok());
    }

    #[test]
    fn sampled_spectrum_interpolates_and_extends_oddly() {
        let s = RamanGainSpectrum::sampled(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(s.gain(0.5), 1.0);
        assert_eq!(s.gain(2.0), 1.0);
        assert_eq!(s.gain(-0.5), -1.0);
        assert!(RamanGainSpectrum::sampled(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn silica_like_matches_slope_near_origin() {
        let s = RamanGainSpectrum::silica_like(2.8e-17);
        assert_relative_eq!(s.gain(1e9) / 1e9, 2.8e-17, max_relative = 1e-5);
        assert_eq!(s.gain(30e12), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gain.csv");
        std::fs::write(&path, "offset_hz,gain\n# measured\n0,0\n1e12,2.8e-17\n2e12,5.6e-17\n").unwrap();
        let s = RamanGainSpectrum::from_csv(&path).unwrap();
        assert_relative_eq!(s.gain(1.5e12), 4.2e-17, max_relative = 1e-12);
        std::fs::write(&path, "0,0\n1,x\n").unwrap();
        assert!(RamanGainSpectrum::from_csv(&path).is_err());
    }

    #[test]
    fn ode_without_raman_is_pure_loss() {
        let grid = smf_grid(5);
        let fiber = FiberSpec::standard_smf();
        let z = log_z_grid(fiber.attenuation(), 100e3, 50).unwrap();
        let spectrum = RamanGainSpectrum::Linear { slope: 0.0 };
        let p = solve_raman_odes(&grid, &fiber, &spectrum, &z, &RamanOdeOptions::default()).unwrap();
        for i in 0..5 {
            for (j, &zz) in z.iter().enumerate() {
                assert_relative_eq!(p.channel(i)[j], 1e-3 * (-fiber.attenuation() * zz).exp(), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn ode_rejects_short_spectrum() {
        let grid = smf_grid(5);
        let fiber = FiberSpec::standard_smf();
        let s = RamanGainSpectrum::sampled(vec![0.0, 50e9], vec![0.0, 1e-18]).unwrap();
        assert!(solve_raman_odes(&grid, &fiber, &s, &[0.0, 1.0], &RamanOdeOptions::default()).is_err());
    }

    #[test]
    fn fit_recovers_generating_parameters() {
        let grid = smf_grid(51);
        let fiber = FiberSpec::standard_smf().with_raman_slope(5.0 * 2.8e-17).unwrap();
        let z = log_z_grid(fiber.attenuation(), 100e3, 200).unwrap();
        let profile = triangular_profile(&grid, &fiber, &z, Validity::Enforce).unwrap();
        let fit = fit_effective_params(&profile, &grid).unwrap();
        for (i, c) in fit.channels.iter().enumerate() {
            assert_relative_eq!(c.attenuation, fiber.attenuation(), max_relative = 1e-6);
            assert_relative_eq!(c.effective_attenuation, fiber.attenuation(), max_relative = 1e-6);
            assert_relative_eq!(c.raman_slope, fiber.raman_slope(), max_relative = 1e-6);
            assert!(c.rms_residual < 1e-9, "channel {i}: {}", c.rms_residual);
        }
    }

    #[test]
    fn fit_without_raman() {
        let grid = smf_grid(11);
        let fiber = FiberSpec::standard_smf().with_raman_slope(0.0).unwrap();
        let z = log_z_grid(fiber.attenuation(), 100e3, 100).unwrap();
        let profile = triangular_profile(&grid, &fiber, &z, Validity::Enforce).unwrap();
        let fit = fit_effective_params(&profile, &grid).unwrap();
        for c in &fit.channels {
            assert_eq!(c.raman_slope, 0.0);
            assert_relative_eq!(c.attenuation, fiber.attenuation(), max_relative = 1e-12);
            assert_eq!(c.effective_attenuation, c.attenuation);
        }
        let short = PowerProfile::new(vec![0.0], vec![vec![1e-3]; 11]).unwrap();
        assert!(fit_effective_params(&short, &grid).is_err());
    }
}
