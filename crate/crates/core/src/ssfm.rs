//! Split-step Fourier solution of the Manakov equation over a chain of
//! identical spans with ideal, gain-flattened amplifiers, and the
//! transmitter/receiver processing needed to turn it into per-channel η.
//!
//! Fields use the engineering convention: a tone at offset `f` is
//! `e^{+j2πft}`, so propagation multiplies the spectrum by
//! `exp(−j(β2ω²/2 + β3ω³/6)z)` and the Kerr phase is `−(8/9)γ|A|²z`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::closed_form::eta_from_snr;
use crate::error::{domain, NliError, Result};
use crate::fiber::FiberSpec;
use crate::grid::ChannelGrid;
use crate::raman::log_z_grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepDistribution {
    /// Equal nonlinear phase per step under pure attenuation.
    #[default]
    Logarithmic,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub symbols_per_channel: usize,
    /// Samples per symbol; `0` picks the smallest even value whose sampling
    /// rate is at least twice the optical bandwidth.
    pub samples_per_symbol: usize,
    pub steps_per_span: usize,
    pub step_distribution: StepDistribution,
    pub realizations: usize,
    pub rng_seed: u64,
    pub roll_off: f64,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        Self {
            symbols_per_channel: 1 << 13,
            samples_per_symbol: 0,
            steps_per_span: 1000,
            step_distribution: StepDistribution::Logarithmic,
            realizations: 4,
            rng_seed: 1,
            roll_off: 1e-4,
        }
    }
}

impl SimulationPlan {
    pub fn validate(&self) -> Result<()> {
        if !self.symbols_per_channel.is_power_of_two() || self.symbols_per_channel < 1 << 10 {
            return Err(NliError::Config("symbols per channel must be a power of two ≥ 1024".into()));
        }
        if self.realizations == 0 || self.steps_per_span == 0 {
            return Err(NliError::Config("need at least one realization and one step per span".into()));
        }
        if !(0.0..=1.0).contains(&self.roll_off) {
            return Err(NliError::Config("roll-off must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Time/frequency layout shared by transmitter, fiber and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub samples: usize,
    pub symbols: usize,
    pub samples_per_symbol: usize,
    pub symbol_rate: f64,
    pub sample_rate: f64,
    /// Frequency bin of each channel center; centers are snapped to the
    /// `symbol_rate/symbols` resolution.
    pub center_bins: Vec<i64>,
    roll_off: f64,
}

impl Layout {
    pub fn new(grid: &ChannelGrid, plan: &SimulationPlan) -> Result<Self> {
        plan.validate()?;
        let bw = grid.channel(0).bandwidth;
        if grid.channels().iter().any(|c| (c.bandwidth - bw).abs() > 1e-9 * bw) {
            return Err(NliError::Config("simulation needs a common channel bandwidth".into()));
        }
        let symbol_rate = bw / (1.0 + plan.roll_off);
        let needed = 2.0 * grid.optical_bandwidth() / symbol_rate;
        let sps = match plan.samples_per_symbol {
            0 => {
                let s = (needed - 1e-9).ceil() as usize;
                s + s % 2
            }
            s => s,
        };
        if (sps as f64) < needed - 1e-9 {
            return Err(NliError::Config(format!(
                "{sps} samples per symbol alias the nonlinear products; need at least {needed:.2}"
            )));
        }
        let samples = sps * plan.symbols_per_channel;
        let resolution = symbol_rate / plan.symbols_per_channel as f64;
        let center_bins: Vec<i64> =
            grid.channels().iter().map(|c| (c.center_freq / resolution).round() as i64).collect();
        let layout = Self {
            samples,
            symbols: plan.symbols_per_channel,
            samples_per_symbol: sps,
            symbol_rate,
            sample_rate: sps as f64 * symbol_rate,
            center_bins,
            roll_off: plan.roll_off,
        };
        let (lo, hi) = layout.band();
        if layout.center_bins.windows(2).any(|w| w[1] - w[0] <= hi - lo) {
            return Err(NliError::Config("channels overlap on the simulation frequency grid".into()));
        }
        Ok(layout)
    }

    pub fn resolution(&self) -> f64 {
        self.symbol_rate / self.symbols as f64
    }

    /// Physical frequency offset of FFT bin `k`.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        let n = self.samples as i64;
        let signed = if (k as i64) < (n + 1) / 2 { k as i64 } else { k as i64 - n };
        signed as f64 * self.resolution()
    }

    fn bin_index(&self, signed: i64) -> usize {
        signed.rem_euclid(self.samples as i64) as usize
    }

    /// Inclusive bin range of a channel passband around its center. When the
    /// roll-off band is narrower than one bin the passband is exactly one
    /// symbol rate wide, which keeps adjacent snapped channels disjoint.
    pub fn band(&self) -> (i64, i64) {
        let m = self.symbols as i64;
        if self.roll_off * self.symbol_rate < self.resolution() {
            return (-m / 2, m / 2 - 1);
        }
        let half = (0.5 * self.symbol_rate * (1.0 + self.roll_off) / self.resolution()).floor() as i64;
        (-half, half)
    }

    /// Pulse amplitude response on passband bin `b`.
    fn taper(&self, b: i64) -> f64 {
        if self.roll_off * self.symbol_rate < self.resolution() {
            1.0
        } else {
            self.rrc(b as f64 * self.resolution())
        }
    }

    /// Root-raised-cosine amplitude response at baseband offset `nu`.
    pub fn rrc(&self, nu: f64) -> f64 {
        let (r, b) = (self.symbol_rate, self.roll_off);
        let a = nu.abs();
        let flat = 0.5 * r * (1.0 - b);
        if a <= flat {
            1.0
        } else if a > 0.5 * r * (1.0 + b) {
            0.0
        } else {
            (0.5 * (1.0 + (PI / (b * r) * (a - flat)).cos())).sqrt()
        }
    }
}

/// Dual-polarization sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl Field {
    pub fn energy(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v.norm_sqr()).sum()
    }

    /// Mean power in W.
    pub fn power(&self) -> f64 {
        self.energy() / self.x.len() as f64
    }

    fn check_finite(&self, step: usize) -> Result<()> {
        if self.x.iter().chain(&self.y).all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(())
        } else {
            Err(NliError::NumericalBlowup { step })
        }
    }
}

/// Transmitted field plus the symbols behind it, `symbols[channel][pol]`.
#[derive(Debug, Clone)]
pub struct Waveform {
    pub layout: Layout,
    pub field: Field,
    pub symbols: Vec<[Vec<Complex64>; 2]>,
}

struct Ffts {
    long_fwd: Arc<dyn Fft<f64>>,
    long_inv: Arc<dyn Fft<f64>>,
    short_fwd: Arc<dyn Fft<f64>>,
    short_inv: Arc<dyn Fft<f64>>,
}

impl Ffts {
    fn new(layout: &Layout) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            long_fwd: planner.plan_fft_forward(layout.samples),
            long_inv: planner.plan_fft_inverse(layout.samples),
            short_fwd: planner.plan_fft_forward(layout.symbols),
            short_inv: planner.plan_fft_inverse(layout.symbols),
        }
    }
}

/// RNG stream of one (channel, realization, polarization) triple: ChaCha20
/// keyed by the seed, stream id `channel << 32 | realization << 1 | pol`.
pub fn symbol_rng(seed: u64, channel: usize, realization: usize, pol: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((channel as u64) << 32) | ((realization as u64) << 1) | pol as u64);
    rng
}

/// Independent RRC-shaped symbol streams on every channel and polarization,
/// each polarization carrying exactly `P_i/2`.
pub fn generate_waveform(grid: &ChannelGrid, plan: &SimulationPlan, realization: usize) -> Result<Waveform> {
    let layout = Layout::new(grid, plan)?;
    let ffts = Ffts::new(&layout);
    generate_with(grid, plan, realization, &layout, &ffts)
}

fn generate_with(
    grid: &ChannelGrid,
    plan: &SimulationPlan,
    realization: usize,
    layout: &Layout,
    ffts: &Ffts,
) -> Result<Waveform> {
    let (n, m) = (layout.samples, layout.symbols);
    let (lo, hi) = layout.band();
    let mut spectra = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    let mut symbols = Vec::with_capacity(grid.len());
    for (ch_idx, ch) in grid.channels().iter().enumerate() {
        let sampler = ch.modulation.sampler().ok_or_else(|| {
            NliError::Config(format!("format '{}' has no symbol alphabet to simulate", ch.modulation.name()))
        })?;
        let mut per_pol: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
        for (pol, spectrum) in spectra.iter_mut().enumerate() {
            let mut rng = symbol_rng(plan.rng_seed, ch_idx, realization, pol);
            let syms: Vec<Complex64> = (0..m).map(|_| sampler.draw(&mut rng)).collect();
            let mut s = syms.clone();
            ffts.short_fwd.process(&mut s);
            let shaped: Vec<(usize, Complex64)> = (lo..=hi)
                .map(|b| {
                    let h = layout.taper(b);
                    let idx = layout.bin_index(layout.center_bins[ch_idx] + b);
                    (idx, s[b.rem_euclid(m as i64) as usize] * h)
                })
                .collect();
            // Mean time-domain power is Σ|X|²/N² for an unnormalized inverse.
            let power: f64 = shaped.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>() / (n as f64 * n as f64);
            if power == 0.0 {
                return Err(NliError::Config("channel passband is empty at this resolution".into()));
            }
            let scale = (0.5 * ch.launch_power / power).sqrt();
            for (idx, v) in shaped {
                spectrum[idx] += v * scale;
            }
            per_pol[pol] = syms;
        }
        symbols.push(per_pol);
    }
    let [mut x, mut y] = spectra;
    for v in [&mut x, &mut y] {
        ffts.long_inv.process(v);
        let inv = 1.0 / n as f64;
        v.iter_mut().for_each(|s| *s *= inv);
    }
    Ok(Waveform { layout: layout.clone(), field: Field { x, y }, symbols })
}

/// Span propagator with cached FFT plans and frequency axes.
pub struct Propagator {
    layout: Layout,
    ffts: Ffts,
    /// `β2ω²/2 + β3ω³/6` per FFT bin.
    dispersion: Vec<f64>,
    /// The same as `(c2, c3)` with `ω = 2π·res·s` for signed bin `s`.
    disp_coeffs: (f64, f64),
    alpha: f64,
    gamma: f64,
    /// `(z, x(z), ln N(x(z)))` of the triangular ISRS profile at the step
    /// edges (even indices) and step midpoints (odd indices).
    states: Vec<(f64, f64, f64)>,
}

impl Propagator {
    pub fn new(grid: &ChannelGrid, fiber: &FiberSpec, plan: &SimulationPlan) -> Result<Self> {
        let layout = Layout::new(grid, plan)?;
        Self::with_layout(grid, fiber, plan, layout)
    }

    fn with_layout(grid: &ChannelGrid, fiber: &FiberSpec, plan: &SimulationPlan, layout: Layout) -> Result<Self> {
        let ffts = Ffts::new(&layout);
        let freq: Vec<f64> = (0..layout.samples).map(|k| layout.bin_frequency(k)).collect();
        let (b2, b3) = (fiber.beta2(), fiber.beta3());
        let dispersion = freq
            .iter()
            .map(|&f| {
                let w = 2.0 * PI * f;
                0.5 * b2 * w * w + b3 * w * w * w / 6.0
            })
            .collect();
        let l = fiber.span_length();
        let edges = match plan.step_distribution {
            StepDistribution::Logarithmic => log_z_grid(fiber.attenuation(), l, plan.steps_per_span + 1)?,
            StepDistribution::Uniform => {
                (0..=plan.steps_per_span).map(|j| l * j as f64 / plan.steps_per_span as f64).collect()
            }
        };
        let mut z = Vec::with_capacity(2 * edges.len());
        for w in edges.windows(2) {
            z.push(w[0]);
            z.push(0.5 * (w[0] + w[1]));
        }
        z.push(l);
        let states = z
            .iter()
            .map(|&zz| {
                let x = grid.total_power() * fiber.raman_slope() * fiber.effective_length(zz);
                (zz, x, grid.spectrum_normalization(x).ln())
            })
            .collect();
        let w = 2.0 * PI * layout.resolution();
        let disp_coeffs = (0.5 * b2 * w * w, b3 * w * w * w / 6.0);
        Ok(Self {
            layout,
            ffts,
            dispersion,
            disp_coeffs,
            alpha: fiber.attenuation(),
            gamma: fiber.gamma(),
            states,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Multiplies the spectrum by dispersion and ISRS-profile loss from state
    /// `a` to state `b`. With `restore`, the whole-span power profile is
    /// divided out as well (the amplifier).
    fn linear(&self, field: &mut Field, a: (f64, f64, f64), b: (f64, f64, f64), restore: bool, work: &mut Work) {
        let h = b.0 - a.0;
        let (mut alpha_h, mut dx, mut dln) = (self.alpha * h, b.1 - a.1, b.2 - a.2);
        if restore {
            let end = self.states[self.states.len() - 1];
            alpha_h -= self.alpha * end.0;
            dx -= end.1;
            dln -= end.2;
        }
        // The operator is exp of a complex cubic in the signed bin index.
        let res = self.layout.resolution();
        let coeffs = [
            Complex64::new(0.5 * (-alpha_h - dln) - (self.layout.samples as f64).ln(), 0.0),
            Complex64::new(-0.5 * dx * res, 0.0),
            Complex64::new(0.0, -h * self.disp_coeffs.0),
            Complex64::new(0.0, -h * self.disp_coeffs.1),
        ];
        let n = self.layout.samples;
        let positive = n.div_ceil(2);
        poly_exp(&mut work.op[..positive], 0, coeffs);
        poly_exp(&mut work.op[positive..], positive as i64 - n as i64, coeffs);
        for v in [&mut field.x, &mut field.y] {
            self.ffts.long_fwd.process_with_scratch(v, &mut work.scratch);
            v.iter_mut().zip(&work.op).for_each(|(s, o)| *s *= o);
            self.ffts.long_inv.process_with_scratch(v, &mut work.scratch);
        }
    }

    fn nonlinear(&self, field: &mut Field, h_eff: f64) {
        if self.gamma == 0.0 {
            return;
        }
        let k = -8.0 / 9.0 * self.gamma * h_eff;
        for (x, y) in field.x.iter_mut().zip(field.y.iter_mut()) {
            let rot = Complex64::from_polar(1.0, k * (x.norm_sqr() + y.norm_sqr()));
            *x *= rot;
            *y *= rot;
        }
    }

    /// One span followed by an ideal amplifier that restores every frequency
    /// to its launch power. Symmetric splitting with the Kerr step at each
    /// step midpoint; adjacent half linear steps are applied as one.
    pub fn propagate_span(&self, field: &mut Field) -> Result<()> {
        self.run_span(field, true)
    }

    /// Like [`Propagator::propagate_span`] but without the amplifier.
    pub fn propagate_unamplified(&self, field: &mut Field) -> Result<()> {
        self.run_span(field, false)
    }

    fn run_span(&self, field: &mut Field, amplify: bool) -> Result<()> {
        let mut work = Work::new(self);
        let work = &mut work;
        let steps = (self.states.len() - 1) / 2;
        self.linear(field, self.states[0], self.states[1], false, work);
        for j in 0..steps {
            let (start, end) = (self.states[2 * j], self.states[2 * j + 2]);
            // ∫ e^{−α(z − z_mid)} dz over the step.
            let h = end.0 - start.0;
            let h_eff = if self.alpha == 0.0 { h } else { 2.0 * (0.5 * self.alpha * h).sinh() / self.alpha };
            self.nonlinear(field, h_eff);
            if j + 1 == steps {
                self.linear(field, self.states[2 * j + 1], end, amplify, work);
            } else {
                self.linear(field, self.states[2 * j + 1], self.states[2 * j + 3], false, work);
            }
            if j % 64 == 0 {
                field.check_finite(j)?;
            }
        }
        field.check_finite(steps)
    }

    /// Band-integrated power of every channel, W.
    pub fn channel_powers(&self, field: &Field) -> Vec<f64> {
        let layout = &self.layout;
        let (lo, hi) = layout.band();
        let n = layout.samples as f64;
        let mut spectra = [field.x.clone(), field.y.clone()];
        for v in spectra.iter_mut() {
            self.ffts.long_fwd.process(v);
        }
        layout
            .center_bins
            .iter()
            .map(|&c| {
                (lo..=hi)
                    .map(|b| {
                        let idx = layout.bin_index(c + b);
                        spectra[0][idx].norm_sqr() + spectra[1][idx].norm_sqr()
                    })
                    .sum::<f64>()
                    / (n * n)
            })
            .collect()
    }

    /// Dispersion compensation over `length`, RRC matched filter and
    /// symbol-rate sampling of channel `channel`; returns one symbol stream
    /// per polarization, scaled to the transmitted amplitude up to the
    /// propagation gain.
    pub fn receive_channel(&self, field: &Field, channel: usize, length: f64) -> [Vec<Complex64>; 2] {
        let layout = &self.layout;
        let (m, (lo, hi)) = (layout.symbols, layout.band());
        let center = layout.center_bins[channel];
        let mut out: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
        for (pol, v) in [&field.x, &field.y].into_iter().enumerate() {
            let mut spec = v.clone();
            self.ffts.long_fwd.process(&mut spec);
            let mut folded = vec![Complex64::new(0.0, 0.0); m];
            for b in lo..=hi {
                let idx = layout.bin_index(center + b);
                let cdc = Complex64::from_polar(1.0, self.dispersion[idx] * length);
                folded[b.rem_euclid(m as i64) as usize] += spec[idx] * cdc * layout.taper(b);
            }
            self.ffts.short_inv.process(&mut folded);
            out[pol] = folded;
        }
        out
    }
}

struct Work {
    op: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Work {
    fn new(p: &Propagator) -> Self {
        let len = p.ffts.long_fwd.get_inplace_scratch_len().max(p.ffts.long_inv.get_inplace_scratch_len());
        let zero = Complex64::new(0.0, 0.0);
        Self { op: vec![zero; p.layout.samples], scratch: vec![zero; len] }
    }
}

/// Fills `out[i] = exp(P(s0 + i))` for the cubic `P = Σ c_k s^k` by forward
/// differences, recomputed exactly every 64 entries.
fn poly_exp(out: &mut [Complex64], s0: i64, c: [Complex64; 4]) {
    let p = |s: f64| c[0] + s * (c[1] + s * (c[2] + s * c[3]));
    for (block, chunk) in out.chunks_mut(64).enumerate() {
        let s = (s0 + 64 * block as i64) as f64;
        // Differences taken analytically; subtracting values of P cancels.
        let mut v = p(s).exp();
        let mut r1 = (c[1] + c[2] * (2.0 * s + 1.0) + c[3] * (3.0 * s * s + 3.0 * s + 1.0)).exp();
        let mut r2 = (2.0 * c[2] + c[3] * (6.0 * s + 6.0)).exp();
        let r3 = (6.0 * c[3]).exp();
        for o in chunk.iter_mut() {
            *o = v;
            v *= r1;
            r1 *= r2;
            r2 *= r3;
        }
    }
}

/// [`Propagator::propagate_span`] with a freshly planned propagator.
pub fn propagate_span(field: &mut Field, fiber: &FiberSpec, grid: &ChannelGrid, plan: &SimulationPlan) -> Result<()> {
    Propagator::new(grid, fiber, plan)?.propagate_span(field)
}

/// [`Propagator::receive_channel`] with a freshly planned propagator.
pub fn receive_channel(
    field: &Field,
    channel: usize,
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    plan: &SimulationPlan,
    length: f64,
) -> Result<[Vec<Complex64>; 2]> {
    if channel >= grid.len() {
        return domain("channel index out of range");
    }
    Ok(Propagator::new(grid, fiber, plan)?.receive_channel(field, channel, length))
}

/// Per-channel SNR of received against transmitted symbols after one
/// least-squares complex gain per polarization, with the noise variance in
/// transmitted-symbol units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolQuality {
    pub snr: f64,
    pub noise_variance: f64,
}

pub fn symbol_quality(tx: &[Vec<Complex64>; 2], rx: &[Vec<Complex64>; 2]) -> Result<SymbolQuality> {
    let (mut signal, mut noise, mut count) = (0.0, 0.0, 0usize);
    for (x, y) in tx.iter().zip(rx) {
        if x.len() != y.len() || x.is_empty() {
            return domain("transmitted and received streams differ in length");
        }
        let yy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        if yy == 0.0 {
            return domain("received stream is identically zero");
        }
        let xy: Complex64 = y.iter().zip(x).map(|(b, a)| b.conj() * a).sum();
        let c = xy / yy;
        noise += x.iter().zip(y).map(|(a, b)| (a - c * b).norm_sqr()).sum::<f64>();
        signal += x.iter().map(|v| v.norm_sqr()).sum::<f64>();
        count += x.len();
    }
    let noise_variance = noise / count as f64;
    let signal_variance = signal / count as f64;
    let snr = if noise_variance == 0.0 { f64::INFINITY } else { signal_variance / noise_variance };
    Ok(SymbolQuality { snr, noise_variance })
}

/// Per-channel η from SNRs across realizations, `η = (P/SNR)/P³` with no
/// ASE. Returns `(mean, standard error)` per channel; the error is zero for
/// a single realization.
pub fn estimate_eta(snrs: &[Vec<f64>], grid: &ChannelGrid) -> Result<Vec<(f64, f64)>> {
    if snrs.is_empty() {
        return domain("need at least one realization");
    }
    (0..grid.len())
        .map(|i| {
            let p = grid.channel(i).launch_power;
            let etas = snrs
                .iter()
                .map(|r| {
                    let snr = *r.get(i).ok_or_else(|| NliError::Domain("realization is missing channels".into()))?;
                    if snr.is_infinite() && snr > 0.0 {
                        Ok(0.0)
                    } else {
                        eta_from_snr(p, 0.0, snr)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            let k = etas.len() as f64;
            let mean = etas.iter().sum::<f64>() / k;
            let se = if etas.len() > 1 {
                (etas.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
            } else {
                0.0
            };
            Ok((mean, se))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimChannel {
    pub center_freq: f64,
    pub launch_power: f64,
    pub snr: f64,
    pub eta: f64,
    pub eta_std_error: f64,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub span_count: usize,
    pub channels: Vec<SimChannel>,
    /// `per_realization[r][i]`.
    pub per_realization: Vec<Vec<SymbolQuality>>,
}

/// Transmits, propagates over `spans` spans and receives every channel, for
/// each realization in parallel.
pub fn simulate(grid: &ChannelGrid, fiber: &FiberSpec, spans: usize, plan: &SimulationPlan) -> Result<SimulationResult> {
    Ok(simulate_checkpoints(grid, fiber, &[spans], plan)?.remove(0))
}

/// Like [`simulate`], but receives a copy of the field after each listed
/// span count along one propagation (`checkpoints` strictly increasing).
pub fn simulate_checkpoints(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    checkpoints: &[usize],
    plan: &SimulationPlan,
) -> Result<Vec<SimulationResult>> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return domain("checkpoints must be strictly increasing span counts ≥ 1");
    }
    let prop = Propagator::new(grid, fiber, plan)?;
    // runs[r][c][i]
    let runs = (0..plan.realizations)
        .into_par_iter()
        .map(|r| {
            let mut wave = generate_with(grid, plan, r, &prop.layout, &prop.ffts)?;
            let mut done = 0;
            let mut out = Vec::with_capacity(checkpoints.len());
            for &spans in checkpoints {
                for _ in done..spans {
                    prop.propagate_span(&mut wave.field)?;
                }
                done = spans;
                let length = spans as f64 * fiber.span_length();
                out.push(
                    (0..grid.len())
                        .map(|i| symbol_quality(&wave.symbols[i], &prop.receive_channel(&wave.field, i, length)))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &spans)| {
            let per_realization: Vec<Vec<SymbolQuality>> = runs.iter().map(|r| r[c].clone()).collect();
            summarize(grid, plan, spans, per_realization)
        })
        .collect()
}

fn summarize(
    grid: &ChannelGrid,
    plan: &SimulationPlan,
    spans: usize,
    per_realization: Vec<Vec<SymbolQuality>>,
) -> Result<SimulationResult> {
    let snrs: Vec<Vec<f64>> = per_realization.iter().map(|r| r.iter().map(|q| q.snr).collect()).collect();
    let etas = estimate_eta(&snrs, grid)?;
    let k = plan.realizations as f64;
    let channels = grid
        .channels()
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let noise_variance = per_realization.iter().map(|r| r[i].noise_variance).sum::<f64>() / k;
            let (eta, eta_std_error) = etas[i];
            SimChannel {
                center_freq: ch.center_freq,
                launch_power: ch.launch_power,
                snr: if eta == 0.0 { f64::INFINITY } else { 1.0 / (eta * ch.launch_power * ch.launch_power) },
                eta,
                eta_std_error,
                noise_variance,
            }
        })
        .collect();
    Ok(SimulationResult { span_count: spans, channels, per_realization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{empirical_kurtosis, ModulationFormat};
    use crate::raman::{triangular_profile, Validity};
    use crate::units::linear_to_db;
    use approx::assert_relative_eq;

    fn grid(channels: usize, power: f64, format: ModulationFormat) -> ChannelGrid {
        ChannelGrid::uniform(channels, 40.005e9, 40.004e9, power, format, 1550e-9).unwrap()
    }

    fn small_plan(steps: usize) -> SimulationPlan {
        SimulationPlan { symbols_per_channel: 1 << 10, steps_per_span: steps, realizations: 1, ..Default::default() }
    }

    #[test]
    fn poly_exp_matches_direct() {
        let c = [
            Complex64::new(-0.3, 0.1),
            Complex64::new(1e-6, 0.0),
            Complex64::new(0.0, -2e-7),
            Complex64::new(0.0, 3e-13),
        ];
        let mut out = vec![Complex64::new(0.0, 0.0); 5000];
        poly_exp(&mut out, -2500, c);
        for (i, v) in out.iter().enumerate() {
            let s = (i as i64 - 2500) as f64;
            let direct = (c[0] + s * c[1] + s * s * c[2] + s * s * s * c[3]).exp();
            assert!((v - direct).norm() < 1e-12, "{i} {}", (v - direct).norm());
        }
    }

    #[test]
    fn layout_picks_alias_free_rate() {
        let g = grid(9, 1e-3, ModulationFormat::qpsk());
        let layout = Layout::new(&g, &SimulationPlan::default()).unwrap();
        assert_eq!(layout.samples_per_symbol, 20);
        assert!(layout.sample_rate >= 2.0 * g.optical_bandwidth());
        let plan = SimulationPlan { samples_per_symbol: 4, ..Default::default() };
        assert!(matches!(Layout::new(&g, &plan), Err(NliError::Config(_))));
        let plan = SimulationPlan { symbols_per_channel: 1000, ..Default::default() };
        assert!(Layout::new(&g, &plan).is_err());
    }

    #[test]
    fn rrc_is_nyquist() {
        let g = grid(1, 1e-3, ModulationFormat::qpsk());
        let layout = Layout::new(&g, &SimulationPlan { roll_off: 0.2, ..small_plan(1) }).unwrap();
        let r = layout.symbol_rate;
        for nu in [0.0, 0.41 * r, 0.45 * r, 0.5 * r, 0.55 * r] {
            let sum = layout.rrc(nu).powi(2) + layout.rrc(nu - r).powi(2);
            assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn waveform_power_and_statistics() {
        let g = grid(3, 2e-3, ModulationFormat::gaussian()).map_formats(|i, c| {
            if i == 1 { ModulationFormat::qpsk() } else { c.modulation.clone() }
        });
        let plan = small_plan(1);
        let w = generate_waveform(&g, &plan, 0).unwrap();
        let prop = Propagator::new(&g, &FiberSpec::standard_smf(), &plan).unwrap();
        for p in prop.channel_powers(&w.field) {
            assert!(linear_to_db(p / 2e-3).abs() < 0.01);
        }
        assert_relative_eq!(empirical_kurtosis(&w.symbols[1][0]), -1.0, epsilon = 1e-12);
        // Excess kurtosis of n complex Gaussian samples has standard deviation ≈ 2/√n.
        let k = empirical_kurtosis(&w.symbols[0][0]);
        assert!(k.abs() < 3.0 * 2.0 / (1024f64).sqrt(), "{k}");
        let again = generate_waveform(&g, &plan, 0).unwrap();
        assert_eq!(w.field, again.field);
        let other = generate_waveform(&g, &plan, 1).unwrap();
        assert_ne!(w.symbols[0][0], other.symbols[0][0]);
    }

    #[test]
    fn back_to_back_and_linear_links_are_clean() {
        let g = grid(3, 1e-3, ModulationFormat::qpsk());
        let plan = small_plan(20);
        let fiber = FiberSpec::standard_smf().with_gamma(0.0).unwrap();
        let prop = Propagator::new(&g, &fiber, &plan).unwrap();
        let mut w = generate_waveform(&g, &plan, 0).unwrap();
        for i in 0..3 {
            let q = symbol_quality(&w.symbols[i], &prop.receive_channel(&w.field, i, 0.0)).unwrap();
            assert!(linear_to_db(q.snr) > 60.0);
        }
        for _ in 0..2 {
            prop.propagate_span(&mut w.field).unwrap();
        }
        for i in 0..3 {
            let rx = prop.receive_channel(&w.field, i, 2.0 * fiber.span_length());
            assert!(linear_to_db(symbol_quality(&w.symbols[i], &rx).unwrap().snr) > 50.0);
        }
    }

    #[test]
    fn energy_follows_attenuation_without_raman() {
        // The Kerr step is unitary and the loss uniform, so energy scales by e^{−αL}.
        let g = grid(3, 5e-3, ModulationFormat::qpsk());
        let plan = small_plan(10);
        let fiber = FiberSpec::standard_smf().with_raman_slope(0.0).unwrap();
        let prop = Propagator::new(&g, &fiber, &plan).unwrap();
        let mut w = generate_waveform(&g, &plan, 0).unwrap();
        let before = w.field.energy();
        prop.propagate_unamplified(&mut w.field).unwrap();
        let expected = before * (-fiber.attenuation() * fiber.span_length()).exp();
        assert_relative_eq!(w.field.energy(), expected, max_relative = 1e-9);
        // A full span ends at the energy it started with.
        prop.propagate_span(&mut w.field).unwrap();
        assert_relative_eq!(w.field.energy(), expected, max_relative = 1e-9);
    }

    #[test]
    fn isrs_loss_follows_triangular_profile() {
        let g = ChannelGrid::uniform(5, 1e12, 40.004e9, 20e-3, ModulationFormat::qpsk(), 1550e-9).unwrap();
        let plan = SimulationPlan { symbols_per_channel: 1 << 10, samples_per_symbol: 256, ..small_plan(50) };
        let fiber = FiberSpec::standard_smf().with_gamma(0.0).unwrap();
        let prop = Propagator::new(&g, &fiber, &plan).unwrap();
        let mut w = generate_waveform(&g, &plan, 0).unwrap();
        let launched = prop.channel_powers(&w.field);
        prop.propagate_unamplified(&mut w.field).unwrap();
        let received = prop.channel_powers(&w.field);
        let profile = triangular_profile(&g, &fiber, &[0.0, fiber.span_length()], Validity::Enforce).unwrap();
        for i in 0..5 {
            let expected = profile.channel(i)[1] / profile.channel(i)[0];
            assert!(linear_to_db(received[i] / launched[i] / expected).abs() < 0.02);
        }
        // Power moves towards low frequencies.
        let tilt: Vec<f64> = (0..5).map(|i| received[i] / launched[i]).collect();
        assert!(tilt.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn eta_estimation() {
        let g = grid(2, 1e-3, ModulationFormat::qpsk());
        let eta = 1234.5;
        let snr = 1.0 / (eta * 1e-6);
        let out = estimate_eta(&[vec![snr, f64::INFINITY], vec![snr, f64::INFINITY]], &g).unwrap();
        assert_relative_eq!(out[0].0, eta, max_relative = 1e-12);
        assert!(out[0].1.abs() < 1e-9);
        assert_eq!(out[1], (0.0, 0.0));
        assert!(estimate_eta(&[vec![-1.0, 1.0]], &g).is_err());
    }
}
