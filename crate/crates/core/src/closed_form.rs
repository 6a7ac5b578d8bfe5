//! Closed-form NLI: GN contribution with ISRS, the XPM modulation-format
//! correction and the SNR it implies.

use std::f64::consts::PI;

use crate::error::{domain, NliError, Result};
use crate::fiber::FiberSpec;
use crate::grid::ChannelGrid;
use crate::plan::LinkPlan;
use crate::raman::{ChannelParams, EffectiveParams};
use crate::units::atanc;

/// Which evaluator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    ClosedForm,
    Integral,
    Ssfm,
}

impl Tier {
    pub fn label(&self) -> &'static str {
        match self {
            Tier::ClosedForm => "closed-form",
            Tier::Integral => "integral",
            Tier::Ssfm => "ssfm",
        }
    }

    /// Command-line short name: `cf`, `int` or `ssfm`.
    pub fn flag(&self) -> &'static str {
        match self {
            Tier::ClosedForm => "cf",
            Tier::Integral => "int",
            Tier::Ssfm => "ssfm",
        }
    }
}

impl std::str::FromStr for Tier {
    type Err = NliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cf" => Ok(Tier::ClosedForm),
            "int" => Ok(Tier::Integral),
            "ssfm" => Ok(Tier::Ssfm),
            other => Err(NliError::Config(format!("unknown tier '{other}' (expected cf, int or ssfm)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelNli {
    pub center_freq: f64,
    pub launch_power: f64,
    pub eta_gn: f64,
    pub eta_corr: f64,
    pub eta_total: f64,
    pub ase_power: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NliReport {
    pub tier: Tier,
    pub span_count: usize,
    pub channels: Vec<ChannelNli>,
}

/// Attenuation set `(α, ᾱ, C_r)` seen by one channel's power profile.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Attenuation {
    alpha: f64,
    alpha_bar: f64,
    raman: f64,
}

impl Attenuation {
    fn of(fiber: &FiberSpec, params: Option<&EffectiveParams>, channel: usize) -> Result<Self> {
        match params {
            None => Ok(Self {
                alpha: fiber.attenuation(),
                alpha_bar: fiber.effective_attenuation(),
                raman: fiber.raman_slope(),
            }),
            Some(p) => {
                let ChannelParams { attenuation, effective_attenuation, raman_slope, .. } =
                    *p.channels.get(channel).ok_or_else(|| {
                        NliError::Domain(format!("no effective parameters for channel {channel}"))
                    })?;
                if !(attenuation > 0.0) || !(effective_attenuation > 0.0) {
                    return domain(format!("channel {channel}: effective attenuations must be positive"));
                }
                Ok(Self { alpha: attenuation, alpha_bar: effective_attenuation, raman: raman_slope })
            }
        }
    }
}

/// Per-(COI, INT) quantities shared by every XPM expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairKernel {
    /// `f_k − f_i`, Hz.
    pub delta_f: f64,
    /// Coherent phase per span, `−4π²[β2 + πβ3(f_i+f_k)]L`, s².
    pub phi: f64,
    /// XPM phase mismatch of the closed forms, `−2π²Δf[β2 + πβ3(f_i+f_k)]`, s.
    pub phi_ik: f64,
    /// Twice `phi_ik`: the mismatch inside the approximate link function.
    pub phi_ik_link: f64,
    /// `(α + ᾱ − P_tot C_r f_k)²`, 1/m².
    pub t_k: f64,
    /// `−P_tot C_r f_k / ᾱ`.
    pub t_tilde_k: f64,
    /// `α + ᾱ`, 1/m.
    pub a: f64,
    pub alpha: f64,
    pub alpha_bar: f64,
}

impl PairKernel {
    /// `|μ(f_i, f_k, f_i)|² = T_k/(α²A²)` of the approximate link function.
    pub fn link_power_at_origin(&self) -> f64 {
        self.t_k / (self.alpha * self.alpha * self.a * self.a)
    }

    /// `∫ |μ|² df₁` over `[−B_i/2, B_i/2]` of the approximate link function.
    pub fn first_span_integral(&self, coi_bandwidth: f64) -> f64 {
        let (al, a, t) = (self.alpha, self.a, self.t_k);
        // atan(φB/x)/φ written via atanc so that φ → 0 stays finite.
        let term = |x: f64| coi_bandwidth / x * atanc(self.phi_ik * coi_bandwidth / x);
        ((t - al * al) / al * term(al) + (a * a - t) / a * term(a)) / (self.alpha_bar * (2.0 * al + self.alpha_bar))
    }
}

/// Builds the kernel for channel of interest `coi` and interferer `int`.
/// With `params`, the interferer's own `(α, ᾱ, C_r)` replace the fiber's.
pub fn pair_kernel(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    coi: usize,
    int: usize,
    params: Option<&EffectiveParams>,
) -> Result<PairKernel> {
    if coi == int {
        return domain("channel of interest and interferer must differ");
    }
    if coi >= grid.len() || int >= grid.len() {
        return domain("channel index out of range");
    }
    let att = Attenuation::of(fiber, params, int)?;
    let (fi, fk) = (grid.channel(coi).center_freq, grid.channel(int).center_freq);
    let disp = fiber.beta2() + PI * fiber.beta3() * (fi + fk);
    let delta_f = fk - fi;
    let a = att.alpha + att.alpha_bar;
    let root_t = a - grid.total_power() * att.raman * fk;
    Ok(PairKernel {
        delta_f,
        phi: -4.0 * PI * PI * disp * fiber.span_length(),
        phi_ik: -2.0 * PI * PI * delta_f * disp,
        phi_ik_link: -4.0 * PI * PI * delta_f * disp,
        t_k: root_t * root_t,
        t_tilde_k: -grid.total_power() * att.raman * fk / att.alpha_bar,
        a,
        alpha: att.alpha,
        alpha_bar: att.alpha_bar,
    })
}

/// `(2|Δf| − B) ln((2|Δf| − B)/(2|Δf| + B)) + 2B`, evaluated without
/// cancellation. Equals `2B` at `|Δf| = B/2` and decays as `B²/|Δf|`.
pub fn asymptotic_bracket(delta_f: f64, bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0) || !delta_f.is_finite() {
        return domain("bandwidth must be positive and Δf finite");
    }
    let d = 2.0 * delta_f.abs();
    let u = bandwidth / d;
    if u > 1.0 + 1e-12 {
        return domain(format!("|Δf| = {} Hz is below B/2 = {} Hz: channels overlap", delta_f.abs(), bandwidth / 2.0));
    }
    let u = u.min(1.0);
    // bracket = 2|Δf|·g(u), g(u) = 2u − 2(1−u)·atanh(u).
    let g = if u == 1.0 {
        2.0
    } else if u < 0.1 {
        // g(u) = Σ_{j≥1} 2u^{2j}/(2j−1) − 2u^{2j+1}/(2j+1).
        let mut acc = 0.0;
        let mut even = u * u;
        let mut k = 1.0;
        while even > 1e-18 * u * u {
            acc += 2.0 * even / k - 2.0 * even * u / (k + 2.0);
            even *= u * u;
            k += 2.0;
        }
        acc
    } else {
        2.0 * u - 2.0 * (1.0 - u) * u.atanh()
    };
    Ok(d * g)
}

/// Asymptotic per-span slope of the correction for any link function:
/// `γ̃·|μ|²·2π/(|φ|B_k²)·bracket`.
pub fn asymptotic_correction_generic(
    mu_sq: f64,
    phi: f64,
    bandwidth: f64,
    delta_f: f64,
    gamma_tilde: f64,
) -> Result<f64> {
    if phi == 0.0 {
        return Err(NliError::Singularity("coherent phase φ is zero".into()));
    }
    let bracket = asymptotic_bracket(delta_f, bandwidth)?;
    Ok(gamma_tilde * mu_sq * 2.0 * PI / (phi.abs() * bandwidth * bandwidth) * bracket)
}

/// `lim ∂/∂n ∫ |Σ_{m=1}^{n} sinc(max) e^{jmbx}|² dx
///   = (π/a²)[(b−a) ln((b−a)/(a+b)) + 2a]`, for `a > 0`, `|b| ≥ a`.
pub fn appendix_identity(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain("a must be positive");
    }
    if b.abs() < a * (1.0 - 1e-12) {
        return domain(format!("|b| = {} must be at least a = {a}", b.abs()));
    }
    Ok(PI / (2.0 * a * a) * asymptotic_bracket(b.abs(), 2.0 * a)?)
}

/// The two parts of one interferer's correction: `η_corr,n = first_span + ñ·asymptotic_slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionParts {
    pub first_span: f64,
    pub asymptotic_slope: f64,
}

impl CorrectionParts {
    pub fn at(&self, plan: &LinkPlan) -> f64 {
        self.first_span + plan.effective_span_count() as f64 * self.asymptotic_slope
    }
}

fn gamma_tilde(grid: &ChannelGrid, fiber: &FiberSpec, coi: usize, int: usize) -> f64 {
    let (ci, ck) = (grid.channel(coi), grid.channel(int));
    let ratio = ck.launch_power / ci.launch_power;
    ratio * ratio * 80.0 / 81.0 * fiber.gamma() * fiber.gamma() * ck.modulation.excess_kurtosis() / ck.bandwidth
}

/// First-span and asymptotic parts of the closed-form correction for one pair.
pub fn xpm_correction_parts(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    coi: usize,
    int: usize,
    params: Option<&EffectiveParams>,
) -> Result<CorrectionParts> {
    let kernel = pair_kernel(grid, fiber, coi, int, params)?;
    let gt = gamma_tilde(grid, fiber, coi, int);
    if gt == 0.0 {
        return Ok(CorrectionParts { first_span: 0.0, asymptotic_slope: 0.0 });
    }
    let first_span = gt * kernel.first_span_integral(grid.channel(coi).bandwidth);
    let asymptotic_slope = asymptotic_correction_generic(
        kernel.link_power_at_origin(),
        kernel.phi,
        grid.channel(int).bandwidth,
        kernel.delta_f,
        gt,
    )?;
    Ok(CorrectionParts { first_span, asymptotic_slope })
}

/// Closed-form modulation-format correction of interferer `int` on `coi`.
pub fn xpm_correction_pair(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    plan: &LinkPlan,
    coi: usize,
    int: usize,
    params: Option<&EffectiveParams>,
) -> Result<f64> {
    Ok(xpm_correction_parts(grid, fiber, coi, int, params)?.at(plan))
}

/// SPM term of the GN contribution for channel `i`.
fn spm_term(grid: &ChannelGrid, fiber: &FiberSpec, plan: &LinkPlan, i: usize, att: Attenuation) -> Result<f64> {
    let ch = grid.channel(i);
    let phi_i = 1.5 * PI * PI * (fiber.beta2() + 2.0 * PI * fiber.beta3() * ch.center_freq);
    if phi_i == 0.0 {
        return Err(NliError::Singularity(format!(
            "channel {i} at {:.4} THz sits at zero dispersion",
            ch.center_freq * 1e-12
        )));
    }
    let (al, ab) = (att.alpha, att.alpha_bar);
    let a = al + ab;
    let root_t = a - grid.total_power() * att.raman * ch.center_freq;
    let t = root_t * root_t;
    let b2 = ch.bandwidth * ch.bandwidth;
    let n = plan.span_count() as f64;
    let bracket = (t - al * al) / al * (phi_i * b2 / (PI * al)).asinh() + (a * a - t) / a * (phi_i * b2 / (PI * a)).asinh();
    let g = fiber.gamma();
    Ok(4.0 / 9.0 * g * g / b2 * PI * n.powf(1.0 + plan.coherence_exponent()) / (phi_i * ab * (2.0 * al + ab)) * bracket)
}

/// Signal-to-noise ratio `P/(P_ASE + ηP³)`.
pub fn snr(power: f64, ase_power: f64, eta: f64) -> Result<f64> {
    if !(power > 0.0) {
        return domain("launch power must be positive");
    }
    if !(ase_power >= 0.0) || !(eta >= 0.0) {
        return domain(format!("need P_ASE ≥ 0 and η ≥ 0, got {ase_power} and {eta}"));
    }
    Ok(power / (ase_power + eta * power.powi(3)))
}

/// Inverse of [`snr`]: `η = (P/SNR − P_ASE)/P³`.
pub fn eta_from_snr(power: f64, ase_power: f64, snr: f64) -> Result<f64> {
    if !(power > 0.0) {
        return domain("launch power must be positive");
    }
    if !(snr > 0.0) {
        return domain(format!("SNR must be positive, got {snr}"));
    }
    Ok((power / snr - ase_power) / power.powi(3))
}

/// Per-channel closed-form NLI. `η_GN` collects SPM and the GN part of XPM,
/// `η_corr` the modulation-format correction, and `η_total` follows the
/// combined grouping `(n + 5Φ/6)` of the first-span term.
pub fn total_nli_closedform(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    plan: &LinkPlan,
    params: Option<&EffectiveParams>,
) -> Result<NliReport> {
    if let Some(p) = params {
        if p.channels.len() != grid.len() {
            return domain("effective parameters do not match the grid");
        }
    }
    let n = plan.span_count() as f64;
    let n_tilde = plan.effective_span_count() as f64;
    let g2 = fiber.gamma() * fiber.gamma();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let ci = grid.channel(i);
        let spm = spm_term(grid, fiber, plan, i, Attenuation::of(fiber, params, i)?)?;
        let (mut xpm_gn, mut corr, mut xpm_total) = (0.0, 0.0, 0.0);
        for k in (0..grid.len()).filter(|&k| k != i) {
            let ck = grid.channel(k);
            let kernel = pair_kernel(grid, fiber, i, k, params)?;
            let ratio = ck.launch_power / ci.launch_power;
            let pre = ratio * ratio * g2 / ck.bandwidth;
            let phi_k = ck.modulation.excess_kurtosis();
            let first = kernel.first_span_integral(ci.bandwidth);
            xpm_gn += pre * (n * first);
            let asym = if phi_k == 0.0 || n_tilde == 0.0 {
                0.0
            } else {
                if kernel.phi == 0.0 {
                    return Err(NliError::Singularity(format!("channels {i} and {k}: coherent phase φ is zero")));
                }
                5.0 / 3.0 * phi_k * PI * n_tilde * kernel.t_k
                    / (kernel.phi.abs() * ck.bandwidth * ck.bandwidth * kernel.alpha * kernel.alpha * kernel.a * kernel.a)
                    * asymptotic_bracket(kernel.delta_f, ck.bandwidth)?
            };
            xpm_total += pre * ((n + 5.0 / 6.0 * phi_k) * first + asym);
            if phi_k != 0.0 {
                corr += xpm_correction_pair(grid, fiber, plan, i, k, params)?;
            }
        }
        let eta_gn = spm + 32.0 / 27.0 * xpm_gn;
        let eta_total = spm + 32.0 / 27.0 * xpm_total;
        let ase_power = plan.ase_power(grid, fiber, i)?;
        out.push(ChannelNli {
            center_freq: ci.center_freq,
            launch_power: ci.launch_power,
            eta_gn,
            eta_corr: corr,
            eta_total,
            ase_power,
            snr: snr(ci.launch_power, ase_power, eta_total)?,
        });
    }
    Ok(NliReport { tier: Tier::ClosedForm, span_count: plan.span_count(), channels: out })
}
