//! Quadrature evaluation of the link functions and NLI integrals. Slower than
//! the closed forms by orders of magnitude; used to validate them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::closed_form::{pair_kernel, ChannelNli, NliReport, PairKernel, Tier};
use crate::error::{domain, NliError, Result};
use crate::fiber::FiberSpec;
use crate::grid::ChannelGrid;
use crate::plan::LinkPlan;
use crate::quad::{integrate, QuadratureSpec};
use crate::units::sinc;

/// Which link function enters the XPM integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkKernel {
    /// The full power-profile integral over the span.
    Exact,
    /// The first-order ISRS approximation that the closed forms integrate.
    #[default]
    XpmApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralOptions {
    pub quad_1d: QuadratureSpec,
    pub quad_2d: QuadratureSpec,
    pub kernel: LinkKernel,
    /// Panels of the z-integration in [`ExactLink`].
    pub link_panels: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self {
            quad_1d: QuadratureSpec::one_dimensional(),
            quad_2d: QuadratureSpec::two_dimensional(),
            kernel: LinkKernel::XpmApprox,
            link_panels: 512,
        }
    }
}

/// `(e^z − 1)/z` without cancellation near the origin.
fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        return Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0;
    }
    let (s, c) = z.im.sin_cos();
    let em1 = Complex64::new(z.re.exp_m1() * c - 2.0 * (0.5 * z.im).sin().powi(2), z.re.exp() * s);
    em1 / z
}

/// The span link function
/// `μ(f₁,f₂,f_i) = ∫₀^L e^{−αζ − x(ζ)(f₁+f₂−f_i)} / N(x(ζ)) · e^{jφ̃ζ} dζ`
/// with `x = P_tot C_r L_eff(ζ)` and `N` the normalized transmitted-spectrum
/// integral.
///
/// The smooth log-amplitude is interpolated linearly over panels of equal
/// attenuation-weighted length and the oscillating factor is integrated
/// exactly on each panel, so the cost does not grow with the phase.
#[derive(Debug, Clone)]
pub struct ExactLink {
    alpha: f64,
    beta2: f64,
    beta3: f64,
    z: Vec<f64>,
    x: Vec<f64>,
    ln_norm: Vec<f64>,
}

impl ExactLink {
    pub fn new(grid: &ChannelGrid, fiber: &FiberSpec, panels: usize) -> Result<Self> {
        if panels == 0 {
            return domain("link function needs at least one panel");
        }
        let z = crate::raman::log_z_grid(fiber.attenuation(), fiber.span_length(), panels + 1)?;
        let x: Vec<f64> =
            z.iter().map(|&zz| grid.total_power() * fiber.raman_slope() * fiber.effective_length(zz)).collect();
        let ln_norm = x.iter().map(|&xx| grid.spectrum_normalization(xx).ln()).collect();
        Ok(Self { alpha: fiber.attenuation(), beta2: fiber.beta2(), beta3: fiber.beta3(), z, x, ln_norm })
    }

    /// `μ` at absolute frequencies (relative to the reference carrier).
    pub fn eval(&self, f1: f64, f2: f64, fi: f64) -> Complex64 {
        let phase = -4.0 * PI * PI * (f1 - fi) * (f2 - fi) * (self.beta2 + PI * self.beta3 * (f1 + f2));
        let c = f1 + f2 - fi;
        let h = |j: usize| -self.alpha * self.z[j] - self.x[j] * c - self.ln_norm[j];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut h_a = h(0);
        for j in 0..self.z.len() - 1 {
            let h_b = h(j + 1);
            let dz = self.z[j + 1] - self.z[j];
            let slope = Complex64::new(h_b - h_a, phase * dz);
            let start = Complex64::from_polar(h_a.exp(), phase * self.z[j]);
            acc += start * dz * exprel(slope);
            h_a = h_b;
        }
        acc
    }
}

/// [`ExactLink::eval`] for a single triplet.
pub fn link_function_exact(
    f1: f64,
    f2: f64,
    fi: f64,
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    panels: usize,
) -> Result<Complex64> {
    Ok(ExactLink::new(grid, fiber, panels)?.eval(f1, f2, fi))
}

/// `−(1+T̃_k)/(−α + jφ f₁) + T̃_k/(−A + jφ f₁)` with `φ` the link-function
/// mismatch of `kernel` and `f₁` the offset from the COI center.
pub fn link_function_xpm_approx(f1_offset: f64, kernel: &PairKernel) -> Complex64 {
    let jx = Complex64::new(0.0, kernel.phi_ik_link * f1_offset);
    -(1.0 + kernel.t_tilde_k) / (jx - kernel.alpha) + kernel.t_tilde_k / (jx - kernel.a)
}

const BLOCK: usize = 32;

/// `Σ_{m=1}^{n} sinc(m y) e^{j m β y}`, summed in blocks for stability.
fn sinc_sum(n: usize, y: f64, beta: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if y == 0.0 {
        return Complex64::new(n as f64, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    if (y * n as f64).abs() < 1e-2 {
        for m in 1..=n {
            let mf = m as f64;
            total += Complex64::from_polar(sinc(mf * y), mf * beta * y);
        }
        return total;
    }
    // sin(my)e^{jmβy} = (e^{jm(β+1)y} − e^{jm(β−1)y})/(2j): two log series.
    let (w1, w2) = ((beta + 1.0) * y, (beta - 1.0) * y);
    let (r1, r2) = (Complex64::from_polar(1.0, w1), Complex64::from_polar(1.0, w2));
    let mut m = 1;
    while m <= n {
        let end = (m + BLOCK - 1).min(n);
        let mut p1 = Complex64::from_polar(1.0, m as f64 * w1);
        let mut p2 = Complex64::from_polar(1.0, m as f64 * w2);
        let mut block = Complex64::new(0.0, 0.0);
        for k in m..=end {
            block += (p1 - p2) / k as f64;
            p1 *= r1;
            p2 *= r2;
        }
        total += block;
        m = end + 1;
    }
    total / Complex64::new(0.0, 2.0 * y)
}

/// `|1 + Σ_{m=1}^{n−1} sinc(m s) e^{jmθ}|²` with `θ = β s`.
fn coherent_factor(n: usize, s: f64, beta: f64) -> f64 {
    (Complex64::new(1.0, 0.0) + sinc_sum(n - 1, s, beta)).norm_sqr()
}

/// Breakpoints where the coherent m-sum peaks: `θ = 2πj` and the first
/// zeros either side, restricted to `[lo, hi]`.
fn lobe_breakpoints(theta_per_f1: f64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if theta_per_f1 == 0.0 {
        return out;
    }
    let period = 2.0 * PI / theta_per_f1.abs();
    let width = period / n.max(1) as f64;
    let jmax = (hi.abs().max(lo.abs()) / period).ceil() as i64;
    if jmax > 10_000 {
        return out;
    }
    for j in -jmax..=jmax {
        let c = j as f64 * period;
        for p in [c - width, c, c + width] {
            if p > lo && p < hi {
                out.push(p);
            }
        }
    }
    out
}

fn kernel_power(
    kernel: &PairKernel,
    exact: Option<&ExactLink>,
    fi: f64,
    fk: f64,
    f1: f64,
) -> f64 {
    match exact {
        Some(link) => link.eval(fi + f1, fk, fi).norm_sqr(),
        None => link_function_xpm_approx(f1, kernel).norm_sqr(),
    }
}

fn exact_link(grid: &ChannelGrid, fiber: &FiberSpec, opts: &IntegralOptions) -> Result<Option<ExactLink>> {
    match opts.kernel {
        LinkKernel::Exact => Ok(Some(ExactLink::new(grid, fiber, opts.link_panels)?)),
        LinkKernel::XpmApprox => Ok(None),
    }
}

fn gamma_tilde(grid: &ChannelGrid, fiber: &FiberSpec, coi: usize, int: usize) -> f64 {
    let (ci, ck) = (grid.channel(coi), grid.channel(int));
    let ratio = ck.launch_power / ci.launch_power;
    ratio * ratio * 80.0 / 81.0 * fiber.gamma() * fiber.gamma() * ck.modulation.excess_kurtosis() / ck.bandwidth
}

fn check_pair(grid: &ChannelGrid, coi: usize, int: usize) -> Result<()> {
    if coi == int || coi >= grid.len() || int >= grid.len() {
        return domain("need two distinct channel indices within the grid");
    }
    let (ci, ck) = (grid.channel(coi), grid.channel(int));
    if (ck.center_freq - ci.center_freq).abs() <= 0.5 * ck.bandwidth {
        return domain("interferer must be separated by more than B_k/2");
    }
    Ok(())
}

/// Correction of one interferer from the reduced 1-D integral
/// `γ̃ ∫ |μ(f₁+f_i, f_k, f_i)|² |1 + Σ_{m=1}^{n−1} sinc(mφf₁B_k/2) e^{jmφf₁Δf}|² df₁`.
pub fn xpm_correction_integral_1d(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    coi: usize,
    int: usize,
    spans: usize,
    opts: &IntegralOptions,
) -> Result<f64> {
    let link = exact_link(grid, fiber, opts)?;
    correction_1d(grid, fiber, coi, int, spans, opts, link.as_ref())
}

fn correction_1d(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    coi: usize,
    int: usize,
    spans: usize,
    opts: &IntegralOptions,
    link: Option<&ExactLink>,
) -> Result<f64> {
    check_pair(grid, coi, int)?;
    if spans == 0 {
        return domain("span count must be at least 1");
    }
    let gt = gamma_tilde(grid, fiber, coi, int);
    if gt == 0.0 {
        return Ok(0.0);
    }
    let kernel = pair_kernel(grid, fiber, coi, int, None)?;
    let (ci, ck) = (grid.channel(coi), grid.channel(int));
    let half = 0.5 * ci.bandwidth;
    let beta = 2.0 * kernel.delta_f / ck.bandwidth;
    let s_per_f1 = kernel.phi * ck.bandwidth / 2.0;
    let cuts = lobe_breakpoints(kernel.phi * kernel.delta_f, spans, -half, half);
    let q = integrate(
        |f1| {
            kernel_power(&kernel, link, ci.center_freq, ck.center_freq, f1)
                * coherent_factor(spans, s_per_f1 * f1, beta)
        },
        -half,
        half,
        &cuts,
        &opts.quad_1d,
    );
    Ok(gt * q.into_result()?)
}

/// Correction of one interferer from the full double integral over both
/// channel bands, with the span sum in closed geometric form.
pub fn xpm_correction_integral_2d(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    coi: usize,
    int: usize,
    spans: usize,
    opts: &IntegralOptions,
) -> Result<f64> {
    check_pair(grid, coi, int)?;
    if spans == 0 {
        return domain("span count must be at least 1");
    }
    let (ci, ck) = (grid.channel(coi), grid.channel(int));
    let phi_k = ck.modulation.excess_kurtosis();
    if phi_k == 0.0 || fiber.gamma() == 0.0 {
        return Ok(0.0);
    }
    let kernel = pair_kernel(grid, fiber, coi, int, None)?;
    let link = exact_link(grid, fiber, opts)?;
    let n = spans as f64;
    let (hi, hk) = (0.5 * ci.bandwidth, 0.5 * ck.bandwidth);
    let df = kernel.delta_f;
    let mut failure: Option<NliError> = None;
    let outer_cuts = lobe_breakpoints(kernel.phi * df, spans, -hi, hi);
    let outer = integrate(
        |f1: f64| {
            let inner_cuts = if f1 == 0.0 {
                vec![]
            } else {
                // θ(f₂) = f₁(f₂+Δf)φ crosses 2πj at f₂ = 2πj/(f₁φ) − Δf.
                let period = 2.0 * PI / (f1 * kernel.phi).abs();
                let first = ((-hk + df) / period).ceil() as i64;
                let last = ((hk + df) / period).floor() as i64;
                if last - first > 10_000 {
                    vec![]
                } else {
                    (first..=last).map(|j| j as f64 * period - df).collect()
                }
            };
            let inner = integrate(
                |f2: f64| {
                    let mu = match &link {
                        Some(l) => l.eval(ci.center_freq + f1, ck.center_freq + f2, ci.center_freq),
                        None => link_function_xpm_approx(f1, &kernel),
                    };
                    let theta = f1 * (f2 + df) * kernel.phi;
                    let half_t = 0.5 * theta;
                    let geometric = if half_t.sin().abs() < 1e-12 {
                        Complex64::new(n, 0.0) * Complex64::from_polar(1.0, (n - 1.0) * half_t)
                    } else {
                        Complex64::from_polar((n * half_t).sin() / half_t.sin(), (n - 1.0) * half_t)
                    };
                    mu * geometric
                },
                -hk,
                hk,
                &inner_cuts,
                &opts.quad_2d,
            );
            if !inner.converged && failure.is_none() {
                failure = Some(NliError::Quadrature { estimate: inner.value.norm(), error: inner.error });
            }
            inner.value.norm_sqr()
        },
        -hi,
        hi,
        &outer_cuts,
        &opts.quad_2d,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let ratio = ck.launch_power / ci.launch_power;
    let pre = 80.0 / 81.0 * ratio * ratio * fiber.gamma() * fiber.gamma() * phi_k / ck.bandwidth.powi(3);
    Ok(pre * outer.into_result()?)
}

/// `∫_{−∞}^{∞} |Σ_{m=1}^{n} sinc(m a x) e^{j m b x}|² dx`.
pub fn sinc_series_energy(n: usize, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a > 0.0) || !b.is_finite() {
        return domain("need a > 0 and finite b");
    }
    if n == 0 {
        return Ok(0.0);
    }
    let beta = b / a;
    let mean_tail = tail_mean_sum(n, beta);
    Ok(2.0 / a * truncated_even_integral(|y| sinc_sum(n, y, beta).norm_sqr(), n, beta, mean_tail, spec)?)
}

/// `C_{n+1} − C_n` of [`sinc_series_energy`], integrated directly as
/// `∫ 2Re(S̄_n t) + |t|²` with `t` the added term.
pub fn sinc_series_increment(n: usize, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a > 0.0) || !b.is_finite() {
        return domain("need a > 0 and finite b");
    }
    let beta = b / a;
    let m = (n + 1) as f64;
    let touching = (beta.abs() - 1.0).abs() < 1e-9;
    let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    let mean_tail = 1.0 / (2.0 * m * m) + if touching { harmonic / (2.0 * m) } else { 0.0 };
    let integrand = |y: f64| {
        let s = sinc_sum(n, y, beta);
        let t = Complex64::from_polar(sinc(m * y), m * beta * y);
        2.0 * (s.conj() * t).re + t.norm_sqr()
    };
    Ok(2.0 / a * truncated_even_integral(integrand, n + 1, beta, mean_tail, spec)?)
}

// Large-y mean of |Σ sinc(my)e^{jmβy}|² is (Σ_m 1/(2m²) + [|β|=1] Σ_{m≠m'} 1/(4mm'))/y².
fn tail_mean_sum(n: usize, beta: f64) -> f64 {
    let squares: f64 = (1..=n).map(|m| 1.0 / (m * m) as f64).sum();
    let mut out = 0.5 * squares;
    if (beta.abs() - 1.0).abs() < 1e-9 {
        let h: f64 = (1..=n).map(|m| 1.0 / m as f64).sum();
        out += 0.25 * (h * h - squares);
    }
    out
}

/// `∫₀^∞ g(y) dy` for an even, oscillating `g` whose mean decays as
/// `mean_tail/y²`: integrate `[0, Y]`, add `mean_tail/Y`, and double `Y`
/// until two estimates agree.
fn truncated_even_integral(
    mut g: impl FnMut(f64) -> f64,
    n: usize,
    beta: f64,
    mean_tail: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    // Two oscillations of the fastest component per panel.
    let omega = n as f64 * (beta.abs() + 2.0) + 1.0;
    let panel = 4.0 * PI / omega;
    let panel_spec = QuadratureSpec {
        max_subdivisions: usize::MAX,
        relative_tolerance: spec.relative_tolerance * 0.1,
        ..*spec
    };
    let mut lo = 0.0;
    let mut hi = 16.0;
    let mut acc = 0.0;
    let mut previous: Option<f64> = None;
    let mut error = 0.0;
    while hi <= 65_536.0 {
        let count = ((hi - lo) / panel).ceil() as usize;
        let cuts: Vec<f64> = (1..count).map(|j| lo + j as f64 * (hi - lo) / count as f64).collect();
        let q = integrate(&mut g, lo, hi, &cuts, &QuadratureSpec { max_subdivisions: 4 * count + 64, ..panel_spec });
        acc += q.value;
        error += q.error;
        let estimate = acc + mean_tail / hi;
        if let Some(p) = previous {
            if (estimate - p).abs() <= spec.relative_tolerance * estimate.abs() {
                return Ok(estimate);
            }
        }
        previous = Some(estimate);
        lo = hi;
        hi *= 2.0;
    }
    Err(NliError::Quadrature { estimate: acc + mean_tail / lo, error: error.max((acc - previous.unwrap_or(0.0)).abs()) })
}

/// `C_n = ∫ |Σ_{m=1}^{n−1} sinc(mφf₁B_k/2) e^{jmφf₁Δf}|² df₁`, `n ≥ 2`.
pub fn normalization_cn(n: usize, phi: f64, bandwidth: f64, delta_f: f64, spec: &QuadratureSpec) -> Result<f64> {
    if n < 2 {
        return domain("C_n is defined for n ≥ 2");
    }
    if phi == 0.0 {
        return Err(NliError::Singularity("coherent phase φ is zero".into()));
    }
    sinc_series_energy(n - 1, phi.abs() * bandwidth / 2.0, phi.abs() * delta_f, spec)
}

/// `C_{n+1} − C_n` for the same arguments as [`normalization_cn`].
pub fn normalization_cn_increment(
    n: usize,
    phi: f64,
    bandwidth: f64,
    delta_f: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if n < 2 {
        return domain("C_n is defined for n ≥ 2");
    }
    if phi == 0.0 {
        return Err(NliError::Singularity("coherent phase φ is zero".into()));
    }
    sinc_series_increment(n - 1, phi.abs() * bandwidth / 2.0, phi.abs() * delta_f, spec)
}

/// GN-model SPM of channel `i`: the double integral of `|μ|²` times the span
/// array factor over the region where all three frequencies lie in the band.
fn spm_integral(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    i: usize,
    spans: usize,
    link: &ExactLink,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let ch = grid.channel(i);
    let fi = ch.center_freq;
    let half = 0.5 * ch.bandwidth;
    let n = spans as f64;
    let mut failure: Option<NliError> = None;
    let outer = integrate(
        |f1: f64| {
            let lo = (-half).max(-half - f1);
            let hi = half.min(half - f1);
            let inner = integrate(
                |f2: f64| {
                    let psi = -4.0
                        * PI
                        * PI
                        * f1
                        * f2
                        * (fiber.beta2() + PI * fiber.beta3() * (2.0 * fi + f1 + f2))
                        * fiber.span_length();
                    link.eval(fi + f1, fi + f2, fi).norm_sqr() * array_factor(n, psi)
                },
                lo,
                hi,
                &[0.0, -f1],
                spec,
            );
            if !inner.converged && failure.is_none() {
                failure = Some(NliError::Quadrature { estimate: inner.value, error: inner.error });
            }
            inner.value
        },
        -half,
        half,
        &[0.0],
        spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let g2 = fiber.gamma() * fiber.gamma();
    Ok(16.0 / 27.0 * g2 / (ch.bandwidth * ch.bandwidth) * outer.into_result()?)
}

/// `|Σ_{m=0}^{n−1} e^{jmψ}|² = sin²(nψ/2)/sin²(ψ/2)`.
fn array_factor(n: f64, psi: f64) -> f64 {
    let s = (0.5 * psi).sin();
    if s.abs() < 1e-9 {
        return n * n;
    }
    ((0.5 * n * psi).sin() / s).powi(2)
}

/// GN-model XPM of interferer `k` on `i`, with the interferer band collapsed
/// onto its center inside `μ` but kept in the span array factor.
fn xpm_gn_integral(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    i: usize,
    k: usize,
    spans: usize,
    opts: &IntegralOptions,
    link: Option<&ExactLink>,
) -> Result<f64> {
    let (ci, ck) = (grid.channel(i), grid.channel(k));
    let kernel = pair_kernel(grid, fiber, i, k, None)?;
    let half = 0.5 * ci.bandwidth;
    let n = spans;
    let cuts = lobe_breakpoints(kernel.phi * kernel.delta_f, spans, -half, half);
    let q = integrate(
        |f1: f64| {
            let theta = kernel.phi * f1 * kernel.delta_f;
            let s = kernel.phi * f1 * ck.bandwidth / 2.0;
            // ∫ df₂ |Σ_m e^{jm f₁(f₂+Δf)φ}|² over the interferer band.
            let mut sum = n as f64;
            for d in 1..n {
                sum += 2.0 * (n - d) as f64 * (d as f64 * theta).cos() * sinc(d as f64 * s);
            }
            kernel_power(&kernel, link, ci.center_freq, ck.center_freq, f1) * ck.bandwidth * sum
        },
        -half,
        half,
        &cuts,
        &opts.quad_1d,
    );
    let ratio = ck.launch_power / ci.launch_power;
    Ok(32.0 / 27.0 * ratio * ratio * fiber.gamma() * fiber.gamma() / (ck.bandwidth * ck.bandwidth) * q.into_result()?)
}

/// GN-model η (SPM + XPM, no FWM) for the listed channels by quadrature.
pub fn gn_xpm_spm_integral(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    spans: usize,
    channels: &[usize],
    opts: &IntegralOptions,
) -> Result<Vec<f64>> {
    if spans == 0 {
        return domain("span count must be at least 1");
    }
    if fiber.gamma() == 0.0 {
        return Ok(vec![0.0; channels.len()]);
    }
    let exact = ExactLink::new(grid, fiber, opts.link_panels)?;
    let xpm_link = match opts.kernel {
        LinkKernel::Exact => Some(&exact),
        LinkKernel::XpmApprox => None,
    };
    channels
        .iter()
        .map(|&i| {
            if i >= grid.len() {
                return domain(format!("channel {i} is outside the grid"));
            }
            let mut eta = spm_integral(grid, fiber, i, spans, &exact, &opts.quad_2d)?;
            for k in (0..grid.len()).filter(|&k| k != i) {
                eta += xpm_gn_integral(grid, fiber, i, k, spans, opts, xpm_link)?;
            }
            Ok(eta)
        })
        .collect()
}

/// Integral-tier report for the listed channels: GN part from
/// [`gn_xpm_spm_integral`], correction from the 1-D integral per interferer.
pub fn integral_report(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    plan: &LinkPlan,
    channels: &[usize],
    opts: &IntegralOptions,
) -> Result<NliReport> {
    let spans = plan.span_count();
    let gn = gn_xpm_spm_integral(grid, fiber, spans, channels, opts)?;
    let link = exact_link(grid, fiber, opts)?;
    let mut out = Vec::with_capacity(channels.len());
    for (&i, eta_gn) in channels.iter().zip(gn) {
        let mut corr = 0.0;
        for k in (0..grid.len()).filter(|&k| k != i) {
            corr += correction_1d(grid, fiber, i, k, spans, opts, link.as_ref())?;
        }
        let ch = grid.channel(i);
        let ase_power = plan.ase_power(grid, fiber, i)?;
        let eta_total = eta_gn + corr;
        out.push(ChannelNli {
            center_freq: ch.center_freq,
            launch_power: ch.launch_power,
            eta_gn,
            eta_corr: corr,
            eta_total,
            ase_power,
            snr: crate::closed_form::snr(ch.launch_power, ase_power, eta_total.max(0.0))?,
        });
    }
    Ok(NliReport { tier: Tier::Integral, span_count: spans, channels: out })
}

/// Sum of the 1-D corrections over every interferer of `coi`.
pub fn total_correction_integral(
    grid: &ChannelGrid,
    fiber: &FiberSpec,
    coi: usize,
    spans: usize,
    opts: &IntegralOptions,
) -> Result<f64> {
    let link = exact_link(grid, fiber, opts)?;
    let mut acc = 0.0;
    for k in (0..grid.len()).filter(|&k| k != coi) {
        acc += correction_1d(grid, fiber, coi, k, spans, opts, link.as_ref())?;
    }
    Ok(acc)
}
