//! Inter-channel Raman tilt along one span: the triangular closed form, the
//! coupled power equations with a silica-like gain curve, and per-channel
//! parameters fitted to the latter.

use isrs_nli::modulation::ModulationFormat;
use isrs_nli::raman::{
    fit_effective_params, log_z_grid, solve_raman_odes, triangular_profile, RamanGainSpectrum, RamanOdeOptions,
    Validity,
};
use isrs_nli::units::{dbm_to_watt, linear_to_db, natural_to_db_per_km};
use isrs_nli::{ChannelGrid, FiberSpec};

fn main() -> isrs_nli::Result<()> {
    let grid = ChannelGrid::uniform(251, 40.005e9, 40.004e9, dbm_to_watt(2.0), ModulationFormat::gaussian(), 1550e-9)?;
    let fiber = FiberSpec::standard_smf();
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 64)?;
    let tri = triangular_profile(&grid, &fiber, &z, Validity::Enforce)?;
    let spectrum = RamanGainSpectrum::silica_like(fiber.raman_slope());
    let ode = solve_raman_odes(&grid, &fiber, &spectrum, &z, &RamanOdeOptions::default())?;
    let last = z.len() - 1;
    println!("{:>8} {:>14} {:>14}", "f [THz]", "triangular dB", "silica ODE dB");
    for i in (0..grid.len()).step_by(25) {
        let net = |p: &[f64]| linear_to_db(p[last] / p[0]) + natural_to_db_per_km(fiber.attenuation()) * 100.0;
        println!("{:>8.3} {:>14.3} {:>14.3}", grid.channel(i).center_freq * 1e-12, net(tri.channel(i)), net(ode.channel(i)));
    }
    let params = fit_effective_params(&ode, &grid)?;
    println!("fitted to the ODE profile, worst deviation {:.4} dB", params.max_deviation_db());
    for i in [0, 125, 250] {
        let p = &params.channels[i];
        println!(
            "  channel {i:>3}: alpha {:.4} dB/km, alpha_bar {:.4} dB/km, C_r {:.4} 1/W/km/THz",
            natural_to_db_per_km(p.attenuation),
            natural_to_db_per_km(p.effective_attenuation),
            p.raman_slope * 1e3 * 1e12
        );
    }
    Ok(())
}
