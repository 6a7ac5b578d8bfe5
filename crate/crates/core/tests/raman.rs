use approx::assert_relative_eq;
use isrs_nli::modulation::ModulationFormat;
use isrs_nli::quad::{integrate, QuadratureSpec};
use isrs_nli::raman::{
    fit_effective_params, log_z_grid, solve_raman_odes, triangular_profile, RamanGainSpectrum, RamanOdeOptions,
    Validity,
};
use isrs_nli::units::linear_to_db;
use isrs_nli::{Channel, ChannelGrid, FiberSpec};
use proptest::prelude::*;

fn smf_grid(channels: usize, power: f64) -> ChannelGrid {
    ChannelGrid::uniform(channels, 40.005e9, 40.004e9, power, ModulationFormat::gaussian(), 1550e-9).unwrap()
}

fn leff(alpha: f64, z: f64) -> f64 {
    (1.0 - (-alpha * z).exp()) / alpha
}

#[test]
fn two_channel_ode_matches_analytic_solution() {
    // Two tones: the power ratio obeys d ln(P1/P2)/dz = g P_tot e^{-αz}.
    let tone = |f: f64, p: f64| Channel {
        center_freq: f,
        bandwidth: 1e9,
        launch_power: p,
        modulation: ModulationFormat::gaussian(),
    };
    let grid = ChannelGrid::new(vec![tone(-5e12, 0.2), tone(5e12, 0.3)], 1550e-9).unwrap();
    let fiber = FiberSpec::standard_smf();
    let spectrum = RamanGainSpectrum::Linear { slope: fiber.raman_slope() };
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 50).unwrap();
    let options = RamanOdeOptions { relative_tolerance: 1e-10, ..Default::default() };
    let profile = solve_raman_odes(&grid, &fiber, &spectrum, &z, &options).unwrap();
    let g = spectrum.gain(10e12);
    let alpha = fiber.attenuation();
    for (j, &zz) in z.iter().enumerate() {
        let r = (0.2 / 0.3) * (g * 0.5 * leff(alpha, zz)).exp();
        let total = 0.5 * (-alpha * zz).exp();
        assert_relative_eq!(profile.channel(0)[j], total * r / (1.0 + r), max_relative = 1e-7);
        assert_relative_eq!(profile.channel(1)[j], total / (1.0 + r), max_relative = 1e-7);
    }
    // The low-frequency tone gains at the expense of the high one.
    assert!(profile.channel(0)[49] / (0.2 * (-alpha * z[49]).exp()) > 1.5);
}

#[test]
fn edge_channels_match_band_integrated_oracle() {
    let grid = smf_grid(251, 1e-3);
    let fiber = FiberSpec::standard_smf();
    let length = fiber.span_length();
    let profile = triangular_profile(&grid, &fiber, &[0.0, length], Validity::Enforce).unwrap();
    let x = grid.total_power() * fiber.raman_slope() * fiber.effective_length(length);
    let spec = QuadratureSpec::new(1e-12, 1e-300, 1000).unwrap();
    let band = |c: &Channel| integrate(|nu: f64| (-x * nu).exp(), c.lower_edge(), c.upper_edge(), &[], &spec).value;
    let norm: f64 = grid.channels().iter().map(|c| c.launch_power / c.bandwidth * band(c)).sum::<f64>()
        / grid.total_power();
    let decay = (-fiber.attenuation() * length).exp();
    for i in [0, 125, 250] {
        let c = grid.channel(i);
        let want = c.launch_power * decay * band(c) / c.bandwidth / norm;
        assert_relative_eq!(profile.channel(i)[1], want, max_relative = 1e-10);
    }
    let tilt = linear_to_db(profile.channel(0)[1] / profile.channel(250)[1]);
    assert!(tilt > 0.0, "low-frequency edge should gain, tilt {tilt} dB");
}

#[test]
fn tilt_grows_monotonically_along_the_span() {
    let grid = smf_grid(251, 1e-3);
    let fiber = FiberSpec::standard_smf();
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 100).unwrap();
    let profile = triangular_profile(&grid, &fiber, &z, Validity::Enforce).unwrap();
    let tilt: Vec<f64> = (0..z.len()).map(|j| profile.channel(0)[j] / profile.channel(250)[j]).collect();
    assert_eq!(tilt[0], 1.0);
    assert!(tilt.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn no_raman_coupling_gives_pure_attenuation() {
    let grid = smf_grid(21, 1e-3);
    let fiber = FiberSpec::standard_smf().with_raman_slope(0.0).unwrap();
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 20).unwrap();
    let profile = triangular_profile(&grid, &fiber, &z, Validity::Enforce).unwrap();
    for i in 0..grid.len() {
        for (j, &zz) in z.iter().enumerate() {
            assert_relative_eq!(profile.channel(i)[j], 1e-3 * (-fiber.attenuation() * zz).exp(), max_relative = 1e-14);
        }
    }
}

#[test]
fn halving_total_power_halves_the_tilt() {
    let fiber = FiberSpec::standard_smf();
    let length = fiber.span_length();
    let tilt_db = |p: f64| {
        let profile = triangular_profile(&smf_grid(251, p), &fiber, &[0.0, length], Validity::Enforce).unwrap();
        linear_to_db(profile.channel(0)[1] / profile.channel(250)[1])
    };
    let ratio = tilt_db(0.5e-3) / tilt_db(1e-3);
    assert!((ratio - 0.5).abs() < 0.025, "{ratio}");
}

#[test]
fn ode_with_linear_gain_reproduces_triangular_profile() {
    let grid = smf_grid(251, 1e-3);
    let fiber = FiberSpec::standard_smf();
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 40).unwrap();
    let spectrum = RamanGainSpectrum::Linear { slope: fiber.raman_slope() };
    let ode = solve_raman_odes(&grid, &fiber, &spectrum, &z, &RamanOdeOptions::default()).unwrap();
    let tri = triangular_profile(&grid, &fiber, &z, Validity::Enforce).unwrap();
    for i in [0, 60, 125, 190, 250] {
        for j in 0..z.len() {
            assert_relative_eq!(ode.channel(i)[j], tri.channel(i)[j], max_relative = 1e-2);
        }
    }
}

#[test]
fn fitted_parameters_follow_silica_like_gain_within_a_tenth_of_a_db() {
    // 10 THz of signal at 3 dBm per channel over a curved gain spectrum.
    let grid = ChannelGrid::uniform(51, 200e9, 190e9, 2e-3, ModulationFormat::gaussian(), 1550e-9).unwrap();
    let fiber = FiberSpec::standard_smf();
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 60).unwrap();
    let spectrum = RamanGainSpectrum::silica_like(fiber.raman_slope());
    let profile = solve_raman_odes(&grid, &fiber, &spectrum, &z, &RamanOdeOptions::default()).unwrap();
    let params = fit_effective_params(&profile, &grid).unwrap();
    assert!(params.max_deviation_db() < 0.1, "{}", params.max_deviation_db());
}

#[test]
fn fit_recovers_the_generating_parameters() {
    let grid = smf_grid(101, 2e-3);
    let fiber = FiberSpec::standard_smf();
    let z = log_z_grid(fiber.attenuation(), fiber.span_length(), 60).unwrap();
    let profile = triangular_profile(&grid, &fiber, &z, Validity::Enforce).unwrap();
    let params = fit_effective_params(&profile, &grid).unwrap();
    for p in &params.channels {
        assert_relative_eq!(p.attenuation, fiber.attenuation(), max_relative = 1e-4);
        assert_relative_eq!(p.raman_slope, fiber.raman_slope(), max_relative = 1e-3);
        assert!(p.max_deviation_db < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_power_decays_as_pure_attenuation(
        channels in 1usize..200,
        dbm in -10.0f64..5.0,
        frac in 0.0f64..1.0,
    ) {
        let grid = smf_grid(channels, 1e-3 * 10f64.powf(dbm / 10.0));
        let fiber = FiberSpec::standard_smf();
        let z = frac * fiber.span_length();
        let profile = triangular_profile(&grid, &fiber, &[0.0, z], Validity::Enforce).unwrap();
        let want = grid.total_power() * (-fiber.attenuation() * z).exp();
        prop_assert!((profile.total(1) / want - 1.0).abs() < 1e-10);
    }
}
