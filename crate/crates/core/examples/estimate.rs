//! Closed-form NLI and SNR across a 10 THz C+L comb for a few formats.
//!
//! cargo run --release --example estimate [spans]

use isrs_nli::closed_form::total_nli_closedform;
use isrs_nli::modulation::ModulationFormat;
use isrs_nli::units::{dbm_to_watt, linear_to_db};
use isrs_nli::{AseModel, ChannelGrid, FiberSpec, LinkPlan};

fn main() -> isrs_nli::Result<()> {
    let spans: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let fiber = FiberSpec::standard_smf();
    let plan = LinkPlan::new(spans)?.with_ase(AseModel::Amplifier { noise_figure_db: 5.0 })?;
    println!("{spans} x 100 km SMF, 251 x 40 GBd, 0 dBm per channel, NF 5 dB");
    println!("{:>8} {:>8} {:>10} {:>10} {:>10} {:>8}", "format", "f [THz]", "eta_gn dB", "eta_tot dB", "delta dB", "SNR dB");
    for format in [ModulationFormat::qpsk(), ModulationFormat::square_qam(64)?, ModulationFormat::gaussian()] {
        let grid = ChannelGrid::uniform(251, 40.005e9, 40.004e9, dbm_to_watt(0.0), format.clone(), 1550e-9)?;
        let report = total_nli_closedform(&grid, &fiber, &plan, None)?;
        for i in [0, 62, 125, 188, 250] {
            let c = &report.channels[i];
            println!(
                "{:>8} {:>8.3} {:>10.2} {:>10.2} {:>10.3} {:>8.2}",
                format.name(),
                c.center_freq * 1e-12,
                linear_to_db(c.eta_gn),
                linear_to_db(c.eta_total),
                linear_to_db(c.eta_total / c.eta_gn),
                linear_to_db(c.snr)
            );
        }
    }
    Ok(())
}
