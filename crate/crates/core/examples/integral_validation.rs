//! Closed-form correction against the numerically integrated one for the
//! center channel of a 41-channel QPSK comb.

use isrs_nli::closed_form::total_nli_closedform;
use isrs_nli::integral::{total_correction_integral, IntegralOptions};
use isrs_nli::modulation::ModulationFormat;
use isrs_nli::units::linear_to_db;
use isrs_nli::{ChannelGrid, FiberSpec, LinkPlan};

fn main() -> isrs_nli::Result<()> {
    let grid = ChannelGrid::uniform(41, 40.005e9, 40.004e9, 1e-3, ModulationFormat::qpsk(), 1550e-9)?;
    let fiber = FiberSpec::standard_smf();
    let opts = IntegralOptions::default();
    println!("{:>5} {:>14} {:>14} {:>10}", "spans", "closed form", "integral", "delta dB");
    for n in [1, 2, 5, 10, 20, 50] {
        let cf = total_nli_closedform(&grid, &fiber, &LinkPlan::new(n)?, None)?.channels[20].eta_corr;
        let int = total_correction_integral(&grid, &fiber, 20, n, &opts)?;
        println!("{n:>5} {cf:>14.4} {int:>14.4} {:>10.3}", linear_to_db(cf / int));
    }
    Ok(())
}
