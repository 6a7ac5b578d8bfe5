//! Excess kurtosis of common constellations.

use isrs_nli::modulation::ModulationFormat;

fn main() -> isrs_nli::Result<()> {
    println!("{:<12} {:>10} {:>12}", "format", "Phi", "-3(M+1)/5(M-1)");
    println!("{:<12} {:>10.4}", "qpsk", ModulationFormat::qpsk().excess_kurtosis());
    for m in [16usize, 64, 256, 1024, 4096] {
        let f = ModulationFormat::square_qam(m)?;
        let exact = -3.0 * (m as f64 + 1.0) / (5.0 * (m as f64 - 1.0));
        println!("{:<12} {:>10.4} {:>12.6}", f.name(), f.excess_kurtosis(), exact);
    }
    for shaping in [0.01, 0.03, 0.06] {
        let f = ModulationFormat::maxwell_boltzmann_qam(64, shaping)?;
        println!("{:<12} {:>10.4}   (lambda = {shaping})", f.name(), f.excess_kurtosis());
    }
    println!("{:<12} {:>10.4}", "gaussian", ModulationFormat::gaussian().excess_kurtosis());
    Ok(())
}
