//! Per-span growth of the coherent sinc-series energy against its large-n limit.

use isrs_nli::closed_form::appendix_identity;
use isrs_nli::integral::sinc_series_increment;
use isrs_nli::quad::QuadratureSpec;

fn main() -> isrs_nli::Result<()> {
    let spec = QuadratureSpec::one_dimensional();
    for b in [1.0, 3.0, 50.0] {
        let limit = appendix_identity(1.0, b)?;
        println!("a = 1, b = {b}: limit {limit:.6e}");
        for n in [10, 100, 1000] {
            let inc = sinc_series_increment(n, 1.0, b, &spec)?;
            println!("  n = {n:>5}: increment {inc:.6e}, relative error {:+.2e}", inc / limit - 1.0);
        }
    }
    Ok(())
}
