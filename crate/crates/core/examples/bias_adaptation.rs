//! A strong bias on A1 picks the side of the bypass; A2 has no bias and
//! follows once it reads A1's intention.

use blockfree::scenarios::{case_study_with_bias, STRONG_BIAS};
use blockfree::sim::{bearing_sweep, committed_opinion};
use blockfree::run_scenario;

fn main() -> blockfree::Result<()> {
    for b1 in [0.0, STRONG_BIAS, -STRONG_BIAS] {
        let out = run_scenario(&case_study_with_bias(0, b1))?;
        println!(
            "b1 {b1:+5.1}: z1 {:+.2}  z2 {:+.2}  line of sight swept {:+.2} rad",
            committed_opinion(&out.log, 1),
            committed_opinion(&out.log, 2),
            bearing_sweep(&out.log, 1, 2)
        );
    }
    Ok(())
}
