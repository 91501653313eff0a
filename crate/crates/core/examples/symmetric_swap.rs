//! Two airplanes swapping positions head on. Heading noise decides which way
//! the pair turns; the opinions then agree and the line of sight rotates.

use blockfree::scenarios::symmetric_head_on;
use blockfree::sim::{bearing_sweep, committed_opinion};
use blockfree::run_scenario;

fn main() -> blockfree::Result<()> {
    let (mut cw, mut ccw) = (0, 0);
    for seed in 0..20 {
        let out = run_scenario(&symmetric_head_on(seed))?;
        let sweep = bearing_sweep(&out.log, 1, 2);
        if sweep < 0.0 {
            cw += 1;
        } else {
            ccw += 1;
        }
        println!(
            "seed {seed:>2}: z1 {:+.2}  z2 {:+.2}  sweep {sweep:+.2} rad  min sep {:.3}",
            committed_opinion(&out.log, 1),
            committed_opinion(&out.log, 2),
            out.metrics.min_separation
        );
    }
    println!("{cw} clockwise, {ccw} counter-clockwise");
    Ok(())
}
