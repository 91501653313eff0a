//! Equilibria of the two-airplane opinion model as attention grows. The
//! neutral state loses stability at u = d / (2κ).

use blockfree::analysis::{bifurcation_sweep, TwoAgentField};
use blockfree::plot::bifurcation_svg;

fn main() -> blockfree::Result<()> {
    let sweep = bifurcation_sweep(&TwoAgentField::symmetric(1.0, 1.0), 0.0, 1.0, 100)?;
    for p in sweep.points.iter().step_by(10) {
        let eq: Vec<String> = p
            .equilibria
            .iter()
            .map(|e| format!("({:+.3}, {:+.3}){}", e.z1, e.z2, if e.stable { "s" } else { "u" }))
            .collect();
        println!("u {:.2}: {}", p.u, eq.join(" "));
    }
    println!("onset at u = {:?}", sweep.critical_u);
    std::fs::write("bifurcation.svg", bifurcation_svg(&sweep))?;
    Ok(())
}
