//! Eight airplanes on a crossing grid, each meeting the others one pair at a
//! time. Figures go to ./out.

use std::path::Path;

use blockfree::cli::summarize;
use blockfree::plot::write_run_plots;
use blockfree::run_scenario;
use blockfree::scenarios::eight_airplanes;

fn main() -> blockfree::Result<()> {
    let s = eight_airplanes(0);
    let run = run_scenario(&s)?;
    print!("{}", summarize(&run.metrics));
    let mut pairs: Vec<(u32, u32)> = run
        .log
        .rows
        .iter()
        .filter_map(|r| r.threat.map(|j| (r.id.min(j), r.id.max(j))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    println!("{} distinct encounters", pairs.len());
    std::fs::create_dir_all("out")?;
    write_run_plots(Path::new("out"), &run.log, &s)?;
    Ok(())
}
