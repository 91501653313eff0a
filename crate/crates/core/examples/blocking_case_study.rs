//! The crossing where the safety filter alone deadlocks: compares flight
//! times with and without opinions and writes the figures to ./out.

use std::path::Path;

use blockfree::cli::summarize;
use blockfree::plot::write_run_plots;
use blockfree::run_scenario;
use blockfree::scenarios::case_study;

fn main() -> blockfree::Result<()> {
    let guided = case_study(0);
    let mut baseline = guided.baseline();
    baseline.name = "case_study_baseline".into();
    let out_dir = Path::new("out");
    std::fs::create_dir_all(out_dir)?;
    let mut times = Vec::new();
    for s in [&baseline, &guided] {
        let run = run_scenario(s)?;
        println!("{}:\n{}", s.name, summarize(&run.metrics));
        write_run_plots(out_dir, &run.log, s)?;
        times.push(run.metrics);
    }
    for id in [1, 2] {
        let t = |i: usize| times[i].airplane(id).and_then(|a| a.flight_time).unwrap_or(f64::NAN);
        println!("A{id} saves {:.1}%", 100.0 * (t(0) - t(1)) / t(0));
    }
    Ok(())
}
