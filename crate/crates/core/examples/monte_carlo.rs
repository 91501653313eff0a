//! Random crossing encounters with and without opinions. Pass the number of
//! runs as the first argument (default 100).

use blockfree::analysis::monte_carlo;
use blockfree::Scenario;

fn main() -> blockfree::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let report = monte_carlo(n, 42, &Scenario::with_defaults("mc"))?;
    println!("runs {}", report.n_runs);
    println!("violations {} (baseline {})", report.violations, report.baseline_violations);
    println!("blocking events {} (baseline {})", report.blocking_events, report.baseline_blocking_events);
    println!("min separation {:.4}", report.min_separation);
    if let Some(saving) = report.mean_time_saving {
        println!("mean saving {:.1}% over {} runs", 100.0 * saving, report.compared_runs);
    }
    Ok(())
}
