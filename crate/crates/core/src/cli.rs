//! Command-line surface: `simulate | montecarlo | bifurcation | schema`.
//!
//! Exit codes: 0 success, 1 bad input or IO failure, 2 the run completed but
//! broke separation (or, for `montecarlo`, had a blocking event).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{bifurcation_sweep, monte_carlo, TwoAgentField};
use crate::error::{Error, Result};
use crate::opinion::OpinionParams;
use crate::plot::{bifurcation_svg, write_run_plots, PlotKind};
use crate::runspec::{load_run_spec, OutputOptions, RunSpec, SCHEMA};
use crate::scenarios::{builtin, BUILTIN_NAMES};
use crate::sim::{run_scenario, RunMetrics, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSAFE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "blockfree", version, about = "Opinion-guided conflict resolution for two-airplane encounters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonFlags {
    /// Safety filter only, no opinions.
    #[arg(long)]
    pub baseline: bool,
    /// Override the random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario from a spec file or a built-in name.
    Simulate {
        /// Path to a JSON run spec.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        spec: Option<PathBuf>,
        /// One of: head_on, case_study, eight_airplanes.
        #[arg(long)]
        builtin: Option<String>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Compare the filter with and without opinions over generated encounters.
    Montecarlo {
        /// Number of encounters.
        n: usize,
        /// Heading noise standard deviation, radians.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        /// Write the report as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Equilibria of the reduced two-airplane opinion dynamics against attention.
    Bifurcation {
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        u_min: f64,
        #[arg(long, default_value_t = 1.0)]
        u_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema of the run-spec file.
    Schema,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Simulate { spec, builtin, flags } => cmd_simulate(spec.as_deref(), builtin.as_deref(), &flags),
        Command::Montecarlo { n, noise, json, flags } => cmd_montecarlo(n, noise, json, &flags),
        Command::Bifurcation { d, kappa, u_min, u_max, steps, out } => {
            cmd_bifurcation(d, kappa, u_min, u_max, steps, out.as_deref())
        }
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(EXIT_OK)
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn summarize(metrics: &RunMetrics) -> String {
    let mut out = String::new();
    for a in &metrics.airplanes {
        let time = a.flight_time.map_or_else(|| "not reached".to_string(), |t| format!("{t:.2}"));
        out.push_str(&format!(
            "A{}: flight_time {time}, path_length {:.2}, blocking_dwell {:.2}\n",
            a.id, a.path_length, a.blocking_dwell
        ));
    }
    out.push_str(&format!(
        "min_separation {:.4}, violations {}, duration {:.2}\n",
        metrics.min_separation, metrics.violation_count, metrics.duration
    ));
    out
}

pub fn cmd_simulate(spec: Option<&Path>, name: Option<&str>, flags: &CommonFlags) -> Result<i32> {
    let RunSpec { mut scenario, mut output } = match (spec, name) {
        (Some(path), _) => load_run_spec(path)?,
        (None, Some(name)) => {
            let scenario = builtin(name, 0).ok_or_else(|| {
                Error::InvalidConfig(format!("unknown built-in {name:?}; expected one of {}", BUILTIN_NAMES.join(", ")))
            })?;
            RunSpec { scenario, output: OutputOptions::default() }
        }
        (None, None) => return Err(Error::InvalidConfig("no scenario given".into())),
    };
    apply_flags(&mut scenario, &mut output, flags);

    let run = run_scenario(&scenario)?;
    ensure_dir(&output.out_dir)?;
    if output.emit_csv {
        std::fs::write(output.out_dir.join(format!("{}.csv", scenario.name)), run.log.to_csv())?;
    }
    if output.emit_svg {
        write_run_plots(&output.out_dir, &run.log, &scenario)?;
    }
    std::fs::write(
        output.out_dir.join(format!("{}_metrics.json", scenario.name)),
        serde_json::to_string_pretty(&run.metrics).expect("metrics serialize"),
    )?;
    print!("{}", summarize(&run.metrics));
    Ok(if run.metrics.violation_count > 0 { EXIT_UNSAFE } else { EXIT_OK })
}

fn apply_flags(scenario: &mut Scenario, output: &mut OutputOptions, flags: &CommonFlags) {
    if flags.baseline {
        scenario.opinion_enabled = false;
    }
    if let Some(seed) = flags.seed {
        scenario.seed = seed;
    }
    if let Some(out) = &flags.out {
        output.out_dir = out.clone();
    }
}

pub fn cmd_montecarlo(n: usize, noise: f64, json: bool, flags: &CommonFlags) -> Result<i32> {
    if n == 0 {
        return Err(Error::InvalidConfig("montecarlo needs n >= 1".into()));
    }
    let mut template = Scenario::with_defaults("montecarlo");
    template.noise_std = noise;
    let report = monte_carlo(n, flags.seed.unwrap_or(0), &template)?;
    let text = if json { report.to_json() } else { report.to_text() };
    match &flags.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let file = if json { "montecarlo.json" } else { "montecarlo.txt" };
            std::fs::write(dir.join(file), &text)?;
        }
        None => print!("{text}"),
    }
    let (violations, blocking) = if flags.baseline {
        (report.baseline_violations, report.baseline_blocking_events)
    } else {
        (report.violations, report.blocking_events)
    };
    if report.aborted > 0 {
        return Ok(EXIT_ERROR);
    }
    Ok(if violations > 0 || blocking > 0 { EXIT_UNSAFE } else { EXIT_OK })
}

pub fn cmd_bifurcation(d: f64, kappa: f64, u_min: f64, u_max: f64, steps: usize, out: Option<&Path>) -> Result<i32> {
    if !(d.is_finite() && d > 0.0 && kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidConfig(format!("d and kappa must be > 0, got {d} and {kappa}")));
    }
    let sweep = bifurcation_sweep(&TwoAgentField::symmetric(d, kappa), u_min, u_max, steps)?;
    match out {
        Some(dir) => {
            ensure_dir(dir)?;
            std::fs::write(dir.join("sweep.csv"), sweep.to_csv())?;
            std::fs::write(dir.join(PlotKind::Bifurcation.file_name("sweep")), bifurcation_svg(&sweep))?;
        }
        None => print!("{}", sweep.to_csv()),
    }
    match sweep.critical_u {
        Some(u) => eprintln!("branch onset at u = {u:.4} (d/(2 kappa) = {:.4})", d / (2.0 * kappa)),
        None => eprintln!("no branch onset in [{u_min}, {u_max}]"),
    }
    // which κ the simulator's own gains imply is ambiguous; show every reading
    let reference = OpinionParams::default();
    let candidates: Vec<String> =
        reference.critical_candidates().iter().map(|(name, u)| format!("{name} {u:.4}")).collect();
    eprintln!(
        "simulator gains: u* by kappa reading: {}; k1/k2 = {:.1}",
        candidates.join(", "),
        reference.k1 / reference.k2
    );
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["blockfree", "nonsense"]), EXIT_ERROR);
        assert_eq!(run(["blockfree", "montecarlo", "0"]), EXIT_ERROR);
        assert_eq!(run(["blockfree", "simulate", "/definitely/not/here.json"]), EXIT_ERROR);
        assert_eq!(run(["blockfree", "simulate", "--builtin", "nope"]), EXIT_ERROR);
        assert_eq!(run(["blockfree", "bifurcation", "--d=-1"]), EXIT_ERROR);
        assert_eq!(run(["blockfree", "bifurcation", "--steps", "1"]), EXIT_ERROR);
    }

    #[test]
    fn flags_override_the_spec() {
        let mut s = Scenario::with_defaults("x");
        let mut o = OutputOptions::default();
        let flags = CommonFlags { baseline: true, seed: Some(9), out: Some("elsewhere".into()) };
        apply_flags(&mut s, &mut o, &flags);
        assert!(!s.opinion_enabled);
        assert_eq!(s.seed, 9);
        assert_eq!(o.out_dir, PathBuf::from("elsewhere"));
    }
}
