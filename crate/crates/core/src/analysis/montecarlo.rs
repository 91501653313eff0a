//! Randomized encounters and the baseline-versus-opinion comparison.

use std::f64::consts::{FRAC_PI_6, PI};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig_digits;
use crate::geom::{AngleRad, Vec2};
use crate::sim::{run_scenario, AirplaneSpec, RunMetrics, Scenario};

/// Start of airplane 2; airplane 1 starts at the origin.
pub const ENCOUNTER_SPAN: f64 = 10.0;

/// Range of the mirrored offset between a desired track and the bearing.
const OFFSET_RANGE: (f64, f64) = (0.3, FRAC_PI_6 - 0.02);
/// Largest mismatch between the two offsets.
const MAX_SKEW: f64 = 0.03;
/// Range of start-to-goal distances.
const GOAL_DISTANCE: (f64, f64) = (20.0, 25.0);

/// Two airplanes facing each other whose tracks deviate from the mutual
/// bearing by offsets of opposite sign, the geometry in which both safety
/// filters pick mirrored sides. Deterministic in `seed`.
pub fn generate_encounter(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let offset = rng.random_range(OFFSET_RANGE.0..OFFSET_RANGE.1);
    let skew = rng.random_range(-MAX_SKEW..MAX_SKEW);
    let off1 = side * offset;
    let off2 = -side * (offset + skew).clamp(OFFSET_RANGE.0, OFFSET_RANGE.1);
    let len1 = rng.random_range(GOAL_DISTANCE.0..GOAL_DISTANCE.1);
    let len2 = rng.random_range(GOAL_DISTANCE.0..GOAL_DISTANCE.1);

    let p1 = Vec2::ZERO;
    let p2 = Vec2::new(ENCOUNTER_SPAN, 0.0);
    let g1 = p1 + Vec2::from_angle(AngleRad::wrap(off1)) * len1;
    let g2 = p2 + Vec2::from_angle(AngleRad::wrap(PI + off2)) * len2;

    let mut scenario = Scenario::with_defaults(format!("encounter_{seed}"));
    scenario.seed = seed;
    scenario.airplanes = vec![
        AirplaneSpec::toward_goal(1, p1, g1, 0.0),
        AirplaneSpec::toward_goal(2, p2, g2, 0.0),
    ];
    scenario
}

/// Dwell above which a blocking interval counts as an event rather than a
/// transient at a mode switch.
pub const BLOCKING_EVENT_DWELL: f64 = 2.0;

/// Outcome of one variant of one seed. Exactly one of the fields is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantOutcome {
    pub metrics: Option<RunMetrics>,
    pub error: Option<String>,
}

impl VariantOutcome {
    fn from_run(scenario: &Scenario) -> Self {
        match run_scenario(scenario) {
            Ok(out) => Self { metrics: Some(out.metrics), error: None },
            Err(e) => Self { metrics: None, error: Some(e.to_string()) },
        }
    }

    fn violated(&self) -> bool {
        self.metrics.as_ref().is_some_and(|m| m.violation_count > 0)
    }

    fn blocked(&self) -> bool {
        self.metrics.as_ref().is_some_and(|m| m.max_blocking_dwell() > BLOCKING_EVENT_DWELL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub baseline: VariantOutcome,
    pub opinion: VariantOutcome,
    /// Mean over airplanes of the relative flight-time saving; present only
    /// when every airplane reached its goal in both variants.
    pub time_saving: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub n_runs: usize,
    pub base_seed: u64,
    /// Opinion-enabled runs with at least one separation violation.
    pub violations: usize,
    /// Opinion-enabled runs with a blocking interval longer than
    /// [`BLOCKING_EVENT_DWELL`].
    pub blocking_events: usize,
    pub baseline_violations: usize,
    pub baseline_blocking_events: usize,
    /// Runs where either variant aborted.
    pub aborted: usize,
    /// Runs contributing to `mean_time_saving`.
    pub compared_runs: usize,
    pub mean_time_saving: Option<f64>,
    /// Smallest separation over all opinion-enabled runs.
    pub min_separation: f64,
    pub runs: Vec<RunRecord>,
}

fn time_saving(baseline: &RunMetrics, opinion: &RunMetrics) -> Option<f64> {
    let mut total = 0.0;
    for b in &baseline.airplanes {
        let tb = b.flight_time?;
        let to = opinion.airplane(b.id)?.flight_time?;
        total += (tb - to) / tb;
    }
    Some(total / baseline.airplanes.len() as f64)
}

/// Copies every parameter of `template` except the airplanes, name and seed.
fn with_template(mut scenario: Scenario, template: &Scenario) -> Scenario {
    scenario.safety = template.safety;
    scenario.opinion = template.opinion;
    scenario.dt = template.dt;
    scenario.t_max = template.t_max;
    scenario.goal_radius = template.goal_radius;
    scenario.noise_std = template.noise_std;
    scenario.heading_mode = template.heading_mode;
    scenario.opinion_enabled = true;
    scenario
}

/// Runs `n` generated encounters with seeds `base_seed..base_seed + n`, each
/// with and without opinions, using the parameters of `template`.
pub fn monte_carlo(n: usize, base_seed: u64, template: &Scenario) -> Result<MonteCarloReport> {
    monte_carlo_with(n, base_seed, template, generate_encounter)
}

/// [`monte_carlo`] over an arbitrary seeded scenario source.
pub fn monte_carlo_with<G>(n: usize, base_seed: u64, template: &Scenario, generate: G) -> Result<MonteCarloReport>
where
    G: Fn(u64) -> Scenario + Sync,
{
    if n == 0 {
        return Err(Error::InvalidConfig("monte carlo needs at least one run".into()));
    }
    // bad parameters would fail every run the same way
    with_template(generate(base_seed), template).validate()?;
    let mut runs: Vec<RunRecord> = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed.wrapping_add(k);
            let scenario = with_template(generate(seed), template);
            let baseline = VariantOutcome::from_run(&scenario.baseline());
            let opinion = VariantOutcome::from_run(&scenario);
            let time_saving = match (&baseline.metrics, &opinion.metrics) {
                (Some(b), Some(o)) => time_saving(b, o),
                _ => None,
            };
            RunRecord { seed, baseline, opinion, time_saving }
        })
        .collect();
    runs.sort_by_key(|r| r.seed);

    let count = |f: &dyn Fn(&RunRecord) -> bool| runs.iter().filter(|r| f(r)).count();
    let savings: Vec<f64> = runs.iter().filter_map(|r| r.time_saving).collect();
    let mean_time_saving = (!savings.is_empty()).then(|| savings.iter().sum::<f64>() / savings.len() as f64);
    let min_separation = runs
        .iter()
        .filter_map(|r| r.opinion.metrics.as_ref())
        .map(|m| m.min_separation)
        .fold(f64::INFINITY, f64::min);

    Ok(MonteCarloReport {
        n_runs: runs.len(),
        base_seed,
        violations: count(&|r| r.opinion.violated()),
        blocking_events: count(&|r| r.opinion.blocked()),
        baseline_violations: count(&|r| r.baseline.violated()),
        baseline_blocking_events: count(&|r| r.baseline.blocked()),
        aborted: count(&|r| r.baseline.error.is_some() || r.opinion.error.is_some()),
        compared_runs: savings.len(),
        mean_time_saving,
        min_separation,
        runs,
    })
}

impl MonteCarloReport {
    /// Opinion-enabled runs are clean: no violation, no blocking event, no abort.
    pub fn is_clean(&self) -> bool {
        self.violations == 0 && self.blocking_events == 0 && self.aborted == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Key-value summary followed by one table row per seed.
    pub fn to_text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "na".to_string(), |v| sig_digits(v, 6));
        let mut out = String::new();
        let _ = writeln!(out, "n_runs: {}", self.n_runs);
        let _ = writeln!(out, "base_seed: {}", self.base_seed);
        let _ = writeln!(out, "violations: {}", self.violations);
        let _ = writeln!(out, "blocking_events: {}", self.blocking_events);
        let _ = writeln!(out, "baseline_violations: {}", self.baseline_violations);
        let _ = writeln!(out, "baseline_blocking_events: {}", self.baseline_blocking_events);
        let _ = writeln!(out, "aborted: {}", self.aborted);
        let _ = writeln!(out, "compared_runs: {}", self.compared_runs);
        let _ = writeln!(out, "mean_time_saving: {}", opt(self.mean_time_saving));
        let _ = writeln!(out, "min_separation: {}", sig_digits(self.min_separation, 6));
        let _ = writeln!(out);
        let _ = writeln!(out, "seed\tbaseline_dwell\topinion_dwell\topinion_min_sep\ttime_saving\tstatus");
        for r in &self.runs {
            let dwell = |v: &VariantOutcome| opt(v.metrics.as_ref().map(|m| m.max_blocking_dwell()));
            let sep = opt(r.opinion.metrics.as_ref().map(|m| m.min_separation));
            let status = match (&r.baseline.error, &r.opinion.error) {
                (None, None) => "ok",
                _ => "aborted",
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.seed,
                dwell(&r.baseline),
                dwell(&r.opinion),
                sep,
                opt(r.time_saving),
                status
            );
        }
        out
    }
}
