//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails the
//! target if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockfree::analysis::{bifurcation_sweep, monte_carlo, MonteCarloReport, TwoAgentField};
use blockfree::geom::bearing;
use blockfree::safety::{qp_oracle_filter, safety_filter};
use blockfree::scenarios::{case_study, case_study_with_bias, eight_airplanes, symmetric_head_on, STRONG_BIAS};
use blockfree::sim::{bearing_sweep, blocking_pair_predicate, committed_opinion, run_scenario};
use blockfree::{AirplaneSpec, AngleRad, FilterBranch, ModeLabel, SafetyParams, Scenario, Side, Vec2};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The 200 generated encounters, run once with noise and once without.
struct Generated {
    noisy: MonteCarloReport,
    quiet: MonteCarloReport,
    elapsed: Duration,
}

const MC_RUNS: usize = 200;
const MC_SEED: u64 = 42;

fn generated() -> Generated {
    let start = Instant::now();
    let noisy = monte_carlo(MC_RUNS, MC_SEED, &Scenario::with_defaults("mc")).expect("monte carlo");
    let mut quiet_template = Scenario::with_defaults("mc");
    quiet_template.noise_std = 0.0;
    let quiet = monte_carlo(MC_RUNS, MC_SEED, &quiet_template).expect("monte carlo");
    Generated { noisy, quiet, elapsed: start.elapsed() }
}

fn c1_safety(g: &Generated) -> Outcome {
    let r = SafetyParams::default().r;
    let quiet_ok = g.quiet.min_separation >= r - 1e-6 && g.quiet.aborted == 0;
    let noisy_ok = g.noisy.min_separation >= 0.99 * r && g.noisy.aborted == 0;
    let fast = g.elapsed < Duration::from_secs(60);
    ensure(
        quiet_ok && noisy_ok && fast,
        format!(
            "min separation {:.6} without noise, {:.6} with noise; {} runs in {:.1} s",
            g.quiet.min_separation,
            g.noisy.min_separation,
            4 * MC_RUNS,
            g.elapsed.as_secs_f64()
        ),
    )
}

fn c2_blocking_free(g: &Generated) -> Outcome {
    let mut s = case_study(0).baseline();
    let noisy_dwell = run_scenario(&s).unwrap().metrics.max_blocking_dwell();
    s.noise_std = 0.0;
    let quiet_dwell = run_scenario(&s).unwrap().metrics.max_blocking_dwell();
    ensure(
        g.noisy.blocking_events == 0 && g.quiet.blocking_events == 0 && noisy_dwell >= 5.0 && quiet_dwell >= 5.0,
        format!(
            "blocking events {} / {} (noise / none); case-study baseline dwell {:.2} / {:.2}",
            g.noisy.blocking_events, g.quiet.blocking_events, noisy_dwell, quiet_dwell
        ),
    )
}

fn flight_time(s: &Scenario, id: u32) -> f64 {
    let out = run_scenario(s).unwrap();
    out.metrics.airplane(id).and_then(|a| a.flight_time).expect("reached goal")
}

fn c3_time_saving(g: &Generated) -> Outcome {
    let mean = g.noisy.mean_time_saving.unwrap_or(f64::NEG_INFINITY);
    let s = case_study(0);
    let saving = |id: u32| {
        let base = flight_time(&s.baseline(), id);
        (base - flight_time(&s, id)) / base
    };
    let (yielding, other) = (saving(1), saving(2));
    ensure(
        mean >= 0.10 && yielding >= 0.0 && other >= 0.15,
        format!(
            "mean saving {:.1}% over {} compared runs; case study A1 (yields) {:.1}%, A2 {:.1}%",
            100.0 * mean,
            g.noisy.compared_runs,
            100.0 * yielding,
            100.0 * other
        ),
    )
}

fn c4_bifurcation() -> Outcome {
    let sweep = bifurcation_sweep(&TwoAgentField::symmetric(1.0, 1.0), 0.0, 1.0, 100).map_err(|e| e.to_string())?;
    let onset = sweep.critical_u.unwrap_or(f64::NAN);
    let last = sweep.points.last().unwrap();
    let stable: Vec<_> = last.equilibria.iter().filter(|e| e.stable).collect();
    let origin_unstable = last.equilibria.iter().any(|e| e.z1.abs() < 1e-9 && e.z2.abs() < 1e-9 && !e.stable);
    let agree = stable.iter().all(|e| e.z1.signum() == e.z2.signum() && e.z1.abs() > 1e-6);
    let residual = sweep.points.iter().flat_map(|p| p.equilibria.iter()).map(|e| e.residual).fold(0.0, f64::max);
    ensure(
        (0.49..=0.51).contains(&onset) && stable.len() == 2 && agree && origin_unstable && residual <= 1e-8,
        format!(
            "onset u = {onset:.4}; at u = 1: {} stable, same-sign {agree}, origin unstable {origin_unstable}; max residual {residual:.1e}",
            stable.len()
        ),
    )
}

fn c5_closed_form() -> Outcome {
    let start = Instant::now();
    let params = SafetyParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 10_000 {
        let pi = Vec2::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let dist = rng.random_range(params.r..8.0);
        let pj = pi + Vec2::from_angle(AngleRad::wrap(rng.random_range(-PI..PI))) * dist;
        let theta = AngleRad::wrap(rng.random_range(-PI..PI));
        let side = if rng.random_bool(0.5) { Side::Plus } else { Side::Minus };
        let closed = safety_filter(theta, pi, pj, &params, side).map_err(|e| e.to_string())?;
        if closed.branch == FilterBranch::TieBreak {
            continue;
        }
        let oracle = qp_oracle_filter(theta, pi, pj, &params).map_err(|e| e.to_string())?;
        let err = oracle.minimizers.iter().map(|m| closed.safe_heading.distance(*m)).fold(f64::INFINITY, f64::min);
        worst = worst.max(err);
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(
        worst <= 1e-4 && elapsed < Duration::from_secs(10),
        format!("{checked} states, max discrepancy {worst:.2e} rad, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn c6_symmetry_breaking() -> Outcome {
    let (mut cw, mut ccw, mut unresolved) = (0, 0, 0);
    for seed in 0..100 {
        let out = run_scenario(&symmetric_head_on(seed)).unwrap();
        let sweep = bearing_sweep(&out.log, 1, 2);
        if !out.metrics.all_reached() || out.metrics.max_blocking_dwell() > 2.0 {
            unresolved += 1;
        } else if sweep < -1.0 {
            cw += 1;
        } else if sweep > 1.0 {
            ccw += 1;
        } else {
            unresolved += 1;
        }
    }
    ensure(cw >= 20 && ccw >= 20, format!("{cw} clockwise, {ccw} counter-clockwise, {unresolved} unresolved"))
}

fn c7_bias() -> Outcome {
    // Without bias A1 commits to the negative side; +10 pushes it to the
    // other one, so A2 has to follow.
    let natural = committed_opinion(&run_scenario(&case_study(0)).unwrap().log, 1).signum();
    let b1 = -natural * STRONG_BIAS;
    let mut followed = 0;
    for seed in 0..20 {
        let out = run_scenario(&case_study_with_bias(seed, b1)).unwrap();
        let z1 = committed_opinion(&out.log, 1);
        let z2 = committed_opinion(&out.log, 2);
        // both steering toward β + π/2 rotates the line of sight clockwise
        let sweep = bearing_sweep(&out.log, 1, 2);
        let expected_sweep = -b1.signum();
        let ok = z1.signum() == b1.signum()
            && z2.signum() == b1.signum()
            && sweep.signum() == expected_sweep
            && out.metrics.all_reached()
            && out.metrics.violation_count == 0;
        followed += ok as usize;
    }
    ensure(followed == 20, format!("b1 = {b1:+}: {followed}/20 runs with A1 and A2 on the biased side"))
}

fn c8_eight_airplanes() -> Outcome {
    let mut problems = Vec::new();
    for seed in 0..5 {
        let s = eight_airplanes(seed);
        let out = run_scenario(&s).unwrap();
        if !out.metrics.all_reached() {
            problems.push(format!("seed {seed}: not all arrived"));
        }
        if out.metrics.violation_count > 0 {
            problems.push(format!("seed {seed}: {} violations", out.metrics.violation_count));
        }
        for step in out.log.steps(8) {
            let mut ids: Vec<u32> = step.iter().map(|r| r.id).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != 8 || step.iter().any(|r| r.t != step[0].t) {
                problems.push(format!("seed {seed}: malformed step at t = {}", step[0].t));
                break;
            }
            // a threat is one other airplane, and only when the cone is open
            if step.iter().any(|r| r.threat == Some(r.id) || (r.threat.is_some() != (r.delta > 0.0))) {
                problems.push(format!("seed {seed}: bad threat at t = {}", step[0].t));
                break;
            }
        }
    }
    let out = run_scenario(&eight_airplanes(0)).unwrap();
    ensure(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "5 seeds, all arrived by t = {:.1}, min separation {:.3}",
                out.metrics.duration, out.metrics.min_separation
            )
        } else {
            problems.join("; ")
        },
    )
}

/// Random two-airplane encounter without noise.
fn encounter() -> impl Strategy<Value = Scenario> {
    (1.2f64..12.0, -PI..PI, -0.6f64..0.6, -0.6f64..0.6, 8.0f64..20.0, 8.0f64..20.0, -2.0f64..2.0, any::<bool>())
        .prop_map(|(dist, dir, off1, off2, l1, l2, bias, opinions)| {
            let p1 = Vec2::ZERO;
            let p2 = Vec2::from_angle(AngleRad::wrap(dir)) * dist;
            let g1 = p1 + Vec2::from_angle(AngleRad::wrap(dir + off1)) * l1;
            let g2 = p2 + Vec2::from_angle(AngleRad::wrap(dir + PI + off2)) * l2;
            let mut s = Scenario::with_defaults("prop");
            s.airplanes = vec![AirplaneSpec::toward_goal(1, p1, g1, bias), AirplaneSpec::toward_goal(2, p2, g2, 0.0)];
            s.noise_std = 0.0;
            s.t_max = 40.0;
            s.opinion_enabled = opinions;
            s
        })
}

fn run_property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map(|_| format!("{name}: 1000 cases")).map_err(|e| format!("{name}: {e}"))
}

fn c9_invariants() -> Outcome {
    let r = SafetyParams::default().r;
    let mut passed = Vec::new();
    passed.push(run_property("forward invariance, mode partition, blocking predicate consistency", encounter(), |s| {
        let out = run_scenario(&s).unwrap();
        prop_assert!(out.metrics.min_separation >= r - 1e-6, "min separation {}", out.metrics.min_separation);
        for row in &out.log.rows {
            prop_assert_eq!(row.mode == ModeLabel::Cruising, row.branch == FilterBranch::Otherwise);
        }
        for step in out.log.steps(2) {
            let (a, b) = (&step[0], &step[1]);
            if a.mode == ModeLabel::Blocking && b.mode == ModeLabel::Blocking {
                let b12 = bearing(a.position, b.position).unwrap();
                let b21 = bearing(b.position, a.position).unwrap();
                let holds = blocking_pair_predicate(a.theta_n, b.theta_n, b12, b21, a.delta);
                prop_assert!(holds, "blocking pair at t = {} outside the blocking predicate", a.t);
            }
        }
        Ok(())
    })?);
    passed.push(run_property("determinism", (encounter(), any::<u64>()), |(mut s, seed)| {
        s.noise_std = 0.1;
        s.seed = seed;
        s.t_max = 15.0;
        let a = run_scenario(&s).unwrap().log.to_csv();
        let b = run_scenario(&s).unwrap().log.to_csv();
        prop_assert!(a == b);
        Ok(())
    })?);
    passed.push(run_property(
        "opinion neutrality",
        (-PI..PI, 4.0f64..30.0, -10.0f64..10.0, 5.0f64..20.0, any::<u64>()),
        |(dir, gap, shift, len, seed)| {
            // parallel lanes in the same direction never close in
            let lane = Vec2::from_angle(AngleRad::wrap(dir));
            let normal = Vec2::from_angle(AngleRad::wrap(dir + PI / 2.0));
            let p1 = Vec2::ZERO;
            let p2 = normal * gap + lane * shift;
            let mut s = Scenario::with_defaults("neutral");
            s.airplanes =
                vec![AirplaneSpec::toward_goal(1, p1, p1 + lane * len, 0.0), AirplaneSpec::toward_goal(2, p2, p2 + lane * len, 0.0)];
            s.seed = seed;
            let with = run_scenario(&s).unwrap();
            if with.log.rows.iter().any(|row| row.mode != ModeLabel::Cruising) {
                return Ok(());
            }
            let without = run_scenario(&s.baseline()).unwrap();
            prop_assert_eq!(with.log.rows.len(), without.log.rows.len());
            for (x, y) in with.log.rows.iter().zip(&without.log.rows) {
                prop_assert!(x.position == y.position && x.heading == y.heading);
            }
            Ok(())
        },
    )?);
    Ok(passed.join("; "))
}

fn main() {
    let generated = generated();
    let criteria: Vec<Criterion> = vec![
        ("C1 safety invariance", Box::new(|| c1_safety(&generated))),
        ("C2 blocking-free resolution", Box::new(|| c2_blocking_free(&generated))),
        ("C3 flight-time saving", Box::new(|| c3_time_saving(&generated))),
        ("C4 bifurcation point", Box::new(c4_bifurcation)),
        ("C5 closed-form filter", Box::new(c5_closed_form)),
        ("C6 symmetry breaking", Box::new(c6_symmetry_breaking)),
        ("C7 bias adaptation", Box::new(c7_bias)),
        ("C8 eight airplanes", Box::new(c8_eight_airplanes)),
        ("C9 determinism and invariants", Box::new(c9_invariants)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
