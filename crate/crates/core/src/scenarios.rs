//! Reference encounters shared by the examples, the CLI and the tests.
//!
//! The case-study geometry is a reconstruction: two airplanes whose desired
//! tracks lean toward mirrored sides of the mutual bearing, so that both
//! safety filters deflect into each other and fly side by side. Airplane 2
//! is closer to the crossing point; with opinions it keeps close to its
//! track while airplane 1 makes the detour.

use std::f64::consts::PI;

use crate::geom::{AngleRad, Vec2};
use crate::sim::{AirplaneSpec, Scenario};

/// Separation of the two starts in the case study.
pub const CASE_STUDY_SPAN: f64 = 8.0;
/// Angle between each desired track and the line joining the starts.
pub const CASE_STUDY_OFFSETS: (f64, f64) = (0.35, 0.45);
/// Start-to-goal distances.
pub const CASE_STUDY_LENGTHS: (f64, f64) = (30.0, 15.0);
/// Airplane that takes the detour in the unbiased case study.
pub const CASE_STUDY_YIELDING: u32 = 1;
/// Bias magnitude used to override the natural choice.
pub const STRONG_BIAS: f64 = 10.0;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["head_on", "case_study", "eight_airplanes"];

/// Two airplanes swapping positions along the same line.
pub fn symmetric_head_on(seed: u64) -> Scenario {
    let a = Vec2::ZERO;
    let b = Vec2::new(10.0, 0.0);
    let mut s = Scenario::with_defaults("head_on");
    s.seed = seed;
    s.airplanes = vec![AirplaneSpec::toward_goal(1, a, b, 0.0), AirplaneSpec::toward_goal(2, b, a, 0.0)];
    s
}

/// The blocking case study with airplane 1 biased by `b1`.
pub fn case_study_with_bias(seed: u64, b1: f64) -> Scenario {
    let p1 = Vec2::ZERO;
    let p2 = Vec2::new(CASE_STUDY_SPAN, 0.0);
    let (off1, off2) = CASE_STUDY_OFFSETS;
    let (len1, len2) = CASE_STUDY_LENGTHS;
    let g1 = p1 + Vec2::from_angle(AngleRad::wrap(off1)) * len1;
    let g2 = p2 + Vec2::from_angle(AngleRad::wrap(PI - off2)) * len2;
    let mut s = Scenario::with_defaults("case_study");
    s.seed = seed;
    s.airplanes = vec![AirplaneSpec::toward_goal(1, p1, g1, b1), AirplaneSpec::toward_goal(2, p2, g2, 0.0)];
    s
}

pub fn case_study(seed: u64) -> Scenario {
    case_study_with_bias(seed, 0.0)
}

/// Four eastbound and four northbound airplanes on a grid of lanes. Starts
/// are staggered so that every lane crossing is reached by both airplanes
/// at the same time, and each airplane meets the four crossing airplanes
/// one after another.
pub fn eight_airplanes(seed: u64) -> Scenario {
    const SPACING: f64 = 8.0;
    const LEAD: f64 = 10.0;
    let far = 3.0 * SPACING + LEAD;
    let mut airplanes = Vec::with_capacity(8);
    for k in 0..4u32 {
        let lane = SPACING * k as f64;
        let start = Vec2::new(-LEAD - lane, lane);
        airplanes.push(AirplaneSpec::toward_goal(k + 1, start, Vec2::new(far, lane), 0.0));
    }
    for k in 0..4u32 {
        let lane = SPACING * k as f64;
        let start = Vec2::new(lane, -LEAD - lane);
        airplanes.push(AirplaneSpec::toward_goal(k + 5, start, Vec2::new(lane, far), 0.0));
    }
    let mut s = Scenario::with_defaults("eight_airplanes");
    s.seed = seed;
    s.airplanes = airplanes;
    s
}

/// Looks up a reference encounter by name.
pub fn builtin(name: &str, seed: u64) -> Option<Scenario> {
    match name {
        "head_on" => Some(symmetric_head_on(seed)),
        "case_study" => Some(case_study(seed)),
        "eight_airplanes" => Some(eight_airplanes(seed)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::bearing;
    use crate::sim::{run_scenario, ModeLabel};

    #[test]
    fn builtins_are_valid() {
        for name in BUILTIN_NAMES {
            let s = builtin(name, 0).unwrap();
            s.validate().unwrap();
            assert_eq!(s.name, name);
        }
        assert!(builtin("nope", 0).is_none());
    }

    #[test]
    fn case_study_tracks_are_mirrored() {
        let s = case_study(0);
        let (a, b) = (&s.airplanes[0], &s.airplanes[1]);
        let off1 = bearing(a.start, a.goal).unwrap().diff(bearing(a.start, b.start).unwrap());
        let off2 = bearing(b.start, b.goal).unwrap().diff(bearing(b.start, a.start).unwrap());
        assert!(off1 > 0.0 && off2 < 0.0);
        // airplane 2 is nearer the crossing point of the two tracks
        let t1 = CASE_STUDY_SPAN * off2.abs().sin() / (off1 + off2.abs()).sin();
        let t2 = CASE_STUDY_SPAN * off1.sin() / (off1 + off2.abs()).sin();
        assert!(t2 < t1);
    }

    #[test]
    fn case_study_baseline_flies_side_by_side() {
        let mut s = case_study(0).baseline();
        s.noise_std = 0.0;
        let out = run_scenario(&s).unwrap();
        assert!(out.metrics.max_blocking_dwell() >= 5.0);
        assert!(out.metrics.all_reached());
        let both_blocking = out.log.steps(2).filter(|st| st.iter().all(|r| r.mode == ModeLabel::Blocking)).count();
        assert!(both_blocking as f64 * s.dt >= 5.0);
    }

    #[test]
    fn grid_starts_are_separated() {
        let s = eight_airplanes(0);
        for (i, a) in s.airplanes.iter().enumerate() {
            for b in &s.airplanes[i + 1..] {
                assert!(a.start.distance(b.start) > 3.0 * s.safety.r);
            }
        }
    }
}
