//! Closed-loop encounter simulator.
//!
//! Every step, each airplane still en route runs the same decentralized
//! pipeline against a snapshot of the world taken at the start of the step:
//!
//! 1. desired heading `θ*` toward its goal,
//! 2. threat selection (the one other airplane with the widest unsafe cone),
//! 3. intention estimate `ẑ`, attention `u`, opinion update `z`,
//! 4. opinion-guided nominal heading `θⁿ*`,
//! 5. safety filter to `θˢ*`, heading noise, kinematic step,
//! 6. flight-mode classification.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig_digits;
use crate::geom::{bearing, bearing_rate, integrate_position, AirplaneState, AngleRad, HeadingMode, Vec2};
use crate::opinion::{attention, estimate_intention, guided_heading, opinion_step, OpinionParams, OpinionState};
use crate::safety::{half_width_delta, margin_g, safety_filter, FilterBranch, SafetyParams, Side};

/// Bearing rate below which an active filter counts as blocking.
pub const EPS_BETA: f64 = 1e-3;

/// Time with zero attention after which an opinion is reset to neutral.
pub const OPINION_RESET_TIME: f64 = 1.0;

/// Relative shortfall below `r` that counts as a separation violation.
pub const VIOLATION_FRACTION: f64 = 0.01;

/// CSV header of [`TrajectoryLog::to_csv`].
pub const CSV_HEADER: &str =
    "t,id,x,y,theta,theta_star,theta_n,theta_s,z,z_est,u,delta,g,beta_dot,mode,branch,min_sep";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    #[default]
    Cruising,
    Avoiding,
    Blocking,
}

impl ModeLabel {
    pub fn token(self) -> &'static str {
        match self {
            ModeLabel::Cruising => "cruising",
            ModeLabel::Avoiding => "avoiding",
            ModeLabel::Blocking => "blocking",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirplaneSpec {
    pub id: u32,
    pub start: Vec2,
    pub heading0: AngleRad,
    pub goal: Vec2,
    pub bias: f64,
}

impl AirplaneSpec {
    /// Starts pointed at the goal.
    pub fn toward_goal(id: u32, start: Vec2, goal: Vec2, bias: f64) -> Self {
        let heading0 = desired_heading(start, goal).unwrap_or(AngleRad::ZERO);
        Self { id, start, heading0, goal, bias }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub airplanes: Vec<AirplaneSpec>,
    pub safety: SafetyParams,
    pub opinion: OpinionParams,
    pub dt: f64,
    pub t_max: f64,
    pub goal_radius: f64,
    /// Standard deviation of the per-step heading noise.
    pub noise_std: f64,
    pub seed: u64,
    pub opinion_enabled: bool,
    pub heading_mode: HeadingMode,
}

impl Scenario {
    /// Scenario with the reference parameter set and no airplanes.
    pub fn with_defaults(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            airplanes: Vec::new(),
            safety: SafetyParams::default(),
            opinion: OpinionParams::default(),
            dt: 0.01,
            t_max: 200.0,
            goal_radius: 0.1,
            noise_std: 0.1,
            seed: 0,
            opinion_enabled: true,
            heading_mode: HeadingMode::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.safety.validate()?;
        self.opinion.validate()?;
        if self.airplanes.len() < 2 {
            return Err(Error::InvalidConfig("a scenario needs at least two airplanes".into()));
        }
        for (name, value) in [("dt", self.dt), ("t_max", self.t_max), ("goal_radius", self.goal_radius)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {value}")));
            }
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise_std must be >= 0, got {}", self.noise_std)));
        }
        if let HeadingMode::Tracked { k } = self.heading_mode {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::InvalidConfig(format!("tracking gain must be > 0, got {k}")));
            }
        }
        if self.opinion_enabled && self.opinion.gain_margin() <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "k1/k2 = {} does not exceed the critical attention",
                self.opinion.peak_attention()
            )));
        }
        for (i, a) in self.airplanes.iter().enumerate() {
            if !a.start.is_finite() || !a.goal.is_finite() || !a.bias.is_finite() {
                return Err(Error::InvalidConfig(format!("airplane {} has non-finite data", a.id)));
            }
            for b in &self.airplanes[i + 1..] {
                if a.id == b.id {
                    return Err(Error::InvalidConfig(format!("duplicate airplane id {}", a.id)));
                }
                if a.start == b.start {
                    return Err(Error::InvalidConfig(format!(
                        "airplanes {} and {} share a start position",
                        a.id, b.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn baseline(&self) -> Scenario {
        Scenario { opinion_enabled: false, ..self.clone() }
    }
}

/// One airplane at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub id: u32,
    pub position: Vec2,
    pub heading: AngleRad,
    pub theta_star: AngleRad,
    pub theta_n: AngleRad,
    pub theta_s: AngleRad,
    pub z: f64,
    pub z_est: f64,
    pub u: f64,
    pub delta: f64,
    pub g: f64,
    /// Bearing rate under the headings flown into this step; drives attention.
    pub beta_dot: f64,
    /// Classified from the bearing rate the headings chosen at this step produce.
    pub mode: ModeLabel,
    pub branch: FilterBranch,
    /// Airplane the filter was applied against, when its cone was non-empty.
    pub threat: Option<u32>,
    pub arrived: bool,
    pub min_sep: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
}

impl TrajectoryLog {
    pub fn rows_for(&self, id: u32) -> impl Iterator<Item = &LogRow> + '_ {
        self.rows.iter().filter(move |r| r.id == id)
    }

    /// Rows grouped by step, in time order.
    pub fn steps(&self, n_airplanes: usize) -> impl Iterator<Item = &[LogRow]> + '_ {
        self.rows.chunks(n_airplanes.max(1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 160);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let f = |x: f64| sig_digits(x, 9);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                f(r.t),
                r.id,
                f(r.position.x),
                f(r.position.y),
                f(r.heading.value()),
                f(r.theta_star.value()),
                f(r.theta_n.value()),
                f(r.theta_s.value()),
                f(r.z),
                f(r.z_est),
                f(r.u),
                f(r.delta),
                f(r.g),
                f(r.beta_dot),
                r.mode.token(),
                r.branch.token(),
                f(r.min_sep),
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirplaneMetrics {
    pub id: u32,
    pub reached_goal: bool,
    /// Time to enter the goal radius, when reached.
    pub flight_time: Option<f64>,
    pub path_length: f64,
    /// Longest contiguous stretch spent in blocking mode.
    pub blocking_dwell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub airplanes: Vec<AirplaneMetrics>,
    pub min_separation: f64,
    /// Steps whose minimum separation fell below `(1 − VIOLATION_FRACTION)·r`.
    pub violation_count: u64,
    /// Filter evaluations that found an airplane already inside the margin.
    pub margin_breaches: u64,
    pub duration: f64,
}

impl RunMetrics {
    pub fn all_reached(&self) -> bool {
        self.airplanes.iter().all(|a| a.reached_goal)
    }

    pub fn max_blocking_dwell(&self) -> f64 {
        self.airplanes.iter().map(|a| a.blocking_dwell).fold(0.0, f64::max)
    }

    pub fn airplane(&self, id: u32) -> Option<&AirplaneMetrics> {
        self.airplanes.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub metrics: RunMetrics,
}

/// Heading from `p` straight to `goal`; `None` once there.
pub fn desired_heading(p: Vec2, goal: Vec2) -> Option<AngleRad> {
    bearing(p, goal).ok()
}

pub fn classify_mode(filter_active: bool, beta_dot: f64, eps_beta: f64) -> ModeLabel {
    if !filter_active {
        ModeLabel::Cruising
    } else if beta_dot.abs() <= eps_beta {
        ModeLabel::Blocking
    } else {
        ModeLabel::Avoiding
    }
}

/// Whether the two desired headings put both airplanes into blocking mode:
/// the offsets from the mutual bearings fall on mirrored sides of the cone.
pub fn blocking_pair_predicate(
    theta1_star: AngleRad,
    theta2_star: AngleRad,
    beta_12: AngleRad,
    beta_21: AngleRad,
    delta: f64,
) -> bool {
    let o1 = theta1_star.diff(beta_12);
    let o2 = theta2_star.diff(beta_21);
    let inside = |x: f64| (0.0..delta).contains(&x);
    [1.0, -1.0].into_iter().any(|s| inside(s * o1) && inside(-s * o2))
}

/// The other airplane with the widest unsafe cone (nearest first on ties,
/// then lowest id), or `None` when every cone is empty.
pub fn select_threat(
    own: &AirplaneState,
    others: &[&AirplaneState],
    params: &SafetyParams,
) -> Option<u32> {
    others
        .iter()
        .filter(|o| o.id != own.id)
        .map(|o| {
            let delta = half_width_delta(own.position, o.position, params);
            (delta, own.position.distance(o.position), o.id)
        })
        .filter(|(delta, _, _)| *delta > 0.0)
        .min_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.cmp(&b.2))
        })
        .map(|(_, _, id)| id)
}

/// Mutable state of a running simulation.
#[derive(Debug, Clone)]
pub struct World {
    pub t: f64,
    pub steps: u64,
    pub airplanes: Vec<AirplaneState>,
    /// Arrival time per airplane.
    pub arrived: Vec<Option<f64>>,
    /// Filtered intention estimate of the current partner, per airplane.
    pub estimates: Vec<f64>,
    partners: Vec<Option<u32>>,
    quiet_steps: Vec<u64>,
}

impl World {
    pub fn new(scenario: &Scenario) -> Self {
        let airplanes: Vec<_> = scenario
            .airplanes
            .iter()
            .map(|a| {
                let mut s = AirplaneState::new(a.id, a.start, a.heading0, a.goal);
                if let Some(th) = desired_heading(a.start, a.goal) {
                    s.desired_heading = th;
                    s.nominal_heading = th;
                }
                s
            })
            .collect();
        let arrived = airplanes
            .iter()
            .map(|a| (a.position.distance(a.goal) <= scenario.goal_radius).then_some(0.0))
            .collect();
        let n = airplanes.len();
        Self { t: 0.0, steps: 0, airplanes, arrived, estimates: vec![0.0; n], partners: vec![None; n], quiet_steps: vec![0; n] }
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.arrived[idx].is_none()
    }

    pub fn all_arrived(&self) -> bool {
        self.arrived.iter().all(Option::is_some)
    }

    /// Smallest distance between two airplanes still en route.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.airplanes.len() {
            if !self.is_active(i) {
                continue;
            }
            for j in i + 1..self.airplanes.len() {
                if self.is_active(j) {
                    best = best.min(self.airplanes[i].position.distance(self.airplanes[j].position));
                }
            }
        }
        best
    }
}

/// Seeded source of heading noise.
pub struct NoiseSource {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl NoiseSource {
    pub fn new(seed: u64, std: f64) -> Self {
        let normal = (std > 0.0).then(|| Normal::new(0.0, std).expect("finite std"));
        Self { rng: ChaCha8Rng::seed_from_u64(seed), normal }
    }

    pub fn sample(&mut self) -> f64 {
        match &self.normal {
            Some(n) => n.sample(&mut self.rng),
            None => 0.0,
        }
    }
}

/// Advances every airplane by one step from a common snapshot and returns
/// the log rows describing the decisions taken at the current time.
pub fn step_world(world: &mut World, scenario: &Scenario, noise: &mut NoiseSource) -> Result<Vec<LogRow>> {
    let snapshot = world.airplanes.clone();
    let safety = &scenario.safety;
    let v = safety.v;
    let dt = scenario.dt;
    let reset_steps = (OPINION_RESET_TIME / dt).round().max(1.0) as u64;
    let smoothing = dt / (scenario.opinion.estimate_tau + dt);
    let min_sep = world.min_separation();
    let active: Vec<&AirplaneState> =
        snapshot.iter().enumerate().filter(|(i, _)| world.is_active(*i)).map(|(_, a)| a).collect();

    let mut rows = Vec::with_capacity(snapshot.len());
    let mut next = snapshot.clone();
    let mut pending: Vec<Option<(usize, bool)>> = vec![None; snapshot.len()];
    for (i, me) in snapshot.iter().enumerate() {
        if !world.is_active(i) {
            let mut parked = me.clone();
            parked.mode = ModeLabel::Cruising;
            parked.attention = 0.0;
            rows.push(LogRow {
                t: world.t,
                id: me.id,
                position: me.position,
                heading: me.heading,
                theta_star: me.desired_heading,
                theta_n: me.nominal_heading,
                theta_s: me.safe_heading,
                z: me.opinion,
                z_est: 0.0,
                u: 0.0,
                delta: 0.0,
                g: f64::NAN,
                beta_dot: 0.0,
                mode: ModeLabel::Cruising,
                branch: FilterBranch::Otherwise,
                threat: None,
                arrived: true,
                min_sep,
            });
            next[i] = parked;
            continue;
        }

        let theta_star = desired_heading(me.position, me.goal).unwrap_or(me.safe_heading);
        let threat = select_threat(me, &active, safety);
        let partner = threat
            .and_then(|id| active.iter().find(|a| a.id == id))
            .or_else(|| {
                active
                    .iter()
                    .filter(|a| a.id != me.id)
                    .min_by(|a, b| {
                        me.position
                            .distance(a.position)
                            .total_cmp(&me.position.distance(b.position))
                            .then(a.id.cmp(&b.id))
                    })
            })
            .copied();

        let params = scenario.opinion.with_bias(scenario.airplanes[i].bias);
        let (beta, delta, beta_dot, z_est, u) = match partner {
            Some(other) => {
                let beta = bearing(me.position, other.position)
                    .map_err(|e| abort(world.t, me.id, e))?;
                let delta = half_width_delta(me.position, other.position, safety);
                let beta_dot = bearing_rate(
                    me.position,
                    other.position,
                    me.commanded_velocity(v),
                    other.commanded_velocity(v),
                )
                .map_err(|e| abort(world.t, me.id, e))?;
                let raw = estimate_intention(other.heading, other.position, me.position)
                    .map_err(|e| abort(world.t, me.id, e))?;
                let z_est = if world.partners[i] == Some(other.id) {
                    let prev = world.estimates[i];
                    prev + smoothing * (raw - prev)
                } else {
                    raw
                };
                let g_star = margin_g(me.position, other.position, theta_star, safety)
                    .map_err(|e| abort(world.t, me.id, e))?;
                (Some(beta), delta, beta_dot, z_est, attention(g_star, beta_dot, &params))
            }
            None => (None, 0.0, 0.0, 0.0, 0.0),
        };

        let mut z = 0.0;
        if scenario.opinion_enabled {
            world.quiet_steps[i] = if u == 0.0 { world.quiet_steps[i] + 1 } else { 0 };
            z = opinion_step(OpinionState { z: me.opinion, z_other_est: z_est, u }, &params, dt).z;
            if world.quiet_steps[i] >= reset_steps {
                z = 0.0;
            }
        }

        let theta_n = match beta {
            Some(beta) if scenario.opinion_enabled => guided_heading(theta_star, beta, z, params.k_z),
            _ => theta_star,
        };

        let filtered = match partner {
            Some(other) => safety_filter(theta_n, me.position, other.position, safety, Side::from_sign(z))
                .map_err(|e| abort(world.t, me.id, e))?,
            None => crate::safety::FilterResult {
                safe_heading: theta_n,
                active: false,
                branch: FilterBranch::Otherwise,
                delta: 0.0,
            },
        };
        let g = match partner {
            Some(other) => margin_g(me.position, other.position, filtered.safe_heading, safety)
                .map_err(|e| abort(world.t, me.id, e))?,
            None => f64::NAN,
        };

        let command = filtered.safe_heading.offset(noise.sample());
        let mut moved = integrate_position(me, command, dt, v, scenario.heading_mode);
        moved.desired_heading = theta_star;
        moved.nominal_heading = theta_n;
        moved.safe_heading = filtered.safe_heading;
        moved.opinion = z;
        moved.attention = u;

        if !moved.position.is_finite() || !moved.heading.value().is_finite() || !z.is_finite() {
            return Err(Error::SimulationAborted {
                t: world.t,
                id: me.id,
                reason: "non-finite state".into(),
            });
        }

        if let Some(other) = partner {
            let j = snapshot.iter().position(|a| a.id == other.id).expect("partner is in the snapshot");
            pending[i] = Some((j, filtered.active));
        }
        world.estimates[i] = z_est;
        world.partners[i] = partner.map(|p| p.id);
        rows.push(LogRow {
            t: world.t,
            id: me.id,
            position: me.position,
            heading: me.heading,
            theta_star,
            theta_n,
            theta_s: filtered.safe_heading,
            z,
            z_est,
            u,
            delta,
            g,
            beta_dot,
            mode: ModeLabel::Cruising,
            branch: filtered.branch,
            threat: threat.filter(|_| delta > 0.0),
            arrived: false,
            min_sep,
        });
        next[i] = moved;
    }

    // Modes need every airplane's decision at this step.
    for (i, entry) in pending.iter().enumerate() {
        let Some((j, active)) = *entry else { continue };
        let rate = bearing_rate(
            snapshot[i].position,
            snapshot[j].position,
            next[i].commanded_velocity(v),
            next[j].commanded_velocity(v),
        )
        .map_err(|e| abort(world.t, snapshot[i].id, e))?;
        let mode = classify_mode(active, rate, EPS_BETA);
        next[i].mode = mode;
        rows[i].mode = mode;
    }

    world.steps += 1;
    world.t = world.steps as f64 * dt;
    for (i, a) in next.iter().enumerate() {
        if world.arrived[i].is_none() && a.position.distance(a.goal) <= scenario.goal_radius {
            world.arrived[i] = Some(world.t);
        }
    }
    world.airplanes = next;
    Ok(rows)
}

fn abort(t: f64, id: u32, e: Error) -> Error {
    Error::SimulationAborted { t, id, reason: e.to_string() }
}

/// Runs a scenario until every airplane has arrived or `t_max` elapses.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let n = scenario.airplanes.len();
    let mut world = World::new(scenario);
    let mut noise = NoiseSource::new(scenario.seed, scenario.noise_std);
    let max_steps = (scenario.t_max / scenario.dt).ceil() as u64;
    let violation_floor = (1.0 - VIOLATION_FRACTION) * scenario.safety.r;

    let mut log = TrajectoryLog::default();
    let mut path = vec![0.0; n];
    let mut dwell = vec![0.0f64; n];
    let mut longest = vec![0.0f64; n];
    let mut min_separation = f64::INFINITY;
    let mut violation_count = 0;
    let mut margin_breaches = 0;

    while !world.all_arrived() && world.steps < max_steps {
        let before: Vec<Vec2> = world.airplanes.iter().map(|a| a.position).collect();
        let rows = step_world(&mut world, scenario, &mut noise)?;
        let sep = rows[0].min_sep;
        min_separation = min_separation.min(sep);
        if sep < violation_floor {
            violation_count += 1;
        }
        for (i, row) in rows.iter().enumerate() {
            path[i] += before[i].distance(world.airplanes[i].position);
            if row.branch == FilterBranch::Evasion {
                margin_breaches += 1;
            }
            if row.mode == ModeLabel::Blocking {
                dwell[i] += scenario.dt;
                longest[i] = longest[i].max(dwell[i]);
            } else {
                dwell[i] = 0.0;
            }
        }
        log.rows.extend(rows);
    }
    let final_sep = world.min_separation();
    min_separation = min_separation.min(final_sep);
    if final_sep < violation_floor {
        violation_count += 1;
    }

    let airplanes = world
        .airplanes
        .iter()
        .enumerate()
        .map(|(i, a)| AirplaneMetrics {
            id: a.id,
            reached_goal: world.arrived[i].is_some(),
            flight_time: world.arrived[i],
            path_length: path[i],
            blocking_dwell: longest[i],
        })
        .collect();
    Ok(RunOutput {
        log,
        metrics: RunMetrics { airplanes, min_separation, violation_count, margin_breaches, duration: world.t },
    })
}

/// Net rotation (unwrapped, radians) of the bearing from airplane `a` to
/// airplane `b` over the logged run. Negative means the pair swapped
/// clockwise.
pub fn bearing_sweep(log: &TrajectoryLog, a: u32, b: u32) -> f64 {
    let pa = log.rows_for(a).map(|r| r.position);
    let pb = log.rows_for(b).map(|r| r.position);
    let mut total = 0.0;
    let mut prev: Option<AngleRad> = None;
    for (p, q) in pa.zip(pb) {
        if let Ok(beta) = bearing(p, q) {
            if let Some(last) = prev {
                total += beta.diff(last);
            }
            prev = Some(beta);
        }
    }
    total
}

/// The opinion of `id` at its largest magnitude over the run, i.e. the side
/// it committed to. Zero if it never formed an opinion.
pub fn committed_opinion(log: &TrajectoryLog, id: u32) -> f64 {
    log.rows_for(id).map(|r| r.z).fold(0.0, |best, z| if z.abs() > best.abs() { z } else { best })
}
