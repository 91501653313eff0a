//! Control-barrier-function safety filter for a pair of constant-speed
//! airplanes.
//!
//! The barrier is `h = ‖p_i − p_j‖² − r²`. Each airplane takes half of the
//! responsibility, which yields the per-airplane margin
//!
//! ```text
//! g(θ) = (α/2)·h + 2v·(p_i − p_j)ᵀ[cos θ, sin θ]
//! ```
//!
//! and a heading is safe iff `g(θ) ≥ 0`. Because `(p_i − p_j)ᵀ[cos θ, sin θ]`
//! is `−‖p_i − p_j‖·cos(θ − β)`, the unsafe set is the open cone
//! `|∠(θ − β)| < Δ` around the bearing `β` toward the other airplane, and the
//! minimal correction moves the heading to the nearer cone edge.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bearing, AngleRad, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyParams {
    /// Safe separation margin.
    pub r: f64,
    /// Common airspeed.
    pub v: f64,
    /// Linear class-K gain of the barrier condition.
    pub alpha_cbf: f64,
    /// Slack allowed when checking `g ≥ 0` numerically.
    pub g_tolerance: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self { r: 1.0, v: 1.0, alpha_cbf: 1.0, g_tolerance: 1e-9 }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("r", self.r), ("v", self.v), ("alpha_cbf", self.alpha_cbf)];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("safety.{name} must be > 0, got {value}")));
            }
        }
        if !(self.g_tolerance.is_finite() && self.g_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "safety.g_tolerance must be >= 0, got {}",
                self.g_tolerance
            )));
        }
        Ok(())
    }
}

/// Which side of the unsafe cone a tie (or an evasion) resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Plus,
    Minus,
}

impl Side {
    /// `+1` for non-negative values, `−1` otherwise.
    pub fn from_sign(x: f64) -> Side {
        if x < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterBranch {
    /// Desired heading already safe.
    Otherwise,
    /// Corrected to `β + Δ`.
    PlusDelta,
    /// Corrected to `β − Δ`.
    MinusDelta,
    /// Desired heading exactly on the bearing; side taken from the tie hint.
    TieBreak,
    /// Already inside the margin (`h < 0`); perpendicular escape.
    Evasion,
}

impl FilterBranch {
    pub fn token(self) -> &'static str {
        match self {
            FilterBranch::Otherwise => "otherwise",
            FilterBranch::PlusDelta => "plus_delta",
            FilterBranch::MinusDelta => "minus_delta",
            FilterBranch::TieBreak => "tie_break",
            FilterBranch::Evasion => "evasion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterResult {
    pub safe_heading: AngleRad,
    pub active: bool,
    pub branch: FilterBranch,
    /// Half-width of the unsafe cone used for this decision.
    pub delta: f64,
}

impl FilterResult {
    fn passthrough(theta_star: AngleRad, delta: f64) -> Self {
        Self { safe_heading: theta_star, active: false, branch: FilterBranch::Otherwise, delta }
    }

    /// `true` when the airplane was already inside the safe margin.
    pub fn infeasible(&self) -> bool {
        self.branch == FilterBranch::Evasion
    }
}

pub fn barrier_h(p1: Vec2, p2: Vec2, params: &SafetyParams) -> f64 {
    (p1 - p2).norm_sq() - params.r * params.r
}

pub fn margin_g(p_i: Vec2, p_j: Vec2, theta: AngleRad, params: &SafetyParams) -> Result<f64> {
    let rel = p_i - p_j;
    if rel.norm_sq() == 0.0 {
        return Err(Error::DegenerateGeometry("margin of coincident airplanes"));
    }
    let h = barrier_h(p_i, p_j, params);
    Ok(0.5 * params.alpha_cbf * h + 2.0 * params.v * rel.dot(Vec2::from_angle(theta)))
}

/// Half-width `Δ ∈ [0, π/2]` of the unsafe heading cone.
///
/// Zero while the airplanes are far enough apart that every heading is safe;
/// reaches `π/2` on the margin boundary. Inside the margin the argument is
/// clamped at zero, so the value saturates at `π/2`.
pub fn half_width_delta(p_i: Vec2, p_j: Vec2, params: &SafetyParams) -> f64 {
    let dist = p_i.distance(p_j);
    if dist == 0.0 {
        return FRAC_PI_2;
    }
    let h = barrier_h(p_i, p_j, params);
    let arg = (params.alpha_cbf * h / (4.0 * params.v * dist)).clamp(0.0, 1.0);
    arg.acos()
}

/// Closed-form minimally invasive safe heading for airplane `i` against `j`.
pub fn safety_filter(
    theta_star: AngleRad,
    p_i: Vec2,
    p_j: Vec2,
    params: &SafetyParams,
    tie_hint: Side,
) -> Result<FilterResult> {
    let beta = bearing(p_i, p_j)?;
    let h = barrier_h(p_i, p_j, params);
    if h < 0.0 {
        return Ok(FilterResult {
            safe_heading: beta.offset(tie_hint.sign() * FRAC_PI_2),
            active: true,
            branch: FilterBranch::Evasion,
            delta: FRAC_PI_2,
        });
    }
    let delta = half_width_delta(p_i, p_j, params);
    if delta == 0.0 {
        return Ok(FilterResult::passthrough(theta_star, delta));
    }
    let off = theta_star.diff(beta);
    let (safe_heading, branch) = if off == 0.0 {
        (beta.offset(tie_hint.sign() * delta), FilterBranch::TieBreak)
    } else if off > -delta && off < 0.0 {
        (beta.offset(-delta), FilterBranch::MinusDelta)
    } else if off > 0.0 && off < delta {
        (beta.offset(delta), FilterBranch::PlusDelta)
    } else {
        return Ok(FilterResult::passthrough(theta_star, delta));
    };
    Ok(FilterResult { safe_heading, active: safe_heading != theta_star, branch, delta })
}

/// Result of the brute-force reference solver.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// One minimizer, or two when both cone edges are equally close.
    pub minimizers: Vec<AngleRad>,
    /// `|∠(minimizer − θ*)|`.
    pub cost: f64,
}

/// Grid resolution of [`qp_oracle_filter`].
pub const ORACLE_GRID_STEP: f64 = 1e-4;

/// Brute-force solution of
/// `min ½·∠(θ − θ*)²  s.t.  g(θ) ≥ 0` over the circle.
///
/// Scans a uniform grid of spacing [`ORACLE_GRID_STEP`] outward from `θ*`,
/// evaluating [`margin_g`] directly, and bisects the first feasible cell on
/// each side down to the constraint boundary. It never uses `Δ`; it exists
/// to cross-check [`safety_filter`].
pub fn qp_oracle_filter(
    theta_star: AngleRad,
    p_i: Vec2,
    p_j: Vec2,
    params: &SafetyParams,
) -> Result<OracleSolution> {
    let g = |offset: f64| margin_g(p_i, p_j, theta_star.offset(offset), params);
    if g(0.0)? >= 0.0 {
        return Ok(OracleSolution { minimizers: vec![theta_star], cost: 0.0 });
    }
    let max_k = (PI / ORACLE_GRID_STEP).ceil() as usize;
    for k in 1..=max_k {
        let reach = (k as f64 * ORACLE_GRID_STEP).min(PI);
        let mut found = Vec::with_capacity(2);
        for dir in [1.0, -1.0] {
            if g(dir * reach)? >= 0.0 {
                let inner = (k - 1) as f64 * ORACLE_GRID_STEP;
                found.push(bisect_boundary(&g, dir * inner, dir * reach)?);
            }
        }
        if found.is_empty() {
            continue;
        }
        let cost = found.iter().fold(f64::INFINITY, |m, o| m.min(o.abs()));
        let minimizers = found
            .into_iter()
            .filter(|o| o.abs() <= cost + 1e-9)
            .map(|o| theta_star.offset(o))
            .collect();
        return Ok(OracleSolution { minimizers, cost });
    }
    Err(Error::OracleInfeasible)
}

/// Shrinks `[infeasible, feasible]` onto the `g = 0` crossing and returns the
/// feasible end.
fn bisect_boundary(
    g: &impl Fn(f64) -> Result<f64>,
    mut infeasible: f64,
    mut feasible: f64,
) -> Result<f64> {
    for _ in 0..60 {
        let mid = 0.5 * (infeasible + feasible);
        if g(mid)? >= 0.0 {
            feasible = mid;
        } else {
            infeasible = mid;
        }
        if (feasible - infeasible).abs() < 1e-13 {
            break;
        }
    }
    Ok(feasible)
}
