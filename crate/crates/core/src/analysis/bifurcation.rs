//! Equilibria of the two-agent opinion field and their continuation in the
//! shared attention `u`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::sig_digits;
use crate::opinion::OpinionParams;

/// Grid of Newton starting points per axis.
const GRID: usize = 21;
const MAX_NEWTON_ITERS: usize = 500;
/// Roots closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-6;
/// Largest accepted residual `‖f(z)‖`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// `żᵢ = −d·zᵢ + u·tanh(a_self·zᵢ + γ·zⱼ + bᵢ)` for two agents sharing `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAgentField {
    pub d: f64,
    pub a_self: f64,
    pub gamma: f64,
    pub bias: [f64; 2],
}

impl TwoAgentField {
    /// The symmetric reduction with `a_self = γ = κ` and no bias.
    pub fn symmetric(d: f64, kappa: f64) -> Self {
        Self { d, a_self: kappa, gamma: kappa, bias: [0.0, 0.0] }
    }

    /// Both agents with the same parameters and bias.
    pub fn from_params(p: &OpinionParams) -> Self {
        Self { d: p.d, a_self: p.a_self, gamma: p.gamma, bias: [p.bias, p.bias] }
    }

    fn args(&self, z: [f64; 2]) -> [f64; 2] {
        [
            self.a_self * z[0] + self.gamma * z[1] + self.bias[0],
            self.a_self * z[1] + self.gamma * z[0] + self.bias[1],
        ]
    }

    pub fn eval(&self, u: f64, z: [f64; 2]) -> [f64; 2] {
        let s = self.args(z);
        [-self.d * z[0] + u * s[0].tanh(), -self.d * z[1] + u * s[1].tanh()]
    }

    pub fn jacobian(&self, u: f64, z: [f64; 2]) -> [[f64; 2]; 2] {
        let s = self.args(z);
        let (g0, g1) = (sech2(s[0]), sech2(s[1]));
        [
            [-self.d + u * self.a_self * g0, u * self.gamma * g0],
            [u * self.gamma * g1, -self.d + u * self.a_self * g1],
        ]
    }

    fn validate(&self, u: f64) -> Result<()> {
        if !(u.is_finite() && u >= 0.0) {
            return Err(Error::Domain(format!("attention u must be >= 0, got {u}")));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::Domain(format!("damping d must be > 0, got {}", self.d)));
        }
        if !(self.a_self.is_finite() && self.gamma.is_finite() && self.bias.iter().all(|b| b.is_finite())) {
            return Err(Error::Domain("field gains must be finite".into()));
        }
        Ok(())
    }

    /// All equilibria at attention `u`, found by damped Newton from a dense
    /// grid of starts and sorted by `(z1, z2)`.
    pub fn equilibria(&self, u: f64) -> Result<Vec<Equilibrium>> {
        self.validate(u)?;
        // |z| ≤ u/d at any equilibrium, so this box contains them all.
        let half = u / self.d + 1.0;
        let mut found: Vec<[f64; 2]> = Vec::new();
        for i in 0..GRID {
            for j in 0..GRID {
                let start = [grid_point(i, half), grid_point(j, half)];
                let Some(root) = self.newton(u, start) else { continue };
                if !found.iter().any(|r| dist(*r, root) < DEDUP_TOL) {
                    found.push(root);
                }
            }
        }
        if found.is_empty() {
            return Err(Error::NoEquilibria { u });
        }
        found.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        Ok(found
            .into_iter()
            .map(|z| {
                let residual = norm(self.eval(u, z));
                Equilibrium { z1: z[0], z2: z[1], stable: max_real_eigen(self.jacobian(u, z)) < 0.0, residual }
            })
            .collect())
    }

    fn newton(&self, u: f64, start: [f64; 2]) -> Option<[f64; 2]> {
        let mut z = start;
        let mut fz = self.eval(u, z);
        for _ in 0..MAX_NEWTON_ITERS {
            let [[a, b], [c, d]] = self.jacobian(u, z);
            let det = a * d - b * c;
            if det.abs() < 1e-300 || !det.is_finite() {
                return None;
            }
            let step = [(d * fz[0] - b * fz[1]) / det, (a * fz[1] - c * fz[0]) / det];
            let mut lambda = 1.0;
            let current = norm(fz);
            let (next, f_next) = loop {
                let trial = [z[0] - lambda * step[0], z[1] - lambda * step[1]];
                let f_trial = self.eval(u, trial);
                if norm(f_trial) < current || lambda < 1e-6 {
                    break (trial, f_trial);
                }
                lambda *= 0.5;
            };
            let moved = dist(next, z);
            z = next;
            fz = f_next;
            // Degenerate roots converge only linearly; keep going until the
            // iterate stops moving rather than stopping at the residual.
            if moved <= 1e-15 * (1.0 + norm(z)) {
                break;
            }
        }
        (norm(fz) <= RESIDUAL_TOL && z.iter().all(|x| x.is_finite())).then_some(z)
    }
}

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    if c.is_finite() {
        1.0 / (c * c)
    } else {
        0.0
    }
}

fn grid_point(i: usize, half: f64) -> f64 {
    -half + 2.0 * half * i as f64 / (GRID - 1) as f64
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Largest real part among the eigenvalues of a 2×2 matrix.
pub fn max_real_eigen(m: [[f64; 2]; 2]) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        0.5 * (tr + disc.sqrt())
    } else {
        0.5 * tr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub z1: f64,
    pub z2: f64,
    pub stable: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub u: f64,
    pub equilibria: Vec<Equilibrium>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationSweep {
    pub points: Vec<BifurcationPoint>,
    /// First swept `u` with more than one equilibrium.
    pub critical_u: Option<f64>,
}

impl BifurcationSweep {
    /// One `u,z1,z2,stable` row per equilibrium.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,z1,z2,stable\n");
        for p in &self.points {
            for e in &p.equilibria {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    sig_digits(p.u, 9),
                    sig_digits(e.z1, 9),
                    sig_digits(e.z2, 9),
                    e.stable
                ));
            }
        }
        out
    }
}

/// Equilibria of the symmetric reduction (`a_self = γ = κ`, no bias).
pub fn find_equilibria(u: f64, d: f64, kappa: f64) -> Result<Vec<Equilibrium>> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be > 0, got {kappa}")));
    }
    TwoAgentField::symmetric(d, kappa).equilibria(u)
}

/// Equilibria at `steps` evenly spaced attentions over `[u_min, u_max]`.
pub fn bifurcation_sweep(field: &TwoAgentField, u_min: f64, u_max: f64, steps: usize) -> Result<BifurcationSweep> {
    if steps < 2 {
        return Err(Error::Domain(format!("a sweep needs at least 2 steps, got {steps}")));
    }
    if !(0.0..=5.0).contains(&u_min) || !(0.0..=5.0).contains(&u_max) || u_min >= u_max {
        return Err(Error::Domain(format!("sweep range [{u_min}, {u_max}] must lie in [0, 5] and be increasing")));
    }
    let mut points = Vec::with_capacity(steps);
    for k in 0..steps {
        let u = u_min + (u_max - u_min) * k as f64 / (steps - 1) as f64;
        points.push(BifurcationPoint { u, equilibria: field.equilibria(u)? });
    }
    let critical_u = points.iter().find(|p| p.equilibria.len() > 1).map(|p| p.u);
    Ok(BifurcationSweep { points, critical_u })
}
