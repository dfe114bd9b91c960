//! Newmark time stepping, the Newton solve for displacements, the linear
//! phase-field solve, and the multi-pass staggered scheme that couples them.

mod linear;
mod newton;
mod phasefield;
mod staggered;

pub use linear::{linear_solve, LinearStats, ReusableSolver};
pub use phasefield::{solve_phasefield, PhaseFieldSystem};
pub use staggered::{InvariantReport, Simulation};

use crate::error::ConfigError;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub newmark_beta: f64,
    pub newmark_gamma: f64,
    pub max_passes: usize,
    /// Relative residual tolerance of the Newton solve.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Relative L∞ change of u and φ between passes.
    pub stagger_tol: f64,
    /// s
    pub dt: f64,
    pub n_steps: usize,
    pub cutback_factor: f64,
    pub max_cutbacks: usize,
    /// Re-run the return map on committed states to check admissibility.
    pub check_admissibility: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newmark_beta: 0.5625,
            newmark_gamma: 1.0,
            max_passes: 5,
            newton_tol: 1e-8,
            newton_max_iter: 25,
            stagger_tol: 1e-6,
            dt: 1.0,
            n_steps: 200,
            cutback_factor: 0.5,
            max_cutbacks: 8,
            check_admissibility: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("newmark_beta", self.newmark_beta),
            ("newmark_gamma", self.newmark_gamma),
            ("newton_tol", self.newton_tol),
            ("stagger_tol", self.stagger_tol),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.cutback_factor > 0.0 && self.cutback_factor < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "cutback_factor must lie in (0, 1), got {}",
                self.cutback_factor
            )));
        }
        if self.max_passes == 0 || self.newton_max_iter == 0 {
            return Err(ConfigError::Invalid(
                "max_passes and newton_max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One committed time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// s
    pub time: f64,
    /// Driven displacement (m) or applied traction (Pa).
    pub applied: f64,
    /// Sum of nodal reactions on the monitored set, N/m.
    pub reaction: f64,
    pub passes: usize,
    pub newton_iterations: usize,
    /// Number of times the step was cut back before it converged.
    pub cutbacks: usize,
    /// m
    pub crack_length: f64,
}

/// Prescribed displacement `rate · t` on one component of a boundary set.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletCondition {
    pub set: String,
    pub component: usize,
    /// m/s
    pub rate: f64,
}

/// Constant traction on the edges of a boundary set, applied from `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TractionCondition {
    pub set: String,
    /// Pa
    pub traction: [f64; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadProgram {
    pub dirichlet: Vec<DirichletCondition>,
    pub tractions: Vec<TractionCondition>,
    /// Set and component whose reaction is recorded.
    pub reaction: Option<(String, usize)>,
}

impl LoadProgram {
    /// The driven displacement at `time` (first non-zero rate), otherwise
    /// the magnitude of the first traction.
    pub fn applied(&self, time: f64) -> f64 {
        if let Some(d) = self.dirichlet.iter().find(|d| d.rate != 0.0) {
            return d.rate * time;
        }
        self.tractions
            .first()
            .map_or(0.0, |t| t.traction[0].hypot(t.traction[1]))
    }
}

/// Newmark update of the rates for a new displacement:
/// `ü = (u − u₀ − Δt u̇₀ − Δt²(½−β) ü₀)/(β Δt²)`, `u̇ = u̇₀ + Δt((1−γ) ü₀ + γ ü)`.
#[allow(clippy::too_many_arguments)]
pub fn newmark_update(
    u_new: &[f64],
    u_old: &[f64],
    velocity_old: &[f64],
    acceleration_old: &[f64],
    dt: f64,
    beta: f64,
    gamma: f64,
    velocity: &mut [f64],
    acceleration: &mut [f64],
) {
    let c = 1.0 / (beta * dt * dt);
    for i in 0..u_new.len() {
        let a = c
            * (u_new[i]
                - u_old[i]
                - dt * velocity_old[i]
                - dt * dt * (0.5 - beta) * acceleration_old[i]);
        acceleration[i] = a;
        velocity[i] = velocity_old[i] + dt * ((1.0 - gamma) * acceleration_old[i] + gamma * a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn update(u: f64, u0: f64, v0: f64, a0: f64, dt: f64, beta: f64, gamma: f64) -> (f64, f64) {
        let (mut v, mut a) = ([0.0], [0.0]);
        newmark_update(&[u], &[u0], &[v0], &[a0], dt, beta, gamma, &mut v, &mut a);
        (v[0], a[0])
    }

    #[test]
    fn constant_velocity_has_no_acceleration() {
        let (v, a) = update(1.0 + 2.0 * 0.1, 1.0, 2.0, 0.0, 0.1, 0.5625, 1.0);
        assert!(a.abs() < 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rest_stays_at_rest() {
        assert_eq!(update(0.3, 0.3, 0.0, 0.0, 1e-5, 0.5625, 1.0), (0.0, 0.0));
    }

    #[test]
    fn trapezoidal_rule_is_exact_for_constant_acceleration() {
        // u(t) = u0 + v0 t + a t²/2
        let (u0, v0, acc, dt) = (0.2, -1.5, 3.0, 0.05);
        let u = u0 + v0 * dt + 0.5 * acc * dt * dt;
        let (v, a) = update(u, u0, v0, acc, dt, 0.25, 0.5);
        assert!((a - acc).abs() < 1e-10);
        assert!((v - (v0 + acc * dt)).abs() < 1e-12);
    }

    #[test]
    fn defaults() {
        let c = SolverConfig::default();
        assert_eq!(
            (c.newmark_beta, c.newmark_gamma, c.max_passes),
            (0.5625, 1.0, 5)
        );
        assert_eq!(
            (c.newton_tol, c.newton_max_iter, c.stagger_tol),
            (1e-8, 25, 1e-6)
        );
        assert_eq!((c.cutback_factor, c.max_cutbacks), (0.5, 8));
        c.validate().unwrap();
        assert!(SolverConfig {
            dt: 0.0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            cutback_factor: 1.0,
            ..c
        }
        .validate()
        .is_err());
    }
}
