//! Time stepping: staggered passes within a step, commits, cutbacks.

use super::linear::ReusableSolver;
use super::phasefield::PhaseFieldSystem;
use super::{LoadProgram, SolverConfig, StepRecord};
use crate::assembly::{
    assemble_momentum, external_traction, ip_phase_field, Constraints, Discretization, Dynamics,
    MomentumAssembly, MomentumOptions, SparsePattern, SystemVectors, IPS_PER_ELEMENT,
};
use crate::constitutive::{
    return_map, surface_excess, update_history, Criterion, IpState, MaterialParams,
};
use crate::error::SolverError;
use crate::mesh::Mesh;
use crate::sim::crack_length;

/// Displacement, velocity and acceleration at the start of a step.
#[derive(Clone, Debug)]
pub(super) struct Kinematics {
    pub u: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
}

/// Running extremes of the quantities the committed states must keep in
/// range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport {
    pub steps_checked: usize,
    /// Integration points whose committed history decreased.
    pub history_decreases: usize,
    pub phi_min: f64,
    pub phi_max: f64,
    /// Largest `gₐ·σ − d·sₐ − κ_t K λₐ` over committed states, divided by f_t.
    pub max_surface_excess: f64,
    pub min_eigenstrain_trace: f64,
}

impl Default for InvariantReport {
    fn default() -> Self {
        InvariantReport {
            steps_checked: 0,
            history_decreases: 0,
            phi_min: 0.0,
            phi_max: 0.0,
            max_surface_excess: f64::NEG_INFINITY,
            min_eigenstrain_trace: f64::INFINITY,
        }
    }
}

impl InvariantReport {
    pub const PHI_SLACK: f64 = 1e-6;
    pub const SURFACE_SLACK: f64 = 1e-8;

    pub fn phi_in_range(&self) -> bool {
        self.phi_min >= 0.0 && self.phi_max <= 1.0 + Self::PHI_SLACK
    }

    pub fn admissible(&self) -> bool {
        self.max_surface_excess <= Self::SURFACE_SLACK
    }

    pub fn holds(&self) -> bool {
        self.history_decreases == 0 && self.phi_in_range() && self.admissible()
    }
}

fn linf(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let scale = linf(new.iter().copied());
    let diff = linf(new.iter().zip(old).map(|(a, b)| a - b));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// A running simulation: discretization, committed state, and the reusable
/// solver storage.
pub struct Simulation {
    pub disc: Discretization,
    pub params: MaterialParams,
    pub config: SolverConfig,
    pub program: LoadProgram,
    pub state: SystemVectors,
    pub ip_states: Vec<IpState>,
    pub time: f64,
    pub step: usize,
    pub invariants: InvariantReport,
    pub(super) constraints_template: Constraints,
    pub(super) free: Vec<usize>,
    pub(super) pattern: SparsePattern,
    pub(super) assembly: MomentumAssembly,
    pub(super) u_solver: ReusableSolver,
    pub(super) external_force: Vec<f64>,
    phase: PhaseFieldSystem,
    reaction_dofs: Vec<usize>,
    /// Static elastic displacement rate for the prescribed boundary rates,
    /// used to predict each increment.
    unit_response: Option<Vec<f64>>,
}

impl Simulation {
    pub fn new(
        mesh: Mesh,
        params: MaterialParams,
        config: SolverConfig,
        program: LoadProgram,
    ) -> Result<Self, crate::Error> {
        params.validate()?;
        config.validate()?;
        mesh.validate()?;
        let disc = Discretization::new(mesh)?;
        let constraints_template = constraints_at(&disc, &program, 0.0)?;
        let (to_free, free) = constraints_template.free_numbering(disc.dofs.n_u());
        let dofs: Vec<usize> = disc
            .mesh
            .elements
            .iter()
            .flat_map(|el| disc.dofs.element_u_dofs(el).map(|d| to_free[d]))
            .collect();
        let pattern = SparsePattern::build(free.len(), 18, &dofs);
        let assembly = MomentumAssembly::new(
            &disc,
            &pattern,
            params.criterion == Criterion::DruckerPrager,
        );
        let mut external_force = vec![0.0; disc.dofs.n_u()];
        for t in &program.tractions {
            external_traction(
                &disc.mesh,
                &disc.dofs,
                &t.set,
                t.traction,
                &mut external_force,
            )?;
        }
        let reaction_dofs = match &program.reaction {
            Some((set, c)) => crate::assembly::set_dofs(&disc.mesh, &disc.dofs, set, *c)?,
            None => Vec::new(),
        };
        log::info!(
            "{} elements, {} nodes, {} free displacement dofs, {} nonzeros",
            disc.mesh.element_count(),
            disc.mesh.node_count(),
            free.len(),
            pattern.nnz()
        );
        Ok(Simulation {
            state: SystemVectors::zeros(&disc.dofs),
            ip_states: vec![IpState::default(); disc.ip_count()],
            phase: PhaseFieldSystem::new(&disc),
            disc,
            params,
            config,
            program,
            time: 0.0,
            step: 0,
            invariants: InvariantReport::default(),
            constraints_template,
            free,
            pattern,
            assembly,
            u_solver: ReusableSolver::new(),
            external_force,
            reaction_dofs,
            unit_response: None,
        })
        .and_then(|mut sim: Simulation| {
            sim.unit_response = sim.elastic_unit_response()?;
            Ok(sim)
        })
    }

    /// Elastic static response to the boundary rates over one second,
    /// computed at a tiny amplitude so that every point stays elastic.
    fn elastic_unit_response(&mut self) -> Result<Option<Vec<f64>>, SolverError> {
        let max_rate = self
            .program
            .dirichlet
            .iter()
            .fold(0.0f64, |m, d| m.max(d.rate.abs()));
        if max_rate == 0.0 {
            return Ok(None);
        }
        let scale = 1e-9 / max_rate;
        let mut state = SystemVectors::zeros(&self.disc.dofs);
        constraints_at(&self.disc, &self.program, scale)?.impose(&mut state.u);
        let options = MomentumOptions {
            dynamics: None,
            projected: self.params.criterion == Criterion::DruckerPrager,
        };
        assemble_momentum(
            &mut self.assembly,
            &self.disc,
            &self.pattern,
            &state,
            &self.params,
            &self.ip_states,
            &options,
        )?;
        let rhs: Vec<f64> = self
            .free
            .iter()
            .map(|&d| -self.assembly.residual[d])
            .collect();
        let du = self
            .u_solver
            .solve(&self.assembly.matrix, &self.assembly.matrix, true, &rhs)?;
        for (i, &d) in self.free.iter().enumerate() {
            state.u[d] = du[i];
        }
        Ok(Some(state.u.iter().map(|v| v / scale).collect()))
    }

    /// Total reaction (including inertia) on the monitored set, N/m.
    pub fn reaction(&self) -> f64 {
        self.reaction_dofs
            .iter()
            .map(|&d| self.assembly.residual[d] - self.external_force[d])
            .sum()
    }

    pub fn crack_length(&self) -> f64 {
        crack_length(&self.disc, &self.state.phi, &self.params)
    }

    /// Advances one step of `config.dt`, cutting the increment back on
    /// failure. On abort the last committed state is kept.
    pub fn advance(&mut self) -> Result<StepRecord, SolverError> {
        let target = (self.step + 1) as f64 * self.config.dt;
        let mut h = self.config.dt;
        let mut cutbacks = 0;
        let (mut passes, mut iterations) = (0, 0);
        while self.time < target {
            // the last sub-increment lands exactly on the target time
            let remaining = target - self.time;
            let t_new = if h >= remaining * (1.0 - 1e-9) {
                target
            } else {
                self.time + h
            };
            let saved = (self.state.clone(), self.ip_states.clone(), self.invariants);
            match self.attempt(t_new) {
                Ok((p, it)) => {
                    passes = passes.max(p);
                    iterations += it;
                }
                Err(e) => {
                    (self.state, self.ip_states, self.invariants) = saved;
                    self.u_solver.invalidate();
                    if cutbacks >= self.config.max_cutbacks {
                        return Err(SolverError::Aborted {
                            time: t_new,
                            cutbacks,
                            reason: e.to_string(),
                        });
                    }
                    cutbacks += 1;
                    h *= self.config.cutback_factor;
                    log::warn!("step {} cut back to dt = {h:.3e} s: {e}", self.step + 1);
                }
            }
        }
        self.step += 1;
        Ok(StepRecord {
            step: self.step,
            time: self.time,
            applied: self.program.applied(self.time),
            reaction: self.reaction(),
            passes,
            newton_iterations: iterations,
            cutbacks,
            crack_length: self.crack_length(),
        })
    }

    /// One increment from the committed time to `t_new`, committed on
    /// success. Returns `(passes, Newton iterations)`.
    fn attempt(&mut self, t_new: f64) -> Result<(usize, usize), SolverError> {
        let h = t_new - self.time;
        let dynamics = self.dynamics(h);
        let constraints = constraints_at(&self.disc, &self.program, t_new)?;
        let old = Kinematics {
            u: self.state.u.clone(),
            velocity: self.state.velocity.clone(),
            acceleration: self.state.acceleration.clone(),
        };
        if let Some(unit) = &self.unit_response {
            for (u, r) in self.state.u.iter_mut().zip(unit) {
                *u += h * r;
            }
        }
        let mut drive: Vec<f64> = self.ip_states.iter().map(|s| s.history).collect();
        let mut phi_newton = self.state.phi.clone();
        let mut iterations = 0;
        let mut passes = 0;
        while passes < self.config.max_passes {
            passes += 1;
            let u_prev = self.state.u.clone();
            phi_newton.clone_from(&self.state.phi);
            iterations += self.newton_displacement(&constraints, &old, h, &dynamics)?;
            let trial: Vec<f64> = self
                .assembly
                .ips
                .iter()
                .zip(&self.ip_states)
                .map(|(r, s)| update_history(s.history, r.driving_force))
                .collect();
            let phi_change = if trial != drive {
                let phi = self.phase.solve(&self.disc, &trial, &self.params)?;
                let change = relative_change(&phi, &self.state.phi);
                self.state.phi = phi;
                drive = trial;
                change
            } else {
                0.0
            };
            let u_change = if passes == 1 {
                0.0
            } else {
                relative_change(&self.state.u, &u_prev)
            };
            log::debug!("pass {passes}: Δu {u_change:.2e}, Δφ {phi_change:.2e}");
            if phi_change <= self.config.stagger_tol && u_change <= self.config.stagger_tol {
                break;
            }
        }
        self.commit(t_new, &phi_newton);
        Ok((passes, iterations))
    }

    /// Newmark coefficients for an increment `h`.
    pub(super) fn dynamics(&self, h: f64) -> Dynamics {
        let (beta, gamma) = (self.config.newmark_beta, self.config.newmark_gamma);
        let (rho, c) = (self.params.density, self.params.damping);
        Dynamics {
            mass: rho / (beta * h * h),
            damping: rho * c * gamma / (beta * h),
            density: rho,
            damping_density: rho * c,
        }
    }

    fn commit(&mut self, t_new: f64, phi_newton: &[f64]) {
        let mut report = self.invariants;
        for (s, r) in self.ip_states.iter_mut().zip(&self.assembly.ips) {
            let old = s.history;
            s.update_history(r.driving_force);
            if s.history < old {
                report.history_decreases += 1;
            }
            s.warm_start = r.multipliers;
            report.min_eigenstrain_trace = report.min_eigenstrain_trace.min(r.eigenstrain.trace());
        }
        for &p in &self.state.phi {
            report.phi_min = report.phi_min.min(p);
            report.phi_max = report.phi_max.max(p);
        }
        if self.config.check_admissibility {
            let phi_ip = ip_phase_field(&self.disc, phi_newton);
            let f_t = self.params.tensile_strength;
            for e in 0..self.disc.mesh.element_count() {
                for ip in 0..IPS_PER_ELEMENT {
                    let k = e * IPS_PER_ELEMENT + ip;
                    let eps = self.disc.strain_at_ip(e, &self.state.u, ip);
                    // the state was accepted by the Newton solve, so the return map succeeds
                    if let Ok(r) = return_map(&self.params, &eps, phi_ip[k], &self.ip_states[k]) {
                        let excess = surface_excess(&self.params, &eps, phi_ip[k], &r) / f_t;
                        report.max_surface_excess = report.max_surface_excess.max(excess);
                    }
                }
            }
        }
        report.steps_checked += 1;
        self.invariants = report;
        self.time = t_new;
    }
}

pub(super) fn constraints_at(
    disc: &Discretization,
    program: &LoadProgram,
    time: f64,
) -> Result<Constraints, SolverError> {
    let mut c = Constraints::new();
    for d in &program.dirichlet {
        c.apply_dirichlet(&disc.mesh, &disc.dofs, &d.set, d.component, d.rate * time)?;
    }
    Ok(c)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mesh::generate_plate_with_hole;
    use crate::solver::{DirichletCondition, TractionCondition};

    pub(crate) fn tension(rate: f64) -> LoadProgram {
        let bc = |set: &str, component, rate| DirichletCondition {
            set: set.into(),
            component,
            rate,
        };
        LoadProgram {
            dirichlet: vec![
                bc("bottom", 0, 0.0),
                bc("bottom", 1, 0.0),
                bc("top", 1, rate),
            ],
            tractions: Vec::new(),
            reaction: Some(("top".into(), 1)),
        }
    }

    pub(crate) fn plate(dx: f64, rate: f64, dt: f64) -> Simulation {
        let config = SolverConfig {
            dt,
            ..SolverConfig::default()
        };
        Simulation::new(
            generate_plate_with_hole(dx).unwrap(),
            MaterialParams::default(),
            config,
            tension(rate),
        )
        .unwrap()
    }

    #[test]
    fn elastic_step_is_one_pass_one_iteration() {
        let mut sim = plate(0.08, 3e-6, 1.0);
        let rec = sim.advance().unwrap();
        assert_eq!(rec.passes, 1);
        assert_eq!(rec.newton_iterations, 1);
        assert!(sim.state.phi.iter().all(|&p| p == 0.0));
        assert!(rec.reaction > 0.0);
        assert_eq!(rec.applied, 3e-6);
        assert!(sim.invariants.holds());
    }

    #[test]
    fn zero_rate_gives_zero_reaction() {
        let mut sim = plate(0.08, 0.0, 1.0);
        for _ in 0..3 {
            let rec = sim.advance().unwrap();
            assert_eq!(rec.reaction, 0.0);
            assert_eq!(rec.newton_iterations, 0);
        }
    }

    #[test]
    fn records_are_deterministic() {
        let run = || {
            let mut sim = plate(0.08, 3e-5, 1.0);
            (0..3).map(|_| sim.advance().unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn traction_loading_balances_in_the_mean() {
        let program = LoadProgram {
            dirichlet: Vec::new(),
            tractions: vec![
                TractionCondition {
                    set: "top".into(),
                    traction: [0.0, 1e6],
                },
                TractionCondition {
                    set: "bottom".into(),
                    traction: [0.0, -1e6],
                },
            ],
            reaction: None,
        };
        let params = MaterialParams {
            damping: 0.0,
            ..MaterialParams::default()
        };
        let config = SolverConfig {
            dt: 1e-5,
            ..SolverConfig::default()
        };
        let mut sim = Simulation::new(
            generate_plate_with_hole(0.08).unwrap(),
            params,
            config,
            program,
        )
        .unwrap();
        for _ in 0..3 {
            sim.advance().unwrap();
        }
        // symmetric loading: no net momentum
        let vy: f64 = (0..sim.disc.mesh.node_count())
            .map(|n| sim.state.velocity[2 * n + 1])
            .sum();
        let vmax = linf(sim.state.velocity.iter().copied());
        assert!(vmax > 0.0);
        assert!(vy.abs() < 1e-6 * vmax * sim.disc.mesh.node_count() as f64);
    }
}
