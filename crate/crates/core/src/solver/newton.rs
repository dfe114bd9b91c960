//! Newton iteration for the momentum balance on the free displacement dofs.

use super::newmark_update;
use super::staggered::{Kinematics, Simulation};
use crate::assembly::{assemble_momentum, Constraints, Dynamics, MomentumOptions};
use crate::constitutive::Criterion;
use crate::error::SolverError;

/// Smallest line-search step before a trial is accepted regardless.
const MIN_STEP: f64 = 1.0 / 64.0;
/// An iteration that does not halve the residual counts as stalled.
const STALL: f64 = 0.5;
/// Consecutive stalled iterations before switching to the projected matrix.
const STALLS_BEFORE_PROJECTION: usize = 3;
/// A full projected step may raise the residual up to this multiple of the
/// smallest one seen in the solve.
const PROJECTED_GROWTH: f64 = 10.0;

fn l2(it: impl Iterator<Item = f64>) -> f64 {
    it.map(|v| v * v).sum::<f64>().sqrt()
}

impl Simulation {
    pub(super) fn assemble_at(
        &mut self,
        old: &Kinematics,
        h: f64,
        dynamics: &Dynamics,
    ) -> Result<(), SolverError> {
        let (beta, gamma) = (self.config.newmark_beta, self.config.newmark_gamma);
        newmark_update(
            &self.state.u,
            &old.u,
            &old.velocity,
            &old.acceleration,
            h,
            beta,
            gamma,
            &mut self.state.velocity,
            &mut self.state.acceleration,
        );
        let options = MomentumOptions {
            dynamics: Some(*dynamics),
            projected: self.params.criterion == Criterion::DruckerPrager,
        };
        assemble_momentum(
            &mut self.assembly,
            &self.disc,
            &self.pattern,
            &self.state,
            &self.params,
            &self.ip_states,
            &options,
        )?;
        Ok(())
    }

    /// `(‖R_free‖, max(‖f_ext‖, ‖R_constrained‖))` with `R = f_int + inertia − f_ext`.
    pub(super) fn residual_norms(&self) -> (f64, f64) {
        let r = |d: usize| self.assembly.residual[d] - self.external_force[d];
        let free = l2(self.free.iter().map(|&d| r(d)));
        let constrained = l2(self.constraints_template.iter().map(|(d, _)| r(d)));
        (
            free,
            constrained.max(l2(self.external_force.iter().copied())),
        )
    }

    /// Solves for `state.u` with φ held fixed. Constrained dofs must already
    /// carry their prescribed values. Returns the number of linear solves.
    ///
    /// With a DP criterion, ips near the tr ε = 0 branch switch can make the
    /// exact tangent cycle. After a few iterations that fail to halve the
    /// residual, iterations take full steps on the symmetric projected matrix
    /// until the residual halves again.
    pub(super) fn newton_displacement(
        &mut self,
        constraints: &Constraints,
        old: &Kinematics,
        h: f64,
        dynamics: &Dynamics,
    ) -> Result<usize, SolverError> {
        constraints.impose(&mut self.state.u);
        self.assemble_at(old, h, dynamics)?;
        let (mut norm, mut load) = self.residual_norms();
        let initial = norm;
        let tol = self.config.newton_tol;
        let mut previous = f64::INFINITY;
        let mut best = norm;
        let mut stalls = 0;
        for it in 0..self.config.newton_max_iter {
            log::trace!(
                "Newton {it}: residual {norm:.3e}, reference {:.3e}",
                initial.max(load)
            );
            if norm <= tol * initial.max(load) {
                return Ok(it);
            }
            stalls = if norm > STALL * previous {
                stalls + 1
            } else {
                0
            };
            previous = norm;
            let rhs: Vec<f64> = self
                .free
                .iter()
                .map(|&d| self.external_force[d] - self.assembly.residual[d])
                .collect();
            let (du, projected_step) = match self.assembly.projected.as_ref() {
                Some(p) if stalls >= STALLS_BEFORE_PROJECTION => {
                    (self.u_solver.solve(p, p, true, &rhs)?, true)
                }
                Some(p) => (
                    self.u_solver.solve(&self.assembly.matrix, p, true, &rhs)?,
                    false,
                ),
                None => (
                    self.u_solver.solve(
                        &self.assembly.matrix,
                        &self.assembly.matrix,
                        true,
                        &rhs,
                    )?,
                    false,
                ),
            };
            let base: Vec<f64> = self.free.iter().map(|&d| self.state.u[d]).collect();
            let mut step = 1.0;
            loop {
                for (i, &d) in self.free.iter().enumerate() {
                    self.state.u[d] = base[i] + step * du[i];
                }
                let trial = self
                    .assemble_at(old, h, dynamics)
                    .map(|_| self.residual_norms());
                match trial {
                    Ok((n, l))
                        if n < norm
                            || step <= MIN_STEP
                            || (projected_step && step == 1.0 && n < PROJECTED_GROWTH * best) =>
                    {
                        norm = n;
                        load = l;
                        best = best.min(n);
                        break;
                    }
                    Err(e) if step <= MIN_STEP => return Err(e),
                    _ => step *= 0.5,
                }
            }
            if step < 1.0 {
                log::debug!("line search step {step} at Newton iteration {}", it + 1);
            }
        }
        if norm <= tol * initial.max(load) {
            return Ok(self.config.newton_max_iter);
        }
        Err(SolverError::NewtonNotConverged {
            iterations: self.config.newton_max_iter,
            ratio: norm / initial.max(load).max(f64::MIN_POSITIVE),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::staggered::{constraints_at, tests::plate};
    use super::*;

    #[test]
    fn converged_residual_survives_reassembly() {
        let mut sim = plate(0.08, 3e-6, 1.0);
        let n = sim.state.u.len();
        let old = Kinematics {
            u: vec![0.0; n],
            velocity: vec![0.0; n],
            acceleration: vec![0.0; n],
        };
        let dynamics = sim.dynamics(1.0);
        let constraints = constraints_at(&sim.disc, &sim.program, 1.0).unwrap();
        let its = sim
            .newton_displacement(&constraints, &old, 1.0, &dynamics)
            .unwrap();
        assert_eq!(its, 1);
        let u = sim.state.u.clone();
        let mut fresh = plate(0.08, 3e-6, 1.0);
        fresh.state.u = u;
        fresh.assemble_at(&old, 1.0, &dynamics).unwrap();
        let (norm, load) = fresh.residual_norms();
        assert!(load > 0.0);
        assert!(
            norm <= 2.0 * sim.config.newton_tol * load,
            "{norm} vs {load}"
        );
    }
}
