use super::linear::ReusableSolver;
use crate::assembly::{assemble_phasefield, CscMatrix, Discretization, SparsePattern};
use crate::constitutive::MaterialParams;
use crate::error::SolverError;

/// Phase-field matrix storage and a solver that is reused across solves.
pub struct PhaseFieldSystem {
    pattern: SparsePattern,
    matrix: CscMatrix,
    rhs: Vec<f64>,
    solver: ReusableSolver,
}

impl PhaseFieldSystem {
    pub fn new(disc: &Discretization) -> Self {
        let dofs: Vec<usize> = disc
            .mesh
            .elements
            .iter()
            .flat_map(|el| el.iter().copied())
            .collect();
        let pattern = SparsePattern::build(disc.dofs.n_phi(), 9, &dofs);
        let matrix = pattern.zero_matrix();
        PhaseFieldSystem {
            rhs: vec![0.0; pattern.n],
            pattern,
            matrix,
            solver: ReusableSolver::new(),
        }
    }

    /// φ for the per-ip driving force `history` (≥ 0).
    pub fn solve(
        &mut self,
        disc: &Discretization,
        history: &[f64],
        params: &MaterialParams,
    ) -> Result<Vec<f64>, SolverError> {
        assemble_phasefield(
            disc,
            &self.pattern,
            history,
            params,
            &mut self.matrix,
            &mut self.rhs,
        );
        if self.rhs.iter().all(|&f| f == 0.0) {
            return Ok(vec![0.0; self.rhs.len()]);
        }
        self.solver
            .solve(&self.matrix, &self.matrix, true, &self.rhs)
    }

    pub fn stats(&self) -> super::LinearStats {
        self.solver.stats
    }
}

/// One-off phase-field solve.
pub fn solve_phasefield(
    disc: &Discretization,
    history: &[f64],
    params: &MaterialParams,
) -> Result<Vec<f64>, SolverError> {
    PhaseFieldSystem::new(disc).solve(disc, history, params)
}
