//! Sparse direct factorizations (faer) and a preconditioned GMRES that
//! reuses a factorization across Newton iterations.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Side};

use crate::assembly::CscMatrix;
use crate::error::SolverError;

fn as_faer(m: &CscMatrix) -> SparseColMatRef<'_, usize, f64> {
    let sym = SymbolicSparseColMatRef::new_checked(m.n, m.n, &m.col_ptr, None, &m.row_idx);
    SparseColMatRef::new(sym, &m.values)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residual(a: &CscMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut ax = vec![0.0; a.n];
    a.matvec(x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

enum Factor {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

impl Factor {
    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = match self {
            Factor::Llt(f) => f.solve(&b),
            Factor::Lu(f) => f.solve(&b),
        };
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

/// Symbolic analyses are computed once per sparsity pattern and reused.
#[derive(Default)]
struct Symbolic {
    llt: Option<SymbolicLlt<usize>>,
    lu: Option<SymbolicLu<usize>>,
}

impl Symbolic {
    fn llt(&mut self, m: &CscMatrix) -> Result<Factor, SolverError> {
        if self.llt.is_none() {
            let s = SymbolicLlt::try_new(as_faer(m).symbolic(), Side::Lower)
                .map_err(|e| SolverError::Linear(format!("symbolic Cholesky: {e:?}")))?;
            self.llt = Some(s);
        }
        let sym = self.llt.clone().expect("set above");
        Llt::try_new_with_symbolic(sym, as_faer(m), Side::Lower)
            .map(Factor::Llt)
            .map_err(|e| SolverError::Singular(format!("Cholesky failed: {e:?}")))
    }

    fn lu(&mut self, m: &CscMatrix) -> Result<Factor, SolverError> {
        if self.lu.is_none() {
            let s = SymbolicLu::try_new(as_faer(m).symbolic())
                .map_err(|e| SolverError::Linear(format!("symbolic LU: {e:?}")))?;
            self.lu = Some(s);
        }
        let sym = self.lu.clone().expect("set above");
        Lu::try_new_with_symbolic(sym, as_faer(m))
            .map(Factor::Lu)
            .map_err(|e| SolverError::Singular(format!("LU failed: {e:?}")))
    }
}

/// Direct LU solve with a residual check (`‖Ax − b‖/‖b‖ ≤ 1e-10`).
pub fn linear_solve(matrix: &CscMatrix, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    if rhs.len() != matrix.n {
        return Err(SolverError::Linear(format!(
            "rhs length {} for a {}×{} matrix",
            rhs.len(),
            matrix.n,
            matrix.n
        )));
    }
    let factor = Symbolic::default().lu(matrix)?;
    let x = factor.apply(rhs);
    let res = relative_residual(matrix, &x, rhs);
    if x.iter().any(|v| !v.is_finite()) || !(res <= 1e-10) {
        return Err(SolverError::Singular(format!(
            "relative residual {res:.3e} after LU"
        )));
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LinearStats {
    pub solves: usize,
    pub factorizations: usize,
    pub krylov_iterations: usize,
}

/// Right-preconditioned restarted GMRES. `precondition` applies an
/// approximate inverse. Returns the iteration count, or `None` if the
/// relative residual did not reach `tol` within `max_iterations`.
fn gmres(
    a: &CscMatrix,
    precondition: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iterations: usize,
) -> Option<usize> {
    let n = a.n;
    let nb = norm(b);
    if nb == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Some(0);
    }
    let mut total = 0;
    let mut w = vec![0.0; n];
    loop {
        a.matvec(x, &mut w);
        let r: Vec<f64> = b.iter().zip(&w).map(|(bi, wi)| bi - wi).collect();
        let beta = norm(&r);
        if beta <= tol * nb {
            return Some(total);
        }
        if total >= max_iterations {
            return None;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h: Vec<Vec<f64>> = Vec::new(); // column j has j + 2 entries
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut k = 0;
        while k < restart && total < max_iterations {
            let zk = precondition(&v[k]);
            a.matvec(&zk, &mut w);
            z.push(zk);
            let mut hk = vec![0.0; k + 2];
            for (i, vi) in v.iter().enumerate() {
                hk[i] = dot(&w, vi);
                for (wj, vij) in w.iter_mut().zip(vi) {
                    *wj -= hk[i] * vij;
                }
            }
            hk[k + 1] = norm(&w);
            for i in 0..k {
                let t = cs[i] * hk[i] + sn[i] * hk[i + 1];
                hk[i + 1] = -sn[i] * hk[i] + cs[i] * hk[i + 1];
                hk[i] = t;
            }
            let rho = hk[k].hypot(hk[k + 1]);
            let (c, s) = if rho == 0.0 {
                (1.0, 0.0)
            } else {
                (hk[k] / rho, hk[k + 1] / rho)
            };
            let next_v: Vec<f64> = if hk[k + 1] > 0.0 {
                w.iter().map(|wi| wi / hk[k + 1]).collect()
            } else {
                vec![0.0; n]
            };
            hk[k] = rho;
            hk[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[k]);
            g[k] *= c;
            h.push(hk);
            v.push(next_v);
            k += 1;
            total += 1;
            if g[k].abs() <= 0.5 * tol * nb {
                break;
            }
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (zi, yi) in z.iter().zip(&y) {
            for (xj, zij) in x.iter_mut().zip(zi) {
                *xj += yi * zij;
            }
        }
    }
}

/// Solver for a sequence of related systems with a fixed sparsity pattern.
///
/// A factorization of the preconditioning matrix is kept and reused as a
/// GMRES preconditioner until GMRES starts to need many iterations; then it
/// is refreshed. Cholesky is used when the preconditioning matrix is
/// symmetric positive definite, LU otherwise.
pub struct ReusableSolver {
    symbolic: Symbolic,
    factor: Option<Factor>,
    stale: bool,
    pub tolerance: f64,
    /// Refactor before the next solve if GMRES needed more than this.
    pub refactor_after: usize,
    pub max_iterations: usize,
    pub stats: LinearStats,
}

impl Default for ReusableSolver {
    fn default() -> Self {
        ReusableSolver {
            symbolic: Symbolic::default(),
            factor: None,
            stale: false,
            tolerance: 1e-11,
            refactor_after: 12,
            max_iterations: 60,
            stats: LinearStats::default(),
        }
    }
}

impl ReusableSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops the cached factorization (the symbolic analysis is kept).
    pub fn invalidate(&mut self) {
        self.factor = None;
    }

    fn factorize(&mut self, m: &CscMatrix, spd: bool) -> Result<(), SolverError> {
        self.stats.factorizations += 1;
        let f = if spd {
            match self.symbolic.llt(m) {
                Ok(f) => f,
                Err(e) => {
                    log::debug!("{e}; falling back to LU");
                    self.symbolic.lu(m)?
                }
            }
        } else {
            self.symbolic.lu(m)?
        };
        self.factor = Some(f);
        self.stale = false;
        Ok(())
    }

    /// Solves `a x = b`. `preconditioner` is the matrix to factor (it may be
    /// `a` itself) and `spd` says whether Cholesky may be tried on it.
    pub fn solve(
        &mut self,
        a: &CscMatrix,
        preconditioner: &CscMatrix,
        spd: bool,
        b: &[f64],
    ) -> Result<Vec<f64>, SolverError> {
        self.stats.solves += 1;
        if self.factor.is_none() || self.stale {
            self.factorize(preconditioner, spd)?;
        }
        let mut x = vec![0.0; a.n];
        if let Some(it) = self.run_gmres(a, b, &mut x) {
            self.stale = it > self.refactor_after;
            return Ok(x);
        }
        // the cached factorization is too far off: refresh it, and if the
        // preconditioning matrix itself is not good enough, factor `a`
        log::debug!("GMRES stalled with a reused factorization; refactoring");
        self.factorize(preconditioner, spd)?;
        x.iter_mut().for_each(|v| *v = 0.0);
        if let Some(it) = self.run_gmres(a, b, &mut x) {
            self.stale = it > self.refactor_after;
            return Ok(x);
        }
        self.factorize(a, false)?;
        x.iter_mut().for_each(|v| *v = 0.0);
        match self.run_gmres(a, b, &mut x) {
            Some(_) => {
                // a factorization of `a` is not a good preconditioner for
                // the next (different) matrix in general
                self.stale = true;
                Ok(x)
            }
            None => Err(SolverError::Linear(format!(
                "GMRES did not reach relative residual {:.1e} even with an exact factorization",
                self.tolerance
            ))),
        }
    }

    fn run_gmres(&mut self, a: &CscMatrix, b: &[f64], x: &mut [f64]) -> Option<usize> {
        let factor = self.factor.as_ref().expect("factorized");
        let pre = |r: &[f64]| factor.apply(r);
        let it = gmres(a, &pre, b, x, self.tolerance, 30, self.max_iterations);
        if let Some(it) = it {
            self.stats.krylov_iterations += it;
        }
        it
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, shift: f64) -> CscMatrix {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            2.0 + shift
                        } else if i.abs_diff(j) == 1 {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        CscMatrix::from_dense(&a)
    }

    #[test]
    fn identity_returns_rhs() {
        let a = CscMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(linear_solve(&a, &[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
    }

    #[test]
    fn small_spd_system() {
        let a = CscMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let x = linear_solve(&a, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15 && (x[1] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CscMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            linear_solve(&a, &[1.0, 2.0]),
            Err(SolverError::Singular(_))
        ));
    }

    #[test]
    fn reused_factorization_with_gmres() {
        let a0 = laplacian(200, 1.0);
        let b: Vec<f64> = (0..200).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let mut s = ReusableSolver::new();
        let x = s.solve(&a0, &a0, true, &b).unwrap();
        assert!(relative_residual(&a0, &x, &b) <= 1e-10);
        // perturbed, non-symmetric matrix preconditioned by the old factor
        let mut a1 = a0.clone();
        for j in 0..a1.n {
            for p in a1.col_ptr[j]..a1.col_ptr[j + 1] {
                if a1.row_idx[p] == j + 1 {
                    a1.values[p] *= 1.05;
                }
            }
        }
        let x = s.solve(&a1, &a1, false, &b).unwrap();
        assert!(relative_residual(&a1, &x, &b) <= 1e-10);
        assert_eq!(s.stats.factorizations, 1);
        assert!(s.stats.krylov_iterations > 1);
    }

    #[test]
    fn gmres_is_deterministic() {
        let a = laplacian(100, 0.5);
        let b: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let run = || {
            let mut s = ReusableSolver::new();
            s.solve(&a, &a, true, &b).unwrap()
        };
        assert_eq!(run(), run());
    }
}
