use std::collections::BTreeMap;

use super::sparse::EXCLUDED;
use super::DofMap;
use crate::error::AssemblyError;
use crate::mesh::{gauss_1d, lagrange_1d, Mesh};

/// Displacement dofs of a boundary set for one component.
pub fn set_dofs(
    mesh: &Mesh,
    dofs: &DofMap,
    set: &str,
    component: usize,
) -> Result<Vec<usize>, AssemblyError> {
    let s = mesh
        .set(set)
        .ok_or_else(|| AssemblyError::UnknownSet(set.to_string()))?;
    Ok(s.nodes.iter().map(|&n| dofs.u(n, component)).collect())
}

/// Prescribed displacement values, keyed by global dof. Constrained dofs
/// are eliminated from the linear systems; their residual entries are the
/// reactions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prescribes `value` on `component` of every node in `set`, replacing
    /// earlier values on the same dofs. Returns the number of dofs touched.
    pub fn apply_dirichlet(
        &mut self,
        mesh: &Mesh,
        dofs: &DofMap,
        set: &str,
        component: usize,
        value: f64,
    ) -> Result<usize, AssemblyError> {
        let ids = set_dofs(mesh, dofs, set, component)?;
        if ids.is_empty() {
            log::warn!("Dirichlet condition on empty set `{set}` ignored");
        }
        for &d in &ids {
            self.values.insert(d, value);
        }
        Ok(ids.len())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.values.contains_key(&dof)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }

    /// Writes the prescribed values into `u`.
    pub fn impose(&self, u: &mut [f64]) {
        for (&d, &v) in &self.values {
            u[d] = v;
        }
    }

    /// `(global → free index or EXCLUDED, free → global)` for `n` dofs.
    pub fn free_numbering(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        let mut to_free = vec![EXCLUDED; n];
        let mut free = Vec::with_capacity(n - self.values.len());
        for (d, slot) in to_free.iter_mut().enumerate() {
            if !self.values.contains_key(&d) {
                *slot = free.len();
                free.push(d);
            }
        }
        (to_free, free)
    }
}

/// Adds the consistent nodal forces `∫ Nᵀ τ dΓ` of a constant traction `τ`
/// (Pa) on the edges of `set` to `f`.
pub fn external_traction(
    mesh: &Mesh,
    dofs: &DofMap,
    set: &str,
    traction: [f64; 2],
    f: &mut [f64],
) -> Result<(), AssemblyError> {
    let s = mesh
        .set(set)
        .ok_or_else(|| AssemblyError::UnknownSet(set.to_string()))?;
    if s.edges.is_empty() {
        return Err(AssemblyError::NotAnEdgeSet(set.to_string()));
    }
    if traction == [0.0, 0.0] {
        return Ok(());
    }
    let (points, weights) = gauss_1d(3).expect("order 3 is supported");
    for edge in &s.edges {
        // edge nodes ordered (corner, mid, corner) ↔ local (−1, 0, 1)
        let x = edge.map(|n| mesh.nodes[n]);
        for (t, w) in points.iter().zip(&weights) {
            let (n, dn) = lagrange_1d(*t);
            let dx: f64 = (0..3).map(|k| dn[k] * x[k][0]).sum();
            let dy: f64 = (0..3).map(|k| dn[k] * x[k][1]).sum();
            let jac = dx.hypot(dy);
            for (k, &node) in edge.iter().enumerate() {
                for c in 0..2 {
                    f[dofs.u(node, c)] += n[k] * traction[c] * jac * w;
                }
            }
        }
    }
    Ok(())
}
