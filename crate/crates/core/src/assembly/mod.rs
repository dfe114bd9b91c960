//! Element integrals, boundary conditions and global assembly for the
//! momentum and phase-field systems (plane strain).

mod boundary;
mod element;
mod global;
mod sparse;

pub use boundary::{external_traction, set_dofs, Constraints};
pub use element::{
    element_mass, momentum_element, phasefield_element, stress_divergence_matrix, Dynamics,
    IpResult, MomentumElement,
};
pub use global::{
    assemble_momentum, assemble_phasefield, ip_phase_field, MomentumAssembly, MomentumOptions,
};
pub use sparse::{CscMatrix, SparsePattern};

use crate::error::MeshError;
use crate::mesh::{global_gradients, quadrature, shape_eval, Mesh};
use crate::tensor::{SymTensor6, SQRT_2};

/// Integration points per element (3×3 Gauss).
pub const IPS_PER_ELEMENT: usize = 9;
pub const U_DOFS_PER_ELEMENT: usize = 18;

/// Global numbering: displacement dof `2·node + component`, phase-field dof
/// `node`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofMap {
    n_nodes: usize,
}

impl DofMap {
    pub fn new(n_nodes: usize) -> Self {
        DofMap { n_nodes }
    }

    pub fn u(&self, node: usize, component: usize) -> usize {
        debug_assert!(node < self.n_nodes && component < 2);
        2 * node + component
    }

    pub fn phi(&self, node: usize) -> usize {
        node
    }

    pub fn n_u(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn n_phi(&self) -> usize {
        self.n_nodes
    }

    pub fn element_u_dofs(&self, element: &[usize; 9]) -> [usize; 18] {
        let mut out = [0; 18];
        for (k, &n) in element.iter().enumerate() {
            out[2 * k] = self.u(n, 0);
            out[2 * k + 1] = self.u(n, 1);
        }
        out
    }
}

/// Nodal fields: displacement, velocity, acceleration (interleaved x/y per
/// node) and the phase field.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemVectors {
    pub u: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SystemVectors {
    pub fn zeros(dofs: &DofMap) -> Self {
        SystemVectors {
            u: vec![0.0; dofs.n_u()],
            velocity: vec![0.0; dofs.n_u()],
            acceleration: vec![0.0; dofs.n_u()],
            phi: vec![0.0; dofs.n_phi()],
        }
    }
}

/// Shape data at one integration point in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IpGeometry {
    /// `det J · w`
    pub dv: f64,
    pub n: [f64; 9],
    /// `[∂N/∂x, ∂N/∂y]`
    pub grad: [[f64; 2]; 9],
    pub position: [f64; 2],
}

pub type ElementGeometry = [IpGeometry; IPS_PER_ELEMENT];

/// Shape data of all elements at their 3×3 Gauss points.
pub fn element_geometry(
    coords: &[[f64; 2]; 9],
    element: usize,
) -> Result<ElementGeometry, MeshError> {
    let q = quadrature(3)?;
    let mut out = [IpGeometry {
        dv: 0.0,
        n: [0.0; 9],
        grad: [[0.0; 2]; 9],
        position: [0.0; 2],
    }; IPS_PER_ELEMENT];
    for (ip, (p, w)) in q.points.iter().zip(&q.weights).enumerate() {
        let (n, dn) = shape_eval(*p);
        let (det, grad) = global_gradients(coords, &dn);
        if !(det > 0.0) {
            return Err(MeshError::InvertedElement { element, det });
        }
        let mut position = [0.0; 2];
        for (ni, x) in n.iter().zip(coords) {
            position[0] += ni * x[0];
            position[1] += ni * x[1];
        }
        out[ip] = IpGeometry {
            dv: det * w,
            n,
            grad,
            position,
        };
    }
    Ok(out)
}

/// A mesh with its dof numbering and precomputed element geometry.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub geometry: Vec<ElementGeometry>,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Result<Self, MeshError> {
        let geometry = (0..mesh.element_count())
            .map(|e| element_geometry(&mesh.element_coords(e), e))
            .collect::<Result<_, _>>()?;
        Ok(Discretization {
            dofs: DofMap::new(mesh.node_count()),
            mesh,
            geometry,
        })
    }

    pub fn ip_count(&self) -> usize {
        self.geometry.len() * IPS_PER_ELEMENT
    }

    pub fn gather_u(&self, e: usize, field: &[f64]) -> [f64; 18] {
        let el = &self.mesh.elements[e];
        let mut out = [0.0; 18];
        for (k, &n) in el.iter().enumerate() {
            out[2 * k] = field[2 * n];
            out[2 * k + 1] = field[2 * n + 1];
        }
        out
    }

    pub fn gather_phi(&self, e: usize, phi: &[f64]) -> [f64; 9] {
        self.mesh.elements[e].map(|n| phi[n])
    }

    /// Total strain at integration point `ip` of element `e`.
    pub fn strain_at_ip(&self, e: usize, u: &[f64], ip: usize) -> SymTensor6 {
        strain_at_ip(&self.geometry[e][ip], &self.gather_u(e, u))
    }
}

/// Plane-strain Mandel strain `(xx, yy, 0, 0, 0, √2·xy)` from element
/// displacements.
pub fn strain_at_ip(geom: &IpGeometry, u_el: &[f64; 18]) -> SymTensor6 {
    let (mut xx, mut yy, mut gamma) = (0.0, 0.0, 0.0);
    for (k, g) in geom.grad.iter().enumerate() {
        let (ux, uy) = (u_el[2 * k], u_el[2 * k + 1]);
        xx += g[0] * ux;
        yy += g[1] * uy;
        gamma += g[1] * ux + g[0] * uy;
    }
    SymTensor6([xx, yy, 0.0, 0.0, 0.0, gamma / SQRT_2])
}
