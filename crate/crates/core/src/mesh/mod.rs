//! 9-node quadrilateral meshes of the benchmark geometries.

mod element;
mod generators;
mod io;

pub use element::{
    gauss_1d, global_gradients, lagrange_1d, quadrature, shape_eval, QuadratureRule, EDGES,
    LOCAL_NODES, NODES_PER_ELEMENT,
};
pub use generators::{
    generate_dynamic_plate, generate_plate_with_hole, generate_sent, HOLE_CENTRE, HOLE_RADIUS,
};

use std::collections::BTreeMap;

use crate::error::MeshError;

/// Named boundary set: its nodes (sorted, unique) and the element edges
/// lying on it as (corner, mid, corner).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundarySet {
    pub nodes: Vec<usize>,
    pub edges: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 9]>,
    pub boundary_sets: BTreeMap<String, BoundarySet>,
    /// Nominal element edge length, m.
    pub characteristic_size: f64,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 9] {
        self.elements[e].map(|n| self.nodes[n])
    }

    pub fn set(&self, name: &str) -> Option<&BoundarySet> {
        self.boundary_sets.get(name)
    }

    /// Area of one element by 3×3 Gauss quadrature.
    pub fn element_area(&self, e: usize) -> f64 {
        let coords = self.element_coords(e);
        let q = quadrature(3).expect("order 3 is supported");
        q.points
            .iter()
            .zip(&q.weights)
            .map(|(p, w)| {
                let (_, dn) = shape_eval(*p);
                global_gradients(&coords, &dn).0 * w
            })
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.element_count())
            .map(|e| self.element_area(e))
            .sum()
    }

    /// Checks connectivity ranges, boundary-set references and positive
    /// Jacobians at all 3×3 quadrature points.
    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.nodes.len();
        if let Some(e) = self
            .elements
            .iter()
            .position(|el| el.iter().any(|&i| i >= n))
        {
            return Err(MeshError::Geometry(format!(
                "element {e} references a missing node"
            )));
        }
        for (name, set) in &self.boundary_sets {
            let bad = set
                .nodes
                .iter()
                .chain(set.edges.iter().flatten())
                .any(|&i| i >= n);
            if bad {
                return Err(MeshError::Geometry(format!(
                    "boundary set `{name}` references a missing node"
                )));
            }
        }
        let q = quadrature(3)?;
        for e in 0..self.elements.len() {
            let coords = self.element_coords(e);
            for p in &q.points {
                let (_, dn) = shape_eval(*p);
                let (det, _) = global_gradients(&coords, &dn);
                if !(det > 0.0) {
                    return Err(MeshError::InvertedElement { element: e, det });
                }
            }
        }
        Ok(())
    }

    /// Builds a boundary set from every element edge whose three nodes
    /// satisfy `on`. Nodes of those edges form the node set.
    pub(crate) fn collect_edges(&self, on: impl Fn([f64; 2]) -> bool) -> BoundarySet {
        let mut edges = Vec::new();
        for el in &self.elements {
            for edge in EDGES {
                let ids = edge.map(|k| el[k]);
                if ids.iter().all(|&i| on(self.nodes[i])) {
                    edges.push(ids);
                }
            }
        }
        let mut nodes: Vec<usize> = edges.iter().flatten().copied().collect();
        nodes.sort_unstable();
        nodes.dedup();
        BoundarySet { nodes, edges }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_element() -> Mesh {
        let nodes = LOCAL_NODES
            .iter()
            .map(|p| [0.5 * (p[0] + 1.0), 0.5 * (p[1] + 1.0)])
            .collect();
        let mut mesh = Mesh {
            nodes,
            elements: vec![[0, 1, 2, 3, 4, 5, 6, 7, 8]],
            boundary_sets: BTreeMap::new(),
            characteristic_size: 1.0,
        };
        let bottom = mesh.collect_edges(|p| p[1] == 0.0);
        mesh.boundary_sets.insert("bottom".into(), bottom);
        mesh
    }

    #[test]
    fn single_element_checks() {
        let mesh = unit_element();
        mesh.validate().unwrap();
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
        let bottom = mesh.set("bottom").unwrap();
        assert_eq!(bottom.edges, vec![[0, 4, 1]]);
        assert_eq!(bottom.nodes, vec![0, 1, 4]);
    }

    #[test]
    fn inverted_element_is_rejected() {
        let mut mesh = unit_element();
        mesh.elements[0] = [1, 0, 3, 2, 4, 7, 6, 5, 8];
        assert!(matches!(
            mesh.validate(),
            Err(MeshError::InvertedElement { element: 0, .. })
        ));
        let mut mesh = unit_element();
        mesh.elements[0][8] = 99;
        assert!(mesh.validate().is_err());
    }
}
