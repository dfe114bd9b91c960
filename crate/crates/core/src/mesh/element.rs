//! Biquadratic Lagrange element on the biunit square and Gauss quadrature.
//!
//! Local node numbering: corners counter-clockwise from (−1,−1), then the
//! mid-edge nodes of edges 0–1, 1–2, 2–3, 3–0, then the centre.

use crate::error::MeshError;

pub const NODES_PER_ELEMENT: usize = 9;

/// Local coordinates of the nine nodes.
pub const LOCAL_NODES: [[f64; 2]; 9] = [
    [-1.0, -1.0],
    [1.0, -1.0],
    [1.0, 1.0],
    [-1.0, 1.0],
    [0.0, -1.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [-1.0, 0.0],
    [0.0, 0.0],
];

/// Element edges as (corner, mid, corner), counter-clockwise.
pub const EDGES: [[usize; 3]; 4] = [[0, 4, 1], [1, 5, 2], [2, 6, 3], [3, 7, 0]];

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// 1D Gauss–Legendre points and weights on [−1, 1].
pub fn gauss_1d(order: usize) -> Result<(Vec<f64>, Vec<f64>), MeshError> {
    match order {
        2 => {
            let p = 1.0 / 3f64.sqrt();
            Ok((vec![-p, p], vec![1.0, 1.0]))
        }
        3 => {
            let p = (0.6f64).sqrt();
            Ok((vec![-p, 0.0, p], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]))
        }
        other => Err(MeshError::QuadratureOrder(other)),
    }
}

/// Tensor-product Gauss rule on the biunit square; ξ varies fastest.
pub fn quadrature(order: usize) -> Result<QuadratureRule, MeshError> {
    let (p, w) = gauss_1d(order)?;
    let mut points = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for (eta, w_eta) in p.iter().zip(&w) {
        for (xi, w_xi) in p.iter().zip(&w) {
            points.push([*xi, *eta]);
            weights.push(w_xi * w_eta);
        }
    }
    Ok(QuadratureRule { points, weights })
}

/// 1D quadratic Lagrange basis on nodes (−1, 0, 1) and its derivative.
pub fn lagrange_1d(x: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)],
        [x - 0.5, -2.0 * x, x + 0.5],
    )
}

/// Position of a local node coordinate (−1, 0, 1) in the 1D basis.
fn slot(c: f64) -> usize {
    if c < -0.5 {
        0
    } else if c > 0.5 {
        2
    } else {
        1
    }
}

/// Shape functions and their local derivatives `[∂/∂ξ, ∂/∂η]`.
pub fn shape_eval(local: [f64; 2]) -> ([f64; 9], [[f64; 2]; 9]) {
    let (nx, dx) = lagrange_1d(local[0]);
    let (ny, dy) = lagrange_1d(local[1]);
    let mut n = [0.0; 9];
    let mut dn = [[0.0; 2]; 9];
    for (k, node) in LOCAL_NODES.iter().enumerate() {
        let (i, j) = (slot(node[0]), slot(node[1]));
        n[k] = nx[i] * ny[j];
        dn[k] = [dx[i] * ny[j], nx[i] * dy[j]];
    }
    (n, dn)
}

/// Isoparametric map at a point: returns `det J` and the global shape
/// gradients `[∂N/∂x, ∂N/∂y]`.
pub fn global_gradients(coords: &[[f64; 2]; 9], dn: &[[f64; 2]; 9]) -> (f64, [[f64; 2]; 9]) {
    // J = [[∂x/∂ξ, ∂x/∂η], [∂y/∂ξ, ∂y/∂η]]
    let mut j = [[0.0; 2]; 2];
    for (x, d) in coords.iter().zip(dn) {
        j[0][0] += x[0] * d[0];
        j[0][1] += x[0] * d[1];
        j[1][0] += x[1] * d[0];
        j[1][1] += x[1] * d[1];
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [
        [j[1][1] / det, -j[0][1] / det],
        [-j[1][0] / det, j[0][0] / det],
    ];
    let mut out = [[0.0; 2]; 9];
    for (o, d) in out.iter_mut().zip(dn) {
        // ∂N/∂x = ∂N/∂ξ ∂ξ/∂x + ∂N/∂η ∂η/∂x
        o[0] = d[0] * inv[0][0] + d[1] * inv[1][0];
        o[1] = d[0] * inv[0][1] + d[1] * inv[1][1];
    }
    (det, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_sum_to_four() {
        for order in [2, 3] {
            let q = quadrature(order).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 4.0).abs() < 1e-14);
        }
        assert_eq!(quadrature(4), Err(MeshError::QuadratureOrder(4)));
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let q = quadrature(3).unwrap();
        let integrate = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            q.points
                .iter()
                .zip(&q.weights)
                .map(|(p, w)| w * f(p[0], p[1]))
                .sum()
        };
        assert!((integrate(&|x, y| x * x * y * y) - 4.0 / 9.0).abs() < 1e-15);
        // ∫x^a dx over [−1,1] is 2/(a+1) for even a, 0 for odd a
        let mono = |a: i32| {
            if a % 2 == 0 {
                2.0 / (a as f64 + 1.0)
            } else {
                0.0
            }
        };
        for a in 0..=5 {
            for b in 0..=5 {
                let exact = mono(a) * mono(b);
                let got = integrate(&|x, y| x.powi(a) * y.powi(b));
                assert!((got - exact).abs() < 1e-14, "x^{a} y^{b}");
            }
        }
    }

    #[test]
    fn partition_of_unity_and_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (n, dn) = shape_eval(p);
            assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(dn.iter().map(|d| d[0]).sum::<f64>().abs() < 1e-13);
            assert!(dn.iter().map(|d| d[1]).sum::<f64>().abs() < 1e-13);
        }
        for (a, node) in LOCAL_NODES.iter().enumerate() {
            let (n, _) = shape_eval(*node);
            for (b, v) in n.iter().enumerate() {
                assert_eq!(*v, if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn reproduces_linear_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field: Vec<f64> = LOCAL_NODES.iter().map(|p| p[0] + 2.0 * p[1]).collect();
        for _ in 0..20 {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (n, dn) = shape_eval(p);
            let v: f64 = n.iter().zip(&field).map(|(a, b)| a * b).sum();
            assert!((v - (p[0] + 2.0 * p[1])).abs() < 1e-14);
            let gx: f64 = dn.iter().zip(&field).map(|(d, f)| d[0] * f).sum();
            let gy: f64 = dn.iter().zip(&field).map(|(d, f)| d[1] * f).sum();
            assert!((gx - 1.0).abs() < 1e-13 && (gy - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn global_gradients_of_affine_element() {
        // element [0,2]×[0,1] rotated by 30°
        let (s, c) = (0.5f64, 0.75f64.sqrt());
        let coords: [[f64; 2]; 9] = LOCAL_NODES.map(|p| {
            let (x, y) = (1.0 + p[0], 0.5 * (1.0 + p[1]));
            [c * x - s * y, s * x + c * y]
        });
        let (_, dn) = shape_eval([0.3, -0.2]);
        let (det, g) = global_gradients(&coords, &dn);
        assert!((det - 0.5).abs() < 1e-14);
        let field: Vec<f64> = coords.iter().map(|x| 3.0 * x[0] - x[1]).collect();
        let gx: f64 = g.iter().zip(&field).map(|(d, f)| d[0] * f).sum();
        let gy: f64 = g.iter().zip(&field).map(|(d, f)| d[1] * f).sum();
        assert!((gx - 3.0).abs() < 1e-13 && (gy + 1.0).abs() < 1e-13);
    }
}
