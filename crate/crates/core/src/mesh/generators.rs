//! Block-structured generators for the three benchmark geometries.

use std::collections::{BTreeMap, HashMap};

use super::{Mesh, LOCAL_NODES};
use crate::error::MeshError;

pub const HOLE_CENTRE: [f64; 2] = [0.5, 0.5];
pub const HOLE_RADIUS: f64 = 0.1;

/// Coordinates closer than this are the same node.
const MERGE_TOL: f64 = 1e-10;

/// Merges coincident points into nodes in insertion order. Points carrying
/// different `side` tags never merge, which is how slits get duplicated nodes.
struct NodeMerger {
    cells: HashMap<(i64, i64), Vec<usize>>,
    nodes: Vec<[f64; 2]>,
    sides: Vec<u8>,
}

impl NodeMerger {
    fn new() -> Self {
        NodeMerger {
            cells: HashMap::new(),
            nodes: Vec::new(),
            sides: Vec::new(),
        }
    }

    fn key(p: [f64; 2]) -> (i64, i64) {
        (
            (p[0] / MERGE_TOL).round() as i64,
            (p[1] / MERGE_TOL).round() as i64,
        )
    }

    fn insert(&mut self, p: [f64; 2], side: u8) -> usize {
        let (kx, ky) = Self::key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let q = self.nodes[id];
                        if self.sides[id] == side
                            && (q[0] - p[0]).abs() <= MERGE_TOL
                            && (q[1] - p[1]).abs() <= MERGE_TOL
                        {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.nodes.len();
        self.nodes.push(p);
        self.sides.push(side);
        self.cells.entry((kx, ky)).or_default().push(id);
        id
    }
}

/// Fixes up the nine node positions produced by a block map: mid-edge nodes
/// move to the chord midpoint unless the edge is flagged as curved, and the
/// centre follows from the edges.
fn straighten(mut x: [[f64; 2]; 9], curved: [bool; 4]) -> [[f64; 2]; 9] {
    for (e, [a, m, b]) in super::EDGES.iter().enumerate() {
        if !curved[e] {
            x[*m] = [0.5 * (x[*a][0] + x[*b][0]), 0.5 * (x[*a][1] + x[*b][1])];
        }
    }
    for c in 0..2 {
        let mids: f64 = (4..8).map(|k| x[k][c]).sum();
        let corners: f64 = (0..4).map(|k| x[k][c]).sum();
        x[8][c] = 0.5 * mids - 0.25 * corners;
    }
    x
}

fn signed_area(x: &[[f64; 2]; 9]) -> f64 {
    let mut a = 0.0;
    for k in 0..4 {
        let (p, q) = (x[k], x[(k + 1) % 4]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Mirror in ξ; used when a block map is orientation-reversing.
const FLIP: [usize; 9] = [1, 0, 3, 2, 4, 7, 6, 5, 8];

/// Adds the `nx × ny` elements of a block with parameter map `map` on
/// [0,1]². If `curved_v0` the edge at v = 0 keeps its mapped mid-nodes.
/// `skip(i, j)` removes cells; `side(p)` tags points for the merger.
fn add_block(
    merger: &mut NodeMerger,
    elements: &mut Vec<[usize; 9]>,
    nx: usize,
    ny: usize,
    map: impl Fn(f64, f64) -> [f64; 2],
    curved_v0: bool,
    skip: impl Fn(usize, usize) -> bool,
    side: impl Fn([f64; 2]) -> u8,
) {
    for j in 0..ny {
        for i in 0..nx {
            if skip(i, j) {
                continue;
            }
            let x = LOCAL_NODES.map(|p| {
                let u = (i as f64 + 0.5 * (p[0] + 1.0)) / nx as f64;
                let v = (j as f64 + 0.5 * (p[1] + 1.0)) / ny as f64;
                map(u, v)
            });
            let mut x = straighten(x, [curved_v0 && j == 0, false, false, false]);
            if signed_area(&x) < 0.0 {
                x = FLIP.map(|k| x[k]);
            }
            elements.push(x.map(|p| merger.insert(p, side(p))));
        }
    }
}

fn finish(merger: NodeMerger, elements: Vec<[usize; 9]>, h: f64) -> Mesh {
    Mesh {
        nodes: merger.nodes,
        elements,
        boundary_sets: BTreeMap::new(),
        characteristic_size: h,
    }
}

fn add_rectangle_sets(mesh: &mut Mesh, width: f64, height: f64) {
    let tol = 1e-9;
    let sets: [(&str, Box<dyn Fn([f64; 2]) -> bool>); 4] = [
        ("bottom", Box::new(move |p: [f64; 2]| p[1].abs() < tol)),
        (
            "top",
            Box::new(move |p: [f64; 2]| (p[1] - height).abs() < tol),
        ),
        ("left", Box::new(move |p: [f64; 2]| p[0].abs() < tol)),
        (
            "right",
            Box::new(move |p: [f64; 2]| (p[0] - width).abs() < tol),
        ),
    ];
    for (name, on) in sets {
        let set = mesh.collect_edges(on);
        mesh.boundary_sets.insert(name.to_string(), set);
    }
}

/// Unit square with a centred hole of diameter 0.2 m.
///
/// A structured `n × n` grid covers the square except a central square of
/// half-width `a`; four transfinite blocks fill the ring between that square
/// and the circle. Mid-edge nodes on the hole lie on the exact circle.
pub fn generate_plate_with_hole(target_dx: f64) -> Result<Mesh, MeshError> {
    if !(target_dx > 0.0 && target_dx < 0.1) {
        return Err(MeshError::ElementSize(target_dx));
    }
    let n = (1.0 / target_dx).round().max(1.0) as usize;
    let h = 1.0 / n as f64;
    let r = HOLE_RADIUS;
    let [cx, cy] = HOLE_CENTRE;
    let a_target = r + 2.0 * h;
    let k = ((0.5 - a_target) * n as f64).floor().max(0.0) as usize;
    let a = 0.5 - k as f64 / n as f64;
    let m = n - 2 * k;
    if 4 * m < 8 {
        return Err(MeshError::HoleUnderResolved(4 * m));
    }
    let n_radial = (((a - r) / h).round() as usize).max(2);

    let mut merger = NodeMerger::new();
    let mut elements = Vec::new();
    add_block(
        &mut merger,
        &mut elements,
        n,
        n,
        |u, v| [u, v],
        false,
        |i, j| (k..n - k).contains(&i) && (k..n - k).contains(&j),
        |_| 0,
    );
    // ring blocks: right, top, left, bottom; quarter turns use exact (cos, sin)
    for (c, s) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
        let map = move |u: f64, v: f64| {
            let theta = -std::f64::consts::FRAC_PI_4 + u * std::f64::consts::FRAC_PI_2;
            let circle = [r * theta.cos(), r * theta.sin()];
            let square = [a, -a + 2.0 * a * u];
            let p = [
                (1.0 - v) * circle[0] + v * square[0],
                (1.0 - v) * circle[1] + v * square[1],
            ];
            [cx + c * p[0] - s * p[1], cy + s * p[0] + c * p[1]]
        };
        add_block(
            &mut merger,
            &mut elements,
            m,
            n_radial,
            map,
            true,
            |_, _| false,
            |_| 0,
        );
    }
    let mut mesh = finish(merger, elements, h);
    add_rectangle_sets(&mut mesh, 1.0, 1.0);
    let hole = mesh.collect_edges(|p| ((p[0] - cx).hypot(p[1] - cy) - r).abs() < 1e-9);
    mesh.boundary_sets.insert("hole".into(), hole);
    Ok(mesh)
}

/// Rectangle `[0, width] × [0, height]` with a zero-thickness slit along
/// `y = height/2` from the left edge to `x = tip_cells·h`. Nodes on the slit
/// faces are duplicated; the tip node is shared.
fn slit_rectangle(width: f64, height: f64, nx: usize, ny_half: usize, tip_cells: usize) -> Mesh {
    let hx = width / nx as f64;
    let mid = 0.5 * height;
    let tip = tip_cells as f64 * hx;
    let mut merger = NodeMerger::new();
    let mut elements = Vec::new();
    for (half, y0) in [(1u8, 0.0), (2u8, mid)] {
        let map = move |u: f64, v: f64| [u * width, y0 + v * mid];
        let side = move |p: [f64; 2]| {
            let on_slit = (p[1] - mid).abs() < 1e-9 && p[0] < tip - 1e-9;
            if on_slit {
                half
            } else {
                0
            }
        };
        add_block(
            &mut merger,
            &mut elements,
            nx,
            ny_half,
            map,
            false,
            |_, _| false,
            side,
        );
    }
    let mut mesh = finish(merger, elements, hx);
    add_rectangle_sets(&mut mesh, width, height);
    let faces = mesh.collect_edges(|p| (p[1] - mid).abs() < 1e-9 && p[0] <= tip + 1e-9);
    mesh.boundary_sets.insert("notch_faces".into(), faces);
    mesh
}

/// Unit square with an edge slit from the left boundary to the centre.
pub fn generate_sent(target_dx: f64) -> Result<Mesh, MeshError> {
    if !(target_dx > 0.0 && target_dx <= 0.25) {
        return Err(MeshError::ElementSize(target_dx));
    }
    let mut n = (1.0 / target_dx).round() as usize;
    n += n % 2;
    Ok(slit_rectangle(1.0, 1.0, n, n / 2, n / 2))
}

/// Rectangle with an edge slit of length `notch_len` at mid-height. The
/// slit tip is snapped to the nearest grid line.
pub fn generate_dynamic_plate(
    target_dx: f64,
    width: f64,
    height: f64,
    notch_len: f64,
) -> Result<Mesh, MeshError> {
    if !(width > 0.0 && height > 0.0) {
        return Err(MeshError::Geometry(format!(
            "plate dimensions must be positive, got {width} × {height}"
        )));
    }
    if !(notch_len > 0.0 && notch_len < width) {
        return Err(MeshError::Geometry(format!(
            "notch length {notch_len} must lie in (0, {width})"
        )));
    }
    if !(target_dx > 0.0 && target_dx <= 0.5 * height.min(notch_len).min(width - notch_len)) {
        return Err(MeshError::ElementSize(target_dx));
    }
    let nx = (width / target_dx).round() as usize;
    let ny_half = ((0.5 * height / target_dx).round() as usize).max(1);
    let hx = width / nx as f64;
    let tip_cells = ((notch_len / hx).round() as usize).clamp(1, nx - 1);
    Ok(slit_rectangle(width, height, nx, ny_half, tip_cells))
}
