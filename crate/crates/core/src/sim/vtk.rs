//! Legacy ASCII VTK snapshots. Each 9-node element is written as four
//! bilinear quads so every node carries its own value.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Error;
use crate::mesh::Mesh;

/// Local node quadruples of the four sub-quads, counter-clockwise.
const SUB_QUADS: [[usize; 4]; 4] = [[0, 4, 8, 7], [4, 1, 5, 8], [8, 5, 2, 6], [7, 8, 6, 3]];
const VTK_QUAD: u8 = 9;

/// A snapshot read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub mesh: Mesh,
    pub displacement: Vec<[f64; 2]>,
    pub phi: Vec<f64>,
    /// Phase-field length scale from the header, if present.
    pub length_scale: Option<f64>,
}

fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Renders a snapshot; `u` is interleaved x/y per node.
pub fn vtk_text(mesh: &Mesh, u: &[f64], phi: &[f64], length_scale: f64, time: f64) -> String {
    let n = mesh.node_count();
    let cells = 4 * mesh.element_count();
    let mut s = String::with_capacity(n * 120);
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(
        s,
        "cohesive-pf snapshot time={} length_scale={}",
        num(time),
        num(length_scale)
    );
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", num(p[0]), num(p[1]));
    }
    let _ = writeln!(s, "CELLS {cells} {}", 5 * cells);
    for el in &mesh.elements {
        for q in SUB_QUADS {
            let _ = writeln!(s, "4 {} {} {} {}", el[q[0]], el[q[1]], el[q[2]], el[q[3]]);
        }
    }
    let _ = writeln!(s, "CELL_TYPES {cells}");
    for _ in 0..cells {
        let _ = writeln!(s, "{VTK_QUAD}");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("VECTORS u double\n");
    for k in 0..n {
        let _ = writeln!(s, "{} {} 0", num(u[2 * k]), num(u[2 * k + 1]));
    }
    s.push_str("SCALARS phi double 1\nLOOKUP_TABLE default\n");
    for p in phi {
        let _ = writeln!(s, "{}", num(*p));
    }
    s
}

pub fn write_vtk(
    path: &Path,
    mesh: &Mesh,
    u: &[f64],
    phi: &[f64],
    length_scale: f64,
    time: f64,
) -> Result<(), Error> {
    std::fs::write(path, vtk_text(mesh, u, phi, length_scale, time)).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    tokens: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<&'a str, String> {
        self.tokens
            .next()
            .ok_or_else(|| "unexpected end of file".to_string())
    }

    fn expect(&mut self, word: &str) -> Result<(), String> {
        let t = self.next()?;
        if t.eq_ignore_ascii_case(word) {
            Ok(())
        } else {
            Err(format!("expected `{word}`, found `{t}`"))
        }
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T, String> {
        let t = self.next()?;
        t.parse().map_err(|_| format!("malformed number `{t}`"))
    }
}

/// Parses a file written by [`write_vtk`]; the 9-node elements are rebuilt
/// from consecutive groups of four sub-quads.
pub fn parse_vtk(text: &str) -> Result<Snapshot, String> {
    let mut lines = text.lines();
    let _version = lines.next().ok_or("empty file")?;
    let title = lines.next().ok_or("missing title line")?;
    let length_scale = title
        .split_whitespace()
        .find_map(|w| w.strip_prefix("length_scale="))
        .and_then(|v| v.parse().ok());
    let rest: Vec<&str> = lines.collect();
    let body = rest.join("\n");
    let mut r = Reader {
        tokens: body.split_whitespace().peekable(),
    };
    r.expect("ASCII")?;
    r.expect("DATASET")?;
    r.expect("UNSTRUCTURED_GRID")?;
    r.expect("POINTS")?;
    let n: usize = r.parse()?;
    r.next()?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let p = [r.parse()?, r.parse()?];
        let _z: f64 = r.parse()?;
        nodes.push(p);
    }
    r.expect("CELLS")?;
    let cells: usize = r.parse()?;
    let _size: usize = r.parse()?;
    if !cells.is_multiple_of(4) {
        return Err(format!("{cells} cells is not a multiple of four"));
    }
    let mut quads = Vec::with_capacity(cells);
    for _ in 0..cells {
        if r.parse::<usize>()? != 4 {
            return Err("only 4-node cells are supported".into());
        }
        let q: [usize; 4] = [r.parse()?, r.parse()?, r.parse()?, r.parse()?];
        if q.iter().any(|&i| i >= n) {
            return Err(format!("cell node index out of range in {q:?}"));
        }
        quads.push(q);
    }
    let elements = quads
        .chunks_exact(4)
        .map(|q| {
            [
                q[0][0], q[1][1], q[2][2], q[3][3], q[0][1], q[1][2], q[2][3], q[3][0], q[0][2],
            ]
        })
        .collect();
    r.expect("CELL_TYPES")?;
    let types: usize = r.parse()?;
    for _ in 0..types {
        r.next()?;
    }
    r.expect("POINT_DATA")?;
    let np: usize = r.parse()?;
    if np != n {
        return Err(format!("POINT_DATA {np} does not match {n} points"));
    }
    let mut displacement = vec![[0.0; 2]; n];
    let mut phi = None;
    while let Some(kind) = r.tokens.next() {
        let name = r.next()?;
        match kind {
            "VECTORS" => {
                r.next()?;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let x = [r.parse()?, r.parse()?];
                    let _z: f64 = r.parse()?;
                    v.push(x);
                }
                if name == "u" {
                    displacement = v;
                }
            }
            "SCALARS" => {
                r.next()?;
                if r.tokens.peek().is_some_and(|t| t.parse::<usize>().is_ok()) {
                    r.next()?;
                }
                r.expect("LOOKUP_TABLE")?;
                r.next()?;
                let v = (0..n).map(|_| r.parse()).collect::<Result<Vec<f64>, _>>()?;
                if name == "phi" {
                    phi = Some(v);
                }
            }
            other => return Err(format!("unsupported data section `{other}`")),
        }
    }
    let mesh = Mesh {
        nodes,
        elements,
        boundary_sets: Default::default(),
        characteristic_size: 0.0,
    };
    Ok(Snapshot {
        mesh,
        displacement,
        phi: phi.ok_or("no `phi` scalars in file")?,
        length_scale,
    })
}

pub fn read_vtk(path: &Path) -> Result<Snapshot, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}
