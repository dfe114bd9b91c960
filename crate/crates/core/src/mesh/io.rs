//! Plain-text mesh listing.
//!
//! ```text
//! mesh 1
//! characteristic_size <h>
//! nodes <N>
//! <x> <y>                         N lines
//! elements <M>
//! <n0> ... <n8>                   M lines
//! set <name> <node count> <edge count>
//! <node ids, space separated>     one line
//! <corner> <mid> <corner>         one line per edge
//! end
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{BoundarySet, Mesh};
use crate::error::MeshError;

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mesh 1").unwrap();
        writeln!(s, "characteristic_size {:.17e}", self.characteristic_size).unwrap();
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for p in &self.nodes {
            writeln!(s, "{:.17e} {:.17e}", p[0], p[1]).unwrap();
        }
        writeln!(s, "elements {}", self.elements.len()).unwrap();
        for el in &self.elements {
            let ids: Vec<String> = el.iter().map(|i| i.to_string()).collect();
            writeln!(s, "{}", ids.join(" ")).unwrap();
        }
        for (name, set) in &self.boundary_sets {
            writeln!(s, "set {name} {} {}", set.nodes.len(), set.edges.len()).unwrap();
            let ids: Vec<String> = set.nodes.iter().map(|i| i.to_string()).collect();
            writeln!(s, "{}", ids.join(" ")).unwrap();
            for e in &set.edges {
                writeln!(s, "{} {} {}", e[0], e[1], e[2]).unwrap();
            }
        }
        writeln!(s, "end").unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| MeshError::Parse {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let err = |line: usize, message: String| MeshError::Parse { line, message };

        let (line, header) = next("header")?;
        if header != "mesh 1" {
            return Err(err(line, format!("unsupported header `{header}`")));
        }
        let (line, text) = next("characteristic_size")?;
        let characteristic_size = keyed(text, "characteristic_size")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| err(line, "expected `characteristic_size <h>`".into()))?;

        let (line, text) = next("nodes")?;
        let n_nodes = keyed(text, "nodes")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| err(line, "expected `nodes <count>`".into()))?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let (line, text) = next("node coordinates")?;
            let v = numbers::<f64>(text)
                .filter(|v| v.len() == 2)
                .ok_or_else(|| err(line, "expected two coordinates".into()))?;
            nodes.push([v[0], v[1]]);
        }
        let (line, text) = next("elements")?;
        let n_el = keyed(text, "elements")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| err(line, "expected `elements <count>`".into()))?;
        let mut elements = Vec::with_capacity(n_el);
        for _ in 0..n_el {
            let (line, text) = next("element connectivity")?;
            let v = numbers::<usize>(text)
                .filter(|v| v.len() == 9)
                .ok_or_else(|| err(line, "expected nine node ids".into()))?;
            let mut el = [0; 9];
            el.copy_from_slice(&v);
            elements.push(el);
        }
        let mut boundary_sets = BTreeMap::new();
        loop {
            let (line, text) = next("`set` or `end`")?;
            if text == "end" {
                break;
            }
            let parts: Vec<&str> = text.split_whitespace().collect();
            let (name, n_nodes, n_edges) = match parts.as_slice() {
                ["set", name, a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
                    (Ok(a), Ok(b)) => (name.to_string(), a, b),
                    _ => return Err(err(line, "malformed set header".into())),
                },
                _ => return Err(err(line, format!("expected `set` or `end`, got `{text}`"))),
            };
            let set_nodes = if n_nodes == 0 {
                Vec::new()
            } else {
                let (line, text) = next("set nodes")?;
                numbers::<usize>(text)
                    .filter(|v| v.len() == n_nodes)
                    .ok_or_else(|| err(line, format!("expected {n_nodes} node ids")))?
            };
            let mut edges = Vec::with_capacity(n_edges);
            for _ in 0..n_edges {
                let (line, text) = next("set edge")?;
                let v = numbers::<usize>(text)
                    .filter(|v| v.len() == 3)
                    .ok_or_else(|| err(line, "expected three node ids".into()))?;
                edges.push([v[0], v[1], v[2]]);
            }
            boundary_sets.insert(
                name,
                BoundarySet {
                    nodes: set_nodes,
                    edges,
                },
            );
        }
        let mesh = Mesh {
            nodes,
            elements,
            boundary_sets,
            characteristic_size,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

fn keyed<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let mut parts = text.split_whitespace();
    (parts.next() == Some(key)).then(|| parts.next()).flatten()
}

fn numbers<T: std::str::FromStr>(text: &str) -> Option<Vec<T>> {
    text.split_whitespace().map(|t| t.parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_sent;

    #[test]
    fn text_roundtrip() {
        let mesh = generate_sent(0.1).unwrap();
        let back = Mesh::from_text(&mesh.to_text()).unwrap();
        assert_eq!(mesh, back);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "mesh 1\ncharacteristic_size 0.1\nnodes 1\n0.0 zero\n";
        match Mesh::from_text(bad) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Mesh::from_text("mesh 2\n").is_err());
    }
}
