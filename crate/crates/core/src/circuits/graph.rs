use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{input_err, Error, Result};

/// Simple undirected graph, edges stored as `(min, max)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<GraphSpec> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return input_err(format!("edge ({u}, {v}) out of range for {num_nodes} nodes"));
            }
            if u == v {
                return input_err(format!("self-loop on node {u}"));
            }
            let e = (u.min(v), u.max(v));
            if out.contains(&e) {
                return input_err(format!("duplicate edge ({}, {})", e.0, e.1));
            }
            out.push(e);
        }
        Ok(GraphSpec { num_nodes, edges: out })
    }

    pub fn complete(num_nodes: usize) -> GraphSpec {
        let edges = (0..num_nodes).flat_map(|u| (u + 1..num_nodes).map(move |v| (u, v)));
        GraphSpec::new(num_nodes, edges).expect("complete graph is simple")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges crossing the bipartition given by `assignment` (bit per node).
    pub fn cut_value(&self, assignment: &[u8]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| assignment[u] != assignment[v])
            .count()
    }

    /// Parses `<num_nodes>` followed by one `u v` edge per line (0-indexed).
    pub fn parse(text: &str) -> Result<GraphSpec> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let Some((line, first)) = lines.next() else {
            return Err(Error::Parse {
                line: 0,
                message: "empty graph file".into(),
            });
        };
        let num_nodes: usize = first.parse().map_err(|_| Error::Parse {
            line,
            message: format!("expected node count, got `{first}`"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let bad = || Error::Parse {
                line,
                message: format!("expected `u v`, got `{l}`"),
            };
            let mut it = l.split_whitespace();
            let (Some(u), Some(v), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad());
            };
            edges.push((u.parse().map_err(|_| bad())?, v.parse().map_err(|_| bad())?));
        }
        GraphSpec::new(num_nodes, edges)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<GraphSpec> {
        GraphSpec::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.num_nodes);
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(GraphSpec::new(3, [(0, 0)]).is_err());
        assert!(GraphSpec::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(GraphSpec::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn parse_roundtrip() {
        let g = GraphSpec::parse("3\n0 1\n1 2\n# c\n2 0\n").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(GraphSpec::parse(&g.to_text()).unwrap(), g);
        assert!(GraphSpec::parse("").is_err());
        assert!(GraphSpec::parse("x\n").is_err());
        assert!(GraphSpec::parse("3\n0\n").is_err());
        assert!(GraphSpec::parse("3\n0 a\n").is_err());
    }

    #[test]
    fn complete_graph() {
        assert_eq!(GraphSpec::complete(4).edges().len(), 6);
    }
}
