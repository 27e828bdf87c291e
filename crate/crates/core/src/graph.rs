//! Undirected communication topology and its spectral quantities.
//!
//! Vertices are 1-based in all external formats (edge lists, error messages)
//! and 0-based internally; the constructors convert.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;

/// An undirected, loop-free communication graph with no isolated vertex.
///
/// Holds the adjacency and Laplacian matrices plus the full Laplacian
/// spectrum, computed once at construction (graphs here are desk scale).
#[derive(Debug, Clone)]
pub struct CommGraph {
    n: usize,
    /// Canonical 0-based edge list, each pair ordered, sorted, deduplicated.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    degrees: Vec<usize>,
    adjacency: DMatrix<f64>,
    laplacian: DMatrix<f64>,
    /// Laplacian eigenvalues, ascending.
    spectrum: Vec<f64>,
}

impl CommGraph {
    /// Builds a graph on `n` vertices from 1-based edge pairs.
    ///
    /// Duplicate edges (in either orientation) collapse to one. Fails on
    /// self-loops, out-of-range indices, and isolated vertices.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "n".to_string(),
                message: format!("need at least 2 vertices, got {}", n),
            });
        }
        let mut canonical: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i == j {
                return Err(Error::InvalidEdge {
                    edge: (i, j),
                    reason: "self-loop".to_string(),
                });
            }
            if i < 1 || i > n || j < 1 || j > n {
                return Err(Error::InvalidEdge {
                    edge: (i, j),
                    reason: format!("vertex out of range 1..={}", n),
                });
            }
            let (a, b) = (i - 1, j - 1);
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        canonical.dedup();

        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &canonical {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        if let Some(v) = neighbors.iter().position(|list| list.is_empty()) {
            return Err(Error::IsolatedVertex { vertex: v + 1 });
        }
        let degrees: Vec<usize> = neighbors.iter().map(|list| list.len()).collect();

        let mut adjacency = DMatrix::zeros(n, n);
        let mut laplacian = DMatrix::zeros(n, n);
        for &(a, b) in &canonical {
            adjacency[(a, b)] = 1.0;
            adjacency[(b, a)] = 1.0;
            laplacian[(a, b)] = -1.0;
            laplacian[(b, a)] = -1.0;
        }
        for (v, &d) in degrees.iter().enumerate() {
            laplacian[(v, v)] = d as f64;
        }
        let spectrum = symmetric_eigenvalues(&laplacian);

        Ok(CommGraph {
            n,
            edges: canonical,
            neighbors,
            degrees,
            adjacency,
            laplacian,
            spectrum,
        })
    }

    /// Builds a graph from edge-list text: one `i j` pair per line,
    /// `#` starts a comment, blank lines are skipped, indices 1-based.
    pub fn from_edge_list_text(n: usize, text: &str) -> Result<Self> {
        Self::from_edge_list(n, &parse_edge_list(text)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonical 0-based edges, each `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// 0-based neighbor list of vertex `i` (0-based), ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    /// Largest vertex degree d*.
    pub fn max_degree(&self) -> usize {
        *self.degrees.iter().max().expect("n >= 2")
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// L = D - A. Rows sum to zero exactly (small-integer arithmetic).
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Laplacian eigenvalues, ascending.
    pub fn laplacian_spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Second-smallest Laplacian eigenvalue, positive iff connected.
    pub fn algebraic_connectivity(&self) -> f64 {
        self.spectrum[1]
    }

    /// Largest Laplacian eigenvalue.
    pub fn laplacian_spectral_radius(&self) -> f64 {
        *self.spectrum.last().expect("n >= 2")
    }

    /// True iff a traversal from vertex 1 reaches every vertex.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }
}

/// Parses edge-list text into 1-based pairs. See [`CommGraph::from_edge_list_text`].
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |field: Option<&str>, idx: usize| -> Result<usize> {
            field
                .ok_or(())
                .and_then(|s| s.parse::<usize>().map_err(|_| ()))
                .map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("expected two vertex indices, got {:?}", raw.trim()),
                })
        };
        let i = parse(fields.next(), idx)?;
        let j = parse(fields.next(), idx)?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("trailing fields in {:?}", raw.trim()),
            });
        }
        edges.push((i, j));
    }
    Ok(edges)
}
