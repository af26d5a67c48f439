//! Permutation graphs over `S_n`, their Laplacian spectra, and the spectral bounds
//! on the cost of MEV.
//!
//! Vertex `r` is the permutation of lexicographic rank `r`, so a signal `f_r = f(π_r(x))`
//! is exactly [`crate::cost::orbit_signal`].

mod eigen;
mod signal;

pub use eigen::*;
pub use signal::*;

use std::collections::VecDeque;
use std::fmt::Write as _;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{binomial, compensated_sum, factorial};
use crate::permgroup::{check_degree, enumerate_group};

/// Largest degree accepted without the explicit `allow_n8` opt-in.
pub const SPECTRAL_CAP: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    Transposition,
    Custom,
}

/// Edge rule for [`build_graph`].
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    Complete,
    Transposition,
    /// Unordered rank pairs; duplicates are merged.
    Custom(Vec<(usize, usize)>),
}

#[derive(Clone, Debug)]
enum Adjacency {
    // Never materialized: 7! vertices would need ~12.7M edges.
    Complete,
    // Compressed sparse rows over sorted neighbor lists.
    Sparse { offsets: Vec<usize>, targets: Vec<u32> },
}

/// A connected graph whose vertices are the `n!` permutations.
#[derive(Clone, Debug)]
pub struct PermutationGraph {
    n: usize,
    kind: GraphKind,
    vertex_count: usize,
    adjacency: Adjacency,
    edge_count: usize,
    diameter: usize,
}

/// Builds the graph and verifies connectivity. `allow_n8` lifts the degree cap to 8
/// (the dense spectrum then needs about 13 GB per matrix).
pub fn build_graph(n: usize, spec: GraphSpec, allow_n8: bool) -> Result<PermutationGraph> {
    check_degree(n)?;
    if n > SPECTRAL_CAP && !allow_n8 {
        return Err(Error::DegreeOutOfRange { n, cap: SPECTRAL_CAP });
    }
    let vertex_count = factorial(n);
    let graph = match spec {
        GraphSpec::Complete => PermutationGraph {
            n,
            kind: GraphKind::Complete,
            vertex_count,
            adjacency: Adjacency::Complete,
            edge_count: vertex_count * (vertex_count - 1) / 2,
            diameter: usize::from(vertex_count > 1),
        },
        GraphSpec::Transposition => {
            let mut edges = Vec::with_capacity(vertex_count * n * (n - 1) / 4);
            for (r, pi) in enumerate_group(n)?.iter().enumerate() {
                for i in 0..n {
                    for j in i + 1..n {
                        let s = pi.swapped(i, j).rank();
                        if s > r {
                            edges.push((r, s));
                        }
                    }
                }
            }
            let expected = vertex_count * n * (n - 1) / 4;
            if edges.len() != expected {
                return Err(Error::Graph(format!(
                    "transposition graph has {} edges, expected {expected}",
                    edges.len()
                )));
            }
            let mut g = sparse_graph(n, GraphKind::Transposition, edges)?;
            g.diameter = g.eccentricity(0);
            g
        }
        GraphSpec::Custom(edges) => {
            for &(a, b) in &edges {
                if a >= vertex_count || b >= vertex_count {
                    return Err(Error::Graph(format!(
                        "edge ({a}, {b}) references a vertex outside 0..{vertex_count}"
                    )));
                }
                if a == b {
                    return Err(Error::Graph(format!("self-loop at vertex {a}")));
                }
            }
            let normalized = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            let mut g = sparse_graph(n, GraphKind::Custom, normalized)?;
            g.diameter = (0..vertex_count).map(|v| g.eccentricity(v)).max().unwrap_or(0);
            g
        }
    };
    Ok(graph)
}

fn sparse_graph(n: usize, kind: GraphKind, mut edges: Vec<(usize, usize)>) -> Result<PermutationGraph> {
    let vertex_count = factorial(n);
    edges.sort_unstable();
    edges.dedup();
    let mut degree = vec![0usize; vertex_count];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut offsets = vec![0usize; vertex_count + 1];
    for v in 0..vertex_count {
        offsets[v + 1] = offsets[v] + degree[v];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[vertex_count]];
    for &(a, b) in &edges {
        targets[fill[a]] = b as u32;
        fill[a] += 1;
        targets[fill[b]] = a as u32;
        fill[b] += 1;
    }
    for v in 0..vertex_count {
        targets[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    let g = PermutationGraph {
        n,
        kind,
        vertex_count,
        adjacency: Adjacency::Sparse { offsets, targets },
        edge_count: edges.len(),
        diameter: 0,
    };
    if let Some(v) = g.distances_from(0).iter().position(|d| d.is_none()) {
        return Err(Error::Graph(format!(
            "graph is disconnected: vertex {v} is unreachable from 0"
        )));
    }
    Ok(g)
}

impl PermutationGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn degree(&self, v: usize) -> usize {
        match &self.adjacency {
            Adjacency::Complete => self.vertex_count - 1,
            Adjacency::Sparse { offsets, .. } => offsets[v + 1] - offsets[v],
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.vertex_count).map(|v| self.degree(v)).collect()
    }

    /// `Some(k)` when every vertex has degree `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.degree(0);
        (0..self.vertex_count).all(|v| self.degree(v) == k).then_some(k)
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        match &self.adjacency {
            Adjacency::Complete => (0..self.vertex_count).filter(|&u| u != v).collect(),
            Adjacency::Sparse { offsets, targets } => targets[offsets[v]..offsets[v + 1]]
                .iter()
                .map(|&u| u as usize)
                .collect(),
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        match &self.adjacency {
            Adjacency::Complete => a != b && a < self.vertex_count && b < self.vertex_count,
            Adjacency::Sparse { offsets, targets } => {
                a < self.vertex_count && targets[offsets[a]..offsets[a + 1]].binary_search(&(b as u32)).is_ok()
            }
        }
    }

    /// Calls `visit(i, j)` once per edge with `i < j`, in lexicographic order.
    pub fn for_each_edge(&self, mut visit: impl FnMut(usize, usize)) {
        match &self.adjacency {
            Adjacency::Complete => {
                for i in 0..self.vertex_count {
                    for j in i + 1..self.vertex_count {
                        visit(i, j);
                    }
                }
            }
            Adjacency::Sparse { offsets, targets } => {
                for i in 0..self.vertex_count {
                    for &j in &targets[offsets[i]..offsets[i + 1]] {
                        if j as usize > i {
                            visit(i, j as usize);
                        }
                    }
                }
            }
        }
    }

    fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued vertices have distances");
            for u in self.neighbors(v) {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Largest BFS distance from `v`.
    pub fn eccentricity(&self, v: usize) -> usize {
        self.distances_from(v).into_iter().flatten().max().unwrap_or(0)
    }

    /// `L·f` without forming `L`.
    pub fn laplacian_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.vertex_count {
            return Err(Error::LengthMismatch {
                expected: self.vertex_count,
                got: f.len(),
            });
        }
        Ok(match &self.adjacency {
            Adjacency::Complete => {
                let total = compensated_sum(f.iter().copied());
                f.iter().map(|v| self.vertex_count as f64 * v - total).collect()
            }
            Adjacency::Sparse { offsets, targets } => (0..self.vertex_count)
                .map(|i| {
                    let neighbors = &targets[offsets[i]..offsets[i + 1]];
                    neighbors.len() as f64 * f[i] - compensated_sum(neighbors.iter().map(|&j| f[j as usize]))
                })
                .collect(),
        })
    }

    /// Dense Laplacian `L = D − A`.
    pub fn laplacian(&self) -> Mat<f64> {
        let n = self.vertex_count;
        match &self.adjacency {
            Adjacency::Complete => Mat::from_fn(n, n, |i, j| if i == j { (n - 1) as f64 } else { -1.0 }),
            Adjacency::Sparse { offsets, targets } => {
                let mut l = Mat::zeros(n, n);
                for i in 0..n {
                    l.write(i, i, (offsets[i + 1] - offsets[i]) as f64);
                    for &j in &targets[offsets[i]..offsets[i + 1]] {
                        l.write(i, j as usize, -1.0);
                    }
                }
                l
            }
        }
    }

    /// True when no edge joins two permutations of equal parity.
    pub fn is_bipartite_by_parity(&self) -> Result<bool> {
        let parity: Vec<_> = enumerate_group(self.n)?.iter().map(|p| p.parity()).collect();
        let mut ok = true;
        self.for_each_edge(|i, j| ok &= parity[i] != parity[j]);
        Ok(ok)
    }

    /// Expected edge count of the transposition graph, `n!·C(n, 2)/2`.
    pub fn transposition_edge_count(n: usize) -> usize {
        (factorial(n) as f64 * binomial(n, 2) / 2.0).round() as usize
    }

    /// Edge list, one `rank_i,rank_j` pair per line with `rank_i < rank_j`.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("rank_i,rank_j\n");
        self.for_each_edge(|i, j| {
            let _ = writeln!(out, "{i},{j}");
        });
        out
    }
}

/// Parses a custom edge file: one `rank_i rank_j` pair per line; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|s| s.parse().ok()).collect();
        match parsed.as_deref() {
            Some([a, b]) => edges.push((*a, *b)),
            _ => {
                return Err(Error::Graph(format!(
                    "line {}: expected two vertex ranks, got {line:?}",
                    lineno + 1
                )))
            }
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::transposition_adjacent;

    #[test]
    fn small_graph_counts() {
        let t3 = build_graph(3, GraphSpec::Transposition, false).unwrap();
        assert_eq!((t3.vertex_count(), t3.edge_count()), (6, 9));
        assert_eq!(t3.regular_degree(), Some(3));

        let k3 = build_graph(3, GraphSpec::Complete, false).unwrap();
        assert_eq!(k3.edge_count(), 15);
        assert_eq!(k3.diameter(), 1);

        let t2 = build_graph(2, GraphSpec::Transposition, false).unwrap();
        let k2 = build_graph(2, GraphSpec::Complete, false).unwrap();
        assert_eq!((t2.edge_count(), k2.edge_count()), (1, 1));
        assert_eq!(t2.edges_csv(), k2.edges_csv());

        let k1 = build_graph(1, GraphSpec::Complete, false).unwrap();
        assert_eq!((k1.vertex_count(), k1.edge_count(), k1.diameter()), (1, 0, 0));
    }

    #[test]
    fn transposition_edges_match_adjacency_oracle() {
        let n = 4;
        let g = build_graph(n, GraphSpec::Transposition, false).unwrap();
        let group = enumerate_group(n).unwrap();
        for (i, a) in group.iter().enumerate() {
            for (j, b) in group.iter().enumerate() {
                assert_eq!(g.has_edge(i, j), transposition_adjacent(a, b).unwrap(), "{i} {j}");
            }
        }
        assert_eq!(g.edge_count(), PermutationGraph::transposition_edge_count(n));
    }

    #[test]
    fn transposition_structure() {
        for n in 2..=6 {
            let g = build_graph(n, GraphSpec::Transposition, false).unwrap();
            assert_eq!(g.diameter(), n - 1);
            assert_eq!(g.regular_degree(), Some(n * (n - 1) / 2));
            assert!(g.is_bipartite_by_parity().unwrap());
            assert_eq!(g.edge_count(), PermutationGraph::transposition_edge_count(n));
        }
        // Exhaustive BFS agrees with the single-source shortcut.
        let g = build_graph(5, GraphSpec::Transposition, false).unwrap();
        assert_eq!((0..120).map(|v| g.eccentricity(v)).max(), Some(4));
    }

    #[test]
    fn custom_graphs() {
        let path: Vec<(usize, usize)> = (0..5).map(|i| (i + 1, i)).chain([(2, 3)]).collect();
        let g = build_graph(3, GraphSpec::Custom(path), false).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.diameter(), 5);
        assert_eq!(g.kind(), GraphKind::Custom);

        let split = vec![(0, 1), (1, 2), (3, 4), (4, 5)];
        assert!(matches!(
            build_graph(3, GraphSpec::Custom(split), false),
            Err(Error::Graph(_))
        ));
        assert!(build_graph(3, GraphSpec::Custom(vec![(0, 6)]), false).is_err());
        assert!(build_graph(3, GraphSpec::Custom(vec![(1, 1)]), false).is_err());
    }

    #[test]
    fn cap_requires_opt_in() {
        assert!(matches!(
            build_graph(8, GraphSpec::Complete, false),
            Err(Error::DegreeOutOfRange { n: 8, cap: 7 })
        ));
        assert!(build_graph(8, GraphSpec::Complete, true).is_ok());
        assert!(build_graph(9, GraphSpec::Complete, true).is_err());
    }

    #[test]
    fn laplacian_apply_matches_dense() {
        for spec in [GraphSpec::Complete, GraphSpec::Transposition] {
            let g = build_graph(4, spec, false).unwrap();
            let l = g.laplacian();
            let f: Vec<f64> = (0..24).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
            let fast = g.laplacian_apply(&f).unwrap();
            for i in 0..24 {
                let dense: f64 = (0..24).map(|j| l.read(i, j) * f[j]).sum();
                assert!((dense - fast[i]).abs() < 1e-12);
            }
            let trace: f64 = (0..24).map(|i| l.read(i, i)).sum();
            assert_eq!(trace, g.degrees().iter().sum::<usize>() as f64);
        }
    }

    #[test]
    fn edge_list_parsing() {
        let edges = parse_edge_list("0 1\n# comment\n1,2\n\n2 3 # trailing\n").unwrap();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(parse_edge_list("0 1 2\n").is_err());
        assert!(parse_edge_list("a b\n").is_err());
    }

    #[test]
    fn complete_graph_neighbors() {
        let g = build_graph(3, GraphSpec::Complete, false).unwrap();
        assert_eq!(g.neighbors(2), vec![0, 1, 3, 4, 5]);
        assert!(g.has_edge(0, 5) && !g.has_edge(3, 3));
    }
}
