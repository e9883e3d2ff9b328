//! Finite simple graphs with edge indexing, line-graph distances and
//! edge neighborhoods.

use crate::error::ModelError;
use std::collections::{HashSet, VecDeque};

/// Sentinel for "unreachable" in distance queries on disconnected graphs.
pub const INFINITY: usize = usize::MAX;

/// A finite simple graph. Vertices are dense ids `0..vertex_count`; edges
/// carry stable indices `0..edges.len()` so link configurations can refer
/// to edges by index.
#[derive(Debug, Clone)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    /// per-vertex list of (neighbor, edge_index)
    adjacency: Vec<Vec<(usize, usize)>>,
    max_degree: usize,
}

/// The set of edges at line-graph distance in `[lo, hi]` from a center edge.
#[derive(Debug, Clone)]
pub struct EdgeNeighborhood {
    pub center: usize,
    pub lo: usize,
    /// `None` means unbounded (all distances >= lo).
    pub hi: Option<usize>,
    pub members: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an explicit edge list. The vertex set is
    /// `0..=max mentioned id`. Rejects self-loops and duplicate edges.
    pub fn from_edge_list(pairs: &[(usize, usize)]) -> Result<Self, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::InvalidGraph("empty edge list".into()));
        }
        let mut seen = HashSet::new();
        let mut max_v = 0usize;
        for &(a, b) in pairs {
            if a == b {
                return Err(ModelError::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(ModelError::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            max_v = max_v.max(a).max(b);
        }
        let vertex_count = max_v + 1;
        let edges: Vec<(usize, usize)> = pairs.to_vec();
        Ok(Self::assemble(vertex_count, edges))
    }

    /// Hypercubic box in `Z^dimension` with `side` vertices per direction
    /// and nearest-neighbor edges; `periodic` wraps coordinates.
    pub fn build_box(dimension: usize, side: usize, periodic: bool) -> Result<Self, ModelError> {
        if dimension == 0 {
            return Err(ModelError::InvalidGraph("dimension must be >= 1".into()));
        }
        if side == 0 {
            return Err(ModelError::InvalidGraph("side must be >= 1".into()));
        }
        if periodic && side < 3 {
            return Err(ModelError::InvalidGraph(
                "periodic box needs side >= 3 to stay simple".into(),
            ));
        }
        let vertex_count = side.checked_pow(dimension as u32).ok_or_else(|| {
            ModelError::Guard(format!("box size {side}^{dimension} overflows"))
        })?;
        let mut edges = Vec::new();
        // vertex id = sum coords[k] * side^k
        let mut strides = vec![1usize; dimension];
        for k in 1..dimension {
            strides[k] = strides[k - 1] * side;
        }
        for v in 0..vertex_count {
            for k in 0..dimension {
                let coord = (v / strides[k]) % side;
                if coord + 1 < side {
                    edges.push((v, v + strides[k]));
                } else if periodic {
                    edges.push((v, v - coord * strides[k]));
                }
            }
        }
        Ok(Self::assemble(vertex_count, edges))
    }

    fn assemble(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (idx, &(a, b)) in edges.iter().enumerate() {
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Graph {
            vertex_count,
            edges,
            adjacency,
            max_degree,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Result<(usize, usize), ModelError> {
        self.edges.get(index).copied().ok_or(ModelError::EdgeIndex {
            index,
            count: self.edges.len(),
        })
    }

    pub fn adjacency(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// True iff the two edges share at least one endpoint (includes e == f).
    pub fn edges_adjacent(&self, e: usize, f: usize) -> bool {
        let (a, b) = self.edges[e];
        let (c, d) = self.edges[f];
        a == c || a == d || b == c || b == d
    }

    /// Line-graph distance: 0 iff `e == f`, 1 iff they share a vertex,
    /// otherwise the shortest chain of pairwise-adjacent edges.
    /// Returns [`INFINITY`] when the edges lie in different components.
    pub fn edge_distance(&self, e: usize, f: usize) -> Result<usize, ModelError> {
        self.edge(e)?;
        self.edge(f)?;
        if e == f {
            return Ok(0);
        }
        // BFS over the line graph, expanding via shared endpoints.
        let mut dist = vec![INFINITY; self.edges.len()];
        dist[e] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(e);
        while let Some(cur) = queue.pop_front() {
            if cur == f {
                return Ok(dist[f]);
            }
            let (a, b) = self.edges[cur];
            for &v in &[a, b] {
                for &(_, next) in &self.adjacency[v] {
                    if dist[next] == INFINITY {
                        dist[next] = dist[cur] + 1;
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(INFINITY)
    }

    /// Line-graph BFS distances from `e` to every edge.
    pub fn edge_distances_from(&self, e: usize) -> Result<Vec<usize>, ModelError> {
        self.edge(e)?;
        let mut dist = vec![INFINITY; self.edges.len()];
        dist[e] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(e);
        while let Some(cur) = queue.pop_front() {
            let (a, b) = self.edges[cur];
            for &v in &[a, b] {
                for &(_, next) in &self.adjacency[v] {
                    if dist[next] == INFINITY {
                        dist[next] = dist[cur] + 1;
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(dist)
    }

    /// The edge neighborhood `{ f : edge_distance(center, f) in [lo, hi] }`.
    /// `hi = None` means unbounded.
    pub fn neighborhood(
        &self,
        center: usize,
        lo: usize,
        hi: Option<usize>,
    ) -> Result<EdgeNeighborhood, ModelError> {
        if let Some(h) = hi {
            if lo > h {
                return Err(ModelError::NeighborhoodRange { lo, hi: h });
            }
        }
        let dist = self.edge_distances_from(center)?;
        let members: Vec<usize> = (0..self.edges.len())
            .filter(|&f| {
                let d = dist[f];
                d != INFINITY && d >= lo && hi.map_or(true, |h| d <= h)
            })
            .collect();
        Ok(EdgeNeighborhood {
            center,
            lo,
            hi,
            members,
        })
    }

    /// Vertex-graph BFS distances from `source`.
    pub fn vertex_distances(&self, source: usize) -> Result<Vec<usize>, ModelError> {
        if source >= self.vertex_count {
            return Err(ModelError::VertexIndex {
                index: source,
                count: self.vertex_count,
            });
        }
        let mut dist = vec![INFINITY; self.vertex_count];
        dist[source] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if dist[w] == INFINITY {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Parses the edge-list text format: one `u v` pair per line,
    /// blank lines and `#` comments allowed.
    pub fn parse_edge_list(text: &str) -> Result<Self, ModelError> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let a: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| ModelError::Parse(format!("line {}: expected `u v`", lineno + 1)))?;
            let b: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| ModelError::Parse(format!("line {}: expected `u v`", lineno + 1)))?;
            if it.next().is_some() {
                return Err(ModelError::Parse(format!(
                    "line {}: trailing tokens",
                    lineno + 1
                )));
            }
            pairs.push((a, b));
        }
        Graph::from_edge_list(&pairs)
    }
}

impl EdgeNeighborhood {
    pub fn contains(&self, f: usize) -> bool {
        self.members.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 14-vertex example graph: a center edge e0 = {0,1}, four edges
    /// touching it, and eight more one step further out.
    fn two_ring_graph() -> (Graph, usize, Vec<usize>, Vec<usize>) {
        // e0 = (0,1); ring-1 edges hang off 0 and 1; ring-2 edges hang off
        // the ring-1 outer vertices.
        let pairs = vec![
            (0, 1),  // e0
            (0, 2),  // e1a
            (0, 3),  // e1b
            (1, 4),  // e1c
            (1, 5),  // e1d
            (2, 6),  // e2a
            (2, 7),  // e2b
            (3, 8),  // e2c
            (3, 9),  // e2d
            (4, 10), // e2e
            (4, 11), // e2f
            (5, 12), // e2g
            (5, 13), // e2h
        ];
        let g = Graph::from_edge_list(&pairs).unwrap();
        (g, 0, vec![1, 2, 3, 4], vec![5, 6, 7, 8, 9, 10, 11, 12])
    }

    #[test]
    fn box_1d_is_path() {
        let g = Graph::build_box(1, 3, false).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn box_2x2_is_cycle() {
        let g = Graph::build_box(2, 2, false).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn box_3d_interior_degree_six() {
        let g = Graph::build_box(3, 4, false).unwrap();
        // interior vertex (1,1,1) -> id 1 + 4 + 16 = 21
        assert_eq!(g.degree(21), 6);
        assert_eq!(g.max_degree(), 6);
    }

    #[test]
    fn box_edge_count_formula() {
        for d in 1..=3usize {
            for side in 1..=4usize {
                let g = Graph::build_box(d, side, false).unwrap();
                let expected = d * side.pow(d as u32 - 1) * (side - 1);
                assert_eq!(g.edge_count(), expected, "d={d} side={side}");
            }
        }
    }

    #[test]
    fn periodic_box_degree() {
        let g = Graph::build_box(2, 4, true).unwrap();
        assert_eq!(g.edge_count(), 2 * 4 * 4);
        for v in 0..g.vertex_count() {
            assert_eq!(g.degree(v), 4);
        }
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(Graph::build_box(0, 3, false).is_err());
        assert!(Graph::build_box(2, 2, true).is_err());
    }

    #[test]
    fn rejects_self_loop_and_duplicate() {
        assert!(Graph::from_edge_list(&[(0, 0)]).is_err());
        assert!(Graph::from_edge_list(&[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn single_edge_and_star() {
        let g = Graph::from_edge_list(&[(0, 1)]).unwrap();
        assert_eq!(g.max_degree(), 1);
        let s = Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(s.max_degree(), 3);
    }

    #[test]
    fn edge_distance_basics() {
        let g = Graph::build_box(1, 4, false).unwrap(); // path of 3 edges
        assert_eq!(g.edge_distance(0, 0).unwrap(), 0);
        assert_eq!(g.edge_distance(0, 1).unwrap(), 1);
        assert_eq!(g.edge_distance(0, 2).unwrap(), 2);
        assert_eq!(g.edge_distance(2, 0).unwrap(), 2);
    }

    #[test]
    fn edge_distance_disconnected() {
        let g = Graph::from_edge_list(&[(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.edge_distance(0, 1).unwrap(), INFINITY);
    }

    #[test]
    fn two_ring_neighborhoods() {
        let (g, e0, ring1, ring2) = two_ring_graph();
        let a11 = g.neighborhood(e0, 1, Some(1)).unwrap();
        assert_eq!(a11.members, ring1);
        let a22 = g.neighborhood(e0, 2, Some(2)).unwrap();
        assert_eq!(a22.members, ring2);
        assert_eq!(g.edge_distance(e0, ring2[0]).unwrap(), 2);
        // A(1,1) and A(2,2) partition A(1,2)
        let a12 = g.neighborhood(e0, 1, Some(2)).unwrap();
        let mut both = ring1.clone();
        both.extend(&ring2);
        both.sort_unstable();
        let mut got = a12.members.clone();
        got.sort_unstable();
        assert_eq!(got, both);
    }

    #[test]
    fn neighborhood_contains_center_iff_lo_zero() {
        let g = Graph::build_box(1, 3, false).unwrap();
        assert!(g.neighborhood(0, 0, Some(0)).unwrap().contains(0));
        assert!(!g.neighborhood(0, 1, Some(5)).unwrap().contains(0));
        let path = g.neighborhood(0, 1, Some(1)).unwrap();
        assert_eq!(path.members, vec![1]);
    }

    #[test]
    fn neighborhood_unbounded_covers_component() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (3, 4)]).unwrap();
        let n = g.neighborhood(0, 0, None).unwrap();
        assert_eq!(n.members, vec![0, 1]);
    }

    #[test]
    fn rejects_inverted_range() {
        let g = Graph::build_box(1, 3, false).unwrap();
        assert!(g.neighborhood(0, 2, Some(1)).is_err());
    }

    #[test]
    fn parse_edge_list_format() {
        let g = Graph::parse_edge_list("# comment\n0 1\n1 2 # trailing comment\n\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(Graph::parse_edge_list("0 1 2").is_err());
        assert!(Graph::parse_edge_list("0\n").is_err());
    }

    #[test]
    fn edge_distance_symmetric_small() {
        let (g, _, _, _) = two_ring_graph();
        for e in 0..g.edge_count() {
            for f in 0..g.edge_count() {
                assert_eq!(
                    g.edge_distance(e, f).unwrap(),
                    g.edge_distance(f, e).unwrap()
                );
            }
        }
    }
}
