//! Regular graphs, distances and neighbour geometry.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::multigraph::MultiGraph;
use crate::rng::stream_rng;
use crate::vertex_set::VertexSet;

pub const MAX_HYPERCUBE_DIM: usize = 30;

/// Default number of full restarts the configuration model may take.
pub const DEFAULT_SAMPLING_BUDGET: usize = 100_000;

// Graph sampling draws from a stream no trial index can reach.
const GRAPH_STREAM: u64 = u64::MAX;

/// Anything a lazy walker can move on: a vertex count and, per vertex, a list
/// of edge endpoints. A loop contributes its vertex twice.
pub trait WalkGraph: Sync {
    fn vertex_count(&self) -> usize;

    /// Number of edge endpoints at `v` (loops count twice).
    fn degree(&self, v: u32) -> usize;

    /// The `slot`-th endpoint adjacent to `v`, `slot < degree(v)`.
    fn endpoint(&self, v: u32, slot: usize) -> u32;

    /// Sum of all degrees, i.e. twice the edge count.
    fn total_degree(&self) -> usize {
        (0..self.vertex_count() as u32)
            .map(|v| self.degree(v))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Hypercube,
    RandomRegular,
    Explicit,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Hypercube => "hypercube",
            GraphKind::RandomRegular => "random-regular",
            GraphKind::Explicit => "explicit",
        })
    }
}

/// Graph distance; `Infinite` marks a disconnected pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(k) => Some(k),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(k) => write!(f, "{k}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// Immutable simple d-regular graph on vertices `0..n`.
///
/// The hypercube keeps no table: slot `i` of `v` is `v ^ (1 << i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    d: usize,
    kind: GraphKind,
    table: Vec<u32>,
}

impl Graph {
    pub fn hypercube(d: usize) -> Result<Graph> {
        if !(1..=MAX_HYPERCUBE_DIM).contains(&d) {
            return Err(invalid(format!(
                "hypercube dimension {d} outside 1..={MAX_HYPERCUBE_DIM}"
            )));
        }
        Ok(Graph {
            n: 1 << d,
            d,
            kind: GraphKind::Hypercube,
            table: Vec::new(),
        })
    }

    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
        Graph::random_regular_with_budget(n, d, seed, DEFAULT_SAMPLING_BUDGET)
    }

    /// Configuration model: shuffle `n·d` stubs, pair them off, and restart
    /// from scratch whenever a loop or a repeated edge appears.
    pub fn random_regular_with_budget(
        n: usize,
        d: usize,
        seed: u64,
        budget: usize,
    ) -> Result<Graph> {
        if d == 0 || d >= n {
            return Err(invalid(format!("need 1 <= d < n, got n={n}, d={d}")));
        }
        if (n * d) % 2 == 1 {
            return Err(invalid(format!("n·d must be even, got n={n}, d={d}")));
        }
        if n > u32::MAX as usize {
            return Err(invalid(format!("n={n} too large")));
        }
        let mut rng = stream_rng(seed, GRAPH_STREAM);
        let mut stubs: Vec<u32> = (0..n as u32)
            .flat_map(|v| std::iter::repeat_n(v, d))
            .collect();
        let mut fill = vec![0usize; n];
        let mut table = vec![0u32; n * d];
        'attempt: for _ in 0..budget {
            stubs.shuffle(&mut rng);
            fill.iter_mut().for_each(|f| *f = 0);
            for pair in stubs.chunks_exact(2) {
                let (a, b) = (pair[0], pair[1]);
                if a == b {
                    continue 'attempt;
                }
                let (ai, bi) = (a as usize, b as usize);
                if table[ai * d..ai * d + fill[ai]].contains(&b) {
                    continue 'attempt;
                }
                table[ai * d + fill[ai]] = b;
                fill[ai] += 1;
                table[bi * d + fill[bi]] = a;
                fill[bi] += 1;
            }
            for row in table.chunks_exact_mut(d) {
                row.sort_unstable();
            }
            return Ok(Graph {
                n,
                d,
                kind: GraphKind::RandomRegular,
                table,
            });
        }
        Err(Error::SamplingFailure { attempts: budget })
    }

    /// Build from explicit neighbour lists. Lists must describe a simple
    /// regular graph: equal lengths, symmetric, no loops, no repeats.
    pub fn from_adjacency(lists: &[Vec<u32>]) -> Result<Graph> {
        let n = lists.len();
        if n == 0 {
            return Err(invalid("empty graph"));
        }
        let d = lists[0].len();
        if d == 0 {
            return Err(invalid("degree must be positive"));
        }
        let mut table = Vec::with_capacity(n * d);
        for (v, list) in lists.iter().enumerate() {
            if list.len() != d {
                return Err(invalid(format!(
                    "vertex {v} has degree {}, expected {d}",
                    list.len()
                )));
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            for (i, &w) in sorted.iter().enumerate() {
                if w as usize >= n {
                    return Err(invalid(format!("neighbour {w} of {v} out of range")));
                }
                if w as usize == v {
                    return Err(invalid(format!("loop at {v}")));
                }
                if i > 0 && sorted[i - 1] == w {
                    return Err(invalid(format!("repeated edge {v}-{w}")));
                }
                if !lists[w as usize].contains(&(v as u32)) {
                    return Err(invalid(format!("edge {v}-{w} not symmetric")));
                }
            }
            table.extend(sorted);
        }
        Ok(Graph {
            n,
            d,
            kind: GraphKind::Explicit,
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn is_hypercube(&self) -> bool {
        self.kind == GraphKind::Hypercube
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    #[inline]
    pub fn neighbor(&self, v: u32, slot: usize) -> u32 {
        debug_assert!(slot < self.d);
        match self.kind {
            GraphKind::Hypercube => v ^ (1 << slot),
            _ => self.table[v as usize * self.d + slot],
        }
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.d).map(move |i| self.neighbor(v, i))
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        match self.kind {
            GraphKind::Hypercube => (u ^ v).count_ones() == 1,
            _ => {
                let row = &self.table[u as usize * self.d..(u as usize + 1) * self.d];
                row.binary_search(&v).is_ok()
            }
        }
    }

    /// Unordered edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n as u32).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&w| u < w)
                .map(move |w| (u, w))
        })
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(invalid(format!("vertex {v} out of range 0..{}", self.n)))
        }
    }

    /// Distances from `src` to every vertex. Hamming weights on the hypercube,
    /// BFS otherwise.
    pub fn distances_from(&self, src: u32) -> Vec<Distance> {
        if self.is_hypercube() {
            (0..self.n as u32)
                .map(|v| Distance::Finite((v ^ src).count_ones()))
                .collect()
        } else {
            bfs_distances(self, src)
        }
    }

    pub fn distance(&self, u: u32, v: u32) -> Result<Distance> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if self.is_hypercube() {
            return Ok(Distance::Finite((u ^ v).count_ones()));
        }
        Ok(bfs_distances(self, u)[v as usize])
    }

    /// ν(u, v): neighbours `w` of `v` with `dist(w, u) <= dist(u, v)`.
    pub fn closer_neighbor_count(&self, u: u32, v: u32) -> Result<usize> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(invalid("closer-neighbour count needs u != v"));
        }
        if self.is_hypercube() {
            let k = (u ^ v).count_ones();
            return Ok(self
                .neighbors(v)
                .filter(|&w| (w ^ u).count_ones() <= k)
                .count());
        }
        Ok(self.closer_neighbor_count_from(&bfs_distances(self, u), v))
    }

    /// ν(u, v) given precomputed distances from `u`.
    pub fn closer_neighbor_count_from(&self, dist_from_u: &[Distance], v: u32) -> usize {
        let target = dist_from_u[v as usize];
        self.neighbors(v)
            .filter(|&w| dist_from_u[w as usize] <= target)
            .count()
    }

    /// e(S): edges with both endpoints in `set`.
    pub fn induced_edge_count(&self, set: &VertexSet) -> usize {
        let twice: usize = set
            .iter()
            .map(|v| self.neighbors(v).filter(|&w| set.contains(w)).count())
            .sum();
        twice / 2
    }

    /// e(S) for a small explicit vertex list (duplicates ignored).
    pub fn induced_edge_count_of(&self, vertices: &[u32]) -> usize {
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut count = 0;
        for (i, &u) in sorted.iter().enumerate() {
            for &w in &sorted[i + 1..] {
                if self.has_edge(u, w) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Contract `set` to a single vertex, keeping every edge.
    pub fn contract(&self, set: &VertexSet) -> Result<MultiGraph> {
        MultiGraph::from_graph(self).contract(set)
    }
}

impl WalkGraph for Graph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    fn degree(&self, _v: u32) -> usize {
        self.d
    }

    #[inline]
    fn endpoint(&self, v: u32, slot: usize) -> u32 {
        self.neighbor(v, slot)
    }

    fn total_degree(&self) -> usize {
        self.n * self.d
    }
}

/// Breadth-first distances over edge endpoints.
pub fn bfs_distances<G: WalkGraph + ?Sized>(g: &G, src: u32) -> Vec<Distance> {
    let mut dist = vec![Distance::Infinite; g.vertex_count()];
    dist[src as usize] = Distance::Finite(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let Distance::Finite(du) = dist[u as usize] else {
            unreachable!()
        };
        for slot in 0..g.degree(u) {
            let w = g.endpoint(u, slot);
            if dist[w as usize] == Distance::Infinite {
                dist[w as usize] = Distance::Finite(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Whether every vertex is reachable from vertex 0.
pub fn is_connected<G: WalkGraph + ?Sized>(g: &G) -> bool {
    g.vertex_count() == 0 || bfs_distances(g, 0).iter().all(|d| *d != Distance::Infinite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_simple_regular(g: &Graph) {
        for v in 0..g.n() as u32 {
            let mut nbrs: Vec<u32> = g.neighbors(v).collect();
            assert_eq!(nbrs.len(), g.d());
            assert!(!nbrs.contains(&v), "loop at {v}");
            nbrs.sort_unstable();
            nbrs.dedup();
            assert_eq!(nbrs.len(), g.d(), "repeated neighbour at {v}");
            for w in nbrs {
                assert!(g.neighbors(w).any(|x| x == v), "asymmetric {v}-{w}");
            }
        }
    }

    #[test]
    fn hypercube_small_cases() {
        let q3 = Graph::hypercube(3).unwrap();
        assert_eq!(q3.n(), 8);
        let mut n0: Vec<u32> = q3.neighbors(0).collect();
        n0.sort_unstable();
        assert_eq!(n0, vec![1, 2, 4]);

        let q1 = Graph::hypercube(1).unwrap();
        assert_eq!(q1.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn hypercube_regular_and_symmetric() {
        assert_simple_regular(&Graph::hypercube(10).unwrap());
    }

    #[test]
    fn hypercube_dimension_range() {
        assert!(matches!(
            Graph::hypercube(0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Graph::hypercube(31),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn random_regular_k4_is_unique() {
        let g = Graph::random_regular(4, 3, 11).unwrap();
        for v in 0..4u32 {
            let nbrs: Vec<u32> = g.neighbors(v).collect();
            let expected: Vec<u32> = (0..4).filter(|&w| w != v).collect();
            assert_eq!(nbrs, expected);
        }
    }

    #[test]
    fn random_regular_deterministic_and_simple() {
        let a = Graph::random_regular(10, 3, 1).unwrap();
        let b = Graph::random_regular(10, 3, 1).unwrap();
        assert_eq!(a, b);
        assert_simple_regular(&a);
        for seed in 0..20 {
            assert_simple_regular(&Graph::random_regular(64, 5, seed).unwrap());
        }
    }

    #[test]
    fn random_regular_rejects_bad_parameters() {
        assert!(matches!(
            Graph::random_regular(5, 3, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Graph::random_regular(4, 4, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Graph::random_regular_with_budget(200, 40, 0, 3),
            Err(Error::SamplingFailure { attempts: 3 })
        ));
    }

    #[test]
    fn random_regular_usually_connected() {
        let connected = (0..50)
            .filter(|&s| is_connected(&Graph::random_regular(100, 4, s).unwrap()))
            .count();
        assert!(connected >= 49, "{connected}/50 connected");
    }

    #[test]
    fn from_adjacency_validates() {
        let triangle = vec![vec![1, 2], vec![0, 2], vec![0, 1]];
        let g = Graph::from_adjacency(&triangle).unwrap();
        assert_eq!(g.kind(), GraphKind::Explicit);
        assert_eq!(g.edge_count(), 3);
        assert!(Graph::from_adjacency(&[vec![1], vec![1]]).is_err());
        assert!(Graph::from_adjacency(&[vec![1, 2], vec![0, 2], vec![1, 0, 2]]).is_err());
        assert!(Graph::from_adjacency(&[vec![1], vec![2], vec![0]]).is_err());
    }

    #[test]
    fn distances_on_q3() {
        let q3 = Graph::hypercube(3).unwrap();
        assert_eq!(q3.distance(0b000, 0b101).unwrap(), Distance::Finite(2));
        assert_eq!(q3.distance(5, 5).unwrap(), Distance::Finite(0));
        assert!(q3.distance(0, 8).is_err());
    }

    #[test]
    fn disconnected_pair_is_infinite() {
        // two disjoint triangles
        let lists = vec![
            vec![1, 2],
            vec![0, 2],
            vec![0, 1],
            vec![4, 5],
            vec![3, 5],
            vec![3, 4],
        ];
        let g = Graph::from_adjacency(&lists).unwrap();
        assert_eq!(g.distance(0, 4).unwrap(), Distance::Infinite);
        assert!(!is_connected(&g));
        assert!(Distance::Finite(u32::MAX) < Distance::Infinite);
    }

    #[test]
    fn closer_neighbours_on_hypercube() {
        let g = Graph::hypercube(9).unwrap();
        for k in 1..=9u32 {
            let u = (1u32 << k) - 1;
            assert_eq!(g.closer_neighbor_count(u, 0).unwrap(), k as usize);
        }
        assert_eq!(g.closer_neighbor_count(0, 1 << 4).unwrap(), 1);
        assert!(g.closer_neighbor_count(3, 3).is_err());
    }

    #[test]
    fn induced_edges() {
        let q10 = Graph::hypercube(10).unwrap();
        // subcube on coordinates 2, 5, 7 anchored at 0b1000000001
        let anchor = 0b10_0000_0001u32;
        let coords = [2, 5, 7];
        let verts: Vec<u32> = (0..8u32)
            .map(|m| {
                coords
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .fold(anchor, |acc, (_, &c)| acc ^ (1 << c))
            })
            .collect();
        let set = VertexSet::from_vertices(q10.n(), verts.iter().copied());
        assert_eq!(q10.induced_edge_count(&set), 12);
        assert_eq!(q10.induced_edge_count_of(&verts), 12);
        assert_eq!(
            q10.induced_edge_count(&VertexSet::from_vertices(q10.n(), [77])),
            0
        );

        let q3 = Graph::hypercube(3).unwrap();
        assert_eq!(q3.induced_edge_count(&VertexSet::full(8)), 12);
    }
}
