//! Multigraphs with loops, and the contraction operator Γ(H, S).

use crate::error::{invalid, Result};
use crate::graph::{Graph, WalkGraph};
use crate::vertex_set::VertexSet;

/// Bookkeeping left behind by a contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    /// Index of the contracted vertex γ in the new graph.
    pub gamma: u32,
    /// Original vertex -> new vertex (members of S map to γ).
    pub vertex_map: Vec<u32>,
    /// The contracted set, in increasing order of original id.
    pub members: Vec<u32>,
}

/// Undirected multigraph. A loop `(v, v)` is one edge and adds 2 to the
/// degree of `v`; a walker that takes it stays at `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    endpoints: Vec<u32>,
    loops: Vec<u32>,
    contraction: Option<Contraction>,
}

impl MultiGraph {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<MultiGraph> {
        if n == 0 {
            return Err(invalid("multigraph needs at least one vertex"));
        }
        if let Some(&(u, v)) = edges
            .iter()
            .find(|(u, v)| *u as usize >= n || *v as usize >= n)
        {
            return Err(invalid(format!("edge ({u}, {v}) out of range 0..{n}")));
        }
        Ok(MultiGraph::build(n, edges.to_vec(), None))
    }

    pub fn from_graph(g: &Graph) -> MultiGraph {
        MultiGraph::build(g.n(), g.edges().collect(), None)
    }

    fn build(n: usize, edges: Vec<(u32, u32)>, contraction: Option<Contraction>) -> MultiGraph {
        let mut degree = vec![0usize; n];
        let mut loops = vec![0u32; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
            if u == v {
                loops[u as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for deg in &degree {
            offsets.push(offsets.last().unwrap() + deg);
        }
        let mut fill = offsets[..n].to_vec();
        let mut endpoints = vec![0u32; offsets[n]];
        for &(u, v) in &edges {
            endpoints[fill[u as usize]] = v;
            fill[u as usize] += 1;
            endpoints[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        MultiGraph {
            n,
            edges,
            offsets,
            endpoints,
            loops,
            contraction,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn loops(&self, v: u32) -> u32 {
        self.loops[v as usize]
    }

    /// Number of parallel edges between `u` and `v`; loops when `u == v`.
    pub fn multiplicity(&self, u: u32, v: u32) -> usize {
        if u == v {
            return self.loops(u) as usize;
        }
        self.endpoints_of(u).iter().filter(|&&w| w == v).count()
    }

    pub fn endpoints_of(&self, v: u32) -> &[u32] {
        &self.endpoints[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn contraction(&self) -> Option<&Contraction> {
        self.contraction.as_ref()
    }

    /// γ, if this graph came out of a contraction.
    pub fn gamma(&self) -> Option<u32> {
        self.contraction.as_ref().map(|c| c.gamma)
    }

    /// Contract `set` to a vertex γ. Vertices outside `set` keep their relative
    /// order and γ is numbered last. Every edge is kept: edges inside `set`
    /// become loops at γ, edges leaving it become (possibly parallel) γ-edges.
    pub fn contract(&self, set: &VertexSet) -> Result<MultiGraph> {
        if set.universe() != self.n {
            return Err(invalid(format!(
                "set universe {} does not match graph order {}",
                set.universe(),
                self.n
            )));
        }
        if set.is_empty() || set.len() == self.n {
            return Err(invalid("contracted set must be nonempty and proper"));
        }
        let gamma = (self.n - set.len()) as u32;
        let mut vertex_map = vec![gamma; self.n];
        let mut next = 0u32;
        for (v, slot) in vertex_map.iter_mut().enumerate() {
            if !set.contains(v as u32) {
                *slot = next;
                next += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (vertex_map[u as usize], vertex_map[v as usize]))
            .collect();
        let contraction = Contraction {
            gamma,
            vertex_map,
            members: set.to_vec(),
        };
        Ok(MultiGraph::build(
            gamma as usize + 1,
            edges,
            Some(contraction),
        ))
    }
}

impl WalkGraph for MultiGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    #[inline]
    fn endpoint(&self, v: u32, slot: usize) -> u32 {
        self.endpoints[self.offsets[v as usize] + slot]
    }

    fn total_degree(&self) -> usize {
        self.endpoints.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triangle_contraction() {
        let tri = MultiGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let gamma_graph = tri.contract(&VertexSet::from_vertices(3, [0, 1])).unwrap();
        let gamma = gamma_graph.gamma().unwrap();
        let c = gamma_graph.contraction().unwrap().vertex_map[2];
        assert_eq!(gamma_graph.vertex_count(), 2);
        assert_eq!(gamma_graph.edge_count(), 3);
        assert_eq!(gamma_graph.loops(gamma), 1);
        assert_eq!(gamma_graph.multiplicity(gamma, c), 2);
        assert_eq!(gamma_graph.degree(gamma), 4);
    }

    #[test]
    fn path_contraction_has_no_loop() {
        let path = MultiGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let gamma_graph = path.contract(&VertexSet::from_vertices(3, [0, 2])).unwrap();
        let gamma = gamma_graph.gamma().unwrap();
        let b = gamma_graph.contraction().unwrap().vertex_map[1];
        assert_eq!(gamma_graph.loops(gamma), 0);
        assert_eq!(gamma_graph.multiplicity(gamma, b), 2);
        assert_eq!(gamma_graph.edge_count(), 2);
    }

    #[test]
    fn closed_neighbourhood_in_q4() {
        let q4 = Graph::hypercube(4).unwrap();
        let v = 5u32;
        let set = VertexSet::from_vertices(16, std::iter::once(v).chain(q4.neighbors(v)));
        let gamma_graph = q4.contract(&set).unwrap();
        let gamma = gamma_graph.gamma().unwrap();
        // d(d+1) endpoints: 4 loops (edges v-N(v)) twice each plus 12 outgoing edges
        assert_eq!(gamma_graph.degree(gamma), 4 * 5);
        assert_eq!(
            gamma_graph.loops(gamma) as usize,
            q4.induced_edge_count(&set)
        );
        assert_eq!(gamma_graph.edge_count(), q4.edge_count());
    }

    #[test]
    fn contract_rejects_trivial_sets() {
        let q2 = Graph::hypercube(2).unwrap();
        assert!(q2.contract(&VertexSet::empty(4)).is_err());
        assert!(q2.contract(&VertexSet::full(4)).is_err());
        assert!(q2.contract(&VertexSet::empty(5)).is_err());
    }

    proptest! {
        #[test]
        fn contraction_preserves_edges_and_degree(
            seed in 0u64..1000,
            picks in proptest::collection::vec(0u32..40, 1..12),
        ) {
            let g = Graph::random_regular(40, 4, seed).unwrap();
            let set = VertexSet::from_vertices(40, picks);
            prop_assume!(set.len() < 40);
            let gamma_graph = g.contract(&set).unwrap();
            let gamma = gamma_graph.gamma().unwrap();
            prop_assert_eq!(gamma_graph.edge_count(), g.edge_count());
            prop_assert_eq!(gamma_graph.total_degree(), g.total_degree());
            prop_assert_eq!(gamma_graph.degree(gamma), g.d() * set.len());
            prop_assert_eq!(gamma_graph.loops(gamma) as usize, g.induced_edge_count(&set));
            prop_assert_eq!(gamma_graph.vertex_count(), 40 - set.len() + 1);
        }
    }
}
