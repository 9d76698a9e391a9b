//! Undirected weighted graph in CSR form.

use crate::scalar::{from_usize, Weight};

/// Immutable undirected graph with real-valued edge weights `ω` and vertex
/// weights `c`, stored as a CSR adjacency.
///
/// Invariants upheld by the constructors:
/// - adjacency is symmetric: every edge appears once per endpoint with the
///   same weight,
/// - no self-loops, no parallel entries,
/// - the adjacency lists are sorted by neighbor id,
/// - the sum of adjacency list lengths equals `2 * edge_count()`.
#[derive(Clone, Debug)]
pub struct Graph<S> {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_weights: Vec<S>,
    vertex_weights: Vec<S>,
    m: usize,
}

impl<S: Weight> Graph<S> {
    /// Builds a graph from a list of unique undirected edges `(u, v, ω)`.
    ///
    /// Panics on self-loops, duplicate edges or out-of-range endpoints; this
    /// constructor is for callers that already hold a clean edge list (model
    /// building, tests). File input goes through [`crate::io::load_graph`],
    /// which merges and validates instead of panicking.
    pub fn from_edges(n: usize, edges: &[(usize, usize, S)], vertex_weights: Vec<S>) -> Self {
        assert_eq!(vertex_weights.len(), n, "vertex weight per vertex");
        let mut adj: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            assert!(u < n && v < n, "edge endpoint out of range");
            assert_ne!(u, v, "self-loop");
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * edges.len());
        let mut edge_weights = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
            for win in list.windows(2) {
                assert_ne!(win[0].0, win[1].0, "parallel edge");
            }
            for &(v, w) in list.iter() {
                targets.push(v);
                edge_weights.push(w);
            }
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            edge_weights,
            vertex_weights,
            m: edges.len(),
        }
    }

    /// Unit-weight convenience constructor.
    pub fn unit_from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let weighted: Vec<(usize, usize, S)> =
            edges.iter().map(|&(u, v)| (u, v, S::one())).collect();
        Self::from_edges(n, &weighted, vec![S::one(); n])
    }

    pub(crate) fn from_csr(
        offsets: Vec<usize>,
        targets: Vec<usize>,
        edge_weights: Vec<S>,
        vertex_weights: Vec<S>,
        m: usize,
    ) -> Self {
        Graph {
            offsets,
            targets,
            edge_weights,
            vertex_weights,
            m,
        }
    }

    /// Number of vertices `n`.
    pub fn vertex_count(&self) -> usize {
        self.vertex_weights.len()
    }

    /// Number of undirected edges `m`.
    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbors of `v` with edge weights, ascending by neighbor id.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.edge_weights[range].iter().copied())
    }

    pub fn vertex_weight(&self, v: usize) -> S {
        self.vertex_weights[v]
    }

    pub fn vertex_weights(&self) -> &[S] {
        &self.vertex_weights
    }

    /// Total vertex weight `c(V)`, summed in vertex order.
    pub fn total_vertex_weight(&self) -> S {
        self.vertex_weights.iter().copied().sum()
    }

    /// Iterates every undirected edge once as `(u, v, ω)` with `u < v`,
    /// ascending by `(u, v)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }
}

/// Total weight of edges whose endpoints lie in different blocks; each
/// undirected edge is counted once.
pub fn cut_value<S: Weight>(g: &Graph<S>, assignment: &[usize]) -> S {
    debug_assert_eq!(assignment.len(), g.vertex_count());
    let mut cut = S::zero();
    for (u, v, w) in g.edges() {
        if assignment[u] != assignment[v] {
            cut = cut + w;
        }
    }
    cut
}

/// Balance bound `L_max = (1+ε)·⌈c(V)/k⌉`; the ceiling applies to `c(V)/k`
/// before multiplying.
pub fn l_max<S: Weight>(g: &Graph<S>, k: usize, epsilon: S) -> S {
    l_max_from_total(g.total_vertex_weight(), k, epsilon)
}

pub fn l_max_from_total<S: Weight>(total: S, k: usize, epsilon: S) -> S {
    assert!(k >= 2, "at least two blocks");
    assert!(epsilon >= S::zero(), "imbalance must be non-negative");
    (S::one() + epsilon) * (total / from_usize(k)).ceil()
}
