//! Block assignments with cached block weights and cut value.

use thiserror::Error;

use crate::graph::{cut_value, l_max, Graph};
use crate::scalar::Weight;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("assignment has {got} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vertex {vertex} assigned block {block}, but k = {k}")]
    BlockOutOfRange {
        vertex: usize,
        block: usize,
        k: usize,
    },
}

/// A k-way partition of a graph's vertices.
///
/// Block weights and the cut are cached and kept consistent with the
/// assignment through [`Partition::move_vertex`]; both can always be
/// recomputed exactly from the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<S> {
    k: usize,
    epsilon: S,
    assignment: Vec<usize>,
    block_weights: Vec<S>,
    cut: S,
}

impl<S: Weight> Partition<S> {
    pub fn new(
        g: &Graph<S>,
        k: usize,
        epsilon: S,
        assignment: Vec<usize>,
    ) -> Result<Self, PartitionError> {
        if assignment.len() != g.vertex_count() {
            return Err(PartitionError::LengthMismatch {
                expected: g.vertex_count(),
                got: assignment.len(),
            });
        }
        for (vertex, &block) in assignment.iter().enumerate() {
            if block >= k {
                return Err(PartitionError::BlockOutOfRange { vertex, block, k });
            }
        }
        let mut block_weights = vec![S::zero(); k];
        for (v, &b) in assignment.iter().enumerate() {
            block_weights[b] = block_weights[b] + g.vertex_weight(v);
        }
        let cut = cut_value(g, &assignment);
        Ok(Partition {
            k,
            epsilon,
            assignment,
            block_weights,
            cut,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> S {
        self.epsilon
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_weights(&self) -> &[S] {
        &self.block_weights
    }

    pub fn max_block_weight(&self) -> S {
        self.block_weights
            .iter()
            .copied()
            .fold(S::zero(), |acc, w| if w > acc { w } else { acc })
    }

    /// Cached total weight of cut edges.
    pub fn cut(&self) -> S {
        self.cut
    }

    /// True iff no block is overloaded: `max_i c(V_i) ≤ L_max` (non-strict).
    pub fn is_balanced(&self, g: &Graph<S>) -> bool {
        self.max_block_weight() <= l_max(g, self.k, self.epsilon)
    }

    /// Vertices incident to at least one vertex in a different block,
    /// ascending by id.
    pub fn boundary_vertices(&self, g: &Graph<S>) -> Vec<usize> {
        (0..g.vertex_count())
            .filter(|&v| {
                g.neighbors(v)
                    .any(|(u, _)| self.assignment[u] != self.assignment[v])
            })
            .collect()
    }

    /// Gain of moving `v` to its best other block: the decrease in cut value,
    /// together with the achieving block.
    ///
    /// Candidate blocks are those containing at least one neighbor of `v`;
    /// ties are broken by the smallest block id. An interior vertex (no
    /// neighbor outside its own block... including the isolated case) has no
    /// candidate and yields `(-ω(v→own block), None)`. Gains may be negative.
    pub fn gain(&self, g: &Graph<S>, v: usize) -> (S, Option<usize>) {
        let own = self.assignment[v];
        let mut to_block = vec![S::zero(); self.k];
        let mut seen = vec![false; self.k];
        for (u, w) in g.neighbors(v) {
            let b = self.assignment[u];
            to_block[b] = to_block[b] + w;
            seen[b] = true;
        }
        let mut best: Option<(S, usize)> = None;
        for b in 0..self.k {
            if b == own || !seen[b] {
                continue;
            }
            let gain = to_block[b] - to_block[own];
            match best {
                Some((g0, _)) if g0 >= gain => {}
                _ => best = Some((gain, b)),
            }
        }
        match best {
            Some((gain, b)) => (gain, Some(b)),
            None => (-to_block[own], None),
        }
    }

    /// Moves `v` to block `to`, updating block weights and cut incrementally.
    pub fn move_vertex(&mut self, g: &Graph<S>, v: usize, to: usize) {
        assert!(to < self.k);
        let from = self.assignment[v];
        if from == to {
            return;
        }
        let mut w_from = S::zero();
        let mut w_to = S::zero();
        for (u, w) in g.neighbors(v) {
            if self.assignment[u] == from {
                w_from = w_from + w;
            } else if self.assignment[u] == to {
                w_to = w_to + w;
            }
        }
        // Edges into the old block become cut, edges into the target stop
        // being cut.
        self.cut = self.cut + w_from - w_to;
        self.block_weights[from] = self.block_weights[from] - g.vertex_weight(v);
        self.block_weights[to] = self.block_weights[to] + g.vertex_weight(v);
        self.assignment[v] = to;
    }

    /// Recomputes the caches from scratch; test helper for the consistency
    /// invariants.
    pub fn recomputed(&self, g: &Graph<S>) -> Self {
        Partition::new(g, self.k, self.epsilon, self.assignment.clone()).unwrap()
    }
}
