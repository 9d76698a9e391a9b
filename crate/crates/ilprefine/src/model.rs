//! Coarse model: per block, every vertex not in the kept set is contracted
//! into one super-vertex, so a model partition maps back to an input
//! partition with the same cut and block weights.

use std::collections::HashMap;
use std::io;
use std::path::Path;

use crate::graph::Graph;
use crate::partition::Partition;
use crate::scalar::Weight;

/// The contracted graph plus everything needed to map solutions back.
///
/// Model vertex ids: super-vertices `μ_0..μ_{k-1}` take ids `0..k` (so
/// "block i ↔ μ_i" is positional), kept vertices follow in insertion order.
/// Blocks whose interior is empty still get a super-vertex of weight 0.
#[derive(Clone, Debug)]
pub struct CoarseModel<S> {
    graph: Graph<S>,
    k: usize,
    kept: Vec<usize>,
    kept_model_id: HashMap<usize, usize>,
    interior_members: Vec<Vec<usize>>,
    origin_partition: Partition<S>,
    origin_total_weight: S,
}

impl<S: Weight> CoarseModel<S> {
    pub fn graph(&self) -> &Graph<S> {
        &self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Kept original vertex ids; index `i` is model vertex `k + i`.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn model_id_of(&self, original: usize) -> Option<usize> {
        self.kept_model_id.get(&original).copied()
    }

    /// Original vertices contracted into `μ_i`.
    pub fn interior_members(&self, block: usize) -> &[usize] {
        &self.interior_members[block]
    }

    pub fn origin_partition(&self) -> &Partition<S> {
        &self.origin_partition
    }

    /// Total vertex weight of the input graph, for the balance bound.
    pub fn origin_total_weight(&self) -> S {
        self.origin_total_weight
    }

    /// The input partition expressed over model vertices: `μ_i → i`, kept
    /// vertices keep their input block. Same cut and block weights as the
    /// input partition.
    pub fn induced_model_partition(&self) -> Vec<usize> {
        let mut assignment = Vec::with_capacity(self.graph.vertex_count());
        assignment.extend(0..self.k);
        assignment.extend(self.kept.iter().map(|&v| self.origin_partition.block_of(v)));
        assignment
    }

    /// Maps a model assignment back to the input graph: interior vertices
    /// follow their super-vertex, kept vertices their own model block.
    pub fn project_solution(&self, g: &Graph<S>, model_assignment: &[usize]) -> Partition<S> {
        assert_eq!(model_assignment.len(), self.graph.vertex_count());
        let mut assignment = vec![0usize; g.vertex_count()];
        for (block, members) in self.interior_members.iter().enumerate() {
            for &v in members {
                assignment[v] = model_assignment[block];
            }
        }
        for (idx, &v) in self.kept.iter().enumerate() {
            assignment[v] = model_assignment[self.k + idx];
        }
        Partition::new(g, self.k, self.origin_partition.epsilon(), assignment)
            .expect("projected assignment uses valid block ids")
    }

    /// Debug dump: the model in METIS format plus a sidecar mapping file
    /// (one line per model vertex: `mu:<i>` or the original vertex id).
    pub fn write_debug_dump(&self, graph_path: &Path, map_path: &Path) -> io::Result<()> {
        crate::io::write_graph_file(&self.graph, graph_path)?;
        let mut map = String::new();
        for i in 0..self.k {
            map.push_str(&format!("mu:{i}\n"));
        }
        for &v in &self.kept {
            map.push_str(&format!("{v}\n"));
        }
        std::fs::write(map_path, map)
    }
}

/// Contracts `V_i \ K` of every block into `μ_i`.
///
/// Model edge weights are the summed weights of the original edges between
/// the corresponding vertex sets; edges internal to a contracted set vanish.
pub fn build_model<S: Weight>(g: &Graph<S>, p: &Partition<S>, kept: &[usize]) -> CoarseModel<S> {
    let k = p.k();
    let n = g.vertex_count();
    let mut kept_model_id = HashMap::with_capacity(kept.len());
    for (idx, &v) in kept.iter().enumerate() {
        assert!(v < n, "kept vertex out of range");
        let prev = kept_model_id.insert(v, k + idx);
        assert!(prev.is_none(), "kept vertex listed twice");
    }

    let mut interior_members: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut super_weights = vec![S::zero(); k];
    for v in 0..n {
        if !kept_model_id.contains_key(&v) {
            let b = p.block_of(v);
            interior_members[b].push(v);
            super_weights[b] = super_weights[b] + g.vertex_weight(v);
        }
    }

    // Accumulate model edges by group. Existence is tracked separately from
    // weight so zero-weight input edges still produce model edges.
    let mut ss_weight = vec![S::zero(); k * k];
    let mut ss_count = vec![0u64; k * k];
    let mut ks_weight = vec![S::zero(); kept.len() * k];
    let mut ks_count = vec![0u64; kept.len() * k];
    let mut kk_edges: Vec<(usize, usize, S)> = Vec::new();
    for (u, v, w) in g.edges() {
        match (kept_model_id.get(&u), kept_model_id.get(&v)) {
            (Some(&mu), Some(&mv)) => {
                let (a, b) = if mu < mv { (mu, mv) } else { (mv, mu) };
                kk_edges.push((a, b, w));
            }
            (Some(&mu), None) => {
                let slot = (mu - k) * k + p.block_of(v);
                ks_weight[slot] = ks_weight[slot] + w;
                ks_count[slot] += 1;
            }
            (None, Some(&mv)) => {
                let slot = (mv - k) * k + p.block_of(u);
                ks_weight[slot] = ks_weight[slot] + w;
                ks_count[slot] += 1;
            }
            (None, None) => {
                let (bu, bv) = (p.block_of(u), p.block_of(v));
                if bu != bv {
                    let slot = bu.min(bv) * k + bu.max(bv);
                    ss_weight[slot] = ss_weight[slot] + w;
                    ss_count[slot] += 1;
                }
            }
        }
    }

    let mut edges: Vec<(usize, usize, S)> = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            if ss_count[i * k + j] > 0 {
                edges.push((i, j, ss_weight[i * k + j]));
            }
        }
    }
    for idx in 0..kept.len() {
        for b in 0..k {
            if ks_count[idx * k + b] > 0 {
                edges.push((b, k + idx, ks_weight[idx * k + b]));
            }
        }
    }
    edges.extend(kk_edges);
    edges.sort_by_key(|&(a, b, _)| (a, b));

    let mut vertex_weights = super_weights;
    vertex_weights.extend(kept.iter().map(|&v| g.vertex_weight(v)));
    let graph = Graph::from_edges(k + kept.len(), &edges, vertex_weights);

    CoarseModel {
        graph,
        k,
        kept: kept.to_vec(),
        kept_model_id,
        interior_members,
        origin_partition: p.clone(),
        origin_total_weight: g.total_vertex_weight(),
    }
}
