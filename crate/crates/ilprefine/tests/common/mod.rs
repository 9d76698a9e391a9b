//! Shared generators and independent oracles for the integration suites.
//! Not every suite uses every helper.
#![allow(dead_code)]

use ilprefine::graph::{l_max, Graph};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Seeded G(n, p) with weights drawn from `1..=max_weight` (1 = unit).
pub fn gnp_graph(seed: u64, n: usize, p: f64, max_weight: u64) -> Graph<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                let w = if max_weight <= 1 {
                    1.0
                } else {
                    rng.gen_range(1..=max_weight) as f64
                };
                edges.push((u, v, w));
            }
        }
    }
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            if max_weight <= 1 {
                1.0
            } else {
                rng.gen_range(1..=3) as f64
            }
        })
        .collect();
    Graph::from_edges(n, &edges, weights)
}

/// Two-dimensional grid graph, a stand-in for mesh-like benchmark
/// instances.
pub fn grid_graph(rows: usize, cols: usize) -> Graph<f64> {
    let idx = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((idx(r, c), idx(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((idx(r, c), idx(r + 1, c)));
            }
        }
    }
    Graph::unit_from_edges(rows * cols, &edges)
}

/// Minimum balanced cut by plain enumeration of all `k^n` assignments;
/// independent of the solver and model machinery. `None` when no balanced
/// assignment exists.
pub fn brute_force_min_cut(g: &Graph<f64>, k: usize, eps: f64) -> Option<f64> {
    let n = g.vertex_count();
    let bound = l_max(g, k, eps);
    let mut assignment = vec![0usize; n];
    let mut best: Option<f64> = None;
    loop {
        let mut weights = vec![0.0f64; k];
        for v in 0..n {
            weights[assignment[v]] += g.vertex_weight(v);
        }
        if weights.iter().all(|&w| w <= bound) {
            let mut cut = 0.0;
            for (u, v, w) in g.edges() {
                if assignment[u] != assignment[v] {
                    cut += w;
                }
            }
            if best.is_none_or(|b| cut < b) {
                best = Some(cut);
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                break;
            }
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    best
}
