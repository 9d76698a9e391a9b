//! Strategies for choosing the kept vertex set `K` under a budget on the
//! non-zero count of the resulting binary program.
//!
//! All strategies grow `K` one vertex at a time and stop *before* the first
//! insertion that would push the program past the budget, so the emitted
//! model always respects it.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::partition::Partition;
use crate::scalar::{from_f64, Weight};

/// How the kept set is grown.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategyKind {
    /// All boundary vertices in seeded random order; if they all fit, a BFS
    /// over the remaining graph keeps adding vertices.
    Boundary,
    /// BFS initialized with every boundary vertex of gain ≥ ρ.
    Gain { rho: f64 },
    /// BFS balls of radius δ grown around boundary vertices in decreasing
    /// gain order.
    TopVertices { delta: usize },
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Boundary => write!(f, "boundary"),
            StrategyKind::Gain { rho } => write!(f, "gain:{rho}"),
            StrategyKind::TopVertices { delta } => write!(f, "topvertices:{delta}"),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if lower == "boundary" {
            return Ok(StrategyKind::Boundary);
        }
        if let Some(arg) = lower.strip_prefix("gain:") {
            let rho: f64 = arg
                .parse()
                .map_err(|_| format!("invalid gain threshold {arg:?}"))?;
            return Ok(StrategyKind::Gain { rho });
        }
        if let Some(arg) = lower.strip_prefix("topvertices:") {
            let delta: usize = arg
                .parse()
                .map_err(|_| format!("invalid ball radius {arg:?}"))?;
            if delta == 0 {
                return Err("ball radius must be at least 1".to_string());
            }
            return Ok(StrategyKind::TopVertices { delta });
        }
        Err(format!(
            "unknown strategy {s:?}; expected boundary, gain:<rho> or topvertices:<delta>"
        ))
    }
}

/// A selection strategy together with the non-zero budget and RNG seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionStrategy {
    pub kind: StrategyKind,
    pub nonzero_budget: u64,
    pub seed: u64,
}

/// The selected kept set, in insertion order.
#[derive(Clone, Debug)]
pub struct KeptSet {
    /// Kept vertices in insertion order; the model assigns them ids
    /// `k..k+|K|` in this order.
    pub vertices: Vec<usize>,
    /// Non-zero estimate of the model over the returned set, i.e. the size
    /// the budget check saw when the strategy stopped.
    pub nonzeros_at_stop: u64,
    pub strategy: SelectionStrategy,
}

/// Exact non-zero count `k·(6|E| + 2|V|)` of the basic binary program over
/// the coarse model induced by `kept`, where `|V| = k + |K|` and `|E|`
/// counts kept-kept edges, kept-to-super edges (one per distinct adjacent
/// super) and super-super edges.
pub fn estimate_nonzeros<S: Weight>(g: &Graph<S>, p: &Partition<S>, kept: &[usize]) -> u64 {
    let mut est = NonzeroEstimator::new(g, p);
    for &v in kept {
        est.insert(v);
    }
    est.nonzeros()
}

/// Runs the configured strategy.
pub fn select<S: Weight>(g: &Graph<S>, p: &Partition<S>, strategy: SelectionStrategy) -> KeptSet {
    match strategy.kind {
        StrategyKind::Boundary => select_boundary(g, p, strategy.nonzero_budget, strategy.seed),
        StrategyKind::Gain { rho } => {
            select_gain(g, p, rho, strategy.nonzero_budget, strategy.seed)
        }
        StrategyKind::TopVertices { delta } => {
            select_top_vertices(g, p, delta, strategy.nonzero_budget, strategy.seed)
        }
    }
}

/// `Boundary`: boundary vertices in seeded random order; once they all fit,
/// a BFS seeded with that permutation keeps adding newly reached vertices.
pub fn select_boundary<S: Weight>(
    g: &Graph<S>,
    p: &Partition<S>,
    nonzero_budget: u64,
    seed: u64,
) -> KeptSet {
    let strategy = SelectionStrategy {
        kind: StrategyKind::Boundary,
        nonzero_budget,
        seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boundary = p.boundary_vertices(g);
    boundary.shuffle(&mut rng);

    let mut growth = Growth::new(g, p, nonzero_budget, strategy);
    for &v in &boundary {
        if !growth.try_insert(v) {
            return growth.finish();
        }
    }

    // All boundary vertices fit: extend by BFS initialized with the same
    // permutation.
    let mut visited = vec![false; g.vertex_count()];
    let mut queue: VecDeque<usize> = VecDeque::with_capacity(boundary.len());
    for &v in &boundary {
        visited[v] = true;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        for (v, _) in g.neighbors(u) {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            if !growth.try_insert(v) {
                return growth.finish();
            }
            queue.push_back(v);
        }
    }
    growth.finish()
}

/// `Gain_ρ`: boundary vertices with gain ≥ ρ form the BFS frontier in
/// seeded random order; the frontier is inserted first, then the BFS adds
/// reached vertices level by level.
pub fn select_gain<S: Weight>(
    g: &Graph<S>,
    p: &Partition<S>,
    rho: f64,
    nonzero_budget: u64,
    seed: u64,
) -> KeptSet {
    if ![-2.0, -1.0, 0.0, 1.0].contains(&rho) {
        log::info!("gain selection with threshold {rho} outside the tuned range {{-2,-1,0,1}}");
    }
    let strategy = SelectionStrategy {
        kind: StrategyKind::Gain { rho },
        nonzero_budget,
        seed,
    };
    let rho_s: S = from_f64(rho);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frontier: Vec<usize> = p
        .boundary_vertices(g)
        .into_iter()
        .filter(|&v| p.gain(g, v).0 >= rho_s)
        .collect();
    frontier.shuffle(&mut rng);

    let mut growth = Growth::new(g, p, nonzero_budget, strategy);
    for &v in &frontier {
        if !growth.try_insert(v) {
            return growth.finish();
        }
    }

    let mut visited = vec![false; g.vertex_count()];
    let mut queue: VecDeque<usize> = VecDeque::with_capacity(frontier.len());
    for &v in &frontier {
        visited[v] = true;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        for (v, _) in g.neighbors(u) {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            if !growth.try_insert(v) {
                return growth.finish();
            }
            queue.push_back(v);
        }
    }
    growth.finish()
}

/// `TopVertices_δ`: boundary vertices sorted by gain descending (ties
/// shuffled by seed); each start contributes its BFS ball of unweighted
/// radius δ. A partially added ball keeps its inserted vertices when the
/// budget runs out.
pub fn select_top_vertices<S: Weight>(
    g: &Graph<S>,
    p: &Partition<S>,
    delta: usize,
    nonzero_budget: u64,
    seed: u64,
) -> KeptSet {
    assert!(delta >= 1, "ball radius must be at least 1");
    if !(1..=3).contains(&delta) {
        log::info!("top-vertices selection with radius {delta} outside the tuned range {{1,2,3}}");
    }
    let strategy = SelectionStrategy {
        kind: StrategyKind::TopVertices { delta },
        nonzero_budget,
        seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(usize, S)> = p
        .boundary_vertices(g)
        .into_iter()
        .map(|v| (v, p.gain(g, v).0))
        .collect();
    starts.shuffle(&mut rng);
    // Stable sort keeps the shuffled order among equal gains.
    starts.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite gains"));

    let mut growth = Growth::new(g, p, nonzero_budget, strategy);
    // Ball membership is tracked with a stamp so each ball BFS starts clean
    // without reallocating.
    let mut stamp = vec![0u32; g.vertex_count()];
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    for (ball_idx, &(start, _)) in starts.iter().enumerate() {
        let cur = ball_idx as u32 + 1;
        stamp[start] = cur;
        queue.clear();
        queue.push_back((start, 0));
        if !growth.contains(start) && !growth.try_insert(start) {
            return growth.finish();
        }
        while let Some((u, dist)) = queue.pop_front() {
            if dist == delta {
                continue;
            }
            for (v, _) in g.neighbors(u) {
                if stamp[v] == cur {
                    continue;
                }
                stamp[v] = cur;
                if !growth.contains(v) && !growth.try_insert(v) {
                    return growth.finish();
                }
                queue.push_back((v, dist + 1));
            }
        }
    }
    growth.finish()
}

/// Shared budget-gated insertion state.
struct Growth<'a, S> {
    estimator: NonzeroEstimator<'a, S>,
    kept: Vec<usize>,
    budget: u64,
    strategy: SelectionStrategy,
}

impl<'a, S: Weight> Growth<'a, S> {
    fn new(g: &'a Graph<S>, p: &'a Partition<S>, budget: u64, strategy: SelectionStrategy) -> Self {
        Growth {
            estimator: NonzeroEstimator::new(g, p),
            kept: Vec::new(),
            budget,
            strategy,
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.estimator.is_kept(v)
    }

    /// Inserts `v` unless doing so would exceed the budget; returns whether
    /// the selection may continue.
    fn try_insert(&mut self, v: usize) -> bool {
        if self.estimator.nonzeros_if_inserted(v) > self.budget {
            return false;
        }
        self.estimator.insert(v);
        self.kept.push(v);
        true
    }

    fn finish(self) -> KeptSet {
        KeptSet {
            vertices: self.kept,
            nonzeros_at_stop: self.estimator.nonzeros(),
            strategy: self.strategy,
        }
    }
}

/// Incrementally maintained non-zero count of the model built from the
/// current kept set.
///
/// Model edges are tracked in three groups: kept-kept, kept-super (one per
/// distinct adjacent super-vertex) and super-super (pairs of blocks with at
/// least one original edge between their interiors).
pub(crate) struct NonzeroEstimator<'a, S> {
    g: &'a Graph<S>,
    p: &'a Partition<S>,
    k: usize,
    kept: Vec<bool>,
    kept_count: u64,
    /// For each kept vertex: interior (non-kept) neighbor count per block.
    interior_neighbors: Vec<Option<Box<[u32]>>>,
    /// Original-edge count between interiors of block pairs `i < j`.
    ss_edge_count: Vec<u64>,
    e_kept_kept: u64,
    e_kept_super: u64,
    e_super_super: u64,
    scratch: Vec<u32>,
}

impl<'a, S: Weight> NonzeroEstimator<'a, S> {
    pub(crate) fn new(g: &'a Graph<S>, p: &'a Partition<S>) -> Self {
        let k = p.k();
        let mut ss_edge_count = vec![0u64; k * k];
        for (u, v, _) in g.edges() {
            let (bu, bv) = (p.block_of(u), p.block_of(v));
            if bu != bv {
                ss_edge_count[pair_index(bu, bv, k)] += 1;
            }
        }
        let e_super_super = ss_edge_count.iter().filter(|&&c| c > 0).count() as u64;
        NonzeroEstimator {
            g,
            p,
            k,
            kept: vec![false; g.vertex_count()],
            kept_count: 0,
            interior_neighbors: vec![None; g.vertex_count()],
            ss_edge_count,
            e_kept_kept: 0,
            e_kept_super: 0,
            e_super_super,
            scratch: vec![0; k],
        }
    }

    pub(crate) fn is_kept(&self, v: usize) -> bool {
        self.kept[v]
    }

    pub(crate) fn model_edges(&self) -> u64 {
        self.e_kept_kept + self.e_kept_super + self.e_super_super
    }

    pub(crate) fn nonzeros(&self) -> u64 {
        nonzero_formula(
            self.k as u64,
            self.model_edges(),
            self.k as u64 + self.kept_count,
        )
    }

    /// Non-zero count the model would have after inserting `x`; no state is
    /// modified.
    pub(crate) fn nonzeros_if_inserted(&mut self, x: usize) -> u64 {
        let (d_kk, d_ks, d_ss) = self.insertion_deltas(x);
        let edges = (self.e_kept_kept + self.e_kept_super + self.e_super_super)
            .checked_add_signed(d_kk + d_ks + d_ss)
            .expect("edge count stays non-negative");
        nonzero_formula(self.k as u64, edges, self.k as u64 + self.kept_count + 1)
    }

    pub(crate) fn insert(&mut self, x: usize) {
        debug_assert!(!self.kept[x], "vertex inserted twice");
        let bx = self.p.block_of(x);
        let mut own = vec![0u32; self.k];
        for (u, _) in self.g.neighbors(x) {
            if self.kept[u] {
                self.e_kept_kept += 1;
                let counts = self.interior_neighbors[u]
                    .as_mut()
                    .expect("kept vertex has interior counters");
                counts[bx] -= 1;
                if counts[bx] == 0 {
                    self.e_kept_super -= 1;
                }
            } else {
                let bu = self.p.block_of(u);
                own[bu] += 1;
                if bu != bx {
                    let idx = pair_index(bx, bu, self.k);
                    self.ss_edge_count[idx] -= 1;
                    if self.ss_edge_count[idx] == 0 {
                        self.e_super_super -= 1;
                    }
                }
            }
        }
        self.e_kept_super += own.iter().filter(|&&c| c > 0).count() as u64;
        self.interior_neighbors[x] = Some(own.into_boxed_slice());
        self.kept[x] = true;
        self.kept_count += 1;
    }

    /// Signed change to (kept-kept, kept-super, super-super) edge counts if
    /// `x` were inserted.
    fn insertion_deltas(&mut self, x: usize) -> (i64, i64, i64) {
        let bx = self.p.block_of(x);
        self.scratch.iter_mut().for_each(|c| *c = 0);
        let mut d_kk = 0i64;
        let mut d_ks = 0i64;
        for (u, _) in self.g.neighbors(x) {
            if self.kept[u] {
                d_kk += 1;
                let counts = self.interior_neighbors[u]
                    .as_ref()
                    .expect("kept vertex has interior counters");
                if counts[bx] == 1 {
                    d_ks -= 1;
                }
            } else {
                self.scratch[self.p.block_of(u)] += 1;
            }
        }
        let mut d_ss = 0i64;
        for b in 0..self.k {
            let cnt = self.scratch[b];
            if cnt == 0 {
                continue;
            }
            d_ks += 1;
            if b != bx && self.ss_edge_count[pair_index(bx, b, self.k)] == u64::from(cnt) {
                d_ss -= 1;
            }
        }
        (d_kk, d_ks, d_ss)
    }
}

fn pair_index(a: usize, b: usize, k: usize) -> usize {
    debug_assert_ne!(a, b);
    if a < b {
        a * k + b
    } else {
        b * k + a
    }
}

fn nonzero_formula(k: u64, edges: u64, vertices: u64) -> u64 {
    k * (6 * edges + 2 * vertices)
}
