//! The end-to-end local search: select vertices near the cut, contract,
//! solve the binary program, project back, and accept only improvements.

use std::collections::VecDeque;
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{l_max, Graph};
use crate::ilp::{build_ilp, IlpError, IlpOptions};
use crate::model::build_model;
use crate::partition::Partition;
use crate::scalar::{format_weight, from_f64, Weight};
use crate::selection::{select, SelectionStrategy, StrategyKind};
use crate::solver::{solve, BranchOrder, SolverConfig};

/// Default non-zero budget, raised for high block counts.
pub fn default_nonzero_budget(k: usize) -> u64 {
    if k == 32 || k == 64 {
        5_000_000
    } else {
        1_000_000
    }
}

/// Default strategy set: `gain:-2` for k ≤ 16, both `gain:-2` and `gain:-1`
/// otherwise (the better result is kept).
pub fn default_strategies(k: usize) -> Vec<StrategyKind> {
    if k <= 16 {
        vec![StrategyKind::Gain { rho: -2.0 }]
    } else {
        vec![
            StrategyKind::Gain { rho: -2.0 },
            StrategyKind::Gain { rho: -1.0 },
        ]
    }
}

#[derive(Clone, Debug)]
pub struct RefineConfig {
    pub k: usize,
    pub epsilon: f64,
    /// `None` runs the default strategy set for this `k`.
    pub strategy: Option<StrategyKind>,
    pub ilp_options: IlpOptions,
    /// Solver wall-clock limit per model, in seconds (0 = unlimited).
    pub time_limit: f64,
    pub rounds: usize,
    pub seed: u64,
    /// `None` uses [`default_nonzero_budget`].
    pub nonzero_budget: Option<u64>,
    pub instance_name: String,
}

impl RefineConfig {
    pub fn new(k: usize, epsilon: f64) -> Self {
        RefineConfig {
            k,
            epsilon,
            strategy: None,
            ilp_options: IlpOptions::default(),
            time_limit: 60.0,
            rounds: 1,
            seed: 0,
            nonzero_budget: None,
            instance_name: String::new(),
        }
    }
}

/// One refinement run, as written to the records stream. Field order is the
/// documented column order: instance,k,eps,strategy,input_cut,output_cut,
/// improved,status,time_s,nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub k: usize,
    pub eps: f64,
    pub strategy: String,
    pub input_cut: f64,
    pub output_cut: f64,
    pub improved: bool,
    pub status: String,
    pub time_s: f64,
    pub nodes: u64,
}

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("input partition is unbalanced for k={k}, eps={eps}")]
    UnbalancedInput { k: usize, eps: f64 },
    #[error(transparent)]
    Ilp(#[from] IlpError),
}

/// Walshaw improvement rule: smaller cut, or equal cut with a strictly
/// smaller maximum block weight.
fn improves<S: Weight>(cand_cut: S, cand_max: S, best_cut: S, best_max: S) -> bool {
    cand_cut < best_cut || (cand_cut == best_cut && cand_max < best_max)
}

/// Refines a balanced partition. Never returns a worse partition: each
/// round's candidate is accepted only under the improvement rule.
pub fn refine<S: Weight>(
    g: &Graph<S>,
    p: &Partition<S>,
    cfg: &RefineConfig,
) -> Result<(Partition<S>, RunRecord), RefineError> {
    let started = Instant::now();
    debug_assert_eq!(cfg.k, p.k(), "config and partition disagree on k");
    if !p.is_balanced(g) {
        return Err(RefineError::UnbalancedInput {
            k: p.k(),
            eps: p.epsilon().to_f64().unwrap_or(f64::NAN),
        });
    }
    let strategies = match cfg.strategy {
        Some(kind) => vec![kind],
        None => default_strategies(cfg.k),
    };
    let budget = cfg
        .nonzero_budget
        .unwrap_or_else(|| default_nonzero_budget(cfg.k));
    let mut seed_stream = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut current = p.clone();
    let mut improved = false;
    let mut total_nodes = 0u64;
    let mut last_status = "Skipped".to_string();
    let mut accepted_status: Option<String> = None;
    let mut accepted_strategy: Option<StrategyKind> = None;

    for _round in 0..cfg.rounds.max(1) {
        let mut round_best: Option<(Partition<S>, String, StrategyKind)> = None;
        for &kind in &strategies {
            let run_seed = seed_stream.next_u64();
            let strategy = SelectionStrategy {
                kind,
                nonzero_budget: budget,
                seed: run_seed,
            };
            let kept = select(g, &current, strategy);
            if kept.vertices.is_empty() && kept.nonzeros_at_stop > budget {
                // Even the fully contracted model blows the budget.
                last_status = "Skipped".to_string();
                log::info!(
                    "{kind}: empty model already needs {} non-zeros (budget {budget}); skipped",
                    kept.nonzeros_at_stop
                );
                continue;
            }
            let model = build_model(g, &current, &kept.vertices);
            let inst = build_ilp(&model, &cfg.ilp_options)?;
            let solver_cfg = SolverConfig {
                time_limit: cfg.time_limit,
                branch_order: BranchOrder::DegreeDescending,
                seed: run_seed,
                node_budget: None,
            };
            let result = solve(&inst, &solver_cfg);
            total_nodes += result.stats.nodes;
            last_status = result.status.to_string();
            let Some(assignment) = result.assignment else {
                continue;
            };
            let candidate = model.project_solution(g, &assignment);
            debug_assert!(candidate.is_balanced(g));
            let beats_round_best = match &round_best {
                Some((best, _, _)) => improves(
                    candidate.cut(),
                    candidate.max_block_weight(),
                    best.cut(),
                    best.max_block_weight(),
                ),
                None => true,
            };
            if beats_round_best {
                round_best = Some((candidate, result.status.to_string(), kind));
            }
        }
        if let Some((candidate, status, kind)) = round_best {
            if improves(
                candidate.cut(),
                candidate.max_block_weight(),
                current.cut(),
                current.max_block_weight(),
            ) {
                current = candidate;
                improved = true;
                accepted_status = Some(status);
                accepted_strategy = Some(kind);
            }
        }
    }

    debug_assert!(current.is_balanced(g));
    debug_assert!(current.cut() <= p.cut());
    let record = RunRecord {
        instance: cfg.instance_name.clone(),
        k: cfg.k,
        eps: cfg.epsilon,
        strategy: accepted_strategy
            .map(|s| s.to_string())
            .unwrap_or_else(|| strategies[0].to_string()),
        input_cut: p.cut().to_f64().unwrap_or(f64::NAN),
        output_cut: current.cut().to_f64().unwrap_or(f64::NAN),
        improved,
        status: accepted_status.unwrap_or(last_status),
        time_s: started.elapsed().as_secs_f64(),
        nodes: total_nodes,
    };
    Ok((current, record))
}

/// Validation report for a stored partition, at the standard imbalance
/// settings.
#[derive(Clone, Debug)]
pub struct EvaluateReport<S> {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub cut: S,
    pub block_weights: Vec<S>,
    pub max_block_weight: S,
    /// `(epsilon, L_max, balanced)` per inspected imbalance.
    pub balance: Vec<(f64, S, bool)>,
}

pub const EVALUATE_EPSILONS: [f64; 4] = [0.0, 0.01, 0.03, 0.05];

pub fn evaluate<S: Weight>(g: &Graph<S>, p: &Partition<S>) -> EvaluateReport<S> {
    let max_block_weight = p.max_block_weight();
    let balance = EVALUATE_EPSILONS
        .iter()
        .map(|&eps| {
            let bound = l_max(g, p.k(), from_f64(eps));
            (eps, bound, max_block_weight <= bound)
        })
        .collect();
    EvaluateReport {
        n: g.vertex_count(),
        m: g.edge_count(),
        k: p.k(),
        cut: p.cut(),
        block_weights: p.block_weights().to_vec(),
        max_block_weight,
        balance,
    }
}

impl<S: Weight> fmt::Display for EvaluateReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={} m={} k={}", self.n, self.m, self.k)?;
        writeln!(f, "cut={}", format_weight(self.cut))?;
        let weights: Vec<String> = self
            .block_weights
            .iter()
            .map(|&w| format_weight(w))
            .collect();
        writeln!(f, "block_weights={}", weights.join(" "))?;
        writeln!(
            f,
            "max_block_weight={}",
            format_weight(self.max_block_weight)
        )?;
        for &(eps, bound, balanced) in &self.balance {
            writeln!(
                f,
                "eps={:.2} L_max={} balanced={}",
                eps,
                format_weight(bound),
                balanced
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BootstrapError {
    #[error(
        "greedy growing could not place vertex {vertex} in any block; retry with another seed"
    )]
    BootstrapFailed { vertex: usize },
}

/// Seeded greedy graph-growing partitioner: k successive BFS regions capped
/// at the average block weight, then leftover vertices go to the lightest
/// feasible adjacent block. The result is always balanced or an error.
pub fn bootstrap_partition<S: Weight>(
    g: &Graph<S>,
    k: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Partition<S>, BootstrapError> {
    assert!(k >= 2, "at least two blocks");
    let n = g.vertex_count();
    let eps: S = from_f64(epsilon);
    let bound = l_max(g, k, eps);
    let target = (g.total_vertex_weight() / from_f64(k as f64)).ceil();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seed_order: Vec<usize> = (0..n).collect();
    seed_order.shuffle(&mut rng);

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut block_weights = vec![S::zero(); k];
    let mut cursor = 0usize;
    for (b, weight_slot) in block_weights.iter_mut().enumerate() {
        while cursor < n && assignment[seed_order[cursor]].is_some() {
            cursor += 1;
        }
        if cursor == n {
            break;
        }
        let mut queue = VecDeque::new();
        queue.push_back(seed_order[cursor]);
        while let Some(v) = queue.pop_front() {
            if assignment[v].is_some() {
                continue;
            }
            if *weight_slot + g.vertex_weight(v) > target {
                continue;
            }
            assignment[v] = Some(b);
            *weight_slot = *weight_slot + g.vertex_weight(v);
            for (u, _) in g.neighbors(v) {
                if assignment[u].is_none() {
                    queue.push_back(u);
                }
            }
        }
    }

    // Lightest block among the candidates that still fits `addition`; ties
    // by smallest id.
    fn lightest_feasible<S: Weight>(
        block_weights: &[S],
        candidates: impl Iterator<Item = usize>,
        addition: S,
        bound: S,
    ) -> Option<usize> {
        let mut best: Option<(S, usize)> = None;
        for b in candidates {
            let w = block_weights[b];
            if w + addition > bound {
                continue;
            }
            if best.is_none_or(|(bw, bb)| w < bw || (w == bw && b < bb)) {
                best = Some((w, b));
            }
        }
        best.map(|(_, b)| b)
    }

    // Leftovers: lightest feasible adjacent block; if a full sweep places
    // nothing, fall back to the lightest feasible block overall.
    loop {
        let unassigned: Vec<usize> = (0..n).filter(|&v| assignment[v].is_none()).collect();
        if unassigned.is_empty() {
            break;
        }
        let mut progressed = false;
        for &v in &unassigned {
            if assignment[v].is_some() {
                continue;
            }
            let adjacent = g.neighbors(v).filter_map(|(u, _)| assignment[u]);
            if let Some(b) = lightest_feasible(&block_weights, adjacent, g.vertex_weight(v), bound)
            {
                assignment[v] = Some(b);
                block_weights[b] = block_weights[b] + g.vertex_weight(v);
                progressed = true;
            }
        }
        if !progressed {
            let v = unassigned[0];
            let Some(b) = lightest_feasible(&block_weights, 0..k, g.vertex_weight(v), bound) else {
                return Err(BootstrapError::BootstrapFailed { vertex: v });
            };
            assignment[v] = Some(b);
            block_weights[b] = block_weights[b] + g.vertex_weight(v);
        }
    }

    let assignment: Vec<usize> = assignment.into_iter().map(|b| b.unwrap()).collect();
    let p = Partition::new(g, k, eps, assignment).expect("bootstrap produces valid block ids");
    debug_assert!(p.is_balanced(g));
    Ok(p)
}
