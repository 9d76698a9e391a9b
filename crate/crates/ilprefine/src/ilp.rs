//! The binary program over a coarse model: edge variables `e_u_v`,
//! assignment variables `x_v_b`, the balance and uniqueness constraints,
//! and the optional solver accelerations (symmetry breaking, warm start,
//! objective bound).

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{cut_value, l_max_from_total};
use crate::model::CoarseModel;
use crate::scalar::{format_weight, from_f64, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    /// Solutions must not be worse than the input cut.
    LessOrEqual,
    /// Solutions must be strictly better than the input cut.
    StrictlyLess,
}

/// The optimization variants layered on the basic program, named after the
/// cumulative configurations they enable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IlpPreset {
    Basic,
    BasicSym,
    BasicSymSSol,
    BsssConstEq,
    BsssConstLt,
}

impl fmt::Display for IlpPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            IlpPreset::Basic => "Basic",
            IlpPreset::BasicSym => "BasicSym",
            IlpPreset::BasicSymSSol => "BasicSymSSol",
            IlpPreset::BsssConstEq => "BSSSConst=",
            IlpPreset::BsssConstLt => "BSSSConst<",
        };
        f.write_str(name)
    }
}

impl FromStr for IlpPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(IlpPreset::Basic),
            "basicsym" => Ok(IlpPreset::BasicSym),
            "basicsymssol" => Ok(IlpPreset::BasicSymSSol),
            "bsssconst=" | "bsssconst-le" | "bsssconsteq" => Ok(IlpPreset::BsssConstEq),
            "bsssconst<" | "bsssconst-lt" | "bsssconstlt" => Ok(IlpPreset::BsssConstLt),
            other => Err(format!(
                "unknown preset {other:?}; expected basic, basicsym, basicsymssol, \
                 bsssconst= or bsssconst<"
            )),
        }
    }
}

/// Which accelerations to apply when building an instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IlpOptions {
    pub symmetry_breaking: bool,
    pub start_solution: bool,
    pub objective_bound: Option<BoundMode>,
    /// Improvement granularity for [`BoundMode::StrictlyLess`] when edge
    /// weights are not all integral (strict inequalities are not expressible
    /// in the program itself). Integral weights use γ = 1.
    pub strict_gamma: f64,
}

impl IlpOptions {
    pub fn preset(preset: IlpPreset) -> Self {
        let base = IlpOptions {
            symmetry_breaking: false,
            start_solution: false,
            objective_bound: None,
            strict_gamma: 1e-6,
        };
        match preset {
            IlpPreset::Basic => base,
            IlpPreset::BasicSym => IlpOptions {
                symmetry_breaking: true,
                ..base
            },
            IlpPreset::BasicSymSSol => IlpOptions {
                symmetry_breaking: true,
                start_solution: true,
                ..base
            },
            IlpPreset::BsssConstEq => IlpOptions {
                symmetry_breaking: true,
                start_solution: true,
                objective_bound: Some(BoundMode::LessOrEqual),
                ..base
            },
            IlpPreset::BsssConstLt => IlpOptions {
                symmetry_breaking: true,
                start_solution: true,
                objective_bound: Some(BoundMode::StrictlyLess),
                ..base
            },
        }
    }
}

impl Default for IlpOptions {
    /// The fastest configuration, used as the pipeline default.
    fn default() -> Self {
        IlpOptions::preset(IlpPreset::BasicSymSSol)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IlpError {
    #[error(
        "symmetry breaking would fix super-vertex {block} with weight {weight} \
         above the balance bound {l_max}; the input partition is unbalanced"
    )]
    InfeasibleFixing {
        block: usize,
        weight: f64,
        l_max: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    /// Cut indicator of the model edge with this index.
    Edge(usize),
    /// `x_{vertex,block}`: vertex is assigned to block.
    Assign { vertex: usize, block: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

/// One linear constraint row. Terms keep structural zero coefficients (a
/// weight-0 vertex still appears in its balance row), matching the program's
/// published size accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct Row<S> {
    pub terms: Vec<(Var, S)>,
    pub sense: Sense,
    pub rhs: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarmStart<S> {
    /// Block per model vertex, consistent with all fixed variables.
    pub assignment: Vec<usize>,
    /// Model cut of the warm start, offset included.
    pub objective: S,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveBound<S> {
    pub mode: BoundMode,
    /// Feasible solutions satisfy `total objective ≤ rhs_total` (offset
    /// included).
    pub rhs_total: S,
}

/// A built binary program.
#[derive(Clone, Debug)]
pub struct IlpInstance<S> {
    k: usize,
    num_vertices: usize,
    edges: Vec<(usize, usize, S)>,
    vertex_weights: Vec<S>,
    l_max: S,
    rows: Vec<Row<S>>,
    fixed_assignment: Vec<Option<usize>>,
    fixed_edges: Vec<Option<bool>>,
    warm_start: Option<WarmStart<S>>,
    objective_offset: S,
    objective_bound: Option<ObjectiveBound<S>>,
    pairwise_fixing_condition: Option<bool>,
    strict_gamma: f64,
}

/// Builds the program for a coarse model and applies the requested
/// accelerations (symmetry breaking, then warm start, then objective bound).
///
/// The balance bound is computed from the original graph's total vertex
/// weight; contraction conserves it.
pub fn build_ilp<S: Weight>(
    m: &CoarseModel<S>,
    options: &IlpOptions,
) -> Result<IlpInstance<S>, IlpError> {
    let k = m.k();
    let g = m.graph();
    let num_vertices = g.vertex_count();
    let edges: Vec<(usize, usize, S)> = g.edges().collect();
    let l_max = l_max_from_total(m.origin_total_weight(), k, m.origin_partition().epsilon());

    let mut rows = Vec::with_capacity(2 * k * edges.len() + k + num_vertices);
    for (idx, &(u, v, _)) in edges.iter().enumerate() {
        for b in 0..k {
            // e_uv >= x_u_b - x_v_b
            rows.push(Row {
                terms: vec![
                    (Var::Edge(idx), S::one()),
                    (
                        Var::Assign {
                            vertex: u,
                            block: b,
                        },
                        -S::one(),
                    ),
                    (
                        Var::Assign {
                            vertex: v,
                            block: b,
                        },
                        S::one(),
                    ),
                ],
                sense: Sense::Ge,
                rhs: S::zero(),
            });
            // e_uv >= x_v_b - x_u_b
            rows.push(Row {
                terms: vec![
                    (Var::Edge(idx), S::one()),
                    (
                        Var::Assign {
                            vertex: u,
                            block: b,
                        },
                        S::one(),
                    ),
                    (
                        Var::Assign {
                            vertex: v,
                            block: b,
                        },
                        -S::one(),
                    ),
                ],
                sense: Sense::Ge,
                rhs: S::zero(),
            });
        }
    }
    for b in 0..k {
        rows.push(Row {
            terms: (0..num_vertices)
                .map(|v| {
                    (
                        Var::Assign {
                            vertex: v,
                            block: b,
                        },
                        g.vertex_weight(v),
                    )
                })
                .collect(),
            sense: Sense::Le,
            rhs: l_max,
        });
    }
    for v in 0..num_vertices {
        rows.push(Row {
            terms: (0..k)
                .map(|b| {
                    (
                        Var::Assign {
                            vertex: v,
                            block: b,
                        },
                        S::one(),
                    )
                })
                .collect(),
            sense: Sense::Eq,
            rhs: S::one(),
        });
    }

    let mut inst = IlpInstance {
        k,
        num_vertices,
        edges,
        vertex_weights: g.vertex_weights().to_vec(),
        l_max,
        rows,
        fixed_assignment: vec![None; num_vertices],
        fixed_edges: vec![None; g.edge_count()],
        warm_start: None,
        objective_offset: S::zero(),
        objective_bound: None,
        pairwise_fixing_condition: None,
        strict_gamma: options.strict_gamma,
    };
    if options.symmetry_breaking {
        inst = inst.apply_symmetry_breaking()?;
    }
    if options.start_solution {
        inst = inst.set_start_solution(m);
    }
    if let Some(mode) = options.objective_bound {
        inst = inst.add_objective_bound(mode, m.origin_partition().cut());
    }
    Ok(inst)
}

impl<S: Weight> IlpInstance<S> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_model_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize, S)] {
        &self.edges
    }

    pub fn vertex_weights(&self) -> &[S] {
        &self.vertex_weights
    }

    pub fn l_max(&self) -> S {
        self.l_max
    }

    pub fn rows(&self) -> &[Row<S>] {
        &self.rows
    }

    pub fn fixed_assignment(&self) -> &[Option<usize>] {
        &self.fixed_assignment
    }

    pub fn fixed_edges(&self) -> &[Option<bool>] {
        &self.fixed_edges
    }

    pub fn warm_start(&self) -> Option<&WarmStart<S>> {
        self.warm_start.as_ref()
    }

    /// Objective contribution of edges whose variables were fixed away.
    pub fn objective_offset(&self) -> S {
        self.objective_offset
    }

    pub fn objective_bound(&self) -> Option<ObjectiveBound<S>> {
        self.objective_bound
    }

    /// Whether `c(μ_i) + c(μ_j) > L_max` held for every super-vertex pair
    /// when symmetry breaking was applied (the selection property that makes
    /// fixing lossless).
    pub fn pairwise_fixing_condition(&self) -> Option<bool> {
        self.pairwise_fixing_condition
    }

    /// Total variable count `|E| + k|V|`, fixed variables included.
    pub fn num_variables(&self) -> usize {
        self.edges.len() + self.k * self.num_vertices
    }

    pub fn num_fixed_variables(&self) -> usize {
        let fixed_e = self.fixed_edges.iter().filter(|f| f.is_some()).count();
        let fixed_x = self.fixed_assignment.iter().filter(|f| f.is_some()).count() * self.k;
        fixed_e + fixed_x
    }

    pub fn num_free_variables(&self) -> usize {
        self.num_variables() - self.num_fixed_variables()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Structural coefficient count over all rows.
    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    /// Number of free model vertices (branching width of the solver).
    pub fn num_free_vertices(&self) -> usize {
        self.fixed_assignment.iter().filter(|f| f.is_none()).count()
    }

    fn fixed_value(&self, var: Var) -> Option<S> {
        match var {
            Var::Edge(idx) => {
                self.fixed_edges[idx].map(|cut| if cut { S::one() } else { S::zero() })
            }
            Var::Assign { vertex, block } => {
                self.fixed_assignment[vertex].map(|b| if b == block { S::one() } else { S::zero() })
            }
        }
    }

    /// Fixes `x_{μ_i,i} = 1` and `x_{μ_i,j} = 0`, drops the per-vertex
    /// uniqueness rows of the supers, moves `c(μ_i)` to the constant side of
    /// the balance rows, and folds the (now-constant) super-super edge
    /// variables into the objective offset.
    pub fn apply_symmetry_breaking(mut self) -> Result<Self, IlpError> {
        for i in 0..self.k {
            if self.vertex_weights[i] > self.l_max {
                return Err(IlpError::InfeasibleFixing {
                    block: i,
                    weight: self.vertex_weights[i].to_f64().unwrap_or(f64::NAN),
                    l_max: self.l_max.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        for i in 0..self.k {
            self.fixed_assignment[i] = Some(i);
        }
        for (idx, &(u, v, w)) in self.edges.iter().enumerate() {
            if u < self.k && v < self.k {
                // Distinct supers are in distinct blocks, so the edge is cut.
                self.fixed_edges[idx] = Some(true);
                self.objective_offset = self.objective_offset + w;
            }
        }
        let mut condition = true;
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                if self.vertex_weights[i] + self.vertex_weights[j] <= self.l_max {
                    condition = false;
                }
            }
        }
        self.pairwise_fixing_condition = Some(condition);
        self.resubstitute_rows();
        Ok(self)
    }

    /// Warm start from the model partition induced by the input partition.
    pub fn set_start_solution(mut self, m: &CoarseModel<S>) -> Self {
        let assignment = m.induced_model_partition();
        let objective = cut_value(m.graph(), &assignment);
        debug_assert!({
            let mut weights = vec![S::zero(); self.k];
            for (v, &b) in assignment.iter().enumerate() {
                weights[b] = weights[b] + self.vertex_weights[v];
            }
            weights.iter().all(|&w| w <= self.l_max)
        });
        self.warm_start = Some(WarmStart {
            assignment,
            objective,
        });
        self
    }

    /// Disallows solutions worse than the input cut: `LessOrEqual` bounds the
    /// objective by `input_cut`, `StrictlyLess` by `input_cut − γ` where γ is
    /// 1 for integral edge weights and the configured granularity otherwise.
    pub fn add_objective_bound(mut self, mode: BoundMode, input_cut: S) -> Self {
        let rhs_total = match mode {
            BoundMode::LessOrEqual => input_cut,
            BoundMode::StrictlyLess => {
                let integral = self.edges.iter().all(|&(_, _, w)| w.fract() == S::zero());
                let gamma = if integral {
                    S::one()
                } else {
                    from_f64(self.strict_gamma)
                };
                input_cut - gamma
            }
        };
        self.objective_bound = Some(ObjectiveBound { mode, rhs_total });
        let row = Row {
            terms: self
                .edges
                .iter()
                .enumerate()
                .map(|(idx, &(_, _, w))| (Var::Edge(idx), w))
                .collect(),
            sense: Sense::Le,
            rhs: rhs_total,
        };
        self.rows.push(row);
        self.resubstitute_rows();
        self
    }

    /// Replaces fixed variables by their values in every row, dropping rows
    /// that no longer constrain anything. Row semantics over the remaining
    /// binary variables are unchanged.
    fn resubstitute_rows(&mut self) {
        let rows = std::mem::take(&mut self.rows);
        let mut kept_rows = Vec::with_capacity(rows.len());
        'rows: for row in rows {
            let mut rhs = row.rhs;
            let mut terms = Vec::with_capacity(row.terms.len());
            for (var, coef) in row.terms {
                match self.fixed_value(var) {
                    Some(value) => rhs = rhs - coef * value,
                    None => terms.push((var, coef)),
                }
            }
            if terms.is_empty() {
                debug_assert!(
                    match row.sense {
                        Sense::Ge => S::zero() >= rhs,
                        Sense::Le => S::zero() <= rhs,
                        Sense::Eq => rhs == S::zero(),
                    },
                    "fixed variables violate a constant row"
                );
                continue 'rows;
            }
            // Rows satisfied by every 0/1 assignment carry no information.
            let trivially_satisfied = match row.sense {
                Sense::Ge => {
                    let min_lhs: S = terms
                        .iter()
                        .map(|&(_, c)| if c < S::zero() { c } else { S::zero() })
                        .sum();
                    min_lhs >= rhs
                }
                Sense::Le => {
                    let max_lhs: S = terms
                        .iter()
                        .map(|&(_, c)| if c > S::zero() { c } else { S::zero() })
                        .sum();
                    max_lhs <= rhs
                }
                Sense::Eq => false,
            };
            if trivially_satisfied {
                continue 'rows;
            }
            kept_rows.push(Row {
                terms,
                sense: row.sense,
                rhs,
            });
        }
        self.rows = kept_rows;
    }

    fn var_name(&self, var: Var) -> String {
        match var {
            Var::Edge(idx) => {
                let (u, v, _) = self.edges[idx];
                format!("e_{u}_{v}")
            }
            Var::Assign { vertex, block } => format!("x_{vertex}_{block}"),
        }
    }

    /// Renders the instance in CPLEX LP text format (ASCII, LF endings,
    /// rows named `c<index>`, fixed variables pinned in the bounds section).
    /// Byte-stable for a fixed instance.
    pub fn render_lp(&self) -> String {
        let mut out = String::new();
        if self.objective_offset != S::zero() {
            out.push_str(&format!(
                "\\ constant objective offset from fixed edges: {}\n",
                format_weight(self.objective_offset)
            ));
        }
        let objective_terms: Vec<(String, S)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.fixed_edges[*idx].is_none())
            .map(|(idx, &(_, _, w))| (self.var_name(Var::Edge(idx)), w))
            .collect();
        if objective_terms.is_empty() {
            out.push_str("\\ objective is constant\n");
        }
        out.push_str("Minimize\n obj: ");
        if objective_terms.is_empty() {
            out.push_str(&format_weight(self.objective_offset));
        } else {
            out.push_str(&render_expression(&objective_terms));
            if self.objective_offset != S::zero() {
                out.push_str(&format!(" + {}", format_weight(self.objective_offset)));
            }
        }
        out.push('\n');
        if !self.rows.is_empty() {
            out.push_str("Subject To\n");
            for (idx, row) in self.rows.iter().enumerate() {
                let terms: Vec<(String, S)> = row
                    .terms
                    .iter()
                    .map(|&(var, coef)| (self.var_name(var), coef))
                    .collect();
                let op = match row.sense {
                    Sense::Ge => ">=",
                    Sense::Le => "<=",
                    Sense::Eq => "=",
                };
                out.push_str(&format!(
                    " c{idx}: {} {op} {}\n",
                    render_expression(&terms),
                    format_weight(row.rhs)
                ));
            }
        }
        let mut bounds = Vec::new();
        for (idx, fixed) in self.fixed_edges.iter().enumerate() {
            if let Some(cut) = fixed {
                bounds.push(format!(
                    " {} = {}\n",
                    self.var_name(Var::Edge(idx)),
                    if *cut { 1 } else { 0 }
                ));
            }
        }
        for (vertex, fixed) in self.fixed_assignment.iter().enumerate() {
            if let Some(fb) = fixed {
                for block in 0..self.k {
                    bounds.push(format!(
                        " {} = {}\n",
                        self.var_name(Var::Assign { vertex, block }),
                        if block == *fb { 1 } else { 0 }
                    ));
                }
            }
        }
        if !bounds.is_empty() {
            out.push_str("Bounds\n");
            for b in bounds {
                out.push_str(&b);
            }
        }
        out.push_str("Binaries\n");
        let mut names = Vec::with_capacity(self.num_variables());
        for idx in 0..self.edges.len() {
            names.push(self.var_name(Var::Edge(idx)));
        }
        for vertex in 0..self.num_vertices {
            for block in 0..self.k {
                names.push(self.var_name(Var::Assign { vertex, block }));
            }
        }
        out.push(' ');
        out.push_str(&names.join(" "));
        out.push('\n');
        out.push_str("End\n");
        out
    }

    pub fn export_lp(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render_lp())
    }
}

fn render_expression<S: Weight>(terms: &[(String, S)]) -> String {
    let mut out = String::new();
    for (i, (name, coef)) in terms.iter().enumerate() {
        let negative = *coef < S::zero();
        let magnitude = coef.abs();
        if i == 0 {
            if negative {
                out.push_str("- ");
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if magnitude != S::one() {
            out.push_str(&format_weight(magnitude));
            out.push(' ');
        }
        out.push_str(name);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::model::build_model;
    use crate::partition::Partition;
    use crate::selection::estimate_nonzeros;

    /// Path 0-1-2, blocks [0,0,1], K = {1,2}: the running example model with
    /// 4 vertices (mu_0, mu_1, kept 1, kept 2) and 2 edges.
    fn path_model() -> (Graph<f64>, CoarseModel<f64>) {
        let g = Graph::unit_from_edges(3, &[(0, 1), (1, 2)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 0, 1]).unwrap();
        let m = build_model(&g, &p, &[1, 2]);
        (g, m)
    }

    #[test]
    fn basic_counts_on_path_model() {
        let (_, m) = path_model();
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::Basic)).unwrap();
        // |E| = 2, |V| = 4, k = 2.
        assert_eq!(inst.num_variables(), 2 + 2 * 4);
        assert_eq!(inst.num_constraints(), 2 * 2 * 2 + 2 + 4);
        assert_eq!(inst.num_nonzeros(), 2 * (6 * 2 + 2 * 4));
    }

    /// A crafted instance with exactly |V| = 10 model vertices and |E| = 20
    /// model edges at k = 4, hitting the published size formulas:
    /// |E| + k|V| variables, 2k|E| + k + |V| constraints, k(6|E| + 2|V|)
    /// non-zeros.
    #[test]
    fn counts_on_ten_vertex_twenty_edge_model() {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        // 12 edges among the 6 kept vertices 0..6.
        for u in 0..6usize {
            for v in (u + 1)..6 {
                if edges.len() < 12 {
                    edges.push((u, v));
                }
            }
        }
        // Interiors 6..10 (one per block): 3+2+1 kept-super edges, one
        // super-super edge (8,9) and one more via (6,7).
        edges.extend([
            (6, 0),
            (6, 1),
            (6, 2),
            (7, 3),
            (7, 4),
            (8, 5),
            (8, 9),
            (6, 7),
        ]);
        let g = Graph::<f64>::unit_from_edges(10, &edges);
        let assignment = vec![0, 1, 2, 3, 0, 1, 0, 1, 2, 3];
        let p = Partition::new(&g, 4, 2.0, assignment).unwrap();
        let m = build_model(&g, &p, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(m.graph().vertex_count(), 10);
        assert_eq!(m.graph().edge_count(), 20);
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::Basic)).unwrap();
        assert_eq!(inst.num_variables(), 20 + 4 * 10);
        assert_eq!(inst.num_constraints(), 2 * 4 * 20 + 4 + 10); // 174
        assert_eq!(inst.num_nonzeros(), 4 * (6 * 20 + 2 * 10)); // 560
    }

    #[test]
    fn basic_nonzeros_match_selection_estimate() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        for seed in 0..30u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(5..12);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::<f64>::unit_from_edges(n, &edges);
            let k = rng.gen_range(2..=4);
            let assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let p = Partition::new(&g, k, 1.0, assignment).unwrap();
            let kept: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let m = build_model(&g, &p, &kept);
            let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::Basic)).unwrap();
            assert_eq!(
                estimate_nonzeros(&g, &p, &kept),
                inst.num_nonzeros() as u64,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn symmetry_breaking_on_path_model() {
        let (_, m) = path_model();
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSym)).unwrap();
        assert_eq!(inst.fixed_assignment()[0], Some(0));
        assert_eq!(inst.fixed_assignment()[1], Some(1));
        assert_eq!(inst.fixed_assignment()[2], None);
        assert_eq!(inst.objective_offset(), 0.0); // no super-super edges
        assert!(inst.fixed_edges().iter().all(|f| f.is_none()));
        // Uniqueness rows for the two supers are gone.
        let uniqueness_rows = inst.rows().iter().filter(|r| r.sense == Sense::Eq).count();
        assert_eq!(uniqueness_rows, 2);
    }

    #[test]
    fn symmetry_breaking_folds_super_super_edges() {
        let g = Graph::<f64>::unit_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 1, 0, 1]).unwrap();
        let m = build_model(&g, &p, &[]);
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSym)).unwrap();
        assert_eq!(inst.objective_offset(), 4.0);
        assert_eq!(inst.num_free_variables(), 0);
        assert_eq!(inst.num_free_vertices(), 0);
        assert!(inst.rows().is_empty());
    }

    #[test]
    fn pairwise_condition_flag() {
        // Interiors of weight 2 each against L_max = 2: 2+2 > 2 holds.
        let g = Graph::<f64>::unit_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 1, 0, 1]).unwrap();
        let m = build_model(&g, &p, &[]);
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSym)).unwrap();
        assert_eq!(inst.pairwise_fixing_condition(), Some(true));

        // Interiors of weight 1 each against L_max = 2: 1+1 > 2 fails, yet
        // fixing is still applied.
        let g = Graph::<f64>::unit_from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 0, 1, 1]).unwrap();
        let m = build_model(&g, &p, &[1, 2]);
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSym)).unwrap();
        assert_eq!(inst.pairwise_fixing_condition(), Some(false));
        assert_eq!(inst.fixed_assignment()[0], Some(0));
    }

    #[test]
    fn infeasible_fixing_on_unbalanced_input() {
        // Block 0 holds weight 3 of 4 total: L_max = 2 at eps = 0.
        let g = Graph::<f64>::unit_from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 0, 0, 1]).unwrap();
        let m = build_model(&g, &p, &[]);
        let err = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSym)).unwrap_err();
        assert_eq!(
            err,
            IlpError::InfeasibleFixing {
                block: 0,
                weight: 3.0,
                l_max: 2.0
            }
        );
    }

    #[test]
    fn warm_start_matches_input_cut() {
        let (_, m) = path_model();
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSymSSol)).unwrap();
        let ws = inst.warm_start().unwrap();
        assert_eq!(ws.assignment, vec![0, 1, 0, 1]);
        assert_eq!(ws.objective, 1.0);
    }

    #[test]
    fn objective_bound_gamma() {
        let (_, m) = path_model();
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BsssConstEq)).unwrap();
        let bound = inst.objective_bound().unwrap();
        assert_eq!(bound.mode, BoundMode::LessOrEqual);
        assert_eq!(bound.rhs_total, 1.0);

        let strict = build_ilp(&m, &IlpOptions::preset(IlpPreset::BsssConstLt)).unwrap();
        assert_eq!(strict.objective_bound().unwrap().rhs_total, 0.0); // integral: gamma = 1

        // Non-integral weights fall back to the configured granularity.
        let g = Graph::<f64>::from_edges(2, &[(0, 1, 0.5)], vec![1.0, 1.0]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 1]).unwrap();
        let m2 = build_model(&g, &p, &[0, 1]);
        let strict2 = build_ilp(&m2, &IlpOptions::preset(IlpPreset::BsssConstLt)).unwrap();
        assert_eq!(strict2.objective_bound().unwrap().rhs_total, 0.5 - 1e-6);
    }

    #[test]
    fn lp_export_of_basic_path_model_is_byte_stable() {
        let (_, m) = path_model();
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::Basic)).unwrap();
        let text = inst.render_lp();
        assert_eq!(text, inst.render_lp());
        let expected = "\
Minimize
 obj: e_0_2 + e_2_3
Subject To
 c0: e_0_2 - x_0_0 + x_2_0 >= 0
 c1: e_0_2 + x_0_0 - x_2_0 >= 0
 c2: e_0_2 - x_0_1 + x_2_1 >= 0
 c3: e_0_2 + x_0_1 - x_2_1 >= 0
 c4: e_2_3 - x_2_0 + x_3_0 >= 0
 c5: e_2_3 + x_2_0 - x_3_0 >= 0
 c6: e_2_3 - x_2_1 + x_3_1 >= 0
 c7: e_2_3 + x_2_1 - x_3_1 >= 0
 c8: x_0_0 + 0 x_1_0 + x_2_0 + x_3_0 <= 2
 c9: x_0_1 + 0 x_1_1 + x_2_1 + x_3_1 <= 2
 c10: x_0_0 + x_0_1 = 1
 c11: x_1_0 + x_1_1 = 1
 c12: x_2_0 + x_2_1 = 1
 c13: x_3_0 + x_3_1 = 1
Binaries
 e_0_2 e_2_3 x_0_0 x_0_1 x_1_0 x_1_1 x_2_0 x_2_1 x_3_0 x_3_1
End
";
        assert_eq!(text, expected);
    }

    #[test]
    fn lp_export_with_fixed_variables_and_offset() {
        let g = Graph::<f64>::unit_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 1, 0, 1]).unwrap();
        let m = build_model(&g, &p, &[]);
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::BasicSym)).unwrap();
        let text = inst.render_lp();
        assert!(text.starts_with("\\ constant objective offset from fixed edges: 4\n"));
        assert!(text.contains(" obj: 4\n"));
        assert!(text.contains("Bounds\n e_0_1 = 1\n x_0_0 = 1\n x_0_1 = 0\n"));
    }

    fn row_holds(row: &Row<f64>, value_of: &dyn Fn(Var) -> f64) -> bool {
        let lhs: f64 = row.terms.iter().map(|&(var, c)| c * value_of(var)).sum();
        match row.sense {
            Sense::Ge => lhs >= row.rhs,
            Sense::Le => lhs <= row.rhs,
            Sense::Eq => lhs == row.rhs,
        }
    }

    /// Enumerates every 0/1 assignment of a small basic instance and checks
    /// that the rows admit exactly the valid balanced partitions, with the
    /// minimum objective equal to the block-level optimum and every edge
    /// variable tight there.
    #[test]
    fn rows_encode_the_block_semantics_exactly() {
        use crate::solver::{solve, SolverConfig};

        let g = Graph::<f64>::unit_from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = Partition::new(&g, 2, 0.0, vec![0, 0, 1, 1]).unwrap();
        let m = build_model(&g, &p, &[0, 1, 2, 3]);
        let inst = build_ilp(&m, &IlpOptions::preset(IlpPreset::Basic)).unwrap();
        let ne = inst.edges().len();
        let k = inst.k();
        let nvars = inst.num_variables();
        assert!(nvars <= 20, "enumeration stays tiny");

        let var_index = |var: Var| -> usize {
            match var {
                Var::Edge(i) => i,
                Var::Assign { vertex, block } => ne + vertex * k + block,
            }
        };
        let mut best: Option<f64> = None;
        let mut optimal_masks: Vec<u32> = Vec::new();
        for mask in 0u32..(1 << nvars) {
            let value = |var: Var| ((mask >> var_index(var)) & 1) as f64;
            if !inst.rows().iter().all(|r| row_holds(r, &value)) {
                continue;
            }
            let objective: f64 = inst
                .edges()
                .iter()
                .enumerate()
                .map(|(i, &(_, _, w))| w * value(Var::Edge(i)))
                .sum();
            match best {
                Some(b) if objective > b => {}
                Some(b) if objective == b => optimal_masks.push(mask),
                _ => {
                    best = Some(objective);
                    optimal_masks = vec![mask];
                }
            }
        }

        let res = solve(&inst, &SolverConfig::default());
        assert_eq!(best, res.objective, "row and block formulations agree");

        for mask in optimal_masks {
            let value = |var: Var| ((mask >> var_index(var)) & 1) as f64;
            // Eq. 4 rows force one-hot assignments; recover the block.
            let block_of = |v: usize| {
                (0..k)
                    .find(|&b| {
                        value(Var::Assign {
                            vertex: v,
                            block: b,
                        }) == 1.0
                    })
                    .unwrap()
            };
            for (i, &(u, v, _)) in inst.edges().iter().enumerate() {
                let expected = if block_of(u) != block_of(v) { 1.0 } else { 0.0 };
                assert_eq!(
                    value(Var::Edge(i)),
                    expected,
                    "edge variable is tight at optimum"
                );
            }
        }
    }

    /// The warm start satisfies every row, including the bound row of the
    /// LessOrEqual preset and all rows rewritten by symmetry breaking.
    #[test]
    fn warm_start_satisfies_every_row() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        for seed in 0..20u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(5..10);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.5) {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::<f64>::unit_from_edges(n, &edges);
            let k = rng.gen_range(2..=3);
            let assignment: Vec<usize> = (0..n).map(|v| v % k).collect();
            let p = Partition::new(&g, k, 1.0, assignment).unwrap();
            let kept: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let m = build_model(&g, &p, &kept);
            for preset in [IlpPreset::BasicSymSSol, IlpPreset::BsssConstEq] {
                let inst = build_ilp(&m, &IlpOptions::preset(preset)).unwrap();
                let ws = inst.warm_start().unwrap().clone();
                for (v, fixed) in inst.fixed_assignment().iter().enumerate() {
                    if let Some(b) = fixed {
                        assert_eq!(ws.assignment[v], *b, "warm start respects fixing");
                    }
                }
                let value = |var: Var| -> f64 {
                    match var {
                        Var::Edge(i) => {
                            let (u, v, _) = inst.edges()[i];
                            (ws.assignment[u] != ws.assignment[v]) as u8 as f64
                        }
                        Var::Assign { vertex, block } => {
                            (ws.assignment[vertex] == block) as u8 as f64
                        }
                    }
                };
                for (idx, row) in inst.rows().iter().enumerate() {
                    assert!(
                        row_holds(row, &value),
                        "seed {seed} preset {preset}: row c{idx} violated"
                    );
                }
            }
        }
    }

    #[test]
    fn preset_names_and_cumulative_flags() {
        for (text, preset) in [
            ("basic", IlpPreset::Basic),
            ("basicsym", IlpPreset::BasicSym),
            ("basicsymssol", IlpPreset::BasicSymSSol),
            ("bsssconst=", IlpPreset::BsssConstEq),
            ("bsssconst<", IlpPreset::BsssConstLt),
        ] {
            assert_eq!(text.parse::<IlpPreset>().unwrap(), preset);
        }
        let eq = IlpOptions::preset(IlpPreset::BsssConstEq);
        assert!(eq.symmetry_breaking && eq.start_solution);
        assert_eq!(eq.objective_bound, Some(BoundMode::LessOrEqual));
        let lt = IlpOptions::preset(IlpPreset::BsssConstLt);
        assert!(lt.symmetry_breaking && lt.start_solution);
        assert_eq!(lt.objective_bound, Some(BoundMode::StrictlyLess));
    }
}
