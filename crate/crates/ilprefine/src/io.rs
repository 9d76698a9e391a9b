//! METIS/Chaco graph files and plain partition files.
//!
//! Graph files are 1-indexed with a `n m [fmt [ncon]]` header; `%` lines are
//! comments. Partition files hold one 0-indexed block id per line, line `i`
//! describing vertex `i`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::Graph;
use crate::scalar::{format_weight, Weight};

#[derive(Debug, Error)]
pub enum GraphFileError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: expected adjacency for vertex {vertex}, file ends early")]
    MissingVertexLine { line: usize, vertex: usize },
    #[error("line {line}: malformed token {token:?}: {msg}")]
    MalformedToken {
        line: usize,
        token: String,
        msg: String,
    },
    #[error("line {line}: vertex index {index} out of range 1..={n}")]
    VertexOutOfRange { line: usize, index: i64, n: usize },
    #[error("line {line}: vertex weight must be positive")]
    NonPositiveVertexWeight { line: usize },
    #[error("line {line}: negative edge weight")]
    NegativeEdgeWeight { line: usize },
    #[error(
        "line {line}: adjacency is not symmetric: edge {u}-{v} (1-indexed) \
         has no matching reverse entry with equal weight"
    )]
    AsymmetricAdjacency { line: usize, u: usize, v: usize },
}

#[derive(Debug, Error)]
pub enum PartitionFileError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("partition file has {got} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("line {line}: malformed block id {token:?}")]
    MalformedBlockId { line: usize, token: String },
}

struct HeaderInfo {
    n: usize,
    declared_m: usize,
    has_sizes: bool,
    has_vertex_weights: bool,
    has_edge_weights: bool,
}

fn parse_header(line: &str, line_no: usize) -> Result<HeaderInfo, GraphFileError> {
    let malformed = |msg: &str| GraphFileError::MalformedHeader {
        line: line_no,
        msg: msg.to_string(),
    };
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < 2 || tokens.len() > 4 {
        return Err(malformed("expected `n m [fmt [ncon]]`"));
    }
    let n: usize = tokens[0]
        .parse()
        .map_err(|_| malformed("vertex count is not a non-negative integer"))?;
    let declared_m: usize = tokens[1]
        .parse()
        .map_err(|_| malformed("edge count is not a non-negative integer"))?;
    let mut info = HeaderInfo {
        n,
        declared_m,
        has_sizes: false,
        has_vertex_weights: false,
        has_edge_weights: false,
    };
    if tokens.len() >= 3 {
        let fmt = tokens[2];
        if fmt.is_empty() || fmt.len() > 3 || !fmt.chars().all(|c| c == '0' || c == '1') {
            return Err(malformed("format code must be 1-3 binary digits"));
        }
        let digits: Vec<char> = fmt.chars().rev().collect();
        info.has_edge_weights = digits.first() == Some(&'1');
        info.has_vertex_weights = digits.get(1) == Some(&'1');
        info.has_sizes = digits.get(2) == Some(&'1');
    }
    if tokens.len() == 4 {
        let ncon: usize = tokens[3]
            .parse()
            .map_err(|_| malformed("ncon is not a non-negative integer"))?;
        if ncon != 1 {
            return Err(malformed(
                "multi-constraint vertex weights (ncon != 1) unsupported",
            ));
        }
    }
    Ok(info)
}

/// Loads a METIS/Chaco graph file.
///
/// Parallel edges are merged by summing their weights, self-loops are
/// dropped with a warning, and unweighted inputs get `ω ≡ 1`, `c ≡ 1`.
pub fn load_graph<S: Weight>(path: &Path) -> Result<Graph<S>, GraphFileError> {
    parse_graph(BufReader::new(File::open(path)?))
}

pub fn parse_graph<S: Weight>(reader: impl BufRead) -> Result<Graph<S>, GraphFileError> {
    let mut lines = reader.lines();
    let mut line_no = 0usize;
    let mut next_content_line = |line_no: &mut usize| -> Result<Option<String>, GraphFileError> {
        loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    *line_no += 1;
                    if line.trim_start().starts_with('%') {
                        continue;
                    }
                    return Ok(Some(line));
                }
                None => return Ok(None),
            }
        }
    };

    let header_line = next_content_line(&mut line_no)?.ok_or(GraphFileError::MalformedHeader {
        line: 1,
        msg: "empty file".to_string(),
    })?;
    let header_no = line_no;
    let header = parse_header(&header_line, header_no)?;
    let n = header.n;

    // Per-vertex adjacency with parallel entries merged, plus the file line
    // the vertex was declared on (for error reporting).
    let mut adjacency: Vec<Vec<(usize, S)>> = Vec::with_capacity(n);
    let mut vertex_lines: Vec<usize> = Vec::with_capacity(n);
    let mut vertex_weights: Vec<S> = Vec::with_capacity(n);
    let mut directed_entries = 0usize;
    let mut dropped_loops = 0usize;

    for u in 0..n {
        let line = next_content_line(&mut line_no)?.ok_or(GraphFileError::MissingVertexLine {
            line: line_no + 1,
            vertex: u + 1,
        })?;
        vertex_lines.push(line_no);
        let mut tokens = line.split_whitespace();
        if header.has_sizes {
            // Vertex sizes are accepted for format compatibility but unused.
            let token = tokens.next().ok_or(GraphFileError::MalformedToken {
                line: line_no,
                token: String::new(),
                msg: "missing vertex size".to_string(),
            })?;
            parse_number(token, line_no)?;
        }
        if header.has_vertex_weights {
            let token = tokens.next().ok_or(GraphFileError::MalformedToken {
                line: line_no,
                token: String::new(),
                msg: "missing vertex weight".to_string(),
            })?;
            let w = parse_number(token, line_no)?;
            if w <= 0.0 {
                return Err(GraphFileError::NonPositiveVertexWeight { line: line_no });
            }
            vertex_weights.push(S::from_f64(w).expect("vertex weight fits scalar"));
        } else {
            vertex_weights.push(S::one());
        }

        let mut list: Vec<(usize, S)> = Vec::new();
        while let Some(token) = tokens.next() {
            let target: i64 = token.parse().map_err(|_| GraphFileError::MalformedToken {
                line: line_no,
                token: token.to_string(),
                msg: "expected a neighbor index".to_string(),
            })?;
            let weight = if header.has_edge_weights {
                let wt = tokens.next().ok_or(GraphFileError::MalformedToken {
                    line: line_no,
                    token: token.to_string(),
                    msg: "neighbor index without edge weight".to_string(),
                })?;
                let w = parse_number(wt, line_no)?;
                if w < 0.0 {
                    return Err(GraphFileError::NegativeEdgeWeight { line: line_no });
                }
                S::from_f64(w).expect("edge weight fits scalar")
            } else {
                S::one()
            };
            if target < 1 || target as usize > n {
                return Err(GraphFileError::VertexOutOfRange {
                    line: line_no,
                    index: target,
                    n,
                });
            }
            let v = target as usize - 1;
            if v == u {
                dropped_loops += 1;
                continue;
            }
            list.push((v, weight));
        }
        list.sort_by_key(|&(v, _)| v);
        // Merge parallel entries by weight summation.
        let mut merged: Vec<(usize, S)> = Vec::with_capacity(list.len());
        for (v, w) in list {
            match merged.last_mut() {
                Some((lv, lw)) if *lv == v => *lw = *lw + w,
                _ => merged.push((v, w)),
            }
        }
        directed_entries += merged.len();
        adjacency.push(merged);
    }

    if dropped_loops > 0 {
        log::warn!("dropped {dropped_loops} self-loop(s) while loading graph");
    }

    // Symmetry check on the merged lists.
    for u in 0..n {
        for &(v, w) in &adjacency[u] {
            let reverse = adjacency[v]
                .binary_search_by_key(&u, |&(t, _)| t)
                .ok()
                .map(|i| adjacency[v][i].1);
            if reverse != Some(w) {
                return Err(GraphFileError::AsymmetricAdjacency {
                    line: vertex_lines[u],
                    u: u + 1,
                    v: v + 1,
                });
            }
        }
    }

    debug_assert_eq!(directed_entries % 2, 0);
    let m = directed_entries / 2;
    if m != header.declared_m {
        log::warn!(
            "header declares {} edges but the file holds {} after merging",
            header.declared_m,
            m
        );
    }

    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(directed_entries);
    let mut weights = Vec::with_capacity(directed_entries);
    offsets.push(0);
    for list in &adjacency {
        for &(v, w) in list {
            targets.push(v);
            weights.push(w);
        }
        offsets.push(targets.len());
    }
    Ok(Graph::from_csr(
        offsets,
        targets,
        weights,
        vertex_weights,
        m,
    ))
}

fn parse_number(token: &str, line: usize) -> Result<f64, GraphFileError> {
    let value: f64 = token.parse().map_err(|_| GraphFileError::MalformedToken {
        line,
        token: token.to_string(),
        msg: "expected a number".to_string(),
    })?;
    if !value.is_finite() {
        return Err(GraphFileError::MalformedToken {
            line,
            token: token.to_string(),
            msg: "weight must be finite".to_string(),
        });
    }
    Ok(value)
}

/// Writes a graph back out in METIS format (1-indexed, LF line endings).
/// Weight sections are emitted only when some weight differs from 1.
pub fn write_graph<S: Weight>(g: &Graph<S>, mut out: impl Write) -> io::Result<()> {
    let has_vwgt = (0..g.vertex_count()).any(|v| g.vertex_weight(v) != S::one());
    let has_ewgt = g.edges().any(|(_, _, w)| w != S::one());
    match (has_vwgt, has_ewgt) {
        (false, false) => writeln!(out, "{} {}", g.vertex_count(), g.edge_count())?,
        (false, true) => writeln!(out, "{} {} 001", g.vertex_count(), g.edge_count())?,
        (true, false) => writeln!(out, "{} {} 010", g.vertex_count(), g.edge_count())?,
        (true, true) => writeln!(out, "{} {} 011", g.vertex_count(), g.edge_count())?,
    }
    for u in 0..g.vertex_count() {
        let mut parts: Vec<String> = Vec::new();
        if has_vwgt {
            parts.push(format_weight(g.vertex_weight(u)));
        }
        for (v, w) in g.neighbors(u) {
            parts.push((v + 1).to_string());
            if has_ewgt {
                parts.push(format_weight(w));
            }
        }
        writeln!(out, "{}", parts.join(" "))?;
    }
    Ok(())
}

pub fn write_graph_file<S: Weight>(g: &Graph<S>, path: &Path) -> io::Result<()> {
    let mut file = File::create(path)?;
    write_graph(g, &mut file)
}

/// Reads a partition file: one block id per line, line `i` = vertex `i`.
pub fn read_partition(path: &Path, expected_n: usize) -> Result<Vec<usize>, PartitionFileError> {
    let reader = BufReader::new(File::open(path)?);
    let mut assignment = Vec::with_capacity(expected_n);
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let block: usize = token
            .parse()
            .map_err(|_| PartitionFileError::MalformedBlockId {
                line: idx + 1,
                token: token.to_string(),
            })?;
        assignment.push(block);
    }
    if assignment.len() != expected_n {
        return Err(PartitionFileError::LengthMismatch {
            expected: expected_n,
            got: assignment.len(),
        });
    }
    Ok(assignment)
}

pub fn write_partition(assignment: &[usize], path: &Path) -> io::Result<()> {
    let mut out = String::with_capacity(assignment.len() * 2);
    for &b in assignment {
        out.push_str(&b.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)
}
