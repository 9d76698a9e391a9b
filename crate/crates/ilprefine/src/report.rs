//! Performance reporting over refinement records: per-instance time ratios
//! against the fastest algorithm, plus geometric-mean summaries.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::refine::RunRecord;

/// Ratio value recorded for runs that hit the time limit.
pub const TIMED_OUT_RATIO: f64 = -1.0;

fn timed_out(record: &RunRecord) -> bool {
    record.status == "FeasibleTimeLimit"
}

/// One aggregated (instance, algorithm) cell.
#[derive(Clone, Debug)]
struct Cell {
    times: Vec<f64>,
    cuts: Vec<f64>,
    timed_out: bool,
}

impl Cell {
    fn mean_time(&self) -> f64 {
        self.times.iter().sum::<f64>() / self.times.len() as f64
    }

    fn mean_cut(&self) -> f64 {
        self.cuts.iter().sum::<f64>() / self.cuts.len() as f64
    }
}

type InstanceKey = (String, usize, u64);

fn instance_key(r: &RunRecord) -> InstanceKey {
    (r.instance.clone(), r.k, r.eps.to_bits())
}

/// Builds the report CSV.
///
/// Ratio rows (`row=ratio`) carry, per algorithm and instance, the cell's
/// mean time and cut and the ratio `t_best / t_algorithm`, where `t_best`
/// is the fastest mean time of any algorithm that finished on that
/// instance; runs that hit the time limit get ratio −1. Ratios are sorted
/// ascending per algorithm (`rank` column). Summary rows (`row=geomean`)
/// hold per-algorithm geometric means of cut and time over the instances
/// on which every algorithm finished. Repeated records in one cell are
/// averaged arithmetically first.
pub fn report_performance(records: &[RunRecord]) -> String {
    // cells[(instance, algorithm)] with deterministic BTreeMap iteration.
    let mut cells: BTreeMap<(InstanceKey, String), Cell> = BTreeMap::new();
    for r in records {
        let key = (instance_key(r), r.strategy.clone());
        let cell = cells.entry(key).or_insert_with(|| Cell {
            times: Vec::new(),
            cuts: Vec::new(),
            timed_out: false,
        });
        cell.times.push(r.time_s);
        cell.cuts.push(r.output_cut);
        cell.timed_out |= timed_out(r);
    }

    // Fastest finished algorithm per instance.
    let mut best_time: BTreeMap<InstanceKey, f64> = BTreeMap::new();
    for ((instance, _), cell) in &cells {
        if cell.timed_out {
            continue;
        }
        let t = cell.mean_time();
        best_time
            .entry(instance.clone())
            .and_modify(|cur| *cur = cur.min(t))
            .or_insert(t);
    }
    // Instances where every algorithm finished, for the geometric means.
    let mut all_finished: BTreeMap<InstanceKey, bool> = BTreeMap::new();
    for ((instance, _), cell) in &cells {
        let entry = all_finished.entry(instance.clone()).or_insert(true);
        *entry &= !cell.timed_out;
    }

    #[derive(Clone)]
    struct RatioRow {
        instance: InstanceKey,
        time: f64,
        cut: f64,
        ratio: f64,
    }
    let mut per_algorithm: BTreeMap<String, Vec<RatioRow>> = BTreeMap::new();
    for ((instance, algorithm), cell) in &cells {
        let ratio = if cell.timed_out {
            TIMED_OUT_RATIO
        } else {
            match best_time.get(instance) {
                Some(&best) if cell.mean_time() > 0.0 => best / cell.mean_time(),
                // A zero-time cell is itself the fastest.
                Some(_) => 1.0,
                None => TIMED_OUT_RATIO,
            }
        };
        per_algorithm
            .entry(algorithm.clone())
            .or_default()
            .push(RatioRow {
                instance: instance.clone(),
                time: cell.mean_time(),
                cut: cell.mean_cut(),
                ratio,
            });
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "row",
            "algorithm",
            "instance",
            "k",
            "eps",
            "rank",
            "time_s",
            "cut",
            "ratio",
            "geomean_cut",
            "geomean_time_s",
        ])
        .expect("in-memory write");
    for (algorithm, rows) in &mut per_algorithm {
        rows.sort_by(|a, b| {
            a.ratio
                .partial_cmp(&b.ratio)
                .expect("finite ratios")
                .then_with(|| a.instance.cmp(&b.instance))
        });
        for (rank, row) in rows.iter().enumerate() {
            writer
                .write_record([
                    "ratio",
                    algorithm,
                    &row.instance.0,
                    &row.instance.1.to_string(),
                    &format_eps(row.instance.2),
                    &(rank + 1).to_string(),
                    &format_float(row.time),
                    &format_float(row.cut),
                    &format_float(row.ratio),
                    "",
                    "",
                ])
                .expect("in-memory write");
        }
    }
    for (algorithm, rows) in &per_algorithm {
        let complete: Vec<&RatioRow> = rows
            .iter()
            .filter(|r| all_finished.get(&r.instance) == Some(&true))
            .collect();
        let (gcut, gtime) = if complete.is_empty() {
            (String::new(), String::new())
        } else {
            (
                format_float(geometric_mean(complete.iter().map(|r| r.cut))),
                format_float(geometric_mean(complete.iter().map(|r| r.time))),
            )
        };
        writer
            .write_record([
                "geomean", algorithm, "", "", "", "", "", "", "", &gcut, &gtime,
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Geometric mean via the log-sum form, so every value has equal influence.
pub fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for v in values {
        sum += v.ln();
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        (sum / count as f64).exp()
    }
}

fn format_eps(bits: u64) -> String {
    format_float(f64::from_bits(bits))
}

fn format_float(x: f64) -> String {
    format!("{x}")
}

/// Flat record dump with the documented column order.
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer.serialize(r).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn read_records_jsonl(path: &Path) -> io::Result<Vec<RunRecord>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", idx + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn append_record_jsonl(path: &Path, record: &RunRecord) -> io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let line = serde_json::to_string(record).expect("record serializes");
    writeln!(file, "{line}")
}
