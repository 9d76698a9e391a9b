//! Manual cross-validation of the LP export against an external solver.
//!
//! Ignored by default: needs `python3` with scipy (HiGHS backend). Run with
//! `cargo test --test lp_cross_check -- --ignored`.

mod common;

use std::io::Write;
use std::process::Command;

use common::gnp_graph;
use ilprefine::ilp::{build_ilp, IlpOptions, IlpPreset};
use ilprefine::model::build_model;
use ilprefine::partition::Partition;
use ilprefine::solver::{solve, SolveStatus, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const PY_SOLVER: &str = r#"
import json, sys
import numpy as np
from scipy.optimize import milp, LinearConstraint, Bounds

def parse_expr(expr, coeffs):
    const = 0.0
    sign = 1.0
    pending = None
    for t in expr.replace('+', ' + ').replace('-', ' - ').split():
        if t == '+':
            if pending is not None:
                const += sign * pending
                pending = None
            sign = 1.0
            continue
        if t == '-':
            if pending is not None:
                const += sign * pending
                pending = None
            sign = -1.0
            continue
        try:
            pending = float(t)
            continue
        except ValueError:
            pass
        coeffs[t] = coeffs.get(t, 0.0) + sign * (pending if pending is not None else 1.0)
        pending = None
        sign = 1.0
    if pending is not None:
        const += sign * pending
    return const

def solve_lp(path):
    objective = {}
    obj_const = 0.0
    rows = []
    fixed = {}
    names = []
    section = None
    for raw in open(path):
        line = raw.strip()
        if not line or line.startswith('\\'):
            continue
        low = line.lower()
        if low == 'minimize':
            section = 'obj'; continue
        if low == 'subject to':
            section = 'rows'; continue
        if low == 'bounds':
            section = 'bounds'; continue
        if low == 'binaries':
            section = 'bin'; continue
        if low == 'end':
            break
        if section == 'obj':
            expr = line.split(':', 1)[1]
            obj_const += parse_expr(expr, objective)
        elif section == 'rows':
            body = line.split(':', 1)[1]
            for op in ('>=', '<=', '='):
                if op in body:
                    lhs, rhs = body.rsplit(op, 1)
                    coeffs = {}
                    const = parse_expr(lhs, coeffs)
                    rows.append((coeffs, op, float(rhs) - const))
                    break
        elif section == 'bounds':
            name, value = line.split('=')
            fixed[name.strip()] = float(value)
        elif section == 'bin':
            names.extend(line.split())
    index = {n: i for i, n in enumerate(names)}
    nv = len(names)
    c = np.zeros(nv)
    for name, coef in objective.items():
        c[index[name]] = coef
    lb = np.zeros(nv)
    ub = np.ones(nv)
    for name, value in fixed.items():
        lb[index[name]] = value
        ub[index[name]] = value
    constraints = []
    for coeffs, op, rhs in rows:
        a = np.zeros(nv)
        for name, coef in coeffs.items():
            a[index[name]] = coef
        if op == '>=':
            constraints.append(LinearConstraint(a, rhs, np.inf))
        elif op == '<=':
            constraints.append(LinearConstraint(a, -np.inf, rhs))
        else:
            constraints.append(LinearConstraint(a, rhs, rhs))
    res = milp(c=c, constraints=constraints, integrality=np.ones(nv),
               bounds=Bounds(lb, ub))
    if res.status == 0:
        return {'status': 'optimal', 'objective': res.fun + obj_const}
    return {'status': 'infeasible'}

manifest = json.load(open(sys.argv[1]))
results = []
for entry in manifest:
    results.append(solve_lp(entry['lp']))
print(json.dumps(results))
"#;

#[test]
#[ignore = "needs python3 + scipy; run manually"]
fn exported_lp_files_agree_with_an_external_solver() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(314);
    let mut manifest = Vec::new();
    let mut expected = Vec::new();
    for case in 0..20u64 {
        let n = rng.gen_range(5..9);
        let g = gnp_graph(9000 + case, n, 0.5, 3);
        let k = rng.gen_range(2..=3);
        let assignment: Vec<usize> = (0..n).map(|v| v % k).collect();
        let p = Partition::new(&g, k, 0.1, assignment).unwrap();
        let kept: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        let m = build_model(&g, &p, &kept);
        let preset = if case % 2 == 0 {
            IlpPreset::Basic
        } else {
            IlpPreset::BasicSym
        };
        let Ok(inst) = build_ilp(&m, &IlpOptions::preset(preset)) else {
            continue; // unbalanced input under symmetry breaking
        };
        let res = solve(&inst, &SolverConfig::default());
        let lp_path = dir.path().join(format!("case{case}.lp"));
        inst.export_lp(&lp_path).unwrap();
        manifest.push(serde_json::json!({ "lp": lp_path.to_str().unwrap() }));
        expected.push(match res.status {
            SolveStatus::Optimal => Some(res.objective.unwrap()),
            SolveStatus::Infeasible => None,
            other => panic!("unexpected status {other}"),
        });
    }

    let manifest_path = dir.path().join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_vec(&manifest).unwrap()).unwrap();
    let script_path = dir.path().join("solve_lp.py");
    let mut f = std::fs::File::create(&script_path).unwrap();
    f.write_all(PY_SOLVER.as_bytes()).unwrap();
    drop(f);

    let output = Command::new("python3")
        .arg(&script_path)
        .arg(&manifest_path)
        .output()
        .expect("python3 available");
    assert!(
        output.status.success(),
        "external solver failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let results: Vec<serde_json::Value> = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(results.len(), expected.len());
    for (i, (result, expect)) in results.iter().zip(&expected).enumerate() {
        match expect {
            Some(objective) => {
                assert_eq!(result["status"], "optimal", "case {i}");
                let external = result["objective"].as_f64().unwrap();
                assert!(
                    (external - objective).abs() < 1e-6,
                    "case {i}: external {external} vs built-in {objective}"
                );
            }
            None => assert_eq!(result["status"], "infeasible", "case {i}"),
        }
    }
    println!("[cross-check] 20 exported programs agree with the external solver");
}
