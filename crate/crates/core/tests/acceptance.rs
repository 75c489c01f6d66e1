//! Acceptance gate: one line per criterion, nonzero exit when any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use hermax::verify::{run_check, CheckKind, VerifyConfig};
use serde_json::Value;

use common::compare::{compare_grid, REL_TOL};

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn report<'a>(suite: &'a Value, name: &str) -> &'a Value {
    suite["reports"]
        .as_array()
        .and_then(|rs| rs.iter().find(|r| r["name"] == name))
        .unwrap_or_else(|| panic!("report `{name}` missing"))
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => s.parse().unwrap_or(f64::NAN),
        _ => f64::NAN,
    }
}

fn passed(r: &Value) -> bool {
    r["status"] == "pass" && r["violation_count"] == 0
}

fn timed(kind: CheckKind) -> Duration {
    let start = Instant::now();
    run_check(kind, &VerifyConfig::with_seed(42));
    start.elapsed()
}

fn run_verify() -> (i32, Vec<u8>, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hermax"))
        .args(["verify", "--all", "--seed", "42"])
        .stderr(std::process::Stdio::null())
        .output()
        .expect("hermax runs");
    (out.status.code().unwrap_or(-1), out.stdout, start.elapsed())
}

fn main() {
    let (code_a, bytes_a, time_a) = run_verify();
    let (code_b, bytes_b, time_b) = run_verify();
    let suite: Value = serde_json::from_slice(&bytes_a).unwrap();
    let mut lines = Vec::new();

    let kernel = report(&suite, "kernel");
    let kernel_time = timed(CheckKind::Kernel);
    let ck = num(&kernel["details"]["chapman_kolmogorov_max_residual"]);
    let gs = num(&kernel["details"]["ground_state_max_residual"]);
    let cases = num(&kernel["details"]["chapman_kolmogorov_cases"]);
    lines.push(Line {
        id: 1,
        title: "kernel identities",
        pass: passed(kernel) && ck < 1e-6 && gs < 1e-6 && cases >= 625.0 && kernel_time < Duration::from_secs(30),
        detail: format!("ck={ck:.2e} ground={gs:.2e} cases={cases} time={kernel_time:.2?}"),
    });

    let tmax = report(&suite, "tmax");
    let tmax_time = timed(CheckKind::Tmax);
    let samples = num(&tmax["samples"]);
    let first = num(&tmax["details"]["first_layer_samples"]);
    let scan = num(&tmax["details"]["scan_points"]);
    let m_min = num(&tmax["details"]["min_m_factor"]);
    let m_cap = num(&tmax["details"]["max_m_over_cap"]);
    lines.push(Line {
        id: 2,
        title: "t_m bracket, single sign change, 2 <= M <= t_m/16d^2",
        pass: passed(tmax)
            && samples >= 1000.0
            && first > 0.0
            && first < samples
            && scan >= 1e4
            && m_min >= 2.0
            && m_cap <= 1.0
            && tmax_time < Duration::from_secs(60),
        detail: format!(
            "samples={samples} first_layer={first} min_M={m_min:.1} max_M/cap={m_cap:.3} time={tmax_time:.2?}"
        ),
    });

    let ratio = report(&suite, "ratio");
    let d = &ratio["details"];
    let log_far: Vec<f64> = d["log_c_far"].as_array().unwrap().iter().map(num).collect();
    let log_cmp: Vec<f64> = d["log_c_cmp"].as_array().unwrap().iter().map(num).collect();
    let drift_far = num(&d["drift_c_far"]);
    let drift_cmp = num(&d["drift_c_cmp"]);
    lines.push(Line {
        id: 3,
        title: "far-kernel decay constants finite and stable",
        pass: passed(ratio)
            && log_far.iter().chain(&log_cmp).all(|v| v.is_finite())
            && drift_far < 0.1
            && drift_cmp < 0.1
            && num(&d["doubled_samples"]) >= 1000.0,
        detail: format!(
            "log C_far={:.4e} log C_cmp={:.4} drift={drift_far:.2e}/{drift_cmp:.2e}",
            log_far[0], log_cmp[0]
        ),
    });

    let grids = [(1usize, 1u32), (1, 2), (2, 1)];
    let mut comparisons = 0;
    let mut failures = Vec::new();
    for (i, &(dim, layer)) in grids.iter().enumerate() {
        let cells = common::cells(dim, layer).len();
        assert!(cells <= 64);
        let t = compare_grid(dim, layer, 20, 1000 + i as u64);
        comparisons += t.comparisons;
        failures.extend(t.failures);
    }
    let bonus = compare_grid(1, 3, 5, 2000);
    for f in failures.iter().take(5) {
        eprintln!("  oracle mismatch: {f}");
    }
    lines.push(Line {
        id: 4,
        title: "oracle equivalence on grids with <= 64 cells",
        pass: failures.is_empty() && bonus.failures.is_empty(),
        detail: format!(
            "grids={grids:?} functions=20 comparisons={comparisons} mismatches={} rel_tol={REL_TOL:e} (1,3): {} of {}",
            failures.len(),
            bonus.comparisons - bonus.failures.len(),
            bonus.comparisons
        ),
    });

    let dom = report(&suite, "domination");
    let d = &dom["details"];
    let sup = &d["sup_mplus_far_over_mtheta"];
    let sups: Vec<f64> = ["theta=0", "theta=1", "theta=2", "theta=4"].iter().map(|k| num(&sup[*k])).collect();
    lines.push(Line {
        id: 5,
        title: "pointwise dominations",
        pass: passed(dom) && sups.iter().all(|v| v.is_finite()),
        detail: format!(
            "points={} functions={} violations={} sup M+far/M^theta={:?}",
            d["evaluation_points"],
            d["functions"],
            dom["violation_count"],
            sups.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
        ),
    });

    let weights = report(&suite, "weights");
    let weights_time = timed(CheckKind::Weights);
    let sep = &weights["details"]["separation"];
    let growth = num(&sep["growth"]);
    let envelope = num(&sep["envelope_factor"]);
    lines.push(Line {
        id: 6,
        title: "weight-class separation for (1+|x|)^4",
        pass: sep["monotone"] == true && growth > 1e3 && envelope <= 4.0 && weights_time < Duration::from_secs(10),
        detail: format!("growth={growth:.4e} envelope={envelope:.3} time={weights_time:.2?}"),
    });

    let ext = &weights["details"]["extension"];
    let dev = num(&ext["max_deviation"]);
    lines.push(Line {
        id: 7,
        title: "periodic extension tiling equality",
        pass: ext["ok"] == true && dev <= 1e-10 && num(&ext["cells"]) == 8.0,
        detail: format!("cubes={} levels={} max_deviation={dev:e}", ext["cubes"], ext["levels"]),
    });

    let total = time_a.max(time_b);
    lines.push(Line {
        id: 8,
        title: "verify --all --seed 42 deterministic",
        pass: bytes_a == bytes_b && code_a == 0 && code_b == 0 && total < Duration::from_secs(300),
        detail: format!(
            "identical={} bytes={} exit={code_a}/{code_b} runtime={time_a:.1?}/{time_b:.1?}",
            bytes_a == bytes_b,
            bytes_a.len()
        ),
    });

    let mut all = true;
    for l in &lines {
        all &= l.pass;
        println!(
            "criterion {} {:<4} {:<52} {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.title,
            l.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
