//! Acceptance run: one line per criterion, driven through the `collapsim`
//! binary with default configurations. Exits non-zero if any line fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_collapsim");

struct Criterion {
    id: u32,
    label: &'static str,
    experiment: &'static str,
    args: &'static [&'static str],
    metrics: &'static [&'static str],
    files: &'static [&'static str],
    limit_secs: f64,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        label: "collapse location pdf normalization",
        experiment: "grw1d",
        args: &[],
        metrics: &["pdf_normalization_error"],
        files: &[],
        limit_secs: 10.0,
    },
    Criterion {
        id: 2,
        label: "Poisson collapse times",
        experiment: "grw1d",
        args: &[],
        metrics: &["mean_interval", "ks_p_value"],
        files: &["flashes.csv"],
        limit_secs: 5.0,
    },
    Criterion {
        id: 3,
        label: "collapse agrees across hyperplanes",
        experiment: "flash-chain",
        args: &[],
        metrics: &["surface_equivalence_max", "chains_failed"],
        files: &["flashes.csv"],
        limit_secs: 30.0,
    },
    Criterion {
        id: 4,
        label: "flash chains agree between frames",
        experiment: "covariance",
        args: &[],
        metrics: &["histogram_max_bin_z", "chains_failed"],
        files: &["dt_histogram.csv"],
        limit_secs: 120.0,
    },
    Criterion {
        id: 5,
        label: "time dilation of flash intervals",
        experiment: "dilation",
        args: &[],
        metrics: &["dilation_eta_0", "dilation_eta_0.5", "dilation_eta_1", "chains_failed"],
        files: &["dilation.csv", "flashes.csv"],
        limit_secs: 120.0,
    },
    Criterion {
        id: 6,
        label: "unitary covariance of free evolution",
        experiment: "covariance",
        // the chain ensembles belong to criterion 4
        args: &["--param", "chains=2", "--param", "flashes=1", "--param", "bins=1"],
        metrics: &["covariance_defect_max"],
        files: &[],
        limit_secs: 10.0,
    },
    Criterion {
        id: 7,
        label: "separable states factorize",
        experiment: "factorization",
        args: &[],
        metrics: &["separable_defect_max", "bell_same_side_defect"],
        files: &[],
        limit_secs: 30.0,
    },
    Criterion {
        id: 8,
        label: "entangled initial conditions not comparable",
        experiment: "bell-noncompare",
        args: &[],
        metrics: &["bell_trace_distance", "separable_trace_distance", "no_signaling_z"],
        files: &["frame_comparison.json"],
        limit_secs: 120.0,
    },
    Criterion {
        id: 9,
        label: "interactions break the commutation",
        experiment: "factorization",
        args: &[],
        metrics: &["interaction_defect_zero_coupling", "interaction_defect_min_increase"],
        files: &["interaction.csv"],
        limit_secs: 60.0,
    },
    Criterion {
        id: 10,
        label: "collapse rate grows with particle number",
        experiment: "amplification",
        args: &[],
        metrics: &["rate_ratio_n1", "rate_ratio_n2", "rate_ratio_n4", "rate_ratio_n8"],
        files: &["amplification.csv"],
        limit_secs: 300.0,
    },
    Criterion {
        id: 11,
        label: "Fock space macro-object",
        experiment: "fock-macro",
        args: &[],
        metrics: &[
            "total_number_residual",
            "left_number_residual",
            "fidelity",
            "suppressed_amplitude",
            "object2_schmidt_1",
            "object2_schmidt_2",
            "earliest_object2_flash_time",
        ],
        files: &["fock_report.json"],
        limit_secs: 30.0,
    },
    Criterion {
        id: 12,
        label: "microcausality of collapse operators",
        experiment: "microcausality",
        args: &[],
        metrics: &["far_defect_max", "nonrelativistic_defect_max"],
        files: &["microcausality.csv"],
        limit_secs: 60.0,
    },
];

/// Reduced configurations for the reproducibility check.
const SMALL: &[(&str, &[&str])] = &[
    ("grw1d", &["--trials", "2000", "--param", "states=3", "--param", "trajectories=2", "--param", "collapses=5"]),
    ("flash-chain", &["--trials", "2", "--param", "cases=3", "--param", "flashes=3"]),
    ("dilation", &["--trials", "30", "--param", "flashes=2"]),
    ("covariance", &["--trials", "5", "--param", "chains=4", "--param", "flashes=3", "--param", "bins=2"]),
    ("microcausality", &["--trials", "3"]),
    ("bell-noncompare", &["--trials", "200"]),
    ("factorization", &["--trials", "5"]),
    ("amplification", &["--trials", "20"]),
    ("fock-macro", &[]),
];

struct Run {
    dir: PathBuf,
    summary: Value,
    seconds: f64,
}

fn run(experiment: &str, args: &[&str], out: &Path, workers: Option<&str>) -> Result<Run, String> {
    let mut cmd = Command::new(BIN);
    cmd.arg("run").arg(experiment).args(args).arg("--out").arg(out);
    if let Some(w) = workers {
        cmd.env("COLLAPSIM_WORKERS", w);
    }
    let start = Instant::now();
    let output = cmd.output().map_err(|e| format!("cannot start {BIN}: {e}"))?;
    let seconds = start.elapsed().as_secs_f64();
    match output.status.code() {
        Some(0) | Some(1) => {}
        other => {
            return Err(format!(
                "exit {other:?}: {}",
                String::from_utf8_lossy(&output.stderr).trim()
            ))
        }
    }
    let text = fs::read_to_string(out.join("summary.json")).map_err(|e| format!("summary.json: {e}"))?;
    let summary = serde_json::from_str(&text).map_err(|e| format!("summary.json: {e}"))?;
    Ok(Run { dir: out.to_path_buf(), summary, seconds })
}

fn judge(c: &Criterion, r: &Run) -> Vec<String> {
    let mut problems = Vec::new();
    if let Some(e) = r.summary["error"].as_str() {
        problems.push(format!("error: {e}"));
    }
    let metrics = r.summary["metrics"].as_array().cloned().unwrap_or_default();
    for name in c.metrics {
        match metrics.iter().find(|m| m["name"] == *name) {
            None => problems.push(format!("{name} missing")),
            Some(m) if m["pass"] != Value::Bool(true) => {
                problems.push(format!("{name} = {} ({})", m["value"], m["tolerance"].as_str().unwrap_or("")))
            }
            Some(_) => {}
        }
    }
    for file in c.files {
        if !r.dir.join(file).is_file() {
            problems.push(format!("{file} not written"));
        }
    }
    if r.seconds >= c.limit_secs {
        problems.push(format!("took {:.1} s", r.seconds));
    }
    problems
}

fn without_timestamp(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("summary is not an object")?.remove("timestamp");
    Ok(v)
}

/// Runs every experiment twice, on one and on two workers, and compares the
/// summaries (timestamp aside) and every other artifact byte for byte.
fn reproducibility(root: &Path) -> Vec<String> {
    let mut problems = Vec::new();
    for (experiment, args) in SMALL {
        let a = root.join(format!("{experiment}-a"));
        let b = root.join(format!("{experiment}-b"));
        let runs = run(experiment, args, &a, Some("1")).and_then(|_| run(experiment, args, &b, Some("2")));
        if let Err(e) = runs {
            problems.push(format!("{experiment}: {e}"));
            continue;
        }
        match (without_timestamp(&a.join("summary.json")), without_timestamp(&b.join("summary.json"))) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => problems.push(format!("{experiment}: summary.json differs")),
            (Err(e), _) | (_, Err(e)) => problems.push(format!("{experiment}: {e}")),
        }
        let names: Vec<_> = fs::read_dir(&a)
            .map(|d| d.filter_map(|e| e.ok()).map(|e| e.file_name()).collect())
            .unwrap_or_default();
        for name in names.iter().filter(|n| *n != "summary.json") {
            if fs::read(a.join(name)).ok() != fs::read(b.join(name)).ok() {
                problems.push(format!("{experiment}: {} differs", name.to_string_lossy()));
            }
        }
    }
    problems
}

fn report(id: u32, label: &str, seconds: f64, limit: Option<f64>, problems: &[String]) -> bool {
    let verdict = if problems.is_empty() { "PASS" } else { "FAIL" };
    let budget = limit.map(|l| format!(", limit {l:.0} s")).unwrap_or_default();
    println!("criterion {id:>2} {verdict} {label} ({seconds:.1} s{budget})");
    for p in problems {
        println!("    {p}");
    }
    problems.is_empty()
}

fn main() {
    let root = tempfile::tempdir().expect("temporary directory");
    let mut cache: BTreeMap<String, Result<Run, String>> = BTreeMap::new();
    let mut all = true;
    for c in CRITERIA {
        let key = format!("{} {}", c.experiment, c.args.join(" "));
        let out = root.path().join(format!("c{}", c.id));
        let result = cache
            .entry(key)
            .or_insert_with(|| run(c.experiment, c.args, &out, None));
        let (seconds, problems) = match result {
            Ok(r) => (r.seconds, judge(c, r)),
            Err(e) => (0.0, vec![e.clone()]),
        };
        all &= report(c.id, c.label, seconds, Some(c.limit_secs), &problems);
    }
    let start = Instant::now();
    let problems = reproducibility(&root.path().join("repeat"));
    all &= report(13, "identical summaries under a fixed seed", start.elapsed().as_secs_f64(), None, &problems);
    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILED" });
    if !all {
        std::process::exit(1);
    }
}
