//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Trial counts and tolerances are pinned below. The process exits 0 after
//! reporting; set `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.
//! Sweep CSVs are left in the target tmp directory for inspection.

use std::path::PathBuf;
use std::time::Instant;

use mimo_augment::harness::{default_threads, run_sweep, write_results, ExperimentConfig, SerRecord};
use mimo_augment::pipeline::{ChannelMode, Method};
use mimo_augment::selftest;

/// Blocks per Table 1 cell at 10 and 20 dB: 1000 x 1000 slots x 2 symbols.
const TABLE1_TRIALS: u64 = 1000;
/// Blocks per Table 1 cell at 15 and 25 dB, used only for ordering.
const TABLE1_SIDE_TRIALS: u64 = 250;
const VARYING_TRIALS: u64 = 200;
const FIG4_TRIALS: u64 = 500;
/// Cheap baselines get more blocks: their errors come from rare bad blocks.
const FIG4_BASELINE_TRIALS: u64 = 2000;
const FIG5_TRIALS: u64 = 500;

const MIN_TABLE1_SYMBOLS: u64 = 2_000_000;
const TABLE1_10DB: f64 = 8.00e-3;
const TABLE1_10DB_REL_TOL: f64 = 0.25;
const TABLE1_20DB: [(&str, f64); 3] = [("probabilistic", 1.46e-4), ("uniform", 1.72e-4), ("max", 2.00e-4)];
const TABLE1_20DB_FACTOR: f64 = 2.0;
const ORDER_SEPARATION_SE: f64 = 2.0;
const BASELINE_GAP: f64 = 2.0;
const ORACLE_SE: f64 = 3.0;

struct Runs {
    table1_inv: Vec<SerRecord>,
    table1_side: Vec<SerRecord>,
    varying_low: Vec<SerRecord>,
    varying_high: Vec<SerRecord>,
    fig4: Vec<SerRecord>,
    fig4_baselines: Vec<SerRecord>,
    fig5_noaug: Vec<SerRecord>,
}

fn sweep(name: &str, cfg: ExperimentConfig) -> Vec<SerRecord> {
    let start = Instant::now();
    let recs = run_sweep(&cfg, default_threads()).unwrap_or_else(|e| panic!("{name}: {e}"));
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("create output dir");
    write_results(&recs, &dir.join(format!("{name}.csv"))).expect("write CSV");
    eprintln!("  [{name}: {:.0} s]", start.elapsed().as_secs_f64());
    recs
}

fn base(nr: usize, snr: &[f64], methods: &[Method], trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        nr,
        snr_db: snr.to_vec(),
        methods: methods.to_vec(),
        trials,
        seed: 1,
        timing: false,
        ..Default::default()
    }
}

fn run_all() -> Runs {
    use Method::*;
    let varying = |mut c: ExperimentConfig| {
        c.channels = vec![ChannelMode::Varying];
        c.zeta = 0.9999;
        c
    };
    Runs {
        table1_inv: sweep("table1_invariant", base(4, &[10.0, 20.0], &[Em, OptimalMld], TABLE1_TRIALS)),
        table1_side: sweep("table1_invariant_side", base(4, &[15.0, 25.0], &[Em, OptimalMld], TABLE1_SIDE_TRIALS)),
        varying_low: sweep("table1_varying_low", varying(base(4, &[10.0, 15.0], &[Em, OptimalMld], VARYING_TRIALS))),
        varying_high: sweep(
            "table1_varying_high",
            varying(base(4, &[20.0, 25.0], &[Em, Kde, CeMld, OptimalMld], VARYING_TRIALS)),
        ),
        fig4: sweep("fig4", base(6, &[20.0, 25.0], &[Em, Kde, CeMld, EmNoaug, OptimalMld], FIG4_TRIALS)),
        fig4_baselines: sweep(
            "fig4_baselines",
            base(6, &[20.0, 25.0], &[CeMld, EmNoaug, OptimalMld], FIG4_BASELINE_TRIALS),
        ),
        fig5_noaug: sweep(
            "fig5_noaug",
            ExperimentConfig {
                i_da: 0,
                ..base(6, &[20.0], &[Em, Kde, OptimalMld], FIG5_TRIALS)
            },
        ),
    }
}

fn find<'a>(recs: &'a [SerRecord], method: &str, agg: &str, snr: f64) -> &'a SerRecord {
    recs.iter()
        .find(|r| r.method == method && r.aggregation == agg && r.snr_db == snr)
        .unwrap_or_else(|| panic!("no record for {method}/{agg} at {snr} dB"))
}

fn se_pair(a: &SerRecord, b: &SerRecord) -> f64 {
    (a.std_err().powi(2) + b.std_err().powi(2)).sqrt()
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn table1_values(r: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for agg in ["uniform", "probabilistic"] {
        let rec = find(&r.table1_inv, "em", agg, 10.0);
        let (lo, hi) = (TABLE1_10DB * (1.0 - TABLE1_10DB_REL_TOL), TABLE1_10DB * (1.0 + TABLE1_10DB_REL_TOL));
        let pass = (lo..=hi).contains(&rec.ser) && rec.symbol_count >= MIN_TABLE1_SYMBOLS;
        ok &= pass;
        parts.push(format!("10dB {agg} {} in [{}, {}]{}", sci(rec.ser), sci(lo), sci(hi), mark(pass)));
    }
    for (agg, target) in TABLE1_20DB {
        let rec = find(&r.table1_inv, "em", agg, 20.0);
        let (lo, hi) = (target / TABLE1_20DB_FACTOR, target * TABLE1_20DB_FACTOR);
        let pass = (lo..=hi).contains(&rec.ser) && rec.symbol_count >= MIN_TABLE1_SYMBOLS;
        ok &= pass;
        parts.push(format!("20dB {agg} {} in [{}, {}]{}", sci(rec.ser), sci(lo), sci(hi), mark(pass)));
    }
    let n = find(&r.table1_inv, "em", "max", 20.0).symbol_count;
    parts.push(format!("{n} symbols per cell"));
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        ""
    } else {
        " (miss)"
    }
}

fn table1_ordering(r: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let rows: [(&str, &[SerRecord], f64); 8] = [
        ("em", &r.table1_inv, 10.0),
        ("em", &r.table1_side, 15.0),
        ("em", &r.table1_inv, 20.0),
        ("em", &r.table1_side, 25.0),
        ("em_tv", &r.varying_low, 10.0),
        ("em_tv", &r.varying_low, 15.0),
        ("em_tv", &r.varying_high, 20.0),
        ("em_tv", &r.varying_high, 25.0),
    ];
    for (m, recs, snr) in rows {
        let p = find(recs, m, "probabilistic", snr);
        let x = find(recs, m, "max", snr);
        let mut pass = p.ser <= x.ser;
        let mut note = String::new();
        if snr == 20.0 {
            let gap = (x.ser - p.ser) / se_pair(p, x);
            pass &= gap >= ORDER_SEPARATION_SE;
            note = format!(" gap {gap:.1} se");
        }
        ok &= pass;
        parts.push(format!("{m} {snr}dB {} <= {}{note}{}", sci(p.ser), sci(x.ser), mark(pass)));
    }
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn fig4_claim(r: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for snr in [20.0, 25.0] {
        let ce = find(&r.fig4, "ce_mld", "none", snr).ser;
        for m in ["em", "kde"] {
            let s = find(&r.fig4, m, "probabilistic", snr).ser;
            let pass = s * BASELINE_GAP < ce;
            ok &= pass;
            parts.push(format!("{snr}dB {m} {} vs ce {}{}", sci(s), sci(ce), mark(pass)));
        }
    }
    let n20 = find(&r.fig4_baselines, "em_noaug", "none", 20.0);
    let n25 = find(&r.fig4_baselines, "em_noaug", "none", 25.0);
    let pass = n25.ser >= n20.ser;
    ok &= pass;
    parts.push(format!("em_noaug {} -> {}{}", sci(n20.ser), sci(n25.ser), mark(pass)));
    let e20 = find(&r.fig4, "em", "probabilistic", 20.0).ser;
    let e25 = find(&r.fig4, "em", "probabilistic", 25.0).ser;
    // with no errors left at 20 dB there is nothing to decrease
    let pass = e25 < e20 || (e20 == 0.0 && e25 == 0.0);
    ok &= pass;
    parts.push(format!("em {} -> {}{}", sci(e20), sci(e25), mark(pass)));
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn fig5_claim(r: &Runs) -> Outcome {
    let aug = find(&r.fig4, "em", "probabilistic", 20.0);
    let em0 = find(&r.fig5_noaug, "em", "probabilistic", 20.0);
    let kde0 = find(&r.fig5_noaug, "kde", "probabilistic", 20.0);
    let a = aug.ser < em0.ser;
    let b = kde0.ser < em0.ser;
    Outcome {
        passed: a && b,
        detail: format!(
            "em(I_DA=10) {} < em(I_DA=0) {}{}; kde(I_DA=0) {} < em(I_DA=0){}",
            sci(aug.ser),
            sci(em0.ser),
            mark(a),
            sci(kde0.ser),
            mark(b)
        ),
    }
}

fn oracle_dominance(r: &Runs) -> Outcome {
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for recs in [
        &r.table1_inv,
        &r.table1_side,
        &r.varying_low,
        &r.varying_high,
        &r.fig4,
        &r.fig4_baselines,
        &r.fig5_noaug,
    ] {
        for rec in recs.iter() {
            let oracle_name = if rec.method.ends_with("_tv") { "optimal_mld_tv" } else { "optimal_mld" };
            if rec.method == oracle_name {
                continue;
            }
            let o = find(recs, oracle_name, "none", rec.snr_db);
            let se = se_pair(o, rec);
            let excess = o.ser - rec.ser;
            checked += 1;
            if se > 0.0 {
                worst = worst.max(excess / se);
            }
            if excess > ORACLE_SE * se {
                failures.push(format!("{}/{} {}dB", rec.method, rec.aggregation, rec.snr_db));
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{checked} comparisons, largest oracle excess {worst:.2} se{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; violated by {}", failures.join(", "))
            }
        ),
    }
}

fn time_varying_claim(r: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let ce = find(&r.varying_high, "ce_mld_tv", "none", 20.0).ser;
    for m in ["em_tv", "kde_tv"] {
        for agg in ["uniform", "probabilistic", "max"] {
            let s = find(&r.varying_high, m, agg, 20.0).ser;
            let pass = s * BASELINE_GAP < ce;
            ok &= pass;
            parts.push(format!("20dB {m}/{agg} {}{}", sci(s), mark(pass)));
        }
    }
    parts.push(format!("ce {}", sci(ce)));
    let kde = find(&r.varying_high, "kde_tv", "probabilistic", 25.0).ser;
    let em = find(&r.varying_high, "em_tv", "probabilistic", 25.0).ser;
    let pass = kde <= em;
    ok &= pass;
    parts.push(format!("25dB kde {} <= em {}{}", sci(kde), sci(em), mark(pass)));
    Outcome {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn property_suites() -> Outcome {
    let checks = selftest::run_all();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} suites", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn main() {
    let threads = default_threads();
    eprintln!("acceptance: running sweeps on {threads} worker(s)");
    let runs = run_all();
    let criteria: [(&str, Outcome); 7] = [
        ("table1_invariant_em_values", table1_values(&runs)),
        ("table1_probabilistic_not_worse_than_max", table1_ordering(&runs)),
        ("fig4_proposed_beat_ce_and_noaug_overfits", fig4_claim(&runs)),
        ("fig5_augmentation_and_kde_without_it", fig5_claim(&runs)),
        ("oracle_dominance", oracle_dominance(&runs)),
        ("time_varying_subblock_gain", time_varying_claim(&runs)),
        ("property_suites", property_suites()),
    ];
    let mut failed = 0;
    for (name, o) in &criteria {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
