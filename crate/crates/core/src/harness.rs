//! Monte Carlo sweeps, CSV persistence and the command-line interface.
//!
//! A sweep visits every `(channel mode, SNR)` pair. For each pair it draws
//! `trials` independent blocks, with block `t` seeded by
//! `mix_seed(seed, t)`, and runs every configured method on the same block.
//! Outcomes are merged in trial order, so the worker count never changes
//! the output.
//!
//! # Config file
//!
//! Flat `key = value` lines; `#` starts a comment and lists are comma
//! separated. Unknown or repeated keys are errors. Every key is optional.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `nt`, `nr` | 2, 4 | antennas |
//! | `modulation` | 4 | QAM order |
//! | `t_p`, `t_d`, `t_b` | 8, 1000, 250 | pilot, data and base slots |
//! | `i_da`, `i_em`, `i_em_noaug` | 10, 10, 20 | augmentation copies, EM iterations |
//! | `j` | 9 | estimator count, must match the grids |
//! | `sigma_g`, `sigma_u`, `sigma_l` | `0.04,0.08,0.12` / `0.8,1,1.2` / `0.21,0.24,0.27` | noise scales |
//! | `sub_blocks`, `zeta` | 4, 0.9999 | time-varying detector and channel |
//! | `alpha` | 2 | Dirichlet concentration |
//! | `channels` | `invariant` | `invariant`, `varying` or both |
//! | `snr_db` | `10,15,20,25` | |
//! | `trials`, `seed` | 1000, 1 | blocks per cell, master seed |
//! | `methods` | all | `em,kde,ce_mld,optimal_mld,em_noaug` |
//! | `aggregations` | all | `uniform,probabilistic,max` |
//! | `pa`, `pa_params` | on, `1.96,0.99,2.53,2.82` | transmit PA |
//! | `adc`, `adc_bits`, `adc_step` | on, 3, 0.5 | receive ADC |
//! | `pilots`, `pilot_pa` | `gaussian`, on | pilot waveform, PA on pilot slots |
//! | `timing` | on | record wall time; off writes 0 |

use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::augmentation::specs_from_grids;
use crate::boosting::Aggregation;
use crate::impairments::{AdcSpec, ImpairmentChain, PaParams};
use crate::modulation::SymbolBook;
use crate::numeric::mix_seed;
use crate::pipeline::{generate_scenario, noise_variance, run_method, BlockConfig, ChannelMode, Method, PilotKind};
use crate::{Error, Result};

/// CSV header, in column order.
pub const CSV_HEADER: [&str; 10] = [
    "method",
    "aggregation",
    "snr_db",
    "nt",
    "nr",
    "trials",
    "symbol_count",
    "error_count",
    "ser",
    "wall_seconds",
];

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "SIM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nt: usize,
    pub nr: usize,
    pub modulation: usize,
    pub t_p: usize,
    pub t_d: usize,
    pub t_b: usize,
    pub i_da: usize,
    pub i_em: usize,
    pub i_em_noaug: usize,
    pub j: usize,
    pub sigma_g: Vec<f64>,
    pub sigma_u: Vec<f64>,
    pub sigma_l: Vec<f64>,
    pub sub_blocks: usize,
    pub zeta: f64,
    pub alpha: f64,
    pub channels: Vec<ChannelMode>,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub aggregations: Vec<Aggregation>,
    pub pa: bool,
    pub pa_params: [f64; 4],
    pub adc: bool,
    pub adc_bits: u32,
    pub adc_step: f64,
    pub pilots: PilotKind,
    pub pilot_pa: bool,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let b = BlockConfig::default();
        let p = PaParams::default();
        Self {
            nt: b.nt,
            nr: b.nr,
            modulation: b.modulation,
            t_p: b.t_p,
            t_d: b.t_d,
            t_b: b.t_b,
            i_da: b.i_da,
            i_em: b.i_em,
            i_em_noaug: b.i_em_noaug,
            j: b.specs.len(),
            sigma_g: vec![0.04, 0.08, 0.12],
            sigma_u: vec![0.8, 1.0, 1.2],
            sigma_l: vec![0.21, 0.24, 0.27],
            sub_blocks: b.sub_blocks,
            zeta: b.zeta,
            alpha: b.alpha,
            channels: vec![ChannelMode::Invariant],
            snr_db: vec![10.0, 15.0, 20.0, 25.0],
            trials: 1000,
            seed: 1,
            methods: Method::ALL.to_vec(),
            aggregations: Aggregation::ALL.to_vec(),
            pa: true,
            pa_params: [p.alpha_a, p.eps_a, p.alpha_phi, p.eps_phi],
            adc: true,
            adc_bits: 3,
            adc_step: 0.5,
            pilots: b.pilots,
            pilot_pa: b.pilot_pa,
            timing: true,
        }
    }
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected a boolean, got '{other}'"))),
    }
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                other => other,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(Error::Config(format!("expected 'key = value', got '{line}'"))))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(at(Error::Config(format!("duplicate key '{key}'"))));
            }
            cfg.set(key, value).map_err(at)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let floats = |v: &str| parse_list(v, |s| parse_num::<f64>(key, s));
        match key {
            "nt" => self.nt = parse_num(key, value)?,
            "nr" => self.nr = parse_num(key, value)?,
            "modulation" => self.modulation = parse_num(key, value)?,
            "t_p" => self.t_p = parse_num(key, value)?,
            "t_d" => self.t_d = parse_num(key, value)?,
            "t_b" => self.t_b = parse_num(key, value)?,
            "i_da" => self.i_da = parse_num(key, value)?,
            "i_em" => self.i_em = parse_num(key, value)?,
            "i_em_noaug" => self.i_em_noaug = parse_num(key, value)?,
            "j" => self.j = parse_num(key, value)?,
            "sigma_g" => self.sigma_g = floats(value)?,
            "sigma_u" => self.sigma_u = floats(value)?,
            "sigma_l" => self.sigma_l = floats(value)?,
            "sub_blocks" => self.sub_blocks = parse_num(key, value)?,
            "zeta" => self.zeta = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "channels" => self.channels = parse_list(value, str::parse)?,
            "snr_db" => self.snr_db = floats(value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "methods" => {
                self.methods = if value.trim() == "all" {
                    Method::ALL.to_vec()
                } else {
                    parse_list(value, str::parse)?
                }
            }
            "aggregations" => {
                self.aggregations = if value.trim() == "all" {
                    Aggregation::ALL.to_vec()
                } else {
                    parse_list(value, str::parse)?
                }
            }
            "pa" => self.pa = parse_bool(key, value)?,
            "pa_params" => {
                let v = floats(value)?;
                self.pa_params = v
                    .try_into()
                    .map_err(|_| Error::Config("pa_params needs four values".into()))?;
            }
            "adc" => self.adc = parse_bool(key, value)?,
            "adc_bits" => self.adc_bits = parse_num(key, value)?,
            "adc_step" => self.adc_step = parse_num(key, value)?,
            "pilots" => self.pilots = value.parse()?,
            "pilot_pa" => self.pilot_pa = parse_bool(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Block parameters shared by every cell of the sweep.
    pub fn block_config(&self) -> Result<BlockConfig> {
        let [a, b, c, d] = self.pa_params;
        let chain = ImpairmentChain {
            pa: if self.pa { Some(PaParams::new(a, b, c, d)?) } else { None },
            adc: if self.adc {
                Some(AdcSpec::uniform(self.adc_bits, self.adc_step)?)
            } else {
                None
            },
        };
        Ok(BlockConfig {
            nt: self.nt,
            nr: self.nr,
            modulation: self.modulation,
            t_p: self.t_p,
            t_d: self.t_d,
            t_b: self.t_b,
            i_da: self.i_da,
            i_em: self.i_em,
            i_em_noaug: self.i_em_noaug,
            specs: specs_from_grids(&self.sigma_g, &self.sigma_u, &self.sigma_l)?,
            sub_blocks: self.sub_blocks,
            zeta: self.zeta,
            alpha: self.alpha,
            chain,
            pilots: self.pilots,
            pilot_pa: self.pilot_pa,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.sigma_g.len() + self.sigma_u.len() + self.sigma_l.len();
        if self.j != grid {
            return Err(Error::Config(format!(
                "j = {} but the noise-scale grids hold {grid} values",
                self.j
            )));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        if self.channels.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("channels and methods must not be empty".into()));
        }
        if self.aggregations.is_empty() && self.methods.iter().any(|m| m.is_boosted()) {
            return Err(Error::Config("em and kde need at least one aggregation".into()));
        }
        self.block_config()?.validate()
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SerRecord {
    /// Method name; `_tv` marks the time-varying channel.
    pub method: String,
    /// Aggregation rule, `none` for the baselines.
    pub aggregation: String,
    pub snr_db: f64,
    pub nt: usize,
    pub nr: usize,
    pub trials: u64,
    pub symbol_count: u64,
    pub error_count: u64,
    /// `error_count / symbol_count`; NaN when the cell failed.
    pub ser: f64,
    pub wall_seconds: f64,
}

impl SerRecord {
    /// Binomial standard error of `ser`.
    pub fn std_err(&self) -> f64 {
        (self.ser * (1.0 - self.ser) / self.symbol_count as f64).sqrt()
    }

    pub fn failed(&self) -> bool {
        self.ser.is_nan()
    }
}

/// Row label of a method under a channel mode.
pub fn method_label(method: Method, mode: ChannelMode) -> String {
    match mode {
        ChannelMode::Invariant => method.name().to_string(),
        ChannelMode::Varying => format!("{}_tv", method.name()),
    }
}

#[derive(Debug, Clone)]
struct Cell {
    method: String,
    aggregation: String,
    snr_db: f64,
    symbols: u64,
    errors: u64,
    seconds: f64,
    failure: Option<String>,
}

fn cells_for(cfg: &ExperimentConfig, mode: ChannelMode, snr_db: f64) -> Vec<Cell> {
    let mut out = Vec::new();
    for &m in &cfg.methods {
        let aggs: Vec<String> = if m.is_boosted() {
            cfg.aggregations.iter().map(|a| a.name().to_string()).collect()
        } else {
            vec!["none".to_string()]
        };
        for a in aggs {
            out.push(Cell {
                method: method_label(m, mode),
                aggregation: a,
                snr_db,
                symbols: 0,
                errors: 0,
                seconds: 0.0,
                failure: None,
            });
        }
    }
    out
}

/// Per-cell outcome of one block, in [`cells_for`] order.
type TrialOutcome = Vec<std::result::Result<(u64, u64, f64), String>>;

fn run_trial(
    cfg: &ExperimentConfig,
    block: &BlockConfig,
    book: &SymbolBook,
    mode: ChannelMode,
    sigma2: f64,
    seed: u64,
) -> TrialOutcome {
    let width = |m: Method| if m.is_boosted() { cfg.aggregations.len() } else { 1 };
    let sc = match generate_scenario(block, book, mode, sigma2, seed) {
        Ok(sc) => sc,
        Err(e) => {
            let n = cfg.methods.iter().map(|&m| width(m)).sum();
            return vec![Err(e.to_string()); n];
        }
    };
    let mut out = Vec::new();
    for &m in &cfg.methods {
        let start = Instant::now();
        match run_method(block, book, &sc, m, &cfg.aggregations) {
            Ok(results) => {
                let secs = start.elapsed().as_secs_f64();
                for r in results {
                    out.push(Ok((r.symbol_count() as u64, r.symbol_errors as u64, secs)));
                }
            }
            Err(e) => out.extend(std::iter::repeat_n(Err(e.to_string()), width(m))),
        }
    }
    out
}

fn worker_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} workers: {e}")))
}

/// Runs every cell of `cfg` on `threads` workers.
///
/// A cell whose block fails is reported with NaN SER and zero counts; the
/// reason goes to standard error.
pub fn run_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<SerRecord>> {
    cfg.validate()?;
    if cfg.trials == 0 {
        return Ok(Vec::new());
    }
    let block = cfg.block_config()?;
    let book = block.book()?;
    let pool = worker_pool(threads)?;
    let mut records = Vec::new();
    for &mode in &cfg.channels {
        for &snr in &cfg.snr_db {
            let sigma2 = noise_variance(cfg.nt, snr);
            let outcomes: Vec<TrialOutcome> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, &block, &book, mode, sigma2, mix_seed(cfg.seed, t)))
                    .collect()
            });
            let mut cells = cells_for(cfg, mode, snr);
            for trial in &outcomes {
                for (cell, o) in cells.iter_mut().zip(trial) {
                    match o {
                        Ok((n, e, s)) => {
                            cell.symbols += n;
                            cell.errors += e;
                            cell.seconds += s;
                        }
                        Err(msg) => {
                            cell.failure.get_or_insert_with(|| msg.clone());
                        }
                    }
                }
            }
            for c in cells {
                if let Some(msg) = &c.failure {
                    eprintln!("{} / {} at {} dB failed: {msg}", c.method, c.aggregation, c.snr_db);
                }
                let ok = c.failure.is_none();
                records.push(SerRecord {
                    method: c.method,
                    aggregation: c.aggregation,
                    snr_db: c.snr_db,
                    nt: cfg.nt,
                    nr: cfg.nr,
                    trials: cfg.trials,
                    symbol_count: if ok { c.symbols } else { 0 },
                    error_count: if ok { c.errors } else { 0 },
                    ser: if ok { c.errors as f64 / c.symbols as f64 } else { f64::NAN },
                    wall_seconds: if cfg.timing { c.seconds } else { 0.0 },
                });
            }
        }
    }
    sort_records(&mut records);
    Ok(records)
}

/// Method, then aggregation, then ascending SNR.
pub fn sort_records(records: &mut [SerRecord]) {
    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then_with(|| a.aggregation.cmp(&b.aggregation))
            .then_with(|| a.snr_db.total_cmp(&b.snr_db))
    });
}

/// `x` with six significant digits, in the style of C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    fn trim(s: &str) -> &str {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            s
        }
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim(mant))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_csv<W: std::io::Write>(records: &[SerRecord], w: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.method.clone(),
            r.aggregation.clone(),
            format_sig6(r.snr_db),
            r.nt.to_string(),
            r.nr.to_string(),
            r.trials.to_string(),
            r.symbol_count.to_string(),
            r.error_count.to_string(),
            format_sig6(r.ser),
            format_sig6(r.wall_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV text of `records` in their given order.
pub fn results_to_csv(records: &[SerRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV fields are UTF-8")
}

/// Writes `records` as CSV in their given order.
pub fn write_results(records: &[SerRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<SerRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Input(format!("{}: unexpected header", path.display())));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let bad = |what: &str| Error::Input(format!("{}: row {}: bad {what}", path.display(), i + 2));
        let f = |c: usize| row[c].parse::<f64>().map_err(|_| bad(CSV_HEADER[c]));
        let u = |c: usize| row[c].parse::<u64>().map_err(|_| bad(CSV_HEADER[c]));
        out.push(SerRecord {
            method: row[0].to_string(),
            aggregation: row[1].to_string(),
            snr_db: f(2)?,
            nt: u(3)? as usize,
            nr: u(4)? as usize,
            trials: u(5)?,
            symbol_count: u(6)?,
            error_count: u(7)?,
            ser: f(8)?,
            wall_seconds: f(9)?,
        });
    }
    Ok(out)
}

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn default_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Parser, Debug)]
#[command(name = "mimo-augment", version, about = "SER simulations of LF-estimation detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Config file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; defaults to SIM_THREADS or all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the sweep described by a config file.
    Run(RunArgs),
    /// Run a config over a replacement SNR list.
    SweepSnr {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated SNRs in dB.
        #[arg(long)]
        snrs: String,
    },
    /// Check the library's invariants on fixed random instances.
    Selftest,
}

/// Exit status of a failed command.
#[derive(Debug)]
pub enum CliFailure {
    /// Bad flags or config (status 2).
    Usage(String),
    /// Simulation or I/O failure (status 1).
    Runtime(String),
}

impl CliFailure {
    pub fn code(&self) -> i32 {
        match self {
            CliFailure::Usage(_) => 2,
            CliFailure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliFailure::Usage(m) | CliFailure::Runtime(m) => f.write_str(m),
        }
    }
}

fn usage(e: Error) -> CliFailure {
    CliFailure::Usage(e.to_string())
}

fn execute(args: &RunArgs, snrs: Option<&str>) -> std::result::Result<(), CliFailure> {
    let mut cfg = ExperimentConfig::from_file(&args.config).map_err(|e| match e {
        Error::Io { .. } => CliFailure::Runtime(e.to_string()),
        other => usage(other),
    })?;
    if let Some(s) = snrs {
        cfg.set("snr_db", s).map_err(usage)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.validate().map_err(usage)?;
    let threads = args.threads.unwrap_or_else(default_threads);
    let records = run_sweep(&cfg, threads).map_err(|e| CliFailure::Runtime(e.to_string()))?;
    write_results(&records, &args.out).map_err(|e| CliFailure::Runtime(e.to_string()))?;
    for r in &records {
        println!(
            "{:<16} {:<14} {:>6} dB  ser {:<12} ({} / {})",
            r.method,
            r.aggregation,
            format_sig6(r.snr_db),
            format_sig6(r.ser),
            r.error_count,
            r.symbol_count
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Parses `argv` (program name first) and runs the command; returns the
/// process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => execute(args, None),
        Command::SweepSnr { run, snrs } => execute(run, Some(snrs)),
        Command::Selftest => {
            let report = crate::selftest::run_all();
            for c in &report {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(CliFailure::Runtime("selftest failed".into()))
            }
        }
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
