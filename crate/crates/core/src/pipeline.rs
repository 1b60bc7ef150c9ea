//! Per-block simulation: channel and signal generation, the proposed
//! detectors for time-invariant and time-varying channels, and baselines.
//!
//! A [`Scenario`] holds everything drawn at random for one block. All
//! methods detect the same scenario, so comparisons between methods are
//! paired. Every random quantity comes from its own substream of the block
//! seed, which keeps the pilots, symbols and noise identical whether or not
//! the channel evolves.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::augmentation::{build_all_datasets, default_specs, AugmentedDataset, NoiseSpec};
use crate::boosting::{
    detect_all, determine_weights, per_estimator_detect, Aggregation, DetectionRatios, RefinedLf,
    WeightOutcome,
};
use crate::channel::{build_pilots, draw_initial_channel, ls_estimate, ChannelMatrix, ChannelProcess, PilotBlock};
use crate::impairments::{synthesize_into, AdcSpec, ImpairmentChain, OracleModel, PaParams};
use crate::lf_em::{em_fit, em_initialize, EmParams};
use crate::lf_kde::{kde_fit, KdeInit, LabeledBank};
use crate::likelihood::{GaussianModel, LikelihoodModel};
use crate::modulation::{Constellation, SymbolBook, MAX_SYMBOL_VECTORS};
use crate::numeric::{mix_seed, rng_for, sample_cn};
use crate::{Error, Result};

const TAG_CHANNEL: u64 = 1;
const TAG_SYMBOLS: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_AUGMENT: u64 = 4;
const TAG_PILOTS: u64 = 5;

/// Static parameters of one simulated block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockConfig {
    pub nt: usize,
    pub nr: usize,
    /// QAM order.
    pub modulation: usize,
    pub t_p: usize,
    pub t_d: usize,
    /// Base samples for the time-invariant detector.
    pub t_b: usize,
    /// Noise-injected copies per base sample; 0 uses the base samples as a
    /// single unaugmented dataset.
    pub i_da: usize,
    pub i_em: usize,
    /// EM iterations of the no-augmentation baseline.
    pub i_em_noaug: usize,
    pub specs: Vec<NoiseSpec>,
    pub sub_blocks: usize,
    pub zeta: f64,
    /// Dirichlet concentration, replicated over all symbol vectors.
    pub alpha: f64,
    pub chain: ImpairmentChain,
    pub pilots: PilotKind,
    /// Whether pilot slots pass through the PA as well as the ADC.
    pub pilot_pa: bool,
}

/// Pilot waveform used for the least-squares channel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotKind {
    /// Fresh i.i.d. `CN(0, 1)` entries every block (unit power on average).
    Gaussian,
    /// Truncated DFT rows with unit-modulus entries.
    Orthogonal,
}

impl PilotKind {
    pub fn name(self) -> &'static str {
        match self {
            PilotKind::Gaussian => "gaussian",
            PilotKind::Orthogonal => "orthogonal",
        }
    }
}

impl FromStr for PilotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(PilotKind::Gaussian),
            "orthogonal" | "dft" => Ok(PilotKind::Orthogonal),
            other => Err(Error::Config(format!("unknown pilot kind '{other}'"))),
        }
    }
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            nt: 2,
            nr: 4,
            modulation: 4,
            t_p: 8,
            t_d: 1000,
            t_b: 250,
            i_da: 10,
            i_em: 10,
            i_em_noaug: 20,
            specs: default_specs(),
            sub_blocks: 4,
            zeta: 0.9999,
            alpha: 2.0,
            chain: ImpairmentChain {
                pa: Some(PaParams::default()),
                adc: Some(AdcSpec::uniform(3, 0.5).expect("default ADC")),
            },
            pilots: PilotKind::Gaussian,
            pilot_pa: true,
        }
    }
}

impl BlockConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.nt == 0 || self.nr == 0 {
            return fail("nt and nr must be positive".into());
        }
        if self.t_p < self.nt {
            return fail(format!("t_p = {} is below nt = {}", self.t_p, self.nt));
        }
        if self.t_d == 0 {
            return fail("t_d must be positive".into());
        }
        if self.t_b == 0 || self.t_b > self.t_d {
            return fail(format!("t_b = {} must lie in 1..={}", self.t_b, self.t_d));
        }
        if self.i_em == 0 || self.i_em_noaug == 0 {
            return fail("EM iteration counts must be positive".into());
        }
        if self.specs.is_empty() {
            return fail("at least one augmentation noise scale is required".into());
        }
        if self.sub_blocks == 0 || self.t_d % self.sub_blocks != 0 {
            return fail(format!("sub_blocks = {} must divide t_d = {}", self.sub_blocks, self.t_d));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return fail(format!("zeta = {} is outside [0, 1]", self.zeta));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return fail(format!("alpha = {} must be positive", self.alpha));
        }
        let book = self.book()?;
        if book.len() > MAX_SYMBOL_VECTORS {
            return fail("too many symbol vectors".into());
        }
        Ok(())
    }

    pub fn book(&self) -> Result<SymbolBook> {
        SymbolBook::new(Constellation::qam(self.modulation)?, self.nt)
    }

    /// Number of estimators `J`.
    pub fn num_estimators(&self) -> usize {
        if self.i_da == 0 {
            1
        } else {
            self.specs.len()
        }
    }

    pub fn sub_block_len(&self) -> usize {
        self.t_d / self.sub_blocks
    }
}

/// `sigma^2 = Nt / SNR` with the SNR given in dB.
pub fn noise_variance(nt: usize, snr_db: f64) -> f64 {
    nt as f64 / 10f64.powf(snr_db / 10.0)
}

/// Channel dynamics within a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelMode {
    Invariant,
    Varying,
}

impl ChannelMode {
    pub fn name(self) -> &'static str {
        match self {
            ChannelMode::Invariant => "invariant",
            ChannelMode::Varying => "varying",
        }
    }
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "invariant" => Ok(ChannelMode::Invariant),
            "varying" => Ok(ChannelMode::Varying),
            other => Err(Error::Config(format!("unknown channel mode '{other}'"))),
        }
    }
}

/// Detection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Em,
    Kde,
    CeMld,
    OptimalMld,
    EmNoaug,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Em, Method::Kde, Method::CeMld, Method::OptimalMld, Method::EmNoaug];

    pub fn name(self) -> &'static str {
        match self {
            Method::Em => "em",
            Method::Kde => "kde",
            Method::CeMld => "ce_mld",
            Method::OptimalMld => "optimal_mld",
            Method::EmNoaug => "em_noaug",
        }
    }

    /// True for the proposed estimators, which take an aggregation rule.
    pub fn is_boosted(self) -> bool {
        matches!(self, Method::Em | Method::Kde)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// Random draws of one block.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mode: ChannelMode,
    pub sigma2: f64,
    /// Pilot-based least-squares estimate.
    pub h_hat: ChannelMatrix,
    /// True channel at each data slot; a single entry when invariant.
    channels: Vec<ChannelMatrix>,
    /// Transmitted symbol-vector indices, one per data slot.
    pub symbols: Vec<usize>,
    /// Received data signals, flattened `T_d x Nr`.
    pub received: Vec<Complex64>,
    augment_seed: u64,
}

impl Scenario {
    pub fn channel_at(&self, n: usize) -> &ChannelMatrix {
        if self.channels.len() == 1 {
            &self.channels[0]
        } else {
            &self.channels[n]
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    fn augment_seed(&self, sub_block: usize) -> u64 {
        mix_seed(self.augment_seed, sub_block as u64)
    }
}

/// Draws the channel, pilots, symbols and received signals of one block.
pub fn generate_scenario(
    cfg: &BlockConfig,
    book: &SymbolBook,
    mode: ChannelMode,
    sigma2: f64,
    seed: u64,
) -> Result<Scenario> {
    use rand::Rng;

    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Config(format!("noise variance {sigma2} must be positive")));
    }
    let (nr, nt) = (cfg.nr, cfg.nt);
    let mut ch_rng = rng_for(seed, TAG_CHANNEL);
    let mut sym_rng = rng_for(seed, TAG_SYMBOLS);
    let mut noise_rng = rng_for(seed, TAG_NOISE);
    let zeta = match mode {
        ChannelMode::Invariant => 1.0,
        ChannelMode::Varying => cfg.zeta,
    };
    let initial = draw_initial_channel(nr, nt, &mut ch_rng);
    let mut process = ChannelProcess::new(initial, zeta)?;
    let evolve = mode == ChannelMode::Varying && zeta < 1.0;

    let pilot_chain = ImpairmentChain {
        pa: if cfg.pilot_pa { cfg.chain.pa } else { None },
        adc: cfg.chain.adc.clone(),
    };
    let mut pilots = build_pilots(nt, cfg.t_p)?;
    if cfg.pilots == PilotKind::Gaussian {
        let mut p_rng = rng_for(seed, TAG_PILOTS);
        pilots.iter_mut().for_each(|v| *v = sample_cn(&mut p_rng, 1.0));
    }
    let mut received_p = nalgebra::DMatrix::zeros(nr, cfg.t_p);
    let mut col = vec![Complex64::new(0.0, 0.0); nt];
    let mut out = vec![Complex64::new(0.0, 0.0); nr];
    for t in 0..cfg.t_p {
        if t > 0 && evolve {
            process.evolve(&mut ch_rng);
        }
        for (i, c) in col.iter_mut().enumerate() {
            *c = pilots[(i, t)];
        }
        synthesize_into(process.current(), &col, sigma2, &pilot_chain, &mut noise_rng, &mut out);
        for r in 0..nr {
            received_p[(r, t)] = out[r];
        }
    }
    let h_hat = ls_estimate(&PilotBlock {
        pilots,
        received: received_p,
    })?;

    let mut channels = Vec::with_capacity(if evolve { cfg.t_d } else { 1 });
    let mut symbols = Vec::with_capacity(cfg.t_d);
    let mut received = vec![Complex64::new(0.0, 0.0); cfg.t_d * nr];
    for (n, y) in received.chunks_exact_mut(nr).enumerate() {
        if evolve {
            process.evolve(&mut ch_rng);
            channels.push(process.current().clone());
        } else if n == 0 {
            channels.push(process.current().clone());
        }
        let k = sym_rng.gen_range(0..book.len());
        symbols.push(k);
        synthesize_into(process.current(), book.vector(k), sigma2, &cfg.chain, &mut noise_rng, y);
    }
    Ok(Scenario {
        mode,
        sigma2,
        h_hat,
        channels,
        symbols,
        received,
        augment_seed: mix_seed(seed, TAG_AUGMENT),
    })
}

/// Fallbacks and selections recorded while running one method on a block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Detection weights per sub-block.
    pub weights: Vec<Vec<f64>>,
    /// Estimator carried forward (or selected) per sub-block.
    pub j_star: Vec<usize>,
    /// Sub-blocks where every Dirichlet score vanished.
    pub weight_fallbacks: usize,
    /// EM rows whose densities all underflowed.
    pub degenerate_rows: usize,
    /// EM components frozen for lack of responsibility mass.
    pub frozen_components: usize,
    /// KDE classes served by the Gaussian fallback.
    pub empty_classes: usize,
    /// Data-aided estimates that fell back to the initial channel.
    pub channel_fallbacks: usize,
    /// `||H_hat - H||_F` at the first data slot.
    pub channel_error: f64,
}

/// Output of one method on one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockResult {
    pub method: Method,
    /// `None` for the baselines.
    pub aggregation: Option<Aggregation>,
    pub detected: Vec<usize>,
    pub truth: Vec<usize>,
    /// Transmitted symbols per slot (`Nt`).
    pub symbols_per_slot: usize,
    /// Wrongly detected scalar symbols over all antennas and slots.
    pub symbol_errors: usize,
    pub diagnostics: Diagnostics,
}

/// Scalar symbol errors between detected and true symbol-vector indices.
pub fn count_symbol_errors(book: &SymbolBook, detected: &[usize], truth: &[usize]) -> usize {
    detected
        .iter()
        .zip(truth)
        .filter(|(a, b)| a != b)
        .map(|(&a, &b)| book.digits(a).iter().zip(book.digits(b)).filter(|(x, y)| **x != *y).count())
        .sum()
}

impl BlockResult {
    fn new(
        method: Method,
        aggregation: Option<Aggregation>,
        book: &SymbolBook,
        detected: Vec<usize>,
        truth: &[usize],
        diagnostics: Diagnostics,
    ) -> Self {
        Self {
            method,
            aggregation,
            symbol_errors: count_symbol_errors(book, &detected, truth),
            detected,
            truth: truth.to_vec(),
            symbols_per_slot: book.nt(),
            diagnostics,
        }
    }

    /// Slots whose detected symbol vector differs from the transmitted one.
    pub fn vector_errors(&self) -> usize {
        self.detected.iter().zip(&self.truth).filter(|(a, b)| a != b).count()
    }

    pub fn symbol_count(&self) -> usize {
        self.truth.len() * self.symbols_per_slot
    }

    /// Symbol error rate over all transmitted scalar symbols.
    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbol_count() as f64
    }
}

fn datasets_for(cfg: &BlockConfig, base: &[Complex64], seed: u64) -> Result<Vec<AugmentedDataset>> {
    if cfg.i_da == 0 {
        Ok(vec![AugmentedDataset::unaugmented(base, cfg.nr)])
    } else {
        build_all_datasets(base, cfg.nr, &cfg.specs, cfg.i_da, seed)
    }
}

/// Carried state between consecutive sub-blocks.
#[derive(Debug, Clone)]
pub enum CarryOver {
    Em(EmParams),
    Kde(LabeledBank),
}

enum Fitted {
    Em(Vec<EmParams>),
    Kde(Vec<LabeledBank>),
}

fn fit_all(
    cfg: &BlockConfig,
    book: &SymbolBook,
    sc: &Scenario,
    method: Method,
    base: &[Complex64],
    seed: u64,
    carry: Option<&CarryOver>,
    diag: &mut Diagnostics,
) -> Result<Fitted> {
    let datasets = datasets_for(cfg, base, seed)?;
    match method {
        Method::Em => {
            let init = match carry {
                Some(CarryOver::Em(p)) => p.with_uniform_weights(),
                _ => em_initialize(&sc.h_hat, book, sc.sigma2),
            };
            let mut out = Vec::with_capacity(datasets.len());
            for data in &datasets {
                let fit = em_fit(data, &init, cfg.i_em)?;
                diag.degenerate_rows += fit.degenerate_rows;
                diag.frozen_components += fit.frozen_components;
                out.push(fit.params);
            }
            Ok(Fitted::Em(out))
        }
        Method::Kde => {
            let init = match carry {
                Some(CarryOver::Kde(b)) => KdeInit::Transferred(b),
                _ => KdeInit::Coarse(&sc.h_hat),
            };
            let mut out = Vec::with_capacity(datasets.len());
            for data in &datasets {
                let fit = kde_fit(data, base, init, book, sc.sigma2)?;
                diag.empty_classes += fit.bank.empty_classes();
                diag.channel_fallbacks += usize::from(fit.channel_fell_back);
                out.push(fit.bank);
            }
            Ok(Fitted::Kde(out))
        }
        other => Err(Error::Input(format!("{other} is not an estimation method"))),
    }
}

fn detection_ratios<M: LikelihoodModel>(estimators: &[M], base: &[Complex64], nr: usize) -> Result<DetectionRatios> {
    DetectionRatios::from_counts(estimators.iter().map(|e| per_estimator_detect(base, nr, e)).collect())
}

fn weigh_and_detect<M: LikelihoodModel>(
    estimators: &[M],
    ratios: &DetectionRatios,
    alpha: &[f64],
    rule: Aggregation,
    slots: &[Complex64],
    nr: usize,
) -> Result<(Vec<usize>, WeightOutcome)> {
    let w = determine_weights(rule, ratios, alpha)?;
    let lf = RefinedLf::new(&w.weights, estimators)?;
    Ok((detect_all(slots, nr, &lf), w))
}

/// Per-aggregation detections of one sub-block plus the max-rule `J*`.
struct SubBlockOutput {
    detected: Vec<Vec<usize>>,
    outcomes: Vec<WeightOutcome>,
    carry: CarryOver,
}

#[allow(clippy::too_many_arguments)]
fn run_sub_block(
    cfg: &BlockConfig,
    book: &SymbolBook,
    sc: &Scenario,
    method: Method,
    aggs: &[Aggregation],
    base: &[Complex64],
    slots: &[Complex64],
    seed: u64,
    carry: Option<&CarryOver>,
    diag: &mut Diagnostics,
) -> Result<SubBlockOutput> {
    let alpha = vec![cfg.alpha; book.len()];
    let nr = cfg.nr;
    let fitted = fit_all(cfg, book, sc, method, base, seed, carry, diag)?;
    let mut detected = Vec::with_capacity(aggs.len());
    let mut outcomes = Vec::with_capacity(aggs.len());
    macro_rules! run {
        ($est:expr, $wrap:expr) => {{
            let est = $est;
            let ratios = detection_ratios(&est, base, nr)?;
            for &rule in aggs {
                let (d, w) = weigh_and_detect(&est, &ratios, &alpha, rule, slots, nr)?;
                detected.push(d);
                outcomes.push(w);
            }
            let j_star = crate::boosting::weights_max(&ratios, &alpha)?.j_star;
            $wrap(est.into_iter().nth(j_star).expect("J* in range"))
        }};
    }
    let carry = match fitted {
        Fitted::Em(est) => run!(est, CarryOver::Em),
        Fitted::Kde(est) => run!(est, CarryOver::Kde),
    };
    Ok(SubBlockOutput {
        detected,
        outcomes,
        carry,
    })
}

fn results_from(
    book: &SymbolBook,
    method: Method,
    aggs: &[Aggregation],
    detected: Vec<Vec<usize>>,
    truth: &[usize],
    base_diag: &Diagnostics,
    per_agg: Vec<(Vec<Vec<f64>>, Vec<usize>, usize)>,
) -> Vec<BlockResult> {
    aggs.iter()
        .zip(detected)
        .zip(per_agg)
        .map(|((&rule, det), (weights, j_star, fallbacks))| {
            let diag = Diagnostics {
                weights,
                j_star,
                weight_fallbacks: fallbacks,
                ..base_diag.clone()
            };
            BlockResult::new(method, Some(rule), book, det, truth, diag)
        })
        .collect()
}

/// Proposed detector with the first `T_b` slots as base samples, one result
/// per aggregation rule. All rules share the same fits.
pub fn run_block_invariant(
    cfg: &BlockConfig,
    book: &SymbolBook,
    sc: &Scenario,
    method: Method,
    aggs: &[Aggregation],
) -> Result<Vec<BlockResult>> {
    let nr = cfg.nr;
    let mut diag = Diagnostics {
        channel_error: sc.h_hat.distance(sc.channel_at(0)),
        ..Default::default()
    };
    let base = &sc.received[..cfg.t_b * nr];
    let out = run_sub_block(cfg, book, sc, method, aggs, base, &sc.received, sc.augment_seed(0), None, &mut diag)?;
    let per_agg = out
        .outcomes
        .iter()
        .map(|w| (vec![w.weights.as_slice().to_vec()], vec![w.j_star], usize::from(w.fell_back)))
        .collect();
    Ok(results_from(book, method, aggs, out.detected, &sc.symbols, &diag, per_agg))
}

/// Proposed detector over `S` sequential sub-blocks, each its own base set,
/// with the max-rule estimator carried into the next sub-block.
pub fn run_block_varying(
    cfg: &BlockConfig,
    book: &SymbolBook,
    sc: &Scenario,
    method: Method,
    aggs: &[Aggregation],
) -> Result<Vec<BlockResult>> {
    let nr = cfg.nr;
    let len = cfg.sub_block_len();
    let mut diag = Diagnostics {
        channel_error: sc.h_hat.distance(sc.channel_at(0)),
        ..Default::default()
    };
    let mut detected: Vec<Vec<usize>> = vec![Vec::with_capacity(cfg.t_d); aggs.len()];
    let mut per_agg: Vec<(Vec<Vec<f64>>, Vec<usize>, usize)> = vec![Default::default(); aggs.len()];
    let mut carry: Option<CarryOver> = None;
    for s in 0..cfg.sub_blocks {
        let slots = &sc.received[s * len * nr..(s + 1) * len * nr];
        let out = run_sub_block(cfg, book, sc, method, aggs, slots, slots, sc.augment_seed(s), carry.as_ref(), &mut diag)?;
        for (i, (d, w)) in out.detected.into_iter().zip(&out.outcomes).enumerate() {
            detected[i].extend(d);
            per_agg[i].0.push(w.weights.as_slice().to_vec());
            per_agg[i].1.push(w.j_star);
            per_agg[i].2 += usize::from(w.fell_back);
        }
        carry = Some(out.carry);
    }
    Ok(results_from(book, method, aggs, detected, &sc.symbols, &diag, per_agg))
}

fn baseline_result(
    method: Method,
    book: &SymbolBook,
    sc: &Scenario,
    detected: Vec<usize>,
    diagnostics: Diagnostics,
) -> BlockResult {
    BlockResult::new(method, None, book, detected, &sc.symbols, diagnostics)
}

/// Nearest `H_hat s_k` under the pilot estimate.
pub fn baseline_ce_mld(cfg: &BlockConfig, book: &SymbolBook, sc: &Scenario) -> BlockResult {
    let model = GaussianModel::new(&sc.h_hat, book, sc.sigma2);
    let detected = sc.received.chunks_exact(cfg.nr).map(|y| model.nearest(y)).collect();
    let diag = Diagnostics {
        channel_error: sc.h_hat.distance(sc.channel_at(0)),
        ..Default::default()
    };
    baseline_result(Method::CeMld, book, sc, detected, diag)
}

/// ML detection with the true impairments and the true channel per slot.
pub fn baseline_optimal_mld(cfg: &BlockConfig, book: &SymbolBook, sc: &Scenario) -> BlockResult {
    let nr = cfg.nr;
    let detected = if sc.channels.len() == 1 {
        let model = OracleModel::new(&sc.channels[0], book, sc.sigma2, &cfg.chain);
        detect_all(&sc.received, nr, &model)
    } else {
        sc.received
            .chunks_exact(nr)
            .enumerate()
            .map(|(n, y)| {
                let model = OracleModel::new(&sc.channels[n], book, sc.sigma2, &cfg.chain);
                detect_all(y, nr, &model)[0]
            })
            .collect()
    };
    baseline_result(Method::OptimalMld, book, sc, detected, Diagnostics::default())
}

/// EM on all received data signals without augmentation, detected with the
/// fitted component densities.
pub fn baseline_em_noaug(cfg: &BlockConfig, book: &SymbolBook, sc: &Scenario) -> Result<BlockResult> {
    let data = AugmentedDataset::unaugmented(&sc.received, cfg.nr);
    let fit = em_fit(&data, &em_initialize(&sc.h_hat, book, sc.sigma2), cfg.i_em_noaug)?;
    let detected = detect_all(&sc.received, cfg.nr, &fit.params);
    let diag = Diagnostics {
        degenerate_rows: fit.degenerate_rows,
        frozen_components: fit.frozen_components,
        channel_error: sc.h_hat.distance(sc.channel_at(0)),
        ..Default::default()
    };
    Ok(baseline_result(Method::EmNoaug, book, sc, detected, diag))
}

/// Runs `method` on a scenario. Boosted methods return one result per entry
/// of `aggs`; baselines return a single result.
pub fn run_method(
    cfg: &BlockConfig,
    book: &SymbolBook,
    sc: &Scenario,
    method: Method,
    aggs: &[Aggregation],
) -> Result<Vec<BlockResult>> {
    match method {
        Method::Em | Method::Kde => match sc.mode {
            ChannelMode::Invariant => run_block_invariant(cfg, book, sc, method, aggs),
            ChannelMode::Varying => run_block_varying(cfg, book, sc, method, aggs),
        },
        Method::CeMld => Ok(vec![baseline_ce_mld(cfg, book, sc)]),
        Method::OptimalMld => Ok(vec![baseline_optimal_mld(cfg, book, sc)]),
        Method::EmNoaug => Ok(vec![baseline_em_noaug(cfg, book, sc)?]),
    }
}
