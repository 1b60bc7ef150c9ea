//! Labeled kernel density estimates with complex Gaussian kernels.
//!
//! Augmented samples are first labeled by nearest noiseless mean under the
//! pilot estimate, the base samples are then relabeled with the resulting
//! densities and used as virtual pilots for a data-aided channel estimate,
//! and the augmented samples are labeled once more under that estimate.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::augmentation::AugmentedDataset;
use crate::channel::{data_aided_estimate, ChannelMatrix};
use crate::likelihood::{GaussianModel, LikelihoodModel};
use crate::modulation::SymbolBook;
use crate::{Error, Result};

/// Lower bound on the per-coordinate sample variance used for bandwidths.
pub const BANDWIDTH_VARIANCE_FLOOR: f64 = 1e-6;

const PRUNE: f64 = 40.0;

#[derive(Debug, Clone)]
struct KernelClass {
    samples: Vec<Complex64>,
    inv_bandwidth: Vec<f64>,
    bandwidth: Vec<f64>,
    // -ln|M| - Nr ln(pi) - ln|D_k|
    log_norm: f64,
    // per-coordinate bounding box: (re_min, re_max, im_min, im_max)
    bounds: Vec<[f64; 4]>,
}

impl KernelClass {
    /// Upper bound on the class log-density at `y` from the bounding box.
    fn upper_bound(&self, y: &[Complex64]) -> f64 {
        let n = (self.samples.len() / y.len()) as f64;
        let mut q = 0.0;
        for ((b, yr), inv) in self.bounds.iter().zip(y).zip(&self.inv_bandwidth) {
            let dre = (b[0] - yr.re).max(yr.re - b[1]).max(0.0);
            let dim = (b[2] - yr.im).max(yr.im - b[3]).max(0.0);
            q -= (dre * dre + dim * dim) * inv;
        }
        self.log_norm + n.ln() + q
    }
}

/// Partition of one augmented dataset into per-symbol kernel banks.
#[derive(Debug, Clone)]
pub struct LabeledBank {
    nr: usize,
    classes: Vec<Option<KernelClass>>,
    channel: ChannelMatrix,
    fallback: GaussianModel,
}

fn cmp_samples(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

impl LabeledBank {
    /// Partitions `data` by `labels`; classes left empty fall back to
    /// `CN(y; H s_k, sigma2 I)` with `H = channel`.
    pub fn from_labels(
        data: &AugmentedDataset,
        labels: &[usize],
        book: &SymbolBook,
        channel: &ChannelMatrix,
        sigma2: f64,
    ) -> Result<Self> {
        if labels.len() != data.len() {
            return Err(Error::Input(format!(
                "{} labels for {} samples",
                labels.len(),
                data.len()
            )));
        }
        if channel.nr() != data.nr() || channel.nt() != book.nt() {
            return Err(Error::Input("channel shape does not match data and symbol book".into()));
        }
        let nr = data.nr();
        let k = book.len();
        let mut members: Vec<Vec<&[Complex64]>> = vec![Vec::new(); k];
        for (y, &l) in data.iter().zip(labels) {
            if l >= k {
                return Err(Error::Input(format!("label {l} out of range for K = {k}")));
            }
            members[l].push(y);
        }
        let classes = members
            .into_iter()
            .map(|mut m| {
                if m.is_empty() {
                    return None;
                }
                m.sort_by(|a, b| cmp_samples(a, b));
                let samples: Vec<Complex64> = m.into_iter().flatten().copied().collect();
                let bandwidth = select_bandwidth(&samples, nr);
                let inv_bandwidth = bandwidth.iter().map(|b| 1.0 / b).collect();
                let n = samples.len() / nr;
                let log_norm = -bandwidth.iter().map(|b| b.ln()).sum::<f64>()
                    - nr as f64 * PI.ln()
                    - (n as f64).ln();
                let mut bounds = vec![[f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY]; nr];
                for x in samples.chunks_exact(nr) {
                    for (b, v) in bounds.iter_mut().zip(x) {
                        b[0] = b[0].min(v.re);
                        b[1] = b[1].max(v.re);
                        b[2] = b[2].min(v.im);
                        b[3] = b[3].max(v.im);
                    }
                }
                Some(KernelClass {
                    samples,
                    inv_bandwidth,
                    bandwidth,
                    log_norm,
                    bounds,
                })
            })
            .collect();
        Ok(Self {
            nr,
            classes,
            channel: channel.clone(),
            fallback: GaussianModel::new(channel, book, sigma2),
        })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Number of samples labeled `k`.
    pub fn class_size(&self, k: usize) -> usize {
        self.classes[k].as_ref().map_or(0, |c| c.samples.len() / self.nr)
    }

    /// Samples labeled `k` in canonical order, flattened.
    pub fn class_samples(&self, k: usize) -> &[Complex64] {
        self.classes[k].as_ref().map_or(&[], |c| &c.samples)
    }

    /// Diagonal of the bandwidth matrix of class `k`; `None` when empty.
    pub fn bandwidth(&self, k: usize) -> Option<&[f64]> {
        self.classes[k].as_ref().map(|c| c.bandwidth.as_slice())
    }

    /// Classes using the Gaussian fallback.
    pub fn empty_classes(&self) -> usize {
        self.classes.iter().filter(|c| c.is_none()).count()
    }

    /// Channel whose noiseless means anchor the labels and the fallback.
    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    pub fn total_samples(&self) -> usize {
        (0..self.num_classes()).map(|k| self.class_size(k)).sum()
    }
}

/// `ln p_k(y)` from the bank of class `k`, or the Gaussian fallback when the
/// class is empty.
pub fn kde_eval(y: &[Complex64], bank: &LabeledBank, k: usize) -> f64 {
    let Some(class) = &bank.classes[k] else {
        return bank.fallback.log_likelihood(y, k);
    };
    let nr = bank.nr;
    let inv = &class.inv_bandwidth;
    // streaming max-shifted sum in canonical sample order; a term more than
    // PRUNE below the running maximum is under half an ulp of the sum
    let mut m = f64::NEG_INFINITY;
    let mut s = 0.0;
    'samples: for x in class.samples.chunks_exact(nr) {
        let cut = m - PRUNE;
        let mut q = 0.0;
        for r in 0..nr {
            q -= (x[r] - y[r]).norm_sqr() * inv[r];
            if q < cut {
                continue 'samples;
            }
        }
        if q == f64::NEG_INFINITY {
            continue;
        }
        if q > m {
            s = s * (m - q).exp() + 1.0;
            m = q;
        } else {
            s += (q - m).exp();
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    class.log_norm + m + s.ln()
}

impl LikelihoodModel for LabeledBank {
    fn num_symbols(&self) -> usize {
        self.num_classes()
    }

    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64 {
        kde_eval(y, self, k)
    }

    fn first_guess(&self, y: &[Complex64]) -> usize {
        self.fallback.nearest(y)
    }

    fn log_likelihood_above(&self, y: &[Complex64], k: usize, floor: f64) -> f64 {
        if let Some(class) = &self.classes[k] {
            let ub = class.upper_bound(y);
            if ub < floor {
                return ub;
            }
        }
        kde_eval(y, self, k)
    }
}

/// Diagonal bandwidth `h^2 v_r` with `h = n^(-1 / (Nr + 2))`.
///
/// `subset` holds `n >= 1` samples of length `nr`, flattened.
pub fn select_bandwidth(subset: &[Complex64], nr: usize) -> Vec<f64> {
    assert!(nr > 0 && !subset.is_empty() && subset.len() % nr == 0);
    let n = subset.len() / nr;
    let h2 = (n as f64).powf(-2.0 / (nr as f64 + 2.0));
    (0..nr)
        .map(|r| {
            let mean = subset.iter().skip(r).step_by(nr).sum::<Complex64>() / n as f64;
            let var = subset
                .iter()
                .skip(r)
                .step_by(nr)
                .map(|y| (y - mean).norm_sqr())
                .sum::<f64>()
                / n as f64;
            h2 * var.max(BANDWIDTH_VARIANCE_FLOOR)
        })
        .collect()
}

/// Nearest noiseless mean `H_hat s_k` for every sample, ties toward the
/// lowest index.
pub fn coarse_label(data: &AugmentedDataset, h_hat: &ChannelMatrix, book: &SymbolBook) -> Vec<usize> {
    let nearest = GaussianModel::new(h_hat, book, 1.0);
    data.iter().map(|y| nearest.nearest(y)).collect()
}

/// Most likely symbol index under `lf` for each base sample.
pub fn refine_labels<M: LikelihoodModel + ?Sized>(base: &[Complex64], nr: usize, lf: &M) -> Vec<usize> {
    base.chunks_exact(nr).map(|y| lf.most_likely(y)).collect()
}

/// Source of the first-stage densities used to label the base samples.
#[derive(Debug, Clone, Copy)]
pub enum KdeInit<'a> {
    /// Coarse nearest-mean labels under a pilot channel estimate.
    Coarse(&'a ChannelMatrix),
    /// A refined bank carried over from an earlier fit.
    Transferred(&'a LabeledBank),
}

/// Outcome of [`kde_fit`].
#[derive(Debug, Clone)]
pub struct KdeFit {
    pub bank: LabeledBank,
    /// Labels assigned to the base samples by the first-stage densities.
    pub virtual_pilot_labels: Vec<usize>,
    /// Data-aided estimate could not be formed; the initial channel was kept.
    pub channel_fell_back: bool,
}

/// Fits a refined bank on `data`, whose base samples are `base`.
pub fn kde_fit(
    data: &AugmentedDataset,
    base: &[Complex64],
    init: KdeInit<'_>,
    book: &SymbolBook,
    sigma2: f64,
) -> Result<KdeFit> {
    let nr = data.nr();
    if base.is_empty() || base.len() % nr != 0 {
        return Err(Error::Input("base samples must be a nonempty multiple of Nr".into()));
    }
    let coarse;
    let (first, h_init): (&LabeledBank, &ChannelMatrix) = match init {
        KdeInit::Coarse(h_hat) => {
            let labels = coarse_label(data, h_hat, book);
            coarse = LabeledBank::from_labels(data, &labels, book, h_hat, sigma2)?;
            (&coarse, h_hat)
        }
        KdeInit::Transferred(prev) => {
            if prev.nr() != nr || prev.num_classes() != book.len() {
                return Err(Error::Input("transferred bank does not match the data".into()));
            }
            (prev, prev.channel())
        }
    };
    let virtual_pilot_labels = refine_labels(base, nr, first);
    let est = data_aided_estimate(base, &virtual_pilot_labels, book, h_init);
    let labels = coarse_label(data, &est.channel, book);
    let bank = LabeledBank::from_labels(data, &labels, book, &est.channel, sigma2)?;
    Ok(KdeFit {
        bank,
        virtual_pilot_labels,
        channel_fell_back: est.fell_back,
    })
}
