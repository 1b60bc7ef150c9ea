//! EM fitting of a diagonal-covariance complex Gaussian mixture, one
//! component per symbol vector.
//!
//! Component `k` models `p(y | s_k) = CN(y; mu_k, diag(var_k))`. The mixing
//! weights only steer the E-step; the likelihood handed to detection is the
//! component density alone.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::augmentation::AugmentedDataset;
use crate::channel::ChannelMatrix;
use crate::likelihood::LikelihoodModel;
use crate::modulation::SymbolBook;
use crate::numeric::log_sum_exp;
use crate::{Error, Result};

/// Lower bound applied to every fitted variance.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Mixture parameters `(mu_k, var_k, pi_k)` for every symbol vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmParams {
    nr: usize,
    means: Vec<Complex64>,
    vars: Vec<f64>,
    weights: Vec<f64>,
    // cached: 1 / var and -Nr ln(pi) - sum ln var per component
    inv_vars: Vec<f64>,
    log_norms: Vec<f64>,
}

impl EmParams {
    /// `means` and `vars` are flattened `K x Nr`.
    pub fn new(nr: usize, means: Vec<Complex64>, vars: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nr == 0 || means.is_empty() || means.len() % nr != 0 {
            return Err(Error::Input("means must be a nonempty multiple of Nr".into()));
        }
        let k = means.len() / nr;
        if vars.len() != means.len() || weights.len() != k {
            return Err(Error::Input("inconsistent mixture parameter sizes".into()));
        }
        if vars.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Input("variances must be positive and finite".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Input("mixing weights must form a probability vector".into()));
        }
        let mut p = Self {
            nr,
            means,
            vars,
            weights,
            inv_vars: Vec::new(),
            log_norms: Vec::new(),
        };
        p.refresh();
        Ok(p)
    }

    fn refresh(&mut self) {
        self.inv_vars = self.vars.iter().map(|v| 1.0 / v).collect();
        let base = -(self.nr as f64) * PI.ln();
        self.log_norms = self
            .vars
            .chunks_exact(self.nr)
            .map(|v| base - v.iter().map(|x| x.ln()).sum::<f64>())
            .collect();
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn mean(&self, k: usize) -> &[Complex64] {
        &self.means[k * self.nr..(k + 1) * self.nr]
    }

    pub fn variances(&self, k: usize) -> &[f64] {
        &self.vars[k * self.nr..(k + 1) * self.nr]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same means and variances with uniform mixing weights.
    pub fn with_uniform_weights(&self) -> Self {
        let k = self.num_components();
        let mut p = self.clone();
        p.weights = vec![1.0 / k as f64; k];
        p
    }

    #[inline]
    fn component_log_density(&self, y: &[Complex64], k: usize) -> f64 {
        let mu = &self.means[k * self.nr..(k + 1) * self.nr];
        let inv = &self.inv_vars[k * self.nr..(k + 1) * self.nr];
        let mut q = 0.0;
        for r in 0..self.nr {
            q += (y[r] - mu[r]).norm_sqr() * inv[r];
        }
        self.log_norms[k] - q
    }
}

impl LikelihoodModel for EmParams {
    fn num_symbols(&self) -> usize {
        self.num_components()
    }

    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64 {
        self.component_log_density(y, k)
    }
}

/// `ln CN(y; mu_k, Sigma_k)` for a fitted mixture.
pub fn em_lf_eval(y: &[Complex64], params: &EmParams, k: usize) -> f64 {
    params.component_log_density(y, k)
}

/// Starting point `mu_k = H_hat s_k`, `var = sigma2`, `pi_k = 1 / K`.
pub fn em_initialize(h_hat: &ChannelMatrix, book: &SymbolBook, sigma2: f64) -> EmParams {
    assert!(sigma2 > 0.0, "noise variance must be positive");
    let nr = h_hat.nr();
    let k = book.len();
    EmParams::new(
        nr,
        h_hat.noiseless_means(book),
        vec![sigma2; k * nr],
        vec![1.0 / k as f64; k],
    )
    .expect("initial parameters are valid")
}

/// Posterior component probabilities, `D x K` row major.
#[derive(Debug, Clone)]
pub struct Responsibilities {
    k: usize,
    z: Vec<f64>,
}

impl Responsibilities {
    pub fn rows(&self) -> usize {
        self.z.len() / self.k
    }

    pub fn cols(&self) -> usize {
        self.k
    }

    pub fn row(&self, d: usize) -> &[f64] {
        &self.z[d * self.k..(d + 1) * self.k]
    }

    /// Builds from explicit rows, used for hard assignments.
    pub fn from_rows(k: usize, z: Vec<f64>) -> Result<Self> {
        if k == 0 || z.len() % k != 0 {
            return Err(Error::Input("responsibility matrix has the wrong shape".into()));
        }
        Ok(Self { k, z })
    }
}

/// Output of an E-step.
#[derive(Debug, Clone)]
pub struct EStep {
    pub responsibilities: Responsibilities,
    /// Observed-data log-likelihood of the parameters the step used.
    pub log_likelihood: f64,
    /// Rows where every component density underflowed; set to uniform.
    pub degenerate_rows: usize,
}

pub fn em_e_step(data: &AugmentedDataset, params: &EmParams) -> EStep {
    let k = params.num_components();
    let log_w: Vec<f64> = params.weights.iter().map(|w| w.ln()).collect();
    let mut z = vec![0.0; data.len() * k];
    let mut ll = 0.0;
    let mut degenerate = 0;
    for (y, row) in data.iter().zip(z.chunks_exact_mut(k)) {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = log_w[c] + params.component_log_density(y, c);
        }
        let norm = log_sum_exp(row);
        if norm == f64::NEG_INFINITY || !norm.is_finite() {
            degenerate += 1;
            row.fill(1.0 / k as f64);
            continue;
        }
        ll += norm;
        for slot in row.iter_mut() {
            *slot = (*slot - norm).exp();
        }
    }
    EStep {
        responsibilities: Responsibilities { k, z },
        log_likelihood: ll,
        degenerate_rows: degenerate,
    }
}

/// Output of an M-step.
#[derive(Debug, Clone)]
pub struct MStep {
    pub params: EmParams,
    /// Components with zero responsibility mass that kept their previous
    /// mean and variance.
    pub frozen: usize,
}

pub fn em_m_step(data: &AugmentedDataset, resp: &Responsibilities, prev: &EmParams) -> MStep {
    let nr = data.nr();
    let k = resp.cols();
    let n = data.len();
    debug_assert_eq!(resp.rows(), n);
    let mut mass = vec![0.0; k];
    let mut sums = vec![Complex64::new(0.0, 0.0); k * nr];
    for (d, y) in data.iter().enumerate() {
        for (c, &zc) in resp.row(d).iter().enumerate() {
            if zc == 0.0 {
                continue;
            }
            mass[c] += zc;
            let acc = &mut sums[c * nr..(c + 1) * nr];
            for r in 0..nr {
                acc[r] += y[r] * zc;
            }
        }
    }
    let mut means = prev.means.clone();
    let mut frozen_mask = vec![false; k];
    for c in 0..k {
        if mass[c] > 0.0 {
            for r in 0..nr {
                means[c * nr + r] = sums[c * nr + r] / mass[c];
            }
        } else {
            frozen_mask[c] = true;
        }
    }
    let mut sq = vec![0.0; k * nr];
    for (d, y) in data.iter().enumerate() {
        for (c, &zc) in resp.row(d).iter().enumerate() {
            if zc == 0.0 {
                continue;
            }
            for r in 0..nr {
                sq[c * nr + r] += zc * (y[r] - means[c * nr + r]).norm_sqr();
            }
        }
    }
    let mut vars = prev.vars.clone();
    for c in 0..k {
        if !frozen_mask[c] {
            for r in 0..nr {
                vars[c * nr + r] = (sq[c * nr + r] / mass[c]).max(VARIANCE_FLOOR);
            }
        }
    }
    let total: f64 = mass.iter().sum();
    let weights = mass.iter().map(|m| m / total).collect();
    let mut params = EmParams {
        nr,
        means,
        vars,
        weights,
        inv_vars: Vec::new(),
        log_norms: Vec::new(),
    };
    params.refresh();
    MStep {
        params,
        frozen: frozen_mask.iter().filter(|&&f| f).count(),
    }
}

/// `sum_d ln sum_k pi_k CN(y_d; mu_k, Sigma_k)`.
pub fn observed_log_likelihood(data: &AugmentedDataset, params: &EmParams) -> f64 {
    let k = params.num_components();
    let log_w: Vec<f64> = params.weights.iter().map(|w| w.ln()).collect();
    let mut buf = vec![0.0; k];
    data.iter()
        .map(|y| {
            for (c, slot) in buf.iter_mut().enumerate() {
                *slot = log_w[c] + params.component_log_density(y, c);
            }
            log_sum_exp(&buf)
        })
        .sum()
}

/// Result of [`em_fit`].
#[derive(Debug, Clone)]
pub struct EmFit {
    pub params: EmParams,
    /// Log-likelihood of the parameters entering each iteration.
    pub log_likelihoods: Vec<f64>,
    pub degenerate_rows: usize,
    pub frozen_components: usize,
}

/// Runs exactly `i_em` E/M alternations from `init`.
pub fn em_fit(data: &AugmentedDataset, init: &EmParams, i_em: usize) -> Result<EmFit> {
    if i_em == 0 {
        return Err(Error::Config("EM needs at least one iteration".into()));
    }
    if init.nr() != data.nr() {
        return Err(Error::Input(format!(
            "parameters have Nr = {} but data has Nr = {}",
            init.nr(),
            data.nr()
        )));
    }
    let mut params = init.clone();
    let mut trace = Vec::with_capacity(i_em);
    let (mut degenerate, mut frozen) = (0, 0);
    for _ in 0..i_em {
        let e = em_e_step(data, &params);
        trace.push(e.log_likelihood);
        degenerate += e.degenerate_rows;
        let m = em_m_step(data, &e.responsibilities, &params);
        frozen += m.frozen;
        params = m.params;
    }
    Ok(EmFit {
        params,
        log_likelihoods: trace,
        degenerate_rows: degenerate,
        frozen_components: frozen,
    })
}
