//! Transmit power-amplifier and receive ADC distortions.
//!
//! The PA follows the AM/AM, AM/PM saturation model
//! `A(r) = a_a r / (1 + e_a r^2)`, `Phi(r) = a_p r^2 / (1 + e_p r^2)`.
//! The ADC quantizes real and imaginary parts independently onto a grid of
//! `2^B` levels whose decision boundaries are the level midpoints; the two
//! outermost bins are open-ended.
//!
//! [`OracleModel`] is the exact likelihood of the quantized observation when
//! the channel and both distortions are known, used by the oracle detector.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use statrs::function::erf::erfc;

use crate::channel::ChannelMatrix;
use crate::likelihood::LikelihoodModel;
use crate::modulation::SymbolBook;
use crate::numeric::{ln_one_minus_exp, sample_cn, ComplexVec};
use crate::{Error, Result};

/// PA coefficients `(alpha_a, eps_a, alpha_phi, eps_phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaParams {
    pub alpha_a: f64,
    pub eps_a: f64,
    pub alpha_phi: f64,
    pub eps_phi: f64,
}

impl PaParams {
    pub fn new(alpha_a: f64, eps_a: f64, alpha_phi: f64, eps_phi: f64) -> Result<Self> {
        let p = Self {
            alpha_a,
            eps_a,
            alpha_phi,
            eps_phi,
        };
        if ![alpha_a, eps_a, alpha_phi, eps_phi].iter().all(|v| v.is_finite()) || alpha_a <= 0.0 {
            return Err(Error::Config(format!("invalid PA parameters {p:?}")));
        }
        Ok(p)
    }

    pub fn am_am(&self, r: f64) -> f64 {
        self.alpha_a * r / (1.0 + self.eps_a * r * r)
    }

    pub fn am_pm(&self, r: f64) -> f64 {
        self.alpha_phi * r * r / (1.0 + self.eps_phi * r * r)
    }
}

impl Default for PaParams {
    fn default() -> Self {
        Self {
            alpha_a: 1.96,
            eps_a: 0.99,
            alpha_phi: 2.53,
            eps_phi: 2.82,
        }
    }
}

/// Scalar quantizer with `2^B` output levels.
#[derive(Debug, Clone, PartialEq)]
pub struct AdcSpec {
    bits: u32,
    levels: Vec<f64>,
    boundaries: Vec<f64>,
}

impl AdcSpec {
    /// Uniform mid-rise grid `y_k = (k - (2^B + 1) / 2) * step`, `k = 1..2^B`.
    ///
    /// `B = 3, step = 0.5` gives levels `-1.75, -1.25, ..., 1.75`.
    pub fn uniform(bits: u32, step: f64) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::Config(format!("ADC resolution {bits} bits out of range 1..=16")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Config(format!("ADC step must be positive, got {step}")));
        }
        let n = 1usize << bits;
        let centre = (n as f64 + 1.0) / 2.0;
        let levels = (1..=n).map(|k| (k as f64 - centre) * step).collect();
        Self::from_levels(bits, levels)
    }

    /// Arbitrary strictly increasing levels; boundaries are the midpoints.
    pub fn from_levels(bits: u32, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != 1usize << bits {
            return Err(Error::Config(format!(
                "{bits}-bit ADC needs {} levels, got {}",
                1usize << bits,
                levels.len()
            )));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) || levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::Config("ADC levels must be finite and strictly increasing".into()));
        }
        let boundaries = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            bits,
            levels,
            boundaries,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Index of the bin `b_{k-1} < r <= b_k` containing `r`.
    pub fn bin_of(&self, r: f64) -> usize {
        self.boundaries.partition_point(|&b| b < r)
    }

    pub fn quantize(&self, r: f64) -> f64 {
        self.levels[self.bin_of(r)]
    }

    /// `(lower, upper)` edges of bin `idx`; the outermost edges are infinite.
    pub fn bin_edges(&self, idx: usize) -> (f64, f64) {
        let lo = if idx == 0 {
            f64::NEG_INFINITY
        } else {
            self.boundaries[idx - 1]
        };
        let hi = self.boundaries.get(idx).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Bin whose output level equals `value`, if any.
    pub fn level_index(&self, value: f64) -> Option<usize> {
        let idx = self.bin_of(value);
        let level = self.levels[idx];
        let tol = 1e-9 * level.abs().max(1.0);
        ((value - level).abs() <= tol).then_some(idx)
    }
}

/// TX and RX distortions; a missing element acts as the identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpairmentChain {
    pub pa: Option<PaParams>,
    pub adc: Option<AdcSpec>,
}

impl ImpairmentChain {
    pub fn ideal() -> Self {
        Self::default()
    }

    /// Writes `f_tx(s)` into `out`.
    pub fn tx_into(&self, s: &[Complex64], out: &mut [Complex64]) {
        match &self.pa {
            Some(p) => {
                for (o, x) in out.iter_mut().zip(s) {
                    *o = pa_distort(*x, p);
                }
            }
            None => out.copy_from_slice(s),
        }
    }

    /// Applies `f_rx` in place.
    pub fn rx_in_place(&self, r: &mut [Complex64]) {
        if let Some(adc) = &self.adc {
            for z in r.iter_mut() {
                *z = Complex64::new(adc.quantize(z.re), adc.quantize(z.im));
            }
        }
    }

    /// Noiseless pre-ADC means `H f_tx(s_k)` for every symbol vector,
    /// flattened `K x Nr`.
    pub fn distorted_means(&self, h: &ChannelMatrix, book: &SymbolBook) -> Vec<Complex64> {
        let nr = h.nr();
        let mut x = vec![Complex64::new(0.0, 0.0); book.nt()];
        let mut out = vec![Complex64::new(0.0, 0.0); book.len() * nr];
        for (k, chunk) in out.chunks_exact_mut(nr).enumerate() {
            self.tx_into(book.vector(k), &mut x);
            h.apply_into(&x, chunk);
        }
        out
    }
}

/// PA output for a single complex input.
pub fn pa_distort(x: Complex64, p: &PaParams) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(p.am_am(r), x.arg() + p.am_pm(r))
}

pub fn tx_distort(s: &ComplexVec, chain: &ImpairmentChain) -> ComplexVec {
    let mut out = vec![Complex64::new(0.0, 0.0); s.len()];
    chain.tx_into(s.as_slice(), &mut out);
    ComplexVec::from_raw(out)
}

pub fn adc_quantize(r: f64, adc: &AdcSpec) -> f64 {
    adc.quantize(r)
}

pub fn rx_distort(r: &ComplexVec, chain: &ImpairmentChain) -> ComplexVec {
    let mut out = r.as_slice().to_vec();
    chain.rx_in_place(&mut out);
    ComplexVec::from_raw(out)
}

/// Writes `f_rx(H f_tx(s) + w)` into `out`, `w ~ CN(0, sigma2 I)`.
pub fn synthesize_into<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    s: &[Complex64],
    sigma2: f64,
    chain: &ImpairmentChain,
    rng: &mut R,
    out: &mut [Complex64],
) {
    let mut x = vec![Complex64::new(0.0, 0.0); s.len()];
    chain.tx_into(s, &mut x);
    h.apply_into(&x, out);
    for z in out.iter_mut() {
        *z += sample_cn(rng, sigma2);
    }
    chain.rx_in_place(out);
}

/// One distorted received vector.
pub fn synthesize_received<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    s: &ComplexVec,
    sigma2: f64,
    chain: &ImpairmentChain,
    rng: &mut R,
) -> ComplexVec {
    let mut out = vec![Complex64::new(0.0, 0.0); h.nr()];
    synthesize_into(h, s.as_slice(), sigma2, chain, rng, &mut out);
    ComplexVec::from_raw(out)
}

/// `ln Q(x)` where `Q` is the standard normal upper tail.
pub fn ln_normal_sf(x: f64) -> f64 {
    if x == f64::INFINITY {
        f64::NEG_INFINITY
    } else if x == f64::NEG_INFINITY {
        0.0
    } else if x < 0.0 {
        (-0.5 * erfc(-x * FRAC_1_SQRT_2)).ln_1p()
    } else if x < 35.0 {
        (0.5 * erfc(x * FRAC_1_SQRT_2)).ln()
    } else {
        // asymptotic Mills-ratio expansion
        let x2 = x * x;
        let inv = 1.0 / x2;
        let series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
        -0.5 * x2 - x.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// `ln(Phi(b) - Phi(a))` for `a < b`, stable in both tails.
pub fn ln_normal_interval(a: f64, b: f64) -> f64 {
    if !(a < b) {
        return f64::NEG_INFINITY;
    }
    if a >= 0.0 {
        let la = ln_normal_sf(a);
        la + ln_one_minus_exp(ln_normal_sf(b) - la)
    } else if b <= 0.0 {
        let lb = ln_normal_sf(-b);
        lb + ln_one_minus_exp(ln_normal_sf(-a) - lb)
    } else {
        let tails = 0.5 * erfc(b * FRAC_1_SQRT_2) + 0.5 * erfc(-a * FRAC_1_SQRT_2);
        (-tails).ln_1p()
    }
}

/// True likelihood of a received vector for known channel and distortions.
///
/// With an ADC the observation is discrete and the likelihood is the
/// probability mass of the observed bins; without one it is the Gaussian
/// density `CN(y; H f_tx(s_k), sigma2 I)`.
#[derive(Debug, Clone)]
pub struct OracleModel {
    nr: usize,
    means: Vec<Complex64>,
    sigma2: f64,
    adc: Option<AdcSpec>,
}

impl OracleModel {
    pub fn new(h: &ChannelMatrix, book: &SymbolBook, sigma2: f64, chain: &ImpairmentChain) -> Self {
        assert!(sigma2 > 0.0, "noise variance must be positive");
        Self {
            nr: h.nr(),
            means: chain.distorted_means(h, book),
            sigma2,
            adc: chain.adc.clone(),
        }
    }

    /// Checked evaluation; fails when `y` is off the quantizer grid.
    pub fn try_log_likelihood(&self, y: &[Complex64], k: usize) -> Result<f64> {
        let mean = &self.means[k * self.nr..(k + 1) * self.nr];
        let Some(adc) = &self.adc else {
            let d: f64 = y.iter().zip(mean).map(|(a, b)| (a - b).norm_sqr()).sum();
            return Ok(-(self.nr as f64) * (PI * self.sigma2).ln() - d / self.sigma2);
        };
        let std = (0.5 * self.sigma2).sqrt();
        let mut total = 0.0;
        for (obs, m) in y.iter().zip(mean) {
            for (v, mu) in [(obs.re, m.re), (obs.im, m.im)] {
                let idx = adc
                    .level_index(v)
                    .ok_or_else(|| Error::Input(format!("{v} is not an ADC output level")))?;
                let (lo, hi) = adc.bin_edges(idx);
                total += ln_normal_interval((lo - mu) / std, (hi - mu) / std);
            }
        }
        Ok(total)
    }
}

impl LikelihoodModel for OracleModel {
    fn num_symbols(&self) -> usize {
        self.means.len() / self.nr
    }

    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64 {
        self.try_log_likelihood(y, k).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Single-hypothesis form of [`OracleModel`].
pub fn oracle_quantized_lf(
    y: &ComplexVec,
    h: &ChannelMatrix,
    book: &SymbolBook,
    k: usize,
    sigma2: f64,
    chain: &ImpairmentChain,
) -> Result<f64> {
    OracleModel::new(h, book, sigma2, chain).try_log_likelihood(y.as_slice(), k)
}
