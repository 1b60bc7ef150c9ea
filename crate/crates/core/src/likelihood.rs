//! Common interface for per-symbol likelihood evaluators.

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::modulation::SymbolBook;
use crate::numeric::dist_sq;

/// Log-domain likelihood `ln p(y | s_k)` for every symbol vector `k`.
pub trait LikelihoodModel: Sync {
    /// Number of hypotheses `K`.
    fn num_symbols(&self) -> usize;

    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64;

    /// Exact `ln p(y | s_k)` whenever that is at least `floor`, otherwise
    /// any value below `floor`. Lets detection skip hopeless hypotheses.
    fn log_likelihood_above(&self, y: &[Complex64], k: usize, floor: f64) -> f64 {
        let _ = floor;
        self.log_likelihood(y, k)
    }

    /// A hypothesis likely to win at `y`, visited first by [`most_likely`].
    ///
    /// [`most_likely`]: LikelihoodModel::most_likely
    fn first_guess(&self, y: &[Complex64]) -> usize {
        let _ = y;
        0
    }

    /// Most likely hypothesis, ties toward the lowest index.
    fn most_likely(&self, y: &[Complex64]) -> usize {
        let start = self.first_guess(y);
        let mut best = start;
        let mut best_val = self.log_likelihood(y, start);
        for k in 0..self.num_symbols() {
            if k == start {
                continue;
            }
            let v = self.log_likelihood_above(y, k, best_val);
            if v > best_val || (v == best_val && k < best) {
                best = k;
                best_val = v;
            }
        }
        best
    }

    /// Fills `out[k] = ln p(y | s_k)` for all `k`.
    fn log_likelihoods(&self, y: &[Complex64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.log_likelihood(y, k);
        }
    }
}

impl<M: LikelihoodModel + ?Sized> LikelihoodModel for &M {
    fn num_symbols(&self) -> usize {
        (**self).num_symbols()
    }
    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64 {
        (**self).log_likelihood(y, k)
    }
    fn log_likelihoods(&self, y: &[Complex64], out: &mut [f64]) {
        (**self).log_likelihoods(y, out)
    }
    fn log_likelihood_above(&self, y: &[Complex64], k: usize, floor: f64) -> f64 {
        (**self).log_likelihood_above(y, k, floor)
    }
    fn first_guess(&self, y: &[Complex64]) -> usize {
        (**self).first_guess(y)
    }
    fn most_likely(&self, y: &[Complex64]) -> usize {
        (**self).most_likely(y)
    }
}

/// Unimpaired Gaussian model `CN(y; H s_k, sigma^2 I)`.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    nr: usize,
    means: Vec<Complex64>,
    sigma2: f64,
    log_norm: f64,
}

impl GaussianModel {
    pub fn new(h: &ChannelMatrix, book: &SymbolBook, sigma2: f64) -> Self {
        Self::from_means(h.nr(), h.noiseless_means(book), sigma2)
    }

    /// `means` is flattened `K x Nr`.
    pub fn from_means(nr: usize, means: Vec<Complex64>, sigma2: f64) -> Self {
        assert!(sigma2 > 0.0, "noise variance must be positive");
        let log_norm = -(nr as f64) * (std::f64::consts::PI * sigma2).ln();
        Self {
            nr,
            means,
            sigma2,
            log_norm,
        }
    }

    pub fn mean(&self, k: usize) -> &[Complex64] {
        &self.means[k * self.nr..(k + 1) * self.nr]
    }

    /// Nearest mean in Euclidean distance, ties toward the lowest index.
    pub fn nearest(&self, y: &[Complex64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, m) in self.means.chunks_exact(self.nr).enumerate() {
            let d = dist_sq(y, m);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }
}

impl LikelihoodModel for GaussianModel {
    fn num_symbols(&self) -> usize {
        self.means.len() / self.nr
    }

    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64 {
        self.log_norm - dist_sq(y, self.mean(k)) / self.sigma2
    }
}
