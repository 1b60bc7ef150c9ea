//! Rayleigh channels, Gauss-Markov evolution and least-squares estimation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::modulation::SymbolBook;
use crate::numeric::sample_cn;
use crate::{Error, Result};

/// Relative eigenvalue threshold below which a Gram matrix counts as singular.
const RANK_TOL: f64 = 1e-10;

/// `Nr x Nt` complex channel gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    m: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Input("channel matrix must have positive dimensions".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("channel matrix entries must be finite".into()));
        }
        Ok(Self { m })
    }

    /// Row-major construction.
    pub fn from_rows(nr: usize, nt: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != nr * nt {
            return Err(Error::Input(format!(
                "expected {} channel entries, got {}",
                nr * nt,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(nr, nt, entries))
    }

    pub fn nr(&self) -> usize {
        self.m.nrows()
    }

    pub fn nt(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn get(&self, r: usize, t: usize) -> Complex64 {
        self.m[(r, t)]
    }

    /// Writes `H x` into `out`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.nt());
        debug_assert_eq!(out.len(), self.nr());
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, xt) in x.iter().enumerate() {
                acc += self.m[(r, t)] * xt;
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.nr()];
        self.apply_into(x, &mut out);
        out
    }

    /// `H s_k` for every symbol vector of the book, flattened `K x Nr`.
    pub fn noiseless_means(&self, book: &SymbolBook) -> Vec<Complex64> {
        let nr = self.nr();
        let mut out = vec![Complex64::new(0.0, 0.0); book.len() * nr];
        for (k, chunk) in out.chunks_exact_mut(nr).enumerate() {
            self.apply_into(book.vector(k), chunk);
        }
        out
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &ChannelMatrix) -> f64 {
        (&self.m - &other.m).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Channel with i.i.d. `CN(0, 1)` entries.
pub fn draw_initial_channel<R: Rng + ?Sized>(nr: usize, nt: usize, rng: &mut R) -> ChannelMatrix {
    assert!(nr > 0 && nt > 0, "channel dimensions must be positive");
    let m = DMatrix::from_fn(nr, nt, |_, _| sample_cn(rng, 1.0));
    ChannelMatrix { m }
}

/// First-order Gauss-Markov channel `H[n] = z H[n-1] + sqrt(1 - z^2) V[n]`.
#[derive(Debug, Clone)]
pub struct ChannelProcess {
    current: ChannelMatrix,
    zeta: f64,
}

impl ChannelProcess {
    pub fn new(initial: ChannelMatrix, zeta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::Config(format!("zeta must lie in [0, 1], got {zeta}")));
        }
        Ok(Self {
            current: initial,
            zeta,
        })
    }

    pub fn current(&self) -> &ChannelMatrix {
        &self.current
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Advances one slot and returns the new channel.
    pub fn evolve<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &ChannelMatrix {
        let innovation = (1.0 - self.zeta * self.zeta).sqrt();
        let zeta = self.zeta;
        for z in self.current.m.iter_mut() {
            let v = sample_cn(rng, 1.0);
            *z = *z * zeta + v * innovation;
        }
        &self.current
    }
}

/// Free-function form of [`ChannelProcess::evolve`].
pub fn evolve_channel<R: Rng + ?Sized>(p: &mut ChannelProcess, rng: &mut R) -> ChannelMatrix {
    p.evolve(rng).clone()
}

/// `Nt x Tp` pilot matrix made of the first `Nt` rows of a `Tp`-point DFT.
///
/// Rows are mutually orthogonal and every entry has unit modulus.
pub fn build_pilots(nt: usize, tp: usize) -> Result<DMatrix<Complex64>> {
    if nt == 0 {
        return Err(Error::Config("need at least one transmit antenna".into()));
    }
    if tp < nt {
        return Err(Error::Config(format!(
            "pilot length {tp} is shorter than the number of transmit antennas {nt}"
        )));
    }
    Ok(DMatrix::from_fn(nt, tp, |i, t| {
        Complex64::from_polar(1.0, -2.0 * PI * (i * t) as f64 / tp as f64)
    }))
}

/// Transmitted pilots with the observations they produced.
#[derive(Debug, Clone)]
pub struct PilotBlock {
    /// `Nt x Tp` known pilot symbols.
    pub pilots: DMatrix<Complex64>,
    /// `Nr x Tp` received pilot observations.
    pub received: DMatrix<Complex64>,
}

/// Least-squares fit `Y S^H (S S^H)^-1`, failing when `S S^H` is singular.
fn least_squares(
    symbols: &DMatrix<Complex64>,
    received: &DMatrix<Complex64>,
) -> Result<ChannelMatrix> {
    if symbols.ncols() != received.ncols() {
        return Err(Error::Estimation(format!(
            "{} symbol columns but {} observations",
            symbols.ncols(),
            received.ncols()
        )));
    }
    let s_h = symbols.adjoint();
    let gram = symbols * &s_h;
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= RANK_TOL * max {
        return Err(Error::Estimation("symbol Gram matrix is rank deficient".into()));
    }
    let inv = gram
        .cholesky()
        .ok_or_else(|| Error::Estimation("symbol Gram matrix is not positive definite".into()))?
        .inverse();
    ChannelMatrix::from_matrix(received * s_h * inv)
}

/// Pilot-based least-squares channel estimate; blind to any impairment.
pub fn ls_estimate(block: &PilotBlock) -> Result<ChannelMatrix> {
    least_squares(&block.pilots, &block.received)
}

/// Result of a data-aided channel estimate.
#[derive(Debug, Clone)]
pub struct DataAidedEstimate {
    pub channel: ChannelMatrix,
    /// True when the labeled symbols were rank deficient and the fallback
    /// estimate was returned instead.
    pub fell_back: bool,
}

/// Least-squares estimate treating labeled received samples as pilots.
///
/// `samples` holds `labels.len()` received vectors of length `Nr`, flattened.
pub fn data_aided_estimate(
    samples: &[Complex64],
    labels: &[usize],
    book: &SymbolBook,
    fallback: &ChannelMatrix,
) -> DataAidedEstimate {
    let nr = fallback.nr();
    let nt = book.nt();
    let n = labels.len();
    debug_assert_eq!(samples.len(), n * nr);
    let fell_back = |channel: &ChannelMatrix| DataAidedEstimate {
        channel: channel.clone(),
        fell_back: true,
    };
    if n < nt {
        return fell_back(fallback);
    }
    let symbols = DMatrix::from_fn(nt, n, |t, c| book.vector(labels[c])[t]);
    let received = DMatrix::from_fn(nr, n, |r, c| samples[c * nr + r]);
    match least_squares(&symbols, &received) {
        Ok(channel) => DataAidedEstimate {
            channel,
            fell_back: false,
        },
        Err(_) => fell_back(fallback),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::Constellation;
    use crate::numeric::rng_for;

    fn qpsk_book(nt: usize) -> SymbolBook {
        SymbolBook::new(Constellation::qam(4).unwrap(), nt).unwrap()
    }

    #[test]
    fn initial_channel_moments() {
        let mut rng = rng_for(11, 0);
        let n = 100_000;
        let (mut sum, mut power) = (Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let h = draw_initial_channel(1, 1, &mut rng);
            sum += h.get(0, 0);
            power += h.get(0, 0).norm_sqr();
        }
        assert!((power / n as f64 - 1.0).abs() < 0.02);
        assert!((sum / n as f64).norm() < 0.02);
    }

    #[test]
    fn initial_channel_deterministic() {
        let a = draw_initial_channel(4, 2, &mut rng_for(5, 1));
        let b = draw_initial_channel(4, 2, &mut rng_for(5, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn zeta_one_freezes_channel() {
        let h = draw_initial_channel(3, 2, &mut rng_for(1, 2));
        let mut p = ChannelProcess::new(h.clone(), 1.0).unwrap();
        let mut rng = rng_for(1, 3);
        for _ in 0..10 {
            assert_eq!(p.evolve(&mut rng), &h);
        }
    }

    #[test]
    fn zeta_zero_is_fresh_draw() {
        let h = draw_initial_channel(2, 2, &mut rng_for(1, 2));
        let mut p = ChannelProcess::new(h.clone(), 0.0).unwrap();
        let next = evolve_channel(&mut p, &mut rng_for(9, 9));
        let fresh = draw_initial_channel(2, 2, &mut rng_for(9, 9));
        assert!(next.distance(&fresh) < 1e-15);
    }

    fn ensemble_power(zeta: f64, steps: usize, seed: u64) -> (f64, f64) {
        // 200 x 100 independent entries evolved together
        let h = draw_initial_channel(200, 100, &mut rng_for(seed, 0));
        let mut p = ChannelProcess::new(h, zeta).unwrap();
        let mut rng = rng_for(seed, 1);
        for _ in 0..steps {
            p.evolve(&mut rng);
        }
        let powers: Vec<f64> = p.current().matrix().iter().map(|z| z.norm_sqr()).collect();
        let n = powers.len() as f64;
        let mean = powers.iter().sum::<f64>() / n;
        let var = powers.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn gauss_markov_is_stationary() {
        for (i, zeta) in [0.0, 0.3, 0.9, 0.9999, 1.0].into_iter().enumerate() {
            let (mean, se) = ensemble_power(zeta, 5, 30 + i as u64);
            assert!((mean - 1.0).abs() < 3.0 * se, "zeta={zeta} mean={mean} se={se}");
        }
    }

    #[test]
    fn slow_fading_keeps_unit_variance() {
        // 2 * 10^4 entries x 5 steps = 10^5 evolution draws
        let (mean, _) = ensemble_power(0.9999, 5, 77);
        assert!((mean - 1.0).abs() < 0.02, "mean power {mean}");
    }

    #[test]
    fn rejects_bad_zeta() {
        let h = draw_initial_channel(1, 1, &mut rng_for(0, 0));
        assert!(ChannelProcess::new(h.clone(), -0.1).is_err());
        assert!(ChannelProcess::new(h, 1.1).is_err());
    }

    #[test]
    fn pilots_orthogonal_unit_modulus() {
        let s = build_pilots(2, 8).unwrap();
        assert_eq!(s.shape(), (2, 8));
        let cross: Complex64 = (0..8).map(|t| s[(0, t)] * s[(1, t)].conj()).sum();
        assert!(cross.norm() < 1e-12);
        assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!(build_pilots(2, 1).is_err());
        assert!(build_pilots(4, 4).is_ok());
    }

    #[test]
    fn ls_exact_without_noise() {
        let h = draw_initial_channel(4, 2, &mut rng_for(8, 0));
        let pilots = build_pilots(2, 8).unwrap();
        let received = h.matrix() * &pilots;
        let est = ls_estimate(&PilotBlock { pilots, received }).unwrap();
        assert!(est.distance(&h) < 1e-10);
    }

    #[test]
    fn ls_rejects_rank_deficient_pilots() {
        let pilots = DMatrix::from_element(2, 8, Complex64::new(1.0, 0.0));
        let received = DMatrix::from_element(3, 8, Complex64::new(1.0, 0.0));
        assert!(matches!(
            ls_estimate(&PilotBlock { pilots, received }),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn data_aided_exact_with_true_labels() {
        let book = qpsk_book(2);
        let h = draw_initial_channel(4, 2, &mut rng_for(2, 0));
        let labels: Vec<usize> = (0..40).map(|i| (i * 7) % book.len()).collect();
        let samples: Vec<Complex64> = labels.iter().flat_map(|&k| h.apply(book.vector(k))).collect();
        let fallback = draw_initial_channel(4, 2, &mut rng_for(2, 1));
        let est = data_aided_estimate(&samples, &labels, &book, &fallback);
        assert!(!est.fell_back);
        assert!(est.channel.distance(&h) < 1e-10);
    }

    #[test]
    fn data_aided_improves_with_more_samples() {
        let book = qpsk_book(2);
        let h = draw_initial_channel(4, 2, &mut rng_for(21, 0));
        let mut rng = rng_for(21, 1);
        let mut err = |n: usize| {
            let trials = 200;
            let mut total = 0.0;
            for _ in 0..trials {
                let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..book.len())).collect();
                let samples: Vec<Complex64> = labels
                    .iter()
                    .flat_map(|&k| {
                        h.apply(book.vector(k))
                            .into_iter()
                            .map(|z| z + sample_cn(&mut rng, 0.1))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                total += data_aided_estimate(&samples, &labels, &book, &h).channel.distance(&h);
            }
            total / trials as f64
        };
        let small = err(25);
        let large = err(250);
        assert!(large < small, "250 samples: {large}, 25 samples: {small}");
    }

    #[test]
    fn data_aided_falls_back_on_identical_labels() {
        let book = qpsk_book(2);
        let h = draw_initial_channel(4, 2, &mut rng_for(2, 0));
        let labels = vec![3usize; 30];
        let samples: Vec<Complex64> = labels.iter().flat_map(|&k| h.apply(book.vector(k))).collect();
        let fallback = draw_initial_channel(4, 2, &mut rng_for(2, 5));
        let est = data_aided_estimate(&samples, &labels, &book, &fallback);
        assert!(est.fell_back);
        assert_eq!(est.channel, fallback);
    }
}
