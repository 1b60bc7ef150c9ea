//! Noise-injection data augmentation of base samples.
//!
//! Each base sample `y[n]` spawns `I_DA` copies `y[n] + n^(i)`; the copy for
//! base index `n` (0-based) and draw `i` (0-based) sits at position
//! `n * I_DA + i` of the dataset.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::numeric::{mix_seed, rng_for, sample_cn, ComplexVec};
use crate::{Error, Result};

/// Noise family used for augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseFamily {
    /// `CN(0, scale^2 I)`.
    Gaussian,
    /// Real and imaginary parts uniform on `[-scale/2, scale/2]`.
    Uniform,
    /// Real and imaginary parts Laplace with scale `scale`.
    Laplace,
}

impl NoiseFamily {
    fn tag(self) -> u64 {
        match self {
            NoiseFamily::Gaussian => 1,
            NoiseFamily::Uniform => 2,
            NoiseFamily::Laplace => 3,
        }
    }
}

impl std::str::FromStr for NoiseFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "uniform" => Ok(NoiseFamily::Uniform),
            "laplace" => Ok(NoiseFamily::Laplace),
            other => Err(Error::Config(format!("unknown noise family '{other}'"))),
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Uniform => "uniform",
            NoiseFamily::Laplace => "laplace",
        })
    }
}

/// A noise family together with its scale parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    family: NoiseFamily,
    scale: f64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("{family} noise scale must be positive, got {scale}")));
        }
        Ok(Self { family, scale })
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Seed tag that depends only on the spec itself.
    fn seed_tag(&self) -> u64 {
        mix_seed(self.family.tag(), self.scale.to_bits())
    }

    /// One noise component draw.
    #[inline]
    fn draw_component<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Gaussian => unreachable!("gaussian noise is drawn jointly"),
            NoiseFamily::Uniform => self.scale * (rng.gen::<f64>() - 0.5),
            NoiseFamily::Laplace => {
                // inverse CDF on u in (-1/2, 1/2)
                let u = rng.gen::<f64>() - 0.5;
                -self.scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
        }
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.family {
            NoiseFamily::Gaussian => sample_cn(rng, self.scale * self.scale),
            _ => {
                let re = self.draw_component(rng);
                let im = self.draw_component(rng);
                Complex64::new(re, im)
            }
        }
    }
}

/// The default grid of `J = 9` specs: Gaussian `{0.04, 0.08, 0.12}`,
/// uniform `{0.8, 1.0, 1.2}`, Laplace `{0.21, 0.24, 0.27}`.
pub fn default_specs() -> Vec<NoiseSpec> {
    specs_from_grids(&[0.04, 0.08, 0.12], &[0.8, 1.0, 1.2], &[0.21, 0.24, 0.27])
        .expect("default grids are valid")
}

/// Specs in the order Gaussian grid, uniform grid, Laplace grid.
pub fn specs_from_grids(gaussian: &[f64], uniform: &[f64], laplace: &[f64]) -> Result<Vec<NoiseSpec>> {
    let mut out = Vec::with_capacity(gaussian.len() + uniform.len() + laplace.len());
    for (family, grid) in [
        (NoiseFamily::Gaussian, gaussian),
        (NoiseFamily::Uniform, uniform),
        (NoiseFamily::Laplace, laplace),
    ] {
        for &s in grid {
            out.push(NoiseSpec::new(family, s)?);
        }
    }
    Ok(out)
}

/// One noise vector of length `nr`.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, nr: usize, rng: &mut R) -> ComplexVec {
    assert!(nr > 0, "noise vector must be nonempty");
    ComplexVec::from_raw((0..nr).map(|_| spec.draw(rng)).collect())
}

/// `I_DA * T_b` noise-injected copies of the base samples.
#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    nr: usize,
    base_len: usize,
    copies: usize,
    spec: Option<NoiseSpec>,
    samples: Vec<Complex64>,
}

impl AugmentedDataset {
    /// Uses the base samples themselves as the dataset (no augmentation).
    pub fn unaugmented(base: &[Complex64], nr: usize) -> Self {
        assert!(nr > 0 && base.len() % nr == 0 && !base.is_empty());
        Self {
            nr,
            base_len: base.len() / nr,
            copies: 1,
            spec: None,
            samples: base.to_vec(),
        }
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    /// Number of samples `D`.
    pub fn len(&self) -> usize {
        self.samples.len() / self.nr
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// `None` for an unaugmented dataset.
    pub fn spec(&self) -> Option<NoiseSpec> {
        self.spec
    }

    pub fn sample(&self, d: usize) -> &[Complex64] {
        &self.samples[d * self.nr..(d + 1) * self.nr]
    }

    /// Position of copy `i` of base sample `n` (both 0-based).
    pub fn index_of(&self, n: usize, i: usize) -> usize {
        n * self.copies + i
    }

    /// All samples flattened `D x Nr`.
    pub fn flat(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[Complex64]> {
        self.samples.chunks_exact(self.nr)
    }
}

/// Augments `base` (flattened `T_b x Nr`) with `i_da` draws per sample.
pub fn build_augmented_dataset<R: Rng + ?Sized>(
    base: &[Complex64],
    nr: usize,
    spec: &NoiseSpec,
    i_da: usize,
    rng: &mut R,
) -> Result<AugmentedDataset> {
    if base.is_empty() || nr == 0 || base.len() % nr != 0 {
        return Err(Error::Input("base samples must be a nonempty multiple of Nr".into()));
    }
    if i_da == 0 {
        return Err(Error::Config("augmentation needs at least one copy per sample".into()));
    }
    let base_len = base.len() / nr;
    let mut samples = Vec::with_capacity(base.len() * i_da);
    for y in base.chunks_exact(nr) {
        for _ in 0..i_da {
            samples.extend(y.iter().map(|z| z + spec.draw(rng)));
        }
    }
    Ok(AugmentedDataset {
        nr,
        base_len,
        copies: i_da,
        spec: Some(*spec),
        samples,
    })
}

/// One dataset per spec, each from its own substream of `seed`.
///
/// The substream is keyed on the spec (family and scale), so reordering,
/// adding or removing specs never changes the samples of the others.
pub fn build_all_datasets(
    base: &[Complex64],
    nr: usize,
    specs: &[NoiseSpec],
    i_da: usize,
    seed: u64,
) -> Result<Vec<AugmentedDataset>> {
    specs
        .iter()
        .map(|spec| {
            let mut rng = rng_for(seed, spec.seed_tag());
            build_augmented_dataset(base, nr, spec, i_da, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng_for;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    /// Standard error of the sample variance estimated from fourth moments.
    fn var_se(xs: &[f64], mean: f64, var: f64) -> f64 {
        let n = xs.len() as f64;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        ((m4 - var * var) / n).sqrt()
    }

    #[test]
    fn gaussian_complex_variance() {
        let spec = NoiseSpec::new(NoiseFamily::Gaussian, 0.08).unwrap();
        let mut rng = rng_for(1, 0);
        let power: Vec<f64> = (0..100_000)
            .map(|_| sample_noise(&spec, 1, &mut rng)[0].norm_sqr())
            .collect();
        let (mean, var) = moments(&power);
        let se = (var / power.len() as f64).sqrt();
        assert!((mean - 0.0064).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn uniform_support_and_variance() {
        let spec = NoiseSpec::new(NoiseFamily::Uniform, 1.0).unwrap();
        let mut rng = rng_for(2, 0);
        let re: Vec<f64> = (0..100_000).map(|_| sample_noise(&spec, 1, &mut rng)[0].re).collect();
        assert!(re.iter().all(|x| (-0.5..=0.5).contains(x)));
        let (mean, var) = moments(&re);
        assert!((var - 1.0 / 12.0).abs() < 3.0 * var_se(&re, mean, var), "var {var}");
    }

    #[test]
    fn laplace_variance() {
        let spec = NoiseSpec::new(NoiseFamily::Laplace, 0.24).unwrap();
        let mut rng = rng_for(3, 0);
        let re: Vec<f64> = (0..100_000).map(|_| sample_noise(&spec, 1, &mut rng)[0].re).collect();
        let (mean, var) = moments(&re);
        assert!((var - 0.1152).abs() < 3.0 * var_se(&re, mean, var), "var {var}");
    }

    #[test]
    fn injected_noise_zero_mean() {
        for spec in default_specs() {
            let mut rng = rng_for(4, spec.seed_tag());
            let draws: Vec<Complex64> = (0..50_000).map(|_| spec.draw(&mut rng)).collect();
            for part in [
                draws.iter().map(|z| z.re).collect::<Vec<_>>(),
                draws.iter().map(|z| z.im).collect::<Vec<_>>(),
            ] {
                let (mean, var) = moments(&part);
                assert!(mean.abs() < 3.0 * (var / part.len() as f64).sqrt(), "{spec:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(NoiseSpec::new(NoiseFamily::Gaussian, 0.0).is_err());
        assert!(NoiseSpec::new(NoiseFamily::Laplace, -1.0).is_err());
        assert!("cauchy".parse::<NoiseFamily>().is_err());
        assert_eq!("Laplace".parse::<NoiseFamily>().unwrap(), NoiseFamily::Laplace);
    }

    fn base(tb: usize, nr: usize) -> Vec<Complex64> {
        (0..tb * nr).map(|i| Complex64::new(i as f64, -(i as f64))).collect()
    }

    #[test]
    fn dataset_size_matches_defaults() {
        let b = base(250, 4);
        let sets = build_all_datasets(&b, 4, &default_specs(), 10, 9).unwrap();
        assert_eq!(sets.len(), 9);
        for s in &sets {
            assert_eq!(s.len(), 2500);
            assert_eq!(s.base_len(), 250);
            assert_eq!(s.copies(), 10);
        }
    }

    #[test]
    fn vanishing_noise_reproduces_base() {
        let b = base(20, 2);
        let spec = NoiseSpec::new(NoiseFamily::Gaussian, 1e-12).unwrap();
        let set = build_augmented_dataset(&b, 2, &spec, 1, &mut rng_for(5, 0)).unwrap();
        for (x, y) in set.flat().iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn index_arithmetic() {
        let b = base(7, 3);
        let spec = NoiseSpec::new(NoiseFamily::Uniform, 1e-9).unwrap();
        let set = build_augmented_dataset(&b, 3, &spec, 4, &mut rng_for(6, 0)).unwrap();
        for n in 0..7 {
            for i in 0..4 {
                let d = set.index_of(n, i);
                assert_eq!(d, n * 4 + i);
                let got = set.sample(d);
                for r in 0..3 {
                    assert!((got[r] - b[n * 3 + r]).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn injected_noise_is_ks_distributed() {
        // Kolmogorov-Smirnov on Re(sample - base) for a Laplace spec.
        let b = vec![Complex64::new(0.3, -0.2); 1000];
        let spec = NoiseSpec::new(NoiseFamily::Laplace, 0.21).unwrap();
        let set = build_augmented_dataset(&b, 1, &spec, 10, &mut rng_for(7, 0)).unwrap();
        let mut xs: Vec<f64> = set.flat().iter().map(|z| z.re - 0.3).collect();
        xs.sort_by(f64::total_cmp);
        let cdf = |x: f64| {
            if x < 0.0 {
                0.5 * (x / 0.21).exp()
            } else {
                1.0 - 0.5 * (-x / 0.21).exp()
            }
        };
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        // 5% critical value
        assert!(d < 1.358 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn datasets_are_deterministic_and_spec_keyed() {
        let b = base(30, 2);
        let specs = default_specs();
        let a = build_all_datasets(&b, 2, &specs, 3, 42).unwrap();
        let again = build_all_datasets(&b, 2, &specs, 3, 42).unwrap();
        for (x, y) in a.iter().zip(&again) {
            assert_eq!(x.flat(), y.flat());
        }
        let mut permuted = specs.clone();
        permuted.reverse();
        let p = build_all_datasets(&b, 2, &permuted, 3, 42).unwrap();
        for (x, y) in a.iter().zip(p.iter().rev()) {
            assert_eq!(x.flat(), y.flat());
        }
        let subset = build_all_datasets(&b, 2, &specs[3..6], 3, 42).unwrap();
        assert_eq!(subset.len(), 3);
        for (x, y) in a[3..6].iter().zip(&subset) {
            assert_eq!(x.flat(), y.flat());
        }
    }

    #[test]
    fn rejects_zero_copies_and_empty_base() {
        let spec = default_specs()[0];
        assert!(build_augmented_dataset(&[], 2, &spec, 1, &mut rng_for(0, 0)).is_err());
        assert!(build_augmented_dataset(&base(2, 2), 2, &spec, 0, &mut rng_for(0, 0)).is_err());
    }
}
