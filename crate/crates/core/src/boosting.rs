//! Weighting of the `J` likelihood estimates and ML detection with the
//! combined estimate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::likelihood::LikelihoodModel;
use crate::numeric::{argmax, log_sum_exp};
use crate::{Error, Result};

/// Weight determination rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aggregation {
    Uniform,
    Probabilistic,
    Max,
}

impl Aggregation {
    pub const ALL: [Aggregation; 3] = [Aggregation::Uniform, Aggregation::Probabilistic, Aggregation::Max];

    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Uniform => "uniform",
            Aggregation::Probabilistic => "probabilistic",
            Aggregation::Max => "max",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Aggregation::Uniform),
            "probabilistic" | "dirichlet" => Ok(Aggregation::Probabilistic),
            "max" => Ok(Aggregation::Max),
            other => Err(Error::Config(format!("unknown aggregation '{other}'"))),
        }
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|x| !(*x >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Input("weights must lie on the probability simplex".into()));
        }
        Ok(Self(w))
    }

    pub fn one_hot(len: usize, at: usize) -> Self {
        assert!(at < len);
        let mut w = vec![0.0; len];
        w[at] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Detection counts `c_{k,j}` of every estimator on the base samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRatios {
    k: usize,
    counts: Vec<usize>,
}

impl DetectionRatios {
    /// `counts[j]` holds the `K` detection counts of estimator `j`.
    pub fn from_counts(counts: Vec<Vec<usize>>) -> Result<Self> {
        let k = counts.first().map_or(0, |c| c.len());
        if k == 0 || counts.iter().any(|c| c.len() != k || c.iter().sum::<usize>() == 0) {
            return Err(Error::Input("every estimator needs K counts with a positive total".into()));
        }
        Ok(Self {
            k,
            counts: counts.into_iter().flatten().collect(),
        })
    }

    pub fn num_estimators(&self) -> usize {
        self.counts.len() / self.k
    }

    pub fn num_symbols(&self) -> usize {
        self.k
    }

    pub fn counts(&self, j: usize) -> &[usize] {
        &self.counts[j * self.k..(j + 1) * self.k]
    }

    /// `r_{k,j} = c_{k,j} / sum_l c_{l,j}`.
    pub fn ratios(&self, j: usize) -> Vec<f64> {
        let c = self.counts(j);
        let total = c.iter().sum::<usize>() as f64;
        c.iter().map(|&x| x as f64 / total).collect()
    }
}

/// Detection counts of one estimator over the base samples.
pub fn per_estimator_detect<M: LikelihoodModel + ?Sized>(base: &[Complex64], nr: usize, lf: &M) -> Vec<usize> {
    let mut counts = vec![0; lf.num_symbols()];
    for y in base.chunks_exact(nr) {
        counts[lf.most_likely(y)] += 1;
    }
    counts
}

pub fn weights_uniform(j: usize) -> WeightVector {
    assert!(j >= 1, "need at least one estimator");
    WeightVector(vec![1.0 / j as f64; j])
}

fn check_alpha(alpha: &[f64], k: usize) -> Result<()> {
    if alpha.len() != k || alpha.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config(format!("concentration vector needs {k} positive entries")));
    }
    Ok(())
}

/// `ln Dir(r_j; alpha)` for every estimator `j`.
pub fn dirichlet_log_scores(ratios: &DetectionRatios, alpha: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha, ratios.num_symbols())?;
    let ln_b = alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(alpha.iter().sum());
    Ok((0..ratios.num_estimators())
        .map(|j| {
            let r = ratios.ratios(j);
            -ln_b
                + r.iter()
                    .zip(alpha)
                    .map(|(&rk, &a)| if a == 1.0 { 0.0 } else { (a - 1.0) * rk.ln() })
                    .sum::<f64>()
        })
        .collect())
}

/// Weights produced by one rule, with the index used for transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightOutcome {
    pub weights: WeightVector,
    /// Estimator with the largest Dirichlet score, ties toward the lowest.
    pub j_star: usize,
    /// Every Dirichlet score vanished and uniform weights were used.
    pub fell_back: bool,
}

/// `w_j` proportional to the Dirichlet density of estimator `j`'s ratios.
pub fn weights_probabilistic(ratios: &DetectionRatios, alpha: &[f64]) -> Result<WeightOutcome> {
    let scores = dirichlet_log_scores(ratios, alpha)?;
    let j = scores.len();
    let j_star = argmax(&scores);
    let infinite: Vec<usize> = (0..j).filter(|&i| scores[i] == f64::INFINITY).collect();
    if !infinite.is_empty() {
        // concentrations below one with an unobserved symbol
        let mut w = vec![0.0; j];
        for &i in &infinite {
            w[i] = 1.0 / infinite.len() as f64;
        }
        return Ok(WeightOutcome {
            weights: WeightVector(w),
            j_star,
            fell_back: false,
        });
    }
    let norm = log_sum_exp(&scores);
    if norm == f64::NEG_INFINITY {
        return Ok(WeightOutcome {
            weights: weights_uniform(j),
            j_star,
            fell_back: true,
        });
    }
    let mut w: Vec<f64> = scores.iter().map(|s| (s - norm).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(WeightOutcome {
        weights: WeightVector(w),
        j_star,
        fell_back: false,
    })
}

/// One-hot weight on the estimator with the largest Dirichlet score.
pub fn weights_max(ratios: &DetectionRatios, alpha: &[f64]) -> Result<WeightOutcome> {
    let scores = dirichlet_log_scores(ratios, alpha)?;
    let j_star = argmax(&scores);
    Ok(WeightOutcome {
        weights: WeightVector::one_hot(scores.len(), j_star),
        j_star,
        fell_back: false,
    })
}

pub fn determine_weights(rule: Aggregation, ratios: &DetectionRatios, alpha: &[f64]) -> Result<WeightOutcome> {
    match rule {
        Aggregation::Uniform => {
            let j_star = argmax(&dirichlet_log_scores(ratios, alpha)?);
            Ok(WeightOutcome {
                weights: weights_uniform(ratios.num_estimators()),
                j_star,
                fell_back: false,
            })
        }
        Aggregation::Probabilistic => weights_probabilistic(ratios, alpha),
        Aggregation::Max => weights_max(ratios, alpha),
    }
}

/// Weighted mixture `sum_j w_j p_{k,j}` of several estimators.
#[derive(Debug, Clone)]
pub struct RefinedLf<'a, M> {
    terms: Vec<(f64, &'a M)>,
    k: usize,
}

impl<'a, M: LikelihoodModel> RefinedLf<'a, M> {
    pub fn new(weights: &WeightVector, estimators: &'a [M]) -> Result<Self> {
        if weights.len() != estimators.len() {
            return Err(Error::Input(format!(
                "{} weights for {} estimators",
                weights.len(),
                estimators.len()
            )));
        }
        let k = estimators[0].num_symbols();
        if estimators.iter().any(|e| e.num_symbols() != k) {
            return Err(Error::Input("estimators disagree on K".into()));
        }
        let terms = weights
            .as_slice()
            .iter()
            .zip(estimators)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, e)| (w.ln(), e))
            .collect();
        Ok(Self { terms, k })
    }
}

impl<M: LikelihoodModel> LikelihoodModel for RefinedLf<'_, M> {
    fn num_symbols(&self) -> usize {
        self.k
    }

    fn log_likelihood(&self, y: &[Complex64], k: usize) -> f64 {
        if let [(lw, e)] = self.terms.as_slice() {
            return lw + e.log_likelihood(y, k);
        }
        let v: Vec<f64> = self.terms.iter().map(|(lw, e)| lw + e.log_likelihood(y, k)).collect();
        log_sum_exp(&v)
    }

    fn first_guess(&self, y: &[Complex64]) -> usize {
        self.terms.first().map_or(0, |(_, e)| e.first_guess(y))
    }

    fn log_likelihood_above(&self, y: &[Complex64], k: usize, floor: f64) -> f64 {
        if let [(lw, e)] = self.terms.as_slice() {
            return lw + e.log_likelihood_above(y, k, floor - lw);
        }
        // every component below floor keeps the mixture below floor
        let raw: Vec<f64> = self.terms.iter().map(|(_, e)| e.log_likelihood_above(y, k, floor)).collect();
        let mut v: Vec<f64> = self.terms.iter().zip(&raw).map(|((lw, _), r)| lw + r).collect();
        let bound = log_sum_exp(&v);
        if bound < floor {
            return bound;
        }
        for (((lw, e), x), r) in self.terms.iter().zip(v.iter_mut()).zip(&raw) {
            if *r < floor {
                *x = lw + e.log_likelihood(y, k);
            }
        }
        log_sum_exp(&v)
    }

    fn log_likelihoods(&self, y: &[Complex64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.k];
        let mut acc: Vec<Vec<f64>> = vec![Vec::with_capacity(self.terms.len()); self.k];
        for (lw, e) in &self.terms {
            e.log_likelihoods(y, &mut tmp);
            for (a, t) in acc.iter_mut().zip(&tmp) {
                a.push(lw + t);
            }
        }
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = log_sum_exp(a);
        }
    }
}

/// `ln sum_j w_j exp(lf_j(y, k))`.
pub fn refined_lf_eval<M: LikelihoodModel>(y: &[Complex64], weights: &WeightVector, lfs: &[M], k: usize) -> f64 {
    RefinedLf::new(weights, lfs)
        .expect("weights match estimators")
        .log_likelihood(y, k)
}

/// Most likely symbol index, ties toward the lowest.
pub fn ml_detect<M: LikelihoodModel + ?Sized>(y: &[Complex64], lf: &M) -> usize {
    lf.most_likely(y)
}

/// [`ml_detect`] over flattened samples.
pub fn detect_all<M: LikelihoodModel + ?Sized>(samples: &[Complex64], nr: usize, lf: &M) -> Vec<usize> {
    samples.chunks_exact(nr).map(|y| lf.most_likely(y)).collect()
}
