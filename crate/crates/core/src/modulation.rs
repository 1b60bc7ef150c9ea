//! Square QAM constellations and enumeration of transmit symbol vectors.

use num_complex::Complex64;

use crate::numeric::ComplexVec;
use crate::{Error, Result};

/// Upper bound on the number of enumerated symbol vectors.
pub const MAX_SYMBOL_VECTORS: usize = 4096;

/// Unit-average-power modulation alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    /// Gray-mapped square QAM of the given order (4, 16 or 64).
    pub fn qam(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::Config(format!(
                "unsupported modulation order {order} (expected 4, 16 or 64)"
            )));
        }
        let side = (order as f64).sqrt().round() as usize;
        let bits_per_axis = side.trailing_zeros();
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let gray_decode = |g: usize| {
            let mut b = g;
            let mut shift = g >> 1;
            while shift != 0 {
                b ^= shift;
                shift >>= 1;
            }
            b
        };
        let level = |idx: usize| (2 * idx) as f64 - (side as f64 - 1.0);
        let points = (0..order)
            .map(|sym| {
                let i_bits = sym >> bits_per_axis;
                let q_bits = sym & (side - 1);
                let re = level(gray_decode(i_bits));
                let im = level(gray_decode(q_bits));
                Complex64::new(re, im) / scale
            })
            .collect();
        Ok(Self { points })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }
}

/// Shorthand for [`Constellation::qam`].
pub fn build_constellation(order: usize) -> Result<Constellation> {
    Constellation::qam(order)
}

/// All `|X|^Nt` transmit vectors in lexicographic order of the per-antenna
/// point indices (antenna 0 is the most significant digit).
#[derive(Debug, Clone)]
pub struct SymbolBook {
    constellation: Constellation,
    nt: usize,
    vectors: Vec<Complex64>,
}

impl SymbolBook {
    pub fn new(constellation: Constellation, nt: usize) -> Result<Self> {
        if nt == 0 {
            return Err(Error::Config("need at least one transmit antenna".into()));
        }
        let order = constellation.order();
        let count = (0..nt).try_fold(1usize, |acc, _| acc.checked_mul(order));
        let count = match count {
            Some(c) if c <= MAX_SYMBOL_VECTORS => c,
            _ => {
                return Err(Error::Config(format!(
                    "{order}^{nt} symbol vectors exceeds the limit of {MAX_SYMBOL_VECTORS}"
                )))
            }
        };
        let mut vectors = Vec::with_capacity(count * nt);
        let mut digits = vec![0usize; nt];
        for k in 0..count {
            decode_index(k, order, &mut digits);
            vectors.extend(digits.iter().map(|&d| constellation.points[d]));
        }
        Ok(Self {
            constellation,
            nt,
            vectors,
        })
    }

    /// Number of symbol vectors `K`.
    pub fn len(&self) -> usize {
        self.vectors.len() / self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Symbol vector `k` (0-based).
    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k * self.nt..(k + 1) * self.nt]
    }

    pub fn to_complex_vec(&self, k: usize) -> ComplexVec {
        ComplexVec::from_raw(self.vector(k).to_vec())
    }

    /// Per-antenna constellation indices of vector `k`.
    pub fn digits(&self, k: usize) -> Vec<usize> {
        let mut d = vec![0; self.nt];
        decode_index(k, self.constellation.order(), &mut d);
        d
    }

    /// Inverse of [`SymbolBook::digits`].
    pub fn index_of(&self, digits: &[usize]) -> usize {
        let order = self.constellation.order();
        digits.iter().fold(0, |acc, &d| acc * order + d)
    }
}

/// Shorthand for [`SymbolBook::new`].
pub fn enumerate_symbol_vectors(c: Constellation, nt: usize) -> Result<SymbolBook> {
    SymbolBook::new(c, nt)
}

fn decode_index(mut k: usize, order: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = k % order;
        k /= order;
    }
}
