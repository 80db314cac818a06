//! Histogram estimators for entropy and mutual information, in bits.

use alloc::vec;
use alloc::vec::Vec;

use super::PhyError;

pub const DEFAULT_BINS: usize = 64;

/// Probability mass over contiguous bins.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    bin_edges: Vec<f64>,
    probabilities: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(bin_edges: Vec<f64>, probabilities: Vec<f64>) -> Result<Self, PhyError> {
        if bin_edges.len() != probabilities.len() + 1 || probabilities.is_empty() {
            return Err(PhyError::BadParameter("bin_edges"));
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PhyError::BadParameter("bin_edges"));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(PhyError::BadParameter("probabilities"));
        }
        let total: f64 = probabilities.iter().sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(PhyError::BadParameter("probabilities"));
        }
        Ok(EmpiricalDistribution {
            bin_edges,
            probabilities,
        })
    }

    /// Equal-width histogram over `[min, max]` of the samples.
    pub fn from_samples(samples: &[f64], bins: usize) -> Result<Self, PhyError> {
        if bins == 0 {
            return Err(PhyError::BadParameter("bins"));
        }
        if samples.is_empty() {
            return Err(PhyError::TooFewSamples { needed: 1, got: 0 });
        }
        let binning = Binning::spanning(samples.iter().copied(), bins);
        let mut counts = vec![0u64; bins];
        for &v in samples {
            counts[binning.index(v)] += 1;
        }
        let n = samples.len() as f64;
        Ok(EmpiricalDistribution {
            bin_edges: binning.edges(),
            probabilities: counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    /// `-sum p log2 p` over occupied bins.
    pub discrete: f64,
    /// Discrete term corrected by the bin widths, estimating the
    /// differential entropy of the underlying density.
    pub differential: f64,
}

pub fn estimate_entropy(d: &EmpiricalDistribution) -> Entropy {
    let mut discrete = 0.0;
    let mut width_term = 0.0;
    for (i, &p) in d.probabilities.iter().enumerate() {
        if p > 0.0 {
            discrete -= p * libm::log2(p);
            width_term += p * libm::log2(d.bin_edges[i + 1] - d.bin_edges[i]);
        }
    }
    Entropy {
        discrete,
        differential: discrete + width_term,
    }
}

#[derive(Debug, Clone, Copy)]
struct Binning {
    lo: f64,
    width: f64,
    bins: usize,
}

impl Binning {
    fn spanning(values: impl Iterator<Item = f64>, bins: usize) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            lo -= 0.5;
            hi = lo + 1.0;
        }
        Binning {
            lo,
            width: (hi - lo) / bins as f64,
            bins,
        }
    }

    fn index(&self, v: f64) -> usize {
        let i = libm::floor((v - self.lo) / self.width);
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.bins - 1)
        }
    }

    fn edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|i| self.lo + self.width * i as f64)
            .collect()
    }
}

/// Joint histogram of paired samples; both axes share equal-width bins
/// spanning the pooled range of `x` and `y`.
#[derive(Debug, Clone)]
pub struct JointHistogram {
    bins: usize,
    counts: Vec<u64>,
    total: u64,
}

impl JointHistogram {
    pub fn from_samples(x: &[f64], y: &[f64], bins: usize) -> Result<Self, PhyError> {
        if bins == 0 {
            return Err(PhyError::BadParameter("bins"));
        }
        if x.len() != y.len() {
            return Err(PhyError::LengthMismatch(x.len(), y.len()));
        }
        let needed = 10 * bins * bins;
        if x.len() < needed {
            return Err(PhyError::TooFewSamples {
                needed,
                got: x.len(),
            });
        }
        let binning = Binning::spanning(x.iter().chain(y).copied(), bins);
        let mut counts = vec![0u64; bins * bins];
        for (&a, &b) in x.iter().zip(y) {
            counts[binning.index(a) * bins + binning.index(b)] += 1;
        }
        Ok(JointHistogram {
            bins,
            counts,
            total: x.len() as u64,
        })
    }

    fn marginal_x(&self) -> Vec<u64> {
        self.counts
            .chunks(self.bins)
            .map(|row| row.iter().sum())
            .collect()
    }

    fn marginal_y(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.bins];
        for row in self.counts.chunks(self.bins) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Plug-in mutual information in bits, clamped at zero.
    pub fn mutual_information(&self) -> f64 {
        let n = self.total as f64;
        let px = self.marginal_x();
        let py = self.marginal_y();
        let mut mi = 0.0;
        for (i, row) in self.counts.chunks(self.bins).enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                // p(x,y) / (p(x) p(y)) = c n / (cx cy)
                let ratio = (c as f64 * n) / (px[i] as f64 * py[j] as f64);
                mi += (c as f64 / n) * libm::log2(ratio);
            }
        }
        mi.max(0.0)
    }

    /// Discrete entropy of the binned `x` marginal, in bits.
    pub fn x_entropy(&self) -> f64 {
        let n = self.total as f64;
        self.marginal_x()
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * libm::log2(p)
            })
            .sum()
    }
}

/// Requires `x.len() == y.len() >= 10 * bins^2`.
pub fn estimate_mutual_information(x: &[f64], y: &[f64], bins: usize) -> Result<f64, PhyError> {
    Ok(JointHistogram::from_samples(x, y, bins)?.mutual_information())
}

/// `I(X;Y) - H(X)`, both terms taken from the same binning.
pub fn scanned_information(x: &[f64], y: &[f64], bins: usize) -> Result<f64, PhyError> {
    let h = JointHistogram::from_samples(x, y, bins)?;
    Ok(h.mutual_information() - h.x_entropy())
}
