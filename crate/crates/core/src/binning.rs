//! Quantile binning of the continuous inputs and the 2×B×B joint array.
//!
//! Boundaries are empirical quantiles by nearest rank: for `n` sorted
//! values and `B` bins, boundary `j` is the order statistic at 0-based
//! index `⌈j·n/B⌉`, so the lower `j` bins hold exactly `⌈j·n/B⌉` values
//! when there are no ties. Intervals are right-open (a value equal to a
//! boundary belongs to the upper bin) and values beyond the extreme
//! boundaries fall in the end bins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::JointDist3;
use crate::error::{Error, Result};
use crate::models::{Model, SampleBatch};

pub const DEFAULT_BINS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinStrategy {
    /// Split by sign, then equal-count bins within each sign group.
    SignTertile,
    /// Equal-count bins over all values.
    Sextile,
}

impl BinStrategy {
    pub fn for_model(model: Model) -> Self {
        match model {
            Model::Bgm => BinStrategy::SignTertile,
            Model::Sbg => BinStrategy::Sextile,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinStrategy::SignTertile => "sign-tertile",
            BinStrategy::Sextile => "sextile",
        }
    }
}

/// Interior boundaries of one variable's bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub strategy: BinStrategy,
    /// `bins − 1` strictly increasing cut points.
    pub boundaries: Vec<f64>,
}

impl BinEdges {
    pub fn bins(&self) -> usize {
        self.boundaries.len() + 1
    }

    #[inline]
    pub fn bin_of(&self, v: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= v)
    }

    /// Count of values per bin.
    pub fn counts(&self, values: &[f64]) -> Vec<usize> {
        let mut out = vec![0; self.bins()];
        for &v in values {
            out[self.bin_of(v)] += 1;
        }
        out
    }
}

/// Nearest-rank cut points splitting sorted `v` into `bins` groups.
fn quantile_cuts(sorted: &[f64], bins: usize) -> Vec<f64> {
    let n = sorted.len();
    (1..bins).map(|j| sorted[(j * n).div_ceil(bins)]).collect()
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.par_sort_unstable_by(f64::total_cmp);
    v
}

fn check_increasing(boundaries: &[f64], bins: usize) -> Result<()> {
    if boundaries.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::TiedBoundaries { bins })
    }
}

/// Sign split followed by `bins / 2` equal-count bins per sign group; zero
/// is the middle boundary and belongs to the positive group.
pub fn bgm_edges(values: &[f64], bins: usize) -> Result<BinEdges> {
    if bins < 2 || bins % 2 != 0 {
        return Err(Error::InvalidBinCount {
            bins,
            strategy: BinStrategy::SignTertile.as_str(),
        });
    }
    let half = bins / 2;
    let neg = sorted(values.iter().copied().filter(|&v| v < 0.0));
    let pos = sorted(values.iter().copied().filter(|&v| v >= 0.0));
    for (sign, group) in [("negative", &neg), ("positive", &pos)] {
        if group.len() < half {
            return Err(Error::DegenerateSign {
                sign,
                count: group.len(),
                needed: half,
            });
        }
    }
    let mut boundaries = quantile_cuts(&neg, half);
    boundaries.push(0.0);
    boundaries.extend(quantile_cuts(&pos, half));
    check_increasing(&boundaries, bins)?;
    Ok(BinEdges {
        strategy: BinStrategy::SignTertile,
        boundaries,
    })
}

/// `bins` equal-count bins over all values.
pub fn sbg_edges(values: &[f64], bins: usize) -> Result<BinEdges> {
    if bins < 2 {
        return Err(Error::InvalidBinCount {
            bins,
            strategy: BinStrategy::Sextile.as_str(),
        });
    }
    if values.len() < bins {
        return Err(Error::TooFewValues {
            count: values.len(),
            needed: bins,
        });
    }
    let boundaries = quantile_cuts(&sorted(values.iter().copied()), bins);
    check_increasing(&boundaries, bins)?;
    Ok(BinEdges {
        strategy: BinStrategy::Sextile,
        boundaries,
    })
}

pub fn edges_for(strategy: BinStrategy, values: &[f64], bins: usize) -> Result<BinEdges> {
    match strategy {
        BinStrategy::SignTertile => bgm_edges(values, bins),
        BinStrategy::Sextile => sbg_edges(values, bins),
    }
}

/// Raw counts over (Y, R-bin, C-bin), row-major; y = −1 is index 0.
pub fn joint_counts(batch: &SampleBatch, r_edges: &BinEdges, c_edges: &BinEdges) -> Result<Vec<u64>> {
    let y = batch.y.as_ref().ok_or(Error::MissingOutputs)?;
    let (nr, nc) = (r_edges.bins(), c_edges.bins());
    let size = 2 * nr * nc;
    let counts = (0..batch.n())
        .into_par_iter()
        .with_min_len(1 << 14)
        .fold(
            || vec![0u64; size],
            |mut acc, i| {
                let yi = usize::from(y[i] > 0);
                let cell = (yi * nr + r_edges.bin_of(batch.r[i])) * nc + c_edges.bin_of(batch.c[i]);
                acc[cell] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(counts)
}

pub fn build_joint(batch: &SampleBatch, r_edges: &BinEdges, c_edges: &BinEdges) -> Result<JointDist3> {
    let counts = joint_counts(batch, r_edges, c_edges)?;
    JointDist3::from_weights(
        [2, r_edges.bins(), c_edges.bins()],
        counts.into_iter().map(|k| k as f64).collect(),
    )
}
