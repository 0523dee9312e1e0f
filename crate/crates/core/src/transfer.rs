//! Transfer functions of the two-input processor and the logistic output
//! stage.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{chunked, SampleBatch};

/// Bound applied to `T − b` before the logistic link.
pub const T_CLAMP: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TransferTag {
    #[serde(rename = "m1")]
    M1,
    #[serde(rename = "m2")]
    M2,
    #[serde(rename = "m3")]
    M3,
    #[serde(rename = "m4")]
    M4,
    #[serde(rename = "add")]
    A,
    #[serde(rename = "sub")]
    S,
    #[serde(rename = "mul")]
    P,
    #[serde(rename = "div")]
    D,
}

impl TransferTag {
    pub const ALL: [TransferTag; 8] = [
        TransferTag::M1,
        TransferTag::M2,
        TransferTag::M3,
        TransferTag::M4,
        TransferTag::A,
        TransferTag::S,
        TransferTag::P,
        TransferTag::D,
    ];

    /// Command-line tag.
    pub fn as_str(self) -> &'static str {
        match self {
            TransferTag::M1 => "m1",
            TransferTag::M2 => "m2",
            TransferTag::M3 => "m3",
            TransferTag::M4 => "m4",
            TransferTag::A => "add",
            TransferTag::S => "sub",
            TransferTag::P => "mul",
            TransferTag::D => "div",
        }
    }

    /// Short label used in figures.
    pub fn label(self) -> &'static str {
        match self {
            TransferTag::M1 => "M1",
            TransferTag::M2 => "M2",
            TransferTag::M3 => "M3",
            TransferTag::M4 => "M4",
            TransferTag::A => "A",
            TransferTag::S => "S",
            TransferTag::P => "P",
            TransferTag::D => "D",
        }
    }

    pub fn is_modulatory(self) -> bool {
        matches!(self, TransferTag::M1 | TransferTag::M2 | TransferTag::M3 | TransferTag::M4)
    }

    /// `T(r, c)` without bias or clamp. Division by an exact zero context
    /// returns `sign(r)·T_CLAMP`, and 0 when `r` is also zero.
    pub fn raw(self, r: f64, c: f64) -> f64 {
        match self {
            TransferTag::M1 => 0.5 * r * (1.0 + (r * c).exp()),
            TransferTag::M2 => r + r * c,
            TransferTag::M3 => r * (1.0 + (r * c).tanh()),
            TransferTag::M4 => r * (r * c).exp2(),
            TransferTag::A => r + c,
            TransferTag::S => r - c,
            TransferTag::P => r * c,
            TransferTag::D => {
                if c == 0.0 {
                    if r == 0.0 {
                        0.0
                    } else {
                        T_CLAMP.copysign(r)
                    }
                } else {
                    r / c
                }
            }
        }
    }
}

impl fmt::Display for TransferTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransferTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        TransferTag::ALL
            .into_iter()
            .find(|k| k.as_str() == t || k.label().eq_ignore_ascii_case(&t))
            .ok_or_else(|| Error::UnknownTransfer(s.to_string()))
    }
}

/// A transfer function with its bias `b`; evaluation returns `T − b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferKind {
    pub tag: TransferTag,
    pub bias: f64,
}

impl TransferKind {
    pub fn new(tag: TransferTag) -> Self {
        Self { tag, bias: 0.0 }
    }

    pub fn with_bias(tag: TransferTag, bias: f64) -> Self {
        assert!(bias.is_finite(), "bias must be finite");
        Self { tag, bias }
    }
}

/// `T(r, c) − b` clamped to `[−T_CLAMP, T_CLAMP]`.
pub fn eval_transfer(kind: TransferKind, r: f64, c: f64) -> f64 {
    let t = kind.tag.raw(r, c) - kind.bias;
    if t.is_nan() {
        // Only reachable through inf − inf on overflow; the two sides cancel.
        return 0.0;
    }
    t.clamp(-T_CLAMP, T_CLAMP)
}

/// Median of the raw transfer values over the batch; an even count takes
/// the mean of the two middle order statistics.
pub fn fit_bias(tag: TransferTag, batch: &SampleBatch) -> f64 {
    let values: Vec<f64> = batch
        .r
        .iter()
        .zip(&batch.c)
        .map(|(&r, &c)| tag.raw(r, c).clamp(-f64::MAX, f64::MAX))
        .collect();
    median(values)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty(), "median of an empty sample");
    let n = v.len();
    let (_, &mut hi, _) = v.select_nth_unstable_by(n / 2, f64::total_cmp);
    if n % 2 == 1 {
        return hi;
    }
    let lo = v[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    0.5 * lo + 0.5 * hi
}

/// Logistic link `1 / (1 + e^{−T})`.
pub fn output_prob(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Independent Bernoulli outputs: +1 with probability `θ_i`, otherwise −1.
pub fn simulate_outputs(theta: &[f64], seed: u64) -> Vec<i8> {
    chunked(theta.len(), seed, |rng, range, out| {
        for &p in &theta[range] {
            let u: f64 = rng.random();
            out.push(if u < p { 1 } else { -1 });
        }
    })
}
