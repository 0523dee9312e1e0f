//! Continuous input models: the four-component bivariate Gaussian mixture
//! (BGM) and the single bivariate Gaussian (SBG).
//!
//! Sampling is split into fixed-size chunks. Chunk `k` draws from a
//! ChaCha8 stream keyed by the batch seed with stream id `k`, so a batch is
//! a pure function of `(n, seed)` regardless of how many threads generate
//! it. Normals come from the ziggurat sampler in `rand_distr`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per independently seeded chunk.
pub const CHUNK: usize = 1 << 16;
pub const DEFAULT_SIGMA: f64 = 0.3;
/// Recorded alongside results so runs can be matched to the generator.
pub const RNG_NAME: &str = "chacha8-stream-per-chunk/ziggurat-normal";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Bgm,
    Sbg,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Bgm => "bgm",
            Model::Sbg => "sbg",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bgm" => Ok(Model::Bgm),
            "sbg" => Ok(Model::Sbg),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

/// Signal strengths of the drive (`s1`) and context (`s2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u8,
    pub s1: f64,
    pub s2: f64,
}

pub const SCENARIO_IDS: [u8; 4] = [1, 2, 3, 4];

pub fn scenario(id: u8) -> Result<Scenario> {
    let (s1, s2) = match id {
        1 => (10.0, 0.05),
        2 => (0.05, 10.0),
        3 => (1.0, 0.05),
        4 => (1.0, 5.0),
        _ => return Err(Error::UnknownScenario(id)),
    };
    Ok(Scenario { id, s1, s2 })
}

/// Mixture with means (∓1, ∓1), shared covariance `σ²[[1,d],[d,1]]` and
/// proportions `(λ, μ, μ, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub s1: f64,
    pub s2: f64,
    pub d: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl MixtureSpec {
    /// Component means in sampling order.
    pub const MEANS: [(f64, f64); 4] = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)];

    pub fn proportions(&self) -> [f64; 4] {
        [self.lambda, self.mu, self.mu, self.lambda]
    }

    /// Correlation of (X1, X2) implied by the mixture.
    pub fn implied_correlation(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        // E[X1 X2] over component means plus the within-component term.
        let mean_prod: f64 = Self::MEANS
            .iter()
            .zip(self.proportions())
            .map(|(&(a, b), w)| w * a * b)
            .sum();
        (mean_prod + self.d * s2) / (1.0 + s2)
    }
}

pub fn mixture_spec(d: f64, sigma: f64, s1: f64, s2: f64) -> Result<MixtureSpec> {
    if !(d.abs() < 1.0) {
        return Err(Error::InvalidCorrelation(d));
    }
    check_scales(sigma, s1, s2)?;
    Ok(MixtureSpec {
        s1,
        s2,
        d,
        sigma,
        lambda: (1.0 + d) / 4.0,
        mu: (1.0 - d) / 4.0,
    })
}

fn check_scales(sigma: f64, s1: f64, s2: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if !(s1 >= 0.0 && s2 >= 0.0 && s1.is_finite() && s2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "signal strengths must be nonnegative, got ({s1}, {s2})"
        )));
    }
    Ok(())
}

/// Parallel sequences of inputs and, once simulated, outputs in {−1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub r: Vec<f64>,
    pub c: Vec<f64>,
    pub y: Option<Vec<i8>>,
    pub seed: u64,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Writes `r,c,y` rows; `y` is left empty before output simulation.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, csv_io(e)))?;
        w.write_record(["r", "c", "y"]).map_err(|e| Error::io(path, csv_io(e)))?;
        for i in 0..self.n() {
            let y = self.y.as_ref().map(|y| y[i].to_string()).unwrap_or_default();
            w.write_record([self.r[i].to_string(), self.c[i].to_string(), y])
                .map_err(|e| Error::io(path, csv_io(e)))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn csv_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

/// Runs `fill` on each chunk of `0..n` with that chunk's generator and
/// concatenates the results in chunk order.
pub(crate) fn chunked<T, F>(n: usize, seed: u64, fill: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, std::ops::Range<usize>, &mut Vec<T>) + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let range = k * CHUNK..((k + 1) * CHUNK).min(n);
            let mut out = Vec::with_capacity(range.len());
            fill(&mut rng, range, &mut out);
            out
        })
        .collect();
    let mut all = Vec::with_capacity(n);
    for p in parts {
        all.extend(p);
    }
    all
}

/// Draws from the mixture; also returns each sample's component index.
pub fn sample_bgm_labeled(spec: &MixtureSpec, n: usize, seed: u64) -> (SampleBatch, Vec<u8>) {
    let w = spec.proportions();
    let cum = [w[0], w[0] + w[1], w[0] + w[1] + w[2]];
    let (sigma, d) = (spec.sigma, spec.d);
    let tail = (1.0 - d * d).sqrt();
    let draws = chunked(n, seed, |rng, range, out| {
        for _ in range {
            let u: f64 = rng.random();
            let k = cum.iter().take_while(|&&b| u >= b).count();
            let (m1, m2) = MixtureSpec::MEANS[k];
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let x1 = m1 + sigma * z1;
            let x2 = m2 + sigma * (d * z1 + tail * z2);
            out.push((spec.s1 * x1, spec.s2 * x2, k as u8));
        }
    });
    let mut r = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (a, b, k) in draws {
        r.push(a);
        c.push(b);
        labels.push(k);
    }
    (SampleBatch { r, c, y: None, seed }, labels)
}

pub fn sample_bgm(spec: &MixtureSpec, n: usize, seed: u64) -> SampleBatch {
    sample_bgm_labeled(spec, n, seed).0
}

/// Single Gaussian with mean (1, 1) and covariance `σ²[[1,d],[d,1]]`,
/// scaled to `R = s1·X1`, `C = s2·X2`.
pub fn sample_sbg(s1: f64, s2: f64, d: f64, sigma: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    if !(d.abs() <= 1.0) {
        return Err(Error::InvalidCorrelation(d));
    }
    check_scales(sigma, s1, s2)?;
    let tail = (1.0 - d * d).sqrt();
    let draws = chunked(n, seed, |rng, range, out| {
        for _ in range {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            out.push((s1 * (1.0 + sigma * z1), s2 * (1.0 + sigma * (d * z1 + tail * z2))));
        }
    });
    let (r, c) = draws.into_iter().unzip();
    Ok(SampleBatch { r, c, y: None, seed })
}
