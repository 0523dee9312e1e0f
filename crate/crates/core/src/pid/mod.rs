//! Partial information decompositions of I(Y; R, C).
//!
//! Each method produces one of the four atoms directly (shared information
//! for `imin` and `ccs`, unique information of R for `broja`) and the other
//! three follow from the four consistency identities
//!
//! ```text
//! I(Y;R)   = UnqR + Shd      I(Y;R|C) = UnqR + Syn
//! I(Y;C)   = UnqC + Shd      I(Y;C|R) = UnqC + Syn
//! ```

mod broja;
mod ccs;
mod imin;
mod maxent;
mod transport;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{InfoSummary, JointDist3};
use crate::error::{Error, Result};

pub use broja::{pid_broja, BrojaOptions, BrojaSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use ccs::{pid_ccs, CcsVariant};
pub use imin::{pid_imin, specific_information};
pub use maxent::{maxent_pairwise, maxent_pairwise_ipf};
pub use transport::transport_vertex;

/// Components in `[-CLIP_TOL, 0)` are reported as zero for nonnegative
/// methods.
pub const CLIP_TOL: f64 = 1e-9;

/// Registered decomposition methods. `Proj` and `Dep` are reserved
/// identifiers without an implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Imin,
    Broja,
    Ccs,
    Proj,
    Dep,
}

impl Method {
    pub const IMPLEMENTED: [Method; 3] = [Method::Imin, Method::Broja, Method::Ccs];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Imin => "imin",
            Method::Broja => "broja",
            Method::Ccs => "ccs",
            Method::Proj => "proj",
            Method::Dep => "dep",
        }
    }

    /// Whether every component is guaranteed nonnegative.
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, Method::Ccs)
    }

    /// Parses a comma-separated method list such as `imin,broja,ccs`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "imin" => Ok(Method::Imin),
            "broja" => Ok(Method::Broja),
            "ccs" => Ok(Method::Ccs),
            "proj" => Ok(Method::Proj),
            "dep" => Ok(Method::Dep),
            _ => Err(Error::UnknownMethod(s.to_owned())),
        }
    }
}

/// The four PID atoms, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidComponents {
    pub method: Method,
    pub unq_r: f64,
    pub unq_c: f64,
    pub shd: f64,
    pub syn: f64,
}

impl PidComponents {
    /// Completes the decomposition from a known shared-information value.
    pub(crate) fn from_shared(method: Method, shd: f64, s: &InfoSummary) -> Self {
        let unq_r = s.i_yr - shd;
        let unq_c = s.i_yc - shd;
        let syn = s.i_yr_given_c - unq_r;
        Self {
            method,
            unq_r,
            unq_c,
            shd,
            syn,
        }
        .clipped()
    }

    /// Completes the decomposition from a known unique-information value of R.
    pub(crate) fn from_unique_r(method: Method, unq_r: f64, s: &InfoSummary) -> Self {
        let shd = s.i_yr - unq_r;
        let unq_c = s.i_yc - shd;
        let syn = s.i_yr_given_c - unq_r;
        Self {
            method,
            unq_r,
            unq_c,
            shd,
            syn,
        }
        .clipped()
    }

    fn clipped(mut self) -> Self {
        if self.method.is_nonnegative() {
            for v in [&mut self.unq_r, &mut self.unq_c, &mut self.shd, &mut self.syn] {
                if *v < 0.0 && *v >= -CLIP_TOL {
                    *v = 0.0;
                }
            }
        }
        self
    }

    /// Exchanges the roles of R and C.
    pub fn swapped(self) -> Self {
        Self {
            unq_r: self.unq_c,
            unq_c: self.unq_r,
            ..self
        }
    }

    /// Largest violation of the four consistency identities.
    pub fn consistency_error(&self, s: &InfoSummary) -> f64 {
        [
            self.unq_r + self.shd - s.i_yr,
            self.unq_c + self.shd - s.i_yc,
            self.unq_r + self.syn - s.i_yr_given_c,
            self.unq_c + self.syn - s.i_yc_given_r,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.unq_r + self.unq_c + self.shd + self.syn
    }
}

/// Five-term spectrum: the PID atoms plus residual output entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub method: Method,
    pub unq_r: f64,
    pub unq_c: f64,
    pub shd: f64,
    pub syn: f64,
    pub hres: f64,
    /// Output entropy in bits, never rescaled.
    pub hy: f64,
    pub normalized: bool,
}

impl Spectrum {
    /// Terms in legend order: UnqR, UnqC, Shd, Syn, Hres.
    pub fn terms(&self) -> [f64; 5] {
        [self.unq_r, self.unq_c, self.shd, self.syn, self.hres]
    }

    pub fn sum(&self) -> f64 {
        self.terms().iter().sum()
    }

    /// Transmitted information I(Y; R, C) on the spectrum's scale.
    pub fn transmitted(&self) -> f64 {
        self.unq_r + self.unq_c + self.shd + self.syn
    }

    /// Scale factor back to bits.
    fn scale(&self) -> f64 {
        if self.normalized {
            self.hy
        } else {
            1.0
        }
    }

    /// I(Y; R) = UnqR + Shd in bits, regardless of normalization.
    pub fn info_r_bits(&self) -> f64 {
        (self.unq_r + self.shd) * self.scale()
    }

    /// I(Y; C) = UnqC + Shd in bits.
    pub fn info_c_bits(&self) -> f64 {
        (self.unq_c + self.shd) * self.scale()
    }

    pub fn transmitted_bits(&self) -> f64 {
        self.transmitted() * self.scale()
    }
}

/// Attaches the residual entropy and optionally divides by H(Y).
///
/// When normalization is requested but H(Y) is below 1e-12 this returns
/// [`Error::ZeroEntropyOutput`]; use [`zero_spectrum`] for the flagged
/// all-zero fallback.
pub fn complete_spectrum(c: &PidComponents, s: &InfoSummary, normalize: bool) -> Result<Spectrum> {
    let raw = Spectrum {
        method: c.method,
        unq_r: c.unq_r,
        unq_c: c.unq_c,
        shd: c.shd,
        syn: c.syn,
        hres: s.hres,
        hy: s.hy,
        normalized: false,
    };
    if !normalize {
        return Ok(raw);
    }
    if s.hy < 1e-12 {
        return Err(Error::ZeroEntropyOutput);
    }
    let k = 1.0 / s.hy;
    Ok(Spectrum {
        unq_r: raw.unq_r * k,
        unq_c: raw.unq_c * k,
        shd: raw.shd * k,
        syn: raw.syn * k,
        hres: raw.hres * k,
        normalized: true,
        ..raw
    })
}

/// All-zero spectrum flagged as normalized, reported in place of dividing
/// by a vanishing output entropy.
pub fn zero_spectrum(method: Method, hy: f64) -> Spectrum {
    Spectrum {
        method,
        unq_r: 0.0,
        unq_c: 0.0,
        shd: 0.0,
        syn: 0.0,
        hres: 0.0,
        hy,
        normalized: true,
    }
}

/// Runs one decomposition with default solver settings.
pub fn decompose(dist: &JointDist3, method: Method) -> Result<PidComponents> {
    match method {
        Method::Imin => pid_imin(dist),
        Method::Broja => pid_broja(dist, &BrojaOptions::default()).map(|(c, _)| c),
        Method::Ccs => pid_ccs(dist, CcsVariant::default()),
        Method::Proj => Err(Error::UnsupportedMethod("proj")),
        Method::Dep => Err(Error::UnsupportedMethod("dep")),
    }
}
