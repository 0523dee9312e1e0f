//! Finite trivariate distributions over (Y, R, C) and the Shannon quantities
//! derived from them.
//!
//! All information values are in bits. Cells below [`ZERO_MASS`] are treated
//! as exact zeros when evaluating `p log p`.

use std::ops::BitOr;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability mass below this is treated as zero inside logarithms.
pub const ZERO_MASS: f64 = 1e-15;

/// Round-off allowance for negative mutual information.
pub const MI_CLIP: f64 = 1e-12;

/// Subset of the three axes, used to select a marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Axes(u8);

impl Axes {
    pub const NONE: Axes = Axes(0);
    pub const Y: Axes = Axes(1);
    pub const R: Axes = Axes(2);
    pub const C: Axes = Axes(4);
    pub const YR: Axes = Axes(3);
    pub const YC: Axes = Axes(5);
    pub const RC: Axes = Axes(6);
    pub const YRC: Axes = Axes(7);

    pub fn contains(self, other: Axes) -> bool {
        self.0 & other.0 == other.0
    }
}

impl BitOr for Axes {
    type Output = Axes;
    fn bitor(self, rhs: Axes) -> Axes {
        Axes(self.0 | rhs.0)
    }
}

/// Joint probability array over (Y, R, C), stored row-major with C fastest.
///
/// Y index 0 corresponds to output −1 and index 1 to output +1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist3 {
    ny: usize,
    nr: usize,
    nc: usize,
    p: Vec<f64>,
}

impl JointDist3 {
    /// Normalizes nonnegative weights (counts or unnormalized mass) into a
    /// distribution with the given axis sizes.
    pub fn from_weights(dims: [usize; 3], weights: Vec<f64>) -> Result<Self> {
        let [ny, nr, nc] = dims;
        let expected = ny * nr * nc;
        if expected == 0 || weights.len() != expected {
            return Err(Error::ShapeMismatch {
                dims,
                expected,
                got: weights.len(),
            });
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if w < 0.0 {
                return Err(Error::NegativeMass { index, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::AllZero);
        }
        let p = weights.into_iter().map(|w| w / total).collect();
        Ok(JointDist3 { ny, nr, nc, p })
    }

    /// Builds a distribution from a closure over `(y, r, c)`.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let [ny, nr, nc] = dims;
        let mut w = Vec::with_capacity(ny * nr * nc);
        for y in 0..ny {
            for r in 0..nr {
                for c in 0..nc {
                    w.push(f(y, r, c));
                }
            }
        }
        Self::from_weights(dims, w)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.ny, self.nr, self.nc]
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    #[inline]
    pub fn index(&self, y: usize, r: usize, c: usize) -> usize {
        (y * self.nr + r) * self.nc + c
    }

    #[inline]
    pub fn get(&self, y: usize, r: usize, c: usize) -> f64 {
        self.p[self.index(y, r, c)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Exchanges the R and C axes.
    pub fn swap_sources(&self) -> JointDist3 {
        let mut p = vec![0.0; self.p.len()];
        for y in 0..self.ny {
            for r in 0..self.nr {
                for c in 0..self.nc {
                    p[(y * self.nc + c) * self.nr + r] = self.get(y, r, c);
                }
            }
        }
        JointDist3 {
            ny: self.ny,
            nr: self.nc,
            nc: self.nr,
            p,
        }
    }

    /// Marginal over the selected axes, laid out in (Y, R, C) order with the
    /// dropped axes removed. Each entry is the correctly rounded sum of its
    /// cells, so permuting axes permutes the marginal exactly.
    pub fn marginal(&self, axes: Axes) -> Vec<f64> {
        let sy = if axes.contains(Axes::Y) { self.ny } else { 1 };
        let sr = if axes.contains(Axes::R) { self.nr } else { 1 };
        let sc = if axes.contains(Axes::C) { self.nc } else { 1 };
        if sy * sr * sc == self.p.len() {
            return self.p.clone();
        }
        let mut parts = vec![Vec::new(); sy * sr * sc];
        for y in 0..self.ny {
            let iy = if sy > 1 { y } else { 0 };
            for r in 0..self.nr {
                let ir = if sr > 1 { r } else { 0 };
                for c in 0..self.nc {
                    let ic = if sc > 1 { c } else { 0 };
                    parts[(iy * sr + ir) * sc + ic].push(self.get(y, r, c));
                }
            }
        }
        parts.into_iter().map(exact_sum).collect()
    }

    /// Shannon entropy (bits) of the marginal over `axes`.
    pub fn entropy(&self, axes: Axes) -> f64 {
        entropy_of(&self.marginal(axes))
    }

    pub fn summary(&self) -> Result<InfoSummary> {
        shannon_summary(self)
    }

    pub fn to_doc(&self) -> DistDoc {
        DistDoc {
            dims: self.dims(),
            p: self.p.clone(),
        }
    }

    pub fn from_doc(doc: DistDoc) -> Result<Self> {
        Self::from_weights(doc.dims, doc.p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: DistDoc = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        Self::from_doc(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_doc()).expect("serializable");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// JSON probability-array document: `dims = [ny, nr, nc]`, `p` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistDoc {
    pub dims: [usize; 3],
    pub p: Vec<f64>,
}

/// `-Σ p log2 p` over a probability vector, skipping near-zero cells. The
/// terms are summed exactly, so the result does not depend on cell order.
pub fn entropy_of(p: &[f64]) -> f64 {
    let h = exact_sum(p.iter().filter(|&&x| x >= ZERO_MASS).map(|&x| -x * x.log2()));
    h.max(0.0)
}

/// Correctly rounded sum of finite values (Shewchuk's partials with a
/// round-half-even fix-up, as in Python's `math.fsum`).
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// The classical Shannon quantities feeding a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub hy: f64,
    pub hres: f64,
    pub i_yrc: f64,
    pub i_yr: f64,
    pub i_yc: f64,
    pub i_yr_given_c: f64,
    pub i_yc_given_r: f64,
}

fn clip_mi(quantity: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -MI_CLIP {
        Ok(0.0)
    } else {
        Err(Error::Inconsistent { quantity, value })
    }
}

pub fn shannon_summary(dist: &JointDist3) -> Result<InfoSummary> {
    let h_y = dist.entropy(Axes::Y);
    let h_r = dist.entropy(Axes::R);
    let h_c = dist.entropy(Axes::C);
    let h_yr = dist.entropy(Axes::YR);
    let h_yc = dist.entropy(Axes::YC);
    let h_rc = dist.entropy(Axes::RC);
    let h_yrc = dist.entropy(Axes::YRC);

    let i_yrc = clip_mi("I(Y;R,C)", h_y + h_rc - h_yrc)?;
    let i_yr = clip_mi("I(Y;R)", h_y + h_r - h_yr)?;
    let i_yc = clip_mi("I(Y;C)", h_y + h_c - h_yc)?;
    let i_yr_given_c = clip_mi("I(Y;R|C)", h_yc + h_rc - h_c - h_yrc)?;
    let i_yc_given_r = clip_mi("I(Y;C|R)", h_yr + h_rc - h_r - h_yrc)?;
    let hres = clip_mi("H(Y|R,C)", h_y - i_yrc)?;

    Ok(InfoSummary {
        hy: h_y,
        hres,
        i_yrc,
        i_yr,
        i_yc,
        i_yr_given_c,
        i_yc_given_r,
    })
}

/// Canonical two-input logic gates with uniform binary inputs, as 2×2×2
/// distributions.
pub mod gates {
    use super::JointDist3;

    fn gate(f: impl Fn(usize, usize) -> usize) -> JointDist3 {
        JointDist3::from_fn([2, 2, 2], |y, r, c| if f(r, c) == y { 1.0 } else { 0.0 })
            .expect("gate tables are nonempty")
    }

    pub fn and() -> JointDist3 {
        gate(|r, c| r & c)
    }

    pub fn xor() -> JointDist3 {
        gate(|r, c| r ^ c)
    }

    /// Y = R = C.
    pub fn rdn() -> JointDist3 {
        JointDist3::from_fn([2, 2, 2], |y, r, c| {
            if y == r && r == c {
                1.0
            } else {
                0.0
            }
        })
        .expect("nonempty")
    }

    /// Y = R, with C an independent uniform bit.
    pub fn unq() -> JointDist3 {
        gate(|r, _| r)
    }

    pub fn by_name(name: &str) -> Option<JointDist3> {
        match name {
            "and" => Some(and()),
            "xor" => Some(xor()),
            "rdn" => Some(rdn()),
            "unq" => Some(unq()),
            _ => None,
        }
    }
}
