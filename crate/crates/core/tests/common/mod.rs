//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond the distribution container.

#![allow(dead_code)]

use modpid::JointDist3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution; each cell is zeroed with probability `sparsity`.
/// Falls back to a dense draw when every cell would vanish.
pub fn random_dist(rng: &mut impl Rng, dims: [usize; 3], sparsity: f64) -> JointDist3 {
    let n = dims.iter().product();
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < sparsity {
                    0.0
                } else {
                    rng.random::<f64>().powi(3)
                }
            })
            .collect();
        if w.iter().any(|&x| x > 0.0) {
            return JointDist3::from_weights(dims, w).unwrap();
        }
    }
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Dense copy as p[y][r][c].
pub fn table(d: &JointDist3) -> Vec<Vec<Vec<f64>>> {
    let [ny, nr, nc] = d.dims();
    (0..ny)
        .map(|y| (0..nr).map(|r| (0..nc).map(|c| d.get(y, r, c)).collect()).collect())
        .collect()
}

pub struct Marginals {
    pub y: Vec<f64>,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
    pub yr: Vec<Vec<f64>>,
    pub yc: Vec<Vec<f64>>,
    pub rc: Vec<Vec<f64>>,
}

pub fn marginals(p: &[Vec<Vec<f64>>]) -> Marginals {
    let (ny, nr, nc) = (p.len(), p[0].len(), p[0][0].len());
    let mut m = Marginals {
        y: vec![0.0; ny],
        r: vec![0.0; nr],
        c: vec![0.0; nc],
        yr: vec![vec![0.0; nr]; ny],
        yc: vec![vec![0.0; nc]; ny],
        rc: vec![vec![0.0; nc]; nr],
    };
    for y in 0..ny {
        for r in 0..nr {
            for c in 0..nc {
                let v = p[y][r][c];
                m.y[y] += v;
                m.r[r] += v;
                m.c[c] += v;
                m.yr[y][r] += v;
                m.yc[y][c] += v;
                m.rc[r][c] += v;
            }
        }
    }
    m
}

pub fn h(v: impl IntoIterator<Item = f64>) -> f64 {
    -v.into_iter().map(xlog2x).sum::<f64>()
}

/// (I(Y;R), I(Y;C), I(Y;R|C), I(Y;C|R), I(Y;R,C), H(Y)) from entropies.
pub fn shannon(p: &[Vec<Vec<f64>>]) -> [f64; 6] {
    let m = marginals(p);
    let flat = |t: &Vec<Vec<f64>>| t.iter().flatten().copied().collect::<Vec<_>>();
    let hy = h(m.y.clone());
    let hr = h(m.r.clone());
    let hc = h(m.c.clone());
    let hyr = h(flat(&m.yr));
    let hyc = h(flat(&m.yc));
    let hrc = h(flat(&m.rc));
    let hyrc = h(p.iter().flatten().flatten().copied());
    [
        hy + hr - hyr,
        hy + hc - hyc,
        hyc + hrc - hc - hyrc,
        hyr + hrc - hr - hyrc,
        hy + hrc - hyrc,
        hy,
    ]
}

/// Williams–Beer minimum specific information.
pub fn imin_shared(p: &[Vec<Vec<f64>>]) -> f64 {
    let m = marginals(p);
    let mut shd = 0.0;
    for y in 0..m.y.len() {
        if m.y[y] <= 0.0 {
            continue;
        }
        let spec = |joint: &Vec<Vec<f64>>, src: &Vec<f64>| -> f64 {
            (0..src.len())
                .filter(|&x| joint[y][x] > 0.0)
                .map(|x| {
                    let p_x_given_y = joint[y][x] / m.y[y];
                    let p_y_given_x = joint[y][x] / src[x];
                    p_x_given_y * (p_y_given_x / m.y[y]).log2()
                })
                .sum()
        };
        shd += m.y[y] * spec(&m.yr, &m.r).min(spec(&m.yc, &m.c));
    }
    shd
}

/// Common change in surprisal on the observed joint.
pub fn ccs_shared(p: &[Vec<Vec<f64>>]) -> f64 {
    let m = marginals(p);
    let sgn = |x: f64| {
        if x > 1e-12 {
            1
        } else if x < -1e-12 {
            -1
        } else {
            0
        }
    };
    let mut shd = 0.0;
    for (y, py) in p.iter().enumerate() {
        for (r, pr) in py.iter().enumerate() {
            for (c, &v) in pr.iter().enumerate() {
                if v <= 0.0 {
                    continue;
                }
                let ir = (m.yr[y][r] / m.r[r] / m.y[y]).log2();
                let ic = (m.yc[y][c] / m.c[c] / m.y[y]).log2();
                let irc = (v / m.rc[r][c] / m.y[y]).log2();
                let coi = ir + ic - irc;
                let s = sgn(coi);
                if s != 0 && sgn(ir) == s && sgn(ic) == s && sgn(irc) == s {
                    shd += v * coi;
                }
            }
        }
    }
    shd
}

/// I_Q(Y;R|C) for a full table `q`.
fn cond_mi_r_given_c(q: &[[[f64; 2]; 2]; 2]) -> f64 {
    let mut total = 0.0;
    for c in 0..2 {
        let qc: f64 = (0..2).flat_map(|y| (0..2).map(move |r| (y, r))).map(|(y, r)| q[y][r][c]).sum();
        for y in 0..2 {
            let qyc = q[y][0][c] + q[y][1][c];
            for r in 0..2 {
                let qrc = q[0][r][c] + q[1][r][c];
                let v = q[y][r][c];
                if v > 0.0 {
                    total += v * (v * qc / (qyc * qrc)).log2();
                }
            }
        }
    }
    total
}

/// Feasible (Y,R,C) tables on 2×2×2 with the (Y,R) and (Y,C) marginals of
/// `p`: each Y-slice has one free coordinate `t = Q(y,0,0)` in an interval.
struct Polytope {
    yr: Vec<Vec<f64>>,
    yc: Vec<Vec<f64>>,
}

impl Polytope {
    fn new(p: &[Vec<Vec<f64>>]) -> Self {
        let m = marginals(p);
        Self { yr: m.yr, yc: m.yc }
    }

    fn range(&self, y: usize) -> (f64, f64) {
        let (a0, a1, b0) = (self.yr[y][0], self.yr[y][1], self.yc[y][0]);
        ((b0 - a1).max(0.0), a0.min(b0))
    }

    fn slice(&self, y: usize, t: f64) -> [[f64; 2]; 2] {
        let (a0, a1, b0) = (self.yr[y][0], self.yr[y][1], self.yc[y][0]);
        let clip = |v: f64| v.max(0.0);
        [[t, clip(a0 - t)], [clip(b0 - t), clip(a1 - b0 + t)]]
    }

    fn value(&self, t0: f64, t1: f64) -> f64 {
        cond_mi_r_given_c(&[self.slice(0, t0), self.slice(1, t1)])
    }

    /// Minimum over the product grid of `k + 1` points per box side.
    fn grid_min(&self, b0: (f64, f64), b1: (f64, f64), k0: usize, k1: usize) -> (f64, f64, f64) {
        let at = |(lo, hi): (f64, f64), k: usize, i: usize| lo + (hi - lo) * i as f64 / k as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=k0 {
            let t0 = at(b0, k0, i);
            for j in 0..=k1 {
                let t1 = at(b1, k1, j);
                let v = self.value(t0, t1);
                if v < best.0 {
                    best = (v, t0, t1);
                }
            }
        }
        best
    }
}

fn points(range: (f64, f64), step: f64) -> usize {
    ((range.1 - range.0) / step).ceil().max(1.0) as usize
}

/// Grid search for min I_Q(Y;R|C) over the BROJA feasible set of a 2×2×2
/// distribution, free coordinates swept in steps of at most `step`.
pub fn brute_unique_r(p: &[Vec<Vec<f64>>], step: f64) -> f64 {
    let poly = Polytope::new(p);
    let (r0, r1) = (poly.range(0), poly.range(1));
    poly.grid_min(r0, r1, points(r0, step), points(r1, step)).0
}

/// The same search followed by local grids around the running minimum: the
/// box moves while the minimum sits on its edge and shrinks once it is
/// inside. Returns the plain grid minimum and the refined one.
pub fn brute_unique_r_refined(p: &[Vec<Vec<f64>>], step: f64) -> (f64, f64) {
    const K: usize = 40;
    let poly = Polytope::new(p);
    let (r0, r1) = (poly.range(0), poly.range(1));
    let (k0, k1) = (points(r0, step), points(r1, step));
    let coarse = poly.grid_min(r0, r1, k0, k1);
    let mut best = coarse;
    let (mut h0, mut h1) = ((r0.1 - r0.0) / k0 as f64, (r1.1 - r1.0) / k1 as f64);
    for _ in 0..2000 {
        if h0.max(h1) < 1e-13 {
            break;
        }
        let b0 = ((best.1 - 4.0 * h0).max(r0.0), (best.1 + 4.0 * h0).min(r0.1));
        let b1 = ((best.2 - 4.0 * h1).max(r1.0), (best.2 + 4.0 * h1).min(r1.1));
        let next = poly.grid_min(b0, b1, K, K);
        let on_edge = |t: f64, (lo, hi): (f64, f64), (a, b): (f64, f64)| (t == lo && lo > a) || (t == hi && hi < b);
        let moving = on_edge(next.1, b0, r0) || on_edge(next.2, b1, r1);
        if next.0 < best.0 {
            best = next;
        }
        if !moving {
            h0 = (b0.1 - b0.0) / K as f64;
            h1 = (b1.1 - b1.0) / K as f64;
        }
    }
    (coarse.0, best.0)
}
