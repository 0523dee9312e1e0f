//! BROJA unique information:
//!
//! ```text
//! UnqR = min_Q I_Q(Y;R|C)   s.t.  Q ≥ 0,  Q(y,r) = P(y,r),  Q(y,c) = P(y,c)
//! ```
//!
//! With both pairwise marginals fixed, H_Q(Y|C) is constant, so the program
//! is equivalent to minimizing the convex function
//! `F(Q) = Σ Q(y,r,c) ln Q(y|r,c)` (that is, −H_Q(Y|R,C) in nats). The
//! feasible set factors into one transportation polytope per output state,
//! so the conditional-gradient oracle is an exact transportation LP and the
//! Frank–Wolfe duality gap `⟨∇F(Q), Q − S⟩` bounds `F(Q) − F*`.
//!
//! The optimum usually sits on the boundary, where `F` is not smooth (a
//! column `Q(·,r,c)` that empties makes `∇F` blow up). Iterates are kept
//! strictly inside the support instead: damped Newton steps on
//! `F − μ Σ ln Q` restricted to the affine hull, with `μ` shrinking by a
//! constant factor once each stage is centred. Near the central path the
//! duality gap is at most `μ` times the number of free cells, and the solver
//! stops as soon as the gap certificate drops below the tolerance. An
//! iterate replaces the incumbent only when it does not raise `F`, so the
//! returned objective never exceeds the starting one.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist::{Axes, JointDist3};
use crate::error::{Error, Result};

use super::transport::transport_vertex;
use super::{Method, PidComponents};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50_000;

const LN2: f64 = std::f64::consts::LN_2;
/// Barrier weight of the first stage.
const MU_START: f64 = 1e-3;
const MU_SHRINK: f64 = 0.1;
/// Below this the barrier is lost in round-off.
const MU_MIN: f64 = 1e-20;
/// Newton steps allowed per stage.
const MAX_CENTERING: usize = 60;
/// Stage ends once the squared Newton decrement falls below this times `μ²`.
const CENTERED: f64 = 1e-6;
/// Weight of the pairwise maximum-entropy point in the interior start.
const START_BLEND: f64 = 1e-2;
/// Fraction of the distance to the boundary a step may cover.
const TO_BOUNDARY: f64 = 0.995;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrojaOptions {
    /// Duality-gap threshold in bits.
    pub tol: f64,
    pub max_iter: usize,
    /// Record the objective after every iteration.
    pub trace: bool,
}

impl Default for BrojaOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrojaSolution {
    #[serde(skip)]
    pub q: Option<JointDist3>,
    /// I_Q(Y;R|C) at the returned Q, bits.
    pub objective: f64,
    pub iterations: usize,
    /// Final duality gap, bits.
    pub gap: f64,
    /// I_Q(Y;R|C) of the incumbent, bits, after each iteration starting at
    /// Q = P; non-increasing.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl BrojaSolution {
    pub fn q(&self) -> &JointDist3 {
        self.q.as_ref().expect("solution carries its optimizing distribution")
    }
}

/// Problem layout shared by all solver stages.
struct Layout {
    ny: usize,
    nr: usize,
    nc: usize,
    p_yr: Vec<f64>,
    p_yc: Vec<f64>,
    /// Cells with P(y,r) > 0 and P(y,c) > 0.
    support: Vec<bool>,
}

impl Layout {
    #[inline]
    fn col_of(&self, i: usize) -> usize {
        i % (self.nr * self.nc)
    }

    fn columns(&self, q: &[f64]) -> Vec<f64> {
        let n_rc = self.nr * self.nc;
        let mut col = vec![0.0; n_rc];
        for (i, &v) in q.iter().enumerate() {
            col[i % n_rc] += v;
        }
        col
    }

    /// F(Q) = Σ Q ln Q − Σ Q(r,c) ln Q(r,c), nats.
    fn objective(&self, q: &[f64]) -> f64 {
        let cells: f64 = q.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum();
        let cols: f64 = self
            .columns(q)
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum();
        cells - cols
    }
}

pub fn pid_broja(dist: &JointDist3, opts: &BrojaOptions) -> Result<(PidComponents, BrojaSolution)> {
    let summary = dist.summary()?;
    let sol = solve(dist, opts)?;
    let comps = PidComponents::from_unique_r(Method::Broja, sol.objective, &summary);
    Ok((comps, sol))
}

fn solve(dist: &JointDist3, opts: &BrojaOptions) -> Result<BrojaSolution> {
    let [ny, nr, nc] = dist.dims();
    let p_yr = dist.marginal(Axes::YR);
    let p_yc = dist.marginal(Axes::YC);
    let mut support = vec![false; ny * nr * nc];
    for y in 0..ny {
        for r in 0..nr {
            for c in 0..nc {
                support[(y * nr + r) * nc + c] = p_yr[y * nr + r] > 0.0 && p_yc[y * nc + c] > 0.0;
            }
        }
    }
    let lay = Layout {
        ny,
        nr,
        nc,
        p_yr,
        p_yc,
        support,
    };

    let p: Vec<f64> = dist.probs().to_vec();
    let mut best = p.clone();
    let mut f_best = lay.objective(&best);
    // I_Q(Y;R|C) = F(Q)/ln 2 + H(Y,C) − H(C) on the feasible set.
    let offset = dist.entropy(Axes::YC) - dist.entropy(Axes::C);
    let mut trace = Vec::new();
    if opts.trace {
        trace.push(f_best / LN2 + offset);
    }
    let mut gap = duality_gap(&lay, &best);
    let mut iterations = 0;

    let barrier = Barrier::new(&lay);
    if barrier.dim == 0 {
        // P is the only feasible point.
        gap = 0.0;
    }
    let mut x = interior_start(&lay, &p);
    let mut mu = MU_START;

    'stages: while gap / LN2 >= opts.tol && mu >= MU_MIN {
        let mut prev = f64::INFINITY;
        let mut flat = 0;
        let mut last_t = 0.0;
        for _ in 0..MAX_CENTERING {
            if iterations >= opts.max_iter {
                break 'stages;
            }
            let Some((d, lam2)) = barrier.direction(&lay, &x, mu) else { break };
            if lam2 <= CENTERED * mu * mu {
                break;
            }
            // Full Newton steps that no longer shrink the decrement: it has
            // hit its round-off floor.
            flat = if last_t >= 1.0 && lam2 > 0.5 * prev { flat + 1 } else { 0 };
            if flat >= 3 {
                break;
            }
            prev = lam2;
            iterations += 1;
            let t = barrier.line_search(&lay, &x, &d, mu);
            last_t = t;
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi += t * di;
            }
            let f_x = lay.objective(&x);
            if f_x <= f_best {
                best.copy_from_slice(&x);
                f_best = f_x;
            }
            if opts.trace {
                trace.push(f_best / LN2 + offset);
            }
            if t == 0.0 {
                break;
            }
        }
        // The gap at x also bounds the incumbent, whose objective is no larger
        // whenever x is not accepted.
        let f_x = lay.objective(&x);
        if f_x <= f_best {
            best.copy_from_slice(&x);
            f_best = f_x;
        }
        gap = gap.min(duality_gap(&lay, &x));
        mu *= MU_SHRINK;
    }

    let best = restore_feasibility(&lay, best);
    let qd = JointDist3::from_weights([ny, nr, nc], best.clone())?;
    let objective = conditional_mi(&lay, &best);
    let sol = BrojaSolution {
        q: Some(qd),
        objective,
        iterations,
        gap: gap / LN2,
        trace,
    };
    if gap / LN2 < opts.tol {
        Ok(sol)
    } else {
        Err(Error::NonConvergence {
            iterations,
            gap: gap / LN2,
            objective,
            best: Box::new(sol),
        })
    }
}

/// A point strictly positive on every support cell: P itself when it is,
/// otherwise P blended with the pairwise maximum-entropy distribution
/// `P(y,r)P(y,c)/P(y)`, which shares its marginals.
fn interior_start(lay: &Layout, p: &[f64]) -> Vec<f64> {
    let (nr, nc) = (lay.nr, lay.nc);
    if (0..p.len()).all(|i| !lay.support[i] || p[i] > 0.0) {
        return p.to_vec();
    }
    (0..p.len())
        .map(|i| {
            if !lay.support[i] {
                return 0.0;
            }
            let y = i / (nr * nc);
            let r = (i / nc) % nr;
            let c = i % nc;
            let py: f64 = lay.p_yr[y * nr..(y + 1) * nr].iter().sum();
            let m = lay.p_yr[y * nr + r] * lay.p_yc[y * nc + c] / py;
            (1.0 - START_BLEND) * p[i] + START_BLEND * m
        })
        .collect()
}

/// Newton machinery for `F − μ Σ ln Q` on the support cells.
struct Barrier {
    vars: Vec<usize>,
    /// Position of each cell in `vars`.
    slot: Vec<usize>,
    /// Number of free directions (the cycle-space dimension).
    dim: usize,
}

impl Barrier {
    fn new(lay: &Layout) -> Self {
        let vars: Vec<usize> = (0..lay.support.len()).filter(|&i| lay.support[i]).collect();
        let mut slot = vec![usize::MAX; lay.support.len()];
        for (k, &i) in vars.iter().enumerate() {
            slot[i] = k;
        }
        let dim = (0..lay.ny)
            .map(|y| {
                let a = lay.p_yr[y * lay.nr..(y + 1) * lay.nr].iter().filter(|&&v| v > 0.0).count();
                let b = lay.p_yc[y * lay.nc..(y + 1) * lay.nc].iter().filter(|&&v| v > 0.0).count();
                a.saturating_sub(1) * b.saturating_sub(1)
            })
            .sum();
        Self { vars, slot, dim }
    }

    /// Basis of the marginal-preserving directions: one cycle per cell
    /// outside a maximum-weight spanning tree of each slice. Small cells end
    /// up off the tree, so each appears in exactly one basis vector and its
    /// large barrier curvature stays on the diagonal of the reduced system.
    fn cycle_basis(&self, lay: &Layout, x: &[f64]) -> DMatrix<f64> {
        let (nr, nc) = (lay.nr, lay.nc);
        let mut z = DMatrix::<f64>::zeros(self.vars.len(), self.dim);
        let mut next = 0;
        for y in 0..lay.ny {
            let base = y * nr * nc;
            let mut cells: Vec<usize> = (base..base + nr * nc).filter(|&i| lay.support[i]).collect();
            if cells.is_empty() {
                continue;
            }
            cells.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
            // Nodes 0..nr are rows, nr..nr+nc columns.
            let mut parent: Vec<usize> = (0..nr + nc).collect();
            fn find(p: &mut [usize], mut v: usize) -> usize {
                while p[v] != v {
                    p[v] = p[p[v]];
                    v = p[v];
                }
                v
            }
            let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nr + nc];
            let mut off_tree = Vec::new();
            for &i in &cells {
                let (r, c) = ((i - base) / nc, (i - base) % nc);
                let (a, b) = (find(&mut parent, r), find(&mut parent, nr + c));
                if a == b {
                    off_tree.push(i);
                } else {
                    parent[a] = b;
                    adj[r].push((nr + c, i));
                    adj[nr + c].push((r, i));
                }
            }
            for &i in &off_tree {
                let (r, c) = ((i - base) / nc, (i - base) % nc);
                z[(self.slot[i], next)] = 1.0;
                // Tree path from column c to row r; edges entered from a
                // column node take −1, from a row node +1.
                let start = nr + c;
                let mut via = vec![(usize::MAX, usize::MAX); nr + nc];
                via[start] = (start, usize::MAX);
                let mut stack = vec![start];
                while let Some(v) = stack.pop() {
                    if v == r {
                        break;
                    }
                    for &(w, cell) in &adj[v] {
                        if via[w].0 == usize::MAX {
                            via[w] = (v, cell);
                            stack.push(w);
                        }
                    }
                }
                let mut v = r;
                while v != start {
                    let (prev, cell) = via[v];
                    z[(self.slot[cell], next)] = if prev >= nr { -1.0 } else { 1.0 };
                    v = prev;
                }
                next += 1;
            }
        }
        debug_assert_eq!(next, self.dim);
        z
    }

    /// Newton direction (full length) and squared decrement, or `None` when
    /// no descent direction is available.
    fn direction(&self, lay: &Layout, x: &[f64], mu: f64) -> Option<(Vec<f64>, f64)> {
        if self.dim == 0 {
            return None;
        }
        let z = self.cycle_basis(lay, x);
        let col = lay.columns(x);
        let nv = self.vars.len();
        let k = self.dim;
        let mut grad = DVector::<f64>::zeros(nv);
        let mut diag = DVector::<f64>::zeros(nv);
        for (j, &i) in self.vars.iter().enumerate() {
            let v = x[i];
            grad[j] = (v / col[lay.col_of(i)]).ln() - mu / v;
            diag[j] = 1.0 / v + mu / (v * v);
        }
        // Zᵀ H Z with H = diag − Σ_columns 𝟙𝟙ᵀ / mass.
        let mut hz = z.clone();
        for j in 0..nv {
            hz.row_mut(j).scale_mut(diag[j]);
        }
        let mut h = z.transpose() * hz;
        let mut col_sum = DMatrix::<f64>::zeros(col.len(), k);
        for (j, &i) in self.vars.iter().enumerate() {
            let mut row = col_sum.row_mut(lay.col_of(i));
            row += z.row(j);
        }
        for (m, &mass) in col.iter().enumerate() {
            if mass > 0.0 {
                let s = col_sum.row(m).transpose();
                h -= (&s * s.transpose()) / mass;
            }
        }
        let rhs = -(z.transpose() * &grad);
        let w = match h.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => pinv_sym(h, &rhs, 1e-14),
        };
        let dv = &z * w;
        let slope = grad.dot(&dv);
        if !(slope < 0.0) {
            return None;
        }
        let mut d = vec![0.0; x.len()];
        for (j, &i) in self.vars.iter().enumerate() {
            d[i] = dv[j];
        }
        Some((d, -slope))
    }

    /// Exact minimization of the barrier objective along `d`, staying a
    /// fixed fraction away from the boundary. Works on the derivative, which
    /// stays resolvable long after objective differences sink into
    /// round-off.
    fn line_search(&self, lay: &Layout, x: &[f64], d: &[f64], mu: f64) -> f64 {
        let t_bound = self
            .vars
            .iter()
            .filter(|&&i| d[i] < 0.0)
            .map(|&i| -x[i] / d[i])
            .fold(f64::INFINITY, f64::min);
        let slope = |t: f64| -> f64 {
            let xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
            let col = lay.columns(&xt);
            self.vars
                .iter()
                .map(|&i| d[i] * ((xt[i] / col[lay.col_of(i)]).ln() - mu / xt[i]))
                .sum()
        };
        let mut hi = (TO_BOUNDARY * t_bound).min(1e3);
        if slope(hi) <= 0.0 {
            return hi;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Smallest correction on the positive cells, in the metric weighted by
/// `1/q`, that restores the pairwise marginals. The weighting keeps small
/// cells small.
fn restore_feasibility(lay: &Layout, mut q: Vec<f64>) -> Vec<f64> {
    let (ny, nr, nc) = (lay.ny, lay.nr, lay.nc);
    let vars: Vec<usize> = (0..q.len()).filter(|&i| q[i] > 0.0).collect();
    let n_con = ny * (nr + nc);
    let mut a = DMatrix::<f64>::zeros(n_con, vars.len());
    let mut res = DVector::<f64>::zeros(n_con);
    for y in 0..ny {
        for r in 0..nr {
            res[y * (nr + nc) + r] = -lay.p_yr[y * nr + r];
        }
        for c in 0..nc {
            res[y * (nr + nc) + nr + c] = -lay.p_yc[y * nc + c];
        }
    }
    for (k, &i) in vars.iter().enumerate() {
        let y = i / (nr * nc);
        let r = (i / nc) % nr;
        let c = i % nc;
        let w = q[i].sqrt();
        for row in [y * (nr + nc) + r, y * (nr + nc) + nr + c] {
            a[(row, k)] = w;
            res[row] += q[i];
        }
    }
    if res.amax() < 1e-15 || vars.is_empty() {
        return q;
    }
    let z = lstsq(&a, &(-res), 1e-24);
    for (k, &i) in vars.iter().enumerate() {
        q[i] = (q[i] + q[i].sqrt() * z[k]).max(0.0);
    }
    q
}

/// Minimum-norm least-squares solution of `a·x = b` through the
/// eigendecomposition of the smaller Gram matrix, discarding eigenvalues
/// below `rel` times the largest. (nalgebra's SVD loses accuracy on tall
/// rank-deficient matrices.)
fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel: f64) -> DVector<f64> {
    if a.nrows() >= a.ncols() {
        let rhs = a.transpose() * b;
        pinv_sym(a.transpose() * a, &rhs, rel)
    } else {
        a.transpose() * pinv_sym(a * a.transpose(), b, rel)
    }
}

/// `G⁺·rhs` for symmetric positive semidefinite `G`.
fn pinv_sym(g: DMatrix<f64>, rhs: &DVector<f64>, rel: f64) -> DVector<f64> {
    let eig = g.symmetric_eigen();
    let cut = rel * eig.eigenvalues.amax();
    let mut x = DVector::<f64>::zeros(rhs.len());
    for k in 0..rhs.len() {
        let lam = eig.eigenvalues[k];
        if lam > cut && lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(rhs) / lam);
        }
    }
    x
}

/// I_Q(Y;R|C) in bits.
fn conditional_mi(lay: &Layout, q: &[f64]) -> f64 {
    let d = JointDist3::from_weights([lay.ny, lay.nr, lay.nc], q.to_vec()).expect("feasible iterate");
    let h = |a| d.entropy(a);
    (h(Axes::YC) + h(Axes::RC) - h(Axes::C) - h(Axes::YRC)).max(0.0)
}

/// Frank–Wolfe duality gap in nats; infinite when `F` is not differentiable
/// at `q` (a support cell is empty).
fn duality_gap(lay: &Layout, q: &[f64]) -> f64 {
    let (ny, nr, nc) = (lay.ny, lay.nr, lay.nc);
    let col = lay.columns(q);
    let mut cost = vec![0.0; q.len()];
    for i in 0..q.len() {
        if lay.support[i] {
            if q[i] <= 0.0 {
                return f64::INFINITY;
            }
            cost[i] = (q[i] / col[lay.col_of(i)]).ln();
        }
    }
    let mut gap = 0.0;
    for y in 0..ny {
        let cells = y * nr * nc..(y + 1) * nr * nc;
        let s = transport_vertex(&lay.p_yr[y * nr..(y + 1) * nr], &lay.p_yc[y * nc..(y + 1) * nc], &cost[cells.clone()]);
        gap += cells.zip(s).map(|(i, si)| cost[i] * (q[i] - si)).sum::<f64>();
    }
    gap.max(0.0)
}
