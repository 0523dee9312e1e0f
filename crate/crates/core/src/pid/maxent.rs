use crate::dist::{Axes, JointDist3};

/// Maximum-entropy distribution with the (Y,R) and (Y,C) marginals of
/// `dist`: `Q(y,r,c) = P(y,r) P(c|y)`.
pub fn maxent_pairwise(dist: &JointDist3) -> JointDist3 {
    let [ny, nr, nc] = dist.dims();
    let p_y = dist.marginal(Axes::Y);
    let p_yr = dist.marginal(Axes::YR);
    let p_yc = dist.marginal(Axes::YC);
    JointDist3::from_fn([ny, nr, nc], |y, r, c| {
        if p_y[y] > 0.0 {
            p_yr[y * nr + r] * p_yc[y * nc + c] / p_y[y]
        } else {
            0.0
        }
    })
    .expect("marginals of a valid distribution carry positive mass")
}

/// Same distribution as [`maxent_pairwise`], reached by iterative
/// proportional fitting from the uniform array: alternately rescale to the
/// (Y,R) and (Y,C) marginals until no cell moves by more than `tol`.
///
/// Returns the fitted distribution and the number of sweeps.
pub fn maxent_pairwise_ipf(dist: &JointDist3, tol: f64, max_sweeps: usize) -> (JointDist3, usize) {
    let [ny, nr, nc] = dist.dims();
    let target_yr = dist.marginal(Axes::YR);
    let target_yc = dist.marginal(Axes::YC);
    let n = ny * nr * nc;
    let mut q = vec![1.0 / n as f64; n];
    let idx = |y: usize, r: usize, c: usize| (y * nr + r) * nc + c;

    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let before = q.clone();
        for y in 0..ny {
            for r in 0..nr {
                let cur: f64 = (0..nc).map(|c| q[idx(y, r, c)]).sum();
                let k = if cur > 0.0 { target_yr[y * nr + r] / cur } else { 0.0 };
                for c in 0..nc {
                    q[idx(y, r, c)] *= k;
                }
            }
        }
        for y in 0..ny {
            for c in 0..nc {
                let cur: f64 = (0..nr).map(|r| q[idx(y, r, c)]).sum();
                let k = if cur > 0.0 { target_yc[y * nc + c] / cur } else { 0.0 };
                for r in 0..nr {
                    q[idx(y, r, c)] *= k;
                }
            }
        }
        let moved = q
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if moved <= tol {
            break;
        }
    }
    let fitted = JointDist3::from_weights([ny, nr, nc], q).expect("IPF preserves total mass");
    (fitted, sweeps)
}
