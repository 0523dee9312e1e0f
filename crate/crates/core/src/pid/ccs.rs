use serde::{Deserialize, Serialize};

use crate::dist::{Axes, JointDist3, ZERO_MASS};
use crate::error::Result;

use super::{maxent_pairwise, Method, PidComponents};

/// Local terms with magnitude below this count as zero in the sign test.
const SIGN_EPS: f64 = 1e-12;

/// Distribution on which the pointwise terms are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcsVariant {
    /// The observed joint distribution itself.
    #[default]
    ObservedJoint,
    /// The maximum-entropy distribution with the observed (Y,R) and (Y,C)
    /// marginals.
    PairwiseMaxent,
}

fn sign(x: f64) -> i8 {
    if x > SIGN_EPS {
        1
    } else if x < -SIGN_EPS {
        -1
    } else {
        0
    }
}

/// Common-change-in-surprisal decomposition. Shared information is the
/// expected local co-information over states where both single-source local
/// informations, the joint local information and the co-information all
/// carry the same strict sign. Unique components may come out negative.
pub fn pid_ccs(dist: &JointDist3, variant: CcsVariant) -> Result<PidComponents> {
    let summary = dist.summary()?;
    let owned;
    let q = match variant {
        CcsVariant::ObservedJoint => dist,
        CcsVariant::PairwiseMaxent => {
            owned = maxent_pairwise(dist);
            &owned
        }
    };
    let [ny, nr, nc] = q.dims();
    let q_y = q.marginal(Axes::Y);
    let q_r = q.marginal(Axes::R);
    let q_c = q.marginal(Axes::C);
    let q_yr = q.marginal(Axes::YR);
    let q_yc = q.marginal(Axes::YC);
    let q_rc = q.marginal(Axes::RC);

    let mut shd = 0.0;
    for y in 0..ny {
        for r in 0..nr {
            for c in 0..nc {
                let p = q.get(y, r, c);
                if p < ZERO_MASS {
                    continue;
                }
                let i_r = (q_yr[y * nr + r] / (q_y[y] * q_r[r])).log2();
                let i_c = (q_yc[y * nc + c] / (q_y[y] * q_c[c])).log2();
                let i_rc = (p / (q_y[y] * q_rc[r * nc + c])).log2();
                let coi = i_r + i_c - i_rc;
                let s = sign(coi);
                if s != 0 && sign(i_r) == s && sign(i_c) == s && sign(i_rc) == s {
                    shd += p * coi;
                }
            }
        }
    }
    Ok(PidComponents::from_shared(Method::Ccs, shd, &summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::gates;

    #[test]
    fn and_observed_joint() {
        let c = pid_ccs(&gates::and(), CcsVariant::ObservedJoint).unwrap();
        let expected = (4.0f64 / 3.0).log2() / 4.0;
        assert!((c.shd - expected).abs() < 1e-12);
        assert!((c.shd - 0.10375).abs() < 1e-5);
        assert!((c.unq_r - (0.311278 - 0.10375)).abs() < 1e-5);
    }

    #[test]
    fn rdn_and_xor() {
        for v in [CcsVariant::ObservedJoint, CcsVariant::PairwiseMaxent] {
            let c = pid_ccs(&gates::rdn(), v).unwrap();
            assert!((c.shd - 1.0).abs() < 1e-12, "{v:?}");
            assert!(c.unq_r.abs() < 1e-12 && c.unq_c.abs() < 1e-12 && c.syn.abs() < 1e-12);
            let c = pid_ccs(&gates::xor(), v).unwrap();
            assert!(c.shd.abs() < 1e-12 && (c.syn - 1.0).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn negative_unique_preserved() {
        // Y = R = C on two states mixed with XOR-like noise drives the
        // pointwise co-information above the single-source MI.
        let d = JointDist3::from_fn([2, 2, 2], |y, r, c| {
            let rdn = if y == r && r == c { 0.4 } else { 0.0 };
            let x = if y == (r ^ c) { 0.05 } else { 0.0 };
            rdn + x
        })
        .unwrap();
        let c = pid_ccs(&d, CcsVariant::ObservedJoint).unwrap();
        let s = d.summary().unwrap();
        assert!(c.consistency_error(&s) < 1e-12);
        assert!(c.unq_r < -1e-3 && c.unq_c < -1e-3, "{c:?}");
        assert!((c.unq_r - c.unq_c).abs() < 1e-12);
    }
}
