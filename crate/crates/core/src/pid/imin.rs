use crate::dist::{Axes, JointDist3, ZERO_MASS};
use crate::error::Result;

use super::{Method, PidComponents};

/// Specific information `I(Y=y; X) = Σ_x p(x|y) log2(p(y|x)/p(y))` of one
/// source about each output state, where `x` ranges over R (`Axes::R`) or
/// C (`Axes::C`).
pub fn specific_information(dist: &JointDist3, source: Axes) -> Vec<f64> {
    assert!(
        source == Axes::R || source == Axes::C,
        "specific information is defined for a single source axis"
    );
    let p_y = dist.marginal(Axes::Y);
    let p_x = dist.marginal(source);
    let p_yx = dist.marginal(Axes::Y | source);
    let nx = p_x.len();
    (0..dist.ny())
        .map(|y| {
            if p_y[y] < ZERO_MASS {
                return 0.0;
            }
            (0..nx)
                .filter(|&x| p_yx[y * nx + x] >= ZERO_MASS)
                .map(|x| {
                    let joint = p_yx[y * nx + x];
                    (joint / p_y[y]) * (joint / (p_x[x] * p_y[y])).log2()
                })
                .sum()
        })
        .collect()
}

/// Williams–Beer decomposition: shared information is the expected minimum
/// specific information over the two sources.
pub fn pid_imin(dist: &JointDist3) -> Result<PidComponents> {
    let summary = dist.summary()?;
    let p_y = dist.marginal(Axes::Y);
    let spec_r = specific_information(dist, Axes::R);
    let spec_c = specific_information(dist, Axes::C);
    let shd: f64 = p_y
        .iter()
        .zip(spec_r.iter().zip(&spec_c))
        .map(|(&py, (&ir, &ic))| py * ir.min(ic))
        .sum();
    Ok(PidComponents::from_shared(Method::Imin, shd, &summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::gates;

    fn assert_atoms(c: &PidComponents, expected: [f64; 4], tol: f64) {
        let got = [c.unq_r, c.unq_c, c.shd, c.syn];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < tol, "got {got:?}, expected {expected:?}");
        }
    }

    #[test]
    fn and_gate() {
        // Specific informations: y=0 → log2(4/3)·... = 0.08170, y=1 → 1 bit.
        let spec = specific_information(&gates::and(), Axes::R);
        assert!((spec[0] - 0.081704).abs() < 1e-6);
        assert!((spec[1] - 1.0).abs() < 1e-12);
        assert_atoms(&pid_imin(&gates::and()).unwrap(), [0.0, 0.0, 0.311278, 0.5], 1e-6);
    }

    #[test]
    fn xor_and_rdn() {
        assert_atoms(&pid_imin(&gates::xor()).unwrap(), [0.0, 0.0, 0.0, 1.0], 1e-12);
        assert_atoms(&pid_imin(&gates::rdn()).unwrap(), [0.0, 0.0, 1.0, 0.0], 1e-12);
        assert_atoms(&pid_imin(&gates::unq()).unwrap(), [1.0, 0.0, 0.0, 0.0], 1e-12);
    }

    #[test]
    fn specific_information_averages_to_mi() {
        let d = JointDist3::from_fn([2, 3, 2], |y, r, c| (1 + y * 3 + r * r + 2 * c) as f64).unwrap();
        let s = d.summary().unwrap();
        let p_y = d.marginal(Axes::Y);
        let avg: f64 = specific_information(&d, Axes::R)
            .iter()
            .zip(&p_y)
            .map(|(i, p)| i * p)
            .sum();
        assert!((avg - s.i_yr).abs() < 1e-12);
    }
}
