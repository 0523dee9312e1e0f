mod common;

use common::*;
use modpid::dist::{entropy_of, gates};
use modpid::pid::{pid_broja, pid_ccs, pid_imin, BrojaOptions, CcsVariant};
use modpid::{Axes, JointDist3};

/// `-Σ p log2 p` with the terms accumulated exactly in 128-bit fixed point
/// and rounded once.
fn direct_entropy(p: &[f64]) -> f64 {
    const SCALE: f64 = (1u128 << 110) as f64;
    let mut acc: i128 = 0;
    for &x in p.iter().filter(|&&x| x >= 1e-15) {
        let scaled = -x * x.log2() * SCALE;
        let k = scaled as i128;
        assert_eq!(k as f64, scaled, "term not representable in fixed point");
        acc += k;
    }
    (acc as f64 / SCALE).max(0.0)
}

#[test]
fn joint_entropy_matches_direct_sum_on_probability_grid() {
    // Every 2×2×2 table with masses k/4, k summing to 4.
    let mut tables = Vec::new();
    let mut cells = [0usize; 8];
    fn rec(i: usize, left: usize, cells: &mut [usize; 8], out: &mut Vec<[usize; 8]>) {
        if i == 7 {
            cells[7] = left;
            out.push(*cells);
            return;
        }
        for k in 0..=left {
            cells[i] = k;
            rec(i + 1, left - k, cells, out);
        }
    }
    rec(0, 4, &mut cells, &mut tables);
    assert_eq!(tables.len(), 330);
    for t in tables {
        let d = JointDist3::from_weights([2, 2, 2], t.iter().map(|&k| k as f64).collect()).unwrap();
        let direct = direct_entropy(d.probs());
        assert_eq!(d.entropy(Axes::YRC).to_bits(), direct.to_bits(), "{t:?}");
        assert_eq!(entropy_of(d.probs()).to_bits(), direct.to_bits());
    }
}

#[test]
fn entropy_is_exact_on_random_tables() {
    let mut g = rng(10);
    for i in 0..500 {
        let d = random_dist(&mut g, [2, 2 + i % 7, 2 + i % 5], 0.3);
        assert_eq!(entropy_of(d.probs()).to_bits(), direct_entropy(d.probs()).to_bits());
        let mut shuffled = d.probs().to_vec();
        shuffled.reverse();
        assert_eq!(entropy_of(&shuffled).to_bits(), entropy_of(d.probs()).to_bits());
    }
}

#[test]
fn shannon_summary_matches_reference() {
    let mut g = rng(11);
    for i in 0..300 {
        let dims = [2, 2 + i % 5, 2 + i % 3];
        let d = random_dist(&mut g, dims, 0.25);
        let s = d.summary().unwrap();
        let [iyr, iyc, iyr_c, iyc_r, iyrc, hy] = shannon(&table(&d));
        for (a, b) in [
            (s.i_yr, iyr),
            (s.i_yc, iyc),
            (s.i_yr_given_c, iyr_c),
            (s.i_yc_given_r, iyc_r),
            (s.i_yrc, iyrc),
            (s.hy, hy),
        ] {
            assert!((a - b.max(0.0)).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn imin_matches_reference() {
    let mut g = rng(12);
    for i in 0..300 {
        let d = random_dist(&mut g, [2 + i % 2, 2 + i % 4, 2 + i % 3], 0.2);
        let got = pid_imin(&d).unwrap().shd;
        assert!((got - imin_shared(&table(&d))).abs() < 1e-12);
    }
}

#[test]
fn ccs_matches_reference() {
    let mut g = rng(13);
    for i in 0..300 {
        let d = random_dist(&mut g, [2, 2 + i % 5, 2 + i % 5], 0.2);
        let got = pid_ccs(&d, CcsVariant::ObservedJoint).unwrap().shd;
        assert!((got - ccs_shared(&table(&d))).abs() < 1e-12);
    }
    let and = table(&gates::and());
    assert!((ccs_shared(&and) - (2.0 - 3f64.log2()) / 4.0).abs() < 1e-15);
}

#[test]
fn broja_matches_grid_search() {
    let mut g = rng(14);
    for i in 0..10 {
        let d = random_dist(&mut g, [2, 2, 2], if i % 3 == 0 { 0.2 } else { 0.0 });
        let (coarse, fine) = brute_unique_r_refined(&table(&d), 1e-3);
        let (c, _) = pid_broja(&d, &BrojaOptions::default()).unwrap();
        assert!((c.unq_r - fine).abs() < 1e-6, "case {i}: {} vs {fine}", c.unq_r);
        assert!(c.unq_r <= coarse + 1e-9);
    }
}

#[test]
fn broja_gate_values_match_grid_search() {
    for (name, d) in [("and", gates::and()), ("xor", gates::xor()), ("unq", gates::unq())] {
        let oracle = brute_unique_r(&table(&d), 1e-3);
        let (c, _) = pid_broja(&d, &BrojaOptions::default()).unwrap();
        assert!((c.unq_r - oracle).abs() < 1e-6, "{name}");
    }
}
