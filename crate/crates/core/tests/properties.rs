use proptest::prelude::*;

use modpid::binning::{build_joint, sbg_edges, BinEdges, BinStrategy};
use modpid::experiment::CellConfig;
use modpid::golden::gate_goldens;
use modpid::models::{mixture_spec, sample_bgm, Model, SampleBatch};
use modpid::pid::{decompose, pid_broja, BrojaOptions, Method};
use modpid::transfer::{eval_transfer, output_prob, TransferKind, TransferTag};
use modpid::JointDist3;

/// Weights on a random shape, with about a fifth of the cells empty.
fn dist_strategy(max_r: usize, max_c: usize) -> impl Strategy<Value = JointDist3> {
    (2..=3usize, 2..=max_r, 2..=max_c)
        .prop_flat_map(|(ny, nr, nc)| {
            (
                Just([ny, nr, nc]),
                prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 1e-6..1.0f64], ny * nr * nc),
            )
        })
        .prop_filter_map("needs positive mass", |(dims, w)| JointDist3::from_weights(dims, w).ok())
}

fn small_dist() -> impl Strategy<Value = JointDist3> {
    dist_strategy(4, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chain_rule(d in small_dist()) {
        let s = d.summary().unwrap();
        prop_assert!((s.i_yrc - (s.i_yr + s.i_yc_given_r)).abs() < 1e-12);
        prop_assert!((s.i_yrc - (s.i_yc + s.i_yr_given_c)).abs() < 1e-12);
        for v in [s.hy, s.hres, s.i_yrc, s.i_yr, s.i_yc, s.i_yr_given_c, s.i_yc_given_r] {
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn swapping_sources_swaps_the_summary(d in small_dist()) {
        let (a, b) = (d.summary().unwrap(), d.swap_sources().summary().unwrap());
        prop_assert_eq!(a.i_yr, b.i_yc);
        prop_assert_eq!(a.i_yc, b.i_yr);
        prop_assert_eq!(a.i_yr_given_c, b.i_yc_given_r);
        prop_assert_eq!(a.i_yc_given_r, b.i_yr_given_c);
    }

    #[test]
    fn decompositions_satisfy_identities(d in small_dist()) {
        let s = d.summary().unwrap();
        for m in Method::IMPLEMENTED {
            let c = decompose(&d, m).unwrap();
            prop_assert!(c.consistency_error(&s) < 1e-9, "{m}: {c:?}");
            prop_assert!((c.total() + s.hres - s.hy).abs() < 1e-9);
            if m.is_nonnegative() {
                for v in [c.unq_r, c.unq_c, c.shd, c.syn] {
                    prop_assert!(v >= -1e-9, "{m}: {c:?}");
                }
            }
        }
    }

    #[test]
    fn swapping_sources_swaps_unique_terms(d in small_dist()) {
        let e = d.swap_sources();
        for m in Method::IMPLEMENTED {
            let (a, b) = (decompose(&d, m).unwrap(), decompose(&e, m).unwrap());
            prop_assert!((a.unq_r - b.unq_c).abs() < 1e-8, "{m}");
            prop_assert!((a.unq_c - b.unq_r).abs() < 1e-8, "{m}");
            prop_assert!((a.shd - b.shd).abs()< 1e-8, "{m}");
            prop_assert!((a.syn - b.syn).abs() < 1e-8, "{m}");
        }
    }

    #[test]
    fn broja_never_worse_than_start(d in dist_strategy(6, 6)) {
        let opts = BrojaOptions { trace: true, ..BrojaOptions::default() };
        let (c, sol) = pid_broja(&d, &opts).unwrap();
        let start = d.summary().unwrap().i_yr_given_c;
        prop_assert!(c.unq_r <= start + 1e-12);
        prop_assert!(sol.trace.windows(2).all(|w| w[1] <= w[0]), "{:?}", sol.trace);
        prop_assert!(sol.gap <= 1e-9);
    }

    #[test]
    fn m1_passes_drive_through_without_context(r in -50.0..50.0f64) {
        let t = eval_transfer(TransferKind::new(TransferTag::M1), r, 0.0);
        prop_assert!((t - r).abs() <= 1e-15 * r.abs().max(1.0));
    }

    #[test]
    fn m3_modulation_is_bounded(r in -100.0..100.0f64, c in -100.0..100.0f64) {
        prop_assert!(TransferTag::M3.raw(r, c).abs() <= 2.0 * r.abs());
    }

    #[test]
    fn arithmetic_symmetries(r in -100.0..100.0f64, c in -100.0..100.0f64) {
        prop_assert_eq!(TransferTag::A.raw(r, c), TransferTag::A.raw(c, r));
        prop_assert_eq!(TransferTag::S.raw(r, c), r - c);
        prop_assert_eq!(TransferTag::P.raw(r, c), TransferTag::P.raw(c, r));
    }

    #[test]
    fn transfer_output_is_clamped(tag in prop::sample::select(TransferTag::ALL.to_vec()),
                                  r in -1e3..1e3f64, c in -1e3..1e3f64, b in -10.0..10.0f64) {
        let t = eval_transfer(TransferKind::with_bias(tag, b), r, c);
        prop_assert!(t.is_finite() && t.abs() <= 500.0);
    }

    #[test]
    fn logistic_is_monotone_and_symmetric(a in -60.0..60.0f64, b in -60.0..60.0f64) {
        let (pa, pb) = (output_prob(a), output_prob(b));
        if a < b {
            prop_assert!(pa <= pb);
        }
        prop_assert!((output_prob(-a) - (1.0 - pa)).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&pa));
        if a.abs() < 30.0 {
            prop_assert!(pa > 0.0 && pa < 1.0);
        }
    }

    #[test]
    fn joint_array_ignores_sample_order(seed in any::<u64>(), shift in 1usize..500) {
        let spec = mixture_spec(0.5, 0.3, 1.0, 1.0).unwrap();
        let mut batch = sample_bgm(&spec, 1000, seed);
        batch.y = Some((0..1000).map(|i| if (i * 7 + 3) % 5 < 2 { 1 } else { -1 }).collect());
        let e_r = sbg_edges(&batch.r, 4).unwrap();
        let e_c = sbg_edges(&batch.c, 4).unwrap();
        let a = build_joint(&batch, &e_r, &e_c).unwrap();
        let rot = |v: &Vec<f64>| { let mut w = v.clone(); w.rotate_left(shift); w };
        let mut y = batch.y.clone().unwrap();
        y.rotate_left(shift);
        let moved = SampleBatch { r: rot(&batch.r), c: rot(&batch.c), y: Some(y), seed };
        let b = build_joint(&moved, &e_r, &e_c).unwrap();
        prop_assert_eq!(a.probs(), b.probs());
    }

    #[test]
    fn quantile_bins_are_balanced(v in prop::collection::vec(-1e3..1e3f64, 12..400), bins in 2usize..9) {
        if let Ok(e) = sbg_edges(&v, bins) {
            let counts = e.counts(&v);
            let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "{counts:?}");
            prop_assert_eq!(counts.iter().sum::<usize>(), v.len());
        }
    }

    #[test]
    fn values_land_in_their_interval(b in prop::collection::btree_set(-100i32..100, 1..8), v in -200.0..200.0f64) {
        let e = BinEdges { strategy: BinStrategy::Sextile, boundaries: b.iter().map(|&x| f64::from(x)).collect() };
        let k = e.bin_of(v);
        if k > 0 { prop_assert!(e.boundaries[k - 1] <= v); }
        if k < e.boundaries.len() { prop_assert!(v < e.boundaries[k]); }
    }

    #[test]
    fn cell_seed_depends_on_coordinates_only(seed in any::<u64>(), n in 1000usize..2_000_000, bins in 2usize..9) {
        let mut a = CellConfig::new(Model::Bgm, TransferTag::M1, 4, 0.8);
        a.seed = seed;
        let mut b = a.clone();
        b.n = n;
        b.bins = bins;
        b.methods = vec![Method::Imin];
        prop_assert_eq!(a.cell_seed(), b.cell_seed());
        b.scenario = 3;
        prop_assert_ne!(a.cell_seed(), b.cell_seed());
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let spec = mixture_spec(0.8, 0.3, 1.0, 5.0).unwrap();
        let a = sample_bgm(&spec, 3000, seed);
        prop_assert_eq!(&a.r, &sample_bgm(&spec, 3000, seed).r);
        prop_assert_ne!(&a.r, &sample_bgm(&spec, 3000, seed ^ 1).r);
    }
}

#[test]
fn golden_entries_are_consistent_and_nonnegative() {
    let g = gate_goldens();
    for e in &g.entries {
        if e.method.is_nonnegative() {
            assert!(e.components().iter().all(|&v| v >= -1e-9), "{e:?}");
        }
    }
    assert!(g.verify().checks.iter().all(|c| c.golden_consistency.unwrap() < 1e-12));
}
