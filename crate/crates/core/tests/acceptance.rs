//! Acceptance gate: one test per shipped guarantee. Each test prints a single
//! `ACCEPTANCE k (...): PASS/FAIL` verdict line with the measured numbers, and
//! freezes deterministic measurements as regression ground truth.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use qgcmac::bounds::{
    gp_outer_max, mix_noise, solve_pair_weights, solve_triple_weights, verify_decompositions,
    verify_ptp_table, MixtureCase, OuterSearchConfig, PtpVerifyConfig, ADJACENT_ANCHORS, GAP_TOL,
    SPACED_ANCHORS, TRIPLE_ANCHORS,
};
use qgcmac::channels::{builtin_example1, ChannelSpec};
use qgcmac::modrings::{circular_convolve, mat_apply, vec_add, vec_sub, RingSpec, RingVector};
use qgcmac::probinfo::{JointPmf, Pmf, UQPair};
use qgcmac::qgcsim::{
    bin_of, build_nested_qgc, example1_target1, example1_target2, run_example1, Example1Row,
    LChoice, SimConfig,
};
use qgcmac::regions::{
    builtin_assignment, combined_rates, covering_threshold, gp_rates, packing_threshold,
    qgc_sum_rate, search_gp_region, Assignment, CombinedAssignment, CondLaw, QgcAssignment,
    SearchConfig,
};

fn z4() -> RingSpec {
    RingSpec::new(2, 2).unwrap()
}

fn verdict(k: u32, topic: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {k} ({topic}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn random_pmf(rng: &mut ChaCha8Rng, m: usize) -> Pmf {
    let mut w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    Pmf::new(w).unwrap()
}

fn lemma4_assignment(ch: &ChannelSpec) -> QgcAssignment {
    match builtin_assignment("lemma4", ch).unwrap() {
        Assignment::Qgc(a) => a,
        _ => unreachable!("reference assignment is quasi-group-coded"),
    }
}

/// The stated per-row gap bounds, in table order.
const STATED_BOUNDS: [f64; 8] = [1.0, 0.1, 0.1, 0.5, 0.5, 0.32, 0.32, 0.32];

/// Achieved maxima at resolution 100 with 3 refinement rounds, frozen as
/// regression ground truth. Rows 4-5 land above their stated 0.5 bound.
const MEASURED_MAXIMA: [f64; 8] = [
    1.0,
    8.17041659455e-2,
    8.17041659455e-2,
    5.44532108311e-1,
    5.44532108311e-1,
    9.59527661996e-2,
    1.88721875541e-1,
    9.59527661996e-2,
];

#[test]
fn acceptance_1_entropy_gap_table() {
    let t0 = Instant::now();
    let rep = verify_ptp_table(&PtpVerifyConfig::default()).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();

    assert_eq!(rep.rows.len(), 8);
    for ((row, &bound), &measured) in rep.rows.iter().zip(&STATED_BOUNDS).zip(&MEASURED_MAXIMA) {
        assert_eq!(row.bound, bound);
        assert!(
            (row.max_gap - measured).abs() <= 1e-9,
            "{}: max {} drifted from {measured}",
            row.label,
            row.max_gap
        );
        println!(
            "  {:<18} bound {:<5} max {:.11e}  rule {:?} state {:?}",
            row.label, row.bound, row.max_gap, row.argmax_rule, row.argmax_state
        );
    }

    // Six of the stated inequalities hold; the two adjacent-support rows are
    // refuted by an explicit interior witness, so the table as stated fails.
    let within: Vec<bool> = rep.rows.iter().map(|r| r.within_bound).collect();
    assert_eq!(within, [true, true, true, false, false, true, true, true]);
    assert!(!rep.all_within);
    for i in [3usize, 4] {
        assert!(rep.rows[i].max_gap > rep.rows[i].bound + GAP_TOL);
        assert!(rep.rows[i].max_gap <= 0.55, "row {i}: {}", rep.rows[i].max_gap);
    }
    assert!(elapsed <= 300.0, "table sweep took {elapsed:.1}s");

    verdict(
        1,
        "entropy-gap table",
        false,
        &format!(
            "rows 4-5 exceed their stated 0.5 bound: max {:.9} at state {:?} \
             (> 0.5 + {GAP_TOL:.0e}); the other six bounds hold; maxima frozen \
             for regression; {} evaluations in {elapsed:.1}s",
            rep.rows[3].max_gap, rep.rows[3].argmax_state, rep.total_evaluations
        ),
    );
}

#[test]
fn acceptance_2_binning_outer_bound_search() {
    let t0 = Instant::now();
    let ch = builtin_example1();
    let rep = gp_outer_max(&ch, &OuterSearchConfig::default()).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();

    let candidates = rep.grid_evaluations + rep.stochastic_evaluations + rep.ascent_evaluations;
    assert!(candidates >= 100_000, "only {candidates} candidates");
    assert!(rep.stochastic_evaluations >= 100_000);
    assert!(rep.overall_max <= rep.reference_bound + rep.tolerance);
    assert!(rep.within_bound);
    // Frozen from the first full run; the search is seeded, so drift means a
    // behavioral change.
    assert!(
        (rep.overall_max - 2.71440921350e-1).abs() <= 1e-9,
        "overall max {} drifted",
        rep.overall_max
    );
    assert!(elapsed <= 600.0, "outer search took {elapsed:.1}s");

    verdict(
        2,
        "binning outer bound",
        true,
        &format!(
            "max relaxed sum-rate objective {:.11e} <= 0.32 + 1e-3 over {candidates} \
             candidates (grid {}, stochastic {}, ascent {}) in {elapsed:.1}s",
            rep.overall_max, rep.grid_evaluations, rep.stochastic_evaluations,
            rep.ascent_evaluations
        ),
    );
}

/// H(V1+V2 | Y) recomputed through the channel route: sample-free joint over
/// (s1, v1, s2, v2), inputs x_i = v_i - s_i, output y = x1 + s1 + x2 + s2.
fn vsum_given_y_direct(ch: &ChannelSpec, a: &QgcAssignment) -> f64 {
    let p1 = ch.state1_marginal();
    let p2 = ch.state2_marginal();
    let mut w = vec![0.0; 256];
    for s1 in 0..4 {
        for v1 in 0..4 {
            for s2 in 0..4 {
                for v2 in 0..4 {
                    w[((s1 * 4 + v1) * 4 + s2) * 4 + v2] = p1.get(s1)
                        * a.v_law(0, 0, s1).get(v1)
                        * p2.get(s2)
                        * a.v_law(1, 0, s2).get(v2);
                }
            }
        }
    }
    let j = JointPmf::new(&[("s1", 4), ("v1", 4), ("s2", 4), ("v2", 4)], w).unwrap();
    let j = j
        .with_derived_axis("y", &["s1", "v1", "s2", "v2"], 4, |ix| {
            let x1 = (ix[1] + 4 - ix[0]) % 4;
            let x2 = (ix[3] + 4 - ix[2]) % 4;
            (x1 + ix[0] + x2 + ix[2]) % 4
        })
        .unwrap();
    let j = j
        .with_derived_axis("vsum", &["v1", "v2"], 4, |ix| (ix[0] + ix[1]) % 4)
        .unwrap();
    j.conditional_entropy(&["vsum"], &["y"]).unwrap()
}

#[test]
fn acceptance_3_reference_assignment_values() {
    let ch = builtin_example1();
    let a = lemma4_assignment(&ch);
    let rep = qgc_sum_rate(&ch, &a).unwrap();

    // Bin-layer sum entropy, from the report and recomputed from the laws.
    assert_eq!(a.q_law().len(), 1);
    let wsum = circular_convolve(a.w_law(0, 0), a.w_law(1, 0)).unwrap().entropy();
    assert!((rep.simplified.h_wsum_given_q - 1.5).abs() <= 1e-9);
    assert!((wsum - 1.5).abs() <= 1e-9, "direct wsum entropy {wsum}");

    // Covering-layer conditional entropies, one bit per encoder.
    let mut h_v_given_s = [0.0f64; 2];
    for (enc, states) in [(0usize, ch.state1_marginal()), (1, ch.state2_marginal())] {
        for s in 0..4 {
            h_v_given_s[enc] += states.get(s) * a.v_law(enc, 0, s).entropy();
        }
        assert!((h_v_given_s[enc] - 1.0).abs() <= 1e-9, "encoder {enc}: {h_v_given_s:?}");
    }

    // The covering-layer sum is a function of the output.
    let direct_residual = vsum_given_y_direct(&ch, &a);
    assert!(rep.h_vsum_given_yq.abs() <= 1e-9);
    assert!(direct_residual.abs() <= 1e-9, "direct H(V1+V2|Y) {direct_residual}");

    // Closed-form simplified sum rate reaches one bit.
    let simplified = rep.simplified.value.unwrap();
    assert!((simplified - 1.0).abs() <= 1e-9, "simplified {simplified}");

    // The general levelled formula is computed and logged, not pinned to the
    // simplified value; its measured value is frozen for regression only.
    assert!(rep.value.is_finite());
    assert!((rep.value - 0.5).abs() <= 1e-9, "general value {}", rep.value);

    verdict(
        3,
        "reference assignment",
        true,
        &format!(
            "H(W1+W2|Q) = {wsum:.9}, H(V|S) = {:.9}/{:.9}, H(V1+V2|Y) = {direct_residual:.2e}, \
             simplified sum rate {simplified:.9}; general levelled value {:.9} computed and \
             logged (differs from the simplified form, see README)",
            h_v_given_s[0], h_v_given_s[1], rep.value
        ),
    );
}

#[test]
fn acceptance_4_degenerate_combined_matches_binning() {
    let ch = builtin_example1();
    let ring = z4();
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let shapes = [(1usize, [2usize, 2]), (2, [2, 2]), (2, [3, 2]), (3, [2, 4])];

    let (mut max_gamma, mut max_gap) = (0.0f64, 0.0f64);
    for round in 0..1000 {
        let (q_size, u_sizes) = shapes[round % shapes.len()];
        let a = CombinedAssignment::random_degenerate(&ch, ring, q_size, u_sizes, &mut rng)
            .unwrap();
        let comb = combined_rates(&ch, &a).unwrap();
        let gp = gp_rates(&ch, &a.to_gp(&ch).unwrap()).unwrap();

        max_gamma = max_gamma.max(comb.gamma.value.abs());
        assert!(comb.gamma.value.abs() <= 1e-9, "round {round}: gamma {}", comb.gamma.value);
        for (c, g) in [
            (comb.r1_bound, gp.r1_bound),
            (comb.r2_bound, gp.r2_bound),
            (comb.sum_bound, gp.sum_bound),
        ] {
            max_gap = max_gap.max((c - g).abs());
            assert!((c - g).abs() <= 1e-9, "round {round}: {c} vs {g}");
        }
    }

    verdict(
        4,
        "degenerate combined region",
        true,
        &format!(
            "1000 random constant-V/uniform-W assignments: max |Gamma| {max_gamma:.2e}, \
             max bound deviation {max_gap:.2e} (both <= 1e-9)"
        ),
    );
}

#[test]
fn acceptance_5_threshold_simplifications() {
    let ring = z4();
    let two_letter = UQPair::single(Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap());

    // Additive oracle: uniform input, noise (1/2, 1/4, 1/4, 0), so
    // H(X|Y) = H(noise) = 1.5 and the packing rate must be exactly 0.5.
    let noise = [0.5, 0.25, 0.25, 0.0];
    let rows: Vec<Pmf> = (0..4usize)
        .map(|x| {
            let mut p = vec![0.0; 4];
            for (n, &pn) in noise.iter().enumerate() {
                p[(x + n) % 4] += pn;
            }
            Pmf::new(p).unwrap()
        })
        .collect();
    let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
    let rep = packing_threshold(&two_letter, &law, &ring).unwrap();
    let h_x_given_y = law
        .joint("x", "y")
        .unwrap()
        .conditional_entropy(&["x"], &["y"])
        .unwrap();
    assert!((rep.value - (2.0 - h_x_given_y)).abs() <= 1e-12);
    assert!((rep.value - 0.5).abs() <= 1e-12, "packing {}", rep.value);
    assert_eq!(rep.binding_t, Some(0));
    assert!(rep.terms[1].degenerate && rep.terms[1].value.is_none());

    // The two-letter code variable kills the t = 1 term for every channel, so
    // the packing rate collapses to r log2(p) - H(X|Y) identically.
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let given = random_pmf(&mut rng, 4);
        let rows: Vec<Pmf> = (0..4).map(|_| random_pmf(&mut rng, 4)).collect();
        let law = CondLaw::new(given, rows).unwrap();
        let rep = packing_threshold(&two_letter, &law, &ring).unwrap();
        let h = law
            .joint("x", "y")
            .unwrap()
            .conditional_entropy(&["x"], &["y"])
            .unwrap();
        worst = worst.max((rep.value - (2.0 - h)).abs());
    }
    assert!(worst <= 1e-12, "worst packing deviation {worst:.3e}");

    // Covering thresholds of the per-encoder target laws sit at one bit.
    let c1 = covering_threshold(&two_letter, &example1_target1(), &ring).unwrap();
    let c2 = covering_threshold(&two_letter, &example1_target2(), &ring).unwrap();
    assert!((c1.value - 1.0).abs() <= 1e-9, "covering 1: {}", c1.value);
    assert!((c2.value - 1.0).abs() <= 1e-9, "covering 2: {}", c2.value);

    verdict(
        5,
        "threshold simplifications",
        true,
        &format!(
            "packing = 2 - H(X|Y) exactly (oracle {:.9}, worst deviation {worst:.2e} over \
             200 random channels, t=1 term vacuous); covering thresholds {:.9}/{:.9}",
            rep.value, c1.value, c2.value
        ),
    );
}

/// Frozen (l, e1, e2) per block length; the experiment is seeded per trial,
/// so any drift is a behavioral change in the sampling pipeline.
fn assert_frozen_counts(rows: &[Example1Row], expect: &[(usize, u64, u64)]) {
    assert_eq!(rows.len(), expect.len());
    for (r, &(l, e1, e2)) in rows.iter().zip(expect) {
        assert_eq!(r.l, l, "n={}", r.n);
        assert_eq!(r.counts.e1, e1, "n={} e1 {}", r.n, r.counts.e1);
        assert_eq!(r.counts.e2, e2, "n={} e2 {}", r.n, r.counts.e2);
    }
}

fn fmt_rows(rows: &[Example1Row]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "n={} l={} e1={:.4} e2={:.4}",
                r.n,
                r.l,
                r.stats.e1_rate.unwrap(),
                r.stats.e2_rate.unwrap()
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn acceptance_6_desk_scale_simulation() {
    let t0 = Instant::now();

    // (a) every uniquely decoded trial recovers the transmitted pair.
    let cfg_decode = SimConfig {
        n_list: vec![8],
        k1: 1,
        k2: 1,
        l: LChoice::Fixed(8),
        epsilon_c: 4.0,
        trials: 2000,
        seed: 6,
        decode: true,
    };
    let decode_rows = run_example1(&cfg_decode).unwrap();
    let d = &decode_rows[0];
    assert_eq!(d.counts.decode_attempts, 273);
    assert_eq!(d.counts.unique_decodes, 170);
    assert_eq!(d.counts.ed + d.counts.unique_decodes, d.counts.decode_attempts);
    assert_eq!(d.counts.correct_decodes, d.counts.unique_decodes);
    assert_eq!(d.stats.conditional_decode_accuracy, Some(1.0));
    println!(
        "  decode: {} attempts, {} unique, {} correct (n=8, l=8, 2000 trials)",
        d.counts.decode_attempts, d.counts.unique_decodes, d.counts.correct_decodes
    );

    // (b) covering succeeds more often 10% above the unit bin-rate threshold
    // than 10% below it, for every block length.
    let mk = |rate: f64, seed: u64| SimConfig {
        n_list: vec![8, 12, 16],
        k1: 1,
        k2: 1,
        l: LChoice::BinRate(rate),
        epsilon_c: 4.0,
        trials: 2000,
        seed,
        decode: false,
    };
    let above1 = run_example1(&mk(1.1, 1)).unwrap();
    let below1 = run_example1(&mk(0.9, 1)).unwrap();
    println!("  above threshold: {}", fmt_rows(&above1));
    println!("  below threshold: {}", fmt_rows(&below1));
    assert_frozen_counts(&above1, &[(9, 888, 833), (13, 745, 652), (18, 322, 225)]);
    assert_frozen_counts(&below1, &[(7, 1599, 1535), (11, 1520, 1447), (14, 1698, 1708)]);
    for (hi, lo) in above1.iter().zip(&below1) {
        assert!(
            hi.stats.e1_rate.unwrap() < lo.stats.e1_rate.unwrap(),
            "n={}: e1 {} vs {}",
            hi.n,
            hi.stats.e1_rate.unwrap(),
            lo.stats.e1_rate.unwrap()
        );
        assert!(
            hi.stats.e2_rate.unwrap() < lo.stats.e2_rate.unwrap(),
            "n={}: e2 {} vs {}",
            hi.n,
            hi.stats.e2_rate.unwrap(),
            lo.stats.e2_rate.unwrap()
        );
    }

    // (c) above threshold, the covering-failure rate decays with block length
    // in at least two of three seed batches.
    let above2 = run_example1(&mk(1.1, 2)).unwrap();
    let above3 = run_example1(&mk(1.1, 3)).unwrap();
    println!("  seed 2 batch:    {}", fmt_rows(&above2));
    println!("  seed 3 batch:    {}", fmt_rows(&above3));
    assert_frozen_counts(&above2, &[(9, 880, 841), (13, 724, 697), (18, 350, 216)]);
    assert_frozen_counts(&above3, &[(9, 923, 834), (13, 735, 680), (18, 333, 199)]);
    let batches = [&above1, &above2, &above3];
    let wins = batches
        .iter()
        .filter(|rows| {
            rows.windows(2)
                .all(|w| w[0].stats.e1_rate.unwrap() >= w[1].stats.e1_rate.unwrap())
        })
        .count();
    assert!(wins >= 2, "monotone decay in only {wins} of 3 batches");

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed <= 600.0, "simulation took {elapsed:.1}s");

    verdict(
        6,
        "desk-scale simulation",
        true,
        &format!(
            "conditional decode accuracy 1.0 over {} unique decodes; covering strictly \
             better at bin rate 1.1 than 0.9 for n in {{8,12,16}}; failure rate \
             non-increasing in n in {wins}/3 seed batches; {elapsed:.1}s total",
            d.counts.unique_decodes
        ),
    );
}

#[test]
fn acceptance_7_algebraic_property_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);

    // Circular convolution: commutative and affine in each argument.
    for m in [2usize, 3, 4, 5, 8] {
        for _ in 0..20 {
            let a = random_pmf(&mut rng, m);
            let b = random_pmf(&mut rng, m);
            let ab = circular_convolve(&a, &b).unwrap();
            let ba = circular_convolve(&b, &a).unwrap();
            for k in 0..m {
                assert!((ab.get(k) - ba.get(k)).abs() <= 1e-12);
            }
            let a2 = random_pmf(&mut rng, m);
            let lam: f64 = rng.gen_range(0.0..1.0);
            let mixed = Pmf::new(
                (0..m).map(|k| lam * a.get(k) + (1.0 - lam) * a2.get(k)).collect(),
            )
            .unwrap();
            let left = circular_convolve(&mixed, &b).unwrap();
            let r2 = circular_convolve(&a2, &b).unwrap();
            for k in 0..m {
                let want = lam * ab.get(k) + (1.0 - lam) * r2.get(k);
                assert!((left.get(k) - want).abs() <= 1e-12);
            }
        }
    }

    // Entropy chain rule on random three-axis joints.
    for _ in 0..50 {
        let dims = [
            rng.gen_range(2..5usize),
            rng.gen_range(2..5usize),
            rng.gen_range(2..5usize),
        ];
        let mut w: Vec<f64> = (0..dims.iter().product::<usize>())
            .map(|_| rng.gen_range(0.01..1.0))
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let j = JointPmf::new(&[("a", dims[0]), ("b", dims[1]), ("c", dims[2])], w).unwrap();
        let chain = j.entropy_of(&["a"]).unwrap()
            + j.conditional_entropy(&["b"], &["a"]).unwrap()
            + j.conditional_entropy(&["c"], &["a", "b"]).unwrap();
        assert!((j.entropy() - chain).abs() <= 1e-12);
    }

    // Digit/subgroup decomposition is unique in every prime-power ring <= 16.
    for (p, r) in [
        (2u32, 1u32),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 1),
        (3, 2),
        (5, 1),
        (7, 1),
        (11, 1),
        (13, 1),
    ] {
        let ring = RingSpec::new(p, r).unwrap();
        for t in 0..=r {
            let sub = ring.subgroup(t).unwrap();
            let pt = ring.level_modulus(t).unwrap();
            for a in 0..ring.modulus() {
                let digit = ring.project(a, t).unwrap();
                assert!(digit < pt);
                assert!(sub.binary_search(&ring.sub(a, digit).unwrap()).is_ok());
                let matches = sub
                    .iter()
                    .flat_map(|&h| (0..pt).map(move |g| (h, g)))
                    .filter(|&(h, g)| ring.add(h, g).unwrap() == a)
                    .count();
                assert_eq!(matches, 1, "ring Z_{}, t={t}, a={a}", ring.modulus());
            }
        }
    }

    // Nesting and coset cover, exhaustively enumerated for short blocks.
    let ring = z4();
    let w_law = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
    for (n, l) in [(2usize, 2usize), (3, 2), (4, 2), (5, 3), (6, 3), (7, 3), (8, 4)] {
        let code = build_nested_qgc(ring, n, 1, l, &w_law, 1.5, 7_000 + n as u64).unwrap();
        let zero = RingVector::zero(ring, 1);
        let inner0 = mat_apply(&zero, code.inner_matrix(), code.translation()).unwrap();
        let bin0 = bin_of(&code, &zero).unwrap();
        assert_eq!(bin0.len() as u64, code.bin_size());
        let shifts: BTreeSet<RingVector> =
            bin0.iter().map(|m| vec_sub(m, &inner0).unwrap()).collect();
        // The zero shift is always present, so each bin holds its inner word.
        assert!(shifts.contains(&RingVector::zero(ring, n)));
        for i in 0..code.message_count() {
            let u = code.message_by_index(i).unwrap();
            let inner = mat_apply(&u, code.inner_matrix(), code.translation()).unwrap();
            let bin: BTreeSet<RingVector> = bin_of(&code, &u).unwrap().into_iter().collect();
            let coset: BTreeSet<RingVector> =
                shifts.iter().map(|t| vec_add(&inner, t).unwrap()).collect();
            assert_eq!(bin, coset, "n={n}, message {i}");
        }
    }

    // Anchor-family reconstruction over the full grid of admissible laws.
    let sweep = verify_decompositions(24).unwrap();
    assert!(sweep.max_reconstruction_error <= 1e-12);
    assert!(sweep.max_weight_gap <= 1e-12);

    // Mixture weights match their closed forms and a direct linear solve.
    for i in 0..=12 {
        let p0 = (1.0 + i as f64 / 12.0) / 3.0;
        let beta = 3.0 * p0 - 1.0;

        let spaced = Pmf::new(vec![p0, 0.0, 1.0 - p0, 0.0]).unwrap();
        let mix = mix_noise(&spaced).unwrap();
        assert_eq!(mix.case, MixtureCase::SpacedPair);
        assert!((mix.weights[0] - beta).abs() <= 1e-12);
        let solved = solve_pair_weights(&spaced, &SPACED_ANCHORS[0], &SPACED_ANCHORS[1]).unwrap();
        assert!((solved[0] - beta).abs() <= 1e-12);
        assert!((solved[1] - (1.0 - beta)).abs() <= 1e-12);

        let adjacent = Pmf::new(vec![p0, 1.0 - p0, 0.0, 0.0]).unwrap();
        let mix = mix_noise(&adjacent).unwrap();
        assert_eq!(mix.case, MixtureCase::AdjacentPair);
        assert!((mix.weights[0] - beta).abs() <= 1e-12);
        let solved =
            solve_pair_weights(&adjacent, &ADJACENT_ANCHORS[0], &ADJACENT_ANCHORS[1]).unwrap();
        assert!((solved[0] - beta).abs() <= 1e-12);
    }
    for i0 in 0..=8u32 {
        for i1 in 0..=(8 - i0) {
            let b = [i0 as f64 / 8.0, i1 as f64 / 8.0, (8 - i0 - i1) as f64 / 8.0];
            let law: Vec<f64> = (0..3).map(|k| 0.25 + b[k] / 4.0).chain([0.0]).collect();
            let noise = Pmf::new(law).unwrap();
            let mix = mix_noise(&noise).unwrap();
            assert_eq!(mix.case, MixtureCase::LowTriple);
            let solved = solve_triple_weights(&noise, &TRIPLE_ANCHORS).unwrap();
            for k in 0..3 {
                let closed = 4.0 * noise.get(k) - 1.0;
                assert!((mix.weights[k] - closed).abs() <= 1e-12);
                assert!((solved[k] - closed).abs() <= 1e-12);
            }
        }
    }

    verdict(
        7,
        "algebraic property suites",
        true,
        &format!(
            "convolution bilinear/commutative (1e-12); entropy chain rule (1e-12); digit \
             decomposition unique in 10 rings; nesting/coset cover exhaustive for n <= 8; \
             anchor reconstruction residual {:.2e}, weight gap {:.2e}; mixture weights \
             match closed forms and linear solves (1e-12)",
            sweep.max_reconstruction_error, sweep.max_weight_gap
        ),
    );
}

#[test]
fn acceptance_8_sum_rate_separation() {
    let ch = builtin_example1();
    let cfg = SearchConfig {
        q_size: 1,
        u_sizes: Some([4, 4]),
        restarts: 24,
        iters: 300,
        seed: 0,
        step: 1.0,
        weights: SearchConfig::default().weights,
    };
    let search = search_gp_region(&ch, &cfg).unwrap();
    assert!(search.evaluations > 0);
    assert!(
        search.best_sum_bound <= 0.32 + 1e-3,
        "search reached {}",
        search.best_sum_bound
    );
    // Seeded search; frozen from the first full run.
    assert!(
        (search.best_sum_bound - 3.69656017279e-2).abs() <= 1e-9,
        "search value {} drifted",
        search.best_sum_bound
    );

    let a = lemma4_assignment(&ch);
    let structured = qgc_sum_rate(&ch, &a).unwrap().simplified.value.unwrap();
    assert!((structured - 1.0).abs() <= 1e-9);

    verdict(
        8,
        "sum-rate separation",
        true,
        &format!(
            "unstructured-binning search peaks at sum rate {:.11e} (<= 0.321, {} evaluations); \
             the structured assignment achieves {structured:.9}",
            search.best_sum_bound, search.evaluations
        ),
    );
}
