//! Shift-set classification of cost-zero input rules, and the exact convex
//! decompositions that reduce an arbitrary two- or three-point noise law to
//! the anchor rows of the entropy-gap table.
//!
//! The case analysis behind the sum-rate outer bound buckets encoder 2's
//! rules by how many values x(s) + s can take. Singleton and full-range
//! buckets collapse directly; the in-between buckets leave a noise law
//! supported on two or three residues, which these mixtures rewrite as a
//! convex combination of fixed anchor laws so the table thresholds apply
//! term by term (entropy being concave and cyclic convolution bilinear).

use serde::Serialize;

use super::ptp::{enumerate_rules, InputRule};
use crate::error::{Error, Result};
use crate::probinfo::Pmf;

/// Entries below this are treated as structural zeros when matching shapes.
const SHAPE_TOL: f64 = 1e-12;

/// Weights may stray this far outside [0, 1] before a mixture is rejected;
/// grid points sitting exactly on a feasibility edge land here.
const WEIGHT_SLACK: f64 = 1e-9;

/// The values x(s) + s mod 4 can take, sorted and deduplicated.
pub fn shift_set(rule: &InputRule) -> Vec<u32> {
    let mut vals: Vec<u32> = (0..4u32).map(|s| (rule[s as usize] + s) % 4).collect();
    vals.sort_unstable();
    vals.dedup();
    vals
}

/// Rules of a two-letter input alphabet, grouped by shift-set size.
#[derive(Debug, Clone)]
pub struct RuleClassification {
    /// `by_size[k]` holds the rules whose shift set has k+1 elements.
    pub by_size: [Vec<InputRule>; 4],
}

impl RuleClassification {
    pub fn counts(&self) -> [usize; 4] {
        [
            self.by_size[0].len(),
            self.by_size[1].len(),
            self.by_size[2].len(),
            self.by_size[3].len(),
        ]
    }
}

pub fn classify_rules(allowed: &[u32]) -> Result<RuleClassification> {
    let mut by_size: [Vec<InputRule>; 4] = Default::default();
    for rule in enumerate_rules(allowed)? {
        by_size[shift_set(&rule).len() - 1].push(rule);
    }
    Ok(RuleClassification { by_size })
}

/// Which anchor family a noise law decomposed into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MixtureCase {
    /// Support inside {0, 2}: anchors (2/3,0,1/3,0) and (1/3,0,2/3,0).
    SpacedPair,
    /// Support inside {0, 1}: anchors (2/3,1/3,0,0) and (1/3,2/3,0,0).
    AdjacentPair,
    /// Support inside {0, 1, 2}: the three (..1/2..1/4..1/4..) anchors.
    LowTriple,
}

pub const SPACED_ANCHORS: [[f64; 4]; 2] = [
    [2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0],
    [1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0],
];

pub const ADJACENT_ANCHORS: [[f64; 4]; 2] = [
    [2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0],
    [1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0],
];

pub const TRIPLE_ANCHORS: [[f64; 4]; 3] = [
    [0.5, 0.25, 0.25, 0.0],
    [0.25, 0.5, 0.25, 0.0],
    [0.25, 0.25, 0.5, 0.0],
];

/// A noise law written as a convex combination of anchor laws.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseMixture {
    pub case: MixtureCase,
    pub weights: Vec<f64>,
    pub components: Vec<[f64; 4]>,
    /// Max absolute residue-wise error of the reconstruction.
    pub reconstruction_error: f64,
}

fn clamp_weight(w: f64, what: &str) -> Result<f64> {
    if !(-WEIGHT_SLACK..=1.0 + WEIGHT_SLACK).contains(&w) {
        return Err(Error::Infeasible(format!(
            "{what} weight {w} falls outside [0, 1]"
        )));
    }
    Ok(w.clamp(0.0, 1.0))
}

fn reconstruction_error(p: &[f64; 4], weights: &[f64], components: &[[f64; 4]]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let mut acc = 0.0;
        for (w, comp) in weights.iter().zip(components) {
            acc += w * comp[i];
        }
        worst = worst.max((acc - p[i]).abs());
    }
    worst
}

/// Decompose a noise law on Z4 into anchor laws. Shapes are tried in order:
/// spaced pair, adjacent pair, low triple. The pair weights are (3p0 - 1,
/// 2 - 3p0); the triple weights are 4p_i - 1. Mass on residue 3, or a weight
/// outside [0, 1] (p0 outside [1/3, 2/3], resp. some p_i outside [1/4, 1/2]),
/// is infeasible.
pub fn mix_noise(noise: &Pmf) -> Result<NoiseMixture> {
    if noise.len() != 4 {
        return Err(Error::Dimension("noise law must live on Z4".into()));
    }
    let p = [noise.get(0), noise.get(1), noise.get(2), noise.get(3)];
    if p[3] > SHAPE_TOL {
        return Err(Error::Infeasible(
            "mass on residue 3 matches no anchor family".into(),
        ));
    }
    let (case, weights, components): (MixtureCase, Vec<f64>, Vec<[f64; 4]>) = if p[1] <= SHAPE_TOL
    {
        let b = clamp_weight(3.0 * p[0] - 1.0, "spaced-pair")?;
        (
            MixtureCase::SpacedPair,
            vec![b, 1.0 - b],
            SPACED_ANCHORS.to_vec(),
        )
    } else if p[2] <= SHAPE_TOL {
        let b = clamp_weight(3.0 * p[0] - 1.0, "adjacent-pair")?;
        (
            MixtureCase::AdjacentPair,
            vec![b, 1.0 - b],
            ADJACENT_ANCHORS.to_vec(),
        )
    } else {
        let mut weights = Vec::with_capacity(3);
        for i in 0..3 {
            weights.push(clamp_weight(4.0 * p[i] - 1.0, "triple")?);
        }
        (MixtureCase::LowTriple, weights, TRIPLE_ANCHORS.to_vec())
    };
    let reconstruction_error = reconstruction_error(&p, &weights, &components);
    Ok(NoiseMixture {
        case,
        weights,
        components,
        reconstruction_error,
    })
}

/// Two-component weights recovered from the linear system (best-conditioned
/// coordinate plus total mass) instead of the closed form.
pub fn solve_pair_weights(noise: &Pmf, a: &[f64; 4], b: &[f64; 4]) -> Result<[f64; 2]> {
    if noise.len() != 4 {
        return Err(Error::Dimension("noise law must live on Z4".into()));
    }
    let mut pivot = 0;
    for i in 1..4 {
        if (a[i] - b[i]).abs() > (a[pivot] - b[pivot]).abs() {
            pivot = i;
        }
    }
    let gap = a[pivot] - b[pivot];
    if gap.abs() < 1e-12 {
        return Err(Error::Domain("components coincide".into()));
    }
    let wa = (noise.get(pivot) - b[pivot]) / gap;
    Ok([wa, 1.0 - wa])
}

/// Three-component weights via Cramer's rule on two coordinates plus mass.
pub fn solve_triple_weights(noise: &Pmf, comps: &[[f64; 4]; 3]) -> Result<[f64; 3]> {
    if noise.len() != 4 {
        return Err(Error::Dimension("noise law must live on Z4".into()));
    }
    // rows: coordinate 0, coordinate 1, total mass
    let m = [
        [comps[0][0], comps[1][0], comps[2][0]],
        [comps[0][1], comps[1][1], comps[2][1]],
        [1.0, 1.0, 1.0],
    ];
    let rhs = [noise.get(0), noise.get(1), 1.0];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    if d.abs() < 1e-12 {
        return Err(Error::Domain("components are linearly dependent".into()));
    }
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut mk = m;
        for row in 0..3 {
            mk[row][k] = rhs[row];
        }
        *slot = det3(&mk) / d;
    }
    Ok(out)
}

/// Grid sweep over every anchor-family shape: counts feasible points, and
/// tracks the worst reconstruction error and the worst gap between the
/// closed-form weights and the directly solved ones.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureSweepReport {
    pub grid_denominator: u32,
    pub spaced_points: u64,
    pub spaced_feasible: u64,
    pub adjacent_points: u64,
    pub adjacent_feasible: u64,
    pub simplex_points: u64,
    pub simplex_feasible: u64,
    pub max_reconstruction_error: f64,
    pub max_weight_gap: f64,
    /// Rules of each shift-set size for encoder 1 ({0,2} inputs).
    pub rule_counts_encoder1: [usize; 4],
    /// Rules of each shift-set size for encoder 2 ({0,1} inputs).
    pub rule_counts_encoder2: [usize; 4],
}

pub fn verify_decompositions(grid_denominator: u32) -> Result<MixtureSweepReport> {
    if grid_denominator == 0 {
        return Err(Error::Domain("grid denominator must be positive".into()));
    }
    let den = grid_denominator as f64;
    let mut report = MixtureSweepReport {
        grid_denominator,
        spaced_points: 0,
        spaced_feasible: 0,
        adjacent_points: 0,
        adjacent_feasible: 0,
        simplex_points: 0,
        simplex_feasible: 0,
        max_reconstruction_error: 0.0,
        max_weight_gap: 0.0,
        rule_counts_encoder1: classify_rules(&[0, 2])?.counts(),
        rule_counts_encoder2: classify_rules(&[0, 1])?.counts(),
    };

    let absorb = |report: &mut MixtureSweepReport, noise: &Pmf| -> Result<bool> {
        match mix_noise(noise) {
            Ok(mix) => {
                report.max_reconstruction_error = report
                    .max_reconstruction_error
                    .max(mix.reconstruction_error);
                let solved: Vec<f64> = match mix.case {
                    MixtureCase::SpacedPair => {
                        solve_pair_weights(noise, &SPACED_ANCHORS[0], &SPACED_ANCHORS[1])?.to_vec()
                    }
                    MixtureCase::AdjacentPair => {
                        solve_pair_weights(noise, &ADJACENT_ANCHORS[0], &ADJACENT_ANCHORS[1])?
                            .to_vec()
                    }
                    MixtureCase::LowTriple => {
                        solve_triple_weights(noise, &TRIPLE_ANCHORS)?.to_vec()
                    }
                };
                for (w, s) in mix.weights.iter().zip(&solved) {
                    report.max_weight_gap = report.max_weight_gap.max((w - s).abs());
                }
                Ok(true)
            }
            Err(Error::Infeasible(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };

    for k in 0..=grid_denominator {
        let p0 = k as f64 / den;
        let spaced = Pmf::new(vec![p0, 0.0, 1.0 - p0, 0.0])?;
        report.spaced_points += 1;
        if absorb(&mut report, &spaced)? {
            report.spaced_feasible += 1;
        }
        let adjacent = Pmf::new(vec![p0, 1.0 - p0, 0.0, 0.0])?;
        report.adjacent_points += 1;
        if absorb(&mut report, &adjacent)? {
            report.adjacent_feasible += 1;
        }
    }
    for a in 0..=grid_denominator {
        for b in 0..=(grid_denominator - a) {
            let c = grid_denominator - a - b;
            let noise = Pmf::new(vec![a as f64 / den, b as f64 / den, c as f64 / den, 0.0])?;
            report.simplex_points += 1;
            if absorb(&mut report, &noise)? {
                report.simplex_feasible += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modrings::circular_convolve;
    use crate::probinfo::entropy_bits;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shift_set_examples() {
        assert_eq!(shift_set(&[0, 0, 0, 0]), vec![0, 1, 2, 3]);
        assert_eq!(shift_set(&[0, 1, 0, 1]), vec![0, 2]);
        assert_eq!(shift_set(&[1, 0, 1, 0]), vec![1, 3]);
        assert_eq!(shift_set(&[0, 0, 0, 1]), vec![0, 1, 2]);
    }

    #[test]
    fn bucket_counts_for_both_encoders() {
        // No rule can fold all four shifts onto one point: the s-th shift
        // lives in {s, s + allowed gap}, and those ranges never all meet.
        let enc2 = classify_rules(&[0, 1]).unwrap();
        assert_eq!(enc2.counts(), [0, 2, 12, 2]);
        let enc1 = classify_rules(&[0, 2]).unwrap();
        assert_eq!(enc1.counts(), [0, 4, 8, 4]);
        for cls in [enc1, enc2] {
            assert_eq!(cls.counts().iter().sum::<usize>(), 16);
        }
    }

    #[test]
    fn pair_weights_match_closed_form() {
        for k in 0..=60u32 {
            let p0 = k as f64 / 60.0;
            let noise = Pmf::new(vec![p0, 0.0, 1.0 - p0, 0.0]).unwrap();
            let beta = 3.0 * p0 - 1.0;
            let mix = mix_noise(&noise);
            if !(-1e-9..=1.0 + 1e-9).contains(&beta) {
                assert!(matches!(mix, Err(Error::Infeasible(_))), "p0={p0}");
                continue;
            }
            let mix = mix.unwrap();
            assert_eq!(mix.case, MixtureCase::SpacedPair);
            assert!((mix.weights[0] - beta).abs() < 1e-9);
            assert!(mix.reconstruction_error < 1e-12);
            let solved =
                solve_pair_weights(&noise, &SPACED_ANCHORS[0], &SPACED_ANCHORS[1]).unwrap();
            assert!((solved[0] - mix.weights[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn adjacent_shape_dispatches_to_its_anchors() {
        let noise = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let mix = mix_noise(&noise).unwrap();
        assert_eq!(mix.case, MixtureCase::AdjacentPair);
        assert!((mix.weights[0] - 0.5).abs() < 1e-12);
        assert!(mix.reconstruction_error < 1e-12);
    }

    #[test]
    fn triple_weights_match_cramer_on_random_feasible_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            // draw valid weights, reconstruct the law, then recover them
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(1e-6..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let mut p = [0.0; 4];
            for (wk, comp) in w.iter().zip(&TRIPLE_ANCHORS) {
                for i in 0..4 {
                    p[i] += wk * comp[i];
                }
            }
            let noise = Pmf::new(p.to_vec()).unwrap();
            let mix = mix_noise(&noise).unwrap();
            assert_eq!(mix.case, MixtureCase::LowTriple);
            let solved = solve_triple_weights(&noise, &TRIPLE_ANCHORS).unwrap();
            for k in 0..3 {
                assert!((mix.weights[k] - w[k]).abs() < 1e-9);
                assert!((solved[k] - w[k]).abs() < 1e-9);
            }
            assert!(mix.reconstruction_error < 1e-12);
        }
    }

    #[test]
    fn rejects_shapes_outside_the_families() {
        // mass on residue 3
        assert!(matches!(
            mix_noise(&Pmf::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap()),
            Err(Error::Infeasible(_))
        ));
        // point mass: beta = 2
        assert!(matches!(
            mix_noise(&Pmf::delta(4, 0).unwrap()),
            Err(Error::Infeasible(_))
        ));
        // spaced shape outside [1/3, 2/3]
        assert!(matches!(
            mix_noise(&Pmf::new(vec![0.9, 0.0, 0.1, 0.0]).unwrap()),
            Err(Error::Infeasible(_))
        ));
        // triple shape with a coordinate above 1/2
        assert!(matches!(
            mix_noise(&Pmf::new(vec![0.6, 0.2, 0.2, 0.0]).unwrap()),
            Err(Error::Infeasible(_))
        ));
        // wrong alphabet
        assert!(mix_noise(&Pmf::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn mixtures_commute_with_convolution() {
        // the case analysis convolves the decomposition against another law
        // and splits term by term; bilinearity makes that exact
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let p0 = rng.gen_range(1.0 / 3.0..2.0 / 3.0);
            let noise = Pmf::new(vec![p0, 0.0, 1.0 - p0, 0.0]).unwrap();
            let mix = mix_noise(&noise).unwrap();
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(1e-3..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let q = Pmf::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let direct = circular_convolve(&noise, &q).unwrap();
            let mut split = [0.0; 4];
            for (w, comp) in mix.weights.iter().zip(&mix.components) {
                let part = circular_convolve(&Pmf::new(comp.to_vec()).unwrap(), &q).unwrap();
                for i in 0..4 {
                    split[i] += w * part.get(i);
                }
            }
            for i in 0..4 {
                assert!((direct.get(i) - split[i]).abs() < 1e-12);
            }
            // and concavity, the other half of the argument
            let h_direct = direct.entropy();
            let h_split: f64 = mix
                .weights
                .iter()
                .zip(&mix.components)
                .map(|(w, comp)| {
                    let part = circular_convolve(&Pmf::new(comp.to_vec()).unwrap(), &q).unwrap();
                    w * entropy_bits(part.as_slice())
                })
                .sum();
            assert!(h_direct >= h_split - 1e-12);
        }
    }

    #[test]
    fn sweep_counts_frozen_at_den_60() {
        let report = verify_decompositions(60).unwrap();
        // pair shapes: feasible exactly for p0 in [20/60, 40/60]
        assert_eq!(report.spaced_points, 61);
        assert_eq!(report.spaced_feasible, 21);
        assert_eq!(report.adjacent_points, 61);
        assert_eq!(report.adjacent_feasible, 21);
        // full simplex with zero mass on residue 3: C(62, 2) points; the
        // interior triple window [15, 30]^3 gives C(17, 2), plus 21 boundary
        // points each for the two pair shapes it degenerates into
        assert_eq!(report.simplex_points, 1891);
        assert_eq!(report.simplex_feasible, 178);
        assert!(report.max_reconstruction_error < 1e-12);
        assert!(report.max_weight_gap < 1e-9);
        assert_eq!(report.rule_counts_encoder2, [0, 2, 12, 2]);
    }
}
