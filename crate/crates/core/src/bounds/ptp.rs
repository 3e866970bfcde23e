//! Brute-force verification of the point-to-point entropy-gap table.
//!
//! For a deterministic cost-zero input rule x(s) on Z4 and an arbitrary state
//! law p(s), the gap H(S) - H(x(S) + S + N) must stay below a fixed threshold
//! for each of eight noise laws N. These eight inequalities anchor the whole
//! converse case analysis, and the proof is a grid sweep: every rule, every
//! state law on a fine simplex grid, plus local refinement around the argmax.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::probinfo::Pmf;

/// Deterministic input rule s -> x(s) on Z4, stored as the four values.
pub type InputRule = [u32; 4];

/// Slack added to each threshold before declaring a row violated.
pub const GAP_TOL: f64 = 1e-6;

pub(crate) fn h4(w: &[f64; 4]) -> f64 {
    let mut h = 0.0;
    for &p in w {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Law of A + B mod 4 for independent A ~ a, B ~ b.
pub(crate) fn conv4(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for j in 0..4 {
        if a[j] == 0.0 {
            continue;
        }
        for k in 0..4 {
            out[(j + k) & 3] += a[j] * b[k];
        }
    }
    out
}

/// Law of x(S) + S mod 4 when S ~ p.
pub(crate) fn shift4(p: &[f64; 4], rule: &InputRule) -> [f64; 4] {
    let mut out = [0.0; 4];
    for s in 0..4 {
        out[(rule[s] as usize + s) & 3] += p[s];
    }
    out
}

/// All rules s -> x(s) with values drawn from `allowed`, in lexicographic
/// order of the value tuple.
pub fn enumerate_rules(allowed: &[u32]) -> Result<Vec<InputRule>> {
    if allowed.is_empty() {
        return Err(Error::Domain("empty input alphabet".into()));
    }
    for &v in allowed {
        if v >= 4 {
            return Err(Error::Domain(format!("input value {v} outside Z4")));
        }
    }
    let mut rules = Vec::with_capacity(allowed.len().pow(4));
    for &v0 in allowed {
        for &v1 in allowed {
            for &v2 in allowed {
                for &v3 in allowed {
                    rules.push([v0, v1, v2, v3]);
                }
            }
        }
    }
    Ok(rules)
}

/// The entropy gap H(S) - H(x(S) + S + N) in bits.
pub fn ptp_objective(state: &Pmf, rule: &InputRule, noise: &Pmf) -> Result<f64> {
    if state.len() != 4 || noise.len() != 4 {
        return Err(Error::Dimension("state and noise laws must live on Z4".into()));
    }
    for &v in rule {
        if v >= 4 {
            return Err(Error::Domain(format!("rule value {v} outside Z4")));
        }
    }
    let p: [f64; 4] = [state.get(0), state.get(1), state.get(2), state.get(3)];
    let n: [f64; 4] = [noise.get(0), noise.get(1), noise.get(2), noise.get(3)];
    Ok(h4(&p) - h4(&conv4(&shift4(&p, rule), &n)))
}

/// One row of the table: a noise law and the threshold its gap must respect.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseRow {
    pub label: String,
    pub noise: [f64; 4],
    pub bound: f64,
}

/// The eight rows. Pure shift at 1 bit, the two spaced-pair laws at 0.1, the
/// two adjacent-pair laws at 0.5, the three low-triple laws at 0.32.
pub fn noise_rows() -> Vec<NoiseRow> {
    let row = |label: &str, noise: [f64; 4], bound: f64| NoiseRow {
        label: label.to_string(),
        noise,
        bound,
    };
    vec![
        row("delta", [1.0, 0.0, 0.0, 0.0], 1.0),
        row("(1/3, 0, 2/3, 0)", [1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0], 0.1),
        row("(2/3, 0, 1/3, 0)", [2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0], 0.1),
        row("(1/3, 2/3, 0, 0)", [1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0], 0.5),
        row("(2/3, 1/3, 0, 0)", [2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0], 0.5),
        row("(1/2, 1/4, 1/4, 0)", [0.5, 0.25, 0.25, 0.0], 0.32),
        row("(1/4, 1/2, 1/4, 0)", [0.25, 0.5, 0.25, 0.0], 0.32),
        row("(1/4, 1/4, 1/2, 0)", [0.25, 0.25, 0.5, 0.0], 0.32),
    ]
}

/// All nonnegative integer 4-tuples summing to `den`, lexicographic.
pub(crate) fn simplex_grid(den: u32) -> Vec<[u32; 4]> {
    let mut cells = Vec::new();
    for a in 0..=den {
        for b in 0..=(den - a) {
            for c in 0..=(den - a - b) {
                cells.push([a, b, c, den - a - b - c]);
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Serialize)]
pub struct PtpVerifyConfig {
    /// Denominator of the base simplex grid over state laws.
    pub resolution: u32,
    /// Local refinement passes around the incumbent argmax.
    pub refine_rounds: u32,
    /// Grid-step shrink factor per refinement pass.
    pub refine_scale: u32,
}

impl Default for PtpVerifyConfig {
    fn default() -> Self {
        PtpVerifyConfig {
            resolution: 100,
            refine_rounds: 3,
            refine_scale: 10,
        }
    }
}

/// Verified maximum of one row's gap over the swept rules and state laws.
#[derive(Debug, Clone, Serialize)]
pub struct RowOutcome {
    pub label: String,
    pub noise: [f64; 4],
    pub bound: f64,
    pub max_gap: f64,
    pub argmax_rule: InputRule,
    pub argmax_state: [f64; 4],
    pub within_bound: bool,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PtpTableReport {
    pub resolution: u32,
    pub refine_rounds: u32,
    pub refine_scale: u32,
    pub rows: Vec<RowOutcome>,
    pub total_evaluations: u64,
    pub all_within: bool,
}

/// Best gap over all rules at one state cell; ties go to the lowest rule index.
fn eval_cell(cell: &[u32; 4], den: f64, rules: &[InputRule], noise: &[f64; 4]) -> (f64, usize) {
    let p = [
        cell[0] as f64 / den,
        cell[1] as f64 / den,
        cell[2] as f64 / den,
        cell[3] as f64 / den,
    ];
    let hs = h4(&p);
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for (ri, rule) in rules.iter().enumerate() {
        let gap = hs - h4(&conv4(&shift4(&p, rule), noise));
        if gap > best.0 {
            best = (gap, ri);
        }
    }
    best
}

/// Sweep one row: full base grid in parallel, then `refine_rounds` local
/// passes that shrink the grid step by `refine_scale` around the incumbent.
fn sweep_row(row: &NoiseRow, rules: &[InputRule], cfg: &PtpVerifyConfig) -> RowOutcome {
    let base = simplex_grid(cfg.resolution);
    let noise = row.noise;
    // (gap, grid index, rule index); ties resolved toward the lowest indices
    // so the argmax is deterministic under any parallel schedule.
    let seed = (f64::NEG_INFINITY, usize::MAX, usize::MAX);
    let pick = |a: (f64, usize, usize), b: (f64, usize, usize)| {
        if a.0 > b.0 || (a.0 == b.0 && (a.1, a.2) <= (b.1, b.2)) {
            a
        } else {
            b
        }
    };
    let best = base
        .par_iter()
        .enumerate()
        .map(|(gi, cell)| {
            let (gap, ri) = eval_cell(cell, cfg.resolution as f64, rules, &noise);
            (gap, gi, ri)
        })
        .reduce(|| seed, pick);

    let mut evaluations = base.len() as u64 * rules.len() as u64;
    let mut den = cfg.resolution;
    let mut center = base[best.1];
    let mut max_gap = best.0;
    let mut argmax_rule = rules[best.2];

    for _ in 0..cfg.refine_rounds {
        let fine = den * cfg.refine_scale;
        let c: [u32; 4] = center.map(|v| v * cfg.refine_scale);
        let r = cfg.refine_scale;
        let lo = |v: u32| v.saturating_sub(r);
        let hi = |v: u32| (v + r).min(fine);
        for v0 in lo(c[0])..=hi(c[0]) {
            for v1 in lo(c[1])..=hi(c[1]) {
                if v0 + v1 > fine {
                    break;
                }
                for v2 in lo(c[2])..=hi(c[2]) {
                    if v0 + v1 + v2 > fine {
                        break;
                    }
                    let v3 = fine - v0 - v1 - v2;
                    if v3 < lo(c[3]) || v3 > hi(c[3]) {
                        continue;
                    }
                    let cell = [v0, v1, v2, v3];
                    let (gap, ri) = eval_cell(&cell, fine as f64, rules, &noise);
                    evaluations += rules.len() as u64;
                    if gap > max_gap {
                        max_gap = gap;
                        argmax_rule = rules[ri];
                        center = cell;
                    }
                }
            }
        }
        // no strict improvement this round: carry the incumbent to the fine
        // scale so the next pass (and the reported argmax) stay consistent
        if center.iter().sum::<u32>() != fine {
            center = c;
        }
        den = fine;
    }

    let argmax_state = center.map(|v| v as f64 / den as f64);
    RowOutcome {
        label: row.label.clone(),
        noise: row.noise,
        bound: row.bound,
        max_gap,
        argmax_rule,
        argmax_state,
        within_bound: max_gap <= row.bound + GAP_TOL,
        evaluations,
    }
}

/// Sweep every row of the table with the cost-zero rules of encoder 1
/// (values in {0, 2}).
pub fn verify_ptp_table(cfg: &PtpVerifyConfig) -> Result<PtpTableReport> {
    if cfg.resolution == 0 {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    if cfg.refine_rounds > 0 && cfg.refine_scale < 2 {
        return Err(Error::Domain("refine scale must be at least 2".into()));
    }
    let rules = enumerate_rules(&[0, 2])?;
    let rows: Vec<RowOutcome> = noise_rows()
        .iter()
        .map(|row| sweep_row(row, &rules, cfg))
        .collect();
    let total_evaluations = rows.iter().map(|r| r.evaluations).sum();
    let all_within = rows.iter().all(|r| r.within_bound);
    Ok(PtpTableReport {
        resolution: cfg.resolution,
        refine_rounds: cfg.refine_rounds,
        refine_scale: cfg.refine_scale,
        rows,
        total_evaluations,
        all_within,
    })
}
