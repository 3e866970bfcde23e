use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::probinfo::Pmf;

use super::assignment::GpAssignment;
use super::eval::{gp_rates, GpRates};
use super::hull::{region_hull, RateRegion};

/// Randomized ascent over auxiliary-channel assignments. Each restart climbs
/// a weighted-rate objective from fresh logits; the achievable corners of
/// every accepted assignment are pooled into one region.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub q_size: usize,
    /// Auxiliary alphabet sizes; `None` picks |X_i|*|S_i| per encoder.
    pub u_sizes: Option<[usize; 2]>,
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    pub step: f64,
    /// Weights w for the per-restart objective w*R1 + (1-w)*R2, cycled.
    pub weights: Vec<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            q_size: 2,
            u_sizes: None,
            restarts: 24,
            iters: 300,
            seed: 0,
            step: 1.0,
            weights: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub region: RateRegion,
    pub best_sum_bound: f64,
    pub evaluations: usize,
    pub points_collected: usize,
}

/// Zero-cost tolerance below which the search hard-masks expensive inputs
/// instead of relying on rejection.
const MASK_TOL: f64 = 1e-12;

struct Parameterization {
    q_size: usize,
    u_sizes: [usize; 2],
    x_sizes: [usize; 2],
    s_sizes: [usize; 2],
    /// mask[i][s * x_size + x]: whether encoder i may use x under state s.
    mask: [Vec<bool>; 2],
    reject_by_cost: bool,
}

struct Logits {
    q: Vec<f64>,
    /// tables[i][q][s] over (u, x), u-major.
    tables: [Vec<Vec<Vec<f64>>>; 2],
}

impl Parameterization {
    fn new(ch: &ChannelSpec, cfg: &SearchConfig) -> Result<Self> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let s_sizes = [al.s1, al.s2];
        let u_sizes = cfg
            .u_sizes
            .unwrap_or([al.x1 * al.s1, al.x2 * al.s2]);
        if cfg.q_size == 0 || u_sizes[0] == 0 || u_sizes[1] == 0 {
            return Err(Error::Dimension(
                "search alphabets must be nonempty".into(),
            ));
        }
        let costs = [ch.cost1(), ch.cost2()];
        let taus = [ch.tau1(), ch.tau2()];
        let mut mask = [Vec::new(), Vec::new()];
        let mut reject_by_cost = false;
        for i in 0..2 {
            if taus[i] <= MASK_TOL {
                let mut m = vec![false; s_sizes[i] * x_sizes[i]];
                for s in 0..s_sizes[i] {
                    let mut any = false;
                    for x in 0..x_sizes[i] {
                        if costs[i].get(x, s) <= taus[i] {
                            m[s * x_sizes[i] + x] = true;
                            any = true;
                        }
                    }
                    if !any {
                        return Err(Error::Infeasible(format!(
                            "encoder {} state {s}: every input exceeds the zero cost budget",
                            i + 1
                        )));
                    }
                }
                mask[i] = m;
            } else {
                mask[i] = vec![true; s_sizes[i] * x_sizes[i]];
                reject_by_cost = true;
            }
        }
        Ok(Parameterization {
            q_size: cfg.q_size,
            u_sizes,
            x_sizes,
            s_sizes,
            mask,
            reject_by_cost,
        })
    }

    fn init(&self, rng: &mut ChaCha8Rng) -> Logits {
        let mut tables: [Vec<Vec<Vec<f64>>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            for _ in 0..self.q_size {
                let mut per_s = Vec::new();
                for _ in 0..self.s_sizes[i] {
                    per_s.push(
                        (0..self.u_sizes[i] * self.x_sizes[i])
                            .map(|_| rng.gen_range(-1.0..1.0))
                            .collect(),
                    );
                }
                tables[i].push(per_s);
            }
        }
        Logits {
            q: (0..self.q_size).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            tables,
        }
    }

    /// Move proposal: jitter one randomly chosen conditional row (and, some
    /// of the time, the time-sharing logits). Local moves keep the accept
    /// rate workable when the tables are large.
    fn perturb(&self, l: &Logits, step: f64, rng: &mut ChaCha8Rng) -> Logits {
        let mut out = Logits {
            q: l.q.clone(),
            tables: l.tables.clone(),
        };
        let i = rng.gen_range(0..2usize);
        let q = rng.gen_range(0..self.q_size);
        let s = rng.gen_range(0..self.s_sizes[i]);
        for v in &mut out.tables[i][q][s] {
            *v += step * (rng.gen::<f64>() * 2.0 - 1.0);
        }
        if self.q_size > 1 && rng.gen::<f64>() < 0.2 {
            for v in &mut out.q {
                *v += step * (rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        out
    }

    fn softmax(raw: &[f64], keep: impl Fn(usize) -> bool) -> Vec<f64> {
        let mut hi = f64::NEG_INFINITY;
        for (k, &v) in raw.iter().enumerate() {
            if keep(k) && v > hi {
                hi = v;
            }
        }
        let mut out = vec![0.0; raw.len()];
        let mut total = 0.0;
        for (k, &v) in raw.iter().enumerate() {
            if keep(k) {
                let e = (v - hi).exp();
                out[k] = e;
                total += e;
            }
        }
        for e in &mut out {
            *e /= total;
        }
        out
    }

    /// Materialize the assignment; `None` when the cost budget rejects it.
    fn realize(&self, ch: &ChannelSpec, l: &Logits) -> Result<Option<GpAssignment>> {
        let q_law = Pmf::new(Self::softmax(&l.q, |_| true))?;
        let mut cond: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            let mx = self.x_sizes[i];
            for per_s in &l.tables[i] {
                let mut rows = Vec::new();
                for (s, raw) in per_s.iter().enumerate() {
                    let mask = &self.mask[i];
                    let rowp = Self::softmax(raw, |k| mask[s * mx + k % mx]);
                    rows.push(Pmf::new(rowp)?);
                }
                cond[i].push(rows);
            }
        }
        match GpAssignment::new(ch, q_law, self.u_sizes, cond) {
            Ok(a) => Ok(Some(a)),
            Err(Error::Infeasible(_)) if self.reject_by_cost => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Total budget overshoot of the realized conditionals. Gives rejected
    /// points an ordering so the walk can descend into the feasible set on
    /// positive-budget channels (where no mask applies).
    fn cost_excess(&self, ch: &ChannelSpec, l: &Logits) -> f64 {
        let q_law = Self::softmax(&l.q, |_| true);
        let states = [ch.state1_marginal(), ch.state2_marginal()];
        let costs = [ch.cost1(), ch.cost2()];
        let taus = [ch.tau1(), ch.tau2()];
        let mut excess = 0.0;
        for i in 0..2 {
            let mx = self.x_sizes[i];
            let mask = &self.mask[i];
            let mut avg = 0.0;
            for (q, per_s) in l.tables[i].iter().enumerate() {
                for (s, raw) in per_s.iter().enumerate() {
                    let rowp = Self::softmax(raw, |k| mask[s * mx + k % mx]);
                    let row_cost: f64 = rowp
                        .iter()
                        .enumerate()
                        .map(|(k, p)| p * costs[i].get(k % mx, s))
                        .sum();
                    avg += q_law[q] * states[i].get(s) * row_cost;
                }
            }
            excess += (avg - taus[i]).max(0.0);
        }
        excess
    }
}

/// Extreme points of the pentagon cut out by the three bounds, without the
/// nonnegativity cut. Used for scoring so that ascent keeps a gradient even
/// while the bounds are still negative.
fn corners_raw(r: &GpRates) -> [(f64, f64); 2] {
    let (r1, r2, sb) = (r.r1_bound, r.r2_bound, r.sum_bound);
    [(r1, r2.min(sb - r1)), (r1.min(sb - r2), r2)]
}

/// Achievable corners in the nonnegative quadrant; `None` when a bound is
/// negative (the pentagon then misses the quadrant entirely).
fn corners_achievable(r: &GpRates) -> Option<[(f64, f64); 2]> {
    const ZERO_SLACK: f64 = 1e-12;
    if r.r1_bound < -ZERO_SLACK || r.r2_bound < -ZERO_SLACK || r.sum_bound < -ZERO_SLACK {
        return None;
    }
    let r1 = r.r1_bound.max(0.0);
    let r2 = r.r2_bound.max(0.0);
    let sb = r.sum_bound.max(0.0);
    let a1 = r1.min(sb);
    let b2 = r2.min(sb);
    Some([
        (a1, r2.min((sb - a1).max(0.0))),
        (r1.min((sb - b2).max(0.0)), b2),
    ])
}

pub fn search_gp_region(ch: &ChannelSpec, cfg: &SearchConfig) -> Result<SearchOutcome> {
    ch.require_independent_states()?;
    let par = Parameterization::new(ch, cfg)?;
    let weights = if cfg.weights.is_empty() {
        vec![0.5]
    } else {
        cfg.weights.clone()
    };

    let runs: Vec<Result<(Vec<(f64, f64)>, f64, usize)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let w = weights[restart % weights.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed ^ (restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let mut points = Vec::new();
            let mut best_sum = f64::NEG_INFINITY;
            let mut evals = 0usize;
            if cfg.iters == 0 {
                return Ok((points, best_sum, evals));
            }
            let score_of = |rates: &GpRates| {
                corners_raw(rates)
                    .iter()
                    .map(|&(x, y)| w * x + (1.0 - w) * y)
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let collect = |rates: &GpRates, points: &mut Vec<(f64, f64)>, best: &mut f64| {
                if let Some(cs) = corners_achievable(rates) {
                    points.extend_from_slice(&cs);
                    *best = best.max(rates.sum_bound);
                }
            };
            let mut logits = par.init(&mut rng);
            // Acceptance key: feasibility first, then score; over-budget
            // points rank by how little they overshoot, so restarts that
            // start outside the budget walk in instead of stalling.
            let mut current = match par.realize(ch, &logits)? {
                Some(a) => {
                    let rates = gp_rates(ch, &a)?;
                    evals += 1;
                    collect(&rates, &mut points, &mut best_sum);
                    (true, score_of(&rates))
                }
                None => (false, -par.cost_excess(ch, &logits)),
            };
            for iter in 0..cfg.iters {
                let step = cfg.step / (1.0 + iter as f64 / 150.0);
                let cand = par.perturb(&logits, step, &mut rng);
                let key = match par.realize(ch, &cand)? {
                    Some(a) => {
                        let rates = gp_rates(ch, &a)?;
                        evals += 1;
                        let key = (true, score_of(&rates));
                        if key > current {
                            collect(&rates, &mut points, &mut best_sum);
                        }
                        key
                    }
                    None => (false, -par.cost_excess(ch, &cand)),
                };
                if key > current {
                    current = key;
                    logits = cand;
                }
            }
            Ok((points, best_sum, evals))
        })
        .collect();

    let mut points = Vec::new();
    let mut best_sum = f64::NEG_INFINITY;
    let mut evaluations = 0usize;
    for run in runs {
        let (p, b, e) = run?;
        points.extend(p);
        best_sum = best_sum.max(b);
        evaluations += e;
    }
    let points_collected = points.len();
    Ok(SearchOutcome {
        region: region_hull(&points),
        best_sum_bound: best_sum.max(0.0),
        evaluations,
        points_collected,
    })
}
