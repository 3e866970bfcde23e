//! Memoryless two-user channel models p(y | x1, x2, s1, s2) with per-encoder
//! state laws, input cost tables and cost budgets, plus a JSON config format
//! for loading and saving them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probinfo::{Pmf, MASS_TOL};

/// Alphabet sizes of the two inputs, two states and the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub x1: usize,
    pub x2: usize,
    pub s1: usize,
    pub s2: usize,
    pub y: usize,
}

/// Per-letter cost table c(x, s), row-major over x then s. Costs may depend
/// on both the input letter and the local state.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    x_size: usize,
    s_size: usize,
    values: Vec<f64>,
}

impl CostTable {
    pub fn new(x_size: usize, s_size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != x_size * s_size {
            return Err(Error::Dimension(format!(
                "cost table needs {} entries, got {}",
                x_size * s_size,
                values.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Domain(format!(
                    "cost[{i}] = {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(CostTable {
            x_size,
            s_size,
            values,
        })
    }

    /// Cost independent of the state.
    pub fn from_input_costs(costs: &[f64], s_size: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(costs.len() * s_size);
        for &c in costs {
            for _ in 0..s_size {
                values.push(c);
            }
        }
        CostTable::new(costs.len(), s_size, values)
    }

    pub fn get(&self, x: usize, s: usize) -> f64 {
        self.values[x * self.s_size + s]
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Time-average cost of an input sequence against a state sequence.
    pub fn average(&self, xs: &[usize], ss: &[usize]) -> Result<f64> {
        if xs.len() != ss.len() {
            return Err(Error::Dimension(format!(
                "input length {} vs state length {}",
                xs.len(),
                ss.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::Domain("empty sequence".into()));
        }
        let mut total = 0.0;
        for (&x, &s) in xs.iter().zip(ss) {
            if x >= self.x_size || s >= self.s_size {
                return Err(Error::Domain(format!(
                    "symbol ({x}, {s}) outside {}x{} cost table",
                    self.x_size, self.s_size
                )));
            }
            total += self.get(x, s);
        }
        Ok(total / xs.len() as f64)
    }
}

/// Average cost of a sequence pair together with the budget it is checked
/// against.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CostReport {
    pub average_cost: f64,
    pub budget: f64,
    pub satisfied: bool,
}

impl CostReport {
    pub fn new(average_cost: f64, budget: f64) -> Self {
        CostReport {
            average_cost,
            budget,
            satisfied: average_cost <= budget + 1e-9,
        }
    }
}

/// A memoryless MAC with two additive-state inputs: kernel p(y|x1,x2,s1,s2),
/// a joint state law (stored in general form; rate-region code requires the
/// independent product case), cost tables and budgets.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    alphabets: Alphabets,
    /// Row-major over (s1, s2, x1, x2, y).
    kernel: Vec<f64>,
    /// Nonzero outputs per (s1, s2, x1, x2), for fast sampling and sums.
    support: Vec<Vec<(usize, f64)>>,
    /// Row-major over (s1, s2).
    state_joint: Vec<f64>,
    cost1: CostTable,
    cost2: CostTable,
    tau1: f64,
    tau2: f64,
}

impl ChannelSpec {
    pub fn new_correlated(
        alphabets: Alphabets,
        kernel: Vec<f64>,
        state_joint: Vec<f64>,
        cost1: CostTable,
        cost2: CostTable,
        tau1: f64,
        tau2: f64,
    ) -> Result<Self> {
        let a = alphabets;
        if a.x1 == 0 || a.x2 == 0 || a.s1 == 0 || a.s2 == 0 || a.y == 0 {
            return Err(Error::Dimension("alphabet sizes must be positive".into()));
        }
        let rows = a.s1 * a.s2 * a.x1 * a.x2;
        if kernel.len() != rows * a.y {
            return Err(Error::Dimension(format!(
                "kernel needs {} entries, got {}",
                rows * a.y,
                kernel.len()
            )));
        }
        let mut kernel = kernel;
        for row in 0..rows {
            let slice = &mut kernel[row * a.y..(row + 1) * a.y];
            let mut sum = 0.0;
            for (i, v) in slice.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::Domain(format!(
                        "kernel[{}] = {v} must be finite and nonnegative",
                        row * a.y + i
                    )));
                }
                sum += *v;
            }
            if (sum - 1.0).abs() > MASS_TOL {
                return Err(Error::Domain(format!(
                    "kernel row {row} sums to {sum}, not within {MASS_TOL} of 1"
                )));
            }
            for v in slice.iter_mut() {
                *v /= sum;
            }
        }
        if state_joint.len() != a.s1 * a.s2 {
            return Err(Error::Dimension(format!(
                "state law needs {} entries, got {}",
                a.s1 * a.s2,
                state_joint.len()
            )));
        }
        let mut state_joint = state_joint;
        let mut sum = 0.0;
        for (i, v) in state_joint.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Domain(format!(
                    "state_joint[{i}] = {v} must be finite and nonnegative"
                )));
            }
            sum += *v;
        }
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::Domain(format!(
                "state law sums to {sum}, not within {MASS_TOL} of 1"
            )));
        }
        for v in state_joint.iter_mut() {
            *v /= sum;
        }
        if cost1.x_size() != a.x1 || cost1.s_size() != a.s1 {
            return Err(Error::Dimension("cost1 shape mismatch".into()));
        }
        if cost2.x_size() != a.x2 || cost2.s_size() != a.s2 {
            return Err(Error::Dimension("cost2 shape mismatch".into()));
        }
        if !tau1.is_finite() || tau1 < 0.0 || !tau2.is_finite() || tau2 < 0.0 {
            return Err(Error::Domain("budgets must be finite and nonnegative".into()));
        }
        let mut support = Vec::with_capacity(rows);
        for row in 0..rows {
            let slice = &kernel[row * a.y..(row + 1) * a.y];
            support.push(
                slice
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(y, p)| (y, *p))
                    .collect(),
            );
        }
        Ok(ChannelSpec {
            alphabets: a,
            kernel,
            support,
            state_joint,
            cost1,
            cost2,
            tau1,
            tau2,
        })
    }

    pub fn new_independent(
        alphabets: Alphabets,
        kernel: Vec<f64>,
        state1: Pmf,
        state2: Pmf,
        cost1: CostTable,
        cost2: CostTable,
        tau1: f64,
        tau2: f64,
    ) -> Result<Self> {
        if state1.len() != alphabets.s1 || state2.len() != alphabets.s2 {
            return Err(Error::Dimension("state pmf length mismatch".into()));
        }
        let mut joint = Vec::with_capacity(alphabets.s1 * alphabets.s2);
        for i in 0..alphabets.s1 {
            for j in 0..alphabets.s2 {
                joint.push(state1.get(i) * state2.get(j));
            }
        }
        ChannelSpec::new_correlated(alphabets, kernel, joint, cost1, cost2, tau1, tau2)
    }

    pub fn alphabets(&self) -> Alphabets {
        self.alphabets
    }

    fn row(&self, s1: usize, s2: usize, x1: usize, x2: usize) -> usize {
        ((s1 * self.alphabets.s2 + s2) * self.alphabets.x1 + x1) * self.alphabets.x2 + x2
    }

    pub fn kernel_prob(&self, s1: usize, s2: usize, x1: usize, x2: usize, y: usize) -> f64 {
        self.kernel[self.row(s1, s2, x1, x2) * self.alphabets.y + y]
    }

    /// Nonzero (y, p(y|...)) pairs for one input/state combination.
    pub fn y_support(&self, s1: usize, s2: usize, x1: usize, x2: usize) -> &[(usize, f64)] {
        &self.support[self.row(s1, s2, x1, x2)]
    }

    pub fn state_prob(&self, s1: usize, s2: usize) -> f64 {
        self.state_joint[s1 * self.alphabets.s2 + s2]
    }

    pub fn state1_marginal(&self) -> Pmf {
        let mut w = vec![0.0; self.alphabets.s1];
        for s1 in 0..self.alphabets.s1 {
            for s2 in 0..self.alphabets.s2 {
                w[s1] += self.state_prob(s1, s2);
            }
        }
        Pmf::new(w).expect("marginal of a valid joint")
    }

    pub fn state2_marginal(&self) -> Pmf {
        let mut w = vec![0.0; self.alphabets.s2];
        for s1 in 0..self.alphabets.s1 {
            for s2 in 0..self.alphabets.s2 {
                w[s2] += self.state_prob(s1, s2);
            }
        }
        Pmf::new(w).expect("marginal of a valid joint")
    }

    /// Whether the stored state law factors as a product of its marginals.
    pub fn states_independent(&self, tol: f64) -> bool {
        let m1 = self.state1_marginal();
        let m2 = self.state2_marginal();
        for s1 in 0..self.alphabets.s1 {
            for s2 in 0..self.alphabets.s2 {
                if (self.state_prob(s1, s2) - m1.get(s1) * m2.get(s2)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Guard used by the rate-region code, which is stated for independent
    /// states only.
    pub fn require_independent_states(&self) -> Result<()> {
        if !self.states_independent(1e-9) {
            return Err(Error::CorrelatedStates(
                "rate-region evaluation requires independent per-encoder states".into(),
            ));
        }
        Ok(())
    }

    pub fn cost1(&self) -> &CostTable {
        &self.cost1
    }

    pub fn cost2(&self) -> &CostTable {
        &self.cost2
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn cost_report1(&self, xs: &[usize], ss: &[usize]) -> Result<CostReport> {
        Ok(CostReport::new(self.cost1.average(xs, ss)?, self.tau1))
    }

    pub fn cost_report2(&self, xs: &[usize], ss: &[usize]) -> Result<CostReport> {
        Ok(CostReport::new(self.cost2.average(xs, ss)?, self.tau2))
    }

    /// Draw one output sequence coordinate-by-coordinate (memoryless).
    pub fn sample_output(
        &self,
        x1: &[usize],
        x2: &[usize],
        s1: &[usize],
        s2: &[usize],
        rng: &mut impl rand::Rng,
    ) -> Result<Vec<usize>> {
        let n = x1.len();
        if x2.len() != n || s1.len() != n || s2.len() != n {
            return Err(Error::Dimension("sequence length mismatch".into()));
        }
        let mut y = Vec::with_capacity(n);
        for j in 0..n {
            let sup = self.y_support(s1[j], s2[j], x1[j], x2[j]);
            if sup.len() == 1 {
                y.push(sup[0].0);
                continue;
            }
            let mut u: f64 = rng.gen_range(0.0..1.0);
            let mut chosen = sup[sup.len() - 1].0;
            for &(sym, p) in sup {
                if u < p {
                    chosen = sym;
                    break;
                }
                u -= p;
            }
            y.push(chosen);
        }
        Ok(y)
    }
}

/// The quaternary doubly-dirty MAC: Y = X1 + S1 + X2 + S2 over Z4, states
/// i.i.d. uniform, encoder 1 charged on {1,3}, encoder 2 charged on {2,3},
/// both budgets zero (so X1 lives in {0,2} and X2 in {0,1}).
pub fn builtin_example1() -> ChannelSpec {
    let a = Alphabets {
        x1: 4,
        x2: 4,
        s1: 4,
        s2: 4,
        y: 4,
    };
    let mut kernel = vec![0.0; 4 * 4 * 4 * 4 * 4];
    for s1 in 0..4 {
        for s2 in 0..4 {
            for x1 in 0..4 {
                for x2 in 0..4 {
                    let y = (x1 + s1 + x2 + s2) % 4;
                    let row = ((s1 * 4 + s2) * 4 + x1) * 4 + x2;
                    kernel[row * 4 + y] = 1.0;
                }
            }
        }
    }
    let c1 = CostTable::from_input_costs(&[0.0, 1.0, 0.0, 1.0], 4).expect("static table");
    let c2 = CostTable::from_input_costs(&[0.0, 0.0, 1.0, 1.0], 4).expect("static table");
    ChannelSpec::new_independent(
        a,
        kernel,
        Pmf::uniform(4).expect("static"),
        Pmf::uniform(4).expect("static"),
        c1,
        c2,
        0.0,
        0.0,
    )
    .expect("static channel is valid")
}

/// The binary doubly-dirty MAC: Y = X1 xor S1 xor X2 xor S2, states i.i.d.
/// uniform bits, unit cost on input 1 for both encoders, budgets supplied by
/// the caller.
pub fn builtin_binary_dirty(tau1: f64, tau2: f64) -> Result<ChannelSpec> {
    let a = Alphabets {
        x1: 2,
        x2: 2,
        s1: 2,
        s2: 2,
        y: 2,
    };
    let mut kernel = vec![0.0; 2 * 2 * 2 * 2 * 2];
    for s1 in 0..2 {
        for s2 in 0..2 {
            for x1 in 0..2 {
                for x2 in 0..2 {
                    let y = (x1 + s1 + x2 + s2) % 2;
                    let row = ((s1 * 2 + s2) * 2 + x1) * 2 + x2;
                    kernel[row * 2 + y] = 1.0;
                }
            }
        }
    }
    let c1 = CostTable::from_input_costs(&[0.0, 1.0], 2)?;
    let c2 = CostTable::from_input_costs(&[0.0, 1.0], 2)?;
    ChannelSpec::new_independent(
        a,
        kernel,
        Pmf::uniform(2)?,
        Pmf::uniform(2)?,
        c1,
        c2,
        tau1,
        tau2,
    )
}

// --- JSON config format -----------------------------------------------------

/// Probability entries may be plain numbers, decimal strings, or simple
/// fractions like "1/3".
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub(crate) enum ProbValue {
    Num(f64),
    Text(String),
}

impl ProbValue {
    pub(crate) fn to_f64(&self, field: &str, index: usize) -> Result<f64> {
        match self {
            ProbValue::Num(v) => Ok(*v),
            ProbValue::Text(s) => {
                let s = s.trim();
                if let Some((num, den)) = s.split_once('/') {
                    let n: f64 = num.trim().parse().map_err(|_| bad_prob(field, index, s))?;
                    let d: f64 = den.trim().parse().map_err(|_| bad_prob(field, index, s))?;
                    if d == 0.0 {
                        return Err(bad_prob(field, index, s));
                    }
                    return Ok(n / d);
                }
                s.parse::<f64>().map_err(|_| bad_prob(field, index, s))
            }
        }
    }
}

fn bad_prob(field: &str, index: usize, s: &str) -> Error {
    Error::Load(format!("{field}[{index}]: cannot parse `{s}` as a number"))
}

#[derive(Debug, Deserialize, Serialize)]
struct ChannelConfig {
    alphabets: Alphabets,
    /// Flattened row-major over (s1, s2, x1, x2, y).
    kernel: Vec<ProbValue>,
    state1: Vec<ProbValue>,
    state2: Vec<ProbValue>,
    /// Flattened row-major over (x, s).
    cost1: Vec<ProbValue>,
    cost2: Vec<ProbValue>,
    tau1: f64,
    tau2: f64,
}

pub(crate) fn parse_vec(raw: &[ProbValue], field: &str) -> Result<Vec<f64>> {
    raw.iter()
        .enumerate()
        .map(|(i, v)| v.to_f64(field, i))
        .collect()
}

/// Parse a channel from its JSON document.
pub fn load_channel(doc: &str) -> Result<ChannelSpec> {
    let cfg: ChannelConfig =
        serde_json::from_str(doc).map_err(|e| Error::Load(format!("channel config: {e}")))?;
    let a = cfg.alphabets;
    let kernel = parse_vec(&cfg.kernel, "kernel")?;
    let state1 = Pmf::new(parse_vec(&cfg.state1, "state1")?)
        .map_err(|e| Error::Load(format!("state1: {e}")))?;
    let state2 = Pmf::new(parse_vec(&cfg.state2, "state2")?)
        .map_err(|e| Error::Load(format!("state2: {e}")))?;
    let cost1 = CostTable::new(a.x1, a.s1, parse_vec(&cfg.cost1, "cost1")?)
        .map_err(|e| Error::Load(format!("cost1: {e}")))?;
    let cost2 = CostTable::new(a.x2, a.s2, parse_vec(&cfg.cost2, "cost2")?)
        .map_err(|e| Error::Load(format!("cost2: {e}")))?;
    ChannelSpec::new_independent(a, kernel, state1, state2, cost1, cost2, cfg.tau1, cfg.tau2)
        .map_err(|e| Error::Load(format!("channel config: {e}")))
}

/// Serialize a channel (with independent states) back to the config format.
pub fn channel_to_config_json(ch: &ChannelSpec) -> Result<String> {
    ch.require_independent_states()?;
    let a = ch.alphabets();
    let cfg = ChannelConfig {
        alphabets: a,
        kernel: ch.kernel.iter().map(|&v| ProbValue::Num(v)).collect(),
        state1: ch
            .state1_marginal()
            .as_slice()
            .iter()
            .map(|&v| ProbValue::Num(v))
            .collect(),
        state2: ch
            .state2_marginal()
            .as_slice()
            .iter()
            .map(|&v| ProbValue::Num(v))
            .collect(),
        cost1: ch.cost1.values().iter().map(|&v| ProbValue::Num(v)).collect(),
        cost2: ch.cost2.values().iter().map(|&v| ProbValue::Num(v)).collect(),
        tau1: ch.tau1,
        tau2: ch.tau2,
    };
    serde_json::to_string_pretty(&cfg).map_err(|e| Error::Load(e.to_string()))
}
