use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::builtin_example1;
use crate::error::{Error, Result};
use crate::modrings::{vec_add, RingSpec, RingVector};
use crate::probinfo::Pmf;
use crate::regions::CondLaw;

use super::code::{
    candidate_sum, channel_input, decode, encode, pair_for_mac, CoverOutcome, DecodeOutcome,
    InputLaw,
};

/// Shift-layer size: either a fixed length or a rate in bits per symbol,
/// resolved to l = round(rate * n). Deserializes untagged: integers are fixed
/// lengths, floats are rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LChoice {
    Fixed(usize),
    BinRate(f64),
}

impl LChoice {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        match *self {
            LChoice::Fixed(l) => Ok(l),
            LChoice::BinRate(f) => {
                if !f.is_finite() || f < 0.0 {
                    return Err(Error::Domain(format!(
                        "shift-layer rate must be a nonnegative finite number, got {f}"
                    )));
                }
                Ok((f * n as f64).round() as usize)
            }
        }
    }
}

fn default_epsilon_c() -> f64 {
    1.5
}

fn default_decode() -> bool {
    true
}

/// Experiment configuration for the modulo-4 example. The typicality
/// tolerance follows the schedule epsilon = epsilon_c / sqrt(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_list: Vec<usize>,
    pub k1: usize,
    pub k2: usize,
    pub l: LChoice,
    #[serde(default = "default_epsilon_c")]
    pub epsilon_c: f64,
    pub trials: u64,
    pub seed: u64,
    /// When false, trials stop after the covering stage (encoder error
    /// tallies only) — useful when the decoder's candidate enumeration would
    /// blow the resource cap.
    #[serde(default = "default_decode")]
    pub decode: bool,
}

/// Per-block-length tallies. `e1`/`e2` count covering failures over all
/// trials; `decode_attempts` counts trials where both encoders succeeded and
/// decoding ran; `ed` counts decoder failures among those; `unique_decodes`
/// and `correct_decodes` count decoded trials and correct ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub e1: u64,
    pub e2: u64,
    pub decode_attempts: u64,
    pub ed: u64,
    pub unique_decodes: u64,
    pub correct_decodes: u64,
}

impl TrialCounts {
    fn merge(mut self, other: TrialCounts) -> TrialCounts {
        self.e1 += other.e1;
        self.e2 += other.e2;
        self.decode_attempts += other.decode_attempts;
        self.ed += other.ed;
        self.unique_decodes += other.unique_decodes;
        self.correct_decodes += other.correct_decodes;
        self
    }
}

/// Error-event statistics for one block length. `e1_rate`/`e2_rate` are
/// covering-failure frequencies over all trials; `ed_rate` is the decoder
/// failure frequency over decode attempts; `conditional_decode_accuracy` is
/// the frequency of correct message pairs among unique decodes. Each is None
/// when its denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub e1_rate: Option<f64>,
    pub e2_rate: Option<f64>,
    pub ed_rate: Option<f64>,
    pub conditional_decode_accuracy: Option<f64>,
}

impl TrialStats {
    fn from_counts(trials: u64, c: &TrialCounts) -> Self {
        let frac = |num: u64, den: u64| {
            if den == 0 {
                None
            } else {
                Some(num as f64 / den as f64)
            }
        };
        TrialStats {
            trials,
            e1_rate: frac(c.e1, trials),
            e2_rate: frac(c.e2, trials),
            ed_rate: frac(c.ed, c.decode_attempts),
            conditional_decode_accuracy: frac(c.correct_decodes, c.unique_decodes),
        }
    }
}

/// One block length's results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example1Row {
    pub n: usize,
    pub l: usize,
    pub epsilon: f64,
    pub stats: TrialStats,
    pub counts: TrialCounts,
}

/// Target conditional law of encoder 1's codeword symbols: v uniform on
/// {s, s+2}, with the uniform state marginal attached.
pub fn example1_target1() -> CondLaw {
    let rows = (0..4)
        .map(|s| {
            let mut p = vec![0.0; 4];
            p[s] = 0.5;
            p[(s + 2) % 4] = 0.5;
            Pmf::new(p).expect("valid pmf")
        })
        .collect();
    CondLaw::new(Pmf::uniform(4).expect("nonempty"), rows).expect("consistent law")
}

/// Target conditional law of encoder 2's codeword symbols: v uniform on
/// {s, s+1}, with the uniform state marginal attached.
pub fn example1_target2() -> CondLaw {
    let rows = (0..4)
        .map(|s| {
            let mut p = vec![0.0; 4];
            p[s] = 0.5;
            p[(s + 1) % 4] = 0.5;
            Pmf::new(p).expect("valid pmf")
        })
        .collect();
    CondLaw::new(Pmf::uniform(4).expect("nonempty"), rows).expect("consistent law")
}

/// Joint law of (codeword sum, channel output) on the noiseless modulo-4
/// example: the sum is uniform and the output copies it.
pub fn example1_sum_law() -> CondLaw {
    let rows = (0..4)
        .map(|v| Pmf::delta(4, v).expect("in range"))
        .collect();
    CondLaw::new(Pmf::uniform(4).expect("nonempty"), rows).expect("consistent law")
}

/// SplitMix64-style mixer deriving one trial's generator seed from the
/// experiment seed, the block-length index, and the trial index.
fn trial_seed(seed: u64, n_index: u64, trial: u64) -> u64 {
    let mut z = seed
        .wrapping_add(n_index.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(trial.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Run the Thm.-1-style scheme on the modulo-4 example: per trial, fresh
/// codes sharing one shift layer, uniform independent states, typicality
/// covering at both encoders, noiseless transmission, and (optionally) the
/// exhaustive sum decoder. Deterministic given the config; trials run in
/// parallel and merge by commutative integer sums.
pub fn run_example1(cfg: &SimConfig) -> Result<Vec<Example1Row>> {
    if !(cfg.epsilon_c > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon_c must be positive, got {}",
            cfg.epsilon_c
        )));
    }
    if cfg.n_list.is_empty() {
        return Err(Error::Domain("n_list must be nonempty".into()));
    }
    let ring = RingSpec::new(2, 2)?;
    let channel = builtin_example1();
    let w_law = Pmf::new(vec![0.5, 0.5, 0.0, 0.0])?;
    let target1 = example1_target1();
    let target2 = example1_target2();
    let sum_law = example1_sum_law();
    let x_law = InputLaw::deterministic_difference(ring);

    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for (n_index, &n) in cfg.n_list.iter().enumerate() {
        let l = cfg.l.resolve(n)?;
        let epsilon = cfg.epsilon_c / (n as f64).sqrt();
        // Fail fast on configurations the caps reject, rather than inside the
        // parallel loop.
        pair_for_mac(ring, n, cfg.k1, cfg.k2, l, &w_law, epsilon, cfg.seed)?;

        let counts = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<TrialCounts> {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, n_index as u64, trial));
                let code_seed = rng.next_u64();
                let (code1, code2) =
                    pair_for_mac(ring, n, cfg.k1, cfg.k2, l, &w_law, epsilon, code_seed)?;
                let s1: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                let s2: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                let u1 = draw_message(cfg.k1, ring, &mut rng)?;
                let u2 = draw_message(cfg.k2, ring, &mut rng)?;

                let enc1 = encode(&code1, &u1, &s1, &target1, epsilon)?;
                let enc2 = encode(&code2, &u2, &s2, &target2, epsilon)?;
                let mut c = TrialCounts {
                    e1: enc1.is_failure() as u64,
                    e2: enc2.is_failure() as u64,
                    ..TrialCounts::default()
                };
                let (v1, w1) = match enc1 {
                    CoverOutcome::Covered { v, w, .. } => (v, w),
                    CoverOutcome::CoveringFailure => return Ok(c),
                };
                let (v2, w2) = match enc2 {
                    CoverOutcome::Covered { v, w, .. } => (v, w),
                    CoverOutcome::CoveringFailure => return Ok(c),
                };

                let x1 = channel_input(&v1, &s1, &x_law, &mut rng)?;
                let x2 = channel_input(&v2, &s2, &x_law, &mut rng)?;
                let cost1 = channel.cost_report1(&x1, &s1)?;
                let cost2 = channel.cost_report2(&x2, &s2)?;
                assert_eq!(
                    (cost1.average_cost, cost2.average_cost),
                    (0.0, 0.0),
                    "difference inputs must be cost-free"
                );
                let y = channel.sample_output(&x1, &x2, &s1, &s2, &mut rng)?;

                // The sum the decoder would form from the true triple must
                // equal the encoder-side codeword sum, exactly.
                let w_sum = vec_add(&w1, &w2)?;
                let v_sum = vec_add(&v1, &v2)?;
                assert_eq!(
                    candidate_sum(&code1, &code2, &u1, &u2, &w_sum)?,
                    v_sum,
                    "decoder and encoder sum algebra must agree"
                );

                if !cfg.decode {
                    return Ok(c);
                }
                c.decode_attempts = 1;
                match decode(&code1, &code2, &y, &sum_law, epsilon)? {
                    DecodeOutcome::Decoded(pair) => {
                        c.unique_decodes = 1;
                        let correct = pair.u1 == u1 && pair.u2 == u2;
                        assert!(
                            correct,
                            "a unique decode on the noiseless channel must be correct"
                        );
                        c.correct_decodes = correct as u64;
                    }
                    DecodeOutcome::NoSurvivor | DecodeOutcome::Ambiguous => {
                        c.ed = 1;
                    }
                }
                Ok(c)
            })
            .try_reduce(TrialCounts::default, |a, b| Ok(a.merge(b)))?;

        rows.push(Example1Row {
            n,
            l,
            epsilon,
            stats: TrialStats::from_counts(cfg.trials, &counts),
            counts,
        });
    }
    Ok(rows)
}

fn draw_message(k: usize, ring: RingSpec, rng: &mut impl Rng) -> Result<RingVector> {
    RingVector::new(ring, (0..k).map(|_| rng.gen_range(0..2u32)).collect())
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.11e}"),
        None => String::new(),
    }
}

/// Render experiment rows as CSV (one line per block length; empty cells for
/// undefined rates).
pub fn stats_to_csv(rows: &[Example1Row]) -> String {
    let mut out = String::from(
        "n,l,epsilon,trials,e1_rate,e2_rate,ed_rate,conditional_decode_accuracy\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.11e},{},{},{},{},{}\n",
            r.n,
            r.l,
            r.epsilon,
            r.stats.trials,
            fmt_opt(r.stats.e1_rate),
            fmt_opt(r.stats.e2_rate),
            fmt_opt(r.stats.ed_rate),
            fmt_opt(r.stats.conditional_decode_accuracy),
        ));
    }
    out
}

/// Render experiment rows as pretty JSON.
pub fn stats_to_json(rows: &[Example1Row]) -> Result<String> {
    serde_json::to_string_pretty(rows)
        .map_err(|e| Error::Load(format!("cannot serialize stats: {e}")))
}
