use crate::error::{Error, Result};

use super::pmf::Pmf;

/// Slack on the typicality comparison so that sequences sitting exactly on the
/// boundary (|freq - p| == eps * p in real arithmetic) are not dropped by f64
/// rounding. Count frequencies are spaced >= 1/n apart, so any slack far below
/// that cannot admit a genuinely atypical sequence.
const TYP_SLACK: f64 = 1e-9;

#[inline]
pub(crate) fn count_ok(count: usize, n: usize, pa: f64, epsilon: f64) -> bool {
    let freq = count as f64 / n as f64;
    (freq - pa).abs() <= epsilon * pa + TYP_SLACK
}

/// Robust typicality: `seq` is epsilon-typical for `p` when every symbol `a`
/// satisfies |freq(a)/n - p(a)| <= epsilon * p(a). Symbols with p(a) = 0 must
/// not occur at all. Out-of-alphabet symbols make the sequence atypical.
pub fn is_typical(seq: &[usize], p: &Pmf, epsilon: f64) -> bool {
    if seq.is_empty() {
        return false;
    }
    let m = p.len();
    let mut counts = vec![0usize; m];
    for &s in seq {
        if s >= m {
            return false;
        }
        counts[s] += 1;
    }
    (0..m).all(|a| count_ok(counts[a], seq.len(), p.get(a), epsilon))
}

/// Joint robust typicality of a pair sequence against a joint law given as a
/// row-major `m_a x m_b` table.
pub fn is_jointly_typical(
    seq_a: &[usize],
    seq_b: &[usize],
    joint: &[f64],
    m_b: usize,
    epsilon: f64,
) -> bool {
    if seq_a.len() != seq_b.len() || seq_a.is_empty() {
        return false;
    }
    let m_a = joint.len() / m_b;
    let mut counts = vec![0usize; joint.len()];
    for (&a, &b) in seq_a.iter().zip(seq_b) {
        if a >= m_a || b >= m_b {
            return false;
        }
        counts[a * m_b + b] += 1;
    }
    counts
        .iter()
        .zip(joint)
        .all(|(&c, &p)| count_ok(c, seq_a.len(), p, epsilon))
}

/// One block of a product typical set: `block_len` i.i.d. coordinates drawn
/// from `law`.
#[derive(Debug, Clone)]
pub struct TypicalComponent {
    pub law: Pmf,
    pub block_len: usize,
}

/// Specification of a product of per-component typical sets, all sharing one
/// epsilon.
#[derive(Debug, Clone)]
pub struct TypicalSetSpec {
    components: Vec<TypicalComponent>,
    epsilon: f64,
}

impl TypicalSetSpec {
    pub fn new(components: Vec<TypicalComponent>, epsilon: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("no components".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        for (i, c) in components.iter().enumerate() {
            if c.block_len == 0 {
                return Err(Error::Domain(format!("component {i} has block length 0")));
            }
        }
        Ok(TypicalSetSpec { components, epsilon })
    }

    pub fn components(&self) -> &[TypicalComponent] {
        &self.components
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn total_len(&self) -> usize {
        self.components.iter().map(|c| c.block_len).sum()
    }
}

/// Enumerate, in lexicographic order, all epsilon-typical sequences of one
/// component (alphabet-indexed symbols).
fn enumerate_component(law: &Pmf, k: usize, epsilon: f64, cap: u64) -> Result<Vec<Vec<usize>>> {
    let m = law.len();
    let (lo, hi) = count_bounds(law, k, epsilon);
    let mut out = Vec::new();
    let mut seq = vec![0usize; k];
    let mut counts = vec![0usize; m];
    dfs(law, k, 0, &lo, &hi, &mut counts, &mut seq, &mut out, cap)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    law: &Pmf,
    k: usize,
    depth: usize,
    lo: &[usize],
    hi: &[usize],
    counts: &mut [usize],
    seq: &mut [usize],
    out: &mut Vec<Vec<usize>>,
    cap: u64,
) -> Result<()> {
    if depth == k {
        for a in 0..law.len() {
            if counts[a] < lo[a] {
                return Ok(());
            }
        }
        if out.len() as u64 >= cap {
            return Err(Error::Resource(format!(
                "typical set enumeration exceeds cap {cap}"
            )));
        }
        out.push(seq.to_vec());
        return Ok(());
    }
    let remaining = k - depth - 1;
    for a in 0..law.len() {
        if counts[a] + 1 > hi[a] {
            continue;
        }
        counts[a] += 1;
        // Prune: symbols below their floor must still be reachable.
        let deficit: usize = (0..law.len())
            .map(|b| lo[b].saturating_sub(counts[b]))
            .sum();
        if deficit <= remaining {
            seq[depth] = a;
            dfs(law, k, depth + 1, lo, hi, counts, seq, out, cap)?;
        }
        counts[a] -= 1;
    }
    Ok(())
}

/// Enumerate the full product typical set as concatenated sequences, in
/// lexicographic order (component-major). `cap` bounds the number of
/// sequences produced; exceeding it is a resource error.
pub fn enumerate_product_typical(spec: &TypicalSetSpec, cap: u64) -> Result<Vec<Vec<usize>>> {
    let mut lists = Vec::with_capacity(spec.components.len());
    for c in &spec.components {
        lists.push(enumerate_component(&c.law, c.block_len, spec.epsilon, cap)?);
    }
    // Product size check before materializing.
    let mut total: u64 = 1;
    for l in &lists {
        total = total.saturating_mul(l.len() as u64);
        if total > cap {
            return Err(Error::Resource(format!(
                "product typical set exceeds cap {cap}"
            )));
        }
    }
    let total_len = spec.total_len();
    let mut out: Vec<Vec<usize>> = vec![Vec::with_capacity(total_len)];
    for l in &lists {
        let mut next = Vec::with_capacity(out.len() * l.len());
        for prefix in &out {
            for tail in l {
                let mut s = prefix.clone();
                s.extend_from_slice(tail);
                next.push(s);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Exact cardinality of the product typical set, computed from multinomial
/// counts over admissible type classes (no enumeration). Errors out once the
/// running product exceeds `cap`.
pub fn product_typical_cardinality(spec: &TypicalSetSpec, cap: u64) -> Result<u64> {
    let mut total: u128 = 1;
    for c in &spec.components {
        total = total.saturating_mul(component_cardinality(&c.law, c.block_len, spec.epsilon));
        if total > cap as u128 {
            return Err(Error::Resource(format!(
                "product typical set exceeds cap {cap}"
            )));
        }
    }
    Ok(total as u64)
}

fn component_cardinality(law: &Pmf, k: usize, epsilon: f64) -> u128 {
    let fact: Vec<u128> = {
        let mut v = vec![1u128; k + 1];
        for i in 1..=k {
            v[i] = v[i - 1] * i as u128;
        }
        v
    };
    let (lo, hi) = count_bounds(law, k, epsilon);
    let mut total = 0u128;
    let mut counts = vec![0usize; law.len()];
    sum_multinomials(0, k, &lo, &hi, &mut counts, &fact, &mut total);
    total
}

fn sum_multinomials(
    a: usize,
    remaining: usize,
    lo: &[usize],
    hi: &[usize],
    counts: &mut [usize],
    fact: &[u128],
    total: &mut u128,
) {
    let m = lo.len();
    if a == m {
        if remaining == 0 {
            let k = counts.iter().sum::<usize>();
            let mut v = fact[k];
            for &c in counts.iter() {
                v /= fact[c];
            }
            *total += v;
        }
        return;
    }
    if lo[a] > hi[a] {
        return;
    }
    let max_c = hi[a].min(remaining);
    for c in lo[a]..=max_c {
        counts[a] = c;
        sum_multinomials(a + 1, remaining - c, lo, hi, counts, fact, total);
    }
    counts[a] = 0;
}

/// log2 cardinality of the product typical set, computed by summing exact
/// multinomial counts over admissible type classes (no enumeration), so large
/// block lengths are fine.
pub fn product_typical_log2_cardinality(spec: &TypicalSetSpec) -> f64 {
    let mut total = 0.0;
    for c in &spec.components {
        total += component_log2_cardinality(&c.law, c.block_len, spec.epsilon);
    }
    total
}

/// Admissible per-symbol count ranges, derived from the same scalar predicate
/// as `is_typical` so enumeration and the membership test can never disagree.
fn count_bounds(law: &Pmf, k: usize, epsilon: f64) -> (Vec<usize>, Vec<usize>) {
    let m = law.len();
    let mut lo = vec![0usize; m];
    let mut hi = vec![0usize; m];
    for a in 0..m {
        let pa = law.get(a);
        let ok: Vec<usize> = (0..=k).filter(|&c| count_ok(c, k, pa, epsilon)).collect();
        match (ok.first(), ok.last()) {
            (Some(&first), Some(&last)) => {
                lo[a] = first;
                hi[a] = last;
            }
            _ => {
                // No admissible count: force an empty range.
                lo[a] = 1;
                hi[a] = 0;
            }
        }
    }
    (lo, hi)
}

fn component_log2_cardinality(law: &Pmf, k: usize, epsilon: f64) -> f64 {
    let ln_fact = ln_factorials(k);
    let (lo, hi) = count_bounds(law, k, epsilon);
    // Accumulate ln of the total count via log-sum-exp over type classes.
    let mut ln_terms: Vec<f64> = Vec::new();
    let mut counts = vec![0usize; law.len()];
    collect_types(0, k, &lo, &hi, &mut counts, &ln_fact, &mut ln_terms);
    if ln_terms.is_empty() {
        return f64::NEG_INFINITY;
    }
    let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = ln_terms.iter().map(|&t| (t - max).exp()).sum();
    (max + sum_exp.ln()) / std::f64::consts::LN_2
}

fn collect_types(
    a: usize,
    remaining: usize,
    lo: &[usize],
    hi: &[usize],
    counts: &mut [usize],
    ln_fact: &[f64],
    ln_terms: &mut Vec<f64>,
) {
    let m = lo.len();
    if a == m {
        if remaining == 0 {
            let k = counts.iter().sum::<usize>();
            let mut ln = ln_fact[k];
            for &c in counts.iter() {
                ln -= ln_fact[c];
            }
            ln_terms.push(ln);
        }
        return;
    }
    let max_c = hi[a].min(remaining);
    for c in lo[a]..=max_c {
        counts[a] = c;
        collect_types(a + 1, remaining - c, lo, hi, counts, ln_fact, ln_terms);
    }
    counts[a] = 0;
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for i in 1..=n {
        v[i] = v[i - 1] + (i as f64).ln();
    }
    v
}

/// Mixture view of a multi-component source: a time-sharing variable Q with
/// P(Q = i) proportional to the i-th block length, and U | Q = i drawn from
/// component i's law.
#[derive(Debug, Clone)]
pub struct UQPair {
    q: Pmf,
    conditionals: Vec<Pmf>,
}

impl UQPair {
    pub fn from_components(components: &[(Pmf, usize)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("no components".into()));
        }
        let total: usize = components.iter().map(|(_, k)| *k).sum();
        if total == 0 {
            return Err(Error::Domain("all block lengths are zero".into()));
        }
        let q = Pmf::new(
            components
                .iter()
                .map(|(_, k)| *k as f64 / total as f64)
                .collect(),
        )?;
        let m = components[0].0.len();
        for (p, _) in components {
            if p.len() != m {
                return Err(Error::Dimension("component alphabets differ".into()));
            }
        }
        Ok(UQPair {
            q,
            conditionals: components.iter().map(|(p, _)| p.clone()).collect(),
        })
    }

    pub fn from_spec(spec: &TypicalSetSpec) -> Result<Self> {
        Self::from_components(
            &spec
                .components()
                .iter()
                .map(|c| (c.law.clone(), c.block_len))
                .collect::<Vec<_>>(),
        )
    }

    pub fn single(law: Pmf) -> Self {
        UQPair {
            q: Pmf::uniform(1).expect("nonempty"),
            conditionals: vec![law],
        }
    }

    pub fn q(&self) -> &Pmf {
        &self.q
    }

    pub fn conditionals(&self) -> &[Pmf] {
        &self.conditionals
    }

    pub fn alphabet(&self) -> usize {
        self.conditionals[0].len()
    }

    /// H(U | Q) = sum_i P(Q=i) H(U_i).
    pub fn h_u_given_q(&self) -> f64 {
        self.conditionals
            .iter()
            .enumerate()
            .map(|(i, p)| self.q.get(i) * p.entropy())
            .sum()
    }
}
