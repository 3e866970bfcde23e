use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::modrings::{mat_apply, vec_add, vec_sub, RingMatrix, RingSpec, RingVector};
use crate::probinfo::typical::count_ok;
use crate::probinfo::{product_typical_cardinality, Pmf, TypicalComponent, TypicalSetSpec};
use crate::regions::CondLaw;

/// Hard ceiling on block length.
pub const MAX_BLOCK_LEN: usize = 24;
/// Hard ceiling on the number of candidates any exhaustive sweep may touch
/// (a code's own outer enumeration at build time, the full decoder candidate
/// list at decode time).
pub const MAX_CANDIDATES: u64 = 1 << 20;
/// Ceiling on the pairwise work done to materialize the decoder's deduplicated
/// shift-message sum set.
const MAX_SUM_PAIRS: u64 = 1 << 22;

/// A nested code over ℤ_{p^r}: an inner affine code {uG + b} indexed by binary
/// messages u, refined into bins by a shift layer {wG' : w in a typical set}.
/// The shift set is anchored so the zero shift is always present, which keeps
/// the inner code inside the outer code for every sample of the generators.
#[derive(Debug, Clone)]
pub struct NestedQgc {
    ring: RingSpec,
    n: usize,
    k: usize,
    l: usize,
    g: RingMatrix,
    g_shift: RingMatrix,
    b: RingVector,
    /// Per-coordinate law of the shift-layer messages (alphabet = ring size),
    /// plus the tolerance defining their typical set. `None` when l = 0.
    w_spec: Option<TypicalSetSpec>,
    /// Lexicographically least shift message; its image under `g_shift` is
    /// subtracted from every shift so that the zero shift always exists.
    w_min: Vec<usize>,
    /// Image of `w_min` under `g_shift`.
    anchor: RingVector,
    /// Exact number of shift messages.
    w_count: u64,
    /// Per-position count bounds used to walk the shift set in lex order.
    plan: ScanPlan,
    seed: Option<u64>,
}

/// Precomputed per-component symbol-count windows for the lex walk over the
/// shift-message typical set.
#[derive(Debug, Clone)]
struct ScanPlan {
    /// (start, end, lo, hi) per component; positions start..end draw from one
    /// component whose per-symbol counts must land in [lo, hi].
    comps: Vec<(usize, usize, Vec<usize>, Vec<usize>)>,
}

impl ScanPlan {
    fn from_spec(spec: Option<&TypicalSetSpec>) -> Self {
        let mut comps = Vec::new();
        let mut pos = 0;
        if let Some(spec) = spec {
            for c in spec.components() {
                let m = c.law.len();
                let mut lo = vec![0usize; m];
                let mut hi = vec![0usize; m];
                for a in 0..m {
                    let ok: Vec<usize> = (0..=c.block_len)
                        .filter(|&x| count_ok(x, c.block_len, c.law.get(a), spec.epsilon()))
                        .collect();
                    match (ok.first(), ok.last()) {
                        (Some(&first), Some(&last)) => {
                            lo[a] = first;
                            hi[a] = last;
                        }
                        _ => {
                            lo[a] = 1;
                            hi[a] = 0;
                        }
                    }
                }
                comps.push((pos, pos + c.block_len, lo, hi));
                pos += c.block_len;
            }
        }
        ScanPlan { comps }
    }
}

/// Outcome of the typicality-covering encoder: either the first bin member
/// jointly typical with the state, or the modeled covering-failure event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverOutcome {
    Covered {
        v: RingVector,
        w: RingVector,
        scan_index: u64,
    },
    CoveringFailure,
}

impl CoverOutcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, CoverOutcome::CoveringFailure)
    }
}

/// Outcome of the exhaustive sum-codebook decoder. Both failure arms are the
/// modeled decoding-error event: nothing typical survived, or survivors span
/// more than one message pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded(DecodedPair),
    NoSurvivor,
    Ambiguous,
}

impl DecodeOutcome {
    pub fn is_error(&self) -> bool {
        !matches!(self, DecodeOutcome::Decoded(_))
    }
}

/// Unique surviving message pair, with the shift-sum and codeword-sum of its
/// first surviving candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedPair {
    pub u1: RingVector,
    pub u2: RingVector,
    pub w_sum: RingVector,
    pub v_sum: RingVector,
}

/// Coordinate-wise channel-input sampler: a pmf over x for every (v, s) pair.
#[derive(Debug, Clone)]
pub struct InputLaw {
    v_size: usize,
    s_size: usize,
    rows: Vec<Pmf>,
}

impl InputLaw {
    pub fn new(v_size: usize, s_size: usize, rows: Vec<Pmf>) -> Result<Self> {
        if rows.len() != v_size * s_size {
            return Err(Error::Dimension(format!(
                "expected {} rows for a {v_size}x{s_size} input law, got {}",
                v_size * s_size,
                rows.len()
            )));
        }
        if v_size == 0 || s_size == 0 {
            return Err(Error::Domain("empty input-law axis".into()));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Dimension("ragged input-law rows".into()));
        }
        Ok(InputLaw {
            v_size,
            s_size,
            rows,
        })
    }

    /// The difference law x = v - s over the given ring.
    pub fn deterministic_difference(ring: RingSpec) -> Self {
        let m = ring.size();
        let mut rows = Vec::with_capacity(m * m);
        for v in 0..m {
            for s in 0..m {
                let x = (v + m - s) % m;
                rows.push(Pmf::delta(m, x).expect("delta in range"));
            }
        }
        InputLaw {
            v_size: m,
            s_size: m,
            rows,
        }
    }

    pub fn x_size(&self) -> usize {
        self.rows[0].len()
    }

    fn sample(&self, v: usize, s: usize, rng: &mut impl Rng) -> usize {
        let row = &self.rows[v * self.s_size + s];
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        for x in 0..row.len() {
            acc += row.get(x);
            if draw < acc {
                return x;
            }
        }
        row.len() - 1
    }
}

/// Fast joint-typicality tester: integer per-cell count windows derived from
/// the same scalar predicate as `is_jointly_typical`, checked in one pass with
/// early exit. `m_b` is the second-axis alphabet size.
#[derive(Debug, Clone)]
pub(crate) struct JointTypicalityTest {
    m_b: usize,
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl JointTypicalityTest {
    pub(crate) fn new(joint: &[f64], m_b: usize, n: usize, epsilon: f64) -> Result<Self> {
        if m_b == 0 || joint.len() % m_b != 0 {
            return Err(Error::Dimension("joint table not a multiple of m_b".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let mut lo = vec![0usize; joint.len()];
        let mut hi = vec![0usize; joint.len()];
        for (cell, &p) in joint.iter().enumerate() {
            let ok: Vec<usize> = (0..=n).filter(|&c| count_ok(c, n, p, epsilon)).collect();
            match (ok.first(), ok.last()) {
                (Some(&first), Some(&last)) => {
                    lo[cell] = first;
                    hi[cell] = last;
                }
                _ => {
                    lo[cell] = 1;
                    hi[cell] = 0;
                }
            }
        }
        Ok(JointTypicalityTest { m_b, lo, hi })
    }

    /// One-pass check with a caller-provided scratch count table (must hold
    /// `lo.len()` slots; cleared on entry).
    pub(crate) fn check(&self, seq_a: &[usize], seq_b: &[usize], counts: &mut [usize]) -> bool {
        debug_assert_eq!(seq_a.len(), seq_b.len());
        counts.fill(0);
        let m_a = self.lo.len() / self.m_b;
        for (&a, &b) in seq_a.iter().zip(seq_b) {
            if a >= m_a || b >= self.m_b {
                return false;
            }
            let cell = a * self.m_b + b;
            counts[cell] += 1;
            if counts[cell] > self.hi[cell] {
                return false;
            }
        }
        counts
            .iter()
            .zip(&self.lo)
            .all(|(&c, &lo)| c >= lo)
    }
}

/// Flat joint table from a conditional law whose `given` marginal is the
/// *second* axis: joint[a * m_b + b] = given(b) * rows[b](a).
fn joint_from_cond_on_b(law: &CondLaw) -> (Vec<f64>, usize, usize) {
    let m_b = law.given().len();
    let m_a = law.row_width();
    let mut joint = vec![0.0; m_a * m_b];
    for b in 0..m_b {
        for a in 0..m_a {
            joint[a * m_b + b] = law.given().get(b) * law.rows()[b].get(a);
        }
    }
    (joint, m_a, m_b)
}

/// Flat joint table from a conditional law whose `given` marginal is the
/// *first* axis: joint[a * m_b + b] = given(a) * rows[a](b).
fn joint_from_cond_on_a(law: &CondLaw) -> (Vec<f64>, usize, usize) {
    let m_a = law.given().len();
    let m_b = law.row_width();
    let mut joint = vec![0.0; m_a * m_b];
    for a in 0..m_a {
        for b in 0..m_b {
            joint[a * m_b + b] = law.given().get(a) * law.rows()[a].get(b);
        }
    }
    (joint, m_a, m_b)
}

impl NestedQgc {
    /// Assemble a code from explicit parts; shapes fix (k, l, n). The shift
    /// layer's message set is the epsilon-typical set of `w_law` per
    /// coordinate (`l` of them). Use `build_nested_qgc` for seeded random
    /// parts.
    pub fn from_parts(
        g: RingMatrix,
        g_shift: RingMatrix,
        b: RingVector,
        w_law: &Pmf,
        epsilon: f64,
    ) -> Result<Self> {
        let spec = spec_for(g.ring(), g_shift.rows(), w_law, epsilon)?;
        Self::assemble(g, g_shift, b, spec, None)
    }

    /// Assemble a code whose shift-message set is an arbitrary product
    /// typical set (its total length must match the shift matrix's rows).
    pub fn from_shift_spec(
        g: RingMatrix,
        g_shift: RingMatrix,
        b: RingVector,
        w_spec: Option<TypicalSetSpec>,
    ) -> Result<Self> {
        Self::assemble(g, g_shift, b, w_spec, None)
    }

    fn assemble(
        g: RingMatrix,
        g_shift: RingMatrix,
        b: RingVector,
        w_spec: Option<TypicalSetSpec>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let ring = g.ring();
        let n = g.cols();
        let k = g.rows();
        let l = g_shift.rows();
        if g_shift.ring() != ring || b.ring() != ring {
            return Err(Error::Dimension("ring mismatch between code parts".into()));
        }
        if g_shift.cols() != n || b.len() != n {
            return Err(Error::Dimension(format!(
                "inner matrix is {k}x{n} but shift matrix is {l}x{} and offset has length {}",
                g_shift.cols(),
                b.len()
            )));
        }
        if n == 0 {
            return Err(Error::Domain("block length must be positive".into()));
        }
        if n > MAX_BLOCK_LEN {
            return Err(Error::Resource(format!(
                "block length {n} exceeds the desk-scale cap {MAX_BLOCK_LEN}"
            )));
        }
        match &w_spec {
            None => {
                if l != 0 {
                    return Err(Error::Dimension(format!(
                        "shift matrix has {l} rows but no message spec was given"
                    )));
                }
            }
            Some(spec) => {
                if spec.total_len() != l {
                    return Err(Error::Dimension(format!(
                        "shift spec covers {} positions, shift matrix has {l} rows",
                        spec.total_len()
                    )));
                }
                for c in spec.components() {
                    if c.law.len() != ring.size() {
                        return Err(Error::Dimension(format!(
                            "shift-message law has {} symbols, ring has {}",
                            c.law.len(),
                            ring.size()
                        )));
                    }
                }
            }
        }
        if k >= 63 {
            return Err(Error::Resource(format!("message length {k} out of range")));
        }
        let w_count = match &w_spec {
            Some(spec) => product_typical_cardinality(spec, MAX_CANDIDATES)?,
            None => 1,
        };
        if w_count == 0 {
            return Err(Error::Infeasible(
                "no shift message satisfies the typicality window".into(),
            ));
        }
        let message_count = 1u64 << k;
        if message_count.saturating_mul(w_count) > MAX_CANDIDATES {
            return Err(Error::Resource(format!(
                "outer code enumeration {message_count} x {w_count} exceeds cap {MAX_CANDIDATES}"
            )));
        }
        let plan = ScanPlan::from_spec(w_spec.as_ref());
        let w_min = lex_least(&plan, l).ok_or_else(|| {
            Error::Infeasible("no shift message satisfies the typicality window".into())
        })?;
        let w_min_vec = RingVector::new(ring, w_min.iter().map(|&a| a as u32).collect())?;
        let anchor = mat_apply(&w_min_vec, &g_shift, &RingVector::zero(ring, n))?;
        Ok(NestedQgc {
            ring,
            n,
            k,
            l,
            g,
            g_shift,
            b,
            w_spec,
            w_min,
            anchor,
            w_count,
            plan,
            seed,
        })
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn message_len(&self) -> usize {
        self.k
    }

    pub fn shift_len(&self) -> usize {
        self.l
    }

    pub fn inner_matrix(&self) -> &RingMatrix {
        &self.g
    }

    pub fn shift_matrix(&self) -> &RingMatrix {
        &self.g_shift
    }

    pub fn translation(&self) -> &RingVector {
        &self.b
    }

    pub fn shift_spec(&self) -> Option<&TypicalSetSpec> {
        self.w_spec.as_ref()
    }

    /// Lexicographically least shift message (the anchor of the shift set).
    pub fn least_shift_message(&self) -> &[usize] {
        &self.w_min
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of messages, |{0,1}^k|.
    pub fn message_count(&self) -> u64 {
        1u64 << self.k
    }

    /// Exact number of shift messages (= bin size, counting collisions).
    pub fn bin_size(&self) -> u64 {
        self.w_count
    }

    /// Message rate k/n in bits per symbol.
    pub fn message_rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Empirical shift-layer rate log2|bins| / n.
    pub fn bin_rate(&self) -> f64 {
        (self.w_count as f64).log2() / self.n as f64
    }

    /// Whether `u` is a valid message: length k with binary entries.
    pub fn contains_message(&self, u: &RingVector) -> bool {
        u.ring() == self.ring && u.len() == self.k && u.as_slice().iter().all(|&e| e <= 1)
    }

    /// The i-th message in lexicographic order (big-endian bits of i).
    pub fn message_by_index(&self, i: u64) -> Result<RingVector> {
        if i >= self.message_count() {
            return Err(Error::Domain(format!(
                "message index {i} out of range (< {})",
                self.message_count()
            )));
        }
        let bits = (0..self.k)
            .map(|j| ((i >> (self.k - 1 - j)) & 1) as u32)
            .collect();
        RingVector::new(self.ring, bits)
    }

    /// Number of message pairs mapping to the same inner codeword.
    pub fn inner_collisions(&self) -> Result<u64> {
        let mut seen = BTreeSet::new();
        for i in 0..self.message_count() {
            let u = self.message_by_index(i)?;
            seen.insert(mat_apply(&u, &self.g, &self.b)?);
        }
        Ok(self.message_count() - seen.len() as u64)
    }

    fn check_message(&self, u: &RingVector) -> Result<()> {
        if !self.contains_message(u) {
            return Err(Error::Domain(format!(
                "message must be a binary vector of length {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Anchored inner image uG + b - w_min G' as plain symbol indices.
    fn scan_base(&self, u: &RingVector) -> Result<Vec<usize>> {
        let inner = mat_apply(u, &self.g, &self.b)?;
        let based = vec_sub(&inner, &self.anchor)?;
        Ok(based.as_slice().iter().map(|&x| x as usize).collect())
    }

    /// Walk the bin of `u` in lexicographic shift-message order, feeding each
    /// candidate codeword to `visit`; stops early when `visit` returns false.
    /// The walk maintains the candidate incrementally: entering position t
    /// with symbol a adds a * (row t of the shift matrix).
    fn scan_bin(
        &self,
        u: &RingVector,
        mut visit: impl FnMut(u64, &[usize], &[usize]) -> bool,
    ) -> Result<()> {
        self.check_message(u)?;
        let mut acc = self.scan_base(u)?;
        let mut w = vec![0usize; self.l];
        let mut index = 0u64;
        if self.plan.comps.is_empty() {
            visit(0, &w, &acc);
            return Ok(());
        }
        let m = self.ring.size();
        let mut counts: Vec<Vec<usize>> = self
            .plan
            .comps
            .iter()
            .map(|(_, _, lo, _)| vec![0usize; lo.len()])
            .collect();
        self.scan_rec(0, 0, &mut acc, &mut w, &mut counts, &mut index, m, &mut visit)?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_rec(
        &self,
        comp: usize,
        pos: usize,
        acc: &mut Vec<usize>,
        w: &mut Vec<usize>,
        counts: &mut [Vec<usize>],
        index: &mut u64,
        m: usize,
        visit: &mut impl FnMut(u64, &[usize], &[usize]) -> bool,
    ) -> Result<bool> {
        let (_, end, lo, hi) = &self.plan.comps[comp];
        if pos == *end {
            // Component complete: floors were guaranteed by the deficit prune.
            if comp + 1 == self.plan.comps.len() {
                let keep = visit(*index, w, acc);
                *index += 1;
                return Ok(keep);
            }
            return self.scan_rec(comp + 1, pos, acc, w, counts, index, m, visit);
        }
        let remaining = end - pos - 1;
        for a in 0..m {
            if counts[comp][a] + 1 > hi[a] {
                continue;
            }
            counts[comp][a] += 1;
            let deficit: usize = (0..m)
                .map(|s| lo[s].saturating_sub(counts[comp][s]))
                .sum();
            if deficit <= remaining {
                w[pos] = a;
                if a > 0 {
                    let row = self.g_shift.row(pos);
                    for (slot, &r) in acc.iter_mut().zip(row) {
                        *slot = (*slot + a * r as usize) % m;
                    }
                }
                let keep = self.scan_rec(comp, pos + 1, acc, w, counts, index, m, visit)?;
                if a > 0 {
                    let row = self.g_shift.row(pos);
                    for (slot, &r) in acc.iter_mut().zip(row) {
                        *slot = (*slot + m * m - a * r as usize) % m;
                    }
                }
                if !keep {
                    counts[comp][a] -= 1;
                    return Ok(false);
                }
            }
            counts[comp][a] -= 1;
        }
        Ok(true)
    }
}

/// Shift-layer message spec: the epsilon-typical set of `w_law` over `l`
/// coordinates (None when l = 0, where the only shift message is empty).
fn spec_for(
    ring: RingSpec,
    l: usize,
    w_law: &Pmf,
    epsilon: f64,
) -> Result<Option<TypicalSetSpec>> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if w_law.len() != ring.size() {
        return Err(Error::Dimension(format!(
            "shift-message law has {} symbols, ring has {}",
            w_law.len(),
            ring.size()
        )));
    }
    if l == 0 {
        return Ok(None);
    }
    Ok(Some(TypicalSetSpec::new(
        vec![TypicalComponent {
            law: w_law.clone(),
            block_len: l,
        }],
        epsilon,
    )?))
}

/// Lexicographically least sequence satisfying the scan plan's count windows,
/// or None when some window is empty.
fn lex_least(plan: &ScanPlan, l: usize) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(l);
    for (start, end, lo, hi) in &plan.comps {
        let len = end - start;
        let m = lo.len();
        if lo.iter().sum::<usize>() > len || lo.iter().zip(hi).any(|(l, h)| l > h) {
            return None;
        }
        if hi.iter().map(|&h| h.min(len)).sum::<usize>() < len {
            return None;
        }
        let mut counts = vec![0usize; m];
        for pos in 0..len {
            let remaining = len - pos - 1;
            let mut placed = false;
            for a in 0..m {
                if counts[a] + 1 > hi[a] {
                    continue;
                }
                counts[a] += 1;
                let deficit: usize = (0..m).map(|s| lo[s].saturating_sub(counts[s])).sum();
                let capacity: usize = (0..m).map(|s| hi[s] - counts[s]).sum();
                if deficit <= remaining && capacity >= remaining {
                    out.push(a);
                    placed = true;
                    break;
                }
                counts[a] -= 1;
            }
            if !placed {
                return None;
            }
        }
    }
    Some(out)
}

/// Draw a nested code with i.i.d. uniform ring entries for the inner matrix,
/// the shift matrix, and the translation, in that order, from a generator
/// seeded by `seed`. The shift layer's message set is the epsilon-typical set
/// of `w_law` over l coordinates.
pub fn build_nested_qgc(
    ring: RingSpec,
    n: usize,
    k: usize,
    l: usize,
    w_law: &Pmf,
    epsilon: f64,
    seed: u64,
) -> Result<NestedQgc> {
    let spec = spec_for(ring, l, w_law, epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = RingMatrix::random_uniform(ring, k, n, &mut rng);
    let g_shift = RingMatrix::random_uniform(ring, l, n, &mut rng);
    let b = RingVector::random_uniform(ring, n, &mut rng);
    NestedQgc::assemble(g, g_shift, b, spec, Some(seed))
}

/// Draw a pair of codes for the two-encoder setting: one shared shift matrix,
/// then per-encoder inner matrices and translations, all from one seeded
/// generator. The shared shift layer (matrix, message set, anchor) is what the
/// sum decoder relies on.
#[allow(clippy::too_many_arguments)]
pub fn pair_for_mac(
    ring: RingSpec,
    n: usize,
    k1: usize,
    k2: usize,
    l: usize,
    w_law: &Pmf,
    epsilon: f64,
    seed: u64,
) -> Result<(NestedQgc, NestedQgc)> {
    let spec = spec_for(ring, l, w_law, epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_shift = RingMatrix::random_uniform(ring, l, n, &mut rng);
    let g1 = RingMatrix::random_uniform(ring, k1, n, &mut rng);
    let b1 = RingVector::random_uniform(ring, n, &mut rng);
    let g2 = RingMatrix::random_uniform(ring, k2, n, &mut rng);
    let b2 = RingVector::random_uniform(ring, n, &mut rng);
    let code1 = NestedQgc::assemble(g1, g_shift.clone(), b1, spec.clone(), Some(seed))?;
    let code2 = NestedQgc::assemble(g2, g_shift, b2, spec, Some(seed))?;
    Ok((code1, code2))
}

/// Enumerate the bin of `u`: every shift-set member's codeword uG + wG' -
/// w_min G' + b in lexicographic shift order. Collisions (distinct shifts with
/// one image) are kept, so the length always equals the shift-set size.
pub fn bin_of(code: &NestedQgc, u: &RingVector) -> Result<Vec<RingVector>> {
    let mut out = Vec::with_capacity(code.bin_size() as usize);
    let ring = code.ring();
    code.scan_bin(u, |_, _, cand| {
        out.push(
            RingVector::new(ring, cand.iter().map(|&x| x as u32).collect())
                .expect("scan produces reduced symbols"),
        );
        true
    })?;
    Ok(out)
}

/// Typicality-covering encoder: scan the bin of `u` in lexicographic shift
/// order and return the first codeword jointly epsilon-typical with the state
/// sequence under the joint law p(s) p(v|s) — `target.given()` is the state
/// marginal, `target.rows()[s]` the conditional over v. Exhausting the bin is
/// the modeled covering-failure event, not an error.
pub fn encode(
    code: &NestedQgc,
    u: &RingVector,
    s: &[usize],
    target: &CondLaw,
    epsilon: f64,
) -> Result<CoverOutcome> {
    if s.len() != code.block_len() {
        return Err(Error::Dimension(format!(
            "state sequence has length {}, code block length is {}",
            s.len(),
            code.block_len()
        )));
    }
    let m_s = target.given().len();
    if target.row_width() != code.ring().size() {
        return Err(Error::Dimension(format!(
            "target law covers {} codeword symbols, ring has {}",
            target.row_width(),
            code.ring().size()
        )));
    }
    if s.iter().any(|&x| x >= m_s) {
        return Err(Error::Domain("state symbol outside the target law".into()));
    }
    let (joint, _, _) = joint_from_cond_on_b(target);
    let test = JointTypicalityTest::new(&joint, m_s, s.len(), epsilon)?;
    let mut counts = vec![0usize; joint.len()];
    let ring = code.ring();
    let mut hit: Option<(u64, RingVector, RingVector)> = None;
    code.scan_bin(u, |index, w, cand| {
        if test.check(cand, s, &mut counts) {
            let v = RingVector::new(ring, cand.iter().map(|&x| x as u32).collect())
                .expect("scan produces reduced symbols");
            let w = RingVector::new(ring, w.iter().map(|&x| x as u32).collect())
                .expect("shift symbols are reduced");
            hit = Some((index, v, w));
            false
        } else {
            true
        }
    })?;
    Ok(match hit {
        Some((scan_index, v, w)) => CoverOutcome::Covered { v, w, scan_index },
        None => CoverOutcome::CoveringFailure,
    })
}

/// Coordinate-wise channel-input sampling: x_t ~ p(x | v_t, s_t).
pub fn channel_input(
    v: &RingVector,
    s: &[usize],
    x_law: &InputLaw,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if v.len() != s.len() {
        return Err(Error::Dimension(format!(
            "codeword length {} vs state length {}",
            v.len(),
            s.len()
        )));
    }
    if v.ring().size() != x_law.v_size {
        return Err(Error::Dimension(
            "input law does not cover the codeword alphabet".into(),
        ));
    }
    let mut out = Vec::with_capacity(v.len());
    for (&vt, &st) in v.as_slice().iter().zip(s) {
        if st >= x_law.s_size {
            return Err(Error::Domain("state symbol outside the input law".into()));
        }
        out.push(x_law.sample(vt as usize, st, rng));
    }
    Ok(out)
}

/// The codeword-sum a decoder candidate (u1, u2, w-sum) maps to:
/// u1 G1 + u2 G2 + (w-sum) G' - 2 w_min G' + b1 + b2. This is also the exact
/// sum of the two encoders' codewords when (u1, u2, w-sum) is the transmitted
/// triple.
pub fn candidate_sum(
    code1: &NestedQgc,
    code2: &NestedQgc,
    u1: &RingVector,
    u2: &RingVector,
    w_sum: &RingVector,
) -> Result<RingVector> {
    let ring = code1.ring();
    let zero = RingVector::zero(ring, code1.block_len());
    let inner1 = mat_apply(u1, code1.inner_matrix(), code1.translation())?;
    let inner2 = mat_apply(u2, code2.inner_matrix(), code2.translation())?;
    let shift = mat_apply(w_sum, code1.shift_matrix(), &zero)?;
    let mut out = vec_add(&inner1, &inner2)?;
    out = vec_add(&out, &shift)?;
    out = vec_sub(&out, &code1.anchor)?;
    out = vec_sub(&out, &code2.anchor)?;
    Ok(out)
}

fn same_shift_layer(code1: &NestedQgc, code2: &NestedQgc) -> bool {
    if code1.ring() != code2.ring()
        || code1.block_len() != code2.block_len()
        || code1.shift_len() != code2.shift_len()
        || code1.shift_matrix() != code2.shift_matrix()
    {
        return false;
    }
    match (code1.shift_spec(), code2.shift_spec()) {
        (None, None) => true,
        (Some(a), Some(b)) => {
            a.epsilon() == b.epsilon()
                && a.components().len() == b.components().len()
                && a.components().iter().zip(b.components()).all(|(x, y)| {
                    x.block_len == y.block_len && x.law.as_slice() == y.law.as_slice()
                })
        }
        _ => false,
    }
}

/// Deduplicated coordinate-wise sums of two shift messages, in lexicographic
/// order, with resource caps: pair work and the resulting candidate count.
fn shift_sum_set(code: &NestedQgc, message_pairs: u64) -> Result<Vec<Vec<usize>>> {
    let w_count = code.bin_size();
    if message_pairs.saturating_mul(w_count) > MAX_CANDIDATES {
        return Err(Error::Resource(format!(
            "decoder candidate count exceeds cap {MAX_CANDIDATES}"
        )));
    }
    if w_count.saturating_mul(w_count) > MAX_SUM_PAIRS {
        return Err(Error::Resource(format!(
            "shift sum-set construction needs {} pair visits, cap is {MAX_SUM_PAIRS}",
            w_count.saturating_mul(w_count)
        )));
    }
    let mut words: Vec<Vec<usize>> = Vec::with_capacity(w_count as usize);
    let zero_u = RingVector::zero(code.ring(), code.message_len());
    // Walk the shift-message set once; `scan_bin` visits every w in lex order.
    code.scan_bin(&zero_u, |_, w, _| {
        words.push(w.to_vec());
        true
    })?;
    let m = code.ring().size();
    let mut sums: BTreeSet<Vec<usize>> = BTreeSet::new();
    let cand_cap = (MAX_CANDIDATES / message_pairs.max(1)) as usize;
    for a in &words {
        for bw in &words {
            let sum: Vec<usize> = a.iter().zip(bw).map(|(&x, &y)| (x + y) % m).collect();
            sums.insert(sum);
            if sums.len() > cand_cap {
                return Err(Error::Resource(format!(
                    "decoder candidate count exceeds cap {MAX_CANDIDATES}"
                )));
            }
        }
    }
    Ok(sums.into_iter().collect())
}

/// Exhaustive joint-typicality decoder over the sum codebook. Enumerates every
/// (u1, u2, w-sum) candidate, keeps those whose codeword-sum is jointly
/// epsilon-typical with `y` under the joint law p(v1+v2, y) — `sum_law.given()`
/// is the codeword-sum marginal, `sum_law.rows()[v]` the conditional over y.
/// A unique surviving message pair decodes; no survivor or several distinct
/// pairs is the modeled decoding-error event.
pub fn decode(
    code1: &NestedQgc,
    code2: &NestedQgc,
    y: &[usize],
    sum_law: &CondLaw,
    epsilon: f64,
) -> Result<DecodeOutcome> {
    if !same_shift_layer(code1, code2) {
        return Err(Error::Precondition(
            "codes must share ring, block length, and shift layer".into(),
        ));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = code1.block_len();
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "channel output has length {}, block length is {n}",
            y.len()
        )));
    }
    if sum_law.given().len() != code1.ring().size() {
        return Err(Error::Dimension(
            "sum law does not cover the codeword-sum alphabet".into(),
        ));
    }
    let m_y = sum_law.row_width();
    if y.iter().any(|&x| x >= m_y) {
        return Err(Error::Domain("output symbol outside the sum law".into()));
    }
    let (joint, _, _) = joint_from_cond_on_a(sum_law);
    let test = JointTypicalityTest::new(&joint, m_y, n, epsilon)?;
    let mut counts = vec![0usize; joint.len()];

    let message_pairs = code1.message_count().saturating_mul(code2.message_count());
    let sums = shift_sum_set(code1, message_pairs)?;
    let ring = code1.ring();
    let m = ring.size();
    let zero = RingVector::zero(ring, n);

    // Per-message inner images and the shared constant part.
    let mut base = vec_sub(&zero, &code1.anchor)?;
    base = vec_sub(&base, &code2.anchor)?;
    let inner1: Vec<RingVector> = (0..code1.message_count())
        .map(|i| {
            let u = code1.message_by_index(i)?;
            mat_apply(&u, code1.inner_matrix(), code1.translation())
        })
        .collect::<Result<_>>()?;
    let inner2: Vec<RingVector> = (0..code2.message_count())
        .map(|i| {
            let u = code2.message_by_index(i)?;
            mat_apply(&u, code2.inner_matrix(), code2.translation())
        })
        .collect::<Result<_>>()?;
    let shift_images: Vec<Vec<usize>> = sums
        .iter()
        .map(|w| {
            let wv = RingVector::new(ring, w.iter().map(|&x| x as u32).collect())?;
            let img = mat_apply(&wv, code1.shift_matrix(), &base)?;
            Ok(img.as_slice().iter().map(|&x| x as usize).collect())
        })
        .collect::<Result<_>>()?;

    let mut winner: Option<(u64, u64, usize)> = None;
    let mut cand = vec![0usize; n];
    for (i, a) in inner1.iter().enumerate() {
        for (j, bv) in inner2.iter().enumerate() {
            let pair_base: Vec<usize> = a
                .as_slice()
                .iter()
                .zip(bv.as_slice())
                .map(|(&x, &y)| ((x + y) % m as u32) as usize)
                .collect();
            for (si, img) in shift_images.iter().enumerate() {
                for ((slot, &p), &q) in cand.iter_mut().zip(&pair_base).zip(img) {
                    *slot = (p + q) % m;
                }
                if test.check(&cand, y, &mut counts) {
                    match winner {
                        None => {
                            winner = Some((i as u64, j as u64, si));
                        }
                        Some((wi, wj, _)) if wi == i as u64 && wj == j as u64 => {}
                        Some(_) => return Ok(DecodeOutcome::Ambiguous),
                    }
                    break; // further shifts cannot change this pair's fate
                }
            }
        }
    }
    match winner {
        None => Ok(DecodeOutcome::NoSurvivor),
        Some((i, j, si)) => {
            let u1 = code1.message_by_index(i)?;
            let u2 = code2.message_by_index(j)?;
            let w_sum = RingVector::new(ring, sums[si].iter().map(|&x| x as u32).collect())?;
            let v_sum = candidate_sum(code1, code2, &u1, &u2, &w_sum)?;
            Ok(DecodeOutcome::Decoded(DecodedPair {
                u1,
                u2,
                w_sum,
                v_sum,
            }))
        }
    }
}
