use serde::Serialize;

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::modrings::{circular_convolve, project_pmf, RingSpec};
use crate::probinfo::{JointPmf, Pmf};

use super::assignment::{CombinedAssignment, GpAssignment, QgcAssignment};

const DEGEN_TOL: f64 = 1e-12;

/// Mutual-information terms shared by the unstructured and combined reports.
#[derive(Debug, Clone, Serialize)]
pub struct MiTerms {
    pub i_u1_y_given_u2q: f64,
    pub i_u2_y_given_u1q: f64,
    pub i_u12_y_given_q: f64,
    pub i_u1_s1_given_q: f64,
    pub i_u2_s2_given_q: f64,
    /// Only meaningful for the combined bound; `None` for the plain one.
    pub i_u12_s12_given_q: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GpRates {
    pub r1_bound: f64,
    pub r2_bound: f64,
    pub sum_bound: f64,
    pub terms: MiTerms,
    pub formula: &'static str,
}

/// One (encoder, level) entry of the structured sum-rate penalty.
///
/// `value = (numerator / denominator) * cofactor` with the bin-layer sum
/// entropy in the numerator. The `*_v_reading` fields carry the alternative
/// evaluation with the covering-layer sum entropy in the ratio; the two
/// coincide for the shipped reference assignment's W laws projected to t = r
/// but differ in general, so both are logged.
#[derive(Debug, Clone, Serialize)]
pub struct SumTerm {
    pub encoder: usize,
    pub t: u32,
    pub numerator: f64,
    pub denominator: f64,
    pub cofactor: f64,
    pub value: Option<f64>,
    pub degenerate: bool,
    pub ratio_v_reading: Option<f64>,
    pub value_v_reading: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplifiedSum {
    pub per_encoder: [Option<f64>; 2],
    pub value: Option<f64>,
    pub h_wsum_given_q: f64,
    pub h_w_given_q: [f64; 2],
    pub min_h_v_given_s: f64,
    pub h_vsum_given_yq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QgcSumRate {
    pub value: f64,
    pub base: f64,
    pub h_vsum_given_yq: f64,
    pub max_term: f64,
    pub binding: Option<(usize, u32)>,
    pub terms: Vec<SumTerm>,
    pub value_v_reading: Option<f64>,
    pub simplified: SimplifiedSum,
    pub formula: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupTerm {
    pub encoder: usize,
    pub t: u32,
    pub h_v_level_given_qs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupCodeReport {
    pub value: f64,
    pub min_term: f64,
    pub binding: (usize, u32),
    pub h_vsum_given_yq: f64,
    pub terms: Vec<GroupTerm>,
    pub formula: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub value: f64,
    pub base: f64,
    pub h_vsum_given_yuq: f64,
    pub max_term: f64,
    pub binding: Option<(usize, u32)>,
    pub terms: Vec<SumTerm>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CombinedRates {
    pub r1_bound: f64,
    pub r2_bound: f64,
    pub sum_bound: f64,
    pub gamma: GammaReport,
    pub terms: MiTerms,
    /// With a one-point U alphabet the sum bound can also be assembled from
    /// the structured sum-rate's closed form; logged as an audit hook.
    pub sum_bound_via_simplified: Option<f64>,
    pub label_note: &'static str,
    pub formula: &'static str,
}

// --- accumulators --------------------------------------------------------

fn gp_accumulate(ch: &ChannelSpec, a: &GpAssignment) -> Result<(JointPmf, JointPmf)> {
    let al = ch.alphabets();
    let nq = a.q_law().len();
    let (m1, m2) = (a.u_size(0), a.u_size(1));
    let (mx1, mx2) = (al.x1, al.x2);
    let (ms1, ms2, my) = (al.s1, al.s2, al.y);
    let mut wy = vec![0.0; nq * m1 * m2 * my];
    let mut ws = vec![0.0; nq * m1 * m2 * ms1 * ms2];
    for q in 0..nq {
        let pq = a.q_law().get(q);
        if pq == 0.0 {
            continue;
        }
        for s1 in 0..ms1 {
            for s2 in 0..ms2 {
                let ps = ch.state_prob(s1, s2);
                if ps == 0.0 {
                    continue;
                }
                let w0 = pq * ps;
                let t1 = a.table(0, q, s1).as_slice();
                let t2 = a.table(1, q, s2).as_slice();
                for (f1, &p1) in t1.iter().enumerate() {
                    if p1 == 0.0 {
                        continue;
                    }
                    let (u1, x1) = (f1 / mx1, f1 % mx1);
                    for (f2, &p2) in t2.iter().enumerate() {
                        if p2 == 0.0 {
                            continue;
                        }
                        let (u2, x2) = (f2 / mx2, f2 % mx2);
                        let w = w0 * p1 * p2;
                        ws[(((q * m1 + u1) * m2 + u2) * ms1 + s1) * ms2 + s2] += w;
                        let base = ((q * m1 + u1) * m2 + u2) * my;
                        for &(y, py) in ch.y_support(s1, s2, x1, x2) {
                            wy[base + y] += w * py;
                        }
                    }
                }
            }
        }
    }
    let jy = JointPmf::new(&[("q", nq), ("u1", m1), ("u2", m2), ("y", my)], wy)?;
    let js = JointPmf::new(
        &[("q", nq), ("u1", m1), ("u2", m2), ("s1", ms1), ("s2", ms2)],
        ws,
    )?;
    Ok((jy, js))
}

/// Joint over (q, vsum, y) under a structured assignment.
fn qgc_accumulate(ch: &ChannelSpec, a: &QgcAssignment) -> Result<JointPmf> {
    let al = ch.alphabets();
    let ring = a.ring();
    let m = ring.size();
    let nq = a.q_law().len();
    let my = al.y;
    let mut acc = vec![0.0; nq * m * my];
    for q in 0..nq {
        let pq = a.q_law().get(q);
        if pq == 0.0 {
            continue;
        }
        for s1 in 0..al.s1 {
            for s2 in 0..al.s2 {
                let ps = ch.state_prob(s1, s2);
                if ps == 0.0 {
                    continue;
                }
                let w0 = pq * ps;
                for v1 in 0..m {
                    let pv1 = a.v_law(0, q, s1).get(v1);
                    if pv1 == 0.0 {
                        continue;
                    }
                    for v2 in 0..m {
                        let pv2 = a.v_law(1, q, s2).get(v2);
                        if pv2 == 0.0 {
                            continue;
                        }
                        let vs = ring.add(v1 as u32, v2 as u32)? as usize;
                        let wv = w0 * pv1 * pv2;
                        let base = (q * m + vs) * my;
                        for x1 in 0..al.x1 {
                            let px1 = a.x_law(0, q, v1, s1).get(x1);
                            if px1 == 0.0 {
                                continue;
                            }
                            for x2 in 0..al.x2 {
                                let px2 = a.x_law(1, q, v2, s2).get(x2);
                                if px2 == 0.0 {
                                    continue;
                                }
                                let w = wv * px1 * px2;
                                for &(y, py) in ch.y_support(s1, s2, x1, x2) {
                                    acc[base + y] += w * py;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    JointPmf::new(&[("q", nq), ("vsum", m), ("y", my)], acc)
}

/// Joints over (q, u1, u2, vsum, y) and (q, u1, u2, s1, s2) under a combined
/// assignment.
fn combined_accumulate(ch: &ChannelSpec, a: &CombinedAssignment) -> Result<(JointPmf, JointPmf)> {
    let al = ch.alphabets();
    let ring = a.ring();
    let m = ring.size();
    let nq = a.q_law().len();
    let (m1, m2) = (a.u_size(0), a.u_size(1));
    let (mx1, mx2, my) = (al.x1, al.x2, al.y);
    let mut w5 = vec![0.0; nq * m1 * m2 * m * my];
    let mut ws = vec![0.0; nq * m1 * m2 * al.s1 * al.s2];
    for q in 0..nq {
        let pq = a.q_law().get(q);
        if pq == 0.0 {
            continue;
        }
        for s1 in 0..al.s1 {
            for s2 in 0..al.s2 {
                let ps = ch.state_prob(s1, s2);
                if ps == 0.0 {
                    continue;
                }
                let w0 = pq * ps;
                let t1 = a.table(0, q, s1).as_slice();
                let t2 = a.table(1, q, s2).as_slice();
                for (f1, &p1) in t1.iter().enumerate() {
                    if p1 == 0.0 {
                        continue;
                    }
                    let x1 = f1 % mx1;
                    let v1 = (f1 / mx1) % m;
                    let u1 = f1 / (mx1 * m);
                    for (f2, &p2) in t2.iter().enumerate() {
                        if p2 == 0.0 {
                            continue;
                        }
                        let x2 = f2 % mx2;
                        let v2 = (f2 / mx2) % m;
                        let u2 = f2 / (mx2 * m);
                        let vs = ring.add(v1 as u32, v2 as u32)? as usize;
                        let w = w0 * p1 * p2;
                        ws[(((q * m1 + u1) * m2 + u2) * al.s1 + s1) * al.s2 + s2] += w;
                        let base = (((q * m1 + u1) * m2 + u2) * m + vs) * my;
                        for &(y, py) in ch.y_support(s1, s2, x1, x2) {
                            w5[base + y] += w * py;
                        }
                    }
                }
            }
        }
    }
    let j5 = JointPmf::new(
        &[("q", nq), ("u1", m1), ("u2", m2), ("vsum", m), ("y", my)],
        w5,
    )?;
    let js = JointPmf::new(
        &[("q", nq), ("u1", m1), ("u2", m2), ("s1", al.s1), ("s2", al.s2)],
        ws,
    )?;
    Ok((j5, js))
}

// --- shared term machinery ------------------------------------------------

/// H(W_1 ⊕ W_2 | Q) from the per-Q bin-layer laws.
fn h_wsum_given_q(q_law: &Pmf, w1: &[Pmf], w2: &[Pmf]) -> Result<f64> {
    let mut h = 0.0;
    for q in 0..q_law.len() {
        let pq = q_law.get(q);
        if pq == 0.0 {
            continue;
        }
        h += pq * circular_convolve(&w1[q], &w2[q])?.entropy();
    }
    Ok(h)
}

/// H([W]_t | Q) for one encoder's per-Q laws.
fn h_w_level_given_q(q_law: &Pmf, w: &[Pmf], ring: RingSpec, t: u32) -> Result<f64> {
    let mut h = 0.0;
    for q in 0..q_law.len() {
        let pq = q_law.get(q);
        if pq == 0.0 {
            continue;
        }
        h += pq * project_pmf(&w[q], ring, t)?.entropy();
    }
    Ok(h)
}

/// Assemble the max over (encoder, level) terms, applying the degenerate
/// rules: a vanishing denominator with a strictly positive cofactor makes the
/// constraint unsatisfiable; with a nonpositive cofactor the term contributes
/// zero to the max.
struct TermPile {
    terms: Vec<SumTerm>,
    max_term: f64,
    binding: Option<(usize, u32)>,
    /// Max over the alternative-reading values, None once one is infeasible
    /// or missing.
    max_v: Option<f64>,
}

fn assemble_terms(raw: Vec<SumTerm>) -> Result<TermPile> {
    let mut max_term = f64::NEG_INFINITY;
    let mut binding = None;
    let mut max_v = Some(f64::NEG_INFINITY);
    for term in &raw {
        match term.value {
            Some(v) => {
                if v > max_term {
                    max_term = v;
                    binding = Some((term.encoder, term.t));
                }
            }
            None => {
                if term.cofactor > DEGEN_TOL {
                    return Err(Error::Infeasible(format!(
                        "encoder {} level {}: bin-layer law collapses at this level but the \
                         covering cofactor {} is positive",
                        term.encoder, term.t, term.cofactor
                    )));
                }
                if 0.0 > max_term {
                    max_term = 0.0;
                    binding = None;
                }
            }
        }
        max_v = match (max_v, term.value_v_reading) {
            (Some(m), Some(v)) => Some(m.max(v)),
            (Some(m), None) if term.cofactor <= DEGEN_TOL => Some(m.max(0.0)),
            _ => None,
        };
    }
    Ok(TermPile {
        terms: raw,
        max_term,
        binding,
        max_v,
    })
}

// --- public evaluators ----------------------------------------------------

/// Rate bounds of the unstructured random-coding region.
pub fn gp_rates(ch: &ChannelSpec, a: &GpAssignment) -> Result<GpRates> {
    ch.require_independent_states()?;
    let (jy, js) = gp_accumulate(ch, a)?;
    let i1y = jy.mutual_information(&["u1"], &["y"], &["u2", "q"])?;
    let i2y = jy.mutual_information(&["u2"], &["y"], &["u1", "q"])?;
    let i12y = jy.mutual_information(&["u1", "u2"], &["y"], &["q"])?;
    let is1 = js.mutual_information(&["u1"], &["s1"], &["q"])?;
    let is2 = js.mutual_information(&["u2"], &["s2"], &["q"])?;
    Ok(GpRates {
        r1_bound: i1y - is1,
        r2_bound: i2y - is2,
        sum_bound: i12y - is1 - is2,
        terms: MiTerms {
            i_u1_y_given_u2q: i1y,
            i_u2_y_given_u1q: i2y,
            i_u12_y_given_q: i12y,
            i_u1_s1_given_q: is1,
            i_u2_s2_given_q: is2,
            i_u12_s12_given_q: None,
        },
        formula: "R1 <= I(U1;Y|U2,Q) - I(U1;S1|Q); R2 <= I(U2;Y|U1,Q) - I(U2;S2|Q); \
                  R1+R2 <= I(U1,U2;Y|Q) - I(U1;S1|Q) - I(U2;S2|Q)",
    })
}

/// Sum-rate bound of the structured (nested-code) region, with the closed
/// simplified form alongside.
pub fn qgc_sum_rate(ch: &ChannelSpec, a: &QgcAssignment) -> Result<QgcSumRate> {
    ch.require_independent_states()?;
    let ring = a.ring();
    let r = ring.r();
    let log2p = (ring.p() as f64).log2();
    let base = ring.log2_size();
    let q_law = a.q_law();
    let state = [ch.state1_marginal(), ch.state2_marginal()];

    let joint = qgc_accumulate(ch, a)?;
    let h_vsum_given_yq =
        joint.entropy_of(&["q", "vsum", "y"])? - joint.entropy_of(&["q", "y"])?;
    let h_vsum_given_q = joint.entropy_of(&["q", "vsum"])? - joint.entropy_of(&["q"])?;

    let num = h_wsum_given_q(q_law, &a.w_slices(0), &a.w_slices(1))?;

    let mut raw = Vec::new();
    for i in 0..2 {
        for t in 1..=r {
            let den = h_w_level_given_q(q_law, &a.w_slices(i), ring, t)?;
            let mut h_v_level = 0.0;
            let mut h_v_level_q_only = 0.0;
            for q in 0..q_law.len() {
                let pq = q_law.get(q);
                if pq == 0.0 {
                    continue;
                }
                let mut v_mix = vec![0.0; ring.size()];
                for s in 0..state[i].len() {
                    let psi = state[i].get(s);
                    if psi == 0.0 {
                        continue;
                    }
                    let law = a.v_law(i, q, s);
                    h_v_level += pq * psi * project_pmf(law, ring, t)?.entropy();
                    for (v, &pv) in law.as_slice().iter().enumerate() {
                        v_mix[v] += psi * pv;
                    }
                }
                h_v_level_q_only += pq * project_pmf(&Pmf::new(v_mix)?, ring, t)?.entropy();
            }
            let cofactor = (t as f64) * log2p - h_v_level;
            let (value, degenerate) = if den <= DEGEN_TOL {
                (None, true)
            } else {
                (Some(num / den * cofactor), false)
            };
            let (ratio_v, value_v) = if h_v_level_q_only <= DEGEN_TOL {
                (None, None)
            } else {
                let rr = h_vsum_given_q / h_v_level_q_only;
                (Some(rr), Some(rr * cofactor))
            };
            raw.push(SumTerm {
                encoder: i + 1,
                t,
                numerator: num,
                denominator: den,
                cofactor,
                value,
                degenerate,
                ratio_v_reading: ratio_v,
                value_v_reading: value_v,
            });
        }
    }
    let pile = assemble_terms(raw)?;

    // Closed form: fix the outer level at t = r and pull the per-state V
    // entropy out as min_j H(V_j|S_j) without the time-sharing conditioning.
    let mut min_h_v_given_s = f64::INFINITY;
    for j in 0..2 {
        let m = ring.size();
        let ns = state[j].len();
        let mut w = vec![0.0; ns * m];
        for s in 0..ns {
            let psj = state[j].get(s);
            for q in 0..q_law.len() {
                let pq = q_law.get(q);
                if pq == 0.0 {
                    continue;
                }
                for v in 0..m {
                    w[s * m + v] += psj * pq * a.v_law(j, q, s).get(v);
                }
            }
        }
        let jvs = JointPmf::new(&[("s", ns), ("v", m)], w)?;
        let h = jvs.entropy() - jvs.entropy_of(&["s"])?;
        min_h_v_given_s = min_h_v_given_s.min(h);
    }
    let mut h_w_given_q = [0.0; 2];
    let mut per_encoder = [None, None];
    for i in 0..2 {
        h_w_given_q[i] = h_w_level_given_q(q_law, &a.w_slices(i), ring, r)?;
        if h_w_given_q[i] > DEGEN_TOL {
            per_encoder[i] = Some(
                num / h_w_given_q[i] * min_h_v_given_s
                    - h_vsum_given_yq
                    - (num - h_w_given_q[i]),
            );
        }
    }
    let simplified_value = match (per_encoder[0], per_encoder[1]) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    };

    Ok(QgcSumRate {
        value: base - h_vsum_given_yq - pile.max_term,
        base,
        h_vsum_given_yq,
        max_term: pile.max_term,
        binding: pile.binding,
        terms: pile.terms,
        value_v_reading: pile.max_v.map(|m| base - h_vsum_given_yq - m),
        simplified: SimplifiedSum {
            per_encoder,
            value: simplified_value,
            h_wsum_given_q: num,
            h_w_given_q,
            min_h_v_given_s,
            h_vsum_given_yq,
        },
        formula: "R1+R2 <= r*log2(p) - H(V1+V2|Y,Q) - max_{i,1<=t<=r} \
                  [H(W1+W2|Q)/H([W_i]_t|Q)] * (t*log2(p) - H([V_i]_t|Q,S_i)); \
                  simplified: [H(W1+W2|Q)/H(W_i|Q)] * min_j H(V_j|S_j) - H(V1+V2|Y,Q) \
                  - (H(W1+W2|Q) - H(W_i|Q))",
    })
}

/// Sum-rate bound when the covering layer is uniform over the ring: the
/// structured region collapses to the one achieved by full group codes.
pub fn group_code_sum_rate(ch: &ChannelSpec, a: &QgcAssignment) -> Result<GroupCodeReport> {
    ch.require_independent_states()?;
    let ring = a.ring();
    let m = ring.size();
    let q_law = a.q_law();
    let state = [ch.state1_marginal(), ch.state2_marginal()];
    let uniform = 1.0 / m as f64;
    for i in 0..2 {
        for q in 0..q_law.len() {
            if q_law.get(q) == 0.0 {
                continue;
            }
            for v in 0..m {
                let mut pv = 0.0;
                for s in 0..state[i].len() {
                    pv += state[i].get(s) * a.v_law(i, q, s).get(v);
                }
                if (pv - uniform).abs() > 1e-9 {
                    return Err(Error::Precondition(format!(
                        "encoder {} q={q}: covering layer is not uniform over the ring \
                         (p({v}) = {pv:.12})",
                        i + 1
                    )));
                }
            }
        }
    }

    let joint = qgc_accumulate(ch, a)?;
    let h_vsum_given_yq =
        joint.entropy_of(&["q", "vsum", "y"])? - joint.entropy_of(&["q", "y"])?;

    let mut terms = Vec::new();
    let mut min_term = f64::INFINITY;
    let mut binding = (0usize, 0u32);
    for i in 0..2 {
        for t in 1..=ring.r() {
            let mut h = 0.0;
            for q in 0..q_law.len() {
                let pq = q_law.get(q);
                if pq == 0.0 {
                    continue;
                }
                for s in 0..state[i].len() {
                    let psi = state[i].get(s);
                    if psi == 0.0 {
                        continue;
                    }
                    h += pq * psi * project_pmf(a.v_law(i, q, s), ring, t)?.entropy();
                }
            }
            if h < min_term {
                min_term = h;
                binding = (i + 1, t);
            }
            terms.push(GroupTerm {
                encoder: i + 1,
                t,
                h_v_level_given_qs: h,
            });
        }
    }

    Ok(GroupCodeReport {
        value: min_term - h_vsum_given_yq,
        min_term,
        binding,
        h_vsum_given_yq,
        terms,
        formula: "R1+R2 <= min_{i,1<=t<=r} H([V_i]_t|Q,S_i) - H(V1+V2|Y,Q)",
    })
}

/// The structured correction added to every combined rate bound.
fn gamma_qgc(
    ch: &ChannelSpec,
    a: &CombinedAssignment,
    j5: &JointPmf,
) -> Result<GammaReport> {
    let ring = a.ring();
    let m = ring.size();
    let log2p = (ring.p() as f64).log2();
    let base = ring.log2_size();
    let q_law = a.q_law();
    let state = [ch.state1_marginal(), ch.state2_marginal()];

    let h_vsum_given_yuq = j5.entropy_of(&["q", "u1", "u2", "vsum", "y"])?
        - j5.entropy_of(&["q", "u1", "u2", "y"])?;

    let num = h_wsum_given_q(q_law, &a.w_slices(0), &a.w_slices(1))?;
    let mut raw = Vec::new();
    for i in 0..2 {
        let mx = a.x_size(i);
        for t in 1..=ring.r() {
            let den = h_w_level_given_q(q_law, &a.w_slices(i), ring, t)?;
            // H([V_i]_t | U_i, Q, S_i) from the joint conditional tables.
            let mut h_v_level = 0.0;
            for q in 0..q_law.len() {
                let pq = q_law.get(q);
                if pq == 0.0 {
                    continue;
                }
                for s in 0..state[i].len() {
                    let psi = state[i].get(s);
                    if psi == 0.0 {
                        continue;
                    }
                    let table = a.table(i, q, s).as_slice();
                    for u in 0..a.u_size(i) {
                        let mut pv = vec![0.0; m];
                        let mut pu = 0.0;
                        for v in 0..m {
                            for x in 0..mx {
                                let p = table[(u * m + v) * mx + x];
                                pv[v] += p;
                                pu += p;
                            }
                        }
                        if pu == 0.0 {
                            continue;
                        }
                        for e in &mut pv {
                            *e /= pu;
                        }
                        h_v_level +=
                            pq * psi * pu * project_pmf(&Pmf::new(pv)?, ring, t)?.entropy();
                    }
                }
            }
            let cofactor = (t as f64) * log2p - h_v_level;
            let (value, degenerate) = if den <= DEGEN_TOL {
                (None, true)
            } else {
                (Some(num / den * cofactor), false)
            };
            raw.push(SumTerm {
                encoder: i + 1,
                t,
                numerator: num,
                denominator: den,
                cofactor,
                value,
                degenerate,
                ratio_v_reading: None,
                value_v_reading: None,
            });
        }
    }
    let pile = assemble_terms(raw)?;
    Ok(GammaReport {
        value: base - h_vsum_given_yuq - pile.max_term,
        base,
        h_vsum_given_yuq,
        max_term: pile.max_term,
        binding: pile.binding,
        terms: pile.terms,
    })
}

/// Rate bounds of the combined structured-plus-unstructured region.
pub fn combined_rates(ch: &ChannelSpec, a: &CombinedAssignment) -> Result<CombinedRates> {
    ch.require_independent_states()?;
    let (j5, js) = combined_accumulate(ch, a)?;
    let jy = j5.marginal(&["q", "u1", "u2", "y"])?;
    let i1y = jy.mutual_information(&["u1"], &["y"], &["u2", "q"])?;
    let i2y = jy.mutual_information(&["u2"], &["y"], &["u1", "q"])?;
    let i12y = jy.mutual_information(&["u1", "u2"], &["y"], &["q"])?;
    let is1 = js.mutual_information(&["u1"], &["s1"], &["q"])?;
    let is2 = js.mutual_information(&["u2"], &["s2"], &["q"])?;
    let is12 = js.mutual_information(&["u1", "u2"], &["s1", "s2"], &["q"])?;
    let gamma = gamma_qgc(ch, a, &j5)?;

    let sum_bound_via_simplified = if a.u_size(0) == 1 && a.u_size(1) == 1 {
        let qgc = a.to_qgc(ch)?;
        qgc_sum_rate(ch, &qgc)?
            .simplified
            .value
            .map(|v| i12y - is12 + v)
    } else {
        None
    };

    Ok(CombinedRates {
        r1_bound: i1y - is1 + gamma.value,
        r2_bound: i2y - is2 + gamma.value,
        sum_bound: i12y - is12 + gamma.value,
        gamma,
        terms: MiTerms {
            i_u1_y_given_u2q: i1y,
            i_u2_y_given_u1q: i2y,
            i_u12_y_given_q: i12y,
            i_u1_s1_given_q: is1,
            i_u2_s2_given_q: is2,
            i_u12_s12_given_q: Some(is12),
        },
        sum_bound_via_simplified,
        label_note: "the source statement labels both individual-rate bounds R1; \
                     the second is reported here as the bound on R2",
        formula: "R1 <= I(U1;Y|U2,Q) - I(U1;S1|Q) + Gamma; \
                  R2 <= I(U2;Y|U1,Q) - I(U2;S2|Q) + Gamma; \
                  R1+R2 <= I(U1,U2;Y|Q) - I(U1,U2;S1,S2|Q) + Gamma; \
                  Gamma = r*log2(p) - H(V1+V2|Y,U1,U2,Q) - max_{i,1<=t<=r} \
                  [H(W1+W2|Q)/H([W_i]_t|Q)] * (t*log2(p) - H([V_i]_t|U_i,Q,S_i))",
    })
}
