use serde::Serialize;

use crate::error::{Error, Result};
use crate::modrings::{project_pmf, RingSpec};
use crate::probinfo::{entropy_bits, JointPmf, Pmf, UQPair};

/// A conditional law p(b|a) together with the marginal p(a) it is weighted by.
#[derive(Debug, Clone)]
pub struct CondLaw {
    given: Pmf,
    rows: Vec<Pmf>,
}

impl CondLaw {
    pub fn new(given: Pmf, rows: Vec<Pmf>) -> Result<Self> {
        if rows.len() != given.len() {
            return Err(Error::Dimension(format!(
                "conditional law has {} rows for a marginal of size {}",
                rows.len(),
                given.len()
            )));
        }
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Dimension("conditional rows must share one nonzero width".into()));
        }
        Ok(CondLaw { given, rows })
    }

    pub fn given(&self) -> &Pmf {
        &self.given
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn row_width(&self) -> usize {
        self.rows[0].len()
    }

    /// The induced joint as a two-axis table, for audit-route cross checks.
    pub fn joint(&self, a_name: &str, b_name: &str) -> Result<JointPmf> {
        let m_a = self.given.len();
        let m_b = self.row_width();
        let mut w = Vec::with_capacity(m_a * m_b);
        for a in 0..m_a {
            for b in 0..m_b {
                w.push(self.given.get(a) * self.rows[a].get(b));
            }
        }
        JointPmf::new(&[(a_name, m_a), (b_name, m_b)], w)
    }
}

const DEGEN_TOL: f64 = 1e-12;

/// One level-t term of a covering/packing bound.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdTerm {
    pub t: u32,
    pub numerator: f64,
    pub denominator: f64,
    pub cofactor: f64,
    /// None when the term is vacuous (dropped from a min).
    pub value: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// The max (covering) or min (packing) over the level terms; packing with
    /// every term vacuous reports +inf (no constraint).
    pub value: f64,
    pub binding_t: Option<u32>,
    pub terms: Vec<ThresholdTerm>,
}

/// Minimal code rate that covers the source: max over t in [1, r] of
/// (H(U|Q)/H([U]_t|Q)) * (t*log2(p) - H([Xhat]_t|X)). A zero denominator with
/// a positive cofactor means the code cannot cover at that level at any rate.
pub fn covering_threshold(
    uq: &UQPair,
    xhat_given_x: &CondLaw,
    ring: &RingSpec,
) -> Result<ThresholdReport> {
    if uq.alphabet() != ring.size() {
        return Err(Error::Dimension(format!(
            "code variable alphabet {} does not match ring size {}",
            uq.alphabet(),
            ring.size()
        )));
    }
    if xhat_given_x.row_width() != ring.size() {
        return Err(Error::Dimension(format!(
            "reproduction alphabet {} does not match ring size {}",
            xhat_given_x.row_width(),
            ring.size()
        )));
    }
    let num = uq.h_u_given_q();
    let log2_p = (ring.p() as f64).log2();
    let mut terms = Vec::new();
    let mut best: Option<(f64, u32)> = None;
    for t in 1..=ring.r() {
        let den = h_projected_given_q(uq, ring, t)?;
        let h_hat_t = cond_entropy_projected(xhat_given_x, ring, t)?;
        let cofactor = t as f64 * log2_p - h_hat_t;
        let (value, degenerate) = if den <= DEGEN_TOL {
            if cofactor > DEGEN_TOL {
                return Err(Error::Infeasible(format!(
                    "covering level t={t}: code provides no rate at this level \
                     (denominator 0) but the level needs {cofactor:.6} bits"
                )));
            }
            (0.0, true)
        } else {
            ((num / den) * cofactor, false)
        };
        terms.push(ThresholdTerm {
            t,
            numerator: num,
            denominator: den,
            cofactor,
            value: Some(value),
            degenerate,
        });
        if best.map(|(v, _)| value > v).unwrap_or(true) {
            best = Some((value, t));
        }
    }
    let (value, binding_t) = best.map(|(v, t)| (v, Some(t))).unwrap_or((0.0, None));
    Ok(ThresholdReport {
        value,
        binding_t,
        terms,
    })
}

/// Maximal code rate that still packs into the channel: min over t in
/// [0, r-1] of (H(U|Q)/H(U|Q,[U]_t)) * ((r-t)*log2(p) - H(X|Y,[X]_t)).
/// Zero-denominator terms are vacuous and dropped; if every term drops, the
/// bound is +inf (no packing constraint).
pub fn packing_threshold(
    uq: &UQPair,
    y_given_x: &CondLaw,
    ring: &RingSpec,
) -> Result<ThresholdReport> {
    if uq.alphabet() != ring.size() {
        return Err(Error::Dimension(format!(
            "code variable alphabet {} does not match ring size {}",
            uq.alphabet(),
            ring.size()
        )));
    }
    if y_given_x.given().len() != ring.size() {
        return Err(Error::Dimension(format!(
            "input alphabet {} does not match ring size {}",
            y_given_x.given().len(),
            ring.size()
        )));
    }
    let num = uq.h_u_given_q();
    let log2_p = (ring.p() as f64).log2();
    let mut terms = Vec::new();
    let mut best: Option<(f64, u32)> = None;
    for t in 0..ring.r() {
        // H(U|Q,[U]_t) = H(U|Q) - H([U]_t|Q) because [U]_t is a function of U.
        let den = (num - h_projected_given_q(uq, ring, t)?).max(0.0);
        let h_x_given_y_xt = cond_entropy_x_given_y_and_level(y_given_x, ring, t)?;
        let cofactor = (ring.r() - t) as f64 * log2_p - h_x_given_y_xt;
        if den <= DEGEN_TOL {
            terms.push(ThresholdTerm {
                t,
                numerator: num,
                denominator: den,
                cofactor,
                value: None,
                degenerate: true,
            });
            continue;
        }
        let value = (num / den) * cofactor;
        terms.push(ThresholdTerm {
            t,
            numerator: num,
            denominator: den,
            cofactor,
            value: Some(value),
            degenerate: false,
        });
        if best.map(|(v, _)| value < v).unwrap_or(true) {
            best = Some((value, t));
        }
    }
    let (value, binding_t) = best
        .map(|(v, t)| (v, Some(t)))
        .unwrap_or((f64::INFINITY, None));
    Ok(ThresholdReport {
        value,
        binding_t,
        terms,
    })
}

/// H([U]_t|Q) for the mixture code variable.
fn h_projected_given_q(uq: &UQPair, ring: &RingSpec, t: u32) -> Result<f64> {
    let mut h = 0.0;
    for (i, cond) in uq.conditionals().iter().enumerate() {
        let w = uq.q().get(i);
        if w == 0.0 {
            continue;
        }
        h += w * project_pmf(cond, *ring, t)?.entropy();
    }
    Ok(h)
}

/// H([B]_t | A) for a conditional law with ring-valued rows.
fn cond_entropy_projected(law: &CondLaw, ring: &RingSpec, t: u32) -> Result<f64> {
    let mut h = 0.0;
    for (a, row) in law.rows().iter().enumerate() {
        let w = law.given().get(a);
        if w == 0.0 {
            continue;
        }
        h += w * project_pmf(row, *ring, t)?.entropy();
    }
    Ok(h)
}

/// H(X | Y, [X]_t) for a channel p(y|x) with ring-valued X.
/// Equals H(X,Y) - H(Y,[X]_t) since [X]_t is a function of X.
fn cond_entropy_x_given_y_and_level(law: &CondLaw, ring: &RingSpec, t: u32) -> Result<f64> {
    let m_x = law.given().len();
    let m_y = law.row_width();
    let level = ring.level_modulus(t)? as usize;
    let mut joint_xy = Vec::with_capacity(m_x * m_y);
    let mut joint_cy = vec![0.0; level * m_y];
    for x in 0..m_x {
        let px = law.given().get(x);
        let c = ring.project(x as u32, t)? as usize;
        for y in 0..m_y {
            let w = px * law.rows()[x].get(y);
            joint_xy.push(w);
            joint_cy[c * m_y + y] += w;
        }
    }
    Ok(entropy_bits(&joint_xy) - entropy_bits(&joint_cy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4() -> RingSpec {
        RingSpec::new(2, 2).unwrap()
    }

    /// W uniform on {0,1} in Z_4; reproduction V with, per source symbol s,
    /// two equiprobable values -s and -s+2; source uniform.
    fn lemma_style_inputs() -> (UQPair, CondLaw) {
        let w = UQPair::single(Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap());
        let mut rows = Vec::new();
        for s in 0u32..4 {
            let mut row = vec![0.0; 4];
            row[((4 - s) % 4) as usize] = 0.5;
            row[((4 - s + 2) % 4) as usize] = 0.5;
            rows.push(Pmf::new(row).unwrap());
        }
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        (w, law)
    }

    #[test]
    fn covering_on_shift_pair_assignment_is_one() {
        let (w, law) = lemma_style_inputs();
        let report = covering_threshold(&w, &law, &z4()).unwrap();
        assert!((report.value - 1.0).abs() < 1e-12, "value {}", report.value);
        for term in &report.terms {
            assert!((term.value.unwrap() - 1.0).abs() < 1e-12, "t={}", term.t);
        }
    }

    #[test]
    fn uniform_reproduction_covers_free() {
        // Xhat | X uniform on the ring: every cofactor is 0, threshold 0.
        let rows = (0..4).map(|_| Pmf::uniform(4).unwrap()).collect();
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        let u = UQPair::single(Pmf::uniform(4).unwrap());
        let report = covering_threshold(&u, &law, &z4()).unwrap();
        assert!(report.value.abs() < 1e-12);
    }

    #[test]
    fn deterministic_reproduction_needs_full_rate() {
        // Xhat = X: H([Xhat]_t|X) = 0, so each term is (r/t)*(t*log2 p) and
        // the threshold is the full r*log2 p.
        let rows = (0..4).map(|x| Pmf::delta(4, x).unwrap()).collect();
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        let u = UQPair::single(Pmf::uniform(4).unwrap());
        let report = covering_threshold(&u, &law, &z4()).unwrap();
        assert!((report.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_code_ratio_is_r_over_t() {
        let ring = RingSpec::new(2, 3).unwrap();
        let u = UQPair::single(Pmf::uniform(8).unwrap());
        let rows = (0..8).map(|_| Pmf::uniform(8).unwrap()).collect();
        let law = CondLaw::new(Pmf::uniform(8).unwrap(), rows).unwrap();
        let report = covering_threshold(&u, &law, &ring).unwrap();
        for term in &report.terms {
            let expect = 3.0 / term.t as f64;
            assert!(
                (term.numerator / term.denominator - expect).abs() < 1e-12,
                "t={} ratio {}",
                term.t,
                term.numerator / term.denominator
            );
        }
    }

    #[test]
    fn covering_infeasible_when_code_misses_a_level() {
        // U supported on {0,2} has a constant first digit, but Xhat = X needs
        // first-digit rate.
        let u = UQPair::single(Pmf::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap());
        let rows = (0..4).map(|x| Pmf::delta(4, x).unwrap()).collect();
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        let err = covering_threshold(&u, &law, &z4()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn covering_degenerate_level_with_zero_cofactor_contributes_zero() {
        // Same subgroup-supported U, but the reproduction's first digit is
        // uniform given X, so the missing level costs nothing.
        let u = UQPair::single(Pmf::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap());
        let rows = (0..4)
            .map(|_| Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap())
            .collect();
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        let report = covering_threshold(&u, &law, &z4()).unwrap();
        let t1 = &report.terms[0];
        assert!(t1.degenerate && t1.value == Some(0.0));
        // t=2 term: (1/1)*(2 - 1) = 1.
        assert!((report.value - 1.0).abs() < 1e-12);
    }

    fn noisy_channel_rows() -> Vec<Pmf> {
        vec![
            Pmf::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap(),
            Pmf::new(vec![0.1, 0.7, 0.1, 0.1]).unwrap(),
            Pmf::new(vec![0.1, 0.1, 0.7, 0.1]).unwrap(),
            Pmf::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
        ]
    }

    #[test]
    fn packing_binary_message_set_reduces_to_t0() {
        // U uniform on {0,1}: every t >= 1 denominator vanishes, so only t=0
        // binds and the bound is r*log2 p - H(X|Y) exactly.
        let u = UQPair::single(Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap());
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), noisy_channel_rows()).unwrap();
        let report = packing_threshold(&u, &law, &z4()).unwrap();
        assert_eq!(report.binding_t, Some(0));
        assert!(report.terms[1].value.is_none() && report.terms[1].degenerate);
        let joint = law.joint("x", "y").unwrap();
        let expect = 2.0 - joint.conditional_entropy(&["x"], &["y"]).unwrap();
        assert_eq!(report.value, expect);
    }

    #[test]
    fn packing_noiseless_channel_gives_full_rate() {
        let u = UQPair::single(Pmf::uniform(4).unwrap());
        let rows = (0..4).map(|x| Pmf::delta(4, x).unwrap()).collect();
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        let report = packing_threshold(&u, &law, &z4()).unwrap();
        assert!((report.value - 2.0).abs() < 1e-12);
        for term in &report.terms {
            assert!((term.value.unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn packing_useless_channel_gives_zero() {
        // Y independent of X, X uniform: every term is exactly 0.
        let u = UQPair::single(Pmf::uniform(4).unwrap());
        let rows = (0..4)
            .map(|_| Pmf::new(vec![0.3, 0.7]).unwrap())
            .collect();
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), rows).unwrap();
        let report = packing_threshold(&u, &law, &z4()).unwrap();
        assert!(report.value.abs() < 1e-12);
    }

    #[test]
    fn packing_constant_code_has_no_constraint() {
        let u = UQPair::single(Pmf::delta(4, 3).unwrap());
        let law = CondLaw::new(Pmf::uniform(4).unwrap(), noisy_channel_rows()).unwrap();
        let report = packing_threshold(&u, &law, &z4()).unwrap();
        assert!(report.value.is_infinite());
        assert_eq!(report.binding_t, None);
    }

    #[test]
    fn packing_entropy_terms_match_joint_route() {
        // Audit the hand-rolled H(X|Y,[X]_t) against the generic table.
        let ring = z4();
        let u = UQPair::single(Pmf::uniform(4).unwrap());
        let x_law = Pmf::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let law = CondLaw::new(x_law, noisy_channel_rows()).unwrap();
        let report = packing_threshold(&u, &law, &ring).unwrap();
        let joint = law.joint("x", "y").unwrap();
        for term in &report.terms {
            let t = term.t;
            let with_level = joint
                .with_derived_axis("xt", &["x"], ring.level_modulus(t).unwrap() as usize, |idx| {
                    ring.project(idx[0] as u32, t).unwrap() as usize
                })
                .unwrap();
            let expect = with_level.conditional_entropy(&["x"], &["y", "xt"]).unwrap();
            let got = (ring.r() - t) as f64 - term.cofactor;
            assert!((got - expect).abs() < 1e-10, "t={t}: {got} vs {expect}");
        }
    }

    #[test]
    fn mixture_code_uses_weighted_projection_entropies() {
        // Two components: uniform on Z4 and uniform on {0,2}; blocks 3 and 1.
        let uq = UQPair::from_components(&[
            (Pmf::uniform(4).unwrap(), 3),
            (Pmf::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap(), 1),
        ])
        .unwrap();
        // H([U]_1|Q) = 0.75*1 + 0.25*0 = 0.75.
        let h1 = h_projected_given_q(&uq, &z4(), 1).unwrap();
        assert!((h1 - 0.75).abs() < 1e-12);
        // H(U|Q) = 0.75*2 + 0.25*1 = 1.75.
        assert!((uq.h_u_given_q() - 1.75).abs() < 1e-12);
    }
}
