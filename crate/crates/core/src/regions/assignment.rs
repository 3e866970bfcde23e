use rand::Rng;
use serde::Deserialize;

use crate::channels::{parse_vec, ChannelSpec, ProbValue};
use crate::error::{Error, Result};
use crate::modrings::RingSpec;
use crate::probinfo::Pmf;

const COST_SLACK: f64 = 1e-9;

/// Time-sharing variable plus, per encoder and Q value, a joint conditional
/// p(u_i, x_i | s_i, q). The auxiliary alphabet sizes are free.
#[derive(Debug, Clone)]
pub struct GpAssignment {
    q_law: Pmf,
    u_sizes: [usize; 2],
    /// cond[i][q][s] is a Pmf over (u, x), u-major.
    cond: [Vec<Vec<Pmf>>; 2],
}

impl GpAssignment {
    pub fn new(
        ch: &ChannelSpec,
        q_law: Pmf,
        u_sizes: [usize; 2],
        cond: [Vec<Vec<Pmf>>; 2],
    ) -> Result<Self> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let s_sizes = [al.s1, al.s2];
        for i in 0..2 {
            if u_sizes[i] == 0 {
                return Err(Error::Dimension(format!("encoder {}: empty U alphabet", i + 1)));
            }
            if cond[i].len() != q_law.len() {
                return Err(Error::Dimension(format!(
                    "encoder {}: {} Q slices for |Q| = {}",
                    i + 1,
                    cond[i].len(),
                    q_law.len()
                )));
            }
            for (q, per_s) in cond[i].iter().enumerate() {
                if per_s.len() != s_sizes[i] {
                    return Err(Error::Dimension(format!(
                        "encoder {} q={q}: {} state rows for |S| = {}",
                        i + 1,
                        per_s.len(),
                        s_sizes[i]
                    )));
                }
                for (s, pmf) in per_s.iter().enumerate() {
                    if pmf.len() != u_sizes[i] * x_sizes[i] {
                        return Err(Error::Dimension(format!(
                            "encoder {} q={q} s={s}: table size {} != |U|*|X| = {}",
                            i + 1,
                            pmf.len(),
                            u_sizes[i] * x_sizes[i]
                        )));
                    }
                }
            }
        }
        let a = GpAssignment { q_law, u_sizes, cond };
        a.check_costs(ch)?;
        Ok(a)
    }

    fn check_costs(&self, ch: &ChannelSpec) -> Result<()> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let state = [ch.state1_marginal(), ch.state2_marginal()];
        let costs = [ch.cost1(), ch.cost2()];
        let taus = [ch.tau1(), ch.tau2()];
        for i in 0..2 {
            let mut avg = 0.0;
            for q in 0..self.q_law.len() {
                let pq = self.q_law.get(q);
                for s in 0..state[i].len() {
                    let w = pq * state[i].get(s);
                    let table = &self.cond[i][q][s];
                    for u in 0..self.u_sizes[i] {
                        for x in 0..x_sizes[i] {
                            avg += w * table.get(u * x_sizes[i] + x) * costs[i].get(x, s);
                        }
                    }
                }
            }
            if avg > taus[i] + COST_SLACK {
                return Err(Error::Infeasible(format!(
                    "encoder {}: average cost {avg:.6} exceeds budget {}",
                    i + 1,
                    taus[i]
                )));
            }
        }
        Ok(())
    }

    pub fn q_law(&self) -> &Pmf {
        &self.q_law
    }

    pub fn u_size(&self, i: usize) -> usize {
        self.u_sizes[i]
    }

    /// p(u, x | s, q) table for encoder i (0-based), u-major.
    pub fn table(&self, i: usize, q: usize, s: usize) -> &Pmf {
        &self.cond[i][q][s]
    }
}

/// Theorem-style structured assignment: per encoder, a bin-layer law p(w|q)
/// over the ring, a covering target p(v|q,s), and an input law p(x|q,v,s).
#[derive(Debug, Clone)]
pub struct QgcAssignment {
    ring: RingSpec,
    q_law: Pmf,
    /// w[i][q] over the ring.
    w: [Vec<Pmf>; 2],
    /// v[i][q][s] over the ring.
    v: [Vec<Vec<Pmf>>; 2],
    /// x[i][q][v][s] over the encoder's input alphabet.
    x: [Vec<Vec<Vec<Pmf>>>; 2],
}

impl QgcAssignment {
    pub fn new(
        ch: &ChannelSpec,
        ring: RingSpec,
        q_law: Pmf,
        w: [Vec<Pmf>; 2],
        v: [Vec<Vec<Pmf>>; 2],
        x: [Vec<Vec<Vec<Pmf>>>; 2],
    ) -> Result<Self> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let s_sizes = [al.s1, al.s2];
        let m = ring.size();
        for i in 0..2 {
            if w[i].len() != q_law.len() || v[i].len() != q_law.len() || x[i].len() != q_law.len() {
                return Err(Error::Dimension(format!(
                    "encoder {}: per-Q table counts must equal |Q| = {}",
                    i + 1,
                    q_law.len()
                )));
            }
            for q in 0..q_law.len() {
                if w[i][q].len() != m {
                    return Err(Error::Dimension(format!(
                        "encoder {} q={q}: w law size {} != ring size {m}",
                        i + 1,
                        w[i][q].len()
                    )));
                }
                if v[i][q].len() != s_sizes[i] {
                    return Err(Error::Dimension(format!(
                        "encoder {} q={q}: {} v rows for |S| = {}",
                        i + 1,
                        v[i][q].len(),
                        s_sizes[i]
                    )));
                }
                for s in 0..s_sizes[i] {
                    if v[i][q][s].len() != m {
                        return Err(Error::Dimension(format!(
                            "encoder {} q={q} s={s}: v law size {} != ring size {m}",
                            i + 1,
                            v[i][q][s].len()
                        )));
                    }
                }
                if x[i][q].len() != m {
                    return Err(Error::Dimension(format!(
                        "encoder {} q={q}: {} x slices for ring size {m}",
                        i + 1,
                        x[i][q].len()
                    )));
                }
                for vv in 0..m {
                    if x[i][q][vv].len() != s_sizes[i] {
                        return Err(Error::Dimension(format!(
                            "encoder {} q={q} v={vv}: {} x rows for |S| = {}",
                            i + 1,
                            x[i][q][vv].len(),
                            s_sizes[i]
                        )));
                    }
                    for s in 0..s_sizes[i] {
                        if x[i][q][vv][s].len() != x_sizes[i] {
                            return Err(Error::Dimension(format!(
                                "encoder {} q={q} v={vv} s={s}: x law size {} != |X| = {}",
                                i + 1,
                                x[i][q][vv][s].len(),
                                x_sizes[i]
                            )));
                        }
                    }
                }
            }
        }
        let a = QgcAssignment { ring, q_law, w, v, x };
        a.check_costs(ch)?;
        Ok(a)
    }

    fn check_costs(&self, ch: &ChannelSpec) -> Result<()> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let state = [ch.state1_marginal(), ch.state2_marginal()];
        let costs = [ch.cost1(), ch.cost2()];
        let taus = [ch.tau1(), ch.tau2()];
        for i in 0..2 {
            let mut avg = 0.0;
            for q in 0..self.q_law.len() {
                let pq = self.q_law.get(q);
                for s in 0..state[i].len() {
                    let ws = pq * state[i].get(s);
                    for vv in 0..self.ring.size() {
                        let pv = self.v[i][q][s].get(vv);
                        if pv == 0.0 {
                            continue;
                        }
                        for x in 0..x_sizes[i] {
                            avg += ws * pv * self.x[i][q][vv][s].get(x) * costs[i].get(x, s);
                        }
                    }
                }
            }
            if avg > taus[i] + COST_SLACK {
                return Err(Error::Infeasible(format!(
                    "encoder {}: average cost {avg:.6} exceeds budget {}",
                    i + 1,
                    taus[i]
                )));
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn q_law(&self) -> &Pmf {
        &self.q_law
    }

    pub fn w_law(&self, i: usize, q: usize) -> &Pmf {
        &self.w[i][q]
    }

    /// All per-Q bin-layer laws of encoder i.
    pub fn w_slices(&self, i: usize) -> &[Pmf] {
        &self.w[i]
    }

    pub fn v_law(&self, i: usize, q: usize, s: usize) -> &Pmf {
        &self.v[i][q][s]
    }

    pub fn x_law(&self, i: usize, q: usize, v: usize, s: usize) -> &Pmf {
        &self.x[i][q][v][s]
    }
}

/// Structured-plus-unstructured assignment: QGC layers plus, per encoder, a
/// joint conditional p(u_i, v_i, x_i | q, s_i) housing the auxiliary U next
/// to the ring variables.
#[derive(Debug, Clone)]
pub struct CombinedAssignment {
    ring: RingSpec,
    q_law: Pmf,
    u_sizes: [usize; 2],
    w: [Vec<Pmf>; 2],
    /// uvx[i][q][s] is a Pmf over (u, v, x), u-major then v then x.
    uvx: [Vec<Vec<Pmf>>; 2],
    x_sizes: [usize; 2],
}

impl CombinedAssignment {
    pub fn new(
        ch: &ChannelSpec,
        ring: RingSpec,
        q_law: Pmf,
        u_sizes: [usize; 2],
        w: [Vec<Pmf>; 2],
        uvx: [Vec<Vec<Pmf>>; 2],
    ) -> Result<Self> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let s_sizes = [al.s1, al.s2];
        let m = ring.size();
        for i in 0..2 {
            if u_sizes[i] == 0 {
                return Err(Error::Dimension(format!("encoder {}: empty U alphabet", i + 1)));
            }
            if w[i].len() != q_law.len() || uvx[i].len() != q_law.len() {
                return Err(Error::Dimension(format!(
                    "encoder {}: per-Q table counts must equal |Q| = {}",
                    i + 1,
                    q_law.len()
                )));
            }
            for q in 0..q_law.len() {
                if w[i][q].len() != m {
                    return Err(Error::Dimension(format!(
                        "encoder {} q={q}: w law size {} != ring size {m}",
                        i + 1,
                        w[i][q].len()
                    )));
                }
                if uvx[i][q].len() != s_sizes[i] {
                    return Err(Error::Dimension(format!(
                        "encoder {} q={q}: {} state rows for |S| = {}",
                        i + 1,
                        uvx[i][q].len(),
                        s_sizes[i]
                    )));
                }
                for s in 0..s_sizes[i] {
                    if uvx[i][q][s].len() != u_sizes[i] * m * x_sizes[i] {
                        return Err(Error::Dimension(format!(
                            "encoder {} q={q} s={s}: table size {} != |U|*|ring|*|X| = {}",
                            i + 1,
                            uvx[i][q][s].len(),
                            u_sizes[i] * m * x_sizes[i]
                        )));
                    }
                }
            }
        }
        let a = CombinedAssignment {
            ring,
            q_law,
            u_sizes,
            w,
            uvx,
            x_sizes,
        };
        a.check_costs(ch)?;
        Ok(a)
    }

    fn check_costs(&self, ch: &ChannelSpec) -> Result<()> {
        let state = [ch.state1_marginal(), ch.state2_marginal()];
        let costs = [ch.cost1(), ch.cost2()];
        let taus = [ch.tau1(), ch.tau2()];
        for i in 0..2 {
            let mut avg = 0.0;
            for q in 0..self.q_law.len() {
                let pq = self.q_law.get(q);
                for s in 0..state[i].len() {
                    let wgt = pq * state[i].get(s);
                    let table = &self.uvx[i][q][s];
                    for (flat, &p) in table.as_slice().iter().enumerate() {
                        let x = flat % self.x_sizes[i];
                        avg += wgt * p * costs[i].get(x, s);
                    }
                }
            }
            if avg > taus[i] + COST_SLACK {
                return Err(Error::Infeasible(format!(
                    "encoder {}: average cost {avg:.6} exceeds budget {}",
                    i + 1,
                    taus[i]
                )));
            }
        }
        Ok(())
    }

    /// Wrap a QGC assignment with a one-point U alphabet.
    pub fn from_qgc_trivial_u(ch: &ChannelSpec, a: &QgcAssignment) -> Result<Self> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let s_sizes = [al.s1, al.s2];
        let m = a.ring().size();
        let mut uvx: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            for q in 0..a.q_law().len() {
                let mut per_s = Vec::new();
                for s in 0..s_sizes[i] {
                    let mut table = vec![0.0; m * x_sizes[i]];
                    for vv in 0..m {
                        let pv = a.v_law(i, q, s).get(vv);
                        for x in 0..x_sizes[i] {
                            table[vv * x_sizes[i] + x] = pv * a.x_law(i, q, vv, s).get(x);
                        }
                    }
                    per_s.push(Pmf::new(table)?);
                }
                uvx[i].push(per_s);
            }
        }
        CombinedAssignment::new(
            ch,
            a.ring(),
            a.q_law().clone(),
            [1, 1],
            [a.w[0].clone(), a.w[1].clone()],
            uvx,
        )
    }

    /// Marginalize out U: the structured view with p(v|q,s) and p(x|q,v,s).
    /// Exact when the U alphabets are one-point; lossy otherwise (the U
    /// structure is folded into the input law). Conditional rows for
    /// unreachable (q, v, s) combinations default to a point mass at x = 0.
    pub fn to_qgc(&self, ch: &ChannelSpec) -> Result<QgcAssignment> {
        let m = self.ring.size();
        let mut v: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
        let mut x: [Vec<Vec<Vec<Pmf>>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            let mx = self.x_sizes[i];
            for q in 0..self.q_law.len() {
                let mut v_rows = Vec::new();
                let mut x_slice: Vec<Vec<Pmf>> = (0..m).map(|_| Vec::new()).collect();
                for s in 0..self.uvx[i][q].len() {
                    let table = self.uvx[i][q][s].as_slice();
                    let mut pv = vec![0.0; m];
                    let mut pvx = vec![0.0; m * mx];
                    for (flat, &p) in table.iter().enumerate() {
                        let xx = flat % mx;
                        let vv = (flat / mx) % m;
                        pv[vv] += p;
                        pvx[vv * mx + xx] += p;
                    }
                    for vv in 0..m {
                        let row = if pv[vv] > 0.0 {
                            Pmf::new(
                                pvx[vv * mx..(vv + 1) * mx]
                                    .iter()
                                    .map(|&w| w / pv[vv])
                                    .collect(),
                            )?
                        } else {
                            Pmf::delta(mx, 0)?
                        };
                        x_slice[vv].push(row);
                    }
                    v_rows.push(Pmf::new(pv)?);
                }
                v[i].push(v_rows);
                x[i].push(x_slice);
            }
        }
        QgcAssignment::new(
            ch,
            self.ring,
            self.q_law.clone(),
            [self.w[0].clone(), self.w[1].clone()],
            v,
            x,
        )
    }

    /// Marginalize out V: the Gel'fand-Pinsker view p(u, x | s, q).
    pub fn to_gp(&self, ch: &ChannelSpec) -> Result<GpAssignment> {
        let m = self.ring.size();
        let mut cond: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            for q in 0..self.q_law.len() {
                let mut per_s = Vec::new();
                for s in 0..self.uvx[i][q].len() {
                    let table = &self.uvx[i][q][s];
                    let mut ux = vec![0.0; self.u_sizes[i] * self.x_sizes[i]];
                    for (flat, &p) in table.as_slice().iter().enumerate() {
                        let x = flat % self.x_sizes[i];
                        let u = flat / (self.x_sizes[i] * m);
                        ux[u * self.x_sizes[i] + x] += p;
                    }
                    per_s.push(Pmf::new(ux)?);
                }
                cond[i].push(per_s);
            }
        }
        GpAssignment::new(ch, self.q_law.clone(), self.u_sizes, cond)
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn q_law(&self) -> &Pmf {
        &self.q_law
    }

    pub fn u_size(&self, i: usize) -> usize {
        self.u_sizes[i]
    }

    pub fn x_size(&self, i: usize) -> usize {
        self.x_sizes[i]
    }

    pub fn w_law(&self, i: usize, q: usize) -> &Pmf {
        &self.w[i][q]
    }

    /// All per-Q bin-layer laws of encoder i.
    pub fn w_slices(&self, i: usize) -> &[Pmf] {
        &self.w[i]
    }

    /// p(u, v, x | q, s) table, u-major then v then x.
    pub fn table(&self, i: usize, q: usize, s: usize) -> &Pmf {
        &self.uvx[i][q][s]
    }

    /// Random assignment with constant V per (encoder, q) and uniform W, the
    /// degenerate family on which the structured bonus vanishes. Input laws
    /// only use zero-extra-cost symbols so the cost budget always holds.
    pub fn random_degenerate(
        ch: &ChannelSpec,
        ring: RingSpec,
        q_size: usize,
        u_sizes: [usize; 2],
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let al = ch.alphabets();
        let x_sizes = [al.x1, al.x2];
        let s_sizes = [al.s1, al.s2];
        let costs = [ch.cost1(), ch.cost2()];
        let taus = [ch.tau1(), ch.tau2()];
        let m = ring.size();
        let q_law = Pmf::new(random_simplex(q_size, rng))?;
        let mut w: [Vec<Pmf>; 2] = [Vec::new(), Vec::new()];
        let mut uvx: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            for _ in 0..q_size {
                w[i].push(Pmf::uniform(m)?);
                let v_const = rng.gen_range(0..m);
                let mut per_s = Vec::new();
                for s in 0..s_sizes[i] {
                    let allowed: Vec<usize> = (0..x_sizes[i])
                        .filter(|&x| costs[i].get(x, s) <= taus[i])
                        .collect();
                    if allowed.is_empty() {
                        return Err(Error::Infeasible(format!(
                            "encoder {} s={s}: no input symbol within the cost budget",
                            i + 1
                        )));
                    }
                    let u_law = random_simplex(u_sizes[i], rng);
                    let mut table = vec![0.0; u_sizes[i] * m * x_sizes[i]];
                    for u in 0..u_sizes[i] {
                        let x_law = random_simplex(allowed.len(), rng);
                        for (j, &x) in allowed.iter().enumerate() {
                            table[(u * m + v_const) * x_sizes[i] + x] = u_law[u] * x_law[j];
                        }
                    }
                    per_s.push(Pmf::new(table)?);
                }
                uvx[i].push(per_s);
            }
        }
        CombinedAssignment::new(ch, ring, q_law, u_sizes, w, uvx)
    }
}

fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = v.iter().sum();
    for e in &mut v {
        *e /= total;
    }
    v
}

// --- JSON format --------------------------------------------------------

#[derive(Debug, Deserialize)]
struct RingDoc {
    p: u32,
    r: u32,
}

#[derive(Debug, Deserialize)]
struct EncoderDoc {
    #[serde(default)]
    u_size: Option<usize>,
    #[serde(default)]
    w: Option<Vec<Vec<ProbValue>>>,
    /// Per q, per s: p(v|q,s) over the ring.
    #[serde(default)]
    v: Option<Vec<Vec<Vec<ProbValue>>>>,
    /// Per q, per v, per s: p(x|q,v,s).
    #[serde(default)]
    x: Option<Vec<Vec<Vec<Vec<ProbValue>>>>>,
    /// Per q, per s: p(u,x|s,q), u-major (GP kind).
    #[serde(default)]
    ux: Option<Vec<Vec<Vec<ProbValue>>>>,
    /// Per q, per s: p(u,v,x|q,s), u-major then v then x (combined kind).
    #[serde(default)]
    uvx: Option<Vec<Vec<Vec<ProbValue>>>>,
}

#[derive(Debug, Deserialize)]
struct AssignmentDoc {
    kind: String,
    #[serde(default)]
    ring: Option<RingDoc>,
    q: Vec<ProbValue>,
    encoders: Vec<EncoderDoc>,
}

#[derive(Debug, Clone)]
pub enum Assignment {
    Gp(GpAssignment),
    Qgc(QgcAssignment),
    Combined(CombinedAssignment),
}

fn pmf_from(raw: &[ProbValue], field: &str) -> Result<Pmf> {
    Pmf::new(parse_vec(raw, field)?)
}

fn pmf_rows(raw: &[Vec<ProbValue>], field: &str) -> Result<Vec<Pmf>> {
    raw.iter()
        .enumerate()
        .map(|(j, row)| pmf_from(row, &format!("{field}[{j}]")))
        .collect()
}

/// Parse an assignment document. The channel provides alphabet sizes and the
/// cost budget against which the assignment is validated.
pub fn load_assignment(doc: &str, ch: &ChannelSpec) -> Result<Assignment> {
    let parsed: AssignmentDoc =
        serde_json::from_str(doc).map_err(|e| Error::Load(format!("assignment: {e}")))?;
    if parsed.encoders.len() != 2 {
        return Err(Error::Load(format!(
            "assignment: expected 2 encoders, got {}",
            parsed.encoders.len()
        )));
    }
    let q_law = pmf_from(&parsed.q, "q")?;
    let ring = parsed
        .ring
        .as_ref()
        .map(|r| RingSpec::new(r.p, r.r))
        .transpose()?;
    match parsed.kind.as_str() {
        "gp" => {
            let mut u_sizes = [0usize; 2];
            let mut cond: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
            for (i, enc) in parsed.encoders.iter().enumerate() {
                let ux = enc.ux.as_ref().ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `ux`", i + 1))
                })?;
                u_sizes[i] = enc.u_size.ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `u_size`", i + 1))
                })?;
                for (q, per_s) in ux.iter().enumerate() {
                    cond[i].push(pmf_rows(per_s, &format!("encoders[{i}].ux[{q}]"))?);
                }
            }
            Ok(Assignment::Gp(GpAssignment::new(ch, q_law, u_sizes, cond)?))
        }
        "qgc" => {
            let ring = ring.ok_or_else(|| Error::Load("assignment: missing `ring`".into()))?;
            let mut w: [Vec<Pmf>; 2] = [Vec::new(), Vec::new()];
            let mut v: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
            let mut x: [Vec<Vec<Vec<Pmf>>>; 2] = [Vec::new(), Vec::new()];
            for (i, enc) in parsed.encoders.iter().enumerate() {
                let w_doc = enc.w.as_ref().ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `w`", i + 1))
                })?;
                let v_doc = enc.v.as_ref().ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `v`", i + 1))
                })?;
                let x_doc = enc.x.as_ref().ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `x`", i + 1))
                })?;
                w[i] = pmf_rows(w_doc, &format!("encoders[{i}].w"))?;
                for (q, per_s) in v_doc.iter().enumerate() {
                    v[i].push(pmf_rows(per_s, &format!("encoders[{i}].v[{q}]"))?);
                }
                for (q, per_v) in x_doc.iter().enumerate() {
                    let mut slice = Vec::new();
                    for (vv, per_s) in per_v.iter().enumerate() {
                        slice.push(pmf_rows(per_s, &format!("encoders[{i}].x[{q}][{vv}]"))?);
                    }
                    x[i].push(slice);
                }
            }
            Ok(Assignment::Qgc(QgcAssignment::new(ch, ring, q_law, w, v, x)?))
        }
        "combined" => {
            let ring = ring.ok_or_else(|| Error::Load("assignment: missing `ring`".into()))?;
            let mut u_sizes = [0usize; 2];
            let mut w: [Vec<Pmf>; 2] = [Vec::new(), Vec::new()];
            let mut uvx: [Vec<Vec<Pmf>>; 2] = [Vec::new(), Vec::new()];
            for (i, enc) in parsed.encoders.iter().enumerate() {
                u_sizes[i] = enc.u_size.ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `u_size`", i + 1))
                })?;
                let w_doc = enc.w.as_ref().ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `w`", i + 1))
                })?;
                let uvx_doc = enc.uvx.as_ref().ok_or_else(|| {
                    Error::Load(format!("assignment encoder {}: missing `uvx`", i + 1))
                })?;
                w[i] = pmf_rows(w_doc, &format!("encoders[{i}].w"))?;
                for (q, per_s) in uvx_doc.iter().enumerate() {
                    uvx[i].push(pmf_rows(per_s, &format!("encoders[{i}].uvx[{q}]"))?);
                }
            }
            Ok(Assignment::Combined(CombinedAssignment::new(
                ch, ring, q_law, u_sizes, w, uvx,
            )?))
        }
        other => Err(Error::Load(format!(
            "assignment: unknown kind `{other}` (expected gp, qgc, or combined)"
        ))),
    }
}

/// Assignments shipped with the crate, loadable by name.
pub fn builtin_assignment(name: &str, ch: &ChannelSpec) -> Result<Assignment> {
    let doc = match name {
        "lemma4" => include_str!("../../assets/lemma4.json"),
        "degenerate-qgc" => include_str!("../../assets/degenerate-qgc.json"),
        other => {
            return Err(Error::Load(format!(
                "unknown built-in assignment `{other}` (have: lemma4, degenerate-qgc)"
            )))
        }
    };
    load_assignment(doc, ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::builtin_example1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gp_cost_violation_detected() {
        let ch = builtin_example1();
        // Encoder 1 putting mass on x=1 (cost 1) violates tau1 = 0.
        let table = Pmf::new(vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let per_s = vec![table; 4];
        let ok_table = Pmf::new(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let ok_s = vec![ok_table; 4];
        let err = GpAssignment::new(
            &ch,
            Pmf::uniform(1).unwrap(),
            [2, 2],
            [vec![per_s], vec![ok_s]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }

    #[test]
    fn builtin_lemma4_loads_and_costs_zero() {
        let ch = builtin_example1();
        let a = match builtin_assignment("lemma4", &ch).unwrap() {
            Assignment::Qgc(a) => a,
            _ => panic!("lemma4 should parse as a qgc assignment"),
        };
        assert_eq!(a.ring().modulus(), 4);
        // v law for s=1 puts mass on -1=3 and -1+2=1.
        let v = a.v_law(0, 0, 1);
        assert!((v.get(3) - 0.5).abs() < 1e-12 && (v.get(1) - 0.5).abs() < 1e-12);
        // x = v - s: encoder 1, v=3, s=1 -> x=2.
        let x = a.x_law(0, 0, 3, 1);
        assert_eq!(x.support(), vec![2]);
    }

    #[test]
    fn builtin_degenerate_loads_as_combined() {
        let ch = builtin_example1();
        let a = match builtin_assignment("degenerate-qgc", &ch).unwrap() {
            Assignment::Combined(a) => a,
            _ => panic!("degenerate-qgc should parse as a combined assignment"),
        };
        assert_eq!(a.u_size(0), 2);
        // W uniform on the whole ring.
        for i in 0..2 {
            for x in 0..4 {
                assert!((a.w_law(i, 0).get(x) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_degenerate_respects_cost_and_shape() {
        let ch = builtin_example1();
        let ring = RingSpec::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a =
                CombinedAssignment::random_degenerate(&ch, ring, 2, [3, 2], &mut rng).unwrap();
            // Per (i, q), V is a single constant across s and u.
            for i in 0..2 {
                for q in 0..2 {
                    let mut seen = std::collections::BTreeSet::new();
                    for s in 0..4 {
                        let table = a.table(i, q, s);
                        for (flat, &p) in table.as_slice().iter().enumerate() {
                            if p > 0.0 {
                                let v = (flat / a.x_size(i)) % 4;
                                seen.insert(v);
                            }
                        }
                    }
                    assert_eq!(seen.len(), 1, "encoder {i} q={q} has non-constant V");
                }
            }
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        let ch = builtin_example1();
        let err = load_assignment(r#"{"kind":"zzz","q":[1],"encoders":[{},{}]}"#, &ch).unwrap_err();
        assert!(err.to_string().contains("unknown kind"));
    }

    #[test]
    fn trivial_u_wrap_preserves_marginals() {
        let ch = builtin_example1();
        let a = match builtin_assignment("lemma4", &ch).unwrap() {
            Assignment::Qgc(a) => a,
            _ => unreachable!(),
        };
        let c = CombinedAssignment::from_qgc_trivial_u(&ch, &a).unwrap();
        assert_eq!(c.u_size(0), 1);
        // p(v,x|q,s) must match the product of the original tables.
        for s in 0..4 {
            let table = c.table(0, 0, s);
            for v in 0..4 {
                for x in 0..4 {
                    let expect = a.v_law(0, 0, s).get(v) * a.x_law(0, 0, v, s).get(x);
                    assert!((table.get(v * 4 + x) - expect).abs() < 1e-12);
                }
            }
        }
    }
}
