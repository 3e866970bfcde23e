use crate::error::{Error, Result};

use super::pmf::{entropy_bits, Pmf, MASS_TOL};

/// Dense joint distribution over a small named product alphabet.
///
/// Weights are stored row-major with the last axis varying fastest. All
/// information measures are in bits. The intended regime is a handful of axes
/// with single-digit alphabet sizes; everything is exact enumeration, nothing
/// is sampled.
#[derive(Debug, Clone)]
pub struct JointPmf {
    axes: Vec<(String, usize)>,
    weights: Vec<f64>,
}

impl JointPmf {
    pub fn new(axes: &[(&str, usize)], weights: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Dimension("joint needs at least one axis".into()));
        }
        let mut total: usize = 1;
        for (name, size) in axes {
            if *size == 0 {
                return Err(Error::Dimension(format!("axis `{name}` has size 0")));
            }
            total = total
                .checked_mul(*size)
                .ok_or_else(|| Error::Resource("joint table size overflows".into()))?;
        }
        for (i, (name, _)) in axes.iter().enumerate() {
            for (other, _) in &axes[i + 1..] {
                if name == other {
                    return Err(Error::Dimension(format!("duplicate axis `{name}`")));
                }
            }
        }
        if weights.len() != total {
            return Err(Error::Dimension(format!(
                "expected {total} weights, got {}",
                weights.len()
            )));
        }
        let mut w = weights;
        let mut sum = 0.0;
        for (i, v) in w.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidPmf(format!("weight[{i}] is not finite")));
            }
            if *v < -1e-12 {
                return Err(Error::InvalidPmf(format!("weight[{i}] = {v} is negative")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
            sum += *v;
        }
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!(
                "total mass {sum} is not within {MASS_TOL} of 1"
            )));
        }
        for v in w.iter_mut() {
            *v /= sum;
        }
        Ok(JointPmf {
            axes: axes.iter().map(|(n, s)| (n.to_string(), *s)).collect(),
            weights: w,
        })
    }

    /// Build from a weight function of the multi-index.
    pub fn from_fn(axes: &[(&str, usize)], f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let sizes: Vec<usize> = axes.iter().map(|(_, s)| *s).collect();
        let total: usize = sizes.iter().product();
        let mut w = vec![0.0; total];
        let mut idx = vec![0usize; sizes.len()];
        for (flat, slot) in w.iter_mut().enumerate() {
            decode_index(flat, &sizes, &mut idx);
            *slot = f(&idx);
        }
        JointPmf::new(axes, w)
    }

    pub fn axes(&self) -> &[(String, usize)] {
        &self.axes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn axis_size(&self, name: &str) -> Result<usize> {
        Ok(self.axes[self.axis_pos(name)?].1)
    }

    fn axis_pos(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownAxis(name.into()))
    }

    fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(|(_, s)| *s).collect()
    }

    /// Marginal over the named axes, in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<JointPmf> {
        let keep: Vec<usize> = names
            .iter()
            .map(|n| self.axis_pos(n))
            .collect::<Result<_>>()?;
        for (i, a) in keep.iter().enumerate() {
            if keep[i + 1..].contains(a) {
                return Err(Error::Dimension(format!("axis `{}` repeated", names[i])));
            }
        }
        let sizes = self.sizes();
        let out_sizes: Vec<usize> = keep.iter().map(|&a| sizes[a]).collect();
        let out_total: usize = out_sizes.iter().product();
        let mut out = vec![0.0; out_total];
        let mut idx = vec![0usize; sizes.len()];
        for (flat, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            decode_index(flat, &sizes, &mut idx);
            let mut o = 0usize;
            for &a in &keep {
                o = o * sizes[a] + idx[a];
            }
            out[o] += w;
        }
        let out_axes: Vec<(&str, usize)> = names
            .iter()
            .zip(out_sizes.iter())
            .map(|(n, s)| (*n, *s))
            .collect();
        JointPmf::new(&out_axes, out)
    }

    /// Single-axis marginal as a `Pmf`.
    pub fn pmf_of(&self, name: &str) -> Result<Pmf> {
        let m = self.marginal(&[name])?;
        Pmf::new(m.weights)
    }

    /// Entropy of the full joint, in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.weights)
    }

    /// Entropy of the marginal on `names`.
    pub fn entropy_of(&self, names: &[&str]) -> Result<f64> {
        Ok(self.marginal(names)?.entropy())
    }

    /// H(target | given) = H(target, given) - H(given).
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64> {
        let mut both: Vec<&str> = target.to_vec();
        both.extend_from_slice(given);
        let h_both = self.entropy_of(&both)?;
        if given.is_empty() {
            return Ok(h_both);
        }
        Ok(h_both - self.entropy_of(given)?)
    }

    /// I(a ; b | given) computed via the chain rule H(a|given) - H(a|b,given).
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        let mut bg: Vec<&str> = b.to_vec();
        bg.extend_from_slice(given);
        Ok(self.conditional_entropy(a, given)? - self.conditional_entropy(a, &bg)?)
    }

    /// I(a ; b | given) by direct summation of
    /// p(a,b,c) log2[ p(a,b,c) p(c) / (p(a,c) p(b,c)) ].
    ///
    /// Kept as an independent route; evaluation code cross-checks the two.
    pub fn mutual_information_direct(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        let mut abc: Vec<&str> = a.to_vec();
        abc.extend_from_slice(b);
        abc.extend_from_slice(given);
        let jabc = self.marginal(&abc)?;

        let na = a.len();
        let nb = b.len();
        let sizes = jabc.sizes();
        let mut idx = vec![0usize; sizes.len()];

        // Flat index maps for the three sub-marginals of (a, b, c).
        let jac = jabc.marginal(
            &a.iter()
                .chain(given.iter())
                .copied()
                .collect::<Vec<&str>>(),
        )?;
        let jbc = jabc.marginal(
            &b.iter()
                .chain(given.iter())
                .copied()
                .collect::<Vec<&str>>(),
        )?;
        let jc = if given.is_empty() {
            None
        } else {
            Some(jabc.marginal(given)?)
        };

        let mut total = 0.0;
        for (flat, &w) in jabc.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            decode_index(flat, &sizes, &mut idx);
            let mut iac = 0usize;
            for (k, &s) in sizes.iter().enumerate() {
                if k < na || k >= na + nb {
                    iac = iac * s + idx[k];
                }
            }
            let mut ibc = 0usize;
            for (k, &s) in sizes.iter().enumerate() {
                if k >= na {
                    ibc = ibc * s + idx[k];
                }
            }
            let pc = match &jc {
                None => 1.0,
                Some(j) => {
                    let mut ic = 0usize;
                    for (k, &s) in sizes.iter().enumerate() {
                        if k >= na + nb {
                            ic = ic * s + idx[k];
                        }
                    }
                    j.weights[ic]
                }
            };
            total += w * (w * pc / (jac.weights[iac] * jbc.weights[ibc])).log2();
        }
        Ok(total)
    }

    /// Append a new axis that is a deterministic function of existing axes.
    pub fn with_derived_axis(
        &self,
        name: &str,
        inputs: &[&str],
        new_size: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<JointPmf> {
        if new_size == 0 {
            return Err(Error::Dimension(format!("axis `{name}` has size 0")));
        }
        if self.axes.iter().any(|(n, _)| n == name) {
            return Err(Error::Dimension(format!("duplicate axis `{name}`")));
        }
        let input_pos: Vec<usize> = inputs
            .iter()
            .map(|n| self.axis_pos(n))
            .collect::<Result<_>>()?;
        let sizes = self.sizes();
        let mut out = vec![0.0; self.weights.len() * new_size];
        let mut idx = vec![0usize; sizes.len()];
        let mut args = vec![0usize; input_pos.len()];
        for (flat, &w) in self.weights.iter().enumerate() {
            decode_index(flat, &sizes, &mut idx);
            for (k, &p) in input_pos.iter().enumerate() {
                args[k] = idx[p];
            }
            let v = f(&args);
            if v >= new_size {
                return Err(Error::Domain(format!(
                    "derived axis `{name}` value {v} outside size {new_size}"
                )));
            }
            out[flat * new_size + v] = w;
        }
        let mut axes: Vec<(&str, usize)> = self
            .axes
            .iter()
            .map(|(n, s)| (n.as_str(), *s))
            .collect();
        axes.push((name, new_size));
        JointPmf::new(&axes, out)
    }
}

/// Decode a flat row-major index into `idx` given the axis sizes.
pub fn decode_index(mut flat: usize, sizes: &[usize], idx: &mut [usize]) {
    for k in (0..sizes.len()).rev() {
        idx[k] = flat % sizes[k];
        flat /= sizes[k];
    }
}
