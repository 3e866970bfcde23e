//! Arithmetic over Z_{p^r} and its chain of subgroups, plus the handful of
//! distribution-level operations that ride on the ring structure (cyclic
//! convolution, laws of projected variables).
//!
//! Conventions: elements are canonical residues in `[0, p^r)`. The level-t
//! subgroup H_t is the set of multiples of p^t, and `[a]_t = a mod p^t` is the
//! complementary digit part, so every `a` splits uniquely as `a = h + g` with
//! `h` in H_t and `g` in `[0, p^t)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::probinfo::Pmf;

/// The ring Z_{p^r} for a prime p and exponent r >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingSpec {
    p: u32,
    r: u32,
    modulus: u32,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl RingSpec {
    pub fn new(p: u32, r: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::Domain("exponent r must be at least 1".into()));
        }
        let mut modulus: u32 = 1;
        for _ in 0..r {
            modulus = modulus
                .checked_mul(p)
                .ok_or_else(|| Error::Domain(format!("p^r overflows u32 for p={p}, r={r}")))?;
        }
        Ok(RingSpec { p, r, modulus })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn size(&self) -> usize {
        self.modulus as usize
    }

    /// log2 of the ring size, i.e. r * log2(p).
    pub fn log2_size(&self) -> f64 {
        (self.r as f64) * (self.p as f64).log2()
    }

    pub fn check(&self, a: u32) -> Result<()> {
        if a >= self.modulus {
            return Err(Error::Domain(format!(
                "element {a} outside Z_{}",
                self.modulus
            )));
        }
        Ok(())
    }

    pub fn add(&self, a: u32, b: u32) -> Result<u32> {
        self.check(a)?;
        self.check(b)?;
        Ok((a + b) % self.modulus)
    }

    pub fn sub(&self, a: u32, b: u32) -> Result<u32> {
        self.check(a)?;
        self.check(b)?;
        Ok((a + self.modulus - b) % self.modulus)
    }

    pub fn mul(&self, a: u32, b: u32) -> Result<u32> {
        self.check(a)?;
        self.check(b)?;
        Ok(((a as u64 * b as u64) % self.modulus as u64) as u32)
    }

    pub fn neg(&self, a: u32) -> Result<u32> {
        self.check(a)?;
        Ok((self.modulus - a) % self.modulus)
    }

    /// p^t for 0 <= t <= r.
    pub fn level_modulus(&self, t: u32) -> Result<u32> {
        if t > self.r {
            return Err(Error::Domain(format!("level {t} exceeds r = {}", self.r)));
        }
        Ok(self.p.pow(t))
    }

    /// The digit part `[a]_t = a mod p^t`. `[a]_0 = 0` and `[a]_r = a`.
    pub fn project(&self, a: u32, t: u32) -> Result<u32> {
        self.check(a)?;
        Ok(a % self.level_modulus(t)?)
    }

    /// The subgroup H_t = { p^t * m mod p^r }, sorted ascending.
    pub fn subgroup(&self, t: u32) -> Result<Vec<u32>> {
        let step = self.level_modulus(t)?;
        Ok((0..self.modulus).step_by(step as usize).collect())
    }
}

/// Vector with entries in a common ring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingVector {
    ring: RingSpec,
    entries: Vec<u32>,
}

impl RingVector {
    pub fn new(ring: RingSpec, entries: Vec<u32>) -> Result<Self> {
        for &e in &entries {
            ring.check(e)?;
        }
        Ok(RingVector { ring, entries })
    }

    pub fn zero(ring: RingSpec, len: usize) -> Self {
        RingVector {
            ring,
            entries: vec![0; len],
        }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> u32 {
        self.entries[i]
    }

    pub fn random_uniform(ring: RingSpec, len: usize, rng: &mut impl Rng) -> Self {
        RingVector {
            ring,
            entries: (0..len).map(|_| rng.gen_range(0..ring.modulus)).collect(),
        }
    }
}

/// Row-major matrix with entries in a common ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl RingMatrix {
    pub fn new(ring: RingSpec, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for &e in &entries {
            ring.check(e)?;
        }
        Ok(RingMatrix {
            ring,
            rows,
            cols,
            entries,
        })
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn random_uniform(ring: RingSpec, rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        RingMatrix {
            ring,
            rows,
            cols,
            entries: (0..rows * cols)
                .map(|_| rng.gen_range(0..ring.modulus))
                .collect(),
        }
    }
}

/// Affine map u*G + b over the ring (u is a row vector of length G.rows).
pub fn mat_apply(u: &RingVector, g: &RingMatrix, b: &RingVector) -> Result<RingVector> {
    let ring = g.ring();
    if u.ring() != ring || b.ring() != ring {
        return Err(Error::Dimension("ring mismatch".into()));
    }
    if u.len() != g.rows() || b.len() != g.cols() {
        return Err(Error::Dimension(format!(
            "cannot apply {}x{} matrix to message of length {} with offset of length {}",
            g.rows(),
            g.cols(),
            u.len(),
            b.len()
        )));
    }
    let m = ring.modulus() as u64;
    let mut out = vec![0u32; g.cols()];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = b.get(j) as u64;
        for i in 0..g.rows() {
            acc += u.get(i) as u64 * g.entry(i, j) as u64;
        }
        *slot = (acc % m) as u32;
    }
    RingVector::new(ring, out)
}

pub fn vec_add(a: &RingVector, b: &RingVector) -> Result<RingVector> {
    if a.ring() != b.ring() || a.len() != b.len() {
        return Err(Error::Dimension("vector shape/ring mismatch".into()));
    }
    let m = a.ring().modulus();
    RingVector::new(
        a.ring(),
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| (x + y) % m)
            .collect(),
    )
}

pub fn vec_sub(a: &RingVector, b: &RingVector) -> Result<RingVector> {
    if a.ring() != b.ring() || a.len() != b.len() {
        return Err(Error::Dimension("vector shape/ring mismatch".into()));
    }
    let m = a.ring().modulus();
    RingVector::new(
        a.ring(),
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| (x + m - y) % m)
            .collect(),
    )
}

/// Elementwise sumset { a + b : a in A, b in B }, sorted and deduplicated.
pub fn sumset(a: &[RingVector], b: &[RingVector]) -> Result<Vec<RingVector>> {
    let mut out: Vec<RingVector> = Vec::new();
    for x in a {
        for y in b {
            out.push(vec_add(x, y)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Cyclic convolution of two pmfs over Z_m (same m): the law of A + B mod m
/// for independent A ~ pa, B ~ pb.
pub fn circular_convolve(pa: &Pmf, pb: &Pmf) -> Result<Pmf> {
    if pa.len() != pb.len() {
        return Err(Error::Dimension(format!(
            "modulus mismatch: {} vs {}",
            pa.len(),
            pb.len()
        )));
    }
    let m = pa.len();
    let mut out = vec![0.0; m];
    for j in 0..m {
        let w = pa.get(j);
        if w == 0.0 {
            continue;
        }
        for k in 0..m {
            out[(j + k) % m] += w * pb.get(k);
        }
    }
    Pmf::new(out)
}

/// Law of the digit part [A]_t when A ~ p over the ring.
pub fn project_pmf(p: &Pmf, ring: RingSpec, t: u32) -> Result<Pmf> {
    if p.len() != ring.size() {
        return Err(Error::Dimension(format!(
            "pmf has {} entries but ring has {}",
            p.len(),
            ring.size()
        )));
    }
    let step = ring.level_modulus(t)? as usize;
    let mut out = vec![0.0; step.max(1)];
    for a in 0..p.len() {
        out[a % step.max(1)] += p.get(a);
    }
    // t = 0 projects everything onto the single residue 0.
    if step == 1 {
        out = vec![1.0];
    }
    Pmf::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4() -> RingSpec {
        RingSpec::new(2, 2).unwrap()
    }

    #[test]
    fn constructor_rejects_non_prime() {
        assert!(RingSpec::new(4, 1).is_err());
        assert!(RingSpec::new(1, 3).is_err());
        assert!(RingSpec::new(2, 0).is_err());
        assert!(RingSpec::new(9, 2).is_err());
    }

    #[test]
    fn basic_arithmetic_mod_4() {
        let r = z4();
        assert_eq!(r.add(3, 3).unwrap(), 2);
        assert_eq!(r.sub(1, 3).unwrap(), 2);
        assert_eq!(r.mul(2, 3).unwrap(), 2);
        assert_eq!(r.neg(1).unwrap(), 3);
        assert!(r.add(4, 0).is_err());
    }

    #[test]
    fn projection_digits() {
        let r = z4();
        assert_eq!(r.project(3, 1).unwrap(), 1);
        assert_eq!(r.project(2, 1).unwrap(), 0);
        for a in 0..4 {
            assert_eq!(r.project(a, 0).unwrap(), 0);
            assert_eq!(r.project(a, 2).unwrap(), a);
        }
        assert!(r.project(1, 3).is_err());
    }

    #[test]
    fn subgroups_of_z4() {
        let r = z4();
        assert_eq!(r.subgroup(0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(r.subgroup(1).unwrap(), vec![0, 2]);
        assert_eq!(r.subgroup(2).unwrap(), vec![0]);
    }

    #[test]
    fn digit_decomposition_unique_for_small_rings() {
        // a = h + g with h in H_t and g in [0, p^t) exists and is unique;
        // exhausted over every ring with p^r <= 16 and every level.
        for (p, r) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1), (7, 1), (11, 1), (13, 1)] {
            let ring = RingSpec::new(p, r).unwrap();
            for t in 0..=r {
                let h_t = ring.subgroup(t).unwrap();
                let pt = ring.level_modulus(t).unwrap();
                for a in 0..ring.modulus() {
                    let mut matches = 0;
                    for &h in &h_t {
                        for g in 0..pt {
                            if (h + g) % ring.modulus() == a {
                                matches += 1;
                                // The unique witness is g = [a]_t.
                                assert_eq!(g, ring.project(a, t).unwrap());
                            }
                        }
                    }
                    assert_eq!(matches, 1, "p={p} r={r} t={t} a={a}");
                }
            }
        }
    }

    #[test]
    fn mat_apply_against_scalar_loop_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for (p, r) in [(2u32, 2u32), (3, 1), (2, 3)] {
            let ring = RingSpec::new(p, r).unwrap();
            for _ in 0..25 {
                let k = rng.gen_range(1..5);
                let n = rng.gen_range(1..6);
                let g = RingMatrix::random_uniform(ring, k, n, &mut rng);
                let u = RingVector::random_uniform(ring, k, &mut rng);
                let b = RingVector::random_uniform(ring, n, &mut rng);
                let got = mat_apply(&u, &g, &b).unwrap();
                for j in 0..n {
                    let mut acc = b.get(j);
                    for i in 0..k {
                        acc = ring
                            .add(acc, ring.mul(u.get(i), g.entry(i, j)).unwrap())
                            .unwrap();
                    }
                    assert_eq!(got.get(j), acc);
                }
            }
        }
    }

    #[test]
    fn mat_apply_zero_message_returns_offset() {
        let ring = z4();
        let g = RingMatrix::new(ring, 2, 3, vec![1, 2, 3, 0, 1, 2]).unwrap();
        let u = RingVector::zero(ring, 2);
        let b = RingVector::new(ring, vec![3, 1, 0]).unwrap();
        assert_eq!(mat_apply(&u, &g, &b).unwrap(), b);
    }

    #[test]
    fn mat_apply_shape_mismatch() {
        let ring = z4();
        let g = RingMatrix::new(ring, 2, 3, vec![0; 6]).unwrap();
        let u = RingVector::zero(ring, 3);
        let b = RingVector::zero(ring, 3);
        assert!(mat_apply(&u, &g, &b).is_err());
    }

    #[test]
    fn sumset_examples() {
        let ring = z4();
        let v = |e: &[u32]| RingVector::new(ring, e.to_vec()).unwrap();
        let a = vec![v(&[0]), v(&[1])];
        let got = sumset(&a, &a).unwrap();
        assert_eq!(got, vec![v(&[0]), v(&[1]), v(&[2])]);
        // H_1 is closed under addition.
        let h1 = vec![v(&[0]), v(&[2])];
        assert_eq!(sumset(&h1, &h1).unwrap(), h1);
    }

    #[test]
    fn sumset_of_affine_codes_is_affine() {
        // Two codes sharing a generator: {uG + b1} + {uG + b2} is exactly the
        // code with message set W1 + W2 and offset b1 + b2. Exhaustive over
        // small shapes.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ring = z4();
        for _ in 0..10 {
            let k = rng.gen_range(1..3);
            let n = rng.gen_range(1..5);
            let g = RingMatrix::random_uniform(ring, k, n, &mut rng);
            let b1 = RingVector::random_uniform(ring, n, &mut rng);
            let b2 = RingVector::random_uniform(ring, n, &mut rng);
            // Message sets: all binary vectors of length k.
            let msgs: Vec<RingVector> = (0..(1u32 << k))
                .map(|c| {
                    RingVector::new(
                        ring,
                        (0..k).map(|i| (c >> (k - 1 - i)) & 1).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let code = |b: &RingVector| -> Vec<RingVector> {
                let mut c: Vec<RingVector> =
                    msgs.iter().map(|u| mat_apply(u, &g, b).unwrap()).collect();
                c.sort();
                c.dedup();
                c
            };
            let c1 = code(&b1);
            let c2 = code(&b2);
            let lhs = sumset(&c1, &c2).unwrap();
            let wsum = sumset(&msgs, &msgs).unwrap();
            let b12 = vec_add(&b1, &b2).unwrap();
            let mut rhs: Vec<RingVector> = wsum
                .iter()
                .map(|w| mat_apply(w, &g, &b12).unwrap())
                .collect();
            rhs.sort();
            rhs.dedup();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn convolution_identity_and_frozen_example() {
        let d0 = Pmf::delta(4, 0).unwrap();
        let p = Pmf::new(vec![2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0]).unwrap();
        let got = circular_convolve(&p, &d0).unwrap();
        for i in 0..4 {
            assert!((got.get(i) - p.get(i)).abs() < 1e-15);
        }
        // Frozen from the exhaustive two-index enumeration oracle below.
        let q = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let got = circular_convolve(&p, &q).unwrap();
        let expect = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for i in 0..4 {
            assert!((got.get(i) - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_pair_enumeration_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for m in [2usize, 3, 4, 5, 8] {
            for _ in 0..10 {
                let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum();
                let pa = Pmf::new(raw.iter().map(|v| v / s).collect()).unwrap();
                let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum();
                let pb = Pmf::new(raw.iter().map(|v| v / s).collect()).unwrap();
                let got = circular_convolve(&pa, &pb).unwrap();
                let mut expect = vec![0.0; m];
                for j in 0..m {
                    for k in 0..m {
                        expect[(j + k) % m] += pa.get(j) * pb.get(k);
                    }
                }
                for i in 0..m {
                    assert!((got.get(i) - expect[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn convolution_commutes_and_uniform_absorbs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let m = 4;
        let uni = Pmf::uniform(m).unwrap();
        for _ in 0..20 {
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let pa = Pmf::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let pb = Pmf::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let ab = circular_convolve(&pa, &pb).unwrap();
            let ba = circular_convolve(&pb, &pa).unwrap();
            for i in 0..m {
                assert!((ab.get(i) - ba.get(i)).abs() < 1e-12);
            }
            let au = circular_convolve(&pa, &uni).unwrap();
            for i in 0..m {
                assert!((au.get(i) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_modulus_mismatch() {
        let a = Pmf::uniform(4).unwrap();
        let b = Pmf::uniform(3).unwrap();
        assert!(circular_convolve(&a, &b).is_err());
    }

    #[test]
    fn projected_law_of_z4() {
        let ring = z4();
        let p = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        // Parity of a uniform {0,1} variable is uniform on {0,1}.
        let proj = project_pmf(&p, ring, 1).unwrap();
        assert_eq!(proj.len(), 2);
        assert!((proj.get(0) - 0.5).abs() < 1e-12);
        assert!((proj.get(1) - 0.5).abs() < 1e-12);
        let full = project_pmf(&p, ring, 2).unwrap();
        assert_eq!(full.as_slice(), p.as_slice());
        let zero = project_pmf(&p, ring, 0).unwrap();
        assert_eq!(zero.len(), 1);
    }
}
