//! Prime-power fields GF(p^m) from bundled primitive polynomials, and the
//! Singer difference sets they yield.

use crate::error::{Error, Result};

/// Monic primitive polynomials, low-order coefficients first (leading 1
/// omitted), keyed by `(p, m)`.
const PRIMITIVE: &[(u64, usize, &[u64])] = &[
    // x^3 + x + 1
    (2, 3, &[1, 1, 0]),
    // x^3 + 2x + 1
    (3, 3, &[1, 2, 0]),
    // x^6 + x^4 + x^3 + x + 1
    (2, 6, &[1, 1, 0, 1, 1, 0]),
    // x^3 + 6x^2 + 4
    (7, 3, &[4, 0, 6]),
    // x^6 + 2x^4 + x^2 + 2x + 2
    (3, 6, &[2, 2, 1, 0, 2, 0]),
    // x^3 + 2x + 9
    (11, 3, &[9, 2, 0]),
];

/// GF(p^m) as exp/log tables over a primitive element `α`.
#[derive(Clone, Debug)]
pub struct PrimeField {
    p: u64,
    m: usize,
    /// `exp[i]` = α^i encoded base p, low-order coefficient least significant.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PrimeField {
    /// Builds GF(p^m) from the bundled polynomial and checks that `α` has
    /// order exactly `p^m - 1`.
    pub fn bundled(p: u64, m: usize) -> Result<Self> {
        let coeffs = PRIMITIVE
            .iter()
            .find(|(pp, mm, _)| *pp == p && *mm == m)
            .map(|(_, _, c)| *c)
            .ok_or_else(|| Error::InvalidArgument(format!("no bundled polynomial for GF({p}^{m})")))?;
        Self::from_polynomial(p, coeffs)
    }

    pub fn from_polynomial(p: u64, coeffs: &[u64]) -> Result<Self> {
        let m = coeffs.len();
        let size = p.pow(m as u32) as usize;
        let encode = |v: &[u64]| -> u32 {
            v.iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32
        };
        let mut exp = Vec::with_capacity(size - 1);
        let mut log = vec![u32::MAX; size];
        let mut cur = vec![0u64; m];
        cur[0] = 1;
        for i in 0..size - 1 {
            let code = encode(&cur);
            if log[code as usize] != u32::MAX {
                return Err(Error::CorruptData(format!(
                    "polynomial {coeffs:?} over GF({p}) is not primitive: x has order {i}"
                )));
            }
            log[code as usize] = i as u32;
            exp.push(code);
            // multiply by x, reduce with x^m = -Σ c_i x^i
            let top = cur[m - 1];
            for j in (1..m).rev() {
                cur[j] = (cur[j - 1] + p * p - top * coeffs[j] % p) % p;
            }
            cur[0] = (p - top * coeffs[0] % p) % p;
        }
        if encode(&cur) != 1 {
            return Err(Error::CorruptData(format!(
                "polynomial {coeffs:?} over GF({p}) does not close its cycle"
            )));
        }
        Ok(Self { p, m, exp, log })
    }

    pub fn order(&self) -> usize {
        self.exp.len() + 1
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        let mut w = 1u64;
        for _ in 0..self.m {
            out += ((a % self.p + b % self.p) % self.p) * w;
            a /= self.p;
            b /= self.p;
            w *= self.p;
        }
        out as u32
    }

    /// α^i.
    pub fn pow_alpha(&self, i: usize) -> u32 {
        self.exp[i % self.exp.len()]
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, a: u32) -> Option<usize> {
        match self.log.get(a as usize) {
            Some(&l) if l != u32::MAX => Some(l as usize),
            _ => None,
        }
    }
}

fn prime_power(q: u64) -> Option<(u64, usize)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut e = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

/// Perfect difference set of size `q + 1` in `Z_{q²+q+1}`: the logs (mod
/// `q²+q+1`) of the nonzero elements of the GF(q)-span of `{1, α}` in
/// GF(q³).
pub fn singer_difference_set(q: u64) -> Result<Vec<u32>> {
    if !matches!(q, 2 | 3 | 4 | 7 | 9 | 11) {
        return Err(Error::UnsupportedOrder(q));
    }
    let (p, e) = prime_power(q).ok_or(Error::UnsupportedOrder(q))?;
    let field = PrimeField::bundled(p, 3 * e)?;
    let n = (q * q + q + 1) as usize;
    // GF(q) inside GF(q^3): zero plus the powers α^{jn}
    let mut subfield = vec![0u32];
    subfield.extend((0..q as usize - 1).map(|j| field.pow_alpha(j * n)));
    let mut set: Vec<u32> = Vec::new();
    for &a in &subfield {
        for &b in &subfield {
            let b_alpha = match field.log(b) {
                Some(l) => field.pow_alpha(l + 1),
                None => 0,
            };
            let s = field.add(a, b_alpha);
            if let Some(l) = field.log(s) {
                set.push((l % n) as u32);
            }
        }
    }
    set.sort_unstable();
    set.dedup();
    debug_assert_eq!(set.len(), q as usize + 1);
    Ok(set)
}
