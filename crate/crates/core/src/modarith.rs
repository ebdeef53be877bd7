//! Machine-width modular arithmetic: primality, prime enumeration, modular
//! powers and inverses, factorials modulo prime powers and the power sum used
//! by the Lerch definition.
//!
//! Every modulus fits in a `u64`; products are formed in `u128`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest prime accepted by the kernels that work modulo `p^3`.
pub const CUBE_CEILING: u64 = 1_000_000;

/// Largest prime accepted by the kernels that work modulo `p^2`.
pub const SQUARE_CEILING: u64 = u32::MAX as u64;

/// Default number of integers per sieve segment.
pub const DEFAULT_SEGMENT: usize = 1 << 16;

const NTH_PRIME_MAX_INDEX: u64 = 50_000_000;

/// A prime that has passed [`is_prime`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CertifiedPrime {
    value: u64,
    index: Option<u64>,
}

impl CertifiedPrime {
    pub fn new(n: u64) -> Result<Self> {
        if is_prime(n) {
            Ok(CertifiedPrime {
                value: n,
                index: None,
            })
        } else {
            Err(Error::Domain(format!("{n} is not prime")))
        }
    }

    /// Position in the prime sequence (`p_1 = 2`), when known.
    pub fn index(&self) -> Option<u64> {
        self.index
    }

    pub fn get(&self) -> u64 {
        self.value
    }

    pub fn is_odd(&self) -> bool {
        self.value != 2
    }

    /// `p^2`, refusing primes above [`SQUARE_CEILING`].
    pub fn square(&self) -> Result<u64> {
        if self.value > SQUARE_CEILING {
            return Err(Error::Range(format!(
                "p = {} exceeds the p^2 ceiling {SQUARE_CEILING}",
                self.value
            )));
        }
        Ok(self.value * self.value)
    }

    /// `p^3`, refusing primes above [`CUBE_CEILING`].
    pub fn cube(&self) -> Result<u64> {
        if self.value > CUBE_CEILING {
            return Err(Error::Range(format!(
                "p = {} exceeds the p^3 ceiling {CUBE_CEILING}",
                self.value
            )));
        }
        Ok(self.value * self.value * self.value)
    }

    /// `p^k` if it fits in a `u64`.
    pub fn power(&self, k: u32) -> Result<u64> {
        self.value
            .checked_pow(k)
            .ok_or_else(|| Error::Range(format!("{}^{k} does not fit in 64 bits", self.value)))
    }
}

impl fmt::Display for CertifiedPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

impl From<CertifiedPrime> for u64 {
    fn from(p: CertifiedPrime) -> u64 {
        p.value
    }
}

/// A canonical residue `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i128, modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        Residue {
            value: value.rem_euclid(modulus as i128) as u64,
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    let (a, b) = (a % m, b % m);
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// `base^exponent mod modulus` on already reduced operands.
pub fn pow_mod_u64(mut base: u64, mut exponent: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = mul_mod(acc, base, modulus);
        }
        base = mul_mod(base, base, modulus);
        exponent >>= 1;
    }
    acc
}

/// `base^exponent mod modulus`; negative bases are normalized first.
pub fn pow_mod(base: i128, exponent: u64, modulus: u64) -> Residue {
    let base = Residue::new(base, modulus).value;
    Residue {
        value: pow_mod_u64(base, exponent, modulus),
        modulus,
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The inverse of `a` modulo `modulus`, or [`Error::NotInvertible`] carrying
/// the gcd.
pub fn inv_mod(a: i128, modulus: u64) -> Result<Residue> {
    let m = modulus as i128;
    let reduced = a.rem_euclid(m);
    let (mut old_r, mut r) = (reduced, m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 && modulus != 1 {
        return Err(Error::NotInvertible {
            a,
            modulus,
            gcd: old_r as u64,
        });
    }
    Ok(Residue::new(old_s, modulus))
}

/// `n! mod modulus` by a straight product.
pub fn factorial_mod(n: u64, modulus: u64) -> Residue {
    let mut acc = 1 % modulus;
    for i in 2..=n {
        if acc == 0 {
            break;
        }
        acc = mul_mod(acc, i % modulus, modulus);
    }
    Residue {
        value: acc,
        modulus,
    }
}

/// `sum_{a=1}^{p-1} a^(p-1) mod p^3`.
pub fn sum_powers_mod(p: CertifiedPrime) -> Result<Residue> {
    if !p.is_odd() {
        return Err(Error::Domain(
            "the power sum is defined for odd primes".into(),
        ));
    }
    let m = p.cube()?;
    let e = p.get() - 1;
    let mut acc = 0u64;
    for a in 1..p.get() {
        acc = add_mod(acc, pow_mod_u64(a, e, m), m);
    }
    Ok(Residue {
        value: acc,
        modulus: m,
    })
}

// Bases proven sufficient for every n < 2^64.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &MR_BASES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn small_primes_upto(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Ascending primes in `[lo, hi]` from a segmented sieve.
///
/// When `lo <= 2` the yielded primes carry their index in the prime sequence.
pub struct PrimeRange {
    base: Vec<u64>,
    segment: Vec<bool>,
    seg_lo: u64,
    pos: usize,
    hi: u64,
    segment_len: usize,
    next_index: Option<u64>,
    done: bool,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        Self::with_segment(lo, hi, DEFAULT_SEGMENT)
    }

    pub fn with_segment(lo: u64, hi: u64, segment_len: usize) -> Self {
        let lo = lo.max(2);
        let root = (hi as f64).sqrt() as u64 + 1;
        let mut range = PrimeRange {
            base: if lo <= hi {
                small_primes_upto(root)
            } else {
                Vec::new()
            },
            segment: Vec::with_capacity(segment_len),
            seg_lo: lo,
            pos: 0,
            hi,
            segment_len: segment_len.max(1),
            next_index: (lo == 2).then_some(1),
            done: lo > hi,
        };
        if !range.done {
            range.fill();
        }
        range
    }

    fn fill(&mut self) {
        let seg_hi = self
            .seg_lo
            .saturating_add(self.segment_len as u64 - 1)
            .min(self.hi);
        let len = (seg_hi - self.seg_lo + 1) as usize;
        self.segment.clear();
        self.segment.resize(len, true);
        for &q in &self.base {
            if q * q > seg_hi {
                break;
            }
            let first = (q * q).max(self.seg_lo.div_ceil(q) * q);
            let mut j = first;
            while j <= seg_hi {
                self.segment[(j - self.seg_lo) as usize] = false;
                j += q;
            }
        }
        self.pos = 0;
    }
}

impl Iterator for PrimeRange {
    type Item = CertifiedPrime;

    fn next(&mut self) -> Option<CertifiedPrime> {
        while !self.done {
            while self.pos < self.segment.len() {
                let i = self.pos;
                self.pos += 1;
                if self.segment[i] {
                    let index = self.next_index;
                    if let Some(k) = self.next_index.as_mut() {
                        *k += 1;
                    }
                    return Some(CertifiedPrime {
                        value: self.seg_lo + i as u64,
                        index,
                    });
                }
            }
            let next_lo = self.seg_lo + self.segment.len() as u64;
            if next_lo > self.hi || next_lo < self.seg_lo {
                self.done = true;
            } else {
                self.seg_lo = next_lo;
                self.fill();
            }
        }
        None
    }
}

/// The primes `lo <= p <= hi` in increasing order.
pub fn primes_in_range(lo: u64, hi: u64) -> PrimeRange {
    PrimeRange::new(lo, hi)
}

/// The `n`-th prime (`p_1 = 2`) with its index attached.
pub fn nth_prime(n: u64) -> Result<CertifiedPrime> {
    if n == 0 {
        return Err(Error::Domain("prime indices start at 1".into()));
    }
    if n > NTH_PRIME_MAX_INDEX {
        return Err(Error::Range(format!(
            "nth_prime supports indices up to {NTH_PRIME_MAX_INDEX}"
        )));
    }
    // Rosser's bound p_n < n (ln n + ln ln n) for n >= 6.
    let bound = if n < 6 {
        13
    } else {
        let x = n as f64;
        (x * (x.ln() + x.ln().ln())) as u64 + 1
    };
    primes_in_range(2, bound)
        .nth((n - 1) as usize)
        .ok_or_else(|| Error::Invariant(format!("no prime found below bound {bound} for n = {n}")))
}
