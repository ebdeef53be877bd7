//! Exact Bernoulli numbers and the quantities built from them.
//!
//! Values follow the convention `B_1 = -1/2`, i.e. the symbolic recurrence
//! `(B + 1)^(n+1) - B^(n+1) = 0`. Even-index values are assembled from
//! tangent numbers, which are computed with integer arithmetic only; the
//! denominator comes from the von Staudt–Clausen law and the numerator by
//! exact division. The plain rational recurrence is kept in
//! [`bernoulli_by_recurrence`] as an independent cross-check.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modarith::{self, CertifiedPrime, Residue};

pub type BigRational = num_rational::BigRational;

const CACHE_HEADER: &str = "BERN-CACHE v1";

/// Exact `B_0 ..= B_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliTable {
    entries: Vec<BigRational>,
}

impl Default for BernoulliTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BernoulliTable {
    /// A table holding `B_0` and `B_1`.
    pub fn new() -> Self {
        BernoulliTable {
            entries: vec![
                BigRational::one(),
                BigRational::new(BigInt::from(-1), BigInt::from(2)),
            ],
        }
    }

    pub fn max_index(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<&BigRational> {
        self.entries.get(n)
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    /// Make `B_0 ..= B_n` available. Existing entries are left untouched.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        if n <= self.max_index() {
            return Ok(());
        }
        let half = n / 2;
        let tangents = tangent_numbers(half);
        let start = self.entries.len();
        for index in start..=n {
            let value = if index % 2 == 1 {
                BigRational::zero()
            } else {
                even_bernoulli(index, &tangents[index / 2 - 1])?
            };
            self.entries.push(value);
        }
        Ok(())
    }

    /// Serialize in the line-oriented cache format.
    pub fn write_cache<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CACHE_HEADER} max={}", self.max_index())?;
        for (index, b) in self.entries.iter().enumerate().step_by(2) {
            writeln!(out, "{index} {} {}", b.numer(), b.denom())?;
        }
        out.flush()
    }

    /// Parse the cache format. A file cut off at a line boundary (or in the
    /// middle of a line) yields the complete prefix; anything else malformed
    /// is an error.
    pub fn read_cache<R: BufRead>(mut input: R) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "bernoulli cache",
            detail,
        };
        let mut line = String::new();
        input.read_line(&mut line).map_err(|e| bad(e.to_string()))?;
        let declared: usize = line
            .strip_suffix('\n')
            .and_then(|l| l.strip_prefix(CACHE_HEADER))
            .and_then(|l| l.strip_prefix(" max="))
            .and_then(|l| l.parse().ok())
            .ok_or_else(|| bad(format!("bad header {:?}", line.trim_end())))?;

        let mut table = BernoulliTable::new();
        let mut evens: Vec<BigRational> = Vec::new();
        loop {
            line.clear();
            input.read_line(&mut line).map_err(|e| bad(e.to_string()))?;
            let Some(body) = line.strip_suffix('\n') else {
                break; // EOF or a partial trailing line
            };
            let mut fields = body.split(' ');
            let (Some(i), Some(num), Some(den), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(bad(format!("bad entry line {body:?}")));
            };
            let index: usize = i.parse().map_err(|_| bad(format!("bad index {i:?}")))?;
            if index != 2 * evens.len() || index > declared {
                return Err(bad(format!("unexpected index {index}")));
            }
            let num: BigInt = num
                .parse()
                .map_err(|_| bad(format!("bad numerator at {index}")))?;
            let den: BigInt = den
                .parse()
                .map_err(|_| bad(format!("bad denominator at {index}")))?;
            if !den.is_positive() || !num.mod_floor(&den).gcd(&den).is_one() {
                return Err(bad(format!("entry {index} is not in lowest terms")));
            }
            if index >= 2 && den != BigInt::from(vsc_denominator(index as u64)?) {
                return Err(bad(format!("entry {index} has the wrong denominator")));
            }
            evens.push(BigRational::new_raw(num, den));
        }
        if evens.is_empty() {
            return Ok(table);
        }
        if !evens[0].is_one() {
            return Err(bad("B_0 must be 1".into()));
        }
        let max = (2 * evens.len() - 1).min(declared).max(1);
        table.entries.truncate(2);
        for index in 2..=max {
            let value = if index % 2 == 1 {
                BigRational::zero()
            } else {
                evens[index / 2].clone()
            };
            table.entries.push(value);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_cache(BufReader::new(file))
    }

    /// Atomically replace `path` with this table.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        self.write_cache(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

/// Tangent numbers `T_1 ..= T_n` (1, 2, 16, 272, ...).
fn tangent_numbers(n: usize) -> Vec<BigUint> {
    if n == 0 {
        return Vec::new();
    }
    let mut t: Vec<BigUint> = Vec::with_capacity(n);
    t.push(BigUint::one());
    for k in 1..n {
        let next = &t[k - 1] * (k as u64);
        t.push(next);
    }
    let mut scratch = BigUint::zero();
    for k in 1..n {
        for j in k..n {
            // 1-based: T_j = (j-k) T_{j-1} + (j-k+2) T_j
            let left = (j - k) as u64;
            let right = (j - k + 2) as u64;
            t[j] *= right;
            if left > 0 {
                scratch.clone_from(&t[j - 1]);
                scratch *= left;
                t[j] += &scratch;
            }
        }
    }
    t
}

/// `B_{2k} = (-1)^(k-1) 2k T_k / (4^k (4^k - 1))`, reduced via its known
/// denominator.
fn even_bernoulli(index: usize, tangent: &BigUint) -> Result<BigRational> {
    let k = index / 2;
    let denominator = vsc_denominator(index as u64)?;
    let four_k = BigUint::one() << (2 * k);
    let divisor = &four_k * (&four_k - 1u32);
    let scaled = tangent * (index as u64) * &denominator;
    let (numerator, rem) = scaled.div_rem(&divisor);
    if !rem.is_zero() {
        return Err(Error::Invariant(format!(
            "B_{index}: numerator is not integral with the von Staudt-Clausen denominator"
        )));
    }
    if !(&numerator % &denominator).gcd(&denominator).is_one() {
        return Err(Error::Invariant(format!(
            "B_{index}: von Staudt-Clausen denominator is not reduced"
        )));
    }
    let sign = if k % 2 == 1 { Sign::Plus } else { Sign::Minus };
    Ok(BigRational::new_raw(
        BigInt::from_biguint(sign, numerator),
        BigInt::from(denominator),
    ))
}

/// `B_0 ..= B_n` from the rational recurrence `sum_{i<=n} C(n+1, i) B_i = 0`.
///
/// Quadratic in `n` with growing common denominators; meant for small `n`.
pub fn bernoulli_by_recurrence(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=n {
        // row of C(m+1, i)
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (i, bi) in b.iter().enumerate() {
            acc += bi * BigRational::from_integer(binom.clone());
            binom = binom * (m + 1 - i) / (i + 1);
        }
        // binom is now C(m+1, m)
        b.push(-acc / BigRational::from_integer(binom));
    }
    b
}

/// Denominator of `B_index` for even `index >= 2`: the product of all primes
/// `q` with `(q - 1) | index`.
pub fn vsc_denominator(index: u64) -> Result<BigUint> {
    if index < 2 || index % 2 == 1 {
        return Err(Error::Domain(format!(
            "the von Staudt-Clausen denominator needs an even index >= 2, got {index}"
        )));
    }
    let mut product = BigUint::one();
    let mut d = 1;
    while d * d <= index {
        if index.is_multiple_of(d) {
            let e = index / d;
            if modarith::is_prime(d + 1) {
                product *= d + 1;
            }
            if e != d && modarith::is_prime(e + 1) {
                product *= e + 1;
            }
        }
        d += 1;
    }
    Ok(product)
}

/// `value mod modulus` for a rational whose denominator is coprime to the modulus.
pub fn rational_mod(value: &BigRational, modulus: u64) -> Result<Residue> {
    let den = bigint_mod(value.denom(), modulus);
    let inv = modarith::inv_mod(den as i128, modulus)?;
    let num = bigint_mod(value.numer(), modulus);
    Ok(Residue::new(
        modarith::mul_mod(num, inv.value(), modulus) as i128,
        modulus,
    ))
}

pub(crate) fn bigint_mod(value: &BigInt, modulus: u64) -> u64 {
    value
        .mod_floor(&BigInt::from(modulus))
        .to_u64()
        .expect("residue below a u64 modulus")
}

/// A [`BernoulliTable`] shared between threads. Extension is serialized
/// behind a write lock; readers always see a complete prefix.
#[derive(Debug, Default)]
pub struct SharedBernoulli {
    inner: RwLock<BernoulliTable>,
}

impl SharedBernoulli {
    pub fn new(table: BernoulliTable) -> Self {
        SharedBernoulli {
            inner: RwLock::new(table),
        }
    }

    /// The process-wide table.
    pub fn global() -> &'static SharedBernoulli {
        static GLOBAL: OnceLock<SharedBernoulli> = OnceLock::new();
        GLOBAL.get_or_init(SharedBernoulli::default)
    }

    pub fn max_index(&self) -> usize {
        self.inner
            .read()
            .expect("bernoulli lock poisoned")
            .max_index()
    }

    pub fn ensure(&self, n: usize) -> Result<()> {
        if self.max_index() >= n {
            return Ok(());
        }
        self.inner
            .write()
            .expect("bernoulli lock poisoned")
            .extend_to(n)
    }

    /// Run `f` on a table that contains at least `B_0 ..= B_n`.
    pub fn with<R>(&self, n: usize, f: impl FnOnce(&BernoulliTable) -> R) -> Result<R> {
        self.ensure(n)?;
        let table = self.inner.read().expect("bernoulli lock poisoned");
        Ok(f(&table))
    }

    pub fn get(&self, n: usize) -> Result<BigRational> {
        self.with(n, |t| t.entries[n].clone())
    }

    pub fn snapshot(&self) -> BernoulliTable {
        self.inner.read().expect("bernoulli lock poisoned").clone()
    }

    /// Replace the table if `table` is longer than the current one.
    pub fn absorb(&self, table: BernoulliTable) {
        let mut current = self.inner.write().expect("bernoulli lock poisoned");
        if table.max_index() > current.max_index() {
            *current = table;
        }
    }
}

/// `p B_{p-1} mod p^k` for `p > 3` and `k` in `{2, 3}`.
///
/// `B_{p-1}` has exactly one factor `p` in its denominator; anything else is
/// reported as an invariant violation.
pub fn p_bernoulli_mod(table: &SharedBernoulli, p: CertifiedPrime, k: u32) -> Result<Residue> {
    if p.get() <= 3 {
        return Err(Error::Domain(format!(
            "p B_(p-1) mod p^k is only used for p > 3, got {p}"
        )));
    }
    if !(2..=3).contains(&k) {
        return Err(Error::Domain(format!("power must be 2 or 3, got {k}")));
    }
    let modulus = if k == 2 { p.square()? } else { p.cube()? };
    let index = (p.get() - 1) as usize;
    table.with(index, |t| {
        let b = &t.entries[index];
        let pb = BigInt::from(p.get());
        let (cofactor, rem) = b.denom().div_rem(&pb);
        if !rem.is_zero() || (&cofactor % &pb).is_zero() {
            return Err(Error::Invariant(format!(
                "denominator of B_{index} is not exactly divisible once by {p}"
            )));
        }
        rational_mod(&BigRational::new_raw(b.numer().clone(), cofactor), modulus)
    })?
}

/// `1^n + 2^n + ... + (k-1)^n` from the symbolic form
/// `((B + k)^(n+1) - B^(n+1)) / (n+1)`.
pub fn faulhaber_sum(table: &SharedBernoulli, n: usize, k: u64) -> Result<BigInt> {
    if k == 0 {
        return Err(Error::Domain("faulhaber_sum needs k >= 1".into()));
    }
    let value = table.with(n, |t| {
        let kb = BigInt::from(k);
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for i in 0..=n {
            let term = &t.entries[i]
                * BigRational::from_integer(&binom * num_traits::pow(kb.clone(), n + 1 - i));
            acc += term;
            binom = binom * (n + 1 - i) / (i + 1);
        }
        acc / BigRational::from_integer(BigInt::from(n + 1))
    })?;
    if !value.is_integer() {
        return Err(Error::Invariant(format!(
            "faulhaber_sum({n}, {k}) evaluated to the non-integer {value}"
        )));
    }
    let mut sum = value.to_integer();
    // The symbolic form counts the a = 0 term, which is 0^0 = 1 when n = 0.
    if n == 0 {
        sum -= 1;
    }
    Ok(sum)
}

/// `(B + p)^j = sum_i C(j, i) p^(j-i) B_i`, evaluated exactly and reduced
/// modulo `p^modulus_power`.
pub fn symbolic_shift_power(
    table: &SharedBernoulli,
    p: CertifiedPrime,
    j: usize,
    modulus_power: u32,
) -> Result<Residue> {
    let modulus = p.power(modulus_power)?;
    let value = shifted_power(table, p.get(), j)?;
    if (value.denom() % BigInt::from(p.get())).is_zero() {
        return Err(Error::Domain(format!(
            "(B + {p})^{j} = {value} is not {p}-integral"
        )));
    }
    rational_mod(&value, modulus)
}

/// Exact `(B + shift)^j`.
pub fn shifted_power(table: &SharedBernoulli, shift: u64, j: usize) -> Result<BigRational> {
    table.with(j, |t| {
        let s = BigInt::from(shift);
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for i in 0..=j {
            if !t.entries[i].is_zero() {
                let weight = &binom * num_traits::pow(s.clone(), j - i);
                acc += &t.entries[i] * BigRational::from_integer(weight);
            }
            binom = binom * (j - i) / (i + 1);
        }
        acc
    })
}
