//! Predicates for the special primes, the congruence self-checks behind
//! them, and a classification record that bundles everything for one prime.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::bernoulli::{self, BigRational, SharedBernoulli};
use crate::error::{Error, Result};
use crate::modarith::{self, CertifiedPrime};
use crate::quotients::{self, QuotientResidues};

/// `(p-1)! ≡ -1 (mod p^2)`.
pub fn is_wilson_prime(p: CertifiedPrime) -> Result<bool> {
    let m = p.square()?;
    Ok(modarith::factorial_mod(p.get() - 1, m).value() == m - 1)
}

/// Lehmer's form: `p B_{p-1} ≡ p - 1 (mod p^2)`. Primes below 5 fall back
/// to [`is_wilson_prime`].
pub fn is_wilson_prime_lehmer(table: &SharedBernoulli, p: CertifiedPrime) -> Result<bool> {
    if p.get() <= 3 {
        return is_wilson_prime(p);
    }
    Ok(bernoulli::p_bernoulli_mod(table, p, 2)?.value() == p.get() - 1)
}

/// `sum_{a<p} a^(p-1) - p - (p-1)! ≡ 0 (mod p^3)`.
pub fn is_lerch_prime_definition(p: CertifiedPrime) -> Result<bool> {
    if !p.is_odd() {
        return Err(Error::Domain("Lerch primes are odd by definition".into()));
    }
    let m = p.cube()?;
    let s = modarith::sum_powers_mod(p)?.value();
    let f = modarith::factorial_mod(p.get() - 1, m).value();
    Ok(modarith::sub_mod(modarith::sub_mod(s, p.get(), m), f, m) == 0)
}

/// `p B_{p-1} ≡ p + (p-1)! (mod p^3)`, valid for `p > 3`.
pub fn is_lerch_prime_test(table: &SharedBernoulli, p: CertifiedPrime) -> Result<bool> {
    if p.get() <= 3 {
        return Err(Error::Domain(format!(
            "the Bernoulli test needs p > 3; decide p = {p} with the definition"
        )));
    }
    let m = p.cube()?;
    let lhs = bernoulli::p_bernoulli_mod(table, p, 3)?.value();
    let f = modarith::factorial_mod(p.get() - 1, m).value();
    Ok(lhs == modarith::add_mod(p.get(), f, m))
}

/// `(B + p)^p ≡ p^2 + p! (mod p^4)` with the left side expanded exactly.
pub fn check_criterion(table: &SharedBernoulli, p: CertifiedPrime) -> Result<bool> {
    if !p.is_odd() {
        return Err(Error::Domain(
            "the criterion is stated for odd primes".into(),
        ));
    }
    let m = p.power(4)?;
    let lhs = bernoulli::symbolic_shift_power(table, p, p.get() as usize, 4)?.value();
    let rhs = modarith::add_mod(
        modarith::mul_mod(p.get(), p.get(), m),
        modarith::factorial_mod(p.get(), m).value(),
        m,
    );
    Ok(lhs == rhs)
}

/// `p B_{p-1} ≡ p + (p-1)! (mod p^2)`, which holds for every prime. A
/// `false` here means a bug.
pub fn check_glaisher(table: &SharedBernoulli, p: CertifiedPrime) -> Result<bool> {
    let m = p.square()?;
    if p.get() <= 3 {
        let b = table.get((p.get() - 1) as usize)?;
        let fact = quotients::factorial(p.get() - 1);
        let diff = b * BigRational::from_integer(BigInt::from(p.get()))
            - BigRational::from_integer(BigInt::from(p.get()) + BigInt::from(fact));
        return Ok(bernoulli::rational_mod(&diff, m)?.is_zero());
    }
    let lhs = bernoulli::p_bernoulli_mod(table, p, 2)?.value();
    let f = modarith::factorial_mod(p.get() - 1, m).value();
    Ok(lhs == modarith::add_mod(p.get(), f, m))
}

/// `p ∤ a` and `a^(p-1) ≡ 1 (mod p^2)`.
pub fn is_wieferich(p: CertifiedPrime, a: i128) -> Result<bool> {
    let m = p.square()?;
    if a.rem_euclid(p.get() as i128) == 0 {
        return Ok(false);
    }
    Ok(modarith::pow_mod(a, p.get() - 1, m).value() == 1)
}

/// Wieferich prime base `w_p` for a non-Wilson `p`. Wilson primes are never
/// WW primes since `q_p(w_p)` does not exist for them.
pub fn is_ww_prime(p: CertifiedPrime) -> Result<bool> {
    let w = quotients::wilson_quotient_mod(p, 2)?;
    if w % p.get() == 0 {
        return Ok(false);
    }
    Ok(modarith::pow_mod_u64(w, p.get() - 1, p.square()?) == 1)
}

/// `g_p mod m` for a non-Wilson prime, via `w_p mod m p`.
pub fn fermat_wilson_mod(p: CertifiedPrime, m: u64) -> Result<u64> {
    let q = p.get();
    let lifted = q
        .checked_mul(q)
        .and_then(|x| x.checked_mul(m))
        .ok_or_else(|| Error::Range(format!("{m} * {q}^2 does not fit in 64 bits")))?;
    let f = modarith::factorial_mod(q - 1, lifted).value();
    let top = modarith::add_mod(f, 1, lifted);
    if !top.is_multiple_of(q) {
        return Err(Error::Invariant(format!("Wilson's theorem fails at {p}")));
    }
    let w = top / q; // w_p mod m p
    if w.is_multiple_of(q) {
        return Err(Error::Domain(format!(
            "{p} is a Wilson prime; g_p is undefined"
        )));
    }
    let mp = m * q;
    let x = modarith::sub_mod(modarith::pow_mod_u64(w, q - 1, mp), 1, mp);
    if !x.is_multiple_of(q) {
        return Err(Error::Invariant(format!(
            "Fermat's little theorem fails at {p}"
        )));
    }
    Ok(x / q)
}

/// gcd of `g_p` over all non-Wilson primes `p <= limit`.
///
/// Exact quotients are used up to 11, where the gcd is already 24; past
/// that only `g_p mod 24` can lower it.
pub fn gcd_fermat_wilson(limit: u64) -> Result<u64> {
    if limit < 11 {
        return Err(Error::Domain(format!(
            "limit must be at least 11, got {limit}"
        )));
    }
    let mut acc = BigInt::zero();
    for p in modarith::primes_in_range(2, 11) {
        if !is_wilson_prime(p)? {
            acc = acc.gcd(&quotients::fermat_wilson_quotient(p)?.value);
        }
    }
    let mut acc: u64 = acc
        .try_into()
        .map_err(|_| Error::Invariant("gcd of the first exact quotients is not small".into()))?;
    for p in modarith::primes_in_range(12, limit) {
        if is_wilson_prime(p)? {
            continue;
        }
        acc = modarith::gcd(acc, fermat_wilson_mod(p, acc)?);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LerchMethod {
    Definition,
    BernoulliTest,
    Both,
}

impl LerchMethod {
    pub fn name(self) -> &'static str {
        match self {
            LerchMethod::Definition => "definition",
            LerchMethod::BernoulliTest => "bernoulli_test",
            LerchMethod::Both => "both",
        }
    }
}

impl fmt::Display for LerchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationRecord {
    pub p: CertifiedPrime,
    pub wilson: bool,
    pub lerch: bool,
    pub lerch_method: LerchMethod,
    pub wieferich: Vec<(i128, bool)>,
    pub ww: bool,
    pub residues: QuotientResidues,
}

/// Everything known about `p`. The Bernoulli test needs `p > 3`, so smaller
/// primes are always decided by the definition.
pub fn classify(
    table: &SharedBernoulli,
    p: CertifiedPrime,
    wieferich_bases: &[i128],
    method: LerchMethod,
) -> Result<ClassificationRecord> {
    let residues = quotients::quotient_residues(p)?;
    let wilson = is_wilson_prime(p)?;
    let method = if p.get() <= 3 {
        LerchMethod::Definition
    } else {
        method
    };
    let lerch = match (p.is_odd(), method) {
        (false, _) => false,
        (true, LerchMethod::Definition) => is_lerch_prime_definition(p)?,
        (true, LerchMethod::BernoulliTest) => is_lerch_prime_test(table, p)?,
        (true, LerchMethod::Both) => {
            let definition = is_lerch_prime_definition(p)?;
            let test = is_lerch_prime_test(table, p)?;
            if definition != test {
                return Err(Error::VerdictMismatch {
                    p: p.get(),
                    definition,
                    test,
                });
            }
            definition
        }
    };
    let wieferich = wieferich_bases
        .iter()
        .map(|&a| Ok((a, is_wieferich(p, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let ww = is_ww_prime(p)?;
    debug_assert!(!(ww && wilson));
    Ok(ClassificationRecord {
        p,
        wilson,
        lerch,
        lerch_method: method,
        wieferich,
        ww,
        residues,
    })
}

pub use crate::factor::{
    factorize, factorize_with_budget, is_probable_prime, Factor, Factorization,
};
