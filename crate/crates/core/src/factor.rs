//! Trial division followed by Pollard–Brent rho, with an effort budget.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modarith;

pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// Default number of rho iterations before giving up.
pub const DEFAULT_RHO_BUDGET: u64 = 20_000_000;

// Fixed Miller-Rabin bases for integers past 64 bits.
const PROBABLE_PRIME_BASES: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub prime: BigUint,
    pub exponent: u32,
    /// `false` when primality rests on a probabilistic test (above 64 bits).
    pub proven: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    /// Ascending by prime.
    pub factors: Vec<Factor>,
    /// Composite part left over when the budget ran out.
    pub unfactored: Option<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_none()
    }

    pub fn product(&self) -> BigUint {
        let mut acc = self.unfactored.clone().unwrap_or_else(BigUint::one);
        for f in &self.factors {
            acc *= num_traits::pow(f.prime.clone(), f.exponent as usize);
        }
        acc
    }

    fn push(&mut self, prime: BigUint, proven: bool) {
        match self.factors.iter_mut().find(|f| f.prime == prime) {
            Some(f) => f.exponent += 1,
            None => self.factors.push(Factor {
                prime,
                exponent: 1,
                proven,
            }),
        }
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| match x.exponent {
                1 => x.prime.to_string(),
                e => format!("{}^{e}", x.prime),
            })
            .collect();
        if let Some(rest) = &self.unfactored {
            parts.push(format!("({rest})"));
        }
        if parts.is_empty() {
            return f.write_str("1");
        }
        f.write_str(&parts.join(" * "))
    }
}

/// Primality for arbitrary size: `(is_prime, proven)`.
pub fn is_probable_prime(n: &BigUint) -> (bool, bool) {
    if let Some(small) = n.to_u64() {
        return (modarith::is_prime(small), true);
    }
    for &q in &PROBABLE_PRIME_BASES {
        if (n % q).is_zero() {
            return (false, true);
        }
    }
    if PROBABLE_PRIME_BASES
        .iter()
        .all(|&a| is_strong_probable_prime(n, a))
    {
        (true, false)
    } else {
        (false, true)
    }
}

/// Strong (Miller-Rabin) probable-prime test of the odd `n > base` to one base.
pub fn is_strong_probable_prime(n: &BigUint, base: u32) -> bool {
    let one = BigUint::one();
    let minus_one = n - &one;
    let s = minus_one.trailing_zeros().unwrap_or(0);
    let d = &minus_one >> s;
    let mut x = BigUint::from(base).modpow(&d, n);
    if x == one || x == minus_one {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == minus_one {
            return true;
        }
    }
    false
}

pub fn factorize(n: &BigUint) -> Result<Factorization> {
    factorize_with_budget(n, DEFAULT_RHO_BUDGET)
}

pub fn factorize_with_budget(n: &BigUint, rho_budget: u64) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut out = Factorization::default();
    let mut rest = n.clone();
    for q in modarith::primes_in_range(2, TRIAL_DIVISION_LIMIT) {
        let q = q.get();
        if BigUint::from(q) * q > rest {
            break;
        }
        while (&rest % q).is_zero() {
            rest /= q;
            out.push(BigUint::from(q), true);
        }
    }

    let mut budget = rho_budget;
    let mut pending = vec![rest];
    let mut stuck = BigUint::one();
    while let Some(m) = pending.pop() {
        if m.is_one() {
            continue;
        }
        let (prime, proven) = is_probable_prime(&m);
        if prime {
            out.push(m, proven);
            continue;
        }
        match pollard_brent(&m, &mut budget) {
            Some(d) => {
                let other = &m / &d;
                pending.push(d);
                pending.push(other);
            }
            None => stuck *= m,
        }
    }
    if !stuck.is_one() {
        out.unfactored = Some(stuck);
    }
    out.factors.sort_by(|a, b| a.prime.cmp(&b.prime));
    Ok(out)
}

/// A nontrivial divisor of the composite `n`, or `None` once `budget`
/// iterations are spent.
fn pollard_brent(n: &BigUint, budget: &mut u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    const BATCH: u64 = 128;
    let mut c = BigUint::one();
    while *budget > 0 {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut r: u64 = 1;
        while g.is_one() {
            x.clone_from(&y);
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys.clone_from(&y);
                let steps = BATCH.min(r - k);
                for _ in 0..steps {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = q * diff % n;
                }
                *budget = budget.saturating_sub(steps);
                g = q.gcd(n);
                k += steps;
            }
            r *= 2;
            if *budget == 0 && g.is_one() {
                return None;
            }
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        c += 1u32;
    }
    None
}
