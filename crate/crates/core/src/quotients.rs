//! The four quotient families, exact and reduced modulo `p`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::modarith::{self, CertifiedPrime};

/// Refuse exact Fermat-Wilson quotients with more decimal digits than this.
pub const DEFAULT_DIGIT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuotientKind {
    Fermat,
    Wilson,
    Lerch,
    FermatWilson,
}

impl QuotientKind {
    pub fn name(self) -> &'static str {
        match self {
            QuotientKind::Fermat => "fermat",
            QuotientKind::Wilson => "wilson",
            QuotientKind::Lerch => "lerch",
            QuotientKind::FermatWilson => "fermat_wilson",
        }
    }
}

impl fmt::Display for QuotientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientValue {
    pub kind: QuotientKind,
    pub p: CertifiedPrime,
    /// Only set for Fermat quotients.
    pub base: Option<BigInt>,
    pub value: BigInt,
}

fn exact_div(numerator: BigInt, divisor: &BigInt, what: &str) -> Result<BigInt> {
    let (q, r) = numerator.div_rem(divisor);
    if !r.is_zero() {
        return Err(Error::Invariant(format!(
            "{what}: remainder {r} dividing by {divisor}"
        )));
    }
    Ok(q)
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(a^(p-1) - 1) / p`.
pub fn fermat_quotient(p: CertifiedPrime, a: &BigInt) -> Result<QuotientValue> {
    let pb = BigInt::from(p.get());
    if (a % &pb).is_zero() {
        return Err(Error::Domain(format!("{p} divides the base {a}")));
    }
    let power = num_traits::pow(a.clone(), (p.get() - 1) as usize);
    let value = exact_div(power - 1, &pb, "fermat quotient")?;
    Ok(QuotientValue {
        kind: QuotientKind::Fermat,
        p,
        base: Some(a.clone()),
        value,
    })
}

/// `((p-1)! + 1) / p`.
pub fn wilson_quotient(p: CertifiedPrime) -> Result<QuotientValue> {
    let value = wilson_value(p)?;
    Ok(QuotientValue {
        kind: QuotientKind::Wilson,
        p,
        base: None,
        value,
    })
}

fn wilson_value(p: CertifiedPrime) -> Result<BigInt> {
    let f = BigInt::from(factorial(p.get() - 1));
    exact_div(f + 1, &BigInt::from(p.get()), "wilson quotient")
}

/// `(sum_{a<p} a^(p-1) - p - (p-1)!) / p^2` for odd `p`.
pub fn lerch_quotient(p: CertifiedPrime) -> Result<QuotientValue> {
    if !p.is_odd() {
        return Err(Error::Domain(
            "the Lerch quotient is defined for odd primes".into(),
        ));
    }
    let e = (p.get() - 1) as usize;
    let sum: BigUint = (1..p.get())
        .map(|a| num_traits::pow(BigUint::from(a), e))
        .sum();
    let numerator = BigInt::from(sum) - p.get() - BigInt::from(factorial(p.get() - 1));
    let p2 = BigInt::from(p.get()) * p.get();
    let value = exact_div(numerator, &p2, "lerch quotient")?;
    Ok(QuotientValue {
        kind: QuotientKind::Lerch,
        p,
        base: None,
        value,
    })
}

/// The Lerch quotient through Fermat and Wilson quotients:
/// `(sum_{a<p} q_p(a) - w_p) / p`.
pub fn lerch_quotient_via_quotients(p: CertifiedPrime) -> Result<BigInt> {
    if !p.is_odd() {
        return Err(Error::Domain(
            "the Lerch quotient is defined for odd primes".into(),
        ));
    }
    let mut sum = BigInt::zero();
    for a in 1..p.get() {
        sum += fermat_quotient(p, &BigInt::from(a))?.value;
    }
    exact_div(
        sum - wilson_value(p)?,
        &BigInt::from(p.get()),
        "lerch quotient",
    )
}

/// `(w_p^(p-1) - 1) / p` with the default digit budget.
pub fn fermat_wilson_quotient(p: CertifiedPrime) -> Result<QuotientValue> {
    fermat_wilson_quotient_with_budget(p, DEFAULT_DIGIT_BUDGET)
}

/// Decimal digits of `w_p^(p-1)`, estimated from the bit length of `w_p`.
pub fn fermat_wilson_digit_estimate(p: CertifiedPrime) -> u64 {
    // log10(w_p) ~ log10((p-1)!) - log10(p), by Stirling
    let n = (p.get() - 1) as f64;
    let log10_fact = if n < 2.0 {
        0.0
    } else {
        (n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln()) / std::f64::consts::LN_10
    };
    let log10_w = (log10_fact - (p.get() as f64).log10()).max(0.0);
    (log10_w * n).ceil() as u64 + 1
}

pub fn fermat_wilson_quotient_with_budget(
    p: CertifiedPrime,
    max_digits: u64,
) -> Result<QuotientValue> {
    let estimate = fermat_wilson_digit_estimate(p);
    if estimate > max_digits {
        return Err(Error::Range(format!(
            "g_{p} has about {estimate} digits, over the budget of {max_digits}; use the residue form"
        )));
    }
    let w = wilson_value(p)?;
    let pb = BigInt::from(p.get());
    if (&w % &pb).is_zero() {
        return Err(Error::Domain(format!(
            "{p} is a Wilson prime, so p divides w_p and q_p(w_p) is undefined"
        )));
    }
    let power = num_traits::pow(w, (p.get() - 1) as usize);
    let value = exact_div(power - 1, &pb, "fermat-wilson quotient")?;
    Ok(QuotientValue {
        kind: QuotientKind::FermatWilson,
        p,
        base: None,
        value,
    })
}

/// `w_p mod p^k`, computed from `(p-1)! mod p^(k+1)`.
pub fn wilson_quotient_mod(p: CertifiedPrime, k: u32) -> Result<u64> {
    let lifted = p.power(k + 1)?;
    let f = modarith::factorial_mod(p.get() - 1, lifted).value();
    let numerator = modarith::add_mod(f, 1, lifted);
    if !numerator.is_multiple_of(p.get()) {
        return Err(Error::Invariant(format!("Wilson's theorem fails at {p}")));
    }
    Ok(numerator / p.get())
}

/// `w_p`, `l_p` and `g_p` reduced modulo `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientResidues {
    pub p: CertifiedPrime,
    pub wilson: u64,
    /// Absent for `p = 2`.
    pub lerch: Option<u64>,
    /// Absent for Wilson primes.
    pub fermat_wilson: Option<u64>,
}

/// Residues of the quotients using arithmetic modulo `p^3` only.
pub fn quotient_residues(p: CertifiedPrime) -> Result<QuotientResidues> {
    let q = p.get();
    let m3 = p.cube()?;
    let m2 = q * q;
    let f = modarith::factorial_mod(q - 1, m3).value();
    let lifted = modarith::add_mod(f, 1, m3);
    if !lifted.is_multiple_of(q) {
        return Err(Error::Invariant(format!("Wilson's theorem fails at {p}")));
    }
    let w_mod_p2 = lifted / q;
    let wilson = w_mod_p2 % q;

    let lerch = if p.is_odd() {
        let s = modarith::sum_powers_mod(p)?.value();
        let top = modarith::sub_mod(modarith::sub_mod(s, q, m3), f, m3);
        if !top.is_multiple_of(m2) {
            return Err(Error::Invariant(format!("Lerch's formula fails at {p}")));
        }
        Some(top / m2)
    } else {
        None
    };

    let fermat_wilson = if wilson == 0 {
        None
    } else {
        let power = modarith::pow_mod_u64(w_mod_p2, q - 1, m2);
        let top = modarith::sub_mod(power, 1, m2);
        if !top.is_multiple_of(q) {
            return Err(Error::Invariant(format!(
                "Fermat's little theorem fails at {p}"
            )));
        }
        Some(top / q)
    };

    Ok(QuotientResidues {
        p,
        wilson,
        lerch,
        fermat_wilson,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::primes_in_range;

    fn prime(n: u64) -> CertifiedPrime {
        CertifiedPrime::new(n).unwrap()
    }

    fn big(s: &str) -> BigInt {
        s.parse().unwrap()
    }

    #[test]
    fn fermat_examples() {
        let values: Vec<BigInt> = (1..=4)
            .map(|a| fermat_quotient(prime(5), &BigInt::from(a)).unwrap().value)
            .collect();
        assert_eq!(values, [0, 3, 16, 51].map(BigInt::from));
        assert_eq!(
            fermat_quotient(prime(11), &BigInt::from(2)).unwrap().value,
            BigInt::from(93)
        );
        assert_eq!(
            fermat_quotient(prime(97), &BigInt::one()).unwrap().value,
            BigInt::zero()
        );
        assert!(matches!(
            fermat_quotient(prime(5), &BigInt::from(10)),
            Err(Error::Domain(_))
        ));
        // negative base: ((-2)^4 - 1)/5 = 3
        assert_eq!(
            fermat_quotient(prime(5), &BigInt::from(-2)).unwrap().value,
            BigInt::from(3)
        );
    }

    #[test]
    fn wilson_examples() {
        let got: Vec<BigInt> = [5, 7, 11, 13]
            .map(|q| wilson_quotient(prime(q)).unwrap().value)
            .to_vec();
        assert_eq!(got, [5u64, 103, 329891, 36846277].map(BigInt::from));
    }

    #[test]
    fn lerch_examples() {
        assert_eq!(lerch_quotient(prime(5)).unwrap().value, BigInt::from(13));
        assert_eq!(lerch_quotient(prime(7)).unwrap().value, BigInt::from(1356));
        assert_eq!(lerch_quotient(prime(3)).unwrap().value, BigInt::zero());
        assert!(matches!(lerch_quotient(prime(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn lerch_forms_agree() {
        for p in primes_in_range(3, 100) {
            assert_eq!(
                lerch_quotient(p).unwrap().value,
                lerch_quotient_via_quotients(p).unwrap(),
                "p = {p}"
            );
        }
    }

    #[test]
    fn fermat_wilson_examples() {
        assert!(fermat_wilson_quotient(prime(2)).unwrap().value.is_zero());
        assert!(fermat_wilson_quotient(prime(3)).unwrap().value.is_zero());
        assert_eq!(
            fermat_wilson_quotient(prime(7)).unwrap().value,
            big("170578899504")
        );
        assert_eq!(
            fermat_wilson_quotient(prime(11)).unwrap().value,
            big("1387752405580695978098914368989316131852701063520729400")
        );
        assert!(matches!(
            fermat_wilson_quotient(prime(13)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fermat_wilson_quotient(prime(14771)),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            fermat_wilson_quotient_with_budget(prime(17), 150),
            Err(Error::Range(_))
        ));
        let g17 = fermat_wilson_quotient(prime(17)).unwrap().value;
        assert_eq!(g17.to_string().len(), 193);
    }

    #[test]
    fn digit_estimate_tracks_exact_length() {
        for q in [7u64, 11, 17, 19, 23, 29, 31] {
            let exact = fermat_wilson_quotient(prime(q))
                .unwrap()
                .value
                .to_string()
                .len() as i64;
            let estimate = fermat_wilson_digit_estimate(prime(q)) as i64;
            assert!(
                (exact - estimate).abs() <= 3,
                "p = {q}: {exact} vs {estimate}"
            );
        }
        assert!(fermat_wilson_digit_estimate(prime(14771)) > 800_000_000);
    }

    #[test]
    fn residue_examples() {
        assert_eq!(quotient_residues(prime(13)).unwrap().wilson, 0);
        assert_eq!(quotient_residues(prime(13)).unwrap().fermat_wilson, None);
        assert_eq!(quotient_residues(prime(19)).unwrap().lerch, Some(13));
        assert_eq!(quotient_residues(prime(17)).unwrap().fermat_wilson, Some(9));
        let two = quotient_residues(prime(2)).unwrap();
        assert_eq!(
            (two.wilson, two.lerch, two.fermat_wilson),
            (1, None, Some(0))
        );
    }

    #[test]
    fn residues_match_exact_quotients() {
        for p in primes_in_range(3, 200) {
            let r = quotient_residues(p).unwrap();
            let pb = BigInt::from(p.get());
            let w = wilson_quotient(p).unwrap().value;
            assert_eq!(w.mod_floor(&pb), BigInt::from(r.wilson), "w_{p}");
            let l = lerch_quotient(p).unwrap().value;
            assert_eq!(l.mod_floor(&pb), BigInt::from(r.lerch.unwrap()), "l_{p}");
            if p.get() <= 60 {
                match fermat_wilson_quotient(p) {
                    Ok(g) => assert_eq!(
                        g.value.mod_floor(&pb),
                        BigInt::from(r.fermat_wilson.unwrap())
                    ),
                    Err(Error::Domain(_)) => assert_eq!(r.fermat_wilson, None),
                    Err(e) => panic!("{e}"),
                }
            }
            assert_eq!(
                wilson_quotient_mod(p, 2).unwrap(),
                (&w % (&pb * &pb)).try_into().unwrap()
            );
        }
    }
}
