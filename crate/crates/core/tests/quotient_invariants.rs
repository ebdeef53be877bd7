use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

use wllab_core::bernoulli::SharedBernoulli;
use wllab_core::classify;
use wllab_core::modarith::{self, CertifiedPrime};
use wllab_core::quotients;

fn is_prime_big(n: &BigInt) -> bool {
    n.is_positive() && classify::is_probable_prime(n.magnitude()).0
}

#[test]
fn only_l5_is_prime_up_to_200() {
    let prime_ls: Vec<u64> = modarith::primes_in_range(3, 200)
        .filter(|&p| is_prime_big(&quotients::lerch_quotient(p).unwrap().value))
        .map(|p| p.get())
        .collect();
    assert_eq!(prime_ls, [5]);
}

#[test]
fn prime_wilson_quotients_up_to_100() {
    let prime_ws: Vec<u64> = modarith::primes_in_range(2, 100)
        .filter(|&p| is_prime_big(&quotients::wilson_quotient(p).unwrap().value))
        .map(|p| p.get())
        .collect();
    assert_eq!(prime_ws, [5, 7, 11, 29]);
}

#[test]
fn fermat_wilson_quotients_are_composite() {
    for p in modarith::primes_in_range(5, 50) {
        if classify::is_wilson_prime(p).unwrap() {
            continue;
        }
        let g = quotients::fermat_wilson_quotient(p).unwrap().value;
        assert!(g > BigInt::from(24));
        assert_eq!(&g % 24, BigInt::from(0), "g_{p}");
        assert!(!is_prime_big(&g));
    }
}

#[test]
fn exact_and_residue_forms_agree() {
    for p in modarith::primes_in_range(3, 200) {
        let r = quotients::quotient_residues(p).unwrap();
        let pb = BigInt::from(p.get());
        let w = quotients::wilson_quotient(p).unwrap().value % &pb;
        assert_eq!(w.to_u64(), Some(r.wilson), "w_{p}");
        let l = quotients::lerch_quotient(p).unwrap().value % &pb;
        assert_eq!(l.to_u64(), r.lerch, "l_{p}");
        assert_eq!(quotients::wilson_quotient_mod(p, 1).unwrap(), r.wilson);
    }
}

#[test]
fn lerch_quotient_both_forms() {
    for p in modarith::primes_in_range(3, 100) {
        assert_eq!(
            quotients::lerch_quotient(p).unwrap().value,
            quotients::lerch_quotient_via_quotients(p).unwrap(),
            "l_{p}"
        );
    }
}

#[test]
fn lerch_criterion_agrees_with_both_methods() {
    let table = SharedBernoulli::default();
    for p in modarith::primes_in_range(5, 199) {
        let d = classify::is_lerch_prime_definition(p).unwrap();
        assert_eq!(
            classify::is_lerch_prime_test(&table, p).unwrap(),
            d,
            "test at {p}"
        );
        assert_eq!(
            classify::check_criterion(&table, p).unwrap(),
            d,
            "criterion at {p}"
        );
    }
}

#[test]
fn ww_primes_are_wieferich_base_w() {
    for p in modarith::primes_in_range(2, 300) {
        if classify::is_wilson_prime(p).unwrap() {
            assert!(!classify::is_ww_prime(p).unwrap());
            continue;
        }
        let w = quotients::wilson_quotient_mod(p, 2).unwrap() as i128;
        assert_eq!(
            classify::is_ww_prime(p).unwrap(),
            classify::is_wieferich(p, w).unwrap(),
            "{p}"
        );
        let g_mod_p = classify::fermat_wilson_mod(p, p.get()).unwrap();
        assert_eq!(classify::is_ww_prime(p).unwrap(), g_mod_p == 0, "{p}");
    }
}

#[test]
fn factorizations_multiply_back() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let n: u64 = rng.gen_range(1..u64::MAX);
        let f = classify::factorize(&BigUint::from(n)).unwrap();
        assert!(f.is_complete(), "{n}");
        assert_eq!(f.product(), BigUint::from(n));
        assert!(f
            .factors
            .iter()
            .all(|x| x.proven && modarith::is_prime(x.prime.to_u64().unwrap())));
        assert!(f.factors.windows(2).all(|w| w[0].prime < w[1].prime));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eisenstein_relation(i in 0usize..95, a in 1i64..1_000_000, b in 1i64..1_000_000) {
        let p = modarith::primes_in_range(2, 500).nth(i).unwrap();
        prop_assume!(a % p.get() as i64 != 0 && b % p.get() as i64 != 0);
        let q = |x: i64| quotients::fermat_quotient(p, &BigInt::from(x)).unwrap().value;
        let m = BigInt::from(p.get());
        let lhs = ((q(a * b) % &m) + &m) % &m;
        let rhs = ((q(a) + q(b)) % &m + &m) % &m;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fermat_quotient_residue_matches_pow_mod(i in 0usize..168, a in -10_000i128..10_000) {
        let p: CertifiedPrime = modarith::primes_in_range(2, 1000).nth(i).unwrap();
        prop_assume!(a % p.get() as i128 != 0);
        let q = quotients::fermat_quotient(p, &BigInt::from(a)).unwrap().value;
        let p2 = p.square().unwrap();
        let lifted = modarith::pow_mod(a, p.get() - 1, p2).value();
        // a^(p-1) = 1 + p q_p(a)
        let m = BigInt::from(p.get());
        let expected = BigInt::from((lifted + p2 - 1) % p2 / p.get());
        prop_assert_eq!(((q % &m) + &m) % &m, expected);
    }
}
