//! Embedded OEIS prefixes and a verifier that recomputes them.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};

use crate::bernoulli::SharedBernoulli;
use crate::classify;
use crate::error::{Error, Result};
use crate::factor::is_strong_probable_prime;
use crate::modarith::{self, CertifiedPrime};
use crate::quotients;
use crate::search::{self, ScanKind, ScanOptions, ScanTask};

/// `oeis_id \t index \t value`, one term per line after a header.
pub const CORPUS_TSV: &str = include_str!("../data/corpus.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub oeis_id: String,
    pub index: usize,
    pub value: String,
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let bad = |detail: String| Error::Parse {
        what: "corpus",
        detail,
    };
    let mut lines = text.lines();
    if lines.next() != Some("oeis_id\tindex\tvalue") {
        return Err(bad("missing header".into()));
    }
    lines
        .map(|line| {
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(id), Some(index), Some(value), None) => Ok(CorpusEntry {
                    oeis_id: id.to_string(),
                    index: index
                        .parse()
                        .map_err(|_| bad(format!("bad index in {line:?}")))?,
                    value: value.to_string(),
                }),
                _ => Err(bad(format!("bad line {line:?}"))),
            }
        })
        .collect()
}

/// Prefixes keyed by id, terms in index order.
pub fn sequences() -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in parse_corpus(CORPUS_TSV)? {
        let terms = out.entry(e.oeis_id.clone()).or_default();
        if e.index != terms.len() + 1 {
            return Err(Error::Parse {
                what: "corpus",
                detail: format!("{} index {} out of order", e.oeis_id, e.index),
            });
        }
        terms.push(e.value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceCheck {
    pub oeis_id: String,
    pub expected: Vec<String>,
    pub computed: Vec<String>,
}

impl SequenceCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.computed
    }
}

/// Recompute every embedded prefix.
pub fn verify(table: &SharedBernoulli) -> Result<Vec<SequenceCheck>> {
    sequences()?
        .into_iter()
        .map(|(id, expected)| {
            let computed = compute(&id, &expected, table)?;
            Ok(SequenceCheck {
                oeis_id: id,
                expected,
                computed,
            })
        })
        .collect()
}

fn odd_primes() -> impl Iterator<Item = CertifiedPrime> {
    modarith::primes_in_range(3, u32::MAX as u64)
}

fn non_wilson_primes() -> impl Iterator<Item = CertifiedPrime> {
    modarith::primes_in_range(2, u32::MAX as u64)
        .filter(|&p| !classify::is_wilson_prime(p).expect("p^2 fits"))
}

fn take<T: ToString>(n: usize, it: impl Iterator<Item = Result<T>>) -> Result<Vec<String>> {
    it.take(n).map(|x| x.map(|v| v.to_string())).collect()
}

fn scan_hits(kind: ScanKind, lo: u64, hi: u64, table: &SharedBernoulli) -> Result<Vec<String>> {
    let task = ScanTask::new(kind, lo, hi, search::DEFAULT_CHUNK)?;
    let out = search::scan(task, None, &ScanOptions::default(), table, |_| {})?;
    Ok(out.new_hits.iter().map(u64::to_string).collect())
}

fn last_term(expected: &[String]) -> Result<u64> {
    expected
        .last()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse {
            what: "corpus",
            detail: "prime list must end in a machine-width integer".into(),
        })
}

// Sieve bound for the prime-Wilson-quotient screen.
const WILSON_SCREEN_BOUND: u64 = 1_000_000;

// For each prime p <= limit, whether some prime q <= WILSON_SCREEN_BOUND with
// q != w_p divides w_p. Primes q < p never do (w_p = 1/p mod q), so each q
// walks the factorial only up to min(q, max p).
fn wilson_quotient_has_small_factor(primes: &[CertifiedPrime]) -> Vec<bool> {
    let mut hit = vec![false; primes.len()];
    for q in modarith::primes_in_range(3, WILSON_SCREEN_BOUND).map(|q| q.get()) {
        let mut fact = 1u64;
        let mut next = 1u64;
        for (i, &prime) in primes.iter().enumerate() {
            let p = prime.get();
            if p >= q {
                break;
            }
            while next < p {
                fact = fact * next % q; // q < 2^20, no overflow
                next += 1;
            }
            // (p-1)! + 1 = p * w_p and q != p.
            if (fact + 1).is_multiple_of(q) && !hit[i] {
                let w = quotients::wilson_quotient(prime).expect("prime").value;
                hit[i] = w != BigInt::from(q);
            }
        }
    }
    hit
}

// Prime p <= limit with a (probable) prime Wilson quotient.
fn prime_wilson_quotients(limit: u64) -> Result<Vec<String>> {
    let primes: Vec<CertifiedPrime> = modarith::primes_in_range(2, limit).collect();
    let screened = wilson_quotient_has_small_factor(&primes);
    let candidates: Vec<CertifiedPrime> = primes
        .iter()
        .zip(&screened)
        .filter(|(_, &s)| !s)
        .map(|(&p, _)| p)
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut found: Vec<CertifiedPrime> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut mine: Vec<CertifiedPrime> = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        let Some(&p) = candidates.get(i) else { break };
                        let w = quotients::wilson_quotient(p)?.value;
                        let (_, w) = w.into_parts();
                        // Probable primality only: a proof at ~26000 bits is out of reach.
                        if w > BigUint::from(1u32)
                            && is_strong_probable_prime(&w, 2)
                            && is_strong_probable_prime(&w, 3)
                        {
                            mine.push(p);
                        }
                    }
                    Ok(mine)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Result<Vec<Vec<_>>>>()
    })?
    .concat();
    found.sort_unstable_by_key(|p| p.get());
    Ok(found.iter().map(|p| p.get().to_string()).collect())
}

fn compute(id: &str, expected: &[String], table: &SharedBernoulli) -> Result<Vec<String>> {
    let n = expected.len();
    match id {
        "A007663" => take(
            n,
            odd_primes().map(|p| quotients::fermat_quotient(p, &BigInt::from(2)).map(|q| q.value)),
        ),
        "A007619" => take(
            n,
            modarith::primes_in_range(2, u32::MAX as u64)
                .map(|p| quotients::wilson_quotient(p).map(|q| q.value)),
        ),
        "A002068" => take(
            n,
            modarith::primes_in_range(2, u32::MAX as u64)
                .map(|p| quotients::quotient_residues(p).map(|r| r.wilson)),
        ),
        "A197630" => take(
            n,
            odd_primes().map(|p| quotients::lerch_quotient(p).map(|q| q.value)),
        ),
        "A197631" => take(
            n,
            odd_primes().map(|p| {
                quotients::quotient_residues(p)?
                    .lerch
                    .ok_or_else(|| Error::Invariant("odd prime without a Lerch residue".into()))
            }),
        ),
        "A197633" => take(
            n,
            non_wilson_primes().map(|p| quotients::fermat_wilson_quotient(p).map(|q| q.value)),
        ),
        "A197634" => take(
            n,
            non_wilson_primes().map(|p| {
                quotients::quotient_residues(p)?
                    .fermat_wilson
                    .ok_or_else(|| {
                        Error::Invariant("non-Wilson prime without a g_p residue".into())
                    })
            }),
        ),
        "A197632" => scan_hits(ScanKind::LerchDefinition, 3, last_term(expected)?, table),
        "A197635" => scan_hits(ScanKind::Ww, 2, last_term(expected)?, table),
        "A050299" => prime_wilson_quotients(last_term(expected)?),
        other => Err(Error::Domain(format!("no generator for {other}"))),
    }
}
