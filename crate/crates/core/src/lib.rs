//! Fermat, Wilson, Lerch and Fermat-Wilson quotients, the special primes they
//! define, and checkpointed range searches for them.
//!
//! Module map:
//! - [`modarith`]: machine-width primality, sieving and modular kernels
//! - [`bernoulli`]: exact Bernoulli numbers and their residues
//! - [`quotients`]: exact quotients and their residues mod `p`
//! - [`classify`]: Wilson / Lerch / Wieferich / WW predicates, factorization
//! - [`search`]: checkpointed range scans and the Lerch-method benchmark
//! - [`corpus`]: embedded OEIS prefixes and their verifier

pub mod bernoulli;
pub mod classify;
pub mod corpus;
pub mod error;
mod factor;
pub mod modarith;
pub mod quotients;
pub mod search;

pub use bernoulli::{BernoulliTable, BigRational, SharedBernoulli};
pub use classify::{ClassificationRecord, Factor, Factorization, LerchMethod};
pub use error::{Error, Result};
pub use modarith::{CertifiedPrime, Residue};
pub use quotients::{QuotientKind, QuotientResidues, QuotientValue};
pub use search::{
    BenchMethod, BenchSample, CrossoverReport, ScanKind, ScanOptions, ScanTask, SearchCheckpoint,
};
