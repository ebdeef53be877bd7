//! `wllab`: quotients, special primes and range searches from the command line.

mod cache;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde_json::Value;

use wllab_core::bernoulli;
use wllab_core::classify::{self, LerchMethod};
use wllab_core::search::{self, ScanKind, ScanOptions, ScanTask, SearchCheckpoint};
use wllab_core::{corpus, quotients, CertifiedPrime, Error, SharedBernoulli};

use cache::BernoulliCache;
use output::{num, opt_num, Emitter, Format};

#[derive(Parser)]
#[command(
    name = "wllab",
    version,
    about = "Fermat, Wilson and Lerch quotients and their special primes"
)]
struct Cli {
    /// Output format; jsonl is the stable machine-readable one.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of a quotient at a prime.
    Quotient {
        #[arg(value_enum)]
        kind: QuotientArg,
        p: u64,
        /// Base of the Fermat quotient.
        #[arg(long, default_value = "2", allow_negative_numbers = true)]
        base: BigInt,
    },
    /// Residues and special-prime flags of a prime.
    Classify {
        p: u64,
        #[arg(long = "wieferich-base", allow_negative_numbers = true)]
        wieferich_base: Vec<i128>,
        /// How to decide the Lerch property.
        #[arg(long, value_enum, default_value_t = MethodArg::Definition)]
        method: MethodArg,
    },
    /// Search a range of primes, optionally checkpointed.
    Scan {
        #[arg(long, value_enum)]
        kind: ScanArg,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Base for wieferich scans.
        #[arg(long, allow_negative_numbers = true)]
        base: Option<i128>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from the checkpoint file if it exists.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = search::DEFAULT_CHUNK)]
        chunk: u64,
    },
    /// Time the two Lerch decision procedures.
    BenchLerch {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Also write the timing table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exact Bernoulli number, or its residue modulo a prime power.
    Bernoulli {
        n: usize,
        #[arg(long = "mod-prime")]
        mod_prime: Option<u64>,
        #[arg(long, requires = "mod_prime", default_value_t = 1)]
        power: u32,
    },
    /// Factor a non-negative integer.
    Factor { n: BigUint },
    /// Recompute the embedded OEIS prefixes.
    VerifyCorpus,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuotientArg {
    Fermat,
    Wilson,
    Lerch,
    Fw,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Definition,
    Test,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanArg {
    Wilson,
    LerchDef,
    LerchTest,
    Wieferich,
    Ww,
}

/// Why the run failed, mapped to the exit status.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("writing output: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut out = Emitter::new(cli.format);
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, out: &mut Emitter) -> Outcome {
    match command {
        Command::Quotient { kind, p, base } => quotient(out, kind, p, &base),
        Command::Classify {
            p,
            wieferich_base,
            method,
        } => with_cache(|table| classify_cmd(out, table, p, &wieferich_base, method)),
        Command::Scan {
            kind,
            from,
            to,
            base,
            checkpoint,
            resume,
            jobs,
            chunk,
        } => {
            let kind = match (kind, base) {
                (ScanArg::Wieferich, Some(base)) => ScanKind::Wieferich { base },
                (ScanArg::Wieferich, None) => {
                    return Err(Failure::Usage("--kind wieferich needs --base".into()))
                }
                (_, Some(_)) => {
                    return Err(Failure::Usage(
                        "--base only applies to --kind wieferich".into(),
                    ))
                }
                (ScanArg::Wilson, None) => ScanKind::Wilson,
                (ScanArg::LerchDef, None) => ScanKind::LerchDefinition,
                (ScanArg::LerchTest, None) => ScanKind::LerchTest,
                (ScanArg::Ww, None) => ScanKind::Ww,
            };
            if jobs == Some(0) {
                return Err(Failure::Usage("--jobs must be at least 1".into()));
            }
            let task = ScanTask::new(kind, from, to, chunk)?;
            with_cache(|table| scan_cmd(out, table, task, checkpoint, resume, jobs))
        }
        Command::BenchLerch { primes, reps, csv } => {
            with_cache(|table| bench(out, table, &primes, reps, csv))
        }
        Command::Bernoulli {
            n,
            mod_prime,
            power,
        } => with_cache(|table| bernoulli_cmd(out, table, n, mod_prime, power)),
        Command::Factor { n } => factor(out, &n),
        Command::VerifyCorpus => verify_corpus(out),
    }
}

fn with_cache(f: impl FnOnce(&SharedBernoulli) -> Outcome) -> Outcome {
    let (cache, table) = BernoulliCache::open();
    let result = f(&table);
    cache.store(&table);
    result
}

fn prime(p: u64) -> Result<CertifiedPrime, Failure> {
    Ok(CertifiedPrime::new(p)?)
}

fn quotient(out: &mut Emitter, kind: QuotientArg, p: u64, base: &BigInt) -> Outcome {
    let p = prime(p)?;
    let (value, exact) = match kind {
        QuotientArg::Fermat => (quotients::fermat_quotient(p, base)?.value, true),
        QuotientArg::Wilson => (quotients::wilson_quotient(p)?.value, true),
        QuotientArg::Lerch => (quotients::lerch_quotient(p)?.value, true),
        QuotientArg::Fw => match quotients::fermat_wilson_quotient(p) {
            Ok(q) => (q.value, true),
            Err(Error::Range(why)) => {
                eprintln!("note: {why}");
                (
                    BigInt::from(classify::fermat_wilson_mod(p, p.get())?),
                    false,
                )
            }
            Err(e) => return Err(e.into()),
        },
    };
    let name = match kind {
        QuotientArg::Fermat => "fermat",
        QuotientArg::Wilson => "wilson",
        QuotientArg::Lerch => "lerch",
        QuotientArg::Fw => "fermat_wilson",
    };
    let base_value = match kind {
        QuotientArg::Fermat => num(base),
        _ => Value::Null,
    };
    let modulus = if exact { Value::Null } else { num(p) };
    let text = || {
        let subject = match kind {
            QuotientArg::Fermat => format!("{name} quotient of {p} base {base}"),
            _ => format!("{name} quotient of {p}"),
        };
        if exact {
            format!("{subject} = {value}")
        } else {
            format!("{subject} = {value} (mod {p}, exact value too large)")
        }
    };
    out.record(
        "quotient",
        payload! {
            "kind" => name,
            "p" => num(p),
            "base" => base_value,
            "value" => num(&value),
            "exact" => exact,
            "modulus" => modulus,
        },
        text,
    )?;
    Ok(())
}

fn classify_cmd(
    out: &mut Emitter,
    table: &SharedBernoulli,
    p: u64,
    bases: &[i128],
    method: MethodArg,
) -> Outcome {
    let p = prime(p)?;
    let method = match method {
        MethodArg::Definition => LerchMethod::Definition,
        MethodArg::Test => LerchMethod::BernoulliTest,
        MethodArg::Both => LerchMethod::Both,
    };
    let r = classify::classify(table, p, bases, method)?;
    let wieferich: Vec<Value> = r
        .wieferich
        .iter()
        .map(|&(a, holds)| Value::Object(payload! { "base" => num(a), "holds" => holds }))
        .collect();
    let text = || {
        let show = |v: Option<u64>| v.map_or("undefined".to_string(), |v| v.to_string());
        let mut lines = vec![
            format!("p = {}", r.p),
            format!("wilson = {}", r.wilson),
            format!("lerch = {} ({})", r.lerch, r.lerch_method),
            format!("ww = {}", r.ww),
        ];
        lines.extend(
            r.wieferich
                .iter()
                .map(|(a, h)| format!("wieferich base {a} = {h}")),
        );
        lines.push(format!("w_p mod p = {}", r.residues.wilson));
        lines.push(format!("l_p mod p = {}", show(r.residues.lerch)));
        lines.push(format!("g_p mod p = {}", show(r.residues.fermat_wilson)));
        lines.join("\n")
    };
    out.record(
        "classification",
        payload! {
            "p" => num(r.p),
            "wilson" => r.wilson,
            "lerch" => r.lerch,
            "lerch_method" => r.lerch_method.name(),
            "ww" => r.ww,
            "wieferich" => wieferich.clone(),
            "w_mod_p" => num(r.residues.wilson),
            "l_mod_p" => opt_num(r.residues.lerch),
            "g_mod_p" => opt_num(r.residues.fermat_wilson),
        },
        text,
    )?;
    Ok(())
}

fn scan_cmd(
    out: &mut Emitter,
    table: &SharedBernoulli,
    task: ScanTask,
    checkpoint: Option<PathBuf>,
    resume: bool,
    jobs: Option<usize>,
) -> Outcome {
    let previous = match &checkpoint {
        Some(path) if resume && path.exists() => Some(SearchCheckpoint::load(path)?),
        Some(path) if resume => {
            eprintln!(
                "note: {} does not exist yet, starting fresh",
                path.display()
            );
            None
        }
        _ => None,
    };
    let kind = task.kind().to_string();
    let emit_hit = |out: &mut Emitter, p: u64| {
        out.record(
            "hit",
            payload! { "kind" => kind.as_str(), "p" => num(p) },
            || p.to_string(),
        )
    };
    // Hits from an earlier run come first so the output does not depend on
    // where the scan was interrupted.
    for &p in previous.iter().flat_map(|c| &c.hits) {
        emit_hit(out, p)?;
    }
    let options = ScanOptions {
        workers: jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        checkpoint_path: checkpoint,
        stop_after_chunks: None,
    };
    let mut write_error = None;
    let outcome = search::scan(task, previous, &options, table, |p| {
        if write_error.is_none() {
            write_error = emit_hit(out, p).err();
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    eprintln!(
        "scanned {} [{}, {}]: {} hit(s)",
        kind,
        task.lo(),
        task.hi(),
        outcome.checkpoint.hits.len()
    );
    Ok(())
}

fn bench(
    out: &mut Emitter,
    table: &SharedBernoulli,
    primes: &[u64],
    reps: usize,
    csv: Option<PathBuf>,
) -> Outcome {
    let primes = primes
        .iter()
        .map(|&p| prime(p))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = search::bench_lerch_methods(table, &primes, reps)?;
    let report = search::crossover_report(&samples)?;
    if let Some(path) = &csv {
        std::fs::write(path, report.to_csv())
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    out.text(search::CrossoverReport::CSV_HEADER)?;
    for row in &report.rows {
        let verdict = samples
            .iter()
            .find(|s| s.p.get() == row.p)
            .is_some_and(|s| s.verdict);
        let definition = format!("{:.6}", row.definition_seconds);
        let test = format!("{:.6}", row.test_seconds);
        out.record(
            "bench_row",
            payload! {
                "p" => num(row.p),
                "definition_seconds" => definition.as_str(),
                "test_seconds" => test.as_str(),
                "faster_method" => row.faster,
                "lerch" => verdict,
            },
            || format!("{},{definition},{test},{}", row.p, row.faster),
        )?;
    }
    match out.format() {
        Format::Text => out.text(&format!("# {}", report.summary))?,
        Format::Jsonl => eprintln!("{}", report.summary),
    }
    Ok(())
}

fn bernoulli_cmd(
    out: &mut Emitter,
    table: &SharedBernoulli,
    n: usize,
    mod_prime: Option<u64>,
    power: u32,
) -> Outcome {
    let b = table.get(n)?;
    let Some(p) = mod_prime else {
        return Ok(out.record(
            "bernoulli",
            payload! {
                "n" => num(n),
                "numerator" => num(b.numer()),
                "denominator" => num(b.denom()),
            },
            || format!("B_{n} = {b}"),
        )?);
    };
    let p = prime(p)?;
    if power == 0 {
        return Err(Failure::Usage("--power must be at least 1".into()));
    }
    // p divides the denominator at most once, so p * B_n is then p-integral.
    let scaled = (b.denom() % p.get()) == BigInt::ZERO;
    let value = if scaled { b * BigInt::from(p.get()) } else { b };
    let residue = bernoulli::rational_mod(&value, p.power(power)?)?;
    let text = || {
        let lhs = if scaled {
            format!("{p} * B_{n}")
        } else {
            format!("B_{n}")
        };
        format!("{lhs} = {} (mod {})", residue.value(), residue.modulus())
    };
    out.record(
        "bernoulli",
        payload! {
            "n" => num(n),
            "modulus" => num(residue.modulus()),
            "residue" => num(residue.value()),
            "scaled_by_p" => scaled,
        },
        text,
    )?;
    Ok(())
}

fn factor(out: &mut Emitter, n: &BigUint) -> Outcome {
    let f = classify::factorize(n)?;
    let factors: Vec<Value> = f
        .factors
        .iter()
        .map(|x| {
            Value::Object(payload! {
                "prime" => num(&x.prime),
                "exponent" => num(x.exponent),
                "proven" => x.proven,
            })
        })
        .collect();
    let text = || {
        let mut line = format!("{n} = {f}");
        if f.factors.iter().any(|x| !x.proven) {
            line.push_str(" (some factors are probable primes)");
        }
        line
    };
    out.record(
        "factorization",
        payload! {
            "n" => num(n),
            "factors" => factors.clone(),
            "complete" => f.is_complete(),
            "unfactored" => opt_num(f.unfactored.as_ref()),
        },
        text,
    )?;
    Ok(())
}

fn verify_corpus(out: &mut Emitter) -> Outcome {
    let table = SharedBernoulli::default();
    let checks = corpus::verify(&table)?;
    let mut failed = 0;
    for c in &checks {
        let first_mismatch = (0..c.expected.len().max(c.computed.len()))
            .find(|&i| c.expected.get(i) != c.computed.get(i))
            .map(|i| i + 1);
        failed += usize::from(!c.passed());
        out.record(
            "corpus_check",
            payload! {
                "oeis_id" => c.oeis_id.as_str(),
                "terms" => num(c.expected.len()),
                "passed" => c.passed(),
                "first_mismatch" => opt_num(first_mismatch),
            },
            || match first_mismatch {
                None => format!("{} ok ({} terms)", c.oeis_id, c.expected.len()),
                Some(i) => format!("{} FAILED at term {i}", c.oeis_id),
            },
        )?;
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!(
            "{failed} of {} sequences do not match",
            checks.len()
        )));
    }
    Ok(())
}
