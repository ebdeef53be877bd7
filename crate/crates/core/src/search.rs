//! Chunked, checkpointed range scans and the Lerch-method benchmark.
//!
//! A scan splits `[lo, hi]` into fixed-size chunks. Workers claim chunk
//! numbers from a shared counter; finished chunks are released strictly in
//! order, so hits come out ascending whatever the worker count. After each
//! released chunk the checkpoint is rewritten (temp file, then rename).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::bernoulli::SharedBernoulli;
use crate::classify;
use crate::error::{Error, Result};
use crate::modarith::{self, CertifiedPrime};

pub const DEFAULT_CHUNK: u64 = 1024;

const CHECKPOINT_MAGIC: &str = "WLLAB-CKPT v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanKind {
    Wilson,
    LerchDefinition,
    LerchTest,
    Wieferich { base: i128 },
    Ww,
}

impl ScanKind {
    fn parse(s: &str) -> Option<ScanKind> {
        Some(match s {
            "wilson" => ScanKind::Wilson,
            "lerch_definition" => ScanKind::LerchDefinition,
            "lerch_test" => ScanKind::LerchTest,
            "ww" => ScanKind::Ww,
            other => {
                let base = other.strip_prefix("wieferich:base=")?.parse().ok()?;
                ScanKind::Wieferich { base }
            }
        })
    }

    /// Smallest prime the predicate is defined for.
    fn min_prime(self) -> u64 {
        match self {
            ScanKind::LerchDefinition => 3,
            ScanKind::LerchTest => 5,
            _ => 2,
        }
    }

    fn max_prime(self) -> u64 {
        match self {
            ScanKind::LerchDefinition | ScanKind::LerchTest | ScanKind::Ww => {
                modarith::CUBE_CEILING
            }
            ScanKind::Wilson | ScanKind::Wieferich { .. } => modarith::SQUARE_CEILING,
        }
    }

    pub fn holds(self, table: &SharedBernoulli, p: CertifiedPrime) -> Result<bool> {
        match self {
            ScanKind::Wilson => classify::is_wilson_prime(p),
            ScanKind::LerchDefinition => classify::is_lerch_prime_definition(p),
            ScanKind::LerchTest => classify::is_lerch_prime_test(table, p),
            ScanKind::Wieferich { base } => classify::is_wieferich(p, base),
            ScanKind::Ww => classify::is_ww_prime(p),
        }
    }
}

impl fmt::Display for ScanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanKind::Wilson => f.write_str("wilson"),
            ScanKind::LerchDefinition => f.write_str("lerch_definition"),
            ScanKind::LerchTest => f.write_str("lerch_test"),
            ScanKind::Wieferich { base } => write!(f, "wieferich:base={base}"),
            ScanKind::Ww => f.write_str("ww"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScanTask {
    kind: ScanKind,
    lo: u64,
    hi: u64,
    chunk_size: u64,
}

impl ScanTask {
    /// Bounds below 2 are raised to 2, since no smaller integer is prime.
    pub fn new(kind: ScanKind, lo: u64, hi: u64, chunk_size: u64) -> Result<Self> {
        let lo = lo.max(2);
        if lo > hi {
            return Err(Error::Domain(format!("empty scan range [{lo}, {hi}]")));
        }
        if chunk_size == 0 {
            return Err(Error::Domain("chunk size must be positive".into()));
        }
        if lo < kind.min_prime() {
            return Err(Error::Domain(format!(
                "{kind} scans start at {}, got lo = {lo}",
                kind.min_prime()
            )));
        }
        if hi > kind.max_prime() {
            return Err(Error::Range(format!(
                "{kind} scans support p <= {}, got hi = {hi}",
                kind.max_prime()
            )));
        }
        Ok(ScanTask {
            kind,
            lo,
            hi,
            chunk_size,
        })
    }

    pub fn kind(&self) -> ScanKind {
        self.kind
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn chunk_size(&self) -> u64 {
        self.chunk_size
    }

    pub fn chunk_count(&self) -> u64 {
        (self.hi - self.lo) / self.chunk_size + 1
    }

    /// Inclusive bounds of chunk `i`.
    pub fn chunk_bounds(&self, i: u64) -> (u64, u64) {
        let start = self.lo + i * self.chunk_size;
        (
            start,
            start.saturating_add(self.chunk_size - 1).min(self.hi),
        )
    }

    /// The task line without its fingerprint; this is what gets hashed.
    pub fn canonical_line(&self) -> String {
        format!(
            "task={} lo={} hi={} chunk={}",
            self.kind, self.lo, self.hi, self.chunk_size
        )
    }

    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.canonical_line().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Resumable state of a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchCheckpoint {
    pub task: ScanTask,
    /// Upper end of the last released chunk; `lo - 1` before the first.
    pub done: u64,
    pub hits: Vec<u64>,
    pub fingerprint: u64,
}

impl SearchCheckpoint {
    pub fn fresh(task: ScanTask) -> Self {
        SearchCheckpoint {
            task,
            done: task.lo - 1,
            hits: Vec::new(),
            fingerprint: task.fingerprint(),
        }
    }

    pub fn is_finished(&self) -> bool {
        self.done >= self.task.hi
    }

    pub fn to_text(&self) -> String {
        let hits: Vec<String> = self.hits.iter().map(u64::to_string).collect();
        format!(
            "{CHECKPOINT_MAGIC}\n{} fp={:016x}\ndone={}\nhits={}\n",
            self.task.canonical_line(),
            self.fingerprint,
            self.done,
            hits.join(",")
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |detail: &str| Error::Parse {
            what: "checkpoint",
            detail: detail.to_string(),
        };
        let body = text
            .strip_suffix('\n')
            .ok_or_else(|| bad("missing final newline"))?;
        let lines: Vec<&str> = body.split('\n').collect();
        let [magic, task_line, done_line, hits_line] = lines[..] else {
            return Err(bad("expected exactly four lines"));
        };
        if magic != CHECKPOINT_MAGIC {
            return Err(bad("bad magic line"));
        }

        let fields: Vec<&str> = task_line.split(' ').collect();
        let [kind, lo, hi, chunk, fp] = fields[..] else {
            return Err(bad("bad task line"));
        };
        let field = |f: &str, key: &str| -> Result<u64> {
            f.strip_prefix(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(&format!("bad {key} field")))
        };
        let kind = kind
            .strip_prefix("task=")
            .and_then(ScanKind::parse)
            .ok_or_else(|| bad("bad task kind"))?;
        let task = ScanTask::new(
            kind,
            field(lo, "lo=")?,
            field(hi, "hi=")?,
            field(chunk, "chunk=")?,
        )?;
        let fingerprint = fp
            .strip_prefix("fp=")
            .filter(|h| {
                h.len() == 16
                    && h.bytes()
                        .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
            })
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .ok_or_else(|| bad("bad fingerprint"))?;
        if task_line != format!("{} {fp}", task.canonical_line()) {
            return Err(bad("task line is not canonical"));
        }

        let done = field(done_line, "done=")?;
        let hits_text = hits_line
            .strip_prefix("hits=")
            .ok_or_else(|| bad("bad hits line"))?;
        let hits = if hits_text.is_empty() {
            Vec::new()
        } else {
            hits_text
                .split(',')
                .map(|h| h.parse::<u64>().map_err(|_| bad("bad hit")))
                .collect::<Result<Vec<_>>>()?
        };
        if done < task.lo - 1 || done > task.hi {
            return Err(bad("done outside the task range"));
        }
        if done != task.hi && (done - (task.lo - 1)) % task.chunk_size != 0 {
            return Err(bad("done is not a chunk boundary"));
        }
        if hits.windows(2).any(|w| w[0] >= w[1]) || hits.iter().any(|&h| h < task.lo || h > done) {
            return Err(bad("hits not ascending within [lo, done]"));
        }
        Ok(SearchCheckpoint {
            task,
            done,
            hits,
            fingerprint,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Write to `path` through a temporary file and a rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        fs::write(&tmp, self.to_text()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub workers: usize,
    pub checkpoint_path: Option<PathBuf>,
    /// Stop after releasing this many chunks, as if the process were killed.
    pub stop_after_chunks: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    /// Hits found by this run only.
    pub new_hits: Vec<u64>,
    pub checkpoint: SearchCheckpoint,
}

/// Run `task`, continuing from `resume` when given. `on_hit` sees every new
/// hit in ascending order.
pub fn scan(
    task: ScanTask,
    resume: Option<SearchCheckpoint>,
    options: &ScanOptions,
    table: &SharedBernoulli,
    mut on_hit: impl FnMut(u64),
) -> Result<ScanOutcome> {
    let mut state = match resume {
        Some(ckpt) => {
            if ckpt.fingerprint != task.fingerprint() || ckpt.task != task {
                return Err(Error::FingerprintMismatch {
                    expected: task.fingerprint(),
                    found: ckpt.fingerprint,
                });
            }
            ckpt
        }
        None => SearchCheckpoint::fresh(task),
    };
    let mut new_hits = Vec::new();
    if state.is_finished() {
        return Ok(ScanOutcome {
            new_hits,
            checkpoint: state,
        });
    }
    if let Some(path) = &options.checkpoint_path {
        state.save(path)?;
    }
    if task.kind == ScanKind::LerchTest {
        table.ensure((task.hi - 1) as usize)?;
    }

    let first_chunk = (state.done + 1 - task.lo) / task.chunk_size;
    let total = task.chunk_count();
    let next = AtomicU64::new(first_chunk);
    let stop = AtomicBool::new(false);
    let workers = options.workers.max(1);

    let result = std::thread::scope(|s| -> Result<()> {
        let (tx, rx) = mpsc::channel::<(u64, Result<Vec<u64>>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, stop) = (&next, &stop);
            s.spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= total {
                        break;
                    }
                    let (a, b) = task.chunk_bounds(i);
                    let hits = scan_chunk(task.kind, a, b, table);
                    if tx.send((i, hits)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        let mut release = first_chunk;
        let mut released = 0u64;
        let outcome = (|| {
            for (i, hits) in rx.iter() {
                pending.insert(i, hits?);
                while let Some(hits) = pending.remove(&release) {
                    for &h in &hits {
                        on_hit(h);
                    }
                    new_hits.extend_from_slice(&hits);
                    state.hits.extend(hits);
                    state.done = task.chunk_bounds(release).1;
                    if let Some(path) = &options.checkpoint_path {
                        state.save(path)?;
                    }
                    release += 1;
                    released += 1;
                    if options.stop_after_chunks.is_some_and(|n| released >= n) {
                        return Ok(());
                    }
                }
            }
            Ok(())
        })();
        stop.store(true, Ordering::Relaxed);
        outcome
    });
    result?;
    Ok(ScanOutcome {
        new_hits,
        checkpoint: state,
    })
}

fn scan_chunk(kind: ScanKind, lo: u64, hi: u64, table: &SharedBernoulli) -> Result<Vec<u64>> {
    let mut hits = Vec::new();
    for p in modarith::primes_in_range(lo, hi) {
        if kind.holds(table, p)? {
            hits.push(p.get());
        }
    }
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    Definition,
    Test,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Definition => "definition",
            BenchMethod::Test => "test",
        }
    }

    fn decide(self, table: &SharedBernoulli, p: CertifiedPrime) -> Result<bool> {
        match self {
            BenchMethod::Definition => classify::is_lerch_prime_definition(p),
            BenchMethod::Test => classify::is_lerch_prime_test(table, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSample {
    pub p: CertifiedPrime,
    pub method: BenchMethod,
    /// Median over the repetitions.
    pub elapsed: Duration,
    pub verdict: bool,
}

/// Time both Lerch decision procedures at each prime. Each (p, method) pair
/// gets one untimed warm-up call (which also fills the Bernoulli table), then
/// `repetitions` timed calls.
pub fn bench_lerch_methods(
    table: &SharedBernoulli,
    primes: &[CertifiedPrime],
    repetitions: usize,
) -> Result<Vec<BenchSample>> {
    if repetitions == 0 {
        return Err(Error::Domain("repetitions must be at least 1".into()));
    }
    if let Some(p) = primes.iter().find(|p| p.get() <= 3) {
        return Err(Error::Domain(format!("both methods need p > 3, got {p}")));
    }
    let mut samples = Vec::with_capacity(primes.len() * 2);
    for &p in primes {
        let mut verdicts = [false; 2];
        for (slot, method) in [BenchMethod::Definition, BenchMethod::Test]
            .into_iter()
            .enumerate()
        {
            let verdict = method.decide(table, p)?;
            let mut times = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let start = Instant::now();
                let again = method.decide(table, p)?;
                times.push(start.elapsed());
                if again != verdict {
                    return Err(Error::Invariant(format!(
                        "{} verdict at {p} is not stable",
                        method.name()
                    )));
                }
            }
            times.sort();
            verdicts[slot] = verdict;
            samples.push(BenchSample {
                p,
                method,
                elapsed: times[times.len() / 2],
                verdict,
            });
        }
        if verdicts[0] != verdicts[1] {
            return Err(Error::VerdictMismatch {
                p: p.get(),
                definition: verdicts[0],
                test: verdicts[1],
            });
        }
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverRow {
    pub p: u64,
    pub definition_seconds: f64,
    pub test_seconds: f64,
    pub faster: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport {
    pub rows: Vec<CrossoverRow>,
    pub summary: String,
}

impl CrossoverReport {
    pub const CSV_HEADER: &'static str = "p,definition_seconds,test_seconds,faster_method";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{}\n",
                r.p, r.definition_seconds, r.test_seconds, r.faster
            ));
        }
        out
    }
}

/// Tabulate samples by prime and locate the point where the faster method
/// flips, if it flips exactly once. Ties do not count as a flip.
pub fn crossover_report(samples: &[BenchSample]) -> Result<CrossoverReport> {
    let mut by_p: BTreeMap<u64, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for s in samples {
        let slot = by_p.entry(s.p.get()).or_default();
        let secs = Some(s.elapsed.as_secs_f64());
        match s.method {
            BenchMethod::Definition => slot.0 = secs,
            BenchMethod::Test => slot.1 = secs,
        }
    }
    let rows: Vec<CrossoverRow> = by_p
        .into_iter()
        .filter_map(|(p, times)| match times {
            (Some(d), Some(t)) => Some(CrossoverRow {
                p,
                definition_seconds: d,
                test_seconds: t,
                faster: if d < t {
                    "definition"
                } else if t < d {
                    "test"
                } else {
                    "tie"
                },
            }),
            _ => None,
        })
        .collect();
    if rows.len() < 2 {
        return Err(Error::Domain(
            "a crossover report needs at least two primes timed with both methods".into(),
        ));
    }

    let decided: Vec<&CrossoverRow> = rows.iter().filter(|r| r.faster != "tie").collect();
    let flips: Vec<(&CrossoverRow, &CrossoverRow)> = decided
        .windows(2)
        .filter(|w| w[0].faster != w[1].faster)
        .map(|w| (w[0], w[1]))
        .collect();
    let summary = match flips[..] {
        [(before, after)] => format!(
            "crossover between p={} and p={}: {} faster below, {} faster from p={}",
            before.p, after.p, before.faster, after.faster, after.p
        ),
        _ => "no single crossover".to_string(),
    };
    Ok(CrossoverReport { rows, summary })
}
