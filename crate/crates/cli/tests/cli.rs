use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wllab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wllab"))
        .args(args)
        .env("WLLAB_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Every line parsed; each must re-serialize to the same bytes.
fn records(out: &Output) -> Vec<Value> {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(out)
        .lines()
        .map(|line| {
            let v: Value = serde_json::from_str(line).unwrap();
            assert_eq!(serde_json::to_string(&v).unwrap(), line);
            assert_eq!(v.as_object().unwrap().len(), 2, "{line}");
            v
        })
        .collect()
}

fn jsonl(cache: &Path, args: &[&str]) -> Vec<Value> {
    let mut full = vec!["--format", "jsonl"];
    full.extend_from_slice(args);
    records(&wllab(cache, &full))
}

fn only(records: Vec<Value>, schema: &str) -> Value {
    assert_eq!(records.len(), 1, "{records:?}");
    let rec = records.into_iter().next().unwrap();
    assert_eq!(rec["schema"], schema);
    rec["payload"].clone()
}

#[test]
fn quotients() {
    let cache = tempfile::tempdir().unwrap();
    let q = only(jsonl(cache.path(), &["quotient", "lerch", "5"]), "quotient");
    assert_eq!(q["value"], "13");
    assert_eq!(q["exact"], true);
    let q = only(
        jsonl(cache.path(), &["quotient", "fermat", "5", "--base", "3"]),
        "quotient",
    );
    assert_eq!(
        (q["value"].as_str(), q["base"].as_str()),
        (Some("16"), Some("3"))
    );
    let q = only(
        jsonl(cache.path(), &["quotient", "wilson", "17"]),
        "quotient",
    );
    assert_eq!(q["value"], "1230752346353");
    let q = only(jsonl(cache.path(), &["quotient", "fw", "11"]), "quotient");
    assert_eq!(
        q["value"],
        "1387752405580695978098914368989316131852701063520729400"
    );

    // Far past the digit budget: a residue, flagged as such.
    let q = only(
        jsonl(cache.path(), &["quotient", "fw", "14771"]),
        "quotient",
    );
    assert_eq!(q["exact"], false);
    assert_eq!(q["modulus"], "14771");
    assert_eq!(q["value"], "0");

    let text = wllab(cache.path(), &["quotient", "lerch", "5"]);
    assert!(stdout(&text).trim_end().ends_with("= 13"));
}

#[test]
fn classification() {
    let cache = tempfile::tempdir().unwrap();
    let c = only(
        jsonl(
            cache.path(),
            &[
                "classify",
                "103",
                "--wieferich-base",
                "2",
                "--method",
                "both",
            ],
        ),
        "classification",
    );
    assert_eq!(c["lerch"], true);
    assert_eq!(c["wilson"], false);
    assert_eq!(c["l_mod_p"], "0");
    assert_eq!(c["wieferich"][0]["holds"], false);

    let c = only(jsonl(cache.path(), &["classify", "563"]), "classification");
    assert_eq!(c["wilson"], true);
    assert_eq!(c["ww"], false);
    assert_eq!(c["g_mod_p"], Value::Null);

    let c = only(
        jsonl(
            cache.path(),
            &[
                "classify",
                "1093",
                "--wieferich-base",
                "2",
                "--wieferich-base",
                "-1",
            ],
        ),
        "classification",
    );
    assert_eq!(c["wieferich"][0]["holds"], true);
    assert_eq!(c["wieferich"][1]["base"], "-1");
}

#[test]
fn scans_and_resume() {
    let cache = tempfile::tempdir().unwrap();
    let hits = |recs: Vec<Value>| -> Vec<String> {
        recs.iter()
            .map(|r| {
                assert_eq!(r["schema"], "hit");
                r["payload"]["p"].as_str().unwrap().to_string()
            })
            .collect()
    };
    assert_eq!(
        hits(jsonl(
            cache.path(),
            &["scan", "--kind", "ww", "--from", "2", "--to", "20000"]
        )),
        ["2", "3", "14771"]
    );
    assert_eq!(
        hits(jsonl(
            cache.path(),
            &[
                "scan",
                "--kind",
                "wieferich",
                "--base",
                "2",
                "--from",
                "2",
                "--to",
                "4000",
                "--jobs",
                "3"
            ]
        )),
        ["1093", "3511"]
    );

    let ckpt = cache.path().join("lerch.ckpt");
    let ckpt_arg = ckpt.to_str().unwrap();
    let args = [
        "scan",
        "--kind",
        "lerch-test",
        "--from",
        "5",
        "--to",
        "1000",
        "--chunk",
        "64",
        "--checkpoint",
        ckpt_arg,
    ];
    assert_eq!(hits(jsonl(cache.path(), &args)), ["103", "839"]);
    let text = std::fs::read_to_string(&ckpt).unwrap();
    assert!(text.starts_with("WLLAB-CKPT v1\ntask=lerch_test lo=5 hi=1000 chunk=64 fp="));
    assert!(text.ends_with("done=1000\nhits=103,839\n"));

    let mut resumed = args.to_vec();
    resumed.push("--resume");
    assert_eq!(hits(jsonl(cache.path(), &resumed)), ["103", "839"]);
    // The lerch-test scan filled the Bernoulli cache.
    assert!(cache.path().join("bernoulli.cache").exists());
}

#[test]
fn bernoulli_and_cache() {
    let cache = tempfile::tempdir().unwrap();
    let b = only(jsonl(cache.path(), &["bernoulli", "12"]), "bernoulli");
    assert_eq!(
        (b["numerator"].as_str(), b["denominator"].as_str()),
        (Some("-691"), Some("2730"))
    );
    let saved = std::fs::read_to_string(cache.path().join("bernoulli.cache")).unwrap();
    assert!(saved.starts_with("BERN-CACHE v1 max=12\n"));

    let b = only(
        jsonl(
            cache.path(),
            &["bernoulli", "102", "--mod-prime", "103", "--power", "3"],
        ),
        "bernoulli",
    );
    assert_eq!(b["scaled_by_p"], true);
    assert_eq!(b["modulus"], "1092727");
    // 103 is a Lerch prime: p B_(p-1) = p + (p-1)! mod p^3.
    let expected = (1..103u128).fold(1u128, |f, i| f * i % 1_092_727);
    assert_eq!(b["residue"], ((expected + 103) % 1_092_727).to_string());

    let b = only(
        jsonl(
            cache.path(),
            &["bernoulli", "10", "--mod-prime", "7", "--power", "2"],
        ),
        "bernoulli",
    );
    assert_eq!(b["scaled_by_p"], false);

    // A damaged cache is reported and ignored.
    std::fs::write(cache.path().join("bernoulli.cache"), "garbage\n").unwrap();
    let out = wllab(cache.path(), &["bernoulli", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "B_4 = -1/30");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn bench_writes_csv() {
    let cache = tempfile::tempdir().unwrap();
    let csv = cache.path().join("bench.csv");
    let recs = jsonl(
        cache.path(),
        &[
            "bench-lerch",
            "--primes",
            "5,11,101",
            "--reps",
            "2",
            "--csv",
            csv.to_str().unwrap(),
        ],
    );
    assert_eq!(recs.len(), 3);
    assert!(recs.iter().all(|r| r["schema"] == "bench_row"));
    assert_eq!(recs[2]["payload"]["p"], "101");
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,definition_seconds,test_seconds,faster_method");
    assert_eq!(lines.len(), 4);
}

#[test]
fn factorization() {
    let cache = tempfile::tempdir().unwrap();
    let f = only(
        jsonl(cache.path(), &["factor", "170578899504"]),
        "factorization",
    );
    assert_eq!(f["complete"], true);
    let parts: Vec<(String, String)> = f["factors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| {
            (
                x["prime"].as_str().unwrap().into(),
                x["exponent"].as_str().unwrap().into(),
            )
        })
        .collect();
    let expected = [
        ("2", "4"),
        ("3", "2"),
        ("13", "1"),
        ("17", "1"),
        ("19", "1"),
        ("79", "1"),
        ("3571", "1"),
    ];
    assert_eq!(parts, expected.map(|(p, e)| (p.to_string(), e.to_string())));
    let out = wllab(cache.path(), &["factor", "170578899504"]);
    assert_eq!(
        stdout(&out).trim(),
        "170578899504 = 2^4 * 3^2 * 13 * 17 * 19 * 79 * 3571"
    );
}

#[test]
fn exit_codes() {
    let cache = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| wllab(cache.path(), args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&[]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["quotient", "lerch"]), Some(1));
    assert_eq!(code(&["quotient", "lerch", "5", "--bogus"]), Some(1));
    assert_eq!(
        code(&["scan", "--kind", "wieferich", "--from", "2", "--to", "10"]),
        Some(1)
    );
    assert_eq!(
        code(&["scan", "--kind", "ww", "--from", "2", "--to", "10", "--resume"]),
        Some(1)
    );
    assert_eq!(code(&["--format", "xml", "factor", "6"]), Some(1));

    assert_eq!(code(&["quotient", "wilson", "9"]), Some(2));
    assert_eq!(code(&["quotient", "fw", "13"]), Some(2));
    assert_eq!(code(&["quotient", "fermat", "7", "--base", "14"]), Some(2));
    assert_eq!(
        code(&["scan", "--kind", "lerch-test", "--from", "3", "--to", "100"]),
        Some(2)
    );
    assert_eq!(
        code(&["scan", "--kind", "ww", "--from", "50", "--to", "10"]),
        Some(2)
    );
    assert_eq!(code(&["factor", "0"]), Some(2));

    let out = wllab(cache.path(), &["quotient", "wilson", "9"]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn corrupt_checkpoint_is_a_runtime_error() {
    let cache = tempfile::tempdir().unwrap();
    let ckpt = cache.path().join("bad.ckpt");
    std::fs::write(&ckpt, "WLLAB-CKPT v1\nnonsense\n").unwrap();
    let out = wllab(
        cache.path(),
        &[
            "scan",
            "--kind",
            "wilson",
            "--from",
            "2",
            "--to",
            "100",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--resume",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
