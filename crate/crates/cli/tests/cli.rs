use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn epik(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epik"))
        .current_dir(dir)
        .env_remove("EPIK_TEST_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(out: &Output, key: &str) -> String {
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key}= in {}", stdout(out)))
}

fn seeded(seed: &str, rest: &[&str]) -> Vec<String> {
    let mut args = vec!["--test-mode".to_string(), "--seed".to_string(), seed.to_string()];
    args.extend(rest.iter().map(|s| s.to_string()));
    args
}

fn run(dir: &Path, args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    epik(dir, &refs)
}

#[test]
fn key_exchange_round_trip_in_both_formats() {
    for format in ["binary", "hex"] {
        let tmp = TempDir::new().unwrap();
        let dir = tmp.path();
        let keygen = run(dir, &seeded("1", &["--format", format, "keygen", "--preset", "sec128", "--out-pk", "pk", "--out-sk", "sk"]));
        assert!(keygen.status.success(), "{keygen:?}");
        assert_eq!(field(&keygen, "pk_bits"), "16896");
        assert!(!stdout(&keygen).lines().any(|l| l.starts_with("n=")));

        std::fs::write(dir.join("msg"), b"attack at dawn").unwrap();
        let encap = run(dir, &seeded("2", &["--format", format, "encap", "--pk", "pk", "--out-ct", "ct", "--out-key", "k1", "--message", "msg"]));
        assert!(encap.status.success(), "{encap:?}");
        let decap = epik(dir, &["decap", "--sk", "sk", "--ct", "ct", "--out-key", "k2", "--out-message", "back"]);
        assert!(decap.status.success(), "{decap:?}");

        let k1 = std::fs::read(dir.join("k1")).unwrap();
        let k2 = std::fs::read(dir.join("k2")).unwrap();
        match format {
            "binary" => {
                assert_eq!(k1.len(), 32);
                assert_eq!(k1, k2);
            }
            _ => {
                assert_eq!(String::from_utf8(k1).unwrap().trim().len(), 64);
                let raw = std::fs::read(dir.join("k2")).unwrap();
                assert_eq!(raw.len(), 32, "decap writes binary keys by default");
            }
        }
        assert_eq!(std::fs::read(dir.join("back")).unwrap(), b"attack at dawn");
    }
}

#[test]
fn hex_and_binary_keys_agree() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert!(run(dir, &seeded("5", &["keygen", "--out-pk", "pk", "--out-sk", "sk"])).status.success());
    assert!(run(dir, &seeded("6", &["--format", "hex", "encap", "--pk", "pk", "--out-ct", "ct", "--out-key", "k1"])).status.success());
    assert!(epik(dir, &["--format", "hex", "decap", "--sk", "sk", "--ct", "ct", "--out-key", "k2"]).status.success());
    let k1 = std::fs::read_to_string(dir.join("k1")).unwrap();
    let k2 = std::fs::read_to_string(dir.join("k2")).unwrap();
    assert_eq!(k1, k2);
}

#[test]
fn seeds_make_runs_reproducible() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    for name in ["a", "b"] {
        let out = run(dir, &seeded("42", &["keygen", "--preset", "high", "--out-pk", &format!("{name}.pk"), "--out-sk", &format!("{name}.sk")]));
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("test mode"));
    }
    assert_eq!(std::fs::read(dir.join("a.pk")).unwrap(), std::fs::read(dir.join("b.pk")).unwrap());
    assert_eq!(std::fs::read(dir.join("a.sk")).unwrap(), std::fs::read(dir.join("b.sk")).unwrap());
}

#[test]
fn seed_from_environment_only_in_test_mode() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_epik"))
            .current_dir(dir)
            .env("EPIK_TEST_SEED", "9")
            .args(args)
            .output()
            .unwrap()
    };
    assert!(with_env(&["--test-mode", "keygen", "--out-pk", "a", "--out-sk", "as"]).status.success());
    assert!(with_env(&["--test-mode", "keygen", "--out-pk", "b", "--out-sk", "bs"]).status.success());
    assert_eq!(std::fs::read(dir.join("a")).unwrap(), std::fs::read(dir.join("b")).unwrap());
    let plain = with_env(&["keygen", "--out-pk", "c", "--out-sk", "cs"]);
    assert!(plain.status.success());
    assert!(!String::from_utf8_lossy(&plain.stderr).contains("test mode"));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(epik(dir, &["--seed", "3", "keygen", "--out-pk", "a", "--out-sk", "b"]).status.code(), Some(3));
    assert_eq!(epik(dir, &["--test-mode", "keygen", "--out-pk", "a", "--out-sk", "b"]).status.code(), Some(3));
    assert_eq!(epik(dir, &["keygen", "--preset", "huge", "--out-pk", "a", "--out-sk", "b"]).status.code(), Some(3));
    assert_eq!(epik(dir, &["frobnicate"]).status.code(), Some(3));
    assert_eq!(epik(dir, &["--help"]).status.code(), Some(0));
    assert_eq!(epik(dir, &["decap", "--sk", "missing", "--ct", "missing", "--out-key", "k"]).status.code(), Some(2));

    std::fs::write(dir.join("junk"), "not hex at all").unwrap();
    assert_eq!(epik(dir, &["decap", "--sk", "junk", "--ct", "junk", "--out-key", "k"]).status.code(), Some(4));
    std::fs::write(dir.join("short"), b"EPIK\x01").unwrap();
    assert_eq!(epik(dir, &["decap", "--sk", "short", "--ct", "short", "--out-key", "k"]).status.code(), Some(4));

    assert!(run(dir, &seeded("1", &["keygen", "--preset", "iot", "--out-pk", "pk1", "--out-sk", "sk1"])).status.success());
    assert!(run(dir, &seeded("1", &["keygen", "--preset", "sec128", "--out-pk", "pk2", "--out-sk", "sk2"])).status.success());
    assert!(run(dir, &seeded("1", &["encap", "--pk", "pk2", "--out-ct", "ct2", "--out-key", "k"])).status.success());
    let mismatch = epik(dir, &["decap", "--sk", "sk1", "--ct", "ct2", "--out-key", "k"]);
    assert_eq!(mismatch.status.code(), Some(3), "{mismatch:?}");
}

#[test]
fn engel_commands_round_trip() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let encoded = epik(dir, &["engel", "encode", "--coeffs", "3,1,4,1", "--depth", "4"]);
    assert!(encoded.status.success(), "{encoded:?}");
    let digits: usize = field(&encoded, "digits").parse().unwrap();
    assert!((1..=4).contains(&digits));
    let valuations = field(&encoded, "residual_valuations");
    assert_eq!(valuations.split(',').count(), digits + 1);

    let decoded = epik(dir, &["engel", "decode", "--input", &field(&encoded, "expansion"), "--depth", "4"]);
    assert!(decoded.status.success(), "{decoded:?}");
    let again = epik(dir, &["engel", "encode", "--input", &field(&decoded, "series"), "--depth", "4"]);
    assert!(again.status.success(), "{again:?}");
    assert_eq!(field(&again, "digits"), digits.to_string());

    assert_eq!(epik(dir, &["engel", "decode", "--input", "zz"]).status.code(), Some(4));
    assert_eq!(epik(dir, &["engel", "encode", "--coeffs", "1,x"]).status.code(), Some(4));
    assert_eq!(epik(dir, &["engel", "encode", "--coeffs", "1,2,3,4,5"]).status.code(), Some(3));
}

#[test]
fn bench_writes_a_csv_report() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let out = run(dir, &seeded("4", &["bench", "--sizes", "16..400", "--step", "64", "--csv", "t.csv"]));
    assert!(out.status.success(), "{out:?}");
    let report = epik::bench::read_csv(std::fs::File::open(dir.join("t.csv")).unwrap()).unwrap();
    assert_eq!(report.samples.len(), 7);
    assert!(report.samples.iter().all(|s| s.trials == 11));
    assert!(stdout(&out).contains("compute_share="));
    assert_eq!(epik(dir, &["bench", "--nodes", "0"]).status.code(), Some(3));
    assert_eq!(epik(dir, &["bench", "--trials", "3"]).status.code(), Some(3));
    assert_eq!(epik(dir, &["bench", "--sizes", "9"]).status.code(), Some(3));
}
