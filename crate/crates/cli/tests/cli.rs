use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn murmur(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_murmur"))
        .args(args)
        .current_dir(dir)
        .env_remove("MURMUR_CACHE")
        .env_remove("MURMUR_THREADS")
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/curves.csv")
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ap_table_for_37a() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["ap", "--curve", "0,0,1,-1,0", "--pmax", "10"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), "p,ap\n2,-2\n3,-3\n5,-2\n7,-1\n");
}

#[test]
fn ap_skips_bad_primes_and_handles_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["ap", "--curve", "0,0,0,1,0", "--pmax", "3"], dir.path());
    assert_eq!(stdout(&out), "p,ap\n3,0\n");
    let out = murmur(&["ap", "--curve", "0,0,1,-1,0", "--pmax", "1"], dir.path());
    assert_eq!(stdout(&out), "p,ap\n");
}

#[test]
fn ap_by_label_with_cache_and_policy() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("ap.csv");
    let args = ["--cache", cache.to_str().unwrap(), "--bad-prime-policy", "formal", "ap", "--label", "37a1", "--family", &fixture(), "--pmax", "40"];
    let out = murmur(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).ends_with("37,-1\n"));
    let cached = fs::read_to_string(&cache).unwrap();
    assert!(cached.starts_with("label,p,ap\n"));
    assert!(cached.contains("37a1,2,-2"));
    // second run reads the cache and gives the same table
    assert_eq!(stdout(&murmur(&args, dir.path())), stdout(&out));
}

#[test]
fn zeta_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["zeta", "--q", "3", "--a1", "0", "--n", "3"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["a_n"], "-4/1");
    assert_eq!(v["rh"], true);
    assert_eq!(v["betas"][3], "48/13");

    let out = murmur(&["zeta", "--q", "3", "--a1", "0", "--n", "1"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["P"], serde_json::json!(["1/1", "0/1", "3/1"]));
    assert!(v["delta"].is_null());
}

#[test]
fn zeta_rejects_field_of_size_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["zeta", "--q", "1", "--a1", "0", "--n", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn murmurate_rank_two_equals_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let fam = fixture();
    for n in ["1", "2"] {
        let out = murmur(
            &["--out-dir", "out", "murmurate", "--family", &fam, "--rank", "0", "--conductor", "1:100", "--n", n, "--imax", "200"],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let values = |n: u32| -> Vec<String> {
        let text = fs::read_to_string(dir.path().join(format!("out/murmuration_r0_n{n}_1-100.csv"))).unwrap();
        text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().to_string()).collect()
    };
    assert_eq!(values(1).len(), 200);
    assert_eq!(values(1), values(2));
    let svg = fs::read_to_string(dir.path().join("out/murmuration_r0_n1_1-100.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn murmurate_empty_family_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(
        &["murmurate", "--family", &fixture(), "--rank", "9", "--conductor", "1:10", "--n", "1", "--imax", "10"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn murmurate_fit_writes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(
        &["murmurate", "--family", &fixture(), "--rank", "1", "--conductor", "1:100", "--n", "3", "--imax", "100", "--fit"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("murmuration_r1_n3_1-100_fit.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["residual_rms"].as_f64().unwrap() >= 0.0);
    for key in ["A", "alpha", "B", "beta"] {
        assert!(v[key].is_number(), "{key}");
    }
}

#[test]
fn satotate_counts_good_primes() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["satotate", "--curve", "0,0,1,-1,0", "--n", "3", "--pmax", "10", "--bins", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sample_count"], 4);
    assert_eq!(v["N"], 10);
    assert_eq!(v["counts"].as_array().unwrap().len(), 4);
    let stem = dir.path().join("satotate_0_0_1_-1_0_n3_N10");
    for ext in [".json", ".svg", "_samples.csv"] {
        let path = PathBuf::from(format!("{}{ext}", stem.display()));
        assert!(path.exists(), "{}", path.display());
    }
}

#[test]
fn satotate_37a_rank_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["satotate", "--curve", "0,0,1,-1,0", "--n", "3", "--pmax", "100000", "--bins", "20"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["ks"].as_f64().unwrap() < 0.1);
}

#[test]
fn satotate_refuses_cm_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(&["satotate", "--curve", "0,0,0,-1,0", "--n", "2", "--pmax", "100"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = murmur(&["satotate", "--curve", "0,0,0,-1,0", "--n", "2", "--pmax", "100", "--allow-cm"], dir.path());
    assert!(out.status.success());
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("murmur.conf"), "strategy = nonsense\n").unwrap();
    let out = murmur(&["--config", "murmur.conf", "ap", "--curve", "0,0,1,-1,0", "--pmax", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = murmur(&["--config", "murmur.conf", "--strategy", "bsgs", "ap", "--curve", "0,0,1,-1,0", "--pmax", "10"], dir.path());
    assert!(out.status.success());

    fs::write(dir.path().join("broken.conf"), "threads\n").unwrap();
    let out = murmur(&["--config", "broken.conf", "zeta", "--q", "3", "--a1", "0", "--n", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_family_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = murmur(
        &["murmurate", "--family", "nope.csv", "--rank", "0", "--conductor", "1:10", "--n", "1", "--imax", "10"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = murmur(&["--threads", threads, "satotate", "--curve", "0,0,1,-1,0", "--n", "5", "--pmax", "3000"], dir.path());
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}
