use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_superakns"));
    c.env_remove("SUPERAKNS_CACHE_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("superakns-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn verify_lie_default_passes_with_two_reports() {
    let o = run(&["verify-lie", "--out", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["report"]["algebras"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_lie_single_algebra_and_audit() {
    let o = run(&["verify-lie", "--algebra", "sl21", "--out", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(
        v["report"]["algebras"][0]["relations"]
            .as_array()
            .unwrap()
            .len(),
        13
    );
    assert_eq!(v["report"]["errata"][0]["id"], "sl21-count");

    let o = run(&["verify-lie", "--algebra", "sl41", "--audit"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("grading audit"));
    assert_eq!(text.matches(" Odd ok").count(), 2);
}

#[test]
fn derive_reports_the_f1_erratum() {
    let o = run(&["derive", "--levels", "3", "--out", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let items = v["report"]["comparisons"][0]["items"].as_array().unwrap();
    let f1 = items.iter().find(|i| i["id"] == "f1").unwrap();
    assert_eq!(f1["class"], "erratum-match");
    assert_eq!(f1["erratum"], "level-f1-g1");
}

#[test]
fn derive_json_is_byte_identical() {
    let a = run(&["derive", "--levels", "3", "--out", "json", "--seed", "4"]);
    let b = run(&["derive", "--levels", "3", "--out", "json", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn numcheck_json_is_byte_identical() {
    let args = [
        "numcheck",
        "--samples",
        "2",
        "--skew-trials",
        "4",
        "--out",
        "json",
        "--seed",
        "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn derive_at_zero_mu_writes_files() {
    let dir = scratch("files");
    let o = run(&[
        "derive",
        "--levels",
        "2",
        "--mu",
        "0",
        "--out",
        "json",
        "--dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    for f in ["level-1.json", "level-2.json", "diff.json", "derive.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let v = json(&o);
    assert_eq!(v["report"]["mu_free"], true);
    let level: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("level-2.json")).unwrap()).unwrap();
    assert_eq!(level["m"], 2);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn derive_latex_uses_level_symbols() {
    let o = run(&["derive", "--levels", "2", "--out", "latex"]);
    assert_eq!(code(&o), 0);
    let tex = String::from_utf8(o.stdout).unwrap();
    assert!(tex.contains("\\begin{align*}"));
    assert!(tex.contains("\\rho_{1}"));
    assert!(tex.contains("\\begin{tabular}"));
}

#[test]
fn unledgered_discrepancy_exits_one() {
    let dir = scratch("ledger");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("empty.json");
    std::fs::write(&path, r#"{"schema":1,"errata":[]}"#).unwrap();
    let o = run(&[
        "derive",
        "--levels",
        "1",
        "--ledger",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["derive", "--levels", "0"])), 2);
    assert_eq!(code(&run(&["derive", "--mu", "banana"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(
        code(&run(&["verify", "--what", "zero-curvature", "--n", "0"])),
        2
    );
    assert_eq!(code(&run(&["numcheck", "--grid", "30"])), 2);
    assert_eq!(
        code(&run(&["verify", "--what", "hamiltonian", "--out", "latex"])),
        2
    );
    assert_eq!(
        code(&run(&["derive", "--ledger", "/nonexistent/ledger.json"])),
        2
    );
}

#[test]
fn verify_targets_pass() {
    for (what, n) in [
        ("zero-curvature", "2"),
        ("hamiltonian", "2"),
        ("bi-hamiltonian", "2"),
    ] {
        let o = run(&["verify", "--what", what, "--n", n, "--out", "json"]);
        assert_eq!(code(&o), 0, "{what}");
        assert_eq!(json(&o)["pass"], true);
    }
}

#[test]
fn bi_hamiltonian_lists_candidate_errata() {
    let o = run(&[
        "verify",
        "--what",
        "bi-hamiltonian",
        "--n",
        "2",
        "--out",
        "json",
    ]);
    let v = json(&o);
    assert!(!v["report"]["result"]["p_diffs"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn trace_identity_reports_gamma_zero() {
    let o = run(&[
        "verify",
        "--what",
        "trace-identity",
        "--n",
        "0",
        "--out",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["report"]["result"]["gamma"], "0");
    assert_eq!(v["report"]["result"]["side"], "left");
    assert_eq!(v["report"]["result"]["lines_ledgered"], true);
}

#[test]
fn numcheck_flags_few_generators() {
    let o = run(&[
        "numcheck",
        "--grassmann-gens",
        "4",
        "--samples",
        "2",
        "--skew-trials",
        "4",
        "--out",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["report"]["flags"].as_array().unwrap().len(), 1);
    assert_eq!(v["config"]["numcheck"]["sample"]["gens"], 4);
}

#[test]
fn numcheck_single_mode() {
    let o = run(&[
        "numcheck",
        "--modes",
        "1",
        "--samples",
        "2",
        "--skew-trials",
        "4",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn cache_directory_from_environment() {
    let dir = scratch("env");
    let first = bin()
        .env("SUPERAKNS_CACHE_DIR", &dir)
        .args(["derive", "--levels", "2", "--out", "json"])
        .output()
        .unwrap();
    assert_eq!(code(&first), 0);
    let file = dir.join("levels-mu-symbolic-n2.json");
    assert!(file.exists());

    let second = bin()
        .env("SUPERAKNS_CACHE_DIR", &dir)
        .args(["derive", "--levels", "2", "--out", "json"])
        .output()
        .unwrap();
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));

    // a level that no longer matches the recursion is caught and replaced
    let text = std::fs::read_to_string(&file).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    for m in 1..=2 {
        v["levels"][m]["f"] = v["levels"][m]["b"].clone();
    }
    std::fs::write(&file, v.to_string()).unwrap();
    let third = bin()
        .env("SUPERAKNS_CACHE_DIR", &dir)
        .args(["derive", "--levels", "2", "--out", "json"])
        .output()
        .unwrap();
    assert_eq!(code(&third), 0);
    assert!(String::from_utf8_lossy(&third.stderr).contains("rebuilt"));
    assert_eq!(first.stdout, third.stdout);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn export_ledger_and_operators() {
    let o = run(&["export", "ledger", "--out", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["report"]["schema"], 1);
    assert!(v["report"]["errata"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["id"] == "trace-side"));

    let o = run(&["export", "operators", "--mu", "0", "--out", "json"]);
    let v = json(&o);
    let ops = v["report"]["operators"].as_array().unwrap();
    assert!(ops
        .iter()
        .all(|op| !op["entries"].to_string().contains("mu")));
}
