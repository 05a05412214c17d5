use std::path::Path;
use std::process::Command;

fn regpart(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_regpart")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn errors_report_a_category_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "missing.txt");
    let out = regpart(&["summarize", "--input", &missing, "--output", &path(dir.path(), "s.json")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[io]"));

    let bad = path(dir.path(), "bad.txt");
    std::fs::write(&bad, "a b\na b c d\n").unwrap();
    let out = regpart(&["summarize", "--input", &bad, "--output", &path(dir.path(), "s.json")]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[parse]"));

    let out = regpart(&["generate", "er", "--n", "10", "--p", "1.5", "--out", &path(dir.path(), "g.txt")]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[invalid-spec]"));
    assert!(!regpart(&["no-such-command"]).status.success());
}

#[test]
fn generate_summarize_blowup_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| path(dir.path(), n);
    let ok = |args: &[&str]| {
        let out = regpart(args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out
    };
    ok(&["generate", "noisy-clique", "--n", "300", "--clusters", "3", "--eta1", "0.1", "--eta2", "0.1", "--seed", "2", "--out", &p("g.txt")]);
    assert!(Path::new(&p("g.txt.gt")).exists());
    ok(&["summarize", "--input", &p("g.txt"), "--output", &p("s.json"), "--trace-out", &p("t.csv")]);
    let trace = std::fs::read_to_string(p("t.csv")).unwrap();
    assert!(trace.starts_with("iteration,k,ind,irregular_pairs,compression_rate\n"));
    ok(&["blowup", "--summary", &p("s.json"), "--out", &p("b.txt")]);
    ok(&["eval-error", "--original", &p("g.txt"), "--reconstructed", &p("b.txt"), "--ground-truth", &p("g.txt.gt"), "--out", &p("e.json")]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("e.json")).unwrap()).unwrap();
    assert!(report["error_ground_truth"].as_f64().unwrap() >= 0.0);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("e.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "eval-error");

    // identical graphs score zero
    ok(&["eval-error", "--original", &p("g.txt.gt"), "--reconstructed", &p("g.txt.gt"), "--out", &p("z.csv")]);
    let csv = std::fs::read_to_string(p("z.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "0.0");
    ok(&["replay", &p("s.json.manifest.json")]);
}
