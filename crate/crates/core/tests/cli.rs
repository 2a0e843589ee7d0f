use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multifault"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn err(args: &[&str]) -> String {
    let out = run(args);
    assert!(!out.status.success(), "`{}` should fail", args.join(" "));
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn healthy_clean_sample_diagnoses_as_healthy_and_good() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["diagnose", "--condition", "healthy", "--out", s(dir.path())]);
    assert!(
        text.contains("isUnbalance=0 isMisalignment=0 severity=Good"),
        "{text}"
    );
}

#[test]
fn train_then_evaluate_and_diagnose_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    ok(&[
        "dataset",
        "--per-condition",
        "5",
        "--seed",
        "9",
        "--out",
        out,
    ]);
    ok(&[
        "train", "--model", "mlknn", "--k", "3", "--data", out, "--out", out,
    ]);
    let bundle = dir.path().join("model_mlknn.json");
    assert!(bundle.exists());
    let report = ok(&[
        "evaluate",
        "--bundle",
        s(&bundle),
        "--data",
        out,
        "--out",
        out,
    ]);
    assert!(report.contains("KNN"), "{report}");
    assert!(report.contains("subset accuracy"), "{report}");
    assert!(report.contains("severity tree accuracy"), "{report}");
    assert!(dir.path().join("report_mlknn.json").exists());

    ok(&[
        "simulate",
        "--condition",
        "combined",
        "--replicate",
        "2",
        "--seed",
        "9",
        "--out",
        out,
    ]);
    let signals = dir.path().join("signals").join("combined");
    let text = ok(&[
        "diagnose",
        "--bundle",
        s(&bundle),
        "--signals",
        s(&signals),
        "--out",
        out,
    ]);
    assert!(text.contains("severity="), "{text}");

    let input = signals.join("motor.vib.csv");
    ok(&["spectrum", "--input", s(&input), "--out", out]);
    let psd =
        std::fs::read_to_string(dir.path().join("spectra").join("motor.vib.psd.csv")).unwrap();
    assert!(psd.starts_with("freq_hz,power\n"));
    assert_eq!(psd.lines().count(), 10_001 + 1);
}

#[test]
fn errors_are_reported_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let missing = dir.path().join("nope.json");
    assert!(err(&["dataset", "--config", s(&missing)]).contains("nope.json"));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"train_fraction": 2.0}"#).unwrap();
    assert!(err(&["evaluate", "--config", s(&cfg), "--out", out]).contains("train_fraction"));

    assert!(!err(&["train", "--model", "svm", "--out", out]).is_empty());
    assert!(err(&["diagnose", "--condition", "broken", "--out", out]).contains("broken"));
    assert!(err(&["diagnose", "--signals", out, "--out", out]).contains(".csv"));
}
