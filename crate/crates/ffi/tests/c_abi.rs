//! Compiles the C program in `tests/c` against the generated header and the
//! static library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> PathBuf {
    // test binaries live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libmultifault_ffi.a");
    assert!(
        lib.exists(),
        "static library not found at {}",
        lib.display()
    );
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg("-std=c99")
        .arg("-D_DEFAULT_SOURCE")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler not available");
    assert!(status.success(), "compilation failed");

    let bundle = out.path().join("model.json");
    let mut cfg = multifault::pipeline::RunConfig {
        per_condition: 1,
        ..Default::default()
    };
    cfg.model.kind = multifault::mlc::ModelKind::Brtree;
    multifault::pipeline::run_experiment(&cfg)
        .unwrap()
        .bundle
        .save(&bundle)
        .unwrap();

    let run = Command::new(&exe).arg(&bundle).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "{stdout}{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(
        stdout.trim(),
        format!("multifault {} ok", env!("CARGO_PKG_VERSION"))
    );
}
