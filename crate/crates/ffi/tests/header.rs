use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(crate_dir().join("include/hmcf.h")).expect("header generated by build script")
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn header_declares_the_api() {
    let h = header();
    assert!(h.starts_with("#ifndef HMCF_H"));
    for sym in [
        "typedef struct HmcfGroup HmcfGroup;",
        "typedef struct HmcfRun HmcfRun;",
        "HMCF_STATUS_OK = 0",
        "HMCF_STATUS_PANIC = 7",
        "hmcf_last_error_message(void)",
        "hmcf_group_new(",
        "hmcf_group_free(",
        "hmcf_mcf_operator(",
        "hmcf_envelopes(",
        "hmcf_barrier_operator(",
        "hmcf_config_from_toml(",
        "hmcf_evolve(",
        "hmcf_run_snapshot(",
    ] {
        assert!(h.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .status()
        .unwrap();
    assert!(status.success());
}

fn static_lib() -> Option<PathBuf> {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libhmcf_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (compiler(), static_lib()) else {
        eprintln!("no C compiler or static library; skipping");
        return;
    };
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let exe = dir.join("hmcf_smoke");
    let status = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
