use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_generated_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let libdir = target_dir();
    if !libdir.join("libasmprop_ffi.so").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler or shared library");
        return;
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("asmprop_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&libdir)
        .arg(format!("-Wl,-rpath,{}", libdir.display()))
        .arg("-lasmprop_ffi")
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).arg(manifest.join("../core/tests/corpus/Clock.asm")).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
