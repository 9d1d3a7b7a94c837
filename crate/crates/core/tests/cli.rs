use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn corpus(name: &str) -> PathBuf {
    root().join("tests/corpus").join(name)
}

fn fixtures(name: &str) -> PathBuf {
    root().join("tests/fixtures").join(name)
}

fn asmprop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asmprop"))
        .current_dir(dir)
        .arg("--transcripts")
        .arg(dir.join("transcripts"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus("Clock.asm"), dir.path().join("Clock.asm")).unwrap();
    std::fs::copy(corpus("ClockScenario.avalla"), dir.path().join("ClockScenario.avalla")).unwrap();
    dir
}

const REQ: &str = "When the minutes reach 59, the next minute value is 0";

fn enrich(dir: &Path) {
    let fx = fixtures("formalize");
    let o = asmprop(
        dir,
        &["--fixtures", fx.to_str().unwrap(), "formalize", "Clock.asm", "--req", REQ, "--logic", "ctl", "--out", "Enriched.asm"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_scenario_on_corpus_passes() {
    let dir = workdir();
    let o = asmprop(dir.path(), &["run-scenario", "Clock.asm", "ClockScenario.avalla"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("passed"));
}

#[test]
fn formalize_writes_one_ctlspec_line_and_a_transcript() {
    let dir = workdir();
    enrich(dir.path());
    let text = std::fs::read_to_string(dir.path().join("Enriched.asm")).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with("CTLSPEC")).collect();
    assert_eq!(lines, ["\tCTLSPEC ag(min = 59 implies ax(min = 0))"]);
    let transcripts: Vec<_> = std::fs::read_dir(dir.path().join("transcripts")).unwrap().collect();
    assert_eq!(transcripts.len(), 1);
}

#[test]
fn check_reports_the_failing_property() {
    let dir = workdir();
    enrich(dir.path());
    let o = asmprop(dir.path(), &["check", "Enriched.asm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAILS"));
}

#[test]
fn check_without_properties_succeeds() {
    let dir = workdir();
    let o = asmprop(dir.path(), &["check", "Clock.asm"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn state_limit_exits_with_four() {
    let dir = workdir();
    enrich(dir.path());
    let o = asmprop(dir.path(), &["--limit-states", "100", "check", "Enriched.asm"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn exported_counterexample_replays() {
    let dir = workdir();
    enrich(dir.path());
    let o = asmprop(dir.path(), &["export-cex", "Enriched.asm", "--property-index", "1", "--out", "cex.avalla"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = asmprop(dir.path(), &["run-scenario", "Enriched.asm", "cex.avalla"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn export_cex_index_out_of_range_is_a_usage_error() {
    let dir = workdir();
    enrich(dir.path());
    let o = asmprop(dir.path(), &["export-cex", "Enriched.asm", "--property-index", "7", "--out", "cex.avalla"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn emit_smv_writes_a_model() {
    let dir = workdir();
    enrich(dir.path());
    let o = asmprop(dir.path(), &["emit-smv", "Enriched.asm", "--out", "m.smv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("m.smv")).unwrap();
    assert!(text.contains("SPEC AG(min = 59 -> AX(min = 0))"));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let dir = workdir();
    let o = asmprop(dir.path(), &["--no-such-flag", "check", "Clock.asm"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_fixture_directory_is_a_backend_error() {
    let dir = workdir();
    let o = asmprop(dir.path(), &["--fixtures", "absent", "formalize", "Clock.asm", "--req", REQ, "--logic", "ctl"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exhausted_repair_budget_fails() {
    let dir = workdir();
    let fx = fixtures("repair-exhausted");
    let o = asmprop(dir.path(), &["--fixtures", fx.to_str().unwrap(), "formalize", "Clock.asm", "--req", REQ, "--logic", "ctl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn elicit_prints_the_fixture_items() {
    let dir = workdir();
    let fx = fixtures("elicit");
    let o = asmprop(dir.path(), &["--fixtures", fx.to_str().unwrap(), "elicit", "Clock.asm"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| !l.trim().is_empty()).count(), 3);
}

#[test]
fn repl_session_saves_enriched_spec() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = workdir();
    let fx = fixtures("formalize");
    let mut child = Command::new(env!("CARGO_BIN_EXE_asmprop"))
        .current_dir(dir.path())
        .args(["--transcripts", "t", "--fixtures", fx.to_str().unwrap(), "repl", "Clock.asm"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let script = format!("props\nnonsense\nformalize ctl {REQ}\n:save Saved.asm\n:quit\n");
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown command"));
    let text = std::fs::read_to_string(dir.path().join("Saved.asm")).unwrap();
    assert!(text.contains("CTLSPEC ag(min = 59 implies ax(min = 0))"));
}
