use std::path::PathBuf;

use proptest::prelude::*;

use super::*;
use crate::lang::{parse_asm, parse_avalla};

const CLOCK: &str = include_str!("../../tests/corpus/Clock.asm");
const SCENARIO: &str = include_str!("../../tests/corpus/ClockScenario.avalla");
const REQUIREMENT: &str = "When the min function reaches the value 59, it is set to 0 in the next state";

fn fixtures(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn clock() -> AsmSpecification {
    parse_asm(CLOCK).unwrap()
}

fn scripted(responses: &[&str], max_iterations: u32) -> Agent {
    let config = AgentConfig { max_iterations, ..AgentConfig::default() };
    Agent::with_backend(config, Box::new(ReplayBackend::new(responses.iter().copied())))
}

fn o2() -> Formula {
    parse_property("AG(min = 59 implies AX(min = 0))", Logic::Ctl, true).unwrap()
}

#[test]
fn replay_backend_contract() {
    let mut b = ReplayBackend::new(["AG(x)"]);
    assert_eq!(b.complete("p").unwrap(), "AG(x)");
    let e = b.complete("p").unwrap_err();
    assert_eq!(e.code(), "fixture-exhausted");
    assert!(e.is_backend());
}

#[test]
fn exact_mode_matches_digests() {
    let dir = tempfile::tempdir().unwrap();
    ReplayBackend::save(
        dir.path(),
        ReplayMode::Exact,
        &[(Some(prompt_digest("b")), "B".into()), (Some(prompt_digest("a")), "A".into())],
    )
    .unwrap();
    let mut b = ReplayBackend::load(dir.path()).unwrap();
    assert_eq!(b.complete("a").unwrap(), "A");
    assert_eq!(b.complete("c").unwrap_err().code(), "fixture-missing");
    assert_eq!(b.complete("b").unwrap(), "B");
    assert_eq!(b.remaining(), 0);
}

#[test]
fn live_backend_reports_unreachable_endpoint() {
    let config = AgentConfig {
        endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
        timeout: std::time::Duration::from_secs(5),
        ..AgentConfig::default()
    };
    let e = complete("hello", &config).unwrap_err();
    assert!(matches!(e.code(), "network-error" | "timeout"), "{e}");
    assert!(e.to_string().contains("127.0.0.1:9"));
}

#[test]
fn live_backend_speaks_chat_completions() {
    use std::io::{Read, Write};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let server = std::thread::spawn(move || {
        let (mut sock, _) = listener.accept().unwrap();
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        loop {
            let n = sock.read(&mut chunk).unwrap();
            buf.extend_from_slice(&chunk[..n]);
            let text = String::from_utf8_lossy(&buf);
            if let Some(h) = text.find("\r\n\r\n") {
                let len: usize = text[..h]
                    .lines()
                    .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse().unwrap()))
                    .unwrap_or(0);
                if buf.len() >= h + 4 + len {
                    break;
                }
            }
        }
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"AG(true)"}}]}"#;
        let resp = format!("HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}", body.len());
        sock.write_all(resp.as_bytes()).unwrap();
        String::from_utf8(buf).unwrap()
    });
    let config = AgentConfig {
        endpoint: format!("http://127.0.0.1:{port}/v1/chat/completions"),
        api_key: Some("k-123".into()),
        model: "m-1".into(),
        ..AgentConfig::default()
    };
    assert_eq!(complete("the prompt", &config).unwrap(), "AG(true)");
    let request = server.join().unwrap();
    assert!(request.to_ascii_lowercase().contains("authorization: bearer k-123"));
    let body: serde_json::Value = serde_json::from_str(&request[request.find("\r\n\r\n").unwrap() + 4..]).unwrap();
    assert_eq!(body["model"], "m-1");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["messages"][1]["content"], "the prompt");
}

#[test]
fn config_validation_and_layering() {
    assert!(AgentConfig { max_iterations: 0, ..AgentConfig::default() }.validate().is_err());
    assert!(AgentConfig { temperature: -1.0, ..AgentConfig::default() }.validate().is_err());
    let file: ConfigFile = toml::from_str("model = \"from-file\"\nendpoint = \"http://file\"\nmax_iterations = 5").unwrap();
    let c = AgentConfig::layered(Some(&file), |k| (k == ENV_MODEL).then(|| "from-env".to_string()));
    assert_eq!(c.model, "from-env");
    assert_eq!(c.endpoint, "http://file");
    assert_eq!(c.max_iterations, 5);
    assert!(toml::from_str::<ConfigFile>("bogus = 1").is_err());
}

#[test]
fn templates_render_without_placeholders() {
    let t = Templates::builtin();
    let all: Vec<(&str, &str)> = PLACEHOLDERS.iter().map(|p| (*p, "{count}")).collect();
    for task in Task::ALL {
        let out = t.get(task).render(&all).unwrap();
        // Bound values are not rescanned, so `{count}` survives only where
        // it was inserted as a value.
        assert!(!out.contains("{spec_text}") && !out.contains("{logic}"), "{}", task.name());
    }
    assert!(PromptTemplate::new(Task::Elicit, "x {nope}").is_err());
    let p = PromptTemplate::new(Task::Elicit, "a {count} b {count}").unwrap();
    assert_eq!(p.render(&[("count", "3")]).unwrap(), "a 3 b 3");
    assert!(p.render(&[]).is_err());
    assert_eq!(p.placeholders(), ["count", "count"]);
}

#[test]
fn template_directory_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("elicit.txt"), "List {count}.").unwrap();
    let t = Templates::from_dir(dir.path()).unwrap();
    assert_eq!(t.get(Task::Elicit).body, "List {count}.");
    assert_eq!(t.get(Task::Repair), Templates::builtin().get(Task::Repair));
}

#[test]
fn ears_classification() {
    let r = classify_ears(REQUIREMENT);
    assert_eq!(r.pattern, EarsPattern::EventDriven);
    assert_eq!(r.trigger.as_deref(), Some("the min function reaches the value 59"));
    assert_eq!(r.response.as_deref(), Some("it is set to 0 in the next state"));
    assert_eq!(classify_ears("The system shall keep sec within 0..59").pattern, EarsPattern::Ubiquitous);
    let s = classify_ears("While signal is false, the time shall not change");
    assert_eq!(s.pattern, EarsPattern::StateDriven);
    assert_eq!(s.precondition.as_deref(), Some("signal is false"));
    assert_eq!(s.system_name.as_deref(), Some("time"));
    assert_eq!(classify_ears("Where a display is present, the clock shall show h").pattern, EarsPattern::OptionalFeature);
    assert_eq!(classify_ears("If sec exceeds 59 then the clock shall reset sec").pattern, EarsPattern::UnwantedBehavior);
    assert_eq!(classify_ears("While signal is true, when sec is 59, min shall advance").pattern, EarsPattern::Complex);
    let odd = classify_ears("min is fine");
    assert_eq!(odd.pattern, EarsPattern::Ubiquitous);
    assert!(odd.warning.is_some());
}

#[test]
fn formula_extraction() {
    assert_eq!(extract_formula("Sure:\n```\nAG(x = 1)\n```\nok", Logic::Ctl).unwrap(), "AG(x = 1)");
    assert_eq!(extract_formula("```ctl\nCTLSPEC ag(x = 1);\n```", Logic::Ctl).unwrap(), "ag(x = 1)");
    assert_eq!(extract_formula("The property is:\n**AG (min = 59 implies AX (min = 0))**", Logic::Ctl).unwrap(), "AG (min = 59 implies AX (min = 0))");
    assert_eq!(extract_formula("no formula here at all", Logic::Ctl), None);
}

#[test]
fn list_parsing() {
    let text = "Here they are:\n1. First one;\n   with more detail.\n2) Second.\n- Third";
    assert_eq!(parse_list(text), ["First one; with more detail", "Second", "Third"]);
}

#[test]
fn elicit_clock_properties() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("elicit"))).unwrap();
    let s = agent.elicit_properties(&clock(), 3);
    assert_eq!(
        s.result.unwrap(),
        [
            "Time variables always stay within valid clock ranges",
            "Correct carry-over from seconds to minutes and hours",
            "Time advances only when the signal is true"
        ]
    );
    let prompt = &s.transcript.entries[0].content;
    assert!(prompt.contains("monitored signal: Boolean") && prompt.contains("asm Clock") && prompt.contains("3 most important"));
    assert!(matches!(s.transcript.final_artifact, Some(Artifact::Properties(_))));
}

#[test]
fn elicit_count_contract() {
    let s = scripted(&[], 3).elicit_properties(&clock(), 0);
    assert_eq!(s.result.unwrap_err().code(), "precondition");
    assert!(s.transcript.entries.is_empty());

    let s = scripted(&["- a\n- b", "- a\n- b"], 3).elicit_properties(&clock(), 3);
    assert_eq!(s.result.unwrap_err().code(), "unparseable-response");
    assert_eq!(s.transcript.calls(), 2);

    let s = scripted(&["- a\n- b", "- a\n- b\n- c"], 3).elicit_properties(&clock(), 3);
    assert_eq!(s.result.unwrap().len(), 3);
}

#[test]
fn formalize_reset_requirement() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("formalize"))).unwrap();
    let s = agent.formalize(&clock(), REQUIREMENT, Logic::Ctl);
    let f = s.result.unwrap();
    assert_eq!(f.formula.formula, o2());
    assert_eq!(f.iteration, 1);
    assert_eq!(f.ears.pattern, EarsPattern::EventDriven);
    assert_eq!(f.enriched.properties.len(), 1);
    let printed = print_asm(&f.enriched);
    let again = parse_asm(&printed).unwrap();
    assert!(typecheck_spec(&again).is_empty());
    assert_eq!(again.properties[0].formula, o2());
    assert!(s.transcript.notes.iter().any(|n| n.contains("event-driven")));
    assert_eq!(s.transcript.entries_by(Role::Checker).count(), 0);
}

#[test]
fn formalize_repairs_unknown_symbol() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("repair"))).unwrap();
    let s = agent.formalize(&clock(), REQUIREMENT, Logic::Ctl);
    let f = s.result.unwrap();
    assert_eq!(f.iteration, 2);
    assert_eq!(f.formula.formula, o2());
    let checker: Vec<_> = s.transcript.entries_by(Role::Checker).collect();
    assert_eq!(checker.len(), 1);
    assert!(checker[0].content.contains("minute"));
    let roles: Vec<Role> = s.transcript.entries.iter().map(|e| e.role).collect();
    assert_eq!(roles, [Role::User, Role::Agent, Role::Checker, Role::User, Role::Agent]);
    // The repair prompt carries the feedback and the rejected candidate.
    let repair = &s.transcript.entries[3].content;
    assert!(repair.contains(&checker[0].content) && repair.contains("AG(minute = 59"));
}

#[test]
fn formalize_budget_exhausted() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("repair-exhausted"))).unwrap();
    let s = agent.formalize(&clock(), REQUIREMENT, Logic::Ctl);
    assert_eq!(s.result.unwrap_err().code(), "repair-budget-exhausted");
    assert_eq!(s.transcript.calls(), 3);
    assert_eq!(s.transcript.entries_by(Role::Checker).count(), 3);
    assert!(s.transcript.final_artifact.is_none());
}

#[test]
fn formalize_without_formula_in_answer() {
    let s = scripted(&["I am not sure.", "```\nAG(min <= 59)\n```"], 3).formalize(&clock(), "min stays below 60", Logic::Ctl);
    assert_eq!(s.result.unwrap().iteration, 2);
    assert!(s.transcript.notes.iter().any(|n| n.starts_with("warning")));
}

#[test]
fn formalize_semantic_repair() {
    let config = AgentConfig { semantic_repair: true, ..AgentConfig::default() };
    let wrong = "AG(min = 59 implies AX(min = 59))";
    let right = "AG(min <= 59)";
    let mut agent = Agent::with_backend(config, Box::new(ReplayBackend::new([wrong, right])));
    let s = agent.formalize(&clock(), "The clock shall keep min within range", Logic::Ctl);
    assert_eq!(s.result.unwrap().iteration, 2);
    let checker: Vec<_> = s.transcript.entries_by(Role::Checker).collect();
    assert_eq!(checker.len(), 1);
    assert!(checker[0].content.contains("does not hold") && checker[0].content.contains("state 0"));
}

#[test]
fn explain_formula_fixture_text() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("explain-formula"))).unwrap();
    let s = agent.explain_formula(&clock(), &o2(), Logic::Ctl);
    assert_eq!(
        s.result.unwrap(),
        "In every reachable state of the system, if the value of min is 59, then in all possible next states the value of min will be 0."
    );
    assert!(s.transcript.entries[0].content.contains("AG(min = 59 implies AX(min = 0))"));
    assert!(s.transcript.notes.is_empty());
}

#[test]
fn explain_formula_contracts() {
    let s = scripted(&["It is about the clock."], 1).explain_formula(&clock(), &o2(), Logic::Ctl);
    assert!(s.result.is_ok());
    assert!(s.transcript.notes[0].contains("min"));

    let bad = parse_property("AG(minute = 1)", Logic::Ctl, true).unwrap();
    let s = scripted(&["unused"], 1).explain_formula(&clock(), &bad, Logic::Ctl);
    assert_eq!(s.result.unwrap_err().code(), "precondition");
    assert_eq!(s.transcript.calls(), 0);
}

#[test]
fn explain_scenario_fixture_text() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("explain-scenario"))).unwrap();
    let s = agent.explain_scenario(&clock(), &parse_avalla(SCENARIO).unwrap());
    assert_eq!(
        s.result.unwrap(),
        "The scenario verifies that the clock advances by one second when the signal is true, and stops advancing when the signal is false, preserving the current time."
    );
    let prompt = &s.transcript.entries[0].content;
    assert!(prompt.contains("set signal := true;") && prompt.contains("passed; 2 steps executed"));
}

#[test]
fn explain_scenario_outcomes() {
    let empty = parse_avalla("scenario E\nload Clock.asm\n").unwrap();
    let s = scripted(&["nothing"], 1).explain_scenario(&clock(), &empty);
    assert!(s.transcript.entries[0].content.contains("no steps executed"));

    let failing = parse_avalla(&SCENARIO.replace("set signal := false;\nstep;\ncheck sec = 1", "set signal := false;\nstep;\ncheck sec = 2")).unwrap();
    let s = scripted(&["it fails"], 1).explain_scenario(&clock(), &failing);
    let prompt = &s.transcript.entries[0].content;
    assert!(prompt.contains("command index 5") && prompt.contains("sec = 2") && prompt.contains("sec=1"), "{prompt}");
}

#[test]
fn transcripts_persist_and_replay() {
    let mut agent = Agent::new(AgentConfig::replay(fixtures("repair"))).unwrap();
    let s = agent.formalize(&clock(), REQUIREMENT, Logic::Ctl);
    let original = s.result.unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = s.transcript.persist(&dir.path().join("transcripts")).unwrap();
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["record"], "session");
    assert_eq!(lines.last().unwrap()["artifact"]["kind"], "formula");
    assert_eq!(lines.iter().filter(|l| l["record"] == "entry").count(), s.transcript.entries.len());

    let fixtures = dir.path().join("fx");
    s.transcript.save_fixtures(&fixtures).unwrap();
    let again = Agent::new(AgentConfig::replay(&fixtures)).unwrap().formalize(&clock(), REQUIREMENT, Logic::Ctl);
    assert_eq!(again.result.unwrap().formula, original.formula);
    assert_eq!(again.transcript.final_artifact, s.transcript.final_artifact);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Whatever the backend says, an accepted formula type-checks and the
    /// number of calls stays within budget.
    #[test]
    fn adversarial_backends_never_yield_invalid_formulas(
        answers in proptest::collection::vec(
            prop_oneof![
                "[a-zA-Z0-9 ()=<>!]{0,30}",
                Just("AG(min = 59 implies AX(min = 0))".to_string()),
                Just("AG(minute = 1)".to_string()),
                Just("```\nEF(h = 23)\n```".to_string()),
                Just("G(sec <= 59)".to_string()),
            ],
            0..5,
        ),
        budget in 1u32..4,
    ) {
        let n = answers.len();
        let config = AgentConfig { max_iterations: budget, ..AgentConfig::default() };
        let mut agent = Agent::with_backend(config, Box::new(ReplayBackend::new(answers)));
        let spec = clock();
        let s = agent.formalize(&spec, REQUIREMENT, Logic::Ctl);
        prop_assert!(s.transcript.calls() <= budget as usize);
        prop_assert!(s.transcript.calls() <= n);
        if let Ok(f) = s.result {
            let sig = extract_signature(&spec).unwrap();
            prop_assert!(typecheck_formula(&f.formula.formula, Logic::Ctl, &sig).is_ok());
        }
        for (i, e) in s.transcript.entries.iter().enumerate() {
            if e.role == Role::Checker {
                prop_assert_eq!(s.transcript.entries[i - 1].role, Role::Agent);
            }
        }
    }
}
