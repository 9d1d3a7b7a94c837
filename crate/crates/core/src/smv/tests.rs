use rand::{rngs::StdRng, Rng, SeedableRng};

use super::*;
use crate::lang::{parse_asm, parse_property};

const CLOCK: &str = include_str!("../../tests/corpus/Clock.asm");

const UNARY: &str = "asm U
import StandardLibrary
signature:
 domain Idx subsetof Integer
 enum domain Color = {RED | GREEN}
 monitored pick: Idx
 controlled c: Idx -> Color
 controlled last: Color
 controlled flag: Idx -> Boolean
 derived picked: Color
definitions:
 domain Idx = {0 : 2}
 function picked = c(pick)
 main rule r_Main = par
   if picked = RED then c(pick) := GREEN else c(pick) := RED endif
   last := c(pick)
   flag(1) := not flag(1)
 endpar
default init s0:
 function c($i in Idx) = RED
 function last = GREEN
 function flag($i in Idx) = false
";

fn with_props(mut spec: AsmSpecification, props: &[(&str, Logic)]) -> AsmSpecification {
    for (text, logic) in props {
        let f = parse_property(text, *logic, true).unwrap();
        spec.properties.push(PropertyDecl::new(*logic, f, *text, Origin::HandWritten));
    }
    spec
}

#[test]
fn clock_golden() {
    let spec = with_props(
        parse_asm(CLOCK).unwrap(),
        &[("AG(min = 59 implies AX(min = 0))", Logic::Ctl), ("G(min <= 59)", Logic::Ltl)],
    );
    let m = emit_smv(&spec).unwrap();
    let expected = "MODULE main
VAR
  signal : boolean;
  sec : 0..59;
  min : 0..59;
  h : 0..23;
ASSIGN
  init(sec) := 0;
  init(min) := 0;
  init(h) := 0;
  next(sec) := case
    signal : (sec + 1) mod 60;
    TRUE : sec;
  esac;
  next(min) := case
    signal & sec = 59 : (min + 1) mod 60;
    TRUE : min;
  esac;
  next(h) := case
    signal & sec = 59 & min = 59 : (h + 1) mod 24;
    TRUE : h;
  esac;
SPEC AG(min = 59 -> AX(min = 0))
LTLSPEC G(min <= 59)
";
    assert_eq!(m.text, expected);
    assert_eq!(m.property_lines[0].1, "SPEC AG(min = 59 -> AX(min = 0))");
    assert_eq!(m.var_map["sec"], "sec");
    assert!(emitted_roundtrip_check(&m).is_empty());
}

#[test]
fn roundtrip_catches_missing_declaration() {
    let mut m = emit_smv(&parse_asm(CLOCK).unwrap()).unwrap();
    m.text = m.text.replace("  min : 0..59;\n", "");
    let d = emitted_roundtrip_check(&m);
    assert_eq!(d.codes(), ["undeclared-variable"]);
    assert!(d.to_string().contains("'min'"));
}

#[test]
fn roundtrip_catches_syntax_error() {
    let mut m = emit_smv(&parse_asm(CLOCK).unwrap()).unwrap();
    m.text = m.text.replacen("  esac;\n", "", 1);
    let d = emitted_roundtrip_check(&m);
    assert_eq!(d.codes(), ["smv-syntax"]);
}

#[test]
fn enums_and_unary_functions() {
    let spec = with_props(parse_asm(UNARY).unwrap(), &[("EF(c(1) = GREEN)", Logic::Ctl)]);
    let m = emit_smv(&spec).unwrap();
    assert!(m.text.contains("  pick : 0..2;\n"), "{}", m.text);
    assert!(m.text.contains("  c_a0 : {RED, GREEN};\n"));
    assert!(m.text.contains("  init(c_a2) := RED;\n"));
    assert!(m.text.contains("  next(c_a0) := case\n"));
    assert_eq!(m.var_map["c(1)"], "c_a1");
    assert_eq!(m.property_lines[0].1, "SPEC EF(c_a1 = GREEN)");
    assert!(!m.text.contains("next(pick)"));
    assert!(emitted_roundtrip_check(&m).is_empty());
}

#[test]
fn sanitization() {
    assert_eq!(sanitize_var("sec"), "sec");
    let n = sanitize_var("next");
    assert!(n.starts_with("next_") && n.len() == 9, "{n}");
    assert_eq!(n, sanitize_var("next"));
    assert_ne!(sanitize_var("Temp"), "Temp");
    assert_eq!(sanitize_const("RED"), "RED");
    assert_ne!(sanitize_const("TRUE"), "TRUE");
}

#[test]
fn unsafe_specs_are_rejected() {
    let src = "asm C\nimport StandardLibrary\nsignature:\n domain D subsetof Integer\n controlled x: D\ndefinitions:\n domain D = {0 : 3}\n main rule r_Main = par x := 1 x := 2 endpar\ndefault init s0:\n function x = 0\n";
    let e = emit_smv(&parse_asm(src).unwrap()).unwrap_err();
    assert_eq!(e.codes(), ["inconsistent-update"]);
    let src = src.replace("par x := 1 x := 2 endpar", "x := x + 1");
    let e = emit_smv(&parse_asm(&src).unwrap()).unwrap_err();
    assert_eq!(e.codes(), ["domain-violation"]);
}

fn to_smv(v: &Value) -> SmvValue {
    match v {
        Value::Bool(b) => SmvValue::Bool(*b),
        Value::Int(i) => SmvValue::Int(*i),
        Value::Enum(s) => SmvValue::Sym(sanitize_const(s)),
    }
}

/// Samples random states and compares one SMV step with one machine step.
fn agree(src: &str, samples: usize, seed: u64) {
    let spec = parse_asm(src).unwrap();
    let machine = Machine::new(&spec).unwrap();
    let model = emit_smv(&spec).unwrap();
    let sim = Simulator::new(&model.program);
    let init = sim.init().unwrap();
    let s0 = &machine.initial_states()[0];
    for (loc, v) in machine.controlled_valuation(s0) {
        assert_eq!(init[&model.var_map[&loc.to_string()]], to_smv(&v));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut compared = 0;
    for _ in 0..samples {
        let raw: Vec<i64> =
            machine.slots.iter().map(|s| s.codec.lo + rng.random_range(0..s.codec.size)).collect();
        let state = crate::interp::State(raw.into());
        let Ok(next) = machine.next_controlled(&state) else { continue };
        let env: Env = machine
            .valuation(&state)
            .iter()
            .map(|(loc, v)| (model.var_map[&loc.to_string()].clone(), to_smv(v)))
            .collect();
        let got = sim.next(&env).unwrap();
        for (i, raw) in next.iter().enumerate() {
            let loc = &machine.slots[i].location;
            let expected = to_smv(&machine.slots[i].codec.decode(*raw));
            assert_eq!(got[&model.var_map[&loc.to_string()]], expected, "at {loc} from {}", machine.format_state(&state));
        }
        compared += 1;
    }
    assert!(compared * 2 >= samples);
}

#[test]
fn simulation_agrees_with_interpreter() {
    agree(CLOCK, 2000, 7);
    agree(UNARY, 1000, 11);
}
