mod common;

use asmprop::bridge::enrich_spec;
use asmprop::checker::{build_kripke, check_ctl, check_ltl_bounded, label_ctl, Limits, Outcome};
use asmprop::lang::*;
use asmprop::signature::{extract_signature, typecheck_formula};
use asmprop::smv::emit_smv;
use common::*;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn term_roundtrip(t in term()) {
        let text = print_term(&t);
        prop_assert_eq!(parse_term(&text).unwrap(), t, "{}", text);
    }

    #[test]
    fn ctl_formula_roundtrip(f in formula(Logic::Ctl, 4)) {
        for style in [FormulaStyle::Uppercase, FormulaStyle::CallStyle] {
            let text = print_formula(&f, style);
            prop_assert_eq!(&parse_property(&text, Logic::Ctl, true).unwrap(), &f, "{}", text);
        }
        let call = print_formula(&f, FormulaStyle::CallStyle);
        prop_assert_eq!(&parse_property(&call, Logic::Ctl, false).unwrap(), &f);
    }

    #[test]
    fn ltl_formula_roundtrip(f in formula(Logic::Ltl, 4)) {
        for style in [FormulaStyle::Uppercase, FormulaStyle::CallStyle] {
            let text = print_formula(&f, style);
            prop_assert_eq!(&parse_property(&text, Logic::Ltl, true).unwrap(), &f, "{}", text);
        }
    }

    #[test]
    fn spec_roundtrip(s in spec()) {
        let text = print_asm(&s);
        let parsed = parse_asm(&text).unwrap();
        prop_assert_eq!(&parsed, &s, "{}", text);
        prop_assert_eq!(print_asm(&parsed), text);
    }

    #[test]
    fn scenario_roundtrip(sc in scenario()) {
        let text = print_avalla(&sc);
        prop_assert_eq!(parse_avalla(&text).unwrap(), sc, "{}", text);
    }

    #[test]
    fn parsing_is_deterministic(f in formula(Logic::Ctl, 3)) {
        let text = print_formula(&f, FormulaStyle::Uppercase);
        prop_assert_eq!(parse_property(&text, Logic::Ctl, true), parse_property(&text, Logic::Ctl, true));
    }

    #[test]
    fn unknown_symbols_are_rejected(f in formula(Logic::Ctl, 2), v in 0i64..60) {
        let sig = extract_signature(&parse_asm(CLOCK).unwrap()).unwrap();
        let bad = Formula::and(f, Formula::atom(Term::eq(Term::var("minute"), Term::Int(v))));
        let err = typecheck_formula(&bad, Logic::Ctl, &sig).unwrap_err();
        prop_assert!(err.iter().any(|d| d.code == "unknown-symbol" && d.message.contains("minute")));
        // Identical inputs give identical diagnostics.
        prop_assert_eq!(typecheck_formula(&bad, Logic::Ctl, &sig).unwrap_err(), err);
    }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn ctl_matches_brute_force(k in kripke(64), fs in proptest::collection::vec(over_props(Logic::Ctl, 3), 8)) {
        let ks = k.build();
        for f in fs {
            prop_assert_eq!(label_ctl(&ks, &f).unwrap(), brute_force(&k, &f), "{}", print_formula(&f, FormulaStyle::Uppercase));
        }
    }

    #[test]
    fn ctl_dualities(k in kripke(64), p in over_props(Logic::Ctl, 2)) {
        let ks = k.build();
        let pairs = [
            (CtlOp::AG, CtlOp::EF),
            (CtlOp::AF, CtlOp::EG),
            (CtlOp::AX, CtlOp::EX),
        ];
        for (a, e) in pairs {
            let universal = Formula::ctl(a, p.clone());
            let dual = Formula::not(Formula::ctl(e, Formula::not(p.clone())));
            prop_assert_eq!(label_ctl(&ks, &universal).unwrap(), label_ctl(&ks, &dual).unwrap());
            let v1 = check_ctl(&ks, &untyped(universal, Logic::Ctl)).unwrap();
            let v2 = check_ctl(&ks, &untyped(dual, Logic::Ctl)).unwrap();
            prop_assert_eq!(v1.outcome, v2.outcome);
        }
    }

    #[test]
    fn ctl_evidence_is_a_path(k in kripke(32), f in over_props(Logic::Ctl, 2)) {
        let ks = k.build();
        let v = check_ctl(&ks, &untyped(f, Logic::Ctl)).unwrap();
        if let Some(t) = &v.evidence {
            prop_assert!(k.initial.contains(&t.indices[0]));
            for w in t.indices.windows(2) {
                prop_assert!(k.succ[w[0] as usize].contains(&w[1]));
            }
            if let Some(l) = t.loop_start() {
                prop_assert!(k.succ[*t.indices.last().unwrap() as usize].contains(&t.indices[l]));
            }
        }
    }

    #[test]
    fn checking_is_deterministic(k in kripke(32), f in over_props(Logic::Ctl, 3)) {
        let (a, b) = (k.build(), k.build());
        let tf = untyped(f, Logic::Ctl);
        let (v1, v2) = (check_ctl(&a, &tf).unwrap(), check_ctl(&b, &tf).unwrap());
        prop_assert_eq!(v1.outcome, v2.outcome);
        prop_assert_eq!(v1.evidence, v2.evidence);
        prop_assert_eq!(v1.stats.states, v2.stats.states);
    }

    #[test]
    fn ltl_bound_is_monotone(k in kripke(12), f in over_props(Logic::Ltl, 2)) {
        let ks = k.build();
        let tf = untyped(f, Logic::Ltl);
        let mut failed = false;
        for bound in 1..=8 {
            let v = check_ltl_bounded(&ks, &tf, bound).unwrap();
            if failed {
                prop_assert_eq!(v.outcome, Outcome::Fails, "bound {}", bound);
            }
            failed = v.outcome == Outcome::Fails;
        }
    }

    #[test]
    fn enrichment_is_idempotent(ps in proptest::collection::vec(clock_property(), 1..4)) {
        let spec = parse_asm(CLOCK).unwrap();
        let once = enrich_spec(&spec, &ps).unwrap();
        prop_assert_eq!(&enrich_spec(&once, &ps).unwrap(), &once);
        let reparsed = parse_asm(&print_asm(&once)).unwrap();
        prop_assert_eq!(&reparsed, &once);
        let sig = extract_signature(&reparsed).unwrap();
        for p in &reparsed.properties {
            prop_assert!(typecheck_formula(&p.formula, p.logic, &sig).is_ok());
        }
    }
}

fn clock_property() -> impl Strategy<Value = PropertyDecl> {
    let atom = (proptest::sample::select(vec!["sec", "min", "h"]), 0i64..24, any::<bool>()).prop_map(|(f, v, eq)| {
        let op = if eq { CmpOp::Eq } else { CmpOp::Le };
        Formula::atom(Term::cmp(op, Term::var(f), Term::Int(v)))
    });
    let signal = Just(Formula::atom(Term::var("signal")));
    (proptest::sample::select(CtlOp::ALL.to_vec()), prop_oneof![atom, signal], any::<bool>()).prop_map(|(op, a, ctl)| {
        if ctl {
            PropertyDecl::new(Logic::Ctl, Formula::ctl(op, a), "", Origin::HandWritten)
        } else {
            PropertyDecl::new(Logic::Ltl, Formula::ltl(LtlOp::G, a), "", Origin::HandWritten)
        }
    })
}

#[test]
fn emission_is_stable() {
    let spec = parse_asm(CLOCK).unwrap();
    assert_eq!(emit_smv(&spec).unwrap().text, emit_smv(&spec).unwrap().text);
}

#[test]
fn state_count_is_stable() {
    let spec = parse_asm(CLOCK).unwrap();
    let limits = Limits::default();
    let a = build_kripke(&spec, &limits).unwrap();
    let b = build_kripke(&spec, &limits).unwrap();
    assert_eq!(a.state_count(), b.state_count());
    assert_eq!(a.initial(), b.initial());
}
