//! Generators and independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use asmprop::checker::KripkeStructure;
use asmprop::lang::*;
use asmprop::signature::TypedFormula;
use indexmap::IndexMap;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRng, TestRunner};

pub const CLOCK: &str = include_str!("../corpus/Clock.asm");
pub const CLOCK_SCENARIO: &str = include_str!("../corpus/ClockScenario.avalla");
pub const RESET_REQUIREMENT: &str = "When the min function reaches the value 59, it is set to 0 in the next state";
pub const RESET_FORMULA: &str = "AG(min = 59 implies AX(min = 0))";

pub fn fixtures(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(dir: &str, file: &str) -> String {
    std::fs::read_to_string(fixtures(dir).join(file)).unwrap()
}

/// Draws `n` values from a strategy with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, n: usize, seed: u8) -> Vec<S::Value> {
    let rng = TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..n).map(|_| strategy.new_tree(&mut runner).unwrap().current()).collect()
}

// ---------------------------------------------------------------------------
// Syntax generators

/// Names that are neither keywords nor temporal operators in either logic.
const NAMES: &[&str] = &["sec", "min", "h", "signal", "color", "cnt", "flag", "ready"];

fn name() -> impl Strategy<Value = String> {
    proptest::sample::select(NAMES).prop_map(str::to_string)
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge)
    ]
}

fn bool_op() -> impl Strategy<Value = BoolOp> {
    prop_oneof![Just(BoolOp::And), Just(BoolOp::Or), Just(BoolOp::Implies), Just(BoolOp::Iff)]
}

fn arith_op() -> impl Strategy<Value = ArithOp> {
    prop_oneof![Just(ArithOp::Add), Just(ArithOp::Sub), Just(ArithOp::Mod)]
}

/// Arbitrary well-formed terms, not necessarily well-typed.
pub fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0i64..1000).prop_map(Term::Int),
        any::<bool>().prop_map(Term::Bool),
        name().prop_map(Term::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (name(), inner.clone()).prop_map(|(n, a)| Term::app(n, Some(a))),
            (arith_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Term::arith(op, l, r)),
            (cmp_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Term::cmp(op, l, r)),
            inner.clone().prop_map(Term::negate),
            (bool_op(), inner.clone(), inner).prop_map(|(op, l, r)| Term::logic(op, l, r)),
        ]
    })
}

/// Formulas built through the smart constructors, so they are in the
/// canonical shape the parser produces.
pub fn formula(logic: Logic, depth: u32) -> BoxedStrategy<Formula> {
    let atom = term().prop_map(Formula::atom).boxed();
    atom.prop_recursive(depth, 32, 2, move |inner| {
        let temporal = match logic {
            Logic::Ctl => prop_oneof![
                (proptest::sample::select(CtlOp::ALL.to_vec()), inner.clone()).prop_map(|(op, f)| Formula::ctl(op, f)),
                (any::<bool>(), inner.clone(), inner.clone()).prop_map(|(all, l, r)| {
                    let q = if all { PathQuantifier::All } else { PathQuantifier::Exists };
                    Formula::ctl_until(q, l, r)
                }),
            ]
            .boxed(),
            Logic::Ltl => prop_oneof![
                (proptest::sample::select(LtlOp::ALL.to_vec()), inner.clone()).prop_map(|(op, f)| Formula::ltl(op, f)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::ltl_until(l, r)),
            ]
            .boxed(),
        };
        prop_oneof![
            2 => temporal,
            1 => inner.clone().prop_map(Formula::not),
            1 => (bool_op(), inner.clone(), inner).prop_map(|(op, l, r)| Formula::logic(op, l, r)),
        ]
    })
    .boxed()
}

fn clock_value_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0i64..60).prop_map(Term::Int),
        proptest::sample::select(vec!["sec", "min", "h"]).prop_map(Term::var),
    ]
}

/// Syntactically arbitrary rules over a fixed set of Clock-like names.
pub fn rule() -> impl Strategy<Value = Rule> {
    let leaf = prop_oneof![
        (proptest::sample::select(vec!["sec", "min", "h"]), clock_value_term()).prop_map(|(f, v)| Rule::Update {
            function: f.to_string(),
            arg: None,
            value: v
        }),
        (clock_value_term(), term()).prop_map(|(a, v)| Rule::Update { function: "cnt".into(), arg: Some(a), value: v }),
        Just(Rule::Call("r_tick".into())),
        Just(Rule::Par(Vec::new())),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 1..4).prop_map(Rule::Par),
            (term(), inner.clone(), proptest::option::of(inner)).prop_map(|(g, t, e)| Rule::If {
                guard: g,
                then: Box::new(t),
                otherwise: e.map(Box::new)
            }),
        ]
    })
}

/// Specifications sharing a declaration skeleton with random rule bodies,
/// initial values and properties.
pub fn spec() -> impl Strategy<Value = AsmSpecification> {
    (
        rule(),
        rule(),
        (0i64..60, 0i64..60, 0i64..24),
        proptest::collection::vec((any::<bool>(), formula(Logic::Ctl, 2), formula(Logic::Ltl, 2)), 0..3),
    )
        .prop_map(|(main, tick, (s, m, h), props)| {
            let mut spec = parse_asm(CLOCK).unwrap();
            spec.main_rule.body = main;
            spec.macro_rules = vec![RuleDecl { name: "r_tick".into(), body: tick, span: Default::default() }];
            for (init, v) in spec.init.iter_mut().zip([s, m, h]) {
                init.value = Term::Int(v);
            }
            spec.properties = props
                .into_iter()
                .map(|(ctl, c, l)| {
                    let (logic, f) = if ctl { (Logic::Ctl, c) } else { (Logic::Ltl, l) };
                    PropertyDecl::new(logic, f, "", Origin::HandWritten)
                })
                .collect();
            spec
        })
}

pub fn scenario() -> impl Strategy<Value = AvallaScenario> {
    let command = prop_oneof![
        Just(Command::Step),
        term().prop_map(Command::Check),
        (name(), proptest::option::of(clock_value_term()), term()).prop_map(|(f, a, v)| Command::Set {
            function: f,
            arg: a,
            value: v
        }),
    ];
    (proptest::collection::vec(command, 0..12), proptest::option::of(0usize..5)).prop_map(|(commands, loop_start)| {
        AvallaScenario { name: "Random".into(), load: "Clock.asm".into(), commands, loop_start }
    })
}

// ---------------------------------------------------------------------------
// Random Kripke structures and the brute-force CTL evaluator

pub const PROPS: [&str; 3] = ["p", "q", "r"];

#[derive(Debug, Clone)]
pub struct RandomKripke {
    pub labels: Vec<Vec<bool>>,
    pub initial: Vec<u32>,
    pub succ: Vec<Vec<u32>>,
}

impl RandomKripke {
    pub fn build(&self) -> KripkeStructure {
        KripkeStructure::from_parts(&PROPS, self.labels.clone(), self.initial.clone(), self.succ.clone()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }
}

pub fn kripke(max_states: usize) -> impl Strategy<Value = RandomKripke> {
    (1..=max_states).prop_flat_map(|n| {
        let labels = proptest::collection::vec(proptest::collection::vec(any::<bool>(), PROPS.len()), n);
        let succ = proptest::collection::vec(proptest::collection::vec(0..n as u32, 1..4), n);
        let initial = proptest::collection::vec(0..n as u32, 1..3);
        (labels, initial, succ).prop_map(|(labels, initial, succ)| RandomKripke { labels, initial, succ })
    })
}

fn prop_atom() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        proptest::sample::select(PROPS.to_vec()).prop_map(Term::var),
        any::<bool>().prop_map(Term::Bool),
    ];
    leaf.prop_recursive(1, 3, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::negate),
            (bool_op(), inner.clone(), inner).prop_map(|(op, l, r)| Term::logic(op, l, r)),
        ]
    })
}

/// Formulas over the propositions of [`kripke`] with at most `depth`
/// temporal or Boolean operators above the atoms.
pub fn over_props(logic: Logic, depth: u32) -> BoxedStrategy<Formula> {
    prop_atom()
        .prop_map(Formula::atom)
        .prop_recursive(depth, 16, 2, move |inner| {
            let temporal = match logic {
                Logic::Ctl => prop_oneof![
                    3 => (proptest::sample::select(CtlOp::ALL.to_vec()), inner.clone()).prop_map(|(op, f)| Formula::ctl(op, f)),
                    1 => (any::<bool>(), inner.clone(), inner.clone()).prop_map(|(all, l, r)| {
                        Formula::ctl_until(if all { PathQuantifier::All } else { PathQuantifier::Exists }, l, r)
                    }),
                ]
                .boxed(),
                Logic::Ltl => prop_oneof![
                    3 => (proptest::sample::select(LtlOp::ALL.to_vec()), inner.clone()).prop_map(|(op, f)| Formula::ltl(op, f)),
                    1 => (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::ltl_until(l, r)),
                ]
                .boxed(),
            };
            prop_oneof![
                4 => temporal,
                1 => inner.clone().prop_map(Formula::not),
                1 => (bool_op(), inner.clone(), inner).prop_map(|(op, l, r)| Formula::logic(op, l, r)),
            ]
        })
        .boxed()
}

pub fn untyped(formula: Formula, logic: Logic) -> TypedFormula {
    TypedFormula { formula, logic, functions: IndexMap::new() }
}

fn eval_prop(t: &Term, labels: &[bool]) -> bool {
    match t {
        Term::Bool(b) => *b,
        Term::App { name, arg: None } => labels[PROPS.iter().position(|p| p == name).unwrap()],
        Term::Not(x) => !eval_prop(x, labels),
        Term::Logic { op, lhs, rhs } => {
            let (l, r) = (eval_prop(lhs, labels), eval_prop(rhs, labels));
            match op {
                BoolOp::And => l && r,
                BoolOp::Or => l || r,
                BoolOp::Implies => !l || r,
                BoolOp::Iff => l == r,
            }
        }
        other => panic!("unexpected proposition {other:?}"),
    }
}

/// States reachable from `from` in one or more steps through states that
/// satisfy `inside` (the start state itself is not required to).
fn reach_within(k: &RandomKripke, from: usize, inside: &[bool]) -> HashSet<usize> {
    let mut seen = HashSet::new();
    let mut queue: VecDeque<usize> = k.succ[from].iter().map(|&t| t as usize).filter(|&t| inside[t]).collect();
    while let Some(s) = queue.pop_front() {
        if seen.insert(s) {
            queue.extend(k.succ[s].iter().map(|&t| t as usize).filter(|&t| inside[t]));
        }
    }
    seen
}

/// Is there an infinite path from `s` that stays in `inside`?
fn infinite_within(k: &RandomKripke, s: usize, inside: &[bool]) -> bool {
    if !inside[s] {
        return false;
    }
    let mut region = reach_within(k, s, inside);
    region.insert(s);
    // A finite graph has an infinite path inside the region iff some state of
    // the region lies on a cycle of the region.
    region.iter().any(|&t| reach_within(k, t, inside).contains(&t))
}

/// Is some state satisfying `goal` reachable from `s` through states
/// satisfying `via` (goal may be `s` itself)?
fn reach_goal(k: &RandomKripke, s: usize, via: &[bool], goal: &[bool]) -> bool {
    if goal[s] {
        return true;
    }
    if !via[s] {
        return false;
    }
    let via_not_goal: Vec<bool> = via.iter().zip(goal).map(|(v, g)| *v && !*g).collect();
    let mut frontier = reach_within(k, s, &via_not_goal);
    frontier.insert(s);
    frontier.iter().any(|&t| k.succ[t].iter().any(|&u| goal[u as usize]))
}

/// Path-semantics CTL evaluation at every state, written directly from the
/// definitions rather than through fixpoints.
pub fn brute_force(k: &RandomKripke, f: &Formula) -> Vec<bool> {
    let n = k.len();
    match f {
        Formula::Atom(t) => k.labels.iter().map(|l| eval_prop(t, l)).collect(),
        Formula::Not(g) => brute_force(k, g).into_iter().map(|b| !b).collect(),
        Formula::Logic { op, lhs, rhs } => {
            let (l, r) = (brute_force(k, lhs), brute_force(k, rhs));
            l.iter()
                .zip(&r)
                .map(|(&a, &b)| match op {
                    BoolOp::And => a && b,
                    BoolOp::Or => a || b,
                    BoolOp::Implies => !a || b,
                    BoolOp::Iff => a == b,
                })
                .collect()
        }
        Formula::Ctl(op, g) => {
            let g = brute_force(k, g);
            let all = vec![true; n];
            (0..n)
                .map(|s| match op {
                    CtlOp::EX => k.succ[s].iter().any(|&t| g[t as usize]),
                    CtlOp::AX => k.succ[s].iter().all(|&t| g[t as usize]),
                    CtlOp::EF => reach_goal(k, s, &all, &g),
                    CtlOp::AG => g[s] && reach_within(k, s, &all).iter().all(|&t| g[t]),
                    CtlOp::EG => infinite_within(k, s, &g),
                    CtlOp::AF => {
                        let not_g: Vec<bool> = g.iter().map(|b| !b).collect();
                        !infinite_within(k, s, &not_g)
                    }
                })
                .collect()
        }
        Formula::CtlUntil { quant, lhs, rhs } => {
            let (p, q) = (brute_force(k, lhs), brute_force(k, rhs));
            (0..n)
                .map(|s| match quant {
                    PathQuantifier::Exists => reach_goal(k, s, &p, &q),
                    PathQuantifier::All => {
                        // A path violates p U q when it never meets q, or meets
                        // a state with neither p nor q before the first q.
                        let not_q: Vec<bool> = q.iter().map(|b| !b).collect();
                        let bad: Vec<bool> = p.iter().zip(&q).map(|(a, b)| !a && !b).collect();
                        !(infinite_within(k, s, &not_q) || reach_goal(k, s, &not_q, &bad))
                    }
                })
                .collect()
        }
        Formula::Ltl(..) | Formula::LtlUntil { .. } => panic!("not a CTL formula"),
    }
}

// ---------------------------------------------------------------------------
// Clock arithmetic oracle

pub type ClockTuple = (i64, i64, i64, bool);

/// One controlled step of the clock written as plain arithmetic.
pub fn clock_next((sec, min, h, signal): ClockTuple) -> (i64, i64, i64) {
    if !signal {
        return (sec, min, h);
    }
    let carry_min = sec == 59;
    let carry_h = carry_min && min == 59;
    ((sec + 1) % 60, if carry_min { (min + 1) % 60 } else { min }, if carry_h { (h + 1) % 24 } else { h })
}

/// BFS over clock tuples; returns the distance of every reachable tuple.
pub fn clock_reachable() -> HashMap<ClockTuple, usize> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for signal in [false, true] {
        dist.insert((0, 0, 0, signal), 0);
        queue.push_back((0, 0, 0, signal));
    }
    while let Some(t) = queue.pop_front() {
        let d = dist[&t];
        let (s, m, h) = clock_next(t);
        for signal in [false, true] {
            let n = (s, m, h, signal);
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(n) {
                e.insert(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}
