//! CTL labeling over the `{EX, EU, EG}` basis and evidence extraction.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use crate::diag::Diagnostic;
use crate::lang::*;
use crate::signature::TypedFormula;

use super::{CheckError, EvidenceRole, KripkeStructure, Outcome, Verdict};

#[derive(Debug, Clone)]
enum Basic {
    True,
    Atom(Term),
    Not(Box<Basic>),
    And(Box<Basic>, Box<Basic>),
    EX(Box<Basic>),
    EU(Box<Basic>, Box<Basic>),
    EG(Box<Basic>),
}

fn not(b: Basic) -> Basic {
    match b {
        Basic::Not(inner) => *inner,
        other => Basic::Not(Box::new(other)),
    }
}

fn and(a: Basic, b: Basic) -> Basic {
    Basic::And(Box::new(a), Box::new(b))
}

fn or(a: Basic, b: Basic) -> Basic {
    not(and(not(a), not(b)))
}

fn eu(a: Basic, b: Basic) -> Basic {
    Basic::EU(Box::new(a), Box::new(b))
}

fn to_basis(f: &Formula) -> Result<Basic, CheckError> {
    Ok(match f {
        Formula::Atom(t) => Basic::Atom(t.clone()),
        Formula::Not(g) => not(to_basis(g)?),
        Formula::Logic { op, lhs, rhs } => {
            let (a, b) = (to_basis(lhs)?, to_basis(rhs)?);
            match op {
                BoolOp::And => and(a, b),
                BoolOp::Or => or(a, b),
                BoolOp::Implies => or(not(a), b),
                BoolOp::Iff => and(or(not(a.clone()), b.clone()), or(not(b), a)),
            }
        }
        Formula::Ctl(op, g) => {
            let g = to_basis(g)?;
            match op {
                CtlOp::EX => Basic::EX(Box::new(g)),
                CtlOp::EF => eu(Basic::True, g),
                CtlOp::EG => Basic::EG(Box::new(g)),
                CtlOp::AX => not(Basic::EX(Box::new(not(g)))),
                CtlOp::AG => not(eu(Basic::True, not(g))),
                CtlOp::AF => not(Basic::EG(Box::new(not(g)))),
            }
        }
        Formula::CtlUntil { quant, lhs, rhs } => {
            let (p, q) = (to_basis(lhs)?, to_basis(rhs)?);
            match quant {
                PathQuantifier::Exists => eu(p, q),
                PathQuantifier::All => {
                    let stuck = eu(not(q.clone()), and(not(p), not(q.clone())));
                    and(not(stuck), not(Basic::EG(Box::new(not(q)))))
                }
            }
        }
        Formula::Ltl(..) | Formula::LtlUntil { .. } => {
            return Err(CheckError::Formula(
                Diagnostic::error("mixed-logic", "LTL operator in a CTL formula").into(),
            ))
        }
    })
}

fn label(ks: &KripkeStructure, b: &Basic) -> Result<Vec<bool>, CheckError> {
    let n = ks.state_count();
    Ok(match b {
        Basic::True => vec![true; n],
        Basic::Atom(t) => ks.atom_labels(t)?.to_vec(),
        Basic::Not(g) => label(ks, g)?.into_iter().map(|v| !v).collect(),
        Basic::And(l, r) => {
            let (l, r) = (label(ks, l)?, label(ks, r)?);
            l.iter().zip(&r).map(|(a, b)| *a && *b).collect()
        }
        Basic::EX(g) => {
            let g = label(ks, g)?;
            (0..n as u32).map(|s| ks.successors(s).iter().any(|&t| g[t as usize])).collect()
        }
        Basic::EU(p, q) => {
            let p = label(ks, p)?;
            let mut out = label(ks, q)?;
            let mut queue: VecDeque<u32> = (0..n as u32).filter(|&s| out[s as usize]).collect();
            while let Some(t) = queue.pop_front() {
                for &s in ks.predecessors(t) {
                    if !out[s as usize] && p[s as usize] {
                        out[s as usize] = true;
                        queue.push_back(s);
                    }
                }
            }
            out
        }
        Basic::EG(g) => {
            // Greatest fixpoint: drop states with no successor left in the set.
            let mut inside = label(ks, g)?;
            let mut count: Vec<u32> = (0..n as u32)
                .map(|s| ks.successors(s).iter().filter(|&&t| inside[t as usize]).count() as u32)
                .collect();
            let mut queue: VecDeque<u32> =
                (0..n as u32).filter(|&s| inside[s as usize] && count[s as usize] == 0).collect();
            while let Some(s) = queue.pop_front() {
                if !inside[s as usize] {
                    continue;
                }
                inside[s as usize] = false;
                for &u in ks.predecessors(s) {
                    if inside[u as usize] {
                        count[u as usize] -= 1;
                        if count[u as usize] == 0 {
                            queue.push_back(u);
                        }
                    }
                }
            }
            inside
        }
    })
}

/// The satisfaction set of a CTL formula over every state.
pub fn label_ctl(ks: &KripkeStructure, f: &Formula) -> Result<Vec<bool>, CheckError> {
    label(ks, &to_basis(f)?)
}

/// A path fragment produced while explaining a verdict.
struct Path {
    states: Vec<u32>,
    loop_start: Option<usize>,
    cond: Option<Term>,
}

impl Path {
    fn at(s: u32, cond: Option<Term>) -> Path {
        Path { states: vec![s], loop_start: None, cond }
    }

    /// `prefix` followed by `tail`, which starts at the last prefix state.
    fn join(mut prefix: Vec<u32>, tail: Path) -> Path {
        prefix.pop();
        let off = prefix.len();
        prefix.extend(tail.states);
        Path { states: prefix, loop_start: tail.loop_start.map(|l| l + off), cond: tail.cond }
    }
}

struct Explainer<'k> {
    ks: &'k KripkeStructure,
    memo: HashMap<String, Vec<bool>>,
}

impl<'k> Explainer<'k> {
    fn sat(&mut self, f: &Formula) -> Result<&[bool], CheckError> {
        let key = format!("{f:?}");
        if !self.memo.contains_key(&key) {
            let l = label_ctl(self.ks, f)?;
            self.memo.insert(key.clone(), l);
        }
        Ok(&self.memo[&key])
    }

    /// Follows successors inside `set` from `s` until a state repeats.
    fn lasso(&self, set: &[bool], s: u32) -> Path {
        let mut pos: HashMap<u32, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut cur = s;
        loop {
            if let Some(&p) = pos.get(&cur) {
                return Path { states, loop_start: Some(p), cond: None };
            }
            pos.insert(cur, states.len());
            states.push(cur);
            cur = *self
                .ks
                .successors(cur)
                .iter()
                .find(|&&t| set[t as usize])
                .expect("every state of an EG set has a successor in the set");
        }
    }

    fn negated_atom(f: &Formula) -> Option<Term> {
        match f {
            Formula::Atom(t) => Some(Term::negate(t.clone())),
            _ => None,
        }
    }

    /// A path from one of `sources` showing that `f` is false there.
    fn refute(&mut self, f: &Formula, sources: &[u32]) -> Result<Option<Path>, CheckError> {
        let s = sources[0];
        Ok(match f {
            Formula::Atom(t) => Some(Path::at(s, Some(Term::negate(t.clone())))),
            Formula::Not(g) => self.prove(g, sources)?,
            Formula::Logic { op, lhs, rhs } => match op {
                BoolOp::And => {
                    if !self.sat(lhs)?[s as usize] {
                        self.refute(lhs, &[s])?
                    } else {
                        self.refute(rhs, &[s])?
                    }
                }
                BoolOp::Or => self.refute(lhs, &[s])?,
                BoolOp::Implies => self.refute(rhs, &[s])?,
                BoolOp::Iff => None,
            },
            Formula::Ctl(CtlOp::AX, g) => {
                let sat = self.sat(g)?.to_vec();
                let Some(&t) = self.ks.successors(s).iter().find(|&&t| !sat[t as usize]) else { return Ok(None) };
                self.refute(g, &[t])?.map(|tail| Path::join(vec![s, t], tail))
            }
            Formula::Ctl(CtlOp::AG, g) => {
                let sat = self.sat(g)?.to_vec();
                let Some(prefix) = self.ks.bfs_path(sources, |_| true, |t| !sat[t as usize]) else { return Ok(None) };
                let last = *prefix.last().expect("non-empty path");
                self.refute(g, &[last])?.map(|tail| Path::join(prefix, tail))
            }
            Formula::Ctl(CtlOp::AF, g) => {
                let eg = self.sat(&Formula::ctl(CtlOp::EG, Formula::not((**g).clone())))?.to_vec();
                let mut p = self.lasso(&eg, s);
                p.cond = Self::negated_atom(g);
                Some(p)
            }
            Formula::CtlUntil { quant: PathQuantifier::All, lhs, rhs } => {
                let eg = self.sat(&Formula::ctl(CtlOp::EG, Formula::not((**rhs).clone())))?.to_vec();
                if eg[s as usize] {
                    let mut p = self.lasso(&eg, s);
                    p.cond = Self::negated_atom(rhs);
                    Some(p)
                } else {
                    let p = self.sat(lhs)?.to_vec();
                    let q = self.sat(rhs)?.to_vec();
                    self.ks
                        .bfs_path(&[s], |t| p[t as usize] && !q[t as usize], |t| !p[t as usize] && !q[t as usize])
                        .map(|states| Path {
                            states,
                            loop_start: None,
                            cond: match (Self::negated_atom(lhs), Self::negated_atom(rhs)) {
                                (Some(a), Some(b)) => Some(Term::and(a, b)),
                                _ => None,
                            },
                        })
                }
            }
            _ => None,
        })
    }

    /// A path from one of `sources` showing that `f` is true there.
    fn prove(&mut self, f: &Formula, sources: &[u32]) -> Result<Option<Path>, CheckError> {
        let s = sources[0];
        Ok(match f {
            Formula::Atom(t) => Some(Path::at(s, Some(t.clone()))),
            Formula::Not(g) => self.refute(g, sources)?,
            Formula::Logic { op, lhs, rhs } => match op {
                BoolOp::And if !lhs.uses_ctl() => self.prove(rhs, &[s])?,
                BoolOp::And if !rhs.uses_ctl() => self.prove(lhs, &[s])?,
                BoolOp::And | BoolOp::Iff => None,
                BoolOp::Or => {
                    if self.sat(lhs)?[s as usize] {
                        self.prove(lhs, &[s])?
                    } else {
                        self.prove(rhs, &[s])?
                    }
                }
                BoolOp::Implies => {
                    if !self.sat(lhs)?[s as usize] {
                        self.refute(lhs, &[s])?
                    } else {
                        self.prove(rhs, &[s])?
                    }
                }
            },
            Formula::Ctl(CtlOp::EX, g) => {
                let sat = self.sat(g)?.to_vec();
                let Some(&t) = self.ks.successors(s).iter().find(|&&t| sat[t as usize]) else { return Ok(None) };
                self.prove(g, &[t])?.map(|tail| Path::join(vec![s, t], tail))
            }
            Formula::Ctl(CtlOp::EF, g) => {
                let sat = self.sat(g)?.to_vec();
                let Some(prefix) = self.ks.bfs_path(sources, |_| true, |t| sat[t as usize]) else { return Ok(None) };
                let last = *prefix.last().expect("non-empty path");
                self.prove(g, &[last])?.map(|tail| Path::join(prefix, tail))
            }
            Formula::Ctl(CtlOp::EG, g) => {
                let eg = self.sat(f)?.to_vec();
                let mut p = self.lasso(&eg, s);
                p.cond = match &**g {
                    Formula::Atom(t) => Some(t.clone()),
                    _ => None,
                };
                Some(p)
            }
            Formula::CtlUntil { quant: PathQuantifier::Exists, lhs, rhs } => {
                let p = self.sat(lhs)?.to_vec();
                let q = self.sat(rhs)?.to_vec();
                let Some(prefix) = self.ks.bfs_path(sources, |t| p[t as usize], |t| q[t as usize]) else {
                    return Ok(None);
                };
                let last = *prefix.last().expect("non-empty path");
                self.prove(rhs, &[last])?.map(|tail| Path::join(prefix, tail))
            }
            _ => None,
        })
    }
}

fn is_existential(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Ctl(CtlOp::EX | CtlOp::EF | CtlOp::EG, _) | Formula::CtlUntil { quant: PathQuantifier::Exists, .. }
    )
}

/// Decides a CTL formula on every initial state.
///
/// A failure carries a counterexample when the top level is of the AG, AX,
/// AF or AU class (AG counterexamples are shortest); a holding existential
/// formula carries a witness (EF witnesses are shortest).
pub fn check_ctl(ks: &KripkeStructure, tf: &TypedFormula) -> Result<Verdict, CheckError> {
    let t0 = Instant::now();
    let f = &tf.formula;
    let sat = label_ctl(ks, f)?;
    let failing: Vec<u32> = ks.initial().iter().copied().filter(|&s| !sat[s as usize]).collect();
    let mut ex = Explainer { ks, memo: HashMap::new() };
    let (outcome, evidence) = if failing.is_empty() {
        let w = if is_existential(f) { ex.prove(f, ks.initial())? } else { None };
        (Outcome::Holds, w.map(|p| ks.trace(p.states, p.loop_start, EvidenceRole::Witness, p.cond)))
    } else {
        let c = ex.refute(f, &failing)?;
        (Outcome::Fails, c.map(|p| ks.trace(p.states, p.loop_start, EvidenceRole::Counterexample, p.cond)))
    };
    Ok(Verdict { outcome, evidence, stats: ks.stats(t0) })
}
