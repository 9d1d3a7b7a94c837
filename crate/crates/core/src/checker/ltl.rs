//! Bounded LTL: search for violating lassos and finite prefixes.

use std::sync::Arc;
use std::time::Instant;

use crate::diag::Diagnostic;
use crate::lang::*;
use crate::signature::TypedFormula;

use super::{check_invariant, CheckError, EvidenceRole, KripkeStructure, Outcome, Verdict};

/// Negation normal form with literals indexed into a label table.
#[derive(Debug)]
enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    X(Box<Nnf>),
    U(Box<Nnf>, Box<Nnf>),
    R(Box<Nnf>, Box<Nnf>),
}

struct Builder<'k> {
    ks: &'k KripkeStructure,
    terms: Vec<Term>,
    labels: Vec<Arc<[bool]>>,
}

impl Builder<'_> {
    fn lit(&mut self, t: &Term, positive: bool) -> Result<Nnf, CheckError> {
        let id = match self.terms.iter().position(|x| x == t) {
            Some(i) => i,
            None => {
                self.labels.push(self.ks.atom_labels(t)?);
                self.terms.push(t.clone());
                self.terms.len() - 1
            }
        };
        Ok(Nnf::Lit(id, positive))
    }

    fn nnf(&mut self, f: &Formula, neg: bool) -> Result<Nnf, CheckError> {
        let b = Box::new;
        Ok(match f {
            Formula::Atom(t) => self.lit(t, !neg)?,
            Formula::Not(g) => self.nnf(g, !neg)?,
            Formula::Logic { op, lhs, rhs } => match (op, neg) {
                (BoolOp::And, false) => Nnf::And(b(self.nnf(lhs, false)?), b(self.nnf(rhs, false)?)),
                (BoolOp::And, true) => Nnf::Or(b(self.nnf(lhs, true)?), b(self.nnf(rhs, true)?)),
                (BoolOp::Or, false) => Nnf::Or(b(self.nnf(lhs, false)?), b(self.nnf(rhs, false)?)),
                (BoolOp::Or, true) => Nnf::And(b(self.nnf(lhs, true)?), b(self.nnf(rhs, true)?)),
                (BoolOp::Implies, false) => Nnf::Or(b(self.nnf(lhs, true)?), b(self.nnf(rhs, false)?)),
                (BoolOp::Implies, true) => Nnf::And(b(self.nnf(lhs, false)?), b(self.nnf(rhs, true)?)),
                (BoolOp::Iff, _) => {
                    let both = Nnf::And(b(self.nnf(lhs, false)?), b(self.nnf(rhs, neg)?));
                    let neither = Nnf::And(b(self.nnf(lhs, true)?), b(self.nnf(rhs, !neg)?));
                    Nnf::Or(b(both), b(neither))
                }
            },
            Formula::Ltl(op, g) => match (op, neg) {
                (LtlOp::X, _) => Nnf::X(b(self.nnf(g, neg)?)),
                (LtlOp::F, false) => Nnf::U(b(Nnf::True), b(self.nnf(g, false)?)),
                (LtlOp::F, true) => Nnf::R(b(Nnf::False), b(self.nnf(g, true)?)),
                (LtlOp::G, false) => Nnf::R(b(Nnf::False), b(self.nnf(g, false)?)),
                (LtlOp::G, true) => Nnf::U(b(Nnf::True), b(self.nnf(g, true)?)),
            },
            Formula::LtlUntil { lhs, rhs } => {
                if neg {
                    Nnf::R(b(self.nnf(lhs, true)?), b(self.nnf(rhs, true)?))
                } else {
                    Nnf::U(b(self.nnf(lhs, false)?), b(self.nnf(rhs, false)?))
                }
            }
            Formula::Ctl(..) | Formula::CtlUntil { .. } => {
                return Err(CheckError::Formula(
                    Diagnostic::error("mixed-logic", "CTL operator in an LTL formula").into(),
                ))
            }
        })
    }
}

/// Values of `n` at every position of `path`; after the last position the
/// path continues at `lp`, or ends when `lp` is `None` (bounded semantics:
/// obligations pending at the end are false).
fn eval(n: &Nnf, path: &[u32], lp: Option<usize>, labels: &[Arc<[bool]>]) -> Vec<bool> {
    let k = path.len();
    let next = |i: usize| if i + 1 < k { Some(i + 1) } else { lp };
    match n {
        Nnf::True => vec![true; k],
        Nnf::False => vec![false; k],
        Nnf::Lit(id, pos) => path.iter().map(|&s| labels[*id][s as usize] == *pos).collect(),
        Nnf::And(a, b) => {
            let (a, b) = (eval(a, path, lp, labels), eval(b, path, lp, labels));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Nnf::Or(a, b) => {
            let (a, b) = (eval(a, path, lp, labels), eval(b, path, lp, labels));
            a.iter().zip(&b).map(|(x, y)| *x || *y).collect()
        }
        Nnf::X(g) => {
            let g = eval(g, path, lp, labels);
            (0..k).map(|i| next(i).is_some_and(|j| g[j])).collect()
        }
        Nnf::U(p, q) | Nnf::R(p, q) => {
            let until = matches!(n, Nnf::U(..));
            let (p, q) = (eval(p, path, lp, labels), eval(q, path, lp, labels));
            // Least fixpoint for U, greatest for R.
            let mut v = vec![!until; k];
            loop {
                let mut changed = false;
                for i in (0..k).rev() {
                    let later = next(i).is_some_and(|j| v[j]);
                    let new = if until { q[i] || (p[i] && later) } else { q[i] && (p[i] || later) };
                    if new != v[i] {
                        v[i] = new;
                        changed = true;
                    }
                }
                if !changed {
                    return v;
                }
            }
        }
    }
}

/// Searches paths of at most `bound` states for a violation of an LTL
/// formula, shortest first. `G(atom)` is decided exactly by a reachability
/// scan regardless of the bound.
pub fn check_ltl_bounded(ks: &KripkeStructure, tf: &TypedFormula, bound: usize) -> Result<Verdict, CheckError> {
    if bound == 0 {
        return Err(CheckError::InvalidBound);
    }
    if let Formula::Ltl(LtlOp::G, inner) = &tf.formula {
        if let Formula::Atom(t) = &**inner {
            return check_invariant(ks, t);
        }
    }
    let t0 = Instant::now();
    let mut b = Builder { ks, terms: Vec::new(), labels: Vec::new() };
    let violation = b.nnf(&tf.formula, true)?;
    let labels = b.labels;

    for depth in 1..=bound {
        for &s0 in ks.initial() {
            let mut path = vec![s0];
            if let Some((p, lp)) = search(ks, &violation, &labels, &mut path, depth) {
                let trace = ks.trace(p, lp, EvidenceRole::Counterexample, None);
                return Ok(Verdict { outcome: Outcome::Fails, evidence: Some(trace), stats: ks.stats(t0) });
            }
        }
    }
    Ok(Verdict { outcome: Outcome::NoViolationUpTo(bound), evidence: None, stats: ks.stats(t0) })
}

/// Depth-first over paths of exactly `depth` states extending `path`.
fn search(
    ks: &KripkeStructure,
    violation: &Nnf,
    labels: &[Arc<[bool]>],
    path: &mut Vec<u32>,
    depth: usize,
) -> Option<(Vec<u32>, Option<usize>)> {
    if path.len() == depth {
        if eval(violation, path, None, labels)[0] {
            return Some((path.clone(), None));
        }
        let last = *path.last().expect("non-empty path");
        let succ = ks.successors(last);
        for l in 0..path.len() {
            if succ.contains(&path[l]) && eval(violation, path, Some(l), labels)[0] {
                return Some((path.clone(), Some(l)));
            }
        }
        return None;
    }
    let last = *path.last().expect("non-empty path");
    for &t in ks.successors(last) {
        path.push(t);
        let found = search(ks, violation, labels, path, depth);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}
