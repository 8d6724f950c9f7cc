//! Queries over the complete reason, which is monotone and or-decomposable.

use super::{Caps, Clause, Term};
use crate::circuits::{Nnf, NnfNode, NodeId, VarSet};
use crate::error::{Error, Result};
use crate::reasons::Reason;

/// Keeps the inclusion-minimal sets, in canonical order.
fn minimize(mut sets: Vec<VarSet>) -> Vec<VarSet> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    sets.dedup();
    let mut out: Vec<VarSet> = Vec::with_capacity(sets.len());
    for s in sets {
        if !out.iter().any(|o| o.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

fn cross(a: &[VarSet], b: &[VarSet], cap: usize, what: &'static str) -> Result<Vec<VarSet>> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(x.union(y));
            if out.len() > cap.saturating_mul(4) {
                out = minimize(out);
                if out.len() > cap {
                    return Err(Error::CapExceeded { what, cap });
                }
            }
        }
    }
    let out = minimize(out);
    if out.len() > cap {
        return Err(Error::CapExceeded { what, cap });
    }
    Ok(out)
}

/// Minimal variable sets of the prime implicants (or, with `dual`, the
/// prime implicates) of a monotone circuit. Every literal of such a circuit
/// is determined by its variable.
fn primes(nnf: &Nnf, root: NodeId, dual: bool, cap: usize) -> Result<Vec<VarSet>> {
    let what = if dual {
        "necessary reasons"
    } else {
        "sufficient reasons"
    };
    let order = nnf.reachable(root);
    let mut memo: rustc_hash::FxHashMap<NodeId, Vec<VarSet>> = Default::default();
    for id in order {
        let out = match nnf.node(id) {
            NnfNode::True if dual => vec![],
            NnfNode::True => vec![VarSet::new()],
            NnfNode::False if dual => vec![VarSet::new()],
            NnfNode::False => vec![],
            NnfNode::Lit(l) => vec![VarSet::singleton(l.var)],
            NnfNode::And(cs) | NnfNode::Or(cs) => {
                let product = matches!(nnf.node(id), NnfNode::And(_)) != dual;
                if product {
                    let mut acc = vec![VarSet::new()];
                    for c in cs.iter() {
                        acc = cross(&acc, &memo[c], cap, what)?;
                    }
                    acc
                } else {
                    let all: Vec<VarSet> = cs.iter().flat_map(|c| memo[c].iter().cloned()).collect();
                    let out = minimize(all);
                    if out.len() > cap {
                        return Err(Error::CapExceeded { what, cap });
                    }
                    out
                }
            }
        };
        memo.insert(id, out);
    }
    Ok(memo.remove(&root).unwrap_or_default())
}

/// Sufficient reasons: the prime implicants of the complete reason.
pub fn sufficient_reasons(cr: &Reason, caps: &Caps) -> Result<Vec<Term>> {
    let sets = primes(&cr.nnf, cr.root, false, caps.items)?;
    Ok(sets.iter().map(|s| Term::from_world(&cr.instance, s)).collect())
}

/// Necessary reasons: the prime implicates of the complete reason.
pub fn necessary_reasons(cr: &Reason, caps: &Caps) -> Result<Vec<Clause>> {
    let sets = primes(&cr.nnf, cr.root, true, caps.items)?;
    Ok(sets.iter().map(|s| Clause::from_world(&cr.instance, s)).collect())
}

/// Robustness of a decision and the variable sets of its shortest
/// necessary reasons. `distance` is `None` when no change of the instance
/// flips the decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Robustness {
    pub distance: Option<usize>,
    pub vars: Vec<VarSet>,
}

/// Shortest prime implicate length of the complete reason, with the
/// variable sets attaining it.
pub fn robustness(cr: &Reason, caps: &Caps) -> Result<Robustness> {
    let nnf = &cr.nnf;
    let mut memo: rustc_hash::FxHashMap<NodeId, Robustness> = Default::default();
    for id in nnf.reachable(cr.root) {
        let out = match nnf.node(id) {
            NnfNode::True => Robustness {
                distance: None,
                vars: vec![],
            },
            NnfNode::False => Robustness {
                distance: Some(0),
                vars: vec![VarSet::new()],
            },
            NnfNode::Lit(l) => Robustness {
                distance: Some(1),
                vars: vec![VarSet::singleton(l.var)],
            },
            NnfNode::And(cs) => {
                let mut best = memo[&cs[0]].clone();
                for c in &cs[1..] {
                    let next = &memo[c];
                    match (best.distance, next.distance) {
                        (_, None) => {}
                        (None, Some(_)) => best = next.clone(),
                        (Some(a), Some(b)) if b < a => best = next.clone(),
                        (Some(a), Some(b)) if a == b => {
                            best.vars.extend(next.vars.iter().cloned());
                            best.vars.sort();
                            best.vars.dedup();
                        }
                        _ => {}
                    }
                }
                best
            }
            NnfNode::Or(cs) => {
                let mut acc = memo[&cs[0]].clone();
                for c in &cs[1..] {
                    let next = &memo[c];
                    acc = match (acc.distance, next.distance) {
                        (Some(a), Some(b)) => {
                            let mut vars = Vec::new();
                            for x in &acc.vars {
                                for y in &next.vars {
                                    vars.push(x.union(y));
                                }
                            }
                            vars.sort();
                            vars.dedup();
                            if vars.len() > caps.items {
                                return Err(Error::CapExceeded {
                                    what: "robustness variable sets",
                                    cap: caps.items,
                                });
                            }
                            Robustness {
                                distance: Some(a + b),
                                vars,
                            }
                        }
                        _ => Robustness {
                            distance: None,
                            vars: vec![],
                        },
                    };
                }
                acc
            }
        };
        memo.insert(id, out);
    }
    let mut out = memo.remove(&cr.root).expect("root is reachable");
    out.vars
        .sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    Ok(out)
}
