//! Clausal queries over the general reason: shortest-clause CNF conversion
//! and closure under discrete resolution.

use rustc_hash::FxHashMap;

use super::{Caps, Clause, ClauseSet};
use crate::circuits::{FeatureSpace, Nnf, NnfNode, NodeId, StateSet, VarSet};
use crate::error::{Error, Result};
use crate::reasons::Reason;

/// The resolvent of two clauses on `var`: the conjunction of their `var`
/// literals joined with the rest of both clauses. `None` when the result is
/// valid or when either clause does not mention `var`.
pub fn resolve(a: &Clause, b: &Clause, var: usize, space: &FeatureSpace) -> Option<Clause> {
    let la = a.lit(var)?;
    let lb = b.lit(var)?;
    let rest = |c: &Clause| Clause::from_sorted(c.lits().iter().copied().filter(|l| l.var != var).collect());
    let mut out = rest(a).or(&rest(b), space)?;
    let both = la.mask & lb.mask;
    if both != 0 {
        out = out.or(&Clause::from_sorted(vec![StateSet { var, mask: both }]), space)?;
    }
    Some(out)
}

fn check_cap(set: &ClauseSet, caps: &Caps) -> Result<()> {
    if set.len() > caps.items {
        return Err(Error::CapExceeded {
            what: "clause set",
            cap: caps.items,
        });
    }
    Ok(())
}

/// Bottom-up CNF conversion that drops every clause whose variables fail
/// `keep`. A literal that fails contributes no clauses.
fn cnf(nnf: &Nnf, root: NodeId, keep: &dyn Fn(&VarSet) -> bool, caps: &Caps) -> Result<ClauseSet> {
    let space = nnf.space();
    let mut memo: FxHashMap<NodeId, ClauseSet> = FxHashMap::default();
    for id in nnf.reachable(root) {
        let out = match nnf.node(id) {
            NnfNode::True => ClauseSet::new(),
            NnfNode::False => ClauseSet::falsum(),
            NnfNode::Lit(l) => {
                if keep(&VarSet::singleton(l.var)) {
                    std::iter::once(Clause::from_sorted(vec![*l])).collect()
                } else {
                    // Every clause through this literal would be dropped.
                    ClauseSet::new()
                }
            }
            NnfNode::And(cs) => {
                let mut acc = ClauseSet::new();
                for c in cs.iter() {
                    for clause in &memo[c] {
                        acc.insert(clause.clone());
                    }
                    check_cap(&acc, caps)?;
                }
                acc
            }
            NnfNode::Or(cs) => {
                let mut acc = memo[&cs[0]].clone();
                for c in &cs[1..] {
                    let mut next = ClauseSet::new();
                    for c1 in &acc {
                        for c2 in &memo[c] {
                            if let Some(m) = c1.or(c2, space) {
                                if keep(&m.vars()) {
                                    next.insert(m);
                                }
                            }
                        }
                        check_cap(&next, caps)?;
                    }
                    acc = next;
                }
                acc
            }
        };
        memo.insert(id, out);
    }
    Ok(memo.remove(&root).expect("root is reachable"))
}

/// The clauses of the general reason whose variables fit inside
/// one of `vars`.
pub fn shortest_cnf(gr: &Reason, vars: &[VarSet], caps: &Caps) -> Result<Vec<Clause>> {
    let keep = |s: &VarSet| vars.iter().any(|v| s.is_subset(v));
    Ok(cnf(&gr.nnf, gr.root, &keep, caps)?.into_sorted())
}

/// Closes `set` under resolution on each variable of `order` in turn,
/// reaching a fixpoint on one variable before moving to the next. With
/// `exact`, every resolvent must mention exactly those variables.
pub fn deplete(
    mut set: ClauseSet,
    order: &[usize],
    space: &FeatureSpace,
    exact: Option<&VarSet>,
    caps: &Caps,
) -> Result<ClauseSet> {
    for &var in order {
        loop {
            let snapshot: Vec<Clause> = set.iter().filter(|c| c.lit(var).is_some()).cloned().collect();
            let mut grew = false;
            for i in 0..snapshot.len() {
                for j in i + 1..snapshot.len() {
                    let Some(r) = resolve(&snapshot[i], &snapshot[j], var, space) else {
                        continue;
                    };
                    if let Some(v) = exact {
                        if &r.vars() != v {
                            return Err(Error::Invariant(format!(
                                "resolvent on variable {var} changed the variable set {v:?} to {:?}",
                                r.vars()
                            )));
                        }
                    }
                    grew |= set.insert(r);
                }
                check_cap(&set, caps)?;
            }
            if !grew {
                break;
            }
        }
    }
    Ok(set)
}

/// Closes `set` under resolution on every variable, all pairs at once,
/// until nothing new appears.
pub fn naive_closure(mut set: ClauseSet, space: &FeatureSpace, caps: &Caps) -> Result<ClauseSet> {
    loop {
        let snapshot: Vec<Clause> = set.iter().cloned().collect();
        let mut grew = false;
        for a in &snapshot {
            for b in &snapshot {
                for l in a.lits() {
                    if let Some(r) = resolve(a, b, l.var, space) {
                        grew |= set.insert(r);
                    }
                }
            }
            check_cap(&set, caps)?;
        }
        if !grew {
            return Ok(set);
        }
    }
}

/// All shortest general necessary reasons, given the variable sets
/// of the shortest necessary reasons.
pub fn shortest_gnrs(gr: &Reason, vars: &[VarSet], caps: &Caps) -> Result<Vec<Clause>> {
    let space = gr.nnf.space();
    let cnf = shortest_cnf(gr, vars, caps)?;
    let mut out = Vec::new();
    for v in vars {
        let group: ClauseSet = cnf.iter().filter(|c| &c.vars() == v).cloned().collect();
        let order: Vec<usize> = v.iter().collect();
        let closed = deplete(group, &order, space, Some(v), caps)?;
        out.extend(closed.into_sorted());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// All general necessary reasons: the variable-minimal prime implicates of
/// the general reason.
pub fn general_necessary_reasons(gr: &Reason, caps: &Caps) -> Result<Vec<Clause>> {
    let space = gr.nnf.space();
    let all = cnf(&gr.nnf, gr.root, &|_| true, caps)?;
    let order: Vec<usize> = (0..space.len()).collect();
    let closed = deplete(all, &order, space, None, caps)?.into_sorted();
    let var_sets: Vec<VarSet> = closed.iter().map(Clause::vars).collect();
    Ok(closed
        .iter()
        .zip(&var_sets)
        .filter(|(_, v)| !var_sets.iter().any(|w| w != *v && w.is_subset(v)))
        .map(|(c, _)| c.clone())
        .collect())
}
