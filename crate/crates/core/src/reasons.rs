//! Complete and general reasons behind a decision, extracted in linear
//! time from conjunctions of weak test-once decision graphs.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitJson, Nnf, NnfNode, NodeId, StateSet, World};
use crate::dg::{Dg, DgId, DgNode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasonKind {
    Complete,
    General,
}

/// An NNF abstraction of an instance with respect to a class formula.
#[derive(Debug, Clone)]
pub struct Reason {
    pub kind: ReasonKind,
    pub nnf: Nnf,
    pub root: NodeId,
    pub instance: World,
}

/// The complete reason: a monotone, or-decomposable circuit over the
/// instance's own states whose prime implicants are the sufficient
/// reasons and whose prime implicates are the necessary reasons.
pub fn complete_reason(dg: &Dg, roots: &[DgId], instance: &World) -> Result<Reason> {
    extract(dg, roots, instance, ReasonKind::Complete)
}

/// The general reason: a locally fixated circuit that abstracts the
/// instance into state sets.
pub fn general_reason(dg: &Dg, roots: &[DgId], instance: &World) -> Result<Reason> {
    extract(dg, roots, instance, ReasonKind::General)
}

fn extract(dg: &Dg, roots: &[DgId], instance: &World, kind: ReasonKind) -> Result<Reason> {
    let space = dg.space();
    instance.check(space)?;
    for &r in roots {
        if !dg.eval_unchecked(r, instance) {
            return Err(Error::Precondition(
                "the instance does not satisfy the class formula".into(),
            ));
        }
    }
    let mut nnf = Nnf::new(space.clone());
    let mut memo: FxHashMap<DgId, NodeId> = FxHashMap::default();
    for id in dg.reachable(roots) {
        let out = match dg.node(id) {
            DgNode::False => NodeId::FALSE,
            DgNode::True => NodeId::TRUE,
            DgNode::Decision { var, edges } => {
                let x = instance.state(*var);
                let bit = 1u64 << x;
                let taken = edges.iter().position(|(m, _)| m & bit != 0);
                let mut conj = Vec::with_capacity(edges.len());
                for (i, &(m, c)) in edges.iter().enumerate() {
                    let sub = memo[&c];
                    if Some(i) == taken {
                        conj.push(sub);
                        continue;
                    }
                    // With the instance's state on another edge, this
                    // branch only matters once the state changes. Without
                    // one (the state was ruled out further up), every
                    // branch is a plain cofactor.
                    let escape = match (kind, taken) {
                        (ReasonKind::Complete, Some(_)) => nnf.lit(StateSet::simple(*var, x)),
                        (ReasonKind::Complete, None) => NodeId::FALSE,
                        (ReasonKind::General, _) => nnf.lit_mask(*var, space.full(*var) & !m),
                    };
                    conj.push(nnf.or2(escape, sub));
                }
                nnf.and(conj)
            }
        };
        memo.insert(id, out);
    }
    let parts: Vec<NodeId> = roots.iter().map(|r| memo[r]).collect();
    let root = nnf.and(parts);
    Ok(Reason {
        kind,
        nnf,
        root,
        instance: instance.clone(),
    })
}

impl Reason {
    pub fn to_json(&self) -> ReasonJson {
        ReasonJson {
            kind: self.kind,
            instance: self.instance.to_json(self.nnf.space()),
            circuit: self.nnf.to_json(self.root),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonJson {
    pub kind: ReasonKind,
    pub instance: serde_json::Value,
    pub circuit: CircuitJson,
}

/// Every literal is the instance's own state for its variable.
pub fn is_monotone(nnf: &Nnf, root: NodeId, instance: &World) -> bool {
    nnf.reachable(root).into_iter().all(|id| match nnf.node(id) {
        NnfNode::Lit(l) => l.is_simple() && l.contains(instance.state(l.var)),
        _ => true,
    })
}

/// The disjuncts of every `Or` mention pairwise disjoint variables.
pub fn is_or_decomposable(nnf: &Nnf, root: NodeId) -> bool {
    let vars = nnf.var_sets(root);
    nnf.reachable(root).into_iter().all(|id| match nnf.node(id) {
        NnfNode::Or(cs) => {
            let mut seen = crate::circuits::VarSet::new();
            for c in cs.iter() {
                if !seen.is_disjoint(&vars[c]) {
                    return false;
                }
                seen.union_with(&vars[c]);
            }
            true
        }
        _ => true,
    })
}

/// Every literal is consistent with the instance.
pub fn is_locally_fixated(nnf: &Nnf, root: NodeId, instance: &World) -> bool {
    nnf.reachable(root).into_iter().all(|id| match nnf.node(id) {
        NnfNode::Lit(l) => l.contains(instance.state(l.var)),
        _ => true,
    })
}
