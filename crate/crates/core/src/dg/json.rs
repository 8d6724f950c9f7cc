//! Interchange format for decision graphs.

use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{Dg, DgId, DgNode};
use crate::circuits::{mask_states, FeatureSpace, StateSet, Variable};
use crate::error::{Error, Result};

/// One or more graphs sharing a node list. Nodes are in topological order
/// and edges reference earlier indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgJson {
    pub features: Vec<Variable>,
    pub nodes: Vec<DgNodeJson>,
    pub roots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum DgNodeJson {
    True,
    False,
    Decision { var: usize, edges: Vec<EdgeJson> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub states: Vec<usize>,
    pub child: usize,
}

impl Dg {
    pub fn to_json(&self, roots: &[DgId]) -> DgJson {
        let order = self.reachable(roots);
        let index: FxHashMap<DgId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let nodes = order
            .iter()
            .map(|&id| match self.node(id) {
                DgNode::False => DgNodeJson::False,
                DgNode::True => DgNodeJson::True,
                DgNode::Decision { var, edges } => DgNodeJson::Decision {
                    var: *var,
                    edges: edges
                        .iter()
                        .map(|&(m, c)| EdgeJson {
                            states: mask_states(m).collect(),
                            child: index[&c],
                        })
                        .collect(),
                },
            })
            .collect();
        DgJson {
            features: self.space.vars().to_vec(),
            nodes,
            roots: roots.iter().map(|r| index[r]).collect(),
        }
    }

    pub fn from_json(json: &DgJson) -> Result<(Dg, Vec<DgId>)> {
        let space = Arc::new(FeatureSpace::new(json.features.clone())?);
        let mut dg = Dg::new(space);
        let mut ids: Vec<DgId> = Vec::with_capacity(json.nodes.len());
        for (i, n) in json.nodes.iter().enumerate() {
            let id = match n {
                DgNodeJson::True => DgId::TRUE,
                DgNodeJson::False => DgId::FALSE,
                DgNodeJson::Decision { var, edges } => {
                    let mut out = Vec::with_capacity(edges.len());
                    let mut seen = 0u64;
                    for e in edges {
                        if e.child >= i {
                            return Err(Error::Schema(format!(
                                "node {i} references {}, which is not an earlier node",
                                e.child
                            )));
                        }
                        let s = StateSet::from_states(&dg.space, *var, &e.states)?;
                        if s.mask & seen != 0 {
                            return Err(Error::Schema(format!("node {i} has overlapping edges")));
                        }
                        seen |= s.mask;
                        out.push((s.mask, ids[e.child]));
                    }
                    let full = dg.space.full(*var);
                    dg.decision(*var, full, out)?
                }
            };
            ids.push(id);
        }
        let roots = json
            .roots
            .iter()
            .map(|&r| {
                ids.get(r)
                    .copied()
                    .ok_or_else(|| Error::Schema(format!("root index {r} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((dg, roots))
    }
}
