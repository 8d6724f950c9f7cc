//! Random forests over discrete features: loading, per-tree class formulas
//! and majority-vote classification.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuits::{mask_states, FeatureSpace, Nnf, NodeId, StateSet, Variable, World};
use crate::dg::{Dg, DgId, Path};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(usize),
    Node {
        var: usize,
        edges: Vec<(StateSet, TreeNode)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    pub root: TreeNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    fn leaf(self, label: usize, class: usize) -> bool {
        (label == class) == (self == Polarity::Positive)
    }
}

impl DecisionTree {
    /// The class this tree votes for at `world`.
    pub fn vote(&self, world: &World) -> usize {
        let mut cur = &self.root;
        loop {
            match cur {
                TreeNode::Leaf(c) => return *c,
                TreeNode::Node { var, edges } => {
                    let s = world.state(*var);
                    cur = &edges
                        .iter()
                        .find(|(l, _)| l.contains(s))
                        .expect("validated trees partition every node's states")
                        .1;
                }
            }
        }
    }

    /// Class formula of `class` (or its complement) as an NNF circuit.
    pub fn class_formula_nnf(&self, nnf: &mut Nnf, class: usize, polarity: Polarity) -> NodeId {
        fn go(n: &TreeNode, nnf: &mut Nnf, class: usize, pol: Polarity) -> NodeId {
            match n {
                TreeNode::Leaf(c) => nnf.constant(pol.leaf(*c, class)),
                TreeNode::Node { var, edges } => {
                    let ds: Vec<NodeId> = edges
                        .iter()
                        .map(|(l, child)| {
                            let c = go(child, nnf, class, pol);
                            let lit = nnf.lit(StateSet {
                                var: *var,
                                mask: l.mask,
                            });
                            nnf.and2(lit, c)
                        })
                        .collect();
                    nnf.or(ds)
                }
            }
        }
        go(&self.root, nnf, class, polarity)
    }

    /// Class formula of `class` (or its complement) as a weak test-once
    /// decision graph. Edges are trimmed to the states still feasible on the
    /// path from the root, so repeated tests of a variable stay weak
    /// test-once.
    pub fn class_formula_dg(&self, dg: &mut Dg, class: usize, polarity: Polarity) -> Result<DgId> {
        fn go(n: &TreeNode, dg: &mut Dg, p: &mut Path, class: usize, pol: Polarity) -> Result<DgId> {
            match n {
                TreeNode::Leaf(c) => Ok(dg.constant(pol.leaf(*c, class))),
                TreeNode::Node { var, edges } => {
                    let feasible = p.get(*var);
                    let mut out = Vec::with_capacity(edges.len());
                    for (l, child) in edges {
                        let s = l.mask & feasible;
                        if s == 0 {
                            continue;
                        }
                        p.set(*var, s);
                        let c = go(child, dg, p, class, pol);
                        p.set(*var, feasible);
                        out.push((s, c?));
                    }
                    dg.decision(*var, feasible, out)
                }
            }
        }
        let mut p = Path::full(dg.space());
        go(&self.root, dg, &mut p, class, polarity)
    }

    pub fn node_count(&self) -> usize {
        fn go(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf(_) => 1,
                TreeNode::Node { edges, .. } => 1 + edges.iter().map(|(_, c)| go(c)).sum::<usize>(),
            }
        }
        go(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn go(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf(_) => 0,
                TreeNode::Node { edges, .. } => 1 + edges.iter().map(|(_, c)| go(c)).max().unwrap_or(0),
            }
        }
        go(&self.root)
    }
}

/// A majority-vote ensemble of decision trees over one feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    space: Arc<FeatureSpace>,
    classes: Vec<String>,
    trees: Vec<DecisionTree>,
}

impl Forest {
    pub fn new(space: Arc<FeatureSpace>, classes: Vec<String>, trees: Vec<DecisionTree>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::Schema(format!(
                "a forest needs at least 2 classes, got {}",
                classes.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &classes {
            if !seen.insert(c.as_str()) {
                return Err(Error::Schema(format!("duplicate class name `{c}`")));
            }
        }
        if trees.is_empty() {
            return Err(Error::Schema("a forest needs at least one tree".into()));
        }
        for (t, tree) in trees.iter().enumerate() {
            validate_node(&tree.root, &space, classes.len()).map_err(|e| Error::Schema(format!("tree {t}: {e}")))?;
        }
        Ok(Forest { space, classes, trees })
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    pub fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.classes.len() {
            return Err(Error::ClassIndex {
                index: class,
                count: self.classes.len(),
            });
        }
        Ok(())
    }

    /// Vote count per class at `world`.
    pub fn votes(&self, world: &World) -> Vec<usize> {
        let mut votes = vec![0; self.classes.len()];
        for t in &self.trees {
            votes[t.vote(world)] += 1;
        }
        votes
    }

    /// Every class receiving the maximal number of votes, ascending.
    pub fn classify(&self, world: &World) -> Result<Vec<usize>> {
        world.check(&self.space)?;
        Ok(self.classify_unchecked(world))
    }

    pub(crate) fn classify_unchecked(&self, world: &World) -> Vec<usize> {
        let votes = self.votes(world);
        let best = *votes.iter().max().expect("at least two classes");
        (0..votes.len()).filter(|&c| votes[c] == best).collect()
    }

    /// Total number of tree nodes.
    pub fn node_count(&self) -> usize {
        self.trees.iter().map(DecisionTree::node_count).sum()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: ForestJson = serde_json::from_str(text)?;
        Self::from_json(json)
    }

    pub fn from_json(json: ForestJson) -> Result<Self> {
        let space = Arc::new(FeatureSpace::new(json.features)?);
        let trees = json
            .trees
            .iter()
            .map(|t| {
                Ok(DecisionTree {
                    root: node_from_json(t, &space)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Forest::new(space, json.classes, trees)
    }

    pub fn to_json(&self) -> ForestJson {
        ForestJson {
            features: self.space.vars().to_vec(),
            classes: self.classes.clone(),
            trees: self.trees.iter().map(|t| node_to_json(&t.root)).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("forest JSON is always serializable")
    }
}

fn validate_node(n: &TreeNode, space: &FeatureSpace, k: usize) -> std::result::Result<(), String> {
    match n {
        TreeNode::Leaf(c) if *c >= k => Err(format!("leaf class {c} out of range")),
        TreeNode::Leaf(_) => Ok(()),
        TreeNode::Node { var, edges } => {
            if *var >= space.len() {
                return Err(format!("variable index {var} out of range"));
            }
            let mut seen = 0u64;
            for (l, _) in edges {
                if l.mask & seen != 0 {
                    return Err(format!("edges of `{}` overlap", space.var(*var).name));
                }
                seen |= l.mask;
            }
            if seen != space.full(*var) {
                return Err(format!(
                    "edges of `{}` do not cover all of its states",
                    space.var(*var).name
                ));
            }
            edges.iter().try_for_each(|(_, c)| validate_node(c, space, k))
        }
    }
}

/// Forest interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestJson {
    pub features: Vec<Variable>,
    pub classes: Vec<String>,
    pub trees: Vec<TreeNodeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNodeJson {
    Leaf(usize),
    Node { var: usize, edges: Vec<TreeEdgeJson> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdgeJson {
    pub states: Vec<usize>,
    pub child: TreeNodeJson,
}

fn node_from_json(n: &TreeNodeJson, space: &FeatureSpace) -> Result<TreeNode> {
    Ok(match n {
        TreeNodeJson::Leaf(c) => TreeNode::Leaf(*c),
        TreeNodeJson::Node { var, edges } => TreeNode::Node {
            var: *var,
            edges: edges
                .iter()
                .map(|e| {
                    Ok((
                        StateSet::from_states(space, *var, &e.states)?,
                        node_from_json(&e.child, space)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?,
        },
    })
}

fn node_to_json(n: &TreeNode) -> TreeNodeJson {
    match n {
        TreeNode::Leaf(c) => TreeNodeJson::Leaf(*c),
        TreeNode::Node { var, edges } => TreeNodeJson::Node {
            var: *var,
            edges: edges
                .iter()
                .map(|(l, c)| TreeEdgeJson {
                    states: mask_states(l.mask).collect(),
                    child: node_to_json(c),
                })
                .collect(),
        },
    }
}
