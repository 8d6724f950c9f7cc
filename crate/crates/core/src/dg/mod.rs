//! Weak test-once decision graphs with true/false leaves.

mod apply;
mod json;

use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::circuits::{mask_states, FeatureSpace, Nnf, NodeId, StateSet, VarSet, World};
use crate::error::{Error, Result};

pub use apply::{ApplyCtx, Budget, Op};
pub use json::{DgJson, DgNodeJson, EdgeJson};

/// Handle to a node of a [`Dg`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DgId(u32);

impl DgId {
    pub const FALSE: DgId = DgId(0);
    pub const TRUE: DgId = DgId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DgNode {
    False,
    True,
    /// Edges are `(state mask, child)`, sorted by mask and pairwise disjoint.
    Decision {
        var: usize,
        edges: Box<[(u64, DgId)]>,
    },
}

/// Feasible states per variable along a path from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path(Vec<u64>);

impl Path {
    pub fn full(space: &FeatureSpace) -> Self {
        Path((0..space.len()).map(|v| space.full(v)).collect())
    }

    pub fn get(&self, var: usize) -> u64 {
        self.0[var]
    }

    /// Narrows `var` to `mask`. An empty mask is rejected.
    pub fn with(mut self, var: usize, mask: u64) -> Result<Self> {
        if mask == 0 {
            return Err(Error::Precondition(format!(
                "path would leave variable {var} without feasible states"
            )));
        }
        self.0[var] = mask;
        Ok(self)
    }

    pub(crate) fn masks(&self) -> &[u64] {
        &self.0
    }

    pub(crate) fn set(&mut self, var: usize, mask: u64) {
        self.0[var] = mask;
    }
}

/// Where a graph breaks the weak test-once property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: DgId,
    pub var: usize,
    pub tested: u64,
    pub feasible: u64,
}

/// Hash-consed arena of decision graph nodes over one feature space.
///
/// Children precede parents. Construction applies the standard reductions:
/// empty edges vanish, edges to the same child merge, and a node whose
/// edges all lead to one child is replaced by that child.
#[derive(Debug, Clone)]
pub struct Dg {
    space: Arc<FeatureSpace>,
    nodes: Vec<DgNode>,
    vars: Vec<VarSet>,
    unique: FxHashMap<DgNode, DgId>,
    negated: FxHashMap<DgId, DgId>,
    node_budget: Option<usize>,
}

impl Dg {
    pub fn new(space: Arc<FeatureSpace>) -> Self {
        let mut unique = FxHashMap::default();
        unique.insert(DgNode::False, DgId::FALSE);
        unique.insert(DgNode::True, DgId::TRUE);
        Dg {
            space,
            nodes: vec![DgNode::False, DgNode::True],
            vars: vec![VarSet::new(), VarSet::new()],
            unique,
            negated: FxHashMap::default(),
            node_budget: None,
        }
    }

    /// Caps the arena size; node creation beyond it fails with
    /// [`Error::NodeBudget`].
    pub fn with_node_budget(mut self, budget: Option<usize>) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn node(&self, id: DgId) -> &DgNode {
        &self.nodes[id.index()]
    }

    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Variables tested anywhere below `id`.
    pub fn vars(&self, id: DgId) -> &VarSet {
        &self.vars[id.index()]
    }

    pub fn constant(&self, value: bool) -> DgId {
        if value {
            DgId::TRUE
        } else {
            DgId::FALSE
        }
    }

    /// Builds a decision node, applying the reductions. `feasible` is the
    /// set of states of `var` that can reach the node; a node is replaced by
    /// its only child when that child's edge covers them. A node left without
    /// edges is false.
    pub fn decision(&mut self, var: usize, feasible: u64, edges: Vec<(u64, DgId)>) -> Result<DgId> {
        let mut merged: Vec<(u64, DgId)> = Vec::with_capacity(edges.len());
        for (mask, child) in edges {
            if mask == 0 {
                continue;
            }
            match merged.iter_mut().find(|(_, c)| *c == child) {
                Some(e) => e.0 |= mask,
                None => merged.push((mask, child)),
            }
        }
        match merged.len() {
            0 => return Ok(DgId::FALSE),
            1 if merged[0].0 & feasible == feasible => return Ok(merged[0].1),
            _ => {}
        }
        merged.sort_unstable();
        let node = DgNode::Decision {
            var,
            edges: merged.into_boxed_slice(),
        };
        if let Some(&id) = self.unique.get(&node) {
            return Ok(id);
        }
        if let Some(budget) = self.node_budget {
            if self.nodes.len() >= budget {
                return Err(Error::NodeBudget(budget));
            }
        }
        let mut vs = VarSet::singleton(var);
        if let DgNode::Decision { edges, .. } = &node {
            for (_, c) in edges.iter() {
                vs.union_with(&self.vars[c.index()]);
            }
        }
        let id = DgId(u32::try_from(self.nodes.len()).expect("decision graph arena overflow"));
        self.nodes.push(node.clone());
        self.vars.push(vs);
        self.unique.insert(node, id);
        Ok(id)
    }

    /// Evaluates at a world; a state not covered by any edge reads as false.
    pub fn evaluate(&self, root: DgId, world: &World) -> Result<bool> {
        world.check(&self.space)?;
        Ok(self.eval_unchecked(root, world))
    }

    pub(crate) fn eval_unchecked(&self, root: DgId, world: &World) -> bool {
        let mut cur = root;
        loop {
            match self.node(cur) {
                DgNode::False => return false,
                DgNode::True => return true,
                DgNode::Decision { var, edges } => {
                    let bit = 1u64 << world.state(*var);
                    match edges.iter().find(|(m, _)| m & bit != 0) {
                        Some(&(_, c)) => cur = c,
                        None => return false,
                    }
                }
            }
        }
    }

    /// Swaps the true and false leaves.
    pub fn negate(&mut self, root: DgId) -> DgId {
        if let Some(&n) = self.negated.get(&root) {
            return n;
        }
        let out = match self.node(root).clone() {
            DgNode::False => DgId::TRUE,
            DgNode::True => DgId::FALSE,
            DgNode::Decision { var, edges } => {
                let edges = edges.iter().map(|&(m, c)| (m, self.negate(c))).collect();
                // Negation preserves edge structure, so the node count of the
                // result equals the input's; the budget is not consulted.
                let budget = self.node_budget.take();
                let full = self.space.full(var);
                let id = self.decision(var, full, edges).expect("no budget set");
                self.node_budget = budget;
                id
            }
        };
        self.negated.insert(root, out);
        self.negated.insert(out, root);
        out
    }

    /// Intersects every edge with the feasible states of `path`, dropping
    /// edges that become empty.
    pub fn restrict(&mut self, root: DgId, path: &Path) -> Result<DgId> {
        if let DgNode::Decision { var, edges } = self.node(root) {
            if edges.iter().all(|(m, _)| m & path.get(*var) == 0) {
                return Err(Error::InfeasibleRestriction);
            }
        }
        let mut ctx = ApplyCtx::new(Budget::default());
        let mut p = path.clone();
        self.restrict_in(root, &mut p, &mut ctx)
    }

    /// Checks that every tested state set is within the states still
    /// feasible on every path reaching it.
    pub fn validate_weak_test_once(&self, root: DgId) -> std::result::Result<(), Violation> {
        let mut seen: FxHashSet<(DgId, Vec<u64>)> = FxHashSet::default();
        let mut path = Path::full(&self.space);
        self.validate_in(root, &mut path, &mut seen)
    }

    fn validate_in(
        &self,
        id: DgId,
        path: &mut Path,
        seen: &mut FxHashSet<(DgId, Vec<u64>)>,
    ) -> std::result::Result<(), Violation> {
        let DgNode::Decision { var, edges } = self.node(id) else {
            return Ok(());
        };
        let key = (id, self.vars(id).iter().map(|v| path.get(v)).collect());
        if !seen.insert(key) {
            return Ok(());
        }
        let feasible = path.get(*var);
        for &(mask, child) in edges.iter() {
            if mask & !feasible != 0 {
                return Err(Violation {
                    node: id,
                    var: *var,
                    tested: mask,
                    feasible,
                });
            }
            path.set(*var, mask);
            let r = self.validate_in(child, path, seen);
            path.set(*var, feasible);
            r?;
        }
        Ok(())
    }

    /// Expands decision nodes into an `Or` over edges of `And(literal, child)`.
    pub fn to_nnf(&self, root: DgId, nnf: &mut Nnf) -> NodeId {
        let mut memo: FxHashMap<DgId, NodeId> = FxHashMap::default();
        for id in self.reachable(&[root]) {
            let out = match self.node(id) {
                DgNode::False => NodeId::FALSE,
                DgNode::True => NodeId::TRUE,
                DgNode::Decision { var, edges } => {
                    let disjuncts: Vec<NodeId> = edges
                        .iter()
                        .map(|&(m, c)| {
                            let l = nnf.lit(StateSet { var: *var, mask: m });
                            nnf.and2(l, memo[&c])
                        })
                        .collect();
                    nnf.or(disjuncts)
                }
            };
            memo.insert(id, out);
        }
        memo[&root]
    }

    /// Ids reachable from any of `roots`, children first.
    pub fn reachable(&self, roots: &[DgId]) -> Vec<DgId> {
        let mut seen: FxHashSet<DgId> = roots.iter().copied().collect();
        let mut stack: Vec<DgId> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if let DgNode::Decision { edges, .. } = self.node(id) {
                for &(_, c) in edges.iter() {
                    if seen.insert(c) {
                        stack.push(c);
                    }
                }
            }
        }
        let mut out: Vec<DgId> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Distinct nodes and edges reachable from `roots`, leaves included.
    pub fn stats(&self, roots: &[DgId]) -> DgStats {
        let reach = self.reachable(roots);
        let edges = reach
            .iter()
            .map(|&id| match self.node(id) {
                DgNode::Decision { edges, .. } => edges.len(),
                _ => 0,
            })
            .sum();
        DgStats {
            nodes: reach.len(),
            edges,
        }
    }

    /// Copies the sub-graph under `root` of `other` into this arena.
    pub fn import(&mut self, other: &Dg, root: DgId) -> Result<DgId> {
        let mut map: FxHashMap<DgId, DgId> = FxHashMap::default();
        for id in other.reachable(&[root]) {
            let new = match other.node(id) {
                DgNode::False => DgId::FALSE,
                DgNode::True => DgId::TRUE,
                DgNode::Decision { var, edges } => {
                    let edges = edges.iter().map(|&(m, c)| (m, map[&c])).collect();
                    self.decision(*var, other.space.full(*var), edges)?
                }
            };
            map.insert(id, new);
        }
        Ok(map[&root])
    }

    /// Renders a graph as nested text, for diagnostics.
    pub fn display(&self, root: DgId) -> String {
        match self.node(root) {
            DgNode::False => "false".into(),
            DgNode::True => "true".into(),
            DgNode::Decision { var, edges } => {
                let v = self.space.var(*var);
                let parts: Vec<String> = edges
                    .iter()
                    .map(|&(m, c)| {
                        format!(
                            "{}:{{{}}} -> {}",
                            v.name,
                            mask_states(m)
                                .map(|s| v.states[s].as_str())
                                .collect::<Vec<_>>()
                                .join(","),
                            self.display(c)
                        )
                    })
                    .collect();
                format!("[{}]", parts.join(" | "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DgStats {
    pub nodes: usize,
    pub edges: usize,
}
