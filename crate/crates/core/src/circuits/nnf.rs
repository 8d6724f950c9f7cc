//! Hash-consed negation normal form circuits.

use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::space::{mask_states, FeatureSpace, StateSet, VarSet, Variable, World};
use crate::error::{Error, Result};

/// Default cap on the number of worlds `count_models` will enumerate.
pub const DEFAULT_COUNT_CAP: u128 = 1 << 24;

/// Handle to a node of an [`Nnf`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NnfNode {
    False,
    True,
    Lit(StateSet),
    And(Box<[NodeId]>),
    Or(Box<[NodeId]>),
}

impl NnfNode {
    pub fn children(&self) -> &[NodeId] {
        match self {
            NnfNode::And(cs) | NnfNode::Or(cs) => cs,
            _ => &[],
        }
    }
}

/// Arena of NNF nodes over one feature space.
///
/// Children always precede their parents, so ascending ids form a
/// topological order. Structurally identical nodes share one id.
#[derive(Debug, Clone)]
pub struct Nnf {
    space: Arc<FeatureSpace>,
    nodes: Vec<NnfNode>,
    unique: FxHashMap<NnfNode, NodeId>,
}

impl Nnf {
    pub fn new(space: Arc<FeatureSpace>) -> Self {
        let mut unique = FxHashMap::default();
        unique.insert(NnfNode::False, NodeId::FALSE);
        unique.insert(NnfNode::True, NodeId::TRUE);
        Nnf {
            space,
            nodes: vec![NnfNode::False, NnfNode::True],
            unique,
        }
    }

    pub fn space(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn node(&self, id: NodeId) -> &NnfNode {
        &self.nodes[id.index()]
    }

    /// Total number of nodes in the arena, reachable or not.
    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn constant(&self, value: bool) -> NodeId {
        if value {
            NodeId::TRUE
        } else {
            NodeId::FALSE
        }
    }

    fn intern(&mut self, node: NnfNode) -> NodeId {
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("NNF arena overflow"));
        self.nodes.push(node.clone());
        self.unique.insert(node, id);
        id
    }

    /// Literal node; a full state set is the constant true.
    pub fn lit(&mut self, lit: StateSet) -> NodeId {
        debug_assert!(lit.mask != 0);
        if lit.is_full(&self.space) {
            return NodeId::TRUE;
        }
        self.intern(NnfNode::Lit(lit))
    }

    /// Literal node from a raw mask. An empty mask is the constant false.
    pub fn lit_mask(&mut self, var: usize, mask: u64) -> NodeId {
        if mask == 0 {
            return NodeId::FALSE;
        }
        self.lit(StateSet { var, mask })
    }

    pub fn and<I: IntoIterator<Item = NodeId>>(&mut self, children: I) -> NodeId {
        self.connective(children, true)
    }

    pub fn or<I: IntoIterator<Item = NodeId>>(&mut self, children: I) -> NodeId {
        self.connective(children, false)
    }

    pub fn and2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.and([a, b])
    }

    pub fn or2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.or([a, b])
    }

    fn connective<I: IntoIterator<Item = NodeId>>(&mut self, children: I, conj: bool) -> NodeId {
        let (neutral, absorbing) = if conj {
            (NodeId::TRUE, NodeId::FALSE)
        } else {
            (NodeId::FALSE, NodeId::TRUE)
        };
        let mut buf: SmallVec<[NodeId; 8]> = SmallVec::new();
        for c in children {
            if c == absorbing {
                return absorbing;
            }
            if c == neutral {
                continue;
            }
            match (&self.nodes[c.index()], conj) {
                (NnfNode::And(cs), true) | (NnfNode::Or(cs), false) => buf.extend_from_slice(cs),
                _ => buf.push(c),
            }
        }
        buf.sort_unstable();
        buf.dedup();
        match buf.len() {
            0 => neutral,
            1 => buf[0],
            _ => {
                let cs: Box<[NodeId]> = buf.into_vec().into_boxed_slice();
                self.intern(if conj { NnfNode::And(cs) } else { NnfNode::Or(cs) })
            }
        }
    }

    /// Ids reachable from `root`, ascending (children first).
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = FxHashSet::default();
        let mut stack = vec![root];
        seen.insert(root);
        while let Some(id) = stack.pop() {
            for &c in self.node(id).children() {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        let mut out: Vec<NodeId> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Number of distinct nodes reachable from `root`.
    pub fn size(&self, root: NodeId) -> usize {
        self.reachable(root).len()
    }

    /// Number of parent-child edges in the sub-DAG under `root`.
    pub fn edge_count(&self, root: NodeId) -> usize {
        self.reachable(root)
            .iter()
            .map(|&id| self.node(id).children().len())
            .sum()
    }

    /// Variable set of every node reachable from `root`.
    pub fn var_sets(&self, root: NodeId) -> FxHashMap<NodeId, VarSet> {
        let mut out: FxHashMap<NodeId, VarSet> = FxHashMap::default();
        for id in self.reachable(root) {
            let vs = match self.node(id) {
                NnfNode::False | NnfNode::True => VarSet::new(),
                NnfNode::Lit(l) => VarSet::singleton(l.var),
                NnfNode::And(cs) | NnfNode::Or(cs) => {
                    let mut acc = VarSet::new();
                    for c in cs.iter() {
                        acc.union_with(&out[c]);
                    }
                    acc
                }
            };
            out.insert(id, vs);
        }
        out
    }

    pub fn vars(&self, root: NodeId) -> VarSet {
        self.var_sets(root).remove(&root).unwrap_or_default()
    }

    pub fn evaluator(&self, root: NodeId) -> Evaluator {
        Evaluator::new(self, root)
    }

    pub fn evaluate(&self, root: NodeId, world: &World) -> Result<bool> {
        world.check(&self.space)?;
        Ok(self.evaluator(root).eval(world))
    }

    /// Number of models, by enumerating all worlds in 64-wide batches.
    pub fn count_models(&self, root: NodeId) -> Result<u128> {
        self.count_models_capped(root, DEFAULT_COUNT_CAP)
    }

    pub fn count_models_capped(&self, root: NodeId, cap: u128) -> Result<u128> {
        let total = self.space.world_count().unwrap_or(u128::MAX);
        if total > cap {
            return Err(Error::CapExceeded {
                what: "model counting world enumeration",
                cap: usize::try_from(cap).unwrap_or(usize::MAX),
            });
        }
        let ev = self.evaluator(root);
        let mut count = 0u128;
        for batch in WorldBatches::new(&self.space) {
            count += (ev.eval_batch(&batch) & batch.live).count_ones() as u128;
        }
        Ok(count)
    }

    /// Copies the sub-DAG under `root` of `other` into this arena.
    pub fn import(&mut self, other: &Nnf, root: NodeId) -> NodeId {
        let mut map: FxHashMap<NodeId, NodeId> = FxHashMap::default();
        for id in other.reachable(root) {
            let new = match other.node(id) {
                NnfNode::False => NodeId::FALSE,
                NnfNode::True => NodeId::TRUE,
                NnfNode::Lit(l) => self.lit(*l),
                NnfNode::And(cs) => {
                    let cs: Vec<NodeId> = cs.iter().map(|c| map[c]).collect();
                    self.and(cs)
                }
                NnfNode::Or(cs) => {
                    let cs: Vec<NodeId> = cs.iter().map(|c| map[c]).collect();
                    self.or(cs)
                }
            };
            map.insert(id, new);
        }
        map[&root]
    }

    pub fn to_json(&self, root: NodeId) -> CircuitJson {
        let order = self.reachable(root);
        let index: FxHashMap<NodeId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let nodes = order
            .iter()
            .map(|&id| match self.node(id) {
                NnfNode::False => NodeJson::False,
                NnfNode::True => NodeJson::True,
                NnfNode::Lit(l) => NodeJson::Lit {
                    var: l.var,
                    states: mask_states(l.mask).collect(),
                },
                NnfNode::And(cs) => NodeJson::And {
                    args: cs.iter().map(|c| index[c]).collect(),
                },
                NnfNode::Or(cs) => NodeJson::Or {
                    args: cs.iter().map(|c| index[c]).collect(),
                },
            })
            .collect();
        CircuitJson {
            features: self.space.vars().to_vec(),
            nodes,
            root: index[&root],
        }
    }

    pub fn from_json(json: &CircuitJson) -> Result<(Nnf, NodeId)> {
        let space = Arc::new(FeatureSpace::new(json.features.clone())?);
        let mut nnf = Nnf::new(space);
        let root = nnf.load_nodes(&json.nodes, json.root)?;
        Ok((nnf, root))
    }

    /// Loads circuit nodes into this arena; the node list must reference
    /// only earlier indices.
    pub fn load_nodes(&mut self, nodes: &[NodeJson], root: usize) -> Result<NodeId> {
        let mut ids: Vec<NodeId> = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            let arg = |a: &usize| -> Result<NodeId> {
                if *a >= i {
                    return Err(Error::Schema(format!(
                        "node {i} references {a}, which is not an earlier node"
                    )));
                }
                Ok(ids[*a])
            };
            let id = match n {
                NodeJson::True => NodeId::TRUE,
                NodeJson::False => NodeId::FALSE,
                NodeJson::Lit { var, states } => {
                    let l = StateSet::from_states(&self.space, *var, states)?;
                    self.lit(l)
                }
                NodeJson::And { args } => {
                    let cs = args.iter().map(arg).collect::<Result<Vec<_>>>()?;
                    self.and(cs)
                }
                NodeJson::Or { args } => {
                    let cs = args.iter().map(arg).collect::<Result<Vec<_>>>()?;
                    self.or(cs)
                }
            };
            ids.push(id);
        }
        ids.get(root)
            .copied()
            .ok_or_else(|| Error::Schema(format!("root index {root} out of range")))
    }

    /// Renders a sub-DAG as a formula string, for diagnostics and tests.
    pub fn display(&self, root: NodeId) -> String {
        match self.node(root) {
            NnfNode::False => "false".into(),
            NnfNode::True => "true".into(),
            NnfNode::Lit(l) => {
                let v = self.space.var(l.var);
                let states = self.space.state_names(l.var, l.mask);
                if states.len() == 1 {
                    format!("{}={}", v.name, states[0])
                } else {
                    format!("{}∈{{{}}}", v.name, states.join(","))
                }
            }
            NnfNode::And(cs) => format!(
                "({})",
                cs.iter().map(|&c| self.display(c)).collect::<Vec<_>>().join(" ∧ ")
            ),
            NnfNode::Or(cs) => format!(
                "({})",
                cs.iter().map(|&c| self.display(c)).collect::<Vec<_>>().join(" ∨ ")
            ),
        }
    }
}

/// Circuit interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub features: Vec<Variable>,
    pub nodes: Vec<NodeJson>,
    pub root: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum NodeJson {
    True,
    False,
    Lit { var: usize, states: Vec<usize> },
    And { args: Vec<usize> },
    Or { args: Vec<usize> },
}

#[derive(Debug, Clone)]
enum Instr {
    Const(bool),
    Lit { var: usize, mask: u64 },
    And(std::ops::Range<usize>),
    Or(std::ops::Range<usize>),
}

/// A circuit flattened into a straight-line program for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    instrs: Vec<Instr>,
    args: Vec<usize>,
}

impl Evaluator {
    pub fn new(nnf: &Nnf, root: NodeId) -> Self {
        let order = nnf.reachable(root);
        let index: FxHashMap<NodeId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut args = Vec::new();
        let instrs = order
            .iter()
            .map(|&id| match nnf.node(id) {
                NnfNode::False => Instr::Const(false),
                NnfNode::True => Instr::Const(true),
                NnfNode::Lit(l) => Instr::Lit {
                    var: l.var,
                    mask: l.mask,
                },
                NnfNode::And(cs) | NnfNode::Or(cs) => {
                    let start = args.len();
                    args.extend(cs.iter().map(|c| index[c]));
                    let r = start..args.len();
                    if matches!(nnf.node(id), NnfNode::And(_)) {
                        Instr::And(r)
                    } else {
                        Instr::Or(r)
                    }
                }
            })
            .collect();
        Evaluator { instrs, args }
    }

    pub fn eval(&self, world: &World) -> bool {
        let mut vals = Vec::with_capacity(self.instrs.len());
        for ins in &self.instrs {
            let v = match ins {
                Instr::Const(b) => *b,
                Instr::Lit { var, mask } => mask >> world.state(*var) & 1 == 1,
                Instr::And(r) => self.args[r.clone()].iter().all(|&a| vals[a]),
                Instr::Or(r) => self.args[r.clone()].iter().any(|&a| vals[a]),
            };
            vals.push(v);
        }
        *vals.last().expect("evaluator has at least one instruction")
    }

    /// Evaluates up to 64 worlds at once; bit `i` of the result belongs to
    /// lane `i` of the batch.
    pub fn eval_batch(&self, batch: &WorldBatch) -> u64 {
        let mut vals: Vec<u64> = Vec::with_capacity(self.instrs.len());
        for ins in &self.instrs {
            let v = match ins {
                Instr::Const(b) => {
                    if *b {
                        u64::MAX
                    } else {
                        0
                    }
                }
                Instr::Lit { var, mask } => mask_states(*mask).map(|s| batch.lanes[*var][s]).fold(0, |a, b| a | b),
                Instr::And(r) => self.args[r.clone()].iter().fold(u64::MAX, |acc, &a| acc & vals[a]),
                Instr::Or(r) => self.args[r.clone()].iter().fold(0, |acc, &a| acc | vals[a]),
            };
            vals.push(v);
        }
        *vals.last().expect("evaluator has at least one instruction")
    }
}

/// Up to 64 worlds packed lane-wise: `lanes[var][state]` has bit `i` set
/// iff world `i` assigns `state` to `var`.
#[derive(Debug, Clone)]
pub struct WorldBatch {
    pub lanes: Vec<Vec<u64>>,
    pub live: u64,
    pub worlds: Vec<World>,
}

impl WorldBatch {
    pub fn from_worlds(space: &FeatureSpace, worlds: Vec<World>) -> Self {
        assert!(worlds.len() <= 64);
        let mut lanes: Vec<Vec<u64>> = (0..space.len()).map(|v| vec![0; space.num_states(v)]).collect();
        for (i, w) in worlds.iter().enumerate() {
            for (v, s) in w.states().enumerate() {
                lanes[v][s] |= 1 << i;
            }
        }
        let live = if worlds.len() == 64 {
            u64::MAX
        } else {
            (1u64 << worlds.len()) - 1
        };
        WorldBatch { lanes, live, worlds }
    }
}

/// Enumerates every world of a space in mixed-radix order (last variable
/// fastest), 64 at a time.
pub struct WorldBatches<'a> {
    space: &'a FeatureSpace,
    iter: WorldIter<'a>,
}

impl<'a> WorldBatches<'a> {
    pub fn new(space: &'a FeatureSpace) -> Self {
        WorldBatches {
            space,
            iter: WorldIter::new(space),
        }
    }
}

impl Iterator for WorldBatches<'_> {
    type Item = WorldBatch;

    fn next(&mut self) -> Option<WorldBatch> {
        let worlds: Vec<World> = self.iter.by_ref().take(64).collect();
        if worlds.is_empty() {
            None
        } else {
            Some(WorldBatch::from_worlds(self.space, worlds))
        }
    }
}

/// Odometer over all worlds of a feature space; visits each exactly once.
pub struct WorldIter<'a> {
    space: &'a FeatureSpace,
    next: Option<Vec<u8>>,
}

impl<'a> WorldIter<'a> {
    pub fn new(space: &'a FeatureSpace) -> Self {
        WorldIter {
            space,
            next: Some(vec![0; space.len()]),
        }
    }
}

impl Iterator for WorldIter<'_> {
    type Item = World;

    fn next(&mut self) -> Option<World> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut v = succ.len();
        let mut done = true;
        while v > 0 {
            v -= 1;
            succ[v] += 1;
            if (succ[v] as usize) < self.space.num_states(v) {
                done = false;
                break;
            }
            succ[v] = 0;
        }
        if !done {
            self.next = Some(succ);
        }
        Some(World::from_raw(cur))
    }
}
