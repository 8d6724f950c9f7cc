//! Class formulas of a whole forest, built by feeding per-tree class
//! formulas through sorting networks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitJson, Evaluator, FeatureSpace, Nnf, NodeId, World, WorldBatch};
use crate::dg::{ApplyCtx, Budget, Dg, DgId, DgJson, Op, Path};
use crate::error::{Error, Result};
use crate::forest::{Forest, Polarity};
use crate::sortnet::{DgSemantics, Network, NnfSemantics, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One NNF circuit.
    Nnf,
    /// A list of weak test-once decision graphs whose conjunction is the
    /// class formula.
    DgConj,
    /// A single weak test-once decision graph.
    DgFull,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Nnf, Mode::DgConj, Mode::DgFull];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Nnf => "nnf",
            Mode::DgConj => "dg-conj",
            Mode::DgFull => "dg-full",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown mode `{s}` (nnf, dg-conj, dg-full)")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    /// Feed `(¬C^j_l, C^i_l)` as presorted pairs and skip the first
    /// comparator layer.
    pub presort_pairs: bool,
    /// Limits for decision-graph construction.
    pub budget: Budget,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            presort_pairs: true,
            budget: Budget::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    Nnf { nnf: Nnf, root: NodeId },
    Graphs { dg: Dg, roots: Vec<DgId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub trees: usize,
    pub classes: Vec<String>,
    pub presort_pairs: bool,
    pub compile_seconds: f64,
}

/// The class formula of one class of a forest.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub class: usize,
    pub mode: Mode,
    pub meta: ArtifactMeta,
    pub payload: Payload,
}

/// Size of an artifact: distinct nodes and edges reachable from its roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub nodes: usize,
    pub edges: usize,
    pub seconds: f64,
}

fn network_output(n: usize, k: usize) -> usize {
    if k == 2 {
        n.div_ceil(2) - 1
    } else {
        n - 1
    }
}

/// Compiles the class formula of `class`: a formula true exactly at the
/// worlds where `class` receives at least as many votes as any other class.
pub fn rf_class_formula(forest: &Forest, class: usize, mode: Mode, opts: &CompileOptions) -> Result<Artifact> {
    forest.check_class(class)?;
    let start = Instant::now();
    let space = forest.space().clone();
    let payload = match mode {
        Mode::Nnf => {
            let mut nnf = Nnf::new(space);
            let root = nnf_formula(forest, class, opts, &mut nnf)?;
            Payload::Nnf { nnf, root }
        }
        Mode::DgConj | Mode::DgFull => {
            let mut dg = Dg::new(space).with_node_budget(opts.budget.nodes);
            let mut ctx = ApplyCtx::new(opts.budget);
            let parts = dg_parts(forest, class, opts, &mut dg, &mut ctx)?;
            let roots = if mode == Mode::DgFull {
                let full = Path::full(dg.space());
                let mut acc = DgId::TRUE;
                for f in parts {
                    acc = dg.apply(acc, f, Op::And, &full, &mut ctx)?;
                }
                vec![acc]
            } else {
                parts
            };
            Payload::Graphs { dg, roots }
        }
    };
    Ok(Artifact {
        class,
        mode,
        meta: ArtifactMeta {
            trees: forest.trees().len(),
            classes: forest.classes().to_vec(),
            presort_pairs: opts.presort_pairs,
            compile_seconds: start.elapsed().as_secs_f64(),
        },
        payload,
    })
}

/// The networks each `F^{ij}` (or the binary shortcut) is read from, and
/// which output to read.
struct Plan {
    net: Network,
    output: usize,
}

fn plan(n: usize, k: usize, presort: bool) -> Result<Plan> {
    let m = n.next_power_of_two();
    let output = network_output(n, k);
    let net = if k == 2 {
        let slots: Vec<Slot> = (0..m)
            .map(|l| if l < n { Slot::Input(l) } else { Slot::False })
            .collect();
        Network::sorted(&slots)?
    } else {
        // Input 2l is ¬C^j_l, input 2l + 1 is C^i_l.
        let pair = |l: usize| {
            if l < n {
                (Slot::Input(2 * l), Slot::Input(2 * l + 1))
            } else {
                (Slot::False, Slot::False)
            }
        };
        if presort {
            Network::sorted_pairs(&(0..m).map(pair).collect::<Vec<_>>())?
        } else {
            let slots: Vec<Slot> = (0..m)
                .flat_map(|l| {
                    let (a, b) = pair(l);
                    [a, b]
                })
                .collect();
            Network::sorted(&slots)?
        }
    };
    Ok(Plan { net, output })
}

/// The formulas `F^{ij}` for every `j ≠ i`, or the single binary output.
pub fn nnf_parts(forest: &Forest, class: usize, opts: &CompileOptions, nnf: &mut Nnf) -> Result<Vec<NodeId>> {
    let k = forest.num_classes();
    let n = forest.trees().len();
    let plan = plan(n, k, opts.presort_pairs)?;
    let pos: Vec<NodeId> = forest
        .trees()
        .iter()
        .map(|t| t.class_formula_nnf(nnf, class, Polarity::Positive))
        .collect();
    if k == 2 {
        return Ok(vec![plan.net.evaluate(plan.output, &pos, &mut NnfSemantics(nnf))?]);
    }
    let mut parts = Vec::with_capacity(k - 1);
    for j in (0..k).filter(|&j| j != class) {
        let mut inputs = Vec::with_capacity(2 * n);
        for (l, t) in forest.trees().iter().enumerate() {
            inputs.push(t.class_formula_nnf(nnf, j, Polarity::Negative));
            inputs.push(pos[l]);
        }
        parts.push(plan.net.evaluate(plan.output, &inputs, &mut NnfSemantics(nnf))?);
    }
    Ok(parts)
}

fn nnf_formula(forest: &Forest, class: usize, opts: &CompileOptions, nnf: &mut Nnf) -> Result<NodeId> {
    let parts = nnf_parts(forest, class, opts, nnf)?;
    Ok(nnf.and(parts))
}

/// Decision-graph counterparts of [`nnf_parts`], built with Apply.
pub fn dg_parts(
    forest: &Forest,
    class: usize,
    opts: &CompileOptions,
    dg: &mut Dg,
    ctx: &mut ApplyCtx,
) -> Result<Vec<DgId>> {
    let k = forest.num_classes();
    let n = forest.trees().len();
    let plan = plan(n, k, opts.presort_pairs)?;
    let pos: Vec<DgId> = forest
        .trees()
        .iter()
        .map(|t| t.class_formula_dg(dg, class, Polarity::Positive))
        .collect::<Result<_>>()?;
    if k == 2 {
        let mut sem = DgSemantics::new(dg, ctx);
        return Ok(vec![plan.net.evaluate(plan.output, &pos, &mut sem)?]);
    }
    let mut parts = Vec::with_capacity(k - 1);
    for j in (0..k).filter(|&j| j != class) {
        let mut inputs = Vec::with_capacity(2 * n);
        for (l, t) in forest.trees().iter().enumerate() {
            inputs.push(t.class_formula_dg(dg, j, Polarity::Negative)?);
            inputs.push(pos[l]);
        }
        let mut sem = DgSemantics::new(dg, ctx);
        parts.push(plan.net.evaluate(plan.output, &inputs, &mut sem)?);
    }
    Ok(parts)
}

impl Artifact {
    pub fn space(&self) -> &Arc<FeatureSpace> {
        match &self.payload {
            Payload::Nnf { nnf, .. } => nnf.space(),
            Payload::Graphs { dg, .. } => dg.space(),
        }
    }

    pub fn class_name(&self) -> &str {
        &self.meta.classes[self.class]
    }

    pub fn evaluate(&self, world: &World) -> Result<bool> {
        world.check(self.space())?;
        Ok(match &self.payload {
            Payload::Nnf { nnf, root } => nnf.evaluate(*root, world)?,
            Payload::Graphs { dg, roots } => roots.iter().all(|&r| dg.eval_unchecked(r, world)),
        })
    }

    /// A reusable evaluator for many worlds.
    pub fn evaluator(&self) -> ArtifactEvaluator<'_> {
        match &self.payload {
            Payload::Nnf { nnf, root } => ArtifactEvaluator::Nnf(nnf.evaluator(*root)),
            Payload::Graphs { dg, roots } => ArtifactEvaluator::Graphs(dg, roots),
        }
    }

    /// The decision graphs whose conjunction is the class formula.
    pub fn graphs(&self) -> Option<(&Dg, &[DgId])> {
        match &self.payload {
            Payload::Graphs { dg, roots } => Some((dg, roots)),
            Payload::Nnf { .. } => None,
        }
    }

    pub fn size_report(&self) -> SizeReport {
        let (nodes, edges) = match &self.payload {
            Payload::Nnf { nnf, root } => (nnf.size(*root), nnf.edge_count(*root)),
            Payload::Graphs { dg, roots } => {
                let s = dg.stats(roots);
                (s.nodes, s.edges)
            }
        };
        SizeReport {
            nodes,
            edges,
            seconds: self.meta.compile_seconds,
        }
    }

    pub fn to_json(&self) -> ArtifactJson {
        let (circuit, graphs) = match &self.payload {
            Payload::Nnf { nnf, root } => (Some(nnf.to_json(*root)), None),
            Payload::Graphs { dg, roots } => (None, Some(dg.to_json(roots))),
        };
        ArtifactJson {
            class: self.class_name().to_string(),
            class_index: self.class,
            mode: self.mode,
            meta: self.meta.clone(),
            circuit,
            graphs,
        }
    }

    pub fn from_json(json: &ArtifactJson) -> Result<Self> {
        let payload = match (json.mode, &json.circuit, &json.graphs) {
            (Mode::Nnf, Some(c), None) => {
                let (nnf, root) = Nnf::from_json(c)?;
                Payload::Nnf { nnf, root }
            }
            (Mode::DgConj | Mode::DgFull, None, Some(g)) => {
                let (dg, roots) = Dg::from_json(g)?;
                if json.mode == Mode::DgFull && roots.len() != 1 {
                    return Err(Error::Schema("a dg-full artifact has exactly one root".into()));
                }
                Payload::Graphs { dg, roots }
            }
            _ => {
                return Err(Error::Schema(format!(
                    "a {} artifact needs exactly its matching payload field",
                    json.mode
                )))
            }
        };
        if json.class_index >= json.meta.classes.len() || json.meta.classes[json.class_index] != json.class {
            return Err(Error::Schema("class name and index disagree".into()));
        }
        Ok(Artifact {
            class: json.class_index,
            mode: json.mode,
            meta: json.meta.clone(),
            payload,
        })
    }
}

pub enum ArtifactEvaluator<'a> {
    Nnf(Evaluator),
    Graphs(&'a Dg, &'a [DgId]),
}

impl ArtifactEvaluator<'_> {
    pub fn eval(&self, world: &World) -> bool {
        match self {
            ArtifactEvaluator::Nnf(e) => e.eval(world),
            ArtifactEvaluator::Graphs(dg, roots) => roots.iter().all(|&r| dg.eval_unchecked(r, world)),
        }
    }

    /// Bit `i` is the value at world `i` of the batch.
    pub fn eval_batch(&self, batch: &WorldBatch) -> u64 {
        match self {
            ArtifactEvaluator::Nnf(e) => e.eval_batch(batch) & batch.live,
            ArtifactEvaluator::Graphs(..) => batch
                .worlds
                .iter()
                .enumerate()
                .fold(0, |acc, (i, w)| acc | (self.eval(w) as u64) << i),
        }
    }
}

/// Artifact interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactJson {
    pub class: String,
    pub class_index: usize,
    pub mode: Mode,
    pub meta: ArtifactMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graphs: Option<DgJson>,
}

/// Node count and build time of a compiled artifact.
pub fn nnf_size_report(artifact: &Artifact) -> SizeReport {
    artifact.size_report()
}

/// Budget from optional limits.
pub fn budget(nodes: Option<usize>, seconds: Option<f64>) -> Budget {
    Budget {
        nodes,
        time: seconds.map(Duration::from_secs_f64),
    }
}
