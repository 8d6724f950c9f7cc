//! Odd-even merge sorting networks over an abstract comparator.
//!
//! Lists are sorted in descending order: position 0 holds the "largest"
//! value. All indices are 0-based; output `j` (0-based) of a network over
//! circuits is true exactly where at least `j + 1` inputs are true.

use rustc_hash::FxHashMap;

use crate::circuits::{Nnf, NodeId};
use crate::dg::{ApplyCtx, Dg, DgId, Op, Path};
use crate::error::{Error, Result};

/// How a comparator combines its two inputs.
pub trait Comparator {
    type Value: Clone;

    fn max(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn min(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn falsity(&mut self) -> Self::Value;

    /// One comparator: `(max, min)`.
    fn compare(&mut self, a: &Self::Value, b: &Self::Value) -> Result<(Self::Value, Self::Value)> {
        Ok((self.max(a, b)?, self.min(a, b)?))
    }
}

/// Sorts `inputs` (length a power of two) with the odd-even merge network.
pub fn sortnet<C: Comparator>(inputs: Vec<C::Value>, cmp: &mut C) -> Result<Vec<C::Value>> {
    let n = inputs.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    sort_rec(inputs, cmp)
}

fn sort_rec<C: Comparator>(mut inputs: Vec<C::Value>, cmp: &mut C) -> Result<Vec<C::Value>> {
    if inputs.len() == 1 {
        return Ok(inputs);
    }
    let upper = inputs.split_off(inputs.len() / 2);
    let a = sort_rec(inputs, cmp)?;
    let b = sort_rec(upper, cmp)?;
    merge_rec(a, b, cmp)
}

/// Merges two sorted lists of equal power-of-two length.
pub fn merge<C: Comparator>(a: Vec<C::Value>, b: Vec<C::Value>, cmp: &mut C) -> Result<Vec<C::Value>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !a.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(a.len()));
    }
    merge_rec(a, b, cmp)
}

fn merge_rec<C: Comparator>(a: Vec<C::Value>, b: Vec<C::Value>, cmp: &mut C) -> Result<Vec<C::Value>> {
    let m = a.len();
    if m == 1 {
        let (hi, lo) = cmp.compare(&a[0], &b[0])?;
        return Ok(vec![hi, lo]);
    }
    // 1-based odd positions are the 0-based even ones.
    let (a_odd, a_even) = deal(a);
    let (b_odd, b_even) = deal(b);
    let c = merge_rec(a_odd, b_odd, cmp)?;
    let d = merge_rec(a_even, b_even, cmp)?;
    let mut y = Vec::with_capacity(2 * m);
    y.push(c[0].clone());
    for i in 1..m {
        let (hi, lo) = cmp.compare(&c[i], &d[i - 1])?;
        y.push(hi);
        y.push(lo);
    }
    y.push(d[m - 1].clone());
    Ok(y)
}

fn deal<T>(xs: Vec<T>) -> (Vec<T>, Vec<T>) {
    let mut even = Vec::with_capacity(xs.len() / 2);
    let mut odd = Vec::with_capacity(xs.len() / 2);
    for (i, x) in xs.into_iter().enumerate() {
        if i % 2 == 0 {
            even.push(x);
        } else {
            odd.push(x);
        }
    }
    (even, odd)
}

/// Sorts the interleaving `hi_0, lo_0, hi_1, lo_1, ...` when every pair is
/// already sorted, omitting the first comparator layer.
pub fn sortnet_presorted_pairs<C: Comparator>(pairs: Vec<(C::Value, C::Value)>, cmp: &mut C) -> Result<Vec<C::Value>> {
    let n = pairs.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(2 * n));
    }
    pairs_rec(pairs, cmp)
}

fn pairs_rec<C: Comparator>(mut pairs: Vec<(C::Value, C::Value)>, cmp: &mut C) -> Result<Vec<C::Value>> {
    if pairs.len() == 1 {
        let (hi, lo) = pairs.pop().expect("one pair");
        return Ok(vec![hi, lo]);
    }
    let upper = pairs.split_off(pairs.len() / 2);
    let a = pairs_rec(pairs, cmp)?;
    let b = pairs_rec(upper, cmp)?;
    merge_rec(a, b, cmp)
}

/// Number of comparators in the odd-even merge network on `n = 2^p`
/// inputs: `(p² − p + 4)·2^(p−2) − 1`.
pub fn comparator_count(n: usize) -> usize {
    assert!(n.is_power_of_two());
    let p = n.trailing_zeros() as usize;
    match p {
        0 => 0,
        1 => 1,
        _ => (p * p - p + 4) * (1 << (p - 2)) - 1,
    }
}

/// Counts comparator applications of an inner semantics.
#[derive(Debug)]
pub struct Counting<C> {
    pub inner: C,
    pub comparators: usize,
}

impl<C> Counting<C> {
    pub fn new(inner: C) -> Self {
        Counting { inner, comparators: 0 }
    }
}

impl<C: Comparator> Comparator for Counting<C> {
    type Value = C::Value;

    fn max(&mut self, a: &C::Value, b: &C::Value) -> Result<C::Value> {
        self.inner.max(a, b)
    }

    fn min(&mut self, a: &C::Value, b: &C::Value) -> Result<C::Value> {
        self.inner.min(a, b)
    }

    fn falsity(&mut self) -> C::Value {
        self.inner.falsity()
    }

    fn compare(&mut self, a: &C::Value, b: &C::Value) -> Result<(C::Value, C::Value)> {
        self.comparators += 1;
        self.inner.compare(a, b)
    }
}

/// Plain booleans: max is `or`, min is `and`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Boolean;

impl Comparator for Boolean {
    type Value = bool;

    fn max(&mut self, a: &bool, b: &bool) -> Result<bool> {
        Ok(*a || *b)
    }

    fn min(&mut self, a: &bool, b: &bool) -> Result<bool> {
        Ok(*a && *b)
    }

    fn falsity(&mut self) -> bool {
        false
    }
}

/// Comparators as NNF disjunction and conjunction constructors.
pub struct NnfSemantics<'a>(pub &'a mut Nnf);

impl Comparator for NnfSemantics<'_> {
    type Value = NodeId;

    fn max(&mut self, a: &NodeId, b: &NodeId) -> Result<NodeId> {
        Ok(self.0.or2(*a, *b))
    }

    fn min(&mut self, a: &NodeId, b: &NodeId) -> Result<NodeId> {
        Ok(self.0.and2(*a, *b))
    }

    fn falsity(&mut self) -> NodeId {
        NodeId::FALSE
    }
}

/// Comparators as Apply over weak test-once decision graphs.
pub struct DgSemantics<'a> {
    pub dg: &'a mut Dg,
    pub ctx: &'a mut ApplyCtx,
    pub path: Path,
}

impl<'a> DgSemantics<'a> {
    pub fn new(dg: &'a mut Dg, ctx: &'a mut ApplyCtx) -> Self {
        let path = Path::full(dg.space());
        DgSemantics { dg, ctx, path }
    }
}

impl Comparator for DgSemantics<'_> {
    type Value = DgId;

    fn max(&mut self, a: &DgId, b: &DgId) -> Result<DgId> {
        self.dg.apply(*a, *b, Op::Or, &self.path, self.ctx)
    }

    fn min(&mut self, a: &DgId, b: &DgId) -> Result<DgId> {
        self.dg.apply(*a, *b, Op::And, &self.path, self.ctx)
    }

    fn falsity(&mut self) -> DgId {
        DgId::FALSE
    }
}

/// A comparator placed on two wires of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Placement {
    /// Earliest parallel layer, 1-based.
    pub layer: usize,
    /// Wire receiving the max, 1-based; always the smaller index.
    pub i: usize,
    /// Wire receiving the min, 1-based.
    pub j: usize,
}

/// Tracks which wire each value sits on. Running a network under this
/// semantics records its comparator schedule.
#[derive(Debug, Default)]
pub struct Wires {
    pub schedule: Vec<Placement>,
}

impl Comparator for Wires {
    /// `(wire, depth)`, both 0-based.
    type Value = (usize, usize);

    fn max(&mut self, _: &Self::Value, _: &Self::Value) -> Result<Self::Value> {
        unreachable!("wire tracking only places whole comparators")
    }

    fn min(&mut self, _: &Self::Value, _: &Self::Value) -> Result<Self::Value> {
        unreachable!("wire tracking only places whole comparators")
    }

    fn falsity(&mut self) -> Self::Value {
        unreachable!("wire tracking has no constants")
    }

    fn compare(&mut self, a: &Self::Value, b: &Self::Value) -> Result<(Self::Value, Self::Value)> {
        let (i, j) = (a.0.min(b.0), a.0.max(b.0));
        let layer = a.1.max(b.1) + 1;
        self.schedule.push(Placement {
            layer,
            i: i + 1,
            j: j + 1,
        });
        Ok(((i, layer), (j, layer)))
    }
}

/// Comparator schedule of the network on `n` inputs (a power of two),
/// optionally without the first layer for presorted pairs.
pub fn schedule(n: usize, presorted_pairs: bool) -> Result<Vec<Placement>> {
    let mut w = Wires::default();
    let out = if presorted_pairs {
        if n < 2 {
            return Err(Error::NotPowerOfTwo(n));
        }
        let pairs = (0..n / 2).map(|l| ((2 * l, 0), (2 * l + 1, 0))).collect();
        sortnet_presorted_pairs(pairs, &mut w)?
    } else {
        sortnet((0..n).map(|i| (i, 0)).collect(), &mut w)?
    };
    debug_assert!(out.iter().enumerate().all(|(k, v)| v.0 == k));
    let mut s = w.schedule;
    s.sort_by_key(|p| (p.layer, p.i));
    Ok(s)
}

/// A network recorded as a gate list, so that only the gates an output
/// depends on need to be evaluated.
#[derive(Debug, Clone)]
pub struct Network {
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Gate {
    Input(usize),
    False,
    Max(usize, usize),
    Min(usize, usize),
}

struct Recorder {
    gates: Vec<Gate>,
    unique: FxHashMap<Gate, usize>,
}

impl Recorder {
    fn gate(&mut self, g: Gate) -> usize {
        // Constant false folds away: max(F, x) = x, min(F, x) = F.
        let g = match g {
            Gate::Max(a, b) if self.gates[a] == Gate::False => return b,
            Gate::Max(a, b) if self.gates[b] == Gate::False => return a,
            Gate::Min(a, _) if self.gates[a] == Gate::False => return a,
            Gate::Min(_, b) if self.gates[b] == Gate::False => return b,
            Gate::Max(a, b) | Gate::Min(a, b) if a == b => return a,
            Gate::Max(a, b) if a > b => Gate::Max(b, a),
            Gate::Min(a, b) if a > b => Gate::Min(b, a),
            g => g,
        };
        *self.unique.entry(g).or_insert_with(|| {
            self.gates.push(g);
            self.gates.len() - 1
        })
    }
}

impl Comparator for Recorder {
    type Value = usize;

    fn max(&mut self, a: &usize, b: &usize) -> Result<usize> {
        Ok(self.gate(Gate::Max(*a, *b)))
    }

    fn min(&mut self, a: &usize, b: &usize) -> Result<usize> {
        Ok(self.gate(Gate::Min(*a, *b)))
    }

    fn falsity(&mut self) -> usize {
        self.gate(Gate::False)
    }
}

/// Input slot of a recorded network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Input(usize),
    False,
}

impl Network {
    /// Records the full network over `inputs`.
    pub fn sorted(inputs: &[Slot]) -> Result<Self> {
        let mut r = Recorder::new();
        let xs = inputs.iter().map(|s| r.slot(*s)).collect();
        let outputs = sortnet(xs, &mut r)?;
        Ok(Network {
            gates: r.gates,
            outputs,
        })
    }

    /// Records the network over interleaved presorted pairs.
    pub fn sorted_pairs(pairs: &[(Slot, Slot)]) -> Result<Self> {
        let mut r = Recorder::new();
        let xs = pairs.iter().map(|(h, l)| (r.slot(*h), r.slot(*l))).collect();
        let outputs = sortnet_presorted_pairs(xs, &mut r)?;
        Ok(Network {
            gates: r.gates,
            outputs,
        })
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates output `k` under `cmp`, touching only the gates it depends
    /// on. `inputs[i]` is the value of `Slot::Input(i)`.
    pub fn evaluate<C: Comparator>(&self, k: usize, inputs: &[C::Value], cmp: &mut C) -> Result<C::Value> {
        let target = self.outputs[k];
        let mut needed = vec![false; self.gates.len()];
        needed[target] = true;
        for g in (0..=target).rev() {
            if needed[g] {
                if let Gate::Max(a, b) | Gate::Min(a, b) = self.gates[g] {
                    needed[a] = true;
                    needed[b] = true;
                }
            }
        }
        let mut vals: Vec<Option<C::Value>> = vec![None; target + 1];
        for g in 0..=target {
            if !needed[g] {
                continue;
            }
            let v = match self.gates[g] {
                Gate::Input(i) => inputs[i].clone(),
                Gate::False => cmp.falsity(),
                Gate::Max(a, b) => cmp.max(
                    vals[a].as_ref().expect("topological"),
                    vals[b].as_ref().expect("topological"),
                )?,
                Gate::Min(a, b) => cmp.min(
                    vals[a].as_ref().expect("topological"),
                    vals[b].as_ref().expect("topological"),
                )?,
            };
            vals[g] = Some(v);
        }
        Ok(vals[target].take().expect("target evaluated"))
    }

    /// Number of `max`/`min` gates output `k` depends on.
    pub fn cone_size(&self, k: usize) -> usize {
        let target = self.outputs[k];
        let mut needed = vec![false; self.gates.len()];
        needed[target] = true;
        let mut count = 0;
        for g in (0..=target).rev() {
            if needed[g] {
                if let Gate::Max(a, b) | Gate::Min(a, b) = self.gates[g] {
                    needed[a] = true;
                    needed[b] = true;
                    count += 1;
                }
            }
        }
        count
    }
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            gates: Vec::new(),
            unique: FxHashMap::default(),
        }
    }

    fn slot(&mut self, s: Slot) -> usize {
        match s {
            Slot::Input(i) => self.gate(Gate::Input(i)),
            Slot::False => self.gate(Gate::False),
        }
    }
}
