//! Path-tracking conjunction and disjunction of decision graphs.

use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::{Dg, DgId, DgNode, Path};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    And,
    Or,
}

/// Resource limits for one compilation task.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub nodes: Option<usize>,
    pub time: Option<Duration>,
}

type Key = (DgId, DgId, Op, SmallVec<[u64; 8]>);

/// Memo tables and limits shared by every Apply call of one task.
#[derive(Debug)]
pub struct ApplyCtx {
    apply_cache: FxHashMap<Key, DgId>,
    restrict_cache: FxHashMap<(DgId, SmallVec<[u64; 8]>), DgId>,
    use_cache: bool,
    deadline: Option<(Instant, Duration)>,
    ticks: u32,
}

impl ApplyCtx {
    pub fn new(budget: Budget) -> Self {
        ApplyCtx {
            apply_cache: FxHashMap::default(),
            restrict_cache: FxHashMap::default(),
            use_cache: true,
            deadline: budget.time.map(|t| (Instant::now() + t, t)),
            ticks: 0,
        }
    }

    /// Disables memoization; results stay equivalent but may differ
    /// structurally.
    pub fn without_cache(mut self) -> Self {
        self.use_cache = false;
        self
    }

    pub fn cache_len(&self) -> usize {
        self.apply_cache.len()
    }

    fn tick(&mut self) -> Result<()> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(1024) {
            if let Some((deadline, total)) = self.deadline {
                if Instant::now() > deadline {
                    return Err(Error::TimeBudget(total.as_secs_f64()));
                }
            }
        }
        Ok(())
    }
}

impl Dg {
    /// Combines two graphs under `op`. The result agrees with `a op b` on
    /// every world consistent with `path` and is weak test-once whenever
    /// the inputs are.
    pub fn apply(&mut self, a: DgId, b: DgId, op: Op, path: &Path, ctx: &mut ApplyCtx) -> Result<DgId> {
        if path.masks().len() != self.space.len() || path.masks().contains(&0) {
            return Err(Error::Precondition(
                "path must give every variable a feasible state".into(),
            ));
        }
        let mut p = path.clone();
        self.apply_in(a, b, op, &mut p, ctx)
    }

    fn projection(&self, a: DgId, b: DgId, p: &Path) -> SmallVec<[u64; 8]> {
        self.vars(a).union(self.vars(b)).iter().map(|v| p.get(v)).collect()
    }

    fn apply_in(&mut self, a: DgId, b: DgId, op: Op, p: &mut Path, ctx: &mut ApplyCtx) -> Result<DgId> {
        ctx.tick()?;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // Terminal cases; `a` is the smaller id so constants come first.
        match (op, a) {
            (Op::And, DgId::FALSE) | (Op::Or, DgId::TRUE) => return Ok(a),
            (Op::And, DgId::TRUE) | (Op::Or, DgId::FALSE) => return self.restrict_in(b, p, ctx),
            _ => {}
        }
        if a == b {
            return self.restrict_in(a, p, ctx);
        }

        let key = (a, b, op, self.projection(a, b, p));
        if ctx.use_cache {
            if let Some(&hit) = ctx.apply_cache.get(&key) {
                return Ok(hit);
            }
        }

        let (DgNode::Decision { var: va, edges: ea }, DgNode::Decision { var: vb, edges: eb }) =
            (self.node(a).clone(), self.node(b).clone())
        else {
            unreachable!("terminals handled above")
        };

        // Expand the lower-indexed variable first; op is commutative.
        let (var, outer, inner, other) = match va.cmp(&vb) {
            std::cmp::Ordering::Equal => (va, ea, Some(eb), b),
            std::cmp::Ordering::Less => (va, ea, None, b),
            std::cmp::Ordering::Greater => (vb, eb, None, a),
        };
        let feasible = p.get(var);
        let mut edges = Vec::new();
        for &(s1, c1) in outer.iter() {
            match &inner {
                Some(eb) => {
                    for &(s2, c2) in eb.iter() {
                        let s = s1 & s2 & feasible;
                        if s != 0 {
                            p.set(var, s);
                            let c = self.apply_in(c1, c2, op, p, ctx);
                            p.set(var, feasible);
                            edges.push((s, c?));
                        }
                    }
                }
                None => {
                    let s = s1 & feasible;
                    if s != 0 {
                        p.set(var, s);
                        let c = self.apply_in(c1, other, op, p, ctx);
                        p.set(var, feasible);
                        edges.push((s, c?));
                    }
                }
            }
        }
        let out = self.decision(var, feasible, edges)?;
        if ctx.use_cache {
            ctx.apply_cache.insert(key, out);
        }
        Ok(out)
    }

    pub(crate) fn restrict_in(&mut self, d: DgId, p: &mut Path, ctx: &mut ApplyCtx) -> Result<DgId> {
        let DgNode::Decision { var, edges } = self.node(d).clone() else {
            return Ok(d);
        };
        ctx.tick()?;
        let key = (d, self.vars(d).iter().map(|v| p.get(v)).collect::<SmallVec<_>>());
        if ctx.use_cache {
            if let Some(&hit) = ctx.restrict_cache.get(&key) {
                return Ok(hit);
            }
        }
        let feasible = p.get(var);
        let mut out_edges = Vec::with_capacity(edges.len());
        for &(m, c) in edges.iter() {
            let s = m & feasible;
            if s != 0 {
                p.set(var, s);
                let r = self.restrict_in(c, p, ctx);
                p.set(var, feasible);
                out_edges.push((s, r?));
            }
        }
        let out = self.decision(var, feasible, out_edges)?;
        if ctx.use_cache {
            ctx.restrict_cache.insert(key, out);
        }
        Ok(out)
    }
}
