//! Brute-force ground truth on enumerable feature spaces. Everything here
//! is computed from forest votes alone, never from compiled circuits.

use std::collections::BTreeSet;

use crate::circuits::{mask_states, FeatureSpace, Nnf, NodeId, StateSet, VarSet, World, WorldIter};
use crate::error::{Error, Result};
use crate::explain::{Clause, Term};
use crate::forest::Forest;

/// Default limit on the number of worlds the oracle will enumerate.
pub const DEFAULT_WORLD_CAP: u128 = 2_000_000;

/// Variables on which two worlds disagree.
pub fn dvars(a: &World, b: &World) -> VarSet {
    a.states()
        .zip(b.states())
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(v, _)| v)
        .collect()
}

/// Number of the given formulas satisfied at `world`.
pub fn count_satisfying(nnf: &Nnf, roots: &[NodeId], world: &World) -> usize {
    roots.iter().filter(|&&r| nnf.evaluator(r).eval(world)).count()
}

/// Truth table of a class formula, indexed in `WorldIter` order.
#[derive(Debug, Clone)]
pub struct Table {
    bits: Vec<bool>,
    strides: Vec<usize>,
}

impl Table {
    fn build(space: &FeatureSpace, cap: u128, f: impl Fn(&World) -> bool) -> Result<Self> {
        let count = space.world_count().filter(|&c| c <= cap).ok_or(Error::CapExceeded {
            what: "oracle world enumeration",
            cap: usize::try_from(cap).unwrap_or(usize::MAX),
        })?;
        let mut strides = vec![1usize; space.len()];
        for v in (0..space.len().saturating_sub(1)).rev() {
            strides[v] = strides[v + 1] * space.num_states(v + 1);
        }
        let mut bits = Vec::with_capacity(count as usize);
        bits.extend(WorldIter::new(space).map(|w| f(&w)));
        Ok(Table { bits, strides })
    }

    pub fn index(&self, w: &World) -> usize {
        w.states().zip(&self.strides).map(|(s, k)| s * k).sum()
    }

    pub fn get(&self, w: &World) -> bool {
        self.bits[self.index(w)]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of worlds where the formula holds.
    pub fn models(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Reference answers for one decision: an instance and the formula that
/// holds of it (a class formula, or the negation of one for contrastive
/// questions).
pub struct Oracle<'a> {
    space: &'a FeatureSpace,
    instance: World,
    table: Table,
}

impl<'a> Oracle<'a> {
    /// The decision "`instance` is in `class`".
    pub fn for_class(forest: &'a Forest, instance: &World, class: usize, cap: u128) -> Result<Self> {
        forest.check_class(class)?;
        Self::new(forest, instance, cap, |w| forest.classify_unchecked(w).contains(&class))
    }

    /// The decision "`instance` is not in `class`".
    pub fn against_class(forest: &'a Forest, instance: &World, class: usize, cap: u128) -> Result<Self> {
        forest.check_class(class)?;
        Self::new(forest, instance, cap, |w| {
            !forest.classify_unchecked(w).contains(&class)
        })
    }

    fn new(forest: &'a Forest, instance: &World, cap: u128, f: impl Fn(&World) -> bool) -> Result<Self> {
        let space = forest.space();
        instance.check(space)?;
        if space.len() > 24 {
            return Err(Error::CapExceeded {
                what: "oracle variable count",
                cap: 24,
            });
        }
        let table = Table::build(space, cap, f)?;
        if !table.get(instance) {
            return Err(Error::Precondition("the instance does not satisfy the decision".into()));
        }
        Ok(Oracle {
            space,
            instance: instance.clone(),
            table,
        })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    fn n(&self) -> usize {
        self.space.len()
    }

    fn set_of(bits: u32) -> VarSet {
        mask_states(bits as u64).collect()
    }

    /// For each subset of variables, whether fixing those variables to the
    /// instance guarantees the decision.
    fn triggers(&self) -> Vec<bool> {
        let n = self.n();
        let mut spoiled = vec![false; 1 << n];
        for (w, &ok) in WorldIter::new(self.space).zip(&self.table.bits) {
            if !ok {
                let agree = (0..n)
                    .filter(|&v| w.state(v) == self.instance.state(v))
                    .fold(0u32, |m, v| m | 1 << v);
                spoiled[agree as usize] = true;
            }
        }
        // A subset is spoiled if some counterexample agrees on a superset.
        for v in 0..n {
            for s in (0..1usize << n).rev() {
                if s >> v & 1 == 0 && spoiled[s | 1 << v] {
                    spoiled[s] = true;
                }
            }
        }
        spoiled.into_iter().map(|b| !b).collect()
    }

    /// Sufficient reasons: minimal subsets of the instance whose every
    /// completion satisfies the decision.
    pub fn sufficient_reasons(&self) -> Vec<Term> {
        let n = self.n();
        let trig = self.triggers();
        let mut out: Vec<Term> = (0..1u32 << n)
            .filter(|&s| trig[s as usize] && (0..n).all(|v| s >> v & 1 == 0 || !trig[(s & !(1 << v)) as usize]))
            .map(|s| Term::from_world(&self.instance, &Self::set_of(s)))
            .collect();
        out.sort();
        out
    }

    /// Necessary reasons: prime implicates of the disjunction of the
    /// sufficient reasons, i.e. minimal variable sets meeting every one.
    pub fn necessary_reasons(&self) -> Vec<Clause> {
        let n = self.n();
        let srs: Vec<u32> = self
            .sufficient_reasons()
            .iter()
            .map(|t| t.lits().iter().fold(0u32, |m, l| m | 1 << l.var))
            .collect();
        let hits = |s: u32| srs.iter().all(|&t| t & s != 0);
        let mut out: Vec<Clause> = (0..1u32 << n)
            .filter(|&s| hits(s) && (0..n).all(|v| s >> v & 1 == 0 || !hits(s & !(1 << v))))
            .map(|s| Clause::from_world(&self.instance, &Self::set_of(s)))
            .collect();
        out.sort();
        out
    }

    /// Worlds violating the decision at the smallest distance from the
    /// instance, with that distance.
    pub fn shortest_flips(&self) -> (Option<usize>, Vec<World>) {
        let mut best: Option<usize> = None;
        let mut flips = Vec::new();
        for (w, &ok) in WorldIter::new(self.space).zip(&self.table.bits) {
            if ok {
                continue;
            }
            let d = dvars(&self.instance, &w).len();
            match best {
                Some(b) if d > b => {}
                Some(b) if d == b => flips.push(w),
                _ => {
                    best = Some(d);
                    flips = vec![w];
                }
            }
        }
        flips.sort();
        (best, flips)
    }

    /// Robustness and the variable sets changed by the shortest flips.
    pub fn robustness(&self) -> (Option<usize>, Vec<VarSet>) {
        let (r, flips) = self.shortest_flips();
        let sets: BTreeSet<Vec<usize>> = flips
            .iter()
            .map(|w| dvars(&self.instance, w).iter().collect())
            .collect();
        (r, sets.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    /// Shortest general necessary reasons, by definition: for each variable
    /// set changed by a shortest flip, the strongest clauses over exactly
    /// those variables all of whose violations flip the decision.
    pub fn shortest_gnrs(&self) -> Vec<Clause> {
        let (_, flips) = self.shortest_flips();
        let (_, families) = self.robustness();
        let mut out = Vec::new();
        for vars in families {
            let vars: Vec<usize> = vars.iter().collect();
            let hit: BTreeSet<Vec<usize>> = flips
                .iter()
                .filter(|w| dvars(&self.instance, w).iter().eq(vars.iter().copied()))
                .map(|w| vars.iter().map(|&v| w.state(v)).collect())
                .collect();
            // Candidate boxes: per variable, a non-empty set of new states.
            let options: Vec<Vec<u64>> = vars
                .iter()
                .map(|&v| {
                    let others = self.space.full(v) & !(1 << self.instance.state(v));
                    let mut subs = Vec::new();
                    let mut m = others;
                    while m != 0 {
                        subs.push(m);
                        m = (m - 1) & others;
                    }
                    subs
                })
                .collect();
            let mut boxes: Vec<Vec<u64>> = Vec::new();
            let mut idx = vec![0usize; vars.len()];
            'odometer: loop {
                let b: Vec<u64> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
                if inside(&b, &hit) {
                    boxes.push(b);
                }
                let mut k = idx.len();
                loop {
                    if k == 0 {
                        break 'odometer;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        continue 'odometer;
                    }
                    idx[k] = 0;
                }
            }
            let maximal = boxes.iter().filter(|b| {
                !boxes
                    .iter()
                    .any(|c| c != *b && c.iter().zip(b.iter()).all(|(x, y)| y & !x == 0))
            });
            for b in maximal {
                let lits = vars
                    .iter()
                    .zip(b)
                    .map(|(&v, &m)| StateSet {
                        var: v,
                        mask: self.space.full(v) & !m,
                    })
                    .collect();
                out.push(Clause::new(lits));
            }
        }
        out.sort();
        out
    }
}

fn inside(b: &[u64], hit: &BTreeSet<Vec<usize>>) -> bool {
    let choices: Vec<Vec<usize>> = b.iter().map(|&m| mask_states(m).collect()).collect();
    let mut idx = vec![0usize; b.len()];
    loop {
        let point: Vec<usize> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if !hit.contains(&point) {
            return false;
        }
        let mut k = idx.len();
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub fn brute_sr(forest: &Forest, instance: &World, class: usize) -> Result<Vec<Term>> {
    Ok(Oracle::for_class(forest, instance, class, DEFAULT_WORLD_CAP)?.sufficient_reasons())
}

pub fn brute_nr(forest: &Forest, instance: &World, class: usize) -> Result<Vec<Clause>> {
    Ok(Oracle::for_class(forest, instance, class, DEFAULT_WORLD_CAP)?.necessary_reasons())
}

pub fn brute_robustness(forest: &Forest, instance: &World, class: usize) -> Result<(Option<usize>, Vec<VarSet>)> {
    Ok(Oracle::for_class(forest, instance, class, DEFAULT_WORLD_CAP)?.robustness())
}

pub fn brute_shortest_flips(forest: &Forest, instance: &World, class: usize) -> Result<Vec<World>> {
    Ok(Oracle::for_class(forest, instance, class, DEFAULT_WORLD_CAP)?
        .shortest_flips()
        .1)
}

pub fn brute_shortest_gnrs(forest: &Forest, instance: &World, class: usize) -> Result<Vec<Clause>> {
    Ok(Oracle::for_class(forest, instance, class, DEFAULT_WORLD_CAP)?.shortest_gnrs())
}

/// Contrastive explanations towards `target`: necessary reasons for the
/// instance not being in `target`.
pub fn brute_ce(forest: &Forest, instance: &World, target: usize) -> Result<Vec<Clause>> {
    Ok(Oracle::against_class(forest, instance, target, DEFAULT_WORLD_CAP)?.necessary_reasons())
}

/// Every world that differs from `instance` exactly on the clause's
/// variables and falsifies the clause.
pub fn violations(space: &FeatureSpace, instance: &World, clause: &Clause) -> Vec<World> {
    let vars = clause.vars();
    WorldIter::new(space)
        .filter(|w| dvars(instance, w) == vars && clause.violated_by(w))
        .collect()
}

#[cfg(test)]
mod tests;
