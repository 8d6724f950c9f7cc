use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuits::{FeatureSpace, StateSet, VarSet, World};
use crate::error::{Error, Result};

/// A literal in interchange form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LitJson {
    pub var: String,
    pub states: Vec<String>,
}

fn lits_to_json(space: &FeatureSpace, lits: &[StateSet]) -> Vec<LitJson> {
    lits.iter()
        .map(|l| LitJson {
            var: space.var(l.var).name.clone(),
            states: space.state_names(l.var, l.mask),
        })
        .collect()
}

fn lits_from_json(space: &FeatureSpace, json: &[LitJson]) -> Result<Vec<StateSet>> {
    json.iter()
        .map(|l| {
            let var = space
                .var_index(&l.var)
                .ok_or_else(|| Error::Schema(format!("unknown variable `{}`", l.var)))?;
            let states = l
                .states
                .iter()
                .map(|s| {
                    space
                        .state_index(var, s)
                        .ok_or_else(|| Error::Schema(format!("unknown state `{s}` of `{}`", l.var)))
                })
                .collect::<Result<Vec<_>>>()?;
            StateSet::from_states(space, var, &states)
        })
        .collect()
}

pub(crate) fn write_lits(
    f: &mut fmt::Formatter<'_>,
    space: &FeatureSpace,
    lits: &[StateSet],
    sep: &str,
    empty: &str,
) -> fmt::Result {
    if lits.is_empty() {
        return f.write_str(empty);
    }
    for (i, l) in lits.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        let name = &space.var(l.var).name;
        let states = space.state_names(l.var, l.mask);
        if states.len() == 1 {
            write!(f, "{name}={}", states[0])?;
        } else {
            write!(f, "{name}∈{{{}}}", states.join(","))?;
        }
    }
    Ok(())
}

/// Sorts by variable and folds literals on the same variable with `merge`.
fn normalize(mut lits: Vec<StateSet>, merge: impl Fn(u64, u64) -> u64) -> Vec<StateSet> {
    lits.sort_unstable();
    let mut out: Vec<StateSet> = Vec::with_capacity(lits.len());
    for l in lits {
        match out.last_mut() {
            Some(last) if last.var == l.var => last.mask = merge(last.mask, l.mask),
            _ => out.push(l),
        }
    }
    out
}

fn canonical_cmp(a: &[StateSet], b: &[StateSet]) -> Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.iter().map(|l| l.var).cmp(b.iter().map(|l| l.var)))
        .then_with(|| a.iter().map(|l| l.mask).cmp(b.iter().map(|l| l.mask)))
}

/// A conjunction of literals, at most one per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    lits: Vec<StateSet>,
}

/// A disjunction of literals, at most one per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<StateSet>,
}

impl Term {
    pub fn new(lits: Vec<StateSet>) -> Self {
        Term {
            lits: normalize(lits, |a, b| a & b),
        }
    }

    /// The simple term fixing each variable in `vars` to its state in `world`.
    pub fn from_world(world: &World, vars: &VarSet) -> Self {
        Term {
            lits: vars.iter().map(|v| StateSet::simple(v, world.state(v))).collect(),
        }
    }

    pub fn lits(&self) -> &[StateSet] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> VarSet {
        self.lits.iter().map(|l| l.var).collect()
    }

    pub fn is_simple(&self) -> bool {
        self.lits.iter().all(StateSet::is_simple)
    }

    pub fn to_json(&self, space: &FeatureSpace) -> Vec<LitJson> {
        lits_to_json(space, &self.lits)
    }

    pub fn from_json(space: &FeatureSpace, json: &[LitJson]) -> Result<Self> {
        Ok(Term::new(lits_from_json(space, json)?))
    }
}

impl Clause {
    pub fn new(lits: Vec<StateSet>) -> Self {
        Clause {
            lits: normalize(lits, |a, b| a | b),
        }
    }

    /// The simple clause over `vars` built from the states of `world`.
    pub fn from_world(world: &World, vars: &VarSet) -> Self {
        Clause {
            lits: vars.iter().map(|v| StateSet::simple(v, world.state(v))).collect(),
        }
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[StateSet] {
        &self.lits
    }

    pub fn lit(&self, var: usize) -> Option<StateSet> {
        self.lits
            .binary_search_by_key(&var, |l| l.var)
            .ok()
            .map(|i| self.lits[i])
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> VarSet {
        self.lits.iter().map(|l| l.var).collect()
    }

    pub fn is_simple(&self) -> bool {
        self.lits.iter().all(StateSet::is_simple)
    }

    /// True when `self` entails `other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        if self.lits.len() > other.lits.len() {
            return false;
        }
        let mut j = 0;
        for l in &self.lits {
            while j < other.lits.len() && other.lits[j].var < l.var {
                j += 1;
            }
            match other.lits.get(j) {
                Some(o) if o.var == l.var && l.mask & !o.mask == 0 => j += 1,
                _ => return false,
            }
        }
        true
    }

    /// The disjunction of two clauses, or `None` if it is valid.
    pub fn or(&self, other: &Clause, space: &FeatureSpace) -> Option<Clause> {
        let mut lits = Vec::with_capacity(self.lits.len() + other.lits.len());
        let (mut i, mut j) = (0, 0);
        while i < self.lits.len() || j < other.lits.len() {
            let a = self.lits.get(i);
            let b = other.lits.get(j);
            let l = match (a, b) {
                (Some(a), Some(b)) if a.var == b.var => {
                    i += 1;
                    j += 1;
                    StateSet {
                        var: a.var,
                        mask: a.mask | b.mask,
                    }
                }
                (Some(a), Some(b)) if a.var < b.var => {
                    i += 1;
                    *a
                }
                (Some(a), None) => {
                    i += 1;
                    *a
                }
                (_, Some(b)) => {
                    j += 1;
                    *b
                }
                (None, None) => unreachable!(),
            };
            if l.is_full(space) {
                return None;
            }
            lits.push(l);
        }
        Some(Clause { lits })
    }

    /// True when `world` falsifies every literal.
    pub fn violated_by(&self, world: &World) -> bool {
        self.lits.iter().all(|l| !l.contains(world.state(l.var)))
    }

    pub fn to_json(&self, space: &FeatureSpace) -> Vec<LitJson> {
        lits_to_json(space, &self.lits)
    }

    pub fn from_json(space: &FeatureSpace, json: &[LitJson]) -> Result<Self> {
        Ok(Clause::new(lits_from_json(space, json)?))
    }

    pub(crate) fn from_sorted(lits: Vec<StateSet>) -> Self {
        debug_assert!(lits.windows(2).all(|w| w[0].var < w[1].var));
        Clause { lits }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(&self.lits, &other.lits)
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Clause {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(&self.lits, &other.lits)
    }
}

impl PartialOrd for Clause {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A CNF kept free of subsumed clauses as clauses are inserted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseSet {
    clauses: Vec<Clause>,
}

impl ClauseSet {
    pub fn new() -> Self {
        ClauseSet::default()
    }

    /// The constant false: a single empty clause.
    pub fn falsum() -> Self {
        ClauseSet {
            clauses: vec![Clause::empty()],
        }
    }

    /// Adds `c` unless an existing clause subsumes it, dropping every
    /// clause `c` subsumes. Returns whether `c` was added.
    pub fn insert(&mut self, c: Clause) -> bool {
        if self.clauses.iter().any(|d| d.subsumes(&c)) {
            return false;
        }
        self.clauses.retain(|d| !c.subsumes(d));
        self.clauses.push(c);
        true
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Clause> {
        self.clauses.iter()
    }

    pub fn as_slice(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clauses in canonical order.
    pub fn into_sorted(mut self) -> Vec<Clause> {
        self.clauses.sort();
        self.clauses
    }
}

impl FromIterator<Clause> for ClauseSet {
    fn from_iter<I: IntoIterator<Item = Clause>>(iter: I) -> Self {
        let mut s = ClauseSet::new();
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl<'a> IntoIterator for &'a ClauseSet {
    type Item = &'a Clause;
    type IntoIter = std::slice::Iter<'a, Clause>;

    fn into_iter(self) -> Self::IntoIter {
        self.clauses.iter()
    }
}
