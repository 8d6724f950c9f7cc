//! Discrete variables, state sets and worlds.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of states of one variable. State sets are
/// stored as `u64` bitmasks.
pub const MAX_STATES: usize = 64;

/// Bitmask with the lowest `n` bits set.
#[inline]
pub fn full_mask(n: usize) -> u64 {
    debug_assert!(n <= MAX_STATES);
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates over the set bits of a mask, lowest first.
#[inline]
pub fn mask_states(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let s = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(s)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

/// An ordered list of discrete variables, each with at least two states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Variable>", into = "Vec<Variable>")]
pub struct FeatureSpace {
    vars: Vec<Variable>,
    by_name: HashMap<String, usize>,
}

impl FeatureSpace {
    pub fn new(vars: Vec<Variable>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            if v.states.len() < 2 {
                return Err(Error::FeatureSpace(format!(
                    "variable `{}` has {} state(s), need at least 2",
                    v.name,
                    v.states.len()
                )));
            }
            if v.states.len() > MAX_STATES {
                return Err(Error::FeatureSpace(format!(
                    "variable `{}` has {} states, limit is {MAX_STATES}",
                    v.name,
                    v.states.len()
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for s in &v.states {
                if !seen.insert(s.as_str()) {
                    return Err(Error::FeatureSpace(format!(
                        "variable `{}` repeats state `{s}`",
                        v.name
                    )));
                }
            }
            if by_name.insert(v.name.clone(), i).is_some() {
                return Err(Error::FeatureSpace(format!("duplicate feature name `{}`", v.name)));
            }
        }
        Ok(FeatureSpace { vars, by_name })
    }

    /// Convenience constructor from `(name, [state names])` pairs.
    pub fn from_names<S: AsRef<str>>(layout: &[(S, &[S])]) -> Result<Self> {
        Self::new(
            layout
                .iter()
                .map(|(n, st)| Variable {
                    name: n.as_ref().to_string(),
                    states: st.iter().map(|s| s.as_ref().to_string()).collect(),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: usize) -> &Variable {
        &self.vars[v]
    }

    pub fn num_states(&self, v: usize) -> usize {
        self.vars[v].states.len()
    }

    pub fn full(&self, v: usize) -> u64 {
        full_mask(self.num_states(v))
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn state_index(&self, v: usize, name: &str) -> Option<usize> {
        self.vars[v].states.iter().position(|s| s == name)
    }

    /// Number of worlds, or `None` on overflow.
    pub fn world_count(&self) -> Option<u128> {
        self.vars
            .iter()
            .try_fold(1u128, |acc, v| acc.checked_mul(v.states.len() as u128))
    }

    pub fn state_names(&self, v: usize, mask: u64) -> Vec<String> {
        mask_states(mask).map(|s| self.vars[v].states[s].clone()).collect()
    }
}

impl TryFrom<Vec<Variable>> for FeatureSpace {
    type Error = Error;

    fn try_from(vars: Vec<Variable>) -> Result<Self> {
        FeatureSpace::new(vars)
    }
}

impl From<FeatureSpace> for Vec<Variable> {
    fn from(space: FeatureSpace) -> Self {
        space.vars
    }
}

/// A non-empty set of states of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    pub var: usize,
    pub mask: u64,
}

impl StateSet {
    pub fn new(space: &FeatureSpace, var: usize, mask: u64) -> Result<Self> {
        if var >= space.len() {
            return Err(Error::Schema(format!("variable index {var} out of range")));
        }
        if mask == 0 {
            return Err(Error::Schema(format!("empty state set for `{}`", space.var(var).name)));
        }
        if mask & !space.full(var) != 0 {
            return Err(Error::Schema(format!(
                "state index out of range for `{}`",
                space.var(var).name
            )));
        }
        Ok(StateSet { var, mask })
    }

    pub fn from_states(space: &FeatureSpace, var: usize, states: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &s in states {
            if s >= MAX_STATES {
                return Err(Error::Schema(format!("state index {s} out of range")));
            }
            mask |= 1 << s;
        }
        Self::new(space, var, mask)
    }

    pub fn simple(var: usize, state: usize) -> Self {
        StateSet { var, mask: 1 << state }
    }

    pub fn contains(&self, state: usize) -> bool {
        self.mask >> state & 1 == 1
    }

    pub fn is_simple(&self) -> bool {
        self.mask.count_ones() == 1
    }

    pub fn is_full(&self, space: &FeatureSpace) -> bool {
        self.mask == space.full(self.var)
    }

    pub fn states(&self) -> impl Iterator<Item = usize> {
        mask_states(self.mask)
    }
}

/// A total assignment of one state to every variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World(Vec<u8>);

impl World {
    pub fn new(space: &FeatureSpace, states: Vec<usize>) -> Result<Self> {
        if states.len() != space.len() {
            return Err(Error::WorldMismatch(format!(
                "expected {} variables, got {}",
                space.len(),
                states.len()
            )));
        }
        for (v, &s) in states.iter().enumerate() {
            if s >= space.num_states(v) {
                return Err(Error::WorldMismatch(format!(
                    "state {s} out of range for `{}`",
                    space.var(v).name
                )));
            }
        }
        Ok(World(states.into_iter().map(|s| s as u8).collect()))
    }

    /// Builds a world without range checks; callers guarantee validity.
    pub(crate) fn from_raw(states: Vec<u8>) -> Self {
        World(states)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn state(&self, var: usize) -> usize {
        self.0[var] as usize
    }

    pub fn set(&mut self, var: usize, state: usize) {
        self.0[var] = state as u8;
    }

    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&s| s as usize)
    }

    pub fn check(&self, space: &FeatureSpace) -> Result<()> {
        if self.0.len() != space.len() {
            return Err(Error::WorldMismatch(format!(
                "expected {} variables, got {}",
                space.len(),
                self.0.len()
            )));
        }
        for (v, s) in self.states().enumerate() {
            if s >= space.num_states(v) {
                return Err(Error::WorldMismatch(format!(
                    "state {s} out of range for `{}`",
                    space.var(v).name
                )));
            }
        }
        Ok(())
    }

    /// Parses `{"feature": "state", ...}`; every feature must be present.
    pub fn from_json(space: &FeatureSpace, value: &serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Schema("instance must be a JSON object".into()))?;
        let mut states = vec![usize::MAX; space.len()];
        for (name, st) in obj {
            let v = space
                .var_index(name)
                .ok_or_else(|| Error::Schema(format!("unknown feature `{name}`")))?;
            let st = st
                .as_str()
                .ok_or_else(|| Error::Schema(format!("state of `{name}` must be a string")))?;
            states[v] = space
                .state_index(v, st)
                .ok_or_else(|| Error::Schema(format!("unknown state `{st}` for `{name}`")))?;
        }
        if let Some(v) = states.iter().position(|&s| s == usize::MAX) {
            return Err(Error::Schema(format!(
                "instance misses feature `{}`",
                space.var(v).name
            )));
        }
        World::new(space, states)
    }

    pub fn to_json(&self, space: &FeatureSpace) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        for (v, s) in self.states().enumerate() {
            let var = space.var(v);
            obj.insert(var.name.clone(), var.states[s].clone().into());
        }
        serde_json::Value::Object(obj)
    }
}

/// A set of variable indices.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    pub fn new() -> Self {
        VarSet { words: Vec::new() }
    }

    pub fn singleton(v: usize) -> Self {
        let mut s = VarSet::new();
        s.insert(v);
        s
    }

    pub fn insert(&mut self, v: usize) {
        let w = v / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (v % 64);
    }

    pub fn contains(&self, v: usize) -> bool {
        self.words.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn union_with(&mut self, other: &VarSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(i, &w)| mask_states(w).map(move |b| i * 64 + b))
    }

    pub fn names(&self, space: &FeatureSpace) -> Vec<String> {
        self.iter().map(|v| space.var(v).name.clone()).collect()
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = VarSet::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
