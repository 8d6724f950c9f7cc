//! Explanation queries over complete and general reasons.

mod clause;
mod flips;
mod monotone;
mod resolution;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use clause::{Clause, ClauseSet, LitJson, Term};
pub use flips::shortest_flips;
pub use monotone::{necessary_reasons, robustness, sufficient_reasons, Robustness};
pub use resolution::{deplete, general_necessary_reasons, naive_closure, resolve, shortest_cnf, shortest_gnrs};

use crate::circuits::World;
use crate::compile::{rf_class_formula, CompileOptions, Mode, Payload};
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::reasons::complete_reason;

/// Result-size caps for steps that can blow up combinatorially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Terms or clauses held by any intermediate set.
    pub items: usize,
    /// Worlds emitted by flip enumeration.
    pub flips: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            items: 200_000,
            flips: 1_000_000,
        }
    }
}

/// Contrastive explanations for why the instance is not in `target`: the
/// necessary reasons of the negated class formula of `target`.
pub fn contrastive_explanations(
    forest: &Forest,
    instance: &World,
    target: usize,
    opts: &CompileOptions,
    caps: &Caps,
) -> Result<Vec<Clause>> {
    forest.check_class(target)?;
    if forest.classify(instance)?.contains(&target) {
        return Err(Error::Precondition(format!(
            "the instance is already in class `{}`",
            forest.classes()[target]
        )));
    }
    let art = rf_class_formula(forest, target, Mode::DgFull, opts)?;
    let Payload::Graphs { mut dg, roots } = art.payload else {
        return Err(Error::Invariant("dg-full compilation produced no graph".into()));
    };
    let neg = dg.negate(roots[0]);
    let cr = complete_reason(&dg, &[neg], instance)?;
    necessary_reasons(&cr, caps)
}

/// Display adapter that renders a term or clause with state names.
pub struct Pretty<'a, T> {
    item: &'a T,
    space: &'a crate::circuits::FeatureSpace,
}

impl<'a, T> Pretty<'a, T> {
    pub fn new(item: &'a T, space: &'a crate::circuits::FeatureSpace) -> Self {
        Pretty { item, space }
    }
}

impl fmt::Display for Pretty<'_, Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        clause::write_lits(f, self.space, self.item.lits(), " ∧ ", "true")
    }
}

impl fmt::Display for Pretty<'_, Clause> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        clause::write_lits(f, self.space, self.item.lits(), " ∨ ", "false")
    }
}
