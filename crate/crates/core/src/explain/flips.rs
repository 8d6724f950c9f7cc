use std::collections::BTreeSet;

use super::{Caps, Clause};
use crate::circuits::{FeatureSpace, World};
use crate::error::{Error, Result};

/// Every violation of the given clauses: worlds that change the instance on
/// exactly a clause's variables, each to a state outside its literal.
pub fn shortest_flips(space: &FeatureSpace, instance: &World, gnrs: &[Clause], caps: &Caps) -> Result<Vec<World>> {
    instance.check(space)?;
    let mut out: BTreeSet<World> = BTreeSet::new();
    for c in gnrs {
        let choices: Vec<(usize, Vec<usize>)> = c
            .lits()
            .iter()
            .map(|l| {
                let outside = space.full(l.var) & !l.mask;
                (l.var, crate::circuits::mask_states(outside).collect())
            })
            .collect();
        if choices.iter().any(|(_, s)| s.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; choices.len()];
        'odometer: loop {
            let mut w = instance.clone();
            for ((var, states), &i) in choices.iter().zip(&idx) {
                w.set(*var, states[i]);
            }
            out.insert(w);
            if out.len() > caps.flips {
                return Err(Error::CapExceeded {
                    what: "shortest flips",
                    cap: caps.flips,
                });
            }
            let mut k = idx.len();
            loop {
                if k == 0 {
                    break 'odometer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < choices[k].1.len() {
                    continue 'odometer;
                }
                idx[k] = 0;
            }
        }
    }
    Ok(out.into_iter().collect())
}
