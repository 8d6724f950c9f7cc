//! Deterministic synthetic forests for tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{FeatureSpace, StateSet, Variable};
use crate::error::{Error, Result};
use crate::forest::{DecisionTree, Forest, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub seed: u64,
    pub features: usize,
    pub min_states: usize,
    pub max_states: usize,
    pub trees: usize,
    pub depth: usize,
    pub classes: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            features: 5,
            min_states: 2,
            max_states: 4,
            trees: 8,
            depth: 4,
            classes: 2,
        }
    }
}

/// Generates a forest whose internal nodes each split the full state set
/// of a random feature into two or more parts. The same parameters always
/// give the same forest.
pub fn gen_forest(p: &GenParams) -> Result<Forest> {
    if p.classes < 2 {
        return Err(Error::Precondition("a forest needs at least 2 classes".into()));
    }
    if p.features == 0 || p.trees == 0 || p.depth == 0 {
        return Err(Error::Precondition("features, trees and depth must be positive".into()));
    }
    if p.min_states < 2 || p.max_states < p.min_states {
        return Err(Error::Precondition("need 2 <= min_states <= max_states".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let vars = (0..p.features)
        .map(|v| {
            let k = rng.gen_range(p.min_states..=p.max_states);
            Variable {
                name: format!("f{v}"),
                states: (0..k).map(|s| format!("s{s}")).collect(),
            }
        })
        .collect();
    let space = Arc::new(FeatureSpace::new(vars)?);
    let classes = (0..p.classes).map(|c| format!("c{c}")).collect();
    let trees = (0..p.trees)
        .map(|_| DecisionTree {
            root: gen_node(&mut rng, &space, p.depth, p.classes, true),
        })
        .collect();
    Forest::new(space, classes, trees)
}

fn gen_node(rng: &mut ChaCha8Rng, space: &FeatureSpace, depth: usize, k: usize, root: bool) -> TreeNode {
    if depth == 0 || (!root && rng.gen_bool(0.2)) {
        return TreeNode::Leaf(rng.gen_range(0..k));
    }
    let var = rng.gen_range(0..space.len());
    let n = space.num_states(var);
    let parts = rng.gen_range(2..=n.min(3));
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(rng);
    let mut masks = vec![0u64; parts];
    for (i, s) in states.into_iter().enumerate() {
        let part = if i < parts { i } else { rng.gen_range(0..parts) };
        masks[part] |= 1 << s;
    }
    masks.sort_unstable();
    let edges = masks
        .into_iter()
        .map(|mask| (StateSet { var, mask }, gen_node(rng, space, depth - 1, k, false)))
        .collect();
    TreeNode::Node { var, edges }
}
