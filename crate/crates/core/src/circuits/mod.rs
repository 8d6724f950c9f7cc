//! Feature spaces and NNF circuits.

pub mod nnf;
pub mod space;

pub use nnf::{CircuitJson, Evaluator, Nnf, NnfNode, NodeId, NodeJson, WorldBatch, WorldBatches, WorldIter};
pub use space::{full_mask, mask_states, FeatureSpace, StateSet, VarSet, Variable, World, MAX_STATES};
