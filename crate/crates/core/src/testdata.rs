//! Shared fixtures for unit tests.

use crate::circuits::{Nnf, NodeId, World, WorldIter};
use crate::forest::Forest;

pub const XYZ: &str = include_str!("../tests/data/xyz.json");
pub const SUSAN: &str = include_str!("../tests/data/susan.json");
const SUSAN_INSTANCE: &str = include_str!("../tests/data/susan_instance.json");
const XYZ_INSTANCE: &str = include_str!("../tests/data/xyz_instance.json");

pub fn susan() -> (Forest, World) {
    let f = Forest::from_json_str(SUSAN).unwrap();
    let w = World::from_json(f.space(), &serde_json::from_str(SUSAN_INSTANCE).unwrap()).unwrap();
    (f, w)
}

pub fn xyz() -> (Forest, World) {
    let f = Forest::from_json_str(XYZ).unwrap();
    let w = World::from_json(f.space(), &serde_json::from_str(XYZ_INSTANCE).unwrap()).unwrap();
    (f, w)
}

/// Two roots of one arena agree on every world.
pub fn equivalent(nnf: &Nnf, a: NodeId, b: NodeId) -> bool {
    let (ea, eb) = (nnf.evaluator(a), nnf.evaluator(b));
    WorldIter::new(nnf.space()).all(|w| ea.eval(&w) == eb.eval(&w))
}
