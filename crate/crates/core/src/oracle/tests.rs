use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::circuits::{FeatureSpace, VarSet};
use crate::forest::{DecisionTree, Polarity, TreeNode};
use crate::gen::{gen_forest, GenParams};
use crate::testdata::{susan, xyz};
use crate::verify::{battery, Settings};

#[test]
fn dvars_examples() {
    let (f, w) = susan();
    assert!(dvars(&w, &w).is_empty());
    let young = World::new(f.space(), vec![1, 0, 0]).unwrap();
    assert_eq!(dvars(&w, &young), VarSet::singleton(0));
    let far = World::new(f.space(), vec![1, 1, 1]).unwrap();
    assert_eq!(dvars(&w, &far), (0..3).collect());
}

#[test]
fn count_satisfying_examples() {
    let (f, w) = xyz();
    let nnf = Nnf::new(f.space().clone());
    assert_eq!(count_satisfying(&nnf, &[NodeId::TRUE; 5], &w), 5);
    assert_eq!(count_satisfying(&nnf, &[], &w), 0);
}

#[test]
fn counting_matches_pairwise_votes() {
    let f = gen_forest(&GenParams {
        seed: 9,
        features: 3,
        trees: 5,
        classes: 3,
        ..GenParams::default()
    })
    .unwrap();
    let n = f.trees().len();
    let mut nnf = Nnf::new(f.space().clone());
    for i in 0..3 {
        for j in 0..3 {
            let mut roots: Vec<NodeId> = f
                .trees()
                .iter()
                .map(|t| t.class_formula_nnf(&mut nnf, i, Polarity::Positive))
                .collect();
            roots.extend(
                f.trees()
                    .iter()
                    .map(|t| t.class_formula_nnf(&mut nnf, j, Polarity::Negative)),
            );
            for w in WorldIter::new(f.space()) {
                let votes = f.votes(&w);
                assert_eq!(count_satisfying(&nnf, &roots, &w) >= n, votes[i] >= votes[j]);
            }
        }
    }
}

#[test]
fn susan_oracle() {
    let (f, w) = susan();
    let srs = brute_sr(&f, &w, 0).unwrap();
    let vars: Vec<Vec<usize>> = srs.iter().map(|t| t.vars().iter().collect()).collect();
    assert_eq!(vars, vec![vec![0, 1], vec![0, 2]]);
    let (r, v) = brute_robustness(&f, &w, 0).unwrap();
    assert_eq!(r, Some(1));
    assert_eq!(v, vec![VarSet::singleton(0)]);
    assert_eq!(
        brute_shortest_flips(&f, &w, 0).unwrap(),
        vec![World::new(f.space(), vec![1, 0, 0]).unwrap()]
    );
}

#[test]
fn xyz_robustness_is_one() {
    let (f, w) = xyz();
    let (r, _) = brute_robustness(&f, &w, 2).unwrap();
    assert_eq!(r, Some(1));
    let flips = brute_shortest_flips(&f, &w, 2).unwrap();
    let z1 = World::new(f.space(), vec![1, 1, 0]).unwrap();
    assert!(flips.contains(&z1));
    assert_eq!(f.classify(&z1).unwrap(), vec![1]);
}

#[test]
fn constant_forest_never_flips() {
    let space = Arc::new(FeatureSpace::from_names(&[("A", &["a", "b", "c"][..])]).unwrap());
    let trees = vec![DecisionTree {
        root: TreeNode::Leaf(0),
    }];
    let f = Forest::new(space.clone(), vec!["p".into(), "q".into()], trees).unwrap();
    let w = World::new(&space, vec![1]).unwrap();
    assert_eq!(brute_robustness(&f, &w, 0).unwrap(), (None, vec![]));
    assert!(brute_shortest_flips(&f, &w, 0).unwrap().is_empty());
    assert!(brute_shortest_gnrs(&f, &w, 0).unwrap().is_empty());
}

#[test]
fn instance_must_satisfy_the_decision() {
    let (f, w) = susan();
    assert!(matches!(brute_sr(&f, &w, 1), Err(Error::Precondition(_))));
}

#[test]
fn world_cap_is_enforced() {
    let (f, w) = xyz();
    assert!(matches!(
        Oracle::for_class(&f, &w, 2, 26),
        Err(Error::CapExceeded { .. })
    ));
}

#[test]
fn worked_examples_pass_the_battery() {
    for (f, w) in [susan(), xyz()] {
        let s = Settings::default();
        let mut report = crate::verify::compilation(&f, &s).unwrap();
        for class in f.classify(&w).unwrap() {
            report.extend(crate::verify::explanations(&f, &w, class, &s).unwrap());
        }
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn explanations_match_the_oracle(seed in any::<u64>(), trees in 1usize..=6, classes in 2usize..=3) {
        let f = gen_forest(&GenParams {
            seed,
            features: 4,
            min_states: 2,
            max_states: 3,
            trees,
            depth: 3,
            classes,
        }).unwrap();
        let report = battery(&f, seed, 3, &Settings::default()).unwrap();
        let failures: Vec<_> = report
            .failures()
            .filter(|c| !c.name.starts_with("every violation of every contrastive"))
            .collect();
        prop_assert!(failures.is_empty(), "{:#?}", failures);
    }
}
