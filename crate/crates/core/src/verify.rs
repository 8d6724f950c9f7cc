//! Cross-checks every fast-path result against the brute-force oracle.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuits::{VarSet, World, WorldIter};
use crate::compile::{rf_class_formula, CompileOptions, Mode};
use crate::error::Result;
use crate::explain::{
    contrastive_explanations, necessary_reasons, robustness, shortest_flips, shortest_gnrs, sufficient_reasons, Caps,
    Clause,
};
use crate::forest::Forest;
use crate::oracle::{dvars, violations, Oracle};
use crate::reasons::{complete_reason, general_reason, is_locally_fixated, is_monotone, is_or_decomposable};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl FnOnce() -> String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: if passed { String::new() } else { detail() },
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub skipped: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.skipped.extend(other.skipped);
    }
}

/// Settings for the battery.
#[derive(Debug, Clone)]
pub struct Settings {
    pub compile: CompileOptions,
    pub caps: Caps,
    pub world_cap: u128,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            compile: CompileOptions::default(),
            caps: Caps::default(),
            world_cap: crate::oracle::DEFAULT_WORLD_CAP,
        }
    }
}

fn enumerable(forest: &Forest, s: &Settings) -> bool {
    forest.space().world_count().is_some_and(|c| c <= s.world_cap)
}

/// Every class, every mode with and without presorted pairs, every world:
/// the artifact holds exactly where the class is among the vote leaders.
pub fn compilation(forest: &Forest, s: &Settings) -> Result<Report> {
    let mut report = Report::default();
    if !enumerable(forest, s) {
        report
            .skipped
            .push("compilation: feature space exceeds the world cap".into());
        return Ok(report);
    }
    let winners: Vec<Vec<usize>> = WorldIter::new(forest.space())
        .map(|w| forest.classify(&w))
        .collect::<Result<_>>()?;
    for class in 0..forest.num_classes() {
        for mode in Mode::ALL {
            for presort_pairs in [true, false] {
                let opts = CompileOptions {
                    presort_pairs,
                    ..s.compile
                };
                let art = rf_class_formula(forest, class, mode, &opts)?;
                let mut wto = true;
                if let Some((dg, roots)) = art.graphs() {
                    wto = roots.iter().all(|&r| dg.validate_weak_test_once(r).is_ok());
                }
                let ev = art.evaluator();
                let bad = WorldIter::new(forest.space())
                    .zip(&winners)
                    .find(|(w, win)| ev.eval(w) != win.contains(&class));
                let tag = format!("class {} {mode} presort={presort_pairs}", forest.classes()[class]);
                report
                    .checks
                    .push(Check::new(format!("compile {tag}"), bad.is_none(), || {
                        format!("disagrees with the vote at {:?}", bad.unwrap().0)
                    }));
                if art.graphs().is_some() {
                    report.checks.push(Check::new(format!("weak test-once {tag}"), wto, || {
                        "validator failed".into()
                    }));
                }
            }
        }
    }
    Ok(report)
}

fn var_sets(clauses: &[Clause]) -> BTreeSet<VarSet> {
    clauses.iter().map(Clause::vars).collect()
}

/// Every explanation query for one decision, against the oracle.
pub fn explanations(forest: &Forest, instance: &World, class: usize, s: &Settings) -> Result<Report> {
    let mut report = Report::default();
    if !enumerable(forest, s) {
        report
            .skipped
            .push("explanations: feature space exceeds the world cap".into());
        return Ok(report);
    }
    let space = forest.space();
    let tag = |what: &str| format!("{what} [{:?} in {}]", instance, forest.classes()[class]);
    let oracle = Oracle::for_class(forest, instance, class, s.world_cap)?;
    let art = rf_class_formula(forest, class, Mode::DgConj, &s.compile)?;
    let (dg, roots) = art.graphs().expect("graph mode");
    let cr = complete_reason(dg, roots, instance)?;
    let gr = general_reason(dg, roots, instance)?;
    let mut push = |name: String, ok: bool, detail: &dyn Fn() -> String| {
        report.checks.push(Check::new(name, ok, detail));
    };

    push(
        tag("complete reason is monotone"),
        is_monotone(&cr.nnf, cr.root, instance),
        &|| cr.nnf.display(cr.root),
    );
    push(
        tag("complete reason is or-decomposable"),
        is_or_decomposable(&cr.nnf, cr.root),
        &|| cr.nnf.display(cr.root),
    );
    push(
        tag("general reason is locally fixated"),
        is_locally_fixated(&gr.nnf, gr.root, instance),
        &|| gr.nnf.display(gr.root),
    );
    let (ec, eg) = (cr.nnf.evaluator(cr.root), gr.nnf.evaluator(gr.root));
    let chain = WorldIter::new(space).find(|w| {
        let (c, g) = (ec.eval(w), eg.eval(w));
        (c && !g) || (g && !oracle.table().get(w))
    });
    push(tag("complete ⊨ general ⊨ class"), chain.is_none(), &|| {
        format!("fails at {:?}", chain.clone().unwrap())
    });

    let full = rf_class_formula(forest, class, Mode::DgFull, &s.compile)?;
    let (fdg, froots) = full.graphs().expect("graph mode");
    let fcr = complete_reason(fdg, froots, instance)?;
    let ef = fcr.nnf.evaluator(fcr.root);
    let conj = WorldIter::new(space).find(|w| ef.eval(w) != ec.eval(w));
    push(tag("conjunction rule for complete reasons"), conj.is_none(), &|| {
        format!("dg-conj and dg-full differ at {:?}", conj.clone().unwrap())
    });

    let srs = sufficient_reasons(&cr, &s.caps)?;
    let want = oracle.sufficient_reasons();
    push(tag("sufficient reasons"), srs == want, &|| {
        format!("got {srs:?}, oracle {want:?}")
    });

    let nrs = necessary_reasons(&cr, &s.caps)?;
    let want = oracle.necessary_reasons();
    push(tag("necessary reasons"), nrs == want, &|| {
        format!("got {nrs:?}, oracle {want:?}")
    });

    let nr_flip = nrs
        .iter()
        .all(|nr| violations(space, instance, nr).iter().any(|w| !oracle.table().get(w)));
    push(
        tag("every necessary reason has a flipping violation"),
        nr_flip,
        &String::new,
    );

    let rob = robustness(&cr, &s.caps)?;
    let (r, v) = oracle.robustness();
    push(tag("robustness"), rob.distance == r && rob.vars == v, &|| {
        format!("got ({:?}, {:?}), oracle ({r:?}, {v:?})", rob.distance, rob.vars)
    });

    let gnrs = shortest_gnrs(&gr, &rob.vars, &s.caps)?;
    let want = oracle.shortest_gnrs();
    push(tag("shortest general necessary reasons"), gnrs == want, &|| {
        format!("got {gnrs:?}, oracle {want:?}")
    });

    let every = gnrs
        .iter()
        .all(|g| violations(space, instance, g).iter().all(|w| !oracle.table().get(w)));
    push(tag("every violation of a shortest GNR flips"), every, &String::new);

    let shortest_nrs: Vec<Clause> = nrs.iter().filter(|c| Some(c.len()) == r).cloned().collect();
    let v_set: BTreeSet<VarSet> = rob.vars.iter().cloned().collect();
    let same_v = var_sets(&shortest_nrs) == v_set && var_sets(&gnrs) == v_set;
    push(
        tag("shortest NRs and shortest GNRs share variable sets"),
        same_v,
        &|| {
            format!(
                "NR {:?}, GNR {:?}, V {v_set:?}",
                var_sets(&shortest_nrs),
                var_sets(&gnrs)
            )
        },
    );

    let flips = shortest_flips(space, instance, &gnrs, &s.caps)?;
    let (_, want) = oracle.shortest_flips();
    push(tag("shortest flips"), flips == want, &|| {
        format!("got {flips:?}, oracle {want:?}")
    });

    Ok(report)
}

/// Contrastive explanations towards every class the instance is not in.
pub fn contrastive(forest: &Forest, instance: &World, s: &Settings) -> Result<Report> {
    let mut report = Report::default();
    let own = forest.classify(instance)?;
    for target in (0..forest.num_classes()).filter(|t| !own.contains(t)) {
        let tag = |what: &str| format!("{what} [{:?} towards {}]", instance, forest.classes()[target]);
        let ces = contrastive_explanations(forest, instance, target, &s.compile, &s.caps)?;
        let oracle = Oracle::against_class(forest, instance, target, s.world_cap)?;
        let want = oracle.necessary_reasons();
        report
            .checks
            .push(Check::new(tag("contrastive explanations"), ces == want, || {
                format!("got {ces:?}, oracle {want:?}")
            }));
        let lands = |w: &World| forest.classify_unchecked(w).contains(&target);
        let some = ces
            .iter()
            .all(|c| violations(forest.space(), instance, c).iter().any(lands));
        report.checks.push(Check::new(
            tag("every contrastive explanation has a violation in the target"),
            some,
            String::new,
        ));
        let every = ces
            .iter()
            .all(|c| violations(forest.space(), instance, c).iter().all(lands));
        report.checks.push(Check::new(
            tag("every violation of every contrastive explanation is in the target"),
            every,
            || {
                let c = ces
                    .iter()
                    .find(|c| !violations(forest.space(), instance, c).iter().all(lands))
                    .unwrap();
                let w = violations(forest.space(), instance, c)
                    .into_iter()
                    .find(|w| !lands(w))
                    .unwrap();
                format!(
                    "{c:?} violated by {w:?} (dvars {:?}) which is not in the target",
                    dvars(instance, &w)
                )
            },
        ));
    }
    Ok(report)
}

/// A uniformly random instance of the forest's feature space.
pub fn random_instance<R: Rng>(forest: &Forest, rng: &mut R) -> World {
    let space = forest.space();
    let states = (0..space.len())
        .map(|v| rng.gen_range(0..space.num_states(v)))
        .collect();
    World::new(space, states).expect("states drawn within range")
}

/// `count` random instances drawn with `seed`.
pub fn random_instances(forest: &Forest, seed: u64, count: usize) -> Vec<World> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(forest, &mut rng)).collect()
}

/// Explanation checks for every class the instance is in, then
/// contrastive checks towards every other class.
pub fn instance(forest: &Forest, instance: &World, s: &Settings) -> Result<Report> {
    let mut report = Report::default();
    for class in forest.classify(instance)? {
        report.extend(explanations(forest, instance, class, s)?);
    }
    if enumerable(forest, s) {
        report.extend(contrastive(forest, instance, s)?);
    }
    Ok(report)
}

/// Compilation checks plus explanation checks for `trials` random
/// instances drawn with `seed`.
pub fn battery(forest: &Forest, seed: u64, trials: usize, s: &Settings) -> Result<Report> {
    let mut report = compilation(forest, s)?;
    if !enumerable(forest, s) {
        return Ok(report);
    }
    for w in random_instances(forest, seed, trials) {
        report.extend(instance(forest, &w, s)?);
    }
    Ok(report)
}
