//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use foret::circuits::{FeatureSpace, Nnf, NodeId, StateSet, VarSet, World, WorldBatches, WorldIter};
use foret::compile::{rf_class_formula, CompileOptions, Mode};
use foret::dg::{ApplyCtx, Budget, Dg, DgId};
use foret::explain::{
    deplete, general_necessary_reasons, naive_closure, necessary_reasons, robustness, shortest_flips, shortest_gnrs,
    sufficient_reasons, Caps, Clause, ClauseSet, Term,
};
use foret::forest::{Forest, Polarity};
use foret::gen::{gen_forest, GenParams};
use foret::reasons::{complete_reason, general_reason};
use foret::sortnet::{comparator_count, sortnet, Boolean, Comparator, Counting, DgSemantics, NnfSemantics};
use foret::verify::{self, Report, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SUSAN: &str = include_str!("data/susan.json");
const SUSAN_INSTANCE: &str = include_str!("data/susan_instance.json");
const XYZ: &str = include_str!("data/xyz.json");
const XYZ_INSTANCE: &str = include_str!("data/xyz_instance.json");

const ORACLE_FORESTS: u64 = 100;
const INSTANCES_PER_FOREST: usize = 5;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn load(forest: &str, instance: &str) -> (Forest, World) {
    let f = Forest::from_json_str(forest).expect("fixture forest");
    let w = World::from_json(f.space(), &serde_json::from_str(instance).expect("fixture json")).expect("fixture world");
    (f, w)
}

fn lit(space: &FeatureSpace, var: &str, states: &[&str]) -> StateSet {
    let v = space.var_index(var).expect("variable");
    let mask = states
        .iter()
        .map(|s| 1u64 << space.state_index(v, s).expect("state"))
        .fold(0, |m, b| m | b);
    StateSet { var: v, mask }
}

fn equivalent(nnf: &Nnf, a: NodeId, b: NodeId) -> bool {
    let (ea, eb) = (nnf.evaluator(a), nnf.evaluator(b));
    WorldIter::new(nnf.space()).all(|w| ea.eval(&w) == eb.eval(&w))
}

fn susan_suite() -> Outcome {
    let start = Instant::now();
    let (f, w) = load(SUSAN, SUSAN_INSTANCE);
    let s = f.space().clone();
    let caps = Caps::default();
    let yes = f.class_index("yes").expect("class");
    let art = rf_class_formula(&f, yes, Mode::DgConj, &CompileOptions::default()).expect("compile");
    let (dg, roots) = art.graphs().expect("graphs");
    let mut cr = complete_reason(dg, roots, &w).expect("complete reason");
    let mut gr = general_reason(dg, roots, &w).expect("general reason");
    let mut failed = Vec::new();

    let age = lit(&s, "Age", &[">=55"]);
    let srs = sufficient_reasons(&cr, &caps).expect("srs");
    let want_srs = vec![
        Term::new(vec![age, lit(&s, "BType", &["A"])]),
        Term::new(vec![age, lit(&s, "Weight", &["oWeight"])]),
    ];
    if srs != want_srs {
        failed.push(format!("sufficient reasons {srs:?}"));
    }

    let nrs = necessary_reasons(&cr, &caps).expect("nrs");
    let want_nrs = vec![
        Clause::new(vec![age]),
        Clause::new(vec![lit(&s, "BType", &["A"]), lit(&s, "Weight", &["oWeight"])]),
    ];
    if nrs != want_nrs {
        failed.push(format!("necessary reasons {nrs:?}"));
    }

    let want_cr = {
        let n = &mut cr.nnf;
        let a = n.lit(age);
        let bt = n.lit(lit(&s, "BType", &["A"]));
        let ow = n.lit(lit(&s, "Weight", &["oWeight"]));
        let d = n.or2(bt, ow);
        n.and2(a, d)
    };
    if !equivalent(&cr.nnf, cr.root, want_cr) {
        failed.push(format!("complete reason {}", cr.nnf.display(cr.root)));
    }

    let want_gr = {
        let n = &mut gr.nnf;
        let a = n.lit(age);
        let b1 = n.lit(lit(&s, "BType", &["A", "B", "AB"]));
        let w1 = n.lit(lit(&s, "Weight", &["oWeight"]));
        let b2 = n.lit(lit(&s, "BType", &["A", "B"]));
        let w2 = n.lit(lit(&s, "Weight", &["oWeight", "uWeight"]));
        let c1 = n.or2(b1, w1);
        let c2 = n.or2(b2, w2);
        n.and([a, c1, c2])
    };
    if !equivalent(&gr.nnf, gr.root, want_gr) {
        failed.push(format!("general reason {}", gr.nnf.display(gr.root)));
    }

    let gnrs = general_necessary_reasons(&gr, &caps).expect("gnrs");
    let mut want_gnrs = vec![
        Clause::new(vec![age]),
        Clause::new(vec![
            lit(&s, "BType", &["A", "B", "AB"]),
            lit(&s, "Weight", &["oWeight"]),
        ]),
        Clause::new(vec![
            lit(&s, "BType", &["A", "B"]),
            lit(&s, "Weight", &["oWeight", "uWeight"]),
        ]),
    ];
    want_gnrs.sort();
    let same_models = |a: &Clause, b: &Clause| WorldIter::new(&s).all(|x| a.violated_by(&x) == b.violated_by(&x));
    let gnrs_ok = gnrs.len() == want_gnrs.len() && gnrs.iter().zip(&want_gnrs).all(|(a, b)| same_models(a, b));
    if !gnrs_ok {
        failed.push(format!("general necessary reasons {gnrs:?}"));
    }

    let rob = robustness(&cr, &caps).expect("robustness");
    let want_v = vec![VarSet::singleton(age.var)];
    if rob.distance != Some(1) || rob.vars != want_v {
        failed.push(format!("robustness {:?} {:?}", rob.distance, rob.vars));
    }
    let shortest = shortest_gnrs(&gr, &rob.vars, &caps).expect("shortest gnrs");
    let flips = shortest_flips(&s, &w, &shortest, &caps).expect("flips");
    let mut flipped = w.clone();
    flipped.set(age.var, s.state_index(age.var, "<55").expect("state"));
    if flips != vec![flipped] {
        failed.push(format!("shortest flips {flips:?}"));
    }

    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failed.push(format!("took {elapsed:?}"));
    }
    if failed.is_empty() {
        Outcome::new(
            true,
            format!("2 SRs, 2 NRs, CR, GR, 3 GNRs, robustness 1 on {{Age}}, flip Age<55 in {elapsed:.2?}"),
        )
    } else {
        Outcome::new(false, failed.join("; "))
    }
}

fn xyz_suite() -> Outcome {
    let (f, w) = load(XYZ, XYZ_INSTANCE);
    let opts = CompileOptions::default();
    let mut failed = Vec::new();
    let mut counts = Vec::new();
    let mut evaluators = Vec::new();
    let arts: Vec<_> = (0..f.num_classes())
        .map(|c| rf_class_formula(&f, c, Mode::Nnf, &opts).expect("compile"))
        .collect();
    for art in &arts {
        let foret::compile::Payload::Nnf { nnf, root } = &art.payload else {
            unreachable!("nnf mode")
        };
        counts.push(nnf.count_models(*root).expect("count"));
        evaluators.push(art.evaluator());
    }
    if counts != [12, 11, 4] {
        failed.push(format!("model counts {counts:?}"));
    }
    let partition = WorldIter::new(f.space()).all(|x| evaluators.iter().filter(|e| e.eval(&x)).count() == 1);
    if !partition {
        failed.push("class formulas overlap or leave a world uncovered".into());
    }
    let c3 = f.class_index("c3").expect("class");
    let holds: Vec<usize> = (0..arts.len()).filter(|&c| evaluators[c].eval(&w)).collect();
    if f.classify(&w).expect("classify") != vec![c3] || holds != vec![c3] {
        failed.push(format!("instance lands in {holds:?}"));
    }
    if failed.is_empty() {
        Outcome::new(true, "model counts 12/11/4, exclusive and exhaustive, (x2,y2,z3) in c3")
    } else {
        Outcome::new(false, failed.join("; "))
    }
}

fn sortnet_suite() -> Outcome {
    let start = Instant::now();
    let mut failed = Vec::new();
    for n in [2usize, 4, 8, 16] {
        for bits in 0u32..1 << n {
            let input: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let out = sortnet(input, &mut Boolean).expect("sort");
            let ones = bits.count_ones() as usize;
            if out.iter().enumerate().any(|(j, &b)| b != (j < ones)) {
                failed.push(format!("n={n} input {bits:b} gives {out:?}"));
                break;
            }
        }
    }
    let mut counter = Counting::new(Boolean);
    sortnet(vec![false; 8], &mut counter).expect("sort");
    if counter.comparators != 19 || comparator_count(8) != 19 {
        failed.push(format!("8 inputs used {} comparators", counter.comparators));
    }

    // Random circuits on the inputs: each output j holds exactly where at
    // least j + 1 inputs hold.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for batch in 0..50u64 {
        let params = GenParams {
            seed: 1000 + batch,
            features: rng.gen_range(2..=5),
            min_states: 2,
            max_states: rng.gen_range(2..=4),
            trees: [2, 4, 8, 16][rng.gen_range(0..4)],
            depth: rng.gen_range(1..=3),
            classes: 2,
        };
        let f = gen_forest(&params).expect("forest");
        let mut nnf = Nnf::new(f.space().clone());
        let inputs: Vec<NodeId> = f
            .trees()
            .iter()
            .map(|t| t.class_formula_nnf(&mut nnf, 0, Polarity::Positive))
            .collect();
        let outputs = sortnet(inputs.clone(), &mut NnfSemantics(&mut nnf)).expect("sort");
        let input_evs: Vec<_> = inputs.iter().map(|&r| nnf.evaluator(r)).collect();
        let output_evs: Vec<_> = outputs.iter().map(|&r| nnf.evaluator(r)).collect();
        for wb in WorldBatches::new(f.space()) {
            let ins: Vec<u64> = input_evs.iter().map(|e| e.eval_batch(&wb)).collect();
            let outs: Vec<u64> = output_evs.iter().map(|e| e.eval_batch(&wb)).collect();
            for lane in 0..wb.worlds.len() {
                let count = ins.iter().filter(|m| *m >> lane & 1 == 1).count();
                if let Some(j) = (0..outs.len()).find(|&j| (outs[j] >> lane & 1 == 1) != (count > j)) {
                    failed.push(format!(
                        "batch {batch}: output {} wrong with {count} true inputs",
                        j + 1
                    ));
                    break;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        failed.push(format!("took {elapsed:?}"));
    }
    if failed.is_empty() {
        Outcome::new(
            true,
            format!(
                "zero-one exhaustive for n=2,4,8,16; 19 comparators at n=8; counting on 50 batches in {elapsed:.2?}"
            ),
        )
    } else {
        failed.truncate(5);
        Outcome::new(false, failed.join("; "))
    }
}

fn oracle_forests() -> Vec<Forest> {
    (0..ORACLE_FORESTS)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_states = rng.gen_range(2..=4);
            let p = GenParams {
                seed,
                features: rng.gen_range(2..=8),
                min_states: 2,
                max_states,
                trees: rng.gen_range(1..=15),
                depth: rng.gen_range(1..=4),
                classes: rng.gen_range(2..=3),
            };
            gen_forest(&p).expect("forest")
        })
        .collect()
}

fn summarize(report: &Report) -> BTreeMap<String, (usize, usize)> {
    let mut out: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for c in &report.checks {
        let name = c.name.split(" [").next().unwrap_or(&c.name).to_string();
        let e = out.entry(name).or_default();
        e.0 += 1;
        if !c.passed {
            e.1 += 1;
        }
    }
    out
}

fn compilation_suite(forests: &[Forest], settings: &Settings) -> Outcome {
    let start = Instant::now();
    let reports: Vec<_> = forests.par_iter().map(|f| verify::compilation(f, settings)).collect();
    let elapsed = start.elapsed();
    let mut all = Report::default();
    for (i, r) in reports.into_iter().enumerate() {
        match r {
            Ok(r) => all.extend(r),
            Err(e) => return Outcome::new(false, format!("forest {i}: {e}")),
        }
    }
    let failures: Vec<_> = all.failures().map(|c| format!("{} ({})", c.name, c.detail)).collect();
    let compiled = all.checks.iter().filter(|c| c.name.starts_with("compile ")).count();
    if failures.is_empty() && all.skipped.is_empty() && elapsed < Duration::from_secs(600) {
        Outcome::new(
            true,
            format!("{compiled} artifacts agree with the vote on every world in {elapsed:.2?}"),
        )
    } else {
        let mut why = failures.into_iter().take(3).collect::<Vec<_>>();
        why.extend(all.skipped.iter().take(3).cloned());
        why.push(format!("took {elapsed:.2?}"));
        Outcome::new(false, why.join("; "))
    }
}

fn random_instance(forest: &Forest, rng: &mut ChaCha8Rng) -> World {
    let s = forest.space();
    let states = (0..s.len()).map(|v| rng.gen_range(0..s.num_states(v))).collect();
    World::new(s, states).expect("world")
}

/// Explanation and contrastive reports for the instances of every forest.
fn explanation_reports(forests: &[Forest], settings: &Settings) -> Result<(Report, usize), String> {
    let reports: Vec<Result<(Report, usize), String>> = forests
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + i as u64);
            let mut report = Report::default();
            let mut decisions = 0;
            for _ in 0..INSTANCES_PER_FOREST {
                let w = random_instance(f, &mut rng);
                for class in f.classify(&w).map_err(|e| e.to_string())? {
                    report
                        .extend(verify::explanations(f, &w, class, settings).map_err(|e| format!("forest {i}: {e}"))?);
                    decisions += 1;
                }
                report.extend(verify::contrastive(f, &w, settings).map_err(|e| format!("forest {i}: {e}"))?);
            }
            Ok((report, decisions))
        })
        .collect();
    let mut all = Report::default();
    let mut decisions = 0;
    for r in reports {
        let (r, d) = r?;
        all.extend(r);
        decisions += d;
    }
    Ok((all, decisions))
}

fn explanation_suite(reports: &Result<(Report, usize), String>) -> Outcome {
    let (all, decisions) = match reports {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.clone()),
    };
    if !all.skipped.is_empty() {
        return Outcome::new(false, format!("skipped: {}", all.skipped[0]));
    }
    let summary = summarize(all);
    let failing: Vec<String> = summary
        .iter()
        .filter(|(_, (_, bad))| *bad > 0)
        .map(|(name, (n, bad))| format!("{name}: {bad}/{n} failed"))
        .collect();
    if failing.is_empty() {
        Outcome::new(true, format!("{} checks over {decisions} decisions", all.checks.len()))
    } else {
        let example = all
            .failures()
            .next()
            .map(|c| format!("{} {}", c.name, c.detail))
            .unwrap_or_default();
        Outcome::new(
            false,
            format!("{decisions} decisions; {}; first: {example}", failing.join("; ")),
        )
    }
}

/// Validates every Apply result produced while sorting.
struct Validated<'a> {
    inner: DgSemantics<'a>,
    outputs: usize,
    violations: usize,
}

impl Validated<'_> {
    fn check(&mut self, id: DgId) -> DgId {
        self.outputs += 1;
        if self.inner.dg.validate_weak_test_once(id).is_err() {
            self.violations += 1;
        }
        id
    }
}

impl Comparator for Validated<'_> {
    type Value = DgId;

    fn max(&mut self, a: &DgId, b: &DgId) -> foret::Result<DgId> {
        let r = self.inner.max(a, b)?;
        Ok(self.check(r))
    }

    fn min(&mut self, a: &DgId, b: &DgId) -> foret::Result<DgId> {
        let r = self.inner.min(a, b)?;
        Ok(self.check(r))
    }

    fn falsity(&mut self) -> DgId {
        DgId::FALSE
    }
}

fn apply_outputs(forest: &Forest) -> foret::Result<(usize, usize)> {
    let (mut outputs, mut violations) = (0, 0);
    for class in 0..forest.num_classes() {
        let mut dg = Dg::new(forest.space().clone());
        let mut ctx = ApplyCtx::new(Budget::default());
        let mut inputs: Vec<DgId> = forest
            .trees()
            .iter()
            .map(|t| t.class_formula_dg(&mut dg, class, Polarity::Positive))
            .collect::<foret::Result<_>>()?;
        inputs.resize(inputs.len().next_power_of_two().max(2), DgId::FALSE);
        let mut v = Validated {
            inner: DgSemantics::new(&mut dg, &mut ctx),
            outputs: 0,
            violations: 0,
        };
        sortnet(inputs, &mut v)?;
        outputs += v.outputs;
        violations += v.violations;
    }
    Ok((outputs, violations))
}

fn random_clause_set(rng: &mut ChaCha8Rng) -> (Arc<FeatureSpace>, ClauseSet) {
    let vars = rng.gen_range(1..=5);
    let names: Vec<String> = (0..vars).map(|v| format!("v{v}")).collect();
    let states: Vec<Vec<String>> = (0..vars)
        .map(|_| (0..rng.gen_range(2..=4)).map(|s| format!("s{s}")).collect())
        .collect();
    let layout: Vec<(&str, Vec<&str>)> = names
        .iter()
        .zip(&states)
        .map(|(n, s)| (n.as_str(), s.iter().map(String::as_str).collect()))
        .collect();
    let layout: Vec<(&str, &[&str])> = layout.iter().map(|(n, s)| (*n, s.as_slice())).collect();
    let space = Arc::new(FeatureSpace::from_names(&layout).expect("space"));
    let mut set = ClauseSet::new();
    for _ in 0..rng.gen_range(1..=6) {
        let mut lits = Vec::new();
        for v in 0..vars {
            if rng.gen_bool(0.6) {
                lits.push(StateSet {
                    var: v,
                    mask: rng.gen_range(1..space.full(v)),
                });
            }
        }
        set.insert(Clause::new(lits));
    }
    (space, set)
}

fn property_suite(forests: &[Forest], reports: &Result<(Report, usize), String>) -> Outcome {
    let mut failed = Vec::new();

    let applied: Vec<foret::Result<(usize, usize)>> = forests.par_iter().map(apply_outputs).collect();
    let (mut outputs, mut violations) = (0, 0);
    for r in applied {
        match r {
            Ok((o, v)) => {
                outputs += o;
                violations += v;
            }
            Err(e) => failed.push(format!("apply: {e}")),
        }
    }
    if violations > 0 {
        failed.push(format!("{violations}/{outputs} Apply outputs are not weak test-once"));
    }

    let mut explained = 0;
    match reports {
        Ok((all, _)) => {
            let summary = summarize(all);
            for name in [
                "complete reason is monotone",
                "complete reason is or-decomposable",
                "general reason is locally fixated",
                "shortest NRs and shortest GNRs share variable sets",
            ] {
                match summary.get(name) {
                    Some((n, 0)) => explained = *n,
                    Some((n, bad)) => failed.push(format!("{name}: {bad}/{n} failed")),
                    None => failed.push(format!("{name}: never checked")),
                }
            }
        }
        Err(e) => failed.push(e.clone()),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let caps = Caps::default();
    let mut closures = 0;
    for i in 0..200 {
        let (space, set) = random_clause_set(&mut rng);
        let mut order: Vec<usize> = (0..space.len()).collect();
        order.rotate_left(i % space.len());
        let depleted = deplete(set.clone(), &order, &space, None, &caps).map(ClauseSet::into_sorted);
        let naive = naive_closure(set, &space, &caps).map(ClauseSet::into_sorted);
        match (depleted, naive) {
            (Ok(a), Ok(b)) if a == b => closures += 1,
            (Ok(a), Ok(b)) => failed.push(format!("clause set {i}: depletion {a:?} but closure {b:?}")),
            (a, b) => failed.push(format!("clause set {i}: {:?} / {:?}", a.err(), b.err())),
        }
    }

    if failed.is_empty() {
        Outcome::new(
            true,
            format!(
                "{outputs} Apply outputs weak test-once; CR/GR shape and V-equality on {explained} decisions; {closures} closures agree"
            ),
        )
    } else {
        failed.truncate(5);
        Outcome::new(false, failed.join("; "))
    }
}

fn scale_params(seed: u64, trees: usize) -> GenParams {
    GenParams {
        seed,
        features: 20,
        min_states: 2,
        max_states: 4,
        trees,
        depth: 4,
        classes: 2,
    }
}

/// Nodes in the NNF class formula, with the summed size of the per-tree
/// class formulas and the compile time.
fn nnf_size(forest: &Forest) -> (usize, usize, Duration) {
    let mut nnf = Nnf::new(forest.space().clone());
    let trees: usize = forest
        .trees()
        .iter()
        .map(|t| {
            let r = t.class_formula_nnf(&mut nnf, 0, Polarity::Positive);
            nnf.size(r)
        })
        .sum();
    let art = rf_class_formula(forest, 0, Mode::Nnf, &CompileOptions::default()).expect("compile");
    let s = art.size_report();
    (s.nodes, trees, Duration::from_secs_f64(s.seconds))
}

fn scale_suite() -> Outcome {
    let mut failed = Vec::new();
    let x = |trees: usize, n: usize| {
        let l = (n as f64).log2();
        trees as f64 + n as f64 * 2.0 * l * l
    };
    // Least-squares fit through the origin of size against C + nk·log²n.
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, n) in [10usize, 20, 40, 60, 80].into_iter().enumerate() {
        let f = gen_forest(&scale_params(200 + i as u64, n)).expect("forest");
        let (size, trees, _) = nnf_size(&f);
        let xi = x(trees, n);
        sxy += size as f64 * xi;
        sxx += xi * xi;
    }
    let c = sxy / sxx;
    let f = gen_forest(&scale_params(100, 100)).expect("forest");
    let start = Instant::now();
    let (size, trees, _) = nnf_size(&f);
    let elapsed = start.elapsed();
    let ratio = size as f64 / (c * x(trees, 100));
    if elapsed >= Duration::from_secs(10) {
        failed.push(format!("100 trees took {elapsed:.2?}"));
    }
    if !(0.5..=2.0).contains(&ratio) {
        failed.push(format!("100 trees: {size} nodes is {ratio:.2}x the fit"));
    }

    let big = gen_forest(&scale_params(1000, 1000)).expect("forest");
    let start = Instant::now();
    let art = rf_class_formula(&big, 0, Mode::Nnf, &CompileOptions::default()).expect("compile");
    let big_elapsed = start.elapsed();
    let big_nodes = art.size_report().nodes;
    if big_elapsed >= Duration::from_secs(400) {
        failed.push(format!("1000 trees took {big_elapsed:.2?}"));
    }
    if failed.is_empty() {
        Outcome::new(
            true,
            format!(
                "100 trees: {size} nodes ({ratio:.2}x fit) in {elapsed:.2?}; 1000 trees: {big_nodes} nodes in {big_elapsed:.2?}"
            ),
        )
    } else {
        Outcome::new(false, failed.join("; "))
    }
}

fn main() {
    let settings = Settings::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let o = f();
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };

    run("susan suite", &mut susan_suite);
    run("three-class suite", &mut xyz_suite);
    run("sortnet suite", &mut sortnet_suite);
    let forests = oracle_forests();
    run("compilation oracle suite", &mut || {
        compilation_suite(&forests, &settings)
    });
    let reports = explanation_reports(&forests, &settings);
    run("explanation oracle suite", &mut || explanation_suite(&reports));
    run("property suite", &mut || property_suite(&forests, &reports));
    run("scale smoke", &mut scale_suite);

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
