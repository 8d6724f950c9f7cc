use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use foret::circuits::{FeatureSpace, VarSet, World};
use foret::compile::{budget, rf_class_formula, Artifact, ArtifactJson, CompileOptions, Mode, SizeReport};
use foret::explain::{
    contrastive_explanations, necessary_reasons, robustness, shortest_flips, shortest_gnrs, sufficient_reasons, Caps,
    Clause, Term,
};
use foret::forest::Forest;
use foret::gen::{gen_forest, GenParams};
use foret::reasons::{complete_reason, general_reason};
use foret::verify::{self, Report, Settings};

use crate::{
    CeArgs, Cli, Command, CompileArgs, DecisionArgs, GenArgs, Kind, Limits, ScheduleArgs, StatsArgs, Ties, VerifyArgs,
};

pub fn run(cli: Cli) -> Result<ExitCode> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.limits.workers {
        pool = pool.num_threads(n.get());
    }
    let pool = pool.build().context("starting worker threads")?;
    let limits = cli.limits;
    pool.install(|| match cli.command {
        Command::Compile(a) => compile(&a, &limits),
        Command::Explain(a) => explain(&a.decision, &a.kinds, &limits),
        Command::Ce(a) => ce(&a, &limits),
        Command::Robustness(a) => explain(&a, &[Kind::Robustness], &limits),
        Command::Flips(a) => explain(&a, &[Kind::Robustness, Kind::Flips], &limits),
        Command::Verify(a) => verify(&a, &limits),
        Command::Stats(a) => stats(&a, &limits),
        Command::Gen(a) => gen(&a),
        Command::Schedule(a) => schedule(&a),
    })
}

fn options(limits: &Limits, presort_pairs: bool) -> CompileOptions {
    CompileOptions {
        presort_pairs,
        budget: budget(limits.node_budget.map(|n| n.get()), limits.time_budget),
    }
}

fn caps(limits: &Limits) -> Caps {
    Caps {
        items: limits.max_items.get(),
        flips: limits.max_flips.get(),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_forest(path: &Path) -> Result<Forest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Forest::from_json_str(&text).with_context(|| format!("loading forest {}", path.display()))
}

fn load_instance(space: &FeatureSpace, path: &Path) -> Result<World> {
    World::from_json(space, &read_json(path)?).with_context(|| format!("loading instance {}", path.display()))
}

/// Artifacts from a file holding one artifact or an array of them.
fn load_artifacts(path: &Path) -> Result<Vec<Artifact>> {
    let value = read_json(path)?;
    let jsons: Vec<ArtifactJson> = match value {
        Value::Array(_) => serde_json::from_value(value),
        _ => serde_json::from_value(value).map(|a| vec![a]),
    }
    .with_context(|| format!("reading artifacts from {}", path.display()))?;
    jsons
        .iter()
        .map(|j| Artifact::from_json(j).with_context(|| format!("loading artifact from {}", path.display())))
        .collect()
}

/// Writes `text` to `out`, or to standard output. A closed pipe on
/// standard output is not an error.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing standard output"),
        },
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn round3(seconds: f64) -> f64 {
    (seconds * 1000.0).round() / 1000.0
}

#[derive(Serialize)]
struct Size {
    nodes: usize,
    edges: usize,
    seconds: f64,
}

impl From<SizeReport> for Size {
    fn from(s: SizeReport) -> Self {
        Size {
            nodes: s.nodes,
            edges: s.edges,
            seconds: round3(s.seconds),
        }
    }
}

fn classes_to_compile(forest: &Forest, class: Option<&str>) -> Result<Vec<usize>> {
    Ok(match class {
        Some(name) => vec![forest.class_index(name)?],
        None => (0..forest.num_classes()).collect(),
    })
}

fn compile(a: &CompileArgs, limits: &Limits) -> Result<ExitCode> {
    let forest = load_forest(&a.forest)?;
    let classes = classes_to_compile(&forest, a.class.as_deref())?;
    let opts = options(limits, !a.no_presort_opt);
    let mode = Mode::from(a.mode);
    let arts: Vec<Artifact> = classes
        .par_iter()
        .map(|&c| {
            rf_class_formula(&forest, c, mode, &opts)
                .with_context(|| format!("compiling class `{}` as {mode}", forest.classes()[c]))
        })
        .collect::<Result<_>>()?;
    let stats: Vec<Value> = arts
        .iter()
        .map(|art| json!({"class": art.class_name(), "mode": art.mode, "size": Size::from(art.size_report())}))
        .collect();
    for s in &stats {
        eprintln!(
            "compiled {} ({}): {} nodes in {:.3}s",
            s["class"].as_str().unwrap_or_default(),
            mode,
            s["size"]["nodes"],
            s["size"]["seconds"].as_f64().unwrap_or_default()
        );
    }
    let jsons: Vec<ArtifactJson> = arts.iter().map(Artifact::to_json).collect();
    if a.class.is_some() {
        write_json(a.out.as_deref(), &jsons[0])?;
    } else {
        write_json(a.out.as_deref(), &jsons)?;
    }
    if let Some(path) = &a.stats {
        write_json(Some(path), &stats)?;
    }
    if a.out.is_some() {
        write_json(None, &stats)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// The class whose decision is explained.
fn pick_class(forest: &Forest, instance: &World, class: Option<&str>, ties: Ties) -> Result<usize> {
    if let Some(name) = class {
        return Ok(forest.class_index(name)?);
    }
    let winners = forest.classify(instance)?;
    match (winners.as_slice(), ties) {
        ([one], _) => Ok(*one),
        (tied, Ties::HighestRanked) => Ok(tied[0]),
        (tied, Ties::Explicit) => {
            let names: Vec<&str> = tied.iter().map(|&c| forest.classes()[c].as_str()).collect();
            bail!(
                "the instance ties between classes {}; pass --class or --ties highest-ranked",
                names.join(", ")
            )
        }
    }
}

fn decision_artifact(forest: &Forest, a: &DecisionArgs, class: usize, limits: &Limits) -> Result<Artifact> {
    let Some(path) = &a.artifact else {
        return Ok(rf_class_formula(forest, class, Mode::DgConj, &options(limits, true))?);
    };
    let art = load_artifacts(path)?
        .into_iter()
        .find(|art| art.class == class)
        .ok_or_else(|| {
            anyhow!(
                "{} holds no artifact for class `{}`",
                path.display(),
                forest.classes()[class]
            )
        })?;
    if art.meta.classes != forest.classes() || **art.space() != **forest.space() {
        bail!("artifact {} was compiled from a different forest", path.display());
    }
    if art.graphs().is_none() {
        bail!(
            "reasons need a dg-conj or dg-full artifact, {} is {}",
            path.display(),
            art.mode
        );
    }
    Ok(art)
}

fn terms(space: &FeatureSpace, ts: &[Term]) -> Value {
    json!(ts.iter().map(|t| t.to_json(space)).collect::<Vec<_>>())
}

fn clauses(space: &FeatureSpace, cs: &[Clause]) -> Value {
    json!(cs.iter().map(|c| c.to_json(space)).collect::<Vec<_>>())
}

fn var_names(space: &FeatureSpace, sets: &[VarSet]) -> Value {
    json!(sets.iter().map(|s| s.names(space)).collect::<Vec<_>>())
}

fn explain(a: &DecisionArgs, kinds: &[Kind], limits: &Limits) -> Result<ExitCode> {
    let forest = load_forest(&a.forest)?;
    let space = forest.space();
    let instance = load_instance(space, &a.instance)?;
    let class = pick_class(&forest, &instance, a.class.as_deref(), a.ties)?;
    let art = decision_artifact(&forest, a, class, limits)?;
    let (dg, roots) = art.graphs().expect("checked graph artifact");
    let caps = caps(limits);
    let cr = complete_reason(dg, roots, &instance)?;
    let wants = |k: Kind| kinds.contains(&k);

    let mut out = Map::new();
    out.insert("class".into(), json!(forest.classes()[class]));
    out.insert("instance".into(), instance.to_json(space));
    if wants(Kind::Cr) {
        out.insert("complete_reason".into(), serde_json::to_value(cr.to_json())?);
    }
    if wants(Kind::Sr) {
        out.insert(
            "sufficient_reasons".into(),
            terms(space, &sufficient_reasons(&cr, &caps)?),
        );
    }
    if wants(Kind::Nr) {
        out.insert(
            "necessary_reasons".into(),
            clauses(space, &necessary_reasons(&cr, &caps)?),
        );
    }
    let needs_general = [Kind::Gr, Kind::Gnr, Kind::Flips].iter().any(|&k| wants(k));
    let needs_rob = needs_general || wants(Kind::Robustness);
    if needs_rob {
        let rob = robustness(&cr, &caps)?;
        if wants(Kind::Robustness) {
            out.insert(
                "robustness".into(),
                json!({"distance": rob.distance, "vars": var_names(space, &rob.vars)}),
            );
        }
        if needs_general {
            let gr = general_reason(dg, roots, &instance)?;
            if wants(Kind::Gr) {
                out.insert("general_reason".into(), serde_json::to_value(gr.to_json())?);
            }
            if wants(Kind::Gnr) || wants(Kind::Flips) {
                let gnrs = shortest_gnrs(&gr, &rob.vars, &caps)?;
                if wants(Kind::Gnr) {
                    out.insert("shortest_gnrs".into(), clauses(space, &gnrs));
                }
                if wants(Kind::Flips) {
                    let flips = shortest_flips(space, &instance, &gnrs, &caps)?;
                    let worlds: Vec<Value> = flips.iter().map(|w| w.to_json(space)).collect();
                    out.insert("flips".into(), json!(worlds));
                }
            }
        }
    }
    write_json(None, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn ce(a: &CeArgs, limits: &Limits) -> Result<ExitCode> {
    let forest = load_forest(&a.forest)?;
    let space = forest.space();
    let instance = load_instance(space, &a.instance)?;
    let target = forest.class_index(&a.target)?;
    let ces = contrastive_explanations(&forest, &instance, target, &options(limits, true), &caps(limits))?;
    let own: Vec<&str> = forest
        .classify(&instance)?
        .iter()
        .map(|&c| forest.classes()[c].as_str())
        .collect();
    let out = json!({
        "class": own,
        "target": a.target,
        "instance": instance.to_json(space),
        "contrastive_explanations": clauses(space, &ces),
    });
    write_json(None, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(a: &VerifyArgs, limits: &Limits) -> Result<ExitCode> {
    let start = Instant::now();
    let forest = load_forest(&a.forest)?;
    let settings = Settings {
        compile: options(limits, true),
        caps: caps(limits),
        world_cap: limits.world_cap.get() as u128,
    };
    let mut report = verify::compilation(&forest, &settings)?;
    if report.skipped.is_empty() {
        let parts: Vec<Report> = verify::random_instances(&forest, a.seed, a.trials)
            .par_iter()
            .map(|w| verify::instance(&forest, w, &settings))
            .collect::<foret::Result<_>>()?;
        for p in parts {
            report.extend(p);
        }
    }
    let mut summary: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in &report.checks {
        let e = summary.entry(c.name.split(" [").next().unwrap_or(&c.name)).or_default();
        e.0 += 1;
        e.1 += usize::from(!c.passed);
    }
    let failures: Vec<_> = report.failures().collect();
    let out = json!({
        "passed": report.passed(),
        "checks": report.checks.len(),
        "failed": failures.len(),
        "summary": summary
            .iter()
            .map(|(name, (n, bad))| (name.to_string(), json!({"checks": n, "failed": bad})))
            .collect::<Map<_, _>>(),
        "failures": failures,
        "skipped": report.skipped,
        "seconds": round3(start.elapsed().as_secs_f64()),
    });
    write_json(None, &out)?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "verification failed: {} of {} checks",
            failures.len(),
            report.checks.len()
        );
        Ok(ExitCode::FAILURE)
    }
}

/// One cell of the stats table.
enum Cell {
    Built(SizeReport),
    Failed(String),
}

fn stats(a: &StatsArgs, limits: &Limits) -> Result<ExitCode> {
    // class name -> mode -> cell, in first-seen class order
    let mut rows: Vec<(String, BTreeMap<Mode, Cell>)> = Vec::new();
    let mut modes: Vec<Mode> = Vec::new();
    let mut add = |class: &str, mode: Mode, cell: Cell| {
        if !modes.contains(&mode) {
            modes.push(mode);
        }
        match rows.iter_mut().find(|(c, _)| c == class) {
            Some((_, cells)) => {
                cells.insert(mode, cell);
            }
            None => rows.push((class.to_string(), BTreeMap::from([(mode, cell)]))),
        }
    };
    if let Some(path) = &a.forest {
        let forest = load_forest(path)?;
        let opts = options(limits, !a.no_presort_opt);
        let jobs: Vec<(usize, Mode)> = (0..forest.num_classes())
            .flat_map(|c| a.modes.iter().map(move |&m| (c, Mode::from(m))))
            .collect();
        let cells: Vec<Cell> = jobs
            .par_iter()
            .map(|&(c, m)| match rf_class_formula(&forest, c, m, &opts) {
                Ok(art) => Cell::Built(art.size_report()),
                Err(e) => Cell::Failed(e.to_string()),
            })
            .collect();
        for ((c, m), cell) in jobs.into_iter().zip(cells) {
            add(&forest.classes()[c], m, cell);
        }
    } else {
        for path in &a.artifact {
            for art in load_artifacts(path)? {
                add(art.class_name(), art.mode, Cell::Built(art.size_report()));
            }
        }
    }

    let mut failed = false;
    let classes: Vec<Value> = rows
        .iter()
        .map(|(class, cells)| {
            let per_mode: Map<String, Value> = cells
                .iter()
                .map(|(m, cell)| {
                    let v = match cell {
                        Cell::Built(s) => json!(Size::from(*s)),
                        Cell::Failed(e) => {
                            failed = true;
                            json!({"error": e})
                        }
                    };
                    (m.to_string(), v)
                })
                .collect();
            json!({"class": class, "modes": per_mode})
        })
        .collect();
    eprint!("{}", table(&rows, &modes));
    write_json(None, &json!({"classes": classes}))?;
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

/// Aligned text table: one row per class, node count and seconds per mode.
fn table(rows: &[(String, BTreeMap<Mode, Cell>)], modes: &[Mode]) -> String {
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["class".to_string()];
    for m in modes {
        header.push(format!("{m} nodes"));
        header.push(format!("{m} s"));
    }
    grid.push(header);
    for (class, cells) in rows {
        let mut line = vec![class.clone()];
        for m in modes {
            match cells.get(m) {
                Some(Cell::Built(s)) => {
                    line.push(s.nodes.to_string());
                    line.push(format!("{:.3}", s.seconds));
                }
                Some(Cell::Failed(_)) => line.extend(["failed".into(), "-".into()]),
                None => line.extend(["-".into(), "-".into()]),
            }
        }
        grid.push(line);
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|i| grid.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &grid {
        let cols: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(cols.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn gen(a: &GenArgs) -> Result<ExitCode> {
    let (min_states, max_states) = match a.states {
        Some(k) => (k, k),
        None => (a.min_states, a.max_states),
    };
    let forest = gen_forest(&GenParams {
        seed: a.seed,
        features: a.features,
        min_states,
        max_states,
        trees: a.trees,
        depth: a.depth,
        classes: a.classes,
    })?;
    emit(a.out.as_deref(), &forest.to_json_string())?;
    Ok(ExitCode::SUCCESS)
}

fn schedule(a: &ScheduleArgs) -> Result<ExitCode> {
    let placements = foret::sortnet::schedule(a.inputs, a.presorted_pairs)?;
    let triples: Vec<[usize; 3]> = placements.iter().map(|p| [p.layer, p.i, p.j]).collect();
    write_json(None, &triples)?;
    Ok(ExitCode::SUCCESS)
}
