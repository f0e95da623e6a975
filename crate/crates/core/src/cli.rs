//! Command implementations behind the `ontosim` binary. Each command returns
//! the text it wants on stdout; diagnostics travel in [`Failure`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::dataset::JudgmentDataset;
use crate::error::Error;
use crate::evaluation::report::{summary_rows, write_error_table, write_protocol, write_trace};
use crate::evaluation::table1::{table1, JUDGES};
use crate::evaluation::{run_protocol, synthesize_judgments, Experiment};
use crate::exec::Execution;
use crate::ontology::OntologyStore;
use crate::similarity::{similarity, Dimension, WeightVector};
use crate::training::{
    repetition_rng, train_feature_prepared, train_hybrid_prepared, train_pair_prepared, train_user_prepared,
    PreparedDataset, Strategy, TrainingConfig, TrainingState,
};

/// A failed command: exit status 1 for invalid input, 2 for failures during
/// computation.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Computation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Computation(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Computation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Computation(e.to_string())
        }
    }
}

pub type CmdResult = std::result::Result<String, Failure>;

fn require_file(path: &Path, what: &str) -> std::result::Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "{what} `{}` is not a readable file",
            path.display()
        )))
    }
}

fn prepare_out_dir(dir: &Path) -> std::result::Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Validation(format!("cannot create output directory `{}`: {e}", dir.display())))
}

fn load_store(path: &Path) -> std::result::Result<OntologyStore, Failure> {
    OntologyStore::from_path(path).map_err(|e| match e {
        Error::Io(io) => Failure::Validation(format!("cannot read `{}`: {io}", path.display())),
        other => Failure::Validation(other.to_string()),
    })
}

fn load_dataset(path: &Path, store: &OntologyStore) -> std::result::Result<JudgmentDataset, Failure> {
    let ds = JudgmentDataset::from_path(path).map_err(|e| Failure::Validation(e.to_string()))?;
    ds.check_concepts(store)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(ds)
}

fn load_state(path: &Path) -> std::result::Result<TrainingState, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Validation(format!("cannot read `{}`: {e}", path.display())))?;
    TrainingState::from_json(&text).map_err(|e| Failure::Validation(format!("`{}`: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> std::result::Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Computation(format!("cannot write `{}`: {e}", path.display())))
}

pub fn cmd_validate(ontology: &Path, as_json: bool) -> CmdResult {
    require_file(ontology, "ontology")?;
    let store = load_store(ontology)?;
    let s = store.stats();
    if as_json {
        return Ok(serde_json::to_string_pretty(&json!({"valid": true, "counts": s})).expect("json"));
    }
    let mut out = String::new();
    writeln!(out, "ontology `{}` is valid", ontology.display()).unwrap();
    for (name, n) in [
        ("concepts", s.concepts),
        ("essential concepts", s.essential_concepts),
        ("terms (semiotic)", s.terms),
        ("sort edges", s.sort_edges),
        ("compositions", s.compositions),
        ("restrictive relations", s.restrictive),
        ("descriptive triples", s.descriptive),
        ("domains", s.domains),
        ("correspondences", s.correspondences),
    ] {
        writeln!(out, "  {name:<22} {n}").unwrap();
    }
    Ok(out)
}

pub struct SimArgs<'a> {
    pub ontology: &'a Path,
    pub c1: &'a str,
    pub c2: &'a str,
    pub weights: Option<&'a Path>,
    pub pair_id: Option<u32>,
    pub user_id: Option<u32>,
    pub json: bool,
}

pub fn cmd_sim(args: &SimArgs<'_>) -> CmdResult {
    require_file(args.ontology, "ontology")?;
    let store = load_store(args.ontology)?;
    for c in [args.c1, args.c2] {
        if !store.contains(c) {
            return Err(Failure::Validation(format!("unknown concept `{c}`")));
        }
    }
    let (weights, source) = match args.weights {
        None => (
            WeightVector::ones(),
            "all-ones weights (no weights file given)".to_string(),
        ),
        Some(path) if !path.is_file() => (
            WeightVector::ones(),
            format!("all-ones weights (weights file `{}` not found)", path.display()),
        ),
        Some(path) => {
            let state = load_state(path)?;
            match state.weights_for(args.pair_id, args.c1, args.c2, args.user_id) {
                Some(w) => (w, format!("{} weights from `{}`", state.strategy, path.display())),
                None => (
                    WeightVector::ones(),
                    format!("all-ones weights (`{}` has no entry for this pair)", path.display()),
                ),
            }
        }
    };
    let result = similarity(&store, args.c1, args.c2, &weights)?;
    if args.json {
        let partials: serde_json::Map<String, serde_json::Value> = result
            .partials
            .iter()
            .map(|p| {
                (
                    p.dimension.name().to_string(),
                    json!({"value": p.value, "applicable": p.is_applicable()}),
                )
            })
            .collect();
        let doc = json!({
            "concept1": args.c1,
            "concept2": args.c2,
            "global": result.global,
            "partials": partials,
            "weights": weights.w,
            "weights_source": source,
        });
        return Ok(serde_json::to_string_pretty(&doc).expect("json"));
    }
    let mut out = String::new();
    writeln!(out, "similarity({}, {}) = {:.4}", args.c1, args.c2, result.global).unwrap();
    for (p, w) in result.partials.iter().zip(weights.w) {
        match p.value {
            Some(v) => writeln!(out, "  {:<12} {v:.4}  (weight {w:.3})", p.dimension.name()).unwrap(),
            None => writeln!(out, "  {:<12} n/a     (weight {w:.3})", p.dimension.name()).unwrap(),
        }
    }
    writeln!(out, "  using {source}").unwrap();
    Ok(out)
}

pub struct TrainArgs<'a> {
    pub ontology: &'a Path,
    pub dataset: &'a Path,
    pub method: Strategy,
    pub config: TrainingConfig,
    pub out: &'a Path,
    pub weights: Option<&'a Path>,
    pub feature_state: Option<&'a Path>,
    pub json: bool,
}

pub fn cmd_train(args: &TrainArgs<'_>) -> CmdResult {
    require_file(args.ontology, "ontology")?;
    require_file(args.dataset, "dataset")?;
    if let Some(p) = args.feature_state {
        require_file(p, "feature state")?;
    }
    args.config.validate()?;
    prepare_out_dir(args.out)?;
    let store = load_store(args.ontology)?;
    let dataset = load_dataset(args.dataset, &store)?;
    let prepared = PreparedDataset::new(&dataset, &store)?;
    let cfg = &args.config;
    let mut notes = Vec::new();
    let mut rng = repetition_rng(cfg.seed, 0);
    let outcome = match args.method {
        Strategy::Pair => train_pair_prepared(&prepared, cfg, &mut rng)?,
        Strategy::User => train_user_prepared(&prepared, cfg, &mut rng)?,
        Strategy::Feature => train_feature_prepared(&prepared, cfg, &mut rng)?,
        Strategy::Hybrid => {
            let feature = match args.feature_state {
                Some(p) => load_state(p)?,
                None => {
                    notes.push("no feature state given: ran feature-oriented training first".to_string());
                    train_feature_prepared(&prepared, cfg, &mut repetition_rng(cfg.seed, u64::MAX))?.state
                }
            };
            train_hybrid_prepared(&prepared, cfg, &feature, &mut rng)?
        }
    };
    let state_path: PathBuf = args
        .weights
        .map(Path::to_path_buf)
        .unwrap_or_else(|| args.out.join(format!("state_{}.json", args.method)));
    write_file(&state_path, outcome.state.to_json().as_bytes())?;

    let trace_path = args.out.join(format!("train_trace_{}.csv", args.method));
    let mut buf = Vec::new();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record(["iteration", "error", "accumulated_error"])
        .map_err(Error::from)?;
    let acc = crate::evaluation::accumulate(&outcome.error_trace);
    for (i, (e, a)) in outcome.error_trace.iter().zip(&acc).enumerate() {
        w.write_record([(i + 1).to_string(), format!("{e:.4}"), format!("{a:.4}")])
            .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    drop(w);
    write_file(&trace_path, &buf)?;

    let avg = outcome.average_error();
    if args.json {
        let doc = json!({
            "method": args.method.name(),
            "average_error": avg,
            "vectors": outcome.state.weights.len(),
            "state": state_path,
            "trace": trace_path,
            "notes": notes,
        });
        return Ok(serde_json::to_string_pretty(&doc).expect("json"));
    }
    let mut out = String::new();
    for n in &notes {
        writeln!(out, "note: {n}").unwrap();
    }
    writeln!(
        out,
        "{} training: {} weight vectors",
        args.method,
        outcome.state.weights.len()
    )
    .unwrap();
    writeln!(out, "average error: {avg:.2}%").unwrap();
    writeln!(out, "state written to {}", state_path.display()).unwrap();
    writeln!(out, "trace written to {}", trace_path.display()).unwrap();
    Ok(out)
}

pub struct ExperimentArgs<'a> {
    pub ontology: &'a Path,
    pub dataset: &'a Path,
    pub config: TrainingConfig,
    pub out: &'a Path,
    pub dimension: Option<Dimension>,
    pub execution: Execution,
    pub json: bool,
}

pub fn cmd_experiment(args: &ExperimentArgs<'_>) -> CmdResult {
    require_file(args.ontology, "ontology")?;
    require_file(args.dataset, "dataset")?;
    args.config.validate()?;
    prepare_out_dir(args.out)?;
    let store = load_store(args.ontology)?;
    let dataset = load_dataset(args.dataset, &store)?;

    if let Some(d) = args.dimension {
        let exp = Experiment::new(&dataset, &store, args.config)?;
        let single = exp.single_dimension(d);
        let name = single.report.method.name();
        let mut table = Vec::new();
        write_error_table(&single.report, &mut table)?;
        write_file(&args.out.join(format!("table_{name}.csv")), &table)?;
        let mut trace = Vec::new();
        write_trace(&single.report, &mut trace)?;
        write_file(&args.out.join(format!("trace_{name}.csv")), &trace)?;
        if args.json {
            return Ok(serde_json::to_string_pretty(&single).expect("json"));
        }
        let firsts = single.ranking.iter().filter(|r| r.best == Some(d)).count();
        return Ok(format!(
            "{name}: average error {:.2}% over {} scored pairs; ranks first on {firsts} pairs\n",
            single.report.avg_error,
            single.report.defined_errors().len()
        ));
    }

    let results = run_protocol(&dataset, &store, &args.config, args.execution)?;
    let written = write_protocol(&results, args.out)?;
    let rows = summary_rows(&results);
    if args.json {
        let doc = json!({
            "summary": rows,
            "significance": results.significance,
            "repeated_pairs": results.repeated_pairs,
            "files": written,
        });
        return Ok(serde_json::to_string_pretty(&doc).expect("json"));
    }
    let mut out = String::new();
    writeln!(
        out,
        "{:<24} {:>9} {:>10} {:>11}",
        "method", "avg (%)", "published", "divergence"
    )
    .unwrap();
    for r in &rows {
        let published = r.published.map(|p| format!("{p:.1}")).unwrap_or_else(|| "-".into());
        let divergence = r.divergence.map(|d| format!("{d:+.2}")).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<24} {:>9.2} {:>10} {:>11}",
            r.method, r.avg_error, published, divergence
        )
        .unwrap();
    }
    let s = &results.significance;
    writeln!(
        out,
        "feature vs sort_only: statistic {:.3}, acceptance region ({:.3}, +inf), reject null: {}",
        s.statistic, -s.critical, s.reject
    )
    .unwrap();
    writeln!(out, "{} files written to {}", written.len(), args.out.display()).unwrap();
    Ok(out)
}

/// Regenerates a judgment dataset matching the published per-pair statistics.
pub fn cmd_synth(out: &Path, users: usize, seed: u64) -> CmdResult {
    let ds = synthesize_judgments(&table1(), users, seed)?;
    let mut buf = Vec::new();
    ds.write_csv(&mut buf)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_out_dir(parent)?;
    }
    write_file(out, &buf)?;
    Ok(format!(
        "{} judgments ({} pairs x {users} judges) written to {}\n",
        ds.judgments().len(),
        ds.pairs().len(),
        out.display()
    ))
}

pub const DEFAULT_JUDGES: usize = JUDGES;
