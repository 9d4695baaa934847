//! One function per subcommand. Each validates every path it was given
//! before doing any work and returns the JSON summary to print.

use std::collections::{BTreeMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use cgforge::dataset::{
    export_palign_pairs, load_dialogues, load_schema_catalog, read_jsonl, write_json, write_jsonl,
    Candidate, Catalog, Decision, Interaction, Prediction,
};
use cgforge::drafter::{draft_candidates, DraftReport, Generator};
use cgforge::eval::{evaluate, tag_splits, SplitTag};
use cgforge::linker::{filter_dataset, FilterReport, LinkerConfig};
use cgforge::patterns::{collect_patterns, CollectReport, PatternLibrary};
use cgforge::recombine::{default_rules, generate_candidates, load_rules, GenerateConfig};
use cgforge::review::{EnqueueReport, ReviewStore};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{pick, resolve_seed, PipelineConfig};
use crate::error::CliError;
use crate::{Cli, Command, DraftOpts, GeneratorKind, RecombineOpts};

const DEFAULT_OUT: &str = "out";
const DEFAULT_CAP: usize = 3;
const DEFAULT_TIMEOUT_MS: u64 = 10_000;
const DEFAULT_CONCURRENCY: usize = 4;
const DEFAULT_PORT: u16 = 8080;

type Summary = Result<Option<Value>, CliError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// An input that has to exist.
fn input(p: PathBuf) -> Result<PathBuf, CliError> {
    if p.exists() {
        Ok(p)
    } else {
        Err(CliError::Io(format!(
            "{}: no such file or directory",
            p.display()
        )))
    }
}

fn required(
    flag: &Option<PathBuf>,
    config: &Option<PathBuf>,
    name: &str,
) -> Result<PathBuf, CliError> {
    input(pick(flag, config, name)?)
}

fn optional(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    flag.clone()
        .or_else(|| config.clone())
        .map(input)
        .transpose()
}

fn out_dir(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| config.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Best-effort absolute form of a path that may not exist yet.
fn canonical(p: &Path) -> PathBuf {
    if let Ok(c) = p.canonicalize() {
        return c;
    }
    match (p.parent(), p.file_name()) {
        (Some(parent), Some(name)) => canonical(if parent.as_os_str().is_empty() {
            Path::new(".")
        } else {
            parent
        })
        .join(name),
        _ => p.to_path_buf(),
    }
}

/// Output paths, refusing any that would overwrite an input.
fn outputs(dir: &Path, names: &[&str], inputs: &[&Path]) -> Result<Vec<PathBuf>, CliError> {
    let ins: Vec<PathBuf> = inputs.iter().map(|p| canonical(p)).collect();
    let outs: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
    for o in &outs {
        let c = canonical(o);
        if let Some(i) = ins.iter().find(|i| **i == c || c.starts_with(i)) {
            return Err(CliError::Usage(format!(
                "output {} would overwrite input {}; choose another --out",
                o.display(),
                i.display()
            )));
        }
    }
    Ok(outs)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn load_split(path: &Path, catalog: &Catalog) -> Result<LoadedSplit, CliError> {
    let d = load_dialogues(path, catalog)?;
    for r in &d.rejects {
        log::warn!(
            "{}: record {} ({}) skipped: {}",
            path.display(),
            r.record,
            r.id,
            r.reason
        );
    }
    log::info!(
        "{}: {} interactions, {} rejected, {} turns without a query",
        path.display(),
        d.interactions.len(),
        d.rejects.len(),
        d.skipped_turns
    );
    Ok(LoadedSplit {
        rejects: d.rejects.len(),
        skipped_turns: d.skipped_turns,
        interactions: d.interactions,
    })
}

struct LoadedSplit {
    interactions: Vec<Interaction>,
    rejects: usize,
    skipped_turns: usize,
}

impl LoadedSplit {
    fn questions(&self) -> usize {
        self.interactions.iter().map(|i| i.turns.len()).sum()
    }
}

struct Ctx {
    config: PipelineConfig,
    seed_flag: Option<u64>,
}

impl Ctx {
    fn seed(&self) -> Result<u64, CliError> {
        resolve_seed(self.seed_flag, self.config.seed)
    }

    fn linker(&self) -> LinkerConfig {
        self.config.linker.clone().unwrap_or_default()
    }

    fn generate_config(
        &self,
        opts: &RecombineOpts,
    ) -> Result<(GenerateConfig, Option<PathBuf>), CliError> {
        let cap = opts.cap.or(self.config.cap_per_pair).unwrap_or(DEFAULT_CAP);
        let rules_path = optional(&opts.rules, &self.config.rules)?;
        let rules = match &rules_path {
            Some(p) => load_rules(p)?,
            None => default_rules(),
        };
        let cfg = GenerateConfig {
            seed: self.seed()?,
            cap_per_pair: (cap > 0).then_some(cap),
            rules,
        };
        Ok((cfg, rules_path))
    }

    fn generator(&self, opts: &DraftOpts) -> Result<Generator, CliError> {
        let kind = match (opts.generator, self.config.generator.as_deref()) {
            (Some(k), _) => k,
            (None, None | Some("rule")) => GeneratorKind::Rule,
            (None, Some("external")) => GeneratorKind::External,
            (None, Some(other)) => {
                return Err(CliError::Usage(format!(
                    "generator {other:?} in config is neither \"rule\" nor \"external\""
                )))
            }
        };
        if kind == GeneratorKind::Rule {
            return Ok(Generator::Rule);
        }
        let command: Vec<String> = match &opts.command {
            Some(c) => c.split_whitespace().map(str::to_string).collect(),
            None => self.config.command.clone().unwrap_or_default(),
        };
        if command.is_empty() {
            return Err(CliError::Usage(
                "--generator external needs --command".into(),
            ));
        }
        let concurrency = opts
            .concurrency
            .or(self.config.concurrency)
            .unwrap_or(DEFAULT_CONCURRENCY);
        if concurrency == 0 {
            return Err(CliError::Usage("--concurrency must be at least 1".into()));
        }
        let timeout_ms = opts
            .timeout_ms
            .or(self.config.timeout_ms)
            .unwrap_or(DEFAULT_TIMEOUT_MS);
        Ok(Generator::External {
            command,
            timeout: Duration::from_millis(timeout_ms),
            concurrency,
        })
    }
}

pub fn dispatch(cli: Cli) -> Summary {
    let config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let ctx = Ctx {
        config,
        seed_flag: cli.seed,
    };
    let c = &ctx.config;
    match cli.command {
        Command::Filter { schema, train, out } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let train = required(&train, &c.train, "train")?;
            let out = out_dir(&out.out, &c.out);
            let files = outputs(&out, &["filter_report.json"], &[&schema, &train])?;
            let catalog = load_schema_catalog(&schema)?;
            let split = load_split(&train, &catalog)?;
            let report = filter_dataset(&split.interactions, &catalog, &ctx.linker());
            create_dir(&out)?;
            write_json(&files[0], &report)?;
            Ok(Some(filter_summary(&report, &split)))
        }
        Command::Patterns {
            schema,
            train,
            dependent,
            out,
        } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let train = required(&train, &c.train, "train")?;
            let dependent = optional(&dependent, &None)?;
            let out = out_dir(&out.out, &c.out);
            let mut ins = vec![schema.as_path(), train.as_path()];
            ins.extend(dependent.as_deref());
            let files = outputs(&out, &["library.json", "patterns_report.json"], &ins)?;
            let catalog = load_schema_catalog(&schema)?;
            let split = load_split(&train, &catalog)?;
            let report: FilterReport = match &dependent {
                Some(p) => read_json(p)?,
                None => filter_dataset(&split.interactions, &catalog, &ctx.linker()),
            };
            let (lib, summary) = patterns_stage(&split.interactions, &report, &catalog);
            create_dir(&out)?;
            write_json(&files[0], &lib)?;
            write_json(&files[1], &summary)?;
            Ok(Some(summary))
        }
        Command::Recombine {
            schema,
            dev,
            library,
            opts,
            out,
        } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let dev = required(&dev, &c.dev, "dev")?;
            let library = required(&library, &None, "library")?;
            let (gen_cfg, rules) = ctx.generate_config(&opts)?;
            let out = out_dir(&out.out, &c.out);
            let mut ins = vec![schema.as_path(), dev.as_path(), library.as_path()];
            ins.extend(rules.as_deref());
            let files = outputs(&out, &["candidates.jsonl", "generate_report.json"], &ins)?;
            let catalog = load_schema_catalog(&schema)?;
            let lib: PatternLibrary = read_json(&library)?;
            let dev = load_split(&dev, &catalog)?;
            let (cands, report) = generate_candidates(&lib, &dev.interactions, &catalog, &gen_cfg);
            create_dir(&out)?;
            write_jsonl(&files[0], &cands)?;
            write_json(&files[1], &report)?;
            Ok(Some(to_value(&report)))
        }
        Command::Draft {
            schema,
            candidates,
            opts,
            out,
        } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let candidates = required(&candidates, &None, "candidates")?;
            let generator = ctx.generator(&opts)?;
            let out = out_dir(&out.out, &c.out);
            let files = outputs(
                &out,
                &["candidates.jsonl", "draft_report.json"],
                &[&schema, &candidates],
            )?;
            let catalog = load_schema_catalog(&schema)?;
            let mut cands: Vec<Candidate> = read_jsonl(&candidates)?;
            let report = draft_stage(&mut cands, &catalog, &generator)?;
            create_dir(&out)?;
            write_jsonl(&files[0], &cands)?;
            write_json(&files[1], &report)?;
            Ok(Some(to_value(&report)))
        }
        Command::ReviewServe {
            store,
            schema,
            enqueue,
            host,
            port,
            static_dir,
        } => {
            let store_dir = pick(&store, &c.store, "store")?;
            let queued = enqueue_inputs(&enqueue, &schema.schema, c)?;
            let static_dir = optional(&static_dir, &c.static_dir)?;
            let port = port.or(c.port).unwrap_or(DEFAULT_PORT);
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .or_else(|_| format!("[{host}]:{port}").parse())
                .map_err(|_| CliError::Usage(format!("invalid --host {host:?}")))?;
            let mut store = ReviewStore::open(&store_dir)?;
            if let Some((cands, catalog)) = queued {
                let r = store.enqueue(&cands, &catalog)?;
                log_enqueue(&r);
            }
            let shared = Arc::new(RwLock::new(store));
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?;
            rt.block_on(crate::server::serve(shared, addr, static_dir))?;
            Ok(None)
        }
        Command::ReviewApply {
            store,
            schema,
            enqueue,
            decisions,
        } => {
            let store_dir = pick(&store, &c.store, "store")?;
            let decisions = required(&decisions, &None, "decisions file (positional)")?;
            let queued = enqueue_inputs(&enqueue, &schema.schema, c)?;
            let decisions: Vec<Decision> = read_jsonl(&decisions)?;
            let mut store = ReviewStore::open(&store_dir)?;
            let enqueue_report = match queued {
                Some((cands, catalog)) => Some(store.enqueue(&cands, &catalog)?),
                None => None,
            };
            let mut applied = 0;
            let mut rejected = Vec::new();
            for (i, d) in decisions.into_iter().enumerate() {
                match store.record_decision(d) {
                    Ok(_) => applied += 1,
                    Err(cgforge::review::ReviewError::Store(e)) => return Err(e.into()),
                    Err(e) => {
                        log::warn!("decision {}: {e}", i + 1);
                        rejected.push(json!({"line": i + 1, "reason": e.to_string()}));
                    }
                }
            }
            Ok(Some(json!({
                "enqueue": enqueue_report,
                "applied": applied,
                "rejected": rejected,
                "stats": store.stats(),
            })))
        }
        Command::Export {
            store,
            palign,
            schema,
            out,
        } => {
            let store_dir = store
                .clone()
                .or_else(|| c.store.clone())
                .map(input)
                .transpose()?;
            let palign = optional(&palign, &None)?;
            if store_dir.is_none() && palign.is_none() {
                return Err(CliError::Usage(
                    "export needs --store, --palign or both".into(),
                ));
            }
            let schema = match &palign {
                Some(_) => Some(required(&schema.schema, &c.schema, "schema")?),
                None => None,
            };
            let out = out_dir(&out.out, &c.out);
            let mut ins: Vec<&Path> = Vec::new();
            ins.extend(store_dir.as_deref());
            ins.extend(palign.as_deref());
            ins.extend(schema.as_deref());
            let files = outputs(&out, &["benchmark.json", "palign.jsonl"], &ins)?;
            let mut summary = serde_json::Map::new();
            let benchmark = store_dir
                .map(|d| ReviewStore::open(&d).map(|s| s.export_benchmark()))
                .transpose()?;
            let pairs = match (&palign, &schema) {
                (Some(p), Some(s)) => {
                    let catalog = load_schema_catalog(s)?;
                    Some(export_palign_pairs(&load_split(p, &catalog)?.interactions))
                }
                _ => None,
            };
            create_dir(&out)?;
            if let Some(b) = benchmark {
                write_json(&files[0], &b)?;
                summary.insert("benchmark_interactions".into(), json!(b.len()));
            }
            if let Some(p) = pairs {
                write_jsonl(&files[1], &p)?;
                summary.insert("palign_pairs".into(), json!(p.len()));
            }
            Ok(Some(Value::Object(summary)))
        }
        Command::SplitTag {
            schema,
            train,
            gold,
            out,
        } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let train = required(&train, &c.train, "train")?;
            let gold = required(&gold, &c.dev, "gold")?;
            let out = out_dir(&out.out, &c.out);
            let files = outputs(
                &out,
                &["split_tags.json", "split_table.csv"],
                &[&schema, &train, &gold],
            )?;
            let catalog = load_schema_catalog(&schema)?;
            let train = load_split(&train, &catalog)?;
            let gold = load_split(&gold, &catalog)?;
            let lib = library(&train.interactions, &catalog, &ctx.linker());
            let tags = tag_splits(&gold.interactions, &lib, &catalog);
            let counts = split_counts(&tags);
            create_dir(&out)?;
            write_json(&files[0], &tags)?;
            let mut csv = String::from("split,questions\n");
            for (k, n) in &counts {
                csv.push_str(&format!("{k},{n}\n"));
            }
            std::fs::write(&files[1], csv)
                .map_err(|e| CliError::Io(format!("{}: {e}", files[1].display())))?;
            Ok(Some(json!({
                "interactions": gold.interactions.len(),
                "questions": gold.questions(),
                "splits": counts,
            })))
        }
        Command::Evaluate {
            gold,
            pred,
            train,
            schema,
            out,
        } => {
            let gold = required(&gold, &None, "gold")?;
            let pred = required(&pred, &None, "pred")?;
            let train = required(&train, &c.train, "train")?;
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let out = out.unwrap_or_else(|| PathBuf::from("report.json"));
            let parent = out.parent().unwrap_or(Path::new("")).to_path_buf();
            let name = out
                .file_name()
                .ok_or_else(|| CliError::Usage(format!("--out {} is not a file", out.display())))?
                .to_string_lossy()
                .into_owned();
            let files = outputs(&parent, &[&name], &[&gold, &pred, &train, &schema])?;
            let catalog = load_schema_catalog(&schema)?;
            let gold = load_split(&gold, &catalog)?;
            let preds: Vec<Prediction> = read_jsonl(&pred)?;
            let mut seen = HashSet::new();
            for p in &preds {
                if !seen.insert(p.question_id.as_str()) {
                    return Err(CliError::Usage(format!(
                        "question {} has more than one prediction",
                        p.question_id
                    )));
                }
            }
            let train = load_split(&train, &catalog)?;
            let lib = library(&train.interactions, &catalog, &ctx.linker());
            let report = evaluate(&gold.interactions, &preds, &lib, &catalog);
            if !parent.as_os_str().is_empty() {
                create_dir(&parent)?;
            }
            write_json(&files[0], &report)?;
            Ok(Some(json!({
                "overall": report.overall,
                "by_split": report.by_split,
                "error_categories": report.error_categories,
                "missing_predictions": report.missing_predictions.len(),
            })))
        }
        Command::Stats {
            schema,
            train,
            dev,
            out,
        } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let train = required(&train, &c.train, "train")?;
            let dev = optional(&dev, &c.dev)?;
            let out = out_dir(&out.out, &c.out);
            let mut ins = vec![schema.as_path(), train.as_path()];
            ins.extend(dev.as_deref());
            let files = outputs(&out, &["stats.json", "tag_counts.csv"], &ins)?;
            let catalog = load_schema_catalog(&schema)?;
            let train = load_split(&train, &catalog)?;
            let filter = filter_dataset(&train.interactions, &catalog, &ctx.linker());
            let (lib, collect) = collect_patterns(
                &train.interactions,
                &filter.dependent.iter().cloned().collect(),
                &catalog,
            );
            let tag_counts = lib.tag_counts();
            let mut stats = json!({
                "train": {
                    "interactions": train.interactions.len(),
                    "questions": train.questions(),
                    "rejects": train.rejects,
                    "skipped_turns": train.skipped_turns,
                    "dependent": filter.dependent_count,
                    "independent": filter.independent_count,
                    "templates": collect.templates,
                    "base_templates": collect.base_templates,
                    "combos_seen": collect.combos_seen,
                },
                "tag_counts": tag_counts,
            });
            if let Some(dev) = &dev {
                let dev = load_split(dev, &catalog)?;
                let tags = tag_splits(&dev.interactions, &lib, &catalog);
                stats["dev"] = json!({
                    "interactions": dev.interactions.len(),
                    "questions": dev.questions(),
                    "rejects": dev.rejects,
                    "skipped_turns": dev.skipped_turns,
                    "splits": split_counts(&tags),
                });
            }
            create_dir(&out)?;
            write_json(&files[0], &stats)?;
            let mut csv = String::from("tag,count\n");
            for (t, n) in &tag_counts {
                csv.push_str(&format!("{t},{n}\n"));
            }
            std::fs::write(&files[1], csv)
                .map_err(|e| CliError::Io(format!("{}: {e}", files[1].display())))?;
            Ok(Some(stats))
        }
        Command::Pipeline {
            schema,
            train,
            dev,
            recombine,
            draft,
            out,
        } => {
            let schema = required(&schema.schema, &c.schema, "schema")?;
            let train = required(&train, &c.train, "train")?;
            let dev = required(&dev, &c.dev, "dev")?;
            let (gen_cfg, rules) = ctx.generate_config(&recombine)?;
            let generator = ctx.generator(&draft)?;
            let out = out_dir(&out.out, &c.out);
            let mut ins = vec![schema.as_path(), train.as_path(), dev.as_path()];
            ins.extend(rules.as_deref());
            let files = outputs(
                &out,
                &[
                    "filter_report.json",
                    "library.json",
                    "patterns_report.json",
                    "generate_report.json",
                    "candidates.jsonl",
                    "draft_report.json",
                    "review",
                ],
                &ins,
            )?;
            let catalog = load_schema_catalog(&schema)?;
            let train = load_split(&train, &catalog)?;
            let dev = load_split(&dev, &catalog)?;
            create_dir(&out)?;

            let filter = filter_dataset(&train.interactions, &catalog, &ctx.linker());
            write_json(&files[0], &filter)?;
            let (lib, patterns) = patterns_stage(&train.interactions, &filter, &catalog);
            write_json(&files[1], &lib)?;
            write_json(&files[2], &patterns)?;
            let (mut cands, generated) =
                generate_candidates(&lib, &dev.interactions, &catalog, &gen_cfg);
            write_json(&files[3], &generated)?;
            let drafted = draft_stage(&mut cands, &catalog, &generator)?;
            write_jsonl(&files[4], &cands)?;
            write_json(&files[5], &drafted)?;
            let mut store = ReviewStore::open(&files[6])?;
            let enqueued = store.enqueue(&cands, &catalog)?;
            log_enqueue(&enqueued);
            if !enqueued.rejected.is_empty() {
                return Err(CliError::Invariant(format!(
                    "{} drafted candidates failed queue validation",
                    enqueued.rejected.len()
                )));
            }
            Ok(Some(json!({
                "seed": gen_cfg.seed,
                "filter": filter_summary(&filter, &train),
                "patterns": patterns,
                "recombine": generated,
                "draft": drafted,
                "enqueue": enqueued,
            })))
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
}

fn filter_summary(r: &FilterReport, split: &LoadedSplit) -> Value {
    json!({
        "interactions": split.interactions.len(),
        "rejects": split.rejects,
        "skipped_turns": split.skipped_turns,
        "dependent_count": r.dependent_count,
        "independent_count": r.independent_count,
        "per_db": r.per_db,
    })
}

fn patterns_stage(
    train: &[Interaction],
    filter: &FilterReport,
    catalog: &Catalog,
) -> (PatternLibrary, Value) {
    let dependent: HashSet<String> = filter.dependent.iter().cloned().collect();
    let (lib, report): (PatternLibrary, CollectReport) =
        collect_patterns(train, &dependent, catalog);
    let mut summary = to_value(&report);
    summary["tag_counts"] = to_value(&lib.tag_counts());
    (lib, summary)
}

fn library(train: &[Interaction], catalog: &Catalog, linker: &LinkerConfig) -> PatternLibrary {
    let filter = filter_dataset(train, catalog, linker);
    let dependent: HashSet<String> = filter.dependent.into_iter().collect();
    collect_patterns(train, &dependent, catalog).0
}

fn draft_stage(
    cands: &mut [Candidate],
    catalog: &Catalog,
    generator: &Generator,
) -> Result<DraftReport, CliError> {
    let report = draft_candidates(cands, catalog, generator)?;
    if let Some(c) = cands.iter().find(|c| c.draft_utterance.trim().is_empty()) {
        return Err(CliError::Invariant(format!(
            "candidate {} has an empty draft",
            c.id
        )));
    }
    Ok(report)
}

fn split_counts(tags: &BTreeMap<String, SplitTag>) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> =
        [SplitTag::Cg, SplitTag::NonCg, SplitTag::Other]
            .iter()
            .map(|t| (t.name(), 0))
            .collect();
    for t in tags.values() {
        *counts.get_mut(t.name()).expect("all tags") += 1;
    }
    counts
}

/// Candidates and catalog to queue, when `--enqueue` was given.
fn enqueue_inputs(
    enqueue: &Option<PathBuf>,
    schema: &Option<PathBuf>,
    c: &PipelineConfig,
) -> Result<Option<(Vec<Candidate>, Catalog)>, CliError> {
    let Some(path) = optional(enqueue, &None)? else {
        return Ok(None);
    };
    let schema = required(schema, &c.schema, "schema")?;
    let catalog = load_schema_catalog(&schema)?;
    Ok(Some((read_jsonl(&path)?, catalog)))
}

fn log_enqueue(r: &EnqueueReport) {
    log::info!(
        "queued {} new candidates ({} already queued)",
        r.added,
        r.already_queued
    );
    for (id, why) in &r.rejected {
        log::warn!("candidate {id} not queued: {why}");
    }
}
