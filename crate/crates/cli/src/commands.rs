//! The seven subcommand implementations. Each one resolves its settings
//! (flags first, config-file values second), validates every referenced
//! input path before any work begins, computes its outputs fully in memory,
//! then writes them atomically with the run manifest last.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;

use overlap_core::analysis::{
    analyze as analyze_model, gold_answers, overlap_curve, partition as partition_scores,
    score_map, PredictionFile, DEFAULT_CUTOFFS,
};
use overlap_core::index::{IndexBuilder, PositionalIndex};
use overlap_core::lexicon::{ConnectiveLexicon, NamePool};
use overlap_core::pipeline::{
    annotation_task_line, antecedent_filter, clean_and_split, connective_filter,
    connective_position, decorate, finalize_dataset, merge_annotations, parse_annotation_labels,
    perturb, read_comment_documents, DropReason, FunnelStats, PipelineConfig, SkipError,
};
use overlap_core::retrieval::{score_instances, search, BestMatchRecord, ScoringParams};
use overlap_core::schema::{build_query, parse_instance, OverlapQuery};
use overlap_core::text::{for_each_sentence, HeuristicTagger};

use crate::config::{
    fill_flag, fill_parse, fill_path, fill_paths, fill_string, require, ConfigMap,
};
use crate::jsonl::{read_overlap_records, read_raw_instances, to_jsonl, write_text_atomic};
use crate::manifest::RunManifest;
use crate::report::{emit_report, write_curve as write_curve_files};
use crate::{
    AnalyzeArgs, CliError, CorpusFormat, CurveArgs, IndexArgs, ParseArgs, PartitionArgs,
    PipelineArgs, ScoreArgs,
};

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{what} {} is not a readable file",
            path.display()
        )))
    }
}

fn require_dir(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{what} {} is not a directory",
            path.display()
        )))
    }
}

/// The tagger used by parse, score, and pipeline: heuristic rules over the
/// given connective lexicon (bundled when no file is named).
fn load_lexicon(path: Option<&Path>) -> Result<ConnectiveLexicon, CliError> {
    let lexicon = match path {
        Some(path) => ConnectiveLexicon::load(path).map_err(|err| {
            CliError::data(format!("connective lexicon {}: {err}", path.display()))
        })?,
        None => ConnectiveLexicon::default(),
    };
    if lexicon.terms().is_empty() {
        return Err(CliError::data("connective lexicon is empty"));
    }
    Ok(lexicon)
}

fn load_name_pool(path: Option<&Path>, bundled: fn() -> NamePool) -> Result<NamePool, CliError> {
    let pool = match path {
        Some(path) => NamePool::load(path)
            .map_err(|err| CliError::data(format!("name pool {}: {err}", path.display())))?,
        None => bundled(),
    };
    if pool.len() < 2 {
        return Err(CliError::data(
            "a name pool needs at least two distinct names",
        ));
    }
    Ok(pool)
}

/// `path` for named files, the literal `bundled` otherwise; manifests and
/// settings echoes must distinguish the two.
fn path_or_bundled(path: Option<&Path>) -> String {
    path.map(|p| p.display().to_string())
        .unwrap_or_else(|| "bundled".to_string())
}

/// Parse `start:step:end` or a comma-separated list into a strictly
/// ascending cutoff grid.
fn parse_grid(spec: &str, key: &str) -> Result<Vec<f64>, CliError> {
    let bad = |detail: String| CliError::usage(format!("--{key} {spec:?}: {detail}"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, step, end] = parts.as_slice() else {
            return Err(bad("expected start:step:end".to_string()));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("cannot parse {:?}", s.trim())))
        };
        let (start, step, end) = (parse(start)?, parse(step)?, parse(end)?);
        if !start.is_finite() || !step.is_finite() || !end.is_finite() {
            return Err(bad("values must be finite".to_string()));
        }
        if step <= 0.0 {
            return Err(bad("step must be positive".to_string()));
        }
        if end < start {
            return Err(bad("end must not precede start".to_string()));
        }
        let count = ((end - start) / step).floor() as usize + 1;
        (0..count).map(|i| start + step * i as f64).collect()
    } else {
        spec.split(',')
            .map(|s| {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("cannot parse {:?}", s.trim())))?;
                if v.is_nan() {
                    return Err(bad("values must not be NaN".to_string()));
                }
                Ok(v)
            })
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("grid is empty".to_string()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("values must be strictly ascending".to_string()));
    }
    Ok(values)
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// index

pub fn index(mut args: IndexArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    fill_path(&mut args.corpus, cfg, "corpus");
    fill_string(&mut args.name, cfg, "name");
    fill_path(&mut args.out, cfg, "out");
    if args.format.is_none() {
        if let Some(value) = cfg.get("format") {
            args.format = Some(CorpusFormat::parse(value)?);
        }
    }
    let corpus = require(args.corpus, "corpus")?;
    let format = require(args.format, "format")?;
    let out = require(args.out, "out")?;
    let name = args.name.unwrap_or_else(|| {
        corpus
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".to_string())
    });
    require_file(&corpus, "corpus")?;

    let core_format = match format {
        CorpusFormat::Text => overlap_core::text::CorpusFormat::Text,
        CorpusFormat::Lines => overlap_core::text::CorpusFormat::Lines,
        CorpusFormat::Jsonl => overlap_core::text::CorpusFormat::Jsonl,
    };
    let mut builder = IndexBuilder::new(&name);
    let stats = for_each_sentence(&corpus, core_format, |sentence| builder.add(&sentence))
        .map_err(|err| CliError::data(format!("reading corpus {}: {err}", corpus.display())))?;
    if stats.skipped > 0 {
        eprintln!(
            "warning: skipped {} undecodable corpus record(s)",
            stats.skipped
        );
    }
    let skipped_empty = builder.skipped_empty();
    let index = builder
        .finish()
        .map_err(|err| CliError::data(format!("corpus {}: {err}", corpus.display())))?;
    index
        .persist(&out)
        .map_err(|err| CliError::data(format!("writing index {}: {err}", out.display())))?;

    let mut manifest = RunManifest::new("index");
    manifest.setting("corpus", corpus.display());
    manifest.setting("format", format.name());
    manifest.setting("name", &name);
    manifest.input_file(&corpus);
    manifest.write_into_dir(&out)?;

    eprintln!(
        "indexed {} sentence(s) from {} as corpus {:?} ({} empty skipped) -> {}",
        index.doc_count(),
        corpus.display(),
        name,
        skipped_empty,
        out.display(),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// parse

pub fn parse(mut args: ParseArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    fill_path(&mut args.instances, cfg, "instances");
    fill_path(&mut args.lexicon, cfg, "lexicon");
    fill_path(&mut args.out, cfg, "out");
    let instances_path = require(args.instances, "instances")?;
    let out = require(args.out, "out")?;
    require_file(&instances_path, "instances")?;
    if let Some(lexicon) = &args.lexicon {
        require_file(lexicon, "lexicon")?;
    }

    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let tagger = HeuristicTagger::new(lexicon);
    let instances = read_raw_instances(&instances_path)?;
    let mut records = Vec::with_capacity(instances.len());
    for instance in &instances {
        let skeleton =
            parse_instance(instance, &tagger).map_err(|err| CliError::data(err.to_string()))?;
        records.push(skeleton.to_record());
    }
    write_text_atomic(&out, &to_jsonl(&records))?;

    let mut manifest = RunManifest::new("parse");
    manifest.setting("instances", instances_path.display());
    manifest.setting("lexicon", path_or_bundled(args.lexicon.as_deref()));
    manifest.input_file(&instances_path);
    if let Some(lexicon) = &args.lexicon {
        manifest.input_file(lexicon);
    }
    manifest.write_beside_file(&out)?;

    eprintln!("parsed {} instance(s) -> {}", records.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// score

#[derive(Serialize)]
struct MatchesRecord {
    instance_id: String,
    matches: Vec<BestMatchRecord>,
}

pub fn score(mut args: ScoreArgs, cfg: &ConfigMap, threads: Option<usize>) -> Result<(), CliError> {
    fill_path(&mut args.instances, cfg, "instances");
    fill_paths(&mut args.index, cfg, "index");
    fill_parse(&mut args.k1, cfg, "k1")?;
    fill_parse(&mut args.b, cfg, "b")?;
    fill_parse(&mut args.idf_floor, cfg, "idf_floor")?;
    fill_parse(&mut args.window, cfg, "window")?;
    fill_parse(&mut args.top_k, cfg, "top_k")?;
    fill_path(&mut args.matches, cfg, "matches");
    fill_path(&mut args.lexicon, cfg, "lexicon");
    fill_path(&mut args.out, cfg, "out");

    let instances_path = require(args.instances, "instances")?;
    let out = require(args.out, "out")?;
    if args.index.is_empty() {
        return Err(CliError::usage("missing --index (or config key index)"));
    }
    let defaults = ScoringParams::default();
    let params = ScoringParams {
        k1: args.k1.unwrap_or(defaults.k1),
        b: args.b.unwrap_or(defaults.b),
        idf_floor: args.idf_floor.unwrap_or(defaults.idf_floor),
    };
    if !params.k1.is_finite() || params.k1 < 0.0 {
        return Err(CliError::usage(format!(
            "--k1 must be finite and >= 0, got {}",
            params.k1
        )));
    }
    if !params.b.is_finite() || !(0.0..=1.0).contains(&params.b) {
        return Err(CliError::usage(format!(
            "--b must lie in [0, 1], got {}",
            params.b
        )));
    }
    if params.idf_floor.is_nan() {
        return Err(CliError::usage("--idf-floor must not be NaN"));
    }
    require_file(&instances_path, "instances")?;
    if let Some(lexicon) = &args.lexicon {
        require_file(lexicon, "lexicon")?;
    }
    for dir in &args.index {
        require_dir(dir, "index")?;
    }

    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let tagger = HeuristicTagger::new(lexicon);
    let instances = read_raw_instances(&instances_path)?;
    let mut queries: Vec<OverlapQuery> = Vec::with_capacity(instances.len());
    for instance in &instances {
        let skeleton =
            parse_instance(instance, &tagger).map_err(|err| CliError::data(err.to_string()))?;
        let mut query = build_query(&skeleton);
        if let Some(window) = args.window {
            query.window = window;
        }
        queries.push(query);
    }
    queries.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    let window = args.window.unwrap_or(overlap_core::schema::DEFAULT_WINDOW);

    let mut indexes = Vec::with_capacity(args.index.len());
    for dir in &args.index {
        let index = PositionalIndex::load(dir)
            .map_err(|err| CliError::data(format!("index {}: {err}", dir.display())))?;
        indexes.push(index);
    }

    let results = match threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|err| CliError::usage(format!("--threads {threads}: {err}")))?
            .install(|| score_instances(&queries, &indexes, &params)),
        None => score_instances(&queries, &indexes, &params),
    };
    let matched = results.iter().filter(|r| r.match_count > 0).count();
    let records: Vec<_> = results.iter().map(|r| r.to_record()).collect();
    write_text_atomic(&out, &to_jsonl(&records))?;

    let mut manifest = RunManifest::new("score");
    manifest.setting("instances", instances_path.display());
    manifest.setting(
        "index",
        args.index
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.setting("k1", params.k1);
    manifest.setting("b", params.b);
    manifest.setting("idf_floor", params.idf_floor);
    manifest.setting("window", window);
    manifest.setting("lexicon", path_or_bundled(args.lexicon.as_deref()));
    manifest.input_file(&instances_path);
    if let Some(lexicon) = &args.lexicon {
        manifest.input_file(lexicon);
    }
    for dir in &args.index {
        manifest.input_dir(dir)?;
    }
    if let Some(matches_path) = &args.matches {
        let top_k = args.top_k.unwrap_or(10);
        manifest.setting("top_k", top_k);
        let match_lines: Vec<MatchesRecord> = queries
            .iter()
            .map(|query| MatchesRecord {
                instance_id: query.instance_id.clone(),
                matches: search(query, &indexes, &params, top_k)
                    .into_iter()
                    .map(|m| BestMatchRecord {
                        corpus: m.corpus_name,
                        doc_id: m.doc_id,
                        score: m.score,
                        text: m.stored_text,
                    })
                    .collect(),
            })
            .collect();
        write_text_atomic(matches_path, &to_jsonl(&match_lines))?;
        manifest.write_beside_file(matches_path)?;
    }
    manifest.write_beside_file(&out)?;

    eprintln!(
        "scored {} instance(s) against {} corpus(es); {} matched -> {}",
        records.len(),
        indexes.len(),
        matched,
        out.display(),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// partition

pub fn partition(mut args: PartitionArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    fill_path(&mut args.scores, cfg, "scores");
    fill_parse(&mut args.cutoff, cfg, "cutoff")?;
    fill_path(&mut args.out, cfg, "out");
    let scores_path = require(args.scores, "scores")?;
    let cutoff = require(args.cutoff, "cutoff")?;
    let out = require(args.out, "out")?;
    if !cutoff.is_finite() {
        return Err(CliError::usage(format!(
            "--cutoff must be finite, got {cutoff}"
        )));
    }
    require_file(&scores_path, "scores")?;

    let records = read_overlap_records(&scores_path)?;
    let scores = score_map(&records).map_err(|err| CliError::data(err.to_string()))?;
    let (overlap, nonoverlap) = partition_scores(&scores, cutoff);

    let list = |ids: &[String]| {
        let mut text = ids.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        text
    };
    write_text_atomic(&out.join("overlap.txt"), &list(&overlap))?;
    write_text_atomic(&out.join("nonoverlap.txt"), &list(&nonoverlap))?;

    let mut manifest = RunManifest::new("partition");
    manifest.setting("scores", scores_path.display());
    manifest.setting("cutoff", cutoff);
    manifest.input_file(&scores_path);
    manifest.write_into_dir(&out)?;

    println!("overlap={} nonoverlap={}", overlap.len(), nonoverlap.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze

/// Expand --predictions values: files stand for themselves, directories for
/// their .tsv files in name order.
fn prediction_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let read = |e: std::io::Error| {
                CliError::data(format!(
                    "reading predictions directory {}: {e}",
                    path.display()
                ))
            };
            let mut found = Vec::new();
            for entry in std::fs::read_dir(path).map_err(read)? {
                let entry = entry.map_err(read)?.path();
                if entry.is_file() && entry.extension().is_some_and(|e| e == "tsv") {
                    found.push(entry);
                }
            }
            if found.is_empty() {
                return Err(CliError::data(format!(
                    "predictions directory {} holds no .tsv files",
                    path.display()
                )));
            }
            found.sort();
            files.extend(found);
        } else {
            require_file(path, "predictions")?;
            files.push(path.clone());
        }
    }
    Ok(files)
}

pub fn analyze(mut args: AnalyzeArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    fill_path(&mut args.instances, cfg, "instances");
    fill_path(&mut args.scores, cfg, "scores");
    fill_paths(&mut args.predictions, cfg, "predictions");
    fill_string(&mut args.cutoffs, cfg, "cutoffs");
    fill_flag(&mut args.yates, cfg, "yates")?;
    fill_string(&mut args.grid, cfg, "grid");
    fill_path(&mut args.out, cfg, "out");

    let instances_path = require(args.instances, "instances")?;
    let scores_path = require(args.scores, "scores")?;
    let out = require(args.out, "out")?;
    if args.predictions.is_empty() {
        return Err(CliError::usage(
            "missing --predictions (or config key predictions)",
        ));
    }
    let cutoffs = match &args.cutoffs {
        Some(spec) => parse_grid(spec, "cutoffs")?,
        None => DEFAULT_CUTOFFS.to_vec(),
    };
    let grid = parse_grid(args.grid.as_deref().unwrap_or("0:2.5:60"), "grid")?;
    require_file(&instances_path, "instances")?;
    require_file(&scores_path, "scores")?;

    let instances = read_raw_instances(&instances_path)?;
    let gold = gold_answers(&instances).map_err(|err| CliError::data(err.to_string()))?;
    let records = read_overlap_records(&scores_path)?;
    let scores = score_map(&records).map_err(|err| CliError::data(err.to_string()))?;

    let prediction_paths = prediction_files(&args.predictions)?;
    let mut models = Vec::with_capacity(prediction_paths.len());
    for path in &prediction_paths {
        let file = PredictionFile::load(path)
            .map_err(|err| CliError::data(format!("{}: {err}", path.display())))?;
        models.push(file);
    }
    models.sort_by(|a, b| a.model_name.cmp(&b.model_name));
    for pair in models.windows(2) {
        if pair[0].model_name == pair[1].model_name {
            return Err(CliError::data(format!(
                "two prediction files share the model name {:?}",
                pair[0].model_name
            )));
        }
    }

    let mut reports = Vec::with_capacity(models.len() * cutoffs.len());
    for model in &models {
        let model_reports = analyze_model(&gold, &scores, model, &cutoffs, args.yates)
            .map_err(|err| CliError::data(err.to_string()))?;
        reports.extend(model_reports);
    }
    // The curve describes the test set itself, so restrict scores to it.
    // analyze() already proved every gold id is scored.
    let test_scores: BTreeMap<String, f64> =
        gold.keys().map(|id| (id.clone(), scores[id])).collect();
    let curve = overlap_curve(&test_scores, &grid);
    emit_report(&reports, &curve, &out)?;

    let mut manifest = RunManifest::new("analyze");
    manifest.setting("instances", instances_path.display());
    manifest.setting("scores", scores_path.display());
    manifest.setting(
        "predictions",
        prediction_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.setting("cutoffs", join_f64(&cutoffs));
    manifest.setting("grid", join_f64(&grid));
    manifest.setting("yates", args.yates);
    manifest.input_file(&instances_path);
    manifest.input_file(&scores_path);
    for path in &prediction_paths {
        manifest.input_file(path);
    }
    manifest.write_into_dir(&out)?;

    eprintln!(
        "analyzed {} model(s) x {} cutoff(s) over {} instance(s) -> {}",
        models.len(),
        cutoffs.len(),
        gold.len(),
        out.display(),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// curve

pub fn curve(mut args: CurveArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    fill_path(&mut args.scores, cfg, "scores");
    fill_string(&mut args.grid, cfg, "grid");
    fill_path(&mut args.out, cfg, "out");
    let scores_path = require(args.scores, "scores")?;
    let out = require(args.out, "out")?;
    let grid = parse_grid(args.grid.as_deref().unwrap_or("0:2.5:60"), "grid")?;
    require_file(&scores_path, "scores")?;

    let records = read_overlap_records(&scores_path)?;
    let scores = score_map(&records).map_err(|err| CliError::data(err.to_string()))?;
    let curve = overlap_curve(&scores, &grid);
    write_curve_files(&curve, &out)?;

    let mut manifest = RunManifest::new("curve");
    manifest.setting("scores", scores_path.display());
    manifest.setting("grid", join_f64(&grid));
    manifest.input_file(&scores_path);
    manifest.write_into_dir(&out)?;

    eprintln!("curve over {} cutoff(s) -> {}", grid.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// pipeline

#[derive(Serialize)]
struct SentenceRecord<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Serialize)]
struct ConnectiveRecord<'a> {
    id: &'a str,
    connective: &'a str,
    text: &'a str,
}

#[derive(Serialize)]
struct DroppedRecord<'a> {
    instance_id: &'a str,
    reason: DropReason,
}

pub fn pipeline(mut args: PipelineArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    fill_path(&mut args.dump, cfg, "dump");
    fill_path(&mut args.labels, cfg, "labels");
    fill_path(&mut args.lexicon, cfg, "lexicon");
    fill_path(&mut args.male_names, cfg, "male_names");
    fill_path(&mut args.female_names, cfg, "female_names");
    fill_parse(&mut args.seed, cfg, "seed")?;
    fill_parse(&mut args.min_tokens, cfg, "min_tokens")?;
    fill_parse(&mut args.max_tokens, cfg, "max_tokens")?;
    fill_path(&mut args.out, cfg, "out");

    let dump = require(args.dump, "dump")?;
    let out = require(args.out, "out")?;
    let defaults = PipelineConfig::default();
    let min_tokens = args.min_tokens.unwrap_or(defaults.min_tokens);
    let max_tokens = args.max_tokens.unwrap_or(defaults.max_tokens);
    if min_tokens == 0 || min_tokens > max_tokens {
        return Err(CliError::usage(format!(
            "need 1 <= min_tokens <= max_tokens, got {min_tokens} and {max_tokens}"
        )));
    }
    require_file(&dump, "dump")?;
    for (path, what) in [
        (&args.labels, "labels"),
        (&args.lexicon, "lexicon"),
        (&args.male_names, "male name pool"),
        (&args.female_names, "female name pool"),
    ] {
        if let Some(path) = path {
            require_file(path, what)?;
        }
    }

    let config = PipelineConfig {
        lexicon: load_lexicon(args.lexicon.as_deref())?,
        male_names: load_name_pool(args.male_names.as_deref(), NamePool::bundled_male)?,
        female_names: load_name_pool(args.female_names.as_deref(), NamePool::bundled_female)?,
        seed: args.seed.unwrap_or(defaults.seed),
        min_tokens,
        max_tokens,
    };
    let tagger = HeuristicTagger::new(config.lexicon.clone());

    let file = std::fs::File::open(&dump)
        .map_err(|err| CliError::data(format!("reading dump {}: {err}", dump.display())))?;
    let (documents, undecodable) = read_comment_documents(BufReader::new(file))
        .map_err(|err| CliError::data(format!("reading dump {}: {err}", dump.display())))?;
    if documents.is_empty() {
        return Err(CliError::data(format!(
            "dump {} holds no decodable documents ({undecodable} undecodable line(s))",
            dump.display()
        )));
    }

    let mut stats = FunnelStats {
        documents: documents.len(),
        undecodable,
        ..Default::default()
    };
    let mut sentence_lines = String::new();
    let mut connective_lines = String::new();
    let mut candidate_lines = String::new();
    let mut perturbed_lines = String::new();
    let mut task_lines = String::new();
    let mut instances = Vec::new();
    for (source_ref, body) in &documents {
        for sentence in clean_and_split(source_ref, body, &config) {
            stats.sentences += 1;
            sentence_lines.push_str(&to_jsonl([SentenceRecord {
                id: &sentence.id,
                text: &sentence.raw,
            }]));
            if !connective_filter(&sentence, &config.lexicon) {
                continue;
            }
            stats.connective_pass += 1;
            let conn = connective_position(&sentence, &config.lexicon)
                .expect("connective_filter passed, so the position exists");
            connective_lines.push_str(&to_jsonl([ConnectiveRecord {
                id: &sentence.id,
                connective: &sentence.tokens[conn].norm,
                text: &sentence.raw,
            }]));
            let Some(candidate) = antecedent_filter(&sentence, &tagger, &config.lexicon) else {
                continue;
            };
            stats.antecedent_pass += 1;
            candidate_lines.push_str(&to_jsonl([candidate.to_record()]));
            match perturb(
                &candidate,
                &config.male_names,
                &config.female_names,
                config.seed,
            ) {
                Ok(instance) => {
                    stats.perturbed += 1;
                    perturbed_lines.push_str(&to_jsonl([instance.to_record()]));
                    task_lines.push_str(&annotation_task_line(&instance));
                    task_lines.push('\n');
                    instances.push(instance);
                }
                Err(SkipError::Ungendered(_)) | Err(SkipError::NoPronoun) => {
                    stats.ungendered_skipped += 1;
                }
            }
        }
    }

    write_text_atomic(&out.join("sentences.jsonl"), &sentence_lines)?;
    write_text_atomic(&out.join("connectives.jsonl"), &connective_lines)?;
    write_text_atomic(&out.join("candidates.jsonl"), &candidate_lines)?;
    write_text_atomic(&out.join("perturbed.jsonl"), &perturbed_lines)?;
    write_text_atomic(&out.join("tasks.tsv"), &task_lines)?;
    let funnel_json = serde_json::to_string_pretty(&stats).expect("funnel stats serialize") + "\n";
    write_text_atomic(&out.join("funnel.json"), &funnel_json)?;

    let mut kept = 0;
    let mut dropped_count = 0;
    if let Some(labels_path) = &args.labels {
        let text = std::fs::read_to_string(labels_path).map_err(|err| {
            CliError::data(format!("reading labels {}: {err}", labels_path.display()))
        })?;
        let records = parse_annotation_labels(&text)
            .map_err(|err| CliError::data(format!("{}: {err}", labels_path.display())))?;
        let merge = merge_annotations(&records).map_err(|err| CliError::data(err.to_string()))?;
        let (dataset, dropped) =
            finalize_dataset(&instances, &merge).map_err(|err| CliError::data(err.to_string()))?;
        kept = dataset.len();
        dropped_count = dropped.len();

        write_text_atomic(&out.join("dataset.jsonl"), &to_jsonl(&dataset))?;
        let dropped_records: Vec<DroppedRecord> = dropped
            .iter()
            .map(|(id, reason)| DroppedRecord {
                instance_id: id,
                reason: *reason,
            })
            .collect();
        write_text_atomic(&out.join("dropped.jsonl"), &to_jsonl(&dropped_records))?;
        let mut readable = String::new();
        for instance in &dataset {
            readable.push_str(&instance.id);
            readable.push('\t');
            readable.push_str(&decorate(
                &instance.sentence,
                instance.span1,
                instance.span2,
                instance.pronoun,
            ));
            readable.push('\n');
        }
        write_text_atomic(&out.join("readable.txt"), &readable)?;
    }

    let mut manifest = RunManifest::new("pipeline");
    manifest.setting("dump", dump.display());
    manifest.setting(
        "labels",
        args.labels
            .as_deref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "none".into()),
    );
    manifest.setting("lexicon", path_or_bundled(args.lexicon.as_deref()));
    manifest.setting("male_names", path_or_bundled(args.male_names.as_deref()));
    manifest.setting(
        "female_names",
        path_or_bundled(args.female_names.as_deref()),
    );
    manifest.setting("seed", config.seed);
    manifest.setting("min_tokens", config.min_tokens);
    manifest.setting("max_tokens", config.max_tokens);
    manifest.input_file(&dump);
    for path in [
        &args.labels,
        &args.lexicon,
        &args.male_names,
        &args.female_names,
    ]
    .into_iter()
    .flatten()
    {
        manifest.input_file(path);
    }
    manifest.write_into_dir(&out)?;

    eprintln!(
        "documents={} undecodable={} sentences={} connective={} antecedent={} \
         ungendered_skipped={} perturbed={}",
        stats.documents,
        stats.undecodable,
        stats.sentences,
        stats.connective_pass,
        stats.antecedent_pass,
        stats.ungendered_skipped,
        stats.perturbed,
    );
    if args.labels.is_some() {
        eprintln!(
            "dataset: {kept} kept, {dropped_count} dropped -> {}",
            out.display()
        );
    } else {
        eprintln!(
            "{} annotation task(s) -> {}",
            stats.perturbed,
            out.display()
        );
    }
    Ok(())
}
