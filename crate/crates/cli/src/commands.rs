//! The pipeline stages behind each subcommand. Every stage reads its inputs
//! from files under `out` (or configured paths) and writes its outputs back
//! there, so stages can be rerun independently.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use serde::Serialize;

use compdist::compose::{compose, similarity, Lexicon, Method, SentenceInput};
use compdist::error::{FormatError, ReduceError};
use compdist::eval::{self, EvalReport, Judgment, PairScore, SkippedPair, TableRow};
use compdist::io;
use compdist::reduce::{nmf_reduce, svd_reduce, ReducedSpace};
use compdist::regression::{
    train_intransitive, train_nary, train_transitive, train_vp_matrices, ModelStore, RegressionConfig,
};
use compdist::space::{
    count_cooccurrences, count_phrase_occurrences, read_triples, weight, Corpus, PhraseSpec, Vocabulary,
    WeightedMatrix,
};
use compdist::synth::{self, gen_corpus, gen_observations, gen_world, load_bundle, save_bundle, Observation};
use compdist::{l2_normalize, DenseTensor};

use crate::config::{PipelineConfig, SpaceKind};
use crate::CliError;

fn invalid(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{context}: {e}"))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| invalid(path.display(), e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildSummary {
    pub targets: usize,
    pub phrases: usize,
    pub contexts: usize,
    pub nnz: usize,
    pub warnings: usize,
}

/// Counts word and phrase co-occurrences, weights them and writes
/// `space/{targets.txt,contexts.txt,stoplist.txt,phrases.tsv,counts.tsv,weighted.tsv}`.
pub fn build_space(cfg: &PipelineConfig) -> Result<BuildSummary, CliError> {
    let corpus_path = cfg
        .corpus
        .as_deref()
        .ok_or_else(|| CliError::Invalid("no corpus configured".into()))?;
    let corpus = Corpus::read(open(corpus_path)?).map_err(|e| invalid(corpus_path.display(), e))?;
    if corpus.token_count() == 0 {
        return Err(CliError::Invalid("empty corpus".into()));
    }
    let mut warnings = corpus.warnings.len();
    for w in &corpus.warnings {
        warn!("{}:{}: {}", corpus_path.display(), w.line, w.message);
    }
    let triples = match &cfg.triples {
        Some(p) => {
            let (t, tw) = read_triples(open(p)?).map_err(|e| invalid(p.display(), e))?;
            for w in &tw {
                warn!("{}:{}: {}", p.display(), w.line, w.message);
            }
            warnings += tw.len();
            t
        }
        None => Vec::new(),
    };

    let vocab = Vocabulary::from_frequencies(corpus.slices(), &cfg.vocab);
    let mut counts = count_cooccurrences(corpus.slices(), &vocab);
    let wanted: BTreeSet<&str> = cfg.verbs.iter().map(String::as_str).collect();
    let specs: BTreeSet<PhraseSpec> = triples
        .iter()
        .filter(|t| wanted.is_empty() || wanted.contains(t.verb.as_str()))
        .map(|t| t.phrase())
        .collect();
    let phrases = count_phrase_occurrences(&triples, &corpus, &specs, &vocab);
    warnings += phrases.warnings.len();
    counts
        .append_rows(&phrases.counts)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let weighted = weight(&counts, cfg.weighting).map_err(|e| invalid("weighting", e))?;

    let dir = cfg.space_dir();
    fs::create_dir_all(&dir)?;
    io::write_vocabulary(&dir.join("targets.txt"), vocab.targets())?;
    io::write_vocabulary(&dir.join("contexts.txt"), vocab.contexts())?;
    let stop: Vec<String> = vocab.stoplist().iter().cloned().collect();
    io::write_vocabulary(&dir.join("stoplist.txt"), &stop)?;
    write_file(&dir.join("phrases.tsv"), |w| {
        for p in &phrases.phrases {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                p.token(),
                p.subject,
                p.verb,
                p.object.as_deref().unwrap_or("-")
            )?;
        }
        Ok(())
    })?;
    write_file(&dir.join("counts.tsv"), |w| counts.write_tsv(w))?;
    weighted.save(&dir.join("weighted.tsv"))?;

    let summary = BuildSummary {
        targets: vocab.targets().len(),
        phrases: phrases.phrases.len(),
        contexts: vocab.contexts().len(),
        nnz: weighted.nnz(),
        warnings,
    };
    info!(
        "space: {} targets, {} phrases, {} contexts, {} non-zero weighted cells",
        summary.targets, summary.phrases, summary.contexts, summary.nnz
    );
    Ok(summary)
}

/// The files written by [`build_space`], read back.
pub struct StoredSpace {
    pub targets: Vec<String>,
    pub contexts: Vec<String>,
    pub phrases: Vec<PhraseSpec>,
    /// Word rows followed by phrase rows.
    pub weighted: WeightedMatrix,
}

impl StoredSpace {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let read = |name: &str| io::read_vocabulary(&dir.join(name)).map_err(|e| invalid(dir.join(name).display(), e));
        let targets = read("targets.txt")?;
        let contexts = read("contexts.txt")?;
        let phrases_path = dir.join("phrases.tsv");
        let mut phrases = Vec::new();
        for (i, line) in open(&phrases_path)?.lines().enumerate() {
            let line = line?;
            let f: Vec<&str> = line.split('\t').collect();
            let spec = match f.as_slice() {
                [_, s, v, "-"] => PhraseSpec::intransitive(s, v),
                [_, s, v, o] => PhraseSpec::transitive(s, v, o),
                _ => return Err(invalid(format!("{}:{}", phrases_path.display(), i + 1), "expected 4 fields")),
            };
            phrases.push(spec);
        }
        let rows: Vec<String> = targets
            .iter()
            .cloned()
            .chain(phrases.iter().map(PhraseSpec::token))
            .collect();
        let weighted_path = dir.join("weighted.tsv");
        let weighted = WeightedMatrix::read_tsv(open(&weighted_path)?, rows, contexts.clone())
            .map_err(|e| invalid(weighted_path.display(), e))?;
        Ok(StoredSpace {
            targets,
            contexts,
            phrases,
            weighted,
        })
    }

    /// Dense word-row matrix fed to the reducers.
    pub fn core(&self) -> DenseTensor {
        let (n, m) = (self.targets.len(), self.contexts.len());
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            data.extend(self.weighted.dense_row(i));
        }
        DenseTensor::new(vec![n.max(1), m.max(1)], if n * m == 0 { vec![0.0] } else { data })
            .expect("consistent shape")
    }

    pub fn raw_lexicon(&self) -> Lexicon {
        (0..self.weighted.rows().len())
            .map(|i| (self.weighted.rows()[i].clone(), DenseTensor::vector(&self.weighted.dense_row(i))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceSummary {
    pub space: SpaceKind,
    pub k: usize,
    pub rows: usize,
    /// NMF only: final objective relative to the squared input norm.
    pub relative_objective: Option<f64>,
}

/// Reduces the word rows to `k` dimensions with every requested method and
/// projects the phrase rows into each reduced space.
pub fn reduce(cfg: &PipelineConfig) -> Result<Vec<ReduceSummary>, CliError> {
    let stored = StoredSpace::load(&cfg.space_dir())?;
    let core = stored.core();
    let mut out = Vec::new();
    for space in cfg.spaces() {
        let label_error = |e: ReduceError| match e {
            ReduceError::NegativeInput { row, col, value } => CliError::Invalid(format!(
                "nmf needs a non-negative matrix: cell ({}, {}) is {value}",
                stored.targets.get(row).map_or("?", String::as_str),
                stored.contexts.get(col).map_or("?", String::as_str),
            )),
            other => CliError::Invalid(other.to_string()),
        };
        let (mut reduced, relative_objective) = match space {
            SpaceKind::Raw => {
                info!("raw space needs no reduction");
                continue;
            }
            SpaceKind::Svd => (svd_reduce(&stored.targets, &core, cfg.k).map_err(label_error)?, None),
            SpaceKind::Nmf => {
                let mut nmf = cfg.nmf;
                nmf.seed = cfg.seed;
                let outcome = nmf_reduce(&stored.targets, &core, cfg.k, &nmf).map_err(label_error)?;
                if !outcome.converged {
                    warn!("nmf stopped after {} iterations without converging", nmf.max_outer_iters);
                }
                let last = outcome.objective.last().copied().unwrap_or(0.0);
                (outcome.space, Some(last / outcome.input_norm_sq))
            }
        };
        let n_words = stored.targets.len();
        let phrase_rows: Vec<(String, Vec<f64>)> = (n_words..stored.weighted.rows().len())
            .map(|i| (stored.weighted.rows()[i].clone(), stored.weighted.dense_row(i)))
            .collect();
        reduced
            .extend_projected(phrase_rows.iter().map(|(l, r)| (l.as_str(), r.as_slice())))
            .map_err(label_error)?;
        reduced.save(&cfg.reduced_dir(space))?;
        info!("{space}: {} rows at k = {}", reduced.targets().len(), cfg.k);
        out.push(ReduceSummary {
            space,
            k: cfg.k,
            rows: reduced.targets().len(),
            relative_objective,
        });
    }
    Ok(out)
}

/// Word and phrase vectors of one space.
pub fn load_lexicon(cfg: &PipelineConfig, space: SpaceKind) -> Result<Lexicon, CliError> {
    match space {
        SpaceKind::Raw => Ok(StoredSpace::load(&cfg.space_dir())?.raw_lexicon()),
        _ => {
            let dir = cfg.reduced_dir(space);
            let reduced = ReducedSpace::load(&dir).map_err(|e| invalid(dir.display(), e))?;
            Ok(Lexicon::from(&reduced))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainOutcome {
    pub verb: String,
    pub arity: usize,
    pub examples: usize,
    pub lambda: Option<f64>,
    /// Reason for a skip or failure.
    pub error: Option<String>,
    /// Planted bundles only: (max-abs, relative Frobenius) recovery error.
    pub recovery: Option<(f64, f64)>,
}

fn write_training_log(dir: &Path, outcomes: &[TrainOutcome]) -> Result<(), CliError> {
    write_file(&dir.join("training.tsv"), |w| {
        writeln!(w, "verb\tarity\tstatus\texamples\tlambda\tdetail")?;
        for o in outcomes {
            let lambda = o.lambda.map_or("-".to_string(), |l| format!("{l:e}"));
            let (status, detail) = match &o.error {
                None => ("ok", String::new()),
                Some(e) => ("skipped", e.clone()),
            };
            writeln!(w, "{}\t{}\t{status}\t{}\t{lambda}\t{detail}", o.verb, o.arity, o.examples)?;
        }
        Ok(())
    })
}

fn finish_training(dir: &Path, outcomes: Vec<TrainOutcome>) -> Result<Vec<TrainOutcome>, CliError> {
    write_training_log(dir, &outcomes)?;
    if outcomes.iter().all(|o| o.error.is_some()) {
        return Err(CliError::Partial(format!(
            "no verb could be trained ({} attempted)",
            outcomes.len()
        )));
    }
    Ok(outcomes)
}

fn regression_config(cfg: &PipelineConfig) -> RegressionConfig {
    RegressionConfig {
        lambda_grid: cfg.lambda_grid.clone(),
        min_examples: cfg.min_examples,
    }
}

/// Trains one model per (verb, arity) seen among the phrase rows, in
/// each requested space. Per-verb failures are logged and skipped.
pub fn train(cfg: &PipelineConfig) -> Result<BTreeMap<SpaceKind, Vec<TrainOutcome>>, CliError> {
    let stored = StoredSpace::load(&cfg.space_dir())?;
    let nnz: BTreeMap<&str, usize> = stored
        .weighted
        .rows()
        .iter()
        .map(String::as_str)
        .zip(stored.weighted.row_nnz())
        .collect();
    let wanted: BTreeSet<&str> = cfg.verbs.iter().map(String::as_str).collect();
    let mut groups: BTreeMap<(&str, usize), Vec<&PhraseSpec>> = BTreeMap::new();
    for p in &stored.phrases {
        if wanted.is_empty() || wanted.contains(p.verb.as_str()) {
            groups
                .entry((p.verb.as_str(), 1 + p.object.is_some() as usize))
                .or_default()
                .push(p);
        }
    }
    if groups.is_empty() {
        return Err(CliError::Partial("no phrase rows to train on".into()));
    }
    let rcfg = regression_config(cfg);
    let mut all = BTreeMap::new();
    for space in cfg.spaces() {
        let lexicon = load_lexicon(cfg, space)?;
        let dir = cfg.model_dir(space);
        fs::create_dir_all(&dir)?;
        let prepare = |token: &str| -> Option<DenseTensor> {
            if nnz.get(token).copied().unwrap_or(0) < cfg.min_nonzero_dims {
                return None;
            }
            let v = lexicon.get(token)?;
            if cfg.normalize {
                l2_normalize(v).ok()
            } else {
                Some(v.clone())
            }
        };
        let mut outcomes = Vec::new();
        for (&(verb, arity), specs) in &groups {
            let mut examples = Vec::new();
            for p in specs {
                let (Some(sentence), Some(subject)) = (prepare(&p.token()), prepare(&p.subject)) else {
                    continue;
                };
                let object = match &p.object {
                    Some(o) => match prepare(o) {
                        Some(v) => Some((o.clone(), v)),
                        None => continue,
                    },
                    None => None,
                };
                examples.push((subject, object, sentence));
            }
            let n = examples.len();
            let result = if arity == 1 {
                let pairs: Vec<(DenseTensor, DenseTensor)> = examples.into_iter().map(|(s, _, y)| (s, y)).collect();
                train_intransitive(verb, &pairs, &rcfg)
            } else {
                let mut objects = BTreeMap::new();
                let mut triples = Vec::with_capacity(n);
                for (s, o, y) in examples {
                    let (name, vec) = o.expect("transitive example has an object");
                    objects.insert(name.clone(), vec);
                    triples.push((name, s, y));
                }
                train_vp_matrices(verb, &triples, &rcfg).and_then(|vp| {
                    for (object, count) in &vp.dropped {
                        info!("{verb}: VP matrix for {object:?} dropped ({count} examples)");
                    }
                    train_transitive(verb, &vp, &objects, &rcfg)
                })
            };
            let outcome = match result {
                Ok(model) => {
                    model.save(&dir)?;
                    info!("{space}: trained {verb}/{arity} on {n} examples");
                    TrainOutcome {
                        verb: verb.to_string(),
                        arity,
                        examples: n,
                        lambda: model.lambda(),
                        error: None,
                        recovery: None,
                    }
                }
                Err(e) => {
                    warn!("{space}: {verb}/{arity} skipped: {e}");
                    TrainOutcome {
                        verb: verb.to_string(),
                        arity,
                        examples: n,
                        lambda: None,
                        error: Some(e.to_string()),
                        recovery: None,
                    }
                }
            };
            outcomes.push(outcome);
        }
        all.insert(space, finish_training(&dir, outcomes)?);
    }
    Ok(all)
}

/// Trains every verb of a planted bundle (see [`synth`]) on its raw
/// observations and measures recovery against the planted tensors.
pub fn train_bundle(cfg: &PipelineConfig, bundle: &Path) -> Result<Vec<TrainOutcome>, CliError> {
    let (world, observations) = load_bundle(bundle).map_err(|e| invalid(bundle.display(), e))?;
    let dir = cfg.model_dir.clone().unwrap_or_else(|| cfg.out.join("models").join("planted"));
    fs::create_dir_all(&dir)?;
    let rcfg = regression_config(cfg);
    let vectors = world.lexicon.as_map();
    let mut outcomes = Vec::new();
    for (verb, planted) in &world.verbs {
        let obs: &[Observation] = observations.get(verb).map_or(&[], Vec::as_slice);
        let tuples: Vec<(Vec<String>, DenseTensor)> = obs.iter().map(|o| (o.args.clone(), o.sentence.clone())).collect();
        let result = train_nary(verb, planted.arity, &tuples, vectors, &rcfg).map(|(m, _)| m);
        let outcome = match result {
            Ok(model) => {
                model.save(&dir)?;
                let recovery = synth::recovery_error(&model, &world, verb).map_err(|e| CliError::Failed(e.to_string()))?;
                info!(
                    "{verb}/{}: {} observations, max-abs error {:.3e}, relative error {:.3e}",
                    planted.arity,
                    obs.len(),
                    recovery.0,
                    recovery.1
                );
                TrainOutcome {
                    verb: verb.clone(),
                    arity: planted.arity,
                    examples: obs.len(),
                    lambda: model.lambda(),
                    error: None,
                    recovery: Some(recovery),
                }
            }
            Err(e) => {
                warn!("{verb}/{} skipped: {e}", planted.arity);
                TrainOutcome {
                    verb: verb.clone(),
                    arity: planted.arity,
                    examples: obs.len(),
                    lambda: None,
                    error: Some(e.to_string()),
                    recovery: None,
                }
            }
        };
        outcomes.push(outcome);
    }
    finish_training(&dir, outcomes)
}

fn load_models(cfg: &PipelineConfig, space: SpaceKind) -> Result<ModelStore, CliError> {
    let dir = cfg.model_dir(space);
    if !dir.is_dir() {
        return Err(CliError::Invalid(format!(
            "no models for the {space} space at {} (run train first)",
            dir.display()
        )));
    }
    ModelStore::load_dir(&dir).map_err(|e| invalid(dir.display(), e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Composed {
    pub method: String,
    pub space: String,
    pub shape: Vec<usize>,
    pub value: Option<Vec<f64>>,
    /// Similarity to the same sentence with the landmark verb.
    pub landmark_similarity: Option<f64>,
    pub error: Option<String>,
}

/// Composes one sentence with every requested method and space.
pub fn compose_sentence(
    cfg: &PipelineConfig,
    sentence: &SentenceInput,
    landmark: Option<&str>,
) -> Result<Vec<Composed>, CliError> {
    let mut out = Vec::new();
    for space in cfg.spaces() {
        let lexicon = load_lexicon(cfg, space)?;
        let models = if cfg.methods.contains(&Method::Regression) {
            Some(load_models(cfg, space)?)
        } else {
            None
        };
        for &method in &cfg.methods {
            let rep = compose(method, sentence, &lexicon, models.as_ref());
            let sim = landmark.map(|l| {
                rep.as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|a| {
                        let b = compose(method, &sentence.with_verb(l), &lexicon, models.as_ref()).map_err(|e| e.to_string())?;
                        similarity(a, &b).map_err(|e| e.to_string())
                    })
            });
            let (shape, value, mut error) = match &rep {
                Ok(r) => (r.value.shape().to_vec(), Some(r.value.data().to_vec()), None),
                Err(e) => (Vec::new(), None, Some(e.to_string())),
            };
            let landmark_similarity = match sim {
                Some(Ok(s)) => Some(s),
                Some(Err(e)) => {
                    error.get_or_insert(e);
                    None
                }
                None => None,
            };
            out.push(Composed {
                method: method.name().to_string(),
                space: space.to_string(),
                shape,
                value,
                landmark_similarity,
                error,
            });
        }
    }
    Ok(out)
}

/// One line of a dataset's results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub space: String,
    pub rho: Option<f64>,
    pub rho_pairmeans: Option<f64>,
    pub n: usize,
    pub skipped: Vec<SkippedPair>,
    pub invalid: bool,
    pub negative_values: bool,
    pub note: Option<String>,
    pub pairs: Vec<PairScore>,
}

impl ReportRow {
    fn noted(method: Method, space: SpaceKind, note: String) -> Self {
        ReportRow {
            method: method.name().to_string(),
            space: space.to_string(),
            rho: None,
            rho_pairmeans: None,
            n: 0,
            skipped: Vec::new(),
            invalid: false,
            negative_values: false,
            note: Some(note),
            pairs: Vec::new(),
        }
    }

    fn from_report(r: EvalReport) -> Self {
        let note = if r.invalid {
            Some("invalid: over half of the judgments skipped".to_string())
        } else if r.negative_values {
            Some("negative values in space".to_string())
        } else {
            None
        };
        ReportRow {
            method: r.method,
            space: r.space,
            rho: Some(r.rho),
            rho_pairmeans: r.rho_pairmeans,
            n: r.n,
            skipped: r.skipped,
            invalid: r.invalid,
            negative_values: r.negative_values,
            note,
            pairs: r.pairs,
        }
    }

    pub fn label(&self) -> String {
        format!("{}.{}", self.method, self.space)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub judgments: usize,
    pub participants: usize,
    pub humans: Option<f64>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub datasets: Vec<DatasetReport>,
}

impl Report {
    /// Plain-text tables, one per dataset.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, d) in self.datasets.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let rows: Vec<TableRow> = d
                .rows
                .iter()
                .map(|r| TableRow {
                    label: r.label(),
                    rho: r.rho,
                    note: r.note.clone(),
                })
                .collect();
            let title = format!(
                "{} ({} judgments, {} participants)",
                d.dataset, d.judgments, d.participants
            );
            out.push_str(&eval::render_table(&title, d.humans, &rows));
        }
        out
    }

    /// True when any row lacks a usable correlation.
    pub fn has_failures(&self) -> bool {
        self.datasets
            .iter()
            .flat_map(|d| &d.rows)
            .any(|r| r.invalid || (r.rho.is_none() && r.note.as_deref() != Some(REDUCES_TO_MULTIPLY)))
    }
}

pub const REDUCES_TO_MULTIPLY: &str = "reduces to Multiply";

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Scores every dataset with every (method, space) pair.
pub fn evaluate_datasets(cfg: &PipelineConfig, datasets: &[(String, Vec<Judgment>)]) -> Result<Report, CliError> {
    let mut lexicons = BTreeMap::new();
    let mut stores = BTreeMap::new();
    for space in cfg.spaces() {
        lexicons.insert(space, load_lexicon(cfg, space)?);
        if cfg.methods.contains(&Method::Regression) {
            stores.insert(space, load_models(cfg, space)?);
        }
    }
    let mut out = Vec::new();
    for (name, data) in datasets {
        let humans = if eval::participants(data) >= 2 {
            eval::human_ceiling(data).ok()
        } else {
            None
        };
        let intransitive = data.iter().all(|j| !j.sentence.is_transitive());
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            for space in cfg.spaces() {
                if method == Method::Kronecker && intransitive {
                    rows.push(ReportRow::noted(method, space, REDUCES_TO_MULTIPLY.into()));
                    continue;
                }
                match eval::evaluate(method, &lexicons[&space], stores.get(&space), data, space.as_str()) {
                    Ok(r) => rows.push(ReportRow::from_report(r)),
                    Err(e) => {
                        warn!("{name}: {}.{space}: {e}", method.name());
                        rows.push(ReportRow::noted(method, space, e.to_string()));
                    }
                }
            }
        }
        out.push(DatasetReport {
            dataset: name.clone(),
            judgments: data.len(),
            participants: eval::participants(data),
            humans,
            rows,
        });
    }
    Ok(Report { datasets: out })
}

/// Loads the configured datasets, evaluates them and writes
/// `reports/report.json` and `reports/report.txt`.
pub fn evaluate(cfg: &PipelineConfig) -> Result<Report, CliError> {
    if cfg.datasets.is_empty() {
        return Err(CliError::Invalid("no datasets configured".into()));
    }
    let mut datasets = Vec::new();
    for path in &cfg.datasets {
        let data = eval::load_dataset(path).map_err(|e| CliError::Invalid(e.to_string()))?;
        datasets.push((dataset_name(path), data));
    }
    let report = evaluate_datasets(cfg, &datasets)?;
    let dir = cfg.reports_dir();
    fs::create_dir_all(&dir)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    fs::write(dir.join("report.json"), json + "\n")?;
    fs::write(dir.join("report.txt"), report.render())?;
    Ok(report)
}

/// Parameters of `synth world`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub k: usize,
    pub nouns: usize,
    pub verbs: Vec<(String, usize)>,
    pub observations: usize,
    pub sigma: f64,
}

/// Writes a planted bundle to `dir`.
pub fn synth_world(cfg: &PipelineConfig, spec: &WorldSpec, dir: &Path) -> Result<(), CliError> {
    let verbs: Vec<(&str, usize)> = spec.verbs.iter().map(|(v, a)| (v.as_str(), *a)).collect();
    let world = gen_world(cfg.seed, spec.k, spec.nouns, &verbs, spec.sigma).map_err(|e| invalid("synth", e))?;
    let mut observations = BTreeMap::new();
    for (verb, planted) in &world.verbs {
        let available = spec.nouns.saturating_pow(planted.arity as u32);
        let n = spec.observations.min(available);
        if n < spec.observations {
            warn!("{verb}: only {available} distinct argument tuples; generating {n} observations");
        }
        let obs = gen_observations(&world, verb, n).map_err(|e| invalid(verb, e))?;
        observations.insert(verb.clone(), obs);
    }
    save_bundle(dir, &world, &observations)?;
    Ok(())
}

/// Writes the miniature corpus plus a desk-scale `config.txt` to `dir`.
pub fn synth_corpus(cfg: &PipelineConfig, sentences: usize, dir: &Path) -> Result<(), CliError> {
    if sentences == 0 {
        return Err(CliError::Invalid("sentence count must be positive".into()));
    }
    gen_corpus(cfg.seed, sentences).write(dir)?;
    let config = format!(
        "corpus = corpus.txt\ntriples = triples.tsv\ndatasets = intransitive.tsv, transitive.tsv\n\
         stoplist_size = 3\nk = 5\nmin_examples = 3\nmin_nonzero_dims = 3\nseed = {}\n",
        cfg.seed
    );
    fs::write(dir.join("config.txt"), config)?;
    Ok(())
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io(io) => CliError::Io(io),
            other => CliError::Failed(other.to_string()),
        }
    }
}
