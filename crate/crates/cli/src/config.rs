//! Pipeline configuration: defaults, a flat `key = value` file, and
//! command-line overrides applied last.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use compdist::compose::Method;
use compdist::reduce::NmfConfig;
use compdist::regression::default_lambda_grid;
use compdist::space::{VocabConfig, Weighting};

use crate::CliError;

/// Which vector space a command reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpaceKind {
    /// Weighted co-occurrence rows, no reduction.
    Raw,
    Svd,
    Nmf,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::Raw => "raw",
            SpaceKind::Svd => "svd",
            SpaceKind::Nmf => "nmf",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" | "none" => Ok(SpaceKind::Raw),
            "svd" => Ok(SpaceKind::Svd),
            "nmf" => Ok(SpaceKind::Nmf),
            other => Err(format!("unknown space {other:?} (expected raw, svd or nmf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub triples: Option<PathBuf>,
    pub datasets: Vec<PathBuf>,
    /// Defaults to `<out>/models/<space>`.
    pub model_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub vocab: VocabConfig,
    pub weighting: Weighting,
    /// Reduction written by `reduce`; also the default `--space`.
    pub reduction: SpaceKind,
    pub k: usize,
    pub lambda_grid: Vec<f64>,
    pub min_examples: usize,
    pub min_nonzero_dims: usize,
    /// L2-normalize argument and phrase vectors before regression.
    pub normalize: bool,
    /// Restricts phrase extraction and training to these verbs when non-empty.
    pub verbs: Vec<String>,
    pub spaces: Vec<SpaceKind>,
    pub methods: Vec<Method>,
    pub nmf: NmfConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            triples: None,
            datasets: Vec::new(),
            model_dir: None,
            out: PathBuf::from("out"),
            vocab: VocabConfig::default(),
            weighting: Weighting::Pmi,
            reduction: SpaceKind::Svd,
            k: 300,
            lambda_grid: default_lambda_grid(),
            min_examples: 3,
            min_nonzero_dims: 10,
            normalize: true,
            verbs: Vec::new(),
            spaces: Vec::new(),
            methods: Method::ALL.to_vec(),
            nmf: NmfConfig::default(),
            seed: 0,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    list(value).map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}"))).collect()
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| format!("{value:?}: {e}"))
}

impl PipelineConfig {
    /// Sets one key. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let path = |v: &str| base.join(v.trim());
        match key {
            "corpus" => self.corpus = Some(path(value)),
            "triples" => self.triples = Some(path(value)),
            "datasets" => self.datasets = list(value).map(path).collect(),
            "model_dir" => self.model_dir = Some(path(value)),
            "out" => self.out = path(value),
            "max_targets" => self.vocab.max_targets = parse(value)?,
            "max_contexts" => self.vocab.max_contexts = parse(value)?,
            "stoplist_size" => self.vocab.stoplist_size = parse(value)?,
            "weighting" => self.weighting = parse(value)?,
            "reduction" => self.reduction = parse(value)?,
            "k" => self.k = parse(value)?,
            "lambda_grid" => self.lambda_grid = parse_list(value)?,
            "min_examples" => self.min_examples = parse(value)?,
            "min_nonzero_dims" => self.min_nonzero_dims = parse(value)?,
            "normalize" => self.normalize = parse(value)?,
            "verbs" => self.verbs = list(value).map(str::to_string).collect(),
            "space" => self.spaces = parse_list(value)?,
            "methods" => self.methods = parse_list(value)?,
            "nmf_max_iters" => self.nmf.max_outer_iters = parse(value)?,
            "nmf_tolerance" => self.nmf.tolerance = parse(value)?,
            "seed" => self.seed = parse(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str, base: &Path, name: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let invalid = |msg: String| CliError::Invalid(format!("{name}:{}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid("expected key = value".to_string()))?;
            self.set(key.trim(), value.trim(), base).map_err(invalid)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = PipelineConfig::default();
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.apply_text(&text, base, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Invalid(m.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.vocab.max_targets == 0 || self.vocab.max_contexts == 0 {
            return bad("vocabulary thresholds must be positive");
        }
        if self.min_examples == 0 {
            return bad("min_examples must be positive");
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return bad("lambda_grid must be a non-empty list of non-negative numbers");
        }
        Ok(())
    }

    /// Spaces a command operates on: `--space` if given, else the reduction.
    pub fn spaces(&self) -> Vec<SpaceKind> {
        if self.spaces.is_empty() {
            vec![self.reduction]
        } else {
            self.spaces.clone()
        }
    }

    pub fn space_dir(&self) -> PathBuf {
        self.out.join("space")
    }

    pub fn reduced_dir(&self, space: SpaceKind) -> PathBuf {
        self.out.join("reduced").join(space.as_str())
    }

    pub fn model_dir(&self, space: SpaceKind) -> PathBuf {
        self.model_dir
            .clone()
            .unwrap_or_else(|| self.out.join("models").join(space.as_str()))
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.out.join("reports")
    }
}
