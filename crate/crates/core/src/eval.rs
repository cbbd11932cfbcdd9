//! Evaluation against human similarity judgments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compose::{compose, similarity, Lexicon, Method, SentenceInput};
use crate::error::EvalError;
use crate::regression::ModelStore;

pub const DATASET_COLUMNS: [&str; 6] = ["participant", "subject", "verb", "object", "landmark", "rating"];

/// One participant's rating of a sentence against its landmark variant.
#[derive(Debug, Clone, PartialEq)]
pub struct Judgment {
    pub participant: String,
    pub sentence: SentenceInput,
    pub landmark: String,
    pub rating: f64,
}

impl Judgment {
    pub fn pair(&self) -> (&SentenceInput, &str) {
        (&self.sentence, &self.landmark)
    }
}

/// Parses the judgment TSV. The header must name exactly the six dataset
/// columns (in any order); every row must be well formed with a rating in
/// [1, 7]. Any violation is fatal and reports the 1-based row number.
pub fn parse_dataset(text: &str, name: &str) -> Result<Vec<Judgment>, EvalError> {
    let err = |row: usize, message: String| EvalError::Dataset {
        path: name.to_string(),
        row,
        message,
    };
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let columns: Vec<&str> = header.split('\t').collect();
    let mut position = [usize::MAX; 6];
    for (i, col) in columns.iter().enumerate() {
        let Some(slot) = DATASET_COLUMNS.iter().position(|c| c == col) else {
            return Err(err(1, format!("unknown column {col:?}")));
        };
        if position[slot] != usize::MAX {
            return Err(err(1, format!("duplicate column {col:?}")));
        }
        position[slot] = i;
    }
    if let Some(missing) = position.iter().position(|&p| p == usize::MAX) {
        return Err(err(1, format!("missing column {:?}", DATASET_COLUMNS[missing])));
    }

    let mut out = Vec::new();
    for (i, line) in lines {
        let row = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.len() {
            return Err(err(row, format!("expected {} fields, got {}", columns.len(), fields.len())));
        }
        let f = |slot: usize| fields[position[slot]];
        for (slot, name) in DATASET_COLUMNS.iter().enumerate().take(5) {
            if f(slot).is_empty() {
                return Err(err(row, format!("empty {name}")));
            }
        }
        let rating: f64 = f(5)
            .parse()
            .map_err(|_| err(row, format!("bad rating {:?}", f(5))))?;
        if !(1.0..=7.0).contains(&rating) {
            return Err(err(row, format!("rating {rating} outside [1, 7]")));
        }
        out.push(Judgment {
            participant: f(0).to_string(),
            sentence: SentenceInput {
                subject: f(1).to_string(),
                verb: f(2).to_string(),
                object: (f(3) != "-").then(|| f(3).to_string()),
            },
            landmark: f(4).to_string(),
            rating,
        });
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<Judgment>, EvalError> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string())
}

/// Average (fractional) ranks, 1-based; ties share the mean of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Tie-aware Spearman correlation: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(EvalError::TooFewPoints(xs.len()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Spearman ρ of `xs` against `shuffles` random permutations of `ys`.
pub fn permutation_null(xs: &[f64], ys: &[f64], shuffles: usize, seed: u64) -> Result<Vec<f64>, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut permuted = ys.to_vec();
    (0..shuffles)
        .map(|_| {
            permuted.shuffle(&mut rng);
            spearman(xs, &permuted)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScore {
    pub sentence: String,
    pub landmark: String,
    pub similarity: f64,
    pub mean_rating: f64,
    pub judgments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPair {
    pub sentence: String,
    pub landmark: String,
    pub reason: String,
    /// Number of judgments excluded with this pair.
    pub judgments: usize,
}

/// Correlation of one method in one space with the human ratings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub space: String,
    pub rho: f64,
    /// Secondary diagnostic: ρ against per-pair mean ratings.
    pub rho_pairmeans: Option<f64>,
    /// Number of (rating, similarity) data points correlated.
    pub n: usize,
    pub skipped: Vec<SkippedPair>,
    /// More than half of the judgments were skipped.
    pub invalid: bool,
    /// A multiplicative method saw negative input components.
    pub negative_values: bool,
    pub pairs: Vec<PairScore>,
}

impl EvalReport {
    pub fn skipped_judgments(&self) -> usize {
        self.skipped.iter().map(|s| s.judgments).sum()
    }
}

/// Scores every distinct (sentence, landmark) pair with `method` and
/// correlates the similarities with the individual ratings, pooled over
/// participants. Pairs with out-of-vocabulary items or missing models are
/// skipped and recorded.
pub fn evaluate(
    method: Method,
    lexicon: &Lexicon,
    models: Option<&ModelStore>,
    dataset: &[Judgment],
    space: &str,
) -> Result<EvalReport, EvalError> {
    let mut groups: BTreeMap<(&SentenceInput, &str), Vec<f64>> = BTreeMap::new();
    for j in dataset {
        groups.entry(j.pair()).or_default().push(j.rating);
    }
    let mut scores: BTreeMap<(&SentenceInput, &str), f64> = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut pairs = Vec::new();
    let mut negative_values = false;
    for (&(sentence, landmark), ratings) in &groups {
        let scored = compose(method, sentence, lexicon, models).and_then(|a| {
            let b = compose(method, &sentence.with_verb(landmark), lexicon, models)?;
            negative_values |= a.negative_inputs || b.negative_inputs;
            similarity(&a, &b)
        });
        match scored {
            Ok(sim) => {
                scores.insert((sentence, landmark), sim);
                pairs.push(PairScore {
                    sentence: sentence.to_string(),
                    landmark: landmark.to_string(),
                    similarity: sim,
                    mean_rating: ratings.iter().sum::<f64>() / ratings.len() as f64,
                    judgments: ratings.len(),
                });
            }
            Err(e) => skipped.push(SkippedPair {
                sentence: sentence.to_string(),
                landmark: landmark.to_string(),
                reason: e.to_string(),
                judgments: ratings.len(),
            }),
        }
    }
    let (mut ratings, mut sims) = (Vec::new(), Vec::new());
    for j in dataset {
        if let Some(&s) = scores.get(&j.pair()) {
            ratings.push(j.rating);
            sims.push(s);
        }
    }
    if ratings.is_empty() {
        return Err(EvalError::NothingScored);
    }
    let rho = spearman(&ratings, &sims)?;
    let means: Vec<f64> = pairs.iter().map(|p| p.mean_rating).collect();
    let pair_sims: Vec<f64> = pairs.iter().map(|p| p.similarity).collect();
    let report = EvalReport {
        method: method.name().to_string(),
        space: space.to_string(),
        rho,
        rho_pairmeans: spearman(&means, &pair_sims).ok(),
        n: ratings.len(),
        invalid: 2 * (dataset.len() - ratings.len()) > dataset.len(),
        skipped,
        negative_values,
        pairs,
    };
    debug_assert_eq!(report.n + report.skipped_judgments(), dataset.len());
    Ok(report)
}

/// Inter-annotator agreement: the mean over participants of the Spearman
/// correlation between that participant's ratings and the mean rating of
/// all other participants on the same pairs. Participants whose
/// correlation is undefined (constant ratings, fewer than two shared
/// pairs) are left out of the mean.
pub fn human_ceiling(dataset: &[Judgment]) -> Result<f64, EvalError> {
    // participant -> pair -> ratings
    let mut by_participant: BTreeMap<&str, BTreeMap<(&SentenceInput, &str), Vec<f64>>> = BTreeMap::new();
    for j in dataset {
        by_participant
            .entry(&j.participant)
            .or_default()
            .entry(j.pair())
            .or_default()
            .push(j.rating);
    }
    if by_participant.len() < 2 {
        return Err(EvalError::SingleParticipant(by_participant.len()));
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mut correlations = Vec::new();
    for (who, own) in &by_participant {
        let (mut mine, mut rest) = (Vec::new(), Vec::new());
        for (pair, ratings) in own {
            let others: Vec<f64> = by_participant
                .iter()
                .filter(|(other, _)| *other != who)
                .filter_map(|(_, theirs)| theirs.get(pair))
                .flatten()
                .copied()
                .collect();
            if !others.is_empty() {
                mine.push(mean(ratings));
                rest.push(mean(&others));
            }
        }
        if let Ok(rho) = spearman(&mine, &rest) {
            correlations.push(rho);
        }
    }
    if correlations.is_empty() {
        return Err(EvalError::ConstantInput);
    }
    Ok(correlations.iter().sum::<f64>() / correlations.len() as f64)
}

/// Number of distinct participants in a dataset.
pub fn participants(dataset: &[Judgment]) -> usize {
    dataset.iter().map(|j| j.participant.as_str()).collect::<BTreeSet<_>>().len()
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    /// e.g. `Regression.svd`.
    pub label: String,
    pub rho: Option<f64>,
    pub note: Option<String>,
}

/// Plain-text results table: a `Humans` row, a rule, then one row per
/// method and space.
pub fn render_table(title: &str, humans: Option<f64>, rows: &[TableRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.label.len())
        .chain([6, "method".len()])
        .max()
        .unwrap_or(6)
        + 2;
    let rule = "-".repeat(width + 8);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{:<width$}{:>8}", "method", "rho");
    let _ = writeln!(out, "{rule}");
    let cell = |rho: Option<f64>| rho.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
    if let Some(h) = humans {
        let _ = writeln!(out, "{:<width$}{:>8}", "Humans", cell(Some(h)));
        let _ = writeln!(out, "{rule}");
    }
    for r in rows {
        let _ = write!(out, "{:<width$}{:>8}", r.label, cell(r.rho));
        if let Some(note) = &r.note {
            let _ = write!(out, "  ({note})");
        }
        out.push('\n');
    }
    out
}
