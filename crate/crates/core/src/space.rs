//! Distributional space construction: vocabulary selection, within-sentence
//! co-occurrence counting, phrase-token rows and PMI/LMI weighting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::error::{FormatError, SpaceError};

/// A problem with one input line that caused it to be skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineWarning {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabConfig {
    pub max_targets: usize,
    pub max_contexts: usize,
    pub stoplist_size: usize,
}

impl Default for VocabConfig {
    fn default() -> Self {
        // 8K nouns + 4K verbs, 10K contexts, 300 stop words.
        Self {
            max_targets: 12_000,
            max_contexts: 10_000,
            stoplist_size: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    targets: Vec<String>,
    contexts: Vec<String>,
    stoplist: BTreeSet<String>,
    target_index: HashMap<String, usize>,
    context_index: HashMap<String, usize>,
}

fn index_of(list: &'static str, tokens: &[String]) -> Result<HashMap<String, usize>, SpaceError> {
    let mut index = HashMap::with_capacity(tokens.len());
    for (i, t) in tokens.iter().enumerate() {
        if index.insert(t.clone(), i).is_some() {
            return Err(SpaceError::Duplicate {
                list,
                token: t.clone(),
            });
        }
    }
    Ok(index)
}

impl Vocabulary {
    pub fn new(
        targets: Vec<String>,
        contexts: Vec<String>,
        stoplist: BTreeSet<String>,
    ) -> Result<Self, SpaceError> {
        let target_index = index_of("target", &targets)?;
        let context_index = index_of("context", &contexts)?;
        if let Some(c) = contexts.iter().find(|c| stoplist.contains(*c)) {
            return Err(SpaceError::StopwordContext(c.clone()));
        }
        Ok(Self {
            targets,
            contexts,
            stoplist,
            target_index,
            context_index,
        })
    }

    /// Frequency-ranked vocabulary: the `stoplist_size` most frequent tokens
    /// form the stoplist, and targets and contexts are the most frequent of
    /// the remaining tokens. Ties are broken alphabetically.
    pub fn from_frequencies<'a, I>(sentences: I, config: &VocabConfig) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for sentence in sentences {
            for tok in sentence {
                *freq.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let stoplist: BTreeSet<String> = ranked
            .iter()
            .take(config.stoplist_size)
            .map(|(t, _)| t.to_string())
            .collect();
        let content: Vec<String> = ranked
            .iter()
            .skip(config.stoplist_size)
            .map(|(t, _)| t.to_string())
            .collect();
        let targets = content.iter().take(config.max_targets).cloned().collect();
        let contexts = content.iter().take(config.max_contexts).cloned().collect();
        Self::new(targets, contexts, stoplist).expect("ranked tokens are unique and disjoint from the stoplist")
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn stoplist(&self) -> &BTreeSet<String> {
        &self.stoplist
    }

    pub fn target_id(&self, token: &str) -> Option<usize> {
        self.target_index.get(token).copied()
    }

    pub fn context_id(&self, token: &str) -> Option<usize> {
        self.context_index.get(token).copied()
    }
}

/// Pre-lemmatized corpus held in memory, one sentence per input line.
///
/// Malformed lines are kept as empty sentences so that sentence indices
/// always equal 0-based line numbers.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub sentences: Vec<Vec<String>>,
    pub warnings: Vec<LineWarning>,
}

impl Corpus {
    pub fn from_lines<S: AsRef<str>>(lines: &[S]) -> Self {
        Self {
            sentences: lines
                .iter()
                .map(|l| l.as_ref().split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect())
                .collect(),
            warnings: Vec::new(),
        }
    }

    /// Reads UTF-8 text, one sentence per line, tokens separated by spaces.
    /// Lines that are not valid UTF-8 or contain control characters are
    /// skipped with a warning. I/O failures are fatal.
    pub fn read<R: BufRead>(mut reader: R) -> Result<Self, SpaceError> {
        let mut corpus = Corpus::default();
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            if buf.last() == Some(&b'\n') {
                buf.pop();
            }
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
            let sentence = match std::str::from_utf8(&buf) {
                Err(_) => Err("invalid UTF-8".to_string()),
                Ok(s) => match s.chars().find(|c| c.is_control()) {
                    Some(c) => Err(format!("control character {c:?}")),
                    None => Ok(s.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect()),
                },
            };
            match sentence {
                Ok(tokens) => corpus.sentences.push(tokens),
                Err(message) => {
                    warn!("corpus line {line_no}: {message}; skipped");
                    corpus.warnings.push(LineWarning { line: line_no, message });
                    corpus.sentences.push(Vec::new());
                }
            }
        }
        Ok(corpus)
    }

    pub fn slices(&self) -> impl Iterator<Item = &[String]> {
        self.sentences.iter().map(Vec::as_slice)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Target x context count matrix. At most one entry per cell; absent cells
/// are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCountMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    entries: BTreeMap<(usize, usize), u64>,
}

impl SparseCountMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>) -> Self {
        Self {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn add(&mut self, row: usize, col: usize, count: u64) {
        assert!(row < self.rows.len() && col < self.cols.len());
        if count > 0 {
            *self.entries.entry((row, col)).or_default() += count;
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries.get(&(row, col)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Cell-wise addition of a shard with the same row and column labels.
    pub fn merge(&mut self, other: &SparseCountMatrix) -> Result<(), SpaceError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SpaceError::ColumnMismatch);
        }
        for (&(r, c), &n) in &other.entries {
            *self.entries.entry((r, c)).or_default() += n;
        }
        Ok(())
    }

    /// Appends the rows of `other` (same columns) below the existing rows.
    pub fn append_rows(&mut self, other: &SparseCountMatrix) -> Result<(), SpaceError> {
        if self.cols != other.cols {
            return Err(SpaceError::ColumnMismatch);
        }
        let offset = self.rows.len();
        self.rows.extend(other.rows.iter().cloned());
        for (&(r, c), &n) in &other.entries {
            self.entries.insert((r + offset, c), n);
        }
        Ok(())
    }

    /// TSV triples `target<TAB>context<TAB>count`, row-major order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (&(r, c), n) in &self.entries {
            writeln!(w, "{}\t{}\t{}", self.rows[r], self.cols[c], n)?;
        }
        Ok(())
    }
}

/// Counts within-sentence co-occurrences of targets with contexts.
///
/// Every (target position, context position) pair with distinct positions
/// adds one, so a target sees other occurrences of its own lemma but not
/// itself. Stop words are never contexts.
pub fn count_cooccurrences<'a, I>(sentences: I, vocab: &Vocabulary) -> SparseCountMatrix
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut counts = SparseCountMatrix::new(vocab.targets.clone(), vocab.contexts.clone());
    for sentence in sentences {
        let ids: Vec<(Option<usize>, Option<usize>)> = sentence
            .iter()
            .map(|t| (vocab.target_id(t), vocab.context_id(t)))
            .collect();
        for (p, &(target, _)) in ids.iter().enumerate() {
            let Some(target) = target else { continue };
            for (q, &(_, context)) in ids.iter().enumerate() {
                if let (true, Some(context)) = (p != q, context) {
                    counts.add(target, context, 1);
                }
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhraseKind {
    SubjectVerb,
    SubjectVerbObject,
}

/// A subject-verb(-object) construction whose corpus occurrences are
/// collected as a single token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhraseSpec {
    pub subject: String,
    pub verb: String,
    pub object: Option<String>,
}

impl PhraseSpec {
    pub fn intransitive(subject: &str, verb: &str) -> Self {
        Self {
            subject: subject.into(),
            verb: verb.into(),
            object: None,
        }
    }

    pub fn transitive(subject: &str, verb: &str, object: &str) -> Self {
        Self {
            subject: subject.into(),
            verb: verb.into(),
            object: Some(object.into()),
        }
    }

    pub fn kind(&self) -> PhraseKind {
        match self.object {
            None => PhraseKind::SubjectVerb,
            Some(_) => PhraseKind::SubjectVerbObject,
        }
    }

    /// Row label of the phrase token, e.g. `mom_sing` or `dog_chase_cat`.
    pub fn token(&self) -> String {
        match &self.object {
            None => format!("{}_{}", self.subject, self.verb),
            Some(o) => format!("{}_{}_{}", self.subject, self.verb, o),
        }
    }
}

/// One dependency record: a subject-verb(-object) attested in a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyTriple {
    pub sentence: usize,
    pub subject: String,
    pub verb: String,
    pub object: Option<String>,
}

impl DependencyTriple {
    pub fn phrase(&self) -> PhraseSpec {
        PhraseSpec {
            subject: self.subject.clone(),
            verb: self.verb.clone(),
            object: self.object.clone(),
        }
    }
}

/// Reads `sentence_index<TAB>subject<TAB>verb<TAB>object` lines, `-` for a
/// missing object. Malformed lines are skipped with a warning.
pub fn read_triples<R: BufRead>(reader: R) -> Result<(Vec<DependencyTriple>, Vec<LineWarning>), SpaceError> {
    let mut triples = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parsed = match fields.as_slice() {
            [idx, subj, verb, obj] if !subj.is_empty() && !verb.is_empty() && !obj.is_empty() => idx
                .parse::<usize>()
                .map(|sentence| DependencyTriple {
                    sentence,
                    subject: subj.to_string(),
                    verb: verb.to_string(),
                    object: (*obj != "-").then(|| obj.to_string()),
                })
                .map_err(|e| format!("bad sentence index {idx:?}: {e}")),
            _ => Err(format!("expected 4 tab-separated fields, got {}", fields.len())),
        };
        match parsed {
            Ok(t) => triples.push(t),
            Err(message) => {
                warn!("triples line {line_no}: {message}; skipped");
                warnings.push(LineWarning { line: line_no, message });
            }
        }
    }
    Ok((triples, warnings))
}

#[derive(Debug, Clone)]
pub struct PhraseCounts {
    /// One row per phrase token that occurred at least once, in `specs` order.
    pub counts: SparseCountMatrix,
    /// Phrase of each row.
    pub phrases: Vec<PhraseSpec>,
    pub warnings: Vec<LineWarning>,
}

/// Builds phrase-token rows: every triple matching a spec contributes the
/// context profile of its sentence to that phrase's row.
///
/// Warnings carry the 1-based position of the triple in `triples`.
pub fn count_phrase_occurrences(
    triples: &[DependencyTriple],
    corpus: &Corpus,
    specs: &BTreeSet<PhraseSpec>,
    vocab: &Vocabulary,
) -> PhraseCounts {
    let known_verbs: BTreeSet<&str> = specs.iter().map(|s| s.verb.as_str()).collect();
    let mut warnings = Vec::new();
    let mut profiles: BTreeMap<&PhraseSpec, BTreeMap<usize, u64>> = BTreeMap::new();
    for (i, triple) in triples.iter().enumerate() {
        if !known_verbs.contains(triple.verb.as_str()) {
            let message = format!("unknown verb {:?}", triple.verb);
            warn!("triple {}: {message}; skipped", i + 1);
            warnings.push(LineWarning { line: i + 1, message });
            continue;
        }
        let Some(spec) = specs.get(&triple.phrase()) else {
            continue;
        };
        let Some(sentence) = corpus.sentences.get(triple.sentence) else {
            let message = format!("sentence index {} out of range", triple.sentence);
            warn!("triple {}: {message}; skipped", i + 1);
            warnings.push(LineWarning { line: i + 1, message });
            continue;
        };
        let profile = profiles.entry(spec).or_default();
        for c in sentence.iter().filter_map(|t| vocab.context_id(t)) {
            *profile.entry(c).or_default() += 1;
        }
    }
    let phrases: Vec<PhraseSpec> = profiles.keys().map(|s| (*s).clone()).collect();
    let mut counts = SparseCountMatrix::new(phrases.iter().map(PhraseSpec::token).collect(), vocab.contexts.clone());
    for (row, profile) in profiles.values().enumerate() {
        for (&c, &n) in profile {
            counts.add(row, c, n);
        }
    }
    PhraseCounts {
        counts,
        phrases,
        warnings,
    }
}

/// Sparse real-valued target x context matrix produced by weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    entries: BTreeMap<(usize, usize), f64>,
}

impl WeightedMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>) -> Self {
        Self {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    /// Stores a value; zeros are not stored.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.rows.len() && col < self.cols.len());
        if value == 0.0 {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries.get(&(row, col)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn row_index(&self, token: &str) -> Option<usize> {
        self.rows.iter().position(|r| r == token)
    }

    /// Number of non-zero dimensions in each row.
    pub fn row_nnz(&self) -> Vec<usize> {
        let mut nnz = vec![0; self.rows.len()];
        for &(r, _) in self.entries.keys() {
            nnz[r] += 1;
        }
        nnz
    }

    pub fn dense_row(&self, row: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols.len()];
        for (&(_, c), &v) in self.entries.range((row, 0)..(row + 1, 0)) {
            out[c] = v;
        }
        out
    }

    pub fn has_negative(&self) -> Option<((usize, usize), f64)> {
        self.entries.iter().find(|(_, &v)| v < 0.0).map(|(&k, &v)| (k, v))
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (&(r, c), v) in &self.entries {
            writeln!(w, "{}\t{}\t{:?}", self.rows[r], self.cols[c], v)?;
        }
        Ok(())
    }

    /// Reads TSV triples against known row and column vocabularies.
    pub fn read_tsv<R: BufRead>(reader: R, rows: Vec<String>, cols: Vec<String>) -> Result<Self, FormatError> {
        let what = || "weighted matrix".to_string();
        let row_index: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let col_index: HashMap<&str, usize> = cols.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let mut entries = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let err = |message: String| FormatError::Parse {
                what: what(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [row, col, value] = fields.as_slice() else {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            };
            let r = *row_index.get(row).ok_or_else(|| err(format!("unknown target {row:?}")))?;
            let c = *col_index.get(col).ok_or_else(|| err(format!("unknown context {col:?}")))?;
            let v: f64 = value.parse().map_err(|e| err(format!("{e}")))?;
            if entries.insert((r, c), v).is_some() {
                return Err(err(format!("duplicate cell ({row}, {col})")));
            }
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_tsv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Pmi,
    Lmi,
}

impl std::str::FromStr for Weighting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pmi" => Ok(Self::Pmi),
            "lmi" => Ok(Self::Lmi),
            other => Err(format!("unknown weighting {other:?} (expected pmi or lmi)")),
        }
    }
}

pub fn weight(counts: &SparseCountMatrix, scheme: Weighting) -> Result<WeightedMatrix, SpaceError> {
    match scheme {
        Weighting::Pmi => weight_pmi(counts),
        Weighting::Lmi => weight_lmi(counts),
    }
}

fn weighted_by(
    counts: &SparseCountMatrix,
    cell: impl Fn(u64, f64) -> f64,
) -> Result<WeightedMatrix, SpaceError> {
    let total = counts.total();
    if total == 0 {
        return Err(SpaceError::ZeroTotal);
    }
    let mut row_sums = vec![0u64; counts.rows.len()];
    let mut col_sums = vec![0u64; counts.cols.len()];
    for (&(r, c), &n) in &counts.entries {
        row_sums[r] += n;
        col_sums[c] += n;
    }
    let total = total as f64;
    let mut out = WeightedMatrix::new(counts.rows.clone(), counts.cols.clone());
    for (&(r, c), &n) in &counts.entries {
        let ratio = n as f64 * total / (row_sums[r] as f64 * col_sums[c] as f64);
        let pmi = ratio.ln().max(0.0);
        out.set(r, c, cell(n, pmi));
    }
    Ok(out)
}

/// Non-negative PMI, natural log: `max(0, ln p(t,c) / (p(t) p(c)))`.
pub fn weight_pmi(counts: &SparseCountMatrix) -> Result<WeightedMatrix, SpaceError> {
    weighted_by(counts, |_, pmi| pmi)
}

/// Local mutual information: raw count times clamped PMI.
pub fn weight_lmi(counts: &SparseCountMatrix) -> Result<WeightedMatrix, SpaceError> {
    weighted_by(counts, |n, pmi| n as f64 * pmi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn vocab(targets: &[&str], contexts: &[&str]) -> Vocabulary {
        Vocabulary::new(strings(targets), strings(contexts), BTreeSet::new()).unwrap()
    }

    fn counts_from(cells: &[&[u64]]) -> SparseCountMatrix {
        let rows = (0..cells.len()).map(|i| format!("t{i}")).collect();
        let cols = (0..cells[0].len()).map(|i| format!("c{i}")).collect();
        let mut m = SparseCountMatrix::new(rows, cols);
        for (r, row) in cells.iter().enumerate() {
            for (c, &n) in row.iter().enumerate() {
                m.add(r, c, n);
            }
        }
        m
    }

    #[test]
    fn simple_sentence_counts() {
        let v = vocab(&["dog"], &["chase", "cat"]);
        let corpus = Corpus::from_lines(&["dog chase cat"]);
        let m = count_cooccurrences(corpus.slices(), &v);
        assert_eq!(m.get(0, 0), 1);
        assert_eq!(m.get(0, 1), 1);
        assert_eq!(m.total(), 2);
    }

    #[test]
    fn empty_corpus_gives_zero_matrix() {
        let v = vocab(&["dog"], &["cat"]);
        let m = count_cooccurrences(Corpus::default().slices(), &v);
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.total(), 0);
    }

    #[test]
    fn repeated_target_sees_other_occurrences_only() {
        let v = vocab(&["dog"], &["dog", "chase"]);
        let corpus = Corpus::from_lines(&["dog dog chase"]);
        let m = count_cooccurrences(corpus.slices(), &v);
        assert_eq!(m.get(0, 0), 2);
        assert_eq!(m.get(0, 1), 2);
    }

    #[test]
    fn stoplist_excluded_from_contexts() {
        let stop: BTreeSet<String> = ["the".to_string()].into();
        assert!(matches!(
            Vocabulary::new(strings(&["dog"]), strings(&["the"]), stop.clone()),
            Err(SpaceError::StopwordContext(_))
        ));
        assert!(matches!(
            Vocabulary::new(strings(&["dog", "dog"]), vec![], stop),
            Err(SpaceError::Duplicate { .. })
        ));
    }

    #[test]
    fn frequency_vocabulary() {
        let corpus = Corpus::from_lines(&["the dog chase the cat", "the cat sleep", "a dog bark"]);
        let cfg = VocabConfig {
            max_targets: 2,
            max_contexts: 3,
            stoplist_size: 1,
        };
        let v = Vocabulary::from_frequencies(corpus.slices(), &cfg);
        assert_eq!(v.stoplist().iter().collect::<Vec<_>>(), vec!["the"]);
        assert_eq!(v.targets(), &strings(&["cat", "dog"]));
        assert_eq!(v.contexts(), &strings(&["cat", "dog", "a"]));
    }

    #[test]
    fn malformed_corpus_lines_are_skipped_with_line_numbers() {
        let input: &[u8] = b"dog bark\n\xff\xfe bad\ncat\tsleep\ncat sleep\n";
        let corpus = Corpus::read(input).unwrap();
        assert_eq!(corpus.sentences.len(), 4);
        assert_eq!(corpus.warnings.iter().map(|w| w.line).collect::<Vec<_>>(), vec![2, 3]);
        assert!(corpus.sentences[1].is_empty());
        assert_eq!(corpus.sentences[3], strings(&["cat", "sleep"]));
    }

    #[test]
    fn sharded_counts_merge_to_whole() {
        let v = vocab(&["dog", "cat"], &["dog", "cat", "run", "eat"]);
        let lines = ["dog run cat", "cat eat", "dog dog eat run", "run"];
        let whole = count_cooccurrences(Corpus::from_lines(&lines).slices(), &v);
        let mut left = count_cooccurrences(Corpus::from_lines(&lines[..2]).slices(), &v);
        let right = count_cooccurrences(Corpus::from_lines(&lines[2..]).slices(), &v);
        left.merge(&right).unwrap();
        assert_eq!(left, whole);
    }

    #[test]
    fn phrase_rows() {
        let v = vocab(&["mom", "sing"], &["loud"]);
        let corpus = Corpus::from_lines(&["mom sing loud"]);
        let triples = vec![DependencyTriple {
            sentence: 0,
            subject: "mom".into(),
            verb: "sing".into(),
            object: None,
        }];
        let specs: BTreeSet<_> = [PhraseSpec::intransitive("mom", "sing")].into();
        let p = count_phrase_occurrences(&triples, &corpus, &specs, &v);
        assert_eq!(p.counts.rows(), &strings(&["mom_sing"]));
        assert_eq!(p.counts.get(0, 0), 1);

        let none = count_phrase_occurrences(&[], &corpus, &specs, &v);
        assert_eq!(none.counts.rows().len(), 0);
    }

    #[test]
    fn phrase_rows_sum_over_sentences() {
        let v = vocab(&["dog"], &["fast", "park", "cat"]);
        let corpus = Corpus::from_lines(&["dog chase cat fast", "dog chase cat park park"]);
        let triple = |s| DependencyTriple {
            sentence: s,
            subject: "dog".into(),
            verb: "chase".into(),
            object: Some("cat".into()),
        };
        let specs: BTreeSet<_> = [PhraseSpec::transitive("dog", "chase", "cat")].into();
        let p = count_phrase_occurrences(&[triple(0), triple(1)], &corpus, &specs, &v);
        assert_eq!(p.counts.rows(), &strings(&["dog_chase_cat"]));
        assert_eq!(p.counts.get(0, 0), 1);
        assert_eq!(p.counts.get(0, 1), 2);
        assert_eq!(p.counts.get(0, 2), 2);
    }

    #[test]
    fn unknown_verb_triples_warn() {
        let v = vocab(&["dog"], &["cat"]);
        let corpus = Corpus::from_lines(&["dog bite cat"]);
        let triples = vec![DependencyTriple {
            sentence: 0,
            subject: "dog".into(),
            verb: "bite".into(),
            object: Some("cat".into()),
        }];
        let specs: BTreeSet<_> = [PhraseSpec::transitive("dog", "chase", "cat")].into();
        let p = count_phrase_occurrences(&triples, &corpus, &specs, &v);
        assert_eq!(p.warnings.len(), 1);
        assert!(p.warnings[0].message.contains("bite"));
        assert_eq!(p.counts.rows().len(), 0);
    }

    #[test]
    fn triples_parse_and_skip_malformed() {
        let input = "0\tmom\tsing\t-\n1\tdog\tchase\tcat\nx\ta\tb\tc\n2\tonly\n";
        let (triples, warnings) = read_triples(input.as_bytes()).unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].object, None);
        assert_eq!(triples[1].object.as_deref(), Some("cat"));
        assert_eq!(warnings.iter().map(|w| w.line).collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn pmi_diagonal() {
        let w = weight_pmi(&counts_from(&[&[2, 0], &[0, 2]])).unwrap();
        assert!((w.get(0, 0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(w.get(1, 1), w.get(0, 0));
        assert_eq!(w.get(0, 1), 0.0);
    }

    #[test]
    fn pmi_uniform_is_zero() {
        let w = weight_pmi(&counts_from(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!(w.nnz(), 0);
        let l = weight_lmi(&counts_from(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!(l.nnz(), 0);
    }

    #[test]
    fn lmi_diagonal() {
        let w = weight_lmi(&counts_from(&[&[2, 0], &[0, 2]])).unwrap();
        assert!((w.get(0, 0) - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(w.get(0, 1), 0.0);
    }

    #[test]
    fn zero_total_errors() {
        let m = counts_from(&[&[0, 0]]);
        assert!(matches!(weight_pmi(&m), Err(SpaceError::ZeroTotal)));
        assert!(matches!(weight_lmi(&m), Err(SpaceError::ZeroTotal)));
    }

    #[test]
    fn weighted_tsv_round_trip() {
        let w = weight_lmi(&counts_from(&[&[3, 1, 0], &[0, 2, 5]])).unwrap();
        let mut buf = Vec::new();
        w.write_tsv(&mut buf).unwrap();
        let back = WeightedMatrix::read_tsv(&buf[..], w.rows().to_vec(), w.cols().to_vec()).unwrap();
        assert_eq!(back, w);
    }
}
