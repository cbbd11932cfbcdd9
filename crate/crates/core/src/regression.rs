//! Ridge regression with GCV-selected regularization, and multi-step
//! regression for learning verb matrices and higher-rank verb tensors.
//!
//! A function of arity n is learned from observed vectors of its fully
//! saturated phrases. Stage i (from n-1 down to 0) groups the stage-(i+1)
//! tuples by their first i arguments; each group is one regression whose
//! inputs are the vectors of argument i+1 and whose responses are the
//! unfolded stage-(i+1) tensors. The result for the empty prefix is the
//! full tensor.
//!
//! Tuples list arguments in application order: for a transitive verb the
//! object comes first, then the subject, so that
//! `contract(contract(T, obj), subj)` yields the sentence vector.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use nalgebra::DMatrix;

use crate::error::{FormatError, RegressionError};
use crate::io;
use crate::tensor::DenseTensor;

/// `{1e-4, 1e-3, ..., 1e2}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-4..=2).map(|e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionConfig {
    pub lambda_grid: Vec<f64>,
    /// Minimum number of examples for a single regression.
    pub min_examples: usize,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            lambda_grid: default_lambda_grid(),
            min_examples: 3,
        }
    }
}

fn as_matrix(name: &str, t: &DenseTensor) -> Result<DMatrix<f64>, RegressionError> {
    if t.rank() != 2 {
        return Err(crate::error::TensorError::RankMismatch {
            op: if name == "X" { "ridge design" } else { "ridge responses" },
            expected: "2",
            shape: t.shape().to_vec(),
        }
        .into());
    }
    Ok(DMatrix::from_row_slice(t.shape()[0], t.shape()[1], t.data()))
}

fn to_tensor(m: &DMatrix<f64>) -> DenseTensor {
    let mut data = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        data.extend(m.row(r).iter());
    }
    DenseTensor::new(vec![m.nrows(), m.ncols()], data).expect("non-empty matrix")
}

fn check_rows(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(), RegressionError> {
    if x.nrows() != y.nrows() {
        return Err(RegressionError::RowMismatch {
            x_rows: x.nrows(),
            y_rows: y.nrows(),
        });
    }
    Ok(())
}

/// `B = (XᵀX + λI)⁻¹ XᵀY`, so that predictions are `X·B`.
pub fn ridge_solve(x: &DenseTensor, y: &DenseTensor, lambda: f64) -> Result<DenseTensor, RegressionError> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(RegressionError::NegativeLambda(lambda));
    }
    let (x, y) = (as_matrix("X", x)?, as_matrix("Y", y)?);
    check_rows(&x, &y)?;
    let xt = x.transpose();
    let mut gram = &xt * &x;
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let rhs = &xt * &y;
    let b = match gram.clone().cholesky() {
        Some(chol) => {
            // One step of iterative refinement recovers the rounding lost
            // to the square roots (e.g. 4/2 comes out as exactly 2).
            let b = chol.solve(&rhs);
            let residual = &rhs - &gram * &b;
            b + chol.solve(&residual)
        }
        None if lambda > 0.0 => gram.lu().solve(&rhs).ok_or(RegressionError::Singular)?,
        None => return Err(RegressionError::Singular),
    };
    Ok(to_tensor(&b))
}

/// GCV score of one grid point; `None` when `tr(I − H) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcvScore {
    pub lambda: f64,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcvSelection {
    pub lambda: f64,
    /// Coefficients `B(λ*)`, k x m.
    pub coefficients: DenseTensor,
    /// One score per distinct grid value, ascending in λ.
    pub scores: Vec<GcvScore>,
}

/// Picks λ from `grid` minimizing the pooled generalized cross-validation
/// score `n·‖Y − XB(λ)‖²_F / tr(I − H(λ))²`, where
/// `H(λ) = X(XᵀX + λI)⁻¹Xᵀ`. Near-ties go to the larger λ.
pub fn gcv_select(x: &DenseTensor, y: &DenseTensor, grid: &[f64]) -> Result<GcvSelection, RegressionError> {
    if grid.is_empty() {
        return Err(RegressionError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|l| l.is_nan() || **l < 0.0) {
        return Err(RegressionError::NegativeLambda(bad));
    }
    let (x, y) = (as_matrix("X", x)?, as_matrix("Y", y)?);
    check_rows(&x, &y)?;
    let n = x.nrows();
    let svd = x.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("left vectors"), svd.v_t.expect("right vectors"));
    let s_max = svd.singular_values.max();
    let cutoff = s_max * f64::EPSILON * n.max(x.ncols()) as f64;
    let s: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s > cutoff { s } else { 0.0 })
        .collect();
    let uty = u.transpose() * &y;

    let mut lambdas = grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();

    let shrink = |lambda: f64, f: fn(f64, f64) -> f64| -> Vec<f64> {
        s.iter()
            .map(|&si| if si == 0.0 { 0.0 } else { f(si, lambda) })
            .collect()
    };
    let mut scores = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let fit = shrink(lambda, |s, l| s * s / (s * s + l));
        let mut fitted_coords = uty.clone();
        for (i, f) in fit.iter().enumerate() {
            fitted_coords.row_mut(i).scale_mut(*f);
        }
        let rss = (&y - &u * fitted_coords).norm_squared();
        let denom = n as f64 - fit.iter().sum::<f64>();
        let score = (denom > n as f64 * 1e-12).then(|| n as f64 * rss / (denom * denom));
        scores.push(GcvScore { lambda, score });
    }
    // Near-ties with the minimum go to the largest λ.
    let min = scores.iter().filter_map(|s| s.score).fold(f64::INFINITY, f64::min);
    let lambda = scores
        .iter()
        .rev()
        .find(|s| s.score.is_some_and(|v| v <= min * (1.0 + 1e-12)))
        .map(|s| s.lambda)
        .ok_or(RegressionError::OverParameterized)?;
    let gain = shrink(lambda, |s, l| s / (s * s + l));
    let mut coords = uty;
    for (i, g) in gain.iter().enumerate() {
        coords.row_mut(i).scale_mut(*g);
    }
    let b = v_t.transpose() * coords;
    Ok(GcvSelection {
        lambda,
        coefficients: to_tensor(&b),
        scores,
    })
}

/// One regression performed while training a model.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionRecord {
    pub stage: usize,
    /// Arguments already saturated at this stage (empty for the full function).
    pub prefix: Vec<String>,
    pub lambda: f64,
    pub examples: usize,
}

/// A learned verb: a matrix for arity 1, a rank-3 tensor for arity 2, in
/// general a tensor of rank arity+1 with the output mode first.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub verb: String,
    pub arity: usize,
    pub tensor: DenseTensor,
    pub regressions: Vec<RegressionRecord>,
}

impl TrainedModel {
    /// Chosen λ of the final (full-arity) regression.
    pub fn lambda(&self) -> Option<f64> {
        self.regressions.iter().find(|r| r.stage == 0).map(|r| r.lambda)
    }

    pub fn examples(&self) -> usize {
        self.regressions.iter().find(|r| r.stage == 0).map_or(0, |r| r.examples)
    }

    pub fn file_stem(verb: &str, arity: usize) -> String {
        format!("{verb}.arity{arity}")
    }

    /// Writes `<verb>.arity<n>.bin` and the `.tsv` metadata sidecar into `dir`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, FormatError> {
        fs::create_dir_all(dir)?;
        let stem = Self::file_stem(&self.verb, self.arity);
        let bin = dir.join(format!("{stem}.bin"));
        io::save_tensor(&bin, &self.tensor)?;
        let mut w = BufWriter::new(fs::File::create(dir.join(format!("{stem}.tsv")))?);
        writeln!(w, "verb\t{}", self.verb)?;
        writeln!(w, "arity\t{}", self.arity)?;
        for r in &self.regressions {
            let prefix = if r.prefix.is_empty() { "-".to_string() } else { r.prefix.join(",") };
            writeln!(w, "regression\t{}\t{}\t{:?}\t{}", r.stage, prefix, r.lambda, r.examples)?;
        }
        w.flush()?;
        Ok(bin)
    }

    pub fn load(dir: &Path, verb: &str, arity: usize) -> Result<Self, FormatError> {
        let stem = Self::file_stem(verb, arity);
        let tensor = io::load_tensor(&dir.join(format!("{stem}.bin")))?;
        let meta_path = dir.join(format!("{stem}.tsv"));
        let (mut meta_verb, mut meta_arity, mut regressions) = (None, None, Vec::new());
        for (i, line) in BufReader::new(fs::File::open(&meta_path)?).lines().enumerate() {
            let line = line?;
            let err = |message: &str| FormatError::Parse {
                what: meta_path.display().to_string(),
                line: i + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["verb", v] => meta_verb = Some(v.to_string()),
                ["arity", a] => meta_arity = Some(a.parse::<usize>().map_err(|_| err("bad arity"))?),
                ["regression", stage, prefix, lambda, examples] => regressions.push(RegressionRecord {
                    stage: stage.parse().map_err(|_| err("bad stage"))?,
                    prefix: if *prefix == "-" {
                        Vec::new()
                    } else {
                        prefix.split(',').map(str::to_string).collect()
                    },
                    lambda: lambda.parse().map_err(|_| err("bad lambda"))?,
                    examples: examples.parse().map_err(|_| err("bad example count"))?,
                }),
                [""] => {}
                _ => return Err(err("unrecognized metadata line")),
            }
        }
        if meta_verb.as_deref() != Some(verb) || meta_arity != Some(arity) {
            return Err(FormatError::Invalid(format!(
                "{}: metadata does not describe {verb}/{arity}",
                meta_path.display()
            )));
        }
        if tensor.rank() != arity + 1 {
            return Err(FormatError::Invalid(format!(
                "{stem}: tensor rank {} does not match arity {arity}",
                tensor.rank()
            )));
        }
        Ok(Self {
            verb: verb.to_string(),
            arity,
            tensor,
            regressions,
        })
    }
}

/// One regression from argument vectors to (unfolded) output tensors of a
/// common shape S. Returns the tensor of shape S ++ [k] whose contraction
/// with an argument vector predicts the output, and the chosen λ.
fn fit_stage(
    inputs: &[&DenseTensor],
    outputs: &[&DenseTensor],
    grid: &[f64],
) -> Result<(DenseTensor, f64), RegressionError> {
    let k = inputs[0].len();
    let out_shape = outputs[0].shape().to_vec();
    let m = outputs[0].len();
    let mut x = Vec::with_capacity(inputs.len() * k);
    for v in inputs {
        if v.shape() != [k] {
            return Err(crate::error::TensorError::ShapeMismatch {
                op: "regression input",
                left: vec![k],
                right: v.shape().to_vec(),
            }
            .into());
        }
        x.extend_from_slice(v.data());
    }
    let mut y = Vec::with_capacity(outputs.len() * m);
    for t in outputs {
        if t.shape() != out_shape.as_slice() {
            return Err(crate::error::TensorError::ShapeMismatch {
                op: "regression response",
                left: out_shape.clone(),
                right: t.shape().to_vec(),
            }
            .into());
        }
        y.extend_from_slice(t.data());
    }
    let x = DenseTensor::new(vec![inputs.len(), k], x)?;
    let y = DenseTensor::new(vec![outputs.len(), m], y)?;
    let sel = gcv_select(&x, &y, grid)?;
    // B is k x m; the learned tensor stores B[a][f] at flat index f*k + a.
    let b = sel.coefficients.data();
    let mut data = vec![0.0; m * k];
    for a in 0..k {
        for f in 0..m {
            data[f * k + a] = b[a * m + f];
        }
    }
    let mut shape = out_shape;
    shape.push(k);
    Ok((DenseTensor::new(shape, data)?, sel.lambda))
}

/// Learns a verb matrix `V` with `V × subj ≈ sentence` from
/// (subject vector, sentence vector) pairs.
pub fn train_intransitive(
    verb: &str,
    pairs: &[(DenseTensor, DenseTensor)],
    config: &RegressionConfig,
) -> Result<TrainedModel, RegressionError> {
    if pairs.len() < config.min_examples.max(1) {
        return Err(RegressionError::InsufficientData {
            what: format!("intransitive verb {verb:?}"),
            count: pairs.len(),
            required: config.min_examples.max(1),
        });
    }
    let inputs: Vec<&DenseTensor> = pairs.iter().map(|p| &p.0).collect();
    let outputs: Vec<&DenseTensor> = pairs.iter().map(|p| &p.1).collect();
    let (tensor, lambda) = fit_stage(&inputs, &outputs, &config.lambda_grid)?;
    Ok(TrainedModel {
        verb: verb.to_string(),
        arity: 1,
        tensor,
        regressions: vec![RegressionRecord {
            stage: 0,
            prefix: Vec::new(),
            lambda,
            examples: pairs.len(),
        }],
    })
}

/// A verb-object matrix learned in the first step of transitive training.
#[derive(Debug, Clone, PartialEq)]
pub struct VpMatrix {
    pub matrix: DenseTensor,
    pub lambda: f64,
    pub examples: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VpMatrices {
    pub matrices: BTreeMap<String, VpMatrix>,
    /// Objects whose groups were too small (or whose regression failed), with group size.
    pub dropped: BTreeMap<String, usize>,
}

/// First step of transitive training: one subject→sentence matrix per
/// object, from (object lemma, subject vector, sentence vector) triples.
/// Groups smaller than `min_examples` are dropped.
pub fn train_vp_matrices(
    verb: &str,
    triples: &[(String, DenseTensor, DenseTensor)],
    config: &RegressionConfig,
) -> Result<VpMatrices, RegressionError> {
    let mut groups: BTreeMap<&str, (Vec<&DenseTensor>, Vec<&DenseTensor>)> = BTreeMap::new();
    for (object, subject, sentence) in triples {
        let g = groups.entry(object.as_str()).or_default();
        g.0.push(subject);
        g.1.push(sentence);
    }
    let mut out = VpMatrices::default();
    for (object, (subjects, sentences)) in groups {
        if subjects.len() < config.min_examples.max(1) {
            out.dropped.insert(object.to_string(), subjects.len());
            continue;
        }
        match fit_stage(&subjects, &sentences, &config.lambda_grid) {
            Ok((matrix, lambda)) => {
                out.matrices.insert(
                    object.to_string(),
                    VpMatrix {
                        matrix,
                        lambda,
                        examples: subjects.len(),
                    },
                );
            }
            Err(e) => {
                warn!("{verb} {object}: VP regression failed: {e}");
                out.dropped.insert(object.to_string(), subjects.len());
            }
        }
    }
    if out.matrices.is_empty() {
        return Err(RegressionError::InsufficientData {
            what: format!("VP matrices of {verb:?}"),
            count: triples.len(),
            required: config.min_examples.max(1),
        });
    }
    Ok(out)
}

/// Second step of transitive training: regresses object vectors onto the
/// unfolded VP matrices, giving `T` with `contract(T, obj) ≈ VP(obj)`.
pub fn train_transitive(
    verb: &str,
    vp: &VpMatrices,
    object_vectors: &BTreeMap<String, DenseTensor>,
    config: &RegressionConfig,
) -> Result<TrainedModel, RegressionError> {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut regressions = Vec::new();
    for (object, m) in &vp.matrices {
        let Some(v) = object_vectors.get(object) else {
            warn!("{verb}: no vector for object {object:?}; skipped");
            continue;
        };
        inputs.push(v);
        outputs.push(&m.matrix);
        regressions.push(RegressionRecord {
            stage: 1,
            prefix: vec![object.clone()],
            lambda: m.lambda,
            examples: m.examples,
        });
    }
    if inputs.len() < config.min_examples.max(1) {
        return Err(RegressionError::InsufficientData {
            what: format!("transitive verb {verb:?} (objects with matrix and vector)"),
            count: inputs.len(),
            required: config.min_examples.max(1),
        });
    }
    let (tensor, lambda) = fit_stage(&inputs, &outputs, &config.lambda_grid)?;
    regressions.insert(
        0,
        RegressionRecord {
            stage: 0,
            prefix: Vec::new(),
            lambda,
            examples: inputs.len(),
        },
    );
    Ok(TrainedModel {
        verb: verb.to_string(),
        arity: 2,
        tensor,
        regressions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageEntry {
    pub tensor: DenseTensor,
    /// λ of the regression that produced this entry; `None` for observed
    /// phrase vectors.
    pub lambda: Option<f64>,
    pub examples: usize,
}

/// Tensors learned at every stage, keyed by the saturated argument prefix.
/// Stage n holds the observed phrase vectors, stage 0 the full function.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationTable {
    pub stages: Vec<BTreeMap<Vec<String>, StageEntry>>,
}

impl SaturationTable {
    /// Tuples at stage `stage + 1` that agree with `prefix` on its first
    /// `stage` arguments: the regression set of the stage-`stage` function.
    pub fn extensions<'a>(&'a self, stage: usize, prefix: &'a [String]) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        self.stages
            .get(stage + 1)
            .into_iter()
            .flat_map(|m| m.keys())
            .filter(move |t| t.len() > prefix.len() && t[..prefix.len()] == *prefix)
    }
}

/// Multi-step regression for a function of arity `arity`.
///
/// `observations` pair each fully saturated argument tuple (application
/// order) with the vector of that phrase learned as a single token.
pub fn train_nary(
    verb: &str,
    arity: usize,
    observations: &[(Vec<String>, DenseTensor)],
    vectors: &BTreeMap<String, DenseTensor>,
    config: &RegressionConfig,
) -> Result<(TrainedModel, SaturationTable), RegressionError> {
    let mut current: BTreeMap<Vec<String>, StageEntry> = BTreeMap::new();
    for (tuple, v) in observations {
        if tuple.len() != arity {
            return Err(RegressionError::TupleArity {
                tuple: tuple.clone(),
                len: tuple.len(),
                arity,
            });
        }
        let entry = StageEntry {
            tensor: v.clone(),
            lambda: None,
            examples: 1,
        };
        if current.insert(tuple.clone(), entry).is_some() {
            return Err(RegressionError::DuplicateTuple(tuple.clone()));
        }
    }
    let mut stages = vec![BTreeMap::new(); arity + 1];
    stages[arity] = current.clone();
    let mut regressions = Vec::new();

    for stage in (0..arity).rev() {
        let mut groups: BTreeMap<&[String], (Vec<&DenseTensor>, Vec<&DenseTensor>)> = BTreeMap::new();
        for (tuple, entry) in &current {
            let Some(arg) = vectors.get(&tuple[stage]) else {
                warn!("{verb}: no vector for argument {:?}; tuple {tuple:?} skipped", tuple[stage]);
                continue;
            };
            let g = groups.entry(&tuple[..stage]).or_default();
            g.0.push(arg);
            g.1.push(&entry.tensor);
        }
        let mut next = BTreeMap::new();
        for (prefix, (inputs, outputs)) in groups {
            if inputs.len() < config.min_examples.max(1) {
                continue;
            }
            match fit_stage(&inputs, &outputs, &config.lambda_grid) {
                Ok((tensor, lambda)) => {
                    regressions.push(RegressionRecord {
                        stage,
                        prefix: prefix.to_vec(),
                        lambda,
                        examples: inputs.len(),
                    });
                    next.insert(
                        prefix.to_vec(),
                        StageEntry {
                            tensor,
                            lambda: Some(lambda),
                            examples: inputs.len(),
                        },
                    );
                }
                Err(e) => warn!("{verb} stage {stage} {prefix:?}: regression failed: {e}"),
            }
        }
        if next.is_empty() {
            return Err(RegressionError::StageFailure { stage });
        }
        stages[stage] = next.clone();
        current = next;
    }
    let full = current.remove(&Vec::new()).expect("stage 0 has the empty prefix");
    regressions.sort_by(|a, b| a.stage.cmp(&b.stage).then_with(|| a.prefix.cmp(&b.prefix)));
    Ok((
        TrainedModel {
            verb: verb.to_string(),
            arity,
            tensor: full.tensor,
            regressions,
        },
        SaturationTable { stages },
    ))
}

/// Trained models keyed by (verb, arity).
#[derive(Debug, Clone, Default)]
pub struct ModelStore {
    models: BTreeMap<(String, usize), TrainedModel>,
}

impl ModelStore {
    pub fn insert(&mut self, model: TrainedModel) {
        self.models.insert((model.verb.clone(), model.arity), model);
    }

    pub fn get(&self, verb: &str, arity: usize) -> Option<&TrainedModel> {
        self.models.get(&(verb.to_string(), arity))
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TrainedModel> {
        self.models.values()
    }

    /// Loads every `<verb>.arity<n>.bin` with its sidecar from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, FormatError> {
        let mut store = Self::default();
        let mut names: Vec<String> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        names.sort();
        for name in names {
            let Some(stem) = name.strip_suffix(".bin") else { continue };
            let Some((verb, arity)) = stem.rsplit_once(".arity") else { continue };
            let Ok(arity) = arity.parse::<usize>() else { continue };
            store.insert(TrainedModel::load(dir, verb, arity)?);
        }
        Ok(store)
    }
}
