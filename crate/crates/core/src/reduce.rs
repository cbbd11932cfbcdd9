//! Dimensionality reduction of a weighted core matrix to `k` latent
//! dimensions, and projection of further raw vectors (phrase rows) into the
//! same reduced space.
//!
//! SVD keeps the first `k` columns of `UΣ`; every right singular vector is
//! sign-flipped so that its largest-magnitude component is positive, which
//! makes the output deterministic. NMF factorizes the sum-normalized matrix
//! as `X ≈ WH` with alternating non-negative least squares solved by
//! projected gradient with an Armijo-style step search, and uses the rows
//! of `W` as embeddings.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FormatError, ReduceError};
use crate::io;
use crate::tensor::{dot, DenseTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMethod {
    Svd,
    Nmf,
}

impl ReductionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Svd => "svd",
            Self::Nmf => "nmf",
        }
    }
}

impl std::str::FromStr for ReductionMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svd" => Ok(Self::Svd),
            "nmf" => Ok(Self::Nmf),
            other => Err(format!("unknown reduction method {other:?}")),
        }
    }
}

/// Projected-gradient NMF settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfConfig {
    pub max_outer_iters: usize,
    /// Outer loop stops once the relative objective decrease falls below this.
    pub tolerance: f64,
    /// Iteration cap of each non-negative least-squares subproblem.
    pub inner_max_iters: usize,
    /// Initial subproblem tolerance relative to the initial projected
    /// gradient norm (0.001 in Lin's reference implementation).
    pub inner_tolerance: f64,
    /// Projection stopping tolerance relative to the initial projected
    /// gradient norm of each projection problem.
    pub projection_tolerance: f64,
    pub seed: u64,
}

impl Default for NmfConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 200,
            tolerance: 1e-5,
            inner_max_iters: 1000,
            inner_tolerance: 1e-3,
            projection_tolerance: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Projector {
    /// Right singular vectors, contexts x k.
    Svd { basis: DenseTensor },
    /// Factor H (k x contexts), the scale applied to inputs before
    /// factorization, and solver settings for projection.
    Nmf {
        factor: DenseTensor,
        input_scale: f64,
        max_iters: usize,
        tolerance: f64,
    },
}

/// k-dimensional embeddings of a set of targets plus what is needed to map
/// new raw vectors into the same space. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpace {
    k: usize,
    targets: Vec<String>,
    index: HashMap<String, usize>,
    /// targets x k, row-major.
    embeddings: Vec<f64>,
    projector: Projector,
    singular_values: Vec<f64>,
}

fn to_dmatrix(m: &DenseTensor) -> DMatrix<f64> {
    assert_eq!(m.rank(), 2);
    DMatrix::from_row_slice(m.shape()[0], m.shape()[1], m.data())
}

fn from_dmatrix(m: &DMatrix<f64>) -> DenseTensor {
    let mut data = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        data.extend(m.row(r).iter());
    }
    DenseTensor::new(vec![m.nrows(), m.ncols()], data).expect("non-empty matrix")
}

fn check_rank(core: &DenseTensor, k: usize) -> Result<(usize, usize), ReduceError> {
    if core.rank() != 2 {
        return Err(crate::error::TensorError::RankMismatch {
            op: "reduce",
            expected: "2",
            shape: core.shape().to_vec(),
        }
        .into());
    }
    let (m, n) = (core.shape()[0], core.shape()[1]);
    if k == 0 {
        return Err(ReduceError::ZeroRank);
    }
    if k > m.min(n) {
        return Err(ReduceError::RankTooLarge { k, max: m.min(n) });
    }
    Ok((m, n))
}

fn index_labels(labels: &[String]) -> HashMap<String, usize> {
    labels.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect()
}

/// Truncated SVD of `core` (one row per label). Embeddings are the first
/// `k` columns of `UΣ`, computed as `X V_k`.
pub fn svd_reduce(labels: &[String], core: &DenseTensor, k: usize) -> Result<ReducedSpace, ReduceError> {
    let (m, n) = check_rank(core, k)?;
    assert_eq!(labels.len(), m, "one label per core row");
    let svd = to_dmatrix(core).svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let mut basis = vec![0.0; n * k];
    for (j, &src) in order.iter().take(k).enumerate() {
        let column: Vec<f64> = v_t.row(src).iter().copied().collect();
        let pivot = column
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > column[best].abs() { i } else { best });
        let sign = if column[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, x) in column.iter().enumerate() {
            basis[i * k + j] = sign * x;
        }
    }
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut space = ReducedSpace {
        k,
        targets: labels.to_vec(),
        index: index_labels(labels),
        embeddings: Vec::with_capacity(m * k),
        projector: Projector::Svd {
            basis: DenseTensor::new(vec![n, k], basis)?,
        },
        singular_values,
    };
    for row in core.data().chunks_exact(n) {
        let e = space.project(row)?;
        space.embeddings.extend_from_slice(e.data());
    }
    Ok(space)
}

/// Result of an NMF run.
#[derive(Debug, Clone)]
pub struct NmfOutcome {
    pub space: ReducedSpace,
    /// `‖X − WH‖²_F` on the normalized input: initial value, then one entry
    /// per outer iteration.
    pub objective: Vec<f64>,
    /// Squared Frobenius norm of the normalized input.
    pub input_norm_sq: f64,
    /// False when the iteration cap was hit before the tolerance was met;
    /// the last (and best) iterate is still returned.
    pub converged: bool,
}

/// Non-negative least squares `min_{H ≥ 0} ‖V − WH‖²_F` by projected
/// gradient, starting from `h`. Returns the gradient at the solution and
/// the number of iterations used.
fn nls_subproblem(
    v: &DMatrix<f64>,
    w: &DMatrix<f64>,
    h: &mut DMatrix<f64>,
    tol: f64,
    max_iters: usize,
) -> (DMatrix<f64>, usize) {
    const SIGMA: f64 = 0.01;
    const BETA: f64 = 0.1;
    let wtv = w.transpose() * v;
    let wtw = w.transpose() * w;
    let mut alpha = 1.0;
    let mut grad = &wtw * &*h - &wtv;
    let mut iter = 1;
    while iter <= max_iters {
        grad = &wtw * &*h - &wtv;
        if projected_norm(&grad, h) < tol {
            break;
        }
        let mut decreasing = false;
        let mut previous = h.clone();
        for inner in 0..20 {
            let candidate = (&*h - alpha * &grad).map(|x| x.max(0.0));
            let d = &candidate - &*h;
            let gradd = grad.dot(&d);
            let dqd = (&wtw * &d).dot(&d);
            let sufficient = (1.0 - SIGMA) * gradd + 0.5 * dqd < 0.0;
            if inner == 0 {
                decreasing = !sufficient;
                previous = h.clone();
            }
            if decreasing {
                if sufficient {
                    *h = candidate;
                    break;
                }
                alpha *= BETA;
            } else {
                if !sufficient || previous == candidate {
                    *h = previous;
                    break;
                }
                alpha /= BETA;
                previous = candidate;
                if inner == 19 {
                    *h = previous.clone();
                }
            }
        }
        iter += 1;
    }
    (grad, iter)
}

/// Norm of the gradient restricted to free variables (`h > 0`) and to
/// bound variables whose gradient points into the feasible set.
fn projected_norm(grad: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    grad.iter()
        .zip(h.iter())
        .filter(|(g, x)| **g < 0.0 || **x > 0.0)
        .map(|(g, _)| g * g)
        .sum::<f64>()
        .sqrt()
}

/// Non-negative factorization of the sum-normalized `core`.
pub fn nmf_reduce(
    labels: &[String],
    core: &DenseTensor,
    k: usize,
    config: &NmfConfig,
) -> Result<NmfOutcome, ReduceError> {
    let (m, n) = check_rank(core, k)?;
    assert_eq!(labels.len(), m, "one label per core row");
    if let Some(at) = core.data().iter().position(|&x| x < 0.0) {
        return Err(ReduceError::NegativeInput {
            row: at / n,
            col: at % n,
            value: core.data()[at],
        });
    }
    let sum: f64 = core.data().iter().sum();
    if sum <= 0.0 {
        return Err(ReduceError::ZeroMatrix);
    }
    let input_scale = 1.0 / sum;
    let x = to_dmatrix(core) * input_scale;
    let x_t = x.transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init_scale = (x.mean() / k as f64).sqrt();
    let mut w = DMatrix::from_row_iterator(m, k, (0..m * k).map(|_| rng.random::<f64>() * init_scale));
    let mut h = DMatrix::from_row_iterator(k, n, (0..k * n).map(|_| rng.random::<f64>() * init_scale));

    let objective_of = |w: &DMatrix<f64>, h: &DMatrix<f64>| (&x - w * h).norm_squared();
    let grad_w = &w * (&h * h.transpose()) - &x * h.transpose();
    let grad_h = (w.transpose() * &w) * &h - w.transpose() * &x;
    let init_grad = (grad_w.norm_squared() + grad_h.norm_squared()).sqrt();
    let mut tol_w = config.inner_tolerance * init_grad;
    let mut tol_h = tol_w;

    let mut objective = vec![objective_of(&w, &h)];
    let mut converged = false;
    for _ in 0..config.max_outer_iters {
        let mut w_t = w.transpose();
        let (_, iters_w) = nls_subproblem(&x_t, &h.transpose(), &mut w_t, tol_w, config.inner_max_iters);
        w = w_t.transpose();
        if iters_w == 1 {
            tol_w *= 0.1;
        }
        let (_, iters_h) = nls_subproblem(&x, &w, &mut h, tol_h, config.inner_max_iters);
        if iters_h == 1 {
            tol_h *= 0.1;
        }
        let previous = *objective.last().unwrap();
        let current = objective_of(&w, &h);
        objective.push(current);
        // A stall where both subproblems returned immediately only means
        // their tolerances were too loose; they have just been tightened.
        let stalled = iters_w == 1 && iters_h == 1;
        if current == 0.0 || (!stalled && (previous - current) / previous < config.tolerance) {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "NMF stopped at the iteration cap ({}) before reaching tolerance {}",
            config.max_outer_iters, config.tolerance
        );
    }

    let space = ReducedSpace {
        k,
        targets: labels.to_vec(),
        index: index_labels(labels),
        embeddings: from_dmatrix(&w).into_data(),
        projector: Projector::Nmf {
            factor: from_dmatrix(&h),
            input_scale,
            max_iters: config.inner_max_iters,
            tolerance: config.projection_tolerance,
        },
        singular_values: Vec::new(),
    };
    Ok(NmfOutcome {
        space,
        objective,
        input_norm_sq: x.norm_squared(),
        converged,
    })
}

impl ReducedSpace {
    pub fn method(&self) -> ReductionMethod {
        match self.projector {
            Projector::Svd { .. } => ReductionMethod::Svd,
            Projector::Nmf { .. } => ReductionMethod::Nmf,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of raw context dimensions the projector expects.
    pub fn context_dim(&self) -> usize {
        match &self.projector {
            Projector::Svd { basis } => basis.shape()[0],
            Projector::Nmf { factor, .. } => factor.shape()[1],
        }
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    /// Singular values in non-increasing order (SVD only; empty for NMF).
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn embedding(&self, target: &str) -> Option<DenseTensor> {
        self.index.get(target).map(|&i| self.row(i))
    }

    pub fn row(&self, i: usize) -> DenseTensor {
        DenseTensor::vector(&self.embeddings[i * self.k..(i + 1) * self.k])
    }

    pub fn embeddings(&self) -> DenseTensor {
        DenseTensor::new(vec![self.targets.len(), self.k], self.embeddings.clone()).expect("non-empty space")
    }

    /// The projector matrix: `V_k` (contexts x k) for SVD, `H` (k x contexts) for NMF.
    pub fn projector(&self) -> &DenseTensor {
        match &self.projector {
            Projector::Svd { basis } => basis,
            Projector::Nmf { factor, .. } => factor,
        }
    }

    /// Maps a raw context-space vector into the reduced space: `raw · V_k`
    /// for SVD, and for NMF the non-negative `w` minimizing
    /// `‖s·raw − wH‖₂` where `s` is the factorization's input scale.
    pub fn project(&self, raw: &[f64]) -> Result<DenseTensor, ReduceError> {
        if raw.len() != self.context_dim() {
            return Err(ReduceError::DimensionMismatch {
                expected: self.context_dim(),
                actual: raw.len(),
            });
        }
        match &self.projector {
            Projector::Svd { basis } => {
                let k = self.k;
                let mut out = vec![0.0; k];
                for (x, row) in raw.iter().zip(basis.data().chunks_exact(k)) {
                    if *x != 0.0 {
                        for (o, b) in out.iter_mut().zip(row) {
                            *o += x * b;
                        }
                    }
                }
                Ok(DenseTensor::vector(&out))
            }
            Projector::Nmf {
                factor,
                input_scale,
                max_iters,
                tolerance,
            } => {
                if raw.iter().all(|&x| x == 0.0) {
                    return Ok(DenseTensor::zeros(vec![self.k])?);
                }
                let v = DMatrix::from_iterator(raw.len(), 1, raw.iter().map(|x| x * input_scale));
                let w = to_dmatrix(factor).transpose();
                let mut h = DMatrix::zeros(self.k, 1);
                let initial = w.transpose() * &v;
                let tol = tolerance * projected_norm(&(-initial), &h);
                nls_subproblem(&v, &w, &mut h, tol, *max_iters);
                Ok(DenseTensor::vector(h.as_slice()))
            }
        }
    }

    /// Appends projected rows (e.g. phrase tokens). Labels already present
    /// are replaced.
    pub fn extend_projected<'a, I>(&mut self, rows: I) -> Result<(), ReduceError>
    where
        I: IntoIterator<Item = (&'a str, &'a [f64])>,
    {
        for (label, raw) in rows {
            let e = self.project(raw)?;
            match self.index.get(label) {
                Some(&i) => self.embeddings[i * self.k..(i + 1) * self.k].copy_from_slice(e.data()),
                None => {
                    self.index.insert(label.to_string(), self.targets.len());
                    self.targets.push(label.to_string());
                    self.embeddings.extend_from_slice(e.data());
                }
            }
        }
        Ok(())
    }

    /// Cosine of two stored embeddings.
    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (ea, eb) = (self.embedding(a)?, self.embedding(b)?);
        let (na, nb) = (ea.norm(), eb.norm());
        (na > 0.0 && nb > 0.0).then(|| dot(ea.data(), eb.data()) / (na * nb))
    }

    /// Writes `space.tsv` (header), `targets.txt`, `embeddings.bin` and
    /// `projector.bin` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), FormatError> {
        fs::create_dir_all(dir)?;
        let mut header = BufWriter::new(fs::File::create(dir.join("space.tsv"))?);
        writeln!(header, "method\t{}", self.method().as_str())?;
        writeln!(header, "k\t{}", self.k)?;
        writeln!(header, "contexts\t{}", self.context_dim())?;
        writeln!(header, "rows\t{}", self.targets.len())?;
        if let Projector::Nmf {
            input_scale,
            max_iters,
            tolerance,
            ..
        } = &self.projector
        {
            writeln!(header, "input_scale\t{input_scale:?}")?;
            writeln!(header, "projection_max_iters\t{max_iters}")?;
            writeln!(header, "projection_tolerance\t{tolerance:?}")?;
        }
        if !self.singular_values.is_empty() {
            let sv: Vec<String> = self.singular_values.iter().map(|s| format!("{s:?}")).collect();
            writeln!(header, "singular_values\t{}", sv.join(","))?;
        }
        header.flush()?;
        io::write_vocabulary(&dir.join("targets.txt"), &self.targets)?;
        io::save_tensor(&dir.join("embeddings.bin"), &self.embeddings())?;
        io::save_tensor(&dir.join("projector.bin"), self.projector())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, FormatError> {
        let header_path = dir.join("space.tsv");
        let mut fields = HashMap::new();
        for (i, line) in BufReader::new(fs::File::open(&header_path)?).lines().enumerate() {
            let line = line?;
            let (key, value) = line.split_once('\t').ok_or_else(|| FormatError::Parse {
                what: header_path.display().to_string(),
                line: i + 1,
                message: "expected key<TAB>value".into(),
            })?;
            fields.insert(key.to_string(), value.to_string());
        }
        let field = |key: &str| {
            fields
                .get(key)
                .ok_or_else(|| FormatError::Invalid(format!("{}: missing {key} field", header_path.display())))
        };
        let bad = |key: &str| FormatError::Invalid(format!("{}: bad {key} field", header_path.display()));
        let method: ReductionMethod = field("method")?.parse().map_err(|_| bad("method"))?;
        let k: usize = field("k")?.parse().map_err(|_| bad("k"))?;
        let targets = io::read_vocabulary(&dir.join("targets.txt"))?;
        let embeddings = io::load_tensor(&dir.join("embeddings.bin"))?;
        let projector = io::load_tensor(&dir.join("projector.bin"))?;
        if embeddings.shape() != [targets.len(), k] {
            return Err(FormatError::Invalid(format!(
                "embeddings shape {:?} does not match {} targets x k={k}",
                embeddings.shape(),
                targets.len()
            )));
        }
        let projector = match method {
            ReductionMethod::Svd => Projector::Svd { basis: projector },
            ReductionMethod::Nmf => Projector::Nmf {
                factor: projector,
                input_scale: field("input_scale")?.parse().map_err(|_| bad("input_scale"))?,
                max_iters: field("projection_max_iters")?
                    .parse()
                    .map_err(|_| bad("projection_max_iters"))?,
                tolerance: field("projection_tolerance")?
                    .parse()
                    .map_err(|_| bad("projection_tolerance"))?,
            },
        };
        let singular_values = match fields.get("singular_values") {
            Some(s) => s
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("singular_values"))?,
            None => Vec::new(),
        };
        Ok(Self {
            k,
            index: index_labels(&targets),
            targets,
            embeddings: embeddings.into_data(),
            projector,
            singular_values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64, nonneg: bool) -> DenseTensor {
        let mut state = seed;
        let data = (0..rows * cols)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                if nonneg {
                    u
                } else {
                    2.0 * u - 1.0
                }
            })
            .collect();
        DenseTensor::new(vec![rows, cols], data).unwrap()
    }

    #[test]
    fn svd_diagonal_example() {
        let x = DenseTensor::matrix(&[[3.0, 0.0], [0.0, 1.0]]);
        let s = svd_reduce(&labels(2), &x, 1).unwrap();
        assert_eq!(s.row(0).data(), &[3.0]);
        assert_eq!(s.row(1).data(), &[0.0]);
        assert_eq!(s.singular_values(), &[3.0, 1.0]);
    }

    #[test]
    fn svd_full_rank_reconstructs() {
        let x = lcg_matrix(6, 4, 7, false);
        let s = svd_reduce(&labels(6), &x, 4).unwrap();
        let recon = to_dmatrix(&s.embeddings()) * to_dmatrix(s.projector()).transpose();
        assert!((recon - to_dmatrix(&x)).abs().max() < 1e-8);
    }

    #[test]
    fn svd_projector_orthonormal_and_sign_fixed() {
        let x = lcg_matrix(8, 10, 3, false);
        let s = svd_reduce(&labels(8), &x, 5).unwrap();
        let v = to_dmatrix(s.projector());
        let gram = v.transpose() * &v;
        assert!((gram - DMatrix::identity(5, 5)).abs().max() < 1e-8);
        for j in 0..5 {
            let col = v.column(j);
            let pivot = col.iamax();
            assert!(col[pivot] > 0.0);
        }
    }

    #[test]
    fn svd_rejects_large_k() {
        let x = lcg_matrix(3, 5, 1, false);
        assert!(matches!(
            svd_reduce(&labels(3), &x, 4),
            Err(ReduceError::RankTooLarge { k: 4, max: 3 })
        ));
        assert!(matches!(svd_reduce(&labels(3), &x, 0), Err(ReduceError::ZeroRank)));
    }

    #[test]
    fn svd_projection_of_core_row_and_zero() {
        let x = lcg_matrix(7, 9, 11, false);
        let s = svd_reduce(&labels(7), &x, 3).unwrap();
        let row = &x.data()[9 * 2..9 * 3];
        assert!(s.project(row).unwrap().max_abs_diff(&s.row(2)).unwrap() < 1e-8);
        let zero = s.project(&[0.0; 9]).unwrap();
        assert!(zero.data().iter().all(|&v| v == 0.0));
        assert!(matches!(
            s.project(&[1.0; 8]),
            Err(ReduceError::DimensionMismatch { expected: 9, actual: 8 })
        ));
    }

    #[test]
    fn nmf_rank_one_outer_product() {
        let u = [1.0, 2.0, 0.5, 3.0];
        let v = [0.2, 1.0, 4.0];
        let rows: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
        let x = DenseTensor::matrix(&rows);
        let cfg = NmfConfig {
            tolerance: 1e-14,
            max_outer_iters: 500,
            ..NmfConfig::default()
        };
        let out = nmf_reduce(&labels(4), &x, 1, &cfg).unwrap();
        assert!(*out.objective.last().unwrap() <= 1e-10 * out.input_norm_sq);
    }

    #[test]
    fn nmf_rejects_negative_input() {
        let x = DenseTensor::matrix(&[[1.0, 0.0], [0.0, -2.0]]);
        match nmf_reduce(&labels(2), &x, 1, &NmfConfig::default()) {
            Err(ReduceError::NegativeInput { row: 1, col: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nmf_outputs_non_negative_and_monotone() {
        let x = lcg_matrix(12, 9, 5, true);
        let out = nmf_reduce(&labels(12), &x, 3, &NmfConfig::default()).unwrap();
        assert!(!out.space.embeddings().has_negative());
        assert!(!out.space.projector().has_negative());
        for pair in out.objective.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
        }
        let p = out.space.project(&x.data()[..9]).unwrap();
        assert!(!p.has_negative());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let x = lcg_matrix(6, 5, 9, true);
        let svd = svd_reduce(&labels(6), &x, 2).unwrap();
        svd.save(&dir.path().join("svd")).unwrap();
        assert_eq!(ReducedSpace::load(&dir.path().join("svd")).unwrap(), svd);
        let nmf = nmf_reduce(&labels(6), &x, 2, &NmfConfig::default()).unwrap().space;
        nmf.save(&dir.path().join("nmf")).unwrap();
        assert_eq!(ReducedSpace::load(&dir.path().join("nmf")).unwrap(), nmf);
    }
}
