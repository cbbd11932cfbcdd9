//! Dense multilinear algebra.
//!
//! A [`DenseTensor`] stores its components in row-major order (last index
//! fastest). Function application is modelled as contraction of the *last*
//! index of a tensor with a vector, so a transitive verb tensor of shape
//! `(k, k, k)` is applied as `contract(contract(T, obj), subj)`: the last
//! mode is the object mode, the middle one the subject mode and the first
//! one the output (sentence) mode. Every other module relies on this single
//! convention.

use std::fmt;

use crate::error::TensorError;

/// Rank-r array of `f64` components with an explicit shape.
#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor from a shape and row-major components.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, TensorError> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(TensorError::InvalidShape { shape });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::ComponentCount {
                shape,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self, TensorError> {
        let n = shape.iter().product();
        Self::new(shape, vec![0.0; n])
    }

    /// Rank-1 tensor. Panics on an empty slice.
    pub fn vector(components: &[f64]) -> Self {
        assert!(!components.is_empty(), "vector must have at least one component");
        Self {
            shape: vec![components.len()],
            data: components.to_vec(),
        }
    }

    /// Rank-2 tensor from equally sized rows. Panics on ragged or empty input.
    pub fn matrix<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        assert!(!rows.is_empty(), "matrix must have at least one row");
        let cols = rows[0].as_ref().len();
        assert!(cols > 0, "matrix must have at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self {
            shape: vec![rows.len(), cols],
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            shape: vec![n, n],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Row-major components; this is also the unfolding used for matrix cosine.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.rank(), "index rank mismatch");
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "index {i} out of bounds for dimension {d}");
            acc * d + i
        })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let at = self.offset(index);
        self.data[at] = value;
    }

    /// Frobenius (L2) norm of the unfolded components.
    pub fn norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        check_same_shape("add", self, other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        check_same_shape("sub", self, other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Transpose of a rank-2 tensor.
    pub fn transpose(&self) -> Result<Self, TensorError> {
        if self.rank() != 2 {
            return Err(TensorError::RankMismatch {
                op: "transpose",
                expected: "2",
                shape: self.shape.clone(),
            });
        }
        let (r, c) = (self.shape[0], self.shape[1]);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = self.data[i * c + j];
            }
        }
        Ok(Self {
            shape: vec![c, r],
            data,
        })
    }

    pub fn has_negative(&self) -> bool {
        self.data.iter().any(|&x| x < 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, TensorError> {
        check_same_shape("max_abs_diff", self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseTensor")
            .field("shape", &self.shape)
            .field("data", &self.data)
            .finish()
    }
}

fn check_same_shape(op: &'static str, a: &DenseTensor, b: &DenseTensor) -> Result<(), TensorError> {
    if a.shape != b.shape {
        return Err(TensorError::ShapeMismatch {
            op,
            left: a.shape.clone(),
            right: b.shape.clone(),
        });
    }
    Ok(())
}

fn require_vector(op: &'static str, v: &DenseTensor) -> Result<(), TensorError> {
    if v.rank() != 1 {
        return Err(TensorError::RankMismatch {
            op,
            expected: "1",
            shape: v.shape.clone(),
        });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Contracts the last index of `t` with `v`: `out[i..j] = Σ_k t[i..j][k] v[k]`.
///
/// Applying a rank-(n+1) tensor to n vectors one at a time is curried
/// function application, with the first vector applied being the one that
/// fills the last mode.
pub fn contract(t: &DenseTensor, v: &DenseTensor) -> Result<DenseTensor, TensorError> {
    require_vector("contract", v)?;
    if t.rank() < 2 {
        return Err(TensorError::RankMismatch {
            op: "contract",
            expected: ">= 2",
            shape: t.shape.clone(),
        });
    }
    let inner = *t.shape.last().unwrap();
    if inner != v.len() {
        return Err(TensorError::ShapeMismatch {
            op: "contract",
            left: t.shape.clone(),
            right: v.shape.clone(),
        });
    }
    let data = t
        .data
        .chunks_exact(inner)
        .map(|fiber| dot(fiber, &v.data))
        .collect();
    Ok(DenseTensor {
        shape: t.shape[..t.rank() - 1].to_vec(),
        data,
    })
}

/// Outer product of two vectors: `out[i][j] = u[i] v[j]`.
pub fn kronecker(u: &DenseTensor, v: &DenseTensor) -> Result<DenseTensor, TensorError> {
    require_vector("kronecker", u)?;
    require_vector("kronecker", v)?;
    let mut data = Vec::with_capacity(u.len() * v.len());
    for &a in &u.data {
        data.extend(v.data.iter().map(|&b| a * b));
    }
    Ok(DenseTensor {
        shape: vec![u.len(), v.len()],
        data,
    })
}

/// Elementwise product of two tensors of identical shape.
pub fn hadamard(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor, TensorError> {
    check_same_shape("hadamard", a, b)?;
    Ok(DenseTensor {
        shape: a.shape.clone(),
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

fn unfolded_cosine(op: &'static str, a: &DenseTensor, b: &DenseTensor) -> Result<f64, TensorError> {
    check_same_shape(op, a, b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(TensorError::ZeroNorm { op });
    }
    Ok((dot(&a.data, &b.data) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn cosine(u: &DenseTensor, v: &DenseTensor) -> Result<f64, TensorError> {
    require_vector("cosine", u)?;
    require_vector("cosine", v)?;
    unfolded_cosine("cosine", u, v)
}

/// Frobenius inner product of the normalised matrices, i.e. the cosine of
/// their row-major unfoldings.
pub fn frobenius_cosine(a: &DenseTensor, b: &DenseTensor) -> Result<f64, TensorError> {
    for m in [a, b] {
        if m.rank() != 2 {
            return Err(TensorError::RankMismatch {
                op: "frobenius_cosine",
                expected: "2",
                shape: m.shape.clone(),
            });
        }
    }
    unfolded_cosine("frobenius_cosine", a, b)
}

pub fn l2_normalize(v: &DenseTensor) -> Result<DenseTensor, TensorError> {
    require_vector("l2_normalize", v)?;
    let n = v.norm();
    if n == 0.0 {
        return Err(TensorError::ZeroNorm { op: "l2_normalize" });
    }
    Ok(v.scale(1.0 / n))
}
