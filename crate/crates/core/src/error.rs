use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("invalid tensor shape {shape:?}: rank must be >= 1 and every dimension >= 1")]
    InvalidShape { shape: Vec<usize> },
    #[error("shape {shape:?} needs {expected} components, got {actual}")]
    ComponentCount {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op}: expected rank {expected}, got shape {shape:?}")]
    RankMismatch {
        op: &'static str,
        expected: &'static str,
        shape: Vec<usize>,
    },
    #[error("{op}: similarity undefined for a zero-norm input")]
    ZeroNorm { op: &'static str },
}

/// Errors reading or writing on-disk formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{what}: bad magic header")]
    BadMagic { what: String },
    #[error("{what}: line {line}: {message}")]
    Parse {
        what: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("duplicate {list} entry {token:?}")]
    Duplicate { list: &'static str, token: String },
    #[error("context {0:?} is in the stoplist")]
    StopwordContext(String),
    #[error("matrix total is zero; weighting is undefined")]
    ZeroTotal,
    #[error("matrices have different column vocabularies")]
    ColumnMismatch,
    #[error("corpus read failed: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("k = {k} exceeds min(rows, cols) = {max}")]
    RankTooLarge { k: usize, max: usize },
    #[error("k must be at least 1")]
    ZeroRank,
    #[error("negative input at row {row}, column {col} (value {value}); NMF needs a non-negative matrix")]
    NegativeInput { row: usize, col: usize, value: f64 },
    #[error("input matrix sums to zero")]
    ZeroMatrix,
    #[error("raw vector has {actual} context dimensions, space expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("design has {x_rows} rows but responses have {y_rows}")]
    RowMismatch { x_rows: usize, y_rows: usize },
    #[error("singular system at lambda = 0; use lambda > 0")]
    Singular,
    #[error("negative lambda {0}")]
    NegativeLambda(f64),
    #[error("empty lambda grid")]
    EmptyGrid,
    #[error("every lambda on the grid leaves tr(I - H) = 0 (over-parameterised problem)")]
    OverParameterized,
    #[error("{what}: insufficient data ({count} examples, need {required})")]
    InsufficientData {
        what: String,
        count: usize,
        required: usize,
    },
    #[error("stage {stage}: no regression had enough examples")]
    StageFailure { stage: usize },
    #[error("observation tuple {0:?} appears more than once")]
    DuplicateTuple(Vec<String>),
    #[error("observation tuple {tuple:?} has length {len}, expected arity {arity}")]
    TupleArity {
        tuple: Vec<String>,
        len: usize,
        arity: usize,
    },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("out-of-vocabulary lemma {0:?}")]
    OutOfVocabulary(String),
    #[error("Kronecker needs a transitive sentence; for intransitive input it reduces to Multiply")]
    KroneckerIntransitive,
    #[error("no trained model for verb {verb:?} with arity {arity}")]
    MissingModel { verb: String, arity: usize },
    #[error("model for {verb:?} has arity {model}, sentence needs {sentence}")]
    ArityMismatch {
        verb: String,
        model: usize,
        sentence: usize,
    },
    #[error("incomparable representations: shapes {left:?} and {right:?}")]
    Incomparable { left: Vec<usize>, right: Vec<usize> },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("sequences have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 data points, got {0}")]
    TooFewPoints(usize),
    #[error("correlation undefined for a constant sequence")]
    ConstantInput,
    #[error("human ceiling needs at least 2 participants, got {0}")]
    SingleParticipant(usize),
    #[error("{path}: row {row}: {message}")]
    Dataset {
        path: String,
        row: usize,
        message: String,
    },
    #[error("no data points left after skipping out-of-vocabulary pairs")]
    NothingScored,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("k must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("unknown verb {0:?}")]
    UnknownVerb(String),
    #[error("requested {requested} observations but only {available} distinct argument tuples exist")]
    TooManyObservations { requested: usize, available: usize },
    #[error("verb arity must be 1 or 2, got {0}")]
    Arity(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}
