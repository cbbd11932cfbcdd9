//! Sentence composition methods and sentence similarity.

use std::collections::BTreeMap;
use std::fmt;

use log::debug;

use crate::error::ComposeError;
use crate::reduce::ReducedSpace;
use crate::regression::ModelStore;
use crate::tensor::{contract, cosine, frobenius_cosine, hadamard, kronecker, l2_normalize, DenseTensor};

/// Word vectors by lemma.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    vectors: BTreeMap<String, DenseTensor>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lemma: &str, vector: DenseTensor) {
        self.vectors.insert(lemma.to_string(), vector);
    }

    pub fn get(&self, lemma: &str) -> Option<&DenseTensor> {
        self.vectors.get(lemma)
    }

    fn lookup(&self, lemma: &str) -> Result<&DenseTensor, ComposeError> {
        self.get(lemma)
            .ok_or_else(|| ComposeError::OutOfVocabulary(lemma.to_string()))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &DenseTensor)> {
        self.vectors.iter()
    }

    pub fn has_negative(&self) -> bool {
        self.vectors.values().any(DenseTensor::has_negative)
    }

    pub fn as_map(&self) -> &BTreeMap<String, DenseTensor> {
        &self.vectors
    }
}

impl FromIterator<(String, DenseTensor)> for Lexicon {
    fn from_iter<I: IntoIterator<Item = (String, DenseTensor)>>(iter: I) -> Self {
        Self {
            vectors: iter.into_iter().collect(),
        }
    }
}

impl From<&ReducedSpace> for Lexicon {
    fn from(space: &ReducedSpace) -> Self {
        space
            .targets()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), space.row(i)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SentenceInput {
    pub subject: String,
    pub verb: String,
    pub object: Option<String>,
}

impl SentenceInput {
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

    pub fn is_transitive(&self) -> bool {
        self.object.is_some()
    }

    pub fn arity(&self) -> usize {
        if self.is_transitive() {
            2
        } else {
            1
        }
    }

    /// The same sentence with subject and object exchanged. Intransitive
    /// sentences are returned unchanged.
    pub fn swapped(&self) -> Self {
        match &self.object {
            None => self.clone(),
            Some(o) => Self {
                subject: o.clone(),
                verb: self.verb.clone(),
                object: Some(self.subject.clone()),
            },
        }
    }

    pub fn with_verb(&self, verb: &str) -> Self {
        Self {
            verb: verb.to_string(),
            ..self.clone()
        }
    }
}

impl fmt::Display for SentenceInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.object {
            None => write!(f, "{} {}", self.subject, self.verb),
            Some(o) => write!(f, "{} {} {}", self.subject, self.verb, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Verb,
    Add,
    Multiply,
    Kronecker,
    Regression,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Verb,
        Method::Add,
        Method::Multiply,
        Method::Kronecker,
        Method::Regression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Verb => "Verb",
            Self::Add => "Add",
            Self::Multiply => "Multiply",
            Self::Kronecker => "Kronecker",
            Self::Regression => "Regression",
        }
    }

    /// Multiplicative methods are only meaningful on non-negative spaces.
    pub fn is_multiplicative(self) -> bool {
        matches!(self, Self::Multiply | Self::Kronecker)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "verb" => Ok(Self::Verb),
            "add" => Ok(Self::Add),
            "multiply" => Ok(Self::Multiply),
            "kronecker" => Ok(Self::Kronecker),
            "regression" => Ok(Self::Regression),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// A composed sentence: a k-vector, or a k x k matrix for transitive
/// Kronecker sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceRep {
    pub method: Method,
    pub value: DenseTensor,
    /// Set by Multiply and Kronecker when an input had negative components.
    pub negative_inputs: bool,
}

impl SentenceRep {
    fn new(method: Method, value: DenseTensor) -> Self {
        Self {
            method,
            value,
            negative_inputs: false,
        }
    }

    pub fn is_matrix(&self) -> bool {
        self.value.rank() == 2
    }
}

pub fn compose_verb(input: &SentenceInput, lexicon: &Lexicon) -> Result<SentenceRep, ComposeError> {
    Ok(SentenceRep::new(Method::Verb, lexicon.lookup(&input.verb)?.clone()))
}

/// Sum of the L2-normalized constituent vectors, `v + (s + o)`; the
/// subject/object sum is formed first so the result is exactly symmetric
/// in the two arguments.
pub fn compose_add(input: &SentenceInput, lexicon: &Lexicon) -> Result<SentenceRep, ComposeError> {
    let verb = l2_normalize(lexicon.lookup(&input.verb)?)?;
    let mut args = l2_normalize(lexicon.lookup(&input.subject)?)?;
    if let Some(o) = &input.object {
        args = args.add(&l2_normalize(lexicon.lookup(o)?)?)?;
    }
    Ok(SentenceRep::new(Method::Add, verb.add(&args)?))
}

/// Componentwise product `v ⊙ (s ⊙ o)`.
pub fn compose_multiply(input: &SentenceInput, lexicon: &Lexicon) -> Result<SentenceRep, ComposeError> {
    let verb = lexicon.lookup(&input.verb)?;
    let mut args = lexicon.lookup(&input.subject)?.clone();
    let mut negative = verb.has_negative() || args.has_negative();
    if let Some(o) = &input.object {
        let o = lexicon.lookup(o)?;
        negative |= o.has_negative();
        args = hadamard(&args, o)?;
    }
    if negative {
        debug!("Multiply on {input}: input vectors contain negative values");
    }
    let mut rep = SentenceRep::new(Method::Multiply, hadamard(verb, &args)?);
    rep.negative_inputs = negative;
    Ok(rep)
}

/// Transitive sentence matrix `(v ⊗ v) ⊙ (subj ⊗ obj)`.
pub fn compose_kronecker(input: &SentenceInput, lexicon: &Lexicon) -> Result<SentenceRep, ComposeError> {
    let object = input.object.as_deref().ok_or(ComposeError::KroneckerIntransitive)?;
    let verb = lexicon.lookup(&input.verb)?;
    let subject = lexicon.lookup(&input.subject)?;
    let object = lexicon.lookup(object)?;
    let negative = verb.has_negative() || subject.has_negative() || object.has_negative();
    if negative {
        debug!("Kronecker on {input}: input vectors contain negative values");
    }
    let value = hadamard(&kronecker(verb, verb)?, &kronecker(subject, object)?)?;
    let mut rep = SentenceRep::new(Method::Kronecker, value);
    rep.negative_inputs = negative;
    Ok(rep)
}

/// The Kronecker construction for an intransitive sentence, taking the
/// object space to be one-dimensional with object `(1)`:
/// `(v ⊗ 1) ⊙ (subj ⊗ 1)`, unfolded to a k-vector. It coincides with
/// Multiply.
pub fn kronecker_intransitive(input: &SentenceInput, lexicon: &Lexicon) -> Result<DenseTensor, ComposeError> {
    let unit = DenseTensor::vector(&[1.0]);
    let verb = lexicon.lookup(&input.verb)?;
    let subject = lexicon.lookup(&input.subject)?;
    let m = hadamard(&kronecker(verb, &unit)?, &kronecker(subject, &unit)?)?;
    Ok(DenseTensor::vector(m.data()))
}

/// Applies the verb's learned tensor: `V × subj`, or `T × obj × subj`.
pub fn compose_regression(
    input: &SentenceInput,
    models: &ModelStore,
    lexicon: &Lexicon,
) -> Result<SentenceRep, ComposeError> {
    let arity = input.arity();
    let model = models.get(&input.verb, arity).ok_or_else(|| ComposeError::MissingModel {
        verb: input.verb.clone(),
        arity,
    })?;
    apply_model(input, &model.tensor, model.arity, lexicon)
}

/// Regression composition with an explicit tensor of the given arity.
pub fn apply_model(
    input: &SentenceInput,
    tensor: &DenseTensor,
    arity: usize,
    lexicon: &Lexicon,
) -> Result<SentenceRep, ComposeError> {
    if arity != input.arity() {
        return Err(ComposeError::ArityMismatch {
            verb: input.verb.clone(),
            model: arity,
            sentence: input.arity(),
        });
    }
    let subject = lexicon.lookup(&input.subject)?;
    let vp = match &input.object {
        None => tensor.clone(),
        Some(o) => contract(tensor, lexicon.lookup(o)?)?,
    };
    Ok(SentenceRep::new(Method::Regression, contract(&vp, subject)?))
}

/// Dispatches to the composer for `method`. `models` is only consulted by
/// Regression.
pub fn compose(
    method: Method,
    input: &SentenceInput,
    lexicon: &Lexicon,
    models: Option<&ModelStore>,
) -> Result<SentenceRep, ComposeError> {
    match method {
        Method::Verb => compose_verb(input, lexicon),
        Method::Add => compose_add(input, lexicon),
        Method::Multiply => compose_multiply(input, lexicon),
        Method::Kronecker => compose_kronecker(input, lexicon),
        Method::Regression => {
            let empty = ModelStore::default();
            compose_regression(input, models.unwrap_or(&empty), lexicon)
        }
    }
}

/// Cosine for vectors, normalized Frobenius inner product for matrices.
pub fn similarity(a: &SentenceRep, b: &SentenceRep) -> Result<f64, ComposeError> {
    if a.value.shape() != b.value.shape() {
        return Err(ComposeError::Incomparable {
            left: a.value.shape().to_vec(),
            right: b.value.shape().to_vec(),
        });
    }
    Ok(match a.value.rank() {
        1 => cosine(&a.value, &b.value)?,
        _ => frobenius_cosine(&a.value, &b.value)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::TrainedModel;

    fn lexicon(entries: &[(&str, &[f64])]) -> Lexicon {
        entries
            .iter()
            .map(|(w, v)| (w.to_string(), DenseTensor::vector(v)))
            .collect()
    }

    fn toy() -> Lexicon {
        lexicon(&[
            ("mom", &[1.0, 0.2, 0.0]),
            ("boy", &[0.3, 1.0, 0.1]),
            ("sing", &[0.5, 0.1, 0.9]),
            ("dance", &[0.4, 0.6, 0.2]),
            ("panda", &[0.9, 0.1, 0.3]),
            ("bamboo", &[0.1, 0.8, 0.4]),
            ("eat", &[0.7, 0.7, 0.1]),
        ])
    }

    #[test]
    fn verb_baseline_is_verb_cosine() {
        let lex = toy();
        let a = compose_verb(&SentenceInput::intransitive("mom", "sing"), &lex).unwrap();
        let b = compose_verb(&SentenceInput::intransitive("boy", "dance"), &lex).unwrap();
        let direct = cosine(lex.get("sing").unwrap(), lex.get("dance").unwrap()).unwrap();
        assert_eq!(similarity(&a, &b).unwrap(), direct);
        let c = compose_verb(&SentenceInput::intransitive("boy", "sing"), &lex).unwrap();
        assert!((similarity(&a, &c).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            compose_verb(&SentenceInput::intransitive("mom", "fly"), &lex),
            Err(ComposeError::OutOfVocabulary(w)) if w == "fly"
        ));
    }

    #[test]
    fn add_examples() {
        let lex = lexicon(&[("s", &[1.0, 0.0]), ("v", &[0.0, 1.0]), ("o", &[3.0, 4.0])]);
        let r = compose_add(&SentenceInput::intransitive("s", "v"), &lex).unwrap();
        assert_eq!(r.value.data(), &[1.0, 1.0]);
        let t = compose_add(&SentenceInput::transitive("s", "v", "o"), &lex).unwrap();
        assert!(t.value.max_abs_diff(&DenseTensor::vector(&[1.6, 1.8])).unwrap() < 1e-15);
        let swapped = compose_add(&SentenceInput::transitive("o", "v", "s"), &lex).unwrap();
        assert_eq!(t, swapped);
    }

    #[test]
    fn multiply_examples() {
        let lex = lexicon(&[("s", &[1.0, 2.0]), ("v", &[3.0, 0.0]), ("one", &[1.0, 1.0]), ("o", &[0.5, 4.0])]);
        let r = compose_multiply(&SentenceInput::intransitive("s", "v"), &lex).unwrap();
        assert_eq!(r.value.data(), &[3.0, 0.0]);
        let id = compose_multiply(&SentenceInput::transitive("s", "one", "o"), &lex).unwrap();
        assert_eq!(id.value, hadamard(lex.get("s").unwrap(), lex.get("o").unwrap()).unwrap());
        let lex = toy();
        let a = compose_multiply(&SentenceInput::transitive("panda", "eat", "bamboo"), &lex).unwrap();
        let b = compose_multiply(&SentenceInput::transitive("bamboo", "eat", "panda"), &lex).unwrap();
        assert_eq!(a, b);
        assert!(!a.negative_inputs);
    }

    #[test]
    fn multiply_flags_negative_inputs() {
        let lex = lexicon(&[("s", &[1.0, -2.0]), ("v", &[3.0, 1.0])]);
        let r = compose_multiply(&SentenceInput::intransitive("s", "v"), &lex).unwrap();
        assert!(r.negative_inputs);
    }

    #[test]
    fn kronecker_examples() {
        let lex = lexicon(&[("v", &[1.0, 2.0]), ("s", &[1.0, 0.0]), ("o", &[0.0, 1.0]), ("z", &[0.0, 0.0])]);
        let r = compose_kronecker(&SentenceInput::transitive("s", "v", "o"), &lex).unwrap();
        assert_eq!(r.value, DenseTensor::matrix(&[[0.0, 2.0], [0.0, 0.0]]));
        let swapped = compose_kronecker(&SentenceInput::transitive("o", "v", "s"), &lex).unwrap();
        assert_eq!(swapped.value, r.value.transpose().unwrap());
        let zero = compose_kronecker(&SentenceInput::transitive("s", "v", "z"), &lex).unwrap();
        assert!(zero.value.data().iter().all(|&x| x == 0.0));
        assert!(matches!(
            compose_kronecker(&SentenceInput::intransitive("s", "v"), &lex),
            Err(ComposeError::KroneckerIntransitive)
        ));
    }

    #[test]
    fn intransitive_kronecker_is_multiply() {
        let lex = toy();
        let input = SentenceInput::intransitive("mom", "sing");
        assert_eq!(
            kronecker_intransitive(&input, &lex).unwrap(),
            compose_multiply(&input, &lex).unwrap().value
        );
    }

    fn store(model: TrainedModel) -> ModelStore {
        let mut s = ModelStore::default();
        s.insert(model);
        s
    }

    #[test]
    fn regression_examples() {
        let lex = toy();
        let identity = TrainedModel {
            verb: "sing".into(),
            arity: 1,
            tensor: DenseTensor::identity(3),
            regressions: vec![],
        };
        let models = store(identity);
        let r = compose_regression(&SentenceInput::intransitive("mom", "sing"), &models, &lex).unwrap();
        assert_eq!(&r.value, lex.get("mom").unwrap());
        assert!(matches!(
            compose_regression(&SentenceInput::transitive("mom", "sing", "boy"), &models, &lex),
            Err(ComposeError::MissingModel { arity: 2, .. })
        ));
        assert!(matches!(
            apply_model(&SentenceInput::transitive("mom", "sing", "boy"), &DenseTensor::identity(3), 1, &lex),
            Err(ComposeError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn regression_basis_tensor() {
        // T[:, :, 0] = M1, T[:, :, 1] = M2.
        let mut t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        let m1 = [[1.0, 2.0], [3.0, 4.0]];
        let m2 = [[5.0, 6.0], [7.0, 8.0]];
        for i in 0..2 {
            for j in 0..2 {
                t.set(&[i, j, 0], m1[i][j]);
                t.set(&[i, j, 1], m2[i][j]);
            }
        }
        let lex = lexicon(&[("s", &[0.0, 1.0]), ("o", &[1.0, 0.0])]);
        let r = apply_model(&SentenceInput::transitive("s", "v", "o"), &t, 2, &lex).unwrap();
        assert_eq!(r.value.data(), &[2.0, 4.0]);
        let swapped = apply_model(&SentenceInput::transitive("o", "v", "s"), &t, 2, &lex).unwrap();
        assert_ne!(swapped.value, r.value);
    }

    #[test]
    fn similarity_rules() {
        let lex = toy();
        let v = compose_add(&SentenceInput::intransitive("mom", "sing"), &lex).unwrap();
        assert!((similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let k = compose_kronecker(&SentenceInput::transitive("panda", "eat", "bamboo"), &lex).unwrap();
        assert!((similarity(&k, &k).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(similarity(&v, &k), Err(ComposeError::Incomparable { .. })));
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("tensor".parse::<Method>().is_err());
    }
}
