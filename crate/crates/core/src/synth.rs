//! Planted-truth fixtures: random verb tensors over random argument
//! vectors, noisy observations of their outputs, and a miniature corpus
//! with dependency triples and rating datasets for end-to-end runs.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`
//! ([`RNG_ALGORITHM`]); observations for the i-th verb (in name order) use
//! stream i + 1 of the same seed. Draw order is part of the fixture format:
//! noun vectors (noun-major, components in order), then verb tensors in
//! name order (row-major components).

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::compose::{Lexicon, SentenceInput};
use crate::error::{FormatError, SynthError};
use crate::eval::{Judgment, DATASET_COLUMNS};
use crate::io;
use crate::regression::TrainedModel;
use crate::space::DependencyTriple;
use crate::tensor::{contract, cosine, hadamard, DenseTensor};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedVerb {
    pub arity: usize,
    /// Rank arity+1, output mode first, last mode applied first.
    pub tensor: DenseTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedWorld {
    pub seed: u64,
    pub k: usize,
    pub sigma: f64,
    /// Noun names in generation order.
    pub nouns: Vec<String>,
    pub lexicon: Lexicon,
    pub verbs: BTreeMap<String, PlantedVerb>,
}

/// Noun vectors are uniform in [0, 1) (non-negative, so usable with
/// multiplicative composers); verb tensors are uniform in [-1, 1).
pub fn gen_world(
    seed: u64,
    k: usize,
    n_nouns: usize,
    verbs_with_arity: &[(&str, usize)],
    sigma: f64,
) -> Result<PlantedWorld, SynthError> {
    if k < 2 {
        return Err(SynthError::DimensionTooSmall(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nouns: Vec<String> = (0..n_nouns).map(|i| format!("noun{i:03}")).collect();
    let mut lexicon = Lexicon::new();
    for noun in &nouns {
        let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        lexicon.insert(noun, DenseTensor::vector(&v));
    }
    let mut sorted: Vec<(&str, usize)> = verbs_with_arity.to_vec();
    sorted.sort();
    let mut verbs = BTreeMap::new();
    for (name, arity) in sorted {
        if !(1..=2).contains(&arity) {
            return Err(SynthError::Arity(arity));
        }
        let shape = vec![k; arity + 1];
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        verbs.insert(
            name.to_string(),
            PlantedVerb {
                arity,
                tensor: DenseTensor::new(shape, data)?,
            },
        );
    }
    Ok(PlantedWorld {
        seed,
        k,
        sigma,
        nouns,
        lexicon,
        verbs,
    })
}

/// A training observation: argument lemmas in application order (object
/// before subject) and the resulting sentence vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub args: Vec<String>,
    pub sentence: DenseTensor,
}

impl PlantedWorld {
    fn verb(&self, verb: &str) -> Result<(usize, &PlantedVerb), SynthError> {
        self.verbs
            .iter()
            .enumerate()
            .find(|(_, (name, _))| name.as_str() == verb)
            .map(|(i, (_, v))| (i, v))
            .ok_or_else(|| SynthError::UnknownVerb(verb.to_string()))
    }

    /// Noiseless output of the planted verb on the given arguments.
    pub fn apply(&self, verb: &str, args: &[String]) -> Result<DenseTensor, SynthError> {
        let (_, planted) = self.verb(verb)?;
        let mut t = planted.tensor.clone();
        for a in args {
            let v = self
                .lexicon
                .get(a)
                .ok_or_else(|| SynthError::UnknownVerb(format!("argument {a}")))?;
            t = contract(&t, v)?;
        }
        Ok(t)
    }
}

/// Draws `n` distinct argument tuples for `verb` and returns their
/// sentence vectors with N(0, σ²) noise added to every component.
pub fn gen_observations(world: &PlantedWorld, verb: &str, n: usize) -> Result<Vec<Observation>, SynthError> {
    let (verb_index, planted) = world.verb(verb)?;
    let n_nouns = world.nouns.len();
    let available = n_nouns.checked_pow(planted.arity as u32).unwrap_or(usize::MAX);
    if n > available {
        return Err(SynthError::TooManyObservations { requested: n, available });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(world.seed);
    rng.set_stream(verb_index as u64 + 1);
    let picks = index::sample(&mut rng, available, n).into_vec();
    let noise = Normal::new(0.0, world.sigma.max(0.0)).expect("finite sigma");
    picks
        .into_iter()
        .map(|mut idx| {
            let mut args = Vec::with_capacity(planted.arity);
            for _ in 0..planted.arity {
                args.push(world.nouns[idx % n_nouns].clone());
                idx /= n_nouns;
            }
            // Most significant digit first: object, then subject.
            args.reverse();
            let mut sentence = world.apply(verb, &args)?;
            if world.sigma > 0.0 {
                for x in sentence.data_mut() {
                    *x += noise.sample(&mut rng);
                }
            }
            Ok(Observation { args, sentence })
        })
        .collect()
}

/// (max-abs error, relative Frobenius error) of a learned model against
/// the planted tensor.
pub fn recovery_error(learned: &TrainedModel, world: &PlantedWorld, verb: &str) -> Result<(f64, f64), SynthError> {
    let (_, planted) = world.verb(verb)?;
    let max_abs = learned.tensor.max_abs_diff(&planted.tensor)?;
    let rel = learned.tensor.sub(&planted.tensor)?.norm() / planted.tensor.norm();
    Ok((max_abs, rel))
}

/// Contents of `world.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldMeta {
    pub rng: String,
    pub seed: u64,
    pub k: usize,
    pub sigma: f64,
    pub nouns: Vec<String>,
    /// verb -> arity
    pub verbs: BTreeMap<String, usize>,
}

/// Writes `world.json`, `nouns.bin` (nouns x k, omitted when there are no
/// nouns), `<verb>.planted.bin` per verb and `<verb>.observations.tsv`
/// (`arg,arg<TAB>space-separated components`) per observed verb.
pub fn save_bundle(
    dir: &Path,
    world: &PlantedWorld,
    observations: &BTreeMap<String, Vec<Observation>>,
) -> Result<(), FormatError> {
    fs::create_dir_all(dir)?;
    let meta = WorldMeta {
        rng: RNG_ALGORITHM.to_string(),
        seed: world.seed,
        k: world.k,
        sigma: world.sigma,
        nouns: world.nouns.clone(),
        verbs: world.verbs.iter().map(|(n, v)| (n.clone(), v.arity)).collect(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| FormatError::Invalid(e.to_string()))?;
    fs::write(dir.join("world.json"), json + "\n")?;
    if !world.nouns.is_empty() {
        let mut data = Vec::with_capacity(world.nouns.len() * world.k);
        for n in &world.nouns {
            data.extend_from_slice(world.lexicon.get(n).expect("noun vector").data());
        }
        io::save_tensor(&dir.join("nouns.bin"), &DenseTensor::new(vec![world.nouns.len(), world.k], data)?)?;
    }
    for (name, v) in &world.verbs {
        io::save_tensor(&dir.join(format!("{name}.planted.bin")), &v.tensor)?;
    }
    for (name, obs) in observations {
        let mut w = BufWriter::new(fs::File::create(dir.join(format!("{name}.observations.tsv")))?);
        for o in obs {
            let comps: Vec<String> = o.sentence.data().iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}\t{}", o.args.join(","), comps.join(" "))?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Reads a bundle written by [`save_bundle`]. Verbs without an
/// observations file map to an empty list.
pub fn load_bundle(dir: &Path) -> Result<(PlantedWorld, BTreeMap<String, Vec<Observation>>), FormatError> {
    let text = fs::read_to_string(dir.join("world.json"))?;
    let meta: WorldMeta = serde_json::from_str(&text).map_err(|e| FormatError::Parse {
        what: "world.json".into(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if meta.rng != RNG_ALGORITHM {
        return Err(FormatError::Invalid(format!("unsupported generator {:?}", meta.rng)));
    }
    let mut lexicon = Lexicon::new();
    if !meta.nouns.is_empty() {
        let m = io::load_tensor(&dir.join("nouns.bin"))?;
        if m.shape() != [meta.nouns.len(), meta.k] {
            return Err(FormatError::Invalid(format!("nouns.bin has shape {:?}", m.shape())));
        }
        for (i, noun) in meta.nouns.iter().enumerate() {
            lexicon.insert(noun, DenseTensor::vector(&m.data()[i * meta.k..(i + 1) * meta.k]));
        }
    }
    let mut verbs = BTreeMap::new();
    let mut observations = BTreeMap::new();
    for (name, &arity) in &meta.verbs {
        let tensor = io::load_tensor(&dir.join(format!("{name}.planted.bin")))?;
        if tensor.shape() != vec![meta.k; arity + 1].as_slice() {
            return Err(FormatError::Invalid(format!("{name}: planted tensor has shape {:?}", tensor.shape())));
        }
        verbs.insert(name.clone(), PlantedVerb { arity, tensor });
        let what = format!("{name}.observations.tsv");
        let path = dir.join(&what);
        let mut obs = Vec::new();
        if path.exists() {
            for (i, line) in fs::read_to_string(&path)?.lines().enumerate() {
                let bad = |message: String| FormatError::Parse {
                    what: what.clone(),
                    line: i + 1,
                    message,
                };
                let (args, comps) = line.split_once('\t').ok_or_else(|| bad("expected two fields".into()))?;
                let args: Vec<String> = args.split(',').map(str::to_string).collect();
                if args.len() != arity {
                    return Err(bad(format!("expected {arity} arguments")));
                }
                let values = comps
                    .split(' ')
                    .map(|c| c.parse::<f64>().map_err(|e| bad(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.len() != meta.k {
                    return Err(bad(format!("expected {} components", meta.k)));
                }
                obs.push(Observation {
                    args,
                    sentence: DenseTensor::vector(&values),
                });
            }
        }
        observations.insert(name.clone(), obs);
    }
    let world = PlantedWorld {
        seed: meta.seed,
        k: meta.k,
        sigma: meta.sigma,
        nouns: meta.nouns,
        lexicon,
        verbs,
    };
    Ok((world, observations))
}

/// Miniature corpus with dependency triples and two rating datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniCorpus {
    pub lines: Vec<String>,
    pub triples: Vec<DependencyTriple>,
    pub intransitive: Vec<Judgment>,
    pub transitive: Vec<Judgment>,
}

const STOP: [&str; 3] = ["the", "a", "of"];
const NOUNS: [&str; 5] = ["dog", "child", "fire", "table", "bird"];
const OBJECTS: [&str; 4] = ["ball", "bone", "song", "result"];
const INTRANSITIVE: [&str; 4] = ["glow", "burn", "sing", "dance"];
const TRANSITIVE: [&str; 3] = ["show", "express", "chase"];
const CONTEXTS: [&str; 16] = [
    "loud", "quiet", "fast", "slow", "bright", "dark", "warm", "cold", "happy", "sad", "green", "red", "big", "small",
    "soft", "hard",
];
const PARTICIPANTS: usize = 4;

/// Generates `n_sentences` sentences (40% intransitive, the rest
/// transitive) cycling systematically through all
/// subject/verb(/object) combinations, each decorated with context words
/// drawn from the constituents' random topic profiles, plus judgments whose
/// ratings follow the generating profiles.
pub fn gen_corpus(seed: u64, n_sentences: usize) -> MiniCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile_of = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        // Sparse-ish topic: a few strong contexts over a weak background.
        (0..CONTEXTS.len())
            .map(|_| {
                let u: f64 = rng.random();
                if u < 0.3 {
                    1.0 + 4.0 * rng.random::<f64>()
                } else {
                    0.1 * rng.random::<f64>()
                }
            })
            .collect()
    };
    let mut profiles: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for w in NOUNS.iter().chain(&OBJECTS).chain(&INTRANSITIVE).chain(&TRANSITIVE) {
        profiles.insert(w, profile_of(&mut rng));
    }

    let intransitive_combos: Vec<(&str, &str)> = INTRANSITIVE
        .iter()
        .flat_map(|v| NOUNS.iter().map(move |s| (*s, *v)))
        .collect();
    let transitive_combos: Vec<(&str, &str, &str)> = TRANSITIVE
        .iter()
        .flat_map(|v| OBJECTS.iter().flat_map(move |o| NOUNS.iter().map(move |s| (*s, *v, *o))))
        .collect();

    let n_intransitive = n_sentences * 2 / 5;
    let mut lines = Vec::with_capacity(n_sentences);
    let mut triples = Vec::with_capacity(n_sentences);
    for i in 0..n_sentences {
        let (subject, verb, object) = if i < n_intransitive {
            let (s, v) = intransitive_combos[i % intransitive_combos.len()];
            (s, v, None)
        } else {
            let (s, v, o) = transitive_combos[(i - n_intransitive) % transitive_combos.len()];
            (s, v, Some(o))
        };
        let constituents: Vec<&str> = [Some(subject), Some(verb), object].into_iter().flatten().collect();
        let mut tokens: Vec<&str> = vec!["the", subject, verb];
        if let Some(o) = object {
            tokens.extend(["the", o]);
        }
        for _ in 0..4 {
            let source = &profiles[constituents[rng.random_range(0..constituents.len())]];
            tokens.push(CONTEXTS[sample_weighted(&mut rng, source)]);
        }
        for filler in ["a", "of"] {
            if rng.random::<f64>() < 0.6 {
                tokens.push(filler);
            }
        }
        lines.push(tokens.join(" "));
        triples.push(DependencyTriple {
            sentence: i,
            subject: subject.to_string(),
            verb: verb.to_string(),
            object: object.map(str::to_string),
        });
    }

    let latent = |sentence: &SentenceInput, landmark: &str| -> f64 {
        // Unknown lemmas get a flat profile.
        let flat = vec![1.0; CONTEXTS.len()];
        let profile = |w: &str| DenseTensor::vector(profiles.get(w).unwrap_or(&flat));
        let mut args = profile(&sentence.subject);
        if let Some(o) = &sentence.object {
            args = hadamard(&args, &profile(o)).expect("same length");
        }
        let a = hadamard(&profile(&sentence.verb), &args).expect("same length");
        let b = hadamard(&profile(landmark), &args).expect("same length");
        cosine(&a, &b).unwrap_or(0.0)
    };
    let rate = |rng: &mut ChaCha8Rng, pairs: &[(SentenceInput, &str)]| -> Vec<Judgment> {
        let mut out = Vec::new();
        for p in 0..PARTICIPANTS {
            for (sentence, landmark) in pairs {
                let noisy = 1.0 + 6.0 * latent(sentence, landmark) + rng.random_range(-1.5..1.5);
                out.push(Judgment {
                    participant: format!("p{}", p + 1),
                    sentence: sentence.clone(),
                    landmark: landmark.to_string(),
                    rating: noisy.round().clamp(1.0, 7.0),
                });
            }
        }
        out
    };
    let landmark_for = |verbs: &[&'static str], v: &str| -> [&'static str; 2] {
        let others: Vec<&'static str> = verbs.iter().copied().filter(|x| *x != v).collect();
        [others[0], others[others.len() - 1]]
    };
    let mut intransitive_pairs = Vec::new();
    for s in NOUNS {
        for v in INTRANSITIVE {
            for lm in landmark_for(&INTRANSITIVE, v).into_iter().take(1) {
                intransitive_pairs.push((SentenceInput::intransitive(s, v), lm));
            }
        }
    }
    let mut transitive_pairs = Vec::new();
    for s in NOUNS.iter().take(3) {
        for v in TRANSITIVE {
            for o in OBJECTS {
                let lm = landmark_for(&TRANSITIVE, v)[(o.len() + s.len()) % 2];
                transitive_pairs.push((SentenceInput::transitive(s, v, o), lm));
            }
        }
    }
    // Out-of-vocabulary pair, exercised by the skip bookkeeping.
    intransitive_pairs.push((SentenceInput::intransitive("unicorn", "sing"), "dance"));
    let intransitive = rate(&mut rng, &intransitive_pairs);
    let transitive = rate(&mut rng, &transitive_pairs);

    MiniCorpus {
        lines,
        triples,
        intransitive,
        transitive,
    }
}

fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn write_dataset(path: &Path, data: &[Judgment]) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", DATASET_COLUMNS.join("\t"))?;
    for j in data {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            j.participant,
            j.sentence.subject,
            j.sentence.verb,
            j.sentence.object.as_deref().unwrap_or("-"),
            j.landmark,
            j.rating
        )?;
    }
    w.flush()
}

impl MiniCorpus {
    /// Writes `corpus.txt`, `triples.tsv`, `intransitive.tsv` and `transitive.tsv`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("corpus.txt"), self.lines.join("\n") + "\n")?;
        let mut w = BufWriter::new(fs::File::create(dir.join("triples.tsv"))?);
        for t in &self.triples {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                t.sentence,
                t.subject,
                t.verb,
                t.object.as_deref().unwrap_or("-")
            )?;
        }
        w.flush()?;
        write_dataset(&dir.join("intransitive.tsv"), &self.intransitive)?;
        write_dataset(&dir.join("transitive.tsv"), &self.transitive)
    }

    pub fn stopwords() -> &'static [&'static str] {
        &STOP
    }
}
