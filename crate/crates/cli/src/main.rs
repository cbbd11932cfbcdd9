use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use compdist::compose::SentenceInput;
use compdist_cli::commands::{self, WorldSpec};
use compdist_cli::{CliError, PipelineConfig};

/// Compositional distributional semantics pipeline.
#[derive(Parser)]
#[command(name = "compdist", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated spaces: raw, svd, nmf.
    #[arg(long, global = true)]
    space: Option<String>,
    /// Comma-separated methods: verb, add, multiply, kronecker, regression.
    #[arg(long, global = true)]
    methods: Option<String>,
    /// Output root.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Count co-occurrences for words and phrases and weight them.
    BuildSpace {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        triples: Option<PathBuf>,
        /// pmi or lmi.
        #[arg(long)]
        weighting: Option<String>,
        /// Only extract phrases for these verbs (comma-separated).
        #[arg(long)]
        verbs: Option<String>,
    },
    /// Reduce the weighted space and project the phrase rows.
    Reduce {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Learn verb tensors from phrase vectors, or from a planted bundle.
    Train {
        #[arg(long)]
        verbs: Option<String>,
        /// Directory written by `synth world`.
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Compose one sentence with each method.
    Compose {
        subject: String,
        verb: String,
        object: Option<String>,
        /// Also report the similarity to the sentence with this verb.
        #[arg(long)]
        landmark: Option<String>,
    },
    /// Correlate model similarities with human ratings.
    Evaluate {
        /// Rating dataset (repeatable); replaces configured datasets.
        #[arg(long = "dataset")]
        datasets: Vec<PathBuf>,
    },
    /// Generate synthetic fixtures.
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Planted verb tensors with noisy observations.
    World {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        nouns: usize,
        /// verb:arity pairs, comma-separated.
        #[arg(long, default_value = "sleep:1,eat:2")]
        verbs: String,
        /// Observations per verb.
        #[arg(long, default_value_t = 60)]
        observations: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Miniature corpus, dependency triples and rating datasets.
    Corpus {
        #[arg(long, default_value_t = 200)]
        sentences: usize,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.global.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    let mut overrides: Vec<(&str, String)> = Vec::new();
    let g = &cli.global;
    if let Some(s) = g.seed {
        overrides.push(("seed", s.to_string()));
    }
    if let Some(s) = &g.space {
        overrides.push(("space", s.clone()));
    }
    if let Some(m) = &g.methods {
        overrides.push(("methods", m.clone()));
    }
    if let Some(o) = &g.out {
        overrides.push(("out", o.display().to_string()));
    }
    match &cli.command {
        Command::BuildSpace {
            corpus,
            triples,
            weighting,
            verbs,
        } => {
            if let Some(c) = corpus {
                overrides.push(("corpus", c.display().to_string()));
            }
            if let Some(t) = triples {
                overrides.push(("triples", t.display().to_string()));
            }
            if let Some(w) = weighting {
                overrides.push(("weighting", w.clone()));
            }
            if let Some(v) = verbs {
                overrides.push(("verbs", v.clone()));
            }
        }
        Command::Reduce { k: Some(k) } => overrides.push(("k", k.to_string())),
        Command::Train { verbs: Some(v), .. } => overrides.push(("verbs", v.clone())),
        Command::Evaluate { datasets } if !datasets.is_empty() => {
            let joined: Vec<String> = datasets.iter().map(|d| d.display().to_string()).collect();
            overrides.push(("datasets", joined.join(",")));
        }
        _ => {}
    }
    for (key, value) in overrides {
        cfg.set(key, &value, Path::new(""))
            .map_err(|e| CliError::Invalid(format!("--{key}: {e}")))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_verbs(spec: &str) -> Result<Vec<(String, usize)>, CliError> {
    spec.split(',')
        .map(|item| {
            let (verb, arity) = item
                .split_once(':')
                .ok_or_else(|| CliError::Invalid(format!("expected verb:arity, got {item:?}")))?;
            let arity = arity
                .parse()
                .map_err(|_| CliError::Invalid(format!("bad arity in {item:?}")))?;
            Ok((verb.trim().to_string(), arity))
        })
        .collect()
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::BuildSpace { .. } => {
            let s = commands::build_space(&cfg)?;
            println!("targets\t{}", s.targets);
            println!("phrases\t{}", s.phrases);
            println!("contexts\t{}", s.contexts);
            println!("nnz\t{}", s.nnz);
            if s.warnings > 0 {
                println!("warnings\t{}", s.warnings);
            }
        }
        Command::Reduce { .. } => {
            for s in commands::reduce(&cfg)? {
                match s.relative_objective {
                    Some(obj) => println!("{}\tk={}\trows={}\tobjective={obj:.6e}", s.space, s.k, s.rows),
                    None => println!("{}\tk={}\trows={}", s.space, s.k, s.rows),
                }
            }
        }
        Command::Train { bundle, .. } => {
            let print = |o: &commands::TrainOutcome| {
                let lambda = o.lambda.map_or("-".to_string(), |l| format!("{l:e}"));
                let mut line = format!("{}\t{}\t{}\t{lambda}", o.verb, o.arity, o.examples);
                if let Some((max_abs, rel)) = o.recovery {
                    line += &format!("\tmax_abs={max_abs:.3e}\trelative={rel:.3e}");
                }
                if let Some(e) = &o.error {
                    line += &format!("\tskipped: {e}");
                }
                println!("{line}");
            };
            match bundle {
                Some(dir) => commands::train_bundle(&cfg, dir)?.iter().for_each(print),
                None => {
                    for (space, outcomes) in commands::train(&cfg)? {
                        println!("# {space}");
                        outcomes.iter().for_each(print);
                    }
                }
            }
        }
        Command::Compose {
            subject,
            verb,
            object,
            landmark,
        } => {
            let sentence = match object {
                Some(o) => SentenceInput::transitive(subject, verb, o),
                None => SentenceInput::intransitive(subject, verb),
            };
            let composed = commands::compose_sentence(&cfg, &sentence, landmark.as_deref())?;
            let json = serde_json::to_string_pretty(&composed).map_err(|e| CliError::Failed(e.to_string()))?;
            println!("{json}");
            if composed.iter().any(|c| c.error.is_some()) {
                return Err(CliError::Partial("some methods could not compose the sentence".into()));
            }
        }
        Command::Evaluate { .. } => {
            let report = commands::evaluate(&cfg)?;
            print!("{}", report.render());
            if report.has_failures() {
                return Err(CliError::Partial("some rows have no valid correlation".into()));
            }
        }
        Command::Synth { what } => match what {
            SynthCommand::World {
                k,
                nouns,
                verbs,
                observations,
                sigma,
            } => {
                let spec = WorldSpec {
                    k: *k,
                    nouns: *nouns,
                    verbs: parse_verbs(verbs)?,
                    observations: *observations,
                    sigma: *sigma,
                };
                let dir = cfg.out.join("world");
                commands::synth_world(&cfg, &spec, &dir)?;
                println!("{}", dir.display());
            }
            SynthCommand::Corpus { sentences } => {
                let dir = cfg.out.join("corpus");
                commands::synth_corpus(&cfg, *sentences, &dir)?;
                println!("{}", dir.display());
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
