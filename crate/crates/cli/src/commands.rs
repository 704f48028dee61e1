use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde_json::json;
use varnorm::baselines::{enelvo_normalize, ghosh_normalize, sridhar_normalize, BaselineConfig};
use varnorm::evalkit::{evaluate, inject_noise, GoldMap, NoiseKind, NoiseModel, SyntheticConfig, SyntheticCorpus};
use varnorm::unsupclean::{normalize_corpus, trace_normalization, CleanLexiconSource, NormalizerConfig};
use varnorm::{train_skipgram, Corpus, EmbeddingModel, NormalizationMap, TokenizeConfig, TrainConfig};

use crate::args::*;
use crate::manifest::{sidecar, RunManifest};
use crate::Failure;

type Outcome = Result<(), Failure>;

struct Progress {
    quiet: bool,
}

impl Progress {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn run(cli: Cli, args: &[String]) -> Outcome {
    let progress = Progress { quiet: cli.quiet };
    match cli.command {
        Command::Train(cmd) => train(cmd, args, &progress),
        Command::Normalize(cmd) => normalize(cmd, args, &progress),
        Command::Inject(cmd) => inject(cmd, args, &progress),
        Command::Eval(cmd) => eval(cmd),
        Command::Synth(cmd) => synth(cmd, args, &progress),
        Command::Replay(cmd) => replay(cmd, cli.quiet),
    }
}

fn load_corpus(input: &CorpusArgs, progress: &Progress) -> Result<Corpus, Failure> {
    let cfg = TokenizeConfig {
        keep_hash: input.keep_hash,
        keep_at: input.keep_at,
    };
    let corpus = if input.corpus.is_dir() {
        Corpus::from_dir(&input.corpus, &cfg)?
    } else {
        Corpus::from_lines_file(&input.corpus, &cfg)?
    };
    progress.say(format!(
        "read {} documents, {} tokens, {} distinct words from {}",
        corpus.doc_count(),
        corpus.token_count(),
        corpus.lexicon().len(),
        input.corpus.display()
    ));
    Ok(corpus)
}

fn train_config(train: &TrainArgs, run: &RunArgs) -> TrainConfig {
    TrainConfig {
        window: train.window,
        dim: train.dim,
        negative: train.negative,
        epochs: train.epochs,
        initial_lr: train.lr,
        min_count: train.min_count,
        sample: train.sample,
        seed: run.seed,
        workers: run.workers as usize,
    }
}

fn train(cmd: TrainCmd, args: &[String], progress: &Progress) -> Outcome {
    let start = Instant::now();
    let corpus = load_corpus(&cmd.input, progress)?;
    let cfg = train_config(&cmd.train, &cmd.run);
    cfg.validate()?;
    let model = train_skipgram(&corpus, &cfg)?;
    model.save_word2vec_text(&cmd.output)?;
    progress.say(format!("wrote {} vectors of dimension {} to {}", model.len(), model.dim(), cmd.output.display()));

    let mut manifest = RunManifest::new("train", args, json!({ "train": cfg, "input": cmd.input }));
    manifest.seed = Some(cmd.run.seed);
    manifest.inputs.push(cmd.input.corpus.clone());
    manifest.outputs.push(cmd.output.clone());
    manifest.finish(start.elapsed(), &sidecar(&cmd.output))?;
    Ok(())
}

fn read_word_list(path: &Path) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::Error::from(e).context(path.display().to_string()))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

fn clean_lexicon(cmd: &NormalizeCmd) -> Result<CleanLexiconSource, Failure> {
    Ok(match (&cmd.queries, &cmd.clean_words, cmd.freq_threshold) {
        (Some(q), _, _) => CleanLexiconSource::Queries(read_word_list(q)?),
        (_, Some(list), _) => CleanLexiconSource::WordList(read_word_list(list)?.into_iter().collect()),
        (_, _, Some(threshold)) => CleanLexiconSource::CorpusFrequency { threshold },
        _ => CleanLexiconSource::default(),
    })
}

fn embeddings(cmd: &NormalizeCmd, corpus: &Corpus, progress: &Progress) -> Result<(EmbeddingModel, Option<PathBuf>), Failure> {
    if let Some(path) = &cmd.embeddings {
        let model = EmbeddingModel::load_word2vec_text(path)?;
        progress.say(format!("loaded {} vectors from {}", model.len(), path.display()));
        return Ok((model, None));
    }
    let cfg = train_config(&cmd.train, &cmd.run);
    cfg.validate()?;
    progress.say(format!("training {}-dimensional vectors", cfg.dim));
    let model = train_skipgram(corpus, &cfg)?;
    let path = cmd.out_dir.join("vectors.vec");
    model.save_word2vec_text(&path)?;
    Ok((model, Some(path)))
}

fn normalize(cmd: NormalizeCmd, args: &[String], progress: &Progress) -> Outcome {
    let start = Instant::now();
    if cmd.dump_graphs && cmd.algo != Algorithm::Unsupclean {
        return Err(Failure::Usage("--dump-graphs only applies to --algo unsupclean".into()));
    }
    let corpus = load_corpus(&cmd.input, progress)?;
    fs::create_dir_all(&cmd.out_dir).with_context(|| format!("creating {}", cmd.out_dir.display()))?;
    let lexicon = clean_lexicon(&cmd)?;
    let mut inputs = vec![cmd.input.corpus.clone()];
    inputs.extend(cmd.queries.iter().chain(&cmd.clean_words).chain(&cmd.embeddings).cloned());
    let mut outputs = Vec::new();

    let baseline = BaselineConfig {
        k: cmd.k,
        n: cmd.n,
        alpha: cmd.alpha.unwrap_or(0.7),
        beta_fraction: cmd.beta,
        gamma: cmd.gamma,
        clean_lexicon: lexicon.clone(),
    };
    let (map, config) = match cmd.algo {
        Algorithm::Unsupclean => {
            let cfg = NormalizerConfig {
                alpha: cmd.alpha.unwrap_or(NormalizerConfig::default().alpha),
                clean_lexicon: lexicon,
                seed: cmd.run.seed,
                workers: cmd.run.workers as usize,
                ..Default::default()
            };
            cfg.validate()?;
            let (model, trained) = embeddings(&cmd, &corpus, progress)?;
            outputs.extend(trained);
            let (map, traces) = trace_normalization(&corpus, &model, &cfg)?;
            if cmd.dump_graphs {
                let dir = cmd.out_dir.join("graphs");
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for t in &traces {
                    let path = dir.join(format!("{}.edges", t.word));
                    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    let mut out = BufWriter::new(file);
                    t.graph
                        .write_edge_list(&mut out)
                        .and_then(|_| out.flush())
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                outputs.push(dir);
            }
            (map, json!({ "normalizer": cfg, "train": train_config(&cmd.train, &cmd.run) }))
        }
        Algorithm::Ghosh => {
            baseline.validate()?;
            (ghosh_normalize(&corpus, &baseline)?, json!({ "baseline": baseline }))
        }
        Algorithm::Sridhar | Algorithm::Enelvo => {
            baseline.validate()?;
            let (model, trained) = embeddings(&cmd, &corpus, progress)?;
            outputs.extend(trained);
            let map = if cmd.algo == Algorithm::Sridhar {
                sridhar_normalize(&corpus, &model, &baseline)?
            } else {
                enelvo_normalize(&corpus, &model, &baseline)?
            };
            (map, json!({ "baseline": baseline, "train": train_config(&cmd.train, &cmd.run) }))
        }
    };
    progress.say(format!(
        "{} clusters, {} words rewritten",
        map.clusters().len(),
        map.changed_count()
    ));

    let map_path = cmd.out_dir.join("map.tsv");
    let clusters_path = cmd.out_dir.join("clusters.json");
    let corpus_path = cmd.out_dir.join("normalized.txt");
    map.save_tsv(&map_path)?;
    map.save_clusters_json(&clusters_path)?;
    normalize_corpus(&corpus, &map).write_lines(&corpus_path)?;
    outputs.extend([map_path, clusters_path, corpus_path]);

    let mut manifest = RunManifest::new("normalize", args, json!({ "algorithm": cmd.algo, "input": cmd.input, "settings": config }));
    manifest.algorithm = Some(format!("{:?}", cmd.algo).to_lowercase());
    manifest.seed = Some(cmd.run.seed);
    manifest.inputs = inputs;
    manifest.outputs = outputs;
    manifest.finish(start.elapsed(), &cmd.out_dir.join("manifest.json"))?;
    progress.say(format!("wrote outputs to {}", cmd.out_dir.display()));
    Ok(())
}

fn inject(cmd: InjectCmd, args: &[String], progress: &Progress) -> Outcome {
    let start = Instant::now();
    let corpus = load_corpus(&cmd.input, progress)?;
    let noise = NoiseModel {
        kind: match cmd.kind {
            Noise::Social => NoiseKind::Social,
            Noise::Ocr => NoiseKind::Ocr,
        },
        rate: cmd.rate,
        seed: cmd.seed,
    };
    noise.validate()?;
    let (noisy, gold, stats) = inject_noise(&corpus, &noise)?;
    noisy.write_lines(&cmd.output)?;
    gold.save_tsv(&cmd.gold)?;
    progress.say(format!(
        "corrupted {} of {} tokens ({} collisions with clean words); {} gold variants",
        stats.corrupted,
        stats.tokens,
        stats.collisions,
        gold.variant_count()
    ));

    let mut manifest = RunManifest::new("inject", args, json!({ "noise": noise, "input": cmd.input, "stats": stats }));
    manifest.seed = Some(cmd.seed);
    manifest.inputs.push(cmd.input.corpus.clone());
    manifest.outputs.extend([cmd.output.clone(), cmd.gold.clone()]);
    manifest.finish(start.elapsed(), &sidecar(&cmd.output))?;
    Ok(())
}

fn eval(cmd: EvalCmd) -> Outcome {
    let map = NormalizationMap::load_tsv(&cmd.map)?;
    let gold = GoldMap::load_tsv(&cmd.gold)?;
    let report = evaluate(&map, &gold);
    println!("{}", serde_json::to_string(&report).context("serializing report")?);
    Ok(())
}

fn synth(cmd: SynthCmd, args: &[String], progress: &Progress) -> Outcome {
    let start = Instant::now();
    let cfg = SyntheticConfig {
        n_docs: cmd.docs,
        vocab_size: cmd.vocab_size,
        topics: cmd.topics,
        seed: cmd.seed,
        ..Default::default()
    };
    let synth = SyntheticCorpus::generate(&cfg)?;
    synth.corpus()?.write_lines(&cmd.output)?;
    let mut outputs = vec![cmd.output.clone()];
    if let Some(path) = &cmd.vocabulary {
        let words: BTreeSet<&String> = synth.vocabulary.iter().collect();
        let text: String = words.into_iter().map(|w| format!("{w}\n")).collect();
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        outputs.push(path.clone());
    }
    progress.say(format!("wrote {} documents to {}", synth.documents.len(), cmd.output.display()));
    let mut manifest = RunManifest::new("synth", args, json!({ "synthetic": cfg }));
    manifest.seed = Some(cmd.seed);
    manifest.outputs = outputs;
    manifest.finish(start.elapsed(), &sidecar(&cmd.output))?;
    Ok(())
}

fn replay(cmd: ReplayCmd, quiet: bool) -> Outcome {
    let manifest = RunManifest::load(&cmd.manifest)?;
    if manifest.command == "replay" {
        return Err(Failure::Usage("a replay manifest cannot be replayed".into()));
    }
    let argv = std::iter::once("varnorm".to_owned()).chain(manifest.args.iter().cloned());
    let mut cli = Cli::try_parse_from(argv)
        .map_err(|e| Failure::Data(anyhow::anyhow!("{}: recorded arguments no longer parse: {e}", cmd.manifest.display())))?;
    cli.quiet |= quiet;
    run(cli, &manifest.args)
}
