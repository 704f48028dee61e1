//! Skip-gram word embeddings trained with negative sampling, plus cosine and
//! nearest-neighbour queries and word2vec text-format interchange.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Corpora smaller than this many tokens train with `min_count = 1` unless
/// a value is given explicitly.
pub const SMALL_CORPUS_TOKENS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub window: usize,
    pub dim: usize,
    pub negative: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// `None` picks 1 for small corpora and 5 otherwise.
    pub min_count: Option<usize>,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub sample: Option<f64>,
    pub seed: u64,
    /// More than one worker trains lock-free and is not reproducible.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            window: 3,
            dim: 100,
            negative: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_count: None,
            sample: None,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.min_count == Some(0) {
            return bad("min_count must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be positive");
        }
        Ok(())
    }

    pub fn effective_min_count(&self, token_count: usize) -> usize {
        self.min_count.unwrap_or(if token_count < SMALL_CORPUS_TOKENS {
            1
        } else {
            5
        })
    }
}

/// Dense word vectors with their vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    min_count: usize,
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

impl EmbeddingModel {
    /// Build a model from explicit vectors.
    pub fn from_vectors<S: Into<String>>(entries: Vec<(S, Vec<f32>)>) -> Result<Self> {
        let dim = entries.first().map(|e| e.1.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        let mut words = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len() * dim);
        for (w, v) in entries {
            let w = w.into();
            if v.len() != dim {
                return Err(Error::InvalidConfig(format!(
                    "vector for {w:?} has {} components, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig(format!("vector for {w:?} is not finite")));
            }
            words.push(w);
            vectors.extend(v);
        }
        Self::assemble(dim, words, vectors, 1)
    }

    fn assemble(dim: usize, words: Vec<String>, vectors: Vec<f32>, min_count: usize) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate word {w:?}")));
            }
        }
        let norms = vectors.chunks(dim).map(norm).collect();
        Ok(Self {
            dim,
            words,
            index,
            vectors,
            norms,
            min_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    fn slot(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))
    }

    fn cosine_slots(&self, i: usize, j: usize) -> f64 {
        let (ni, nj) = (self.norms[i], self.norms[j]);
        if ni == 0.0 || nj == 0.0 {
            return 0.0;
        }
        let a = &self.vectors[i * self.dim..(i + 1) * self.dim];
        let b = &self.vectors[j * self.dim..(j + 1) * self.dim];
        let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
        (dot / (ni * nj)).clamp(-1.0, 1.0)
    }

    /// Cosine similarity; a zero vector has similarity 0 with everything.
    pub fn cosine(&self, w1: &str, w2: &str) -> Result<f64> {
        Ok(self.cosine_slots(self.slot(w1)?, self.slot(w2)?))
    }

    /// The `k` most cosine-similar words, excluding `word` itself.
    /// Ties are broken by the lexicographically smaller word.
    pub fn knn(&self, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
        self.knn_where(word, k, |_| true)
    }

    /// Like [`knn`](Self::knn) but only over words accepted by `keep`.
    pub fn knn_where(
        &self,
        word: &str,
        k: usize,
        keep: impl Fn(&str) -> bool,
    ) -> Result<Vec<(String, f64)>> {
        let q = self.slot(word)?;
        let mut scored: Vec<(usize, f64)> = (0..self.words.len())
            .filter(|&i| i != q && keep(&self.words[i]))
            .map(|i| (i, self.cosine_slots(q, i)))
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(i, c)| (self.words[i].clone(), c))
            .collect())
    }

    pub fn save_word2vec_text(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_word2vec_text(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn write_word2vec_text(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.words.len(), self.dim)?;
        for (i, w) in self.words.iter().enumerate() {
            write!(out, "{w}")?;
            for x in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {x:.6}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn load_word2vec_text(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_word2vec_text(&text, path)
    }

    /// Parse word2vec text format; `origin` only labels error messages.
    pub fn parse_word2vec_text(text: &str, origin: &Path) -> Result<Self> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str| s.parse::<usize>().ok();
        let (count, dim) = match head.as_slice() {
            [a, b] => match (parse_usize(a), parse_usize(b)) {
                (Some(c), Some(d)) if d > 0 => (c, d),
                _ => return Err(Error::parse(origin, 1, "header must be \"<vocab_size> <dim>\"")),
            },
            _ => return Err(Error::parse(origin, 1, "header must be \"<vocab_size> <dim>\"")),
        };
        let mut words = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        let mut seen = HashMap::with_capacity(count);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap_or_default();
            let before = vectors.len();
            for f in fields {
                let x: f32 = f
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad number {f:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(origin, lineno, "non-finite component"));
                }
                vectors.push(x);
            }
            let got = vectors.len() - before;
            if got != dim {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("expected {dim} components, found {got}"),
                ));
            }
            if let Some(prev) = seen.insert(word.to_owned(), lineno) {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("duplicate word {word:?} (first on line {prev})"),
                ));
            }
            words.push(word.to_owned());
        }
        if words.len() != count {
            return Err(Error::parse(
                origin,
                1,
                format!("header declares {count} words, file has {}", words.len()),
            ));
        }
        Self::assemble(dim, words, vectors, 1)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln σ(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Gradients of the negative-sampling loss for one (center, context) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Loss `-ln σ(u_o·v) - Σ_k ln σ(-u_k·v)` and its analytic gradients with
/// respect to the center input vector `v`, the context output vector `u_o`
/// and each negative output vector `u_k`.
pub fn sgns_loss_and_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradients {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let s_pos = dot(context, center);
    let mut loss = neg_log_sigmoid(s_pos);
    let g_pos = sigmoid(s_pos) - 1.0;
    let mut grad_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let grad_context = center.iter().map(|v| g_pos * v).collect();
    let mut grad_negs = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let s = dot(neg, center);
        loss += neg_log_sigmoid(-s);
        let g = sigmoid(s);
        for (gc, u) in grad_center.iter_mut().zip(neg.iter()) {
            *gc += g * u;
        }
        grad_negs.push(center.iter().map(|v| g * v).collect());
    }
    SgnsGradients {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negs,
    }
}

/// f32 parameters that several workers may update without locks.
struct SharedMatrix {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl SharedMatrix {
    fn new(rows: usize, dim: usize, mut init: impl FnMut() -> f32) -> Self {
        Self {
            data: (0..rows * dim).map(|_| AtomicU32::new(init().to_bits())).collect(),
            dim,
        }
    }

    fn load_row(&self, row: usize, out: &mut [f64]) {
        let base = row * self.dim;
        for (o, a) in out.iter_mut().zip(&self.data[base..base + self.dim]) {
            *o = f32::from_bits(a.load(Ordering::Relaxed)) as f64;
        }
    }

    fn add_row(&self, row: usize, delta: &[f64], scale: f64) {
        let base = row * self.dim;
        for (a, d) in self.data[base..base + self.dim].iter().zip(delta) {
            let cur = f32::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + (scale * d) as f32).to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect()
    }
}

struct Trainer<'a> {
    config: &'a TrainConfig,
    input: SharedMatrix,
    output: SharedMatrix,
    noise: WeightedIndex<f64>,
    total_steps: f64,
    processed: AtomicU64,
}

impl Trainer<'_> {
    fn lr(&self) -> f64 {
        let done = self.processed.load(Ordering::Relaxed) as f64;
        let lr = self.config.initial_lr * (1.0 - done / (self.total_steps + 1.0));
        lr.max(self.config.initial_lr * 1e-4)
    }

    /// Train one worker's share of sentences for all epochs.
    fn run(&self, sentences: &[Vec<usize>], keep_prob: &[f64], seed: u64) {
        let dim = self.config.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut center = vec![0.0; dim];
        let mut context = vec![0.0; dim];
        let mut negs: Vec<Vec<f64>> = vec![vec![0.0; dim]; self.config.negative];
        let mut neg_ids = Vec::with_capacity(self.config.negative);
        let mut kept = Vec::new();
        for _ in 0..self.config.epochs {
            for sentence in sentences {
                kept.clear();
                for &w in sentence {
                    if keep_prob[w] >= 1.0 || rng.random::<f64>() < keep_prob[w] {
                        kept.push(w);
                    }
                }
                for pos in 0..kept.len() {
                    let lr = self.lr();
                    let c = kept[pos];
                    let lo = pos.saturating_sub(self.config.window);
                    let hi = (pos + self.config.window + 1).min(kept.len());
                    for (ctx_pos, &o) in kept.iter().enumerate().take(hi).skip(lo) {
                        if ctx_pos == pos {
                            continue;
                        }
                        neg_ids.clear();
                        for _ in 0..self.config.negative {
                            let n = self.noise.sample(&mut rng);
                            if n != o {
                                neg_ids.push(n);
                            }
                        }
                        self.input.load_row(c, &mut center);
                        self.output.load_row(o, &mut context);
                        for (buf, &n) in negs.iter_mut().zip(&neg_ids) {
                            self.output.load_row(n, buf);
                        }
                        let neg_refs: Vec<&[f64]> =
                            negs[..neg_ids.len()].iter().map(|v| v.as_slice()).collect();
                        let g = sgns_loss_and_gradients(&center, &context, &neg_refs);
                        self.output.add_row(o, &g.context, -lr);
                        for (n, gn) in neg_ids.iter().zip(&g.negatives) {
                            self.output.add_row(*n, gn, -lr);
                        }
                        self.input.add_row(c, &g.center, -lr);
                    }
                    self.processed.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
    }
}

/// Train skip-gram embeddings with negative sampling on `corpus`.
///
/// With `workers == 1` the result depends only on the corpus and config.
pub fn train_skipgram(corpus: &Corpus, config: &TrainConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    let min_count = config.effective_min_count(corpus.token_count());
    let vocab: Vec<(&str, usize)> = corpus
        .words_by_frequency()
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .documents()
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let total_tokens: usize = sentences.iter().map(Vec::len).sum();

    let keep_prob: Vec<f64> = match config.sample {
        Some(t) if t > 0.0 => vocab
            .iter()
            .map(|&(_, c)| {
                let f = c as f64 / total_tokens as f64;
                ((f / t).sqrt() + 1.0) * (t / f)
            })
            .collect(),
        _ => vec![1.0; vocab.len()],
    };

    let noise = WeightedIndex::new(vocab.iter().map(|&(_, c)| (c as f64).powf(0.75)))
        .map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?;

    let dim = config.dim;
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let input = SharedMatrix::new(vocab.len(), dim, || {
        (init_rng.random::<f32>() - 0.5) / dim as f32
    });
    let output = SharedMatrix::new(vocab.len(), dim, || 0.0);
    let trainer = Trainer {
        config,
        input,
        output,
        noise,
        total_steps: (total_tokens * config.epochs) as f64,
        processed: AtomicU64::new(0),
    };

    if config.workers == 1 {
        trainer.run(&sentences, &keep_prob, config.seed.wrapping_add(1));
    } else {
        let chunk = sentences.len().div_ceil(config.workers).max(1);
        std::thread::scope(|s| {
            for (i, part) in sentences.chunks(chunk).enumerate() {
                let trainer = &trainer;
                let keep_prob = &keep_prob;
                s.spawn(move || trainer.run(part, keep_prob, config.seed.wrapping_add(1 + i as u64)));
            }
        });
    }

    let vectors = trainer.input.into_vec();
    let words = vocab.iter().map(|&(w, _)| w.to_owned()).collect();
    EmbeddingModel::assemble(dim, words, vectors, min_count)
}
