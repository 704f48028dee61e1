//! Unsupervised variant clustering.
//!
//! For every clean word `w` (processed in descending corpus frequency):
//!
//! 1. candidates `A(w)`: corpus words whose bigram LCS ratio with `w`
//!    exceeds `alpha`, excluding `w` itself;
//! 2. a threshold `beta`: the BLCSR-weighted mean of pairwise embedding
//!    cosines over the candidates;
//! 3. a graph linking candidates whose cosine exceeds `beta`, weighted by
//!    cosine times averaged document co-occurrence;
//! 4. Louvain communities, of which the one holding the candidate closest
//!    to `w` in edit distance becomes `w`'s cluster.
//!
//! Per-word clusters are then merged into disjoint clusters and every
//! member is rewritten to its cluster's canonical word.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{CooccurrenceIndex, Corpus};
use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{louvain, Partition, VariantGraph};
use crate::normmap::{NormalizationMap, VariantCluster};
use crate::simstring::{bigrams, blcsr, edit_distance, lcs_of, MemoMetric};

/// Where the clean (canonical) words come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CleanLexiconSource {
    /// Corpus words occurring at least `threshold` times.
    CorpusFrequency { threshold: usize },
    /// An external list of correctly spelled words; only those present in
    /// the corpus are used.
    WordList(BTreeSet<String>),
    /// Explicit query words, used whether or not they occur in the corpus.
    Queries(Vec<String>),
}

impl Default for CleanLexiconSource {
    fn default() -> Self {
        CleanLexiconSource::CorpusFrequency { threshold: 100 }
    }
}

impl CleanLexiconSource {
    /// Clean words in processing order: descending corpus frequency, ties
    /// lexicographic.
    pub fn resolve(&self, corpus: &Corpus) -> Vec<String> {
        let mut words: Vec<String> = match self {
            CleanLexiconSource::CorpusFrequency { threshold } => corpus
                .lexicon()
                .iter()
                .filter(|(_, &c)| c >= *threshold)
                .map(|(w, _)| w.clone())
                .collect(),
            CleanLexiconSource::WordList(list) => list
                .iter()
                .filter(|w| corpus.contains(w))
                .cloned()
                .collect(),
            CleanLexiconSource::Queries(q) => {
                let set: BTreeSet<&String> = q.iter().filter(|w| !w.is_empty()).collect();
                set.into_iter().cloned().collect()
            }
        };
        words.sort_by(|a, b| {
            corpus
                .frequency(b)
                .cmp(&corpus.frequency(a))
                .then_with(|| a.cmp(b))
        });
        words
    }

    pub fn contains(&self, corpus: &Corpus, word: &str) -> bool {
        match self {
            CleanLexiconSource::CorpusFrequency { threshold } => corpus.frequency(word) >= *threshold,
            CleanLexiconSource::WordList(list) => list.contains(word),
            CleanLexiconSource::Queries(q) => q.iter().any(|w| w == word),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerConfig {
    /// BLCSR threshold for candidate generation, in (0, 1).
    pub alpha: f64,
    pub clean_lexicon: CleanLexiconSource,
    /// Use plain cosine weights when every admitted edge of a graph would
    /// otherwise have zero co-occurrence weight.
    pub cooccurrence_fallback: bool,
    /// Experimental: attach candidates without embeddings to the selected
    /// cluster when they are within edit distance 1 of the clean word.
    pub attach_unembedded: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.56,
            clean_lexicon: CleanLexiconSource::default(),
            cooccurrence_fallback: true,
            attach_unembedded: false,
            seed: 1,
            workers: 1,
        }
    }
}

impl NormalizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stream-specific seed derived from a base seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct IndexedWord {
    word: String,
    len: usize,
    /// Sorted bigrams, used as a multiset for a cheap BLCS upper bound.
    bigrams: Vec<(char, char)>,
    sequence: Vec<(char, char)>,
}

/// Lexicon prepared for repeated BLCSR candidate queries.
pub struct CandidateIndex {
    by_len: BTreeMap<usize, Vec<IndexedWord>>,
}

fn multiset_overlap(a: &[(char, char)], b: &[(char, char)]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl CandidateIndex {
    pub fn new<S: AsRef<str>>(lexicon: impl IntoIterator<Item = S>) -> Self {
        let mut by_len: BTreeMap<usize, Vec<IndexedWord>> = BTreeMap::new();
        for w in lexicon {
            let w = w.as_ref();
            let sequence = bigrams(w);
            let mut sorted = sequence.clone();
            sorted.sort_unstable();
            let len = w.chars().count();
            by_len.entry(len).or_default().push(IndexedWord {
                word: w.to_owned(),
                len,
                bigrams: sorted,
                sequence,
            });
        }
        Self { by_len }
    }

    /// All indexed words with `blcsr(word, w) > alpha`, excluding `w`.
    pub fn candidates(&self, w: &str, alpha: f64) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let w_len = w.chars().count();
        if w_len < 2 {
            // Only an identical word can score above zero, and it is excluded.
            return out;
        }
        let w_seq = bigrams(w);
        let mut w_sorted = w_seq.clone();
        w_sorted.sort_unstable();
        for (&len, words) in self.by_len.range(2..) {
            let max_len = len.max(w_len);
            let need = alpha * (max_len as f64 - 1.0);
            // BLCS is at most the shorter bigram sequence.
            if (len.min(w_len) - 1) as f64 <= need {
                continue;
            }
            for iw in words {
                debug_assert_eq!(iw.len, len);
                if iw.word == w || (multiset_overlap(&iw.bigrams, &w_sorted) as f64) <= need {
                    continue;
                }
                if lcs_of(&iw.sequence, &w_seq) as f64 > need {
                    out.insert(iw.word.clone());
                }
            }
        }
        out
    }
}

/// Candidate variants of `w`: lexicon words with BLCSR strictly above
/// `alpha`, without `w` itself.
pub fn candidate_set<S: AsRef<str>>(w: &str, lexicon: &[S], alpha: f64) -> BTreeSet<String> {
    lexicon
        .iter()
        .map(AsRef::as_ref)
        .filter(|&l| l != w && blcsr(l, w) > alpha)
        .map(str::to_owned)
        .collect()
}

/// BLCSR-weighted mean of pairwise cosines over the embedded candidates.
///
/// Fails with [`Error::DegenerateCandidateSet`] when fewer than two
/// candidates have embeddings. A zero total weight yields 0.
pub fn beta_threshold<S: AsRef<str>>(candidates: &[S], model: &EmbeddingModel) -> Result<f64> {
    beta_with(candidates, model, &|a, b| blcsr(a, b))
}

fn beta_with<S: AsRef<str>>(
    candidates: &[S],
    model: &EmbeddingModel,
    lexical: &dyn Fn(&str, &str) -> f64,
) -> Result<f64> {
    let embedded: Vec<&str> = candidates
        .iter()
        .map(AsRef::as_ref)
        .filter(|w| model.contains(w))
        .collect();
    if embedded.len() < 2 {
        return Err(Error::DegenerateCandidateSet);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (i, a) in embedded.iter().enumerate() {
        for b in &embedded[i + 1..] {
            let weight = lexical(a, b);
            num += weight * model.cosine(a, b)?;
            den += weight;
        }
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Link embedded candidates whose cosine exceeds `beta`.
///
/// Edge weight is cosine times averaged co-occurrence, floored at 0. With
/// `fallback` set, a graph whose admitted edges all weigh 0 is reweighted
/// by cosine alone.
pub fn build_variant_graph<S: AsRef<str>>(
    candidates: &[S],
    model: &EmbeddingModel,
    cooccurrence: &CooccurrenceIndex,
    beta: f64,
    fallback: bool,
) -> VariantGraph {
    let mut nodes: Vec<&str> = candidates
        .iter()
        .map(AsRef::as_ref)
        .filter(|w| model.contains(w))
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut admitted = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let cos = model.cosine(a, b).expect("nodes are embedded");
            if cos > beta {
                admitted.push((*a, *b, cos));
            }
        }
    }
    let weights: Vec<f64> = admitted
        .iter()
        .map(|&(a, b, cos)| (cos * cooccurrence.averaged(a, b)).max(0.0))
        .collect();
    let use_cosine = fallback && !admitted.is_empty() && weights.iter().all(|&w| w == 0.0);
    let mut g = VariantGraph::new(nodes.iter().copied());
    for (&(a, b, cos), w) in admitted.iter().zip(weights) {
        let w = if use_cosine { cos.max(0.0) } else { w };
        g.add_edge(a, b, w).expect("distinct nodes, finite weight");
    }
    g
}

/// Pick the community holding the member closest to `w` by edit distance.
///
/// Ties go to the smaller community id, then the smaller word. An empty
/// partition yields a cluster with no members besides `w`.
pub fn select_cluster(partition: &Partition, w: &str) -> VariantCluster {
    let best = partition
        .assignments()
        .map(|(node, c)| (edit_distance(node, w), c, node))
        .min();
    let members = match best {
        Some((_, c, _)) => partition
            .assignments()
            .filter(|&(_, cc)| cc == c)
            .map(|(n, _)| n.to_owned())
            .collect(),
        None => BTreeSet::new(),
    };
    VariantCluster {
        canonical: w.to_owned(),
        members,
    }
}

/// Everything computed for one clean word, kept for debugging dumps.
#[derive(Debug, Clone)]
pub struct WordTrace {
    pub word: String,
    pub candidates: BTreeSet<String>,
    pub beta: Option<f64>,
    pub graph: VariantGraph,
    pub partition: Partition,
    pub cluster: VariantCluster,
}

struct Pipeline<'a> {
    corpus: &'a Corpus,
    model: &'a EmbeddingModel,
    config: &'a NormalizerConfig,
    index: CandidateIndex,
    lexical: MemoMetric,
}

impl Pipeline<'_> {
    fn process(&self, rank: usize, w: &str) -> WordTrace {
        let candidates = self.index.candidates(w, self.config.alpha);
        let embedded: Vec<&str> = candidates
            .iter()
            .map(String::as_str)
            .filter(|c| self.model.contains(c))
            .collect();
        let beta = beta_with(&embedded, self.model, &|a, b| self.lexical.get(a, b)).ok();
        let graph = match beta {
            Some(beta) => {
                let cooc = CooccurrenceIndex::build(self.corpus, &embedded);
                build_variant_graph(&embedded, self.model, &cooc, beta, self.config.cooccurrence_fallback)
            }
            // Zero or one embedded candidate: nothing to link.
            None => VariantGraph::new(embedded.iter().copied()),
        };
        let partition = louvain(&graph, derive_seed(self.config.seed, rank as u64));
        let mut cluster = select_cluster(&partition, w);
        if self.config.attach_unembedded && !cluster.members.is_empty() {
            for c in &candidates {
                if !self.model.contains(c) && edit_distance(c, w) <= 1 {
                    cluster.members.insert(c.clone());
                }
            }
        }
        WordTrace {
            word: w.to_owned(),
            candidates,
            beta,
            graph,
            partition,
            cluster,
        }
    }
}

/// Run the full pipeline and keep every per-word intermediate.
pub fn trace_normalization(
    corpus: &Corpus,
    model: &EmbeddingModel,
    config: &NormalizerConfig,
) -> Result<(NormalizationMap, Vec<WordTrace>)> {
    config.validate()?;
    if corpus.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let clean = config.clean_lexicon.resolve(corpus);
    let pipeline = Pipeline {
        corpus,
        model,
        config,
        index: CandidateIndex::new(corpus.lexicon().keys()),
        lexical: MemoMetric::new(blcsr),
    };
    let traces: Vec<WordTrace> = if config.workers <= 1 || clean.len() < 2 {
        clean.iter().enumerate().map(|(r, w)| pipeline.process(r, w)).collect()
    } else {
        let chunk = clean.len().div_ceil(config.workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = clean
                .chunks(chunk)
                .enumerate()
                .map(|(ci, words)| {
                    let pipeline = &pipeline;
                    s.spawn(move || {
                        words
                            .iter()
                            .enumerate()
                            .map(|(i, w)| pipeline.process(ci * chunk + i, w))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("normalizer worker panicked"))
                .collect()
        })
    };
    let map = NormalizationMap::from_proposals(
        traces.iter().map(|t| t.cluster.clone()),
        |w| corpus.frequency(w),
    );
    Ok((map, traces))
}

/// Build the corpus-wide normalization map.
pub fn build_normalization_map(
    corpus: &Corpus,
    model: &EmbeddingModel,
    config: &NormalizerConfig,
) -> Result<NormalizationMap> {
    trace_normalization(corpus, model, config).map(|(map, _)| map)
}

pub fn normalize_tokens<S: AsRef<str>>(tokens: &[S], map: &NormalizationMap) -> Vec<String> {
    map.normalize_tokens(tokens)
}

/// Rewrite every token; document and token counts are preserved.
pub fn normalize_corpus(corpus: &Corpus, map: &NormalizationMap) -> Corpus {
    let docs = corpus
        .documents()
        .iter()
        .map(|d| map.normalize_tokens(&d.tokens))
        .collect();
    Corpus::from_token_docs(docs).expect("source corpus is non-empty")
}
