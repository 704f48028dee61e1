//! Synthetic noise with gold variant maps, and cluster-quality scoring.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::normmap::{load_tsv_pairs, save_with, write_tsv, NormalizationMap};
use crate::simstring::blcsr;
use crate::unsupclean::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Character confusions anywhere in the word (o/0, l/1, rn/m, ...).
    Ocr,
    /// Vowel drops, suffix truncation and letter stretching; the first
    /// character is never touched.
    Social,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ocr" => Ok(NoiseKind::Ocr),
            "social" => Ok(NoiseKind::Social),
            other => Err(Error::InvalidConfig(format!("unknown noise kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Per-token corruption probability.
    pub rate: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidConfig(format!(
                "noise rate must lie in [0, 1], got {}",
                self.rate
            )));
        }
        Ok(())
    }
}

/// OCR confusions as (source, replacement) substrings.
pub const OCR_CONFUSIONS: &[(&str, &str)] = &[
    ("o", "0"),
    ("0", "o"),
    ("l", "1"),
    ("1", "l"),
    ("l", "i"),
    ("i", "l"),
    ("rn", "m"),
    ("m", "rn"),
    ("e", "c"),
    ("c", "e"),
];

/// Share of OCR corruptions that substitute a uniformly random letter.
pub const OCR_RANDOM_SHARE: f64 = 0.2;

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

fn social_ops(chars: &[char]) -> Vec<u8> {
    let mut ops = Vec::new();
    if chars.len() >= 3 && chars[1..].iter().any(|c| VOWELS.contains(c)) {
        ops.push(0);
    }
    if chars.len() >= 4 {
        ops.push(1);
    }
    if chars.len() >= 2 {
        ops.push(2);
    }
    ops
}

fn corrupt_social(word: &str, rng: &mut impl Rng) -> Option<String> {
    let mut chars: Vec<char> = word.chars().collect();
    let &op = social_ops(&chars).choose(rng)?;
    match op {
        0 => {
            let positions: Vec<usize> = (1..chars.len()).filter(|&i| VOWELS.contains(&chars[i])).collect();
            let &p = positions.choose(rng)?;
            chars.remove(p);
        }
        1 => {
            let max_cut = 2.min(chars.len() - 3);
            let cut = rng.random_range(1..=max_cut);
            chars.truncate(chars.len() - cut);
        }
        _ => {
            let p = rng.random_range(1..chars.len());
            let extra = rng.random_range(1..=2);
            for _ in 0..extra {
                chars.insert(p, chars[p]);
            }
        }
    }
    Some(chars.into_iter().collect())
}

fn corrupt_ocr(word: &str, rng: &mut impl Rng) -> Option<String> {
    if word.is_empty() {
        return None;
    }
    let sites: Vec<(usize, &str, &str)> = OCR_CONFUSIONS
        .iter()
        .flat_map(|&(from, to)| word.match_indices(from).map(move |(i, _)| (i, from, to)))
        .collect();
    if sites.is_empty() || rng.random_bool(OCR_RANDOM_SHARE) {
        let chars: Vec<char> = word.chars().collect();
        let p = rng.random_range(0..chars.len());
        let mut c = chars[p];
        while c == chars[p] {
            c = rng.random_range(b'a'..=b'z') as char;
        }
        let mut out = chars;
        out[p] = c;
        return Some(out.into_iter().collect());
    }
    let &(i, from, to) = sites.choose(rng)?;
    Some(format!("{}{}{}", &word[..i], to, &word[i + from.len()..]))
}

/// Apply one corruption of `kind` to `word`; `None` if the word is not
/// eligible (too short for any operation).
pub fn corrupt_word(word: &str, kind: NoiseKind, rng: &mut impl Rng) -> Option<String> {
    match kind {
        NoiseKind::Social => corrupt_social(word, rng),
        NoiseKind::Ocr => corrupt_ocr(word, rng),
    }
}

/// Noisy surface form -> original clean word.
///
/// Source words that received at least one variant are recorded as
/// mapping to themselves, so the evaluated word set includes them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldMap {
    map: BTreeMap<String, String>,
}

impl GoldMap {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.map.get(word).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Variant count (rows whose two columns differ).
    pub fn variant_count(&self) -> usize {
        self.map.iter().filter(|(k, v)| k != v).count()
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        save_with(path, |out| write_tsv(&self.map, out))
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        Ok(Self {
            map: load_tsv_pairs(path)?,
        })
    }

    /// Treat a normalization map as gold.
    pub fn from_map(map: &NormalizationMap) -> Self {
        Self {
            map: map.entries().clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionStats {
    pub tokens: usize,
    pub corrupted: usize,
    /// Corrupted tokens whose new form is itself a clean corpus word.
    pub collisions: usize,
}

/// Corrupt each token independently with probability `noise.rate`.
///
/// Decisions and corruption choices come from separate per-document
/// streams derived from `noise.seed`, so the set of corrupted positions
/// only grows with the rate.
pub fn inject_noise(clean: &Corpus, noise: &NoiseModel) -> Result<(Corpus, GoldMap, InjectionStats)> {
    noise.validate()?;
    let vocabulary: BTreeSet<&str> = clean.lexicon().keys().map(String::as_str).collect();
    let mut gold: BTreeMap<String, String> = BTreeMap::new();
    let mut stats = InjectionStats::default();
    let mut docs = Vec::with_capacity(clean.doc_count());
    for doc in clean.documents() {
        let mut decide = ChaCha8Rng::seed_from_u64(derive_seed(noise.seed, 2 * doc.id as u64));
        let mut edit = ChaCha8Rng::seed_from_u64(derive_seed(noise.seed, 2 * doc.id as u64 + 1));
        let mut tokens = Vec::with_capacity(doc.tokens.len());
        for t in &doc.tokens {
            stats.tokens += 1;
            let u: f64 = decide.random();
            let corrupted = if u < noise.rate {
                corrupt_word(t, noise.kind, &mut edit)
            } else {
                None
            };
            match corrupted {
                Some(v) => {
                    stats.corrupted += 1;
                    if vocabulary.contains(v.as_str()) {
                        stats.collisions += 1;
                    } else {
                        gold.entry(v.clone()).or_insert_with(|| t.clone());
                        gold.insert(t.clone(), t.clone());
                    }
                    tokens.push(v);
                }
                None => tokens.push(t.clone()),
            }
        }
        docs.push(tokens);
    }
    Ok((Corpus::from_token_docs(docs)?, GoldMap { map: gold }, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BCubed {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub purity: f64,
    pub n_words: usize,
}

/// (word, predicted label, gold label) over gold keys ∪ predicted keys.
fn labelled<'a>(predicted: &'a NormalizationMap, gold: &'a GoldMap) -> Vec<(&'a str, &'a str, &'a str)> {
    let words: BTreeSet<&str> = gold
        .map
        .keys()
        .chain(predicted.entries().keys())
        .map(String::as_str)
        .collect();
    words
        .into_iter()
        .map(|w| (w, predicted.rewrite(w), gold.get(w).unwrap_or(w)))
        .collect()
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Element-wise B-cubed precision, recall and F1.
pub fn bcubed(predicted: &NormalizationMap, gold: &GoldMap) -> BCubed {
    let rows = labelled(predicted, gold);
    if rows.is_empty() {
        return BCubed {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
    }
    let mut joint: HashMap<(&str, &str), usize> = HashMap::new();
    let mut by_pred: HashMap<&str, usize> = HashMap::new();
    let mut by_gold: HashMap<&str, usize> = HashMap::new();
    for &(_, p, g) in &rows {
        *joint.entry((p, g)).or_default() += 1;
        *by_pred.entry(p).or_default() += 1;
        *by_gold.entry(g).or_default() += 1;
    }
    let n = rows.len() as f64;
    let (mut precision, mut recall) = (0.0, 0.0);
    for &(_, p, g) in &rows {
        let both = joint[&(p, g)] as f64;
        precision += both / by_pred[p] as f64;
        recall += both / by_gold[g] as f64;
    }
    let (precision, recall) = (precision / n, recall / n);
    BCubed {
        precision,
        recall,
        f1: f1(precision, recall),
    }
}

/// Fraction of words whose predicted cluster's majority gold label is their own.
pub fn purity(predicted: &NormalizationMap, gold: &GoldMap) -> f64 {
    let rows = labelled(predicted, gold);
    if rows.is_empty() {
        return 0.0;
    }
    let mut joint: BTreeMap<&str, HashMap<&str, usize>> = BTreeMap::new();
    for &(_, p, g) in &rows {
        *joint.entry(p).or_default().entry(g).or_default() += 1;
    }
    let hits: usize = joint.values().map(|m| m.values().max().copied().unwrap_or(0)).sum();
    hits as f64 / rows.len() as f64
}

pub fn evaluate(predicted: &NormalizationMap, gold: &GoldMap) -> EvalReport {
    let b = bcubed(predicted, gold);
    EvalReport {
        precision: b.precision,
        recall: b.recall,
        f1: b.f1,
        purity: purity(predicted, gold),
        n_words: labelled(predicted, gold).len(),
    }
}

/// Parameters of the synthetic clean corpus generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_docs: usize,
    pub vocab_size: usize,
    /// Share of the vocabulary made of look-alike pairs: two words that
    /// differ only in their first two letters and live in different topics.
    pub paired_fraction: f64,
    pub topics: usize,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
    /// Successors each word prefers inside its topic.
    pub successors: usize,
    /// Probability of leaving the preferred successors for any topic word.
    pub jump: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_docs: 2000,
            vocab_size: 200,
            paired_fraction: 0.5,
            topics: 10,
            min_doc_len: 6,
            max_doc_len: 12,
            successors: 3,
            jump: 0.15,
            seed: 42,
        }
    }
}

const ONSETS: &[&str] = &[
    "b", "br", "c", "ch", "d", "dr", "f", "fl", "g", "gr", "h", "j", "k", "l", "m", "n", "p",
    "pl", "r", "s", "sh", "st", "t", "tr", "v", "w", "z",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou", "ea"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l", "m", "t", "nd", "st"];
const CONSONANTS: &[char] = &[
    'b', 'c', 'd', 'f', 'g', 'h', 'j', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'w', 'z',
];

fn syllabic_word(rng: &mut impl Rng) -> String {
    let syllables = rng.random_range(2..=4);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(NUCLEI.choose(rng).unwrap());
        w.push_str(CODAS.choose(rng).unwrap());
    }
    w
}

/// Pronounceable pseudo-words, 8 to 11 characters long.
///
/// The first `pairs` words come in look-alike pairs `(2i, 2i + 1)` that
/// share everything after their first two letters; every other pair of
/// words has BLCSR at most 0.4.
pub fn pseudo_vocabulary(count: usize, pairs: usize, seed: u64) -> Vec<String> {
    let pairs = pairs.min(count / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<String> = Vec::with_capacity(count);
    let fits = |words: &[String], w: &str, skip: Option<usize>| {
        words
            .iter()
            .enumerate()
            .all(|(i, o)| Some(i) == skip || (o != w && blcsr(o, w) <= 0.4))
    };
    while words.len() < count {
        let w = syllabic_word(&mut rng);
        let len = w.chars().count();
        if !(8..=11).contains(&len) || !fits(&words, &w, None) {
            continue;
        }
        if words.len() >= 2 * pairs {
            words.push(w);
            continue;
        }
        let tail: String = w.chars().skip(2).collect();
        let head: Vec<char> = w.chars().take(2).collect();
        let partner = (0..50).find_map(|_| {
            let c = *CONSONANTS.choose(&mut rng).unwrap();
            let v = *VOWELS.choose(&mut rng).unwrap();
            if c == head[0] || v == head[1] {
                return None;
            }
            let p = format!("{c}{v}{tail}");
            fits(&words, &p, None).then_some(p)
        });
        if let Some(p) = partner {
            words.push(w);
            words.push(p);
        }
    }
    words
}

/// A topic-structured clean corpus: each document walks a word chain
/// inside one topic without repeating a word, so every word has its own
/// characteristic neighbours and short documents rarely share a word.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub vocabulary: Vec<String>,
    pub documents: Vec<Vec<String>>,
}

impl SyntheticCorpus {
    pub fn generate(config: &SyntheticConfig) -> Result<Self> {
        if config.n_docs == 0 || config.vocab_size < 2 || config.topics < 2 {
            return Err(Error::InvalidConfig(
                "synthetic corpus needs documents, two words and two topics".into(),
            ));
        }
        if config.min_doc_len == 0 || config.min_doc_len > config.max_doc_len {
            return Err(Error::InvalidConfig("invalid document length range".into()));
        }
        if !(0.0..=1.0).contains(&config.paired_fraction) {
            return Err(Error::InvalidConfig("paired_fraction must lie in [0, 1]".into()));
        }
        let pairs = ((config.vocab_size as f64 * config.paired_fraction) / 2.0).round() as usize;
        let vocabulary = pseudo_vocabulary(config.vocab_size, pairs, derive_seed(config.seed, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));

        // Deal words to topics round-robin; the two halves of a look-alike
        // pair always land in different topics.
        let mut units: Vec<Vec<usize>> = (0..pairs).map(|p| vec![2 * p, 2 * p + 1]).collect();
        units.extend((2 * pairs..vocabulary.len()).map(|w| vec![w]));
        units.shuffle(&mut rng);
        let mut topics: Vec<Vec<usize>> = vec![Vec::new(); config.topics];
        for (slot, unit) in units.into_iter().enumerate() {
            for (k, w) in unit.into_iter().enumerate() {
                topics[(slot + k) % config.topics].push(w);
            }
        }
        topics.retain(|t| !t.is_empty());

        let mut successors: HashMap<usize, Vec<usize>> = HashMap::new();
        for topic in &topics {
            for &w in topic {
                let others: Vec<usize> = topic.iter().copied().filter(|&o| o != w).collect();
                let picks = others
                    .choose_multiple(&mut rng, config.successors.min(others.len()))
                    .copied()
                    .collect();
                successors.insert(w, picks);
            }
        }
        let topic_weights = WeightedIndex::new(topics.iter().map(|t| t.len() as f64))
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut documents = Vec::with_capacity(config.n_docs);
        for _ in 0..config.n_docs {
            let topic = &topics[topic_weights.sample(&mut rng)];
            let len = rng
                .random_range(config.min_doc_len..=config.max_doc_len)
                .min(topic.len());
            let mut used: Vec<usize> = Vec::with_capacity(len);
            let mut cur = *topic.choose(&mut rng).unwrap();
            loop {
                used.push(cur);
                if used.len() == len {
                    break;
                }
                let fresh: Vec<usize> = successors[&cur]
                    .iter()
                    .copied()
                    .filter(|w| !used.contains(w))
                    .collect();
                cur = if fresh.is_empty() || rng.random_bool(config.jump) {
                    let open: Vec<usize> = topic.iter().copied().filter(|w| !used.contains(w)).collect();
                    *open.choose(&mut rng).unwrap()
                } else {
                    *fresh.choose(&mut rng).unwrap()
                };
            }
            documents.push(used.into_iter().map(|w| vocabulary[w].clone()).collect());
        }
        Ok(Self {
            vocabulary,
            documents,
        })
    }

    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::from_token_docs(self.documents.clone())
    }
}
