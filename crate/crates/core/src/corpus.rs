//! Corpus ingestion: tokenization, the frequency lexicon and
//! document-level co-occurrence.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeConfig {
    /// Keep a leading `#` on hashtags instead of stripping it.
    pub keep_hash: bool,
    /// Keep a leading `@` on mentions instead of stripping it.
    pub keep_at: bool,
}

fn is_word_char(c: char) -> bool {
    // ZWNJ / ZWJ are orthographic inside Indic words.
    c.is_alphanumeric() || is_combining_mark(c) || c == '\u{200c}' || c == '\u{200d}'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Split `text` into lowercase word tokens.
///
/// Anything that is not a letter, digit or combining mark separates
/// tokens. Apostrophes survive only between two word characters
/// (`don't`), and a leading `#`/`@` is kept only when configured.
pub fn tokenize(text: &str, config: &TokenizeConfig) -> Vec<String> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();

    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        let has_word = current.chars().any(is_word_char);
        if has_word {
            tokens.push(current.to_lowercase());
        }
        current.clear();
    };

    for (i, &c) in chars.iter().enumerate() {
        if is_word_char(c) {
            current.push(c);
            continue;
        }
        let next_is_word = chars.get(i + 1).is_some_and(|&n| is_word_char(n));
        if is_apostrophe(c) && !current.is_empty() && next_is_word {
            current.push('\'');
            continue;
        }
        let keep_prefix = (c == '#' && config.keep_hash) || (c == '@' && config.keep_at);
        flush(&mut current, &mut tokens);
        if keep_prefix && next_is_word {
            current.push(c);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub tokens: Vec<String>,
}

/// An ordered collection of tokenized documents with its frequency lexicon.
///
/// Documents may be empty (a blank input line still occupies a slot) so that
/// rewritten output stays line-aligned with the input.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    lexicon: BTreeMap<String, usize>,
    /// word -> (document index, count in that document), sorted by document.
    postings: HashMap<String, Vec<(u32, u32)>>,
}

/// Tokenize raw documents and build a corpus from them.
pub fn build_corpus<S: AsRef<str>>(documents: &[S], config: &TokenizeConfig) -> Result<Corpus> {
    Corpus::from_token_docs(
        documents
            .iter()
            .map(|d| tokenize(d.as_ref(), config))
            .collect(),
    )
}

impl Corpus {
    pub fn from_token_docs(docs: Vec<Vec<String>>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut lexicon: BTreeMap<String, usize> = BTreeMap::new();
        let mut postings: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
        let mut documents = Vec::with_capacity(docs.len());
        for (id, tokens) in docs.into_iter().enumerate() {
            let mut local: HashMap<&str, u32> = HashMap::new();
            for t in &tokens {
                *local.entry(t.as_str()).or_default() += 1;
            }
            for (word, count) in local {
                *lexicon.entry(word.to_owned()).or_default() += count as usize;
                postings
                    .entry(word.to_owned())
                    .or_default()
                    .push((id as u32, count));
            }
            documents.push(Document { id, tokens });
        }
        // Documents were visited in order, so every posting list is sorted.
        Ok(Self {
            documents,
            lexicon,
            postings,
        })
    }

    /// One document per line.
    pub fn from_lines_file(path: &Path, config: &TokenizeConfig) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lines: Vec<&str> = text.lines().collect();
        build_corpus(&lines, config)
    }

    /// One document per `.txt` file, in file-name order.
    pub fn from_dir(path: &Path, config: &TokenizeConfig) -> Result<Self> {
        let mut files = Vec::new();
        for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let entry = entry.map_err(|e| Error::io(path, e))?;
            let p = entry.path();
            if p.is_file() && p.extension().is_some_and(|e| e == "txt") {
                files.push(p);
            }
        }
        files.sort();
        let mut texts = Vec::with_capacity(files.len());
        for f in &files {
            texts.push(fs::read_to_string(f).map_err(|e| Error::io(f, e))?);
        }
        build_corpus(&texts, config)
    }

    /// Write the corpus one document per line, tokens separated by spaces.
    pub fn write_lines(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for doc in &self.documents {
            writeln!(out, "{}", doc.tokens.join(" ")).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn doc_count(&self) -> usize {
        self.documents.len()
    }

    pub fn lexicon(&self) -> &BTreeMap<String, usize> {
        &self.lexicon
    }

    pub fn frequency(&self, word: &str) -> usize {
        self.lexicon.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lexicon.contains_key(word)
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// Words sorted by descending frequency, ties lexicographic.
    pub fn words_by_frequency(&self) -> Vec<(&str, usize)> {
        let mut words: Vec<(&str, usize)> =
            self.lexicon.iter().map(|(w, &c)| (w.as_str(), c)).collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        words
    }

    /// Σ over documents of min(count(w1, d), count(w2, d)).
    pub fn cooccurrence_sum(&self, w1: &str, w2: &str) -> Result<f64> {
        let a = self
            .postings
            .get(w1)
            .ok_or_else(|| Error::OutOfLexicon(w1.to_owned()))?;
        let b = self
            .postings
            .get(w2)
            .ok_or_else(|| Error::OutOfLexicon(w2.to_owned()))?;
        Ok(merge_min_sum(a, b) as f64)
    }

    /// Per-document co-occurrence averaged over every document of the corpus.
    pub fn cooccurrence(&self, w1: &str, w2: &str) -> Result<f64> {
        Ok(self.cooccurrence_sum(w1, w2)? / self.doc_count() as f64)
    }
}

fn merge_min_sum(a: &[(u32, u32)], b: &[(u32, u32)]) -> u64 {
    let (mut i, mut j, mut total) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                total += a[i].1.min(b[j].1) as u64;
                i += 1;
                j += 1;
            }
        }
    }
    total
}

/// Co-occurrence values materialized for the pairs of a word set.
///
/// Only pairs that share at least one document are stored.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceIndex {
    pairs: HashMap<(String, String), f64>,
    doc_count: usize,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl CooccurrenceIndex {
    /// Index every unordered pair of distinct `words`. Words absent from the corpus
    /// are skipped.
    pub fn build<S: AsRef<str>>(corpus: &Corpus, words: &[S]) -> Self {
        let mut pairs = HashMap::new();
        for (i, a) in words.iter().enumerate() {
            let Some(pa) = corpus.postings.get(a.as_ref()) else {
                continue;
            };
            for b in &words[i + 1..] {
                let Some(pb) = corpus.postings.get(b.as_ref()) else {
                    continue;
                };
                let sum = merge_min_sum(pa, pb);
                if sum > 0 {
                    pairs.insert(pair_key(a.as_ref(), b.as_ref()), sum as f64);
                }
            }
        }
        Self {
            pairs,
            doc_count: corpus.doc_count(),
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Summed per-document co-occurrence; 0 for pairs never sharing a document.
    pub fn summed(&self, a: &str, b: &str) -> f64 {
        self.pairs.get(&pair_key(a, b)).copied().unwrap_or(0.0)
    }

    /// Co-occurrence averaged over all documents.
    pub fn averaged(&self, a: &str, b: &str) -> f64 {
        if self.doc_count == 0 {
            return 0.0;
        }
        self.summed(a, b) / self.doc_count as f64
    }

    pub fn nonzero_pairs(&self) -> usize {
        self.pairs.len()
    }
}
