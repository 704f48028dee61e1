//! Lexical similarity kernels.
//!
//! Every metric works on Unicode scalar values, never bytes, so that
//! multi-byte scripts (Bengali, accented Latin) count one unit per
//! character.

use std::collections::HashMap;
use std::sync::Mutex;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// Longest common subsequence length over two arbitrary sequences.
pub fn lcs_of<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance over two arbitrary sequences, unit costs.
pub fn levenshtein_of<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn lcs_len(a: &str, b: &str) -> usize {
    lcs_of(&chars(a), &chars(b))
}

/// Adjacent character bigrams; `|w| - 1` of them, none for words shorter than 2.
pub fn bigrams(w: &str) -> Vec<(char, char)> {
    let c = chars(w);
    c.windows(2).map(|p| (p[0], p[1])).collect()
}

/// LCS over the sequences of adjacent character bigrams.
pub fn blcs(a: &str, b: &str) -> usize {
    lcs_of(&bigrams(a), &bigrams(b))
}

/// `blcs / (max length - 1)`.
///
/// When both words are shorter than two characters the ratio has a zero
/// denominator; it is then 1.0 for equal words and 0.0 otherwise.
pub fn blcsr(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len < 2 {
        return if a == b { 1.0 } else { 0.0 };
    }
    blcs(a, b) as f64 / (max_len as f64 - 1.0)
}

/// `lcs_len / max length`. Both words must be non-empty.
pub fn lcsr(a: &str, b: &str) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyWord("lcsr"));
    }
    let (ca, cb) = (chars(a), chars(b));
    Ok(lcs_of(&ca, &cb) as f64 / ca.len().max(cb.len()) as f64)
}

pub fn edit_distance(a: &str, b: &str) -> usize {
    levenshtein_of(&chars(a), &chars(b))
}

/// `1 - ED / max length`; two empty words are identical (1.0).
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let (ca, cb) = (chars(a), chars(b));
    let max_len = ca.len().max(cb.len());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein_of(&ca, &cb) as f64 / max_len as f64
}

/// Canonical decomposition with every combining mark removed.
pub fn strip_diacritics(w: &str) -> String {
    w.nfd().filter(|&c| !is_combining_mark(c)).collect()
}

/// Edit-distance mass attributable to diacritics:
/// `max(0, ED(a, b) - ED(strip(a), strip(b)))`.
pub fn diacritical_symmetry(a: &str, b: &str) -> usize {
    let raw = edit_distance(a, b);
    let stripped = edit_distance(&strip_diacritics(a), &strip_diacritics(b));
    raw.saturating_sub(stripped)
}

/// `ED - DS`, never negative.
pub fn modified_edit_distance(a: &str, b: &str) -> f64 {
    let ed = edit_distance(a, b);
    (ed - diacritical_symmetry(a, b).min(ed)) as f64
}

/// `(LCS + DS) / max length`, clamped to 1.0.
pub fn enelvo_lcsr(a: &str, b: &str) -> f64 {
    let (ca, cb) = (chars(a), chars(b));
    let max_len = ca.len().max(cb.len());
    if max_len == 0 {
        return 1.0;
    }
    let num = lcs_of(&ca, &cb) + diacritical_symmetry(a, b);
    (num as f64 / max_len as f64).min(1.0)
}

/// A symmetric word-pair metric memoized for the lifetime of one run.
///
/// The cache is behind a mutex so one instance can be shared by workers.
pub struct MemoMetric {
    metric: fn(&str, &str) -> f64,
    cache: Mutex<HashMap<(String, String), f64>>,
}

impl MemoMetric {
    pub fn new(metric: fn(&str, &str) -> f64) -> Self {
        Self {
            metric,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, a: &str, b: &str) -> f64 {
        let key = if a <= b {
            (a.to_owned(), b.to_owned())
        } else {
            (b.to_owned(), a.to_owned())
        };
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return v;
        }
        let v = (self.metric)(a, b);
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    pub fn len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Debug for MemoMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MemoMetric").field("entries", &self.len()).finish()
    }
}
