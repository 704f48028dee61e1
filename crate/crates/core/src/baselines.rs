//! Reference normalizers for comparison.
//!
//! * [`sridhar_normalize`]: kNN over embeddings, then LCSR / edit distance.
//! * [`enelvo_normalize`]: the same kNN candidates, scored by a mix of
//!   diacritic-aware lexical similarity and cosine.
//! * [`ghosh_normalize`]: edit-similarity candidates, a raw co-occurrence
//!   graph, threshold pruning and strongest-neighbour grouping.
//!
//! All similarities are computed in the one embedding space supplied;
//! external lexicons act only as word lists.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{CooccurrenceIndex, Corpus};
use crate::embeddings::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{ghosh_congregate, ghosh_prune, VariantGraph};
use crate::normmap::{NormalizationMap, VariantCluster};
use crate::simstring::{edit_distance, edit_similarity, enelvo_lcsr, lcsr, modified_edit_distance};
use crate::unsupclean::CleanLexiconSource;

/// Multiplier applied to LCSR when the edit distance is 0, so exact
/// string matches outrank every finite LCSR / ED score.
pub const ZERO_DISTANCE_BOOST: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Nearest neighbours kept per clean word.
    pub k: usize,
    /// Weight of the lexical component in the Enelvo score, in (0, 1).
    pub n: f64,
    /// Ghosh edit-similarity threshold.
    pub alpha: f64,
    /// Ghosh pruning fraction of the heaviest edge.
    pub beta_fraction: f64,
    /// Ghosh pruning only happens above this maximum edge weight.
    pub gamma: f64,
    pub clean_lexicon: CleanLexiconSource,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            k: 25,
            n: 0.8,
            alpha: 0.7,
            beta_fraction: 0.6,
            gamma: 50.0,
            clean_lexicon: CleanLexiconSource::default(),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.n > 0.0 && self.n < 1.0) {
            return bad(format!("n must lie in (0, 1), got {}", self.n));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.beta_fraction > 0.0 && self.beta_fraction < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta_fraction));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        Ok(())
    }
}

/// For each clean word, its `k` nearest embedded noisy words (corpus words
/// outside the clean lexicon).
fn noisy_versions(
    corpus: &Corpus,
    model: &EmbeddingModel,
    clean: &[String],
    k: usize,
) -> Result<BTreeMap<String, Vec<(String, f64)>>> {
    let clean_set: BTreeSet<&str> = clean.iter().map(String::as_str).collect();
    let mut out = BTreeMap::new();
    for c in clean.iter().filter(|c| model.contains(c)) {
        let nn = model.knn_where(c, k, |w| corpus.contains(w) && !clean_set.contains(w))?;
        out.insert(c.clone(), nn);
    }
    Ok(out)
}

/// Score every (noisy, clean) pair reachable through the kNN lists and
/// keep the best clean word per noisy word; ties go to the smaller clean word.
fn assign_by_score(
    versions: &BTreeMap<String, Vec<(String, f64)>>,
    score: impl Fn(&str, &str, f64) -> f64,
) -> BTreeMap<String, String> {
    let mut best: BTreeMap<String, (f64, String)> = BTreeMap::new();
    // BTreeMap iteration visits clean words in ascending order, so a strict
    // comparison keeps the lexicographically smaller word on ties.
    for (clean, nn) in versions {
        for (noisy, cos) in nn {
            let s = score(noisy, clean, *cos);
            match best.get(noisy) {
                Some((b, _)) if *b >= s => {}
                _ => {
                    best.insert(noisy.clone(), (s, clean.clone()));
                }
            }
        }
    }
    best.into_iter().map(|(n, (_, c))| (n, c)).collect()
}

fn map_from_assignment(corpus: &Corpus, assignment: BTreeMap<String, String>) -> NormalizationMap {
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (noisy, clean) in assignment {
        groups.entry(clean).or_default().insert(noisy);
    }
    NormalizationMap::from_proposals(
        groups
            .into_iter()
            .map(|(canonical, members)| VariantCluster { canonical, members }),
        |w| corpus.frequency(w),
    )
}

fn resolve_clean(corpus: &Corpus, config: &BaselineConfig, hint: Option<&str>) -> Result<Vec<String>> {
    let clean = config.clean_lexicon.resolve(corpus);
    if clean.is_empty() {
        return Err(Error::EmptyCleanLexicon {
            hint: hint.map(str::to_owned),
        });
    }
    Ok(clean)
}

/// `LCSR / ED`, with an identical pair boosted above any finite score.
pub fn sridhar_score(noisy: &str, clean: &str) -> f64 {
    let l = lcsr(noisy, clean).unwrap_or(0.0);
    match edit_distance(noisy, clean) {
        0 => l * ZERO_DISTANCE_BOOST,
        ed => l / ed as f64,
    }
}

pub fn sridhar_normalize(
    corpus: &Corpus,
    model: &EmbeddingModel,
    config: &BaselineConfig,
) -> Result<NormalizationMap> {
    config.validate()?;
    let clean = resolve_clean(corpus, config, None)?;
    let versions = noisy_versions(corpus, model, &clean, config.k)?;
    let assignment = assign_by_score(&versions, |noisy, clean, _| sridhar_score(noisy, clean));
    Ok(map_from_assignment(corpus, assignment))
}

/// `LCSR' / MED` when MED > 0, else `LCSR'`, where `LCSR'` counts
/// diacritic differences as matches.
pub fn enelvo_lexical_similarity(noisy: &str, clean: &str) -> f64 {
    let l = enelvo_lcsr(noisy, clean);
    let med = modified_edit_distance(noisy, clean);
    if med > 0.0 {
        l / med
    } else {
        l
    }
}

pub fn enelvo_score(noisy: &str, clean: &str, cosine: f64, n: f64) -> f64 {
    n * enelvo_lexical_similarity(noisy, clean) + (1.0 - n) * cosine
}

pub fn enelvo_normalize(
    corpus: &Corpus,
    model: &EmbeddingModel,
    config: &BaselineConfig,
) -> Result<NormalizationMap> {
    config.validate()?;
    let clean = resolve_clean(
        corpus,
        config,
        Some("no word reaches the frequency threshold; try a lower one"),
    )?;
    let versions = noisy_versions(corpus, model, &clean, config.k)?;
    let assignment = assign_by_score(&versions, |noisy, clean, cos| {
        enelvo_score(noisy, clean, cos, config.n)
    });
    Ok(map_from_assignment(corpus, assignment))
}

/// Corpus words with edit similarity to `w` strictly above `alpha`,
/// `w` excluded.
pub fn ghosh_candidates<S: AsRef<str>>(w: &str, lexicon: &[S], alpha: f64) -> BTreeSet<String> {
    let w_len = w.chars().count();
    lexicon
        .iter()
        .map(AsRef::as_ref)
        .filter(|&l| {
            if l == w {
                return false;
            }
            let l_len = l.chars().count();
            let max_len = l_len.max(w_len) as f64;
            // ED is at least the length difference.
            if 1.0 - l_len.abs_diff(w_len) as f64 / max_len <= alpha {
                return false;
            }
            edit_similarity(l, w) > alpha
        })
        .map(str::to_owned)
        .collect()
}

pub fn ghosh_normalize(corpus: &Corpus, config: &BaselineConfig) -> Result<NormalizationMap> {
    config.validate()?;
    if corpus.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let clean = resolve_clean(corpus, config, None)?;
    let lexicon: Vec<&str> = corpus.lexicon().keys().map(String::as_str).collect();
    let mut proposals = Vec::with_capacity(clean.len());
    for w in &clean {
        let mut nodes: Vec<String> = ghosh_candidates(w, &lexicon, config.alpha).into_iter().collect();
        // The query word takes part in its own graph when the corpus has it.
        if corpus.contains(w) {
            nodes.push(w.clone());
        }
        nodes.sort();
        let cooc = CooccurrenceIndex::build(corpus, &nodes);
        let mut g = VariantGraph::new(nodes.iter().cloned());
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                let weight = cooc.summed(a, b);
                if weight > 0.0 {
                    g.add_edge(a, b, weight)?;
                }
            }
        }
        let pruned = ghosh_prune(&g, config.beta_fraction, config.gamma);
        let partition = ghosh_congregate(&pruned);
        let best = partition
            .assignments()
            .map(|(node, c)| (-edit_similarity(node, w), c, node))
            .min_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.cmp(&b.1))
                    .then_with(|| a.2.cmp(b.2))
            });
        let members = match best {
            Some((_, c, _)) => partition
                .assignments()
                .filter(|&(n, cc)| cc == c && n != w)
                .map(|(n, _)| n.to_owned())
                .collect(),
            None => BTreeSet::new(),
        };
        proposals.push(VariantCluster {
            canonical: w.clone(),
            members,
        });
    }
    Ok(NormalizationMap::from_proposals(proposals, |w| corpus.frequency(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, TokenizeConfig};
    use approx::assert_relative_eq;

    fn words_list(ws: &[&str]) -> CleanLexiconSource {
        CleanLexiconSource::WordList(ws.iter().map(|w| w.to_string()).collect())
    }

    #[test]
    fn sridhar_prefers_release() {
        let rel = sridhar_score("relea", "release");
        let other = sridhar_score("relea", "relate");
        // LCSR 5/7 over ED 2 versus LCSR 4/6 over ED 3.
        assert_relative_eq!(rel, (5.0 / 7.0) / 2.0);
        assert_relative_eq!(other, (4.0 / 6.0) / 3.0);
        assert!(rel > other);
        assert_eq!(sridhar_score("same", "same"), ZERO_DISTANCE_BOOST);
    }

    #[test]
    fn sridhar_end_to_end() {
        let corpus = build_corpus(
            &["relea release relate", "stray words here"],
            &TokenizeConfig::default(),
        )
        .unwrap();
        let model = EmbeddingModel::from_vectors(vec![
            ("release", vec![1.0, 0.1]),
            ("relate", vec![1.0, 0.0]),
            ("relea", vec![1.0, 0.05]),
            ("stray", vec![-1.0, 0.0]),
            ("words", vec![0.0, -1.0]),
            ("here", vec![0.0, 1.0]),
        ])
        .unwrap();
        let cfg = BaselineConfig {
            k: 1,
            clean_lexicon: words_list(&["release", "relate"]),
            ..Default::default()
        };
        let map = sridhar_normalize(&corpus, &model, &cfg).unwrap();
        assert_eq!(map.rewrite("relea"), "release");
        assert_eq!(map.rewrite("stray"), "stray");

        let all = BaselineConfig {
            clean_lexicon: CleanLexiconSource::CorpusFrequency { threshold: 1 },
            ..cfg.clone()
        };
        assert!(sridhar_normalize(&corpus, &model, &all).unwrap().is_empty());

        let none = BaselineConfig {
            clean_lexicon: words_list(&[]),
            ..cfg
        };
        assert!(matches!(
            sridhar_normalize(&corpus, &model, &none),
            Err(Error::EmptyCleanLexicon { .. })
        ));
    }

    #[test]
    fn enelvo_scoring() {
        // MED = 0: lexical similarity falls back to the LCSR' term alone.
        assert_eq!(modified_edit_distance("cafe", "café"), 0.0);
        assert_eq!(enelvo_lexical_similarity("cafe", "café"), 1.0);
        assert_relative_eq!(enelvo_lexical_similarity("relea", "release"), (5.0 / 7.0) / 2.0);
        assert_relative_eq!(enelvo_score("cafe", "café", 0.5, 0.8), 0.8 + 0.2 * 0.5);
    }

    #[test]
    fn enelvo_hand_example() {
        // Noisy "helo" reaches clean "hello" (cos 0.6) and "help" (cos 0.9).
        // lex(helo, hello) = (4/5)/1 = 0.8; lex(helo, help) = (3/4)/1 = 0.75.
        // n = 0.8: hello 0.64 + 0.12 = 0.76; help 0.60 + 0.18 = 0.78 -> help.
        // n = 0.95: hello 0.76 + 0.03 = 0.79; help 0.7125 + 0.045 = 0.7575 -> hello.
        assert_relative_eq!(enelvo_score("helo", "hello", 0.6, 0.8), 0.76, epsilon = 1e-12);
        assert_relative_eq!(enelvo_score("helo", "help", 0.9, 0.8), 0.78, epsilon = 1e-12);
        let theta = |c: f64| vec![c as f32, (1.0 - c * c).sqrt() as f32];
        let corpus = build_corpus(&["hello help helo zzz"], &TokenizeConfig::default()).unwrap();
        // helo on the x axis; clean words at chosen angles from it.
        let model = EmbeddingModel::from_vectors(vec![
            ("helo", vec![1.0, 0.0]),
            ("hello", theta(0.6)),
            ("help", theta(0.9)),
            ("zzz", vec![-1.0, 0.0]),
        ])
        .unwrap();
        let cfg = |n| BaselineConfig {
            k: 1,
            n,
            clean_lexicon: words_list(&["hello", "help"]),
            ..Default::default()
        };
        assert_eq!(enelvo_normalize(&corpus, &model, &cfg(0.8)).unwrap().rewrite("helo"), "help");
        assert_eq!(enelvo_normalize(&corpus, &model, &cfg(0.95)).unwrap().rewrite("helo"), "hello");
    }

    #[test]
    fn enelvo_empty_lexicon_hints() {
        let corpus = build_corpus(&["a b c"], &TokenizeConfig::default()).unwrap();
        let model = EmbeddingModel::from_vectors(vec![("a", vec![1.0])]).unwrap();
        let err = enelvo_normalize(&corpus, &model, &BaselineConfig::default()).unwrap_err();
        assert!(err.to_string().contains("lower"), "{err}");
    }

    #[test]
    fn ghosh_long_documents_cluster() {
        let doc = "program programs programm progrm other words here program programs programm progrm";
        let docs = vec![doc; 30];
        let corpus = build_corpus(&docs, &TokenizeConfig::default()).unwrap();
        let cfg = BaselineConfig {
            clean_lexicon: words_list(&["program"]),
            ..Default::default()
        };
        let map = ghosh_normalize(&corpus, &cfg).unwrap();
        for w in ["programs", "programm", "progrm"] {
            assert_eq!(map.rewrite(w), "program", "{w}");
        }
    }

    #[test]
    fn ghosh_candidates_monotone_and_strict() {
        let lex = ["program", "programs", "progrm", "pogram", "diagram", "pr"];
        let lo = ghosh_candidates("program", &lex, 0.5);
        let hi = ghosh_candidates("program", &lex, 0.8);
        assert!(hi.is_subset(&lo));
        assert!(!lo.contains("program"));
        // ES(program, programs) = 7/8 exactly: excluded at alpha = 0.875.
        assert!(!ghosh_candidates("program", &lex, 0.875).contains("programs"));
    }

    #[test]
    fn config_validation() {
        assert!(BaselineConfig::default().validate().is_ok());
        for cfg in [
            BaselineConfig { k: 0, ..Default::default() },
            BaselineConfig { n: 1.0, ..Default::default() },
            BaselineConfig { gamma: 0.0, ..Default::default() },
            BaselineConfig { alpha: 1.5, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
