//! Disjoint variant clusters and the word rewrite they induce.
//!
//! All normalizers funnel their per-word proposals through
//! [`NormalizationMap::from_proposals`], which merges overlapping clusters
//! (union-find over shared members) so that every word ends up in at most
//! one cluster.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantCluster {
    pub canonical: String,
    pub members: BTreeSet<String>,
}

impl VariantCluster {
    pub fn new(canonical: impl Into<String>, members: impl IntoIterator<Item = String>) -> Self {
        Self {
            canonical: canonical.into(),
            members: members.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizationMap {
    rewrite: BTreeMap<String, String>,
    clusters: Vec<VariantCluster>,
}

impl NormalizationMap {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Merge per-word proposals into disjoint clusters.
    ///
    /// Proposals sharing any word (member or canonical) are merged
    /// transitively. The canonical of a merged cluster is the proposal
    /// canonical with the highest `frequency`, ties to the smaller word.
    /// Clusters that end up containing only their canonical are dropped.
    pub fn from_proposals(
        proposals: impl IntoIterator<Item = VariantCluster>,
        frequency: impl Fn(&str) -> usize,
    ) -> Self {
        let proposals: Vec<VariantCluster> = proposals.into_iter().collect();
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut words: Vec<&str> = Vec::new();
        for p in &proposals {
            for w in std::iter::once(&p.canonical).chain(&p.members) {
                if !ids.contains_key(w.as_str()) {
                    ids.insert(w.as_str(), words.len());
                    words.push(w.as_str());
                }
            }
        }
        let mut uf = UnionFind::<usize>::new(words.len());
        for p in &proposals {
            let c = ids[p.canonical.as_str()];
            for m in &p.members {
                uf.union(c, ids[m.as_str()]);
            }
        }

        let canonicals: BTreeSet<&str> = proposals.iter().map(|p| p.canonical.as_str()).collect();
        let mut groups: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            groups.entry(uf.find(i)).or_default().push(w);
        }

        let mut clusters = Vec::new();
        let mut rewrite = BTreeMap::new();
        for members in groups.into_values() {
            if members.len() < 2 {
                continue;
            }
            let canonical = members
                .iter()
                .filter(|w| canonicals.contains(**w))
                .max_by(|a, b| frequency(a).cmp(&frequency(b)).then_with(|| b.cmp(a)))
                .copied()
                .expect("every merged group holds a proposal canonical");
            for m in &members {
                rewrite.insert(m.to_string(), canonical.to_owned());
            }
            clusters.push(VariantCluster::new(
                canonical,
                members.iter().map(|m| m.to_string()),
            ));
        }
        clusters.sort_by(|a, b| a.canonical.cmp(&b.canonical));
        Self { rewrite, clusters }
    }

    /// The canonical form of `word`; words outside every cluster map to themselves.
    pub fn rewrite<'a>(&'a self, word: &'a str) -> &'a str {
        self.rewrite.get(word).map_or(word, String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.rewrite
    }

    pub fn clusters(&self) -> &[VariantCluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.rewrite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewrite.is_empty()
    }

    /// Number of words actually changed by the rewrite.
    pub fn changed_count(&self) -> usize {
        self.rewrite.iter().filter(|(k, v)| k != v).count()
    }

    pub fn normalize_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        tokens.iter().map(|t| self.rewrite(t.as_ref()).to_owned()).collect()
    }

    /// `noisy<TAB>canonical` rows sorted by the noisy word.
    pub fn write_tsv(&self, out: &mut impl Write) -> std::io::Result<()> {
        write_tsv(&self.rewrite, out)
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        save_with(path, |out| self.write_tsv(out))
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let rewrite = load_tsv_pairs(path)?;
        Ok(Self::from_rewrite(rewrite))
    }

    /// Rebuild clusters from a plain rewrite table.
    pub fn from_rewrite(rewrite: BTreeMap<String, String>) -> Self {
        let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (k, v) in &rewrite {
            let g = groups.entry(v.clone()).or_default();
            g.insert(k.clone());
            g.insert(v.clone());
        }
        let mut rewrite = rewrite;
        for canonical in groups.keys() {
            rewrite.entry(canonical.clone()).or_insert_with(|| canonical.clone());
        }
        let clusters = groups
            .into_iter()
            .map(|(canonical, members)| VariantCluster { canonical, members })
            .collect();
        Self { rewrite, clusters }
    }

    /// JSON array of `{canonical, members}` objects.
    pub fn clusters_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.clusters)?)
    }

    pub fn save_clusters_json(&self, path: &Path) -> Result<()> {
        let json = self.clusters_json()?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn write_tsv(rows: &BTreeMap<String, String>, out: &mut impl Write) -> std::io::Result<()> {
    for (k, v) in rows {
        writeln!(out, "{k}\t{v}")?;
    }
    Ok(())
}

pub(crate) fn save_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Parse a two-column TSV into a function from the first column to the second.
pub(crate) fn load_tsv_pairs(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut rows = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(k), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(path, i + 1, "expected two tab-separated columns"));
        };
        if k.is_empty() || v.is_empty() {
            return Err(Error::parse(path, i + 1, "empty column"));
        }
        if rows.insert(k.to_owned(), v.to_owned()).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate key {k:?}")));
        }
    }
    Ok(rows)
}
