//! Weighted undirected word graphs and their clustering.
//!
//! [`louvain`] maximizes Newman modularity with the classic two-phase
//! scheme (local moving, then community aggregation). [`ghosh_prune`] and
//! [`ghosh_congregate`] implement the threshold pruning and
//! strongest-neighbour grouping used by the co-occurrence baseline.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariantGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Keyed by (i, j) with i < j.
    edges: BTreeMap<(usize, usize), f64>,
}

impl VariantGraph {
    pub fn new<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Self {
        let mut g = Self::default();
        for n in nodes {
            g.add_node(n);
        }
        g
    }

    /// Add a node if absent; returns its index.
    pub fn add_node(&mut self, word: impl Into<String>) -> usize {
        let word = word.into();
        if let Some(&i) = self.index.get(&word) {
            return i;
        }
        let i = self.nodes.len();
        self.index.insert(word.clone(), i);
        self.nodes.push(word);
        i
    }

    /// Set the weight of edge `a`–`b`, adding missing endpoints.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::InvalidConfig(format!("self-loop on {a:?}")));
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "edge {a:?}-{b:?} has invalid weight {weight}"
            )));
        }
        let i = self.add_node(a);
        let j = self.add_node(b);
        self.edges.insert((i.min(j), i.max(j)), weight);
        Ok(())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edges as `(u, v, weight)` in insertion-independent order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.edges
            .iter()
            .map(|(&(i, j), &w)| (self.nodes[i].as_str(), self.nodes[j].as_str(), w))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.values().copied().reduce(f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut g = self.clone();
        for w in g.edges.values_mut() {
            *w *= factor;
        }
        g
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (&(i, j), &w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    /// Debug dump, one `u v weight` line per edge.
    pub fn write_edge_list(&self, out: &mut impl Write) -> std::io::Result<()> {
        for (u, v, w) in self.edges() {
            writeln!(out, "{u} {v} {w}")?;
        }
        Ok(())
    }
}

/// An assignment of every node to a community, ids contiguous from 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    nodes: Vec<String>,
    community: Vec<usize>,
}

impl Partition {
    /// Build from raw labels; ids are renumbered by first appearance.
    pub fn from_labels(nodes: Vec<String>, labels: &[usize]) -> Self {
        assert_eq!(nodes.len(), labels.len());
        let mut remap = HashMap::new();
        let community = labels
            .iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Self { nodes, community }
    }

    pub fn singletons(nodes: Vec<String>) -> Self {
        let labels: Vec<usize> = (0..nodes.len()).collect();
        Self::from_labels(nodes, &labels)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn community_count(&self) -> usize {
        self.community.iter().max().map_or(0, |m| m + 1)
    }

    pub fn community_of(&self, word: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == word).map(|i| self.community[i])
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&str, usize)> {
        self.nodes.iter().map(String::as_str).zip(self.community.iter().copied())
    }

    /// Members of each community, indexed by community id.
    pub fn communities(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (n, &c) in self.nodes.iter().zip(&self.community) {
            out[c].push(n.clone());
        }
        out
    }
}

/// Newman modularity of `p` on the weighted graph `g`; 0 when `g` has no weight.
pub fn modularity(g: &VariantGraph, p: &Partition) -> Result<f64> {
    let lookup: HashMap<&str, usize> = p.assignments().collect();
    let labels = g
        .nodes
        .iter()
        .map(|n| {
            lookup
                .get(n.as_str())
                .copied()
                .ok_or_else(|| Error::MissingNode(n.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = g.total_weight();
    if m <= 0.0 {
        return Ok(0.0);
    }
    let k = p.community_count().max(labels.iter().max().map_or(0, |x| x + 1));
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for (&(i, j), &w) in &g.edges {
        degree[labels[i]] += w;
        degree[labels[j]] += w;
        if labels[i] == labels[j] {
            internal[labels[i]] += w;
        }
    }
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - (d / (2.0 * m)).powi(2))
        .sum())
}

/// Aggregated graph used between Louvain levels.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    /// Internal weight carried by each (super-)node.
    self_loop: Vec<f64>,
}

impl Level {
    fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|e| e.1).sum::<f64>() + 2.0 * self.self_loop[i]
    }

    /// Local moving phase. Returns raw community labels and whether any
    /// node moved.
    fn local_moves(&self, order: &[usize]) -> (Vec<usize>, bool) {
        const EPS: f64 = 1e-12;
        let n = self.adj.len();
        let k: Vec<f64> = (0..n).map(|i| self.degree(i)).collect();
        let m2: f64 = k.iter().sum();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = k.clone();
        let mut any_move = false;
        let mut link: Vec<f64> = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        loop {
            let mut moved = false;
            for &i in order {
                let old = comm[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if link[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[old] -= k[i];
                let gain = |c: usize, link: &[f64]| link[c] - tot[c] * k[i] / m2;
                let mut best = old;
                let mut best_gain = gain(old, &link);
                for &c in &touched {
                    let g = gain(c, &link);
                    if g > best_gain + EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[i];
                comm[i] = best;
                if best != old {
                    moved = true;
                    any_move = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
                link[old] = 0.0;
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (comm, any_move)
    }

    fn aggregate(&self, labels: &[usize], count: usize) -> Level {
        let mut self_loop = vec![0.0; count];
        let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, &ci) in labels.iter().enumerate() {
            self_loop[ci] += self.self_loop[i];
            for &(j, w) in &self.adj[i] {
                if j <= i {
                    continue;
                }
                let cj = labels[j];
                if ci == cj {
                    self_loop[ci] += w;
                } else {
                    *between.entry((ci.min(cj), ci.max(cj))).or_default() += w;
                }
            }
        }
        let mut adj = vec![Vec::new(); count];
        for ((a, b), w) in between {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Level { adj, self_loop }
    }
}

/// Louvain community detection (resolution 1).
///
/// The node visit order of each level is shuffled from `seed`, so the
/// result is reproducible. Isolated nodes end up as singleton communities
/// and a graph with no edge weight is returned as all singletons.
pub fn louvain(g: &VariantGraph, seed: u64) -> Partition {
    let n = g.node_count();
    let m = g.total_weight();
    if n == 0 || m <= 0.0 {
        return Partition::singletons(g.nodes.clone());
    }
    // Normalizing to unit total weight makes every decision scale-free.
    let adj = g
        .adjacency()
        .into_iter()
        .map(|row| row.into_iter().map(|(j, w)| (j, w / m)).collect())
        .collect();
    let mut level = Level {
        adj,
        self_loop: vec![0.0; n],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Community of each original node in the current level.
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let size = level.adj.len();
        let mut order: Vec<usize> = (0..size).collect();
        order.shuffle(&mut rng);
        let (raw, moved) = level.local_moves(&order);
        if !moved {
            break;
        }
        let mut remap = HashMap::new();
        let labels: Vec<usize> = raw
            .iter()
            .map(|c| {
                let next = remap.len();
                *remap.entry(*c).or_insert(next)
            })
            .collect();
        let count = remap.len();
        for c in membership.iter_mut() {
            *c = labels[*c];
        }
        if count == size {
            break;
        }
        level = level.aggregate(&labels, count);
    }
    Partition::from_labels(g.nodes.clone(), &membership)
}

/// Drop edges lighter than `beta_fraction` of the heaviest edge, but only
/// when the heaviest edge is heavier than `gamma`.
pub fn ghosh_prune(g: &VariantGraph, beta_fraction: f64, gamma: f64) -> VariantGraph {
    let Some(max) = g.max_weight() else {
        return g.clone();
    };
    if max <= gamma {
        return g.clone();
    }
    let cutoff = beta_fraction * max;
    let mut out = g.clone();
    out.edges.retain(|_, w| *w >= cutoff);
    out
}

/// Group nodes that are each other's strongest neighbour, closed
/// transitively. Weight ties go to the lexicographically smaller word.
pub fn ghosh_congregate(g: &VariantGraph) -> Partition {
    let n = g.node_count();
    let mut uf = UnionFind::<usize>::new(n);
    for (i, row) in g.adjacency().iter().enumerate() {
        let strongest = row.iter().copied().reduce(|best, cand| {
            match cand.1.total_cmp(&best.1) {
                std::cmp::Ordering::Greater => cand,
                std::cmp::Ordering::Equal if g.nodes[cand.0] < g.nodes[best.0] => cand,
                _ => best,
            }
        });
        if let Some((j, _)) = strongest {
            uf.union(i, j);
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    Partition::from_labels(g.nodes.clone(), &labels)
}
