//! Brute-force oracles and small fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varnorm::{Corpus, Partition, VariantGraph};

/// Every subsequence of `xs`, by bitmask.
fn subsequences<T: Clone>(xs: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (0u32..1 << xs.len()).map(move |mask| {
        xs.iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, x)| x.clone())
            .collect()
    })
}

fn is_subsequence<T: PartialEq>(needle: &[T], hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Longest common subsequence by enumerating all subsequences of the shorter input.
pub fn brute_lcs<T: PartialEq + Clone>(a: &[T], b: &[T]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    subsequences(short)
        .filter(|s| is_subsequence(s, long))
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

pub fn char_bigrams(w: &str) -> Vec<(char, char)> {
    let c: Vec<char> = w.chars().collect();
    c.windows(2).map(|p| (p[0], p[1])).collect()
}

pub fn brute_blcs(a: &str, b: &str) -> usize {
    brute_lcs(&char_bigrams(a), &char_bigrams(b))
}

/// Levenshtein distance by plain recursion over the last characters.
pub fn brute_levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    match (a.split_last(), b.split_last()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = brute_levenshtein(ra, rb) + usize::from(x != y);
            let del = brute_levenshtein(ra, b) + 1;
            let ins = brute_levenshtein(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

/// Modularity straight from the definition: sum over node pairs of
/// `(A_ij - k_i k_j / 2m) δ(c_i, c_j) / 2m`.
pub fn brute_modularity(n: usize, edges: &[(usize, usize, f64)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

pub fn optimal_modularity(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    set_partitions(n)
        .iter()
        .map(|labels| brute_modularity(n, edges, labels))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

/// A connected graph on `n` nodes: a random spanning tree plus extra edges.
pub fn random_connected_edges(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    let mut present = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v, rng.random_range(0.1..5.0)));
        present.insert((u, v));
    }
    let extra = rng.random_range(0..=n * (n - 1) / 2 - (n - 1));
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (u, v) = (a.min(b), a.max(b));
        if u != v && present.insert((u, v)) {
            edges.push((u, v, rng.random_range(0.1..5.0)));
        }
    }
    edges
}

pub fn to_graph(n: usize, edges: &[(usize, usize, f64)]) -> VariantGraph {
    let mut g = VariantGraph::new((0..n).map(node_name));
    for &(u, v, w) in edges {
        g.add_edge(&node_name(u), &node_name(v), w).unwrap();
    }
    g
}

/// Labels of `p` in node order `n0, n1, ...`.
pub fn labels_of(p: &Partition, n: usize) -> Vec<usize> {
    (0..n).map(|i| p.community_of(&node_name(i)).unwrap()).collect()
}

pub const RELEASE_FAMILY: [&str; 5] = ["release", "released", "releases", "relea", "realease"];

/// The release family shares software-news contexts; "please" (lexically
/// close to "release") and "relay" live in unrelated contexts.
pub fn release_corpus(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weighted = [("release", 8), ("released", 4), ("releases", 4), ("relea", 2), ("realease", 2)];
    let family: Vec<&str> = weighted
        .iter()
        .flat_map(|&(w, n)| std::iter::repeat_n(w, n))
        .collect();
    let software = ["new", "version", "software", "update", "download", "today", "stable", "notes", "beta", "build"];
    let polite = ["please", "help", "thanks", "kindly", "reply", "soon", "message", "friend", "call", "wait"];
    let weather = ["rain", "weather", "cloud", "storm", "wind", "cold", "sunny", "forecast", "winter", "snow"];
    let mut docs = Vec::new();
    for i in 0..600 {
        let (context, word): (&[&str], &str) = match i % 3 {
            0 => (&software, family.choose(&mut rng).unwrap()),
            1 => (&polite, "please"),
            _ => (&weather, "relay"),
        };
        let mut doc: Vec<String> = (0..8)
            .map(|_| context.choose(&mut rng).unwrap().to_string())
            .collect();
        let at = rng.random_range(0..=doc.len());
        doc.insert(at, word.to_owned());
        docs.push(doc);
    }
    Corpus::from_token_docs(docs).unwrap()
}
