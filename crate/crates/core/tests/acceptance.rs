//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the PASS/FAIL lines are
//! always printed; the process exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varnorm::baselines::{ghosh_normalize, BaselineConfig};
use varnorm::embeddings::sgns_loss_and_gradients;
use varnorm::evalkit::{bcubed, inject_noise, NoiseKind, NoiseModel, SyntheticConfig, SyntheticCorpus};
use varnorm::simstring::{blcs, blcsr, diacritical_symmetry, edit_distance, lcs_len, strip_diacritics};
use varnorm::unsupclean::{
    beta_threshold, candidate_set, normalize_corpus, trace_normalization, CleanLexiconSource,
    NormalizerConfig,
};
use varnorm::{louvain, modularity, train_skipgram, EmbeddingModel, TrainConfig};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))
}

fn exact_blcs_value() -> Outcome {
    let t = Instant::now();
    let b = blcs("ABCD", "ACD");
    let r = blcsr("ABCD", "ACD");
    let elapsed = t.elapsed();
    check(b == 1, || format!("BLCS = {b}"))?;
    check(r == 1.0 / 3.0, || format!("BLCSR = {r}"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("BLCS=1, BLCSR=1/3 in {elapsed:?}"))
}

fn metric_oracles() -> Outcome {
    let t = Instant::now();
    let alphabet = ['a', 'b', 'c', 'd'];
    let accented = ['á', 'b', 'ç', 'd'];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let word = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(0..=8);
        (0..len)
            .map(|_| {
                let i = rng.random_range(0..4);
                if rng.random_bool(0.25) { accented[i] } else { alphabet[i] }
            })
            .collect()
    };
    for case in 0..500 {
        let (a, b) = (word(&mut rng), word(&mut rng));
        let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let lcs = lcs_len(&a, &b);
        check(lcs == brute_lcs(&ca, &cb), || format!("case {case}: LCS({a:?}, {b:?}) = {lcs}"))?;
        let bl = blcs(&a, &b);
        check(bl == brute_blcs(&a, &b), || format!("case {case}: BLCS({a:?}, {b:?}) = {bl}"))?;
        let ed = edit_distance(&a, &b);
        check(ed == brute_levenshtein(&ca, &cb), || format!("case {case}: ED({a:?}, {b:?}) = {ed}"))?;
        let (sa, sb): (Vec<char>, Vec<char>) = (
            strip_diacritics(&a).chars().collect(),
            strip_diacritics(&b).chars().collect(),
        );
        let ds = diacritical_symmetry(&a, &b);
        let expected = ed.saturating_sub(brute_levenshtein(&sa, &sb));
        check(ds == expected, || format!("case {case}: DS({a:?}, {b:?}) = {ds}, oracle {expected}"))?;
    }
    within(t.elapsed(), Duration::from_secs(10))?;
    Ok(format!("500 pairs match brute force in {:?}", t.elapsed()))
}

fn beta_sanity() -> Outcome {
    // v_i = a·e0 + e_i has cosine a²/(a²+1) with every other v_j.
    for (a, c) in [(1.0f32, 0.5), (2.0, 0.8), (0.5, 0.2), (0.0, 0.0)] {
        let words = ["alpha", "alphas", "alphax", "alphaz", "alphae"];
        let entries: Vec<(&str, Vec<f32>)> = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mut v = vec![0.0; words.len() + 1];
                v[0] = a;
                v[i + 1] = 1.0;
                (*w, v)
            })
            .collect();
        let model = EmbeddingModel::from_vectors(entries).unwrap();
        let beta = beta_threshold(&words, &model).unwrap();
        check((beta - c).abs() <= 1e-12, || format!("constant cosine {c}: beta {beta}"))?;
    }
    // BLCSR weights 2/3, 1/3, 1/3 against cosines 0, 1/√2, 1/√2.
    let model = EmbeddingModel::from_vectors(vec![
        ("abcd", vec![1.0f32, 0.0]),
        ("abce", vec![0.0, 1.0]),
        ("abxy", vec![1.0, 1.0]),
    ])
    .unwrap();
    let beta = beta_threshold(&["abcd", "abce", "abxy"], &model).unwrap();
    let hand = 1.0 / (2.0 * 2f64.sqrt());
    check((beta - hand).abs() <= 1e-9, || format!("3-vector fixture: beta {beta}, hand {hand}"))?;
    Ok(format!("constant-cosine sets exact, 3-vector fixture {beta:.12}"))
}

fn louvain_quality() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_gap: f64 = 0.0;
    for case in 0..50 {
        let n = rng.random_range(2..=8);
        let edges = random_connected_edges(n, &mut rng);
        let g = to_graph(n, &edges);
        let p = louvain(&g, case);
        let q = modularity(&g, &p).unwrap();
        let q_brute = brute_modularity(n, &edges, &labels_of(&p, n));
        check((q - q_brute).abs() < 1e-9, || format!("graph {case}: modularity {q} vs definition {q_brute}"))?;
        let best = optimal_modularity(n, &edges);
        let single = brute_modularity(n, &edges, &(0..n).collect::<Vec<_>>());
        check(q >= best - 0.05, || format!("graph {case}: Q {q} vs optimum {best}"))?;
        check(q >= single - 1e-12, || format!("graph {case}: Q {q} below singletons {single}"))?;
        worst_gap = worst_gap.max(best - q);
    }
    let triangles = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)];
    let g = to_graph(6, &triangles);
    let p = louvain(&g, 0);
    let groups: BTreeSet<Vec<String>> = p.communities().into_iter().collect();
    let expected: BTreeSet<Vec<String>> = [vec!["n0", "n1", "n2"], vec!["n3", "n4", "n5"]]
        .into_iter()
        .map(|c| c.into_iter().map(String::from).collect())
        .collect();
    check(groups == expected, || format!("triangles split as {groups:?}"))?;
    let q = modularity(&g, &p).unwrap();
    check((q - 0.5).abs() < 1e-9, || format!("triangles Q = {q}"))?;
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!("50 graphs, worst gap to optimum {worst_gap:.4}; triangles Q=0.5"))
}

fn end_to_end_recovery() -> Outcome {
    let t = Instant::now();
    let synth = SyntheticCorpus::generate(&SyntheticConfig::default()).map_err(|e| e.to_string())?;
    let clean = synth.corpus().map_err(|e| e.to_string())?;
    let noise = NoiseModel { kind: NoiseKind::Social, rate: 0.15, seed: 42 };
    let (noisy, gold, _) = inject_noise(&clean, &noise).map_err(|e| e.to_string())?;
    let model = train_skipgram(&noisy, &TrainConfig { seed: 42, ..Default::default() }).map_err(|e| e.to_string())?;
    let lexicon = CleanLexiconSource::WordList(synth.vocabulary.iter().cloned().collect());
    let cfg = NormalizerConfig { alpha: 0.7, clean_lexicon: lexicon.clone(), seed: 42, ..Default::default() };
    let (map, _) = trace_normalization(&noisy, &model, &cfg).map_err(|e| e.to_string())?;
    let ours = bcubed(&map, &gold);
    let ghosh = ghosh_normalize(&noisy, &BaselineConfig { clean_lexicon: lexicon, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let theirs = bcubed(&ghosh, &gold);
    let elapsed = t.elapsed();
    check(ours.f1 >= 0.70, || format!("F1 {:.3} < 0.70", ours.f1))?;
    check(ours.f1 > theirs.f1, || format!("F1 {:.3} does not beat Ghosh {:.3}", ours.f1, theirs.f1))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("F1 {:.3} (P {:.3}, R {:.3}) vs Ghosh {:.3} in {elapsed:.1?}", ours.f1, ours.precision, ours.recall, theirs.f1))
}

fn release_cluster() -> Outcome {
    let corpus = release_corpus(7);
    let model = train_skipgram(&corpus, &TrainConfig { seed: 7, dim: 50, epochs: 10, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let cfg = NormalizerConfig {
        clean_lexicon: CleanLexiconSource::Queries(vec!["release".into()]),
        seed: 7,
        ..Default::default()
    };
    let (map, _) = trace_normalization(&corpus, &model, &cfg).map_err(|e| e.to_string())?;
    let cluster = map
        .clusters()
        .iter()
        .find(|c| c.canonical == "release")
        .ok_or("no cluster for release")?;
    for w in ["released", "releases"] {
        check(cluster.members.contains(w), || format!("{w} missing from {:?}", cluster.members))?;
    }
    check(!cluster.members.contains("please"), || format!("please merged into {:?}", cluster.members))?;
    Ok(format!("release -> {:?}", cluster.members))
}

fn invariant_suite() -> Outcome {
    let synth = SyntheticCorpus::generate(&SyntheticConfig { n_docs: 400, seed: 3, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let clean = synth.corpus().map_err(|e| e.to_string())?;
    let noise = NoiseModel { kind: NoiseKind::Social, rate: 0.2, seed: 3 };
    let (noisy, _, _) = inject_noise(&clean, &noise).map_err(|e| e.to_string())?;
    let lexicon = CleanLexiconSource::WordList(synth.vocabulary.iter().cloned().collect());
    let train = TrainConfig { seed: 3, dim: 40, ..Default::default() };
    let cfg = NormalizerConfig { alpha: 0.6, clean_lexicon: lexicon, seed: 3, ..Default::default() };

    let run = || -> Result<(Vec<u8>, Vec<u8>), String> {
        let model = train_skipgram(&noisy, &train).map_err(|e| e.to_string())?;
        let (map, _) = trace_normalization(&noisy, &model, &cfg).map_err(|e| e.to_string())?;
        let (mut vectors, mut tsv) = (Vec::new(), Vec::new());
        model.write_word2vec_text(&mut vectors).map_err(|e| e.to_string())?;
        map.write_tsv(&mut tsv).map_err(|e| e.to_string())?;
        Ok((vectors, tsv))
    };
    let first = run()?;
    check(first == run()?, || "two seeded runs differ".into())?;

    let model = train_skipgram(&noisy, &train).map_err(|e| e.to_string())?;
    let (map, traces) = trace_normalization(&noisy, &model, &cfg).map_err(|e| e.to_string())?;

    let mut seen = BTreeSet::new();
    for c in map.clusters() {
        for m in &c.members {
            check(seen.insert(m.clone()), || format!("{m} in two clusters"))?;
        }
    }
    for w in noisy.lexicon().keys() {
        let once = map.rewrite(w);
        check(map.rewrite(once) == once, || format!("rewrite not idempotent at {w}"))?;
    }

    let words: Vec<&String> = noisy.lexicon().keys().collect();
    for t in traces.iter().take(40) {
        let loose = candidate_set(&t.word, &words, 0.5);
        let tight = candidate_set(&t.word, &words, 0.8);
        check(tight.is_subset(&loose), || format!("candidates of {} not monotone in alpha", t.word))?;
        if let Some(beta) = t.beta {
            let embedded: Vec<&String> = t.candidates.iter().filter(|c| model.contains(c)).collect();
            let cosines: Vec<f64> = embedded
                .iter()
                .enumerate()
                .flat_map(|(i, a)| embedded[i + 1..].iter().map(|b| model.cosine(a, b).unwrap()))
                .collect();
            let lo = cosines.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = cosines.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            check(beta >= lo - 1e-12 && beta <= hi + 1e-12, || {
                format!("beta {beta} outside [{lo}, {hi}] for {}", t.word)
            })?;
        }
    }

    let rewritten = normalize_corpus(&noisy, &map);
    check(rewritten.doc_count() == noisy.doc_count(), || "document count changed".into())?;
    for (a, b) in noisy.documents().iter().zip(rewritten.documents()) {
        check(a.tokens.len() == b.tokens.len(), || format!("token count changed in doc {}", a.id))?;
    }
    Ok(format!("{} clusters; disjoint, idempotent, monotone, bounded, deterministic", map.clusters().len()))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dim = 12;
    let vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-0.8..0.8)).collect() };
    let center = vec(&mut rng);
    let context = vec(&mut rng);
    let negatives: Vec<Vec<f64>> = (0..5).map(|_| vec(&mut rng)).collect();
    let loss = |c: &[f64], o: &[f64], n: &[Vec<f64>]| {
        let refs: Vec<&[f64]> = n.iter().map(Vec::as_slice).collect();
        sgns_loss_and_gradients(c, o, &refs).loss
    };
    let refs: Vec<&[f64]> = negatives.iter().map(Vec::as_slice).collect();
    let analytic = sgns_loss_and_gradients(&center, &context, &refs);

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut compare = |a: f64, plus: f64, minus: f64| {
        let numeric = (plus - minus) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    };
    for i in 0..dim {
        let (mut p, mut m) = (center.clone(), center.clone());
        p[i] += h;
        m[i] -= h;
        compare(analytic.center[i], loss(&p, &context, &negatives), loss(&m, &context, &negatives));
        let (mut p, mut m) = (context.clone(), context.clone());
        p[i] += h;
        m[i] -= h;
        compare(analytic.context[i], loss(&center, &p, &negatives), loss(&center, &m, &negatives));
        for k in 0..negatives.len() {
            let (mut p, mut m) = (negatives.clone(), negatives.clone());
            p[k][i] += h;
            m[k][i] -= h;
            compare(analytic.negatives[k][i], loss(&center, &context, &p), loss(&center, &context, &m));
        }
    }
    check(worst <= 1e-4, || format!("worst relative error {worst:e}"))?;
    Ok(format!("worst relative error {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact BLCS value", exact_blcs_value),
        ("metric oracle equivalence", metric_oracles),
        ("beta sanity", beta_sanity),
        ("Louvain correctness", louvain_quality),
        ("end-to-end recovery", end_to_end_recovery),
        ("release cluster", release_cluster),
        ("invariant suite", invariant_suite),
        ("gradient check", gradient_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
