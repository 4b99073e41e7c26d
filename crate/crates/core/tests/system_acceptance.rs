//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use scitopics::embedding::{EmbeddingKind, EmbeddingMatrix};
use scitopics::eval::{coherence, diversity, embedding_similarity, perplexity, topic_significance};
use scitopics::ingest::{dedup_key, deduplicate, parse_str, screen, AuthorRef, BiblioRecord, InputFormat};
use scitopics::network::{
    detect_communities, parse_gexf, parse_graphml, render_graph, CollabGraph, EntityKind, GraphFormat,
};
use scitopics::pipeline::{bundled_config_path, synthetic, verify_run, Manifest, Pipeline, RunConfig};
use scitopics::summarize::{cohens_kappa, comprehensiveness, evaluate_ratings, select_best_model, EvaluationSheet};
use scitopics::textprep::SanitizedDoc;
use scitopics::topics::{fit, Strategy, Topic, TopicAssignment, TopicModelConfig};

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
        self.pass &= ok;
    }

    fn within(&mut self, started: Instant, limit: Duration) {
        let took = started.elapsed();
        self.check(
            took < limit,
            format!("runtime {:.2}s (limit {}s)", took.as_secs_f64(), limit.as_secs()),
        );
    }
}

fn approx(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------
// Independent reference computations.

fn oracle_diversity(lists: &[Vec<String>]) -> f64 {
    let mut all: Vec<&String> = lists.iter().flat_map(|l| l.iter().take(10)).collect();
    let total = all.len();
    all.sort();
    all.dedup();
    all.len() as f64 / total as f64
}

fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    dot / (na.sqrt() * nb.sqrt())
}

fn oracle_similarity(cs: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0.0;
    for i in 0..cs.len() {
        for j in 0..cs.len() {
            if i < j {
                total += oracle_cosine(&cs[i], &cs[j]);
                pairs += 1.0;
            }
        }
    }
    total / pairs
}

fn oracle_significance(p: &[f64], v: usize) -> f64 {
    let u = 1.0 / v as f64;
    p.iter().filter(|x| **x > 0.0).map(|x| x * (x / u).ln()).sum()
}

fn oracle_coherence(keywords: &[String], docs: &[Vec<String>]) -> f64 {
    let n = docs.len() as f64;
    let has = |d: &Vec<String>, w: &String| d.iter().any(|t| t == w);
    let mut scores = Vec::new();
    for (i, a) in keywords.iter().enumerate() {
        for b in &keywords[i + 1..] {
            let ca = docs.iter().filter(|d| has(d, a)).count() as f64;
            let cb = docs.iter().filter(|d| has(d, b)).count() as f64;
            let cab = docs.iter().filter(|d| has(d, a) && has(d, b)).count() as f64;
            let pab = cab / n;
            let s = if cab == 0.0 {
                -1.0
            } else if cab == n {
                1.0
            } else {
                let pe = pab + 1e-12;
                (((pe) / ((ca / n) * (cb / n))).ln() / -(pe.ln())).clamp(-1.0, 1.0)
            };
            scores.push(s);
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn oracle_perplexity(docs: &[(Vec<String>, i64)], dists: &BTreeMap<i64, BTreeMap<String, f64>>, v: usize) -> f64 {
    let mut nll = 0.0;
    let mut count = 0.0;
    for (tokens, label) in docs {
        if *label < 0 {
            continue;
        }
        for t in tokens {
            let p = dists[label].get(t).copied().unwrap_or(0.0);
            nll -= ((p + 1e-12) / (1.0 + v as f64 * 1e-12)).ln();
            count += 1.0;
        }
    }
    (nll / count).exp()
}

/// Kappa from the 2×2 contingency table.
fn oracle_kappa(pairs: &[(bool, bool)]) -> f64 {
    let n = pairs.len() as f64;
    let cell = |a: bool, b: bool| pairs.iter().filter(|p| **p == (a, b)).count() as f64;
    let (yy, yn, ny, nn) = (
        cell(true, true),
        cell(true, false),
        cell(false, true),
        cell(false, false),
    );
    let po = (yy + nn) / n;
    let pe = ((yy + yn) * (yy + ny) + (ny + nn) * (yn + nn)) / (n * n);
    if pe == 1.0 {
        return if po == 1.0 { 1.0 } else { 0.0 };
    }
    (po - pe) / (1.0 - pe)
}

/// Newman modularity straight from the dense adjacency matrix.
fn oracle_modularity(names: &[String], adj: &[Vec<f64>], community: &[usize]) -> f64 {
    let n = names.len();
    let k: Vec<f64> = adj.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if community[i] == community[j] {
                q += adj[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn dense(g: &CollabGraph) -> (Vec<String>, Vec<Vec<f64>>) {
    let names: Vec<String> = g.nodes.keys().cloned().collect();
    let idx: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut adj = vec![vec![0.0; names.len()]; names.len()];
    for ((a, b), w) in &g.edges {
        adj[idx[a.as_str()]][idx[b.as_str()]] = *w as f64;
        adj[idx[b.as_str()]][idx[a.as_str()]] = *w as f64;
    }
    (names, adj)
}

/// Best modularity over every set partition (restricted growth strings).
fn exhaustive_optimum(names: &[String], adj: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = names.len();
    let mut labels = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, labels.clone());
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if i == labels.len() {
            f(labels);
            return;
        }
        for c in 0..=max + 1 {
            labels[i] = c;
            rec(i + 1, max.max(c), labels, f);
        }
    }
    labels[0] = 0;
    rec(1, 0, &mut labels, &mut |l: &[usize]| {
        let q = oracle_modularity(names, adj, l);
        if q > best.0 + 1e-12 {
            best = (q, l.to_vec());
        }
    });
    best
}

/// Same partition up to relabeling.
fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.iter()
        .zip(b)
        .all(|(x, y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

// ---------------------------------------------------------------------------
// Criteria.

fn metric_oracles() -> Outcome {
    let started = Instant::now();
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let instances = 60;
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |name: &'static str, got: f64, want: f64| {
        let e = worst.entry(name).or_insert(0.0);
        *e = e.max((got - want).abs());
    };

    for _ in 0..instances {
        let vocab_size = rng.gen_range(15..=100);
        let vocab: Vec<String> = (0..vocab_size).map(|i| format!("w{i}")).collect();
        let n_topics = rng.gen_range(1..=10);

        // Diversity.
        let lists: Vec<Vec<String>> = (0..n_topics)
            .map(|_| vocab.choose_multiple(&mut rng, 10).cloned().collect())
            .collect();
        let refs: Vec<Vec<&str>> = lists.iter().map(|l| l.iter().map(String::as_str).collect()).collect();
        note("diversity", diversity(&refs).unwrap(), oracle_diversity(&lists));

        // Embedding similarity over random centroids.
        let dim = rng.gen_range(2..=16);
        let cents: Vec<Vec<f64>> = (0..n_topics.max(2))
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let crefs: Vec<&[f64]> = cents.iter().map(Vec::as_slice).collect();
        note(
            "embedding similarity",
            embedding_similarity(&crefs).unwrap().unwrap(),
            oracle_similarity(&cents),
        );

        // Significance of a random sparse distribution.
        let support = rng.gen_range(1..=vocab_size);
        let mut w: Vec<f64> = (0..support).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let dist: BTreeMap<String, f64> = vocab.iter().cloned().zip(w.iter().copied()).collect();
        note(
            "significance",
            topic_significance(&dist, vocab_size),
            oracle_significance(&w, vocab_size),
        );

        // Corpus with topic labels for coherence and perplexity.
        let n_docs = rng.gen_range(5..=40);
        let docs: Vec<(Vec<String>, i64)> = (0..n_docs)
            .map(|_| {
                let len = rng.gen_range(1..=20);
                let toks = (0..len).map(|_| vocab[rng.gen_range(0..vocab_size)].clone()).collect();
                let label = if rng.gen_bool(0.15) {
                    -1
                } else {
                    rng.gen_range(0..n_topics as i64)
                };
                (toks, label)
            })
            .collect();
        let n_kw = rng.gen_range(2..=10);
        let kw: Vec<String> = vocab.choose_multiple(&mut rng, n_kw).cloned().collect();
        let kw_refs: Vec<&str> = kw.iter().map(String::as_str).collect();
        let corpus: Vec<Vec<String>> = docs.iter().map(|(t, _)| t.clone()).collect();
        let corpus_refs: Vec<&[String]> = corpus.iter().map(Vec::as_slice).collect();
        note(
            "coherence",
            coherence(&kw_refs, &corpus_refs).unwrap(),
            oracle_coherence(&kw, &corpus),
        );

        let mut dists = BTreeMap::new();
        let mut topics = Vec::new();
        for t in 0..n_topics as i64 {
            let n_support = rng.gen_range(1..=vocab_size);
            let support: Vec<&String> = vocab.choose_multiple(&mut rng, n_support).collect();
            let raw: Vec<f64> = support.iter().map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let d: BTreeMap<String, f64> = support
                .iter()
                .map(|w| (*w).clone())
                .zip(raw.iter().map(|x| x / s))
                .collect();
            dists.insert(t, d.clone());
            topics.push(Topic {
                topic_id: t,
                doc_ids: Vec::new(),
                term_dist: d,
                keywords: Vec::new(),
                centroid: Vec::new(),
            });
        }
        if docs.iter().all(|(_, l)| *l < 0) {
            continue;
        }
        let ids: Vec<String> = (0..docs.len()).map(|i| format!("d{i:03}")).collect();
        let assignment = TopicAssignment {
            labels: ids.iter().cloned().zip(docs.iter().map(|(_, l)| *l)).collect(),
            stage_path: BTreeMap::new(),
        };
        let by_id: BTreeMap<&str, &[String]> = ids
            .iter()
            .map(String::as_str)
            .zip(docs.iter().map(|(t, _)| t.as_slice()))
            .collect();
        note(
            "perplexity (relative)",
            perplexity(&assignment, &topics, &by_id, vocab_size).unwrap()
                / oracle_perplexity(&docs, &dists, vocab_size),
            1.0,
        );

        // Cohen's kappa.
        let n = rng.gen_range(2..=40);
        let bias = rng.gen_range(0.0..1.0);
        let pairs: Vec<(bool, bool)> = (0..n)
            .map(|_| {
                let a = rng.gen_bool(bias);
                let b = if rng.gen_bool(0.7) { a } else { rng.gen_bool(0.5) };
                (a, b)
            })
            .collect();
        let sheet = EvaluationSheet {
            topic_id: 1,
            ratings: pairs
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("a{i:02}"), *p))
                .collect(),
        };
        note("kappa", cohens_kappa(&sheet).unwrap().value, oracle_kappa(&pairs));
    }
    for (name, err) in &worst {
        let tol = if *name == "coherence" { 1e-6 } else { 1e-9 };
        out.check(
            *err <= tol,
            format!("{name}: max |diff| {err:.2e} over {instances} instances (tol {tol:.0e})"),
        );
    }
    out.within(started, Duration::from_secs(10));
    out
}

fn closed_form_anchors() -> Outcome {
    let mut out = Outcome::new();
    let uniform: BTreeMap<String, f64> = (0..20).map(|i| (format!("w{i}"), 1.0 / 20.0)).collect();
    let s = topic_significance(&uniform, 20);
    out.check(
        approx(s, 0.0, 1e-9),
        format!("uniform distribution significance {s:.3e}"),
    );

    let point: BTreeMap<String, f64> = [("a".to_string(), 1.0)].into_iter().collect();
    let s = topic_significance(&point, 4);
    out.check(
        approx(s, 4f64.ln(), 1e-5),
        format!("point mass over 4 terms: {s:.6} vs ln 4"),
    );

    let vocab: Vec<String> = (0..50).map(|i| format!("w{i}")).collect();
    let topic = Topic {
        topic_id: 0,
        doc_ids: vec!["d0".into()],
        term_dist: vocab.iter().map(|w| (w.clone(), 1.0 / 50.0)).collect(),
        keywords: Vec::new(),
        centroid: Vec::new(),
    };
    let assignment = TopicAssignment {
        labels: [("d0".to_string(), 0)].into_iter().collect(),
        stage_path: BTreeMap::new(),
    };
    let docs: BTreeMap<&str, &[String]> = [("d0", vocab.as_slice())].into_iter().collect();
    let p = perplexity(&assignment, &[topic], &docs, 50).unwrap();
    out.check(
        approx(p, 50.0, 1e-6),
        format!("uniform topic perplexity over 50 terms: {p:.9}"),
    );

    let lists: Vec<Vec<String>> = (0..4).map(|t| (0..10).map(|i| format!("t{t}w{i}")).collect()).collect();
    let refs: Vec<Vec<&str>> = lists.iter().map(|l| l.iter().map(String::as_str).collect()).collect();
    let d = diversity(&refs).unwrap();
    out.check(d == 1.0, format!("disjoint keyword diversity {d}"));
    out
}

/// (documents, first model aligned, second model aligned) per topic.
const TABLE3: [(usize, usize, usize); 12] = [
    (36, 24, 22),
    (32, 20, 16),
    (37, 30, 30),
    (37, 20, 20),
    (31, 14, 15),
    (38, 21, 18),
    (42, 18, 20),
    (49, 28, 30),
    (44, 19, 21),
    (61, 30, 30),
    (53, 26, 31),
    (61, 34, 30),
];
const TABLE3_FIRST: [&str; 12] = [
    "0.67", "0.62", "0.81", "0.54", "0.45", "0.55", "0.43", "0.57", "0.43", "0.49", "0.49", "0.56",
];
const TABLE3_SECOND: [&str; 12] = [
    "0.61", "0.5", "0.81", "0.54", "0.48", "0.47", "0.48", "0.61", "0.48", "0.49", "0.58", "0.49",
];

fn table3_sheets(second: bool) -> BTreeMap<i64, EvaluationSheet> {
    TABLE3
        .iter()
        .enumerate()
        .map(|(i, &(docs, a, b))| {
            let aligned = if second { b } else { a };
            let ratings = (0..docs)
                .map(|k| {
                    let v = if k < aligned {
                        (true, true)
                    } else if k % 2 == 0 {
                        (true, false)
                    } else {
                        (false, false)
                    };
                    (format!("abs{k:03}"), v)
                })
                .collect();
            (
                i as i64 + 1,
                EvaluationSheet {
                    topic_id: i as i64 + 1,
                    ratings,
                },
            )
        })
        .collect()
}

fn two_decimals(s: &str) -> String {
    format!("{:.2}", s.parse::<f64>().unwrap())
}

fn table3() -> Outcome {
    let started = Instant::now();
    let mut out = Outcome::new();
    let first = evaluate_ratings("gpt-3.5", &table3_sheets(false)).unwrap();
    let second = evaluate_ratings("llama-2", &table3_sheets(true)).unwrap();
    for (model, printed, eval) in [("gpt-3.5", TABLE3_FIRST, &first), ("llama-2", TABLE3_SECOND, &second)] {
        let mut matched = 0;
        for (t, want) in eval.topics.iter().zip(printed) {
            let got = format!(
                "{:.2}",
                comprehensiveness(&table3_sheets(model == "llama-2")[&t.topic_id]).unwrap()
            );
            if got == two_decimals(want) {
                matched += 1;
            } else {
                out.check(false, format!("{model} topic {}: {got} vs printed {want}", t.topic_id));
            }
        }
        out.check(
            matched == 12,
            format!("{model}: {matched}/12 comprehensiveness rows reproduced at 2 decimals"),
        );
    }
    let models = [first, second];
    let best = select_best_model(&models).map(|i| models[i].model_name.clone());
    out.check(
        best.as_deref() == Some("llama-2"),
        format!(
            "mean comprehensiveness {:.4} (gpt-3.5) vs {:.4} (llama-2) selects {}; expected llama-2",
            models[0].mean_comprehensiveness,
            models[1].mean_comprehensiveness,
            best.unwrap_or_default()
        ),
    );
    out.within(started, Duration::from_secs(1));
    out
}

struct Fixture {
    emb: EmbeddingMatrix,
    docs: Vec<SanitizedDoc>,
    truth: Vec<usize>,
}

fn blob_fixture(rng: &mut ChaCha8Rng, centers: &[Vec<f64>], sizes: &[usize], sigma: f64) -> Fixture {
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    let mut docs = Vec::new();
    for (k, (c, &n)) in centers.iter().zip(sizes).enumerate() {
        for _ in 0..n {
            let id = format!("p{:04}", rows.len());
            rows.push(c.iter().map(|x| x + normal.sample(rng)).collect::<Vec<f64>>());
            truth.push(k);
            let mut tokens: Vec<String> = (0..5).map(|_| format!("b{k}w{}", rng.gen_range(0..8))).collect();
            tokens.push("shared".into());
            docs.push(SanitizedDoc { record_id: id, tokens });
        }
    }
    let dim = centers[0].len();
    let ids = docs.iter().map(|d| d.record_id.clone()).collect();
    Fixture {
        emb: EmbeddingMatrix::new(ids, rows, dim, EmbeddingKind::Document).unwrap(),
        docs,
        truth,
    }
}

fn separated_centers(rng: &mut ChaCha8Rng, k: usize, dim: usize, min_sep: f64) -> Vec<Vec<f64>> {
    loop {
        let cs: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..dim).map(|_| rng.gen_range(-40.0..40.0)).collect())
            .collect();
        let ok = (0..k).all(|i| {
            (i + 1..k).all(|j| {
                cs[i]
                    .iter()
                    .zip(&cs[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    >= min_sep
            })
        });
        if ok {
            return cs;
        }
    }
}

/// Share of points whose predicted cluster maps to their true group under
/// the best one-to-one matching. Noise never matches.
fn agreement(truth: &[usize], labels: &[i64]) -> f64 {
    let n_true = truth.iter().max().map_or(0, |m| m + 1);
    let preds: Vec<i64> = labels
        .iter()
        .copied()
        .filter(|l| *l >= 0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut table = vec![vec![0usize; n_true]; preds.len()];
    for (t, l) in truth.iter().zip(labels) {
        if let Some(p) = preds.iter().position(|x| x == l) {
            table[p][*t] += 1;
        }
    }
    fn best(table: &[Vec<usize>], row: usize, used: &mut Vec<bool>) -> usize {
        if row == table.len() {
            return 0;
        }
        let mut top = best(table, row + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                top = top.max(table[row][c] + best(table, row + 1, used));
                used[c] = false;
            }
        }
        top
    }
    best(&table, 0, &mut vec![false; n_true]) as f64 / truth.len() as f64
}

fn labels_of(f: &Fixture, a: &TopicAssignment) -> Vec<i64> {
    f.docs.iter().map(|d| a.labels[&d.record_id]).collect()
}

fn one_stage(min_cluster: usize) -> TopicModelConfig {
    TopicModelConfig {
        stage1_min_cluster: min_cluster,
        stage2_min_cluster: min_cluster,
        strategy: Strategy::OneStage,
        ..TopicModelConfig::default()
    }
}

fn two_stage() -> TopicModelConfig {
    TopicModelConfig {
        stage1_min_cluster: 30,
        stage2_min_cluster: 15,
        strategy: Strategy::TwoStage,
        ..TopicModelConfig::default()
    }
}

fn random_fixture(i: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(7000 + i);
    let k = rng.gen_range(2..=4);
    let centers = separated_centers(&mut rng, k, 10, 20.0);
    let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(40..=80)).collect();
    blob_fixture(&mut rng, &centers, &sizes, 1.0)
}

fn nested_fixture() -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut a = vec![0.0; 10];
    let mut b = vec![0.0; 10];
    let mut c = vec![0.0; 10];
    a[0] = 0.0;
    b[0] = 12.0;
    c[1] = 100.0;
    blob_fixture(&mut rng, &[a, b, c], &[20, 15, 40], 1.0)
}

fn clustering_recovery() -> Outcome {
    let started = Instant::now();
    let mut out = Outcome::new();
    let mut recovered = 0;
    for i in 0..20 {
        let f = random_fixture(i);
        let k = f.truth.iter().max().unwrap() + 1;
        let (a, topics) = fit(&f.emb, None, &f.docs, &one_stage(20)).unwrap();
        let agree = agreement(&f.truth, &labels_of(&f, &a));
        let ok = topics.len() == k && agree >= 0.95;
        recovered += ok as usize;
        if !ok {
            out.lines.push(format!(
                "     fixture {i}: {k} blobs, {} topics, agreement {agree:.3}",
                topics.len()
            ));
        }
    }
    out.check(
        recovered >= 19,
        format!("one-stage recovery in {recovered}/20 fixtures (need 19)"),
    );

    let f = nested_fixture();
    let (a, topics) = fit(&f.emb, None, &f.docs, &two_stage()).unwrap();
    let agree = agreement(&f.truth, &labels_of(&f, &a));
    out.check(
        topics.len() == 3 && agree >= 0.95,
        format!(
            "nested 20+15 blob beside a 40 blob: {} topics, agreement {agree:.3}",
            topics.len()
        ),
    );
    out.within(started, Duration::from_secs(30));
    out
}

fn two_stage_invariants() -> Outcome {
    let mut out = Outcome::new();
    let config = two_stage();
    let mut fixtures: Vec<(String, Fixture)> = (0..20).map(|i| (format!("fixture {i}"), random_fixture(i))).collect();
    fixtures.push(("nested".into(), nested_fixture()));
    let mut violations = 0;
    let mut checked = 0;
    for (name, f) in &fixtures {
        let (a, topics) = fit(&f.emb, None, &f.docs, &config).unwrap();
        for t in &topics {
            checked += 1;
            let parents: BTreeSet<i64> = t.doc_ids.iter().map(|id| a.stage_path[id].0).collect();
            let small = t.doc_ids.len() < config.stage2_min_cluster;
            let split = parents.len() != 1 || parents.iter().any(|p| *p < 0);
            if small || split {
                violations += 1;
                out.lines.push(format!(
                    "     {name} topic {}: size {}, parents {parents:?}",
                    t.topic_id,
                    t.doc_ids.len()
                ));
            }
        }
    }
    out.check(
        violations == 0,
        format!(
            "{checked} topics over {} fixtures: each has >= 15 members inside one stage-1 cluster",
            fixtures.len()
        ),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let f = blob_fixture(&mut rng, &[vec![0.0; 10]], &[29], 1.0);
    let (a, topics) = fit(&f.emb, None, &f.docs, &config).unwrap();
    out.check(
        topics.is_empty() && a.labels.values().all(|l| *l < 0),
        format!("29-document blob under stage-1 minimum 30: {} topics", topics.len()),
    );
    out
}

fn graph(kind: EntityKind, nodes: &[&str], edges: &[(&str, &str, usize)]) -> CollabGraph {
    let mut g = CollabGraph::empty(kind);
    for n in nodes {
        g.nodes.insert(n.to_string(), 1);
    }
    for (a, b, w) in edges {
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        g.edges.insert(key, *w);
    }
    g
}

fn community_detection() -> Outcome {
    let mut out = Outcome::new();
    let names: Vec<String> = ["a0", "a1", "a2", "a3", "a4", "b0", "b1", "b2", "b3", "b4"]
        .map(String::from)
        .to_vec();
    let mut edges = Vec::new();
    for side in [&names[..5], &names[5..]] {
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push((side[i].as_str(), side[j].as_str(), 1));
            }
        }
    }
    edges.push(("a0", "b0", 1));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let g = graph(EntityKind::Institution, &refs, &edges);
    let p = detect_communities(&g).unwrap();
    let (order, adj) = dense(&g);
    let found: Vec<usize> = order.iter().map(|n| p.assignment[n]).collect();
    let (best_q, best) = exhaustive_optimum(&order, &adj);
    out.check(
        p.n_communities() == 2 && same_partition(&found, &best),
        format!(
            "two 5-cliques + bridge: {} communities, matches exhaustive optimum over all partitions",
            p.n_communities()
        ),
    );
    let q = oracle_modularity(&order, &adj, &found);
    out.check(
        approx(p.modularity, q, 1e-9),
        format!("reported Q {:.12} vs recomputed {q:.12}", p.modularity),
    );
    out.check(approx(q, best_q, 1e-9), format!("optimum Q {best_q:.12}"));

    let clique: Vec<(&str, &str, usize)> = (0..5)
        .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
        .map(|(i, j)| (refs[i], refs[j], 1))
        .collect();
    let single = graph(EntityKind::Author, &refs[..5], &clique);
    let p = detect_communities(&single).unwrap();
    out.check(
        approx(p.modularity, 0.0, 1e-9),
        format!("single clique Q = {:.3e}", p.modularity),
    );
    out
}

fn prisma_fixture(rng: &mut ChaCha8Rng) -> Vec<BiblioRecord> {
    let titles = [
        "Flood risk",
        "Pandemic care",
        "Crisis logistics",
        "Soil carbon",
        "Urban heat",
        "Vaccine rollout",
    ];
    let n = rng.gen_range(1..=60);
    (0..n)
        .map(|i| {
            let title = titles[rng.gen_range(0..titles.len())].to_string();
            let abs = match rng.gen_range(0..5) {
                0 => String::new(),
                1 => "A study of grassland soils.".to_string(),
                2 => "Response during the COVID-19 pandemic.".to_string(),
                3 => "Impacts of the disaster on households.".to_string(),
                _ => "A humanitarian crisis in the region.".to_string(),
            };
            let mut r = BiblioRecord::new(format!("fx{i}"), title, abs, rng.gen_range(2018..2022));
            r.doi = rng.gen_bool(0.6).then(|| format!("10.7/{}", rng.gen_range(0..25)));
            r.language = Some(["en", "en", "en", "de", "fr"][rng.gen_range(0..5)].to_string());
            r.retracted = rng.gen_bool(0.1);
            r.authors = vec![AuthorRef::new("Ng", "A").with_affiliation("Uni", "Kenya")];
            r
        })
        .collect()
}

fn prisma_accounting() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let terms: Vec<String> = ["disaster", "crisis", "pandemic", "COVID-19"]
        .map(String::from)
        .to_vec();
    let (mut balanced, mut stable, mut idempotent, mut permutation) = (0, 0, 0, 0);
    for i in 0..100 {
        let ris = synthetic::render_ris(&prisma_fixture(&mut rng));
        let parsed = parse_str(&ris, InputFormat::Ris, &format!("fixture{i}"))
            .unwrap()
            .records;
        let (kept, report) = screen(parsed.clone(), &terms);
        balanced += (report.collected == report.final_count + report.removed_total()
            && report.collected == parsed.len()
            && kept.len() == report.final_count) as usize;

        let pos: BTreeMap<&str, usize> = parsed
            .iter()
            .enumerate()
            .map(|(i, r)| (r.record_id.as_str(), i))
            .collect();
        let order: Vec<usize> = kept.iter().map(|r| pos[r.record_id.as_str()]).collect();
        let (again, _) = screen(parsed.clone(), &terms);
        stable += (order.windows(2).all(|w| w[0] < w[1]) && again == kept) as usize;

        let (once, _) = deduplicate(parsed.clone());
        let (twice, removed) = deduplicate(once.clone());
        let keys: BTreeSet<String> = once.iter().map(dedup_key).collect();
        idempotent += (removed == 0 && twice == once && keys.len() == once.len()) as usize;

        // Without duplicates the surviving set ignores input order.
        let mut shuffled = once.clone();
        shuffled.shuffle(&mut rng);
        let ids = |rs: Vec<BiblioRecord>| rs.into_iter().map(|r| r.record_id).collect::<BTreeSet<_>>();
        permutation += (ids(screen(shuffled, &terms).0) == ids(screen(once, &terms).0)) as usize;
    }
    out.check(
        balanced == 100,
        format!("collected = final + removed in {balanced}/100 fixtures"),
    );
    out.check(
        stable == 100,
        format!("survivors keep input order, reruns identical: {stable}/100"),
    );
    out.check(idempotent == 100, format!("deduplication idempotent: {idempotent}/100"));
    out.check(
        permutation == 100,
        format!("deduplicated input order does not change survivors: {permutation}/100"),
    );
    out
}

fn end_to_end_determinism() -> Outcome {
    let started = Instant::now();
    let mut out = Outcome::new();
    let mut hashes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig::load(&bundled_config_path()).unwrap();
        config.out_dir = dir.path().to_path_buf();
        Pipeline::new(config, false).unwrap().run_all().unwrap();
        let n = verify_run(dir.path()).unwrap();
        out.lines.push(format!("     run verified {n} artifacts"));
        hashes.push(Manifest::load(dir.path()).unwrap().artifact_hashes());
    }
    let topics = hashes[0].keys().filter(|k| k.starts_with("audit/")).count();
    out.check(
        !hashes[0].is_empty() && hashes[0] == hashes[1],
        format!(
            "{} artifacts byte-identical across two runs ({topics} topic transcripts)",
            hashes[0].len()
        ),
    );
    out.within(started, Duration::from_secs(60));
    out
}

fn graph_round_trip() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let pool = [
        "Uni <North>",
        "R&D \"Lab\"",
        "Åbo Akademi",
        "O'Neil Inst",
        "plain",
        "x y z",
        "MIT",
        "ETH",
        "KTH",
        "UCL",
    ];
    let mut ok = 0;
    for i in 0..20 {
        let kind = EntityKind::ALL[i % 3];
        let n = rng.gen_range(1..=pool.len());
        let nodes: Vec<&str> = pool.choose_multiple(&mut rng, n).copied().collect();
        let mut g = graph(kind, &nodes, &[]);
        for v in g.nodes.values_mut() {
            *v = rng.gen_range(1..50);
        }
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.4) {
                    let (x, y) = (nodes[a].to_string(), nodes[b].to_string());
                    let key = if x < y { (x, y) } else { (y, x) };
                    g.edges.insert(key, rng.gen_range(1..9));
                }
            }
        }
        let partition = rng.gen_bool(0.5).then(|| detect_communities(&g).unwrap());
        let mut all = true;
        for format in [GraphFormat::Gexf, GraphFormat::Graphml] {
            let text = render_graph(&g, partition.as_ref(), format).unwrap();
            let back = match format {
                GraphFormat::Gexf => parse_gexf(&text),
                _ => parse_graphml(&text),
            }
            .unwrap();
            let communities_ok = match &partition {
                Some(p) => back.communities == p.assignment,
                None => back.communities.is_empty(),
            };
            all &= back.graph.kind == g.kind
                && back.graph.nodes == g.nodes
                && back.graph.edges == g.edges
                && communities_ok;
        }
        ok += all as usize;
    }
    out.check(
        ok == 20,
        format!("GEXF and GraphML re-parse to the identical graph for {ok}/20 random graphs"),
    );
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("metric oracle suite", metric_oracles),
        ("closed-form metric anchors", closed_form_anchors),
        ("rating table arithmetic and model selection", table3),
        ("clustering recovery", clustering_recovery),
        ("two-stage structural invariants", two_stage_invariants),
        ("community detection", community_detection),
        ("screening accounting", prisma_accounting),
        ("end-to-end determinism", end_to_end_determinism),
        ("graph export round trip", graph_round_trip),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome {
                pass: false,
                lines: vec![format!("MISS panicked: {msg}")],
            }
        });
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status}  {name}  ({:.2}s)", started.elapsed().as_secs_f64());
        for line in outcome.lines {
            println!("        {line}");
        }
        failed += !outcome.pass as usize;
    }
    println!("\n{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
