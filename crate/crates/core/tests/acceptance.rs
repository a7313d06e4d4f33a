//! Acceptance suite: one test per criterion, each bounded by a wall-clock
//! budget and printing a pass line with its runtime (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Where a criterion calls for an independent oracle (brute-force BLEU,
//! window enumeration, O(n²) rank correlation, set counting), the oracle
//! lives in [`oracle`] below and shares no code with the implementation
//! paths it checks.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use writing_path_core::checkeval::{kendall_tau, overall_score};
use writing_path_core::domain::{validate_trace, Outline, OutlineSection, RunMode};
use writing_path_core::fixtures::FixtureBuilder;
use writing_path_core::metrics::{
    build_cooccurrence, coherence, nli_alignment, npmi, self_bleu_tokens, topic_diversity,
    CoherenceVariant, MetricError, NliJudgeConfig, TopicWordSets, TopicWords,
};
use writing_path_core::pipeline::{PipelineConfig, WritingPath};
use writing_path_core::prompts::{
    format_augmented_outline, format_title_and_initial_outline, parse_augmented_outline,
    parse_metadata_block, parse_title_and_initial_outline, FewshotExamples, ParseError, Stage,
    TemplateSet,
};

fn criterion(name: &str, budget: Duration, body: impl FnOnce()) {
    let started = Instant::now();
    body();
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "{name}: took {elapsed:?}, budget {budget:?}"
    );
    println!("[PASS] {name} ({} ms)", elapsed.as_millis());
}

/// Independent reference implementations. Deliberately naive: association
/// lists instead of hash maps, explicit window materialization, pairwise
/// enumeration.
mod oracle {
    use std::collections::BTreeMap;

    /// Multi-reference BLEU by direct n-gram scanning, under the same pinned
    /// conventions: closest-reference brevity penalty (ties shorter), order
    /// range capped at the hypothesis length, ε for zero-match orders.
    pub fn bleu(hypothesis: &[String], references: &[&[String]], max_n: usize, eps: f64) -> f64 {
        let hyp_len = hypothesis.len();
        if hyp_len == 0 || references.is_empty() || max_n == 0 {
            return 0.0;
        }
        let mut ref_len = usize::MAX;
        let mut best_gap = usize::MAX;
        for reference in references {
            let gap = reference.len().abs_diff(hyp_len);
            if gap < best_gap || (gap == best_gap && reference.len() < ref_len) {
                best_gap = gap;
                ref_len = reference.len();
            }
        }
        let bp = if hyp_len > ref_len {
            1.0
        } else {
            (1.0 - ref_len as f64 / hyp_len as f64).exp()
        };
        let cap = max_n.min(hyp_len);
        let mut log_sum = 0.0;
        for n in 1..=cap {
            let grams = distinct_ngrams(hypothesis, n);
            let mut matched = 0u64;
            for gram in &grams {
                let hyp_count = occurrences(hypothesis, gram);
                let best_ref = references
                    .iter()
                    .map(|r| occurrences(r, gram))
                    .max()
                    .unwrap_or(0);
                matched += hyp_count.min(best_ref);
            }
            let total = (hyp_len - n + 1) as u64;
            let precision = if matched == 0 {
                eps
            } else {
                matched as f64 / total as f64
            };
            log_sum += precision.ln();
        }
        bp * (log_sum / cap as f64).exp()
    }

    fn distinct_ngrams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
        let mut grams: Vec<Vec<String>> = Vec::new();
        if tokens.len() < n {
            return grams;
        }
        for i in 0..=tokens.len() - n {
            let gram = tokens[i..i + n].to_vec();
            if !grams.contains(&gram) {
                grams.push(gram);
            }
        }
        grams
    }

    fn occurrences(tokens: &[String], gram: &[String]) -> u64 {
        if tokens.len() < gram.len() {
            return 0;
        }
        tokens.windows(gram.len()).filter(|w| *w == gram).count() as u64
    }

    pub fn self_bleu(sections: &[Vec<String>], max_n: usize, eps: f64) -> f64 {
        let mut scores: Vec<f64> = (0..sections.len())
            .map(|i| {
                let refs: Vec<&[String]> = sections
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, s)| s.as_slice())
                    .collect();
                bleu(&sections[i], &refs, max_n, eps)
            })
            .collect();
        scores.sort_by(f64::total_cmp);
        scores.iter().sum::<f64>() / scores.len() as f64 * 100.0
    }

    /// Window-by-window co-occurrence enumeration with string-keyed maps.
    pub struct BruteCounts {
        pub total_windows: u64,
        pub word_windows: BTreeMap<String, u64>,
        pub pair_windows: BTreeMap<(String, String), u64>,
    }

    pub fn cooccurrence(corpus: &[Vec<String>], window: usize) -> BruteCounts {
        let mut counts = BruteCounts {
            total_windows: 0,
            word_windows: BTreeMap::new(),
            pair_windows: BTreeMap::new(),
        };
        for doc in corpus {
            if doc.is_empty() {
                continue;
            }
            let mut windows: Vec<&[String]> = Vec::new();
            if doc.len() <= window {
                windows.push(&doc[..]);
            } else {
                for start in 0..=doc.len() - window {
                    windows.push(&doc[start..start + window]);
                }
            }
            for span in windows {
                counts.total_windows += 1;
                let mut present: Vec<&String> = Vec::new();
                for token in span {
                    if !present.contains(&token) {
                        present.push(token);
                    }
                }
                present.sort();
                for word in &present {
                    *counts.word_windows.entry((*word).clone()).or_insert(0) += 1;
                }
                for i in 0..present.len() {
                    for j in (i + 1)..present.len() {
                        let key = (present[i].clone(), present[j].clone());
                        *counts.pair_windows.entry(key).or_insert(0) += 1;
                    }
                }
            }
        }
        counts
    }

    /// Pairwise concordance counting; `None` when tau-b is undefined.
    pub fn kendall(x: &[f64], y: &[f64]) -> Option<f64> {
        use std::cmp::Ordering::*;
        let n = x.len();
        let (mut concordant, mut discordant) = (0i64, 0i64);
        let (mut x_ties, mut y_ties) = (0i64, 0i64);
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = x[i].partial_cmp(&x[j]).expect("no NaN");
                let dy = y[i].partial_cmp(&y[j]).expect("no NaN");
                if dx == Equal {
                    x_ties += 1;
                }
                if dy == Equal {
                    y_ties += 1;
                }
                if dx != Equal && dy != Equal {
                    if dx == dy {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
        }
        let n0 = (n * (n - 1) / 2) as i64;
        if n0 == x_ties || n0 == y_ties {
            return None;
        }
        let denom = (((n0 - x_ties) as f64) * ((n0 - y_ties) as f64)).sqrt();
        Some((concordant - discordant) as f64 / denom)
    }

    /// Unique-word counting by linear scan.
    pub fn topic_diversity(topics: &[Vec<String>], k: usize) -> f64 {
        let mut unique: Vec<&String> = Vec::new();
        for topic in topics {
            for word in topic {
                if !unique.contains(&word) {
                    unique.push(word);
                }
            }
        }
        unique.len() as f64 / (k * topics.len()) as f64
    }
}

fn vocab_word(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    format!("w{}", rng.random_range(0..vocab))
}

// ---- C1: published aggregation arithmetic --------------------------------

fn c01_overall_aggregation() {
    let rows: [([f64; 7], f64); 3] = [
        ([51.66, 31.14, 46.29, 88.11, 66.43, 21.14, 35.14], 48.56),
        ([68.00, 60.57, 72.86, 89.26, 80.29, 54.14, 66.29], 70.20),
        ([89.71, 84.46, 91.14, 98.06, 92.57, 74.00, 80.00], 87.13),
    ];
    for (aspects, expected) in rows {
        let overall = overall_score(&aspects).unwrap();
        assert!(
            (overall - expected).abs() <= 0.005,
            "overall {overall} differs from {expected} by more than 0.005"
        );
    }
}

#[test]
fn acceptance_c01_table_aggregation_reproduction() {
    criterion(
        "C1 overall-score aggregation reproduces published rows",
        Duration::from_secs(1),
        c01_overall_aggregation,
    );
}

// ---- C2: Self-BLEU oracle equivalence -------------------------------------

fn c02_self_bleu_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1eb);
    for case in 0..200 {
        let sections: Vec<Vec<String>> = (0..rng.random_range(2..=5))
            .map(|_| {
                (0..rng.random_range(1..=30))
                    .map(|_| vocab_word(&mut rng, 12))
                    .collect()
            })
            .collect();
        let ours = self_bleu_tokens(&sections, 4, 1e-9).unwrap();
        let reference = oracle::self_bleu(&sections, 4, 1e-9);
        assert!(
            (ours - reference).abs() <= 1e-9,
            "case {case}: {ours} vs oracle {reference}"
        );
        assert!((0.0..=100.0).contains(&ours));
    }
}

#[test]
fn acceptance_c02_self_bleu_oracle_equivalence() {
    criterion(
        "C2 self-BLEU matches brute-force n-gram oracle on 200 random sets",
        Duration::from_secs(10),
        c02_self_bleu_oracle,
    );
}

// ---- C3: co-occurrence / NPMI / UCI oracle equivalence ---------------------

fn c03_cooccurrence_oracle() {
    const EPS: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0c0);
    for case in 0..100 {
        // up to 200 tokens split over 1..5 documents
        let doc_count = rng.random_range(1..=5);
        let mut budget = rng.random_range(2..=200usize);
        let mut corpus: Vec<Vec<String>> = Vec::new();
        for d in 0..doc_count {
            let remaining_docs = doc_count - d;
            let len = if remaining_docs == 1 {
                budget
            } else {
                rng.random_range(1..=budget.saturating_sub(remaining_docs - 1).max(1))
            };
            budget = budget.saturating_sub(len);
            corpus.push((0..len).map(|_| vocab_word(&mut rng, 10)).collect());
            if budget == 0 {
                break;
            }
        }
        let window = rng.random_range(1..=8);
        let model = build_cooccurrence(&corpus, window).unwrap();
        let brute = oracle::cooccurrence(&corpus, window);

        assert_eq!(model.total_windows, brute.total_windows, "case {case}");
        let vocab: Vec<&String> = brute.word_windows.keys().collect();
        for word in &vocab {
            assert_eq!(
                model.word_count(word),
                brute.word_windows[*word],
                "case {case} word {word}"
            );
        }
        for i in 0..vocab.len() {
            for j in (i + 1)..vocab.len() {
                let key = (vocab[i].clone(), vocab[j].clone());
                let expected = brute.pair_windows.get(&key).copied().unwrap_or(0);
                assert_eq!(
                    model.pair_count(vocab[i], vocab[j]),
                    expected,
                    "case {case} pair {key:?}"
                );
            }
        }

        // npmi bounds over a sample of pairs, and UCI against the formula
        for _ in 0..10 {
            let a = vocab[rng.random_range(0..vocab.len())];
            let b = vocab[rng.random_range(0..vocab.len())];
            let value = npmi(&model, a, b, EPS).unwrap();
            assert!((-1.0..=1.0).contains(&value), "case {case}: npmi {value}");
        }
        if vocab.len() >= 3 {
            let topic: Vec<String> = vocab.iter().take(3).map(|w| (*w).clone()).collect();
            let uci = coherence(&model, &topic, CoherenceVariant::Uci, EPS).unwrap();
            let mut expected = 0.0;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let p1 = brute.word_windows[&topic[i]] as f64 / brute.total_windows as f64;
                    let p2 = brute.word_windows[&topic[j]] as f64 / brute.total_windows as f64;
                    let key = if topic[i] <= topic[j] {
                        (topic[i].clone(), topic[j].clone())
                    } else {
                        (topic[j].clone(), topic[i].clone())
                    };
                    let joint = brute.pair_windows.get(&key).copied().unwrap_or(0) as f64
                        / brute.total_windows as f64;
                    expected += ((joint + EPS) / (p1 * p2)).ln();
                }
            }
            expected /= 3.0;
            assert!((uci - expected).abs() <= 1e-12, "case {case}: uci");
        }
    }

    // perfect pair: exactly 1.0
    let corpus = vec![
        vec!["a".to_string(), "b".to_string()],
        vec!["c".to_string(), "d".to_string()],
    ];
    let model = build_cooccurrence(&corpus, 2).unwrap();
    assert_eq!(npmi(&model, "a", "b", EPS).unwrap(), 1.0);

    // independent pair: 0.0 within 1e-12
    let corpus = vec![
        vec!["a".to_string(), "b".to_string()],
        vec!["a".to_string(), "c".to_string()],
        vec!["d".to_string(), "b".to_string()],
        vec!["d".to_string(), "c".to_string()],
    ];
    let model = build_cooccurrence(&corpus, 2).unwrap();
    assert!(npmi(&model, "a", "b", EPS).unwrap().abs() <= 1e-12);
}

#[test]
fn acceptance_c03_cooccurrence_npmi_uci_oracle_equivalence() {
    criterion(
        "C3 co-occurrence counts, NPMI and UCI match window-enumeration oracle",
        Duration::from_secs(10),
        c03_cooccurrence_oracle,
    );
}

// ---- C4: topic diversity ---------------------------------------------------

fn c04_topic_diversity() {
    let make = |lists: Vec<Vec<String>>, k: usize| TopicWordSets {
        k,
        topics: lists
            .into_iter()
            .enumerate()
            .map(|(i, top_words)| TopicWords {
                label: format!("t{i}"),
                top_words,
            })
            .collect(),
    };

    // all distinct -> 1.0
    let distinct = make(
        vec![
            vec!["a".into(), "b".into(), "c".into()],
            vec!["d".into(), "e".into(), "f".into()],
        ],
        3,
    );
    assert_eq!(topic_diversity(&distinct).unwrap(), 1.0);

    // T identical topics -> 1/T
    for t in 1..=6usize {
        let identical = make(vec![vec!["x".into(), "y".into()]; t], 2);
        let expected = 1.0 / t as f64;
        assert!((topic_diversity(&identical).unwrap() - expected).abs() < 1e-15);
    }

    // 50 random cases against the set-counting oracle, exactly
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1f);
    for case in 0..50 {
        let k = rng.random_range(1..=6);
        let t = rng.random_range(1..=8);
        let lists: Vec<Vec<String>> = (0..t)
            .map(|_| {
                // k distinct words per topic, overlapping across topics
                let mut words = Vec::new();
                while words.len() < k {
                    let w = vocab_word(&mut rng, 14);
                    if !words.contains(&w) {
                        words.push(w);
                    }
                }
                words
            })
            .collect();
        let expected = oracle::topic_diversity(&lists, k);
        let ours = topic_diversity(&make(lists, k)).unwrap();
        assert_eq!(ours, expected, "case {case}");
    }
}

#[test]
fn acceptance_c04_topic_diversity_analytic_cases() {
    criterion(
        "C4 topic diversity analytic cases and set-counting oracle",
        Duration::from_secs(1),
        c04_topic_diversity,
    );
}

// ---- C5: Kendall tau -------------------------------------------------------

fn c05_kendall_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a0b);
    let mut defined = 0;
    for case in 0..100 {
        let n = rng.random_range(2..=50);
        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..10))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..10))).collect();
        match oracle::kendall(&x, &y) {
            Some(expected) => {
                defined += 1;
                let ours = kendall_tau(&x, &y).unwrap();
                assert!(
                    (ours - expected).abs() <= 1e-12,
                    "case {case}: {ours} vs oracle {expected}"
                );
            }
            None => {
                assert!(kendall_tau(&x, &y).is_err(), "case {case}: expected error");
            }
        }
    }
    assert!(defined >= 90, "rng produced too many degenerate cases");

    let ascending: Vec<f64> = (0..20).map(f64::from).collect();
    let descending: Vec<f64> = ascending.iter().rev().copied().collect();
    assert_eq!(kendall_tau(&ascending, &ascending).unwrap(), 1.0);
    assert_eq!(kendall_tau(&ascending, &descending).unwrap(), -1.0);
}

#[test]
fn acceptance_c05_kendall_tau_oracle_equivalence() {
    criterion(
        "C5 Kendall tau-b matches pairwise oracle on 100 random vectors",
        Duration::from_secs(5),
        c05_kendall_tau,
    );
}

// ---- C6: pipeline determinism ----------------------------------------------

fn base_config() -> PipelineConfig {
    let assets = writing_path_core::default_assets_dir();
    let templates =
        Arc::new(TemplateSet::load_manifest(assets.join("templates/manifest.txt")).unwrap());
    let fewshot = Arc::new(FewshotExamples::load(assets.join("templates/fewshot.txt")).unwrap());
    PipelineConfig::new(templates, fewshot)
}

fn fixture_seed() -> writing_path_core::domain::SeedPost {
    writing_path_core::harness::ingest_seeds(
        writing_path_core::default_assets_dir().join("fixtures/seeds.jsonl"),
    )
    .unwrap()
    .remove(0)
}

fn c06_pipeline_determinism() {
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    let seed = fixture_seed();
    for mode in RunMode::ALL {
        let mut canonical = Vec::new();
        for _ in 0..2 {
            let mut builder = FixtureBuilder::new(base_config());
            builder.script_seed(&seed).unwrap();
            let (llm, search) = builder.providers();
            let llm = Arc::new(llm);
            let search = Arc::new(search);
            let pipeline = WritingPath::new(llm.clone(), search.clone(), base_config());
            let trace = rt.block_on(pipeline.run_writing_path(&seed, mode)).unwrap();
            assert!(
                validate_trace(&trace).is_empty(),
                "mode {mode}: trace violates presence invariants"
            );
            if mode == RunMode::Aug {
                let n = trace.augmented_outline.as_ref().unwrap().len();
                assert_eq!(llm.call_count(), 3 + 1 + n, "aug llm call count");
                assert_eq!(search.call_count(), 1, "aug search call count");
            }
            canonical.push(trace.canonical_json().unwrap());
        }
        assert_eq!(canonical[0], canonical[1], "mode {mode} not byte-identical");
    }
}

#[test]
fn acceptance_c06_pipeline_determinism() {
    criterion(
        "C6 scripted runs are byte-identical with valid traces and exact call counts",
        Duration::from_secs(5),
        c06_pipeline_determinism,
    );
}

// ---- C7: parser round-trips --------------------------------------------------

fn c07_parser_round_trips() {
    let pool = [
        "arrival", "harbor", "market", "lunch", "evening", "packing", "notes", "budget", "ferry",
        "recipe", "stew", "logging", "panels", "review",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x0071);
    for case in 0..200 {
        let with_subs = case % 2 == 1;
        let sections: Vec<OutlineSection> = (0..rng.random_range(1..=6))
            .map(|_| {
                let header: Vec<&str> = (0..rng.random_range(1..=3))
                    .map(|_| pool[rng.random_range(0..pool.len())])
                    .collect();
                let mut subs: Vec<String> = Vec::new();
                if with_subs {
                    for _ in 0..rng.random_range(0..=4) {
                        let sub: Vec<&str> = (0..rng.random_range(1..=3))
                            .map(|_| pool[rng.random_range(0..pool.len())])
                            .collect();
                        let sub = sub.join(" ");
                        if !subs.contains(&sub) {
                            subs.push(sub);
                        }
                    }
                }
                OutlineSection::new(header.join(" "), subs).unwrap()
            })
            .collect();
        let outline = Outline::new(sections).unwrap();
        if with_subs {
            let text = format_augmented_outline(&outline);
            let parsed = parse_augmented_outline(&text).unwrap();
            assert_eq!(parsed, outline, "case {case}: structural mismatch");
            assert_eq!(format_augmented_outline(&parsed), text, "case {case}");
        } else {
            let text = format_title_and_initial_outline("A Title", &outline);
            let (title, parsed) = parse_title_and_initial_outline(&text).unwrap();
            assert_eq!(title, "A Title");
            assert_eq!(parsed, outline, "case {case}: structural mismatch");
            assert_eq!(
                format_title_and_initial_outline(&title, &parsed),
                text,
                "case {case}"
            );
        }
    }

    // the specified negative cases
    assert_eq!(
        parse_title_and_initial_outline("==Title==\nT\n==Outline==\n1. A"),
        Err(ParseError::MissingBlock("Initial Outline".into()))
    );
    assert_eq!(
        parse_title_and_initial_outline("==Initial Outline==\n1. A"),
        Err(ParseError::MissingBlock("Title".into()))
    );
    assert_eq!(
        parse_title_and_initial_outline("==Title==\nT\n==Initial Outline==\nno numbering here"),
        Err(ParseError::NoItems("Initial Outline".into()))
    );
    assert!(matches!(
        parse_augmented_outline("==Augmented Outline==\n  1.1 orphan\n1. Header"),
        Err(ParseError::OrphanSubheader(_))
    ));
    assert_eq!(
        parse_augmented_outline("1. A\n  1.1 x"),
        Err(ParseError::MissingBlock("Augmented Outline".into()))
    );
    assert_eq!(
        parse_metadata_block("1. purpose: p\n2. type: t\n4. keywords: k"),
        Err(ParseError::MissingField("style".into()))
    );
}

#[test]
fn acceptance_c07_parser_round_trips() {
    criterion(
        "C7 200 outlines survive format/parse round-trips; negative cases error",
        Duration::from_secs(5),
        c07_parser_round_trips,
    );
}

// ---- C8: end-to-end harness ---------------------------------------------------

fn c08_harness_end_to_end() {
    use writing_path_core::checkeval::Checklist;
    use writing_path_core::harness::{
        emit_report, evaluate_run, ingest_seeds, run_experiment, ExperimentConfig, OutlineType,
        ReportFormat,
    };
    use writing_path_core::providers::{ScriptedLlm, ScriptedSearch};

    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap();
    let assets = writing_path_core::default_assets_dir();
    let dir = tempfile::tempdir().unwrap();
    let seeds_path = dir.path().join("seeds.jsonl");
    let three: Vec<String> = std::fs::read_to_string(assets.join("fixtures/seeds.jsonl"))
        .unwrap()
        .lines()
        .take(3)
        .map(str::to_string)
        .collect();
    assert_eq!(three.len(), 3);
    std::fs::write(&seeds_path, three.join("\n")).unwrap();

    let config_path = dir.path().join("run.conf");
    std::fs::write(
        &config_path,
        format!(
            "seeds = seeds.jsonl\noutput_dir = run\ncache_dir = cache\nwindow = 6\ntop_k = 6\ntemplates = {}\nfewshot = {}\nchecklist = {}\n",
            assets.join("templates/manifest.txt").display(),
            assets.join("templates/fewshot.txt").display(),
            assets.join("checklist.txt").display(),
        ),
    )
    .unwrap();
    let config = ExperimentConfig::load(&config_path).unwrap();

    // scripted fixtures for the three seeds, runs and judges alike
    let templates = Arc::new(TemplateSet::load_manifest(&config.templates_manifest).unwrap());
    let fewshot = Arc::new(FewshotExamples::load(&config.fewshot).unwrap());
    let mut pipeline_config = PipelineConfig::new(templates.clone(), fewshot);
    pipeline_config.model_id = config.model_id.clone();
    pipeline_config.max_tokens = config.max_tokens;
    pipeline_config.temperatures = config.temperatures;
    let mut builder = FixtureBuilder::new(pipeline_config);
    for seed in ingest_seeds(&config.seeds).unwrap() {
        builder.script_seed(&seed).unwrap();
    }
    let checklist = Checklist::load(&config.checklist).unwrap();
    builder
        .script_judging(
            &checklist,
            templates.get(Stage::EvalWriting).unwrap(),
            templates.get(Stage::EvalNli).unwrap(),
        )
        .unwrap();
    let fixtures_dir = dir.path().join("fixtures");
    builder.write_dir(&fixtures_dir).unwrap();
    let load = || {
        (
            Arc::new(ScriptedLlm::from_file(fixtures_dir.join("llm.jsonl")).unwrap()),
            Arc::new(ScriptedSearch::from_file(fixtures_dir.join("search.jsonl")).unwrap()),
        )
    };

    // run: 3 seeds x 3 modes = 9 traces
    let (llm, search) = load();
    let run = rt
        .block_on(run_experiment(&config, llm.clone(), search))
        .unwrap();
    assert_eq!(run.traces.len(), 9);
    assert!(run.failures.is_empty());
    assert!(run.stats.llm_calls > 0);

    // eval: 9 scorecards; outline reports cover initial + augmented per seed
    let output = rt.block_on(evaluate_run(&config.output_dir, llm)).unwrap();
    assert_eq!(output.scorecards.len(), 9);
    assert_eq!(output.outline_reports.len(), 6);
    for ty in [OutlineType::Initial, OutlineType::Augmented] {
        assert_eq!(
            output
                .outline_reports
                .iter()
                .filter(|r| r.outline_type == ty)
                .count(),
            3
        );
    }

    // reports are byte-stable across two emissions
    for format in [ReportFormat::Tsv, ReportFormat::Markdown] {
        let first: Vec<Vec<u8>> = emit_report(&config.output_dir, format)
            .unwrap()
            .iter()
            .map(|f| std::fs::read(f).unwrap())
            .collect();
        let second: Vec<Vec<u8>> = emit_report(&config.output_dir, format)
            .unwrap()
            .iter()
            .map(|f| std::fs::read(f).unwrap())
            .collect();
        assert_eq!(first, second);
    }

    // warm-cache rerun: zero provider calls even with empty providers
    let baseline: Vec<Vec<u8>> = emit_report(&config.output_dir, ReportFormat::Markdown)
        .unwrap()
        .iter()
        .map(|f| std::fs::read(f).unwrap())
        .collect();
    let rerun = rt
        .block_on(run_experiment(
            &config,
            Arc::new(ScriptedLlm::new()),
            Arc::new(ScriptedSearch::new()),
        ))
        .unwrap();
    assert_eq!(rerun.traces.len(), 9);
    assert_eq!(rerun.stats.llm_calls, 0);
    assert_eq!(rerun.stats.search_calls, 0);

    // the rerun, re-evaluated and re-emitted, reproduces the reports
    let (llm, _) = load();
    rt.block_on(evaluate_run(&config.output_dir, llm)).unwrap();
    let after: Vec<Vec<u8>> = emit_report(&config.output_dir, ReportFormat::Markdown)
        .unwrap()
        .iter()
        .map(|f| std::fs::read(f).unwrap())
        .collect();
    assert_eq!(baseline, after);
}

#[test]
fn acceptance_c08_harness_end_to_end() {
    criterion(
        "C8 3 seeds x 3 modes end to end with stable reports and warm-cache rerun",
        Duration::from_secs(30),
        c08_harness_end_to_end,
    );
}

// ---- C9: NLI alignment ----------------------------------------------------------

fn c09_nli_alignment() {
    use writing_path_core::metrics::nli_prompt;
    use writing_path_core::providers::ScriptedLlm;

    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    let assets = writing_path_core::default_assets_dir();
    let templates = TemplateSet::load_manifest(assets.join("templates/manifest.txt")).unwrap();
    let template = templates.get(Stage::EvalNli).unwrap();

    let outline = Outline::new(vec![
        OutlineSection::new("Arrival", vec!["Airport rail".into(), "Check-in".into()]).unwrap(),
        OutlineSection::new("Lunch", vec!["Markets".into(), "Noodles".into()]).unwrap(),
    ])
    .unwrap();
    let labels = ["entail", "entail", "neutral", "contradict"];
    let mut judge = ScriptedLlm::new();
    for ((header, sub), label) in outline.header_subheader_pairs().iter().zip(labels) {
        judge.script(&nli_prompt(template, header, sub).unwrap(), label);
    }
    let report = rt
        .block_on(nli_alignment(
            &outline,
            &judge,
            template,
            &NliJudgeConfig::default(),
        ))
        .unwrap();
    assert_eq!(report.entailed, 2);
    assert_eq!(report.total, 4);
    assert_eq!(report.score, 0.5);

    // header-only (initial) outlines have no pairs: the error that reports as "-"
    let initial = Outline::new(vec![
        OutlineSection::header_only("Arrival").unwrap(),
        OutlineSection::header_only("Lunch").unwrap(),
    ])
    .unwrap();
    let err = rt
        .block_on(nli_alignment(
            &initial,
            &ScriptedLlm::new(),
            template,
            &NliJudgeConfig::default(),
        ))
        .unwrap_err();
    assert_eq!(err, MetricError::NoPairs);
}

#[test]
fn acceptance_c09_nli_alignment_ratios() {
    criterion(
        "C9 NLI alignment reproduces exact entailment ratios; no-pairs errors",
        Duration::from_secs(5),
        c09_nli_alignment,
    );
}

// ---- C10: whole-suite budget ------------------------------------------------------

#[test]
fn acceptance_c10_all_criteria_offline_within_budget() {
    // every criterion body, sequentially, against the 60-second whole-suite
    // budget; all providers are scripted and the only sockets are loopback
    let started = Instant::now();
    c01_overall_aggregation();
    c02_self_bleu_oracle();
    c03_cooccurrence_oracle();
    c04_topic_diversity();
    c05_kendall_tau();
    c06_pipeline_determinism();
    c07_parser_round_trips();
    c08_harness_end_to_end();
    c09_nli_alignment();
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "criteria took {elapsed:?}, budget 60s"
    );
    println!(
        "[PASS] C10 all criteria completed offline in {} ms",
        elapsed.as_millis()
    );
}
