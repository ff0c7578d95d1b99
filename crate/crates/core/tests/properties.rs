//! Property tests for the simplex math, scoring, and pipeline invariants.

use proptest::prelude::*;

use sumprior::corpus::{self, Dataset, TokenizerConfig, Topic, Vocabulary};
use sumprior::divergence::{self, SmoothingConfig, UnitDistribution};
use sumprior::eval;
use sumprior::scoring::{self, KnowledgeModel, Provenance, ScoringConfig};
use sumprior::summarize;

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n)
}

fn dist_strategy(n: usize) -> impl Strategy<Value = UnitDistribution> {
    weights(n).prop_map(|w| UnitDistribution::from_weights(&w).unwrap())
}

fn text_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-e]{1,3}", 1..30).prop_map(|tokens| tokens.join(" "))
}

proptest! {
    #[test]
    fn kl_nonnegative_and_zero_only_at_equality(
        p in dist_strategy(6),
        q in dist_strategy(6),
    ) {
        let smoothing = SmoothingConfig::default();
        let value = divergence::kl(&p, &q, &smoothing).unwrap();
        prop_assert!(value >= 0.0);
        let self_kl = divergence::kl(&p, &p, &smoothing).unwrap();
        prop_assert!(self_kl.abs() < 1e-12);
        let smoothed_equal = p
            .smoothed(&smoothing)
            .iter()
            .zip(q.smoothed(&smoothing).iter())
            .all(|(a, b)| (a - b).abs() < 1e-9);
        if !smoothed_equal {
            prop_assert!(value > 0.0);
        }
    }

    #[test]
    fn js_is_bounded_and_symmetric(p in dist_strategy(5), q in dist_strategy(5)) {
        let v = divergence::js(&p, &q).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= 2f64.ln() + 1e-12);
        let w = divergence::js(&q, &p).unwrap();
        prop_assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded_by_log_n(p in dist_strategy(7)) {
        let h = divergence::entropy(&p);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= 7f64.ln() + 1e-12);
    }

    #[test]
    fn text_distributions_live_on_the_simplex(text in text_strategy()) {
        let vocab = Vocabulary::from_units(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
        ).unwrap();
        let d = corpus::text_to_distribution(&text, &vocab, &TokenizerConfig::default());
        let sum: f64 = d.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(d.probs().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn vocabulary_construction_is_deterministic(texts in prop::collection::vec(text_strategy(), 1..6)) {
        let topics: Vec<Topic> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Topic {
                id: format!("t{i}"),
                documents: vec![t.clone()],
                reference_summaries: vec![],
                judged_summaries: vec![],
                tags: Default::default(),
            })
            .collect();
        let ds = Dataset::new("p", topics).unwrap();
        let a = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        let b = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        prop_assert_eq!(a.units(), b.units());
    }

    #[test]
    fn theta_is_permutation_invariant(
        s in dist_strategy(5),
        d in dist_strategy(5),
        k in dist_strategy(5),
        perm_seed in 0u64..1000,
    ) {
        let cfg = ScoringConfig::default();
        let mut perm: Vec<usize> = (0..5).collect();
        // Cheap deterministic shuffle from the seed.
        for i in (1..5).rev() {
            let j = (perm_seed as usize).wrapping_mul(31).wrapping_add(i) % (i + 1);
            perm.swap(i, j);
        }
        let apply = |v: &UnitDistribution| {
            UnitDistribution::new(perm.iter().map(|&i| v.probs()[i]).collect()).unwrap()
        };
        let base = scoring::theta_with_k(&s, &d, &k, &cfg).unwrap();
        let permuted = scoring::theta_with_k(&apply(&s), &apply(&d), &apply(&k), &cfg).unwrap();
        prop_assert!((base - permuted).abs() < 1e-12);
    }

    #[test]
    fn ranked_summaries_are_a_permutation(texts in prop::collection::vec(text_strategy(), 1..6)) {
        let vocab = Vocabulary::from_units(
            vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
        ).unwrap();
        let topic = Topic {
            id: "t".into(),
            documents: vec!["a b c d e".into()],
            reference_summaries: texts.clone(),
            judged_summaries: vec![],
            tags: Default::default(),
        };
        let model = scoring::uniform_model(&vocab);
        let ranked = scoring::rank_summaries(
            &topic,
            &scoring::Scorer::Theta(model),
            &vocab,
            &TokenizerConfig::default(),
            &ScoringConfig::default(),
        )
        .unwrap();
        let mut indices: Vec<usize> = ranked.iter().map(|r| r.0).collect();
        indices.sort_unstable();
        let expected: Vec<usize> = (0..texts.len()).collect();
        prop_assert_eq!(indices, expected);
        // Scores are in descending order.
        for pair in ranked.windows(2) {
            prop_assert!(pair[0].1 >= pair[1].1);
        }
    }

    #[test]
    fn mean_rank_stays_in_range(
        n_refs in 1usize..4,
        n_sys in 1usize..6,
        seed in 0u64..500,
    ) {
        let units = vec!["a".into(), "b".into(), "c".into()];
        let vocab = Vocabulary::from_units(units).unwrap();
        let words = ["a", "b", "c"];
        let mk = |i: u64| -> String {
            (0..6).map(|j| words[((seed + i * 7 + j) % 3) as usize]).collect::<Vec<_>>().join(" ")
        };
        let topic = Topic {
            id: "t".into(),
            documents: vec!["a b c a b c".into()],
            reference_summaries: (0..n_refs as u64).map(mk).collect(),
            judged_summaries: (0..n_sys as u64)
                .map(|i| corpus::JudgedSummary {
                    text: mk(i + 100),
                    score: i as f64,
                    annotator: None,
                })
                .collect(),
            tags: Default::default(),
        };
        let model = scoring::uniform_model(&vocab);
        let mr = eval::mean_reference_rank(
            &topic,
            &scoring::Scorer::Theta(model),
            &vocab,
            &TokenizerConfig::default(),
            &ScoringConfig::default(),
        )
        .unwrap();
        let total = (n_refs + n_sys) as f64;
        prop_assert!(mr >= 1.0 && mr <= total);
    }

    #[test]
    fn ms_u_never_sees_documents(
        doc_a in text_strategy(),
        doc_b in text_strategy(),
        summary in text_strategy(),
    ) {
        use sumprior::closed_form::{infer_ms_u, ClosedFormConfig, GammaSpec, Prior};
        let vocab = Vocabulary::from_units(
            vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
        ).unwrap();
        let mk = |doc: &str| {
            Dataset::new(
                "p",
                vec![Topic {
                    id: "t".into(),
                    documents: vec![doc.to_string()],
                    reference_summaries: vec![summary.clone()],
                    judged_summaries: vec![],
                    tags: Default::default(),
                }],
            )
            .unwrap()
        };
        let cfg = ClosedFormConfig {
            gamma: GammaSpec::Fixed(1.5),
            prior: Prior::Uniform,
            smoothing: SmoothingConfig::default(),
        };
        let tok = TokenizerConfig::default();
        let ka = infer_ms_u(&mk(&doc_a), &vocab, &tok, &cfg).unwrap();
        let kb = infer_ms_u(&mk(&doc_b), &vocab, &tok, &cfg).unwrap();
        prop_assert_eq!(ka.k.probs(), kb.k.probs());
        let sum: f64 = ka.k.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn selections_respect_the_budget(
        sentence_lens in prop::collection::vec(2usize..7, 2..8),
        budget in 3usize..20,
        seed in 0u64..100,
    ) {
        let units: Vec<String> = vec!["alpha".into(), "beta".into(), "gamma".into()];
        let vocab = Vocabulary::from_units(units.clone()).unwrap();
        let words = ["alpha", "beta", "gamma"];
        let text = sentence_lens
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let mut s: Vec<String> = (0..len)
                    .map(|j| words[(i + j) % 3].to_string())
                    .collect();
                s[0] = {
                    let mut c = s[0].chars();
                    c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap()
                };
                format!("{}.", s.join(" "))
            })
            .collect::<Vec<_>>()
            .join(" ");
        let topic = Topic {
            id: "t".into(),
            documents: vec![text],
            reference_summaries: vec![],
            judged_summaries: vec![],
            tags: Default::default(),
        };
        let pool = summarize::split_sentences(&topic, &vocab, &TokenizerConfig::default()).unwrap();
        let d = UnitDistribution::uniform(3);
        let model = KnowledgeModel::new(
            vocab,
            UnitDistribution::from_weights(&[0.5, 0.3, 0.2]).unwrap(),
            Provenance::new("test"),
        )
        .unwrap();
        let cfg = ScoringConfig::default();
        let greedy = summarize::greedy_summarize(&pool, &d, &model, budget, &cfg);
        prop_assert!(summarize::selection_words(&pool, &greedy) <= budget);
        let genetic = summarize::genetic_summarize(
            &pool,
            &d,
            &model,
            &summarize::GeneticConfig {
                population: 8,
                generations: 10,
                seed,
                length_budget: budget,
                ..Default::default()
            },
            &cfg,
        )
        .unwrap();
        prop_assert!(summarize::selection_words(&pool, &genetic) <= budget);
    }

    #[test]
    fn dataset_jsonl_roundtrip(texts in prop::collection::vec(text_strategy(), 1..4), score in -10.0f64..10.0) {
        let topics: Vec<Topic> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Topic {
                id: format!("t{i}"),
                documents: vec![t.clone()],
                reference_summaries: vec![t.clone()],
                judged_summaries: vec![corpus::JudgedSummary {
                    text: t.clone(),
                    score,
                    annotator: Some("a".into()),
                }],
                tags: Default::default(),
            })
            .collect();
        let ds = Dataset::new("roundtrip", topics).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        corpus::save_dataset(&ds, &path).unwrap();
        let loaded = corpus::load_dataset(&path).unwrap();
        prop_assert_eq!(loaded.topics, ds.topics);
    }
}

/// The analytic optimum beats dense random search on every instance.
#[test]
fn optimal_summary_beats_ten_thousand_random_points() {
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let cfg = ScoringConfig::default();
    for trial in 0..8 {
        let n = 3 + trial % 8;
        let dw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let kw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let d = UnitDistribution::from_weights(&dw).unwrap();
        let k = UnitDistribution::from_weights(&kw).unwrap();
        let star = divergence::optimal_summary_distribution(&d, &k, &cfg).unwrap();
        let best = scoring::theta_with_k(&star, &d, &k, &cfg).unwrap();
        for _ in 0..10_000 {
            let sw: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-6..1.0)).collect();
            let s = UnitDistribution::from_weights(&sw).unwrap();
            let val = scoring::theta_with_k(&s, &d, &k, &cfg).unwrap();
            assert!(val <= best + 1e-9, "n={n}: sampled {val} above optimum {best}");
        }
    }
}

/// Identical seeds reproduce identical fold assignments and reports.
#[test]
fn cross_validation_reproduces_bit_for_bit() {
    use sumprior::eval::{cross_validate, Algorithm, CvConfigs};
    use sumprior::synth::{generate, SynthConfig};
    let out = generate(&SynthConfig {
        vocab_size: 12,
        n_topics: 8,
        n_system_summaries_per_topic: 4,
        tokens_per_document: 150,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let configs = CvConfigs {
        train: sumprior::train::TrainConfig {
            epochs: 20,
            ..Default::default()
        },
        ..Default::default()
    };
    let a = cross_validate(&out.dataset, Algorithm::HPl, 4, &configs, 11).unwrap();
    let b = cross_validate(&out.dataset, Algorithm::HPl, 4, &configs, 11).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = cross_validate(&out.dataset, Algorithm::HPl, 4, &configs, 12).unwrap();
    assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
}

/// Averaging noisy models moves them closer to the center in expectation.
#[test]
fn averaging_reduces_divergence_statistically() {
    use sumprior::analysis::averaging_curve;
    use sumprior::synth::{generate, perturbed_knowledge, SynthConfig};
    let out = generate(&SynthConfig {
        vocab_size: 15,
        n_topics: 2,
        n_system_summaries_per_topic: 2,
        tokens_per_document: 100,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    let smoothing = SmoothingConfig::default();
    let mut at_max_below_at_one = 0;
    for seed in 0..20u64 {
        let models: Vec<KnowledgeModel> = (0..6)
            .map(|i| perturbed_knowledge(&out.k_star, 0.6, seed * 100 + i).unwrap())
            .collect();
        let curve = averaging_curve(&models, &out.k_star, 12, seed, &smoothing).unwrap();
        if curve.last().unwrap().mean_kl < curve[0].mean_kl {
            at_max_below_at_one += 1;
        }
    }
    assert!(
        at_max_below_at_one >= 19,
        "averaging helped in only {at_max_below_at_one}/20 runs"
    );
}
