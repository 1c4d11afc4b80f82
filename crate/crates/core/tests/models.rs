mod common;

use common::{fixture_dir, simplex_error};
use miner_core::pipeline::{describe, run_pipeline, Mode, PipelineConfig, RunManifest};
use miner_core::synthetic::{planted_corpus, PlantedParams};
use miner_core::textprep::{build_dtm, build_vocabulary, TokenizedDocument};
use miner_core::topicmodel::{
    fit_lda_gibbs, fit_spectral, held_out_log_likelihood, match_topics, GibbsOptions, InferOptions,
};
use miner_core::Error;
use proptest::prelude::*;

fn small_planted(seed: u64) -> miner_core::synthetic::PlantedCorpus {
    planted_corpus(&PlantedParams {
        n_terms: 200,
        n_topics: 5,
        n_docs: 1000,
        doc_len: 80,
        ..PlantedParams::benchmark(seed)
    })
    .unwrap()
}

#[test]
fn gibbs_and_spectral_agree_on_planted_topics() {
    let corpus = small_planted(3);
    let train = build_dtm(&corpus.docs[..800], &corpus.vocab).unwrap();
    let test = build_dtm(&corpus.docs[800..], &corpus.vocab).unwrap();
    let spectral = fit_spectral(&train, 5, 3).unwrap();
    let opts = GibbsOptions {
        iterations: 300,
        ..GibbsOptions::defaults_for(5)
    };
    let gibbs = fit_lda_gibbs(&train, 5, &opts, 3).unwrap();
    let infer = InferOptions::default();
    let (ll_s, ll_g) = (
        held_out_log_likelihood(&spectral.beta, &test, &infer),
        held_out_log_likelihood(&gibbs.beta, &test, &infer),
    );
    assert!(((ll_g - ll_s) / ll_s).abs() < 0.05, "held-out per-token log-likelihood {ll_g} vs {ll_s}");
    for (name, beta) in [("spectral", &spectral.beta), ("gibbs", &gibbs.beta)] {
        let worst = match_topics(&corpus.beta, beta).iter().map(|m| m.2).fold(1.0, f64::min);
        assert!(worst > 0.9, "{name}: weakest planted match {worst}");
    }
    let worst = match_topics(&spectral.beta, &gibbs.beta).iter().map(|m| m.2).fold(1.0, f64::min);
    assert!(worst > 0.85, "methods disagree: {worst}");
}

#[test]
fn fits_repeat_exactly_for_a_seed() {
    let corpus = small_planted(4);
    assert_eq!(fit_spectral(&corpus.dtm, 5, 1).unwrap(), fit_spectral(&corpus.dtm, 5, 1).unwrap());
    let opts = GibbsOptions {
        iterations: 20,
        ..GibbsOptions::defaults_for(5)
    };
    let a = fit_lda_gibbs(&corpus.dtm, 5, &opts, 9).unwrap();
    assert_eq!(a, fit_lda_gibbs(&corpus.dtm, 5, &opts, 9).unwrap());
    assert_ne!(a.beta, fit_lda_gibbs(&corpus.dtm, 5, &opts, 10).unwrap().beta);
}

fn corpus_strategy() -> impl Strategy<Value = Vec<TokenizedDocument>> {
    let doc = prop::collection::vec(0usize..30, 2..25);
    prop::collection::vec(doc, 8..40).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, toks)| TokenizedDocument {
                doc_id: format!("d{i}"),
                stems: Vec::new(),
                bigrams: toks.into_iter().map(|t| format!("t{t:02}")).collect(),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_fit_stays_on_the_simplex(docs in corpus_strategy(), k in 2usize..5, seed in 0u64..1000) {
        let vocab = build_vocabulary(&docs, 1, 1).unwrap();
        let dtm = build_dtm(&docs, &vocab).unwrap();
        let opts = GibbsOptions { iterations: 5, ..GibbsOptions::defaults_for(k) };
        let mut models = vec![fit_lda_gibbs(&dtm, k, &opts, seed).unwrap()];
        match fit_spectral(&dtm, k, seed) {
            Ok(m) => models.push(m),
            Err(Error::TooFewCandidates { .. }) => {}
            Err(e) => panic!("{e}"),
        }
        for m in models {
            for mat in [&m.beta, &m.theta] {
                let (dev, min) = simplex_error(mat);
                prop_assert!(dev <= 1e-8 && min >= 0.0, "{:?}: {} {}", m.method, dev, min);
            }
            prop_assert!((m.relative_frequency().iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        }
    }
}

fn fixture_config(out: &std::path::Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::from_file(&fixture_dir().join("pipeline.toml")).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

#[test]
fn manifest_tracks_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_pipeline(&fixture_config(dir.path())).unwrap();
    let names: Vec<&str> = manifest.artifacts.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["corpus", "dtm", "coherence", "model", "network", "profiles", "link_stats"]);
    assert_eq!((manifest.mode, manifest.k), (Mode::Sweep, 6));
    assert_eq!(RunManifest::load(dir.path()).unwrap().artifacts, manifest.artifacts);
    assert!(manifest.verify(dir.path()).unwrap().is_empty());
    assert!(describe(&manifest).lines().any(|l| l.starts_with("model") && l.ends_with("model/beta.csv")));

    let beta = dir.path().join("model").join("beta.csv");
    std::fs::write(&beta, "tampered\n").unwrap();
    assert_eq!(manifest.verify(dir.path()).unwrap(), ["model/beta.csv"]);
}

#[test]
fn stage_failures_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config(dir.path());
    cfg.prep.min_docs = 100_000;
    match run_pipeline(&cfg) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "prep"),
        other => panic!("expected a prep failure, got {other:?}"),
    }
}
