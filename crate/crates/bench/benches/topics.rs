use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, SamplingMode};
use miner_core::selection::{cv_coherence, DEFAULT_TOP_N, DEFAULT_WINDOW};
use miner_core::synthetic::{planted_corpus, PlantedParams};
use miner_core::topicmodel::{
    anchor_candidates, build_cooccurrence, find_anchors, infer_theta, recover_topic_word, InferOptions,
    RecoverOptions,
};
use std::hint::black_box;

fn spectral(c: &mut Criterion) {
    let corpus = planted_corpus(&PlantedParams::benchmark(0)).unwrap();
    let q = build_cooccurrence(&corpus.dtm).unwrap();
    let candidates = anchor_candidates(&corpus.dtm, &q, 1);
    let anchors = find_anchors(&q, 10, 0, &candidates).unwrap();
    let recovery = recover_topic_word(&q, &anchors, &RecoverOptions::default()).unwrap();

    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    g.sampling_mode(SamplingMode::Flat);
    g.bench_function("cooccurrence V=500 D=5000", |b| b.iter(|| build_cooccurrence(black_box(&corpus.dtm)).unwrap()));
    g.bench_function("anchors K=10", |b| b.iter(|| find_anchors(black_box(&q), 10, 0, &candidates).unwrap()));
    g.bench_function("recover K=10", |b| {
        b.iter(|| recover_topic_word(black_box(&q), &anchors, &RecoverOptions::default()).unwrap())
    });
    g.bench_function("infer theta K=10", |b| {
        b.iter(|| infer_theta(black_box(&corpus.dtm), &recovery.beta, &InferOptions::default()))
    });
    g.finish();

    let mut g = c.benchmark_group("coherence");
    g.sample_size(10);
    for docs in [500, 5000] {
        g.bench_with_input(BenchmarkId::new("cv K=10", docs), &docs, |b, &n| {
            b.iter(|| {
                cv_coherence(&corpus.beta, &corpus.vocab.terms, &corpus.docs[..n], DEFAULT_TOP_N, DEFAULT_WINDOW)
                    .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, spectral);
criterion_main!(benches);
