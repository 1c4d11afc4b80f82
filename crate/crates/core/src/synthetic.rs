//! Synthetic data with known ground truth: planted topic corpora and
//! profile populations with prescribed link counts.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::profiles::{Platform, UserProfile};
use crate::textprep::{build_dtm, DocTermMatrix, TokenizedDocument, Vocabulary};

/// Parameters of an anchor-separable planted topic model.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedParams {
    pub n_terms: usize,
    pub n_topics: usize,
    pub n_docs: usize,
    pub doc_len: usize,
    /// Words that belong to exactly one topic, per topic.
    pub anchors_per_topic: usize,
    /// Probability mass each topic puts on its own anchor words.
    pub anchor_mass: f64,
    /// Symmetric Dirichlet parameter for document-topic proportions.
    pub doc_topic_alpha: f64,
    /// Topics each non-anchor word is shared between.
    pub topics_per_word: usize,
    pub seed: u64,
}

impl PlantedParams {
    /// V=500, K=10, D=5000, 100 tokens per document.
    pub fn benchmark(seed: u64) -> Self {
        PlantedParams {
            n_terms: 500,
            n_topics: 10,
            n_docs: 5000,
            doc_len: 100,
            anchors_per_topic: 5,
            anchor_mass: 0.3,
            doc_topic_alpha: 0.1,
            topics_per_word: 2,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub beta: Array2<f64>,
    pub theta: Array2<f64>,
    /// Anchor word indices of each topic.
    pub anchors: Vec<Vec<usize>>,
    pub vocab: Vocabulary,
    /// Token streams; each token is one vocabulary term.
    pub docs: Vec<TokenizedDocument>,
    pub dtm: DocTermMatrix,
}

pub fn term_name(i: usize) -> String {
    format!("w{i:05}")
}

fn dirichlet(rng: &mut impl Rng, alpha: f64, k: usize) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha > 0");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return draws.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Draw a planted β (anchor words exclusive to one topic, every other word
/// shared by a few random topics), document mixtures θ ~ Dirichlet, and
/// token streams from them.
pub fn planted_corpus(p: &PlantedParams) -> Result<PlantedCorpus> {
    let (v, k) = (p.n_terms, p.n_topics);
    if k < 1 || p.anchors_per_topic == 0 || v <= k * p.anchors_per_topic {
        return Err(Error::Config("planted model needs V > K × anchors_per_topic".into()));
    }
    if !(0.0..=1.0).contains(&p.anchor_mass) || p.doc_topic_alpha <= 0.0 {
        return Err(Error::Config("anchor_mass must lie in [0, 1] and alpha be positive".into()));
    }
    if !(1..=k).contains(&p.topics_per_word) {
        return Err(Error::Config("topics_per_word must lie in 1..=K".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let order = sample(&mut rng, v, v).into_vec();
    let n_anchor = k * p.anchors_per_topic;
    let anchors: Vec<Vec<usize>> = (0..k)
        .map(|t| {
            let mut a = order[t * p.anchors_per_topic..(t + 1) * p.anchors_per_topic].to_vec();
            a.sort_unstable();
            a
        })
        .collect();

    let mut beta = Array2::<f64>::zeros((k, v));
    for (t, words) in anchors.iter().enumerate() {
        for &w in words {
            beta[[t, w]] = rng.random_range(0.5..1.5);
        }
    }
    let mut shared = Array2::<f64>::zeros((k, v));
    for &w in &order[n_anchor..] {
        for t in sample(&mut rng, k, p.topics_per_word) {
            shared[[t, w]] = rng.random_range(0.5..1.5);
        }
    }
    for t in 0..k {
        let a_sum: f64 = beta.row(t).sum();
        let s_sum: f64 = shared.row(t).sum();
        let (a_mass, s_mass) = if s_sum > 0.0 { (p.anchor_mass, 1.0 - p.anchor_mass) } else { (1.0, 0.0) };
        for w in 0..v {
            beta[[t, w]] = beta[[t, w]] / a_sum * a_mass
                + if s_sum > 0.0 { shared[[t, w]] / s_sum * s_mass } else { 0.0 };
        }
    }

    let word_pickers: Vec<WeightedIndex<f64>> = beta
        .rows()
        .into_iter()
        .map(|r| WeightedIndex::new(r.iter().copied()).expect("topic row has mass"))
        .collect();
    let names: Vec<String> = (0..v).map(term_name).collect();
    let mut theta = Array2::<f64>::zeros((p.n_docs, k));
    let mut docs = Vec::with_capacity(p.n_docs);
    for d in 0..p.n_docs {
        let mix = dirichlet(&mut rng, p.doc_topic_alpha, k);
        theta.row_mut(d).assign(&ndarray::Array1::from_vec(mix.clone()));
        let topic_picker = WeightedIndex::new(&mix).expect("mixture has mass");
        let tokens: Vec<String> = (0..p.doc_len)
            .map(|_| {
                let t = topic_picker.sample(&mut rng);
                names[word_pickers[t].sample(&mut rng)].clone()
            })
            .collect();
        docs.push(TokenizedDocument {
            doc_id: format!("doc{d:05}"),
            stems: Vec::new(),
            bigrams: tokens,
        });
    }

    let mut df = vec![0usize; v];
    let mut tf = vec![0usize; v];
    for doc in &docs {
        let mut seen = vec![false; v];
        for tok in &doc.bigrams {
            let i: usize = tok[1..].parse().expect("generated name");
            tf[i] += 1;
            if !std::mem::replace(&mut seen[i], true) {
                df[i] += 1;
            }
        }
    }
    let vocab = Vocabulary::from_parts(names, df, tf, 1, 1)?;
    let dtm = build_dtm(&docs, &vocab)?;
    Ok(PlantedCorpus {
        beta,
        theta,
        anchors,
        vocab,
        docs,
        dtm,
    })
}

/// How many users link exactly each combination of platforms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkagePopulation {
    pub regions: BTreeMap<BTreeSet<Platform>, usize>,
    /// Additional platforms, each given to the first `n` users in order.
    pub extra: Vec<(Platform, usize)>,
    /// Users (among those linking GitHub) with a pinned repository.
    pub pinned: usize,
}

impl LinkagePopulation {
    pub fn add(&mut self, platforms: &[Platform], users: usize) -> &mut Self {
        *self.regions.entry(platforms.iter().copied().collect()).or_default() += users;
        self
    }

    pub fn total(&self) -> usize {
        self.regions.values().sum()
    }

    /// Materialise one profile per user; handles are `user00000`, `user00001`, ….
    pub fn profiles(&self) -> Result<Vec<UserProfile>> {
        let mut out = Vec::with_capacity(self.total());
        for (platforms, &n) in &self.regions {
            for _ in 0..n {
                let handle = format!("user{:05}", out.len());
                out.push(UserProfile {
                    links: platforms.iter().map(|&p| (p, p.profile_url(&handle))).collect(),
                    username: handle,
                    joined_at: None,
                    pinned_repos: Vec::new(),
                    post_count: 1,
                    comment_count: 0,
                });
            }
        }
        for &(p, n) in &self.extra {
            if n > out.len() {
                return Err(Error::Config(format!("{n} users requested for {p:?} but only {} exist", out.len())));
            }
            for u in &mut out[..n] {
                let url = p.profile_url(&u.username);
                u.links.entry(p).or_insert(url);
            }
        }
        let mut remaining = self.pinned;
        for u in out.iter_mut().filter(|u| u.has(Platform::Github)) {
            if remaining == 0 {
                break;
            }
            u.pinned_repos.push(format!("https://github.com/{}/project", u.username));
            remaining -= 1;
        }
        if remaining > 0 {
            return Err(Error::Config("more pinned repositories than GitHub users".into()));
        }
        Ok(out)
    }
}
