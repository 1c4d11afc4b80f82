//! Stage functions shared by the CLI subcommands, and the end-to-end run.

mod config;
mod report;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{
    filter_corpus, read_jsonl, write_jsonl, Article, CorpusManifest, CrawlConfig, Crawler, FixtureTransport,
    HttpTransport, RawUserProfile, Transport,
};
use crate::profiles::{
    anonymize_profile, default_intersections, external_overlap, identity_pairs, link_stats, parse_external_pairs,
    parse_profile, LinkStatsTable, Overlap, UserProfile,
};
use crate::selection::{sweep_k, CoherenceReport, SweepOptions};
use crate::textprep::{PreparedCorpus, TokenizedDocument};
use crate::topicmodel::{fit_lda_gibbs, fit_spectral, GibbsOptions, Method, TopicModel};
use crate::topicnet::{export_graph, parse_annotations, Annotation, ExportFormat, TopicGraph};

pub use config::{
    CoherenceConfig, Mode, ModelConfig, NetworkConfig, PipelineConfig, PrepConfig, ProfilesConfig, SourceConfig,
};
pub use report::{render_report, ReportInputs};

fn read_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// One tag per line; blank lines and `#` comments are ignored.
pub fn read_tags(path: &Path) -> Result<Vec<String>> {
    if !path.is_file() {
        return Err(Error::Config(format!("tags file {} does not exist", path.display())));
    }
    Ok(read_file(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect())
}

pub fn make_transport(
    base_url: Option<&str>,
    fixture: Option<&Path>,
    cache_dir: Option<&Path>,
) -> Result<Arc<dyn Transport>> {
    match (base_url, fixture) {
        (_, Some(dir)) => {
            if !dir.is_dir() {
                return Err(Error::Config(format!("fixture directory {} does not exist", dir.display())));
            }
            Ok(Arc::new(FixtureTransport::new(dir)))
        }
        (Some(url), None) => Ok(Arc::new(HttpTransport::new(url).with_cache_dir(cache_dir.map(Path::to_path_buf)))),
        (None, None) => Err(Error::Config("either a base URL or a fixture directory is required".into())),
    }
}

pub fn crawler(transport: Arc<dyn Transport>, rate: f64) -> Result<Crawler> {
    Crawler::new(
        transport,
        CrawlConfig {
            rate_limit: rate,
            ..CrawlConfig::default()
        },
    )
}

/// Crawl every tag, deduplicate and keep articles in `language`.
pub fn ingest_articles(crawler: &Crawler, tags: &[String], language: &str) -> Result<(Vec<Article>, CorpusManifest)> {
    let outcome = crawler.crawl_articles(tags)?;
    let (articles, manifest) = filter_corpus(outcome.articles, language, &crawler.source(), crawler.captured_at());
    log::info!(
        "ingest: {} fetched, {} after dedup, {} kept",
        manifest.articles_fetched,
        manifest.articles_after_dedup,
        manifest.articles_after_language_filter
    );
    Ok((articles, manifest))
}

/// Distinct authors of `articles`, sorted.
pub fn authors(articles: &[Article]) -> Vec<String> {
    articles
        .iter()
        .map(|a| a.author_username.clone())
        .filter(|u| !u.is_empty())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Parse raw payloads; unparseable profiles are logged and dropped.
pub fn parse_profiles(raw: &[RawUserProfile]) -> Vec<UserProfile> {
    raw.iter()
        .filter_map(|r| match parse_profile(r) {
            Ok(p) => Some(p),
            Err(e) => {
                log::warn!("dropping profile: {e}");
                None
            }
        })
        .collect()
}

/// Read profiles saved either as parsed records or as raw fetched payloads.
pub fn load_profiles(path: &Path) -> Result<Vec<UserProfile>> {
    if let Ok(parsed) = read_jsonl::<UserProfile>(path) {
        return Ok(parsed);
    }
    Ok(parse_profiles(&read_jsonl::<RawUserProfile>(path)?))
}

pub fn write_corpus(path: &Path, articles: &[Article], manifest: &CorpusManifest) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_jsonl(path, articles)?;
    let manifest_path = corpus_manifest_path(path);
    write_file(&manifest_path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(vec![path.to_path_buf(), manifest_path])
}

/// `corpus.jsonl` → `corpus.manifest.json`.
pub fn corpus_manifest_path(corpus: &Path) -> PathBuf {
    corpus.with_extension("manifest.json")
}

pub fn read_corpus(path: &Path) -> Result<Vec<Article>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    read_jsonl(path)
}

/// Tokenize article bodies in parallel, keeping corpus order.
pub fn tokenize_corpus(articles: &[Article]) -> Vec<TokenizedDocument> {
    articles
        .par_iter()
        .map(|a| TokenizedDocument::from_text(a.id.clone(), &a.text()))
        .collect()
}

pub fn fit_model(
    prepared: &PreparedCorpus,
    k: usize,
    method: Method,
    seed: u64,
    gibbs_iterations: Option<usize>,
) -> Result<TopicModel> {
    match method {
        Method::Spectral => fit_spectral(&prepared.dtm, k, seed),
        Method::Gibbs => {
            let mut opts = GibbsOptions::defaults_for(k);
            if let Some(n) = gibbs_iterations {
                opts.iterations = n;
            }
            fit_lda_gibbs(&prepared.dtm, k, &opts, seed)
        }
    }
}

pub fn sweep(
    prepared: &PreparedCorpus,
    docs: &[TokenizedDocument],
    grid: &[usize],
    seed: u64,
    coherence: &CoherenceConfig,
) -> Result<CoherenceReport> {
    let opts = SweepOptions {
        window: coherence.window,
        top_n: coherence.top_n,
        ..SweepOptions::default()
    };
    sweep_k(&prepared.dtm, docs, &prepared.vocab.terms, grid, seed, &opts)
}

pub fn read_annotations(path: Option<&Path>) -> Result<Vec<(usize, Annotation)>> {
    match path {
        Some(p) => parse_annotations(&read_file(p)?, p),
        None => Ok(Vec::new()),
    }
}

/// Default node labels `T1`, `T2`, ….
pub fn topic_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("T{i}")).collect()
}

pub fn topic_graph(model: &TopicModel, annotations: &[(usize, Annotation)]) -> Result<TopicGraph> {
    TopicGraph::build(&model.theta, model.relative_frequency(), topic_labels(model.k), annotations)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub table: LinkStatsTable,
    pub overlap: Option<Overlap>,
}

impl LinkReport {
    pub fn to_markdown(&self) -> String {
        let mut out = self.table.to_markdown();
        if let Some(o) = &self.overlap {
            out.push('\n');
            out.push_str(&o.to_markdown());
        }
        out
    }

    /// Write the Markdown table to `path` and the CSV next to it.
    pub fn save(&self, path: &Path) -> Result<Vec<PathBuf>> {
        let csv = path.with_extension("csv");
        write_file(path, self.to_markdown())?;
        write_file(&csv, self.table.to_csv())?;
        Ok(vec![path.to_path_buf(), csv])
    }
}

/// Table statistics and, given an external pair list, the overlap with it.
/// Computed on clear identities; hashing applies only to what is written.
pub fn link_report(profiles: &[UserProfile], external: Option<&Path>) -> Result<LinkReport> {
    let table = link_stats(profiles, &default_intersections())?;
    let overlap = match external {
        Some(p) => Some(external_overlap(&identity_pairs(profiles), &parse_external_pairs(&read_file(p)?, p)?)?),
        None => None,
    };
    Ok(LinkReport { table, overlap })
}

pub fn anonymize_all(profiles: &[UserProfile], salt: &str) -> Vec<UserProfile> {
    profiles.iter().map(|p| anonymize_profile(p, salt)).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub files: Vec<FileHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub mode: Mode,
    pub k: usize,
    pub artifacts: Vec<ArtifactRecord>,
    pub stages: Vec<StageTiming>,
    pub corpus: CorpusManifest,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn artifact(&self, name: &str) -> Option<&ArtifactRecord> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Artifacts whose files no longer hash to the recorded values.
    pub fn verify(&self, out_dir: &Path) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for a in &self.artifacts {
            for f in &a.files {
                let p = out_dir.join(&f.path);
                if !p.exists() || sha256_file(&p)? != f.sha256 {
                    stale.push(f.path.clone());
                }
            }
        }
        Ok(stale)
    }

    pub fn load(out_dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&read_file(&out_dir.join(Self::FILE_NAME))?)?)
    }
}

/// Names and files of every artifact a run writes, relative to the output directory.
pub struct Layout {
    pub out_dir: PathBuf,
}

impl Layout {
    pub fn corpus(&self) -> PathBuf {
        self.out_dir.join("corpus.jsonl")
    }
    pub fn dtm_prefix(&self) -> PathBuf {
        self.out_dir.join("dtm")
    }
    pub fn coherence(&self) -> PathBuf {
        self.out_dir.join("coherence.csv")
    }
    pub fn model_dir(&self) -> PathBuf {
        self.out_dir.join("model")
    }
    pub fn network(&self, format: ExportFormat) -> PathBuf {
        self.out_dir.join(match format {
            ExportFormat::GraphMl => "network.graphml",
            ExportFormat::Dot => "network.dot",
            ExportFormat::Svg => "network.svg",
        })
    }
    pub fn profiles(&self) -> PathBuf {
        self.out_dir.join("profiles.jsonl")
    }
    pub fn link_stats(&self) -> PathBuf {
        self.out_dir.join("link_stats.md")
    }
    pub fn report(&self) -> PathBuf {
        self.out_dir.join("report.md")
    }
}

struct Recorder<'a> {
    out_dir: &'a Path,
    artifacts: Vec<ArtifactRecord>,
    stages: Vec<StageTiming>,
}

impl Recorder<'_> {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        log::info!("stage {name}");
        let out = f().map_err(|e| Error::Stage {
            stage: name.to_string(),
            source: Box::new(e),
        })?;
        self.stages.push(StageTiming {
            stage: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn record(&mut self, name: &str, files: &[PathBuf]) -> Result<()> {
        let files = files
            .iter()
            .map(|p| {
                let rel = p.strip_prefix(self.out_dir).unwrap_or(p);
                Ok(FileHash {
                    path: rel.to_string_lossy().replace('\\', "/"),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<_>>()?;
        self.artifacts.push(ArtifactRecord {
            name: name.to_string(),
            files,
        });
        Ok(())
    }
}

/// Run ingest → prep → (sweep) → fit → network → profiles and write
/// `manifest.json` into the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest> {
    config.validate()?;
    let format = config.export_format()?;
    let tags = read_tags(config.source.tags_file.as_deref().expect("validated"))?;
    let annotations = read_annotations(config.network.annotations.as_deref())?;
    let layout = Layout {
        out_dir: config.out_dir.clone(),
    };
    std::fs::create_dir_all(&layout.out_dir).map_err(|e| Error::io(&layout.out_dir, e))?;
    let mut rec = Recorder {
        out_dir: &layout.out_dir,
        artifacts: Vec::new(),
        stages: Vec::new(),
    };
    let s = &config.source;
    let transport = make_transport(s.base_url.as_deref(), s.fixture.as_deref(), s.cache_dir.as_deref())?;
    let crawler = crawler(transport, s.rate)?;

    let (articles, corpus_manifest) = rec.stage("ingest", || {
        let (articles, manifest) = ingest_articles(&crawler, &tags, &s.language)?;
        if articles.is_empty() {
            return Err(Error::Ingest("no articles left after filtering".into()));
        }
        Ok((articles, manifest))
    })?;
    let files = write_corpus(&layout.corpus(), &articles, &corpus_manifest)?;
    rec.record("corpus", &files)?;

    let (prepared, docs) = rec.stage("prep", || {
        let docs = tokenize_corpus(&articles);
        let prepared = PreparedCorpus::build(&docs, config.prep.min_docs, config.prep.min_total)?;
        Ok((prepared, docs))
    })?;
    let files = prepared.save(&layout.dtm_prefix())?;
    rec.record("dtm", &files)?;

    let m = &config.model;
    let k = match m.mode {
        Mode::Fit => m.k,
        Mode::Sweep => {
            let report = rec.stage("sweep", || sweep(&prepared, &docs, &m.grid()?, m.seed, &config.coherence))?;
            write_file(&layout.coherence(), report.to_csv())?;
            rec.record("coherence", &[layout.coherence()])?;
            report.chosen_k
        }
    };

    let model = rec.stage("fit", || fit_model(&prepared, k, m.method, m.seed, m.gibbs_iterations))?;
    let files = model.save(&layout.model_dir(), &prepared.vocab)?;
    rec.record("model", &files)?;

    let graph = rec.stage("network", || topic_graph(&model, &annotations))?;
    write_file(&layout.network(format), export_graph(&graph, format, m.seed))?;
    rec.record("network", &[layout.network(format)])?;

    let profiles = rec.stage("profiles", || {
        let raw = crawler.fetch_profiles(&authors(&articles))?;
        Ok(parse_profiles(&raw))
    })?;
    let written = match (&config.profiles.hash_identities, &config.profiles.salt) {
        (true, Some(salt)) => anonymize_all(&profiles, salt),
        _ => profiles.clone(),
    };
    write_jsonl(&layout.profiles(), &written)?;
    rec.record("profiles", &[layout.profiles()])?;

    let links = rec.stage("link_stats", || link_report(&profiles, config.profiles.external.as_deref()))?;
    let files = links.save(&layout.link_stats())?;
    rec.record("link_stats", &files)?;

    let manifest = RunManifest {
        seed: m.seed,
        mode: m.mode,
        k,
        artifacts: rec.artifacts,
        stages: rec.stages,
        corpus: corpus_manifest,
    };
    write_file(
        &layout.out_dir.join(RunManifest::FILE_NAME),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// Human-readable one-line summary per artifact.
pub fn describe(manifest: &RunManifest) -> String {
    let mut out = String::new();
    for a in &manifest.artifacts {
        for f in &a.files {
            let _ = writeln!(out, "{:<11} {} {}", a.name, &f.sha256[..12], f.path);
        }
    }
    out
}
