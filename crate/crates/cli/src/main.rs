use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use miner_core::ingest::write_jsonl;
use miner_core::pipeline::{self, Mode, PipelineConfig, ReportInputs, RunManifest};
use miner_core::selection::k_grid;
use miner_core::textprep::{PreparedCorpus, DEFAULT_MIN_DOCS, DEFAULT_MIN_TOTAL};
use miner_core::topicmodel::{Method, TopicModel};
use miner_core::topicnet::{export_graph, ExportFormat};
use miner_core::{Error, Result};

#[derive(Parser)]
#[command(name = "miner", version, about = "Mine topics and cross-platform links from a Forem community")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crawl articles for a list of tags into a JSON-lines corpus.
    Ingest(IngestArgs),
    /// Tokenize a corpus into a trimmed bigram document-term matrix.
    Prep(PrepArgs),
    /// Fit a topic model.
    Fit(FitArgs),
    /// Score a grid of topic counts by C_v coherence.
    Sweep(SweepArgs),
    /// Build and export the planar-filtered topic correlation network.
    Network(NetworkArgs),
    /// Compute platform linkage statistics from user profiles.
    Profiles(ProfilesArgs),
    /// Render a Markdown report from existing artifacts.
    Report(ReportArgs),
    /// Run every stage from a config file.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, conflicts_with = "fixture")]
    base_url: Option<String>,
    /// Directory of canned API responses used instead of HTTP.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Cache HTTP responses here.
    #[arg(long, env = "MINER_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Requests per second.
    #[arg(long, default_value_t = 2.0)]
    rate: f64,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    tags_file: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also fetch the authors' profiles into this file.
    #[arg(long)]
    profiles_out: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    language: String,
}

#[derive(Args)]
struct PrepArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_DOCS)]
    min_docs: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_TOTAL)]
    min_total: usize,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Prefix given to `prep --out-prefix`.
    #[arg(long)]
    dtm: PathBuf,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value = "spectral")]
    method: Method,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    gibbs_iterations: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dtm: PathBuf,
    /// The corpus the matrix was built from; supplies the coherence windows.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 5)]
    k_min: usize,
    #[arg(long, default_value_t = 50)]
    k_max: usize,
    #[arg(long, default_value_t = 5)]
    k_step: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = miner_core::selection::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = miner_core::selection::DEFAULT_TOP_N)]
    top_n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long, default_value = "graphml")]
    format: ExportFormat,
    /// Layout seed for SVG output; defaults to the model's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfilesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// CSV of github_handle,twitter_handle pairs to measure overlap against.
    #[arg(long)]
    external: Option<PathBuf>,
    /// Markdown table; a CSV is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Write the profiles with salted, hashed identities next to the table.
    #[arg(long)]
    hash_identities: bool,
    #[arg(long, env = "MINER_IDENTITY_SALT", hide_env_values = true)]
    salt: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// A pipeline output directory; individual flags override its files.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    dtm: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    coherence: Option<PathBuf>,
    #[arg(long)]
    link_stats: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long, conflicts_with = "base_url")]
    fixture: Option<PathBuf>,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long, env = "MINER_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    hash_identities: bool,
    #[arg(long, env = "MINER_IDENTITY_SALT", hide_env_values = true)]
    salt: Option<String>,
    /// Also render report.md into the output directory.
    #[arg(long)]
    report: bool,
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let tags = pipeline::read_tags(&a.tags_file)?;
    let s = a.source;
    let transport = pipeline::make_transport(s.base_url.as_deref(), s.fixture.as_deref(), s.cache_dir.as_deref())?;
    let crawler = pipeline::crawler(transport, s.rate)?;
    let (articles, manifest) = pipeline::ingest_articles(&crawler, &tags, &a.language)?;
    pipeline::write_corpus(&a.out, &articles, &manifest)?;
    println!(
        "{} articles fetched, {} after dedup, {} kept -> {}",
        manifest.articles_fetched,
        manifest.articles_after_dedup,
        manifest.articles_after_language_filter,
        a.out.display()
    );
    if let Some(p) = a.profiles_out {
        let raw = crawler.fetch_profiles(&pipeline::authors(&articles))?;
        write_jsonl(&p, &raw)?;
        println!("{} profiles -> {}", raw.len(), p.display());
    }
    Ok(())
}

fn prep(a: PrepArgs) -> Result<()> {
    let articles = pipeline::read_corpus(&a.corpus)?;
    let docs = pipeline::tokenize_corpus(&articles);
    let prepared = PreparedCorpus::build(&docs, a.min_docs, a.min_total)?;
    prepared.save(&a.out_prefix)?;
    println!(
        "{} documents, {} terms, {} nonzeros -> {}.*",
        prepared.dtm.n_docs(),
        prepared.dtm.n_terms(),
        prepared.dtm.nnz(),
        a.out_prefix.display()
    );
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let prepared = PreparedCorpus::load(&a.dtm)?;
    let model = pipeline::fit_model(&prepared, a.k, a.method, a.seed, a.gibbs_iterations)?;
    model.save(&a.out, &prepared.vocab)?;
    println!("{} topics ({:?}, seed {}) -> {}", model.k, model.method, model.seed, a.out.display());
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let grid = k_grid(a.k_min, a.k_max, a.k_step)?;
    let prepared = PreparedCorpus::load(&a.dtm)?;
    let docs = pipeline::tokenize_corpus(&pipeline::read_corpus(&a.corpus)?);
    if docs.len() != prepared.doc_ids.len() || docs.iter().zip(&prepared.doc_ids).any(|(d, id)| &d.doc_id != id) {
        return Err(Error::Config("the corpus does not match the document-term matrix".into()));
    }
    let coherence = pipeline::CoherenceConfig {
        window: a.window,
        top_n: a.top_n,
    };
    let report = pipeline::sweep(&prepared, &docs, &grid, a.seed, &coherence)?;
    write(&a.out, report.to_csv())?;
    for (k, s) in &report.per_k {
        println!("K={k:<3} C_v={s:.4}");
    }
    println!("best K = {} -> {}", report.chosen_k, a.out.display());
    Ok(())
}

fn network(a: NetworkArgs) -> Result<()> {
    let model = TopicModel::load(&a.model)?;
    let annotations = pipeline::read_annotations(a.annotations.as_deref())?;
    let graph = pipeline::topic_graph(&model, &annotations)?;
    write(&a.out, export_graph(&graph, a.format, a.seed.unwrap_or(model.seed)))?;
    println!("{} topics, {} edges -> {}", graph.n, graph.pmfg_edges.len(), a.out.display());
    Ok(())
}

fn profiles(a: ProfilesArgs) -> Result<()> {
    let salt = match (a.hash_identities, a.salt.as_deref()) {
        (true, None | Some("")) => {
            return Err(Error::Config("--hash-identities needs --salt or MINER_IDENTITY_SALT".into()))
        }
        (true, Some(s)) => Some(s.to_string()),
        (false, _) => None,
    };
    let profiles = pipeline::load_profiles(&a.input)?;
    let report = pipeline::link_report(&profiles, a.external.as_deref())?;
    report.save(&a.out)?;
    print!("{}", report.to_markdown());
    if let Some(salt) = salt {
        let p = a.out.with_extension("profiles.jsonl");
        write_jsonl(&p, &pipeline::anonymize_all(&profiles, &salt))?;
        println!("hashed profiles -> {}", p.display());
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut inputs = match &a.run_dir {
        Some(dir) => ReportInputs::from_out_dir(dir, None),
        None => ReportInputs::default(),
    };
    let or = |flag: Option<PathBuf>, slot: &mut Option<PathBuf>| {
        if flag.is_some() {
            *slot = flag;
        }
    };
    or(a.model, &mut inputs.model_dir);
    or(a.dtm, &mut inputs.dtm_prefix);
    or(a.annotations, &mut inputs.annotations);
    or(a.coherence, &mut inputs.coherence);
    or(a.link_stats, &mut inputs.link_stats);
    write(&a.out, pipeline::render_report(&inputs)?)?;
    println!("report -> {}", a.out.display());
    Ok(())
}

fn run(a: PipelineArgs) -> Result<()> {
    let mut cfg = PipelineConfig::from_file(&a.config)?;
    if let Some(v) = a.out_dir {
        cfg.out_dir = v;
    }
    if let Some(v) = a.seed {
        cfg.model.seed = v;
    }
    if let Some(v) = a.k {
        cfg.model.k = v;
    }
    if let Some(v) = a.mode {
        cfg.model.mode = match v.as_str() {
            "fit" => Mode::Fit,
            "sweep" => Mode::Sweep,
            other => return Err(Error::Config(format!("unknown mode {other:?}"))),
        };
    }
    if let Some(v) = a.method {
        cfg.model.method = v;
    }
    if a.fixture.is_some() || a.base_url.is_some() {
        cfg.source.fixture = a.fixture;
        cfg.source.base_url = a.base_url;
    }
    if a.cache_dir.is_some() {
        cfg.source.cache_dir = a.cache_dir;
    }
    if a.hash_identities {
        cfg.profiles.hash_identities = true;
    }
    if a.salt.is_some() {
        cfg.profiles.salt = a.salt;
    }
    let manifest = pipeline::run_pipeline(&cfg)?;
    print!("{}", pipeline::describe(&manifest));
    println!(
        "K = {}, seed {} -> {}",
        manifest.k,
        manifest.seed,
        cfg.out_dir.join(RunManifest::FILE_NAME).display()
    );
    if a.report {
        let inputs = ReportInputs::from_out_dir(&cfg.out_dir, cfg.network.annotations.clone());
        let path = cfg.out_dir.join("report.md");
        write(&path, pipeline::render_report(&inputs)?)?;
        println!("report -> {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Prep(a) => prep(a),
        Command::Fit(a) => fit(a),
        Command::Sweep(a) => sweep(a),
        Command::Network(a) => network(a),
        Command::Profiles(a) => profiles(a),
        Command::Report(a) => report(a),
        Command::Pipeline(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
