use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{k_grid, DEFAULT_TOP_N, DEFAULT_WINDOW};
use crate::textprep::{DEFAULT_MIN_DOCS, DEFAULT_MIN_TOTAL};
use crate::topicmodel::Method;
use crate::topicnet::ExportFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fit a single K.
    #[default]
    Fit,
    /// Score a K grid by coherence, then fit the best K.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub base_url: Option<String>,
    pub fixture: Option<PathBuf>,
    pub tags_file: Option<PathBuf>,
    /// Requests per second.
    pub rate: f64,
    pub cache_dir: Option<PathBuf>,
    pub language: String,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            base_url: None,
            fixture: None,
            tags_file: None,
            rate: 2.0,
            cache_dir: None,
            language: "en".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepConfig {
    pub min_docs: usize,
    pub min_total: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            min_docs: DEFAULT_MIN_DOCS,
            min_total: DEFAULT_MIN_TOTAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub mode: Mode,
    pub k: usize,
    pub method: Method,
    pub seed: u64,
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    /// Sweeps for the Gibbs sampler; its default when unset.
    pub gibbs_iterations: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            mode: Mode::Fit,
            k: 30,
            method: Method::Spectral,
            seed: 7,
            k_min: 5,
            k_max: 50,
            k_step: 5,
            gibbs_iterations: None,
        }
    }
}

impl ModelConfig {
    pub fn grid(&self) -> Result<Vec<usize>> {
        k_grid(self.k_min, self.k_max, self.k_step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceConfig {
    pub window: usize,
    pub top_n: usize,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            window: DEFAULT_WINDOW,
            top_n: DEFAULT_TOP_N,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub annotations: Option<PathBuf>,
    /// `graphml`, `dot` or `svg`.
    pub format: String,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            annotations: None,
            format: "graphml".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesConfig {
    /// CSV of `github_handle,twitter_handle` pairs to compare against.
    pub external: Option<PathBuf>,
    pub hash_identities: bool,
    pub salt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub source: SourceConfig,
    pub prep: PrepConfig,
    pub model: ModelConfig,
    pub coherence: CoherenceConfig,
    pub network: NetworkConfig,
    pub profiles: ProfilesConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            out_dir: PathBuf::from("out"),
            source: SourceConfig::default(),
            prep: PrepConfig::default(),
            model: ModelConfig::default(),
            coherence: CoherenceConfig::default(),
            network: NetworkConfig::default(),
            profiles: ProfilesConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, location: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", location.display(), e.message())))
    }

    /// Load a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.as_os_str() == "." {
                *p = base.to_path_buf();
            } else if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.out_dir);
        for p in [
            &mut cfg.source.fixture,
            &mut cfg.source.tags_file,
            &mut cfg.source.cache_dir,
            &mut cfg.network.annotations,
            &mut cfg.profiles.external,
        ]
        .into_iter()
        .flatten()
        {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn export_format(&self) -> Result<ExportFormat> {
        self.network.format.parse()
    }

    /// Check everything that can be checked without touching the network.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let s = &self.source;
        match (&s.base_url, &s.fixture) {
            (Some(_), Some(_)) => return bad("set either source.base_url or source.fixture, not both".into()),
            (None, None) => return bad("no source: set source.base_url or source.fixture".into()),
            (None, Some(dir)) if !dir.is_dir() => {
                return bad(format!("fixture directory {} does not exist", dir.display()))
            }
            _ => {}
        }
        match &s.tags_file {
            None => return bad("source.tags_file is required".into()),
            Some(p) if !p.is_file() => return bad(format!("tags file {} does not exist", p.display())),
            _ => {}
        }
        if !(s.rate > 0.0 && s.rate.is_finite()) {
            return bad(format!("source.rate must be positive, got {}", s.rate));
        }
        if self.prep.min_docs == 0 || self.prep.min_total == 0 {
            return bad("prep thresholds must be positive".into());
        }
        match self.model.mode {
            Mode::Fit if self.model.k < 2 => return bad(format!("model.k must be at least 2, got {}", self.model.k)),
            Mode::Sweep => {
                let grid = self.model.grid()?;
                if grid[0] < 2 {
                    return bad("every K in the grid must be at least 2".into());
                }
            }
            _ => {}
        }
        if self.model.gibbs_iterations == Some(0) {
            return bad("model.gibbs_iterations must be positive".into());
        }
        if self.coherence.window == 0 || self.coherence.top_n < 2 {
            return bad("coherence.window must be positive and coherence.top_n at least 2".into());
        }
        self.export_format()?;
        for p in [&self.network.annotations, &self.profiles.external].into_iter().flatten() {
            if !p.is_file() {
                return bad(format!("input file {} does not exist", p.display()));
            }
        }
        if self.profiles.hash_identities && self.profiles.salt.as_deref().unwrap_or("").is_empty() {
            return bad("hashing identities needs a non-empty salt".into());
        }
        Ok(())
    }
}
