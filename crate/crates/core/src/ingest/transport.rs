use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

/// An HTTP response, reduced to what the crawler needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
    pub retry_after: Option<Duration>,
}

impl Response {
    pub fn ok(body: impl Into<String>) -> Self {
        Response {
            status: 200,
            body: body.into(),
            retry_after: None,
        }
    }

    pub fn status(status: u16) -> Self {
        Response {
            status,
            body: String::new(),
            retry_after: None,
        }
    }

    /// 429 and 5xx are worth retrying.
    pub fn is_transient(&self) -> bool {
        self.status == 429 || (500..600).contains(&self.status)
    }
}

/// Connection-level failure (no HTTP status was received).
#[derive(Debug, Clone, thiserror::Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Issues GET requests for API paths such as `/api/articles?tag=go&page=1`.
pub trait Transport: Send + Sync {
    fn get(&self, path_and_query: &str) -> Result<Response, TransportError>;

    /// Human-readable source for manifests.
    fn source(&self) -> String;

    /// Fixed capture time for replayed data; `None` means "now".
    fn captured_at(&self) -> Option<DateTime<Utc>> {
        None
    }
}

/// Live HTTP transport with an optional on-disk response cache.
pub struct HttpTransport {
    base_url: String,
    agent: ureq::Agent,
    cache_dir: Option<PathBuf>,
}

impl HttpTransport {
    pub fn new(base_url: &str) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("miner/", env!("CARGO_PKG_VERSION")))
            .build();
        HttpTransport {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
            cache_dir: None,
        }
    }

    pub fn with_cache_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.cache_dir = dir;
        self
    }

    fn cache_path(&self, url: &str) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let digest = Sha256::digest(url.as_bytes());
        Some(dir.join(format!("{}.json", hex::encode(digest))))
    }
}

fn retry_after(resp: &ureq::Response) -> Option<Duration> {
    resp.header("Retry-After")
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_secs)
}

impl Transport for HttpTransport {
    fn get(&self, path_and_query: &str) -> Result<Response, TransportError> {
        let url = format!("{}{}", self.base_url, path_and_query);
        let cache = self.cache_path(&url);
        if let Some(body) = cache.as_ref().and_then(|p| std::fs::read_to_string(p).ok()) {
            return Ok(Response::ok(body));
        }
        match self.agent.get(&url).call() {
            Ok(resp) => {
                let status = resp.status();
                let retry = retry_after(&resp);
                let body = resp
                    .into_string()
                    .map_err(|e| TransportError(e.to_string()))?;
                if let Some(path) = cache.filter(|_| status == 200) {
                    let written = path
                        .parent()
                        .map_or(Ok(()), std::fs::create_dir_all)
                        .and_then(|_| std::fs::write(&path, &body));
                    if let Err(e) = written {
                        log::warn!("cannot write cache entry {}: {e}", path.display());
                    }
                }
                Ok(Response {
                    status,
                    body,
                    retry_after: retry,
                })
            }
            Err(ureq::Error::Status(status, resp)) => Ok(Response {
                status,
                retry_after: retry_after(&resp),
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => Err(TransportError(t.to_string())),
        }
    }

    fn source(&self) -> String {
        self.base_url.clone()
    }
}

/// Serves API paths from a directory of canned JSON files.
///
/// Layout:
/// - `articles/<tag>/page-<n>.json`: one listing page (missing → `[]`)
/// - `articles/by_id/<id>.json`: one article with `body_html`
/// - `users/<username>.json`: one user profile
/// - `fixture.json` (optional): `{"captured_at": "<RFC 3339>"}`
#[derive(Debug, Clone)]
pub struct FixtureTransport {
    dir: PathBuf,
    captured_at: DateTime<Utc>,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        let captured_at = std::fs::read_to_string(dir.join("fixture.json"))
            .ok()
            .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok())
            .and_then(|v| v.get("captured_at")?.as_str()?.parse().ok())
            .unwrap_or(DateTime::UNIX_EPOCH);
        FixtureTransport { dir, captured_at }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Route a request path to its canned response.
    pub fn respond(&self, path_and_query: &str) -> Response {
        let (path, query) = path_and_query
            .split_once('?')
            .unwrap_or((path_and_query, ""));
        let param = |name: &str| {
            query
                .split('&')
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| *k == name)
                .map(|(_, v)| v.to_string())
        };
        let safe = |s: &str| !s.is_empty() && !s.contains(['/', '\\']) && s != "..";
        let read = |p: PathBuf| match std::fs::read_to_string(&p) {
            Ok(body) => Response::ok(body),
            Err(_) => Response::status(404),
        };
        match path.trim_end_matches('/') {
            "/api/articles" => {
                let (Some(tag), Some(page)) = (param("tag"), param("page")) else {
                    return Response::status(400);
                };
                if !safe(&tag) || page.parse::<u32>().is_err() {
                    return Response::status(400);
                }
                let file = self.dir.join("articles").join(&tag).join(format!("page-{page}.json"));
                match std::fs::read_to_string(file) {
                    Ok(body) => Response::ok(body),
                    Err(_) => Response::ok("[]"),
                }
            }
            "/api/users/by_username" => match param("url") {
                Some(user) if safe(&user) => read(self.dir.join("users").join(format!("{user}.json"))),
                _ => Response::status(400),
            },
            p => match p.strip_prefix("/api/articles/") {
                Some(id) if safe(id) => {
                    read(self.dir.join("articles").join("by_id").join(format!("{id}.json")))
                }
                _ => Response::status(404),
            },
        }
    }
}

impl Transport for FixtureTransport {
    fn get(&self, path_and_query: &str) -> Result<Response, TransportError> {
        Ok(self.respond(path_and_query))
    }

    fn source(&self) -> String {
        self.dir.display().to_string()
    }

    fn captured_at(&self) -> Option<DateTime<Utc>> {
        Some(self.captured_at)
    }
}
