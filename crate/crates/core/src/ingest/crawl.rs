use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use rand::Rng;
use serde_json::Value;

use super::transport::{Response, Transport};
use super::{Article, RawUserProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    /// Requests per second across all workers.
    pub rate_limit: f64,
    pub max_retries: u32,
    pub base_backoff: Duration,
    pub max_backoff: Duration,
    /// Number of tags fetched concurrently.
    pub fan_out: usize,
    pub per_page: u32,
    /// Give up on a tag after this many malformed pages in a row.
    pub max_malformed_pages: u32,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            rate_limit: 2.0,
            max_retries: 5,
            base_backoff: Duration::from_millis(500),
            max_backoff: Duration::from_secs(60),
            fan_out: 4,
            per_page: 1000,
            max_malformed_pages: 3,
        }
    }
}

/// Counters collected during a crawl.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrawlStats {
    pub requests: u32,
    pub retries: u32,
    pub malformed_pages: u32,
    pub skipped_records: u32,
}

#[derive(Debug, Clone)]
pub struct CrawlOutcome {
    /// One record per tag occurrence, in tag then page order.
    pub articles: Vec<Article>,
    pub stats: CrawlStats,
}

struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(per_second: f64) -> Self {
        RateLimiter {
            interval: Duration::from_secs_f64(1.0 / per_second),
            next: Mutex::new(Instant::now()),
        }
    }

    fn acquire(&self) {
        let mut next = self.next.lock().expect("rate limiter poisoned");
        let now = Instant::now();
        if *next > now {
            std::thread::sleep(*next - now);
        }
        *next = (*next).max(now) + self.interval;
    }
}

#[derive(Default)]
struct Counters {
    requests: AtomicU32,
    retries: AtomicU32,
    malformed_pages: AtomicU32,
    skipped_records: AtomicU32,
}

impl Counters {
    fn snapshot(&self) -> CrawlStats {
        CrawlStats {
            requests: self.requests.load(Ordering::Relaxed),
            retries: self.retries.load(Ordering::Relaxed),
            malformed_pages: self.malformed_pages.load(Ordering::Relaxed),
            skipped_records: self.skipped_records.load(Ordering::Relaxed),
        }
    }
}

/// Polite paginating client for the articles and users endpoints.
pub struct Crawler {
    transport: Arc<dyn Transport>,
    config: CrawlConfig,
    limiter: RateLimiter,
    counters: Counters,
    details: Mutex<HashMap<String, Option<Article>>>,
}

impl Crawler {
    pub fn new(transport: Arc<dyn Transport>, config: CrawlConfig) -> Result<Self> {
        if !(config.rate_limit > 0.0 && config.rate_limit.is_finite()) {
            return Err(Error::Config(format!(
                "rate limit must be positive, got {}",
                config.rate_limit
            )));
        }
        Ok(Crawler {
            limiter: RateLimiter::new(config.rate_limit),
            transport,
            config,
            counters: Counters::default(),
            details: Mutex::new(HashMap::new()),
        })
    }

    pub fn stats(&self) -> CrawlStats {
        self.counters.snapshot()
    }

    pub fn captured_at(&self) -> DateTime<Utc> {
        self.transport.captured_at().unwrap_or_else(Utc::now)
    }

    pub fn source(&self) -> String {
        self.transport.source()
    }

    fn backoff(&self, attempt: u32, retry_after: Option<Duration>) -> Duration {
        let exp = self
            .config
            .base_backoff
            .saturating_mul(1u32 << attempt.min(16))
            .min(self.config.max_backoff);
        let jitter = rand::rng().random_range(0.5..=1.0);
        exp.mul_f64(jitter)
            .max(retry_after.unwrap_or_default())
            .min(self.config.max_backoff)
    }

    /// GET with exponential backoff on 429/5xx and connection errors.
    fn get(&self, path: &str) -> Result<Response> {
        let mut attempt = 0;
        loop {
            self.limiter.acquire();
            self.counters.requests.fetch_add(1, Ordering::Relaxed);
            let (reason, retry_after) = match self.transport.get(path) {
                Ok(resp) if !resp.is_transient() => return Ok(resp),
                Ok(resp) => (format!("HTTP {}", resp.status), resp.retry_after),
                Err(e) => (e.0, None),
            };
            if attempt >= self.config.max_retries {
                return Err(Error::Unreachable {
                    url: format!("{}{}", self.transport.source(), path),
                    attempts: attempt + 1,
                    reason,
                });
            }
            let wait = self.backoff(attempt, retry_after);
            self.counters.retries.fetch_add(1, Ordering::Relaxed);
            log::warn!("retrying {path} in {wait:?} ({reason})");
            std::thread::sleep(wait);
            attempt += 1;
        }
    }

    /// Every article listed under any of `tags`, one record per tag occurrence.
    pub fn crawl_articles(&self, tags: &[String]) -> Result<CrawlOutcome> {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<Vec<Article>>>>> =
            Mutex::new((0..tags.len()).map(|_| None).collect());
        let workers = self.config.fan_out.clamp(1, tags.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(tag) = tags.get(i) else { break };
                    let result = self.crawl_tag(tag);
                    results.lock().expect("results poisoned")[i] = Some(result);
                });
            }
        });
        let mut articles = Vec::new();
        for result in results.into_inner().expect("results poisoned") {
            articles.extend(result.expect("every tag visited")?);
        }
        Ok(CrawlOutcome {
            articles,
            stats: self.stats(),
        })
    }

    fn crawl_tag(&self, tag: &str) -> Result<Vec<Article>> {
        let mut out = Vec::new();
        let mut malformed_run = 0;
        for page in 1u32.. {
            let path = format!(
                "/api/articles?tag={tag}&page={page}&per_page={}",
                self.config.per_page
            );
            let resp = self.get(&path)?;
            if resp.status == 404 {
                break;
            }
            let items = match (resp.status, serde_json::from_str::<Value>(&resp.body)) {
                (200, Ok(Value::Array(items))) => items,
                (status, parsed) => {
                    let why = match parsed {
                        Err(e) => e.to_string(),
                        Ok(_) if status != 200 => format!("HTTP {status}"),
                        Ok(_) => "not a JSON array".to_string(),
                    };
                    log::warn!("skipping page {page} of tag {tag:?}: {why}");
                    self.counters.malformed_pages.fetch_add(1, Ordering::Relaxed);
                    malformed_run += 1;
                    if malformed_run >= self.config.max_malformed_pages {
                        log::warn!("giving up on tag {tag:?} after {malformed_run} bad pages");
                        break;
                    }
                    continue;
                }
            };
            malformed_run = 0;
            if items.is_empty() {
                break;
            }
            for item in &items {
                match self.resolve_article(item)? {
                    Some(article) => out.push(article),
                    None => {
                        self.counters.skipped_records.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Listing entries carry no body; fetch the article itself when needed.
    fn resolve_article(&self, item: &Value) -> Result<Option<Article>> {
        if item.get("body_html").and_then(Value::as_str).is_some() {
            return Ok(article_from_json(item));
        }
        let Some(id) = json_id(item) else {
            log::warn!("listing entry without id skipped");
            return Ok(None);
        };
        if let Some(cached) = self.details.lock().expect("cache poisoned").get(&id) {
            return Ok(cached.clone());
        }
        let resp = self.get(&format!("/api/articles/{id}"))?;
        let article = if resp.status == 200 {
            match serde_json::from_str::<Value>(&resp.body) {
                Ok(v) => article_from_json(&v),
                Err(e) => {
                    log::warn!("article {id}: malformed JSON: {e}");
                    None
                }
            }
        } else {
            log::warn!("article {id}: HTTP {}", resp.status);
            None
        };
        self.details
            .lock()
            .expect("cache poisoned")
            .insert(id, article.clone());
        Ok(article)
    }

    /// Fetch public profiles; users that cannot be fetched are skipped.
    pub fn fetch_profiles(&self, usernames: &[String]) -> Result<Vec<RawUserProfile>> {
        let fetched_at = self.captured_at();
        let mut out = Vec::with_capacity(usernames.len());
        for username in usernames {
            let resp = self.get(&format!("/api/users/by_username?url={username}"))?;
            if resp.status != 200 {
                log::warn!("profile {username:?}: HTTP {}", resp.status);
                self.counters.skipped_records.fetch_add(1, Ordering::Relaxed);
                continue;
            }
            out.push(RawUserProfile {
                username: username.clone(),
                profile_html_or_json: resp.body,
                fetched_at,
            });
        }
        Ok(out)
    }
}

fn json_id(v: &Value) -> Option<String> {
    match v.get("id")? {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        _ => None,
    }
}

fn json_tags(v: &Value) -> Vec<String> {
    // The listing endpoint has `tag_list: [..]`; the detail endpoint has
    // `tag_list: "a, b"` and `tags: [..]`.
    for key in ["tag_list", "tags"] {
        if let Some(Value::Array(items)) = v.get(key) {
            return items
                .iter()
                .filter_map(Value::as_str)
                .map(str::to_string)
                .collect();
        }
    }
    for key in ["tag_list", "tags"] {
        if let Some(Value::String(s)) = v.get(key) {
            return s.split(',').map(|t| t.trim().to_string()).collect();
        }
    }
    Vec::new()
}

/// Convert a Forem article object; `None` when required fields are missing.
pub(crate) fn article_from_json(v: &Value) -> Option<Article> {
    let id = json_id(v)?;
    let url = v.get("url")?.as_str()?;
    let title = v.get("title").and_then(Value::as_str).unwrap_or_default();
    let body = v.get("body_html")?.as_str()?;
    let author = v
        .pointer("/user/username")
        .or_else(|| v.get("username"))
        .and_then(Value::as_str)
        .unwrap_or_default();
    let published_at = v
        .get("published_at")
        .and_then(Value::as_str)
        .and_then(|s| s.parse::<DateTime<Utc>>().ok())
        .unwrap_or(DateTime::UNIX_EPOCH);
    Some(Article::new(
        id,
        url,
        title,
        body,
        json_tags(v),
        author,
        published_at,
    ))
}

#[cfg(test)]
mod tests {
    use super::super::transport::TransportError;
    use super::*;

    struct Scripted {
        replies: Mutex<Vec<Result<Response, TransportError>>>,
    }

    impl Transport for Scripted {
        fn get(&self, _: &str) -> Result<Response, TransportError> {
            let mut r = self.replies.lock().unwrap();
            if r.is_empty() {
                Ok(Response::ok("[]"))
            } else {
                r.remove(0)
            }
        }
        fn source(&self) -> String {
            "scripted".into()
        }
    }

    fn fast() -> CrawlConfig {
        CrawlConfig {
            rate_limit: 1000.0,
            base_backoff: Duration::from_millis(1),
            max_backoff: Duration::from_millis(5),
            ..CrawlConfig::default()
        }
    }

    fn crawler(replies: Vec<Result<Response, TransportError>>) -> Crawler {
        Crawler::new(
            Arc::new(Scripted {
                replies: Mutex::new(replies),
            }),
            fast(),
        )
        .unwrap()
    }

    const PAGE: &str = r#"[{"id": 7, "url": "https://x/a", "title": "A", "body_html": "<p>hello world</p>",
        "tag_list": ["go"], "user": {"username": "amy"}, "published_at": "2020-02-03T04:05:06Z"}]"#;

    #[test]
    fn empty_tag_list() {
        let out = crawler(vec![]).crawl_articles(&[]).unwrap();
        assert!(out.articles.is_empty());
    }

    #[test]
    fn gives_up_after_max_retries() {
        let replies = (0..6).map(|_| Ok(Response::status(503))).collect();
        let err = crawler(replies).crawl_articles(&["go".into()]).unwrap_err();
        assert!(matches!(err, Error::Unreachable { attempts: 6, .. }), "{err}");
    }

    #[test]
    fn connection_errors_are_retried() {
        let c = crawler(vec![Err(TransportError("refused".into())), Ok(Response::ok(PAGE))]);
        let out = c.crawl_articles(&["go".into()]).unwrap();
        assert_eq!(out.articles.len(), 1);
        assert_eq!(out.stats.retries, 1);
        assert_eq!(out.articles[0].author_username, "amy");
        assert_eq!(out.articles[0].id, "7");
    }

    #[test]
    fn malformed_page_is_skipped() {
        let c = crawler(vec![Ok(Response::ok("{not json")), Ok(Response::ok(PAGE))]);
        let out = c.crawl_articles(&["go".into()]).unwrap();
        assert_eq!(out.articles.len(), 1);
        assert_eq!(out.stats.malformed_pages, 1);
    }

    #[test]
    fn rejects_nonpositive_rate() {
        let cfg = CrawlConfig {
            rate_limit: 0.0,
            ..fast()
        };
        let t = Arc::new(Scripted {
            replies: Mutex::new(vec![]),
        });
        assert!(matches!(Crawler::new(t, cfg), Err(Error::Config(_))));
    }

    #[test]
    fn retry_after_is_honoured() {
        let c = crawler(vec![]);
        let wait = c.backoff(0, Some(Duration::from_millis(4)));
        assert!(wait >= Duration::from_millis(4));
    }

    #[test]
    fn detail_endpoint_tag_string() {
        let v: Value = serde_json::from_str(
            r#"{"id": "x1", "url": "u", "title": "t", "body_html": "b", "tag_list": "go, Rust", "tags": ["go", "rust"]}"#,
        )
        .unwrap();
        assert_eq!(article_from_json(&v).unwrap().tags, ["go", "rust"]);
        let v: Value = serde_json::from_str(r#"{"id": 1, "url": "u", "body_html": "b", "tag_list": "go, Rust"}"#).unwrap();
        assert_eq!(article_from_json(&v).unwrap().tags, ["go", "rust"]);
    }
}
