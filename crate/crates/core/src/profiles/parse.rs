use std::collections::BTreeMap;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate};
use regex::Regex;
use serde_json::Value;

use super::{Platform, UserProfile};
use crate::error::{Error, Result};
use crate::ingest::RawUserProfile;

/// Lowercase host without `www.`/`m.` prefixes or a port.
pub fn url_host(url: &str) -> Option<String> {
    let rest = url.trim().split_once("://").map(|(_, r)| r)?;
    let host = rest.split(['/', '?', '#']).next()?;
    let host = host.rsplit_once('@').map_or(host, |(_, h)| h);
    let host = host.split(':').next()?.to_ascii_lowercase();
    let host = host.strip_prefix("www.").unwrap_or(&host);
    let host = host.strip_prefix("m.").unwrap_or(host);
    (!host.is_empty() && host.contains('.')).then(|| host.to_string())
}

fn path_segments(url: &str) -> Vec<String> {
    let rest = url.trim().split_once("://").map_or(url, |(_, r)| r);
    let path = rest.split_once('/').map_or("", |(_, p)| p);
    let path = path.split(['?', '#']).next().unwrap_or_default();
    path.split('/').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Lowercase, trimmed, without a leading `@`, trailing slashes or query.
pub fn normalize_handle(handle: &str) -> String {
    let h = handle.trim();
    let h = h.split(['?', '#']).next().unwrap_or_default();
    h.trim_end_matches('/').trim_start_matches('@').to_lowercase()
}

/// The account name a profile URL points at, if the URL has one.
pub fn handle_from_url(platform: Platform, url: &str) -> Option<String> {
    let segs = path_segments(url);
    let pick = match platform {
        Platform::Linkedin => match segs.first().map(String::as_str) {
            Some("in" | "company" | "pub") => segs.get(1),
            _ => segs.first(),
        },
        Platform::Youtube => match segs.first().map(String::as_str) {
            Some("c" | "channel" | "user") => segs.get(1),
            _ => segs.first(),
        },
        Platform::Stackoverflow => match segs.first().map(String::as_str) {
            Some("users") => segs.get(1),
            _ => segs.first(),
        },
        Platform::Website => None,
        _ => segs.first(),
    };
    let h = normalize_handle(pick?);
    (!h.is_empty()).then_some(h)
}

/// Which platform a URL belongs to; unknown hosts are `Website`.
pub fn classify_url(url: &str) -> Option<Platform> {
    let host = url_host(url)?;
    let is = |domain: &str| host == domain || host.ends_with(&format!(".{domain}"));
    Some(if is("github.com") {
        Platform::Github
    } else if is("gitlab.com") {
        Platform::Gitlab
    } else if is("twitter.com") || is("x.com") {
        Platform::Twitter
    } else if is("linkedin.com") {
        Platform::Linkedin
    } else if is("medium.com") {
        Platform::Medium
    } else if is("stackoverflow.com") {
        Platform::Stackoverflow
    } else if is("instagram.com") {
        Platform::Instagram
    } else if is("facebook.com") || is("fb.com") {
        Platform::Facebook
    } else if is("youtube.com") || is("youtu.be") {
        Platform::Youtube
    } else if is("twitch.tv") {
        Platform::Twitch
    } else {
        Platform::Website
    })
}

/// `owner/repo` URLs on a code host are repositories, not profile links.
fn is_repo_url(url: &str) -> bool {
    matches!(classify_url(url), Some(Platform::Github | Platform::Gitlab)) && path_segments(url).len() >= 2
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.date_naive());
    }
    ["%Y-%m-%d", "%b %d, %Y", "%B %d, %Y", "%d %b %Y"]
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(s, f).ok())
        .or_else(|| s.get(..10).and_then(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").ok()))
}

#[derive(Default)]
struct Collected {
    links: BTreeMap<Platform, String>,
    pinned: Vec<String>,
}

impl Collected {
    fn add_url(&mut self, url: &str) {
        let url = url.trim();
        if !(url.starts_with("http://") || url.starts_with("https://")) {
            return;
        }
        if is_repo_url(url) {
            self.add_repo(url);
            return;
        }
        if let Some(p) = classify_url(url) {
            self.links.entry(p).or_insert_with(|| url.to_string());
        }
    }

    fn add_repo(&mut self, url: &str) {
        let url = url.trim().trim_end_matches('/').to_string();
        if !self.pinned.contains(&url) {
            self.pinned.push(url);
        }
    }
}

fn count_field(v: &Value, key: &str) -> u64 {
    match v.get(key) {
        Some(Value::Number(n)) => n.as_u64().unwrap_or(0),
        Some(Value::String(s)) => s.replace(',', "").trim().parse().unwrap_or(0),
        _ => 0,
    }
}

fn parse_json(v: &Value, fallback_username: &str) -> Result<UserProfile> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::parse("profile", fallback_username, "JSON payload is not an object"))?;
    let str_field = |k: &str| obj.get(k).and_then(Value::as_str).map(str::trim).filter(|s| !s.is_empty());
    let mut c = Collected::default();
    // Own serialisation first so its links take precedence.
    match obj.get("links") {
        Some(Value::Object(m)) => m.values().filter_map(Value::as_str).for_each(|u| c.add_url(u)),
        Some(Value::Array(a)) => a.iter().filter_map(Value::as_str).for_each(|u| c.add_url(u)),
        _ => {}
    }
    if let Some(h) = str_field("github_username") {
        c.add_url(&format!("https://github.com/{}", normalize_handle(h)));
    }
    if let Some(h) = str_field("twitter_username") {
        c.add_url(&format!("https://twitter.com/{}", normalize_handle(h)));
    }
    for key in [
        "gitlab_url",
        "linkedin_url",
        "medium_url",
        "stackoverflow_url",
        "instagram_url",
        "facebook_url",
        "youtube_url",
        "twitch_url",
        "website_url",
    ] {
        if let Some(u) = str_field(key) {
            c.add_url(u);
        }
    }
    if let Some(Value::Array(repos)) = obj.get("pinned_repos") {
        repos.iter().filter_map(Value::as_str).for_each(|r| c.add_repo(r));
    }
    Ok(UserProfile {
        username: str_field("username").unwrap_or(fallback_username).to_string(),
        joined_at: str_field("joined_at").and_then(parse_date),
        links: c.links,
        pinned_repos: c.pinned,
        post_count: count_field(v, "post_count"),
        comment_count: count_field(v, "comment_count"),
    })
}

struct HtmlPatterns {
    href: Regex,
    time: Regex,
    posts: Regex,
    comments: Regex,
}

fn html_patterns() -> &'static HtmlPatterns {
    static P: OnceLock<HtmlPatterns> = OnceLock::new();
    P.get_or_init(|| HtmlPatterns {
        href: Regex::new(r#"(?i)href\s*=\s*["']([^"']+)["']"#).unwrap(),
        time: Regex::new(r#"(?i)<time[^>]*datetime\s*=\s*["']([^"']+)["']"#).unwrap(),
        posts: Regex::new(r"(?i)([\d,]+)\s+posts?\s+published").unwrap(),
        comments: Regex::new(r"(?i)([\d,]+)\s+comments?\s+written").unwrap(),
    })
}

/// The element carrying `marker` up to `closing`, or the whole page when no
/// element is marked. Site-wide navigation and footers link to the site's
/// own accounts, which must not be attributed to the user.
fn region<'a>(html: &'a str, marker: &str, closing: &str) -> &'a str {
    let lower = html.to_ascii_lowercase();
    let Some(start) = lower.find(marker) else {
        return html;
    };
    let start = lower[..start].rfind('<').unwrap_or(start);
    let end = lower[start..].find(closing).map_or(html.len(), |e| start + e);
    &html[start..end]
}

fn parse_html(html: &str, username: &str) -> UserProfile {
    let p = html_patterns();
    let mut c = Collected::default();
    for cap in p.href.captures_iter(region(html, "profile-header", "</header>")) {
        let url = cap[1].replace("&amp;", "&");
        if !is_repo_url(&url) {
            c.add_url(&url);
        }
    }
    for cap in p.href.captures_iter(region(html, "github-repos", "</section>")) {
        let url = cap[1].replace("&amp;", "&");
        if is_repo_url(&url) {
            c.add_repo(&url);
        }
    }
    let number = |re: &Regex| {
        re.captures(html)
            .and_then(|m| m[1].replace(',', "").parse().ok())
            .unwrap_or(0)
    };
    UserProfile {
        username: username.to_string(),
        joined_at: p.time.captures(html).and_then(|m| parse_date(&m[1])),
        links: c.links,
        pinned_repos: c.pinned,
        post_count: number(&p.posts),
        comment_count: number(&p.comments),
    }
}

/// Parse a fetched profile payload: Forem user JSON, this crate's own
/// serialised [`UserProfile`], or a profile HTML page.
pub fn parse_profile(raw: &RawUserProfile) -> Result<UserProfile> {
    let body = raw.profile_html_or_json.trim();
    if body.starts_with('{') {
        let v: Value = serde_json::from_str(body)
            .map_err(|e| Error::parse("profile", raw.username.clone(), e))?;
        return parse_json(&v, &raw.username);
    }
    if body.contains('<') {
        return Ok(parse_html(body, &raw.username));
    }
    Err(Error::parse("profile", raw.username.clone(), "payload is neither JSON nor HTML"))
}
