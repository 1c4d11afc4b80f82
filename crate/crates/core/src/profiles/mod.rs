//! User profiles: cross-platform links, pinned repositories and linkage statistics.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use parse::{classify_url, handle_from_url, normalize_handle, parse_profile, url_host};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Github,
    Gitlab,
    Twitter,
    Linkedin,
    Medium,
    Stackoverflow,
    Instagram,
    Facebook,
    Youtube,
    Twitch,
    Website,
}

impl Platform {
    pub const ALL: [Platform; 11] = [
        Platform::Github,
        Platform::Gitlab,
        Platform::Twitter,
        Platform::Linkedin,
        Platform::Medium,
        Platform::Stackoverflow,
        Platform::Instagram,
        Platform::Facebook,
        Platform::Youtube,
        Platform::Twitch,
        Platform::Website,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            Platform::Github => "GitHub",
            Platform::Gitlab => "GitLab",
            Platform::Twitter => "Twitter",
            Platform::Linkedin => "Linkedin",
            Platform::Medium => "Medium",
            Platform::Stackoverflow => "Stack Overflow",
            Platform::Instagram => "Instagram",
            Platform::Facebook => "Facebook",
            Platform::Youtube => "Youtube",
            Platform::Twitch => "Twitch",
            Platform::Website => "Website",
        }
    }

    /// Canonical profile URL for a handle.
    pub fn profile_url(self, handle: &str) -> String {
        let h = normalize_handle(handle);
        match self {
            Platform::Github => format!("https://github.com/{h}"),
            Platform::Gitlab => format!("https://gitlab.com/{h}"),
            Platform::Twitter => format!("https://twitter.com/{h}"),
            Platform::Linkedin => format!("https://www.linkedin.com/in/{h}"),
            Platform::Medium => format!("https://medium.com/@{h}"),
            Platform::Stackoverflow => format!("https://stackoverflow.com/users/{h}"),
            Platform::Instagram => format!("https://instagram.com/{h}"),
            Platform::Facebook => format!("https://facebook.com/{h}"),
            Platform::Youtube => format!("https://youtube.com/c/{h}"),
            Platform::Twitch => format!("https://twitch.tv/{h}"),
            Platform::Website => format!("https://{h}"),
        }
    }
}

impl std::str::FromStr for Platform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '_', '-'], "");
        Platform::ALL
            .into_iter()
            .find(|p| p.display_name().to_ascii_lowercase().replace(' ', "") == key)
            .or(match key.as_str() {
                "x" => Some(Platform::Twitter),
                "so" => Some(Platform::Stackoverflow),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown platform {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub username: String,
    pub joined_at: Option<NaiveDate>,
    pub links: BTreeMap<Platform, String>,
    pub pinned_repos: Vec<String>,
    pub post_count: u64,
    pub comment_count: u64,
}

impl UserProfile {
    pub fn has(&self, p: Platform) -> bool {
        self.links.contains_key(&p)
    }

    pub fn handle(&self, p: Platform) -> Option<String> {
        handle_from_url(p, self.links.get(&p)?)
    }
}

/// Salted SHA-256 of an identity, as 16 hex characters.
pub fn hash_identity(salt: &str, value: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update([0u8]);
    h.update(value.as_bytes());
    hex::encode(h.finalize())[..16].to_string()
}

/// Replace the username, every link and every repository with salted hashes.
pub fn anonymize_profile(p: &UserProfile, salt: &str) -> UserProfile {
    UserProfile {
        username: hash_identity(salt, &normalize_handle(&p.username)),
        joined_at: p.joined_at,
        links: p
            .links
            .iter()
            .map(|(&k, url)| {
                let id = handle_from_url(k, url).unwrap_or_else(|| url.to_lowercase());
                (k, hash_identity(salt, &id))
            })
            .collect(),
        pinned_repos: p.pinned_repos.iter().map(|r| hash_identity(salt, &r.to_lowercase())).collect(),
        post_count: p.post_count,
        comment_count: p.comment_count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub label: String,
    pub count: usize,
    pub share: f64,
    /// Rendered indented under the previous row.
    pub sub_row: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStatsTable {
    pub denominator: usize,
    pub rows: Vec<StatRow>,
    pub intersections: Vec<StatRow>,
}

/// The rows reported beneath the pooled code-hosting row.
pub const TABLE_PLATFORMS: [Platform; 8] = [
    Platform::Twitter,
    Platform::Linkedin,
    Platform::Medium,
    Platform::Stackoverflow,
    Platform::Instagram,
    Platform::Facebook,
    Platform::Youtube,
    Platform::Twitch,
];

/// GitHub∧Twitter, GitHub∧Linkedin and GitHub∧Twitter∧Linkedin.
pub fn default_intersections() -> Vec<Vec<Platform>> {
    use Platform::*;
    vec![vec![Github, Twitter], vec![Github, Linkedin], vec![Github, Twitter, Linkedin]]
}

pub fn count_linking(profiles: &[UserProfile], platforms: &[Platform]) -> usize {
    profiles.iter().filter(|p| platforms.iter().all(|&q| p.has(q))).count()
}

/// Share and count of users linking each platform, plus the requested
/// intersections. GitHub and GitLab share one pooled row; intersections use
/// the platforms exactly as given.
pub fn link_stats(profiles: &[UserProfile], intersections: &[Vec<Platform>]) -> Result<LinkStatsTable> {
    if profiles.is_empty() {
        return Err(Error::Model("link statistics need at least one profile".into()));
    }
    let d = profiles.len();
    let row = |label: String, count: usize, sub_row: bool| StatRow {
        label,
        count,
        share: count as f64 / d as f64,
        sub_row,
    };
    let pooled = profiles
        .iter()
        .filter(|p| p.has(Platform::Github) || p.has(Platform::Gitlab))
        .count();
    let pinned = profiles.iter().filter(|p| !p.pinned_repos.is_empty()).count();
    let mut rows = vec![
        row("GitHub/GitLab".into(), pooled, false),
        row("Has pinned repo(s)".into(), pinned, true),
    ];
    for p in TABLE_PLATFORMS {
        rows.push(row(p.display_name().into(), count_linking(profiles, &[p]), false));
    }
    let intersections = intersections
        .iter()
        .map(|set| {
            let label = set.iter().map(|p| p.display_name()).collect::<Vec<_>>().join(" & ");
            row(label, count_linking(profiles, set), false)
        })
        .collect();
    Ok(LinkStatsTable {
        denominator: d,
        rows,
        intersections,
    })
}

fn thousands(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn percent(share: f64) -> String {
    format!("{}%", (share * 100.0).round() as i64)
}

impl LinkStatsTable {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Linked Platform | Share of Users | Count |\n|---|---:|---:|\n");
        let line = |out: &mut String, r: &StatRow| {
            if r.sub_row {
                let _ = writeln!(out, "| *— {}* | *{}* | *{}* |", r.label, percent(r.share), thousands(r.count));
            } else {
                let _ = writeln!(out, "| {} | {} | {} |", r.label, percent(r.share), thousands(r.count));
            }
        };
        for r in &self.rows {
            line(&mut out, r);
        }
        for r in &self.intersections {
            line(&mut out, r);
        }
        let _ = writeln!(out, "\nShares are over {} users with a fetched profile.", thousands(self.denominator));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,label,share,count\n");
        for (section, rows) in [("platform", &self.rows), ("intersection", &self.intersections)] {
            for r in rows {
                let section = if r.sub_row { "sub" } else { section };
                let _ = writeln!(out, "{section},{},{:.4},{}", r.label, r.share, r.count);
            }
        }
        let _ = writeln!(out, "denominator,users,1.0000,{}", self.denominator);
        out
    }
}

/// `(github, twitter)` handle pairs of users linking both.
pub fn identity_pairs(profiles: &[UserProfile]) -> BTreeSet<(String, String)> {
    profiles
        .iter()
        .filter_map(|p| Some((p.handle(Platform::Github)?, p.handle(Platform::Twitter)?)))
        .collect()
}

/// Read `github_handle,twitter_handle` rows; handles are normalised.
pub fn parse_external_pairs(text: &str, location: &Path) -> Result<BTreeSet<(String, String)>> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.to_ascii_lowercase().starts_with("github")) {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(g), Some(t)) = (cols.next(), cols.next()) else {
            return Err(Error::parse(
                "external pairs",
                format!("{}:{}", location.display(), i + 1),
                "expected github_handle,twitter_handle",
            ));
        };
        let (g, t) = (normalize_handle(g.trim_matches('"')), normalize_handle(t.trim_matches('"')));
        if !g.is_empty() && !t.is_empty() {
            out.insert((g, t));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub local: usize,
    pub absent: usize,
    /// `absent / local`.
    pub fraction_absent: f64,
}

/// How many local pairs the external dataset does not contain.
pub fn external_overlap(
    local: &BTreeSet<(String, String)>,
    external: &BTreeSet<(String, String)>,
) -> Result<Overlap> {
    if local.is_empty() {
        return Err(Error::Model("no local identity pairs to compare".into()));
    }
    let absent = local.difference(external).count();
    Ok(Overlap {
        local: local.len(),
        absent,
        fraction_absent: absent as f64 / local.len() as f64,
    })
}

impl Overlap {
    pub fn to_markdown(&self) -> String {
        format!(
            "Of {} users linking both GitHub and Twitter, {} ({}) are not in the external dataset.\n",
            thousands(self.local),
            thousands(self.absent),
            percent(self.fraction_absent)
        )
    }
}
