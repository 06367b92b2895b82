use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use url::Url;

use super::{open, CorpusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Platform {
    Facebook,
    Instagram,
    TruthSocial,
    Twitter,
}

impl Platform {
    pub const ALL: [Platform; 4] = [
        Platform::Facebook,
        Platform::Instagram,
        Platform::TruthSocial,
        Platform::Twitter,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Platform::Facebook => "Facebook",
            Platform::Instagram => "Instagram",
            Platform::TruthSocial => "TruthSocial",
            Platform::Twitter => "Twitter",
        }
    }

    /// Column label used in capture tallies.
    pub fn short(&self) -> &'static str {
        match self {
            Platform::Facebook => "FB",
            Platform::Instagram => "IG",
            Platform::TruthSocial => "TS",
            Platform::Twitter => "T",
        }
    }

    pub fn from_host(host: &str) -> Option<Platform> {
        let host = host.to_ascii_lowercase();
        let host = host
            .strip_prefix("www.")
            .or_else(|| host.strip_prefix("mobile."))
            .or_else(|| host.strip_prefix("m."))
            .unwrap_or(&host);
        match host {
            "twitter.com" | "x.com" => Some(Platform::Twitter),
            "instagram.com" => Some(Platform::Instagram),
            "facebook.com" => Some(Platform::Facebook),
            "truthsocial.com" => Some(Platform::TruthSocial),
            _ => None,
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.to_ascii_lowercase().replace(['_', '-', ' '], "");
        Platform::ALL
            .into_iter()
            .find(|p| p.as_str().to_ascii_lowercase() == wanted || p.short().to_ascii_lowercase() == wanted)
            .ok_or_else(|| CorpusError::UnsupportedPlatform(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostUrl {
    pub platform: Platform,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub account: Option<String>,
}

/// Permalink templates with `{id}` and `{account}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UrlTemplates {
    pub facebook: String,
    pub instagram: String,
    pub truth_social: String,
    pub twitter: String,
}

impl Default for UrlTemplates {
    fn default() -> Self {
        UrlTemplates {
            facebook: "https://www.facebook.com/{account}/posts/{id}".into(),
            instagram: "https://www.instagram.com/p/{id}/".into(),
            truth_social: "https://truthsocial.com/@{account}/posts/{id}".into(),
            twitter: "https://twitter.com/{account}/status/{id}".into(),
        }
    }
}

impl UrlTemplates {
    pub fn from_toml_str(text: &str) -> Result<Self, CorpusError> {
        let t: UrlTemplates = toml::from_str(text).map_err(|e| CorpusError::Config(e.to_string()))?;
        for p in Platform::ALL {
            if !t.get(p).contains("{id}") {
                return Err(CorpusError::Config(format!("{p} template lacks `{{id}}`")));
            }
        }
        Ok(t)
    }

    pub fn get(&self, platform: Platform) -> &str {
        match platform {
            Platform::Facebook => &self.facebook,
            Platform::Instagram => &self.instagram,
            Platform::TruthSocial => &self.truth_social,
            Platform::Twitter => &self.twitter,
        }
    }

    pub fn build(
        &self,
        platform: Platform,
        post_id: &str,
        account: Option<&str>,
    ) -> Result<PostUrl, CorpusError> {
        let post_id = post_id.trim();
        if post_id.is_empty() {
            return Err(CorpusError::MissingPostId);
        }
        let template = self.get(platform);
        // Only kept when the permalink carries it.
        let account = account
            .map(str::trim)
            .filter(|a| !a.is_empty() && template.contains("{account}"));
        let url = match account {
            Some(a) => template.replace("{account}", a),
            None if template.contains("{account}") => {
                return Err(CorpusError::MissingAccount(platform))
            }
            None => template.to_owned(),
        }
        .replace("{id}", post_id);
        Ok(PostUrl {
            platform,
            url,
            post_id: Some(post_id.to_owned()),
            account: account.map(str::to_owned),
        })
    }
}

pub fn build_url(
    platform: Platform,
    post_id: &str,
    account: Option<&str>,
) -> Result<PostUrl, CorpusError> {
    UrlTemplates::default().build(platform, post_id, account)
}

/// `(account, post_id)` when the path has the platform's permalink shape.
fn path_parts(platform: Platform, url: &Url) -> (Option<String>, Option<String>) {
    let segs: Vec<&str> = url
        .path_segments()
        .map(|s| s.filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    let some = |s: &str| Some(s.to_owned());
    match (platform, segs.as_slice()) {
        (Platform::Twitter, [account, "status" | "statuses", id, ..]) => (some(account), some(id)),
        (Platform::Instagram, ["p" | "reel", id, ..]) => (None, some(id)),
        (Platform::Facebook, [account, "posts", id, ..]) => (some(account), some(id)),
        (Platform::TruthSocial, [account, "posts", id, ..]) => {
            (account.strip_prefix('@').map(str::to_owned), some(id))
        }
        _ => (None, None),
    }
}

/// Parses one URL, extracting account and post id where recognizable.
pub fn parse_post_url(text: &str) -> Result<PostUrl, String> {
    let url = Url::parse(text.trim()).map_err(|e| e.to_string())?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(format!("scheme `{}` is not http(s)", url.scheme()));
    }
    let host = url.host_str().ok_or("URL has no host")?;
    let platform = Platform::from_host(host).ok_or_else(|| format!("unknown host `{host}`"))?;
    let (account, post_id) = path_parts(platform, &url);
    Ok(PostUrl {
        platform,
        url: text.trim().to_owned(),
        post_id,
        account,
    })
}

/// One URL per line; blank lines and `#` comments skipped.
pub fn load_url_list(path: &Path, platform: Platform) -> Result<Vec<PostUrl>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let post = parse_post_url(text).map_err(|reason| CorpusError::MalformedUrl {
            line: i + 1,
            reason,
        })?;
        if post.platform != platform {
            return Err(CorpusError::PlatformMismatch {
                line: i + 1,
                expected: platform,
                host: Url::parse(text).ok().and_then(|u| u.host_str().map(str::to_owned)).unwrap_or_default(),
            });
        }
        out.push(post);
    }
    Ok(out)
}
