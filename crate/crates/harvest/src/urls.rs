use regex::Regex;
use thiserror::Error;
use url::Url;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UrlError {
    #[error("`{0}` is not an absolute URL")]
    NotAbsolute(String),
    #[error("`{0}` is not an http(s) URL")]
    Scheme(String),
    #[error("invalid allow pattern `{pattern}`: {reason}")]
    Pattern { pattern: String, reason: String },
}

/// Parses an absolute http(s) URL and canonicalizes it.
pub fn parse_absolute(s: &str) -> Result<Url, UrlError> {
    let url = Url::parse(s.trim()).map_err(|_| UrlError::NotAbsolute(s.to_owned()))?;
    if !matches!(url.scheme(), "http" | "https") || url.host_str().is_none() {
        return Err(UrlError::Scheme(s.to_owned()));
    }
    Ok(canonicalize(url))
}

/// Fragment dropped. Parsing already lowercases scheme and host, resolves
/// dot-segments and drops default ports; the query is kept.
pub fn canonicalize(mut url: Url) -> Url {
    url.set_fragment(None);
    url
}

/// A link-following rule: plain substring of the URL, or `re:`-prefixed
/// regular expression searched in the URL.
#[derive(Debug, Clone)]
pub enum AllowPattern {
    Substring(String),
    Regex(Regex),
}

impl AllowPattern {
    pub fn parse(s: &str) -> Result<Self, UrlError> {
        match s.strip_prefix("re:") {
            Some(re) => Regex::new(re)
                .map(AllowPattern::Regex)
                .map_err(|e| UrlError::Pattern { pattern: s.to_owned(), reason: e.to_string() }),
            None if s.is_empty() => Err(UrlError::Pattern { pattern: s.to_owned(), reason: "empty pattern".into() }),
            None => Ok(AllowPattern::Substring(s.to_owned())),
        }
    }

    pub fn matches(&self, url: &Url) -> bool {
        match self {
            AllowPattern::Substring(s) => url.as_str().contains(s.as_str()),
            AllowPattern::Regex(re) => re.is_match(url.as_str()),
        }
    }
}

impl PartialEq for AllowPattern {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (AllowPattern::Substring(a), AllowPattern::Substring(b)) => a == b,
            (AllowPattern::Regex(a), AllowPattern::Regex(b)) => a.as_str() == b.as_str(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let u = parse_absolute("HTTPS://Example.ORG:443/a/./b/../c?page=2#top").unwrap();
        assert_eq!(u.as_str(), "https://example.org/a/c?page=2");
        let u = parse_absolute("http://example.org:80").unwrap();
        assert_eq!(u.as_str(), "http://example.org/");
        let u = parse_absolute("http://example.org:8080/x").unwrap();
        assert_eq!(u.as_str(), "http://example.org:8080/x");
    }

    #[test]
    fn rejects_relative_and_other_schemes() {
        assert!(matches!(parse_absolute("/pa/news"), Err(UrlError::NotAbsolute(_))));
        assert!(matches!(parse_absolute("mailto:a@b.c"), Err(UrlError::Scheme(_))));
        assert!(matches!(parse_absolute("ftp://x.org/"), Err(UrlError::Scheme(_))));
    }

    #[test]
    fn patterns() {
        let u = parse_absolute("https://x.org/pa/archive/2?page=3").unwrap();
        assert!(AllowPattern::parse("/archive/").unwrap().matches(&u));
        assert!(!AllowPattern::parse("/about").unwrap().matches(&u));
        assert!(AllowPattern::parse(r"re:page=\d+$").unwrap().matches(&u));
        assert!(AllowPattern::parse("re:(").is_err());
        assert!(AllowPattern::parse("").is_err());
    }
}
