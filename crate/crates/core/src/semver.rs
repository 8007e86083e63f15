//! Semantic version parsing and precedence.
//!
//! Registry data is messy, so parsing is lenient: a leading `v` or `=` is
//! stripped and a missing minor or patch component is padded with zero.
//! Anything that still does not reduce to `major.minor.patch` is rejected.
//!
//! Ordering follows semver precedence: the numeric triple first, then a
//! release without prerelease identifiers outranks any prerelease of the same
//! triple, then prerelease identifiers are compared pairwise. Build metadata
//! never participates in ordering or equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Identifier {
    Numeric(u64),
    AlphaNumeric(String),
}

impl Ord for Identifier {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Identifier::Numeric(a), Identifier::Numeric(b)) => a.cmp(b),
            (Identifier::Numeric(_), Identifier::AlphaNumeric(_)) => Ordering::Less,
            (Identifier::AlphaNumeric(_), Identifier::Numeric(_)) => Ordering::Greater,
            (Identifier::AlphaNumeric(a), Identifier::AlphaNumeric(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Identifier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identifier::Numeric(n) => write!(f, "{n}"),
            Identifier::AlphaNumeric(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SemVer {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub prerelease: Vec<Identifier>,
    /// Opaque build metadata, kept for display only.
    pub build: String,
}

impl SemVer {
    pub fn new(major: u64, minor: u64, patch: u64) -> Self {
        SemVer {
            major,
            minor,
            patch,
            prerelease: Vec::new(),
            build: String::new(),
        }
    }

    pub fn is_prerelease(&self) -> bool {
        !self.prerelease.is_empty()
    }
}

pub fn parse_semver(text: &str) -> Result<SemVer, Error> {
    let malformed = || Error::MalformedVersion(text.to_string());

    let mut rest = text.trim();
    rest = rest.strip_prefix('=').unwrap_or(rest).trim_start();
    rest = rest
        .strip_prefix('v')
        .or_else(|| rest.strip_prefix('V'))
        .unwrap_or(rest);

    let (rest, build) = match rest.split_once('+') {
        Some((head, build)) => {
            if !valid_dotted(build, |_| true) {
                return Err(malformed());
            }
            (head, build.to_string())
        }
        None => (rest, String::new()),
    };

    let (core, pre) = match rest.split_once('-') {
        Some((core, pre)) => (core, Some(pre)),
        None => (rest, None),
    };

    let mut numbers = [0u64; 3];
    let parts: Vec<&str> = core.split('.').collect();
    if parts.is_empty() || parts.len() > 3 {
        return Err(malformed());
    }
    for (slot, part) in numbers.iter_mut().zip(&parts) {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        *slot = part.parse().map_err(|_| malformed())?;
    }

    let prerelease = match pre {
        None => Vec::new(),
        Some(pre) => {
            if !valid_dotted(pre, |_| true) {
                return Err(malformed());
            }
            pre.split('.')
                .map(|id| {
                    let numeric = id.bytes().all(|b| b.is_ascii_digit())
                        && (id == "0" || !id.starts_with('0'));
                    if numeric {
                        id.parse()
                            .map(Identifier::Numeric)
                            .unwrap_or_else(|_| Identifier::AlphaNumeric(id.to_string()))
                    } else {
                        Identifier::AlphaNumeric(id.to_string())
                    }
                })
                .collect()
        }
    };

    Ok(SemVer {
        major: numbers[0],
        minor: numbers[1],
        patch: numbers[2],
        prerelease,
        build,
    })
}

/// Non-empty dot-separated identifiers made of `[0-9A-Za-z-]`.
fn valid_dotted(text: &str, extra: impl Fn(&str) -> bool) -> bool {
    !text.is_empty()
        && text.split('.').all(|id| {
            !id.is_empty()
                && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
                && extra(id)
        })
}

impl FromStr for SemVer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_semver(s)
    }
}

impl Ord for SemVer {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.major, self.minor, self.patch)
            .cmp(&(other.major, other.minor, other.patch))
            .then_with(|| match (self.prerelease.is_empty(), other.prerelease.is_empty()) {
                (true, true) => Ordering::Equal,
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                // Vec ordering is lexicographic with the shorter prefix first,
                // which is exactly the semver rule for identifier lists.
                (false, false) => self.prerelease.cmp(&other.prerelease),
            })
    }
}

impl PartialOrd for SemVer {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for SemVer {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SemVer {}

impl std::hash::Hash for SemVer {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.major, self.minor, self.patch, &self.prerelease).hash(state);
    }
}

impl fmt::Display for SemVer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)?;
        if !self.prerelease.is_empty() {
            f.write_str("-")?;
            for (i, id) in self.prerelease.iter().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{id}")?;
            }
        }
        if !self.build.is_empty() {
            write!(f, "+{}", self.build)?;
        }
        Ok(())
    }
}

impl Serialize for SemVer {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SemVer {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_semver(&text).map_err(serde::de::Error::custom)
    }
}
