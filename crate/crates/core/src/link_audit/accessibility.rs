//! URL liveness records and their classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use crate::model::Timestamp;

pub const ATTEMPTS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Head,
    Get,
}

/// Outcome of one request: an HTTP status, a timeout, or a failure to get
/// any response at all (DNS, refused connection, TLS).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FetchStatus {
    Code(u16),
    Timeout,
    Unreachable,
}

impl FetchStatus {
    pub fn is_ok(self) -> bool {
        self == FetchStatus::Code(200)
    }
}

impl fmt::Display for FetchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FetchStatus::Code(c) => write!(f, "{c}"),
            FetchStatus::Timeout => f.write_str("timeout"),
            FetchStatus::Unreachable => f.write_str("unreachable"),
        }
    }
}

impl Serialize for FetchStatus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FetchStatus::Code(c) => s.serialize_u16(*c),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for FetchStatus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Code(u16),
            Marker(String),
        }
        match Raw::deserialize(d)? {
            Raw::Code(c) => Ok(FetchStatus::Code(c)),
            Raw::Marker(m) => match m.as_str() {
                "timeout" => Ok(FetchStatus::Timeout),
                "unreachable" => Ok(FetchStatus::Unreachable),
                other => other
                    .parse()
                    .map(FetchStatus::Code)
                    .map_err(|_| D::Error::custom(format!("unknown status {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessibilityRecord {
    pub url: String,
    pub attempt: u8,
    pub method: Method,
    pub status: FetchStatus,
    pub observed_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Liveness {
    Alive,
    Inaccessible,
    InsufficientData,
}

/// Any 200 makes a URL alive. It is inaccessible only once all three
/// attempts have been made and none of them saw a 200; anything short of
/// that is insufficient data.
pub fn classify_accessibility(records: &[AccessibilityRecord]) -> Liveness {
    if records.iter().any(|r| r.status.is_ok()) {
        return Liveness::Alive;
    }
    let attempts: BTreeSet<u8> = records.iter().map(|r| r.attempt).collect();
    if (1..=ATTEMPTS).all(|a| attempts.contains(&a)) {
        Liveness::Inaccessible
    } else {
        Liveness::InsufficientData
    }
}

pub fn classify_all(records: &[AccessibilityRecord]) -> BTreeMap<String, Liveness> {
    let mut by_url: BTreeMap<&str, Vec<AccessibilityRecord>> = BTreeMap::new();
    for r in records {
        by_url.entry(&r.url).or_default().push(r.clone());
    }
    by_url
        .into_iter()
        .map(|(u, rs)| (u.to_string(), classify_accessibility(&rs)))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads newline-delimited records. Attempts must be 1..=3, and a URL may not
/// repeat a (attempt, method) pair.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<AccessibilityRecord>, RecordError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| RecordError::Parse { line: i + 1, message };
        let rec: AccessibilityRecord = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        if !(1..=ATTEMPTS).contains(&rec.attempt) {
            return Err(err(format!("attempt {} out of range 1..=3", rec.attempt)));
        }
        if !seen.insert((rec.url.clone(), rec.attempt, rec.method)) {
            return Err(err(format!(
                "repeated attempt {} {:?} for {}",
                rec.attempt, rec.method, rec.url
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records<W: Write>(mut w: W, records: &[AccessibilityRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
