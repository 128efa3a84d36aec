//! Newline-delimited record ingestion.
//!
//! Each line is one JSON object naming its kind in a discriminator field
//! (`"type"` by default). Event kinds and the `"asset"` kind are parsed;
//! unknown kinds and malformed lines become diagnostics carrying the source
//! name and line number.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::asset::AssetRecord;
use super::event::{Event, EventKind};
use super::ids::AssetId;

pub const DEFAULT_DISCRIMINATOR: &str = "type";
pub const ASSET_KIND: &str = "asset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Malformed,
    UnknownKind,
    Duplicate,
    ConflictingAsset,
    DanglingAuction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub source: String,
    /// 1-based line number, when the diagnostic belongs to one input line.
    pub line: Option<usize>,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {:?}: {}", self.source, l, self.kind, self.message),
            None => write!(f, "{}: {:?}: {}", self.source, self.kind, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {source_name}: {err}")]
    Io {
        source_name: String,
        #[source]
        err: std::io::Error,
    },
    #[error(
        "{source_name}: {malformed} of {total} records are malformed (wrong file?); first problems: {}",
        .first.join("; ")
    )]
    TooManyMalformed {
        source_name: String,
        malformed: usize,
        total: usize,
        first: Vec<String>,
    },
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Name of the field holding the record kind.
    pub discriminator: String,
    /// A source whose malformed-line fraction exceeds this is rejected.
    pub max_malformed_fraction: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            discriminator: DEFAULT_DISCRIMINATOR.to_string(),
            max_malformed_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Origin {
    source: usize,
    line: usize,
}

/// Validated, time-sorted, de-duplicated input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventStream {
    events: Vec<Event>,
    assets: Vec<AssetRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl EventStream {
    /// Builds a stream from in-memory records, applying the same ordering,
    /// de-duplication and reference checks as file ingestion.
    pub fn from_parts(events: Vec<Event>, assets: Vec<AssetRecord>) -> Self {
        let mut ing = Ingestor::new(IngestOptions::default());
        ing.sources.push("<memory>".into());
        ing.events.extend(
            events
                .into_iter()
                .enumerate()
                .map(|(i, e)| (e, Origin { source: 0, line: i + 1 })),
        );
        ing.assets.extend(
            assets
                .into_iter()
                .enumerate()
                .map(|(i, a)| (a, Origin { source: 0, line: i + 1 })),
        );
        ing.finish()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Asset records, sorted by id, one per id.
    pub fn assets(&self) -> &[AssetRecord] {
        &self.assets
    }

    pub fn asset(&self, id: &AssetId) -> Option<&AssetRecord> {
        self.assets
            .binary_search_by(|a| a.id.cmp(id))
            .ok()
            .map(|i| &self.assets[i])
    }

    pub fn collection_of(&self, id: &AssetId) -> Option<&str> {
        self.asset(id).map(|a| a.collection_slug.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn diagnostics_of(&self, kind: DiagnosticKind) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(move |d| d.kind == kind)
    }

    /// Writes the canonical newline-delimited form: asset lines first, then
    /// events in stream order.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for a in &self.assets {
            write_asset_line(&mut w, a)?;
        }
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_events_ndjson<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_assets_ndjson<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for a in &self.assets {
            write_asset_line(&mut w, a)?;
        }
        Ok(())
    }
}

fn write_asset_line<W: Write>(w: &mut W, a: &AssetRecord) -> std::io::Result<()> {
    let mut v = serde_json::to_value(a)?;
    if let Value::Object(m) = &mut v {
        let mut tagged = Map::new();
        tagged.insert(DEFAULT_DISCRIMINATOR.into(), Value::from(ASSET_KIND));
        tagged.append(m);
        v = Value::Object(tagged);
    }
    serde_json::to_writer(&mut *w, &v)?;
    w.write_all(b"\n")
}

/// Accumulates records from one or more sources, then produces an
/// [`EventStream`].
#[derive(Debug)]
pub struct Ingestor {
    opts: IngestOptions,
    sources: Vec<String>,
    events: Vec<(Event, Origin)>,
    assets: Vec<(AssetRecord, Origin)>,
    diagnostics: Vec<Diagnostic>,
}

enum Parsed {
    Event(Event),
    Asset(AssetRecord),
    Unknown(String),
}

impl Ingestor {
    pub fn new(opts: IngestOptions) -> Self {
        Self {
            opts,
            sources: Vec::new(),
            events: Vec::new(),
            assets: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Reads one newline-delimited source.
    pub fn read<R: BufRead>(&mut self, name: &str, reader: R) -> Result<(), IngestError> {
        let source = self.sources.len();
        self.sources.push(name.to_string());
        let mut total = 0usize;
        let mut malformed = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|err| IngestError::Io {
                source_name: name.to_string(),
                err,
            })?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            total += 1;
            let origin = Origin { source, line: i + 1 };
            match self.parse_line(text) {
                Ok(Parsed::Event(e)) => self.events.push((e, origin)),
                Ok(Parsed::Asset(a)) => self.assets.push((a, origin)),
                Ok(Parsed::Unknown(kind)) => self.diagnostics.push(Diagnostic {
                    source: name.to_string(),
                    line: Some(i + 1),
                    kind: DiagnosticKind::UnknownKind,
                    message: format!("unknown record kind {kind:?}"),
                }),
                Err(msg) => {
                    malformed.push(format!("line {}: {msg}", i + 1));
                    self.diagnostics.push(Diagnostic {
                        source: name.to_string(),
                        line: Some(i + 1),
                        kind: DiagnosticKind::Malformed,
                        message: msg,
                    });
                }
            }
        }
        if total > 0 && malformed.len() as f64 > self.opts.max_malformed_fraction * total as f64 {
            let count = malformed.len();
            malformed.truncate(3);
            return Err(IngestError::TooManyMalformed {
                source_name: name.to_string(),
                malformed: count,
                total,
                first: malformed,
            });
        }
        Ok(())
    }

    fn parse_line(&self, text: &str) -> Result<Parsed, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let Value::Object(mut obj) = value else {
            return Err("record is not a JSON object".into());
        };
        let kind = match obj.remove(&self.opts.discriminator) {
            Some(Value::String(s)) => s,
            Some(_) => return Err(format!("field {:?} is not a string", self.opts.discriminator)),
            None => return Err(format!("missing field {:?}", self.opts.discriminator)),
        };
        if kind == ASSET_KIND {
            let a: AssetRecord =
                serde_json::from_value(Value::Object(obj)).map_err(|e| format!("asset: {e}"))?;
            a.validate().map_err(|e| format!("asset: {e}"))?;
            return Ok(Parsed::Asset(a));
        }
        if EventKind::from_wire(&kind).is_none() {
            return Ok(Parsed::Unknown(kind));
        }
        obj.insert(DEFAULT_DISCRIMINATOR.into(), Value::String(kind.clone()));
        let mut e: Event =
            serde_json::from_value(Value::Object(obj)).map_err(|e| format!("{kind}: {e}"))?;
        e.validate_and_normalize().map_err(|m| format!("{kind}: {m}"))?;
        Ok(Parsed::Event(e))
    }

    /// Sorts, removes duplicates and flags dangling auction references.
    pub fn finish(self) -> EventStream {
        let Ingestor {
            sources,
            mut events,
            mut assets,
            mut diagnostics,
            ..
        } = self;
        let diag = |origin: &Origin, kind, message: String| Diagnostic {
            source: sources[origin.source].clone(),
            line: Some(origin.line),
            kind,
            message,
        };

        // Content is the tie-break after time, so any permutation of the same
        // records sorts identically; stability keeps the first-read copy of a
        // duplicate in front.
        events.sort_by(|(a, _), (b, _)| a.time().cmp(&b.time()).then_with(|| a.cmp(b)));
        let mut kept: Vec<(Event, Origin)> = Vec::with_capacity(events.len());
        for (e, o) in events {
            if let Some((prev, prev_o)) = kept.last() {
                if *prev == e {
                    let msg = format!(
                        "duplicate {} record (first seen at {}:{})",
                        e.kind().wire_name(),
                        sources[prev_o.source],
                        prev_o.line
                    );
                    diagnostics.push(diag(&o, DiagnosticKind::Duplicate, msg));
                    continue;
                }
            }
            kept.push((e, o));
        }

        assets.sort_by(|(a, _), (b, _)| a.cmp(b));
        let mut kept_assets: Vec<(AssetRecord, Origin)> = Vec::with_capacity(assets.len());
        for (a, o) in assets {
            if let Some((prev, prev_o)) = kept_assets.last() {
                if prev.id == a.id {
                    let (kind, what) = if *prev == a {
                        (DiagnosticKind::Duplicate, "duplicate")
                    } else {
                        (DiagnosticKind::ConflictingAsset, "conflicting")
                    };
                    let msg = format!(
                        "{what} asset record for {} (kept {}:{})",
                        a.id, sources[prev_o.source], prev_o.line
                    );
                    diagnostics.push(diag(&o, kind, msg));
                    continue;
                }
            }
            kept_assets.push((a, o));
        }

        let opened: HashSet<&str> = kept
            .iter()
            .filter_map(|(e, _)| match e {
                Event::AuctionStart(a) => Some(a.auction_id.as_str()),
                _ => None,
            })
            .collect();
        let mut dangling = Vec::new();
        for (e, o) in &kept {
            if matches!(e, Event::Bid(_) | Event::CancelBid(_) | Event::Win(_)) {
                let id = e.auction_id().unwrap_or_default();
                if !opened.contains(id) {
                    dangling.push(diag(
                        o,
                        DiagnosticKind::DanglingAuction,
                        format!("{} references auction {id:?} that was never started", e.kind().wire_name()),
                    ));
                }
            }
        }
        diagnostics.extend(dangling);

        EventStream {
            events: kept.into_iter().map(|(e, _)| e).collect(),
            assets: kept_assets.into_iter().map(|(a, _)| a).collect(),
            diagnostics,
        }
    }
}

/// Reads a single source with default options.
pub fn ingest<R: BufRead>(source: R, opts: &IngestOptions) -> Result<EventStream, IngestError> {
    let mut ing = Ingestor::new(opts.clone());
    ing.read("<input>", source)?;
    Ok(ing.finish())
}
