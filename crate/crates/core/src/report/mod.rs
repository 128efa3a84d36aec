//! Run configuration, the analysis pipeline and its report.

mod audit;
mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

pub use audit::{audit, AuditInputs, AuditReport, EscrowHolding, LivenessCounts};
pub use config::{ConfigError, DetectorConfig, CONFIG_KEYS};

use crate::graphs::GraphContext;
use crate::integrity::{
    collections_from_assets, count_royalty_increases, detect_offplatform_trades,
    find_duplicate_asset_urls, find_similar_collection_names, find_similar_images,
    DuplicateUrlReport, EvasionInstance, ImageHash, NameMatch, RoyaltyIncreases, SimilarImages,
};
use crate::model::{DiagnosticKind, EventStream};
use crate::trading::{
    detect_bid_shielding, detect_failed_highest_bid, detect_shill_bids, detect_wash_trades,
    flagged_sale_set, wash_trade_factors, FailedHighestBid, ShieldFinding, ShillFinding,
    WashFinding,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Detector families selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Wash,
    Shill,
    /// Bid shielding and the failed-highest-bid audit.
    Shield,
    /// Look-alike names, shared URLs and, when hashes are supplied, images.
    Counterfeit,
    /// Off-platform trades and royalty increases.
    Evasion,
}

impl Detector {
    pub const ALL: [Detector; 5] = [
        Detector::Wash,
        Detector::Shill,
        Detector::Shield,
        Detector::Counterfeit,
        Detector::Evasion,
    ];
}

impl FromStr for Detector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "wash" => Ok(Detector::Wash),
            "shill" => Ok(Detector::Shill),
            "shield" => Ok(Detector::Shield),
            "counterfeit" => Ok(Detector::Counterfeit),
            "evasion" => Ok(Detector::Evasion),
            other => Err(format!(
                "unknown detector {other:?} (expected wash, shill, shield, counterfeit, evasion or all)"
            )),
        }
    }
}

/// Parses a comma-separated list; `all` selects every detector.
pub fn parse_detectors(list: &str) -> Result<BTreeSet<Detector>, String> {
    let mut out = BTreeSet::new();
    for item in list.split(',') {
        if item.trim() == "all" {
            out.extend(Detector::ALL);
        } else {
            out.insert(item.parse()?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSummary {
    pub events: usize,
    pub assets: usize,
    pub diagnostics: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfeitFindings {
    pub names: Vec<NameMatch>,
    pub urls: DuplicateUrlReport,
    /// Absent when no image hashes were supplied.
    pub images: Option<SimilarImages>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Findings {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wash: Option<Vec<WashFinding>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shill: Option<Vec<ShillFinding>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shield: Option<Vec<ShieldFinding>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failed_highest_bid: Option<Vec<FailedHighestBid>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterfeit: Option<CounterfeitFindings>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evasion: Option<Vec<EvasionInstance>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub royalty_increases: Option<BTreeMap<String, Vec<RoyaltyIncreases>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub wash_instances: usize,
    pub wash_flagged_sales: usize,
    pub wash_volume_usd: Decimal,
    pub wash_trade_factor: BTreeMap<String, Decimal>,
    pub shill_instances: usize,
    pub shill_profit_usd: Decimal,
    pub shield_instances: usize,
    pub shielded_bid_difference_usd: Decimal,
    pub failed_highest_bid_instances: usize,
    pub name_matches: usize,
    pub duplicate_url_groups: usize,
    pub image_pairs: usize,
    pub evasion_instances: usize,
    pub royalty_increases: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    /// Every threshold in effect, as `key → value`.
    pub config: BTreeMap<String, String>,
    pub detectors: BTreeSet<Detector>,
    pub input: InputSummary,
    pub findings: Findings,
    pub summary: Summary,
}

impl Summary {
    /// Totals derived from `findings` alone.
    pub fn from_findings(f: &Findings, stream: &EventStream) -> Self {
        let mut s = Summary::default();
        if let Some(w) = &f.wash {
            s.wash_instances = w.len();
            s.wash_flagged_sales = flagged_sale_set(w).len();
            s.wash_volume_usd = w.iter().map(|x| x.volume_usd).sum();
            s.wash_trade_factor = wash_trade_factors(w, stream);
        }
        if let Some(v) = &f.shill {
            s.shill_instances = v.len();
            s.shill_profit_usd = v.iter().filter_map(|x| x.shill_profit_usd).sum();
        }
        if let Some(v) = &f.shield {
            s.shield_instances = v.len();
            s.shielded_bid_difference_usd = v.iter().map(|x| x.shielded_bid_difference).sum();
        }
        if let Some(v) = &f.failed_highest_bid {
            s.failed_highest_bid_instances = v.len();
        }
        if let Some(c) = &f.counterfeit {
            s.name_matches = c.names.len();
            s.duplicate_url_groups = c.urls.counterfeit.len();
            s.image_pairs = c.images.as_ref().map_or(0, |i| i.pairs.len());
        }
        if let Some(v) = &f.evasion {
            s.evasion_instances = v.len();
        }
        if let Some(r) = &f.royalty_increases {
            s.royalty_increases = r.values().flatten().map(|x| x.increases).sum();
        }
        s
    }
}

/// Runs the selected detectors over `stream`.
pub fn analyze(
    stream: &EventStream,
    cfg: &DetectorConfig,
    detectors: &BTreeSet<Detector>,
    image_hashes: Option<&[ImageHash]>,
) -> RunReport {
    let mut f = Findings::default();
    let needs_graphs = detectors.contains(&Detector::Wash) || detectors.contains(&Detector::Shill);
    let ctx = needs_graphs.then(|| GraphContext::new(stream, cfg.hub_degree_cutoff));
    if let Some(ctx) = &ctx {
        if detectors.contains(&Detector::Wash) {
            f.wash = Some(detect_wash_trades(stream, ctx, &cfg.wash));
        }
        if detectors.contains(&Detector::Shill) {
            f.shill = Some(detect_shill_bids(stream, ctx, &cfg.shill));
        }
    }
    if detectors.contains(&Detector::Shield) {
        f.shield = Some(detect_bid_shielding(stream, &cfg.shield));
        f.failed_highest_bid = Some(detect_failed_highest_bid(stream));
    }
    if detectors.contains(&Detector::Counterfeit) {
        let collections = collections_from_assets(stream.assets());
        f.counterfeit = Some(CounterfeitFindings {
            names: find_similar_collection_names(&collections, &cfg.names),
            urls: find_duplicate_asset_urls(stream.assets()),
            images: image_hashes
                .map(|h| find_similar_images(h, stream.assets(), cfg.hamming_threshold)),
        });
    }
    if detectors.contains(&Detector::Evasion) {
        f.evasion = Some(detect_offplatform_trades(stream, cfg.evasion_window_seconds));
        f.royalty_increases = Some(count_royalty_increases(stream));
    }

    let mut diagnostics = BTreeMap::new();
    for d in &stream.diagnostics {
        let key = match d.kind {
            DiagnosticKind::Malformed => "malformed",
            DiagnosticKind::UnknownKind => "unknown_kind",
            DiagnosticKind::Duplicate => "duplicate",
            DiagnosticKind::ConflictingAsset => "conflicting_asset",
            DiagnosticKind::DanglingAuction => "dangling_auction",
        };
        *diagnostics.entry(key.to_string()).or_insert(0) += 1;
    }
    let summary = Summary::from_findings(&f, stream);
    RunReport {
        tool_version: TOOL_VERSION.to_string(),
        config: cfg.echo(),
        detectors: detectors.clone(),
        input: InputSummary {
            events: stream.len(),
            assets: stream.assets().len(),
            diagnostics,
        },
        findings: f,
        summary,
    }
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Short human-readable summary.
    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "nftm {}: {} events, {} assets",
            self.tool_version, self.input.events, self.input.assets
        );
        for (k, n) in &self.input.diagnostics {
            let _ = writeln!(out, "  diagnostics {k}: {n}");
        }
        let f = &self.findings;
        if f.wash.is_some() {
            let _ = writeln!(
                out,
                "wash trading: {} instances, {} sales, ${} volume",
                s.wash_instances, s.wash_flagged_sales, s.wash_volume_usd
            );
        }
        if f.shill.is_some() {
            let _ = writeln!(
                out,
                "shill bidding: {} instances, ${} profit",
                s.shill_instances, s.shill_profit_usd
            );
        }
        if f.shield.is_some() {
            let _ = writeln!(
                out,
                "bid shielding: {} instances, ${} shielded difference",
                s.shield_instances, s.shielded_bid_difference_usd
            );
            let _ = writeln!(
                out,
                "failed highest bids: {}",
                s.failed_highest_bid_instances
            );
        }
        if f.counterfeit.is_some() {
            let _ = writeln!(
                out,
                "counterfeits: {} name matches, {} shared URLs, {} image pairs",
                s.name_matches, s.duplicate_url_groups, s.image_pairs
            );
        }
        if f.evasion.is_some() {
            let _ = writeln!(
                out,
                "evasion: {} off-platform trades, {} royalty increases",
                s.evasion_instances, s.royalty_increases
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_baseline, inject, InjectionSpec};

    fn scenario() -> EventStream {
        let mut s = gen_baseline(5, 30, 10, 120).unwrap();
        s = inject(s, &InjectionSpec::wash_ring(3, 12, 1)).unwrap();
        s = inject(s, &InjectionSpec::shill_auction(2)).unwrap();
        s = inject(s, &InjectionSpec::shield_auction(Decimal::from(100), Decimal::from(500), 3)).unwrap();
        s.stream
    }

    #[test]
    fn detector_lists() {
        assert_eq!(parse_detectors("all").unwrap().len(), 5);
        assert_eq!(
            parse_detectors("wash, shill").unwrap(),
            BTreeSet::from([Detector::Wash, Detector::Shill])
        );
        assert!(parse_detectors("wash,bogus").is_err());
    }

    #[test]
    fn report_round_trips_and_totals_match() {
        let stream = scenario();
        let all = parse_detectors("all").unwrap();
        let r = analyze(&stream, &DetectorConfig::default(), &all, None);
        assert_eq!(r.summary.wash_instances, 1);
        assert_eq!(r.summary.wash_flagged_sales, 36);
        assert_eq!(r.summary.shill_instances, 1);
        assert_eq!(r.summary.shill_profit_usd, Decimal::from(7));
        assert_eq!(r.summary.shield_instances, 1);
        assert_eq!(r.summary.shielded_bid_difference_usd, Decimal::from(400));
        assert_eq!(r.summary, Summary::from_findings(&r.findings, &stream));

        let json = r.to_json();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), json);
        assert!(r.summary_text().contains("wash trading: 1 instances"));
    }

    #[test]
    fn unselected_detectors_are_absent() {
        let stream = scenario();
        let r = analyze(
            &stream,
            &DetectorConfig::default(),
            &BTreeSet::from([Detector::Shield]),
            None,
        );
        assert!(r.findings.wash.is_none() && r.findings.shill.is_none());
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["findings"].get("wash").is_none());
        assert_eq!(r.summary.wash_instances, 0);
    }

    #[test]
    fn reports_are_deterministic() {
        let all = parse_detectors("all").unwrap();
        let a = analyze(&scenario(), &DetectorConfig::default(), &all, None).to_json();
        let b = analyze(&scenario(), &DetectorConfig::default(), &all, None).to_json();
        assert_eq!(a, b);
    }
}
