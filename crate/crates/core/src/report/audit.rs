//! The persistence audit report.

use serde::{Deserialize, Serialize};

use crate::link_audit::{
    build_link_matrix, classify_all, count_escrowed, diff_metadata_urls, mark_taken_down,
    metadata_url_map, source_availability_stats, taken_down_between, verification_aggregates,
    AccessibilityRecord, LinkAuditMatrix, Liveness, MetadataDiff, SourceAvailability,
    VerificationTable,
};
use crate::model::{AccountId, AssetRecord, EventStream, Timestamp};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LivenessCounts {
    pub alive: usize,
    pub inaccessible: usize,
    pub insufficient_data: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscrowHolding {
    pub account: AccountId,
    pub at_time: Timestamp,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub liveness: Option<LivenessCounts>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub link_matrix: Option<LinkAuditMatrix>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metadata_diff: Option<MetadataDiff>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub taken_down: Option<usize>,
    pub verification: VerificationTable,
    pub source_availability: SourceAvailability,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub escrow: Option<EscrowHolding>,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct AuditInputs<'a> {
    pub records: Option<&'a [AccessibilityRecord]>,
    /// An earlier crawl of the asset table.
    pub previous_assets: Option<&'a [AssetRecord]>,
    pub escrow: Option<(AccountId, Timestamp)>,
}

/// With an earlier snapshot, assets missing from the current one are
/// marked taken down and kept in the tables so they are still counted.
pub fn audit(stream: &EventStream, inputs: AuditInputs<'_>) -> AuditReport {
    let mut metadata_diff = None;
    let mut taken_down = None;
    let merged;
    let stream = match inputs.previous_assets {
        Some(prev) => {
            metadata_diff = Some(diff_metadata_urls(
                &metadata_url_map(prev),
                &metadata_url_map(stream.assets()),
            ));
            let gone = taken_down_between(prev, stream.assets());
            taken_down = Some(gone.len());
            let mut assets: Vec<AssetRecord> = prev
                .iter()
                .filter(|a| gone.contains(&a.id))
                .cloned()
                .collect();
            mark_taken_down(&mut assets, &gone);
            assets.extend(stream.assets().iter().cloned());
            merged = EventStream::from_parts(stream.events().to_vec(), assets);
            &merged
        }
        None => stream,
    };

    let (liveness, link_matrix) = match inputs.records {
        Some(records) => {
            let classes = classify_all(records);
            let mut counts = LivenessCounts::default();
            for l in classes.values() {
                match l {
                    Liveness::Alive => counts.alive += 1,
                    Liveness::Inaccessible => counts.inaccessible += 1,
                    Liveness::InsufficientData => counts.insufficient_data += 1,
                }
            }
            (Some(counts), Some(build_link_matrix(stream.assets(), &classes)))
        }
        None => (None, None),
    };

    AuditReport {
        tool_version: super::TOOL_VERSION.to_string(),
        liveness,
        link_matrix,
        metadata_diff,
        taken_down,
        verification: verification_aggregates(stream),
        source_availability: source_availability_stats(stream.assets()),
        escrow: inputs.escrow.map(|(account, at_time)| EscrowHolding {
            account,
            at_time,
            count: count_escrowed(stream, &account, at_time),
        }),
    }
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary_text(&self) -> String {
        let mut out = Vec::new();
        if let Some(l) = &self.liveness {
            out.push(format!(
                "urls: {} alive, {} inaccessible, {} insufficient data",
                l.alive, l.inaccessible, l.insufficient_data
            ));
        }
        if let Some(d) = &self.metadata_diff {
            out.push(format!(
                "metadata urls: {} changed, {} unchanged, {} missing",
                d.changed, d.unchanged, d.missing
            ));
        }
        if let Some(n) = self.taken_down {
            out.push(format!("taken down since previous snapshot: {n}"));
        }
        let v = &self.verification;
        out.push(format!(
            "sellers: {} verified, {} non-verified; collections: {} verified, {} non-verified",
            v.sellers.verified.count,
            v.sellers.non_verified.count,
            v.collections.verified.count,
            v.collections.non_verified.count
        ));
        if let Some(e) = &self.escrow {
            out.push(format!("escrow {} holds {} at {}", e.account, e.count, e.at_time));
        }
        out.join("\n") + "\n"
    }
}
