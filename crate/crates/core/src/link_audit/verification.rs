//! Verification and take-down aggregates, and source availability.

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{AccountId, AssetId, AssetRecord, EventStream};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub count: usize,
    pub total_sales_usd: Decimal,
    /// Absent when `count` is zero.
    pub average_sales_usd: Option<Decimal>,
    /// Filled in for collections only.
    pub taken_down: Option<usize>,
}

impl AggregateRow {
    fn finish(mut self) -> Self {
        self.average_sales_usd =
            (self.count > 0).then(|| self.total_sales_usd / Decimal::from(self.count as u64));
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationSplit {
    pub verified: AggregateRow,
    pub non_verified: AggregateRow,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationTable {
    pub sellers: VerificationSplit,
    pub collections: VerificationSplit,
    /// Sellers none of whose sold assets carry a seller verification flag.
    pub sellers_unknown: usize,
}

/// Sellers are verified when any asset they sold is flagged seller-verified,
/// non-verified when flags exist and are all false. A collection is verified
/// when any of its records says so, and taken down when all its assets are.
/// Every collection in the asset table is counted, with or without sales.
pub fn verification_aggregates(stream: &EventStream) -> VerificationTable {
    struct SellerAcc {
        flag: Option<bool>,
        total: Decimal,
    }
    let mut sellers: BTreeMap<AccountId, SellerAcc> = BTreeMap::new();
    let mut coll_sales: BTreeMap<&str, Decimal> = BTreeMap::new();
    for s in stream.events().iter().filter_map(|e| e.as_sale()) {
        let rec = stream.asset(&s.asset);
        let acc = sellers.entry(s.seller).or_insert(SellerAcc {
            flag: None,
            total: Decimal::ZERO,
        });
        acc.total += s.price_usd;
        if let Some(f) = rec.and_then(|r| r.seller_verified) {
            acc.flag = Some(acc.flag.unwrap_or(false) || f);
        }
        if let Some(r) = rec {
            *coll_sales.entry(r.collection_slug.as_str()).or_default() += s.price_usd;
        }
    }

    let mut t = VerificationTable::default();
    for acc in sellers.values() {
        let row = match acc.flag {
            Some(true) => &mut t.sellers.verified,
            Some(false) => &mut t.sellers.non_verified,
            None => {
                t.sellers_unknown += 1;
                continue;
            }
        };
        row.count += 1;
        row.total_sales_usd += acc.total;
    }

    let mut colls: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for a in stream.assets() {
        let c = colls.entry(a.collection_slug.as_str()).or_insert((false, true));
        c.0 |= a.collection_verified;
        c.1 &= a.taken_down;
    }
    t.collections.verified.taken_down = Some(0);
    t.collections.non_verified.taken_down = Some(0);
    for (slug, (verified, down)) in colls {
        let row = if verified {
            &mut t.collections.verified
        } else {
            &mut t.collections.non_verified
        };
        row.count += 1;
        row.total_sales_usd += coll_sales.get(slug).copied().unwrap_or_default();
        if down {
            *row.taken_down.as_mut().expect("set above") += 1;
        }
    }
    for split in [&mut t.sellers, &mut t.collections] {
        split.verified = std::mem::take(&mut split.verified).finish();
        split.non_verified = std::mem::take(&mut split.non_verified).finish();
    }
    t
}

/// Assets present in the earlier snapshot and absent from the later one.
pub fn taken_down_between(earlier: &[AssetRecord], later: &[AssetRecord]) -> BTreeSet<AssetId> {
    let still: BTreeSet<&AssetId> = later.iter().map(|a| &a.id).collect();
    earlier
        .iter()
        .filter(|a| !still.contains(&a.id))
        .map(|a| a.id.clone())
        .collect()
}

/// Sets `taken_down` on the records in `gone`.
pub fn mark_taken_down(assets: &mut [AssetRecord], gone: &BTreeSet<AssetId>) {
    for a in assets {
        if gone.contains(&a.id) {
            a.taken_down = true;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceAvailability {
    pub open_alive: usize,
    pub open_taken_down: usize,
    pub closed_alive: usize,
    pub closed_taken_down: usize,
    /// Assets with no source availability flag; not in the cells above.
    pub unknown_source: usize,
    /// Cell shares in percent of the known cells, in the order above.
    pub percentages: Option<[f64; 4]>,
}

pub fn source_availability_stats(assets: &[AssetRecord]) -> SourceAvailability {
    let mut s = SourceAvailability::default();
    for a in assets {
        match (a.source_available, a.taken_down) {
            (None, _) => s.unknown_source += 1,
            (Some(true), false) => s.open_alive += 1,
            (Some(true), true) => s.open_taken_down += 1,
            (Some(false), false) => s.closed_alive += 1,
            (Some(false), true) => s.closed_taken_down += 1,
        }
    }
    let cells = [s.open_alive, s.open_taken_down, s.closed_alive, s.closed_taken_down];
    let known: usize = cells.iter().sum();
    if known > 0 {
        s.percentages = Some(cells.map(|c| 100.0 * c as f64 / known as f64));
    }
    s
}
