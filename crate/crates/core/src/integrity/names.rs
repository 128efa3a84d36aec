//! Look-alike collection names.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::AssetRecord;

/// Edit distance over Unicode scalar values, case-sensitive.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionInfo {
    pub slug: String,
    pub name: String,
    pub verified: bool,
    pub asset_count: usize,
}

/// One entry per slug. A slug is verified if any of its records says so; its
/// name is the lexicographically smallest name seen.
pub fn collections_from_assets(assets: &[AssetRecord]) -> Vec<CollectionInfo> {
    let mut by_slug: BTreeMap<&str, CollectionInfo> = BTreeMap::new();
    for a in assets {
        let c = by_slug
            .entry(a.collection_slug.as_str())
            .or_insert_with(|| CollectionInfo {
                slug: a.collection_slug.clone(),
                name: a.collection_name.clone(),
                verified: false,
                asset_count: 0,
            });
        c.verified |= a.collection_verified;
        c.asset_count += 1;
        if a.collection_name < c.name {
            c.name = a.collection_name.clone();
        }
    }
    by_slug.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMatchConfig {
    pub max_distance: usize,
    pub min_name_len: usize,
    pub min_assets: usize,
}

impl Default for NameMatchConfig {
    fn default() -> Self {
        Self {
            max_distance: 2,
            min_name_len: 8,
            min_assets: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NameMatch {
    pub verified_collection: String,
    pub replica_collection: String,
    pub distance: usize,
}

/// Pairs of one verified and one unverified collection whose names are
/// within `max_distance` edits. Identical names under different slugs are
/// reported with distance 0.
pub fn find_similar_collection_names(
    collections: &[CollectionInfo],
    cfg: &NameMatchConfig,
) -> Vec<NameMatch> {
    let eligible = |c: &&CollectionInfo| {
        c.asset_count >= cfg.min_assets && c.name.chars().count() >= cfg.min_name_len
    };
    let verified: Vec<_> = collections.iter().filter(eligible).filter(|c| c.verified).collect();
    let replicas: Vec<_> = collections.iter().filter(eligible).filter(|c| !c.verified).collect();
    let mut out = Vec::new();
    for v in &verified {
        let vlen = v.name.chars().count();
        for r in &replicas {
            if v.slug == r.slug || vlen.abs_diff(r.name.chars().count()) > cfg.max_distance {
                continue;
            }
            let d = levenshtein(&v.name, &r.name);
            if d <= cfg.max_distance {
                out.push(NameMatch {
                    verified_collection: v.slug.clone(),
                    replica_collection: r.slug.clone(),
                    distance: d,
                });
            }
        }
    }
    out.sort();
    out
}
