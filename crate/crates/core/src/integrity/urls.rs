//! Assets that point at the same content.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{extract_ipfs_cid, normalize_url, AssetId, AssetRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UrlKind {
    Ipfs,
    NonIpfs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlDuplicateGroup {
    /// The CID (plus any path inside it) for IPFS content, otherwise the URL
    /// itself.
    pub key: String,
    pub kind: UrlKind,
    pub members: Vec<AssetId>,
    pub collections: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateUrlReport {
    /// Groups spanning at least two collections.
    pub counterfeit: Vec<UrlDuplicateGroup>,
    /// Groups confined to one collection, kept for reference.
    pub same_collection: Vec<UrlDuplicateGroup>,
}

/// Groups assets by image content key: IPFS URLs compare by CID and path
/// regardless of gateway, anything else by exact string.
pub fn find_duplicate_asset_urls(assets: &[AssetRecord]) -> DuplicateUrlReport {
    let mut groups: BTreeMap<(UrlKind, String), Vec<&AssetRecord>> = BTreeMap::new();
    for a in assets {
        let Some(url) = a.image_url() else { continue };
        let key = match extract_ipfs_cid(url) {
            Some(_) => {
                let n = normalize_url(url);
                (UrlKind::Ipfs, n.trim_start_matches("ipfs://").to_string())
            }
            None => (UrlKind::NonIpfs, url.to_string()),
        };
        groups.entry(key).or_default().push(a);
    }
    let mut report = DuplicateUrlReport::default();
    for ((kind, key), mut recs) in groups {
        if recs.len() < 2 {
            continue;
        }
        recs.sort_by(|a, b| a.id.cmp(&b.id));
        recs.dedup_by(|a, b| a.id == b.id);
        if recs.len() < 2 {
            continue;
        }
        let mut collections: Vec<String> = recs.iter().map(|r| r.collection_slug.clone()).collect();
        collections.sort();
        collections.dedup();
        let group = UrlDuplicateGroup {
            key,
            kind,
            members: recs.iter().map(|r| r.id.clone()).collect(),
            collections,
        };
        if group.collections.len() > 1 {
            report.counterfeit.push(group);
        } else {
            report.same_collection.push(group);
        }
    }
    report
}
