//! Differential analysis of metadata URLs between two crawls.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{normalize_url, AssetId, AssetRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataDiff {
    pub changed: usize,
    pub unchanged: usize,
    pub missing: usize,
}

pub fn metadata_url_map(assets: &[AssetRecord]) -> BTreeMap<AssetId, String> {
    assets
        .iter()
        .filter_map(|a| a.metadata_url().map(|u| (a.id.clone(), u.to_string())))
        .collect()
}

/// Compares URLs after gateway normalization. Assets absent, or with an empty
/// URL, in either crawl count as missing.
pub fn diff_metadata_urls(
    crawl_a: &BTreeMap<AssetId, String>,
    crawl_b: &BTreeMap<AssetId, String>,
) -> MetadataDiff {
    let ids: BTreeSet<&AssetId> = crawl_a.keys().chain(crawl_b.keys()).collect();
    let present = |m: &'_ BTreeMap<AssetId, String>, id: &AssetId| {
        m.get(id).map(|u| u.trim().to_string()).filter(|u| !u.is_empty())
    };
    let mut d = MetadataDiff::default();
    for id in ids {
        match (present(crawl_a, id), present(crawl_b, id)) {
            (Some(a), Some(b)) if normalize_url(&a) == normalize_url(&b) => d.unchanged += 1,
            (Some(_), Some(_)) => d.changed += 1,
            _ => d.missing += 1,
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AccountId;

    const CID: &str = "QmYwAPJzv5CZsnA625s3Xf2nemtYgPpHdWEz79ojWnPbdG";
    const CID2: &str = "QmT5NvUtoM5nWFfrQdVrFtvGfKFmG7AHE8P34isapyhCxX";

    fn id(n: u32) -> AssetId {
        AssetId::new(AccountId::from_bytes([4; 20]), n)
    }

    #[test]
    fn diff_cases() {
        let a = BTreeMap::from([
            (id(1), format!("https://ipfs.io/ipfs/{CID}/1.json")),
            (id(2), "https://api.example/2".to_string()),
            (id(3), format!("ipfs://{CID}")),
            (id(4), "https://api.example/4".to_string()),
        ]);
        let b = BTreeMap::from([
            (id(1), format!("ipfs://{CID}/1.json")),
            (id(3), format!("ipfs://{CID2}")),
            (id(4), String::new()),
            (id(5), "https://api.example/5".to_string()),
        ]);
        assert_eq!(
            diff_metadata_urls(&a, &b),
            MetadataDiff { changed: 1, unchanged: 1, missing: 3 }
        );
        assert_eq!(diff_metadata_urls(&a, &a).unchanged, 4);
    }
}
