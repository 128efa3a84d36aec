//! Liveness of image and metadata URLs split by hosting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::accessibility::Liveness;
use crate::model::{extract_ipfs_cid, AssetRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCounts {
    pub alive: usize,
    pub inaccessible: usize,
}

impl StateCounts {
    pub fn total(&self) -> usize {
        self.alive + self.inaccessible
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCounts {
    pub ipfs: StateCounts,
    pub non_ipfs: StateCounts,
    /// Assets without this URL field.
    pub missing_url: usize,
    /// Assets whose URL has no classification or only insufficient data.
    pub unresolved: usize,
}

impl ResourceCounts {
    pub fn audited(&self) -> usize {
        self.ipfs.total() + self.non_ipfs.total()
    }

    fn add(&mut self, url: Option<&str>, liveness: &BTreeMap<String, Liveness>) {
        let Some(url) = url else {
            self.missing_url += 1;
            return;
        };
        let cell = if extract_ipfs_cid(url).is_some() {
            &mut self.ipfs
        } else {
            &mut self.non_ipfs
        };
        match liveness.get(url) {
            Some(Liveness::Alive) => cell.alive += 1,
            Some(Liveness::Inaccessible) => cell.inaccessible += 1,
            Some(Liveness::InsufficientData) | None => self.unresolved += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkAuditMatrix {
    pub image: ResourceCounts,
    pub metadata: ResourceCounts,
}

/// Counts each asset once per resource, keyed by the URL's classification.
pub fn build_link_matrix(
    assets: &[AssetRecord],
    liveness: &BTreeMap<String, Liveness>,
) -> LinkAuditMatrix {
    let mut m = LinkAuditMatrix::default();
    for a in assets {
        m.image.add(a.image_url(), liveness);
        m.metadata.add(a.metadata_url(), liveness);
    }
    m
}
