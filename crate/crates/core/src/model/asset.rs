use serde::{Deserialize, Serialize};

use super::ids::AssetId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Marketplace {
    #[serde(alias = "opensea")]
    OpenSea,
    #[serde(alias = "axie")]
    Axie,
    #[serde(alias = "cryptopunks")]
    CryptoPunks,
    #[serde(alias = "rarible")]
    Rarible,
    #[serde(alias = "superrare")]
    SuperRare,
    #[serde(alias = "sorare")]
    Sorare,
    #[serde(alias = "foundation")]
    Foundation,
}

/// Bidding and custody characteristics of a marketplace. `None` means the
/// behaviour is not documented for that venue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarketplacePolicy {
    /// Bids are held in a contract (amount locked up front) rather than an
    /// off-chain order book.
    pub onchain_bids: Option<bool>,
    /// Outbidding refunds the previous top bid, so only one bid is active.
    pub single_active_bid: Option<bool>,
    /// Bidders may retract a placed bid.
    pub bid_withdrawal: Option<bool>,
    /// Listed assets are moved into a marketplace-controlled escrow account.
    pub escrow: Option<bool>,
}

impl Marketplace {
    pub const ALL: [Marketplace; 7] = [
        Marketplace::OpenSea,
        Marketplace::Axie,
        Marketplace::CryptoPunks,
        Marketplace::Rarible,
        Marketplace::SuperRare,
        Marketplace::Sorare,
        Marketplace::Foundation,
    ];

    pub fn policy(self) -> MarketplacePolicy {
        use Marketplace::*;
        match self {
            OpenSea | Rarible => MarketplacePolicy {
                onchain_bids: Some(false),
                single_active_bid: Some(false),
                bid_withdrawal: Some(true),
                escrow: Some(false),
            },
            CryptoPunks => MarketplacePolicy {
                onchain_bids: Some(true),
                single_active_bid: Some(true),
                bid_withdrawal: Some(true),
                escrow: Some(false),
            },
            Foundation => MarketplacePolicy {
                onchain_bids: Some(true),
                single_active_bid: Some(true),
                bid_withdrawal: Some(false),
                escrow: Some(true),
            },
            // escrows only while an auction is running
            SuperRare => MarketplacePolicy {
                onchain_bids: Some(true),
                single_active_bid: Some(true),
                bid_withdrawal: None,
                escrow: Some(true),
            },
            Axie | Sorare => MarketplacePolicy {
                onchain_bids: None,
                single_active_bid: None,
                bid_withdrawal: None,
                escrow: None,
            },
        }
    }

    /// True when a bid can be retracted before settlement, which is the
    /// precondition for bid shielding.
    pub fn allows_bid_withdrawal(self) -> bool {
        self.policy().bid_withdrawal.unwrap_or(false)
    }
}

/// One NFT as listed by a marketplace, with the audit flags collected for it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AssetRecord {
    pub id: AssetId,
    pub collection_slug: String,
    pub collection_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata_url: Option<String>,
    pub marketplace: Marketplace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_available: Option<bool>,
    #[serde(default)]
    pub collection_verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seller_verified: Option<bool>,
    #[serde(default)]
    pub taken_down: bool,
}

impl AssetRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.collection_slug.trim().is_empty() {
            return Err("collection_slug is empty".into());
        }
        Ok(())
    }

    /// Image URL, treating the empty string as missing.
    pub fn image_url(&self) -> Option<&str> {
        self.image_url.as_deref().filter(|u| !u.trim().is_empty())
    }

    pub fn metadata_url(&self) -> Option<&str> {
        self.metadata_url.as_deref().filter(|u| !u.trim().is_empty())
    }
}
