//! Canonical asset and event schema, ingestion, and URL normalization.

mod asset;
mod event;
mod ids;
mod ingest;
mod url;

pub use asset::{AssetRecord, Marketplace, MarketplacePolicy};
pub use event::{AuctionEnd, AuctionStart, Bid, Event, EventKind, Mint, Paid, Sale, Timestamp, Transfer, Win};
pub use ids::{AccountId, AssetId, IdError, TokenId, TxHash};
pub use ingest::{
    ingest, Diagnostic, DiagnosticKind, EventStream, IngestError, IngestOptions, Ingestor,
    ASSET_KIND, DEFAULT_DISCRIMINATOR,
};
pub use url::{extract_ipfs_cid, is_cid, is_cid_v0, is_cid_v1_base32, normalize_url};
