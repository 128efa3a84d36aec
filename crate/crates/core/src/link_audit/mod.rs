//! Persistence audits of off-chain content and marketplace custody.

mod accessibility;
mod escrow;
mod fetch;
mod matrix;
mod metadata;
mod verification;

pub use accessibility::{
    classify_accessibility, classify_all, read_records, write_records, AccessibilityRecord,
    FetchStatus, Liveness, Method, RecordError, ATTEMPTS,
};
pub use escrow::{count_escrowed, escrow_series, write_escrow_csv};
pub use fetch::{parse_allowlist, run_attempt, Fetcher, FixtureFetcher, HttpConfig, HttpFetcher};
pub use matrix::{build_link_matrix, LinkAuditMatrix, ResourceCounts, StateCounts};
pub use metadata::{diff_metadata_urls, metadata_url_map, MetadataDiff};
pub use verification::{
    mark_taken_down, source_availability_stats, taken_down_between, verification_aggregates,
    AggregateRow, SourceAvailability, VerificationSplit, VerificationTable,
};
