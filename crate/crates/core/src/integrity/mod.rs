//! Counterfeit detection and trade-integrity audits.

mod evasion;
mod names;
mod phash;
mod royalty;
mod urls;

pub use evasion::{detect_offplatform_trades, EvasionInstance, DEFAULT_EVASION_WINDOW};
pub use names::{
    collections_from_assets, find_similar_collection_names, levenshtein, CollectionInfo,
    NameMatch, NameMatchConfig,
};
pub use phash::{
    find_similar_images, hash_file, hash_image_dir, perceptual_hash, HashBits, HashCollisionGroup,
    HashError, HashedImages, ImageHash, ImagePair, SimilarImages, SkippedImage,
};
pub use royalty::{count_royalty_increases, RoyaltyIncreases, UNKNOWN_COLLECTION};
pub use urls::{find_duplicate_asset_urls, DuplicateUrlReport, UrlDuplicateGroup, UrlKind};
