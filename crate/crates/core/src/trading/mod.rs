//! Trading malpractice detectors: wash trading, shill bidding, bid shielding,
//! and the bid-pollution audit.

mod auction;
mod pollution;
mod shield;
mod shill;
mod wash;

pub use auction::{reconstruct_auctions, Auction};
pub use pollution::{detect_failed_highest_bid, FailedHighestBid};
pub use shield::{detect_bid_shielding, ShieldConfig, ShieldFinding};
pub use shill::{detect_shill_bids, shill_profit, Connectivity, ShillConfig, ShillFinding};
pub use wash::{
    detect_wash_trades, flagged_sale_set, wash_trade_factor, wash_trade_factors, EpsilonRule,
    WashConfig, WashFinding, WashTrigger,
};
