//! Bid pollution audit: settled auctions whose highest bidder did not get
//! the item.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{AccountId, AssetId, EventStream};

use super::auction::reconstruct_auctions;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedHighestBid {
    pub auction_id: String,
    pub asset: AssetId,
    /// Smallest address among the bidders tied at the maximum.
    pub highest_bidder: AccountId,
    pub highest_amount: Decimal,
    pub winner: AccountId,
    pub win_amount: Decimal,
}

/// Bids that were later withdrawn by the same bidder at the same amount do
/// not count toward the maximum. When several bidders tie at the maximum and
/// the winner is one of them, the auction is not reported.
pub fn detect_failed_highest_bid(stream: &EventStream) -> Vec<FailedHighestBid> {
    let mut out = Vec::new();
    for a in reconstruct_auctions(stream).values() {
        let Some((_, win)) = a.win else { continue };
        let live = a.bids.iter().map(|(_, b)| *b).filter(|b| {
            !a.cancels.iter().any(|(_, c)| {
                c.bidder == b.bidder && c.amount_usd == b.amount_usd && c.time >= b.time
            })
        });
        let live: Vec<_> = live.collect();
        let Some(max) = live.iter().map(|b| b.amount_usd).max() else {
            continue;
        };
        let mut top: Vec<AccountId> = live
            .iter()
            .filter(|b| b.amount_usd == max)
            .map(|b| b.bidder)
            .collect();
        top.sort_unstable();
        top.dedup();
        if top.contains(&win.winner) {
            continue;
        }
        out.push(FailedHighestBid {
            auction_id: a.id.to_string(),
            asset: win.asset.clone(),
            highest_bidder: top[0],
            highest_amount: max,
            winner: win.winner,
            win_amount: win.amount_usd,
        });
    }
    out
}
