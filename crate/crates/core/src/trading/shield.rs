//! Bid shielding: a high bid that scares off competition and is retracted
//! after bidding stops, letting a lower bid win.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{AccountId, AssetId, Bid, EventStream, Timestamp};

use super::auction::{reconstruct_auctions, Auction};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShieldConfig {
    /// Also require the cancel to fall within `cancel_window_seconds` of the
    /// auction's close.
    pub require_cancel_near_end: bool,
    pub cancel_window_seconds: u64,
    /// Also require that the winner never outbid the shielder.
    pub require_no_outbidding: bool,
}

impl Default for ShieldConfig {
    fn default() -> Self {
        Self {
            require_cancel_near_end: false,
            cancel_window_seconds: 2 * 3600,
            require_no_outbidding: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShieldFinding {
    pub shielder: AccountId,
    pub winner: AccountId,
    pub auction_id: String,
    pub asset: AssetId,
    pub shield_amount: Decimal,
    pub win_amount: Decimal,
    pub shielded_bid_difference: Decimal,
    pub cancel_time: Timestamp,
}

/// Did `winner` ever bid above an earlier bid of `shielder`?
fn winner_outbid_shielder(a: &Auction<'_>, shielder: &AccountId, winner: &AccountId) -> bool {
    let shielder_bids: Vec<&Bid> = a.bids_by(shielder).collect();
    a.bids_by(winner).any(|w| {
        shielder_bids
            .iter()
            .any(|s| s.time < w.time && w.amount_usd > s.amount_usd)
    })
}

/// One finding per (auction, shielder): the largest qualifying cancel.
pub fn detect_bid_shielding(stream: &EventStream, cfg: &ShieldConfig) -> Vec<ShieldFinding> {
    let mut out = Vec::new();
    for a in reconstruct_auctions(stream).values() {
        let Some((_, win)) = a.win else { continue };
        if a.cancels.is_empty() {
            continue;
        }
        let last_bid = a.bids.iter().map(|(_, b)| b.time).max();
        let mut best: BTreeMap<AccountId, &Bid> = BTreeMap::new();
        for (_, c) in &a.cancels {
            if c.bidder == win.winner || c.amount_usd <= win.amount_usd {
                continue;
            }
            if last_bid.is_some_and(|t| c.time <= t) {
                continue;
            }
            if cfg.require_cancel_near_end {
                match a.close_time() {
                    Some(close) if c.time <= close && close - c.time <= cfg.cancel_window_seconds => {}
                    _ => continue,
                }
            }
            if cfg.require_no_outbidding && winner_outbid_shielder(a, &c.bidder, &win.winner) {
                continue;
            }
            best.entry(c.bidder)
                .and_modify(|b| {
                    if c.amount_usd > b.amount_usd {
                        *b = c;
                    }
                })
                .or_insert(c);
        }
        for (shielder, c) in best {
            out.push(ShieldFinding {
                shielder,
                winner: win.winner,
                auction_id: a.id.to_string(),
                asset: win.asset.clone(),
                shield_amount: c.amount_usd,
                win_amount: win.amount_usd,
                shielded_bid_difference: c.amount_usd - win.amount_usd,
                cancel_time: c.time,
            });
        }
    }
    out.sort_by(|a, b| {
        a.cancel_time
            .cmp(&b.cancel_time)
            .then_with(|| a.shielder.cmp(&b.shielder))
            .then_with(|| a.auction_id.cmp(&b.auction_id))
    });
    out
}
