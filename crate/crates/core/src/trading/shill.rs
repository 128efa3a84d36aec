//! Shill bidding: a low-activity bidder tied to the seller who raises the
//! price of the seller's auction without ever winning it.

use std::collections::{BTreeSet, HashMap, HashSet};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::graphs::GraphContext;
use crate::model::{AccountId, AssetId, Event, EventStream, Timestamp};

use super::auction::{reconstruct_auctions, Auction};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShillConfig {
    /// Minimum number of strictly increasing bids on one auction.
    pub min_bids: usize,
    /// Bidders with this many sale participations or more are not suspects.
    pub sigma: usize,
    /// Shill score must exceed this.
    pub mu: Decimal,
}

impl Default for ShillConfig {
    fn default() -> Self {
        Self {
            min_bids: 3,
            sigma: 10,
            mu: Decimal::new(8, 1),
        }
    }
}

impl ShillConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_bids < 2 {
            return Err("min_bids must be at least 2".into());
        }
        if self.sigma < 1 {
            return Err("sigma must be positive".into());
        }
        if self.mu <= Decimal::ZERO || self.mu > Decimal::ONE {
            return Err(format!("mu must lie in (0, 1], got {}", self.mu));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "WCC_transfer")]
    WccTransfer,
    #[serde(rename = "WCC_payment")]
    WccPayment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShillFinding {
    pub bidder: AccountId,
    pub seller: AccountId,
    pub auction_id: String,
    pub asset: AssetId,
    /// Auctions by this seller the bidder bid in, over all auctions the
    /// bidder bid in.
    pub shill_score: Decimal,
    pub seller_auctions: usize,
    pub total_auctions: usize,
    pub bid_count: usize,
    pub connectivity: BTreeSet<Connectivity>,
    /// Absent when the auction never settled.
    pub shill_profit_usd: Option<Decimal>,
    pub first_bid_time: Timestamp,
}

/// Bids strictly increasing in both time and amount, and at least `n` of them.
fn monotone_run(bids: &[(Timestamp, Decimal)], n: usize) -> bool {
    bids.len() >= n && bids.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
}

/// Seller gain attributed to shilling: winning price minus the last
/// legitimate bid before the shill's first bid (the reserve when there is
/// none), floored at zero. `None` without a win.
pub fn shill_profit(
    auction: &Auction<'_>,
    shill: &AccountId,
    flagged: &HashSet<AccountId>,
) -> Option<Decimal> {
    let (_, win) = auction.win?;
    let first = auction.bids_by(shill).map(|b| b.time).min()?;
    let legit = auction
        .bids
        .iter()
        .map(|(_, b)| *b)
        .filter(|b| b.time < first && !flagged.contains(&b.bidder))
        .map(|b| b.amount_usd)
        .max();
    let base = legit.or(auction.reserve_usd()).unwrap_or(Decimal::ZERO);
    Some((win.amount_usd - base).max(Decimal::ZERO))
}

pub fn detect_shill_bids(
    stream: &EventStream,
    ctx: &GraphContext,
    cfg: &ShillConfig,
) -> Vec<ShillFinding> {
    let auctions = reconstruct_auctions(stream);

    let mut sale_participation: HashMap<AccountId, usize> = HashMap::new();
    for e in stream.events() {
        if let Event::Sale(s) = e {
            *sale_participation.entry(s.seller).or_default() += 1;
            if s.buyer != s.seller {
                *sale_participation.entry(s.buyer).or_default() += 1;
            }
        }
    }

    // distinct auctions per bidder, and per (bidder, seller)
    let mut bidder_auctions: HashMap<AccountId, usize> = HashMap::new();
    let mut bidder_seller_auctions: HashMap<(AccountId, AccountId), usize> = HashMap::new();
    for a in auctions.values() {
        for b in a.bidders() {
            *bidder_auctions.entry(b).or_default() += 1;
            if let Some(s) = a.seller() {
                *bidder_seller_auctions.entry((b, s)).or_default() += 1;
            }
        }
    }

    let mut out = Vec::new();
    for a in auctions.values() {
        let (Some(seller), Some(asset)) = (a.seller(), a.asset()) else {
            continue;
        };
        let mut hits: Vec<ShillFinding> = Vec::new();
        for bidder in a.bidders() {
            let bids: Vec<(Timestamp, Decimal)> =
                a.bids_by(&bidder).map(|b| (b.time, b.amount_usd)).collect();
            if !monotone_run(&bids, cfg.min_bids) {
                continue;
            }
            if a.winner() == Some(bidder) {
                continue;
            }
            if sale_participation.get(&bidder).copied().unwrap_or(0) >= cfg.sigma {
                continue;
            }
            let mut connectivity = BTreeSet::new();
            if ctx.transfer_wcc.same_component(&bidder, &seller) {
                connectivity.insert(Connectivity::WccTransfer);
            }
            if ctx.payment_wcc.same_component(&bidder, &seller) {
                connectivity.insert(Connectivity::WccPayment);
            }
            if connectivity.is_empty() {
                continue;
            }
            let total = bidder_auctions[&bidder];
            let with_seller = bidder_seller_auctions
                .get(&(bidder, seller))
                .copied()
                .unwrap_or(0);
            // score > mu  <=>  with_seller > mu * total, kept exact
            if Decimal::from(with_seller) <= cfg.mu * Decimal::from(total) {
                continue;
            }
            hits.push(ShillFinding {
                bidder,
                seller,
                auction_id: a.id.to_string(),
                asset: asset.clone(),
                shill_score: Decimal::from(with_seller) / Decimal::from(total),
                seller_auctions: with_seller,
                total_auctions: total,
                bid_count: bids.len(),
                connectivity,
                shill_profit_usd: None,
                first_bid_time: bids[0].0,
            });
        }
        let flagged: HashSet<AccountId> = hits.iter().map(|h| h.bidder).collect();
        for h in &mut hits {
            h.shill_profit_usd = shill_profit(a, &h.bidder, &flagged);
        }
        out.extend(hits);
    }
    out.sort_by(|a, b| {
        a.first_bid_time
            .cmp(&b.first_bid_time)
            .then_with(|| a.bidder.cmp(&b.bidder))
            .then_with(|| a.auction_id.cmp(&b.auction_id))
    });
    out
}
