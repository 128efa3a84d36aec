use std::collections::BTreeMap;

use rust_decimal::Decimal;

use crate::model::{AccountId, AssetId, AuctionEnd, AuctionStart, Bid, Event, EventStream, Win};

/// Auction activity gathered by auction id, in stream (time) order. Each
/// entry carries the event's index in the stream.
#[derive(Debug, Clone)]
pub struct Auction<'a> {
    pub id: &'a str,
    pub start: Option<(usize, &'a AuctionStart)>,
    pub bids: Vec<(usize, &'a Bid)>,
    pub cancels: Vec<(usize, &'a Bid)>,
    pub win: Option<(usize, &'a Win)>,
    pub end: Option<(usize, &'a AuctionEnd)>,
}

impl<'a> Auction<'a> {
    fn new(id: &'a str) -> Self {
        Self {
            id,
            start: None,
            bids: Vec::new(),
            cancels: Vec::new(),
            win: None,
            end: None,
        }
    }

    pub fn seller(&self) -> Option<AccountId> {
        self.start.map(|(_, s)| s.seller)
    }

    pub fn reserve_usd(&self) -> Option<Decimal> {
        self.start.map(|(_, s)| s.reserve_usd)
    }

    pub fn winner(&self) -> Option<AccountId> {
        self.win.map(|(_, w)| w.winner)
    }

    pub fn asset(&self) -> Option<&'a AssetId> {
        self.start
            .map(|(_, s)| &s.asset)
            .or_else(|| self.bids.first().map(|(_, b)| &b.asset))
            .or_else(|| self.win.map(|(_, w)| &w.asset))
    }

    /// Bids of one bidder, in time order.
    pub fn bids_by(&self, bidder: &AccountId) -> impl Iterator<Item = &'a Bid> + '_ {
        let bidder = *bidder;
        self.bids.iter().map(|(_, b)| *b).filter(move |b| b.bidder == bidder)
    }

    /// Distinct bidders in order of first bid.
    pub fn bidders(&self) -> Vec<AccountId> {
        let mut seen = Vec::new();
        for (_, b) in &self.bids {
            if !seen.contains(&b.bidder) {
                seen.push(b.bidder);
            }
        }
        seen
    }

    /// Time the auction closed: the explicit end, else the win.
    pub fn close_time(&self) -> Option<u64> {
        self.end
            .map(|(_, e)| e.time)
            .or_else(|| self.win.map(|(_, w)| w.time))
    }
}

/// Groups auction events by auction id. The first start, win and end seen
/// for an id are kept.
pub fn reconstruct_auctions(stream: &EventStream) -> BTreeMap<&str, Auction<'_>> {
    let mut out: BTreeMap<&str, Auction<'_>> = BTreeMap::new();
    for (i, e) in stream.events().iter().enumerate() {
        let Some(id) = e.auction_id() else { continue };
        let a = out.entry(id).or_insert_with(|| Auction::new(id));
        match e {
            Event::AuctionStart(s) => {
                a.start.get_or_insert((i, s));
            }
            Event::Bid(b) => a.bids.push((i, b)),
            Event::CancelBid(b) => a.cancels.push((i, b)),
            Event::Win(w) => {
                a.win.get_or_insert((i, w));
            }
            Event::AuctionEnd(x) => {
                a.end.get_or_insert((i, x));
            }
            _ => {}
        }
    }
    out
}
