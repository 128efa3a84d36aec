use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::ids::{u128_string, AccountId, AssetId, TxHash};

/// Unix seconds.
pub type Timestamp = u64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mint {
    pub creator: AccountId,
    pub asset: AssetId,
    pub time: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sale {
    pub seller: AccountId,
    pub buyer: AccountId,
    pub asset: AssetId,
    pub price_usd: Decimal,
    pub price_eth: Decimal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub royalty_fraction: Option<Decimal>,
    pub time: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx: Option<TxHash>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuctionStart {
    pub seller: AccountId,
    pub reserve_usd: Decimal,
    pub time: Timestamp,
    pub auction_id: String,
    pub asset: AssetId,
}

/// A placed bid; the same shape records a bid cancellation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bid {
    pub bidder: AccountId,
    pub amount_usd: Decimal,
    pub time: Timestamp,
    pub auction_id: String,
    pub asset: AssetId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Win {
    pub winner: AccountId,
    pub amount_usd: Decimal,
    pub time: Timestamp,
    pub auction_id: String,
    pub asset: AssetId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuctionEnd {
    pub auction_id: String,
    pub asset: AssetId,
    pub time: Timestamp,
}

/// Plain Ether flow between two accounts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Paid {
    pub from: AccountId,
    pub to: AccountId,
    #[serde(with = "u128_string")]
    pub amount_wei: u128,
    pub time: Timestamp,
    pub tx: TxHash,
}

/// Unconditional ERC-721 transfer, i.e. one not part of a sale.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transfer {
    pub from: AccountId,
    pub to: AccountId,
    pub asset: AssetId,
    pub time: Timestamp,
    pub tx: TxHash,
}

/// The universal input record. Variant order is the tie-break order for
/// events sharing a timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Mint(Mint),
    Paid(Paid),
    Transfer(Transfer),
    AuctionStart(AuctionStart),
    Bid(Bid),
    CancelBid(Bid),
    Win(Win),
    Sale(Sale),
    AuctionEnd(AuctionEnd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Mint,
    Paid,
    Transfer,
    AuctionStart,
    Bid,
    CancelBid,
    Win,
    Sale,
    AuctionEnd,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::Mint,
        EventKind::Paid,
        EventKind::Transfer,
        EventKind::AuctionStart,
        EventKind::Bid,
        EventKind::CancelBid,
        EventKind::Win,
        EventKind::Sale,
        EventKind::AuctionEnd,
    ];

    pub fn wire_name(self) -> &'static str {
        match self {
            EventKind::Mint => "mint",
            EventKind::Paid => "paid",
            EventKind::Transfer => "transfer",
            EventKind::AuctionStart => "auction_start",
            EventKind::Bid => "bid",
            EventKind::CancelBid => "cancel_bid",
            EventKind::Win => "win",
            EventKind::Sale => "sale",
            EventKind::AuctionEnd => "auction_end",
        }
    }

    pub fn from_wire(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.wire_name() == name)
    }
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::Mint(_) => EventKind::Mint,
            Event::Paid(_) => EventKind::Paid,
            Event::Transfer(_) => EventKind::Transfer,
            Event::AuctionStart(_) => EventKind::AuctionStart,
            Event::Bid(_) => EventKind::Bid,
            Event::CancelBid(_) => EventKind::CancelBid,
            Event::Win(_) => EventKind::Win,
            Event::Sale(_) => EventKind::Sale,
            Event::AuctionEnd(_) => EventKind::AuctionEnd,
        }
    }

    pub fn time(&self) -> Timestamp {
        match self {
            Event::Mint(e) => e.time,
            Event::Paid(e) => e.time,
            Event::Transfer(e) => e.time,
            Event::AuctionStart(e) => e.time,
            Event::Bid(e) | Event::CancelBid(e) => e.time,
            Event::Win(e) => e.time,
            Event::Sale(e) => e.time,
            Event::AuctionEnd(e) => e.time,
        }
    }

    pub fn asset(&self) -> Option<&AssetId> {
        match self {
            Event::Mint(e) => Some(&e.asset),
            Event::Paid(_) => None,
            Event::Transfer(e) => Some(&e.asset),
            Event::AuctionStart(e) => Some(&e.asset),
            Event::Bid(e) | Event::CancelBid(e) => Some(&e.asset),
            Event::Win(e) => Some(&e.asset),
            Event::Sale(e) => Some(&e.asset),
            Event::AuctionEnd(e) => Some(&e.asset),
        }
    }

    pub fn auction_id(&self) -> Option<&str> {
        match self {
            Event::AuctionStart(e) => Some(&e.auction_id),
            Event::Bid(e) | Event::CancelBid(e) => Some(&e.auction_id),
            Event::Win(e) => Some(&e.auction_id),
            Event::AuctionEnd(e) => Some(&e.auction_id),
            _ => None,
        }
    }

    /// Accounts mentioned by the event, in field order.
    pub fn accounts(&self) -> Vec<AccountId> {
        match self {
            Event::Mint(e) => vec![e.creator],
            Event::Paid(e) => vec![e.from, e.to],
            Event::Transfer(e) => vec![e.from, e.to],
            Event::AuctionStart(e) => vec![e.seller],
            Event::Bid(e) | Event::CancelBid(e) => vec![e.bidder],
            Event::Win(e) => vec![e.winner],
            Event::Sale(e) => vec![e.seller, e.buyer],
            Event::AuctionEnd(_) => vec![],
        }
    }

    pub fn as_sale(&self) -> Option<&Sale> {
        match self {
            Event::Sale(s) => Some(s),
            _ => None,
        }
    }

    /// Field-level checks beyond what the type system enforces. Decimal
    /// amounts are normalized in place so that equal values compare and
    /// serialize identically.
    pub fn validate_and_normalize(&mut self) -> Result<(), String> {
        fn amount(name: &str, v: &mut Decimal) -> Result<(), String> {
            if v.is_sign_negative() && !v.is_zero() {
                return Err(format!("{name} is negative ({v})"));
            }
            *v = v.normalize();
            Ok(())
        }
        fn auction(id: &str) -> Result<(), String> {
            if id.trim().is_empty() {
                return Err("auction_id is empty".into());
            }
            Ok(())
        }
        match self {
            Event::Sale(s) => {
                amount("price_usd", &mut s.price_usd)?;
                amount("price_eth", &mut s.price_eth)?;
                if let Some(r) = s.royalty_fraction.as_mut() {
                    amount("royalty_fraction", r)?;
                    if *r > Decimal::ONE {
                        return Err(format!("royalty_fraction {r} exceeds 1"));
                    }
                }
            }
            Event::AuctionStart(a) => {
                amount("reserve_usd", &mut a.reserve_usd)?;
                auction(&a.auction_id)?;
            }
            Event::Bid(b) | Event::CancelBid(b) => {
                amount("amount_usd", &mut b.amount_usd)?;
                auction(&b.auction_id)?;
            }
            Event::Win(w) => {
                amount("amount_usd", &mut w.amount_usd)?;
                auction(&w.auction_id)?;
            }
            Event::AuctionEnd(e) => auction(&e.auction_id)?,
            Event::Mint(_) | Event::Paid(_) | Event::Transfer(_) => {}
        }
        Ok(())
    }
}
