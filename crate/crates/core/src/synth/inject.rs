//! Labeled malpractice patterns appended to a scenario.

use std::collections::HashSet;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{
    eth_for, random_account, random_cid, random_tx, step, Label, MalpracticeKind, Scenario,
    SynthError,
};
use crate::model::{
    AccountId, AssetId, AssetRecord, AuctionEnd, AuctionStart, Bid, Event, EventStream,
    Marketplace, Mint, Paid, Sale, Timestamp, Win,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Injection {
    /// `ring_size` fresh accounts pass one fresh asset around a cycle
    /// `trades_per_pair` times.
    WashRing {
        ring_size: usize,
        trades_per_pair: u32,
    },
    /// A seller-funded bidder raises the price with strictly increasing bids
    /// and is outbid by an independent winner.
    ShillAuction {
        reserve_usd: Decimal,
        shill_bids: Vec<Decimal>,
        win_usd: Decimal,
    },
    /// A low bid, a high bid, withdrawal of the high bid, and the low bid
    /// winning.
    ShieldAuction { low_usd: Decimal, high_usd: Decimal },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub injection: Injection,
    pub seed: u64,
}

fn dec(s: &str) -> Decimal {
    Decimal::from_str(s).expect("literal decimal")
}

impl InjectionSpec {
    pub fn wash_ring(ring_size: usize, trades_per_pair: u32, seed: u64) -> Self {
        Self {
            injection: Injection::WashRing {
                ring_size,
                trades_per_pair,
            },
            seed,
        }
    }

    /// The manually analysed case: reserve 2, five rising bids, sale at 9.
    pub fn shill_auction(seed: u64) -> Self {
        Self {
            injection: Injection::ShillAuction {
                reserve_usd: dec("2"),
                shill_bids: ["3.3", "4.4", "5.5", "6.71", "8.14"].map(dec).to_vec(),
                win_usd: dec("9"),
            },
            seed,
        }
    }

    pub fn shield_auction(low_usd: Decimal, high_usd: Decimal, seed: u64) -> Self {
        Self {
            injection: Injection::ShieldAuction { low_usd, high_usd },
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        match &self.injection {
            Injection::WashRing {
                ring_size,
                trades_per_pair,
            } => {
                if !(2..=50).contains(ring_size) {
                    return bad("ring size must be between 2 and 50");
                }
                if *trades_per_pair < 1 {
                    return bad("trades per pair must be at least 1");
                }
            }
            Injection::ShillAuction {
                reserve_usd,
                shill_bids,
                win_usd,
            } => {
                if shill_bids.len() < 2 {
                    return bad("a shill needs at least 2 bids");
                }
                if reserve_usd.is_sign_negative() || shill_bids[0] < *reserve_usd {
                    return bad("shill bids must start at or above a non-negative reserve");
                }
                if shill_bids.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("shill bids must be strictly increasing");
                }
                if *win_usd <= *shill_bids.last().expect("checked length") {
                    return bad("the winning bid must exceed the last shill bid");
                }
            }
            Injection::ShieldAuction { low_usd, high_usd } => {
                if low_usd.is_sign_negative() || low_usd.is_zero() || high_usd <= low_usd {
                    return bad("shield needs 0 < low < high");
                }
            }
        }
        Ok(())
    }
}

struct Builder<'a> {
    rng: ChaCha8Rng,
    t: Timestamp,
    taken: HashSet<AccountId>,
    events: Vec<Event>,
    template: Option<&'a AssetRecord>,
}

impl Builder<'_> {
    fn account(&mut self) -> AccountId {
        loop {
            let a = random_account(&mut self.rng);
            if self.taken.insert(a) {
                return a;
            }
        }
    }

    fn tick(&mut self) -> Timestamp {
        self.t = step(&mut self.rng, self.t);
        self.t
    }

    /// A fresh asset in an existing collection (or a new one if there is
    /// none), minted to `owner`.
    fn asset(&mut self, owner: AccountId) -> AssetRecord {
        let contract = self.account();
        let cid = random_cid(&mut self.rng);
        let (slug, name, verified, marketplace) = match self.template {
            Some(t) => (
                t.collection_slug.clone(),
                t.collection_name.clone(),
                t.collection_verified,
                t.marketplace,
            ),
            None => ("injected".into(), "Injected".into(), false, Marketplace::OpenSea),
        };
        let rec = AssetRecord {
            id: AssetId::new(contract, 1u32),
            collection_slug: slug,
            collection_name: name,
            image_url: Some(format!("ipfs://{cid}")),
            metadata_url: None,
            marketplace,
            source_available: None,
            collection_verified: verified,
            seller_verified: None,
            taken_down: false,
        };
        let time = self.tick();
        self.events.push(Event::Mint(Mint {
            creator: owner,
            asset: rec.id.clone(),
            time,
        }));
        rec
    }

    fn fund(&mut self, from: AccountId, to: AccountId) {
        let time = self.tick();
        let tx = random_tx(&mut self.rng);
        self.events.push(Event::Paid(Paid {
            from,
            to,
            amount_wei: 10u128.pow(18),
            time,
            tx,
        }));
    }

    fn sale(&mut self, seller: AccountId, buyer: AccountId, asset: &AssetId, price: Decimal) {
        let time = self.tick();
        let tx = random_tx(&mut self.rng);
        self.events.push(Event::Sale(Sale {
            seller,
            buyer,
            asset: asset.clone(),
            price_usd: price,
            price_eth: eth_for(price),
            royalty_fraction: None,
            time,
            tx: Some(tx),
        }));
    }

    fn bid(&mut self, bidder: AccountId, amount: Decimal, id: &str, asset: &AssetId, cancel: bool) {
        let b = Bid {
            bidder,
            amount_usd: amount,
            time: self.tick(),
            auction_id: id.to_string(),
            asset: asset.clone(),
        };
        self.events.push(if cancel { Event::CancelBid(b) } else { Event::Bid(b) });
    }

    fn auction(
        &mut self,
        seller: AccountId,
        reserve: Decimal,
        asset: &AssetId,
        id: &str,
    ) {
        let time = self.tick();
        self.events.push(Event::AuctionStart(AuctionStart {
            seller,
            reserve_usd: reserve,
            time,
            auction_id: id.to_string(),
            asset: asset.clone(),
        }));
    }

    fn settle(&mut self, seller: AccountId, winner: AccountId, amount: Decimal, asset: &AssetId, id: &str) {
        let time = self.tick();
        self.events.push(Event::Win(Win {
            winner,
            amount_usd: amount,
            time,
            auction_id: id.to_string(),
            asset: asset.clone(),
        }));
        self.events.push(Event::AuctionEnd(AuctionEnd {
            auction_id: id.to_string(),
            asset: asset.clone(),
            time,
        }));
        self.sale(seller, winner, asset, amount);
    }
}

/// Appends one labeled pattern after the last event of `scenario`. Existing
/// event indices are unchanged; the label lists the new events' indices.
pub fn inject(scenario: Scenario, spec: &InjectionSpec) -> Result<Scenario, SynthError> {
    spec.validate()?;
    let Scenario { stream, mut labels } = scenario;
    let end = stream.events().last().map_or(super::BASELINE_START, |e| e.time());
    let taken: HashSet<AccountId> = stream
        .events()
        .iter()
        .flat_map(|e| e.accounts())
        .chain(stream.assets().iter().map(|a| a.id.contract))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let template = (!stream.assets().is_empty())
        .then(|| &stream.assets()[rng.random_range(0..stream.assets().len())]);
    let mut b = Builder {
        rng,
        t: end + 3600,
        taken,
        events: Vec::new(),
        template,
    };
    let auction_id = format!("injected-{}-{}", spec.seed, end);

    let (kind, accounts, record) = match &spec.injection {
        Injection::WashRing {
            ring_size,
            trades_per_pair,
        } => {
            let ring: Vec<AccountId> = (0..*ring_size).map(|_| b.account()).collect();
            let rec = b.asset(ring[0]);
            for _ in 0..*trades_per_pair {
                for i in 0..ring.len() {
                    let price = super::usd(&mut b.rng, 10_000, 1_000_000);
                    b.sale(ring[i], ring[(i + 1) % ring.len()], &rec.id, price);
                }
            }
            (MalpracticeKind::WashTrading, ring, rec)
        }
        Injection::ShillAuction {
            reserve_usd,
            shill_bids,
            win_usd,
        } => {
            let seller = b.account();
            let shill = b.account();
            let winner = b.account();
            let faucet = b.account();
            let rec = b.asset(seller);
            b.fund(seller, shill);
            b.fund(faucet, winner);
            b.auction(seller, *reserve_usd, &rec.id, &auction_id);
            for &amount in shill_bids {
                b.bid(shill, amount, &auction_id, &rec.id, false);
            }
            b.bid(winner, *win_usd, &auction_id, &rec.id, false);
            b.settle(seller, winner, *win_usd, &rec.id, &auction_id);
            (MalpracticeKind::ShillBidding, vec![shill, seller], rec)
        }
        Injection::ShieldAuction { low_usd, high_usd } => {
            let seller = b.account();
            let low = b.account();
            let high = b.account();
            let faucet = b.account();
            let rec = b.asset(seller);
            b.fund(faucet, low);
            b.auction(seller, Decimal::ZERO, &rec.id, &auction_id);
            b.bid(low, *low_usd, &auction_id, &rec.id, false);
            b.bid(high, *high_usd, &auction_id, &rec.id, false);
            b.bid(high, *high_usd, &auction_id, &rec.id, true);
            b.settle(seller, low, *low_usd, &rec.id, &auction_id);
            (MalpracticeKind::BidShielding, vec![high, low], rec)
        }
    };

    let new_events = b.events;
    let mut events = stream.events().to_vec();
    events.extend(new_events.iter().cloned());
    let mut assets = stream.assets().to_vec();
    assets.push(record);
    let merged = EventStream::from_parts(events, assets);
    let mut idx: Vec<usize> = new_events
        .iter()
        .map(|e| {
            merged
                .events()
                .binary_search_by(|x| x.time().cmp(&e.time()).then_with(|| x.cmp(e)))
                .expect("injected event present in merged stream")
        })
        .collect();
    idx.sort_unstable();
    labels.push(Label {
        kind,
        accounts,
        events: idx,
    });
    Ok(Scenario {
        stream: merged,
        labels,
    })
}
