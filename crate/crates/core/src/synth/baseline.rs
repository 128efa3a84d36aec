//! A clean synthetic market.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use super::{eth_for, random_account, random_cid, random_tx, step, usd, Scenario, SynthError};
use crate::integrity::levenshtein;
use crate::model::{
    AccountId, AssetId, AssetRecord, AuctionEnd, AuctionStart, Bid, Event, EventStream,
    Marketplace, Mint, Paid, Sale, Timestamp, Win,
};

pub const BASELINE_START: Timestamp = 1_600_000_000;

const ASSETS_PER_COLLECTION: usize = 25;
const AUCTION_SHARE: f64 = 0.2;

/// Most sales a baseline can hold: every asset passed up the whole user order.
pub fn baseline_capacity(n_users: usize, n_assets: usize) -> usize {
    n_assets.saturating_mul(n_users.saturating_sub(1))
}

fn collection_names(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(n);
    while names.len() < n {
        let len = rng.random_range(10..15);
        let mut name: String = (0..len)
            .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
            .collect();
        name[..1].make_ascii_uppercase();
        if names.iter().all(|o| levenshtein(o, &name) > 2) {
            names.push(name);
        }
    }
    names
}

/// Generates a market with no malpractice by construction:
///
/// * assets only move from lower to higher positions in a random user order,
///   so the sales graph is acyclic;
/// * each buyer is funded once by its own faucet account, so no two traders
///   share a funding component;
/// * there are no plain transfers;
/// * auctions have at most one bid per bidder, no withdrawals, and are won
///   by the highest bidder.
pub fn gen_baseline(
    seed: u64,
    n_users: usize,
    n_assets: usize,
    n_sales: usize,
) -> Result<Scenario, SynthError> {
    if n_users < 2 {
        return Err(SynthError::TooFewUsers(n_users));
    }
    let capacity = baseline_capacity(n_users, n_assets);
    if n_sales > capacity {
        return Err(SynthError::Infeasible {
            sales: n_sales,
            capacity,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users: Vec<AccountId> = (0..n_users).map(|_| random_account(&mut rng)).collect();

    let n_coll = n_assets.div_ceil(ASSETS_PER_COLLECTION).max(1);
    let names = collection_names(&mut rng, n_coll);
    let contracts: Vec<AccountId> = (0..n_coll).map(|_| random_account(&mut rng)).collect();
    let verified: Vec<bool> = (0..n_coll).map(|_| rng.random_bool(0.3)).collect();
    let markets = Marketplace::ALL;

    let mut records = Vec::with_capacity(n_assets);
    let mut royalty = Vec::with_capacity(n_assets);
    for i in 0..n_assets {
        let c = i % n_coll;
        let cid = random_cid(&mut rng);
        records.push(AssetRecord {
            id: AssetId::new(contracts[c], (i / n_coll + 1) as u64),
            collection_slug: names[c].to_ascii_lowercase(),
            collection_name: names[c].clone(),
            image_url: Some(format!("ipfs://{cid}/image.png")),
            metadata_url: Some(format!("https://api.{}.example/meta/{i}", names[c].to_ascii_lowercase())),
            marketplace: markets[c % markets.len()],
            source_available: Some(rng.random_bool(0.8)),
            collection_verified: verified[c],
            seller_verified: Some(rng.random_bool(0.5)),
            taken_down: false,
        });
        royalty.push(Decimal::new(rng.random_range(0..=10) * 5, 3).normalize());
    }

    // Owner position per asset. Placing an asset at position p uses p units
    // of capacity; slack is what can be spent without starving later sales.
    let mut remaining_cap = capacity;
    let mut remaining_sales = n_sales;
    let mut owner = vec![0usize; n_assets];
    let mut events = Vec::new();
    let mut t = BASELINE_START;
    for (i, rec) in records.iter().enumerate() {
        let slack = remaining_cap - remaining_sales;
        let p = rng.random_range(0..=slack.min(n_users - 2));
        owner[i] = p;
        remaining_cap -= p;
        t = step(&mut rng, t);
        events.push(Event::Mint(Mint {
            creator: users[p],
            asset: rec.id.clone(),
            time: t,
        }));
    }

    let mut open: Vec<usize> = (0..n_assets).filter(|&i| owner[i] < n_users - 1).collect();
    let mut funded = vec![false; n_users];
    for sale_no in 0..n_sales {
        let k = rng.random_range(0..open.len());
        let a = open[k];
        let from = owner[a];
        let slack = remaining_cap - remaining_sales;
        let max_jump = (n_users - 1 - from).min(slack + 1);
        let jump = rng.random_range(1..=max_jump);
        let to = from + jump;
        remaining_cap -= jump;
        remaining_sales -= 1;
        owner[a] = to;
        if to == n_users - 1 {
            open.swap_remove(k);
        }
        let (seller, buyer) = (users[from], users[to]);
        let asset = records[a].id.clone();

        if !funded[to] {
            funded[to] = true;
            t = step(&mut rng, t);
            events.push(Event::Paid(Paid {
                from: random_account(&mut rng),
                to: buyer,
                amount_wei: rng.random_range(1u128..100) * 10u128.pow(17),
                time: t,
                tx: random_tx(&mut rng),
            }));
        }

        let price = if rng.random_bool(AUCTION_SHARE) {
            let id = format!("auction-{seed}-{sale_no}");
            let reserve = usd(&mut rng, 500, 50_000);
            t = step(&mut rng, t);
            events.push(Event::AuctionStart(AuctionStart {
                seller,
                reserve_usd: reserve,
                time: t,
                auction_id: id.clone(),
                asset: asset.clone(),
            }));
            let mut others: Vec<usize> = (0..n_users).filter(|&u| u != from && u != to).collect();
            others.shuffle(&mut rng);
            others.truncate(rng.random_range(0..=3));
            others.push(to);
            let mut amount = reserve;
            for &b in &others {
                amount += usd(&mut rng, 100, 20_000);
                t = step(&mut rng, t);
                events.push(Event::Bid(Bid {
                    bidder: users[b],
                    amount_usd: amount,
                    time: t,
                    auction_id: id.clone(),
                    asset: asset.clone(),
                }));
            }
            t = step(&mut rng, t);
            events.push(Event::Win(Win {
                winner: buyer,
                amount_usd: amount,
                time: t,
                auction_id: id.clone(),
                asset: asset.clone(),
            }));
            events.push(Event::AuctionEnd(AuctionEnd {
                auction_id: id,
                asset: asset.clone(),
                time: t,
            }));
            amount
        } else {
            usd(&mut rng, 500, 500_000)
        };
        t = step(&mut rng, t);
        events.push(Event::Sale(Sale {
            seller,
            buyer,
            asset,
            price_usd: price,
            price_eth: eth_for(price),
            royalty_fraction: Some(royalty[a]),
            time: t,
            tx: Some(random_tx(&mut rng)),
        }));
    }

    Ok(Scenario {
        stream: EventStream::from_parts(events, records),
        labels: Vec::new(),
    })
}
