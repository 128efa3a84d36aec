//! Royalty manipulation: creators raising the royalty between resales.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{AssetId, Event, EventStream};

/// Collection key used for assets without an asset record.
pub const UNKNOWN_COLLECTION: &str = "";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoyaltyIncreases {
    pub asset: AssetId,
    pub increases: usize,
}

/// Counts, per asset and in time order, sales whose royalty exceeds the
/// royalty of the previous sale that carried one. Assets are grouped by
/// collection and listed only when they have at least one royalty-bearing sale.
pub fn count_royalty_increases(stream: &EventStream) -> BTreeMap<String, Vec<RoyaltyIncreases>> {
    let mut per_asset: BTreeMap<&AssetId, (Option<Decimal>, usize)> = BTreeMap::new();
    for e in stream.events() {
        let Event::Sale(s) = e else { continue };
        let Some(r) = s.royalty_fraction else { continue };
        let (last, n) = per_asset.entry(&s.asset).or_insert((None, 0));
        if last.is_some_and(|l| r > l) {
            *n += 1;
        }
        *last = Some(r);
    }
    let mut out: BTreeMap<String, Vec<RoyaltyIncreases>> = BTreeMap::new();
    for (asset, (_, increases)) in per_asset {
        let coll = stream.collection_of(asset).unwrap_or(UNKNOWN_COLLECTION);
        out.entry(coll.to_string()).or_default().push(RoyaltyIncreases {
            asset: asset.clone(),
            increases,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AccountId, Sale};
    use std::str::FromStr;

    fn sale(tok: u32, t: u64, royalty: Option<&str>) -> Event {
        Event::Sale(Sale {
            seller: AccountId::from_bytes([1; 20]),
            buyer: AccountId::from_bytes([2; 20]),
            asset: AssetId::new(AccountId::from_bytes([9; 20]), tok),
            price_usd: Decimal::ONE,
            price_eth: Decimal::ONE,
            royalty_fraction: royalty.map(|r| Decimal::from_str(r).unwrap()),
            time: t,
            tx: None,
        })
    }

    fn counts(events: Vec<Event>) -> Vec<usize> {
        count_royalty_increases(&EventStream::from_parts(events, vec![]))
            .into_values()
            .flatten()
            .map(|r| r.increases)
            .collect()
    }

    #[test]
    fn increases_are_counted() {
        let e = ["0.05", "0.10", "0.10", "0.15"]
            .iter()
            .enumerate()
            .map(|(i, r)| sale(1, 10 * i as u64, Some(r)))
            .collect();
        assert_eq!(counts(e), vec![2]);
    }

    #[test]
    fn single_sale_and_decreases() {
        assert_eq!(counts(vec![sale(1, 1, Some("0.1"))]), vec![0]);
        assert_eq!(counts(vec![sale(1, 1, Some("0.10")), sale(1, 2, Some("0.05"))]), vec![0]);
    }

    #[test]
    fn missing_royalties_do_not_break_the_chain() {
        let e = vec![
            sale(1, 1, Some("0.05")),
            sale(1, 2, None),
            sale(1, 3, Some("0.07")),
            sale(2, 4, Some("0.5")),
        ];
        assert_eq!(counts(e), vec![1, 0]);
    }

    #[test]
    fn order_is_by_time_not_input() {
        let e = vec![sale(1, 30, Some("0.3")), sale(1, 10, Some("0.1")), sale(1, 20, Some("0.2"))];
        assert_eq!(counts(e), vec![2]);
    }
}
