//! Fee evasion: NFTs moved by plain transfer and paid for separately.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{AccountId, AssetId, Event, EventStream, Timestamp};

pub const DEFAULT_EVASION_WINDOW: u64 = 900;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvasionInstance {
    pub seller: AccountId,
    pub buyer: AccountId,
    pub asset: AssetId,
    pub transfer_time: Timestamp,
    pub payment_time: Timestamp,
    /// Payment time minus transfer time.
    pub gap_seconds: i64,
}

/// A transfer S→B is an instance when B paid S within `window_seconds`
/// either side of it (inclusive). The nearest payment is reported, the
/// earlier one on a tie.
pub fn detect_offplatform_trades(stream: &EventStream, window_seconds: u64) -> Vec<EvasionInstance> {
    let mut payments: HashMap<(AccountId, AccountId), Vec<Timestamp>> = HashMap::new();
    for e in stream.events() {
        if let Event::Paid(p) = e {
            payments.entry((p.from, p.to)).or_default().push(p.time);
        }
    }
    for times in payments.values_mut() {
        times.sort_unstable();
    }
    let mut out = Vec::new();
    for e in stream.events() {
        let Event::Transfer(t) = e else { continue };
        let Some(times) = payments.get(&(t.to, t.from)) else { continue };
        let lo = t.time.saturating_sub(window_seconds);
        let hi = t.time.saturating_add(window_seconds);
        let start = times.partition_point(|&x| x < lo);
        let nearest = times[start..]
            .iter()
            .take_while(|&&x| x <= hi)
            .min_by_key(|&&x| (x.abs_diff(t.time), x));
        if let Some(&paid) = nearest {
            out.push(EvasionInstance {
                seller: t.from,
                buyer: t.to,
                asset: t.asset.clone(),
                transfer_time: t.time,
                payment_time: paid,
                gap_seconds: paid as i64 - t.time as i64,
            });
        }
    }
    out
}
