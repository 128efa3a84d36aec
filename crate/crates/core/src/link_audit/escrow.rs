//! NFTs held in a marketplace escrow account over time.

use std::collections::HashMap;
use std::io::Write;

use crate::model::{AccountId, AssetId, Event, EventStream, Timestamp};

/// `(time, count)` after every transfer that moves an asset into or out of
/// escrow. Consecutive counts differ by exactly one.
pub fn escrow_series(stream: &EventStream, escrow: &AccountId) -> Vec<(Timestamp, usize)> {
    let mut holder: HashMap<&AssetId, AccountId> = HashMap::new();
    let mut count = 0usize;
    let mut out = Vec::new();
    for e in stream.events() {
        let Event::Transfer(t) = e else { continue };
        let was_held = holder.get(&t.asset) == Some(escrow);
        let now_held = t.to == *escrow;
        holder.insert(&t.asset, t.to);
        match (was_held, now_held) {
            (false, true) => count += 1,
            (true, false) => count -= 1,
            _ => continue,
        }
        out.push((t.time, count));
    }
    out
}

/// Assets whose most recent transfer at or before `at_time` went to escrow.
pub fn count_escrowed(stream: &EventStream, escrow: &AccountId, at_time: Timestamp) -> usize {
    escrow_series(stream, escrow)
        .iter()
        .take_while(|(t, _)| *t <= at_time)
        .last()
        .map_or(0, |&(_, c)| c)
}

pub fn write_escrow_csv<W: Write>(mut w: W, series: &[(Timestamp, usize)]) -> std::io::Result<()> {
    writeln!(w, "time,count")?;
    for (t, c) in series {
        writeln!(w, "{t},{c}")?;
    }
    Ok(())
}
