//! Seeded synthetic markets with labeled malpractice, for validating the
//! detectors against known ground truth.
//!
//! [`gen_baseline`] builds a market in which no detector should fire, and
//! [`inject`] appends one labeled pattern at a time after the baseline ends.

mod baseline;
mod inject;

use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{AccountId, EventStream, Timestamp, TxHash};

pub use baseline::{baseline_capacity, gen_baseline, BASELINE_START};
pub use inject::{inject, Injection, InjectionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MalpracticeKind {
    WashTrading,
    ShillBidding,
    BidShielding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub kind: MalpracticeKind,
    pub accounts: Vec<AccountId>,
    /// Indices into the scenario's event list, ascending.
    pub events: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub stream: EventStream,
    pub labels: Vec<Label>,
}

impl Scenario {
    pub fn labels_of(&self, kind: MalpracticeKind) -> impl Iterator<Item = &Label> {
        self.labels.iter().filter(move |l| l.kind == kind)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("need at least 2 users, got {0}")]
    TooFewUsers(usize),
    #[error("{sales} sales exceed the acyclic capacity of {capacity}")]
    Infeasible { sales: usize, capacity: usize },
    #[error("invalid injection: {0}")]
    InvalidSpec(String),
}

/// Writes one label per line.
pub fn write_labels<W: Write>(mut w: W, labels: &[Label]) -> std::io::Result<()> {
    for l in labels {
        serde_json::to_writer(&mut w, l)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_labels<R: BufRead>(r: R) -> std::io::Result<Vec<Label>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(std::io::Error::other)?);
    }
    Ok(out)
}

fn random_account(rng: &mut ChaCha8Rng) -> AccountId {
    AccountId::from_bytes(rng.random())
}

fn random_tx(rng: &mut ChaCha8Rng) -> TxHash {
    TxHash::from_bytes(rng.random())
}

/// Next event time: 60 to 299 seconds after `t`.
fn step(rng: &mut ChaCha8Rng, t: Timestamp) -> Timestamp {
    t + 60 + rng.random_range(0..240)
}

fn usd(rng: &mut ChaCha8Rng, lo_cents: i64, hi_cents: i64) -> Decimal {
    Decimal::new(rng.random_range(lo_cents..hi_cents), 2).normalize()
}

fn eth_for(usd: Decimal) -> Decimal {
    (usd / Decimal::from(2000)).round_dp(6).normalize()
}

const BASE58: &[u8] = b"123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

/// A syntactically valid CIDv0.
fn random_cid(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::from("Qm");
    for _ in 0..44 {
        s.push(BASE58[rng.random_range(0..BASE58.len())] as char);
    }
    s
}
