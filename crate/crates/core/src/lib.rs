//! Forensics over NFT marketplace event data.
//!
//! The pipeline is: ingest newline-delimited events and asset records into an
//! [`model::EventStream`], build the sale, bid, payment and transfer relation
//! graphs ([`graphs`]), then run the trading detectors ([`trading`]), the
//! counterfeit and trade-integrity detectors ([`integrity`]) and the
//! persistence audits ([`link_audit`]). [`synth`] generates labeled streams
//! for validating the detectors and [`report`] assembles a run report.

pub mod model;
pub mod graphs;
pub mod trading;
pub mod integrity;
pub mod link_audit;
pub mod synth;
pub mod report;
