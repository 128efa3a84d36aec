//! The four relation graphs: sales, bids, payments and transfers.
//!
//! Every graph keeps parallel edges; each edge remembers the index of the
//! event it came from in the [`EventStream`].

use std::collections::HashMap;
use std::io::Write;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::model::{AccountId, AssetId, Event, EventStream, Timestamp};

mod components;

pub use components::{scc, wcc, wcc_excluding_hubs, ComponentIndex, UnionFind};

/// Default undirected-degree cutoff for payment-graph hub exclusion.
pub const DEFAULT_HUB_DEGREE_CUTOFF: usize = 1000;

#[derive(Debug, Clone, Default)]
pub struct NodeTable {
    ids: Vec<AccountId>,
    index: HashMap<AccountId, u32>,
}

impl NodeTable {
    pub fn intern(&mut self, id: AccountId) -> u32 {
        let next = self.ids.len() as u32;
        *self.index.entry(id).or_insert_with(|| {
            self.ids.push(id);
            next
        })
    }

    pub fn get(&self, id: &AccountId) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn id(&self, node: u32) -> AccountId {
        self.ids[node as usize]
    }

    pub fn ids(&self) -> &[AccountId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<A> {
    pub src: u32,
    pub dst: u32,
    /// Index of the originating event in the stream.
    pub event: usize,
    pub data: A,
}

/// Directed multigraph over accounts.
#[derive(Debug, Clone)]
pub struct DiGraph<A> {
    nodes: NodeTable,
    edges: Vec<Edge<A>>,
    pair_counts: HashMap<(u32, u32), u32>,
}

impl<A> Default for DiGraph<A> {
    fn default() -> Self {
        Self {
            nodes: NodeTable::default(),
            edges: Vec::new(),
            pair_counts: HashMap::new(),
        }
    }
}

impl<A> DiGraph<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: AccountId) -> u32 {
        self.nodes.intern(id)
    }

    pub fn add_edge(&mut self, src: AccountId, dst: AccountId, event: usize, data: A) {
        let src = self.nodes.intern(src);
        let dst = self.nodes.intern(dst);
        *self.pair_counts.entry((src, dst)).or_default() += 1;
        self.edges.push(Edge { src, dst, event, data });
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &NodeTable {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge<A>] {
        &self.edges
    }

    pub fn contains(&self, id: &AccountId) -> bool {
        self.nodes.get(id).is_some()
    }

    /// Number of parallel edges `a → b`.
    pub fn multiplicity(&self, a: &AccountId, b: &AccountId) -> usize {
        match (self.nodes.get(a), self.nodes.get(b)) {
            (Some(x), Some(y)) => self.pair_multiplicity(x, y),
            _ => 0,
        }
    }

    pub(crate) fn pair_multiplicity(&self, a: u32, b: u32) -> usize {
        self.pair_counts.get(&(a, b)).copied().unwrap_or(0) as usize
    }

    /// Distinct ordered pairs with at least one edge, and their counts.
    pub fn pairs(&self) -> impl Iterator<Item = ((u32, u32), u32)> + '_ {
        self.pair_counts.iter().map(|(k, v)| (*k, *v))
    }

    /// Distinct successors per node.
    pub fn successors(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(a, b) in self.pair_counts.keys() {
            adj[a as usize].push(b);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaleEdge {
    pub asset: AssetId,
    pub price_usd: Decimal,
    pub time: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentEdge {
    pub amount_wei: u128,
    pub time: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferEdge {
    pub asset: AssetId,
    pub time: Timestamp,
}

pub type SaleGraph = DiGraph<SaleEdge>;
pub type PaymentGraph = DiGraph<PaymentEdge>;
pub type TransferGraph = DiGraph<TransferEdge>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BidEdgeKind {
    Auction,
    Bid,
    CancelBid,
    Win,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BidEdge {
    pub user: u32,
    pub asset: u32,
    pub kind: BidEdgeKind,
    pub amount_usd: Decimal,
    pub time: Timestamp,
    pub auction_id: String,
    pub event: usize,
}

/// Bipartite user → asset graph of auction activity.
#[derive(Debug, Clone, Default)]
pub struct BidGraph {
    users: NodeTable,
    assets: Vec<AssetId>,
    asset_index: HashMap<AssetId, u32>,
    edges: Vec<BidEdge>,
}

impl BidGraph {
    fn asset_node(&mut self, asset: &AssetId) -> u32 {
        if let Some(&i) = self.asset_index.get(asset) {
            return i;
        }
        let i = self.assets.len() as u32;
        self.assets.push(asset.clone());
        self.asset_index.insert(asset.clone(), i);
        i
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add_edge(
        &mut self,
        user: AccountId,
        asset: &AssetId,
        kind: BidEdgeKind,
        amount_usd: Decimal,
        time: Timestamp,
        auction_id: &str,
        event: usize,
    ) {
        let user = self.users.intern(user);
        let asset = self.asset_node(asset);
        self.edges.push(BidEdge {
            user,
            asset,
            kind,
            amount_usd,
            time,
            auction_id: auction_id.to_string(),
            event,
        });
    }

    pub fn users(&self) -> &NodeTable {
        &self.users
    }

    pub fn assets(&self) -> &[AssetId] {
        &self.assets
    }

    pub fn edges(&self) -> &[BidEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.users.len() + self.assets.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RelationGraphs {
    pub sales: SaleGraph,
    pub bids: BidGraph,
    pub payments: PaymentGraph,
    pub transfers: TransferGraph,
}

/// One pass over the stream. Mints and auction ends carry no user-to-user or
/// user-to-asset relation and produce no edge.
pub fn build_graphs(stream: &EventStream) -> RelationGraphs {
    let mut g = RelationGraphs::default();
    for (i, e) in stream.events().iter().enumerate() {
        match e {
            Event::Sale(s) => g.sales.add_edge(
                s.seller,
                s.buyer,
                i,
                SaleEdge {
                    asset: s.asset.clone(),
                    price_usd: s.price_usd,
                    time: s.time,
                },
            ),
            Event::Paid(p) => g.payments.add_edge(
                p.from,
                p.to,
                i,
                PaymentEdge {
                    amount_wei: p.amount_wei,
                    time: p.time,
                },
            ),
            Event::Transfer(t) => g.transfers.add_edge(
                t.from,
                t.to,
                i,
                TransferEdge {
                    asset: t.asset.clone(),
                    time: t.time,
                },
            ),
            Event::AuctionStart(a) => g.bids.add_edge(
                a.seller,
                &a.asset,
                BidEdgeKind::Auction,
                a.reserve_usd,
                a.time,
                &a.auction_id,
                i,
            ),
            Event::Bid(b) => g.bids.add_edge(
                b.bidder,
                &b.asset,
                BidEdgeKind::Bid,
                b.amount_usd,
                b.time,
                &b.auction_id,
                i,
            ),
            Event::CancelBid(b) => g.bids.add_edge(
                b.bidder,
                &b.asset,
                BidEdgeKind::CancelBid,
                b.amount_usd,
                b.time,
                &b.auction_id,
                i,
            ),
            Event::Win(w) => g.bids.add_edge(
                w.winner,
                &w.asset,
                BidEdgeKind::Win,
                w.amount_usd,
                w.time,
                &w.auction_id,
                i,
            ),
            Event::Mint(_) | Event::AuctionEnd(_) => {}
        }
    }
    g
}

/// Graphs plus the component indices the detectors query.
#[derive(Debug, Clone)]
pub struct GraphContext {
    pub graphs: RelationGraphs,
    pub sales_scc: ComponentIndex,
    pub transfer_wcc: ComponentIndex,
    /// Payment-graph WCCs after removing hub accounts.
    pub payment_wcc: ComponentIndex,
    pub hub_degree_cutoff: usize,
}

impl GraphContext {
    pub fn new(stream: &EventStream, hub_degree_cutoff: usize) -> Self {
        Self::from_graphs(build_graphs(stream), hub_degree_cutoff)
    }

    pub fn from_graphs(graphs: RelationGraphs, hub_degree_cutoff: usize) -> Self {
        let (sales_scc, (transfer_wcc, payment_wcc)) = rayon::join(
            || scc(&graphs.sales),
            || {
                rayon::join(
                    || wcc(&graphs.transfers),
                    || wcc_excluding_hubs(&graphs.payments, hub_degree_cutoff),
                )
            },
        );
        Self {
            graphs,
            sales_scc,
            transfer_wcc,
            payment_wcc,
            hub_degree_cutoff,
        }
    }
}

/// Tab-separated annotation fields for edge-list dumps.
pub trait EdgeFields {
    fn fields(&self) -> Vec<String>;
}

impl EdgeFields for SaleEdge {
    fn fields(&self) -> Vec<String> {
        vec![self.asset.to_string(), self.price_usd.to_string(), self.time.to_string()]
    }
}

impl EdgeFields for PaymentEdge {
    fn fields(&self) -> Vec<String> {
        vec![self.amount_wei.to_string(), self.time.to_string()]
    }
}

impl EdgeFields for TransferEdge {
    fn fields(&self) -> Vec<String> {
        vec![self.asset.to_string(), self.time.to_string()]
    }
}

/// One edge per line: `src<TAB>dst<TAB>annotations...`.
pub fn write_edge_list<A: EdgeFields, W: Write>(g: &DiGraph<A>, mut w: W) -> std::io::Result<()> {
    for e in g.edges() {
        let mut cols = vec![g.nodes.id(e.src).to_string(), g.nodes.id(e.dst).to_string()];
        cols.extend(e.data.fields());
        writeln!(w, "{}", cols.join("\t"))?;
    }
    Ok(())
}

pub fn write_bid_edge_list<W: Write>(g: &BidGraph, mut w: W) -> std::io::Result<()> {
    for e in g.edges() {
        let kind = match e.kind {
            BidEdgeKind::Auction => "auction",
            BidEdgeKind::Bid => "bid",
            BidEdgeKind::CancelBid => "cancel_bid",
            BidEdgeKind::Win => "win",
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            g.users.id(e.user),
            g.assets[e.asset as usize],
            kind,
            e.amount_usd,
            e.time,
            e.auction_id
        )?;
    }
    Ok(())
}
