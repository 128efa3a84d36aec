use std::collections::{BTreeMap, HashMap};

use crate::model::AccountId;

use super::DiGraph;

/// Partition of a graph's nodes into components.
///
/// Component ids are assigned in order of each component's smallest member
/// address, so they depend only on the node and edge sets, never on
/// insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentIndex {
    component_of: HashMap<AccountId, u32>,
    members: Vec<Vec<AccountId>>,
    /// Parallel-edge count per ordered pair, for pairs inside one component.
    pair_multiplicity: BTreeMap<(AccountId, AccountId), u32>,
    excluded: Vec<AccountId>,
}

impl ComponentIndex {
    fn build<A>(g: &DiGraph<A>, raw: Vec<Vec<u32>>, excluded: Vec<u32>) -> Self {
        let nodes = g.nodes();
        let mut comps: Vec<Vec<AccountId>> = raw
            .into_iter()
            .map(|c| {
                let mut ids: Vec<AccountId> = c.into_iter().map(|n| nodes.id(n)).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        comps.sort_unstable_by(|a, b| a[0].cmp(&b[0]));
        let mut component_of = HashMap::with_capacity(nodes.len());
        for (cid, members) in comps.iter().enumerate() {
            for m in members {
                component_of.insert(*m, cid as u32);
            }
        }
        let mut pair_multiplicity = BTreeMap::new();
        for ((a, b), count) in g.pairs() {
            let (ia, ib) = (nodes.id(a), nodes.id(b));
            match (component_of.get(&ia), component_of.get(&ib)) {
                (Some(ca), Some(cb)) if ca == cb => {
                    pair_multiplicity.insert((ia, ib), count);
                }
                _ => {}
            }
        }
        let mut excluded: Vec<AccountId> = excluded.into_iter().map(|n| nodes.id(n)).collect();
        excluded.sort_unstable();
        Self {
            component_of,
            members: comps,
            pair_multiplicity,
            excluded,
        }
    }

    pub fn component_of(&self, id: &AccountId) -> Option<u32> {
        self.component_of.get(id).copied()
    }

    /// Both accounts are indexed and share a component.
    pub fn same_component(&self, a: &AccountId, b: &AccountId) -> bool {
        match (self.component_of(a), self.component_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    pub fn members(&self, component: u32) -> &[AccountId] {
        &self.members[component as usize]
    }

    pub fn components(&self) -> impl Iterator<Item = (u32, &[AccountId])> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, m)| (i as u32, m.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Parallel edges `a → b`, counted only when both lie in one component.
    pub fn multiplicity(&self, a: &AccountId, b: &AccountId) -> u32 {
        self.pair_multiplicity.get(&(*a, *b)).copied().unwrap_or(0)
    }

    /// Intra-component ordered pairs with at least one edge.
    pub fn internal_pairs(&self) -> impl Iterator<Item = (&(AccountId, AccountId), u32)> {
        self.pair_multiplicity.iter().map(|(k, v)| (k, *v))
    }

    /// Nodes left out of the partition (hub exclusion).
    pub fn excluded(&self) -> &[AccountId] {
        &self.excluded
    }
}

/// Strongly connected components (iterative Tarjan, linear in V + E).
pub fn scc<A>(g: &DiGraph<A>) -> ComponentIndex {
    const UNVISITED: u32 = u32::MAX;
    let adj = g.successors();
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut out: Vec<Vec<u32>> = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        call.push((root, 0));

        while let Some(frame) = call.last_mut() {
            let v = frame.0 as usize;
            if frame.1 < adj[v].len() {
                let w = adj[v][frame.1];
                frame.1 += 1;
                let wi = w as usize;
                if index[wi] == UNVISITED {
                    index[wi] = counter;
                    low[wi] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    call.push((w, 0));
                } else if on_stack[wi] {
                    low[v] = low[v].min(index[wi]);
                }
                continue;
            }
            call.pop();
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w as usize == v {
                        break;
                    }
                }
                out.push(comp);
            }
            if let Some(parent) = call.last() {
                let p = parent.0 as usize;
                low[p] = low[p].min(low[v]);
            }
        }
    }
    ComponentIndex::build(g, out, Vec::new())
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

fn union_components<A>(g: &DiGraph<A>, skip: &[bool]) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut uf = UnionFind::new(n);
    for ((a, b), _) in g.pairs() {
        if !skip[a as usize] && !skip[b as usize] {
            uf.union(a, b);
        }
    }
    let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
    for v in 0..n as u32 {
        if !skip[v as usize] {
            groups.entry(uf.find(v)).or_default().push(v);
        }
    }
    groups.into_values().collect()
}

/// Weakly connected components (edge direction ignored).
pub fn wcc<A>(g: &DiGraph<A>) -> ComponentIndex {
    let skip = vec![false; g.node_count()];
    ComponentIndex::build(g, union_components(g, &skip), Vec::new())
}

/// WCCs after dropping every node with more than `max_degree` distinct
/// neighbours (either direction). Dropped nodes belong to no component and
/// are listed in [`ComponentIndex::excluded`].
pub fn wcc_excluding_hubs<A>(g: &DiGraph<A>, max_degree: usize) -> ComponentIndex {
    let n = g.node_count();
    let mut neighbours: Vec<Vec<u32>> = vec![Vec::new(); n];
    for ((a, b), _) in g.pairs() {
        if a != b {
            neighbours[a as usize].push(b);
            neighbours[b as usize].push(a);
        }
    }
    let skip: Vec<bool> = neighbours
        .iter_mut()
        .map(|list| {
            list.sort_unstable();
            list.dedup();
            list.len() > max_degree
        })
        .collect();
    let excluded = (0..n as u32).filter(|&v| skip[v as usize]).collect();
    ComponentIndex::build(g, union_components(g, &skip), excluded)
}
