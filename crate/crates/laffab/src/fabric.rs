//! The analysis surface over a compiled corpus: ordered node walks,
//! neighbourhood exploration along edges, feature lookup, and
//! primary-text slices. Everything here is read-only; a corpus can be
//! walked from many threads at once.

use std::cmp::Ordering;

use thiserror::Error;

use crate::corpus::{CompiledCorpus, FeatureTable, TargetKind};
use crate::model::FeatureKey;
use crate::order::{NodeOrderKey, NodeRanks, RankTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FabricError {
    #[error("feature {0} is not loaded")]
    FeatureNotLoaded(FeatureKey),
    #[error("unknown feature key {0}")]
    UnknownFeatureKey(FeatureKey),
}

/// A feature-access target by dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Node(u32),
    Edge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

impl CompiledCorpus {
    /// The loaded column for `key`; distinguishes known-but-unloaded
    /// keys from keys the corpus has never seen.
    pub(crate) fn table(&self, key: &FeatureKey) -> Result<&FeatureTable, FabricError> {
        match self.features.get(key) {
            Some(t) => Ok(t),
            None if self.known_keys.contains(key) => {
                Err(FabricError::FeatureNotLoaded(key.clone()))
            }
            None => Err(FabricError::UnknownFeatureKey(key.clone())),
        }
    }

    /// The value annotated on `target` under `key`, or `None` when the
    /// target carries no such feature (including target-kind
    /// mismatches). Erring is reserved for unknown or unloaded keys.
    pub fn feature_value(&self, key: &FeatureKey, target: Target) -> Result<Option<&str>, FabricError> {
        let table = self.table(key)?;
        let index = match (table.kind, target) {
            (TargetKind::Node, Target::Node(i)) | (TargetKind::Edge, Target::Edge(i)) => i,
            _ => return Ok(None),
        };
        Ok(table.value_symbol(index).map(|s| self.strings.get(s)))
    }

    pub fn node_feature(&self, key: &FeatureKey, node: u32) -> Result<Option<&str>, FabricError> {
        self.feature_value(key, Target::Node(node))
    }

    pub fn edge_feature(&self, key: &FeatureKey, edge: u32) -> Result<Option<&str>, FabricError> {
        self.feature_value(key, Target::Edge(edge))
    }

    /// Resolves a rank table to one rank per node. Nodes without the
    /// rank feature, or with an unmapped value, keep rank 0. This is
    /// the only fallible step of rank ordering, so the comparison
    /// itself stays infallible.
    pub fn resolve_ranks(&self, table: &RankTable) -> Result<NodeRanks, FabricError> {
        let feature = self.table(&table.feature)?;
        let mut ranks = vec![0i64; self.node_count()];
        if feature.kind == TargetKind::Node {
            for &(node, sym) in &feature.entries {
                if let Some(&r) = table.ranking.get(self.strings.get(sym)) {
                    ranks[node as usize] = r;
                }
            }
        }
        Ok(NodeRanks(ranks))
    }

    /// The node's sort key, with optional rank refinement.
    pub fn order_key(&self, node: u32, ranks: Option<&NodeRanks>) -> NodeOrderKey {
        match self.anchor_span(node) {
            None => NodeOrderKey::region_less(node),
            Some((min, max)) => {
                NodeOrderKey::anchored(min, max, ranks.map_or(0, |r| r.rank(node)), node)
            }
        }
    }

    /// Strict total order over nodes: ascending smallest anchor, then
    /// rank, then descending largest anchor (embedder first), then
    /// index; region-less nodes last, by index.
    pub fn cmp_nodes(&self, a: u32, b: u32, ranks: Option<&NodeRanks>) -> Ordering {
        self.order_key(a, ranks).cmp(&self.order_key(b, ranks))
    }

    /// All nodes in the precomputed default order.
    pub fn walk(&self) -> &[u32] {
        &self.order
    }

    /// All nodes, reordered under an optional rank table.
    pub fn walk_ranked(&self, rank: Option<&RankTable>) -> Result<Vec<u32>, FabricError> {
        match rank {
            None => Ok(self.order.clone()),
            Some(rt) => {
                let ranks = self.resolve_ranks(rt)?;
                let mut nodes: Vec<u32> = (0..self.node_count() as u32).collect();
                nodes.sort_unstable_by_key(|&n| self.order_key(n, Some(&ranks)));
                Ok(nodes)
            }
        }
    }

    /// Ordered walk keeping only nodes the predicate accepts. The
    /// predicate sees the corpus, so it can consult any loaded feature;
    /// its errors (typically `FeatureNotLoaded`) propagate.
    pub fn walk_where<F>(&self, rank: Option<&RankTable>, mut pred: F) -> Result<Vec<u32>, FabricError>
    where
        F: FnMut(&CompiledCorpus, u32) -> Result<bool, FabricError>,
    {
        let mut out = Vec::new();
        for n in self.walk_ranked(rank)? {
            if pred(self, n)? {
                out.push(n);
            }
        }
        Ok(out)
    }

    /// Incident edges of `node` in the given direction as
    /// (edge, neighbour) pairs, ordered by the neighbour's position in
    /// the default order, then edge index. The optional filter keeps
    /// only edges annotated with the given feature value.
    pub fn neighbourhood(
        &self,
        node: u32,
        direction: Direction,
        edge_filter: Option<(&FeatureKey, &str)>,
    ) -> Result<Vec<(u32, u32)>, FabricError> {
        let row = match direction {
            Direction::Out => self.edges_out.row(node),
            Direction::In => self.edges_in.row(node),
        };
        match edge_filter {
            None => Ok(row.to_vec()),
            Some((key, value)) => {
                let mut out = Vec::new();
                for &(edge, neighbour) in row {
                    if self.edge_feature(key, edge)? == Some(value) {
                        out.push((edge, neighbour));
                    }
                }
                Ok(out)
            }
        }
    }

    /// The node's text: its region substrings in ascending
    /// (start, end) anchor order, joined by `separator`. Region-less
    /// nodes yield the empty string.
    pub fn text_of(&self, node: u32, separator: &str) -> String {
        let mut spans: Vec<(u32, u32)> = self
            .node_regions
            .row(node)
            .iter()
            .map(|&r| self.region_anchors[r as usize])
            .collect();
        spans.sort_unstable();
        let pieces: Vec<&str> = spans.iter().map(|&(s, e)| self.text_slice(s, e)).collect();
        pieces.join(separator)
    }
}
