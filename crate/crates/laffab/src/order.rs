//! Node ordering: the default text order plus the pluggable rank
//! refinement for corpora that distinguish object types.

use std::collections::HashMap;

use crate::model::FeatureKey;

/// Sort key realizing the node order. Compared lexicographically field
/// by field: ascending smallest start anchor, then ascending rank, then
/// *descending* largest end anchor (embedding nodes precede the nodes
/// they embed), then dense node index as the final tiebreak.
///
/// Region-less nodes sort after every anchored node, ordered among
/// themselves by index alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeOrderKey {
    pub min_anchor: u64,
    pub rank: i64,
    pub neg_max_anchor: i64,
    pub node_index: u32,
}

impl NodeOrderKey {
    pub fn anchored(min: u32, max: u32, rank: i64, node_index: u32) -> Self {
        NodeOrderKey {
            min_anchor: u64::from(min),
            rank,
            neg_max_anchor: -i64::from(max),
            node_index,
        }
    }

    /// Key for a node with no regions; rank is ignored by construction
    /// so that these nodes order purely by index.
    pub fn region_less(node_index: u32) -> Self {
        NodeOrderKey {
            min_anchor: u64::MAX,
            rank: 0,
            neg_max_anchor: 0,
            node_index,
        }
    }
}

/// Refines the default order among nodes sharing a smallest start
/// anchor: the named feature gives each node an object type, and the
/// ranking maps object types to integers (lower sorts first). Nodes
/// whose type is missing or unmapped keep rank 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    pub feature: FeatureKey,
    pub ranking: HashMap<String, i64>,
}

impl RankTable {
    pub fn new<S: Into<String>>(feature: FeatureKey, ranking: impl IntoIterator<Item = (S, i64)>) -> Self {
        RankTable {
            feature,
            ranking: ranking.into_iter().map(|(v, r)| (v.into(), r)).collect(),
        }
    }
}

/// A `RankTable` resolved against a corpus: one rank per dense node
/// index. Resolution is the only step that can fail (the rank feature
/// may not be loaded), so comparisons stay infallible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRanks(pub Vec<i64>);

impl NodeRanks {
    pub fn rank(&self, node: u32) -> i64 {
        self.0[node as usize]
    }
}
