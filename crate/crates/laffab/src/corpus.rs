//! Columnar compilation of an annotation graph: interned strings,
//! dense indices assigned in first-declaration order, CSR adjacency,
//! one table per feature key, and the precomputed default node order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{
    validate, AnnoTarget, Annotation, EdgeRecord, FeatureKey, Graph, NodeRecord, PrimaryData,
    Region,
};
use crate::order::NodeOrderKey;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("invalid graph: {}", .violations.join("; "))]
    InvalidGraph { violations: Vec<String> },
    #[error("feature {0} is not loaded")]
    FeatureNotLoaded(FeatureKey),
}

/// Append-only string interner; ids are dense from 0 in first-seen
/// order, so interning is deterministic for a fixed input sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StringTable {
    symbols: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl StringTable {
    pub fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.lookup.get(s) {
            return id;
        }
        let id = u32::try_from(self.symbols.len()).expect("string table overflow");
        self.symbols.push(s.to_owned());
        self.lookup.insert(s.to_owned(), id);
        id
    }

    pub fn get(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }

    pub fn id_of(&self, s: &str) -> Option<u32> {
        self.lookup.get(s).copied()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.as_str())
    }

    /// Rebuilds a table from its symbol list (bundle loading); the
    /// caller guarantees the symbols are unique.
    pub fn from_symbols(symbols: Vec<String>) -> Self {
        let lookup = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        StringTable { symbols, lookup }
    }
}

/// Which object kind a feature key annotates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetKind {
    Node,
    Edge,
}

/// One feature column: a sparse map from dense target index to value
/// symbol, stored as pairs in strictly ascending target order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTable {
    pub kind: TargetKind,
    pub entries: Vec<(u32, u32)>,
}

impl FeatureTable {
    pub fn value_symbol(&self, target: u32) -> Option<u32> {
        self.entries
            .binary_search_by_key(&target, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Offset-indexed adjacency: row `i` is `items[offsets[i]..offsets[i+1]]`.
/// Offsets are monotone and the last one equals `items.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr<T> {
    pub offsets: Vec<u32>,
    pub items: Vec<T>,
}

impl<T> Csr<T> {
    pub fn from_rows<I>(rows: I) -> Self
    where
        I: IntoIterator,
        I::Item: IntoIterator<Item = T>,
    {
        let mut offsets = vec![0u32];
        let mut items = Vec::new();
        for row in rows {
            items.extend(row);
            offsets.push(u32::try_from(items.len()).expect("adjacency overflow"));
        }
        Csr { offsets, items }
    }

    pub fn row(&self, i: u32) -> &[T] {
        let lo = self.offsets[i as usize] as usize;
        let hi = self.offsets[i as usize + 1] as usize;
        &self.items[lo..hi]
    }

    pub fn row_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// The compiled, immutable corpus. Everything is addressed by dense
/// index; original id strings survive in `*_ids` via the string table.
/// `features` holds only the loaded subset of `known_keys`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledCorpus {
    pub primary: PrimaryData,
    pub region_anchors: Vec<(u32, u32)>,
    pub node_regions: Csr<u32>,
    /// Edge index → (from node, to node).
    pub edge_endpoints: Vec<(u32, u32)>,
    /// Default-order permutation: `order[k]` is the node at position k.
    pub order: Vec<u32>,
    pub strings: StringTable,
    pub region_ids: Vec<u32>,
    pub node_ids: Vec<u32>,
    pub edge_ids: Vec<u32>,
    /// Every feature key present in the corpus, loaded or not.
    pub known_keys: BTreeSet<FeatureKey>,
    pub features: BTreeMap<FeatureKey, FeatureTable>,
    /// Tuple count over the whole corpus (not just loaded tables).
    pub total_feature_tuples: usize,

    // Derived at assembly time; deterministic given the fields above.
    char_to_byte: Vec<u32>,
    order_pos: Vec<u32>,
    /// Node → (edge index, neighbour index), sorted by the neighbour's
    /// order position then edge index.
    pub edges_out: Csr<(u32, u32)>,
    pub edges_in: Csr<(u32, u32)>,
    region_lookup: HashMap<String, u32>,
    node_lookup: HashMap<String, u32>,
    edge_lookup: HashMap<String, u32>,
}

impl CompiledCorpus {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        primary: PrimaryData,
        region_anchors: Vec<(u32, u32)>,
        node_regions: Csr<u32>,
        edge_endpoints: Vec<(u32, u32)>,
        order: Vec<u32>,
        strings: StringTable,
        region_ids: Vec<u32>,
        node_ids: Vec<u32>,
        edge_ids: Vec<u32>,
        known_keys: BTreeSet<FeatureKey>,
        features: BTreeMap<FeatureKey, FeatureTable>,
        total_feature_tuples: usize,
    ) -> CompiledCorpus {
        let n_nodes = node_ids.len();

        let mut char_to_byte = Vec::with_capacity(primary.length + 1);
        for (byte, _) in primary.text.char_indices() {
            char_to_byte.push(byte as u32);
        }
        char_to_byte.push(primary.text.len() as u32);

        let mut order_pos = vec![0u32; n_nodes];
        for (pos, &node) in order.iter().enumerate() {
            order_pos[node as usize] = pos as u32;
        }

        let mut out_rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_nodes];
        let mut in_rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_nodes];
        for (e, &(from, to)) in edge_endpoints.iter().enumerate() {
            out_rows[from as usize].push((e as u32, to));
            in_rows[to as usize].push((e as u32, from));
        }
        for rows in [&mut out_rows, &mut in_rows] {
            for row in rows.iter_mut() {
                row.sort_by_key(|&(e, nb)| (order_pos[nb as usize], e));
            }
        }
        let edges_out = Csr::from_rows(out_rows);
        let edges_in = Csr::from_rows(in_rows);

        let index_of = |ids: &[u32], strings: &StringTable| -> HashMap<String, u32> {
            ids.iter()
                .enumerate()
                .map(|(i, &sym)| (strings.get(sym).to_owned(), i as u32))
                .collect()
        };
        let region_lookup = index_of(&region_ids, &strings);
        let node_lookup = index_of(&node_ids, &strings);
        let edge_lookup = index_of(&edge_ids, &strings);

        CompiledCorpus {
            primary,
            region_anchors,
            node_regions,
            edge_endpoints,
            order,
            strings,
            region_ids,
            node_ids,
            edge_ids,
            known_keys,
            features,
            total_feature_tuples,
            char_to_byte,
            order_pos,
            edges_out,
            edges_in,
            region_lookup,
            node_lookup,
            edge_lookup,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn region_count(&self) -> usize {
        self.region_ids.len()
    }

    pub fn region_id(&self, i: u32) -> &str {
        self.strings.get(self.region_ids[i as usize])
    }

    pub fn node_id(&self, i: u32) -> &str {
        self.strings.get(self.node_ids[i as usize])
    }

    pub fn edge_id(&self, i: u32) -> &str {
        self.strings.get(self.edge_ids[i as usize])
    }

    pub fn region_index(&self, id: &str) -> Option<u32> {
        self.region_lookup.get(id).copied()
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.node_lookup.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<u32> {
        self.edge_lookup.get(id).copied()
    }

    /// Position of a node in the default order.
    pub fn order_position(&self, node: u32) -> u32 {
        self.order_pos[node as usize]
    }

    /// Primary-text slice between two character offsets.
    pub fn text_slice(&self, start: u32, end: u32) -> &str {
        let lo = self.char_to_byte[start as usize] as usize;
        let hi = self.char_to_byte[end as usize] as usize;
        &self.primary.text[lo..hi]
    }

    /// Smallest start and largest end anchor over the node's regions;
    /// `None` for region-less nodes.
    pub fn anchor_span(&self, node: u32) -> Option<(u32, u32)> {
        let regions = self.node_regions.row(node);
        if regions.is_empty() {
            return None;
        }
        let mut min = u32::MAX;
        let mut max = 0;
        for &r in regions {
            let (start, end) = self.region_anchors[r as usize];
            min = min.min(start);
            max = max.max(end);
        }
        Some((min, max))
    }

    /// The node's character coverage as merged, disjoint, ascending
    /// intervals; empty regions contribute nothing.
    pub fn coverage(&self, node: u32) -> Vec<(u32, u32)> {
        let mut spans: Vec<(u32, u32)> = self
            .node_regions
            .row(node)
            .iter()
            .map(|&r| self.region_anchors[r as usize])
            .filter(|&(s, e)| s < e)
            .collect();
        spans.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(spans.len());
        for (s, e) in spans {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        merged
    }

    /// Sum of entry counts over loaded tables only.
    pub fn loaded_feature_tuples(&self) -> usize {
        self.features.values().map(|t| t.len()).sum()
    }
}

/// True when every `inner` interval lies inside the union of `outer`;
/// both lists must be merged/ascending as produced by `coverage`.
/// An empty `inner` is covered by anything.
pub fn covers(outer: &[(u32, u32)], inner: &[(u32, u32)]) -> bool {
    let mut o = 0;
    for &(s, e) in inner {
        while o < outer.len() && outer[o].1 < e {
            o += 1;
        }
        if o == outer.len() || outer[o].0 > s || outer[o].1 < e {
            return false;
        }
    }
    true
}

/// Compiles a valid graph into its columnar form. Dense indices follow
/// first-declaration order, making the result deterministic.
pub fn compile(g: &Graph) -> Result<CompiledCorpus, CompileError> {
    let violations = validate(g);
    if !violations.is_empty() {
        return Err(CompileError::InvalidGraph { violations });
    }

    let mut strings = StringTable::default();
    let region_ids: Vec<u32> = g.regions.iter().map(|r| strings.intern(&r.id)).collect();
    let node_ids: Vec<u32> = g.nodes.iter().map(|n| strings.intern(&n.id)).collect();
    let edge_ids: Vec<u32> = g.edges.iter().map(|e| strings.intern(&e.id)).collect();

    let region_anchors: Vec<(u32, u32)> = g.regions.iter().map(|r| (r.start, r.end)).collect();

    let node_regions = Csr::from_rows(g.nodes.iter().map(|n| {
        n.regions
            .iter()
            .map(|rid| g.regions.position(rid).unwrap() as u32)
            .collect::<Vec<_>>()
    }));

    let edge_endpoints: Vec<(u32, u32)> = g
        .edges
        .iter()
        .map(|e| {
            (
                g.nodes.position(&e.from).unwrap() as u32,
                g.nodes.position(&e.to).unwrap() as u32,
            )
        })
        .collect();

    let mut features: BTreeMap<FeatureKey, FeatureTable> = BTreeMap::new();
    for a in &g.annotations {
        let (kind, target) = match &a.target {
            AnnoTarget::Node(id) => (TargetKind::Node, g.nodes.position(id).unwrap() as u32),
            AnnoTarget::Edge(id) => (TargetKind::Edge, g.edges.position(id).unwrap() as u32),
        };
        for (name, value) in &a.features {
            let sym = strings.intern(value);
            let key = FeatureKey::new(&a.space, &a.label, name);
            let table = features.entry(key).or_insert_with(|| FeatureTable {
                kind,
                entries: Vec::new(),
            });
            table.entries.push((target, sym));
        }
    }
    for table in features.values_mut() {
        table.entries.sort_unstable_by_key(|&(t, _)| t);
    }

    let order = {
        let keys: Vec<NodeOrderKey> = (0..g.nodes.len() as u32)
            .map(|i| {
                let row = node_regions.row(i);
                if row.is_empty() {
                    NodeOrderKey::region_less(i)
                } else {
                    let mut min = u32::MAX;
                    let mut max = 0;
                    for &r in row {
                        let (s, e) = region_anchors[r as usize];
                        min = min.min(s);
                        max = max.max(e);
                    }
                    NodeOrderKey::anchored(min, max, 0, i)
                }
            })
            .collect();
        let mut order: Vec<u32> = (0..g.nodes.len() as u32).collect();
        order.sort_unstable_by_key(|&i| keys[i as usize]);
        order
    };

    let known_keys: BTreeSet<FeatureKey> = features.keys().cloned().collect();
    let total = g.feature_tuple_count();

    Ok(CompiledCorpus::assemble(
        g.primary.clone(),
        region_anchors,
        node_regions,
        edge_endpoints,
        order,
        strings,
        region_ids,
        node_ids,
        edge_ids,
        known_keys,
        features,
        total,
    ))
}

/// Reconstructs a graph from a fully loaded corpus. Region, node and
/// edge declarations come back in dense-index order (the original
/// declaration order); feature tuples come back as one single-feature
/// annotation each, grouped by key — annotation ids and grouping are
/// not part of the compiled content.
pub fn decompile(c: &CompiledCorpus) -> Result<Graph, CompileError> {
    for key in &c.known_keys {
        if !c.features.contains_key(key) {
            return Err(CompileError::FeatureNotLoaded(key.clone()));
        }
    }

    let mut g = Graph::new(c.primary.clone());
    for (i, &(start, end)) in c.region_anchors.iter().enumerate() {
        g.regions.push(Region {
            id: c.region_id(i as u32).to_owned(),
            start,
            end,
        });
    }
    for i in 0..c.node_count() as u32 {
        g.nodes.push(NodeRecord {
            id: c.node_id(i).to_owned(),
            regions: c
                .node_regions
                .row(i)
                .iter()
                .map(|&r| c.region_id(r).to_owned())
                .collect(),
        });
    }
    for (i, &(from, to)) in c.edge_endpoints.iter().enumerate() {
        g.edges.push(EdgeRecord {
            id: c.edge_id(i as u32).to_owned(),
            from: c.node_id(from).to_owned(),
            to: c.node_id(to).to_owned(),
        });
    }
    let mut next_anno = 0usize;
    for (key, table) in &c.features {
        for &(target, sym) in &table.entries {
            let target = match table.kind {
                TargetKind::Node => AnnoTarget::Node(c.node_id(target).to_owned()),
                TargetKind::Edge => AnnoTarget::Edge(c.edge_id(target).to_owned()),
            };
            g.annotations.push(Annotation {
                id: format!("a{next_anno}"),
                space: key.space.clone(),
                label: key.label.clone(),
                target,
                features: vec![(key.name.clone(), c.strings.get(sym).to_owned())],
            });
            next_anno += 1;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_graph_sized, toy_graph};
    use crate::model::graph_eq;

    #[test]
    fn toy_compiles_with_expected_counts() {
        let c = compile(&toy_graph()).unwrap();
        assert_eq!(c.node_count(), 5);
        assert_eq!(c.edge_count(), 4);
        assert_eq!(c.region_count(), 3);
        assert_eq!(c.total_feature_tuples, 9);
        let pos = FeatureKey::new("toy", "word", "pos");
        assert_eq!(c.features[&pos].len(), 3);
        assert_eq!(c.features[&pos].kind, TargetKind::Node);
    }

    #[test]
    fn toy_default_order() {
        let c = compile(&toy_graph()).unwrap();
        let ids: Vec<&str> = c.order.iter().map(|&n| c.node_id(n)).collect();
        assert_eq!(ids, ["n5", "n1", "n4", "n2", "n3"]);
    }

    #[test]
    fn empty_graph_compiles_to_zero_counts() {
        let c = compile(&Graph::default()).unwrap();
        assert_eq!(c.node_count(), 0);
        assert_eq!(c.edge_count(), 0);
        assert_eq!(c.region_count(), 0);
        assert_eq!(c.total_feature_tuples, 0);
        assert!(c.features.is_empty());
    }

    #[test]
    fn invalid_graph_is_rejected_with_violations() {
        let mut g = toy_graph();
        g.regions.push(crate::fixtures::region("r9", 0, 99));
        match compile(&g) {
            Err(CompileError::InvalidGraph { violations }) => {
                assert_eq!(violations.len(), 1);
                assert!(violations[0].contains("r9"));
            }
            other => panic!("expected InvalidGraph, got {other:?}"),
        }
    }

    #[test]
    fn decompile_round_trips_toy() {
        let g = toy_graph();
        let back = decompile(&compile(&g).unwrap()).unwrap();
        assert!(graph_eq(&g, &back));
        assert!(validate(&back).is_empty());
    }

    #[test]
    fn decompile_round_trips_random_graphs() {
        for seed in 0..25 {
            let g = random_graph_sized(seed, 120, 600);
            let back = decompile(&compile(&g).unwrap()).unwrap();
            assert!(graph_eq(&g, &back), "seed {seed}");
        }
    }

    #[test]
    fn compile_is_deterministic() {
        let g = random_graph_sized(7, 100, 500);
        assert_eq!(compile(&g).unwrap(), compile(&g).unwrap());
    }

    #[test]
    fn coverage_merges_and_covers_checks_containment() {
        let c = compile(&toy_graph()).unwrap();
        let n4 = c.node_index("n4").unwrap();
        let n5 = c.node_index("n5").unwrap();
        let n2 = c.node_index("n2").unwrap();
        // The separating spaces are not covered by any region.
        assert_eq!(c.coverage(n4), vec![(4, 7), (8, 11)]);
        assert_eq!(c.coverage(n5), vec![(0, 3), (4, 7), (8, 11)]);
        assert!(covers(&c.coverage(n5), &c.coverage(n4)));
        assert!(covers(&c.coverage(n4), &c.coverage(n2)));
        assert!(!covers(&c.coverage(n4), &c.coverage(n5)));
        assert!(covers(&c.coverage(n2), &[]));
    }

    #[test]
    fn text_slice_respects_char_offsets() {
        let mut g = Graph::new(PrimaryData::new("héllo 中文"));
        g.regions.push(crate::fixtures::region("r0", 0, 5));
        g.regions.push(crate::fixtures::region("r1", 6, 8));
        g.nodes.push(crate::fixtures::node("n0", &["r0", "r1"]));
        let c = compile(&g).unwrap();
        assert_eq!(c.text_slice(0, 5), "héllo");
        assert_eq!(c.text_slice(6, 8), "中文");
    }
}
