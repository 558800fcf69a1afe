//! In-memory domain types for a stand-off annotation graph.
//!
//! The model is the LAF picture: an immutable primary text with
//! character-addressed regions, nodes linked to regions, directed edges
//! between nodes, and annotations carrying flat key-value feature
//! structures that target either a node or an edge.

use std::collections::{HashMap, HashSet};
use std::fmt;

/// The immutable primary text a resource annotates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryData {
    pub text: String,
    /// Character (not byte) count of `text`.
    pub length: usize,
}

impl PrimaryData {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let length = text.chars().count();
        PrimaryData { text, length }
    }
}

/// A span of primary text addressed by character offsets; `start` is
/// inclusive, `end` exclusive, `start == end` an empty region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub id: String,
    pub start: u32,
    pub end: u32,
}

/// An annotation-graph vertex, linked to zero or more regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    /// Region ids in declaration order; duplicates are invalid.
    pub regions: Vec<String>,
}

/// A directed link between two nodes. Self-loops are legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// Addresses one feature column: annotation space, annotation label,
/// feature name. Written `space:label.name` in text form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureKey {
    pub space: String,
    pub label: String,
    pub name: String,
}

impl FeatureKey {
    pub fn new(
        space: impl Into<String>,
        label: impl Into<String>,
        name: impl Into<String>,
    ) -> Self {
        FeatureKey {
            space: space.into(),
            label: label.into(),
            name: name.into(),
        }
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}.{}", self.space, self.label, self.name)
    }
}

/// What an annotation is attached to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnoTarget {
    Node(String),
    Edge(String),
}

impl AnnoTarget {
    pub fn id(&self) -> &str {
        match self {
            AnnoTarget::Node(id) | AnnoTarget::Edge(id) => id,
        }
    }
}

/// A labelled annotation in some space, targeting one node or edge and
/// carrying a flat feature structure (no nesting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub id: String,
    pub space: String,
    pub label: String,
    pub target: AnnoTarget,
    /// Feature name/value pairs in declaration order; names must be unique.
    pub features: Vec<(String, String)>,
}

impl Annotation {
    pub fn feature(&self, name: &str) -> Option<&str> {
        self.features
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }
}

/// Anything stored under a string id.
pub trait Identified {
    fn id(&self) -> &str;
}

impl Identified for Region {
    fn id(&self) -> &str {
        &self.id
    }
}
impl Identified for NodeRecord {
    fn id(&self) -> &str {
        &self.id
    }
}
impl Identified for EdgeRecord {
    fn id(&self) -> &str {
        &self.id
    }
}
impl Identified for Annotation {
    fn id(&self) -> &str {
        &self.id
    }
}

/// Insertion-ordered collection indexable by id. Duplicate ids may be
/// pushed (so that `validate` can report them); lookups resolve to the
/// first occurrence.
#[derive(Debug, Clone)]
pub struct IdStore<T: Identified> {
    items: Vec<T>,
    index: HashMap<String, usize>,
}

impl<T: Identified> Default for IdStore<T> {
    fn default() -> Self {
        IdStore {
            items: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl<T: Identified> IdStore<T> {
    pub fn push(&mut self, item: T) {
        let pos = self.items.len();
        self.index.entry(item.id().to_owned()).or_insert(pos);
        self.items.push(item);
    }

    pub fn get(&self, id: &str) -> Option<&T> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.items.iter()
    }

    /// Mutable iteration. Items' ids must not be changed through this:
    /// the id index is built at push time.
    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, T> {
        self.items.iter_mut()
    }
}

impl<T: Identified + PartialEq> PartialEq for IdStore<T> {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}
impl<T: Identified + Eq> Eq for IdStore<T> {}

impl<'a, T: Identified> IntoIterator for &'a IdStore<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;
    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// The parsed annotation graph: primary data plus all stand-off
/// collections, each iterable in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    pub primary: PrimaryData,
    pub regions: IdStore<Region>,
    pub nodes: IdStore<NodeRecord>,
    pub edges: IdStore<EdgeRecord>,
    pub annotations: IdStore<Annotation>,
}

impl Default for PrimaryData {
    fn default() -> Self {
        PrimaryData::new("")
    }
}

impl Graph {
    pub fn new(primary: PrimaryData) -> Self {
        Graph {
            primary,
            ..Graph::default()
        }
    }

    /// Count of (space, label, name, target, value) feature tuples.
    pub fn feature_tuple_count(&self) -> usize {
        self.annotations.iter().map(|a| a.features.len()).sum()
    }
}

/// Checks every model invariant and returns one description per
/// violation. The empty list means the graph is valid. Pure: the same
/// graph always yields the same list, in the same order.
pub fn validate(g: &Graph) -> Vec<String> {
    let mut out = Vec::new();

    if g.primary.length != g.primary.text.chars().count() {
        out.push(format!(
            "primary length {} does not match text character count {}",
            g.primary.length,
            g.primary.text.chars().count()
        ));
    }

    let mut seen = HashSet::new();
    for r in &g.regions {
        if !seen.insert(r.id.as_str()) {
            out.push(format!("duplicate region id {}", r.id));
        }
        if r.start > r.end {
            out.push(format!(
                "region {} start {} exceeds end {}",
                r.id, r.start, r.end
            ));
        }
        if r.end as usize > g.primary.length {
            out.push(format!(
                "region {} anchor {} exceeds primary length {}",
                r.id, r.end, g.primary.length
            ));
        }
    }

    let mut seen = HashSet::new();
    for n in &g.nodes {
        if !seen.insert(n.id.as_str()) {
            out.push(format!("duplicate node id {}", n.id));
        }
        let mut linked = HashSet::new();
        for rid in &n.regions {
            if !g.regions.contains(rid) {
                out.push(format!("node {} links unknown region {}", n.id, rid));
            }
            if !linked.insert(rid.as_str()) {
                out.push(format!("node {} links region {} more than once", n.id, rid));
            }
        }
    }

    let mut seen = HashSet::new();
    for e in &g.edges {
        if !seen.insert(e.id.as_str()) {
            out.push(format!("duplicate edge id {}", e.id));
        }
        for endpoint in [&e.from, &e.to] {
            if !g.nodes.contains(endpoint) {
                out.push(format!("edge {} references unknown node {}", e.id, endpoint));
            }
        }
    }

    let mut seen = HashSet::new();
    // A feature key may be assigned to a target only once; flat feature
    // structures are maps from key to value per target. A key also has a
    // single target kind, since it compiles to one column.
    let mut assignments = HashSet::new();
    let mut key_kinds: HashMap<FeatureKey, bool> = HashMap::new();
    for a in &g.annotations {
        if !seen.insert(a.id.as_str()) {
            out.push(format!("duplicate annotation id {}", a.id));
        }
        match &a.target {
            AnnoTarget::Node(id) if !g.nodes.contains(id) => {
                out.push(format!("annotation {} targets unknown node {}", a.id, id));
            }
            AnnoTarget::Edge(id) if !g.edges.contains(id) => {
                out.push(format!("annotation {} targets unknown edge {}", a.id, id));
            }
            _ => {}
        }
        if a.space.is_empty() {
            out.push(format!("annotation {} has empty annotation space", a.id));
        }
        if a.label.is_empty() {
            out.push(format!("annotation {} has empty label", a.id));
        }
        let mut names = HashSet::new();
        for (name, _) in &a.features {
            if name.is_empty() {
                out.push(format!("annotation {} has a feature with empty name", a.id));
            }
            if !names.insert(name.as_str()) {
                out.push(format!("annotation {} repeats feature {}", a.id, name));
                continue;
            }
            let key = FeatureKey::new(&a.space, &a.label, name);
            let is_node = matches!(a.target, AnnoTarget::Node(_));
            if !assignments.insert((key.clone(), is_node, a.target.id().to_owned())) {
                out.push(format!(
                    "feature {} assigned to {} more than once",
                    key,
                    a.target.id()
                ));
            }
            match key_kinds.get(&key) {
                Some(&kind) if kind != is_node => {
                    out.push(format!("feature {key} targets both nodes and edges"));
                }
                Some(_) => {}
                None => {
                    key_kinds.insert(key, is_node);
                }
            }
        }
    }

    out
}

/// Flattens a graph's annotation content to sortable tuples of
/// (space, label, name, target-is-node, target id, value).
pub fn feature_tuples(g: &Graph) -> Vec<(String, String, String, bool, String, String)> {
    let mut out = Vec::with_capacity(g.feature_tuple_count());
    for a in &g.annotations {
        let is_node = matches!(a.target, AnnoTarget::Node(_));
        for (name, value) in &a.features {
            out.push((
                a.space.clone(),
                a.label.clone(),
                name.clone(),
                is_node,
                a.target.id().to_owned(),
                value.clone(),
            ));
        }
    }
    out.sort_unstable();
    out
}

/// Content equality between graphs: primary text, region/node/edge
/// declarations in order, and the multiset of feature tuples.
/// Annotation ids and how tuples are grouped into annotations are
/// presentation, not content, and are ignored.
pub fn graph_eq(a: &Graph, b: &Graph) -> bool {
    a.primary == b.primary
        && a.regions == b.regions
        && a.nodes == b.nodes
        && a.edges == b.edges
        && feature_tuples(a) == feature_tuples(b)
}
