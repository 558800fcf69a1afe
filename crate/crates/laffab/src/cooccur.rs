//! Presence/absence cooccurrence of items across documents.
//!
//! Documents are the distinct values of a document feature (in walk
//! order), each spanning the merged coverage of the nodes carrying the
//! value. An item is present in a document when some node annotated
//! with the item feature lies inside the document's coverage. The
//! matrix exports as a CSV spreadsheet, and the document-similarity
//! view (shared-item counts) exports as an undirected weighted GEXF
//! graph ready for external layout tools.

use crate::corpus::{covers, CompiledCorpus};
use crate::fabric::FabricError;
use crate::freq::documents;
use crate::model::FeatureKey;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A boolean item × document presence matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    /// Item labels, ascending.
    pub items: Vec<String>,
    /// Document labels, in corpus walk order.
    pub docs: Vec<String>,
    /// `presence[item][doc]`.
    pub presence: Vec<Vec<bool>>,
}

/// Scan the corpus for the presence of each `item_feature` value in
/// each document defined by `doc_feature`.
///
/// Document nodes sharing a value merge into one document whose item
/// set is the union. Items occurring outside every document do not
/// appear in the matrix.
pub fn compute_cooccurrence(
    c: &CompiledCorpus,
    item_feature: &FeatureKey,
    doc_feature: &FeatureKey,
) -> Result<CooccurrenceMatrix, FabricError> {
    let (docs, spans) = documents(c, doc_feature)?;
    let mut observed: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for &node in c.walk() {
        let Some(value) = c.node_feature(item_feature, node)? else {
            continue;
        };
        let cov = c.coverage(node);
        if cov.is_empty() {
            continue;
        }
        for (d, span) in spans.iter().enumerate() {
            if covers(span, &cov) {
                observed
                    .entry(value.to_string())
                    .or_insert_with(|| vec![false; docs.len()])[d] = true;
            }
        }
    }
    let mut items = Vec::with_capacity(observed.len());
    let mut presence = Vec::with_capacity(observed.len());
    for (item, row) in observed {
        items.push(item);
        presence.push(row);
    }
    Ok(CooccurrenceMatrix {
        items,
        docs,
        presence,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn xml_attr(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl CooccurrenceMatrix {
    /// Number of items present in both documents.
    pub fn shared(&self, d1: usize, d2: usize) -> usize {
        self.presence
            .iter()
            .filter(|row| row[d1] && row[d2])
            .count()
    }

    /// CSV rendering: rows are items, columns are documents, cells are
    /// 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item");
        for d in &self.docs {
            out.push(',');
            out.push_str(&csv_field(d));
        }
        out.push('\n');
        for (i, item) in self.items.iter().enumerate() {
            out.push_str(&csv_field(item));
            for present in &self.presence[i] {
                out.push(',');
                out.push(if *present { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// GEXF 1.2 rendering: an undirected graph over the documents with
    /// one weighted edge per document pair that shares at least one
    /// item. Self-edges and zero-weight edges are omitted; layout is
    /// left to downstream tools.
    pub fn to_gexf(&self) -> String {
        let mut out = String::from(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n\
             \x20 <graph defaultedgetype=\"undirected\">\n\
             \x20   <nodes>\n",
        );
        for (d, label) in self.docs.iter().enumerate() {
            let _ = writeln!(
                out,
                "      <node id=\"{d}\" label=\"{}\"/>",
                xml_attr(label)
            );
        }
        out.push_str("    </nodes>\n    <edges>\n");
        let mut edge_id = 0usize;
        for d1 in 0..self.docs.len() {
            for d2 in d1 + 1..self.docs.len() {
                let weight = self.shared(d1, d2);
                if weight == 0 {
                    continue;
                }
                let _ = writeln!(
                    out,
                    "      <edge id=\"{edge_id}\" source=\"{d1}\" target=\"{d2}\" weight=\"{weight}\"/>"
                );
                edge_id += 1;
            }
        }
        out.push_str("    </edges>\n  </graph>\n</gexf>\n");
        out
    }
}
