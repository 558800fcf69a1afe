//! Grouped frequency tables over feature patterns.
//!
//! A pattern is either the value of a single feature, or a
//! mother⟿daughter value pair read off edges that carry a designated
//! relation feature. Occurrences are grouped by a document-partition
//! feature: every node carrying that feature defines a document
//! stretching over its character coverage, and an occurrence belongs to
//! the document whose coverage contains it.
//!
//! Percentages are computed per group as `100 × count / group total`,
//! rounded half-up to two decimals with integer arithmetic, so rendered
//! tables are reproducible to the digit.

use crate::corpus::{covers, CompiledCorpus};
use crate::fabric::FabricError;
use crate::model::FeatureKey;
use std::collections::HashMap;
use thiserror::Error;

/// A malformed `--pattern` specification.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid pattern spec {spec:?}: {detail}")]
pub struct InvalidPatternSpec {
    pub spec: String,
    pub detail: String,
}

/// What to count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSpec {
    /// Every value of one feature; the value is the pattern.
    Single(FeatureKey),
    /// For every edge whose `relation` feature equals `relation_value`:
    /// the pattern is `mother-value⟿daughter-value`, read from the
    /// edge's source and target nodes.
    EdgePair {
        relation: FeatureKey,
        relation_value: String,
        mother: FeatureKey,
        daughter: FeatureKey,
    },
}

impl PatternSpec {
    /// Parse a command-line pattern spec.
    ///
    /// Two forms: `space:label.name` counts a single feature;
    /// `rel=value,motherkey,daughterkey` (three comma-separated parts,
    /// the first carrying `=value`) counts edge-pair patterns.
    pub fn parse(s: &str) -> Result<PatternSpec, InvalidPatternSpec> {
        let bad = |detail: &str| InvalidPatternSpec {
            spec: s.to_string(),
            detail: detail.to_string(),
        };
        let parts: Vec<&str> = s.split(',').collect();
        match parts.as_slice() {
            [single] => {
                if single.contains('=') {
                    return Err(bad("a single-feature spec cannot carry '=value'"));
                }
                Ok(PatternSpec::Single(parse_key(single).map_err(|d| bad(&d))?))
            }
            [rel, mother, daughter] => {
                let (rel_key, rel_value) = rel
                    .split_once('=')
                    .ok_or_else(|| bad("the relation part must be written key=value"))?;
                Ok(PatternSpec::EdgePair {
                    relation: parse_key(rel_key).map_err(|d| bad(&d))?,
                    relation_value: rel_value.to_string(),
                    mother: parse_key(mother).map_err(|d| bad(&d))?,
                    daughter: parse_key(daughter).map_err(|d| bad(&d))?,
                })
            }
            _ => Err(bad("expected one key or three comma-separated parts")),
        }
    }
}

/// Parse `space:label.name` into a feature key. The space ends at the
/// first `:`; the name starts after the last `.` so labels may contain
/// dots.
pub fn parse_key(s: &str) -> Result<FeatureKey, String> {
    let (space, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("feature key {s:?} is missing the ':' after its space"))?;
    let (label, name) = rest
        .rsplit_once('.')
        .ok_or_else(|| format!("feature key {s:?} is missing the '.' before its name"))?;
    if space.is_empty() || label.is_empty() || name.is_empty() {
        return Err(format!("feature key {s:?} has an empty component"));
    }
    Ok(FeatureKey::new(space, label, name))
}

/// One table row: a pattern with its per-group counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqRow {
    pub pattern: String,
    /// Aligned with [`FreqTable::groups`].
    pub counts: Vec<u64>,
    pub total: u64,
}

/// A grouped frequency table.
///
/// `grand_totals` cover *all* patterns, even when only some rows are
/// listed (see [`FreqTable::top`]), so percentages always measure the
/// share of the whole corpus, not of the listed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqTable {
    pub groups: Vec<String>,
    pub rows: Vec<FreqRow>,
    pub grand_totals: Vec<u64>,
    pub grand_total: u64,
}

/// `100 × count / total` rounded half-up to two decimals, in integer
/// arithmetic. A zero total renders as `0.00` without dividing.
pub fn percent(count: u64, total: u64) -> String {
    if total == 0 {
        return "0.00".to_string();
    }
    let scaled = (count as u128) * 10_000;
    let total = total as u128;
    let mut q = scaled / total;
    let r = scaled % total;
    if 2 * r >= total {
        q += 1;
    }
    format!("{}.{:02}", q / 100, q % 100)
}

impl FreqTable {
    /// The table restricted to its first `n` rows. Grand totals are
    /// unchanged: percentages keep measuring against the full corpus.
    pub fn top(&self, n: usize) -> FreqTable {
        FreqTable {
            groups: self.groups.clone(),
            rows: self.rows.iter().take(n).cloned().collect(),
            grand_totals: self.grand_totals.clone(),
            grand_total: self.grand_total,
        }
    }

    /// Sums of the listed rows per group, plus the overall sum.
    pub fn listed_totals(&self) -> (Vec<u64>, u64) {
        let mut per_group = vec![0u64; self.groups.len()];
        let mut overall = 0u64;
        for row in &self.rows {
            for (g, c) in row.counts.iter().enumerate() {
                per_group[g] += c;
            }
            overall += row.total;
        }
        (per_group, overall)
    }

    /// TSV rendering: a header, one line per row with count and
    /// percentage per group plus overall, and a TOTAL line summing the
    /// listed rows (with percentages recomputed against the grand
    /// totals).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("pattern");
        for g in &self.groups {
            out.push('\t');
            out.push_str(g);
            out.push('\t');
            out.push_str(g);
            out.push('%');
        }
        out.push_str("\ttotal\ttotal%\n");
        for row in &self.rows {
            out.push_str(&row.pattern);
            for (g, &c) in row.counts.iter().enumerate() {
                out.push('\t');
                out.push_str(&c.to_string());
                out.push('\t');
                out.push_str(&percent(c, self.grand_totals[g]));
            }
            out.push('\t');
            out.push_str(&row.total.to_string());
            out.push('\t');
            out.push_str(&percent(row.total, self.grand_total));
            out.push('\n');
        }
        let (listed, listed_overall) = self.listed_totals();
        out.push_str("TOTAL");
        for (g, &c) in listed.iter().enumerate() {
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\t');
            out.push_str(&percent(c, self.grand_totals[g]));
        }
        out.push('\t');
        out.push_str(&listed_overall.to_string());
        out.push('\t');
        out.push_str(&percent(listed_overall, self.grand_total));
        out.push('\n');
        out
    }
}

/// The documents defined by a grouping feature: distinct values in
/// walk order, each with the merged coverage of all nodes carrying it.
pub(crate) fn documents(
    c: &CompiledCorpus,
    group_by: &FeatureKey,
) -> Result<(Vec<String>, Vec<Vec<(u32, u32)>>), FabricError> {
    let mut names: Vec<String> = Vec::new();
    let mut spans: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for &node in c.walk() {
        let Some(value) = c.node_feature(group_by, node)? else {
            continue;
        };
        let i = *index.entry(value.to_string()).or_insert_with(|| {
            names.push(value.to_string());
            spans.push(Vec::new());
            names.len() - 1
        });
        let mut merged = spans[i].clone();
        merged.extend(c.coverage(node));
        merged.sort_unstable();
        // Re-merge touching or overlapping stretches.
        let mut folded: Vec<(u32, u32)> = Vec::new();
        for (s, e) in merged {
            match folded.last_mut() {
                Some((_, pe)) if s <= *pe => *pe = (*pe).max(e),
                _ => folded.push((s, e)),
            }
        }
        spans[i] = folded;
    }
    Ok((names, spans))
}

fn group_of(spans: &[Vec<(u32, u32)>], cov: &[(u32, u32)]) -> Option<usize> {
    if cov.is_empty() {
        return None;
    }
    spans.iter().position(|span| covers(span, cov))
}

/// Count pattern occurrences per document.
///
/// Single-feature patterns occur at the annotated node (or, for an
/// edge feature, at the edge's source node); edge-pair patterns occur
/// at the mother node. Occurrences outside every document are not
/// counted. Rows are sorted by total count descending, then by pattern.
pub fn compute_freq(
    c: &CompiledCorpus,
    spec: &PatternSpec,
    group_by: &FeatureKey,
) -> Result<FreqTable, FabricError> {
    let (groups, spans) = documents(c, group_by)?;
    let mut counts: HashMap<String, Vec<u64>> = HashMap::new();
    let mut grand_totals = vec![0u64; groups.len()];

    let mut record = |pattern: String, node: u32, counts: &mut HashMap<String, Vec<u64>>| {
        if let Some(g) = group_of(&spans, &c.coverage(node)) {
            counts.entry(pattern).or_insert_with(|| vec![0; groups.len()])[g] += 1;
            grand_totals[g] += 1;
        }
    };

    match spec {
        PatternSpec::Single(key) => {
            use crate::corpus::TargetKind;
            let table = c.table(key)?;
            let entries: Vec<(u32, u32)> = table.entries.clone();
            let kind = table.kind;
            for (target, sym) in entries {
                let value = c.strings.get(sym).to_string();
                let node = match kind {
                    TargetKind::Node => target,
                    TargetKind::Edge => c.edge_endpoints[target as usize].0,
                };
                record(value, node, &mut counts);
            }
        }
        PatternSpec::EdgePair {
            relation,
            relation_value,
            mother,
            daughter,
        } => {
            for edge in 0..c.edge_count() as u32 {
                if c.edge_feature(relation, edge)? != Some(relation_value.as_str()) {
                    continue;
                }
                let (from, to) = c.edge_endpoints[edge as usize];
                let (Some(m), Some(d)) = (
                    c.node_feature(mother, from)?,
                    c.node_feature(daughter, to)?,
                ) else {
                    continue;
                };
                record(format!("{m}\u{27ff}{d}"), from, &mut counts);
            }
        }
    }

    let mut rows: Vec<FreqRow> = counts
        .into_iter()
        .map(|(pattern, counts)| {
            let total = counts.iter().sum();
            FreqRow {
                pattern,
                counts,
                total,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.pattern.cmp(&b.pattern)));
    let grand_total = grand_totals.iter().sum();
    Ok(FreqTable {
        groups,
        rows,
        grand_totals,
        grand_total,
    })
}
