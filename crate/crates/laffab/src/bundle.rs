//! The on-disk bundle: a directory with a line-oriented `manifest` and
//! one binary file per section. Integers are fixed-width little-endian
//! u32; each section carries an FNV-1a 64 checksum in the manifest.
//!
//! Structure sections (`primary`, `strings`, `anchors`, `node_regions`,
//! `edges`, `order`, `ids.*`) are always loaded; `feat.*` sections load
//! on request, which is what makes feature selection cheap.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::{CompiledCorpus, Csr, FeatureTable, StringTable, TargetKind};
use crate::model::{FeatureKey, PrimaryData};

pub const FORMAT_VERSION: &str = "laffab-bundle v1";
pub const CHECKSUM_ALGORITHM: &str = "fnv1a64";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("unsupported bundle version \"{found}\"; this build reads \"{}\"", FORMAT_VERSION)]
    VersionMismatch { found: String },
    #[error("checksum mismatch in section {section}")]
    ChecksumMismatch { section: String },
    #[error("unknown feature key {0}")]
    UnknownFeatureKey(FeatureKey),
    #[error(
        "feature key {0} cannot be bundled: space, label and name must match [A-Za-z0-9_-]+"
    )]
    UnsupportedKeyName(FeatureKey),
    #[error("section {section} is malformed: {detail}")]
    MalformedSection { section: String, detail: String },
}

/// FNV-1a, 64-bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Which feature tables to materialize at load time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSelection {
    All,
    Keys(BTreeSet<FeatureKey>),
}

impl FeatureSelection {
    pub fn keys<I: IntoIterator<Item = FeatureKey>>(keys: I) -> Self {
        FeatureSelection::Keys(keys.into_iter().collect())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BundleError + '_ {
    move |source| BundleError::Io {
        path: path.to_owned(),
        source,
    }
}

fn key_component_ok(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn feature_section_name(key: &FeatureKey) -> String {
    format!("feat.{}.{}.{}", key.space, key.label, key.name)
}

fn parse_feature_section_name(name: &str) -> Option<FeatureKey> {
    let mut parts = name.split('.');
    if parts.next() != Some("feat") {
        return None;
    }
    let (space, label, fname) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some()
        || !key_component_ok(space)
        || !key_component_ok(label)
        || !key_component_ok(fname)
    {
        return None;
    }
    Some(FeatureKey::new(space, label, fname))
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_pairs(buf: &mut Vec<u8>, pairs: &[(u32, u32)]) {
    for &(a, b) in pairs {
        push_u32(buf, a);
        push_u32(buf, b);
    }
}

/// Sequential little-endian u32 reader over a section's bytes.
struct SectionReader<'a> {
    name: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> SectionReader<'a> {
    fn new(name: &'a str, bytes: &'a [u8]) -> Self {
        SectionReader {
            name,
            bytes,
            pos: 0,
        }
    }

    fn error(&self, detail: impl Into<String>) -> BundleError {
        BundleError::MalformedSection {
            section: self.name.to_owned(),
            detail: detail.into(),
        }
    }

    fn u32(&mut self) -> Result<u32, BundleError> {
        let end = self.pos + 4;
        if end > self.bytes.len() {
            return Err(self.error("unexpected end of section"));
        }
        let v = u32::from_le_bytes(self.bytes[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }

    fn usize_count(&mut self, what: &str, limit: usize) -> Result<usize, BundleError> {
        let v = self.u32()? as usize;
        if v > limit {
            return Err(self.error(format!("{what} count {v} exceeds plausible bound {limit}")));
        }
        Ok(v)
    }

    fn str_bytes(&mut self, len: usize) -> Result<&'a str, BundleError> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(self.error("unexpected end of section"));
        }
        let s = std::str::from_utf8(&self.bytes[self.pos..end])
            .map_err(|_| self.error("invalid UTF-8"))?;
        self.pos = end;
        Ok(s)
    }

    fn finish(&self) -> Result<(), BundleError> {
        if self.pos != self.bytes.len() {
            return Err(self.error(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn encode_strings(t: &StringTable) -> Vec<u8> {
    let mut buf = Vec::new();
    push_u32(&mut buf, t.len() as u32);
    for s in t.iter() {
        push_u32(&mut buf, s.len() as u32);
        buf.extend_from_slice(s.as_bytes());
    }
    buf
}

fn encode_u32s(values: impl IntoIterator<Item = u32>) -> Vec<u8> {
    let mut buf = Vec::new();
    for v in values {
        push_u32(&mut buf, v);
    }
    buf
}

fn encode_feature(table: &FeatureTable) -> Vec<u8> {
    let mut buf = Vec::new();
    push_u32(
        &mut buf,
        match table.kind {
            TargetKind::Node => 0,
            TargetKind::Edge => 1,
        },
    );
    push_u32(&mut buf, table.entries.len() as u32);
    push_pairs(&mut buf, &table.entries);
    buf
}

/// The section list in manifest (and directory) order.
fn sections_of(c: &CompiledCorpus) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    out.push(("primary".to_owned(), c.primary.text.as_bytes().to_vec()));
    out.push(("strings".to_owned(), encode_strings(&c.strings)));
    out.push((
        "anchors".to_owned(),
        encode_u32s(c.region_anchors.iter().flat_map(|&(s, e)| [s, e])),
    ));
    let mut node_regions = encode_u32s(c.node_regions.offsets.iter().copied());
    node_regions.extend(encode_u32s(c.node_regions.items.iter().copied()));
    out.push(("node_regions".to_owned(), node_regions));
    out.push((
        "edges".to_owned(),
        encode_u32s(c.edge_endpoints.iter().flat_map(|&(f, t)| [f, t])),
    ));
    out.push(("order".to_owned(), encode_u32s(c.order.iter().copied())));
    out.push(("ids.region".to_owned(), encode_u32s(c.region_ids.iter().copied())));
    out.push(("ids.node".to_owned(), encode_u32s(c.node_ids.iter().copied())));
    out.push(("ids.edge".to_owned(), encode_u32s(c.edge_ids.iter().copied())));
    for (key, table) in &c.features {
        out.push((feature_section_name(key), encode_feature(table)));
    }
    out
}

/// Writes the corpus as a bundle directory and returns the manifest
/// path. Serialization is deterministic: saving the same corpus twice
/// produces byte-identical bundles.
pub fn save(c: &CompiledCorpus, dir: &Path) -> Result<PathBuf, BundleError> {
    for key in c.features.keys() {
        if !key_component_ok(&key.space)
            || !key_component_ok(&key.label)
            || !key_component_ok(&key.name)
        {
            return Err(BundleError::UnsupportedKeyName(key.clone()));
        }
    }
    if c.features.len() != c.known_keys.len() {
        // A partially loaded corpus would silently drop the unloaded
        // columns; refuse rather than write a lossy bundle.
        let missing = c
            .known_keys
            .iter()
            .find(|k| !c.features.contains_key(k))
            .expect("known/loaded mismatch");
        return Err(BundleError::UnknownFeatureKey(missing.clone()));
    }

    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut manifest = String::new();
    manifest.push_str(FORMAT_VERSION);
    manifest.push('\n');
    manifest.push_str(&format!("checksum {CHECKSUM_ALGORITHM}\n"));
    manifest.push_str(&format!("nodes {}\n", c.node_count()));
    manifest.push_str(&format!("edges {}\n", c.edge_count()));
    manifest.push_str(&format!("regions {}\n", c.region_count()));
    manifest.push_str(&format!("features {}\n", c.total_feature_tuples));

    for (name, bytes) in sections_of(c) {
        let path = dir.join(&name);
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        f.write_all(&bytes).map_err(io_err(&path))?;
        manifest.push_str(&format!(
            "section {} bytes {} checksum {:016x}\n",
            name,
            bytes.len(),
            fnv1a64(&bytes)
        ));
    }

    let manifest_path = dir.join("manifest");
    fs::write(&manifest_path, manifest.as_bytes()).map_err(io_err(&manifest_path))?;
    Ok(manifest_path)
}

/// Parsed manifest: counts plus the section list in file order.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub nodes: usize,
    pub edges: usize,
    pub regions: usize,
    pub features: usize,
    /// section name → (byte length, checksum), in declaration order.
    pub sections: Vec<(String, u64, u64)>,
}

impl Manifest {
    pub fn feature_keys(&self) -> impl Iterator<Item = FeatureKey> + '_ {
        self.sections
            .iter()
            .filter_map(|(name, _, _)| parse_feature_section_name(name))
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, BundleError> {
    let path = dir.join("manifest");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut lines = text.lines();

    let version = lines
        .next()
        .ok_or_else(|| BundleError::MalformedManifest("empty manifest".into()))?;
    if version != FORMAT_VERSION {
        return Err(BundleError::VersionMismatch {
            found: version.to_owned(),
        });
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut sections = Vec::new();
    let mut checksum_alg = None;
    for line in lines {
        let fields: Vec<&str> = line.split(' ').collect();
        match fields.as_slice() {
            ["checksum", alg] => checksum_alg = Some(alg.to_string()),
            [kind @ ("nodes" | "edges" | "regions" | "features"), n] => {
                let n: usize = n.parse().map_err(|_| {
                    BundleError::MalformedManifest(format!("bad count line: {line}"))
                })?;
                counts.insert(kind, n);
            }
            ["section", name, "bytes", n, "checksum", hex] => {
                let bytes: u64 = n.parse().map_err(|_| {
                    BundleError::MalformedManifest(format!("bad section line: {line}"))
                })?;
                let checksum = u64::from_str_radix(hex, 16).map_err(|_| {
                    BundleError::MalformedManifest(format!("bad checksum in: {line}"))
                })?;
                sections.push((name.to_string(), bytes, checksum));
            }
            [] | [""] => {}
            _ => {
                return Err(BundleError::MalformedManifest(format!(
                    "unrecognized line: {line}"
                )))
            }
        }
    }

    match checksum_alg.as_deref() {
        Some(CHECKSUM_ALGORITHM) => {}
        Some(other) => {
            return Err(BundleError::MalformedManifest(format!(
                "unsupported checksum algorithm {other}"
            )))
        }
        None => {
            return Err(BundleError::MalformedManifest(
                "missing checksum algorithm line".into(),
            ))
        }
    }

    let count = |kind: &str| -> Result<usize, BundleError> {
        counts
            .get(kind)
            .copied()
            .ok_or_else(|| BundleError::MalformedManifest(format!("missing {kind} count")))
    };
    Ok(Manifest {
        nodes: count("nodes")?,
        edges: count("edges")?,
        regions: count("regions")?,
        features: count("features")?,
        sections,
    })
}

struct SectionIndex<'a> {
    dir: &'a Path,
    by_name: BTreeMap<&'a str, (u64, u64)>,
}

impl<'a> SectionIndex<'a> {
    fn read(&self, name: &str) -> Result<Vec<u8>, BundleError> {
        let &(expect_len, expect_sum) = self.by_name.get(name).ok_or_else(|| {
            BundleError::MalformedManifest(format!("manifest lists no section {name}"))
        })?;
        let path = self.dir.join(name);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        if bytes.len() as u64 != expect_len || fnv1a64(&bytes) != expect_sum {
            return Err(BundleError::ChecksumMismatch {
                section: name.to_owned(),
            });
        }
        Ok(bytes)
    }
}

fn decode_strings(bytes: &[u8]) -> Result<StringTable, BundleError> {
    let mut r = SectionReader::new("strings", bytes);
    let count = r.usize_count("string", bytes.len() / 4 + 1)?;
    let mut symbols = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32()? as usize;
        symbols.push(r.str_bytes(len)?.to_owned());
    }
    r.finish()?;
    Ok(StringTable::from_symbols(symbols))
}

fn decode_pairs(name: &str, bytes: &[u8], expect: usize) -> Result<Vec<(u32, u32)>, BundleError> {
    let mut r = SectionReader::new(name, bytes);
    let mut out = Vec::with_capacity(expect);
    for _ in 0..expect {
        out.push((r.u32()?, r.u32()?));
    }
    r.finish()?;
    Ok(out)
}

fn decode_u32s(name: &str, bytes: &[u8], expect: usize) -> Result<Vec<u32>, BundleError> {
    let mut r = SectionReader::new(name, bytes);
    let mut out = Vec::with_capacity(expect);
    for _ in 0..expect {
        out.push(r.u32()?);
    }
    r.finish()?;
    Ok(out)
}

fn decode_csr(name: &str, bytes: &[u8], rows: usize) -> Result<Csr<u32>, BundleError> {
    let mut r = SectionReader::new(name, bytes);
    let mut offsets = Vec::with_capacity(rows + 1);
    for _ in 0..=rows {
        offsets.push(r.u32()?);
    }
    for window in offsets.windows(2) {
        if window[0] > window[1] {
            return Err(r.error("offsets are not monotone"));
        }
    }
    if offsets.first() != Some(&0) {
        return Err(r.error("offsets must start at 0"));
    }
    let n_items = *offsets.last().unwrap() as usize;
    let mut items = Vec::with_capacity(n_items);
    for _ in 0..n_items {
        items.push(r.u32()?);
    }
    r.finish()?;
    Ok(Csr { offsets, items })
}

fn decode_feature(name: &str, bytes: &[u8]) -> Result<FeatureTable, BundleError> {
    let mut r = SectionReader::new(name, bytes);
    let kind = match r.u32()? {
        0 => TargetKind::Node,
        1 => TargetKind::Edge,
        other => return Err(r.error(format!("unknown target kind {other}"))),
    };
    let count = r.usize_count("entry", bytes.len() / 8 + 1)?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        entries.push((r.u32()?, r.u32()?));
    }
    r.finish()?;
    for window in entries.windows(2) {
        if window[0].0 >= window[1].0 {
            return Err(r.error("entries are not strictly ascending by target"));
        }
    }
    Ok(FeatureTable { kind, entries })
}

/// Loads a bundle. Structure sections always load; feature sections
/// load per `sel`. Every section actually read is checksum-verified.
pub fn load(dir: &Path, sel: &FeatureSelection) -> Result<CompiledCorpus, BundleError> {
    let manifest = read_manifest(dir)?;
    let index = SectionIndex {
        dir,
        by_name: manifest
            .sections
            .iter()
            .map(|(n, b, c)| (n.as_str(), (*b, *c)))
            .collect(),
    };

    let known_keys: BTreeSet<FeatureKey> = manifest.feature_keys().collect();
    let selected: Vec<FeatureKey> = match sel {
        FeatureSelection::All => known_keys.iter().cloned().collect(),
        FeatureSelection::Keys(keys) => {
            for k in keys {
                if !known_keys.contains(k) {
                    return Err(BundleError::UnknownFeatureKey(k.clone()));
                }
            }
            keys.iter().cloned().collect()
        }
    };

    let primary_bytes = index.read("primary")?;
    let text = String::from_utf8(primary_bytes).map_err(|_| BundleError::MalformedSection {
        section: "primary".into(),
        detail: "invalid UTF-8".into(),
    })?;
    let primary = PrimaryData::new(text);

    let strings = decode_strings(&index.read("strings")?)?;
    let region_anchors = decode_pairs("anchors", &index.read("anchors")?, manifest.regions)?;
    let node_regions = decode_csr("node_regions", &index.read("node_regions")?, manifest.nodes)?;
    let edge_endpoints = decode_pairs("edges", &index.read("edges")?, manifest.edges)?;
    let order = decode_u32s("order", &index.read("order")?, manifest.nodes)?;
    let region_ids = decode_u32s("ids.region", &index.read("ids.region")?, manifest.regions)?;
    let node_ids = decode_u32s("ids.node", &index.read("ids.node")?, manifest.nodes)?;
    let edge_ids = decode_u32s("ids.edge", &index.read("ids.edge")?, manifest.edges)?;

    let bound = |name: &str, values: &[u32], limit: usize| -> Result<(), BundleError> {
        match values.iter().find(|&&v| v as usize >= limit) {
            Some(v) => Err(BundleError::MalformedSection {
                section: name.to_owned(),
                detail: format!("index {v} out of range (< {limit})"),
            }),
            None => Ok(()),
        }
    };
    bound("node_regions", &node_regions.items, manifest.regions)?;
    bound("order", &order, manifest.nodes)?;
    for (name, ids) in [
        ("ids.region", &region_ids),
        ("ids.node", &node_ids),
        ("ids.edge", &edge_ids),
    ] {
        bound(name, ids, strings.len())?;
    }
    for (name, pairs, limit) in [("edges", &edge_endpoints, manifest.nodes)] {
        for &(a, b) in pairs.iter() {
            if a as usize >= limit || b as usize >= limit {
                return Err(BundleError::MalformedSection {
                    section: name.to_owned(),
                    detail: "node index out of range".into(),
                });
            }
        }
    }
    {
        let mut seen = vec![false; manifest.nodes];
        for &n in &order {
            if std::mem::replace(&mut seen[n as usize], true) {
                return Err(BundleError::MalformedSection {
                    section: "order".into(),
                    detail: "not a permutation".into(),
                });
            }
        }
    }

    let mut features = BTreeMap::new();
    for key in selected {
        let name = feature_section_name(&key);
        let table = decode_feature(&name, &index.read(&name)?)?;
        let limit = match table.kind {
            TargetKind::Node => manifest.nodes,
            TargetKind::Edge => manifest.edges,
        };
        for &(target, sym) in &table.entries {
            if target as usize >= limit || sym as usize >= strings.len() {
                return Err(BundleError::MalformedSection {
                    section: name.clone(),
                    detail: "index out of range".into(),
                });
            }
        }
        features.insert(key, table);
    }

    Ok(CompiledCorpus::assemble(
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
        manifest.features,
    ))
}
