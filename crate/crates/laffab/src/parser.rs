//! GrAF-style resource reading. A resource header names the primary
//! data file and an ordered list of annotation XML files; annotation
//! files use a small fixed vocabulary under a `<graph>` root:
//!
//! ```xml
//! <region xml:id="r0" anchors="0 3"/>
//! <node xml:id="n1"><link targets="r0"/></node>
//! <edge xml:id="e1" from="n5" to="n4"/>
//! <a xml:id="a1" label="word" ref="n1" as="toy">
//!   <fs><f name="pos" value="dt"/></fs>
//! </a>
//! ```
//!
//! Reading is event-streamed (no DOM), deterministic, and strict:
//! unknown attributes are ignored, unknown elements are ignored outside
//! feature structures and rejected inside them, ids are unique across
//! all files, and later files may reference earlier declarations but
//! never redeclare them.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::model::{
    validate, AnnoTarget, Annotation, EdgeRecord, Graph, NodeRecord, PrimaryData, Region,
};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: malformed XML: {detail}")]
    MalformedXml {
        path: PathBuf,
        line: u64,
        column: u64,
        detail: String,
    },
    #[error("header {path} declares no primary data file")]
    MissingPrimaryData { path: PathBuf },
    #[error("header {path} declares no annotation files")]
    MissingAnnotationFiles { path: PathBuf },
    #[error("duplicate xml:id {id} in {path}")]
    DuplicateId { id: String, path: PathBuf },
    #[error("{owner} references {referenced}, which is not declared with the required kind")]
    DanglingReference { owner: String, referenced: String },
    #[error("annotation {annotation} nests a feature structure inside a feature")]
    NestedFeatureStructure { annotation: String },
    #[error("region {region} anchor {anchor} exceeds primary length {length}")]
    AnchorOutOfBounds {
        region: String,
        anchor: u32,
        length: usize,
    },
    #[error("resource is inconsistent: {}", .violations.join("; "))]
    InvalidResource { violations: Vec<String> },
}

/// A parsed resource header: where the primary data lives, which
/// annotation files to read (in order), and the declared annotation
/// spaces. All paths resolve relative to the header's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceHeader {
    pub dir: PathBuf,
    pub primary_data_path: String,
    pub annotation_files: Vec<String>,
    pub annotation_spaces: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ParseError + '_ {
    move |source| ParseError::Io {
        path: path.to_owned(),
        source,
    }
}

/// 1-based line/column of a byte offset, recovered by re-reading the
/// file; only runs on the error path.
fn line_col(path: &Path, byte_offset: u64) -> (u64, u64) {
    match fs::read(path) {
        Ok(bytes) => {
            let upto = &bytes[..(byte_offset as usize).min(bytes.len())];
            let line = upto.iter().filter(|&&b| b == b'\n').count() as u64 + 1;
            let column = upto.iter().rev().take_while(|&&b| b != b'\n').count() as u64 + 1;
            (line, column)
        }
        Err(_) => (0, 0),
    }
}

struct FileReader {
    path: PathBuf,
    reader: Reader<std::io::BufReader<fs::File>>,
    buf: Vec<u8>,
}

impl FileReader {
    fn open(path: &Path) -> Result<FileReader, ParseError> {
        let reader = Reader::from_file(path).map_err(|e| match e {
            quick_xml::Error::Io(source) => ParseError::Io {
                path: path.to_owned(),
                source: std::io::Error::new(source.kind(), source.to_string()),
            },
            other => ParseError::MalformedXml {
                path: path.to_owned(),
                line: 0,
                column: 0,
                detail: other.to_string(),
            },
        })?;
        Ok(FileReader {
            path: path.to_owned(),
            reader,
            buf: Vec::new(),
        })
    }

    fn malformed(&self, detail: impl Into<String>) -> ParseError {
        let (line, column) = line_col(&self.path, self.reader.buffer_position());
        ParseError::MalformedXml {
            path: self.path.clone(),
            line,
            column,
            detail: detail.into(),
        }
    }

    fn next(&mut self) -> Result<Event<'static>, ParseError> {
        self.buf.clear();
        match self.reader.read_event_into(&mut self.buf) {
            Ok(ev) => Ok(ev.into_owned()),
            Err(e) => {
                let (line, column) = line_col(&self.path, self.reader.error_position());
                Err(ParseError::MalformedXml {
                    path: self.path.clone(),
                    line,
                    column,
                    detail: e.to_string(),
                })
            }
        }
    }

    fn skip_subtree(&mut self, start: &BytesStart<'static>) -> Result<(), ParseError> {
        let mut skip_buf = Vec::new();
        self.reader
            .read_to_end_into(start.name(), &mut skip_buf)
            .map_err(|e| self.malformed(e.to_string()))?;
        Ok(())
    }

    /// All attributes of an element, unescaped, ignoring XML namespace
    /// prefixes on none (attribute names are matched verbatim).
    fn attributes(&self, e: &BytesStart) -> Result<HashMap<String, String>, ParseError> {
        let mut out = HashMap::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| self.malformed(err.to_string()))?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| self.malformed(err.to_string()))?
                .into_owned();
            out.insert(key, value);
        }
        Ok(out)
    }

    fn required<'m>(
        &self,
        attrs: &'m HashMap<String, String>,
        element: &str,
        name: &str,
    ) -> Result<&'m str, ParseError> {
        attrs
            .get(name)
            .map(|s| s.as_str())
            .ok_or_else(|| self.malformed(format!("<{element}> is missing the {name} attribute")))
    }
}

/// Reads a resource header.
pub fn parse_header(path: &Path) -> Result<ResourceHeader, ParseError> {
    let mut r = FileReader::open(path)?;
    let mut primary: Option<String> = None;
    let mut files = Vec::new();
    let mut spaces = Vec::new();

    loop {
        let event = r.next()?;
        match &event {
            Event::Start(e) | Event::Empty(e) => {
                let attrs = r.attributes(e)?;
                match e.name().as_ref() {
                    b"resourceHeader" | b"annotationSpaces" | b"annotationFiles" => {}
                    b"primaryData" => {
                        primary = Some(r.required(&attrs, "primaryData", "loc")?.to_owned());
                    }
                    b"annotationFile" => {
                        files.push(r.required(&attrs, "annotationFile", "loc")?.to_owned());
                    }
                    b"annotationSpace" => {
                        spaces.push(r.required(&attrs, "annotationSpace", "name")?.to_owned());
                    }
                    _ => {
                        if matches!(event, Event::Start(_)) {
                            r.skip_subtree(e)?;
                        }
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }

    let primary_data_path = primary.ok_or_else(|| ParseError::MissingPrimaryData {
        path: path.to_owned(),
    })?;
    if files.is_empty() {
        return Err(ParseError::MissingAnnotationFiles {
            path: path.to_owned(),
        });
    }
    Ok(ResourceHeader {
        dir: path.parent().unwrap_or_else(|| Path::new("")).to_owned(),
        primary_data_path,
        annotation_files: files,
        annotation_spaces: spaces,
    })
}

#[derive(Debug)]
struct PendingAnno {
    id: String,
    space: String,
    label: String,
    ref_id: String,
    features: Vec<(String, String)>,
    seen_fs: bool,
}

#[derive(Debug, Default)]
struct FileRecords {
    regions: Vec<Region>,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    annotations: Vec<Annotation>,
}

fn parse_annotation_file(path: &Path) -> Result<FileRecords, ParseError> {
    let mut r = FileReader::open(path)?;
    let mut records = FileRecords::default();

    let mut root_seen = false;
    let mut current_node: Option<NodeRecord> = None;
    let mut current_anno: Option<PendingAnno> = None;
    let mut in_fs = false;
    // An open <f>: name plus the value seen so far. Full GrAF writes
    // complex features as <f name="..."><fs>...</fs></f>, so a missing
    // value only becomes an error once </f> arrives without one.
    let mut open_f: Option<(String, Option<String>)> = None;

    loop {
        let event = r.next()?;
        let (e, is_empty) = match &event {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(e) => {
                match e.name().as_ref() {
                    b"node" => {
                        if let Some(n) = current_node.take() {
                            records.nodes.push(n);
                        }
                    }
                    b"a" => {
                        if let Some(a) = current_anno.take() {
                            records.annotations.push(finish_anno(a));
                        }
                    }
                    b"fs" => in_fs = false,
                    b"f" => {
                        let (name, value) = open_f.take().expect("balanced by the reader");
                        match value {
                            Some(value) => {
                                if let Some(anno) = current_anno.as_mut() {
                                    anno.features.push((name, value));
                                }
                            }
                            None => {
                                return Err(
                                    r.malformed(format!("<f name=\"{name}\"> has no value"))
                                )
                            }
                        }
                    }
                    _ => {}
                }
                continue;
            }
            Event::Eof => break,
            // Text between elements is insignificant whitespace in this
            // vocabulary; declarations/comments/PIs carry no content.
            _ => continue,
        };

        // Inside a feature structure only <f> is legal, and inside <f>
        // nothing is; a nested <fs> gets its own diagnostic.
        if open_f.is_some() || in_fs {
            let name = e.name().as_ref().to_vec();
            if open_f.is_some() && name == b"fs" {
                let annotation = current_anno
                    .as_ref()
                    .map(|a| a.id.clone())
                    .unwrap_or_default();
                return Err(ParseError::NestedFeatureStructure { annotation });
            }
            if !(name == b"f" && open_f.is_none()) {
                return Err(r.malformed(format!(
                    "unexpected element <{}> inside a feature structure",
                    String::from_utf8_lossy(&name)
                )));
            }
        }

        let attrs = r.attributes(e)?;
        match e.name().as_ref() {
            b"graph" => {
                if root_seen {
                    return Err(r.malformed("nested <graph> element"));
                }
                root_seen = true;
            }
            b"region" => {
                let id = r.required(&attrs, "region", "xml:id")?;
                let anchors = r.required(&attrs, "region", "anchors")?;
                let parts: Vec<&str> = anchors.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(r.malformed(format!(
                        "region {id} needs exactly two anchors, found {}",
                        parts.len()
                    )));
                }
                let parse = |s: &str| -> Result<u32, ParseError> {
                    s.parse()
                        .map_err(|_| r.malformed(format!("region {id} has non-integer anchor {s}")))
                };
                records.regions.push(Region {
                    id: id.to_owned(),
                    start: parse(parts[0])?,
                    end: parse(parts[1])?,
                });
            }
            b"node" => {
                if current_node.is_some() {
                    return Err(r.malformed("nested <node> element"));
                }
                let node = NodeRecord {
                    id: r.required(&attrs, "node", "xml:id")?.to_owned(),
                    regions: Vec::new(),
                };
                if is_empty {
                    records.nodes.push(node);
                } else {
                    current_node = Some(node);
                }
            }
            b"link" => match current_node.as_mut() {
                Some(node) => {
                    let targets = r.required(&attrs, "link", "targets")?;
                    node.regions
                        .extend(targets.split_whitespace().map(str::to_owned));
                    if !is_empty {
                        r.skip_subtree(e)?;
                    }
                }
                None => return Err(r.malformed("<link> outside a <node>")),
            },
            b"edge" => {
                records.edges.push(EdgeRecord {
                    id: r.required(&attrs, "edge", "xml:id")?.to_owned(),
                    from: r.required(&attrs, "edge", "from")?.to_owned(),
                    to: r.required(&attrs, "edge", "to")?.to_owned(),
                });
            }
            b"a" => {
                if current_anno.is_some() {
                    return Err(r.malformed("nested <a> element"));
                }
                let anno = PendingAnno {
                    id: r.required(&attrs, "a", "xml:id")?.to_owned(),
                    label: r.required(&attrs, "a", "label")?.to_owned(),
                    ref_id: r.required(&attrs, "a", "ref")?.to_owned(),
                    space: r.required(&attrs, "a", "as")?.to_owned(),
                    features: Vec::new(),
                    seen_fs: false,
                };
                if is_empty {
                    records.annotations.push(finish_anno(anno));
                } else {
                    current_anno = Some(anno);
                }
            }
            b"fs" => match current_anno.as_mut() {
                Some(anno) => {
                    if anno.seen_fs {
                        return Err(
                            r.malformed(format!("annotation {} has two feature structures", anno.id))
                        );
                    }
                    anno.seen_fs = true;
                    if !is_empty {
                        in_fs = true;
                    }
                }
                None => return Err(r.malformed("<fs> outside an <a>")),
            },
            b"f" => {
                if !in_fs {
                    return Err(r.malformed("<f> outside a feature structure"));
                }
                let anno = current_anno
                    .as_mut()
                    .expect("in_fs implies an open annotation");
                let name = r.required(&attrs, "f", "name")?.to_owned();
                let value = attrs.get("value").cloned();
                if is_empty {
                    match value {
                        Some(value) => anno.features.push((name, value)),
                        None => {
                            return Err(r.malformed(format!("<f name=\"{name}\"> has no value")))
                        }
                    }
                } else {
                    open_f = Some((name, value));
                }
            }
            _ => {
                // Unknown elements outside feature structures are
                // skipped for forward compatibility.
                if !is_empty {
                    r.skip_subtree(e)?;
                }
            }
        }
    }

    if !root_seen && !(records.regions.is_empty()
        && records.nodes.is_empty()
        && records.edges.is_empty()
        && records.annotations.is_empty())
    {
        return Err(r.malformed("records outside a <graph> root"));
    }
    Ok(records)
}

fn finish_anno(a: PendingAnno) -> Annotation {
    Annotation {
        id: a.id,
        space: a.space,
        label: a.label,
        // Target kind is resolved against the merged graph later.
        target: AnnoTarget::Node(a.ref_id),
        features: a.features,
    }
}

/// Reads the primary data and all annotation files of a resource into
/// one validated graph. Annotation files merge in header order.
pub fn parse_resource(header: &ResourceHeader) -> Result<Graph, ParseError> {
    let primary_path = header.dir.join(&header.primary_data_path);
    let text = fs::read_to_string(&primary_path).map_err(io_err(&primary_path))?;
    let mut g = Graph::new(PrimaryData::new(text));

    let mut ids: HashSet<String> = HashSet::new();
    for file in &header.annotation_files {
        let path = header.dir.join(file);
        let records = parse_annotation_file(&path)?;

        let mut claim = |id: &str| -> Result<(), ParseError> {
            if !ids.insert(id.to_owned()) {
                return Err(ParseError::DuplicateId {
                    id: id.to_owned(),
                    path: path.clone(),
                });
            }
            Ok(())
        };
        for rec in &records.regions {
            claim(&rec.id)?;
        }
        for rec in &records.nodes {
            claim(&rec.id)?;
        }
        for rec in &records.edges {
            claim(&rec.id)?;
        }
        for rec in &records.annotations {
            claim(&rec.id)?;
        }

        for rec in records.regions {
            if rec.end as usize > g.primary.length {
                return Err(ParseError::AnchorOutOfBounds {
                    region: rec.id,
                    anchor: rec.end,
                    length: g.primary.length,
                });
            }
            g.regions.push(rec);
        }
        for rec in records.nodes {
            for rid in &rec.regions {
                if !g.regions.contains(rid) {
                    return Err(ParseError::DanglingReference {
                        owner: format!("node {}", rec.id),
                        referenced: rid.clone(),
                    });
                }
            }
            g.nodes.push(rec);
        }
        for rec in records.edges {
            for endpoint in [&rec.from, &rec.to] {
                if !g.nodes.contains(endpoint) {
                    return Err(ParseError::DanglingReference {
                        owner: format!("edge {}", rec.id),
                        referenced: endpoint.clone(),
                    });
                }
            }
            g.edges.push(rec);
        }
        for rec in records.annotations {
            let ref_id = rec.target.id().to_owned();
            let target = if g.nodes.contains(&ref_id) {
                AnnoTarget::Node(ref_id)
            } else if g.edges.contains(&ref_id) {
                AnnoTarget::Edge(ref_id)
            } else {
                return Err(ParseError::DanglingReference {
                    owner: format!("annotation {}", rec.id),
                    referenced: ref_id,
                });
            };
            g.annotations.push(Annotation { target, ..rec });
        }
    }

    let violations = validate(&g);
    if !violations.is_empty() {
        return Err(ParseError::InvalidResource { violations });
    }
    Ok(g)
}

/// Convenience: header + resource in one call.
pub fn parse(header_path: &Path) -> Result<Graph, ParseError> {
    parse_resource(&parse_header(header_path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_graph_sized, toy_graph, write_resource};
    use crate::model::graph_eq;
    use std::fs;

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn toy_header(dir: &Path) -> PathBuf {
        write_resource(&toy_graph(), dir).unwrap()
    }

    #[test]
    fn toy_round_trips_through_xml() {
        let dir = tempfile::tempdir().unwrap();
        let header = toy_header(dir.path());
        let g = parse(&header).unwrap();
        assert_eq!(g, toy_graph());
    }

    #[test]
    fn header_fields_echo_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let header = parse_header(&toy_header(dir.path())).unwrap();
        assert_eq!(header.primary_data_path, "primary.txt");
        assert_eq!(header.annotation_files, ["annotations.xml"]);
        assert_eq!(header.annotation_spaces, ["toy"]);
    }

    #[test]
    fn random_graphs_round_trip_through_xml() {
        for seed in 0..25 {
            let g = random_graph_sized(seed, 120, 600);
            let dir = tempfile::tempdir().unwrap();
            let header = write_resource(&g, dir.path()).unwrap();
            let parsed = parse(&header).unwrap();
            assert_eq!(parsed, g, "seed {seed}");
            assert!(graph_eq(&parsed, &g), "seed {seed}");
        }
    }

    #[test]
    fn parsing_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let header = toy_header(dir.path());
        assert_eq!(parse(&header).unwrap(), parse(&header).unwrap());
    }

    #[test]
    fn header_without_annotation_files_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "empty.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/></resourceHeader>",
        );
        match parse_header(&path) {
            Err(ParseError::MissingAnnotationFiles { .. }) => {}
            other => panic!("expected MissingAnnotationFiles, got {other:?}"),
        }
    }

    #[test]
    fn header_without_primary_data_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "empty.hdr",
            "<resourceHeader><annotationFiles><annotationFile loc=\"x.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse_header(&path) {
            Err(ParseError::MissingPrimaryData { .. }) => {}
            other => panic!("expected MissingPrimaryData, got {other:?}"),
        }
    }

    #[test]
    fn absent_primary_file_is_an_io_error_naming_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let header = toy_header(dir.path());
        fs::remove_file(dir.path().join("primary.txt")).unwrap();
        match parse(&header) {
            Err(ParseError::Io { path, .. }) => {
                assert!(path.ends_with("primary.txt"), "{path:?}")
            }
            other => panic!("expected Io, got {other:?}"),
        }
    }

    #[test]
    fn nested_feature_structure_names_the_annotation() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "x");
        write(
            dir.path(),
            "bad.xml",
            "<graph><node xml:id=\"n1\"/>\n<a xml:id=\"a1\" label=\"w\" ref=\"n1\" as=\"t\">\
             <fs><f name=\"k\"><fs/></f></fs></a></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::NestedFeatureStructure { annotation }) => {
                assert_eq!(annotation, "a1")
            }
            other => panic!("expected NestedFeatureStructure, got {other:?}"),
        }
    }

    #[test]
    fn unknown_element_inside_fs_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "x");
        write(
            dir.path(),
            "bad.xml",
            "<graph><node xml:id=\"n1\"/>\
             <a xml:id=\"a1\" label=\"w\" ref=\"n1\" as=\"t\"><fs><shiny/></fs></a></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::MalformedXml { detail, .. }) => {
                assert!(detail.contains("shiny"), "{detail}")
            }
            other => panic!("expected MalformedXml, got {other:?}"),
        }
    }

    #[test]
    fn unknown_elements_and_attributes_outside_fs_are_ignored() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "hi");
        write(
            dir.path(),
            "ok.xml",
            "<graph version=\"9\"><metadata><author>x</author></metadata>\
             <region xml:id=\"r0\" anchors=\"0 2\" layer=\"base\"/>\
             <node xml:id=\"n1\" extra=\"y\"><link targets=\"r0\"/></node></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"ok.xml\"/></annotationFiles></resourceHeader>",
        );
        let g = parse(&header).unwrap();
        assert_eq!(g.regions.len(), 1);
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.nodes.get("n1").unwrap().regions, ["r0"]);
    }

    #[test]
    fn dangling_annotation_target_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "x");
        write(
            dir.path(),
            "bad.xml",
            "<graph><a xml:id=\"a1\" label=\"w\" ref=\"ghost\" as=\"t\"/></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::DanglingReference { owner, referenced }) => {
                assert_eq!(owner, "annotation a1");
                assert_eq!(referenced, "ghost");
            }
            other => panic!("expected DanglingReference, got {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_anchor_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "abc");
        write(
            dir.path(),
            "bad.xml",
            "<graph><region xml:id=\"r0\" anchors=\"0 99\"/></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::AnchorOutOfBounds {
                region,
                anchor,
                length,
            }) => {
                assert_eq!((region.as_str(), anchor, length), ("r0", 99, 3));
            }
            other => panic!("expected AnchorOutOfBounds, got {other:?}"),
        }
    }

    #[test]
    fn three_anchor_region_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "abcdef");
        write(
            dir.path(),
            "bad.xml",
            "<graph><region xml:id=\"r0\" anchors=\"0 2 4\"/></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::MalformedXml { detail, .. }) => {
                assert!(detail.contains("two anchors"), "{detail}")
            }
            other => panic!("expected MalformedXml, got {other:?}"),
        }
    }

    #[test]
    fn malformed_xml_reports_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "x");
        write(
            dir.path(),
            "bad.xml",
            "<graph>\n<node xml:id=\"n1\"></edge>\n</graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::MalformedXml { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected MalformedXml, got {other:?}"),
        }
    }

    #[test]
    fn two_files_merge_and_cross_reference() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "ab cd");
        write(
            dir.path(),
            "base.xml",
            "<graph><region xml:id=\"r0\" anchors=\"0 2\"/>\
             <node xml:id=\"n1\"><link targets=\"r0\"/></node></graph>",
        );
        write(
            dir.path(),
            "extra.xml",
            "<graph><a xml:id=\"a1\" label=\"w\" ref=\"n1\" as=\"more\">\
             <fs><f name=\"k\" value=\"v\"/></fs></a></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"base.xml\"/>\
             <annotationFile loc=\"extra.xml\"/></annotationFiles></resourceHeader>",
        );
        let g = parse(&header).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.annotations.len(), 1);
        assert_eq!(
            g.annotations.get("a1").unwrap().target,
            AnnoTarget::Node("n1".into())
        );
    }

    #[test]
    fn cross_file_id_collision_is_a_hard_error() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "ab");
        write(dir.path(), "one.xml", "<graph><node xml:id=\"n1\"/></graph>");
        write(dir.path(), "two.xml", "<graph><node xml:id=\"n1\"/></graph>");
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"one.xml\"/>\
             <annotationFile loc=\"two.xml\"/></annotationFiles></resourceHeader>",
        );
        match parse(&header) {
            Err(ParseError::DuplicateId { id, path }) => {
                assert_eq!(id, "n1");
                assert!(path.ends_with("two.xml"));
            }
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn forward_reference_within_a_file_resolves() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "primary.txt", "ab");
        write(
            dir.path(),
            "fwd.xml",
            "<graph><a xml:id=\"a1\" label=\"w\" ref=\"n1\" as=\"t\"/>\
             <edge xml:id=\"e1\" from=\"n1\" to=\"n2\"/>\
             <node xml:id=\"n1\"/><node xml:id=\"n2\"/></graph>",
        );
        let header = write(
            dir.path(),
            "r.hdr",
            "<resourceHeader><primaryData loc=\"primary.txt\"/>\
             <annotationFiles><annotationFile loc=\"fwd.xml\"/></annotationFiles></resourceHeader>",
        );
        let g = parse(&header).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.annotations.len(), 1);
    }
}
