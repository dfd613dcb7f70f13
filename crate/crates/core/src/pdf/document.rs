use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet};

use super::filter::decode_stream;
use super::lexer::{find, Lexer};
use super::object::{Dictionary, ObjectId, PdfObject};
use super::xref::{find_startxref, read_chain, XrefEntry, XrefTable};
use crate::error::{Error, Result};

static NULL: PdfObject = PdfObject::Null;

const INHERITABLE: [&str; 4] = ["Resources", "MediaBox", "CropBox", "Rotate"];

/// A parsed PDF in its final visible state.
#[derive(Debug, Clone)]
pub struct PdfDocument {
    pub version: (u8, u8),
    pub objects: BTreeMap<ObjectId, PdfObject>,
    pub trailer: Dictionary,
    pub root_ref: ObjectId,
    pub info_ref: Option<ObjectId>,
    pub page_refs: Vec<ObjectId>,
}

/// One page with its decoded content and inherited attributes resolved.
#[derive(Debug, Clone)]
pub struct PageView {
    pub page_ref: ObjectId,
    pub dict: Dictionary,
    /// All content streams, decoded, joined with a single `\n`.
    pub content: Vec<u8>,
    pub resources: Option<PdfObject>,
    pub media_box: Option<PdfObject>,
    pub crop_box: Option<PdfObject>,
    pub rotation: Option<PdfObject>,
    pub annotations: Option<PdfObject>,
}

impl PageView {
    /// The page dictionary with inherited attributes filled in where the page
    /// itself does not define them.
    pub fn effective_dict(&self) -> Dictionary {
        let mut dict = self.dict.clone();
        let inherited = [
            ("Resources", &self.resources),
            ("MediaBox", &self.media_box),
            ("CropBox", &self.crop_box),
            ("Rotate", &self.rotation),
        ];
        for (key, value) in inherited {
            if let (false, Some(v)) = (dict.contains_key(key), value) {
                dict.set(key, v.clone());
            }
        }
        dict
    }
}

/// Parses a complete PDF file.
pub fn parse(bytes: &[u8]) -> Result<PdfDocument> {
    if bytes.is_empty() {
        return Err(Error::malformed("empty input"));
    }
    let version = read_header(bytes)?;
    let start = find_startxref(bytes)?;
    let table = read_chain(bytes, start)?;
    if table.trailer.contains_key("Encrypt") {
        return Err(Error::Encrypted);
    }
    let objects = load_objects(bytes, &table)?;
    PdfDocument::assemble(version, objects, table.trailer)
}

fn read_header(bytes: &[u8]) -> Result<(u8, u8)> {
    let window = &bytes[..bytes.len().min(1024)];
    let at = find(window, b"%PDF-").ok_or_else(|| Error::malformed("missing %PDF header"))?;
    let rest = &bytes[at + 5..];
    let digit = |i: usize| rest.get(i).filter(|b| b.is_ascii_digit()).map(|b| b - b'0');
    match (digit(0), rest.get(1), digit(2)) {
        (Some(major), Some(b'.'), Some(minor)) => Ok((major, minor)),
        _ => Err(Error::malformed("unreadable PDF version in header")),
    }
}

fn load_objects(buf: &[u8], table: &XrefTable) -> Result<BTreeMap<ObjectId, PdfObject>> {
    let length_of = |id: ObjectId| -> Option<i64> {
        match table.entries.get(&id.number)? {
            XrefEntry::InFile { offset, .. } => {
                let mut lx = Lexer::new(buf, *offset);
                lx.read_object_header().ok()?;
                lx.parse_object().ok()?.as_integer()
            }
            _ => None,
        }
    };

    let mut objects = BTreeMap::new();
    let mut object_streams: HashMap<u32, Vec<(u32, PdfObject)>> = HashMap::new();
    for (&number, entry) in &table.entries {
        match *entry {
            XrefEntry::Free => {}
            XrefEntry::InFile { offset, .. } => {
                if number == 0 {
                    continue;
                }
                if offset >= buf.len() {
                    return Err(Error::malformed(format!(
                        "object {number} offset {offset} beyond end of file"
                    )));
                }
                let mut lx = Lexer::new(buf, offset);
                let id = lx.read_object_header().map_err(|_| {
                    Error::malformed(format!("object {number} not found at offset {offset}"))
                })?;
                if id.number != number {
                    return Err(Error::malformed(format!(
                        "xref points object {number} at object {}",
                        id.number
                    )));
                }
                let body = lx
                    .read_indirect_body(&length_of)
                    .map_err(|e| Error::malformed(format!("truncated object {number}: {e}")))?;
                objects.insert(id, body);
            }
            XrefEntry::InObjectStream { stream, index } => {
                let members = match object_streams.entry(stream) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => {
                        e.insert(read_object_stream(buf, table, stream, &length_of)?)
                    }
                };
                let found = members
                    .get(index as usize)
                    .filter(|(n, _)| *n == number)
                    .or_else(|| members.iter().find(|(n, _)| *n == number));
                if let Some((_, obj)) = found {
                    objects.insert(ObjectId::new(number, 0), obj.clone());
                }
            }
        }
    }
    Ok(objects)
}

fn read_object_stream(
    buf: &[u8],
    table: &XrefTable,
    stream_number: u32,
    length_of: &dyn Fn(ObjectId) -> Option<i64>,
) -> Result<Vec<(u32, PdfObject)>> {
    let Some(XrefEntry::InFile { offset, .. }) = table.entries.get(&stream_number) else {
        return Err(Error::malformed(format!(
            "object stream {stream_number} is not in the file"
        )));
    };
    let mut lx = Lexer::new(buf, *offset);
    lx.read_object_header()?;
    let PdfObject::Stream(stream) = lx.read_indirect_body(length_of)? else {
        return Err(Error::malformed(format!(
            "object {stream_number} is not an object stream"
        )));
    };
    let data = decode_stream(&stream)?;
    let count = stream
        .dict
        .get("N")
        .and_then(PdfObject::as_integer)
        .unwrap_or(0);
    let first = stream
        .dict
        .get("First")
        .and_then(PdfObject::as_integer)
        .and_then(|f| usize::try_from(f).ok())
        .ok_or_else(|| Error::malformed("object stream without /First"))?;
    let mut header = Lexer::new(&data, 0);
    let mut members = Vec::new();
    for _ in 0..count.max(0) {
        let number = header.read_uint()?;
        let rel = header.read_uint()? as usize;
        let mut lx = Lexer::new(&data, first + rel);
        let obj = lx.parse_object()?;
        members.push((number as u32, obj));
    }
    Ok(members)
}

impl PdfDocument {
    /// Builds a document from an object table and trailer, locating the
    /// Catalog, the Info dictionary and the flattened page list.
    pub fn assemble(
        version: (u8, u8),
        objects: BTreeMap<ObjectId, PdfObject>,
        trailer: Dictionary,
    ) -> Result<Self> {
        let root_ref = trailer
            .get("Root")
            .and_then(PdfObject::as_reference)
            .ok_or_else(|| Error::malformed("trailer has no /Root reference"))?;
        let mut doc = PdfDocument {
            version,
            objects,
            trailer,
            root_ref,
            info_ref: None,
            page_refs: Vec::new(),
        };
        let catalog = doc
            .get(root_ref)
            .and_then(PdfObject::as_dict)
            .ok_or_else(|| Error::malformed("/Root does not resolve to a dictionary"))?;
        if catalog.type_name().is_some_and(|t| t != b"Catalog") {
            return Err(Error::malformed("/Root is not a Catalog"));
        }
        doc.info_ref = doc
            .trailer
            .get("Info")
            .and_then(PdfObject::as_reference)
            .filter(|id| matches!(doc.get(*id), Some(PdfObject::Dictionary(_))));
        doc.refresh_pages();
        Ok(doc)
    }

    /// Recomputes `page_refs` from the page tree.
    pub fn refresh_pages(&mut self) {
        let mut pages = Vec::new();
        let mut seen = HashSet::new();
        if let Some(PdfObject::Reference(root)) = self.catalog().get("Pages") {
            self.collect_pages(*root, &mut pages, &mut seen);
        }
        self.page_refs = pages;
    }

    fn collect_pages(&self, id: ObjectId, out: &mut Vec<ObjectId>, seen: &mut HashSet<ObjectId>) {
        if !seen.insert(id) {
            return;
        }
        let Some(node) = self.get(id).and_then(PdfObject::as_dict) else {
            return;
        };
        let is_tree = match node.type_name() {
            Some(b"Pages") => true,
            Some(b"Page") => false,
            _ => node.contains_key("Kids"),
        };
        if !is_tree {
            out.push(id);
            return;
        }
        if let Some(kids) = node
            .get("Kids")
            .map(|k| self.resolve(k))
            .and_then(PdfObject::as_array)
        {
            for kid in kids {
                if let PdfObject::Reference(kid) = kid {
                    self.collect_pages(*kid, out, seen);
                }
            }
        }
    }

    pub fn get(&self, id: ObjectId) -> Option<&PdfObject> {
        self.objects.get(&id)
    }

    pub fn get_mut(&mut self, id: ObjectId) -> Option<&mut PdfObject> {
        self.objects.get_mut(&id)
    }

    pub fn get_dict_mut(&mut self, id: ObjectId) -> Option<&mut Dictionary> {
        self.get_mut(id).and_then(PdfObject::as_dict_mut)
    }

    /// Follows one level of indirection; dangling references become `null`.
    pub fn resolve<'a>(&'a self, obj: &'a PdfObject) -> &'a PdfObject {
        match obj {
            PdfObject::Reference(id) => self.get(*id).unwrap_or(&NULL),
            other => other,
        }
    }

    pub fn catalog(&self) -> &Dictionary {
        self.get(self.root_ref)
            .and_then(PdfObject::as_dict)
            .expect("root_ref resolves to a dictionary")
    }

    pub fn catalog_mut(&mut self) -> &mut Dictionary {
        let root = self.root_ref;
        self.get_dict_mut(root)
            .expect("root_ref resolves to a dictionary")
    }

    pub fn info(&self) -> Option<&Dictionary> {
        self.info_ref
            .and_then(|id| self.get(id))
            .and_then(PdfObject::as_dict)
    }

    pub fn page_count(&self) -> usize {
        self.page_refs.len()
    }

    pub fn page_dict(&self, index: usize) -> Result<&Dictionary> {
        let id = *self
            .page_refs
            .get(index)
            .ok_or(Error::PageIndexOutOfRange {
                index,
                count: self.page_refs.len(),
            })?;
        self.get(id)
            .and_then(PdfObject::as_dict)
            .ok_or(Error::NotADictionary)
    }

    pub fn page_dict_mut(&mut self, index: usize) -> Result<&mut Dictionary> {
        let count = self.page_refs.len();
        let id = *self
            .page_refs
            .get(index)
            .ok_or(Error::PageIndexOutOfRange { index, count })?;
        self.get_dict_mut(id).ok_or(Error::NotADictionary)
    }

    /// Object ids of the page's content streams, in drawing order.
    pub fn content_stream_ids(&self, index: usize) -> Result<Vec<ObjectId>> {
        let dict = self.page_dict(index)?;
        Ok(match dict.get("Contents") {
            Some(PdfObject::Reference(id)) => match self.get(*id) {
                Some(PdfObject::Array(items)) => {
                    items.iter().filter_map(PdfObject::as_reference).collect()
                }
                _ => vec![*id],
            },
            Some(PdfObject::Array(items)) => {
                items.iter().filter_map(PdfObject::as_reference).collect()
            }
            _ => Vec::new(),
        })
    }

    pub fn page_view(&self, index: usize) -> Result<PageView> {
        let dict = self.page_dict(index)?.clone();
        let page_ref = self.page_refs[index];

        let mut content = Vec::new();
        let parts: Vec<&PdfObject> = match dict.get("Contents").map(|c| self.resolve(c)) {
            None | Some(PdfObject::Null) => Vec::new(),
            Some(PdfObject::Array(items)) => items.iter().map(|i| self.resolve(i)).collect(),
            Some(other) => vec![other],
        };
        let streams = parts.into_iter().filter_map(PdfObject::as_stream);
        for (i, stream) in streams.enumerate() {
            if i > 0 {
                content.push(b'\n');
            }
            content.extend_from_slice(&decode_stream(stream)?);
        }

        let [resources, media_box, crop_box, rotation] =
            INHERITABLE.map(|key| self.inherited(&dict, key));
        let annotations = dict.get("Annots").cloned();
        Ok(PageView {
            page_ref,
            dict,
            content,
            resources,
            media_box,
            crop_box,
            rotation,
            annotations,
        })
    }

    fn inherited(&self, page: &Dictionary, key: &str) -> Option<PdfObject> {
        let mut node = page;
        let mut seen = HashSet::new();
        loop {
            if let Some(v) = node.get(key) {
                return Some(v.clone());
            }
            let parent = node.get("Parent").and_then(PdfObject::as_reference)?;
            if !seen.insert(parent) {
                return None;
            }
            node = self.get(parent).and_then(PdfObject::as_dict)?;
        }
    }

    /// Smallest object number not yet in use.
    pub fn next_object_id(&self) -> ObjectId {
        let max = self.objects.keys().map(|id| id.number).max().unwrap_or(0);
        ObjectId::new(max + 1, 0)
    }

    pub fn add_object(&mut self, obj: impl Into<PdfObject>) -> ObjectId {
        let id = self.next_object_id();
        self.objects.insert(id, obj.into());
        id
    }
}

/// Structural equality of two object graphs, following references on both
/// sides in lockstep. Object numbering is irrelevant.
pub fn graph_equivalent(a: &PdfDocument, x: &PdfObject, b: &PdfDocument, y: &PdfObject) -> bool {
    let mut assumed = HashSet::new();
    equivalent(a, x, b, y, &mut assumed)
}

fn equivalent(
    a: &PdfDocument,
    x: &PdfObject,
    b: &PdfDocument,
    y: &PdfObject,
    assumed: &mut HashSet<(ObjectId, ObjectId)>,
) -> bool {
    match (x, y) {
        (PdfObject::Reference(i), PdfObject::Reference(j)) => {
            if !assumed.insert((*i, *j)) {
                return true;
            }
            equivalent(a, a.resolve(x), b, b.resolve(y), assumed)
        }
        (PdfObject::Reference(_), _) => equivalent(a, a.resolve(x), b, y, assumed),
        (_, PdfObject::Reference(_)) => equivalent(a, x, b, b.resolve(y), assumed),
        (PdfObject::Array(p), PdfObject::Array(q)) => {
            p.len() == q.len()
                && p.iter()
                    .zip(q)
                    .all(|(u, v)| equivalent(a, u, b, v, assumed))
        }
        (PdfObject::Dictionary(p), PdfObject::Dictionary(q)) => {
            dicts_equivalent(a, p, b, q, assumed)
        }
        (PdfObject::Stream(p), PdfObject::Stream(q)) => {
            p.raw() == q.raw() && dicts_equivalent(a, &p.dict, b, &q.dict, assumed)
        }
        _ => x == y,
    }
}

fn dicts_equivalent(
    a: &PdfDocument,
    p: &Dictionary,
    b: &PdfDocument,
    q: &Dictionary,
    assumed: &mut HashSet<(ObjectId, ObjectId)>,
) -> bool {
    p.len() == q.len()
        && p.iter()
            .all(|(k, u)| q.get(k).is_some_and(|v| equivalent(a, u, b, v, assumed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdf::testutil::{minimal_pdf, with_incremental_update};

    #[test]
    fn parses_minimal_fixture() {
        let doc = parse(&minimal_pdf()).unwrap();
        assert_eq!(doc.version, (1, 4));
        assert_eq!(doc.page_count(), 1);
        assert!(doc.catalog().has_type("Catalog"));
        let view = doc.page_view(0).unwrap();
        assert_eq!(view.content, b"BT /F1 12 Tf (Hello) Tj ET");
        assert!(view.media_box.is_some());
    }

    #[test]
    fn incremental_update_redefines_object() {
        let bytes = with_incremental_update(
            &minimal_pdf(),
            4,
            b"<< /Length 5 >>\nstream\nBT ET\nendstream",
        );
        let doc = parse(&bytes).unwrap();
        assert_eq!(doc.page_view(0).unwrap().content, b"BT ET");
    }

    #[test]
    fn rejects_missing_header() {
        let bytes = minimal_pdf()[9..].to_vec();
        assert!(matches!(parse(&bytes), Err(Error::MalformedPdf(_))));
        assert!(matches!(parse(b""), Err(Error::MalformedPdf(_))));
    }

    #[test]
    fn rejects_cyclic_prev_chain() {
        let base = minimal_pdf();
        let start = find_startxref(&base).unwrap();
        let mut bytes = base.clone();
        let xref_at = bytes.len();
        bytes.extend_from_slice(
            format!("xref\n0 0\ntrailer\n<< /Size 6 /Root 1 0 R /Prev {xref_at} >>\nstartxref\n{xref_at}\n%%EOF\n")
                .as_bytes(),
        );
        assert!(start < xref_at);
        let err = parse(&bytes).unwrap_err();
        assert!(err.to_string().contains("cyclic"), "{err}");
    }

    #[test]
    fn rejects_encrypted() {
        let base = String::from_utf8(minimal_pdf()).unwrap();
        let bytes = base.replace("/Root 1 0 R", "/Root 1 0 R /Encrypt 9 0 R");
        assert!(matches!(parse(bytes.as_bytes()), Err(Error::Encrypted)));
    }

    #[test]
    fn bad_startxref_is_malformed() {
        let base = String::from_utf8(minimal_pdf()).unwrap();
        let at = base.rfind("startxref").unwrap();
        let bytes = format!("{}startxref\n999999\n%%EOF\n", &base[..at]);
        assert!(matches!(
            parse(bytes.as_bytes()),
            Err(Error::MalformedPdf(_))
        ));
    }

    #[test]
    fn resolve_follows_one_level() {
        let mut doc = parse(&minimal_pdf()).unwrap();
        let id = doc.add_object(PdfObject::Integer(7));
        assert_eq!(
            doc.resolve(&PdfObject::Reference(id)),
            &PdfObject::Integer(7)
        );
        assert_eq!(doc.resolve(&PdfObject::Integer(7)), &PdfObject::Integer(7));
        assert_eq!(doc.resolve(&PdfObject::reference(999, 0)), &PdfObject::Null);
    }

    #[test]
    fn page_view_bounds() {
        let doc = parse(&minimal_pdf()).unwrap();
        assert!(matches!(
            doc.page_view(1),
            Err(Error::PageIndexOutOfRange { index: 1, count: 1 })
        ));
    }

    #[test]
    fn contents_shapes() {
        let mut doc = parse(&minimal_pdf()).unwrap();
        let bt = doc.add_object(crate::pdf::Stream::new(Dictionary::new(), b"BT".to_vec()));
        let et = doc.add_object(crate::pdf::Stream::new(Dictionary::new(), b"ET".to_vec()));
        let page = doc.page_dict_mut(0).unwrap();
        page.set("Contents", PdfObject::Array(vec![bt.into(), et.into()]));
        assert_eq!(doc.page_view(0).unwrap().content, b"BT\nET");

        doc.page_dict_mut(0).unwrap().remove("Contents");
        assert!(doc.page_view(0).unwrap().content.is_empty());
    }

    #[test]
    fn inherited_attributes_come_from_the_tree() {
        let mut doc = parse(&minimal_pdf()).unwrap();
        let media = doc.page_dict_mut(0).unwrap().remove("MediaBox").unwrap();
        let tree = doc.catalog().get("Pages").unwrap().as_reference().unwrap();
        doc.get_dict_mut(tree)
            .unwrap()
            .set("MediaBox", media.clone());
        let view = doc.page_view(0).unwrap();
        assert_eq!(view.media_box, Some(media.clone()));
        assert!(!view.dict.contains_key("MediaBox"));
        assert_eq!(view.effective_dict().get("MediaBox"), Some(&media));
    }
}
