//! Synthetic documents and scripted tampering.
//!
//! [`make_baseline`] produces deterministic multi-page documents with text
//! and one small image per page. [`apply_tamper`] reproduces the kinds of
//! edits a PDF editor makes: text added, changed or removed; images added,
//! swapped or removed; metadata edits; and an incremental update that
//! silently redefines a page's content stream.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::assess::strip_keys;
use crate::error::{Error, Result};
use crate::pdf::{
    decode_stream, flate_encode, parse, write, write_incremental, Dictionary, ObjectId,
    PdfDocument, PdfObject, Stream,
};
use crate::protect::protect;

const IMAGE_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineOptions {
    pub pages: usize,
    pub paragraphs_per_page: usize,
    /// FlateDecode content and image streams.
    pub compressed: bool,
    pub with_info: bool,
    /// Insert dictionary keys in reverse order, as a different producer might.
    pub reversed_keys: bool,
}

impl BaselineOptions {
    pub fn new(pages: usize, paragraphs_per_page: usize) -> Self {
        Self {
            pages,
            paragraphs_per_page,
            compressed: false,
            with_info: true,
            reversed_keys: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TamperKind {
    TextAdd,
    TextUpdate,
    TextDelete,
    ImageAdd,
    ImageReplace,
    ImageDelete,
    MetaAdd,
    MetaUpdate,
    IncrementalContentSwap,
    StripHashes,
}

impl TamperKind {
    pub const ALL: [TamperKind; 10] = [
        TamperKind::TextAdd,
        TamperKind::TextUpdate,
        TamperKind::TextDelete,
        TamperKind::ImageAdd,
        TamperKind::ImageReplace,
        TamperKind::ImageDelete,
        TamperKind::MetaAdd,
        TamperKind::MetaUpdate,
        TamperKind::IncrementalContentSwap,
        TamperKind::StripHashes,
    ];

    /// Whether the kind operates on specific pages.
    pub fn targets_pages(self) -> bool {
        !matches!(
            self,
            TamperKind::MetaAdd | TamperKind::MetaUpdate | TamperKind::StripHashes
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// Use the kind's built-in default.
    Default,
    Text(String),
    Image(Vec<u8>),
    Meta(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamperSpec {
    pub kind: TamperKind,
    /// 1-based page numbers.
    pub target_pages: Vec<usize>,
    pub payload: Payload,
}

impl TamperSpec {
    pub fn new(kind: TamperKind, target_pages: impl Into<Vec<usize>>) -> Self {
        Self {
            kind,
            target_pages: target_pages.into(),
            payload: Payload::Default,
        }
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = payload;
        self
    }

    fn text(&self, default: &str) -> String {
        match &self.payload {
            Payload::Text(t) => t.clone(),
            _ => default.to_string(),
        }
    }
}

fn dict_from(entries: Vec<(&str, PdfObject)>, reversed: bool) -> Dictionary {
    let mut entries = entries;
    if reversed {
        entries.reverse();
    }
    entries.into_iter().collect()
}

fn make_stream(dict: Dictionary, data: Vec<u8>, compressed: bool) -> Stream {
    if compressed {
        let mut dict = dict;
        dict.set("Filter", PdfObject::name("FlateDecode"));
        Stream::new(dict, flate_encode(&data))
    } else {
        Stream::new(dict, data)
    }
}

fn paragraph(page: usize, index: usize) -> String {
    format!(
        "BT /F1 11 Tf 72 {} Td (Page {page}, paragraph {index}: the parties agree that clause {page}.{index} \
         remains in force until the delivery schedule in annex {index} is complete.) Tj ET\n",
        720 - 16 * index as i64
    )
}

fn baseline_image(page: usize) -> Vec<u8> {
    (0..IMAGE_SIDE * IMAGE_SIDE)
        .map(|i| ((i * 7 + page * 13) % 256) as u8)
        .collect()
}

fn image_stream(data: Vec<u8>, compressed: bool, reversed: bool) -> Stream {
    let side = PdfObject::Integer(IMAGE_SIDE as i64);
    let dict = dict_from(
        vec![
            ("Type", PdfObject::name("XObject")),
            ("Subtype", PdfObject::name("Image")),
            ("Width", side.clone()),
            ("Height", side),
            ("ColorSpace", PdfObject::name("DeviceGray")),
            ("BitsPerComponent", PdfObject::Integer(8)),
        ],
        reversed,
    );
    make_stream(dict, data, compressed)
}

/// A deterministic document with `pages` pages of `paragraphs_per_page`
/// text paragraphs and one image each.
pub fn make_baseline(pages: usize, paragraphs_per_page: usize) -> PdfDocument {
    make_baseline_with(&BaselineOptions::new(pages, paragraphs_per_page))
}

pub fn make_baseline_with(opts: &BaselineOptions) -> PdfDocument {
    let rev = opts.reversed_keys;
    let catalog_id = ObjectId::new(1, 0);
    let tree_id = ObjectId::new(2, 0);
    let font_id = ObjectId::new(3, 0);
    let info_id = ObjectId::new(4, 0);
    let mut objects = BTreeMap::new();

    objects.insert(
        font_id,
        PdfObject::Dictionary(dict_from(
            vec![
                ("Type", PdfObject::name("Font")),
                ("Subtype", PdfObject::name("Type1")),
                ("BaseFont", PdfObject::name("Helvetica")),
            ],
            rev,
        )),
    );
    if opts.with_info {
        objects.insert(
            info_id,
            PdfObject::Dictionary(dict_from(
                vec![
                    ("Title", PdfObject::string("Synthetic agreement")),
                    ("Author", PdfObject::string("tamperlab")),
                    ("Producer", PdfObject::string("pagehash tamperlab")),
                    ("CreationDate", PdfObject::string("D:20240101000000Z")),
                ],
                rev,
            )),
        );
    }

    let mut kids = Vec::with_capacity(opts.pages);
    for p in 1..=opts.pages {
        let base = 5 + 3 * (p as u32 - 1);
        let (page_id, content_id, image_id) = (
            ObjectId::new(base, 0),
            ObjectId::new(base + 1, 0),
            ObjectId::new(base + 2, 0),
        );

        let mut content: String = (0..opts.paragraphs_per_page)
            .map(|i| paragraph(p, i))
            .collect();
        content.push_str("q 64 0 0 64 400 80 cm /Im1 Do Q\n");
        objects.insert(
            content_id,
            PdfObject::Stream(make_stream(
                Dictionary::new(),
                content.into_bytes(),
                opts.compressed,
            )),
        );
        objects.insert(
            image_id,
            PdfObject::Stream(image_stream(baseline_image(p), opts.compressed, rev)),
        );

        let fonts: Dictionary = [("F1", PdfObject::Reference(font_id))]
            .into_iter()
            .collect();
        let xobjects: Dictionary = [("Im1", PdfObject::Reference(image_id))]
            .into_iter()
            .collect();
        let resources = dict_from(
            vec![
                ("Font", PdfObject::Dictionary(fonts)),
                ("XObject", PdfObject::Dictionary(xobjects)),
            ],
            rev,
        );
        let media_box = [0i64, 0, 612, 792].map(PdfObject::Integer).to_vec();
        let page = dict_from(
            vec![
                ("Type", PdfObject::name("Page")),
                ("Parent", PdfObject::Reference(tree_id)),
                ("MediaBox", PdfObject::Array(media_box)),
                ("Resources", PdfObject::Dictionary(resources)),
                ("Contents", PdfObject::Reference(content_id)),
            ],
            rev,
        );
        objects.insert(page_id, PdfObject::Dictionary(page));
        kids.push(PdfObject::Reference(page_id));
    }

    objects.insert(
        tree_id,
        PdfObject::Dictionary(dict_from(
            vec![
                ("Type", PdfObject::name("Pages")),
                ("Kids", PdfObject::Array(kids)),
                ("Count", PdfObject::Integer(opts.pages as i64)),
            ],
            rev,
        )),
    );
    objects.insert(
        catalog_id,
        PdfObject::Dictionary(dict_from(
            vec![
                ("Type", PdfObject::name("Catalog")),
                ("Pages", PdfObject::Reference(tree_id)),
            ],
            rev,
        )),
    );

    let mut trailer = Dictionary::new();
    trailer.set("Root", PdfObject::Reference(catalog_id));
    if opts.with_info {
        trailer.set("Info", PdfObject::Reference(info_id));
    }
    PdfDocument::assemble((1, 7), objects, trailer).expect("generated document is well-formed")
}

fn page_index(doc: &PdfDocument, page: usize) -> Result<usize> {
    if page == 0 || page > doc.page_count() {
        return Err(Error::InvalidTarget(format!(
            "page {page} (document has {} pages)",
            doc.page_count()
        )));
    }
    Ok(page - 1)
}

fn is_flate(stream: &Stream) -> bool {
    stream.dict.get("Filter").is_some_and(|f| match f {
        PdfObject::Name(n) => n.as_bytes() == b"FlateDecode",
        PdfObject::Array(a) => a.iter().any(|x| x.as_name() == Some(b"FlateDecode")),
        _ => false,
    })
}

/// The page content stream replaced by `content`, preserving whether it was
/// compressed. The result is written to the first content stream object and
/// the page's `/Contents` is pointed at it alone.
pub fn replace_page_content(doc: &mut PdfDocument, index: usize, content: Vec<u8>) -> Result<()> {
    let ids = doc.content_stream_ids(index)?;
    match ids.first() {
        Some(&id) => {
            let compressed = doc
                .get(id)
                .and_then(PdfObject::as_stream)
                .is_some_and(is_flate);
            let dict = doc
                .get(id)
                .and_then(PdfObject::as_stream)
                .map(|s| s.dict.clone())
                .unwrap_or_default();
            let mut stream = Stream::new(dict, Vec::new());
            if compressed {
                stream.set_raw(flate_encode(&content));
            } else {
                stream.set_plain(content);
            }
            doc.objects.insert(id, PdfObject::Stream(stream));
            if ids.len() > 1 {
                doc.page_dict_mut(index)?
                    .set("Contents", PdfObject::Reference(id));
            }
        }
        None => {
            let id = doc.add_object(Stream::new(Dictionary::new(), content));
            doc.page_dict_mut(index)?
                .set("Contents", PdfObject::Reference(id));
        }
    }
    Ok(())
}

/// Length-preserving rewrite of the first literal string in `content`.
fn rewrite_first_string(content: &[u8], text: &str) -> Option<Vec<u8>> {
    let open = content.iter().position(|&b| b == b'(')?;
    let close = open + content[open..].iter().position(|&b| b == b')')?;
    let mut out = content.to_vec();
    let inner = &mut out[open + 1..close];
    if inner.is_empty() {
        return None;
    }
    let replacement = text.as_bytes();
    for (i, b) in inner.iter_mut().enumerate() {
        let r = replacement[i % replacement.len().max(1)];
        let r = if matches!(r, b'(' | b')' | b'\\') {
            b'X'
        } else {
            r
        };
        *b = if *b == r {
            if r == b'X' {
                b'Y'
            } else {
                b'X'
            }
        } else {
            r
        };
    }
    Some(out)
}

fn remove_last_line(content: &[u8], pred: impl Fn(&[u8]) -> bool) -> Option<Vec<u8>> {
    let lines: Vec<&[u8]> = content.split_inclusive(|&b| b == b'\n').collect();
    let idx = lines.iter().rposition(|l| pred(l))?;
    Some(
        lines
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .flat_map(|(_, l)| l.iter().copied())
            .collect(),
    )
}

/// Resources dictionary of the page, copied inline so edits stay local.
fn local_resources(doc: &mut PdfDocument, index: usize) -> Result<Dictionary> {
    let view = doc.page_view(index)?;
    let mut res = view
        .resources
        .as_ref()
        .map(|r| doc.resolve(r))
        .and_then(PdfObject::as_dict)
        .cloned()
        .unwrap_or_default();
    if let Some(x) = res.get("XObject").map(|x| doc.resolve(x).clone()) {
        res.set("XObject", x);
    }
    Ok(res)
}

fn first_image(doc: &PdfDocument, resources: &Dictionary) -> Option<(Vec<u8>, ObjectId)> {
    let xobjects = resources
        .get("XObject")
        .map(|x| doc.resolve(x))
        .and_then(PdfObject::as_dict)?;
    xobjects.iter().find_map(|(name, v)| {
        let id = v.as_reference()?;
        let stream = doc.get(id)?.as_stream()?;
        (stream.dict.get("Subtype").and_then(PdfObject::as_name) == Some(b"Image"))
            .then(|| (name.as_bytes().to_vec(), id))
    })
}

fn tamper_page(doc: &mut PdfDocument, spec: &TamperSpec, index: usize) -> Result<()> {
    let content = doc.page_view(index)?.content;
    let invalid = |what: &str| Error::InvalidTarget(format!("page {}: {what}", index + 1));
    match spec.kind {
        TamperKind::TextAdd => {
            let text = spec.text("Inserted line of text");
            let mut c = content;
            if !c.is_empty() && !c.ends_with(b"\n") {
                c.push(b'\n');
            }
            c.extend_from_slice(format!("BT /F1 12 Tf 72 40 Td ({text}) Tj ET\n").as_bytes());
            replace_page_content(doc, index, c)
        }
        TamperKind::TextUpdate | TamperKind::IncrementalContentSwap => {
            let text = spec.text("ALTERED");
            let c = rewrite_first_string(&content, &text)
                .ok_or_else(|| invalid("no text to update"))?;
            replace_page_content(doc, index, c)
        }
        TamperKind::TextDelete => {
            let c = remove_last_line(&content, |l| l.starts_with(b"BT"))
                .ok_or_else(|| invalid("no text block to delete"))?;
            replace_page_content(doc, index, c)
        }
        TamperKind::ImageAdd => {
            let data = match &spec.payload {
                Payload::Image(d) => d.clone(),
                _ => (0..IMAGE_SIDE * IMAGE_SIDE)
                    .map(|i| (255 - i * 3) as u8)
                    .collect(),
            };
            let image = doc.add_object(image_stream(data, false, false));
            let mut res = local_resources(doc, index)?;
            let mut xobjects = res
                .get("XObject")
                .and_then(PdfObject::as_dict)
                .cloned()
                .unwrap_or_default();
            let name = (1..)
                .map(|n| format!("ImT{n}"))
                .find(|n| !xobjects.contains_key(n))
                .expect("unbounded");
            xobjects.set(name.as_str(), PdfObject::Reference(image));
            res.set("XObject", PdfObject::Dictionary(xobjects));
            doc.page_dict_mut(index)?
                .set("Resources", PdfObject::Dictionary(res));
            let mut c = content;
            if !c.is_empty() && !c.ends_with(b"\n") {
                c.push(b'\n');
            }
            c.extend_from_slice(format!("q 48 0 0 48 300 300 cm /{name} Do Q\n").as_bytes());
            replace_page_content(doc, index, c)
        }
        TamperKind::ImageReplace => {
            let res = local_resources(doc, index)?;
            let (_, id) = first_image(doc, &res).ok_or_else(|| invalid("no image to replace"))?;
            let stream = doc
                .get(id)
                .and_then(PdfObject::as_stream)
                .expect("found above");
            let data = match &spec.payload {
                Payload::Image(d) => d.clone(),
                _ => decode_stream(stream)?.iter().map(|b| !b).collect(),
            };
            let compressed = is_flate(stream);
            let mut replaced = stream.clone();
            if compressed {
                replaced.set_raw(flate_encode(&data));
            } else {
                replaced.set_plain(data);
            }
            doc.objects.insert(id, PdfObject::Stream(replaced));
            Ok(())
        }
        TamperKind::ImageDelete => {
            let mut res = local_resources(doc, index)?;
            let (name, _) = first_image(doc, &res).ok_or_else(|| invalid("no image to delete"))?;
            if let Some(PdfObject::Dictionary(x)) = res.get_mut("XObject") {
                x.remove(&name);
            }
            doc.page_dict_mut(index)?
                .set("Resources", PdfObject::Dictionary(res));
            let mut op = vec![b'/'];
            op.extend_from_slice(&name);
            op.extend_from_slice(b" Do");
            let c = remove_last_line(&content, |l| {
                l.windows(op.len()).any(|w| w == op.as_slice())
            })
            .unwrap_or(content);
            replace_page_content(doc, index, c)
        }
        _ => unreachable!("page-level kinds only"),
    }
}

fn tamper_info(doc: &mut PdfDocument, spec: &TamperSpec) {
    let defaults: Vec<(String, String)> = match spec.kind {
        TamperKind::MetaAdd => vec![("Subject".into(), "Added metadata".into())],
        _ => vec![
            ("Title".into(), "Altered title".into()),
            ("Author".into(), "Mallory".into()),
        ],
    };
    let pairs = match &spec.payload {
        Payload::Meta(p) => p.clone(),
        _ => defaults,
    };
    let id = match doc.info_ref.filter(|id| doc.get(*id).is_some()) {
        Some(id) => id,
        None => {
            let id = doc.add_object(Dictionary::new());
            doc.info_ref = Some(id);
            doc.trailer.set("Info", PdfObject::Reference(id));
            id
        }
    };
    let info = doc.get_dict_mut(id).expect("info exists");
    for (k, v) in pairs {
        info.set(k.as_str(), PdfObject::string(v));
    }
}

fn check_targets(doc: &PdfDocument, spec: &TamperSpec) -> Result<Vec<usize>> {
    if !spec.kind.targets_pages() {
        return Ok(Vec::new());
    }
    if spec.target_pages.is_empty() {
        return Err(Error::InvalidTarget(format!(
            "{:?} needs at least one page",
            spec.kind
        )));
    }
    spec.target_pages
        .iter()
        .map(|&p| page_index(doc, p))
        .collect()
}

/// Returns a tampered copy of `doc`.
///
/// For [`TamperKind::IncrementalContentSwap`] the document is written out, an
/// incremental update is appended, and the result is parsed again, so the
/// returned value is the final state a reader would see.
pub fn apply_tamper(doc: &PdfDocument, spec: &TamperSpec) -> Result<PdfDocument> {
    if spec.kind == TamperKind::IncrementalContentSwap {
        let bytes = write(doc)?;
        return parse(&apply_tamper_bytes(&bytes, spec)?);
    }
    let pages = check_targets(doc, spec)?;
    let mut out = doc.clone();
    match spec.kind {
        TamperKind::MetaAdd | TamperKind::MetaUpdate => tamper_info(&mut out, spec),
        TamperKind::StripHashes => out = strip_keys(&out),
        _ => {
            for index in pages {
                tamper_page(&mut out, spec, index)?;
            }
        }
    }
    Ok(out)
}

/// Tampers with a serialized document. Every kind except
/// [`TamperKind::IncrementalContentSwap`] rewrites the whole file, as an
/// editor's "save as" would; the incremental swap keeps `bytes` as a prefix.
pub fn apply_tamper_bytes(bytes: &[u8], spec: &TamperSpec) -> Result<Vec<u8>> {
    let doc = parse(bytes)?;
    if spec.kind != TamperKind::IncrementalContentSwap {
        return write(&apply_tamper(&doc, spec)?);
    }
    let pages = check_targets(&doc, spec)?;
    let mut edited = doc.clone();
    let mut updates = BTreeMap::new();
    for index in pages {
        let ids = doc.content_stream_ids(index)?;
        let Some(&id) = ids.first() else {
            return Err(Error::InvalidTarget(format!(
                "page {} has no content stream",
                index + 1
            )));
        };
        tamper_page(&mut edited, spec, index)?;
        updates.insert(id, edited.get(id).cloned().expect("content stream"));
        if ids.len() > 1 {
            let page_id = doc.page_refs[index];
            updates.insert(page_id, edited.get(page_id).cloned().expect("page"));
        }
    }
    write_incremental(bytes, &doc, &updates)
}

/// A named corpus file.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub file_name: String,
    pub description: String,
    pub bytes: Vec<u8>,
}

/// The standard corpus: an unprotected baseline, its protected copy, and one
/// tampered variant per [`TamperKind`].
pub fn corpus() -> Result<Vec<CorpusEntry>> {
    let baseline = make_baseline(3, 4);
    let (protected, _) = protect(&baseline)?;
    let protected_bytes = write(&protected)?;
    let mut entries = vec![
        CorpusEntry {
            file_name: "NoHash.pdf".into(),
            description: "3-page baseline without embedded hashes".into(),
            bytes: write(&baseline)?,
        },
        CorpusEntry {
            file_name: "Demo_hash.pdf".into(),
            description: "protected baseline, untouched".into(),
            bytes: protected_bytes.clone(),
        },
    ];
    let cases: [(&str, &str, TamperSpec); 11] = [
        (
            "TextSA_hash.pdf",
            "line of text added on page 2",
            TamperSpec::new(TamperKind::TextAdd, [2]),
        ),
        (
            "TextSU_hash.pdf",
            "text changed in place on page 2",
            TamperSpec::new(TamperKind::TextUpdate, [2]),
        ),
        (
            "TextSD_hash.pdf",
            "last paragraph removed on page 2",
            TamperSpec::new(TamperKind::TextDelete, [2]),
        ),
        (
            "ImageSA_hash.pdf",
            "image added on page 2",
            TamperSpec::new(TamperKind::ImageAdd, [2]),
        ),
        (
            "ImageMA_hash.pdf",
            "images added on pages 2 and 3",
            TamperSpec::new(TamperKind::ImageAdd, [2, 3]),
        ),
        (
            "ImageSR_hash.pdf",
            "image pixels replaced on page 2",
            TamperSpec::new(TamperKind::ImageReplace, [2]),
        ),
        (
            "ImageSD_hash.pdf",
            "image removed from page 2",
            TamperSpec::new(TamperKind::ImageDelete, [2]),
        ),
        (
            "MetaSU_hash.pdf",
            "one metadata entry added",
            TamperSpec::new(TamperKind::MetaAdd, []),
        ),
        (
            "MetaMU_hash.pdf",
            "two metadata entries updated",
            TamperSpec::new(TamperKind::MetaUpdate, []),
        ),
        (
            "IncrSwap_hash.pdf",
            "incremental update redefining page 1 content",
            TamperSpec::new(TamperKind::IncrementalContentSwap, [1]),
        ),
        (
            "Stripped_hash.pdf",
            "embedded hash keys removed",
            TamperSpec::new(TamperKind::StripHashes, []),
        ),
    ];
    for (name, description, spec) in cases {
        entries.push(CorpusEntry {
            file_name: name.into(),
            description: description.into(),
            bytes: apply_tamper_bytes(&protected_bytes, &spec)?,
        });
    }
    Ok(entries)
}

/// Writes [`corpus`] into `dir`, creating it if needed.
pub fn write_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    corpus()?
        .into_iter()
        .map(|entry| {
            let path = dir.join(&entry.file_name);
            fs::write(&path, &entry.bytes)?;
            Ok(path)
        })
        .collect()
}
