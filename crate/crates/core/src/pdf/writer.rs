//! Full-rewrite and incremental PDF serialization.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;

use super::document::PdfDocument;
use super::object::{Dictionary, ObjectId, PdfObject};
use super::xref::find_startxref;
use crate::error::{Error, Result};

/// Shortest round-trip decimal without exponent or trailing zeros.
pub(crate) fn format_real(v: f64) -> String {
    if !v.is_finite() || v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{v}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_name(out: &mut Vec<u8>, name: &[u8]) {
    out.push(b'/');
    for &b in name {
        let plain = (0x21..=0x7e).contains(&b)
            && !matches!(
                b,
                b'#' | b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%'
            );
        if plain {
            out.push(b);
        } else {
            write!(out, "#{b:02X}").expect("Vec write");
        }
    }
}

fn write_string(out: &mut Vec<u8>, s: &[u8]) {
    out.push(b'(');
    for &b in s {
        match b {
            b'(' | b')' | b'\\' => out.extend_from_slice(&[b'\\', b]),
            b'\r' => out.extend_from_slice(b"\\r"),
            _ => out.push(b),
        }
    }
    out.push(b')');
}

/// Writes `obj` in PDF syntax, rewriting references through `map`.
fn write_object(out: &mut Vec<u8>, obj: &PdfObject, map: &dyn Fn(ObjectId) -> Option<ObjectId>) {
    match obj {
        PdfObject::Null => out.extend_from_slice(b"null"),
        PdfObject::Boolean(b) => out.extend_from_slice(if *b { b"true" } else { b"false" }),
        PdfObject::Integer(i) => write!(out, "{i}").expect("Vec write"),
        PdfObject::Real(r) => out.extend_from_slice(format_real(*r).as_bytes()),
        PdfObject::String(s) => write_string(out, s),
        PdfObject::Name(n) => write_name(out, n.as_bytes()),
        PdfObject::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b' ');
                }
                write_object(out, item, map);
            }
            out.push(b']');
        }
        PdfObject::Dictionary(d) => write_dict(out, d, map),
        PdfObject::Stream(s) => {
            write_dict(out, &s.dict, map);
            out.extend_from_slice(b"\nstream\n");
            out.extend_from_slice(s.raw());
            out.extend_from_slice(b"\nendstream");
        }
        PdfObject::Reference(id) => match map(*id) {
            Some(new) => write!(out, "{} {} R", new.number, new.generation).expect("Vec write"),
            None => out.extend_from_slice(b"null"),
        },
    }
}

fn write_dict(out: &mut Vec<u8>, d: &Dictionary, map: &dyn Fn(ObjectId) -> Option<ObjectId>) {
    out.extend_from_slice(b"<<");
    for (i, (k, v)) in d.iter().enumerate() {
        if i > 0 {
            out.push(b' ');
        }
        write_name(out, k.as_bytes());
        out.push(b' ');
        write_object(out, v, map);
    }
    out.extend_from_slice(b">>");
}

fn collect_refs(obj: &PdfObject, out: &mut Vec<ObjectId>) {
    match obj {
        PdfObject::Reference(id) => out.push(*id),
        PdfObject::Array(items) => items.iter().for_each(|i| collect_refs(i, out)),
        PdfObject::Dictionary(d) => d.iter().for_each(|(_, v)| collect_refs(v, out)),
        PdfObject::Stream(s) => s.dict.iter().for_each(|(_, v)| collect_refs(v, out)),
        _ => {}
    }
}

fn check_stream_lengths(id: ObjectId, obj: &PdfObject) -> Result<()> {
    if let PdfObject::Stream(s) = obj {
        match s.dict.get("Length") {
            Some(PdfObject::Integer(n)) if *n as usize == s.raw().len() => {}
            Some(PdfObject::Reference(_)) => {}
            _ => {
                return Err(Error::WriteError(format!(
                    "stream {id} /Length does not match its {} byte payload",
                    s.raw().len()
                )))
            }
        }
    }
    Ok(())
}

fn write_xref_entry(out: &mut Vec<u8>, offset: usize) {
    write!(out, "{offset:010} 00000 n\r\n").expect("Vec write");
}

/// Serializes `doc` as a single-revision PDF with renumbered objects and one
/// classic xref table. Objects unreachable from the trailer are dropped.
pub fn write(doc: &PdfDocument) -> Result<Vec<u8>> {
    let catalog = doc
        .get(doc.root_ref)
        .and_then(PdfObject::as_dict)
        .ok_or_else(|| Error::WriteError("/Root does not resolve to a dictionary".into()))?;
    if !catalog.contains_key("Pages") {
        return Err(Error::WriteError("Catalog has no /Pages".into()));
    }

    // Breadth-first numbering from the trailer roots.
    let mut order: Vec<ObjectId> = Vec::new();
    let mut renumber: HashMap<ObjectId, ObjectId> = HashMap::new();
    let mut queue: VecDeque<ObjectId> = VecDeque::new();
    let mut roots = vec![doc.root_ref];
    roots.extend(doc.info_ref);
    for id in roots {
        queue.push_back(id);
    }
    while let Some(id) = queue.pop_front() {
        if renumber.contains_key(&id) {
            continue;
        }
        let Some(obj) = doc.get(id) else { continue };
        check_stream_lengths(id, obj)?;
        renumber.insert(id, ObjectId::new(order.len() as u32 + 1, 0));
        order.push(id);
        let mut refs = Vec::new();
        collect_refs(obj, &mut refs);
        queue.extend(refs.into_iter().filter(|r| !renumber.contains_key(r)));
    }
    let map = |id: ObjectId| renumber.get(&id).copied();

    let (major, minor) = doc.version;
    let mut out = Vec::new();
    write!(out, "%PDF-{major}.{minor}\n%\u{e2}\u{e3}\u{cf}\u{d3}\n").expect("Vec write");
    let mut offsets = Vec::with_capacity(order.len());
    for (i, id) in order.iter().enumerate() {
        offsets.push(out.len());
        writeln!(out, "{} 0 obj", i + 1).expect("Vec write");
        write_object(&mut out, &doc.objects[id], &map);
        out.extend_from_slice(b"\nendobj\n");
    }

    let xref_at = out.len();
    write!(out, "xref\n0 {}\n0000000000 65535 f\r\n", order.len() + 1).expect("Vec write");
    for off in offsets {
        write_xref_entry(&mut out, off);
    }
    let mut trailer = Dictionary::new();
    trailer.set("Size", PdfObject::Integer(order.len() as i64 + 1));
    trailer.set("Root", PdfObject::Reference(doc.root_ref));
    if let Some(info) = doc.info_ref {
        trailer.set("Info", PdfObject::Reference(info));
    }
    if let Some(id @ PdfObject::Array(_)) = doc.trailer.get("ID") {
        trailer.set("ID", id.clone());
    }
    out.extend_from_slice(b"trailer\n");
    write_dict(&mut out, &trailer, &map);
    write!(out, "\nstartxref\n{xref_at}\n%%EOF\n").expect("Vec write");
    Ok(out)
}

/// Appends an incremental-update section to `original` that redefines or adds
/// the given objects, keeping their object numbers. `doc` must be the parse
/// of `original`.
pub fn write_incremental(
    original: &[u8],
    doc: &PdfDocument,
    updates: &BTreeMap<ObjectId, PdfObject>,
) -> Result<Vec<u8>> {
    let prev = find_startxref(original)?;
    let identity = |id: ObjectId| Some(id);
    let mut out = original.to_vec();
    if !out.ends_with(b"\n") {
        out.push(b'\n');
    }
    let mut offsets = Vec::with_capacity(updates.len());
    for (id, obj) in updates {
        check_stream_lengths(*id, obj)?;
        offsets.push((*id, out.len()));
        writeln!(out, "{} {} obj", id.number, id.generation).expect("Vec write");
        write_object(&mut out, obj, &identity);
        out.extend_from_slice(b"\nendobj\n");
    }

    let xref_at = out.len();
    out.extend_from_slice(b"xref\n0 1\n0000000000 65535 f\r\n");
    for (id, off) in &offsets {
        write!(out, "{} 1\n{off:010} {:05} n\r\n", id.number, id.generation).expect("Vec write");
    }
    let max_number = doc
        .objects
        .keys()
        .chain(updates.keys())
        .map(|id| id.number)
        .max()
        .unwrap_or(0);
    let declared = doc
        .trailer
        .get("Size")
        .and_then(PdfObject::as_integer)
        .unwrap_or(0);
    let mut trailer = Dictionary::new();
    trailer.set(
        "Size",
        PdfObject::Integer(declared.max(max_number as i64 + 1)),
    );
    trailer.set("Root", PdfObject::Reference(doc.root_ref));
    if let Some(info) = doc.info_ref {
        trailer.set("Info", PdfObject::Reference(info));
    }
    if let Some(id @ PdfObject::Array(_)) = doc.trailer.get("ID") {
        trailer.set("ID", id.clone());
    }
    trailer.set("Prev", PdfObject::Integer(prev as i64));
    out.extend_from_slice(b"trailer\n");
    write_dict(&mut out, &trailer, &identity);
    write!(out, "\nstartxref\n{xref_at}\n%%EOF\n").expect("Vec write");
    Ok(out)
}
