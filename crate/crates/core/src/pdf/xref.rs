//! Cross-reference sections: classic tables, xref streams, and the
//! `/Prev` chain that links incremental updates.

use std::collections::{BTreeMap, HashSet};

use super::filter::decode_stream;
use super::lexer::{rfind, Lexer};
use super::object::{Dictionary, PdfObject};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum XrefEntry {
    Free,
    InFile { offset: usize, generation: u16 },
    InObjectStream { stream: u32, index: u32 },
}

#[derive(Debug)]
pub(crate) struct XrefSection {
    pub entries: Vec<(u32, XrefEntry)>,
    pub trailer: Dictionary,
}

/// The merged view of every section, newest definition first.
#[derive(Debug, Default)]
pub(crate) struct XrefTable {
    pub entries: BTreeMap<u32, XrefEntry>,
    pub trailer: Dictionary,
}

/// Offset recorded after the last `startxref` keyword.
pub(crate) fn find_startxref(buf: &[u8]) -> Result<usize> {
    let tail_start = buf.len().saturating_sub(4096);
    let at = rfind(&buf[tail_start..], b"startxref")
        .map(|i| tail_start + i)
        .or_else(|| rfind(buf, b"startxref"))
        .ok_or_else(|| Error::malformed("missing startxref"))?;
    let mut lx = Lexer::new(buf, at + b"startxref".len());
    let offset = lx
        .read_uint()
        .map_err(|_| Error::malformed("unreadable startxref offset"))?;
    usize::try_from(offset)
        .ok()
        .filter(|&o| o < buf.len())
        .ok_or_else(|| Error::malformed("unresolvable startxref"))
}

/// Reads the section at `start` and every section reachable through
/// `/Prev` and `/XRefStm`, merging so that later updates win.
pub(crate) fn read_chain(buf: &[u8], start: usize) -> Result<XrefTable> {
    let mut table = XrefTable::default();
    let mut seen = HashSet::new();
    let mut pending = vec![start];
    let mut first = true;
    while let Some(offset) = pending.pop() {
        if !seen.insert(offset) {
            return Err(Error::malformed(
                "cyclic Prev chain in cross-reference sections",
            ));
        }
        let section = read_section(buf, offset)?;
        for (num, entry) in section.entries {
            table.entries.entry(num).or_insert(entry);
        }
        let prev = offset_entry(&section.trailer, "Prev")?;
        let stm = offset_entry(&section.trailer, "XRefStm")?;
        if first {
            table.trailer = section.trailer;
            first = false;
        } else {
            for (k, v) in section.trailer.iter() {
                if !table.trailer.contains_key(k) {
                    table.trailer.set(k.clone(), v.clone());
                }
            }
        }
        // XRefStm entries take priority over the Prev chain, so visit them first.
        if let Some(p) = prev {
            pending.push(p);
        }
        if let Some(s) = stm {
            if !seen.contains(&s) {
                pending.push(s);
            }
        }
    }
    for key in ["Prev", "XRefStm"] {
        table.trailer.remove(key);
    }
    Ok(table)
}

fn offset_entry(trailer: &Dictionary, key: &str) -> Result<Option<usize>> {
    match trailer.get(key) {
        None => Ok(None),
        Some(PdfObject::Integer(n)) => usize::try_from(*n)
            .map(Some)
            .map_err(|_| Error::malformed(format!("negative /{key} offset"))),
        Some(_) => Err(Error::malformed(format!("/{key} is not an integer"))),
    }
}

fn read_section(buf: &[u8], offset: usize) -> Result<XrefSection> {
    if offset >= buf.len() {
        return Err(Error::malformed(format!(
            "xref offset {offset} beyond end of file"
        )));
    }
    let mut lx = Lexer::new(buf, offset);
    if lx.eat_keyword(b"xref") {
        return read_classic(&mut lx);
    }
    let mut lx = Lexer::new(buf, offset);
    read_xref_stream(&mut lx)
}

fn read_classic(lx: &mut Lexer<'_>) -> Result<XrefSection> {
    let mut entries = Vec::new();
    loop {
        if lx.eat_keyword(b"trailer") {
            break;
        }
        let first = lx.read_uint()?;
        let count = lx.read_uint()?;
        for i in 0..count {
            let offset = lx.read_uint()?;
            let generation = lx.read_uint()?;
            let entry = if lx.eat_keyword(b"n") {
                XrefEntry::InFile {
                    offset: offset as usize,
                    generation: u16::try_from(generation).unwrap_or(u16::MAX),
                }
            } else if lx.eat_keyword(b"f") {
                XrefEntry::Free
            } else {
                return Err(Error::malformed("xref entry is neither 'n' nor 'f'"));
            };
            let num = u32::try_from(first + i)
                .map_err(|_| Error::malformed("object number too large in xref"))?;
            entries.push((num, entry));
        }
    }
    let trailer = match lx.parse_object()? {
        PdfObject::Dictionary(d) => d,
        _ => return Err(Error::malformed("trailer is not a dictionary")),
    };
    Ok(XrefSection { entries, trailer })
}

fn read_xref_stream(lx: &mut Lexer<'_>) -> Result<XrefSection> {
    lx.read_object_header()
        .map_err(|_| Error::malformed("startxref does not point at a cross-reference section"))?;
    let obj = lx.read_indirect_body(&|_| None)?;
    let PdfObject::Stream(stream) = obj else {
        return Err(Error::malformed("cross-reference object is not a stream"));
    };
    if !stream.dict.has_type("XRef") {
        return Err(Error::malformed("cross-reference stream lacks /Type /XRef"));
    }
    let data = decode_stream(&stream)?;
    let widths: Vec<usize> = stream
        .dict
        .get("W")
        .and_then(PdfObject::as_array)
        .ok_or_else(|| Error::malformed("xref stream without /W"))?
        .iter()
        .map(|w| w.as_integer().and_then(|w| usize::try_from(w).ok()))
        .collect::<Option<_>>()
        .filter(|w: &Vec<usize>| w.len() == 3 && w.iter().all(|&x| x <= 8))
        .ok_or_else(|| Error::malformed("invalid /W in xref stream"))?;
    let size = stream
        .dict
        .get("Size")
        .and_then(PdfObject::as_integer)
        .unwrap_or(0);
    let index: Vec<i64> = match stream.dict.get("Index").and_then(PdfObject::as_array) {
        Some(items) => items.iter().filter_map(PdfObject::as_integer).collect(),
        None => vec![0, size],
    };
    let row = widths.iter().sum::<usize>();
    if row == 0 {
        return Err(Error::malformed("zero-width xref stream rows"));
    }
    let mut rows = data.chunks_exact(row);
    let mut entries = Vec::new();
    for pair in index.chunks_exact(2) {
        let (first, count) = (pair[0], pair[1]);
        for i in 0..count.max(0) {
            let Some(r) = rows.next() else {
                return Err(Error::malformed("xref stream shorter than its /Index"));
            };
            let (a, rest) = r.split_at(widths[0]);
            let (b, c) = rest.split_at(widths[1]);
            let kind = if widths[0] == 0 { 1 } else { be(a) };
            let (f2, f3) = (be(b), be(c));
            let entry = match kind {
                0 => XrefEntry::Free,
                1 => XrefEntry::InFile {
                    offset: f2 as usize,
                    generation: u16::try_from(f3).unwrap_or(u16::MAX),
                },
                2 => XrefEntry::InObjectStream {
                    stream: u32::try_from(f2)
                        .map_err(|_| Error::malformed("object stream number too large"))?,
                    index: f3 as u32,
                },
                // Unknown kinds are treated as null references.
                _ => XrefEntry::Free,
            };
            let num = u32::try_from(first + i)
                .map_err(|_| Error::malformed("object number out of range in xref stream"))?;
            entries.push((num, entry));
        }
    }
    let mut trailer = stream.dict.clone();
    for key in ["Type", "W", "Index", "Length", "Filter", "DecodeParms"] {
        trailer.remove(key);
    }
    Ok(XrefSection { entries, trailer })
}

fn be(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0, |acc, &b| (acc << 8) | b as u64)
}
