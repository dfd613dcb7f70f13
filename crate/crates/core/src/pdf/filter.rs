//! Stream filter decoding.
//!
//! Only `FlateDecode` (with optional PNG predictors) is decoded. Image codecs
//! that are the last filter in a chain (`DCTDecode`, `JPXDecode`,
//! `JBIG2Decode`, `CCITTFaxDecode`) are passed through, since their encoded
//! form is the image data itself. Anything else is rejected.

use std::borrow::Cow;
use std::io::{Read, Write};

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use super::object::{Dictionary, PdfObject, Stream};
use crate::error::{Error, Result};

const PASS_THROUGH: &[&[u8]] = &[
    b"DCTDecode",
    b"JPXDecode",
    b"JBIG2Decode",
    b"CCITTFaxDecode",
];

fn filter_chain(dict: &Dictionary) -> Result<Vec<(Vec<u8>, Option<&Dictionary>)>> {
    let filters: Vec<&[u8]> = match dict.get("Filter") {
        None | Some(PdfObject::Null) => return Ok(Vec::new()),
        Some(PdfObject::Name(n)) => vec![n.as_bytes()],
        Some(PdfObject::Array(items)) => items
            .iter()
            .map(|o| {
                o.as_name()
                    .ok_or_else(|| Error::UnsupportedFilter("non-name entry in /Filter".into()))
            })
            .collect::<Result<_>>()?,
        Some(_) => {
            return Err(Error::UnsupportedFilter(
                "indirect or malformed /Filter".into(),
            ))
        }
    };
    let parms: Vec<Option<&Dictionary>> = match dict.get("DecodeParms") {
        Some(PdfObject::Dictionary(d)) => vec![Some(d)],
        Some(PdfObject::Array(items)) => items
            .iter()
            .map(|o| match o {
                PdfObject::Dictionary(d) => Some(d),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    };
    Ok(filters
        .into_iter()
        .enumerate()
        .map(|(i, f)| (f.to_vec(), parms.get(i).copied().flatten()))
        .collect())
}

/// Returns the decoded payload of `stream`.
pub fn decode_stream(stream: &Stream) -> Result<Cow<'_, [u8]>> {
    let chain = filter_chain(&stream.dict)?;
    let mut data = Cow::Borrowed(stream.raw());
    let last = chain.len().saturating_sub(1);
    for (i, (filter, parms)) in chain.iter().enumerate() {
        match filter.as_slice() {
            b"FlateDecode" | b"Fl" => {
                let inflated = inflate(&data)?;
                data = Cow::Owned(apply_predictor(inflated, *parms)?);
            }
            f if i == last && PASS_THROUGH.contains(&f) => break,
            f => {
                return Err(Error::UnsupportedFilter(
                    String::from_utf8_lossy(f).into_owned(),
                ))
            }
        }
    }
    Ok(data)
}

fn inflate(data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match ZlibDecoder::new(data).read_to_end(&mut out) {
        Ok(_) => Ok(out),
        // Producers often omit the adler32 trailer; keep what was inflated.
        Err(_) if !out.is_empty() => Ok(out),
        Err(e) => Err(Error::malformed(format!("corrupt FlateDecode stream: {e}"))),
    }
}

fn parm(parms: Option<&Dictionary>, key: &str, default: i64) -> i64 {
    parms
        .and_then(|p| p.get(key))
        .and_then(PdfObject::as_integer)
        .unwrap_or(default)
}

fn apply_predictor(data: Vec<u8>, parms: Option<&Dictionary>) -> Result<Vec<u8>> {
    let predictor = parm(parms, "Predictor", 1);
    match predictor {
        1 => Ok(data),
        2 => Err(Error::UnsupportedFilter(
            "FlateDecode with TIFF predictor".into(),
        )),
        10..=15 => {
            let colors = parm(parms, "Colors", 1).max(1) as usize;
            let bpc = parm(parms, "BitsPerComponent", 8).max(1) as usize;
            let columns = parm(parms, "Columns", 1).max(1) as usize;
            Ok(png_unfilter(&data, colors, bpc, columns))
        }
        p => Err(Error::UnsupportedFilter(format!(
            "FlateDecode predictor {p}"
        ))),
    }
}

fn png_unfilter(data: &[u8], colors: usize, bpc: usize, columns: usize) -> Vec<u8> {
    let bpp = (colors * bpc).div_ceil(8).max(1);
    let row_len = (colors * bpc * columns).div_ceil(8);
    let mut out = Vec::with_capacity(data.len());
    let mut prev = vec![0u8; row_len];
    for row in data.chunks(row_len + 1) {
        let Some((&kind, encoded)) = row.split_first() else {
            break;
        };
        let mut cur = encoded.to_vec();
        cur.resize(row_len, 0);
        for i in 0..row_len {
            let left = if i >= bpp { cur[i - bpp] } else { 0 };
            let up = prev[i];
            let up_left = if i >= bpp { prev[i - bpp] } else { 0 };
            let pred = match kind {
                1 => left,
                2 => up,
                3 => ((left as u16 + up as u16) / 2) as u8,
                4 => paeth(left, up, up_left),
                _ => 0,
            };
            cur[i] = cur[i].wrapping_add(pred);
        }
        out.extend_from_slice(&cur[..encoded.len().min(row_len)]);
        prev = cur;
    }
    out
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = a as i16 + b as i16 - c as i16;
    let pa = (p - a as i16).abs();
    let pb = (p - b as i16).abs();
    let pc = (p - c as i16).abs();
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}

/// zlib-compresses `data` at a fixed level, so output is deterministic.
pub fn flate_encode(data: &[u8]) -> Vec<u8> {
    let mut enc = ZlibEncoder::new(Vec::new(), Compression::new(6));
    enc.write_all(data).expect("writing to Vec cannot fail");
    enc.finish().expect("writing to Vec cannot fail")
}
