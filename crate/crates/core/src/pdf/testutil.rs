//! Hand-assembled PDF fixtures for unit tests.

use super::xref::find_startxref;

/// Lays out numbered object bodies with a classic xref table.
pub(crate) fn classic_pdf(version: &str, objects: &[(u32, &[u8])], trailer: &str) -> Vec<u8> {
    let mut out = format!("%PDF-{version}\n%\u{e2}\u{e3}\n").into_bytes();
    let mut offsets = Vec::new();
    for (num, body) in objects {
        offsets.push((*num, out.len()));
        out.extend_from_slice(format!("{num} 0 obj\n").as_bytes());
        out.extend_from_slice(body);
        out.extend_from_slice(b"\nendobj\n");
    }
    let size = objects.iter().map(|(n, _)| n + 1).max().unwrap_or(1);
    let xref_at = out.len();
    out.extend_from_slice(format!("xref\n0 {size}\n0000000000 65535 f\r\n").as_bytes());
    for num in 1..size {
        match offsets.iter().find(|(n, _)| *n == num) {
            Some((_, off)) => out.extend_from_slice(format!("{off:010} 00000 n\r\n").as_bytes()),
            None => out.extend_from_slice(b"0000000000 65535 f\r\n"),
        }
    }
    out.extend_from_slice(
        format!("trailer\n<< /Size {size} {trailer} >>\nstartxref\n{xref_at}\n%%EOF\n").as_bytes(),
    );
    out
}

pub(crate) const HELLO: &[u8] = b"BT /F1 12 Tf (Hello) Tj ET";

pub(crate) fn minimal_pdf() -> Vec<u8> {
    let content = format!(
        "<< /Length {} >>\nstream\n{}\nendstream",
        HELLO.len(),
        std::str::from_utf8(HELLO).unwrap()
    );
    classic_pdf(
        "1.4",
        &[
            (1, b"<< /Type /Catalog /Pages 2 0 R >>"),
            (2, b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>"),
            (
                3,
                b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 4 0 R \
                  /Resources << /Font << /F1 5 0 R >> >> >>",
            ),
            (4, content.as_bytes()),
            (5, b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>"),
        ],
        "/Root 1 0 R",
    )
}

/// Appends an incremental update section redefining object `num`.
pub(crate) fn with_incremental_update(base: &[u8], num: u32, body: &[u8]) -> Vec<u8> {
    let prev = find_startxref(base).unwrap();
    let mut out = base.to_vec();
    let at = out.len();
    out.extend_from_slice(format!("{num} 0 obj\n").as_bytes());
    out.extend_from_slice(body);
    out.extend_from_slice(b"\nendobj\n");
    let xref_at = out.len();
    out.extend_from_slice(
        format!(
            "xref\n0 1\n0000000000 65535 f\r\n{num} 1\n{at:010} 00000 n\r\n\
             trailer\n<< /Size 6 /Root 1 0 R /Prev {prev} >>\nstartxref\n{xref_at}\n%%EOF\n"
        )
        .as_bytes(),
    );
    out
}
