//! Byte-level tokenizer and object parser.

use super::object::{Dictionary, Name, ObjectId, PdfObject, Stream};
use crate::error::{Error, Result};

const MAX_DEPTH: usize = 256;

pub(crate) fn is_whitespace(b: u8) -> bool {
    matches!(b, 0 | 9 | 10 | 12 | 13 | 32)
}

pub(crate) fn is_delimiter(b: u8) -> bool {
    matches!(
        b,
        b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%'
    )
}

fn is_regular(b: u8) -> bool {
    !is_whitespace(b) && !is_delimiter(b)
}

pub(crate) struct Lexer<'a> {
    buf: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(buf: &'a [u8], pos: usize) -> Self {
        Self { buf, pos }
    }

    fn peek(&self) -> Option<u8> {
        self.buf.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::malformed(format!("{what} at offset {}", self.pos))
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(b) = self.peek() {
            if is_whitespace(b) {
                self.pos += 1;
            } else if b == b'%' {
                while let Some(c) = self.peek() {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Next run of regular characters, without consuming leading whitespace.
    fn regular_token(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self.peek().is_some_and(is_regular) {
            self.pos += 1;
        }
        &self.buf[start..self.pos]
    }

    /// Consumes `kw` if it is the next token.
    pub(crate) fn eat_keyword(&mut self, kw: &[u8]) -> bool {
        self.skip_ws();
        let rest = &self.buf[self.pos..];
        if rest.starts_with(kw) && rest.get(kw.len()).is_none_or(|&b| !is_regular(b)) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &[u8]) -> Result<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", String::from_utf8_lossy(kw))))
        }
    }

    /// Reads an unsigned decimal integer token.
    pub(crate) fn read_uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos || self.peek().is_some_and(is_regular) {
            self.pos = start;
            return Err(self.err("expected unsigned integer"));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("integer overflow"))
    }

    /// Parses `n g obj`, returning the object id.
    pub(crate) fn read_object_header(&mut self) -> Result<ObjectId> {
        let number = self.read_uint()?;
        let generation = self.read_uint()?;
        self.expect_keyword(b"obj")?;
        let number = u32::try_from(number).map_err(|_| self.err("object number too large"))?;
        let generation =
            u16::try_from(generation).map_err(|_| self.err("generation number too large"))?;
        if number == 0 {
            return Err(self.err("object number 0"));
        }
        Ok(ObjectId::new(number, generation))
    }

    /// Parses a complete indirect object body following its header. Stream
    /// lengths given by reference are looked up through `length_of`.
    pub(crate) fn read_indirect_body(
        &mut self,
        length_of: &dyn Fn(ObjectId) -> Option<i64>,
    ) -> Result<PdfObject> {
        let obj = self.parse_object()?;
        let PdfObject::Dictionary(dict) = obj else {
            return Ok(obj);
        };
        if !self.eat_keyword(b"stream") {
            return Ok(PdfObject::Dictionary(dict));
        }
        // The keyword is followed by CRLF or LF (tolerate a lone CR).
        match self.peek() {
            Some(b'\r') => {
                self.pos += 1;
                if self.peek() == Some(b'\n') {
                    self.pos += 1;
                }
            }
            Some(b'\n') => self.pos += 1,
            _ => {}
        }
        let start = self.pos;
        let declared = match dict.get("Length") {
            Some(PdfObject::Integer(n)) => Some(*n),
            Some(PdfObject::Reference(id)) => length_of(*id),
            _ => None,
        };
        let end = declared
            .and_then(|n| usize::try_from(n).ok())
            .and_then(|n| start.checked_add(n))
            .filter(|&end| end <= self.buf.len() && self.endstream_follows(end))
            .map_or_else(|| self.scan_endstream(start), Ok)?;
        let data = self.buf[start..end].to_vec();
        self.pos = end;
        self.expect_keyword(b"endstream")?;
        Ok(PdfObject::Stream(Stream::new(dict, data)))
    }

    fn endstream_follows(&self, end: usize) -> bool {
        let mut l = Lexer::new(self.buf, end);
        l.eat_keyword(b"endstream")
    }

    /// Fallback when /Length is missing or wrong: the payload ends at the EOL
    /// preceding the next `endstream`.
    fn scan_endstream(&self, start: usize) -> Result<usize> {
        let hay = &self.buf[start..];
        let idx = find(hay, b"endstream").ok_or_else(|| self.err("truncated stream"))?;
        let mut end = start + idx;
        if end > start && self.buf[end - 1] == b'\n' {
            end -= 1;
        }
        if end > start && self.buf[end - 1] == b'\r' {
            end -= 1;
        }
        Ok(end)
    }

    pub(crate) fn parse_object(&mut self) -> Result<PdfObject> {
        self.parse_nested(0)
    }

    fn parse_nested(&mut self, depth: usize) -> Result<PdfObject> {
        if depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        self.skip_ws();
        let Some(b) = self.peek() else {
            return Err(self.err("unexpected end of input"));
        };
        match b {
            b'/' => {
                self.pos += 1;
                Ok(PdfObject::Name(self.read_name_body()))
            }
            b'(' => self.read_literal_string().map(PdfObject::String),
            b'<' if self.buf.get(self.pos + 1) == Some(&b'<') => {
                self.pos += 2;
                self.read_dict_body(depth).map(PdfObject::Dictionary)
            }
            b'<' => self.read_hex_string().map(PdfObject::String),
            b'[' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b']') => {
                            self.pos += 1;
                            break;
                        }
                        None => return Err(self.err("unterminated array")),
                        _ => items.push(self.parse_nested(depth + 1)?),
                    }
                }
                Ok(PdfObject::Array(items))
            }
            b'+' | b'-' | b'.' | b'0'..=b'9' => self.read_number_or_reference(),
            _ => {
                let start = self.pos;
                match self.regular_token() {
                    b"true" => Ok(PdfObject::Boolean(true)),
                    b"false" => Ok(PdfObject::Boolean(false)),
                    b"null" => Ok(PdfObject::Null),
                    _ => {
                        self.pos = start;
                        Err(self.err("unexpected token"))
                    }
                }
            }
        }
    }

    fn read_dict_body(&mut self, depth: usize) -> Result<Dictionary> {
        let mut dict = Dictionary::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'>') if self.buf.get(self.pos + 1) == Some(&b'>') => {
                    self.pos += 2;
                    return Ok(dict);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let key = self.read_name_body();
                    let value = self.parse_nested(depth + 1)?;
                    dict.set(key, value);
                }
                None => return Err(self.err("unterminated dictionary")),
                _ => return Err(self.err("dictionary key is not a name")),
            }
        }
    }

    fn read_name_body(&mut self) -> Name {
        let raw = self.regular_token();
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            if raw[i] == b'#' && i + 2 < raw.len() {
                if let Some(v) = hex_pair(raw[i + 1], raw[i + 2]) {
                    out.push(v);
                    i += 3;
                    continue;
                }
            }
            out.push(raw[i]);
            i += 1;
        }
        Name(out)
    }

    fn read_literal_string(&mut self) -> Result<Vec<u8>> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut depth = 1usize;
        loop {
            let Some(b) = self.peek() else {
                return Err(self.err("unterminated string"));
            };
            self.pos += 1;
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(out);
                    }
                    out.push(b);
                }
                b'\r' => {
                    if self.peek() == Some(b'\n') {
                        self.pos += 1;
                    }
                    out.push(b'\n');
                }
                b'\\' => {
                    let Some(e) = self.peek() else {
                        return Err(self.err("unterminated string"));
                    };
                    self.pos += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(0x08),
                        b'f' => out.push(0x0c),
                        b'0'..=b'7' => {
                            let mut v = (e - b'0') as u32;
                            for _ in 0..2 {
                                match self.peek() {
                                    Some(d @ b'0'..=b'7') => {
                                        v = v * 8 + (d - b'0') as u32;
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push(v as u8);
                        }
                        b'\r' => {
                            if self.peek() == Some(b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'\n' => {}
                        other => out.push(other),
                    }
                }
                _ => out.push(b),
            }
        }
    }

    fn read_hex_string(&mut self) -> Result<Vec<u8>> {
        self.pos += 1;
        let mut digits = Vec::new();
        loop {
            let Some(b) = self.peek() else {
                return Err(self.err("unterminated hex string"));
            };
            self.pos += 1;
            match b {
                b'>' => break,
                b if b.is_ascii_hexdigit() => digits.push(b),
                b if is_whitespace(b) => {}
                _ => return Err(self.err("invalid hex string digit")),
            }
        }
        if digits.len() % 2 == 1 {
            digits.push(b'0');
        }
        Ok(digits
            .chunks(2)
            .map(|p| hex_pair(p[0], p[1]).expect("validated hex digits"))
            .collect())
    }

    fn read_number_or_reference(&mut self) -> Result<PdfObject> {
        let start = self.pos;
        let token = self.regular_token();
        let text = std::str::from_utf8(token).map_err(|_| self.err("invalid number"))?;
        let is_int = !text.contains('.');
        if is_int {
            if let Ok(n) = text.parse::<i64>() {
                if n >= 1 && !text.starts_with('+') {
                    if let Some(id) = self.try_reference_tail(n) {
                        return Ok(PdfObject::Reference(id));
                    }
                }
                return Ok(PdfObject::Integer(n));
            }
        }
        parse_real(text).map(PdfObject::Real).ok_or_else(|| {
            self.pos = start;
            self.err("invalid number")
        })
    }

    /// After an integer, looks ahead for `g R`; restores position on failure.
    fn try_reference_tail(&mut self, number: i64) -> Option<ObjectId> {
        let save = self.pos;
        let result = (|| {
            self.skip_ws();
            let gstart = self.pos;
            let gen = self.regular_token();
            if gen.is_empty() || !gen.iter().all(u8::is_ascii_digit) || self.pos == gstart {
                return None;
            }
            let gen: u16 = std::str::from_utf8(gen).ok()?.parse().ok()?;
            self.skip_ws();
            if self.regular_token() != b"R" {
                return None;
            }
            Some(ObjectId::new(u32::try_from(number).ok()?, gen))
        })();
        if result.is_none() {
            self.pos = save;
        }
        result
    }
}

fn parse_real(text: &str) -> Option<f64> {
    // PDF reals have no exponent part; "4." and ".5" are both legal.
    let (negative, digits) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    if digits.is_empty()
        || !digits.bytes().all(|b| b.is_ascii_digit() || b == b'.')
        || digits.bytes().filter(|&b| b == b'.').count() > 1
    {
        return None;
    }
    let v: f64 = match digits.trim_end_matches('.') {
        "" => 0.0,
        d => d.parse().ok()?,
    };
    Some(if negative { -v } else { v })
}

fn hex_pair(hi: u8, lo: u8) -> Option<u8> {
    let h = (hi as char).to_digit(16)?;
    let l = (lo as char).to_digit(16)?;
    Some((h * 16 + l) as u8)
}

pub(crate) fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

pub(crate) fn rfind(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).rposition(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> PdfObject {
        Lexer::new(src.as_bytes(), 0).parse_object().unwrap()
    }

    #[test]
    fn scalars() {
        assert_eq!(parse("null"), PdfObject::Null);
        assert_eq!(parse("true"), PdfObject::Boolean(true));
        assert_eq!(parse("-42"), PdfObject::Integer(-42));
        assert_eq!(parse("+17"), PdfObject::Integer(17));
        assert_eq!(parse("3.25"), PdfObject::Real(3.25));
        assert_eq!(parse("-.5"), PdfObject::Real(-0.5));
        assert_eq!(parse("4."), PdfObject::Real(4.0));
    }

    #[test]
    fn references_need_full_tail() {
        assert_eq!(parse("12 0 R"), PdfObject::reference(12, 0));
        // "2 3 0 R": 2 is a plain integer, then 3 0 R
        assert_eq!(
            parse("[2 3 0 R]"),
            PdfObject::Array(vec![PdfObject::Integer(2), PdfObject::reference(3, 0)])
        );
    }

    #[test]
    fn names_decode_hex_escapes() {
        assert_eq!(parse("/A#20B"), PdfObject::Name(Name(b"A B".to_vec())));
        assert_eq!(parse("/Type/Page").as_name(), Some(&b"Type"[..]));
    }

    #[test]
    fn literal_strings() {
        assert_eq!(parse("(a(b)c)"), PdfObject::string("a(b)c"));
        assert_eq!(parse(r"(x\)y\\z)"), PdfObject::string(r"x)y\z"));
        assert_eq!(parse(r"(\101\102)"), PdfObject::string("AB"));
        assert_eq!(parse("(l1\r\nl2)"), PdfObject::string("l1\nl2"));
        assert_eq!(parse("(split\\\nline)"), PdfObject::string("splitline"));
    }

    #[test]
    fn hex_strings() {
        assert_eq!(parse("<48 65 6c6C6f>"), PdfObject::string("Hello"));
        assert_eq!(parse("<414>"), PdfObject::string(b"A@"));
    }

    #[test]
    fn dictionaries_keep_file_order() {
        let obj = parse("<< /Type /Page /Rotate 90 /Kids [1 0 R] % comment\n >>");
        let d = obj.as_dict().unwrap();
        let keys: Vec<_> = d.iter().map(|(k, _)| k.as_bytes().to_vec()).collect();
        assert_eq!(
            keys,
            vec![b"Type".to_vec(), b"Rotate".to_vec(), b"Kids".to_vec()]
        );
        assert_eq!(d.get("Rotate"), Some(&PdfObject::Integer(90)));
    }

    #[test]
    fn stream_with_wrong_length_falls_back_to_scan() {
        let src = b"<< /Length 99 >>\nstream\nhello\nendstream";
        let mut l = Lexer::new(src, 0);
        let obj = l.read_indirect_body(&|_| None).unwrap();
        let s = obj.as_stream().unwrap();
        assert_eq!(s.raw(), b"hello");
        assert_eq!(s.dict.get("Length"), Some(&PdfObject::Integer(5)));
    }

    #[test]
    fn stream_with_indirect_length() {
        let src = b"<< /Length 7 0 R >>\r\nstream\r\nab\ncd\r\nendstream";
        let mut l = Lexer::new(src, 0);
        let obj = l
            .read_indirect_body(&|id| (id.number == 7).then_some(5))
            .unwrap();
        assert_eq!(obj.as_stream().unwrap().raw(), b"ab\ncd");
    }

    #[test]
    fn garbage_is_an_error() {
        assert!(Lexer::new(b"<< /A ", 0).parse_object().is_err());
        assert!(Lexer::new(b"@@", 0).parse_object().is_err());
        assert!(Lexer::new(b"(open", 0).parse_object().is_err());
    }
}
