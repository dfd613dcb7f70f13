//! In-memory PDF object model.

use std::borrow::Borrow;
use std::fmt;

use indexmap::IndexMap;

/// Object number and generation of an indirect object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId {
    pub number: u32,
    pub generation: u16,
}

impl ObjectId {
    pub const fn new(number: u32, generation: u16) -> Self {
        Self { number, generation }
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} R", self.number, self.generation)
    }
}

/// A PDF name, stored without the leading slash and with `#xx` escapes decoded.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(pub Vec<u8>);

impl Name {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name(s.as_bytes().to_vec())
    }
}

impl From<&[u8]> for Name {
    fn from(s: &[u8]) -> Self {
        Name(s.to_vec())
    }
}

impl AsRef<[u8]> for Name {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl Borrow<[u8]> for Name {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/{}", String::from_utf8_lossy(&self.0))
    }
}

/// A dictionary that remembers the order its keys were read or inserted in.
///
/// Equality ignores key order. Keys are unique; inserting an existing key
/// replaces its value in place.
#[derive(Clone, Default, PartialEq)]
pub struct Dictionary(IndexMap<Name, PdfObject>);

impl Dictionary {
    pub fn new() -> Self {
        Self(IndexMap::new())
    }

    pub fn get<K: AsRef<[u8]> + ?Sized>(&self, key: &K) -> Option<&PdfObject> {
        self.0.get(key.as_ref())
    }

    pub fn get_mut<K: AsRef<[u8]> + ?Sized>(&mut self, key: &K) -> Option<&mut PdfObject> {
        self.0.get_mut(key.as_ref())
    }

    pub fn contains_key<K: AsRef<[u8]> + ?Sized>(&self, key: &K) -> bool {
        self.0.contains_key(key.as_ref())
    }

    pub fn set(&mut self, key: impl Into<Name>, value: impl Into<PdfObject>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn remove<K: AsRef<[u8]> + ?Sized>(&mut self, key: &K) -> Option<PdfObject> {
        self.0.shift_remove(key.as_ref())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &PdfObject)> {
        self.0.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&Name, &mut PdfObject)> {
        self.0.iter_mut()
    }

    /// The `/Type` entry, if it is a name.
    pub fn type_name(&self) -> Option<&[u8]> {
        self.get("Type").and_then(PdfObject::as_name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        self.type_name() == Some(ty.as_bytes())
    }
}

impl fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

impl<K: Into<Name>> FromIterator<(K, PdfObject)> for Dictionary {
    fn from_iter<I: IntoIterator<Item = (K, PdfObject)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// A stream: its dictionary plus the raw (possibly still encoded) payload.
#[derive(Clone, PartialEq)]
pub struct Stream {
    pub dict: Dictionary,
    data: Vec<u8>,
}

impl Stream {
    /// Builds a stream and sets `/Length` to match `data`.
    pub fn new(mut dict: Dictionary, data: Vec<u8>) -> Self {
        dict.set("Length", PdfObject::Integer(data.len() as i64));
        Self { dict, data }
    }

    /// Raw payload exactly as stored in the file.
    pub fn raw(&self) -> &[u8] {
        &self.data
    }

    /// Replaces the raw payload and keeps `/Length` consistent.
    pub fn set_raw(&mut self, data: Vec<u8>) {
        self.dict
            .set("Length", PdfObject::Integer(data.len() as i64));
        self.data = data;
    }

    /// Replaces the payload with unencoded bytes, dropping any filters.
    pub fn set_plain(&mut self, data: Vec<u8>) {
        self.dict.remove("Filter");
        self.dict.remove("DecodeParms");
        self.set_raw(data);
    }

    #[cfg(test)]
    #[cfg(test)]
    /// Raw-payload constructor that trusts the caller's dictionary as-is.
    pub(crate) fn from_parts(dict: Dictionary, data: Vec<u8>) -> Self {
        Self { dict, data }
    }
}

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stream")
            .field("dict", &self.dict)
            .field("len", &self.data.len())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PdfObject {
    Null,
    Boolean(bool),
    Integer(i64),
    Real(f64),
    String(Vec<u8>),
    Name(Name),
    Array(Vec<PdfObject>),
    Dictionary(Dictionary),
    Stream(Stream),
    Reference(ObjectId),
}

impl PdfObject {
    pub fn name(s: &str) -> Self {
        PdfObject::Name(Name::from(s))
    }

    pub fn string(s: impl AsRef<[u8]>) -> Self {
        PdfObject::String(s.as_ref().to_vec())
    }

    pub fn reference(number: u32, generation: u16) -> Self {
        PdfObject::Reference(ObjectId::new(number, generation))
    }

    pub fn as_name(&self) -> Option<&[u8]> {
        match self {
            PdfObject::Name(n) => Some(n.as_bytes()),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            PdfObject::Integer(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_string(&self) -> Option<&[u8]> {
        match self {
            PdfObject::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&Vec<PdfObject>> {
        match self {
            PdfObject::Array(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_dict(&self) -> Option<&Dictionary> {
        match self {
            PdfObject::Dictionary(d) => Some(d),
            PdfObject::Stream(s) => Some(&s.dict),
            _ => None,
        }
    }

    pub fn as_dict_mut(&mut self) -> Option<&mut Dictionary> {
        match self {
            PdfObject::Dictionary(d) => Some(d),
            PdfObject::Stream(s) => Some(&mut s.dict),
            _ => None,
        }
    }

    pub fn as_stream(&self) -> Option<&Stream> {
        match self {
            PdfObject::Stream(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_reference(&self) -> Option<ObjectId> {
        match self {
            PdfObject::Reference(id) => Some(*id),
            _ => None,
        }
    }
}

impl From<bool> for PdfObject {
    fn from(v: bool) -> Self {
        PdfObject::Boolean(v)
    }
}

impl From<i64> for PdfObject {
    fn from(v: i64) -> Self {
        PdfObject::Integer(v)
    }
}

impl From<f64> for PdfObject {
    fn from(v: f64) -> Self {
        PdfObject::Real(v)
    }
}

impl From<Name> for PdfObject {
    fn from(v: Name) -> Self {
        PdfObject::Name(v)
    }
}

impl From<Vec<PdfObject>> for PdfObject {
    fn from(v: Vec<PdfObject>) -> Self {
        PdfObject::Array(v)
    }
}

impl From<Dictionary> for PdfObject {
    fn from(v: Dictionary) -> Self {
        PdfObject::Dictionary(v)
    }
}

impl From<Stream> for PdfObject {
    fn from(v: Stream) -> Self {
        PdfObject::Stream(v)
    }
}

impl From<ObjectId> for PdfObject {
    fn from(v: ObjectId) -> Self {
        PdfObject::Reference(v)
    }
}
