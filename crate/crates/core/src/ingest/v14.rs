use std::io::{BufRead, Write};

use serde::Deserialize;

use super::{IngestError, PaperRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum InputFormat {
    #[default]
    Auto,
    Array,
    Ndjson,
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "array" => Ok(InputFormat::Array),
            "ndjson" => Ok(InputFormat::Ndjson),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseCounters {
    pub records_parsed: u64,
    pub records_skipped: u64,
    /// Largest number of bytes held for a single record.
    pub peak_record_bytes: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Str(String),
    Int(i64),
    Float(f64),
}

impl Scalar {
    fn into_id(self) -> String {
        match self {
            Scalar::Str(s) => s.trim().to_owned(),
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(f) => f.to_string(),
        }
    }

    fn as_year(&self) -> Option<i32> {
        match self {
            Scalar::Int(i) => i32::try_from(*i).ok(),
            Scalar::Float(f) if f.fract() == 0.0 => Some(*f as i32),
            Scalar::Str(s) => s.trim().parse().ok(),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
struct RawAuthor {
    #[serde(default)]
    id: Option<Scalar>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTopic {
    Name(String),
    Weighted { name: String },
}

#[derive(Deserialize)]
struct RawPaper {
    #[serde(default)]
    id: Option<Scalar>,
    #[serde(default)]
    year: Option<Scalar>,
    #[serde(default)]
    authors: Option<Vec<RawAuthor>>,
    #[serde(default)]
    fos: Option<Vec<RawTopic>>,
    #[serde(default)]
    references: Option<Vec<Scalar>>,
}

fn to_record(raw: RawPaper) -> Option<PaperRecord> {
    let paper_id = raw.id?.into_id();
    if paper_id.is_empty() {
        return None;
    }
    let year = raw.year?.as_year().filter(|&y| y > 0)?;
    let author_ids = raw
        .authors
        .unwrap_or_default()
        .into_iter()
        .filter_map(|a| {
            let id = a.id.map(Scalar::into_id).unwrap_or_default();
            if !id.is_empty() {
                return Some(id);
            }
            // v14 leaves some authors without an id; fall back to the name
            let name = a.name.unwrap_or_default();
            let name = name.trim();
            (!name.is_empty()).then(|| format!("name:{name}"))
        })
        .collect();
    let topic_names = raw
        .fos
        .unwrap_or_default()
        .into_iter()
        .map(|t| match t {
            RawTopic::Name(n) | RawTopic::Weighted { name: n } => n.trim().to_owned(),
        })
        .filter(|n| !n.is_empty())
        .collect();
    let reference_ids = raw
        .references
        .unwrap_or_default()
        .into_iter()
        .map(Scalar::into_id)
        .filter(|r| !r.is_empty())
        .collect();
    Some(PaperRecord {
        paper_id,
        year,
        author_ids,
        topic_names,
        reference_ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Detect,
    ArrayStart,
    ArrayNext,
    Lines,
    Done,
}

/// Streaming reader over a v14 dump.
///
/// Only one record is buffered at a time. Records that fail to decode, or
/// lack an id or a positive year, are skipped and counted; structural damage
/// to the enclosing array ends iteration with an error.
pub struct V14Reader<R> {
    inner: R,
    format: InputFormat,
    state: State,
    buf: Vec<u8>,
    counters: ParseCounters,
}

pub fn parse_v14_stream<R: BufRead>(inner: R, format: InputFormat) -> V14Reader<R> {
    V14Reader::new(inner, format)
}

impl<R: BufRead> V14Reader<R> {
    pub fn new(inner: R, format: InputFormat) -> Self {
        V14Reader {
            inner,
            format,
            state: State::Detect,
            buf: Vec::new(),
            counters: ParseCounters::default(),
        }
    }

    pub fn counters(&self) -> ParseCounters {
        self.counters
    }

    fn peek(&mut self) -> Result<Option<u8>, IngestError> {
        loop {
            let chunk = self.inner.fill_buf()?;
            if chunk.is_empty() {
                return Ok(None);
            }
            let skip = chunk
                .iter()
                .position(|b| !b.is_ascii_whitespace())
                .unwrap_or(chunk.len());
            if skip < chunk.len() {
                let b = chunk[skip];
                self.inner.consume(skip);
                return Ok(Some(b));
            }
            let n = chunk.len();
            self.inner.consume(n);
        }
    }

    fn detect(&mut self) -> Result<(), IngestError> {
        // UTF-8 byte order mark
        let chunk = self.inner.fill_buf()?;
        if chunk.starts_with(&[0xEF, 0xBB, 0xBF]) {
            self.inner.consume(3);
        }
        let first = self.peek()?;
        let state = match (self.format, first) {
            (_, None) => State::Done,
            (InputFormat::Auto | InputFormat::Array, Some(b'[')) => {
                self.inner.consume(1);
                State::ArrayStart
            }
            (InputFormat::Auto | InputFormat::Ndjson, Some(b'{')) => State::Lines,
            (_, Some(b)) => {
                return Err(IngestError::Structure(format!(
                    "unexpected leading byte {:?} for format {:?}",
                    b as char, self.format
                )))
            }
        };
        self.state = state;
        Ok(())
    }

    /// Copies one complete JSON value into `buf`.
    fn read_value(&mut self) -> Result<(), IngestError> {
        self.buf.clear();
        let mut depth = 0usize;
        let mut in_string = false;
        let mut escaped = false;
        loop {
            let chunk = self.inner.fill_buf()?;
            if chunk.is_empty() {
                return Err(IngestError::Structure("unterminated array element".into()));
            }
            let mut end = None;
            for (i, &b) in chunk.iter().enumerate() {
                if in_string {
                    if escaped {
                        escaped = false;
                    } else if b == b'\\' {
                        escaped = true;
                    } else if b == b'"' {
                        in_string = false;
                    }
                    continue;
                }
                match b {
                    b'"' => in_string = true,
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' if depth > 0 => {
                        depth -= 1;
                        if depth == 0 {
                            end = Some(i + 1);
                            break;
                        }
                    }
                    b',' | b']' if depth == 0 => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let take = end.unwrap_or(chunk.len());
            self.buf.extend_from_slice(&chunk[..take]);
            self.inner.consume(take);
            if end.is_some() {
                return Ok(());
            }
        }
    }

    fn decode_buf(&mut self) -> Option<PaperRecord> {
        self.counters.peak_record_bytes = self.counters.peak_record_bytes.max(self.buf.len());
        let rec = serde_json::from_slice::<RawPaper>(&self.buf).ok().and_then(to_record);
        match rec {
            Some(r) => {
                self.counters.records_parsed += 1;
                Some(r)
            }
            None => {
                self.counters.records_skipped += 1;
                None
            }
        }
    }

    fn next_array(&mut self) -> Result<Option<PaperRecord>, IngestError> {
        loop {
            match self.state {
                State::ArrayStart => match self.peek()? {
                    Some(b']') => {
                        self.inner.consume(1);
                        self.state = State::Done;
                        return Ok(None);
                    }
                    Some(_) => {}
                    None => return Err(IngestError::Structure("unterminated array".into())),
                },
                State::ArrayNext => match self.peek()? {
                    Some(b',') => self.inner.consume(1),
                    Some(b']') => {
                        self.inner.consume(1);
                        self.state = State::Done;
                        return Ok(None);
                    }
                    Some(b) => {
                        return Err(IngestError::Structure(format!(
                            "expected ',' or ']' between records, found {:?}",
                            b as char
                        )))
                    }
                    None => return Err(IngestError::Structure("unterminated array".into())),
                },
                _ => unreachable!(),
            }
            self.read_value()?;
            self.state = State::ArrayNext;
            if self.buf.iter().all(|b| b.is_ascii_whitespace()) {
                return Err(IngestError::Structure("empty array element".into()));
            }
            if let Some(r) = self.decode_buf() {
                return Ok(Some(r));
            }
        }
    }

    fn next_line(&mut self) -> Result<Option<PaperRecord>, IngestError> {
        loop {
            self.buf.clear();
            if self.inner.read_until(b'\n', &mut self.buf)? == 0 {
                self.state = State::Done;
                return Ok(None);
            }
            if self.buf.iter().all(|b| b.is_ascii_whitespace()) {
                continue;
            }
            if let Some(r) = self.decode_buf() {
                return Ok(Some(r));
            }
        }
    }

    fn advance(&mut self) -> Result<Option<PaperRecord>, IngestError> {
        if self.state == State::Detect {
            self.detect()?;
        }
        match self.state {
            State::Done => Ok(None),
            State::Lines => self.next_line(),
            _ => self.next_array(),
        }
    }
}

impl<R: BufRead> Iterator for V14Reader<R> {
    type Item = Result<PaperRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.advance() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => None,
            Err(e) => {
                self.state = State::Done;
                Some(Err(e))
            }
        }
    }
}

/// Writes records as v14-shaped newline-delimited JSON.
pub fn write_v14_ndjson<'a, W: Write>(
    records: impl IntoIterator<Item = &'a PaperRecord>,
    mut w: W,
) -> std::io::Result<()> {
    for r in records {
        let obj = serde_json::json!({
            "id": r.paper_id,
            "year": r.year,
            "authors": r.author_ids.iter().map(|a| serde_json::json!({"id": a})).collect::<Vec<_>>(),
            "fos": r.topic_names.iter().map(|t| serde_json::json!({"name": t})).collect::<Vec<_>>(),
            "references": r.reference_ids,
        });
        serde_json::to_writer(&mut w, &obj)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
