//! Line-oriented sparse text datasets in the svmlight layout.
//!
//! ```text
//! # generator: sparse-chacha8-v1
//! # seed: 7
//! 1 3:1 7:1
//! 0 2:1
//! ```
//!
//! The first token is the label (`1`/`+1` or `0`/`-1`), followed by
//! `index:value` pairs with 1-based indices. Non-zero values become 1, zero
//! values are dropped. In memory, feature ids are 0-based.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::counters::{FeatureId, SparsePoint};
use crate::datagen::{GenConfig, GENERATOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty line")]
    Empty,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("malformed feature token {0:?}")]
    BadToken(String),
    #[error("feature index must be at least 1, got {0}")]
    ZeroIndex(u64),
    #[error("duplicate feature index {0}")]
    DuplicateIndex(u64),
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses one data line. Comment and blank lines are the reader's concern.
pub fn parse_point(line: &str) -> Result<SparsePoint, ParseError> {
    let line = line.split('#').next().unwrap_or_default();
    let mut tokens = line.split_ascii_whitespace();
    let label = match tokens.next().ok_or(ParseError::Empty)? {
        "1" | "+1" => true,
        "0" | "-1" => false,
        other => return Err(ParseError::UnknownLabel(other.to_string())),
    };
    let mut ones = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| ParseError::BadToken(tok.to_string()))?;
        if idx == "qid" {
            continue;
        }
        let idx: u64 = idx
            .parse()
            .map_err(|_| ParseError::BadToken(tok.to_string()))?;
        let val: f64 = val
            .parse()
            .map_err(|_| ParseError::BadToken(tok.to_string()))?;
        if idx == 0 {
            return Err(ParseError::ZeroIndex(idx));
        }
        if val != 0.0 {
            ones.push(idx - 1);
        }
    }
    ones.sort_unstable();
    if let Some(w) = ones.windows(2).find(|w| w[0] == w[1]) {
        return Err(ParseError::DuplicateIndex(w[0] + 1));
    }
    Ok(SparsePoint::new(ones, label).expect("sorted and deduplicated"))
}

/// `# key: value` comment lines at the top of a dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetHeader {
    pub entries: Vec<(String, String)>,
}

impl DatasetHeader {
    pub fn for_generator(config: &GenConfig) -> Self {
        let entries = [
            ("generator", GENERATOR.to_string()),
            ("seed", config.seed.to_string()),
            ("n", config.n.to_string()),
            ("d1", config.d1.to_string()),
            ("d2", config.d2.to_string()),
            ("q", config.q.to_string()),
        ];
        Self {
            entries: entries
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Declared feature count: `dims`, or `d1 + d2` for generated files.
    pub fn declared_dims(&self) -> Option<usize> {
        if let Some(d) = self.get("dims") {
            return d.parse().ok();
        }
        let d1: usize = self.get("d1")?.parse().ok()?;
        let d2: usize = self.get("d2")?.parse().ok()?;
        Some(d1 + d2)
    }

    fn absorb(&mut self, comment: &str) {
        if let Some((k, v)) = comment.split_once(':') {
            let k = k.trim();
            if !k.is_empty() && !k.contains(char::is_whitespace) {
                self.entries.push((k.to_string(), v.trim().to_string()));
            }
        }
    }
}

/// Streaming reader yielding points in file order.
///
/// Reads one line at a time into a reused buffer. Comment lines seen before
/// the first data line are collected into [`DatasetReader::header`].
pub struct DatasetReader<R> {
    source: R,
    buf: String,
    line: usize,
    header: DatasetHeader,
    in_header: bool,
}

pub fn read_dataset<R: BufRead>(source: R) -> DatasetReader<R> {
    DatasetReader {
        source,
        buf: String::new(),
        line: 0,
        header: DatasetHeader::default(),
        in_header: true,
    }
}

impl<R: BufRead> DatasetReader<R> {
    pub fn header(&self) -> &DatasetHeader {
        &self.header
    }

    /// Consumes leading comment lines so the header is available before the
    /// first point is read.
    pub fn read_header(&mut self) -> io::Result<&DatasetHeader> {
        while self.in_header {
            let chunk = self.source.fill_buf()?;
            match chunk.first() {
                Some(b'#') => {
                    self.buf.clear();
                    self.source.read_line(&mut self.buf)?;
                    self.line += 1;
                    let text = self.buf.trim_end_matches(['\n', '\r']);
                    self.header.absorb(&text[1..]);
                }
                _ => self.in_header = false,
            }
        }
        Ok(&self.header)
    }
}

impl<R: BufRead> Iterator for DatasetReader<R> {
    type Item = Result<SparsePoint, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.source.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim_end_matches(['\n', '\r']);
            let trimmed = text.trim_start();
            if let Some(comment) = trimmed.strip_prefix('#') {
                if self.in_header {
                    self.header.absorb(comment);
                }
                continue;
            }
            if trimmed.trim_end().is_empty() {
                continue;
            }
            self.in_header = false;
            return Some(parse_point(trimmed).map_err(|source| StreamError::Parse {
                line: self.line,
                source,
            }));
        }
    }
}

pub fn write_point<W: Write>(sink: &mut W, p: &SparsePoint) -> io::Result<()> {
    sink.write_all(if p.label() { b"1" } else { b"0" })?;
    for &j in p.ones() {
        write!(sink, " {}:1", j + 1)?;
    }
    sink.write_all(b"\n")
}

/// Writes the header comments, then one line per point.
pub fn write_dataset<'a, W, I>(sink: &mut W, points: I, header: &DatasetHeader) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SparsePoint>,
{
    for (k, v) in &header.entries {
        writeln!(sink, "# {k}: {v}")?;
    }
    for p in points {
        write_point(sink, p)?;
    }
    Ok(())
}

/// Fraction of ones in a `points x dims` binary matrix.
pub fn density(points: &[SparsePoint], dims: usize) -> f64 {
    let ones: usize = points.iter().map(|p| p.ones().len()).sum();
    ones as f64 / (points.len() * dims) as f64
}

/// Largest feature id seen plus one; a stand-in for `dims` when a file does
/// not declare it.
pub fn observed_dims(points: &[SparsePoint]) -> usize {
    points
        .iter()
        .filter_map(|p| p.ones().last())
        .max()
        .map_or(0, |&j: &FeatureId| j as usize + 1)
}
