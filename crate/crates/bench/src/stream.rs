//! Update stream files.
//!
//! ```text
//! n 5 mode undirected eps 0.2
//! + 0 1
//! - 3 4
//! c after-delete
//! ```
//!
//! Blank lines and `#` comments are ignored. Serializing a parsed stream
//! writes the canonical form: header, then one record per line.

use std::fmt::{self, Write as _};

use dynpr::{GraphMode, VertexId};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct StreamError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Insert(VertexId, VertexId),
    Delete(VertexId, VertexId),
    Checkpoint(String),
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Insert(u, v) => write!(f, "+ {u} {v}"),
            Record::Delete(u, v) => write!(f, "- {u} {v}"),
            Record::Checkpoint(label) => write!(f, "c {label}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStream {
    pub n: usize,
    pub mode: GraphMode,
    pub eps: f64,
    pub records: Vec<Record>,
}

impl UpdateStream {
    pub fn new(n: usize, mode: GraphMode, eps: f64) -> Self {
        UpdateStream { n, mode, eps, records: Vec::new() }
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId) -> &mut Self {
        self.records.push(Record::Insert(u, v));
        self
    }

    pub fn delete(&mut self, u: VertexId, v: VertexId) -> &mut Self {
        self.records.push(Record::Delete(u, v));
        self
    }

    pub fn checkpoint(&mut self, label: impl Into<String>) -> &mut Self {
        self.records.push(Record::Checkpoint(label.into()));
        self
    }

    pub fn insertions(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, Record::Insert(..))).count()
    }

    pub fn has_deletions(&self) -> bool {
        self.records.iter().any(|r| matches!(r, Record::Delete(..)))
    }

    pub fn parse(text: &str) -> Result<Self, StreamError> {
        let mut stream: Option<UpdateStream> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| StreamError { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some(s) = stream.as_mut() else {
                stream = Some(parse_header(&tokens).map_err(err)?);
                continue;
            };
            let vertex = |tok: &str| -> Result<VertexId, StreamError> {
                let v: VertexId = tok.parse().map_err(|_| err(format!("bad vertex `{tok}`")))?;
                if v >= s.n {
                    return Err(err(format!("vertex {v} out of range for n = {}", s.n)));
                }
                Ok(v)
            };
            let record = match tokens.as_slice() {
                ["+", u, v] => Record::Insert(vertex(u)?, vertex(v)?),
                ["-", u, v] => Record::Delete(vertex(u)?, vertex(v)?),
                ["c", label] => Record::Checkpoint((*label).to_string()),
                _ => return Err(err(format!("unrecognized record `{content}`"))),
            };
            s.records.push(record);
        }
        stream.ok_or(StreamError { line: 0, msg: "missing header line".into() })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {} mode {} eps {}\n", self.n, self.mode, self.eps);
        for r in &self.records {
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

fn parse_header(tokens: &[&str]) -> Result<UpdateStream, String> {
    let ["n", n, "mode", mode, "eps", eps] = tokens else {
        return Err("expected header `n <int> mode <directed|undirected> eps <float>`".into());
    };
    let n: usize = n.parse().map_err(|_| format!("bad vertex count `{n}`"))?;
    if n == 0 {
        return Err("vertex count must be positive".into());
    }
    let mode: GraphMode = mode.parse()?;
    let eps: f64 = eps.parse().map_err(|_| format!("bad eps `{eps}`"))?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(format!("eps = {eps} not in (0, 1)"));
    }
    Ok(UpdateStream::new(n, mode, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_records_and_skips_comments() {
        let text = "# bias demo\nn 5 mode undirected eps 0.2\n\n+ 0 1\n- 3 4  # drop it\nc done\n";
        let s = UpdateStream::parse(text).unwrap();
        assert_eq!(s.n, 5);
        assert_eq!(s.mode, GraphMode::Undirected);
        assert_eq!(
            s.records,
            vec![Record::Insert(0, 1), Record::Delete(3, 4), Record::Checkpoint("done".into())]
        );
        assert_eq!(s.to_text(), "n 5 mode undirected eps 0.2\n+ 0 1\n- 3 4\nc done\n");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = UpdateStream::parse("n 3 mode directed eps 0.2\n+ 0 1\n+ 0 3\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = UpdateStream::parse("n 3 mode directed eps 0.2\n* 0 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = UpdateStream::parse("n 3 mode sideways eps 0.2\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(UpdateStream::parse("n 3 mode directed eps 1.5\n").is_err());
        assert!(UpdateStream::parse("# nothing\n").is_err());
    }

    fn record(n: usize) -> impl Strategy<Value = Record> {
        prop_oneof![
            (0..n, 0..n).prop_map(|(u, v)| Record::Insert(u, v)),
            (0..n, 0..n).prop_map(|(u, v)| Record::Delete(u, v)),
            "[a-zA-Z0-9_.-]{1,12}".prop_map(Record::Checkpoint),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(
            n in 1usize..50,
            undirected in any::<bool>(),
            eps in 0.001f64..0.999,
            seed in prop::collection::vec(record(1000), 0..40),
        ) {
            let mode = if undirected { GraphMode::Undirected } else { GraphMode::Directed };
            let records = seed
                .into_iter()
                .map(|r| match r {
                    Record::Insert(u, v) => Record::Insert(u % n, v % n),
                    Record::Delete(u, v) => Record::Delete(u % n, v % n),
                    c => c,
                })
                .collect();
            let s = UpdateStream { n, mode, eps, records };
            let text = s.to_text();
            let parsed = UpdateStream::parse(&text).unwrap();
            prop_assert_eq!(&parsed, &s);
            prop_assert_eq!(parsed.to_text(), text);
        }
    }
}
