//! Log corpus ingestion: streaming readers over NDJSON and length-delimited
//! binary record files. Malformed records are counted and skipped.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::SchemaGraph;
use crate::value::{self, MessageValue};
use crate::wire::FramedReader;

/// Fraction of malformed records beyond which ingestion aborts.
pub const DEFAULT_MALFORMED_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Ndjson,
    Binary,
}

impl CorpusFormat {
    pub fn parse(s: &str) -> Result<CorpusFormat> {
        match s {
            "ndjson" => Ok(CorpusFormat::Ndjson),
            "binary" => Ok(CorpusFormat::Binary),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// One decoded corpus record.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub type_name: String,
    pub message: MessageValue,
}

/// A locator for a corpus file; opening it yields a streaming reader.
#[derive(Debug, Clone)]
pub struct LogCorpus {
    pub path: PathBuf,
    pub format: CorpusFormat,
    pub malformed_threshold: f64,
}

/// Streaming record source. Malformed records are skipped and counted;
/// `finish` fails when the malformed fraction exceeds the threshold.
pub trait CorpusStream {
    fn next_record(&mut self) -> Result<Option<Record>>;
    fn skipped(&self) -> usize;
    /// Records seen so far, including skipped ones.
    fn total_seen(&self) -> usize;

    fn finish(&self, threshold: f64) -> Result<()> {
        let total = self.total_seen();
        if total > 0 && (self.skipped() as f64) / (total as f64) > threshold {
            return Err(Error::CorpusQuality {
                malformed: self.skipped(),
                total,
                threshold,
            });
        }
        Ok(())
    }
}

/// Opens a corpus file, verifying it is readable.
pub fn ingest_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<LogCorpus> {
    let path = path.as_ref().to_path_buf();
    File::open(&path)?;
    if format == CorpusFormat::Binary {
        File::open(sidecar_path(&path))?;
    }
    Ok(LogCorpus {
        path,
        format,
        malformed_threshold: DEFAULT_MALFORMED_THRESHOLD,
    })
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".type");
    PathBuf::from(s)
}

impl LogCorpus {
    pub fn open<'a>(&self, schema: &'a SchemaGraph) -> Result<Box<dyn CorpusStream + 'a>> {
        match self.format {
            CorpusFormat::Ndjson => Ok(Box::new(NdjsonStream::open(&self.path, schema)?)),
            CorpusFormat::Binary => {
                let type_name = std::fs::read_to_string(sidecar_path(&self.path))?
                    .trim()
                    .to_string();
                Ok(Box::new(BinaryStream::open(&self.path, type_name, schema)?))
            }
        }
    }

    /// Reads the whole corpus into memory; returns records and skipped count.
    pub fn read_all(&self, schema: &SchemaGraph) -> Result<(Vec<Record>, usize)> {
        let mut stream = self.open(schema)?;
        let mut records = Vec::new();
        while let Some(rec) = stream.next_record()? {
            records.push(rec);
        }
        stream.finish(self.malformed_threshold)?;
        Ok((records, stream.skipped()))
    }
}

/// NDJSON: one object per line with `type` and `payload` keys.
pub struct NdjsonStream<'a> {
    lines: std::io::Lines<BufReader<File>>,
    schema: &'a SchemaGraph,
    skipped: usize,
    total: usize,
}

impl<'a> NdjsonStream<'a> {
    pub fn open(path: &Path, schema: &'a SchemaGraph) -> Result<NdjsonStream<'a>> {
        Ok(NdjsonStream {
            lines: BufReader::new(File::open(path)?).lines(),
            schema,
            skipped: 0,
            total: 0,
        })
    }

    fn parse_line(&self, line: &str) -> Result<Record> {
        let json: serde_json::Value = serde_json::from_str(line)?;
        let type_name = json
            .get("type")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::InvalidRecord("missing `type` key".into()))?
            .to_string();
        let payload = json
            .get("payload")
            .ok_or_else(|| Error::InvalidRecord("missing `payload` key".into()))?;
        let message = value::from_json(payload, &type_name, self.schema)?;
        Ok(Record { type_name, message })
    }
}

impl CorpusStream for NdjsonStream<'_> {
    fn next_record(&mut self) -> Result<Option<Record>> {
        loop {
            let Some(line) = self.lines.next() else {
                return Ok(None);
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            self.total += 1;
            match self.parse_line(&line) {
                Ok(rec) => return Ok(Some(rec)),
                Err(Error::Io(e)) => return Err(Error::Io(e)),
                Err(_) => self.skipped += 1,
            }
        }
    }

    fn skipped(&self) -> usize {
        self.skipped
    }

    fn total_seen(&self) -> usize {
        self.total
    }
}

/// Length-delimited binary: `[varint length][message bytes]` records of a
/// single type named by the sidecar file.
pub struct BinaryStream<'a> {
    reader: FramedReader<BufReader<File>>,
    type_name: String,
    schema: &'a SchemaGraph,
    skipped: usize,
    total: usize,
}

impl<'a> BinaryStream<'a> {
    pub fn open(path: &Path, type_name: String, schema: &'a SchemaGraph) -> Result<BinaryStream<'a>> {
        schema.message(&type_name)?;
        Ok(BinaryStream {
            reader: FramedReader::new(BufReader::new(File::open(path)?)),
            type_name,
            schema,
            skipped: 0,
            total: 0,
        })
    }
}

impl CorpusStream for BinaryStream<'_> {
    fn next_record(&mut self) -> Result<Option<Record>> {
        loop {
            let Some(bytes) = self.reader.next_record()? else {
                return Ok(None);
            };
            self.total += 1;
            match value::decode_message(&bytes, &self.type_name, self.schema) {
                Ok(message) => {
                    return Ok(Some(Record {
                        type_name: self.type_name.clone(),
                        message,
                    }))
                }
                Err(_) => self.skipped += 1,
            }
        }
    }

    fn skipped(&self) -> usize {
        self.skipped
    }

    fn total_seen(&self) -> usize {
        self.total
    }
}

/// In-memory record source, mainly for tests and the benchmark harness.
pub struct VecStream {
    records: std::vec::IntoIter<Record>,
    total: usize,
}

impl VecStream {
    pub fn new(records: Vec<Record>) -> VecStream {
        VecStream {
            total: 0,
            records: records.into_iter(),
        }
    }
}

impl CorpusStream for VecStream {
    fn next_record(&mut self) -> Result<Option<Record>> {
        match self.records.next() {
            Some(r) => {
                self.total += 1;
                Ok(Some(r))
            }
            None => Ok(None),
        }
    }

    fn skipped(&self) -> usize {
        0
    }

    fn total_seen(&self) -> usize {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::testutil::*;
    use crate::schema::FieldKind;
    use std::io::Write;

    fn ping_schema() -> SchemaGraph {
        graph(vec![("demo.Ping", vec![scalar("seq", 1, FieldKind::Int32)])])
    }

    #[test]
    fn empty_file_yields_zero_records() {
        let schema = ping_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.ndjson");
        File::create(&path).unwrap();
        let corpus = ingest_corpus(&path, CorpusFormat::Ndjson).unwrap();
        let (records, skipped) = corpus.read_all(&schema).unwrap();
        assert!(records.is_empty());
        assert_eq!(skipped, 0);
    }

    #[test]
    fn malformed_lines_are_skipped_and_counted() {
        let schema = ping_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ndjson");
        let mut f = File::create(&path).unwrap();
        writeln!(f, r#"{{"type":"demo.Ping","payload":{{"seq":1}}}}"#).unwrap();
        writeln!(f, "this is not json").unwrap();
        writeln!(f, r#"{{"type":"demo.Ping","payload":{{"seq":2}}}}"#).unwrap();
        let corpus = ingest_corpus(&path, CorpusFormat::Ndjson).unwrap();
        let (records, skipped) = corpus.read_all(&schema).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn mostly_malformed_corpus_is_an_error() {
        let schema = ping_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ndjson");
        let mut f = File::create(&path).unwrap();
        writeln!(f, r#"{{"type":"demo.Ping","payload":{{"seq":1}}}}"#).unwrap();
        for _ in 0..3 {
            writeln!(f, "garbage").unwrap();
        }
        let corpus = ingest_corpus(&path, CorpusFormat::Ndjson).unwrap();
        let err = corpus.read_all(&schema).unwrap_err();
        assert!(matches!(err, Error::CorpusQuality { .. }));
    }

    #[test]
    fn binary_roundtrip_thousand_messages() {
        use crate::value::{FieldValue, MessageValue, Value};
        use crate::wire::FramedWriter;
        let schema = ping_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pings.bin");
        // independent encoding: hand-built wire bytes (field 1, varint)
        let mut w = FramedWriter::new(File::create(&path).unwrap());
        for i in 0..1000u64 {
            let mut body = Vec::new();
            crate::wire::encode_tag(1, crate::wire::WIRE_VARINT, &mut body);
            crate::wire::encode_varint(i, &mut body);
            w.write_record(&body).unwrap();
        }
        w.flush().unwrap();
        std::fs::write(path.with_extension("bin.type"), "demo.Ping\n").unwrap();

        let corpus = ingest_corpus(&path, CorpusFormat::Binary).unwrap();
        let (records, skipped) = corpus.read_all(&schema).unwrap();
        assert_eq!(records.len(), 1000);
        assert_eq!(skipped, 0);
        let mut expected = MessageValue::new("demo.Ping");
        expected.set(1, FieldValue::Single(Value::Int32(7)));
        assert_eq!(records[7].message, expected);
    }

    #[test]
    fn unreadable_file_is_io_error() {
        let err = ingest_corpus("/nonexistent/never.ndjson", CorpusFormat::Ndjson).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
