//! Request trace files: a text (CSV) format and a bit-exact binary format.
//!
//! CSV: UTF-8 lines `timestamp,key,size` with an optional literal header
//! line `timestamp,key,size`; LF or CRLF endings.
//!
//! Binary (`CCT1`): a 14-byte header — magic `CCT1`, version `u16` little
//! endian (currently 1), record count `u64` little endian — followed by one
//! 20-byte little-endian record per entry: `u32` timestamp, `u64` key, `u32`
//! size, `u32` reserved (must be zero). Readers reject bad magic, version
//! mismatches, truncated records, count mismatches, nonzero reserved words
//! and trailing bytes.
//!
//! Both readers are streaming: memory use is O(1) in the trace length.

use crate::types::RequestRecord;
use std::fmt;
use std::io::{self, BufRead, Read, Write};

pub const BINARY_MAGIC: [u8; 4] = *b"CCT1";
pub const BINARY_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 14;
pub const RECORD_LEN: usize = 20;
pub const CSV_HEADER: &str = "timestamp,key,size";

#[derive(Debug)]
pub enum TraceError {
    Io(io::Error),
    /// A malformed CSV line, 1-based.
    Csv {
        line: u64,
        problem: CsvProblem,
    },
    BadMagic {
        offset: u64,
        found: [u8; 4],
    },
    VersionMismatch {
        found: u16,
    },
    /// The file ended inside the header or a record.
    Truncated {
        offset: u64,
    },
    /// Fewer or more records than the header declared.
    CountMismatch {
        declared: u64,
        found: u64,
    },
    TrailingBytes {
        offset: u64,
    },
    NonzeroReserved {
        record: u64,
    },
    /// A timestamp too large for the binary format's u32 field.
    TimestampOverflow {
        record: u64,
        timestamp: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvProblem {
    MissingColumn,
    ExtraColumn,
    NonInteger { column: &'static str },
    ZeroSize,
}

impl fmt::Display for CsvProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsvProblem::MissingColumn => write!(f, "missing column"),
            CsvProblem::ExtraColumn => write!(f, "too many columns"),
            CsvProblem::NonInteger { column } => write!(f, "non-integer {column}"),
            CsvProblem::ZeroSize => write!(f, "zero object size"),
        }
    }
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::Io(err) => write!(f, "i/o error: {err}"),
            TraceError::Csv { line, problem } => write!(f, "line {line}: {problem}"),
            TraceError::BadMagic { offset, found } => {
                write!(f, "bad magic {found:02X?} at offset {offset}")
            }
            TraceError::VersionMismatch { found } => {
                write!(f, "unsupported trace version {found}")
            }
            TraceError::Truncated { offset } => write!(f, "truncated input at offset {offset}"),
            TraceError::CountMismatch { declared, found } => {
                write!(f, "header declared {declared} records, found {found}")
            }
            TraceError::TrailingBytes { offset } => {
                write!(f, "trailing bytes at offset {offset}")
            }
            TraceError::NonzeroReserved { record } => {
                write!(f, "nonzero reserved word in record {record}")
            }
            TraceError::TimestampOverflow { record, timestamp } => {
                write!(f, "timestamp {timestamp} in record {record} exceeds u32")
            }
        }
    }
}

impl std::error::Error for TraceError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            TraceError::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for TraceError {
    fn from(err: io::Error) -> Self {
        TraceError::Io(err)
    }
}

/// Streaming CSV reader; an optional header line is skipped.
pub struct CsvTraceReader<R: BufRead> {
    input: R,
    line: u64,
    buffer: String,
}

impl<R: BufRead> CsvTraceReader<R> {
    pub fn new(input: R) -> Self {
        Self {
            input,
            line: 0,
            buffer: String::new(),
        }
    }

    fn parse_line(line: u64, text: &str) -> Result<RequestRecord, TraceError> {
        let mut fields = text.split(',');
        let mut next_field = |column: &'static str| {
            fields
                .next()
                .filter(|f| !f.is_empty())
                .ok_or(TraceError::Csv {
                    line,
                    problem: CsvProblem::MissingColumn,
                })
                .and_then(|f| {
                    f.trim().parse::<u64>().map_err(|_| TraceError::Csv {
                        line,
                        problem: CsvProblem::NonInteger { column },
                    })
                })
        };
        let timestamp = next_field("timestamp")?;
        let key = next_field("key")?;
        let size = next_field("size")?;
        if fields.next().is_some() {
            return Err(TraceError::Csv {
                line,
                problem: CsvProblem::ExtraColumn,
            });
        }
        if size == 0 {
            return Err(TraceError::Csv {
                line,
                problem: CsvProblem::ZeroSize,
            });
        }
        let size = u32::try_from(size).map_err(|_| TraceError::Csv {
            line,
            problem: CsvProblem::NonInteger { column: "size" },
        })?;
        Ok(RequestRecord::new(timestamp, key, size))
    }
}

impl<R: BufRead> Iterator for CsvTraceReader<R> {
    type Item = Result<RequestRecord, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buffer.clear();
            match self.input.read_line(&mut self.buffer) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(err) => return Some(Err(err.into())),
            }
            self.line += 1;
            let text = self.buffer.trim_end_matches(['\r', '\n']);
            if text.is_empty() {
                continue; // blank line (e.g. trailing newline)
            }
            if self.line == 1 && text == CSV_HEADER {
                continue;
            }
            return Some(Self::parse_line(self.line, text));
        }
    }
}

pub fn read_csv_trace<R: BufRead>(input: R) -> Result<Vec<RequestRecord>, TraceError> {
    CsvTraceReader::new(input).collect()
}

pub fn write_csv_trace<W: Write>(
    output: &mut W,
    records: &[RequestRecord],
    header: bool,
) -> Result<(), TraceError> {
    if header {
        writeln!(output, "{CSV_HEADER}")?;
    }
    for record in records {
        writeln!(
            output,
            "{},{},{}",
            record.timestamp, record.key, record.size
        )?;
    }
    Ok(())
}

/// Streaming binary reader. The header is parsed eagerly in [`Self::new`];
/// count mismatches, nonzero reserved words and trailing bytes surface as
/// iterator errors.
pub struct BinaryTraceReader<R: Read> {
    input: R,
    declared: u64,
    produced: u64,
    offset: u64,
    finished: bool,
}

impl<R: Read> BinaryTraceReader<R> {
    pub fn new(mut input: R) -> Result<Self, TraceError> {
        let mut header = [0u8; HEADER_LEN];
        read_exact_at(&mut input, &mut header, 0)?;
        if header[0..4] != BINARY_MAGIC {
            let mut found = [0u8; 4];
            found.copy_from_slice(&header[0..4]);
            return Err(TraceError::BadMagic { offset: 0, found });
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != BINARY_VERSION {
            return Err(TraceError::VersionMismatch { found: version });
        }
        let declared = u64::from_le_bytes(header[6..14].try_into().unwrap());
        Ok(Self {
            input,
            declared,
            produced: 0,
            offset: HEADER_LEN as u64,
            finished: false,
        })
    }

    pub fn declared_records(&self) -> u64 {
        self.declared
    }
}

fn read_exact_at<R: Read>(input: &mut R, buf: &mut [u8], offset: u64) -> Result<(), TraceError> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(TraceError::Truncated {
                    offset: offset + filled as u64,
                })
            }
            Ok(n) => filled += n,
            Err(ref err) if err.kind() == io::ErrorKind::Interrupted => {}
            Err(err) => return Err(err.into()),
        }
    }
    Ok(())
}

impl<R: Read> Iterator for BinaryTraceReader<R> {
    type Item = Result<RequestRecord, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        if self.produced == self.declared {
            self.finished = true;
            // The declared count must exhaust the input exactly.
            let mut probe = [0u8; 1];
            return match self.input.read(&mut probe) {
                Ok(0) => None,
                Ok(_) => Some(Err(TraceError::TrailingBytes {
                    offset: self.offset,
                })),
                Err(err) => Some(Err(err.into())),
            };
        }
        let mut raw = [0u8; RECORD_LEN];
        match read_exact_at(&mut self.input, &mut raw, self.offset) {
            Ok(()) => {}
            Err(TraceError::Truncated { offset }) => {
                self.finished = true;
                // A clean end at a record boundary is a count shortfall; a
                // torn record is reported as truncation.
                return Some(Err(if offset == self.offset {
                    TraceError::CountMismatch {
                        declared: self.declared,
                        found: self.produced,
                    }
                } else {
                    TraceError::Truncated { offset }
                }));
            }
            Err(err) => {
                self.finished = true;
                return Some(Err(err));
            }
        }
        let record_no = self.produced;
        self.produced += 1;
        self.offset += RECORD_LEN as u64;
        let timestamp = u32::from_le_bytes(raw[0..4].try_into().unwrap());
        let key = u64::from_le_bytes(raw[4..12].try_into().unwrap());
        let size = u32::from_le_bytes(raw[12..16].try_into().unwrap());
        let reserved = u32::from_le_bytes(raw[16..20].try_into().unwrap());
        if reserved != 0 {
            self.finished = true;
            return Some(Err(TraceError::NonzeroReserved { record: record_no }));
        }
        Some(Ok(RequestRecord::new(timestamp as u64, key, size)))
    }
}

pub fn read_binary_trace<R: Read>(input: R) -> Result<Vec<RequestRecord>, TraceError> {
    BinaryTraceReader::new(input)?.collect()
}

pub fn write_binary_trace<W: Write>(
    output: &mut W,
    records: &[RequestRecord],
) -> Result<(), TraceError> {
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&BINARY_MAGIC);
    header[4..6].copy_from_slice(&BINARY_VERSION.to_le_bytes());
    header[6..14].copy_from_slice(&(records.len() as u64).to_le_bytes());
    output.write_all(&header)?;
    for (i, record) in records.iter().enumerate() {
        let timestamp =
            u32::try_from(record.timestamp).map_err(|_| TraceError::TimestampOverflow {
                record: i as u64,
                timestamp: record.timestamp,
            })?;
        let mut raw = [0u8; RECORD_LEN];
        raw[0..4].copy_from_slice(&timestamp.to_le_bytes());
        raw[4..12].copy_from_slice(&record.key.to_le_bytes());
        raw[12..16].copy_from_slice(&record.size.to_le_bytes());
        output.write_all(&raw)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_bytes(records: &[RequestRecord]) -> Vec<u8> {
        let mut out = Vec::new();
        write_binary_trace(&mut out, records).unwrap();
        out
    }

    #[test]
    fn csv_single_record() {
        let records = read_csv_trace("1,42,100\n".as_bytes()).unwrap();
        assert_eq!(records, vec![RequestRecord::new(1, 42, 100)]);
    }

    #[test]
    fn csv_zero_size_is_rejected_with_line_number() {
        let err = read_csv_trace("1,42,0\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            TraceError::Csv {
                line: 1,
                problem: CsvProblem::ZeroSize
            }
        ));
    }

    #[test]
    fn csv_header_and_crlf_are_accepted() {
        let text = "timestamp,key,size\r\n1,2,3\r\n4,5,6\r\n";
        let records = read_csv_trace(text.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1], RequestRecord::new(4, 5, 6));
    }

    #[test]
    fn csv_malformed_lines_carry_positions() {
        let err = read_csv_trace("1,42,100\n2,oops,1\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            TraceError::Csv {
                line: 2,
                problem: CsvProblem::NonInteger { column: "key" }
            }
        ));
        let err = read_csv_trace("1,42\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            TraceError::Csv {
                line: 1,
                problem: CsvProblem::MissingColumn
            }
        ));
        let err = read_csv_trace("1,42,1,9\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            TraceError::Csv {
                line: 1,
                problem: CsvProblem::ExtraColumn
            }
        ));
    }

    #[test]
    fn csv_round_trips_modulo_header() {
        let records = vec![
            RequestRecord::new(1, 42, 100),
            RequestRecord::new(2, 7, 1),
            RequestRecord::new(3, u64::MAX, u32::MAX),
        ];
        let mut with_header = Vec::new();
        write_csv_trace(&mut with_header, &records, true).unwrap();
        let mut bare = Vec::new();
        write_csv_trace(&mut bare, &records, false).unwrap();
        assert_eq!(read_csv_trace(&with_header[..]).unwrap(), records);
        assert_eq!(read_csv_trace(&bare[..]).unwrap(), records);
    }

    #[test]
    fn empty_binary_trace_is_header_only() {
        let bytes = write_bytes(&[]);
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(read_binary_trace(&bytes[..]).unwrap(), Vec::new());
    }

    #[test]
    fn binary_layout_is_pinned() {
        let bytes = write_bytes(&[RequestRecord::new(1, 42, 100)]);
        let expected = [
            b'C', b'C', b'T', b'1', // magic
            0x01, 0x00, // version 1
            0x01, 0, 0, 0, 0, 0, 0, 0, // count 1
            0x01, 0, 0, 0, // timestamp 1
            0x2A, 0, 0, 0, 0, 0, 0, 0, // key 42
            0x64, 0, 0, 0, // size 100
            0, 0, 0, 0, // reserved
        ];
        assert_eq!(bytes, expected);
    }

    #[test]
    fn binary_rejects_corruption() {
        let good = write_bytes(&[RequestRecord::new(1, 42, 100)]);

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        match read_binary_trace(&bad_magic[..]).unwrap_err() {
            TraceError::BadMagic { offset: 0, found } => assert_eq!(&found[..], b"XCT1"),
            other => panic!("unexpected error {other:?}"),
        }

        let mut bad_version = good.clone();
        bad_version[4] = 2;
        assert!(matches!(
            read_binary_trace(&bad_version[..]).unwrap_err(),
            TraceError::VersionMismatch { found: 2 }
        ));

        let truncated = &good[..good.len() - 3];
        assert!(matches!(
            read_binary_trace(truncated).unwrap_err(),
            TraceError::Truncated { offset: 31 }
        ));

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(
            read_binary_trace(&trailing[..]).unwrap_err(),
            TraceError::TrailingBytes { offset: 34 }
        ));

        let mut reserved = good.clone();
        reserved[30] = 1;
        assert!(matches!(
            read_binary_trace(&reserved[..]).unwrap_err(),
            TraceError::NonzeroReserved { record: 0 }
        ));

        let short_header = &good[..HEADER_LEN - 2];
        assert!(matches!(
            read_binary_trace(short_header).unwrap_err(),
            TraceError::Truncated { offset: 12 }
        ));

        let mut undercount = good.clone();
        undercount[6] = 2;
        assert!(matches!(
            read_binary_trace(&undercount[..]).unwrap_err(),
            TraceError::CountMismatch {
                declared: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn timestamps_beyond_u32_fail_binary_writes() {
        let mut out = Vec::new();
        let err = write_binary_trace(&mut out, &[RequestRecord::new(1 << 40, 1, 1)]).unwrap_err();
        assert!(matches!(
            err,
            TraceError::TimestampOverflow { record: 0, .. }
        ));
    }

    #[test]
    fn binary_round_trip_on_bulk_random_records() {
        let mut rng = crate::workload::SplitMix64::new(0xB17);
        let records: Vec<RequestRecord> = (0..100_000)
            .map(|_| {
                RequestRecord::new(
                    rng.next_u64() % u32::MAX as u64,
                    rng.next_u64(),
                    (rng.next_u64() % u32::MAX as u64).max(1) as u32,
                )
            })
            .collect();
        let bytes = write_bytes(&records);
        assert_eq!(bytes.len(), HEADER_LEN + RECORD_LEN * records.len());
        assert_eq!(read_binary_trace(&bytes[..]).unwrap(), records);
    }
}

#[cfg(test)]
mod property_tests {
    use super::*;
    use proptest::prelude::*;

    fn record_strategy() -> impl Strategy<Value = RequestRecord> {
        (any::<u32>(), any::<u64>(), 1u32..)
            .prop_map(|(ts, key, size)| RequestRecord::new(ts as u64, key, size))
    }

    proptest! {
        #[test]
        fn binary_round_trip_is_identity(records in prop::collection::vec(record_strategy(), 0..512)) {
            let mut bytes = Vec::new();
            write_binary_trace(&mut bytes, &records).unwrap();
            prop_assert_eq!(read_binary_trace(&bytes[..]).unwrap(), records);
        }

        #[test]
        fn csv_round_trip_is_identity(records in prop::collection::vec(record_strategy(), 0..512), header in any::<bool>()) {
            let mut text = Vec::new();
            write_csv_trace(&mut text, &records, header).unwrap();
            prop_assert_eq!(read_csv_trace(&text[..]).unwrap(), records);
        }
    }
}
