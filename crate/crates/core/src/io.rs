//! Dense matrix files: Matrix Market `array real general` and a raw
//! little-endian binary format.
//!
//! Raw layout: `b"RBKI"`, `u32` version, `u64` rows, `u64` cols, then
//! `rows * cols` `f64` values in row-major order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dense::Mat;
use crate::error::io_at;

pub const RAW_MAGIC: &[u8; 4] = b"RBKI";
pub const RAW_VERSION: u32 = 1;
const RAW_HEADER_LEN: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("bad magic at offset 0: expected \"RBKI\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported raw format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated input: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("{found} trailing bytes after {expected}-byte payload")]
    TrailingBytes { expected: u64, found: u64 },

    #[error("dimensions {rows}x{cols} overflow the addressable size")]
    DimensionOverflow { rows: u64, cols: u64 },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("{}: {source}", path.display())]
    InPath {
        path: PathBuf,
        #[source]
        source: Box<IoError>,
    },
}

impl IoError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }

    fn at(self, path: &Path) -> Self {
        match self {
            e @ IoError::Io { .. } => e,
            other => IoError::InPath {
                path: path.to_path_buf(),
                source: Box::new(other),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    RawBinary,
}

impl MatrixFormat {
    /// `.mtx` is Matrix Market; everything else is raw binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => MatrixFormat::MatrixMarket,
            _ => MatrixFormat::RawBinary,
        }
    }
}

pub fn encode_raw(m: &Mat) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 8 * m.len());
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&RAW_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_raw(bytes: &[u8]) -> Result<Mat, IoError> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(IoError::Truncated {
            expected: RAW_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
    if &magic != RAW_MAGIC {
        return Err(IoError::BadMagic { found: magic });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != RAW_VERSION {
        return Err(IoError::UnsupportedVersion(version));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let overflow = IoError::DimensionOverflow { rows, cols };
    let count = rows.checked_mul(cols).ok_or(overflow)?;
    let payload = count
        .checked_mul(8)
        .and_then(|p| p.checked_add(RAW_HEADER_LEN as u64))
        .filter(|p| usize::try_from(*p).is_ok())
        .ok_or(IoError::DimensionOverflow { rows, cols })?;
    if rows == 0 || cols == 0 {
        return Err(IoError::DimensionOverflow { rows, cols });
    }
    let found = bytes.len() as u64;
    if found < payload {
        return Err(IoError::Truncated { expected: payload, found });
    }
    if found > payload {
        return Err(IoError::TrailingBytes {
            expected: payload,
            found: found - payload,
        });
    }
    let (r, c) = (rows as usize, cols as usize);
    let mut values = Vec::with_capacity(r * c);
    for (idx, chunk) in bytes[RAW_HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(IoError::NonFinite {
                location: format!("byte offset {}", RAW_HEADER_LEN + 8 * idx),
            });
        }
        values.push(v);
    }
    Ok(Mat::from_row_slice(r, c, &values))
}

/// Matrix Market text with 17 significant digits, column-major values.
pub fn write_matrix_market<W: Write>(m: &Mat, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for v in m.iter() {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

pub fn parse_matrix_market(text: &str) -> Result<Mat, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| IoError::parse(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(IoError::parse(1, "missing %%MatrixMarket banner"));
    }
    if tokens[1..] != ["matrix", "array", "real", "general"] {
        return Err(IoError::parse(
            1,
            format!("unsupported header '{header}'; only 'matrix array real general' is read"),
        ));
    }
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| IoError::parse(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(IoError::parse(size_line, "size line must be 'rows cols'"));
    }
    let parse_dim = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| IoError::parse(size_line, format!("bad dimension '{s}'")))
    };
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    if rows == 0 || cols == 0 {
        return Err(IoError::parse(size_line, "dimensions must be positive"));
    }
    let count = rows
        .checked_mul(cols)
        .filter(|c| usize::try_from(*c).is_ok() && *c <= (usize::MAX / 8) as u64)
        .ok_or(IoError::DimensionOverflow { rows, cols })? as usize;

    let mut values = Vec::with_capacity(count.min(1 << 24));
    for (line, l) in body {
        for tok in l.split_whitespace() {
            if values.len() == count {
                return Err(IoError::parse(line, format!("more than {count} values")));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| IoError::parse(line, format!("bad value '{tok}'")))?;
            if !v.is_finite() {
                return Err(IoError::NonFinite {
                    location: format!("line {line}"),
                });
            }
            values.push(v);
        }
    }
    if values.len() != count {
        return Err(IoError::parse(
            text.lines().count(),
            format!("expected {count} values, found {}", values.len()),
        ));
    }
    Ok(Mat::from_column_slice(rows as usize, cols as usize, &values))
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<Mat, IoError> {
    match format {
        MatrixFormat::RawBinary => {
            let bytes = fs::read(path).map_err(|e| io_at(path, e))?;
            decode_raw(&bytes).map_err(|e| e.at(path))
        }
        MatrixFormat::MatrixMarket => {
            let text = fs::read_to_string(path).map_err(|e| io_at(path, e))?;
            parse_matrix_market(&text).map_err(|e| e.at(path))
        }
    }
}

pub fn write_matrix(path: &Path, m: &Mat, format: MatrixFormat) -> Result<(), IoError> {
    let bytes = match format {
        MatrixFormat::RawBinary => encode_raw(m),
        MatrixFormat::MatrixMarket => {
            let mut buf = Vec::new();
            write_matrix_market(m, &mut buf).map_err(|e| io_at(path, e))?;
            buf
        }
    };
    fs::write(path, bytes).map_err(|e| io_at(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat {
        Mat::from_row_slice(2, 3, &[1.0, -2.5, 1e-300, 0.1, std::f64::consts::PI, -0.0])
    }

    #[test]
    fn raw_round_trip() {
        let m = sample();
        let bytes = encode_raw(&m);
        assert_eq!(bytes.len(), 24 + 48);
        let back = decode_raw(&bytes).unwrap();
        assert_eq!(encode_raw(&back), bytes);
    }

    #[test]
    fn raw_truncated() {
        let bytes = encode_raw(&sample());
        match decode_raw(&bytes[..bytes.len() - 3]) {
            Err(IoError::Truncated { expected, found }) => {
                assert_eq!((expected, found), (72, 69));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn raw_bad_magic_and_overflow() {
        let mut bytes = encode_raw(&sample());
        bytes[0] = b'X';
        assert!(matches!(decode_raw(&bytes), Err(IoError::BadMagic { .. })));
        let mut bytes = encode_raw(&sample());
        bytes[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_raw(&bytes), Err(IoError::DimensionOverflow { .. })));
    }

    #[test]
    fn matrix_market_parses_public_example() {
        let text = "%%MatrixMarket matrix array real general\n% comment\n2 2\n1.0\n3.0\n2.0\n4.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn matrix_market_round_trip_is_exact() {
        let m = sample();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let back = parse_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(encode_raw(&back), encode_raw(&m));
    }

    #[test]
    fn matrix_market_errors() {
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 1\n"),
            Err(IoError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix array real general\n2 1\n1.0\n"),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\nnan\n"),
            Err(IoError::NonFinite { .. })
        ));
    }
}
