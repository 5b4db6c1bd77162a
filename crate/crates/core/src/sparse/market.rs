//! Matrix Market coordinate-format reader and writer.
//!
//! Supports `matrix coordinate {real|integer} {general|symmetric}`.
//! Symmetric files are expanded to full storage, duplicate coordinates are
//! summed in file order and explicit zeros are kept. Gzip-compressed input
//! is detected from its magic bytes.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use thiserror::Error;

use super::{CsrMatrix, SparseError};

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: invalid header: {message}")]
    Header { line: usize, message: String },
    #[error("unsupported Matrix Market variant: {0}")]
    Unsupported(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: entry ({row}, {col}) outside the declared {nrows}x{ncols} matrix")]
    OutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error(transparent)]
    Structure(#[from] SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// Parsed banner line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub field: Field,
    pub symmetry: Symmetry,
}

/// Dimensions declared on the size line, before symmetric expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeclaredSize {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: usize,
}

/// Checks the `%%MatrixMarket` banner without touching the rest of the file.
pub fn parse_header(line: &str) -> Result<Header, MarketError> {
    let header_err = |message: &str| MarketError::Header {
        line: 1,
        message: message.to_string(),
    };
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(header_err("missing %%MatrixMarket banner"));
    }
    if tokens.len() != 5 {
        return Err(header_err("expected 4 qualifiers after the banner"));
    }
    if tokens[1] != "matrix" {
        return Err(MarketError::Unsupported(format!("object '{}'", tokens[1])));
    }
    match tokens[2].as_str() {
        "coordinate" => {}
        "array" => return Err(MarketError::Unsupported("array (dense) format".into())),
        other => return Err(MarketError::Unsupported(format!("format '{other}'"))),
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        other => return Err(MarketError::Unsupported(format!("field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(MarketError::Unsupported(format!("symmetry '{other}'"))),
    };
    Ok(Header { field, symmetry })
}

/// Reads a Matrix Market stream (plain or gzip) into CSR.
pub fn parse_matrix_market<R: Read>(reader: R) -> Result<CsrMatrix, MarketError> {
    read_with_header(reader).map(|(m, _, _)| m)
}

/// Like [`parse_matrix_market`], also returning the banner and size line.
pub fn read_with_header<R: Read>(
    reader: R,
) -> Result<(CsrMatrix, Header, DeclaredSize), MarketError> {
    let mut buffered = BufReader::new(reader);
    let is_gzip = {
        let head = buffered.fill_buf()?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    if is_gzip {
        parse_plain(BufReader::new(GzDecoder::new(buffered)))
    } else {
        parse_plain(buffered)
    }
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<CsrMatrix, MarketError> {
    parse_matrix_market(File::open(path)?)
}

fn parse_plain<R: BufRead>(reader: R) -> Result<(CsrMatrix, Header, DeclaredSize), MarketError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let header = match lines.next() {
        Some((_, line)) => parse_header(&line?)?,
        None => {
            return Err(MarketError::Header {
                line: 1,
                message: "empty input".into(),
            })
        }
    };

    let mut size: Option<DeclaredSize> = None;
    let mut triplets = Vec::new();
    let mut seen = 0usize;
    for (number, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parse_err = |message: String| MarketError::Parse {
            line: number,
            message,
        };
        let mut fields = trimmed.split_whitespace();
        let Some(declared) = size else {
            let nums: Result<Vec<usize>, _> = fields.map(str::parse::<usize>).collect();
            match nums.as_deref() {
                Ok(&[nrows, ncols, entries]) => {
                    if header.symmetry == Symmetry::Symmetric && nrows != ncols {
                        return Err(parse_err(format!(
                            "symmetric matrix must be square, got {nrows}x{ncols}"
                        )));
                    }
                    size = Some(DeclaredSize {
                        nrows,
                        ncols,
                        entries,
                    });
                    triplets.reserve(match header.symmetry {
                        Symmetry::General => entries,
                        Symmetry::Symmetric => 2 * entries,
                    });
                }
                _ => return Err(parse_err(format!("malformed size line '{trimmed}'"))),
            }
            continue;
        };

        if seen == declared.entries {
            return Err(parse_err(format!(
                "more entries than the {} declared",
                declared.entries
            )));
        }
        let (Some(i), Some(j), Some(v), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(parse_err(format!(
                "expected 'row col value', got '{trimmed}'"
            )));
        };
        let row: usize = i
            .parse()
            .map_err(|_| parse_err(format!("invalid row index '{i}'")))?;
        let col: usize = j
            .parse()
            .map_err(|_| parse_err(format!("invalid column index '{j}'")))?;
        let value = match header.field {
            Field::Real => v.parse::<f64>().ok().filter(|x| x.is_finite()),
            Field::Integer => v.parse::<i64>().ok().map(|x| x as f64),
        }
        .ok_or_else(|| parse_err(format!("invalid value '{v}'")))?;
        if row == 0 || col == 0 || row > declared.nrows || col > declared.ncols {
            return Err(MarketError::OutOfBounds {
                line: number,
                row,
                col,
                nrows: declared.nrows,
                ncols: declared.ncols,
            });
        }
        let (r, c) = (row - 1, col - 1);
        triplets.push((r, c, value));
        if header.symmetry == Symmetry::Symmetric && r != c {
            triplets.push((c, r, value));
        }
        seen += 1;
    }

    let declared = size.ok_or_else(|| MarketError::Parse {
        line: 0,
        message: "missing size line".into(),
    })?;
    if seen != declared.entries {
        return Err(MarketError::Parse {
            line: 0,
            message: format!("expected {} entries, found {seen}", declared.entries),
        });
    }
    let matrix = CsrMatrix::from_triplets(declared.nrows, declared.ncols, &triplets)?;
    Ok((matrix, header, declared))
}

/// Writes the canonical `coordinate real general` form: row-major order,
/// 1-based indices, shortest round-trip values.
pub fn write_matrix_market<W: Write>(matrix: &CsrMatrix, mut out: W) -> io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(
        out,
        "{} {} {}",
        matrix.nrows(),
        matrix.ncols(),
        matrix.nnz()
    )?;
    for (i, j, v) in matrix.triplets() {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
