//! Matrix Market coordinate-format read/write for CSR matrices.

use std::io::{BufRead, BufReader, Read, Write};

use crate::{CsrBuilder, Result, SparseError, SparseMatrixCsr};

/// Write in `matrix coordinate real general` format, 1-based indices.
pub fn write_matrix_market<W: Write>(m: &SparseMatrixCsr, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for r in 0..m.nrows() {
        let (cols, vals) = m.row(r);
        for (c, v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
    }
    Ok(())
}

/// Read a `coordinate real general` matrix. Duplicate entries are summed.
pub fn read_matrix_market<R: Read>(r: R) -> Result<SparseMatrixCsr> {
    let reader = BufReader::new(r);
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut builder: Option<CsrBuilder> = None;
    let mut seen = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            if lineno == 0 && !trimmed.to_lowercase().contains("coordinate real general") {
                return Err(SparseError::MarketParse {
                    line: lineno + 1,
                    message: "only 'coordinate real general' matrices are supported".into(),
                });
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if dims.is_none() {
            if fields.len() != 3 {
                return Err(SparseError::MarketParse {
                    line: lineno + 1,
                    message: "expected 'nrows ncols nnz'".into(),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| SparseError::MarketParse {
                    line: lineno + 1,
                    message: e.to_string(),
                })
            };
            let (nr, nc, nnz) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            dims = Some((nr, nc, nnz));
            builder = Some(CsrBuilder::new(nr, nc));
            continue;
        }
        if fields.len() != 3 {
            return Err(SparseError::MarketParse {
                line: lineno + 1,
                message: "expected 'row col value'".into(),
            });
        }
        let (nr, nc, _) = dims.unwrap();
        let row: usize = fields[0].parse().map_err(|e: std::num::ParseIntError| {
            SparseError::MarketParse {
                line: lineno + 1,
                message: e.to_string(),
            }
        })?;
        let col: usize = fields[1].parse().map_err(|e: std::num::ParseIntError| {
            SparseError::MarketParse {
                line: lineno + 1,
                message: e.to_string(),
            }
        })?;
        let val: f64 = fields[2].parse().map_err(|e: std::num::ParseFloatError| {
            SparseError::MarketParse {
                line: lineno + 1,
                message: e.to_string(),
            }
        })?;
        if row == 0 || col == 0 || row > nr || col > nc {
            return Err(SparseError::MarketParse {
                line: lineno + 1,
                message: format!("index ({row}, {col}) out of bounds for {nr}x{nc}"),
            });
        }
        builder.as_mut().unwrap().push(row - 1, col - 1, val);
        seen += 1;
    }
    match (dims, builder) {
        (Some((_, _, nnz)), Some(b)) => {
            if seen != nnz {
                return Err(SparseError::MarketParse {
                    line: 0,
                    message: format!("header declared {nnz} entries, found {seen}"),
                });
            }
            Ok(b.build())
        }
        _ => Err(SparseError::MarketParse {
            line: 0,
            message: "missing size header".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut b = CsrBuilder::new(3, 4);
        b.push(0, 0, 1.5);
        b.push(1, 3, -2.25);
        b.push(2, 1, 1e-17);
        let m = b.build();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let m2 = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(m, m2);
    }

    #[test]
    fn rejects_bad_header() {
        let text = "%%MatrixMarket matrix array real general\n1 1 1\n1 1 2.0\n";
        assert!(read_matrix_market(text.as_bytes()).is_err());
    }
}
