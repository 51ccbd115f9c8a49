use std::io::{BufRead, Write};

use crate::arnoldi::{BlockOperator, CsrMatrix};
use crate::error::{Error, Result};
use crate::kernels::Matrix;

/// Contents of a Matrix Market file.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixMarket {
    Sparse(CsrMatrix),
    Dense(Matrix),
}

impl MatrixMarket {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Sparse(a) => (a.nrows(), a.ncols()),
            Self::Dense(a) => a.shape(),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Self::Sparse(a) => a.to_dense(),
            Self::Dense(a) => a.clone(),
        }
    }

    pub fn into_operator(self) -> Result<BlockOperator> {
        match self {
            Self::Sparse(a) => BlockOperator::sparse(a),
            Self::Dense(a) => BlockOperator::dense(a),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads the `coordinate` and `array` formats with `real` or `integer`
/// entries and `general` or `symmetric` storage.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<MatrixMarket> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("bad header {header:?}")));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unknown format {other:?}"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" => {}
        "complex" | "pattern" => return Err(Error::UnsupportedFormat(format!("field {:?}", tokens[3]))),
        other => return Err(parse_err(1, format!("unknown field {other:?}"))),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        "hermitian" | "skew-symmetric" => {
            return Err(Error::UnsupportedFormat(format!("symmetry {:?}", tokens[4])))
        }
        other => return Err(parse_err(1, format!("unknown symmetry {other:?}"))),
    };

    let mut data = lines.filter_map(|(no, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        Ok(s) => Some(Ok((no, s))),
        Err(e) => Some(Err(e)),
    });

    let (size_no, size_line) = data.next().ok_or_else(|| parse_err(2, "missing size line"))??;
    let sizes = parse_fields::<usize>(&size_line, size_no)?;
    let last_line = std::cell::Cell::new(size_no);

    let mut next_entry = |what: &str| -> Result<(usize, String)> {
        match data.next() {
            Some(r) => {
                let (no, s) = r?;
                last_line.set(no);
                Ok((no, s))
            }
            None => Err(parse_err(last_line.get() + 1, format!("unexpected end of input, expected {what}"))),
        }
    };

    if coordinate {
        let [rows, cols, nnz] = sizes[..] else {
            return Err(parse_err(size_no, "coordinate size line needs rows cols nnz"));
        };
        if symmetric && rows != cols {
            return Err(parse_err(size_no, "symmetric matrix must be square"));
        }
        let mut trip = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
        for _ in 0..nnz {
            let (no, s) = next_entry("an entry")?;
            let f: Vec<&str> = s.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(no, format!("expected `row col value`, got {s:?}")));
            }
            let i: usize = f[0].parse().map_err(|_| parse_err(no, format!("bad row index {:?}", f[0])))?;
            let j: usize = f[1].parse().map_err(|_| parse_err(no, format!("bad column index {:?}", f[1])))?;
            let v: f64 = f[2].parse().map_err(|_| parse_err(no, format!("bad value {:?}", f[2])))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(parse_err(no, format!("index ({i},{j}) outside {rows}x{cols}")));
            }
            if !v.is_finite() {
                return Err(parse_err(no, "non-finite value"));
            }
            trip.push((i - 1, j - 1, v));
            if symmetric && i != j {
                trip.push((j - 1, i - 1, v));
            }
        }
        Ok(MatrixMarket::Sparse(CsrMatrix::from_triplets(rows, cols, &trip)?))
    } else {
        let [rows, cols] = sizes[..] else {
            return Err(parse_err(size_no, "array size line needs rows cols"));
        };
        if symmetric && rows != cols {
            return Err(parse_err(size_no, "symmetric matrix must be square"));
        }
        let mut a = Matrix::zeros(rows, cols);
        for j in 0..cols {
            let start = if symmetric { j } else { 0 };
            for i in start..rows {
                let (no, s) = next_entry("an entry")?;
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad value {s:?}")))?;
                if !v.is_finite() {
                    return Err(parse_err(no, "non-finite value"));
                }
                a[(i, j)] = v;
                if symmetric {
                    a[(j, i)] = v;
                }
            }
        }
        Ok(MatrixMarket::Dense(a))
    }
}

fn parse_fields<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad integer {t:?}"))))
        .collect()
}

pub fn read_matrix_market_file(path: &std::path::Path) -> Result<MatrixMarket> {
    let f = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile {
            path: path.to_path_buf(),
            hint: String::new(),
        },
        _ => Error::Io(e),
    })?;
    parse_matrix_market(std::io::BufReader::new(f))
}

/// Writes `coordinate real general`, values in shortest round-trip form.
pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Writes `array real general` in column-major order.
pub fn write_matrix_market_dense<W: Write>(a: &Matrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for v in a.iter() {
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<MatrixMarket> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn coordinate_identity() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 2 1\n").unwrap();
        assert_eq!(m.to_dense(), Matrix::identity(2, 2));
    }

    #[test]
    fn symmetric_expansion() {
        let text = "%%MatrixMarket matrix coordinate integer symmetric\n3 3 4\n1 1 4\n2 1 1\n3 2 -2\n3 3 5\n";
        let expect = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 0.0, -2.0, 0.0, -2.0, 5.0]);
        assert_eq!(parse(text).unwrap().to_dense(), expect);

        let arr = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        assert_eq!(
            parse(arr).unwrap().to_dense(),
            Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0])
        );
    }

    #[test]
    fn array_is_column_major() {
        let m = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(m.to_dense(), Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]));
    }

    #[test]
    fn duplicates_sum() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2.5\n").unwrap();
        assert_eq!(m.to_dense()[(0, 0)], 4.0);
    }

    #[test]
    fn unsupported_fields() {
        for h in ["coordinate complex general", "coordinate pattern general", "coordinate real hermitian"] {
            let err = parse(&format!("%%MatrixMarket matrix {h}\n1 1 0\n")).unwrap_err();
            assert!(matches!(err, Error::UnsupportedFormat(_)), "{h}: {err}");
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("%%MatrixMarket matrix coordinate real general\n%\n2 2 2\n1 1 1.0\n2 x 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
