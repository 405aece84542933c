//! Matrix Market exchange format for dense complex matrices.
//!
//! Reads `coordinate` and `array` files with `real`, `integer` or `complex`
//! fields and `general`, `symmetric`, `skew-symmetric` or `hermitian`
//! symmetry. Writes `complex general` in either layout.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse(format!("line {line}: {}", msg.into()))
}

fn parse_header(line: &str) -> Result<(Layout, Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected header `%%MatrixMarket matrix <layout> <field> <symmetry>`"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unknown layout `{other}`"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unknown symmetry `{other}`"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian symmetry requires a complex field"));
    }
    Ok((layout, field, symmetry))
}

fn parse_value(tokens: &[&str], field: Field, line: usize) -> Result<C64> {
    let num =
        |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{s}`"))) };
    match field {
        Field::Complex => {
            if tokens.len() != 2 {
                return Err(parse_err(line, "complex entry needs real and imaginary parts"));
            }
            Ok(C64::new(num(tokens[0])?, num(tokens[1])?))
        }
        Field::Real | Field::Integer => {
            if tokens.len() != 1 {
                return Err(parse_err(line, "expected a single value"));
            }
            Ok(C64::new(num(tokens[0])?, 0.0))
        }
    }
}

fn mirror(m: &mut DMatrix<C64>, i: usize, j: usize, v: C64, symmetry: Symmetry) {
    m[(i, j)] = v;
    if i != j {
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric => m[(j, i)] = v,
            Symmetry::SkewSymmetric => m[(j, i)] = -v,
            Symmetry::Hermitian => m[(j, i)] = v.conj(),
        }
    }
}

/// Parse a square complex matrix from Matrix Market text.
pub fn read<R: Read>(reader: R) -> Result<ComplexMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(parse_err(1, "empty input")),
    };
    let (layout, field, symmetry) = parse_header(&header)?;

    let mut body = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        body.push((idx + 1, trimmed.to_string()));
    }
    let mut body = body.into_iter();
    let (size_line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(size_line, format!("invalid size `{t}`"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, [r, c, _]) | (Layout::Array, [r, c]) => (*r, *c),
        _ => return Err(parse_err(size_line, "malformed size line")),
    };
    if rows != cols {
        return Err(Error::InvalidMatrix(format!("matrix is {rows}x{cols}, expected square")));
    }
    let n = rows;
    let mut m = DMatrix::from_element(n, n, ZERO);

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (ln, text) in body {
                let tokens: Vec<&str> = text.split_whitespace().collect();
                if tokens.len() < 3 {
                    return Err(parse_err(ln, "coordinate entry needs row, column and value"));
                }
                let idx = |s: &str| -> Result<usize> {
                    let k: usize = s.parse().map_err(|_| parse_err(ln, format!("invalid index `{s}`")))?;
                    if k == 0 || k > n {
                        return Err(parse_err(ln, format!("index {k} out of range 1..={n}")));
                    }
                    Ok(k - 1)
                };
                let (i, j) = (idx(tokens[0])?, idx(tokens[1])?);
                let v = parse_value(&tokens[2..], field, ln)?;
                mirror(&mut m, i, j, v, symmetry);
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // Column-major; symmetric variants store the lower triangle only.
            let mut slots = Vec::new();
            for j in 0..n {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in start..n {
                    slots.push((i, j));
                }
            }
            let mut k = 0;
            for (ln, text) in body {
                let tokens: Vec<&str> = text.split_whitespace().collect();
                let v = parse_value(&tokens, field, ln)?;
                let &(i, j) = slots.get(k).ok_or_else(|| parse_err(ln, "too many entries"))?;
                mirror(&mut m, i, j, v, symmetry);
                k += 1;
            }
            if k != slots.len() {
                return Err(Error::Parse(format!("expected {} entries, found {k}", slots.len())));
            }
        }
    }
    ComplexMatrix::new(m)
}

pub fn read_path(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    read(std::fs::File::open(path)?)
}

/// Write `a` as `complex general`. Coordinate layout omits exact zeros.
pub fn write<W: Write>(mut w: W, a: &ComplexMatrix, layout: Layout) -> Result<()> {
    let m = a.as_matrix();
    let n = m.nrows();
    match layout {
        Layout::Coordinate => {
            writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
            let nnz = m.iter().filter(|z| **z != ZERO).count();
            writeln!(w, "{n} {n} {nnz}")?;
            for j in 0..n {
                for i in 0..n {
                    let z = m[(i, j)];
                    if z != ZERO {
                        writeln!(w, "{} {} {:e} {:e}", i + 1, j + 1, z.re, z.im)?;
                    }
                }
            }
        }
        Layout::Array => {
            writeln!(w, "%%MatrixMarket matrix array complex general")?;
            writeln!(w, "{n} {n}")?;
            for j in 0..n {
                for i in 0..n {
                    let z = m[(i, j)];
                    writeln!(w, "{:e} {:e}", z.re, z.im)?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_path(path: impl AsRef<Path>, a: &ComplexMatrix, layout: Layout) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(file, a, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;

    #[test]
    fn coordinate_round_trip_is_exact() {
        let a = grcar(7).scale(C64::new(0.1, 1.0 / 3.0));
        let mut buf = Vec::new();
        write(&mut buf, &a, Layout::Coordinate).unwrap();
        let b = read(buf.as_slice()).unwrap();
        assert_eq!(a.as_matrix(), b.as_matrix());
    }

    #[test]
    fn array_round_trip_is_exact() {
        let a = crate::matrix::random::gaussian_matrix(5, &mut crate::matrix::random::rng(1));
        let mut buf = Vec::new();
        write(&mut buf, &a, Layout::Array).unwrap();
        let b = read(buf.as_slice()).unwrap();
        assert_eq!(a.as_matrix(), b.as_matrix());
    }

    #[test]
    fn hermitian_coordinate_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n% comment\n2 2 3\n1 1 1.0 0.0\n2 1 0.0 2.0\n2 2 3.0 0.0\n";
        let a = read(text.as_bytes()).unwrap();
        assert_eq!(a.get(1, 0), C64::new(0.0, 2.0));
        assert_eq!(a.get(0, 1), C64::new(0.0, -2.0));
    }

    #[test]
    fn real_symmetric_array() {
        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let a = read(text.as_bytes()).unwrap();
        assert_eq!(a.get(0, 1), C64::new(2.0, 0.0));
        assert_eq!(a.get(1, 1), C64::new(3.0, 0.0));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(read("%%MatrixMarket vector coordinate real general\n".as_bytes()).is_err());
        assert!(read("%%MatrixMarket matrix coordinate real general\n2 3 0\n".as_bytes()).is_err());
        assert!(read("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n".as_bytes()).is_err());
        assert!(read("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n".as_bytes()).is_err());
        assert!(read("%%MatrixMarket matrix array real general\n1 1\nnan\n".as_bytes()).is_err());
    }
}
