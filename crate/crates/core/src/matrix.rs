//! Dense complex matrices and their on-disk formats.
//!
//! Text format (UTF-8):
//!
//! ```text
//! # comment lines and blank lines are ignored
//! 2 2
//! 1,0 0,-1
//! 0,1 1,0
//! ```
//!
//! The first non-comment line carries `rows cols`; each following line is one
//! row of whitespace-separated `re,im` pairs.
//!
//! Binary format: the 4-byte magic `OPLM`, then `rows` and `cols` as
//! little-endian `u64`, then `rows * cols` entries in row-major order, each an
//! interleaved little-endian `f64` pair `re, im`.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

const BINARY_MAGIC: &[u8; 4] = b"OPLM";

pub fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn ones(rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_element(rows, cols, c(1.0, 0.0))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |j, k| if j == k { c(values[j], 0.0) } else { C64::default() })
}

pub fn diag(values: &[C64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |j, k| if j == k { values[j] } else { C64::default() })
}

pub fn from_real_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |j, k| c(f(j, k), 0.0))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_finite(m: &CMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

pub(crate) fn ensure_same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        })
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Conjugate transpose.
pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Row-major outer product `xi_j * eta_k`.
pub fn outer(xi: &[C64], eta: &[C64]) -> CMatrix {
    CMatrix::from_fn(xi.len(), eta.len(), |j, k| xi[j] * eta[k])
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_text(m: &CMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|k| format!("{},{}", m[(j, k)].re, m[(j, k)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn from_text(text: &str) -> Result<CMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing dimension header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected `rows cols`, found `{header}`"),
        });
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad dimension `{s}`: {e}"),
        })
    };
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (line, content) in lines {
        if seen_rows == rows {
            return Err(Error::Parse {
                line,
                msg: format!("more than {rows} rows"),
            });
        }
        let mut count = 0;
        for token in content.split_whitespace() {
            let (re, im) = token.split_once(',').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `re,im`, found `{token}`"),
            })?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad number `{s}`: {e}"),
                })
            };
            data.push(c(parse(re)?, parse(im)?));
            count += 1;
        }
        if count != cols {
            return Err(Error::Parse {
                line,
                msg: format!("expected {cols} entries, found {count}"),
            });
        }
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {rows} rows, found {seen_rows}"),
        });
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

pub fn to_binary(m: &CMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 16 * m.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            out.extend_from_slice(&m[(j, k)].re.to_le_bytes());
            out.extend_from_slice(&m[(j, k)].im.to_le_bytes());
        }
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<CMatrix> {
    let bad = |msg: &str| Error::InvalidInput(format!("binary matrix: {msg}"));
    if bytes.len() < 20 || &bytes[..4] != BINARY_MAGIC {
        return Err(bad("missing OPLM header"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let rows = word(4) as usize;
    let cols = word(12) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(20))
        .ok_or_else(|| bad("dimension overflow"))?;
    if bytes.len() != expected {
        return Err(bad(&format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let float = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let data: Vec<C64> = (0..rows * cols)
        .map(|i| c(float(20 + 16 * i), float(28 + 16 * i)))
        .collect();
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

/// Reads a matrix, picking the binary format when the file starts with the
/// binary magic and the text format otherwise.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    let mut bytes = Vec::new();
    std::fs::File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    if bytes.starts_with(BINARY_MAGIC) {
        from_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::InvalidInput("matrix file is not UTF-8".into()))?;
        from_text(&text)
    }
}

pub fn write_matrix_text(path: impl AsRef<Path>, m: &CMatrix) -> Result<()> {
    std::fs::write(path, to_text(m))?;
    Ok(())
}

pub fn write_matrix_binary(path: impl AsRef<Path>, m: &CMatrix) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_binary(m))?;
    Ok(())
}
