//! Plain-text frame and seed files.
//!
//! Frame file: a header line `n p kind`, then `n` lines each holding `p`
//! whitespace-separated `re im` pairs (row-major). Seed file: one `re im`
//! pair per line. Numbers use the shortest representation that round-trips.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::{Frame, GaborForm};
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

pub const FRAME_FORMAT_NOTE: &str = "header `n p kind`, then n rows of p `re im` pairs";

/// Max entry deviation tolerated when re-deriving a Gabor frame from a file.
const GABOR_REBUILD_TOL: f64 = 1e-9;

pub fn frame_to_string(frame: &Frame) -> String {
    let dense = frame.to_dense();
    let (n, p) = (dense.rows(), dense.cols());
    let mut out = format!("{n} {p} {}\n", frame.kind().token());
    for i in 0..n {
        let row: Vec<String> = (0..p)
            .map(|j| {
                let z = dense[(i, j)];
                format!("{} {}", z.re, z.im)
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_frame(frame: &Frame, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(frame_to_string(frame).as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn parse_f64(tok: &str, ctx: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::parse(ctx, format!("`{tok}` is not a number")))
}

/// Parses a frame file. A `gabor` header whose columns match the Gabor
/// construction from its first column is restored with its operator.
pub fn frame_from_str(text: &str) -> Result<Frame> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::parse("frame file", "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 {
        return Err(Error::parse("frame header", "expected `n p kind`"));
    }
    let n: usize = h[0]
        .parse()
        .map_err(|_| Error::parse("frame header", "n is not an integer"))?;
    let p: usize = h[1]
        .parse()
        .map_err(|_| Error::parse("frame header", "p is not an integer"))?;
    let kind = h[2];
    if !matches!(kind, "gabor" | "gaussian" | "explicit") {
        return Err(Error::parse("frame header", format!("unknown kind `{kind}`")));
    }
    let mut m = ComplexMatrix::zeros(n.max(1), p.max(1));
    let mut rows_read = 0;
    for (i, line) in lines.enumerate() {
        if i >= n {
            return Err(Error::parse("frame file", format!("more than {n} rows")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 * p {
            return Err(Error::parse(
                "frame file",
                format!("row {i} has {} numbers, expected {}", toks.len(), 2 * p),
            ));
        }
        for j in 0..p {
            let ctx = format!("frame row {i}");
            m[(i, j)] = Complex64::new(parse_f64(toks[2 * j], &ctx)?, parse_f64(toks[2 * j + 1], &ctx)?);
        }
        rows_read += 1;
    }
    if rows_read != n {
        return Err(Error::parse("frame file", format!("{rows_read} rows, expected {n}")));
    }
    let m = ComplexMatrix::from_col_major(n, p, m.as_slice().to_vec())?;

    if kind == "gabor" && p == n * n {
        let seed = m.col(0).to_vec();
        if let Ok(g) = Frame::gabor(&seed, GaborForm::Operator) {
            let op = g.gabor_operator().expect("gabor frame");
            let matches = (0..p).all(|j| {
                op.column(j)
                    .iter()
                    .zip(m.col(j))
                    .all(|(a, b)| (a - b).norm() <= GABOR_REBUILD_TOL)
            });
            if matches {
                let form = if n > super::DENSE_GABOR_MAX_N {
                    GaborForm::Operator
                } else {
                    GaborForm::Explicit
                };
                return Frame::gabor(&seed, form);
            }
        }
    }
    Ok(Frame::explicit(m))
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    frame_from_str(&text)
}

pub fn seed_to_string(seed: &[Complex64]) -> String {
    seed.iter().map(|z| format!("{} {}\n", z.re, z.im)).collect()
}

pub fn write_seed(seed: &[Complex64], path: &Path) -> Result<()> {
    fs::write(path, seed_to_string(seed)).map_err(|e| Error::io(path, e))
}

pub fn seed_from_str(text: &str) -> Result<Vec<Complex64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::parse("seed file", format!("line {i} is not an `re im` pair")));
            }
            let ctx = format!("seed line {i}");
            Ok(Complex64::new(parse_f64(toks[0], &ctx)?, parse_f64(toks[1], &ctx)?))
        })
        .collect()
}

pub fn read_seed(path: &Path) -> Result<Vec<Complex64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    seed_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::alltop_seed;

    #[test]
    fn gabor_round_trip_restores_operator() {
        let f = Frame::alltop(5).unwrap();
        let text = frame_to_string(&f);
        assert!(text.starts_with("5 25 gabor\n"));
        let back = frame_from_str(&text).unwrap();
        assert!(back.gabor_operator().is_some());
        assert_eq!(back.to_dense(), f.to_dense());
    }

    #[test]
    fn gaussian_round_trip_is_exact() {
        let f = Frame::gaussian(3, 7, 9, true).unwrap();
        let back = frame_from_str(&frame_to_string(&f)).unwrap();
        assert_eq!(back.to_dense(), f.to_dense());
        assert_eq!(back.kind().token(), "explicit");
    }

    #[test]
    fn malformed_frames() {
        assert!(frame_from_str("").is_err());
        assert!(frame_from_str("2 2\n1 0 0 0\n0 0 1 0\n").is_err());
        assert!(frame_from_str("2 2 explicit\n1 0 0 0\n").is_err());
        assert!(frame_from_str("2 2 explicit\n1 0 0 0\n0 0 x 0\n").is_err());
        assert!(frame_from_str("2 2 weird\n1 0 0 0\n0 0 1 0\n").is_err());
        assert!(frame_from_str("1 1 explicit\n1 0 0\n").is_err());
    }

    #[test]
    fn seed_round_trip() {
        let g = alltop_seed(7).unwrap();
        assert_eq!(seed_from_str(&seed_to_string(&g)).unwrap(), g);
        assert!(seed_from_str("1 2 3\n").is_err());
    }
}
