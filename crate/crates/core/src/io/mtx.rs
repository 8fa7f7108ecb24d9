use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::scalar::{Field, Scalar};

/// Matrix read from a Matrix Market file: coordinate files become CSR,
/// array files become dense.
#[derive(Debug, Clone)]
pub enum MtxMatrix<T> {
    Sparse(CsrMatrix<T>),
    Dense(DenseMatrix<T>),
}

impl<T: Scalar> MtxMatrix<T> {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MtxMatrix::Sparse(a) => (a.rows(), a.cols()),
            MtxMatrix::Dense(a) => a.shape(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        match self {
            MtxMatrix::Sparse(a) => a.to_dense(),
            MtxMatrix::Dense(a) => a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Parsed banner line of a Matrix Market file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MtxHeader {
    format: Format,
    pub field: Field,
    symmetry: Symmetry,
}

struct Lines<R> {
    inner: R,
    path: PathBuf,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line_no,
            message: message.into(),
        }
    }

    /// Next line that is neither blank nor a comment.
    fn next_data(&mut self) -> Result<Option<String>> {
        loop {
            self.buf.clear();
            if self.inner.read_line(&mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let t = self.buf.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Ok(Some(t.to_string()));
            }
        }
    }

    fn require(&mut self, missing: &str) -> Result<String> {
        match self.next_data()? {
            Some(l) => Ok(l),
            None => Err(self.err(missing)),
        }
    }
}

fn parse_header<R: BufRead>(lines: &mut Lines<R>) -> Result<MtxHeader> {
    lines.buf.clear();
    if lines.inner.read_line(&mut lines.buf)? == 0 {
        lines.line_no = 1;
        return Err(lines.err("empty file"));
    }
    lines.line_no = 1;
    let words: Vec<String> = lines.buf.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(lines.err("expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let format = match words[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(lines.err(format!("unknown format `{other}`"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        "pattern" => return Err(lines.err("pattern matrices carry no values and are not supported")),
        other => return Err(lines.err(format!("unknown field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(lines.err(format!("unknown symmetry `{other}`"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(lines.err("hermitian symmetry requires the complex field"));
    }
    Ok(MtxHeader { format, field, symmetry })
}

fn parse_usize<R: BufRead>(lines: &Lines<R>, tok: Option<&str>, what: &str) -> Result<usize> {
    tok.ok_or_else(|| lines.err(format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|_| lines.err(format!("invalid {what}")))
}

fn parse_value<R: BufRead, T: Scalar>(lines: &Lines<R>, toks: &mut std::str::SplitWhitespace<'_>, field: Field) -> Result<T> {
    let mut num = |what: &str| -> Result<f64> {
        let t = toks.next().ok_or_else(|| lines.err(format!("missing {what}")))?;
        let v = t.parse::<f64>().map_err(|_| lines.err(format!("invalid number `{t}`")))?;
        if !v.is_finite() {
            return Err(lines.err(format!("non-finite value `{t}`")));
        }
        Ok(v)
    };
    let re = num("value")?;
    let im = if field == Field::Complex { num("imaginary part")? } else { 0.0 };
    Ok(T::from_parts(re, im))
}

/// Reads only the banner, e.g. to pick the scalar type before a full read.
pub fn read_matrix_market_header(path: impl AsRef<Path>) -> Result<MtxHeader> {
    let path = path.as_ref();
    let mut lines = Lines {
        inner: BufReader::new(File::open(path)?),
        path: path.to_path_buf(),
        line_no: 0,
        buf: String::new(),
    };
    parse_header(&mut lines)
}

/// Reads a Matrix Market file, expanding symmetric, skew-symmetric and
/// Hermitian storage to the full matrix.
///
/// Complex files cannot be read into a real scalar type.
pub fn read_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<MtxMatrix<T>> {
    let path = path.as_ref();
    let mut lines = Lines {
        inner: BufReader::new(File::open(path)?),
        path: path.to_path_buf(),
        line_no: 0,
        buf: String::new(),
    };
    let header = parse_header(&mut lines)?;
    if header.field == Field::Complex && T::FIELD == Field::Real {
        return Err(lines.err("complex matrix cannot be read as real"));
    }
    let size_line = lines.require("missing size line")?;
    let mut toks = size_line.split_whitespace();
    let rows = parse_usize(&lines, toks.next(), "row count")?;
    let cols = parse_usize(&lines, toks.next(), "column count")?;
    let mirrored = header.symmetry != Symmetry::General;
    if mirrored && rows != cols {
        return Err(lines.err("symmetric storage requires a square matrix"));
    }
    let mirror = |v: T| -> T {
        match header.symmetry {
            Symmetry::Hermitian => v.conj(),
            Symmetry::SkewSymmetric => -v,
            _ => v,
        }
    };
    match header.format {
        Format::Coordinate => {
            let nnz = parse_usize(&lines, toks.next(), "entry count")?;
            let mut triplets = Vec::with_capacity(if mirrored { 2 * nnz } else { nnz });
            for _ in 0..nnz {
                let line = lines.require("fewer entries than declared")?;
                let mut t = line.split_whitespace();
                let i = parse_usize(&lines, t.next(), "row index")?;
                let j = parse_usize(&lines, t.next(), "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(lines.err(format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                let v: T = parse_value(&lines, &mut t, header.field)?;
                if mirrored && j > i {
                    return Err(lines.err("symmetric storage must list the lower triangle only"));
                }
                if header.symmetry == Symmetry::SkewSymmetric && i == j {
                    return Err(lines.err("skew-symmetric storage cannot have diagonal entries"));
                }
                triplets.push((i - 1, j - 1, v));
                if mirrored && i != j {
                    triplets.push((j - 1, i - 1, mirror(v)));
                }
            }
            if lines.next_data()?.is_some() {
                return Err(lines.err("more entries than declared"));
            }
            Ok(MtxMatrix::Sparse(CsrMatrix::from_triplets(rows, cols, &triplets)?))
        }
        Format::Array => {
            let mut a = DenseMatrix::<T>::zeros(rows, cols);
            for j in 0..cols {
                let start = match header.symmetry {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in start..rows {
                    let line = lines.require("fewer entries than declared")?;
                    let mut t = line.split_whitespace();
                    let v: T = parse_value(&lines, &mut t, header.field)?;
                    a.col_mut(j)[i] = v;
                    if mirrored && i != j {
                        a.col_mut(i)[j] = mirror(v);
                    }
                }
            }
            if lines.next_data()?.is_some() {
                return Err(lines.err("more entries than declared"));
            }
            Ok(MtxMatrix::Dense(a))
        }
    }
}

fn write_value<W: Write, T: Scalar>(w: &mut W, v: T) -> std::io::Result<()> {
    // `{:e}` prints the shortest representation that parses back exactly.
    if T::is_complex() {
        write!(w, "{:e} {:e}", v.re(), v.im())
    } else {
        write!(w, "{:e}", v.re())
    }
}

fn banner<T: Scalar>(format: &str) -> String {
    let field = if T::is_complex() { "complex" } else { "real" };
    format!("%%MatrixMarket matrix {format} {field} general")
}

/// Writes a sparse matrix in coordinate/general format.
pub fn write_matrix_market_sparse<T: Scalar>(path: impl AsRef<Path>, a: &CsrMatrix<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", banner::<T>("coordinate"))?;
    writeln!(w, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for r in 0..a.rows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            write!(w, "{} {} ", r + 1, c + 1)?;
            write_value(&mut w, v)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a dense matrix in array/general format (column-major).
pub fn write_matrix_market_dense<T: Scalar>(path: impl AsRef<Path>, a: &DenseMatrix<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", banner::<T>("array"))?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for &v in a.data() {
        write_value(&mut w, v)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn coordinate_diagonal() {
        let f = file("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 2.0\n");
        let a = read_matrix_market::<f64>(f.path()).unwrap().to_dense();
        assert_eq!(a, DenseMatrix::from_diag(&[1.0, 2.0]));
    }

    #[test]
    fn symmetric_expansion() {
        let f = file("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 3.0\n");
        let a = read_matrix_market::<f64>(f.path()).unwrap().to_dense();
        assert_eq!(a[(0, 1)], 3.0);
        assert_eq!(a[(1, 0)], 3.0);
    }

    #[test]
    fn hermitian_conjugates_and_symmetric_does_not() {
        let f = file("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 1 2\n");
        let a = read_matrix_market::<Complex64>(f.path()).unwrap().to_dense();
        assert_eq!(a[(1, 0)], Complex64::new(1.0, 2.0));
        assert_eq!(a[(0, 1)], Complex64::new(1.0, -2.0));
        let f = file("%%MatrixMarket matrix coordinate complex symmetric\n2 2 1\n2 1 1 2\n");
        let a = read_matrix_market::<Complex64>(f.path()).unwrap().to_dense();
        assert_eq!(a[(0, 1)], Complex64::new(1.0, 2.0));
    }

    #[test]
    fn pattern_rejected_with_line() {
        let f = file("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
        match read_matrix_market::<f64>(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", 3),
            ("%%MatrixMarket tensor coordinate real general\n", 1),
            ("%%MatrixMarket matrix coordinate real general\n2 x 1\n", 2),
        ];
        for (text, want) in cases {
            let f = file(text);
            match read_matrix_market::<f64>(f.path()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        let f = file("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 1\n");
        assert!(read_matrix_market::<f64>(f.path()).is_err());
    }

    #[test]
    fn array_symmetric() {
        let f = file("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n");
        let a = read_matrix_market::<f64>(f.path()).unwrap().to_dense();
        assert_eq!(a, DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 3.0]]).unwrap());
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let vals = [0.1, -1.0 / 3.0, std::f64::consts::PI * 1e-300, 1e300 / 7.0];
        let a = CsrMatrix::from_triplets(3, 4, &[(0, 1, vals[0]), (1, 3, vals[1]), (2, 0, vals[2]), (2, 2, vals[3])]).unwrap();
        let p = dir.path().join("a.mtx");
        write_matrix_market_sparse(&p, &a).unwrap();
        let b = match read_matrix_market::<f64>(&p).unwrap() {
            MtxMatrix::Sparse(b) => b,
            _ => unreachable!(),
        };
        assert_eq!(a, b);
        let p2 = dir.path().join("b.mtx");
        write_matrix_market_sparse(&p2, &b).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());

        let c = DenseMatrix::from_fn(3, 2, |i, j| Complex64::new(vals[i] * (j + 1) as f64, -vals[3 - i]));
        let p3 = dir.path().join("c.mtx");
        write_matrix_market_dense(&p3, &c).unwrap();
        assert_eq!(read_matrix_market::<Complex64>(&p3).unwrap().to_dense(), c);
    }
}
