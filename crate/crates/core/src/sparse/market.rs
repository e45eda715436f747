//! Matrix Market exchange: coordinate format for sparse matrices, array format
//! for dense vectors. Indices are 1-based on disk and 0-based in memory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

struct Header {
    layout: Layout,
    symmetry: Symmetry,
}

fn mm_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_header(path: &Path, text: &str) -> Result<Header> {
    let tokens: Vec<String> = text.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(mm_error(path, 1, format!("malformed banner `{text}`")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(mm_error(path, 1, format!("unsupported layout `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(mm_error(path, 1, format!("unsupported field type `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(mm_error(path, 1, format!("unsupported symmetry `{other}`"))),
    };
    Ok(Header { layout, symmetry })
}

struct Parsed {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

fn parse_file(path: &Path) -> Result<Parsed> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => parse_header(path, &line?)?,
        None => return Err(mm_error(path, 1, "empty file")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut array_pos = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_index = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| mm_error(path, lineno, format!("invalid integer `{s}`")))
        };
        let parse_value = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| mm_error(path, lineno, format!("invalid real `{s}`")))
        };

        let Some((nrows, ncols, count)) = size else {
            size = Some(match header.layout {
                Layout::Coordinate if fields.len() == 3 => (
                    parse_index(fields[0])?,
                    parse_index(fields[1])?,
                    parse_index(fields[2])?,
                ),
                Layout::Array if fields.len() == 2 => {
                    let (r, c) = (parse_index(fields[0])?, parse_index(fields[1])?);
                    (r, c, r * c)
                }
                _ => return Err(mm_error(path, lineno, format!("malformed size line `{trimmed}`"))),
            });
            triplets.reserve(size.unwrap().2);
            continue;
        };

        match header.layout {
            Layout::Coordinate => {
                if array_pos >= count {
                    return Err(mm_error(path, lineno, "more entries than declared"));
                }
                if fields.len() != 3 {
                    return Err(mm_error(
                        path,
                        lineno,
                        format!("expected `row col value`, found `{trimmed}`"),
                    ));
                }
                let (r, c, v) = (
                    parse_index(fields[0])?,
                    parse_index(fields[1])?,
                    parse_value(fields[2])?,
                );
                if r == 0 || c == 0 || r > nrows || c > ncols {
                    return Err(mm_error(
                        path,
                        lineno,
                        format!("entry ({r}, {c}) outside {nrows}x{ncols}"),
                    ));
                }
                let (r, c) = (r - 1, c - 1);
                triplets.push((r, c, v));
                match header.symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric if r != c => triplets.push((c, r, v)),
                    Symmetry::SkewSymmetric if r != c => triplets.push((c, r, -v)),
                    _ => {}
                }
                array_pos += 1;
            }
            Layout::Array => {
                if header.symmetry != Symmetry::General {
                    return Err(mm_error(path, lineno, "only general array storage is supported"));
                }
                if fields.len() != 1 {
                    return Err(mm_error(path, lineno, format!("expected one value, found `{trimmed}`")));
                }
                if array_pos >= count {
                    return Err(mm_error(path, lineno, "more entries than declared"));
                }
                let v = parse_value(fields[0])?;
                // column-major order
                triplets.push((array_pos % nrows, array_pos / nrows, v));
                array_pos += 1;
            }
        }
    }

    let Some((nrows, ncols, count)) = size else {
        return Err(mm_error(path, 1, "missing size line"));
    };
    if array_pos != count {
        return Err(mm_error(
            path,
            1,
            format!("declared {count} entries but found {array_pos}"),
        ));
    }
    Ok(Parsed {
        nrows,
        ncols,
        triplets,
    })
}

/// Reads a sparse matrix. Symmetric storage is expanded to general storage.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let parsed = parse_file(path)?;
    CsrMatrix::from_triplets(parsed.nrows, parsed.ncols, &parsed.triplets)
}

/// Reads a dense vector stored as an `n x 1` array (a coordinate `n x 1` file is accepted too).
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let parsed = parse_file(path)?;
    if parsed.ncols != 1 {
        return Err(mm_error(
            path,
            1,
            format!("expected a single column, found {} columns", parsed.ncols),
        ));
    }
    let mut out = vec![0.0; parsed.nrows];
    let mut seen = vec![false; parsed.nrows];
    for (r, _, v) in parsed.triplets {
        // assign first so a stored -0.0 survives
        if seen[r] {
            out[r] += v;
        } else {
            out[r] = v;
            seen[r] = true;
        }
    }
    Ok(out)
}

/// Writes a matrix in coordinate general format with 17 significant digits.
pub fn write_matrix(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a vector in array general format with 17 significant digits.
pub fn write_vector(x: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} 1", x.len())?;
    for v in x {
        writeln!(out, "{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn single_entry() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.mtx", "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 5.0\n");
        let a = read_matrix(&p).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), Some(5.0));
    }

    #[test]
    fn order_independent() {
        let dir = tempfile::tempdir().unwrap();
        let sorted = write(
            &dir,
            "s.mtx",
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 3\n1 1 1.5\n1 3 2.0\n2 2 -1\n",
        );
        let shuffled = write(
            &dir,
            "u.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 3 3\n2 2 -1\n1 3 2.0\n1 1 1.5\n",
        );
        assert_eq!(read_matrix(sorted).unwrap(), read_matrix(shuffled).unwrap());
    }

    #[test]
    fn symmetric_expansion_matches_general_file() {
        let dir = tempfile::tempdir().unwrap();
        let sym = write(
            &dir,
            "sym.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 4\n2 1 3\n2 2 1\n",
        );
        let gen = write(
            &dir,
            "gen.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 4\n1 2 3\n2 1 3\n2 2 1\n",
        );
        let a = read_matrix(sym).unwrap();
        assert_eq!(a.get(0, 1), Some(3.0));
        assert_eq!(a.get(1, 0), Some(3.0));
        assert_eq!(a, read_matrix(gen).unwrap());
    }

    #[test]
    fn unsupported_fields_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "c.mtx", "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
        let err = read_matrix(&p).unwrap_err();
        assert!(matches!(err, Error::MatrixMarket { line: 1, .. }), "{err}");
        let p = write(&dir, "p.mtx", "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n");
        assert!(matches!(read_matrix(&p).unwrap_err(), Error::MatrixMarket { line: 1, .. }));
        let p = write(&dir, "bad.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 3\n");
        let err = read_matrix(&p).unwrap_err();
        assert!(matches!(err, Error::MatrixMarket { line: 4, .. }), "{err}");
        assert!(err.to_string().contains(":4:"));
    }

    #[test]
    fn vector_extremes_are_bitwise_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.mtx");
        let x = vec![1e-300, 1e300, -0.1, f64::MIN_POSITIVE / 8.0];
        write_vector(&x, &p).unwrap();
        let y = read_vector(&p).unwrap();
        assert_eq!(x.len(), y.len());
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn identity_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("i.mtx");
        let a = CsrMatrix::identity(4);
        write_matrix(&a, &p).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), a);
    }
}
