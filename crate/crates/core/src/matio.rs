//! Binary matrix files.
//!
//! Layout, all little-endian: the 8-byte magic `TWOINFMX`, then `version`,
//! `rows` and `cols` as `u64`, then `rows · cols` `f64` values in row-major
//! order. Values are always stored as `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: [u8; 8] = *b"TWOINFMX";
pub const FORMAT_VERSION: u64 = 1;
pub const HEADER_LEN: u64 = 32;

pub fn write_matrix_to<T: Scalar, W: Write>(mat: &DenseMatrix<T>, mut w: W) -> std::io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(mat.rows() as u64).to_le_bytes())?;
    w.write_all(&(mat.cols() as u64).to_le_bytes())?;
    for v in mat.data() {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    w.flush()
}

pub fn write_matrix<T: Scalar>(path: &Path, mat: &DenseMatrix<T>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_matrix_to(mat, BufWriter::new(file)).map_err(io_err)
}

/// Parses a matrix from `r`; `path` is only used in error messages.
pub fn read_matrix_from<T: Scalar, R: Read>(mut r: R, path: &Path) -> Result<DenseMatrix<T>> {
    let fmt_err = |offset: u64, reason: String| Error::Format {
        path: path.to_path_buf(),
        offset,
        reason,
    };
    let mut offset = 0u64;
    let mut word = [0u8; 8];
    let mut next = |what: &str, offset: &mut u64, buf: &mut [u8; 8]| -> Result<()> {
        read_full(&mut r, buf).map_err(|e| match e {
            ReadFail::Eof(got) => fmt_err(*offset + got as u64, format!("unexpected end of file reading {what}")),
            ReadFail::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
        })?;
        *offset += 8;
        Ok(())
    };

    next("magic", &mut offset, &mut word)?;
    if word != MAGIC {
        return Err(fmt_err(0, "bad magic, not a matrix file".into()));
    }
    next("version", &mut offset, &mut word)?;
    let version = u64::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(fmt_err(8, format!("unsupported version {version}")));
    }
    next("row count", &mut offset, &mut word)?;
    let rows = u64::from_le_bytes(word);
    next("column count", &mut offset, &mut word)?;
    let cols = u64::from_le_bytes(word);
    let len = rows
        .checked_mul(cols)
        .filter(|&n| n <= (usize::MAX / 8) as u64)
        .ok_or_else(|| fmt_err(16, format!("dimensions {rows}x{cols} overflow")))? as usize;

    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        let at = offset;
        next("matrix entry", &mut offset, &mut word)?;
        let v = f64::from_le_bytes(word);
        if !v.is_finite() {
            return Err(fmt_err(at, format!("non-finite entry {v}")));
        }
        data.push(T::lit(v));
    }
    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => {}
        Ok(_) => return Err(fmt_err(offset, "trailing bytes after matrix data".into())),
        Err(source) => {
            return Err(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    }
    DenseMatrix::new(rows as usize, cols as usize, data)
}

pub fn read_matrix<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix_from(BufReader::new(file), path)
}

enum ReadFail {
    Eof(usize),
    Io(std::io::Error),
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> std::result::Result<(), ReadFail> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => return Err(ReadFail::Eof(got)),
            Ok(k) => got += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(ReadFail::Io(e)),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&[[1.0, -2.5, 3.25], [0.0, 1e-300, -7.0]]).unwrap()
    }

    fn bytes(m: &DenseMatrix<f64>) -> Vec<u8> {
        let mut buf = Vec::new();
        write_matrix_to(m, &mut buf).unwrap();
        buf
    }

    #[test]
    fn layout_is_fixed() {
        let buf = bytes(&sample());
        assert_eq!(buf.len() as u64, HEADER_LEN + 6 * 8);
        assert_eq!(&buf[..8], b"TWOINFMX");
        assert_eq!(&buf[8..16], &1u64.to_le_bytes());
        assert_eq!(&buf[16..24], &2u64.to_le_bytes());
        assert_eq!(&buf[24..32], &3u64.to_le_bytes());
        assert_eq!(&buf[40..48], &(-2.5f64).to_le_bytes());
    }

    #[test]
    fn errors_name_offsets() {
        let p = Path::new("m.bin");
        let mut buf = bytes(&sample());
        buf.truncate(45);
        match read_matrix_from::<f64, _>(&buf[..], p) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 45),
            other => panic!("{other:?}"),
        }

        let mut bad = bytes(&sample());
        bad[0] = b'X';
        assert!(matches!(read_matrix_from::<f64, _>(&bad[..], p), Err(Error::Format { offset: 0, .. })));

        let mut nan = bytes(&sample());
        nan[48..56].copy_from_slice(&f64::NAN.to_le_bytes());
        let err = read_matrix_from::<f64, _>(&nan[..], p).unwrap_err();
        assert!(matches!(err, Error::Format { offset: 48, .. }));
        assert!(err.to_string().contains("m.bin"));

        let mut extra = bytes(&sample());
        extra.push(0);
        assert!(matches!(read_matrix_from::<f64, _>(&extra[..], p), Err(Error::Format { offset: 80, .. })));
    }
}
