//! `GDAC` activation files.
//!
//! Layout (all little-endian): magic `GDAC`, version `u32 = 1`, `d_act: u32`,
//! `row_count: u64`, then `row_count × d_act` `f32` values, row-major.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::data::ActivationBatch;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"GDAC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: u64 = 20;

/// Writes all `batches` as one file. Every batch must have `d_act` columns.
pub fn write_activations<T: Scalar>(
    path: impl AsRef<Path>,
    d_act: usize,
    batches: &[Matrix<T>],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_activations(&mut w, d_act, batches).map_err(|e| match e {
        EncodeError::Io(e) => Error::io(path, e),
        EncodeError::Other(e) => e,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

enum EncodeError {
    Io(io::Error),
    Other(Error),
}

impl From<io::Error> for EncodeError {
    fn from(e: io::Error) -> Self {
        EncodeError::Io(e)
    }
}

fn encode_activations<T: Scalar, W: Write>(
    w: &mut W,
    d_act: usize,
    batches: &[Matrix<T>],
) -> Result<(), EncodeError> {
    let mut rows = 0u64;
    for b in batches {
        if b.cols() != d_act {
            return Err(EncodeError::Other(Error::dim(
                "write_activations",
                d_act,
                b.cols(),
            )));
        }
        rows += b.rows() as u64;
    }
    let d = u32::try_from(d_act)
        .map_err(|_| EncodeError::Other(Error::Config(format!("d_act {d_act} exceeds u32"))))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&d.to_le_bytes())?;
    w.write_all(&rows.to_le_bytes())?;
    for b in batches {
        for &v in b.as_slice() {
            let v = v.to_f32().unwrap_or(f32::NAN);
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Streaming reader over a `GDAC` file, yielding batches of at most `chunk_rows`.
pub struct ActivationReader<R> {
    inner: R,
    path: PathBuf,
    d_act: usize,
    row_count: u64,
    rows_read: u64,
    chunk_rows: usize,
}

pub fn read_activations(
    path: impl AsRef<Path>,
    chunk_rows: usize,
) -> Result<ActivationReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let file_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut reader = ActivationReader::new(BufReader::new(file), path, chunk_rows)?;
    let expected = HEADER_LEN + reader.row_count * reader.d_act as u64 * 4;
    if file_len != expected {
        return Err(Error::Format {
            offset: file_len.min(expected),
            message: format!("expected file length {expected} bytes, found {file_len}"),
        });
    }
    reader.path = path.to_path_buf();
    Ok(reader)
}

/// Reads a whole file into one matrix.
pub fn read_all_activations<T: Scalar>(path: impl AsRef<Path>) -> Result<Matrix<T>> {
    let reader = read_activations(path, 1 << 16)?;
    let mut out = Matrix::zeros(0, reader.d_act());
    for batch in reader {
        out.vstack(&batch?.data.cast())?;
    }
    Ok(out)
}

impl<R: Read> ActivationReader<R> {
    pub fn new(mut inner: R, path: &Path, chunk_rows: usize) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN as usize];
        let mut filled = 0;
        while filled < header.len() {
            match inner.read(&mut header[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::io(path, e)),
            }
        }
        if filled < 4 || &header[..4] != MAGIC {
            return Err(Error::Format {
                offset: 0,
                message: "missing GDAC magic".into(),
            });
        }
        if filled < header.len() {
            return Err(Error::Format {
                offset: filled as u64,
                message: format!("expected {HEADER_LEN}-byte header, found {filled} bytes"),
            });
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format {
                offset: 4,
                message: format!("unsupported version {version}"),
            });
        }
        let d_act = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let row_count = u64::from_le_bytes(header[12..20].try_into().unwrap());
        if d_act == 0 && row_count > 0 {
            return Err(Error::Format {
                offset: 8,
                message: "d_act is zero but rows are present".into(),
            });
        }
        Ok(Self {
            inner,
            path: path.to_path_buf(),
            d_act,
            row_count,
            rows_read: 0,
            chunk_rows: chunk_rows.max(1),
        })
    }

    pub fn d_act(&self) -> usize {
        self.d_act
    }

    pub fn row_count(&self) -> u64 {
        self.row_count
    }

    fn read_chunk<T: Scalar>(&mut self) -> Result<ActivationBatch<T>> {
        let rows = (self.row_count - self.rows_read).min(self.chunk_rows as u64) as usize;
        let offset = HEADER_LEN + self.rows_read * self.d_act as u64 * 4;
        let mut bytes = vec![0u8; rows * self.d_act * 4];
        let mut filled = 0;
        while filled < bytes.len() {
            match self.inner.read(&mut bytes[filled..]) {
                Ok(0) => {
                    let total = HEADER_LEN + self.row_count * self.d_act as u64 * 4;
                    return Err(Error::Format {
                        offset: offset + filled as u64,
                        message: format!(
                            "truncated data: expected {total} bytes, found {}",
                            offset + filled as u64
                        ),
                    });
                }
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::io(&self.path, e)),
            }
        }
        let data: Vec<T> = bytes
            .chunks_exact(4)
            .map(|c| T::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
            .collect();
        self.rows_read += rows as u64;
        Ok(ActivationBatch::new(Matrix::from_vec(rows, self.d_act, data)?))
    }
}

impl<R: Read> Iterator for ActivationReader<R> {
    type Item = Result<ActivationBatch<f64>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.rows_read >= self.row_count {
            return None;
        }
        let item = self.read_chunk();
        if item.is_err() {
            // A failed read poisons the rest of the stream.
            self.rows_read = self.row_count;
        }
        Some(item)
    }
}
