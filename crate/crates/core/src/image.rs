//! Grayscale images, PGM (P2/P5) I/O, and the column-major vectorization used
//! by every 2-D operator in the crate.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// `rows x cols` grayscale image with real-valued pixels, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("image dimensions must be positive".into()));
        }
        if pixels.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: pixels.len(),
            });
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.pixels[r * self.cols + c] = v;
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.rows == self.cols {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Stacks the columns: `x[r + rows * c] = X[r, c]`.
    pub fn to_column_major(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.pixels.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                x.push(self.get(r, c));
            }
        }
        x
    }

    /// Inverse of [`GrayImage::to_column_major`].
    pub fn from_column_major(rows: usize, cols: usize, x: &[f64]) -> Result<Self> {
        let mut img = Self::zeros(rows, cols)?;
        if x.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: x.len(),
            });
        }
        for c in 0..cols {
            for r in 0..rows {
                img.set(r, c, x[r + rows * c]);
            }
        }
        Ok(img)
    }

    /// Reads a binary (P5) or ASCII (P2) PGM; pixels are scaled to `[0, 1]`.
    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        decode_pgm(&fs::read(path)?)
    }

    /// Writes an 8-bit binary PGM. Values are clamped to `[0, 1]` and rounded
    /// to the nearest level.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_pgm_with_depth(path, 255)
    }

    /// `maxval` is 255 (one byte per pixel) or up to 65535 (two bytes,
    /// big-endian).
    pub fn write_pgm_with_depth(&self, path: impl AsRef<Path>, maxval: u16) -> Result<()> {
        let bytes = encode_pgm(self, maxval)?;
        let mut f = fs::File::create(path)?;
        f.write_all(&bytes)?;
        Ok(())
    }
}

fn encode_pgm(img: &GrayImage, maxval: u16) -> Result<Vec<u8>> {
    if maxval == 0 {
        return Err(Error::UnsupportedFormat("maxval must be positive".into()));
    }
    let mut out = format!("P5\n{} {}\n{}\n", img.cols, img.rows, maxval).into_bytes();
    let scale = maxval as f64;
    for &v in &img.pixels {
        let level = (v.clamp(0.0, 1.0) * scale).round() as u16;
        if maxval < 256 {
            out.push(level as u8);
        } else {
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    Ok(out)
}

struct Header {
    magic: [u8; 2],
    cols: usize,
    rows: usize,
    maxval: usize,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let bad = |m: &str| Error::UnsupportedFormat(m.to_string());
    if bytes.len() < 2 || bytes[0] != b'P' || !matches!(bytes[1], b'2' | b'5') {
        return Err(bad("expected P2 or P5 magic number"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("malformed header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header field out of range"))?;
    }
    // exactly one whitespace byte separates the header from binary data
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(bad("missing whitespace after maxval"));
    }
    let [cols, rows, maxval] = fields;
    if cols == 0 || rows == 0 {
        return Err(bad("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval must be in 1..=65535"));
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        cols,
        rows,
        maxval,
        data_start: pos + 1,
    })
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let h = parse_header(bytes)?;
    let count = h.rows * h.cols;
    let scale = h.maxval as f64;
    let data = &bytes[h.data_start..];
    let levels: Vec<usize> = if h.magic[1] == b'5' {
        let width = if h.maxval < 256 { 1 } else { 2 };
        if data.len() < count * width {
            return Err(Error::UnsupportedFormat("truncated pixel data".into()));
        }
        data.chunks_exact(width)
            .take(count)
            .map(|c| match c {
                [b] => *b as usize,
                [hi, lo] => u16::from_be_bytes([*hi, *lo]) as usize,
                _ => unreachable!(),
            })
            .collect()
    } else {
        let text = std::str::from_utf8(data)
            .map_err(|_| Error::UnsupportedFormat("non-ASCII P2 data".into()))?;
        let levels: Vec<usize> = text
            .split_ascii_whitespace()
            .take(count)
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnsupportedFormat("malformed P2 sample".into()))?;
        if levels.len() < count {
            return Err(Error::UnsupportedFormat("truncated pixel data".into()));
        }
        levels
    };
    if levels.iter().any(|&l| l > h.maxval) {
        return Err(Error::UnsupportedFormat("sample exceeds maxval".into()));
    }
    let pixels = levels.into_iter().map(|l| l as f64 / scale).collect();
    GrayImage::new(h.rows, h.cols, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_major_layout() {
        let img = GrayImage::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let x = img.to_column_major();
        assert_eq!(x, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(GrayImage::from_column_major(2, 3, &x).unwrap(), img);
    }

    #[test]
    fn ascii_pgm_with_comment() {
        let src = b"P2\n# a comment\n3 2\n4\n0 1 2\n3 4 0\n";
        let img = decode_pgm(src).unwrap();
        assert_eq!((img.rows(), img.cols()), (2, 3));
        assert_eq!(img.get(1, 1), 1.0);
        assert_eq!(img.get(0, 2), 0.5);
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let img = GrayImage::new(1, 2, vec![0.25, 1.0]).unwrap();
        let bytes = encode_pgm(&img, 65535).unwrap();
        assert_eq!(&bytes[bytes.len() - 2..], &[0xff, 0xff]);
        let back = decode_pgm(&bytes).unwrap();
        assert!((back.get(0, 0) - 0.25).abs() <= 0.5 / 65535.0);
    }

    #[test]
    fn rejects_unsupported() {
        assert!(matches!(decode_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode_pgm(b"P5\n2 2\n255\n\0"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(decode_pgm(b"P2\n1 1\n3\n9\n"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn non_square_detected() {
        let img = GrayImage::zeros(2, 3).unwrap();
        assert!(matches!(img.require_square(), Err(Error::NonSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn write_clamps() {
        let img = GrayImage::new(1, 3, vec![-1.0, 0.5, 7.0]).unwrap();
        let back = decode_pgm(&encode_pgm(&img, 255).unwrap()).unwrap();
        assert_eq!(back.get(0, 0), 0.0);
        assert_eq!(back.get(0, 2), 1.0);
    }
}
