//! RAWDS container.
//!
//! ```text
//! "RWDS" | version u32 | N u32 | C u32 | H u32 | W u32 | N label bytes | N·C·H·W pixel bytes
//! ```
//!
//! All integers little-endian; pixels in `[N, C, H, W]` order.

use std::fs;
use std::path::Path;

use super::{Dataset, Split};
use crate::engine::Tensor;
use crate::error::{Error, Result};

pub const RAWDS_MAGIC: &[u8; 4] = b"RWDS";
pub const RAWDS_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

pub fn load_rawds(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 4 || &bytes[..4] != RAWDS_MAGIC {
        let found = bytes
            .get(..4)
            .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
            .unwrap_or(0);
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found,
            expected: u32::from_be_bytes(*RAWDS_MAGIC),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            detail: format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len()),
        });
    }
    let field = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let version = field(0);
    if version != RAWDS_VERSION {
        return Err(Error::Format {
            path: path.to_path_buf(),
            detail: format!("unsupported RAWDS version {version}"),
        });
    }
    let (n, c, h, w) = (field(1) as usize, field(2) as usize, field(3) as usize, field(4) as usize);
    let need = HEADER_LEN + n + n * c * h * w;
    if bytes.len() != need {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            detail: format!("header promises {need} bytes for {n} images of {c}x{h}x{w}, file has {}", bytes.len()),
        });
    }
    if n == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            detail: "file holds no images".into(),
        });
    }
    let labels = bytes[HEADER_LEN..HEADER_LEN + n].to_vec();
    let data = bytes[HEADER_LEN + n..].iter().map(|&p| p as f32 / 255.0).collect();
    Dataset::new(Tensor::new(vec![n, c, h, w], data)?, labels, "rawds", Split::Test)
}

/// Writes a dataset as RAWDS. Pixels are quantized as `round(v · 255)`,
/// which reproduces any dataset that was itself loaded from 8-bit data.
pub fn save_rawds(ds: &Dataset, path: &Path) -> Result<()> {
    let (n, c, h, w) = ds.images.dims4()?;
    let mut out = Vec::with_capacity(HEADER_LEN + n + ds.images.len());
    out.extend_from_slice(RAWDS_MAGIC);
    for v in [RAWDS_VERSION, n as u32, c as u32, h as u32, w as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&ds.labels);
    out.extend(ds.images.data().iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(n: u32, c: u32, h: u32, w: u32) -> Vec<u8> {
        let mut b = RAWDS_MAGIC.to_vec();
        for v in [RAWDS_VERSION, n, c, h, w] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn white_image_loads_as_ones() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.rawds");
        let mut b = header(1, 3, 32, 32);
        b.push(4);
        b.extend(std::iter::repeat_n(255u8, 3 * 32 * 32));
        fs::write(&p, b).unwrap();
        let ds = load_rawds(&p).unwrap();
        assert_eq!(ds.images.shape(), &[1, 3, 32, 32]);
        assert!(ds.images.data().iter().all(|&v| v == 1.0));
        assert_eq!(ds.labels, vec![4]);
    }

    #[test]
    fn count_disagreeing_with_length_is_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.rawds");
        let mut b = header(2, 3, 32, 32);
        b.push(4);
        b.extend(std::iter::repeat_n(0u8, 3 * 32 * 32));
        fs::write(&p, b).unwrap();
        assert!(matches!(load_rawds(&p), Err(Error::Truncated { .. })));
    }

    #[test]
    fn bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.rawds");
        fs::write(&p, b"NOPE and more bytes here....").unwrap();
        assert!(matches!(load_rawds(&p), Err(Error::BadMagic { .. })));
    }
}
