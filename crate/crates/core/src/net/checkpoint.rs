//! RNET checkpoint format (all integers and floats little-endian):
//!
//! ```text
//! "RNET" | version u32
//! name_len u32 | name bytes ("lenet5" | "retilenet")
//! in_channels u32 | input_size u32 | kernel_size u32 | dropout_p f32
//! repeated to end of file:
//!     tag_len u32 | tag bytes | rank u32 | dims u32 × rank | f32 × Π dims
//! ```
//!
//! Blob tags are `<layer tag>.weight` / `<layer tag>.bias`, written in layer
//! order.

use std::fs;
use std::path::Path;

use super::model::{Model, NamedLayer};
use super::spec::{Architecture, ModelSpec};
use crate::engine::{Layer, Tensor};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RNET";
pub const CHECKPOINT_VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let spec = model.spec();
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION);
    put_str(&mut out, spec.name.name());
    put_u32(&mut out, spec.in_channels as u32);
    put_u32(&mut out, spec.input_size as u32);
    put_u32(&mut out, spec.kernel_size as u32);
    out.extend_from_slice(&spec.dropout_p.to_le_bytes());
    for (tag, p) in model.named_params() {
        put_str(&mut out, &tag);
        put_u32(&mut out, p.rank() as u32);
        for &d in p.shape() {
            put_u32(&mut out, d as u32);
        }
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                detail: format!("reading {what} at byte {}", self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let path = self.path.to_path_buf();
        String::from_utf8(self.take(len, what)?.to_vec()).map_err(|_| Error::Format {
            path,
            detail: format!("{what} is not UTF-8"),
        })
    }

    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Model> {
    let format_err = |detail: String| Error::Format {
        path: path.to_path_buf(),
        detail,
    };
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: bytes.get(..4).map(|b| u32::from_be_bytes(b.try_into().unwrap())).unwrap_or(0),
            expected: u32::from_be_bytes(*CHECKPOINT_MAGIC),
        });
    }
    let mut r = Reader { bytes, pos: 4, path };
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(format_err(format!("unsupported checkpoint version {version}")));
    }
    let name = Architecture::parse(&r.string("model name")?).map_err(|e| format_err(e.to_string()))?;
    let in_channels = r.u32("in_channels")? as usize;
    let input_size = r.u32("input_size")? as usize;
    let kernel_size = r.u32("kernel_size")? as usize;
    let dropout_p = f32::from_le_bytes(r.take(4, "dropout_p")?.try_into().unwrap());
    let spec = ModelSpec {
        name,
        in_channels,
        input_size,
        kernel_size,
        dropout_p,
        num_classes: 10,
    };
    let layer_specs = spec.layers().map_err(|e| format_err(format!("invalid model record: {e}")))?;

    let mut blobs: Vec<(String, Tensor)> = Vec::new();
    while !r.done() {
        let tag = r.string("blob tag")?;
        let rank = r.u32("rank")? as usize;
        let dims = (0..rank).map(|_| r.u32("dims").map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let count: usize = dims.iter().product();
        let raw = r.take(count * 4, &format!("data of {tag}"))?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        let t = Tensor::new(dims, data).map_err(|e| format_err(format!("{tag}: {e}")))?;
        blobs.push((tag, t));
    }

    let mut blobs = blobs.into_iter();
    let mut layers = Vec::with_capacity(layer_specs.len());
    for (tag, ls) in layer_specs {
        let mut params = Vec::new();
        for kind in ["weight", "bias"].iter().take(ls.param_shapes().len()) {
            let expected = format!("{tag}.{kind}");
            match blobs.next() {
                Some((t, p)) if t == expected => params.push(p),
                Some((t, _)) => return Err(format_err(format!("expected blob {expected}, found {t}"))),
                None => return Err(format_err(format!("missing blob {expected}"))),
            }
        }
        let layer = Layer::from_params(ls, params).map_err(|e| format_err(format!("{tag}: {e}")))?;
        layers.push(NamedLayer { tag, layer });
    }
    if let Some((t, _)) = blobs.next() {
        return Err(format_err(format!("unexpected extra blob {t}")));
    }
    Ok(Model::from_layers(spec, layers))
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes, path)
}
