//! Binary supernet checkpoints.
//!
//! Little-endian throughout: the 8-byte magic, a `u32` version, the network
//! shape and dataset recipe as `u64`s, a shape table of
//! `(name, dims)` entries, then the parameter count and the `f64` values in
//! buffer order.

use std::io::{Read, Write};

use super::data::DataConfig;
use super::net::{NetConfig, Network, ParamLayout, Supernet};
use super::MicronetError;

const MAGIC: &[u8; 8] = b"RBARCKPT";
const VERSION: u32 = 1;

/// A trained supernet plus the recipe of the data it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub supernet: Supernet,
    pub data: DataConfig,
}

fn put_u64<W: Write>(out: &mut W, v: u64) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn put_u32<W: Write>(out: &mut W, v: u32) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

pub fn write_checkpoint<W: Write>(ckpt: &Checkpoint, mut out: W) -> Result<(), MicronetError> {
    let net = ckpt.supernet.network();
    let cfg = net.config();
    out.write_all(MAGIC)?;
    put_u32(&mut out, VERSION)?;
    for v in [cfg.width, cfg.num_classes, cfg.image_size, cfg.in_channels] {
        put_u64(&mut out, v as u64)?;
    }
    put_u64(&mut out, ckpt.data.seed)?;
    put_u64(&mut out, ckpt.data.n_train as u64)?;
    put_u64(&mut out, ckpt.data.n_val as u64)?;
    let entries = net.layout().entries();
    put_u64(&mut out, entries.len() as u64)?;
    for e in entries {
        put_u32(&mut out, e.name.len() as u32)?;
        out.write_all(e.name.as_bytes())?;
        put_u32(&mut out, e.shape.len() as u32)?;
        for &d in &e.shape {
            put_u64(&mut out, d as u64)?;
        }
    }
    put_u64(&mut out, net.params().len() as u64)?;
    for v in net.params() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], MicronetError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => MicronetError::Checkpoint("truncated file".into()),
            _ => MicronetError::Io(e),
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, MicronetError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, MicronetError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn size(&mut self) -> Result<usize, MicronetError> {
        usize::try_from(self.u64()?).map_err(|_| MicronetError::Checkpoint("size overflows usize".into()))
    }
}

pub fn read_checkpoint<R: Read>(input: R) -> Result<Checkpoint, MicronetError> {
    let mut r = Reader { inner: input };
    if &r.bytes::<8>()? != MAGIC {
        return Err(MicronetError::Checkpoint("not a supernet checkpoint".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(MicronetError::Checkpoint(format!("unsupported version {version}")));
    }
    let cfg = NetConfig { width: r.size()?, num_classes: r.size()?, image_size: r.size()?, in_channels: r.size()? };
    cfg.validate().map_err(|e| MicronetError::Checkpoint(e.to_string()))?;
    let data = DataConfig { seed: r.u64()?, n_train: r.size()?, n_val: r.size()? };
    let layout = ParamLayout::full(cfg);
    let count = r.size()?;
    if count != layout.entries().len() {
        return Err(MicronetError::Checkpoint(format!("{count} tensors, expected {}", layout.entries().len())));
    }
    for expected in layout.entries() {
        let name_len = r.u32()? as usize;
        if name_len > 256 {
            return Err(MicronetError::Checkpoint("tensor name too long".into()));
        }
        let mut name = vec![0u8; name_len];
        r.inner.read_exact(&mut name)?;
        let ndim = r.u32()? as usize;
        if ndim > 8 {
            return Err(MicronetError::Checkpoint("too many dimensions".into()));
        }
        let shape = (0..ndim).map(|_| r.size()).collect::<Result<Vec<_>, _>>()?;
        if name != expected.name.as_bytes() || shape != expected.shape {
            return Err(MicronetError::Checkpoint(format!(
                "shape table mismatch at {}: found {} {:?}",
                expected.name,
                String::from_utf8_lossy(&name),
                shape
            )));
        }
    }
    let n = r.size()?;
    if n != layout.total() {
        return Err(MicronetError::Checkpoint(format!("{n} parameters, expected {}", layout.total())));
    }
    let params = (0..n).map(|_| Ok(f64::from_le_bytes(r.bytes()?))).collect::<Result<Vec<f64>, MicronetError>>()?;
    if params.iter().any(|v| !v.is_finite()) {
        return Err(MicronetError::Checkpoint("non-finite parameter".into()));
    }
    Ok(Checkpoint { supernet: Supernet(Network::from_parts(layout, params)?), data })
}
