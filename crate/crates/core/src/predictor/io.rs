//! Weights container: a self-describing binary file.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            4 bytes   b"CPWT"
//! format_version   u32       currently 1
//! model_kind       u8        0 = nar, 1 = niar
//! goal_conditioned u8        0 | 1
//! reserved         2 bytes   zero
//! layer_count      u32
//! per layer:
//!   name_len       u32
//!   name           name_len bytes, UTF-8
//!   rows           u32
//!   cols           u32
//!   data           rows*cols little-endian f32, row-major
//! ```
//!
//! Loading rejects bad magic, version or kind tags, mutually inconsistent
//! shapes, truncated files and non-finite values; nothing partial survives
//! a failed load.

use crate::error::{Error, Result};
use crate::predictor::{ModelKind, PredictorWeights, Tensor};
use std::io::{Read, Write};
use std::path::Path;

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"CPWT";

pub fn save_weights(weights: &PredictorWeights, path: &Path) -> Result<()> {
    if !weights.all_finite() {
        return Err(Error::NonFinite("refusing to save non-finite weights".into()));
    }
    weights.net_config()?;
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&WEIGHTS_FORMAT_VERSION.to_le_bytes());
    buf.push(match weights.kind {
        ModelKind::Nar => 0,
        ModelKind::Niar => 1,
    });
    buf.push(weights.goal_conditioned as u8);
    buf.extend_from_slice(&[0, 0]);
    buf.extend_from_slice(&(weights.tensors.len() as u32).to_le_bytes());
    for t in &weights.tensors {
        buf.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
        buf.extend_from_slice(t.name.as_bytes());
        buf.extend_from_slice(&(t.rows as u32).to_le_bytes());
        buf.extend_from_slice(&(t.cols as u32).to_le_bytes());
        for v in &t.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::WeightsFormat("truncated file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

pub fn load_weights(path: &Path) -> Result<PredictorWeights> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = Reader { buf: &bytes, pos: 0 };

    if r.take(4)? != MAGIC {
        return Err(Error::WeightsFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != WEIGHTS_FORMAT_VERSION {
        return Err(Error::WeightsVersion {
            found: version,
            expected: WEIGHTS_FORMAT_VERSION,
        });
    }
    let kind = match r.u8()? {
        0 => ModelKind::Nar,
        1 => ModelKind::Niar,
        k => return Err(Error::WeightsFormat(format!("unknown model kind tag {k}"))),
    };
    let goal_conditioned = match r.u8()? {
        0 => false,
        1 => true,
        v => return Err(Error::WeightsFormat(format!("bad goal flag {v}"))),
    };
    r.take(2)?;
    let layer_count = r.u32()? as usize;

    let mut tensors = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::WeightsFormat("layer name not UTF-8".into()))?
            .to_string();
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let raw = r.take(rows * cols * 4)?;
        let data: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor '{name}'")));
        }
        tensors.push(Tensor {
            name,
            rows,
            cols,
            data,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::WeightsFormat("trailing bytes".into()));
    }

    let w = PredictorWeights {
        kind,
        goal_conditioned,
        tensors,
    };
    w.net_config()?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::net::{HeadInit, NetConfig};

    fn weights() -> PredictorWeights {
        PredictorWeights::init(
            ModelKind::Niar,
            false,
            &NetConfig {
                enc_hidden: 5,
                soc_hidden: 4,
                rnn_hidden: 6,
            },
            77,
            HeadInit::Random,
        )
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.cpwt");
        let w = weights();
        save_weights(&w, &path).unwrap();
        let loaded = load_weights(&path).unwrap();
        assert_eq!(w, loaded);
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.cpwt");
        save_weights(&weights(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(load_weights(&path).is_err());
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.cpwt");
        save_weights(&weights(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4..8].copy_from_slice(&0u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        match load_weights(&path) {
            Err(Error::WeightsVersion { found: 0, expected: 1 }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_values_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.cpwt");
        let mut w = weights();
        w.tensors[0].data[0] = f32::NAN;
        assert!(save_weights(&w, &path).is_err());
    }
}
