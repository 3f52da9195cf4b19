//! Kernel files: the `KTEN` binary format and a JSON alternative.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! "KTEN"  u32 version (1)  u32 dtype (1 = f64)  u32 ndim  u64 dims[ndim]  f64 data[Π dims]
//! ```
//!
//! JSON is `{"shape": [...], "data": [...]}` with `data` row-major.

use std::fs;
use std::path::Path;

use convnorm::DenseTensor;

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"KTEN";
pub const VERSION: u32 = 1;
pub const DTYPE_F64: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelFormat {
    Kten,
    Json,
}

impl KernelFormat {
    /// `.json` files are JSON, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Kten,
        }
    }
}

pub fn encode_kten(k: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * (k.ndim() + k.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&DTYPE_F64.to_le_bytes());
    out.extend_from_slice(&(k.ndim() as u32).to_le_bytes());
    for &d in k.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in k.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn malformed(msg: impl Into<String>) -> CliError {
    CliError::Io(format!("malformed kernel file: {}", msg.into()))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> CliResult<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| malformed(format!("truncated {what}")))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_kten(bytes: &[u8]) -> CliResult<DenseTensor> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let dtype = r.u32("dtype")?;
    if dtype != DTYPE_F64 {
        return Err(malformed(format!("unsupported dtype {dtype}")));
    }
    let ndim = r.u32("ndim")? as usize;
    let shape = (0..ndim)
        .map(|_| r.u64("dims").map(|d| d as usize))
        .collect::<CliResult<Vec<_>>>()?;
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| malformed("dims overflow"))?;
    let payload = len
        .checked_mul(8)
        .ok_or_else(|| malformed("dims overflow"))?;
    if bytes.len() - r.pos != payload {
        return Err(malformed(format!(
            "payload is {} bytes, dims {shape:?} need {payload}",
            bytes.len() - r.pos
        )));
    }
    let data = r
        .take(payload, "payload")?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseTensor::new(shape, data).map_err(|e| malformed(e.to_string()))
}

pub fn encode_json(k: &DenseTensor) -> CliResult<String> {
    Ok(serde_json::to_string(k)?)
}

pub fn decode_json(text: &str) -> CliResult<DenseTensor> {
    #[derive(serde::Deserialize)]
    struct Raw {
        shape: Vec<usize>,
        data: Vec<f64>,
    }
    let raw: Raw = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    DenseTensor::new(raw.shape, raw.data).map_err(|e| malformed(e.to_string()))
}

/// Reads either format, deciding by the leading bytes.
pub fn read_kernel(path: &Path) -> CliResult<DenseTensor> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(MAGIC) {
        decode_kten(&bytes)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| malformed("neither KTEN nor JSON"))?;
        decode_json(text)
    }
}

pub fn write_kernel(path: &Path, k: &DenseTensor, format: KernelFormat) -> CliResult<()> {
    let bytes = match format {
        KernelFormat::Kten => encode_kten(k),
        KernelFormat::Json => encode_json(k)?.into_bytes(),
    };
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use convnorm::kernels::gaussian;

    #[test]
    fn kten_round_trip_is_bit_exact() {
        let k = gaussian(&[3, 2, 3, 1], 4);
        let bytes = encode_kten(&k);
        assert_eq!(&bytes[..4], b"KTEN");
        assert_eq!(bytes.len(), 16 + 8 * 4 + 8 * k.len());
        let back = decode_kten(&bytes).unwrap();
        assert_eq!(back.shape(), k.shape());
        for (a, b) in back.data().iter().zip(k.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn json_round_trip() {
        let k = gaussian(&[2, 2, 3, 3], 1);
        assert_eq!(decode_json(&encode_json(&k).unwrap()).unwrap(), k);
    }

    #[test]
    fn rejects_bad_files() {
        let k = gaussian(&[2, 2], 1);
        let mut bytes = encode_kten(&k);
        bytes.pop();
        assert!(decode_kten(&bytes).is_err());
        let mut bad = encode_kten(&k);
        bad[0] = b'X';
        assert!(decode_kten(&bad).is_err());
        let mut v2 = encode_kten(&k);
        v2[4] = 2;
        assert!(decode_kten(&v2).is_err());
        assert!(decode_json(r#"{"shape":[2,2],"data":[1,2,3]}"#).is_err());
        assert!(decode_json("not json").is_err());
    }
}
