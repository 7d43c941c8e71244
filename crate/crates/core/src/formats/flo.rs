use std::path::Path;

use crate::error::{Error, Result};
use crate::warp::FlowField;

/// Tag at the start of every Middlebury flow file.
pub const FLO_MAGIC: f32 = 202021.25;

const HEADER_LEN: usize = 12;

/// Header, then row-major interleaved `(u, v)` pairs, all little-endian.
pub fn encode_flo(flow: &FlowField) -> Result<Vec<u8>> {
    let (h, w) = (flow.height(), flow.width());
    let (u, v) = (flow.u(), flow.v());
    if let Some(i) = u.iter().chain(v).position(|x| !x.is_finite()) {
        let i = i % (h * w);
        return Err(Error::InvalidInput(format!(
            "flow has a non-finite value at ({}, {})",
            i / w,
            i % w
        )));
    }
    let dims = |n: usize, what: &str| {
        i32::try_from(n).map_err(|_| Error::InvalidInput(format!("flow {what} {n} exceeds i32")))
    };
    let mut out = Vec::with_capacity(HEADER_LEN + h * w * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&dims(w, "width")?.to_le_bytes());
    out.extend_from_slice(&dims(h, "height")?.to_le_bytes());
    for i in 0..h * w {
        out.extend_from_slice(&u[i].to_le_bytes());
        out.extend_from_slice(&v[i].to_le_bytes());
    }
    Ok(out)
}

/// Inverse of [`encode_flo`]; `path` only labels errors.
pub fn decode_flo(bytes: &[u8], path: &Path) -> Result<FlowField> {
    let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().expect("4-byte slice") };
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            path,
            format!("{} bytes is shorter than the header", bytes.len()),
        ));
    }
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {magic}, expected {FLO_MAGIC}"),
        ));
    }
    let (w, h) = (i32::from_le_bytes(word(4)), i32::from_le_bytes(word(8)));
    if w <= 0 || h <= 0 {
        return Err(Error::format(path, format!("bad dimensions {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format(path, "dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "{h}x{w} flow needs {expected} bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    let mut u = Vec::with_capacity(h * w);
    let mut v = Vec::with_capacity(h * w);
    for i in 0..h * w {
        let at = HEADER_LEN + i * 8;
        u.push(f32::from_le_bytes(word(at)));
        v.push(f32::from_le_bytes(word(at + 4)));
    }
    FlowField::new(h, w, u, v).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_flo(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_flo(&bytes, path)
}

pub fn write_flo(flow: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_flo(flow)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
