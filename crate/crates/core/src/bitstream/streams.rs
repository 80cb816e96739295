use nalgebra::Vector3;

use super::varint::{write_svarint, write_uvarint, Reader};
use crate::compaction::{sh_to_rgb, sh_to_ycocg};
use crate::error::{Error, Result};
use crate::quant::{dequantize, quantize, QuantParams, OPACITY_SHIFT};
use crate::scene::{Splat, AC_COEFFS, SH_COEFFS};

/// Largest decoded opacity; keeps the logit finite.
pub const MAX_DECODED_OPACITY: f64 = 1.0 - 1e-6;

pub const STREAM_COUNT: usize = 6;
pub const STREAM_NAMES: [&str; STREAM_COUNT] = ["position", "dc", "ac", "opacity", "scale", "rotation"];

/// Integer attributes of one splat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuantizedSplat {
    /// YCoCg DC coefficient per channel.
    pub dc: [i64; 3],
    /// YCoCg AC coefficients, `[channel][coefficient - 1]`.
    pub ac: [[i64; AC_COEFFS]; 3],
    pub opacity: i64,
    pub scale: [i64; 3],
    /// `x, y, z` of the `w >= 0` unit quaternion.
    pub rotation: [i64; 3],
}

impl QuantizedSplat {
    pub fn from_splat(splat: &Splat, params: &QuantParams) -> Self {
        let sf_sh = params.sf_sh as f64;
        let ycocg = sh_to_ycocg(&splat.sh);
        let mut ac = [[0; AC_COEFFS]; 3];
        for c in 0..3 {
            for i in 0..AC_COEFFS {
                ac[c][i] = quantize(ycocg[c][i + 1], sf_sh);
            }
        }
        let sf_scale = params.sf_scale as f64;
        let sf_rot = params.sf_rotation as f64;
        let [_, x, y, z] = splat.rotation;
        Self {
            dc: [0, 1, 2].map(|c| quantize(ycocg[c][0], sf_sh)),
            ac,
            opacity: quantize(splat.opacity, params.sf_opacity as f64),
            scale: [0, 1, 2].map(|a| quantize(splat.log_scale[a], sf_scale)),
            rotation: [x, y, z].map(|v| quantize(v, sf_rot)),
        }
    }

    pub fn to_splat(&self, position: Vector3<f64>, params: &QuantParams) -> Splat {
        let sf_sh = params.sf_sh as f64;
        let mut ycocg = [[0.0; SH_COEFFS]; 3];
        for c in 0..3 {
            ycocg[c][0] = dequantize(self.dc[c], sf_sh, 0.0);
            for i in 0..AC_COEFFS {
                ycocg[c][i + 1] = dequantize(self.ac[c][i], sf_sh, 0.0);
            }
        }
        let opacity = dequantize(self.opacity, params.sf_opacity as f64, OPACITY_SHIFT);
        let sf_scale = params.sf_scale as f64;
        Splat {
            position,
            log_scale: Vector3::from(self.scale.map(|q| dequantize(q, sf_scale, 0.0))),
            rotation: decode_rotation(self.rotation, params.sf_rotation as f64),
            opacity: opacity.clamp(f64::MIN_POSITIVE, MAX_DECODED_OPACITY),
            sh: sh_to_rgb(&ycocg),
        }
    }
}

/// Rebuild `(w, x, y, z)` from quantized `x, y, z`.
///
/// The vector part is the dequantized value as is, so each component stays
/// within half a step of the original. When it lies outside the unit ball
/// `w` is zero and the quaternion is not unit length; rotations are
/// normalized wherever they are used.
pub fn decode_rotation(q: [i64; 3], sf: f64) -> [f64; 4] {
    let xyz = q.map(|c| dequantize(c, sf, 0.0));
    let norm2: f64 = xyz.iter().map(|c| c * c).sum();
    let w = (1.0 - norm2).max(0.0).sqrt();
    [w, xyz[0], xyz[1], xyz[2]]
}

/// Serialized attribute streams, in container order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeStreams {
    pub position: Vec<u8>,
    pub dc: Vec<u8>,
    pub ac: Vec<u8>,
    pub opacity: Vec<u8>,
    pub scale: Vec<u8>,
    pub rotation: Vec<u8>,
}

impl AttributeStreams {
    pub fn as_array(&self) -> [&Vec<u8>; STREAM_COUNT] {
        [&self.position, &self.dc, &self.ac, &self.opacity, &self.scale, &self.rotation]
    }

    pub fn as_array_mut(&mut self) -> [&mut Vec<u8>; STREAM_COUNT] {
        [
            &mut self.position,
            &mut self.dc,
            &mut self.ac,
            &mut self.opacity,
            &mut self.scale,
            &mut self.rotation,
        ]
    }

    pub fn lengths(&self) -> [usize; STREAM_COUNT] {
        self.as_array().map(Vec::len)
    }

    pub fn concat(&self) -> Vec<u8> {
        self.as_array().iter().flat_map(|s| s.iter().copied()).collect()
    }

    /// Split a payload at the given stream lengths.
    pub fn split(payload: &[u8], lengths: &[usize; STREAM_COUNT]) -> Result<Self> {
        let total: usize = lengths.iter().sum();
        if total != payload.len() {
            return Err(Error::Format(format!(
                "stream lengths add up to {total} bytes but the payload has {}",
                payload.len()
            )));
        }
        let mut out = Self::default();
        let mut at = 0;
        for (stream, &len) in out.as_array_mut().into_iter().zip(lengths) {
            *stream = payload[at..at + len].to_vec();
            at += len;
        }
        Ok(out)
    }
}

/// Serialize everything but positions. `splats` must already be in octree
/// order.
pub fn encode_attribute_streams(splats: &[QuantizedSplat], position: Vec<u8>) -> AttributeStreams {
    let mut s = AttributeStreams {
        position,
        ..Default::default()
    };
    for c in 0..3 {
        let mut prev = 0;
        for q in splats {
            write_svarint(&mut s.dc, q.dc[c] - prev);
            prev = q.dc[c];
        }
    }
    for i in 0..AC_COEFFS {
        for c in 0..3 {
            for q in splats {
                write_svarint(&mut s.ac, q.ac[c][i]);
            }
        }
    }
    for q in splats {
        write_uvarint(&mut s.opacity, q.opacity.max(0) as u64);
    }
    for a in 0..3 {
        for q in splats {
            write_svarint(&mut s.scale, q.scale[a]);
        }
    }
    for a in 0..3 {
        for q in splats {
            write_svarint(&mut s.rotation, q.rotation[a]);
        }
    }
    s
}

fn finish(reader: &Reader, name: &str, len: usize) -> Result<()> {
    if reader.position() != len {
        return Err(Error::Format(format!(
            "{name} stream has {} trailing bytes",
            len - reader.position()
        )));
    }
    Ok(())
}

fn with_context<T>(r: Result<T>, name: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Length(m) => Error::Format(format!("{name} stream is too short: {m}")),
        Error::Format(m) => Error::Format(format!("{name} stream: {m}")),
        other => other,
    })
}

/// Inverse of [`encode_attribute_streams`] for `count` splats.
pub fn decode_attribute_streams(streams: &AttributeStreams, count: usize) -> Result<Vec<QuantizedSplat>> {
    let mut out = vec![QuantizedSplat::default(); count];

    let mut r = Reader::new(&streams.dc);
    with_context(
        (|| {
            for c in 0..3 {
                let mut prev = 0i64;
                for q in out.iter_mut() {
                    prev = prev.wrapping_add(r.svarint()?);
                    q.dc[c] = prev;
                }
            }
            Ok(())
        })(),
        "dc",
    )?;
    finish(&r, "dc", streams.dc.len())?;

    let mut r = Reader::new(&streams.ac);
    with_context(
        (|| {
            for i in 0..AC_COEFFS {
                for c in 0..3 {
                    for q in out.iter_mut() {
                        q.ac[c][i] = r.svarint()?;
                    }
                }
            }
            Ok(())
        })(),
        "ac",
    )?;
    finish(&r, "ac", streams.ac.len())?;

    let mut r = Reader::new(&streams.opacity);
    with_context(
        (|| {
            for q in out.iter_mut() {
                let v = r.uvarint()?;
                q.opacity = i64::try_from(v).map_err(|_| Error::Format(format!("opacity {v} out of range")))?;
            }
            Ok(())
        })(),
        "opacity",
    )?;
    finish(&r, "opacity", streams.opacity.len())?;

    let mut r = Reader::new(&streams.scale);
    with_context(
        (|| {
            for a in 0..3 {
                for q in out.iter_mut() {
                    q.scale[a] = r.svarint()?;
                }
            }
            Ok(())
        })(),
        "scale",
    )?;
    finish(&r, "scale", streams.scale.len())?;

    let mut r = Reader::new(&streams.rotation);
    with_context(
        (|| {
            for a in 0..3 {
                for q in out.iter_mut() {
                    q.rotation[a] = r.svarint()?;
                }
            }
            Ok(())
        })(),
        "rotation",
    )?;
    finish(&r, "rotation", streams.rotation.len())?;

    Ok(out)
}
