use zstd::zstd_safe;

use super::streams::{AttributeStreams, STREAM_COUNT};
use crate::error::{Error, Result};
use crate::quant::{QuantParams, RootCube};

pub const MAGIC: &[u8; 4] = b"POTR";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 79;
pub const DEFAULT_ZSTD_LEVEL: i32 = 19;
pub const ZSTD_LEVELS: std::ops::RangeInclusive<i32> = 1..=22;

/// Fixed-size little-endian header stored in front of the zstd frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerHeader {
    pub count: u32,
    pub q: f32,
    pub params: QuantParams,
    pub beta: f32,
    pub gamma: f32,
    pub root: RootCube,
    pub max_depth: u8,
    pub zstd_level: u8,
    /// Uncompressed length of each stream.
    pub lengths: [u32; STREAM_COUNT],
}

impl ContainerHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = Vec::with_capacity(HEADER_LEN);
        b.extend_from_slice(MAGIC);
        b.push(VERSION);
        b.extend_from_slice(&self.count.to_le_bytes());
        for v in [
            self.q,
            self.params.sf_sh,
            self.params.sf_opacity,
            self.params.sf_rotation,
            self.params.sf_scale,
            self.beta,
            self.gamma,
            self.root.center[0],
            self.root.center[1],
            self.root.center[2],
            self.root.half,
        ] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.push(self.max_depth);
        b.push(self.zstd_level);
        for len in self.lengths {
            b.extend_from_slice(&len.to_le_bytes());
        }
        b.try_into().expect("header layout is 79 bytes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ContainerHeader> {
        if bytes.len() < 5 {
            return Err(Error::Integrity(format!("file is {} bytes, too short for a header", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Unsupported("not a .potr file (bad magic)".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Unsupported(format!("container version {} (expected {VERSION})", bytes[4])));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Integrity(format!("header truncated at {} bytes", bytes.len())));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f32_at = |i: usize| f32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f: [f32; 11] = std::array::from_fn(|k| f32_at(9 + 4 * k));
        let header = ContainerHeader {
            count: u32_at(5),
            q: f[0],
            params: QuantParams {
                sf_sh: f[1],
                sf_opacity: f[2],
                sf_rotation: f[3],
                sf_scale: f[4],
            },
            beta: f[5],
            gamma: f[6],
            root: RootCube {
                center: [f[7], f[8], f[9]],
                half: f[10],
            },
            max_depth: bytes[53],
            zstd_level: bytes[54],
            lengths: std::array::from_fn(|k| u32_at(55 + 4 * k)),
        };
        header.params.validate().map_err(|e| Error::Format(format!("header: {e}")))?;
        if !(header.root.half >= 0.0 && header.root.half.is_finite())
            || !header.root.center.iter().all(|c| c.is_finite())
        {
            return Err(Error::Format("header: invalid root cube".into()));
        }
        Ok(header)
    }

    pub fn payload_len(&self) -> u64 {
        self.lengths.iter().map(|&l| l as u64).sum()
    }
}

pub fn validate_level(level: i32) -> Result<()> {
    if !ZSTD_LEVELS.contains(&level) {
        return Err(Error::Argument(format!("zstd level {level} outside 1..=22")));
    }
    Ok(())
}

pub fn compress(payload: &[u8], level: i32) -> Result<Vec<u8>> {
    validate_level(level)?;
    let mut c = zstd::bulk::Compressor::new(level)?;
    c.include_checksum(true)?;
    c.include_contentsize(true)?;
    Ok(c.compress(payload)?)
}

/// Header plus one zstd frame over the concatenated streams. The header's
/// lengths and level are filled in here.
pub fn write_container(header: &ContainerHeader, streams: &AttributeStreams) -> Result<Vec<u8>> {
    let mut header = *header;
    for (slot, len) in header.lengths.iter_mut().zip(streams.lengths()) {
        *slot = u32::try_from(len).map_err(|_| Error::Argument(format!("stream of {len} bytes is too large")))?;
    }
    let frame = compress(&streams.concat(), header.zstd_level as i32)?;
    let mut out = header.to_bytes().to_vec();
    out.extend_from_slice(&frame);
    Ok(out)
}

pub fn read_container(bytes: &[u8]) -> Result<(ContainerHeader, AttributeStreams)> {
    let header = ContainerHeader::from_bytes(bytes)?;
    let frame = &bytes[HEADER_LEN..];
    let frame_len = zstd_safe::find_frame_compressed_size(frame)
        .map_err(|code| Error::Integrity(format!("zstd frame: {}", zstd_safe::get_error_name(code))))?;
    if frame_len != frame.len() {
        return Err(Error::Integrity(format!(
            "{} trailing bytes after the zstd frame",
            frame.len() - frame_len
        )));
    }
    let expected = header.payload_len();
    match zstd_safe::get_frame_content_size(frame) {
        Ok(Some(n)) if n == expected => {}
        Ok(Some(n)) => {
            return Err(Error::Integrity(format!(
                "payload is {n} bytes but the header lists {expected}"
            )))
        }
        _ => return Err(Error::Integrity("zstd frame lacks a content size".into())),
    }
    let payload = zstd::bulk::decompress(frame, expected as usize)
        .map_err(|e| Error::Integrity(format!("zstd: {e}")))?;
    if payload.len() as u64 != expected {
        return Err(Error::Integrity(format!(
            "payload decompressed to {} bytes, header lists {expected}",
            payload.len()
        )));
    }
    let lengths = header.lengths.map(|l| l as usize);
    Ok((header, AttributeStreams::split(&payload, &lengths)?))
}
