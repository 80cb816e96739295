//! Binary little-endian PLY in the 3DGS reference layout.
//!
//! Reading accepts any scalar property types and ignores properties it does
//! not need (normals, extra attributes). Writing always emits the reference
//! layout: `x y z nx ny nz f_dc_0..2 f_rest_0..44 opacity scale_0..2 rot_0..3`
//! as `float`.

use std::fmt::Write as _;

use super::splat::{RawSplat, AC_COEFFS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f32 {
        match self {
            Self::I8 => b[0] as i8 as f32,
            Self::U8 => b[0] as f32,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f32,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f32,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f32,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f32,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]),
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()) as f32,
        }
    }
}

struct Property {
    name: String,
    ty: ScalarType,
    offset: usize,
}

struct Header {
    vertex_count: usize,
    stride: usize,
    properties: Vec<Property>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    const END: &[u8] = b"end_header\n";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::Format("PLY header has no end_header line".into()))?;
    let text = std::str::from_utf8(&bytes[..end])
        .map_err(|_| Error::Format("PLY header is not ASCII".into()))?;

    let mut lines = text.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(Error::Format("missing 'ply' magic".into()));
    }

    let mut vertex_count = None;
    let mut in_vertex = false;
    let mut properties = Vec::new();
    let mut stride = 0;
    let mut format_ok = false;

    for line in lines {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                if tokens.next() != Some("binary_little_endian") {
                    return Err(Error::Unsupported(format!("PLY {line}")));
                }
                format_ok = true;
            }
            Some("element") => {
                let name = tokens.next().unwrap_or_default();
                if vertex_count.is_some() && !in_vertex {
                    continue;
                }
                if name == "vertex" {
                    let n = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::Format(format!("bad element line '{line}'")))?;
                    vertex_count = Some(n);
                    in_vertex = true;
                } else if vertex_count.is_none() {
                    return Err(Error::Unsupported(format!(
                        "element '{name}' before vertex element"
                    )));
                } else {
                    // Trailing elements are ignored.
                    in_vertex = false;
                }
            }
            Some("property") if in_vertex => {
                let ty_name = tokens.next().unwrap_or_default();
                if ty_name == "list" {
                    return Err(Error::Unsupported("list property in vertex element".into()));
                }
                let ty = ScalarType::parse(ty_name)
                    .ok_or_else(|| Error::Format(format!("unknown property type '{ty_name}'")))?;
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::Format(format!("bad property line '{line}'")))?;
                properties.push(Property {
                    name: name.to_string(),
                    ty,
                    offset: stride,
                });
                stride += ty.size();
            }
            _ => {}
        }
    }

    if !format_ok {
        return Err(Error::Format("missing format line".into()));
    }
    let vertex_count =
        vertex_count.ok_or_else(|| Error::Format("missing vertex element".into()))?;
    Ok(Header {
        vertex_count,
        stride,
        properties,
        body_offset: end + END.len(),
    })
}

/// Parse a 3DGS PLY into raw (pre-activation) splats.
pub fn parse_ply(bytes: &[u8]) -> Result<Vec<RawSplat>> {
    let header = parse_header(bytes)?;
    let find = |name: &str| -> Result<&Property> {
        header
            .properties
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::MissingProperty(name.to_string()))
    };

    let names = property_names();
    let slots = names
        .iter()
        .map(|n| find(n).map(|p| (p.offset, p.ty)))
        .collect::<Result<Vec<_>>>()?;

    let body = &bytes[header.body_offset..];
    let needed = header.vertex_count * header.stride;
    if body.len() < needed {
        return Err(Error::Length(format!(
            "PLY payload has {} bytes, {} vertices need {needed}",
            body.len(),
            header.vertex_count
        )));
    }

    let mut out = Vec::with_capacity(header.vertex_count);
    let mut values = [0.0f32; FLOATS_PER_SPLAT];
    for record in body[..needed].chunks_exact(header.stride) {
        for (v, &(offset, ty)) in values.iter_mut().zip(&slots) {
            *v = ty.read(&record[offset..]);
        }
        out.push(from_values(&values));
    }
    Ok(out)
}

/// Write raw splats in the 3DGS reference layout.
pub fn export_ply(splats: &[RawSplat]) -> Vec<u8> {
    let mut header = String::new();
    header.push_str("ply\nformat binary_little_endian 1.0\n");
    let _ = writeln!(header, "element vertex {}", splats.len());
    for name in ["x", "y", "z", "nx", "ny", "nz"] {
        let _ = writeln!(header, "property float {name}");
    }
    for name in &property_names()[3..] {
        let _ = writeln!(header, "property float {name}");
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    out.reserve(splats.len() * (FLOATS_PER_SPLAT + 3) * 4);
    for s in splats {
        let values = to_values(s);
        for v in &values[..3] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for _ in 0..3 {
            out.extend_from_slice(&0f32.to_le_bytes());
        }
        for v in &values[3..] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

const FLOATS_PER_SPLAT: usize = 3 + 3 + 3 * AC_COEFFS + 1 + 3 + 4;

fn property_names() -> Vec<String> {
    let mut names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    names.extend((0..3).map(|i| format!("f_dc_{i}")));
    names.extend((0..3 * AC_COEFFS).map(|i| format!("f_rest_{i}")));
    names.push("opacity".into());
    names.extend((0..3).map(|i| format!("scale_{i}")));
    names.extend((0..4).map(|i| format!("rot_{i}")));
    names
}

fn from_values(v: &[f32; FLOATS_PER_SPLAT]) -> RawSplat {
    let mut s = RawSplat::default();
    s.position.copy_from_slice(&v[0..3]);
    s.f_dc.copy_from_slice(&v[3..6]);
    s.f_rest.copy_from_slice(&v[6..51]);
    s.opacity = v[51];
    s.scale.copy_from_slice(&v[52..55]);
    s.rotation.copy_from_slice(&v[55..59]);
    s
}

fn to_values(s: &RawSplat) -> [f32; FLOATS_PER_SPLAT] {
    let mut v = [0.0f32; FLOATS_PER_SPLAT];
    v[0..3].copy_from_slice(&s.position);
    v[3..6].copy_from_slice(&s.f_dc);
    v[6..51].copy_from_slice(&s.f_rest);
    v[51] = s.opacity;
    v[52..55].copy_from_slice(&s.scale);
    v[55..59].copy_from_slice(&s.rotation);
    v
}
