use nalgebra::Vector3;
use rayon::prelude::*;

use crate::bitstream::varint::{write_uvarint, Reader};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: u8 = 24;

/// Cube enclosing all positions, stored in single precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCube {
    pub center: [f32; 3],
    pub half: f32,
}

impl RootCube {
    /// Cube centered on the bounding box with half the largest extent. The
    /// half-extent is rounded up after the center is rounded so the stored
    /// cube still contains every position.
    pub fn enclosing(positions: &[Vector3<f64>]) -> RootCube {
        if positions.is_empty() {
            return RootCube {
                center: [0.0; 3],
                half: 0.0,
            };
        }
        let mut lo = positions[0];
        let mut hi = positions[0];
        for p in positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let mid = (lo + hi) * 0.5;
        let center = [mid.x as f32, mid.y as f32, mid.z as f32];
        let c = Vector3::new(center[0] as f64, center[1] as f64, center[2] as f64);
        let half = positions
            .iter()
            .map(|p| (p - c).abs().max())
            .fold(0.0, f64::max);
        let mut half32 = half as f32;
        if (half32 as f64) < half {
            half32 = half32.next_up();
        }
        RootCube { center, half: half32 }
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::new(self.center[0] as f64, self.center[1] as f64, self.center[2] as f64)
    }
}

/// Octant of `p` relative to `center`: `4 (x >= cx) + 2 (y >= cy) + (z >= cz)`.
#[inline]
pub fn child_index(p: &Vector3<f64>, center: &Vector3<f64>) -> usize {
    (((p.x >= center.x) as usize) << 2) | (((p.y >= center.y) as usize) << 1) | (p.z >= center.z) as usize
}

#[inline]
pub fn child_center(center: &Vector3<f64>, half: f64, bit: usize) -> Vector3<f64> {
    let q = half * 0.5;
    let off = |set: bool| if set { q } else { -q };
    Vector3::new(
        center.x + off(bit & 4 != 0),
        center.y + off(bit & 2 != 0),
        center.z + off(bit & 1 != 0),
    )
}

/// When a node holding a single splat becomes a leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeafRule<'a> {
    /// The leaf center must lie strictly within the splat's tolerance.
    Precision(&'a [f64]),
    /// The splat must sit exactly on the leaf center. Re-encoding decoded
    /// positions with this rule reproduces the original tree.
    ExactCenter,
}

/// `max(gamma, beta * distance to the nearest eye)` per position.
pub fn tolerances(positions: &[Vector3<f64>], eyes: &[Vector3<f64>], beta: f64, gamma: f64) -> Vec<f64> {
    positions
        .par_iter()
        .map(|p| {
            let nearest = eyes.iter().map(|e| (p - e).norm()).fold(f64::INFINITY, f64::min);
            let scaled = if nearest.is_finite() { beta * nearest } else { 0.0 };
            gamma.max(scaled)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Octree {
    pub root: RootCube,
    pub max_depth: u8,
    /// Occupancy bytes and leaf records in depth-first order.
    pub bytes: Vec<u8>,
    /// Input indices in serialization order.
    pub order: Vec<u32>,
}

struct Builder<'a> {
    positions: &'a [Vector3<f64>],
    rule: LeafRule<'a>,
    max_depth: u8,
    bytes: Vec<u8>,
    order: Vec<u32>,
}

impl Builder<'_> {
    fn is_leaf(&self, indices: &[u32], center: &Vector3<f64>, depth: u8) -> bool {
        if depth >= self.max_depth {
            return true;
        }
        if indices.len() > 1 {
            return false;
        }
        let k = indices[0] as usize;
        let p = &self.positions[k];
        match self.rule {
            LeafRule::Precision(tol) => (p - center).norm() < tol[k],
            LeafRule::ExactCenter => p == center,
        }
    }

    fn node(&mut self, indices: Vec<u32>, center: Vector3<f64>, half: f64, depth: u8) {
        if self.is_leaf(&indices, &center, depth) {
            self.bytes.push(0);
            write_uvarint(&mut self.bytes, indices.len() as u64);
            self.order.extend(indices);
            return;
        }
        let mut children: [Vec<u32>; 8] = Default::default();
        for k in indices {
            children[child_index(&self.positions[k as usize], &center)].push(k);
        }
        let occupancy = children
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .fold(0u8, |acc, (b, _)| acc | (1 << b));
        self.bytes.push(occupancy);
        for (bit, child) in children.into_iter().enumerate() {
            if !child.is_empty() {
                self.node(child, child_center(&center, half, bit), half * 0.5, depth + 1);
            }
        }
    }
}

/// Build and serialize the octree. Bit `b` of an occupancy byte marks
/// octant `b`; children are visited from bit 0 to bit 7. A leaf is a zero
/// byte followed by its splat count.
pub fn build_octree(positions: &[Vector3<f64>], root: RootCube, max_depth: u8, rule: LeafRule) -> Octree {
    let mut builder = Builder {
        positions,
        rule,
        max_depth,
        bytes: Vec::new(),
        order: Vec::with_capacity(positions.len()),
    };
    if !positions.is_empty() {
        let all = (0..positions.len() as u32).collect();
        builder.node(all, root.center(), root.half as f64, 0);
    }
    Octree {
        root,
        max_depth,
        bytes: builder.bytes,
        order: builder.order,
    }
}

/// Decoded leaf position with the depth of its leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedPosition {
    pub position: Vector3<f64>,
    pub depth: u8,
}

fn read_node(
    reader: &mut Reader,
    center: Vector3<f64>,
    half: f64,
    depth: u8,
    max_depth: u8,
    out: &mut Vec<DecodedPosition>,
) -> Result<()> {
    let at = reader.position();
    let occupancy = reader.byte()?;
    if occupancy == 0 {
        let count = reader.uvarint()?;
        if count == 0 {
            return Err(Error::Format(format!("empty leaf at octree byte {at}")));
        }
        if count > (u32::MAX as u64) {
            return Err(Error::Format(format!("leaf count {count} at octree byte {at} is too large")));
        }
        for _ in 0..count {
            out.push(DecodedPosition { position: center, depth });
        }
        return Ok(());
    }
    if depth >= max_depth {
        return Err(Error::Format(format!(
            "octree node at byte {at} has children below the depth limit {max_depth}"
        )));
    }
    for bit in 0..8 {
        if occupancy & (1 << bit) != 0 {
            read_node(reader, child_center(&center, half, bit), half * 0.5, depth + 1, max_depth, out)?;
        }
    }
    Ok(())
}

/// Leaf centers (repeated per count) in depth-first order. Returns the
/// positions and the number of bytes consumed.
pub fn deserialize_octree(bytes: &[u8], root: RootCube, max_depth: u8) -> Result<(Vec<DecodedPosition>, usize)> {
    let mut out = Vec::new();
    if bytes.is_empty() {
        return Ok((out, 0));
    }
    let mut reader = Reader::new(bytes);
    read_node(&mut reader, root.center(), root.half as f64, 0, max_depth, &mut out)?;
    Ok((out, reader.position()))
}
