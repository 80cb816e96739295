//! Uniform attribute quantizers and the camera-adaptive position octree.

mod octree;
mod uniform;

pub use octree::{
    build_octree, child_center, child_index, deserialize_octree, tolerances, DecodedPosition, LeafRule, Octree,
    RootCube, DEFAULT_MAX_DEPTH,
};
pub use uniform::{dequantize, quantize, QuantParams, OPACITY_SHIFT};
