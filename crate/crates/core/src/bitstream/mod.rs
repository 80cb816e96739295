//! Attribute streams, varints and the `.potr` container.

mod container;
mod streams;
pub mod varint;

pub use container::{
    compress, read_container, validate_level, write_container, ContainerHeader, DEFAULT_ZSTD_LEVEL, HEADER_LEN,
    MAGIC, VERSION, ZSTD_LEVELS,
};
pub use streams::{
    decode_attribute_streams, decode_rotation, encode_attribute_streams, AttributeStreams, QuantizedSplat,
    MAX_DECODED_OPACITY, STREAM_COUNT, STREAM_NAMES,
};
