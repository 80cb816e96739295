//! End-to-end encoder and decoder, hyperparameters, metrics and the
//! synthetic fixture.

mod config;
pub mod fixture;
mod metrics;
mod pipeline;
mod sweep;

pub use config::{CompactionPlacement, EncodeConfig, DEFAULT_Q, INTERLEAVED_ITERATION};
pub use metrics::{
    clamped_mse, compare_images, compute_metrics, psnr, psnr_from_mse, size_report, ssim, CameraMetrics,
    MetricsReport, SizeReport, StreamSize, PSNR_CAP, RAW_BYTES_PER_SPLAT, SSIM_SIGMA, SSIM_WINDOW,
};
pub use pipeline::{
    decode, decode_file, encode, encode_file, quantize_model, read_model, reduce, reencode, write_atomically,
    CompactionReport, DecodedContainer, EncodeOutput, EncodeReport, StageTiming, StreamLength,
};
pub use sweep::{compaction_sweep, SweepRow};
