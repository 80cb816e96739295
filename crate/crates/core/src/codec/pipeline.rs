use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{CompactionPlacement, EncodeConfig};
use crate::bitstream::{
    decode_attribute_streams, encode_attribute_streams, read_container, write_container, ContainerHeader,
    QuantizedSplat, STREAM_COUNT, STREAM_NAMES,
};
use crate::compaction::{compact_scene, CompactionStats};
use crate::error::{Error, Result};
use crate::pruning::{PruneIterationReport, PruneTarget, Pruner};
use crate::quant::{build_octree, deserialize_octree, tolerances, LeafRule, RootCube};
use crate::raster::render_all;
use crate::scene::{load_cameras, load_splats, splats_to_ply, Camera, Splat};

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamLength {
    pub stream: &'static str,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactionReport {
    pub placement: CompactionPlacement,
    /// Pruning iterations completed before compaction ran.
    pub after_iteration: usize,
    pub splats: usize,
    pub stats: CompactionStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeReport {
    pub config: EncodeConfig,
    pub input_splats: usize,
    pub output_splats: usize,
    pub pruning: Vec<PruneIterationReport>,
    pub compaction: Option<CompactionReport>,
    pub stream_lengths: Vec<StreamLength>,
    pub container_bytes: usize,
    pub bytes_per_splat: f64,
    pub timings: Vec<StageTiming>,
}

pub struct EncodeOutput {
    pub bytes: Vec<u8>,
    /// The model after pruning and compaction, before quantization.
    pub model: Vec<Splat>,
    /// Index into `model` of each splat in container order.
    pub order: Vec<u32>,
    pub report: EncodeReport,
}

struct Stopwatch {
    timings: Vec<StageTiming>,
    last: Instant,
}

impl Stopwatch {
    fn new() -> Self {
        Self {
            timings: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.timings.push(StageTiming {
            stage,
            seconds: (now - self.last).as_secs_f64(),
        });
        log::info!("{stage}: {:.2}s", (now - self.last).as_secs_f64());
        self.last = now;
    }
}

fn compact(splats: &[Splat], cameras: &[Camera], config: &EncodeConfig, after_iteration: usize) -> Result<(Vec<Splat>, CompactionReport)> {
    let outcome = compact_scene(splats, cameras, &config.compaction_config())?;
    let report = CompactionReport {
        placement: config.placement,
        after_iteration,
        splats: splats.len(),
        stats: outcome.stats,
    };
    log::info!(
        "compaction after iteration {after_iteration}: {} fitted, {} invisible, {} failed, {:.1}% AC zero",
        report.stats.fitted,
        report.stats.invisible,
        report.stats.failed,
        100.0 * report.stats.ac_zero_fraction
    );
    Ok((outcome.splats, report))
}

/// Prune and compact. Returns the model and the reports.
pub fn reduce(
    splats: Vec<Splat>,
    cameras: &[Camera],
    config: &EncodeConfig,
) -> Result<(Vec<Splat>, Vec<PruneIterationReport>, Option<CompactionReport>)> {
    let mut compaction = None;
    let (mut model, reports) = match config.prune_config() {
        None => (splats, Vec::new()),
        Some(prune) => {
            let targets = render_all(&splats, cameras);
            let mut pruner = Pruner::new(splats, cameras, &targets, prune, PruneTarget::Threshold)?;
            while pruner.step()? {
                if let CompactionPlacement::Interleaved(at) = config.placement {
                    if config.compaction && compaction.is_none() && pruner.iterations_done() == at {
                        let (refit, report) = compact(pruner.splats(), cameras, config, at)?;
                        pruner.replace_splats(refit);
                        compaction = Some(report);
                    }
                }
            }
            let out = pruner.finish();
            (out.splats, out.reports)
        }
    };
    if config.compaction && compaction.is_none() {
        let (refit, report) = compact(&model, cameras, config, reports.len())?;
        model = refit;
        compaction = Some(report);
    }
    Ok((model, reports, compaction))
}

fn header_for(config: &EncodeConfig, count: usize, root: RootCube) -> Result<ContainerHeader> {
    Ok(ContainerHeader {
        count: u32::try_from(count).map_err(|_| Error::Argument(format!("{count} splats exceed the container limit")))?,
        q: config.q as f32,
        params: config.quant_params(),
        beta: config.beta as f32,
        gamma: config.gamma as f32,
        root,
        max_depth: config.max_depth,
        zstd_level: config.zstd_level as u8,
        lengths: [0; STREAM_COUNT],
    })
}

fn serialize(splats: &[Splat], header: &ContainerHeader, rule: LeafRule) -> Result<(Vec<u8>, Vec<u32>)> {
    let positions: Vec<Vector3<f64>> = splats.iter().map(|s| s.position).collect();
    let tree = build_octree(&positions, header.root, header.max_depth, rule);
    let quantized: Vec<QuantizedSplat> = tree
        .order
        .par_iter()
        .map(|&k| QuantizedSplat::from_splat(&splats[k as usize], &header.params))
        .collect();
    let streams = encode_attribute_streams(&quantized, tree.bytes);
    Ok((write_container(header, &streams)?, tree.order))
}

/// Quantize and serialize a model as it stands. Also returns the index of
/// each splat in container order.
pub fn quantize_model(splats: &[Splat], eyes: &[Vector3<f64>], config: &EncodeConfig) -> Result<(Vec<u8>, Vec<u32>)> {
    config.validate()?;
    let positions: Vec<Vector3<f64>> = splats.iter().map(|s| s.position).collect();
    let header = header_for(config, splats.len(), RootCube::enclosing(&positions))?;
    let tol = tolerances(&positions, eyes, header.beta as f64, header.gamma as f64);
    serialize(splats, &header, LeafRule::Precision(&tol))
}

/// Full encoder: prune against the model's own renders, compact, quantize,
/// serialize and compress.
pub fn encode(splats: Vec<Splat>, cameras: &[Camera], config: &EncodeConfig) -> Result<EncodeOutput> {
    config.validate()?;
    let input_splats = splats.len();
    let mut clock = Stopwatch::new();
    let (model, pruning, compaction) = reduce(splats, cameras, config)?;
    clock.lap("prune_and_compact");
    let eyes: Vec<Vector3<f64>> = cameras.iter().map(|c| c.eye).collect();
    let (bytes, order) = quantize_model(&model, &eyes, config)?;
    clock.lap("quantize_and_compress");

    let header = ContainerHeader::from_bytes(&bytes)?;
    let report = EncodeReport {
        config: config.clone(),
        input_splats,
        output_splats: model.len(),
        pruning,
        compaction,
        stream_lengths: STREAM_NAMES
            .iter()
            .zip(header.lengths)
            .map(|(&stream, len)| StreamLength {
                stream,
                bytes: len as usize,
            })
            .collect(),
        container_bytes: bytes.len(),
        bytes_per_splat: if model.is_empty() { 0.0 } else { bytes.len() as f64 / model.len() as f64 },
        timings: clock.timings,
    };
    Ok(EncodeOutput {
        bytes,
        model,
        order,
        report,
    })
}

/// Splats in container order, as integers, with their leaf positions.
pub struct DecodedContainer {
    pub header: ContainerHeader,
    pub positions: Vec<Vector3<f64>>,
    pub quantized: Vec<QuantizedSplat>,
}

impl DecodedContainer {
    pub fn splats(&self) -> Vec<Splat> {
        self.positions
            .par_iter()
            .zip(&self.quantized)
            .map(|(p, q)| q.to_splat(*p, &self.header.params))
            .collect()
    }
}

pub fn read_model(bytes: &[u8]) -> Result<DecodedContainer> {
    let (header, streams) = read_container(bytes)?;
    let (leaves, used) = deserialize_octree(&streams.position, header.root, header.max_depth)
        .map_err(|e| match e {
            Error::Length(m) => Error::Format(format!("position stream is too short: {m}")),
            other => other,
        })?;
    if used != streams.position.len() {
        return Err(Error::Format(format!(
            "position stream has {} trailing bytes",
            streams.position.len() - used
        )));
    }
    if leaves.len() != header.count as usize {
        return Err(Error::Format(format!(
            "octree holds {} splats, header lists {}",
            leaves.len(),
            header.count
        )));
    }
    let quantized = decode_attribute_streams(&streams, leaves.len())?;
    Ok(DecodedContainer {
        header,
        positions: leaves.iter().map(|l| l.position).collect(),
        quantized,
    })
}

pub fn decode(bytes: &[u8]) -> Result<(ContainerHeader, Vec<Splat>)> {
    let d = read_model(bytes)?;
    let splats = d.splats();
    Ok((d.header, splats))
}

/// Serialize a decoded model again with the header's root, depth, scale
/// factors and level. Positions are already leaf centers, so the tree is
/// rebuilt by stopping exactly at those centers.
pub fn reencode(bytes: &[u8]) -> Result<Vec<u8>> {
    let (header, splats) = decode(bytes)?;
    Ok(serialize(&splats, &header, LeafRule::ExactCenter)?.0)
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so a failure never leaves a partial output behind.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn encode_file(model: &Path, cameras: &Path, config: &EncodeConfig, out: &Path) -> Result<EncodeReport> {
    let mut clock = Stopwatch::new();
    let splats = load_splats(model)?;
    let cameras = load_cameras(cameras)?;
    clock.lap("load");
    let mut output = encode(splats, &cameras, config)?;
    write_atomically(out, &output.bytes)?;
    clock.lap("write");
    let mut timings = clock.timings;
    timings.splice(1..1, output.report.timings.drain(..));
    output.report.timings = timings;
    Ok(output.report)
}

pub fn decode_file(input: &Path, out: &Path) -> Result<ContainerHeader> {
    let (header, splats) = decode(&std::fs::read(input)?)?;
    write_atomically(out, &splats_to_ply(&splats))?;
    Ok(header)
}
