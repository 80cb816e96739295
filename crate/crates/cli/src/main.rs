use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use potr_core::bitstream::{read_container, ContainerHeader, STREAM_NAMES};
use potr_core::codec::fixture::{generate, FixtureConfig};
use potr_core::codec::{
    compaction_sweep, compute_metrics, decode, decode_file, encode_file, reduce, size_report, write_atomically, EncodeConfig,
    DEFAULT_Q,
};
use potr_core::raster::render_all;
use potr_core::scene::{cameras_to_json, load_cameras, load_splats, splats_to_ply};
use potr_core::Splat;
use serde_json::json;

#[derive(Parser)]
#[command(name = "potr", version, about = "Post-training compression of 3D Gaussian splat models")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a PLY model into a .potr container.
    Encode(EncodeArgs),
    /// Expand a .potr container back into a PLY model.
    Decode {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare two models (PLY or .potr) over a camera set.
    Metrics {
        #[arg(short = 'a', long)]
        model: PathBuf,
        /// Reference model.
        #[arg(short = 'b', long)]
        reference: PathBuf,
        #[arg(short, long)]
        cameras: PathBuf,
    },
    /// Print the header and per-stream size attribution of a container.
    Info {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Compaction sweep over lambda and alpha; CSV on stdout.
    Sweep {
        #[command(flatten)]
        encode: SceneArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 1.0, 10.0, 100.0])]
        lambda: Vec<f64>,
        /// Defaults to the value derived from q.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(short, long, default_value_t = DEFAULT_Q)]
        q: f64,
        /// Prune with the q schedule first.
        #[arg(long)]
        prune: bool,
    },
    /// Write the synthetic test scene.
    GenFixture {
        #[arg(long, default_value_t = FixtureConfig::default().splats)]
        splats: usize,
        #[arg(long, default_value_t = FixtureConfig::default().cameras)]
        cameras: usize,
        #[arg(long, default_value_t = FixtureConfig::default().width)]
        width: u32,
        #[arg(long, default_value_t = FixtureConfig::default().height)]
        height: u32,
        #[arg(long, default_value_t = FixtureConfig::default().seed)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        cameras_out: PathBuf,
    },
}

#[derive(Args)]
struct SceneArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    cameras: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(short, long)]
    output: PathBuf,
    /// Quality in [0, 1]; higher keeps more detail.
    #[arg(short, long, default_value_t = DEFAULT_Q)]
    q: f64,
    #[arg(long)]
    zstd_level: Option<i32>,
    /// `key=value`, repeatable. Keys: lambda, alpha_par, max_delta_mse,
    /// beta, gamma, sf_sh, sf_opacity, sf_rotation, sf_scale, iterations,
    /// mapping_shape, zstd_level, max_depth, compaction, placement.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load_model(path: &Path) -> Result<Vec<Splat>> {
    let splats = if path.extension().is_some_and(|e| e == "potr") {
        decode(&std::fs::read(path)?)?.1
    } else {
        load_splats(path)?
    };
    Ok(splats)
}

fn header_json(h: &ContainerHeader) -> serde_json::Value {
    json!({
        "count": h.count,
        "q": h.q,
        "sf_sh": h.params.sf_sh,
        "sf_opacity": h.params.sf_opacity,
        "sf_rotation": h.params.sf_rotation,
        "sf_scale": h.params.sf_scale,
        "beta": h.beta,
        "gamma": h.gamma,
        "root_center": h.root.center,
        "root_half": h.root.half,
        "max_depth": h.max_depth,
        "zstd_level": h.zstd_level,
        "stream_lengths": STREAM_NAMES.iter().zip(h.lengths).map(|(n, l)| json!({"stream": n, "bytes": l})).collect::<Vec<_>>(),
    })
}

fn run(cli: Cli) -> Result<Option<serde_json::Value>> {
    match cli.command {
        Command::Encode(args) => {
            let mut config = EncodeConfig::from_q(args.q)?;
            if let Some(level) = args.zstd_level {
                config.zstd_level = level;
            }
            for o in &args.overrides {
                config.apply_override(o)?;
            }
            config.validate()?;
            let report = encode_file(&args.scene.input, &args.scene.cameras, &config, &args.output)?;
            info!(
                "{} -> {} splats, {} bytes ({:.2} bytes/splat)",
                report.input_splats, report.output_splats, report.container_bytes, report.bytes_per_splat
            );
            Ok(Some(serde_json::to_value(report)?))
        }
        Command::Decode { input, output } => {
            let header = decode_file(&input, &output)?;
            info!("decoded {} splats", header.count);
            Ok(Some(header_json(&header)))
        }
        Command::Metrics { model, reference, cameras } => {
            let cameras = load_cameras(&cameras)?;
            let a = load_model(&model)?;
            let targets = render_all(&load_model(&reference)?, &cameras);
            let mut report = compute_metrics(&a, &targets, &cameras)?;
            if model.extension().is_some_and(|e| e == "potr") {
                report = report.with_container(&std::fs::read(&model)?)?;
            }
            let value = serde_json::to_value(report)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(Some(value))
        }
        Command::Info { input } => {
            let bytes = std::fs::read(&input)?;
            let (header, _) = read_container(&bytes)?;
            let value = json!({ "header": header_json(&header), "size": size_report(&bytes)? });
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(Some(value))
        }
        Command::Sweep { encode, lambda, alpha, q, prune } => {
            let mut base = EncodeConfig::from_q(q)?;
            let alphas = if alpha.is_empty() { vec![base.alpha_par] } else { alpha };
            let cameras = load_cameras(&encode.cameras)?;
            let mut splats = load_model(&encode.input)?;
            let targets = render_all(&splats, &cameras);
            if prune {
                base.compaction = false;
                splats = reduce(splats, &cameras, &base)?.0;
            }
            let rows = compaction_sweep(&splats, &cameras, &targets, &lambda, &alphas, &base)?;
            println!("lambda,alpha_par,ac_zero_fraction,mse,container_bytes");
            for r in &rows {
                println!("{},{},{},{},{}", r.lambda, r.alpha_par, r.ac_zero_fraction, r.mse, r.container_bytes);
            }
            Ok(Some(serde_json::to_value(rows)?))
        }
        Command::GenFixture { splats, cameras, width, height, seed, output, cameras_out } => {
            if splats == 0 || cameras == 0 || width == 0 || height == 0 {
                bail!("splats, cameras, width and height must be positive");
            }
            let config = FixtureConfig { splats, cameras, width, height, seed };
            let scene = generate(&config);
            write_atomically(&output, &splats_to_ply(&scene.splats))?;
            write_atomically(&cameras_out, cameras_to_json(&scene.cameras).as_bytes())?;
            Ok(Some(serde_json::to_value(config)?))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let report_path = cli.report.clone();
    let result = run(cli).and_then(|report| {
        if let (Some(path), Some(report)) = (report_path, report) {
            let text = serde_json::to_string_pretty(&report)?;
            write_atomically(&path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
