//! mcmod: batch front-end for the multicarrier modulation engine.
//!
//! Loads or generates a block of symbols, runs them through a preset or a
//! JSON-configured modulator, and writes the waveform as an interleaved
//! binary64 IQ file with a JSON metadata sidecar. Optional extras: PSD and
//! PAPR metric files, the probed composite modulation matrix, and an
//! independent oracle check of the produced waveform.
//!
//! Exit status: 0 on success, 1 on any validation or I/O error, 2 when the
//! oracle check finds a mismatch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, ValueEnum};
use serde::Serialize;

use mcmod_core::config::ModulatorConfig;
use mcmod_core::engine::{Modulator, Waveform};
use mcmod_core::frame::{frame_input, DataFrame};
use mcmod_core::presets::{
    default_prototype, preset_fbmc_oqam, preset_ofdm, preset_scfdma, InputMapper, Preset,
};
use mcmod_core::Complex64;
use mcmod_tools::{config_doc, iq, metrics, oracles, prbs};

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstellationArg {
    Qpsk,
    #[value(name = "16qam")]
    Qam16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Psd,
    Papr,
}

/// Multicarrier modulator: presets and custom pipelines to IQ files.
#[derive(Debug, Parser)]
#[command(name = "mcmod", version, disable_help_subcommand = true)]
struct Args {
    /// Built-in configuration: cp-ofdm, sc-fdma, or fbmc-oqam.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,

    /// JSON configuration document (see the repository README for the
    /// field reference).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Prototype filter file for the fbmc-oqam preset: one real
    /// coefficient per line. Defaults to the built-in design.
    #[arg(long)]
    prototype: Option<PathBuf>,

    /// Complex symbols to modulate, as an interleaved binary64 IQ file.
    #[arg(long, conflicts_with_all = ["prbs_seed", "symbols"])]
    data: Option<PathBuf>,

    /// Generate symbols from the documented 64-bit LCG with this seed.
    #[arg(long)]
    prbs_seed: Option<u64>,

    /// Constellation for generated symbols.
    #[arg(long, value_enum, default_value = "qpsk")]
    constellation: ConstellationArg,

    /// Number of symbols to generate.
    #[arg(long)]
    symbols: Option<usize>,

    /// Output IQ file. The metadata sidecar is written next to it with
    /// ".json" appended; metric and matrix files follow the same pattern.
    #[arg(long)]
    out: PathBuf,

    /// Comma-separated metric files to produce: psd, papr.
    #[arg(long, value_enum, value_delimiter = ',')]
    metrics: Vec<MetricArg>,

    /// Also write the composite modulation matrix as CSV (desk-scale
    /// configurations only).
    #[arg(long)]
    emit_matrix: bool,

    /// Re-run the waveform through an independent reference and report the
    /// worst deviation.
    #[arg(long)]
    oracle_check: bool,
}

// ---------------------------------------------------------------------------
// Errors with exit codes
// ---------------------------------------------------------------------------

enum RunError {
    /// Validation, configuration, or I/O problem: exit 1.
    Validation(String),
    /// The oracle check failed: exit 2.
    OracleMismatch(String),
}

impl RunError {
    fn validation(msg: impl Into<String>) -> RunError {
        RunError::Validation(msg.into())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> RunError {
        RunError::Validation(e.to_string())
    }
}

type RunResult<T> = Result<T, RunError>;

// ---------------------------------------------------------------------------
// Configuration sources
// ---------------------------------------------------------------------------

struct ConfigSource {
    label: String,
    config: ModulatorConfig,
    mapper: InputMapper,
    preset_name: Option<&'static str>,
}

fn load_config(args: &Args) -> RunResult<ConfigSource> {
    match (&args.preset, &args.config) {
        (Some(name), None) => {
            let prototype = match &args.prototype {
                None => None,
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        RunError::validation(format!("{}: {e}", path.display()))
                    })?;
                    Some(config_doc::parse_prototype(&text).map_err(|e| {
                        RunError::validation(format!("{}: {e}", path.display()))
                    })?)
                }
            };
            let preset: Preset = match name.as_str() {
                "cp-ofdm" => preset_ofdm(),
                "sc-fdma" => preset_scfdma(),
                "fbmc-oqam" => {
                    let taps = prototype.clone().unwrap_or_else(|| default_prototype(32));
                    preset_fbmc_oqam(&taps)
                }
                other => {
                    return Err(RunError::validation(format!(
                        "unknown preset \"{other}\"; available: cp-ofdm, sc-fdma, fbmc-oqam"
                    )))
                }
            };
            if prototype.is_some() && name != "fbmc-oqam" {
                return Err(RunError::validation(
                    "--prototype only applies to the fbmc-oqam preset",
                ));
            }
            Ok(ConfigSource {
                label: format!("preset:{}", preset.name),
                preset_name: Some(preset.name),
                config: preset.config,
                mapper: preset.input_mapper,
            })
        }
        (None, Some(path)) => {
            if args.prototype.is_some() {
                return Err(RunError::validation(
                    "--prototype only applies to the fbmc-oqam preset; put taps in the document's h1 field instead",
                ));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::validation(format!("{}: {e}", path.display())))?;
            let config = config_doc::parse_config(&text)
                .map_err(|e| RunError::validation(e.to_string()))?;
            Ok(ConfigSource {
                label: format!("file:{}", path.display()),
                config,
                mapper: InputMapper::Identity,
                preset_name: None,
            })
        }
        (None, None) => Err(RunError::validation(
            "exactly one configuration source is required: --preset or --config",
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

// ---------------------------------------------------------------------------
// Data sources
// ---------------------------------------------------------------------------

struct DataSource {
    label: String,
    symbols: Vec<Complex64>,
    seed: Option<u64>,
    constellation: Option<&'static str>,
}

fn load_data(args: &Args) -> RunResult<DataSource> {
    match (&args.data, args.prbs_seed) {
        (Some(path), None) => {
            let symbols = iq::read_iq(path)
                .map_err(|e| RunError::validation(format!("{}: {e}", path.display())))?;
            if symbols.is_empty() {
                return Err(RunError::validation(format!(
                    "{}: data file contains no symbols",
                    path.display()
                )));
            }
            Ok(DataSource {
                label: format!("file:{}", path.display()),
                symbols,
                seed: None,
                constellation: None,
            })
        }
        (None, Some(seed)) => {
            let count = args.symbols.ok_or_else(|| {
                RunError::validation("--prbs-seed requires --symbols <count>")
            })?;
            if count == 0 {
                return Err(RunError::validation("--symbols must be at least 1"));
            }
            let (constellation, name) = match args.constellation {
                ConstellationArg::Qpsk => (prbs::Constellation::Qpsk, "qpsk"),
                ConstellationArg::Qam16 => (prbs::Constellation::Qam16, "16qam"),
            };
            Ok(DataSource {
                label: format!("prbs:{seed}:{name}"),
                symbols: prbs::symbols(seed, constellation, count),
                seed: Some(seed),
                constellation: Some(name),
            })
        }
        (None, None) => Err(RunError::validation(
            "exactly one data source is required: --data or --prbs-seed with --symbols",
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn build_frames(source: &ConfigSource, symbols: &[Complex64]) -> Vec<DataFrame> {
    match source.mapper {
        InputMapper::Identity => frame_input(
            symbols,
            source.config.n,
            source.config.m_prime,
            source.config.p,
        ),
        InputMapper::OqamStagger => Preset {
            name: source.preset_name.unwrap_or("custom"),
            config: source.config.clone(),
            input_mapper: InputMapper::OqamStagger,
        }
        .frames(symbols),
    }
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn output_path(base: &Path, k: usize) -> PathBuf {
    if k == 0 {
        base.to_path_buf()
    } else {
        sibling(base, &format!(".k{k}"))
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    tool_version: &'static str,
    config_source: &'a str,
    data_source: &'a str,
    prbs_seed: Option<u64>,
    constellation: Option<&'a str>,
    symbol_count: usize,
    frame_count: usize,
    frame_len: usize,
    stride: Option<usize>,
    sample_count: usize,
    rate_multiplier_num: u64,
    rate_multiplier_den: u64,
    config_digest: String,
    outputs: Vec<String>,
}

fn write_waveform(
    args: &Args,
    waveform: &Waveform,
    config_source: &ConfigSource,
    data_source: &DataSource,
) -> RunResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (k, samples) in waveform.outputs.iter().enumerate() {
        let path = output_path(&args.out, k);
        iq::write_iq(&path, samples)?;
        paths.push(path);
    }
    let sidecar = Sidecar {
        tool: "mcmod",
        tool_version: env!("CARGO_PKG_VERSION"),
        config_source: &config_source.label,
        data_source: &data_source.label,
        prbs_seed: data_source.seed,
        constellation: data_source.constellation,
        symbol_count: data_source.symbols.len(),
        frame_count: waveform.frame_count,
        frame_len: waveform.frame_len,
        stride: waveform.stride,
        sample_count: waveform.len(),
        rate_multiplier_num: waveform.rate.num(),
        rate_multiplier_den: waveform.rate.den(),
        config_digest: format!("{:016x}", waveform.config_digest),
        outputs: paths.iter().map(|p| p.display().to_string()).collect(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n";
    std::fs::write(sibling(&args.out, ".json"), json)?;
    Ok(paths)
}

fn write_metrics(args: &Args, waveform: &Waveform) -> RunResult<()> {
    let samples = &waveform.outputs[0];
    for metric in &args.metrics {
        match metric {
            MetricArg::Papr => {
                let report = metrics::papr(samples)
                    .map_err(|e| RunError::validation(format!("papr: {e}")))?;
                let path = sibling(&args.out, ".papr.csv");
                metrics::write_papr_csv(&path, &report)?;
                println!(
                    "papr: {:.4} ({:.2} dB) -> {}",
                    report.linear,
                    report.db,
                    path.display()
                );
            }
            MetricArg::Psd => {
                let segment = 256.min(samples.len());
                let bins = metrics::psd(samples, segment, segment / 2)
                    .map_err(|e| RunError::validation(format!("psd: {e}")))?;
                let path = sibling(&args.out, ".psd.csv");
                metrics::write_psd_csv(&path, &bins)?;
                println!("psd: {} bins -> {}", bins.len(), path.display());
            }
        }
    }
    Ok(())
}

const MATRIX_ENTRY_LIMIT: usize = 64_000_000;

fn write_matrix(args: &Args, modulator: &Modulator) -> RunResult<()> {
    let cfg = modulator.config();
    let dims = modulator.dims();
    let slots = cfg.p * cfg.n * cfg.m_prime;
    let rows = waveform_rows(cfg, dims.frame_len);
    let entries = slots.saturating_mul(rows);
    if entries > MATRIX_ENTRY_LIMIT {
        return Err(RunError::validation(format!(
            "--emit-matrix: composite matrix would hold {entries} entries \
             (limit {MATRIX_ENTRY_LIMIT}); probe a smaller configuration"
        )));
    }
    let matrix = modulator.composite_matrix();
    let mut out = String::with_capacity(matrix.rows() * matrix.cols() * 24);
    out.push_str("row,col,re,im\n");
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let v = matrix[(i, j)];
            writeln!(out, "{i},{j},{:?},{:?}", v.re, v.im).expect("string write");
        }
    }
    let path = sibling(&args.out, ".matrix.csv");
    std::fs::write(&path, out)?;
    println!(
        "matrix: {} x {} -> {}",
        matrix.rows(),
        matrix.cols(),
        path.display()
    );
    Ok(())
}

fn waveform_rows(cfg: &ModulatorConfig, frame_len: usize) -> usize {
    match &cfg.e4 {
        mcmod_core::config::StreamCombiner::Identity => cfg.p * frame_len,
        mcmod_core::config::StreamCombiner::SumStreams => frame_len,
        mcmod_core::config::StreamCombiner::Explicit(mask) => mask.rows(),
    }
}

// ---------------------------------------------------------------------------
// Oracle check
// ---------------------------------------------------------------------------

fn oracle_check(
    source: &ConfigSource,
    symbols: &[Complex64],
    frames: &[DataFrame],
    waveform: &Waveform,
) -> RunResult<()> {
    let report = match source.preset_name {
        Some("cp-ofdm") => {
            let mut reference = Vec::new();
            for chunk in padded_chunks(symbols, 128) {
                reference.extend(
                    oracles::ofdm_reference(&chunk)
                        .map_err(|e| RunError::validation(e.to_string()))?,
                );
            }
            oracles::compare_vectors(&waveform.outputs[0], &reference, 1e-10)
        }
        Some("sc-fdma") => {
            let mut reference = Vec::new();
            for chunk in padded_chunks(symbols, 32) {
                reference.extend(
                    oracles::scfdma_reference(&chunk)
                        .map_err(|e| RunError::validation(e.to_string()))?,
                );
            }
            let constant = oracles::estimate_global_constant(&waveform.outputs[0], &reference)
                .ok_or_else(|| RunError::validation("oracle-check: reference is all zero"))?;
            let scaled: Vec<Complex64> = reference.iter().map(|&v| constant * v).collect();
            println!(
                "oracle constant: {:.12}{:+.12}j",
                constant.re, constant.im
            );
            oracles::compare_vectors(&waveform.outputs[0], &scaled, 1e-9)
        }
        _ => {
            let reference = oracles::scalar_reference(&source.config, frames)
                .map_err(|e| RunError::validation(e.to_string()))?;
            oracles::compare_waveforms(&waveform.outputs, &reference, 1e-10)
        }
    };
    println!("oracle: {report}");
    if report.pass {
        Ok(())
    } else {
        Err(RunError::OracleMismatch(report.to_string()))
    }
}

fn padded_chunks(symbols: &[Complex64], size: usize) -> Vec<Vec<Complex64>> {
    symbols
        .chunks(size)
        .map(|chunk| {
            let mut block = chunk.to_vec();
            block.resize(size, Complex64::new(0.0, 0.0));
            block
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn run(args: &Args) -> RunResult<()> {
    let config_source = load_config(args)?;
    let data_source = load_data(args)?;

    let modulator = Modulator::new(config_source.config.clone())
        .map_err(|e| RunError::validation(format!("configuration invalid: {e}")))?;

    let frames = build_frames(&config_source, &data_source.symbols);
    if frames.is_empty() {
        return Err(RunError::validation("no frames to modulate"));
    }
    let waveform = modulator
        .modulate(&frames)
        .map_err(|e| RunError::validation(e.to_string()))?;

    let paths = write_waveform(args, &waveform, &config_source, &data_source)?;
    println!(
        "wrote {} samples x {} output(s): {}",
        waveform.len(),
        waveform.outputs.len(),
        paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );

    write_metrics(args, &waveform)?;
    if args.emit_matrix {
        write_matrix(args, &modulator)?;
    }
    if args.oracle_check {
        oracle_check(&config_source, &data_source.symbols, &frames, &waveform)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // Help and version requests are successes; everything else is
            // a usage problem reported with the validation exit status
            // (clap's own status 2 is reserved for oracle mismatches).
            let kind = e.kind();
            let _ = e.print();
            return if matches!(
                kind,
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::OracleMismatch(msg)) => {
            eprintln!("oracle mismatch: {msg}");
            ExitCode::from(2)
        }
    }
}
