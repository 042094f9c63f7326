//! Pipeline execution: from data frames to the output waveform.
//!
//! The chain per frame and per stream is: tier-1 cyclic extension,
//! commutator routing into the filter bank, first generalized filtering
//! stage, tier-2 extension, window, subchannel multiplexer (with optional
//! transpose), second filtering stage, tier-3 extension, summation over the
//! stage-2 subchannels, stream combining, and overlap-add of consecutive
//! frames.
//!
//! Every block is the exact linear operator its builder in `operators`
//! materializes, but applied through the index structure: extensions gather
//! rows, the filter scatters taps from the occupied (upsampled) positions,
//! and the modulation grid enters as per-sample phase twists. This keeps
//! full-scale configurations (circular periods in the thousands) cheap
//! while remaining entry-for-entry equal to the dense matrix product, which
//! the tests verify at desk scale.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::config::{
    digest, validate, Dimensions, ExtensionSpec, ModulatorConfig, Rate, StageSpec,
    StreamCombiner, ValidationErrors,
};
use crate::frame::{frame_input, DataFrame};
use crate::mat::{Mat, Mat01};
use crate::operators::OperatorError;

// --- errors -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// A stage parameter failed its mechanical precondition.
    Operator(OperatorError),
    /// A signal arrived with the wrong shape.
    ShapeMismatch {
        what: &'static str,
        got: (usize, usize),
        expected: (usize, usize),
    },
    /// The stage has no offset entry for this stream.
    StreamIndexOutOfRange { stream: usize, available: usize },
    /// Transpose multiplexing requested without an E3 matrix.
    MissingTransposeMultiplexer,
    /// Nothing to modulate.
    NoFrames,
    /// Multi-frame input, but the frame advance is not a whole number of
    /// output samples for this configuration.
    StrideUnavailable,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Operator(e) => write!(f, "{e}"),
            EngineError::ShapeMismatch {
                what,
                got,
                expected,
            } => write!(
                f,
                "{what}: got {}x{}, expected {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            EngineError::StreamIndexOutOfRange { stream, available } => {
                write!(f, "stream {stream} outside the {available} configured offsets")
            }
            EngineError::MissingTransposeMultiplexer => {
                write!(f, "transpose path enabled but E3 is missing")
            }
            EngineError::NoFrames => write!(f, "no input frames"),
            EngineError::StrideUnavailable => write!(
                f,
                "multi-frame input needs an integral output-rate stride; this configuration has none"
            ),
        }
    }
}

impl core::error::Error for EngineError {}

impl From<OperatorError> for EngineError {
    fn from(e: OperatorError) -> Self {
        EngineError::Operator(e)
    }
}

// --- signals ----------------------------------------------------------

/// An intermediate pipeline signal: rows are time samples, columns are
/// subchannels. Carries the cumulative rate multiplier and the index of
/// the parallel stream it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSignal {
    pub values: Mat,
    pub rate: Rate,
    pub stream: usize,
}

/// Final modulator output.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// One complex sample vector per output k.
    pub outputs: Vec<Vec<Complex64>>,
    pub frame_count: usize,
    /// Per-frame output length.
    pub frame_len: usize,
    /// Frame advance in output samples, when integral.
    pub stride: Option<usize>,
    /// Output sample rate relative to the input symbol rate.
    pub rate: Rate,
    /// Digest of the configuration that produced this waveform.
    pub config_digest: u64,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.outputs.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// --- phase helpers ----------------------------------------------------

/// `exp(sign * 2*pi*j * num / den)` with the argument reduced in exact
/// integer arithmetic first, so large sample indices lose no precision.
fn unit_root(num: usize, den: usize, negate: bool) -> Complex64 {
    let r = (num % den) as f64 / den as f64;
    let theta = core::f64::consts::TAU * if negate { -r } else { r };
    Complex64::cis(theta)
}

/// Causal-correction phase for channel `m`: `exp(-pi*j * m*(k0-1) / m_ch)`,
/// reduced modulo the full turn `2*m_ch`.
fn causal_phase(m: usize, k0: usize, m_ch: usize) -> Complex64 {
    let num = (m * (k0 - 1)) % (2 * m_ch);
    Complex64::cis(-core::f64::consts::PI * num as f64 / m_ch as f64)
}

// --- structured block applications -------------------------------------

/// Cyclic/zero extension applied per column: zero prefix rows, copies of
/// the frame tail, the frame, copies of the frame head, zero suffix rows.
pub fn apply_extension(x: &Mat, ext: &ExtensionSpec) -> Mat {
    let core_len = x.rows();
    debug_assert!(ext.n_cp <= core_len && ext.n_cs <= core_len, "extension exceeds frame");
    let mut out = Mat::zeros(ext.extended(core_len), x.cols());
    let mut row = ext.n_zp;
    for r in 0..ext.n_cp {
        out.row_mut(row).copy_from_slice(x.row(core_len - ext.n_cp + r));
        row += 1;
    }
    for r in 0..core_len {
        out.row_mut(row).copy_from_slice(x.row(r));
        row += 1;
    }
    for r in 0..ext.n_cs {
        out.row_mut(row).copy_from_slice(x.row(r));
        row += 1;
    }
    out
}

/// Routes data subchannel columns into filter-bank columns: column `m` of
/// `x` lands in column `e[m]`, all other filter channels stay zero.
pub fn apply_commutator(x: &Mat, e: &[usize], m_ch: usize) -> Mat {
    let mut out = Mat::zeros(x.rows(), m_ch);
    for (m, &t) in e.iter().enumerate() {
        debug_assert!(t < m_ch, "commutator target out of range");
        for r in 0..x.rows() {
            out[(r, t)] = x[(r, m)];
        }
    }
    out
}

/// Diagonal window applied to the rows; entries beyond the window length
/// are zeroed, an empty window leaves the signal untouched.
pub fn apply_window(x: &mut Mat, w: &[Complex64]) {
    if w.is_empty() {
        return;
    }
    for i in 0..x.rows() {
        let scale = if i < w.len() { w[i] } else { Complex64::ZERO };
        for z in x.row_mut(i) {
            *z *= scale;
        }
    }
}

/// `x * mask` for a 0-1 mask, accumulating source columns into target
/// columns.
pub fn apply_mask_right(x: &Mat, mask: &Mat01) -> Mat {
    assert_eq!(x.cols(), mask.rows(), "mask row count mismatch");
    let mut out = Mat::zeros(x.rows(), mask.cols());
    for (i, j) in mask.ones() {
        for r in 0..x.rows() {
            let v = x[(r, i)];
            out[(r, j)] += v;
        }
    }
    out
}

/// Upsamples `x` by `up` with a time offset, zero-stuffs to `period`
/// samples, and filters circularly with `taps`. This is the pre-modulation
/// core of a filtering stage, written as a scatter from the occupied
/// positions: output `(up*u + offset + t) mod period` accumulates
/// `taps[t] * x[u]`.
pub fn upsampled_circular_filter(
    x: &[Complex64],
    taps: &[Complex64],
    up: usize,
    offset: usize,
    period: usize,
) -> Vec<Complex64> {
    assert!(up >= 1 && offset < up, "offset must be smaller than the factor");
    assert!(!taps.is_empty() && taps.len() <= period, "taps must fit the period");
    assert!(period >= up * x.len(), "period too short for the upsampled signal");
    let mut out = vec![Complex64::ZERO; period];
    for (u, &v) in x.iter().enumerate() {
        if v == Complex64::ZERO {
            continue;
        }
        let base = up * u + offset;
        for (t, &tap) in taps.iter().enumerate() {
            out[(base + t) % period] += tap * v;
        }
    }
    out
}

/// One generalized filtering stage.
///
/// Per subchannel `m` the column is twisted by the conjugate modulation
/// phase at its occupied positions, passed through the upsampled circular
/// filter, twisted back by the forward phase, scaled by the causal
/// correction, and decimated. This is exactly the matrix chain
/// `decimate(modulate o filter(conj-modulate o stuff(upsample(x)))) * diag(c)`
/// evaluated without materializing any operator; the modulation equivalence
/// it relies on needs the circular period to be a multiple of the channel
/// count, which `validate` enforces for pipeline runs (this function itself
/// stays faithful to the matrix semantics either way).
pub fn stage_filter(input: &StageSignal, spec: &StageSpec) -> Result<StageSignal, EngineError> {
    let x = &input.values;
    if x.cols() != spec.m {
        return Err(EngineError::ShapeMismatch {
            what: "stage input subchannels",
            got: (x.rows(), x.cols()),
            expected: (x.rows(), spec.m),
        });
    }
    if spec.l == 0 || spec.q == 0 {
        return Err(OperatorError::ZeroFactor.into());
    }
    let o = *spec
        .o
        .get(input.stream)
        .ok_or(EngineError::StreamIndexOutOfRange {
            stream: input.stream,
            available: spec.o.len(),
        })?;
    let a = *spec
        .a
        .get(input.stream)
        .ok_or(EngineError::StreamIndexOutOfRange {
            stream: input.stream,
            available: spec.a.len(),
        })?;
    if o >= spec.l {
        return Err(OperatorError::OffsetOutOfRange {
            offset: o,
            factor: spec.l,
        }
        .into());
    }
    if a >= spec.q {
        return Err(OperatorError::OffsetOutOfRange {
            offset: a,
            factor: spec.q,
        }
        .into());
    }
    if spec.h.is_empty() {
        return Err(OperatorError::EmptyFilter.into());
    }
    if spec.h.len() > spec.n_c {
        return Err(OperatorError::FilterTooLong {
            taps: spec.h.len(),
            period: spec.n_c,
        }
        .into());
    }
    if spec.n_c < spec.l * x.rows() {
        return Err(OperatorError::InformationLoss {
            period: spec.n_c,
            needed: spec.l * x.rows(),
        }
        .into());
    }

    let n_s = x.rows();
    let n_c = spec.n_c;
    let n_out = n_c / spec.q;
    let k0 = spec.h.len();
    let mut out = Mat::zeros(n_out, spec.m);
    let mut acc = vec![Complex64::ZERO; n_c];
    for m in 0..spec.m {
        acc.fill(Complex64::ZERO);
        for u in 0..n_s {
            let v = x[(u, m)];
            if v == Complex64::ZERO {
                continue;
            }
            let base = spec.l * u + o;
            // Conjugate modulation phase at the occupied position.
            let tw = v * unit_root(base * m, spec.m, !spec.b_conj);
            for (t, &tap) in spec.h.iter().enumerate() {
                acc[(base + t) % n_c] += tap * tw;
            }
        }
        let c_m = if spec.b_cas {
            causal_phase(m, k0, spec.m)
        } else {
            Complex64::ONE
        };
        for r in 0..n_out {
            let k = spec.q * r + a;
            out[(r, m)] = acc[k] * unit_root(k * m, spec.m, spec.b_conj) * c_m;
        }
    }
    Ok(StageSignal {
        values: out,
        rate: input.rate.times(spec.l as u64, spec.q as u64),
        stream: input.stream,
    })
}

/// Subchannel multiplexing after the window: `y * E2`, and on the
/// transpose path `(y * E2)^T * E3`.
pub fn multiplex(
    input: &StageSignal,
    e2: &Mat01,
    e3: Option<&Mat01>,
    transpose: bool,
) -> Result<StageSignal, EngineError> {
    let y = &input.values;
    if y.cols() != e2.rows() {
        return Err(EngineError::ShapeMismatch {
            what: "multiplexer E2 rows vs subchannels",
            got: (y.rows(), y.cols()),
            expected: (y.rows(), e2.rows()),
        });
    }
    let routed = apply_mask_right(y, e2);
    if !transpose {
        return Ok(StageSignal {
            values: routed,
            rate: input.rate,
            stream: input.stream,
        });
    }
    let e3 = e3.ok_or(EngineError::MissingTransposeMultiplexer)?;
    let flipped = routed.transpose();
    if flipped.cols() != e3.rows() {
        return Err(EngineError::ShapeMismatch {
            what: "multiplexer E3 rows vs transposed frame",
            got: (flipped.rows(), flipped.cols()),
            expected: (flipped.rows(), e3.rows()),
        });
    }
    Ok(StageSignal {
        values: apply_mask_right(&flipped, e3),
        rate: input.rate,
        stream: input.stream,
    })
}

/// Overlap-adds per-frame outputs at the given stride. `frames[f][k]` is
/// the sample vector of output `k` for frame `f`; all frames must agree in
/// output count and length.
pub fn assemble_frames(frames: &[Vec<Vec<Complex64>>], stride: usize) -> Vec<Vec<Complex64>> {
    assert!(!frames.is_empty(), "at least one frame required");
    let k = frames[0].len();
    let frame_len = frames[0][0].len();
    let total = (frames.len() - 1) * stride + frame_len;
    let mut out = vec![vec![Complex64::ZERO; total]; k];
    for (f, frame) in frames.iter().enumerate() {
        assert_eq!(frame.len(), k, "output count mismatch across frames");
        for (kk, samples) in frame.iter().enumerate() {
            assert_eq!(samples.len(), frame_len, "frame length mismatch");
            let dst = &mut out[kk][f * stride..f * stride + frame_len];
            for (d, &s) in dst.iter_mut().zip(samples) {
                *d += s;
            }
        }
    }
    out
}

fn combine_streams(
    per_stream: &[Vec<Complex64>],
    e4: &StreamCombiner,
    k: usize,
    frame_len: usize,
) -> Vec<Vec<Complex64>> {
    match e4 {
        StreamCombiner::Identity => per_stream.to_vec(),
        StreamCombiner::SumStreams => {
            let mut sum = vec![Complex64::ZERO; frame_len];
            for s in per_stream {
                for (d, &v) in sum.iter_mut().zip(s) {
                    *d += v;
                }
            }
            vec![sum]
        }
        StreamCombiner::Explicit(mask) => {
            let mut out = vec![vec![Complex64::ZERO; frame_len]; k];
            for (i, j) in mask.ones() {
                out[i / frame_len][i % frame_len] += per_stream[j / frame_len][j % frame_len];
            }
            out
        }
    }
}

// --- the modulator ----------------------------------------------------

/// A validated configuration ready to modulate frames.
#[derive(Debug, Clone)]
pub struct Modulator {
    config: ModulatorConfig,
    dims: Dimensions,
    digest: u64,
}

impl Modulator {
    pub fn new(config: ModulatorConfig) -> Result<Modulator, ValidationErrors> {
        let dims = validate(&config)?;
        let digest = digest(&config);
        Ok(Modulator {
            config,
            dims,
            digest,
        })
    }

    pub fn config(&self) -> &ModulatorConfig {
        &self.config
    }

    pub fn dims(&self) -> &Dimensions {
        &self.dims
    }

    pub fn config_digest(&self) -> u64 {
        self.digest
    }

    /// Runs the full per-frame chain, returning one sample vector per
    /// output k.
    pub fn modulate_frame(&self, frame: &DataFrame) -> Result<Vec<Vec<Complex64>>, EngineError> {
        let cfg = &self.config;
        if frame.streams.len() != cfg.p {
            return Err(EngineError::ShapeMismatch {
                what: "frame stream count",
                got: (frame.streams.len(), 0),
                expected: (cfg.p, 0),
            });
        }
        let mut per_stream = Vec::with_capacity(cfg.p);
        for (p, x) in frame.streams.iter().enumerate() {
            if (x.rows(), x.cols()) != (cfg.n, cfg.m_prime) {
                return Err(EngineError::ShapeMismatch {
                    what: "frame grid",
                    got: (x.rows(), x.cols()),
                    expected: (cfg.n, cfg.m_prime),
                });
            }
            let extended = apply_extension(x, &cfg.tier1);
            let routed = apply_commutator(&extended, &cfg.e, cfg.stage1.m);
            let filtered = stage_filter(
                &StageSignal {
                    values: routed,
                    rate: Rate::unit(),
                    stream: p,
                },
                &cfg.stage1,
            )?;
            let mut windowed = apply_extension(&filtered.values, &cfg.tier2);
            apply_window(&mut windowed, &cfg.window);
            let multiplexed = multiplex(
                &StageSignal {
                    values: windowed,
                    rate: filtered.rate,
                    stream: p,
                },
                &cfg.e2,
                cfg.e3.as_ref(),
                cfg.b_tran,
            )?;
            let filtered2 = stage_filter(&multiplexed, &cfg.stage2)?;
            let extended3 = apply_extension(&filtered2.values, &cfg.tier3);
            per_stream.push(extended3.sum_cols());
        }
        Ok(combine_streams(
            &per_stream,
            &cfg.e4,
            cfg.k,
            self.dims.frame_len,
        ))
    }

    /// Modulates a sequence of frames and overlap-adds them.
    pub fn modulate(&self, frames: &[DataFrame]) -> Result<Waveform, EngineError> {
        if frames.is_empty() {
            return Err(EngineError::NoFrames);
        }
        let per_frame: Result<Vec<_>, _> = frames.iter().map(|f| self.modulate_frame(f)).collect();
        let per_frame = per_frame?;
        let stride = if frames.len() > 1 {
            self.dims.stride.ok_or(EngineError::StrideUnavailable)?
        } else {
            self.dims.frame_len
        };
        Ok(Waveform {
            outputs: assemble_frames(&per_frame, stride),
            frame_count: frames.len(),
            frame_len: self.dims.frame_len,
            stride: self.dims.stride,
            rate: self.dims.rate,
            config_digest: self.digest,
        })
    }

    /// Frames a flat symbol sequence and modulates it.
    pub fn modulate_symbols(&self, symbols: &[Complex64]) -> Result<Waveform, EngineError> {
        let frames = frame_input(symbols, self.config.n, self.config.m_prime, self.config.p);
        self.modulate(&frames)
    }

    /// Probes the whole chain with unit impulses to obtain the composite
    /// linear operator: column `j` is the single-frame response to input
    /// slot `j` (stream-major, then time, then subchannel ordering), rows
    /// stack the K outputs. Exact by linearity. Cost grows with the product
    /// of input slots and output length; meant for desk-scale
    /// configurations.
    pub fn composite_matrix(&self) -> Mat {
        let cfg = &self.config;
        let slots = cfg.p * cfg.n * cfg.m_prime;
        let rows = cfg.k * self.dims.frame_len;
        let mut g = Mat::zeros(rows, slots);
        for j in 0..slots {
            let stream = j / (cfg.n * cfg.m_prime);
            let rest = j % (cfg.n * cfg.m_prime);
            let frame = DataFrame::impulse(
                cfg.p,
                cfg.n,
                cfg.m_prime,
                (stream, rest / cfg.m_prime, rest % cfg.m_prime),
            );
            let response = self
                .modulate_frame(&frame)
                .expect("impulse frame conforms to the validated geometry");
            for (k, samples) in response.iter().enumerate() {
                for (t, &s) in samples.iter().enumerate() {
                    g[(k * self.dims.frame_len + t, j)] = s;
                }
            }
        }
        g
    }
}
