//! Independent reference implementations used to cross-check the engine.
//!
//! Everything here is written as plain scalar loops over indices, directly
//! from the defining summations of each pipeline block, and deliberately
//! shares no code with the operator builders or the engine beyond complex
//! number arithmetic. Agreement between these references and the engine is
//! therefore evidence of correctness rather than a tautology.
//!
//! Three kinds of reference live here:
//!
//! - `scalar_reference` walks the whole pipeline with index-form loops for
//!   any configuration, including per-subchannel filter sets the engine
//!   does not expose.
//! - `ofdm_reference` and `scfdma_reference` are the textbook forms of the
//!   two classical waveforms (inverse DFT plus prefix; DFT spreading onto a
//!   subcarrier grid), written without reference to the pipeline at all.
//! - `linear_convolution_reference` is plain upsampled linear convolution,
//!   the form circular filtering must collapse to once the period is long
//!   enough.
//!
//! All transforms use the unnormalized sum convention. Where two
//! implementations are compared, `OracleReport` records the worst error and
//! whether it met the tolerance.

use std::f64::consts::{PI, TAU};
use std::fmt;

use mcmod_core::config::{ModulatorConfig, StreamCombiner, validate};
use mcmod_core::frame::DataFrame;
use mcmod_core::mat::Mat;
use mcmod_core::Complex64;

// ---------------------------------------------------------------------------
// Errors and reports
// ---------------------------------------------------------------------------

/// Failure modes of the reference implementations.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The configuration failed validation; the message lists the
    /// diagnostics.
    InvalidConfig(String),
    /// More than one frame was supplied but the configuration has no whole
    /// sample stride, so the overlap-add placement is undefined.
    MissingStride,
    /// An input had the wrong length for the requested reference.
    ShapeMismatch { what: &'static str, got: usize, expected: usize },
    /// The matrix handed to the least-squares recovery does not have full
    /// column rank, so the symbols are not recoverable.
    RankDeficient { rank: usize, columns: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            OracleError::MissingStride => {
                write!(f, "multiple frames supplied but the frame stride is fractional")
            }
            OracleError::ShapeMismatch { what, got, expected } => {
                write!(f, "{what}: expected length {expected}, got {got}")
            }
            OracleError::RankDeficient { rank, columns } => {
                write!(f, "matrix is rank deficient: rank {rank} of {columns} columns")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Outcome of comparing a waveform against a reference.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    /// Largest absolute difference over all outputs and samples.
    pub max_abs_err: f64,
    /// The same difference relative to the larger of the two magnitudes at
    /// the worst sample (zero when both signals are zero there).
    pub max_rel_err: f64,
    /// (output index, sample index) where the largest difference occurred.
    pub worst: (usize, usize),
    /// Absolute tolerance the comparison was held to.
    pub tolerance: f64,
    /// Whether the largest absolute difference met the tolerance.
    pub pass: bool,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "max abs err {:.3e} (rel {:.3e}) at output {} sample {}, tolerance {:.1e}: {}",
            self.max_abs_err,
            self.max_rel_err,
            self.worst.0,
            self.worst.1,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares a set of output waveforms against references sample by sample.
///
/// Panics if the shapes differ; shape agreement is the caller's claim and a
/// mismatch there is a harder failure than any numeric error.
pub fn compare_waveforms(
    got: &[Vec<Complex64>],
    want: &[Vec<Complex64>],
    tolerance: f64,
) -> OracleReport {
    assert_eq!(got.len(), want.len(), "output count differs");
    let mut report = OracleReport {
        max_abs_err: 0.0,
        max_rel_err: 0.0,
        worst: (0, 0),
        tolerance,
        pass: true,
    };
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        assert_eq!(g.len(), w.len(), "output {k} length differs");
        for (n, (&a, &b)) in g.iter().zip(w).enumerate() {
            let abs = (a - b).norm();
            if abs > report.max_abs_err {
                let scale = a.norm().max(b.norm());
                report.max_abs_err = abs;
                report.max_rel_err = if scale > 0.0 { abs / scale } else { 0.0 };
                report.worst = (k, n);
            }
        }
    }
    report.pass = report.max_abs_err <= tolerance;
    report
}

/// Convenience wrapper for single-output comparisons.
pub fn compare_vectors(got: &[Complex64], want: &[Complex64], tolerance: f64) -> OracleReport {
    compare_waveforms(&[got.to_vec()], &[want.to_vec()], tolerance)
}

/// Estimates a single complex constant `c` such that `got ≈ c · want`,
/// sampled where the reference is largest so the quotient is well
/// conditioned. Returns `None` when the reference is identically zero.
pub fn estimate_global_constant(got: &[Complex64], want: &[Complex64]) -> Option<Complex64> {
    let (idx, peak) = want
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if peak == 0.0 {
        return None;
    }
    Some(got[idx] / want[idx])
}

// ---------------------------------------------------------------------------
// Scalar pipeline reference
// ---------------------------------------------------------------------------

/// Time-major grid: `grid[n][m]` is the sample of subchannel `m` at time
/// index `n`. All scalar references work on this plain representation.
pub type Grid = Vec<Vec<Complex64>>;

/// Routing mask in predicate form: `mask(i, j)` tells whether entry
/// `(i, j)` of the underlying 0-1 matrix is set.
pub type MaskFn<'a> = &'a dyn Fn(usize, usize) -> bool;

/// Parameters of one generalized filtering stage in index form.
#[derive(Debug, Clone, Copy)]
pub struct ScalarStageParams {
    /// Number of subchannels M.
    pub channels: usize,
    /// Upsampling factor L.
    pub up: usize,
    /// Downsampling factor Q.
    pub down: usize,
    /// Circular period of the filtering.
    pub period: usize,
    /// Time offset o applied during upsampling.
    pub time_offset: usize,
    /// Decimation offset a.
    pub sample_offset: usize,
    /// Conjugate the modulation (negate the phase ramp).
    pub conjugated: bool,
    /// Apply the causal phase correction for the filter group delay.
    pub causal: bool,
}

fn cis_turns(numerator: i64, denominator: usize) -> Complex64 {
    Complex64::cis(TAU * numerator as f64 / denominator as f64)
}

fn div_ceil_i64(a: i64, b: i64) -> i64 {
    (a + b - 1).div_euclid(b)
}

/// One generalized filtering stage, written directly from the defining
/// summation: for output sample `n = Q·r + a` of subchannel `m`,
///
/// ```text
/// y[r][m] = c_m · Σ_u  h_m[τ(u)] · e^{±2πj·m·τ(u)/M} · x[u][m],
/// τ(u)    = mod(n − o − L·u, N_c),
/// ```
///
/// where `u` ranges over exactly the indices for which the wrapped filter
/// argument `τ` lands inside the filter support, i.e.
/// `u ∈ [⌈(mod(n−o,N_c) − K₀ + 1)/L⌉, ⌊mod(n−o,N_c)/L⌋]` clipped to the
/// input rows, and the phase attaches to the wrapped index. `c_m` is the
/// causal correction `e^{−πj·m·(K₀−1)/M}` when enabled. The exponent sign
/// flips when `conjugated` is set. One filter per subchannel is accepted,
/// with the stage bounds computed from each filter's own length.
pub fn scalar_stage(
    input: &Grid,
    filters: &[Vec<Complex64>],
    p: &ScalarStageParams,
) -> Grid {
    assert_eq!(filters.len(), p.channels, "one filter per subchannel");
    let n_s = input.len();
    let n_out = p.period / p.down;
    let sign: i64 = if p.conjugated { -1 } else { 1 };
    let mut out = vec![vec![Complex64::new(0.0, 0.0); p.channels]; n_out];
    for (r, row) in out.iter_mut().enumerate() {
        let n = p.down * r + p.sample_offset;
        let tau_n = (n as i64 - p.time_offset as i64).rem_euclid(p.period as i64);
        for (m, slot) in row.iter_mut().enumerate() {
            let taps = &filters[m];
            let k0 = taps.len() as i64;
            if k0 == 0 {
                continue;
            }
            let lo = div_ceil_i64(tau_n - k0 + 1, p.up as i64).max(0);
            let hi = (tau_n.div_euclid(p.up as i64)).min(n_s as i64 - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut u = lo;
            while u <= hi {
                let tau = (tau_n - p.up as i64 * u) as usize;
                let numerator = sign * ((m * tau) % p.channels) as i64;
                acc += taps[tau] * cis_turns(numerator, p.channels) * input[u as usize][m];
                u += 1;
            }
            let correction = if p.causal && k0 > 1 {
                let numerator = (m * (k0 as usize - 1)) % (2 * p.channels);
                Complex64::cis(-PI * numerator as f64 / p.channels as f64)
            } else {
                Complex64::new(1.0, 0.0)
            };
            *slot = acc * correction;
        }
    }
    out
}

/// Guard-interval insertion in index form: output row `n` of the extended
/// block (indexed from the start of the zero prefix) is
///
/// - zero inside the zero prefix and zero suffix ranges,
/// - `x[mod(n − n_zp − n_cp, core)]` inside the cyclic prefix, cyclic
///   suffix, and core ranges.
pub fn scalar_extend(input: &Grid, n_zp: usize, n_cp: usize, n_cs: usize, n_zs: usize) -> Grid {
    let core = input.len() as i64;
    let cols = input.first().map_or(0, Vec::len);
    let total = n_zp + n_cp + input.len() + n_cs + n_zs;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); cols]; total];
    for (n, row) in out.iter_mut().enumerate() {
        if n < n_zp || n >= total - n_zs {
            continue;
        }
        let src = (n as i64 - (n_zp + n_cp) as i64).rem_euclid(core) as usize;
        row.clone_from(&input[src]);
    }
    out
}

/// Subchannel routing in index form: data column `m` lands on filter bank
/// branch `targets[m]`; unassigned branches stay zero.
pub fn scalar_route(input: &Grid, targets: &[usize], branches: usize) -> Grid {
    let mut out = vec![vec![Complex64::new(0.0, 0.0); branches]; input.len()];
    for (row_in, row_out) in input.iter().zip(out.iter_mut()) {
        for (m, &v) in row_in.iter().enumerate() {
            row_out[targets[m]] = v;
        }
    }
    out
}

/// Per-sample window: `y[n][m] = w[n] · x[n][m]`, with `w` implicitly
/// extended by zeros when shorter than the block and treated as all ones
/// when empty.
pub fn scalar_window(input: &Grid, window: &[Complex64]) -> Grid {
    if window.is_empty() {
        return input.clone();
    }
    input
        .iter()
        .enumerate()
        .map(|(n, row)| {
            let w = window.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0));
            row.iter().map(|&v| w * v).collect()
        })
        .collect()
}

/// Subchannel multiplexing in index form. The plain path forms
/// `r[n][m₂] = Σ_{m₁} y[n][m₁] · E²[m₁][m₂]`; the transpose path then
/// redistributes the result over time as
/// `r'[i][j] = Σ_k r[k][i] · E³[k][j]`, turning the former column index
/// into the new time axis.
pub fn scalar_multiplex(
    input: &Grid,
    e2: MaskFn<'_>,
    e2_cols: usize,
    e3: Option<(MaskFn<'_>, usize)>,
) -> Grid {
    let m1 = input.first().map_or(0, Vec::len);
    let mut routed = vec![vec![Complex64::new(0.0, 0.0); e2_cols]; input.len()];
    for (n, row) in input.iter().enumerate() {
        for (m2, slot) in routed[n].iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, &v) in row.iter().enumerate().take(m1) {
                if e2(c, m2) {
                    acc += v;
                }
            }
            *slot = acc;
        }
    }
    match e3 {
        None => routed,
        Some((mask, cols)) => {
            let mut out = vec![vec![Complex64::new(0.0, 0.0); cols]; e2_cols];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, routed_row) in routed.iter().enumerate() {
                        if mask(k, j) {
                            acc += routed_row[i];
                        }
                    }
                    *slot = acc;
                }
            }
            out
        }
    }
}

fn grid_of(mat: &Mat) -> Grid {
    (0..mat.rows())
        .map(|n| (0..mat.cols()).map(|m| mat[(n, m)]).collect())
        .collect()
}

/// One frame of one stream through the whole pipeline in index form.
/// `stage1_filters`, when given, supplies one filter per bank branch for
/// the first stage (the engine only models a shared prototype; the
/// reference accepts the general form).
pub fn scalar_frame(
    cfg: &ModulatorConfig,
    frame: &DataFrame,
    stage1_filters: Option<&[Vec<Complex64>]>,
) -> Vec<Vec<Complex64>> {
    let uniform1 = vec![cfg.stage1.h.clone(); cfg.stage1.m];
    let filters1: &[Vec<Complex64>] = match stage1_filters {
        Some(f) => f,
        None => &uniform1,
    };
    let filters2 = vec![cfg.stage2.h.clone(); cfg.stage2.m];

    let mut per_stream: Vec<Vec<Complex64>> = Vec::with_capacity(cfg.p);
    for p in 0..cfg.p {
        let x = grid_of(&frame.streams[p]);
        let x = scalar_extend(&x, cfg.tier1.n_zp, cfg.tier1.n_cp, cfg.tier1.n_cs, cfg.tier1.n_zs);
        let x = scalar_route(&x, &cfg.e, cfg.stage1.m);
        let x = scalar_stage(
            &x,
            filters1,
            &ScalarStageParams {
                channels: cfg.stage1.m,
                up: cfg.stage1.l,
                down: cfg.stage1.q,
                period: cfg.stage1.n_c,
                time_offset: cfg.stage1.o[p],
                sample_offset: cfg.stage1.a[p],
                conjugated: cfg.stage1.b_conj,
                causal: cfg.stage1.b_cas,
            },
        );
        let x = scalar_extend(&x, cfg.tier2.n_zp, cfg.tier2.n_cp, cfg.tier2.n_cs, cfg.tier2.n_zs);
        let x = scalar_window(&x, &cfg.window);
        let e2 = &cfg.e2;
        let x = match (cfg.b_tran, cfg.e3.as_ref()) {
            (false, _) => scalar_multiplex(&x, &|i, j| e2.entry(i, j), e2.cols(), None),
            (true, Some(e3)) => scalar_multiplex(
                &x,
                &|i, j| e2.entry(i, j),
                e2.cols(),
                Some((&|i, j| e3.entry(i, j), e3.cols())),
            ),
            (true, None) => panic!("transpose multiplexing requires the redistribution mask"),
        };
        let x = scalar_stage(
            &x,
            &filters2,
            &ScalarStageParams {
                channels: cfg.stage2.m,
                up: cfg.stage2.l,
                down: cfg.stage2.q,
                period: cfg.stage2.n_c,
                time_offset: cfg.stage2.o[p],
                sample_offset: cfg.stage2.a[p],
                conjugated: cfg.stage2.b_conj,
                causal: cfg.stage2.b_cas,
            },
        );
        let x = scalar_extend(&x, cfg.tier3.n_zp, cfg.tier3.n_cp, cfg.tier3.n_cs, cfg.tier3.n_zs);
        per_stream.push(x.iter().map(|row| row.iter().sum()).collect());
    }

    let frame_len = per_stream[0].len();
    match &cfg.e4 {
        StreamCombiner::Identity => per_stream,
        StreamCombiner::SumStreams => {
            let mut sum = vec![Complex64::new(0.0, 0.0); frame_len];
            for s in &per_stream {
                for (acc, &v) in sum.iter_mut().zip(s) {
                    *acc += v;
                }
            }
            vec![sum]
        }
        StreamCombiner::Explicit(mask) => {
            let k = mask.rows() / frame_len;
            let mut out = vec![vec![Complex64::new(0.0, 0.0); frame_len]; k];
            for (out_k, row_block) in out.iter_mut().enumerate() {
                for (t, slot) in row_block.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (p, s) in per_stream.iter().enumerate() {
                        for (t2, &v) in s.iter().enumerate() {
                            if mask.entry(out_k * frame_len + t, p * frame_len + t2) {
                                acc += v;
                            }
                        }
                    }
                    *slot = acc;
                }
            }
            out
        }
    }
}

/// Whole-signal reference: every frame through `scalar_frame`, then
/// overlap-add at the configured stride. Returns one time vector per
/// combined output.
pub fn scalar_reference(
    cfg: &ModulatorConfig,
    frames: &[DataFrame],
) -> Result<Vec<Vec<Complex64>>, OracleError> {
    let dims = validate(cfg).map_err(|e| OracleError::InvalidConfig(e.to_string()))?;
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let stride = if frames.len() > 1 {
        dims.stride.ok_or(OracleError::MissingStride)?
    } else {
        0
    };
    let outputs = match &cfg.e4 {
        StreamCombiner::Identity => cfg.p,
        StreamCombiner::SumStreams => 1,
        StreamCombiner::Explicit(mask) => mask.rows() / dims.frame_len,
    };
    let total = (frames.len() - 1) * stride + dims.frame_len;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); total]; outputs];
    for (f, frame) in frames.iter().enumerate() {
        let contribution = scalar_frame(cfg, frame, None);
        for (k, signal) in contribution.iter().enumerate() {
            for (t, &v) in signal.iter().enumerate() {
                out[k][f * stride + t] += v;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Textbook references
// ---------------------------------------------------------------------------

/// Textbook cyclic-prefix OFDM symbol: unnormalized 128-point inverse DFT
/// of the subcarrier values, with the last 32 time samples copied in front.
pub fn ofdm_reference(symbols: &[Complex64]) -> Result<Vec<Complex64>, OracleError> {
    const CARRIERS: usize = 128;
    const PREFIX: usize = 32;
    if symbols.len() != CARRIERS {
        return Err(OracleError::ShapeMismatch {
            what: "OFDM subcarrier vector",
            got: symbols.len(),
            expected: CARRIERS,
        });
    }
    let mut core = vec![Complex64::new(0.0, 0.0); CARRIERS];
    for (t, slot) in core.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &s) in symbols.iter().enumerate() {
            acc += s * cis_turns(((t * m) % CARRIERS) as i64, CARRIERS);
        }
        *slot = acc;
    }
    let mut out = Vec::with_capacity(CARRIERS + PREFIX);
    out.extend_from_slice(&core[CARRIERS - PREFIX..]);
    out.extend_from_slice(&core);
    Ok(out)
}

/// Textbook SC-FDMA (DFT-spread OFDM) symbol: unnormalized 32-point DFT of
/// the data, mapped onto subcarriers 96..128 of a 128-point grid,
/// unnormalized inverse DFT back to time, cyclic prefix of 32.
pub fn scfdma_reference(symbols: &[Complex64]) -> Result<Vec<Complex64>, OracleError> {
    const DATA: usize = 32;
    const CARRIERS: usize = 128;
    const FIRST_BIN: usize = 96;
    const PREFIX: usize = 32;
    if symbols.len() != DATA {
        return Err(OracleError::ShapeMismatch {
            what: "SC-FDMA data vector",
            got: symbols.len(),
            expected: DATA,
        });
    }
    let mut spread = vec![Complex64::new(0.0, 0.0); DATA];
    for (k, slot) in spread.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, &s) in symbols.iter().enumerate() {
            acc += s * cis_turns(-(((k * u) % DATA) as i64), DATA);
        }
        *slot = acc;
    }
    let mut core = vec![Complex64::new(0.0, 0.0); CARRIERS];
    for (t, slot) in core.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &s) in spread.iter().enumerate() {
            let q = FIRST_BIN + k;
            acc += s * cis_turns(((t * q) % CARRIERS) as i64, CARRIERS);
        }
        *slot = acc;
    }
    let mut out = Vec::with_capacity(CARRIERS + PREFIX);
    out.extend_from_slice(&core[CARRIERS - PREFIX..]);
    out.extend_from_slice(&core);
    Ok(out)
}

/// Plain upsampled linear convolution: the input expanded by factor `up`
/// with `offset` leading zeros, convolved (linearly, no wrap) with the
/// taps. Output length `up·(len−1) + offset + taps.len()`. Circular
/// filtering over a sufficiently long period must reproduce this exactly,
/// with zeros beyond its support.
pub fn linear_convolution_reference(
    input: &[Complex64],
    taps: &[Complex64],
    up: usize,
    offset: usize,
) -> Vec<Complex64> {
    if input.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let len = up * (input.len() - 1) + offset + taps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (u, &x) in input.iter().enumerate() {
        let base = up * u + offset;
        for (t, &h) in taps.iter().enumerate() {
            out[base + t] += h * x;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Least-squares recovery
// ---------------------------------------------------------------------------

/// Result of solving `G·x ≈ y` in the least-squares sense.
#[derive(Debug, Clone)]
pub struct Recovery {
    /// The least-squares estimate of the input vector.
    pub estimate: Vec<Complex64>,
    /// Numerical rank of the matrix.
    pub rank: usize,
    /// Number of columns (the rank required for unique recovery).
    pub columns: usize,
}

fn svd_epsilon(max_singular: f64, rows: usize, cols: usize) -> f64 {
    max_singular * rows.max(cols) as f64 * f64::EPSILON
}

/// Recovers the stacked input vector from a waveform via the pseudoinverse
/// of the composite modulation matrix. Fails when the matrix lacks full
/// column rank, since the inputs are then not identifiable.
pub fn least_squares_recover(g: &Mat, waveform: &[Complex64]) -> Result<Recovery, OracleError> {
    if waveform.len() != g.rows() {
        return Err(OracleError::ShapeMismatch {
            what: "waveform",
            got: waveform.len(),
            expected: g.rows(),
        });
    }
    let a = nalgebra::DMatrix::from_fn(g.rows(), g.cols(), |i, j| g[(i, j)]);
    let b = nalgebra::DVector::from_iterator(waveform.len(), waveform.iter().copied());
    let svd = a.svd(true, true);
    let eps = svd_epsilon(svd.singular_values.max(), g.rows(), g.cols());
    let rank = svd.rank(eps);
    if rank < g.cols() {
        return Err(OracleError::RankDeficient { rank, columns: g.cols() });
    }
    let solution = svd.solve(&b, eps).expect("SVD solve with computed factors");
    Ok(Recovery {
        estimate: solution.iter().copied().collect(),
        rank,
        columns: g.cols(),
    })
}

/// Real-valued variant for systems whose unknowns are real (for example
/// amplitude recovery through a fixed per-slot phase pattern): solves the
/// row-major `rows × cols` system in the least-squares sense and reports
/// the numerical rank. Fails when the matrix lacks full column rank.
pub fn least_squares_recover_real(
    rows: usize,
    cols: usize,
    matrix: &[f64],
    rhs: &[f64],
) -> Result<(Vec<f64>, usize), OracleError> {
    if matrix.len() != rows * cols {
        return Err(OracleError::ShapeMismatch {
            what: "matrix storage",
            got: matrix.len(),
            expected: rows * cols,
        });
    }
    if rhs.len() != rows {
        return Err(OracleError::ShapeMismatch {
            what: "right-hand side",
            got: rhs.len(),
            expected: rows,
        });
    }
    let a = nalgebra::DMatrix::from_row_slice(rows, cols, matrix);
    let b = nalgebra::DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let eps = svd_epsilon(svd.singular_values.max(), rows, cols);
    let rank = svd.rank(eps);
    if rank < cols {
        return Err(OracleError::RankDeficient { rank, columns: cols });
    }
    let solution = svd.solve(&b, eps).expect("SVD solve with computed factors");
    Ok((solution.iter().copied().collect(), rank))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
