//! Builders for the structured linear operators of the modulation chain.
//!
//! Every block of the synthesis pipeline is a matrix with a closed-form
//! entry rule: cyclic extensions stack identity sub-blocks, rate changers
//! place a single one per column or row, the filter is a circulant, and the
//! subchannel modulation is a DFT-like exponential grid. Each builder
//! validates its parameters and returns an [`OperatorMatrix`] that knows its
//! own entry rule, so callers can either materialize it densely or apply it
//! through the structure without ever forming the matrix.
//!
//! All indices are 0-based throughout.

use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::mat::{Mat, Mat01};

// --- errors -----------------------------------------------------------

/// Parameter rejection from an operator builder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorError {
    /// Cyclic prefix longer than the frame it copies from.
    PrefixTooLong { n_cp: usize, n_core: usize },
    /// Cyclic suffix longer than the frame it copies from.
    SuffixTooLong { n_cs: usize, n_core: usize },
    /// Up- or downsampling factor must be at least one.
    ZeroFactor,
    /// Sample offset must be smaller than the rate-change factor.
    OffsetOutOfRange { offset: usize, factor: usize },
    /// Circular period shorter than the signal it must hold; part of the
    /// signal would be folded onto itself and lost.
    InformationLoss { period: usize, needed: usize },
    /// Filter has no coefficients.
    EmptyFilter,
    /// Filter longer than the circular period wraps onto itself.
    FilterTooLong { taps: usize, period: usize },
    /// Window longer than the frame it multiplies.
    WindowTooLong { len: usize, target: usize },
    /// Routing target outside the filter bank.
    ChannelOutOfRange { index: usize, channels: usize },
    /// Two data subchannels routed into the same filter channel.
    DuplicateChannel { index: usize },
    /// Empty dimension where at least one element is required.
    EmptyDimension,
}

impl fmt::Display for OperatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorError::PrefixTooLong { n_cp, n_core } => {
                write!(f, "cyclic prefix length {n_cp} exceeds frame length {n_core}")
            }
            OperatorError::SuffixTooLong { n_cs, n_core } => {
                write!(f, "cyclic suffix length {n_cs} exceeds frame length {n_core}")
            }
            OperatorError::ZeroFactor => write!(f, "rate-change factor must be at least 1"),
            OperatorError::OffsetOutOfRange { offset, factor } => {
                write!(f, "sample offset {offset} must be smaller than factor {factor}")
            }
            OperatorError::InformationLoss { period, needed } => write!(
                f,
                "circular period {period} is shorter than the {needed}-sample signal: information loss"
            ),
            OperatorError::EmptyFilter => write!(f, "filter needs at least one coefficient"),
            OperatorError::FilterTooLong { taps, period } => write!(
                f,
                "{taps}-tap filter wraps onto itself within circular period {period}"
            ),
            OperatorError::WindowTooLong { len, target } => {
                write!(f, "window of {len} samples exceeds target length {target}")
            }
            OperatorError::ChannelOutOfRange { index, channels } => {
                write!(f, "subchannel index {index} outside filter bank of size {channels}")
            }
            OperatorError::DuplicateChannel { index } => {
                write!(f, "filter channel {index} assigned more than once")
            }
            OperatorError::EmptyDimension => write!(f, "dimension must be at least 1"),
        }
    }
}

impl core::error::Error for OperatorError {}

// --- operator matrix --------------------------------------------------

/// Which pipeline block a matrix implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorRole {
    CyclicExtension,
    Upsampler,
    ZeroStuffer,
    CirculantFilter,
    Modulation,
    Decimator,
    Window,
    Commutator,
    Multiplexer,
}

#[derive(Debug, Clone)]
enum Kind {
    Extension {
        n_zp: usize,
        n_cp: usize,
        n_core: usize,
        n_cs: usize,
    },
    Upsample {
        factor: usize,
        offset: usize,
    },
    ZeroStuff,
    Circulant {
        taps: Vec<Complex64>,
    },
    Modulate {
        conjugated: bool,
    },
    Decimate {
        factor: usize,
        offset: usize,
    },
    Window {
        diag: Vec<Complex64>,
    },
    Route {
        targets: Vec<usize>,
    },
    Mask(Mat01),
}

/// A structured matrix with a closed-form entry rule.
///
/// `entry` evaluates single elements, `to_dense` materializes the whole
/// matrix, and `apply_left`/`apply_right` multiply against a dense operand
/// using the structure directly. Tests hold the three views against each
/// other on every operator kind.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    role: OperatorRole,
    rows: usize,
    cols: usize,
    kind: Kind,
}

impl OperatorMatrix {
    pub fn role(&self) -> OperatorRole {
        self.role
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)` by the operator's defining index rule.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols, "index out of bounds");
        let one = Complex64::ONE;
        let zero = Complex64::ZERO;
        match &self.kind {
            Kind::Extension {
                n_zp,
                n_cp,
                n_core,
                n_cs,
            } => {
                // Stacked blocks: zeros, [0 | I] copying the frame tail,
                // the identity, [I | 0] copying the frame head, zeros.
                if i < *n_zp {
                    zero
                } else if i < n_zp + n_cp {
                    let r = i - n_zp;
                    if j == n_core - n_cp + r {
                        one
                    } else {
                        zero
                    }
                } else if i < n_zp + n_cp + n_core {
                    let r = i - n_zp - n_cp;
                    if j == r {
                        one
                    } else {
                        zero
                    }
                } else if i < n_zp + n_cp + n_core + n_cs {
                    let r = i - n_zp - n_cp - n_core;
                    if j == r {
                        one
                    } else {
                        zero
                    }
                } else {
                    zero
                }
            }
            Kind::Upsample { factor, offset } => {
                if i == factor * j + offset {
                    one
                } else {
                    zero
                }
            }
            Kind::ZeroStuff => {
                if i == j {
                    one
                } else {
                    zero
                }
            }
            Kind::Circulant { taps } => {
                let d = (i + self.rows - j) % self.rows;
                if d < taps.len() {
                    taps[d]
                } else {
                    zero
                }
            }
            Kind::Modulate { conjugated } => {
                // Reduce the phase in exact integer arithmetic before the
                // float division so large sample indices lose no precision.
                let sign = if *conjugated { -1.0 } else { 1.0 };
                let theta =
                    sign * core::f64::consts::TAU * ((i * j) % self.cols) as f64
                        / (self.cols as f64);
                Complex64::cis(theta)
            }
            Kind::Decimate { factor, offset } => {
                if j == factor * i + offset {
                    one
                } else {
                    zero
                }
            }
            Kind::Window { diag } => {
                if i == j {
                    diag[i]
                } else {
                    zero
                }
            }
            Kind::Route { targets } => {
                if j == targets[i] {
                    one
                } else {
                    zero
                }
            }
            Kind::Mask(m) => {
                if m.entry(i, j) {
                    one
                } else {
                    zero
                }
            }
        }
    }

    pub fn to_dense(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.entry(i, j))
    }

    /// Computes `self * x` through the operator structure.
    pub fn apply_left(&self, x: &Mat) -> Mat {
        assert_eq!(self.cols, x.rows(), "inner dimension mismatch");
        let w = x.cols();
        match &self.kind {
            Kind::Extension {
                n_zp,
                n_cp,
                n_core,
                n_cs,
            } => {
                let mut out = Mat::zeros(self.rows, w);
                for r in 0..*n_cp {
                    out.row_mut(n_zp + r).copy_from_slice(x.row(n_core - n_cp + r));
                }
                for r in 0..*n_core {
                    out.row_mut(n_zp + n_cp + r).copy_from_slice(x.row(r));
                }
                for r in 0..*n_cs {
                    out.row_mut(n_zp + n_cp + n_core + r).copy_from_slice(x.row(r));
                }
                out
            }
            Kind::Upsample { factor, offset } => {
                let mut out = Mat::zeros(self.rows, w);
                for u in 0..x.rows() {
                    out.row_mut(factor * u + offset).copy_from_slice(x.row(u));
                }
                out
            }
            Kind::ZeroStuff => {
                let mut out = Mat::zeros(self.rows, w);
                for i in 0..x.rows() {
                    out.row_mut(i).copy_from_slice(x.row(i));
                }
                out
            }
            Kind::Circulant { taps } => {
                let n = self.rows;
                let mut out = Mat::zeros(n, w);
                for j in 0..n {
                    let src = x.row(j);
                    if src.iter().all(|z| *z == Complex64::ZERO) {
                        continue;
                    }
                    for (d, &tap) in taps.iter().enumerate() {
                        let i = (j + d) % n;
                        let dst = out.row_mut(i);
                        for c in 0..w {
                            dst[c] += tap * src[c];
                        }
                    }
                }
                out
            }
            Kind::Decimate { factor, offset } => {
                let mut out = Mat::zeros(self.rows, w);
                for r in 0..self.rows {
                    out.row_mut(r).copy_from_slice(x.row(factor * r + offset));
                }
                out
            }
            Kind::Window { diag } => {
                let mut out = x.clone();
                for (i, &d) in diag.iter().enumerate() {
                    for z in out.row_mut(i) {
                        *z *= d;
                    }
                }
                out
            }
            Kind::Route { targets } => {
                let mut out = Mat::zeros(self.rows, w);
                for (r, &t) in targets.iter().enumerate() {
                    out.row_mut(r).copy_from_slice(x.row(t));
                }
                out
            }
            Kind::Mask(m) => {
                let mut out = Mat::zeros(self.rows, w);
                for (i, j) in m.ones() {
                    let src = x.row(j);
                    let dst = out.row_mut(i);
                    for c in 0..w {
                        dst[c] += src[c];
                    }
                }
                out
            }
            Kind::Modulate { .. } => {
                // The modulation grid has no sparsity to exploit; evaluate
                // the product entrywise.
                let mut out = Mat::zeros(self.rows, w);
                for i in 0..self.rows {
                    for k in 0..self.cols {
                        let a = self.entry(i, k);
                        let src = x.row(k);
                        let dst = out.row_mut(i);
                        for c in 0..w {
                            dst[c] += a * src[c];
                        }
                    }
                }
                out
            }
        }
    }

    /// Computes `x * self` through the operator structure.
    pub fn apply_right(&self, x: &Mat) -> Mat {
        assert_eq!(x.cols(), self.rows, "inner dimension mismatch");
        let h = x.rows();
        match &self.kind {
            Kind::Route { targets } => {
                let mut out = Mat::zeros(h, self.cols);
                for i in 0..h {
                    for (m, &t) in targets.iter().enumerate() {
                        out[(i, t)] = x[(i, m)];
                    }
                }
                out
            }
            Kind::Mask(m) => {
                let mut out = Mat::zeros(h, self.cols);
                for (i, j) in m.ones() {
                    for r in 0..h {
                        let v = x[(r, i)];
                        out[(r, j)] += v;
                    }
                }
                out
            }
            Kind::Window { diag } => {
                let mut out = x.clone();
                for r in 0..h {
                    for (j, z) in out.row_mut(r).iter_mut().enumerate() {
                        *z *= diag[j];
                    }
                }
                out
            }
            _ => {
                let mut out = Mat::zeros(h, self.cols);
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let a = self.entry(i, j);
                        if a == Complex64::ZERO {
                            continue;
                        }
                        for r in 0..h {
                            let v = x[(r, i)];
                            out[(r, j)] += a * v;
                        }
                    }
                }
                out
            }
        }
    }
}

// --- phase vector -----------------------------------------------------

/// Per-subchannel phase correction applied after the circular filter,
/// compensating the group delay a causal prototype introduces.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    entries: Vec<Complex64>,
}

impl PhaseVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, m: usize) -> Complex64 {
        self.entries[m]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Scales column `m` of `x` by entry `m` (right-multiplication by the
    /// diagonal matrix this vector represents).
    pub fn scale_cols(&self, x: &mut Mat) {
        assert_eq!(x.cols(), self.entries.len(), "column count mismatch");
        for i in 0..x.rows() {
            for (j, z) in x.row_mut(i).iter_mut().enumerate() {
                *z *= self.entries[j];
            }
        }
    }
}

// --- builders ---------------------------------------------------------

/// Cyclic extension: stacks a zero prefix, a cyclic prefix (copy of the
/// frame tail), the frame itself, a cyclic suffix (copy of the frame head),
/// and a zero suffix. Shape `(n_zp+n_cp+n_core+n_cs+n_zs) x n_core`.
pub fn build_cyclic_extension(
    n_zp: usize,
    n_cp: usize,
    n_core: usize,
    n_cs: usize,
    n_zs: usize,
) -> Result<OperatorMatrix, OperatorError> {
    if n_core == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    if n_cp > n_core {
        return Err(OperatorError::PrefixTooLong { n_cp, n_core });
    }
    if n_cs > n_core {
        return Err(OperatorError::SuffixTooLong { n_cs, n_core });
    }
    Ok(OperatorMatrix {
        role: OperatorRole::CyclicExtension,
        rows: n_zp + n_cp + n_core + n_cs + n_zs,
        cols: n_core,
        kind: Kind::Extension {
            n_zp,
            n_cp,
            n_core,
            n_cs,
        },
    })
}

/// Upsampler: input sample `u` lands on output row `factor*u + offset`,
/// zeros elsewhere. Shape `n_s*factor x n_s`.
pub fn build_upsampler(
    factor: usize,
    offset: usize,
    n_s: usize,
) -> Result<OperatorMatrix, OperatorError> {
    if factor == 0 {
        return Err(OperatorError::ZeroFactor);
    }
    if n_s == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    if offset >= factor {
        return Err(OperatorError::OffsetOutOfRange { offset, factor });
    }
    Ok(OperatorMatrix {
        role: OperatorRole::Upsampler,
        rows: n_s * factor,
        cols: n_s,
        kind: Kind::Upsample { factor, offset },
    })
}

/// Zero stuffer: pads the signal with trailing zeros up to the circular
/// period, `[I; 0]`. Shape `n_c x n_in`. Rejects `n_c < n_in`, where part
/// of the signal could not be represented inside one period.
pub fn build_zero_stuffer(n_c: usize, n_in: usize) -> Result<OperatorMatrix, OperatorError> {
    if n_in == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    if n_c < n_in {
        return Err(OperatorError::InformationLoss {
            period: n_c,
            needed: n_in,
        });
    }
    Ok(OperatorMatrix {
        role: OperatorRole::ZeroStuffer,
        rows: n_c,
        cols: n_in,
        kind: Kind::ZeroStuff,
    })
}

/// Circular convolution by `h` as the circulant matrix whose first column
/// is `h` zero-padded to the period. Shape `n_c x n_c`.
pub fn build_circulant_filter(
    h: &[Complex64],
    n_c: usize,
) -> Result<OperatorMatrix, OperatorError> {
    if h.is_empty() {
        return Err(OperatorError::EmptyFilter);
    }
    if h.len() > n_c {
        return Err(OperatorError::FilterTooLong {
            taps: h.len(),
            period: n_c,
        });
    }
    Ok(OperatorMatrix {
        role: OperatorRole::CirculantFilter,
        rows: n_c,
        cols: n_c,
        kind: Kind::Circulant { taps: h.to_vec() },
    })
}

/// DFT-like modulation grid: entry `(k, m) = exp(2*pi*j*k*m*s / m_ch)` with
/// `s = -1` when `conjugated`. The denominator is the channel count of the
/// stage, not the number of rows. Shape `n_c x m_ch`.
pub fn build_modulation_matrix(
    n_c: usize,
    m_ch: usize,
    conjugated: bool,
) -> Result<OperatorMatrix, OperatorError> {
    if n_c == 0 || m_ch == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    Ok(OperatorMatrix {
        role: OperatorRole::Modulation,
        rows: n_c,
        cols: m_ch,
        kind: Kind::Modulate { conjugated },
    })
}

/// Decimator: row `r` picks input sample `factor*r + offset`. Shape
/// `floor(n_c/factor) x n_c`.
pub fn build_decimator(
    factor: usize,
    offset: usize,
    n_c: usize,
) -> Result<OperatorMatrix, OperatorError> {
    if factor == 0 {
        return Err(OperatorError::ZeroFactor);
    }
    if n_c == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    if offset >= factor {
        return Err(OperatorError::OffsetOutOfRange { offset, factor });
    }
    Ok(OperatorMatrix {
        role: OperatorRole::Decimator,
        rows: n_c / factor,
        cols: n_c,
        kind: Kind::Decimate { factor, offset },
    })
}

/// Phase correction vector: entry `m = exp(-pi*j*m*(k0-1)*b / m_ch)` where
/// `b` is 1 when `causal` and 0 otherwise. All ones when the filter is a
/// single tap or the correction is disabled.
pub fn build_phase_vector(m_ch: usize, k0: usize, causal: bool) -> PhaseVector {
    assert!(m_ch >= 1 && k0 >= 1, "channel count and filter length must be at least 1");
    let entries = (0..m_ch)
        .map(|m| {
            if !causal {
                return Complex64::ONE;
            }
            // Reduce modulo the full turn (2*m_ch) in integers first.
            let num = (m * (k0 - 1)) % (2 * m_ch);
            Complex64::cis(-core::f64::consts::PI * num as f64 / m_ch as f64)
        })
        .collect();
    PhaseVector { entries }
}

/// Time-domain window as a diagonal matrix, zero-padded to the target
/// length when `w` is shorter. Shape `n_target x n_target`.
pub fn build_window(w: &[Complex64], n_target: usize) -> Result<OperatorMatrix, OperatorError> {
    if n_target == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    if w.len() > n_target {
        return Err(OperatorError::WindowTooLong {
            len: w.len(),
            target: n_target,
        });
    }
    let mut diag = w.to_vec();
    diag.resize(n_target, Complex64::ZERO);
    Ok(OperatorMatrix {
        role: OperatorRole::Window,
        rows: n_target,
        cols: n_target,
        kind: Kind::Window { diag },
    })
}

/// Commutator routing data subchannel `m` into filter channel `e[m]`: row
/// `m` has its single one at column `e[m]`. Entries must be distinct and
/// inside the bank. Shape `len(e) x m_ch`.
pub fn build_commutator(e: &[usize], m_ch: usize) -> Result<OperatorMatrix, OperatorError> {
    if e.is_empty() || m_ch == 0 {
        return Err(OperatorError::EmptyDimension);
    }
    let mut seen = alloc::vec![false; m_ch];
    for &t in e {
        if t >= m_ch {
            return Err(OperatorError::ChannelOutOfRange {
                index: t,
                channels: m_ch,
            });
        }
        if seen[t] {
            return Err(OperatorError::DuplicateChannel { index: t });
        }
        seen[t] = true;
    }
    Ok(OperatorMatrix {
        role: OperatorRole::Commutator,
        rows: e.len(),
        cols: m_ch,
        kind: Kind::Route { targets: e.to_vec() },
    })
}

/// Wraps a 0-1 routing mask (subchannel multiplexer or stream combiner) as
/// an operator.
pub fn multiplexer(mask: Mat01) -> OperatorMatrix {
    OperatorMatrix {
        role: OperatorRole::Multiplexer,
        rows: mask.rows(),
        cols: mask.cols(),
        kind: Kind::Mask(mask),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn assert_rows(m: &OperatorMatrix, rows: &[&[f64]]) {
        assert_eq!(m.rows(), rows.len());
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(m.cols(), r.len());
            for (j, &v) in r.iter().enumerate() {
                assert_eq!(m.entry(i, j), re(v), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn test_cyclic_extension_identity_when_all_zero() {
        let m = build_cyclic_extension(0, 0, 4, 0, 0).unwrap();
        assert_eq!(m.to_dense(), Mat::identity(4));
    }

    #[test]
    fn test_cyclic_extension_prefix_and_suffix_rows() {
        let m = build_cyclic_extension(0, 1, 3, 1, 0).unwrap();
        assert_rows(
            &m,
            &[
                &[0.0, 0.0, 1.0],
                &[1.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0],
                &[1.0, 0.0, 0.0],
            ],
        );
    }

    #[test]
    fn test_cyclic_extension_quarter_prefix_blocks() {
        let m = build_cyclic_extension(0, 32, 128, 0, 0).unwrap();
        assert_eq!((m.rows(), m.cols()), (160, 128));
        // Prefix block copies the last 32 frame rows.
        for r in 0..32 {
            for j in 0..128 {
                let expect = if j == 96 + r { 1.0 } else { 0.0 };
                assert_eq!(m.entry(r, j), re(expect));
            }
        }
        // Identity block below it.
        for r in 0..128 {
            for j in 0..128 {
                let expect = if j == r { 1.0 } else { 0.0 };
                assert_eq!(m.entry(32 + r, j), re(expect));
            }
        }
    }

    #[test]
    fn test_cyclic_extension_rejects_long_prefix() {
        assert_eq!(
            build_cyclic_extension(0, 4, 3, 0, 0).unwrap_err(),
            OperatorError::PrefixTooLong { n_cp: 4, n_core: 3 }
        );
        assert_eq!(
            build_cyclic_extension(0, 0, 3, 5, 0).unwrap_err(),
            OperatorError::SuffixTooLong { n_cs: 5, n_core: 3 }
        );
    }

    #[test]
    fn test_upsampler_identity_and_placement() {
        assert_eq!(build_upsampler(1, 0, 3).unwrap().to_dense(), Mat::identity(3));
        let m = build_upsampler(2, 0, 2).unwrap();
        assert_rows(&m, &[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
    }

    #[test]
    fn test_upsampler_half_symbol_offset() {
        let m = build_upsampler(32, 16, 200).unwrap();
        assert_eq!((m.rows(), m.cols()), (6400, 200));
        for u in 0..200 {
            assert_eq!(m.entry(32 * u + 16, u), re(1.0));
        }
        // Each column holds exactly one 1.
        let dense = m.to_dense();
        for j in 0..200 {
            let count = (0..6400).filter(|&i| dense[(i, j)] != Complex64::ZERO).count();
            assert_eq!(count, 1);
        }
    }

    #[test]
    fn test_upsampler_rejects_offset_at_factor() {
        assert_eq!(
            build_upsampler(4, 4, 8).unwrap_err(),
            OperatorError::OffsetOutOfRange { offset: 4, factor: 4 }
        );
    }

    #[test]
    fn test_zero_stuffer_pads_below() {
        assert_eq!(build_zero_stuffer(4, 4).unwrap().to_dense(), Mat::identity(4));
        let m = build_zero_stuffer(6, 4).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 4));
        for i in 0..6 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(m.entry(i, j), re(expect));
            }
        }
    }

    #[test]
    fn test_zero_stuffer_rejects_short_period() {
        assert_eq!(
            build_zero_stuffer(3, 4).unwrap_err(),
            OperatorError::InformationLoss { period: 3, needed: 4 }
        );
    }

    #[test]
    fn test_circulant_delta_is_identity() {
        let m = build_circulant_filter(&[Complex64::ONE], 5).unwrap();
        assert_eq!(m.to_dense(), Mat::identity(5));
    }

    #[test]
    fn test_circulant_two_taps() {
        let m = build_circulant_filter(&[re(1.0), re(1.0)], 3).unwrap();
        assert_rows(&m, &[&[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
    }

    #[test]
    fn test_circulant_entry_rule_rectangular() {
        let h: Vec<Complex64> = (0..128).map(|_| Complex64::ONE).collect();
        let m = build_circulant_filter(&h, 128).unwrap();
        for &(i, j) in &[(0usize, 0usize), (5, 77), (127, 1), (64, 64)] {
            assert_eq!(m.entry(i, j), re(1.0));
        }
    }

    #[test]
    fn test_circulant_rejects_long_filter() {
        let h = vec![Complex64::ONE; 5];
        assert_eq!(
            build_circulant_filter(&h, 4).unwrap_err(),
            OperatorError::FilterTooLong { taps: 5, period: 4 }
        );
    }

    #[test]
    fn test_modulation_single_channel_all_ones() {
        let m = build_modulation_matrix(5, 1, false).unwrap();
        for i in 0..5 {
            assert!((m.entry(i, 0) - re(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn test_modulation_square_roots_of_unity() {
        let m = build_modulation_matrix(2, 2, false).unwrap();
        assert!((m.entry(0, 0) - re(1.0)).norm() < 1e-15);
        assert!((m.entry(0, 1) - re(1.0)).norm() < 1e-15);
        assert!((m.entry(1, 0) - re(1.0)).norm() < 1e-15);
        assert!((m.entry(1, 1) - re(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn test_modulation_conjugation_flag() {
        let plain = build_modulation_matrix(6, 3, false).unwrap();
        let conj = build_modulation_matrix(6, 3, true).unwrap();
        assert!(conj.to_dense().max_abs_diff(&plain.to_dense().conj()) < 1e-15);
    }

    #[test]
    fn test_decimator_identity_and_offset() {
        assert_eq!(build_decimator(1, 0, 5).unwrap().to_dense(), Mat::identity(5));
        let m = build_decimator(2, 1, 4).unwrap();
        assert_rows(&m, &[&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
    }

    #[test]
    fn test_phase_vector_flat_cases() {
        for (m_ch, k0, causal) in [(4, 7, false), (4, 1, true)] {
            let c = build_phase_vector(m_ch, k0, causal);
            for m in 0..m_ch {
                assert!((c.entry(m) - re(1.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn test_phase_vector_wraps_to_unity_for_full_length_filter() {
        // With 129 taps on 32 channels the exponent is a multiple of 2*pi
        // for every channel, so the correction degenerates to all ones.
        let c = build_phase_vector(32, 129, true);
        for m in 0..32 {
            assert!((c.entry(m) - re(1.0)).norm() < 1e-12, "entry {m}");
        }
    }

    #[test]
    fn test_phase_vector_matches_exponent_formula() {
        let c = build_phase_vector(8, 5, true);
        for m in 0..8 {
            let theta = -core::f64::consts::PI * (m as f64) * 4.0 / 8.0;
            assert!((c.entry(m) - Complex64::cis(theta)).norm() < 1e-15);
        }
    }

    #[test]
    fn test_window_identity_and_padding() {
        let ones = vec![Complex64::ONE; 5];
        assert_eq!(build_window(&ones, 5).unwrap().to_dense(), Mat::identity(5));

        let m = build_window(&ones[..3], 5).unwrap();
        let mut expect = Mat::zeros(5, 5);
        for i in 0..3 {
            expect[(i, i)] = Complex64::ONE;
        }
        assert_eq!(m.to_dense(), expect);
    }

    #[test]
    fn test_window_rejects_overlong() {
        let w = vec![Complex64::ONE; 6];
        assert_eq!(
            build_window(&w, 5).unwrap_err(),
            OperatorError::WindowTooLong { len: 6, target: 5 }
        );
    }

    #[test]
    fn test_commutator_identity_permutation_single() {
        let e: Vec<usize> = (0..32).collect();
        assert_eq!(build_commutator(&e, 32).unwrap().to_dense(), Mat::identity(32));

        let m = build_commutator(&[2, 0], 3).unwrap();
        assert_rows(&m, &[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);

        let m = build_commutator(&[5], 8).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 8));
        for j in 0..8 {
            let expect = if j == 5 { 1.0 } else { 0.0 };
            assert_eq!(m.entry(0, j), re(expect));
        }
    }

    #[test]
    fn test_commutator_rejects_bad_routing() {
        assert_eq!(
            build_commutator(&[3], 3).unwrap_err(),
            OperatorError::ChannelOutOfRange { index: 3, channels: 3 }
        );
        assert_eq!(
            build_commutator(&[1, 1], 3).unwrap_err(),
            OperatorError::DuplicateChannel { index: 1 }
        );
    }

    #[test]
    fn test_multiplexer_wraps_mask() {
        let mask = Mat01::from_flat(2, 2, &[1, 1, 0, 1]).unwrap();
        let m = multiplexer(mask.clone());
        assert_eq!(m.to_dense(), mask.to_mat());
        assert_eq!(m.role(), OperatorRole::Multiplexer);
    }
}
