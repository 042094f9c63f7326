//! Ready-made configurations for three classic waveforms: cyclic-prefix
//! OFDM, FBMC-OQAM, and SC-FDMA.
//!
//! Each preset is one parameterization of the same pipeline: they differ
//! only in the configuration values, not in code paths. The FBMC preset
//! additionally carries the offset-QAM input mapping, which splits each
//! complex symbol into two real-carrying half-symbol streams.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::config::{ExtensionSpec, ModulatorConfig, StageSpec, StreamCombiner};
use crate::engine::Modulator;
use crate::frame::DataFrame;
use crate::mat::{Mat, Mat01};

// --- the default FBMC prototype ----------------------------------------

/// Frequency-domain gains of the default prototype filter (overlap factor
/// 4). These four numbers are the data defining the filter; everything
/// else is the standard frequency-sampling expansion.
pub const PROTOTYPE_GAINS: [f64; 4] = [
    1.0,
    0.971960,
    core::f64::consts::FRAC_1_SQRT_2,
    0.235147,
];

/// Expands [`PROTOTYPE_GAINS`] into time-domain coefficients for a bank of
/// `m` subchannels: length `4*m + 1`, with
/// `h[n] = G0 + 2 * sum_k (-1)^k * Gk * cos(2*pi*k*n / (4*m))`.
pub fn default_prototype(m: usize) -> Vec<f64> {
    assert!(m >= 1);
    let span = 4 * m;
    (0..=span)
        .map(|n| {
            let mut acc = PROTOTYPE_GAINS[0];
            for (k, &g) in PROTOTYPE_GAINS.iter().enumerate().skip(1) {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                let arg = core::f64::consts::TAU * (k * n) as f64 / span as f64;
                acc += 2.0 * sign * g * Float::cos(arg);
            }
            acc
        })
        .collect()
}

// --- preset plumbing ----------------------------------------------------

/// How flat complex symbols become per-stream data grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMapper {
    /// Symbols fill the streams directly.
    Identity,
    /// Each complex symbol splits into real and imaginary halves staggered
    /// across two streams ([`oqam_map`]).
    OqamStagger,
}

/// A named, validated configuration plus its input convention.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub config: ModulatorConfig,
    pub input_mapper: InputMapper,
}

impl Preset {
    /// Builds the modulator; preset configurations always validate.
    pub fn modulator(&self) -> Modulator {
        Modulator::new(self.config.clone()).expect("preset configuration validates")
    }

    /// Symbols consumed per frame: one grid entry per slot for the
    /// identity mapping, one complex symbol per (time, subchannel) cell
    /// for the OQAM stagger (which fans out to both streams).
    pub fn symbols_per_frame(&self) -> usize {
        match self.input_mapper {
            InputMapper::Identity => self.config.p * self.config.n * self.config.m_prime,
            InputMapper::OqamStagger => self.config.n * self.config.m_prime,
        }
    }

    /// Frames a flat symbol sequence according to the preset's input
    /// mapping, zero-padding the final frame.
    pub fn frames(&self, symbols: &[Complex64]) -> Vec<DataFrame> {
        match self.input_mapper {
            InputMapper::Identity => crate::frame::frame_input(
                symbols,
                self.config.n,
                self.config.m_prime,
                self.config.p,
            ),
            InputMapper::OqamStagger => {
                let per = self.config.n * self.config.m_prime;
                if symbols.is_empty() {
                    return Vec::new();
                }
                symbols
                    .chunks(per)
                    .enumerate()
                    .map(|(index, chunk)| {
                        let grid = Mat::from_fn(self.config.n, self.config.m_prime, |i, j| {
                            chunk
                                .get(i * self.config.m_prime + j)
                                .copied()
                                .unwrap_or(Complex64::ZERO)
                        });
                        let [s0, s1] = oqam_map(&grid);
                        DataFrame {
                            index,
                            streams: vec![s0, s1],
                        }
                    })
                    .collect()
            }
        }
    }
}

fn identity_routing(m: usize) -> Vec<usize> {
    (0..m).collect()
}

fn rect_taps(len: usize) -> Vec<Complex64> {
    vec![Complex64::ONE; len]
}

fn ones_window(len: usize) -> Vec<Complex64> {
    vec![Complex64::ONE; len]
}

fn delta_stage(m: usize, n_c: usize, streams: usize) -> StageSpec {
    StageSpec {
        m,
        l: 1,
        q: 1,
        h: vec![Complex64::ONE],
        n_c,
        o: vec![0; streams],
        a: vec![0; streams],
        b_conj: false,
        b_cas: false,
    }
}

// --- the three presets --------------------------------------------------

/// Cyclic-prefix OFDM: 128 fully loaded subcarriers, one symbol per
/// frame, quarter-length cyclic prefix. Output is 160 samples per frame.
pub fn preset_ofdm() -> Preset {
    let m1 = 128;
    let extended = m1 + m1 / 4;
    let config = ModulatorConfig {
        n: 1,
        m_prime: m1,
        p: 1,
        e: identity_routing(m1),
        tier1: ExtensionSpec::NONE,
        stage1: StageSpec {
            m: m1,
            l: m1,
            q: 1,
            h: rect_taps(m1),
            n_c: m1,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: false,
        },
        tier2: ExtensionSpec {
            n_zp: 0,
            n_cp: m1 / 4,
            n_cs: 0,
            n_zs: 0,
        },
        window: ones_window(extended),
        e2: Mat01::ones_column(m1),
        e3: None,
        b_tran: false,
        stage2: delta_stage(1, extended, 1),
        tier3: ExtensionSpec::NONE,
        k: 1,
        e4: StreamCombiner::Identity,
    };
    Preset {
        name: "cp-ofdm",
        config,
        input_mapper: InputMapper::Identity,
    }
}

/// SC-FDMA occupying the top quarter of a 128-subcarrier grid: a
/// 32-channel conjugated (analysis) stage spreads each block, the
/// transpose multiplexer places the spread values on subcarriers 96..128,
/// and a 128-channel synthesis stage with a 32-sample cyclic prefix
/// produces 160 samples per frame.
pub fn preset_scfdma() -> Preset {
    let m1 = 32;
    let m2 = 128;
    let config = ModulatorConfig {
        n: 1,
        m_prime: m1,
        p: 1,
        e: identity_routing(m1),
        tier1: ExtensionSpec::NONE,
        stage1: StageSpec {
            m: m1,
            l: m1,
            q: 1,
            h: rect_taps(m1),
            n_c: m1,
            o: vec![0],
            a: vec![0],
            b_conj: true,
            b_cas: false,
        },
        tier2: ExtensionSpec::NONE,
        window: ones_window(m1),
        e2: Mat01::ones_column(m1),
        e3: Some(Mat01::from_fn(m1, m2, |i, j| j == (m2 - m1) + i)),
        b_tran: true,
        stage2: StageSpec {
            m: m2,
            l: m2,
            q: 1,
            h: rect_taps(m2),
            n_c: m2,
            o: vec![0],
            a: vec![0],
            b_conj: false,
            b_cas: false,
        },
        tier3: ExtensionSpec {
            n_zp: 0,
            n_cp: m2 / 4,
            n_cs: 0,
            n_zs: 0,
        },
        k: 1,
        e4: StreamCombiner::Identity,
    };
    Preset {
        name: "sc-fdma",
        config,
        input_mapper: InputMapper::Identity,
    }
}

/// FBMC-OQAM at full scale: 32 subchannels, 200 half-symbols per frame,
/// two staggered streams offset by half a symbol period, causal phase
/// correction on, linear-regime circular period.
pub fn preset_fbmc_oqam(prototype: &[f64]) -> Preset {
    preset_fbmc_oqam_sized(32, 200, prototype)
}

/// FBMC-OQAM with adjustable bank size and frame duration. `m1` must be
/// even (the second stream rides at a half-symbol offset `m1/2`); the
/// circular period is the smallest multiple of `m1` at which circular
/// filtering of the offset, upsampled frame coincides with linear
/// filtering: `l*n + k0 - l + m1/2` rounded up.
pub fn preset_fbmc_oqam_sized(m1: usize, n: usize, prototype: &[f64]) -> Preset {
    assert!(m1 >= 2 && m1.is_multiple_of(2), "subchannel count must be even");
    assert!(n >= 1 && !prototype.is_empty());
    let k0 = prototype.len();
    let half = m1 / 2;
    let needed = m1 * n + k0 - m1 + half;
    let n_c = needed.div_ceil(m1) * m1;
    let taps: Vec<Complex64> = prototype.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let config = ModulatorConfig {
        n,
        m_prime: m1,
        p: 2,
        e: identity_routing(m1),
        tier1: ExtensionSpec::NONE,
        stage1: StageSpec {
            m: m1,
            l: m1,
            q: 1,
            h: taps,
            n_c,
            o: vec![0, half],
            a: vec![0, 0],
            b_conj: false,
            b_cas: true,
        },
        tier2: ExtensionSpec::NONE,
        window: ones_window(n_c),
        e2: Mat01::ones_column(m1),
        e3: None,
        b_tran: false,
        stage2: delta_stage(1, n_c, 2),
        tier3: ExtensionSpec::NONE,
        k: 1,
        e4: StreamCombiner::SumStreams,
    };
    Preset {
        name: "fbmc-oqam",
        config,
        input_mapper: InputMapper::OqamStagger,
    }
}

// --- offset-QAM mapping --------------------------------------------------

/// Phase unit carried by stream `p`, subchannel `m` after staggering:
/// the real part rides on stream 0 for even subchannels and stream 1 for
/// odd ones; the imaginary part rides on the opposite stream with a
/// quarter-turn.
pub fn oqam_slot_unit(p: usize, m: usize) -> Complex64 {
    if m.is_multiple_of(2) == (p == 0) {
        Complex64::ONE
    } else {
        Complex64::new(0.0, 1.0)
    }
}

/// Splits a complex symbol grid into the two staggered streams: for even
/// subchannels stream 0 carries `Re(a)` and stream 1 carries `j*Im(a)`;
/// odd subchannels swap the roles.
pub fn oqam_map(grid: &Mat) -> [Mat; 2] {
    let build = |p: usize| {
        Mat::from_fn(grid.rows(), grid.cols(), |i, j| {
            let a = grid[(i, j)];
            let real_slot = (j % 2 == 0) == (p == 0);
            if real_slot {
                Complex64::new(a.re, 0.0)
            } else {
                Complex64::new(0.0, a.im)
            }
        })
    };
    [build(0), build(1)]
}

/// Inverse of [`oqam_map`]: recombines the staggered halves into complex
/// symbols.
pub fn oqam_unmap(streams: &[Mat; 2]) -> Mat {
    let [s0, s1] = streams;
    assert_eq!((s0.rows(), s0.cols()), (s1.rows(), s1.cols()));
    Mat::from_fn(s0.rows(), s0.cols(), |i, j| {
        if j % 2 == 0 {
            Complex64::new(s0[(i, j)].re, s1[(i, j)].im)
        } else {
            Complex64::new(s1[(i, j)].re, s0[(i, j)].im)
        }
    })
}
