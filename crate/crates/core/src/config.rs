//! Modulator configuration, validation, and derived dimensions.
//!
//! A [`ModulatorConfig`] holds every parameter of the generic two-stage
//! synthesis chain. [`validate`] checks the full invariant list in one pass,
//! reporting one diagnostic per violation, and on success returns the
//! [`Dimensions`] record with every derived length the pipeline needs:
//! extended frame sizes, per-stage output lengths, the per-frame output
//! length, and the multi-frame assembly stride.

use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::mat::Mat01;

// --- rate bookkeeping -------------------------------------------------

/// Rational rate multiplier relative to the input symbol rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    num: u64,
    den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Rate {
        assert!(num > 0 && den > 0, "rate terms must be positive");
        let g = gcd(num, den);
        Rate {
            num: num / g,
            den: den / g,
        }
    }

    pub fn unit() -> Rate {
        Rate { num: 1, den: 1 }
    }

    pub fn times(self, num: u64, den: u64) -> Rate {
        Rate::new(self.num * num, self.den * den)
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// --- configuration ----------------------------------------------------

/// Cyclic/zero extension lengths for one tier. The core length the
/// extension wraps is determined by the tier's position in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtensionSpec {
    /// Zero prefix length.
    pub n_zp: usize,
    /// Cyclic prefix length (copy of the frame tail).
    pub n_cp: usize,
    /// Cyclic suffix length (copy of the frame head).
    pub n_cs: usize,
    /// Zero suffix length.
    pub n_zs: usize,
}

impl ExtensionSpec {
    pub const NONE: ExtensionSpec = ExtensionSpec {
        n_zp: 0,
        n_cp: 0,
        n_cs: 0,
        n_zs: 0,
    };

    /// Samples the extension adds to a frame.
    pub fn delta(&self) -> usize {
        self.n_zp + self.n_cp + self.n_cs + self.n_zs
    }

    /// Extended length of a frame of `core` samples.
    pub fn extended(&self, core: usize) -> usize {
        core + self.delta()
    }
}

/// One generalized filtering stage: upsample, stuff to the circular
/// period, filter circularly, modulate per subchannel, correct the causal
/// phase, decimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSpec {
    /// Channel count of the stage filter bank (M).
    pub m: usize,
    /// Upsampling factor (L).
    pub l: usize,
    /// Downsampling factor (Q).
    pub q: usize,
    /// Prototype filter coefficients.
    pub h: Vec<Complex64>,
    /// Circular filtering period (N_c).
    pub n_c: usize,
    /// Per-stream time offsets applied during upsampling (o), one entry
    /// per parallel stream.
    pub o: Vec<usize>,
    /// Per-stream sample offsets applied during decimation (a).
    pub a: Vec<usize>,
    /// Conjugate the modulation exponent (b_conj).
    pub b_conj: bool,
    /// Enable the causal phase correction (b_cas).
    pub b_cas: bool,
}

/// Final combiner mapping the P per-stream sample vectors to K outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamCombiner {
    /// K = P, output k is stream k unchanged.
    Identity,
    /// K = 1, the single output is the sum of all streams.
    SumStreams,
    /// Explicit 0-1 matrix of shape (K*frame_len) x (P*frame_len).
    Explicit(Mat01),
}

/// Every parameter of the generic modulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatorConfig {
    /// Time symbols per subchannel per frame (N).
    pub n: usize,
    /// Occupied data subchannels (M').
    pub m_prime: usize,
    /// Parallel streams (P).
    pub p: usize,
    /// Commutator: data subchannel m feeds filter channel e[m].
    pub e: Vec<usize>,
    /// Extension applied to the N-symbol frame.
    pub tier1: ExtensionSpec,
    /// First filtering stage.
    pub stage1: StageSpec,
    /// Extension applied after the first stage.
    pub tier2: ExtensionSpec,
    /// Time-domain window samples; shorter windows are zero-padded, and an
    /// all-ones window of the extended length is the identity.
    pub window: Vec<Complex64>,
    /// Subchannel multiplexer applied on the right of the windowed signal.
    pub e2: Mat01,
    /// Auxiliary multiplexer used only on the transpose path.
    pub e3: Option<Mat01>,
    /// Transpose the multiplexed signal before the second stage (b_tran).
    pub b_tran: bool,
    /// Second filtering stage.
    pub stage2: StageSpec,
    /// Extension applied after the second stage.
    pub tier3: ExtensionSpec,
    /// Number of modulator outputs (K).
    pub k: usize,
    /// Stream combiner (E4).
    pub e4: StreamCombiner,
}

// --- validation -------------------------------------------------------

/// A single violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    ZeroField {
        name: &'static str,
    },
    ChannelDeficit {
        m1: usize,
        m_prime: usize,
    },
    CommutatorLength {
        got: usize,
        expected: usize,
    },
    CommutatorOutOfRange {
        index: usize,
        channels: usize,
    },
    CommutatorDuplicate {
        index: usize,
    },
    OffsetCount {
        stage: u8,
        which: &'static str,
        got: usize,
        expected: usize,
    },
    OffsetRange {
        stage: u8,
        which: &'static str,
        value: usize,
        bound: usize,
    },
    EmptyFilter {
        stage: u8,
    },
    FilterTooLong {
        stage: u8,
        taps: usize,
        period: usize,
    },
    PeriodNotMultiple {
        stage: u8,
        n_c: usize,
        m: usize,
    },
    /// The circular period cannot hold the upsampled signal; part of it
    /// would alias onto itself.
    InformationLoss {
        stage: u8,
        period: usize,
        needed: usize,
    },
    ExtensionTooLong {
        tier: u8,
        which: &'static str,
        len: usize,
        core: usize,
    },
    WindowTooLong {
        len: usize,
        target: usize,
    },
    MultiplexerRows {
        got: usize,
        expected: usize,
    },
    MultiplexerCols {
        got: usize,
        expected: usize,
    },
    MissingTransposeMultiplexer,
    TransposeMultiplexerRows {
        got: usize,
        expected: usize,
    },
    TransposeMultiplexerCols {
        got: usize,
        expected: usize,
    },
    CombinerShape {
        detail: &'static str,
        got: (usize, usize),
        expected: (usize, usize),
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::ZeroField { name } => write!(f, "{name} must be at least 1"),
            ConfigError::ChannelDeficit { m1, m_prime } => write!(
                f,
                "filter bank size M1={m1} smaller than occupied subchannels M'={m_prime}"
            ),
            ConfigError::CommutatorLength { got, expected } => {
                write!(f, "commutator has {got} entries, expected M'={expected}")
            }
            ConfigError::CommutatorOutOfRange { index, channels } => {
                write!(f, "commutator entry {index} outside filter bank of size {channels}")
            }
            ConfigError::CommutatorDuplicate { index } => {
                write!(f, "commutator routes two subchannels into filter channel {index}")
            }
            ConfigError::OffsetCount {
                stage,
                which,
                got,
                expected,
            } => write!(
                f,
                "stage {stage} {which} offsets: {got} entries, expected one per stream (P={expected})"
            ),
            ConfigError::OffsetRange {
                stage,
                which,
                value,
                bound,
            } => write!(
                f,
                "stage {stage} {which} offset {value} must be smaller than {bound}"
            ),
            ConfigError::EmptyFilter { stage } => {
                write!(f, "stage {stage} filter needs at least one coefficient")
            }
            ConfigError::FilterTooLong {
                stage,
                taps,
                period,
            } => write!(
                f,
                "stage {stage}: {taps}-tap filter exceeds circular period {period}"
            ),
            ConfigError::PeriodNotMultiple { stage, n_c, m } => write!(
                f,
                "stage {stage}: circular period {n_c} must be a multiple of the channel count {m}"
            ),
            ConfigError::InformationLoss {
                stage,
                period,
                needed,
            } => write!(
                f,
                "stage {stage}: circular period {period} shorter than the {needed}-sample upsampled signal: information loss"
            ),
            ConfigError::ExtensionTooLong {
                tier,
                which,
                len,
                core,
            } => write!(
                f,
                "tier {tier} cyclic {which} of {len} samples exceeds the {core}-sample frame"
            ),
            ConfigError::WindowTooLong { len, target } => {
                write!(f, "window of {len} samples exceeds the extended frame length {target}")
            }
            ConfigError::MultiplexerRows { got, expected } => {
                write!(f, "multiplexer E2 has {got} rows, expected M1={expected}")
            }
            ConfigError::MultiplexerCols { got, expected } => {
                write!(f, "multiplexer E2 has {got} columns, expected M2={expected}")
            }
            ConfigError::MissingTransposeMultiplexer => {
                write!(f, "transpose path enabled (b_tran=1) but E3 is missing")
            }
            ConfigError::TransposeMultiplexerRows { got, expected } => {
                write!(f, "multiplexer E3 has {got} rows, expected the extended frame length {expected}")
            }
            ConfigError::TransposeMultiplexerCols { got, expected } => {
                write!(f, "multiplexer E3 has {got} columns, expected M2={expected}")
            }
            ConfigError::CombinerShape {
                detail,
                got,
                expected,
            } => write!(
                f,
                "stream combiner {detail}: got {}x{}, expected {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
        }
    }
}

impl core::error::Error for ConfigError {}

/// All invariant violations found in one validation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors {
    errors: Vec<ConfigError>,
}

impl ValidationErrors {
    pub fn iter(&self) -> impl Iterator<Item = &ConfigError> {
        self.errors.iter()
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_information_loss(&self) -> bool {
        self.errors
            .iter()
            .any(|e| matches!(e, ConfigError::InformationLoss { .. }))
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ValidationErrors {}

/// How the circular period relates to the signal it filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterRegime {
    /// Period at least the upsampled length plus the filter tail: circular
    /// filtering coincides with linear convolution.
    Linear,
    /// Period equals the upsampled signal length exactly; the filter tail
    /// wraps around.
    ExactFit,
    /// Period longer than the signal but shorter than the linear
    /// threshold; zero stuffing absorbs part of the tail, the rest wraps.
    CircularPadded,
}

/// Every derived length of a validated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    /// Extended frame length after tier 1 (time rows entering stage 1).
    pub n_s1: usize,
    /// Upsampled length inside stage 1.
    pub up1_len: usize,
    /// Stage-1 output rows: floor(n_c1 / q1).
    pub n_prime: usize,
    /// Extended length after tier 2.
    pub n_s2: usize,
    /// Time rows entering stage 2 (n_s2, or cols(E2) on the transpose path).
    pub stage2_in: usize,
    /// Upsampled length inside stage 2.
    pub up2_len: usize,
    /// Stage-2 output rows: floor(n_c2 / q2).
    pub n_tprime: usize,
    /// Per-stream, per-frame output length after tier 3.
    pub frame_len: usize,
    /// Overlap-add stride between consecutive frames at output rate, when
    /// it is integral; multi-frame input with a non-integral stride is
    /// rejected at modulation time.
    pub stride: Option<usize>,
    /// Output rate relative to the input symbol rate.
    pub rate: Rate,
    /// Circular-filtering regime of stage 1.
    pub regime1: FilterRegime,
    /// Circular-filtering regime of stage 2.
    pub regime2: FilterRegime,
}

fn classify_regime(n_c: usize, l: usize, n_s: usize, k0: usize, max_o: usize) -> FilterRegime {
    let needed = l * n_s;
    let linear_from = needed + k0 + max_o - l.min(k0 + max_o);
    // linear_from = l*n_s + k0 - l + max_o, clamped so short filters
    // (k0 + max_o <= l) classify as linear whenever the period fits.
    if n_c >= linear_from {
        FilterRegime::Linear
    } else if n_c == needed {
        FilterRegime::ExactFit
    } else {
        FilterRegime::CircularPadded
    }
}

fn check_stage(cfg: &ModulatorConfig, stage: u8, spec: &StageSpec, errors: &mut Vec<ConfigError>) {
    if spec.m == 0 {
        errors.push(ConfigError::ZeroField {
            name: if stage == 1 { "M1" } else { "M2" },
        });
    }
    if spec.l == 0 {
        errors.push(ConfigError::ZeroField {
            name: if stage == 1 { "L1" } else { "L2" },
        });
    }
    if spec.q == 0 {
        errors.push(ConfigError::ZeroField {
            name: if stage == 1 { "Q1" } else { "Q2" },
        });
    }
    if spec.n_c == 0 {
        errors.push(ConfigError::ZeroField {
            name: if stage == 1 { "Nc1" } else { "Nc2" },
        });
    }
    if spec.h.is_empty() {
        errors.push(ConfigError::EmptyFilter { stage });
    } else if spec.n_c > 0 && spec.h.len() > spec.n_c {
        errors.push(ConfigError::FilterTooLong {
            stage,
            taps: spec.h.len(),
            period: spec.n_c,
        });
    }
    if spec.m > 0 && spec.n_c > 0 && !spec.n_c.is_multiple_of(spec.m) {
        errors.push(ConfigError::PeriodNotMultiple {
            stage,
            n_c: spec.n_c,
            m: spec.m,
        });
    }
    if spec.o.len() != cfg.p {
        errors.push(ConfigError::OffsetCount {
            stage,
            which: "time",
            got: spec.o.len(),
            expected: cfg.p,
        });
    }
    if spec.a.len() != cfg.p {
        errors.push(ConfigError::OffsetCount {
            stage,
            which: "decimation",
            got: spec.a.len(),
            expected: cfg.p,
        });
    }
    if spec.l > 0 {
        for &o in &spec.o {
            if o >= spec.l {
                errors.push(ConfigError::OffsetRange {
                    stage,
                    which: "time",
                    value: o,
                    bound: spec.l,
                });
            }
        }
    }
    if spec.q > 0 {
        for &a in &spec.a {
            if a >= spec.q {
                errors.push(ConfigError::OffsetRange {
                    stage,
                    which: "decimation",
                    value: a,
                    bound: spec.q,
                });
            }
        }
    }
}

/// Checks every invariant of the configuration and computes the derived
/// dimensions. Returns one diagnostic per violation.
pub fn validate(cfg: &ModulatorConfig) -> Result<Dimensions, ValidationErrors> {
    let mut errors = Vec::new();

    for (value, name) in [
        (cfg.n, "N"),
        (cfg.m_prime, "M'"),
        (cfg.p, "P"),
        (cfg.k, "K"),
    ] {
        if value == 0 {
            errors.push(ConfigError::ZeroField { name });
        }
    }
    check_stage(cfg, 1, &cfg.stage1, &mut errors);
    check_stage(cfg, 2, &cfg.stage2, &mut errors);

    if cfg.stage1.m < cfg.m_prime {
        errors.push(ConfigError::ChannelDeficit {
            m1: cfg.stage1.m,
            m_prime: cfg.m_prime,
        });
    }
    if cfg.e.len() != cfg.m_prime {
        errors.push(ConfigError::CommutatorLength {
            got: cfg.e.len(),
            expected: cfg.m_prime,
        });
    }
    let mut seen = alloc::vec![false; cfg.stage1.m];
    for &t in &cfg.e {
        if t >= cfg.stage1.m {
            errors.push(ConfigError::CommutatorOutOfRange {
                index: t,
                channels: cfg.stage1.m,
            });
        } else if seen[t] {
            errors.push(ConfigError::CommutatorDuplicate { index: t });
        } else {
            seen[t] = true;
        }
    }

    // Derived lengths need nonzero factors; stop here if those are broken.
    if !errors.is_empty()
        && (cfg.n == 0
            || cfg.p == 0
            || cfg.stage1.l == 0
            || cfg.stage1.q == 0
            || cfg.stage2.l == 0
            || cfg.stage2.q == 0
            || cfg.stage1.m == 0
            || cfg.stage2.m == 0
            || cfg.stage1.h.is_empty()
            || cfg.stage2.h.is_empty())
    {
        return Err(ValidationErrors { errors });
    }

    // Tier 1 wraps the N-symbol frame.
    if cfg.tier1.n_cp > cfg.n {
        errors.push(ConfigError::ExtensionTooLong {
            tier: 1,
            which: "prefix",
            len: cfg.tier1.n_cp,
            core: cfg.n,
        });
    }
    if cfg.tier1.n_cs > cfg.n {
        errors.push(ConfigError::ExtensionTooLong {
            tier: 1,
            which: "suffix",
            len: cfg.tier1.n_cs,
            core: cfg.n,
        });
    }
    let n_s1 = cfg.tier1.extended(cfg.n);
    let up1_len = cfg.stage1.l * n_s1;
    if cfg.stage1.n_c < up1_len {
        errors.push(ConfigError::InformationLoss {
            stage: 1,
            period: cfg.stage1.n_c,
            needed: up1_len,
        });
    }
    let n_prime = cfg.stage1.n_c / cfg.stage1.q;

    // Tier 2 wraps the stage-1 output.
    if cfg.tier2.n_cp > n_prime {
        errors.push(ConfigError::ExtensionTooLong {
            tier: 2,
            which: "prefix",
            len: cfg.tier2.n_cp,
            core: n_prime,
        });
    }
    if cfg.tier2.n_cs > n_prime {
        errors.push(ConfigError::ExtensionTooLong {
            tier: 2,
            which: "suffix",
            len: cfg.tier2.n_cs,
            core: n_prime,
        });
    }
    let n_s2 = cfg.tier2.extended(n_prime);

    if cfg.window.len() > n_s2 {
        errors.push(ConfigError::WindowTooLong {
            len: cfg.window.len(),
            target: n_s2,
        });
    }

    if cfg.e2.rows() != cfg.stage1.m {
        errors.push(ConfigError::MultiplexerRows {
            got: cfg.e2.rows(),
            expected: cfg.stage1.m,
        });
    }
    let stage2_in;
    if cfg.b_tran {
        stage2_in = cfg.e2.cols();
        match &cfg.e3 {
            None => errors.push(ConfigError::MissingTransposeMultiplexer),
            Some(e3) => {
                if e3.rows() != n_s2 {
                    errors.push(ConfigError::TransposeMultiplexerRows {
                        got: e3.rows(),
                        expected: n_s2,
                    });
                }
                if e3.cols() != cfg.stage2.m {
                    errors.push(ConfigError::TransposeMultiplexerCols {
                        got: e3.cols(),
                        expected: cfg.stage2.m,
                    });
                }
            }
        }
    } else {
        stage2_in = n_s2;
        if cfg.e2.cols() != cfg.stage2.m {
            errors.push(ConfigError::MultiplexerCols {
                got: cfg.e2.cols(),
                expected: cfg.stage2.m,
            });
        }
    }

    let up2_len = cfg.stage2.l * stage2_in;
    if cfg.stage2.n_c < up2_len {
        errors.push(ConfigError::InformationLoss {
            stage: 2,
            period: cfg.stage2.n_c,
            needed: up2_len,
        });
    }
    let n_tprime = cfg.stage2.n_c / cfg.stage2.q;

    // Tier 3 wraps the stage-2 output.
    if cfg.tier3.n_cp > n_tprime {
        errors.push(ConfigError::ExtensionTooLong {
            tier: 3,
            which: "prefix",
            len: cfg.tier3.n_cp,
            core: n_tprime,
        });
    }
    if cfg.tier3.n_cs > n_tprime {
        errors.push(ConfigError::ExtensionTooLong {
            tier: 3,
            which: "suffix",
            len: cfg.tier3.n_cs,
            core: n_tprime,
        });
    }
    let frame_len = cfg.tier3.extended(n_tprime);

    match &cfg.e4 {
        StreamCombiner::Identity => {
            if cfg.k != cfg.p {
                errors.push(ConfigError::CombinerShape {
                    detail: "identity needs K = P",
                    got: (cfg.k, cfg.p),
                    expected: (cfg.p, cfg.p),
                });
            }
        }
        StreamCombiner::SumStreams => {
            if cfg.k != 1 {
                errors.push(ConfigError::CombinerShape {
                    detail: "stream sum needs K = 1",
                    got: (cfg.k, cfg.p),
                    expected: (1, cfg.p),
                });
            }
        }
        StreamCombiner::Explicit(m) => {
            let expected = (cfg.k * frame_len, cfg.p * frame_len);
            if (m.rows(), m.cols()) != expected {
                errors.push(ConfigError::CombinerShape {
                    detail: "explicit matrix shape",
                    got: (m.rows(), m.cols()),
                    expected,
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(ValidationErrors { errors });
    }

    // Overlap-add stride at output rate: consecutive frames advance by the
    // extended tier-1 frame, scaled through both stage rate changes, with
    // each later tier's extension samples added on top. On the transpose
    // path the multiplexer output columns become the time axis entering
    // stage 2, so the stride restarts from there.
    let stride = if cfg.b_tran {
        let c = cfg.e2.cols() * cfg.stage2.l;
        c.is_multiple_of(cfg.stage2.q).then(|| c / cfg.stage2.q + cfg.tier3.delta())
    } else {
        let a = n_s1 * cfg.stage1.l;
        if !a.is_multiple_of(cfg.stage1.q) {
            None
        } else {
            let b = (a / cfg.stage1.q + cfg.tier2.delta()) * cfg.stage2.l;
            b.is_multiple_of(cfg.stage2.q).then(|| b / cfg.stage2.q + cfg.tier3.delta())
        }
    };

    let max_o1 = cfg.stage1.o.iter().copied().max().unwrap_or(0);
    let max_o2 = cfg.stage2.o.iter().copied().max().unwrap_or(0);

    Ok(Dimensions {
        n_s1,
        up1_len,
        n_prime,
        n_s2,
        stage2_in,
        up2_len,
        n_tprime,
        frame_len,
        stride,
        rate: Rate::unit()
            .times(cfg.stage1.l as u64, cfg.stage1.q as u64)
            .times(cfg.stage2.l as u64, cfg.stage2.q as u64),
        regime1: classify_regime(cfg.stage1.n_c, cfg.stage1.l, n_s1, cfg.stage1.h.len(), max_o1),
        regime2: classify_regime(
            cfg.stage2.n_c,
            cfg.stage2.l,
            stage2_in,
            cfg.stage2.h.len(),
            max_o2,
        ),
    })
}

// --- digest -----------------------------------------------------------

/// 64-bit FNV-1a over a canonical encoding of every config field. Stable
/// across runs and platforms; used to stamp waveforms with the exact
/// parameter set that produced them.
pub fn digest(cfg: &ModulatorConfig) -> u64 {
    let mut h = Fnv::new();
    h.word(1); // encoding version
    h.word(cfg.n as u64);
    h.word(cfg.m_prime as u64);
    h.word(cfg.p as u64);
    h.word(cfg.k as u64);
    h.word(cfg.e.len() as u64);
    for &t in &cfg.e {
        h.word(t as u64);
    }
    for tier in [&cfg.tier1, &cfg.tier2, &cfg.tier3] {
        h.word(tier.n_zp as u64);
        h.word(tier.n_cp as u64);
        h.word(tier.n_cs as u64);
        h.word(tier.n_zs as u64);
    }
    for stage in [&cfg.stage1, &cfg.stage2] {
        h.word(stage.m as u64);
        h.word(stage.l as u64);
        h.word(stage.q as u64);
        h.word(stage.n_c as u64);
        h.word(stage.h.len() as u64);
        for z in &stage.h {
            h.word(z.re.to_bits());
            h.word(z.im.to_bits());
        }
        h.word(stage.o.len() as u64);
        for &o in &stage.o {
            h.word(o as u64);
        }
        h.word(stage.a.len() as u64);
        for &a in &stage.a {
            h.word(a as u64);
        }
        h.word(stage.b_conj as u64);
        h.word(stage.b_cas as u64);
    }
    h.word(cfg.window.len() as u64);
    for z in &cfg.window {
        h.word(z.re.to_bits());
        h.word(z.im.to_bits());
    }
    h.word(cfg.b_tran as u64);
    hash_mask(&mut h, &cfg.e2);
    match &cfg.e3 {
        None => h.word(0),
        Some(m) => {
            h.word(1);
            hash_mask(&mut h, m);
        }
    }
    match &cfg.e4 {
        StreamCombiner::Identity => h.word(1),
        StreamCombiner::SumStreams => h.word(2),
        StreamCombiner::Explicit(m) => {
            h.word(3);
            hash_mask(&mut h, m);
        }
    }
    h.finish()
}

fn hash_mask(h: &mut Fnv, m: &Mat01) {
    h.word(m.rows() as u64);
    h.word(m.cols() as u64);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            h.word(m.entry(i, j) as u64);
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Fnv {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn word(&mut self, w: u64) {
        for b in w.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn test_rate_reduces() {
        let r = Rate::new(128, 4).times(1, 2);
        assert_eq!((r.num(), r.den()), (16, 1));
        assert_eq!(alloc::format!("{}", Rate::new(3, 6)), "1/2");
    }

    #[test]
    fn test_extension_arithmetic() {
        let e = ExtensionSpec {
            n_zp: 1,
            n_cp: 2,
            n_cs: 3,
            n_zs: 4,
        };
        assert_eq!(e.delta(), 10);
        assert_eq!(e.extended(7), 17);
    }

    #[test]
    fn test_regime_classification() {
        // Period exactly the upsampled length, filter tail wraps.
        assert_eq!(classify_regime(8, 2, 4, 3, 0), FilterRegime::ExactFit);
        // Padded but still wrapping: threshold is 8 + 3 - 2 = 9... period 8..9.
        assert_eq!(classify_regime(8, 2, 4, 4, 0), FilterRegime::ExactFit);
        assert_eq!(classify_regime(9, 2, 4, 4, 0), FilterRegime::CircularPadded);
        // At or beyond the threshold 8 + 4 - 2 = 10: linear.
        assert_eq!(classify_regime(10, 2, 4, 4, 0), FilterRegime::Linear);
        // Single-tap filter: always linear once the signal fits.
        assert_eq!(classify_regime(8, 2, 4, 1, 0), FilterRegime::Linear);
        // Offsets push the threshold up.
        assert_eq!(classify_regime(10, 2, 4, 4, 1), FilterRegime::CircularPadded);
        assert_eq!(classify_regime(11, 2, 4, 4, 1), FilterRegime::Linear);
    }

    #[test]
    fn test_validate_rejects_information_loss_one_below() {
        let mut cfg = presets::preset_ofdm().config;
        cfg.stage1.n_c = 127; // upsampled length is 128
        let errs = validate(&cfg).unwrap_err();
        assert!(errs.has_information_loss());
    }

    #[test]
    fn test_validate_rejects_long_tier1_prefix() {
        let mut cfg = presets::preset_ofdm().config;
        cfg.tier1.n_cp = cfg.n + 1;
        let errs = validate(&cfg).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ConfigError::ExtensionTooLong { tier: 1, .. })));
    }

    #[test]
    fn test_validate_collects_multiple_diagnostics() {
        let mut cfg = presets::preset_ofdm().config;
        cfg.stage1.q = 0;
        cfg.m_prime = 0;
        let errs = validate(&cfg).unwrap_err();
        assert!(errs.len() >= 2);
    }

    #[test]
    fn test_digest_changes_with_any_field() {
        let base = presets::preset_ofdm().config;
        let d0 = digest(&base);
        assert_eq!(d0, digest(&base.clone()));

        let mut c1 = base.clone();
        c1.tier2.n_cp = 31;
        assert_ne!(d0, digest(&c1));

        let mut c2 = base.clone();
        c2.stage1.h[3] = Complex64::new(0.5, 0.0);
        assert_ne!(d0, digest(&c2));

        let mut c3 = base;
        c3.stage1.b_conj = true;
        assert_ne!(d0, digest(&c3));
    }
}
