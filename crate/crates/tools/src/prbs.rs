//! Reproducible pseudo-random symbol source.
//!
//! The generator is a fixed 64-bit linear congruential generator,
//!
//! ```text
//! state ← state · 6364136223846793005 + 1442695040888963407  (mod 2⁶⁴)
//! ```
//!
//! seeded directly with the user-supplied value. Constellation bits are
//! taken from the top of each state word (the high bits of this LCG are
//! the well-mixed ones), one symbol per step. The exact constants and bit
//! assignments are documented so streams can be regenerated bit-for-bit by
//! other implementations.

use mcmod_core::Complex64;

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

/// Fixed linear congruential generator over 64-bit state.
#[derive(Debug, Clone)]
pub struct Prbs {
    state: u64,
}

impl Prbs {
    /// Starts the stream from a seed; equal seeds give equal streams.
    pub fn new(seed: u64) -> Prbs {
        Prbs { state: seed }
    }

    /// Advances the generator and returns the new 64-bit state word.
    pub fn next_word(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(MULTIPLIER)
            .wrapping_add(INCREMENT);
        self.state
    }
}

/// Supported symbol constellations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    /// Quadrature phase-shift keying: bit 63 selects the in-phase sign,
    /// bit 62 the quadrature sign, levels ±1/√2 (unit average energy).
    Qpsk,
    /// 16-point quadrature amplitude modulation: bits 63..62 Gray-select
    /// the in-phase level, bits 61..60 the quadrature level, from
    /// {00→−3, 01→−1, 11→+1, 10→+3} scaled by 1/√10 (unit average
    /// energy).
    Qam16,
}

fn qam16_level(bits: u64) -> f64 {
    match bits & 0b11 {
        0b00 => -3.0,
        0b01 => -1.0,
        0b11 => 1.0,
        _ => 3.0,
    }
}

/// Maps one generator word to a constellation point.
pub fn map_word(word: u64, constellation: Constellation) -> Complex64 {
    match constellation {
        Constellation::Qpsk => {
            let i = 1.0 - 2.0 * ((word >> 63) & 1) as f64;
            let q = 1.0 - 2.0 * ((word >> 62) & 1) as f64;
            Complex64::new(i, q) * std::f64::consts::FRAC_1_SQRT_2
        }
        Constellation::Qam16 => {
            let i = qam16_level(word >> 62);
            let q = qam16_level(word >> 60);
            Complex64::new(i, q) / 10.0f64.sqrt()
        }
    }
}

/// Generates `count` symbols from the seeded stream.
pub fn symbols(seed: u64, constellation: Constellation, count: usize) -> Vec<Complex64> {
    let mut prbs = Prbs::new(seed);
    (0..count)
        .map(|_| map_word(prbs.next_word(), constellation))
        .collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
