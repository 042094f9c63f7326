//! Input symbol framing.
//!
//! The modulator consumes symbols in frames of `P x N x M'`: `P` parallel
//! streams, each an `N x M'` grid of time rows and subchannel columns. A
//! flat symbol sequence fills frames stream-major, then time, then
//! subchannel, and the last frame is zero-padded.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::mat::Mat;

/// One frame of input data: `streams[p]` is the `N x M'` grid for stream
/// `p`, rows indexed by time symbol and columns by data subchannel.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFrame {
    /// Position of this frame in the transmission.
    pub index: usize,
    pub streams: Vec<Mat>,
}

impl DataFrame {
    /// An all-zero frame of the given geometry.
    pub fn zeros(index: usize, p: usize, n: usize, m_prime: usize) -> DataFrame {
        DataFrame {
            index,
            streams: (0..p).map(|_| Mat::zeros(n, m_prime)).collect(),
        }
    }

    /// A frame with a single unit entry at `(stream, time, subchannel)`.
    pub fn impulse(p: usize, n: usize, m_prime: usize, slot: (usize, usize, usize)) -> DataFrame {
        let mut f = DataFrame::zeros(0, p, n, m_prime);
        f.streams[slot.0][(slot.1, slot.2)] = Complex64::ONE;
        f
    }

    /// Total symbol capacity of one frame.
    pub fn capacity(p: usize, n: usize, m_prime: usize) -> usize {
        p * n * m_prime
    }
}

/// Splits a symbol sequence into frames, zero-padding the last. Symbols
/// fill each frame stream-major, then by time row, then by subchannel:
/// symbol `s` lands at stream `s / (N*M')`, time `(s % (N*M')) / M'`,
/// subchannel `s % M'`.
pub fn frame_input(symbols: &[Complex64], n: usize, m_prime: usize, p: usize) -> Vec<DataFrame> {
    assert!(n > 0 && m_prime > 0 && p > 0, "frame geometry must be positive");
    let per_frame = DataFrame::capacity(p, n, m_prime);
    let frame_count = symbols.len().div_ceil(per_frame);
    let mut frames = Vec::with_capacity(frame_count);
    for i in 0..frame_count {
        let mut frame = DataFrame::zeros(i, p, n, m_prime);
        let base = i * per_frame;
        let take = per_frame.min(symbols.len() - base);
        for (s, &sym) in symbols[base..base + take].iter().enumerate() {
            let stream = s / (n * m_prime);
            let rest = s % (n * m_prime);
            frame.streams[stream][(rest / m_prime, rest % m_prime)] = sym;
        }
        frames.push(frame);
    }
    frames
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn test_exact_fill_single_frame() {
        let symbols: Vec<Complex64> = (0..128).map(|i| c(i as f64)).collect();
        let frames = frame_input(&symbols, 1, 128, 1);
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].streams[0][(0, 5)], c(5.0));
    }

    #[test]
    fn test_one_extra_symbol_pads_second_frame() {
        let symbols: Vec<Complex64> = (0..129).map(|i| c(i as f64)).collect();
        let frames = frame_input(&symbols, 1, 128, 1);
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[1].index, 1);
        assert_eq!(frames[1].streams[0][(0, 0)], c(128.0));
        let zeros = (1..128)
            .filter(|&j| frames[1].streams[0][(0, j)] == Complex64::ZERO)
            .count();
        assert_eq!(zeros, 127);
    }

    #[test]
    fn test_fill_order_stream_major_then_time_then_subchannel() {
        // P=2, N=2, M'=3: stream 0 takes symbols 0..6, stream 1 takes 6..12.
        let symbols: Vec<Complex64> = (0..12).map(|i| c(i as f64)).collect();
        let frames = frame_input(&symbols, 2, 3, 2);
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!(f.streams[0][(0, 0)], c(0.0));
        assert_eq!(f.streams[0][(0, 2)], c(2.0));
        assert_eq!(f.streams[0][(1, 0)], c(3.0));
        assert_eq!(f.streams[1][(0, 0)], c(6.0));
        assert_eq!(f.streams[1][(1, 2)], c(11.0));
    }

    #[test]
    fn test_empty_input_produces_no_frames() {
        assert!(frame_input(&[], 2, 3, 2).is_empty());
    }
}
