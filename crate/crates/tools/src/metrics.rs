//! Waveform metrics: averaged-periodogram PSD and PAPR.
//!
//! The PSD estimate follows the Welch recipe: the waveform is cut into
//! segments that overlap by a configurable amount, each segment is
//! multiplied by a periodic Hann window and transformed, and the squared
//! magnitudes are averaged across segments. The result is normalized so
//! the strongest bin sits at 0 dB, which suits its purpose here: comparing
//! the out-of-band rolloff of different waveforms rather than measuring
//! absolute power.

use std::fmt;
use std::io::{self, Write as _};
use std::path::Path;

use mcmod_core::Complex64;
use rustfft::FftPlanner;

/// Failure modes of the metric computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    /// The waveform contained no samples.
    EmptyWaveform,
    /// The waveform carries no energy, so ratios are undefined.
    ZeroEnergy,
    /// Segment length zero, longer than the waveform, or overlap not
    /// smaller than the segment.
    BadSegmentation { segment: usize, overlap: usize, len: usize },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::EmptyWaveform => write!(f, "waveform is empty"),
            MetricError::ZeroEnergy => write!(f, "waveform has zero energy"),
            MetricError::BadSegmentation { segment, overlap, len } => write!(
                f,
                "segmentation invalid: segment {segment}, overlap {overlap}, waveform length {len}"
            ),
        }
    }
}

impl std::error::Error for MetricError {}

// ---------------------------------------------------------------------------
// PAPR
// ---------------------------------------------------------------------------

/// Peak-to-average power ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprReport {
    /// max |s|² / mean |s|².
    pub linear: f64,
    /// The same ratio in decibels.
    pub db: f64,
}

/// Computes the peak-to-average power ratio of a waveform.
pub fn papr(samples: &[Complex64]) -> Result<PaprReport, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::EmptyWaveform);
    }
    let mut peak = 0.0f64;
    let mut sum = 0.0f64;
    for s in samples {
        let power = s.norm_sqr();
        peak = peak.max(power);
        sum += power;
    }
    if sum == 0.0 {
        return Err(MetricError::ZeroEnergy);
    }
    let linear = peak / (sum / samples.len() as f64);
    Ok(PaprReport { linear, db: 10.0 * linear.log10() })
}

// ---------------------------------------------------------------------------
// PSD
// ---------------------------------------------------------------------------

/// One bin of the PSD estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdBin {
    /// Normalized frequency in [−0.5, 0.5) cycles per sample.
    pub frequency: f64,
    /// Power relative to the strongest bin, in decibels.
    pub power_db: f64,
}

fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - (std::f64::consts::TAU * n as f64 / len as f64).cos()))
        .collect()
}

/// Averaged-periodogram PSD estimate, peak-normalized to 0 dB. Bins are
/// returned in ascending normalized frequency, covering [−0.5, 0.5).
pub fn psd(
    samples: &[Complex64],
    segment: usize,
    overlap: usize,
) -> Result<Vec<PsdBin>, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::EmptyWaveform);
    }
    if segment == 0 || segment > samples.len() || overlap >= segment {
        return Err(MetricError::BadSegmentation {
            segment,
            overlap,
            len: samples.len(),
        });
    }
    if samples.iter().all(|s| s.norm_sqr() == 0.0) {
        return Err(MetricError::ZeroEnergy);
    }

    let window = hann(segment);
    let fft = FftPlanner::new().plan_fft_forward(segment);
    let hop = segment - overlap;
    let mut average = vec![0.0f64; segment];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + segment <= samples.len() {
        let mut buf: Vec<Complex64> = samples[start..start + segment]
            .iter()
            .zip(&window)
            .map(|(&s, &w)| s * w)
            .collect();
        fft.process(&mut buf);
        for (acc, v) in average.iter_mut().zip(&buf) {
            *acc += v.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    for acc in &mut average {
        *acc /= segments as f64;
    }

    let peak = average.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Err(MetricError::ZeroEnergy);
    }

    let mut bins: Vec<PsdBin> = average
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let frequency = if k < segment.div_ceil(2) {
                k as f64 / segment as f64
            } else {
                k as f64 / segment as f64 - 1.0
            };
            let ratio = p / peak;
            let power_db = if ratio > 0.0 { 10.0 * ratio.log10() } else { f64::NEG_INFINITY };
            PsdBin { frequency, power_db }
        })
        .collect();
    bins.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(bins)
}

/// Writes a PSD table as plot-ready CSV with a header row.
pub fn write_psd_csv(path: &Path, bins: &[PsdBin]) -> io::Result<()> {
    let mut out = Vec::with_capacity(bins.len() * 32 + 32);
    writeln!(out, "normalized_frequency,power_db")?;
    for bin in bins {
        writeln!(out, "{:.6},{:.6}", bin.frequency, bin.power_db)?;
    }
    std::fs::write(path, out)
}

/// Writes a PAPR report as a small CSV (header plus one data row).
pub fn write_papr_csv(path: &Path, report: &PaprReport) -> io::Result<()> {
    let mut out = Vec::new();
    writeln!(out, "papr_linear,papr_db")?;
    writeln!(out, "{:.12},{:.12}", report.linear, report.db)?;
    std::fs::write(path, out)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
