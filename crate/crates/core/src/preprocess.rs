//! Signal conditioning: phase alignment, min-max scaling, truncation,
//! finite-difference derivative, and one-sided FFT magnitude signature.
//!
//! The chain runs in a fixed order — align → scale → truncate → (derivative
//! and/or signature) — so every record enters the embedding stage phase-locked
//! at its first upward zero crossing, normalized to the same value range and
//! the same length, which makes records comparable across load levels.
//!
//! All steps are pure functions of their inputs; the same record and config
//! always produce bit-identical output.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fda::SampleGrid;
use crate::synth::SignalRecord;

/// Settings for [`preprocess_signal`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PreprocessConfig {
    /// Number of samples kept after alignment.
    pub truncate_len: usize,
    /// `(lo, hi)` range the samples are scaled into.
    pub target_range: (f64, f64),
    /// Also emit the finite-difference derivative of the scaled signal.
    pub derivative: bool,
    /// Also emit the one-sided FFT magnitude signature of the scaled signal.
    pub signature: bool,
}

impl Default for PreprocessConfig {
    /// 750 samples scaled into [−1, 1], no extra representations.
    fn default() -> Self {
        Self {
            truncate_len: 750,
            target_range: (-1.0, 1.0),
            derivative: false,
            signature: false,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncate_len < 2 {
            return Err(Error::InvalidSpec(format!(
                "truncate length {} below 2",
                self.truncate_len
            )));
        }
        let (lo, hi) = self.target_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "target range ({lo}, {hi}) must satisfy lo < hi"
            )));
        }
        Ok(())
    }
}

/// One-sided magnitude spectrum with its frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    /// `k·fs/N` for `k = 0 ‥ ⌊N/2⌋`, in hertz.
    pub freqs: Vec<f64>,
    /// Nonnegative magnitudes, same length as `freqs`.
    pub magnitudes: Vec<f64>,
}

impl Signature {
    /// The frequency axis as a sampling grid (for quadrature-based geometry).
    pub fn grid(&self) -> Result<SampleGrid> {
        SampleGrid::from_points(self.freqs.clone())
    }
}

/// Drops everything before the first upward zero crossing.
///
/// The crossing is the first index `i ≥ 1` with `x[i−1] < 0 ≤ x[i]`; the
/// returned signal starts at `i`, and `i` itself is returned as the shift.
pub fn align_first_zero_crossing(samples: &[f64]) -> Result<(Vec<f64>, usize)> {
    for i in 1..samples.len() {
        if samples[i - 1] < 0.0 && samples[i] >= 0.0 {
            return Ok((samples[i..].to_vec(), i));
        }
    }
    Err(Error::NoZeroCrossing)
}

/// Affine map sending the sample minimum to `lo` and maximum to `hi`.
pub fn scale_minmax(samples: &[f64], target_range: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = target_range;
    if !(lo < hi) {
        return Err(Error::InvalidSpec(format!(
            "target range ({lo}, {hi}) must satisfy lo < hi"
        )));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in samples {
        min = min.min(v);
        max = max.max(v);
    }
    if !(max > min) {
        return Err(Error::ConstantSignal);
    }
    let denom = max - min;
    Ok(samples
        .iter()
        .map(|&v| {
            // True division makes r exactly 0 at the minimum and exactly 1 at
            // the maximum, so interpolating between the endpoints hits lo and
            // hi without rounding; the clamp guards interior rounding.
            let r = (v - min) / denom;
            (lo * (1.0 - r) + hi * r).clamp(lo, hi)
        })
        .collect())
}

/// Finite-difference derivative on a grid: central differences at interior
/// points, one-sided at the two ends. Output has the input length.
pub fn finite_difference_derivative(samples: &[f64], grid: &SampleGrid) -> Result<Vec<f64>> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::TooShort { need: 3, have: m });
    }
    if grid.len() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: grid.len(),
        });
    }
    let t = grid.points();
    let mut d = Vec::with_capacity(m);
    d.push((samples[1] - samples[0]) / (t[1] - t[0]));
    for j in 1..m - 1 {
        d.push((samples[j + 1] - samples[j - 1]) / (t[j + 1] - t[j - 1]));
    }
    d.push((samples[m - 1] - samples[m - 2]) / (t[m - 1] - t[m - 2]));
    Ok(d)
}

/// One-sided FFT magnitude spectrum.
///
/// `magnitude[k] = |X_k| / N`, doubled for `0 < k < N/2` so each bin reads as
/// the amplitude of the corresponding real sinusoid; `freqs[k] = k·fs/N`.
/// No windowing, no zero-padding.
pub fn fft_signature(samples: &[f64], fs_hz: f64) -> Result<Signature> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooShort { need: 2, have: n });
    }
    if !(fs_hz > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "sampling rate {fs_hz} must be positive"
        )));
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let n_bins = half + 1;
    let mut freqs = Vec::with_capacity(n_bins);
    let mut magnitudes = Vec::with_capacity(n_bins);
    for (k, c) in buf.iter().take(n_bins).enumerate() {
        let mut mag = c.norm() / n as f64;
        if k > 0 && 2 * k < n {
            mag *= 2.0;
        }
        freqs.push(k as f64 * fs_hz / n as f64);
        magnitudes.push(mag);
    }
    Ok(Signature { freqs, magnitudes })
}

/// The uniform time axis `0, 1/fs, 2/fs, …` for a window of `len` samples.
pub fn time_grid(fs_hz: f64, len: usize) -> Result<SampleGrid> {
    SampleGrid::uniform(0.0, 1.0 / fs_hz, len)
}

/// Output of the full conditioning chain for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    /// Samples dropped by alignment.
    pub shift: usize,
    /// Aligned, scaled, truncated signal.
    pub signal: Vec<f64>,
    /// Finite-difference derivative of `signal`, when requested.
    pub derivative: Option<Vec<f64>>,
    /// One-sided magnitude spectrum of `signal`, when requested.
    pub signature: Option<Signature>,
}

/// Runs align → scale → truncate → (derivative | signature) on one record.
pub fn preprocess_signal(record: &SignalRecord, cfg: &PreprocessConfig) -> Result<Preprocessed> {
    cfg.validate()?;
    let (aligned, shift) = align_first_zero_crossing(&record.samples)?;
    if aligned.len() < cfg.truncate_len {
        return Err(Error::TooShort {
            need: cfg.truncate_len,
            have: aligned.len(),
        });
    }
    let scaled = scale_minmax(&aligned, cfg.target_range)?;
    let signal = scaled[..cfg.truncate_len].to_vec();
    let derivative = if cfg.derivative {
        let grid = time_grid(record.fs_hz, cfg.truncate_len)?;
        Some(finite_difference_derivative(&signal, &grid)?)
    } else {
        None
    };
    let signature = if cfg.signature {
        Some(fft_signature(&signal, record.fs_hz)?)
    } else {
        None
    };
    Ok(Preprocessed {
        shift,
        signal,
        derivative,
        signature,
    })
}
