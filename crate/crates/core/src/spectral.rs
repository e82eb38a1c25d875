//! Frequency-domain stages: power spectrum, mel filterbank, log compression
//! and the cepstral DCT.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frontend::{FrameMatrix, FrontEndConfig};
use crate::matrix::Matrix;

/// In-place iterative radix-2 decimation-in-time FFT.
///
/// Panics if the length is not a power of two.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n < 2 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = -2.0 * PI / len as f64;
        // twiddles computed directly per index; recurrence drifts at large n
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, step * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// `|X(k)|²` for bins `0..=fft_size/2` of every frame.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpectrum {
    pub bins: Matrix,
}

/// Zero-pads each frame to `fft_size`, transforms it and keeps the
/// non-negative-frequency power bins.
pub fn fft_power(frames: &FrameMatrix, fft_size: usize) -> Result<PowerSpectrum> {
    if !fft_size.is_power_of_two() || fft_size < frames.frame_len() {
        return Err(Error::BadFftSize {
            size: fft_size,
            frame_len: frames.frame_len(),
        });
    }
    let num_bins = fft_size / 2 + 1;
    let mut bins = Matrix::zeros(frames.num_frames(), num_bins);
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    for t in 0..frames.num_frames() {
        buf.fill(Complex64::new(0.0, 0.0));
        for (slot, &x) in buf.iter_mut().zip(frames.frames.row(t)) {
            slot.re = x;
        }
        fft_in_place(&mut buf);
        for (out, z) in bins.row_mut(t).iter_mut().zip(&buf) {
            *out = z.norm_sqr();
        }
    }
    Ok(PowerSpectrum { bins })
}

/// `2595 log10(1 + f/700)`.
pub fn hz_to_mel(f_hz: f64) -> Result<f64> {
    if f_hz < 0.0 || f_hz.is_nan() {
        return Err(Error::NegativeFrequency(f_hz));
    }
    Ok(2595.0 * (1.0 + f_hz / 700.0).log10())
}

pub fn mel_to_hz(mel: f64) -> Result<f64> {
    if mel < 0.0 || mel.is_nan() {
        return Err(Error::NegativeMel(mel));
    }
    Ok(700.0 * (10f64.powf(mel / 2595.0) - 1.0))
}

/// Triangular filters spaced evenly on the mel axis from 0 Hz to Nyquist.
#[derive(Clone, Debug, PartialEq)]
pub struct MelFilterBank {
    pub num_filters: usize,
    pub fft_size: usize,
    pub sample_rate_hz: u32,
    /// `num_filters × (fft_size/2 + 1)`.
    pub weights: Matrix,
    /// FFT bin of each filter's apex.
    pub center_bins: Vec<usize>,
    /// `num_filters + 2` edge bins; filter `m` spans `edges[m]..=edges[m + 2]`.
    pub edge_bins: Vec<usize>,
}

impl MelFilterBank {
    /// Center frequency of filter `m` in Hz, at its bin's resolution.
    pub fn center_hz(&self, m: usize) -> f64 {
        self.center_bins[m] as f64 * f64::from(self.sample_rate_hz) / self.fft_size as f64
    }
}

pub fn build_filterbank(cfg: &FrontEndConfig) -> Result<MelFilterBank> {
    cfg.validate()?;
    let nf = cfg.num_filters;
    let fs = f64::from(cfg.sample_rate_hz);
    let num_bins = cfg.fft_size / 2 + 1;
    let mel_max = hz_to_mel(fs / 2.0)?;

    let mut edge_bins = Vec::with_capacity(nf + 2);
    for j in 0..nf + 2 {
        let mel = mel_max * j as f64 / (nf + 1) as f64;
        let hz = mel_to_hz(mel)?;
        let bin = (((cfg.fft_size + 1) as f64 * hz / fs).floor() as usize).min(num_bins - 1);
        edge_bins.push(bin);
    }

    let mut weights = Matrix::zeros(nf, num_bins);
    for m in 0..nf {
        let (left, center, right) = (edge_bins[m], edge_bins[m + 1], edge_bins[m + 2]);
        if left >= center {
            return Err(Error::TooManyFilters { filter: m, bin: center });
        }
        if center >= right {
            return Err(Error::TooManyFilters { filter: m, bin: right });
        }
        let row = weights.row_mut(m);
        for k in left..=center {
            row[k] = (k - left) as f64 / (center - left) as f64;
        }
        for k in center..=right {
            row[k] = (right - k) as f64 / (right - center) as f64;
        }
    }

    Ok(MelFilterBank {
        num_filters: nf,
        fft_size: cfg.fft_size,
        sample_rate_hz: cfg.sample_rate_hz,
        weights,
        center_bins: edge_bins[1..=nf].to_vec(),
        edge_bins,
    })
}

/// `ln(max(Σ_k weights[m][k] · power[t][k], eps))` for every frame and filter.
pub fn apply_filterbank_log(power: &PowerSpectrum, fb: &MelFilterBank, eps: f64) -> Result<Matrix> {
    if power.bins.cols() != fb.weights.cols() {
        return Err(Error::DimensionMismatch {
            expected: fb.weights.cols(),
            actual: power.bins.cols(),
        });
    }
    let mut out = Matrix::zeros(power.bins.rows(), fb.num_filters);
    for t in 0..power.bins.rows() {
        let spectrum = power.bins.row(t);
        for m in 0..fb.num_filters {
            let energy: f64 = fb.weights.row(m).iter().zip(spectrum).map(|(w, p)| w * p).sum();
            out[(t, m)] = energy.max(eps).ln();
        }
    }
    Ok(out)
}

/// Orthonormal DCT-II of one vector.
pub fn dct_ii(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            scale
                * x.iter()
                    .enumerate()
                    .map(|(i, v)| v * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Orthonormal DCT-II across filters, keeping coefficients `1..=num_ceps`
/// (c0 is discarded; log energy takes its place downstream).
pub fn dct_cepstra(log_mel: &Matrix, num_ceps: usize) -> Result<Matrix> {
    if num_ceps >= log_mel.cols() {
        return Err(Error::DimensionMismatch {
            expected: log_mel.cols().saturating_sub(1),
            actual: num_ceps,
        });
    }
    let mut out = Matrix::zeros(log_mel.rows(), num_ceps);
    for t in 0..log_mel.rows() {
        let coeffs = dct_ii(log_mel.row(t));
        out.row_mut(t).copy_from_slice(&coeffs[1..=num_ceps]);
    }
    Ok(out)
}
