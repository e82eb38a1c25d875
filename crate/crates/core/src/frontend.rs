//! Time-domain conditioning: pre-emphasis, framing and Hamming windowing.

use std::f64::consts::PI;
use std::fmt;

use crate::audio_io::Signal;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Every constant of the feature pipeline.
///
/// Two configs produce interchangeable features iff their
/// [`fingerprint`](Self::fingerprint) strings are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontEndConfig {
    /// Pre-emphasis coefficient `a` in `y[n] = x[n] - a x[n-1]`.
    pub preemphasis: f64,
    /// Frame length in samples.
    pub frame_len: usize,
    /// Hop between frame starts in samples.
    pub frame_step: usize,
    pub fft_size: usize,
    pub num_filters: usize,
    /// Cepstral coefficients kept per frame (c1..c_num_ceps).
    pub num_ceps: usize,
    pub sample_rate_hz: u32,
    /// Floor applied before every logarithm.
    pub log_floor: f64,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self {
            preemphasis: 0.95,
            frame_len: 256,
            frame_step: 100,
            fft_size: 256,
            num_filters: 26,
            num_ceps: 12,
            sample_rate_hz: 16_000,
            log_floor: 1e-10,
        }
    }
}

impl FrontEndConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..1.0).contains(&self.preemphasis) {
            return bad(format!("pre-emphasis {} outside [0, 1)", self.preemphasis));
        }
        if self.frame_len < 2 {
            return bad(format!("frame length {} below 2", self.frame_len));
        }
        if self.frame_step == 0 || self.frame_step > self.frame_len {
            return bad(format!(
                "frame step {} outside [1, frame length {}]",
                self.frame_step, self.frame_len
            ));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < self.frame_len {
            return Err(Error::BadFftSize {
                size: self.fft_size,
                frame_len: self.frame_len,
            });
        }
        if self.num_filters < 2 {
            return bad(format!("{} filters, need at least 2", self.num_filters));
        }
        if self.num_ceps == 0 || self.num_ceps >= self.num_filters {
            return bad(format!(
                "cepstral count {} outside [1, filters {})",
                self.num_ceps, self.num_filters
            ));
        }
        if self.sample_rate_hz == 0 {
            return bad("sample rate 0".into());
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return bad(format!("log floor {} is not positive", self.log_floor));
        }
        Ok(())
    }

    /// Width of one feature vector: cepstra + energy, times three streams.
    pub fn feature_dims(&self) -> usize {
        3 * (self.num_ceps + 1)
    }

    /// Canonical `a=..;N=..;M=..;fft=..;nfilt=..;nceps=..;fs=..;eps=..` string.
    pub fn fingerprint(&self) -> String {
        self.to_string()
    }

    /// Parses a string produced by [`fingerprint`](Self::fingerprint).
    pub fn from_fingerprint(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("malformed fingerprint `{s}`"));
        let mut fields = s.split(';').map(|kv| kv.split_once('='));
        let mut take = |key: &str| -> Result<&str> {
            match fields.next().flatten() {
                Some((k, v)) if k == key => Ok(v),
                _ => Err(bad()),
            }
        };
        let cfg = Self {
            preemphasis: take("a")?.parse().map_err(|_| bad())?,
            frame_len: take("N")?.parse().map_err(|_| bad())?,
            frame_step: take("M")?.parse().map_err(|_| bad())?,
            fft_size: take("fft")?.parse().map_err(|_| bad())?,
            num_filters: take("nfilt")?.parse().map_err(|_| bad())?,
            num_ceps: take("nceps")?.parse().map_err(|_| bad())?,
            sample_rate_hz: take("fs")?.parse().map_err(|_| bad())?,
            log_floor: take("eps")?.parse().map_err(|_| bad())?,
        };
        if fields.next().is_some() {
            return Err(bad());
        }
        // reject non-canonical spellings such as `a=0.950`
        if cfg.fingerprint() != s {
            return Err(bad());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of frames produced for a signal of `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        (len.max(self.frame_len) - self.frame_len) / self.frame_step + 1
    }
}

impl fmt::Display for FrontEndConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={};N={};M={};fft={};nfilt={};nceps={};fs={};eps={}",
            self.preemphasis,
            self.frame_len,
            self.frame_step,
            self.fft_size,
            self.num_filters,
            self.num_ceps,
            self.sample_rate_hz,
            self.log_floor
        )
    }
}

/// First-order high-pass `y[n] = x[n] - a x[n-1]`, with `x[-1] = 0`.
pub fn preemphasize(signal: &Signal, a: f64) -> Result<Signal> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let x = &signal.samples;
    let mut y = Vec::with_capacity(x.len());
    y.push(x[0]);
    y.extend(x.windows(2).map(|w| w[1] - a * w[0]));
    Ok(Signal::new(y, signal.sample_rate_hz))
}

/// Overlapping fixed-length frames, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMatrix {
    pub frames: Matrix,
    pub frame_step: usize,
}

impl FrameMatrix {
    pub fn num_frames(&self) -> usize {
        self.frames.rows()
    }

    pub fn frame_len(&self) -> usize {
        self.frames.cols()
    }
}

/// Splits a signal into frames of `cfg.frame_len` samples starting every
/// `cfg.frame_step` samples.
///
/// A signal shorter than one frame is zero-padded to a single frame; trailing
/// samples that do not fill a whole frame are dropped.
pub fn frame(signal: &Signal, cfg: &FrontEndConfig) -> Result<FrameMatrix> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    cfg.validate()?;
    let (n, m) = (cfg.frame_len, cfg.frame_step);
    let mut padded;
    let samples = if signal.len() < n {
        padded = signal.samples.clone();
        padded.resize(n, 0.0);
        &padded[..]
    } else {
        &signal.samples[..]
    };
    let count = cfg.num_frames(samples.len());
    let mut data = Vec::with_capacity(count * n);
    for t in 0..count {
        data.extend_from_slice(&samples[t * m..t * m + n]);
    }
    Ok(FrameMatrix {
        frames: Matrix::from_vec(count, n, data),
        frame_step: m,
    })
}

/// Symmetric Hamming window `w(n) = 0.54 - 0.46 cos(2πn / (N - 1))`.
pub fn hamming(len: usize) -> Vec<f64> {
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

pub fn hamming_window(frames: &FrameMatrix) -> Result<FrameMatrix> {
    let n = frames.frame_len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("window length {n} below 2")));
    }
    let w = hamming(n);
    let mut out = frames.clone();
    for t in 0..out.num_frames() {
        for (x, wn) in out.frames.row_mut(t).iter_mut().zip(&w) {
            *x *= wn;
        }
    }
    Ok(out)
}
