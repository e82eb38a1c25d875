//! 39-dimensional feature assembly: cepstra plus log energy, with first and
//! second differences.

use crate::audio_io::Signal;
use crate::error::{Error, Result};
use crate::frontend::{frame, hamming_window, preemphasize, FrontEndConfig};
use crate::matrix::Matrix;
use crate::spectral::{apply_filterbank_log, build_filterbank, dct_cepstra, fft_power};

/// Per-frame feature vectors.
///
/// Column layout for `K = num_ceps`: `0..K` cepstra c1..cK, `K` log energy,
/// then the delta of those `K + 1` columns, then the delta of the deltas.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    data: Matrix,
    config: FrontEndConfig,
}

impl FeatureMatrix {
    /// Wraps a full `T × 3(K+1)` matrix, checking shape and finiteness.
    pub fn new(data: Matrix, config: FrontEndConfig) -> Result<Self> {
        let dims = config.feature_dims();
        if data.cols() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: data.cols(),
            });
        }
        if data.rows() == 0 {
            return Err(Error::EmptySequence);
        }
        if let Some(bad) = data.as_slice().iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite feature value {bad}")));
        }
        Ok(Self { data, config })
    }

    /// Builds the full matrix from the `T × (K+1)` static stream.
    pub fn from_static(base: Matrix, config: FrontEndConfig) -> Result<Self> {
        let d1 = delta(&base);
        let d2 = delta(&d1);
        Self::new(Matrix::hstack(&[&base, &d1, &d2]), config)
    }

    pub fn num_frames(&self) -> usize {
        self.data.rows()
    }

    pub fn dims(&self) -> usize {
        self.data.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn config(&self) -> &FrontEndConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> String {
        self.config.fingerprint()
    }

    /// Cepstra and log energy, without the difference streams.
    pub fn static_features(&self) -> Matrix {
        self.data.columns(0..self.config.num_ceps + 1)
    }

    /// True when both difference streams equal a fresh recomputation.
    pub fn deltas_consistent(&self) -> bool {
        let k = self.config.num_ceps + 1;
        let d1 = delta(&self.static_features());
        let d2 = delta(&d1);
        self.data.columns(k..2 * k) == d1 && self.data.columns(2 * k..3 * k) == d2
    }

    /// Multiplies every entry by `factor`, keeping the config.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.map(|v| v * factor),
            config: self.config.clone(),
        }
    }
}

/// `ln(max(Σ x², eps))` over the given samples.
pub fn frame_energy(frame: &[f64], eps: f64) -> f64 {
    frame.iter().map(|x| x * x).sum::<f64>().max(eps).ln()
}

/// Central difference `(c[t+1] - c[t-1]) / 2` per column, with the first and
/// last rows replicated past the ends.
pub fn delta(stream: &Matrix) -> Matrix {
    let rows = stream.rows();
    let mut out = Matrix::zeros(rows, stream.cols());
    for t in 0..rows {
        let prev = stream.row(t.saturating_sub(1));
        let next = stream.row((t + 1).min(rows - 1));
        for (o, (n, p)) in out.row_mut(t).iter_mut().zip(next.iter().zip(prev)) {
            *o = (n - p) / 2.0;
        }
    }
    out
}

/// Intermediate outputs of one front-end run.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// `T × num_filters` log filterbank energies.
    pub log_mel: Matrix,
    /// `T × num_ceps` cepstra c1..cK.
    pub cepstra: Matrix,
    /// Log energy of each pre-emphasized, unwindowed frame.
    pub log_energy: Vec<f64>,
}

/// Runs the front end up to (and including) the cepstra.
pub fn analyze(signal: &Signal, cfg: &FrontEndConfig) -> Result<Analysis> {
    cfg.validate()?;
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    if signal.sample_rate_hz != cfg.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            signal: signal.sample_rate_hz,
            config: cfg.sample_rate_hz,
        });
    }
    let emphasized = preemphasize(signal, cfg.preemphasis)?;
    let frames = frame(&emphasized, cfg)?;
    let log_energy = frames
        .frames
        .iter_rows()
        .map(|f| frame_energy(f, cfg.log_floor))
        .collect();
    let windowed = hamming_window(&frames)?;
    let power = fft_power(&windowed, cfg.fft_size)?;
    let bank = build_filterbank(cfg)?;
    let log_mel = apply_filterbank_log(&power, &bank, cfg.log_floor)?;
    let cepstra = dct_cepstra(&log_mel, cfg.num_ceps)?;
    Ok(Analysis {
        log_mel,
        cepstra,
        log_energy,
    })
}

/// Full pipeline from samples to a [`FeatureMatrix`].
pub fn extract_features(signal: &Signal, cfg: &FrontEndConfig) -> Result<FeatureMatrix> {
    let analysis = analyze(signal, cfg)?;
    let energy = Matrix::from_vec(analysis.log_energy.len(), 1, analysis.log_energy);
    let base = Matrix::hstack(&[&analysis.cepstra, &energy]);
    FeatureMatrix::from_static(base, cfg.clone())
}
