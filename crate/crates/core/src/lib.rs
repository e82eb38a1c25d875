//! Isolated-word recognition from speech audio.
//!
//! The pipeline turns a mono PCM [`Signal`] into a sequence of 39-dimensional
//! MFCC feature vectors (12 cepstra, log energy, and their first and second
//! differences), then matches that sequence against enrolled templates with
//! dynamic time warping.
//!
//! ```
//! use wordmatch::{extract_features, synthesize, FrontEndConfig, ToneSequence};
//!
//! let tones: ToneSequence = "1000".parse().unwrap();
//! let signal = synthesize(&tones, 16_000, 1.0, 0.5).unwrap();
//! let features = extract_features(&signal, &FrontEndConfig::default()).unwrap();
//! assert_eq!((features.num_frames(), features.dims()), (158, 39));
//! ```

pub mod audio_io;
pub mod cli;
pub mod csv;
pub mod dtw;
mod error;
pub mod features;
pub mod frontend;
pub mod matrix;
pub mod spectral;
pub mod store;

pub use audio_io::{add_noise, read_wav, synthesize, write_wav, Signal, ToneSegment, ToneSequence};
pub use dtw::{dtw_align, dtw_cost_matrix, local_distance, DtwConfig, WarpResult};
pub use error::{Error, Result};
pub use features::{delta, extract_features, frame_energy, FeatureMatrix};
pub use frontend::{frame, hamming_window, preemphasize, FrameMatrix, FrontEndConfig};
pub use matrix::Matrix;
pub use spectral::{
    apply_filterbank_log, build_filterbank, dct_cepstra, fft_power, hz_to_mel, mel_to_hz,
    MelFilterBank, PowerSpectrum,
};
pub use store::{load_store, recognize, save_template, Ranking, Store, Template};
