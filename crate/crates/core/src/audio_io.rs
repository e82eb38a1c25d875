//! Signal ingestion: 16-bit mono PCM WAV I/O and deterministic test-signal
//! synthesis.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Decode divisor: 16-bit code `v` becomes `v / 32768`.
pub const DECODE_SCALE: f64 = 32768.0;

/// Mono audio samples in `[-1.0, 1.0]` with their sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }
}

const PCM_FORMAT_TAG: u16 = 1;

struct Fmt {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn u16_le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32_le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Reads a 16-bit mono integer-PCM WAV file.
///
/// Unknown chunks (`LIST`, `fact`, ...) are skipped. Samples are scaled by
/// 1/32768 so the full code range maps into `[-1.0, 1.0)`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode_wav(&bytes)
}

/// Decodes an in-memory WAV image. See [`read_wav`].
pub fn decode_wav(bytes: &[u8]) -> Result<Signal> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::NotWav("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<Fmt> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_le(&bytes[pos + 4..pos + 8]) as usize;
        let body_start = pos + 8;
        let available = bytes.len() - body_start;

        match id {
            b"fmt " => {
                if size < 16 || available < 16 {
                    return Err(Error::NotWav(format!("fmt chunk too short ({size} bytes)")));
                }
                let b = &bytes[body_start..];
                fmt = Some(Fmt {
                    format_tag: u16_le(&b[0..2]),
                    channels: u16_le(&b[2..4]),
                    sample_rate: u32_le(&b[4..8]),
                    bits_per_sample: u16_le(&b[14..16]),
                });
            }
            b"data" => {
                let fmt = fmt
                    .as_ref()
                    .ok_or_else(|| Error::NotWav("data chunk precedes fmt chunk".into()))?;
                check_fmt(fmt)?;
                if size > available {
                    return Err(Error::TruncatedData(format!(
                        "data chunk declares {size} bytes but only {available} remain"
                    )));
                }
                if size % 2 != 0 {
                    return Err(Error::TruncatedData(format!(
                        "data chunk size {size} is not a whole number of 16-bit samples"
                    )));
                }
                let samples = bytes[body_start..body_start + size]
                    .chunks_exact(2)
                    .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / DECODE_SCALE)
                    .collect();
                return Ok(Signal::new(samples, fmt.sample_rate));
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }

    match fmt {
        None => Err(Error::NotWav("no fmt chunk".into())),
        Some(_) => Err(Error::NotWav("no data chunk".into())),
    }
}

fn check_fmt(fmt: &Fmt) -> Result<()> {
    if fmt.format_tag != PCM_FORMAT_TAG {
        return Err(Error::UnsupportedFormat(format!(
            "format tag {} (only integer PCM is supported)",
            fmt.format_tag
        )));
    }
    if fmt.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels (only mono is supported)",
            fmt.channels
        )));
    }
    if fmt.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{} bits per sample (only 16-bit is supported)",
            fmt.bits_per_sample
        )));
    }
    if fmt.sample_rate == 0 {
        return Err(Error::UnsupportedFormat("sample rate 0".into()));
    }
    Ok(())
}

/// Quantizes one sample to a 16-bit code: `round(s * 32768)` clamped to the
/// i16 range, so every code produced by [`read_wav`] encodes back to itself.
pub fn encode_sample(s: f64) -> i16 {
    (s * DECODE_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

/// Serializes a signal as a canonical 44-byte-header WAV image.
pub fn encode_wav(signal: &Signal) -> Result<Vec<u8>> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let data_len = u32::try_from(signal.len() * 2)
        .ok()
        .filter(|n| *n <= u32::MAX - 36)
        .ok_or_else(|| Error::UnsupportedFormat("signal too long for a RIFF container".into()))?;

    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM_FORMAT_TAG.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&signal.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(signal.sample_rate_hz * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &signal.samples {
        out.extend_from_slice(&encode_sample(s).to_le_bytes());
    }
    Ok(out)
}

pub fn write_wav(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_wav(signal)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// One segment of a synthetic utterance: a linear chirp from `start_hz` to
/// `end_hz` (a pure tone when they are equal), lasting `weight` shares of the
/// total duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToneSegment {
    pub start_hz: f64,
    pub end_hz: f64,
    pub weight: f64,
}

impl ToneSegment {
    pub fn tone(hz: f64) -> Self {
        Self::chirp(hz, hz)
    }

    pub fn chirp(start_hz: f64, end_hz: f64) -> Self {
        Self {
            start_hz,
            end_hz,
            weight: 1.0,
        }
    }

    pub fn weighted(self, weight: f64) -> Self {
        Self { weight, ..self }
    }
}

/// Ordered tone/chirp segments.
///
/// Text form: comma-separated `F`, `F0-F1`, optionally suffixed `:WEIGHT`,
/// e.g. `300,800-1200:2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToneSequence {
    pub segments: Vec<ToneSegment>,
}

impl ToneSequence {
    pub fn new(segments: Vec<ToneSegment>) -> Self {
        Self { segments }
    }
}

impl FromStr for ToneSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSpec(format!("`{t}` is not a number")))
        };
        let mut segments = Vec::new();
        for part in s.split(',') {
            let (freqs, weight) = match part.split_once(':') {
                Some((f, w)) => (f, parse_num(w)?),
                None => (part, 1.0),
            };
            let (start_hz, end_hz) = match freqs.split_once('-') {
                Some((a, b)) => (parse_num(a)?, parse_num(b)?),
                None => {
                    let f = parse_num(freqs)?;
                    (f, f)
                }
            };
            segments.push(ToneSegment {
                start_hz,
                end_hz,
                weight,
            });
        }
        Ok(Self { segments })
    }
}

/// Renders a tone sequence at `amplitude` for `duration_s` seconds.
///
/// Phase is continuous across segment boundaries. The output depends only on
/// the arguments.
pub fn synthesize(
    spec: &ToneSequence,
    sample_rate_hz: u32,
    duration_s: f64,
    amplitude: f64,
) -> Result<Signal> {
    if sample_rate_hz == 0 {
        return Err(Error::InvalidSpec("sample rate must be positive".into()));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::InvalidSpec(format!("duration {duration_s} s is not positive")));
    }
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::InvalidSpec(format!("amplitude {amplitude} outside [0, 1]")));
    }
    if spec.segments.is_empty() {
        return Err(Error::InvalidSpec("no segments".into()));
    }
    let fs = f64::from(sample_rate_hz);
    let nyquist = fs / 2.0;
    for seg in &spec.segments {
        for f in [seg.start_hz, seg.end_hz] {
            if !(f.is_finite() && f >= 0.0 && f < nyquist) {
                return Err(Error::InvalidSpec(format!(
                    "frequency {f} Hz outside [0, {nyquist}) for a {sample_rate_hz} Hz rate"
                )));
            }
        }
        if !(seg.weight.is_finite() && seg.weight > 0.0) {
            return Err(Error::InvalidSpec(format!("segment weight {} is not positive", seg.weight)));
        }
    }

    let total = (duration_s * fs).round() as usize;
    if total == 0 {
        return Err(Error::InvalidSpec(format!("duration {duration_s} s yields no samples")));
    }
    let weight_sum: f64 = spec.segments.iter().map(|s| s.weight).sum();

    let mut samples = Vec::with_capacity(total);
    let mut cumulative = 0.0;
    let mut phase0 = 0.0;
    for seg in &spec.segments {
        cumulative += seg.weight;
        let end = ((cumulative / weight_sum) * total as f64).round() as usize;
        let len = end.min(total).saturating_sub(samples.len());
        let seg_dur = len as f64 / fs;
        let sweep = seg.end_hz - seg.start_hz;
        for u in 0..len {
            let t = u as f64 / fs;
            let phase = if sweep == 0.0 {
                2.0 * PI * seg.start_hz * u as f64 / fs
            } else {
                2.0 * PI * (seg.start_hz * t + sweep * t * t / (2.0 * seg_dur))
            };
            samples.push(amplitude * (phase0 + phase).sin());
        }
        phase0 = (phase0 + PI * seg_dur * (seg.start_hz + seg.end_hz)) % (2.0 * PI);
    }
    Ok(Signal::new(samples, sample_rate_hz))
}

/// Adds seeded white Gaussian noise at the given signal-to-noise ratio (dB),
/// clamping the result to `[-1, 1]`.
pub fn add_noise(signal: &Signal, snr_db: f64, seed: u64) -> Result<Signal> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidSpec(format!("SNR {snr_db} dB is not finite")));
    }
    let power = signal.samples.iter().map(|s| s * s).sum::<f64>() / signal.len() as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidSpec(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = signal
        .samples
        .iter()
        .map(|&s| (s + normal.sample(&mut rng)).clamp(-1.0, 1.0))
        .collect();
    Ok(Signal::new(samples, signal.sample_rate_hz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wav_bytes(channels: u16, bits: u16, format: u16, data: &[u8], declared: Option<u32>) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&16000u32.to_le_bytes());
        out.extend_from_slice(&(16000u32 * u32::from(channels) * u32::from(bits) / 8).to_le_bytes());
        out.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&declared.unwrap_or(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    fn pcm(codes: &[i16]) -> Vec<u8> {
        codes.iter().flat_map(|c| c.to_le_bytes()).collect()
    }

    fn data_chunk(image: &[u8]) -> &[u8] {
        &image[44..]
    }

    #[test]
    fn decodes_three_known_samples() {
        let sig = decode_wav(&wav_bytes(1, 16, 1, &pcm(&[0, 16384, -32768]), None)).unwrap();
        assert_eq!(sig.samples, vec![0.0, 0.5, -1.0]);
        assert_eq!(sig.sample_rate_hz, 16000);
    }

    #[test]
    fn rejects_stereo_with_channel_message() {
        let err = decode_wav(&wav_bytes(2, 16, 1, &pcm(&[0, 0]), None)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
        assert!(err.to_string().contains("channels"));
    }

    #[test]
    fn rejects_non_pcm_and_other_depths() {
        assert!(matches!(
            decode_wav(&wav_bytes(1, 16, 3, &pcm(&[0]), None)),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_wav(&wav_bytes(1, 8, 1, &[0, 0], None)),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = wav_bytes(1, 16, 1, &pcm(&[0]), None);
        bytes[8..12].copy_from_slice(b"AVI ");
        assert!(matches!(decode_wav(&bytes), Err(Error::NotWav(_))));
        assert!(matches!(decode_wav(b"RIFF"), Err(Error::NotWav(_))));
    }

    #[test]
    fn rejects_short_data_chunk() {
        let bytes = wav_bytes(1, 16, 1, &pcm(&[1, 2]), Some(400));
        assert!(matches!(decode_wav(&bytes), Err(Error::TruncatedData(_))));
    }

    #[test]
    fn missing_file() {
        let err = read_wav("/definitely/not/here.wav").unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn skips_unknown_chunks() {
        let plain = wav_bytes(1, 16, 1, &pcm(&[5, -5, 7]), None);
        // insert an odd-sized LIST chunk (padded) between fmt and data
        let mut with_list = plain[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(&[b'a', b'b', b'c', 0]);
        with_list.extend_from_slice(&plain[36..]);
        assert_eq!(decode_wav(&with_list).unwrap(), decode_wav(&plain).unwrap());
    }

    #[test]
    fn encoding_boundaries() {
        let enc = |s: f64| encode_wav(&Signal::new(vec![s], 16000)).unwrap();
        assert_eq!(data_chunk(&enc(0.0)), &0i16.to_le_bytes());
        assert_eq!(data_chunk(&enc(1.0)), &32767i16.to_le_bytes());
        // -1.0 is the decode of code -32768 and must encode back to it
        let bytes = enc(-1.0);
        assert_eq!(data_chunk(&bytes), &(-32768i16).to_le_bytes());
        assert_eq!(decode_wav(&bytes).unwrap().samples, vec![-1.0]);
        assert_eq!(encode_sample(2.5), 32767);
        assert_eq!(encode_sample(-7.0), -32768);
    }

    #[test]
    fn empty_signal_not_written() {
        assert!(matches!(encode_wav(&Signal::new(vec![], 16000)), Err(Error::EmptySignal)));
    }

    #[test]
    fn write_then_read_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let sig = Signal::new(vec![0.25, -0.5, 0.0, 0.999969482421875], 8000);
        write_wav(&sig, &path).unwrap();
        assert_eq!(read_wav(&path).unwrap(), sig);
    }

    #[test]
    fn sine_matches_closed_form() {
        let spec: ToneSequence = "1000".parse().unwrap();
        let sig = synthesize(&spec, 16000, 0.01, 0.5).unwrap();
        assert_eq!(sig.len(), 160);
        assert!((sig.samples[4] - 0.5).abs() < 1e-12);
        for (n, s) in sig.samples.iter().enumerate() {
            let expected = 0.5 * (2.0 * PI * 1000.0 * n as f64 / 16000.0).sin();
            assert!((s - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_amplitude_is_silence() {
        let spec: ToneSequence = "300,500-900".parse().unwrap();
        let sig = synthesize(&spec, 16000, 0.2, 0.0).unwrap();
        assert!(sig.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn nyquist_violation_rejected() {
        let spec: ToneSequence = "9000".parse().unwrap();
        assert!(matches!(synthesize(&spec, 16000, 1.0, 0.5), Err(Error::InvalidSpec(_))));
        let spec: ToneSequence = "1000".parse().unwrap();
        assert!(matches!(synthesize(&spec, 16000, 0.0, 0.5), Err(Error::InvalidSpec(_))));
        assert!(matches!(synthesize(&spec, 16000, -1.0, 0.5), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn segments_split_by_weight_with_continuous_phase() {
        let spec: ToneSequence = "400:1,400-800:3".parse().unwrap();
        assert_eq!(spec.segments[1], ToneSegment::chirp(400.0, 800.0).weighted(3.0));
        let sig = synthesize(&spec, 16000, 0.5, 0.8).unwrap();
        assert_eq!(sig.len(), 8000);
        let max_step = sig.samples.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        // at most 800 Hz: |ds/dn| <= 0.8 * 2π * 800 / 16000
        assert!(max_step <= 0.8 * 2.0 * PI * 800.0 / 16000.0 + 1e-9);
    }

    #[test]
    fn tone_spec_parse_errors() {
        assert!("abc".parse::<ToneSequence>().is_err());
        assert!("100-".parse::<ToneSequence>().is_err());
        assert!("100:x".parse::<ToneSequence>().is_err());
    }

    #[test]
    fn noise_hits_requested_snr() {
        let spec: ToneSequence = "700".parse().unwrap();
        let clean = synthesize(&spec, 16000, 1.0, 0.5).unwrap();
        let noisy = add_noise(&clean, 30.0, 7).unwrap();
        assert_eq!(noisy, add_noise(&clean, 30.0, 7).unwrap());
        let ps: f64 = clean.samples.iter().map(|s| s * s).sum();
        let pn: f64 = clean.samples.iter().zip(&noisy.samples).map(|(a, b)| (a - b).powi(2)).sum();
        let snr = 10.0 * (ps / pn).log10();
        assert!((snr - 30.0).abs() < 0.5, "snr {snr}");
    }

    proptest! {
        #[test]
        fn pcm_codes_round_trip(codes in prop::collection::vec(any::<i16>(), 1..300)) {
            let image = wav_bytes(1, 16, 1, &pcm(&codes), None);
            let signal = decode_wav(&image).unwrap();
            let again = encode_wav(&signal).unwrap();
            prop_assert_eq!(data_chunk(&again), data_chunk(&image));
            prop_assert_eq!(decode_wav(&again).unwrap(), signal);
        }

        #[test]
        fn synthesis_is_deterministic(f0 in 0.0..7999.0f64, f1 in 0.0..7999.0f64, dur in 0.01..0.3f64, amp in 0.0..1.0f64) {
            let spec = ToneSequence::new(vec![ToneSegment::tone(f0), ToneSegment::chirp(f0, f1)]);
            let a = synthesize(&spec, 16000, dur, amp).unwrap();
            let b = synthesize(&spec, 16000, dur, amp).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.samples.iter().all(|s| s.abs() <= amp));
        }
    }
}
