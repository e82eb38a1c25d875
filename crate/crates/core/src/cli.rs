//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 input/format/I-O error, 4 empty
//! template store. Results go to stdout; diagnostics go to stderr as a single
//! line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audio_io::{add_noise, read_wav, synthesize, write_wav, ToneSequence};
use crate::csv::{matrix_to_csv, path_to_csv, read_matrix, signal_to_csv};
use crate::dtw::{dtw_align, dtw_cost_matrix, DtwConfig};
use crate::error::Error;
use crate::features::extract_features;
use crate::frontend::FrontEndConfig;
use crate::store::{load_store, recognize, save_template, validate_label, Template};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_EMPTY_STORE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wordmatch", version, about = "MFCC feature extraction and DTW word recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the feature matrix of a WAV file as CSV.
    Extract {
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        frontend: FrontEndArgs,
    },
    /// Enroll one template per WAV file under LABEL.
    Enroll {
        label: String,
        #[arg(required = true)]
        wavs: Vec<PathBuf>,
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        frontend: FrontEndArgs,
    },
    /// Rank enrolled labels by DTW distance to a WAV file.
    Recognize {
        wav: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        dtw: DtwArgs,
        /// Rank by raw accumulated distance instead of distance / (n + m).
        #[arg(long)]
        raw_distance: bool,
        /// Print only the best K labels.
        #[arg(long, value_name = "K")]
        top: Option<usize>,
        #[command(flatten)]
        frontend: FrontEndArgs,
    },
    /// Align two feature CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        dtw: DtwArgs,
    },
    /// Render a tone/chirp sequence to a WAV file.
    Synth {
        /// Comma-separated `F`, `F0-F1`, optionally `:WEIGHT`, e.g. `300,800-1200:2`.
        #[arg(long)]
        tones: String,
        #[arg(long, value_name = "SECONDS")]
        duration: f64,
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long, default_value_t = 16_000)]
        rate: u32,
        /// Add white Gaussian noise at this signal-to-noise ratio.
        #[arg(long, value_name = "DB")]
        noise_snr: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the CSV data behind a signal, MFCC, cost-matrix or path plot.
    ExportPlot {
        kind: PlotKind,
        /// One WAV for `signal`/`mfcc`; two feature CSVs for `costmatrix`/`path`.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        dtw: DtwArgs,
        #[command(flatten)]
        frontend: FrontEndArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PlotKind {
    Signal,
    Mfcc,
    Costmatrix,
    Path,
}

#[derive(Debug, Args)]
struct FrontEndArgs {
    #[arg(long, default_value_t = FrontEndConfig::default().preemphasis)]
    preemph: f64,
    #[arg(long, default_value_t = FrontEndConfig::default().frame_len)]
    frame_len: usize,
    #[arg(long, default_value_t = FrontEndConfig::default().frame_step)]
    frame_step: usize,
    #[arg(long, default_value_t = FrontEndConfig::default().fft_size)]
    fft_size: usize,
    #[arg(long, default_value_t = FrontEndConfig::default().num_filters)]
    nfilt: usize,
    #[arg(long, default_value_t = FrontEndConfig::default().num_ceps)]
    nceps: usize,
    #[arg(long, default_value_t = FrontEndConfig::default().sample_rate_hz)]
    rate: u32,
}

impl FrontEndArgs {
    fn config(&self) -> Result<FrontEndConfig, Failure> {
        let cfg = FrontEndConfig {
            preemphasis: self.preemph,
            frame_len: self.frame_len,
            frame_step: self.frame_step,
            fft_size: self.fft_size,
            num_filters: self.nfilt,
            num_ceps: self.nceps,
            sample_rate_hz: self.rate,
            ..FrontEndConfig::default()
        };
        cfg.validate().map_err(Failure::usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct DtwArgs {
    /// Band radius around the diagonal.
    #[arg(long, value_name = "R")]
    band: Option<usize>,
    /// Maximum consecutive same-axis steps.
    #[arg(long, value_name = "S", value_parser = clap::value_parser!(u64).range(1..))]
    max_run: Option<u64>,
}

impl DtwArgs {
    fn config(&self) -> DtwConfig {
        DtwConfig {
            band_radius: self.band,
            max_run: self.max_run.map(|s| s as usize),
            normalize: true,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoTemplates => EXIT_EMPTY_STORE,
            Error::InvalidLabel(_)
            | Error::InvalidConfig(_)
            | Error::BadFftSize { .. }
            | Error::TooManyFilters { .. }
            | Error::InvalidSpec(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return e.exit_code();
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Extract { wav, out: csv, frontend } => {
            let cfg = frontend.config()?;
            let features = extract_features(&read_wav(&wav)?, &cfg)?;
            fs::write(&csv, matrix_to_csv(features.matrix()))?;
            writeln!(out, "frames={} dims={}", features.num_frames(), features.dims())?;
        }
        Command::Enroll {
            label,
            wavs,
            store,
            frontend,
        } => {
            validate_label(&label)?;
            let cfg = frontend.config()?;
            let templates = wavs
                .iter()
                .map(|w| Template::new(label.clone(), extract_features(&read_wav(w)?, &cfg)?))
                .collect::<Result<Vec<_>, Error>>()?;
            fs::create_dir_all(&store)?;
            let mut store = load_store(&store)?;
            for template in templates {
                let path = save_template(&mut store, template)?;
                writeln!(out, "{}", path.display())?;
            }
        }
        Command::Recognize {
            wav,
            store,
            dtw,
            raw_distance,
            top,
            frontend,
        } => {
            let cfg = frontend.config()?;
            let store = load_store(&store)?;
            let query = extract_features(&read_wav(&wav)?, &cfg)?;
            let dtw_cfg = DtwConfig {
                normalize: !raw_distance,
                ..dtw.config()
            };
            let ranking = recognize(&store, &query, &dtw_cfg)?;
            let shown = top.unwrap_or(usize::MAX);
            for (label, distance) in ranking.entries.iter().take(shown) {
                writeln!(out, "{label}\t{distance}")?;
            }
        }
        Command::Compare { a, b, dtw } => {
            let (qa, qb) = (read_matrix(&a)?, read_matrix(&b)?);
            let w = dtw_align(&qa, &qb, &dtw.config())?;
            writeln!(
                out,
                "distance={} normalized={} path_len={}",
                w.distance,
                w.normalized_distance,
                w.path.len()
            )?;
        }
        Command::Synth {
            tones,
            duration,
            amplitude,
            rate,
            noise_snr,
            seed,
            out: wav,
        } => {
            let spec: ToneSequence = tones.parse()?;
            let mut signal = synthesize(&spec, rate, duration, amplitude)?;
            if let Some(snr) = noise_snr {
                signal = add_noise(&signal, snr, seed)?;
            }
            write_wav(&signal, &wav)?;
            writeln!(out, "samples={} rate={}", signal.len(), signal.sample_rate_hz)?;
        }
        Command::ExportPlot {
            kind,
            inputs,
            out: csv,
            dtw,
            frontend,
        } => {
            let wanted = match kind {
                PlotKind::Signal | PlotKind::Mfcc => 1,
                PlotKind::Costmatrix | PlotKind::Path => 2,
            };
            if inputs.len() != wanted {
                return Err(Failure::usage(format!(
                    "{kind:?} export takes {wanted} input(s), got {}",
                    inputs.len()
                )));
            }
            let text = match kind {
                PlotKind::Signal => signal_to_csv(&read_wav(&inputs[0])?),
                PlotKind::Mfcc => {
                    let cfg = frontend.config()?;
                    matrix_to_csv(extract_features(&read_wav(&inputs[0])?, &cfg)?.matrix())
                }
                PlotKind::Costmatrix => {
                    let (q, c) = (read_matrix(&inputs[0])?, read_matrix(&inputs[1])?);
                    matrix_to_csv(&dtw_cost_matrix(&q, &c, &dtw.config())?)
                }
                PlotKind::Path => {
                    let (q, c) = (read_matrix(&inputs[0])?, read_matrix(&inputs[1])?);
                    path_to_csv(&dtw_align(&q, &c, &dtw.config())?.path)
                }
            };
            fs::write(&csv, text)?;
        }
    }
    Ok(())
}
