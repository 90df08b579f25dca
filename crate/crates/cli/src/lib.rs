//! `glct` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glct_core::{ChirpMode, Error, GlctOptions, LctParams, ScalingMode};

pub mod commands;
pub mod verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "glct",
    version,
    about = "Linear canonical transforms on graphs"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the GLCT to a signal.
    Transform(TransformArgs),
    /// Apply the inverse GLCT to a spectrum.
    Inverse(TransformArgs),
    /// Generate graph or signal fixtures.
    Gen(GenArgs),
    /// Run the property suite and print a report.
    Verify(VerifyArgs),
    /// Compose two parameter matrices.
    Compose(ComposeArgs),
    /// Export per-vertex CSVs for plotting.
    PlotData(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChirpModeArg {
    Spectral,
    Vertex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalingModeArg {
    Gft,
    Adjacency,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OptionArgs {
    #[arg(long, value_enum, default_value = "spectral")]
    pub chirp_mode: ChirpModeArg,
    #[arg(long, value_enum, default_value = "gft")]
    pub scaling_mode: ScalingModeArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub chirp_offset: f64,
}

impl OptionArgs {
    pub fn options(&self) -> GlctOptions {
        GlctOptions {
            chirp_mode: match self.chirp_mode {
                ChirpModeArg::Spectral => ChirpMode::SpectralIndex,
                ChirpModeArg::Vertex => ChirpMode::VertexNormalized,
            },
            scaling_mode: match self.scaling_mode {
                ScalingModeArg::Gft => ScalingMode::GftEigenbasis,
                ScalingModeArg::Adjacency => ScalingMode::AdjacencyEigenbasis,
            },
            chirp_offset: self.chirp_offset,
        }
    }
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub signal: PathBuf,
    /// `a,b,c,d` with `ad - bc = 1`.
    #[arg(long, allow_hyphen_values = true)]
    pub params: String,
    #[command(flatten)]
    pub options: OptionArgs,
    /// Output signal (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sidecar JSON path; defaults to `<out>.json`.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Also write the operator matrix as JSON.
    #[arg(long)]
    pub export_operator: Option<PathBuf>,
    /// Output signal format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// graph:cycle, graph:path, graph:random, graph:geometric,
    /// signal:bipolar-rect, signal:delta, signal:random
    pub kind: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge probability for graph:random.
    #[arg(long, default_value_t = 0.1)]
    pub edge_prob: f64,
    /// Neighbour count for graph:geometric.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Coordinates file for graph:geometric.
    #[arg(long)]
    pub coords_out: Option<PathBuf>,
    /// `start:end` window of +1 entries for signal:bipolar-rect.
    #[arg(long)]
    pub window: Option<String>,
    /// Vertex for signal:delta.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub options: OptionArgs,
    /// Report file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Corrupt the operators feeding the named check.
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Applied first.
    #[arg(long, allow_hyphen_values = true)]
    pub p1: String,
    /// Applied second.
    #[arg(long, allow_hyphen_values = true)]
    pub p2: String,
    /// Graph on which to measure the operator deviation.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub options: OptionArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    /// Rotation angle sweep at fixed chirp.
    Alpha,
    /// Chirp sweep at fixed angle.
    Xi,
    /// Scaling × angle grid.
    SigmaAlpha,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub coords: Option<PathBuf>,
    #[arg(long)]
    pub signal: PathBuf,
    /// Repeatable `a,b,c,d`.
    #[arg(long = "params", allow_hyphen_values = true)]
    pub params: Vec<String>,
    #[arg(long, value_enum)]
    pub sweep: Option<Sweep>,
    #[command(flatten)]
    pub options: OptionArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn parse_params(text: &str) -> CliResult<LctParams> {
    text.parse::<LctParams>().map_err(CliError::from)
}

/// Parses arguments, runs the command and returns the exit code. Messages
/// go to `stdout`/`stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match commands::dispatch(&cfg, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
