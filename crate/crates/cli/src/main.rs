//! `moondisp`: batch entry points and the session server.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit codes:
//! 0 success, 1 usage, 2 invalid input, 3 runtime failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "moondisp", version, about = "Moon illusion disparity toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Magnification versus displacement ratio, as CSV.
    ExpansionCurve {
        /// True angular size in degrees.
        #[arg(long, default_value_t = 0.5179)]
        theta_deg: f64,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, default_value_t = 0.9)]
        r_max: f64,
        /// Number of evenly spaced samples, ends included.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the curve as an SVG polyline.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Render a stereo stimulus from a scene file.
    Render {
        /// Scene JSON: sky, moon, cues and an optional rig.
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum, default_value_t = Layout::SideBySide)]
        layout: Layout,
        #[arg(long, value_enum, default_value_t = Format::Ppm)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full session against a simulated observer.
    Simulate {
        /// Session configuration JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        true_m: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Proportion and Wilson interval from `label,count` survey rows.
    SurveyStats {
        #[arg(long)]
        csv: PathBuf,
    },
    /// Evaluate the three illusion models for one viewing context.
    CompareModels {
        #[arg(long)]
        context: PathBuf,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Layout {
    SideBySide,
    Anaglyph,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Ppm,
    Png,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invalid(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) | CliError::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let default_level = if matches!(cli.command, Command::Serve { .. }) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .init();

    let result = match cli.command {
        Command::ExpansionCurve {
            theta_deg,
            r_min,
            r_max,
            steps,
            out,
            svg,
        } => commands::expansion_curve(theta_deg, r_min, r_max, steps, out.as_deref(), svg.as_deref()),
        Command::Render {
            scene,
            layout,
            format,
            out,
        } => commands::render(&scene, layout, format, &out),
        Command::Simulate {
            config,
            true_m,
            sigma,
            seed,
        } => commands::simulate(config.as_deref(), true_m, sigma, seed),
        Command::SurveyStats { csv } => commands::survey_stats(&csv),
        Command::CompareModels { context } => commands::compare_models(&context),
        Command::Serve { port, data_dir, host } => commands::serve(&host, port, data_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moondisp: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
