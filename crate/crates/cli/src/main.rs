//! `rcorner`: command-line front end for rounded-corner analysis, hemisphere
//! experiments, diagnostics and multipatch repair.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser)]
#[command(name = "rcorner", version, about = "Rounded corners of tensor-product B-spline surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SchemeArg {
    Standard,
    Rcc,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MapArg {
    Analytic,
    Elliptic,
}

#[derive(Subcommand)]
enum Command {
    /// Classify surface corners and evaluate the control-point conditions.
    Check {
        surface: PathBuf,
        /// `u0v0`, `u1v0`, `u0v1`, `u1v1` or `all`.
        #[arg(long, default_value = "all")]
        corner: String,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the hemisphere with and without corner constraints over a sweep.
    Hemisphere {
        /// Degrees, e.g. `2,3` or `2..3`.
        #[arg(long)]
        degree: Option<String>,
        /// Refinement levels, e.g. `1..4`.
        #[arg(long)]
        levels: Option<String>,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Output directory.
        #[arg(long, default_value = "hemisphere_out")]
        out: PathBuf,
        #[arg(long)]
        probe_min: Option<f64>,
        #[arg(long)]
        probe_max: Option<f64>,
        #[arg(long)]
        probe_count: Option<usize>,
        #[arg(long, value_enum)]
        map: Option<MapArg>,
        /// Solve the constrained fit in one step instead of boundary then interior.
        #[arg(long)]
        single_step: bool,
        /// Experiment configuration JSON; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Export normal/curvature/isophote fields and corner probe reports.
    Diagnose {
        surface: PathBuf,
        #[arg(long, default_value = "all")]
        corner: String,
        /// Output directory.
        #[arg(long, default_value = "diagnose_out")]
        out: PathBuf,
        #[arg(long, default_value_t = rounded_corners::diagnostics::DEFAULT_PROBE_MIN)]
        probe_min: f64,
        #[arg(long, default_value_t = rounded_corners::diagnostics::DEFAULT_PROBE_MAX)]
        probe_max: f64,
        #[arg(long, default_value_t = rounded_corners::diagnostics::DEFAULT_PROBE_COUNT)]
        probe_count: usize,
        /// Grid intervals per direction of the field export.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Light direction of the isophote field, `x,y,z`.
        #[arg(long, default_value = "0,0,1")]
        isophote: String,
        /// Projection normal of the injectivity probe, `x,y,z`.
        #[arg(long)]
        plane_normal: Option<String>,
        /// Fraction of the local domain searched by the injectivity probe.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
    },
    /// Detect rounded corners in a multipatch model, refit them and update neighbours.
    Repair {
        model: PathBuf,
        /// Repaired model file.
        #[arg(long)]
        out: PathBuf,
        /// Report file; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the model even if conflicts remain.
        #[arg(long)]
        force: bool,
        /// Detection threshold for near-antiparallel first partials (radians).
        #[arg(long)]
        angle: Option<f64>,
        /// Detection options JSON (angle, normal overrides).
        #[arg(long)]
        options: Option<PathBuf>,
    },
    /// Write the built-in fixture surfaces and models.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
        /// Seed of the generated random rounded nets.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of generated random rounded nets.
        #[arg(long, default_value_t = 1)]
        random: usize,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check { surface, corner, out } => commands::check(&surface, &corner, out.as_deref()),
        Command::Hemisphere {
            degree,
            levels,
            scheme,
            out,
            probe_min,
            probe_max,
            probe_count,
            map,
            single_step,
            config,
        } => {
            let cfg = commands::ExperimentConfig::resolve(
                config.as_deref(),
                commands::ExperimentOverrides {
                    degree,
                    levels,
                    scheme,
                    probe_min,
                    probe_max,
                    probe_count,
                    map,
                    single_step,
                },
            )?;
            commands::hemisphere(&cfg, &out)
        }
        Command::Diagnose {
            surface,
            corner,
            out,
            probe_min,
            probe_max,
            probe_count,
            samples,
            isophote,
            plane_normal,
            extent,
        } => commands::diagnose(&commands::DiagnoseArgs {
            surface,
            corner,
            out,
            probe_min,
            probe_max,
            probe_count,
            samples,
            isophote,
            plane_normal,
            extent,
        }),
        Command::Repair {
            model,
            out,
            report,
            force,
            angle,
            options,
        } => commands::repair(&model, &out, report.as_deref(), force, angle, options.as_deref()),
        Command::Fixtures { out, seed, random } => commands::fixtures(&out, seed, random),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
