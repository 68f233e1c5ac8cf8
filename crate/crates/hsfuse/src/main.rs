use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hsfuse::composite::export_composite;
use hsfuse::config::load_spec;
use hsfuse::envi::read_cube;
use hsfuse::pipeline::{self, RunOptions};
use hsfuse::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hsfuse",
    version,
    about = "Low-rank multispectral/hyperspectral image fusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run spec (JSON): degradation, response, noise and solver settings
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Degrade every input cube into an observed HrMS/LrHS pair
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Overrides the spec's noise seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fuse an observed pair
    Fuse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hrms: PathBuf,
        #[arg(long)]
        lrhs: PathBuf,
    },
    /// Score a cube against a reference
    Evaluate {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Resolution ratio used by ERGAS
        #[arg(long)]
        factor: f64,
        /// Peak value for PSNR/SSIM; defaults to the reference maximum
        #[arg(long)]
        peak: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate, fuse and score every input cube, then tabulate the means
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        peak: Option<f64>,
    },
    /// Reduced-resolution triplet from an observed pair
    Wald {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hrms: PathBuf,
        #[arg(long)]
        lrhs: PathBuf,
    },
    /// Write synthetic low-rank scenes
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 31)]
        bands: usize,
        #[arg(long, default_value_t = 6)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export three bands as an 8-bit RGB PNG
    Composite {
        #[arg(long)]
        input: PathBuf,
        /// Zero-based band indices as r,g,b
        #[arg(long, value_parser = parse_bands)]
        bands: [usize; 3],
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_bands(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad band index {t:?}: {e}"))
        })
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<usize>| format!("expected three bands r,g,b, got {}", v.len()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, seed } => {
            let spec = load_spec(&common.config)?;
            let dirs = pipeline::simulate(
                &spec,
                &common.out,
                &RunOptions {
                    seed,
                    ..RunOptions::default()
                },
            )?;
            println!(
                "simulated {} cube(s) into {}",
                dirs.len(),
                common.out.display()
            );
        }
        Command::Fuse { common, hrms, lrhs } => {
            let spec = load_spec(&common.config)?;
            let res = pipeline::fuse_files(&spec, &hrms, &lrhs, &common.out)?;
            println!(
                "fused in {} iteration(s), eta {:e}",
                res.iterations_run, res.eta
            );
        }
        Command::Evaluate {
            reference,
            test,
            factor,
            peak,
            out,
        } => {
            let m = pipeline::evaluate_files(&reference, &test, factor, peak, &out)?;
            println!(
                "psnr {:.3} sam {:.4} ergas {:.4} ssim {:.4}",
                m.psnr, m.sam, m.ergas, m.ssim
            );
        }
        Command::Benchmark {
            common,
            seed,
            threads,
            peak,
        } => {
            let spec = load_spec(&common.config)?;
            let outcome = pipeline::benchmark(
                &spec,
                &common.out,
                &RunOptions {
                    seed,
                    threads,
                    peak,
                },
            )?;
            print!(
                "{}",
                hsfuse::report::render_table(&[
                    ("fused", &outcome.mean_fused),
                    ("bicubic", &outcome.mean_bicubic),
                ])
            );
        }
        Command::Wald { common, hrms, lrhs } => {
            let spec = load_spec(&common.config)?;
            pipeline::wald_files(&spec, &hrms, &lrhs, &common.out)?;
        }
        Command::Generate {
            out,
            count,
            height,
            width,
            bands,
            rank,
            seed,
        } => {
            let paths = pipeline::generate(&out, count, (height, width, bands), rank, seed)?;
            println!("wrote {} scene(s) into {}", paths.len(), out.display());
        }
        Command::Composite { input, bands, out } => {
            let cube = read_cube(&input)?;
            export_composite(&cube, bands, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("error [{}] {e}", e.category());
    ExitCode::from(e.exit_code() as u8)
}
