use std::path::PathBuf;
use std::process::ExitCode;

use bloch_adiabatic::experiment::{
    format_table, format_verification, plot_report, run, sweep, verify_with, ExperimentConfig,
    VerifyOptions,
};
use bloch_adiabatic::Error;
use clap::{Parser, Subcommand};

/// Qubit adiabatic dynamics on the Bloch sphere.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trajectory CSV and JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an equatorial experiment at several ω₀/Ω ratios.
    Sweep {
        /// Comma-separated ω₀/Ω values, e.g. 10,100,1000.
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<f64>,
        #[arg(long)]
        config: PathBuf,
        /// Parallel workers; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Randomized property checks across every module.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
    /// Write plot data for a finished run.
    Plot {
        #[arg(long)]
        report: PathBuf,
        /// Also render an SVG (overrides the config's output.svg).
        #[arg(long)]
        svg: bool,
    },
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let result = ExperimentConfig::load(&config).and_then(|c| run(&c));
            match result {
                Ok(report) => {
                    let s = &report.summary;
                    println!("trajectory       {}", report.trajectory.display());
                    println!("samples          {}", s.samples);
                    println!("max deviation    {:.6e}", s.max_eigen_deviation);
                    println!("oracle distance  {:.3e}", s.oracle_distance);
                    println!(
                        "speed identity   {} (error {:.3e}, tol {:.3e})",
                        if s.speed_identity.passed { "ok" } else { "FAILED" },
                        s.speed_identity.max_abs_error,
                        s.speed_identity.tolerance
                    );
                    if let Some(p) = &s.passage {
                        println!("passage product  {:.12} (π/2 = {:.12})", p.passage_product, std::f64::consts::FRAC_PI_2);
                    }
                    if let Some(p) = &s.pendulum {
                        println!(
                            "envelope         {} (|ε| {:.4e} vs {:.4e})",
                            if p.within_envelope { "ok" } else { "outside" },
                            p.eps_max_measured,
                            p.eps_max_predicted
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep {
            ratios,
            config,
            jobs,
        } => {
            let result = ExperimentConfig::load(&config).and_then(|c| sweep(&ratios, &c, jobs));
            match result {
                Ok(report) => {
                    print!("{}", format_table(&report));
                    println!("table            {}", report.table.display());
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify {
            seed,
            cases,
            inject_sign_flip,
        } => match verify_with(seed, cases, VerifyOptions { inject_sign_flip }) {
            Ok(report) => {
                print!("{}", format_verification(&report));
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    fail(Error::VerificationFailed {
                        failed: report.failed,
                    })
                }
            }
            Err(e) => fail(e),
        },
        Command::Plot { report, svg } => match plot_report(&report, svg.then_some(true)) {
            Ok(files) => {
                println!("polar            {}", files.polar.display());
                println!("deviation        {}", files.deviation.display());
                if let Some(p) = files.svg {
                    println!("svg              {}", p.display());
                }
                println!("band             {:.6e} rad", files.band);
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
