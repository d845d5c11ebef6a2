use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use l1pod::harness::{
    eigenvalue_report, num, run_eigenvalues, run_perturbed_experiment, run_pod_experiment, run_single,
    run_temporal_convergence, ExperimentConfig,
};
use l1pod::l1::{verify_stability, verify_weight_inequalities};
use l1pod::{Error, Result};

#[derive(Parser)]
#[command(name = "l1pod", version, about = "L1 time stepping and POD reduction for subdiffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Experiment configuration (TOML)
    config: PathBuf,
    /// Write the CSV here instead of the configured output or stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One full-order run at the largest configured N
    Solve(Io),
    /// Snapshots, POD bases and reduced runs for every configured m
    Pod(Io),
    /// Temporal sweep over N, or spatial sweep when mesh.sweep is set
    Convergence(Io),
    /// Case d: snapshots from the perturbed source, reduced model driven by the true one
    Perturbed(Io),
    /// Correlation eigenvalues of the four snapshot variants
    Eigvals(Io),
    /// Weight inequalities on an alpha grid, plus the stability estimate for a config
    Verify {
        #[arg(long, default_value_t = 2000)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        alphas: Vec<f64>,
        /// Also check the stability estimate on this configuration's run
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn emit(text: &str, io: &Io, config: &ExperimentConfig) -> Result<()> {
    match io.output.as_ref().or(config.output.as_ref()) {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn header(config: &ExperimentConfig) -> String {
    config.echo().iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(io) => {
            let config = ExperimentConfig::load(&io.config)?;
            let (history, errors) = run_single(&config)?;
            let mut out = header(&config);
            if let Some(e) = errors {
                out += &format!("# e_max = {}\n# e = {}\n", num(e.e_max), num(e.e));
            }
            out += "n,t,l2_norm\n";
            for (n, norm) in history.l2_norms()?.iter().enumerate() {
                out += &format!("{n},{},{}\n", num(history.time(n)), num(*norm));
            }
            emit(&out, &io, &config)?;
            Ok(true)
        }
        Command::Pod(io) => {
            let config = ExperimentConfig::load(&io.config)?;
            let report = run_pod_experiment(&config)?;
            emit(&report.to_csv(), &io, &config)?;
            Ok(report.stable())
        }
        Command::Convergence(io) => {
            let config = ExperimentConfig::load(&io.config)?;
            let report = run_temporal_convergence(&config)?;
            emit(&report.to_csv(), &io, &config)?;
            Ok(report.stable())
        }
        Command::Perturbed(io) => {
            let config = ExperimentConfig::load(&io.config)?;
            let report = run_perturbed_experiment(&config)?;
            emit(&report.to_csv(), &io, &config)?;
            Ok(report.stable())
        }
        Command::Eigvals(io) => {
            let config = ExperimentConfig::load(&io.config)?;
            let table = run_eigenvalues(&config)?;
            emit(&(header(&config) + &eigenvalue_report(&table)), &io, &config)?;
            Ok(true)
        }
        Command::Verify { n_max, alphas, config } => {
            let weights = verify_weight_inequalities(&alphas, n_max)?;
            println!("weight checks: {} evaluated, {} violations", weights.checks, weights.violations.len());
            for v in weights.violations.iter().take(20) {
                println!("  {:?} alpha={} n={} j={:?}: {:e} > {:e}", v.check, v.alpha, v.n, v.j, v.lhs, v.rhs);
            }
            let mut ok = weights.violations.is_empty();
            if let Some(path) = config {
                let config = ExperimentConfig::load(&path)?;
                let (history, _) = run_single(&config)?;
                let s = verify_stability(&history)?;
                println!(
                    "stability: {} steps checked, {} violations, worst relative margin {:e}",
                    s.checked,
                    s.violations.len(),
                    s.max_margin
                );
                ok &= s.holds();
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("l1pod: a verification check failed");
            ExitCode::FAILURE
        }
        Err(Error::Io(e)) => {
            eprintln!("l1pod: I/O error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("l1pod: {e}");
            ExitCode::from(2)
        }
    }
}
