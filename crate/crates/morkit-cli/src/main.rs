//! Command-line front end: model reduction runs, sigma sweeps, H2 error
//! norms, and timing benchmarks. Exit codes: 0 success, 1 error, 2
//! non-convergence (artifacts are still written).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use morkit::h2norm::{h2_error_report, linearize_reduced};
use morkit::irka_fo::IrkaOptions;
use morkit::irka_so::{spmor_mimo, spmor_siso, SpmorResult};
use morkit::models::{build_som, load_dataset, DatasetManifest, SomParams};
use morkit::sysmodel::{
    linearize, sigma_sweep, FrequencyGrid, LtiSystem, SecondOrderSystem,
};
use morkit::{Limits, Result};

#[derive(Parser)]
#[command(name = "morkit", about = "Structure-preserving model order reduction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a second-order model; writes both reduced models and a report.
    Reduce(RunArgs),
    /// Sweep singular values of the full model and both reduced models (CSV).
    Sigma(RunArgs),
    /// H2 error norms of both reduced models via the Gramian trace formulas (JSON).
    H2err(RunArgs),
    /// Time one sigma-sweep cycle on the full model vs. the reduced model (JSON).
    Speedup(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Build the oscillator-chain benchmark with this many masses per chain.
    #[arg(long, conflicts_with = "manifest")]
    som_n1: Option<usize>,
    /// Load a model from a JSON manifest of five Matrix Market files.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Reduced order.
    #[arg(long, short = 'r')]
    order: usize,
    /// Convergence tolerance on the relative shift change.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Seed for randomized initial shifts (0 keeps the deterministic default).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lower end of the frequency grid (rad/s).
    #[arg(long, default_value_t = 1e-2)]
    grid_min: f64,
    /// Upper end of the frequency grid (rad/s).
    #[arg(long, default_value_t = 1e4)]
    grid_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 200)]
    grid_points: usize,
    /// Output directory (reduce) or file (sigma/h2err/speedup); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load_system(&self) -> Result<SecondOrderSystem> {
        match (self.som_n1, &self.manifest) {
            (Some(n1), None) => build_som(&SomParams::new(n1)),
            (None, Some(path)) => load_dataset(&DatasetManifest::from_file(path)?),
            _ => Err(morkit::MorError::InvalidParam(
                "exactly one of --som-n1 and --manifest is required".into(),
            )),
        }
    }

    fn options(&self) -> IrkaOptions {
        let mut opts = IrkaOptions::new(self.order);
        opts.tol = self.tol;
        opts.max_iter = self.max_iter;
        opts.seed = self.seed;
        if self.seed != 0 {
            opts.init = morkit::irka_fo::ShiftInit::SeededRandom;
        }
        opts.limits = Limits::from_env();
        opts
    }

    fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::log_space(self.grid_min, self.grid_max, self.grid_points)
    }

    fn reduce(&self, sos: &SecondOrderSystem) -> Result<SpmorResult> {
        let opts = self.options();
        if sos.is_siso() {
            spmor_siso(sos, &opts)
        } else {
            spmor_mimo(sos, &opts)
        }
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(path, text)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn exit_for(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_reduce(args: &RunArgs) -> Result<ExitCode> {
    let sos = args.load_system()?;
    let res = args.reduce(&sos)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("morkit-out"));
    res.save(Path::new(&dir))?;
    if !res.report.converged {
        eprintln!(
            "warning: not converged after {} iterations (artifacts written to {})",
            res.report.iterations,
            dir.display()
        );
    }
    Ok(exit_for(res.report.converged))
}

fn cmd_sigma(args: &RunArgs) -> Result<ExitCode> {
    let sos = args.load_system()?;
    let res = args.reduce(&sos)?;
    let grid = args.grid()?;
    let full = sigma_sweep(&sos, &grid)?;
    let pos = sigma_sweep(&res.rom_position, &grid)?;
    let vel = sigma_sweep(&res.rom_velocity, &grid)?;

    let mut csv = String::from(
        "omega,sigma_full,sigma_pos,sigma_vel,abs_err_pos,abs_err_vel,rel_err_pos,rel_err_vel\n",
    );
    let err_pos = morkit::sysmodel::error_sweep(&sos, &res.rom_position, &grid)?;
    let err_vel = morkit::sysmodel::error_sweep(&sos, &res.rom_velocity, &grid)?;
    for i in 0..grid.len() {
        let rel = |r: Option<f64>| r.map(|v| format!("{v:e}")).unwrap_or_default();
        csv += &format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{},{}\n",
            full[i].omega,
            full[i].sigma,
            pos[i].sigma,
            vel[i].sigma,
            err_pos[i].abs,
            err_vel[i].abs,
            rel(err_pos[i].rel),
            rel(err_vel[i].rel),
        );
    }
    write_out(&args.out, &csv)?;
    Ok(exit_for(res.report.converged))
}

fn cmd_h2err(args: &RunArgs) -> Result<ExitCode> {
    let sos = args.load_system()?;
    let res = args.reduce(&sos)?;
    let limits = Limits::from_env();
    let fo = linearize(&sos)?;
    let pos = h2_error_report(&fo, &linearize_reduced(&res.rom_position)?, &limits)?;
    let vel = h2_error_report(&fo, &linearize_reduced(&res.rom_velocity)?, &limits)?;
    let doc = serde_json::json!({
        "h2_full": pos.h2_full,
        "h2_position_error": {
            "abs_error_p": pos.abs_error_p,
            "abs_error_q": pos.abs_error_q,
            "rel_error": pos.rel_error,
            "residuals": pos.residuals,
        },
        "h2_velocity_error": {
            "abs_error_p": vel.abs_error_p,
            "abs_error_q": vel.abs_error_q,
            "rel_error": vel.rel_error,
            "residuals": vel.residuals,
        },
    });
    write_out(&args.out, &format!("{:#}\n", doc))?;
    Ok(exit_for(res.report.converged))
}

/// Median wall time of `reps` runs of one sigma-sweep cycle, after a warm-up run.
fn time_sweep(sys: &dyn LtiSystem, grid: &FrequencyGrid, reps: usize) -> Result<f64> {
    sigma_sweep(sys, grid)?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        sigma_sweep(sys, grid)?;
        times.push(t0.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok(times[reps / 2])
}

fn cmd_speedup(args: &RunArgs) -> Result<ExitCode> {
    let sos = args.load_system()?;
    let res = args.reduce(&sos)?;
    let grid = args.grid()?;
    let t_full = time_sweep(&sos, &grid, 5)?;
    let t_rom = time_sweep(&res.rom_position, &grid, 5)?;
    let doc = serde_json::json!({
        "dim_full": sos.order(),
        "dim_rom": res.rom_position.order(),
        "t_full": t_full,
        "t_rom": t_rom,
        "speedup": t_full / t_rom,
    });
    write_out(&args.out, &format!("{:#}\n", doc))?;
    Ok(exit_for(res.report.converged))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Reduce(a) => cmd_reduce(a),
        Command::Sigma(a) => cmd_sigma(a),
        Command::H2err(a) => cmd_h2err(a),
        Command::Speedup(a) => cmd_speedup(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
