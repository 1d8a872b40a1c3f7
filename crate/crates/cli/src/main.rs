use clap::{Args, Parser, Subcommand};
use pals::checks;
use pals::harness::{output, Experiment, ExperimentConfig};
use pals::{Error, StopReason};
use std::path::PathBuf;
use std::process::ExitCode;

/// Parametric level set shape reconstruction.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize the phantom and write truth.csv and truth.pgm.
    Phantom(Common),
    /// Simulate clean and noisy data.
    Forward(Common),
    /// Run the full reconstruction and write all outputs.
    Reconstruct(Common),
    /// Run the gradient, Jacobian and adjoint self-tests at the initial model.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Override noise.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_MAX_ITERS: u8 = 4;
const EXIT_STAGNATION: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidModel(_) | Error::Io(_) | Error::Csv(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn load(args: &Common) -> pals::Result<Experiment> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.noise.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    Experiment::new(cfg)
}

fn phantom(args: &Common) -> pals::Result<u8> {
    let exp = load(args)?;
    let dir = &exp.config.output.dir;
    exp.write_phantom(dir)?;
    println!("wrote {}", dir.join("truth.csv").display());
    Ok(0)
}

fn forward(args: &Common) -> pals::Result<u8> {
    let exp = load(args)?;
    let dir = &exp.config.output.dir;
    let data = exp.synthesize()?;
    exp.write_data(dir, &data)?;
    println!("wrote {}", dir.display());
    Ok(0)
}

fn reconstruct(args: &Common) -> pals::Result<u8> {
    let exp = load(args)?;
    let dir = &exp.config.output.dir;
    let data = exp.synthesize()?;
    let rec = exp.reconstruct(&data)?;
    exp.write_reconstruction(dir, &data, &rec)?;
    let reason = rec.state.stop_reason.expect("finished run");
    println!("{reason:?} after {} iterations; results in {}", rec.state.iteration, dir.display());
    Ok(match reason {
        StopReason::Discrepancy => 0,
        StopReason::MaxIters => EXIT_MAX_ITERS,
        StopReason::Stagnation => EXIT_STAGNATION,
    })
}

fn check(args: &Common) -> pals::Result<u8> {
    let exp = load(args)?;
    let dir = &exp.config.output.dir;
    let data = exp.synthesize()?;
    let model = exp.initial_model()?;
    let fwd = exp.forward.as_ref();
    let contrasts = exp.config.solver.unknown_contrasts;
    let grad = checks::gradient_check(fwd, &model, &data.noisy, contrasts, 1e-5)?;
    let jac = checks::jacobian_check(fwd, &data.truth, 1e-4, exp.seed())?;
    let adj = checks::adjoint_check(fwd, &data.truth, exp.seed())?;
    let pass = grad.max_rel_error < 1e-4 && jac < 1e-3 && adj < 1e-10;
    let entries = vec![
        ("gradient_parameters".to_string(), grad.params.len().to_string()),
        ("gradient_max_rel_error".to_string(), format!("{:e}", grad.max_rel_error)),
        ("jacobian_rel_error".to_string(), format!("{jac:e}")),
        ("adjoint_rel_error".to_string(), format!("{adj:e}")),
        ("pass".to_string(), pass.to_string()),
    ];
    std::fs::create_dir_all(dir)?;
    let path = dir.join("check.txt");
    output::write_key_values(&path, &entries)?;
    println!("{} (details in {})", if pass { "checks passed" } else { "checks FAILED" }, path.display());
    Ok(if pass { 0 } else { EXIT_CHECK_FAILED })
}

fn run(cli: &Cli) -> pals::Result<u8> {
    match &cli.command {
        Command::Phantom(a) => phantom(a),
        Command::Forward(a) => forward(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Check(a) => check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
