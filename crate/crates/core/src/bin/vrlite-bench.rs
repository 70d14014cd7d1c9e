use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use log::info;

use vrlite::bench::{run_experiment, DatasetSource, EtaChoice, ExperimentConfig, Mode};
use vrlite::dist::TransportKind;
use vrlite::{Algorithm, Error, GradientPoint};

/// Run one optimizer on a problem and emit per-epoch convergence metrics
/// as CSV.
#[derive(Debug, Parser)]
#[command(name = "vrlite-bench", version)]
struct Cli {
    /// sgd | svrg | saga | vrlite
    #[arg(long, default_value = "vrlite")]
    algo: Algorithm,

    /// seq | sync | async (distributed modes require vrlite)
    #[arg(long, default_value = "seq")]
    mode: Mode,

    /// toy-class | toy-reg | libsvm:<path>
    #[arg(long, default_value = "toy-reg")]
    dataset: DatasetSource,

    /// Constant stepsize.
    #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
    eta: Option<f64>,

    /// Sweep constant stepsizes and keep the fastest. Takes an optional
    /// comma-separated grid; the default grid is 2^k * 1e-4 for k = 0..12.
    #[arg(long, num_args = 0..=1, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,

    #[arg(long, default_value_t = vrlite::model::DEFAULT_LAMBDA)]
    lambda: f64,

    #[arg(long, default_value_t = 30)]
    epochs: usize,

    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// sim | socket
    #[arg(long, default_value = "sim")]
    transport: TransportKind,

    #[arg(long, default_value_t = 0.0)]
    latency_ms: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Relative gradient norm counted as converged when sweeping.
    #[arg(long, default_value_t = 1e-6)]
    target: f64,

    /// Reuse the step gradient for the epoch average instead of
    /// re-evaluating it after the update.
    #[arg(long)]
    reuse_step_gradient: bool,
}

impl Cli {
    fn into_config(self) -> ExperimentConfig {
        let eta = match (self.eta, self.sweep) {
            (Some(eta), _) => EtaChoice::Fixed(eta),
            (None, grid) => EtaChoice::Sweep(grid.unwrap_or_default()),
        };
        let mut cfg = ExperimentConfig::new(self.algo, self.dataset, eta);
        cfg.mode = self.mode;
        cfg.lambda = self.lambda;
        cfg.epochs = self.epochs;
        cfg.workers = self.workers;
        cfg.transport = self.transport;
        cfg.latency_ms = self.latency_ms;
        cfg.seed = self.seed;
        cfg.out_path = self.out;
        cfg.target = self.target;
        if self.reuse_step_gradient {
            cfg.grad_point = GradientPoint::PreUpdate;
        }
        cfg
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let cfg = cli.into_config();
    let to_stdout = cfg.out_path.is_none();

    match run_experiment(&cfg) {
        Ok(report) => {
            if to_stdout {
                print!("{}", vrlite::bench::render_csv(&report.rows));
            }
            if let Some(epoch) = report.diverged_at {
                eprintln!("diverged at epoch {epoch} (eta = {})", report.eta);
                return ExitCode::from(2);
            }
            info!(
                "eta = {}, final rel_grad_norm = {:e}",
                report.eta,
                report.final_rel_grad_norm()
            );
            ExitCode::SUCCESS
        }
        Err(Error::AllDiverged) => {
            eprintln!("diverged: every stepsize in the sweep grid diverged");
            ExitCode::from(2)
        }
        Err(Error::Diverged { epoch }) => {
            eprintln!("diverged at epoch {epoch}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
