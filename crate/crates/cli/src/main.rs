use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vrvol::commands::{self, RegressOutput};
use vrvol::config::{Overrides, PipelineConfig};
use vrvol::CliError;

#[derive(Parser)]
#[command(name = "vrvol", version, about = "Intraday variance ratios, realized volatility and HAR regressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Previous-tick resample a tick CSV onto the intraday grid.
    Resample,
    /// Daily log RV and variance ratios from tick or gridded input.
    Metrics,
    /// Fit HAR on a metrics CSV and write the volatility decomposition.
    Har,
    /// Full-sample and rolling regressions from a metrics CSV.
    Regress,
    /// Write a synthetic gridded CSV.
    Simulate,
    /// Run metrics, HAR and regressions in one pass.
    Pipeline,
}

#[derive(Args)]
struct Flags {
    /// TOML file of `key = value` settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// `tick` or `gridded`.
    #[arg(long, global = true)]
    input_kind: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Session open, HH:MM[:SS].
    #[arg(long, global = true)]
    session_open: Option<String>,
    #[arg(long, global = true)]
    session_close: Option<String>,
    #[arg(long, global = true)]
    step_seconds: Option<i64>,
    #[arg(long, global = true)]
    expected_returns: Option<usize>,
    /// Aggregation levels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    /// Rolling window in trading days.
    #[arg(long, global = true)]
    window_length: Option<usize>,
    /// Confidence level of the rolling bands.
    #[arg(long, global = true)]
    level: Option<f64>,
    /// `full_sample` or `per_window`.
    #[arg(long, global = true)]
    har_mode: Option<String>,
    /// `ols` or `white`.
    #[arg(long, global = true)]
    se_mode: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulation model: `iid`, `ar1` or `har`.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    days: Option<usize>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, global = true)]
    beta0: Option<f64>,
    #[arg(long, global = true)]
    beta_d: Option<f64>,
    #[arg(long, global = true)]
    beta_w: Option<f64>,
    #[arg(long, global = true)]
    beta_m: Option<f64>,
    #[arg(long, global = true)]
    noise_sd: Option<f64>,
}

impl Flags {
    fn overrides(self) -> Result<Overrides, CliError> {
        let file = match &self.config {
            Some(p) => Overrides::from_file(p)?,
            None => Overrides::default(),
        };
        Ok(file.merge(Overrides {
            input: self.input,
            input_kind: self.input_kind,
            out_dir: self.out_dir,
            session_open: self.session_open,
            session_close: self.session_close,
            step_seconds: self.step_seconds,
            expected_returns: self.expected_returns,
            q: self.q,
            window_length: self.window_length,
            level: self.level,
            har_mode: self.har_mode,
            se_mode: self.se_mode,
            seed: self.seed,
            model: self.model,
            days: self.days,
            sigma: self.sigma,
            phi: self.phi,
            beta0: self.beta0,
            beta_d: self.beta_d,
            beta_w: self.beta_w,
            beta_m: self.beta_m,
            noise_sd: self.noise_sd,
        }))
    }
}

fn report_regress(out: &RegressOutput) {
    for r in &out.full_sample {
        let coefs: Vec<String> = r
            .coefficients
            .iter()
            .skip(1)
            .map(|c| format!("{}={:.4} ({:.4})", c.name, c.estimate, c.std_error))
            .collect();
        println!("q={} {:<10} {}  adjR2={:.2}%  n={}", r.q, r.spec, coefs.join(" "), r.adj_r2_pct(), r.n_obs);
    }
    println!("{} rolling series written", out.rolling.len());
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = PipelineConfig::resolve(cli.flags.overrides()?)?;
    match cli.command {
        Command::Resample => {
            let out = commands::cmd_resample(&cfg)?;
            println!("{} days gridded, {} rejected", out.days.len(), out.rejected.len());
        }
        Command::Metrics => {
            let out = commands::cmd_metrics(&cfg)?;
            println!("{} days measured, {} rejected", out.table.len(), out.rejected.len());
        }
        Command::Har => {
            let fit = commands::cmd_har(&cfg)?;
            let (c, s) = (fit.coefficients, fit.std_errors);
            println!(
                "beta0={:.4} ({:.4}) beta_d={:.4} ({:.4}) beta_w={:.4} ({:.4}) beta_m={:.4} ({:.4}) n={}",
                c.beta0, s.beta0, c.beta_d, s.beta_d, c.beta_w, s.beta_w, c.beta_m, s.beta_m, fit.n_obs
            );
        }
        Command::Regress => report_regress(&commands::cmd_regress(&cfg)?),
        Command::Simulate => {
            let days = commands::cmd_simulate(&cfg)?;
            println!("{} synthetic days written", days.len());
        }
        Command::Pipeline => {
            let out = commands::cmd_pipeline(&cfg)?;
            println!("{} days measured, {} rejected", out.metrics.table.len(), out.metrics.rejected.len());
            report_regress(&out.regress);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(vrvol_core::Error::RankDeficient { .. }) = e {
                eprintln!(
                    "hint: the log RV series has too little variation for the HAR regressors \
                     (e.g. a constant series); check the input days"
                );
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
