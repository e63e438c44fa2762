use clap::Parser;
use cli_runner::{execute, CommandName, Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Extended Lorenz toolkit runner.
///
/// Exit status: 0 pass, 1 check failure, 2 usage error, 3 numerical non-convergence.
#[derive(Parser, Debug)]
#[command(name = "elorenz", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandName,
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solver tolerance of the command (see README).
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory; defaults to $ELORENZ_OUT/<command> or runs/<command>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Test hook: shift the named closed-form check so that it fails.
    #[arg(long, hide = true)]
    perturb: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let ov = Overrides { tol: cli.tol, out: cli.out, threads: cli.threads, perturb: cli.perturb };
    let run = || -> Result<i32, cli_runner::CliError> {
        let base = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let cfg = base.materialize(cli.command, &ov)?;
        let m = execute(&cfg)?;
        for a in &m.artifacts {
            println!("{}  {}", a.sha256, a.file);
        }
        println!("{}: {:?} in {:.1} s -> {}", cli.command.as_str(), m.status, m.wall_clock_s, cfg.out_dir.as_ref().unwrap().display());
        Ok(m.exit_code)
    };
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("elorenz: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
