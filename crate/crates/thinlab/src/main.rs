use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use thinlab::{run, Command, EXIT_ERROR};

/// Numerical potential theory of subordinate killed Brownian motion.
#[derive(Parser, Debug)]
#[command(name = "thinlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a dotted config key, e.g. `--set model.alpha=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command, cli.config.as_deref(), &cli.overrides) {
        Ok(out) => {
            let prefix = &out.report.config.output.prefix;
            println!("{}: {}", cli.command.name(), out.summary);
            println!("seed {}, outputs {prefix}.report.json and {prefix}.terms.csv", out.report.seed);
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
