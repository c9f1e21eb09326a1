use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cmetric::cli::{run, Command, OutputFormat, RunConfig, DEFAULT_SAMPLES, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "cmetric")]
#[command(about = "Caratheodory distances, nested-domain contraction constants and certified fixed points")]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// JSON specification of the domains, map or problem
    #[arg(long)]
    input: PathBuf,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Number of sampled points or pairs
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = RunConfig {
        command: args.command,
        input_path: args.input,
        seed: args.seed,
        sample_count: args.samples,
        output_format: args.format,
        output_path: args.out,
    };
    match run(&cfg) {
        Ok(bytes) => {
            if cfg.output_path.is_none() {
                let _ = std::io::stdout().write_all(&bytes);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cmetric: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
