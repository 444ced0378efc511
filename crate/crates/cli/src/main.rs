use std::process::ExitCode;

use clap::Parser;
use sfwarp_cli::{cmd_augment, cmd_decompose, cmd_selftest, Cli, CliError, Command, JobSpec};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    match cli.command {
        Command::Augment(args) => {
            let config = match args.config.to_config() {
                Ok(c) => c,
                Err(e) => return fail(&e.into()),
            };
            let spec = JobSpec {
                inputs: args.inputs,
                out_dir: args.out,
                config,
                copies: args.copies,
                jobs: args.jobs,
                dump_matrices: args.dump_matrices,
            };
            match cmd_augment(&spec) {
                Ok(summary) => {
                    for f in &summary.failures {
                        eprintln!("error: {f}");
                    }
                    println!(
                        "{} outputs from {} inputs ({} failed); manifest {}",
                        summary.entries.len(),
                        summary.inputs,
                        summary.failures.len(),
                        summary.manifest.display()
                    );
                    ExitCode::from(summary.exit_code() as u8)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Decompose(args) => {
            let config = match args.config.to_config() {
                Ok(c) => c,
                Err(e) => return fail(&e.into()),
            };
            let prefix = args
                .out_prefix
                .clone()
                .unwrap_or_else(|| args.input.with_extension(""));
            match cmd_decompose(&args.input, &prefix, &config, args.warp(&config)) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Selftest => {
            let report = cmd_selftest();
            println!("{report}");
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
