//! `rbki`: approximation runs, conditioning experiments, block-size sweeps
//! and the acceptance suite from the command line.

mod approx;
mod bench;
mod config;
mod exit;
mod lab;
mod output;
mod source;
mod verify;

use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;

use config::{load_file_config, resolve_common, Cli, Command, FileConfig, Overlay};
use exit::Failure;
use output::Context;

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("rbki: {}: {}", failure.label(), failure.error());
            failure.code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let common = resolve_common(&cli, &file)?;
    if !rbki::par::configure_threads(common.threads) {
        log::debug!("thread pool already configured or parallelism disabled");
    }
    let ctx = Context::new(common);
    let seed = ctx.common.seed;
    match cli.command {
        Command::Approx(args) => approx::run(&ctx, config::resolve_approx(args.overlay(file.approx), seed)?),
        Command::Lab(args) => lab::run(&ctx, config::resolve_lab(args.overlay(file.lab))?),
        Command::Bench(args) => bench::run(&ctx, config::resolve_bench(args.overlay(file.bench), seed)?),
        Command::Verify(args) => verify::run(&ctx, args.overlay(file.verify)),
    }
}
