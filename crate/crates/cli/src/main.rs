mod args;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use pdflow::config::RunConfig;
use pdflow::experiments::{
    run_experiment, run_sweep, summarize_sweep, sweep_dir, write_atomic, RunStatus,
};
use pdflow::par::Execution;
use pdflow::Error;

use args::Cli;

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_INTEGRATION: u8 = 2;

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

fn run<I: IntoIterator<Item = OsString>>(argv: I) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };

    if let Some(j) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            log::warn!("could not configure {j} worker threads: {e}");
        }
    }

    match execute(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Integration(_) | Error::NonFinite { .. } => EXIT_INTEGRATION,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn build_config(cli: &Cli) -> pdflow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for (k, v) in cli.overrides() {
        cfg.apply(k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &RunConfig) -> pdflow::Result<u8> {
    let echo = cfg.to_text();
    match &cfg.r_sweep {
        None => {
            let report = run_experiment(&cfg.spec)?;
            report.write(&cfg.out, &echo)?;
            match report.status {
                RunStatus::Completed => {
                    println!("run completed; results in {}", cfg.out.display());
                    Ok(EXIT_OK)
                }
                RunStatus::Failed { kind, t } => {
                    eprintln!(
                        "integration aborted at t = {t:e}: {kind}; partial results in {}",
                        cfg.out.display()
                    );
                    Ok(EXIT_INTEGRATION)
                }
            }
        }
        Some(rs) => {
            let reports = run_sweep(&cfg.spec, rs, Execution::Parallel)?;
            for (r, rep) in rs.iter().zip(&reports) {
                let mut member = cfg.clone();
                member.spec.eps_r = *r;
                member.r_sweep = None;
                rep.write(&sweep_dir(&cfg.out, *r), &member.to_text())?;
                if let RunStatus::Failed { kind, t } = rep.status {
                    eprintln!("r = {r}: integration aborted at t = {t:e}: {kind}");
                }
            }
            let summary = summarize_sweep(rs, &reports);
            write_atomic(&cfg.out.join("sweep.txt"), &summary.to_text())?;
            println!("sweep finished; results in {}", cfg.out.display());
            Ok(if summary.all_completed {
                EXIT_OK
            } else {
                EXIT_INTEGRATION
            })
        }
    }
}
