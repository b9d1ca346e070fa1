use clap::Parser;
use spinq::cli::{parse_assignment, run, validate, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Regenerate theory curves as CSV files plus a manifest.
#[derive(Debug, Parser)]
#[command(name = "spinq", version)]
struct Args {
    /// lgi, lgi-dephasing, leeyang-trace, leeyang-coamoeba, leeyang-amoeba-grid, mpemba,
    /// mpemba-genuine, entloc-localize, entloc-robustness or channel-audit.
    #[arg(long)]
    experiment: Option<String>,
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_parser = parse_assignment)]
    set: Vec<(String, String)>,
    /// Only validate the configuration.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match RunConfig::assemble(args.experiment.as_deref(), args.config.as_deref(), &args.set, args.out, args.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let diag = validate(&config);
    for w in &diag.warnings {
        eprintln!("warning: {w}");
    }
    if !diag.is_ok() {
        for e in &diag.errors {
            eprintln!("{e}");
        }
        return ExitCode::from(2);
    }
    if args.check {
        return ExitCode::SUCCESS;
    }
    match run(&config) {
        Ok(m) => {
            for (f, _) in &m.files {
                println!("{}", config.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
