use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use photonwave::runner::tools::{self, Tool};
use photonwave::runner::{self, config::DEFAULTS_HELP, Experiment};

const OUT_ENV: &str = "PHOTONWAVE_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "photonwave",
    version,
    about = "Photon wave mechanics experiments",
    after_help = DEFAULTS_HELP,
    long_about = "Runs a named experiment, writes CSV tables, report.json and timing.json into \
<out>/<experiment>/.\nExit status: 0 all checks pass, 2 a threshold check failed, 1 error.\n\
Output directory: --out, else the `out` config key, else $PHOTONWAVE_OUT, else ./out."
)]
struct Cli {
    /// One of: localize, lightcone, hegerfeldt, evenfield-tail, beamsplit, fringes,
    /// entangle-collapse, fock-verify, coherent-limit, source-emission (`run <name>` also works).
    /// `density` and `propagate` dump data for the shell state set by the localize keys.
    #[arg(num_args = 1..=2, required = true)]
    experiment: Vec<String>,
    /// Config file (TOML or JSON). Omitted: defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve(cli: &Cli) -> Result<(runner::ExperimentConfig, Option<Tool>, PathBuf), String> {
    let name = match cli.experiment.as_slice() {
        [n] => n,
        [run, n] if run == "run" => n,
        _ => return Err(format!("expected `<experiment>` or `run <experiment>`, got {:?}", cli.experiment)),
    };
    let tool = Tool::parse(name);
    let experiment = match tool {
        Some(_) => Experiment::Localize,
        None => Experiment::parse(name).map_err(|e| e.to_string())?,
    };
    let raw = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = runner::validate_config(&raw, experiment).map_err(|e| match &cli.config {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    })?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, tool, out))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cfg, tool, out) = match resolve(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cfg.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    if let Some(tool) = tool {
        return match tools::run_tool(tool, &cfg, &out) {
            Ok(()) => {
                println!("{}: wrote {}", tool.name(), out.join(tool.name()).display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    match runner::run(&cfg, &out) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {} = {:.6e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
            }
            println!("{}: {}", cfg.experiment, if report.pass { "pass" } else { "FAIL" });
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
