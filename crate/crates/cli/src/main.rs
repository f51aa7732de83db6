use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use twolayer_qg::config::{ConstantsConfig, LatticeConfig, LtCheckConfig, Mode, OutputConfig};
use twolayer_qg::{execute, parse_config, parse_params, Error, ModelParams, RunConfig, StepperConfig};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(name = "twolayer-qg", version, about = "Two-layer quasi-geostrophic simulator and analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a full run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override `outputs.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth-rate table of the linearized system as CSV.
    Linstab {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "K")]
        k: usize,
        /// Write `linstab.csv` and a manifest here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constants ledger of the absorbing-ball and dimension bounds as JSON.
    Bounds {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long = "C-lt", default_value_t = 1.0)]
        c_lt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical Lieb-Thirring ratios over random orthonormal families.
    LtCheck {
        #[arg(long = "L", default_value_t = 2.0 * std::f64::consts::PI)]
        l: f64,
        #[arg(long = "K", default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 16)]
        max_size: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = twolayer_qg::lieb_thirring::DEFAULT_DECAY)]
        decay: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

fn config_for(model: ModelParams, k: usize, mode: Mode, dir: PathBuf) -> RunConfig {
    RunConfig {
        model,
        stepper: StepperConfig::default(),
        lattice: LatticeConfig { k, n: Some(3 * k) },
        outputs: OutputConfig { dir, ..Default::default() },
        mode,
        threads: 1,
        constants: ConstantsConfig::default(),
        lt_check: LtCheckConfig::default(),
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out } => {
            let mut cfg = parse_config(&read(&config)?)?;
            if let Some(dir) = out {
                cfg.outputs.dir = dir;
            }
            let res = execute(&cfg)?;
            let status = json!({
                "status": res.manifest.status,
                "dir": cfg.outputs.dir,
                "files": res.manifest.files.len(),
                "steps": res.summary.as_ref().map(|s| s.steps),
                "wall_time_s": res.manifest.wall_time_s,
            });
            println!("{status}");
        }
        Command::Linstab { params, k, out } => {
            let p = parse_params(&read(&params)?)?;
            match out {
                Some(dir) => {
                    execute(&config_for(p, k, Mode::Linstab, dir))?;
                }
                None => {
                    let scan = twolayer_qg::instability_scan(&p, k)?;
                    print!("{}", twolayer_qg::linstab_csv(&scan));
                }
            }
        }
        Command::Bounds { params, c, c_lt, out } => {
            let p = parse_params(&read(&params)?)?;
            match out {
                Some(dir) => {
                    let mut cfg = config_for(p, 1, Mode::Bounds, dir);
                    cfg.constants = ConstantsConfig { c, c_lt };
                    execute(&cfg)?;
                }
                None => {
                    let ledger = twolayer_qg::constants_ledger(&p, c, c_lt)?;
                    println!("{}", serde_json::to_string_pretty(&ledger)?);
                }
            }
        }
        Command::LtCheck { l, k, max_size, trials, decay, seed, out } => {
            let lt = LtCheckConfig { max_size, trials, decay };
            match out {
                Some(dir) => {
                    let mut cfg = config_for(ModelParams::inviscid(0.0, l), k, Mode::LtCheck, dir);
                    cfg.lt_check = lt;
                    cfg.stepper.seed = seed;
                    execute(&cfg)?;
                }
                None => {
                    let lattice = twolayer_qg::Lattice::new(l, k)?;
                    let rep = twolayer_qg::lt_check(lattice, max_size, trials, decay, seed)?;
                    println!("{}", serde_json::to_string_pretty(&rep)?);
                }
            }
        }
    }
    Ok(())
}

fn report(kind: &str, message: String, path: Option<String>, code: u8) -> ExitCode {
    let body = json!({ "error": kind, "message": message, "path": path });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report("usage", e.render().to_string().trim().to_string(), None, EXIT_CONFIG),
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match &e {
            Error::Config { path, .. } => report("config", e.to_string(), Some(path.clone()), EXIT_CONFIG),
            Error::InvalidParameter { field, .. } => {
                report("config", e.to_string(), Some(field.clone()), EXIT_CONFIG)
            }
            Error::Json(_) | Error::InvalidLattice(_) | Error::InsufficientResolution { .. } => {
                report("config", e.to_string(), None, EXIT_CONFIG)
            }
            Error::BlowUp { .. } => report("blow-up", e.to_string(), None, EXIT_BLOWUP),
            _ => report("runtime", e.to_string(), None, EXIT_OTHER),
        },
    }
}
