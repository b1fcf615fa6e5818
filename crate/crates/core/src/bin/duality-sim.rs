use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use duality_sim::duality::SphereCaseName;
use duality_sim::error::{SimError, SimResult};
use duality_sim::evolution::Level;
use duality_sim::interferometer::{InteractionMode, KickModel};
use duality_sim::runner::output::{write_run, write_suite, write_sweep};
use duality_sim::runner::{epsilon_sweep, run, sphere_suite, CaseSpec, ComplexValue, ExperimentConfig};

#[derive(Parser)]
#[command(name = "duality-sim", version, about = "Double-slit, double-cavity which-path simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Husimi function and coherent overlap of the field against ε.
    SweepEpsilon {
        #[arg(long)]
        level: Level,
        #[arg(long, value_delimiter = ',', default_value = "0,1,3,5,9")]
        values: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run all seven named cases.
    Sphere {
        #[arg(long)]
        stage: u8,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// Values that replace the corresponding config entries.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    case: Option<SphereCaseName>,
    /// Real part, or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long)]
    t_prime: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<InteractionMode>,
    #[arg(long, value_parser = parse_kick)]
    kick: Option<KickModel>,
}

fn parse_mode(s: &str) -> Result<InteractionMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown mode '{s}'"))
}

fn parse_kick(s: &str) -> Result<KickModel, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown kick model '{s}'"))
}

fn parse_complex(s: &str) -> SimResult<ComplexValue> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| SimError::Config(format!("not a number: '{p}'")));
    match parts.as_slice() {
        [re] => Ok(ComplexValue(C64::new(num(re)?, 0.0))),
        [re, im] => Ok(ComplexValue(C64::new(num(re)?, num(im)?))),
        _ => Err(SimError::Config(format!("expected 're' or 're,im', got '{s}'"))),
    }
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> SimResult<()> {
        if let Some(c) = self.case {
            cfg.case = CaseSpec::Named(c);
        }
        if let Some(a) = &self.alpha {
            cfg.alpha = parse_complex(a)?;
        }
        if let Some(e) = &self.epsilon {
            cfg.epsilon = parse_complex(e)?;
        }
        if let Some(t) = self.t_prime {
            cfg.t_prime = t;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(k) = self.kick {
            cfg.kick = k;
        }
        cfg.validate()
    }
}

fn load_or_default(path: Option<&Path>, stage: u8) -> SimResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p),
        None => Ok(ExperimentConfig::new(stage, CaseSpec::Named(SphereCaseName::V1))),
    }
}

fn execute(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Run { config, out, overrides } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            overrides.apply(&mut cfg)?;
            let result = run(&cfg)?;
            write_run(&result, &out)?;
            match result.visibility {
                Some(v) => println!("{}: fringe visibility {v:.6}", cfg.case.label()),
                None => println!("{}: fringe visibility undefined", cfg.case.label()),
            }
        }
        Command::SweepEpsilon { level, values, config, out } => {
            let cfg = load_or_default(config.as_deref(), 3)?;
            let q = cfg.q_grid.unwrap_or_default();
            let points = epsilon_sweep(&cfg, &values, level, &q)?;
            write_sweep(&points, level, &out)?;
            for p in &points {
                println!("epsilon {:>6}: overlap {:.6e}", p.epsilon, p.overlap);
            }
        }
        Command::Sphere { stage, config, out, overrides } => {
            let mut cfg = load_or_default(config.as_deref(), stage)?;
            cfg.stage = stage;
            overrides.apply(&mut cfg)?;
            let results = sphere_suite(&cfg)?;
            write_suite(&results, &out)?;
            for (name, r) in &results {
                let v = r.visibility.map_or("undefined".to_string(), |v| format!("{v:.6}"));
                println!("{name:>3}: fringe visibility {v}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
