use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use openq::config::{ConfigFile, SimConfig};
use openq::error::{Error, Result};
use openq::experiment::{self, compare_outputs, run_stem};
use openq::output::{generator_csv, tensor_csv, trajectory_csv, write_file};

#[derive(Parser)]
#[command(
    name = "openq",
    version,
    about = "Open quantum system dynamics with Lindblad and Redfield generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one generator and write the trajectory.
    Simulate(Common),
    /// Run all eight generator combinations and write a manifest.
    Compare(Common),
    /// Tabulate both spectral tensor variants against quadrature.
    Tensor {
        #[command(flatten)]
        common: Common,
        /// Detunings in cm^-1, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        delta: Option<Vec<f64>>,
    },
    /// Check bath and generator invariants for the configured system.
    Validate(Common),
    /// Write the nonzero entries of the generator matrix.
    DumpGenerator(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.path).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    model: Option<String>,
    #[arg(long, value_name = "gamma1|gamma2")]
    variant: Option<String>,
    #[arg(long, value_name = "lindblad|redfield")]
    form: Option<String>,
    #[arg(long, value_name = "BOOL")]
    secular: Option<bool>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl Common {
    fn resolve(&self) -> Result<SimConfig> {
        let mut file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if let Some(m) = &self.model {
            file.model.name = Some(m.clone());
            file.model.matrix = None;
            file.model.matrix_im = None;
        }
        if let Some(v) = &self.variant {
            file.method.variant = Some(v.clone());
        }
        if let Some(f) = &self.form {
            file.method.form = Some(f.clone());
        }
        if let Some(s) = self.secular {
            file.method.secular = Some(s);
        }
        if let Some(o) = &self.out {
            file.output.path = Some(o.clone());
        }
        file.resolve()
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    write_file(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn simulate(cfg: &SimConfig) -> Result<ExitCode> {
    let sim = experiment::simulate(cfg)?;
    let pairs = cfg.elements.pairs(cfg.dim());
    let name = format!("{}.csv", run_stem(cfg, sim.kind));
    write(
        &cfg.output_dir,
        &name,
        &trajectory_csv(&sim.trajectory, &pairs),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn compare(cfg: &SimConfig) -> Result<ExitCode> {
    let run = experiment::compare(cfg)?;
    let (files, manifest) = compare_outputs(cfg, &run);
    for (name, csv) in &files {
        write(&cfg.output_dir, name, csv)?;
    }
    write(&cfg.output_dir, "manifest.toml", &manifest.to_toml())?;
    let mut ok = true;
    for p in &run.panels {
        if let Err(e) = &p.outcome {
            eprintln!("panel {} ({}) failed: {e}", p.label, p.kind.label());
            ok = false;
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn tensor(cfg: &SimConfig, delta: Option<&[f64]>) -> Result<ExitCode> {
    let grid = match delta {
        Some(d) => d.to_vec(),
        None => experiment::default_tensor_grid_cm(&cfg.bath),
    };
    let rows = experiment::tensor_table(&cfg.bath, &grid)?;
    write(&cfg.output_dir, "tensor.csv", &tensor_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn validate(cfg: &SimConfig) -> Result<ExitCode> {
    let report = experiment::validate(cfg)?;
    print!("{}", report.render());
    if report.passed() {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("validation failed");
        Ok(ExitCode::from(1))
    }
}

fn dump_generator(cfg: &SimConfig) -> Result<ExitCode> {
    let l = experiment::generator_for(cfg)?;
    let name = format!("generator_{}.csv", run_stem(cfg, cfg.kind()));
    write(&cfg.output_dir, &name, &generator_csv(&l))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (common, delta) = match &cli.command {
        Command::Simulate(c)
        | Command::Compare(c)
        | Command::Validate(c)
        | Command::DumpGenerator(c) => (c, None),
        Command::Tensor { common, delta } => (common, delta.as_deref()),
    };
    let cfg = common.resolve()?;
    if common.print_config {
        print!("{}", cfg.to_toml());
        return Ok(ExitCode::SUCCESS);
    }
    match cli.command {
        Command::Simulate(_) => simulate(&cfg),
        Command::Compare(_) => compare(&cfg),
        Command::Tensor { .. } => tensor(&cfg, delta),
        Command::Validate(_) => validate(&cfg),
        Command::DumpGenerator(_) => dump_generator(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
