//! Configuration, orchestration and output for the `simulate` command.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, ExperimentConfig, ExperimentKind, Overrides, PolicyName};
use output::{Table, WrittenFiles};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    version,
    about = "Entanglement generation across dimerized spin chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Concurrence over a (theta, delta) grid.
    ThetaDeltaMap(RunArgs),
    /// Compare the four readout outcomes.
    ProjectionCompare(RunArgs),
    /// Rotation protocol against the attached-pair scheme, XX chain.
    BaselineCompareXx(RunArgs),
    /// Concurrence across the anisotropy of the XXZ chain.
    XxzDeltaScan(RunArgs),
    /// Rotation protocol against the attached-pair scheme, XXZ chain.
    BaselineCompareXxz(RunArgs),
    /// Closed-form free-fermion spectra against numerics.
    FreefermionCheck(RunArgs),
    /// One protocol run with the Werner fit of the ground state.
    SingleRun(RunArgs),
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::ThetaDeltaMap(_) => ExperimentKind::ThetaDeltaMap,
            Command::ProjectionCompare(_) => ExperimentKind::ProjectionCompare,
            Command::BaselineCompareXx(_) => ExperimentKind::BaselineCompareXx,
            Command::XxzDeltaScan(_) => ExperimentKind::XxzDeltaScan,
            Command::BaselineCompareXxz(_) => ExperimentKind::BaselineCompareXxz,
            Command::FreefermionCheck(_) => ExperimentKind::FreefermionCheck,
            Command::SingleRun(_) => ExperimentKind::SingleRun,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::ThetaDeltaMap(a)
            | Command::ProjectionCompare(a)
            | Command::BaselineCompareXx(a)
            | Command::XxzDeltaScan(a)
            | Command::BaselineCompareXxz(a)
            | Command::FreefermionCheck(a)
            | Command::SingleRun(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output path prefix; `.csv`, `.gp` and `.meta.json` are appended.
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Validate the config and print it with defaults applied.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long = "n-sites")]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub anisotropy: Option<f64>,
    /// Number or expression such as `pi/2`.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub outcome: Option<String>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "policy")]
    pub degeneracy_policy: Option<PolicyName>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            n_sites: self.n_sites,
            delta: self.delta,
            anisotropy: self.anisotropy,
            theta: self.theta.clone(),
            phi: self.phi.clone(),
            outcome: self.outcome.clone(),
            t_max: self.t_max,
            dt: self.dt,
            degeneracy_policy: self.degeneracy_policy,
            out: self.out.clone(),
            threads: self.threads,
        }
    }
}

/// Loads the config, applies flag overrides and validates.
pub fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut file = ConfigFile::load(&args.config)?;
    args.overrides().apply(&mut file);
    ExperimentConfig::resolve(kind, file)
}

pub struct Outcome {
    pub table: Table,
    pub files: WrittenFiles,
}

/// Runs the experiment on a pool of `cfg.threads` workers (all cores if unset) and writes its files.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("cannot start worker pool")?;
    let start = Instant::now();
    let table = pool.install(|| experiments::run_experiment(cfg));
    let files = output::write_all(&table, cfg, pool.current_num_threads(), start.elapsed().as_secs_f64())?;
    Ok(Outcome { table, files })
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_POINT_FAILED: u8 = 2;

/// Full command: returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let kind = cli.command.kind();
    let args = cli.command.args();
    let cfg = match load_config(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("serializable"));
        return EXIT_OK;
    }
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    for line in outcome.table.summary_lines() {
        println!("{line}");
    }
    for r in outcome.table.rows.iter().filter(|r| !r.ok()) {
        if let Some(d) = &r.detail {
            eprintln!("warning: {}: {d}", r.cells.join(","));
        }
    }
    let failed = outcome.table.failed();
    eprintln!(
        "wrote {} ({} rows, {failed} failed)",
        outcome.files.csv.display(),
        outcome.table.rows.len()
    );
    if failed > 0 {
        EXIT_POINT_FAILED
    } else {
        EXIT_OK
    }
}
