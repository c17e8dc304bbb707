use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use rarelab::config::parse_config;
use rarelab::experiments::{run, run_plot};
use rarelab::CliError;

#[derive(Parser)]
#[command(name = "rarelab", version, about = "Smooth rarefaction waves under non-Newtonian viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one perturbed wave and record diagnostics.
    Simulate(RunArgs),
    /// Tabulate and fit the decay rates of the smooth wave.
    Rates(RunArgs),
    /// Simulate every exponent in --p-list.
    Sweep(RunArgs),
    /// Grid refinement study.
    Convergence(RunArgs),
    /// Run the self-check property suite.
    Check(RunArgs),
    /// Render SVG plots for an existing output directory.
    Plot {
        /// Output directory of a previous run.
        dir: PathBuf,
    },
}

/// Every flag overrides the config-file key of the same name.
#[derive(Args, Default)]
struct RunArgs {
    /// `key = value` config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// burgers | quartic | poly:c0,c1,...
    #[arg(long)]
    flux: Option<String>,
    /// carreau | powerlaw
    #[arg(long)]
    viscosity: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated exponents for `sweep`.
    #[arg(long)]
    p_list: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u_minus: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u_plus: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    /// Cell count, or `auto`.
    #[arg(long)]
    n_cells: Option<String>,
    #[arg(long)]
    cfl_adv: Option<String>,
    #[arg(long)]
    cfl_diff: Option<String>,
    /// rk2 | rk3
    #[arg(long)]
    integrator: Option<String>,
    /// rusanov | godunov
    #[arg(long)]
    scheme: Option<String>,
    /// Drop the convective flux.
    #[arg(long)]
    pure_diffusion: bool,
    /// none | gaussian:a=,c=,s= | sine:a=,c=,s=,k= | random:a=,l=
    #[arg(long, allow_hyphen_values = true)]
    perturbation: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    snapshot_interval: Option<String>,
    /// Comma-separated times whose profiles are written.
    #[arg(long)]
    dump_times: Option<String>,
    #[arg(long)]
    transient: Option<String>,
    #[arg(long)]
    refinements: Option<String>,
    #[arg(long)]
    fit_t_min: Option<String>,
    #[arg(long)]
    fit_t_max: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

impl RunArgs {
    fn overrides(&self, experiment: &str) -> Vec<(String, String)> {
        let mut pairs = vec![("experiment".to_string(), experiment.to_string())];
        let values = [
            ("flux", &self.flux),
            ("viscosity", &self.viscosity),
            ("mu", &self.mu),
            ("p", &self.p),
            ("p_list", &self.p_list),
            ("q", &self.q),
            ("u_minus", &self.u_minus),
            ("u_plus", &self.u_plus),
            ("t_end", &self.t_end),
            ("n_cells", &self.n_cells),
            ("cfl_adv", &self.cfl_adv),
            ("cfl_diff", &self.cfl_diff),
            ("integrator", &self.integrator),
            ("scheme", &self.scheme),
            ("perturbation", &self.perturbation),
            ("seed", &self.seed),
            ("snapshot_interval", &self.snapshot_interval),
            ("dump_times", &self.dump_times),
            ("transient", &self.transient),
            ("refinements", &self.refinements),
            ("fit_t_min", &self.fit_t_min),
            ("fit_t_max", &self.fit_t_max),
        ];
        for (key, value) in values {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        if let Some(out) = &self.out {
            pairs.push(("out".into(), out.display().to_string()));
        }
        if self.pure_diffusion {
            pairs.push(("pure_diffusion".into(), "true".into()));
        }
        if self.plots {
            pairs.push(("plots".into(), "true".into()));
        }
        pairs
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    let (experiment, args) = match command {
        Command::Plot { dir } => {
            let files = run_plot(&dir).with_context(|| format!("plotting {}", dir.display()))?;
            println!("wrote {} plot(s) to {}", files.len(), dir.display());
            return Ok(());
        }
        Command::Simulate(a) => ("simulate", a),
        Command::Rates(a) => ("rates", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Convergence(a) => ("convergence", a),
        Command::Check(a) => ("check", a),
    };
    let config = parse_config(args.config.as_deref(), &args.overrides(experiment))
        .map_err(CliError::from)?;
    let line = run(&config).with_context(|| format!("{experiment} run in {}", config.out.display()))?;
    println!("{line}");
    println!("artifacts and manifest.json in {}", config.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = err.downcast_ref::<CliError>().map(CliError::category);
            let label = category.map_or("Io".to_string(), |c| format!("{c:?}"));
            eprintln!("error [{label}]: {err:#}");
            ExitCode::from(category.map_or(1, |c| c.exit_code()))
        }
    }
}
