use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbsurrogate::experiments::{
    config::ExperimentKind, pipeline, run_analysis, run_full, run_preprocess, run_sampling,
    Artifacts, ExperimentConfig, FemForward,
};
use pbsurrogate::oracle::exact_boundary_cos4;
use pbsurrogate::surrogate::{verify_design_approximation, ParameterDomain, SurrogateStore};
use pbsurrogate::{Error, Result};

#[derive(Parser)]
#[command(name = "pbsurrogate", version, about = "Physics-based surrogate Bayesian inversion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment to run with default settings (ignored with --config).
    #[arg(value_parser = ["conductivity", "radius", "anomaly"])]
    experiment: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single sampler seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Recompute artifacts that already exist.
    #[arg(long)]
    force: bool,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at every design point and persist the surrogate stores.
    Preprocess(Common),
    /// Run the configured MCMC chains.
    Sample(Common),
    /// Summarize the chains in the output directory.
    Analyze(Common),
    /// Data, preprocessing, sampling and analysis.
    Run(Common),
    /// Check the k-nearest-neighbor covering radius of each design.
    VerifyDesign {
        #[command(flatten)]
        common: Common,
        /// Target for the k-th neighbor G value; defaults to the design spacing.
        #[arg(long)]
        eps: Option<f64>,
        /// Sweep points per unit of parameter length.
        #[arg(long, default_value_t = 1000.0)]
        density: f64,
    },
    /// Print the closed-form boundary potential for a centered inclusion.
    Oracle {
        #[arg(long, default_value_t = 3.2)]
        contrast: f64,
        #[arg(long, default_value_t = 0.85)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        m: usize,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut config = match (&c.config, &c.experiment) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::defaults(name.parse::<ExperimentKind>()?),
        (None, None) => {
            return Err(Error::Config("give an experiment name or --config PATH".into()));
        }
    };
    if let Some(seed) = c.seed {
        config.sampler.seeds = vec![seed];
    }
    if let Some(out) = &c.output {
        config.output_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn verify_design(config: &ExperimentConfig, eps: Option<f64>, density: f64) -> Result<()> {
    let model = config.model_structure();
    let art = Artifacts::new(&config.output_dir);
    let samples: Vec<Vec<f64>> = match model.domain {
        ParameterDomain::Interval { lo, hi } => {
            let n = ((hi - lo) * density).ceil().max(10.0) as usize;
            (0..=n).map(|i| vec![lo + (hi - lo) * i as f64 / n as f64]).collect()
        }
        ParameterDomain::Disk { radius } => {
            let n = (2.0 * radius * density.sqrt()).ceil().max(10.0) as i64;
            let step = 2.0 * radius / n as f64;
            (0..=n)
                .flat_map(|i| (0..=n).map(move |j| vec![-radius + i as f64 * step, -radius + j as f64 * step]))
                .filter(|p| model.domain.contains(p))
                .collect()
        }
    };
    for variant in config.design_variants()? {
        let store_path = art.store(&variant.label);
        let f_max = if store_path.exists() {
            SurrogateStore::load(&store_path)?.f_max()
        } else {
            let fem = FemForward::new(model, config.mesh_spec(), vec![[config.model.domain_radius, 0.0]])?;
            model.functional.eval(&fem.solve(&config.true_theta)?)
        };
        let target = match (eps, model.domain) {
            (Some(e), _) => e,
            (None, ParameterDomain::Interval { lo, hi }) => {
                model.g(&[lo], &[lo + (hi - lo) / (variant.design.len() - 1).max(1) as f64])
            }
            (None, ParameterDomain::Disk { .. }) => f64::INFINITY,
        };
        let report = verify_design_approximation(
            &variant.design,
            &samples,
            |a, b| model.g(a, b),
            f_max,
            model.continuity_constant,
            config.k,
            target,
        )?;
        println!(
            "{}: n={} k={} max k-th G={:.6} at {:?}; target={} {}; bound C*Fmax*G={:.6e}",
            variant.label,
            variant.design.len(),
            config.k,
            report.max_kth_g,
            report.worst_sample,
            report.target,
            if report.passes { "PASS" } else { "FAIL" },
            report.achieved_bound
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(c) => {
            let config = load_config(&c)?;
            for (label, t) in run_preprocess(&config, c.force)? {
                println!(
                    "{label}: n={} offline {:.2}s, FEM solve {:.3e}s, surrogate {:.3e}s ({:.0}x)",
                    t.design_points,
                    t.offline_seconds,
                    t.fem_solve_seconds,
                    t.surrogate_eval_seconds,
                    t.speedup()
                );
            }
        }
        Command::Sample(c) => {
            let config = load_config(&c)?;
            pipeline::require_stores(&config)?;
            for (name, t) in run_sampling(&config, c.force)? {
                println!("{name}: {:.2}s, acceptance {:.3}", t.seconds, t.acceptance_rate);
            }
        }
        Command::Analyze(c) => {
            let config = load_config(&c)?;
            run_analysis(&config)?;
            print!("{}", std::fs::read_to_string(Artifacts::new(&config.output_dir).report_txt())?);
        }
        Command::Run(c) => {
            let config = load_config(&c)?;
            run_full(&config, c.force)?;
            print!("{}", std::fs::read_to_string(Artifacts::new(&config.output_dir).report_txt())?);
        }
        Command::VerifyDesign { common, eps, density } => {
            let config = load_config(&common)?;
            verify_design(&config, eps, density)?;
        }
        Command::Oracle { contrast, radius, m } => {
            pbsurrogate::oracle::CenteredInclusionProblem::cos4(contrast, radius)?;
            println!("angle,u");
            for i in 0..m {
                let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                println!("{t},{}", exact_boundary_cos4(contrast, radius, t));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
