use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    generate_synthetic_data, histogram, histogram_tv, iat, quantile, rwm_sample, twalk_sample,
    Chain, LogDensity, Observation, PosteriorSpec, SamplerKind, TwalkParams,
};
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::surrogate::{
    preprocess, provenance_hash, ParameterDomain, PreprocessOptions, SurrogateStore,
};

use super::config::{ExperimentConfig, ExperimentKind, ReferenceMode};
use super::forward::{observation_points, FemForward, OracleForward};

/// File layout of one experiment's output directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts { dir: dir.into() }
    }

    pub fn data(&self) -> PathBuf {
        self.dir.join("data.json")
    }

    pub fn store(&self, label: &str) -> PathBuf {
        self.dir.join(format!("store_{label}.bin"))
    }

    pub fn chain(&self, name: &str) -> PathBuf {
        self.dir.join(format!("chain_{name}.csv"))
    }

    pub fn histogram(&self, name: &str) -> PathBuf {
        self.dir.join(format!("hist_{name}.csv"))
    }

    pub fn reconstruction(&self, name: &str) -> PathBuf {
        self.dir.join(format!("reconstruction_{name}.csv"))
    }

    pub fn timing_preprocess(&self) -> PathBuf {
        self.dir.join("timing_preprocess.json")
    }

    pub fn timing_sampling(&self) -> PathBuf {
        self.dir.join("timing_sampling.json")
    }

    pub fn report_json(&self) -> PathBuf {
        self.dir.join("report.json")
    }

    pub fn report_txt(&self) -> PathBuf {
        self.dir.join("report.txt")
    }

    fn ensure_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        Ok(())
    }
}

/// Writes through a temporary sibling so an interrupted run never leaves a
/// partial artifact behind.
fn write_atomic(path: &Path, write: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        write(&mut out)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)
            .map_err(|e| Error::InvalidArgument(format!("cannot encode {}: {e}", path.display())))?;
        writeln!(out)?;
        Ok(())
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    serde_json::from_reader(BufReader::new(fs::File::open(path)?))
        .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))
}

fn read_json_or_default<T: for<'de> Deserialize<'de> + Default>(path: &Path) -> Result<T> {
    if path.exists() {
        read_json(path)
    } else {
        Ok(T::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub true_theta: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
    pub points: Vec<Point>,
    pub y: Vec<f64>,
    /// Forward map that produced the clean values.
    pub generator: String,
}

impl SyntheticData {
    pub fn observation(&self) -> Result<Observation> {
        Observation::new(self.y.clone(), self.points.clone(), self.sigma)
    }
}

/// Synthetic data for the configured truth: closed form for the centered
/// inclusions, a finer FEM mesh for the anomaly.
pub fn generate_data(config: &ExperimentConfig) -> Result<SyntheticData> {
    let model = config.model_structure();
    let points = observation_points(config.model.domain_radius, config.m);
    let (forward, generator): (Box<dyn Fn(&[f64]) -> Result<Vec<f64>>>, String) =
        match config.experiment {
            ExperimentKind::Conductivity | ExperimentKind::Radius => {
                let oracle = OracleForward::new(model, &points)?;
                (Box::new(move |t| oracle.forward(t)), "closed form".into())
            }
            ExperimentKind::Anomaly => {
                let mut spec = config.mesh_spec();
                spec.refinements += config.mesh.data_refinements;
                let fem = FemForward::new(model, spec, points.clone())?;
                (Box::new(move |t| fem.forward(t)), format!("fem {}", spec.describe()))
            }
        };
    let obs = generate_synthetic_data(&config.true_theta, forward, points, config.sigma, config.data_seed)?;
    Ok(SyntheticData {
        true_theta: config.true_theta.clone(),
        sigma: config.sigma,
        seed: config.data_seed,
        points: obs.points,
        y: obs.y,
        generator,
    })
}

/// Loads the synthetic data, generating it first when absent.
pub fn ensure_data(config: &ExperimentConfig, force: bool) -> Result<SyntheticData> {
    let art = Artifacts::new(&config.output_dir);
    art.ensure_dir()?;
    let path = art.data();
    if path.exists() && !force {
        let data: SyntheticData = read_json(&path)?;
        if data.true_theta == config.true_theta && data.sigma == config.sigma && data.seed == config.data_seed
            && data.points.len() == config.m
        {
            return Ok(data);
        }
        log::info!("{} does not match the configuration; regenerating", path.display());
    }
    let data = generate_data(config)?;
    write_json(&path, &data)?;
    Ok(data)
}

fn store_provenance(config: &ExperimentConfig) -> String {
    provenance_hash(&format!(
        "{:?} | {} | m={} | k={}",
        config.model_structure(),
        config.mesh_spec().describe(),
        config.m,
        config.k
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessTiming {
    pub design_points: usize,
    /// Wall-clock seconds of the parallel solve loop.
    pub offline_seconds: f64,
    /// One sequential FEM forward solve plus observation.
    pub fem_solve_seconds: f64,
    /// Mean cost of one surrogate evaluation.
    pub surrogate_eval_seconds: f64,
}

impl PreprocessTiming {
    pub fn speedup(&self) -> f64 {
        self.fem_solve_seconds / self.surrogate_eval_seconds
    }
}

/// Mean cost of `count` surrogate evaluations at seeded uniform parameters.
pub fn time_surrogate(store: &SurrogateStore, k: usize, eta: f64, count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<Vec<f64>> = (0..count.max(1)).map(|_| store.model.domain.sample_uniform(&mut rng)).collect();
    let start = Instant::now();
    let mut sink = 0.0;
    for t in &thetas {
        sink += store.evaluate(t, k, eta)?[0];
    }
    std::hint::black_box(sink);
    Ok(start.elapsed().as_secs_f64() / thetas.len() as f64)
}

/// Builds (or reuses) one surrogate store per configured design.
pub fn run_preprocess(config: &ExperimentConfig, force: bool) -> Result<BTreeMap<String, PreprocessTiming>> {
    let art = Artifacts::new(&config.output_dir);
    art.ensure_dir()?;
    let model = config.model_structure();
    let points = observation_points(config.model.domain_radius, config.m);
    let fem = FemForward::new(model, config.mesh_spec(), points)?;
    let mut timing: BTreeMap<String, PreprocessTiming> = read_json_or_default(&art.timing_preprocess())?;
    let options = PreprocessOptions {
        k_default: config.k,
        eta: config.eta,
        provenance: store_provenance(config),
        retain_solutions: false,
    };
    for variant in config.design_variants()? {
        let path = art.store(&variant.label);
        if path.exists() && !force && timing.contains_key(&variant.label) {
            log::info!("reusing {}", path.display());
            continue;
        }
        log::info!("preprocessing {} ({} design points)", variant.label, variant.design.len());
        let start = Instant::now();
        let store = preprocess(&variant.design, &model, |t| fem.solve(t), |s| fem.observe(s), &options)?;
        let offline_seconds = start.elapsed().as_secs_f64();
        store.save(&path)?;

        let start = Instant::now();
        std::hint::black_box(fem.forward(&config.true_theta)?);
        let fem_solve_seconds = start.elapsed().as_secs_f64();
        let surrogate_eval_seconds =
            time_surrogate(&store, config.k, config.eta, config.analysis.timing_evaluations, 0)?;
        timing.insert(
            variant.label.clone(),
            PreprocessTiming {
                design_points: variant.design.len(),
                offline_seconds,
                fem_solve_seconds,
                surrogate_eval_seconds,
            },
        );
        write_json(&art.timing_preprocess(), &timing)?;
    }
    Ok(timing)
}

/// How the sampler evaluates the forward map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplingMode {
    Surrogate(String),
    Oracle,
    Fem,
}

impl SamplingMode {
    pub fn name(&self) -> String {
        match self {
            SamplingMode::Surrogate(label) => format!("surrogate_{label}"),
            SamplingMode::Oracle => "oracle".into(),
            SamplingMode::Fem => "fem".into(),
        }
    }

    pub fn is_reference(&self) -> bool {
        !matches!(self, SamplingMode::Surrogate(_))
    }
}

pub fn chain_name(mode: &SamplingMode, seed: u64) -> String {
    format!("{}_s{seed}", mode.name())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplingTiming {
    pub seconds: f64,
    pub iterations: usize,
    pub acceptance_rate: f64,
}

pub fn sampling_modes(config: &ExperimentConfig) -> Result<Vec<SamplingMode>> {
    let mut modes: Vec<SamplingMode> =
        config.design_variants()?.into_iter().map(|v| SamplingMode::Surrogate(v.label)).collect();
    match config.sampler.reference {
        ReferenceMode::Oracle => modes.push(SamplingMode::Oracle),
        ReferenceMode::Fem => modes.push(SamplingMode::Fem),
        ReferenceMode::None => {}
    }
    Ok(modes)
}

fn run_sampler<T: LogDensity>(
    target: &T,
    config: &ExperimentConfig,
    iterations: usize,
    seed: u64,
) -> Result<Chain> {
    let s = &config.sampler;
    match s.kind {
        SamplerKind::Twalk => {
            twalk_sample(target, &s.start, &s.start_companion, iterations, seed, &TwalkParams::default())
        }
        SamplerKind::Rwm => rwm_sample(target, &s.start, iterations, s.step_scale, seed),
    }
}

/// Runs one chain in the given mode and writes it to disk.
pub fn sample_one(
    config: &ExperimentConfig,
    data: &SyntheticData,
    mode: &SamplingMode,
    seed: u64,
) -> Result<(Chain, f64)> {
    let art = Artifacts::new(&config.output_dir);
    let model = config.model_structure();
    let observation = data.observation()?;
    let mut iterations = config.sampler.iterations;
    let mut burn_in = config.sampler.burn_in;
    let start = Instant::now();
    let mut chain = match mode {
        SamplingMode::Surrogate(label) => {
            let store = SurrogateStore::load(&art.store(label))?;
            if store.m != observation.len() {
                return Err(Error::Config(format!(
                    "store {label} has {} observations per point, data has {}",
                    store.m,
                    observation.len()
                )));
            }
            let (k, eta) = (config.k, config.eta);
            let spec = PosteriorSpec::new(|t: &[f64]| store.evaluate(t, k, eta), model.domain, observation);
            run_sampler(&spec, config, iterations, seed)?
        }
        SamplingMode::Oracle => {
            let oracle = OracleForward::new(model, &data.points)?;
            let spec = PosteriorSpec::new(|t: &[f64]| oracle.forward(t), model.domain, observation);
            run_sampler(&spec, config, iterations, seed)?
        }
        SamplingMode::Fem => {
            if iterations > config.sampler.fem_max_iterations {
                log::warn!(
                    "FEM inside the sampler: capping {} iterations at {}",
                    iterations,
                    config.sampler.fem_max_iterations
                );
                iterations = config.sampler.fem_max_iterations;
                burn_in = burn_in.min(iterations / 10);
            }
            let fem = FemForward::new(model, config.mesh_spec(), data.points.clone())?;
            let spec = PosteriorSpec::new(|t: &[f64]| fem.forward(t), model.domain, observation);
            run_sampler(&spec, config, iterations, seed)?
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    chain.burn_in = burn_in;
    if chain.retained_len() >= crate::bayes::diagnostics::MIN_IAT_LEN {
        if let Err(e) = chain.compute_iat() {
            log::warn!("IAT unavailable for {}: {e}", chain_name(mode, seed));
        }
    }
    let path = art.chain(&chain_name(mode, seed));
    write_atomic(&path, |out| chain.write_to(out))?;
    Ok((chain, seconds))
}

/// Runs every (mode, seed) chain in parallel; existing chains are kept
/// unless `force`.
pub fn run_sampling(config: &ExperimentConfig, force: bool) -> Result<BTreeMap<String, SamplingTiming>> {
    let art = Artifacts::new(&config.output_dir);
    art.ensure_dir()?;
    let data = ensure_data(config, false)?;
    let modes = sampling_modes(config)?;
    for mode in &modes {
        if let SamplingMode::Surrogate(label) = mode {
            let path = art.store(label);
            if !path.exists() {
                return Err(Error::MissingArtifact(path));
            }
        }
    }
    let tasks: Vec<(SamplingMode, u64)> = modes
        .iter()
        .flat_map(|m| config.sampler.seeds.iter().map(move |&s| (m.clone(), s)))
        .filter(|(m, s)| force || !art.chain(&chain_name(m, *s)).exists())
        .collect();
    let results: Vec<(String, Chain, f64)> = tasks
        .par_iter()
        .map(|(mode, seed)| {
            log::info!("sampling {}", chain_name(mode, *seed));
            let (chain, secs) = sample_one(config, &data, mode, *seed)?;
            Ok((chain_name(mode, *seed), chain, secs))
        })
        .collect::<Result<_>>()?;
    let mut timing: BTreeMap<String, SamplingTiming> = read_json_or_default(&art.timing_sampling())?;
    for (name, chain, seconds) in results {
        timing.insert(
            name,
            SamplingTiming { seconds, iterations: chain.n_iter, acceptance_rate: chain.acceptance_rate },
        );
    }
    write_json(&art.timing_sampling(), &timing)?;
    Ok(timing)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub name: String,
    pub retained: usize,
    pub acceptance_rate: f64,
    pub iat: Option<f64>,
    pub mean: Vec<f64>,
    /// Per coordinate: 0.05, 0.5 and 0.95 quantiles.
    pub quantiles: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSummary {
    pub chain: String,
    pub store: String,
    pub design_points: usize,
    pub at_posterior_median: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub chain: String,
    pub spacing: usize,
    pub anomaly_radius: f64,
    pub centers: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub true_theta: Vec<f64>,
    pub chains: Vec<ChainSummary>,
    /// Chain names in table order.
    pub tv_names: Vec<String>,
    /// Pairwise histogram TV, largest over parameter components.
    pub tv_table: Vec<Vec<f64>>,
    /// TV of each non-reference chain against the reference chain.
    pub tv_to_reference: BTreeMap<String, f64>,
    pub epsilon: Vec<EpsilonSummary>,
    pub reconstructions: Vec<Reconstruction>,
}

fn histogram_range(domain: &ParameterDomain) -> (f64, f64) {
    match *domain {
        ParameterDomain::Interval { lo, hi } => (lo, hi),
        ParameterDomain::Disk { radius } => (-radius, radius),
    }
}

/// Marginal histogram TV, maximized over parameter components.
pub fn chain_tv(a: &Chain, b: &Chain, bins: usize, domain: &ParameterDomain) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..a.dim.min(b.dim) {
        let tv = histogram_tv(&a.coordinate(j), &b.coordinate(j), bins, Some(histogram_range(domain)))?;
        worst = worst.max(tv);
    }
    Ok(worst)
}

fn summarize(name: &str, chain: &Chain) -> ChainSummary {
    let mut mean = Vec::new();
    let mut quantiles = Vec::new();
    for j in 0..chain.dim {
        let mut x = chain.coordinate(j);
        mean.push(x.iter().sum::<f64>() / x.len().max(1) as f64);
        x.sort_by(f64::total_cmp);
        quantiles.push(if x.is_empty() {
            [f64::NAN; 3]
        } else {
            [quantile(&x, 0.05), quantile(&x, 0.5), quantile(&x, 0.95)]
        });
    }
    let iat = chain.iat.or_else(|| {
        (0..chain.dim)
            .map(|j| iat(&chain.coordinate(j)).ok())
            .try_fold(1.0f64, |m, t| t.map(|t| m.max(t)))
    });
    ChainSummary {
        name: name.to_string(),
        retained: chain.retained_len(),
        acceptance_rate: chain.acceptance_rate,
        iat,
        mean,
        quantiles,
    }
}

/// Posterior draws spaced by the IAT, taken from the end of the chain.
pub fn reconstruction_draws(chain: &Chain, count: usize, spacing: usize) -> Vec<[f64; 2]> {
    let spacing = spacing.max(1);
    let first = chain.first_retained();
    let mut out: Vec<[f64; 2]> = (first..chain.len())
        .rev()
        .step_by(spacing)
        .take(count)
        .map(|i| {
            let s = chain.sample(i);
            [s[0], s[1]]
        })
        .collect();
    out.reverse();
    out
}

fn load_chains(art: &Artifacts) -> Result<Vec<(String, Chain)>> {
    let mut names: Vec<String> = fs::read_dir(&art.dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_prefix("chain_").and_then(|n| n.strip_suffix(".csv")).map(str::to_string)
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let chain = Chain::read_from(BufReader::new(fs::File::open(art.chain(&n))?))?;
            Ok((n, chain))
        })
        .collect()
}

/// Histograms, quantiles, TV tables, error-bound summaries and (for the
/// anomaly) reconstruction draws from every chain in the output directory.
pub fn run_analysis(config: &ExperimentConfig) -> Result<Report> {
    let art = Artifacts::new(&config.output_dir);
    let chains = load_chains(&art)?;
    if chains.is_empty() {
        return Err(Error::MissingArtifact(art.dir.join("chain_*.csv")));
    }
    let model = config.model_structure();
    let bins = config.analysis.bins;

    for (name, chain) in &chains {
        write_atomic(&art.histogram(name), |out| {
            writeln!(out, "coordinate,lo,hi,mass")?;
            for j in 0..chain.dim {
                let (lo, hi) = histogram_range(&model.domain);
                let h = histogram(&chain.coordinate(j), bins, lo, hi);
                for b in 0..bins {
                    writeln!(out, "{j},{},{},{}", h.edges[b], h.edges[b + 1], h.masses[b])?;
                }
            }
            Ok(())
        })?;
    }
    let summaries: Vec<ChainSummary> = chains.iter().map(|(n, c)| summarize(n, c)).collect();

    let n = chains.len();
    let mut tv_table = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let tv = chain_tv(&chains[i].1, &chains[j].1, bins, &model.domain)?;
            tv_table[i][j] = tv;
            tv_table[j][i] = tv;
        }
    }

    let is_reference = |name: &str| name.starts_with("oracle_") || name.starts_with("fem_");
    let mut tv_to_reference = BTreeMap::new();
    let references: Vec<usize> = (0..n).filter(|&i| is_reference(&chains[i].0)).collect();
    if let Some(&fallback) = references.first() {
        for i in (0..n).filter(|&i| !is_reference(&chains[i].0)) {
            let seed_suffix = chains[i].0.rsplit('_').next().unwrap_or("");
            let r = references
                .iter()
                .copied()
                .find(|&r| chains[r].0.rsplit('_').next() == Some(seed_suffix))
                .unwrap_or(fallback);
            tv_to_reference.insert(chains[i].0.clone(), tv_table[i][r]);
        }
    }

    let mut epsilon = Vec::new();
    for (idx, (name, chain)) in chains.iter().enumerate() {
        let Some(label) = name.strip_prefix("surrogate_").and_then(|r| r.rsplit_once('_')).map(|(l, _)| l) else {
            continue;
        };
        let path = art.store(label);
        if !path.exists() || chain.retained_len() == 0 {
            continue;
        }
        let store = SurrogateStore::load(&path)?;
        let first = chain.first_retained();
        let stride = (chain.retained_len() / 1000).max(1);
        let mut eps: Vec<f64> = (first..chain.len())
            .step_by(stride)
            .map(|i| store.error_bound(chain.sample(i), config.k, config.eta).map(|b| b.residual))
            .collect::<Result<_>>()?;
        eps.sort_by(f64::total_cmp);
        let median_theta: Vec<f64> = summaries[idx].quantiles.iter().map(|q| q[1]).collect();
        let at_median = if model.domain.contains(&median_theta) {
            store.error_bound(&median_theta, config.k, config.eta)?.residual
        } else {
            f64::NAN
        };
        epsilon.push(EpsilonSummary {
            chain: name.clone(),
            store: label.to_string(),
            design_points: store.len(),
            at_posterior_median: at_median,
            min: eps[0],
            median: quantile(&eps, 0.5),
            max: eps[eps.len() - 1],
        });
    }

    let mut reconstructions = Vec::new();
    if config.experiment == ExperimentKind::Anomaly {
        for ((name, chain), summary) in chains.iter().zip(&summaries) {
            let spacing = summary.iat.map_or(1, |t| t.ceil() as usize);
            let centers = reconstruction_draws(chain, config.analysis.reconstruction_samples, spacing);
            write_atomic(&art.reconstruction(name), |out| {
                writeln!(out, "cx,cy,r")?;
                for c in &centers {
                    writeln!(out, "{},{},{}", c[0], c[1], config.model.anomaly_radius)?;
                }
                Ok(())
            })?;
            reconstructions.push(Reconstruction {
                chain: name.clone(),
                spacing,
                anomaly_radius: config.model.anomaly_radius,
                centers,
            });
        }
    }

    let report = Report {
        experiment: config.experiment,
        true_theta: config.true_theta.clone(),
        chains: summaries,
        tv_names: chains.iter().map(|(n, _)| n.clone()).collect(),
        tv_table,
        tv_to_reference,
        epsilon,
        reconstructions,
    };
    write_json(&art.report_json(), &report)?;
    let text = render_report(&report, &art)?;
    write_atomic(&art.report_txt(), |out| Ok(out.write_all(text.as_bytes())?))?;
    Ok(report)
}

fn render_report(report: &Report, art: &Artifacts) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {:?}   truth: {:?}\n", report.experiment, report.true_theta);
    let _ = writeln!(s, "{:<24} {:>8} {:>7} {:>7}  quantiles 5% / 50% / 95%", "chain", "kept", "accept", "IAT");
    for c in &report.chains {
        let q: Vec<String> =
            c.quantiles.iter().map(|q| format!("{:.4} / {:.4} / {:.4}", q[0], q[1], q[2])).collect();
        let iat = c.iat.map_or("-".to_string(), |t| format!("{t:.1}"));
        let _ = writeln!(s, "{:<24} {:>8} {:>7.3} {:>7}  {}", c.name, c.retained, c.acceptance_rate, iat, q.join("; "));
    }
    if !report.tv_to_reference.is_empty() {
        let _ = writeln!(s, "\nTV to reference");
        for (name, tv) in &report.tv_to_reference {
            let _ = writeln!(s, "  {name:<24} {tv:.4}");
        }
    }
    if !report.epsilon.is_empty() {
        let _ = writeln!(s, "\nerror bound eps over posterior draws");
        let _ = writeln!(s, "  {:<22} {:>6} {:>12} {:>12} {:>12} {:>12}", "chain", "n", "at median", "min", "median", "max");
        for e in &report.epsilon {
            let _ = writeln!(
                s,
                "  {:<22} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                e.chain, e.design_points, e.at_posterior_median, e.min, e.median, e.max
            );
        }
    }
    let pre: BTreeMap<String, PreprocessTiming> = read_json_or_default(&art.timing_preprocess())?;
    if !pre.is_empty() {
        let _ = writeln!(s, "\ntiming: offline (s), one FEM solve (s), one surrogate evaluation (s), ratio");
        for (label, t) in &pre {
            let _ = writeln!(
                s,
                "  {label:<10} {:>10.3} {:>12.4e} {:>12.4e} {:>10.0}",
                t.offline_seconds, t.fem_solve_seconds, t.surrogate_eval_seconds, t.speedup()
            );
        }
    }
    let smp: BTreeMap<String, SamplingTiming> = read_json_or_default(&art.timing_sampling())?;
    if !smp.is_empty() {
        let _ = writeln!(s, "\ntiming: MCMC (s)");
        for (name, t) in &smp {
            let _ = writeln!(s, "  {name:<24} {:>10.3}  ({} iterations)", t.seconds, t.iterations);
        }
    }
    Ok(s)
}

/// Data, preprocessing, sampling and analysis in sequence. Existing
/// artifacts are reused unless `force`.
pub fn run_full(config: &ExperimentConfig, force: bool) -> Result<Report> {
    ensure_data(config, force)?;
    run_preprocess(config, force)?;
    run_sampling(config, force)?;
    run_analysis(config)
}

/// Fails with `MissingArtifact` unless every store the config needs exists.
pub fn require_stores(config: &ExperimentConfig) -> Result<()> {
    let art = Artifacts::new(&config.output_dir);
    for v in config.design_variants()? {
        let path = art.store(&v.label);
        if !path.exists() {
            return Err(Error::MissingArtifact(path));
        }
    }
    Ok(())
}
