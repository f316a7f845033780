use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes::SamplerKind;
use crate::error::{Error, Result};
use crate::surrogate::{
    build_design_dyadic_1d, build_design_grid_2d, build_design_triangular_2d, Design,
    ModelStructure, DEFAULT_ETA,
};

use super::forward::MeshSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Conductivity,
    Radius,
    Anomaly,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conductivity" => Ok(ExperimentKind::Conductivity),
            "radius" => Ok(ExperimentKind::Radius),
            "anomaly" => Ok(ExperimentKind::Anomaly),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Radius of the computational disk.
    pub domain_radius: f64,
    /// Known inclusion radius (conductivity experiment).
    pub inclusion_radius: f64,
    /// Known contrast ρ (radius and anomaly experiments).
    pub contrast: f64,
    /// Known anomaly radius (anomaly experiment).
    pub anomaly_radius: f64,
    /// Bounds of the scalar parameter (conductivity and radius experiments).
    pub theta_lo: f64,
    pub theta_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Dyadic,
    Triangular,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub kind: DesignKind,
    /// Dyadic levels, one store each.
    pub levels: Vec<u32>,
    /// Lattice spacings, one store each.
    pub spacings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub target_h: f64,
    pub refinements: u32,
    /// Extra refinements used only to generate synthetic data by FEM.
    pub data_refinements: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Closed-form forward map (centered-inclusion experiments only).
    Oracle,
    /// Finite element solve inside the sampler loop.
    Fem,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub iterations: usize,
    pub burn_in: usize,
    pub seeds: Vec<u64>,
    /// Proposal scale for random-walk Metropolis.
    pub step_scale: f64,
    /// Starting point and t-walk companion point.
    pub start: Vec<f64>,
    pub start_companion: Vec<f64>,
    pub reference: ReferenceMode,
    /// Iteration cap whenever the FEM runs inside the sampler.
    pub fem_max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub bins: usize,
    /// Posterior draws listed for the reconstruction overlay.
    pub reconstruction_samples: usize,
    /// Evaluations used to time the surrogate.
    pub timing_evaluations: usize,
}

/// Complete experiment description. Every field has a per-experiment
/// default, so a config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    pub true_theta: Vec<f64>,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Number of boundary observation points.
    pub m: usize,
    pub data_seed: u64,
    /// Neighbors per surrogate evaluation.
    pub k: usize,
    pub eta: f64,
    pub model: ModelConfig,
    pub design: DesignConfig,
    pub mesh: MeshConfig,
    pub sampler: SamplerConfig,
    pub analysis: AnalysisConfig,
}

/// One surrogate store to build: a design and its file label.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignVariant {
    pub label: String,
    pub design: Design,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let sampler = |start: Vec<f64>, companion: Vec<f64>, reference| SamplerConfig {
            kind: SamplerKind::Twalk,
            iterations: 100_000,
            burn_in: 10_000,
            seeds: vec![1],
            step_scale: 0.5,
            start,
            start_companion: companion,
            reference,
            fem_max_iterations: 200,
        };
        let analysis =
            AnalysisConfig { bins: 50, reconstruction_samples: 500, timing_evaluations: 10_000 };
        match experiment {
            ExperimentKind::Conductivity => ExperimentConfig {
                experiment,
                output_dir: PathBuf::from("out/conductivity"),
                true_theta: vec![3.2],
                sigma: 0.01,
                m: 10,
                data_seed: 1,
                k: 2,
                eta: DEFAULT_ETA,
                model: ModelConfig {
                    domain_radius: 1.0,
                    inclusion_radius: 0.85,
                    contrast: 0.0,
                    anomaly_radius: 0.0,
                    theta_lo: 0.0,
                    theta_hi: 10.0,
                },
                design: DesignConfig { kind: DesignKind::Dyadic, levels: vec![2, 3, 4, 5], spacings: vec![] },
                mesh: MeshConfig { target_h: 0.02, refinements: 0, data_refinements: 0 },
                sampler: sampler(vec![3.0], vec![7.0], ReferenceMode::Oracle),
                analysis,
            },
            ExperimentKind::Radius => ExperimentConfig {
                experiment,
                output_dir: PathBuf::from("out/radius"),
                true_theta: vec![0.725],
                sigma: 0.01,
                m: 10,
                data_seed: 1,
                k: 2,
                eta: DEFAULT_ETA,
                model: ModelConfig {
                    domain_radius: 1.0,
                    inclusion_radius: 0.0,
                    contrast: 6.0,
                    anomaly_radius: 0.0,
                    theta_lo: 0.0,
                    theta_hi: 1.0,
                },
                design: DesignConfig { kind: DesignKind::Dyadic, levels: vec![5, 7], spacings: vec![] },
                mesh: MeshConfig { target_h: 0.02, refinements: 0, data_refinements: 0 },
                sampler: sampler(vec![0.3], vec![0.7], ReferenceMode::Oracle),
                analysis,
            },
            // truth from the experiment text; the figure caption gives (2.25, -3.1)
            ExperimentKind::Anomaly => ExperimentConfig {
                experiment,
                output_dir: PathBuf::from("out/anomaly"),
                true_theta: vec![2.5, -3.1],
                sigma: 0.01,
                m: 20,
                data_seed: 1,
                k: 3,
                eta: DEFAULT_ETA,
                model: ModelConfig {
                    domain_radius: 5.0,
                    inclusion_radius: 0.0,
                    contrast: 6.0,
                    anomaly_radius: 0.25,
                    theta_lo: 0.0,
                    theta_hi: 0.0,
                },
                design: DesignConfig {
                    kind: DesignKind::Triangular,
                    levels: vec![],
                    spacings: vec![0.2245],
                },
                mesh: MeshConfig { target_h: 0.1, refinements: 0, data_refinements: 1 },
                sampler: sampler(vec![1.0, 0.5], vec![-0.5, -1.5], ReferenceMode::None),
                analysis,
            },
        }
    }

    /// Parses a TOML document, filling unspecified keys from the defaults of
    /// its `experiment`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
        let kind: ExperimentKind = user
            .get("experiment")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("missing string key 'experiment'".into()))?
            .parse()?;
        let defaults = toml::Table::try_from(Self::defaults(kind))
            .map_err(|e| Error::Config(format!("cannot encode defaults: {e}")))?;
        let merged = merge(defaults, user);
        let config: ExperimentConfig = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn model_structure(&self) -> ModelStructure {
        let m = &self.model;
        match self.experiment {
            ExperimentKind::Conductivity => {
                ModelStructure::conductivity(m.inclusion_radius, m.theta_lo, m.theta_hi)
            }
            ExperimentKind::Radius => ModelStructure::radius(m.contrast, m.theta_lo, m.theta_hi),
            ExperimentKind::Anomaly => {
                ModelStructure::anomaly(m.contrast, m.anomaly_radius, m.domain_radius)
            }
        }
    }

    pub fn mesh_spec(&self) -> MeshSpec {
        MeshSpec {
            domain_radius: self.model.domain_radius,
            target_h: self.mesh.target_h,
            refinements: self.mesh.refinements,
        }
    }

    pub fn design_variants(&self) -> Result<Vec<DesignVariant>> {
        let m = &self.model;
        match self.design.kind {
            DesignKind::Dyadic => self
                .design
                .levels
                .iter()
                .map(|&l| {
                    Ok(DesignVariant {
                        label: format!("l{l}"),
                        design: build_design_dyadic_1d(m.theta_lo, m.theta_hi, l)?,
                    })
                })
                .collect(),
            DesignKind::Triangular | DesignKind::Grid => self
                .design
                .spacings
                .iter()
                .map(|&s| {
                    let design = if self.design.kind == DesignKind::Triangular {
                        build_design_triangular_2d(m.domain_radius, m.anomaly_radius, s)?
                    } else {
                        build_design_grid_2d(m.domain_radius, m.anomaly_radius, s)?
                    };
                    Ok(DesignVariant { label: format!("s{s}"), design })
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let model = self.model_structure();
        let m = &self.model;
        if !(m.domain_radius > 0.0) {
            return bad(format!("domain_radius must be positive, got {}", m.domain_radius));
        }
        match self.experiment {
            ExperimentKind::Conductivity => {
                if !(m.theta_lo >= 0.0 && m.theta_hi > m.theta_lo) {
                    return bad("contrast bounds must satisfy 0 <= theta_lo < theta_hi".into());
                }
                if !(m.inclusion_radius > 0.0 && m.inclusion_radius < m.domain_radius) {
                    return bad("inclusion_radius must lie inside the domain".into());
                }
            }
            ExperimentKind::Radius => {
                if !(m.theta_lo >= 0.0 && m.theta_hi > m.theta_lo && m.theta_hi <= m.domain_radius) {
                    return bad("radius bounds must satisfy 0 <= theta_lo < theta_hi <= domain_radius".into());
                }
                if !(m.contrast >= 0.0) {
                    return bad("contrast must be nonnegative".into());
                }
            }
            ExperimentKind::Anomaly => {
                if !(m.anomaly_radius > 0.0 && m.anomaly_radius < m.domain_radius) {
                    return bad("anomaly_radius must lie in (0, domain_radius)".into());
                }
                if !(m.contrast >= 0.0) {
                    return bad("contrast must be nonnegative".into());
                }
            }
        }
        if matches!(self.experiment, ExperimentKind::Conductivity | ExperimentKind::Radius)
            && m.domain_radius != 1.0
        {
            return bad("centered-inclusion experiments are posed on the unit disk".into());
        }
        if !model.domain.contains(&self.true_theta) {
            return bad(format!("true_theta {:?} is not admissible", self.true_theta));
        }
        if !(self.sigma > 0.0) || self.m == 0 {
            return bad("sigma must be positive and m at least 1".into());
        }
        if !(self.eta >= 0.0) || self.k == 0 {
            return bad("k must be at least 1 and eta nonnegative".into());
        }
        if !(self.mesh.target_h > 0.0 && self.mesh.target_h < m.domain_radius) {
            return bad(format!("mesh.target_h must lie in (0, {})", m.domain_radius));
        }
        let dyadic = self.design.kind == DesignKind::Dyadic;
        if dyadic && self.experiment == ExperimentKind::Anomaly
            || !dyadic && self.experiment != ExperimentKind::Anomaly
        {
            return bad("dyadic designs pair with scalar experiments, lattices with the anomaly".into());
        }
        if (dyadic && self.design.levels.is_empty()) || (!dyadic && self.design.spacings.is_empty()) {
            return bad("design lists no levels or spacings".into());
        }
        for v in self.design_variants()? {
            if v.design.len() < self.k {
                return bad(format!("design {} has {} points, fewer than k = {}", v.label, v.design.len(), self.k));
            }
        }
        let s = &self.sampler;
        if s.seeds.is_empty() || s.iterations == 0 {
            return bad("sampler needs at least one seed and one iteration".into());
        }
        if !model.domain.contains(&s.start) || !model.domain.contains(&s.start_companion) {
            return bad("sampler start points must be admissible".into());
        }
        if s.start.iter().zip(&s.start_companion).any(|(a, b)| a == b) {
            return bad("sampler start points must differ in every coordinate".into());
        }
        if s.reference == ReferenceMode::Oracle && self.experiment == ExperimentKind::Anomaly {
            return bad("the anomaly experiment has no closed-form reference".into());
        }
        if self.analysis.bins < 10 {
            return bad("analysis.bins must be at least 10".into());
        }
        Ok(())
    }
}

fn merge(mut base: toml::Table, overlay: toml::Table) -> toml::Table {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                let merged = merge(std::mem::take(b), o);
                *b = merged;
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        for kind in [ExperimentKind::Conductivity, ExperimentKind::Radius, ExperimentKind::Anomaly] {
            let cfg = ExperimentConfig::defaults(kind);
            cfg.validate().unwrap();
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn partial_files_inherit_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "experiment = \"conductivity\"\n[design]\nlevels = [2]\n[sampler]\niterations = 500\n",
        )
        .unwrap();
        assert_eq!(cfg.design.levels, vec![2]);
        assert_eq!(cfg.sampler.iterations, 500);
        assert_eq!(cfg.sampler.burn_in, 10_000);
        assert_eq!(cfg.true_theta, vec![3.2]);
        assert_eq!(cfg.design_variants().unwrap()[0].design.len(), 5);
    }

    #[test]
    fn design_sizes_per_level() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Radius);
        cfg.design.levels = vec![7];
        assert_eq!(cfg.design_variants().unwrap()[0].design.len(), 129);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        for text in [
            "experiment = \"nope\"",
            "sigma = 0.1",
            "experiment = \"radius\"\ntrue_theta = [1.5]",
            "experiment = \"conductivity\"\nsigma = -1.0",
            "experiment = \"conductivity\"\ntypo = 1",
            "experiment = \"anomaly\"\n[sampler]\nreference = \"oracle\"",
            "experiment = \"conductivity\"\n[design]\nlevels = [0]",
            "experiment = \"conductivity\"\n[design]\nkind = \"grid\"",
            "experiment = [",
        ] {
            let err = ExperimentConfig::from_toml_str(text).unwrap_err();
            assert!(err.is_config(), "{text}: {err}");
        }
    }
}
