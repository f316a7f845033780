use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::FieldSolution;

use super::design::{Design, DesignMeta};
use super::model::ModelStructure;
use super::neighbors::{coefficients, nearest_neighbors, residual_bound, NeighborSet};

const MAGIC: &str = "PBSURROGATE-STORE 1";

/// Everything the online surrogate needs: design points, their observation
/// vectors `A_i = H(u_{θ_i})` and solution functionals `F(u_{θ_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateStore {
    pub model: ModelStructure,
    pub design: Design,
    /// Number of observations per design point.
    pub m: usize,
    /// Row-major `n × m`.
    pub observations: Vec<f64>,
    pub f_values: Vec<f64>,
    pub k_default: usize,
    pub eta: f64,
    /// Hex digest identifying the mesh and solver settings.
    pub provenance: String,
    /// Full nodal solutions on a shared mesh, kept only in validation mode.
    pub full_solutions: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    /// `ε_θ`, bound on the weak-form residual of the surrogate.
    pub residual: f64,
    /// `ε_θ / c`, bound on `‖∇(û_θ − u_θ)‖_{L²}`.
    pub solution: f64,
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub k_default: usize,
    pub eta: f64,
    pub provenance: String,
    pub retain_solutions: bool,
}

/// Digest of an arbitrary settings description, used as store provenance.
pub fn provenance_hash(settings: &str) -> String {
    let digest = Sha256::digest(settings.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Runs one exact forward solve per design point (in parallel) and keeps
/// `H(u)` and `F(u)` for each.
pub fn preprocess<S, H>(
    design: &Design,
    model: &ModelStructure,
    forward: S,
    observe: H,
    options: &PreprocessOptions,
) -> Result<SurrogateStore>
where
    S: Fn(&[f64]) -> Result<FieldSolution> + Sync,
    H: Fn(&FieldSolution) -> Result<Vec<f64>> + Sync,
{
    if design.is_empty() {
        return Err(Error::EmptyDesign);
    }
    if design.dim != model.domain.dim() {
        return Err(Error::InvalidArgument("design dimension does not match the model".into()));
    }
    let rows: Vec<(Vec<f64>, f64, Option<Vec<f64>>)> = (0..design.len())
        .into_par_iter()
        .map(|i| {
            let theta = design.point(i);
            let wrap = |e: Error| Error::DesignPointFailure {
                index: i,
                point: theta.to_vec(),
                source: Box::new(e),
            };
            let sol = forward(theta).map_err(wrap)?;
            let obs = observe(&sol).map_err(wrap)?;
            let f = model.functional.eval(&sol);
            let full = options.retain_solutions.then(|| sol.nodal_values);
            Ok((obs, f, full))
        })
        .collect::<Result<_>>()?;

    let m = rows[0].0.len();
    if rows.iter().any(|r| r.0.len() != m) {
        return Err(Error::InvalidArgument("observation operator returned ragged rows".into()));
    }
    let mut observations = Vec::with_capacity(rows.len() * m);
    let mut f_values = Vec::with_capacity(rows.len());
    let mut full = options.retain_solutions.then(Vec::new);
    for (obs, f, sol) in rows {
        observations.extend(obs);
        f_values.push(f);
        if let (Some(list), Some(sol)) = (full.as_mut(), sol) {
            list.push(sol);
        }
    }
    let store = SurrogateStore {
        model: *model,
        design: design.clone(),
        m,
        observations,
        f_values,
        k_default: options.k_default,
        eta: options.eta,
        provenance: options.provenance.clone(),
        full_solutions: full,
    };
    store.validate()?;
    Ok(store)
}

impl SurrogateStore {
    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }

    pub fn observation(&self, i: usize) -> &[f64] {
        &self.observations[i * self.m..(i + 1) * self.m]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.design.len();
        if n == 0 {
            return Err(Error::EmptyDesign);
        }
        if self.observations.len() != n * self.m || self.f_values.len() != n {
            return Err(Error::StoreFormat("array lengths do not match the design size".into()));
        }
        if let Some(i) = self.f_values.iter().position(|&f| !(f > 0.0 && f.is_finite())) {
            return Err(Error::StoreFormat(format!(
                "F value {} at design point {i} is not strictly positive",
                self.f_values[i]
            )));
        }
        if self.k_default == 0 || self.k_default > n {
            return Err(Error::StoreFormat(format!("default k {} outside 1..={n}", self.k_default)));
        }
        Ok(())
    }

    pub fn neighbors(&self, theta: &[f64], k: usize) -> Result<NeighborSet> {
        if !self.model.domain.contains(theta) {
            return Err(Error::ParameterOutsideDomain(theta.to_vec()));
        }
        nearest_neighbors(theta, &self.design, |a, b| self.model.g(a, b), k)
    }

    /// Neighbor set and convex weights at `theta`.
    pub fn weights(&self, theta: &[f64], k: usize, eta: f64) -> Result<(NeighborSet, Vec<f64>)> {
        let nb = self.neighbors(theta, k)?;
        let f: Vec<f64> = nb.indices.iter().map(|&i| self.f_values[i]).collect();
        let alpha = coefficients(&nb, &f, eta);
        Ok((nb, alpha))
    }

    /// Surrogate observation vector `S = Σ α_i A_i`.
    pub fn evaluate(&self, theta: &[f64], k: usize, eta: f64) -> Result<Vec<f64>> {
        let (nb, alpha) = self.weights(theta, k, eta)?;
        if nb.g_values[0] < eta {
            return Ok(self.observation(nb.indices[0]).to_vec());
        }
        let mut s = vec![0.0; self.m];
        for (&i, &a) in nb.indices.iter().zip(&alpha) {
            for (sj, aj) in s.iter_mut().zip(self.observation(i)) {
                *sj += a * aj;
            }
        }
        Ok(s)
    }

    pub fn error_bound(&self, theta: &[f64], k: usize, eta: f64) -> Result<ErrorBound> {
        let nb = self.neighbors(theta, k)?;
        let f: Vec<f64> = nb.indices.iter().map(|&i| self.f_values[i]).collect();
        let residual = residual_bound(&nb, &f, self.model.continuity_constant, eta);
        Ok(ErrorBound { residual, solution: residual / self.model.coercivity_lb })
    }

    /// Surrogate nodal solution `û_θ = Σ α_i u_{θ_i}`; validation mode only.
    pub fn surrogate_solution(&self, theta: &[f64], k: usize, eta: f64) -> Result<Vec<f64>> {
        let full = self.full_solutions.as_ref().ok_or_else(|| {
            Error::InvalidArgument("store was built without retained solutions".into())
        })?;
        let (nb, alpha) = self.weights(theta, k, eta)?;
        let mut u = vec![0.0; full[0].len()];
        for (&i, &a) in nb.indices.iter().zip(&alpha) {
            for (uj, vj) in u.iter_mut().zip(&full[i]) {
                *uj += a * vj;
            }
        }
        Ok(u)
    }

    /// Upper estimate of `sup_θ F(u_θ)` from the stored values.
    pub fn f_max(&self) -> f64 {
        self.f_values.iter().copied().fold(0.0, f64::max)
    }

    /// Store with design rows permuted so new row `j` is old row `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> SurrogateStore {
        let mut out = self.clone();
        out.design = self.design.permuted(order);
        out.observations = order.iter().flat_map(|&i| self.observation(i).iter().copied()).collect();
        out.f_values = order.iter().map(|&i| self.f_values[i]).collect();
        out.full_solutions =
            self.full_solutions.as_ref().map(|s| order.iter().map(|&i| s[i].clone()).collect());
        out
    }

    /// Writes a text header line followed by little-endian `f64` arrays:
    /// design points (`n × d`), observations (`n × m`) and F values (`n`).
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = StoreHeader {
            model_id: self.model.id().to_string(),
            model: self.model,
            continuity_constant: self.model.continuity_constant,
            domain: self.model.domain,
            design_meta: self.design.meta.clone(),
            k_default: self.k_default,
            eta: self.eta,
            m: self.m,
            n: self.design.len(),
            dim: self.design.dim,
            provenance: self.provenance.clone(),
        };
        let json = serde_json::to_string(&header)
            .map_err(|e| Error::StoreFormat(format!("cannot encode header: {e}")))?;
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "{json}")?;
        for v in self.design.coords.iter().chain(&self.observations).chain(&self.f_values) {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(Error::StoreFormat("missing store signature".into()));
        }
        line.clear();
        input.read_line(&mut line)?;
        let header: StoreHeader = serde_json::from_str(line.trim_end())
            .map_err(|e| Error::StoreFormat(format!("bad header: {e}")))?;
        let mut read_block = |count: usize| -> Result<Vec<f64>> {
            let mut bytes = vec![0u8; count * 8];
            input
                .read_exact(&mut bytes)
                .map_err(|_| Error::StoreFormat("truncated data block".into()))?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect())
        };
        let coords = read_block(header.n * header.dim)?;
        let observations = read_block(header.n * header.m)?;
        let f_values = read_block(header.n)?;
        let mut rest = Vec::new();
        input.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::StoreFormat("trailing bytes after data".into()));
        }
        let store = SurrogateStore {
            model: header.model,
            design: Design { dim: header.dim, coords, meta: header.design_meta },
            m: header.m,
            observations,
            f_values,
            k_default: header.k_default,
            eta: header.eta,
            provenance: header.provenance,
            full_solutions: None,
        };
        store.validate()?;
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreHeader {
    model_id: String,
    model: ModelStructure,
    continuity_constant: f64,
    domain: super::model::ParameterDomain,
    design_meta: DesignMeta,
    k_default: usize,
    eta: f64,
    m: usize,
    n: usize,
    dim: usize,
    provenance: String,
}
