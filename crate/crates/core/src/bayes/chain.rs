use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Twalk,
    Rwm,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Twalk => "twalk",
            SamplerKind::Rwm => "rwm",
        })
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twalk" => Ok(SamplerKind::Twalk),
            "rwm" => Ok(SamplerKind::Rwm),
            other => Err(Error::Config(format!("unknown sampler '{other}'"))),
        }
    }
}

/// MCMC trajectory. `samples` is row-major `len × dim`; row `j` is the
/// state after iteration `offset + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub dim: usize,
    pub samples: Vec<f64>,
    pub logpost: Vec<f64>,
    pub acceptance_rate: f64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub n_iter: usize,
    pub burn_in: usize,
    /// Iteration index of the first stored row (nonzero after reading a
    /// file that dropped the burn-in).
    pub offset: usize,
    pub iat: Option<f64>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.logpost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logpost.is_empty()
    }

    pub fn sample(&self, j: usize) -> &[f64] {
        &self.samples[j * self.dim..(j + 1) * self.dim]
    }

    /// First stored row past the burn-in.
    pub fn first_retained(&self) -> usize {
        self.burn_in.saturating_sub(self.offset).min(self.len())
    }

    pub fn retained_len(&self) -> usize {
        self.len() - self.first_retained()
    }

    /// Component `j` of every retained sample.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        (self.first_retained()..self.len()).map(|i| self.samples[i * self.dim + j]).collect()
    }

    pub fn retained_logpost(&self) -> &[f64] {
        &self.logpost[self.first_retained()..]
    }

    /// Largest per-coordinate integrated autocorrelation time of the
    /// retained samples; cached in `self.iat`.
    pub fn compute_iat(&mut self) -> Result<f64> {
        let mut worst: f64 = 1.0;
        for j in 0..self.dim {
            worst = worst.max(super::diagnostics::iat(&self.coordinate(j))?);
        }
        self.iat = Some(worst);
        Ok(worst)
    }

    /// Metadata lines starting with `#`, a column header, then one row per
    /// retained sample: iteration, θ components, logpost.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# sampler={}", self.sampler)?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "# n_iter={}", self.n_iter)?;
        writeln!(out, "# burn_in={}", self.burn_in)?;
        writeln!(out, "# dim={}", self.dim)?;
        writeln!(out, "# acceptance_rate={}", self.acceptance_rate)?;
        if let Some(iat) = self.iat {
            writeln!(out, "# iat={iat}")?;
        }
        let names: Vec<String> = (0..self.dim).map(|j| format!("theta_{j}")).collect();
        writeln!(out, "iteration,{},logpost", names.join(","))?;
        for i in self.first_retained()..self.len() {
            write!(out, "{}", self.offset + i)?;
            for v in self.sample(i) {
                write!(out, ",{v}")?;
            }
            writeln!(out, ",{}", self.logpost[i])?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: String| Error::Config(format!("malformed chain file: {msg}"));
        let mut meta = std::collections::HashMap::new();
        let mut samples = Vec::new();
        let mut logpost = Vec::new();
        let mut offset = None;
        let mut dim = None;
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line.starts_with("iteration") || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let d = *dim.get_or_insert(fields.len().saturating_sub(2));
            if d == 0 || fields.len() != d + 2 {
                return Err(bad(format!("row has {} fields", fields.len())));
            }
            let iteration: usize = fields[0].parse().map_err(|_| bad(format!("iteration '{}'", fields[0])))?;
            offset.get_or_insert(iteration);
            for f in &fields[1..=d] {
                samples.push(f.parse::<f64>().map_err(|_| bad(format!("value '{f}'")))?);
            }
            logpost.push(fields[d + 1].parse::<f64>().map_err(|_| bad(format!("value '{}'", fields[d + 1])))?);
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| bad(format!("missing '{k}'")));
        let parse_usize = |k: &str| -> Result<usize> {
            get(k)?.parse().map_err(|_| bad(format!("bad '{k}'")))
        };
        let dim_meta = parse_usize("dim")?;
        if dim.is_some_and(|d| d != dim_meta) {
            return Err(bad("row width does not match dim".into()));
        }
        Ok(Chain {
            dim: dim_meta,
            samples,
            logpost,
            acceptance_rate: get("acceptance_rate")?.parse().map_err(|_| bad("acceptance_rate".into()))?,
            seed: get("seed")?.parse().map_err(|_| bad("seed".into()))?,
            sampler: get("sampler")?.parse()?,
            n_iter: parse_usize("n_iter")?,
            burn_in: parse_usize("burn_in")?,
            offset: offset.unwrap_or(0),
            iat: meta.get("iat").and_then(|v| v.parse().ok()),
        })
    }
}
