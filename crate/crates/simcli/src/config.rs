//! Experiment configuration: a flat `key = value` file with `#` comments.
//!
//! ```text
//! name = st42
//! n = 4
//! k = 2
//! sigma0_2 = 1, 0.5, 0.1
//! xi2_list = 0.1, 0.5
//! num_steps = 200
//! num_replicates = 50
//! seed = 42
//! maxvar_source = file        # closed_form | mc | file
//! mc_samples = 100000
//! measurement_model = section4  # section4 | eq-filtering
//! output_dir = out
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stiefel_ekf::stats::{closed_form_spec, monte_carlo_spec, MaxVarTable};
use stiefel_ekf::{ManifoldSpec, StiefelShape};

use crate::error::{SimError, SimResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SIMCLI_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementModel {
    /// `Z = pr(x₀ + ε)` with the ambient draw `x₀`.
    Section4,
    /// `Z = pr(pr(x₀) + ε)`.
    EqFiltering,
}

impl FromStr for MeasurementModel {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s {
            "section4" => Ok(MeasurementModel::Section4),
            "eq-filtering" => Ok(MeasurementModel::EqFiltering),
            other => Err(SimError::Config(format!(
                "unknown measurement model `{other}` (expected section4 or eq-filtering)"
            ))),
        }
    }
}

impl fmt::Display for MeasurementModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementModel::Section4 => "section4",
            MeasurementModel::EqFiltering => "eq-filtering",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxVarSource {
    ClosedForm,
    MonteCarlo,
    /// A maxvar table; the built-in one unless `maxvar_file` is set.
    File,
}

impl FromStr for MaxVarSource {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        match s {
            "closed_form" => Ok(MaxVarSource::ClosedForm),
            "mc" => Ok(MaxVarSource::MonteCarlo),
            "file" => Ok(MaxVarSource::File),
            other => Err(SimError::Config(format!(
                "unknown maxvar source `{other}` (expected closed_form, mc or file)"
            ))),
        }
    }
}

impl fmt::Display for MaxVarSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaxVarSource::ClosedForm => "closed_form",
            MaxVarSource::MonteCarlo => "mc",
            MaxVarSource::File => "file",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub sigma0_2: Vec<f64>,
    pub xi2_list: Vec<f64>,
    pub num_steps: usize,
    pub num_replicates: usize,
    pub seed: u64,
    pub maxvar_source: MaxVarSource,
    pub maxvar_file: Option<PathBuf>,
    pub mc_samples: usize,
    pub measurement_model: MeasurementModel,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            n: 4,
            k: 2,
            sigma0_2: vec![0.5],
            xi2_list: vec![0.1, 0.5],
            num_steps: 200,
            num_replicates: 50,
            seed: 0,
            maxvar_source: MaxVarSource::File,
            maxvar_file: None,
            mc_samples: 100_000,
            measurement_model: MeasurementModel::Section4,
            output_dir: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> SimResult<T> {
    value
        .parse()
        .map_err(|_| SimError::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list(key: &str, value: &str) -> SimResult<Vec<f64>> {
    value
        .split(',')
        .map(|t| parse_num(key, t.trim()))
        .collect()
}

fn format_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> SimResult<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SimError::Config(format!("line {}: expected `key = value`", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(SimError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            match key {
                "name" => cfg.name = value.to_string(),
                "n" => cfg.n = parse_num(key, value)?,
                "k" => cfg.k = parse_num(key, value)?,
                "sigma0_2" => cfg.sigma0_2 = parse_list(key, value)?,
                "xi2_list" => cfg.xi2_list = parse_list(key, value)?,
                "num_steps" => cfg.num_steps = parse_num(key, value)?,
                "num_replicates" => cfg.num_replicates = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "maxvar_source" => cfg.maxvar_source = value.parse()?,
                "maxvar_file" => cfg.maxvar_file = Some(PathBuf::from(value)),
                "mc_samples" => cfg.mc_samples = parse_num(key, value)?,
                "measurement_model" => cfg.measurement_model = value.parse()?,
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(SimError::Config(format!("line {}: unknown key `{other}`", i + 1)))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        // Relative table paths are taken relative to the config file.
        if let (Some(f), Some(dir)) = (&cfg.maxvar_file, path.parent()) {
            if f.is_relative() {
                cfg.maxvar_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.k == 0 || self.k > self.n {
            return bad(format!("need 1 ≤ k ≤ n, got n = {}, k = {}", self.n, self.k));
        }
        if self.shape().dim() == 0 {
            return bad(format!("St({},{}) is zero-dimensional", self.n, self.k));
        }
        if self.num_steps == 0 || self.num_replicates == 0 {
            return bad("num_steps and num_replicates must be at least 1".into());
        }
        if self.sigma0_2.is_empty() || self.xi2_list.is_empty() {
            return bad("sigma0_2 and xi2_list must be nonempty".into());
        }
        for &v in self.sigma0_2.iter().chain(&self.xi2_list) {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("variances must be positive, got {v}"));
            }
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("invalid experiment name `{}`", self.name));
        }
        if self.maxvar_source == MaxVarSource::ClosedForm && self.k != 1 {
            return bad(format!(
                "closed-form maximal variance exists only for spheres, not St({},{})",
                self.n, self.k
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> StiefelShape {
        StiefelShape {
            n: self.n,
            k: self.k,
        }
    }

    /// Output directory: config value, else `$SIMCLI_OUT_DIR`, else `out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn resolve_maxvar(&self) -> SimResult<ManifoldSpec> {
        let shape = StiefelShape::new(self.n, self.k)?;
        match self.maxvar_source {
            MaxVarSource::ClosedForm => Ok(closed_form_spec(shape)?),
            MaxVarSource::MonteCarlo => Ok(monte_carlo_spec(shape, self.mc_samples, self.seed)?),
            MaxVarSource::File => {
                let table = match &self.maxvar_file {
                    Some(path) => {
                        let text =
                            std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
                        MaxVarTable::parse(&text).map_err(|e| {
                            SimError::Config(format!("{}: {e}", path.display()))
                        })?
                    }
                    None => MaxVarTable::builtin(),
                };
                table
                    .spec(shape)
                    .map_err(|e| SimError::Config(e.to_string()))
            }
        }
    }

    /// Canonical text of every field that affects results. The output
    /// directory is excluded.
    pub fn canonical(&self) -> String {
        format!(
            "name = {}\nn = {}\nk = {}\nsigma0_2 = {}\nxi2_list = {}\nnum_steps = {}\n\
             num_replicates = {}\nseed = {}\nmaxvar_source = {}\nmaxvar_file = {}\n\
             mc_samples = {}\nmeasurement_model = {}\n",
            self.name,
            self.n,
            self.k,
            format_list(&self.sigma0_2),
            format_list(&self.xi2_list),
            self.num_steps,
            self.num_replicates,
            self.seed,
            self.maxvar_source,
            self.maxvar_file
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "builtin".into()),
            self.mc_samples,
            self.measurement_model,
        )
    }
}
