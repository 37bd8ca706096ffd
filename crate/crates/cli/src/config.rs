//! Pipeline configuration read from a TOML file and overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use chronocycle::rips::MAX_HOMOLOGY_DIM;
use chronocycle::{RelaxationPolicy, WeightKind};
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    NoisySine,
    DoubleSine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub kind: SynthKind,
    /// Defaults to 200 for the noisy sine and 1000 for the double sine.
    pub samples: Option<usize>,
    /// Standard deviation of the additive Gaussian noise.
    pub sigma: f64,
    /// Periods of the noisy sine.
    pub periods: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { kind: SynthKind::NoisySine, samples: None, sigma: 0.1, periods: 4.0 }
    }
}

impl SynthConfig {
    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(match self.kind {
            SynthKind::NoisySine => 200,
            SynthKind::DoubleSine => 1000,
        })
    }
}

/// Candidate delays: a count spread over the longest period, or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauGrid {
    Count(usize),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Series CSV; defaults to `series.csv` in the output directory.
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Spectral peaks below this fraction of the largest are ignored.
    pub threshold_fraction: f64,
    pub tau_grid: TauGrid,
    /// Highest homology dimension computed.
    pub max_dim: usize,
    /// Rips radius cap; the full complex when absent.
    pub max_radius: Option<f64>,
    pub max_simplices: usize,
    /// Points kept for the diagram-only `ph` command.
    pub ph_subsample: usize,
    /// Points kept when representatives are optimized.
    pub optimize_subsample: usize,
    pub policy: RelaxationPolicy,
    pub kinds: Vec<String>,
    /// Homology dimensions whose classes are optimized.
    pub dims: Vec<usize>,
    /// Minimum persistence of an optimized class; half the largest by default.
    pub significance: Option<f64>,
    pub round_tol: f64,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            threshold_fraction: 0.1,
            tau_grid: TauGrid::Count(200),
            max_dim: 1,
            max_radius: None,
            max_simplices: 50_000_000,
            ph_subsample: 1000,
            optimize_subsample: 500,
            policy: RelaxationPolicy::Fraction(0.9),
            kinds: vec!["vertex".into(), "simplex".into(), "length".into()],
            dims: vec![1],
            significance: None,
            round_tol: chronocycle::lp::DEFAULT_ROUND_TOL,
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text =
            fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        if text.trim().is_empty() {
            return Err(UsageError("config is empty".into()));
        }
        toml::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")))
    }

    pub fn input_path(&self) -> PathBuf {
        self.input.clone().unwrap_or_else(|| self.out_dir.join("series.csv"))
    }

    pub fn weight_kinds(&self) -> Result<Vec<WeightKind>, UsageError> {
        self.kinds.iter().map(|k| WeightKind::parse(k).map_err(|e| UsageError(e.to_string()))).collect()
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |msg: String| Err(UsageError(msg));
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction <= 1.0) {
            return bad(format!("threshold_fraction must lie in (0, 1], got {}", self.threshold_fraction));
        }
        match &self.tau_grid {
            TauGrid::Count(0) => return bad("tau_grid count must be positive".into()),
            TauGrid::Values(v) if v.is_empty() || v.iter().any(|t| !(*t > 0.0)) => {
                return bad("tau_grid values must be positive and non-empty".into())
            }
            _ => {}
        }
        if self.max_dim == 0 || self.max_dim > MAX_HOMOLOGY_DIM {
            return bad(format!("max_dim must lie in 1..={MAX_HOMOLOGY_DIM}, got {}", self.max_dim));
        }
        if let Some(r) = self.max_radius {
            if !(r > 0.0) {
                return bad(format!("max_radius must be positive, got {r}"));
            }
        }
        if self.ph_subsample < 2 || self.optimize_subsample < 2 {
            return bad("subsample sizes must be at least 2".into());
        }
        self.policy.validate().map_err(|e| UsageError(e.to_string()))?;
        if self.weight_kinds()?.is_empty() {
            return bad("at least one weight kind is required".into());
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d > self.max_dim) {
            return bad(format!("dims must be non-empty and at most max_dim = {}", self.max_dim));
        }
        if let Some(s) = self.significance {
            if !(s >= 0.0) {
                return bad(format!("significance must be non-negative, got {s}"));
            }
        }
        if !(self.round_tol > 0.0 && self.round_tol < 0.5) {
            return bad(format!("round_tol must lie in (0, 0.5), got {}", self.round_tol));
        }
        let s = &self.synth;
        if s.samples() < 4 || !(s.sigma >= 0.0) || !(s.periods > 0.0) {
            return bad("synth needs samples >= 4, sigma >= 0 and periods > 0".into());
        }
        Ok(())
    }
}

/// Parses `full`, `fraction:<rho>` or `bound:<eps>`.
pub fn parse_policy(s: &str) -> Result<RelaxationPolicy, UsageError> {
    let number = |v: &str| v.parse::<f64>().map_err(|_| UsageError(format!("bad number in policy {s:?}")));
    let policy = match s.split_once(':') {
        None if s == "full" => RelaxationPolicy::Full,
        Some(("fraction", v)) => RelaxationPolicy::Fraction(number(v)?),
        Some(("bound", v)) => RelaxationPolicy::AbsoluteBound(number(v)?),
        _ => return Err(UsageError(format!("unknown policy {s:?}; use full, fraction:<rho> or bound:<eps>"))),
    };
    policy.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(policy)
}
