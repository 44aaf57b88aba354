use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{load_dense_unitary, make_unitary, ImplicitUnitary, UnitaryKind};
use crate::maurey::{Distribution, NetVariant, TailStatement, VerifySlack, DEFAULT_SAMPLE_CONSTANT};
use crate::recovery::Solver;
use crate::rip::DEFAULT_ENUMERATION_BUDGET;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RipExact,
    RipScaling,
    MaureyVerify,
    TailProbe,
    RecoveryPhase,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RipExact => "rip-exact",
            ExperimentKind::RipScaling => "rip-scaling",
            ExperimentKind::MaureyVerify => "maurey-verify",
            ExperimentKind::TailProbe => "tail-probe",
            ExperimentKind::RecoveryPhase => "recovery-phase",
        }
    }

    /// Output format used when neither the config nor the caller picks one.
    pub fn default_format(self) -> Format {
        match self {
            ExperimentKind::MaureyVerify => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Parameter grids. Empty lists take the experiment's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub q: Vec<usize>,
    pub eps: Vec<f64>,
    pub eta: Vec<f64>,
    pub n_vars: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RipOptions {
    /// Largest support count enumerated exhaustively.
    pub budget: u64,
    /// Independent row samples per `q` in the scaling search.
    pub resamples: usize,
    /// Fraction of resamples that must reach `δ_k <= ε`.
    pub success_fraction: f64,
    /// Random supports per lower-bound estimate.
    pub lower_bound_trials: u64,
    /// Largest `q` the scaling search tries; defaults to `16·N`.
    pub q_cap: Option<usize>,
}

impl Default for RipOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_ENUMERATION_BUDGET,
            resamples: 20,
            success_fraction: 0.9,
            lower_bound_trials: 2000,
            q_cap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// Random sparse vector with uniform complex entries on a random support.
    Sparse,
    /// Trial `t` uses the basis vector `e_{t mod N}`.
    Basis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaureyOptions {
    pub variant: NetVariant,
    pub input: InputKind,
    pub sparsity: usize,
    pub sample_constant: f64,
    /// Constant in front of the sample-size formula used when `grid.q` is empty.
    pub q_constant: f64,
    pub max_attempts: u32,
    /// Bins of the `|g|` histograms over `[0, √2]` (unit-flatness scale).
    pub histogram_bins: usize,
    /// Verification slack; the variant's defaults when absent.
    pub slack: Option<VerifySlack>,
    /// Use each row of `[N]` once when `q = N` instead of drawing rows.
    pub full_sample_at_n: bool,
}

impl Default for MaureyOptions {
    fn default() -> Self {
        Self {
            variant: NetVariant::Simple,
            input: InputKind::Sparse,
            sparsity: 4,
            sample_constant: DEFAULT_SAMPLE_CONSTANT,
            q_constant: DEFAULT_Q_CONSTANT,
            max_attempts: 64,
            histogram_bins: 16,
            slack: None,
            full_sample_at_n: true,
        }
    }
}

/// Default constant of the row-count formula in the Maurey experiment.
pub const DEFAULT_Q_CONSTANT: f64 = 1.0 / 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub distribution: Distribution,
    pub statement: TailStatement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailOptions {
    pub probes: Vec<Probe>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            probes: default_probes(),
        }
    }
}

/// One probe per concentration statement, sized so failures are common at
/// 1000 variables and rare at 4000.
pub fn default_probes() -> Vec<Probe> {
    vec![
        Probe {
            distribution: Distribution::Bernoulli { p: 0.5, scale: 1.0 },
            statement: TailStatement::Multiplicative { eps: 0.05 },
        },
        Probe {
            distribution: Distribution::Bernoulli { p: 0.1, scale: 1.0 },
            statement: TailStatement::Combined { eps: 0.1, alpha: 0.005 },
        },
        Probe {
            distribution: Distribution::Uniform { low: -1.0, high: 1.0 },
            statement: TailStatement::SignedCombined { eps: 0.05, alpha: 0.01 },
        },
        Probe {
            distribution: Distribution::Rademacher { scale: 1.0 },
            statement: TailStatement::Additive { b: 0.05 },
        },
        Probe {
            distribution: Distribution::UniformPhase { radius: 1.0 },
            statement: TailStatement::ComplexModulus { b: 0.05 },
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryOptions {
    pub solvers: Vec<Solver>,
    pub max_iters: usize,
    /// Stop once `||y - Ax||_2 <= tol·||y||_2`.
    pub tol: f64,
    /// Trial succeeds when `||x̂ - x||_2 <= success_tol·||x||_2`.
    pub success_tol: f64,
    /// Use each row of `[N]` once when `q = N` instead of drawing rows.
    pub full_sample_at_n: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            solvers: vec![Solver::Iht, Solver::Omp],
            max_iters: 500,
            tol: 1e-10,
            success_tol: 1e-6,
            full_sample_at_n: true,
        }
    }
}

/// A whole experiment run as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub unitary: UnitaryKind,
    /// Text file holding the matrix when `unitary` is `dense`.
    pub dense_path: Option<PathBuf>,
    pub grid: Grid,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Keep wall-clock columns; off by default so reruns are byte-identical.
    pub record_timing: bool,
    pub rip: RipOptions,
    pub maurey: MaureyOptions,
    pub tail: TailOptions,
    pub recovery: RecoveryOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            unitary: UnitaryKind::Dft,
            dense_path: None,
            grid: Grid::default(),
            trials: None,
            threads: None,
            out: None,
            format: None,
            record_timing: false,
            rip: RipOptions::default(),
            maurey: MaureyOptions::default(),
            tail: TailOptions::default(),
            recovery: RecoveryOptions::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            experiment: Some(kind),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment
            .ok_or_else(|| config_err("config does not name an experiment"))
    }

    pub fn format(&self) -> Result<Format> {
        Ok(self.format.unwrap_or(self.kind()?.default_format()))
    }

    /// Fills empty grids and trial counts with the experiment's defaults.
    pub fn resolved(&self) -> Result<Self> {
        let kind = self.kind()?;
        let mut c = self.clone();
        let g = &mut c.grid;
        let fill_usize = |v: &mut Vec<usize>, d: &[usize]| {
            if v.is_empty() {
                *v = d.to_vec();
            }
        };
        let fill_f64 = |v: &mut Vec<f64>, d: &[f64]| {
            if v.is_empty() {
                *v = d.to_vec();
            }
        };
        let trials = match kind {
            ExperimentKind::RipExact => {
                fill_usize(&mut g.n, &[16]);
                fill_usize(&mut g.k, &[2, 3]);
                fill_usize(&mut g.q, &[8]);
                20
            }
            ExperimentKind::RipScaling => {
                fill_usize(&mut g.n, &[256]);
                fill_usize(&mut g.k, &[2, 4, 8]);
                fill_f64(&mut g.eps, &[0.5]);
                1
            }
            ExperimentKind::MaureyVerify => {
                fill_usize(&mut g.n, &[512]);
                fill_f64(&mut g.eps, &[0.125]);
                fill_f64(&mut g.eta, &[0.125]);
                100
            }
            ExperimentKind::TailProbe => {
                fill_usize(&mut g.n_vars, &[1000, 4000]);
                10_000
            }
            ExperimentKind::RecoveryPhase => {
                fill_usize(&mut g.n, &[256]);
                fill_usize(&mut g.k, &[2, 4, 8, 16]);
                fill_usize(&mut g.q, &[16, 32, 64, 128, 256]);
                50
            }
        };
        c.trials.get_or_insert(trials);
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        let g = &self.grid;
        if g.n.iter().chain(&g.k).chain(&g.q).chain(&g.n_vars).any(|&v| v == 0) {
            return Err(config_err("grid values must be positive"));
        }
        if g.eps.iter().chain(&g.eta).any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(config_err("eps and eta values must be positive"));
        }
        if self.trials == Some(0) {
            return Err(config_err("trials must be positive"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be positive"));
        }
        match self.unitary {
            UnitaryKind::Dft | UnitaryKind::Hadamard => {
                if let Some(&n) = g.n.iter().find(|n| !n.is_power_of_two()) {
                    return Err(config_err(format!(
                        "N={n} is not a power of two, required for the {} fast path",
                        self.unitary
                    )));
                }
            }
            UnitaryKind::Dense => {
                if self.dense_path.is_none() {
                    return Err(config_err("unitary \"dense\" needs dense_path"));
                }
            }
        }
        if kind != ExperimentKind::TailProbe && g.n.is_empty() {
            return Err(config_err("grid.n is empty"));
        }
        if kind == ExperimentKind::MaureyVerify {
            let m = &self.maurey;
            if m.max_attempts == 0 || m.histogram_bins == 0 || m.sparsity == 0 {
                return Err(config_err("maurey.max_attempts, histogram_bins and sparsity must be positive"));
            }
            if !(m.q_constant.is_finite() && m.q_constant > 0.0) {
                return Err(config_err("maurey.q_constant must be positive"));
            }
        }
        if kind == ExperimentKind::RipScaling {
            let r = &self.rip;
            if r.resamples == 0 || r.lower_bound_trials == 0 {
                return Err(config_err("rip.resamples and rip.lower_bound_trials must be positive"));
            }
            if !(r.success_fraction > 0.0 && r.success_fraction <= 1.0) {
                return Err(config_err("rip.success_fraction must lie in (0, 1]"));
            }
        }
        if kind == ExperimentKind::TailProbe && self.tail.probes.is_empty() {
            return Err(config_err("tail.probes is empty"));
        }
        if kind == ExperimentKind::RecoveryPhase && self.recovery.solvers.is_empty() {
            return Err(config_err("recovery.solvers is empty"));
        }
        Ok(())
    }

    /// Short digest of every field that can change results. Output location,
    /// format and thread count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.format = None;
        c.threads = None;
        let text = serde_json::to_string(&c).expect("config serializes");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    /// The operator for dimension `n`.
    pub fn unitary_for(&self, n: usize) -> Result<ImplicitUnitary> {
        match self.unitary {
            UnitaryKind::Dense => {
                let path = self.dense_path.as_ref().ok_or_else(|| config_err("dense_path missing"))?;
                let m = load_dense_unitary(path)?;
                if m.dim() != n {
                    return Err(config_err(format!(
                        "{} holds a {}x{} matrix but the grid asks for N={n}",
                        path.display(),
                        m.dim(),
                        m.dim()
                    )));
                }
                Ok(m)
            }
            kind => make_unitary(kind, n),
        }
    }
}
