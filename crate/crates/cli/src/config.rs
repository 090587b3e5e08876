//! Layered run configuration: built-in defaults, then a TOML file, then
//! command-line overrides, in increasing precedence.

use anyhow::{bail, Context, Result};
use qcq_core::negopt::AnnealConfig;
use qcq_core::{LongRange, NoiseModel, Readout};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "QCQ_OUT_DIR";

/// Which experiment a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Chsh,
    Tfim,
    Negopt,
    Validate,
    Params,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Chsh => "chsh",
            ExperimentKind::Tfim => "tfim",
            ExperimentKind::Negopt => "negopt",
            ExperimentKind::Validate => "validate",
            ExperimentKind::Params => "params",
        }
    }
}

/// Full run configuration. Every field has a default, so a config file may
/// specify any subset; the JSON summary echoes the resolved struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// Experiment kind; optional in files (the subcommand decides), but
    /// when present it must match the subcommand.
    pub experiment: Option<ExperimentKind>,
    /// Master seed; every shot derives its generator from it.
    pub seed: u64,
    /// Output directory; falls back to $QCQ_OUT_DIR, then ".".
    pub out_dir: Option<PathBuf>,
    /// Stem for output files (default: the experiment name).
    pub label: Option<String>,
    /// Worker threads for shot loops (default: machine parallelism).
    pub threads: Option<usize>,
    /// Sequential accumulation and zeroed wall-time columns, so reruns
    /// produce byte-identical CSV files.
    pub deterministic: bool,
    pub noise: NoiseSection,
    pub chsh: ChshSection,
    pub tfim: TfimSection,
    pub negopt: NegoptSection,
    pub params: ParamsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 1,
            out_dir: None,
            label: None,
            threads: None,
            deterministic: false,
            noise: NoiseSection::default(),
            chsh: ChshSection::default(),
            tfim: TfimSection::default(),
            negopt: NegoptSection::default(),
            params: ParamsSection::default(),
        }
    }
}

/// Depolarizing strengths; defaults to noiseless.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct NoiseSection {
    pub lambda_unit: f64,
    pub lambda_meas: f64,
    pub lambda_reprep: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { lambda_unit: 0.0, lambda_meas: 0.0, lambda_reprep: 0.0 }
    }
}

/// Bell-pair CHSH runs: a single distance or a distance scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ChshSection {
    /// Chain length (qubits); the pair lives on the endpoints.
    pub d: usize,
    /// How the long-range CNOT is realized.
    pub mode: LongRange,
    /// Measure-and-reprepare steps per estimate (interfaced mode).
    pub shots: usize,
    /// Independent estimates per distance.
    pub reps: usize,
    /// Distances to sweep; empty means just `d`.
    pub scan: Vec<usize>,
    pub readout: Readout,
}

impl Default for ChshSection {
    fn default() -> Self {
        Self {
            d: 2,
            mode: LongRange::Interface,
            shots: 60_000,
            reps: 1,
            scan: Vec::new(),
            readout: Readout::Sampled,
        }
    }
}

/// Ising-ansatz energy estimation over a shot grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct TfimSection {
    pub n: usize,
    /// Ansatz depth p (ignored when angles come from a file).
    pub layers: usize,
    /// Ising coupling J and transverse field g of the measured Hamiltonian.
    pub j: f64,
    pub g: f64,
    /// Angle file (written by `qcq params`); overrides inline angles.
    pub params_file: Option<PathBuf>,
    /// Inline angles, one γ and one β per layer.
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// 1-based layers whose ring-closing ZZ gate is virtualized; empty
    /// means a fully swap-routed circuit (no interfaces).
    pub interfaced_layers: Vec<usize>,
    /// Shot counts to sweep.
    pub grid: Vec<usize>,
    /// Independent estimates per grid point.
    pub reps: usize,
    pub readout: Readout,
    /// Dual-coefficient factors for every interface (written by
    /// `qcq negopt`); None uses canonical pseudo-inverse duals.
    pub duals_file: Option<PathBuf>,
}

impl Default for TfimSection {
    fn default() -> Self {
        Self {
            n: 4,
            layers: 2,
            j: 1.0,
            g: 1.0,
            params_file: None,
            gammas: Vec::new(),
            betas: Vec::new(),
            interfaced_layers: vec![2],
            grid: vec![1_000, 2_512, 6_310, 15_849, 39_811, 100_000],
            reps: 50,
            readout: Readout::Exact,
            duals_file: None,
        }
    }
}

/// Dual-frame negativity annealing for one two-qubit gate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct NegoptSection {
    /// Gate to virtualize ("cnot", "swap", "rzz").
    pub gate: String,
    /// Rotation angle for parameterized gates; alternatively pulled from
    /// an angle file via `params_file` + `layer`.
    pub angle: Option<f64>,
    pub params_file: Option<PathBuf>,
    /// 1-based layer whose γ is annealed when `params_file` is set.
    pub layer: usize,
    /// Independent annealing chains (best result wins).
    pub chains: usize,
    pub schedule: AnnealConfig,
}

impl Default for NegoptSection {
    fn default() -> Self {
        Self {
            gate: "rzz".into(),
            angle: None,
            params_file: None,
            layer: 2,
            chains: 8,
            schedule: AnnealConfig::default(),
        }
    }
}

/// Variational angle optimization and archival.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ParamsSection {
    pub n: usize,
    pub layers: usize,
    pub j: f64,
    pub g: f64,
    /// Target gap to the exact ground energy; a miss is reported in the
    /// summary, not treated as an error.
    pub tolerance: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { n: 4, layers: 2, j: 1.0, g: 1.0, tolerance: 1e-3 }
    }
}

/// Scalar overrides from command-line flags (highest precedence). `None`
/// leaves the underlying value untouched.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub label: Option<String>,
    pub threads: Option<usize>,
    pub deterministic: bool,
    pub lambda_unit: Option<f64>,
    pub lambda_meas: Option<f64>,
    pub lambda_reprep: Option<f64>,
    pub d: Option<usize>,
    pub mode: Option<LongRange>,
    pub shots: Option<usize>,
    pub reps: Option<usize>,
    pub scan: Option<Vec<usize>>,
    pub readout: Option<Readout>,
    pub n: Option<usize>,
    pub layers: Option<usize>,
    pub params_file: Option<PathBuf>,
    pub interfaced_layers: Option<Vec<usize>>,
    pub grid: Option<Vec<usize>>,
    pub duals_file: Option<PathBuf>,
    pub gate: Option<String>,
    pub angle: Option<f64>,
    pub layer: Option<usize>,
    pub chains: Option<usize>,
    pub max_steps: Option<usize>,
    pub tolerance: Option<f64>,
}

impl RunConfig {
    /// Parse a TOML config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Defaults, overlaid by `file` (if given), overlaid by `flags`.
    pub fn layered(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = &$src {
                    $dst = v.clone();
                }
            };
        }
        set!(self.seed, o.seed);
        if o.out_dir.is_some() {
            self.out_dir = o.out_dir.clone();
        }
        if o.label.is_some() {
            self.label = o.label.clone();
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
        if o.deterministic {
            self.deterministic = true;
        }
        set!(self.noise.lambda_unit, o.lambda_unit);
        set!(self.noise.lambda_meas, o.lambda_meas);
        set!(self.noise.lambda_reprep, o.lambda_reprep);
        set!(self.chsh.d, o.d);
        set!(self.chsh.mode, o.mode);
        set!(self.chsh.shots, o.shots);
        set!(self.chsh.reps, o.reps);
        set!(self.chsh.scan, o.scan);
        set!(self.chsh.readout, o.readout);
        set!(self.tfim.n, o.n);
        set!(self.tfim.layers, o.layers);
        if o.params_file.is_some() {
            self.tfim.params_file = o.params_file.clone();
            self.negopt.params_file = o.params_file.clone();
        }
        set!(self.tfim.interfaced_layers, o.interfaced_layers);
        set!(self.tfim.grid, o.grid);
        set!(self.tfim.reps, o.reps);
        set!(self.tfim.readout, o.readout);
        if o.duals_file.is_some() {
            self.tfim.duals_file = o.duals_file.clone();
        }
        set!(self.negopt.gate, o.gate);
        if o.angle.is_some() {
            self.negopt.angle = o.angle;
        }
        set!(self.negopt.layer, o.layer);
        set!(self.negopt.chains, o.chains);
        set!(self.negopt.schedule.max_steps, o.max_steps);
        set!(self.params.n, o.n);
        set!(self.params.layers, o.layers);
        set!(self.params.tolerance, o.tolerance);
    }

    /// The resolved noise model (validates λ ranges).
    pub fn noise_model(&self) -> Result<NoiseModel> {
        Ok(NoiseModel::new(
            self.noise.lambda_unit,
            self.noise.lambda_meas,
            self.noise.lambda_reprep,
        )?)
    }

    /// Output directory: config value, else $QCQ_OUT_DIR, else ".".
    pub fn resolved_out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from(".")
    }

    /// Output file stem.
    pub fn resolved_label(&self, kind: ExperimentKind) -> String {
        self.label.clone().unwrap_or_else(|| kind.name().to_string())
    }

    /// Check the invariants the experiment for `kind` relies on.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if let Some(stated) = self.experiment {
            if stated != kind {
                bail!(
                    "config file is for experiment '{}' but the '{}' subcommand was invoked",
                    stated.name(),
                    kind.name()
                );
            }
        }
        self.noise_model()?;
        match kind {
            ExperimentKind::Chsh => {
                if self.chsh.d < 2 {
                    bail!("chsh.d must be at least 2, got {}", self.chsh.d);
                }
                if self.chsh.shots == 0 || self.chsh.reps == 0 {
                    bail!("chsh.shots and chsh.reps must be at least 1");
                }
                if let Some(&bad) = self.chsh.scan.iter().find(|&&d| d < 2) {
                    bail!("chsh.scan entries must be at least 2, got {bad}");
                }
            }
            ExperimentKind::Tfim => {
                if self.tfim.grid.is_empty() || self.tfim.grid.contains(&0) {
                    bail!("tfim.grid must be a nonempty list of positive shot counts");
                }
                if self.tfim.reps == 0 {
                    bail!("tfim.reps must be at least 1");
                }
                if self.tfim.params_file.is_none()
                    && (self.tfim.gammas.is_empty()
                        || self.tfim.gammas.len() != self.tfim.betas.len())
                {
                    bail!(
                        "tfim needs angles: set tfim.params-file or matched \
                         tfim.gammas/tfim.betas lists"
                    );
                }
                require_exists(self.tfim.params_file.as_deref(), "tfim.params-file")?;
                require_exists(self.tfim.duals_file.as_deref(), "tfim.duals-file")?;
            }
            ExperimentKind::Negopt => {
                if self.negopt.chains == 0 {
                    bail!("negopt.chains must be at least 1");
                }
                if self.negopt.angle.is_none() && self.negopt.params_file.is_none() {
                    // Unparameterized gates (cnot, swap) need no angle.
                    if self.negopt.gate == "rzz" {
                        bail!("negopt.gate = \"rzz\" needs negopt.angle or negopt.params-file");
                    }
                }
                require_exists(self.negopt.params_file.as_deref(), "negopt.params-file")?;
            }
            ExperimentKind::Params => {
                if self.params.layers == 0 {
                    bail!("params.layers must be at least 1");
                }
                if !(self.params.tolerance > 0.0) {
                    bail!("params.tolerance must be positive");
                }
            }
            ExperimentKind::Validate => {}
        }
        Ok(())
    }
}

fn require_exists(path: Option<&Path>, what: &str) -> Result<()> {
    if let Some(p) = path {
        if !p.exists() {
            bail!("{what} does not exist: {}", p.display());
        }
    }
    Ok(())
}
