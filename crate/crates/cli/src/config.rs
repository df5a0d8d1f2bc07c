//! TOML experiment configuration with per-subcommand sections. Every field
//! has a default matching the reference figures, so an empty (or absent)
//! config runs out of the box; validation errors name the offending field.

use serde::Deserialize;

use qmimo::{Error, Result};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scan2x2: Scan2x2Config,
    #[serde(default)]
    pub scan4x4: Scan4x4Config,
    #[serde(default)]
    pub tradeoff: TradeoffConfig,
    #[serde(default)]
    pub gains: GainsConfig,
    #[serde(default, rename = "qr-dump")]
    pub qr_dump: QrDumpConfig,
}

impl ExperimentConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::InvalidState(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scan2x2.validate()?;
        self.scan4x4.validate()?;
        self.tradeoff.validate()?;
        self.gains.validate()?;
        self.qr_dump.validate()
    }
}

fn check(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) {
        return Err(Error::ParamOutOfRange { name, value });
    }
    Ok(())
}

fn check_p_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::InvalidState(format!(
            "{name} needs at least 3 points for knee detection, got {}",
            grid.len()
        )));
    }
    for &p in grid {
        check(name, p, 1e-6, 1.0)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidState(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

fn default_eta() -> f64 {
    0.245
}

fn coarse_p_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.1).collect()
}

/// CSI-regime strategy maps over the (lambda1, lambda2) triangle.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan2x2Config {
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Cells per lambda axis; the emitted map keeps lambda1 < lambda2.
    #[serde(default = "Scan2x2Config::default_grid")]
    pub grid: usize,
    /// CSI regimes to emit (1 = none, 2 = Rx, 3 = Tx, 4 = full).
    #[serde(default = "Scan2x2Config::default_regimes")]
    pub regimes: Vec<u8>,
    #[serde(default = "coarse_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "Scan2x2Config::default_a_step")]
    pub a_step: f64,
    #[serde(default = "Scan2x2Config::default_golden_tol")]
    pub golden_tol: f64,
}

impl Scan2x2Config {
    fn default_grid() -> usize {
        50
    }
    fn default_regimes() -> Vec<u8> {
        vec![1, 2, 3, 4]
    }
    fn default_a_step() -> f64 {
        0.05
    }
    fn default_golden_tol() -> f64 {
        1e-3
    }

    pub fn validate(&self) -> Result<()> {
        check("scan2x2.eta", self.eta, 0.0, 0.5)?;
        if self.grid < 2 || self.grid > 500 {
            return Err(Error::ParamOutOfRange {
                name: "scan2x2.grid",
                value: self.grid as f64,
            });
        }
        if self.regimes.is_empty() || self.regimes.iter().any(|r| !(1..=4).contains(r)) {
            return Err(Error::InvalidState(
                "scan2x2.regimes must be a non-empty subset of 1..=4".into(),
            ));
        }
        check_p_grid("scan2x2.p_grid", &self.p_grid)?;
        check("scan2x2.a_step", self.a_step, 1e-3, 0.5)?;
        check("scan2x2.golden_tol", self.golden_tol, 1e-8, 0.1)
    }
}

impl Default for Scan2x2Config {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}

/// Clone-count comparison on the 4x4 link over (lambda, eta).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan4x4Config {
    /// Cells on the lambda axis over (0, 1).
    #[serde(default = "Scan4x4Config::default_cells")]
    pub lambda_cells: usize,
    /// Cells on the eta axis over (0, 0.5).
    #[serde(default = "Scan4x4Config::default_cells")]
    pub eta_cells: usize,
    /// Also solve the 4-clone configuration (slower).
    #[serde(default)]
    pub include_m4: bool,
    #[serde(default = "coarse_p_grid")]
    pub p_grid_m2: Vec<f64>,
    #[serde(default = "Scan4x4Config::default_p_grid_m4")]
    pub p_grid_m4: Vec<f64>,
}

impl Scan4x4Config {
    fn default_cells() -> usize {
        20
    }
    fn default_p_grid_m4() -> Vec<f64> {
        (1..=5).map(|i| i as f64 * 0.2).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("scan4x4.lambda_cells", self.lambda_cells),
            ("scan4x4.eta_cells", self.eta_cells),
        ] {
            if v < 1 || v > 200 {
                return Err(Error::ParamOutOfRange { name, value: v as f64 });
            }
        }
        check_p_grid("scan4x4.p_grid_m2", &self.p_grid_m2)?;
        check_p_grid("scan4x4.p_grid_m4", &self.p_grid_m4)
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        (0..self.lambda_cells)
            .map(|i| (i as f64 + 0.5) / self.lambda_cells as f64)
            .collect()
    }

    pub fn eta_grid(&self) -> Vec<f64> {
        (0..self.eta_cells)
            .map(|i| 0.5 * (i as f64 + 0.5) / self.eta_cells as f64)
            .collect()
    }
}

impl Default for Scan4x4Config {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}

/// Fidelity / success-probability trade-off curves on the 2x2 link.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffConfig {
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Uniform depolarizing levels, one curve pair each.
    #[serde(default = "TradeoffConfig::default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "TradeoffConfig::default_p_grid")]
    pub p_grid: Vec<f64>,
    /// Asymmetry search step for the optimized curves.
    #[serde(default = "TradeoffConfig::default_a_step")]
    pub a_step: f64,
}

impl TradeoffConfig {
    fn default_lambdas() -> Vec<f64> {
        vec![0.1, 0.2, 0.3]
    }
    fn default_p_grid() -> Vec<f64> {
        qmimo::sdp::default_p_grid()
    }
    fn default_a_step() -> f64 {
        0.02
    }

    pub fn validate(&self) -> Result<()> {
        check("tradeoff.eta", self.eta, 0.0, 0.5)?;
        if self.lambdas.is_empty() {
            return Err(Error::InvalidState("tradeoff.lambdas must be non-empty".into()));
        }
        for &l in &self.lambdas {
            check("tradeoff.lambdas", l, 1e-6, 1.0 - 1e-6)?;
        }
        check_p_grid("tradeoff.p_grid", &self.p_grid)?;
        check("tradeoff.a_step", self.a_step, 1e-3, 0.5)
    }
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}

/// Mean fidelity gains over the noise ensemble vs crosstalk strength.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    /// Points on the eta axis over [0, 0.5].
    #[serde(default = "GainsConfig::default_eta_points")]
    pub eta_points: usize,
    /// Cells per lambda axis of the averaged ensemble.
    #[serde(default = "GainsConfig::default_grid")]
    pub grid: usize,
    #[serde(default = "Scan2x2Config::default_regimes")]
    pub regimes: Vec<u8>,
    #[serde(default = "coarse_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "Scan2x2Config::default_a_step")]
    pub a_step: f64,
    #[serde(default = "Scan2x2Config::default_golden_tol")]
    pub golden_tol: f64,
}

impl GainsConfig {
    fn default_eta_points() -> usize {
        11
    }
    fn default_grid() -> usize {
        25
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_points < 1 || self.eta_points > 200 {
            return Err(Error::ParamOutOfRange {
                name: "gains.eta_points",
                value: self.eta_points as f64,
            });
        }
        if self.grid < 2 || self.grid > 500 {
            return Err(Error::ParamOutOfRange {
                name: "gains.grid",
                value: self.grid as f64,
            });
        }
        if self.regimes.is_empty() || self.regimes.iter().any(|r| !(1..=4).contains(r)) {
            return Err(Error::InvalidState(
                "gains.regimes must be a non-empty subset of 1..=4".into(),
            ));
        }
        check_p_grid("gains.p_grid", &self.p_grid)?;
        check("gains.a_step", self.a_step, 1e-3, 0.5)?;
        check("gains.golden_tol", self.golden_tol, 1e-8, 0.1)
    }

    pub fn eta_grid(&self) -> Vec<f64> {
        if self.eta_points == 1 {
            return vec![0.0];
        }
        (0..self.eta_points)
            .map(|i| 0.5 * i as f64 / (self.eta_points - 1) as f64)
            .collect()
    }
}

impl Default for GainsConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}

/// Operator dump for external cross-checking.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QrDumpConfig {
    /// Cloning asymmetry; default is the symmetric point 1/sqrt(3).
    #[serde(default = "QrDumpConfig::default_a")]
    pub a: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub lambda1: f64,
    #[serde(default)]
    pub lambda2: f64,
    /// Success probability at which the decoder J is solved and dumped.
    #[serde(default = "QrDumpConfig::default_p")]
    pub p: f64,
}

impl QrDumpConfig {
    fn default_a() -> f64 {
        qmimo::cloner::SYMMETRIC_A
    }
    fn default_p() -> f64 {
        0.5
    }

    pub fn validate(&self) -> Result<()> {
        check("qr-dump.a", self.a, 1e-6, 1.0)?;
        check("qr-dump.eta", self.eta, 0.0, 0.5)?;
        check("qr-dump.lambda1", self.lambda1, 0.0, 1.0)?;
        check("qr-dump.lambda2", self.lambda2, 0.0, 1.0)?;
        check("qr-dump.p", self.p, 1e-6, 1.0)
    }
}

impl Default for QrDumpConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults are valid")
    }
}
