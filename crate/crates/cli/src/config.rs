//! Experiment configuration: a single JSON document describing what to run.
//!
//! The raw file may omit most fields; `resolve` materializes every default
//! (including tabulated CDF data read from disk and quantile-based probe
//! grids) so the manifest records exactly what was executed. The SHA-256 of
//! the resolved document, together with the seed it contains, determines
//! every numeric output.

use amt_core::distributions::{Transform, ValuationDistribution};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

/// Configuration or usage problem: reported on stderr and mapped to the
/// usage exit code, as opposed to failures during execution.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    WelfareConvergence,
    BudgetGrowth,
    RevenueCeiling,
    Impossibility,
    ExPost,
    Incentives,
    Profit,
    TheoryOnly,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::WelfareConvergence => "welfare-convergence",
            Kind::BudgetGrowth => "budget-growth",
            Kind::RevenueCeiling => "revenue-ceiling",
            Kind::Impossibility => "impossibility",
            Kind::ExPost => "ex-post",
            Kind::Incentives => "incentives",
            Kind::Profit => "profit",
            Kind::TheoryOnly => "theory-only",
        }
    }

    /// Kinds that run replications and therefore consume randomness.
    pub fn uses_rng(&self) -> bool {
        !matches!(self, Kind::TheoryOnly)
    }

    /// Kinds whose mean adjustment follows the -kappa sqrt(n) (log n)^beta
    /// schedule, which only makes sense for beta in (0, 1/2).
    pub fn needs_adjustment(&self) -> bool {
        matches!(
            self,
            Kind::WelfareConvergence
                | Kind::BudgetGrowth
                | Kind::ExPost
                | Kind::Incentives
                | Kind::TheoryOnly
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Valuation distribution, either a built-in family or a tabulated CDF.
/// `Tabulated` points at a two-column CSV `(v, F(v))`; resolution inlines
/// the points so the config hash covers the data itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    ExpMixture { weight: f64, rate1: f64, rate2: f64 },
    Tabulated { path: String },
    TabulatedPoints { points: Vec<(f64, f64)> },
}

impl DistSpec {
    fn inline_data(self, config_dir: &Path) -> Result<Self, ConfigError> {
        match self {
            DistSpec::Tabulated { path } => {
                let full = config_dir.join(&path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    ConfigError(format!("cannot read tabulated cdf {}: {e}", full.display()))
                })?;
                Ok(DistSpec::TabulatedPoints { points: parse_cdf_csv(&text)? })
            }
            other => Ok(other),
        }
    }

    pub fn build(&self, cap: Option<f64>) -> Result<Arc<ValuationDistribution>, ConfigError> {
        let dist = match self {
            DistSpec::Uniform { lo, hi } => ValuationDistribution::uniform(*lo, *hi),
            DistSpec::Exponential { rate } => ValuationDistribution::exponential(*rate),
            DistSpec::Weibull { shape, scale } => ValuationDistribution::weibull(*shape, *scale),
            DistSpec::ExpMixture { weight, rate1, rate2 } => {
                ValuationDistribution::exp_mixture(*weight, *rate1, *rate2)
            }
            DistSpec::TabulatedPoints { points } => ValuationDistribution::tabulated(points),
            DistSpec::Tabulated { .. } => {
                return bad("tabulated distribution must be resolved before building")
            }
        };
        let dist = dist.map_err(|e| ConfigError(format!("invalid distribution: {e}")))?;
        let dist = match cap {
            Some(b) => dist.with_cap(b).map_err(|e| ConfigError(format!("invalid cap: {e}")))?,
            None => dist,
        };
        Ok(Arc::new(dist))
    }
}

/// Two-column CSV `(v, F(v))`, one pair per line, optional header row.
fn parse_cdf_csv(text: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let (a, b) = match (cells.next(), cells.next(), cells.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return bad(format!("cdf csv line {}: expected two columns", idx + 1)),
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(v), Ok(f)) => points.push((v, f)),
            // A single non-numeric leading row is a header.
            _ if idx == 0 => continue,
            _ => return bad(format!("cdf csv line {}: expected two numbers", idx + 1)),
        }
    }
    if points.len() < 3 {
        return bad("cdf csv needs at least 3 data rows");
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransformSpec {
    Identity,
    VirtualValuation,
    Power { exponent: f64 },
    Affine { slope: f64, intercept: f64 },
}

impl TransformSpec {
    pub fn build(&self, dist: &Arc<ValuationDistribution>) -> Result<Transform, ConfigError> {
        let t = match self {
            TransformSpec::Identity => Ok(Transform::Identity),
            TransformSpec::VirtualValuation => Ok(Transform::Virtual(dist.clone())),
            TransformSpec::Power { exponent } => Transform::power(*exponent),
            TransformSpec::Affine { slope, intercept } => Transform::affine(*slope, *intercept),
        };
        t.map_err(|e| ConfigError(format!("invalid transform: {e}")))
    }
}

/// Rate schedules: the mean adjustment `alpha_n = -alpha_kappa sqrt(n)
/// (log n)^alpha_beta` and the cost `c_n = cost_kappa n^cost_gamma`.
/// `cost_kappa = 0` pins the cost to zero on every n.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Schedules {
    #[serde(default = "one")]
    pub alpha_kappa: f64,
    #[serde(default = "quarter")]
    pub alpha_beta: f64,
    #[serde(default = "two")]
    pub cost_kappa: f64,
    #[serde(default = "two_fifths")]
    pub cost_gamma: f64,
}

fn one() -> f64 {
    1.0
}
fn quarter() -> f64 {
    0.25
}
fn two() -> f64 {
    2.0
}
fn two_fifths() -> f64 {
    0.4
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules { alpha_kappa: 1.0, alpha_beta: 0.25, cost_kappa: 2.0, cost_gamma: 0.4 }
    }
}

impl Schedules {
    pub fn cost_at(&self, n: usize) -> f64 {
        if self.cost_kappa == 0.0 {
            0.0
        } else {
            self.cost_kappa * (n as f64).powf(self.cost_gamma)
        }
    }

    pub fn alpha_at(&self, n: usize) -> f64 {
        let n = n as f64;
        -self.alpha_kappa * n.sqrt() * n.ln().powf(self.alpha_beta)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConstantsSpec {
    #[serde(default = "c1_default")]
    pub c1: f64,
    #[serde(default = "c2_default")]
    pub c2: f64,
}

fn c1_default() -> f64 {
    0.56
}
fn c2_default() -> f64 {
    70.0
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        ConstantsSpec { c1: c1_default(), c2: c2_default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    Pivotal,
    ProRata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfitBoundSpec {
    Correlation,
    Dhr,
    Auto,
}

/// Raw on-disk configuration. Everything except `kind` has a default.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub distribution: Option<DistSpec>,
    pub transform: Option<TransformSpec>,
    #[serde(default)]
    pub schedules: Schedules,
    pub n_grid: Option<Vec<usize>>,
    pub replications: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsSpec,
    pub delta: Option<f64>,
    pub cap: Option<f64>,
    pub scheme: Option<SchemeSpec>,
    pub agent: Option<usize>,
    pub value_grid: Option<Vec<f64>>,
    pub report_grid: Option<Vec<f64>>,
    pub profit_bound: Option<ProfitBoundSpec>,
    pub out: Option<String>,
}

/// Fully materialized configuration: every knob concrete, tabulated data
/// inlined, probe grids expanded. This is what gets hashed and echoed into
/// the manifest.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResolvedConfig {
    pub kind: Kind,
    pub distribution: DistSpec,
    pub transform: TransformSpec,
    pub schedules: Schedules,
    pub n_grid: Vec<usize>,
    pub replications: u64,
    pub seed: u64,
    pub constants: ConstantsSpec,
    pub delta: f64,
    pub cap: Option<f64>,
    pub scheme: SchemeSpec,
    pub agent: usize,
    pub value_grid: Vec<f64>,
    pub report_grid: Vec<f64>,
    pub profit_bound: ProfitBoundSpec,
}

const DEFAULT_N_GRID: [usize; 3] = [1000, 4000, 16000];
const DEFAULT_REPLICATIONS: u64 = 100_000;
// Interior quantile levels for the truthful-value and deviation grids.
const VALUE_LEVELS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const REPORT_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
    }

    /// Materialize defaults and validate. `config_dir` anchors relative
    /// paths inside the config; `seed_override` is the `--seed` flag.
    pub fn resolve(
        self,
        config_dir: &Path,
        seed_override: Option<u64>,
    ) -> Result<ResolvedConfig, ConfigError> {
        let kind = self.kind;
        let distribution = self
            .distribution
            .unwrap_or(DistSpec::Uniform { lo: 0.0, hi: 1.0 })
            .inline_data(config_dir)?;
        let dist = distribution.build(None)?;

        // The revenue and impossibility studies are about the profit-maximal
        // rule, so their statistic defaults to the virtual valuation.
        let transform = self.transform.unwrap_or(match kind {
            Kind::RevenueCeiling | Kind::Impossibility => TransformSpec::VirtualValuation,
            _ => TransformSpec::Identity,
        });
        transform.build(&dist)?;

        let n_grid = self.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.to_vec());
        if n_grid.is_empty() {
            return bad("n-grid must be nonempty");
        }
        if n_grid[0] == 0 {
            return bad("n-grid entries must be at least 1");
        }
        if n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n-grid must be strictly ascending");
        }

        let replications = if kind.uses_rng() {
            let r = self.replications.unwrap_or(DEFAULT_REPLICATIONS);
            if r < 100 {
                return bad(format!("replications must be at least 100, got {r}"));
            }
            r
        } else {
            // A theory-only run consumes no randomness at all.
            0
        };

        let s = self.schedules;
        for (name, v) in [
            ("alpha-kappa", s.alpha_kappa),
            ("alpha-beta", s.alpha_beta),
            ("cost-kappa", s.cost_kappa),
            ("cost-gamma", s.cost_gamma),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("schedule {name} must be finite and nonnegative, got {v}"));
            }
        }
        if kind.needs_adjustment() && !(s.alpha_beta > 0.0 && s.alpha_beta < 0.5) {
            return bad(format!(
                "kind {kind} needs alpha-beta in (0, 1/2), got {}",
                s.alpha_beta
            ));
        }
        if kind == Kind::Profit && s.cost_kappa > 0.0 && s.cost_gamma >= 0.5 {
            return bad(format!(
                "profit comparisons need cost growth below sqrt(n): cost-gamma {} >= 0.5",
                s.cost_gamma
            ));
        }
        if kind == Kind::Impossibility && (s.cost_kappa == 0.0 || s.cost_gamma <= 0.5) {
            return bad(format!(
                "impossibility runs need cost growth above sqrt(n): cost-kappa {} n^{}",
                s.cost_kappa, s.cost_gamma
            ));
        }

        let delta = self.delta.unwrap_or(0.5);
        if !(delta > 0.0 && delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {delta}"));
        }

        let (lo, hi) = dist.support();
        if let Some(b) = self.cap {
            if !(b.is_finite() && b > lo && b <= hi) {
                return bad(format!("cap {b} must lie in the support ({lo}, {hi}]"));
            }
        }

        let agent = self.agent.unwrap_or(0);
        if agent >= n_grid[0] {
            return bad(format!("agent index {agent} out of range for n = {}", n_grid[0]));
        }
        if kind == Kind::Incentives && n_grid[0] < 2 {
            return bad("incentive probes need at least 2 agents");
        }

        let value_grid = match self.value_grid {
            Some(g) => validated_grid("value-grid", g, &dist)?,
            None => VALUE_LEVELS.iter().map(|u| dist.quantile(*u)).collect(),
        };
        let report_grid = match self.report_grid {
            Some(g) => validated_grid("report-grid", g, &dist)?,
            None => REPORT_LEVELS.iter().map(|u| dist.quantile(*u)).collect(),
        };

        Ok(ResolvedConfig {
            kind,
            distribution,
            transform,
            schedules: s,
            n_grid,
            replications,
            seed: seed_override.unwrap_or(self.seed),
            constants: self.constants,
            delta,
            cap: self.cap,
            scheme: self.scheme.unwrap_or(match kind {
                Kind::ExPost | Kind::Incentives => SchemeSpec::ProRata,
                _ => SchemeSpec::Pivotal,
            }),
            agent,
            value_grid,
            report_grid,
            profit_bound: self.profit_bound.unwrap_or(ProfitBoundSpec::Auto),
        })
    }
}

fn validated_grid(
    name: &str,
    grid: Vec<f64>,
    dist: &ValuationDistribution,
) -> Result<Vec<f64>, ConfigError> {
    if grid.is_empty() {
        return bad(format!("{name} must be nonempty"));
    }
    let (lo, hi) = dist.support();
    for v in &grid {
        if !(v.is_finite() && *v >= lo && *v <= hi) {
            return bad(format!("{name} entry {v} outside the support [{lo}, {hi}]"));
        }
    }
    Ok(grid)
}

impl ResolvedConfig {
    /// Canonical JSON of the resolved document; its SHA-256 is the config
    /// hash recorded in the manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("resolved config serializes")
    }

    /// The valuation distribution with any configured transfer cap applied.
    pub fn build_dist(&self) -> Result<Arc<ValuationDistribution>, ConfigError> {
        self.distribution.build(self.cap)
    }
}
