//! Experiment configuration: JSON schema, defaults, flag overrides and validation.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use dimerchain::hamiltonian::MAX_DENSE_SITES;
use dimerchain::{ChainSpec, DegeneracyPolicy, MeasurementOutcome, Model, RotationAngles, ScanWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ThetaDeltaMap,
    ProjectionCompare,
    BaselineCompareXx,
    XxzDeltaScan,
    BaselineCompareXxz,
    FreefermionCheck,
    SingleRun,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::ThetaDeltaMap,
        Self::ProjectionCompare,
        Self::BaselineCompareXx,
        Self::XxzDeltaScan,
        Self::BaselineCompareXxz,
        Self::FreefermionCheck,
        Self::SingleRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ThetaDeltaMap => "theta_delta_map",
            Self::ProjectionCompare => "projection_compare",
            Self::BaselineCompareXx => "baseline_compare_xx",
            Self::XxzDeltaScan => "xxz_delta_scan",
            Self::BaselineCompareXxz => "baseline_compare_xxz",
            Self::FreefermionCheck => "freefermion_check",
            Self::SingleRun => "single_run",
        }
    }

    fn forced_model(self) -> Option<ModelName> {
        match self {
            Self::XxzDeltaScan | Self::BaselineCompareXxz => Some(ModelName::Xxz),
            Self::BaselineCompareXx | Self::FreefermionCheck => Some(ModelName::Xx),
            _ => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Xx,
    Xxz,
}

impl ModelName {
    pub fn model(self) -> Model {
        match self {
            ModelName::Xx => Model::XX,
            ModelName::Xxz => Model::XXZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Strict,
    HighestMagnetization,
    LowestMagnetization,
}

impl PolicyName {
    pub fn policy(self) -> DegeneracyPolicy {
        match self {
            PolicyName::Strict => DegeneracyPolicy::Strict,
            PolicyName::HighestMagnetization => DegeneracyPolicy::HighestMagnetization,
            PolicyName::LowestMagnetization => DegeneracyPolicy::LowestMagnetization,
        }
    }
}

impl std::str::FromStr for PolicyName {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .with_context(|| format!("unknown degeneracy policy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineVariant {
    /// Attaching scheme on the same dimerized chain.
    Dimerized,
    /// Attaching scheme on the uniform chain.
    Uniform,
}

/// A number, or an angle expression such as `"pi"`, `"pi/16"`, `"3pi/4"`, `"0.5pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Expr(s) => parse_expr(s),
        }
    }
}

fn parse_expr(raw: &str) -> Result<f64> {
    let s: String = raw
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s.as_str(), None),
    };
    let num = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let k = match coef {
            "" => 1.0,
            "-" => -1.0,
            c => c
                .parse::<f64>()
                .with_context(|| format!("bad coefficient in {raw:?}"))?,
        };
        k * PI
    } else {
        num.parse::<f64>()
            .with_context(|| format!("cannot parse {raw:?} as a number or pi expression"))?
    };
    match den {
        Some(d) => {
            let d: f64 = d.parse().with_context(|| format!("bad denominator in {raw:?}"))?;
            ensure!(d != 0.0, "zero denominator in {raw:?}");
            Ok(num / d)
        }
        None => Ok(num),
    }
}

/// A grid: an explicit list, or an inclusive range `{start, stop, step}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<Scalar>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: Scalar,
    pub stop: Scalar,
    pub step: Scalar,
}

impl GridSpec {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        GridSpec::Range(RangeSpec {
            start: Scalar::Number(start),
            stop: Scalar::Number(stop),
            step: Scalar::Number(step),
        })
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::List(items) => items.iter().map(Scalar::value).collect::<Result<Vec<_>>>()?,
            GridSpec::Range(r) => {
                let (start, stop, step) = (r.start.value()?, r.stop.value()?, r.step.value()?);
                ensure!(
                    step.is_finite() && step > 0.0,
                    "{name}: step must be positive, got {step}"
                );
                ensure!(stop >= start, "{name}: stop {stop} is below start {start}");
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| snap(start + i as f64 * step)).collect()
            }
        };
        ensure!(!v.is_empty(), "{name}: grid is empty");
        ensure!(v.iter().all(|x| x.is_finite()), "{name}: grid values must be finite");
        Ok(v)
    }
}

/// Removes accumulated rounding from decimal grid points, e.g. `0.1 + 7 * 0.1`.
fn snap(x: f64) -> f64 {
    let rounded: f64 = format!("{x:.12e}").parse().unwrap_or(x);
    if (rounded - x).abs() <= 1e-14 * x.abs().max(1.0) {
        rounded
    } else {
        x
    }
}

/// The config file as written. Every field is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: Option<ExperimentKind>,
    pub model: Option<ModelName>,
    #[serde(alias = "N")]
    pub n_sites: Option<usize>,
    pub j_coupling: Option<f64>,
    pub delta: Option<f64>,
    pub anisotropy: Option<f64>,
    pub theta: Option<Scalar>,
    pub phi: Option<Scalar>,
    pub outcome: Option<String>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub degeneracy_policy: Option<PolicyName>,
    pub theta_grid: Option<GridSpec>,
    pub delta_grid: Option<GridSpec>,
    pub anisotropy_grid: Option<GridSpec>,
    pub n_sites_grid: Option<GridSpec>,
    pub outcomes: Option<Vec<String>>,
    pub attach_coupling: Option<f64>,
    pub baseline_variants: Option<Vec<BaselineVariant>>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| anyhow::anyhow!("invalid config at line {}, column {}: {e}", e.line(), e.column()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n_sites: Option<usize>,
    pub delta: Option<f64>,
    pub anisotropy: Option<f64>,
    pub theta: Option<String>,
    pub phi: Option<String>,
    pub outcome: Option<String>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub degeneracy_policy: Option<PolicyName>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ConfigFile) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    cfg.$field = Some(v.clone());
                }
            };
        }
        take!(n_sites);
        take!(delta);
        take!(anisotropy);
        take!(outcome);
        take!(t_max);
        take!(dt);
        take!(degeneracy_policy);
        take!(out);
        take!(threads);
        if let Some(t) = &self.theta {
            cfg.theta = Some(Scalar::Expr(t.clone()));
        }
        if let Some(p) = &self.phi {
            cfg.phi = Some(Scalar::Expr(p.clone()));
        }
    }
}

/// A fully validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelName,
    pub j_coupling: f64,
    pub delta: f64,
    pub anisotropy: f64,
    pub theta: f64,
    pub phi: f64,
    pub outcome: String,
    /// `None` means `4N/J` for each chain length.
    pub t_max: Option<f64>,
    pub dt: f64,
    pub degeneracy_policy: PolicyName,
    pub n_sites_grid: Vec<usize>,
    pub theta_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub anisotropy_grid: Vec<f64>,
    pub outcomes: Vec<String>,
    /// `None` means the strong bond `J(1+δ)` (dimerized) or `J` (uniform).
    pub attach_coupling: Option<f64>,
    pub baseline_variants: Vec<BaselineVariant>,
    pub out: String,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn resolve(kind: ExperimentKind, file: ConfigFile) -> Result<Self> {
        if let Some(k) = file.kind {
            ensure!(k == kind, "config is for {k} but the {kind} subcommand was requested");
        }
        let model = match (kind.forced_model(), file.model) {
            (Some(forced), Some(m)) if forced != m => bail!("{kind} requires model {forced:?}, config has {m:?}"),
            (Some(forced), _) => forced,
            (None, Some(m)) => m,
            (None, None) => ModelName::Xx,
        };
        let j_coupling = file.j_coupling.unwrap_or(1.0);
        ensure!(
            j_coupling.is_finite() && j_coupling > 0.0,
            "j_coupling must be positive, got {j_coupling}"
        );

        let default_delta = match model {
            ModelName::Xx => 0.8,
            ModelName::Xxz => 0.75,
        };
        let delta = file.delta.unwrap_or(default_delta);
        let anisotropy = file.anisotropy.unwrap_or(match model {
            ModelName::Xx => 0.0,
            ModelName::Xxz => 0.5,
        });
        ensure!(anisotropy.is_finite(), "anisotropy must be finite");
        let theta = file.theta.as_ref().map_or(Ok(PI / 2.0), Scalar::value)?;
        let phi = file.phi.as_ref().map_or(Ok(0.0), Scalar::value)?;
        RotationAngles::new(theta, phi).context("rotation angles")?;
        let outcome = file.outcome.clone().unwrap_or_else(|| "P00".into());
        parse_outcome(&outcome)?;

        let n_sites_grid = match (&file.n_sites_grid, file.n_sites) {
            (Some(g), _) => integer_grid(g)?,
            (None, Some(n)) => vec![n],
            (None, None) => match kind {
                ExperimentKind::ThetaDeltaMap | ExperimentKind::SingleRun => vec![8],
                ExperimentKind::ProjectionCompare | ExperimentKind::XxzDeltaScan => vec![10],
                ExperimentKind::BaselineCompareXx | ExperimentKind::BaselineCompareXxz => vec![4, 6, 8],
                ExperimentKind::FreefermionCheck => (3..=10).collect(),
            },
        };
        let delta_grid = match (&file.delta_grid, file.delta) {
            (Some(g), _) => g.values("delta_grid")?,
            (None, Some(d)) => vec![d],
            (None, None) => match kind {
                ExperimentKind::ThetaDeltaMap => GridSpec::range(0.1, 0.9, 0.1).values("delta_grid")?,
                ExperimentKind::FreefermionCheck => vec![0.0, 0.25, 0.5, 0.8, 0.95],
                _ => vec![delta],
            },
        };
        let theta_grid = match (&file.theta_grid, &file.theta) {
            (Some(g), _) => g.values("theta_grid")?,
            (None, Some(_)) => vec![theta],
            (None, None) => match kind {
                ExperimentKind::ThetaDeltaMap => GridSpec::range(0.0, PI, PI / 16.0).values("theta_grid")?,
                _ => vec![theta],
            },
        };
        let anisotropy_grid = match (&file.anisotropy_grid, file.anisotropy) {
            (Some(g), _) => g.values("anisotropy_grid")?,
            (None, Some(a)) => vec![a],
            (None, None) => match kind {
                ExperimentKind::XxzDeltaScan => GridSpec::range(-2.0, 2.0, 0.5).values("anisotropy_grid")?,
                _ => vec![anisotropy],
            },
        };
        let outcomes = match &file.outcomes {
            Some(list) => list.clone(),
            None if kind == ExperimentKind::ProjectionCompare => {
                MeasurementOutcome::ALL.iter().map(|o| o.to_string()).collect()
            }
            None => vec![outcome.clone()],
        };
        ensure!(!outcomes.is_empty(), "outcomes: list is empty");
        for o in &outcomes {
            parse_outcome(o)?;
        }

        let dt = file.dt.unwrap_or(0.02 / j_coupling);
        ensure!(dt.is_finite() && dt > 0.0, "dt must be positive, got {dt}");
        if let Some(t) = file.t_max {
            ensure!(t.is_finite() && t > 0.0, "t_max must be positive, got {t}");
        }
        let degeneracy_policy = file.degeneracy_policy.unwrap_or(match kind {
            ExperimentKind::XxzDeltaScan => PolicyName::LowestMagnetization,
            _ => PolicyName::Strict,
        });
        if let Some(g) = file.attach_coupling {
            ensure!(
                g.is_finite() && g >= 0.0,
                "attach_coupling must be non-negative, got {g}"
            );
        }
        let baseline_variants = file
            .baseline_variants
            .clone()
            .unwrap_or_else(|| vec![BaselineVariant::Dimerized, BaselineVariant::Uniform]);
        ensure!(!baseline_variants.is_empty(), "baseline_variants: list is empty");
        if let Some(t) = file.threads {
            ensure!(t >= 1, "threads must be at least 1");
        }

        let cfg = ExperimentConfig {
            kind,
            model,
            j_coupling,
            delta,
            anisotropy,
            theta,
            phi,
            outcome,
            t_max: file.t_max,
            dt,
            degeneracy_policy,
            n_sites_grid,
            theta_grid,
            delta_grid,
            anisotropy_grid,
            outcomes,
            attach_coupling: file.attach_coupling,
            baseline_variants,
            out: file.out.clone().unwrap_or_else(|| kind.name().to_string()),
            threads: file.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for &d in &self.delta_grid {
            ensure!((0.0..1.0).contains(&d), "dimerization must lie in [0, 1), got {d}");
        }
        for &t in &self.theta_grid {
            RotationAngles::new(t, self.phi).with_context(|| format!("theta_grid value {t}"))?;
        }
        let max_sites = match self.kind {
            ExperimentKind::BaselineCompareXx | ExperimentKind::BaselineCompareXxz => MAX_DENSE_SITES - 2,
            _ => MAX_DENSE_SITES,
        };
        if matches!(self.kind, ExperimentKind::ThetaDeltaMap | ExperimentKind::XxzDeltaScan) {
            ensure!(
                self.n_sites_grid.len() == 1,
                "{} takes a single n_sites value",
                self.kind
            );
        }
        for &n in &self.n_sites_grid {
            if self.kind == ExperimentKind::FreefermionCheck {
                ensure!((1..=512).contains(&n), "n_sites {n} out of range for freefermion_check");
            } else {
                ensure!(
                    n >= 4 && n % 2 == 0,
                    "protocol experiments need even n_sites >= 4, got {n}"
                );
                ensure!(
                    n <= max_sites,
                    "n_sites {n} exceeds the limit of {max_sites} for {}",
                    self.kind
                );
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> DegeneracyPolicy {
        self.degeneracy_policy.policy()
    }

    pub fn outcome_values(&self) -> Vec<MeasurementOutcome> {
        self.outcomes
            .iter()
            .map(|o| parse_outcome(o).expect("validated"))
            .collect()
    }

    pub fn angles(&self, theta: f64) -> RotationAngles {
        RotationAngles::new(theta, self.phi).expect("validated")
    }

    pub fn chain(&self, n_sites: usize, delta: f64, anisotropy: f64) -> dimerchain::Result<ChainSpec> {
        ChainSpec::new(self.model.model(), n_sites, self.j_coupling, delta, anisotropy)
    }

    pub fn window(&self, n_sites: usize) -> dimerchain::Result<ScanWindow> {
        let t_max = self.t_max.unwrap_or(4.0 * n_sites as f64 / self.j_coupling);
        ScanWindow::new(t_max, self.dt)
    }
}

fn parse_outcome(s: &str) -> Result<MeasurementOutcome> {
    s.parse::<MeasurementOutcome>()
        .map_err(|e| anyhow::anyhow!("outcome {s:?}: {e}"))
}

fn integer_grid(g: &GridSpec) -> Result<Vec<usize>> {
    g.values("n_sites_grid")?
        .into_iter()
        .map(|x| {
            ensure!(
                x >= 0.0 && x.fract() == 0.0,
                "n_sites_grid: {x} is not a non-negative integer"
            );
            Ok(x as usize)
        })
        .collect()
}
