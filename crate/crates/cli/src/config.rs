//! Run configuration: a TOML document with one section per concern.
//!
//! ```toml
//! command = "continue"        # check | floquet | nondeg | continue | freq
//! alpha = [1, 0]
//! eps_grid = [0.0, 0.025, 0.05]
//!
//! [system]
//! name = "isotropic_momentum"
//! nu = 1.4142135623730951
//!
//! [beta_grid]
//! step = [0.05, 0.05]
//! count = [3, 3]
//!
//! [tolerances]
//! tol_unit = 1e-6
//! ```

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use tori::floquet::DEFAULT_TOL_UNIT;
use tori::models::ModelSpec;
use tori::reducible::DEFAULT_TOL_INT;
use tori::{Error, Vector};

#[derive(Debug)]
pub struct ConfigError {
    /// Dotted key path of the offending entry, empty for document-level problems.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Floquet,
    Nondeg,
    Continue,
    Freq,
}

/// Model parameters. Omitted ones take the values of the reference systems.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    ActionOscillators {
        n: Option<usize>,
        s: Option<usize>,
        omega: Option<Vec<f64>>,
        a: Option<Vec<f64>>,
    },
    Lyapunov {
        omega1: Option<f64>,
        nu: Option<f64>,
        action: Option<f64>,
    },
    IsotropicMomentum {
        omega: Option<f64>,
        nu: Option<f64>,
        a: Option<f64>,
        b: Option<f64>,
    },
}

/// `sqrt(1), sqrt(2), sqrt(3), sqrt(5), ...`: square roots of 1 and the primes.
fn default_frequencies(n: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut k = 2u64;
    while out.len() < n {
        if (2..k)
            .take_while(|d| d * d <= k)
            .all(|d| !k.is_multiple_of(d))
        {
            out.push((k as f64).sqrt());
        }
        k += 1;
    }
    out.truncate(n);
    out
}

impl SystemConfig {
    pub fn to_spec(&self) -> Result<ModelSpec, ConfigError> {
        let sqrt2 = 2f64.sqrt();
        let spec = match self {
            SystemConfig::ActionOscillators { n, s, omega, a } => {
                let n = match (n, omega, a) {
                    (Some(n), _, _) => *n,
                    (None, Some(w), _) => w.len(),
                    (None, None, Some(a)) => a.len(),
                    (None, None, None) => 3,
                };
                let omega = omega.clone().unwrap_or_else(|| default_frequencies(n));
                if omega.len() != n {
                    return Err(invalid(
                        "system.omega",
                        format!("expected {n} entries, got {}", omega.len()),
                    ));
                }
                let a = a.clone().unwrap_or_else(|| vec![1.0; n]);
                if a.len() != n {
                    return Err(invalid(
                        "system.a",
                        format!("expected {n} entries, got {}", a.len()),
                    ));
                }
                ModelSpec::ActionOscillators {
                    omega,
                    a,
                    s: s.unwrap_or(n.min(2)),
                }
            }
            SystemConfig::Lyapunov { omega1, nu, action } => ModelSpec::Lyapunov {
                omega1: omega1.unwrap_or(1.0),
                nu: nu.unwrap_or(sqrt2),
                action: action.unwrap_or(1.0),
            },
            SystemConfig::IsotropicMomentum { omega, nu, a, b } => ModelSpec::IsotropicMomentum {
                omega: omega.unwrap_or(1.0),
                nu: nu.unwrap_or(sqrt2),
                a: a.unwrap_or(1.0),
                b: b.unwrap_or(0.5),
            },
        };
        spec.validate().map_err(|e| match e {
            Error::Spec(msg) => invalid("system", msg),
            other => invalid("system", other.to_string()),
        })?;
        Ok(spec)
    }
}

/// Levels `center + step * (k - (count - 1) / 2)` per axis, `k < count`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGridConfig {
    /// Defaults to the level of the seed torus.
    pub center: Option<Vec<f64>>,
    pub step: Option<Vec<f64>>,
    pub count: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_unit: f64,
    pub tol_int: f64,
    pub fixed_point: f64,
    pub ode_rel: f64,
    pub ode_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_unit: DEFAULT_TOL_UNIT,
            tol_int: DEFAULT_TOL_INT,
            fixed_point: 1e-9,
            ode_rel: 1e-10,
            ode_abs: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub samples: usize,
    /// Bound on brackets and floor on the smallest gradient singular value.
    pub tol: f64,
    pub radius: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            tol: 1e-9,
            radius: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetConfig {
    pub eps: f64,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self { eps: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct NondegConfig {
    /// Sup-norm bound of the cycle search when `alpha` is not given.
    pub max_norm: u32,
}

impl Default for NondegConfig {
    fn default() -> Self {
        Self { max_norm: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Zero disables torus sampling.
    pub grid_per_cycle: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { grid_per_cycle: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwistConfig {
    pub kappa: usize,
    pub tol: f64,
}

impl Default for TwistConfig {
    fn default() -> Self {
        Self {
            kappa: 1,
            tol: tori::continuation::DEFAULT_TWIST_TOL,
        }
    }
}

/// The document as written.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Command,
    pub system: SystemConfig,
    pub alpha: Option<Vec<i64>>,
    pub beta_grid: Option<BetaGridConfig>,
    pub eps_grid: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub floquet: FloquetConfig,
    #[serde(default)]
    pub nondeg: NondegConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub twist: TwistConfig,
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub system: ModelSpec,
    /// `None` only for `nondeg` without an explicit cycle, which searches.
    pub alpha: Option<Vec<i64>>,
    pub beta_grid: Vec<Vector>,
    /// Spacing of the level grid per axis.
    pub beta_step: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub check: CheckConfig,
    pub floquet: FloquetConfig,
    pub nondeg: NondegConfig,
    pub sampling: SamplingConfig,
    /// 0-based integral index.
    pub twist_kappa: usize,
    pub twist_tol: f64,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| invalid("", e.to_string()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        invalid(&path, e.into_inner().message().trim().to_string())
    })?;
    validate(raw)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive, got {v}")))
    }
}

pub fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let t = &raw.tolerances;
    positive("tolerances.tol_unit", t.tol_unit)?;
    positive("tolerances.tol_int", t.tol_int)?;
    positive("tolerances.fixed_point", t.fixed_point)?;
    positive("tolerances.ode_rel", t.ode_rel)?;
    positive("tolerances.ode_abs", t.ode_abs)?;
    positive("check.tol", raw.check.tol)?;
    positive("check.radius", raw.check.radius)?;
    positive("twist.tol", raw.twist.tol)?;
    if raw.check.samples == 0 {
        return Err(invalid("check.samples", "must be positive"));
    }
    if !raw.floquet.eps.is_finite() {
        return Err(invalid("floquet.eps", "must be finite"));
    }

    let system = raw.system.to_spec()?;
    let s = system.s();

    let alpha = match raw.alpha {
        Some(a) if a.len() != s => {
            return Err(invalid(
                "alpha",
                format!("expected {s} entries, got {}", a.len()),
            ));
        }
        Some(a) => Some(a),
        None if raw.command == Command::Nondeg => None,
        None => Some((0..s).map(|i| i64::from(i == 0)).collect()),
    };

    let eps_grid = raw.eps_grid.unwrap_or_else(|| vec![0.0]);
    if eps_grid.is_empty() {
        return Err(invalid("eps_grid", "must not be empty"));
    }
    if let Some(e) = eps_grid.iter().find(|e| !e.is_finite()) {
        return Err(invalid(
            "eps_grid",
            format!("entries must be finite, got {e}"),
        ));
    }

    let grid = raw.beta_grid.unwrap_or(BetaGridConfig {
        center: None,
        step: None,
        count: None,
    });
    let step = grid.step.unwrap_or_else(|| vec![0.05; s]);
    let count = grid.count.unwrap_or_else(|| vec![1; s]);
    if step.len() != s {
        return Err(invalid(
            "beta_grid.step",
            format!("expected {s} entries, got {}", step.len()),
        ));
    }
    if count.len() != s {
        return Err(invalid(
            "beta_grid.count",
            format!("expected {s} entries, got {}", count.len()),
        ));
    }
    for &h in &step {
        positive("beta_grid.step", h)?;
    }
    if count.contains(&0) {
        return Err(invalid("beta_grid.count", "the level grid is empty"));
    }
    let center = match grid.center {
        Some(c) if c.len() != s => {
            return Err(invalid(
                "beta_grid.center",
                format!("expected {s} entries, got {}", c.len()),
            ));
        }
        Some(c) => Vector::from_vec(c),
        None => {
            tori::models::make_system(&system)
                .map_err(|e| invalid("system", e.to_string()))?
                .seed
                .beta0
        }
    };
    let mut beta_grid = vec![center.clone()];
    for axis in 0..s {
        let offsets: Vec<f64> = (0..count[axis])
            .map(|k| step[axis] * (k as f64 - (count[axis] - 1) as f64 / 2.0))
            .collect();
        beta_grid = beta_grid
            .iter()
            .flat_map(|b| {
                offsets.iter().map(move |d| {
                    let mut b = b.clone();
                    b[axis] += d;
                    b
                })
            })
            .collect();
    }

    if raw.twist.kappa == 0 || raw.twist.kappa > s {
        return Err(invalid(
            "twist.kappa",
            format!("must lie in 1..={s}, got {}", raw.twist.kappa),
        ));
    }

    Ok(RunConfig {
        command: raw.command,
        system,
        alpha,
        beta_grid,
        beta_step: step,
        eps_grid,
        output: raw.output,
        tolerances: raw.tolerances,
        check: raw.check,
        floquet: raw.floquet,
        nondeg: raw.nondeg,
        sampling: raw.sampling,
        twist_kappa: raw.twist.kappa - 1,
        twist_tol: raw.twist.tol,
    })
}
