//! Scenario configuration, the path-loss channel model and channel-gain
//! construction.
//!
//! All quantities are linear (no dB layer). Every configured distance maps to
//! a *power* gain `shadowing / d^4`, which is used directly wherever a squared
//! channel coefficient appears in the SINR expressions.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::SolverOptions;

/// Shadowing constant of the simple path-loss model.
pub const DEFAULT_SHADOWING: f64 = 0.097;

const TABLE1_JSON: &str = include_str!("../data/table1.json");

fn default_shadowing() -> f64 {
    DEFAULT_SHADOWING
}

/// Full scenario description.
///
/// Per-SU lists have length `num_sus`, per-PU lists have length `num_pus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Free-form notes carried along with a config file.
    #[serde(rename = "_comment", default, skip_serializing_if = "Vec::is_empty")]
    pub comment: Vec<String>,
    pub num_pus: usize,
    pub num_sus: usize,
    pub bandwidth: f64,
    pub noise_power: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub pu_target_sinr: Vec<f64>,
    pub su_max_power: Vec<f64>,
    pub pu_max_power: Vec<f64>,
    pub su_distance_to_su_bs: Vec<f64>,
    pub su_distance_to_pu_bs: Vec<f64>,
    pub pu_distance_to_su_bs: Vec<f64>,
    pub pu_distance_to_pu_bs: Vec<f64>,
    #[serde(default = "default_shadowing")]
    pub shadowing_constant: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl NetworkConfig {
    /// The bundled 1-PU / 26-SU scenario (`data/table1.json`).
    pub fn table1() -> Self {
        serde_json::from_str(TABLE1_JSON).expect("bundled table1.json is well-formed")
    }

    /// Raw text of the bundled scenario file.
    pub fn table1_json() -> &'static str {
        TABLE1_JSON
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Loads a config file. Parse failures and violated invariants are both
    /// reported as errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        config.validated()
    }

    /// Returns `self` if every invariant holds.
    pub fn validated(self) -> Result<Self> {
        let violations = validate_config(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::Config(violations))
        }
    }

    /// Restricts the scenario to the first `k` SUs of every per-SU list.
    pub fn with_first_sus(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.num_sus {
            return Err(Error::InvalidArgument(format!(
                "SU subset size {k} outside 1..={}",
                self.num_sus
            )));
        }
        let mut sub = self.clone();
        sub.num_sus = k;
        sub.su_max_power.truncate(k);
        sub.su_distance_to_su_bs.truncate(k);
        sub.su_distance_to_pu_bs.truncate(k);
        if let Some(r) = sub.solver.pu_reference_su {
            if r >= k {
                sub.solver.pu_reference_su = None;
            }
        }
        Ok(sub)
    }
}

/// One violated invariant, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.push(field, format!("must be positive and finite, got {value}"));
        }
    }

    fn non_negative(&mut self, field: &str, value: f64) {
        if !(value.is_finite() && value >= 0.0) {
            self.push(
                field,
                format!("must be non-negative and finite, got {value}"),
            );
        }
    }

    fn positive_list(&mut self, field: &str, values: &[f64], expected_len: usize, count: &str) {
        if values.len() != expected_len {
            self.push(
                field,
                format!(
                    "length {} does not match {count} = {expected_len}",
                    values.len()
                ),
            );
        }
        for (i, &v) in values.iter().enumerate() {
            self.positive(&format!("{field}.{i}"), v);
        }
    }
}

/// Lists every violated [`NetworkConfig`] invariant; empty iff the config is
/// valid.
pub fn validate_config(config: &NetworkConfig) -> Vec<Violation> {
    let mut c = Checker {
        violations: Vec::new(),
    };
    let (n, k) = (config.num_pus, config.num_sus);
    if n == 0 {
        c.push("num_pus", "must be at least 1");
    }
    if k == 0 {
        c.push("num_sus", "must be at least 1");
    }
    c.positive("bandwidth", config.bandwidth);
    c.positive("noise_power", config.noise_power);
    c.positive("mu1", config.mu1);
    c.positive("mu2", config.mu2);
    c.positive("shadowing_constant", config.shadowing_constant);

    c.positive_list("pu_target_sinr", &config.pu_target_sinr, n, "num_pus");
    c.positive_list("pu_max_power", &config.pu_max_power, n, "num_pus");
    c.positive_list(
        "pu_distance_to_su_bs",
        &config.pu_distance_to_su_bs,
        n,
        "num_pus",
    );
    c.positive_list(
        "pu_distance_to_pu_bs",
        &config.pu_distance_to_pu_bs,
        n,
        "num_pus",
    );
    c.positive_list("su_max_power", &config.su_max_power, k, "num_sus");
    c.positive_list(
        "su_distance_to_su_bs",
        &config.su_distance_to_su_bs,
        k,
        "num_sus",
    );
    c.positive_list(
        "su_distance_to_pu_bs",
        &config.su_distance_to_pu_bs,
        k,
        "num_sus",
    );

    let s = &config.solver;
    c.positive("solver.epsilon", s.epsilon);
    if s.max_iterations == 0 {
        c.push("solver.max_iterations", "must be at least 1");
    }
    c.non_negative("solver.initial_su_power", s.initial_su_power);
    if let Some(p) = s.initial_pu_power {
        c.non_negative("solver.initial_pu_power", p);
    }
    if let Some(r) = s.pu_reference_su {
        if r >= k {
            c.push(
                "solver.pu_reference_su",
                format!("index {r} out of range for num_sus = {k}"),
            );
        }
    }
    c.violations
}

/// Power gain `shadowing_constant / distance^4`.
pub fn path_loss_gain(distance: f64, shadowing_constant: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be positive and finite, got {distance}"
        )));
    }
    if !(shadowing_constant.is_finite() && shadowing_constant > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shadowing constant must be positive and finite, got {shadowing_constant}"
        )));
    }
    Ok(shadowing_constant / distance.powi(4))
}

/// Power gains between every transmitter and both base stations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelGains {
    pub g_su_at_su_bs: Vec<f64>,
    pub g_pu_at_su_bs: Vec<f64>,
    pub g_su_at_pu_bs: Vec<f64>,
    pub g_pu_at_pu_bs: Vec<f64>,
    /// SU indices sorted by ascending `g_su_at_su_bs` (weakest first).
    pub su_order: Vec<usize>,
}

impl ChannelGains {
    /// Builds a gain set from explicit values and derives `su_order`.
    pub fn from_gains(
        g_su_at_su_bs: Vec<f64>,
        g_pu_at_su_bs: Vec<f64>,
        g_su_at_pu_bs: Vec<f64>,
        g_pu_at_pu_bs: Vec<f64>,
    ) -> Result<Self> {
        if g_su_at_pu_bs.len() != g_su_at_su_bs.len() {
            return Err(Error::InvalidArgument(format!(
                "g_su_at_pu_bs has {} entries, g_su_at_su_bs has {}",
                g_su_at_pu_bs.len(),
                g_su_at_su_bs.len()
            )));
        }
        if g_pu_at_pu_bs.len() != g_pu_at_su_bs.len() {
            return Err(Error::InvalidArgument(format!(
                "g_pu_at_pu_bs has {} entries, g_pu_at_su_bs has {}",
                g_pu_at_pu_bs.len(),
                g_pu_at_su_bs.len()
            )));
        }
        let all = [
            &g_su_at_su_bs,
            &g_pu_at_su_bs,
            &g_su_at_pu_bs,
            &g_pu_at_pu_bs,
        ];
        if let Some(bad) = all
            .iter()
            .flat_map(|v| v.iter())
            .find(|g| !(g.is_finite() && **g > 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "channel gains must be positive and finite, got {bad}"
            )));
        }
        let su_order = ascending_order(&g_su_at_su_bs);
        Ok(Self {
            g_su_at_su_bs,
            g_pu_at_su_bs,
            g_su_at_pu_bs,
            g_pu_at_pu_bs,
            su_order,
        })
    }

    pub fn num_sus(&self) -> usize {
        self.g_su_at_su_bs.len()
    }

    pub fn num_pus(&self) -> usize {
        self.g_pu_at_su_bs.len()
    }
}

/// Stable ascending sort of indices by value.
fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Maps every configured distance through [`path_loss_gain`].
pub fn build_channel_gains(config: &NetworkConfig) -> Result<ChannelGains> {
    let (n, k) = (config.num_pus, config.num_sus);
    let lists = [
        ("su_distance_to_su_bs", config.su_distance_to_su_bs.len(), k),
        ("su_distance_to_pu_bs", config.su_distance_to_pu_bs.len(), k),
        ("pu_distance_to_su_bs", config.pu_distance_to_su_bs.len(), n),
        ("pu_distance_to_pu_bs", config.pu_distance_to_pu_bs.len(), n),
    ];
    let mismatched: Vec<Violation> = lists
        .iter()
        .filter(|(_, len, want)| len != want)
        .map(|(field, len, want)| Violation {
            field: field.to_string(),
            message: format!("length {len} does not match expected {want}"),
        })
        .collect();
    if !mismatched.is_empty() {
        return Err(Error::Config(mismatched));
    }

    let gains = |distances: &[f64]| -> Result<Vec<f64>> {
        distances
            .iter()
            .map(|&d| path_loss_gain(d, config.shadowing_constant))
            .collect()
    };
    ChannelGains::from_gains(
        gains(&config.su_distance_to_su_bs)?,
        gains(&config.pu_distance_to_su_bs)?,
        gains(&config.su_distance_to_pu_bs)?,
        gains(&config.pu_distance_to_pu_bs)?,
    )
}

/// Joint action: transmit power of every PU and SU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub pu_powers: Vec<f64>,
    pub su_powers: Vec<f64>,
}

impl PowerProfile {
    pub fn new(pu_powers: Vec<f64>, su_powers: Vec<f64>) -> Self {
        Self {
            pu_powers,
            su_powers,
        }
    }

    pub fn zeros(num_pus: usize, num_sus: usize) -> Self {
        Self::new(vec![0.0; num_pus], vec![0.0; num_sus])
    }

    /// Checks every power against its action set `[0, max]`.
    pub fn check_bounds(&self, config: &NetworkConfig) -> Result<()> {
        let within = |p: f64, max: f64| p.is_finite() && (0.0..=max).contains(&p);
        if self.pu_powers.len() != config.num_pus || self.su_powers.len() != config.num_sus {
            return Err(Error::InvalidArgument(format!(
                "profile has {} PU / {} SU powers, config expects {} / {}",
                self.pu_powers.len(),
                self.su_powers.len(),
                config.num_pus,
                config.num_sus
            )));
        }
        for (n, (&p, &max)) in self.pu_powers.iter().zip(&config.pu_max_power).enumerate() {
            if !within(p, max) {
                return Err(Error::InvalidArgument(format!(
                    "PU {n} power {p} outside [0, {max}]"
                )));
            }
        }
        for (k, (&p, &max)) in self.su_powers.iter().zip(&config.su_max_power).enumerate() {
            if !within(p, max) {
                return Err(Error::InvalidArgument(format!(
                    "SU {k} power {p} outside [0, {max}]"
                )));
            }
        }
        Ok(())
    }

    /// Infinity norm of the difference over the concatenated power vector.
    pub fn max_abs_diff(&self, other: &PowerProfile) -> f64 {
        self.pu_powers
            .iter()
            .zip(&other.pu_powers)
            .chain(self.su_powers.iter().zip(&other.su_powers))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.pu_powers
            .iter()
            .chain(&self.su_powers)
            .all(|p| p.is_finite())
    }
}
