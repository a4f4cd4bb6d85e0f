//! Parameter sweeps over the equilibrium solver and CSV output.
//!
//! Every sweep point is solved from the same base initialization, so points
//! are independent. With the `parallel` feature they are evaluated on the
//! rayon pool; output order is always the deterministic point order
//! (threshold, then sweep value, then scheme).

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, EquilibriumResult, Scheme};
use crate::model::{build_channel_gains, NetworkConfig};
use crate::utility;

/// PU target SINRs used for the SU-count sweep. Only 10 comes from the
/// reference scenario; 5 and 15 are added to show the threshold axis.
pub const DEFAULT_SINR_THRESHOLDS: [f64; 3] = [5.0, 10.0, 15.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NumSus,
    SuMaxPower,
    PuTargetSinr,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NumSus => "num_sus",
            SweepVariable::SuMaxPower => "su_max_power",
            SweepVariable::PuTargetSinr => "pu_target_sinr",
        }
    }
}

/// How sweep points are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// rayon pool; same as `Sequential` when built without `parallel`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_config: NetworkConfig,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub compare_oma: bool,
    pub output_path: Option<PathBuf>,
    /// PU target SINRs to repeat the sweep for; empty means the base config's
    /// own targets.
    pub sinr_thresholds: Vec<f64>,
}

impl SweepSpec {
    /// SU-count sweep over `1..=K` with the default threshold set.
    pub fn num_sus(base_config: NetworkConfig) -> Self {
        let values = (1..=base_config.num_sus).map(|k| k as f64).collect();
        Self {
            base_config,
            variable: SweepVariable::NumSus,
            values,
            compare_oma: false,
            output_path: None,
            sinr_thresholds: DEFAULT_SINR_THRESHOLDS.to_vec(),
        }
    }

    pub fn max_power(base_config: NetworkConfig, caps: Vec<f64>) -> Self {
        Self {
            base_config,
            variable: SweepVariable::SuMaxPower,
            values: caps,
            compare_oma: false,
            output_path: None,
            sinr_thresholds: Vec::new(),
        }
    }

    /// NOMA-vs-OMA comparison over `1..=K` SUs.
    pub fn comparison(base_config: NetworkConfig) -> Self {
        Self {
            compare_oma: true,
            sinr_thresholds: Vec::new(),
            ..Self::num_sus(base_config)
        }
    }

    pub fn with_output(mut self, path: impl Into<PathBuf>) -> Self {
        self.output_path = Some(path.into());
        self
    }

    pub fn schemes(&self) -> &'static [Scheme] {
        if self.compare_oma {
            &[Scheme::Noma, Scheme::Oma]
        } else {
            &[Scheme::Noma]
        }
    }

    fn thresholds(&self) -> Vec<Option<f64>> {
        if self.sinr_thresholds.is_empty() {
            vec![None]
        } else {
            self.sinr_thresholds.iter().copied().map(Some).collect()
        }
    }

    /// Expected number of records.
    pub fn record_count(&self) -> usize {
        self.values.len() * self.schemes().len() * self.thresholds().len()
    }

    pub fn validate(&self) -> Result<()> {
        let violations = crate::model::validate_config(&self.base_config);
        if !violations.is_empty() {
            return Err(Error::Config(violations));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep values are empty".into()));
        }
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidArgument(
                "sweep values must be strictly monotone".into(),
            ));
        }
        for &v in &self.values {
            let ok = match self.variable {
                SweepVariable::NumSus => {
                    v.fract() == 0.0 && v >= 1.0 && v <= self.base_config.num_sus as f64
                }
                _ => v.is_finite() && v > 0.0,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "{} value {v} not allowed",
                    self.variable.name()
                )));
            }
        }
        if let Some(&t) = self
            .sinr_thresholds
            .iter()
            .find(|t| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "SINR threshold must be positive, got {t}"
            )));
        }
        Ok(())
    }

    /// Scenario solved at one sweep point.
    pub fn config_for(&self, value: f64, threshold: Option<f64>) -> Result<NetworkConfig> {
        let mut config = match self.variable {
            SweepVariable::NumSus => self.base_config.with_first_sus(value as usize)?,
            SweepVariable::SuMaxPower => {
                let mut c = self.base_config.clone();
                c.su_max_power.iter_mut().for_each(|p| *p = value);
                c
            }
            SweepVariable::PuTargetSinr => {
                let mut c = self.base_config.clone();
                c.pu_target_sinr.iter_mut().for_each(|t| *t = value);
                c
            }
        };
        if let Some(t) = threshold {
            config.pu_target_sinr.iter_mut().for_each(|x| *x = t);
        }
        Ok(config)
    }
}

/// One solved sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub scheme: Scheme,
    pub variable: SweepVariable,
    pub variable_value: f64,
    pub pu_target_sinr: f64,
    /// Every PU meets its target SINR at the final profile.
    pub pu_qos_satisfied: bool,
    pub sum_su_utility: f64,
    pub per_su_power: Vec<f64>,
    pub per_su_utility: Vec<f64>,
    pub admitted_count: usize,
    pub iterations_used: usize,
    /// `false` means the fields hold the last iterate, not an equilibrium.
    pub converged: bool,
    #[serde(skip)]
    pub equilibrium: EquilibriumResult,
}

#[derive(Debug, Clone, Copy)]
struct SweepPoint {
    threshold: Option<f64>,
    value: f64,
    scheme: Scheme,
}

fn points(spec: &SweepSpec) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(spec.record_count());
    for threshold in spec.thresholds() {
        for &value in &spec.values {
            for &scheme in spec.schemes() {
                out.push(SweepPoint {
                    threshold,
                    value,
                    scheme,
                });
            }
        }
    }
    out
}

fn solve_point(spec: &SweepSpec, point: SweepPoint) -> Result<ExperimentRecord> {
    let wrap = |source: Error| Error::SweepPoint {
        variable: spec.variable.name(),
        value: point.value,
        source: Box::new(source),
    };
    let config = spec
        .config_for(point.value, point.threshold)
        .map_err(wrap)?;
    let gains = build_channel_gains(&config).map_err(wrap)?;
    let eq = game::solve_with(&config, &gains, point.scheme, |_, _| {}).map_err(wrap)?;

    let mut qos = true;
    for n in 0..config.num_pus {
        qos &= utility::pu_qos_satisfied(
            n,
            &gains,
            &eq.final_powers,
            config.noise_power,
            config.pu_target_sinr[n],
        )
        .map_err(wrap)?;
    }
    Ok(ExperimentRecord {
        scheme: point.scheme,
        variable: spec.variable,
        variable_value: point.value,
        pu_target_sinr: config.pu_target_sinr[0],
        pu_qos_satisfied: qos,
        sum_su_utility: eq.sum_su_utility,
        per_su_power: eq.final_powers.su_powers.clone(),
        per_su_utility: eq.su_utilities.clone(),
        admitted_count: eq.admitted_sus.len(),
        iterations_used: eq.iterations_used,
        converged: eq.converged,
        equilibrium: eq,
    })
}

/// Solves every point of `spec`.
pub fn run_sweep(spec: &SweepSpec, execution: Execution) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let points = points(spec);
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            points
                .into_par_iter()
                .map(|p| solve_point(spec, p))
                .collect()
        }
        _ => points.into_iter().map(|p| solve_point(spec, p)).collect(),
    }
}

fn expect_variable(spec: &SweepSpec, variable: SweepVariable) -> Result<()> {
    if spec.variable != variable {
        return Err(Error::InvalidArgument(format!(
            "expected a {} sweep, got {}",
            variable.name(),
            spec.variable.name()
        )));
    }
    Ok(())
}

/// Sum SU utility against the number of SUs, once per SINR threshold.
pub fn sweep_num_sus(spec: &SweepSpec) -> Result<Vec<ExperimentRecord>> {
    expect_variable(spec, SweepVariable::NumSus)?;
    run_sweep(spec, Execution::default())
}

/// Converged sum SU utility against the SU power cap.
pub fn sweep_max_power(spec: &SweepSpec) -> Result<Vec<ExperimentRecord>> {
    expect_variable(spec, SweepVariable::SuMaxPower)?;
    run_sweep(spec, Execution::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub variable_value: f64,
    /// `(noma - oma) / oma` of the sum SU utility.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// NOMA and OMA records, adjacent per sweep point.
    pub records: Vec<ExperimentRecord>,
    pub max_improvement: Option<Improvement>,
}

/// Paired NOMA/OMA sweep with the largest relative sum-utility gain.
pub fn compare_noma_oma(spec: &SweepSpec) -> Result<Comparison> {
    if !spec.compare_oma {
        return Err(Error::InvalidArgument(
            "comparison sweep needs compare_oma = true".into(),
        ));
    }
    let records = run_sweep(spec, Execution::default())?;
    let max_improvement = records
        .chunks_exact(2)
        .filter(|pair| pair[1].sum_su_utility > 0.0)
        .map(|pair| Improvement {
            variable_value: pair[0].variable_value,
            ratio: (pair[0].sum_su_utility - pair[1].sum_su_utility) / pair[1].sum_su_utility,
        })
        .fold(None, |best: Option<Improvement>, x| match best {
            Some(b) if b.ratio >= x.ratio => Some(b),
            _ => Some(x),
        });
    Ok(Comparison {
        records,
        max_improvement,
    })
}

/// `(variable_value, sum_su_utility)` for one scheme and threshold.
pub fn sum_utility_series(
    records: &[ExperimentRecord],
    scheme: Scheme,
    pu_target_sinr: f64,
) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter(|r| r.scheme == scheme && r.pu_target_sinr == pu_target_sinr)
        .map(|r| (r.variable_value, r.sum_su_utility))
        .collect()
}

/// Location of the maximum when it is strictly inside the series.
pub fn interior_peak(series: &[(f64, f64)]) -> Option<f64> {
    let (idx, _) = series
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    (idx > 0 && idx + 1 < series.len()).then(|| series[idx].0)
}

/// Formats with nine significant digits, fixed notation for moderate
/// exponents.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

fn csv_header(per_su: usize) -> Vec<String> {
    let mut header: Vec<String> = [
        "scheme",
        "variable",
        "variable_value",
        "sum_su_utility",
        "admitted_count",
        "iterations_used",
        "converged",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..per_su).map(|k| format!("per_su_power_{k}")));
    header.extend((0..per_su).map(|k| format!("per_su_utility_{k}")));
    header
}

fn csv_row(r: &ExperimentRecord, per_su: usize) -> Vec<String> {
    let mut row = vec![
        r.scheme.name().to_string(),
        r.variable.name().to_string(),
        format_real(r.variable_value),
        format_real(r.sum_su_utility),
        r.admitted_count.to_string(),
        r.iterations_used.to_string(),
        r.converged.to_string(),
    ];
    let padded = |values: &[f64]| -> Vec<String> {
        (0..per_su)
            .map(|k| values.get(k).map(|&v| format_real(v)).unwrap_or_default())
            .collect()
    };
    row.extend(padded(&r.per_su_power));
    row.extend(padded(&r.per_su_utility));
    row
}

/// Writes records as CSV through a temporary file in the target directory,
/// so a failed write leaves nothing behind. Per-SU columns cover the widest
/// record; narrower records leave trailing cells empty.
pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<usize> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let per_su = records
        .iter()
        .map(|r| r.per_su_power.len().max(r.per_su_utility.len()))
        .max()
        .unwrap_or(0);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(tmp.as_file_mut());
        writer.write_record(csv_header(per_su))?;
        for r in records {
            writer.write_record(csv_row(r, per_su))?;
        }
        writer.flush().map_err(io_err)?;
    }
    tmp.as_file_mut().flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(records.len())
}
