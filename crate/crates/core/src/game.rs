//! Best responses, best-response dynamics with SU admission control, and
//! equilibrium verification.
//!
//! One solver sweep updates every PU (in index order) and then every admitted
//! SU (weakest channel first). After each PU update the admission rule is
//! checked: if the PU power no longer covers `I_n + I_k`, the most recently
//! admitted SU is removed, frozen at zero power, and admission stays closed
//! for the rest of the run. Admitted SUs therefore always form a prefix of
//! `su_order`.

use serde::{Deserialize, Serialize};

use crate::baseline_oma;
use crate::error::{Error, Result};
use crate::model::{ChannelGains, NetworkConfig, PowerProfile};
use crate::utility;

/// Number of grid points used when scanning PU utility for improving
/// deviations.
pub const PU_GRID_POINTS: usize = 1000;

/// Largest grid improvement over the equilibrium PU utility that still counts
/// as "no improving deviation".
pub const PU_GRID_TOLERANCE: f64 = 1e-6;

/// Factor `2^(ln 2) - 1` of the SU power update.
pub fn su_response_factor() -> f64 {
    2f64.powf(std::f64::consts::LN_2) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    /// Each update sees the latest powers of players updated before it.
    #[default]
    Sequential,
    /// Every player responds to the previous sweep's profile.
    Simultaneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub update_mode: UpdateMode,
    /// Starting PU power; half of each PU's budget when unset.
    pub initial_pu_power: Option<f64>,
    pub initial_su_power: f64,
    /// SU whose interference enters the PU load. Unset means the weakest
    /// admitted SU.
    pub pu_reference_su: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iterations: 10_000,
            update_mode: UpdateMode::Sequential,
            initial_pu_power: None,
            initial_su_power: 0.01,
            pu_reference_su: None,
        }
    }
}

/// Multiple-access structure seen by the SUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Shared band: every other SU interferes.
    Noma,
    /// Equal orthogonal subbands: only PUs interfere.
    Oma,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Noma => "noma",
            Scheme::Oma => "oma",
        }
    }

    pub fn su_interference(
        self,
        k: usize,
        gains: &ChannelGains,
        powers: &PowerProfile,
    ) -> Result<f64> {
        match self {
            Scheme::Noma => utility::su_interference(k, gains, powers),
            Scheme::Oma => baseline_oma::oma_su_interference(k, gains, powers),
        }
    }

    pub fn su_utility(
        self,
        k: usize,
        gains: &ChannelGains,
        powers: &PowerProfile,
        noise: f64,
        bandwidth: f64,
    ) -> Result<f64> {
        match self {
            Scheme::Noma => utility::su_utility(k, gains, powers, noise, bandwidth),
            Scheme::Oma => {
                baseline_oma::oma_su_utility(k, gains, powers, noise, bandwidth, gains.num_sus())
            }
        }
    }

    fn pu_load(
        self,
        n: usize,
        gains: &ChannelGains,
        powers: &PowerProfile,
        reference_su: Option<usize>,
    ) -> Result<(f64, f64)> {
        let i_n = utility::pu_interference(n, gains, powers)?;
        let i_k = match reference_su {
            Some(k) => self.su_interference(k, gains, powers)?,
            None => 0.0,
        };
        Ok((i_n, i_k))
    }
}

fn project(value: f64, max: f64) -> f64 {
    value.max(0.0).min(max)
}

/// PU best response `1/(2 mu1) + load`, projected onto `[0, max_power]`.
pub fn pu_best_response_from_load(load: f64, mu1: f64, max_power: f64) -> f64 {
    project(0.5 / mu1 + load, max_power)
}

/// PU best response at the current profile, with `I_k` taken at
/// `reference_su`.
pub fn pu_best_response(
    n: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    reference_su: Option<usize>,
    mu1: f64,
    pu_max_power: f64,
) -> Result<f64> {
    let load = utility::pu_load(n, gains, powers, reference_su)?;
    Ok(pu_best_response_from_load(load, mu1, pu_max_power))
}

/// SU power update `I_k (2^(ln 2) - 1) / g`, projected onto `[0, max_power]`.
pub fn su_best_response_from_interference(
    interference: f64,
    gain: f64,
    max_power: f64,
) -> Result<f64> {
    if gain.is_nan() || gain <= 0.0 {
        return Err(Error::Domain(format!(
            "SU best response needs a positive channel gain, got {gain}"
        )));
    }
    Ok(project(
        interference * su_response_factor() / gain,
        max_power,
    ))
}

pub fn su_best_response(
    k: usize,
    gains: &ChannelGains,
    powers: &PowerProfile,
    su_max_power: f64,
) -> Result<f64> {
    let interference = utility::su_interference(k, gains, powers)?;
    su_best_response_from_interference(interference, gains.g_su_at_su_bs[k], su_max_power)
}

/// Admission rule: SUs keep being admitted while `q_n >= i_n + i_k`.
pub fn admission_check(q_n: f64, i_n: f64, i_k: f64) -> bool {
    q_n >= i_n + i_k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub final_powers: PowerProfile,
    pub su_utilities: Vec<f64>,
    pub pu_utilities: Vec<f64>,
    pub sum_su_utility: f64,
    /// Admitted SU indices, ascending.
    pub admitted_sus: Vec<usize>,
    pub iterations_used: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
}

impl EquilibriumResult {
    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    pub fn is_admitted(&self, k: usize) -> bool {
        self.admitted_sus.binary_search(&k).is_ok()
    }
}

/// Runs best-response dynamics under the NOMA interference structure.
pub fn solve_equilibrium(
    config: &NetworkConfig,
    gains: &ChannelGains,
) -> Result<EquilibriumResult> {
    solve_with(config, gains, Scheme::Noma, |_, _| {})
}

/// Runs best-response dynamics under `scheme`, calling `observe` with the
/// profile after every sweep.
pub fn solve_with(
    config: &NetworkConfig,
    gains: &ChannelGains,
    scheme: Scheme,
    mut observe: impl FnMut(usize, &PowerProfile),
) -> Result<EquilibriumResult> {
    let mut run = Run::new(config, gains, scheme)?;
    let opts = &config.solver;
    let mut residual_history = Vec::new();
    let mut converged = false;
    let mut iterations_used = 0;

    for iteration in 1..=opts.max_iterations {
        let previous = run.powers.clone();
        match opts.update_mode {
            UpdateMode::Sequential => run.sequential_sweep()?,
            UpdateMode::Simultaneous => run.simultaneous_sweep()?,
        }
        iterations_used = iteration;
        if !run.powers.all_finite() {
            return Err(Error::NumericFailure {
                iteration,
                what: "non-finite transmit power".into(),
            });
        }
        let residual = run.powers.max_abs_diff(&previous);
        if !residual.is_finite() {
            return Err(Error::NumericFailure {
                iteration,
                what: format!("non-finite residual {residual}"),
            });
        }
        residual_history.push(residual);
        observe(iteration, &run.powers);
        if residual <= opts.epsilon {
            converged = true;
            break;
        }
    }

    run.finish(iterations_used, converged, residual_history)
}

struct Run<'a> {
    config: &'a NetworkConfig,
    gains: &'a ChannelGains,
    scheme: Scheme,
    powers: PowerProfile,
    /// Length of the admitted prefix of `su_order`.
    admitted: usize,
}

impl<'a> Run<'a> {
    fn new(config: &'a NetworkConfig, gains: &'a ChannelGains, scheme: Scheme) -> Result<Self> {
        if gains.num_pus() != config.num_pus || gains.num_sus() != config.num_sus {
            return Err(Error::InvalidArgument(format!(
                "gains cover {} PU / {} SU, config has {} / {}",
                gains.num_pus(),
                gains.num_sus(),
                config.num_pus,
                config.num_sus
            )));
        }
        let opts = &config.solver;
        let pu_powers = config
            .pu_max_power
            .iter()
            .map(|&max| project(opts.initial_pu_power.unwrap_or(max / 2.0), max))
            .collect();
        let su_powers = config
            .su_max_power
            .iter()
            .map(|&max| project(opts.initial_su_power, max))
            .collect();
        Ok(Self {
            config,
            gains,
            scheme,
            powers: PowerProfile::new(pu_powers, su_powers),
            admitted: config.num_sus,
        })
    }

    fn reference_su(&self) -> Option<usize> {
        match self.config.solver.pu_reference_su {
            Some(k) => Some(k),
            None if self.admitted > 0 => Some(self.gains.su_order[0]),
            None => None,
        }
    }

    fn pu_response(&self, n: usize, at: &PowerProfile) -> Result<f64> {
        let (i_n, i_k) = self
            .scheme
            .pu_load(n, self.gains, at, self.reference_su())?;
        Ok(pu_best_response_from_load(
            i_n + i_k,
            self.config.mu1,
            self.config.pu_max_power[n],
        ))
    }

    fn su_response(&self, k: usize, at: &PowerProfile) -> Result<f64> {
        let interference = self.scheme.su_interference(k, self.gains, at)?;
        su_best_response_from_interference(
            interference,
            self.gains.g_su_at_su_bs[k],
            self.config.su_max_power[k],
        )
    }

    /// Applies the admission rule for PU `n` at the current profile.
    fn enforce_admission(&mut self, n: usize) -> Result<()> {
        let (i_n, i_k) = self
            .scheme
            .pu_load(n, self.gains, &self.powers, self.reference_su())?;
        if !admission_check(self.powers.pu_powers[n], i_n, i_k) && self.admitted > 0 {
            self.admitted -= 1;
            let dropped = self.gains.su_order[self.admitted];
            self.powers.su_powers[dropped] = 0.0;
        }
        Ok(())
    }

    fn sequential_sweep(&mut self) -> Result<()> {
        for n in 0..self.config.num_pus {
            self.powers.pu_powers[n] = self.pu_response(n, &self.powers)?;
            self.enforce_admission(n)?;
        }
        for idx in 0..self.admitted {
            let k = self.gains.su_order[idx];
            self.powers.su_powers[k] = self.su_response(k, &self.powers)?;
        }
        Ok(())
    }

    fn simultaneous_sweep(&mut self) -> Result<()> {
        let previous = self.powers.clone();
        for n in 0..self.config.num_pus {
            self.powers.pu_powers[n] = self.pu_response(n, &previous)?;
        }
        for idx in 0..self.admitted {
            let k = self.gains.su_order[idx];
            self.powers.su_powers[k] = self.su_response(k, &previous)?;
        }
        for n in 0..self.config.num_pus {
            self.enforce_admission(n)?;
        }
        Ok(())
    }

    fn finish(
        self,
        iterations_used: usize,
        converged: bool,
        residual_history: Vec<f64>,
    ) -> Result<EquilibriumResult> {
        let mut admitted_sus = self.gains.su_order[..self.admitted].to_vec();
        admitted_sus.sort_unstable();
        let numeric = |what: String| Error::NumericFailure {
            iteration: iterations_used,
            what,
        };

        let mut su_utilities = vec![0.0; self.config.num_sus];
        for &k in &admitted_sus {
            if self.powers.su_powers[k] > 0.0 {
                su_utilities[k] = self.scheme.su_utility(
                    k,
                    self.gains,
                    &self.powers,
                    self.config.noise_power,
                    self.config.bandwidth,
                )?;
            }
        }
        if let Some(k) = su_utilities.iter().position(|u| !u.is_finite()) {
            return Err(numeric(format!("non-finite utility for SU {k}")));
        }

        let reference = self.reference_su();
        let mut pu_utilities = Vec::with_capacity(self.config.num_pus);
        for n in 0..self.config.num_pus {
            let (i_n, i_k) = self
                .scheme
                .pu_load(n, self.gains, &self.powers, reference)?;
            let u = utility::pu_utility_from_load(
                self.powers.pu_powers[n],
                i_n + i_k,
                self.config.mu1,
                self.config.mu2,
            );
            if !u.is_finite() {
                return Err(numeric(format!("non-finite utility for PU {n}")));
            }
            pu_utilities.push(u);
        }

        let sum_su_utility = admitted_sus.iter().map(|&k| su_utilities[k]).sum();
        Ok(EquilibriumResult {
            final_powers: self.powers,
            su_utilities,
            pu_utilities,
            sum_su_utility,
            admitted_sus,
            iterations_used,
            converged,
            residual_history,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Pu(usize),
    Su(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub epsilon: f64,
    /// `|best response - final power|` per PU.
    pub pu_residuals: Vec<f64>,
    /// `|best response - final power|` per admitted SU; the power itself for
    /// non-admitted SUs.
    pub su_residuals: Vec<f64>,
    pub max_residual: f64,
    pub worst_player: Option<Player>,
    pub flagged_pus: Vec<usize>,
    pub flagged_sus: Vec<usize>,
    /// Best grid utility minus equilibrium utility, per PU.
    pub pu_grid_gain: Vec<f64>,
    pub grid_ok: bool,
    pub passed: bool,
}

/// Re-checks a converged NOMA result as a fixed point of the best-response
/// maps, and grid-scans each PU's utility for improving deviations.
pub fn verify_fixed_point(
    result: &EquilibriumResult,
    config: &NetworkConfig,
    gains: &ChannelGains,
) -> Result<VerificationReport> {
    verify_with(result, config, gains, Scheme::Noma)
}

pub fn verify_with(
    result: &EquilibriumResult,
    config: &NetworkConfig,
    gains: &ChannelGains,
    scheme: Scheme,
) -> Result<VerificationReport> {
    if !result.converged {
        return Err(Error::Precondition(
            "fixed-point verification needs a converged result".into(),
        ));
    }
    let powers = &result.final_powers;
    if powers.pu_powers.len() != config.num_pus || powers.su_powers.len() != config.num_sus {
        return Err(Error::InvalidArgument(
            "result profile does not match the config dimensions".into(),
        ));
    }
    if let Some(&k) = result.admitted_sus.iter().find(|&&k| k >= config.num_sus) {
        return Err(Error::InvalidArgument(format!(
            "admitted SU {k} out of range"
        )));
    }
    let reference = config.solver.pu_reference_su.or_else(|| {
        gains
            .su_order
            .iter()
            .copied()
            .find(|&k| result.is_admitted(k))
    });

    let mut pu_residuals = Vec::with_capacity(config.num_pus);
    let mut pu_grid_gain = Vec::with_capacity(config.num_pus);
    for n in 0..config.num_pus {
        let (i_n, i_k) = scheme.pu_load(n, gains, powers, reference)?;
        let load = i_n + i_k;
        let q = powers.pu_powers[n];
        let max = config.pu_max_power[n];
        pu_residuals.push((pu_best_response_from_load(load, config.mu1, max) - q).abs());

        let at_equilibrium = utility::pu_utility_from_load(q, load, config.mu1, config.mu2);
        let best_on_grid = (0..PU_GRID_POINTS)
            .map(|i| max * i as f64 / (PU_GRID_POINTS - 1) as f64)
            .map(|candidate| utility::pu_utility_from_load(candidate, load, config.mu1, config.mu2))
            .fold(f64::NEG_INFINITY, f64::max);
        pu_grid_gain.push(best_on_grid - at_equilibrium);
    }

    let mut su_residuals = Vec::with_capacity(config.num_sus);
    for k in 0..config.num_sus {
        let p = powers.su_powers[k];
        let residual = if result.is_admitted(k) {
            let interference = scheme.su_interference(k, gains, powers)?;
            let br = su_best_response_from_interference(
                interference,
                gains.g_su_at_su_bs[k],
                config.su_max_power[k],
            )?;
            (br - p).abs()
        } else {
            p.abs()
        };
        su_residuals.push(residual);
    }

    let eps = config.solver.epsilon;
    let flagged = |r: &[f64]| -> Vec<usize> {
        r.iter()
            .enumerate()
            .filter(|(_, &x)| x.is_nan() || x > eps)
            .map(|(i, _)| i)
            .collect()
    };
    let flagged_pus = flagged(&pu_residuals);
    let flagged_sus = flagged(&su_residuals);

    let mut max_residual = 0.0;
    let mut worst_player = None;
    let players = pu_residuals
        .iter()
        .enumerate()
        .map(|(n, &r)| (Player::Pu(n), r))
        .chain(
            su_residuals
                .iter()
                .enumerate()
                .map(|(k, &r)| (Player::Su(k), r)),
        );
    for (player, r) in players {
        if worst_player.is_none() || r > max_residual {
            max_residual = r;
            worst_player = Some(player);
        }
    }

    let grid_ok = pu_grid_gain.iter().all(|&g| g <= PU_GRID_TOLERANCE);
    let passed = max_residual <= eps && grid_ok;
    Ok(VerificationReport {
        epsilon: eps,
        pu_residuals,
        su_residuals,
        max_residual,
        worst_player,
        flagged_pus,
        flagged_sus,
        pu_grid_gain,
        grid_ok,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_channel_gains;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// One PU and one SU with hand-picked power gains.
    fn two_player() -> (NetworkConfig, ChannelGains) {
        let mut config = NetworkConfig::table1().with_first_sus(1).unwrap();
        config.su_max_power = vec![1e3];
        config.pu_max_power = vec![1e3];
        config.solver.epsilon = 1e-13;
        let gains = ChannelGains::from_gains(vec![1.0], vec![0.5], vec![0.5], vec![1.0]).unwrap();
        (config, gains)
    }

    /// Independent route: solve q = 1/(2 mu1) + b*rho + a*q, rho = c*a*q by
    /// Cramer's rule.
    fn two_player_oracle(mu1: f64, a: f64, b: f64) -> (f64, f64) {
        let c = 2f64.powf(2f64.ln()) - 1.0;
        // [1-a, -b; -c*a, 1] [q; rho] = [f; 0]
        let f = 0.5 / mu1;
        let det = (1.0 - a) - b * c * a;
        (f / det, c * a * f / det)
    }

    #[test]
    fn response_factor_value() {
        assert!(close(su_response_factor(), 0.616807, 1e-6));
    }

    #[test]
    fn pu_best_response_examples() {
        assert!(close(
            pu_best_response_from_load(0.0, 10.0, 20.0),
            0.05,
            1e-15
        ));
        assert!(close(
            pu_best_response_from_load(3.0, 10.0, 20.0),
            3.05,
            1e-15
        ));
        assert_eq!(pu_best_response_from_load(100.0, 10.0, 20.0), 20.0);
    }

    #[test]
    fn su_best_response_examples() {
        assert_eq!(
            su_best_response_from_interference(0.0, 1.0, 20.0).unwrap(),
            0.0
        );
        let r = su_best_response_from_interference(1.0, 1.0, 20.0).unwrap();
        assert!(close(r, 0.616807, 1e-6));
        assert_eq!(
            su_best_response_from_interference(1e6, 1.0, 20.0).unwrap(),
            20.0
        );
    }

    #[test]
    fn su_best_response_rejects_zero_gain() {
        let (_, mut gains) = two_player();
        gains.g_su_at_su_bs[0] = 0.0;
        let p = PowerProfile::new(vec![1.0], vec![1.0]);
        assert!(matches!(
            su_best_response(0, &gains, &p, 20.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn admission_examples() {
        assert!(admission_check(5.0, 2.0, 1.0));
        assert!(!admission_check(2.0, 2.0, 1.0));
        assert!(admission_check(3.0, 2.0, 1.0));
    }

    #[test]
    fn two_player_fixed_point_matches_linear_solve() {
        let (config, gains) = two_player();
        let (q_star, rho_star) = two_player_oracle(10.0, 0.5, 0.5);
        assert!(close(q_star, 0.144592, 1e-6));
        assert!(close(rho_star, 0.044592, 1e-6));
        for mode in [UpdateMode::Sequential, UpdateMode::Simultaneous] {
            let mut config = config.clone();
            config.solver.update_mode = mode;
            let r = solve_equilibrium(&config, &gains).unwrap();
            assert!(r.converged, "{mode:?}");
            assert!(r.iterations_used < 200);
            assert!(close(r.final_powers.pu_powers[0], q_star, 1e-9));
            assert!(close(r.final_powers.su_powers[0], rho_star, 1e-9));
            let report = verify_fixed_point(&r, &config, &gains).unwrap();
            assert!(report.max_residual <= 1e-9);
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn perturbed_su_is_flagged() {
        let (config, gains) = two_player();
        let mut r = solve_equilibrium(&config, &gains).unwrap();
        r.final_powers.su_powers[0] += 0.1;
        let report = verify_fixed_point(&r, &config, &gains).unwrap();
        assert!(!report.passed);
        assert!(report.max_residual > config.solver.epsilon);
        assert_eq!(report.flagged_sus, vec![0]);
        assert_eq!(report.worst_player, Some(Player::Su(0)));
    }

    #[test]
    fn verify_rejects_unconverged() {
        let (mut config, gains) = two_player();
        config.solver.max_iterations = 2;
        let r = solve_equilibrium(&config, &gains).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 2);
        assert!(matches!(
            verify_fixed_point(&r, &config, &gains),
            Err(Error::Precondition(_))
        ));
    }

    /// Close PU: its gain at the SU base station exceeds one, so the PU load
    /// always exceeds its own power while any SU is admitted.
    fn blocking_pu(pu_max: f64) -> (NetworkConfig, ChannelGains) {
        let mut config = NetworkConfig::table1().with_first_sus(4).unwrap();
        config.pu_distance_to_su_bs = vec![0.5];
        config.pu_max_power = vec![pu_max];
        let gains = build_channel_gains(&config).unwrap();
        assert!(gains.g_pu_at_su_bs[0] > 1.0);
        (config, gains)
    }

    #[test]
    fn all_sus_de_admitted_pu_settles_at_floor() {
        for pu_max in [20.0, 0.01] {
            let (config, gains) = blocking_pu(pu_max);
            let r = solve_equilibrium(&config, &gains).unwrap();
            assert!(r.converged);
            assert!(r.admitted_sus.is_empty());
            assert_eq!(r.final_powers.su_powers, vec![0.0; 4]);
            assert_eq!(r.sum_su_utility, 0.0);
            let expected = (0.5 / config.mu1).min(pu_max);
            assert!(close(r.final_powers.pu_powers[0], expected, 1e-12));
            let report = verify_fixed_point(&r, &config, &gains).unwrap();
            assert!(report.grid_ok, "{report:?}");
            assert!(report.passed);
        }
    }

    #[test]
    fn de_admission_removes_strongest_first() {
        let (config, gains) = blocking_pu(20.0);
        let mut sizes = Vec::new();
        solve_with(&config, &gains, Scheme::Noma, |_, p| {
            sizes.push(p.su_powers.iter().filter(|&&x| x > 0.0).count());
        })
        .unwrap();
        // One SU leaves per sweep while the rule is violated.
        assert_eq!(&sizes[..4], &[3, 2, 1, 0]);
    }

    #[test]
    fn powers_stay_in_action_sets() {
        let config = NetworkConfig::table1();
        let gains = build_channel_gains(&config).unwrap();
        let mut sweeps = 0;
        let r = solve_with(&config, &gains, Scheme::Noma, |_, p| {
            sweeps += 1;
            p.check_bounds(&config).unwrap();
        })
        .unwrap();
        assert_eq!(sweeps, r.iterations_used);
        assert!(r.residual_history.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn table1_converges_and_verifies() {
        let config = NetworkConfig::table1();
        let gains = build_channel_gains(&config).unwrap();
        let a = solve_equilibrium(&config, &gains).unwrap();
        assert!(a.converged);
        assert!(a.final_residual().unwrap() <= 1e-6);
        assert_eq!(a.admitted_sus, (0..26).collect::<Vec<_>>());
        let direct: f64 = a.admitted_sus.iter().map(|&k| a.su_utilities[k]).sum();
        assert_eq!(a.sum_su_utility, direct);
        let report = verify_fixed_point(&a, &config, &gains).unwrap();
        assert!(report.passed, "{report:?}");

        let b = solve_equilibrium(&config, &gains).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn update_modes_agree_on_table1() {
        let mut config = NetworkConfig::table1();
        let gains = build_channel_gains(&config).unwrap();
        let seq = solve_equilibrium(&config, &gains).unwrap();
        config.solver.update_mode = UpdateMode::Simultaneous;
        let sim = solve_equilibrium(&config, &gains).unwrap();
        assert!(seq.converged && sim.converged);
        let gap = seq.final_powers.max_abs_diff(&sim.final_powers);
        assert!(gap <= 10.0 * config.solver.epsilon, "gap {gap}");
    }

    #[test]
    fn mismatched_gains_rejected() {
        let config = NetworkConfig::table1();
        let (_, gains) = two_player();
        assert!(matches!(
            solve_equilibrium(&config, &gains),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn result_json_round_trips() {
        let (config, gains) = two_player();
        let r = solve_equilibrium(&config, &gains).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: EquilibriumResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
