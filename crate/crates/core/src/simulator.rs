//! Seeded Monte Carlo engine composing geometry, gaussian and hypothesis
//! into full verification rounds and N-sweeps.
//!
//! Determinism contract: a sweep result is a pure function of its
//! configuration including the seed. Every trial owns a random stream
//! derived from (seed, N, hypothesis, trial index), and per-cell
//! aggregation sums integer counts, so results are identical for any
//! degree of parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::gaussian::CloningChannelParams;
use crate::geometry::{
    place_eve_devices, EveStrategy, NetworkGeometry, PlanarPoint,
};
use crate::hypothesis::{
    cloning_rates, cloning_threshold, lambda_for_gamma, mean_shift_lambda_for_gamma,
    mean_shift_rates, mean_shift_statistic, mean_shift_threshold, total_error, variance_statistic,
    Decision, ErrorRates, MeanShiftScenario, Threshold, VarianceScenario,
};

/// Which attack a sweep simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Delay,
    Clone,
}

/// Hypothesis a round is simulated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// H0: the prover is legitimate.
    Null,
    /// H1: the prover is malicious.
    Alternate,
}

/// How the decision threshold is set at each N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// Fix the likelihood-ratio threshold lambda.
    FixedLambda(f64),
    /// Fix Gamma = k * N (the cloning figure uses k = 2).
    GammaTimesN(f64),
}

/// Reference-station layout per sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub enum RsPlacement {
    /// Stations drawn uniformly over a disc of this radius around the
    /// claimed location, fresh for every trial.
    RandomDisc { radius_m: f64 },
    /// An explicit station list; each sweep value n uses the first n points.
    Fixed { points: Vec<PlanarPoint> },
}

/// Settings shared by both sweep modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Observation counts to sweep, strictly increasing.
    pub n_values: Vec<usize>,
    /// Trials per hypothesis per N.
    pub trials: usize,
    pub seed: u64,
    /// Prior probability of legitimacy.
    pub p0: f64,
    pub threshold_policy: ThresholdPolicy,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            n_values: vec![1],
            trials: 100_000,
            seed: 1,
            p0: 0.5,
            threshold_policy: ThresholdPolicy::FixedLambda(1.0),
        }
    }
}

/// Delay-mode configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayConfig {
    pub rs_placement: RsPlacement,
    /// Timing-noise standard deviation, seconds.
    pub sigma_t_std: f64,
    /// Verification distance, meters.
    pub d_v: f64,
    pub eve_strategy: EveStrategy,
    /// When set, malicious rounds sample from a deployment at this
    /// verification distance while the detector keeps the canonical d_v.
    pub attacker_d_v: Option<f64>,
}

/// Clone-mode configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneConfig {
    pub cloning: CloningChannelParams,
}

/// Mode-specific part of a scenario description.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeConfig {
    Delay(DelayConfig),
    Clone(CloneConfig),
}

/// A full declarative experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sweep: SweepSettings,
    pub mode: ModeConfig,
}

impl ScenarioConfig {
    pub fn mode(&self) -> Mode {
        match self.mode {
            ModeConfig::Delay(_) => Mode::Delay,
            ModeConfig::Clone(_) => Mode::Clone,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values must not be empty".into()));
        }
        if !s.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "n_values must be strictly increasing".into(),
            ));
        }
        if s.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&s.p0) {
            return Err(Error::InvalidConfig("p0 must lie in [0, 1]".into()));
        }
        match s.threshold_policy {
            ThresholdPolicy::FixedLambda(lambda) if !(lambda > 0.0) || !lambda.is_finite() => {
                return Err(Error::InvalidConfig("lambda must be positive and finite".into()));
            }
            ThresholdPolicy::GammaTimesN(k) if !(k > 0.0) || !k.is_finite() => {
                return Err(Error::InvalidConfig(
                    "the Gamma = k N policy needs a positive finite k".into(),
                ));
            }
            _ => {}
        }
        match &self.mode {
            ModeConfig::Delay(d) => {
                if !(d.sigma_t_std > 0.0) || !d.sigma_t_std.is_finite() {
                    return Err(Error::InvalidConfig(
                        "sigma_t_std must be positive and finite".into(),
                    ));
                }
                if !(d.d_v > 0.0) || !d.d_v.is_finite() {
                    return Err(Error::InvalidConfig("d_v must be positive and finite".into()));
                }
                if let Some(a) = d.attacker_d_v {
                    if !(a > 0.0) || !a.is_finite() {
                        return Err(Error::InvalidConfig(
                            "attacker_d_v must be positive and finite".into(),
                        ));
                    }
                }
                match &d.rs_placement {
                    RsPlacement::RandomDisc { radius_m } => {
                        if !(*radius_m > 0.0) || !radius_m.is_finite() {
                            return Err(Error::InvalidConfig(
                                "disc radius must be positive and finite".into(),
                            ));
                        }
                    }
                    RsPlacement::Fixed { points } => {
                        for &n in &s.n_values {
                            if n < 3 {
                                return Err(Error::InvalidConfig(
                                    "delay sweeps need at least 3 stations per cell".into(),
                                ));
                            }
                            if n > points.len() {
                                return Err(Error::InvalidConfig(format!(
                                    "n = {n} exceeds the {} fixed stations",
                                    points.len()
                                )));
                            }
                        }
                    }
                }
                if let RsPlacement::RandomDisc { .. } = d.rs_placement {
                    if s.n_values.iter().any(|&n| n < 3) {
                        return Err(Error::InvalidConfig(
                            "delay sweeps need at least 3 stations per cell".into(),
                        ));
                    }
                }
            }
            ModeConfig::Clone(_) => {}
        }
        Ok(())
    }
}

/// Empirical rates of one sweep cell with their binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRates {
    pub alpha: f64,
    pub beta: f64,
    pub total_error: f64,
    pub se_alpha: f64,
    pub se_beta: f64,
    pub trials_per_hypothesis: usize,
}

/// Per-N record of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n: usize,
    /// Analytic rates where a single fixed scenario exists (clone mode and
    /// fixed-geometry delay mode).
    pub analytic: Option<ErrorRates>,
    pub empirical: EmpiricalRates,
    /// Realized threshold where a single fixed scenario exists.
    pub gamma: Option<f64>,
}

/// Result of a sweep, one record per configured N.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mode: Mode,
    pub seed: u64,
    pub records: Vec<SweepRecord>,
}

/// Detector kernel shared by both sweeps.
#[derive(Debug, Clone, Copy)]
pub enum RoundKernel<'a> {
    MeanShift(&'a MeanShiftScenario),
    Variance(&'a VarianceScenario),
}

impl<'a> RoundKernel<'a> {
    fn n(&self) -> usize {
        match self {
            RoundKernel::MeanShift(s) => s.n(),
            RoundKernel::Variance(s) => s.n_obs(),
        }
    }

    /// Sampling law (means, variance) under the given hypothesis.
    fn sampling_law(&self, hypothesis: Hypothesis) -> (&[f64], f64) {
        match (self, hypothesis) {
            (RoundKernel::MeanShift(s), Hypothesis::Null) => (s.u(), s.sigma()),
            (RoundKernel::MeanShift(s), Hypothesis::Alternate) => (s.v(), s.sigma()),
            (RoundKernel::Variance(s), Hypothesis::Null) => (s.u(), s.sigma_0()),
            (RoundKernel::Variance(s), Hypothesis::Alternate) => (s.u(), s.sigma_cl()),
        }
    }

    fn decide(&self, threshold: &Threshold, y: &[f64]) -> Result<Decision> {
        let statistic = match self {
            RoundKernel::MeanShift(s) => mean_shift_statistic(s, y)?,
            RoundKernel::Variance(s) => variance_statistic(s, y)?,
        };
        Ok(if statistic >= threshold.gamma {
            Decision::Malicious
        } else {
            Decision::Legitimate
        })
    }
}

/// Simulate one verification round under the stated hypothesis: sample the
/// observation from the kernel's law and apply the kernel's decision rule.
pub fn simulate_round<R: Rng + ?Sized>(
    kernel: &RoundKernel,
    hypothesis: Hypothesis,
    threshold: &Threshold,
    rng: &mut R,
) -> Result<(Vec<f64>, Decision)> {
    let (means, variance) = kernel.sampling_law(hypothesis);
    let means = means.to_vec();
    simulate_round_with(kernel, &means, variance, threshold, rng)
}

/// Round kernel with an explicit sampling law; `variance = 0` yields the
/// noiseless observation y = means.
pub fn simulate_round_with<R: Rng + ?Sized>(
    kernel: &RoundKernel,
    means: &[f64],
    variance: f64,
    threshold: &Threshold,
    rng: &mut R,
) -> Result<(Vec<f64>, Decision)> {
    if means.len() != kernel.n() {
        return Err(invalid(format!(
            "means length {} does not match the kernel's {} observations",
            means.len(),
            kernel.n()
        )));
    }
    if !variance.is_finite() || variance < 0.0 {
        return Err(invalid("sampling variance must be finite and non-negative"));
    }
    let std = variance.sqrt();
    let y: Vec<f64> = means
        .iter()
        .map(|&m| {
            if std == 0.0 {
                m
            } else {
                let z: f64 = rng.sample(StandardNormal);
                m + std * z
            }
        })
        .collect();
    let decision = kernel.decide(threshold, &y)?;
    Ok((y, decision))
}

/// Empirical rate with its binomial standard error
/// sqrt(rate (1 - rate) / trials).
pub fn binomial_ci(successes: usize, trials: usize) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if successes > trials {
        return Err(invalid(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    let rate = successes as f64 / trials as f64;
    Ok((rate, (rate * (1.0 - rate) / trials as f64).sqrt()))
}

/// Run the time-delay-attack sweep described by `config`.
pub fn run_delay_sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    config.validate()?;
    let ModeConfig::Delay(delay) = &config.mode else {
        return Err(Error::InvalidConfig(
            "run_delay_sweep requires a delay-mode config".into(),
        ));
    };
    let settings = &config.sweep;
    let mut records = Vec::with_capacity(settings.n_values.len());
    for &n in &settings.n_values {
        let record = match &delay.rs_placement {
            RsPlacement::Fixed { points } => {
                delay_cell_fixed(settings, delay, n, &points[..n])?
            }
            RsPlacement::RandomDisc { radius_m } => {
                delay_cell_random(settings, delay, n, *radius_m)?
            }
        };
        records.push(record);
    }
    Ok(SweepResult {
        mode: Mode::Delay,
        seed: settings.seed,
        records,
    })
}

/// Run the optimal-cloning-attack sweep described by `config`.
pub fn run_clone_sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    config.validate()?;
    let ModeConfig::Clone(clone) = &config.mode else {
        return Err(Error::InvalidConfig(
            "run_clone_sweep requires a clone-mode config".into(),
        ));
    };
    let settings = &config.sweep;
    let sigma_0 = clone.cloning.sigma_0();
    let sigma_cl = clone.cloning.clone_variance();
    let mut records = Vec::with_capacity(settings.n_values.len());
    for &n in &settings.n_values {
        // Quadrature means are known to the verifier; zero without loss of
        // generality since the statistic subtracts them.
        let scenario = VarianceScenario::new(sigma_0, sigma_cl, vec![0.0; n])?;
        let threshold = match settings.threshold_policy {
            ThresholdPolicy::FixedLambda(lambda) => cloning_threshold(lambda, &scenario)?,
            ThresholdPolicy::GammaTimesN(k) => {
                let gamma = k * n as f64;
                let lambda = lambda_for_gamma(gamma, &scenario).unwrap_or(f64::NAN);
                Threshold { lambda, gamma }
            }
        };
        let analytic = rates_with_prior(cloning_rates(&threshold, &scenario)?, settings.p0)?;
        let kernel = RoundKernel::Variance(&scenario);
        let count = |hypothesis: Hypothesis, hyp_tag: u64| -> Result<usize> {
            (0..settings.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(settings.seed, n as u64, hyp_tag, trial as u64);
                    let (_, decision) = simulate_round(&kernel, hypothesis, &threshold, &mut rng)?;
                    Ok(usize::from(decision == Decision::Malicious))
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))
        };
        let flagged_h0 = count(Hypothesis::Null, 0)?;
        let flagged_h1 = count(Hypothesis::Alternate, 1)?;
        records.push(SweepRecord {
            n,
            analytic: Some(analytic),
            empirical: empirical_rates(flagged_h0, flagged_h1, settings.trials, settings.p0)?,
            gamma: Some(threshold.gamma),
        });
    }
    Ok(SweepResult {
        mode: Mode::Clone,
        seed: settings.seed,
        records,
    })
}

/// Scenario pieces of one delay cell: detector scenario, threshold, and the
/// mean vector malicious rounds actually sample from.
struct DelayCell {
    scenario: MeanShiftScenario,
    threshold: Threshold,
    attacker_means: Vec<f64>,
}

fn build_delay_cell(
    geometry: &NetworkGeometry,
    delay: &DelayConfig,
    settings: &SweepSettings,
) -> Result<DelayCell> {
    let u = geometry.honest_means();
    let deployment = place_eve_devices(geometry, delay.d_v, delay.eve_strategy)?;
    let v = geometry.delay_vector(&deployment)?;
    let sigma = delay.sigma_t_std * delay.sigma_t_std;
    let scenario = MeanShiftScenario::new(u, v, sigma, settings.p0)?;
    let threshold = match settings.threshold_policy {
        ThresholdPolicy::FixedLambda(lambda) => mean_shift_threshold(&scenario, lambda)?,
        ThresholdPolicy::GammaTimesN(k) => {
            let gamma = k * scenario.n() as f64;
            let lambda = mean_shift_lambda_for_gamma(&scenario, gamma);
            Threshold { lambda, gamma }
        }
    };
    let attacker_means = match delay.attacker_d_v {
        None => scenario.v().to_vec(),
        Some(d_v) => {
            let mismatched = place_eve_devices(geometry, d_v, delay.eve_strategy)?;
            geometry.delay_vector(&mismatched)?
        }
    };
    Ok(DelayCell {
        scenario,
        threshold,
        attacker_means,
    })
}

fn delay_cell_fixed(
    settings: &SweepSettings,
    delay: &DelayConfig,
    n: usize,
    points: &[PlanarPoint],
) -> Result<SweepRecord> {
    let geometry = NetworkGeometry::new(points.to_vec(), PlanarPoint::new(0.0, 0.0))?;
    let cell = build_delay_cell(&geometry, delay, settings)?;
    let analytic = rates_with_prior(
        mean_shift_rates(&cell.scenario, &cell.threshold)?,
        settings.p0,
    )?;
    let sigma = cell.scenario.sigma();
    let count = |hypothesis: Hypothesis, hyp_tag: u64| -> Result<usize> {
        (0..settings.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(settings.seed, n as u64, hyp_tag, trial as u64);
                let kernel = RoundKernel::MeanShift(&cell.scenario);
                let means = match hypothesis {
                    Hypothesis::Null => cell.scenario.u(),
                    Hypothesis::Alternate => &cell.attacker_means,
                };
                let (_, decision) =
                    simulate_round_with(&kernel, means, sigma, &cell.threshold, &mut rng)?;
                Ok(usize::from(decision == Decision::Malicious))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let flagged_h0 = count(Hypothesis::Null, 0)?;
    let flagged_h1 = count(Hypothesis::Alternate, 1)?;
    Ok(SweepRecord {
        n,
        analytic: Some(analytic),
        empirical: empirical_rates(flagged_h0, flagged_h1, settings.trials, settings.p0)?,
        gamma: Some(cell.threshold.gamma),
    })
}

fn delay_cell_random(
    settings: &SweepSettings,
    delay: &DelayConfig,
    n: usize,
    radius_m: f64,
) -> Result<SweepRecord> {
    let run_trial = |hypothesis: Hypothesis, hyp_tag: u64, trial: u64| -> Result<usize> {
        let mut rng = trial_rng(settings.seed, n as u64, hyp_tag, trial);
        let geometry = random_disc_geometry(n, radius_m, &mut rng)?;
        let cell = build_delay_cell(&geometry, delay, settings)?;
        let means = match hypothesis {
            Hypothesis::Null => cell.scenario.u(),
            Hypothesis::Alternate => &cell.attacker_means,
        };
        let kernel = RoundKernel::MeanShift(&cell.scenario);
        let (_, decision) = simulate_round_with(
            &kernel,
            means,
            cell.scenario.sigma(),
            &cell.threshold,
            &mut rng,
        )?;
        Ok(usize::from(decision == Decision::Malicious))
    };
    let count = |hypothesis: Hypothesis, hyp_tag: u64| -> Result<usize> {
        (0..settings.trials)
            .into_par_iter()
            .map(|trial| run_trial(hypothesis, hyp_tag, trial as u64))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let flagged_h0 = count(Hypothesis::Null, 0)?;
    let flagged_h1 = count(Hypothesis::Alternate, 1)?;
    Ok(SweepRecord {
        n,
        analytic: None,
        empirical: empirical_rates(flagged_h0, flagged_h1, settings.trials, settings.p0)?,
        gamma: None,
    })
}

/// Stations uniform over the disc around the claimed location (origin).
/// Radii below one meter are rejected by resampling so a station cannot
/// collide with the claimed location.
fn random_disc_geometry<R: Rng + ?Sized>(
    n: usize,
    radius_m: f64,
    rng: &mut R,
) -> Result<NetworkGeometry> {
    let min_distance = (radius_m * 1e-6).max(1.0).min(radius_m);
    let mut stations = Vec::with_capacity(n);
    while stations.len() < n {
        let u: f64 = rng.random();
        let r = radius_m * u.sqrt();
        let angle: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        if r < min_distance {
            continue;
        }
        stations.push(PlanarPoint::new(r * angle.cos(), r * angle.sin()));
    }
    NetworkGeometry::new(stations, PlanarPoint::new(0.0, 0.0))
}

fn empirical_rates(
    flagged_h0: usize,
    flagged_h1: usize,
    trials: usize,
    p0: f64,
) -> Result<EmpiricalRates> {
    let (alpha, se_alpha) = binomial_ci(flagged_h0, trials)?;
    let (beta, se_beta) = binomial_ci(flagged_h1, trials)?;
    Ok(EmpiricalRates {
        alpha,
        beta,
        total_error: total_error(alpha, beta, p0)?,
        se_alpha,
        se_beta,
        trials_per_hypothesis: trials,
    })
}

/// Recompute the total error of analytic rates under the configured prior
/// (the closed forms default to p0 = 1/2).
fn rates_with_prior(rates: ErrorRates, p0: f64) -> Result<ErrorRates> {
    Ok(ErrorRates {
        alpha: rates.alpha,
        beta: rates.beta,
        total_error: total_error(rates.alpha, rates.beta, p0)?,
    })
}

/// Per-trial random stream: the seed is mixed with the cell coordinates via
/// splitmix64 finalizers, so streams are stable across platforms and
/// independent of execution order.
fn trial_rng(master: u64, n: u64, hypothesis: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, &[n, hypothesis, trial]))
}

fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut acc = splitmix64(master ^ GOLDEN);
    for (i, &p) in parts.iter().enumerate() {
        acc = splitmix64(acc ^ p.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)));
    }
    acc
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn clone_config(n_values: Vec<usize>, trials: usize, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            sweep: SweepSettings {
                n_values,
                trials,
                seed,
                p0: 0.5,
                threshold_policy: ThresholdPolicy::GammaTimesN(2.0),
            },
            mode: ModeConfig::Clone(CloneConfig {
                cloning: CloningChannelParams::new(1, 5, 1.0).unwrap(),
            }),
        }
    }

    fn delay_config(
        n_values: Vec<usize>,
        trials: usize,
        seed: u64,
        placement: RsPlacement,
        d_v: f64,
    ) -> ScenarioConfig {
        ScenarioConfig {
            sweep: SweepSettings {
                n_values,
                trials,
                seed,
                p0: 0.5,
                threshold_policy: ThresholdPolicy::FixedLambda(1.0),
            },
            mode: ModeConfig::Delay(DelayConfig {
                rs_placement: placement,
                sigma_t_std: 1e-6,
                d_v,
                eve_strategy: EveStrategy::TowardRs,
                attacker_d_v: None,
            }),
        }
    }

    fn fixed_triangle(scale: f64) -> RsPlacement {
        RsPlacement::Fixed {
            points: vec![
                PlanarPoint::new(scale, 0.0),
                PlanarPoint::new(-0.5 * scale, 0.866 * scale),
                PlanarPoint::new(-0.5 * scale, -0.866 * scale),
            ],
        }
    }

    #[test]
    fn binomial_ci_values() {
        assert_eq!(binomial_ci(0, 100).unwrap(), (0.0, 0.0));
        let (rate, se) = binomial_ci(50, 100).unwrap();
        assert_eq!(rate, 0.5);
        close(se, 0.05, 1e-15);
        assert_eq!(binomial_ci(100, 100).unwrap(), (1.0, 0.0));
        assert!(binomial_ci(5, 4).is_err());
        assert!(binomial_ci(0, 0).is_err());
    }

    #[test]
    fn config_validation_catches_bad_inputs() {
        let mut config = clone_config(vec![1, 5], 100, 1);
        assert!(config.validate().is_ok());
        config.sweep.n_values = vec![5, 1];
        assert!(config.validate().is_err());
        config.sweep.n_values = vec![];
        assert!(config.validate().is_err());
        config.sweep.n_values = vec![1];
        config.sweep.trials = 0;
        assert!(config.validate().is_err());
        config.sweep.trials = 10;
        config.sweep.p0 = 1.5;
        assert!(config.validate().is_err());

        let delay = delay_config(vec![2], 10, 1, RsPlacement::RandomDisc { radius_m: 100.0 }, 10.0);
        assert!(delay.validate().is_err()); // n < 3
        let delay = delay_config(vec![4], 10, 1, fixed_triangle(100.0), 10.0);
        assert!(delay.validate().is_err()); // more n than points
        let mut delay = delay_config(vec![3], 10, 1, fixed_triangle(100.0), 10.0);
        assert!(delay.validate().is_ok());
        delay.mode = ModeConfig::Delay(DelayConfig {
            rs_placement: fixed_triangle(100.0),
            sigma_t_std: 0.0,
            d_v: 10.0,
            eve_strategy: EveStrategy::TowardRs,
            attacker_d_v: None,
        });
        assert!(delay.validate().is_err());
    }

    #[test]
    fn sweeps_reject_mode_mismatch() {
        let clone = clone_config(vec![1], 10, 1);
        assert!(run_delay_sweep(&clone).is_err());
        let delay = delay_config(vec![3], 10, 1, fixed_triangle(100.0), 10.0);
        assert!(run_clone_sweep(&delay).is_err());
    }

    #[test]
    fn clone_sweep_matches_analytic_rates() {
        let config = clone_config(vec![1, 5], 40_000, 42);
        let result = run_clone_sweep(&config).unwrap();
        assert_eq!(result.records.len(), 2);
        for record in &result.records {
            let analytic = record.analytic.unwrap();
            let se_floor = 1e-4;
            assert!(
                (record.empirical.alpha - analytic.alpha).abs()
                    <= 3.0 * record.empirical.se_alpha.max(se_floor),
                "alpha off at n = {}",
                record.n
            );
            assert!(
                (record.empirical.beta - analytic.beta).abs()
                    <= 3.0 * record.empirical.se_beta.max(se_floor),
                "beta off at n = {}",
                record.n
            );
        }
        // Gamma = 2N policy.
        close(result.records[0].gamma.unwrap(), 2.0, 1e-12);
        close(result.records[1].gamma.unwrap(), 10.0, 1e-12);
    }

    #[test]
    fn clone_sweep_with_equal_variances_loses_power() {
        let mut config = clone_config(vec![4], 20_000, 9);
        config.mode = ModeConfig::Clone(CloneConfig {
            cloning: CloningChannelParams::new(5, 5, 1.0).unwrap(),
        });
        let result = run_clone_sweep(&config).unwrap();
        let record = &result.records[0];
        let spread = (record.empirical.alpha - record.empirical.beta).abs();
        assert!(
            spread <= 3.0 * (record.empirical.se_alpha + record.empirical.se_beta),
            "alpha and beta should agree when sigma_cl = sigma_0, spread = {spread}"
        );
        let analytic = record.analytic.unwrap();
        assert_eq!(analytic.alpha, analytic.beta);
    }

    #[test]
    fn delay_sweep_fixed_geometry_has_analytic_rates() {
        let config = delay_config(vec![3], 20_000, 7, fixed_triangle(4000.0), 150.0);
        let result = run_delay_sweep(&config).unwrap();
        let record = &result.records[0];
        let analytic = record.analytic.expect("fixed geometry is analytic");
        assert!(record.gamma.is_some());
        assert!(
            (record.empirical.alpha - analytic.alpha).abs() <= 3.0 * record.empirical.se_alpha.max(1e-4)
        );
        assert!(
            (record.empirical.beta - analytic.beta).abs() <= 3.0 * record.empirical.se_beta.max(1e-4)
        );
    }

    #[test]
    fn delay_sweep_tiny_dv_is_a_coin_flip() {
        let config = delay_config(vec![3], 20_000, 3, fixed_triangle(4000.0), 1e-9);
        let result = run_delay_sweep(&config).unwrap();
        let te = result.records[0].empirical.total_error;
        close(te, 0.5, 0.02);
    }

    #[test]
    fn delay_sweep_random_geometry_has_no_analytic_rates() {
        let config = delay_config(
            vec![3],
            2_000,
            5,
            RsPlacement::RandomDisc { radius_m: 5000.0 },
            1000.0,
        );
        let result = run_delay_sweep(&config).unwrap();
        assert!(result.records[0].analytic.is_none());
        assert!(result.records[0].gamma.is_none());
        assert!(result.records[0].empirical.total_error <= 0.5 + 0.02);
    }

    #[test]
    fn sweeps_are_deterministic_across_runs() {
        let config = clone_config(vec![1, 2], 5_000, 11);
        assert_eq!(run_clone_sweep(&config).unwrap(), run_clone_sweep(&config).unwrap());

        let config = delay_config(
            vec![3, 4],
            2_000,
            11,
            RsPlacement::RandomDisc { radius_m: 5000.0 },
            800.0,
        );
        assert_eq!(run_delay_sweep(&config).unwrap(), run_delay_sweep(&config).unwrap());
    }

    #[test]
    fn simulate_round_noiseless_reproduces_means() {
        let scenario = MeanShiftScenario::new(vec![0.0, 0.0], vec![2.0, 2.0], 1.0, 0.5).unwrap();
        let threshold = mean_shift_threshold(&scenario, 1.0).unwrap();
        let kernel = RoundKernel::MeanShift(&scenario);
        let mut rng = trial_rng(0, 0, 0, 0);
        let (y, decision) =
            simulate_round_with(&kernel, scenario.u(), 0.0, &threshold, &mut rng).unwrap();
        assert_eq!(y, scenario.u());
        assert_eq!(decision, Decision::Legitimate);
        let (y, decision) =
            simulate_round_with(&kernel, scenario.v(), 0.0, &threshold, &mut rng).unwrap();
        assert_eq!(y, scenario.v());
        assert_eq!(decision, Decision::Malicious);
    }

    #[test]
    fn simulate_round_replays_identically() {
        let scenario = VarianceScenario::new(1.0, 2.6, vec![0.0; 4]).unwrap();
        let threshold = cloning_threshold(1.0, &scenario).unwrap();
        let kernel = RoundKernel::Variance(&scenario);
        let mut rng1 = trial_rng(123, 4, 1, 99);
        let mut rng2 = trial_rng(123, 4, 1, 99);
        let a = simulate_round(&kernel, Hypothesis::Alternate, &threshold, &mut rng1).unwrap();
        let b = simulate_round(&kernel, Hypothesis::Alternate, &threshold, &mut rng2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simulate_round_rejects_dimension_mismatch() {
        let scenario = MeanShiftScenario::new(vec![0.0], vec![1.0], 1.0, 0.5).unwrap();
        let threshold = mean_shift_threshold(&scenario, 1.0).unwrap();
        let kernel = RoundKernel::MeanShift(&scenario);
        let mut rng = trial_rng(0, 0, 0, 0);
        assert!(simulate_round_with(&kernel, &[0.0, 1.0], 1.0, &threshold, &mut rng).is_err());
    }

    #[test]
    fn simulate_round_h0_rejection_matches_alpha() {
        let scenario = VarianceScenario::new(1.0, 2.6, vec![0.0]).unwrap();
        let threshold = Threshold { lambda: 1.0, gamma: 2.0 };
        let kernel = RoundKernel::Variance(&scenario);
        let trials = 100_000;
        let mut rejected = 0usize;
        for trial in 0..trials {
            let mut rng = trial_rng(77, 1, 0, trial as u64);
            let (_, decision) =
                simulate_round(&kernel, Hypothesis::Null, &threshold, &mut rng).unwrap();
            rejected += usize::from(decision == Decision::Malicious);
        }
        let (rate, se) = binomial_ci(rejected, trials).unwrap();
        close(rate, 0.157_299_207_050_285_13, 3.0 * se);
    }

    #[test]
    fn mismatched_attacker_changes_only_h1_sampling() {
        let base = delay_config(vec![3], 5_000, 21, fixed_triangle(4000.0), 200.0);
        let mut mismatched = base.clone();
        if let ModeConfig::Delay(d) = &mut mismatched.mode {
            d.attacker_d_v = Some(400.0);
        }
        let r_base = run_delay_sweep(&base).unwrap();
        let r_mismatched = run_delay_sweep(&mismatched).unwrap();
        // Same detector, same honest rounds.
        assert_eq!(
            r_base.records[0].empirical.alpha,
            r_mismatched.records[0].empirical.alpha
        );
        assert_eq!(r_base.records[0].gamma, r_mismatched.records[0].gamma);
        // Farther attacker devices are easier to flag.
        assert!(
            r_mismatched.records[0].empirical.beta >= r_base.records[0].empirical.beta
        );
    }
}
