//! The binary-decision framework: a Gaussian mean-shift likelihood-ratio
//! test (time-delay attack) and a chi-square variance test (optimal-cloning
//! attack), with analytic error rates for both.
//!
//! All logarithms in the threshold formulas are natural logs: the
//! likelihood-ratio derivation puts ln(lambda) in Gamma, so the cloning
//! threshold follows the same base.

use crate::error::{invalid, Error, Result};
use crate::special::{gamma_p, normal_q};

/// Verifier verdict for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Legitimate,
    Malicious,
}

/// Likelihood-ratio threshold lambda together with its image Gamma under
/// the scenario's threshold map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub lambda: f64,
    pub gamma: f64,
}

/// False-positive rate, detection rate, and total error
/// T_E = p0 alpha + (1 - p0)(1 - beta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub alpha: f64,
    pub beta: f64,
    pub total_error: f64,
}

/// Simple-vs-simple Gaussian mean-shift hypotheses: observations are
/// N(u, sigma I) when honest and N(v, sigma I) when malicious, with a
/// common noise variance sigma and prior probability of legitimacy p0.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftScenario {
    u: Vec<f64>,
    v: Vec<f64>,
    sigma: f64,
    p0: f64,
}

impl MeanShiftScenario {
    pub fn new(u: Vec<f64>, v: Vec<f64>, sigma: f64, p0: f64) -> Result<Self> {
        if u.is_empty() {
            return Err(invalid("mean vectors must have at least one component"));
        }
        if u.len() != v.len() {
            return Err(invalid(format!(
                "mean vectors differ in length: {} vs {}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(invalid("mean vectors must be finite"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid("noise variance sigma must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&p0) {
            return Err(invalid("p0 must lie in [0, 1]"));
        }
        Ok(Self { u, v, sigma, p0 })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Common noise variance (not a standard deviation).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Separation of the hypotheses, d = |v - u| / sqrt(sigma). The
    /// lambda = 1 detector has total error Q(d / 2).
    pub fn mahalanobis_distance(&self) -> f64 {
        (self.shift_norm_squared() / self.sigma).sqrt()
    }

    fn shift_norm_squared(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| (v - u) * (v - u))
            .sum()
    }
}

/// Test statistic T(y) = (v - u)^T y / sigma.
pub fn mean_shift_statistic(scenario: &MeanShiftScenario, y: &[f64]) -> Result<f64> {
    if y.len() != scenario.n() {
        return Err(invalid(format!(
            "observation length {} does not match scenario length {}",
            y.len(),
            scenario.n()
        )));
    }
    Ok(scenario
        .u
        .iter()
        .zip(&scenario.v)
        .zip(y)
        .map(|((u, v), y)| (v - u) * y)
        .sum::<f64>()
        / scenario.sigma)
}

/// Threshold map Gamma = ln(lambda) + (v - u)^T (v + u) / (2 sigma).
pub fn mean_shift_threshold(scenario: &MeanShiftScenario, lambda: f64) -> Result<Threshold> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be positive and finite"));
    }
    Ok(Threshold {
        lambda,
        gamma: lambda.ln() + mean_shift_gamma_at_unit_lambda(scenario),
    })
}

/// Inverse of the threshold map: the lambda whose image is `gamma_target`.
pub fn mean_shift_lambda_for_gamma(scenario: &MeanShiftScenario, gamma_target: f64) -> f64 {
    (gamma_target - mean_shift_gamma_at_unit_lambda(scenario)).exp()
}

fn mean_shift_gamma_at_unit_lambda(scenario: &MeanShiftScenario) -> f64 {
    scenario
        .u
        .iter()
        .zip(&scenario.v)
        .map(|(u, v)| (v - u) * (v + u))
        .sum::<f64>()
        / (2.0 * scenario.sigma)
}

/// Decision rule: malicious iff T(y) >= Gamma (ties decide malicious).
pub fn decide_mean_shift(
    scenario: &MeanShiftScenario,
    threshold: &Threshold,
    y: &[f64],
) -> Result<Decision> {
    let t = mean_shift_statistic(scenario, y)?;
    Ok(if t >= threshold.gamma {
        Decision::Malicious
    } else {
        Decision::Legitimate
    })
}

/// Analytic rates of the mean-shift test. Under either hypothesis T(y) is
/// normal with variance d^2 = (v - u)^T (v - u) / sigma and mean
/// (v - u)^T u / sigma or (v - u)^T v / sigma, so both tails reduce to the
/// standard normal Q function.
pub fn mean_shift_rates(scenario: &MeanShiftScenario, threshold: &Threshold) -> Result<ErrorRates> {
    let d2 = scenario.shift_norm_squared() / scenario.sigma;
    if d2 == 0.0 {
        return Err(Error::DegenerateScenario(
            "u = v: the statistic is constant and the rates are not informative".into(),
        ));
    }
    let d = d2.sqrt();
    let mean0 = scenario
        .u
        .iter()
        .zip(&scenario.v)
        .map(|(u, v)| (v - u) * u)
        .sum::<f64>()
        / scenario.sigma;
    let mean1 = scenario
        .u
        .iter()
        .zip(&scenario.v)
        .map(|(u, v)| (v - u) * v)
        .sum::<f64>()
        / scenario.sigma;
    let alpha = normal_q((threshold.gamma - mean0) / d);
    let beta = normal_q((threshold.gamma - mean1) / d);
    Ok(ErrorRates {
        alpha,
        beta,
        total_error: total_error(alpha, beta, scenario.p0)?,
    })
}

/// Variance-discrimination hypotheses for the cloning attack: N quadrature
/// observations with known means u, variance sigma_0 when honest and
/// sigma_cl >= sigma_0 when clones were substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceScenario {
    sigma_0: f64,
    sigma_cl: f64,
    u: Vec<f64>,
}

impl VarianceScenario {
    pub fn new(sigma_0: f64, sigma_cl: f64, u: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return Err(invalid("the scenario needs at least one observation"));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(invalid("quadrature means must be finite"));
        }
        if !(sigma_0 > 0.0) || !sigma_0.is_finite() {
            return Err(invalid("sigma_0 must be positive and finite"));
        }
        if !sigma_cl.is_finite() || sigma_cl < sigma_0 {
            return Err(invalid(format!(
                "sigma_cl must be at least sigma_0 ({sigma_cl} < {sigma_0})"
            )));
        }
        Ok(Self { sigma_0, sigma_cl, u })
    }

    /// Number of states tested.
    pub fn n_obs(&self) -> usize {
        self.u.len()
    }

    pub fn sigma_0(&self) -> f64 {
        self.sigma_0
    }

    pub fn sigma_cl(&self) -> f64 {
        self.sigma_cl
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }
}

/// Test statistic sum_i (y_i - u_i)^2.
pub fn variance_statistic(scenario: &VarianceScenario, y: &[f64]) -> Result<f64> {
    if y.len() != scenario.n_obs() {
        return Err(invalid(format!(
            "observation length {} does not match scenario length {}",
            y.len(),
            scenario.n_obs()
        )));
    }
    Ok(y.iter()
        .zip(&scenario.u)
        .map(|(y, u)| (y - u) * (y - u))
        .sum())
}

/// Threshold map for the variance test:
/// Gamma = [2 sigma_0 sigma_cl / (sigma_cl - sigma_0)]
///         [ln(lambda) + N ln(sqrt(sigma_cl / sigma_0))].
pub fn cloning_threshold(lambda: f64, scenario: &VarianceScenario) -> Result<Threshold> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be positive and finite"));
    }
    Ok(Threshold {
        lambda,
        gamma: cloning_scale(scenario)?
            * (lambda.ln() + scenario.n_obs() as f64 * 0.5 * (scenario.sigma_cl / scenario.sigma_0).ln()),
    })
}

/// Inverse of [`cloning_threshold`]: the lambda that realizes a target Gamma.
pub fn lambda_for_gamma(gamma_target: f64, scenario: &VarianceScenario) -> Result<f64> {
    let scale = cloning_scale(scenario)?;
    Ok((gamma_target / scale
        - scenario.n_obs() as f64 * 0.5 * (scenario.sigma_cl / scenario.sigma_0).ln())
    .exp())
}

fn cloning_scale(scenario: &VarianceScenario) -> Result<f64> {
    let gap = scenario.sigma_cl - scenario.sigma_0;
    if gap == 0.0 {
        return Err(Error::DegenerateScenario(
            "sigma_cl = sigma_0: the likelihood ratio carries no threshold".into(),
        ));
    }
    Ok(2.0 * scenario.sigma_0 * scenario.sigma_cl / gap)
}

/// Analytic rates of the variance test with equal priors:
/// alpha = 1 - chi2_N(Gamma / sigma_0), beta = 1 - chi2_N(Gamma / sigma_cl),
/// T_E with p0 = 1/2.
pub fn cloning_rates(threshold: &Threshold, scenario: &VarianceScenario) -> Result<ErrorRates> {
    if threshold.gamma < 0.0 {
        return Err(invalid(
            "Gamma must be non-negative: the statistic is a sum of squares",
        ));
    }
    let n = scenario.n_obs() as u32;
    let alpha = 1.0 - chi_square_cdf(threshold.gamma / scenario.sigma_0, n)?;
    let beta = 1.0 - chi_square_cdf(threshold.gamma / scenario.sigma_cl, n)?;
    Ok(ErrorRates {
        alpha,
        beta,
        total_error: total_error(alpha, beta, 0.5)?,
    })
}

/// Chi-square CDF with n degrees of freedom: the regularized lower
/// incomplete gamma P(n/2, x/2).
pub fn chi_square_cdf(x: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(invalid("degrees of freedom must be at least 1"));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(invalid("chi-square argument must be finite and non-negative"));
    }
    Ok(gamma_p(f64::from(n) / 2.0, x / 2.0))
}

/// Total error T_E = p0 alpha + (1 - p0)(1 - beta).
pub fn total_error(alpha: f64, beta: f64, p0: f64) -> Result<f64> {
    for (name, value) in [("alpha", alpha), ("beta", beta), ("p0", p0)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(invalid(format!("{name} must lie in [0, 1], got {value}")));
        }
    }
    Ok(p0 * alpha + (1.0 - p0) * (1.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn simple_scenario() -> MeanShiftScenario {
        MeanShiftScenario::new(vec![0.0], vec![2.0], 1.0, 0.5).unwrap()
    }

    #[test]
    fn statistic_zero_shift() {
        let s = MeanShiftScenario::new(vec![1.0, 2.0], vec![1.0, 2.0], 1.0, 0.5).unwrap();
        for y in [[0.0, 0.0], [5.0, -3.0], [100.0, 7.0]] {
            assert_eq!(mean_shift_statistic(&s, &y).unwrap(), 0.0);
        }
    }

    #[test]
    fn statistic_hand_value_and_linearity() {
        let s = simple_scenario();
        assert_eq!(mean_shift_statistic(&s, &[3.0]).unwrap(), 6.0);
        let t1 = mean_shift_statistic(&s, &[1.7]).unwrap();
        let t3 = mean_shift_statistic(&s, &[3.0 * 1.7]).unwrap();
        close(t3, 3.0 * t1, 1e-12);
    }

    #[test]
    fn statistic_rejects_length_mismatch() {
        let s = simple_scenario();
        assert!(mean_shift_statistic(&s, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn threshold_hand_values() {
        let zero_shift = MeanShiftScenario::new(vec![0.0], vec![0.0], 1.0, 0.5).unwrap();
        assert_eq!(mean_shift_threshold(&zero_shift, 1.0).unwrap().gamma, 0.0);
        close(
            mean_shift_threshold(&zero_shift, std::f64::consts::E).unwrap().gamma,
            1.0,
            1e-15,
        );
        assert_eq!(mean_shift_threshold(&simple_scenario(), 1.0).unwrap().gamma, 2.0);
        assert!(mean_shift_threshold(&simple_scenario(), 0.0).is_err());
        assert!(mean_shift_threshold(&simple_scenario(), -1.0).is_err());
    }

    #[test]
    fn decision_rule_with_tie_to_malicious() {
        let s = simple_scenario();
        let threshold = mean_shift_threshold(&s, 1.0).unwrap(); // Gamma = 2
        // T(y) = 2y: y = 1 hits the threshold exactly.
        assert_eq!(decide_mean_shift(&s, &threshold, &[1.0]).unwrap(), Decision::Malicious);
        assert_eq!(decide_mean_shift(&s, &threshold, &[0.5]).unwrap(), Decision::Legitimate);
        assert_eq!(decide_mean_shift(&s, &threshold, &[3.0]).unwrap(), Decision::Malicious);
    }

    #[test]
    fn rates_at_unit_lambda_equal_q_of_half_d() {
        let s = simple_scenario(); // d = 2
        let threshold = mean_shift_threshold(&s, 1.0).unwrap();
        let rates = mean_shift_rates(&s, &threshold).unwrap();
        let q1 = 0.158_655_253_931_457_05;
        close(rates.alpha, q1, 1e-12);
        close(rates.beta, 1.0 - q1, 1e-12);
        close(rates.total_error, q1, 1e-12);
        close(s.mahalanobis_distance(), 2.0, 1e-15);
    }

    #[test]
    fn rates_with_distant_hypotheses_vanish() {
        let s = MeanShiftScenario::new(vec![0.0], vec![40.0], 1.0, 0.5).unwrap();
        let threshold = mean_shift_threshold(&s, 1.0).unwrap();
        let rates = mean_shift_rates(&s, &threshold).unwrap();
        assert!(rates.total_error < 1e-10);
    }

    #[test]
    fn rates_with_very_low_gamma_accept_everything_as_malicious() {
        let s = simple_scenario();
        let threshold = Threshold { lambda: 1.0, gamma: -1e3 };
        let rates = mean_shift_rates(&s, &threshold).unwrap();
        close(rates.alpha, 1.0, 1e-12);
        close(rates.beta, 1.0, 1e-12);
    }

    #[test]
    fn rates_refuse_degenerate_scenario() {
        let s = MeanShiftScenario::new(vec![1.0], vec![1.0], 1.0, 0.5).unwrap();
        let threshold = Threshold { lambda: 1.0, gamma: 0.0 };
        assert!(matches!(
            mean_shift_rates(&s, &threshold),
            Err(Error::DegenerateScenario(_))
        ));
    }

    #[test]
    fn mean_shift_lambda_round_trip() {
        let s = simple_scenario();
        let lambda = mean_shift_lambda_for_gamma(&s, 5.0);
        let threshold = mean_shift_threshold(&s, lambda).unwrap();
        close(threshold.gamma, 5.0, 1e-12);
    }

    fn fig1b_scenario(n: usize) -> VarianceScenario {
        VarianceScenario::new(1.0, 2.6, vec![0.0; n]).unwrap()
    }

    #[test]
    fn variance_statistic_values() {
        let s = fig1b_scenario(2);
        assert_eq!(variance_statistic(&s, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(variance_statistic(&s, &[1.0, 2.0]).unwrap(), 5.0);
        // Jointly permuting (y, u) pairs leaves the statistic unchanged.
        let s2 = VarianceScenario::new(1.0, 2.6, vec![3.0, -1.0]).unwrap();
        let s2p = VarianceScenario::new(1.0, 2.6, vec![-1.0, 3.0]).unwrap();
        close(
            variance_statistic(&s2, &[4.0, 0.5]).unwrap(),
            variance_statistic(&s2p, &[0.5, 4.0]).unwrap(),
            1e-15,
        );
        assert!(variance_statistic(&s, &[1.0]).is_err());
    }

    #[test]
    fn cloning_threshold_hand_value() {
        // 3.25 * 0.5 * ln(2.6); the bracket's log is natural.
        let threshold = cloning_threshold(1.0, &fig1b_scenario(1)).unwrap();
        close(threshold.gamma, 1.552_706_098_169_584, 1e-12);
        assert!(cloning_threshold(0.0, &fig1b_scenario(1)).is_err());
    }

    #[test]
    fn lambda_for_gamma_hand_value_and_round_trip() {
        let s = fig1b_scenario(1);
        let lambda = lambda_for_gamma(2.0, &s).unwrap();
        close(lambda, 1.147_549_607_403_542_6, 1e-12);
        let threshold = cloning_threshold(lambda, &s).unwrap();
        close(threshold.gamma, 2.0, 1e-12);

        // Round trip the other way.
        let gamma = cloning_threshold(1.0, &s).unwrap().gamma;
        close(lambda_for_gamma(gamma, &s).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn cloning_threshold_degenerate_at_equal_variances() {
        let s = VarianceScenario::new(1.0, 1.0, vec![0.0]).unwrap();
        assert!(matches!(
            cloning_threshold(1.0, &s),
            Err(Error::DegenerateScenario(_))
        ));
        assert!(matches!(
            lambda_for_gamma(2.0, &s),
            Err(Error::DegenerateScenario(_))
        ));
    }

    #[test]
    fn cloning_rates_fig1b_n1() {
        let s = fig1b_scenario(1);
        let lambda = lambda_for_gamma(2.0, &s).unwrap();
        let threshold = cloning_threshold(lambda, &s).unwrap();
        close(threshold.gamma, 2.0, 1e-12);
        let rates = cloning_rates(&threshold, &s).unwrap();
        // Oracle values (50-digit incomplete gamma).
        close(rates.alpha, 0.157_299_207_050_285_13, 1e-10);
        close(rates.beta, 0.380_455_125_250_388_44, 1e-10);
        close(rates.total_error, 0.388_422_040_899_948_34, 1e-10);
    }

    #[test]
    fn cloning_rates_edge_cases() {
        let s = fig1b_scenario(3);
        let at_zero = cloning_rates(&Threshold { lambda: 1.0, gamma: 0.0 }, &s).unwrap();
        assert_eq!((at_zero.alpha, at_zero.beta), (1.0, 1.0));
        assert_eq!(at_zero.total_error, 0.5);
        assert!(cloning_rates(&Threshold { lambda: 1.0, gamma: -0.5 }, &s).is_err());

        // sigma_cl -> sigma_0 removes all detection power: beta -> alpha.
        let tight = VarianceScenario::new(1.0, 1.0 + 1e-12, vec![0.0; 3]).unwrap();
        let rates = cloning_rates(&Threshold { lambda: 1.0, gamma: 4.0 }, &tight).unwrap();
        close(rates.alpha, rates.beta, 1e-9);
    }

    #[test]
    fn chi_square_closed_forms() {
        // n = 2: 1 - exp(-x/2); n = 1: erf(sqrt(x/2)).
        close(chi_square_cdf(2.0, 2).unwrap(), 0.632_120_558_828_557_7, 1e-12);
        close(chi_square_cdf(2.0, 1).unwrap(), 0.842_700_792_949_714_87, 1e-12);
        for n in [1, 2, 7, 100] {
            assert_eq!(chi_square_cdf(0.0, n).unwrap(), 0.0);
        }
        assert!(chi_square_cdf(-1.0, 1).is_err());
        assert!(chi_square_cdf(1.0, 0).is_err());
    }

    #[test]
    fn chi_square_against_frozen_oracle_grid() {
        // mpmath regularized incomplete gamma at 50 digits.
        let cases: &[(f64, u32, f64)] = &[
            (0.5, 1, 0.520_499_877_813_046_54),
            (5.0, 1, 0.974_652_681_322_531_74),
            (30.0, 1, 0.999_999_956_795_369_42),
            (1.0, 2, 0.393_469_340_287_366_58),
            (10.0, 2, 0.993_262_053_000_914_53),
            (3.0, 5, 0.300_014_164_121_372_49),
            (2.0, 3, 0.427_593_295_529_120_17),
            (0.1, 4, 0.001_209_104_274_250_290_6),
            (12.0, 7, 0.899_441_131_491_641_16),
            (45.0, 40, 0.729_455_650_660_145_28),
            (100.0, 100, 0.518_808_315_472_043_28),
            (950.0, 1000, 0.130_875_934_254_311_57),
            (10_500.0, 10_000, 0.999_752_052_632_010_64),
            (1.0e6, 10_000, 1.0),
        ];
        for &(x, n, expected) in cases {
            close(chi_square_cdf(x, n).unwrap(), expected, 1e-10);
        }
    }

    #[test]
    fn chi_square_monotone_in_x() {
        for n in [1u32, 2, 10, 1000] {
            let mut last = 0.0;
            for i in 0..=200 {
                let x = i as f64 * 0.5;
                let value = chi_square_cdf(x, n).unwrap();
                assert!(value >= last, "not monotone at x = {x}, n = {n}");
                last = value;
            }
        }
    }

    #[test]
    fn total_error_values() {
        assert_eq!(total_error(0.0, 1.0, 0.3).unwrap(), 0.0);
        assert_eq!(total_error(0.5, 0.5, 0.5).unwrap(), 0.5);
        close(
            total_error(0.157_299_207_050_285_13, 0.380_455_125_250_388_44, 0.5).unwrap(),
            0.388_422_040_899_948_34,
            1e-12,
        );
        assert!(total_error(-0.1, 0.5, 0.5).is_err());
        assert!(total_error(0.1, 1.5, 0.5).is_err());
        assert!(total_error(0.1, 0.5, 2.0).is_err());
    }

    #[test]
    fn beta_exceeds_alpha_for_cloning_test() {
        for n in [1usize, 5, 20] {
            let s = fig1b_scenario(n);
            for gamma in [0.5, 2.0, 10.0] {
                let rates = cloning_rates(&Threshold { lambda: 1.0, gamma }, &s).unwrap();
                assert!(rates.beta > rates.alpha, "n = {n}, gamma = {gamma}");
            }
        }
    }

    #[test]
    fn rates_monotone_in_gamma() {
        let shift = simple_scenario();
        let clone = fig1b_scenario(4);
        let mut last_shift: Option<ErrorRates> = None;
        let mut last_clone: Option<ErrorRates> = None;
        for i in 0..=40 {
            let gamma = i as f64 * 0.5;
            let rs = mean_shift_rates(&shift, &Threshold { lambda: 1.0, gamma }).unwrap();
            let rc = cloning_rates(&Threshold { lambda: 1.0, gamma }, &clone).unwrap();
            if let Some(prev) = last_shift {
                assert!(rs.alpha <= prev.alpha && rs.beta <= prev.beta);
            }
            if let Some(prev) = last_clone {
                assert!(rc.alpha <= prev.alpha && rc.beta <= prev.beta);
            }
            last_shift = Some(rs);
            last_clone = Some(rc);
        }
    }
}
