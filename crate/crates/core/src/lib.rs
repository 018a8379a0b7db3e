//! Simulation toolkit for quadrature-based quantum location verification in
//! vehicular networks.
//!
//! Four pieces compose into the full pipeline:
//!
//! * [`gaussian`] — continuous-variable Gaussian states under the hbar = 2
//!   convention: covariance matrices, symplectic spectra, the two-mode
//!   squeezed vacuum, quadrature sampling and the optimal-cloning noise
//!   channel.
//! * [`hypothesis`] — the binary decision framework: a mean-shift
//!   likelihood-ratio test for relayed (time-delayed) responses and a
//!   chi-square variance test for cloned states, with analytic error rates.
//! * [`geometry`] — planar station/vehicle geometry, time-of-flight means,
//!   adversary deployments with their delay vectors, and the classical and
//!   quantum positioning bounds.
//! * [`simulator`] — a seeded, thread-count-independent Monte Carlo engine
//!   sweeping total error against observation count for both attacks.

pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod hypothesis;
pub mod simulator;

mod special;

pub use error::{Error, Result};
pub use gaussian::{
    clone_variance, is_entangled, standard_form_blocks, symplectic_spectrum, tmsv,
    tmsv_fock_coefficients, CloningChannelParams, FockCoefficients, GaussianState, Quadrature,
    StandardFormBlocks, SymplecticSpectrum,
};
pub use geometry::{
    crlb_position_std, place_eve_devices, quantum_scaling_advantage, EveDeployment, EveStrategy,
    NetworkGeometry, PlanarPoint, TimingModel, SPEED_OF_LIGHT,
};
pub use hypothesis::{
    chi_square_cdf, cloning_rates, cloning_threshold, decide_mean_shift, lambda_for_gamma,
    mean_shift_lambda_for_gamma, mean_shift_rates, mean_shift_statistic, mean_shift_threshold,
    total_error, variance_statistic, Decision, ErrorRates, MeanShiftScenario, Threshold,
    VarianceScenario,
};
pub use simulator::{
    binomial_ci, run_clone_sweep, run_delay_sweep, simulate_round, simulate_round_with,
    CloneConfig, DelayConfig, EmpiricalRates, Hypothesis, Mode, ModeConfig, RoundKernel,
    RsPlacement, ScenarioConfig, SweepRecord, SweepResult, SweepSettings, ThresholdPolicy,
};
