//! Continuous-variable Gaussian states: covariance matrices, symplectic
//! spectra, TMSV construction, quadrature sampling, and the optimal-cloning
//! noise channel.
//!
//! Conventions (fixed for the whole crate): hbar = 2, so the vacuum
//! quadrature variance is 1; quadratures are ordered (q1, p1, ..., qn, pn)
//! and every matrix layout follows that ordering.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Tolerance for symmetry checks on covariance matrices.
const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance for closed-form spectral identities and the PPT test.
const SPECTRAL_TOL: f64 = 1e-9;

/// Which quadrature of a mode to address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q,
    P,
}

/// An n-mode Gaussian state: first moments plus a symmetric covariance
/// matrix, both in the (q1, p1, ..., qn, pn) ordering and dimensionless
/// quadrature units (vacuum variance = 1).
///
/// Construction validates symmetry and the uncertainty principle (every
/// symplectic eigenvalue of the non-transposed covariance at least
/// 1 - 1e-9). Only one- and two-mode states can be built; nothing in the
/// toolkit produces more modes and general symplectic reduction is out of
/// scope.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    first_moments: Vec<f64>,
    covariance: Vec<f64>, // row-major, 2n x 2n
}

impl GaussianState {
    pub fn new(n_modes: usize, first_moments: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("a Gaussian state needs at least one mode"));
        }
        let dim = 2 * n_modes;
        if first_moments.len() != dim {
            return Err(invalid(format!(
                "first moments must have length {dim}, got {}",
                first_moments.len()
            )));
        }
        if covariance.len() != dim * dim {
            return Err(invalid(format!(
                "covariance must be {dim}x{dim}, got {} entries",
                covariance.len()
            )));
        }
        if first_moments.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("state moments must be finite"));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = covariance[i * dim + j];
                let b = covariance[j * dim + i];
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(invalid(format!(
                        "covariance is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        let state = Self {
            n_modes,
            first_moments,
            covariance,
        };
        state.check_physical()?;
        Ok(state)
    }

    /// The n-mode vacuum: zero means, identity covariance.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        let dim = 2 * n_modes;
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            cov[i * dim + i] = 1.0;
        }
        Self::new(n_modes, vec![0.0; dim], cov)
    }

    /// A single-mode coherent state displaced to (q, p).
    pub fn coherent(q: f64, p: f64) -> Result<Self> {
        Self::new(1, vec![q, p], vec![1.0, 0.0, 0.0, 1.0])
    }

    /// A single-mode squeezed vacuum with quadrature variances e^{-2r}, e^{+2r}.
    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(invalid("squeezing parameter must be finite"));
        }
        let down = (-2.0 * r).exp();
        let up = (2.0 * r).exp();
        Self::new(1, vec![0.0, 0.0], vec![down, 0.0, 0.0, up])
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn first_moments(&self) -> &[f64] {
        &self.first_moments
    }

    /// Row-major 2n x 2n covariance matrix.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * 2 * self.n_modes + j]
    }

    fn quad_index(&self, mode: usize, which: Quadrature) -> Result<usize> {
        if mode >= self.n_modes {
            return Err(invalid(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes
            )));
        }
        Ok(2 * mode + matches!(which, Quadrature::P) as usize)
    }

    /// Mean of one quadrature.
    pub fn mean(&self, mode: usize, which: Quadrature) -> Result<f64> {
        Ok(self.first_moments[self.quad_index(mode, which)?])
    }

    /// Variance of one quadrature (a covariance diagonal entry).
    pub fn variance(&self, mode: usize, which: Quadrature) -> Result<f64> {
        let i = self.quad_index(mode, which)?;
        Ok(self.cov(i, i))
    }

    /// Draw one homodyne outcome for the chosen quadrature: a normal variate
    /// with the quadrature's mean and variance. Consumes the supplied random
    /// source deterministically.
    pub fn sample_quadrature<R: Rng + ?Sized>(
        &self,
        mode: usize,
        which: Quadrature,
        rng: &mut R,
    ) -> Result<f64> {
        let i = self.quad_index(mode, which)?;
        let mean = self.first_moments[i];
        let var = self.cov(i, i);
        if var <= 0.0 {
            return Ok(mean);
        }
        let z: f64 = rng.sample(StandardNormal);
        Ok(mean + var.sqrt() * z)
    }

    /// Standard-form blocks of a two-mode state; see [`standard_form_blocks`].
    pub fn standard_form_blocks(&self) -> Result<StandardFormBlocks> {
        if self.n_modes != 2 {
            return Err(invalid(format!(
                "standard form is defined for two-mode states, got {} modes",
                self.n_modes
            )));
        }
        standard_form_blocks(&self.covariance)
    }

    /// PPT entanglement test for two-mode states: entangled iff the smaller
    /// symplectic eigenvalue of the partially transposed covariance drops
    /// below 1.
    pub fn is_entangled(&self) -> Result<bool> {
        if self.n_modes != 2 {
            return Err(invalid(format!(
                "entanglement test is defined for two-mode states, got {} modes",
                self.n_modes
            )));
        }
        let blocks = self.standard_form_blocks()?;
        let spectrum = symplectic_spectrum(&blocks, true)?;
        Ok(spectrum.nu_minus < 1.0 - SPECTRAL_TOL)
    }

    /// Uncertainty-principle check: every symplectic eigenvalue of the
    /// non-transposed covariance must be at least 1 - 1e-9. The bound
    /// nu_minus^2 >= c is tested in the rearranged form det M >= c (Delta - c)
    /// so pure states (a numerically double root, where the quadratic
    /// formula loses half the significand) are judged at full precision.
    /// Closed forms exist for one and two modes; more modes are not
    /// constructed by this toolkit.
    fn check_physical(&self) -> Result<()> {
        let c = (1.0 - SPECTRAL_TOL) * (1.0 - SPECTRAL_TOL);
        match self.n_modes {
            1 => {
                let det = self.cov(0, 0) * self.cov(1, 1) - self.cov(0, 1) * self.cov(1, 0);
                if self.cov(0, 0) <= 0.0 || det < c {
                    return Err(invalid(format!(
                        "covariance violates the uncertainty principle (nu = {})",
                        det.max(0.0).sqrt()
                    )));
                }
                Ok(())
            }
            2 => {
                self.check_positive_semidefinite_4x4()?;
                let (det_a, det_b, det_c) = two_mode_block_determinants(&self.covariance);
                let delta = det_a + det_b + 2.0 * det_c;
                let det_m = det4(&self.covariance);
                // The det M bound is tangent to the physical set at pure
                // states, where the 1e-9 slack in c cancels out of
                // c (Delta - c); an explicit allowance for the rounding
                // noise of the two determinant computations is required.
                let scale = self.covariance.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
                let noise = 256.0 * f64::EPSILON * scale.powi(4);
                if delta < 2.0 * c || det_m < c * (delta - c) - noise {
                    return Err(invalid(format!(
                        "covariance violates the uncertainty principle \
                         (Delta = {delta}, det M = {det_m})"
                    )));
                }
                Ok(())
            }
            n => Err(Error::UnsupportedForm(format!(
                "{n}-mode states are not supported (only 1 and 2 modes are constructed)"
            ))),
        }
    }

    /// Sylvester check on the leading principal minors, with slack for
    /// rounding. Positive semidefiniteness makes the symplectic spectrum
    /// real, which the invariant-based test above assumes.
    fn check_positive_semidefinite_4x4(&self) -> Result<()> {
        let m = &self.covariance;
        let minor1 = m[0];
        let minor2 = m[0] * m[5] - m[1] * m[4];
        let minor3 = m[0] * (m[5] * m[10] - m[6] * m[9]) - m[1] * (m[4] * m[10] - m[6] * m[8])
            + m[2] * (m[4] * m[9] - m[5] * m[8]);
        let minor4 = det4(m);
        let scale = m.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let tol = -1e-9 * scale * scale * scale * scale;
        if minor1 <= 0.0 || minor2 < tol || minor3 < tol || minor4 < tol {
            return Err(invalid("covariance is not positive semidefinite"));
        }
        Ok(())
    }
}

/// Standard-form scalars of a two-mode covariance: A = a~ I, B = b~ I,
/// C = diag(c+, c-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardFormBlocks {
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

/// Symplectic eigenvalue pair of a two-mode covariance, with a flag
/// recording whether the partial transpose was applied first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub partially_transposed: bool,
}

/// Parameters of an optimal Gaussian N_c -> M_c cloner acting on coherent
/// states. `sigma_0` is the vacuum quadrature variance (1 under hbar = 2,
/// kept explicit so unit-convention tests stay possible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloningChannelParams {
    n_input: u32,
    m_output: u32,
    sigma_0: f64,
}

impl CloningChannelParams {
    pub fn new(n_input: u32, m_output: u32, sigma_0: f64) -> Result<Self> {
        if n_input == 0 {
            return Err(invalid("N_c must be at least 1"));
        }
        if m_output < 2 {
            return Err(invalid("M_c must be at least 2"));
        }
        if m_output < n_input {
            return Err(invalid(format!(
                "M_c must be at least N_c, got N_c = {n_input}, M_c = {m_output}"
            )));
        }
        if !(sigma_0 > 0.0) || !sigma_0.is_finite() {
            return Err(invalid("sigma_0 must be positive and finite"));
        }
        Ok(Self {
            n_input,
            m_output,
            sigma_0,
        })
    }

    pub fn n_input(&self) -> u32 {
        self.n_input
    }

    pub fn m_output(&self) -> u32 {
        self.m_output
    }

    pub fn sigma_0(&self) -> f64 {
        self.sigma_0
    }

    /// Quadrature variance of each optimal clone: sigma_0 plus the minimum
    /// added noise (2/N_c - 2/M_c) sigma_0.
    pub fn clone_variance(&self) -> f64 {
        if self.n_input == self.m_output {
            // No extra clones, no added noise; also keeps sigma_cl == sigma_0
            // bit-exact, which float rearrangement would not.
            return self.sigma_0;
        }
        self.sigma_0 + 2.0 * self.sigma_0 / f64::from(self.n_input)
            - 2.0 * self.sigma_0 / f64::from(self.m_output)
    }
}

/// Added quadrature variance after optimal cloning; see
/// [`CloningChannelParams::clone_variance`].
pub fn clone_variance(params: &CloningChannelParams) -> f64 {
    params.clone_variance()
}

/// Fock expansion coefficients of a TMSV state: c_n = sqrt(1 - t^2)(-t)^n
/// with t = tanh(r).
#[derive(Debug, Clone, PartialEq)]
pub struct FockCoefficients {
    pub r: f64,
    pub coefficients: Vec<f64>,
}

impl FockCoefficients {
    /// Sum of squared coefficients; converges to 1 from below as the cutoff
    /// grows.
    pub fn squared_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

/// Two-mode squeezed vacuum with squeezing parameter r: zero means and
/// covariance [[v I, s Z], [s Z, v I]] with v = cosh(2r), s = sqrt(v^2 - 1),
/// Z = diag(1, -1).
pub fn tmsv(r: f64) -> Result<GaussianState> {
    if !r.is_finite() {
        return Err(invalid("squeezing parameter must be finite"));
    }
    let v = (2.0 * r).cosh();
    let s = (2.0 * r).sinh(); // = sqrt(v^2 - 1) for r >= 0
    #[rustfmt::skip]
    let cov = vec![
        v,   0.0, s,   0.0,
        0.0, v,   0.0, -s,
        s,   0.0, v,   0.0,
        0.0, -s,  0.0, v,
    ];
    GaussianState::new(2, vec![0.0; 4], cov)
}

/// Fock coefficients of the TMSV state up to n_max (inclusive).
pub fn tmsv_fock_coefficients(r: f64, n_max: usize) -> Result<FockCoefficients> {
    if !r.is_finite() || r < 0.0 {
        return Err(invalid("squeezing parameter must be finite and non-negative"));
    }
    let lambda = r.tanh();
    let mut coefficients = Vec::with_capacity(n_max + 1);
    let mut c = (1.0 - lambda * lambda).sqrt();
    for _ in 0..=n_max {
        coefficients.push(c);
        c *= -lambda;
    }
    Ok(FockCoefficients { r, coefficients })
}

/// Extract the standard-form scalars from a 4x4 two-mode covariance whose
/// off-diagonal block C is already diagonal: a~ = sqrt(det A),
/// b~ = sqrt(det B), (c+, c-) = diag C. Matrices with a non-diagonal C are
/// rejected; every state this toolkit constructs is already in that form.
pub fn standard_form_blocks(covariance: &[f64]) -> Result<StandardFormBlocks> {
    if covariance.len() != 16 {
        return Err(invalid(format!(
            "expected a 4x4 covariance (16 entries), got {}",
            covariance.len()
        )));
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let a = covariance[i * 4 + j];
            let b = covariance[j * 4 + i];
            let scale = a.abs().max(b.abs()).max(1.0);
            if (a - b).abs() > SYMMETRY_TOL * scale {
                return Err(invalid(format!(
                    "covariance is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    // C = rows 0..2, cols 2..4 in the (q1, p1, q2, p2) ordering.
    let c_offdiag = covariance[3].abs().max(covariance[6].abs());
    if c_offdiag > SPECTRAL_TOL {
        return Err(Error::UnsupportedForm(format!(
            "off-diagonal block C is not diagonal (|entry| = {c_offdiag})"
        )));
    }
    let (det_a, det_b, _) = two_mode_block_determinants(covariance);
    if det_a < 0.0 || det_b < 0.0 {
        return Err(invalid(
            "diagonal blocks have negative determinant; not a physical covariance",
        ));
    }
    Ok(StandardFormBlocks {
        a_tilde: det_a.sqrt(),
        b_tilde: det_b.sqrt(),
        c_plus: covariance[2],
        c_minus: covariance[7],
    })
}

/// Symplectic spectrum from standard-form blocks via
/// nu_{+-}^2 = (Delta +- sqrt(Delta^2 - 4 det M)) / 2, where
/// Delta = det A + det B - 2 det C for the partially transposed matrix and
/// det A + det B + 2 det C without the transpose.
pub fn symplectic_spectrum(
    blocks: &StandardFormBlocks,
    partial_transpose: bool,
) -> Result<SymplecticSpectrum> {
    let a = blocks.a_tilde;
    let b = blocks.b_tilde;
    let cp = blocks.c_plus;
    // Partial transposition of the second mode flips the sign of c_minus;
    // it leaves det M unchanged and sends det C to -det C.
    let cm = if partial_transpose {
        -blocks.c_minus
    } else {
        blocks.c_minus
    };
    let delta = a * a + b * b + 2.0 * cp * cm;
    // Delta^2 - 4 det M_s expanded in factored form. The textbook
    // difference cancels catastrophically for pure states (both terms ~4,
    // difference ~0); this form is exact there, e.g. identically zero for
    // the TMSV family without the transpose.
    let diag = (a * a - b * b) * (a * a - b * b);
    let mut disc = diag + 4.0 * (cp * a + cm * b) * (cm * a + cp * b);
    let tol = SPECTRAL_TOL * delta.mul_add(delta, 1.0);
    if disc < -tol {
        return Err(Error::Domain(format!(
            "Delta^2 < 4 det M (Delta = {delta}, disc = {disc}); not a physical covariance"
        )));
    }
    disc = disc.max(0.0);
    // det M_s as a product of the decoupled (q1,q2) and (p1,p2) pair
    // determinants; invariant under the transpose since c_minus enters
    // squared.
    let det_m = (a * b - cp * cp) * (a * b - cm * cm);
    // Large root from the quadratic formula (no cancellation there), small
    // root from the root product so deep squeezing keeps full precision.
    let hi = (delta + disc.sqrt()) / 2.0;
    if hi <= 0.0 {
        return Err(Error::Domain(format!(
            "non-positive squared symplectic eigenvalue (Delta = {delta})"
        )));
    }
    let mut lo = det_m / hi;
    if lo < -tol {
        return Err(Error::Domain(format!(
            "negative squared symplectic eigenvalue (Delta = {delta}, det M = {det_m})"
        )));
    }
    lo = lo.max(0.0);
    Ok(SymplecticSpectrum {
        nu_plus: hi.sqrt(),
        nu_minus: lo.sqrt(),
        partially_transposed: partial_transpose,
    })
}

/// PPT entanglement test; see [`GaussianState::is_entangled`].
pub fn is_entangled(state: &GaussianState) -> Result<bool> {
    state.is_entangled()
}

/// Determinants of the 2x2 blocks A, B, C of a two-mode covariance.
fn two_mode_block_determinants(m: &[f64]) -> (f64, f64, f64) {
    let det2 = |a: f64, b: f64, c: f64, d: f64| a * d - b * c;
    let det_a = det2(m[0], m[1], m[4], m[5]);
    let det_b = det2(m[10], m[11], m[14], m[15]);
    let det_c = det2(m[2], m[3], m[6], m[7]);
    (det_a, det_b, det_c)
}

/// Determinant of a row-major 4x4 matrix by cofactor expansion.
fn det4(m: &[f64]) -> f64 {
    let det3 = |a: usize, b: usize, c: usize, d: usize, e: usize, f: usize, g: usize, h: usize, i: usize| {
        m[a] * (m[e] * m[i] - m[f] * m[h]) - m[b] * (m[d] * m[i] - m[f] * m[g])
            + m[c] * (m[d] * m[h] - m[e] * m[g])
    };
    m[0] * det3(5, 6, 7, 9, 10, 11, 13, 14, 15) - m[1] * det3(4, 6, 7, 8, 10, 11, 12, 14, 15)
        + m[2] * det3(4, 5, 7, 8, 9, 11, 12, 13, 15)
        - m[3] * det3(4, 5, 6, 8, 9, 10, 12, 13, 14)
}
