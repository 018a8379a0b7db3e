//! Planar vehicular-network geometry: station and vehicle positions,
//! time-of-flight means, adversary deployments with their delay vectors,
//! and the classical/quantum positioning bounds.
//!
//! Timing convention: the stations coordinate their transmissions so every
//! verification-information component reaches the claimed location at the
//! same instant, and that instant is time zero. All response times are
//! measured from it, so an honest response to station i arrives at
//! U_i = |RS_i - claimed| / c.

use crate::error::{invalid, Error, Result};

/// Speed of light in meters per second.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Reference stations, the location under test, and the signal speed.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    reference_stations: Vec<PlanarPoint>,
    claimed_location: PlanarPoint,
    c: f64,
}

impl NetworkGeometry {
    /// Geometry with the physical speed of light.
    pub fn new(reference_stations: Vec<PlanarPoint>, claimed_location: PlanarPoint) -> Result<Self> {
        Self::with_signal_speed(reference_stations, claimed_location, SPEED_OF_LIGHT)
    }

    /// Geometry with an explicit signal speed (unit-free tests set c = 1).
    pub fn with_signal_speed(
        reference_stations: Vec<PlanarPoint>,
        claimed_location: PlanarPoint,
        c: f64,
    ) -> Result<Self> {
        if reference_stations.len() < 3 {
            return Err(invalid(format!(
                "at least three reference stations are required, got {}",
                reference_stations.len()
            )));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid("signal speed must be positive and finite"));
        }
        let finite = |p: &PlanarPoint| p.x.is_finite() && p.y.is_finite();
        if !finite(&claimed_location) || !reference_stations.iter().all(finite) {
            return Err(invalid("positions must be finite"));
        }
        if reference_stations
            .iter()
            .any(|rs| rs.distance_to(&claimed_location) == 0.0)
        {
            return Err(invalid(
                "a reference station coincides with the claimed location; bearings are undefined",
            ));
        }
        Ok(Self {
            reference_stations,
            claimed_location,
            c,
        })
    }

    pub fn reference_stations(&self) -> &[PlanarPoint] {
        &self.reference_stations
    }

    pub fn claimed_location(&self) -> PlanarPoint {
        self.claimed_location
    }

    pub fn signal_speed(&self) -> f64 {
        self.c
    }

    pub fn n_stations(&self) -> usize {
        self.reference_stations.len()
    }

    /// Honest response flight times U_i = |RS_i - claimed| / c, in seconds.
    pub fn honest_means(&self) -> Vec<f64> {
        self.reference_stations
            .iter()
            .map(|rs| rs.distance_to(&self.claimed_location) / self.c)
            .collect()
    }

    /// Response arrival times of the relayed attack, in seconds:
    /// V_k = t_h + |dev_h - dev_k| / c + |dev_k - RS_k| / c, where the
    /// holder h finishes collecting the verification information at
    /// t_h = max(0, max_i (|RS_i - dev_h| - |RS_i - claimed|) / c) and all
    /// processing is instantaneous.
    pub fn delay_vector(&self, deployment: &EveDeployment) -> Result<Vec<f64>> {
        if deployment.devices.len() != self.n_stations() {
            return Err(invalid(format!(
                "deployment has {} devices for {} stations",
                deployment.devices.len(),
                self.n_stations()
            )));
        }
        let holder = &deployment.devices[deployment.holder_index];
        let t_h = self
            .reference_stations
            .iter()
            .map(|rs| (rs.distance_to(holder) - rs.distance_to(&self.claimed_location)) / self.c)
            .fold(0.0_f64, f64::max);
        Ok(self
            .reference_stations
            .iter()
            .zip(&deployment.devices)
            .map(|(rs, dev)| t_h + holder.distance_to(dev) / self.c + dev.distance_to(rs) / self.c)
            .collect())
    }
}

/// One adversary device per reference station, with the index of the device
/// holding the quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct EveDeployment {
    devices: Vec<PlanarPoint>,
    holder_index: usize,
}

impl EveDeployment {
    pub fn new(devices: Vec<PlanarPoint>, holder_index: usize) -> Result<Self> {
        if devices.is_empty() {
            return Err(invalid("a deployment needs at least one device"));
        }
        if holder_index >= devices.len() {
            return Err(invalid(format!(
                "holder index {holder_index} out of range for {} devices",
                devices.len()
            )));
        }
        Ok(Self {
            devices,
            holder_index,
        })
    }

    pub fn devices(&self) -> &[PlanarPoint] {
        &self.devices
    }

    pub fn holder_index(&self) -> usize {
        self.holder_index
    }
}

/// Placement strategy for the adversary's devices, all at distance d_v from
/// the claimed location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveStrategy {
    /// Device k sits on the ray from the claimed location toward station k;
    /// the holder is chosen to minimize |V - U|.
    TowardRs,
    /// Starts from `TowardRs` and coordinate-descends each device's angle on
    /// the radius-d_v circle to further shrink |V - U|.
    MinimizeMahalanobis { angles: usize, sweeps: usize },
}

impl EveStrategy {
    /// The refinement strategy with its default search grid.
    pub fn minimize() -> Self {
        EveStrategy::MinimizeMahalanobis {
            angles: 64,
            sweeps: 3,
        }
    }
}

/// Relative slack under which two candidate placements count as tied; ties
/// resolve to the lowest index so the search is reproducible.
const TIE_TOL: f64 = 1e-12;

/// Place the adversary's devices at verification distance d_v using the
/// given strategy.
pub fn place_eve_devices(
    geometry: &NetworkGeometry,
    d_v: f64,
    strategy: EveStrategy,
) -> Result<EveDeployment> {
    if !(d_v > 0.0) || !d_v.is_finite() {
        return Err(invalid("verification distance d_v must be positive and finite"));
    }
    let claimed = geometry.claimed_location();
    let base_angles: Vec<f64> = geometry
        .reference_stations()
        .iter()
        .map(|rs| (rs.y - claimed.y).atan2(rs.x - claimed.x))
        .collect();
    let honest = geometry.honest_means();
    let device_at = |angle: f64| {
        PlanarPoint::new(claimed.x + d_v * angle.cos(), claimed.y + d_v * angle.sin())
    };
    let devices_at =
        |angles: &[f64]| angles.iter().map(|&a| device_at(a)).collect::<Vec<_>>();

    // Shift norm achieved by a device set under its best holder.
    let evaluate = |devices: &[PlanarPoint]| -> Result<(usize, f64)> {
        let mut best = (0usize, f64::INFINITY);
        for holder in 0..devices.len() {
            let deployment = EveDeployment::new(devices.to_vec(), holder)?;
            let v = geometry.delay_vector(&deployment)?;
            let norm = shift_norm(&honest, &v);
            if norm < best.1 * (1.0 - TIE_TOL) {
                best = (holder, norm);
            }
        }
        Ok(best)
    };

    let mut angles = base_angles.clone();
    let mut devices = devices_at(&angles);
    let (mut holder, mut norm) = evaluate(&devices)?;

    if let EveStrategy::MinimizeMahalanobis { angles: grid, sweeps } = strategy {
        if grid == 0 {
            return Err(invalid("angle grid must have at least one point"));
        }
        let step = std::f64::consts::TAU / grid as f64;
        for _ in 0..sweeps {
            for k in 0..angles.len() {
                let mut best_angle = angles[k];
                for j in 0..grid {
                    let candidate = base_angles[k] + j as f64 * step;
                    angles[k] = candidate;
                    devices[k] = device_at(candidate);
                    let (h, n) = evaluate(&devices)?;
                    if n < norm * (1.0 - TIE_TOL) {
                        holder = h;
                        norm = n;
                        best_angle = candidate;
                    }
                }
                angles[k] = best_angle;
                devices[k] = device_at(best_angle);
            }
        }
    }

    EveDeployment::new(devices, holder)
}

fn shift_norm(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(u, v)| (v - u) * (v - u))
        .sum::<f64>()
        .sqrt()
}

/// Gaussian timing-noise model; stores a standard deviation in seconds and
/// squares it wherever a variance is required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    sigma_t_std: f64,
}

impl TimingModel {
    pub fn new(sigma_t_std: f64) -> Result<Self> {
        if !(sigma_t_std > 0.0) || !sigma_t_std.is_finite() {
            return Err(invalid("timing noise standard deviation must be positive and finite"));
        }
        Ok(Self { sigma_t_std })
    }

    pub fn sigma_t_std(&self) -> f64 {
        self.sigma_t_std
    }

    /// Timing variance in seconds^2.
    pub fn variance(&self) -> f64 {
        self.sigma_t_std * self.sigma_t_std
    }
}

/// Pair sums below this are treated as collinear geometry.
const DEGENERATE_PAIR_SUM: f64 = 1e-12;

/// Classical positioning bound: the standard deviation of any unbiased
/// time-of-flight position estimate satisfies
/// std >= c sqrt(sigma_t N) (sum_{i<j} sin^2(phi_i - phi_j))^{-1/2},
/// with sigma_t the timing variance, N the observation count and phi_i the
/// full-quadrant bearing of station i seen from the claimed location.
pub fn crlb_position_std(
    geometry: &NetworkGeometry,
    timing: &TimingModel,
    n_obs: usize,
) -> Result<f64> {
    if n_obs == 0 {
        return Err(invalid("n_obs must be at least 1"));
    }
    let claimed = geometry.claimed_location();
    let bearings: Vec<f64> = geometry
        .reference_stations()
        .iter()
        .map(|rs| (rs.y - claimed.y).atan2(rs.x - claimed.x))
        .collect();
    let mut pair_sum = 0.0;
    for i in 0..bearings.len() {
        for j in (i + 1)..bearings.len() {
            let s = (bearings[i] - bearings[j]).sin();
            pair_sum += s * s;
        }
    }
    if pair_sum < DEGENERATE_PAIR_SUM {
        return Err(Error::DegenerateGeometry(
            "all stations are collinear with the device; the bound diverges".into(),
        ));
    }
    Ok(geometry.signal_speed() * (timing.variance() * n_obs as f64).sqrt() / pair_sum.sqrt())
}

/// Error-shrink factor gained when the 1/sqrt(N) and 1/sqrt(N_p) scalings
/// of the classical bound become 1/N and 1/N_p: sqrt(n_obs) * sqrt(n_photons).
pub fn quantum_scaling_advantage(n_obs: usize, n_photons: f64) -> Result<f64> {
    if n_obs < 1 {
        return Err(invalid("n_obs must be at least 1"));
    }
    if !n_photons.is_finite() || n_photons < 1.0 {
        return Err(invalid("n_photons must be finite and at least 1"));
    }
    Ok((n_obs as f64).sqrt() * n_photons.sqrt())
}
