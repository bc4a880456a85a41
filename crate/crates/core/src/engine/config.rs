use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the inverse-spring force of a negative sample is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepulsionMode {
    /// `-omega / (y - x)` taken coordinate by coordinate.
    #[default]
    Coordinate,
    /// `-omega * (y - x) / |y - x|^2`: magnitude `omega / d` along the line
    /// joining the two points.
    Norm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergySchedule {
    /// `E <- max(0, E - delta_e)`.
    #[default]
    Clamped,
    /// `E <- E - delta_e` with no floor; energy turns negative after
    /// `1 / delta_e` sweeps and the forces flip sign.
    Strict,
}

/// Smallest magnitude a coordinate difference may take in the repulsive force.
pub const DIVISION_GUARD: f64 = 1e-6;

/// Energies below this are snapped to zero so that repeated subtraction of
/// `delta_e` cannot leave a rounding residue behind.
pub(crate) const ENERGY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Embedding dimension `n`.
    pub dim: usize,
    /// Size bound for both `P(x)` and `N(x)`.
    pub k: usize,
    /// Maximum number of sweeps `T`.
    pub max_iters: usize,
    /// Stop once the summed displacement of a sweep drops below this.
    pub epsilon: f64,
    /// Energy released after every sweep.
    pub delta_e: f64,
    /// Repulsive constant.
    pub omega: f64,
    pub seed: u64,
    /// Initial coordinates are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub repulsion: RepulsionMode,
    pub energy_schedule: EnergySchedule,
    /// Evaluate the objective after every sweep (costs about one extra sweep).
    pub track_objective: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 50,
            k: 45,
            max_iters: 100,
            epsilon: 1e-3,
            delta_e: 0.0414,
            omega: 1.45557,
            seed: 0,
            init_scale: 1.0,
            repulsion: RepulsionMode::Coordinate,
            energy_schedule: EnergySchedule::Clamped,
            track_objective: true,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.dim == 0 {
            return fail("dimension must be at least 1".into());
        }
        if self.k == 0 {
            return fail("K must be at least 1".into());
        }
        if self.max_iters == 0 {
            return fail("max iterations must be at least 1".into());
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta_e >= 0.0 && self.delta_e.is_finite()) {
            return fail(format!("delta_e must be non-negative, got {}", self.delta_e));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return fail(format!("omega must be positive, got {}", self.omega));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return fail(format!("init_scale must be non-negative, got {}", self.init_scale));
        }
        Ok(())
    }

    /// Bytes needed for the two position matrices.
    pub fn matrix_bytes(&self, terms: usize) -> u64 {
        2 * terms as u64 * self.dim as u64 * std::mem::size_of::<f64>() as u64
    }

    pub fn check_memory_budget(&self, terms: usize, budget: u64) -> Result<()> {
        let required = self.matrix_bytes(terms);
        if required > budget {
            return Err(Error::MemoryBudget {
                required,
                budget,
                terms,
                dim: self.dim,
            });
        }
        Ok(())
    }
}
