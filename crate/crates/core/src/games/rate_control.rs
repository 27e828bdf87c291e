//! Rate control over a capacitated multi-hop network: each user routes a
//! flow over fixed links and trades congestion cost against log utility.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::games::GameModel;

/// Fixed per-user flow interval.
const RATE_INTERVAL: (f64, f64) = (0.0, 10.0);

/// Gradient and cost evaluations require every link to keep at least this
/// fraction of its capacity as slack; the cost has a pole at zero slack.
pub const CAPACITY_SLACK_FRACTION: f64 = 1e-9;

/// A congestion game on shared links.
///
/// `incidence` is links x users, entry `(j, i) = 1` iff user i's route uses
/// link j. User i's cost at profile `y` is
/// `sum over its links of kappa / (C_j - load_j(y))  -  chi_i * ln(y_i + 1)`,
/// defined only while every link load stays below capacity.
#[derive(Debug, Clone)]
pub struct RateControlGame {
    incidence: DMatrix<f64>,
    capacities: DVector<f64>,
    kappa: f64,
    chi: DVector<f64>,
}

impl RateControlGame {
    pub fn new(
        incidence: DMatrix<f64>,
        capacities: DVector<f64>,
        kappa: f64,
        chi: DVector<f64>,
    ) -> Result<Self> {
        let (m, n) = incidence.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidGame("empty incidence matrix".to_string()));
        }
        if capacities.len() != m {
            return Err(Error::InvalidGame(format!(
                "capacities has length {}, expected {}",
                capacities.len(),
                m
            )));
        }
        if chi.len() != n {
            return Err(Error::InvalidGame(format!(
                "chi has length {}, expected {}",
                chi.len(),
                n
            )));
        }
        if incidence.iter().any(|&a| a != 0.0 && a != 1.0) {
            return Err(Error::InvalidGame(
                "incidence entries must be 0 or 1".to_string(),
            ));
        }
        if capacities.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::InvalidGame("capacities must be positive".to_string()));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidGame("kappa must be positive".to_string()));
        }
        if chi.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::InvalidGame("chi must be positive".to_string()));
        }
        Ok(RateControlGame {
            incidence,
            capacities,
            kappa,
            chi,
        })
    }

    pub fn n_links(&self) -> usize {
        self.incidence.nrows()
    }

    pub fn incidence(&self) -> &DMatrix<f64> {
        &self.incidence
    }

    pub fn capacities(&self) -> &DVector<f64> {
        &self.capacities
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn chi(&self) -> &DVector<f64> {
        &self.chi
    }

    /// Per-link remaining capacity at profile `y`; errors on the first link
    /// whose slack falls below the guard fraction (1-based link index).
    fn guarded_slacks(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let loads = &self.incidence * y;
        let mut slacks = DVector::zeros(self.n_links());
        for j in 0..self.n_links() {
            let slack = self.capacities[j] - loads[j];
            if slack < CAPACITY_SLACK_FRACTION * self.capacities[j] {
                return Err(Error::CapacityExhausted {
                    link: j + 1,
                    slack,
                });
            }
            slacks[j] = slack;
        }
        Ok(slacks)
    }
}

impl GameModel for RateControlGame {
    fn n_players(&self) -> usize {
        self.incidence.ncols()
    }

    fn action_interval(&self, _i: usize) -> (f64, f64) {
        RATE_INTERVAL
    }

    fn cost(&self, i: usize, y: &DVector<f64>) -> Result<f64> {
        let slacks = self.guarded_slacks(y)?;
        let mut congestion = 0.0;
        for j in 0..self.n_links() {
            if self.incidence[(j, i)] != 0.0 {
                congestion += self.kappa / slacks[j];
            }
        }
        Ok(congestion - self.chi[i] * (y[i] + 1.0).ln())
    }

    fn partial_gradient(&self, i: usize, y: &DVector<f64>) -> Result<f64> {
        let slacks = self.guarded_slacks(y)?;
        let mut pressure = 0.0;
        for j in 0..self.n_links() {
            if self.incidence[(j, i)] != 0.0 {
                pressure += self.kappa / (slacks[j] * slacks[j]);
            }
        }
        Ok(pressure - self.chi[i] / (y[i] + 1.0))
    }
}
