//! Networked Cournot competition: firms sell into shared markets with
//! linear inverse demand and quadratic production costs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::games::{GameConstants, GameModel};
use crate::linalg::{max_singular_value, min_symmetric_part_eigenvalue};

/// A Cournot game on a bipartite firm-market structure.
///
/// Firm i participates in the markets flagged in column i of the 0/1
/// participation matrix (markets x firms). Market k prices its good at
/// `intercept_k - slope_k * (total quantity offered in k)`; firm i's
/// production cost is `n_i^2 q_i x_i^2 + n_i b_i x_i` with `n_i` its market
/// count. The pseudo-gradient is the affine map `x -> Qx + r`.
///
/// With `normalized` set, each cost is divided by `n_i^2 q_i`, which scales
/// the rows of `Q` and `r` and generally makes `Q` nonsymmetric; constants
/// then use the symmetric part and the spectral norm.
#[derive(Debug, Clone)]
pub struct CournotGame {
    participation: DMatrix<f64>,
    price_intercepts: DVector<f64>,
    price_slopes: DVector<f64>,
    cost_quad: DVector<f64>,
    cost_lin: DVector<f64>,
    upper_bounds: DVector<f64>,
    normalized: bool,
    markets_per_firm: DVector<f64>,
    q_matrix: DMatrix<f64>,
    r_vector: DVector<f64>,
    constants: Option<GameConstants>,
}

impl CournotGame {
    /// Validates the data and precomputes `Q`, `r`, and the game constants.
    pub fn new(
        participation: DMatrix<f64>,
        price_intercepts: DVector<f64>,
        price_slopes: DVector<f64>,
        cost_quad: DVector<f64>,
        cost_lin: DVector<f64>,
        upper_bounds: DVector<f64>,
        normalized: bool,
    ) -> Result<Self> {
        let (m, n) = participation.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidGame("empty participation matrix".to_string()));
        }
        let dims = [
            ("price_intercepts", price_intercepts.len(), m),
            ("price_slopes", price_slopes.len(), m),
            ("cost_quad", cost_quad.len(), n),
            ("cost_lin", cost_lin.len(), n),
            ("upper_bounds", upper_bounds.len(), n),
        ];
        for (name, got, want) in dims {
            if got != want {
                return Err(Error::InvalidGame(format!(
                    "{} has length {}, expected {}",
                    name, got, want
                )));
            }
        }
        if participation.iter().any(|&a| a != 0.0 && a != 1.0) {
            return Err(Error::InvalidGame(
                "participation entries must be 0 or 1".to_string(),
            ));
        }
        for (name, v) in [
            ("price_intercepts", &price_intercepts),
            ("price_slopes", &price_slopes),
            ("cost_quad", &cost_quad),
            ("upper_bounds", &upper_bounds),
        ] {
            if v.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::InvalidGame(format!("{} must be positive", name)));
            }
        }
        let markets_per_firm = DVector::from_iterator(n, (0..n).map(|i| participation.column(i).sum()));
        if markets_per_firm.iter().any(|&ni| ni < 1.0) {
            return Err(Error::InvalidGame(
                "every firm must participate in at least one market".to_string(),
            ));
        }

        // Q = Sigma + A' Z A with Sigma_ii = 2 n_i^2 q_i + A_i' Z A_i
        let z_a = DMatrix::from_fn(m, n, |k, i| price_slopes[k] * participation[(k, i)]);
        let mut q_matrix = participation.transpose() * &z_a;
        let mut r_vector = DVector::zeros(n);
        for i in 0..n {
            let ni = markets_per_firm[i];
            let coupling = q_matrix[(i, i)];
            q_matrix[(i, i)] = 2.0 * ni * ni * cost_quad[i] + 2.0 * coupling;
            r_vector[i] = ni * cost_lin[i] - participation.column(i).dot(&price_intercepts);
        }
        if normalized {
            for i in 0..n {
                let scale = 1.0 / (markets_per_firm[i] * markets_per_firm[i] * cost_quad[i]);
                for j in 0..n {
                    q_matrix[(i, j)] *= scale;
                }
                r_vector[i] *= scale;
            }
        }

        let mu = min_symmetric_part_eigenvalue(&q_matrix);
        let constants = if mu > 0.0 {
            let theta0 = max_singular_value(&q_matrix);
            Some(GameConstants {
                mu,
                theta0,
                theta: theta0,
            })
        } else {
            None
        };

        Ok(CournotGame {
            participation,
            price_intercepts,
            price_slopes,
            cost_quad,
            cost_lin,
            upper_bounds,
            normalized,
            markets_per_firm,
            q_matrix,
            r_vector,
            constants,
        })
    }

    /// The pseudo-gradient matrix `Q` (row-scaled when normalized).
    pub fn q_matrix(&self) -> &DMatrix<f64> {
        &self.q_matrix
    }

    /// The pseudo-gradient offset `r` (row-scaled when normalized).
    pub fn r_vector(&self) -> &DVector<f64> {
        &self.r_vector
    }

    pub fn participation(&self) -> &DMatrix<f64> {
        &self.participation
    }

    pub fn markets_per_firm(&self) -> &DVector<f64> {
        &self.markets_per_firm
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Exact `(mu, theta0, theta)`; errors when the (scaled) `Q` has a
    /// nonpositive symmetric part, i.e. the game is not strongly monotone.
    pub fn cournot_constants(&self) -> Result<GameConstants> {
        self.constants.ok_or_else(|| {
            Error::InvalidGame("Q is not positive definite".to_string())
        })
    }
}

impl GameModel for CournotGame {
    fn n_players(&self) -> usize {
        self.q_matrix.nrows()
    }

    fn action_interval(&self, i: usize) -> (f64, f64) {
        (0.0, self.upper_bounds[i])
    }

    fn cost(&self, i: usize, y: &DVector<f64>) -> Result<f64> {
        let ni = self.markets_per_firm[i];
        let production = ni * ni * self.cost_quad[i] * y[i] * y[i] + ni * self.cost_lin[i] * y[i];
        let offered = &self.participation * y;
        let prices = &self.price_intercepts - self.price_slopes.component_mul(&offered);
        let revenue = prices.dot(&self.participation.column(i)) * y[i];
        let raw = production - revenue;
        if self.normalized {
            Ok(raw / (ni * ni * self.cost_quad[i]))
        } else {
            Ok(raw)
        }
    }

    fn partial_gradient(&self, i: usize, y: &DVector<f64>) -> Result<f64> {
        Ok(self.q_matrix.row(i).transpose().dot(y) + self.r_vector[i])
    }

    fn constants(&self) -> Option<GameConstants> {
        self.constants
    }
}
