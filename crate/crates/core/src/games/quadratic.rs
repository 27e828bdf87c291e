//! A game whose stacked gradient map is affine: `F(x) = Q x + r`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::games::{GameConstants, GameModel};
use crate::linalg::{max_singular_value, min_symmetric_part_eigenvalue};

/// Player i minimizes `0.5 q_ii x_i^2 + x_i (sum_{j != i} q_ij x_j + r_i)`
/// over an interval, so its own-action derivative is row i of `Q x + r`.
///
/// Useful as a fully explicit instance: the equilibrium solves the affine
/// variational inequality of `(Q, r)` over the box.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGame {
    q: DMatrix<f64>,
    r: DVector<f64>,
    intervals: Vec<(f64, f64)>,
    constants: Option<GameConstants>,
}

impl QuadraticGame {
    pub fn new(q: DMatrix<f64>, r: DVector<f64>, intervals: Vec<(f64, f64)>) -> Result<Self> {
        let n = q.nrows();
        if n < 2 || q.ncols() != n {
            return Err(Error::InvalidGame(format!(
                "Q must be square with at least 2 rows, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if r.len() != n || intervals.len() != n {
            return Err(Error::InvalidGame(format!(
                "r has length {} and {} intervals given; both must be {}",
                r.len(),
                intervals.len(),
                n
            )));
        }
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo <= hi) {
                return Err(Error::InvalidGame(format!(
                    "interval of player {} is [{}, {}]",
                    i + 1,
                    lo,
                    hi
                )));
            }
        }
        let mu = min_symmetric_part_eigenvalue(&q);
        let constants = if mu > 0.0 {
            let theta0 = max_singular_value(&q);
            Some(GameConstants {
                mu,
                theta0,
                theta: theta0,
            })
        } else {
            None
        };
        Ok(QuadraticGame {
            q,
            r,
            intervals,
            constants,
        })
    }

    pub fn q_matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r_vector(&self) -> &DVector<f64> {
        &self.r
    }
}

impl GameModel for QuadraticGame {
    fn n_players(&self) -> usize {
        self.q.nrows()
    }

    fn action_interval(&self, i: usize) -> (f64, f64) {
        self.intervals[i]
    }

    fn cost(&self, i: usize, y: &DVector<f64>) -> Result<f64> {
        let mut cross = self.r[i];
        for j in 0..self.q.ncols() {
            if j != i {
                cross += self.q[(i, j)] * y[j];
            }
        }
        Ok(0.5 * self.q[(i, i)] * y[i] * y[i] + y[i] * cross)
    }

    fn partial_gradient(&self, i: usize, y: &DVector<f64>) -> Result<f64> {
        Ok(self.q.row(i).transpose().dot(y) + self.r[i])
    }

    fn constants(&self) -> Option<GameConstants> {
        self.constants
    }
}
