use crate::error::{Error, Result};

/// Column-stochastic 2x2 matrix, `w[x][y] = P(x_{k+1} = x | x_k = y)` in the `(|1>, |0>)` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionMatrix {
    w: [[f64; 2]; 2],
}

impl TransitionMatrix {
    pub fn identity() -> Self {
        TransitionMatrix {
            w: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Builds a matrix after checking entries lie in `[0, 1]` and columns sum to one.
    pub fn new(w: [[f64; 2]; 2]) -> Result<Self> {
        for col in 0..2 {
            let sum = w[0][col] + w[1][col];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("column {col} sums to {sum}, not 1")));
            }
            for row in w.iter() {
                if !(0.0..=1.0).contains(&row[col]) {
                    return Err(Error::invalid("transition probabilities must lie in [0, 1]"));
                }
            }
        }
        Ok(TransitionMatrix { w })
    }

    #[inline]
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.w[to][from]
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        self.w
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &TransitionMatrix) -> TransitionMatrix {
        let mut w = [[0.0; 2]; 2];
        for (i, row) in w.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.w[i][0] * rhs.w[0][j] + self.w[i][1] * rhs.w[1][j];
            }
        }
        TransitionMatrix { w }
    }
}

/// Relaxation over `dt` seconds with lifetime `t1`: `exp(G dt / t1)` for the
/// generator `G = [[-1, 0], [1, 0]]`, evaluated in closed form.
///
/// `t1 = f64::INFINITY` gives the identity.
pub fn relaxation_transition(dt: f64, t1: f64) -> Result<TransitionMatrix> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("cycle duration must be finite and >= 0, got {dt}")));
    }
    if !(t1 > 0.0) {
        return Err(Error::invalid(format!("T1 must be > 0 or +inf, got {t1}")));
    }
    let survive = (-dt / t1).exp();
    Ok(TransitionMatrix {
        w: [[survive, 0.0], [-(-dt / t1).exp_m1(), 1.0]],
    })
}
