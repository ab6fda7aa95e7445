use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Largest window the fitter accepts; keeps the integer normal equations in range.
pub const MAX_FIT_POINTS: usize = 4096;

/// `f(x) = a x² + b x + c`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FitCoefficients {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    /// `f'(x)`
    pub fn slope(&self, x: f64) -> f64 {
        2.0 * self.a * x + self.b
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

/// Least-squares quadratic fit over the fixed abscissae `x = 1..=m`.
///
/// The normal-equation inverse is formed once in exact integer arithmetic, so
/// each fit is three dot products against precomputed weights.
#[derive(Debug, Clone)]
pub struct QuadraticFitter {
    /// `weights[k][x-1]` is the contribution of `y_x` to coefficient k (a, b, c).
    weights: [Vec<f64>; 3],
}

impl QuadraticFitter {
    pub fn new(num_points: usize) -> Result<QuadraticFitter> {
        if num_points < 3 {
            return input_err(format!("quadratic fit needs at least 3 points, got {num_points}"));
        }
        if num_points > MAX_FIT_POINTS {
            return input_err(format!(
                "quadratic fit limited to {MAX_FIT_POINTS} points, got {num_points}"
            ));
        }
        let m = num_points as i128;
        let mut s = [0i128; 5];
        for x in 1..=m {
            let mut p = 1;
            for sk in s.iter_mut() {
                *sk += p;
                p *= x;
            }
        }
        // adjugate of [[S4,S3,S2],[S3,S2,S1],[S2,S1,S0]]
        let a00 = s[2] * s[0] - s[1] * s[1];
        let a01 = s[1] * s[2] - s[3] * s[0];
        let a02 = s[3] * s[1] - s[2] * s[2];
        let a11 = s[4] * s[0] - s[2] * s[2];
        let a12 = s[2] * s[3] - s[4] * s[1];
        let a22 = s[4] * s[2] - s[3] * s[3];
        let det = s[4] * a00 + s[3] * a01 + s[2] * a02;
        let rows = [[a00, a01, a02], [a01, a11, a12], [a02, a12, a22]];
        let weights = rows.map(|r| {
            (1..=m)
                .map(|x| (r[0] * x * x + r[1] * x + r[2]) as f64 / det as f64)
                .collect()
        });
        Ok(QuadraticFitter { weights })
    }

    pub fn num_points(&self) -> usize {
        self.weights[0].len()
    }

    pub fn fit(&self, ys: &[f64]) -> Result<FitCoefficients> {
        crate::error::check_len("fit samples", self.num_points(), ys.len())?;
        Ok(self.fit_iter(ys.iter().copied()))
    }

    /// Fit from an iterator that yields exactly `num_points` values.
    pub(crate) fn fit_iter(&self, ys: impl Iterator<Item = f64>) -> FitCoefficients {
        let mut acc = [0.0; 3];
        for (k, y) in ys.enumerate() {
            for (a, w) in acc.iter_mut().zip(&self.weights) {
                *a += w[k] * y;
            }
        }
        FitCoefficients {
            a: acc[0],
            b: acc[1],
            c: acc[2],
        }
    }
}

/// Least-squares `a x² + b x + c` through `(x, ys[x-1])` for `x = 1..=ys.len()`.
pub fn fit_quadratic(ys: &[f64]) -> Result<FitCoefficients> {
    QuadraticFitter::new(ys.len())?.fit(ys)
}
