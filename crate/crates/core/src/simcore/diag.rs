use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::pauli::Observable;

/// Dense diagonalization is limited to this many qubits (4096 x 4096).
pub const DENSE_LIMIT: usize = 12;

/// Dense Hermitian matrix of a Pauli sum.
pub fn dense_matrix(obs: &Observable) -> Result<DMatrix<Complex64>> {
    let n = obs.num_qubits();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            what: "qubit count for dense diagonalization",
            limit: DENSE_LIMIT,
            actual: n,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for t in obs.terms() {
        // Built from letters directly rather than the statevector masks so that
        // this stays an independent route.
        for col in 0..dim {
            let mut row = col;
            let mut amp = Complex64::new(t.coefficient, 0.0);
            for (q, &p) in t.letters.iter().enumerate() {
                let bit = 1 << (n - 1 - q);
                let set = col & bit != 0;
                use super::pauli::Pauli::*;
                match p {
                    I => {}
                    X => row ^= bit,
                    Y => {
                        row ^= bit;
                        amp *= if set {
                            Complex64::new(0.0, -1.0)
                        } else {
                            Complex64::new(0.0, 1.0)
                        };
                    }
                    Z => {
                        if set {
                            amp = -amp;
                        }
                    }
                }
            }
            m[(row, col)] += amp;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of the observable.
pub fn exact_ground_energy(obs: &Observable) -> Result<f64> {
    let m = dense_matrix(obs)?;
    let eig = m.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}
