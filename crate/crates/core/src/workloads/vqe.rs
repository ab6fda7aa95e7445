use serde::{Deserialize, Serialize};

use crate::circuits::{build_hea, build_uccsd, ParameterizedCircuit};
use crate::error::{check_len, input_err, Result};
use crate::gradopt::LossEvaluator;
use crate::simcore::{exact_ground_energy, Observable, Pauli, PauliTerm, ShotConfig};

use super::backend::{Backend, CircuitEvaluator};

/// H2 (STO-3G, 0.7414 Å) in Jordan-Wigner form on 4 qubits.
pub const H2_HAMILTONIAN: &str = include_str!("../../data/h2.txt");
/// Open 4-site transverse-field Ising chain, J = h = 1.
pub const TFIM4_HAMILTONIAN: &str = include_str!("../../data/tfim4.txt");

pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;

/// Hamiltonians shipped with the crate, by name.
pub fn bundled_hamiltonian(name: &str) -> Option<Observable> {
    let text = match name {
        "h2" => H2_HAMILTONIAN,
        "tfim4" => TFIM4_HAMILTONIAN,
        _ => return None,
    };
    Some(Observable::parse(text).expect("bundled Hamiltonian parses"))
}

pub const BUNDLED_HAMILTONIANS: [&str; 2] = ["h2", "tfim4"];

/// `-J Σ Z_i Z_{i+1} - h Σ X_i` on an open chain.
pub fn tfim_hamiltonian(num_sites: usize, j: f64, h: f64) -> Result<Observable> {
    if num_sites < 2 {
        return input_err("Ising chain needs at least 2 sites");
    }
    let mut terms = Vec::new();
    for i in 0..num_sites - 1 {
        let mut l = vec![Pauli::I; num_sites];
        l[i] = Pauli::Z;
        l[i + 1] = Pauli::Z;
        terms.push(PauliTerm::new(-j, l));
    }
    for i in 0..num_sites {
        let mut l = vec![Pauli::I; num_sites];
        l[i] = Pauli::X;
        terms.push(PauliTerm::new(-h, l));
    }
    Observable::new(num_sites, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnsatzKind {
    Uccsd { electrons: usize },
    Hea { layers: usize },
}

impl AnsatzKind {
    pub fn build(&self, num_qubits: usize) -> Result<ParameterizedCircuit> {
        match *self {
            AnsatzKind::Uccsd { electrons } => build_uccsd(num_qubits, electrons),
            AnsatzKind::Hea { layers } => build_hea(num_qubits, layers),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VqeTask {
    pub hamiltonian: Observable,
    pub ansatz: ParameterizedCircuit,
    pub convergence_tol: f64,
    /// Dense-diagonalization ground energy, for reporting.
    pub exact_energy: f64,
}

impl VqeTask {
    pub fn new(hamiltonian: Observable, ansatz: ParameterizedCircuit, convergence_tol: f64) -> Result<VqeTask> {
        check_len("ansatz qubit count", hamiltonian.num_qubits(), ansatz.num_qubits())?;
        if convergence_tol.is_nan() || convergence_tol < 0.0 {
            return input_err("convergence tolerance must be non-negative");
        }
        let exact_energy = exact_ground_energy(&hamiltonian)?;
        Ok(VqeTask {
            hamiltonian,
            ansatz,
            convergence_tol,
            exact_energy,
        })
    }

    pub fn num_params(&self) -> usize {
        self.ansatz.num_params()
    }
}

/// `<ψ(θ)|H|ψ(θ)>`, exact or shot-sampled.
pub fn vqe_energy(theta: &[f64], task: &VqeTask, shots: ShotConfig, seed: u64) -> Result<f64> {
    let backend = Backend {
        shots,
        noise: Default::default(),
    };
    let obs = std::slice::from_ref(&task.hamiltonian);
    let mut e = CircuitEvaluator::new(&task.ansatz, obs, &[], backend, seed)?;
    Ok(e.evaluate(theta)?[0])
}
