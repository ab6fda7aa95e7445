use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

use super::circuit::ParameterizedCircuit;
use super::gate::{GateKind, GateOp};
use super::graph::GraphSpec;

/// QAOA MaxCut circuit of `depth` layers.
///
/// Uniform superposition, then per layer `RZZ(γ_l)` on every edge followed by
/// `RX(2β_l)` on every qubit. Parameters are interleaved as `[γ1, β1, γ2, β2, ...]`.
pub fn build_qaoa(graph: &GraphSpec, depth: usize) -> Result<ParameterizedCircuit> {
    if depth == 0 {
        return input_err("QAOA depth must be at least 1");
    }
    if graph.edges().is_empty() {
        return input_err("QAOA needs at least one edge");
    }
    let n = graph.num_nodes();
    let mut ops: Vec<GateOp> = (0..n).map(|q| GateOp::fixed(GateKind::H, &[q])).collect();
    for layer in 0..depth {
        let (gamma, beta) = (2 * layer, 2 * layer + 1);
        for &(u, v) in graph.edges() {
            ops.push(GateOp::param(GateKind::Rzz, &[u, v], gamma));
        }
        for q in 0..n {
            ops.push(GateOp::scaled_param(GateKind::Rx, &[q], beta, 2.0));
        }
    }
    ParameterizedCircuit::new(n, Vec::new(), ops, 2 * depth)
}

/// Parameter count of [`build_hea`].
pub fn hea_param_count(num_qubits: usize, layers: usize) -> usize {
    layers * (2 * num_qubits + num_qubits * (num_qubits - 1)) + 2 * num_qubits
}

/// Layered hardware-efficient ansatz: per layer RX+RZ on every qubit and a
/// controlled-RX from every qubit to every other, then one trailing RX+RZ block.
pub fn build_hea(num_qubits: usize, layers: usize) -> Result<ParameterizedCircuit> {
    if num_qubits < 2 {
        return input_err("hardware-efficient ansatz needs at least 2 qubits");
    }
    if layers == 0 {
        return input_err("hardware-efficient ansatz needs at least 1 layer");
    }
    // every gate owns its parameter, so the index is the op position
    fn push(ops: &mut Vec<GateOp>, kind: GateKind, targets: &[usize]) {
        let index = ops.len();
        ops.push(GateOp::param(kind, targets, index));
    }
    fn rotations(ops: &mut Vec<GateOp>, num_qubits: usize) {
        for q in 0..num_qubits {
            push(ops, GateKind::Rx, &[q]);
            push(ops, GateKind::Rz, &[q]);
        }
    }
    let mut ops = Vec::new();
    for _ in 0..layers {
        rotations(&mut ops, num_qubits);
        for control in (0..num_qubits).rev() {
            for target in (0..num_qubits).rev().filter(|&t| t != control) {
                push(&mut ops, GateKind::Crx, &[control, target]);
            }
        }
    }
    rotations(&mut ops, num_qubits);
    let count = hea_param_count(num_qubits, layers);
    ParameterizedCircuit::new(num_qubits, Vec::new(), ops, count)
}

/// Angle-encoding layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub features_per_qubit: usize,
    /// RZ on `|0>` is a pure phase; a Hadamard before each RZ makes it observable.
    pub hadamard_prelude: bool,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        EncodingSpec {
            features_per_qubit: 2,
            hadamard_prelude: true,
        }
    }
}

/// Encoding prelude: on qubit `q`, feature `q * k + f` drives the `f`-th RZ,
/// each RZ preceded by H when `hadamard_prelude` is set.
pub fn build_encoder(num_qubits: usize, spec: &EncodingSpec) -> Result<Vec<GateOp>> {
    if spec.features_per_qubit == 0 {
        return input_err("features_per_qubit must be at least 1");
    }
    let k = spec.features_per_qubit;
    let mut ops = Vec::with_capacity(num_qubits * k * 2);
    for q in 0..num_qubits {
        for f in 0..k {
            if spec.hadamard_prelude {
                ops.push(GateOp::fixed(GateKind::H, &[q]));
            }
            ops.push(GateOp::feature(GateKind::Rz, &[q], q * k + f));
        }
    }
    Ok(ops)
}

/// Spin-preserving single excitations `(occupied, virtual)`; even orbitals pair
/// with even, odd with odd. When no such pair exists (one electron in two
/// orbitals), every occupied-to-virtual move is used instead.
pub fn single_excitations(num_qubits: usize, num_electrons: usize) -> Vec<(usize, usize)> {
    let all = (0..num_electrons).flat_map(|i| (num_electrons..num_qubits).map(move |a| (i, a)));
    let same_spin: Vec<(usize, usize)> = all.clone().filter(|(i, a)| i % 2 == a % 2).collect();
    if same_spin.is_empty() {
        all.collect()
    } else {
        same_spin
    }
}

/// Double excitations `(i, j, a, b)`: every occupied pair to every virtual pair.
pub fn double_excitations(num_qubits: usize, num_electrons: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for i in 0..num_electrons {
        for j in i + 1..num_electrons {
            for a in num_electrons..num_qubits {
                for b in a + 1..num_qubits {
                    out.push([i, j, a, b]);
                }
            }
        }
    }
    out
}

/// UCCSD-style ansatz: Hartree-Fock bit flips on the first `num_electrons`
/// qubits, then one single- or double-excitation gate per excitation, one
/// parameter each (singles first).
pub fn build_uccsd(num_qubits: usize, num_electrons: usize) -> Result<ParameterizedCircuit> {
    if num_electrons == 0 || num_electrons >= num_qubits {
        return input_err(format!(
            "electron count {num_electrons} must lie strictly between 0 and {num_qubits}"
        ));
    }
    let prelude = (0..num_electrons).map(|q| GateOp::fixed(GateKind::X, &[q])).collect();
    let mut ops = Vec::new();
    for (i, a) in single_excitations(num_qubits, num_electrons) {
        let index = ops.len();
        ops.push(GateOp::param(GateKind::SingleExcitation, &[i, a], index));
    }
    for d in double_excitations(num_qubits, num_electrons) {
        let index = ops.len();
        ops.push(GateOp::param(GateKind::DoubleExcitation, &d, index));
    }
    if ops.is_empty() {
        return input_err(format!(
            "no excitations for {num_electrons} electrons in {num_qubits} spin-orbitals"
        ));
    }
    let n = ops.len();
    ParameterizedCircuit::new(num_qubits, prelude, ops, n)
}

/// Hartree-Fock reference bitstring.
pub fn hartree_fock_bits(num_qubits: usize, num_electrons: usize) -> Vec<u8> {
    (0..num_qubits).map(|q| u8::from(q < num_electrons)).collect()
}
