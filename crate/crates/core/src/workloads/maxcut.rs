use rand::Rng as _;

use crate::circuits::{build_qaoa, GraphSpec, ParameterizedCircuit};
use crate::error::{input_err, Error, Result};
use crate::gradopt::LossEvaluator;
use crate::rng::rng_from_seed;
use crate::simcore::{Observable, Pauli, PauliTerm, ShotConfig};

use super::backend::{Backend, CircuitEvaluator};

/// Largest graph [`brute_force_maxcut`] enumerates.
pub const BRUTE_FORCE_LIMIT: usize = 24;

const MAX_REGENERATIONS: usize = 10_000;

/// G(n, p) random graph, redrawn until it has at least one edge.
pub fn generate_erdos_renyi(num_nodes: usize, edge_prob: f64, seed: u64) -> Result<GraphSpec> {
    if num_nodes < 2 {
        return input_err(format!("random graph needs at least 2 nodes, got {num_nodes}"));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return input_err(format!("edge probability {edge_prob} outside [0, 1]"));
    }
    if edge_prob == 0.0 {
        return input_err("edge probability 0 can only produce edgeless graphs");
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..MAX_REGENERATIONS {
        let mut edges = Vec::new();
        for u in 0..num_nodes {
            for v in u + 1..num_nodes {
                if rng.random::<f64>() < edge_prob {
                    edges.push((u, v));
                }
            }
        }
        if !edges.is_empty() {
            return GraphSpec::new(num_nodes, edges);
        }
    }
    input_err(format!(
        "no edge drawn in {MAX_REGENERATIONS} attempts at probability {edge_prob}"
    ))
}

/// Exact maximum cut by enumerating every bipartition.
pub fn brute_force_maxcut(graph: &GraphSpec) -> Result<usize> {
    let n = graph.num_nodes();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "graph for brute-force MaxCut",
            limit: BRUTE_FORCE_LIMIT,
            actual: n,
        });
    }
    if n <= 1 {
        return Ok(0);
    }
    // node n-1 fixed on side 0 by symmetry
    let mut best = 0;
    for mask in 0u32..(1u32 << (n - 1)) {
        let cut = graph
            .edges()
            .iter()
            .filter(|&&(u, v)| ((mask >> u) ^ (mask >> v)) & 1 == 1)
            .count();
        best = best.max(cut);
    }
    Ok(best)
}

/// `Σ_{(u,v)} (Z_u Z_v - 1) / 2`, the negated cut operator.
pub fn maxcut_cost_observable(graph: &GraphSpec) -> Result<Observable> {
    let n = graph.num_nodes();
    let mut terms = Vec::with_capacity(graph.edges().len() + 1);
    for &(u, v) in graph.edges() {
        let mut letters = vec![Pauli::I; n];
        letters[u] = Pauli::Z;
        letters[v] = Pauli::Z;
        terms.push(PauliTerm::new(0.5, letters));
    }
    terms.push(PauliTerm::new(-0.5 * graph.edges().len() as f64, vec![Pauli::I; n]));
    Observable::new(n, terms)
}

/// QAOA MaxCut instance.
#[derive(Debug, Clone)]
pub struct MaxCutTask {
    pub graph: GraphSpec,
    pub depth: usize,
    pub circuit: ParameterizedCircuit,
    /// Loss observable; its expectation is minus the expected cut.
    pub cost: Observable,
    pub true_maxcut: usize,
}

impl MaxCutTask {
    pub fn new(graph: GraphSpec, depth: usize) -> Result<MaxCutTask> {
        let circuit = build_qaoa(&graph, depth)?;
        let cost = maxcut_cost_observable(&graph)?;
        let true_maxcut = brute_force_maxcut(&graph)?;
        Ok(MaxCutTask {
            graph,
            depth,
            circuit,
            cost,
            true_maxcut,
        })
    }

    pub fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    /// `cut / true_maxcut`
    pub fn approximation_ratio(&self, cut: f64) -> f64 {
        cut / self.true_maxcut as f64
    }
}

/// Expected cut size of the QAOA state.
pub fn cut_expectation(theta: &[f64], task: &MaxCutTask, shots: ShotConfig, seed: u64) -> Result<f64> {
    let backend = Backend {
        shots,
        noise: Default::default(),
    };
    let obs = std::slice::from_ref(&task.cost);
    let mut e = CircuitEvaluator::new(&task.circuit, obs, &[], backend, seed)?;
    Ok(-e.evaluate(theta)?[0])
}

/// Largest cut among `shots` measured bitstrings.
pub fn best_sampled_cut(theta: &[f64], task: &MaxCutTask, shots: u64, seed: u64) -> Result<usize> {
    let state = task.circuit.simulate(theta, &[])?;
    let probs = state.probabilities();
    let n = task.graph.num_nodes();
    let mut rng = rng_from_seed(seed);
    let mut best = 0;
    let total: f64 = probs.iter().sum();
    for _ in 0..shots {
        let mut u = rng.random::<f64>() * total;
        let mut k = probs.len() - 1;
        for (x, p) in probs.iter().enumerate() {
            if u < *p {
                k = x;
                break;
            }
            u -= p;
        }
        let bits: Vec<u8> = (0..n).map(|q| ((k >> (n - 1 - q)) & 1) as u8).collect();
        best = best.max(task.graph.cut_value(&bits));
    }
    Ok(best)
}
