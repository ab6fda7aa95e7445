//! Benchmark tasks: QAOA MaxCut, VQE and a hybrid QNN classifier.

mod backend;
mod maxcut;
mod qnn;
mod vqe;

pub use backend::{Backend, CircuitEvaluator};
pub use maxcut::{
    best_sampled_cut, brute_force_maxcut, cut_expectation, generate_erdos_renyi, maxcut_cost_observable, MaxCutTask,
    BRUTE_FORCE_LIMIT,
};
pub use qnn::{
    load_dataset_csv, parse_dataset_csv, qnn_evaluate, qnn_forward, qnn_loss_and_grad, synth_blobs, BatchGradient,
    Dataset, PredictionScope, QnnTask, TRAIN_FRACTION,
};
pub use vqe::{
    bundled_hamiltonian, tfim_hamiltonian, vqe_energy, AnsatzKind, VqeTask, BUNDLED_HAMILTONIANS,
    DEFAULT_CONVERGENCE_TOL, H2_HAMILTONIAN, TFIM4_HAMILTONIAN,
};
