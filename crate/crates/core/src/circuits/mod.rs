//! Circuit representation and the builders for the three workload families.

mod builders;
mod circuit;
mod gate;
mod graph;

pub use builders::{
    build_encoder, build_hea, build_qaoa, build_uccsd, double_excitations, hartree_fock_bits, hea_param_count,
    single_excitations, EncodingSpec,
};
pub use circuit::{CircuitSlot, ParameterizedCircuit};
pub use gate::{Angle, GateKind, GateOp, ShiftRule, CONTROLLED_FD_STEP};
pub use graph::GraphSpec;
