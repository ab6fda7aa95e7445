//! Gradient estimators and classical optimizers.

mod gradients;
mod optimizers;

pub use gradients::{
    finite_diff_gradient, finite_diff_jacobian, jacobian, param_shift_gradient, param_shift_jacobian, spsa_gradient,
    spsa_jacobian, vjp, CountingEvaluator, EvalCost, FnEvaluator, Gradient, GradientMethod, Jacobian, LossEvaluator,
    ParamSlot, DEFAULT_FD_STEP, DEFAULT_SPSA_C,
};
pub use optimizers::{
    optimizer_step, Optimizer, OptimizerKind, OptimizerSpec, ADAGRAD_EPS, ADAM_BETA1, ADAM_BETA2, ADAM_EPS,
};
