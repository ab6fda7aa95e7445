//! Quadratic extrapolation of weight trajectories (NaP and AdaP).

mod fit;
mod predictor;

pub use fit::{fit_quadratic, FitCoefficients, QuadraticFitter, MAX_FIT_POINTS};
pub use predictor::{
    adap_distance, nap_distance, predict, predict_weights, Distance, Method, Prediction, PredictorConfig, WeightWindow,
    MAX_WEIGHT_JUMP,
};
