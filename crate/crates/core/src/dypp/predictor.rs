use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, input_err, Error, Result};

use super::fit::{FitCoefficients, QuadraticFitter};

/// Predictions moving a weight further than this are discarded.
pub const MAX_WEIGHT_JUMP: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vanilla,
    Nap,
    Adap,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Vanilla, Method::Nap, Method::Adap];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Vanilla => "vanilla",
            Method::Nap => "nap",
            Method::Adap => "adap",
        }
    }

    pub fn predicts(&self) -> bool {
        *self != Method::Vanilla
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" => Ok(Method::Vanilla),
            "nap" => Ok(Method::Nap),
            "adap" => Ok(Method::Adap),
            _ => input_err(format!("unknown method '{s}' (expected vanilla, nap or adap)")),
        }
    }
}

/// Prediction hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig {
    pub method: Method,
    /// Prediction interval; the window holds `p - 1` weights.
    pub p: usize,
    /// NaP initial distance.
    pub d0_init: f64,
    /// NaP decay rate.
    pub r: f64,
    /// AdaP proportionality constant.
    pub k: f64,
    /// AdaP maximum extra distance.
    pub n_max: f64,
    pub epsilon: f64,
    /// Learning rate of the accompanying optimizer.
    pub alpha: f64,
}

impl PredictorConfig {
    pub fn new(method: Method, p: usize, d0_init: f64, k: f64, alpha: f64) -> PredictorConfig {
        PredictorConfig {
            method,
            p,
            d0_init,
            r: 0.95,
            k,
            n_max: 12.0,
            epsilon: 1e-6,
            alpha,
        }
    }

    pub fn with_method(mut self, method: Method) -> PredictorConfig {
        self.method = method;
        self
    }

    pub fn window_len(&self) -> usize {
        self.p - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 4 {
            return input_err(format!("prediction interval p must be at least 4, got {}", self.p));
        }
        if self.p - 1 > super::fit::MAX_FIT_POINTS {
            return input_err(format!("prediction interval p = {} is too large", self.p));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return input_err(format!("decay rate r must lie in (0, 1], got {}", self.r));
        }
        let positive = [
            ("k", self.k),
            ("n_max", self.n_max),
            ("epsilon", self.epsilon),
            ("alpha", self.alpha),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return input_err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.d0_init >= 0.0 && self.d0_init.is_finite()) {
            return input_err(format!("d0 must be non-negative, got {}", self.d0_init));
        }
        Ok(())
    }
}

/// NaP distance `r^(i/p) d0 + (p - 1)` for prediction epoch `i` (1-based).
pub fn nap_distance(i: u64, cfg: &PredictorConfig) -> f64 {
    let p = cfg.p as f64;
    cfg.r.powf(i as f64 / p) * cfg.d0_init + (p - 1.0)
}

/// AdaP distance from a window fit; lies in `[p - 1, n_max + p - 1)`.
pub fn adap_distance(fit: &FitCoefficients, cfg: &PredictorConfig) -> f64 {
    let last = (cfg.p - 1) as f64;
    let s = fit.slope(last);
    let curv = 2.0 * fit.a;
    let d0 = cfg.k * s.abs() / (curv.abs() * cfg.alpha + cfg.epsilon);
    let upper = cfg.n_max + last;
    // 1 - e^{-d0}, accurate for small d0
    let d = -(-d0).exp_m1() * cfg.n_max + last;
    if d.is_nan() {
        last
    } else if d >= upper {
        upper.next_down()
    } else {
        d
    }
}

/// The last `p - 1` optimizer-produced weight vectors, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightWindow {
    capacity: usize,
    num_params: usize,
    samples: VecDeque<Vec<f64>>,
}

impl WeightWindow {
    pub fn new(capacity: usize, num_params: usize) -> Result<WeightWindow> {
        if capacity < 3 {
            return input_err(format!("window needs at least 3 samples, got capacity {capacity}"));
        }
        Ok(WeightWindow {
            capacity,
            num_params,
            samples: VecDeque::with_capacity(capacity),
        })
    }

    pub fn for_config(cfg: &PredictorConfig, num_params: usize) -> Result<WeightWindow> {
        WeightWindow::new(cfg.window_len(), num_params)
    }

    /// Appends a sample, discarding the oldest once full.
    pub fn push(&mut self, weights: &[f64]) -> Result<()> {
        check_len("window sample", self.num_params, weights.len())?;
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(weights.to_vec());
        Ok(())
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(Vec::as_slice)
    }

    pub fn latest(&self) -> Option<&[f64]> {
        self.samples.back().map(Vec::as_slice)
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(move |s| s[j])
    }
}

/// Where the prediction distance comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Nap { epoch: u64 },
    Adap,
    Fixed(f64),
}

/// Prediction result with per-parameter diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub weights: Vec<f64>,
    pub distances: Vec<f64>,
    /// Parameters left at their current weight because the prediction was
    /// non-finite or too large.
    pub rejected: usize,
}

/// Per-parameter quadratic extrapolation of a full window.
pub fn predict(window: &WeightWindow, distance: Distance, cfg: &PredictorConfig) -> Result<Prediction> {
    if !window.is_full() {
        return input_err(format!(
            "window holds {} of {} samples",
            window.len(),
            window.capacity()
        ));
    }
    let fitter = QuadraticFitter::new(window.capacity())?;
    let current = window.latest().expect("full window");
    let shared = match distance {
        Distance::Nap { epoch } => Some(nap_distance(epoch, cfg)),
        Distance::Fixed(d) => Some(d),
        Distance::Adap => None,
    };
    let n = window.num_params();
    let mut weights = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    let mut rejected = 0;
    for (j, &now) in current.iter().enumerate().take(n) {
        let fit = fitter.fit_iter(window.column(j));
        let d = shared.unwrap_or_else(|| adap_distance(&fit, cfg));
        let w = fit.eval(d);
        if w.is_finite() && (w - now).abs() <= MAX_WEIGHT_JUMP {
            weights.push(w);
        } else {
            weights.push(now);
            rejected += 1;
        }
        distances.push(d);
    }
    Ok(Prediction {
        weights,
        distances,
        rejected,
    })
}

/// Predicted weights at prediction epoch `i` using the configured method.
pub fn predict_weights(window: &WeightWindow, i: u64, cfg: &PredictorConfig) -> Result<Vec<f64>> {
    let distance = match cfg.method {
        Method::Nap => Distance::Nap { epoch: i },
        Method::Adap => Distance::Adap,
        Method::Vanilla => return input_err("vanilla training makes no predictions"),
    };
    Ok(predict(window, distance, cfg)?.weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(method: Method, p: usize) -> PredictorConfig {
        PredictorConfig::new(method, p, 3.0, 0.01, 0.1)
    }

    fn window_from(cols: &[Vec<f64>]) -> WeightWindow {
        let m = cols[0].len();
        let mut w = WeightWindow::new(m, cols.len()).unwrap();
        for t in 0..m {
            let row: Vec<f64> = cols.iter().map(|c| c[t]).collect();
            w.push(&row).unwrap();
        }
        w
    }

    #[test]
    fn nap_examples() {
        let c = PredictorConfig::new(Method::Nap, 5, 3.0, 0.01, 0.1);
        assert_abs_diff_eq!(nap_distance(5, &c), 6.85, epsilon = 1e-12);
        assert_abs_diff_eq!(nap_distance(100_000, &c), 4.0, epsilon = 1e-12);
        let z = PredictorConfig { d0_init: 0.0, ..c };
        assert_eq!(nap_distance(15, &z), 4.0);
    }

    #[test]
    fn adap_examples() {
        let c = PredictorConfig {
            n_max: 12.0,
            ..cfg(Method::Adap, 4)
        };
        let flat = FitCoefficients { a: 0.0, b: 0.0, c: 1.0 };
        assert_eq!(adap_distance(&flat, &c), 3.0);
        let steep = FitCoefficients { a: 0.0, b: 1.0, c: 0.0 };
        let d = adap_distance(&steep, &c);
        assert!(d < 15.0 && (d - 15.0).abs() < 1e-12);
    }

    #[test]
    fn forced_distance_and_constant_history() {
        let c = cfg(Method::Nap, 4);
        let w = window_from(&[vec![1.0, 4.0, 9.0]]);
        let p = predict(&w, Distance::Fixed(5.0), &c).unwrap();
        assert_abs_diff_eq!(p.weights[0], 25.0, epsilon = 1e-12);
        let flat = window_from(&[vec![0.7; 3], vec![-2.0; 3]]);
        for m in [Method::Nap, Method::Adap] {
            let out = predict_weights(&flat, 4, &c.with_method(m)).unwrap();
            assert_abs_diff_eq!(out[0], 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(out[1], -2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn distance_at_last_sample_reproduces_latest() {
        let c = cfg(Method::Nap, 4);
        let w = window_from(&[vec![0.2, -0.5, 1.3]]);
        let p = predict(&w, Distance::Fixed(3.0), &c).unwrap();
        assert_abs_diff_eq!(p.weights[0], 1.3, epsilon = 1e-12);
    }

    #[test]
    fn window_must_be_full_and_vanilla_rejected() {
        let c = cfg(Method::Nap, 5);
        let mut w = WeightWindow::for_config(&c, 2).unwrap();
        w.push(&[0.0, 1.0]).unwrap();
        assert!(predict_weights(&w, 5, &c).is_err());
        assert!(w.push(&[0.0]).is_err());
        for _ in 0..3 {
            w.push(&[0.0, 1.0]).unwrap();
        }
        assert!(w.is_full());
        assert!(predict_weights(&w, 5, &c.with_method(Method::Vanilla)).is_err());
    }

    #[test]
    fn wild_predictions_fall_back() {
        let c = cfg(Method::Nap, 4);
        let w = window_from(&[vec![0.0, 1e3, 4e3], vec![0.0, 0.1, 0.2]]);
        let p = predict(&w, Distance::Fixed(10.0), &c).unwrap();
        assert_eq!(p.weights[0], 4e3);
        assert_eq!(p.rejected, 1);
        assert_abs_diff_eq!(p.weights[1], 0.9, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(Method::Adap, 4).validate().is_ok());
        assert!(cfg(Method::Adap, 3).validate().is_err());
        assert!(PredictorConfig {
            r: 1.5,
            ..cfg(Method::Nap, 5)
        }
        .validate()
        .is_err());
        assert!(PredictorConfig {
            k: 0.0,
            ..cfg(Method::Nap, 5)
        }
        .validate()
        .is_err());
        assert!(PredictorConfig {
            epsilon: -1.0,
            ..cfg(Method::Nap, 5)
        }
        .validate()
        .is_err());
        assert_eq!("AdaP".parse::<Method>().unwrap(), Method::Adap);
        assert!("fast".parse::<Method>().is_err());
    }

    fn coeff() -> impl Strategy<Value = f64> {
        -5.0..5.0f64
    }

    proptest! {
        #[test]
        fn exact_quadratics_extrapolate_exactly(
            a in coeff(), b in coeff(), c0 in coeff(), p in 4usize..10, d in 0.0..12.0f64,
        ) {
            let col: Vec<f64> = (1..p).map(|x| { let x = x as f64; a * x * x + b * x + c0 }).collect();
            let w = window_from(&[col]);
            let pred = predict(&w, Distance::Fixed(d), &cfg(Method::Nap, p)).unwrap();
            prop_assert!((pred.weights[0] - (a * d * d + b * d + c0)).abs() <= 1e-9);
        }

        #[test]
        fn shift_equivariance(
            col in prop::collection::vec(-1.0..1.0f64, 4), shift in -10.0..10.0f64,
            method in prop::sample::select(vec![Method::Nap, Method::Adap]),
        ) {
            let c = cfg(method, 5);
            let base = predict(&window_from(std::slice::from_ref(&col)), distance_for(method), &c).unwrap();
            let moved: Vec<f64> = col.iter().map(|y| y + shift).collect();
            let shifted = predict(&window_from(&[moved]), distance_for(method), &c).unwrap();
            prop_assert!((shifted.weights[0] - base.weights[0] - shift).abs() <= 1e-9);
            prop_assert!((shifted.distances[0] - base.distances[0]).abs() <= 1e-9);
        }

        #[test]
        fn scale_equivariance(
            col in prop::collection::vec(-1.0..1.0f64, 4), s in 0.1..10.0f64,
            method in prop::sample::select(vec![Method::Nap, Method::Adap]),
        ) {
            // AdaP's d is scale invariant only when ε is negligible next to |curv|·α.
            let c = PredictorConfig { epsilon: 1e-300, ..cfg(method, 5) };
            let base = predict(&window_from(std::slice::from_ref(&col)), distance_for(method), &c).unwrap();
            let scaled: Vec<f64> = col.iter().map(|y| y * s).collect();
            let out = predict(&window_from(&[scaled]), distance_for(method), &c).unwrap();
            prop_assert!((out.weights[0] - s * base.weights[0]).abs() <= 1e-9 * (1.0 + s * base.weights[0].abs()));
            prop_assert!((out.distances[0] - base.distances[0]).abs() <= 1e-9);
        }

        #[test]
        fn columns_are_independent(
            cols in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 2..6),
            rot in 0usize..6,
            method in prop::sample::select(vec![Method::Nap, Method::Adap]),
        ) {
            let c = cfg(method, 4);
            let base = predict(&window_from(&cols), distance_for(method), &c).unwrap();
            let mut permuted = cols.clone();
            let r = rot % cols.len();
            permuted.rotate_left(r);
            let out = predict(&window_from(&permuted), distance_for(method), &c).unwrap();
            let mut expect = base.weights.clone();
            expect.rotate_left(r);
            prop_assert_eq!(out.weights, expect);
        }

        #[test]
        fn adap_range(
            a in -1e3..1e3f64, b in -1e3..1e3f64, p in 4usize..12,
            k in 1e-6..1.0f64, alpha in 1e-4..1.0f64, n in 0.5..30.0f64,
        ) {
            let c = PredictorConfig { n_max: n, ..PredictorConfig::new(Method::Adap, p, 3.0, k, alpha) };
            let d = adap_distance(&FitCoefficients { a, b, c: 0.0 }, &c);
            let lo = (p - 1) as f64;
            prop_assert!(d >= lo && d < n + lo);
        }

        #[test]
        fn nap_decreasing(i in 1u64..30, p in 4usize..10, d0 in 0.01..10.0f64, r in 0.5..0.999f64) {
            let c = PredictorConfig { r, ..PredictorConfig::new(Method::Nap, p, d0, 0.01, 0.1) };
            let e1 = i * p as u64;
            let e2 = e1 + p as u64;
            let lo = (p - 1) as f64;
            prop_assert!(nap_distance(e2, &c) < nap_distance(e1, &c));
            prop_assert!(nap_distance(e1, &c) > lo && nap_distance(e1, &c) <= d0 + lo);
        }
    }

    fn distance_for(method: Method) -> Distance {
        match method {
            Method::Nap => Distance::Nap { epoch: 10 },
            _ => Distance::Adap,
        }
    }
}
