use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::circuits::{build_encoder, build_hea, EncodingSpec, ParameterizedCircuit};
use crate::error::{check_len, input_err, Error, Result};
use crate::gradopt::{vjp, EvalCost, GradientMethod, LossEvaluator};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::simcore::Observable;

use super::backend::{Backend, CircuitEvaluator};

/// Fraction of samples assigned to the training split.
pub const TRAIN_FRACTION: f64 = 0.7;

/// Labelled feature matrix with a fixed train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    /// Validates the data and draws a seeded 70/30 split.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize, split_seed: u64) -> Result<Dataset> {
        check_len("label count", features.len(), labels.len())?;
        if features.len() < 2 {
            return input_err("dataset needs at least 2 samples");
        }
        let dim = features[0].len();
        if dim == 0 {
            return input_err("dataset has no feature columns");
        }
        for row in &features {
            check_len("feature row", dim, row.len())?;
            if row.iter().any(|x| !x.is_finite()) {
                return input_err("non-finite feature value");
            }
        }
        if num_classes < 2 {
            return input_err("need at least 2 classes");
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return input_err(format!("label {bad} outside [0, {num_classes})"));
        }
        let mut order: Vec<usize> = (0..features.len()).collect();
        order.shuffle(&mut rng_from_seed(split_seed));
        let n_train = ((features.len() as f64) * TRAIN_FRACTION).round() as usize;
        let n_train = n_train.clamp(1, features.len() - 1);
        let test = order.split_off(n_train);
        Ok(Dataset {
            features,
            labels,
            num_classes,
            train: order,
            test,
        })
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Reads `f1,...,fd,label` rows; the class count is the largest label plus one.
pub fn load_dataset_csv(path: impl AsRef<Path>, split_seed: u64) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset_csv(&text, split_seed)
}

pub fn parse_dataset_csv(text: &str, split_seed: u64) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.clone();
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = (1..=d).map(|k| format!("f{k}")).chain(["label".to_string()]).collect();
    if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must be f1,...,fd,label; got '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(csv_err)?;
        let bad = |message: String| Error::Parse { line, message };
        if record.len() != d + 1 {
            return Err(bad(format!("expected {} fields, found {}", d + 1, record.len())));
        }
        let row = record
            .iter()
            .take(d)
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("bad feature '{f}'"))))
            .collect::<Result<Vec<f64>>>()?;
        let label = &record[d];
        let label = label
            .parse::<usize>()
            .map_err(|_| bad(format!("label '{label}' is not a non-negative integer")))?;
        features.push(row);
        labels.push(label);
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1).max(2);
    Dataset::new(features, labels, num_classes, split_seed)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Isotropic Gaussian clusters with centres drawn uniformly from `[-1.5, 1.5]^dim`.
/// Samples are assigned to classes round-robin.
pub fn synth_blobs(classes: usize, dim: usize, n: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 {
        return input_err("blobs need at least 2 classes");
    }
    if dim == 0 || n < classes {
        return input_err("blobs need dim >= 1 and at least one sample per class");
    }
    let noise = Normal::new(0.0, spread).map_err(|e| Error::Input(format!("spread {spread}: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let centres: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    let labels: Vec<usize> = (0..n).map(|k| k % classes).collect();
    let features = labels
        .iter()
        .map(|&c| centres[c].iter().map(|m| m + noise.sample(&mut rng)).collect())
        .collect();
    Dataset::new(features, labels, classes, derive_seed(seed, &[1]))
}

/// Which parameters DyPP extrapolates in the hybrid model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionScope {
    /// Quantum and classical-head parameters.
    #[default]
    All,
    QuantumOnly,
}

/// Angle-encoded features, a hardware-efficient PQC, per-qubit `<Z>` readout
/// and a linear softmax head.
///
/// The flat parameter vector is `[θ, W (num_qubits × num_classes, row-major), b]`.
#[derive(Debug, Clone)]
pub struct QnnTask {
    pub dataset: Dataset,
    pub encoder: EncodingSpec,
    pub pqc: ParameterizedCircuit,
    pub readout: Vec<Observable>,
    pub batch_size: usize,
}

impl QnnTask {
    pub fn new(
        dataset: Dataset,
        num_qubits: usize,
        layers: usize,
        encoder: EncodingSpec,
        batch_size: usize,
    ) -> Result<QnnTask> {
        check_len(
            "feature dimension (qubits × features per qubit)",
            num_qubits * encoder.features_per_qubit,
            dataset.dim(),
        )?;
        if batch_size == 0 {
            return input_err("batch size must be at least 1");
        }
        let hea = build_hea(num_qubits, layers)?;
        let pqc = ParameterizedCircuit::new(
            num_qubits,
            build_encoder(num_qubits, &encoder)?,
            hea.ops().to_vec(),
            hea.num_params(),
        )?;
        let readout = (0..num_qubits).map(|q| Observable::z(num_qubits, q)).collect();
        Ok(QnnTask {
            dataset,
            encoder,
            pqc,
            readout,
            batch_size,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.pqc.num_qubits()
    }

    pub fn num_classes(&self) -> usize {
        self.dataset.num_classes
    }

    pub fn num_quantum_params(&self) -> usize {
        self.pqc.num_params()
    }

    pub fn num_params(&self) -> usize {
        self.num_quantum_params() + (self.num_qubits() + 1) * self.num_classes()
    }

    /// Quantum parameters ~ U(-π/2, π/2), head weights ~ U(-0.5, 0.5), zero bias.
    pub fn initial_params(&self, rng: &mut Rng) -> Vec<f64> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let mut p: Vec<f64> = (0..self.num_quantum_params())
            .map(|_| rng.random_range(-half_pi..half_pi))
            .collect();
        p.extend((0..self.num_qubits() * self.num_classes()).map(|_| rng.random_range(-0.5..0.5)));
        p.extend(std::iter::repeat_n(0.0, self.num_classes()));
        p
    }

    fn split<'p>(&self, params: &'p [f64]) -> Result<(&'p [f64], &'p [f64], &'p [f64])> {
        check_len("QNN parameter vector", self.num_params(), params.len())?;
        let nq = self.num_quantum_params();
        let nw = self.num_qubits() * self.num_classes();
        Ok((&params[..nq], &params[nq..nq + nw], &params[nq + nw..]))
    }

    fn logits(&self, z: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
        let c = self.num_classes();
        (0..c)
            .map(|k| b[k] + z.iter().enumerate().map(|(j, zj)| zj * w[j * c + k]).sum::<f64>())
            .collect()
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Class probabilities for one feature vector.
pub fn qnn_forward(features: &[f64], params: &[f64], task: &QnnTask, backend: Backend, seed: u64) -> Result<Vec<f64>> {
    let (theta, w, b) = task.split(params)?;
    let mut e = CircuitEvaluator::new(&task.pqc, &task.readout, features, backend, seed)?;
    let z = e.evaluate(theta)?;
    Ok(softmax(&task.logits(&z, w, b)))
}

/// Mean loss and gradient over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    pub loss: f64,
    /// Full-length gradient in the flat parameter layout.
    pub grad: Vec<f64>,
    pub cost: EvalCost,
}

/// Mean cross-entropy over `batch` (dataset indices) and its gradient.
///
/// Head gradients are analytic; quantum gradients use the configured
/// estimator on `Σ_j (∂L/∂<Z_j>) <Z_j>`.
pub fn qnn_loss_and_grad(
    batch: &[usize],
    params: &[f64],
    task: &QnnTask,
    method: GradientMethod,
    backend: Backend,
    seed: u64,
) -> Result<BatchGradient> {
    if batch.is_empty() {
        return input_err("empty batch");
    }
    let (theta, w, b) = task.split(params)?;
    let nq = task.num_quantum_params();
    let nw = w.len();
    let c = task.num_classes();
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut cost = EvalCost::default();
    for (k, &idx) in batch.iter().enumerate() {
        let x = task
            .dataset
            .features
            .get(idx)
            .ok_or_else(|| Error::Input(format!("sample {idx} out of range")))?;
        let y = task.dataset.labels[idx];
        let sample_seed = derive_seed(seed, &[k as u64]);
        let mut e = CircuitEvaluator::new(&task.pqc, &task.readout, x, backend, sample_seed)?;
        let z = e.evaluate(theta)?;
        cost += e.cost_per_eval();
        let probs = softmax(&task.logits(&z, w, b));
        loss -= probs[y].max(f64::MIN_POSITIVE).ln();
        let mut dlogits = probs;
        dlogits[y] -= 1.0;
        let mut dz = vec![0.0; z.len()];
        for (j, zj) in z.iter().enumerate() {
            for kk in 0..c {
                grad[nq + j * c + kk] += zj * dlogits[kk];
                dz[j] += w[j * c + kk] * dlogits[kk];
            }
        }
        for kk in 0..c {
            grad[nq + nw + kk] += dlogits[kk];
        }
        let mut rng = rng_from_seed(derive_seed(sample_seed, &[1]));
        let g = vjp(&mut e, theta, &dz, method, &mut rng)?;
        cost += e.cost_per_eval() * g.evaluations;
        for (gj, v) in grad[..nq].iter_mut().zip(&g.values) {
            *gj += v;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(BatchGradient {
        loss: loss * scale,
        grad,
        cost,
    })
}

/// Mean cross-entropy and accuracy on `indices`, noiseless and exact.
pub fn qnn_evaluate(indices: &[usize], params: &[f64], task: &QnnTask) -> Result<(f64, f64)> {
    if indices.is_empty() {
        return input_err("no samples to evaluate");
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for &idx in indices {
        let probs = qnn_forward(&task.dataset.features[idx], params, task, Backend::exact(), 0)?;
        let y = task.dataset.labels[idx];
        loss -= probs[y].max(f64::MIN_POSITIVE).ln();
        let pred = probs
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (k, &p)| if p > best.1 { (k, p) } else { best },
            )
            .0;
        correct += usize::from(pred == y);
    }
    let n = indices.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_task(seed: u64) -> QnnTask {
        let data = synth_blobs(3, 4, 30, 0.3, seed).unwrap();
        QnnTask::new(data, 2, 1, EncodingSpec::default(), 8).unwrap()
    }

    #[test]
    fn blob_split_sizes_and_determinism() {
        let d = synth_blobs(4, 8, 1000, 0.4, 3).unwrap();
        assert_eq!((d.train.len(), d.test.len()), (700, 300));
        assert_eq!(d, synth_blobs(4, 8, 1000, 0.4, 3).unwrap());
        let mut all: Vec<usize> = d.train.iter().chain(&d.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn csv_parsing() {
        let d = parse_dataset_csv("f1,f2,label\n0.1,0.2,0\n1.5,-2,1\n3,4,2\n", 0).unwrap();
        assert_eq!(d.features.len(), 3);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.num_classes, 3);
        assert!(parse_dataset_csv("a,b,label\n1,2,0\n3,4,1\n", 0).is_err());
        assert!(parse_dataset_csv("f1,label\n1,0\n2\n", 0).is_err());
        assert!(parse_dataset_csv("f1,label\n1,0\n2,-1\n", 0).is_err());
        assert!(parse_dataset_csv("f1,label\n1,0\nx,1\n", 0).is_err());
    }

    #[test]
    fn dataset_rejects_bad_labels() {
        assert!(Dataset::new(vec![vec![0.0], vec![1.0]], vec![0, 2], 2, 0).is_err());
    }

    #[test]
    fn zero_head_is_uniform() {
        let task = small_task(0);
        let mut p = task.initial_params(&mut rng_from_seed(1));
        let nq = task.num_quantum_params();
        p[nq..].iter_mut().for_each(|v| *v = 0.0);
        let probs = qnn_forward(&task.dataset.features[0], &p, &task, Backend::exact(), 0).unwrap();
        for q in &probs {
            assert_abs_diff_eq!(*q, 1.0 / 3.0, epsilon = 1e-12);
        }
        let g = qnn_loss_and_grad(&[0, 1, 2], &p, &task, GradientMethod::Exact, Backend::exact(), 0).unwrap();
        assert_abs_diff_eq!(g.loss, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn bias_shift_invariance() {
        let task = small_task(1);
        let mut p = task.initial_params(&mut rng_from_seed(2));
        let x = &task.dataset.features[4];
        let a = qnn_forward(x, &p, &task, Backend::exact(), 0).unwrap();
        let nb = task.num_classes();
        let len = p.len();
        p[len - nb..].iter_mut().for_each(|v| *v += 3.7);
        let b = qnn_forward(x, &p, &task, Backend::exact(), 0).unwrap();
        assert_abs_diff_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        for (u, v) in a.iter().zip(&b) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let task = small_task(2);
        let p = task.initial_params(&mut rng_from_seed(5));
        let batch = [0, 3, 7, 9];
        let g = qnn_loss_and_grad(&batch, &p, &task, GradientMethod::Exact, Backend::exact(), 0).unwrap();
        let loss = |q: &[f64]| {
            qnn_loss_and_grad(&batch, q, &task, GradientMethod::Exact, Backend::exact(), 0)
                .unwrap()
                .loss
        };
        let h = 1e-5;
        for j in 0..p.len() {
            let mut q = p.clone();
            q[j] += h;
            let fp = loss(&q);
            q[j] -= 2.0 * h;
            let fm = loss(&q);
            let fd = (fp - fm) / (2.0 * h);
            let tol = if j < task.num_quantum_params() { 1e-5 } else { 1e-6 };
            assert!((fd - g.grad[j]).abs() < tol, "param {j}: {fd} vs {}", g.grad[j]);
        }
    }

    #[test]
    fn sampled_spsa_costs() {
        let task = small_task(3);
        let p = task.initial_params(&mut rng_from_seed(5));
        let g = qnn_loss_and_grad(&[0, 1], &p, &task, GradientMethod::spsa(), Backend::sampled(100), 0).unwrap();
        // per sample: forward + two perturbed evaluations, one Z pass each
        assert_eq!(
            g.cost,
            EvalCost {
                executions: 6,
                shots: 600
            }
        );
        assert!(qnn_loss_and_grad(&[], &p, &task, GradientMethod::Exact, Backend::exact(), 0).is_err());
    }
}
