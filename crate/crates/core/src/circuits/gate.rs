use serde::{Deserialize, Serialize};
use std::fmt;

/// Supported gate kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Crx,
    Crz,
    Rzz,
    /// Givens rotation in span{|01>, |10>}.
    SingleExcitation,
    /// Givens rotation in span{|0011>, |1100>}.
    DoubleExcitation,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cnot
            | GateKind::Cz
            | GateKind::Crx
            | GateKind::Crz
            | GateKind::Rzz
            | GateKind::SingleExcitation => 2,
            GateKind::DoubleExcitation => 4,
        }
    }

    pub fn is_parameterized(self) -> bool {
        !matches!(self, GateKind::H | GateKind::X | GateKind::Cnot | GateKind::Cz)
    }

    /// Gradient recipe for a single occurrence of this gate.
    ///
    /// All parameterized kinds have the form `exp(-i θ G / 2)`. When `G` has
    /// eigenvalues ±1 the two-term rule is exact. Excitation generators have
    /// eigenvalues {-1, 0, 1}, which needs the four-term rule. Controlled
    /// rotations fall back to central differences.
    pub fn shift_rule(self) -> Option<ShiftRule> {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz => Some(ShiftRule::TwoTerm),
            GateKind::SingleExcitation | GateKind::DoubleExcitation => Some(ShiftRule::FourTerm),
            GateKind::Crx | GateKind::Crz => Some(ShiftRule::FiniteDiff { h: CONTROLLED_FD_STEP }),
            _ => None,
        }
    }

    pub fn parse(name: &str) -> Option<GateKind> {
        let kind = match name.to_ascii_lowercase().as_str() {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "cnot" | "cx" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "crx" => GateKind::Crx,
            "crz" => GateKind::Crz,
            "rzz" => GateKind::Rzz,
            "singleexcitation" => GateKind::SingleExcitation,
            "doubleexcitation" => GateKind::DoubleExcitation,
            _ => return None,
        };
        Some(kind)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Step used by the finite-difference fallback for controlled rotations.
pub const CONTROLLED_FD_STEP: f64 = 1e-4;

/// Per-occurrence gradient recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftRule {
    /// `[f(θ+π/2) - f(θ-π/2)] / 2`
    TwoTerm,
    /// `c+ [f(θ+π/2) - f(θ-π/2)] - c- [f(θ+3π/2) - f(θ-3π/2)]`, `c± = (√2 ± 1)/(4√2)`
    FourTerm,
    /// `[f(θ+h) - f(θ-h)] / 2h`
    FiniteDiff { h: f64 },
}

impl ShiftRule {
    /// `(shift, coefficient)` pairs whose weighted sum of function values is the derivative.
    pub fn terms(self) -> Vec<(f64, f64)> {
        use std::f64::consts::{FRAC_PI_2, SQRT_2};
        match self {
            ShiftRule::TwoTerm => vec![(FRAC_PI_2, 0.5), (-FRAC_PI_2, -0.5)],
            ShiftRule::FourTerm => {
                let cp = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
                let cm = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
                vec![
                    (FRAC_PI_2, cp),
                    (-FRAC_PI_2, -cp),
                    (3.0 * FRAC_PI_2, -cm),
                    (-3.0 * FRAC_PI_2, cm),
                ]
            }
            ShiftRule::FiniteDiff { h } => vec![(h, 0.5 / h), (-h, -0.5 / h)],
        }
    }
}

/// Where a parameterized gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// `scale * params[index]`
    Param { index: usize, scale: f64 },
    /// Constant angle in radians.
    Fixed(f64),
    /// `features[index]`, bound per input sample and never trained.
    Feature { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    /// For controlled gates the control comes first.
    pub targets: Vec<usize>,
    pub angle: Option<Angle>,
}

impl GateOp {
    pub fn fixed(kind: GateKind, targets: &[usize]) -> GateOp {
        GateOp {
            kind,
            targets: targets.to_vec(),
            angle: None,
        }
    }

    pub fn param(kind: GateKind, targets: &[usize], index: usize) -> GateOp {
        GateOp::scaled_param(kind, targets, index, 1.0)
    }

    pub fn scaled_param(kind: GateKind, targets: &[usize], index: usize, scale: f64) -> GateOp {
        GateOp {
            kind,
            targets: targets.to_vec(),
            angle: Some(Angle::Param { index, scale }),
        }
    }

    pub fn constant(kind: GateKind, targets: &[usize], theta: f64) -> GateOp {
        GateOp {
            kind,
            targets: targets.to_vec(),
            angle: Some(Angle::Fixed(theta)),
        }
    }

    pub fn feature(kind: GateKind, targets: &[usize], index: usize) -> GateOp {
        GateOp {
            kind,
            targets: targets.to_vec(),
            angle: Some(Angle::Feature { index }),
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        match self.angle {
            Some(Angle::Param { index, .. }) => Some(index),
            _ => None,
        }
    }
}
