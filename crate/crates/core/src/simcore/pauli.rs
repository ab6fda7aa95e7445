use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{check_len, input_err, Error, Result};

use super::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `coefficient * P_0 ⊗ P_1 ⊗ ... ⊗ P_(n-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub letters: Vec<Pauli>,
}

/// Bit masks of a Pauli string over a register of `n` qubits (qubit 0 = MSB).
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliMasks {
    /// X or Y positions: the bits the string flips.
    pub flip: usize,
    /// Y or Z positions: the bits contributing a sign.
    pub phase: usize,
    pub num_y: u32,
}

impl PauliTerm {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> PauliTerm {
        PauliTerm { coefficient, letters }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// True when every letter is I or Z, i.e. the term is diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.letters.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub(crate) fn masks(&self) -> PauliMasks {
        let n = self.letters.len();
        let mut m = PauliMasks {
            flip: 0,
            phase: 0,
            num_y: 0,
        };
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => m.flip |= bit,
                Pauli::Y => {
                    m.flip |= bit;
                    m.phase |= bit;
                    m.num_y += 1;
                }
                Pauli::Z => m.phase |= bit,
            }
        }
        m
    }

    pub fn letter_string(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    /// `<ψ|P|ψ>` for the bare Pauli string (coefficient not applied).
    pub fn string_expectation(&self, state: &StateVector) -> f64 {
        if self.is_identity() {
            return 1.0;
        }
        let m = self.masks();
        let amps = state.amplitudes();
        let y_phase = i_pow(m.num_y);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &a) in amps.iter().enumerate() {
            let sign = if (x & m.phase).count_ones() & 1 == 0 { 1.0 } else { -1.0 };
            acc += amps[x ^ m.flip].conj() * a * sign;
        }
        (acc * y_phase).re
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Real-weighted sum of Pauli strings on a fixed register size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Observable {
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Observable> {
        if terms.is_empty() {
            return input_err("observable needs at least one term");
        }
        for t in &terms {
            check_len("Pauli string length", num_qubits, t.letters.len())?;
            if !t.coefficient.is_finite() {
                return input_err("non-finite term coefficient");
            }
        }
        Ok(Observable { num_qubits, terms })
    }

    pub fn single(coefficient: f64, letters: Vec<Pauli>) -> Result<Observable> {
        Observable::new(letters.len(), vec![PauliTerm::new(coefficient, letters)])
    }

    /// `Z` on `qubit`, identity elsewhere.
    pub fn z(num_qubits: usize, qubit: usize) -> Observable {
        let mut letters = vec![Pauli::I; num_qubits];
        letters[qubit] = Pauli::Z;
        Observable {
            num_qubits,
            terms: vec![PauliTerm::new(1.0, letters)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// `Σ_k w_k O_k`, term lists concatenated.
    pub fn weighted_sum(parts: &[(f64, &Observable)]) -> Result<Observable> {
        let Some((_, first)) = parts.first() else {
            return input_err("empty observable sum");
        };
        let n = first.num_qubits;
        let mut terms = Vec::new();
        for (w, o) in parts {
            check_len("observable qubit count", n, o.num_qubits)?;
            terms.extend(
                o.terms
                    .iter()
                    .map(|t| PauliTerm::new(w * t.coefficient, t.letters.clone())),
            );
        }
        Observable::new(n, terms)
    }

    /// `O|ψ>` (not normalized).
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_len("observable qubit count", state.num_qubits(), self.num_qubits)?;
        let amps = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for t in &self.terms {
            let m = t.masks();
            let coef = i_pow(m.num_y) * t.coefficient;
            for (x, &a) in amps.iter().enumerate() {
                let sign = if (x & m.phase).count_ones() & 1 == 0 { 1.0 } else { -1.0 };
                out[x ^ m.flip] += coef * a * sign;
            }
        }
        StateVector::from_amplitudes(state.num_qubits(), out)
    }

    /// Parses the text Hamiltonian format: one `<coefficient> <letters>` term per line,
    /// `#` starting a comment.
    pub fn parse(text: &str) -> Result<Observable> {
        let mut terms = Vec::new();
        let mut width: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let (Some(coef), Some(letters), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(err(format!("expected `<coefficient> <letters>`, got `{line}`")));
            };
            let coefficient: f64 = coef.parse().map_err(|_| err(format!("bad coefficient `{coef}`")))?;
            if !coefficient.is_finite() {
                return Err(err(format!("non-finite coefficient `{coef}`")));
            }
            let letters = letters
                .chars()
                .map(|c| Pauli::from_char(c).ok_or_else(|| err(format!("bad Pauli letter `{c}`"))))
                .collect::<Result<Vec<_>>>()?;
            match width {
                None => width = Some(letters.len()),
                Some(w) if w != letters.len() => {
                    return Err(err(format!(
                        "term has {} letters, previous terms have {w}",
                        letters.len()
                    )))
                }
                _ => {}
            }
            terms.push(PauliTerm::new(coefficient, letters));
        }
        let Some(n) = width else {
            return Err(Error::Parse {
                line: 0,
                message: "no terms found".into(),
            });
        };
        if n == 0 {
            return input_err("empty Pauli string");
        }
        Observable::new(n, terms)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Observable> {
        Observable::parse(&std::fs::read_to_string(path)?)
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Observable> {
        Observable::parse(s)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{} {}", t.coefficient, t.letter_string())?;
        }
        Ok(())
    }
}

/// Exact `Σ_t c_t <ψ|P_t|ψ>`.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    check_len("observable qubit count", state.num_qubits(), obs.num_qubits())?;
    Ok(obs
        .terms
        .iter()
        .map(|t| t.coefficient * t.string_expectation(state))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{GateKind, GateOp};
    use approx::assert_abs_diff_eq;

    fn plus() -> StateVector {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&GateOp::fixed(GateKind::H, &[0]), None).unwrap();
        s
    }

    #[test]
    fn spot_expectations() {
        let zz = Observable::single(1.0, vec![Pauli::Z, Pauli::Z]).unwrap();
        assert_eq!(expectation(&StateVector::zero(2).unwrap(), &zz).unwrap(), 1.0);
        let z = Observable::single(1.0, vec![Pauli::Z]).unwrap();
        assert_abs_diff_eq!(expectation(&plus(), &z).unwrap(), 0.0, epsilon = 1e-15);
        let x = Observable::single(1.0, vec![Pauli::X]).unwrap();
        assert_abs_diff_eq!(expectation(&plus(), &x).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn y_expectation_on_plus_i() {
        let mut s = plus();
        s.apply_gate(&GateOp::param(GateKind::Rz, &[0], 0), Some(std::f64::consts::FRAC_PI_2))
            .unwrap();
        let y = Observable::single(1.0, vec![Pauli::Y]).unwrap();
        assert_abs_diff_eq!(expectation(&s, &y).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn apply_agrees_with_expectation() {
        let mut s = StateVector::zero(3).unwrap();
        for (q, t) in [(0, 0.4), (1, 1.2), (2, 2.1)] {
            s.apply_gate(&GateOp::param(GateKind::Ry, &[q], 0), Some(t)).unwrap();
            s.apply_gate(&GateOp::param(GateKind::Rz, &[q], 0), Some(t * 0.7))
                .unwrap();
        }
        let obs = Observable::parse("0.5 XYZ\n-1.25 ZIZ\n0.3 YYI\n0.1 III").unwrap();
        let direct = expectation(&s, &obs).unwrap();
        let via_apply = s.inner(&obs.apply(&s).unwrap());
        assert_abs_diff_eq!(direct, via_apply.re, epsilon = 1e-14);
        assert_abs_diff_eq!(via_apply.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn identity_is_exactly_one() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_gate(&GateOp::param(GateKind::Rx, &[0], 0), Some(0.123))
            .unwrap();
        let id = Observable::single(1.0, vec![Pauli::I, Pauli::I]).unwrap();
        assert_eq!(expectation(&s, &id).unwrap(), 1.0);
    }

    #[test]
    fn parse_format() {
        let obs = Observable::parse("# comment\n-0.4804 IIZZ\n\n 0.25 XXYY  # trailing\n").unwrap();
        assert_eq!(obs.num_qubits(), 4);
        assert_eq!(obs.terms().len(), 2);
        assert_eq!(obs.terms()[0].coefficient, -0.4804);
        assert_eq!(obs.terms()[1].letter_string(), "XXYY");
        let back = Observable::parse(&obs.to_string()).unwrap();
        assert_eq!(back, obs);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(Observable::parse("").is_err());
        assert!(Observable::parse("# only comments").is_err());
        assert!(Observable::parse("1.0 ZZ\n1.0 ZZZ").is_err());
        assert!(Observable::parse("abc ZZ").is_err());
        assert!(Observable::parse("1.0 ZQ").is_err());
        assert!(Observable::parse("1.0").is_err());
        assert!(Observable::parse("1.0 ZZ extra").is_err());
    }

    #[test]
    fn qubit_mismatch_is_error() {
        let z = Observable::single(1.0, vec![Pauli::Z]).unwrap();
        assert!(expectation(&StateVector::zero(2).unwrap(), &z).is_err());
    }
}
