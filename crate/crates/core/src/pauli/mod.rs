//! Bit-packed GF(2) symplectic stabilizer algebra.
//!
//! A Pauli operator on `n` qubits is stored as two bit vectors (`x`, `z`) and
//! an overall power of `i`. The single-qubit letter at position `q` is read
//! off the pair `(x_q, z_q)`: `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`, `(0,1)=Z`.
//! Two strings commute iff their symplectic inner product
//! `x·z' + z·x'` vanishes mod 2.
//!
//! [`StabilizerTableau`] holds `n` destabilizer and `n` stabilizer rows in a
//! qubit-major packed layout (see [`packed`]), so that Clifford gates are
//! word-parallel over rows.

mod graph_form;
pub(crate) mod packed;
mod string;
mod tableau;

pub use string::PauliString;
pub use tableau::{MeasurementDetail, StabilizerTableau};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        !((x1 & z2) ^ (z1 & x2))
    }
}

/// Measurement basis for a single qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn from_pauli(p: Pauli) -> Option<Basis> {
        match p {
            Pauli::X => Some(Basis::X),
            Pauli::Y => Some(Basis::Y),
            Pauli::Z => Some(Basis::Z),
            Pauli::I => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pauli().letter())
    }
}

/// Eigenvalue observed by a projective Pauli measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Outcome {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    /// `false` for +1, `true` for -1.
    pub fn bit(self) -> bool {
        self == Outcome::Minus
    }

    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        Outcome::from_bit(!self.bit())
    }

    /// Outcome multiplied by a sign (`negate` = multiply by -1).
    pub fn times(self, negate: bool) -> Self {
        Outcome::from_bit(self.bit() ^ negate)
    }

    /// Random outcome from a uniform draw in `[0, 1)` against P(+1).
    pub fn from_draw(draw: f64, p_plus: f64) -> Self {
        Outcome::from_bit(draw >= p_plus)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

/// Clifford gates understood by the stabilizer backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cz(usize, usize),
    /// Control, target.
    Cx(usize, usize),
}

impl Gate {
    pub fn targets(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                ([q, q], 1)
            }
            Gate::Cz(a, b) | Gate::Cx(a, b) => ([a, b], 2),
        }
    }

    pub fn inverse(self) -> Gate {
        match self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            g => g,
        }
    }

    pub(crate) fn check(&self, n: usize) -> Result<(), StabilizerError> {
        let (t, k) = self.targets();
        for &q in &t[..k] {
            if q >= n {
                return Err(StabilizerError::QubitOutOfRange { qubit: q, n });
            }
        }
        if k == 2 && t[0] == t[1] {
            return Err(StabilizerError::DuplicateTargets(t[0]));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilizerError {
    #[error("qubit count must be at least 1")]
    InvalidSize,
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("two-qubit gate targets must differ (both {0})")]
    DuplicateTargets(usize),
    #[error("size mismatch: tableau has {expected} qubits, operand has {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("operator with phase ±i is not an observable")]
    NonHermitian,
    #[error("requested outcome has zero probability")]
    ImpossibleOutcome,
    #[error("qubit {0} is entangled with the rest of the register")]
    Entangled(usize),
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
}
