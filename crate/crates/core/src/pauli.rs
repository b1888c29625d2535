//! n-qubit Pauli operators with exact phase tracking.

use std::fmt;

use crate::error::{CtqecError, Result};
use crate::linalg::{identity, tensor, CMatrix, C64, ONE};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let z = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => identity(2),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[z, ONE, ONE, z]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, z, z, -ONE]),
        }
    }

    /// Product of two letters as (phase power of i, resulting letter).
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// An element of the n-fold Pauli group: phase i^p times a letter string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    /// Phase exponent: the operator carries the global phase i^phase_power.
    pub phase_power: u8,
    pub letters: Vec<Pauli>,
}

impl PauliOperator {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self {
            phase_power: 0,
            letters,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// Parse a letter string such as "ZZI".
    pub fn parse(s: &str) -> Result<Self> {
        let letters: Option<Vec<Pauli>> = s.trim().chars().map(Pauli::from_char).collect();
        letters
            .filter(|l| !l.is_empty())
            .map(Self::new)
            .ok_or_else(|| CtqecError::InvalidParameter(format!("invalid Pauli string {s:?}")))
    }

    /// Single-letter operator on qubit `q` of an n-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[q] = p;
        Self::new(letters)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Group composition `self * other`, tracking the exact phase.
    pub fn compose(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.num_qubits() != other.num_qubits() {
            return Err(CtqecError::DimensionMismatch {
                expected: self.num_qubits(),
                got: other.num_qubits(),
            });
        }
        let mut phase = (self.phase_power + other.phase_power) % 4;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.mul(b);
                phase = (phase + p) % 4;
                l
            })
            .collect();
        Ok(PauliOperator {
            phase_power: phase,
            letters,
        })
    }

    /// True iff the two operators commute (symplectic inner product 0).
    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Dense 2^n x 2^n matrix including the phase.
    pub fn matrix(&self) -> CMatrix {
        let phase = C64::new(0.0, 1.0).powu(self.phase_power as u32);
        let mut m = CMatrix::identity(1, 1);
        for &p in &self.letters {
            m = tensor(&m, &p.matrix());
        }
        m.map(|z| z * phase)
    }

    /// Same letters, phase discarded.
    pub fn unsigned(&self) -> PauliOperator {
        PauliOperator::new(self.letters.clone())
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase_power {
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => {}
        }
        for p in &self.letters {
            write!(f, "{:?}", p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_norm;

    #[test]
    fn parse_and_display() {
        let p = PauliOperator::parse("ZZI").unwrap();
        assert_eq!(p.to_string(), "ZZI");
        assert_eq!(p.weight(), 2);
        assert!(PauliOperator::parse("ZQ").is_err());
        assert!(PauliOperator::parse("").is_err());
    }

    #[test]
    fn composition_tracks_phase() {
        let x = PauliOperator::parse("X").unwrap();
        let y = PauliOperator::parse("Y").unwrap();
        let xy = x.compose(&y).unwrap();
        // XY = iZ
        assert_eq!(xy.phase_power, 1);
        assert_eq!(xy.letters, vec![Pauli::Z]);
        let matrix = x.matrix() * y.matrix();
        assert!(max_norm(&(matrix - xy.matrix())) < 1e-15);
    }

    #[test]
    fn composition_closure_matches_matrices() {
        let strings = ["XZ", "YY", "ZI", "XY"];
        for a in strings {
            for b in strings {
                let pa = PauliOperator::parse(a).unwrap();
                let pb = PauliOperator::parse(b).unwrap();
                let prod = pa.compose(&pb).unwrap();
                assert!(max_norm(&(pa.matrix() * pb.matrix() - prod.matrix())) < 1e-15);
            }
        }
    }

    #[test]
    fn commutation_symmetric_and_matches_symplectic() {
        let a = PauliOperator::parse("XXI").unwrap();
        let b = PauliOperator::parse("ZZI").unwrap();
        let c = PauliOperator::parse("ZIZ").unwrap();
        assert!(a.commutes_with(&b));
        assert!(b.commutes_with(&a));
        assert!(!a.commutes_with(&c));
        assert!(!c.commutes_with(&a));
        // Matrix-level check: AB = ±BA.
        let ab = a.matrix() * c.matrix();
        let ba = c.matrix() * a.matrix();
        assert!(max_norm(&(ab + ba)) < 1e-15);
    }
}
