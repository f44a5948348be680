use std::fmt;
use std::str::FromStr;

use super::{Gate, Pauli, StabilizerError};

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// i-power exponent (mod 4) picked up by the product `a·b` of two packed
/// Pauli words, as (count of +1 contributions) - (count of -1 contributions).
#[inline]
pub(crate) fn product_phase_word(x1: u64, z1: u64, x2: u64, z2: u64) -> i64 {
    // XY = iZ, YZ = iX, ZX = iY; reversed orders give -i.
    let x_only1 = x1 & !z1;
    let y1 = x1 & z1;
    let z_only1 = !x1 & z1;
    let x_only2 = x2 & !z2;
    let y2 = x2 & z2;
    let z_only2 = !x2 & z2;
    let plus = (x_only1 & y2) | (y1 & z_only2) | (z_only1 & x_only2);
    let minus = (y1 & x_only2) | (z_only1 & y2) | (x_only1 & z_only2);
    i64::from(plus.count_ones()) - i64::from(minus.count_ones())
}

/// Pauli operator `i^phase · ⊗_q σ(x_q, z_q)` on `n` qubits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    /// Builds a string from `(qubit, letter)` pairs; later entries overwrite.
    pub fn from_sparse(n: usize, terms: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut s = Self::identity(n);
        for (q, p) in terms {
            s.set(q, p);
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Phase as a power of `i` in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase % 4;
    }

    /// `true` for an overall sign of -1 (phase exponent 2).
    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | (u64::from(xb) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | (u64::from(zb) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .flat_map(|(w, (&xw, &zw))| {
                let mut m = xw | zw;
                std::iter::from_fn(move || {
                    if m == 0 {
                        return None;
                    }
                    let b = m.trailing_zeros() as usize;
                    m &= m - 1;
                    Some((w * 64 + b, b))
                })
                .map(move |(q, b)| (q, Pauli::from_bits((xw >> b) & 1 == 1, (zw >> b) & 1 == 1)))
            })
    }

    /// Symplectic inner product is zero.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.n, other.n, "commutation of strings of different length");
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        acc == 0
    }

    /// `self ← self · rhs`, phases included.
    pub fn mul_assign_right(&mut self, rhs: &PauliString) {
        assert_eq!(self.n, rhs.n, "product of strings of different length");
        let mut e: i64 = i64::from(self.phase) + i64::from(rhs.phase);
        for i in 0..self.x.len() {
            e += product_phase_word(self.x[i], self.z[i], rhs.x[i], rhs.z[i]);
            self.x[i] ^= rhs.x[i];
            self.z[i] ^= rhs.z[i];
        }
        self.phase = e.rem_euclid(4) as u8;
    }

    pub fn mul(&self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }

    /// XOR of the bit parts, ignoring phase (composition of Pauli frames).
    pub fn xor_bits(&mut self, rhs: &PauliString) {
        for i in 0..self.x.len() {
            self.x[i] ^= rhs.x[i];
            self.z[i] ^= rhs.z[i];
        }
    }

    /// Restriction to the listed qubits (in that order), phase kept.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString::from_sparse(qubits.len(), qubits.iter().enumerate().map(|(i, &q)| (i, self.get(q))))
    }

    /// Conjugation `P ← G P G†`.
    pub fn conjugate(&mut self, gate: Gate) {
        let bit = |v: &[u64], q: usize| (v[q / 64] >> (q % 64)) & 1 == 1;
        let flip = |v: &mut [u64], q: usize| v[q / 64] ^= 1 << (q % 64);
        let negate;
        match gate {
            Gate::H(q) => {
                let (xb, zb) = (bit(&self.x, q), bit(&self.z, q));
                negate = xb & zb;
                if xb != zb {
                    flip(&mut self.x, q);
                    flip(&mut self.z, q);
                }
            }
            Gate::S(q) => {
                let (xb, zb) = (bit(&self.x, q), bit(&self.z, q));
                negate = xb & zb;
                if xb {
                    flip(&mut self.z, q);
                }
            }
            Gate::Sdg(q) => {
                let (xb, zb) = (bit(&self.x, q), bit(&self.z, q));
                negate = xb & !zb;
                if xb {
                    flip(&mut self.z, q);
                }
            }
            Gate::X(q) => negate = bit(&self.z, q),
            Gate::Z(q) => negate = bit(&self.x, q),
            Gate::Y(q) => negate = bit(&self.x, q) ^ bit(&self.z, q),
            Gate::Cz(a, b) => {
                let (xa, za, xb, zb) = (bit(&self.x, a), bit(&self.z, a), bit(&self.x, b), bit(&self.z, b));
                negate = xa & xb & (za ^ zb);
                if xb {
                    flip(&mut self.z, a);
                }
                if xa {
                    flip(&mut self.z, b);
                }
            }
            Gate::Cx(c, t) => {
                let (xc, zc, xt, zt) = (bit(&self.x, c), bit(&self.z, c), bit(&self.x, t), bit(&self.z, t));
                negate = xc & zt & !(xt ^ zc);
                if xc {
                    flip(&mut self.x, t);
                }
                if zt {
                    flip(&mut self.z, c);
                }
            }
        }
        if negate {
            self.negate();
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = StabilizerError;

    /// Parses `+XZI`, `-IYX`, `+iZZ`, `-iXY` or an unsigned `XZ`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || StabilizerError::Parse(s.to_string());
        let (mut phase, rest) = match s.as_bytes().first() {
            Some(b'+') => (0u8, &s[1..]),
            Some(b'-') => (2u8, &s[1..]),
            _ => (0u8, s),
        };
        let rest = if let Some(r) = rest.strip_prefix('i') {
            phase += 1;
            r
        } else {
            rest
        };
        let mut out = PauliString::identity(rest.chars().count());
        for (q, c) in rest.chars().enumerate() {
            let p = match c {
                'I' | '_' | '.' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(err()),
            };
            out.set(q, p);
        }
        out.phase = phase;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(ps("X").mul(&ps("Y")), ps("+iZ"));
        assert_eq!(ps("Y").mul(&ps("X")), ps("-iZ"));
        assert_eq!(ps("Z").mul(&ps("X")), ps("+iY"));
        assert_eq!(ps("Y").mul(&ps("Z")), ps("+iX"));
        assert_eq!(ps("Y").mul(&ps("Y")), ps("+I"));
        assert_eq!(ps("XZ").mul(&ps("ZX")), ps("+YY"));
    }

    #[test]
    fn commutation_is_symplectic() {
        assert!(ps("XX").commutes_with(&ps("ZZ")));
        assert!(!ps("XI").commutes_with(&ps("ZI")));
        assert!(ps("XZZ").commutes_with(&ps("ZXI")));
    }

    #[test]
    fn display_round_trip() {
        for s in ["+XZI", "-IYX", "+iZZ", "-iXY"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert!("+XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn conjugation_rules() {
        let mut p = ps("X");
        p.conjugate(Gate::S(0));
        assert_eq!(p, ps("+Y"));
        p.conjugate(Gate::S(0));
        assert_eq!(p, ps("-X"));
        let mut q = ps("Y");
        q.conjugate(Gate::Sdg(0));
        assert_eq!(q, ps("+X"));
        let mut r = ps("YX");
        r.conjugate(Gate::Cz(0, 1));
        assert_eq!(r, ps("-XY"));
        let mut c = ps("XI");
        c.conjugate(Gate::Cx(0, 1));
        assert_eq!(c, ps("+XX"));
        let mut d = ps("IZ");
        d.conjugate(Gate::Cx(0, 1));
        assert_eq!(d, ps("+ZZ"));
    }

    #[test]
    fn support_enumeration_spans_words() {
        let mut p = PauliString::identity(130);
        p.set(3, Pauli::X);
        p.set(64, Pauli::Y);
        p.set(129, Pauli::Z);
        let s: Vec<_> = p.support().collect();
        assert_eq!(s, vec![(3, Pauli::X), (64, Pauli::Y), (129, Pauli::Z)]);
        assert_eq!(p.weight(), 3);
    }
}
