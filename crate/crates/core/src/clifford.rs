//! The 24-element single-qubit Clifford group (modulo global phase).
//!
//! An element is identified by its conjugation action on `X` and `Z`:
//! `C X C† = ±P`, `C Z C† = ±Q` with `P ≠ Q` both non-identity. Products are
//! read from an exact multiplication table built from those actions, so sign
//! bookkeeping never touches floating point.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::pauli::{Gate, Pauli};

/// Signed single-qubit Pauli (`negative` = overall -1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub pauli: Pauli,
    pub negative: bool,
}

impl SignedPauli {
    pub const fn new(pauli: Pauli, negative: bool) -> Self {
        Self { pauli, negative }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Action {
    x: SignedPauli,
    z: SignedPauli,
}

/// Elementary gate letters that generate the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordLetter {
    H,
    S,
}

struct Tables {
    actions: Vec<Action>,
    mul: Vec<[u8; 24]>,
    inv: [u8; 24],
    /// Shortest H/S word, in application order (first letter acts first).
    words: Vec<Vec<CliffordLetter>>,
}

/// `i`-power of the product `a·b` of two non-identity letters, with the result letter.
fn letter_product(a: Pauli, b: Pauli) -> (Pauli, u8) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (p, 0),
        (X, X) | (Y, Y) | (Z, Z) => (I, 0),
        (X, Y) => (Z, 1),
        (Y, X) => (Z, 3),
        (Y, Z) => (X, 1),
        (Z, Y) => (X, 3),
        (Z, X) => (Y, 1),
        (X, Z) => (Y, 3),
    }
}

impl Action {
    fn image(&self, p: Pauli) -> SignedPauli {
        match p {
            Pauli::I => SignedPauli::new(Pauli::I, false),
            Pauli::X => self.x,
            Pauli::Z => self.z,
            Pauli::Y => {
                // Y = i X Z  ⇒  C Y C† = i (C X C†)(C Z C†).
                let (l, e) = letter_product(self.x.pauli, self.z.pauli);
                let e = (1 + e) % 4;
                debug_assert!(e % 2 == 0, "image of Y must be Hermitian");
                SignedPauli::new(l, (e == 2) ^ self.x.negative ^ self.z.negative)
            }
        }
    }

    /// Action of `self · other` (other applied first).
    fn compose(&self, other: &Action) -> Action {
        let through = |sp: SignedPauli| {
            let img = self.image(sp.pauli);
            SignedPauli::new(img.pauli, img.negative ^ sp.negative)
        };
        Action {
            x: through(other.x),
            z: through(other.z),
        }
    }
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut actions = Vec::with_capacity(24);
        // Identity first so that index 0 is the identity.
        for &px in &[Pauli::X, Pauli::Y, Pauli::Z] {
            for &pz in &[Pauli::Z, Pauli::X, Pauli::Y] {
                if px == pz {
                    continue;
                }
                for sx in [false, true] {
                    for sz in [false, true] {
                        actions.push(Action {
                            x: SignedPauli::new(px, sx),
                            z: SignedPauli::new(pz, sz),
                        });
                    }
                }
            }
        }
        debug_assert_eq!(actions.len(), 24);
        let index_of = |a: &Action| actions.iter().position(|b| b == a).expect("closed group") as u8;
        let mut mul = vec![[0u8; 24]; 24];
        for i in 0..24 {
            for j in 0..24 {
                mul[i][j] = index_of(&actions[i].compose(&actions[j]));
            }
        }
        let mut inv = [0u8; 24];
        for i in 0..24 {
            inv[i] = (0..24).find(|&j| mul[i][j] == 0).expect("inverse exists") as u8;
        }
        let h = index_of(&Action {
            x: SignedPauli::new(Pauli::Z, false),
            z: SignedPauli::new(Pauli::X, false),
        });
        let s = index_of(&Action {
            x: SignedPauli::new(Pauli::Y, false),
            z: SignedPauli::new(Pauli::Z, false),
        });
        // Breadth-first search for shortest words; appending a letter g to a
        // word for c gives the element g·c.
        let mut words: Vec<Option<Vec<CliffordLetter>>> = vec![None; 24];
        words[0] = Some(Vec::new());
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &c in &frontier {
                for (g, letter) in [(h, CliffordLetter::H), (s, CliffordLetter::S)] {
                    let e = mul[g as usize][c] as usize;
                    if words[e].is_none() {
                        let mut w = words[c].clone().unwrap();
                        w.push(letter);
                        words[e] = Some(w);
                        next.push(e);
                    }
                }
            }
            frontier = next;
        }
        Tables {
            actions,
            mul,
            inv,
            words: words.into_iter().map(|w| w.expect("H and S generate the group")).collect(),
        }
    })
}

/// Element of the single-qubit Clifford group modulo phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalClifford(u8);

impl Default for LocalClifford {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl LocalClifford {
    pub const IDENTITY: LocalClifford = LocalClifford(0);

    pub fn all() -> impl Iterator<Item = LocalClifford> {
        (0..24u8).map(LocalClifford)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn from_index(i: u8) -> Option<Self> {
        (i < 24).then_some(LocalClifford(i))
    }

    fn from_action(x: SignedPauli, z: SignedPauli) -> Self {
        let t = tables();
        let a = Action { x, z };
        LocalClifford(t.actions.iter().position(|b| *b == a).expect("valid Clifford action") as u8)
    }

    pub fn h() -> Self {
        Self::from_action(SignedPauli::new(Pauli::Z, false), SignedPauli::new(Pauli::X, false))
    }

    pub fn s() -> Self {
        Self::from_action(SignedPauli::new(Pauli::Y, false), SignedPauli::new(Pauli::Z, false))
    }

    pub fn sdg() -> Self {
        Self::s().inverse()
    }

    pub fn pauli(p: Pauli) -> Self {
        let neg_x = matches!(p, Pauli::Y | Pauli::Z);
        let neg_z = matches!(p, Pauli::X | Pauli::Y);
        Self::from_action(SignedPauli::new(Pauli::X, neg_x), SignedPauli::new(Pauli::Z, neg_z))
    }

    /// `e^{iπ/4 X}`, up to phase: X ↦ X, Z ↦ Y.
    pub fn sqrt_x_dagger() -> Self {
        Self::from_action(SignedPauli::new(Pauli::X, false), SignedPauli::new(Pauli::Y, false))
    }

    pub fn from_gate_letter(l: CliffordLetter) -> Self {
        match l {
            CliffordLetter::H => Self::h(),
            CliffordLetter::S => Self::s(),
        }
    }

    /// Operator product `self · rhs` (`rhs` acts first).
    pub fn mul(self, rhs: LocalClifford) -> LocalClifford {
        LocalClifford(tables().mul[self.0 as usize][rhs.0 as usize])
    }

    pub fn inverse(self) -> LocalClifford {
        LocalClifford(tables().inv[self.0 as usize])
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    /// `C P C†`.
    pub fn conjugate(self, p: Pauli) -> SignedPauli {
        tables().actions[self.0 as usize].image(p)
    }

    /// `C† P C`.
    pub fn conjugate_inverse(self, p: Pauli) -> SignedPauli {
        self.inverse().conjugate(p)
    }

    /// Diagonal elements (the powers of S, possibly times Z) map Z to +Z.
    pub fn is_diagonal(self) -> bool {
        self.conjugate(Pauli::Z) == SignedPauli::new(Pauli::Z, false)
    }

    /// Shortest H/S word in application order.
    pub fn word(self) -> &'static [CliffordLetter] {
        &tables().words[self.0 as usize]
    }

    /// Gates (application order) realizing this element on qubit `q`.
    pub fn gates(self, q: usize) -> impl Iterator<Item = Gate> {
        self.word().iter().map(move |l| match l {
            CliffordLetter::H => Gate::H(q),
            CliffordLetter::S => Gate::S(q),
        })
    }

    /// A 2×2 unitary representative, row-major.
    pub fn unitary(self) -> [[Complex64; 2]; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = [[Complex64::new(r, 0.0), Complex64::new(r, 0.0)], [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]];
        let s = [[one, zero], [zero, Complex64::new(0.0, 1.0)]];
        let mut u = [[one, zero], [zero, one]];
        for l in self.word() {
            let g = match l {
                CliffordLetter::H => h,
                CliffordLetter::S => s,
            };
            u = mat2_mul(&g, &u);
        }
        u
    }
}

pub(crate) fn mat2_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl std::ops::Mul for LocalClifford {
    type Output = LocalClifford;
    fn mul(self, rhs: LocalClifford) -> LocalClifford {
        LocalClifford::mul(self, rhs)
    }
}

impl fmt::Display for LocalClifford {
    /// Operator-order product of `H`/`S` letters (rightmost acts first), `I` for identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.word();
        if w.is_empty() {
            return f.write_str("I");
        }
        for l in w.iter().rev() {
            f.write_str(match l {
                CliffordLetter::H => "H",
                CliffordLetter::S => "S",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalClifford({self})")
    }
}

impl FromStr for LocalClifford {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "I" {
            return Ok(Self::IDENTITY);
        }
        let mut acc = Self::IDENTITY;
        for c in s.chars() {
            let g = match c {
                'H' => Self::h(),
                'S' => Self::s(),
                _ => return Err(format!("invalid Clifford word {s:?}")),
            };
            acc = acc * g;
        }
        Ok(acc)
    }
}
