//! Qubit-major packed row storage.
//!
//! Rows are grouped into slabs of 64. For slab `b` and qubit `q`, word
//! `xs[b * qubits + q]` holds the X bits of rows `64b..64b+63` on qubit `q`
//! (bit `r % 64` for row `r`); `zs` likewise. Single-qubit and two-qubit
//! gates are therefore a handful of word operations per slab, and reading a
//! whole row is a contiguous scan of one slab.

use super::{Gate, Pauli, PauliString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PackedRows {
    rows: usize,
    qubits: usize,
    slabs: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<u64>,
}

/// Mask over rows, one word per slab.
pub(crate) type RowMask = Vec<u64>;

impl PackedRows {
    pub fn zeros(rows: usize, qubits: usize) -> Self {
        let slabs = rows.div_ceil(64);
        Self {
            rows,
            qubits,
            slabs,
            xs: vec![0; slabs * qubits],
            zs: vec![0; slabs * qubits],
            signs: vec![0; slabs],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn slabs(&self) -> usize {
        self.slabs
    }

    #[inline]
    fn idx(&self, slab: usize, q: usize) -> usize {
        slab * self.qubits + q
    }

    #[inline]
    pub fn get(&self, row: usize, q: usize) -> (bool, bool) {
        let i = self.idx(row / 64, q);
        let b = row % 64;
        ((self.xs[i] >> b) & 1 == 1, (self.zs[i] >> b) & 1 == 1)
    }

    #[inline]
    pub fn set(&mut self, row: usize, q: usize, x: bool, z: bool) {
        let i = self.idx(row / 64, q);
        let b = row % 64;
        self.xs[i] = (self.xs[i] & !(1 << b)) | (u64::from(x) << b);
        self.zs[i] = (self.zs[i] & !(1 << b)) | (u64::from(z) << b);
    }

    /// Raw X word of `slab` on qubit `q`.
    #[inline]
    pub fn x_word(&self, slab: usize, q: usize) -> u64 {
        self.xs[self.idx(slab, q)]
    }

    #[inline]
    pub fn z_word(&self, slab: usize, q: usize) -> u64 {
        self.zs[self.idx(slab, q)]
    }

    /// ORs bits of `slab` on qubit `q`.
    #[inline]
    pub fn or_words(&mut self, slab: usize, q: usize, x: u64, z: u64) {
        let i = self.idx(slab, q);
        self.xs[i] |= x;
        self.zs[i] |= z;
    }

    #[inline]
    pub fn sign(&self, row: usize) -> bool {
        (self.signs[row / 64] >> (row % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_sign(&mut self, row: usize, neg: bool) {
        let b = row % 64;
        let w = &mut self.signs[row / 64];
        *w = (*w & !(1 << b)) | (u64::from(neg) << b);
    }

    /// Mask of rows with a valid index (the last slab may be partial).
    pub fn valid(&self, slab: usize) -> u64 {
        let rem = self.rows - slab * 64;
        if rem >= 64 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    pub fn empty_mask(&self) -> RowMask {
        vec![0; self.slabs]
    }

    /// Rows `lo..hi` as a mask.
    pub fn range_mask(&self, lo: usize, hi: usize) -> RowMask {
        let mut m = self.empty_mask();
        for r in lo..hi {
            m[r / 64] |= 1 << (r % 64);
        }
        m
    }

    /// Rows whose letter on `q` has X bit `x_sel` or Z bit `z_sel` set
    /// (combined by OR).
    pub fn column_mask(&self, q: usize, x_sel: bool, z_sel: bool) -> RowMask {
        (0..self.slabs)
            .map(|b| {
                let i = self.idx(b, q);
                let mut w = 0;
                if x_sel {
                    w |= self.xs[i];
                }
                if z_sel {
                    w |= self.zs[i];
                }
                w
            })
            .collect()
    }

    /// Non-identity entries of a row as `(qubit, x, z)`, ascending by qubit.
    pub fn row_support(&self, row: usize) -> Vec<(usize, bool, bool)> {
        let base = self.idx(row / 64, 0);
        let b = row % 64;
        let xs = &self.xs[base..base + self.qubits];
        let zs = &self.zs[base..base + self.qubits];
        let mut out = Vec::new();
        for q in 0..self.qubits {
            let xb = (xs[q] >> b) & 1;
            let zb = (zs[q] >> b) & 1;
            if xb | zb != 0 {
                out.push((q, xb == 1, zb == 1));
            }
        }
        out
    }

    pub fn row_string(&self, row: usize) -> PauliString {
        let mut p = PauliString::from_sparse(
            self.qubits,
            self.row_support(row)
                .into_iter()
                .map(|(q, x, z)| (q, Pauli::from_bits(x, z))),
        );
        if self.sign(row) {
            p.negate();
        }
        p
    }

    pub fn clear_row(&mut self, row: usize) {
        for (q, _, _) in self.row_support(row) {
            self.set(row, q, false, false);
        }
        self.set_sign(row, false);
    }

    /// Overwrites a row with a Hermitian string (its sign goes to the sign bit).
    pub fn set_row(&mut self, row: usize, p: &PauliString) {
        debug_assert!(p.is_hermitian());
        self.clear_row(row);
        for (q, l) in p.support() {
            let (x, z) = l.bits();
            self.set(row, q, x, z);
        }
        self.set_sign(row, p.is_negative());
    }

    pub fn copy_row(&mut self, src: usize, dst: usize) {
        let p = self.row_string(src);
        self.set_row(dst, &p);
    }

    /// For every row `h` in `mask` (other than `pivot`): `h ← pivot · h`.
    ///
    /// Sign bits are updated assuming the product is Hermitian (the two rows
    /// commute); rows for which that fails get an unspecified sign, which is
    /// harmless for destabilizers.
    pub fn multiply_into(&mut self, mask: &RowMask, pivot: usize) {
        let support = self.row_support(pivot);
        let pivot_sign = self.sign(pivot);
        let (ps, pb) = (pivot / 64, 1u64 << (pivot % 64));
        for b in 0..self.slabs {
            let mut m = mask[b] & self.valid(b);
            if b == ps {
                m &= !pb;
            }
            if m == 0 {
                continue;
            }
            // Bit-sliced mod-4 accumulator of the i-power per row.
            let (mut lo, mut hi) = (0u64, 0u64);
            let base = b * self.qubits;
            for &(q, px, pz) in &support {
                let xh = self.xs[base + q];
                let zh = self.zs[base + q];
                let (plus, minus) = match (px, pz) {
                    (true, false) => (zh & xh, zh & !xh),
                    (false, true) => (xh & !zh, xh & zh),
                    (true, true) => (zh & !xh, xh & !zh),
                    (false, false) => (0, 0),
                };
                let plus = plus & m;
                let minus = minus & m;
                let carry = lo & plus;
                lo ^= plus;
                hi ^= carry;
                let borrow = !lo & minus;
                lo ^= minus;
                hi ^= borrow;
                if px {
                    self.xs[base + q] ^= m;
                }
                if pz {
                    self.zs[base + q] ^= m;
                }
            }
            let ps_word = if pivot_sign { m } else { 0 };
            self.signs[b] ^= (hi ^ ps_word) & m;
        }
    }

    /// Product of the selected rows in ascending order, with full phase.
    pub fn product_of(&self, mask: &RowMask) -> PauliString {
        let mut acc = PauliString::identity(self.qubits);
        for (b, &w) in mask.iter().enumerate() {
            let mut m = w & self.valid(b);
            while m != 0 {
                let r = b * 64 + m.trailing_zeros() as usize;
                m &= m - 1;
                acc.mul_assign_right(&self.row_string(r));
            }
        }
        acc
    }

    /// Symplectic products of `p` against every row, as a mask of the rows that
    /// anticommute with it.
    pub fn anticommuting_with(&self, p: &PauliString) -> RowMask {
        let support: Vec<_> = p.support().collect();
        (0..self.slabs)
            .map(|b| {
                let base = b * self.qubits;
                let mut acc = 0u64;
                for &(q, l) in &support {
                    let (px, pz) = l.bits();
                    if px {
                        acc ^= self.zs[base + q];
                    }
                    if pz {
                        acc ^= self.xs[base + q];
                    }
                }
                acc & self.valid(b)
            })
            .collect()
    }

    pub fn apply(&mut self, gate: Gate) {
        match gate {
            Gate::H(q) => self.for_col(q, |x, z, r| {
                *r ^= *x & *z;
                std::mem::swap(x, z);
            }),
            Gate::S(q) => self.for_col(q, |x, z, r| {
                *r ^= *x & *z;
                *z ^= *x;
            }),
            Gate::Sdg(q) => self.for_col(q, |x, z, r| {
                *r ^= *x & !*z;
                *z ^= *x;
            }),
            Gate::X(q) => self.for_col(q, |_, z, r| *r ^= *z),
            Gate::Z(q) => self.for_col(q, |x, _, r| *r ^= *x),
            Gate::Y(q) => self.for_col(q, |x, z, r| *r ^= *x ^ *z),
            Gate::Cz(a, b) => {
                for s in 0..self.slabs {
                    let (ia, ib) = (self.idx(s, a), self.idx(s, b));
                    let (xa, xb) = (self.xs[ia], self.xs[ib]);
                    let (za, zb) = (self.zs[ia], self.zs[ib]);
                    self.signs[s] ^= xa & xb & (za ^ zb);
                    self.zs[ia] = za ^ xb;
                    self.zs[ib] = zb ^ xa;
                }
            }
            Gate::Cx(c, t) => {
                for s in 0..self.slabs {
                    let (ic, it) = (self.idx(s, c), self.idx(s, t));
                    let (xc, xt) = (self.xs[ic], self.xs[it]);
                    let (zc, zt) = (self.zs[ic], self.zs[it]);
                    self.signs[s] ^= xc & zt & !(xt ^ zc);
                    self.xs[it] = xt ^ xc;
                    self.zs[ic] = zc ^ zt;
                }
            }
        }
    }

    /// A layer of CZ gates on disjoint or overlapping pairs, slab-major for locality.
    pub fn apply_cz_layer(&mut self, pairs: &[(usize, usize)]) {
        for s in 0..self.slabs {
            let base = s * self.qubits;
            let mut sign = self.signs[s];
            for &(a, b) in pairs {
                let (ia, ib) = (base + a, base + b);
                let (xa, xb) = (self.xs[ia], self.xs[ib]);
                let (za, zb) = (self.zs[ia], self.zs[ib]);
                sign ^= xa & xb & (za ^ zb);
                self.zs[ia] = za ^ xb;
                self.zs[ib] = zb ^ xa;
            }
            self.signs[s] = sign;
        }
    }

    #[inline]
    fn for_col(&mut self, q: usize, mut f: impl FnMut(&mut u64, &mut u64, &mut u64)) {
        for s in 0..self.slabs {
            let i = self.idx(s, q);
            let (mut x, mut z) = (self.xs[i], self.zs[i]);
            f(&mut x, &mut z, &mut self.signs[s]);
            self.xs[i] = x;
            self.zs[i] = z;
        }
    }

    /// Exhaustive phase check of a product, used in tests of `multiply_into`.
    #[cfg(test)]
    pub fn row_product_reference(&self, pivot: usize, row: usize) -> PauliString {
        let mut p = self.row_string(pivot);
        p.mul_assign_right(&self.row_string(row));
        p
    }
}
