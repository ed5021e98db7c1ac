//! The GF(2) combining transform: G = B·F^{⊗n} with F the two-bit kernel
//! [[1,0],[1,1]] and B the bit-reversal permutation. G is an involution
//! (F² = I mod 2 and B commutes with F^{⊗n}), so encoding is its own inverse.

use crate::{Error, Result};

/// Largest depth for which the dense GF(2) matrix is materialized.
const MAX_TRANSFORM_DEPTH: u32 = 12;

#[derive(Clone, Debug)]
pub struct PolarTransform {
    n: u32,
    bit_reversal: bool,
    rows: Vec<Vec<u8>>,
}

impl PolarTransform {
    pub fn new(n: u32, bit_reversal: bool) -> Result<Self> {
        if n > MAX_TRANSFORM_DEPTH {
            return Err(Error::BudgetExceeded(format!(
                "transform depth {n} exceeds {MAX_TRANSFORM_DEPTH} (dense GF(2) matrix)"
            )));
        }
        let nn = 1usize << n;
        let mut rows = vec![vec![0u8; nn]; nn];
        for (i, row) in rows.iter_mut().enumerate() {
            let src = if bit_reversal { reverse_bits(i, n) } else { i };
            for (j, v) in row.iter_mut().enumerate() {
                // F^{⊗n}[i][j] = Π_k F[i_k][j_k]: zero exactly when some bit
                // has i_k = 0, j_k = 1, i.e. unless j's bits are a subset of i's.
                *v = u8::from(j & !src == 0);
            }
        }
        Ok(PolarTransform {
            n,
            bit_reversal,
            rows,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    pub fn bit_reversal(&self) -> bool {
        self.bit_reversal
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// Rows of the transpose, for the phase-variable direction.
    pub fn transposed_rows(&self) -> Vec<Vec<u8>> {
        let nn = self.size();
        let mut t = vec![vec![0u8; nn]; nn];
        for i in 0..nn {
            for j in 0..nn {
                t[j][i] = self.rows[i][j];
            }
        }
        t
    }

    /// x = u·G over GF(2).
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        let nn = self.size();
        if u.len() != nn {
            return Err(Error::DimensionMismatch(format!(
                "encoding {} bits through a {nn}-bit transform",
                u.len()
            )));
        }
        let mut x = vec![0u8; nn];
        for (i, &b) in u.iter().enumerate() {
            if b & 1 == 1 {
                for (xj, &g) in x.iter_mut().zip(&self.rows[i]) {
                    *xj ^= g;
                }
            }
        }
        Ok(x)
    }

    /// Encode a flat basis index (wire 1 = most significant bit), the form
    /// the coherent encoder's basis permutation wants.
    pub fn encode_basis_index(&self, u: usize) -> usize {
        let nn = self.size();
        let mut x = 0usize;
        for i in 0..nn {
            if (u >> (nn - 1 - i)) & 1 == 1 {
                for (j, &g) in self.rows[i].iter().enumerate() {
                    if g == 1 {
                        x ^= 1 << (nn - 1 - j);
                    }
                }
            }
        }
        x
    }
}

pub(crate) fn reverse_bits(i: usize, n: u32) -> usize {
    let mut out = 0usize;
    for k in 0..n {
        if (i >> k) & 1 == 1 {
            out |= 1 << (n - 1 - k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_depth_one() {
        let t = PolarTransform::new(1, true).unwrap();
        assert_eq!(t.rows(), &[vec![1, 0], vec![1, 1]]);
        assert_eq!(t.encode(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(t.encode(&[0, 1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn transform_is_involution() {
        for bit_reversal in [true, false] {
            let t = PolarTransform::new(3, bit_reversal).unwrap();
            for u in 0..t.size() {
                let bits: Vec<u8> = (0..t.size()).map(|k| ((u >> (7 - k)) & 1) as u8).collect();
                let once = t.encode(&bits).unwrap();
                let twice = t.encode(&once).unwrap();
                assert_eq!(bits, twice, "u = {u}, bit_reversal = {bit_reversal}");
            }
        }
    }

    #[test]
    fn bit_reversal_commutes_through() {
        // B·F^{⊗n} = F^{⊗n}·B: the reversed-row matrix equals the
        // reversed-column matrix.
        let plain = PolarTransform::new(3, false).unwrap();
        let rev = PolarTransform::new(3, true).unwrap();
        let nn = plain.size();
        for i in 0..nn {
            for j in 0..nn {
                assert_eq!(rev.rows()[i][j], plain.rows()[i][reverse_bits(j, 3)]);
            }
        }
    }

    #[test]
    fn basis_index_encoding_matches_bitwise() {
        let t = PolarTransform::new(2, true).unwrap();
        for u in 0..16usize {
            let bits: Vec<u8> = (0..4).map(|k| ((u >> (3 - k)) & 1) as u8).collect();
            let x = t.encode(&bits).unwrap();
            let flat: usize = x.iter().fold(0, |acc, &b| (acc << 1) | b as usize);
            assert_eq!(t.encode_basis_index(u), flat);
        }
    }

    #[test]
    fn depth_budget_enforced() {
        assert!(PolarTransform::new(13, true).is_err());
    }
}
