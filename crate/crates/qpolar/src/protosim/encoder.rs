//! The combining network as an explicit operator on block-length many qubits.

use num_complex::Complex64;

use crate::polarize::PolarTransform;
use crate::qcore::Isometry;
use crate::qcore::linalg::CMat;
use crate::{Error, Result};

/// Largest wire count for which the encoder is materialized as a dense
/// matrix. The protocol pipeline never builds this matrix (it applies the
/// basis permutation of [`encoding_permutation`] directly to state vectors),
/// so the cap only limits callers who want the unitary itself.
const MAX_DENSE_ENCODER_WIRES: usize = 10;

/// Largest wire count for which the basis permutation table is materialized.
const MAX_PERMUTATION_WIRES: usize = 16;

/// The encoding unitary U|u> = |uG> on the block of wires, wire 1 being the
/// most significant bit of the basis index. U is a permutation of basis
/// states, and its own inverse, because the transform matrix is an involution
/// over GF(2).
pub fn build_encoder(t: &PolarTransform) -> Result<Isometry> {
    let wires = t.size();
    if wires > MAX_DENSE_ENCODER_WIRES {
        return Err(Error::BudgetExceeded(format!(
            "dense encoder on {wires} wires needs a 2^{wires} x 2^{wires} matrix; \
             apply the basis permutation to states instead"
        )));
    }
    let dim = 1usize << wires;
    let mut m = CMat::zeros(dim, dim);
    for u in 0..dim {
        m[(t.encode_basis_index(u), u)] = Complex64::new(1.0, 0.0);
    }
    Isometry::new(m)
}

/// The same unitary as a basis permutation: entry u holds the index of uG.
pub fn encoding_permutation(t: &PolarTransform) -> Result<Vec<usize>> {
    let wires = t.size();
    if wires > MAX_PERMUTATION_WIRES {
        return Err(Error::BudgetExceeded(format!(
            "encoding permutation over {wires} wires exceeds the state-vector budget \
             of 2^{MAX_PERMUTATION_WIRES} basis states"
        )));
    }
    Ok((0..(1usize << wires)).map(|u| t.encode_basis_index(u)).collect())
}
