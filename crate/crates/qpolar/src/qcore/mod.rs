//! Finite-dimensional quantum primitives: complex matrices with Hermitian
//! eigendecomposition as the single numerical workhorse, states with labeled
//! subsystem structure, Kraus channels with Stinespring dilations, and
//! classical-quantum hybrid states that exploit block orthogonality.

pub mod channel;
pub mod dims;
pub mod hybrid;
pub mod linalg;
pub mod random;
pub mod state;

pub use channel::{Isometry, KrausChannel};
pub use dims::DimList;
pub use hybrid::{CqChannel, HybridCqState};
pub use linalg::{
    dagger, eigh, entropy_bits, fidelity_mats, is_hermitian, kron, sqrtm_psd, trace_norm, CMat,
    CVec,
};
pub use state::{DensityOperator, PureState};

use crate::Result;

/// Bhattacharyya-type fidelity Tr |√a √b| between two density operators.
///
/// For pure states this is the absolute overlap |⟨a|b⟩|; it is 0 exactly for
/// orthogonal states and 1 for identical ones.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dims().total() != b.dims().total() {
        return Err(crate::Error::DimensionMismatch(format!(
            "fidelity arguments (dims {} vs {})",
            a.dims().total(),
            b.dims().total()
        )));
    }
    fidelity_mats(a.matrix(), b.matrix())
}

/// Von Neumann entropy in bits, −Σ λ log₂ λ with 0·log 0 = 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.entropy_bits()
}

/// Symmetric Holevo information of a binary cq channel,
/// H((ρ₀+ρ₁)/2) − (H(ρ₀)+H(ρ₁))/2, in bits.
pub fn holevo_information(w: &CqChannel) -> Result<f64> {
    w.holevo_information()
}

/// Output fidelity of a binary cq channel: the hybrid fidelity of its two
/// output states. 0 means perfectly distinguishable, 1 means useless.
pub fn channel_fidelity(w: &CqChannel) -> Result<f64> {
    w.fidelity()
}

/// Blockwise fidelity of two cq hybrids sharing the same classical labels and
/// weights: Σ_label weight · fidelity(block_a, block_b). Equals the dense
/// fidelity of the expanded block-diagonal operators.
pub fn hybrid_fidelity(a: &HybridCqState, b: &HybridCqState) -> Result<f64> {
    a.fidelity_with(b)
}

/// Stinespring dilation of a Kraus channel into an isometry A' → B ⊗ R with
/// the smallest exact environment (Kraus list canonicalized by a Choi
/// eigendecomposition, rank noise below `RANK_TRUNCATION_TOL` dropped).
pub fn stinespring(ch: &KrausChannel) -> Result<Isometry> {
    ch.stinespring_minimal()
}

/// Conditional entropy H(X|Y) = H(XY) − H(Y) on a labeled density operator,
/// where `x` and `y` are disjoint label sets.
pub fn conditional_entropy(s: &DensityOperator, x: &[&str], y: &[&str]) -> Result<f64> {
    let mut xy: Vec<&str> = x.to_vec();
    xy.extend_from_slice(y);
    let h_xy = s.partial_trace(&xy)?.entropy_bits();
    let h_y = if y.is_empty() {
        0.0
    } else {
        s.partial_trace(y)?.entropy_bits()
    };
    Ok(h_xy - h_y)
}

/// Mutual information I(X;Y) = H(X) + H(Y) − H(XY) on a labeled density
/// operator, with `x` and `y` disjoint label sets.
pub fn mutual_information(s: &DensityOperator, x: &[&str], y: &[&str]) -> Result<f64> {
    let mut xy: Vec<&str> = x.to_vec();
    xy.extend_from_slice(y);
    let h_x = s.partial_trace(x)?.entropy_bits();
    let h_y = s.partial_trace(y)?.entropy_bits();
    let h_xy = s.partial_trace(&xy)?.entropy_bits();
    Ok(h_x + h_y - h_xy)
}

/// Binary entropy h₂(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}
