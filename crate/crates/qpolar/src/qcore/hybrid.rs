//! Classical-quantum hybrids: block-diagonal states Σ_z p_z |z⟩⟨z| ⊗ ρ_z kept
//! as weighted block lists, and binary cq channels. Entropy and fidelity of
//! such states decompose over blocks, which is what makes exact analysis of
//! synthesized channels affordable at interesting sizes.

use super::dims::DimList;
use super::linalg::{self, CMat};
use super::state::DensityOperator;
use crate::{Error, Result, TOL_STRUCTURAL};

/// A cq state with a classical register of `bits` bits. Each entry is
/// (classical label, weight, conditional quantum state); absent labels carry
/// zero weight. Weights must sum to 1.
#[derive(Clone, Debug)]
pub struct HybridCqState {
    bits: u32,
    blocks: Vec<(u64, f64, DensityOperator)>,
}

impl HybridCqState {
    pub fn new(bits: u32, blocks: Vec<(u64, f64, DensityOperator)>) -> Result<Self> {
        if bits > 63 {
            return Err(Error::InvalidArgument("classical register too wide".into()));
        }
        if blocks.is_empty() {
            return Err(Error::InvalidState("hybrid state with no blocks".into()));
        }
        let dims = blocks[0].2.dims().clone();
        let mut total = 0.0;
        let mut seen = std::collections::HashSet::new();
        for (label, w, rho) in &blocks {
            if *label >= (1u64 << bits) {
                return Err(Error::InvalidArgument(format!(
                    "label {label} outside a {bits}-bit register"
                )));
            }
            if !seen.insert(*label) {
                return Err(Error::InvalidArgument(format!("duplicate label {label}")));
            }
            if *w < -TOL_STRUCTURAL {
                return Err(Error::InvalidState(format!("negative weight {w}")));
            }
            if rho.dims() != &dims {
                return Err(Error::LabelMismatch(
                    "hybrid blocks must share quantum layout".into(),
                ));
            }
            total += w;
        }
        if (total - 1.0).abs() > TOL_STRUCTURAL {
            return Err(Error::InvalidState(format!(
                "hybrid weights sum to {total}, expected 1"
            )));
        }
        Ok(HybridCqState { bits, blocks })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn blocks(&self) -> &[(u64, f64, DensityOperator)] {
        &self.blocks
    }

    pub fn quantum_dims(&self) -> &DimList {
        self.blocks[0].2.dims()
    }

    /// Entropy in bits: H(p) + Σ_z p_z H(ρ_z), exact for block-orthogonal
    /// classical registers.
    pub fn entropy_bits(&self) -> f64 {
        let weights: Vec<f64> = self.blocks.iter().map(|(_, w, _)| *w).collect();
        let mut h = linalg::entropy_bits(&weights);
        for (_, w, rho) in &self.blocks {
            if *w > 0.0 {
                h += w * rho.entropy_bits();
            }
        }
        h
    }

    /// Average quantum state Σ_z p_z ρ_z (classical register discarded).
    pub fn average(&self) -> DensityOperator {
        let d = self.quantum_dims().total();
        let mut mat = CMat::zeros(d, d);
        for (_, w, rho) in &self.blocks {
            mat += rho.matrix() * num_complex::Complex64::new(*w, 0.0);
        }
        DensityOperator::new_unchecked(self.quantum_dims().clone(), mat)
    }

    /// Conditional quantum entropy Σ_z p_z H(ρ_z): entropy of the quantum
    /// part given the classical register.
    pub fn conditional_quantum_entropy(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|(_, w, _)| *w > 0.0)
            .map(|(_, w, rho)| w * rho.entropy_bits())
            .sum()
    }

    /// Fidelity with another hybrid sharing the classical register width:
    /// Σ_z √(p_z q_z) F(ρ_z, σ_z). Labels present on one side only contribute
    /// nothing, exactly as for the expanded block-diagonal operators.
    pub fn fidelity_with(&self, other: &HybridCqState) -> Result<f64> {
        if self.bits != other.bits {
            return Err(Error::LabelMismatch(
                "hybrid fidelity needs equal classical widths".into(),
            ));
        }
        let theirs: std::collections::HashMap<u64, (f64, &DensityOperator)> = other
            .blocks
            .iter()
            .map(|(l, w, r)| (*l, (*w, r)))
            .collect();
        let mut f = 0.0;
        for (label, w, rho) in &self.blocks {
            if let Some((w2, sigma)) = theirs.get(label) {
                if *w > 0.0 && *w2 > 0.0 {
                    f += (w * w2).sqrt() * super::fidelity(rho, sigma)?;
                }
            }
        }
        Ok(f.min(1.0))
    }

    /// Expand into a dense density operator with the classical register as a
    /// leading subsystem named `label`. Intended for small cross-checks.
    pub fn expanded(&self, label: &str) -> Result<DensityOperator> {
        let c = 1usize << self.bits;
        let dims = DimList::new(&[(label, c)])?.concat(self.quantum_dims())?;
        let dq = self.quantum_dims().total();
        let mut mat = CMat::zeros(c * dq, c * dq);
        for (l, w, rho) in &self.blocks {
            let base = (*l as usize) * dq;
            for i in 0..dq {
                for j in 0..dq {
                    mat[(base + i, base + j)] =
                        rho.matrix()[(i, j)] * num_complex::Complex64::new(*w, 0.0);
                }
            }
        }
        Ok(DensityOperator::new_unchecked(dims, mat))
    }
}

/// A channel with classical inputs 0..outputs.len() (uniform prior) and
/// quantum outputs on a shared layout. Binary for the coding constructions;
/// larger arities are allowed for information quantities.
#[derive(Clone, Debug)]
pub struct CqChannel {
    outputs: Vec<DensityOperator>,
}

impl CqChannel {
    pub fn new(outputs: Vec<DensityOperator>) -> Result<Self> {
        if outputs.len() < 2 {
            return Err(Error::InvalidChannel(
                "cq channel needs at least two inputs".into(),
            ));
        }
        let dims = outputs[0].dims().clone();
        for o in &outputs[1..] {
            if o.dims() != &dims {
                return Err(Error::LabelMismatch(
                    "cq outputs must share quantum layout".into(),
                ));
            }
        }
        Ok(CqChannel { outputs })
    }

    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    pub fn arity(&self) -> usize {
        self.outputs.len()
    }

    pub fn output(&self, x: usize) -> &DensityOperator {
        &self.outputs[x]
    }

    /// Symmetric Holevo information: H(avg) − mean H(ρ_x), in bits.
    pub fn holevo_information(&self) -> Result<f64> {
        let d = self.outputs[0].dims().total();
        let mut avg = CMat::zeros(d, d);
        let scale = num_complex::Complex64::new(1.0 / self.outputs.len() as f64, 0.0);
        let mut cond = 0.0;
        for o in &self.outputs {
            avg += o.matrix() * scale;
            cond += o.entropy_bits();
        }
        cond /= self.outputs.len() as f64;
        let h_avg = linalg::entropy_of(&avg, "cq average state")?;
        Ok(h_avg - cond)
    }

    /// Output fidelity of a binary channel, Tr |√ρ₀ √ρ₁|.
    pub fn fidelity(&self) -> Result<f64> {
        if self.outputs.len() != 2 {
            return Err(Error::InvalidChannel(format!(
                "fidelity is defined for binary channels, arity {}",
                self.outputs.len()
            )));
        }
        super::fidelity(&self.outputs[0], &self.outputs[1])
    }
}
