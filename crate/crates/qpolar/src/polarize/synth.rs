//! Exact synthesis of split channels. One engine handles both variables:
//! given the GF(2) combining matrix, a set of conditioning wires (classical
//! side information), a set of averaged wires, and the target wire, it builds
//! the conditional output blocks over the N-fold output space and reads off
//! the information and fidelity of the resulting binary channel.
//!
//! Two execution paths: when the base outputs commute they are carried as
//! probability vectors in a common eigenbasis (local rotations change neither
//! entropies nor fidelities), otherwise as dense matrices with a much smaller
//! dimension cap.

use rayon::prelude::*;

use crate::polarize::recursion::{propagate_f_bounds, propagate_f_bounds_phase};
use crate::polarize::transform::PolarTransform;
use crate::polarize::{PolarTable, Side, TableEntry};
use crate::qcore::dims::DimList;
use crate::qcore::hybrid::{CqChannel, HybridCqState};
use crate::qcore::linalg::{self, CMat};
use crate::qcore::state::DensityOperator;
use crate::{Error, Result, MAX_BLOCK_DIM, MAX_DENSE_BLOCK_DIM, TOL_STRUCTURAL};

/// Cap on total stored matrix entries when materializing the two conditional
/// output ensembles of a synthesized wire.
const MATERIALIZE_ENTRIES: u128 = 1 << 24;

/// A synthesized wire: its exact information and fidelity, plus the two
/// conditional output ensembles (one per target value) when they fit the
/// materialization budget.
#[derive(Clone, Debug)]
pub struct SplitChannel {
    pub side: Side,
    pub index: usize,
    pub exact_i: f64,
    pub exact_f: f64,
    pub outputs: Option<(HybridCqState, HybridCqState)>,
}

enum Base {
    /// Diagonals of the two outputs in a shared eigenbasis.
    Classical([Vec<f64>; 2]),
    Dense([CMat; 2]),
}

fn base_of(w: &CqChannel) -> Result<(Base, usize)> {
    if w.arity() != 2 {
        return Err(Error::InvalidChannel(format!(
            "synthesis needs a binary channel, arity {}",
            w.arity()
        )));
    }
    let d = w.outputs()[0].dims().total();
    let mats: Vec<&CMat> = w.outputs().iter().map(|o| o.matrix()).collect();
    let base = match linalg::simultaneous_diagonals(&mats, TOL_STRUCTURAL)? {
        Some(diags) => {
            let mut it = diags.into_iter();
            let clamp = |v: Vec<f64>| v.into_iter().map(|p| p.max(0.0)).collect::<Vec<f64>>();
            Base::Classical([clamp(it.next().unwrap()), clamp(it.next().unwrap())])
        }
        None => Base::Dense([mats[0].clone(), mats[1].clone()]),
    };
    Ok((base, d))
}

/// d^n_wires, refused beyond the path-dependent cap.
fn block_dim(d: usize, n_wires: usize, dense: bool) -> Result<usize> {
    let cap = if dense {
        MAX_DENSE_BLOCK_DIM
    } else {
        MAX_BLOCK_DIM
    };
    let mut dn = 1usize;
    for _ in 0..n_wires {
        dn = dn
            .checked_mul(d)
            .filter(|&v| v <= cap)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "output block dimension {d}^{n_wires} exceeds the exact cap {cap}; \
                     use the fidelity bound recursion at this depth"
                ))
            })?;
    }
    Ok(dn)
}

/// Wire roles for one synthesis job, all 0-based. `cond` order fixes the
/// packing of classical labels: the first listed wire is the most
/// significant bit.
struct WireSpec {
    cond: Vec<usize>,
    avg: Vec<usize>,
    target: usize,
}

fn amplitude_spec(n_wires: usize, index: usize) -> WireSpec {
    WireSpec {
        cond: (0..index - 1).collect(),
        avg: (index..n_wires).collect(),
        target: index - 1,
    }
}

fn phase_spec(n_wires: usize, index: usize) -> WireSpec {
    WireSpec {
        cond: (index..n_wires).rev().collect(),
        avg: (0..index - 1).collect(),
        target: index - 1,
    }
}

struct Engine<'a> {
    base: &'a Base,
    dn: usize,
    n_wires: usize,
    /// Row i of the combining matrix packed as a bitmask, wire 1 at the MSB.
    row_masks: Vec<u64>,
    spec: WireSpec,
}

impl<'a> Engine<'a> {
    fn new(base: &'a Base, d: usize, rows: &[Vec<u8>], spec: WireSpec) -> Result<Self> {
        let n_wires = rows.len();
        let dn = block_dim(d, n_wires, matches!(base, Base::Dense(_)))?;
        let row_masks = rows
            .iter()
            .map(|row| {
                row.iter().enumerate().fold(0u64, |m, (j, &g)| {
                    m | (u64::from(g & 1) << (n_wires - 1 - j))
                })
            })
            .collect();
        Ok(Engine {
            base,
            dn,
            n_wires,
            row_masks,
            spec,
        })
    }

    /// Codeword for one full input assignment, packed wire-1-MSB.
    fn codeword(&self, cond_bits: u64, avg_bits: u64, target_bit: u8) -> u64 {
        let mut x = 0u64;
        let nc = self.spec.cond.len();
        for (k, &wire) in self.spec.cond.iter().enumerate() {
            if (cond_bits >> (nc - 1 - k)) & 1 == 1 {
                x ^= self.row_masks[wire];
            }
        }
        for (k, &wire) in self.spec.avg.iter().enumerate() {
            if (avg_bits >> k) & 1 == 1 {
                x ^= self.row_masks[wire];
            }
        }
        if target_bit == 1 {
            x ^= self.row_masks[self.spec.target];
        }
        x
    }

    fn wire_value(&self, x: u64, wire: usize) -> usize {
        ((x >> (self.n_wires - 1 - wire)) & 1) as usize
    }

    fn classical_block(&self, diags: &[Vec<f64>; 2], cond_bits: u64, bit: u8) -> Vec<f64> {
        let navg = self.spec.avg.len();
        let scale = 1.0 / (1u64 << navg) as f64;
        let mut acc = vec![0.0; self.dn];
        for a in 0..(1u64 << navg) {
            let x = self.codeword(cond_bits, a, bit);
            let mut cur = vec![1.0];
            for wire in 0..self.n_wires {
                let factor = &diags[self.wire_value(x, wire)];
                let mut next = Vec::with_capacity(cur.len() * factor.len());
                for &v in &cur {
                    for &p in factor {
                        next.push(v * p);
                    }
                }
                cur = next;
            }
            for (slot, v) in acc.iter_mut().zip(&cur) {
                *slot += v * scale;
            }
        }
        acc
    }

    fn dense_block(&self, mats: &[CMat; 2], cond_bits: u64, bit: u8) -> CMat {
        let navg = self.spec.avg.len();
        let scale = num_complex::Complex64::new(1.0 / (1u64 << navg) as f64, 0.0);
        let mut acc = CMat::zeros(self.dn, self.dn);
        for a in 0..(1u64 << navg) {
            let x = self.codeword(cond_bits, a, bit);
            let mut cur = mats[self.wire_value(x, 0)].clone();
            for wire in 1..self.n_wires {
                cur = linalg::kron(&cur, &mats[self.wire_value(x, wire)]);
            }
            acc += cur * scale;
        }
        acc
    }

    /// Information and fidelity of the conditional binary channel at one
    /// side-information value, plus the blocks themselves when requested.
    fn cond_metrics(
        &self,
        cond_bits: u64,
        keep: bool,
    ) -> Result<(f64, f64, Option<(CMat, CMat)>)> {
        match self.base {
            Base::Classical(diags) => {
                let b0 = self.classical_block(diags, cond_bits, 0);
                let b1 = self.classical_block(diags, cond_bits, 1);
                let f: f64 = b0
                    .iter()
                    .zip(&b1)
                    .map(|(&p, &q)| (p * q).max(0.0).sqrt())
                    .sum();
                let mix: Vec<f64> = b0.iter().zip(&b1).map(|(&p, &q)| 0.5 * (p + q)).collect();
                let i = linalg::entropy_bits(&mix)
                    - 0.5 * (linalg::entropy_bits(&b0) + linalg::entropy_bits(&b1));
                let blocks = keep.then(|| (diag_mat(&b0), diag_mat(&b1)));
                Ok((i, f.min(1.0), blocks))
            }
            Base::Dense(mats) => {
                let b0 = self.dense_block(mats, cond_bits, 0);
                let b1 = self.dense_block(mats, cond_bits, 1);
                let mix = (&b0 + &b1) * num_complex::Complex64::new(0.5, 0.0);
                let i = linalg::entropy_of(&mix, "synthesized mixture")?
                    - 0.5
                        * (linalg::entropy_of(&b0, "synthesized block")?
                            + linalg::entropy_of(&b1, "synthesized block")?);
                let f = linalg::fidelity_mats(&b0, &b1)?;
                Ok((i, f, keep.then_some((b0, b1))))
            }
        }
    }
}

fn diag_mat(v: &[f64]) -> CMat {
    let mut m = CMat::zeros(v.len(), v.len());
    for (k, &p) in v.iter().enumerate() {
        m[(k, k)] = num_complex::Complex64::new(p, 0.0);
    }
    m
}

/// Per-wire output labels: each base subsystem label suffixed with the
/// 1-based wire number.
fn block_dims(base_dims: &DimList, n_wires: usize) -> Result<DimList> {
    let mut subs = Vec::with_capacity(base_dims.len() * n_wires);
    for wire in 1..=n_wires {
        for (label, dim) in base_dims.entries() {
            subs.push((format!("{label}{wire}"), *dim));
        }
    }
    DimList::from_owned(subs)
}

fn synthesize(
    w: &CqChannel,
    t: &PolarTransform,
    index: usize,
    side: Side,
) -> Result<SplitChannel> {
    let n_wires = t.size();
    if index == 0 || index > n_wires {
        return Err(Error::InvalidArgument(format!(
            "wire index {index} out of range 1..={n_wires}"
        )));
    }
    let (base, d) = base_of(w)?;
    let (rows, spec) = match side {
        Side::Amplitude => (t.rows().to_vec(), amplitude_spec(n_wires, index)),
        Side::Phase => (t.transposed_rows(), phase_spec(n_wires, index)),
    };
    let engine = Engine::new(&base, d, &rows, spec)?;
    let ncond = engine.spec.cond.len();
    let stored = (1u128 << (ncond + 1)) * (engine.dn as u128) * (engine.dn as u128);
    let keep = stored <= MATERIALIZE_ENTRIES;

    let per_cond: Vec<(f64, f64, Option<(CMat, CMat)>)> = (0..(1u64 << ncond))
        .into_par_iter()
        .map(|c| engine.cond_metrics(c, keep))
        .collect::<Result<_>>()?;

    let weight = 1.0 / (1u64 << ncond) as f64;
    let mut exact_i = 0.0;
    let mut exact_f = 0.0;
    for (i, f, _) in &per_cond {
        exact_i += weight * i;
        exact_f += weight * f;
    }

    let outputs = if keep {
        let dims = block_dims(w.outputs()[0].dims(), n_wires)?;
        let mut blocks0 = Vec::with_capacity(per_cond.len());
        let mut blocks1 = Vec::with_capacity(per_cond.len());
        for (c, (_, _, blocks)) in per_cond.into_iter().enumerate() {
            let (b0, b1) = blocks.expect("kept per keep flag");
            // The classical path stores diagonals of valid states; skip the
            // eigenvalue revalidation there, it is the expensive part.
            let (r0, r1) = match base {
                Base::Classical(_) => (
                    DensityOperator::new_unchecked(dims.clone(), b0),
                    DensityOperator::new_unchecked(dims.clone(), b1),
                ),
                Base::Dense(_) => (
                    DensityOperator::new(dims.clone(), b0)?,
                    DensityOperator::new(dims.clone(), b1)?,
                ),
            };
            blocks0.push((c as u64, weight, r0));
            blocks1.push((c as u64, weight, r1));
        }
        Some((
            HybridCqState::new(ncond as u32, blocks0)?,
            HybridCqState::new(ncond as u32, blocks1)?,
        ))
    } else {
        None
    };

    Ok(SplitChannel {
        side,
        index,
        exact_i: exact_i.clamp(0.0, 1.0 + TOL_STRUCTURAL).min(1.0),
        exact_f: exact_f.clamp(0.0, 1.0),
        outputs,
    })
}

/// Synthesize the amplitude variable at one wire: earlier wires conditioned,
/// later wires averaged.
pub fn synthesize_amplitude(
    w: &CqChannel,
    t: &PolarTransform,
    index: usize,
) -> Result<SplitChannel> {
    synthesize(w, t, index, Side::Amplitude)
}

/// Synthesize the phase variable at one wire: later wires conditioned,
/// earlier wires averaged, combining through the transposed matrix.
pub fn synthesize_phase(w: &CqChannel, t: &PolarTransform, index: usize) -> Result<SplitChannel> {
    synthesize(w, t, index, Side::Phase)
}

fn table(w: &CqChannel, t: &PolarTransform, side: Side) -> Result<PolarTable> {
    let n = t.n();
    let f_base = w.fidelity()?;
    let bounds = match side {
        Side::Amplitude => propagate_f_bounds(f_base, n)?,
        Side::Phase => propagate_f_bounds_phase(f_base, n)?,
    };
    let mut entries = Vec::with_capacity(t.size());
    for index in 1..=t.size() {
        let s = synthesize_scalars(w, t, index, side)?;
        entries.push(TableEntry {
            index,
            exact_i: Some(s.0),
            exact_f: Some(s.1),
            f_bound: bounds.entry(index)?.f_bound,
        });
    }
    PolarTable::new(side, n, t.bit_reversal(), entries)
}

/// Scalar-only synthesis used by the table builders; never materializes.
fn synthesize_scalars(
    w: &CqChannel,
    t: &PolarTransform,
    index: usize,
    side: Side,
) -> Result<(f64, f64)> {
    let n_wires = t.size();
    let (base, d) = base_of(w)?;
    let (rows, spec) = match side {
        Side::Amplitude => (t.rows().to_vec(), amplitude_spec(n_wires, index)),
        Side::Phase => (t.transposed_rows(), phase_spec(n_wires, index)),
    };
    let engine = Engine::new(&base, d, &rows, spec)?;
    let ncond = engine.spec.cond.len();
    let per_cond: Vec<(f64, f64)> = (0..(1u64 << ncond))
        .into_par_iter()
        .map(|c| engine.cond_metrics(c, false).map(|(i, f, _)| (i, f)))
        .collect::<Result<_>>()?;
    let weight = 1.0 / (1u64 << ncond) as f64;
    let mut i_sum = 0.0;
    let mut f_sum = 0.0;
    for (i, f) in per_cond {
        i_sum += weight * i;
        f_sum += weight * f;
    }
    Ok((
        i_sum.clamp(0.0, 1.0 + TOL_STRUCTURAL).min(1.0),
        f_sum.clamp(0.0, 1.0),
    ))
}

/// Exact per-wire table for the amplitude variable.
pub fn amplitude_table(w: &CqChannel, t: &PolarTransform) -> Result<PolarTable> {
    table(w, t, Side::Amplitude)
}

/// Exact per-wire table for the phase variable.
pub fn phase_table(w: &CqChannel, t: &PolarTransform) -> Result<PolarTable> {
    table(w, t, Side::Phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarize::recursion::bec_evolve;
    use crate::qcore::random::{random_density, rng_from_seed};
    use num_complex::Complex64;

    fn erasure_cq(p: f64) -> CqChannel {
        let mk = |z: usize| {
            let mut m = CMat::zeros(3, 3);
            m[(z, z)] = Complex64::new(1.0 - p, 0.0);
            m[(2, 2)] = Complex64::new(p, 0.0);
            DensityOperator::new(DimList::new(&[("B", 3)]).unwrap(), m).unwrap()
        };
        CqChannel::new(vec![mk(0), mk(1)]).unwrap()
    }

    fn random_dense_cq(seed: u64) -> CqChannel {
        let mut rng = rng_from_seed(seed);
        let dims = DimList::new(&[("B", 2)]).unwrap();
        let r0 = random_density(dims.clone(), 2, &mut rng).unwrap();
        let r1 = random_density(dims, 2, &mut rng).unwrap();
        CqChannel::new(vec![r0, r1]).unwrap()
    }

    #[test]
    fn erasure_table_matches_the_recursion() {
        let w = erasure_cq(0.3);
        let t = PolarTransform::new(2, true).unwrap();
        let got = amplitude_table(&w, &t).unwrap();
        let want = bec_evolve(0.3, 2).unwrap();
        for (g, w_) in got.entries().iter().zip(want.entries()) {
            assert!((g.exact_f.unwrap() - w_.exact_f.unwrap()).abs() < 1e-12);
            assert!((g.exact_i.unwrap() - w_.exact_i.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_zero_reproduces_the_base_channel() {
        let w = random_dense_cq(5);
        let t = PolarTransform::new(0, true).unwrap();
        let s = synthesize_amplitude(&w, &t, 1).unwrap();
        assert!((s.exact_i - w.holevo_information().unwrap()).abs() < 1e-12);
        assert!((s.exact_f - w.fidelity().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn information_is_conserved_on_both_sides() {
        let w = random_dense_cq(9);
        let base_i = w.holevo_information().unwrap();
        let t = PolarTransform::new(2, true).unwrap();
        for side_table in [amplitude_table(&w, &t).unwrap(), phase_table(&w, &t).unwrap()] {
            let total: f64 = side_table
                .entries()
                .iter()
                .map(|e| e.exact_i.unwrap())
                .sum();
            assert!(
                (total - 4.0 * base_i).abs() < 1e-9,
                "{side_table:?} total {total} vs {}",
                4.0 * base_i
            );
        }
    }

    #[test]
    fn phase_reflects_amplitude() {
        let w = random_dense_cq(13);
        let t = PolarTransform::new(2, true).unwrap();
        let a = amplitude_table(&w, &t).unwrap();
        let p = phase_table(&w, &t).unwrap();
        let nn = t.size();
        for i in 1..=nn {
            let pa = p.entry(i).unwrap();
            let am = a.entry(nn + 1 - i).unwrap();
            assert!((pa.exact_i.unwrap() - am.exact_i.unwrap()).abs() < 1e-9);
            assert!((pa.exact_f.unwrap() - am.exact_f.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn upgraded_chain_squares_the_fidelity() {
        let w = random_dense_cq(21);
        let f0 = w.fidelity().unwrap();
        let t = PolarTransform::new(2, true).unwrap();
        let s = synthesize_amplitude(&w, &t, 4).unwrap();
        assert!((s.exact_f - f0.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn tables_ignore_the_wiring_flag() {
        let w = random_dense_cq(33);
        let with = amplitude_table(&w, &PolarTransform::new(2, true).unwrap()).unwrap();
        let without = amplitude_table(&w, &PolarTransform::new(2, false).unwrap()).unwrap();
        for (a, b) in with.entries().iter().zip(without.entries()) {
            assert!((a.exact_i.unwrap() - b.exact_i.unwrap()).abs() < 1e-12);
            assert!((a.exact_f.unwrap() - b.exact_f.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn materialized_outputs_match_the_scalars() {
        let w = random_dense_cq(41);
        let t = PolarTransform::new(2, true).unwrap();
        for index in 1..=4 {
            let s = synthesize_amplitude(&w, &t, index).unwrap();
            let (h0, h1) = s.outputs.expect("within materialization budget");
            assert_eq!(h0.blocks().len(), 1 << (index - 1));
            assert!((h0.fidelity_with(&h1).unwrap() - s.exact_f).abs() < 1e-9);
            // Blockwise mixture entropy identity: the classical label terms
            // cancel, leaving exactly the averaged conditional information.
            let mix_blocks: Vec<_> = h0
                .blocks()
                .iter()
                .zip(h1.blocks())
                .map(|((c, w0, r0), (_, _, r1))| {
                    let m = (r0.matrix() + r1.matrix()) * Complex64::new(0.5, 0.0);
                    (*c, *w0, DensityOperator::new(r0.dims().clone(), m).unwrap())
                })
                .collect();
            let mix = HybridCqState::new((index - 1) as u32, mix_blocks).unwrap();
            let i = mix.entropy_bits() - 0.5 * (h0.entropy_bits() + h1.entropy_bits());
            assert!((i - s.exact_i).abs() < 1e-9, "index {index}");
        }
    }

    #[test]
    fn budget_refusals() {
        let mut rng = rng_from_seed(55);
        let dims = DimList::new(&[("B", 4)]).unwrap();
        let w = CqChannel::new(vec![
            random_density(dims.clone(), 4, &mut rng).unwrap(),
            random_density(dims, 4, &mut rng).unwrap(),
        ])
        .unwrap();
        let t = PolarTransform::new(7, true).unwrap();
        match synthesize_amplitude(&w, &t, 1) {
            Err(Error::BudgetExceeded(_)) => {}
            other => panic!("expected budget refusal, got {other:?}"),
        }
        // The commuting path stretches further than the dense one.
        let w = erasure_cq(0.2);
        assert!(block_dim(3, 10, false).is_ok());
        let t_small = PolarTransform::new(2, true).unwrap();
        assert!(amplitude_table(&w, &t_small).is_ok());
    }

    #[test]
    fn arity_checked() {
        let dims = DimList::new(&[("B", 2)]).unwrap();
        let mut rng = rng_from_seed(60);
        let outs: Vec<_> = (0..3)
            .map(|_| random_density(dims.clone(), 2, &mut rng).unwrap())
            .collect();
        let w = CqChannel::new(outs).unwrap();
        let t = PolarTransform::new(1, true).unwrap();
        assert!(matches!(
            synthesize_amplitude(&w, &t, 1),
            Err(Error::InvalidChannel(_))
        ));
    }
}
