//! Fidelity recursions. One combining step sends a channel with fidelity f
//! to a degraded arm with fidelity at most 2f - f^2 and an upgraded arm with
//! fidelity exactly f^2; iterating the two arms over all branch choices gives
//! a per-wire upper bound at any depth. For erasure channels the degraded arm
//! is also exact, so the same recursion evaluated on an erasure probability
//! is the whole story.

use rand::Rng;

use crate::polarize::{PolarTable, Side, TableEntry};
use crate::qcore::hybrid::CqChannel;
use crate::qcore::random::rng_from_seed;
use crate::{Error, Result};

/// Beyond this depth the dense per-wire table (2^n entries) stops being a
/// reasonable object to hold in memory.
const MAX_RECURSION_DEPTH: u32 = 24;

/// Degraded-arm step (branch bit 0).
pub fn minus_step(f: f64) -> f64 {
    (2.0 * f - f * f).clamp(0.0, 1.0)
}

/// Upgraded-arm step (branch bit 1).
pub fn plus_step(f: f64) -> f64 {
    (f * f).clamp(0.0, 1.0)
}

/// All 2^n leaf values in wire order: entry i - 1 follows the branch bits of
/// i - 1, most significant first, 0 through the degraded arm.
fn leaf_values(f0: f64, n: u32) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&f0) {
        return Err(Error::InvalidArgument(format!(
            "fidelity {f0} outside [0, 1]"
        )));
    }
    if n > MAX_RECURSION_DEPTH {
        return Err(Error::BudgetExceeded(format!(
            "recursion depth {n} exceeds {MAX_RECURSION_DEPTH}"
        )));
    }
    let mut level = vec![f0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for &f in &level {
            next.push(minus_step(f));
            next.push(plus_step(f));
        }
        level = next;
    }
    Ok(level)
}

fn bound_table(side: Side, values: Vec<f64>, n: u32) -> Result<PolarTable> {
    let entries = values
        .into_iter()
        .enumerate()
        .map(|(k, f)| TableEntry {
            index: k + 1,
            exact_i: None,
            exact_f: None,
            f_bound: f,
        })
        .collect();
    PolarTable::new(side, n, true, entries)
}

/// Per-wire fidelity upper bounds for the amplitude variable at depth n,
/// starting from the base fidelity f0.
pub fn propagate_f_bounds(f0: f64, n: u32) -> Result<PolarTable> {
    bound_table(Side::Amplitude, leaf_values(f0, n)?, n)
}

/// Per-wire bounds for the phase variable. The phase variable at wire i is
/// the amplitude-style synthesis at wire 2^n + 1 - i, so the bound list is
/// the amplitude list reversed.
pub fn propagate_f_bounds_phase(f0: f64, n: u32) -> Result<PolarTable> {
    let mut values = leaf_values(f0, n)?;
    values.reverse();
    bound_table(Side::Phase, values, n)
}

/// Exact per-wire table for a classical erasure channel with erasure
/// probability p: every synthesized wire is again an erasure channel, its
/// erasure probability equals its fidelity, and information is one minus it.
pub fn bec_evolve(p: f64, n: u32) -> Result<PolarTable> {
    let entries = erasure_entries(leaf_values(p, n)?);
    PolarTable::new(Side::Amplitude, n, true, entries)
}

/// Phase-side erasure table. The quantum erasure channel induces erasure
/// channels for both variables with the same erasure probability, and the
/// phase variable at wire i is synthesized like the amplitude variable at
/// wire 2^n + 1 - i, so the value list is reversed.
pub fn bec_evolve_phase(p: f64, n: u32) -> Result<PolarTable> {
    let mut values = leaf_values(p, n)?;
    values.reverse();
    PolarTable::new(Side::Phase, n, true, erasure_entries(values))
}

fn erasure_entries(values: Vec<f64>) -> Vec<TableEntry> {
    values
        .into_iter()
        .enumerate()
        .map(|(k, f)| TableEntry {
            index: k + 1,
            exact_i: Some(1.0 - f),
            exact_f: Some(f),
            f_bound: f,
        })
        .collect()
}

/// One sampled path of the fidelity process. Branch bits here name the arms
/// directly: bit 0 squares the fidelity, bit 1 takes the doubling arm (the
/// opposite orientation from wire-index bits, where 0 is the degraded arm).
#[derive(Clone, Debug)]
pub struct ExtremalProcessSample {
    bits: Vec<u8>,
    trajectory: Vec<f64>,
}

impl ExtremalProcessSample {
    /// Build a path from its branch bits, evolving from f0.
    pub fn new(f0: f64, bits: Vec<u8>) -> Result<Self> {
        if !(0.0..=1.0).contains(&f0) {
            return Err(Error::InvalidArgument(format!(
                "fidelity {f0} outside [0, 1]"
            )));
        }
        let mut trajectory = Vec::with_capacity(bits.len() + 1);
        trajectory.push(f0);
        let mut f = f0;
        for &b in &bits {
            if b > 1 {
                return Err(Error::InvalidArgument(format!("branch bit {b} not 0/1")));
            }
            f = if b == 0 { plus_step(f) } else { minus_step(f) };
            trajectory.push(f);
        }
        Ok(ExtremalProcessSample { bits, trajectory })
    }

    /// Reassemble from stored parts, revalidating the process invariant:
    /// each step must equal f^2 (bit 0) or 2f - f^2 (bit 1) exactly.
    pub fn from_parts(bits: Vec<u8>, trajectory: Vec<f64>) -> Result<Self> {
        if trajectory.len() != bits.len() + 1 {
            return Err(Error::InvalidArgument(
                "trajectory must be one longer than the bit string".into(),
            ));
        }
        let rebuilt = Self::new(trajectory[0], bits)?;
        if rebuilt.trajectory != trajectory {
            return Err(Error::InvalidArgument(
                "trajectory does not follow the process recursion".into(),
            ));
        }
        Ok(rebuilt)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn trajectory(&self) -> &[f64] {
        &self.trajectory
    }

    pub fn final_f(&self) -> f64 {
        *self.trajectory.last().expect("trajectory never empty")
    }

    pub fn final_i_proxy(&self) -> f64 {
        1.0 - self.final_f()
    }

    /// The 1-based wire index whose branch this path follows (wire bits are
    /// the complements of process bits).
    pub fn wire_index(&self) -> usize {
        let mut idx = 0usize;
        for &b in &self.bits {
            idx = (idx << 1) | usize::from(b == 0);
        }
        idx + 1
    }
}

/// Monte Carlo summary of the polarization process at depth n.
#[derive(Clone, Debug)]
pub struct McPolarization {
    pub n: u32,
    pub samples: usize,
    pub seed: u64,
    /// Depth up to which branch values came from exact synthesis.
    pub exact_prefix_depth: u32,
    pub threshold: f64,
    pub mean_f: f64,
    pub mean_i_proxy: f64,
    pub std_err_i_proxy: f64,
    /// Fraction of sampled wires with final fidelity below the threshold.
    pub fraction_good: f64,
    /// Final (information proxy, fidelity) per sample, in sample order.
    pub finals: Vec<(f64, f64)>,
}

/// Sample the polarization process for a binary cq channel: branch bits are
/// uniform, the first few levels use exactly synthesized fidelities (depth
/// capped by the exact budget), and the remainder runs the bound recursion.
/// The information proxy 1 - F is exact for erasure channels and a lower
/// bound in general.
pub fn mc_polarization(w: &CqChannel, n: u32, samples: usize, seed: u64) -> Result<McPolarization> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    if n > 64 {
        return Err(Error::BudgetExceeded(format!("depth {n} too large")));
    }
    // Exact prefix: synthesize every wire at a small depth and start each
    // sampled path from its prefix wire. Falls back to the base fidelity
    // alone if even the small block is over budget.
    let mut prefix_depth = n.min(2);
    let prefix_f: Vec<f64> = loop {
        if prefix_depth == 0 {
            break vec![w.fidelity()?];
        }
        let t = super::transform::PolarTransform::new(prefix_depth, true)?;
        match super::synth::amplitude_table(w, &t) {
            Ok(table) => {
                break table
                    .entries()
                    .iter()
                    .map(|e| e.exact_f.expect("exact table"))
                    .collect();
            }
            Err(Error::BudgetExceeded(_)) => prefix_depth -= 1,
            Err(e) => return Err(e),
        }
    };

    let mut rng = rng_from_seed(seed);
    let threshold = super::default_threshold(n);
    let mut finals = Vec::with_capacity(samples);
    let mut sum_f = 0.0;
    let mut sum_i = 0.0;
    let mut sum_i2 = 0.0;
    let mut good = 0usize;
    for _ in 0..samples {
        // Process bits: 1 takes the degraded arm. The exact prefix is wire
        // indexed, so the first prefix_depth bits select a wire through the
        // complement.
        let mut wire_prefix = 0usize;
        let mut bits = Vec::with_capacity(n as usize);
        for _ in 0..n {
            bits.push(u8::from(rng.gen_bool(0.5)));
        }
        for &b in bits.iter().take(prefix_depth as usize) {
            wire_prefix = (wire_prefix << 1) | usize::from(b == 0);
        }
        let mut f = prefix_f[wire_prefix];
        for &b in bits.iter().skip(prefix_depth as usize) {
            f = if b == 0 { plus_step(f) } else { minus_step(f) };
        }
        let i = 1.0 - f;
        sum_f += f;
        sum_i += i;
        sum_i2 += i * i;
        if f < threshold {
            good += 1;
        }
        finals.push((i, f));
    }
    let m = samples as f64;
    let mean_i = sum_i / m;
    let var = (sum_i2 / m - mean_i * mean_i).max(0.0);
    let std_err = if samples > 1 {
        (var / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(McPolarization {
        n,
        samples,
        seed,
        exact_prefix_depth: prefix_depth,
        threshold,
        mean_f: sum_f / m,
        mean_i_proxy: mean_i,
        std_err_i_proxy: std_err,
        fraction_good: good as f64 / m,
        finals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::dims::DimList;
    use crate::qcore::linalg::CMat;
    use crate::qcore::state::DensityOperator;
    use num_complex::Complex64;

    pub(crate) fn erasure_cq(p: f64) -> CqChannel {
        // Outputs (1-p)|z><z| + p|2><2| on a qutrit: fidelity p, all diagonal.
        let mk = |z: usize| {
            let mut m = CMat::zeros(3, 3);
            m[(z, z)] = Complex64::new(1.0 - p, 0.0);
            m[(2, 2)] = Complex64::new(p, 0.0);
            DensityOperator::new(DimList::new(&[("B", 3)]).unwrap(), m).unwrap()
        };
        CqChannel::new(vec![mk(0), mk(1)]).unwrap()
    }

    #[test]
    fn half_erasure_depth_two() {
        let t = bec_evolve(0.5, 2).unwrap();
        let f: Vec<f64> = t.entries().iter().map(|e| e.exact_f.unwrap()).collect();
        assert_eq!(f, vec![0.9375, 0.5625, 0.4375, 0.0625]);
        let i: Vec<f64> = t.entries().iter().map(|e| e.exact_i.unwrap()).collect();
        assert_eq!(i, vec![0.0625, 0.4375, 0.5625, 0.9375]);
    }

    #[test]
    fn leaf_mean_is_conserved() {
        // The process is a martingale, so the uniform average over wires
        // equals the base value.
        let t = propagate_f_bounds(0.3, 10).unwrap();
        let mean: f64 =
            t.entries().iter().map(|e| e.f_bound).sum::<f64>() / t.size() as f64;
        assert!((mean - 0.3).abs() < 1e-12);
    }

    #[test]
    fn extremes_are_fixed_points() {
        for f0 in [0.0, 1.0] {
            let t = propagate_f_bounds(f0, 6).unwrap();
            assert!(t.entries().iter().all(|e| e.f_bound == f0));
        }
    }

    #[test]
    fn complement_identity() {
        // Reversing the wire order and flipping the erasure probability
        // flips every leaf value through 1 - f.
        let p = 0.3;
        let a = propagate_f_bounds(p, 20).unwrap();
        let b = propagate_f_bounds(1.0 - p, 20).unwrap();
        let nn = a.size();
        for j in (0..nn).step_by(997) {
            let lhs = a.entries()[nn - 1 - j].f_bound;
            let rhs = 1.0 - b.entries()[j].f_bound;
            assert!((lhs - rhs).abs() < 1e-9, "j = {j}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn phase_table_is_reversed() {
        let a = propagate_f_bounds(0.4, 5).unwrap();
        let p = propagate_f_bounds_phase(0.4, 5).unwrap();
        let nn = a.size();
        for j in 0..nn {
            assert_eq!(p.entries()[j].f_bound, a.entries()[nn - 1 - j].f_bound);
        }
        assert_eq!(p.side(), Side::Phase);
    }

    #[test]
    fn process_sample_invariant() {
        let s = ExtremalProcessSample::new(0.5, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(s.trajectory().len(), 5);
        // bit 0 squares, bit 1 doubles
        assert_eq!(s.trajectory()[1], 0.25);
        assert_eq!(s.trajectory()[2], 2.0 * 0.25 - 0.0625);
        let ok = ExtremalProcessSample::from_parts(s.bits().to_vec(), s.trajectory().to_vec());
        assert!(ok.is_ok());
        let mut broken = s.trajectory().to_vec();
        broken[2] += 1e-3;
        assert!(ExtremalProcessSample::from_parts(s.bits().to_vec(), broken).is_err());
    }

    #[test]
    fn process_bits_complement_wire_bits() {
        // All-zero process bits follow the upgraded arm every time, which is
        // the last wire.
        let s = ExtremalProcessSample::new(0.5, vec![0, 0, 0]).unwrap();
        assert_eq!(s.wire_index(), 8);
        assert_eq!(s.final_f(), 0.5f64.powi(8));
        let t = propagate_f_bounds(0.5, 3).unwrap();
        assert_eq!(t.entry(8).unwrap().f_bound, s.final_f());
    }

    #[test]
    fn mc_mean_matches_erasure_martingale() {
        let w = erasure_cq(0.5);
        let mc = mc_polarization(&w, 10, 4000, 11).unwrap();
        assert_eq!(mc.exact_prefix_depth, 2);
        // Exact martingale: mean information proxy is 0.5 up to sampling
        // noise.
        assert!(
            (mc.mean_i_proxy - 0.5).abs() < 3.5 * mc.std_err_i_proxy,
            "mean {} +- {}",
            mc.mean_i_proxy,
            mc.std_err_i_proxy
        );
        assert!(mc.fraction_good > 0.2 && mc.fraction_good < 0.8);
        // Determinism under the same seed.
        let again = mc_polarization(&w, 10, 4000, 11).unwrap();
        assert_eq!(mc.finals, again.finals);
    }

    #[test]
    fn mc_perfect_channel_stays_perfect() {
        let w = erasure_cq(0.0);
        let mc = mc_polarization(&w, 8, 200, 3).unwrap();
        assert!(mc.finals.iter().all(|&(i, f)| f == 0.0 && i == 1.0));
        assert_eq!(mc.fraction_good, 1.0);
    }
}
