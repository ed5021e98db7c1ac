//! Code design on top of the polarization tables: the four-way index
//! partition shared by the quantum and private schemes, the rates either
//! scheme achieves at finite blocklength, two checks for when the assistance
//! rate vanishes, a multi-start search for the symmetric private
//! information, and rate composition across the qubit factors of a larger
//! channel.

mod checks;
mod psym;
mod superact;

pub use checks::{
    coherent_information, degradable_disjointness_check, erasure_bound_check,
    joint_coherent_information, DisjointnessReport, ErasureBound,
};
pub use psym::private_information_search;
pub use superact::{superactivation_compose, FactorRate, SuperactivationReport};

use std::fmt;

use crate::polarize::{classify, PolarTable, Side};
use crate::{Error, Result};

/// How a table's per-wire figures were obtained: exact synthesis for every
/// wire, the erasure-recursion bound for every wire, or an exact prefix with
/// bounds past the budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Bounds,
    Mixed,
}

impl Provenance {
    pub fn of(table: &PolarTable) -> Provenance {
        let exact = table
            .entries()
            .iter()
            .filter(|e| e.exact_f.is_some())
            .count();
        if exact == table.size() {
            Provenance::Exact
        } else if exact == 0 {
            Provenance::Bounds
        } else {
            Provenance::Mixed
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Bounds => "bounds",
            Provenance::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Wire indices split by whether the amplitude and phase variables are good
/// (fidelity below the threshold) or bad. The four sets partition 1..=2^n:
///
/// * `a`: good for both, carries the information qubits;
/// * `x`: good for amplitude only, frozen in the phase basis;
/// * `z`: good for phase only, frozen in the amplitude basis;
/// * `b`: bad for both, needs a preshared ebit (or key bit) per index.
#[derive(Clone, Debug)]
pub struct CodePartition {
    n: u32,
    threshold: f64,
    a: Vec<usize>,
    x: Vec<usize>,
    z: Vec<usize>,
    b: Vec<usize>,
    amp_provenance: Provenance,
    phase_provenance: Provenance,
}

impl CodePartition {
    /// Assemble a partition from explicit sets, given in the order
    /// [a, x, z, b]. Validates that the sets are disjoint and cover 1..=2^n.
    pub fn from_sets(
        n: u32,
        threshold: f64,
        sets: [Vec<usize>; 4],
        amp_provenance: Provenance,
        phase_provenance: Provenance,
    ) -> Result<CodePartition> {
        if n >= usize::BITS {
            return Err(Error::InvalidArgument(format!("depth {n} too large")));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold {threshold} outside (0, 1]"
            )));
        }
        let size = 1usize << n;
        let mut seen = vec![false; size + 1];
        for set in &sets {
            for &i in set {
                if i == 0 || i > size {
                    return Err(Error::InvalidArgument(format!(
                        "index {i} outside 1..={size}"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidArgument(format!(
                        "index {i} assigned to two sets"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = (1..=size).find(|&i| !seen[i]) {
            return Err(Error::InvalidArgument(format!(
                "index {missing} assigned to no set"
            )));
        }
        let [mut a, mut x, mut z, mut b] = sets;
        a.sort_unstable();
        x.sort_unstable();
        z.sort_unstable();
        b.sort_unstable();
        Ok(CodePartition {
            n,
            threshold,
            a,
            x,
            z,
            b,
            amp_provenance,
            phase_provenance,
        })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    /// Block length N = 2^n.
    pub fn size(&self) -> usize {
        1 << self.n
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Good for both variables: the information indices.
    pub fn a(&self) -> &[usize] {
        &self.a
    }

    /// Good for amplitude only: frozen in the phase basis.
    pub fn x(&self) -> &[usize] {
        &self.x
    }

    /// Good for phase only: frozen in the amplitude basis.
    pub fn z(&self) -> &[usize] {
        &self.z
    }

    /// Bad for both: one ebit (or secret key bit) of assistance each.
    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn amp_provenance(&self) -> Provenance {
        self.amp_provenance
    }

    pub fn phase_provenance(&self) -> Provenance {
        self.phase_provenance
    }

    /// Net rate (|a| - |b|) / N: information indices minus the assistance
    /// spent on the doubly-bad ones.
    pub fn net_rate(&self) -> f64 {
        (self.a.len() as f64 - self.b.len() as f64) / self.size() as f64
    }

    /// Assistance rate |b| / N.
    pub fn assistance_rate(&self) -> f64 {
        self.b.len() as f64 / self.size() as f64
    }

    pub fn rate_report(&self, kind: RateKind, asymptotic_target: Option<f64>) -> RateReport {
        RateReport {
            kind,
            rate: self.net_rate(),
            assistance_rate: self.assistance_rate(),
            asymptotic_target,
        }
    }
}

/// Intersect the goodness classifications of an amplitude table and a phase
/// table of equal depth into the four-way partition. The phase table must
/// already follow the phase indexing convention (wire i synthesized with the
/// transposed transform), which is what `phase_table`, `bec_evolve_phase`,
/// and `propagate_f_bounds_phase` produce.
pub fn partition(amp: &PolarTable, phase: &PolarTable, threshold: f64) -> Result<CodePartition> {
    if amp.side() != Side::Amplitude || phase.side() != Side::Phase {
        return Err(Error::InvalidArgument(format!(
            "partition wants an amplitude table and a phase table, got {} and {}",
            amp.side(),
            phase.side()
        )));
    }
    if amp.depth() != phase.depth() {
        return Err(Error::InvalidArgument(format!(
            "tables have mixed depths {} and {}",
            amp.depth(),
            phase.depth()
        )));
    }
    let size = amp.size();
    let mut amp_good = vec![false; size + 1];
    for i in classify(amp, threshold)?.good {
        amp_good[i] = true;
    }
    let mut phase_good = vec![false; size + 1];
    for i in classify(phase, threshold)?.good {
        phase_good[i] = true;
    }
    let mut sets: [Vec<usize>; 4] = Default::default();
    for i in 1..=size {
        let which = match (amp_good[i], phase_good[i]) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        sets[which].push(i);
    }
    CodePartition::from_sets(
        amp.depth(),
        threshold,
        sets,
        Provenance::of(amp),
        Provenance::of(phase),
    )
}

/// The set identity behind the net rate: |a| - |b| equals
/// |amp-good| + |phase-good| - N. Holds exactly for every valid partition;
/// exposed as a check because the rate calculation leans on it.
pub fn rate_identity_check(p: &CodePartition) -> bool {
    let (a, x, z, b) = (
        p.a.len() as i64,
        p.x.len() as i64,
        p.z.len() as i64,
        p.b.len() as i64,
    );
    let n = a + x + z + b;
    a - b == (a + x) + (a + z) - n
}

/// Which scheme a rate report describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateKind {
    Quantum,
    Private,
}

impl RateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RateKind::Quantum => "quantum",
            RateKind::Private => "private",
        }
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Headline numbers of a designed code: qubits (or private bits) per channel
/// use, the assistance consumed, and where the rate should converge as the
/// depth grows. For partition-backed reports `rate` is exactly
/// (|a| - |b|) / N.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub kind: RateKind,
    pub rate: f64,
    pub assistance_rate: f64,
    pub asymptotic_target: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{induce_all, QubitChannelSpec};
    use crate::polarize::{
        amplitude_table, bec_evolve, bec_evolve_phase, default_threshold, phase_table,
        propagate_f_bounds, propagate_f_bounds_phase, PolarTransform,
    };
    use crate::qcore::linalg::CMat;
    use crate::qcore::KrausChannel;
    use num_complex::Complex64;

    fn useless_channel() -> QubitChannelSpec {
        // Everything maps to |0><0|: both induced channels are pure noise.
        let c = Complex64::new;
        let z = c(0.0, 0.0);
        let k0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, z]);
        let k1 = CMat::from_row_slice(2, 2, &[z, c(1.0, 0.0), z, z]);
        QubitChannelSpec::new("useless", KrausChannel::new(vec![k0, k1]).unwrap(), None)
            .unwrap()
    }

    fn tables_of(ch: &QubitChannelSpec, n: u32) -> (PolarTable, PolarTable) {
        let induced = induce_all(ch).unwrap();
        let t = PolarTransform::new(n, true).unwrap();
        (
            amplitude_table(&induced.w_a, &t).unwrap(),
            phase_table(&induced.w_p, &t).unwrap(),
        )
    }

    #[test]
    fn identity_channel_gives_everything_to_information() {
        let ch = QubitChannelSpec::preset("identity", 0.0).unwrap();
        let (amp, phase) = tables_of(&ch, 1);
        let p = partition(&amp, &phase, default_threshold(1)).unwrap();
        assert_eq!(p.a(), &[1, 2]);
        assert!(p.x().is_empty() && p.z().is_empty() && p.b().is_empty());
        assert_eq!(p.net_rate(), 1.0);
        assert_eq!(p.amp_provenance(), Provenance::Exact);
        assert!(rate_identity_check(&p));
    }

    #[test]
    fn useless_channel_is_all_assistance() {
        let (amp, phase) = tables_of(&useless_channel(), 1);
        let p = partition(&amp, &phase, default_threshold(1)).unwrap();
        assert_eq!(p.b(), &[1, 2]);
        assert!(p.a().is_empty());
        assert_eq!(p.net_rate(), -1.0);
        assert_eq!(p.assistance_rate(), 1.0);
        assert!(rate_identity_check(&p));
    }

    #[test]
    fn quarter_erasure_needs_almost_no_assistance_at_depth_ten() {
        let n = 10;
        let amp = bec_evolve(0.25, n).unwrap();
        let phase = bec_evolve_phase(0.25, n).unwrap();
        let p = partition(&amp, &phase, default_threshold(n)).unwrap();
        assert!(
            p.assistance_rate() < 0.02,
            "assistance rate {}",
            p.assistance_rate()
        );
        assert!(rate_identity_check(&p));
        // Headed toward the coherent information 1 - 2p = 0.5 from below.
        assert!(p.net_rate() > 0.3 && p.net_rate() < 0.5);
    }

    #[test]
    fn mixed_depths_are_rejected() {
        let amp = bec_evolve(0.3, 3).unwrap();
        let phase = bec_evolve_phase(0.3, 4).unwrap();
        assert!(partition(&amp, &phase, 0.5).is_err());
        // Two amplitude tables are rejected as well.
        let amp4 = bec_evolve(0.3, 4).unwrap();
        assert!(partition(&amp4, &amp4, 0.5).is_err());
    }

    #[test]
    fn rate_identity_holds_for_arbitrary_assignments() {
        use rand::Rng;
        let mut rng = crate::qcore::random::rng_from_seed(17);
        for trial in 0..20 {
            let n = 1 + (trial % 5) as u32;
            let mut sets: [Vec<usize>; 4] = Default::default();
            for i in 1..=(1usize << n) {
                sets[rng.gen_range(0..4)].push(i);
            }
            let p =
                CodePartition::from_sets(n, 0.5, sets, Provenance::Bounds, Provenance::Bounds)
                    .unwrap();
            assert!(rate_identity_check(&p));
        }
    }

    #[test]
    fn all_good_amplitude_all_bad_phase_balances_exactly() {
        // Bounds tables pinned at the extremes: every wire amp-good and
        // phase-bad, so a = b = empty and the identity reads 0 = 0.
        let n = 3;
        let amp = propagate_f_bounds(0.0, n).unwrap();
        let phase = propagate_f_bounds_phase(1.0, n).unwrap();
        let p = partition(&amp, &phase, 0.5).unwrap();
        assert!(p.a().is_empty() && p.b().is_empty());
        assert_eq!(p.x().len(), 8);
        assert_eq!(p.net_rate(), 0.0);
        assert!(rate_identity_check(&p));
        assert_eq!(p.amp_provenance(), Provenance::Bounds);
    }

    #[test]
    fn from_sets_rejects_overlaps_and_gaps() {
        let overlap = CodePartition::from_sets(
            1,
            0.5,
            [vec![1, 2], vec![2], vec![], vec![]],
            Provenance::Exact,
            Provenance::Exact,
        );
        assert!(overlap.is_err());
        let gap = CodePartition::from_sets(
            1,
            0.5,
            [vec![1], vec![], vec![], vec![]],
            Provenance::Exact,
            Provenance::Exact,
        );
        assert!(gap.is_err());
    }

    #[test]
    fn report_carries_the_partition_rates() {
        let amp = bec_evolve(0.25, 6).unwrap();
        let phase = bec_evolve_phase(0.25, 6).unwrap();
        let p = partition(&amp, &phase, default_threshold(6)).unwrap();
        let r = p.rate_report(RateKind::Quantum, Some(0.5));
        assert_eq!(r.rate, p.net_rate());
        assert_eq!(r.assistance_rate, p.assistance_rate());
        assert_eq!(r.asymptotic_target, Some(0.5));
        assert_eq!(r.kind.as_str(), "quantum");
    }
}
