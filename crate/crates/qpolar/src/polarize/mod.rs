//! Polarization machinery: the GF(2) combining transform, exact synthesis of
//! the per-wire split channels, and the fidelity recursions that take over
//! once blocks outgrow the exact budget.
//!
//! Index conventions used throughout: wires are 1-based. The amplitude
//! variable at wire `i` sees earlier wires as side information and averages
//! over later ones; the phase variable sees later wires as side information
//! and averages over earlier ones. Branch bits of wire `i` are the bits of
//! `i - 1`, most significant first; bit 0 takes the degrading arm of the
//! recursion, bit 1 the upgrading arm.

mod recursion;
mod synth;
mod transform;

pub use recursion::{
    bec_evolve, bec_evolve_phase, mc_polarization, plus_step, propagate_f_bounds,
    propagate_f_bounds_phase, ExtremalProcessSample, McPolarization, minus_step,
};
pub use synth::{
    amplitude_table, phase_table, synthesize_amplitude, synthesize_phase, SplitChannel,
};
pub use transform::PolarTransform;

use std::fmt;

use crate::{Error, Result, TOL_ASSERT};

/// Which of the two complementary variables a table describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Amplitude,
    Phase,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Amplitude => "amplitude",
            Side::Phase => "phase",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One wire of a polarization table. Exact values are present when the wire
/// was synthesized within budget; the fidelity bound is always present.
#[derive(Clone, Debug)]
pub struct TableEntry {
    pub index: usize,
    pub exact_i: Option<f64>,
    pub exact_f: Option<f64>,
    pub f_bound: f64,
}

impl TableEntry {
    /// The fidelity figure classification runs on: exact when available,
    /// otherwise the bound (which is conservative for selecting good wires).
    pub fn effective_f(&self) -> f64 {
        self.exact_f.unwrap_or(self.f_bound)
    }
}

#[derive(Clone, Debug)]
pub struct PolarTable {
    side: Side,
    n: u32,
    bit_reversal: bool,
    entries: Vec<TableEntry>,
}

impl PolarTable {
    pub fn new(side: Side, n: u32, bit_reversal: bool, entries: Vec<TableEntry>) -> Result<Self> {
        if n >= 32 {
            return Err(Error::InvalidArgument(format!("table depth {n} too large")));
        }
        let nn = 1usize << n;
        if entries.len() != nn {
            return Err(Error::InvalidArgument(format!(
                "table at depth {n} needs {nn} entries, got {}",
                entries.len()
            )));
        }
        for (k, e) in entries.iter().enumerate() {
            if e.index != k + 1 {
                return Err(Error::InvalidArgument(format!(
                    "entry {k} carries index {}, expected {}",
                    e.index,
                    k + 1
                )));
            }
            let in_unit = |v: f64| (-TOL_ASSERT..=1.0 + TOL_ASSERT).contains(&v);
            if !in_unit(e.f_bound)
                || e.exact_f.is_some_and(|v| !in_unit(v))
                || e.exact_i.is_some_and(|v| !in_unit(v))
            {
                return Err(Error::InvalidArgument(format!(
                    "entry {} carries a value outside [0, 1]",
                    e.index
                )));
            }
            if let Some(f) = e.exact_f {
                if f > e.f_bound + TOL_ASSERT {
                    return Err(Error::InvalidArgument(format!(
                        "entry {}: exact fidelity {f:.6} exceeds its bound {:.6}",
                        e.index, e.f_bound
                    )));
                }
            }
        }
        Ok(PolarTable {
            side,
            n,
            bit_reversal,
            entries,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn bit_reversal(&self) -> bool {
        self.bit_reversal
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    /// 1-based lookup.
    pub fn entry(&self, index: usize) -> Result<&TableEntry> {
        if index == 0 || index > self.entries.len() {
            return Err(Error::InvalidArgument(format!(
                "wire index {index} out of range 1..={}",
                self.entries.len()
            )));
        }
        Ok(&self.entries[index - 1])
    }
}

/// Wires split by the fidelity threshold.
#[derive(Clone, Debug)]
pub struct Classification {
    pub threshold: f64,
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
}

/// Depth-dependent default threshold, 2^(-sqrt(n)) at recursion depth n.
/// Any rate 2^(-N^b) with b < 1/2 is asymptotically achievable; this sits
/// just outside that family so that small-depth tables classify sensibly.
pub fn default_threshold(n: u32) -> f64 {
    2f64.powf(-(n as f64).sqrt())
}

/// Split wires into good (effective fidelity strictly below the threshold)
/// and bad. Both lists are ascending and 1-based.
pub fn classify(table: &PolarTable, threshold: f64) -> Result<Classification> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} outside (0, 1]"
        )));
    }
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for e in &table.entries {
        if e.effective_f() < threshold {
            good.push(e.index);
        } else {
            bad.push(e.index);
        }
    }
    Ok(Classification {
        threshold,
        good,
        bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bound_entry(index: usize, f: f64) -> TableEntry {
        TableEntry {
            index,
            exact_i: None,
            exact_f: None,
            f_bound: f,
        }
    }

    #[test]
    fn default_threshold_values() {
        assert!((default_threshold(4) - 0.25).abs() < 1e-15);
        assert!((default_threshold(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classify_is_strict_at_the_threshold() {
        let table = PolarTable::new(
            Side::Amplitude,
            1,
            true,
            vec![bound_entry(1, 0.3), bound_entry(2, 0.2)],
        )
        .unwrap();
        let c = classify(&table, 0.3).unwrap();
        assert_eq!(c.good, vec![2]);
        assert_eq!(c.bad, vec![1]);
        // Threshold 1 admits every wire with fidelity strictly below one.
        let c = classify(&table, 1.0).unwrap();
        assert_eq!(c.good, vec![1, 2]);
        assert!(classify(&table, 0.0).is_err());
        assert!(classify(&table, 1.5).is_err());
    }

    #[test]
    fn table_rejects_exact_above_bound() {
        let bad = TableEntry {
            index: 1,
            exact_i: None,
            exact_f: Some(0.5),
            f_bound: 0.2,
        };
        assert!(PolarTable::new(Side::Amplitude, 0, true, vec![bad]).is_err());
    }

    #[test]
    fn table_rejects_wrong_length_or_order() {
        assert!(PolarTable::new(Side::Phase, 1, true, vec![bound_entry(1, 0.1)]).is_err());
        assert!(PolarTable::new(
            Side::Phase,
            1,
            true,
            vec![bound_entry(2, 0.1), bound_entry(1, 0.1)]
        )
        .is_err());
    }
}
