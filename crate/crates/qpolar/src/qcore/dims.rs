//! Labeled subsystem dimension lists. Every state carries one of these, and
//! all reordering is by explicit permutation: states over A, B, C, R, E, S
//! interleave freely, and silent ordering assumptions are the dominant bug
//! risk in this domain.

use crate::{Error, Result};

/// An ordered list of (label, dimension) pairs. Flat indices are row-major:
/// the first subsystem is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimList {
    subs: Vec<(String, usize)>,
}

impl DimList {
    pub fn new(pairs: &[(&str, usize)]) -> Result<Self> {
        let subs: Vec<(String, usize)> = pairs.iter().map(|(l, d)| (l.to_string(), *d)).collect();
        Self::from_owned(subs)
    }

    pub fn from_owned(subs: Vec<(String, usize)>) -> Result<Self> {
        for (label, dim) in &subs {
            if *dim == 0 {
                return Err(Error::InvalidArgument(format!(
                    "subsystem `{label}` has dimension 0"
                )));
            }
        }
        for i in 0..subs.len() {
            for j in (i + 1)..subs.len() {
                if subs[i].0 == subs[j].0 {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate subsystem label `{}`",
                        subs[i].0
                    )));
                }
            }
        }
        Ok(DimList { subs })
    }

    pub fn len(&self) -> usize {
        self.subs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }

    pub fn total(&self) -> usize {
        self.subs.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subs.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.subs
    }

    pub fn dim_at(&self, pos: usize) -> usize {
        self.subs[pos].1
    }

    pub fn label_at(&self, pos: usize) -> &str {
        &self.subs[pos].0
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subs
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subs[self.position(label)?].1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subs.iter().any(|(l, _)| l == label)
    }

    /// Positions of the given labels, in the given order. Rejects repeats.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for (k, label) in labels.iter().enumerate() {
            if labels[..k].contains(label) {
                return Err(Error::InvalidArgument(format!(
                    "label `{label}` repeated in selection"
                )));
            }
            out.push(self.position(label)?);
        }
        Ok(out)
    }

    /// Row-major strides per subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.subs.len()];
        for i in (0..self.subs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subs[i + 1].1;
        }
        strides
    }

    /// Sub-list of the given labels, in the given order.
    pub fn select(&self, labels: &[&str]) -> Result<DimList> {
        let positions = self.positions(labels)?;
        DimList::from_owned(
            positions
                .iter()
                .map(|&p| self.subs[p].clone())
                .collect::<Vec<_>>(),
        )
    }

    /// Everything except the given labels, preserving order.
    pub fn without(&self, labels: &[&str]) -> Result<DimList> {
        for l in labels {
            self.position(l)?;
        }
        DimList::from_owned(
            self.subs
                .iter()
                .filter(|(l, _)| !labels.contains(&l.as_str()))
                .cloned()
                .collect(),
        )
    }

    pub fn concat(&self, other: &DimList) -> Result<DimList> {
        let mut subs = self.subs.clone();
        subs.extend(other.subs.iter().cloned());
        DimList::from_owned(subs)
    }

    /// Flat offsets contributed by a subset of subsystem positions: entry `k`
    /// of the result is the flat-index contribution of joint assignment `k`
    /// (row-major over the subset, in the order given). Offsets over disjoint
    /// subsets add, which is what every gather/scatter below relies on.
    pub fn subset_offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &p in positions {
            let d = self.subs[p].1;
            let s = strides[p];
            let mut next = Vec::with_capacity(offsets.len() * d);
            for &base in &offsets {
                for v in 0..d {
                    next.push(base + v * s);
                }
            }
            offsets = next;
        }
        offsets
    }
}
