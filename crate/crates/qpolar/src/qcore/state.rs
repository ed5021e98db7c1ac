//! Pure states and density operators over labeled subsystems, with the
//! gather/scatter machinery that lets operators act on any subset of
//! subsystems without materializing global matrices.

use num_complex::Complex64;

use super::dims::DimList;
use super::linalg::{self, CMat, CVec};
use crate::{Error, Result, TOL_STRUCTURAL};

/// A normalized state vector over labeled subsystems.
#[derive(Clone, Debug)]
pub struct PureState {
    dims: DimList,
    amps: CVec,
}

impl PureState {
    pub fn new(dims: DimList, amps: CVec) -> Result<Self> {
        if dims.total() != amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector length {} vs dims total {}",
                amps.len(),
                dims.total()
            )));
        }
        let n2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "squared norm {n2} is not 1 within 1e-12"
            )));
        }
        Ok(PureState { dims, amps })
    }

    pub(crate) fn new_unchecked(dims: DimList, amps: CVec) -> Self {
        PureState { dims, amps }
    }

    /// Computational basis state |k⟩ over the given dims (flat row-major k).
    pub fn basis(dims: DimList, k: usize) -> Result<Self> {
        let total = dims.total();
        if k >= total {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range {total}"
            )));
        }
        let mut amps = CVec::zeros(total);
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(PureState { dims, amps })
    }

    /// Single qubit |0⟩ or |1⟩ with the given label.
    pub fn qubit_basis(label: &str, bit: u8) -> Result<Self> {
        Self::basis(DimList::new(&[(label, 2)])?, bit as usize)
    }

    /// Single qubit in the phase basis, (|0⟩ + (−1)^bit |1⟩)/√2.
    pub fn qubit_phase(label: &str, bit: u8) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if bit == 0 { s } else { -s };
        let amps = CVec::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(sign, 0.0)]);
        Ok(PureState {
            dims: DimList::new(&[(label, 2)])?,
            amps,
        })
    }

    /// Maximally entangled pair (|00⟩ + |11⟩)/√2 on two labeled qubits.
    pub fn bell_pair(label_a: &str, label_b: &str) -> Result<Self> {
        let dims = DimList::new(&[(label_a, 2), (label_b, 2)])?;
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = CVec::zeros(4);
        amps[0] = s;
        amps[3] = s;
        Ok(PureState { dims, amps })
    }

    /// Maximally entangled state of dimension d on two labeled subsystems.
    pub fn maximally_entangled(label_a: &str, label_b: &str, d: usize) -> Result<Self> {
        let dims = DimList::new(&[(label_a, d), (label_b, d)])?;
        let s = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut amps = CVec::zeros(d * d);
        for k in 0..d {
            amps[k * d + k] = s;
        }
        Ok(PureState { dims, amps })
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let dims = self.dims.concat(&other.dims)?;
        let mut amps = CVec::zeros(self.amps.len() * other.amps.len());
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.amps.len() + j] = a * b;
            }
        }
        Ok(PureState { dims, amps })
    }

    /// Inner product ⟨self|other⟩; requires identical label order.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::LabelMismatch(
                "inner product requires identical subsystem layout".into(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Explicit subsystem reordering.
    pub fn permuted(&self, order: &[&str]) -> Result<PureState> {
        if order.len() != self.dims.len() {
            return Err(Error::InvalidArgument(
                "permutation must list every subsystem exactly once".into(),
            ));
        }
        let new_dims = self.dims.select(order)?;
        let positions = self.dims.positions(order)?;
        let old_strides = self.dims.strides();
        let sel_strides: Vec<usize> = positions.iter().map(|&p| old_strides[p]).collect();
        let sel_dims: Vec<usize> = positions.iter().map(|&p| self.dims.dim_at(p)).collect();
        let total = self.amps.len();
        let mut amps = CVec::zeros(total);
        // Walk new flat indices in order, decoding into old offsets.
        let mut digits = vec![0usize; sel_dims.len()];
        let mut old_off = 0usize;
        for new_flat in 0..total {
            amps[new_flat] = self.amps[old_off];
            // increment mixed-radix counter (last digit fastest), maintaining old_off
            for d in (0..sel_dims.len()).rev() {
                digits[d] += 1;
                old_off += sel_strides[d];
                if digits[d] < sel_dims[d] {
                    break;
                }
                old_off -= sel_dims[d] * sel_strides[d];
                digits[d] = 0;
            }
            let _ = new_flat;
        }
        Ok(PureState {
            dims: new_dims,
            amps,
        })
    }

    /// Apply a square operator to the joint space of `targets` (in the given
    /// order), optionally selecting the operator by the value of `controls`.
    /// Subsystem layout is unchanged.
    pub fn apply_controlled_within(
        &self,
        controls: &[&str],
        targets: &[&str],
        mut op_for: impl FnMut(usize) -> Result<CMat>,
    ) -> Result<PureState> {
        for c in controls {
            if targets.contains(c) {
                return Err(Error::InvalidArgument(format!(
                    "label `{c}` is both control and target"
                )));
            }
        }
        let ctrl_pos = self.dims.positions(controls)?;
        let tgt_pos = self.dims.positions(targets)?;
        let mut rest_labels: Vec<&str> = Vec::new();
        for l in self.dims.labels() {
            if !controls.contains(&l) && !targets.contains(&l) {
                rest_labels.push(l);
            }
        }
        let rest_pos = self.dims.positions(&rest_labels)?;
        let ctrl_off = self.dims.subset_offsets(&ctrl_pos);
        let tgt_off = self.dims.subset_offsets(&tgt_pos);
        let rest_off = self.dims.subset_offsets(&rest_pos);
        let t = tgt_off.len();
        let mut amps = self.amps.clone();
        let mut vin = CVec::zeros(t);
        for (c, &coff) in ctrl_off.iter().enumerate() {
            let op = op_for(c)?;
            if op.nrows() != t || op.ncols() != t {
                return Err(Error::DimensionMismatch(format!(
                    "operator is {}x{}, targets span {t}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            for &roff in &rest_off {
                let base = coff + roff;
                for (k, &toff) in tgt_off.iter().enumerate() {
                    vin[k] = self.amps[base + toff];
                }
                let vout = &op * &vin;
                for (k, &toff) in tgt_off.iter().enumerate() {
                    amps[base + toff] = vout[k];
                }
            }
        }
        Ok(PureState {
            dims: self.dims.clone(),
            amps,
        })
    }

    pub fn apply_within(&self, targets: &[&str], op: &CMat) -> Result<PureState> {
        self.apply_controlled_within(&[], targets, |_| Ok(op.clone()))
    }

    /// Apply an isometry taking the joint space of `ins` to the joint space
    /// of freshly labeled `outs` (appended at the end of the layout), with the
    /// operator selected by the value of `controls`. `ins` are consumed; to
    /// keep them, list them again among `outs` and shape the operator
    /// accordingly.
    pub fn apply_controlled_isometry(
        &self,
        controls: &[&str],
        ins: &[&str],
        outs: &[(&str, usize)],
        mut op_for: impl FnMut(usize) -> Result<CMat>,
    ) -> Result<PureState> {
        for c in controls {
            if ins.contains(c) {
                return Err(Error::InvalidArgument(format!(
                    "label `{c}` is both control and input"
                )));
            }
        }
        let kept = self.dims.without(ins)?;
        let new_dims = kept.concat(&DimList::new(outs)?)?;
        let t_in: usize = ins
            .iter()
            .map(|l| self.dims.dim_of(l))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .product();
        let t_out: usize = outs.iter().map(|(_, d)| d).product();

        // Old-layout offsets.
        let ins_pos = self.dims.positions(ins)?;
        let ins_off = self.dims.subset_offsets(&ins_pos);
        let ctrl_pos = self.dims.positions(controls)?;
        let ctrl_off_old = self.dims.subset_offsets(&ctrl_pos);
        let kept_labels = kept.labels();
        let mut rest_labels: Vec<&str> = Vec::new();
        for l in &kept_labels {
            if !controls.contains(l) {
                rest_labels.push(l);
            }
        }
        let rest_off_old = self
            .dims
            .subset_offsets(&self.dims.positions(&rest_labels)?);

        // New-layout offsets for the same enumeration order.
        let ctrl_off_new = new_dims.subset_offsets(&new_dims.positions(controls)?);
        let rest_off_new = new_dims.subset_offsets(&new_dims.positions(&rest_labels)?);
        let out_labels: Vec<&str> = outs.iter().map(|(l, _)| *l).collect();
        let out_off_new = new_dims.subset_offsets(&new_dims.positions(&out_labels)?);

        let mut amps = CVec::zeros(new_dims.total());
        let mut vin = CVec::zeros(t_in);
        for (c, (&co_old, &co_new)) in ctrl_off_old.iter().zip(ctrl_off_new.iter()).enumerate() {
            let op = op_for(c)?;
            if op.nrows() != t_out || op.ncols() != t_in {
                return Err(Error::DimensionMismatch(format!(
                    "isometry is {}x{}, expected {t_out}x{t_in}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            for (&ro_old, &ro_new) in rest_off_old.iter().zip(rest_off_new.iter()) {
                for (k, &ioff) in ins_off.iter().enumerate() {
                    vin[k] = self.amps[co_old + ro_old + ioff];
                }
                let vout = &op * &vin;
                for (k, &ooff) in out_off_new.iter().enumerate() {
                    amps[co_new + ro_new + ooff] = vout[k];
                }
            }
        }
        Ok(PureState {
            dims: new_dims,
            amps,
        })
    }

    pub fn apply_isometry_on(
        &self,
        ins: &[&str],
        outs: &[(&str, usize)],
        op: &CMat,
    ) -> Result<PureState> {
        self.apply_controlled_isometry(&[], ins, outs, |_| Ok(op.clone()))
    }

    /// Permute computational basis states of the selected subsystems:
    /// |k⟩ ↦ |map[k]⟩ on the joint subset index (row-major over `targets`).
    pub fn apply_basis_map(&self, targets: &[&str], map: &[usize]) -> Result<PureState> {
        let tgt_pos = self.dims.positions(targets)?;
        let tgt_off = self.dims.subset_offsets(&tgt_pos);
        let t = tgt_off.len();
        if map.len() != t {
            return Err(Error::DimensionMismatch(format!(
                "basis map has {} entries, subset spans {t}",
                map.len()
            )));
        }
        let mut seen = vec![false; t];
        for &m in map {
            if m >= t || seen[m] {
                return Err(Error::InvalidArgument(
                    "basis map is not a permutation".into(),
                ));
            }
            seen[m] = true;
        }
        let mut rest_labels: Vec<&str> = Vec::new();
        for l in self.dims.labels() {
            if !targets.contains(&l) {
                rest_labels.push(l);
            }
        }
        let rest_off = self
            .dims
            .subset_offsets(&self.dims.positions(&rest_labels)?);
        let mut amps = CVec::zeros(self.amps.len());
        for &roff in &rest_off {
            for (k, &toff) in tgt_off.iter().enumerate() {
                amps[roff + tgt_off[map[k]]] = self.amps[roff + toff];
            }
        }
        Ok(PureState {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// Project one subsystem onto a basis state, removing it. Returns the
    /// outcome probability and the renormalized post-measurement state
    /// (`None` when the probability vanishes).
    pub fn project_basis(&self, label: &str, value: usize) -> Result<(f64, Option<PureState>)> {
        let d = self.dims.dim_of(label)?;
        let mut sel = CVec::zeros(d);
        sel[value] = Complex64::new(1.0, 0.0);
        self.project_vector(label, &sel)
    }

    /// Project one subsystem onto an arbitrary unit vector, removing it.
    pub fn project_vector(&self, label: &str, vector: &CVec) -> Result<(f64, Option<PureState>)> {
        let pos = self.dims.position(label)?;
        let d = self.dims.dim_at(pos);
        if vector.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "projection vector length {} vs subsystem dim {d}",
                vector.len()
            )));
        }
        let lbl_off = self.dims.subset_offsets(&[pos]);
        let rest = self.dims.without(&[label])?;
        let mut rest_labels_owned: Vec<String> =
            rest.labels().iter().map(|s| s.to_string()).collect();
        let rest_labels: Vec<&str> = rest_labels_owned.iter().map(|s| s.as_str()).collect();
        let rest_off = self
            .dims
            .subset_offsets(&self.dims.positions(&rest_labels)?);
        let mut amps = CVec::zeros(rest.total());
        for (r, &roff) in rest_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &loff) in lbl_off.iter().enumerate() {
                acc += vector[k].conj() * self.amps[roff + loff];
            }
            amps[r] = acc;
        }
        let p: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        rest_labels_owned.clear();
        if p < 1e-300 {
            return Ok((0.0, None));
        }
        let scale = Complex64::new(1.0 / p.sqrt(), 0.0);
        Ok((
            p,
            Some(PureState {
                dims: rest,
                amps: amps * scale,
            }),
        ))
    }

    /// Reduced density operator on the given labels (in the given order).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        let keep_dims = self.dims.select(keep)?;
        let keep_off = self.dims.subset_offsets(&self.dims.positions(keep)?);
        let mut rest_labels: Vec<&str> = Vec::new();
        for l in self.dims.labels() {
            if !keep.contains(&l) {
                rest_labels.push(l);
            }
        }
        let rest_off = self
            .dims
            .subset_offsets(&self.dims.positions(&rest_labels)?);
        let k = keep_off.len();
        let mut mat = CMat::zeros(k, k);
        for &roff in &rest_off {
            for (i, &io) in keep_off.iter().enumerate() {
                let a = self.amps[roff + io];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for (j, &jo) in keep_off.iter().enumerate() {
                    mat[(i, j)] += a * self.amps[roff + jo].conj();
                }
            }
        }
        Ok(DensityOperator::new_unchecked(keep_dims, mat))
    }

    pub fn to_density(&self) -> DensityOperator {
        let n = self.amps.len();
        let mut mat = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityOperator::new_unchecked(self.dims.clone(), mat)
    }
}

/// A density operator over labeled subsystems.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    dims: DimList,
    mat: CMat,
}

impl DensityOperator {
    /// Validating constructor: Hermitian, unit trace, PSD within tolerance.
    pub fn new(dims: DimList, mat: CMat) -> Result<Self> {
        let s = DensityOperator { dims, mat };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(dims: DimList, mat: CMat) -> Self {
        DensityOperator { dims, mat }
    }

    /// Construct from a matrix known to be Hermitian PSD but possibly
    /// unnormalized (used for conditional states); rescales to unit trace.
    pub fn from_unnormalized(dims: DimList, mat: CMat) -> Result<Self> {
        let tr = mat.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState("non-positive trace".into()));
        }
        let s = DensityOperator {
            dims,
            mat: mat / Complex64::new(tr, 0.0),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mat.is_square() || self.mat.nrows() != self.dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} vs dims total {}",
                self.mat.nrows(),
                self.mat.ncols(),
                self.dims.total()
            )));
        }
        let defect = linalg::hermiticity_defect(&self.mat);
        if defect > TOL_STRUCTURAL {
            return Err(Error::InvalidState(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > TOL_STRUCTURAL || tr.im.abs() > TOL_STRUCTURAL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let vals = linalg::eigvalsh(&self.mat)?;
        linalg::clip_psd(&vals, "density operator")?;
        Ok(())
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn qubit(label: &str, bit: u8) -> Result<Self> {
        PureState::qubit_basis(label, bit).map(|s| s.to_density())
    }

    pub fn maximally_mixed(dims: DimList) -> Self {
        let n = dims.total();
        let mat = CMat::identity(n, n) / Complex64::new(n as f64, 0.0);
        DensityOperator { dims, mat }
    }

    /// Entropy in bits. Eigenvalues in (−1e-10, 0) are clipped to zero; the
    /// construction-time validation guards anything worse.
    pub fn entropy_bits(&self) -> f64 {
        let vals = linalg::eigvalsh(&self.mat).expect("square by construction");
        linalg::entropy_bits(&vals.iter().map(|v| v.max(0.0)).collect::<Vec<_>>())
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        let keep_dims = self.dims.select(keep)?;
        let keep_off = self.dims.subset_offsets(&self.dims.positions(keep)?);
        let mut rest_labels: Vec<&str> = Vec::new();
        for l in self.dims.labels() {
            if !keep.contains(&l) {
                rest_labels.push(l);
            }
        }
        let rest_off = self
            .dims
            .subset_offsets(&self.dims.positions(&rest_labels)?);
        let k = keep_off.len();
        let mut mat = CMat::zeros(k, k);
        for &roff in &rest_off {
            for (i, &io) in keep_off.iter().enumerate() {
                for (j, &jo) in keep_off.iter().enumerate() {
                    mat[(i, j)] += self.mat[(roff + io, roff + jo)];
                }
            }
        }
        Ok(DensityOperator::new_unchecked(keep_dims, mat))
    }

    pub fn permuted(&self, order: &[&str]) -> Result<DensityOperator> {
        let new_dims = self.dims.select(order)?;
        let positions = self.dims.positions(order)?;
        let old_strides = self.dims.strides();
        let sel_strides: Vec<usize> = positions.iter().map(|&p| old_strides[p]).collect();
        let sel_dims: Vec<usize> = positions.iter().map(|&p| self.dims.dim_at(p)).collect();
        let total = self.dims.total();
        // old flat offset for each new flat index
        let mut lookup = vec![0usize; total];
        let mut digits = vec![0usize; sel_dims.len()];
        let mut old_off = 0usize;
        for item in lookup.iter_mut() {
            *item = old_off;
            for d in (0..sel_dims.len()).rev() {
                digits[d] += 1;
                old_off += sel_strides[d];
                if digits[d] < sel_dims[d] {
                    break;
                }
                old_off -= sel_dims[d] * sel_strides[d];
                digits[d] = 0;
            }
        }
        let mut mat = CMat::zeros(total, total);
        for i in 0..total {
            for j in 0..total {
                mat[(i, j)] = self.mat[(lookup[i], lookup[j])];
            }
        }
        Ok(DensityOperator {
            dims: new_dims,
            mat,
        })
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator {
            dims: self.dims.concat(&other.dims)?,
            mat: linalg::kron(&self.mat, &other.mat),
        })
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Trace distance ½‖a − b‖₁.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dims().total() != b.dims().total() {
        return Err(Error::DimensionMismatch(
            "trace distance of unequal dimensions".into(),
        ));
    }
    Ok(0.5 * linalg::trace_norm_hermitian(&(a.matrix() - b.matrix()))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::dims::DimList;

    #[test]
    fn bell_pair_reductions_are_maximally_mixed() {
        let bell = PureState::bell_pair("A", "B").unwrap();
        let ra = bell.partial_trace(&["A"]).unwrap();
        assert!((ra.entropy_bits() - 1.0).abs() < 1e-12);
        let rb = bell.partial_trace(&["B"]).unwrap();
        assert!((rb.entropy_bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_round_trips() {
        let a = PureState::qubit_basis("A", 0).unwrap();
        let b = PureState::qubit_phase("B", 1).unwrap();
        let c = PureState::qubit_basis("C", 1).unwrap();
        let s = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let p = s.permuted(&["C", "A", "B"]).unwrap();
        let back = p.permuted(&["A", "B", "C"]).unwrap();
        let ip = s.inner(&back).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-12 && ip.im.abs() < 1e-14);
    }

    #[test]
    fn purity_symmetry_of_tripartite_pure_state() {
        // H(AB) = H(C) for any pure tripartite state.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let dims = DimList::new(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let s = crate::qcore::random::random_pure(dims, &mut rng);
        let h_ab = s.partial_trace(&["A", "B"]).unwrap().entropy_bits();
        let h_c = s.partial_trace(&["C"]).unwrap().entropy_bits();
        assert!((h_ab - h_c).abs() < 1e-10);
    }

    #[test]
    fn controlled_within_applies_per_branch() {
        // CNOT built as a controlled X via the generic primitive.
        let ctrl = PureState::qubit_phase("c", 0).unwrap();
        let tgt = PureState::qubit_basis("t", 0).unwrap();
        let s = ctrl.tensor(&tgt).unwrap();
        let x = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let out = s
            .apply_controlled_within(&["c"], &["t"], |c| {
                Ok(if c == 0 {
                    CMat::identity(2, 2)
                } else {
                    x.clone()
                })
            })
            .unwrap();
        // |+>|0> -> (|00> + |11>)/sqrt(2)
        let bell = PureState::bell_pair("c", "t").unwrap();
        let ip = out.inner(&bell).unwrap();
        assert!((ip.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isometry_application_adds_registers() {
        // V|b> = |b>|b> copy isometry on a qubit.
        let mut v = CMat::zeros(4, 2);
        v[(0, 0)] = Complex64::new(1.0, 0.0);
        v[(3, 1)] = Complex64::new(1.0, 0.0);
        let s = PureState::qubit_phase("q", 0).unwrap();
        let out = s
            .apply_isometry_on(&["q"], &[("q", 2), ("copy", 2)], &v)
            .unwrap();
        assert_eq!(out.dims().labels(), vec!["q", "copy"]);
        let bell = PureState::bell_pair("q", "copy").unwrap();
        assert!((out.inner(&bell).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_map_permutes_amplitudes() {
        // Swap |01> and |10> on two qubits (amplitude-level SWAP).
        let a = PureState::qubit_basis("a", 0).unwrap();
        let b = PureState::qubit_basis("b", 1).unwrap();
        let s = a.tensor(&b).unwrap();
        let out = s.apply_basis_map(&["a", "b"], &[0, 2, 1, 3]).unwrap();
        let expect = PureState::qubit_basis("a", 1)
            .unwrap()
            .tensor(&PureState::qubit_basis("b", 0).unwrap())
            .unwrap();
        assert!((out.inner(&expect).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_probabilities_sum_to_one() {
        let bell = PureState::bell_pair("A", "B").unwrap();
        let (p0, s0) = bell.project_basis("A", 0).unwrap();
        let (p1, _) = bell.project_basis("A", 1).unwrap();
        assert!((p0 + p1 - 1.0).abs() < 1e-12);
        let s0 = s0.unwrap();
        assert_eq!(s0.dims().labels(), vec!["B"]);
        let expect = PureState::qubit_basis("B", 0).unwrap();
        assert!((s0.inner(&expect).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let dims = DimList::new(&[("A", 2)]).unwrap();
        let m = CMat::identity(2, 2);
        assert!(DensityOperator::new(dims, m).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_pures_is_one() {
        let a = DensityOperator::qubit("A", 0).unwrap();
        let b = DensityOperator::qubit("A", 1).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }
}
