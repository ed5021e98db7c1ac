//! Successive-cancellation decoding as explicit measurement operators.
//!
//! Decoding runs wire by wire. At each undecided wire the decoder faces a
//! binary discrimination between two conditional block states: tensor
//! products of per-use channel outputs with the codeword structure folded in,
//! averaged over every wire not yet fixed. The step measurement is the
//! square-root ("pretty good") measurement of that pair, completed evenly off
//! the support so each step is exactly measurement-preserving. Chaining the
//! step operators along a decision path and squaring the product gives the
//! POVM element of an outcome string; the elements sum to the identity by
//! construction.
//!
//! Two representations coexist. When the two channel outputs commute they
//! share an eigenbasis, every conditional block is diagonal in the matching
//! product basis, and the whole decoder reduces to probability vectors; the
//! shared basis is kept so operators can still be materialized in the
//! computational basis. The general case stores dense operators and pays for
//! an eigendecomposition per step.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::polarize::{PolarTransform, Side};
use crate::qcore::linalg::{self, CMat};
use crate::qcore::CqChannel;
use crate::{Error, Result, MAX_BLOCK_DIM, MAX_DENSE_BLOCK_DIM, TOL_ASSERT, TOL_STRUCTURAL};

/// Eigenvalues of a step's two-state mixture below this count as kernel when
/// the square-root measurement inverts it.
const SUPPORT_TOL: f64 = 1e-11;

/// Cap on the total stored entries across all step operators. Dense decoders
/// beyond this are refused rather than ground through.
const NODE_ENTRY_BUDGET: u128 = 1 << 24;

#[derive(Debug)]
enum Repr {
    Dense {
        outputs: [CMat; 2],
        /// Square roots of the two step outcomes, keyed by (decision rank,
        /// known wire values packed with wire w at bit w-1).
        nodes: HashMap<(usize, u64), [CMat; 2]>,
    },
    Diagonal {
        /// Single-use eigenbasis shared by both outputs.
        basis: CMat,
        outputs: [Vec<f64>; 2],
        /// Square roots of step outcome diagonals, same keys as above.
        nodes: HashMap<(usize, u64), [Vec<f64>; 2]>,
    },
}

/// The full successive-cancellation decoder for one side (amplitude or
/// phase), one block length, and one setting of the frozen wires.
#[derive(Debug)]
pub struct SuccessiveCancellationPovm {
    side: Side,
    n_wires: usize,
    dim_block: usize,
    frozen: Vec<Option<u8>>,
    /// Wire indices (0-based) in decode order: ascending for the amplitude
    /// side, descending for the phase side.
    order: Vec<usize>,
    /// Positions within `order` that carry decisions (wires not frozen).
    decisions: Vec<usize>,
    /// Per wire (0-based), the block codeword mask contributed when that wire
    /// carries a one: column j of the generator sits at bit n_wires - 1 - j.
    row_masks: Vec<u64>,
    repr: Repr,
}

/// Build the decoder POVM for a binary channel `w`, transform `t`, and side.
///
/// `frozen[w]` fixes wire w+1 to a known value; `None` marks a wire the
/// decoder must decide. The amplitude side decodes wires in ascending order
/// against the generator's rows; the phase side decodes in descending order
/// against the transposed generator.
pub fn build_sc_povm(
    w: &CqChannel,
    t: &PolarTransform,
    side: Side,
    frozen: &[Option<u8>],
) -> Result<SuccessiveCancellationPovm> {
    if w.arity() != 2 {
        return Err(Error::InvalidChannel(format!(
            "successive cancellation decodes binary inputs; this channel has arity {}",
            w.arity()
        )));
    }
    let n_wires = t.size();
    if frozen.len() != n_wires {
        return Err(Error::DimensionMismatch(format!(
            "frozen pattern has {} entries for {} wires",
            frozen.len(),
            n_wires
        )));
    }
    for v in frozen.iter().flatten() {
        if *v > 1 {
            return Err(Error::InvalidArgument(format!(
                "frozen values are bits, got {v}"
            )));
        }
    }
    let d = w.output(0).dims().total();
    let mats: Vec<&CMat> = (0..2).map(|x| w.output(x).matrix()).collect();
    let shared = linalg::simultaneous_eigenbasis(&mats, TOL_STRUCTURAL)?;
    let cap = if shared.is_some() {
        MAX_BLOCK_DIM
    } else {
        MAX_DENSE_BLOCK_DIM
    };
    let mut dim_block = 1usize;
    for _ in 0..n_wires {
        dim_block = dim_block
            .checked_mul(d)
            .filter(|&v| v <= cap)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "decoder block dimension {d}^{n_wires} exceeds the exact cap {cap}; \
                     use the fidelity bound recursion at this depth"
                ))
            })?;
    }

    let transposed;
    let rows: &[Vec<u8>] = match side {
        Side::Amplitude => t.rows(),
        Side::Phase => {
            transposed = t.transposed_rows();
            &transposed
        }
    };
    let row_masks: Vec<u64> = rows
        .iter()
        .map(|row| {
            row.iter().enumerate().fold(0u64, |m, (j, &g)| {
                m | (u64::from(g & 1) << (n_wires - 1 - j))
            })
        })
        .collect();
    let order: Vec<usize> = match side {
        Side::Amplitude => (0..n_wires).collect(),
        Side::Phase => (0..n_wires).rev().collect(),
    };
    let decisions: Vec<usize> = (0..n_wires)
        .filter(|&pos| frozen[order[pos]].is_none())
        .collect();

    let node_count = (1u128 << decisions.len()) - 1;
    let per_node = 2u128
        * (dim_block as u128)
        * if shared.is_some() { 1 } else { dim_block as u128 };
    if node_count * per_node > NODE_ENTRY_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "decoder would store {} entries across {} step operators, over the cap {}",
            node_count * per_node,
            node_count,
            NODE_ENTRY_BUDGET
        )));
    }

    let repr = match shared {
        Some((basis, diags)) => Repr::Diagonal {
            basis,
            outputs: [clamped(&diags[0]), clamped(&diags[1])],
            nodes: HashMap::new(),
        },
        None => Repr::Dense {
            outputs: [mats[0].clone(), mats[1].clone()],
            nodes: HashMap::new(),
        },
    };
    let mut povm = SuccessiveCancellationPovm {
        side,
        n_wires,
        dim_block,
        frozen: frozen.to_vec(),
        order,
        decisions,
        row_masks,
        repr,
    };
    povm.build_nodes()?;
    Ok(povm)
}

fn clamped(diag: &[f64]) -> Vec<f64> {
    diag.iter().map(|&v| v.max(0.0)).collect()
}

impl SuccessiveCancellationPovm {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn wires(&self) -> usize {
        self.n_wires
    }

    pub fn block_dim(&self) -> usize {
        self.dim_block
    }

    pub fn frozen(&self) -> &[Option<u8>] {
        &self.frozen
    }

    /// 1-based wire indices the decoder decides, in decode order.
    pub fn decoded_wires(&self) -> Vec<usize> {
        self.decisions.iter().map(|&pos| self.order[pos] + 1).collect()
    }

    pub fn outcome_count(&self) -> usize {
        1usize << self.decisions.len()
    }

    /// Outcome string for an outcome index, most significant bit first in
    /// decode order.
    pub fn outcome_values(&self, index: usize) -> Vec<u8> {
        let k = self.decisions.len();
        (0..k).map(|j| ((index >> (k - 1 - j)) & 1) as u8).collect()
    }

    fn wire_value(&self, code: u64, wire: usize) -> usize {
        ((code >> (self.n_wires - 1 - wire)) & 1) as usize
    }

    fn codeword(&self, word: u64) -> u64 {
        let mut x = 0u64;
        let mut w = word;
        while w != 0 {
            let wire = w.trailing_zeros() as usize;
            x ^= self.row_masks[wire];
            w &= w - 1;
        }
        x
    }

    /// Walk the decode order once, building the square-root measurement pair
    /// for every reachable (decision, known-values) node.
    fn build_nodes(&mut self) -> Result<()> {
        let mut prefixes: Vec<u64> = vec![0];
        let mut rank = 0usize;
        for pos in 0..self.n_wires {
            let wire = self.order[pos];
            match self.frozen[wire] {
                Some(v) => {
                    if v == 1 {
                        for p in &mut prefixes {
                            *p |= 1 << wire;
                        }
                    }
                }
                None => {
                    let mut next = Vec::with_capacity(prefixes.len() * 2);
                    for &prefix in &prefixes {
                        let pair = self.step_pair(pos, prefix)?;
                        match &mut self.repr {
                            Repr::Dense { nodes, .. } => {
                                if let StepPair::Dense(p) = pair {
                                    nodes.insert((rank, prefix), p);
                                }
                            }
                            Repr::Diagonal { nodes, .. } => {
                                if let StepPair::Diagonal(p) = pair {
                                    nodes.insert((rank, prefix), p);
                                }
                            }
                        }
                        next.push(prefix);
                        next.push(prefix | (1 << wire));
                    }
                    prefixes = next;
                    rank += 1;
                }
            }
        }
        Ok(())
    }

    /// The two conditional block states at a decision, then their square-root
    /// measurement pair. `prefix` holds the values of every wire earlier in
    /// decode order; wires later in decode order are averaged uniformly.
    fn step_pair(&self, pos: usize, prefix: u64) -> Result<StepPair> {
        let target = self.order[pos];
        let free: Vec<usize> = (pos + 1..self.n_wires).map(|q| self.order[q]).collect();
        match &self.repr {
            Repr::Dense { outputs, .. } => {
                let sig0 = self.dense_block(outputs, prefix, &free);
                let sig1 = self.dense_block(outputs, prefix | (1 << target), &free);
                Ok(StepPair::Dense(dense_pgm(&sig0, &sig1)?))
            }
            Repr::Diagonal { outputs, .. } => {
                let sig0 = self.diag_block(outputs, prefix, &free);
                let sig1 = self.diag_block(outputs, prefix | (1 << target), &free);
                Ok(StepPair::Diagonal(diag_pgm(&sig0, &sig1)))
            }
        }
    }

    fn dense_block(&self, outputs: &[CMat; 2], base_word: u64, free: &[usize]) -> CMat {
        let scale = Complex64::new(1.0 / (1u64 << free.len()) as f64, 0.0);
        let mut acc = CMat::zeros(self.dim_block, self.dim_block);
        for assign in 0..(1u64 << free.len()) {
            let mut word = base_word;
            for (k, &wire) in free.iter().enumerate() {
                if (assign >> k) & 1 == 1 {
                    word |= 1 << wire;
                }
            }
            let code = self.codeword(word);
            let mut cur = outputs[self.wire_value(code, 0)].clone();
            for wire in 1..self.n_wires {
                cur = linalg::kron(&cur, &outputs[self.wire_value(code, wire)]);
            }
            acc += cur * scale;
        }
        acc
    }

    fn diag_block(&self, outputs: &[Vec<f64>; 2], base_word: u64, free: &[usize]) -> Vec<f64> {
        let scale = 1.0 / (1u64 << free.len()) as f64;
        let mut acc = vec![0.0; self.dim_block];
        for assign in 0..(1u64 << free.len()) {
            let mut word = base_word;
            for (k, &wire) in free.iter().enumerate() {
                if (assign >> k) & 1 == 1 {
                    word |= 1 << wire;
                }
            }
            let code = self.codeword(word);
            let mut cur = vec![scale];
            for wire in 0..self.n_wires {
                let d = &outputs[self.wire_value(code, wire)];
                let mut nxt = Vec::with_capacity(cur.len() * d.len());
                for &a in &cur {
                    for &b in d {
                        nxt.push(a * b);
                    }
                }
                cur = nxt;
            }
            for (a, b) in acc.iter_mut().zip(cur.iter()) {
                *a += *b;
            }
        }
        acc
    }

    /// Keys for the step operators along the decision path `values` (one bit
    /// per decided wire, in decode order).
    fn path_keys(&self, values: &[u8]) -> Result<Vec<((usize, u64), usize)>> {
        if values.len() != self.decisions.len() {
            return Err(Error::DimensionMismatch(format!(
                "outcome string has {} bits for {} decisions",
                values.len(),
                self.decisions.len()
            )));
        }
        let mut word = 0u64;
        let mut keys = Vec::with_capacity(values.len());
        let mut rank = 0usize;
        for pos in 0..self.n_wires {
            let wire = self.order[pos];
            match self.frozen[wire] {
                Some(v) => {
                    if v == 1 {
                        word |= 1 << wire;
                    }
                }
                None => {
                    let b = values[rank];
                    if b > 1 {
                        return Err(Error::InvalidArgument(format!(
                            "outcome values are bits, got {b}"
                        )));
                    }
                    keys.push(((rank, word), b as usize));
                    if b == 1 {
                        word |= 1 << wire;
                    }
                    rank += 1;
                }
            }
        }
        Ok(keys)
    }

    /// Product basis shared by all block operators in the diagonal
    /// representation: the single-use eigenbasis, tensored once per wire.
    fn product_basis(&self, basis: &CMat) -> Result<CMat> {
        if self.dim_block > MAX_DENSE_BLOCK_DIM {
            return Err(Error::BudgetExceeded(format!(
                "materializing a {} x {} operator exceeds the dense cap {}",
                self.dim_block, self.dim_block, MAX_DENSE_BLOCK_DIM
            )));
        }
        let mut b = CMat::identity(1, 1);
        for _ in 0..self.n_wires {
            b = linalg::kron(&b, basis);
        }
        Ok(b)
    }

    /// The POVM element for one outcome string: the squared decision-path
    /// product, materialized in the computational basis.
    pub fn element(&self, values: &[u8]) -> Result<CMat> {
        let keys = self.path_keys(values)?;
        match &self.repr {
            Repr::Dense { nodes, .. } => {
                let mut m = CMat::identity(self.dim_block, self.dim_block);
                for (key, b) in keys {
                    m = &nodes[&key][b] * m;
                }
                Ok(linalg::dagger(&m) * m)
            }
            Repr::Diagonal { basis, nodes, .. } => {
                let mut diag = vec![1.0f64; self.dim_block];
                for (key, b) in keys {
                    for (v, s) in diag.iter_mut().zip(nodes[&key][b].iter()) {
                        *v *= s * s;
                    }
                }
                self.materialize_diag(basis, &diag)
            }
        }
    }

    /// The positive square root of [`Self::element`].
    pub fn element_sqrt(&self, values: &[u8]) -> Result<CMat> {
        let keys = self.path_keys(values)?;
        match &self.repr {
            Repr::Dense { nodes, .. } => {
                let mut m = CMat::identity(self.dim_block, self.dim_block);
                for (key, b) in keys {
                    m = &nodes[&key][b] * m;
                }
                linalg::sqrtm_psd(&(linalg::dagger(&m) * &m))
            }
            Repr::Diagonal { basis, nodes, .. } => {
                let mut diag = vec![1.0f64; self.dim_block];
                for (key, b) in keys {
                    for (v, s) in diag.iter_mut().zip(nodes[&key][b].iter()) {
                        *v *= s * s;
                    }
                }
                for v in &mut diag {
                    *v = v.sqrt();
                }
                self.materialize_diag(basis, &diag)
            }
        }
    }

    fn materialize_diag(&self, basis: &CMat, diag: &[f64]) -> Result<CMat> {
        let b = self.product_basis(basis)?;
        let mut scaled = b.clone();
        for (k, &v) in diag.iter().enumerate() {
            let w = Complex64::new(v, 0.0);
            for r in 0..self.dim_block {
                scaled[(r, k)] *= w;
            }
        }
        Ok(scaled * linalg::dagger(&b))
    }

    /// Largest deviation from the identity of the sum of all POVM elements,
    /// assembled by the same step recursion the decoder uses.
    pub fn completeness_defect(&self) -> Result<f64> {
        match &self.repr {
            Repr::Dense { nodes, .. } => {
                let total = self.sum_dense(nodes, 0, 0, 0);
                let mut defect = 0.0f64;
                for r in 0..self.dim_block {
                    for c in 0..self.dim_block {
                        let target = if r == c {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        defect = defect.max((total[(r, c)] - target).norm());
                    }
                }
                Ok(defect)
            }
            Repr::Diagonal { nodes, .. } => {
                let total = self.sum_diag(nodes, 0, 0, 0);
                Ok(total
                    .iter()
                    .map(|v| (v - 1.0).abs())
                    .fold(0.0f64, f64::max))
            }
        }
    }

    fn sum_dense(
        &self,
        nodes: &HashMap<(usize, u64), [CMat; 2]>,
        mut pos: usize,
        rank: usize,
        mut word: u64,
    ) -> CMat {
        while pos < self.n_wires {
            let wire = self.order[pos];
            match self.frozen[wire] {
                Some(v) => {
                    if v == 1 {
                        word |= 1 << wire;
                    }
                    pos += 1;
                }
                None => {
                    let pair = &nodes[&(rank, word)];
                    let mut acc = CMat::zeros(self.dim_block, self.dim_block);
                    for (b, sqrt_e) in pair.iter().enumerate() {
                        let child = word | ((b as u64) << wire);
                        let sub = self.sum_dense(nodes, pos + 1, rank + 1, child);
                        acc += sqrt_e * sub * sqrt_e;
                    }
                    return acc;
                }
            }
        }
        CMat::identity(self.dim_block, self.dim_block)
    }

    fn sum_diag(
        &self,
        nodes: &HashMap<(usize, u64), [Vec<f64>; 2]>,
        mut pos: usize,
        rank: usize,
        mut word: u64,
    ) -> Vec<f64> {
        while pos < self.n_wires {
            let wire = self.order[pos];
            match self.frozen[wire] {
                Some(v) => {
                    if v == 1 {
                        word |= 1 << wire;
                    }
                    pos += 1;
                }
                None => {
                    let pair = &nodes[&(rank, word)];
                    let mut acc = vec![0.0f64; self.dim_block];
                    for (b, sqrt_e) in pair.iter().enumerate() {
                        let child = word | ((b as u64) << wire);
                        let sub = self.sum_diag(nodes, pos + 1, rank + 1, child);
                        for i in 0..self.dim_block {
                            acc[i] += sqrt_e[i] * sqrt_e[i] * sub[i];
                        }
                    }
                    return acc;
                }
            }
        }
        vec![1.0f64; self.dim_block]
    }

    /// Exact block error of this decoder: one minus the average, over uniform
    /// values of the decided wires, of the probability that the decision path
    /// reproduces them when the block carries the matching codeword.
    pub fn block_error_exact(&self) -> Result<f64> {
        let decided = self.decisions.len();
        let weight = 1.0 / (1u64 << decided) as f64;
        let success = match &self.repr {
            Repr::Dense { outputs, nodes } => {
                let m = CMat::identity(self.dim_block, self.dim_block);
                self.success_dense(outputs, nodes, 0, 0, 0, &m) * weight
            }
            Repr::Diagonal { outputs, nodes, .. } => {
                let m = vec![1.0f64; self.dim_block];
                self.success_diag(outputs, nodes, 0, 0, 0, &m) * weight
            }
        };
        Ok((1.0 - success).clamp(0.0, 1.0))
    }

    fn success_dense(
        &self,
        outputs: &[CMat; 2],
        nodes: &HashMap<(usize, u64), [CMat; 2]>,
        mut pos: usize,
        rank: usize,
        mut word: u64,
        m: &CMat,
    ) -> f64 {
        while pos < self.n_wires {
            let wire = self.order[pos];
            match self.frozen[wire] {
                Some(v) => {
                    if v == 1 {
                        word |= 1 << wire;
                    }
                    pos += 1;
                }
                None => {
                    let pair = &nodes[&(rank, word)];
                    let mut total = 0.0;
                    for (b, sqrt_e) in pair.iter().enumerate() {
                        let child = word | ((b as u64) << wire);
                        let next = sqrt_e * m;
                        total +=
                            self.success_dense(outputs, nodes, pos + 1, rank + 1, child, &next);
                    }
                    return total;
                }
            }
        }
        // Leaf: probability that this path fires on its own codeword.
        let code = self.codeword(word);
        let mut rho = outputs[self.wire_value(code, 0)].clone();
        for wire in 1..self.n_wires {
            rho = linalg::kron(&rho, &outputs[self.wire_value(code, wire)]);
        }
        let t1 = m * rho;
        let mut p = 0.0;
        for r in 0..self.dim_block {
            for c in 0..self.dim_block {
                p += (t1[(r, c)] * m[(r, c)].conj()).re;
            }
        }
        p
    }

    fn success_diag(
        &self,
        outputs: &[Vec<f64>; 2],
        nodes: &HashMap<(usize, u64), [Vec<f64>; 2]>,
        mut pos: usize,
        rank: usize,
        mut word: u64,
        m: &[f64],
    ) -> f64 {
        while pos < self.n_wires {
            let wire = self.order[pos];
            match self.frozen[wire] {
                Some(v) => {
                    if v == 1 {
                        word |= 1 << wire;
                    }
                    pos += 1;
                }
                None => {
                    let pair = &nodes[&(rank, word)];
                    let mut total = 0.0;
                    for (b, sqrt_e) in pair.iter().enumerate() {
                        let child = word | ((b as u64) << wire);
                        let next: Vec<f64> =
                            m.iter().zip(sqrt_e.iter()).map(|(a, s)| a * s).collect();
                        total +=
                            self.success_diag(outputs, nodes, pos + 1, rank + 1, child, &next);
                    }
                    return total;
                }
            }
        }
        let code = self.codeword(word);
        let mut rho = vec![1.0f64];
        for wire in 0..self.n_wires {
            let d = &outputs[self.wire_value(code, wire)];
            let mut nxt = Vec::with_capacity(rho.len() * d.len());
            for &a in &rho {
                for &b in d {
                    nxt.push(a * b);
                }
            }
            rho = nxt;
        }
        m.iter().zip(rho.iter()).map(|(a, r)| a * a * r).sum()
    }
}

enum StepPair {
    Dense([CMat; 2]),
    Diagonal([Vec<f64>; 2]),
}

/// Square-root measurement between two PSD blocks, completed evenly off the
/// joint support, returned as the square roots of the two outcomes.
fn dense_pgm(sig0: &CMat, sig1: &CMat) -> Result<[CMat; 2]> {
    let dim = sig0.nrows();
    let s = sig0 + sig1;
    let (vals, vecs) = linalg::eigh(&s)?;
    let mut half_inv_cols = vecs.clone();
    let mut supp_cols = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let (wi, ws) = if v > SUPPORT_TOL {
            (Complex64::new(v.powf(-0.25), 0.0), Complex64::new(1.0, 0.0))
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        };
        for r in 0..dim {
            half_inv_cols[(r, k)] *= wi;
            supp_cols[(r, k)] *= ws;
        }
    }
    let inv_half = &half_inv_cols * linalg::dagger(&half_inv_cols);
    let proj = &supp_cols * linalg::dagger(&supp_cols);
    let mut outcomes = Vec::with_capacity(2);
    for sig in [sig0, sig1] {
        let mut e = &inv_half * sig * &inv_half;
        let half = Complex64::new(0.5, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                let eye = if r == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                e[(r, c)] += (eye - proj[(r, c)]) * half;
            }
        }
        outcomes.push(e);
    }
    let mut defect = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let eye = if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            defect = defect.max((outcomes[0][(r, c)] + outcomes[1][(r, c)] - eye).norm());
        }
    }
    if defect > TOL_ASSERT {
        return Err(Error::InvalidState(format!(
            "decoder step outcomes miss completeness by {defect:.3e}"
        )));
    }
    Ok([
        linalg::sqrtm_psd(&outcomes[0])?,
        linalg::sqrtm_psd(&outcomes[1])?,
    ])
}

fn diag_pgm(sig0: &[f64], sig1: &[f64]) -> [Vec<f64>; 2] {
    let mut out0 = Vec::with_capacity(sig0.len());
    let mut out1 = Vec::with_capacity(sig1.len());
    for (&a, &b) in sig0.iter().zip(sig1.iter()) {
        let s = a + b;
        if s > SUPPORT_TOL {
            out0.push((a.max(0.0) / s).sqrt());
            out1.push((b.max(0.0) / s).sqrt());
        } else {
            out0.push(0.5f64.sqrt());
            out1.push(0.5f64.sqrt());
        }
    }
    [out0, out1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{induce_phase, QubitChannelSpec};
    use crate::polarize::{default_threshold, phase_table};
    use crate::qcore::linalg::{eigvalsh, frobenius_distance};
    use crate::qcore::{DensityOperator, DimList};

    fn diag_state(label: &str, probs: &[f64]) -> DensityOperator {
        let dim = probs.len();
        let mut m = CMat::zeros(dim, dim);
        for (k, &p) in probs.iter().enumerate() {
            m[(k, k)] = Complex64::new(p, 0.0);
        }
        DensityOperator::new(DimList::new(&[(label, dim)]).unwrap(), m).unwrap()
    }

    fn erasure_pair(p: f64) -> CqChannel {
        CqChannel::new(vec![
            diag_state("Y", &[1.0 - p, 0.0, p]),
            diag_state("Y", &[0.0, 1.0 - p, p]),
        ])
        .unwrap()
    }

    #[test]
    fn perfect_channel_decodes_without_error() {
        let w = CqChannel::new(vec![
            diag_state("Y", &[1.0, 0.0]),
            diag_state("Y", &[0.0, 1.0]),
        ])
        .unwrap();
        let t = PolarTransform::new(2, true).unwrap();
        let povm = build_sc_povm(&w, &t, Side::Amplitude, &[None, None, None, None]).unwrap();
        assert_eq!(povm.decoded_wires(), vec![1, 2, 3, 4]);
        assert!(povm.block_error_exact().unwrap() < 1e-10);
        assert!(povm.completeness_defect().unwrap() < 1e-9);
    }

    #[test]
    fn erasure_second_wire_error_is_an_eighth() {
        let w = erasure_pair(0.5);
        let t = PolarTransform::new(1, true).unwrap();
        for fixed in [0u8, 1u8] {
            let povm = build_sc_povm(&w, &t, Side::Amplitude, &[Some(fixed), None]).unwrap();
            let err = povm.block_error_exact().unwrap();
            // Both observations must be erased (probability 1/4) and the
            // coin flip must land wrong (1/2).
            assert!((err - 0.125).abs() < 1e-12, "got {err}");
            assert!(err <= (2.0f64 * 0.25).sqrt() + 1e-12);
            assert!(povm.completeness_defect().unwrap() < 1e-9);
        }
    }

    #[test]
    fn dephasing_phase_decoder_meets_the_fidelity_sum_bound() {
        let spec = QubitChannelSpec::preset("dephasing", 0.1).unwrap();
        let w_p = induce_phase(&spec).unwrap();
        let t = PolarTransform::new(2, true).unwrap();
        let table = phase_table(&w_p, &t).unwrap();
        let delta = default_threshold(2);
        let mut frozen: Vec<Option<u8>> = Vec::new();
        let mut f_sum = 0.0;
        for entry in table.entries() {
            if entry.effective_f() < delta {
                frozen.push(None);
                f_sum += entry.exact_f.unwrap();
            } else {
                frozen.push(Some((entry.index % 2) as u8));
            }
        }
        assert!(
            frozen.iter().any(Option::is_none),
            "threshold should leave at least one decodable wire"
        );
        let povm = build_sc_povm(&w_p, &t, Side::Phase, &frozen).unwrap();
        let err = povm.block_error_exact().unwrap();
        assert!(
            err <= (2.0 * f_sum).sqrt() + 1e-9,
            "error {err} vs bound {}",
            (2.0 * f_sum).sqrt()
        );
        assert!(povm.completeness_defect().unwrap() < 1e-9);
    }

    #[test]
    fn dense_elements_are_positive_and_sum_to_identity() {
        let spec = QubitChannelSpec::preset("amplitude_damping", 0.3).unwrap();
        let w_p = induce_phase(&spec).unwrap();
        let t = PolarTransform::new(1, true).unwrap();
        for frozen in [
            vec![None, None],
            vec![Some(0u8), None],
            vec![None, Some(1u8)],
        ] {
            let povm = build_sc_povm(&w_p, &t, Side::Phase, &frozen).unwrap();
            assert!(matches!(povm.repr, Repr::Dense { .. }));
            assert!(povm.completeness_defect().unwrap() < 1e-9);
            let dim = povm.block_dim();
            let mut total = CMat::zeros(dim, dim);
            for idx in 0..povm.outcome_count() {
                let values = povm.outcome_values(idx);
                let e = povm.element(&values).unwrap();
                let low = eigvalsh(&e)
                    .unwrap()
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                assert!(low > -1e-9, "element {idx} has eigenvalue {low}");
                let sq = povm.element_sqrt(&values).unwrap();
                assert!(frobenius_distance(&(&sq * &sq), &e) < 1e-9);
                total += e;
            }
            assert!(frobenius_distance(&total, &CMat::identity(dim, dim)) < 1e-9);
        }
    }

    #[test]
    fn rotated_commuting_outputs_match_their_diagonal_form() {
        let c = 0.7f64.cos();
        let s = 0.7f64.sin();
        let rot = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(c, 0.0),
            ],
        );
        let d0 = diag_state("Y", &[0.8, 0.2]);
        let d1 = diag_state("Y", &[0.3, 0.7]);
        let rotate = |d: &DensityOperator| {
            DensityOperator::new(
                d.dims().clone(),
                &rot * d.matrix() * linalg::dagger(&rot),
            )
            .unwrap()
        };
        let plain = CqChannel::new(vec![d0.clone(), d1.clone()]).unwrap();
        let turned = CqChannel::new(vec![rotate(&d0), rotate(&d1)]).unwrap();
        let t = PolarTransform::new(1, true).unwrap();
        let povm_a = build_sc_povm(&plain, &t, Side::Amplitude, &[None, None]).unwrap();
        let povm_b = build_sc_povm(&turned, &t, Side::Amplitude, &[None, None]).unwrap();
        assert!(matches!(povm_b.repr, Repr::Diagonal { .. }));
        let ea = povm_a.block_error_exact().unwrap();
        let eb = povm_b.block_error_exact().unwrap();
        assert!((ea - eb).abs() < 1e-10, "{ea} vs {eb}");
        // The materialized elements must live in the computational basis:
        // they sum to the identity and conjugate correctly under the local
        // rotation.
        let dim = povm_b.block_dim();
        let mut total = CMat::zeros(dim, dim);
        let big = linalg::kron(&rot, &rot);
        for idx in 0..povm_b.outcome_count() {
            let values = povm_b.outcome_values(idx);
            let e_b = povm_b.element(&values).unwrap();
            let e_a = povm_a.element(&values).unwrap();
            assert!(frobenius_distance(&e_b, &(&big * e_a * linalg::dagger(&big))) < 1e-9);
            total += e_b;
        }
        assert!(frobenius_distance(&total, &CMat::identity(dim, dim)) < 1e-9);
    }

    #[test]
    fn dephasing_errors_grow_with_the_noise() {
        let t = PolarTransform::new(1, true).unwrap();
        let mut last = -1.0;
        for p in [0.05, 0.1, 0.2, 0.35, 0.5] {
            let spec = QubitChannelSpec::preset("dephasing", p).unwrap();
            let w_p = induce_phase(&spec).unwrap();
            let povm = build_sc_povm(&w_p, &t, Side::Phase, &[None, None]).unwrap();
            let err = povm.block_error_exact().unwrap();
            assert!(
                err >= last - 1e-9,
                "error fell from {last} to {err} at p = {p}"
            );
            last = err;
        }
    }

    #[test]
    fn oversized_blocks_are_refused() {
        let spec = QubitChannelSpec::preset("amplitude_damping", 0.3).unwrap();
        let w_p = induce_phase(&spec).unwrap();
        let t = PolarTransform::new(3, true).unwrap();
        let frozen = vec![None; 8];
        match build_sc_povm(&w_p, &t, Side::Phase, &frozen) {
            Err(Error::BudgetExceeded(msg)) => {
                assert!(msg.contains("cap"), "{msg}");
            }
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_step_storage_is_refused() {
        // Non-commuting qubit outputs at block length eight: the block fits
        // the dense cap but the step operators do not.
        let mut m1 = CMat::zeros(2, 2);
        m1[(0, 0)] = Complex64::new(0.5, 0.0);
        m1[(1, 1)] = Complex64::new(0.5, 0.0);
        m1[(0, 1)] = Complex64::new(0.45, 0.0);
        m1[(1, 0)] = Complex64::new(0.45, 0.0);
        let w = CqChannel::new(vec![
            diag_state("Y", &[1.0, 0.0]),
            DensityOperator::new(DimList::new(&[("Y", 2)]).unwrap(), m1).unwrap(),
        ])
        .unwrap();
        let t = PolarTransform::new(3, true).unwrap();
        let frozen = vec![None; 8];
        match build_sc_povm(&w, &t, Side::Amplitude, &frozen) {
            Err(Error::BudgetExceeded(msg)) => {
                assert!(msg.contains("step operators"), "{msg}");
            }
            other => panic!("expected a budget error, got {other:?}"),
        }
    }
}
