//! The incoherent private scheme at tiny block lengths, with two exact
//! figures of merit.
//!
//! Reliability: for sampled settings of the frozen wires and the pre-shared
//! key, the receiver's successive-cancellation measurement is assembled
//! explicitly and its block error is computed exactly, the message and
//! randomization wires averaged uniformly.
//!
//! Secrecy: the eavesdropper's conditional block states are assembled from
//! her induced per-use channel for every message value, with everything she
//! does not know (randomization, frozen record, key) averaged uniformly, and
//! the leakage is the Holevo information of that ensemble. It is computed
//! over the unconditioned ensemble, frozen record included, because that is
//! the ensemble the chain-rule secrecy argument bounds.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;

use crate::channels::{induce_private, Preprocessor, QubitChannelSpec};
use crate::design::CodePartition;
use crate::polarize::{PolarTransform, Side};
use crate::protosim::povm::build_sc_povm;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::random::rng_from_seed;
use crate::qcore::CqChannel;
use crate::{Error, Result, MAX_DENSE_BLOCK_DIM};

/// Depth cap for the private simulation. Within it, channels with commuting
/// outputs ride the decoder's probability-vector path; general channels are
/// further limited by the decoder's own operator budgets.
const MAX_PRIVATE_DEPTH: u32 = 3;

/// One sampled setting of the frozen wires and key, with its block error.
#[derive(Clone, Debug)]
pub struct PrivateChoice {
    /// Values of the frozen (publicly known) wires, in partition order.
    pub z_values: Vec<u8>,
    /// Values of the pre-shared secret key wires, in partition order.
    pub key_values: Vec<u8>,
    /// Exact block error of the receiver's measurement for this setting.
    pub block_error: f64,
}

/// Outcome of a private protocol run.
#[derive(Clone, Debug)]
pub struct PrivateProtocolResult {
    /// Mean exact block error over the sampled settings.
    pub block_error: f64,
    /// Worst sampled block error.
    pub worst_block_error: f64,
    /// Exact Holevo information between the message wires and the
    /// eavesdropper's block output, in bits.
    pub leakage_bits: f64,
    /// Every sampled setting, in sampling order.
    pub per_choice: Vec<PrivateChoice>,
    /// The seed the settings were drawn from.
    pub seed: u64,
}

/// Run the private scheme across `2^n` uses of `ch`, preceded by the
/// symbol-wise preprocessor `pre`, with the wire assignment in `partition`.
/// Frozen wires and key wires are sampled uniformly `trials` times from
/// `seed`; message and randomization wires are averaged exactly, so each
/// sampled setting yields exact reliability and the secrecy figure is
/// computed once for the whole ensemble.
pub fn run_private_protocol(
    ch: &QubitChannelSpec,
    pre: &Preprocessor,
    partition: &CodePartition,
    trials: usize,
    seed: u64,
) -> Result<PrivateProtocolResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one frozen-wire trial is needed".into(),
        ));
    }
    if partition.depth() > MAX_PRIVATE_DEPTH {
        return Err(Error::BudgetExceeded(format!(
            "private simulation is capped at depth {MAX_PRIVATE_DEPTH} (block length {}), \
             got depth {}",
            1u32 << MAX_PRIVATE_DEPTH,
            partition.depth()
        )));
    }
    let induced = induce_private(ch, pre)?;
    let t = PolarTransform::new(partition.depth(), true)?;
    let nn = partition.size();
    let z_len = partition.z().len();
    let b_len = partition.b().len();
    let mut rng = rng_from_seed(seed);
    let runs = if z_len + b_len == 0 { 1 } else { trials };
    let mut cache: HashMap<(Vec<u8>, Vec<u8>), f64> = HashMap::new();
    let mut per_choice = Vec::with_capacity(runs);
    let mut worst = 0.0f64;
    let mut mean = 0.0f64;
    for _ in 0..runs {
        let u_z: Vec<u8> = (0..z_len).map(|_| rng.gen_range(0..2u8)).collect();
        let u_b: Vec<u8> = (0..b_len).map(|_| rng.gen_range(0..2u8)).collect();
        let key = (u_z.clone(), u_b.clone());
        if !cache.contains_key(&key) {
            let mut frozen: Vec<Option<u8>> = vec![None; nn];
            for (j, &w) in partition.z().iter().enumerate() {
                frozen[w - 1] = Some(u_z[j]);
            }
            for (j, &w) in partition.b().iter().enumerate() {
                frozen[w - 1] = Some(u_b[j]);
            }
            let povm = build_sc_povm(&induced.w_a, &t, Side::Amplitude, &frozen)?;
            cache.insert(key.clone(), povm.block_error_exact()?);
        }
        let err = cache[&key];
        per_choice.push(PrivateChoice {
            z_values: u_z,
            key_values: u_b,
            block_error: err,
        });
        worst = worst.max(err);
        mean += err;
    }
    Ok(PrivateProtocolResult {
        block_error: mean / runs as f64,
        worst_block_error: worst,
        leakage_bits: exact_leakage(&induced.w_env, &t, partition)?,
        per_choice,
        seed,
    })
}

/// Exact Holevo information between the message wires and the eavesdropper's
/// block output, every other wire averaged uniformly.
fn exact_leakage(w_env: &CqChannel, t: &PolarTransform, part: &CodePartition) -> Result<f64> {
    let nn = t.size();
    let d_e = w_env.output(0).dims().total();
    let mut dim = 1usize;
    for _ in 0..nn {
        dim = dim
            .checked_mul(d_e)
            .filter(|&v| v <= MAX_DENSE_BLOCK_DIM)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "eavesdropper block dimension {d_e}^{nn} exceeds the exact cap \
                     {MAX_DENSE_BLOCK_DIM}"
                ))
            })?;
    }
    let masks: Vec<u64> = t
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u64, |m, (j, &g)| m | (u64::from(g & 1) << (nn - 1 - j)))
        })
        .collect();
    let a = part.a();
    let others: Vec<usize> = (1..=nn)
        .filter(|w| a.binary_search(w).is_err())
        .collect();
    let scale = Complex64::new(1.0 / (1u64 << others.len()) as f64, 0.0);
    let count = 1usize << a.len();
    let mut states = Vec::with_capacity(count);
    for ua in 0..count {
        let mut acc = CMat::zeros(dim, dim);
        for assign in 0..(1u64 << others.len()) {
            let mut code = 0u64;
            for (j, &w) in a.iter().enumerate() {
                if (ua >> (a.len() - 1 - j)) & 1 == 1 {
                    code ^= masks[w - 1];
                }
            }
            for (k, &w) in others.iter().enumerate() {
                if (assign >> k) & 1 == 1 {
                    code ^= masks[w - 1];
                }
            }
            let mut block = w_env
                .output(((code >> (nn - 1)) & 1) as usize)
                .matrix()
                .clone();
            for slot in 1..nn {
                let bit = ((code >> (nn - 1 - slot)) & 1) as usize;
                block = linalg::kron(&block, w_env.output(bit).matrix());
            }
            acc += block * scale;
        }
        states.push(acc);
    }
    let prior = Complex64::new(1.0 / count as f64, 0.0);
    let mut avg = CMat::zeros(dim, dim);
    for s in &states {
        avg += s * prior;
    }
    let mut chi = linalg::entropy_of(&avg, "eavesdropper average state")?;
    for s in &states {
        chi -= linalg::entropy_of(s, "eavesdropper conditional state")? / count as f64;
    }
    Ok(chi.max(0.0))
}
