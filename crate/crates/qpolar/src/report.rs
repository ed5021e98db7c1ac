//! Emission of tables and result summaries: CSV for per-wire data,
//! `key: value` structured text for nested reports. Every emitter starts its
//! output with a `# <schema> v1` line and re-validates the invariants of
//! what it is writing, refusing to emit rather than writing a corrupt table.
//!
//! Formatting is deterministic: floats print in shortest round-trip form
//! (scientific only outside [1e-4, 1e6)), so equal inputs give byte-equal
//! reports.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::design::{CodePartition, DisjointnessReport, RateReport, SuperactivationReport};
use crate::polarize::PolarTable;
use crate::protosim::{PrivateProtocolResult, ProtocolResult};
use crate::{Error, Result, TOL_ASSERT};

/// Shortest round-trip float form, switching to scientific notation only
/// when the plain form would sprawl.
pub fn fmt_f(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt_f(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn set_line(s: &[usize]) -> String {
    if s.is_empty() {
        "-".into()
    } else {
        s.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn bits(b: &[u8]) -> String {
    if b.is_empty() {
        "-".into()
    } else {
        b.iter().map(|x| char::from(b'0' + x)).collect()
    }
}

/// Per-wire polarization table as CSV. The `classification` column applies
/// `threshold` to the effective fidelity, matching the partition rule.
pub fn polar_table_csv(table: &PolarTable, threshold: f64) -> Result<String> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    for e in table.entries() {
        for v in [e.exact_i, e.exact_f] {
            if let Some(v) = v {
                if !(0.0..=1.0 + TOL_ASSERT).contains(&v) {
                    return Err(Error::InvalidState(format!(
                        "wire {}: exact value {v} outside [0, 1]",
                        e.index
                    )));
                }
            }
        }
        if let Some(f) = e.exact_f {
            if f > e.f_bound + TOL_ASSERT {
                return Err(Error::InvalidState(format!(
                    "wire {}: exact fidelity {f} exceeds its bound {}",
                    e.index, e.f_bound
                )));
            }
        }
    }
    let mut out = String::from("# polar-table v1\n");
    out.push_str("index,side,exact_I,exact_F,f_bound,classification\n");
    for e in table.entries() {
        let class = if e.effective_f() < threshold {
            "good"
        } else {
            "bad"
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{class}",
            e.index,
            table.side().as_str(),
            opt_f(e.exact_i),
            opt_f(e.exact_f),
            fmt_f(e.f_bound),
        );
    }
    Ok(out)
}

/// The four-way wire partition as structured text.
pub fn partition_text(p: &CodePartition) -> Result<String> {
    let mut seen = vec![false; p.size()];
    for &i in p.a().iter().chain(p.x()).chain(p.z()).chain(p.b()) {
        if i == 0 || i > p.size() || seen[i - 1] {
            return Err(Error::InvalidState(format!(
                "partition sets repeat or overflow at wire {i}"
            )));
        }
        seen[i - 1] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::InvalidState(
            "partition sets do not cover every wire".into(),
        ));
    }
    let mut out = String::from("# code-partition v1\n");
    let _ = writeln!(out, "n: {}", p.depth());
    let _ = writeln!(out, "N: {}", p.size());
    let _ = writeln!(out, "threshold: {}", fmt_f(p.threshold()));
    let _ = writeln!(
        out,
        "provenance: amplitude={} phase={}",
        p.amp_provenance().as_str(),
        p.phase_provenance().as_str()
    );
    let _ = writeln!(out, "A: {}", set_line(p.a()));
    let _ = writeln!(out, "X: {}", set_line(p.x()));
    let _ = writeln!(out, "Z: {}", set_line(p.z()));
    let _ = writeln!(out, "B: {}", set_line(p.b()));
    let _ = writeln!(out, "net_rate: {}", fmt_f(p.net_rate()));
    let _ = writeln!(out, "assistance_rate: {}", fmt_f(p.assistance_rate()));
    Ok(out)
}

pub fn rate_report_text(r: &RateReport) -> String {
    let mut out = String::from("# rate-report v1\n");
    let _ = writeln!(out, "kind: {}", r.kind.as_str());
    let _ = writeln!(out, "rate: {}", fmt_f(r.rate));
    let _ = writeln!(out, "assistance_rate: {}", fmt_f(r.assistance_rate));
    if let Some(t) = r.asymptotic_target {
        let _ = writeln!(out, "asymptotic_target: {}", fmt_f(t));
    }
    out
}

/// Ebit-generation outcome as structured text, one line per sampled frozen
/// choice.
pub fn protocol_result_text(r: &ProtocolResult) -> Result<String> {
    for d in [r.ebit_trace_distance, r.worst_trace_distance] {
        if !(0.0..=1.0 + TOL_ASSERT).contains(&d) {
            return Err(Error::InvalidState(format!(
                "trace distance {d} outside [0, 1]"
            )));
        }
    }
    let mut out = String::from("# protocol-result v1\n");
    let _ = writeln!(out, "seed: {}", r.seed);
    let _ = writeln!(out, "choices: {}", r.per_choice.len());
    let _ = writeln!(out, "mean_trace_distance: {}", fmt_f(r.ebit_trace_distance));
    let _ = writeln!(
        out,
        "worst_trace_distance: {}",
        fmt_f(r.worst_trace_distance)
    );
    for c in &r.per_choice {
        let _ = writeln!(
            out,
            "choice: z={} x={} trace_distance={}",
            bits(&c.z_values),
            bits(&c.x_values),
            fmt_f(c.trace_distance)
        );
    }
    Ok(out)
}

/// Private-scheme outcome as structured text.
pub fn private_result_text(r: &PrivateProtocolResult) -> Result<String> {
    for e in [r.block_error, r.worst_block_error] {
        if !(0.0..=1.0 + TOL_ASSERT).contains(&e) {
            return Err(Error::InvalidState(format!(
                "block error {e} outside [0, 1]"
            )));
        }
    }
    if r.leakage_bits < -TOL_ASSERT {
        return Err(Error::InvalidState(format!(
            "negative leakage {}",
            r.leakage_bits
        )));
    }
    let mut out = String::from("# private-result v1\n");
    let _ = writeln!(out, "seed: {}", r.seed);
    let _ = writeln!(out, "choices: {}", r.per_choice.len());
    let _ = writeln!(out, "mean_block_error: {}", fmt_f(r.block_error));
    let _ = writeln!(out, "worst_block_error: {}", fmt_f(r.worst_block_error));
    let _ = writeln!(out, "leakage_bits: {}", fmt_f(r.leakage_bits));
    for c in &r.per_choice {
        let _ = writeln!(
            out,
            "choice: z={} key={} block_error={}",
            bits(&c.z_values),
            bits(&c.key_values),
            fmt_f(c.block_error)
        );
    }
    Ok(out)
}

/// Chain-rule rate decomposition of a joint channel as structured text.
pub fn superactivation_text(r: &SuperactivationReport) -> String {
    let mut out = String::from("# superactivation v1\n");
    let _ = writeln!(out, "factors: {}", r.factors.len());
    for f in &r.factors {
        let _ = writeln!(
            out,
            "factor: index={} amplitude_term={} phase_term={} net={}",
            f.index,
            fmt_f(f.amplitude_term),
            fmt_f(f.phase_term),
            fmt_f(f.net)
        );
    }
    let _ = writeln!(out, "total: {}", fmt_f(r.total));
    let _ = writeln!(
        out,
        "joint_coherent_information: {}",
        fmt_f(r.joint_coherent_information)
    );
    out
}

/// Degradable-channel set evidence as structured text.
pub fn disjointness_text(r: &DisjointnessReport) -> String {
    let mut out = String::from("# disjointness v1\n");
    let _ = writeln!(out, "threshold: {}", fmt_f(r.threshold));
    let _ = writeln!(out, "asserted_degradable: {}", r.asserted_degradable);
    let _ = writeln!(out, "B: {}", set_line(r.partition.b()));
    let _ = writeln!(out, "phase_good: {}", set_line(&r.phase_good));
    let _ = writeln!(out, "reservoir_good: {}", set_line(&r.reservoir_good));
    let _ = writeln!(out, "uncertainty_margin: {}", fmt_f(r.uncertainty_margin));
    let _ = writeln!(out, "all_disjoint: {}", r.all_disjoint());
    let _ = writeln!(out, "assist_fraction: {}", fmt_f(r.assist_fraction));
    out
}

/// Write a finished report to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
