//! On-disk formats: the JSON channel file and the run configuration shared
//! by the CLI and the examples.
//!
//! A channel file either spells out Kraus operators (complex entries as
//! `[re, im]` pairs, row-major) or names a preset. Complex numbers are never
//! string-encoded, so files round-trip bit-exactly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{embed_classical_wiretap, QubitChannelSpec, WiretapPmf};
use crate::qcore::linalg::CMat;
use crate::qcore::KrausChannel;
use crate::{Error, Result};

/// A matrix as stored on disk: rows of `[re, im]` entry pairs.
pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Kraus,
    Preset,
}

/// Parameters of a named preset. `param` feeds the single-parameter presets;
/// `pmf` is the `probs[x][y][z]` table of the classical wiretap embedding.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<Vec<Vec<f64>>>>,
}

/// The channel file. `kind` selects which of `kraus` / `preset` is read;
/// supplying the other is a parse error, not silently ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub name: String,
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixEntries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir_split: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degradable: Option<bool>,
}

impl ChannelFile {
    pub fn from_json(text: &str) -> Result<ChannelFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel files always serialize")
    }

    pub fn load(path: &Path) -> Result<ChannelFile> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Validate and build the channel the file describes.
    pub fn to_spec(&self) -> Result<QubitChannelSpec> {
        let spec = match self.kind {
            ChannelKind::Kraus => {
                if self.preset.is_some() {
                    return Err(Error::Parse(
                        "kind is `kraus` but a `preset` block is present".into(),
                    ));
                }
                let mats = self.kraus.as_ref().ok_or_else(|| {
                    Error::Parse("kind is `kraus` but no `kraus` list is present".into())
                })?;
                let mut kraus = Vec::with_capacity(mats.len());
                for (idx, rows) in mats.iter().enumerate() {
                    kraus.push(matrix_from_rows(rows).map_err(|e| {
                        Error::Parse(format!("kraus operator {idx}: {e}"))
                    })?);
                }
                QubitChannelSpec::new(
                    self.name.clone(),
                    KrausChannel::new(kraus)?,
                    self.reservoir_split,
                )?
            }
            ChannelKind::Preset => {
                if self.kraus.is_some() {
                    return Err(Error::Parse(
                        "kind is `preset` but a `kraus` list is present".into(),
                    ));
                }
                let preset = self.preset.as_ref().ok_or_else(|| {
                    Error::Parse("kind is `preset` but no `preset` block is present".into())
                })?;
                let base = if preset.name == "classical_wiretap" {
                    let pmf = preset.pmf.as_ref().ok_or_else(|| {
                        Error::Parse("classical_wiretap preset needs a `pmf` table".into())
                    })?;
                    embed_classical_wiretap(&WiretapPmf::new(pmf.clone())?)?
                } else {
                    if preset.pmf.is_some() {
                        return Err(Error::Parse(format!(
                            "preset `{}` does not take a pmf table",
                            preset.name
                        )));
                    }
                    QubitChannelSpec::preset(&preset.name, preset.param.unwrap_or(0.0))?
                };
                // Presets fix their own Kraus decomposition; the file may
                // still override the shield/eavesdropper division.
                match self.reservoir_split {
                    Some(split) => {
                        QubitChannelSpec::new(self.name.clone(), base.kraus().clone(), Some(split))?
                            .with_degradable(base.asserted_degradable())
                    }
                    None => base,
                }
            }
        };
        Ok(match self.degradable {
            Some(yes) => spec.with_degradable(yes),
            None => spec,
        })
    }

    /// Describe an existing channel as an explicit-Kraus file, the form the
    /// wiretap embedding is exported in.
    pub fn from_spec(spec: &QubitChannelSpec) -> ChannelFile {
        let kraus = spec
            .kraus()
            .kraus()
            .iter()
            .map(|k| {
                (0..k.nrows())
                    .map(|r| (0..k.ncols()).map(|c| [k[(r, c)].re, k[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        ChannelFile {
            name: spec.name().to_string(),
            kind: ChannelKind::Kraus,
            kraus: Some(kraus),
            preset: None,
            reservoir_split: spec.reservoir_split(),
            degradable: spec.asserted_degradable().then_some(true),
        }
    }
}

fn matrix_from_rows(rows: &MatrixEntries) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "ragged rows: {} entries vs {ncols}",
            bad.len()
        )));
    }
    let mut m = CMat::zeros(nrows, ncols);
    for (r, row) in rows.iter().enumerate() {
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("non-finite entry at ({r}, {c})")));
            }
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

/// Whether per-wire figures come from exact synthesis or the fidelity-bound
/// recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Bounds,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "exact" => Ok(Mode::Exact),
            "bounds" => Ok(Mode::Bounds),
            other => Err(Error::Parse(format!(
                "mode `{other}`, expected `exact` or `bounds`"
            ))),
        }
    }
}

/// Everything a table-producing run needs besides the channel itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// Recursion depth; the blocklength is 2^n.
    pub n: u32,
    /// Fidelity threshold for classifying wires, in (0, 1).
    pub threshold: f64,
    pub seed: u64,
    pub trials: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_file_round_trips_through_the_builder() {
        let text = r#"{
            "name": "noisy",
            "kind": "preset",
            "preset": { "name": "dephasing", "param": 0.1 }
        }"#;
        let file = ChannelFile::from_json(text).unwrap();
        let spec = file.to_spec().unwrap();
        assert_eq!(spec.dim_in(), 2);
        assert!(spec.asserted_degradable());
        let reparsed = ChannelFile::from_json(&file.to_json()).unwrap();
        assert_eq!(reparsed.to_json(), file.to_json());
    }

    #[test]
    fn explicit_kraus_round_trips_bit_exactly() {
        let spec = QubitChannelSpec::preset("amplitude_damping", 0.3).unwrap();
        let file = ChannelFile::from_spec(&spec);
        let rebuilt = file.to_spec().unwrap();
        for (a, b) in spec.kraus().kraus().iter().zip(rebuilt.kraus().kraus()) {
            assert_eq!(a, b);
        }
        let again = ChannelFile::from_json(&file.to_json()).unwrap();
        assert_eq!(file.to_json(), again.to_json());
    }

    #[test]
    fn incomplete_kraus_lists_name_their_defect() {
        let text = r#"{
            "name": "broken",
            "kind": "kraus",
            "kraus": [ [ [[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]] ] ]
        }"#;
        let err = ChannelFile::from_json(text).unwrap().to_spec().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("completeness defect"), "{msg}");
    }

    #[test]
    fn wiretap_preset_needs_its_table() {
        let text = r#"{
            "name": "tap",
            "kind": "preset",
            "preset": { "name": "classical_wiretap" }
        }"#;
        let err = ChannelFile::from_json(text).unwrap().to_spec().unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn kind_and_payload_must_agree() {
        let text = r#"{
            "name": "mixed-up",
            "kind": "kraus",
            "preset": { "name": "identity" }
        }"#;
        let err = ChannelFile::from_json(text).unwrap().to_spec().unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn run_config_rejects_a_degenerate_threshold() {
        let cfg = RunConfig {
            n: 2,
            threshold: 1.0,
            seed: 7,
            trials: 4,
            mode: Mode::Exact,
            out: None,
        };
        assert!(cfg.validate().is_err());
        assert_eq!("bounds".parse::<Mode>().unwrap(), Mode::Bounds);
        assert!("sloppy".parse::<Mode>().is_err());
    }
}
