//! File formats and run provenance: the JSON instance format (bit-exact
//! float round-trip), input hashing, and the manifest attached to every
//! command output.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lmms_core::space::{self, FiniteLmms, TimeMatrix};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// On-disk instance format. `tau` is row-major: `tau[i][j]` is the time
/// separation from point `i` to point `j`. Unknown fields are rejected so a
/// round-trip can never silently drop data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDto {
    pub labels: Vec<String>,
    pub tau: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub boundary: Option<usize>,
}

impl InstanceDto {
    pub fn from_space(space: &FiniteLmms) -> Self {
        let n = space.n();
        let tau = (0..n)
            .map(|i| (0..n).map(|j| space.t(i, j)).collect())
            .collect();
        InstanceDto {
            labels: space.labels().to_vec(),
            tau,
            weights: space.weights().to_vec(),
            boundary: space.boundary(),
        }
    }

    /// Builds the in-memory space, rejecting NaN and negative entries up
    /// front (the reader contract for this format).
    pub fn to_space(&self) -> Result<FiniteLmms> {
        for (i, row) in self.tau.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    bail!("tau[{i}][{j}] = {v} (entries must be finite and nonnegative)");
                }
            }
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                bail!("weights[{i}] = {w} (weights must be finite and nonnegative)");
            }
        }
        let tau = TimeMatrix::from_rows(&self.tau).map_err(|e| anyhow::anyhow!("{e}"))?;
        FiniteLmms::new(self.labels.clone(), tau, self.weights.clone(), self.boundary)
            .map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// An instance file read from disk, with its content hash for manifests.
pub struct LoadedInstance {
    pub path: String,
    pub sha256: String,
    pub dto: InstanceDto,
    pub space: FiniteLmms,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Reads, hashes, and parses an instance file. With `require_valid`, the
/// axioms are also checked at the default tolerance and violations are an
/// error (point-distinction warnings are allowed; the quotient repairs them).
pub fn load_instance(path: &Path, require_valid: bool) -> Result<LoadedInstance> {
    let bytes =
        fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let sha256 = sha256_hex(&bytes);
    let dto: InstanceDto = serde_json::from_slice(&bytes)
        .with_context(|| format!("{} is not a valid instance file", path.display()))?;
    let space = dto
        .to_space()
        .with_context(|| format!("{} is not a valid instance file", path.display()))?;
    if require_valid {
        let report = space::validate(&space, space::DEFAULT_TOL);
        if !report.is_valid() {
            let first = &report.errors[0];
            bail!(
                "{} fails validation ({} violation(s); first: {first})",
                path.display(),
                report.errors.len()
            );
        }
    }
    Ok(LoadedInstance {
        path: path.display().to_string(),
        sha256,
        dto,
        space,
    })
}

/// Writes an instance file (pretty-printed; floats in shortest
/// round-trip form, so reading it back reproduces the exact bits).
pub fn write_instance(path: &Path, dto: &InstanceDto) -> Result<()> {
    let mut text = serde_json::to_string_pretty(dto)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// One hashed input file, recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance block attached to every command output. Everything except
/// `wall_ms` is deterministic; re-running the same command reproduces the
/// `result` payload byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub wall_ms: u64,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(test)]
mod tests {
    use super::*;

    fn awkward_dto() -> InstanceDto {
        // Values with no short decimal form: sums of dyadic fractions,
        // thirds, tiny subnormals, and a near-overflow magnitude on tau.
        InstanceDto {
            labels: vec!["a".into(), "b".into(), "c".into()],
            tau: vec![
                vec![0.0, 0.1 + 0.2, 1.0e300],
                vec![0.0, 0.0, 2.0 / 3.0],
                vec![0.0, 5.0e-324, 0.0],
            ],
            weights: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0],
            boundary: None,
        }
    }

    #[test]
    fn json_round_trip_preserves_every_float_bit() {
        let dto = awkward_dto();
        let text = serde_json::to_string_pretty(&dto).unwrap();
        let back: InstanceDto = serde_json::from_str(&text).unwrap();
        for (row_a, row_b) in dto.tau.iter().zip(&back.tau) {
            for (x, y) in row_a.iter().zip(row_b) {
                assert_eq!(x.to_bits(), y.to_bits(), "tau entry changed in round trip");
            }
        }
        for (x, y) in dto.weights.iter().zip(&back.weights) {
            assert_eq!(x.to_bits(), y.to_bits(), "weight changed in round trip");
        }
        assert_eq!(dto, back);
        // And a second serialization is byte-identical.
        assert_eq!(text, serde_json::to_string_pretty(&back).unwrap());
    }

    #[test]
    fn reader_rejects_negative_and_non_finite_entries() {
        let mut dto = awkward_dto();
        dto.tau[0][1] = -0.5;
        assert!(dto.to_space().is_err());
        let mut dto = awkward_dto();
        dto.weights[0] = f64::NAN;
        assert!(dto.to_space().is_err());
        let mut dto = awkward_dto();
        dto.tau[2][0] = f64::INFINITY;
        assert!(dto.to_space().is_err());
    }

    #[test]
    fn reader_rejects_unknown_fields_and_ragged_matrices() {
        let extra = r#"{"labels":["a"],"tau":[[0.0]],"weights":[1.0],"boundary":null,"color":"red"}"#;
        assert!(serde_json::from_str::<InstanceDto>(extra).is_err());
        let ragged = InstanceDto {
            labels: vec!["a".into(), "b".into()],
            tau: vec![vec![0.0, 1.0], vec![0.0]],
            weights: vec![0.5, 0.5],
            boundary: None,
        };
        assert!(ragged.to_space().is_err());
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
