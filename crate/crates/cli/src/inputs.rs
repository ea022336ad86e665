//! Loading of scenarios, inequalities, vertex sets and operators from
//! built-in names or files, recording a hash of every file read.

use std::path::Path;

use anyhow::{bail, Context};
use causal_core::catalog;
use causal_core::geometry::Inequality;
use causal_core::process::instrument::{self, InstrumentFile};
use causal_core::process::matrix::{build_named, Named};
use causal_core::process::{InstrumentSet, OperatorFile, ProcessMatrix};
use causal_core::stream::VertexReader;
use causal_core::{enumerate_causal_vertices, CorrelationFile, EnumerationOptions, Scenario, VertexSet};
use sha2::{Digest, Sha256};

use crate::manifest::InputHash;

#[derive(Default)]
pub struct Inputs {
    hashes: Vec<InputHash>,
}

impl Inputs {
    pub fn into_hashes(self) -> Vec<InputHash> {
        self.hashes
    }

    fn record(&mut self, path: &Path, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.hashes.push(InputHash { path: path.display().to_string(), sha256 });
    }

    pub fn read(&mut self, path: &Path) -> anyhow::Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.record(path, &bytes);
        Ok(bytes)
    }

    pub fn read_text(&mut self, path: &Path) -> anyhow::Result<String> {
        String::from_utf8(self.read(path)?).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> anyhow::Result<T> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }

    /// `lazy:N`, `full-binary:N`, or a scenario JSON file.
    pub fn scenario(&mut self, spec: &str) -> anyhow::Result<Scenario> {
        if let Some(n) = spec.strip_prefix("lazy:") {
            return Ok(Scenario::lazy(parse_parties(n)?));
        }
        if let Some(n) = spec.strip_prefix("full-binary:") {
            return Ok(Scenario::full_binary(parse_parties(n)?));
        }
        self.json(Path::new(spec))
    }

    /// A catalog name such as `I1` or `J2(4)`, or an inequality JSON file.
    pub fn inequality(&mut self, spec: &str) -> anyhow::Result<Inequality> {
        match catalog::build(spec) {
            Ok(i) => Ok(i),
            Err(causal_core::Error::UnknownName(_)) if Path::new(spec).exists() => self.json(Path::new(spec)),
            Err(e) => Err(e).with_context(|| format!("known names: {}", catalog::NAMES.join(", "))),
        }
    }

    pub fn correlation(&mut self, path: &Path) -> anyhow::Result<CorrelationFile> {
        self.json(path)
    }

    /// Vertices from a file, or enumerated for `scenario` if no file is given.
    pub fn vertices(&mut self, path: Option<&Path>, scenario: &Scenario) -> anyhow::Result<VertexSet> {
        match path {
            Some(p) => {
                let bytes = self.read(p)?;
                let reader = VertexReader::new(bytes.as_slice())?;
                let v = VertexSet::from_block_indices(reader.scenario().clone(), reader.into_records())?;
                if v.scenario() != scenario {
                    bail!("{} holds vertices of a different scenario", p.display());
                }
                Ok(v)
            }
            None => Ok(enumerate_causal_vertices(scenario, &EnumerationOptions::default())?),
        }
    }

    /// `W1`, `W3`, `W3_printed`, or an operator JSON file.
    pub fn process(&mut self, spec: &str) -> anyhow::Result<ProcessMatrix> {
        match build_named(spec) {
            Ok(Named::Process(w)) => Ok(w),
            Ok(Named::Instruments(_)) => bail!("`{spec}` names instruments, not a process"),
            Err(_) => {
                let file: OperatorFile = self.json(Path::new(spec))?;
                Ok(ProcessMatrix::from_file(&file)?)
            }
        }
    }

    /// `measure_resend`, `identity_on_0` (lazy qubit instruments for
    /// `parties` parties), or an instrument JSON file.
    pub fn instruments(&mut self, spec: &str, parties: usize) -> anyhow::Result<InstrumentSet> {
        match spec {
            "measure_resend" => Ok(instrument::measure_resend(parties)),
            "identity_on_0" => Ok(instrument::identity_on_0(parties)),
            _ => {
                let file: InstrumentFile = self.json(Path::new(spec))?;
                Ok(file.into_set()?)
            }
        }
    }
}

fn parse_parties(n: &str) -> anyhow::Result<usize> {
    let n: usize = n.parse().with_context(|| format!("bad party count `{n}`"))?;
    if n == 0 || n > 8 {
        bail!("party count must be between 1 and 8");
    }
    Ok(n)
}
