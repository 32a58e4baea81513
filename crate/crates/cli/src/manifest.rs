//! The provenance block written at the top of every JSON output and beside every CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{Command, ConfigEcho, Invocation};
use crate::CliError;

pub const TOOL: &str = "frobtrace";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    /// The config file and its entries, before flags were applied.
    pub config: Option<ConfigEcho>,
    /// Command-line arguments as given.
    pub flags: Vec<String>,
    /// The command after merging config and flags.
    pub effective: Command,
    /// Curve catalog or report inputs.
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// RFC 3339, UTC.
    pub started_at: String,
    pub elapsed_seconds: f64,
    pub bad_prime_disclosure: &'static str,
}

/// Captures the start time; [`ManifestBuilder::finish`] stamps the elapsed time.
pub struct ManifestBuilder {
    inv: Invocation,
    inputs: Vec<InputDigest>,
    started_at: String,
    clock: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ManifestBuilder {
    pub fn start(inv: &Invocation) -> Self {
        ManifestBuilder {
            inv: inv.clone(),
            inputs: Vec::new(),
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            clock: Instant::now(),
        }
    }

    /// Reads `path`, records its digest and returns the bytes.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn finish(self) -> RunManifest {
        let (subcommand, seed, threads) = match &self.inv.command {
            Command::GroupVerify(_) => ("group-verify", None, None),
            Command::Trace(c) => ("trace", Some(c.seed), None),
            Command::Survey(c) => ("survey", Some(c.seed), Some(c.threads)),
            Command::Bounds(_) => ("bounds", None, None),
            Command::Report(_) => ("report", None, None),
        };
        RunManifest {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            config: self.inv.config,
            flags: self.inv.flags,
            effective: self.inv.command,
            inputs: self.inputs,
            seed,
            threads,
            started_at: self.started_at,
            elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            bad_prime_disclosure: frobtrace::survey::BAD_PRIME_DISCLOSURE,
        }
    }
}

/// A JSON document whose first key is the manifest.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub result: &'a T,
}

pub fn to_json<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(&Document { manifest, result })?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
    f.write_all(bytes)
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

/// `out.csv` gets its manifest in `out.csv.manifest.json`, keeping the CSV itself plain.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_sidecar(out: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    write_file(&sidecar_path(out), &bytes)
}
