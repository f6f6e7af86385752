//! Run manifests: every command writes one JSON file recording the exact
//! configuration, per-row convergence summaries, and the artifacts it
//! emitted, so a run can be reproduced bit-for-bit from the same build.
//!
//! Schema (`manifest.json`, one object):
//!   schema          "ulb-run-manifest/1"
//!   command         subcommand name
//!   argv            full process arguments
//!   started_unix_ms / finished_unix_ms
//!   threads         worker threads used
//!   solver_config   the full solver configuration (always present)
//!   asymptotic_config  present for `extend`
//!   parameters      command-specific scalars (sigma range, files, ...)
//!   rows            per-sigma convergence records
//!   artifacts       relative paths of every file written (this one last)
//!   exit_code       the code the process is about to return

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use ulb_core::asymptotics::AsymptoticConfig;
use ulb_core::profile::SolverConfig;

use crate::errors::{CliError, CliResult};

#[derive(Serialize)]
pub struct RowRecord {
    pub sigma: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_final: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton_residual: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub flags: Vec<String>,
}

#[derive(Serialize)]
pub struct RunManifest {
    schema: &'static str,
    command: String,
    argv: Vec<String>,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    threads: usize,
    solver_config: SolverConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotic_config: Option<AsymptoticConfig>,
    parameters: serde_json::Value,
    rows: Vec<RowRecord>,
    artifacts: Vec<String>,
    exit_code: i32,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Collects artifacts as they are written and finalizes to manifest.json.
pub struct RunScribe {
    out_dir: PathBuf,
    force: bool,
    manifest: RunManifest,
}

impl RunScribe {
    pub fn new(
        command: &str,
        out_dir: &Path,
        force: bool,
        threads: usize,
        solver_config: SolverConfig,
    ) -> CliResult<RunScribe> {
        std::fs::create_dir_all(out_dir)?;
        Ok(RunScribe {
            out_dir: out_dir.to_path_buf(),
            force,
            manifest: RunManifest {
                schema: "ulb-run-manifest/1",
                command: command.into(),
                argv: std::env::args().collect(),
                started_unix_ms: now_ms(),
                finished_unix_ms: 0,
                threads,
                solver_config,
                asymptotic_config: None,
                parameters: serde_json::Value::Null,
                rows: Vec::new(),
                artifacts: Vec::new(),
                exit_code: 0,
            },
        })
    }

    pub fn set_parameters(&mut self, params: serde_json::Value) {
        self.manifest.parameters = params;
    }

    pub fn set_asymptotic_config(&mut self, cfg: AsymptoticConfig) {
        self.manifest.asymptotic_config = Some(cfg);
    }

    pub fn push_row(&mut self, row: RowRecord) {
        self.manifest.rows.push(row);
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Write one artifact below the output directory, refusing to clobber
    /// existing files unless --force was given. Relative path recorded.
    pub fn write_artifact(&mut self, rel: &str, contents: &str) -> CliResult<()> {
        let path = self.out_dir.join(rel);
        if path.exists() && !self.force {
            return Err(CliError::Io(format!(
                "refusing to overwrite {} (pass --force)",
                path.display()
            )));
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        self.manifest.artifacts.push(rel.to_string());
        Ok(())
    }

    /// Finalize: stamp the exit code and write manifest.json itself.
    pub fn finish(mut self, exit_code: i32) -> CliResult<()> {
        let path = self.out_dir.join("manifest.json");
        if path.exists() && !self.force {
            return Err(CliError::Io(format!(
                "refusing to overwrite {} (pass --force)",
                path.display()
            )));
        }
        self.manifest.finished_unix_ms = now_ms();
        self.manifest.exit_code = exit_code;
        self.manifest.artifacts.push("manifest.json".into());
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
