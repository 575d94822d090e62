//! CSV files with `.meta.toml` sidecars.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ftn_core::channel::RNG_ALGORITHM;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Metadata<'a> {
    file: &'a str,
    command: &'a str,
    columns: Vec<String>,
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    rng: &'a str,
    energy_convention: &'a str,
    pulse_normalization: &'a str,
    precoder_mode: &'a str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    config: &'a ExperimentConfig,
}

/// Output directory of one subcommand run.
pub struct Outputs<'a> {
    dir: PathBuf,
    command: &'a str,
    config: &'a ExperimentConfig,
    notes: Vec<String>,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    pub fn new(
        dir: &Path,
        command: &'a str,
        config: &'a ExperimentConfig,
    ) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("cannot create {}", dir.display()), e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            command,
            config,
            notes: Vec::new(),
            written: Vec::new(),
        })
    }

    /// Adds a note to the sidecars of files written afterwards.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Writes `name` through `body`, then its sidecar `<stem>.meta.toml`.
    pub fn csv(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> ftn_core::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()
            .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
        drop(w);

        let columns = read_header(&path)?;
        let meta = Metadata {
            file: name,
            command: self.command,
            columns,
            version: VERSION,
            seed: self.config.seed,
            rng: RNG_ALGORITHM,
            energy_convention: self.config.energy_convention.as_str(),
            pulse_normalization: self.config.pulse_normalization.as_str(),
            precoder_mode: self.config.precoder_mode.as_str(),
            notes: self.notes.clone(),
            config: self.config,
        };
        let stem = name.strip_suffix(".csv").unwrap_or(name);
        let meta_path = self.dir.join(format!("{stem}.meta.toml"));
        std::fs::write(&meta_path, toml::to_string(&meta)?)
            .map_err(|e| CliError::io(format!("cannot write {}", meta_path.display()), e))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }
}

fn read_header(path: &Path) -> Result<Vec<String>, CliError> {
    let file =
        File::open(path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    Ok(line
        .trim_end()
        .split(',')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect())
}
