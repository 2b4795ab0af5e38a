//! `--config` files: one `[command]` section per subcommand, keys named
//! like the long flags with `_` for `-`. Flags win over file values.

use std::path::{Path, PathBuf};

use dpflab_core::format::{Document, Section};

use crate::error::CliError;

pub const COMMANDS: &[&str] = &["fig5", "fig7", "synth", "simulate", "check"];

#[derive(Debug, Default)]
pub struct Config {
    section: Option<Section>,
    base: PathBuf,
}

impl Config {
    pub fn load(path: Option<&Path>, command: &str, keys: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let doc = Document::parse(&text).map_err(|e| CliError::file(path, e))?;
        doc.allow_sections(COMMANDS).map_err(|e| CliError::file(path, e))?;
        let section = doc.section(command).cloned();
        if let Some(sec) = &section {
            sec.allow_keys(keys, &[]).map_err(|e| CliError::file(path, e))?;
        }
        Ok(Config {
            section,
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    fn entry(&self, key: &str) -> Option<(&str, usize)> {
        self.section
            .as_ref()
            .and_then(|s| s.get(key))
            .map(|e| (e.value.as_str(), e.line))
    }

    fn bad(key: &str, line: usize, what: &str, value: &str) -> CliError {
        CliError::Usage(format!("config line {line}: '{key}' must be {what}, got '{value}'"))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.entry(key)
            .map(|(v, line)| v.parse().map_err(|_| Self::bad(key, line, "a number", v)))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.entry(key)
            .map(|(v, line)| v.parse().map_err(|_| Self::bad(key, line, "a nonnegative integer", v)))
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.entry(key)
            .map(|(v, line)| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(Self::bad(key, line, "true or false", v)),
            })
            .transpose()
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.entry(key).map(|(v, _)| v.to_string())
    }

    /// Relative paths are taken from the config file's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.entry(key).map(|(v, _)| self.base.join(v))
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.entry(key)
            .map(|(v, line)| {
                v.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().map_err(|_| Self::bad(key, line, "a list of numbers", v)))
                    .collect()
            })
            .transpose()
    }
}
