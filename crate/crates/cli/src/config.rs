//! Line-oriented `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Matrices are given
//! inline (`channel = 0.3 0; 0 0.1`, rows separated by `;`) or as a CSV file
//! (`channel_csv = h.csv`, resolved relative to the config file).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ampcap_core::presets::{linspace, DbConvention};
use ampcap_core::{ChannelMatrix, InputSpace};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed key/value pairs with their line numbers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
    base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::config(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::config(line, "empty key"));
            }
            let entry = Entry {
                line,
                value: value.trim().to_string(),
            };
            if let Some(prev) = entries.insert(key.clone(), entry) {
                return Err(CliError::config(line, format!("`{key}` already set on line {}", prev.line)));
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.to_path_buf(), e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for (key, e) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::config(
                    e.line,
                    format!("unknown key `{key}` (expected one of: {})", allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        self.get(key).map(|e| e.value.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.get(key).map_or(0, |e| e.line)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.string(key).map(|v| self.base_dir.join(v))
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| CliError::config(e.line, format!("`{key}`: {err}"))),
        }
    }

    pub fn floats(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => parse_floats(&e.value).map(Some).map_err(|m| CliError::config(e.line, format!("`{key}`: {m}"))),
        }
    }

    /// Words separated by whitespace or commas.
    pub fn words(&self, key: &str) -> Option<Vec<String>> {
        self.string(key).map(|v| {
            v.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|w| !w.is_empty())
                .map(str::to_string)
                .collect()
        })
    }

    pub fn channel(&self) -> CliResult<ChannelMatrix> {
        let rows = match (self.get("channel"), self.get("channel_csv")) {
            (Some(_), Some(e)) => return Err(CliError::config(e.line, "set `channel` or `channel_csv`, not both")),
            (Some(e), None) => e
                .value
                .split(';')
                .map(parse_floats)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| CliError::config(e.line, format!("`channel`: {m}")))?,
            (None, Some(e)) => {
                let path = self.base_dir.join(&e.value);
                read_matrix_csv(&path).map_err(|m| CliError::config(e.line, m))?
            }
            (None, None) => return Err(CliError::config(0, "missing `channel` or `channel_csv`")),
        };
        let line = self.line_of("channel").max(self.line_of("channel_csv"));
        ChannelMatrix::from_rows(&rows).map_err(|err| CliError::config(line, format!("channel: {err}")))
    }

    pub fn convention(&self) -> CliResult<DbConvention> {
        Ok(self.parse_value("db_convention")?.unwrap_or_default())
    }
}

pub(crate) fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| {
            w.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{w}` is not a finite number"))
        })
        .collect()
}

fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
            rec.iter()
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| format!("{} row {}: `{f}` is not a finite number", path.display(), i + 1))
                })
                .collect()
        })
        .collect()
}

/// Shape of the constraint; the grid amplitude scales it.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `Box(A·shape)`.
    Box(Vec<f64>),
    /// `Ball(A)` in `dim` dimensions.
    Ball(usize),
}

impl Constraint {
    pub fn at(&self, amplitude: f64) -> ampcap_core::Result<InputSpace> {
        match self {
            Self::Box(shape) => InputSpace::new_box(shape.iter().map(|s| s * amplitude).collect()),
            Self::Ball(dim) => InputSpace::ball(amplitude, *dim),
        }
    }

    fn parse(raw: &RawConfig, n_t: usize) -> CliResult<Self> {
        let kind = raw.string("constraint").unwrap_or("box");
        match kind {
            "box" => {
                let shape = raw.floats("halfwidths")?.unwrap_or_else(|| vec![1.0; n_t]);
                if shape.len() != n_t || shape.iter().any(|s| *s < 0.0) {
                    return Err(CliError::config(
                        raw.line_of("halfwidths"),
                        format!("`halfwidths` needs {n_t} nonnegative entries"),
                    ));
                }
                Ok(Self::Box(shape))
            }
            "ball" => {
                if raw.has("halfwidths") {
                    return Err(CliError::config(raw.line_of("halfwidths"), "`halfwidths` applies to box constraints"));
                }
                Ok(Self::Ball(n_t))
            }
            other => Err(CliError::config(
                raw.line_of("constraint"),
                format!("`constraint` must be `box` or `ball`, got `{other}`"),
            )),
        }
    }
}

/// Linear amplitudes from `amplitudes`, `db`, or `db_range = start stop count`.
pub fn amplitude_grid(raw: &RawConfig, convention: DbConvention) -> CliResult<Vec<f64>> {
    let given = ["amplitudes", "db", "db_range"].iter().filter(|k| raw.has(k)).count();
    if given != 1 {
        return Err(CliError::config(0, "set exactly one of `amplitudes`, `db`, `db_range`"));
    }
    let (key, grid) = if let Some(a) = raw.floats("amplitudes")? {
        ("amplitudes", a)
    } else if let Some(db) = raw.floats("db")? {
        ("db", db.into_iter().map(|d| convention.to_linear(d)).collect())
    } else {
        let r = raw.floats("db_range")?.expect("checked");
        let line = raw.line_of("db_range");
        let [start, stop, count] = r[..] else {
            return Err(CliError::config(line, "`db_range` is `start stop count`"));
        };
        if count < 1.0 || count.fract() != 0.0 {
            return Err(CliError::config(line, "`db_range` count must be a positive integer"));
        }
        ("db_range", linspace(start, stop, count as usize).into_iter().map(|d| convention.to_linear(d)).collect())
    };
    let line = raw.line_of(key);
    if grid.is_empty() {
        return Err(CliError::config(line, "empty amplitude grid"));
    }
    if grid.iter().any(|a| *a < 0.0) {
        return Err(CliError::config(line, "amplitudes must be nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config(line, "amplitude grid must be strictly increasing"));
    }
    Ok(grid)
}

pub(crate) fn constraint(raw: &RawConfig, n_t: usize) -> CliResult<Constraint> {
    Constraint::parse(raw, n_t)
}
