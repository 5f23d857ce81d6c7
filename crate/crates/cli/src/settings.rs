//! Flat `key=value` configuration files and the error type that carries the
//! process exit code.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::anyhow;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid input files (exit 2).
    Usage(anyhow::Error),
    /// Anything else (exit 1).
    Internal(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Internal(e) => write!(f, "{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Internal(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

pub trait UsageContext<T> {
    /// Marks an error as caused by the caller's input.
    fn or_usage(self, what: impl Display) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> UsageContext<T> for Result<T, E> {
    fn or_usage(self, what: impl Display) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.into().context(what.to_string())))
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).or_usage(format!("cannot read {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).or_usage(format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).or_usage(format!("cannot write {}", path.display()))
}

/// Values read from a `--config` file. Blank lines and lines starting with
/// `#` are ignored.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub const KEYS: &'static [&'static str] = &[
        "mode",
        "seed",
        "epochs",
        "hidden",
        "layers",
        "chunk_len",
        "learning_rate",
        "grad_clip",
        "scale",
        "holdout",
        "prime",
        "length",
        "temperature",
        "min_core_vowels",
        "prefixes",
    ];

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", n + 1))?;
            let k = k.trim();
            if !Self::KEYS.contains(&k) {
                return Err(anyhow!("line {}: unknown key {k:?}", n + 1));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Self::parse(&read_text(p)?).or_usage(format!("in {}", p.display())),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if given, else the file value, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| usage(anyhow!("config key {key}: {e}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let c = ConfigFile::parse("# comment\nepochs = 7\n\nmode=char\n").unwrap();
        assert_eq!(c.pick::<usize>(None, "epochs").unwrap(), Some(7));
        assert_eq!(c.pick(Some(3usize), "epochs").unwrap(), Some(3));
        assert_eq!(c.pick::<usize>(None, "hidden").unwrap(), None);
        assert_eq!(c.raw("mode"), Some("char"));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("colour=red").is_err());
        assert!(ConfigFile::parse("epochs").is_err());
        let c = ConfigFile::parse("epochs=many").unwrap();
        assert_eq!(c.pick::<usize>(None, "epochs").unwrap_err().code(), 2);
    }
}
