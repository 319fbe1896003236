//! Key-value run configuration files (TOML).

use std::path::Path;

use crate::harness::RunSettings;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
}

/// Reads settings; keys left out keep their defaults.
pub fn load_settings(path: &Path) -> Result<RunSettings, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_settings(&text).map_err(|source| ConfigError::Parse { path: path.display().to_string(), source })
}

pub fn parse_settings(text: &str) -> Result<RunSettings, toml::de::Error> {
    toml::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cife_core::predictions::SplitTag;

    #[test]
    fn partial_files_keep_defaults() {
        let s = parse_settings("pool_size = 50\ngamma = 0.2\nfitness_split = \"val1\"\n").unwrap();
        assert_eq!(s.pool_size, 50);
        assert_eq!(s.gamma, 0.2);
        assert_eq!(s.fitness_split, SplitTag::Val1);
        assert_eq!(s.population_size, 500);
        assert!(parse_settings("pool_sise = 3").is_err());
    }
}
