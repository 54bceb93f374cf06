//! Input-file parsing into frequency data, plus corpus text normalization.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use richness::FrequencyData;

use crate::{CliError, InputFormat};

/// Read and parse an abundance sample in the declared layout.
pub fn read_frequency(path: &Path, format: InputFormat) -> Result<FrequencyData, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|err| CliError::Input(format!("cannot read {}: {err}", path.display())))?;
    parse_frequency(&raw, format)
}

fn parse_frequency(raw: &str, format: InputFormat) -> Result<FrequencyData, CliError> {
    let built = match format {
        InputFormat::Tokens => {
            let tokens: Vec<&str> = raw
                .lines()
                .map(str::trim)
                .filter(|line| !line.is_empty())
                .collect();
            FrequencyData::from_raw_sample(tokens)
        }
        InputFormat::Counts => {
            let counts = raw
                .split_whitespace()
                .map(|token| {
                    token.parse::<u64>().map_err(|_| {
                        CliError::Input(format!(
                            "invalid count {token:?}: expected a positive integer"
                        ))
                    })
                })
                .collect::<Result<Vec<u64>, CliError>>()?;
            FrequencyData::from_counts(&counts)
        }
        InputFormat::Prevalences => {
            let mut pairs = Vec::new();
            for (idx, line) in raw.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let mut fields = line.split_whitespace();
                let (Some(multiplicity), Some(species), None) =
                    (fields.next(), fields.next(), fields.next())
                else {
                    return Err(CliError::Input(format!(
                        "line {}: expected \"multiplicity species-count\", got {line:?}",
                        idx + 1
                    )));
                };
                let parse = |token: &str| {
                    token.parse::<u64>().map_err(|_| {
                        CliError::Input(format!("line {}: invalid integer {token:?}", idx + 1))
                    })
                };
                pairs.push((parse(multiplicity)?, parse(species)?));
            }
            FrequencyData::from_prevalences(pairs)
        }
        InputFormat::Text => FrequencyData::from_raw_sample(normalize_text(raw, None)),
    };
    built.map_err(|err| CliError::Input(err.to_string()))
}

/// Case-fold, keep alphabetic code points, and optionally restrict to an
/// explicit alphabet (itself case-folded).
pub fn normalize_text(text: &str, charset: Option<&str>) -> Vec<char> {
    let keep: Option<BTreeSet<char>> =
        charset.map(|set| set.chars().flat_map(char::to_lowercase).collect());
    text.chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .filter(|c| keep.as_ref().is_none_or(|set| set.contains(c)))
        .collect()
}
