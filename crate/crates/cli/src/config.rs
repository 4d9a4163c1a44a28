use std::path::{Path, PathBuf};

use serde::Deserialize;
use stagesvm_core::harness::{
    SearchSpace, DEFAULT_CURVE_FRACTIONS, DEFAULT_REPETITIONS, DEFAULT_TRAIN_FRACTION,
};
use stagesvm_core::util::round_half_up;

use crate::args::{Common, ProtocolArg, SearchArgs};
use crate::CliError;

/// Everything a JSON config file may set. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub manifest: Option<PathBuf>,
    pub schema: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<u16>,
    pub protocol: Option<ProtocolArg>,
    pub repetitions: Option<usize>,
    pub train_fraction: Option<f64>,
    pub fractions: Option<Vec<f64>>,
    #[serde(default)]
    pub search: FileSearch,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSearch {
    #[serde(rename = "C")]
    pub c: Option<(f64, f64)>,
    pub gamma: Option<(f64, f64)>,
    pub budget: Option<usize>,
    pub patience: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Shared settings after merging flags over the config file.
#[derive(Debug)]
pub struct Resolved {
    pub manifest: Option<PathBuf>,
    pub schema: Option<Vec<String>>,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

pub fn resolve_common(flags: &Common, file: &FileConfig) -> Resolved {
    Resolved {
        manifest: flags.manifest.clone().or_else(|| file.manifest.clone()),
        schema: flags.schema.clone().or_else(|| file.schema.clone()),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        out: flags
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        jobs: flags.jobs.or(file.jobs).map(usize::from),
    }
}

pub fn resolve_search(flags: &SearchArgs, file: &FileSearch) -> Result<SearchSpace, CliError> {
    let defaults = SearchSpace::default();
    let c = match &flags.c_range {
        Some(s) => parse_range(s, "--c-range")?,
        None => file.c.unwrap_or(defaults.c),
    };
    let gamma = match &flags.gamma_range {
        Some(s) => parse_range(s, "--gamma-range")?,
        None => file.gamma.unwrap_or(defaults.gamma),
    };
    let space = SearchSpace {
        c,
        gamma,
        budget: flags.budget.or(file.budget).unwrap_or(defaults.budget),
        patience: flags
            .patience
            .or(file.patience)
            .unwrap_or(defaults.patience),
    };
    space
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(space)
}

pub fn resolve_protocol(
    protocol: Option<ProtocolArg>,
    repetitions: Option<usize>,
    train_fraction: Option<f64>,
    file: &FileConfig,
) -> (ProtocolArg, usize, f64) {
    (
        protocol.or(file.protocol).unwrap_or(ProtocolArg::Loo),
        repetitions
            .or(file.repetitions)
            .unwrap_or(DEFAULT_REPETITIONS),
        train_fraction
            .or(file.train_fraction)
            .unwrap_or(DEFAULT_TRAIN_FRACTION),
    )
}

pub fn resolve_fractions(flag: Option<&str>, file: &FileConfig) -> Result<Vec<f64>, CliError> {
    match (flag, &file.fractions) {
        (Some(spec), _) => parse_fractions(spec),
        (None, Some(list)) => Ok(list.clone()),
        (None, None) => Ok(DEFAULT_CURVE_FRACTIONS.to_vec()),
    }
}

fn parse_range(s: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parsed = s
        .split_once(':')
        .and_then(|(lo, hi)| Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?)));
    parsed.ok_or_else(|| CliError::usage(format!("{flag} expects LO:HI, got '{s}'")))
}

/// `0.1:0.7:0.1` (inclusive, values rounded to 10 decimals) or `0.1,0.3,0.5`.
pub fn parse_fractions(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::usage(format!(
            "--fractions expects START:STOP:STEP or a list, got '{spec}'"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count)
            .map(|i| round_half_up(start + i as f64 * step, 10))
            .collect());
    }
    spec.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_ranges_are_inclusive() {
        assert_eq!(
            parse_fractions("0.1:0.7:0.1").unwrap(),
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
        );
        assert_eq!(parse_fractions("0.25,0.5").unwrap(), vec![0.25, 0.5]);
        assert!(parse_fractions("0.1:0.7").is_err());
        assert!(parse_fractions("0.5:0.1:0.1").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig =
            serde_json::from_str(r#"{"seed": 9, "search": {"budget": 4, "C": [1, 2]}}"#).unwrap();
        let flags = SearchArgs {
            budget: Some(7),
            patience: None,
            c_range: None,
            gamma_range: None,
        };
        let space = resolve_search(&flags, &file.search).unwrap();
        assert_eq!((space.budget, space.c), (7, (1.0, 2.0)));
        assert!(serde_json::from_str::<FileConfig>(r#"{"sed": 1}"#).is_err());
    }
}
