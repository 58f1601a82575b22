use std::path::Path;

use ffopt::mask_lp::MaskProblem;

use crate::args::ProblemArgs;
use crate::error::{CliError, CliResult};
use crate::io::read_input;

pub const DEFAULT_N: usize = 150;
pub const DEFAULT_M: usize = 35;

/// Values read from a `key=value` file; absent keys stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub rho0: Option<f64>,
    pub rho1: Option<f64>,
    pub contrast: Option<f64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config line {line}: bad value `{value}` for {key}")))
}

/// Blank lines and lines starting with `#` are skipped; keys may appear once.
pub fn parse_config(text: &str) -> CliResult<FileConfig> {
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {line}: expected key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let dup = match key {
            "n" => cfg.n.replace(parse_value(key, value, line)?).is_some(),
            "m" => cfg.m.replace(parse_value(key, value, line)?).is_some(),
            "rho0" => cfg.rho0.replace(parse_value(key, value, line)?).is_some(),
            "rho1" => cfg.rho1.replace(parse_value(key, value, line)?).is_some(),
            "contrast" => cfg
                .contrast
                .replace(parse_value(key, value, line)?)
                .is_some(),
            other => {
                return Err(CliError::Usage(format!(
                    "config line {line}: unknown key `{other}`"
                )))
            }
        };
        if dup {
            return Err(CliError::Usage(format!(
                "config line {line}: duplicate key `{key}`"
            )));
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> CliResult<FileConfig> {
    parse_config(&read_input(path)?)
}

/// Flags over file values over defaults, then validated.
pub fn resolve_problem(args: &ProblemArgs) -> CliResult<MaskProblem> {
    let file = match &args.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    let p = MaskProblem {
        n: args.n.or(file.n).unwrap_or(DEFAULT_N),
        m: args.m.or(file.m).unwrap_or(DEFAULT_M),
        rho0: args.rho0.or(file.rho0).unwrap_or(MaskProblem::DEFAULT_RHO0),
        rho1: args.rho1.or(file.rho1).unwrap_or(MaskProblem::DEFAULT_RHO1),
        contrast: args
            .contrast
            .or(file.contrast)
            .unwrap_or(MaskProblem::DEFAULT_CONTRAST),
    };
    p.validate()?;
    Ok(p)
}
