//! Experiment configuration: a TOML file plus `key=value` overrides.
//!
//! ```toml
//! users = 30                       # K
//! chips = 31                       # C, spreading factor
//! symbols = [2000, 5000, 10000]    # M per frame
//! snr_db = [-10, -5, 0]            # chip-level SNR per user
//! noise = ["awgn", "pink"]         # awgn | pink | none
//! algorithms = ["comon", "jade", "fastica"]
//! detectors = ["sud", "ica", "sudica"]
//! runs_per_point = 100
//! pilot_symbols = 50               # known symbols used to resolve ICA ambiguity
//! base_seed = 1                    # integer, or a string such as "0xdeadbeef"
//!
//! [ica]
//! contrast = "kurtosis"            # kurtosis | tanh (FastICA only)
//! max_iterations = 100
//! tolerance = 1e-4
//! ```
//!
//! Every key is optional; list keys also accept a single scalar. Unknown
//! keys are errors.

use std::fmt;
use std::path::Path;

use icacdma_core::channel::{LinkScenario, NoiseKind};
use icacdma_core::detectors::DEFAULT_PILOTS;
use icacdma_core::ica::{Algorithm, Contrast, IcaConfig};
use toml::{Table, Value};

use crate::harness::{Detector, ExperimentPlan};

pub const DEFAULT_BASE_SEED: u64 = 1;
pub const DEFAULT_RUNS: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn key(key: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(line), _) => write!(f, "line {line}: {}", self.message),
            (None, Some(key)) => write!(f, "key `{key}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of byte offset `pos`.
fn line_of(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

pub fn parse_table(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| ConfigError {
        line: e.span().map(|s| line_of(text, s.start)),
        key: None,
        message: e.message().trim().to_string(),
    })
}

/// Parse the value half of a `--set key=value` override. Bare words become
/// strings and comma lists become arrays, so `noise=pink` and
/// `snr_db=-10,-5,0` both work.
fn override_value(raw: &str) -> Value {
    let raw = raw.trim();
    let parse = |s: &str| -> Option<Value> {
        format!("v = {s}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
    };
    if let Some(v) = parse(raw) {
        return v;
    }
    if raw.contains(',') {
        if let Some(v) = parse(&format!("[{raw}]")) {
            return v;
        }
        return Value::Array(
            raw.split(',')
                .map(|s| Value::String(s.trim().to_string()))
                .collect(),
        );
    }
    Value::String(raw.to_string())
}

/// Apply `key=value` overrides; dotted keys address sections (`ica.tolerance`).
pub fn apply_overrides<S: AsRef<str>>(table: &mut Table, overrides: &[S]) -> Result<(), ConfigError> {
    for item in overrides {
        let item = item.as_ref();
        let (key, value) = item.split_once('=').ok_or_else(|| ConfigError {
            line: None,
            key: None,
            message: format!("override `{item}` is not key=value"),
        })?;
        let path: Vec<&str> = key.trim().split('.').collect();
        let (last, sections) = path.split_last().expect("split yields one item");
        let mut node = &mut *table;
        for section in sections {
            let entry = node
                .entry(section.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| ConfigError::key(section, "is not a section"))?;
        }
        node.insert(last.to_string(), override_value(value));
    }
    Ok(())
}

fn list<'a>(v: &'a Value) -> Vec<&'a Value> {
    match v {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    }
}

fn count(key: &str, v: &Value) -> Result<usize, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(ConfigError::key(key, format!("expected a non-negative integer, got {v}"))),
    }
}

fn real(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Integer(i) => Ok(*i as f64),
        Value::Float(f) if f.is_finite() => Ok(*f),
        _ => Err(ConfigError::key(key, format!("expected a number, got {v}"))),
    }
}

fn word<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str()
        .ok_or_else(|| ConfigError::key(key, format!("expected a string, got {v}")))
}

fn seed(key: &str, v: &Value) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::String(s) => {
            let s = s.trim();
            let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
                None => s.replace('_', "").parse(),
            };
            parsed.map_err(|_| ConfigError::key(key, format!("`{s}` is not a 64-bit seed")))
        }
        _ => Err(ConfigError::key(key, format!("expected a non-negative seed, got {v}"))),
    }
}

fn parsed_list<T, F>(key: &str, v: &Value, f: F) -> Result<Vec<T>, ConfigError>
where
    F: Fn(&str, &Value) -> Result<T, ConfigError>,
{
    let items = list(v);
    if items.is_empty() {
        return Err(ConfigError::key(key, "must not be empty"));
    }
    items.into_iter().map(|item| f(key, item)).collect()
}

fn named<T: std::str::FromStr>(key: &str, v: &Value) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    word(key, v)?
        .parse::<T>()
        .map_err(|e| ConfigError::key(key, e.to_string()))
}

/// Build a plan from a parsed table. Defaults reproduce the full grid.
pub fn plan_from_table(table: &Table) -> Result<ExperimentPlan, ConfigError> {
    let mut users = 30;
    let mut chips = 31;
    let mut symbols = vec![2000, 5000, 10000];
    let mut snrs = vec![-10.0, -5.0, 0.0];
    let mut noises = vec![NoiseKind::Awgn, NoiseKind::Pink];
    let mut algorithms = Algorithm::ALL.to_vec();
    let mut detectors = Detector::ALL.to_vec();
    let mut runs = DEFAULT_RUNS;
    let mut pilots = DEFAULT_PILOTS;
    let mut base_seed = DEFAULT_BASE_SEED;
    let mut ica = IcaConfig::new(Algorithm::Jade);

    for (key, v) in table {
        match key.as_str() {
            "users" => users = count(key, v)?,
            "chips" => chips = count(key, v)?,
            "symbols" => symbols = parsed_list(key, v, count)?,
            "snr_db" => snrs = parsed_list(key, v, real)?,
            "noise" => noises = parsed_list(key, v, named::<NoiseKind>)?,
            "algorithms" => algorithms = parsed_list(key, v, named::<Algorithm>)?,
            "detectors" => detectors = parsed_list(key, v, named::<Detector>)?,
            "runs_per_point" => runs = count(key, v)?,
            "pilot_symbols" => pilots = count(key, v)?,
            "base_seed" => base_seed = seed(key, v)?,
            "ica" => {
                let section = v
                    .as_table()
                    .ok_or_else(|| ConfigError::key(key, "must be a section"))?;
                for (sub, v) in section {
                    let full = format!("ica.{sub}");
                    match sub.as_str() {
                        "contrast" => ica.contrast = named::<Contrast>(&full, v)?,
                        "max_iterations" => ica.max_iterations = count(&full, v)?,
                        "tolerance" => ica.tolerance = real(&full, v)?,
                        _ => return Err(ConfigError::key(&full, "unknown key")),
                    }
                }
            }
            _ => return Err(ConfigError::key(key, "unknown key")),
        }
    }
    if runs == 0 {
        return Err(ConfigError::key("runs_per_point", "must be at least 1"));
    }
    dedup(&mut symbols);
    dedup(&mut noises);
    dedup(&mut algorithms);
    dedup(&mut detectors);
    let mut unique_snrs: Vec<f64> = Vec::new();
    for s in snrs {
        if !unique_snrs.contains(&s) {
            unique_snrs.push(s);
        }
    }

    let mut scenarios = Vec::new();
    for &noise in &noises {
        for &m in &symbols {
            for &snr_db in &unique_snrs {
                for &algorithm in &algorithms {
                    scenarios.push(LinkScenario {
                        users,
                        chips,
                        symbols: m,
                        snr_db,
                        noise,
                        algorithm: IcaConfig { algorithm, ..ica },
                        seed: 0,
                    });
                }
            }
        }
    }
    let plan = ExperimentPlan {
        scenarios,
        runs_per_point: runs,
        detectors,
        base_seed,
        pilot_symbols: pilots,
    };
    plan.validate().map_err(|e| ConfigError {
        line: None,
        key: None,
        message: e.to_string(),
    })?;
    Ok(plan)
}

fn dedup<T: PartialEq>(items: &mut Vec<T>) {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items.drain(..) {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    *items = out;
}

/// Parse config text and overrides into a validated plan.
pub fn parse_config_str<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<ExperimentPlan, ConfigError> {
    let mut table = parse_table(text)?;
    apply_overrides(&mut table, overrides)?;
    plan_from_table(&table)
}

pub fn parse_config(path: &Path) -> Result<ExperimentPlan, ConfigError> {
    parse_config_with(path, &[] as &[&str])
}

pub fn parse_config_with<S: AsRef<str>>(path: &Path, overrides: &[S]) -> Result<ExperimentPlan, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config_str(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_full_grid() {
        let plan = parse_config_str("", &[] as &[&str]).unwrap();
        assert_eq!(plan.scenarios.len(), 2 * 3 * 3 * 3);
        assert_eq!(plan.runs_per_point, 100);
        assert_eq!(plan.detectors, Detector::ALL.to_vec());
        assert_eq!(plan.pilot_symbols, 50);
        let sc = &plan.scenarios[0];
        assert_eq!((sc.users, sc.chips), (30, 31));
    }

    #[test]
    fn comma_override_builds_a_list() {
        let plan = parse_config_str("", &["snr_db=-10,-5,0", "noise=pink", "symbols=5000"]).unwrap();
        let snrs: Vec<f64> = plan.scenarios.iter().map(|s| s.snr_db).collect();
        assert_eq!(plan.scenarios.len(), 3 * 3);
        assert!(snrs.contains(&-10.0) && snrs.contains(&-5.0) && snrs.contains(&0.0));
        assert!(plan.scenarios.iter().all(|s| s.noise == NoiseKind::Pink));
    }

    #[test]
    fn dotted_override_reaches_sections() {
        let plan = parse_config_str("[ica]\ntolerance = 1e-6\n", &["ica.contrast=tanh"]).unwrap();
        let cfg = plan.scenarios[0].algorithm;
        assert_eq!(cfg.contrast, Contrast::Tanh);
        assert_eq!(cfg.tolerance, 1e-6);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config_str("users = 30\nchips = = 31\n", &[] as &[&str]).unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = parse_config_str("runs_per_point = 0", &[] as &[&str]).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("runs_per_point"));
        let err = parse_config_str("colour = \"red\"", &[] as &[&str]).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("colour"));
        let err = parse_config_str("[ica]\nstep = 2", &[] as &[&str]).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("ica.step"));
        let err = parse_config_str("detectors = []", &[] as &[&str]).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("detectors"));
        let err = parse_config_str("noise = \"purple\"", &[] as &[&str]).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("noise"));
    }

    #[test]
    fn seeds_accept_hex_strings() {
        let plan = parse_config_str("base_seed = \"0xFFFF_FFFF_FFFF_FFFF\"", &[] as &[&str]).unwrap();
        assert_eq!(plan.base_seed, u64::MAX);
        assert!(parse_config_str("base_seed = -1", &[] as &[&str]).is_err());
    }

    #[test]
    fn override_values() {
        assert_eq!(override_value("5"), Value::Integer(5));
        assert_eq!(override_value("awgn"), Value::String("awgn".into()));
        assert_eq!(
            override_value("awgn, pink"),
            Value::Array(vec![Value::String("awgn".into()), Value::String("pink".into())])
        );
        assert!(apply_overrides(&mut Table::new(), &["nonsense"]).is_err());
    }
}
