//! Run configuration: flags and `SUBGROUPS_*` variables override a
//! `key=value` file, which overrides the built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use subgroups::amenability::{parse_ratio, Rational};
use subgroups::permrep::{DEFAULT_COPIES, DEFAULT_RADIUS};

use crate::report::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// key=value file supplying defaults for the options below
    #[arg(long, global = true, env = "SUBGROUPS_CONFIG")]
    pub config: Option<std::path::PathBuf>,
    /// Coset budget for enumeration
    #[arg(long, global = true, env = "SUBGROUPS_MAX_COSETS")]
    pub max_cosets: Option<usize>,
    /// Index bound for low-index searches
    #[arg(long, global = true, env = "SUBGROUPS_MAX_INDEX")]
    pub max_index: Option<usize>,
    /// Orbits per finite-index class in tau-star constructions
    #[arg(long, global = true, env = "SUBGROUPS_COPIES")]
    pub copies: Option<usize>,
    /// Word-length radius of materialised infinite orbits
    #[arg(long, global = true, env = "SUBGROUPS_RADIUS")]
    pub radius: Option<usize>,
    /// Følner threshold as p/q
    #[arg(long, global = true, env = "SUBGROUPS_EPSILON")]
    pub epsilon: Option<String>,
    /// Largest candidate Følner set
    #[arg(long, global = true, env = "SUBGROUPS_MAX_SIZE")]
    pub max_size: Option<usize>,
    /// Seed for generated fixtures
    #[arg(long, global = true, env = "SUBGROUPS_SEED")]
    pub seed: Option<u64>,
    /// Output format
    #[arg(long, global = true, env = "SUBGROUPS_FORMAT", value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_cosets: usize,
    pub max_index: usize,
    pub copies: usize,
    pub radius: usize,
    pub epsilon: Rational,
    pub max_size: usize,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            max_cosets: 100_000,
            max_index: 6,
            copies: DEFAULT_COPIES,
            radius: DEFAULT_RADIUS,
            epsilon: Rational::new(1, 4),
            max_size: 1000,
            seed: 0,
            format: Format::Json,
        }
    }
}

const KEYS: [&str; 8] = ["max_cosets", "max_index", "copies", "radius", "epsilon", "max_size", "seed", "format"];

fn read_file(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("{}:{}: expected key=value", path.display(), n + 1)));
        };
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Failure::Usage(format!("{}:{}: unknown key `{key}`", path.display(), n + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, Failure> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(text) => text.parse().map_err(|_| Failure::Usage(format!("invalid value `{text}` for {key}"))),
        None => Ok(default),
    }
}

impl RunConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<RunConfig, Failure> {
        let file = match &args.config {
            Some(path) => read_file(path)?,
            None => BTreeMap::new(),
        };
        let d = RunConfig::default();
        let epsilon_text = args.epsilon.clone().or_else(|| file.get("epsilon").cloned());
        let epsilon = match epsilon_text {
            Some(text) => parse_ratio(&text).map_err(|e| Failure::Usage(e.to_string()))?,
            None => d.epsilon,
        };
        let config = RunConfig {
            max_cosets: pick(args.max_cosets, &file, "max_cosets", d.max_cosets)?,
            max_index: pick(args.max_index, &file, "max_index", d.max_index)?,
            copies: pick(args.copies, &file, "copies", d.copies)?,
            radius: pick(args.radius, &file, "radius", d.radius)?,
            epsilon,
            max_size: pick(args.max_size, &file, "max_size", d.max_size)?,
            seed: pick(args.seed, &file, "seed", d.seed)?,
            format: pick(args.format, &file, "format", d.format)?,
        };
        for (name, value) in [
            ("max_cosets", config.max_cosets),
            ("max_index", config.max_index),
            ("copies", config.copies),
            ("radius", config.radius),
            ("max_size", config.max_size),
        ] {
            if value == 0 {
                return Err(Failure::Usage(format!("{name} must be positive")));
            }
        }
        if config.epsilon <= Rational::from_integer(0) {
            return Err(Failure::Usage("epsilon must be positive".into()));
        }
        Ok(config)
    }
}
