//! Configuration, validation and execution of CSV-emitting runs.
//!
//! Config files are flat `key=value` text; `#` starts a comment. Angles: `alpha` in
//! radians, `phi` and `theta` in degrees.

mod experiments;
mod output;

pub use output::{format_float, sha256_hex, write_atomic, CsvTable};

use crate::error::Error;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Lgi,
    LgiDephasing,
    LeeyangTrace,
    LeeyangCoamoeba,
    LeeyangAmoebaGrid,
    Mpemba,
    MpembaGenuine,
    EntlocLocalize,
    EntlocRobustness,
    ChannelAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Lgi,
        Experiment::LgiDephasing,
        Experiment::LeeyangTrace,
        Experiment::LeeyangCoamoeba,
        Experiment::LeeyangAmoebaGrid,
        Experiment::Mpemba,
        Experiment::MpembaGenuine,
        Experiment::EntlocLocalize,
        Experiment::EntlocRobustness,
        Experiment::ChannelAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lgi => "lgi",
            Experiment::LgiDephasing => "lgi-dephasing",
            Experiment::LeeyangTrace => "leeyang-trace",
            Experiment::LeeyangCoamoeba => "leeyang-coamoeba",
            Experiment::LeeyangAmoebaGrid => "leeyang-amoeba-grid",
            Experiment::Mpemba => "mpemba",
            Experiment::MpembaGenuine => "mpemba-genuine",
            Experiment::EntlocLocalize => "entloc-localize",
            Experiment::EntlocRobustness => "entloc-robustness",
            Experiment::ChannelAudit => "channel-audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            CliError::Config(format!("unknown experiment '{s}'; expected one of {}", names.join(", ")))
        })
    }
}

/// Failure classes with their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidIndex { .. } | Error::DimensionMismatch(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed: u64,
}

/// Parse `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|m| CliError::Config(format!("line {}: {m}", no + 1)))?;
        map.insert(k, v);
    }
    Ok(map)
}

/// Split `key=value`, trimming both sides.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(format!("empty key in '{s}'"));
    }
    Ok((k.to_string(), v.to_string()))
}

impl RunConfig {
    /// Merge a config file (optional) with overrides; `experiment` and `seed` may come from
    /// either, explicit arguments win.
    pub fn assemble(
        experiment: Option<&str>,
        config_path: Option<&Path>,
        overrides: &[(String, String)],
        out: PathBuf,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let mut params = match config_path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            params.insert(k.clone(), v.clone());
        }
        let file_exp = params.remove("experiment");
        let file_seed = params.remove("seed");
        let experiment = experiment
            .map(str::to_string)
            .or(file_exp)
            .ok_or_else(|| CliError::Config("missing key 'experiment'".into()))?
            .parse()?;
        let seed = match (seed, file_seed) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse().map_err(|_| CliError::Config(format!("key 'seed': '{s}' is not a u64")))?,
            (None, None) => 0,
        };
        Ok(Self { experiment, params, out, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check keys and values without running anything.
pub fn validate(config: &RunConfig) -> Diagnostics {
    match experiments::Plan::build(config) {
        Ok(plan) => Diagnostics { errors: Vec::new(), warnings: plan.warnings() },
        Err(e) => Diagnostics { errors: vec![e.to_string()], warnings: Vec::new() },
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub experiment: Experiment,
    pub seed: u64,
    pub version: &'static str,
    pub params: BTreeMap<String, String>,
    pub wall_time: f64,
    /// (file name, sha256 hex).
    pub files: Vec<(String, String)>,
    /// Scalar results, formatted.
    pub results: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = format!("experiment={}\nseed={}\nversion={}\nwall_time_s={:.3}\n", self.experiment, self.seed, self.version, self.wall_time);
        for (k, v) in &self.params {
            s.push_str(&format!("config.{k}={v}\n"));
        }
        for (k, v) in &self.results {
            s.push_str(&format!("result.{k}={v}\n"));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning={w}\n"));
        }
        for (f, h) in &self.files {
            s.push_str(&format!("file={f} sha256={h}\n"));
        }
        s
    }

    /// Value of `result.<key>` parsed back as a float.
    pub fn result_f64(&self, key: &str) -> Option<f64> {
        self.results.get(key)?.parse().ok()
    }
}

/// Validate, execute, write every CSV and `manifest.txt` atomically into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let plan = experiments::Plan::build(config)?;
    let warnings = plan.warnings();
    let outcome = plan.execute(config.seed)?;
    std::fs::create_dir_all(&config.out)?;
    let mut files = Vec::new();
    for table in &outcome.tables {
        let text = table.render();
        write_atomic(&config.out.join(&table.name), text.as_bytes())?;
        files.push((table.name.clone(), sha256_hex(text.as_bytes())));
    }
    let manifest = RunManifest {
        experiment: config.experiment,
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION"),
        params: config.params.clone(),
        wall_time: start.elapsed().as_secs_f64(),
        files,
        results: outcome.results,
        warnings,
    };
    write_atomic(&config.out.join("manifest.txt"), manifest.to_text().as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# c\nexperiment = lgi\nalpha=0.3 # rad\n\n").unwrap();
        assert_eq!(m["experiment"], "lgi");
        assert_eq!(m["alpha"], "0.3");
        assert!(parse_config_text("novalue").is_err());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert_eq!("nope".parse::<Experiment>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn overrides_win() {
        let cfg = RunConfig::assemble(Some("mpemba"), None, &[("seed".into(), "9".into())], PathBuf::from("x"), None).unwrap();
        assert_eq!(cfg.seed, 9);
        let cfg = RunConfig::assemble(Some("mpemba"), None, &[("seed".into(), "9".into())], PathBuf::from("x"), Some(4)).unwrap();
        assert_eq!(cfg.seed, 4);
        assert!(RunConfig::assemble(None, None, &[], PathBuf::from("x"), None).is_err());
    }
}
