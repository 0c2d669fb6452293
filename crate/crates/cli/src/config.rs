use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    NormsSuite,
    QsdScheme,
    QcdScheme,
    Repetition,
    PiScheme,
    Orthogonalize,
    OracleProtocol,
    OracleScaling,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the suite default.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// JSON file with the same keys as the flags
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Flags {
    /// Fields set here win over those in `base`.
    pub fn over(self, base: Flags) -> Flags {
        Flags {
            config: self.config,
            seed: self.seed.or(base.seed),
            qubits: self.qubits.or(base.qubits),
            d: self.d.or(base.d),
            m: self.m.or(base.m),
            k: self.k.or(base.k),
            mu: self.mu.or(base.mu),
            restarts: self.restarts.or(base.restarts),
            samples: self.samples.or(base.samples),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }
}

/// Fully resolved parameters of one run. Parameters a suite ignores stay `None`
/// and are left out of the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Suite,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy)]
enum Param {
    Qubits,
    D,
    M,
    K,
    Mu,
    Restarts,
    Samples,
}

struct Cap {
    param: Param,
    default: Option<f64>,
    min: f64,
    max: f64,
}

const fn cap(param: Param, default: Option<f64>, min: f64, max: f64) -> Cap {
    Cap { param, default, min, max }
}

/// Desk-scale caps per suite. A `None` default for `d` or `m` on the scaling
/// sweep means "sweep the standard grid".
fn caps(suite: Suite) -> Vec<Cap> {
    use Param::*;
    match suite {
        Suite::NormsSuite => vec![cap(Samples, Some(1000.0), 1.0, 20_000.0)],
        Suite::QsdScheme => vec![cap(Qubits, Some(2.0), 1.0, 4.0)],
        Suite::QcdScheme => vec![cap(Qubits, Some(1.0), 1.0, 2.0), cap(Restarts, Some(16.0), 1.0, 256.0)],
        Suite::Repetition => vec![
            cap(Qubits, Some(1.0), 1.0, 2.0),
            cap(K, Some(2.0), 1.0, 3.0),
            cap(Mu, Some(1e-6), 0.0, 0.25),
            cap(Restarts, Some(8.0), 1.0, 256.0),
        ],
        Suite::PiScheme => vec![cap(D, Some(2.0), 1.0, 4.0), cap(Restarts, Some(64.0), 1.0, 256.0)],
        Suite::Orthogonalize => vec![cap(Samples, Some(200.0), 1.0, 5000.0)],
        Suite::OracleProtocol => vec![
            cap(D, Some(2.0), 1.0, 8.0),
            cap(Restarts, Some(32.0), 1.0, 256.0),
            cap(Samples, Some(50.0), 1.0, 1000.0),
        ],
        Suite::OracleScaling => vec![
            cap(D, None, 1.0, 32.0),
            cap(M, None, 0.0, 8.0),
            cap(Samples, Some(10_000.0), 2.0, 100_000.0),
        ],
    }
}

fn name(p: Param) -> &'static str {
    match p {
        Param::Qubits => "qubits",
        Param::D => "d",
        Param::M => "m",
        Param::K => "k",
        Param::Mu => "mu",
        Param::Restarts => "restarts",
        Param::Samples => "samples",
    }
}

impl RunConfig {
    pub fn resolve(suite: Suite, flags: Flags) -> Result<RunConfig, String> {
        let given = |p: Param| -> Option<f64> {
            match p {
                Param::Qubits => flags.qubits.map(|v| v as f64),
                Param::D => flags.d.map(|v| v as f64),
                Param::M => flags.m.map(f64::from),
                Param::K => flags.k.map(|v| v as f64),
                Param::Mu => flags.mu,
                Param::Restarts => flags.restarts.map(|v| v as f64),
                Param::Samples => flags.samples.map(|v| v as f64),
            }
        };
        let table = caps(suite);
        for p in [Param::Qubits, Param::D, Param::M, Param::K, Param::Mu, Param::Restarts, Param::Samples] {
            if given(p).is_some() && !table.iter().any(|c| name(c.param) == name(p)) {
                return Err(format!("--{} is not used by {suite}", name(p)));
            }
        }
        let mut cfg = RunConfig {
            subcommand: suite,
            seed: flags.seed.unwrap_or(0),
            qubits: None,
            d: None,
            m: None,
            k: None,
            mu: None,
            restarts: None,
            samples: None,
            format: flags.format.unwrap_or_default(),
            out: flags.out,
        };
        for c in &table {
            let Some(v) = given(c.param).or(c.default) else { continue };
            let in_range = match c.param {
                Param::Mu => v > c.min && v <= c.max,
                _ => v >= c.min && v <= c.max,
            };
            if !in_range || !v.is_finite() {
                let lo = if matches!(c.param, Param::Mu) { "(" } else { "[" };
                return Err(format!("--{} = {v} outside {lo}{}, {}]", name(c.param), c.min, c.max));
            }
            match c.param {
                Param::Qubits => cfg.qubits = Some(v as usize),
                Param::D => cfg.d = Some(v as usize),
                Param::M => cfg.m = Some(v as u32),
                Param::K => cfg.k = Some(v as usize),
                Param::Mu => cfg.mu = Some(v),
                Param::Restarts => cfg.restarts = Some(v as usize),
                Param::Samples => cfg.samples = Some(v as usize),
            }
        }
        if cfg.format == Format::Csv && suite != Suite::OracleScaling {
            return Err(format!("csv output is only available for {}", Suite::OracleScaling));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_only_used_parameters() {
        let cfg = RunConfig::resolve(Suite::Repetition, Flags::default()).unwrap();
        assert_eq!((cfg.k, cfg.mu, cfg.d, cfg.samples), (Some(2), Some(1e-6), None, None));
    }

    #[test]
    fn flags_override_file_values() {
        let file: Flags = serde_json::from_str(r#"{"k": 3, "seed": 5}"#).unwrap();
        let flags = Flags { k: Some(1), ..Flags::default() };
        let cfg = RunConfig::resolve(Suite::Repetition, flags.over(file)).unwrap();
        assert_eq!((cfg.k, cfg.seed), (Some(1), 5));
    }

    #[test]
    fn rejects_out_of_range_and_foreign_parameters() {
        let big = Flags { k: Some(4), ..Flags::default() };
        assert!(RunConfig::resolve(Suite::Repetition, big).is_err());
        let foreign = Flags { k: Some(1), ..Flags::default() };
        assert!(RunConfig::resolve(Suite::NormsSuite, foreign).is_err());
        let csv = Flags { format: Some(Format::Csv), ..Flags::default() };
        assert!(RunConfig::resolve(Suite::QsdScheme, csv).is_err());
        assert!(serde_json::from_str::<Flags>(r#"{"kk": 1}"#).is_err());
    }
}
