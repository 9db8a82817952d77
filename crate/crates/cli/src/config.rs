//! Command-line and file configuration. Every subcommand has one struct that is
//! both a clap argument group and a TOML section; flags override file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::AppError;

#[derive(Debug, Parser)]
#[command(name = "ssahm", version, about = "Dirac scattering experiments on asymptotically hyperbolic profiles")]
pub struct Cli {
    /// TOML file with `[solver]`, `[output]` and per-command sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scattering coefficients over a range of angular momenta.
    Forward(ForwardArgs),
    /// Transfer-matrix scan over a complex grid.
    Cam(CamArgs),
    /// Certified zeros of aL3 inside a box.
    Zeros(ZerosArgs),
    /// Large-momentum asymptotics of T and L.
    Asym(AsymArgs),
    /// Decay of reflection differences between two profiles.
    Uniq(UniqArgs),
    /// Transmission-only comparison of two profiles.
    Transmission(TransmissionArgs),
    /// Reissner-Nordström-de Sitter horizons and parameter recovery.
    Bh(BhArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Forward(_) => "forward",
            Command::Cam(_) => "cam",
            Command::Zeros(_) => "zeros",
            Command::Asym(_) => "asym",
            Command::Uniq(_) => "uniq",
            Command::Transmission(_) => "transmission",
            Command::Bh(_) => "bh",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverArgs {
    /// Relative tolerance of the Jost integrator.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Bound on the truncation error of the asymptotic start.
    #[arg(long, global = true)]
    pub tail_tol: Option<f64>,
    /// Allowed disagreement between the two matching points.
    #[arg(long, global = true)]
    pub match_tol: Option<f64>,
    /// Quadrature tolerance of the Liouville map.
    #[arg(long, global = true)]
    pub liouville_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputArgs {
    /// Directory for tables, reports and the manifest.
    #[arg(long = "out", global = true)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardArgs {
    /// sech, scaled_sech, bumped_sech, tabulated, table or rnds.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Inclusive range `a..b` or a comma list.
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CamArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// `re_min,im_min,re_max,im_max`.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(rename = "box")]
    pub bounds: Option<Vec<f64>>,
    /// Nodes along Re z and Im z.
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZerosArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// `re_min,im_min,re_max,im_max`; defaults to the predicted strip.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(rename = "box")]
    pub bounds: Option<Vec<f64>>,
    /// Imaginary range `lo,hi` of the default strip.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strip: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniqArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Second profile; defaults to the first, translated by `shift`.
    #[arg(long)]
    pub other: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub other_params: Option<Vec<f64>>,
    #[arg(long)]
    pub other_table: Option<PathBuf>,
    /// Translation applied to the second profile.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// left or right.
    #[arg(long)]
    pub side: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub other: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub other_params: Option<Vec<f64>>,
    #[arg(long)]
    pub other_table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Number of leading indices on which L must agree.
    #[arg(long)]
    pub l_agreement: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BhArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub mass: Option<f64>,
    #[arg(long = "Q", allow_hyphen_values = true)]
    #[serde(rename = "Q")]
    pub charge: Option<f64>,
    #[arg(long = "Lambda")]
    #[serde(rename = "Lambda")]
    pub cosmological: Option<f64>,
    /// Tortoise offset; calibrated when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Recover (M, Q, Λ) from the profile's scattering-relevant constants.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub recover: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub solver: Option<SolverArgs>,
    pub output: Option<OutputArgs>,
    pub forward: Option<ForwardArgs>,
    pub cam: Option<CamArgs>,
    pub zeros: Option<ZerosArgs>,
    pub asym: Option<AsymArgs>,
    pub uniq: Option<UniqArgs>,
    pub transmission: Option<TransmissionArgs>,
    pub bh: Option<BhArgs>,
}

pub fn load_config(path: &Path) -> Result<ConfigFile, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_config(text: &str) -> Result<ConfigFile, toml::de::Error> {
    toml::from_str(text)
}

/// Flag values win over file values, key by key.
pub fn overlay<T>(file: Option<T>, flags: T, section: &str) -> Result<T, AppError>
where
    T: Serialize + DeserializeOwned,
{
    let Some(file) = file else {
        return Ok(flags);
    };
    let to_table = |v: &T| {
        toml::Table::try_from(v).map_err(|e| AppError::Config(format!("[{section}]: {e}")))
    };
    let mut merged = to_table(&file)?;
    for (k, v) in to_table(&flags)? {
        merged.insert(k, v);
    }
    merged
        .try_into()
        .map_err(|e| AppError::Config(format!("[{section}]: {e}")))
}

/// Parses `a..b` (inclusive, unit step) or `x,y,z`.
pub fn parse_n_range(text: &str) -> Result<Vec<f64>, AppError> {
    let bad = || AppError::Config(format!("field `n`: cannot parse '{text}' (expected a..b or a comma list)"));
    let values: Vec<f64> = if let Some((a, b)) = text.split_once("..") {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(b >= a) {
            return Err(AppError::Config(format!("field `n`: empty range '{text}'")));
        }
        let k = (b - a).floor() as usize;
        (0..=k).map(|i| a + i as f64).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(AppError::Config("field `n`: empty range".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(AppError::Config(format!("field `n`: {v} is not a non-negative number")));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("[forward]\nlamda = 1.0\n").unwrap_err().to_string();
        assert!(err.contains("lamda"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_section_is_rejected() {
        assert!(parse_config("[fwd]\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("[forward]\nlambda = 0.5\nn = \"1..4\"\n").unwrap();
        let flags = ForwardArgs {
            lambda: Some(2.0),
            ..Default::default()
        };
        let merged = overlay(file.forward, flags, "forward").unwrap();
        assert_eq!(merged.lambda, Some(2.0));
        assert_eq!(merged.n.as_deref(), Some("1..4"));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_n_range("1..4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_n_range("2, 5").unwrap(), vec![2.0, 5.0]);
        assert!(parse_n_range("4..1").is_err());
        assert!(parse_n_range("x").is_err());
        assert!(parse_n_range("-1").is_err());
    }
}
