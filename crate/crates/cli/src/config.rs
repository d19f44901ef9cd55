//! Run configuration: built-in defaults, then an optional TOML file of flat
//! `key = value` pairs, then command-line flags. Flags win.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Duration, NaiveTime};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use vrvol_core::grid::GridSpec;
use vrvol_core::har::HarCoefficients;
use vrvol_core::ols::SeMode;
use vrvol_core::regress::DEFAULT_WINDOW;
use vrvol_core::simulate::{SimModel, SimSpec};
use vrvol_core::vr::PIPELINE_Q;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Tick,
    Gridded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarMode {
    FullSample,
    PerWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Iid,
    Ar1,
    Har,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($text:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($variant),)+
                    other => Err(format!(concat!("unknown ", $what, " `{}`"), other)),
                }
            }
        }
    };
}

keyword_enum!(InputKind, "input kind", { "tick" => InputKind::Tick, "gridded" => InputKind::Gridded });
keyword_enum!(HarMode, "HAR mode", { "full_sample" => HarMode::FullSample, "per_window" => HarMode::PerWindow });
keyword_enum!(ModelKind, "model", { "iid" => ModelKind::Iid, "ar1" => ModelKind::Ar1, "har" => ModelKind::Har });

fn parse_se_mode(s: &str) -> Result<SeMode, String> {
    match s {
        "ols" => Ok(SeMode::Ols),
        "white" => Ok(SeMode::White),
        other => Err(format!("unknown standard-error mode `{other}`")),
    }
}

/// Optional settings, as read from a config file or from flags.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub input_kind: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub session_open: Option<String>,
    pub session_close: Option<String>,
    pub step_seconds: Option<i64>,
    pub expected_returns: Option<usize>,
    pub q: Option<Vec<usize>>,
    pub window_length: Option<usize>,
    pub level: Option<f64>,
    pub har_mode: Option<String>,
    pub se_mode: Option<String>,
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub days: Option<usize>,
    pub sigma: Option<f64>,
    pub phi: Option<f64>,
    pub beta0: Option<f64>,
    pub beta_d: Option<f64>,
    pub beta_w: Option<f64>,
    pub beta_m: Option<f64>,
    pub noise_sd: Option<f64>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: other.$f.or(self.$f),)* } };
        }
        pick!(
            input, input_kind, out_dir, session_open, session_close, step_seconds, expected_returns, q,
            window_length, level, har_mode, se_mode, seed, model, days, sigma, phi, beta0, beta_d, beta_w,
            beta_m, noise_sd
        )
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub input_kind: InputKind,
    pub out_dir: PathBuf,
    pub grid: GridSpec,
    pub qs: Vec<usize>,
    pub window_length: usize,
    pub level: f64,
    pub har_mode: HarMode,
    pub se_mode: SeMode,
    pub seed: u64,
    pub model: ModelKind,
    pub days: usize,
    pub sigma: f64,
    pub phi: f64,
    pub har: HarCoefficients,
    pub noise_sd: f64,
}

fn parse_time(s: &str) -> Result<NaiveTime, CliError> {
    NaiveTime::parse_from_str(s, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
        .map_err(|_| CliError::Usage(format!("invalid time of day `{s}`")))
}

impl PipelineConfig {
    pub fn resolve(o: Overrides) -> Result<Self, CliError> {
        let usage = CliError::Usage;
        let grid = GridSpec::new(
            parse_time(o.session_open.as_deref().unwrap_or("09:00"))?,
            parse_time(o.session_close.as_deref().unwrap_or("16:00"))?,
            Duration::seconds(o.step_seconds.unwrap_or(300)),
            o.expected_returns.unwrap_or(84),
        )
        .map_err(|e| usage(e.to_string()))?;
        let qs = o.q.unwrap_or_else(|| PIPELINE_Q.to_vec());
        if qs.is_empty() {
            return Err(usage("q list is empty".into()));
        }
        if let Some(q) = qs.iter().find(|&&q| q < 2 || q > grid.expected_returns() / 2) {
            return Err(usage(format!("q = {q} outside 2..={}", grid.expected_returns() / 2)));
        }
        if qs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(usage("q values must be strictly increasing".into()));
        }
        let level = o.level.unwrap_or(0.95);
        if !(level > 0.0 && level < 1.0) {
            return Err(usage(format!("confidence level {level} must lie in (0, 1)")));
        }
        Ok(Self {
            input: o.input,
            input_kind: o.input_kind.as_deref().unwrap_or("gridded").parse().map_err(usage)?,
            out_dir: o.out_dir.unwrap_or_else(|| PathBuf::from(".")),
            grid,
            qs,
            window_length: o.window_length.unwrap_or(DEFAULT_WINDOW),
            level,
            har_mode: o.har_mode.as_deref().unwrap_or("full_sample").parse().map_err(usage)?,
            se_mode: parse_se_mode(o.se_mode.as_deref().unwrap_or("ols")).map_err(usage)?,
            seed: o.seed.unwrap_or(1),
            model: o.model.as_deref().unwrap_or("iid").parse().map_err(usage)?,
            days: o.days.unwrap_or(4344),
            sigma: o.sigma.unwrap_or(1e-3),
            phi: o.phi.unwrap_or(0.0),
            har: HarCoefficients::new(
                o.beta0.unwrap_or(0.1),
                o.beta_d.unwrap_or(0.4),
                o.beta_w.unwrap_or(0.3),
                o.beta_m.unwrap_or(0.2),
            ),
            noise_sd: o.noise_sd.unwrap_or(0.3),
        })
    }

    pub fn sim_spec(&self) -> SimSpec {
        let model = match self.model {
            ModelKind::Iid => SimModel::IidGaussian { sigma: self.sigma },
            ModelKind::Ar1 => SimModel::Ar1 { phi: self.phi, sigma: self.sigma },
            ModelKind::Har => SimModel::HarCascade { coefficients: self.har, noise_sd: self.noise_sd },
        };
        SimSpec { model, days: self.days, returns_per_day: self.grid.expected_returns(), seed: self.seed }
    }

    /// Analysis parameters as sorted `key=value` lines. File locations are
    /// excluded so that moving inputs or outputs does not change the hash.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let qs: Vec<String> = self.qs.iter().map(|q| q.to_string()).collect();
        let fields: [(&str, String); 20] = [
            ("beta0", format!("{:?}", self.har.beta0)),
            ("beta_d", format!("{:?}", self.har.beta_d)),
            ("beta_m", format!("{:?}", self.har.beta_m)),
            ("beta_w", format!("{:?}", self.har.beta_w)),
            ("days", self.days.to_string()),
            ("expected_returns", g.expected_returns().to_string()),
            ("har_mode", format!("{:?}", self.har_mode)),
            ("input_kind", format!("{:?}", self.input_kind)),
            ("level", format!("{:?}", self.level)),
            ("model", format!("{:?}", self.model)),
            ("noise_sd", format!("{:?}", self.noise_sd)),
            ("phi", format!("{:?}", self.phi)),
            ("q", qs.join(",")),
            ("se_mode", format!("{:?}", self.se_mode)),
            ("seed", self.seed.to_string()),
            ("session_close", g.session_close().to_string()),
            ("session_open", g.session_open().to_string()),
            ("sigma", format!("{:?}", self.sigma)),
            ("step_seconds", g.step().num_seconds().to_string()),
            ("window_length", self.window_length.to_string()),
        ];
        for (k, v) in fields {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    /// Comment line written at the top of every output file.
    pub fn provenance(&self) -> String {
        format!("vrvol {} config={}", env!("CARGO_PKG_VERSION"), self.hash())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::resolve(Overrides::default()).unwrap();
        assert_eq!(c.qs, vec![2, 3, 4, 5, 6]);
        assert_eq!(c.window_length, 1250);
        assert_eq!(c.level, 0.95);
        assert_eq!(c.har_mode, HarMode::FullSample);
        assert_eq!(c.se_mode, SeMode::Ols);
        assert_eq!(c.grid, GridSpec::default());
    }

    #[test]
    fn flags_override_file() {
        let file: Overrides = toml::from_str("window_length = 500\nq = [2, 6]\nse_mode = \"white\"\n").unwrap();
        let flags = Overrides { window_length: Some(300), ..Default::default() };
        let c = PipelineConfig::resolve(file.merge(flags)).unwrap();
        assert_eq!(c.window_length, 300);
        assert_eq!(c.qs, vec![2, 6]);
        assert_eq!(c.se_mode, SeMode::White);
    }

    #[test]
    fn invalid_settings_are_usage_errors() {
        let bad = |o: Overrides| matches!(PipelineConfig::resolve(o), Err(CliError::Usage(_)));
        assert!(bad(Overrides { q: Some(vec![1]), ..Default::default() }));
        assert!(bad(Overrides { q: Some(vec![43]), ..Default::default() }));
        assert!(bad(Overrides { level: Some(1.0), ..Default::default() }));
        assert!(bad(Overrides { expected_returns: Some(80), ..Default::default() }));
        assert!(bad(Overrides { har_mode: Some("rolling".into()), ..Default::default() }));
        assert!(toml::from_str::<Overrides>("unknown_key = 1").is_err());
    }

    #[test]
    fn hash_ignores_paths_but_not_parameters() {
        let a = PipelineConfig::resolve(Overrides::default()).unwrap();
        let b = PipelineConfig::resolve(Overrides { out_dir: Some("/tmp/x".into()), ..Default::default() }).unwrap();
        let c = PipelineConfig::resolve(Overrides { seed: Some(2), ..Default::default() }).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
