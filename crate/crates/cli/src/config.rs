//! Run configuration.
//!
//! A run is described by one JSON object with the fields of [`Params`].
//! Values are resolved in this order, later winning:
//!
//! 1. per-command defaults ([`defaults`]),
//! 2. the config file given with `--config`,
//! 3. command-line flags.
//!
//! The seed has no default: it comes from `--seed`, the config file, or the
//! `CUSPFLOW_SEED` environment variable, in that order. A field that the
//! chosen command does not use is rejected rather than ignored.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use cuspflow_core::group::FactorKind;
use cuspflow_core::lattice::{LatticeKind, LatticeSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "CUSPFLOW_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Loglaw,
    Shrink,
    ThetaNorm,
    Siegel,
    DkMeasure,
    YdkMeasure,
    ScatteringScan,
    PmTable,
    IdentityCheck,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Loglaw => "loglaw",
            CommandName::Shrink => "shrink",
            CommandName::ThetaNorm => "theta-norm",
            CommandName::Siegel => "siegel",
            CommandName::DkMeasure => "dk-measure",
            CommandName::YdkMeasure => "ydk-measure",
            CommandName::ScatteringScan => "scattering-scan",
            CommandName::PmTable => "pm-table",
            CommandName::IdentityCheck => "identity-check",
        }
    }
}

/// `sl2z`, `zi` (for `SL2(Z[i])`) or `gamma0-N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LatticeName {
    Sl2z,
    Zi,
    Gamma0(u32),
}

impl LatticeName {
    pub fn spec(self) -> CliResult<LatticeSpec> {
        Ok(match self {
            LatticeName::Sl2z => LatticeSpec::modular(),
            LatticeName::Zi => LatticeSpec::bianchi(),
            LatticeName::Gamma0(n) => LatticeSpec::gamma0(n)?,
        })
    }

    pub fn factor_kind(self) -> FactorKind {
        match self {
            LatticeName::Zi => FactorKind::Complex,
            _ => FactorKind::Real,
        }
    }

    pub fn is_congruence(self) -> bool {
        matches!(self, LatticeName::Gamma0(_))
    }

    pub fn kind(self) -> LatticeKind {
        match self {
            LatticeName::Sl2z => LatticeKind::ModularZ,
            LatticeName::Zi => LatticeKind::BianchiZi,
            LatticeName::Gamma0(level) => LatticeKind::Gamma0 { level },
        }
    }
}

impl FromStr for LatticeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sl2z" | "modular" => Ok(LatticeName::Sl2z),
            "zi" | "sl2zi" | "bianchi" => Ok(LatticeName::Zi),
            other => {
                let level = other
                    .strip_prefix("gamma0-")
                    .and_then(|n| n.parse::<u32>().ok())
                    .filter(|&n| n >= 2);
                level
                    .map(LatticeName::Gamma0)
                    .ok_or_else(|| format!("unknown lattice `{s}` (expected sl2z, zi or gamma0-N with N >= 2)"))
            }
        }
    }
}

impl TryFrom<String> for LatticeName {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<LatticeName> for String {
    fn from(l: LatticeName) -> String {
        l.to_string()
    }
}

impl fmt::Display for LatticeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeName::Sl2z => write!(f, "sl2z"),
            LatticeName::Zi => write!(f, "zi"),
            LatticeName::Gamma0(n) => write!(f, "gamma0-{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    Spectral,
    Both,
}

/// Which test function to use: the `f^{(λ)}` family or a bi-`K`-invariant
/// bump supported on `support = [a, b]` in `t_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionShape {
    Family,
    Spherical,
}

/// Accepts `200000` as well as `2e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

/// Every tunable of every command. In a config file all fields are optional;
/// after resolution exactly the fields the command uses are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Command the file was written for; must match the subcommand.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    /// sl2z, zi or gamma0-N.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeName>,
    /// Master seed (fallback: CUSPFLOW_SEED).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Monte Carlo samples per RNG stream.
    #[arg(long, global = true, value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunk: Option<u64>,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long, short, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionShape>,
    /// `a,b`: `t_n` support of the spherical test function.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<f64>>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[arg(long, global = true, value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[arg(long, global = true, value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbits: Option<u64>,
    /// First time entering `max Δ/log s` (default `√horizon`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_start: Option<f64>,
    /// `+1` (summable radii) or `-1` (divergent).
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    #[arg(long, global = true, value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_mult: Option<u64>,
    #[arg(long, global = true, value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u64>,
    /// Hits with `ℓ` above this are counted separately.
    #[arg(long, global = true, value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beyond: Option<u64>,
    #[arg(long, global = true, value_delimiter = ',', num_args = 1.., value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    /// Radii for the target-measure table.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',', num_args = 1.., value_parser = parse_count)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<u64>>,
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_step: Option<f64>,
}

const COMMON: &[&str] = &["command", "lattice", "seed", "workers", "chunk", "output"];

/// Fields used by a command, beyond [`COMMON`].
pub fn used_fields(cmd: CommandName) -> &'static [&'static str] {
    match cmd {
        CommandName::Loglaw => &["horizon", "orbits", "ratio_start"],
        CommandName::Shrink => &["eps", "sign", "l_max", "orbits", "beyond", "checkpoints", "radii", "samples"],
        CommandName::ThetaNorm => &["lambda", "eps", "function", "support", "method", "samples"],
        CommandName::Siegel => &["lambda", "eps", "function", "support", "samples"],
        CommandName::DkMeasure | CommandName::YdkMeasure => &["eps", "sign", "p_mult", "k", "samples"],
        CommandName::ScatteringScan => &["s", "r_max", "r_step"],
        CommandName::PmTable => &["s", "m_max", "lambda", "eps"],
        CommandName::IdentityCheck => &["s", "m_max", "points", "lambda", "eps", "samples"],
    }
}

/// Per-command defaults, as a partial config.
pub fn defaults(cmd: CommandName) -> Value {
    let common = json!({ "lattice": "sl2z", "workers": 1, "chunk": 4096 });
    let specific = match cmd {
        CommandName::Loglaw => json!({ "horizon": 1e6, "orbits": 100 }),
        CommandName::Shrink => json!({
            "eps": 0.2, "sign": 1, "l_max": 1_000_000, "orbits": 100, "beyond": 10_000,
            "checkpoints": [10_000, 100_000, 1_000_000], "radii": [], "samples": 0,
        }),
        CommandName::ThetaNorm => json!({
            "lambda": [4.0], "eps": 0.2, "function": "family", "support": [-2.0, 0.0],
            "method": "both", "samples": 200_000,
        }),
        CommandName::Siegel => json!({
            "lambda": [4.0], "eps": 0.2, "function": "family", "support": [-2.0, 0.0], "samples": 100_000,
        }),
        CommandName::DkMeasure => json!({ "eps": 0.2, "sign": -1, "p_mult": 2, "k": [8, 16, 32, 64], "samples": 200_000 }),
        CommandName::YdkMeasure => json!({ "eps": 0.2, "sign": -1, "p_mult": 2, "k": [4, 8, 16, 32], "samples": 20_000 }),
        CommandName::ScatteringScan => json!({ "s": [0.55, 0.6, 0.7, 0.8, 0.9, 0.95], "r_max": 20.0, "r_step": 0.1 }),
        CommandName::PmTable => json!({ "s": [0.6, 0.75, 0.9, 1.0], "m_max": 50, "lambda": [4.0, 16.0, 64.0], "eps": 0.2 }),
        CommandName::IdentityCheck => json!({
            "s": [0.6, 0.75], "m_max": 3, "points": 100, "lambda": [2.0, 8.0, 32.0], "eps": 0.2, "samples": 100_000,
        }),
    };
    let mut m = common.as_object().cloned().unwrap_or_default();
    m.extend(specific.as_object().cloned().unwrap_or_default());
    Value::Object(m)
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub seed: u64,
    pub lattice: LatticeName,
    pub workers: usize,
    pub chunk: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// The command's parameters; fields it does not use are absent.
    pub params: Params,
}

pub fn read_config_file(path: &Path) -> CliResult<Params> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
        path: path.to_path_buf(),
        source,
    })
}

fn to_map(p: &Params) -> Map<String, Value> {
    match serde_json::to_value(p) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

/// Combine defaults, the config file and flags, then validate.
pub fn resolve(cmd: CommandName, file: Option<Params>, flags: Params, env_seed: Option<String>) -> CliResult<RunConfig> {
    let file = file.unwrap_or_default();
    if let Some(c) = file.command {
        if c != cmd {
            return Err(CliError::invalid(format!(
                "config file is for `{}` but the command is `{}`",
                c.as_str(),
                cmd.as_str()
            )));
        }
    }
    let used = used_fields(cmd);
    let mut merged = match defaults(cmd) {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    for layer in [to_map(&file), to_map(&flags)] {
        for (k, v) in layer {
            if k == "command" {
                continue;
            }
            if !COMMON.contains(&k.as_str()) && !used.contains(&k.as_str()) {
                return Err(CliError::invalid(format!("`{k}` is not a parameter of `{}`", cmd.as_str())));
            }
            merged.insert(k, v);
        }
    }
    if !merged.contains_key("seed") {
        let s = env_seed.ok_or_else(|| {
            CliError::invalid(format!("a master seed is required (--seed, config `seed`, or {SEED_ENV})"))
        })?;
        let seed: u64 = s
            .trim()
            .parse()
            .map_err(|_| CliError::invalid(format!("{SEED_ENV}=`{s}` is not an unsigned integer")))?;
        merged.insert("seed".into(), json!(seed));
    }
    let mut params: Params = serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::invalid(e.to_string()))?;
    let lattice = params.lattice.take().expect("default lattice");
    let seed = params.seed.take().expect("seed resolved");
    let workers = params.workers.take().expect("default workers");
    let chunk = params.chunk.take().expect("default chunk");
    let output = params.output.take();
    params.command = None;
    let mut cfg = RunConfig {
        command: cmd,
        seed,
        lattice,
        workers,
        chunk,
        output,
        params,
    };
    if cmd == CommandName::Loglaw && cfg.params.ratio_start.is_none() {
        let h = cfg.params.horizon.unwrap_or(0.0);
        cfg.params.ratio_start = Some(cuspflow_core::dynamics::default_ratio_start(h));
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn check(ok: bool, msg: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(msg))
    }
}

/// Range checks. Domain invariants (schedules, test functions) are checked
/// again by the core constructors when the experiment builds them.
pub fn validate(cfg: &RunConfig) -> CliResult<()> {
    let p = &cfg.params;
    check(cfg.workers >= 1 && cfg.workers <= 1024, "workers must lie in [1, 1024]")?;
    check(cfg.chunk >= 1, "chunk must be at least 1")?;
    if let Some(eps) = p.eps {
        if matches!(cfg.command, CommandName::Shrink | CommandName::DkMeasure | CommandName::YdkMeasure) {
            cuspflow_core::dynamics::TargetSchedule::with_window(eps, p.sign.unwrap_or(1), p.p_mult.unwrap_or(2))?;
        } else {
            check(eps > 0.0 && eps < 1.0, "TestFunction: eps must lie in (0, 1)")?;
        }
    }
    if let Some(l) = &p.lambda {
        check(!l.is_empty() && l.iter().all(|&x| x >= 1.0 && x.is_finite()), "every lambda must be finite and at least 1")?;
    }
    if let Some(s) = &p.support {
        check(s.len() == 2 && s[0] < s[1] && s.iter().all(|x| x.is_finite()), "support must be `a,b` with a < b")?;
    }
    if let Some(h) = p.horizon {
        check(h >= 10.0 && h.is_finite(), "horizon must be at least 10")?;
        if let Some(r) = p.ratio_start {
            check(r > 1.0 && r < h, "ratio_start must lie in (1, horizon)")?;
        }
    }
    if let Some(n) = p.orbits {
        check(n >= 1, "orbits must be at least 1")?;
    }
    if let Some(l) = p.l_max {
        check(l >= 10, "L_max must be at least 10")?;
        if let Some(c) = &p.checkpoints {
            check(c.iter().all(|&x| x >= 2), "checkpoints must be at least 2")?;
        }
    }
    if let Some(r) = &p.radii {
        check(r.iter().all(|x| x.is_finite() && *x >= 0.0), "radii must be finite and nonnegative")?;
    }
    if let Some(k) = &p.k {
        check(!k.is_empty() && k.iter().all(|&x| x >= 1), "every k must be at least 1")?;
    }
    if let Some(s) = &p.s {
        let (lo, hi) = match cfg.command {
            CommandName::ScatteringScan => (0.5, 1.0),
            _ => (0.5, 1.0 + 1e-15),
        };
        check(!s.is_empty() && s.iter().all(|&x| x > lo && x < hi), "every s must lie in (1/2, 1] ((1/2, 1) for scattering-scan)")?;
    }
    if let Some(r) = p.r_max {
        check(r > 0.0 && r <= 100.0, "r_max must lie in (0, 100]")?;
        check(p.r_step.is_some_and(|x| x > 0.0 && x <= r), "r_step must lie in (0, r_max]")?;
    }
    if let Some(n) = p.points {
        check(n >= 1, "points must be at least 1")?;
    }
    let mc_min = match cfg.command {
        CommandName::ThetaNorm | CommandName::Siegel | CommandName::DkMeasure | CommandName::YdkMeasure => 1000,
        _ => 0,
    };
    if let Some(n) = p.samples {
        check(n >= mc_min, "samples must be at least 1000 for Monte Carlo commands")?;
    }
    match cfg.command {
        CommandName::Loglaw | CommandName::Shrink => {
            check(!cfg.lattice.is_congruence(), "orbit commands support sl2z and zi")?;
        }
        CommandName::DkMeasure | CommandName::YdkMeasure => {
            check(!cfg.lattice.is_congruence(), "D_k commands support sl2z and zi")?;
        }
        CommandName::ThetaNorm => {
            if cfg.lattice == LatticeName::Zi {
                check(p.method == Some(Method::Direct), "the spectral path needs sl2z; use --method direct on zi")?;
            }
            if cfg.lattice.is_congruence() {
                check(p.method == Some(Method::Direct), "the subgroup comparison is a direct computation; use --method direct")?;
            }
        }
        CommandName::ScatteringScan | CommandName::Siegel | CommandName::PmTable | CommandName::IdentityCheck => {
            check(!cfg.lattice.is_congruence(), "this command supports sl2z and zi")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(v: Value) -> Params {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn lattice_names_round_trip() {
        for s in ["sl2z", "zi", "gamma0-2", "gamma0-6"] {
            let l: LatticeName = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        assert!("gamma0-1".parse::<LatticeName>().is_err());
        assert!("sl3z".parse::<LatticeName>().is_err());
    }

    #[test]
    fn flags_override_file_and_defaults() {
        let file = flags(json!({ "command": "theta-norm", "samples": 5000, "eps": 0.3, "seed": 4 }));
        let cli = flags(json!({ "samples": 7000 }));
        let cfg = resolve(CommandName::ThetaNorm, Some(file), cli, None).unwrap();
        assert_eq!(cfg.params.samples, Some(7000));
        assert_eq!(cfg.params.eps, Some(0.3));
        assert_eq!(cfg.params.lambda, Some(vec![4.0]));
        assert_eq!(cfg.seed, 4);
        assert!(cfg.params.horizon.is_none());
    }

    #[test]
    fn seed_is_mandatory_with_env_fallback() {
        let e = resolve(CommandName::Siegel, None, Params::default(), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let cfg = resolve(CommandName::Siegel, None, Params::default(), Some("11".into())).unwrap();
        assert_eq!(cfg.seed, 11);
        let cli = flags(json!({ "seed": 3 }));
        assert_eq!(resolve(CommandName::Siegel, None, cli, Some("11".into())).unwrap().seed, 3);
    }

    #[test]
    fn foreign_fields_are_rejected() {
        let cli = flags(json!({ "seed": 1, "horizon": 100.0 }));
        let e = resolve(CommandName::Siegel, None, cli, None).unwrap_err();
        assert!(e.to_string().contains("horizon"));
    }

    #[test]
    fn zero_eps_names_the_schedule() {
        let cli = flags(json!({ "seed": 1, "eps": 0.0 }));
        let e = resolve(CommandName::Shrink, None, cli, None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("TargetSchedule"), "{e}");
    }

    #[test]
    fn loglaw_window_defaults_to_root_horizon() {
        let cli = flags(json!({ "seed": 1, "horizon": 1e4 }));
        let cfg = resolve(CommandName::Loglaw, None, cli, None).unwrap();
        assert_eq!(cfg.params.ratio_start, Some(100.0));
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let file = flags(json!({ "command": "loglaw", "seed": 1 }));
        assert!(resolve(CommandName::Siegel, Some(file), Params::default(), None).is_err());
    }
}
