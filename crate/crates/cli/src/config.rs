//! INI-style run configuration: sections `[model]`, `[vol]`, `[run]`.
//!
//! Syntax problems (bad lines, unknown keys) and value problems (missing
//! keys, broken constraints) are reported separately so the two map to
//! different exit codes. Constraints owned by the model library surface as
//! [`ConfigError::Model`] with the library's own diagnostic.

use crate::output::OutputFormat;
use sddequant::{ModelParams, TimeGrid, VolatilityFunction};
use std::collections::BTreeMap;
use std::fmt;

pub const GRAMMAR: &str = "\
run configuration (INI style)
  one `key = value` pair per line; `#` starts a comment; REAL accepts
  decimals and exact fractions (a = 1/3)

[model]
  mu    REAL         drift coefficient applied to the a-lagged price
  a     REAL > 0     drift delay
  b     REAL > 0     volatility delay
  r     REAL >= 0    risk-free rate
  K     REAL > 0     strike
  T     REAL > 0     maturity, an integer multiple of the grid step
  phi0  REAL > 0     level of the constant initial history (--history replaces it)

[vol]
  form = constant | affine_clipped | table
  constant        sigma0 REAL > 0
  affine_clipped  c0 REAL, c1 REAL, sigma_min REAL > 0, sigma_max REAL >= sigma_min
                  (volatility = clip(c0 + c1 * lagged price))
  table           points = \"S:sigma S:sigma ...\", S strictly increasing, sigma > 0
                  (piecewise-linear, clamped outside the table)

[run]
  steps_per_l  INT >= 1    grid steps per shortest delay, h = min(a,b)/steps_per_l
  n_paths      INT >= 1    Monte Carlo paths                               default 10000
  seed         U64         base seed; paths are seed-keyed by index        default 0
  t0           REAL        valuation time in [0, T], grid-commensurable    default 0
  antithetic   BOOL        average each path with its sign-flipped twin    default false
  format       csv | json  price and validate artifact format             default json
";

#[derive(Debug)]
pub enum ConfigError {
    /// Text that does not fit the grammar; names the 1-based line.
    Syntax { line: usize, message: String },
    /// Well-formed text whose values break a documented constraint.
    Invalid { message: String },
    /// A constraint enforced by the model library.
    Model(sddequant::Error),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, message } => write!(f, "config line {line}: {message}"),
            ConfigError::Invalid { message } => write!(f, "config: {message}"),
            ConfigError::Model(e) => write!(f, "config: {e}"),
        }
    }
}

impl From<sddequant::Error> for ConfigError {
    fn from(e: sddequant::Error) -> Self {
        ConfigError::Model(e)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub n_paths: Option<u64>,
    pub seed: Option<u64>,
    pub t0: Option<f64>,
    pub antithetic: bool,
    pub format: Option<OutputFormat>,
}

/// A fully validated run: every numeric constraint of the contained model
/// types holds, and the grid already proved the delays commensurable.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub g: VolatilityFunction,
    pub grid: TimeGrid,
    pub phi0: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub t0_index: i64,
    pub antithetic: bool,
    pub format: OutputFormat,
}

pub fn parse_config(text: &str, over: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut pairs = split_pairs(text)?;

    let mu = req_real(&mut pairs, "model", "mu")?;
    let a = req_real(&mut pairs, "model", "a")?;
    let b = req_real(&mut pairs, "model", "b")?;
    let r = req_real(&mut pairs, "model", "r")?;
    let strike = req_real(&mut pairs, "model", "K")?;
    let maturity = req_real(&mut pairs, "model", "T")?;
    let phi0 = req_real(&mut pairs, "model", "phi0")?;
    if !(phi0 > 0.0) {
        return Err(invalid(format!("phi0 = {phi0} violates phi0 > 0")));
    }

    let g = parse_vol(&mut pairs)?;

    let steps_per_l = req_int(&mut pairs, "run", "steps_per_l")?;
    if steps_per_l == 0 {
        return Err(invalid("steps_per_l = 0 violates steps_per_l >= 1".into()));
    }
    // File keys are consumed even when a flag overrides them, so an override
    // never turns a legal key into an "unknown key" leftover.
    let n_paths = over
        .n_paths
        .or(opt_int(&mut pairs, "run", "n_paths")?)
        .unwrap_or(10_000);
    if n_paths == 0 {
        return Err(invalid("n_paths = 0 violates n_paths >= 1".into()));
    }
    let seed = over.seed.or(opt_int(&mut pairs, "run", "seed")?).unwrap_or(0);
    let t0 = over.t0.or(opt_real(&mut pairs, "run", "t0")?).unwrap_or(0.0);
    let antithetic =
        over.antithetic || opt_bool(&mut pairs, "run", "antithetic")?.unwrap_or(false);
    let format = over
        .format
        .or(opt_format(&mut pairs, "run")?)
        .unwrap_or(OutputFormat::Json);

    reject_leftovers(&pairs)?;

    let params = ModelParams::new(mu, a, b, r, strike, maturity)?;
    let grid = TimeGrid::build(&params, steps_per_l as usize)?;
    let t0_index = grid.index_of("t0", t0)?;
    if t0_index < 0 || t0_index > grid.max_index() {
        return Err(ConfigError::Model(sddequant::Error::OutOfWindow {
            t0,
            detail: "valuation time must lie in [0, T]",
        }));
    }

    Ok(RunConfig {
        params,
        g,
        grid,
        phi0,
        n_paths,
        seed,
        t0_index,
        antithetic,
        format,
    })
}

type Pairs = BTreeMap<(String, String), (usize, String)>;

fn split_pairs(text: &str) -> Result<Pairs, ConfigError> {
    let mut pairs = Pairs::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| syntax(line, "unterminated section header"))?.trim();
            if !matches!(name, "model" | "vol" | "run") {
                return Err(syntax(line, &format!("unknown section [{name}]; expected [model], [vol], or [run]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, "expected `key = value` or a [section] header"))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(syntax(line, "empty key or value"));
        }
        let section = section
            .clone()
            .ok_or_else(|| syntax(line, "key appears before any [section] header"))?;
        if pairs
            .insert((section.clone(), key.to_string()), (line, value.to_string()))
            .is_some()
        {
            return Err(syntax(line, &format!("duplicate key `{key}` in [{section}]")));
        }
    }
    Ok(pairs)
}

fn parse_vol(pairs: &mut Pairs) -> Result<VolatilityFunction, ConfigError> {
    let (line, form) = take(pairs, "vol", "form")
        .ok_or_else(|| invalid("missing required key `form` in [vol]".into()))?;
    match form.as_str() {
        "constant" => {
            let sigma0 = req_real(pairs, "vol", "sigma0")?;
            Ok(VolatilityFunction::constant(sigma0)?)
        }
        "affine_clipped" => {
            let c0 = req_real(pairs, "vol", "c0")?;
            let c1 = req_real(pairs, "vol", "c1")?;
            let lo = req_real(pairs, "vol", "sigma_min")?;
            let hi = req_real(pairs, "vol", "sigma_max")?;
            Ok(VolatilityFunction::affine_clipped(c0, c1, lo, hi)?)
        }
        "table" => {
            let (pline, text) = take(pairs, "vol", "points")
                .ok_or_else(|| invalid("missing required key `points` in [vol]".into()))?;
            let text = text.trim_matches('"');
            let mut points = Vec::new();
            for token in text.split_whitespace() {
                let (s, sigma) = token.split_once(':').ok_or_else(|| {
                    invalid(format!("line {pline}: table point `{token}` is not `S:sigma`"))
                })?;
                points.push((real(pline, "points", s)?, real(pline, "points", sigma)?));
            }
            Ok(VolatilityFunction::table(points)?)
        }
        other => Err(invalid(format!(
            "line {line}: form must be constant, affine_clipped, or table, got `{other}`"
        ))),
    }
}

fn reject_leftovers(pairs: &Pairs) -> Result<(), ConfigError> {
    if let Some(((section, key), (line, _))) = pairs.iter().next() {
        return Err(syntax(*line, &format!("unknown key `{key}` in [{section}]")));
    }
    Ok(())
}

fn take(pairs: &mut Pairs, section: &str, key: &str) -> Option<(usize, String)> {
    pairs.remove(&(section.to_string(), key.to_string()))
}

fn req_real(pairs: &mut Pairs, section: &str, key: &str) -> Result<f64, ConfigError> {
    let (line, value) = take(pairs, section, key)
        .ok_or_else(|| invalid(format!("missing required key `{key}` in [{section}]")))?;
    real(line, key, &value)
}

fn opt_real(pairs: &mut Pairs, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
    take(pairs, section, key)
        .map(|(line, value)| real(line, key, &value))
        .transpose()
}

/// REAL literal: decimal, or an exact `p/q` fraction so values like 1/3 hit
/// the nearest double instead of a truncated decimal that the grid's 1e-9
/// commensurability snap would reject.
fn real(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let parsed = match value.split_once('/') {
        Some((num, den)) => {
            let n = plain_real(line, key, num.trim())?;
            let d = plain_real(line, key, den.trim())?;
            n / d
        }
        None => plain_real(line, key, value)?,
    };
    if !parsed.is_finite() {
        return Err(invalid(format!("line {line}: {key} = {value} is not finite")));
    }
    Ok(parsed)
}

fn plain_real(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| invalid(format!("line {line}: {key} = `{value}` is not a number")))
}

fn req_int(pairs: &mut Pairs, section: &str, key: &str) -> Result<u64, ConfigError> {
    opt_int(pairs, section, key)?
        .ok_or_else(|| invalid(format!("missing required key `{key}` in [{section}]")))
}

fn opt_int(pairs: &mut Pairs, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
    take(pairs, section, key)
        .map(|(line, value)| {
            value
                .parse::<u64>()
                .map_err(|_| invalid(format!("line {line}: {key} = `{value}` is not a nonnegative integer")))
        })
        .transpose()
}

fn opt_bool(pairs: &mut Pairs, section: &str, key: &str) -> Result<Option<bool>, ConfigError> {
    take(pairs, section, key)
        .map(|(line, value)| match value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(invalid(format!("line {line}: {key} must be true or false, got `{other}`"))),
        })
        .transpose()
}

fn opt_format(pairs: &mut Pairs, section: &str) -> Result<Option<OutputFormat>, ConfigError> {
    take(pairs, section, "format")
        .map(|(line, value)| match value.as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(invalid(format!("line {line}: format must be csv or json, got `{other}`"))),
        })
        .transpose()
}

fn syntax(line: usize, message: &str) -> ConfigError {
    ConfigError::Syntax { line, message: message.to_string() }
}

fn invalid(message: String) -> ConfigError {
    ConfigError::Invalid { message }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[model]
mu = 0.001
a = 0.25
b = 0.5
r = 0.05
K = 100
T = 1
phi0 = 100

[vol]
form = constant
sigma0 = 0.2

[run]
steps_per_l = 16
";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(MINIMAL, &Overrides::default()).unwrap();
        assert_eq!(cfg.n_paths, 10_000);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.t0_index, 0);
        assert!(!cfg.antithetic);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.grid.steps_per_min_delay, 16);
        assert!((cfg.g.eval(123.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn missing_strike_names_the_key() {
        let text = MINIMAL.replace("K = 100\n", "");
        let err = parse_config(&text, &Overrides::default()).unwrap_err();
        match err {
            ConfigError::Invalid { message } => assert!(message.contains("`K`"), "{message}"),
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = MINIMAL.replace("r = 0.05", "r 0.05");
        match parse_config(&text, &Overrides::default()).unwrap_err() {
            ConfigError::Syntax { line, .. } => assert_eq!(line, 5),
            other => panic!("expected Syntax, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}kappa = 3\n");
        match parse_config(&text, &Overrides::default()).unwrap_err() {
            ConfigError::Syntax { message, .. } => assert!(message.contains("kappa")),
            other => panic!("expected Syntax, got {other:?}"),
        }
    }

    #[test]
    fn fraction_literals_are_exact() {
        let text = MINIMAL.replace("a = 0.25", "a = 1/3").replace("b = 0.5", "b = 2/3");
        let cfg = parse_config(&text, &Overrides::default()).unwrap();
        assert_eq!(cfg.params.drift_delay, 1.0 / 3.0);
        // T = 1 over h = (1/3)/16 snaps to 48 steps.
        assert_eq!(cfg.grid.max_index(), 48);
    }

    #[test]
    fn incommensurable_maturity_is_a_model_error() {
        let text = MINIMAL.replace("T = 1", "T = 0.93");
        match parse_config(&text, &Overrides::default()).unwrap_err() {
            ConfigError::Model(sddequant::Error::IncommensurableDelays { .. }) => {}
            other => panic!("expected incommensurable, got {other:?}"),
        }
    }

    #[test]
    fn t0_snaps_to_the_grid_or_fails() {
        let mut over = Overrides::default();
        over.t0 = Some(0.5);
        let cfg = parse_config(MINIMAL, &over).unwrap();
        // h = 0.25/16, so t = 0.5 is 32 steps in.
        assert_eq!(cfg.t0_index, 32);

        over.t0 = Some(0.5 + 0.003);
        match parse_config(MINIMAL, &over).unwrap_err() {
            ConfigError::Model(sddequant::Error::IncommensurableDelays { quantity, .. }) => {
                assert_eq!(quantity, "t0");
            }
            other => panic!("expected incommensurable t0, got {other:?}"),
        }

        over.t0 = Some(1.5);
        match parse_config(MINIMAL, &over).unwrap_err() {
            ConfigError::Model(sddequant::Error::OutOfWindow { .. }) => {}
            other => panic!("expected out of window, got {other:?}"),
        }
    }

    #[test]
    fn table_form_parses_points() {
        let text = MINIMAL
            .replace("form = constant\nsigma0 = 0.2", "form = table\npoints = \"80:0.3 100:0.2 120:0.25\"");
        let cfg = parse_config(&text, &Overrides::default()).unwrap();
        assert!((cfg.g.eval(90.0) - 0.25).abs() < 1e-15);
        assert!((cfg.g.eval(200.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn overrides_beat_file_values() {
        let text = format!("{MINIMAL}n_paths = 77\nseed = 5\n");
        let over = Overrides {
            n_paths: Some(1234),
            seed: Some(42),
            t0: None,
            antithetic: true,
            format: Some(OutputFormat::Csv),
        };
        let cfg = parse_config(&text, &over).unwrap();
        assert_eq!(cfg.n_paths, 1234);
        assert_eq!(cfg.seed, 42);
        assert!(cfg.antithetic);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }
}
