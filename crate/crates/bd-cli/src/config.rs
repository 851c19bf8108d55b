//! Run configuration: defaults, config-file parsing, and flag precedence.
//!
//! Every numeric parameter is parsed into an exact rational first ("0.97" and
//! "97/100" are both accepted); the arithmetic mode then decides whether the
//! computation runs on `f64` or on `BigRational`.

use std::fmt;
use std::path::PathBuf;

use bd_core::stages::DEFAULT_DIM_CAP;
use bd_core::{Convention, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::cli::CommonArgs;
use crate::CliError;

/// Arithmetic the commands run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Float,
    Exact,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "float" => Ok(Mode::Float),
            "exact" => Ok(Mode::Exact),
            other => Err(format!("mode must be \"float\" or \"exact\", got \"{other}\"")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("format must be \"json\" or \"csv\", got \"{other}\"")),
        }
    }
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    match s {
        "inclusive" => Ok(Convention::Inclusive),
        "paper-strict" => Ok(Convention::PaperStrict),
        other => Err(format!(
            "convention must be \"inclusive\" or \"paper-strict\", got \"{other}\""
        )),
    }
}

/// Parses a number written either as a fraction `p/q` or as a decimal string
/// (optional sign, optional fractional part, optional `e`/`E` exponent) into
/// an exact rational. Never rounds.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err(String::from("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator \"{}\"", num.trim()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator \"{}\"", den.trim()))?;
        if d.is_zero() {
            return Err(String::from("denominator is zero"));
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| format!("bad exponent \"{}\"", &s[pos + 1..]))?;
            if e.abs() > 10_000 {
                return Err(format!("exponent {e} out of range"));
            }
            (&s[..pos], e)
        }
        None => (s, 0),
    };

    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("\"{s}\" has no digits"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(format!("\"{s}\" is not a decimal number or p/q fraction"));
    }

    let mut numer: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .unwrap_or_else(|_| BigInt::zero());
    if negative {
        numer = -numer;
    }
    let ten = BigInt::from(10);
    let mut denom = ten.pow(frac_part.len() as u32);
    if exp >= 0 {
        numer *= ten.pow(exp as u32);
    } else {
        denom *= ten.pow(exp.unsigned_abs());
    }
    Ok(BigRational::new(numer, denom))
}

/// A computation scalar that can be seeded from the parsed configuration.
pub trait ConfigScalar: Scalar {
    fn from_big_rational(r: &BigRational) -> Self;
}

impl ConfigScalar for f64 {
    fn from_big_rational(r: &BigRational) -> f64 {
        Scalar::to_f64(r)
    }
}

impl ConfigScalar for BigRational {
    fn from_big_rational(r: &BigRational) -> BigRational {
        r.clone()
    }
}

/// Option values as read from a config file (or carried by flags), before
/// validation. `None` means "not given here".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawOptions {
    pub a: Option<String>,
    pub b: Option<String>,
    pub lambda: Option<String>,
    pub convention: Option<String>,
    pub mode: Option<String>,
    pub stages: Option<String>,
    pub seed: Option<String>,
    pub format: Option<String>,
    pub out: Option<String>,
}

/// Parses the flat `key=value` config-file format. Blank lines and lines
/// starting with `#` are skipped; unknown keys are errors; a repeated key
/// keeps its last value.
pub fn parse_config_text(text: &str) -> Result<RawOptions, String> {
    let mut opts = RawOptions::default();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got \"{line}\"", lineno + 1))?;
        let key = key.trim();
        let value = value.trim().to_string();
        let slot = match key {
            "a" => &mut opts.a,
            "b" => &mut opts.b,
            "lambda" => &mut opts.lambda,
            "convention" => &mut opts.convention,
            "mode" => &mut opts.mode,
            "stages" => &mut opts.stages,
            "seed" => &mut opts.seed,
            "format" => &mut opts.format,
            "out" => &mut opts.out,
            other => return Err(format!("line {}: unknown config key \"{other}\"", lineno + 1)),
        };
        *slot = Some(value);
    }
    Ok(opts)
}

/// Fully resolved run configuration (flags > config file > defaults).
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub a: BigRational,
    pub b: BigRational,
    pub lambda: BigRational,
    pub convention: Convention,
    pub mode: Mode,
    pub stages: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Dimension cap for stage building (flag-only; not a config-file key).
    pub cap: u64,
}

impl RunConfig {
    pub fn demo_defaults() -> RunConfig {
        RunConfig {
            a: BigRational::new(BigInt::from(97), BigInt::from(100)),
            b: BigRational::new(BigInt::from(443_648), BigInt::from(1_000_000)),
            lambda: BigRational::new(BigInt::from(861), BigInt::from(100)),
            convention: Convention::Inclusive,
            mode: Mode::Float,
            stages: 5,
            seed: 0,
            format: OutputFormat::Json,
            out: None,
            cap: DEFAULT_DIM_CAP,
        }
    }

    /// Applies precedence and validates every field.
    pub fn resolve(common: &CommonArgs) -> Result<RunConfig, CliError> {
        let file_opts = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
                })?;
                parse_config_text(&text).map_err(|e| {
                    CliError::Usage(format!("config file {}: {e}", path.display()))
                })?
            }
            None => RawOptions::default(),
        };

        let pick = |flag: &Option<String>, file: &Option<String>| -> Option<String> {
            flag.clone().or_else(|| file.clone())
        };

        let defaults = RunConfig::demo_defaults();
        let field = |name: &str, err: String| CliError::Usage(format!("{name}: {err}"));

        let a = match pick(&common.a, &file_opts.a) {
            Some(s) => parse_rational(&s).map_err(|e| field("--a", e))?,
            None => defaults.a,
        };
        let b = match pick(&common.b, &file_opts.b) {
            Some(s) => parse_rational(&s).map_err(|e| field("--b", e))?,
            None => defaults.b,
        };
        let lambda = match pick(&common.lambda, &file_opts.lambda) {
            Some(s) => parse_rational(&s).map_err(|e| field("--lambda", e))?,
            None => defaults.lambda,
        };
        let convention = match pick(&common.convention, &file_opts.convention) {
            Some(s) => parse_convention(&s).map_err(|e| field("--convention", e))?,
            None => defaults.convention,
        };
        let mode = match pick(&common.mode, &file_opts.mode) {
            Some(s) => Mode::parse(&s).map_err(|e| field("--mode", e))?,
            None => defaults.mode,
        };
        let stages = match pick(&common.stages, &file_opts.stages) {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| field("--stages", format!("expected a positive integer, got \"{s}\"")))?,
            None => defaults.stages,
        };
        if stages == 0 {
            return Err(CliError::Usage(String::from("--stages: must be at least 1")));
        }
        let seed = match pick(&common.seed, &file_opts.seed) {
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| field("--seed", format!("expected an unsigned integer, got \"{s}\"")))?,
            None => defaults.seed,
        };
        let format = match pick(&common.format, &file_opts.format) {
            Some(s) => OutputFormat::parse(&s).map_err(|e| field("--format", e))?,
            None => defaults.format,
        };
        let out = match pick(
            &common.out.as_ref().map(|p| p.display().to_string()),
            &file_opts.out,
        ) {
            Some(s) => Some(PathBuf::from(s)),
            None => None,
        };
        let cap = common.cap.unwrap_or(DEFAULT_DIM_CAP);
        if cap == 0 {
            return Err(CliError::Usage(String::from("--cap: must be at least 1")));
        }

        Ok(RunConfig {
            a,
            b,
            lambda,
            convention,
            mode,
            stages,
            seed,
            format,
            out,
            cap,
        })
    }

    pub fn scalar<S: ConfigScalar>(&self, which: WhichParam) -> S {
        match which {
            WhichParam::A => S::from_big_rational(&self.a),
            WhichParam::B => S::from_big_rational(&self.b),
            WhichParam::Lambda => S::from_big_rational(&self.lambda),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum WhichParam {
    A,
    B,
    Lambda,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
