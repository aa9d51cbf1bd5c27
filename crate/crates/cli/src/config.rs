//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! ```text
//! # comments run to the end of the line
//! d = 2
//! mode = scaled(2)
//! levels = 8
//! s0 = 1/100
//! panel = T 0 1/0; T 1 1/0; T 2 1/0
//! times = 0:10:0.5
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use rug::Rational;
use teichlab::contfrac::{default_s0, DenseSequence, FamilySpec, GrowthMode};
use teichlab::numeric::{parse_decimal_rational, Interval, Precision};
use teichlab::surface::Curve;
use teichlab::{Error, Result};

/// Environment variable that replaces the configured output directory.
pub const OUT_DIR_ENV: &str = "TEICHLAB_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum USource {
    Default,
    File(PathBuf),
}

/// Sample times for `trace`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeGrid {
    /// `start:stop:step`, stop included when hit exactly.
    Range {
        start: Rational,
        stop: Rational,
        step: Rational,
    },
    List(Vec<Rational>),
}

impl TimeGrid {
    pub fn points(&self) -> Vec<Rational> {
        match self {
            TimeGrid::List(v) => v.clone(),
            TimeGrid::Range { start, stop, step } => {
                let mut out = Vec::new();
                let mut t = start.clone();
                while t <= *stop {
                    out.push(t.clone());
                    t += step;
                }
                out
            }
        }
    }

    pub fn intervals(&self, prec: Precision) -> Vec<Interval> {
        self.points().iter().map(|t| Interval::from_rational(prec, t)).collect()
    }
}

impl fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeGrid::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
            TimeGrid::List(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

fn decimal(key: &str, s: &str) -> Result<Rational> {
    parse_decimal_rational(s.trim()).ok_or_else(|| Error::Config(format!("{key}: `{s}` is not a decimal or fraction")))
}

fn parse_times(s: &str) -> Result<TimeGrid> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let step = decimal("times", step)?;
            if step <= 0 {
                return Err(Error::Config("times: step must be positive".into()));
            }
            Ok(TimeGrid::Range {
                start: decimal("times", start)?,
                stop: decimal("times", stop)?,
                step,
            })
        }
        [list] => Ok(TimeGrid::List(
            list.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| decimal("times", x))
                .collect::<Result<_>>()?,
        )),
        _ => Err(Error::Config(format!(
            "times: expected start:stop:step or a list, got `{s}`"
        ))),
    }
}

fn parse_curves(s: &str) -> Result<Vec<Curve>> {
    s.split(';').filter(|x| !x.trim().is_empty()).map(str::parse).collect()
}

fn parse_optional_curve(s: &str) -> Result<Option<Curve>> {
    match s.trim() {
        "none" => Ok(None),
        lit => lit.parse().map(Some),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("levels_probed: expected a..b, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d: usize,
    pub s0: Rational,
    pub mode: GrowthMode,
    pub levels: usize,
    pub u_seq: USource,
    /// Curve-list file for `trace`; the panel is traced when unset.
    pub curves: Option<PathBuf>,
    /// `(1,0)` on every torus when unset.
    pub panel: Option<Vec<Curve>>,
    pub gamma1: Option<Curve>,
    pub gamma2: Option<Curve>,
    /// `G 0 3/1` when unset; `none` turns the decay report off.
    pub bridge: Option<Option<Curve>>,
    pub times: TimeGrid,
    /// Levels for `limit-report`; every feasible level when unset.
    pub levels_probed: Option<(usize, usize)>,
    pub out_dir: PathBuf,
    /// Working precision in decimal digits.
    pub digits: u32,
    /// Significant digits of printed midpoints.
    pub print_digits: usize,
    pub budget_bits: u64,
    pub ratio_tol: f64,
    pub collar_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 2,
            s0: default_s0(),
            mode: GrowthMode::default(),
            levels: 8,
            u_seq: USource::Default,
            curves: None,
            panel: None,
            gamma1: None,
            gamma2: None,
            bridge: None,
            times: TimeGrid::Range {
                start: Rational::from(0),
                stop: Rational::from(10),
                step: Rational::from(1),
            },
            levels_probed: None,
            out_dir: PathBuf::from("out"),
            digits: 120,
            print_digits: 20,
            budget_bits: 1 << 20,
            ratio_tol: 0.2,
            collar_tol: 0.1,
        }
    }
}

pub const KEYS: &[&str] = &[
    "d",
    "s0",
    "mode",
    "levels",
    "u_seq",
    "curves",
    "panel",
    "gamma1",
    "gamma2",
    "bridge",
    "times",
    "levels_probed",
    "out_dir",
    "digits",
    "print_digits",
    "budget_bits",
    "ratio_tol",
    "collar_tol",
];

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a valid number")))
}

impl RunConfig {
    /// Sets one key. Relative paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "d" => self.d = number(key, value)?,
            "s0" => self.s0 = decimal(key, value)?,
            "mode" => self.mode = value.parse()?,
            "levels" => self.levels = number(key, value)?,
            "u_seq" => {
                self.u_seq = match value {
                    "default" => USource::Default,
                    path => USource::File(PathBuf::from(path)),
                }
            }
            "curves" => self.curves = Some(PathBuf::from(value)),
            "panel" => self.panel = Some(parse_curves(value)?),
            "gamma1" => self.gamma1 = Some(value.parse()?),
            "gamma2" => self.gamma2 = Some(value.parse()?),
            "bridge" => self.bridge = Some(parse_optional_curve(value)?),
            "times" => self.times = parse_times(value)?,
            "levels_probed" => self.levels_probed = Some(parse_range(value)?),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "digits" => self.digits = number(key, value)?,
            "print_digits" => self.print_digits = number(key, value)?,
            "budget_bits" => self.budget_bits = number(key, value)?,
            "ratio_tol" => self.ratio_tol = number(key, value)?,
            "collar_tol" => self.collar_tol = number(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}`; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key = value` text, reporting the offending line on error.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            self.set(key, value).map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    /// Applies one `key=value` override as given on the command line.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{kv}` is not key=value")))?;
        self.set(key, value)
    }

    /// Defaults, then the file, then the output-directory variable, then overrides.
    pub fn load(file: Option<&Path>, out_dir_env: Option<String>, overrides: &[String]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            cfg.apply_text(&std::fs::read_to_string(path)?)?;
        }
        if let Some(dir) = out_dir_env.filter(|d| !d.is_empty()) {
            cfg.out_dir = PathBuf::from(dir);
        }
        for kv in overrides {
            cfg.apply_override(kv)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let half = Rational::from((1, 2));
        if self.s0 <= 0 || self.s0 >= half {
            return Err(Error::Config(format!("s0 = {} must lie in (0, 1/2)", self.s0)));
        }
        if self.digits == 0 || self.print_digits == 0 || self.budget_bits == 0 {
            return Err(Error::Config(
                "digits, print_digits and budget_bits must be positive".into(),
            ));
        }
        if !(self.ratio_tol > 0.0 && self.collar_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let TimeGrid::Range { step, .. } = &self.times {
            if *step <= 0 {
                return Err(Error::Config("times: step must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn precision(&self) -> Precision {
        Precision::from_digits(self.digits)
    }

    pub fn family_spec(&self) -> FamilySpec {
        FamilySpec {
            budget_bits: self.budget_bits,
            ..FamilySpec::new(self.d, self.levels, self.mode)
        }
    }

    pub fn dense_sequence(&self) -> Result<DenseSequence> {
        match &self.u_seq {
            USource::Default => Ok(DenseSequence::default_for(self.d, self.levels)),
            USource::File(path) => {
                Ok(DenseSequence::parse(self.d, &std::fs::read_to_string(path)?)?.truncated(self.levels))
            }
        }
    }

    /// Family file location inside the output directory.
    pub fn family_path(&self) -> PathBuf {
        self.out_dir.join("family.txt")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_then_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("d = 1 # one slit\n\nmode=strict\nlevels= 2\ns0 = 0.05\npanel = T 0 1/0; T 1 0/1\n")
            .unwrap();
        cfg.apply_override("levels=1").unwrap();
        assert_eq!(cfg.d, 1);
        assert_eq!(cfg.mode, GrowthMode::Strict);
        assert_eq!(cfg.levels, 1);
        assert_eq!(cfg.s0, Rational::from((1, 20)));
        assert_eq!(cfg.panel.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("d = 2\nwhat = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = cfg.apply_text("d = 2\n\npanel = T 0 1/0; X 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn validation() {
        for bad in ["s0=1/2", "s0=0", "digits=0", "times=0:1:0"] {
            assert!(RunConfig::load(None, None, &[bad.to_string()]).is_err(), "{bad}");
        }
    }

    #[test]
    fn environment_sits_between_file_and_overrides() {
        let cfg = RunConfig::load(None, Some("from-env".into()), &[]).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("from-env"));
        let cfg = RunConfig::load(None, Some("from-env".into()), &["out_dir=flag".into()]).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("flag"));
    }

    #[test]
    fn time_grids() {
        let g = parse_times("0:1:0.25").unwrap();
        assert_eq!(g.points().len(), 5);
        assert_eq!(g.to_string(), "0:1:1/4");
        let g = parse_times("1.5, 2,3").unwrap();
        assert_eq!(
            g.points(),
            vec![Rational::from((3, 2)), Rational::from(2), Rational::from(3)]
        );
        assert!(parse_times("1:2").is_err());
    }

    #[test]
    fn bridge_can_be_switched_off() {
        let mut cfg = RunConfig::default();
        cfg.set("bridge", "none").unwrap();
        assert_eq!(cfg.bridge, Some(None));
        cfg.set("bridge", "G 1 2/1").unwrap();
        assert_eq!(cfg.bridge, Some(Some(Curve::bridge(1, 2, 1).unwrap())));
    }
}
