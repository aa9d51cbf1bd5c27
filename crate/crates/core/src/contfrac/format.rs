//! Line-oriented family files.
//!
//! ```text
//! d=2
//! mode=scaled(2)
//! s0=1/100
//! status=complete
//! u 1 1 1 1
//! audit 1 m=2 bound=u2 lcm=3 c=4 M=12 odd=0
//! 0 1 1
//! 0 2 2
//! 0 3 4
//! ```
//!
//! Coefficient records are `i k a`: torus, coefficient index, decimal value.
//! `u k ...` lines carry the target tuples and `audit` lines the generation
//! trail, so parsing a written file gives back the same family. `#` starts a
//! comment. A family cut short by the bit budget is written with
//! `status=partial(L)` where `L` is the level that did not fit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rug::{Integer, Rational};

use super::{ActiveBound, CFExpansion, DenseSequence, GrowthMode, LevelAudit, SlopeFamily};
use crate::error::{Error, Result};
use crate::numeric::parse_decimal_rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyStatus {
    Complete,
    /// Generation stopped at this level.
    Partial(usize),
}

/// A family together with the surface header it is stored with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyFile {
    pub s0: Rational,
    pub status: FamilyStatus,
    pub family: SlopeFamily,
}

pub fn default_s0() -> Rational {
    Rational::from((1, 100))
}

pub fn write_family(file: &FamilyFile) -> String {
    let fam = &file.family;
    let mut out = String::new();
    let _ = writeln!(out, "d={}", fam.d());
    let _ = writeln!(out, "mode={}", fam.mode());
    let _ = writeln!(out, "s0={}", file.s0);
    match file.status {
        FamilyStatus::Complete => out.push_str("status=complete\n"),
        FamilyStatus::Partial(level) => {
            let _ = writeln!(out, "status=partial({level})");
        }
    }
    for (k, u) in fam.u_seq().tuples().iter().enumerate() {
        let entries: Vec<String> = u.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "u {} {}", k + 1, entries.join(" "));
    }
    for a in fam.audit() {
        let _ = writeln!(
            out,
            "audit {} m={} bound={} lcm={} c={} M={} odd={}",
            a.level, a.multiplier, a.even_bound, a.lcm, a.scale, a.common, a.odd_torus
        );
    }
    for (i, cf) in fam.expansions().iter().enumerate() {
        for (k, a) in cf.coeffs().iter().enumerate() {
            let _ = writeln!(out, "{i} {} {a}", k + 1);
        }
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_audit(line: usize, rest: &str) -> Result<LevelAudit> {
    let mut tokens = rest.split_whitespace();
    let level = tokens
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(line, "audit record without level"))?;
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr(line, format!("bad audit field `{tok}`")))?;
        fields.insert(k, v);
    }
    let int = |key: &str| -> Result<Integer> {
        fields
            .get(key)
            .and_then(|v| v.parse::<Integer>().ok())
            .ok_or_else(|| perr(line, format!("audit field `{key}` missing or not an integer")))
    };
    let bound = fields
        .get("bound")
        .ok_or_else(|| perr(line, "audit field `bound` missing"))?
        .parse::<ActiveBound>()
        .map_err(|e| perr(line, e.to_string()))?;
    let odd_torus = fields
        .get("odd")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(line, "audit field `odd` missing"))?;
    Ok(LevelAudit {
        level,
        multiplier: int("m")?,
        even_bound: bound,
        lcm: int("lcm")?,
        scale: int("c")?,
        common: int("M")?,
        odd_torus,
    })
}

pub fn parse_family(text: &str) -> Result<FamilyFile> {
    let mut d: Option<usize> = None;
    let mut mode: Option<GrowthMode> = None;
    let mut s0 = default_s0();
    let mut status = FamilyStatus::Complete;
    let mut tuples: Vec<Vec<u64>> = Vec::new();
    let mut audit = Vec::new();
    let mut coeffs: BTreeMap<usize, BTreeMap<usize, Integer>> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=').filter(|(k, _)| !k.contains(' ')) {
            let value = value.trim();
            match key.trim() {
                "d" => d = Some(value.parse().map_err(|_| perr(line_no, format!("bad d `{value}`")))?),
                "mode" => mode = Some(value.parse().map_err(|e: Error| perr(line_no, e.to_string()))?),
                "s0" => {
                    s0 = parse_decimal_rational(value).ok_or_else(|| perr(line_no, format!("bad s0 `{value}`")))?;
                }
                "status" => {
                    status = if value == "complete" {
                        FamilyStatus::Complete
                    } else {
                        let level = value
                            .strip_prefix("partial(")
                            .and_then(|r| r.strip_suffix(')'))
                            .and_then(|l| l.parse().ok())
                            .ok_or_else(|| perr(line_no, format!("bad status `{value}`")))?;
                        FamilyStatus::Partial(level)
                    };
                }
                other => return Err(perr(line_no, format!("unknown header `{other}`"))),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("audit ") {
            audit.push(parse_audit(line_no, rest)?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("u ") {
            let nums: Vec<u64> = rest
                .split_whitespace()
                .map(|s| s.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(line_no, "bad target tuple"))?;
            let (&k, entries) = nums.split_first().ok_or_else(|| perr(line_no, "empty target tuple"))?;
            if k as usize != tuples.len() + 1 {
                return Err(perr(line_no, format!("target tuple {k} out of order")));
            }
            tuples.push(entries.to_vec());
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(perr(line_no, format!("expected `i k a`, got `{line}`")));
        }
        let i: usize = fields[0].parse().map_err(|_| perr(line_no, "bad torus index"))?;
        let k: usize = fields[1].parse().map_err(|_| perr(line_no, "bad coefficient index"))?;
        let a: Integer = fields[2].parse().map_err(|_| perr(line_no, "bad coefficient"))?;
        if k == 0 {
            return Err(perr(line_no, "coefficient indices start at 1"));
        }
        if coeffs.entry(i).or_default().insert(k, a).is_some() {
            return Err(perr(line_no, format!("duplicate coefficient {i} {k}")));
        }
    }

    let d = d.ok_or_else(|| perr(0, "missing `d=` header"))?;
    let mode = mode.ok_or_else(|| perr(0, "missing `mode=` header"))?;
    let mut expansions = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let list = coeffs.remove(&i).unwrap_or_default();
        if list.keys().copied().ne(1..=list.len()) {
            return Err(perr(0, format!("torus {i}: coefficient indices are not 1..N")));
        }
        let cf = CFExpansion::with_convergents(list.into_values().collect())?;
        expansions.push(cf);
    }
    if let Some(extra) = coeffs.keys().next() {
        return Err(perr(0, format!("torus index {extra} exceeds d = {d}")));
    }
    let u_seq = DenseSequence::custom(d, tuples).map_err(|e| perr(0, e.to_string()))?;
    let family = SlopeFamily::from_parts(d, mode, u_seq, expansions, audit)?;
    Ok(FamilyFile { s0, status, family })
}
