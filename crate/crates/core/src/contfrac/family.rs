//! The inductive generator of the coupled slopes `θ^0, ..., θ^d`.
//!
//! Every expansion starts with `a_1 = 1`. Level `k` appends two coefficients
//! to each expansion:
//!
//! * `a_{2k}^i = m_k u_k^i` with the smallest multiplier `m_k` that makes
//!   `a_{2k}^i > k max{a_{2k-1}^i, u_k^0, ..., u_k^d}` for every `i`;
//! * `a_{2k+1}^i = M_k / q_{2k}^i` with `M_k = lcm(q_{2k}^0, ..., q_{2k}^d) c_k`
//!   and the smallest `c_k` satisfying the growth condition of the mode.
//!
//! Since every `a_{2k+1}^i q_{2k}^i` equals `M_k`, the odd denominators
//! `q_{2k+1}^i = M_k + q_{2k-1}^i` agree across tori once they agree at the
//! previous level, which they do at `q_1 = 1`.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::Integer;

use super::{CFExpansion, DenseSequence};
use crate::error::{Error, Result};
use crate::numeric::{exp_ceiling, Interval, Precision};

/// Default cap on the bit length of any generated integer.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

/// Growth condition imposed on the odd coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthMode {
    /// `a_{2k+1} > exp(k a_{2k})`, certified against a rounded-up exponential.
    Strict,
    /// `a_{2k+1} > (k a_{2k})^power + a_{2k}`.
    Scaled { power: u32 },
}

impl Default for GrowthMode {
    fn default() -> Self {
        GrowthMode::Scaled { power: 2 }
    }
}

impl GrowthMode {
    pub fn is_strict(self) -> bool {
        matches!(self, GrowthMode::Strict)
    }

    /// `g(k, a)` in scaled mode.
    pub fn scaled_bound(power: u32, k: usize, a: &Integer) -> Integer {
        let ka = Integer::from(a * k as u64);
        ka.pow(power) + a
    }
}

impl fmt::Display for GrowthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthMode::Strict => f.write_str("strict"),
            GrowthMode::Scaled { power } => write!(f, "scaled({power})"),
        }
    }
}

impl FromStr for GrowthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "strict" {
            return Ok(GrowthMode::Strict);
        }
        if s == "scaled" {
            return Ok(GrowthMode::default());
        }
        let power = s
            .strip_prefix("scaled(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|p| p.trim().parse::<u32>().ok())
            .filter(|&p| p >= 1)
            .ok_or_else(|| Error::Config(format!("unknown growth mode `{s}`")))?;
        Ok(GrowthMode::Scaled { power })
    }
}

/// Which term fixed the multiplier of condition (i).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveBound {
    /// The previous odd coefficient of torus `i`.
    Coefficient(usize),
    /// The target entry `u_k^i`.
    Target(usize),
}

impl fmt::Display for ActiveBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActiveBound::Coefficient(i) => write!(f, "a{i}"),
            ActiveBound::Target(i) => write!(f, "u{i}"),
        }
    }
}

impl FromStr for ActiveBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad active-bound tag `{s}`"));
        if let Some(i) = s.strip_prefix('a') {
            return Ok(ActiveBound::Coefficient(i.parse().map_err(|_| bad())?));
        }
        if let Some(i) = s.strip_prefix('u') {
            return Ok(ActiveBound::Target(i.parse().map_err(|_| bad())?));
        }
        Err(bad())
    }
}

/// Generation record of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelAudit {
    pub level: usize,
    /// `m_k` with `a_{2k}^i = m_k u_k^i`.
    pub multiplier: Integer,
    pub even_bound: ActiveBound,
    /// `lcm(q_{2k}^0, ..., q_{2k}^d)`.
    pub lcm: Integer,
    /// `c_k`.
    pub scale: Integer,
    /// `M_k = lcm c_k`, the common value of `a_{2k+1}^i q_{2k}^i`.
    pub common: Integer,
    /// Torus whose growth condition fixed `c_k`.
    pub odd_torus: usize,
}

/// Generation parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub d: usize,
    pub levels: usize,
    pub mode: GrowthMode,
    pub budget_bits: u64,
}

impl FamilySpec {
    pub fn new(d: usize, levels: usize, mode: GrowthMode) -> Self {
        FamilySpec {
            d,
            levels,
            mode,
            budget_bits: DEFAULT_BIT_BUDGET,
        }
    }
}

/// The `d + 1` coupled expansions together with their targets and audit trail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeFamily {
    d: usize,
    mode: GrowthMode,
    u_seq: DenseSequence,
    expansions: Vec<CFExpansion>,
    audit: Vec<LevelAudit>,
}

impl SlopeFamily {
    /// Assembles a family without checking any generation condition.
    ///
    /// Used by the file parser, so that a hand-edited family can still be
    /// loaded and fail verification.
    pub fn from_parts(
        d: usize,
        mode: GrowthMode,
        u_seq: DenseSequence,
        expansions: Vec<CFExpansion>,
        audit: Vec<LevelAudit>,
    ) -> Result<Self> {
        if expansions.len() != d + 1 {
            return Err(Error::Config(format!("{} expansions for d = {d}", expansions.len())));
        }
        if u_seq.d() != d {
            return Err(Error::Config("dense sequence has the wrong width".into()));
        }
        Ok(SlopeFamily {
            d,
            mode,
            u_seq,
            expansions,
            audit,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn tori(&self) -> usize {
        self.d + 1
    }

    pub fn mode(&self) -> GrowthMode {
        self.mode
    }

    /// Number of completed levels `K`.
    pub fn levels(&self) -> usize {
        self.audit.len()
    }

    pub fn expansions(&self) -> &[CFExpansion] {
        &self.expansions
    }

    pub fn expansion(&self, i: usize) -> &CFExpansion {
        &self.expansions[i]
    }

    pub fn u_seq(&self) -> &DenseSequence {
        &self.u_seq
    }

    pub fn u(&self, k: usize) -> Option<&[u64]> {
        self.u_seq.get(k)
    }

    pub fn audit(&self) -> &[LevelAudit] {
        &self.audit
    }

    /// Smallest coefficient count over the tori.
    pub fn depth(&self) -> usize {
        self.expansions.iter().map(CFExpansion::len).min().unwrap_or(0)
    }

    /// Largest bit length of any coefficient or denominator.
    pub fn max_bits(&self) -> u64 {
        self.expansions
            .iter()
            .flat_map(|cf| {
                let top = cf.depth() as isize;
                cf.coeffs()
                    .iter()
                    .map(|a| u64::from(a.significant_bits()))
                    .chain(std::iter::once(u64::from(cf.q(top).significant_bits())))
            })
            .max()
            .unwrap_or(0)
    }
}

/// Enclosures of `ln a_{2k+1}^i` and `ln q_{2k+1}^i` for the level that ran out of budget.
#[derive(Debug, Clone)]
pub struct ApproxLevel {
    pub level: usize,
    /// Exact even coefficients of the level.
    pub even: Vec<Integer>,
    pub log_odd: Vec<Interval>,
    pub log_q_odd: Vec<Interval>,
}

/// What is left when a level exceeds the bit budget.
#[derive(Debug, Clone)]
pub struct BudgetOverflow {
    pub level: usize,
    pub needed_bits: u64,
    pub budget: u64,
    /// Levels `1..level` computed exactly.
    pub partial: SlopeFamily,
    pub approx: ApproxLevel,
}

/// Runs the generator for `spec.levels` levels.
pub fn generate_slope_family(spec: &FamilySpec, u_seq: &DenseSequence) -> Result<SlopeFamily> {
    let tori = spec.d + 1;
    if u_seq.d() != spec.d {
        return Err(Error::Config(format!(
            "dense sequence built for d = {}, family needs d = {}",
            u_seq.d(),
            spec.d
        )));
    }
    if u_seq.len() < spec.levels {
        return Err(Error::Config(format!(
            "{} levels requested, dense sequence has {} tuples",
            spec.levels,
            u_seq.len()
        )));
    }
    let mut expansions: Vec<CFExpansion> = (0..tori)
        .map(|_| CFExpansion::with_convergents(vec![Integer::from(1)]))
        .collect::<Result<_>>()?;
    let mut audit = Vec::with_capacity(spec.levels);

    for k in 1..=spec.levels {
        let snapshot = SlopeFamily {
            d: spec.d,
            mode: spec.mode,
            u_seq: u_seq.truncated(k - 1),
            expansions: expansions.clone(),
            audit: audit.clone(),
        };
        let u = u_seq.get(k).expect("checked length");

        // condition (i)-(ii): smallest multiplier of u_k clearing k max{a_{2k-1}^i, u_k}
        let (u_max_idx, &u_max) = u.iter().enumerate().max_by_key(|(_, &x)| x).expect("non-empty");
        let u_min = *u.iter().min().expect("non-empty");
        let mut big = Integer::from(u_max);
        let mut even_bound = ActiveBound::Target(u_max_idx);
        for (i, cf) in expansions.iter().enumerate() {
            let prev = cf.coeff(2 * k - 1).expect("odd coefficient of previous level");
            if *prev >= big {
                big = prev.clone();
                even_bound = ActiveBound::Coefficient(i);
            }
        }
        let multiplier = Integer::from(&big * k as u64) / u_min + 1u32;
        let even: Vec<Integer> = u.iter().map(|&x| Integer::from(&multiplier * x)).collect();
        for (cf, a) in expansions.iter_mut().zip(&even) {
            cf.push(a.clone())?;
        }
        let q_even: Vec<Integer> = expansions.iter().map(|cf| cf.q(2 * k as isize).clone()).collect();
        let lcm = q_even.iter().fold(Integer::from(1), |acc, q| acc.lcm(q));

        // condition (iii)-(iv): smallest c_k with lcm c_k / q_{2k}^i above the growth bound
        let overflow = |needed_bits: u64| {
            Error::BudgetExceeded(Box::new(BudgetOverflow {
                level: k,
                needed_bits,
                budget: spec.budget_bits,
                partial: snapshot.clone(),
                approx: approx_level(k, spec.mode, &even, &q_even, &lcm),
            }))
        };
        let mut needs = Vec::with_capacity(tori);
        for (a, q) in even.iter().zip(&q_even) {
            let need = match spec.mode {
                GrowthMode::Strict => {
                    let x = Integer::from(a * k as u64);
                    let bits = (x.to_f64() * std::f64::consts::LOG2_E).ceil();
                    if !bits.is_finite() || bits > spec.budget_bits as f64 {
                        return Err(overflow(if bits.is_finite() { bits as u64 } else { u64::MAX }));
                    }
                    let e = exp_ceiling(&x);
                    // ceil(E q / lcm)
                    (e * q + &lcm - 1u32) / &lcm
                }
                GrowthMode::Scaled { power } => {
                    let g = GrowthMode::scaled_bound(power, k, a);
                    (g * q) / &lcm + 1u32
                }
            };
            needs.push(need);
        }
        let (odd_torus, scale) = needs
            .iter()
            .enumerate()
            .fold((0, Integer::from(1)), |(bi, best), (i, c)| {
                if *c > best {
                    (i, c.clone())
                } else {
                    (bi, best)
                }
            });
        let common = Integer::from(&lcm * &scale);
        let odd: Vec<Integer> = q_even.iter().map(|q| Integer::from(common.div_exact_ref(q))).collect();
        let widest = odd
            .iter()
            .map(|a| u64::from(a.significant_bits()))
            .chain(std::iter::once(u64::from(common.significant_bits()) + 1))
            .max()
            .unwrap_or(0);
        if widest > spec.budget_bits {
            return Err(overflow(widest));
        }
        for (cf, a) in expansions.iter_mut().zip(odd) {
            cf.push(a)?;
        }
        audit.push(LevelAudit {
            level: k,
            multiplier,
            even_bound,
            lcm,
            scale,
            common,
            odd_torus,
        });
    }

    Ok(SlopeFamily {
        d: spec.d,
        mode: spec.mode,
        u_seq: u_seq.truncated(spec.levels),
        expansions,
        audit,
    })
}

/// Log enclosures of the odd coefficients a level would have produced.
///
/// With `B_i` the growth bound of torus `i` (`exp(k a_{2k}^i)` or
/// `g(k, a_{2k}^i)`), the generator picks `a_{2k+1}^i = lcm c / q_i` with
/// `c <= max_j B_j q_j / lcm + 1`, hence
/// `B_i <= a_{2k+1}^i <= (max_j B_j q_j + lcm) / q_i`.
fn approx_level(k: usize, mode: GrowthMode, even: &[Integer], q_even: &[Integer], lcm: &Integer) -> ApproxLevel {
    let prec = Precision::default();
    let ln_q: Vec<Interval> = q_even.iter().map(|q| Interval::from_integer(prec, q).ln()).collect();
    let ln_lcm = Interval::from_integer(prec, lcm).ln();
    let ln_two = Interval::from_f64(prec, 2.0).ln();
    let one = Interval::from_f64(prec, 1.0);
    let bounds: Vec<(Interval, Interval)> = even
        .iter()
        .map(|a| match mode {
            GrowthMode::Strict => {
                let x = Interval::from_integer(prec, &Integer::from(a * k as u64));
                (x.clone(), x.add(&one))
            }
            GrowthMode::Scaled { power } => {
                let g = GrowthMode::scaled_bound(power, k, a);
                (
                    Interval::from_integer(prec, &g).ln(),
                    Interval::from_integer(prec, &Integer::from(&g + 1u32)).ln(),
                )
            }
        })
        .collect();
    let top = bounds
        .iter()
        .zip(&ln_q)
        .map(|((_, hi), lq)| hi.add(lq))
        .fold(ln_lcm, |acc, x| acc.max(&x))
        .add(&ln_two);
    let log_odd: Vec<Interval> = bounds
        .iter()
        .zip(&ln_q)
        .map(|((lo, _), lq)| {
            let upper = top.sub(lq);
            Interval::new(lo.lo().clone(), upper.hi().clone())
        })
        .collect();
    // q_{2k+1} = a_{2k+1} q_{2k} + q_{2k-1} lies in [a q, 2 a q]
    let log_q_odd = log_odd
        .iter()
        .zip(&ln_q)
        .map(|(la, lq)| {
            let s = la.add(lq);
            Interval::new(s.lo().clone(), s.add(&ln_two).hi().clone())
        })
        .collect();
    ApproxLevel {
        level: k,
        even: even.to_vec(),
        log_odd,
        log_q_odd,
    }
}
