//! Verification suites run by `verify`.
//!
//! Exact suites use integer and rational arithmetic with zero tolerance.
//! Numeric suites accept a value only when its whole enclosure satisfies the
//! bound. Asymptotic suites judge trends over the final probes and are
//! skipped on families with fewer than three levels.

use std::fmt;

use rug::{Integer, Rational};
use teichlab::contfrac::{check_conditions, parse_family, verify_lemma_slopes, write_family, FamilyFile};
use teichlab::geodesic::balanced_time;
use teichlab::limitset::{limit_report, trend_holds, LimitReport, TREND_WINDOW};
use teichlab::numeric::Interval;
use teichlab::surface::{Curve, SlitSurface};
use teichlab::Result;

use crate::commands::report_spec;
use crate::config::RunConfig;

/// Fewest levels on which a trend over the final probes means anything.
pub const MIN_TREND_LEVELS: usize = TREND_WINDOW;

pub const Q_RATIO_TOL: f64 = 0.05;
pub const FLAT_LIMIT_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Exact,
    Numeric,
    Asymptotic,
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SuiteKind::Exact => "exact",
            SuiteKind::Numeric => "numeric",
            SuiteKind::Asymptotic => "asymptotic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuiteStatus {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: String,
    pub kind: SuiteKind,
    pub status: SuiteStatus,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: impl Into<String>, kind: SuiteKind) -> Self {
        SuiteResult {
            name: name.into(),
            kind,
            status: SuiteStatus::Pass,
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn skipped(name: &str, kind: SuiteKind, why: impl Into<String>) -> Self {
        SuiteResult {
            status: SuiteStatus::Skipped(why.into()),
            ..SuiteResult::new(name, kind)
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
            self.status = SuiteStatus::Fail;
        }
    }

    pub fn failed(&self) -> bool {
        self.status == SuiteStatus::Fail
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match &self.status {
            SuiteStatus::Pass => "PASS".to_string(),
            SuiteStatus::Fail => "FAIL".to_string(),
            SuiteStatus::Skipped(why) => format!("SKIP ({why})"),
        };
        write!(
            f,
            "{verdict} {} [{}] checked={} failed={}",
            self.name,
            self.kind,
            self.checked,
            self.failures.len()
        )?;
        if let Some(first) = self.failures.first() {
            write!(f, " first: {first}")?;
        }
        Ok(())
    }
}

fn cf_identities(file: &FamilyFile) -> SuiteResult {
    let mut r = SuiteResult::new("cf-identities", SuiteKind::Exact);
    for (i, cf) in file.family.expansions().iter().enumerate() {
        for n in 1..=cf.len() as isize {
            let a = &cf.coeffs()[n as usize - 1];
            let (p, q) = (cf.p(n), cf.q(n));
            let (p1, q1) = (cf.p(n - 1), cf.q(n - 1));
            let (p2, q2) = (cf.p(n - 2), cf.q(n - 2));
            r.record(
                *p == Integer::from(a * p1) + p2 && *q == Integer::from(a * q1) + q2,
                || format!("torus {i}: recurrence at n={n}"),
            );
            let det = Integer::from(p * q1) - Integer::from(p1 * q);
            let sign = if n % 2 == 0 { -1 } else { 1 };
            r.record(det == sign, || format!("torus {i}: determinant {det} at n={n}"));
            r.record(Integer::from(p.gcd_ref(q)) == 1, || {
                format!("torus {i}: p/q not reduced at n={n}")
            });
        }
    }
    r
}

fn conditions(file: &FamilyFile) -> Vec<SuiteResult> {
    let mut out: Vec<SuiteResult> = check_conditions(&file.family)
        .checks
        .into_iter()
        .map(|c| {
            let mut r = SuiteResult::new(format!("condition-{}", c.name), SuiteKind::Exact);
            r.checked = c.checked;
            if !c.failures.is_empty() {
                r.status = SuiteStatus::Fail;
                r.failures = c.failures;
            }
            r
        })
        .collect();
    let lemma = verify_lemma_slopes(&file.family);
    let mut qprod = SuiteResult::new("qprod", SuiteKind::Exact);
    qprod.checked = lemma.qprod_checked;
    for (i, n) in &lemma.qprod_failures {
        qprod.record(false, || format!("torus {i}: q_{n} outside the coefficient products"));
    }
    out.push(qprod);
    out
}

fn roundtrip(file: &FamilyFile) -> SuiteResult {
    let mut r = SuiteResult::new("roundtrip", SuiteKind::Exact);
    let text = write_family(file);
    match parse_family(&text) {
        Ok(back) => {
            r.record(back == *file, || "parsed family differs".into());
            r.record(write_family(&back) == text, || "re-serialization differs".into());
        }
        Err(e) => r.record(false, || format!("written family does not parse: {e}")),
    }
    r
}

fn intersection_symmetry(s: &SlitSurface, panel: &[Curve]) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("intersection-symmetry", SuiteKind::Exact);
    let mut curves: Vec<Curve> = panel.to_vec();
    for i in 0..s.tori() {
        curves.push(Curve::boundary(i));
        curves.push(Curve::bridge(i, 3, 1)?);
        for n in 0..=s.max_convergent(i).min(3) {
            curves.push(s.convergent_curve(i, n)?);
        }
    }
    for a in &curves {
        r.record(s.intersection_number(a, a) == 0, || format!("I({a}, {a}) != 0"));
        for b in &curves {
            r.record(s.intersection_number(a, b) == s.intersection_number(b, a), || {
                format!("I({a}, {b}) != I({b}, {a})")
            });
        }
    }
    Ok(r)
}

/// `ℓ² a_{n+1}` at the balanced time of `α_n`.
fn flat_law_value(s: &SlitSurface, i: usize, n: isize) -> Result<Interval> {
    let c = s.convergent_curve(i, n)?;
    let t = balanced_time(s, &c)?;
    let len = s.flat_length(&c, &t)?;
    let a = s.family().expansion(i).coeffs()[n as usize].clone();
    Ok(len.square().mul(&Interval::from_integer(s.precision(), &a)))
}

fn balance_and_flat_law(s: &SlitSurface) -> Result<[SuiteResult; 2]> {
    let mut balance = SuiteResult::new("balance", SuiteKind::Numeric);
    let mut flat = SuiteResult::new("flat-law", SuiteKind::Numeric);
    let (one, four) = (s.constant(1.0), s.constant(4.0));
    for i in 0..s.tori() {
        for n in 0..=s.max_convergent(i) {
            let c = s.convergent_curve(i, n)?;
            let t = balanced_time(s, &c)?;
            let (h, v) = s.horizontal_vertical(&c, &t)?;
            balance.record(h.overlaps(&v), || format!("torus {i}: h != v at t_{n}"));
            if n >= 1 {
                let x = flat_law_value(s, i, n)?;
                flat.record(x.lo() >= one.lo() && x.hi() <= four.hi(), || {
                    format!("torus {i}: l^2 a_{} = {} at n={n}", n + 1, x.display(6))
                });
            }
        }
    }
    Ok([balance, flat])
}

fn flat_law_limit(s: &SlitSurface) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("flat-law-limit", SuiteKind::Asymptotic);
    let two = s.constant(2.0);
    for i in 0..s.tori() {
        let top = s.max_convergent(i);
        for n in (top - 1).max(1)..=top {
            let gap = flat_law_value(s, i, n)?.relative_gap(&two);
            r.record(gap.hi().to_f64() < FLAT_LIMIT_TOL, || {
                format!("torus {i}: |l^2 a_{}/2 - 1| = {} at n={n}", n + 1, gap.display(4))
            });
        }
    }
    Ok(r)
}

fn q_ratio_trend(file: &FamilyFile) -> SuiteResult {
    let mut r = SuiteResult::new("q-ratio-trend", SuiteKind::Asymptotic);
    let gaps: Vec<Rational> = verify_lemma_slopes(&file.family)
        .rows
        .into_iter()
        .filter_map(|row| row.q_ratio_gap_01)
        .collect();
    let tail = &gaps[gaps.len().saturating_sub(TREND_WINDOW)..];
    for (k, w) in tail.windows(2).enumerate() {
        r.record(w[1] <= w[0], || format!("gap increases at window step {k}"));
    }
    let tol = Rational::from_f64(Q_RATIO_TOL).expect("finite");
    match gaps.last() {
        Some(last) => r.record(*last < tol, || format!("final gap {} >= {Q_RATIO_TOL}", last.to_f64())),
        None => r.record(false, || "no level rows".into()),
    }
    r
}

fn limit_suites(report: &LimitReport) -> Vec<SuiteResult> {
    let mut reliability = SuiteResult::new("probe-reliability", SuiteKind::Asymptotic);
    let unreliable = report.unreliable_accepted();
    for level in report.accepted() {
        let n = level.probe.n();
        reliability.record(!unreliable.contains(&n), || format!("probe at n={n} is unreliable"));
    }
    let mut out = vec![reliability];
    let verdict = |name: &str, t: teichlab::limitset::Trend| {
        let mut r = SuiteResult::new(name, SuiteKind::Asymptotic);
        r.record(t.non_increasing, || "gaps increase over the final probes".into());
        r.record(t.last_within, || "final gap above tolerance".into());
        r
    };
    out.push(verdict("ratio-trend", report.ratio_trend()));
    out.push(verdict("collar-trend", report.collar_trend()));
    let spread: Vec<Interval> = report.levels.iter().map(|l| l.spread_ratio.clone()).collect();
    out.push(verdict("spread-trend", trend_holds(&spread, 1.0)));
    if let Some(beta) = &report.beta {
        let mut r = SuiteResult::new("beta-decay", SuiteKind::Asymptotic);
        match (beta.rows.first(), beta.rows.last()) {
            (Some(first), Some(last)) if beta.rows.len() >= 2 => {
                let half = first.ratio.half();
                r.record(last.ratio.certainly_lt(&half), || {
                    format!(
                        "final ratio {} not below half of {}",
                        last.ratio.display(4),
                        first.ratio.display(4)
                    )
                });
            }
            _ => r.record(false, || "fewer than two sampled times".into()),
        }
        out.push(r);
    }
    out
}

/// Every suite, in a fixed order.
pub fn run_suites(file: &FamilyFile, cfg: &RunConfig) -> Result<Vec<SuiteResult>> {
    let s = SlitSurface::from_file(file, cfg.precision())?;
    let spec = report_spec(&s, cfg);
    let mut out = vec![cf_identities(file)];
    out.extend(conditions(file));
    out.push(roundtrip(file));
    out.push(intersection_symmetry(&s, &spec.panel)?);
    out.extend(balance_and_flat_law(&s)?);
    let levels = file.family.levels();
    let too_short = format!("needs {MIN_TREND_LEVELS} levels, family has {levels}");
    let asymptotic = [
        "flat-law-limit",
        "q-ratio-trend",
        "probe-reliability",
        "ratio-trend",
        "collar-trend",
        "spread-trend",
        "beta-decay",
    ];
    if levels < MIN_TREND_LEVELS || spec.levels.len() < MIN_TREND_LEVELS {
        out.extend(
            asymptotic
                .iter()
                .map(|n| SuiteResult::skipped(n, SuiteKind::Asymptotic, too_short.clone())),
        );
        return Ok(out);
    }
    out.push(flat_law_limit(&s)?);
    if file.family.d() >= 1 {
        out.push(q_ratio_trend(file));
    } else {
        out.push(SuiteResult::skipped(
            "q-ratio-trend",
            SuiteKind::Asymptotic,
            "needs two tori",
        ));
    }
    out.extend(limit_suites(&limit_report(&s, spec)?));
    Ok(out)
}
