//! Limit-report datasets: a CSV with one row per (level, curve), a JSON
//! summary of per-level gap metrics and two-column plot files.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    beta_decay_report, check_panel, check_test_curve, intersection_weight, limit_probe, ratio_row_at, simplex_row_at,
    target_weight, trend_holds, BetaDecay, LimitProbe, RatioRow, SimplexRow, Trend,
};
use crate::contfrac::GrowthMode;
use crate::error::{Error, Result};
use crate::geodesic::{hyperbolic_surrogate, pants_length_estimate};
use crate::numeric::Interval;
use crate::surface::{Curve, SlitSurface};

pub const LIMIT_CSV_HEADER: &str =
    "n,curve,t,width_only,with_twist,mid_weight,target_weight,simplex_empirical,simplex_target,reliable";

/// Number of final probes the trend verdicts look at.
pub const TREND_WINDOW: usize = 3;

#[derive(Debug, Clone)]
pub struct LimitReportSpec {
    pub gamma1: Curve,
    pub gamma2: Curve,
    pub panel: Vec<Curve>,
    pub bridge: Option<Curve>,
    pub levels: Vec<usize>,
    pub ratio_tol: f64,
    pub collar_tol: f64,
}

impl LimitReportSpec {
    /// `(1,0)` curves on tori 0 and 1, the `(1,0)` panel, the bridge
    /// `G 0 3/1` and every feasible level.
    pub fn default_for(s: &SlitSurface) -> Self {
        let horizontal = |i| Curve::torus(i, 1, 0).expect("primitive");
        let gamma2 = if s.tori() > 1 {
            horizontal(1)
        } else {
            Curve::torus(0, 0, 1).expect("primitive")
        };
        LimitReportSpec {
            gamma1: horizontal(0),
            gamma2,
            panel: (0..s.tori()).map(horizontal).collect(),
            bridge: Some(Curve::bridge(0, 3, 1).expect("primitive")),
            levels: feasible_levels(s),
            ratio_tol: 0.2,
            collar_tol: 0.1,
        }
    }
}

/// Levels `n ≥ 1` with a generated target tuple and `α_{2n}` resolved.
pub fn feasible_levels(s: &SlitSurface) -> Vec<usize> {
    let fam = s.family();
    (1..=fam.levels()).filter(|n| 2 * n < fam.depth()).collect()
}

#[derive(Debug, Clone)]
pub struct CurveRow {
    pub n: usize,
    pub curve: Curve,
    pub t: Interval,
    pub width_only: Interval,
    pub with_twist: Interval,
    /// `Σ_i I(γ, α_{2n}^i) ln a_{2n+1}^i`
    pub mid_weight: Interval,
    /// `Σ_i w_n^i I(γ, ν^i)`
    pub target_weight: Interval,
    /// Normalized panel coordinates, for panel curves only.
    pub simplex: Option<(Interval, Interval)>,
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct LevelData {
    pub probe: LimitProbe,
    pub ratio: RatioRow,
    pub simplex: SimplexRow,
    pub curves: Vec<CurveRow>,
    /// Per torus: `Hyp(β^i)` at `t_{2n}^i` and its product with `ln q_{2n}^i`.
    pub beta_hyp: Vec<(Interval, Interval)>,
    /// `spread / min_i ln a_{2n+1}^i`
    pub spread_ratio: Interval,
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub mode: GrowthMode,
    pub d: usize,
    pub spec: LimitReportSpec,
    pub levels: Vec<LevelData>,
    pub beta: Option<BetaDecay>,
}

fn level_data(s: &SlitSurface, spec: &LimitReportSpec, curves: &[Curve], n: usize) -> Result<LevelData> {
    let probe = limit_probe(s, n)?;
    let ratio = ratio_row_at(s, &probe, &spec.gamma1, &spec.gamma2)?;
    let simplex = simplex_row_at(s, &probe, &spec.panel)?;
    let mut rows = Vec::with_capacity(curves.len());
    for c in curves {
        let est = pants_length_estimate(s, c, probe.t(), &probe.pants)?;
        let coords = spec
            .panel
            .iter()
            .position(|p| p == c)
            .map(|j| (simplex.empirical[j].clone(), simplex.target[j].clone()));
        rows.push(CurveRow {
            n,
            curve: c.clone(),
            t: probe.t().clone(),
            width_only: est.width_only,
            with_twist: est.with_twist,
            mid_weight: intersection_weight(s, &probe, c),
            target_weight: target_weight(s, &probe, c)?,
            simplex: coords,
            reliable: probe.reliable && est.reliable,
        });
    }
    let mut beta_hyp = Vec::with_capacity(s.tori());
    for (i, t) in probe.time.balanced.iter().enumerate() {
        let hyp = hyperbolic_surrogate(s, &Curve::boundary(i), t)?;
        let q = &s.convergent(i, 2 * n as isize)?.q;
        let log_q = Interval::from_integer(s.precision(), q).ln();
        let product = hyp.value.mul(&log_q);
        beta_hyp.push((hyp.value, product));
    }
    let min_log_a = probe
        .log_coeffs
        .iter()
        .min_by(|a, b| a.mid().partial_cmp(&b.mid()).expect("finite"))
        .expect("at least one torus");
    let spread_ratio = probe.time.spread.div(min_log_a);
    Ok(LevelData {
        probe,
        ratio,
        simplex,
        curves: rows,
        beta_hyp,
        spread_ratio,
    })
}

pub fn limit_report(s: &SlitSurface, spec: LimitReportSpec) -> Result<LimitReport> {
    check_test_curve(&spec.gamma1)?;
    check_test_curve(&spec.gamma2)?;
    check_panel(s, &spec.panel)?;
    if spec.levels.is_empty() {
        return Err(Error::InsufficientDepth("no feasible level to probe".into()));
    }
    let mut levels = spec.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    // canonical order is by curve literal
    let mut curves: Vec<Curve> = vec![spec.gamma1.clone(), spec.gamma2.clone()];
    curves.extend(spec.panel.iter().cloned());
    curves.sort_by_key(|c| c.to_string());
    curves.dedup();
    let data = levels
        .par_iter()
        .map(|&n| level_data(s, &spec, &curves, n))
        .collect::<Result<Vec<_>>>()?;
    let beta = match &spec.bridge {
        Some(b) => {
            let times: Vec<Interval> = data.iter().map(|l| l.probe.t().clone()).collect();
            Some(beta_decay_report(s, b, &times)?)
        }
        None => None,
    };
    Ok(LimitReport {
        mode: s.family().mode(),
        d: s.d(),
        spec: LimitReportSpec { levels, ..spec },
        levels: data,
        beta,
    })
}

impl LimitReport {
    /// Probes inside the trend window; these carry the acceptance verdicts.
    pub fn accepted(&self) -> &[LevelData] {
        &self.levels[self.levels.len().saturating_sub(TREND_WINDOW)..]
    }

    /// Accepted levels whose probe failed reliability.
    pub fn unreliable_accepted(&self) -> Vec<usize> {
        self.accepted()
            .iter()
            .filter(|l| !(l.probe.reliable && l.ratio.reliable && l.simplex.reliable))
            .map(|l| l.probe.n())
            .collect()
    }

    fn series(&self, f: impl Fn(&LevelData) -> &Interval) -> Vec<Interval> {
        self.levels.iter().map(|l| f(l).clone()).collect()
    }

    pub fn ratio_trend(&self) -> Trend {
        trend_holds(&self.series(|l| &l.ratio.lhs_rhs_gap), self.spec.ratio_tol)
    }

    pub fn collar_trend(&self) -> Trend {
        trend_holds(&self.series(|l| &l.ratio.collar_gap), self.spec.collar_tol)
    }
}

fn cell(x: Option<&Interval>, digits: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.display(digits))
}

/// One row per (level, curve), sorted by level then curve literal.
pub fn write_limit_csv(report: &LimitReport, digits: usize) -> String {
    let mut out = String::from(LIMIT_CSV_HEADER);
    out.push('\n');
    for level in &report.levels {
        for r in &level.curves {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.curve,
                r.t.display(digits),
                r.width_only.display(digits),
                r.with_twist.display(digits),
                r.mid_weight.display(digits),
                r.target_weight.display(digits),
                cell(r.simplex.as_ref().map(|p| &p.0), digits),
                cell(r.simplex.as_ref().map(|p| &p.1), digits),
                r.reliable
            );
        }
    }
    out
}

#[derive(Serialize)]
struct TrendJson {
    tolerance: f64,
    last_within: bool,
    non_increasing: bool,
    holds: bool,
}

impl TrendJson {
    fn new(t: Trend, tolerance: f64) -> Self {
        TrendJson {
            tolerance,
            last_within: t.last_within,
            non_increasing: t.non_increasing,
            holds: t.holds(),
        }
    }
}

#[derive(Serialize)]
struct LevelJson {
    n: usize,
    t: String,
    spread: String,
    spread_over_log_a: String,
    lhs: String,
    lhs_twist: String,
    mid: String,
    rhs: String,
    lhs_rhs_gap: String,
    lhs_mid_gap: String,
    mid_rhs_gap: String,
    collar_gap: String,
    simplex_gap: String,
    beta_hyp: Vec<String>,
    beta_hyp_log_q: Vec<String>,
    reliable: bool,
}

#[derive(Serialize)]
struct BetaRowJson {
    t: String,
    alpha: String,
    beta_width_only: String,
    beta_with_twist: String,
    beta_over_log_t: String,
    alpha_contribution: String,
    ratio: String,
    reliable: bool,
}

#[derive(Serialize)]
struct BetaJson {
    bridge: String,
    rows: Vec<BetaRowJson>,
    alpha_slope: Option<String>,
}

#[derive(Serialize)]
struct SummaryJson {
    mode: String,
    d: usize,
    gamma1: String,
    gamma2: String,
    panel: Vec<String>,
    levels: Vec<LevelJson>,
    ratio_trend: TrendJson,
    collar_trend: TrendJson,
    accepted_levels: Vec<usize>,
    unreliable_accepted: Vec<usize>,
    beta_decay: Option<BetaJson>,
}

/// Shortest curves late on the ray have slopes with thousands of digits;
/// those are summarized by the bit length of `q`.
fn alpha_label(c: &Curve) -> String {
    match c.direction() {
        Some((p, q)) if p.significant_bits() + q.significant_bits() <= 128 => c.to_string(),
        _ => format!(
            "T {} <{}-bit slope>",
            c.torus_index(),
            c.direction().map_or(0, |(_, q)| q.significant_bits())
        ),
    }
}

pub fn summary_json(report: &LimitReport, digits: usize) -> String {
    let show = |x: &Interval| x.display(digits);
    let levels = report
        .levels
        .iter()
        .map(|l| LevelJson {
            n: l.probe.n(),
            t: show(l.probe.t()),
            spread: show(&l.probe.time.spread),
            spread_over_log_a: show(&l.spread_ratio),
            lhs: show(&l.ratio.lhs),
            lhs_twist: show(&l.ratio.lhs_twist),
            mid: show(&l.ratio.mid),
            rhs: show(&l.ratio.rhs),
            lhs_rhs_gap: show(&l.ratio.lhs_rhs_gap),
            lhs_mid_gap: show(&l.ratio.lhs_mid_gap),
            mid_rhs_gap: show(&l.ratio.mid_rhs_gap),
            collar_gap: show(&l.ratio.collar_gap),
            simplex_gap: show(&l.simplex.gap),
            beta_hyp: l.beta_hyp.iter().map(|b| show(&b.0)).collect(),
            beta_hyp_log_q: l.beta_hyp.iter().map(|b| show(&b.1)).collect(),
            reliable: l.probe.reliable && l.ratio.reliable && l.simplex.reliable,
        })
        .collect();
    let beta_decay = report.beta.as_ref().map(|b| BetaJson {
        bridge: report.spec.bridge.as_ref().map(|c| c.to_string()).unwrap_or_default(),
        rows: b
            .rows
            .iter()
            .map(|r| BetaRowJson {
                t: show(&r.t),
                alpha: alpha_label(&r.alpha),
                beta_width_only: show(&r.beta_width_only),
                beta_with_twist: show(&r.beta_with_twist),
                beta_over_log_t: show(&r.beta_with_twist.div(&r.t.ln())),
                alpha_contribution: show(&r.alpha_contribution),
                ratio: show(&r.ratio),
                reliable: r.reliable,
            })
            .collect(),
        alpha_slope: b.alpha_slope.as_ref().map(|x| crate::numeric::format_float(x, digits)),
    });
    let summary = SummaryJson {
        mode: report.mode.to_string(),
        d: report.d,
        gamma1: report.spec.gamma1.to_string(),
        gamma2: report.spec.gamma2.to_string(),
        panel: report.spec.panel.iter().map(|c| c.to_string()).collect(),
        levels,
        ratio_trend: TrendJson::new(report.ratio_trend(), report.spec.ratio_tol),
        collar_trend: TrendJson::new(report.collar_trend(), report.spec.collar_tol),
        accepted_levels: report.accepted().iter().map(|l| l.probe.n()).collect(),
        unreliable_accepted: report.unreliable_accepted(),
        beta_decay,
    };
    let mut out = serde_json::to_string_pretty(&summary).expect("plain data serializes");
    out.push('\n');
    out
}

fn xy(points: impl Iterator<Item = (String, String)>) -> String {
    let mut out = String::new();
    for (x, y) in points {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

/// `(file name, contents)` pairs; every file has an `x y` pair per line.
pub fn plot_files(report: &LimitReport, digits: usize) -> Vec<(String, String)> {
    let by_level = |f: &dyn Fn(&LevelData) -> &Interval| {
        xy(report
            .levels
            .iter()
            .map(|l| (l.probe.n().to_string(), f(l).mid_string(digits))))
    };
    let mut files = vec![
        ("lhs_rhs_gap.dat".to_string(), by_level(&|l| &l.ratio.lhs_rhs_gap)),
        ("lhs_mid_gap.dat".to_string(), by_level(&|l| &l.ratio.lhs_mid_gap)),
        ("mid_rhs_gap.dat".to_string(), by_level(&|l| &l.ratio.mid_rhs_gap)),
        ("collar_gap.dat".to_string(), by_level(&|l| &l.ratio.collar_gap)),
        ("spread_over_log_a.dat".to_string(), by_level(&|l| &l.spread_ratio)),
        ("simplex_gap.dat".to_string(), by_level(&|l| &l.simplex.gap)),
    ];
    for j in 0..report.spec.panel.len() {
        files.push((
            format!("simplex_{j}_empirical.dat"),
            by_level(&|l| &l.simplex.empirical[j]),
        ));
        files.push((format!("simplex_{j}_target.dat"), by_level(&|l| &l.simplex.target[j])));
    }
    if let Some(b) = &report.beta {
        files.push((
            "beta_ratio.dat".to_string(),
            xy(b.rows
                .iter()
                .map(|r| (r.t.mid_string(digits), r.ratio.mid_string(digits)))),
        ));
    }
    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::{generate_slope_family, DenseSequence, FamilySpec};
    use crate::numeric::Precision;
    use rug::Rational;

    fn report(d: usize, k: usize, mode: GrowthMode) -> LimitReport {
        let fam = generate_slope_family(&FamilySpec::new(d, k, mode), &DenseSequence::default_for(d, k)).unwrap();
        let s = SlitSurface::new(fam, Rational::from((1, 100)), Precision::default()).unwrap();
        let spec = LimitReportSpec::default_for(&s);
        limit_report(&s, spec).unwrap()
    }

    #[test]
    fn csv_rows_are_canonical() {
        let r = report(2, 3, GrowthMode::default());
        let csv = write_limit_csv(&r, 10);
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        // T 0 1/0, T 1 1/0, T 2 1/0 at every level
        assert_eq!(rows.len(), 3 * r.levels.len());
        let keys: Vec<(usize, &str)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1])).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(rows.iter().all(|r| r.len() == 10));
        assert_eq!(csv, write_limit_csv(&r, 10));
    }

    #[test]
    fn degenerate_single_torus_run() {
        let r = report(0, 3, GrowthMode::default());
        assert_eq!(r.spec.gamma2, Curve::torus(0, 0, 1).unwrap());
        let json: serde_json::Value = serde_json::from_str(&summary_json(&r, 8)).unwrap();
        assert_eq!(json["d"], 0);
        assert_eq!(json["levels"].as_array().unwrap().len(), r.levels.len());
        for (_, body) in plot_files(&r, 8) {
            let xs: Vec<f64> = body
                .lines()
                .map(|l| l.split(' ').next().unwrap().parse().unwrap())
                .collect();
            assert!(xs.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn accepted_window_is_the_tail() {
        let r = report(2, 5, GrowthMode::default());
        let ns: Vec<usize> = r.accepted().iter().map(|l| l.probe.n()).collect();
        assert_eq!(ns, vec![3, 4, 5]);
    }
}
