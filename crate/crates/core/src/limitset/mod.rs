//! Probes of the projective limit of the ray.
//!
//! At level `n` the ray is sampled at `t_n`, the midpoint of the balanced
//! times of `α_{2n}^0, ..., α_{2n}^d`. The pants decomposition there is
//! `{α_{2n}^i} ∪ {β^i}`, and the length estimate of a test curve is compared
//! with the target `Σ_i w_n^i I(γ, ν^i)`, `w_n^i = u_n^i √(1+(θ^i)²)`.

mod report;
mod trend;

pub use report::{
    feasible_levels, limit_report, plot_files, summary_json, write_limit_csv, CurveRow, LevelData, LimitReport,
    LimitReportSpec, LIMIT_CSV_HEADER, TREND_WINDOW,
};
pub use trend::{trend_holds, Trend};

use rayon::prelude::*;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::geodesic::{
    balanced_time, collar_width_of, hyperbolic_surrogate, pants_length_estimate, shortest_torus_curve, CollarWidth,
    HyperbolicSurrogate, PantsEstimate,
};
use crate::numeric::Interval;
use crate::surface::{Curve, SlitSurface};

#[derive(Debug, Clone)]
pub struct SampledTime {
    pub n: usize,
    /// `t_{2n}^i` for every torus.
    pub balanced: Vec<Interval>,
    pub lo: Interval,
    pub hi: Interval,
    pub t: Interval,
    /// `max_{i,j} |t_{2n}^i - t_{2n}^j|`
    pub spread: Interval,
}

/// `t_n` as the midpoint of `[min_i t_{2n}^i, max_i t_{2n}^i]`.
pub fn sample_time(s: &SlitSurface, n: usize) -> Result<SampledTime> {
    let balanced = (0..s.tori())
        .map(|i| balanced_time(s, &s.convergent_curve(i, 2 * n as isize)?))
        .collect::<Result<Vec<_>>>()?;
    let by_mid = |a: &&Interval, b: &&Interval| a.mid().partial_cmp(&b.mid()).expect("finite");
    let lo = balanced.iter().min_by(by_mid).expect("at least one torus").clone();
    let hi = balanced.iter().max_by(by_mid).expect("at least one torus").clone();
    let t = lo.add(&hi).half();
    let spread = hi.sub(&lo).abs();
    Ok(SampledTime {
        n,
        balanced,
        lo,
        hi,
        t,
        spread,
    })
}

#[derive(Debug, Clone)]
pub struct LimitProbe {
    pub time: SampledTime,
    /// `α_{2n}^0, ..., α_{2n}^d, β^0, ..., β^d`
    pub pants: Vec<Curve>,
    pub pants_hyp: Vec<HyperbolicSurrogate>,
    /// Collar widths of `α_{2n}^i`.
    pub widths: Vec<CollarWidth>,
    /// `ln a_{2n+1}^i`
    pub log_coeffs: Vec<Interval>,
    /// `w_n^i`
    pub weights: Vec<Interval>,
    /// Every pants curve has a reliable surrogate and the slit is small.
    pub reliable: bool,
}

impl LimitProbe {
    pub fn n(&self) -> usize {
        self.time.n
    }

    pub fn t(&self) -> &Interval {
        &self.time.t
    }

    /// `max_{i,j} |width^i / width^j - 1|` over the `α_{2n}^i`.
    pub fn collar_gap(&self) -> Interval {
        let mut gap = Interval::from_f64(crate::numeric::Precision(self.time.t.prec()), 0.0);
        for a in &self.widths {
            for b in &self.widths {
                gap = gap.max(&a.width.relative_gap(&b.width));
            }
        }
        gap
    }
}

pub fn limit_probe(s: &SlitSurface, n: usize) -> Result<LimitProbe> {
    let time = sample_time(s, n)?;
    let fam = s.family();
    let u = fam
        .u(n)
        .ok_or_else(|| Error::InsufficientDepth(format!("no target tuple for level {n}")))?;
    let mut pants = Vec::with_capacity(2 * s.tori());
    for i in 0..s.tori() {
        pants.push(s.convergent_curve(i, 2 * n as isize)?);
    }
    for i in 0..s.tori() {
        pants.push(Curve::boundary(i));
    }
    let pants_hyp = pants
        .iter()
        .map(|c| hyperbolic_surrogate(s, c, &time.t))
        .collect::<Result<Vec<_>>>()?;
    let widths = pants_hyp[..s.tori()]
        .iter()
        .map(|h| collar_width_of(&h.value, h.reliable))
        .collect();
    let log_coeffs = (0..s.tori())
        .map(|i| {
            let a = fam
                .expansion(i)
                .coeff(2 * n + 1)
                .ok_or_else(|| Error::InsufficientDepth(format!("a_{} missing", 2 * n + 1)))?;
            Ok(Interval::from_integer(s.precision(), a).ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = (0..s.tori())
        .map(|i| Interval::from_integer(s.precision(), &Integer::from(u[i])).mul(&s.torus(i).norm))
        .collect();
    let reliable = pants_hyp.iter().all(|h| h.reliable) && s.slit_is_small_at(&time.t);
    Ok(LimitProbe {
        time,
        pants,
        pants_hyp,
        widths,
        log_coeffs,
        weights,
        reliable,
    })
}

/// `Σ_i w_n^i I(γ, ν^i)`
pub fn target_weight(s: &SlitSurface, probe: &LimitProbe, gamma: &Curve) -> Result<Interval> {
    let mut total = s.constant(0.0);
    for (i, w) in probe.weights.iter().enumerate() {
        total = total.add(&w.mul(&s.foliation_intersection(gamma, i)?));
    }
    Ok(total)
}

/// `Σ_i I(γ, α_{2n}^i) ln a_{2n+1}^i`
pub fn intersection_weight(s: &SlitSurface, probe: &LimitProbe, gamma: &Curve) -> Interval {
    let mut total = s.constant(0.0);
    for (i, log_a) in probe.log_coeffs.iter().enumerate() {
        let count = s.intersection_number(gamma, &probe.pants[i]);
        total = total.add(&Interval::from_integer(s.precision(), &count).mul(log_a));
    }
    total
}

#[derive(Debug, Clone)]
pub struct RatioRow {
    pub n: usize,
    pub t: Interval,
    pub estimates: [PantsEstimate; 2],
    /// Ratio of width-only estimates.
    pub lhs: Interval,
    /// Ratio of width+twist estimates.
    pub lhs_twist: Interval,
    pub mid: Interval,
    pub rhs: Interval,
    pub lhs_rhs_gap: Interval,
    pub lhs_mid_gap: Interval,
    pub mid_rhs_gap: Interval,
    pub collar_gap: Interval,
    pub reliable: bool,
}

fn check_test_curve(c: &Curve) -> Result<()> {
    if c.is_boundary() {
        return Err(Error::InvalidTestCurve(c.to_string()));
    }
    Ok(())
}

pub fn ratio_row(s: &SlitSurface, gamma1: &Curve, gamma2: &Curve, n: usize) -> Result<RatioRow> {
    check_test_curve(gamma1)?;
    check_test_curve(gamma2)?;
    ratio_row_at(s, &limit_probe(s, n)?, gamma1, gamma2)
}

/// Same as [`ratio_row`] with the probe already computed.
pub fn ratio_row_at(s: &SlitSurface, probe: &LimitProbe, gamma1: &Curve, gamma2: &Curve) -> Result<RatioRow> {
    check_test_curve(gamma1)?;
    check_test_curve(gamma2)?;
    let t = probe.t().clone();
    let e1 = pants_length_estimate(s, gamma1, &t, &probe.pants)?;
    let e2 = pants_length_estimate(s, gamma2, &t, &probe.pants)?;
    let same = gamma1 == gamma2;
    let ratio = |a: &Interval, b: &Interval| if same { s.constant(1.0) } else { a.div(b) };
    let lhs = ratio(&e1.width_only, &e2.width_only);
    let lhs_twist = ratio(&e1.with_twist, &e2.with_twist);
    let mid = ratio(
        &intersection_weight(s, probe, gamma1),
        &intersection_weight(s, probe, gamma2),
    );
    let rhs = ratio(&target_weight(s, probe, gamma1)?, &target_weight(s, probe, gamma2)?);
    let reliable = probe.reliable && e1.reliable && e2.reliable;
    Ok(RatioRow {
        n: probe.n(),
        lhs_rhs_gap: lhs.relative_gap(&rhs),
        lhs_mid_gap: lhs.relative_gap(&mid),
        mid_rhs_gap: mid.relative_gap(&rhs),
        collar_gap: probe.collar_gap(),
        t,
        estimates: [e1, e2],
        lhs,
        lhs_twist,
        mid,
        rhs,
        reliable,
    })
}

/// One row per level; levels are evaluated in parallel and returned in order.
pub fn ratio_report(s: &SlitSurface, gamma1: &Curve, gamma2: &Curve, levels: &[usize]) -> Result<Vec<RatioRow>> {
    check_test_curve(gamma1)?;
    check_test_curve(gamma2)?;
    levels.par_iter().map(|&n| ratio_row(s, gamma1, gamma2, n)).collect()
}

#[derive(Debug, Clone)]
pub struct BetaDecayRow {
    pub t: Interval,
    pub alpha: Curve,
    pub alpha_intersection: Integer,
    pub beta_hyp: HyperbolicSurrogate,
    /// `I(γ, β) width(β)`
    pub beta_width_only: Interval,
    /// `I(γ, β) (width(β) + 1)`: a slit curve has no cylinder, so its twist center is 0.
    pub beta_with_twist: Interval,
    /// `I(γ, α) width(α)`
    pub alpha_contribution: Interval,
    /// `beta_width_only / alpha_contribution`
    pub ratio: Interval,
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct BetaDecay {
    pub rows: Vec<BetaDecayRow>,
    /// Least-squares slope of the `α` contribution against `t` over reliable
    /// rows, fitted on midpoints. Contributions overflow `f64` quickly.
    pub alpha_slope: Option<Float>,
}

pub fn beta_decay_report(s: &SlitSurface, gamma: &Curve, times: &[Interval]) -> Result<BetaDecay> {
    let Curve::Bridge { torus, .. } = gamma else {
        return Err(Error::InvalidTestCurve(gamma.to_string()));
    };
    let torus = *torus;
    let beta = Curve::boundary(torus);
    let rows = times
        .par_iter()
        .map(|t| {
            let alpha = shortest_torus_curve(s, torus, t)?;
            let alpha_hyp = hyperbolic_surrogate(s, &alpha.curve, t)?;
            let alpha_width = collar_width_of(&alpha_hyp.value, alpha_hyp.reliable);
            let alpha_intersection = s.intersection_number(gamma, &alpha.curve);
            let beta_hyp = hyperbolic_surrogate(s, &beta, t)?;
            let beta_width = collar_width_of(&beta_hyp.value, beta_hyp.reliable);
            let crossings = Interval::from_integer(s.precision(), &s.intersection_number(gamma, &beta));
            let beta_width_only = crossings.mul(&beta_width.width);
            let beta_with_twist = crossings.mul(&beta_width.width.add(&s.constant(1.0)));
            let alpha_contribution = Interval::from_integer(s.precision(), &alpha_intersection).mul(&alpha_width.width);
            let ratio = beta_width_only.div(&alpha_contribution);
            let reliable = beta_hyp.reliable && alpha_hyp.reliable && alpha_contribution.is_positive();
            Ok(BetaDecayRow {
                t: t.clone(),
                alpha: alpha.curve,
                alpha_intersection,
                beta_hyp,
                beta_width_only,
                beta_with_twist,
                alpha_contribution,
                ratio,
                reliable,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(Float, Float)> = rows
        .iter()
        .filter(|r| r.reliable)
        .map(|r| (r.t.mid(), r.alpha_contribution.mid()))
        .collect();
    Ok(BetaDecay {
        alpha_slope: least_squares_slope(&points),
        rows,
    })
}

fn least_squares_slope(points: &[(Float, Float)]) -> Option<Float> {
    if points.len() < 2 {
        return None;
    }
    let prec = points[0].0.prec();
    let n = points.len() as u32;
    let mean = |f: &dyn Fn(&(Float, Float)) -> &Float| {
        let mut sum = Float::with_val(prec, 0);
        for p in points {
            sum += f(p);
        }
        sum / n
    };
    let mx = mean(&|p| &p.0);
    let my = mean(&|p| &p.1);
    let mut sxx = Float::with_val(prec, 0);
    let mut sxy = Float::with_val(prec, 0);
    for (x, y) in points {
        let dx = Float::with_val(prec, x - &mx);
        sxy += Float::with_val(prec, &dx * &Float::with_val(prec, y - &my));
        sxx += Float::with_val(prec, dx.square_ref());
    }
    (sxx.is_sign_positive() && !sxx.is_zero()).then(|| sxy / sxx)
}

#[derive(Debug, Clone)]
pub struct SimplexRow {
    pub n: usize,
    pub empirical: Vec<Interval>,
    pub target: Vec<Interval>,
    /// `max_c |empirical_c - target_c|`
    pub gap: Interval,
    pub reliable: bool,
}

pub fn check_panel(s: &SlitSurface, panel: &[Curve]) -> Result<()> {
    for c in panel {
        if !c.is_torus() {
            return Err(Error::InvalidTestCurve(c.to_string()));
        }
    }
    for i in 0..s.tori() {
        if !panel.iter().any(|c| c.torus_index() == i) {
            return Err(Error::IncompletePanel(i));
        }
    }
    Ok(())
}

/// Projective length vectors of a curve panel against the moving target.
pub fn simplex_sweep(s: &SlitSurface, panel: &[Curve], levels: &[usize]) -> Result<Vec<SimplexRow>> {
    check_panel(s, panel)?;
    levels
        .par_iter()
        .map(|&n| simplex_row_at(s, &limit_probe(s, n)?, panel))
        .collect()
}

pub fn simplex_row_at(s: &SlitSurface, probe: &LimitProbe, panel: &[Curve]) -> Result<SimplexRow> {
    check_panel(s, panel)?;
    let mut raw = Vec::with_capacity(panel.len());
    let mut targets = Vec::with_capacity(panel.len());
    let mut reliable = probe.reliable;
    for c in panel {
        let est = pants_length_estimate(s, c, probe.t(), &probe.pants)?;
        reliable &= est.reliable;
        raw.push(est.width_only);
        targets.push(target_weight(s, probe, c)?);
    }
    let normalize = |v: Vec<Interval>| {
        let total = v.iter().fold(s.constant(0.0), |acc, x| acc.add(x));
        v.into_iter().map(|x| x.div(&total)).collect::<Vec<_>>()
    };
    let empirical = normalize(raw);
    let target = normalize(targets);
    let gap = empirical
        .iter()
        .zip(&target)
        .fold(s.constant(0.0), |acc, (a, b)| acc.max(&a.sub(b).abs()));
    Ok(SimplexRow {
        n: probe.n(),
        empirical,
        target,
        gap,
        reliable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::{generate_slope_family, DenseSequence, FamilySpec, GrowthMode};
    use crate::numeric::Precision;
    use rug::Rational;

    fn surface(d: usize, levels: usize, mode: GrowthMode) -> SlitSurface {
        let fam = generate_slope_family(
            &FamilySpec::new(d, levels, mode),
            &DenseSequence::default_for(d, levels),
        )
        .unwrap();
        SlitSurface::new(fam, Rational::from((1, 100)), Precision::default()).unwrap()
    }

    #[test]
    fn single_torus_time_is_the_balanced_time() {
        let s = surface(0, 3, GrowthMode::default());
        let st = sample_time(&s, 2).unwrap();
        let direct = balanced_time(&s, &s.convergent_curve(0, 4).unwrap()).unwrap();
        assert_eq!(st.t, direct);
        assert!(st.spread.contains_zero());
    }

    #[test]
    fn strict_first_level_endpoints() {
        let s = surface(2, 2, GrowthMode::Strict);
        let st = sample_time(&s, 1).unwrap();
        let bal: Vec<Interval> = (0..3)
            .map(|i| balanced_time(&s, &s.convergent_curve(i, 2).unwrap()).unwrap())
            .collect();
        assert!(bal.contains(&st.lo));
        assert!(bal.contains(&st.hi));
        assert!(st.lo.lo() <= st.t.lo() && st.t.hi() <= st.hi.hi());
        assert!(sample_time(&s, 3).is_err());
    }

    #[test]
    fn identical_test_curves_give_unit_ratios() {
        let s = surface(2, 4, GrowthMode::default());
        let g = Curve::torus(0, 1, 0).unwrap();
        let row = ratio_row(&s, &g, &g, 3).unwrap();
        for x in [&row.lhs, &row.mid, &row.rhs] {
            assert_eq!(x.to_f64(), 1.0);
            assert_eq!(x.width().to_f64(), 0.0);
        }
        assert!(matches!(
            ratio_row(&s, &Curve::boundary(0), &g, 3),
            Err(Error::InvalidTestCurve(_))
        ));
    }

    #[test]
    fn beta_report_needs_a_bridge() {
        let s = surface(2, 2, GrowthMode::Strict);
        let err = beta_decay_report(&s, &Curve::torus(0, 1, 0).unwrap(), &[s.constant(1.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidTestCurve(_)));
        let g = Curve::bridge(0, 3, 1).unwrap();
        let rep = beta_decay_report(&s, &g, &[s.constant(3.0), s.constant(6.0)]).unwrap();
        for row in &rep.rows {
            assert_eq!(s.intersection_number(&g, &Curve::boundary(0)), 2);
            assert!(row.beta_width_only.is_positive());
        }
    }

    #[test]
    fn panel_must_cover_every_torus() {
        let s = surface(2, 4, GrowthMode::default());
        let panel = vec![Curve::torus(0, 1, 0).unwrap(), Curve::torus(1, 1, 0).unwrap()];
        assert!(matches!(
            simplex_sweep(&s, &panel, &[3]),
            Err(Error::IncompletePanel(2))
        ));
    }

    #[test]
    fn simplex_vectors_are_normalized() {
        let s = surface(2, 5, GrowthMode::default());
        let panel: Vec<Curve> = (0..3).map(|i| Curve::torus(i, 1, 0).unwrap()).collect();
        let rows = simplex_sweep(&s, &panel, &[3, 4, 5]).unwrap();
        let one = s.constant(1.0);
        for row in rows {
            for v in [&row.empirical, &row.target] {
                let total = v.iter().fold(s.constant(0.0), |acc, x| acc.add(x));
                assert!(total.overlaps(&one), "level {}", row.n);
            }
        }
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(Float, Float)> = [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]
            .iter()
            .map(|&(x, y)| (Float::with_val(64, x), Float::with_val(64, y)))
            .collect();
        assert_eq!(least_squares_slope(&pts).unwrap(), 2.0);
        assert!(least_squares_slope(&pts[..1]).is_none());
    }
}
