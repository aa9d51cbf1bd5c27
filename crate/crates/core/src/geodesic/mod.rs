//! Length analytics along the Teichmüller geodesic `X_t`.
//!
//! Hyperbolic lengths are never computed directly. A torus curve is measured
//! by its flat cylinder (`Ext = 1 / Mod`), a slit curve by the log-ratio of
//! the shortest curve of its torus to the slit, and the hyperbolic surrogate
//! is that extremal length itself, trusted only while it is at most `0.1`.

mod report;

pub use report::{length_report, write_length_csv, LengthReport, LENGTH_CSV_HEADER};

use rug::Integer;

use crate::error::{Error, Result};
use crate::numeric::Interval;
use crate::surface::{Curve, SlitSurface};

/// Surrogates above this extremal length are excluded from statistics.
pub const RELIABLE_EXT: f64 = 0.1;

/// `t_bal = ½ ln(|q + θp| / |p - θq|)`, where `h_t = v_t`.
pub fn balanced_time(s: &SlitSurface, c: &Curve) -> Result<Interval> {
    if !c.is_torus() {
        return Err(Error::UnsupportedCurve(c.to_string()));
    }
    let (x, y) = s.direction_forms(c)?;
    if !x.is_positive() || !y.is_positive() {
        return Err(Error::InvalidCurve(format!("{c} has a vanishing flat component")));
    }
    Ok(y.div(&x).ln().half())
}

/// The times around the balanced time at which the flat length equals 2.
#[derive(Debug, Clone)]
pub struct ActiveInterval {
    pub curve: Curve,
    pub s_lower: Interval,
    pub balanced: Interval,
    pub s_upper: Interval,
}

/// Solves `ℓ_t = 2`, a quadratic in `z = e^{2t}`:
/// `X² z² - 4(1+θ²) z + Y² = 0`. Returns `None` when the minimum is not below 2.
pub fn active_interval(s: &SlitSurface, c: &Curve) -> Result<Option<ActiveInterval>> {
    let balanced = balanced_time(s, c)?;
    let (x, y) = s.direction_forms(c)?;
    let norm_sq = &s.torus(c.torus_index()).norm_sq;
    let two_n = norm_sq.scale_u32(2);
    let disc = two_n.square().sub(&x.mul(&y).square());
    if !disc.is_positive() {
        return Ok(None);
    }
    let x_sq = x.square();
    // the larger root is cancellation-free; the smaller one follows from z+ z- = Y²/X²
    let z_plus = two_n.add(&disc.sqrt()).div(&x_sq);
    let z_minus = y.square().div(&x_sq.mul(&z_plus));
    Ok(Some(ActiveInterval {
        curve: c.clone(),
        s_lower: z_minus.ln().half(),
        balanced,
        s_upper: z_plus.ln().half(),
    }))
}

#[derive(Debug, Clone)]
pub struct ExtremalEstimate {
    pub value: Interval,
    /// False when the estimate is undefined (degenerate cylinder, slit not
    /// shorter than half the torus curve).
    pub defined: bool,
}

/// Extremal length estimate: `ℓ² / area` of the flat cylinder for a torus
/// curve, `1 / ln((ℓ_α - ℓ_β) / (2ℓ_β))` for a slit curve with `α` the
/// shortest curve of its torus.
pub fn extremal_estimate(s: &SlitSurface, c: &Curve, t: &Interval) -> Result<ExtremalEstimate> {
    match c {
        Curve::Torus { .. } => {
            let g = s.cylinder_geometry(c, t)?;
            if g.degenerate {
                return Ok(ExtremalEstimate {
                    value: s.constant(f64::INFINITY),
                    defined: false,
                });
            }
            Ok(ExtremalEstimate {
                value: g.length.square().div(&g.area),
                defined: true,
            })
        }
        Curve::Boundary { torus } => {
            let alpha = shortest_torus_curve(s, *torus, t)?;
            let beta = s.boundary_length(t);
            let ratio = alpha.length.sub(&beta).div(&beta.scale_u32(2));
            let one = s.constant(1.0);
            if ratio.lo() <= one.hi() {
                return Ok(ExtremalEstimate {
                    value: s.constant(f64::INFINITY),
                    defined: false,
                });
            }
            Ok(ExtremalEstimate {
                value: ratio.ln().recip(),
                defined: true,
            })
        }
        Curve::Bridge { .. } => Err(Error::UnsupportedCurve(c.to_string())),
    }
}

/// Extremal-length surrogate for the hyperbolic length.
///
/// `value` is the extremal estimate itself. The comparison
/// `1/π <= Ext/Hyp <= ½ e^{Hyp/2}` confines the true hyperbolic length to
/// `[lower, upper]` with `upper = π Ext` and `lower = 2 Ext e^{-π Ext / 2}`.
#[derive(Debug, Clone)]
pub struct HyperbolicSurrogate {
    pub value: Interval,
    pub lower: Interval,
    pub upper: Interval,
    pub reliable: bool,
}

pub fn surrogate_from_ext(s: &SlitSurface, ext: &ExtremalEstimate) -> HyperbolicSurrogate {
    let pi = crate::numeric::Interval::pi(s.precision());
    let upper = ext.value.mul(&pi);
    let lower = ext.value.scale_u32(2).mul(&upper.half().neg().exp());
    let reliable = ext.defined && ext.value.is_positive() && ext.value.hi().to_f64() <= RELIABLE_EXT;
    HyperbolicSurrogate {
        value: ext.value.clone(),
        lower,
        upper,
        reliable,
    }
}

pub fn hyperbolic_surrogate(s: &SlitSurface, c: &Curve, t: &Interval) -> Result<HyperbolicSurrogate> {
    let ext = extremal_estimate(s, c, t)?;
    Ok(surrogate_from_ext(s, &ext))
}

/// `Hyp_t e^{2|t - s|} >= Hyp_s`, meaningful only when both surrogates are reliable.
pub fn wolpert_band(s: &SlitSurface, c: &Curve, t: &Interval, t_ref: &Interval) -> Result<Option<bool>> {
    let a = hyperbolic_surrogate(s, c, t)?;
    let b = hyperbolic_surrogate(s, c, t_ref)?;
    if !a.reliable || !b.reliable {
        return Ok(None);
    }
    let stretch = t.sub(t_ref).abs().scale_u32(2).exp();
    Ok(Some(a.value.mul(&stretch).hi() >= b.value.lo()))
}

#[derive(Debug, Clone)]
pub struct CollarWidth {
    /// `2 asinh(1 / sinh(Hyp / 2))`
    pub width: Interval,
    /// `2 ln(4 / Hyp)`, the small-length expansion of the width.
    pub asymptote: Interval,
    /// `-2 ln Hyp`
    pub leading: Interval,
    pub reliable: bool,
}

pub fn collar_width_of(hyp: &Interval, reliable: bool) -> CollarWidth {
    let prec = crate::numeric::Precision(hyp.prec());
    let width = hyp.half().sinh().recip().asinh().scale_u32(2);
    let four = Interval::from_f64(prec, 4.0);
    let asymptote = four.div(hyp).ln().scale_u32(2);
    let leading = hyp.ln().scale_u32(2).neg();
    CollarWidth {
        width,
        asymptote,
        leading,
        reliable,
    }
}

pub fn collar_width(s: &SlitSurface, c: &Curve, t: &Interval) -> Result<CollarWidth> {
    let h = hyperbolic_surrogate(s, c, t)?;
    Ok(collar_width_of(&h.value, h.reliable))
}

/// Twist structure of a short curve, per unit constant.
///
/// Before the balanced time the twist of any transversal is within
/// `radius = 1/Hyp` of 0; afterwards it is within `radius` of `i_alpha`,
/// the cylinder modulus at the balanced time.
#[derive(Debug, Clone)]
pub struct TwistData {
    pub i_alpha: Interval,
    pub balanced: Option<Interval>,
    pub after_balance: bool,
    pub center: Interval,
    pub radius: Interval,
}

impl TwistData {
    /// Bound on `|twist|`.
    pub fn bound(&self) -> Interval {
        self.center.abs().add(&self.radius)
    }
}

pub fn twist_data(s: &SlitSurface, c: &Curve, t: &Interval) -> Result<TwistData> {
    let hyp = hyperbolic_surrogate(s, c, t)?;
    let radius = hyp.value.recip();
    match c {
        Curve::Torus { .. } => {
            let t_bal = balanced_time(s, c)?;
            let i_alpha = s.cylinder_geometry(c, &t_bal)?.modulus;
            let after_balance = t.mid() > t_bal.mid();
            let center = if after_balance {
                i_alpha.clone()
            } else {
                s.constant(0.0)
            };
            Ok(TwistData {
                i_alpha,
                balanced: Some(t_bal),
                after_balance,
                center,
                radius,
            })
        }
        Curve::Boundary { .. } => Ok(TwistData {
            i_alpha: s.constant(0.0),
            balanced: None,
            after_balance: false,
            center: s.constant(0.0),
            radius,
        }),
        Curve::Bridge { .. } => Err(Error::UnsupportedCurve(c.to_string())),
    }
}

/// One pants curve's share of a length estimate.
#[derive(Debug, Clone)]
pub struct PantsTerm {
    pub curve: Curve,
    pub intersection: Integer,
    pub hyp: HyperbolicSurrogate,
    pub width: CollarWidth,
    pub twist: TwistData,
    /// `I · width`
    pub width_only: Interval,
    /// `I · (width + |twist| Hyp)` with the twist bound, that is `I · (width + Hyp |center| + 1)`.
    pub with_twist: Interval,
}

#[derive(Debug, Clone)]
pub struct PantsEstimate {
    pub width_only: Interval,
    pub with_twist: Interval,
    /// `Σ I(γ, α)`, the size of the additive error.
    pub error_budget: Integer,
    pub reliable: bool,
    pub terms: Vec<PantsTerm>,
}

pub fn pants_length_estimate(s: &SlitSurface, gamma: &Curve, t: &Interval, pants: &[Curve]) -> Result<PantsEstimate> {
    let mut width_only = s.constant(0.0);
    let mut with_twist = s.constant(0.0);
    let mut error_budget = Integer::new();
    let mut reliable = true;
    let mut terms = Vec::new();
    let one = s.constant(1.0);
    for alpha in pants {
        let i = s.intersection_number(gamma, alpha);
        if i == 0 {
            continue;
        }
        let hyp = hyperbolic_surrogate(s, alpha, t)?;
        let width = collar_width_of(&hyp.value, hyp.reliable);
        let twist = twist_data(s, alpha, t)?;
        let weight = Interval::from_integer(s.precision(), &i);
        let w = weight.mul(&width.width);
        let tw = weight.mul(&width.width.add(&hyp.value.mul(&twist.center.abs())).add(&one));
        width_only = width_only.add(&w);
        with_twist = with_twist.add(&tw);
        error_budget += &i;
        reliable &= hyp.reliable;
        terms.push(PantsTerm {
            curve: alpha.clone(),
            intersection: i,
            hyp,
            width,
            twist,
            width_only: w,
            with_twist: tw,
        });
    }
    Ok(PantsEstimate {
        width_only,
        with_twist,
        error_budget,
        reliable,
        terms,
    })
}

#[derive(Debug, Clone)]
pub struct ShortestCurve {
    pub curve: Curve,
    /// Convergent index `n`, `-1` for the curve `(1, 0)`.
    pub n: isize,
    pub length: Interval,
}

/// Shortest flat curve of torus `i` at time `t`.
///
/// The minimum is taken over the resolved convergent curves. Any primitive
/// `(p, q)` with `q >= q_N` has `|q + θp| >= q_N` (if `p >= 0`) or
/// `|p - θq| >= θ q_N` (if `p < 0`), so its length is at least
/// `q_N min(e^{-t}, θ e^t) / √(1+θ²)`; the answer is returned only when the
/// minimum is certified to lie below that bound. When two convergents tie
/// within their enclosures (at `t = 0` both `(1, 0)` and `(0, 1)` have
/// length 1) the deeper one is returned.
pub fn shortest_torus_curve(s: &SlitSurface, i: usize, t: &Interval) -> Result<ShortestCurve> {
    if i >= s.tori() {
        return Err(Error::InvalidCurve(format!("torus {i} does not exist")));
    }
    let data = s.torus(i);
    let mut best: Option<(Interval, usize)> = None;
    for (k, cv) in data.convergents.iter().enumerate() {
        let len_sq = s.length_sq_from_forms(i, &cv.x, &cv.y, t);
        let better = match &best {
            None => true,
            Some((b, _)) => len_sq.mid() < b.mid() || len_sq.overlaps(b),
        };
        if better {
            best = Some((len_sq, k));
        }
    }
    let (len_sq, k) = best.expect("at least the curves (1,0) and (0,1)");
    let length = len_sq.sqrt();
    let qn = Interval::from_integer(s.precision(), &data.q_limit);
    let et = t.exp();
    let floor = qn.mul(&et.recip().min(&data.theta.mul(&et))).div(&data.norm);
    if length.hi() >= floor.lo() {
        return Err(Error::InsufficientDepth(format!(
            "torus {i} at t = {}: deeper convergents may be shorter",
            t.mid_string(12)
        )));
    }
    let cv = &data.convergents[k];
    Ok(ShortestCurve {
        curve: Curve::torus(i, cv.p.clone(), cv.q.clone())?,
        n: cv.n,
        length,
    })
}
