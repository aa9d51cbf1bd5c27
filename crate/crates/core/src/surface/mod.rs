//! The slit-torus translation surface.
//!
//! Torus `i` is the unit square torus whose vertical direction has slope
//! `θ^i`; a vertical slit of length `s0` is cut in each torus and the tori
//! are glued cyclically along the slits. Everything here is a homotopy-level
//! quantity, so the position of the slits never enters.
//!
//! A direction `(p, q)` in torus `i` has horizontal and vertical measures
//! `|p - θq| / √(1+θ²)` and `|q + θp| / √(1+θ²)`. Under the flow they scale
//! by `e^t` and `e^{-t}`.
//!
//! The flat cylinder of a torus curve is the torus minus the band swept by
//! the slit moving along the curve. The flow has unit determinant, so cross
//! products are time independent and the band has area
//! `s0 × (horizontal measure at time 0)`.

mod curve;

pub use curve::{intersection_number, parse_curve_list, Curve};

use rug::{Integer, Rational};

use crate::contfrac::{FamilyFile, RationalInterval, SlopeFamily};
use crate::error::{Error, Result};
use crate::numeric::{Interval, Precision};

/// Cached data of the convergent curve `α_n = (p_n, q_n)`.
#[derive(Debug, Clone)]
pub struct ConvergentCurve {
    pub n: isize,
    pub p: Integer,
    pub q: Integer,
    /// `|p - θq|`
    pub x: Interval,
    /// `|q + θp|`
    pub y: Interval,
}

#[derive(Debug, Clone)]
pub struct TorusData {
    pub bracket: RationalInterval,
    pub theta: Interval,
    /// `1 + θ²`
    pub norm_sq: Interval,
    /// `√(1 + θ²)`
    pub norm: Interval,
    /// Convergent curves `n = -1, 0, ..., N-1`.
    pub convergents: Vec<ConvergentCurve>,
    /// `q_N`, the first denominator whose curve is not resolved.
    pub q_limit: Integer,
}

/// Per-torus weights of the vertical foliation `ν = ν^0 ⊔ ... ⊔ ν^d`.
#[derive(Debug, Clone)]
pub struct FoliationWeight {
    pub normalizers: Vec<Interval>,
}

#[derive(Debug, Clone)]
pub struct CylinderGeometry {
    pub length: Interval,
    pub height: Interval,
    pub modulus: Interval,
    pub area: Interval,
    /// The slit band covers the whole torus; no flat cylinder.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct SlitSurface {
    family: SlopeFamily,
    s0: Rational,
    s0_iv: Interval,
    prec: Precision,
    tori: Vec<TorusData>,
    weights: FoliationWeight,
}

/// Exact enclosure of `|a + θ b|` over the bracket, failing if it may vanish.
fn linear_form(prec: Precision, bracket: &RationalInterval, a: &Integer, b: &Integer) -> Result<Interval> {
    let at = |theta: &Rational| Rational::from(theta * b) + a;
    let lo = at(&bracket.lo);
    let hi = at(&bracket.hi);
    if lo.cmp0() != hi.cmp0() || lo.cmp0().is_eq() {
        return Err(Error::InsufficientDepth(format!(
            "the sign of {a} + θ·{b} is not decided by the available coefficients"
        )));
    }
    Ok(Interval::from_rational_bounds(prec, &lo.abs(), &hi.abs()))
}

impl SlitSurface {
    pub fn new(family: SlopeFamily, s0: Rational, prec: Precision) -> Result<Self> {
        if s0 <= 0 || s0 >= (1, 2) {
            return Err(Error::Config(format!("slit length {s0} outside (0, 1/2)")));
        }
        if family.depth() == 0 {
            return Err(Error::InsufficientDepth("family has no coefficients".into()));
        }
        let mut tori = Vec::with_capacity(family.tori());
        for cf in family.expansions() {
            let bracket = cf.theta_interval();
            let theta = Interval::from_rational_bounds(prec, &bracket.lo, &bracket.hi);
            let one = Interval::from_f64(prec, 1.0);
            let norm_sq = one.add(&theta.square());
            let norm = norm_sq.sqrt();
            let top = cf.depth() as isize;
            let mut convergents = Vec::with_capacity(cf.depth() + 1);
            for n in -1..top {
                let (p, q) = cf.convergent(n)?;
                let x = linear_form(prec, &bracket, p, &Integer::from(-q))?;
                let y = linear_form(prec, &bracket, q, p)?;
                convergents.push(ConvergentCurve {
                    n,
                    p: p.clone(),
                    q: q.clone(),
                    x,
                    y,
                });
            }
            tori.push(TorusData {
                bracket,
                theta,
                norm_sq,
                norm,
                convergents,
                q_limit: cf.q(top).clone(),
            });
        }
        let weights = FoliationWeight {
            normalizers: tori.iter().map(|t| t.norm.clone()).collect(),
        };
        let s0_iv = Interval::from_rational(prec, &s0);
        Ok(SlitSurface {
            family,
            s0,
            s0_iv,
            prec,
            tori,
            weights,
        })
    }

    pub fn from_file(file: &FamilyFile, prec: Precision) -> Result<Self> {
        SlitSurface::new(file.family.clone(), file.s0.clone(), prec)
    }

    pub fn family(&self) -> &SlopeFamily {
        &self.family
    }

    pub fn d(&self) -> usize {
        self.family.d()
    }

    pub fn tori(&self) -> usize {
        self.tori.len()
    }

    pub fn s0(&self) -> &Rational {
        &self.s0
    }

    pub fn s0_interval(&self) -> &Interval {
        &self.s0_iv
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Total flat area, one per torus.
    pub fn total_area(&self) -> usize {
        self.tori.len()
    }

    pub fn torus(&self, i: usize) -> &TorusData {
        &self.tori[i]
    }

    pub fn foliation_weight(&self) -> &FoliationWeight {
        &self.weights
    }

    pub fn constant(&self, x: f64) -> Interval {
        Interval::from_f64(self.prec, x)
    }

    /// Largest usable convergent index in torus `i`, that is `N - 1`.
    pub fn max_convergent(&self, i: usize) -> isize {
        self.tori[i].convergents.len() as isize - 2
    }

    /// Cached convergent curve `α_n^i` for `-1 <= n <= N - 1`.
    pub fn convergent(&self, i: usize, n: isize) -> Result<&ConvergentCurve> {
        let idx = n + 1;
        self.tori
            .get(i)
            .and_then(|t| usize::try_from(idx).ok().and_then(|k| t.convergents.get(k)))
            .ok_or_else(|| Error::InsufficientDepth(format!("convergent curve {n} of torus {i} is not resolved")))
    }

    pub fn convergent_curve(&self, i: usize, n: isize) -> Result<Curve> {
        let c = self.convergent(i, n)?;
        Curve::torus(i, c.p.clone(), c.q.clone())
    }

    fn check_torus(&self, i: usize) -> Result<&TorusData> {
        self.tori
            .get(i)
            .ok_or_else(|| Error::InvalidCurve(format!("torus {i} does not exist (d = {})", self.d())))
    }

    /// `(|p - θq|, |q + θp|)` of a directed curve.
    pub fn direction_forms(&self, c: &Curve) -> Result<(Interval, Interval)> {
        let (p, q) = c.direction().ok_or_else(|| Error::UnsupportedCurve(c.to_string()))?;
        let i = c.torus_index();
        let data = self.check_torus(i)?;
        // reuse cached convergent enclosures, which are already resolved
        if let Some(conv) = data.convergents.iter().find(|cv| cv.p == *p && cv.q == *q) {
            return Ok((conv.x.clone(), conv.y.clone()));
        }
        let x = linear_form(self.prec, &data.bracket, p, &Integer::from(-q))?;
        let y = linear_form(self.prec, &data.bracket, q, p)?;
        Ok((x, y))
    }

    /// `(h_t, v_t)` of a torus curve.
    pub fn horizontal_vertical(&self, c: &Curve, t: &Interval) -> Result<(Interval, Interval)> {
        if !c.is_torus() {
            return Err(Error::UnsupportedCurve(c.to_string()));
        }
        let (x, y) = self.direction_forms(c)?;
        let norm = &self.tori[c.torus_index()].norm;
        let et = t.exp();
        Ok((et.mul(&x).div(norm), y.div(&et).div(norm)))
    }

    /// `ℓ_t²` of a direction with forms `(x, y)` in torus `i`.
    pub fn length_sq_from_forms(&self, i: usize, x: &Interval, y: &Interval, t: &Interval) -> Interval {
        let e2t = t.scale_u32(2).exp();
        e2t.mul(&x.square())
            .add(&y.square().div(&e2t))
            .div(&self.tori[i].norm_sq)
    }

    /// Flat length at time `t`.
    ///
    /// A bridge is measured by the documented surrogate: the two slit
    /// crossings `2 s0 e^{-t}` plus the flat length of its torus arc.
    pub fn flat_length(&self, c: &Curve, t: &Interval) -> Result<Interval> {
        match c {
            Curve::Boundary { torus } => {
                self.check_torus(*torus)?;
                Ok(self.boundary_length(t))
            }
            Curve::Torus { torus, .. } => {
                let (x, y) = self.direction_forms(c)?;
                Ok(self.length_sq_from_forms(*torus, &x, &y, t).sqrt())
            }
            Curve::Bridge { torus, .. } => {
                let (x, y) = self.direction_forms(c)?;
                let arc = self.length_sq_from_forms(*torus, &x, &y, t).sqrt();
                Ok(arc.add(&self.boundary_length(t)))
            }
        }
    }

    /// `2 s0 e^{-t}`, the flat length of every slit curve.
    pub fn boundary_length(&self, t: &Interval) -> Interval {
        self.s0_iv.scale_u32(2).div(&t.exp())
    }

    pub fn intersection_number(&self, a: &Curve, b: &Curve) -> Integer {
        intersection_number(a, b)
    }

    /// Intersection with the vertical foliation `ν^i`.
    pub fn foliation_intersection(&self, c: &Curve, i: usize) -> Result<Interval> {
        self.check_torus(i)?;
        if c.is_boundary() || c.torus_index() != i {
            return Ok(self.constant(0.0));
        }
        let (x, _) = self.direction_forms(c)?;
        Ok(x.div(&self.weights.normalizers[i]))
    }

    pub fn cylinder_geometry(&self, c: &Curve, t: &Interval) -> Result<CylinderGeometry> {
        if !c.is_torus() {
            return Err(Error::UnsupportedCurve(c.to_string()));
        }
        let i = c.torus_index();
        let (x, y) = self.direction_forms(c)?;
        let h0 = x.div(&self.tori[i].norm);
        let area = self.constant(1.0).sub(&self.s0_iv.mul(&h0));
        let length = self.length_sq_from_forms(i, &x, &y, t).sqrt();
        let degenerate = !area.is_positive();
        let height = area.div(&length);
        let modulus = height.div(&length);
        Ok(CylinderGeometry {
            length,
            height,
            modulus,
            area,
            degenerate,
        })
    }

    /// The slit is small at time `t` when the shortest convergent curve of
    /// every torus has flat length at most 2 and a non-degenerate cylinder.
    pub fn slit_is_small_at(&self, t: &Interval) -> bool {
        let two = self.constant(2.0);
        (0..self.tori()).all(|i| {
            let best = self.tori[i]
                .convergents
                .iter()
                .map(|cv| (self.length_sq_from_forms(i, &cv.x, &cv.y, t), cv))
                .min_by(|a, b| a.0.mid().partial_cmp(&b.0.mid()).expect("finite"));
            match best {
                Some((len_sq, cv)) => {
                    let curve = Curve::torus(i, cv.p.clone(), cv.q.clone()).expect("convergents are primitive");
                    let short = len_sq.sqrt().hi() <= two.lo();
                    short && self.cylinder_geometry(&curve, t).is_ok_and(|g| !g.degenerate)
                }
                None => false,
            }
        })
    }
}
