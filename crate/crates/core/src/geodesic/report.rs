use std::fmt::Write as _;

use super::{collar_width_of, hyperbolic_surrogate, twist_data, CollarWidth, HyperbolicSurrogate};
use crate::error::Result;
use crate::numeric::Interval;
use crate::surface::{Curve, SlitSurface};

pub const LENGTH_CSV_HEADER: &str = "curve,t,flat,modF,ext,hyp,width,twist_bound,reliable";

/// Everything known about one curve at one time.
#[derive(Debug, Clone)]
pub struct LengthReport {
    pub curve: Curve,
    pub t: Interval,
    pub flat: Interval,
    pub mod_f: Option<Interval>,
    pub hyp: Option<HyperbolicSurrogate>,
    pub width: Option<CollarWidth>,
    pub twist_bound: Option<Interval>,
    /// `h_t` and `v_t` agree within their enclosures.
    pub balanced: bool,
}

impl LengthReport {
    pub fn ext(&self) -> Option<&Interval> {
        self.hyp.as_ref().map(|h| &h.value)
    }

    pub fn reliable(&self) -> bool {
        self.hyp.as_ref().is_some_and(|h| h.reliable)
    }
}

pub fn length_report(s: &SlitSurface, c: &Curve, t: &Interval) -> Result<LengthReport> {
    let flat = s.flat_length(c, t)?;
    let mut report = LengthReport {
        curve: c.clone(),
        t: t.clone(),
        flat,
        mod_f: None,
        hyp: None,
        width: None,
        twist_bound: None,
        balanced: false,
    };
    if c.is_bridge() {
        return Ok(report);
    }
    if c.is_torus() {
        let g = s.cylinder_geometry(c, t)?;
        let (h, v) = s.horizontal_vertical(c, t)?;
        report.balanced = h.overlaps(&v);
        report.mod_f = (!g.degenerate).then_some(g.modulus);
    }
    let hyp = hyperbolic_surrogate(s, c, t)?;
    report.width = Some(collar_width_of(&hyp.value, hyp.reliable));
    report.twist_bound = Some(twist_data(s, c, t)?.bound());
    report.hyp = Some(hyp);
    Ok(report)
}

fn cell(x: Option<&Interval>, digits: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.display(digits))
}

/// CSV with one row per report; missing quantities are written as `-`.
pub fn write_length_csv(rows: &[LengthReport], digits: usize) -> String {
    let mut out = String::from(LENGTH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.curve,
            r.t.display(digits),
            r.flat.display(digits),
            cell(r.mod_f.as_ref(), digits),
            cell(r.ext(), digits),
            cell(r.hyp.as_ref().map(|h| &h.value), digits),
            cell(r.width.as_ref().map(|w| &w.width), digits),
            cell(r.twist_bound.as_ref(), digits),
            r.reliable()
        );
    }
    out
}
