//! Homotopy classes of curves on the slit surface and their literals.
//!
//! | literal    | curve                                                |
//! |------------|------------------------------------------------------|
//! | `T i p/q`  | simple closed curve of slope `(p, q)` inside torus `i` |
//! | `B i`      | the curve around slit `i`                            |
//! | `G i p/q`  | a bridge: crosses the slit curve `i` twice, its arc in torus `i` runs along `(p, q)` |
//!
//! Directions are unoriented and primitive; they are stored with `q > 0`,
//! or as `(1, 0)` when `q = 0`.

use std::fmt;
use std::str::FromStr;

use rug::Integer;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Curve {
    Torus { torus: usize, p: Integer, q: Integer },
    Boundary { torus: usize },
    Bridge { torus: usize, p: Integer, q: Integer },
}

fn normalize(p: Integer, q: Integer) -> Result<(Integer, Integer)> {
    if Integer::from(p.gcd_ref(&q)) != 1 {
        return Err(Error::InvalidCurve(format!("direction ({p}, {q}) is not primitive")));
    }
    if q < 0 || (q == 0 && p < 0) {
        Ok((-p, -q))
    } else {
        Ok((p, q))
    }
}

impl Curve {
    pub fn torus(torus: usize, p: impl Into<Integer>, q: impl Into<Integer>) -> Result<Self> {
        let (p, q) = normalize(p.into(), q.into())?;
        Ok(Curve::Torus { torus, p, q })
    }

    pub fn boundary(torus: usize) -> Self {
        Curve::Boundary { torus }
    }

    pub fn bridge(torus: usize, p: impl Into<Integer>, q: impl Into<Integer>) -> Result<Self> {
        let (p, q) = normalize(p.into(), q.into())?;
        Ok(Curve::Bridge { torus, p, q })
    }

    pub fn torus_index(&self) -> usize {
        match self {
            Curve::Torus { torus, .. } | Curve::Boundary { torus } | Curve::Bridge { torus, .. } => *torus,
        }
    }

    /// Direction of the curve, or of its arc inside the torus for a bridge.
    pub fn direction(&self) -> Option<(&Integer, &Integer)> {
        match self {
            Curve::Torus { p, q, .. } | Curve::Bridge { p, q, .. } => Some((p, q)),
            Curve::Boundary { .. } => None,
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, Curve::Boundary { .. })
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Curve::Torus { .. })
    }

    pub fn is_bridge(&self) -> bool {
        matches!(self, Curve::Bridge { .. })
    }
}

fn det(a: (&Integer, &Integer), b: (&Integer, &Integer)) -> Integer {
    (Integer::from(a.0 * b.1) - Integer::from(a.1 * b.0)).abs()
}

/// Geometric intersection number.
///
/// Curves in different tori are disjoint. Inside one torus the count is the
/// determinant of the two directions; a bridge meets its own slit curve twice.
pub fn intersection_number(a: &Curve, b: &Curve) -> Integer {
    use Curve::*;
    match (a, b) {
        (Boundary { .. }, Boundary { .. }) => Integer::new(),
        (Torus { .. }, Boundary { .. }) | (Boundary { .. }, Torus { .. }) => Integer::new(),
        (Bridge { torus: i, .. }, Boundary { torus: j }) | (Boundary { torus: j }, Bridge { torus: i, .. }) => {
            if i == j {
                Integer::from(2)
            } else {
                Integer::new()
            }
        }
        _ => {
            if a.torus_index() == b.torus_index() {
                det(a.direction().expect("directed"), b.direction().expect("directed"))
            } else {
                Integer::new()
            }
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Torus { torus, p, q } => write!(f, "T {torus} {p}/{q}"),
            Curve::Boundary { torus } => write!(f, "B {torus}"),
            Curve::Bridge { torus, p, q } => write!(f, "G {torus} {p}/{q}"),
        }
    }
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCurve(format!("cannot parse curve literal `{s}`"));
        let fields: Vec<&str> = s.split_whitespace().collect();
        let torus = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let slope = |t: &str| -> Result<(Integer, Integer)> {
            let (p, q) = t.split_once('/').ok_or_else(bad)?;
            Ok((p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?))
        };
        match fields.as_slice() {
            ["T", i, pq] => {
                let (p, q) = slope(pq)?;
                Curve::torus(torus(i)?, p, q)
            }
            ["G", i, pq] => {
                let (p, q) = slope(pq)?;
                Curve::bridge(torus(i)?, p, q)
            }
            ["B", i] => Ok(Curve::boundary(torus(i)?)),
            _ => Err(bad()),
        }
    }
}

/// Parses one curve literal per line; `#` comments and blank lines are skipped.
pub fn parse_curve_list(text: &str) -> Result<Vec<Curve>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let curve = line.parse::<Curve>().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        out.push(curve);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: usize, p: i64, q: i64) -> Curve {
        Curve::torus(i, p, q).unwrap()
    }

    #[test]
    fn literals_round_trip() {
        for lit in ["T 0 1/0", "T 2 3/5", "B 1", "G 0 3/1", "T 1 -2/7"] {
            let c: Curve = lit.parse().unwrap();
            assert_eq!(c.to_string(), lit);
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(t(0, -1, -2), t(0, 1, 2));
        assert_eq!(t(0, -1, 0), t(0, 1, 0));
        assert_eq!("T 0 2/-5".parse::<Curve>().unwrap().to_string(), "T 0 -2/5");
        assert!(Curve::torus(0, 2, 4).is_err());
        assert!(Curve::torus(0, 0, 0).is_err());
        assert!("X 0 1/1".parse::<Curve>().is_err());
        assert!("T a 1/1".parse::<Curve>().is_err());
    }

    #[test]
    fn intersections() {
        assert_eq!(intersection_number(&t(0, 0, 1), &t(0, 1, 0)), 1);
        assert_eq!(intersection_number(&t(0, 1, 2), &t(0, 2, 5)), 1);
        assert_eq!(intersection_number(&t(0, 3, 1), &t(0, 1, 3)), 8);
        assert_eq!(intersection_number(&t(0, 1, 2), &t(1, 2, 5)), 0);
        assert_eq!(intersection_number(&t(0, 1, 1), &Curve::boundary(1)), 0);
        assert_eq!(intersection_number(&t(0, 1, 1), &Curve::boundary(0)), 0);
        let g = Curve::bridge(1, 3, 1).unwrap();
        assert_eq!(intersection_number(&g, &Curve::boundary(1)), 2);
        assert_eq!(intersection_number(&Curve::boundary(1), &g), 2);
        assert_eq!(intersection_number(&g, &Curve::boundary(0)), 0);
        assert_eq!(intersection_number(&g, &t(1, 1, 0)), 1);
        assert_eq!(intersection_number(&g, &t(0, 1, 0)), 0);
    }

    #[test]
    fn curve_lists_report_lines() {
        let list = parse_curve_list("# panel\nT 0 1/0\n\nB 2\n").unwrap();
        assert_eq!(list.len(), 2);
        let err = parse_curve_list("T 0 1/0\nQ 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
