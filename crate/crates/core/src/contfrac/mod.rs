//! Exact continued fractions `[0; a_1, a_2, ...]` and the coupled slope
//! families built from them.

mod dense;
mod family;
mod format;
mod lemma;

pub use dense::{default_dense_sequence, DenseSequence};
pub use family::{
    generate_slope_family, ActiveBound, ApproxLevel, BudgetOverflow, FamilySpec, GrowthMode, LevelAudit, SlopeFamily,
    DEFAULT_BIT_BUDGET,
};
pub use format::{default_s0, parse_family, write_family, FamilyFile, FamilyStatus};
pub use lemma::{check_conditions, verify_lemma_slopes, ConditionCheck, ConditionReport, LemmaReport, LevelRow};

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RationalInterval {
    pub fn new(a: Rational, b: Rational) -> Self {
        if a <= b {
            RationalInterval { lo: a, hi: b }
        } else {
            RationalInterval { lo: b, hi: a }
        }
    }

    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// A continued fraction `[0; a_1, ..., a_N]` with its exact convergent table.
///
/// Convergents are indexed from `-1`: `(p_{-1}, q_{-1}) = (1, 0)` and
/// `(p_0, q_0) = (0, 1)`, then `p_n = a_n p_{n-1} + p_{n-2}` and likewise for `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFExpansion {
    coeffs: Vec<Integer>,
    // p[k], q[k] hold the convergent of index k - 1
    p: Vec<Integer>,
    q: Vec<Integer>,
}

impl CFExpansion {
    /// Validates the coefficients; the convergent table starts empty.
    pub fn new(coeffs: Vec<Integer>) -> Result<Self> {
        if let Some((i, a)) = coeffs.iter().enumerate().find(|(_, a)| **a <= 0) {
            return Err(Error::InvalidCoefficient {
                index: i + 1,
                value: a.to_string(),
            });
        }
        Ok(CFExpansion {
            coeffs,
            p: vec![Integer::from(1), Integer::from(0)],
            q: vec![Integer::from(0), Integer::from(1)],
        })
    }

    /// Builds the expansion and fills the convergent table to full depth.
    pub fn with_convergents(coeffs: Vec<Integer>) -> Result<Self> {
        let mut cf = CFExpansion::new(coeffs)?;
        let n = cf.len();
        cf.extend_convergents(n)?;
        Ok(cf)
    }

    pub fn from_u64(coeffs: &[u64]) -> Result<Self> {
        CFExpansion::with_convergents(coeffs.iter().map(|&a| Integer::from(a)).collect())
    }

    /// Number of coefficients `N`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Depth to which convergents are available.
    pub fn depth(&self) -> usize {
        self.p.len() - 2
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// `a_n` for `1 <= n <= N`.
    pub fn coeff(&self, n: usize) -> Option<&Integer> {
        n.checked_sub(1).and_then(|k| self.coeffs.get(k))
    }

    /// Appends `a_{N+1}` and its convergent.
    pub fn push(&mut self, a: Integer) -> Result<()> {
        if a <= 0 {
            return Err(Error::InvalidCoefficient {
                index: self.coeffs.len() + 1,
                value: a.to_string(),
            });
        }
        self.coeffs.push(a);
        let n = self.coeffs.len();
        self.extend_convergents(n)
    }

    /// Fills the convergent table up to depth `up_to`.
    pub fn extend_convergents(&mut self, up_to: usize) -> Result<()> {
        if up_to > self.coeffs.len() {
            return Err(Error::InsufficientDepth(format!(
                "convergents to depth {up_to} need {up_to} coefficients, have {}",
                self.coeffs.len()
            )));
        }
        while self.depth() < up_to {
            let n = self.depth() + 1;
            let a = &self.coeffs[n - 1];
            let k = self.p.len();
            let p = Integer::from(a * &self.p[k - 1]) + &self.p[k - 2];
            let q = Integer::from(a * &self.q[k - 1]) + &self.q[k - 2];
            self.p.push(p);
            self.q.push(q);
        }
        Ok(())
    }

    /// `(p_n, q_n)` for `-1 <= n <= depth`.
    pub fn convergent(&self, n: isize) -> Result<(&Integer, &Integer)> {
        let k = n + 1;
        if k < 0 || k as usize >= self.p.len() {
            return Err(Error::InsufficientDepth(format!(
                "convergent {n} requested, table filled to {}",
                self.depth()
            )));
        }
        Ok((&self.p[k as usize], &self.q[k as usize]))
    }

    pub fn p(&self, n: isize) -> &Integer {
        self.convergent(n).expect("convergent in range").0
    }

    pub fn q(&self, n: isize) -> &Integer {
        self.convergent(n).expect("convergent in range").1
    }

    /// Exact interval `[1/(q_n + q_{n+1}), 1/q_{n+1}]` containing `|p_n - q_n θ|`.
    pub fn approximation_gap(&self, n: usize) -> Result<RationalInterval> {
        if n + 1 > self.depth() {
            return Err(Error::InsufficientDepth(format!(
                "gap at depth {n} needs q_{}, table filled to {}",
                n + 1,
                self.depth()
            )));
        }
        let qn = self.q(n as isize);
        let qn1 = self.q(n as isize + 1);
        let lo = Rational::from((Integer::from(1), Integer::from(qn + qn1)));
        let hi = Rational::from((Integer::from(1), qn1.clone()));
        Ok(RationalInterval::new(lo, hi))
    }

    /// All θ whose expansion starts with the first `n` coefficients:
    /// the interval between `p_n/q_n` and `(p_n + p_{n-1})/(q_n + q_{n-1})`.
    pub fn bracket(&self, n: usize) -> Result<RationalInterval> {
        let (pn, qn) = self.convergent(n as isize)?;
        let (pm, qm) = self.convergent(n as isize - 1)?;
        let a = Rational::from((pn.clone(), qn.clone()));
        let b = Rational::from((Integer::from(pn + pm), Integer::from(qn + qm)));
        Ok(RationalInterval::new(a, b))
    }

    /// Enclosure of θ at the deepest available convergent.
    pub fn theta_interval(&self) -> RationalInterval {
        self.bracket(self.depth()).expect("depth is filled")
    }

    /// Shallowest bracket of width below `10^-precision`.
    pub fn theta_enclosure(&self, precision: u32) -> Result<RationalInterval> {
        let tol = Rational::from((Integer::from(1), Integer::from(Integer::u_pow_u(10, precision))));
        for n in 0..=self.depth() {
            let b = self.bracket(n)?;
            if b.width() < tol {
                return Ok(b);
            }
        }
        Err(Error::InsufficientDepth(format!(
            "{} coefficients do not pin θ to 1e-{precision}",
            self.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cf: &CFExpansion) -> Vec<(i64, i64)> {
        (1..=cf.depth() as isize)
            .map(|n| (cf.p(n).to_i64().unwrap(), cf.q(n).to_i64().unwrap()))
            .collect()
    }

    #[test]
    fn fibonacci_convergents() {
        let cf = CFExpansion::from_u64(&[1, 1, 1, 1, 1]).unwrap();
        assert_eq!(table(&cf), vec![(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]);
    }

    #[test]
    fn silver_convergents_match_direct_evaluation() {
        // 1/(2+1/(2+1/2)) = 5/12, truncations 1/2 and 2/5
        let cf = CFExpansion::from_u64(&[2, 2, 2]).unwrap();
        assert_eq!(table(&cf), vec![(1, 2), (2, 5), (5, 12)]);
        let direct =
            Rational::from(1) / (Rational::from(2) + Rational::from(1) / (Rational::from(2) + Rational::from((1, 2))));
        assert_eq!(direct, Rational::from((5, 12)));
    }

    #[test]
    fn single_level() {
        let cf = CFExpansion::from_u64(&[7]).unwrap();
        assert_eq!(table(&cf), vec![(1, 7)]);
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        let err = CFExpansion::with_convergents(vec![Integer::from(1), Integer::from(0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidCoefficient { index: 2, .. }));
        assert!(CFExpansion::from_u64(&[3]).unwrap().push(Integer::from(-2)).is_err());
    }

    #[test]
    fn partial_extension() {
        let mut cf = CFExpansion::new(vec![Integer::from(1); 4]).unwrap();
        cf.extend_convergents(2).unwrap();
        assert_eq!(cf.depth(), 2);
        assert!(cf.convergent(3).is_err());
        assert!(cf.extend_convergents(5).is_err());
    }

    #[test]
    fn approximation_gaps() {
        let fib = CFExpansion::from_u64(&[1; 6]).unwrap();
        let g = fib.approximation_gap(3).unwrap();
        assert_eq!(g.lo, Rational::from((1, 8)));
        assert_eq!(g.hi, Rational::from((1, 5)));

        let g0 = fib.approximation_gap(0).unwrap();
        assert_eq!(g0.lo, Rational::from((1, 2)));
        assert_eq!(g0.hi, Rational::from((1, 1)));

        let silver = CFExpansion::from_u64(&[2, 2, 2, 2]).unwrap();
        let g = silver.approximation_gap(2).unwrap();
        assert_eq!(g.lo, Rational::from((1, 17)));
        assert_eq!(g.hi, Rational::from((1, 12)));
        assert!(silver.approximation_gap(4).is_err());
    }

    #[test]
    fn theta_enclosures() {
        let golden = CFExpansion::from_u64(&[1; 12]).unwrap();
        let e = golden.theta_enclosure(2).unwrap();
        let target = Rational::from((6180, 10000));
        assert!(e.contains(&target) || (e.lo.to_f64() - 0.618034).abs() < 1e-2);
        assert!(e.contains(&Rational::from((618034, 1000000))));
        assert!(e.width() < (1, 100));

        let silver = CFExpansion::from_u64(&[2; 12]).unwrap();
        let e = silver.theta_enclosure(2).unwrap();
        assert!(e.contains(&Rational::from((414214, 1000000))));

        let one = CFExpansion::from_u64(&[5]).unwrap();
        let e = one.theta_enclosure(0).unwrap();
        assert_eq!(e.lo, Rational::from((1, 6)));
        assert_eq!(e.hi, Rational::from((1, 5)));

        assert!(CFExpansion::from_u64(&[1, 1]).unwrap().theta_enclosure(5).is_err());
    }
}
