//! Exact checks of the generation conditions and of the growth consequences
//! they imply for the denominators.

use rug::{Integer, Rational};

use super::{GrowthMode, SlopeFamily};
use crate::numeric::{cmp_integer_exp, Interval, Precision};

/// Outcome of one exact check over a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl ConditionCheck {
    fn new(name: &'static str) -> Self {
        ConditionCheck {
            name,
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(ConditionCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Completed levels visible in the coefficient lists.
fn visible_levels(fam: &SlopeFamily) -> usize {
    fam.depth().saturating_sub(1) / 2
}

/// `a > exp(x)` decided exactly, with a cheap size test first.
fn exceeds_exp(a: &Integer, x: &Integer) -> bool {
    let exp_bits = x.to_f64() * std::f64::consts::LOG2_E;
    let a_bits = f64::from(a.significant_bits());
    if exp_bits > a_bits + 2.0 {
        return false;
    }
    if exp_bits + 2.0 < a_bits - 1.0 {
        return true;
    }
    cmp_integer_exp(a, x).is_gt()
}

/// Checks the seed `a_1 = 1` and conditions (i)-(iv) plus the equality of
/// odd denominators, all in exact integer arithmetic.
pub fn check_conditions(fam: &SlopeFamily) -> ConditionReport {
    let mut seed = ConditionCheck::new("seed");
    let mut dominance = ConditionCheck::new("i");
    let mut proportional = ConditionCheck::new("ii");
    let mut growth = ConditionCheck::new("iii");
    let mut common = ConditionCheck::new("iv");
    let mut odd_q = ConditionCheck::new("odd-q");

    for (i, cf) in fam.expansions().iter().enumerate() {
        seed.record(cf.coeff(1).is_some_and(|a| *a == 1), || format!("a_1^{i} != 1"));
    }
    let levels = visible_levels(fam);
    let odd_equal = |n: isize| {
        let q0 = fam.expansion(0).q(n);
        fam.expansions().iter().all(|cf| cf.q(n) == q0)
    };
    odd_q.record(odd_equal(1), || "q_1 differs".into());

    for k in 1..=levels {
        let Some(u) = fam.u(k) else {
            proportional.record(false, || format!("level {k}: no target tuple"));
            continue;
        };
        let u_max = *u.iter().max().expect("non-empty");
        for (i, cf) in fam.expansions().iter().enumerate() {
            let prev = cf.coeff(2 * k - 1).expect("depth");
            let even = cf.coeff(2 * k).expect("depth");
            let floor = Integer::from(prev.max(&Integer::from(u_max)) * k as u64);
            dominance.record(*even > floor, || {
                format!("level {k}, torus {i}: a_{} = {even} <= {floor}", 2 * k)
            });
        }

        let a0 = fam.expansion(0).coeff(2 * k).expect("depth");
        let (m, rem) = a0.clone().div_rem(Integer::from(u[0]));
        let multiple = rem == 0
            && m > 0
            && fam
                .expansions()
                .iter()
                .zip(u)
                .all(|(cf, &ui)| *cf.coeff(2 * k).expect("depth") == Integer::from(&m * ui));
        proportional.record(multiple, || {
            format!("level {k}: even coefficients are not a multiple of u_{k}")
        });

        for (i, cf) in fam.expansions().iter().enumerate() {
            let even = cf.coeff(2 * k).expect("depth");
            let odd = cf.coeff(2 * k + 1).expect("depth");
            let ok = match fam.mode() {
                GrowthMode::Strict => exceeds_exp(odd, &Integer::from(even * k as u64)),
                GrowthMode::Scaled { power } => *odd > GrowthMode::scaled_bound(power, k, even),
            };
            growth.record(ok, || {
                format!("level {k}, torus {i}: a_{} below the growth bound", 2 * k + 1)
            });
        }

        let products: Vec<Integer> = fam
            .expansions()
            .iter()
            .map(|cf| Integer::from(cf.coeff(2 * k + 1).expect("depth") * cf.q(2 * k as isize)))
            .collect();
        common.record(products.iter().all(|p| *p == products[0]), || {
            format!("level {k}: a_{} q_{} differ across tori", 2 * k + 1, 2 * k)
        });
        odd_q.record(odd_equal(2 * k as isize + 1), || {
            format!("level {k}: q_{} differ", 2 * k + 1)
        });
    }

    ConditionReport {
        checks: vec![seed, dominance, proportional, growth, common, odd_q],
    }
}

/// Per-level row of the slope lemma report.
#[derive(Debug, Clone)]
pub struct LevelRow {
    pub level: usize,
    pub odd_q_equal: bool,
    /// `max_{i,j} |(q_{2k}^i / q_{2k}^j)(u_k^j / u_k^i) - 1|`, exact.
    pub q_ratio_gap: Rational,
    /// The same quantity for the pair `(0, 1)`, when `d >= 1`.
    pub q_ratio_gap_01: Option<Rational>,
    /// `max_{i,j} |ln a_{2k+1}^i / ln a_{2k+1}^j - 1|`.
    pub log_ratio_gap: Interval,
}

#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub rows: Vec<LevelRow>,
    /// Number of `(i, n)` pairs at which `prod a <= q_n <= prod (a + 1)` was tested.
    pub qprod_checked: usize,
    pub qprod_failures: Vec<(usize, usize)>,
}

impl LemmaReport {
    pub fn odd_q_all_exact(&self) -> bool {
        self.rows.iter().all(|r| r.odd_q_equal)
    }

    pub fn qprod_holds(&self) -> bool {
        self.qprod_failures.is_empty()
    }
}

fn ratio_gap(q: &[Integer], u: &[u64], i: usize, j: usize) -> Rational {
    let num = Integer::from(&q[i] * u[j]);
    let den = Integer::from(&q[j] * u[i]);
    let r = Rational::from((num, den)) - 1u32;
    r.abs()
}

/// Exact consequences of the generation conditions, level by level.
pub fn verify_lemma_slopes(fam: &SlopeFamily) -> LemmaReport {
    let prec = Precision::default();
    let tori = fam.tori();
    let levels = visible_levels(fam);
    let mut rows = Vec::with_capacity(levels);
    for k in 1..=levels {
        let n_odd = 2 * k as isize + 1;
        let q0 = fam.expansion(0).q(n_odd);
        let odd_q_equal = fam.expansions().iter().all(|cf| cf.q(n_odd) == q0);
        let q_even: Vec<Integer> = fam.expansions().iter().map(|cf| cf.q(2 * k as isize).clone()).collect();
        let u: Vec<u64> = fam.u(k).map(<[u64]>::to_vec).unwrap_or_else(|| vec![1; tori]);
        let mut q_ratio_gap = Rational::new();
        let logs: Vec<Interval> = fam
            .expansions()
            .iter()
            .map(|cf| Interval::from_integer(prec, cf.coeff(2 * k + 1).expect("depth")).ln())
            .collect();
        let mut log_ratio_gap = Interval::from_f64(prec, 0.0);
        for i in 0..tori {
            for j in 0..tori {
                if i == j {
                    continue;
                }
                let g = ratio_gap(&q_even, &u, i, j);
                if g > q_ratio_gap {
                    q_ratio_gap = g;
                }
                log_ratio_gap = log_ratio_gap.max(&logs[i].relative_gap(&logs[j]));
            }
        }
        rows.push(LevelRow {
            level: k,
            odd_q_equal,
            q_ratio_gap,
            q_ratio_gap_01: (tori > 1).then(|| ratio_gap(&q_even, &u, 0, 1)),
            log_ratio_gap,
        });
    }

    let mut qprod_checked = 0;
    let mut qprod_failures = Vec::new();
    for (i, cf) in fam.expansions().iter().enumerate() {
        let mut lower = Integer::from(1);
        let mut upper = Integer::from(1);
        for n in 1..=cf.depth() {
            let a = cf.coeff(n).expect("depth");
            lower *= a;
            upper *= Integer::from(a + 1u32);
            let q = cf.q(n as isize);
            qprod_checked += 1;
            if !(lower <= *q && *q <= upper) {
                qprod_failures.push((i, n));
            }
        }
    }

    LemmaReport {
        rows,
        qprod_checked,
        qprod_failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::{generate_slope_family, CFExpansion, DenseSequence, FamilySpec};

    fn family(d: usize, levels: usize, mode: GrowthMode) -> SlopeFamily {
        generate_slope_family(
            &FamilySpec::new(d, levels, mode),
            &DenseSequence::default_for(d, levels),
        )
        .unwrap()
    }

    #[test]
    fn strict_family_passes_everything() {
        let fam = family(2, 2, GrowthMode::Strict);
        let rep = check_conditions(&fam);
        assert!(rep.all_passed(), "{rep:?}");
        assert_eq!(rep.get("iii").unwrap().checked, 6);
        let lemma = verify_lemma_slopes(&fam);
        assert!(lemma.odd_q_all_exact());
        assert!(lemma.qprod_holds());
        assert_eq!(lemma.rows.len(), 2);
    }

    #[test]
    fn single_torus_rows_are_trivial() {
        let fam = family(0, 3, GrowthMode::default());
        let lemma = verify_lemma_slopes(&fam);
        for row in &lemma.rows {
            assert_eq!(row.q_ratio_gap, 0);
            assert!(row.q_ratio_gap_01.is_none());
            assert!(row.odd_q_equal);
        }
    }

    #[test]
    fn corrupted_odd_coefficient_breaks_common_product() {
        let fam = family(2, 2, GrowthMode::Strict);
        let mut cfs: Vec<CFExpansion> = fam.expansions().to_vec();
        let mut coeffs = cfs[1].coeffs().to_vec();
        coeffs[2] += 1u32;
        cfs[1] = CFExpansion::with_convergents(coeffs).unwrap();
        let bad = SlopeFamily::from_parts(2, fam.mode(), fam.u_seq().clone(), cfs, fam.audit().to_vec()).unwrap();
        let rep = check_conditions(&bad);
        assert!(!rep.get("iv").unwrap().passed());
        assert!(!rep.get("odd-q").unwrap().passed());
        assert!(rep.get("seed").unwrap().passed());
    }

    #[test]
    fn growth_condition_is_sharp() {
        // e^2 = 7.389..., so 8 clears it and 7 does not
        assert!(exceeds_exp(&Integer::from(8), &Integer::from(2)));
        assert!(!exceeds_exp(&Integer::from(7), &Integer::from(2)));
        assert!(!exceeds_exp(&Integer::from(1000), &Integer::from(100)));
    }
}
