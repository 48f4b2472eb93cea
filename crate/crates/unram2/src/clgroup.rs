//! Rédei-matrix 4-rank and 2-torsion of (narrow) class groups of quadratic
//! fields, as an oracle independent of the counting formula.

use serde::Serialize;

use crate::count::CountPlan;
use crate::discs::{DiscFactorization, Sieve, Sign, SweepRange};
use crate::gf2::Gf2Matrix;
use crate::group::GroupPair;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedeiReport {
    pub d: i64,
    pub matrix: Gf2Matrix,
    pub rk4: u32,
    /// `|Cl[4]/Cl[2]| = 2^rk4`.
    pub cl42: u64,
}

/// Entry `(i,j)`, `i ≠ j`, is set iff `(q_j / p_i) = −1`; the diagonal makes
/// every row sum to zero. For `d > 0` this is the narrow 4-rank.
pub fn redei_4rank(fact: &DiscFactorization) -> RedeiReport {
    let w = fact.omega();
    let rows: Vec<u64> = (0..w)
        .map(|i| {
            let off = fact.neg[i];
            off | (off.count_ones() as u64 & 1) << i
        })
        .collect();
    let matrix = Gf2Matrix::from_rows(w, rows);
    let rk4 = (w - 1 - matrix.rank()) as u32;
    RedeiReport {
        d: fact.d,
        matrix,
        rk4,
        cl42: 1 << rk4,
    }
}

/// `|Cl[2]| = 2^{ω−1}` (narrow for `d > 0`).
pub fn two_torsion_order(fact: &DiscFactorization) -> u64 {
    1 << (fact.omega() - 1)
}

/// `4 f(d) / 2^ω + 1 = |Cl[4]/Cl[2]|` for the pair `(D₄, C₄)`.
pub fn cross_check_d4(plan: &CountPlan, fact: &DiscFactorization) -> Result<bool, Error> {
    let f = plan.evaluate(fact)?.f;
    let lhs = 4 * f + (1u128 << fact.omega());
    let rhs = redei_4rank(fact).cl42 as u128 * (1u128 << fact.omega());
    Ok(lhs == rhs)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RedeiSweep {
    pub sign: i64,
    pub xmax: u64,
    pub checked: u64,
    pub passed: u64,
    pub first_counterexample: Option<i64>,
}

impl RedeiSweep {
    pub fn all_passed(&self) -> bool {
        self.checked == self.passed
    }
}

/// Runs [`cross_check_d4`] on every fundamental `d` with `0 < ±d < xmax`.
pub fn verify_redei(sign: Sign, xmax: u64) -> Result<RedeiSweep, Error> {
    let pair = GroupPair::parse("D4:C4")?;
    let plan = CountPlan::new(&pair)?;
    let sieve = Sieve::new(SweepRange::new(sign, xmax, None)?);
    let parts = sieve.map_segments(|seg, sv| {
        let mut out = RedeiSweep::default();
        sv.visit_segment(seg, |f| {
            out.checked += 1;
            if cross_check_d4(&plan, f).unwrap_or(false) {
                out.passed += 1;
            } else if out.first_counterexample.is_none() {
                out.first_counterexample = Some(f.d);
            }
        });
        out
    });
    let mut total = RedeiSweep {
        sign: sign.as_i64(),
        xmax,
        ..Default::default()
    };
    for p in parts {
        total.checked += p.checked;
        total.passed += p.passed;
        total.first_counterexample = total.first_counterexample.or(p.first_counterexample);
    }
    Ok(total)
}
