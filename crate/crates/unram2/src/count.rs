//! The counting formula: per-tuple indicators, `f_T(d)` and `f(d) = Σ_T f_T(d)`.

use num_rational::Ratio;
use serde::Serialize;

use crate::discs::DiscFactorization;
use crate::gf2::parity;
use crate::group::{GroupPair, PairSpec};
use crate::Error;

/// Local factor at `p = 2` when `d_i = −4`.
///
/// `Kronecker` uses `1 + (∏_{j∈S_i} d_j / 2)`, which agrees with the Rédei
/// 4-rank. `Exponent` raises the symbol to `ord₂(d) = 2`, making the factor
/// always 2; it overcounts (e.g. `d = −20` for `(D₄, C₄)`) and is kept for
/// comparison only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TwoAdicRule {
    #[default]
    Kronecker,
    Exponent,
}

/// Pair data needed to evaluate one `f_T` quickly.
#[derive(Clone, Debug)]
pub struct TermPlan {
    pub t: Vec<u64>,
    /// `S_i` as slot masks.
    pub s_masks: Vec<u64>,
    /// `2ⁿ |Aut_{H,T}|`.
    pub denom: u64,
    pub rule: TwoAdicRule,
}

impl TermPlan {
    pub fn new(spec: &PairSpec) -> Result<Self, Error> {
        Self::with_rule(spec, TwoAdicRule::default())
    }

    pub fn with_rule(spec: &PairSpec, rule: TwoAdicRule) -> Result<Self, Error> {
        let aut = spec.aut_group()?.len() as u64;
        Ok(TermPlan {
            t: spec.t.clone(),
            s_masks: spec.neighbor_masks(),
            denom: (1u64 << spec.dim()) * aut,
            rule,
        })
    }

    pub fn r(&self) -> usize {
        self.s_masks.len()
    }

    /// Inner sum over surjective assignments.
    pub fn raw_sum(&self, fact: &DiscFactorization) -> u128 {
        let w = fact.omega();
        let r = self.r();
        if w < r {
            return 0;
        }
        let mut slots = vec![0u64; r];
        let mut count = 0u128;
        self.dfs(fact, 0, &mut slots, &mut count);
        count << w
    }

    fn dfs(&self, fact: &DiscFactorization, b: usize, slots: &mut [u64], count: &mut u128) {
        let w = fact.omega();
        if b == w {
            if slots.iter().all(|&m| m != 0) && self.nonzero(fact, slots) {
                *count += 1;
            }
            return;
        }
        // Unfilled slots must still be reachable.
        let empty = slots.iter().filter(|&&m| m == 0).count();
        if empty > w - b {
            return;
        }
        for i in 0..slots.len() {
            slots[i] |= 1 << b;
            self.dfs(fact, b + 1, slots, count);
            slots[i] &= !(1 << b);
        }
    }

    /// Whether every local factor `1 + (∏_{j∈S_i} d_j / p)` is nonzero.
    fn nonzero(&self, fact: &DiscFactorization, slots: &[u64]) -> bool {
        for (i, &members) in slots.iter().enumerate() {
            let mut partner = 0u64;
            let mut s = self.s_masks[i];
            while s != 0 {
                let j = s.trailing_zeros() as usize;
                s &= s - 1;
                partner |= slots[j];
            }
            if partner == 0 {
                continue;
            }
            let mut m = members;
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                if b == 0 && fact.ord2 == 2 && self.rule == TwoAdicRule::Exponent {
                    continue;
                }
                if parity(partner & fact.neg[b]) == 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn evaluate(&self, fact: &DiscFactorization) -> CountResult {
        CountResult::new(self.raw_sum(fact), self.denom)
    }
}

/// `f_T(d) = raw_sum / (2ⁿ |Aut_{H,T}|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub raw_sum: u128,
    pub denom: u64,
    pub value: Ratio<u128>,
}

impl CountResult {
    fn new(raw_sum: u128, denom: u64) -> Self {
        CountResult {
            raw_sum,
            denom,
            value: Ratio::new(raw_sum, denom as u128),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.value.is_integer()
    }

    pub fn as_integer(&self) -> Result<u128, Error> {
        if self.is_integral() {
            Ok(self.value.to_integer())
        } else {
            Err(Error::Mismatch(format!(
                "non-integral count {}/{}",
                self.raw_sum, self.denom
            )))
        }
    }
}

/// Per-tuple indicator for `assign[b]` = slot of prime discriminant `b`.
/// Either `0` or `2^ω`.
pub fn tuple_indicator(fact: &DiscFactorization, assign: &[usize], spec: &PairSpec) -> u128 {
    tuple_indicator_with(fact, assign, spec, TwoAdicRule::default())
}

pub fn tuple_indicator_with(
    fact: &DiscFactorization,
    assign: &[usize],
    spec: &PairSpec,
    rule: TwoAdicRule,
) -> u128 {
    let r = spec.r();
    let mut slots = vec![0u64; r];
    for (b, &i) in assign.iter().enumerate() {
        slots[i] |= 1 << b;
    }
    let plan = TermPlan {
        t: spec.t.clone(),
        s_masks: spec.neighbor_masks(),
        denom: 1,
        rule,
    };
    if plan.nonzero(fact, &slots) {
        1u128 << fact.omega()
    } else {
        0
    }
}

pub fn f_t(spec: &PairSpec, fact: &DiscFactorization) -> Result<CountResult, Error> {
    Ok(TermPlan::new(spec)?.evaluate(fact))
}

/// Precomputed terms for every spanning `T ⊆ T₀`.
#[derive(Clone, Debug)]
pub struct CountPlan {
    pub terms: Vec<TermPlan>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalCount {
    pub d: i64,
    pub omega: usize,
    pub per_t: Vec<(Vec<u64>, u128)>,
    pub f: u128,
}

impl CountPlan {
    pub fn new(pair: &GroupPair) -> Result<Self, Error> {
        Self::with_rule(pair, TwoAdicRule::default())
    }

    pub fn with_rule(pair: &GroupPair, rule: TwoAdicRule) -> Result<Self, Error> {
        if !pair.is_admissible() {
            return Err(Error::NotAdmissible(pair.to_text()));
        }
        let terms = pair
            .spanning_subsets()
            .iter()
            .map(|s| TermPlan::with_rule(s, rule))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CountPlan { terms })
    }

    /// Only the `T₀` term.
    pub fn t0_only(pair: &GroupPair) -> Result<Self, Error> {
        Ok(CountPlan {
            terms: vec![TermPlan::new(&pair.spec_t0())?],
        })
    }

    pub fn evaluate(&self, fact: &DiscFactorization) -> Result<TotalCount, Error> {
        let mut per_t = Vec::with_capacity(self.terms.len());
        let mut f = 0;
        for term in &self.terms {
            let v = term.evaluate(fact).as_integer()?;
            f += v;
            per_t.push((term.t.clone(), v));
        }
        Ok(TotalCount {
            d: fact.d,
            omega: fact.omega(),
            per_t,
            f,
        })
    }

    /// `f(d)`; panics on a non-integral term, which would be an internal bug.
    pub fn f(&self, fact: &DiscFactorization) -> u128 {
        self.terms
            .iter()
            .map(|t| t.evaluate(fact).as_integer().expect("integral count"))
            .sum()
    }
}

pub fn f_total(pair: &GroupPair, fact: &DiscFactorization) -> Result<TotalCount, Error> {
    CountPlan::new(pair)?.evaluate(fact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discs::{factor_prime_discriminants, kronecker, sieve_fundamental, Sign, SweepRange};
    use crate::group::{apply_linear, PRESETS};
    use proptest::prelude::*;

    fn fac(d: i64) -> DiscFactorization {
        factor_prime_discriminants(d).unwrap()
    }

    fn d4() -> GroupPair {
        GroupPair::parse("D4:C4").unwrap()
    }

    /// The product formula evaluated literally from Kronecker symbols.
    fn literal_indicator(
        fact: &DiscFactorization,
        assign: &[usize],
        spec: &PairSpec,
        rule: TwoAdicRule,
    ) -> i128 {
        let r = spec.r();
        let s = spec.neighbor_masks();
        let mut d = vec![1i64; r];
        for (b, &i) in assign.iter().enumerate() {
            d[i] *= fact.primes[b].value();
        }
        let mut out = 1i128;
        for i in 0..r {
            let partner: i64 = (0..r).filter(|&j| s[i] >> j & 1 == 1).map(|j| d[j]).product();
            for (b, &slot) in assign.iter().enumerate() {
                if slot != i {
                    continue;
                }
                let p = fact.primes[b].prime() as i64;
                let e = if p == 2 && rule == TwoAdicRule::Exponent { fact.ord2 as u32 } else { 1 };
                out *= 1 + (kronecker(partner, p) as i128).pow(e);
            }
        }
        out
    }

    fn all_assignments(w: usize, r: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..w {
            out = out
                .into_iter()
                .flat_map(|a| (0..r).map(move |i| [a.clone(), vec![i]].concat()))
                .collect();
        }
        out
    }

    #[test]
    fn indicator_examples() {
        let spec = d4().spec_t0();
        let f = fac(-39);
        // −39 = (−3)(13): assign −3 to slot 0.
        assert_eq!(tuple_indicator(&f, &[0, 1], &spec), 4);
        let f = fac(-15);
        assert_eq!(tuple_indicator(&f, &[0, 1], &spec), 0);
    }

    #[test]
    fn indicator_without_edges_is_full() {
        // Every S_i empty: take T = a basis of an abelian-H pair with isolated vertices.
        let pair = GroupPair::parse("D4xC2:D4").unwrap();
        let spec = pair.spec_t0();
        let s = spec.neighbor_masks();
        let f = fac(-1155);
        for a in all_assignments(f.omega(), spec.r()) {
            let isolated = a.iter().all(|&i| s[i] == 0);
            if isolated {
                assert_eq!(tuple_indicator(&f, &a, &spec), 1 << f.omega());
            }
        }
    }

    #[test]
    fn f_t_examples() {
        let spec = d4().spec_t0();
        assert_eq!(f_t(&spec, &fac(-39)).unwrap().value, Ratio::from_integer(1));
        assert_eq!(f_t(&spec, &fac(-3)).unwrap().value, Ratio::from_integer(0));
        assert_eq!(f_t(&spec, &fac(-15)).unwrap().value, Ratio::from_integer(0));
        assert_eq!(f_total(&d4(), &fac(-39)).unwrap().f, 1);
        assert_eq!(f_total(&d4(), &fac(-15)).unwrap().f, 0);
        // Q(√−5) has class group C₂, so no unramified C₄ over it.
        assert_eq!(f_total(&d4(), &fac(-20)).unwrap().f, 0);
        let literal = CountPlan::with_rule(&d4(), TwoAdicRule::Exponent).unwrap();
        assert_eq!(literal.evaluate(&fac(-20)).unwrap().f, 1);
        let bad = d4().spec(vec![1]);
        assert!(f_t(&bad, &fac(-39)).is_err());
    }

    #[test]
    fn few_primes_give_zero() {
        for name in PRESETS {
            let pair = GroupPair::parse(name).unwrap();
            for d in [-3, -4, -15, 21, -8] {
                let f = fac(d);
                if f.omega() < pair.dim() {
                    assert_eq!(f_total(&pair, &f).unwrap().f, 0);
                }
            }
        }
    }

    #[test]
    fn fast_sum_matches_literal_formula_and_is_integral() {
        for (name, rule) in PRESETS.iter().flat_map(|n| [(n, TwoAdicRule::Kronecker), (n, TwoAdicRule::Exponent)]) {
            let pair = GroupPair::parse(name).unwrap();
            let plan = CountPlan::with_rule(&pair, rule).unwrap();
            for sign in [Sign::Neg, Sign::Pos] {
                for f in sieve_fundamental(SweepRange::new(sign, 3000, None).unwrap()) {
                    for (term, spec) in plan.terms.iter().zip(pair.spanning_subsets()) {
                        let literal: i128 = all_assignments(f.omega(), spec.r())
                            .iter()
                            .filter(|a| (0..spec.r()).all(|i| a.contains(&i)))
                            .map(|a| {
                                let v = literal_indicator(&f, a, &spec, rule);
                                assert!(v == 0 || v == 1 << f.omega(), "dichotomy at d={}", f.d);
                                v
                            })
                            .sum();
                        let got = term.evaluate(&f);
                        assert_eq!(got.raw_sum as i128, literal, "{name} {rule:?} d={}", f.d);
                        assert!(got.is_integral(), "{name} d={} raw={}", f.d, got.raw_sum);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn indicator_is_aut_invariant(m in 3i64..3_000_000, neg in any::<bool>(), pick in 0usize..4, seed in any::<u64>()) {
            let d = if neg { -m } else { m };
            prop_assume!(crate::discs::is_fundamental(d));
            let pair = GroupPair::parse(PRESETS[pick]).unwrap();
            let spec = pair.spec_t0();
            let f = fac(d);
            let r = spec.r();
            let assign: Vec<usize> = (0..f.omega()).map(|b| ((seed >> (3 * b)) as usize) % r).collect();
            let base = tuple_indicator(&f, &assign, &spec);
            prop_assert!(base == 0 || base == 1 << f.omega());
            for phi in spec.aut_group().unwrap() {
                // φ sends t_i to t_{σ(i)}.
                let sigma: Vec<usize> = spec.t.iter()
                    .map(|&x| spec.t.binary_search(&apply_linear(&phi, x)).unwrap())
                    .collect();
                let moved: Vec<usize> = assign.iter().map(|&i| sigma[i]).collect();
                prop_assert_eq!(tuple_indicator(&f, &moved, &spec), base);
            }
        }
    }
}
