//! Named brute-force verifications shared by the CLI and the acceptance suite.

use serde::Serialize;

use crate::clgroup::verify_redei;
use crate::count::CountPlan;
use crate::discs::{Sieve, Sign, SweepRange};
use crate::forms::{isotropic_bound_report, QuadForm};
use crate::gf2::Gf2Vector;
use crate::group::{maximal_admissible_set, CentralExtension, GroupPair, PRESETS};
use crate::predict::{self, ratio_f64, CongruenceRows, CL_TRUNCATION};
use crate::unlinked::verify_classification;
use crate::Error;

/// Result of one verification.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub failures: u64,
    pub detail: String,
}

impl Outcome {
    fn new(name: &str, checked: u64, failures: u64, detail: String) -> Self {
        Outcome {
            name: name.to_string(),
            passed: failures == 0 && checked > 0,
            checked,
            failures,
            detail,
        }
    }
}

/// Every `(Q, h)` on `F₂ⁿ` with `h ≠ 0`, `1 ≤ n ≤ max_n`.
fn all_form_hyperplanes(max_n: usize) -> impl Iterator<Item = (QuadForm, Gf2Vector)> {
    (1..=max_n).flat_map(|n| {
        let k = n * (n + 1) / 2;
        (0..1u64 << k).flat_map(move |fb| {
            let f = QuadForm::from_upper_bits(n, fb).expect("valid bits");
            (1..1u64 << n).map(move |h| (f.clone(), Gf2Vector::new(n, h)))
        })
    })
}

/// The isotropic bound for every form, hyperplane and admissible `T`.
pub fn quadforms(max_n: usize) -> Result<Outcome, Error> {
    let (mut checked, mut failures, mut subsets) = (0, 0, 0);
    let mut first = String::new();
    for (f, h) in all_form_hyperplanes(max_n) {
        let r = isotropic_bound_report(&f, &h)?;
        if !r.applicable {
            continue;
        }
        checked += 1;
        subsets += r.subsets_checked;
        if !r.holds {
            failures += 1;
            if first.is_empty() {
                first = format!("; first failure a={:x} h={h}", f.upper_bits());
            }
        }
    }
    Ok(Outcome::new(
        "quadforms",
        checked,
        failures,
        format!("n ≤ {max_n}: {checked} admissible (form, h), {subsets} sets T{first}"),
    ))
}

/// `H` abelian iff `𝒢(T₀)` complete bipartite, over every admissible pair.
pub fn groups(max_n: usize) -> Result<Outcome, Error> {
    let (mut checked, mut failures) = (0, 0);
    for (f, h) in all_form_hyperplanes(max_n) {
        // The zero form has no nonsplit extension.
        let Ok(ext) = CentralExtension::new(f) else {
            continue;
        };
        if !crate::gf2::spans_all(ext.dim(), &maximal_admissible_set(&ext, &h)) {
            continue;
        }
        let pair = GroupPair::new(ext, h)?;
        checked += 1;
        if pair.h_abelian_direct() != pair.spec_t0().is_complete_bipartite() {
            failures += 1;
        }
    }
    Ok(Outcome::new(
        "groups",
        checked,
        failures,
        format!("n ≤ {max_n}: abelian vs complete bipartite on {checked} admissible pairs"),
    ))
}

/// Largest full-support unlinked sets for every preset and `k ≤ max_k`.
pub fn graphs(max_k: usize) -> Result<Outcome, Error> {
    let (mut checked, mut failures) = (0, 0);
    let mut lines = Vec::new();
    for name in PRESETS {
        let spec = GroupPair::parse(name)?.spec_t0();
        for k in 1..=max_k {
            let r = verify_classification(&vec![spec.clone(); k])?;
            checked += 1;
            failures += u64::from(!r.ok);
            lines.push(format!("{name}^{k}: max {} (c^k {}) {}", r.brute_max, r.c_power, if r.ok { "ok" } else { "FAIL" }));
        }
    }
    Ok(Outcome::new("graphs", checked, failures, lines.join("; ")))
}

/// `4f/2^ω + 1 = 2^{rk₄}` for `(D₄, C₄)` over `0 < ±d < xmax`.
pub fn redei(sign: Sign, xmax: u64) -> Result<Outcome, Error> {
    let s = verify_redei(sign, xmax)?;
    Ok(Outcome::new(
        "redei",
        s.checked,
        s.checked - s.passed,
        format!(
            "sign {}, |d| < {xmax}: {} of {} agree{}",
            s.sign,
            s.passed,
            s.checked,
            s.first_counterexample.map(|d| format!("; first counterexample {d}")).unwrap_or_default()
        ),
    ))
}

/// Every `f_T(d)` integral for every preset over `0 < ±d < xmax`.
pub fn integrality(sign: Sign, xmax: u64) -> Result<Outcome, Error> {
    let plans = PRESETS
        .iter()
        .map(|n| GroupPair::parse(n).and_then(|p| CountPlan::new(&p)))
        .collect::<Result<Vec<_>, _>>()?;
    let sieve = Sieve::new(SweepRange::new(sign, xmax, None)?);
    let parts = sieve.map_segments(|seg, sv| {
        let (mut checked, mut bad, mut first) = (0u64, 0u64, None);
        sv.visit_segment(seg, |f| {
            for plan in &plans {
                for term in &plan.terms {
                    checked += 1;
                    if !term.evaluate(f).is_integral() {
                        bad += 1;
                        first.get_or_insert(f.d);
                    }
                }
            }
        });
        (checked, bad, first)
    });
    let checked = parts.iter().map(|p| p.0).sum();
    let bad = parts.iter().map(|p| p.1).sum();
    let first = parts.iter().find_map(|p| p.2);
    Ok(Outcome::new(
        "integrality",
        checked,
        bad,
        format!(
            "sign {}, |d| < {xmax}: {checked} terms f_T(d){}",
            sign.as_i64(),
            first.map(|d| format!("; first non-integral at {d}")).unwrap_or_default()
        ),
    ))
}

/// Local mass equals `1 + c_T/p` by conjugacy-class enumeration.
pub fn localmass(primes: &[u64]) -> Result<Outcome, Error> {
    let (mut checked, mut failures) = (0, 0);
    for name in PRESETS {
        let spec = GroupPair::parse(name)?.spec_t0();
        for &p in primes {
            checked += 1;
            match predict::local_mass(&spec, p) {
                Ok(_) => {}
                Err(Error::Mismatch(_)) => failures += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Outcome::new("localmass", checked, failures, format!("primes {primes:?}, all presets")))
}

/// The character sum against `2^ω |T̂| ∏ Q` for the non-bipartite presets.
pub fn gamma() -> Result<Outcome, Error> {
    let (mut checked, mut failures) = (0, 0);
    let mut lines = Vec::new();
    for name in PRESETS {
        let spec = GroupPair::parse(name)?.spec_t0();
        if spec.is_complete_bipartite() {
            continue;
        }
        for sign in [Sign::Pos, Sign::Neg] {
            for alpha in [0, 2, 3] {
                let g = predict::gamma_bruteforce(std::slice::from_ref(&spec), sign, alpha, CongruenceRows::Reduced)?;
                checked += 1;
                if !g.matches() {
                    failures += 1;
                    lines.push(format!(
                        "{name} sign {} α={alpha}: brute {} vs closed {} (class-weighted {})",
                        sign.as_i64(),
                        g.brute,
                        g.closed.unwrap_or_default(),
                        g.closed_by_classes.unwrap_or_default()
                    ));
                }
            }
        }
    }
    if lines.is_empty() {
        lines.push("all instances agree".into());
    }
    Ok(Outcome::new("gamma", checked, failures, lines.join("; ")))
}

/// `Σ P(i) 2^{ik} = M(k)` for `k ≤ 4` and the partition-sum cross-check.
pub fn cl() -> Result<Outcome, Error> {
    let (mut checked, mut failures) = (0, 0);
    let mut worst: f64 = 0.0;
    for sign in [Sign::Pos, Sign::Neg] {
        let dist = predict::ClRankDistribution::new(sign, CL_TRUNCATION);
        for k in 1..=4 {
            let (m, _) = dist.moment(k);
            let err = (m - ratio_f64(&predict::m_moment(k, sign))).abs();
            worst = worst.max(err);
            checked += 1;
            failures += u64::from(err >= 1e-6);
        }
        let sum = predict::cohen_lenstra_partition_sum(sign, 6, 18);
        for (i, p) in sum.iter().enumerate().take(4) {
            checked += 1;
            failures += u64::from((p - predict::cohen_lenstra_rank_prob(i, sign)).abs() >= 1e-4);
        }
    }
    Ok(Outcome::new(
        "cl",
        checked,
        failures,
        format!("moment identity k ≤ 4 (I = {CL_TRUNCATION}), worst error {worst:.2e}"),
    ))
}
