//! Predicted constants: subspace counts, Cohen–Lenstra moments and rank
//! probabilities, point masses, correlations, local masses, and a brute-force
//! evaluation of the main-term character sum.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::discs::Sign;
use crate::gf2::parity;
use crate::group::{GroupElement, GroupPair, PairSpec};
use crate::gf2::Gf2Vector;
use crate::unlinked::{bits, is_v_type, phi, slot, LinkageGraph};
use crate::Error;

/// Default truncation for Cohen–Lenstra ranks.
pub const CL_TRUNCATION: usize = 40;

/// Largest `c_{T̂}` accepted by [`gamma_bruteforce`].
pub const GAMMA_MAX_C: usize = 6;

/// Gaussian binomial `[k choose j]₂`.
pub fn gaussian_binomial(k: usize, j: usize) -> BigUint {
    if j > k {
        return BigUint::zero();
    }
    let two = BigUint::from(2u8);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..j {
        num *= (&two).pow((k - i) as u32) - 1u8;
        den *= (&two).pow((i + 1) as u32) - 1u8;
    }
    num / den
}

/// `N(k)`: number of subspaces of `F₂^k`.
pub fn subspace_count(k: usize) -> BigUint {
    (0..=k).map(|j| gaussian_binomial(k, j)).sum()
}

/// `M⁻(k) = N(k)`, `M⁺(k) = 2^{−k}(N(k+1) − N(k))`.
pub fn m_moment(k: usize, sign: Sign) -> BigRational {
    let n = BigInt::from(subspace_count(k));
    match sign {
        Sign::Neg => BigRational::from_integer(n),
        Sign::Pos => BigRational::new(BigInt::from(subspace_count(k + 1)) - n, BigInt::one() << k),
    }
}

/// `0` for real, `1` for imaginary: the required parity of `|N|`.
fn sign_parity(sign: Sign) -> usize {
    match sign {
        Sign::Pos => 0,
        Sign::Neg => 1,
    }
}

/// `Q^±`: subsets `N ⊆ T` with `|N| ≡ a (2)` meeting every component of
/// `𝒢(T)` in `0` or `1 (mod 4)` elements.
pub fn q_pm(spec: &PairSpec, sign: Sign) -> u64 {
    q_from_components(&spec.components().iter().map(Vec::len).collect::<Vec<_>>(), sign)
}

fn q_from_components(sizes: &[usize], sign: Sign) -> u64 {
    // counts[p] = weighted number of choices so far with total parity p.
    let mut counts = [1u64, 0];
    for &size in sizes {
        let mut next = [0u64, 0];
        for m in (0..=size).filter(|m| m % 4 <= 1) {
            let w = binomial(size as u64, m as u64);
            for p in 0..2 {
                next[(p + m) % 2] += counts[p] * w;
            }
        }
        counts = next;
    }
    counts[sign_parity(sign)]
}

/// Constants of one pair at `T = T₀`.
#[derive(Clone, Debug, Serialize)]
pub struct PairConstants {
    pub pair: String,
    pub label: String,
    pub n: usize,
    pub t0: usize,
    pub c: usize,
    /// Connected components of `𝒢(T₀)`, singletons included.
    pub s: usize,
    pub aut_h: usize,
    pub q_pos: u64,
    pub q_neg: u64,
    pub complete_bipartite: bool,
}

impl PairConstants {
    pub fn new(pair: &GroupPair) -> Result<Self, Error> {
        let spec = pair.spec_t0();
        spec.require_admissible()?;
        Ok(PairConstants {
            pair: pair.to_text(),
            label: pair.label(),
            n: pair.dim(),
            t0: spec.r(),
            c: spec.conjugacy_count(),
            s: spec.components().len(),
            aut_h: spec.aut_group()?.len(),
            q_pos: q_pm(&spec, Sign::Pos),
            q_neg: q_pm(&spec, Sign::Neg),
            complete_bipartite: spec.is_complete_bipartite(),
        })
    }

    pub fn q(&self, sign: Sign) -> u64 {
        match sign {
            Sign::Pos => self.q_pos,
            Sign::Neg => self.q_neg,
        }
    }

    /// `q = 2^{n−1} |Aut_H|`, the denominator of the bipartite support.
    pub fn bipartite_q(&self) -> u64 {
        (1u64 << (self.n - 1)) * self.aut_h as u64
    }

    /// `|T₀| Q^± / (2^{c−s+n−1} |Aut_H|)`.
    fn point_mass(&self, sign: Sign) -> BigRational {
        let num = BigInt::from(self.t0 as u64 * self.q(sign));
        let den = (BigInt::one() << (self.c + self.n - 1 - self.s)) * BigInt::from(self.aut_h);
        BigRational::new(num, den)
    }
}

/// Point mass of `f/c^ω` for a pair whose `𝒢(T₀)` is not complete bipartite.
pub fn point_mass(pair: &GroupPair, sign: Sign) -> Result<BigRational, Error> {
    let k = PairConstants::new(pair)?;
    if k.complete_bipartite {
        return Err(Error::Precondition(format!(
            "{} is complete bipartite; use bipartite_distribution",
            k.label
        )));
    }
    Ok(k.point_mass(sign))
}

/// Limit of the average of `∏_j f_j/c_j^ω` over discriminants of one sign.
pub fn correlation_prediction(pairs: &[GroupPair], sign: Sign) -> Result<BigRational, Error> {
    let consts = pairs.iter().map(PairConstants::new).collect::<Result<Vec<_>, _>>()?;
    Ok(correlation_from_constants(&consts, sign))
}

fn correlation_from_constants(consts: &[PairConstants], sign: Sign) -> BigRational {
    let mut value = BigRational::one();
    let mut y = 0usize;
    for k in consts {
        if k.complete_bipartite {
            y += 1;
            value /= BigRational::from_integer(BigInt::from(k.bipartite_q()));
        } else {
            value *= k.point_mass(sign);
        }
    }
    // E[∏_{j∈Y} (2^{rk} − 1)] by inclusion–exclusion over moments of 2^{rk}.
    let mut alt = BigRational::zero();
    for i in 0..=y {
        let term = m_moment(y - i, sign) * BigRational::from_integer(BigInt::from(binomial(y as u64, i as u64)));
        if i % 2 == 0 {
            alt += term;
        } else {
            alt -= term;
        }
    }
    value * alt
}

/// The `k`-th moment for non-bipartite factors via the product-set formula
/// `2^{k + Σ(s_j − c_j) − kn} |T̂| ∏ Q_j / |Aut_{H,T̂}|`.
pub fn t_moment(specs: &[PairSpec], sign: Sign) -> Result<BigRational, Error> {
    let mut exp: i64 = specs.len() as i64;
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for spec in specs {
        spec.require_admissible()?;
        if spec.is_complete_bipartite() {
            return Err(Error::Precondition("factor is complete bipartite".into()));
        }
        exp += spec.components().len() as i64 - spec.conjugacy_count() as i64 - spec.dim() as i64;
        num *= BigInt::from(spec.r() as u64 * q_pm(spec, sign));
        den *= BigInt::from(spec.aut_group()?.len());
    }
    let two = BigRational::from_integer(BigInt::from(2));
    Ok(BigRational::new(num, den) * two.pow(exp as i32))
}

/// A predicted limit with its inputs.
#[derive(Clone, Debug, Serialize)]
pub struct Prediction {
    pub pairs: Vec<String>,
    pub sign: Sign,
    pub k: usize,
    /// Exact value in lowest terms, `num/den`.
    pub value: String,
    pub approx: f64,
    pub provenance: &'static str,
    pub constants: Vec<PairConstants>,
    pub m_moments: Vec<String>,
}

/// The `k`-th moment of `∏_j f_j/c_j^ω` over the given pairs.
pub fn predict(pairs: &[GroupPair], sign: Sign, k: usize) -> Result<Prediction, Error> {
    if pairs.is_empty() || k == 0 {
        return Err(Error::Invalid("need at least one pair and k ≥ 1".into()));
    }
    let consts = pairs.iter().map(PairConstants::new).collect::<Result<Vec<_>, _>>()?;
    let copies: Vec<PairConstants> = (0..k).flat_map(|_| consts.iter().cloned()).collect();
    let value = correlation_from_constants(&copies, sign);
    let y = copies.iter().filter(|c| c.complete_bipartite).count();
    let provenance = match (y, copies.len() - y) {
        (0, _) => "point mass (non-bipartite factors)",
        (_, 0) => "Cohen-Lenstra moments (complete bipartite factors)",
        _ => "correlation product (mixed factors)",
    };
    Ok(Prediction {
        pairs: pairs.iter().map(GroupPair::to_text).collect(),
        sign,
        k,
        approx: ratio_f64(&value),
        value: value.to_string(),
        provenance,
        constants: consts,
        m_moments: (0..=y).map(|j| m_moment(j, sign).to_string()).collect(),
    })
}

pub fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `∏_{j=from}^{to} (1 − 2^{−j})`.
fn euler_partial(from: usize, to: usize) -> f64 {
    (from..=to).map(|j| 1.0 - 0.5f64.powi(j as i32)).product()
}

/// `∏_{j≥1} (1 − 2^{−j})`, to double precision.
pub fn eta_infinity() -> f64 {
    euler_partial(1, 80)
}

/// `P^±(i)` in closed form: measure `∝ 1/(|Aut A| |A|^u)` with `u = 1` for
/// real and `u = 0` for imaginary fields.
pub fn cohen_lenstra_rank_prob(i: usize, sign: Sign) -> f64 {
    let eta = eta_infinity();
    let i2 = (i * i) as i32;
    match sign {
        Sign::Neg => eta * 0.5f64.powi(i2) / euler_partial(1, i).powi(2),
        Sign::Pos => eta * 0.5f64.powi(i2 + i as i32) / (euler_partial(1, i) * euler_partial(1, i + 1)),
    }
}

/// Rank probabilities up to a truncation, with a bound on the neglected mass.
#[derive(Clone, Debug, Serialize)]
pub struct ClRankDistribution {
    pub sign: Sign,
    pub probabilities: Vec<f64>,
    /// Upper bound on `Σ_{i>I} P(i)`.
    pub tail_bound: f64,
}

impl ClRankDistribution {
    pub fn new(sign: Sign, truncation: usize) -> Self {
        let probabilities = (0..=truncation).map(|i| cohen_lenstra_rank_prob(i, sign)).collect();
        ClRankDistribution {
            sign,
            probabilities,
            tail_bound: Self::tail(truncation, 0),
        }
    }

    /// Bound on `Σ_{i>I} P(i) 2^{ik}` for `I ≥ k`: `P(i) ≤ 2^{−i²}/η∞`, and
    /// the terms at least halve from one `i` to the next.
    fn tail(truncation: usize, k: usize) -> f64 {
        let i = (truncation + 1) as f64;
        2.0 * 2f64.powf(-i * i + i * k as f64) / eta_infinity()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// `Σ_i P(i) 2^{ik}` and its truncation bound.
    pub fn moment(&self, k: usize) -> (f64, f64) {
        let m = self
            .probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * 2f64.powi((i * k) as i32))
            .sum();
        (m, Self::tail(self.probabilities.len() - 1, k))
    }
}

/// Partitions with at most `max_len` parts, each at most `max_part`, as
/// non-increasing vectors.
fn partitions(max_len: usize, max_part: usize) -> Vec<Vec<usize>> {
    fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, max_len: usize, cap: usize) {
        out.push(cur.clone());
        if cur.len() == max_len {
            return;
        }
        for e in 1..=cap {
            cur.push(e);
            rec(out, cur, max_len, e);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut out, &mut Vec::new(), max_len, max_part);
    out
}

/// `log₂ |Aut(⊕ Z/2^{e_i})|` by the Hillar–Rhea formula.
fn log2_aut_abelian(parts: &[usize]) -> f64 {
    let mut e: Vec<usize> = parts.to_vec();
    e.sort_unstable();
    let n = e.len();
    let mut total = 0.0;
    for k in 0..n {
        let d = (k..n).take_while(|&l| e[l] == e[k]).last().unwrap() + 1;
        let c = (0..=k).find(|&l| e[l] == e[k]).unwrap() + 1;
        total += (2f64.powi(d as i32) - 2f64.powi(k as i32)).log2();
        total += (e[k] * (n - d)) as f64;
        total += ((e[k] - 1) * (n - c + 1)) as f64;
    }
    total
}

/// `P^±(i)` for `i ≤ max_rank` by summing the measure over abelian 2-groups
/// with at most `max_rank` cyclic factors of exponent at most `max_exp`.
pub fn cohen_lenstra_partition_sum(sign: Sign, max_rank: usize, max_exp: usize) -> Vec<f64> {
    let u = match sign {
        Sign::Pos => 1.0,
        Sign::Neg => 0.0,
    };
    let mut by_rank = vec![0.0; max_rank + 1];
    for p in partitions(max_rank, max_exp) {
        let size: usize = p.iter().sum();
        by_rank[p.len()] += 2f64.powf(-log2_aut_abelian(&p) - u * size as f64);
    }
    let z: f64 = by_rank.iter().sum();
    by_rank.iter().map(|w| w / z).collect()
}

/// Limiting distribution of `f/c^ω` for a complete bipartite pair: mass
/// `P^±(i)` at `(2^i − 1)/q`.
#[derive(Clone, Debug, Serialize)]
pub struct BipartiteDistribution {
    pub q: u64,
    pub support: Vec<String>,
    pub mass: ClRankDistribution,
}

pub fn bipartite_distribution(pair: &GroupPair, sign: Sign) -> Result<BipartiteDistribution, Error> {
    let k = PairConstants::new(pair)?;
    if !k.complete_bipartite {
        return Err(Error::Precondition(format!("{} is not complete bipartite", k.label)));
    }
    let q = k.bipartite_q();
    let support = (0..=CL_TRUNCATION)
        .map(|i| BigRational::new((BigInt::one() << i) - 1, BigInt::from(q)).to_string())
        .collect();
    Ok(BipartiteDistribution {
        q,
        support,
        mass: ClRankDistribution::new(sign, CL_TRUNCATION),
    })
}

/// Density of discriminants where the compositum of the counted fields is
/// nonempty: `1`, or `1 − P^±(0)` when some `H` is abelian.
pub fn compositum_density(pairs: &[GroupPair], sign: Sign) -> Result<f64, Error> {
    let mut any_abelian = false;
    for p in pairs {
        PairConstants::new(p)?;
        any_abelian |= p.h_abelian_direct();
    }
    Ok(if any_abelian {
        1.0 - cohen_lenstra_rank_prob(0, sign)
    } else {
        1.0
    })
}

/// Both terms of the local mass at an odd prime, from conjugacy classes and
/// centralizers.
#[derive(Clone, Debug, Serialize)]
pub struct LocalMass {
    pub p: u64,
    pub classes: usize,
    pub ramified: String,
    pub unramified: String,
    pub total: String,
}

pub fn local_mass(spec: &PairSpec, p: u64) -> Result<LocalMass, Error> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::Invalid(format!("{p} is not an odd prime")));
    }
    spec.require_admissible()?;
    let g = &spec.ext;
    let order = g.order();
    let n = g.dim();
    let conj = |x: (u64, u8), y: (u64, u8)| g.mul_raw(g.mul_raw(y, x), g.inverse_raw(y));

    // Order-2 lifts of T, split into classes.
    let mut lifts: Vec<(u64, u8)> = spec.t.iter().flat_map(|&u| [(u, 0), (u, 1)]).collect();
    lifts.retain(|&x| g.order_raw(x) == 2);
    let mut classes: Vec<Vec<(u64, u8)>> = Vec::new();
    for &x in &lifts {
        if classes.iter().any(|c| c.contains(&x)) {
            continue;
        }
        let mut c: Vec<(u64, u8)> = g.elements_raw().map(|y| conj(x, y)).collect();
        c.sort_unstable();
        c.dedup();
        classes.push(c);
    }

    // Σ_c Σ_m r(c, m): inertia ⟨x⟩, decomposition group C₂ × C_{2^m}.
    let mut ramified = BigInt::zero();
    for c in &classes {
        let x = c[0];
        let xe = GroupElement::new(Gf2Vector::new(n, x.0), x.1);
        let size = BigInt::from(c.len());
        // Two ramified C₂-extensions of Q_p.
        ramified += &size * 2;
        let mut m = 1;
        loop {
            let here = g.centralizer_torsion(&xe, m);
            let below = g.centralizer_torsion(&xe, m - 1);
            let delta = u64::from(m == 1);
            if here == below {
                break;
            }
            ramified += &size * BigInt::from(here - below - delta);
            m += 1;
        }
    }

    // Cyclic decomposition groups of unramified extensions: φ(|D|) for each.
    let mut seen = std::collections::BTreeSet::new();
    let mut unramified = BigInt::zero();
    for x in g.elements_raw() {
        let mut gen = vec![x];
        let mut y = x;
        for _ in 1..g.order_raw(x) {
            y = g.mul_raw(y, x);
            gen.push(y);
        }
        gen.sort_unstable();
        let ord = gen.len();
        if seen.insert(gen) {
            // φ(2^a) = 2^{a−1}, φ(1) = 1.
            unramified += BigInt::from(ord.div_ceil(2).max(1));
        }
    }

    let g_order = BigInt::from(order);
    let ram = BigRational::new(ramified, &g_order * BigInt::from(p));
    let unram = BigRational::new(unramified, g_order);
    let total = &ram + &unram;
    let expected = BigRational::one() + BigRational::new(BigInt::from(spec.conjugacy_count()), BigInt::from(p));
    if total != expected {
        return Err(Error::Mismatch(format!("local mass {total} ≠ {expected}")));
    }
    Ok(LocalMass {
        p,
        classes: classes.len(),
        ramified: ram.to_string(),
        unramified: unram.to_string(),
        total: total.to_string(),
    })
}

/// Which congruence rows constrain the class of `d_{Υ}` at the slot carrying
/// the factor `2^α`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum CongruenceRows {
    /// Every slot `i` asks `∏ h ≡ −1 (4)` iff `i ∈ N_j`, independent of `Υ`.
    #[default]
    Reduced,
    /// At `i = Υ_j ∈ N_j` the row asks `≡ 1` for `α = 2` and is dropped for
    /// `α = 3`.
    PerSlot,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaReport {
    pub sign: Sign,
    pub alpha: u8,
    pub rows: CongruenceRows,
    pub c_hat: usize,
    pub maximal_sets: usize,
    pub brute: i128,
    /// `2^ω |T̂| ∏ Q_j` when no factor is complete bipartite.
    pub closed: Option<i128>,
    /// `2^ω c_{T̂} ∏ Q_j`: an isolated `Υ_j` keeps both choices of `Γ ∋ j`,
    /// so each slot is weighted by its number of lift classes.
    pub closed_by_classes: Option<i128>,
    /// Contribution of each `Υ`, flattened with factor 0 least significant.
    pub per_upsilon: Vec<i128>,
}

impl GammaReport {
    pub fn matches(&self) -> bool {
        self.closed == Some(self.brute)
    }
}

/// `2^ω |T̂| ∏ Q_j` with `ω = 2c_{T̂} − Σ c_j + Σ s_j + k − 1`.
pub fn gamma_closed_form(specs: &[PairSpec], sign: Sign) -> i128 {
    gamma_power(specs, sign) * specs.iter().map(|s| s.r() as i128).product::<i128>()
}

/// [`gamma_closed_form`] with `|T̂|` replaced by `c_{T̂}`. The two agree iff
/// no `𝒢(T_j)` has an isolated vertex.
pub fn gamma_closed_form_by_classes(specs: &[PairSpec], sign: Sign) -> i128 {
    gamma_power(specs, sign) * specs.iter().map(|s| s.conjugacy_count() as i128).product::<i128>()
}

/// `2^ω ∏ Q_j`.
fn gamma_power(specs: &[PairSpec], sign: Sign) -> i128 {
    let c_hat: usize = specs.iter().map(PairSpec::conjugacy_count).product();
    let omega = 2 * c_hat + specs.iter().map(|s| s.components().len()).sum::<usize>() + specs.len()
        - 1
        - specs.iter().map(PairSpec::conjugacy_count).sum::<usize>();
    (1i128 << omega) * specs.iter().map(|s| q_pm(s, sign) as i128).product::<i128>()
}

/// Literal evaluation of `Σ_N Σ_Γ Σ_Υ Σ_𝒰 Σ_h χ₁χ₂χ₃` with `h` over odd
/// classes mod 8 on the maximal full-support unlinked sets `𝒰`.
pub fn gamma_bruteforce(specs: &[PairSpec], sign: Sign, alpha: u8, rows: CongruenceRows) -> Result<GammaReport, Error> {
    if ![0, 2, 3].contains(&alpha) {
        return Err(Error::Invalid(format!("alpha must be 0, 2 or 3, got {alpha}")));
    }
    for s in specs {
        s.require_admissible()?;
    }
    let graph = LinkageGraph::new(specs)?;
    let family = graph.max_disconnected(true)?;
    if family.size > GAMMA_MAX_C {
        return Err(Error::Budget(format!("|𝒰| = {} exceeds {GAMMA_MAX_C}", family.size)));
    }
    let k = specs.len();
    let r: Vec<usize> = specs.iter().map(PairSpec::r).collect();
    let s_masks: Vec<Vec<u64>> = specs.iter().map(PairSpec::neighbor_masks).collect();
    let sets: Vec<Vec<Vec<usize>>> = family
        .sets
        .iter()
        .map(|&m| bits(m).map(|x| graph.coords(x)).collect())
        .collect();

    // N ranges over ∏_j {N_j ⊆ T_j : |N_j| ≡ a (2)}.
    let parity = sign_parity(sign) as u32;
    let per_factor: Vec<Vec<u64>> = r
        .iter()
        .map(|&rj| (0..1u64 << rj).filter(|m| m.count_ones() % 2 == parity).collect())
        .collect();
    let ns = cartesian(&per_factor.iter().map(Vec::len).collect::<Vec<_>>());
    let upsilons = cartesian(&r);

    let per_n: Vec<Vec<i128>> = crate::par::map(&ns, |nidx| {
        let n: Vec<u64> = nidx.iter().enumerate().map(|(j, &i)| per_factor[j][i]).collect();
        upsilons
            .iter()
            .map(|ups| {
                let mut total = 0i128;
                for gamma in 0..1u32 << k {
                    for u in &sets {
                        total += sum_over_classes(u, &n, ups, gamma, alpha, rows, &s_masks, &r);
                    }
                }
                total
            })
            .collect()
    });
    let mut per_upsilon = vec![0i128; upsilons.len()];
    for row in per_n {
        for (acc, v) in per_upsilon.iter_mut().zip(row) {
            *acc += v;
        }
    }
    let any_bipartite = specs.iter().any(PairSpec::is_complete_bipartite);
    Ok(GammaReport {
        sign,
        alpha,
        rows,
        c_hat: family.size,
        maximal_sets: family.sets.len(),
        brute: per_upsilon.iter().sum(),
        closed: (!any_bipartite).then(|| gamma_closed_form(specs, sign)),
        closed_by_classes: (!any_bipartite).then(|| gamma_closed_form_by_classes(specs, sign)),
        per_upsilon,
    })
}

/// All index tuples of a mixed-radix box, coordinate 0 varying fastest.
fn cartesian(radix: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radix.iter().product();
    (0..total)
        .map(|mut x| {
            radix
                .iter()
                .map(|&b| {
                    let c = x % b;
                    x /= b;
                    c
                })
                .collect()
        })
        .collect()
}

/// `Σ_{h ∈ Λ₈(𝒰,N,Υ)} χ₁χ₂χ₃` for one `(N, Γ, Υ, 𝒰)`. Each odd class mod 8
/// is the pair `(x, y)` with `x = [h ≡ 3 (4)]`, `y = [(h²−1)/8 odd]`.
#[allow(clippy::too_many_arguments)]
fn sum_over_classes(
    u: &[Vec<usize>],
    n: &[u64],
    ups: &[usize],
    gamma: u32,
    alpha: u8,
    rows: CongruenceRows,
    s_masks: &[Vec<u64>],
    r: &[usize],
) -> i128 {
    let k = n.len();
    let len = u.len();
    let phi_k = |a: &[usize], b: &[usize]| (0..k).fold(0u8, |acc, i| acc ^ phi(&s_masks[i], a[i], b[i]));

    // Congruence rows as (mask over positions, required parity).
    let mut conds: Vec<(u64, u8)> = Vec::new();
    for j in 0..k {
        for i in 0..r[j] {
            let mask = (0..len).filter(|&p| slot(u[p][j]) == i).fold(0u64, |m, p| m | 1 << p);
            let in_n = n[j] >> i & 1 == 1;
            let target = match (rows, alpha, in_n && i == ups[j]) {
                (CongruenceRows::PerSlot, 2, true) => Some(0),
                (CongruenceRows::PerSlot, 3, true) => None,
                _ => Some(in_n as u8),
            };
            if let Some(t) = target {
                conds.push((mask, t));
            }
        }
    }

    let mut quad = vec![0u64; len];
    for a in 0..len {
        for b in a + 1..len {
            if phi_k(&u[a], &u[b]) == 1 {
                quad[a] |= 1 << b;
            }
        }
    }
    let lambda = (0..len).fold(0u64, |m, p| {
        let l = (0..k).fold(0u8, |acc, i| {
            let x = u[p][i];
            acc ^ (is_v_type(x) && (n[i] & s_masks[i][slot(x)]).count_ones() % 2 == 1) as u8
        });
        m | (l as u64) << p
    });
    let two_adic = (0..len).fold(0u64, |m, p| {
        let v_ups = |i: usize| 2 * ups[i] + 1;
        let g = (0..k)
            .filter(|&i| gamma >> i & 1 == 1)
            .fold(0u8, |acc, i| acc ^ phi(&s_masks[i], u[p][i], v_ups(i)));
        let psi = (0..k).fold(0u8, |acc, i| acc ^ phi(&s_masks[i], v_ups(i), u[p][i]));
        m | (((g + psi * alpha) & 1) as u64) << p
    });

    let mut total = 0i128;
    for x in 0..1u64 << len {
        if conds.iter().any(|&(m, t)| parity(m & x) != t) {
            continue;
        }
        let e12 = (0..len).fold(0u8, |acc, a| {
            acc ^ ((x >> a & 1) as u8 & parity(quad[a] & x))
        }) ^ parity(lambda & x);
        for y in 0..1u64 << len {
            let e = e12 ^ parity(two_adic & y);
            total += if e == 0 { 1 } else { -1 };
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::PRESETS;
    use proptest::prelude::*;

    fn pair(s: &str) -> GroupPair {
        GroupPair::parse(s).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Subspaces of `F₂^k` counted by closure of every subset of vectors.
    fn subspaces_by_enumeration(k: usize) -> usize {
        let mut seen = std::collections::BTreeSet::new();
        for set in 0u64..1 << (1 << k) {
            let vs: Vec<u64> = bits(set).map(|v| v as u64).collect();
            let closed = vs.contains(&0) && vs.iter().all(|a| vs.iter().all(|b| vs.contains(&(a ^ b))));
            if closed {
                seen.insert(set);
            }
        }
        seen.len()
    }

    #[test]
    fn subspace_counts() {
        assert_eq!(subspace_count(0), BigUint::from(1u8));
        for k in 1..=3 {
            assert_eq!(subspace_count(k), BigUint::from(subspaces_by_enumeration(k)));
        }
        assert_eq!(subspace_count(2), BigUint::from(5u8));
        assert_eq!(subspace_count(3), BigUint::from(16u8));
    }

    #[test]
    fn m_moment_anchors() {
        assert_eq!(m_moment(1, Sign::Neg), q(2, 1));
        assert_eq!(m_moment(1, Sign::Pos), q(3, 2));
        assert_eq!(m_moment(0, Sign::Neg), q(1, 1));
        assert_eq!(m_moment(0, Sign::Pos), q(1, 1));
    }

    /// `Q^±` by enumerating subsets of `T` directly.
    fn q_by_subsets(spec: &PairSpec, sign: Sign) -> u64 {
        let comps = spec.components();
        (0..1u64 << spec.r())
            .filter(|m| m.count_ones() as usize % 2 == sign_parity(sign))
            .filter(|m| {
                comps
                    .iter()
                    .all(|c| c.iter().filter(|&&i| m >> i & 1 == 1).count() % 4 <= 1)
            })
            .count() as u64
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_from_components(&[3], Sign::Neg), 3);
        assert_eq!(q_from_components(&[2, 1], Sign::Neg), 3);
        assert_eq!(q_from_components(&[], Sign::Pos), 1);
        assert_eq!(q_from_components(&[], Sign::Neg), 0);
        for name in PRESETS {
            for spec in pair(name).spanning_subsets() {
                for sign in [Sign::Pos, Sign::Neg] {
                    assert_eq!(q_pm(&spec, sign), q_by_subsets(&spec, sign), "{name}");
                }
            }
        }
    }

    #[test]
    fn point_masses() {
        assert_eq!(point_mass(&pair("D4oC4:Q8"), Sign::Neg).unwrap(), q(3, 32));
        assert!(point_mass(&pair("D4:C4"), Sign::Neg).is_err());
        // Both paths agree for every non-bipartite preset and k ≤ 3.
        for name in PRESETS {
            let p = pair(name);
            if p.spec_t0().is_complete_bipartite() {
                continue;
            }
            for sign in [Sign::Pos, Sign::Neg] {
                let pm = point_mass(&p, sign).unwrap();
                for k in 1..=3 {
                    let copies = vec![p.clone(); k];
                    let specs = vec![p.spec_t0(); k];
                    let corr = correlation_prediction(&copies, sign).unwrap();
                    assert_eq!(corr, pm.clone().pow(k as i32), "{name} k={k}");
                    assert_eq!(t_moment(&specs, sign).unwrap(), corr, "{name} k={k}");
                }
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let d4 = pair("D4:C4");
        assert_eq!(correlation_prediction(&[d4.clone()], Sign::Neg).unwrap(), q(1, 4));
        assert_eq!(correlation_prediction(&[d4.clone(), d4.clone()], Sign::Neg).unwrap(), q(1, 8));
        assert_eq!(correlation_prediction(&[pair("D4oC4:Q8")], Sign::Neg).unwrap(), q(3, 32));
        let p = predict(&[d4], Sign::Neg, 2).unwrap();
        assert_eq!(p.value, "1/8");
    }

    #[test]
    fn cl_anchors() {
        assert!((cohen_lenstra_rank_prob(0, Sign::Neg) - 0.288788).abs() < 1e-6);
        assert!((cohen_lenstra_rank_prob(0, Sign::Pos) - 0.577576).abs() < 1e-6);
        for sign in [Sign::Pos, Sign::Neg] {
            let dist = ClRankDistribution::new(sign, CL_TRUNCATION);
            assert!((dist.total() - 1.0).abs() <= dist.tail_bound + 1e-12);
            for k in 1..=4 {
                let (m, bound) = dist.moment(k);
                let exact = ratio_f64(&m_moment(k, sign));
                assert!((m - exact).abs() < 1e-6 + bound, "k={k} {m} vs {exact}");
            }
        }
    }

    #[test]
    fn hillar_rhea_small_groups() {
        // |Aut| brute-forced by hand: C2, C4, C2², C2×C4, C2³.
        let cases: [(&[usize], f64); 5] = [(&[1], 1.0), (&[2], 2.0), (&[1, 1], 6.0), (&[2, 1], 8.0), (&[1, 1, 1], 168.0)];
        for (p, aut) in cases {
            assert!((log2_aut_abelian(p) - aut.log2()).abs() < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn cl_partition_sum_matches_closed_form() {
        for sign in [Sign::Pos, Sign::Neg] {
            let sum = cohen_lenstra_partition_sum(sign, 6, 18);
            for (i, p) in sum.iter().enumerate().take(4) {
                let closed = cohen_lenstra_rank_prob(i, sign);
                assert!((p - closed).abs() < 1e-4, "{sign:?} i={i}: {p} vs {closed}");
            }
        }
    }

    #[test]
    fn bipartite_and_compositum() {
        let d = bipartite_distribution(&pair("D4:C4"), Sign::Neg).unwrap();
        assert_eq!(d.q, 4);
        assert_eq!(&d.support[..4], ["0", "1/4", "3/4", "7/4"]);
        assert!(bipartite_distribution(&pair("D4oC4:Q8"), Sign::Neg).is_err());
        let d = bipartite_distribution(&pair("D4oC4:C4xC2"), Sign::Neg).unwrap();
        assert!((d.mass.total() - 1.0).abs() < 1e-9);
        assert_eq!(compositum_density(&[pair("D4oC4:Q8")], Sign::Neg).unwrap(), 1.0);
        let c = compositum_density(&[pair("D4:C4"), pair("D4oC4:Q8")], Sign::Neg).unwrap();
        assert!((c - (1.0 - 0.288788)).abs() < 1e-6);
    }

    #[test]
    fn local_mass_all_presets() {
        for name in PRESETS {
            let spec = pair(name).spec_t0();
            for p in [3, 5, 7, 11, 13] {
                let m = local_mass(&spec, p).unwrap();
                assert_eq!(m.classes, spec.conjugacy_count());
                assert_eq!(m.unramified, "1");
            }
        }
        assert_eq!(local_mass(&pair("D4:C4").spec_t0(), 3).unwrap().total, "5/3");
        assert_eq!(local_mass(&pair("D4oC4:Q8").spec_t0(), 5).unwrap().total, "8/5");
    }

    #[test]
    fn gamma_q8_matches_closed_form() {
        let spec = pair("D4oC4:Q8").spec_t0();
        assert_eq!(gamma_closed_form(std::slice::from_ref(&spec), Sign::Neg), 144);
        for sign in [Sign::Pos, Sign::Neg] {
            for alpha in [0, 2, 3] {
                let g = gamma_bruteforce(std::slice::from_ref(&spec), sign, alpha, CongruenceRows::Reduced).unwrap();
                assert!(g.matches(), "{g:?}");
            }
        }
    }

    #[test]
    fn gamma_isolated_slot_weighs_by_classes() {
        // 𝒢(T₀) for (D₄×C₂, D₄) is an edge plus an isolated vertex.
        let spec = pair("D4xC2:D4").spec_t0();
        let specs = std::slice::from_ref(&spec);
        assert_eq!(gamma_closed_form(specs, Sign::Neg), 576);
        for sign in [Sign::Pos, Sign::Neg] {
            for alpha in [0, 2, 3] {
                let g = gamma_bruteforce(specs, sign, alpha, CongruenceRows::Reduced).unwrap();
                assert_eq!(Some(g.brute), g.closed_by_classes, "{g:?}");
                // The isolated Υ contributes twice as much as each other slot.
                assert_eq!(g.per_upsilon, vec![g.brute / 4, g.brute / 4, g.brute / 2]);
            }
        }
    }

    #[test]
    fn gamma_per_slot_rows_double_at_alpha3() {
        let spec = pair("D4oC4:Q8").spec_t0();
        let g = gamma_bruteforce(std::slice::from_ref(&spec), Sign::Neg, 3, CongruenceRows::PerSlot).unwrap();
        assert_eq!(g.brute, 192);
        let g = gamma_bruteforce(std::slice::from_ref(&spec), Sign::Neg, 2, CongruenceRows::PerSlot).unwrap();
        assert_eq!(g.brute, 144);
    }

    proptest! {
        #[test]
        fn m_moment_positive_and_increasing(k in 0usize..12) {
            for sign in [Sign::Pos, Sign::Neg] {
                prop_assert!(m_moment(k + 1, sign) > m_moment(k, sign));
            }
        }

        #[test]
        fn q_splits_all_admissible_subsets(sizes in proptest::collection::vec(1usize..6, 0..5)) {
            // Q⁺ + Q⁻ counts every choice of per-component sizes ≡ 0,1 (4).
            let all: u64 = sizes
                .iter()
                .map(|&s| (0..=s).filter(|m| m % 4 <= 1).map(|m| binomial(s as u64, m as u64)).sum::<u64>())
                .product();
            prop_assert_eq!(q_from_components(&sizes, Sign::Pos) + q_from_components(&sizes, Sign::Neg), all);
        }
    }
}
