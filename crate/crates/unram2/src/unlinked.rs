//! Linkage between expanded divisor slots, largest unlinked sets with full
//! support, and the closed-form family they are classified by.
//!
//! Within one factor with `T = {t_0, …, t_{r−1}}`, vertex `2i` is the
//! `u`-type vertex over `t_i` and `2i + 1` the `v`-type vertex over `t_i`.
//! Expanding the local factors of slot `i` splits `d_i` into a part without
//! symbols (`u`-type) and a part under the symbol (`v`-type), so
//! `Φ(x, y) = 1` iff `y` is `v`-type and the slot of `x` lies in `S_{slot(y)}`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::forms::QuadForm;
use crate::group::PairSpec;
use crate::Error;

/// Largest product graph handled by the exact search.
pub const MAX_VERTICES: usize = 64;

#[inline]
pub fn slot(x: usize) -> usize {
    x / 2
}

#[inline]
pub fn is_v_type(x: usize) -> bool {
    x % 2 == 1
}

/// `Φ` on one factor with neighbour masks `s_masks`.
#[inline]
pub fn phi(s_masks: &[u64], x: usize, y: usize) -> u8 {
    (is_v_type(y) && s_masks[slot(y)] >> slot(x) & 1 == 1) as u8
}

#[inline]
pub fn delta(s_masks: &[u64], x: usize, y: usize) -> u8 {
    phi(s_masks, x, y) ^ phi(s_masks, y, x)
}

#[derive(Clone, Debug)]
struct Factor {
    r: usize,
    s_masks: Vec<u64>,
    bipartition: Option<(Vec<usize>, Vec<usize>)>,
    components: Vec<Vec<usize>>,
    c: usize,
}

/// `𝒢*(T̂)` for `T̂ = T_1 × … × T_k`, vertices flattened in mixed radix with
/// factor 0 least significant.
#[derive(Clone, Debug)]
pub struct LinkageGraph {
    factors: Vec<Factor>,
    n: usize,
    /// `adj[x]`: vertices linked to `x`.
    adj: Vec<u64>,
    /// Support of each vertex, flattened over `∏ r_i`.
    support: Vec<usize>,
    supports: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// Every factor complete bipartite.
    Type1,
    /// No factor complete bipartite.
    Type2,
    Mixed,
}

/// Sets of vertices of one graph, each a bitmask, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnlinkedFamily {
    pub size: usize,
    pub sets: Vec<u64>,
    pub kind: FamilyKind,
}

impl LinkageGraph {
    pub fn new(factors: &[PairSpec]) -> Result<Self, Error> {
        if factors.is_empty() {
            return Err(Error::Invalid("need at least one factor".into()));
        }
        let fs: Vec<Factor> = factors
            .iter()
            .map(|f| Factor {
                r: f.r(),
                s_masks: f.neighbor_masks(),
                bipartition: f.bipartition(),
                components: f.components(),
                c: f.conjugacy_count(),
            })
            .collect();
        let n: usize = fs.iter().map(|f| 2 * f.r).product();
        if n > MAX_VERTICES {
            return Err(Error::Budget(format!("{n} vertices exceed {MAX_VERTICES}")));
        }
        let mut g = LinkageGraph {
            factors: fs,
            n,
            adj: vec![0; n],
            support: vec![0; n],
            supports: 0,
        };
        g.supports = g.factors.iter().map(|f| f.r).product();
        for x in 0..n {
            let cx = g.coords(x);
            g.support[x] = g.support_index(&cx);
            for y in 0..n {
                if g.delta_k(&cx, &g.coords(y)) == 1 {
                    g.adj[x] |= 1 << y;
                }
            }
        }
        Ok(g)
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_supports(&self) -> usize {
        self.supports
    }

    /// `c_{T̂} = ∏ c_{T_i}`.
    pub fn c_hat(&self) -> usize {
        self.factors.iter().map(|f| f.c).product()
    }

    pub fn coords(&self, mut x: usize) -> Vec<usize> {
        self.factors
            .iter()
            .map(|f| {
                let c = x % (2 * f.r);
                x /= 2 * f.r;
                c
            })
            .collect()
    }

    pub fn vertex(&self, coords: &[usize]) -> usize {
        let mut x = 0;
        for (f, &c) in self.factors.iter().zip(coords).rev() {
            x = x * 2 * f.r + c;
        }
        x
    }

    fn support_index(&self, coords: &[usize]) -> usize {
        let mut s = 0;
        for (f, &c) in self.factors.iter().zip(coords).rev() {
            s = s * f.r + slot(c);
        }
        s
    }

    pub fn support(&self, x: usize) -> usize {
        self.support[x]
    }

    pub fn s_masks(&self, factor: usize) -> &[u64] {
        &self.factors[factor].s_masks
    }

    /// `Φ_k(x, y) = Σ_i Φ(x_i, y_i)`.
    pub fn phi_k(&self, x: &[usize], y: &[usize]) -> u8 {
        self.factors
            .iter()
            .zip(x.iter().zip(y))
            .fold(0, |acc, (f, (&a, &b))| acc ^ phi(&f.s_masks, a, b))
    }

    pub fn delta_k(&self, x: &[usize], y: &[usize]) -> u8 {
        self.phi_k(x, y) ^ self.phi_k(y, x)
    }

    pub fn linked(&self, x: usize, y: usize) -> bool {
        self.adj[x] >> y & 1 == 1
    }

    pub fn is_unlinked_set(&self, set: u64) -> bool {
        bits(set).all(|x| self.adj[x] & set == 0)
    }

    pub fn has_full_support(&self, set: u64) -> bool {
        self.support_cover(set).count_ones() as usize == self.supports
    }

    fn support_cover(&self, set: u64) -> u64 {
        bits(set).fold(0u64, |m, x| m | 1 << self.support[x])
    }

    fn kind(&self) -> FamilyKind {
        let bip = self.factors.iter().filter(|f| f.bipartition.is_some()).count();
        if bip == self.k() {
            FamilyKind::Type1
        } else if bip == 0 {
            FamilyKind::Type2
        } else {
            FamilyKind::Mixed
        }
    }

    /// Exact maximum unlinked sets (optionally with full support) and every
    /// maximizer, by Bron–Kerbosch with pivoting on the unlinked relation.
    pub fn max_disconnected(&self, full_support: bool) -> Result<UnlinkedFamily, Error> {
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let free: Vec<u64> = (0..self.n).map(|x| all & !self.adj[x] & !(1 << x)).collect();
        let search = Search {
            g: self,
            free: &free,
            full_support,
            best: AtomicUsize::new(0),
        };
        // Top-level branches in the usual order, then searched in parallel.
        let pivot = choose_pivot(&free, all, 0);
        let mut p = all;
        let mut x = 0u64;
        let mut branches = Vec::new();
        for v in bits(all & !free[pivot]) {
            branches.push((1u64 << v, p & free[v], x & free[v]));
            p &= !(1 << v);
            x |= 1 << v;
        }
        let found: Vec<Vec<u64>> = crate::par::map(&branches, |&(r, p, x)| {
            let mut out = Vec::new();
            search.expand(r, p, x, &mut out);
            out
        });
        let size = found
            .iter()
            .flatten()
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap_or(0);
        let sets: BTreeSet<u64> = found
            .into_iter()
            .flatten()
            .filter(|s| s.count_ones() as usize == size)
            .collect();
        Ok(UnlinkedFamily {
            size,
            sets: sets.into_iter().collect(),
            kind: self.kind(),
        })
    }

    /// The closed-form family `ℛ × ∏_{j∉Y} 𝒯_j`, with `Y` the complete
    /// bipartite factors.
    pub fn construct_m(&self) -> Result<UnlinkedFamily, Error> {
        let y: Vec<usize> = (0..self.k()).filter(|&i| self.factors[i].bipartition.is_some()).collect();
        // Per non-bipartite factor: the list of allowed coordinate sets.
        let mut choices: Vec<Vec<u64>> = Vec::with_capacity(self.k());
        for f in &self.factors {
            if f.bipartition.is_some() {
                choices.push(vec![]);
                continue;
            }
            let mut isolated = 0u64;
            let mut comps = Vec::new();
            for comp in &f.components {
                if comp.len() == 1 && f.s_masks[comp[0]] == 0 {
                    isolated |= 0b11 << (2 * comp[0]);
                } else {
                    let a = comp.iter().fold(0u64, |m, &i| m | 1 << (2 * i));
                    comps.push((a, a << 1));
                }
            }
            let mut sets = Vec::new();
            for pick in 0u64..1 << comps.len() {
                let mut s = isolated;
                for (j, &(a, b)) in comps.iter().enumerate() {
                    s |= if pick >> j & 1 == 0 { a } else { b };
                }
                sets.push(s);
            }
            choices.push(sets);
        }
        // The bipartite block: largest unlinked full-support V ⊆ F₂^{2|Y|}.
        let blocks: Vec<u64> = if y.is_empty() {
            // The single empty class tuple.
            vec![1]
        } else {
            let p = bipartite_form(y.len());
            max_singular_cover(&p, y.len())
        };
        let class_of = |fi: usize, x: usize| -> u64 {
            let (w1, _) = self.factors[fi].bipartition.as_ref().unwrap();
            let in_w1 = w1.contains(&slot(x));
            match (is_v_type(x), in_w1) {
                (false, true) => 0,
                (true, true) => 1,
                (true, false) => 2,
                (false, false) => 3,
            }
        };
        let mut sets = BTreeSet::new();
        let non_y: Vec<usize> = (0..self.k()).filter(|i| !y.contains(i)).collect();
        let combos: usize = non_y.iter().map(|&i| choices[i].len()).product();
        for &v in &blocks {
            for mut combo in 0..combos {
                let mut pick = vec![0u64; self.k()];
                for &i in &non_y {
                    let n = choices[i].len();
                    pick[i] = choices[i][combo % n];
                    combo /= n;
                }
                let mut set = 0u64;
                for x in 0..self.n {
                    let c = self.coords(x);
                    let ok_t = non_y.iter().all(|&i| pick[i] >> c[i] & 1 == 1);
                    let q = y
                        .iter()
                        .enumerate()
                        .fold(0u64, |m, (b, &i)| m | class_of(i, c[i]) << (2 * b));
                    if ok_t && v >> q & 1 == 1 {
                        set |= 1 << x;
                    }
                }
                sets.insert(set);
            }
        }
        let size = sets.iter().next().map_or(0, |s| s.count_ones() as usize);
        if sets.iter().any(|s| s.count_ones() as usize != size) {
            return Err(Error::Mismatch("closed-form members differ in size".into()));
        }
        Ok(UnlinkedFamily {
            size,
            sets: sets.into_iter().collect(),
            kind: self.kind(),
        })
    }
}

/// `P` on `F₂^{2m}` for `m` complete bipartite factors: per factor the class
/// of a vertex is 0 (`u` over `W₁`), 1 (`v` over `W₁`), 2 (`v` over `W₂`) or
/// 3 (`u` over `W₂`), and linkage depends only on the sum of classes.
pub fn bipartite_form(m: usize) -> QuadForm {
    // One factor: P(q) = 1 iff q = 2, i.e. P = x₁ + x₀x₁.
    QuadForm::from_values(2 * m, |q| {
        (0..m).fold(0u8, |acc, i| acc ^ ((q >> (2 * i) & 3) == 2) as u8)
    })
    .expect("P is a quadratic form")
}

/// `P(w) = Δ_r(w, 0)` computed from the linkage graph of bipartite factors,
/// after checking `Δ_r(x, y) = P(class(x) + class(y))` on every vertex pair.
pub fn fk_form_p(factors: &[PairSpec]) -> Result<QuadForm, Error> {
    let g = LinkageGraph::new(factors)?;
    for (i, f) in g.factors.iter().enumerate() {
        match &f.bipartition {
            Some((a, b)) if a.len() == b.len() => {}
            _ => return Err(Error::Precondition(format!("factor {i} is not balanced complete bipartite"))),
        }
    }
    let m = g.k();
    let class = |x: usize| -> u64 {
        let c = g.coords(x);
        c.iter().enumerate().fold(0u64, |acc, (i, &ci)| {
            let (w1, _) = g.factors[i].bipartition.as_ref().unwrap();
            let cl = match (is_v_type(ci), w1.contains(&slot(ci))) {
                (false, true) => 0,
                (true, true) => 1,
                (true, false) => 2,
                (false, false) => 3,
            };
            acc | cl << (2 * i)
        })
    };
    let mut table = vec![None; 1 << (2 * m)];
    for x in 0..g.n {
        for y in 0..g.n {
            let w = (class(x) ^ class(y)) as usize;
            let d = g.linked(x, y) as u8;
            match table[w] {
                None => table[w] = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::Mismatch("linkage is not a function of the class sum".into()))
                }
                _ => {}
            }
        }
    }
    let p = QuadForm::from_values(2 * m, |w| table[w as usize].unwrap_or(0))?;
    if p != bipartite_form(m) {
        return Err(Error::Mismatch("unexpected form for bipartite linkage".into()));
    }
    Ok(p)
}

/// Largest `V ⊆ F₂^{2m}` with `P(v + w) = 0` on all pairs whose classes cover
/// both sides of every factor; each returned as a bitmask over `F₂^{2m}`.
fn max_singular_cover(p: &QuadForm, m: usize) -> Vec<u64> {
    let n = 1usize << (2 * m);
    assert!(n <= 64);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let free: Vec<u64> = (0..n as u64)
        .map(|a| (0..n as u64).filter(|&b| b != a && p.q(a ^ b) == 0).fold(0u64, |s, b| s | 1 << b))
        .collect();
    // Side of a class: bit 1 of each 2-bit block.
    let side = |q: usize| (0..m).fold(0usize, |s, i| s | (q >> (2 * i + 1) & 1) << i);
    let mut best = 0usize;
    let mut out: Vec<u64> = Vec::new();
    fn bk(
        r: u64,
        p: u64,
        x: u64,
        free: &[u64],
        best: &mut usize,
        out: &mut Vec<u64>,
        ok: &dyn Fn(u64) -> bool,
    ) {
        if (r | p).count_ones() < *best as u32 {
            return;
        }
        if p == 0 {
            if x == 0 && ok(r) {
                let s = r.count_ones() as usize;
                if s > *best {
                    *best = s;
                    out.clear();
                }
                if s == *best {
                    out.push(r);
                }
            }
            return;
        }
        let pivot = choose_pivot(free, p, x);
        let (mut p, mut x) = (p, x);
        for v in bits(p & !free[pivot]) {
            bk(r | 1 << v, p & free[v], x & free[v], free, best, out, ok);
            p &= !(1 << v);
            x |= 1 << v;
        }
    }
    let ok = |set: u64| bits(set).fold(0u64, |c, q| c | 1 << side(q)).count_ones() as usize == 1 << m;
    bk(0, all, 0, &free, &mut best, &mut out, &ok);
    out.sort_unstable();
    out
}

struct Search<'a> {
    g: &'a LinkageGraph,
    free: &'a [u64],
    full_support: bool,
    best: AtomicUsize,
}

impl Search<'_> {
    fn expand(&self, r: u64, p: u64, x: u64, out: &mut Vec<u64>) {
        if ((r | p).count_ones() as usize) < self.best.load(Ordering::Relaxed) {
            return;
        }
        if self.full_support && !self.g.has_full_support(r | p) {
            return;
        }
        if p == 0 {
            if x == 0 {
                let s = r.count_ones() as usize;
                self.best.fetch_max(s, Ordering::Relaxed);
                out.push(r);
            }
            return;
        }
        let pivot = choose_pivot(self.free, p, x);
        let (mut p, mut x) = (p, x);
        for v in bits(p & !self.free[pivot]) {
            self.expand(r | 1 << v, p & self.free[v], x & self.free[v], out);
            p &= !(1 << v);
            x |= 1 << v;
        }
    }
}

fn choose_pivot(free: &[u64], p: u64, x: u64) -> usize {
    bits(p | x)
        .max_by_key(|&u| ((p & free[u]).count_ones(), std::cmp::Reverse(u)))
        .unwrap_or(0)
}

pub fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub factors: Vec<Vec<u64>>,
    pub all_t0: bool,
    pub c_power: usize,
    pub brute_max: usize,
    pub maximizers: usize,
    pub closed_form_matches: Option<bool>,
    pub ok: bool,
}

/// Checks that the brute-force maximum equals `c^k` exactly when every factor
/// is `T₀`, and that the maximizers then coincide with the closed form.
pub fn verify_classification(factors: &[PairSpec]) -> Result<ClassificationReport, Error> {
    let g = LinkageGraph::new(factors)?;
    let pair = factors[0].pair();
    let t0 = pair.t0();
    let c = pair.spec_t0().conjugacy_count();
    let all_t0 = factors.iter().all(|f| f.t == t0 && f.pair() == pair);
    let c_power = c.pow(factors.len() as u32);
    let brute = g.max_disconnected(true)?;
    let closed_form_matches = if all_t0 {
        Some(g.construct_m()?.sets == brute.sets)
    } else {
        None
    };
    let ok = (brute.size == c_power) == all_t0 && brute.size <= c_power && closed_form_matches != Some(false);
    Ok(ClassificationReport {
        factors: factors.iter().map(|f| f.t.clone()).collect(),
        all_t0,
        c_power,
        brute_max: brute.size,
        maximizers: brute.sets.len(),
        closed_form_matches,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupPair, PRESETS};

    fn t0(name: &str) -> PairSpec {
        GroupPair::parse(name).unwrap().spec_t0()
    }

    /// Vertex set from 1-based within-factor indices (odd = `u`-type).
    fn set_k1(g: &LinkageGraph, ones: &[usize]) -> u64 {
        ones.iter().fold(0, |m, &i| m | 1 << g.vertex(&[i - 1]))
    }

    #[test]
    fn phi_examples() {
        let s = t0("D4:C4").neighbor_masks();
        // 1-based (1,4) is (0,3) here.
        assert_eq!(phi(&s, 0, 3), 1);
        for x in 0..4 {
            for y in [0, 2] {
                assert_eq!(phi(&s, x, y), 0);
            }
        }
        assert_eq!(phi(&s, 1, 3), 1);
        assert_eq!(phi(&s, 3, 1), 1);
        assert_eq!(delta(&s, 1, 3), 0);
    }

    #[test]
    fn delta_matches_commutator_edges() {
        // Δ links exactly u_w and v_z with w, z adjacent in 𝒢(T).
        for name in PRESETS {
            let spec = t0(name);
            let s = spec.neighbor_masks();
            let q = spec.ext.form();
            for x in 0..2 * spec.r() {
                assert_eq!(delta(&s, x, x), 0);
                for y in 0..2 * spec.r() {
                    assert_eq!(delta(&s, x, y), delta(&s, y, x));
                    let edge = q.b(spec.t[slot(x)], spec.t[slot(y)]) == 1;
                    let l = edge && is_v_type(x) != is_v_type(y);
                    assert_eq!(delta(&s, x, y) == 1, l);
                }
            }
        }
    }

    #[test]
    fn delta_k_is_sum_of_factors() {
        let f = [t0("D4oC4:Q8"), t0("D4:C4")];
        let g = LinkageGraph::new(&f).unwrap();
        for x in 0..g.n_vertices() {
            for y in 0..g.n_vertices() {
                let (cx, cy) = (g.coords(x), g.coords(y));
                let sum = delta(g.s_masks(0), cx[0], cy[0]) ^ delta(g.s_masks(1), cx[1], cy[1]);
                assert_eq!(g.delta_k(&cx, &cy), sum);
                assert_eq!(g.linked(x, y), sum == 1);
            }
        }
    }

    #[test]
    fn d4_maximizers() {
        let g = LinkageGraph::new(&[t0("D4:C4")]).unwrap();
        let fam = g.max_disconnected(true).unwrap();
        assert_eq!(fam.size, 2);
        let mut want = vec![set_k1(&g, &[1, 3]), set_k1(&g, &[2, 4])];
        want.sort();
        assert_eq!(fam.sets, want);
        assert_eq!(fam.kind, FamilyKind::Type1);
    }

    #[test]
    fn triangle_maximizers() {
        let g = LinkageGraph::new(&[t0("D4oC4:Q8")]).unwrap();
        let fam = g.max_disconnected(true).unwrap();
        assert_eq!(fam.size, 3);
        let mut want = vec![set_k1(&g, &[1, 3, 5]), set_k1(&g, &[2, 4, 6])];
        want.sort();
        assert_eq!(fam.sets, want);
        assert_eq!(g.construct_m().unwrap().sets, want);
    }

    #[test]
    fn d4_squared_has_c_squared() {
        let g = LinkageGraph::new(&[t0("D4:C4"), t0("D4:C4")]).unwrap();
        assert_eq!(g.max_disconnected(true).unwrap().size, 4);
    }

    #[test]
    fn isolated_slots_join_every_member() {
        let spec = t0("D4xC2:D4");
        let g = LinkageGraph::new(&[spec.clone()]).unwrap();
        let m = g.construct_m().unwrap();
        assert_eq!(m.size, 4);
        assert_eq!(m.sets.len(), 2);
        assert_eq!(m.sets, g.max_disconnected(true).unwrap().sets);
    }

    #[test]
    fn form_p_examples() {
        let p = fk_form_p(&[t0("D4:C4")]).unwrap();
        assert_eq!(p.q(0), 0);
        let singular: Vec<u64> = (1..4).filter(|&w| p.q(w) == 0).collect();
        assert_eq!(singular.len(), 2);
        let p2 = fk_form_p(&[t0("D4:C4"), t0("D4:C4")]).unwrap();
        assert!(p2.radical().is_empty());
        // Largest totally singular subspace of F₂⁴ has dimension 2.
        let sing: Vec<u64> = (0..16).filter(|&w| p2.q(w) == 0).collect();
        let mut best = 0;
        for a in &sing {
            for b in &sing {
                for c in &sing {
                    let span = crate::gf2::span(&[*a, *b, *c]);
                    if span.iter().all(|&w| p2.q(w) == 0) {
                        best = best.max(crate::gf2::rank_of(&[*a, *b, *c]));
                    }
                }
            }
        }
        assert_eq!(best, 2);
        assert!(fk_form_p(&[t0("D4oC4:Q8")]).is_err());
    }

    #[test]
    fn maximum_sets_are_unlinked_and_bounded() {
        for name in PRESETS {
            let pair = GroupPair::parse(name).unwrap();
            let subsets = pair.spanning_subsets();
            for a in &subsets {
                for b in &subsets {
                    let g = LinkageGraph::new(&[a.clone(), b.clone()]).unwrap();
                    let fam = g.max_disconnected(true).unwrap();
                    assert!(fam.size <= g.c_hat(), "{name}");
                    for &s in &fam.sets {
                        assert!(g.is_unlinked_set(s));
                        assert!(g.has_full_support(s));
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_members_are_valid() {
        for name in PRESETS {
            for k in 1..=2 {
                let f = vec![t0(name); k];
                let g = LinkageGraph::new(&f).unwrap();
                let m = g.construct_m().unwrap();
                assert_eq!(m.size, g.c_hat());
                for &s in &m.sets {
                    assert!(g.is_unlinked_set(s));
                    assert!(g.has_full_support(s));
                }
            }
        }
    }

    #[test]
    fn translation_invariance_in_class_space() {
        let p = bipartite_form(2);
        let sets = max_singular_cover(&p, 2);
        for &v in &sets {
            for c in 0..16u64 {
                let moved = bits(v).fold(0u64, |m, q| m | 1 << (q as u64 ^ c));
                assert!(bits(moved).all(|a| bits(moved).all(|b| p.q((a ^ b) as u64) == 0)));
            }
            // Each maximizer is a 2-dimensional subspace or a coset of one.
            let pts: Vec<u64> = bits(v).map(|q| q as u64).collect();
            assert_eq!(pts.len(), 4);
            let shifted: Vec<u64> = pts.iter().map(|&q| q ^ pts[0]).collect();
            assert_eq!(crate::gf2::span(&shifted).len(), 4);
        }
    }

    #[test]
    fn classification_all_presets_k1() {
        for name in PRESETS {
            let pair = GroupPair::parse(name).unwrap();
            for spec in pair.spanning_subsets() {
                let rep = verify_classification(&[spec]).unwrap();
                assert!(rep.ok, "{name}: {rep:?}");
            }
        }
    }

    #[test]
    fn classification_all_presets_k2() {
        for name in PRESETS {
            let pair = GroupPair::parse(name).unwrap();
            let subsets = pair.spanning_subsets();
            for a in &subsets {
                for b in &subsets {
                    let rep = verify_classification(&[a.clone(), b.clone()]).unwrap();
                    assert!(rep.ok, "{name}: {rep:?}");
                }
            }
        }
    }
}
