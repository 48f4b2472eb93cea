//! Central extensions `G` of `F₂ⁿ` by `F₂` realised by an explicit cocycle,
//! index-2 subgroups given by a functional, and the derived data used by the
//! counting formula: `T₀`, `c_T`, the graph on `T`, automorphism groups.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::forms::QuadForm;
use crate::gf2::{self, parity, Gf2Vector};
use crate::Error;

/// `G = F₂ⁿ × F₂` with `(u,ε)(v,δ) = (u+v, ε+δ+β(u,v))`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CentralExtension {
    form: QuadForm,
    /// `lower[i]`: bits `j < i` with `a_ij = 1`.
    lower: Vec<u64>,
    diag: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub u: Gf2Vector,
    pub eps: u8,
}

impl GroupElement {
    pub fn new(u: Gf2Vector, eps: u8) -> Self {
        GroupElement { u, eps: eps & 1 }
    }
}

impl CentralExtension {
    /// Rejects the zero form, for which `G` would be elementary abelian.
    pub fn new(form: QuadForm) -> Result<Self, Error> {
        if form.is_zero() {
            return Err(Error::Invalid("zero form gives an elementary abelian group".into()));
        }
        let n = form.dim();
        let lower = (0..n)
            .map(|i| (0..i).filter(|&j| form.coeff(i, j) == 1).fold(0u64, |m, j| m | 1 << j))
            .collect();
        let diag = (0..n).filter(|&i| form.coeff(i, i) == 1).fold(0u64, |m, i| m | 1 << i);
        Ok(CentralExtension { form, lower, diag })
    }

    pub fn form(&self) -> &QuadForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn order(&self) -> u64 {
        1 << (self.dim() + 1)
    }

    /// `β(u,v) = Σ_{i>j} a_ij u_i v_j + Σ_i a_ii u_i v_i`.
    #[inline]
    pub fn beta(&self, u: u64, v: u64) -> u8 {
        let mut acc = parity(self.diag & u & v);
        let mut rest = u;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc ^= parity(self.lower[i] & v);
        }
        acc
    }

    #[inline]
    pub fn mul_raw(&self, (u, e): (u64, u8), (v, d): (u64, u8)) -> (u64, u8) {
        (u ^ v, e ^ d ^ self.beta(u, v))
    }

    pub fn multiply(&self, g1: &GroupElement, g2: &GroupElement) -> Result<GroupElement, Error> {
        for g in [g1, g2] {
            if g.u.dim() != self.dim() {
                return Err(Error::DimensionMismatch(self.dim(), g.u.dim()));
            }
        }
        let (w, e) = self.mul_raw((g1.u.bits(), g1.eps), (g2.u.bits(), g2.eps));
        Ok(GroupElement::new(Gf2Vector::new(self.dim(), w), e))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::new(Gf2Vector::zero(self.dim()), 0)
    }

    pub fn inverse_raw(&self, (u, e): (u64, u8)) -> (u64, u8) {
        // g·g = (0, Q(u)), so g⁻¹ = g·(0,Q(u)).
        (u, e ^ self.form.q(u))
    }

    pub fn elements_raw(&self) -> impl Iterator<Item = (u64, u8)> {
        let n = self.dim();
        (0..1u64 << n).flat_map(|u| [(u, 0u8), (u, 1u8)])
    }

    pub fn order_raw(&self, g: (u64, u8)) -> u32 {
        let mut x = g;
        let mut k = 1;
        while x != (0, 0) {
            x = self.mul_raw(x, g);
            k += 1;
        }
        k
    }

    pub fn element_order(&self, g: &GroupElement) -> u32 {
        self.order_raw((g.u.bits(), g.eps))
    }

    pub fn commutator_raw(&self, x: (u64, u8), y: (u64, u8)) -> (u64, u8) {
        let xy = self.mul_raw(x, y);
        let yx = self.mul_raw(y, x);
        self.mul_raw(xy, self.inverse_raw(yx))
    }

    /// `#{g ∈ C_G(x) : g^{2^m} = 1}` by enumeration.
    pub fn centralizer_torsion(&self, x: &GroupElement, m: u32) -> u64 {
        let xr = (x.u.bits(), x.eps);
        self.elements_raw()
            .filter(|&g| self.mul_raw(g, xr) == self.mul_raw(xr, g))
            .filter(|&g| {
                let mut y = g;
                for _ in 0..m {
                    y = self.mul_raw(y, y);
                }
                y == (0, 0)
            })
            .count() as u64
    }

    /// Brute-force structural invariants, used for naming.
    pub fn invariants(&self, members: &dyn Fn(u64) -> bool) -> GroupInvariants {
        let elems: Vec<(u64, u8)> = self.elements_raw().filter(|&(u, _)| members(u)).collect();
        let commutes = |x, y| self.mul_raw(x, y) == self.mul_raw(y, x);
        let center = elems.iter().filter(|&&x| elems.iter().all(|&y| commutes(x, y))).count();
        let involutions = elems.iter().filter(|&&g| self.order_raw(g) == 2).count();
        GroupInvariants {
            order: elems.len() as u64,
            abelian: center == elems.len(),
            involutions: involutions as u64,
            center: center as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInvariants {
    pub order: u64,
    pub abelian: bool,
    pub involutions: u64,
    pub center: u64,
}

impl GroupInvariants {
    /// A conventional name when the invariants determine the group within
    /// this family, otherwise a descriptive fallback.
    pub fn name(&self) -> String {
        let known = match (self.order, self.abelian, self.involutions, self.center) {
            (4, true, 1, _) => "C4",
            (4, true, 3, _) => "C2xC2",
            (8, false, 5, _) => "D4",
            (8, false, 1, _) => "Q8",
            (8, true, 3, _) => "C4xC2",
            (8, true, 7, _) => "C2^3",
            (16, false, 11, _) => "D4xC2",
            (16, false, 7, _) => "D4oC4",
            (16, false, 3, _) => "Q8xC2",
            (16, true, 7, _) => "C4xC2^2",
            (16, true, 15, _) => "C2^4",
            _ => "",
        };
        if known.is_empty() {
            format!("G{}[inv={},Z={}]", self.order, self.involutions, self.center)
        } else {
            known.to_string()
        }
    }
}

/// An extension with a chosen index-2 subgroup `H`, given by `H̄ = ker h`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct GroupPair {
    pub ext: CentralExtension,
    pub h: Gf2Vector,
}

/// `(G, H, T)` with `T ⊆ F₂ⁿ` stored in increasing order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct PairSpec {
    pub ext: CentralExtension,
    pub h: Gf2Vector,
    pub t: Vec<u64>,
}

pub const PRESETS: [&str; 4] = ["D4:C4", "D4oC4:Q8", "D4oC4:C4xC2", "D4xC2:D4"];

impl GroupPair {
    pub fn new(ext: CentralExtension, h: Gf2Vector) -> Result<Self, Error> {
        if h.dim() != ext.dim() {
            return Err(Error::DimensionMismatch(ext.dim(), h.dim()));
        }
        if h.is_zero() {
            return Err(Error::Invalid("functional must be nonzero".into()));
        }
        Ok(GroupPair { ext, h })
    }

    /// Named presets and the text format `n; a=<hex>; h=<bits>`.
    ///
    /// `a` packs the upper triangle including the diagonal row by row, least
    /// significant bit first (`a_00, a_01, …, a_0(n-1), a_11, …`).
    pub fn parse(s: &str) -> Result<Self, Error> {
        let pairs: &[(usize, usize)] = match s.trim() {
            "D4:C4" => return Self::from_parts(2, &[(0, 1)], "11"),
            "D4oC4:Q8" => &[(0, 1), (0, 2), (1, 2)],
            "D4oC4:C4xC2" => &[(0, 2), (1, 2)],
            "D4xC2:D4" => &[(0, 1)],
            _ => return Self::parse_text(s),
        };
        Self::from_parts(3, pairs, "111")
    }

    fn from_parts(n: usize, pairs: &[(usize, usize)], h: &str) -> Result<Self, Error> {
        let ext = CentralExtension::new(QuadForm::from_pairs(n, pairs)?)?;
        Self::new(ext, Gf2Vector::parse(h)?)
    }

    fn parse_text(s: &str) -> Result<Self, Error> {
        let parts: Vec<&str> = s.split(';').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected `n; a=<hex>; h=<bits>` or a preset, got {s:?}")));
        }
        let n: usize = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension {:?}", parts[0])))?;
        let a = parts[1]
            .strip_prefix("a=")
            .ok_or_else(|| Error::Parse("missing a=".into()))?;
        let a = a.trim_start_matches("0x");
        let bits = u64::from_str_radix(a, 16).map_err(|_| Error::Parse(format!("bad hex {a:?}")))?;
        let h = parts[2]
            .strip_prefix("h=")
            .ok_or_else(|| Error::Parse("missing h=".into()))?;
        let h = Gf2Vector::parse(h)?;
        if h.dim() != n {
            return Err(Error::DimensionMismatch(n, h.dim()));
        }
        let ext = CentralExtension::new(QuadForm::from_upper_bits(n, bits)?)?;
        Self::new(ext, h)
    }

    pub fn to_text(&self) -> String {
        format!("{}; a={:x}; h={}", self.ext.dim(), self.ext.form().upper_bits(), self.h)
    }

    pub fn dim(&self) -> usize {
        self.ext.dim()
    }

    pub fn in_hbar(&self, u: u64) -> bool {
        parity(self.h.bits() & u) == 0
    }

    pub fn t0(&self) -> Vec<u64> {
        maximal_admissible_set(&self.ext, &self.h)
    }

    pub fn is_admissible(&self) -> bool {
        gf2::spans_all(self.dim(), &self.t0())
    }

    pub fn spec(&self, t: Vec<u64>) -> PairSpec {
        let mut t = t;
        t.sort_unstable();
        t.dedup();
        PairSpec {
            ext: self.ext.clone(),
            h: self.h,
            t,
        }
    }

    pub fn spec_t0(&self) -> PairSpec {
        self.spec(self.t0())
    }

    /// Every subset of `T₀` spanning `F₂ⁿ`, in increasing mask order.
    pub fn spanning_subsets(&self) -> Vec<PairSpec> {
        let t0 = self.t0();
        assert!(t0.len() <= 20);
        (1u64..1 << t0.len())
            .map(|m| (0..t0.len()).filter(|i| m >> i & 1 == 1).map(|i| t0[i]).collect::<Vec<_>>())
            .filter(|t| gf2::spans_all(self.dim(), t))
            .map(|t| self.spec(t))
            .collect()
    }

    pub fn g_invariants(&self) -> GroupInvariants {
        self.ext.invariants(&|_| true)
    }

    pub fn h_invariants(&self) -> GroupInvariants {
        self.ext.invariants(&|u| self.in_hbar(u))
    }

    /// Isomorphism label `G:H`.
    pub fn label(&self) -> String {
        format!("{}:{}", self.g_invariants().name(), self.h_invariants().name())
    }

    /// `H` abelian by direct commutation of all pairs of its elements.
    pub fn h_abelian_direct(&self) -> bool {
        self.h_invariants().abelian
    }

    /// `Aut_H`: linear maps preserving `Q` and `H̄`.
    pub fn aut_h(&self) -> Vec<Vec<u64>> {
        aut_search(&self.ext, &self.h, &self.t0())
    }
}

/// `T₀ = {u : Q(u) = 0, h·u = 1}`.
pub fn maximal_admissible_set(ext: &CentralExtension, h: &Gf2Vector) -> Vec<u64> {
    (0..1u64 << ext.dim())
        .filter(|&u| ext.form().q(u) == 0 && parity(h.bits() & u) == 1)
        .collect()
}

/// Graph criterion for `H` abelian: `𝒢(T₀)` is complete bipartite.
pub fn is_h_abelian(ext: &CentralExtension, h: &Gf2Vector) -> Result<bool, Error> {
    let pair = GroupPair::new(ext.clone(), *h)?;
    if !pair.is_admissible() {
        return Err(Error::NotAdmissible(pair.to_text()));
    }
    Ok(pair.spec_t0().is_complete_bipartite())
}

impl PairSpec {
    pub fn dim(&self) -> usize {
        self.ext.dim()
    }

    pub fn r(&self) -> usize {
        self.t.len()
    }

    pub fn pair(&self) -> GroupPair {
        GroupPair {
            ext: self.ext.clone(),
            h: self.h,
        }
    }

    pub fn is_admissible(&self) -> bool {
        let q = self.ext.form();
        !self.t.is_empty()
            && self.t.iter().all(|&u| q.q(u) == 0 && parity(self.h.bits() & u) == 1)
            && gf2::spans_all(self.dim(), &self.t)
    }

    pub fn require_admissible(&self) -> Result<(), Error> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::NotAdmissible(format!("{} with T={:?}", self.pair().to_text(), self.t)))
        }
    }

    /// `S_i = {j : B(t_i, t_j) = 1}` as index masks.
    pub fn neighbor_masks(&self) -> Vec<u64> {
        let q = self.ext.form();
        self.t
            .iter()
            .map(|&x| {
                self.t
                    .iter()
                    .enumerate()
                    .filter(|(_, &y)| q.b(x, y) == 1)
                    .fold(0u64, |m, (j, _)| m | 1 << j)
            })
            .collect()
    }

    /// `c_T = r₁ + 2r₂`: isolated members of `𝒢(T)` count twice.
    pub fn conjugacy_count(&self) -> usize {
        self.neighbor_masks().iter().map(|&s| if s == 0 { 2 } else { 1 }).sum()
    }

    /// Connected components of `𝒢(T)` as sorted index lists, singletons included.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let s = self.neighbor_masks();
        let r = self.r();
        let mut seen = 0u64;
        let mut out = Vec::new();
        for start in 0..r {
            if seen >> start & 1 == 1 {
                continue;
            }
            let mut comp = 1u64 << start;
            loop {
                let next = (0..r).filter(|&i| comp >> i & 1 == 1).fold(comp, |m, i| m | s[i]);
                if next == comp {
                    break;
                }
                comp = next;
            }
            seen |= comp;
            out.push((0..r).filter(|&i| comp >> i & 1 == 1).collect());
        }
        out
    }

    /// The two sides when `𝒢(T)` is complete bipartite; the side holding
    /// `t_0` comes first.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let s = self.neighbor_masks();
        let r = self.r();
        if r < 2 {
            return None;
        }
        let side1 = s[0];
        let side0 = ((1u64 << r) - 1) & !side1;
        if side1 == 0 || side0 >> 0 & 1 == 0 {
            return None;
        }
        for i in 0..r {
            let expect = if side0 >> i & 1 == 1 { side1 } else { side0 };
            if s[i] != expect {
                return None;
            }
        }
        let list = |m: u64| (0..r).filter(|&i| m >> i & 1 == 1).collect();
        Some((list(side0), list(side1)))
    }

    pub fn is_complete_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// `Aut_{H,T}`: linear maps preserving `Q`, `H̄` and `T`. Each map is the
    /// list of images of the unit vectors.
    pub fn aut_group(&self) -> Result<Vec<Vec<u64>>, Error> {
        self.require_admissible()?;
        let all = aut_search(&self.ext, &self.h, &self.t);
        Ok(all.into_iter().filter(|phi| maps_set_onto(phi, &self.t)).collect())
    }
}

pub fn apply_linear(images: &[u64], u: u64) -> u64 {
    let mut out = 0;
    let mut rest = u;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out ^= images[i];
    }
    out
}

fn maps_set_onto(phi: &[u64], t: &[u64]) -> bool {
    let mut img: Vec<u64> = t.iter().map(|&x| apply_linear(phi, x)).collect();
    img.sort_unstable();
    img == t
}

fn preserves(ext: &CentralExtension, h: &Gf2Vector, phi: &[u64]) -> bool {
    let n = ext.dim();
    let q = ext.form();
    (0..n).all(|i| parity(h.bits() & phi[i]) == (h.bits() >> i & 1) as u8)
        && (0..1u64 << n).all(|u| q.q(apply_linear(phi, u)) == q.q(u))
}

/// All `φ` preserving `Q` and `H̄` that send an independent subset of
/// `anchor` into `anchor`. Since such `φ` permute `T₀`, anchoring at any
/// spanning subset of `T₀` that `φ` must preserve loses nothing.
fn aut_search(ext: &CentralExtension, h: &Gf2Vector, anchor: &[u64]) -> Vec<Vec<u64>> {
    let n = ext.dim();
    // Greedy basis from the anchor set.
    let mut basis = Vec::new();
    for &x in anchor {
        basis.push(x);
        if gf2::rank_of(&basis) < basis.len() {
            basis.pop();
        }
    }
    assert_eq!(basis.len(), n, "anchor set must span");
    // Coordinates of unit vectors in this basis: e_i = Σ c_ij b_j.
    let inv = invert_columns(&basis);
    let mut out = Vec::new();
    let mut chosen = vec![0u64; n];
    fn rec(
        k: usize,
        chosen: &mut Vec<u64>,
        anchor: &[u64],
        inv: &[u64],
        ext: &CentralExtension,
        h: &Gf2Vector,
        out: &mut Vec<Vec<u64>>,
    ) {
        let n = chosen.len();
        if k == n {
            if gf2::rank_of(chosen) < n {
                return;
            }
            let phi: Vec<u64> = inv.iter().map(|&c| apply_linear(chosen, c)).collect();
            if preserves(ext, h, &phi) {
                out.push(phi);
            }
            return;
        }
        for &y in anchor {
            if chosen[..k].contains(&y) {
                continue;
            }
            chosen[k] = y;
            rec(k + 1, chosen, anchor, inv, ext, h, out);
        }
    }
    rec(0, &mut chosen, anchor, &inv, ext, h, &mut out);
    out.sort();
    out
}

/// For a basis `b`, returns `c_i` with `e_i = Σ_j (c_i)_j b_j`.
fn invert_columns(b: &[u64]) -> Vec<u64> {
    let n = b.len();
    (0..n)
        .map(|i| {
            // Solve Σ_j x_j b_j = e_i coordinatewise.
            let rows: Vec<u64> = (0..n)
                .map(|coord| (0..n).filter(|&j| b[j] >> coord & 1 == 1).fold(0u64, |m, j| m | 1 << j))
                .collect();
            let targets: Vec<u8> = (0..n).map(|coord| (coord == i) as u8).collect();
            gf2::solve(n, &rows, &targets).expect("basis is invertible")
        })
        .collect()
}

/// Every invertible `n×n` matrix, as images of unit vectors. Only for `n ≤ 4`.
pub fn general_linear(n: usize) -> Vec<Vec<u64>> {
    assert!(n <= 4, "GL_n enumeration is limited to n ≤ 4");
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let sp = gf2::span(cur);
        for v in 1..1u64 << n {
            if sp.binary_search(&v).is_err() {
                cur.push(v);
                rec(n, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

/// Brute-force `Aut_{H,T}` over all of `GL_n`, for cross-checking.
pub fn aut_group_full_gl(spec: &PairSpec) -> Vec<Vec<u64>> {
    general_linear(spec.dim())
        .into_iter()
        .filter(|phi| preserves(&spec.ext, &spec.h, phi) && maps_set_onto(phi, &spec.t))
        .collect()
}

/// One row of the table of admissible pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub n: usize,
    pub label: String,
    pub spec: String,
    pub t0: Vec<String>,
    pub c: usize,
    pub components: usize,
    pub complete_bipartite: bool,
    pub h_abelian: bool,
    pub aut_h: usize,
}

pub fn summarize(pair: &GroupPair) -> PairSummary {
    let spec = pair.spec_t0();
    PairSummary {
        n: pair.dim(),
        label: pair.label(),
        spec: pair.to_text(),
        t0: spec.t.iter().map(|&u| Gf2Vector::new(pair.dim(), u).to_string()).collect(),
        c: spec.conjugacy_count(),
        components: spec.components().len(),
        complete_bipartite: spec.is_complete_bipartite(),
        h_abelian: pair.h_abelian_direct(),
        aut_h: pair.aut_h().len(),
    }
}

/// Admissible pairs `(Q, h)` on `F₂ⁿ` up to the action of `GL_n`, each
/// represented by the smallest `(form bits, h bits)` in its orbit.
pub fn admissible_pairs_up_to_iso(n: usize) -> Vec<GroupPair> {
    assert!((1..=5).contains(&n), "supported for 1 ≤ n ≤ 5");
    let k = n * (n + 1) / 2;
    let nh = (1usize << n) - 1;
    let index = |f: u64, h: u64| f as usize * nh + (h as usize - 1);
    let total = (1usize << k) * nh;
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    // Generators of GL_n: a transvection, a transposition, an n-cycle.
    let mut gens: Vec<Vec<u64>> = Vec::new();
    if n >= 2 {
        let mut tv: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        tv[0] |= 1 << 1;
        gens.push(tv);
        let mut sw: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        sw.swap(0, 1);
        gens.push(sw);
        gens.push((0..n).map(|i| 1u64 << ((i + 1) % n)).collect());
    }
    for fb in 0..1u64 << k {
        let f = QuadForm::from_upper_bits(n, fb).unwrap();
        for g in &gens {
            let f2 = f.pullback(g).upper_bits();
            for h in 1..1u64 << n {
                // (h∘φ)(e_i) = h·φ(e_i)
                let h2 = (0..n).fold(0u64, |m, i| m | (parity(h & g[i]) as u64) << i);
                let (a, b) = (find(&mut parent, index(fb, h)), find(&mut parent, index(f2, h2)));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut reps: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for fb in 0..1u64 << k {
        for h in 1..1u64 << n {
            let root = find(&mut parent, index(fb, h));
            reps.entry(root).or_insert((fb, h));
        }
    }
    let mut out: Vec<GroupPair> = reps
        .values()
        .filter_map(|&(fb, h)| {
            let form = QuadForm::from_upper_bits(n, fb).ok()?;
            let ext = CentralExtension::new(form).ok()?;
            let pair = GroupPair::new(ext, Gf2Vector::new(n, h)).ok()?;
            pair.is_admissible().then_some(pair)
        })
        .collect();
    out.sort_by_key(|p| (p.ext.form().upper_bits(), p.h.bits()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn preset(name: &str) -> GroupPair {
        GroupPair::parse(name).unwrap()
    }

    fn v(s: &str) -> Gf2Vector {
        Gf2Vector::parse(s).unwrap()
    }

    fn all_exts(n: usize) -> Vec<CentralExtension> {
        let k = n * (n + 1) / 2;
        (1..1u64 << k)
            .map(|b| CentralExtension::new(QuadForm::from_upper_bits(n, b).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn multiplication_examples() {
        let d4 = preset("D4:C4").ext;
        let x1 = GroupElement::new(v("10"), 0);
        let x2 = GroupElement::new(v("01"), 0);
        assert_eq!(d4.multiply(&x1, &x1).unwrap(), d4.identity());
        let comm = d4.commutator_raw((1, 0), (2, 0));
        assert_eq!(comm, (0, 1));
        let x12 = d4.multiply(&x1, &x2).unwrap();
        assert_eq!(d4.multiply(&x12, &x12).unwrap(), GroupElement::new(v("00"), 1));
        assert_eq!(d4.element_order(&x12), 4);
        let bad = GroupElement::new(v("100"), 0);
        assert!(d4.multiply(&x1, &bad).is_err());
    }

    #[test]
    fn cocycle_identities_and_associativity() {
        for n in 1..=4 {
            for ext in all_exts(n) {
                let q = ext.form();
                for u in 0..1u64 << n {
                    assert_eq!(ext.beta(u, u), q.q(u));
                    for w in 0..1u64 << n {
                        assert_eq!(ext.beta(u, w) ^ ext.beta(w, u), q.b(u, w));
                    }
                }
                if n <= 3 {
                    let els: Vec<_> = ext.elements_raw().collect();
                    for &a in &els {
                        for &b in &els {
                            for &c in &els {
                                assert_eq!(
                                    ext.mul_raw(ext.mul_raw(a, b), c),
                                    ext.mul_raw(a, ext.mul_raw(b, c))
                                );
                            }
                        }
                    }
                } else {
                    // Associativity of a 2-cocycle reduces to the cocycle identity.
                    for a in 0..16u64 {
                        for b in 0..16u64 {
                            for c in 0..16u64 {
                                assert_eq!(
                                    ext.beta(a, b) ^ ext.beta(a ^ b, c),
                                    ext.beta(b, c) ^ ext.beta(a, b ^ c)
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn orders_follow_the_form() {
        for n in 1..=4 {
            for ext in all_exts(n) {
                for (u, e) in ext.elements_raw() {
                    let o = ext.order_raw((u, e));
                    assert!([1, 2, 4].contains(&o));
                    let sq = ext.mul_raw((u, e), (u, e));
                    assert_eq!(sq, (0, ext.form().q(u)));
                    if u != 0 {
                        assert_eq!(o, ext.order_raw((u, e ^ 1)));
                        assert_eq!(o == 4, ext.form().q(u) == 1);
                    }
                }
                // (0,1) is central of order 2.
                assert_eq!(ext.order_raw((0, 1)), 2);
                for g in ext.elements_raw() {
                    assert_eq!(ext.mul_raw(g, (0, 1)), ext.mul_raw((0, 1), g));
                }
            }
        }
    }

    #[test]
    fn t0_examples() {
        assert_eq!(preset("D4:C4").t0(), vec![0b01, 0b10]);
        assert!(preset("D4:C4").is_admissible());
        assert_eq!(preset("D4oC4:Q8").t0(), vec![0b001, 0b010, 0b100]);
        let t = preset("D4oC4:C4xC2").t0();
        let mut want = vec![v("100").bits(), v("010").bits(), v("001").bits(), v("111").bits()];
        want.sort();
        assert_eq!(t, want);
        assert_eq!(preset("D4xC2:D4").t0(), vec![0b001, 0b010, 0b100]);
    }

    #[test]
    fn admissibility_examples() {
        let p = preset("D4:C4");
        assert!(p.spec_t0().is_admissible());
        assert!(!p.spec(vec![0b01]).is_admissible());
        assert!(CentralExtension::new(QuadForm::from_pairs(2, &[]).unwrap()).is_err());
    }

    #[test]
    fn t0_is_order_two_lifts_outside_h() {
        for n in 1..=4 {
            for ext in all_exts(n) {
                for h in 1..1u64 << n {
                    let hv = Gf2Vector::new(n, h);
                    let by_order: Vec<u64> = (0..1u64 << n)
                        .filter(|&u| parity(h & u) == 1 && ext.order_raw((u, 0)) == 2)
                        .collect();
                    assert_eq!(maximal_admissible_set(&ext, &hv), by_order);
                }
            }
        }
    }

    #[test]
    fn conjugacy_count_examples() {
        assert_eq!(preset("D4:C4").spec_t0().conjugacy_count(), 2);
        assert_eq!(preset("D4oC4:Q8").spec_t0().conjugacy_count(), 3);
        assert_eq!(preset("D4oC4:C4xC2").spec_t0().conjugacy_count(), 4);
        assert_eq!(preset("D4xC2:D4").spec_t0().conjugacy_count(), 4);
    }

    #[test]
    fn conjugacy_count_matches_class_enumeration() {
        for n in 2..=4 {
            for ext in all_exts(n) {
                for h in 1..1u64 << n {
                    let pair = GroupPair::new(ext.clone(), Gf2Vector::new(n, h)).unwrap();
                    if !pair.is_admissible() {
                        continue;
                    }
                    let spec = pair.spec_t0();
                    let lifts: Vec<(u64, u8)> = spec.t.iter().flat_map(|&u| [(u, 0), (u, 1)]).collect();
                    let mut classes = std::collections::BTreeSet::new();
                    for &x in &lifts {
                        let class: std::collections::BTreeSet<_> = ext
                            .elements_raw()
                            .map(|g| ext.mul_raw(ext.mul_raw(g, x), ext.inverse_raw(g)))
                            .collect();
                        classes.insert(class.into_iter().collect::<Vec<_>>());
                    }
                    assert_eq!(classes.len(), spec.conjugacy_count());
                }
            }
        }
    }

    #[test]
    fn c_t_is_maximised_only_by_t0() {
        for n in 2..=4 {
            for ext in all_exts(n) {
                for h in 1..1u64 << n {
                    let pair = GroupPair::new(ext.clone(), Gf2Vector::new(n, h)).unwrap();
                    if !pair.is_admissible() {
                        continue;
                    }
                    let c0 = pair.spec_t0().conjugacy_count();
                    let t0 = pair.t0();
                    for spec in pair.spanning_subsets() {
                        let c = spec.conjugacy_count();
                        assert!(c <= c0);
                        assert_eq!(c == c0, spec.t == t0);
                    }
                }
            }
        }
    }

    #[test]
    fn abelian_examples() {
        let q8 = preset("D4oC4:Q8");
        assert!(!is_h_abelian(&q8.ext, &q8.h).unwrap());
        let c4c2 = preset("D4oC4:C4xC2");
        assert!(is_h_abelian(&c4c2.ext, &c4c2.h).unwrap());
        let d4 = preset("D4:C4");
        assert!(is_h_abelian(&d4.ext, &d4.h).unwrap());
        assert!(d4.h_abelian_direct());
    }

    #[test]
    fn aut_examples() {
        assert_eq!(preset("D4:C4").spec_t0().aut_group().unwrap().len(), 2);
        assert_eq!(preset("D4oC4:Q8").spec_t0().aut_group().unwrap().len(), 6);
        let ident: Vec<u64> = (0..3).map(|i| 1 << i).collect();
        assert!(preset("D4xC2:D4").spec_t0().aut_group().unwrap().contains(&ident));
    }

    #[test]
    fn aut_search_matches_full_gl() {
        for n in 2..=4 {
            for ext in all_exts(n) {
                for h in 1..1u64 << n {
                    let pair = GroupPair::new(ext.clone(), Gf2Vector::new(n, h)).unwrap();
                    if !pair.is_admissible() {
                        continue;
                    }
                    if n <= 3 {
                        for spec in pair.spanning_subsets() {
                            assert_eq!(spec.aut_group().unwrap(), aut_group_full_gl(&spec));
                        }
                    }
                    // Aut_{H,T₀} = Aut_H.
                    let aut_h: Vec<Vec<u64>> = general_linear(n)
                        .into_iter()
                        .filter(|phi| preserves(&ext, &pair.h, phi))
                        .collect();
                    assert_eq!(pair.aut_h(), aut_h);
                    assert_eq!(pair.spec_t0().aut_group().unwrap(), aut_h);
                }
            }
        }
    }

    #[test]
    fn aut_group_is_closed() {
        for name in PRESETS {
            let spec = preset(name).spec_t0();
            let g = spec.aut_group().unwrap();
            for a in &g {
                for b in &g {
                    let ab: Vec<u64> = b.iter().map(|&x| apply_linear(a, x)).collect();
                    assert!(g.contains(&ab));
                }
            }
        }
    }

    #[test]
    fn centralizer_torsion_examples() {
        let d4 = preset("D4:C4").ext;
        let x = GroupElement::new(v("10"), 0);
        assert_eq!(d4.centralizer_torsion(&x, 0), 1);
        assert_eq!(d4.centralizer_torsion(&x, 1), 4);
        assert_eq!(d4.centralizer_torsion(&x, 10), 4);
    }

    #[test]
    fn spec_text_roundtrip() {
        for name in PRESETS {
            let p = preset(name);
            assert_eq!(GroupPair::parse(&p.to_text()).unwrap(), p);
        }
        assert!(GroupPair::parse("2; a=2; h=11").is_ok());
        assert!(GroupPair::parse("2; a=0; h=11").is_err());
        assert!(GroupPair::parse("2; a=2").is_err());
    }

    #[test]
    fn pair_table_small() {
        let n2: Vec<String> = admissible_pairs_up_to_iso(2).iter().map(|p| p.label()).collect();
        assert_eq!(n2, vec!["D4:C4"]);
        let mut n3: Vec<(String, usize)> = admissible_pairs_up_to_iso(3)
            .iter()
            .map(|p| (p.label(), p.spec_t0().conjugacy_count()))
            .collect();
        n3.sort();
        assert_eq!(
            n3,
            vec![("D4oC4:Q8".into(), 3), ("D4xC2:C4xC2".into(), 4), ("D4xC2:D4".into(), 4)]
        );
    }

    proptest! {
        #[test]
        fn abelian_criterion_agrees(bits in 1u64..1024, h in 1u64..16) {
            let ext = CentralExtension::new(QuadForm::from_upper_bits(4, bits).unwrap()).unwrap();
            let pair = GroupPair::new(ext, Gf2Vector::new(4, h)).unwrap();
            prop_assume!(pair.is_admissible());
            prop_assert_eq!(pair.spec_t0().is_complete_bipartite(), pair.h_abelian_direct());
        }
    }
}
