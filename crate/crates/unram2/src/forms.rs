//! Quadratic and alternating bilinear forms on `F₂ⁿ`.

use serde::{Deserialize, Serialize};

use crate::gf2::{self, parity, Gf2Matrix, Gf2Vector};
use crate::Error;

/// `Q(u) = Σ_{i≤j} a_ij u_i u_j` for a symmetric coefficient matrix `a`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct QuadForm {
    n: usize,
    /// Diagonal coefficients as a mask.
    diag: u64,
    /// Row `i` of the off-diagonal part; symmetric, zero diagonal.
    alt: Vec<u64>,
}

impl QuadForm {
    /// Builds a form from the rows of a symmetric matrix.
    pub fn from_symmetric(n: usize, rows: &[u64]) -> Result<Self, Error> {
        if n == 0 || n > 32 || rows.len() != n {
            return Err(Error::Invalid(format!("bad form size {n}")));
        }
        let mut diag = 0;
        let mut alt = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                let aij = rows[i] >> j & 1;
                if aij != rows[j] >> i & 1 {
                    return Err(Error::Invalid("coefficient matrix is not symmetric".into()));
                }
                if i == j {
                    diag |= aij << i;
                } else {
                    alt[i] |= aij << j;
                }
            }
        }
        Ok(QuadForm { n, diag, alt })
    }

    /// Builds a form from a list of coefficients `(i, j, 1)`, `i ≤ j`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, Error> {
        let mut rows = vec![0u64; n];
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!("index ({i},{j}) out of range")));
            }
            rows[i] ^= 1 << j;
            if i != j {
                rows[j] ^= 1 << i;
            }
        }
        Self::from_symmetric(n, &rows)
    }

    /// Upper triangle including the diagonal, packed row by row:
    /// bit 0 is `a_00`, then `a_01 .. a_0(n-1)`, then `a_11`, and so on.
    pub fn upper_bits(&self) -> u64 {
        let mut out = 0u64;
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                out |= self.coeff(i, j) << k;
                k += 1;
            }
        }
        out
    }

    pub fn from_upper_bits(n: usize, bits: u64) -> Result<Self, Error> {
        if n == 0 || n * (n + 1) / 2 > 64 {
            return Err(Error::Invalid(format!("bad form size {n}")));
        }
        let mut pairs = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                if bits >> k & 1 == 1 {
                    pairs.push((i, j));
                }
                k += 1;
            }
        }
        if k < 64 && bits >> k != 0 {
            return Err(Error::Invalid("coefficient bits exceed the upper triangle".into()));
        }
        Self::from_pairs(n, &pairs)
    }

    /// Recovers the unique form with the given values on all of `F₂ⁿ`.
    /// Fails if `values` is not a quadratic function.
    pub fn from_values(n: usize, values: impl Fn(u64) -> u8) -> Result<Self, Error> {
        let mut pairs = Vec::new();
        for i in 0..n {
            if values(1 << i) & 1 == 1 {
                pairs.push((i, i));
            }
            for j in i + 1..n {
                let v = values((1 << i) | (1 << j)) ^ values(1 << i) ^ values(1 << j);
                if v & 1 == 1 {
                    pairs.push((i, j));
                }
            }
        }
        let f = Self::from_pairs(n, &pairs)?;
        if n < 24 && (0..1u64 << n).any(|u| f.q(u) != values(u) & 1) {
            return Err(Error::Invalid("values are not a quadratic form".into()));
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, i: usize, j: usize) -> u64 {
        if i == j {
            self.diag >> i & 1
        } else {
            self.alt[i] >> j & 1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.diag == 0 && self.alt.iter().all(|&r| r == 0)
    }

    /// Off-diagonal Gram matrix of `B`.
    pub fn gram(&self) -> Gf2Matrix {
        Gf2Matrix::from_rows(self.n, self.alt.clone())
    }

    /// `Q` on a packed vector.
    #[inline]
    pub fn q(&self, u: u64) -> u8 {
        let mut acc = parity(self.diag & u);
        let mut rest = u;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            // Count each pair i<j once.
            acc ^= parity(self.alt[i] & rest);
        }
        acc
    }

    /// `B(u,v) = Q(u+v)+Q(u)+Q(v)` on packed vectors.
    #[inline]
    pub fn b(&self, u: u64, v: u64) -> u8 {
        let mut acc = 0;
        let mut rest = u;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc ^= parity(self.alt[i] & v);
        }
        acc
    }

    pub fn eval_q(&self, u: &Gf2Vector) -> Result<u8, Error> {
        self.check(u)?;
        Ok(self.q(u.bits()))
    }

    pub fn eval_b(&self, u: &Gf2Vector, v: &Gf2Vector) -> Result<u8, Error> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.b(u.bits(), v.bits()))
    }

    fn check(&self, u: &Gf2Vector) -> Result<(), Error> {
        if u.dim() != self.n {
            return Err(Error::DimensionMismatch(self.n, u.dim()));
        }
        Ok(())
    }

    /// `Q ∘ φ` where `φ` sends `e_i` to `images[i]`.
    pub fn pullback(&self, images: &[u64]) -> QuadForm {
        let apply = |u: u64| {
            let mut out = 0;
            for (i, &img) in images.iter().enumerate() {
                if u >> i & 1 == 1 {
                    out ^= img;
                }
            }
            out
        };
        QuadForm::from_values(self.n, |u| self.q(apply(u))).expect("pullback is quadratic")
    }

    /// Radical of `B`, as a basis.
    pub fn radical(&self) -> Vec<u64> {
        self.gram().kernel()
    }
}

/// `F₂ⁿ = V ⊕ R ⊕ R₀` with `R ⊕ R₀` the radical of `B` and `R₀ = ker Q|rad`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadicalDecomposition {
    pub v: Vec<Gf2Vector>,
    pub r: Vec<Gf2Vector>,
    pub r0: Vec<Gf2Vector>,
}

pub fn radical_decompose(f: &QuadForm) -> RadicalDecomposition {
    let n = f.dim();
    let rad = f.radical();
    // Q is additive on the radical, so its kernel there is a subspace.
    let mut r = Vec::new();
    let mut r0 = Vec::new();
    let mut anisotropic: Option<u64> = None;
    for &x in &rad {
        if f.q(x) == 0 {
            r0.push(x);
        } else if let Some(y) = anisotropic {
            r0.push(x ^ y);
        } else {
            anisotropic = Some(x);
            r.push(x);
        }
    }
    // Complete the radical to a basis of F₂ⁿ with unit vectors.
    let mut basis: Vec<u64> = rad.clone();
    let mut v = Vec::new();
    for i in 0..n {
        let e = 1u64 << i;
        basis.push(e);
        if gf2::rank_of(&basis) == basis.len() {
            v.push(e);
        } else {
            basis.pop();
        }
    }
    let wrap = |xs: Vec<u64>| xs.into_iter().map(|x| Gf2Vector::new(n, x)).collect();
    RadicalDecomposition {
        v: wrap(v),
        r: wrap(r),
        r0: wrap(r0),
    }
}

/// A totally singular subspace `W′` with `dim W′ = dim W` meeting `W` only in 0.
///
/// Requires `Q(W) = 0` and `ker Q|rad = 0`. Builds hyperbolic partners one at a time.
pub fn disjoint_totally_singular(f: &QuadForm, w: &[Gf2Vector]) -> Result<Vec<Gf2Vector>, Error> {
    let n = f.dim();
    if !radical_decompose(f).r0.is_empty() {
        return Err(Error::Precondition("Q vanishes on part of the radical".into()));
    }
    let wb: Vec<u64> = w.iter().map(|x| x.bits()).collect();
    for x in gf2::span(&wb) {
        if f.q(x) != 0 {
            return Err(Error::Precondition("W is not totally singular".into()));
        }
    }
    // Work with an independent basis of W.
    let (red, _) = Gf2Matrix::from_rows(n, wb).rref();
    let basis: Vec<u64> = red.rows().to_vec();
    let gram = f.gram();
    let mut partners: Vec<u64> = Vec::new();
    for i in 0..basis.len() {
        // B(x, ·) is the functional given by gram·x.
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for (j, &wj) in basis.iter().enumerate() {
            rows.push(gram.apply(wj));
            targets.push((i == j) as u8);
        }
        for &vl in &partners {
            rows.push(gram.apply(vl));
            targets.push(0);
        }
        let mut v = gf2::solve(n, &rows, &targets)
            .ok_or_else(|| Error::Precondition("no hyperbolic partner exists".into()))?;
        if f.q(v) == 1 {
            // B(v, w_i) = 1 and Q(w_i) = 0, so this flips Q(v) and keeps the other pairings.
            v ^= basis[i];
        }
        partners.push(v);
    }
    Ok(partners.into_iter().map(|x| Gf2Vector::new(n, x)).collect())
}

/// Outcome of checking `|T^⊥ ∩ T| ≤ |S| − |T|` over all admissible `T ⊆ S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropicReport {
    pub applicable: bool,
    pub s: Vec<Gf2Vector>,
    /// The `T` with the least slack `|S| − |T| − |T^⊥ ∩ T|`.
    pub worst_t: Vec<Gf2Vector>,
    pub worst_slack: i64,
    pub subsets_checked: u64,
    pub holds: bool,
}

/// Checks the isotropic bound for the hyperplane `ker h`.
pub fn isotropic_bound_report(f: &QuadForm, h: &Gf2Vector) -> Result<IsotropicReport, Error> {
    if h.dim() != f.dim() {
        return Err(Error::DimensionMismatch(f.dim(), h.dim()));
    }
    if h.is_zero() {
        return Err(Error::Invalid("functional must be nonzero".into()));
    }
    Ok(isotropic_bound_for_subspace(f, &[h.bits()]))
}

/// Checks the isotropic bound for the subspace cut out by `functionals`
/// (codimension equals their rank). `S = ker Q` minus that subspace.
pub fn isotropic_bound_for_subspace(f: &QuadForm, functionals: &[u64]) -> IsotropicReport {
    let n = f.dim();
    let in_sub = |u: u64| functionals.iter().all(|&h| parity(h & u) == 0);
    let s: Vec<u64> = (1..1u64 << n).filter(|&u| f.q(u) == 0 && !in_sub(u)).collect();
    let wrap = |xs: &[u64]| xs.iter().map(|&x| Gf2Vector::new(n, x)).collect::<Vec<_>>();
    let mut report = IsotropicReport {
        applicable: gf2::spans_all(n, &s),
        s: wrap(&s),
        worst_t: Vec::new(),
        worst_slack: s.len() as i64,
        subsets_checked: 0,
        holds: true,
    };
    if !report.applicable {
        return report;
    }
    assert!(s.len() <= 20, "S too large for exhaustive search");
    let r0 = gf2::span(&radical_decompose(f).r0.iter().map(|x| x.bits()).collect::<Vec<_>>());
    // Members of S that may appear in T.
    let allowed: u64 = s
        .iter()
        .enumerate()
        .filter(|(_, x)| r0.binary_search(x).is_err())
        .fold(0, |acc, (i, _)| acc | 1 << i);
    let orth: Vec<u64> = s
        .iter()
        .map(|&x| {
            s.iter()
                .enumerate()
                .filter(|(_, &y)| f.b(x, y) == 0)
                .fold(0, |acc, (j, _)| acc | 1 << j)
        })
        .collect();
    let m = s.len();
    // perp[T] = S-members orthogonal to all of T, built from T minus its lowest element.
    let mut perp = vec![0u64; 1 << m];
    perp[0] = (1u64 << m) - 1;
    let mut worst = (i64::MAX, 0u64);
    for t in 0u64..(1 << m) {
        if t != 0 {
            let low = t.trailing_zeros() as usize;
            perp[t as usize] = perp[(t & (t - 1)) as usize] & orth[low];
        }
        if t & !allowed != 0 {
            continue;
        }
        report.subsets_checked += 1;
        let inter = (perp[t as usize] & t).count_ones() as i64;
        let slack = m as i64 - t.count_ones() as i64 - inter;
        if slack < worst.0 {
            worst = (slack, t);
        }
    }
    report.worst_slack = worst.0;
    report.worst_t = (0..m).filter(|i| worst.1 >> i & 1 == 1).map(|i| Gf2Vector::new(n, s[i])).collect();
    report.holds = worst.0 >= 0;
    report
}
