//! Bit-packed vectors and matrices over F₂.
//!
//! A vector of length `n ≤ 64` is a single `u64`; bit `i` is coordinate `i`.
//! All arithmetic is XOR/AND with popcount parity.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::Error;

/// Largest supported vector length.
pub const MAX_DIM: usize = 64;

#[inline]
pub fn parity(x: u64) -> u8 {
    (x.count_ones() & 1) as u8
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gf2Vector {
    n: u8,
    bits: u64,
}

impl Gf2Vector {
    pub fn new(n: usize, bits: u64) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} out of range");
        Gf2Vector {
            n: n as u8,
            bits: bits & low_mask(n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, 0)
    }

    pub fn unit(n: usize, i: usize) -> Self {
        assert!(i < n);
        Self::new(n, 1 << i)
    }

    /// Parses a bit string such as `"101"`; the first character is coordinate 0.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() || s.len() > MAX_DIM {
            return Err(Error::Parse(format!("bad bit string {s:?}")));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("bad bit string {s:?}"))),
            }
        }
        Ok(Self::new(s.len(), bits))
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check(other)?;
        Ok(Gf2Vector {
            n: self.n,
            bits: self.bits ^ other.bits,
        })
    }

    /// Standard dot product.
    pub fn dot(&self, other: &Self) -> Result<u8, Error> {
        self.check(other)?;
        Ok(parity(self.bits & other.bits))
    }

    fn check(&self, other: &Self) -> Result<(), Error> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// All `2^n` vectors of length `n` in increasing order of their bit pattern.
    pub fn all(n: usize) -> impl Iterator<Item = Gf2Vector> {
        assert!(n < 64);
        (0..(1u64 << n)).map(move |b| Gf2Vector::new(n, b))
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            write!(f, "{}", self.get(i))?;
        }
        Ok(())
    }
}

/// Row-major matrix; row `i` is a packed vector of length `cols`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<u64>,
}

impl Gf2Matrix {
    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Self {
        assert!(cols <= MAX_DIM);
        let m = low_mask(cols);
        Gf2Matrix {
            cols,
            rows: rows.into_iter().map(|r| r & m).collect(),
        }
    }

    pub fn from_vectors(rows: &[Gf2Vector]) -> Result<Self, Error> {
        let cols = rows.first().map(|r| r.dim()).unwrap_or(0);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::DimensionMismatch(cols, r.dim()));
            }
        }
        Ok(Self::from_rows(cols, rows.iter().map(|r| r.bits()).collect()))
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::from_rows(cols, vec![0; rows])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| 1u64 << i).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        ((self.rows[i] >> j) & 1) as u8
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        if v & 1 == 1 {
            self.rows[i] |= 1 << j;
        } else {
            self.rows[i] &= !(1 << j);
        }
    }

    /// Reduced row echelon form together with pivot columns. Zero rows are dropped.
    pub fn rref(&self) -> (Gf2Matrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let bit = 1u64 << c;
            let Some(p) = (r..rows.len()).find(|&i| rows[i] & bit != 0) else {
                continue;
            };
            rows.swap(r, p);
            let pr = rows[r];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && *row & bit != 0 {
                    *row ^= pr;
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        (Gf2Matrix { cols: self.cols, rows }, pivots)
    }

    pub fn rank(&self) -> usize {
        rank_of(&self.rows)
    }

    /// `M v`: coordinate `i` is the dot product of row `i` with `v`.
    pub fn apply(&self, v: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, r)| acc | ((parity(r & v) as u64) << i))
    }

    /// Basis of `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<u64> {
        let (red, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = 1u64 << f;
                for (row, &p) in red.rows.iter().zip(&pivots) {
                    if row >> f & 1 == 1 {
                        v |= 1 << p;
                    }
                }
                v
            })
            .collect()
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut out = vec![0u64; self.cols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                if r >> j & 1 == 1 {
                    *o |= 1 << i;
                }
            }
        }
        Gf2Matrix::from_rows(self.rows.len(), out)
    }
}

/// Rank of a list of packed rows.
pub fn rank_of(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Every element of the span of `basis` (which need not be independent), sorted.
pub fn span(basis: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &b in basis {
        if out.binary_search(&b).is_ok() {
            continue;
        }
        let extra: Vec<u64> = out.iter().map(|x| x ^ b).collect();
        out.extend(extra);
        out.sort_unstable();
    }
    out
}

/// Whether `vectors` span all of `F₂ⁿ`.
pub fn spans_all(n: usize, vectors: &[u64]) -> bool {
    rank_of(vectors) == n
}

/// One solution of `rows[i] · x = targets[i]` for all `i`, if any.
pub fn solve(cols: usize, rows: &[u64], targets: &[u8]) -> Option<u64> {
    assert_eq!(rows.len(), targets.len());
    // Augment with the target in column `cols`.
    let aug: Vec<u64> = rows
        .iter()
        .zip(targets)
        .map(|(&r, &t)| r | ((t as u64 & 1) << cols))
        .collect();
    let (red, pivots) = Gf2Matrix::from_rows(cols + 1, aug).rref();
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = 0u64;
    for (row, &p) in red.rows().iter().zip(&pivots) {
        if row >> cols & 1 == 1 {
            x |= 1 << p;
        }
    }
    Some(x)
}
