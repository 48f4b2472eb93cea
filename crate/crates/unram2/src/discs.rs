//! Fundamental discriminants, their prime-discriminant factorizations and a
//! segmented sieve over `0 < ±d < X`.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Sieve segment length.
pub const SEGMENT: u64 = 1 << 20;

/// Kronecker symbol `(a/n)`.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return (a == 1 || a == -1) as i8;
    }
    let mut result: i8 = 1;
    let mut n = n as i128;
    let mut a = a as i128;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= tz;
    }
    // Jacobi symbol (a/n) for odd n > 0.
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 && matches!(n % 8, 3 | 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn is_squarefree_odd(mut m: u64) -> bool {
    let mut p = 3;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// Whether `d` is the discriminant of a quadratic field (`d = 1` excluded).
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let m = d.unsigned_abs();
    let e = m.trailing_zeros();
    let odd = m >> e;
    if !is_squarefree_odd(odd) {
        return false;
    }
    let s = d.signum();
    let sm = (s * odd as i64).rem_euclid(4);
    match e {
        0 => sm == 1,
        2 => sm == 3,
        3 => true,
        _ => false,
    }
}

/// `±4, ±8` or `p* = (−1)^{(p−1)/2} p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeDiscriminant(pub i64);

impl PrimeDiscriminant {
    pub fn odd(p: u64) -> Self {
        let p = p as i64;
        PrimeDiscriminant(if p % 4 == 1 { p } else { -p })
    }

    pub fn value(&self) -> i64 {
        self.0
    }

    /// The underlying prime.
    pub fn prime(&self) -> u64 {
        match self.0 {
            -4 | 8 | -8 => 2,
            v => v.unsigned_abs(),
        }
    }
}

/// `d = ∏ q_i` with the even part (if any) first, then odd primes ascending.
///
/// `neg[b]` has bit `a` set iff `(q_a / p_b) = −1`; the diagonal is clear.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscFactorization {
    pub d: i64,
    pub primes: Vec<PrimeDiscriminant>,
    pub ord2: u8,
    pub neg: Vec<u64>,
}

impl DiscFactorization {
    pub fn omega(&self) -> usize {
        self.primes.len()
    }

    /// `(q_a / p_b)` for `a ≠ b`.
    pub fn symbol(&self, a: usize, b: usize) -> i8 {
        if self.neg[b] >> a & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Fills `neg` from `primes`.
    fn finish(&mut self) {
        let w = self.primes.len();
        assert!(w <= 64);
        self.neg.clear();
        for b in 0..w {
            let pb = self.primes[b].prime() as i64;
            let mut mask = 0u64;
            for a in 0..w {
                if a != b && kronecker(self.primes[a].value(), pb) == -1 {
                    mask |= 1 << a;
                }
            }
            self.neg.push(mask);
        }
    }

    fn from_parts(d: i64, odd_primes: &[u64], ord2: u8) -> Self {
        let mut primes = Vec::with_capacity(odd_primes.len() + 1);
        let odd: i64 = odd_primes
            .iter()
            .map(|&p| PrimeDiscriminant::odd(p).value())
            .product();
        if ord2 > 0 {
            primes.push(PrimeDiscriminant(d / odd));
        }
        primes.extend(odd_primes.iter().map(|&p| PrimeDiscriminant::odd(p)));
        let mut f = DiscFactorization {
            d,
            primes,
            ord2,
            neg: Vec::new(),
        };
        f.finish();
        f
    }
}

/// Unique factorization into prime discriminants.
pub fn factor_prime_discriminants(d: i64) -> Result<DiscFactorization, Error> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    let m = d.unsigned_abs();
    let e = m.trailing_zeros() as u8;
    let mut rest = m >> e;
    let mut odd = Vec::new();
    let mut p = 3;
    while p * p <= rest {
        if rest % p == 0 {
            odd.push(p);
            rest /= p;
        }
        p += 2;
    }
    if rest > 1 {
        odd.push(rest);
    }
    Ok(DiscFactorization::from_parts(d, &odd, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "pos" | "+" | "real" => Ok(Sign::Pos),
            "neg" | "-" | "imag" => Ok(Sign::Neg),
            _ => Err(Error::Parse(format!("bad sign {s:?}"))),
        }
    }
}

/// Fundamental `d` with `0 < ±d < xmax` and, if given, `ord₂(d) = alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRange {
    pub sign: Sign,
    pub xmax: u64,
    pub alpha: Option<u8>,
}

impl SweepRange {
    pub fn new(sign: Sign, xmax: u64, alpha: Option<u8>) -> Result<Self, Error> {
        if let Some(a) = alpha {
            if ![0, 2, 3].contains(&a) {
                return Err(Error::Invalid(format!("alpha must be 0, 2 or 3, got {a}")));
            }
        }
        if xmax > 1 << 40 {
            return Err(Error::Invalid("xmax above 2^40 is not supported".into()));
        }
        Ok(SweepRange { sign, xmax, alpha })
    }

    pub fn segments(&self) -> usize {
        self.xmax.div_ceil(SEGMENT) as usize
    }

    pub fn contains(&self, d: i64) -> bool {
        d.signum() == self.sign.as_i64()
            && d.unsigned_abs() < self.xmax
            && is_fundamental(d)
            && self.alpha.map_or(true, |a| d.unsigned_abs().trailing_zeros() == a as u32)
    }
}

fn odd_primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 3..=n {
        if p % 2 == 1 && !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += 2 * p;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Reusable sieve state for one range.
pub struct Sieve {
    range: SweepRange,
    primes: Vec<u64>,
}

const NIL: u32 = u32::MAX;

impl Sieve {
    pub fn new(range: SweepRange) -> Self {
        let primes = odd_primes_up_to(isqrt(range.xmax) + 1);
        Sieve { range, primes }
    }

    pub fn range(&self) -> &SweepRange {
        &self.range
    }

    /// Calls `f` on every member of segment `seg` in ascending `|d|`. The
    /// factorization is reused between calls.
    pub fn visit_segment(&self, seg: usize, mut f: impl FnMut(&DiscFactorization)) {
        let lo = (seg as u64 * SEGMENT).max(1);
        let hi = ((seg as u64 + 1) * SEGMENT).min(self.range.xmax);
        if lo >= hi {
            return;
        }
        let len = (hi - lo) as usize;
        let mut rem: Vec<u64> = (lo..hi).map(|m| m >> m.trailing_zeros()).collect();
        let mut bad = vec![false; len];
        let mut head = vec![NIL; len];
        let mut next: Vec<u32> = Vec::with_capacity(len * 3);
        let mut prime_of: Vec<u32> = Vec::with_capacity(len * 3);
        for &p in &self.primes {
            if p * p >= hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut m = first;
            while m < hi {
                let i = (m - lo) as usize;
                if !bad[i] {
                    rem[i] /= p;
                    if rem[i] % p == 0 {
                        bad[i] = true;
                    } else {
                        next.push(head[i]);
                        prime_of.push(p as u32);
                        head[i] = (next.len() - 1) as u32;
                    }
                }
                m += p;
            }
        }
        let s = self.range.sign.as_i64();
        let mut fac = DiscFactorization::default();
        let mut odd: Vec<u64> = Vec::with_capacity(16);
        for i in 0..len {
            let m = lo + i as u64;
            if bad[i] || m == 1 {
                continue;
            }
            let e = m.trailing_zeros();
            if let Some(a) = self.range.alpha {
                if e != a as u32 {
                    continue;
                }
            }
            let modd = (m >> e) as i64;
            let ok = match e {
                0 => (s * modd).rem_euclid(4) == 1,
                2 => (s * modd).rem_euclid(4) == 3,
                3 => true,
                _ => false,
            };
            if !ok {
                continue;
            }
            odd.clear();
            let mut k = head[i];
            while k != NIL {
                odd.push(prime_of[k as usize] as u64);
                k = next[k as usize];
            }
            odd.reverse();
            if rem[i] > 1 {
                odd.push(rem[i]);
            }
            let d = s * m as i64;
            fill(&mut fac, d, &odd, e as u8);
            f(&fac);
        }
    }

    /// Every member in ascending `|d|`.
    pub fn for_each(&self, mut f: impl FnMut(&DiscFactorization)) {
        for seg in 0..self.range.segments() {
            self.visit_segment(seg, &mut f);
        }
    }

    /// Per-segment results, in segment order, computed in parallel when enabled.
    pub fn map_segments<R: Send>(&self, f: impl Fn(usize, &Sieve) -> R + Sync) -> Vec<R> {
        crate::par::map_range(self.range.segments(), |seg| f(seg, self))
    }
}

fn fill(fac: &mut DiscFactorization, d: i64, odd: &[u64], ord2: u8) {
    fac.d = d;
    fac.ord2 = ord2;
    fac.primes.clear();
    if ord2 > 0 {
        let o: i64 = odd.iter().map(|&p| PrimeDiscriminant::odd(p).value()).product();
        fac.primes.push(PrimeDiscriminant(d / o));
    }
    fac.primes.extend(odd.iter().map(|&p| PrimeDiscriminant::odd(p)));
    fac.finish();
}

/// Collects the whole range; for tests and small ranges.
pub fn sieve_fundamental(range: SweepRange) -> Vec<DiscFactorization> {
    let mut out = Vec::new();
    Sieve::new(range).for_each(|f| out.push(f.clone()));
    out
}
