//! Segmented sieve over a short window `(N, N+H]` at a large offset.
//!
//! Every integer of the window is fully factored: primes up to `√(N+H)` are
//! sieved out and whatever cofactor remains above 1 is prime. Λ and μ are
//! read off the factorization.

use alloc::vec;
use alloc::vec::Vec;

use crate::arith::{binomial, for_each_prime, isqrt, primes_up_to};
use crate::error::{Error, Result};
use crate::expsums::Accumulator;

const CACHE_MAGIC: &[u8; 6] = b"ESLAB1";

/// Number of integers processed per sieve segment.
pub const SEGMENT: u64 = 1 << 20;

/// Base primes are kept in memory when `√(N+H)` is at most this; above it
/// they are regenerated per segment.
const COLLECT_BASE_LIMIT: u64 = 1 << 26;

/// The half-open interval `(start, start + len]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    start: u64,
    len: u64,
}

impl Window {
    /// Hard cap on `N + H`.
    pub const MAX_END: u64 = 1 << 63;

    pub fn new(start: u64, len: u64) -> Result<Window> {
        match start.checked_add(len) {
            Some(end) if end <= Self::MAX_END => Ok(Window { start, len }),
            _ => Err(Error::Overflow(alloc::format!(
                "window ({start}, {start}+{len}] exceeds 2^63"
            ))),
        }
    }

    /// `(N, N + ⌊N^θ⌋]`.
    pub fn from_theta(start: u64, theta: f64) -> Result<Window> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::config(alloc::format!("theta {theta} not in (0, 1]")));
        }
        Window::new(start, libm::floor(libm::pow(start as f64, theta)) as u64)
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `N + H`, the last integer of the window.
    pub fn end(&self) -> u64 {
        self.start + self.len
    }

    pub fn contains(&self, n: u64) -> bool {
        n > self.start && n <= self.end()
    }

    pub fn iter(&self) -> core::ops::RangeInclusive<u64> {
        self.start + 1..=self.end()
    }
}

/// Per-integer arithmetic data over a window. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticTable {
    window: Window,
    lambda: Vec<f64>,
    mu: Vec<i8>,
    offsets: Vec<usize>,
    factors: Vec<(u32, u8)>,
    residual: Vec<u64>,
}

impl ArithmeticTable {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Λ(n) for the n-th element of the window (index 0 is `N+1`).
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[i8] {
        &self.mu
    }

    fn index(&self, n: u64) -> Option<usize> {
        self.window
            .contains(n)
            .then(|| (n - self.window.start - 1) as usize)
    }

    pub fn lambda_at(&self, n: u64) -> Option<f64> {
        self.index(n).map(|i| self.lambda[i])
    }

    pub fn mu_at(&self, n: u64) -> Option<i8> {
        self.index(n).map(|i| self.mu[i])
    }

    /// Sieved prime factors (those `≤ √(N+H)`) of the i-th element.
    pub fn small_factors(&self, i: usize) -> &[(u32, u8)] {
        &self.factors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Cofactor left after removing the small primes: 1 or a prime.
    pub fn residual(&self, i: usize) -> u64 {
        self.residual[i]
    }

    /// Full factorization of the i-th element as `(prime, exponent)` pairs in
    /// increasing order of the prime.
    pub fn factorization(&self, i: usize) -> impl Iterator<Item = (u64, u32)> + '_ {
        let r = self.residual[i];
        self.small_factors(i)
            .iter()
            .map(|&(p, e)| (p as u64, e as u32))
            .chain((r > 1).then_some((r, 1)))
    }

    pub fn factorization_of(&self, n: u64) -> Option<Vec<(u64, u32)>> {
        self.index(n).map(|i| self.factorization(i).collect())
    }

    /// `Some((p, m))` when the i-th element is `p^m`.
    pub fn prime_power(&self, i: usize) -> Option<(u64, u32)> {
        let mut it = self.factorization(i);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    /// Primes in the window, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len()).filter_map(move |i| match self.prime_power(i) {
            Some((p, 1)) => Some(p),
            _ => None,
        })
    }

    /// Rebuilds a table from stored fields (cache files). The factorization
    /// of every element is checked against the element itself.
    pub fn from_parts(window: Window, records: Vec<(Vec<(u32, u8)>, u64)>) -> Result<Self> {
        if records.len() as u64 != window.len() {
            return Err(Error::config("record count does not match window length"));
        }
        let mut offsets = Vec::with_capacity(records.len() + 1);
        let mut factors = Vec::new();
        let mut residual = Vec::with_capacity(records.len());
        offsets.push(0);
        for (fs, r) in records {
            factors.extend_from_slice(&fs);
            offsets.push(factors.len());
            residual.push(r);
        }
        let mut table = ArithmeticTable {
            window,
            lambda: Vec::new(),
            mu: Vec::new(),
            offsets,
            factors,
            residual,
        };
        table.fill_lambda_mu();
        for (i, n) in window.iter().enumerate() {
            let prod = table
                .factorization(i)
                .try_fold(1u64, |acc, (p, e)| acc.checked_mul(p.checked_pow(e)?));
            if prod != Some(n) {
                return Err(Error::config(alloc::format!(
                    "stored factorization of {n} does not reconstruct it"
                )));
            }
        }
        Ok(table)
    }

    /// Cache encoding: `"ESLAB1"`, then `N` and `H` as little-endian `u64`,
    /// then per element a factor count byte, `(u32 prime, u8 exponent)` pairs
    /// and the residual as `u64`, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(22 + self.len() * 10 + self.factors.len() * 5);
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&self.window.start().to_le_bytes());
        out.extend_from_slice(&self.window.len().to_le_bytes());
        for i in 0..self.len() {
            let fs = self.small_factors(i);
            out.push(fs.len() as u8);
            for &(p, e) in fs {
                out.extend_from_slice(&p.to_le_bytes());
                out.push(e);
            }
            out.extend_from_slice(&self.residual[i].to_le_bytes());
        }
        out
    }

    /// Inverse of [`ArithmeticTable::to_bytes`]; every record is re-verified.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::config("malformed table cache");
        let mut cur = bytes.strip_prefix(CACHE_MAGIC).ok_or_else(bad)?;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(bad());
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        let u64_at = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8 bytes"));
        let start = u64_at(take(8)?);
        let len = u64_at(take(8)?);
        let window = Window::new(start, len)?;
        let mut records = Vec::with_capacity(len.min(1 << 24) as usize);
        for _ in 0..len {
            let count = take(1)?[0] as usize;
            let mut fs = Vec::with_capacity(count);
            for _ in 0..count {
                let rec = take(5)?;
                fs.push((u32::from_le_bytes(rec[..4].try_into().expect("4 bytes")), rec[4]));
            }
            records.push((fs, u64_at(take(8)?)));
        }
        if take(1).is_ok() {
            return Err(bad());
        }
        ArithmeticTable::from_parts(window, records)
    }

    fn fill_lambda_mu(&mut self) {
        let len = self.residual.len();
        self.lambda = vec![0.0; len];
        self.mu = vec![0; len];
        for i in 0..len {
            let fs = &self.factors[self.offsets[i]..self.offsets[i + 1]];
            let r = self.residual[i];
            let distinct = fs.len() + (r > 1) as usize;
            let squarefree = fs.iter().all(|&(_, e)| e == 1);
            self.mu[i] = match (squarefree, distinct % 2) {
                (false, _) => 0,
                (true, 0) => 1,
                (true, _) => -1,
            };
            if distinct == 1 {
                let p = if r > 1 { r } else { fs[0].0 as u64 };
                self.lambda[i] = libm::log(p as f64);
            }
        }
    }
}

/// Sieves the window and fully factors every integer in it.
pub fn sieve_window(window: Window) -> Result<ArithmeticTable> {
    let end = window.end();
    let root = isqrt(end);
    if root > u32::MAX as u64 {
        return Err(Error::Overflow(alloc::format!("√{end} exceeds 2^32")));
    }
    let base: Option<Vec<u32>> = (root <= COLLECT_BASE_LIMIT)
        .then(|| primes_up_to(root).into_iter().map(|p| p as u32).collect());

    let segments: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut lo = window.start() + 1;
        while lo <= end && !window.is_empty() {
            let hi = (lo + SEGMENT - 1).min(end);
            v.push((lo, hi));
            lo = hi + 1;
        }
        v
    };

    let run = |&(lo, hi): &(u64, u64)| sieve_segment(lo, hi, root, base.as_deref());

    #[cfg(feature = "parallel")]
    let parts: Vec<Segment> = {
        use rayon::prelude::*;
        segments.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Segment> = segments.iter().map(run).collect();

    let len = window.len() as usize;
    let mut offsets = Vec::with_capacity(len + 1);
    let mut factors = Vec::new();
    let mut residual = Vec::with_capacity(len);
    offsets.push(0);
    for seg in parts {
        let base_off = factors.len();
        factors.extend_from_slice(&seg.factors);
        offsets.extend(seg.offsets[1..].iter().map(|o| o + base_off));
        residual.extend_from_slice(&seg.residual);
    }
    let mut table = ArithmeticTable {
        window,
        lambda: Vec::new(),
        mu: Vec::new(),
        offsets,
        factors,
        residual,
    };
    table.fill_lambda_mu();
    Ok(table)
}

struct Segment {
    offsets: Vec<usize>,
    factors: Vec<(u32, u8)>,
    residual: Vec<u64>,
}

fn sieve_segment(lo: u64, hi: u64, root: u64, base: Option<&[u32]>) -> Segment {
    let count = (hi - lo + 1) as usize;
    let mut residual: Vec<u64> = (lo..=hi).collect();
    let mut hits: Vec<(u32, u32, u8)> = Vec::new();
    let mut visit = |p: u64| {
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let idx = (m - lo) as usize;
            let mut e = 0u8;
            while residual[idx].is_multiple_of(p) {
                residual[idx] /= p;
                e += 1;
            }
            hits.push((idx as u32, p as u32, e));
            m += p;
        }
    };
    match base {
        Some(ps) => ps.iter().for_each(|&p| visit(p as u64)),
        None => for_each_prime(root, visit),
    }
    // counting sort by index; primes arrive in increasing order
    let mut offsets = vec![0usize; count + 1];
    for &(idx, _, _) in &hits {
        offsets[idx as usize + 1] += 1;
    }
    for i in 0..count {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut factors = vec![(0u32, 0u8); hits.len()];
    for (idx, p, e) in hits {
        factors[fill[idx as usize]] = (p, e);
        fill[idx as usize] += 1;
    }
    Segment {
        offsets,
        factors,
        residual,
    }
}

/// `Σ_{N<n≤N+H} Λ(n)`.
pub fn chebyshev_psi_delta(table: &ArithmeticTable) -> f64 {
    let mut acc = Accumulator::compensated();
    for &l in table.lambda() {
        acc.add(l);
    }
    acc.value()
}

/// `Σ τ_r(n)^s` over a window with the normalized ratio `Σ / (H (log N)^{r^s - 1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivisorMoment {
    pub sum: u128,
    /// `None` when `H = 0` or `N < 3` (the normalization is undefined).
    pub normalized: Option<f64>,
}

impl DivisorMoment {
    pub fn value(&self) -> f64 {
        self.sum as f64
    }
}

/// `τ_r(n)` from a factorization.
pub fn tau_r(factorization: impl Iterator<Item = (u64, u32)>, r: u32) -> u128 {
    factorization
        .map(|(_, e)| binomial(e as u64 + r as u64 - 1, r as u64 - 1).unwrap_or(u128::MAX))
        .product()
}

pub fn divisor_moment(window: Window, r: u32, s: u32) -> Result<DivisorMoment> {
    if !(2..=5).contains(&r) || !(1..=4).contains(&s) {
        return Err(Error::config(alloc::format!(
            "divisor moment needs r in [2,5] and s in [1,4], got r={r}, s={s}"
        )));
    }
    let table = sieve_window(window)?;
    Ok(divisor_moment_table(&table, r, s))
}

pub fn divisor_moment_table(table: &ArithmeticTable, r: u32, s: u32) -> DivisorMoment {
    let sum: u128 = (0..table.len())
        .map(|i| tau_r(table.factorization(i), r).pow(s))
        .sum();
    let w = table.window();
    let normalized = (!w.is_empty() && w.start() >= 3).then(|| {
        let log_n = libm::log(w.start() as f64);
        sum as f64 / (w.len() as f64 * libm::pow(log_n, (r.pow(s) - 1) as f64))
    });
    DivisorMoment { sum, normalized }
}
