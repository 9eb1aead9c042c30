//! Non-archimedean data: `S(q,a)`, the truncated singular series and
//! `p`-adic densities.
//!
//! `A(q) = φ(q)^{-s} Σ_{(a,q)=1} S(q,a)^s e(-aN/q)` is multiplicative in `q`,
//! so the series is assembled from prime-power terms. For a prime power
//! `q = p^e` with `p` odd the unit group is cyclic and `S(q, a c^k) = S(q, a)`,
//! so `S(q,a)` depends only on the coset key `a^{φ(q)/d} mod q`, `d = gcd(k, φ(q))`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::WaringInstance;
use crate::arith::{euler_phi, gcd, is_prime, pow_mod, spf_table};
use crate::error::{Error, Result};

fn root(num: u64, den: u64) -> Complex64 {
    let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * (num % den) as f64 / den as f64);
    Complex64::new(c, s)
}

/// `S(q,a) = Σ_{1<=b<=q, (b,q)=1} e(a b^k / q)`.
pub fn gauss_sum(q: u64, a: i64, k: u32) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::config("q must be positive"));
    }
    let ar = a.rem_euclid(q as i64) as u64;
    if gcd(ar, q) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    if q == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for b in (1..=q).filter(|&b| gcd(b, q) == 1) {
        let bk = pow_mod(b, k as u64, q);
        acc += root(crate::arith::mul_mod(ar, bk, q), q);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalData {
    pub q: u64,
    /// `(a, S(q,a))` for `1 <= a <= q`, `gcd(a,q) = 1`.
    pub gauss: Vec<(u64, Complex64)>,
    /// `A(q) = φ(q)^{-s} Σ_a S(q,a)^s e(-aN/q)`.
    pub series_term: Complex64,
}

/// Direct evaluation of all `S(q,a)` and of `A(q)`.
pub fn local_data(q: u64, k: u32, s: u32, n: u64) -> Result<LocalData> {
    if q == 0 {
        return Err(Error::config("q must be positive"));
    }
    let phi = euler_phi(q) as f64;
    let mut gauss = Vec::new();
    let mut term = Complex64::new(0.0, 0.0);
    for a in (1..=q).filter(|&a| gcd(a, q) == 1) {
        let sq = gauss_sum(q, a as i64, k)?;
        term += sq.powu(s) * root(q - crate::arith::mul_mod(a, n % q, q) % q, q);
        gauss.push((a, sq));
    }
    Ok(LocalData {
        q,
        gauss,
        series_term: term / libm::pow(phi, s as f64),
    })
}

/// `A(p^e)` through residue histograms of `b^k mod p^e`.
fn prime_power_term(p: u64, e: u32, k: u32, s: u32, n: u64) -> Complex64 {
    let q = p.pow(e);
    let phi = q / p * (p - 1);
    let mut hist = vec![0u32; q as usize];
    for b in (1..q).filter(|b| b % p != 0) {
        hist[pow_mod(b, k as u64, q) as usize] += 1;
    }
    let residues: Vec<(u64, f64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(x, &c)| (x as u64, c as f64))
        .collect();
    let s_of = |a: u64| -> Complex64 {
        residues
            .iter()
            .map(|&(x, c)| root(crate::arith::mul_mod(a, x, q), q) * c)
            .sum()
    };
    let d = gcd(k as u64, phi);
    let mut memo: Vec<(u64, Complex64)> = Vec::new();
    let mut term = Complex64::new(0.0, 0.0);
    let nq = n % q;
    for a in (1..q).filter(|a| a % p != 0) {
        let spow = if p == 2 {
            s_of(a).powu(s)
        } else {
            let key = pow_mod(a, phi / d, q);
            match memo.iter().find(|(kk, _)| *kk == key) {
                Some(&(_, v)) => v,
                None => {
                    let v = s_of(a).powu(s);
                    memo.push((key, v));
                    v
                }
            }
        };
        term += spow * root(q - crate::arith::mul_mod(a, nq, q) % q, q);
    }
    term / libm::pow(phi as f64, s as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularSeries {
    /// Real part of the truncated series.
    pub value: f64,
    /// Imaginary part, zero up to rounding by the `a ↦ q - a` symmetry.
    pub imag: f64,
    /// `Σ_{q_max/10 < q <= q_max} A(q)`.
    pub tail: f64,
    /// `Σ_{q_max/10 < q <= q_max} |A(q)|`.
    pub tail_abs: f64,
    pub q_max: u64,
    /// Truncated value below 0.1; positivity cannot be inferred from it.
    pub low: bool,
}

pub const MAX_SERIES_Q: u64 = 100_000;

/// Truncated singular series `Σ_{q<=q_max} A(q)`.
pub fn singular_series(instance: &WaringInstance, q_max: u64) -> Result<SingularSeries> {
    if q_max == 0 || q_max > MAX_SERIES_Q {
        return Err(Error::config(alloc::format!("q_max = {q_max} not in [1, {MAX_SERIES_Q}]")));
    }
    let (k, s, n) = (instance.k, instance.s, instance.n);
    let spf = spf_table(q_max as usize);
    let mut terms = vec![Complex64::new(0.0, 0.0); q_max as usize + 1];
    terms[1] = Complex64::new(1.0, 0.0);
    // prime powers first, then multiplicativity
    for q in 2..=q_max as usize {
        let p = spf[q] as u64;
        let mut m = q as u64;
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        terms[q] = if m == 1 {
            prime_power_term(p, e, k, s, n)
        } else {
            terms[(q as u64 / m) as usize] * terms[m as usize]
        };
    }
    let mut re = crate::expsums::Accumulator::compensated();
    let mut im = crate::expsums::Accumulator::compensated();
    let (mut tail, mut tail_abs) = (0.0, 0.0);
    for (q, t) in terms.iter().enumerate().skip(1) {
        re.add(t.re);
        im.add(t.im);
        if q as u64 > q_max / 10 {
            tail += t.re;
            tail_abs += t.norm();
        }
    }
    let value = re.value();
    Ok(SingularSeries {
        value,
        imag: im.value(),
        tail,
        tail_abs,
        q_max,
        low: value < 0.1,
    })
}

pub const MAX_DENSITY_WORK: u128 = 1_000_000_000;

/// `p^j #{b mod p^j, p ∤ b_i : Σ b_i^k ≡ N} / φ(p^j)^s`, by repeated
/// convolution of the normalized histogram of unit `k`-th powers mod `p^j`.
pub fn local_density(p: u64, j: u32, instance: &WaringInstance) -> Result<f64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if j == 0 {
        return Err(Error::config("j must be positive"));
    }
    let q = p
        .checked_pow(j)
        .filter(|&q| q <= 10_000_000)
        .ok_or_else(|| Error::budget("p^j", (p as u128).saturating_pow(j), 10_000_000))?;
    let phi = q / p * (p - 1);
    let mut hist = vec![0u64; q as usize];
    for b in (1..q).filter(|b| b % p != 0) {
        hist[pow_mod(b, instance.k as u64, q) as usize] += 1;
    }
    let support: Vec<(usize, f64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(x, &c)| (x, c as f64 / phi as f64))
        .collect();
    let work = q as u128 * support.len() as u128 * instance.s as u128;
    if work > MAX_DENSITY_WORK {
        return Err(Error::budget("local density convolution", work, MAX_DENSITY_WORK));
    }
    let qs = q as usize;
    let mut dist = vec![0.0f64; qs];
    dist[0] = 1.0;
    for _ in 0..instance.s {
        let mut next = vec![0.0f64; qs];
        for (x, &px) in dist.iter().enumerate().filter(|(_, &v)| v != 0.0) {
            for &(r, pr) in &support {
                let y = if x + r >= qs { x + r - qs } else { x + r };
                next[y] += px * pr;
            }
        }
        dist = next;
    }
    Ok(q as f64 * dist[(instance.n % q) as usize])
}
