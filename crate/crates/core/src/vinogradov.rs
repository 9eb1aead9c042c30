//! Vinogradov systems `Σ x_i^j = Σ y_i^j` (`1 <= j <= k`) and the mean values
//! `∫_0^1 |F(α)|^{2t} dα` of unweighted short Weyl sums.
//!
//! Both counts are `Σ_v m(v)²` where `m(v)` is the number of ordered
//! `t`-tuples with power-sum vector `v`. Tuples are enumerated as multisets
//! and weighted by their number of orderings `t!/Π m_i!`.

use alloc::vec::Vec;

use hashbrown::HashMap;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest number of ordered `t`-tuples per side.
pub const MAX_TUPLES: u128 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct VinogradovCount {
    pub t: u32,
    pub k: u32,
    pub h: u64,
    /// `J_{t,k}(H)`.
    pub count: BigUint,
    /// `J / H^{2t - k(k+1)/2}`.
    pub normalized: f64,
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Visits every non-decreasing `t`-tuple over `values` with its ordering count.
fn for_each_multiset(values: &[u64], t: usize, mut visit: impl FnMut(&[usize], u64)) {
    if t == 0 || values.is_empty() {
        return;
    }
    let full = factorial(t as u32);
    let mut idx = alloc::vec![0usize; t];
    loop {
        let mut denom = 1u64;
        let mut run = 1u64;
        for w in idx.windows(2) {
            if w[0] == w[1] {
                run += 1;
                denom *= run;
            } else {
                run = 1;
            }
        }
        visit(&idx, full / denom);
        let Some(pos) = (0..t).rev().find(|&i| idx[i] + 1 < values.len()) else {
            return;
        };
        let v = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|x| *x = v);
    }
}

/// `Σ_key m(key)²` for a histogram keyed by `key(tuple)`.
fn square_sum(values: &[u64], t: usize, key: impl Fn(&[usize]) -> u128) -> BigUint {
    let mut hist: HashMap<u128, u64> = HashMap::new();
    for_each_multiset(values, t, |idx, w| {
        *hist.entry(key(idx)).or_default() += w;
    });
    let mut keys: Vec<(&u128, &u64)> = hist.iter().collect();
    keys.sort_unstable();
    keys.into_iter()
        .fold(BigUint::zero(), |acc, (_, &m)| acc + BigUint::from(m as u128 * m as u128))
}

fn check_budget(base: u64, t: u32, what: &'static str) -> Result<()> {
    let needed = (base as u128).checked_pow(t).unwrap_or(u128::MAX);
    if needed > MAX_TUPLES {
        let largest = (1..=base).rev().find(|&b| (b as u128).pow(t) <= MAX_TUPLES).unwrap_or(0);
        return Err(Error::budget(what, needed, MAX_TUPLES)
            .with_hint(alloc::format!("largest feasible range length is {largest}")));
    }
    Ok(())
}

/// Exact `J_{t,k}(H)`, the number of ordered solutions in `[1, H]^{2t}`.
pub fn count_j(t: u32, k: u32, h: u64) -> Result<VinogradovCount> {
    if t == 0 || k == 0 || h == 0 {
        return Err(Error::config("t, k and H must be positive"));
    }
    if k > 8 || t > 20 {
        return Err(Error::config("t <= 20 and k <= 8 supported"));
    }
    check_budget(h, t, "tuples per side")?;
    // Σ x^j <= t H^j; pack (Σx, ..., Σx^k) in mixed radix
    let radices: Vec<u128> = (1..=k).map(|j| t as u128 * (h as u128).pow(j) + 1).collect();
    if radices.iter().try_fold(1u128, |acc, &r| acc.checked_mul(r)).is_none() {
        return Err(Error::Overflow("power-sum key exceeds 128 bits".into()));
    }
    let powers: Vec<Vec<u128>> = (1..=h)
        .map(|x| (1..=k).map(|j| (x as u128).pow(j)).collect())
        .collect();
    let values: Vec<u64> = (1..=h).collect();
    let count = square_sum(&values, t as usize, |idx| {
        let mut key = 0u128;
        for (j, &r) in radices.iter().enumerate().rev() {
            let s: u128 = idx.iter().map(|&i| powers[i][j]).sum();
            key = key * r + s;
        }
        key
    });
    let exponent = 2.0 * t as f64 - (k * (k + 1)) as f64 / 2.0;
    let normalized = count.to_f64().unwrap_or(f64::INFINITY) / libm::pow(h as f64, exponent);
    Ok(VinogradovCount {
        t,
        k,
        h,
        count,
        normalized,
    })
}

/// `∫_0^1 |F(α)|^{2t} dα` for `F(α) = Σ_{|n-X|<=H} e(α n^k)`: the number of
/// solutions of `Σ x_i^k = Σ y_i^k` with every variable in `[X-H, X+H]`.
pub fn mean_value_f(t: u32, x: u64, h: u64, k: u32) -> Result<BigUint> {
    if t == 0 || k == 0 {
        return Err(Error::config("t and k must be positive"));
    }
    if h >= x {
        return Err(Error::config("need X - H >= 1"));
    }
    check_budget(2 * h + 1, t, "tuples per side")?;
    let top = (x + h) as u128;
    if top.checked_pow(k).and_then(|p| p.checked_mul(t as u128)).is_none() {
        return Err(Error::Overflow("t (X+H)^k exceeds 128 bits".into()));
    }
    let values: Vec<u64> = (x - h..=x + h).collect();
    let powers: Vec<u128> = values.iter().map(|&v| (v as u128).pow(k)).collect();
    Ok(square_sum(&values, t as usize, |idx| idx.iter().map(|&i| powers[i]).sum()))
}

/// `∫|F|^{2t} / ((H^{k(k+1)/2-1} / X^{k-1}) J_{t,k}(H))`.
pub fn daemen_ratio(t: u32, x: u64, h: u64, k: u32) -> Result<f64> {
    let mean = mean_value_f(t, x, h, k)?.to_f64().unwrap_or(f64::INFINITY);
    let j = count_j(t, k, h)?.count.to_f64().unwrap_or(f64::INFINITY);
    let scale = libm::pow(h as f64, (k * (k + 1)) as f64 / 2.0 - 1.0)
        / libm::pow(x as f64, k as f64 - 1.0);
    Ok(mean / (scale * j))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    /// Least-squares slope of `log J` against `log H`.
    pub slope: f64,
    pub intercept: f64,
    /// `log J - (intercept + slope log H)` per point.
    pub residuals: Vec<f64>,
    pub counts: Vec<VinogradovCount>,
}

/// Unweighted ordinary least squares over all supplied `H`.
pub fn scaling_exponent(t: u32, k: u32, hs: &[u64]) -> Result<ScalingFit> {
    if hs.len() < 4 {
        return Err(Error::config("need at least four values of H"));
    }
    if hs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("H values must be strictly ascending"));
    }
    let counts = hs.iter().map(|&h| count_j(t, k, h)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = hs.iter().map(|&h| libm::log(h as f64)).collect();
    let ys: Vec<f64> = counts
        .iter()
        .map(|c| libm::log(c.count.to_f64().unwrap_or(f64::INFINITY)))
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(ScalingFit {
        slope,
        intercept,
        residuals,
        counts,
    })
}
