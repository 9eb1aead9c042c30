//! `f(α)`, the weighted count `ρ(N)` and explicit prime representations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_complex::Complex64;

use super::archimedean::{singular_integral, SingularIntegral};
use super::local::{singular_series, SingularSeries};
use super::{r_of_k, WaringInstance};
use crate::angle::Angle;
use crate::arith::{binomial, is_prime};
use crate::error::{Error, Result};
use crate::expsums::{lambda_exp_sum, ComplexAccumulator, ExpSumResult, Summation};
use crate::phase::PolynomialPhase;
use crate::sieve::{sieve_window, ArithmeticTable};

/// Largest number of partial sums held on either side of a meet-in-the-middle join.
pub const MAX_HALF: u128 = 20_000_000;
/// Largest `grid · (2H+1)` for the Fourier-inversion count.
pub const MAX_FOURIER_WORK: u128 = 4_000_000_000;

/// `f(α) = Σ_{|n-X|<=H} Λ(n) e(α n^k)`.
pub fn f_alpha(instance: &WaringInstance, alpha: Angle) -> Result<ExpSumResult> {
    let table = sieve_window(instance.window())?;
    f_alpha_on(&table, alpha, instance.k)
}

fn f_alpha_on(table: &ArithmeticTable, alpha: Angle, k: u32) -> Result<ExpSumResult> {
    lambda_exp_sum(table, &PolynomialPhase::monomial(alpha, k as usize)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoExact {
    /// `Σ Π Λ(n_i)` over ordered tuples with `Σ n_i^k = N`, `|n_i - X| <= H`.
    pub weighted: f64,
    /// Ordered tuples of primes with `Σ p_i^k = N`.
    pub prime_tuples: u128,
}

#[derive(Clone, Copy, Default)]
struct Cell {
    weight: f64,
    primes: u128,
}

struct Item {
    power: u64,
    lambda: f64,
    prime: bool,
}

fn items(instance: &WaringInstance) -> Result<Vec<Item>> {
    let table = sieve_window(instance.window())?;
    let k = instance.k;
    Ok(table
        .window()
        .iter()
        .zip(table.lambda())
        .filter(|(_, &l)| l > 0.0)
        .map(|(n, &lambda)| Item {
            power: (n as u128).pow(k) as u64,
            lambda,
            prime: is_prime(n),
        })
        .collect())
}

/// All ordered `m`-fold sums, by repeated sparse convolution.
fn fold(items: &[Item], m: u32) -> Result<BTreeMap<u64, Cell>> {
    let needed = (items.len() as u128).saturating_pow(m);
    if needed > MAX_HALF {
        return Err(Error::budget("partial tuples", needed, MAX_HALF));
    }
    let mut cur = BTreeMap::new();
    cur.insert(0u64, Cell { weight: 1.0, primes: 1 });
    for _ in 0..m {
        let mut next: BTreeMap<u64, Cell> = BTreeMap::new();
        for (&sum, cell) in &cur {
            for it in items {
                let e = next.entry(sum + it.power).or_default();
                e.weight += cell.weight * it.lambda;
                if it.prime {
                    e.primes += cell.primes;
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Exact `ρ(N)` by meet-in-the-middle: the `⌈s/2⌉`-fold and `⌊s/2⌋`-fold
/// sums of the `Λ`-weighted `k`-th powers are joined on `N`.
pub fn rho_exact(instance: &WaringInstance) -> Result<RhoExact> {
    let zero = RhoExact {
        weighted: 0.0,
        prime_tuples: 0,
    };
    if !instance.is_feasible() {
        return Ok(zero);
    }
    let items = items(instance)?;
    let s = instance.s;
    let left = fold(&items, s.div_ceil(2))?;
    let right = fold(&items, s / 2)?;
    let n = instance.n;
    let mut weighted = 0.0;
    let mut prime_tuples = 0u128;
    for (&sum, r) in &right {
        if sum > n {
            break;
        }
        if let Some(l) = left.get(&(n - sum)) {
            weighted += l.weight * r.weight;
            prime_tuples += l.primes * r.primes;
        }
    }
    Ok(RhoExact {
        weighted,
        prime_tuples,
    })
}

/// `ρ(N)` as `G^{-1} Σ_{j<G} f(j/G)^s e(-jN/G)` with `G` the least power of two
/// above `s (X+H)^k`; an independent route to [`rho_exact`].
pub fn rho_fourier(instance: &WaringInstance) -> Result<f64> {
    let top = instance.s as u128 * instance.range_max()?;
    if !instance.is_feasible() {
        return Ok(0.0);
    }
    let g = (top + 1).next_power_of_two();
    let len = 2 * instance.h as u128 + 1;
    if g * len > MAX_FOURIER_WORK {
        return Err(Error::budget("Fourier grid work", g * len, MAX_FOURIER_WORK)
            .with_hint("use a smaller X, H or s"));
    }
    let table = sieve_window(instance.window())?;
    let k = instance.k;
    let eval = |j: u128| -> Result<Complex64> {
        Ok(f_alpha_on(&table, Angle::from_ratio(j as i128, g)?, k)?.value)
    };
    #[cfg(feature = "parallel")]
    let values: Vec<Complex64> = {
        use rayon::prelude::*;
        (0..g as u64)
            .into_par_iter()
            .map(|j| eval(j as u128))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Complex64> = (0..g).map(eval).collect::<Result<_>>()?;

    let n = instance.n as u128 % g;
    let mut acc = ComplexAccumulator::new(Summation::Compensated);
    for (j, f) in values.iter().enumerate() {
        let back = Angle::from_ratio(-(((j as u128 * n) % g) as i128), g)?;
        acc.add(f.powu(instance.s) * back.e());
    }
    Ok(acc.value().re / g as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Representations {
    /// Non-decreasing prime tuples with `Σ p_i^k = N`, in lexicographic order.
    pub tuples: Vec<Vec<u64>>,
    /// The search stopped at the requested limit.
    pub truncated: bool,
    pub r: u64,
    pub n_mod_r: u64,
    pub s_mod_r: u64,
}

impl Representations {
    /// `N ≡ s (mod R(k))`.
    pub fn admissible(&self) -> bool {
        self.n_mod_r == self.s_mod_r
    }
}

fn multisets(p: u128, m: u32) -> u128 {
    if m == 0 {
        1
    } else {
        binomial((p + m as u128 - 1) as u64, m as u64).unwrap_or(u128::MAX)
    }
}

/// Calls `visit` on every non-decreasing `m`-tuple of indices into `0..len`,
/// in lexicographic order, until it returns `false`.
fn for_each_multiset(len: usize, m: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if m == 0 {
        visit(&[]);
        return;
    }
    if len == 0 {
        return;
    }
    let mut idx = alloc::vec![0usize; m];
    loop {
        if !visit(&idx) {
            return;
        }
        let Some(pos) = (0..m).rev().find(|&i| idx[i] + 1 < len) else {
            return;
        };
        let v = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|x| *x = v);
    }
}

/// Up to `limit` representations `N = p_1^k + ... + p_s^k` with
/// `p_1 <= ... <= p_s` primes in `[X-H, X+H]`.
pub fn find_representations(instance: &WaringInstance, limit: usize) -> Result<Representations> {
    if instance.s < 2 {
        return Err(Error::config("need s >= 2"));
    }
    let r = r_of_k(instance.k as u64)?;
    let mut out = Representations {
        tuples: Vec::new(),
        truncated: false,
        r,
        n_mod_r: instance.n % r,
        s_mod_r: instance.s as u64 % r,
    };
    if limit == 0 || !instance.is_feasible() {
        return Ok(out);
    }
    let k = instance.k;
    let primes: Vec<u64> = (instance.lo()..=instance.hi()).filter(|&p| is_prime(p)).collect();
    let powers: Vec<u64> = primes.iter().map(|&p| (p as u128).pow(k) as u64).collect();
    let l = instance.s.div_ceil(2) as usize;
    let rt = instance.s as usize - l;
    let count = primes.len() as u128;
    let (left_size, right_size) = (multisets(count, l as u32), multisets(count, rt as u32));
    if left_size.max(right_size) > MAX_HALF {
        let fits = (1..instance.s).filter(|&m| multisets(count, m) <= MAX_HALF).max().unwrap_or(0);
        return Err(Error::budget("half-sum index", left_size.max(right_size), MAX_HALF).with_hint(
            alloc::format!("at most {fits} slots per side fit for {count} primes"),
        ));
    }

    let mut index: HashMap<u64, Vec<Vec<usize>>> = HashMap::new();
    for_each_multiset(primes.len(), rt, |t| {
        let sum = t.iter().map(|&i| powers[i]).sum();
        index.entry(sum).or_default().push(t.to_vec());
        true
    });

    let n = instance.n;
    for_each_multiset(primes.len(), l, |t| {
        let sum: u64 = t.iter().map(|&i| powers[i]).sum();
        let Some(rest) = n.checked_sub(sum) else {
            return true;
        };
        if let Some(list) = index.get(&rest) {
            let last = t[l - 1];
            for tail in list.iter().filter(|tail| tail[0] >= last) {
                if out.tuples.len() == limit {
                    out.truncated = true;
                    return false;
                }
                let tuple: Vec<u64> = t.iter().chain(tail).map(|&i| primes[i]).collect();
                let check: u128 = tuple.iter().map(|&p| (p as u128).pow(k)).sum();
                debug_assert_eq!(check, n as u128);
                out.tuples.push(tuple);
            }
        }
        true
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MainTerm {
    /// `𝔖(N) 𝔍(N)` with the series truncated at `q_max`.
    pub value: f64,
    pub series: SingularSeries,
    pub integral: SingularIntegral,
}

pub fn major_arc_main_term(instance: &WaringInstance, q_max: u64) -> Result<MainTerm> {
    let series = singular_series(instance, q_max)?;
    let integral = singular_integral(instance)?;
    Ok(MainTerm {
        value: series.value * integral.value,
        series,
        integral,
    })
}
