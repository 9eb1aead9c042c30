//! Circle method for `N = p_1^k + ... + p_s^k` with `|p_i - X| <= H`.
//!
//! * [`local`]: Gauss sums `S(q,a)`, the singular series and `p`-adic densities.
//! * [`archimedean`]: `v(β)` and the singular integral.
//! * [`count`]: `f(α)`, exact representation counts and explicit representations.

pub mod archimedean;
pub mod count;
pub mod local;

pub use archimedean::{singular_integral, v_beta, SingularIntegral, VBeta, VBetaOptions};
pub use count::{
    f_alpha, find_representations, major_arc_main_term, rho_exact, rho_fourier, MainTerm,
    Representations, RhoExact,
};
pub use local::{gauss_sum, local_data, local_density, singular_series, LocalData, SingularSeries};

use alloc::vec::Vec;

use crate::arith::{is_prime, splitmix64, valuation};
use crate::error::{Error, Result};
use crate::sieve::Window;

/// `γ(k,p)`: `τ + 2` if `p = 2` and `τ > 0`, else `τ + 1`, where `p^τ ∥ k`.
pub fn gamma_kp(k: u64, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::config("k must be positive"));
    }
    let tau = valuation(k, p);
    Ok(if p == 2 && tau > 0 { tau + 2 } else { tau + 1 })
}

/// `R(k) = Π_{(p-1) | k} p^{γ(k,p)}`.
pub fn r_of_k(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::config("k must be positive"));
    }
    let mut r = 1u64;
    for p in (2..=k + 1).filter(|&p| k.is_multiple_of(p - 1) && is_prime(p)) {
        let g = gamma_kp(k, p)?;
        r = p
            .checked_pow(g)
            .and_then(|pg| r.checked_mul(pg))
            .ok_or_else(|| Error::Overflow(alloc::format!("R({k})")))?;
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaringInstance {
    pub k: u32,
    pub s: u32,
    pub n: u64,
    pub theta: f64,
    pub x: u64,
    pub h: u64,
}

impl WaringInstance {
    /// `X = round((N/s)^{1/k})`, `H = round(X^θ)`; requires
    /// `s (X-H)^k <= N <= s (X+H)^k`.
    pub fn new(k: u32, s: u32, n: u64, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::config(alloc::format!("theta = {theta} not in (0, 1]")));
        }
        if k == 0 || s == 0 {
            return Err(Error::config("k and s must be positive"));
        }
        let x = libm::round(libm::pow(n as f64 / s as f64, 1.0 / k as f64)) as u64;
        let h = libm::round(libm::pow(x as f64, theta)) as u64;
        let inst = WaringInstance::build(k, s, n, theta, x, h)?;
        if !inst.is_feasible() {
            return Err(Error::config(alloc::format!(
                "N = {n} outside [s(X-H)^k, s(X+H)^k] for X = {x}, H = {h}"
            )));
        }
        Ok(inst)
    }

    /// Explicit `X` and `H`; `N` may lie outside the feasible range.
    pub fn with_window(k: u32, s: u32, n: u64, x: u64, h: u64) -> Result<Self> {
        if k == 0 || s == 0 {
            return Err(Error::config("k and s must be positive"));
        }
        let theta = if x > 1 && h > 0 {
            libm::log(h as f64) / libm::log(x as f64)
        } else {
            0.0
        };
        WaringInstance::build(k, s, n, theta, x, h)
    }

    fn build(k: u32, s: u32, n: u64, theta: f64, x: u64, h: u64) -> Result<Self> {
        if h >= x {
            return Err(Error::config(alloc::format!("need X - H >= 1, got X = {x}, H = {h}")));
        }
        let inst = WaringInstance {
            k,
            s,
            n,
            theta,
            x,
            h,
        };
        inst.range_max()?;
        Ok(inst)
    }

    pub fn lo(&self) -> u64 {
        self.x - self.h
    }

    pub fn hi(&self) -> u64 {
        self.x + self.h
    }

    /// Summation window `(X-H-1, X+H]` of `f(α)`.
    pub fn window(&self) -> Window {
        Window::new(self.lo() - 1, 2 * self.h + 1).expect("window within limits")
    }

    /// `(X-H)^k`.
    pub fn range_min(&self) -> u128 {
        (self.lo() as u128).pow(self.k)
    }

    /// `(X+H)^k`, checked to fit in 64 bits.
    pub fn range_max(&self) -> Result<u128> {
        (self.hi() as u128)
            .checked_pow(self.k)
            .filter(|&v| v.checked_mul(self.s as u128).is_some_and(|t| t < 1 << 64))
            .ok_or_else(|| Error::Overflow("s (X+H)^k exceeds 64 bits".into()))
    }

    pub fn is_feasible(&self) -> bool {
        let n = self.n as u128;
        let s = self.s as u128;
        let hi = self.range_max().unwrap_or(u128::MAX);
        s * self.range_min() <= n && n <= s * hi
    }

    /// `H^{s-1} / X^{k-1}`.
    pub fn scale(&self) -> f64 {
        libm::pow(self.h as f64, self.s as f64 - 1.0) / libm::pow(self.x as f64, self.k as f64 - 1.0)
    }

    pub fn with_n(&self, n: u64) -> Self {
        WaringInstance { n, ..*self }
    }
}

/// `count` integers `N ≡ s (mod R(k))` drawn deterministically from
/// `[center - spread, center + spread]`, sorted and distinct.
pub fn admissible_batch(k: u32, s: u32, center: u64, spread: u64, count: usize, seed: u64) -> Result<Vec<u64>> {
    let r = r_of_k(k as u64)?;
    let lo = center.saturating_sub(spread);
    let slots = (2 * spread + 1) / r;
    if (slots as usize) < count {
        return Err(Error::config("spread too small for the requested batch"));
    }
    let first = lo + (s as u64 % r + r - lo % r) % r;
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let n = first + r * (splitmix64(seed ^ splitmix64(i)) % slots);
        if !out.contains(&n) {
            out.push(n);
        }
        i += 1;
    }
    out.sort_unstable();
    Ok(out)
}
