//! `v(β) = k^{-1} Σ_{(X-H)^k <= m <= (X+H)^k} m^{-1+1/k} e(βm)` and the
//! singular integral `∫_0^1 v(β)^s e(-βN) dβ`.

use alloc::vec;

use num_complex::Complex64;

use super::WaringInstance;
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::expsums::{ComplexAccumulator, Summation};
use crate::fft::{fft, transform_len};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VBetaOptions {
    /// Largest term count summed directly.
    pub budget: u64,
    /// Over budget, sum blocks of this length with the weight frozen at the
    /// block midpoint instead of failing.
    pub fast_block: Option<u64>,
}

impl Default for VBetaOptions {
    fn default() -> Self {
        VBetaOptions {
            budget: 100_000_000,
            fast_block: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VBeta {
    pub value: Complex64,
    pub terms: u64,
    /// Bound on `|value - v(β)|` (zero for direct summation).
    pub error_bound: f64,
    pub fast: bool,
}

fn weight(m: u64, k: u32) -> f64 {
    libm::pow(m as f64, -1.0 + 1.0 / k as f64) / k as f64
}

pub fn v_beta(beta: f64, instance: &WaringInstance, options: VBetaOptions) -> Result<VBeta> {
    if !(beta.abs() <= 1.0) {
        return Err(Error::config("|beta| must be at most 1"));
    }
    let lo = instance.range_min() as u64;
    let hi = instance.range_max()? as u64;
    let terms = hi - lo + 1;
    let step = Angle::from_f64(beta);
    let k = instance.k;
    if terms <= options.budget {
        let mut acc = ComplexAccumulator::new(Summation::Plain);
        let mut ph = step.mul_int(lo as u128);
        for m in lo..=hi {
            acc.add(ph.e() * weight(m, k));
            ph += step;
        }
        return Ok(VBeta {
            value: acc.value(),
            terms,
            error_bound: 0.0,
            fast: false,
        });
    }
    let Some(block) = options.fast_block.filter(|&b| b > 0) else {
        return Err(Error::budget("v(beta) terms", terms as u128, options.budget as u128)
            .with_hint("enable the block fast path"));
    };
    // Σ_{m=a}^{b} e(βm) = e(βa) (1 - e(β(b-a+1))) / (1 - e(β))
    let mut acc = ComplexAccumulator::new(Summation::Plain);
    let ratio_den = Complex64::new(1.0, 0.0) - step.e();
    let mut a = lo;
    while a <= hi {
        let b = (a + block - 1).min(hi);
        let len = b - a + 1;
        let geo = if ratio_den.norm() < 1e-300 {
            Complex64::new(len as f64, 0.0)
        } else {
            step.mul_int(a as u128).e() * (Complex64::new(1.0, 0.0) - step.mul_int(len as u128).e())
                / ratio_den
        };
        let mid = weight(a + len / 2, k);
        acc.add(geo * mid);
        a = b + 1;
    }
    // |w(m) - w(mid)| <= block · |w'| on each block; summed, at most block · (w(lo) - w(hi))
    let error_bound = block as f64 * (weight(lo, k) - weight(hi, k)).abs();
    Ok(VBeta {
        value: acc.value(),
        terms,
        error_bound,
        fast: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularIntegral {
    pub value: f64,
    /// `H^{s-1} / X^{k-1}`.
    pub scale: f64,
    pub ratio: f64,
}

/// Exact coefficient extraction `k^{-s} Σ_{m_1+...+m_s = N} Π m_i^{-1+1/k}`
/// through one forward transform of the weight array and one inverse
/// coefficient evaluation.
pub fn singular_integral(instance: &WaringInstance) -> Result<SingularIntegral> {
    let lo = instance.range_min() as u64;
    let hi = instance.range_max()? as u64;
    let s = instance.s as u64;
    let n = instance.n;
    let scale = instance.scale();
    let done = |value: f64| SingularIntegral {
        value,
        scale,
        ratio: value / scale,
    };
    if (n as u128) < s as u128 * lo as u128 || n as u128 > s as u128 * hi as u128 {
        return Ok(done(0.0));
    }
    let k = instance.k;
    if s == 1 {
        return Ok(done(weight(n, k)));
    }
    let len = (hi - lo + 1) as usize;
    let out_len = (s as usize)
        .checked_mul(len - 1)
        .map(|x| x + 1)
        .ok_or_else(|| Error::Overflow("convolution length".into()))?;
    let g = transform_len(out_len).map_err(|e| e.with_hint("use a smaller X, H or s"))?;
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    for (i, z) in buf.iter_mut().take(len).enumerate() {
        z.re = weight(lo + i as u64, k);
    }
    fft(&mut buf, false)?;
    // coefficient of index idx in the s-th power: (1/g) Σ_j W_j^s e(j idx / g)
    let idx = (n - s * lo) as u128;
    let mut acc = ComplexAccumulator::new(Summation::Compensated);
    let gm = g as u128;
    for (j, w) in buf.iter().enumerate() {
        let ph = Angle::from_ratio(((j as u128 * idx) % gm) as i128, gm)?;
        acc.add(w.powu(s as u32) * ph.e());
    }
    Ok(done(acc.value().re / g as f64))
}
