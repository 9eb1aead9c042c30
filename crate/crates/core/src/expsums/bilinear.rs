//! Dyadic type-I and type-II bilinear sums.
//!
//! `m ∼ M` means `M < m <= 2M`. `M` is a real parameter, so `M = 1/2`
//! selects the single value `m = 1`.

use alloc::string::String;
use alloc::vec::Vec;

use super::{Accumulator, ComplexAccumulator, ExpSumResult, Summation};
use crate::arith::{factorize, unit_hash};
use crate::error::{Error, Result};
use crate::phase::PolynomialPhase;
use crate::sieve::{sieve_window, tau_r, ArithmeticTable, Window};

/// Coefficient families. All except `Log` satisfy `|c(n)| <= τ_5(n)`, which is
/// re-checked for every coefficient actually used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coefficient {
    Unit,
    /// `log n`: the log-weighted variable produced by the Λ identity.
    Log,
    Mobius,
    /// `τ(n) (2u - 1)` with `u = unit_hash(seed, n)`.
    TauBounded { seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Psi {
    #[default]
    One,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearSpec {
    /// Dyadic parameter: `m` runs over `(M, 2M]`.
    pub m: f64,
    pub b: Coefficient,
    /// `a_ℓ`, used by the type-II sum.
    pub a: Coefficient,
    /// `ψ(ℓ)`, used by the type-I sum.
    pub psi: Psi,
    pub summation: Summation,
}

impl BilinearSpec {
    pub fn new(m: f64, b: Coefficient) -> Self {
        BilinearSpec {
            m,
            b,
            a: Coefficient::Unit,
            psi: Psi::One,
            summation: Summation::Plain,
        }
    }

    pub fn with_a(mut self, a: Coefficient) -> Self {
        self.a = a;
        self
    }

    pub fn with_psi(mut self, psi: Psi) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_summation(mut self, mode: Summation) -> Self {
        self.summation = mode;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BilinearResult {
    pub sum: ExpSumResult,
    /// `M / H`.
    pub m_over_h: f64,
    /// Type I: `M <= H`. Type II: `H >= max(L, M)` with `L = N/M`.
    pub applicable: bool,
    pub warning: Option<String>,
}

impl Coefficient {
    fn needs_factorization(self) -> bool {
        matches!(self, Coefficient::Mobius | Coefficient::TauBounded { .. })
    }

    fn value(self, n: u64, fact: &[(u64, u32)]) -> Result<f64> {
        let v = match self {
            Coefficient::Unit => return Ok(1.0),
            Coefficient::Log => return Ok(libm::log(n as f64)),
            Coefficient::Mobius => {
                if fact.iter().any(|&(_, e)| e > 1) {
                    0.0
                } else if fact.len().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
            Coefficient::TauBounded { seed } => {
                let tau = tau_r(fact.iter().copied(), 2) as f64;
                tau * (2.0 * unit_hash(seed, n) - 1.0)
            }
        };
        let bound = tau_r(fact.iter().copied(), 5) as f64;
        if libm::fabs(v) > bound {
            return Err(Error::config(alloc::format!(
                "coefficient {v} at n={n} exceeds tau_5 bound {bound}"
            )));
        }
        Ok(v)
    }
}

impl Psi {
    fn value(self, l: u64) -> f64 {
        match self {
            Psi::One => 1.0,
            Psi::Log => libm::log(l as f64),
        }
    }
}

/// Largest m-range that is sieved to evaluate `b_m`.
const MAX_M_RANGE: u64 = 1 << 26;

struct MRange {
    lo: u64,
    hi: u64,
    table: Option<ArithmeticTable>,
}

impl MRange {
    fn new(spec: &BilinearSpec, window: Window) -> Result<MRange> {
        if !(spec.m.is_finite() && spec.m > 0.0) {
            return Err(Error::config("M must be positive"));
        }
        let lo = libm::floor(spec.m) as u64 + 1;
        let hi = (libm::floor(2.0 * spec.m) as u64).min(window.end());
        let table = if hi >= lo && spec.b.needs_factorization() {
            if hi - lo + 1 > MAX_M_RANGE {
                return Err(Error::budget("m range", (hi - lo + 1) as u128, MAX_M_RANGE as u128));
            }
            Some(sieve_window(Window::new(lo - 1, hi - lo + 1)?)?)
        } else {
            None
        };
        Ok(MRange { lo, hi, table })
    }

    fn factorization(&self, m: u64) -> Vec<(u64, u32)> {
        match &self.table {
            Some(t) => t.factorization_of(m).unwrap_or_default(),
            None => Vec::new(),
        }
    }
}

/// Factorization of `n/m` given those of `n` and `m`.
fn quotient_factorization(n: &[(u64, u32)], m: &[(u64, u32)]) -> Vec<(u64, u32)> {
    n.iter()
        .filter_map(|&(p, e)| {
            let em = m.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, f)| f);
            (e > em).then_some((p, e - em))
        })
        .collect()
}

/// `Σ_{m∼M} b_m Σ_{N/m<ℓ≤(N+H)/m} ψ(ℓ) e(g(ℓm))`.
#[allow(non_snake_case)]
pub fn type_I_sum(
    window: Window,
    spec: &BilinearSpec,
    phase: &PolynomialPhase,
) -> Result<BilinearResult> {
    let n0 = window.start();
    let n1 = window.end();
    let mr = MRange::new(spec, window)?;
    let mut acc = ComplexAccumulator::new(spec.summation);
    let mut abs = Accumulator::new(spec.summation);
    let mut terms = 0u64;
    for m in mr.lo..=mr.hi {
        let bm = spec.b.value(m, &mr.factorization(m))?;
        if bm == 0.0 {
            continue;
        }
        for l in n0 / m + 1..=n1 / m {
            let w = bm * spec.psi.value(l);
            acc.add(phase.eval((l * m) as i128).e() * w);
            abs.add(libm::fabs(w));
            terms += 1;
        }
    }
    let warning = (spec.m >= n0 as f64 && n0 > 0)
        .then(|| String::from("M >= N: outer range beyond the window scale"));
    Ok(BilinearResult {
        sum: ExpSumResult::new(acc.value(), terms, window.len(), abs.value()),
        m_over_h: spec.m / window.len() as f64,
        applicable: spec.m <= window.len() as f64,
        warning,
    })
}

/// `Σ_{m∼M} b_m Σ_{N<ℓm≤N+H, L/2≤ℓ≤2L} a_ℓ e(g(ℓm))` with `L = N/M`.
#[allow(non_snake_case)]
pub fn type_II_sum(
    window: Window,
    spec: &BilinearSpec,
    phase: &PolynomialPhase,
) -> Result<BilinearResult> {
    let n0 = window.start();
    let n1 = window.end();
    let mr = MRange::new(spec, window)?;
    let table = if spec.a.needs_factorization() && !window.is_empty() {
        Some(sieve_window(window)?)
    } else {
        None
    };
    let big_l = n0 as f64 / spec.m;
    let mut acc = ComplexAccumulator::new(spec.summation);
    let mut abs = Accumulator::new(spec.summation);
    let mut terms = 0u64;
    for m in mr.lo..=mr.hi {
        let mf = if mr.table.is_some() {
            mr.factorization(m)
        } else if table.is_some() {
            factorize(m)
        } else {
            Vec::new()
        };
        let bm = spec.b.value(m, &mf)?;
        if bm == 0.0 {
            continue;
        }
        // ℓ >= L/2 and ℓ <= 2L
        let l_lo = (n0 / m + 1).max(libm::ceil(big_l / 2.0) as u64);
        let l_hi = (n1 / m).min(libm::floor(2.0 * big_l) as u64);
        for l in l_lo..=l_hi {
            let n = l * m;
            let al = match &table {
                Some(t) => {
                    let nf = t.factorization_of(n).unwrap_or_default();
                    spec.a.value(l, &quotient_factorization(&nf, &mf))?
                }
                None => spec.a.value(l, &[])?,
            };
            let w = bm * al;
            if w != 0.0 {
                acc.add(phase.eval(n as i128).e() * w);
                abs.add(libm::fabs(w));
            }
            terms += 1;
        }
    }
    let h = window.len() as f64;
    Ok(BilinearResult {
        sum: ExpSumResult::new(acc.value(), terms, window.len(), abs.value()),
        m_over_h: spec.m / h,
        applicable: h >= big_l.max(spec.m),
        warning: None,
    })
}

impl Default for BilinearSpec {
    fn default() -> Self {
        BilinearSpec::new(1.0, Coefficient::Unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use num_complex::Complex64;

    fn zero() -> PolynomialPhase {
        PolynomialPhase::zero(0, 1).unwrap()
    }

    #[test]
    fn type_one_counts_multiples() {
        let w = Window::new(10_000, 1_000).unwrap();
        let spec = BilinearSpec::new(8.0, Coefficient::Unit);
        let r = type_I_sum(w, &spec, &zero()).unwrap();
        let expected: u64 = (9..=16).map(|m| 11_000 / m - 10_000 / m).sum();
        assert_eq!(r.sum.value.re, expected as f64);
        assert!(r.applicable);
    }

    #[test]
    fn type_one_mobius_example() {
        let w = Window::new(10, 90).unwrap();
        let r = type_I_sum(w, &BilinearSpec::new(2.0, Coefficient::Mobius), &zero()).unwrap();
        assert_eq!(r.sum.value.re, -30.0);
    }

    #[test]
    fn type_one_empty_and_large_m() {
        let w = Window::new(10, 90).unwrap();
        let r = type_I_sum(w, &BilinearSpec::new(0.25, Coefficient::Unit), &zero()).unwrap();
        assert_eq!(r.sum.value, Complex64::new(0.0, 0.0));
        let r = type_I_sum(w, &BilinearSpec::new(200.0, Coefficient::Unit), &zero()).unwrap();
        assert_eq!(r.sum.value, Complex64::new(0.0, 0.0));
        assert!(r.warning.is_some());
    }

    #[test]
    fn type_one_specializes_to_log_sum() {
        let w = Window::new(5_000, 700).unwrap();
        let p = PolynomialPhase::new(0, vec![Angle::from_f64(0.1234), Angle::from_f64(0.0071)]).unwrap();
        let spec = BilinearSpec::new(0.5, Coefficient::Unit).with_psi(Psi::Log);
        let r = type_I_sum(w, &spec, &p).unwrap();
        let direct: Complex64 = w
            .iter()
            .map(|l| p.eval(l as i128).e() * libm::log(l as f64))
            .sum();
        assert!((r.sum.value - direct).norm() <= 1e-9 * direct.norm().max(1.0));
    }

    #[test]
    fn type_two_matches_double_loop() {
        let w = Window::new(20_000, 3_000).unwrap();
        let p = PolynomialPhase::new(20_000, vec![Angle::from_f64(0.31), Angle::from_f64(1e-5)]).unwrap();
        for (a, b) in [
            (Coefficient::Unit, Coefficient::Unit),
            (Coefficient::Log, Coefficient::Unit),
            (Coefficient::Mobius, Coefficient::TauBounded { seed: 7 }),
        ] {
            let spec = BilinearSpec::new(100.0, b).with_a(a);
            let r = type_II_sum(w, &spec, &p).unwrap();
            let big_l = 20_000.0 / 100.0;
            let mut direct = Complex64::new(0.0, 0.0);
            let mut pairs = 0u64;
            for m in 101..=200u64 {
                for l in 1..=23_000u64 {
                    let n = l * m;
                    let lf = l as f64;
                    if n > 20_000 && n <= 23_000 && lf >= big_l / 2.0 && lf <= 2.0 * big_l {
                        let bm = b.value(m, &factorize(m)).unwrap();
                        let al = a.value(l, &factorize(l)).unwrap();
                        direct += p.eval(n as i128).e() * (al * bm);
                        pairs += 1;
                    }
                }
            }
            assert_eq!(r.sum.terms, pairs);
            assert!((r.sum.value - direct).norm() <= 1e-9 * direct.norm().max(1.0));
        }
        let empty = Window::new(20_000, 0).unwrap();
        let r = type_II_sum(empty, &BilinearSpec::new(100.0, Coefficient::Unit), &p).unwrap();
        assert_eq!(r.sum.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn applicability_flag() {
        let w = Window::new(10_000, 1_000).unwrap();
        let r = type_II_sum(w, &BilinearSpec::new(100.0, Coefficient::Unit), &zero()).unwrap();
        assert!(r.applicable);
        let r = type_II_sum(w, &BilinearSpec::new(5.0, Coefficient::Unit), &zero()).unwrap();
        assert!(!r.applicable);
    }
}
