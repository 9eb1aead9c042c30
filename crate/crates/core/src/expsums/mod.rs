//! Weighted exponential sums over short windows.
//!
//! All sums run in ascending `n` (ascending `m`, then `ℓ`, for bilinear sums)
//! so results are reproducible bit for bit. [`Summation::Compensated`]
//! switches the running totals to Neumaier summation.

pub mod bilinear;
pub mod heath_brown;

pub use bilinear::{type_I_sum, type_II_sum, BilinearResult, BilinearSpec, Coefficient, Psi};
pub use heath_brown::{heath_brown_decompose, Component, ComponentKind, Decomposition, HbOptions, Target};

use num_complex::Complex64;

use crate::angle::Angle;
use crate::error::Result;
use crate::phase::PolynomialPhase;
use crate::sieve::ArithmeticTable;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Summation {
    #[default]
    Plain,
    Compensated,
}

/// Running real sum, plain or Neumaier-compensated.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
    compensated: bool,
}

impl Accumulator {
    pub fn new(mode: Summation) -> Self {
        Accumulator {
            sum: 0.0,
            comp: 0.0,
            compensated: mode == Summation::Compensated,
        }
    }

    pub fn plain() -> Self {
        Accumulator::new(Summation::Plain)
    }

    pub fn compensated() -> Self {
        Accumulator::new(Summation::Compensated)
    }

    pub fn add(&mut self, x: f64) {
        if !self.compensated {
            self.sum += x;
            return;
        }
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ComplexAccumulator {
    re: Accumulator,
    im: Accumulator,
}

impl ComplexAccumulator {
    pub fn new(mode: Summation) -> Self {
        ComplexAccumulator {
            re: Accumulator::new(mode),
            im: Accumulator::new(mode),
        }
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpSumResult {
    pub value: Complex64,
    /// Number of summands, including those with zero weight.
    pub terms: u64,
    /// `|value| / H`, with `H` the window length (or the term count for Weyl sums).
    pub normalized: f64,
    /// `Σ |weight|`, the trivial bound for `|value|`.
    pub abs_weight: f64,
}

impl ExpSumResult {
    pub fn new(value: Complex64, terms: u64, scale: u64, abs_weight: f64) -> Self {
        let normalized = if scale == 0 {
            0.0
        } else {
            value.norm() / scale as f64
        };
        ExpSumResult {
            value,
            terms,
            normalized,
            abs_weight,
        }
    }
}

/// `Σ_{n∈window} Λ(n) e(g(n))`.
pub fn lambda_exp_sum(table: &ArithmeticTable, phase: &PolynomialPhase) -> Result<ExpSumResult> {
    lambda_exp_sum_with(table, phase, Summation::Plain)
}

pub fn lambda_exp_sum_with(
    table: &ArithmeticTable,
    phase: &PolynomialPhase,
    mode: Summation,
) -> Result<ExpSumResult> {
    weighted_sum(table, phase, mode, table.lambda().iter().copied())
}

/// `Σ_{n∈window} μ(n) e(g(n))`.
pub fn mobius_exp_sum(table: &ArithmeticTable, phase: &PolynomialPhase) -> Result<ExpSumResult> {
    mobius_exp_sum_with(table, phase, Summation::Plain)
}

pub fn mobius_exp_sum_with(
    table: &ArithmeticTable,
    phase: &PolynomialPhase,
    mode: Summation,
) -> Result<ExpSumResult> {
    weighted_sum(table, phase, mode, table.mu().iter().map(|&m| m as f64))
}

fn weighted_sum(
    table: &ArithmeticTable,
    phase: &PolynomialPhase,
    mode: Summation,
    weights: impl Iterator<Item = f64>,
) -> Result<ExpSumResult> {
    let window = table.window();
    let mut acc = ComplexAccumulator::new(mode);
    let mut abs = Accumulator::new(mode);
    for (w, g) in weights.zip(phase.stream(window)?) {
        if w != 0.0 {
            acc.add(g.e() * w);
            abs.add(libm::fabs(w));
        }
    }
    Ok(ExpSumResult::new(acc.value(), window.len(), window.len(), abs.value()))
}

/// The Λ and μ sums in one pass over the phase stream; each result equals the
/// corresponding single-weight function bit for bit.
pub fn lambda_mobius_exp_sums(
    table: &ArithmeticTable,
    phase: &PolynomialPhase,
    mode: Summation,
) -> Result<(ExpSumResult, ExpSumResult)> {
    let window = table.window();
    let (mut lam, mut lam_abs) = (ComplexAccumulator::new(mode), Accumulator::new(mode));
    let (mut mu, mut mu_abs) = (ComplexAccumulator::new(mode), Accumulator::new(mode));
    let weights = table.lambda().iter().zip(table.mu());
    for ((&l, &m), g) in weights.zip(phase.stream(window)?) {
        if l == 0.0 && m == 0 {
            continue;
        }
        let z = g.e();
        if l != 0.0 {
            lam.add(z * l);
            lam_abs.add(libm::fabs(l));
        }
        if m != 0 {
            mu.add(z * m as f64);
            mu_abs.add(1.0);
        }
    }
    let len = window.len();
    Ok((
        ExpSumResult::new(lam.value(), len, len, lam_abs.value()),
        ExpSumResult::new(mu.value(), len, len, mu_abs.value()),
    ))
}

/// `F(α) = Σ_{|n-X|≤H} e(α n^k)`, normalized by the term count `2H+1`.
pub fn weyl_sum(x: i64, h: u64, alpha: Angle, k: usize) -> Result<ExpSumResult> {
    weyl_sum_with(x, h, alpha, k, Summation::Plain)
}

pub fn weyl_sum_with(
    x: i64,
    h: u64,
    alpha: Angle,
    k: usize,
    mode: Summation,
) -> Result<ExpSumResult> {
    let phase = PolynomialPhase::monomial(alpha, k)?;
    let count = 2 * h + 1;
    let mut acc = ComplexAccumulator::new(mode);
    for g in phase.stream_from(x as i128 - h as i128, count)? {
        acc.add(g.e());
    }
    Ok(ExpSumResult::new(acc.value(), count, count, count as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{chebyshev_psi_delta, sieve_window, Window};
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn lambda_examples() {
        let t = sieve_window(Window::new(10, 10).unwrap()).unwrap();
        let zero = PolynomialPhase::zero(0, 1).unwrap();
        let r = lambda_exp_sum(&t, &zero).unwrap();
        assert!(close(r.value, Complex64::new(chebyshev_psi_delta(&t), 0.0), 1e-12));
        assert!((r.value.re - 11.4336).abs() < 1e-4);

        let half = PolynomialPhase::new(0, vec![Angle::HALF]).unwrap();
        let r = lambda_exp_sum(&t, &half).unwrap();
        assert!((r.value.re + 10.047).abs() < 1e-3 && r.value.im.abs() < 1e-12);

        let empty = sieve_window(Window::new(10, 0).unwrap()).unwrap();
        assert_eq!(lambda_exp_sum(&empty, &half).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mobius_examples() {
        let t = sieve_window(Window::new(1, 9).unwrap()).unwrap();
        let zero = PolynomialPhase::zero(0, 1).unwrap();
        assert_eq!(mobius_exp_sum(&t, &zero).unwrap().value.re, -2.0);
        let t = sieve_window(Window::new(1, 3).unwrap()).unwrap();
        let half = PolynomialPhase::new(0, vec![Angle::HALF]).unwrap();
        assert!(mobius_exp_sum(&t, &half).unwrap().value.norm() < 1e-12);
    }

    #[test]
    fn weyl_examples() {
        let r = weyl_sum(100, 7, Angle::ZERO, 3).unwrap();
        assert_eq!(r.value, Complex64::new(15.0, 0.0));
        let r = weyl_sum(10, 2, Angle::HALF, 1).unwrap();
        assert!(close(r.value, Complex64::new(1.0, 0.0), 1e-12));
        let r = weyl_sum(2, 2, Angle::parse("1/4").unwrap(), 2).unwrap();
        assert!(close(r.value, Complex64::new(3.0, 2.0), 1e-12));
    }

    #[test]
    fn compensation_recovers_cancellation() {
        let mut plain = Accumulator::plain();
        let mut comp = Accumulator::compensated();
        for x in [1e16, 1.0, -1e16, 1.0] {
            plain.add(x);
            comp.add(x);
        }
        assert_eq!(comp.value(), 2.0);
        assert_ne!(plain.value(), 2.0);
    }

    proptest! {
        #[test]
        fn triangle_and_conjugation(
            start in 0u64..1_000_000,
            len in 0u64..400,
            coeffs in proptest::collection::vec(any::<u128>(), 1..=3),
        ) {
            let t = sieve_window(Window::new(start, len).unwrap()).unwrap();
            let p = PolynomialPhase::new(start as i128, coeffs.into_iter().map(Angle).collect()).unwrap();
            for mode in [Summation::Plain, Summation::Compensated] {
                let l = lambda_exp_sum_with(&t, &p, mode).unwrap();
                let lc = lambda_exp_sum_with(&t, &p.negated(), mode).unwrap();
                prop_assert!(l.value.norm() <= l.abs_weight * (1.0 + 1e-12) + 1e-12);
                prop_assert!((l.value.conj() - lc.value).norm() <= 1e-12 * l.abs_weight.max(1.0));
                let m = mobius_exp_sum_with(&t, &p, mode).unwrap();
                let mc = mobius_exp_sum_with(&t, &p.negated(), mode).unwrap();
                prop_assert!(m.value.norm() <= m.abs_weight * (1.0 + 1e-12) + 1e-12);
                prop_assert!((m.value.conj() - mc.value).norm() <= 1e-12 * m.abs_weight.max(1.0));
            }
        }
    }

    #[test]
    fn joint_sums_match_single_sums() {
        let t = sieve_window(Window::new(1_000_000, 5_000).unwrap()).unwrap();
        let p = PolynomialPhase::new(
            1_000_000,
            alloc::vec![Angle::parse("0.123456789").unwrap(), Angle::parse("1/7").unwrap()],
        )
        .unwrap();
        for mode in [Summation::Plain, Summation::Compensated] {
            let (l, m) = lambda_mobius_exp_sums(&t, &p, mode).unwrap();
            assert_eq!(l, lambda_exp_sum_with(&t, &p, mode).unwrap());
            assert_eq!(m, mobius_exp_sum_with(&t, &p, mode).unwrap());
        }
    }
}
