//! Polynomial phases `g(n) = Σ_{j=1}^k α_j (n - n₀)^j` with coefficients in
//! [`Angle`] fixed point.
//!
//! Integer multipliers such as `C(i,j) Δ^{i-j}` are reduced modulo `2^128`
//! before multiplying an angle, which is exact: the coefficients live in
//! `Z/2^128`, and so does every quantity derived from them here. The constant
//! term of `g` is never stored since it only rotates sums by a unit factor.

use alloc::vec;
use alloc::vec::Vec;

use crate::angle::Angle;
use crate::arith::binomial_wrapping;
use crate::error::{Error, Result};
use crate::sieve::Window;

pub const MAX_DEGREE: usize = 8;

/// Largest distance between the base point and any evaluated integer.
pub const MAX_REACH: u128 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolynomialPhase {
    base: i128,
    coeffs: Vec<Angle>,
}

impl PolynomialPhase {
    /// `coeffs[j-1]` is the coefficient of `(n - base)^j`.
    pub fn new(base: i128, coeffs: Vec<Angle>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_DEGREE {
            return Err(Error::config(alloc::format!(
                "degree {} not in [1, {MAX_DEGREE}]",
                coeffs.len()
            )));
        }
        Ok(PolynomialPhase { base, coeffs })
    }

    pub fn zero(base: i128, k: usize) -> Result<Self> {
        PolynomialPhase::new(base, vec![Angle::ZERO; k])
    }

    /// `α n^k` with base point 0 (keeps the exact constant term `α N^k`
    /// that [`monomial_to_shifted`] drops).
    pub fn monomial(alpha: Angle, k: usize) -> Result<Self> {
        let mut coeffs = vec![Angle::ZERO; k];
        if let Some(top) = coeffs.last_mut() {
            *top = alpha;
        }
        PolynomialPhase::new(0, coeffs)
    }

    pub fn base(&self) -> i128 {
        self.base
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Angle] {
        &self.coeffs
    }

    /// Phase of `-g`.
    pub fn negated(&self) -> Self {
        PolynomialPhase {
            base: self.base,
            coeffs: self.coeffs.iter().map(|&a| -a).collect(),
        }
    }

    /// `g(n) mod 1`, exact.
    pub fn eval(&self, n: i128) -> Angle {
        let x = n.wrapping_sub(self.base) as u128;
        let mut acc = Angle::ZERO;
        for &a in self.coeffs.iter().rev() {
            acc = (acc + a).mul_int(x);
        }
        acc
    }

    /// Re-expands `g` around a new base point.
    pub fn shift_basis(&self, new_base: i128) -> Result<Self> {
        let delta = new_base.checked_sub(self.base).filter(|d| d.unsigned_abs() <= MAX_REACH);
        let delta = delta.ok_or_else(|| Error::Overflow("basis shift beyond 2^62".into()))?;
        let k = self.degree();
        let d = delta as u128;
        let coeffs = (1..=k)
            .map(|j| {
                let mut acc = Angle::ZERO;
                let mut dpow: u128 = 1;
                for i in j..=k {
                    let mult = binomial_wrapping(i as u64, j as u64).wrapping_mul(dpow);
                    acc += self.coeffs[i - 1].mul_int(mult);
                    dpow = dpow.wrapping_mul(d);
                }
                acc
            })
            .collect();
        Ok(PolynomialPhase {
            base: new_base,
            coeffs,
        })
    }

    /// Streams `g(n)` for every `n` of the window by forward differences.
    pub fn stream(&self, window: Window) -> Result<PhaseStream> {
        let first = window.start() as i128 + 1;
        let last = window.end() as i128;
        if (first - self.base).unsigned_abs() > MAX_REACH
            || (last - self.base).unsigned_abs() > MAX_REACH
        {
            return Err(Error::Overflow("window more than 2^62 from the base point".into()));
        }
        Ok(PhaseStream::new(self, first, window.len()))
    }

    /// Streams `g(first), g(first+1), ...` for `count` consecutive integers.
    pub fn stream_from(&self, first: i128, count: u64) -> Result<PhaseStream> {
        let last = first + count.saturating_sub(1) as i128;
        if (first - self.base).unsigned_abs() > MAX_REACH
            || (last - self.base).unsigned_abs() > MAX_REACH
        {
            return Err(Error::Overflow("range more than 2^62 from the base point".into()));
        }
        Ok(PhaseStream::new(self, first, count))
    }
}

/// `α_j = C(k,j) N^{k-j} α`, base point `N`: the shifted-basis form of `α n^k`.
pub fn monomial_to_shifted(alpha: Angle, k: usize, n: u64) -> Result<PolynomialPhase> {
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(Error::config(alloc::format!("degree {k} not in [1, {MAX_DEGREE}]")));
    }
    let coeffs = (1..=k)
        .map(|j| {
            let npow = (n as u128).wrapping_pow((k - j) as u32);
            alpha.mul_int(binomial_wrapping(k as u64, j as u64).wrapping_mul(npow))
        })
        .collect();
    PolynomialPhase::new(n as i128, coeffs)
}

/// Iterator over `g(n)` for consecutive `n`; every step is `k` exact
/// fixed-point additions, so there is no drift.
#[derive(Clone, Debug)]
pub struct PhaseStream {
    diffs: Vec<Angle>,
    remaining: u64,
}

impl PhaseStream {
    fn new(phase: &PolynomialPhase, first: i128, count: u64) -> Self {
        let k = phase.degree();
        let samples: Vec<Angle> = (0..=k as i128).map(|m| phase.eval(first + m)).collect();
        // Δ^i g(first) = Σ_m (-1)^{i-m} C(i,m) g(first+m)
        let diffs = (0..=k)
            .map(|i| {
                let mut acc = Angle::ZERO;
                for (m, &s) in samples.iter().enumerate().take(i + 1) {
                    let c = binomial_wrapping(i as u64, m as u64);
                    if (i - m) % 2 == 0 {
                        acc += s.mul_int(c);
                    } else {
                        acc -= s.mul_int(c);
                    }
                }
                acc
            })
            .collect();
        PhaseStream {
            diffs,
            remaining: count,
        }
    }
}

impl Iterator for PhaseStream {
    type Item = Angle;

    fn next(&mut self) -> Option<Angle> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.diffs[0];
        for i in 0..self.diffs.len() - 1 {
            let d = self.diffs[i + 1];
            self.diffs[i] += d;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

impl ExactSizeIterator for PhaseStream {}

/// Result of splitting each coefficient into `a_j/(qj) + α_j'`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrippedPhase {
    /// `(a_j, q·j)` with `0 <= a_j < q·j`.
    pub rational: Vec<(u64, u64)>,
    /// The phase with coefficients `α_j'`, `|α_j'| <= 1/(2qj)`.
    pub stripped: PolynomialPhase,
    /// `k! q`; the rational part is constant on residue classes of this modulus.
    pub modulus: u64,
}

/// Largest modulus for which [`StrippedPhase::offsets`] materializes a table.
pub const MAX_OFFSET_TABLE: u64 = 1 << 24;

impl StrippedPhase {
    /// Value of the rational part `Σ a_j/(qj) (n - n₀)^j mod 1` at `n`.
    pub fn offset_for(&self, n: i128) -> Angle {
        let base = self.stripped.base();
        let mut total = Angle::ZERO;
        for (j, &(a, qj)) in self.rational.iter().enumerate() {
            let x = (n - base).rem_euclid(qj as i128) as u128;
            let mut xp: u128 = 1;
            for _ in 0..=j {
                xp = xp * x % qj as u128;
            }
            let num = (a as u128 * xp % qj as u128) as i128;
            total += Angle::from_ratio(num, qj as u128).expect("qj > 0");
        }
        total
    }

    /// Offsets for each residue class `c mod k!q`, indexed by `c`.
    pub fn offsets(&self) -> Result<Vec<Angle>> {
        if self.modulus > MAX_OFFSET_TABLE {
            return Err(Error::budget(
                "offset table",
                self.modulus as u128,
                MAX_OFFSET_TABLE as u128,
            ));
        }
        Ok((0..self.modulus as i128).map(|c| self.offset_for(c)).collect())
    }
}

/// Strips the nearest rationals with denominator `q·j` from each coefficient
/// (ties in `qj·α_j` broken toward the even integer).
pub fn rational_part_strip(phase: &PolynomialPhase, q: u64) -> Result<StrippedPhase> {
    if q == 0 {
        return Err(Error::config("q must be positive"));
    }
    if q > 1_000_000 {
        return Err(Error::config(alloc::format!("q = {q} exceeds 10^6")));
    }
    let k = phase.degree();
    let factorial: u64 = (1..=k as u64).product();
    let modulus = factorial
        .checked_mul(q)
        .ok_or_else(|| Error::Overflow("k! q".into()))?;
    let mut rational = Vec::with_capacity(k);
    let mut coeffs = Vec::with_capacity(k);
    for (idx, &alpha) in phase.coeffs().iter().enumerate() {
        let qj = q * (idx as u64 + 1);
        let (int, frac) = alpha.mul_wide(qj);
        let up = frac > Angle::HALF || (frac == Angle::HALF && int % 2 == 1);
        let a = if up { int.wrapping_add(1) } else { int } % qj;
        // residual qj·α - a in [-1/2, 1/2], then divided by qj
        let (mag, negative) = if up {
            (frac.0.wrapping_neg(), true)
        } else {
            (frac.0, false)
        };
        let scaled = (mag + (qj as u128) / 2) / qj as u128;
        let stripped = if negative { Angle(scaled).neg_angle() } else { Angle(scaled) };
        rational.push((a, qj));
        coeffs.push(stripped);
    }
    Ok(StrippedPhase {
        rational,
        stripped: PolynomialPhase::new(phase.base(), coeffs)?,
        modulus,
    })
}

impl Angle {
    fn neg_angle(self) -> Angle {
        -self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn ang(s: &str) -> Angle {
        Angle::parse(s).unwrap()
    }

    /// Exact `g(n) mod 2^128` through arbitrary-precision integers.
    fn bigint_eval(p: &PolynomialPhase, n: i128) -> Angle {
        let modulus = BigInt::from(1u8) << 128;
        let x = BigInt::from(n) - BigInt::from(p.base());
        let mut total = BigInt::from(0u8);
        let mut xp = x.clone();
        for a in p.coeffs() {
            total += BigInt::from(a.0) * &xp;
            xp *= &x;
        }
        let r: BigInt = ((total % &modulus) + &modulus) % &modulus;
        let (_, digits) = r.to_u64_digits();
        let lo = *digits.first().unwrap_or(&0) as u128;
        let hi = *digits.get(1).unwrap_or(&0) as u128;
        Angle(lo | (hi << 64))
    }

    #[test]
    fn monomial_examples() {
        let p = monomial_to_shifted(ang("1/4"), 1, 987_654).unwrap();
        assert_eq!(p.coeffs(), &[ang("1/4")]);
        let p = monomial_to_shifted(ang("1/3"), 2, 6).unwrap();
        assert!(p.coeffs()[0].norm() < 1e-37);
        assert_eq!(p.coeffs()[1], ang("1/3"));
        let p = monomial_to_shifted(Angle::ZERO, 5, 1_000_000_000).unwrap();
        assert!(p.coeffs().iter().all(|&a| a == Angle::ZERO));
        assert!(monomial_to_shifted(Angle::ZERO, 0, 1).is_err());
        assert!(monomial_to_shifted(Angle::ZERO, 9, 1).is_err());
    }

    #[test]
    fn shifted_monomial_matches_up_to_constant() {
        let alpha = ang("0.123456789");
        let n0 = 1_000_003u64;
        let shifted = monomial_to_shifted(alpha, 4, n0).unwrap();
        let mono = PolynomialPhase::monomial(alpha, 4).unwrap();
        let c = mono.eval(n0 as i128);
        for n in [n0 as i128 - 17, n0 as i128, n0 as i128 + 99_999] {
            assert_eq!(shifted.eval(n) + c, mono.eval(n));
        }
    }

    #[test]
    fn shift_examples() {
        let p = PolynomialPhase::new(0, vec![Angle::from_f64(0.1), Angle::from_f64(0.01)]).unwrap();
        assert_eq!(p.shift_basis(0).unwrap().coeffs(), p.coeffs());
        let s = p.shift_basis(3).unwrap();
        assert!((s.coeffs()[0].to_f64() - 0.16).abs() < 1e-15);
        assert_eq!(s.coeffs()[1], p.coeffs()[1]);
        assert_eq!(s.shift_basis(0).unwrap(), p);
        assert!(p.shift_basis(1 << 63).is_err());
    }

    #[test]
    fn stream_examples() {
        let w = Window::new(0, 4).unwrap();
        let half: Vec<_> = PolynomialPhase::new(0, vec![ang("1/2")])
            .unwrap()
            .stream(w)
            .unwrap()
            .collect();
        assert_eq!(half, vec![Angle::HALF, Angle::ZERO, Angle::HALF, Angle::ZERO]);
        let quarter: Vec<_> = PolynomialPhase::new(0, vec![ang("1/4")])
            .unwrap()
            .stream(w)
            .unwrap()
            .collect();
        assert_eq!(quarter, vec![ang("1/4"), ang("1/2"), ang("3/4"), Angle::ZERO]);
        let empty = PolynomialPhase::new(0, vec![ang("1/4")])
            .unwrap()
            .stream(Window::new(5, 0).unwrap())
            .unwrap();
        assert_eq!(empty.count(), 0);
        let far = PolynomialPhase::new(0, vec![ang("1/4")]).unwrap();
        assert!(far.stream(Window::new(1 << 62, 5).unwrap()).is_err());
    }

    #[test]
    fn adversarial_stream_has_no_drift() {
        let near_half = Angle(Angle::HALF.0 - 12_345);
        let p = PolynomialPhase::new(7, vec![near_half; 5]).unwrap();
        let w = Window::new(1_000_000, 20_000).unwrap();
        for (n, got) in w.iter().zip(p.stream(w).unwrap()) {
            assert_eq!(got, bigint_eval(&p, n as i128));
        }
    }

    #[test]
    fn strip_examples() {
        // already rational with denominators qj
        let p = PolynomialPhase::new(0, vec![ang("1/3"), ang("1/6")]).unwrap();
        let s = rational_part_strip(&p, 3).unwrap();
        assert!(s.stripped.coeffs().iter().all(|a| a.norm() < 1e-37));
        assert_eq!(s.rational, vec![(1, 3), (1, 6)]);
        assert_eq!(s.modulus, 6);

        let p = PolynomialPhase::new(0, vec![ang("1/3") + Angle::from_f64(1e-10)]).unwrap();
        let s = rational_part_strip(&p, 3).unwrap();
        assert!((s.stripped.coeffs()[0].to_signed_f64() - 1e-10).abs() < 1e-25);
        let offs = s.offsets().unwrap();
        assert_eq!(offs.len(), 3);
        for (c, o) in offs.iter().enumerate() {
            assert!((o.to_f64() - c as f64 / 3.0).abs() < 1e-30);
        }

        let p = PolynomialPhase::new(0, vec![Angle::from_f64(0.4)]).unwrap();
        let s = rational_part_strip(&p, 1).unwrap();
        assert_eq!(s.rational, vec![(0, 1)]);
        assert_eq!(s.stripped, p);
        assert!(rational_part_strip(&p, 0).is_err());
    }

    #[test]
    fn strip_ties_go_to_even() {
        // qα = 1.5 rounds to 2, qα = 0.5 rounds to 0
        let p = PolynomialPhase::new(0, vec![ang("3/4")]).unwrap();
        let s = rational_part_strip(&p, 2).unwrap();
        assert_eq!(s.rational[0], (0, 2));
        assert!((s.stripped.coeffs()[0].to_signed_f64() + 0.25).abs() < 1e-30);
        let p = PolynomialPhase::new(0, vec![ang("1/4")]).unwrap();
        let s = rational_part_strip(&p, 2).unwrap();
        assert_eq!(s.rational[0], (0, 2));
        assert!((s.stripped.coeffs()[0].to_signed_f64() - 0.25).abs() < 1e-30);
    }

    proptest! {
        #[test]
        fn stream_matches_exact_evaluation(
            coeffs in proptest::collection::vec(any::<u128>(), 1..=5),
            base in -1_000_000i128..1_000_000,
            start in 0u64..10_000_000,
        ) {
            let p = PolynomialPhase::new(base, coeffs.into_iter().map(Angle).collect()).unwrap();
            let w = Window::new(start, 300).unwrap();
            for (n, got) in w.iter().zip(p.stream(w).unwrap()) {
                prop_assert_eq!(got, bigint_eval(&p, n as i128));
            }
        }

        #[test]
        fn shift_preserves_differences(
            coeffs in proptest::collection::vec(any::<u128>(), 1..=6),
            delta in -(1i128 << 40)..(1i128 << 40),
            n in -(1i128 << 40)..(1i128 << 40),
            m in -(1i128 << 40)..(1i128 << 40),
        ) {
            let p = PolynomialPhase::new(12_345, coeffs.into_iter().map(Angle).collect()).unwrap();
            let s = p.shift_basis(12_345 + delta).unwrap();
            prop_assert_eq!(p.eval(n) - p.eval(m), s.eval(n) - s.eval(m));
            prop_assert_eq!(s.eval(12_345 + delta), Angle::ZERO);
            prop_assert_eq!(s.shift_basis(12_345).unwrap(), p);
        }

        #[test]
        fn strip_reassembles(
            coeffs in proptest::collection::vec(any::<u128>(), 1..=4),
            q in 1u64..50,
            n in -100_000i128..100_000,
        ) {
            let p = PolynomialPhase::new(0, coeffs.into_iter().map(Angle).collect()).unwrap();
            let s = rational_part_strip(&p, q).unwrap();
            for (j, a) in s.stripped.coeffs().iter().enumerate() {
                prop_assert!(a.norm() <= 0.5 / (q as f64 * (j + 1) as f64) + 1e-30);
            }
            let back = s.stripped.eval(n) + s.offset_for(n);
            let err = (back - p.eval(n)).norm();
            // each stripped coefficient carries at most one unit of 2^-128
            let x = n.unsigned_abs() as f64;
            let bound: f64 = (1..=s.stripped.degree() as i32).map(|j| libm::pow(x, j as f64)).sum();
            prop_assert!(err <= (bound + 1.0) * libm::ldexp(1.0, -127));
            // the rational part only depends on n mod k!q
            prop_assert_eq!(s.offset_for(n), s.offset_for(n + s.modulus as i128));
        }
    }
}
