//! Rational approximation of phase coefficients.
//!
//! Every `α` here is an [`Angle`], i.e. a rational with denominator `2^128`;
//! distances below `2^-100` are flagged as sitting at that resolution floor.

pub mod nit;

pub use nit::{nit_approximation, NitModel, NitOptions};

use alloc::vec::Vec;

use crate::angle::Angle;
use crate::arith::{binomial, gcd, lcm};
use crate::error::{Error, Result};
use crate::phase::PolynomialPhase;

/// Distances below `2^-100` (in units of `2^-128`).
const FLOOR_BITS: u128 = 1 << 28;

pub const MAX_SEARCH: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalApprox {
    /// Nearest integer to `qα`, in `[0, q]`.
    pub a: u64,
    pub q: u64,
    /// `‖qα‖`.
    pub err: f64,
    /// `‖qα‖` in units of `2^-128`.
    pub err_bits: u128,
}

impl RationalApprox {
    fn at(alpha: Angle, q: u64) -> Self {
        let (int, frac) = alpha.mul_wide(q);
        let err_bits = frac.norm_bits();
        let a = if frac >= Angle::HALF { int + 1 } else { int };
        RationalApprox {
            a,
            q,
            err: frac.norm(),
            err_bits,
        }
    }

    /// True when `err < 2^-100`, below which the fixed-point input cannot
    /// distinguish `α` from a rational.
    pub fn at_resolution_floor(&self) -> bool {
        self.err_bits < FLOOR_BITS
    }

    /// `a/q` in lowest terms.
    pub fn reduced(&self) -> (u64, u64) {
        let g = gcd(self.a, self.q).max(1);
        (self.a / g, self.q / g)
    }
}

/// Partial quotients of `A / 2^128`.
fn partial_quotients(alpha: Angle) -> impl Iterator<Item = u128> {
    let mut state: Option<(u128, u128)> = None;
    let mut started = false;
    let a0 = alpha.0;
    core::iter::from_fn(move || {
        if !started {
            started = true;
            if a0 == 0 {
                return Some(0);
            }
            // 2^128 = a0·q + r
            let mut q = u128::MAX / a0;
            let mut r = u128::MAX % a0 + 1;
            if r == a0 {
                q += 1;
                r = 0;
            }
            state = Some((a0, r));
            return Some(q);
        }
        let (num, den) = state?;
        if den == 0 {
            state = None;
            return None;
        }
        state = Some((den, num % den));
        Some(num / den)
    })
}

/// Convergents `a/q` of `α` with `q <= q_max`, one per denominator, increasing in `q`.
pub fn continued_fraction_convergents(alpha: Angle, q_max: u64) -> Vec<RationalApprox> {
    let mut out: Vec<RationalApprox> = alloc::vec![RationalApprox::at(alpha, 1)];
    if alpha.0 == 0 {
        out[0].a = 0;
        return out;
    }
    // p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1
    let (mut p_prev, mut q_prev, mut p, mut q) = (1u128, 0u128, 0u128, 1u128);
    for a in partial_quotients(alpha) {
        let (Some(pn), Some(qn)) = (
            a.checked_mul(p).and_then(|x| x.checked_add(p_prev)),
            a.checked_mul(q).and_then(|x| x.checked_add(q_prev)),
        ) else {
            break;
        };
        if qn > q_max as u128 {
            break;
        }
        (p_prev, q_prev, p, q) = (p, q, pn, qn);
        if qn == 1 {
            continue;
        }
        let mut r = RationalApprox::at(alpha, qn as u64);
        r.a = pn as u64;
        out.push(r);
    }
    out
}

/// `q <= q_max` minimizing `‖qα‖`, smallest `q` on ties.
pub fn best_rational(alpha: Angle, q_max: u64) -> Result<RationalApprox> {
    if q_max == 0 {
        return Err(Error::config("q_max must be positive"));
    }
    let convs = continued_fraction_convergents(alpha, q_max);
    let mut best = convs[0];
    for c in &convs[1..] {
        if c.err_bits < best.err_bits {
            best = *c;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QSearch {
    pub q: u64,
    pub quality: f64,
}

fn check_q_max(q_max: u64) -> Result<()> {
    if q_max > MAX_SEARCH {
        return Err(Error::budget("q search", q_max as u128, MAX_SEARCH as u128));
    }
    Ok(())
}

/// Exhaustive minimum of `max_j w_j ‖qγ_j‖` over `1 <= q <= q_max`.
fn weighted_search(angles: &[Angle], weights: &[f64], q_max: u64) -> Option<QSearch> {
    if q_max == 0 {
        return None;
    }
    let mut cur: Vec<Angle> = angles.to_vec();
    let mut best = QSearch {
        q: 1,
        quality: f64::INFINITY,
    };
    for q in 1..=q_max {
        let mut quality = 0.0f64;
        for (c, &w) in cur.iter().zip(weights) {
            quality = quality.max(w * c.norm());
            if quality >= best.quality {
                break;
            }
        }
        if quality < best.quality {
            best = QSearch { q, quality };
        }
        for (c, &g) in cur.iter_mut().zip(angles) {
            *c += g;
        }
    }
    Some(best)
}

/// Smallest `q <= q_max` minimizing `max_j H^j ‖qα_j‖`.
pub fn simultaneous_q_search(
    phase: &PolynomialPhase,
    h: u64,
    q_max: u64,
) -> Result<Option<QSearch>> {
    check_q_max(q_max)?;
    let weights: Vec<f64> = (1..=phase.degree())
        .map(|j| libm::pow(h as f64, j as f64))
        .collect();
    Ok(weighted_search(phase.coeffs(), &weights, q_max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeIIStructure {
    pub q: u64,
    pub quality: f64,
    /// `γ_j = jα_j + (j+1)Nα_{j+1}`, with `α_{k+1} = 0`.
    pub combined: Vec<Angle>,
}

/// `γ_j = jα_j + (j+1)Nα_{j+1}` computed exactly mod 1.
pub fn type_ii_combinations(phase: &PolynomialPhase, n: u64) -> Vec<Angle> {
    let c = phase.coeffs();
    let k = c.len();
    (1..=k)
        .map(|j| {
            let next = if j < k {
                c[j].mul_int((j as u128 + 1).wrapping_mul(n as u128))
            } else {
                Angle::ZERO
            };
            c[j - 1].mul_int(j as u128) + next
        })
        .collect()
}

/// Smallest `q <= q_max` minimizing `max_j (H^{j+1}/N) ‖qγ_j‖`.
#[allow(non_snake_case)]
pub fn typeII_structure_search(
    phase: &PolynomialPhase,
    n: u64,
    h: u64,
    q_max: u64,
) -> Result<Option<TypeIIStructure>> {
    check_q_max(q_max)?;
    if n == 0 {
        return Err(Error::config("N must be positive"));
    }
    let combined = type_ii_combinations(phase, n);
    let weights: Vec<f64> = (1..=phase.degree())
        .map(|j| libm::pow(h as f64, j as f64 + 1.0) / n as f64)
        .collect();
    Ok(weighted_search(&combined, &weights, q_max).map(|s| TypeIIStructure {
        q: s.q,
        quality: s.quality,
        combined,
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialLift {
    pub q_prime: u64,
    /// Measured `ε_j = H^j ‖q C(k,j) N^{k-j} α‖`, for `j = 1..=k`.
    pub epsilons: Vec<f64>,
    /// `N^{k-j} ‖q'α‖ H^j` for `j = k, k-1, ..., 1`; the last entry is
    /// `N^{k-1} H ‖q'α‖`.
    pub bound_chain: Vec<f64>,
}

/// Lifts simultaneous information on the shifted coefficients of `α n^k`
/// back to `α` itself with `q' = lcm_j(q C(k,j))`.
///
/// Descending from level `j` to `j-1` needs `N^{k-j+1} ‖q'α‖ < 1/2`, so that
/// `‖q' N^{k-j+1} α‖` equals `N^{k-j+1}‖q'α‖` without wrap-around. The first
/// level where this fails is reported as [`Error::Hypothesis`].
pub fn monomial_lift(q: u64, alpha: Angle, k: usize, n: u64, h: u64) -> Result<MonomialLift> {
    if q == 0 {
        return Err(Error::config("q must be positive"));
    }
    if !(1..=crate::phase::MAX_DEGREE).contains(&k) {
        return Err(Error::config(alloc::format!("degree {k} out of range")));
    }
    let mut q_prime = 1u64;
    let mut epsilons = Vec::with_capacity(k);
    for j in 1..=k {
        let c = binomial(k as u64, j as u64).expect("small binomial") as u64;
        let qc = q.checked_mul(c).ok_or_else(|| Error::Overflow("q C(k,j)".into()))?;
        q_prime = lcm(q_prime, qc).ok_or_else(|| Error::Overflow("lcm of q C(k,j)".into()))?;
        let mult = (qc as u128).wrapping_mul((n as u128).wrapping_pow((k - j) as u32));
        epsilons.push(libm::pow(h as f64, j as f64) * alpha.mul_int(mult).norm());
    }
    let d = alpha.mul_int(q_prime as u128).norm();
    let (nf, hf) = (n as f64, h as f64);
    let mut chain = Vec::with_capacity(k);
    for j in (1..=k).rev() {
        if j < k {
            let step = j + 1;
            let measured = libm::pow(nf, (k - j) as f64) * d;
            if measured >= 0.5 {
                return Err(Error::Hypothesis {
                    step: step as u32,
                    measured,
                });
            }
        }
        chain.push(libm::pow(nf, (k - j) as f64) * d * libm::pow(hf, j as f64));
    }
    Ok(MonomialLift {
        q_prime,
        epsilons,
        bound_chain: chain,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Major { a: u64, q: u64 },
    Minor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub kind: ArcKind,
    pub q_bound: f64,
    pub x: u64,
    pub h: u64,
    pub k: usize,
    /// `Q / (X^{k-1} H)`.
    pub width: f64,
}

/// Major iff some `q <= Q` has `‖qα‖ <= Q/(X^{k-1}H)`; the witness is the
/// smallest such `q`. Since no smaller denominator comes as close, that `q`
/// is a best approximation and therefore a convergent denominator, so only
/// convergents need checking. A witness `0/1` is reported as `1/1`.
pub fn classify_arc(alpha: Angle, k: usize, x: u64, h: u64, q_bound: f64) -> Result<Arc> {
    if !(q_bound >= 1.0) {
        return Err(Error::config("Q must be at least 1"));
    }
    if k == 0 || x == 0 || h == 0 {
        return Err(Error::config("k, X and H must be positive"));
    }
    let width = q_bound / (libm::pow(x as f64, k as f64 - 1.0) * h as f64);
    let q_max = libm::floor(q_bound).min(u64::MAX as f64) as u64;
    let kind = continued_fraction_convergents(alpha, q_max)
        .into_iter()
        .find(|c| c.err <= width)
        .map_or(ArcKind::Minor, |c| {
            if c.q == 1 {
                ArcKind::Major { a: 1, q: 1 }
            } else {
                ArcKind::Major { a: c.a, q: c.q }
            }
        });
    Ok(Arc {
        kind,
        q_bound,
        x,
        h,
        k,
        width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ang(s: &str) -> Angle {
        Angle::parse(s).unwrap()
    }

    fn exhaustive_best(alpha: Angle, q_max: u64) -> (u64, u128) {
        (1..=q_max)
            .map(|q| (q, alpha.mul_int(q as u128).norm_bits()))
            .fold((0, u128::MAX), |best, (q, e)| if e < best.1 { (q, e) } else { best })
    }

    #[test]
    fn convergent_examples() {
        let c = continued_fraction_convergents(ang("1/3"), 1000);
        let qs: Vec<_> = c.iter().map(|r| (r.a, r.q)).collect();
        assert_eq!(qs, vec![(0, 1), (1, 3)]);
        let c = continued_fraction_convergents(ang("0.618034"), 13);
        let qs: Vec<_> = c.iter().map(|r| (r.a, r.q)).collect();
        for pair in [(1, 2), (2, 3), (3, 5), (5, 8), (8, 13)] {
            assert!(qs.contains(&pair), "{pair:?} missing from {qs:?}");
        }
        let c = continued_fraction_convergents(Angle::ZERO, 100);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].a, c[0].q, c[0].err), (0, 1, 0.0));
    }

    #[test]
    fn best_rational_examples() {
        let r = best_rational(ang("0.3333340"), 10).unwrap();
        assert_eq!(r.q, 3);
        assert!((r.err - 2e-6).abs() < 1e-15);
        let r = best_rational(ang("0.618034"), 10).unwrap();
        assert_eq!(r.q, 8);
        assert!((r.err - 0.055728).abs() < 1e-9);
        let r = best_rational(Angle::HALF, 10).unwrap();
        assert_eq!((r.a, r.q, r.err), (1, 2, 0.0));
        assert!(best_rational(Angle::HALF, 0).is_err());
    }

    #[test]
    fn simultaneous_examples() {
        let p = PolynomialPhase::new(0, vec![ang("1/6"), ang("5/6"), ang("1/3")]).unwrap();
        let s = simultaneous_q_search(&p, 100, 50).unwrap().unwrap();
        assert_eq!(s.q, 6);
        assert!(s.quality < 1e-30);

        let h = 1_000u64;
        let p = PolynomialPhase::new(0, vec![ang("1/3") + Angle::from_f64(0.1 / h as f64)]).unwrap();
        let s = simultaneous_q_search(&p, h, 10).unwrap().unwrap();
        assert_eq!(s.q, 3);
        assert!((s.quality - 0.3).abs() < 1e-9);
        assert!(simultaneous_q_search(&p, h, 0).unwrap().is_none());
    }

    #[test]
    fn generic_phase_has_large_quality() {
        let p = PolynomialPhase::new(0, vec![Angle(0x3a9f_1e3c_9d2b_55aa_1234_9876_abcd_ef01), Angle(0x7c11_02f3_aaaa_5555_0f0f_f0f0_1357_9bdf)]).unwrap();
        let s = simultaneous_q_search(&p, 10_000, 100).unwrap().unwrap();
        assert!(s.quality > 100.0);
        let t = typeII_structure_search(&p, 1_000_000, 10_000, 100).unwrap().unwrap();
        assert!(t.quality > 1.0);
    }

    #[test]
    fn type_ii_examples() {
        let n = 1_000_003u64;
        let p = crate::phase::monomial_to_shifted(ang("2/7"), 3, n).unwrap();
        let t = typeII_structure_search(&p, n, 300, 7 * 6).unwrap().unwrap();
        assert!(t.quality < 1e-20, "{t:?}");
        assert_eq!(t.combined.len(), 3);

        let p = PolynomialPhase::new(0, vec![ang("1/7")]).unwrap();
        let t = typeII_structure_search(&p, 1_000, 100, 10).unwrap().unwrap();
        assert_eq!(t.q, 7);
        assert!(t.quality < 1e-30);
    }

    #[test]
    fn monomial_lift_examples() {
        let l = monomial_lift(5, ang("2/5"), 3, 1_000, 100).unwrap();
        assert_eq!(l.q_prime, 15);
        assert!(l.bound_chain.iter().all(|&b| b < 1e-20));

        let alpha = ang("1/3") + Angle::from_f64(1e-12);
        let l = monomial_lift(3, alpha, 2, 10_000, 1_000).unwrap();
        assert_eq!(l.q_prime, 6);
        assert_eq!(l.bound_chain.len(), 2);
        let last = *l.bound_chain.last().unwrap();
        assert!((last - 6e-5).abs() < 1e-12, "{last}");

        let generic = Angle(0x3a9f_1e3c_9d2b_55aa_1234_9876_abcd_ef01);
        match monomial_lift(1, generic, 3, 10_000, 100) {
            Err(Error::Hypothesis { step, .. }) => assert_eq!(step, 3),
            other => panic!("expected hypothesis failure, got {other:?}"),
        }
    }

    #[test]
    fn arc_examples() {
        let a = classify_arc(ang("1/3"), 2, 1_000, 100, 10.0).unwrap();
        assert_eq!(a.kind, ArcKind::Major { a: 1, q: 3 });
        let (x, h, q) = (1_000u64, 100u64, 5.0);
        let w = q / (x as f64 * h as f64);
        let a = classify_arc(ang("1/3") + Angle::from_f64(2.0 * w), 2, x, h, q).unwrap();
        assert_eq!(a.kind, ArcKind::Minor);
        // 44/211: every q <= 100 stays far from it at this width
        let a = classify_arc(ang("44/211"), 2, 10_000, 1_000, 100.0).unwrap();
        assert_eq!(a.kind, ArcKind::Minor);
        let a = classify_arc(Angle::from_f64(1e-9), 2, 1_000, 100, 10.0).unwrap();
        assert_eq!(a.kind, ArcKind::Major { a: 1, q: 1 });
        assert!(classify_arc(Angle::ZERO, 2, 10, 10, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn best_rational_is_exhaustive_minimum(raw in any::<u128>(), q_max in 1u64..2_000) {
            let alpha = Angle(raw);
            let r = best_rational(alpha, q_max).unwrap();
            let (q, e) = exhaustive_best(alpha, q_max);
            prop_assert_eq!(r.q, q);
            prop_assert_eq!(r.err_bits, e);
        }

        #[test]
        fn convergents_approximate_well(raw in any::<u128>(), q_max in 1u64..1_000_000) {
            let alpha = Angle(raw);
            let cs = continued_fraction_convergents(alpha, q_max);
            for w in cs.windows(2) {
                prop_assert!(w[0].q < w[1].q);
            }
            for c in cs {
                prop_assert!(c.q <= q_max);
                let diff = (alpha.to_f64() - c.a as f64 / c.q as f64).abs();
                prop_assert!(diff < 1.0 / (c.q as f64 * c.q as f64) + 1e-15);
            }
        }

        #[test]
        fn quality_monotone_in_q_max(a in any::<u128>(), b in any::<u128>(), q1 in 1u64..300, extra in 0u64..300) {
            let p = PolynomialPhase::new(0, vec![Angle(a), Angle(b)]).unwrap();
            let s1 = simultaneous_q_search(&p, 50, q1).unwrap().unwrap();
            let s2 = simultaneous_q_search(&p, 50, q1 + extra).unwrap().unwrap();
            prop_assert!(s2.quality <= s1.quality);
        }

        #[test]
        fn arc_agrees_with_brute_force(raw in any::<u128>(), q in 1.0f64..300.0, x in 2u64..200, h in 1u64..50) {
            let alpha = Angle(raw);
            let arc = classify_arc(alpha, 2, x, h, q).unwrap();
            let brute = (1..=q as u64).find(|&d| alpha.mul_int(d as u128).norm() <= arc.width);
            match (arc.kind, brute) {
                (ArcKind::Minor, None) => {}
                (ArcKind::Major { q: wq, .. }, Some(d)) => prop_assert_eq!(wq, d),
                (kind, b) => prop_assert!(false, "{:?} vs brute {:?}", kind, b),
            }
        }
    }
}
