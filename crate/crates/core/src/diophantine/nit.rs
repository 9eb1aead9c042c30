//! Approximating `e(g(n))` by `η n^{it}` on a short progression.
//!
//! Given type-II structure for `g` at modulus `q`, the phase is re-expanded
//! around a point `n₀`, the rational parts `a_j/(qj)` are stripped, and
//! `t = 2π n₀ β_1'`. On each residue class mod `k!q` the rational part is
//! constant, so `e(g(n)) ≈ η n^{it}` with one unimodular `η` per class.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::type_ii_combinations;
use crate::angle::Angle;
use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::phase::{rational_part_strip, PolynomialPhase};
use crate::sieve::Window;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NitOptions {
    /// `A`: sets the default structural threshold `(log N)^A` and the target `(log N)^{-A-15}`.
    pub a: f64,
    /// `B`: the progression length is `H₀ = H (log N)^{-B}`.
    pub b: f64,
    /// Overrides the structural threshold.
    pub threshold: Option<f64>,
}

impl NitOptions {
    /// `A = 2`, `B = A + 2k`.
    pub fn for_degree(k: usize) -> Self {
        NitOptions {
            a: 2.0,
            b: 2.0 + 2.0 * k as f64,
            threshold: None,
        }
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NitModel {
    pub t: f64,
    /// `(class mod k!q, η)` for each class met by the progression; `η` is
    /// relative to `n₀^{it}`.
    pub eta_phase: Vec<(u64, Angle)>,
    /// `max_{n∈P} |e(g(n)) - η n^{it}|`.
    pub max_dev: f64,
    pub n0: u64,
    pub h0: u64,
    pub modulus: u64,
    /// Measured `max_j (H^{j+1}/N) ‖q(jα_j + (j+1)Nα_{j+1})‖`.
    pub structure_quality: f64,
    /// `(N/H)^{k+1}`, the scale of `|t|`.
    pub t_scale: f64,
    /// `(log N)^{-A-15}`.
    pub target_dev: f64,
}

/// Builds the `n^{it}` model for `g` on the centred progression of length
/// `H₀` inside `window`, after checking the type-II structure at `q`.
pub fn nit_approximation(
    phase: &PolynomialPhase,
    window: Window,
    q: u64,
    options: NitOptions,
) -> Result<NitModel> {
    let (n, h) = (window.start(), window.len());
    if n < 3 || h == 0 {
        return Err(Error::config("window must have N >= 3 and H >= 1"));
    }
    let k = phase.degree();
    let log_n = libm::log(n as f64);

    let at_n = phase.shift_basis(n as i128)?;
    let combined = type_ii_combinations(&at_n, n);
    let structure_quality = combined
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let j = idx as f64 + 1.0;
            libm::pow(h as f64, j + 1.0) / n as f64 * g.mul_int(q as u128).norm()
        })
        .fold(0.0, f64::max);
    let threshold = options.threshold.unwrap_or_else(|| libm::pow(log_n, options.a));
    if !(structure_quality <= threshold) {
        return Err(Error::Structure {
            quality: structure_quality,
            threshold,
        });
    }

    let h0 = libm::floor(h as f64 * libm::pow(log_n, -options.b)) as u64;
    if h0 < 10 {
        return Err(Error::config(alloc::format!(
            "progression length H0 = {h0} < 10; lower B"
        )));
    }
    let n0 = n + (h - h0) / 2;
    let shifted = phase.shift_basis(n0 as i128)?;
    let stripped = rational_part_strip(&shifted, q)?;
    let modulus = stripped.modulus;
    let beta1 = stripped.stripped.coeffs()[0].to_signed_f64();
    let t = 2.0 * core::f64::consts::PI * n0 as f64 * beta1;

    // n^{it} / n₀^{it} = exp(i t log(1 + (n - n₀)/n₀))
    let twist = |m: u64| {
        let x = (m - n0) as f64 / n0 as f64;
        let (s, c) = libm::sincos(t * libm::log1p(x));
        Complex64::new(c, s)
    };
    let mut sums: Vec<(u64, Complex64)> = Vec::new();
    let points: Vec<(u64, Complex64, Complex64)> = (n0 + 1..=n0 + h0)
        .filter(|&m| gcd(m % modulus, modulus) == 1)
        .map(|m| (m, phase.eval(m as i128).e(), twist(m)))
        .collect();
    for &(m, z, u) in &points {
        let class = m % modulus;
        let w = z * u.conj();
        match sums.iter_mut().find(|(c, _)| *c == class) {
            Some(entry) => entry.1 += w,
            None => sums.push((class, w)),
        }
    }
    sums.sort_by_key(|&(c, _)| c);
    let etas: Vec<(u64, Complex64)> = sums
        .iter()
        .map(|&(c, s)| {
            let norm = s.norm();
            let eta = if norm > 0.0 { s / norm } else { Complex64::new(1.0, 0.0) };
            (c, eta)
        })
        .collect();
    let mut max_dev = 0.0f64;
    for &(m, z, u) in &points {
        let class = m % modulus;
        let eta = etas.iter().find(|(c, _)| *c == class).map(|e| e.1).unwrap_or_default();
        max_dev = max_dev.max((z - eta * u).norm());
    }
    let eta_phase = etas
        .into_iter()
        .map(|(c, eta)| {
            let turns = libm::atan2(eta.im, eta.re) / (2.0 * core::f64::consts::PI);
            (c, Angle::from_f64(turns))
        })
        .collect();
    Ok(NitModel {
        t,
        eta_phase,
        max_dev,
        n0,
        h0,
        modulus,
        structure_quality,
        t_scale: libm::pow(n as f64 / h as f64, k as f64 + 1.0),
        target_dev: libm::pow(log_n, -options.a - 15.0),
    })
}

/// Coefficients (base `N`) of the degree-`k` Taylor polynomial of
/// `(t/2π) log(n/N)`, so that `e(g(n)) ≈ (n/N)^{it}`.
pub fn taylor_phase_of_nit(t: f64, k: usize, n: u64) -> Result<PolynomialPhase> {
    let scale = t / (2.0 * core::f64::consts::PI);
    let coeffs = (1..=k)
        .map(|j| {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            Angle::from_f64(sign * scale / (j as f64 * libm::pow(n as f64, j as f64)))
        })
        .collect();
    PolynomialPhase::new(n as i128, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_linear_phase() {
        let w = Window::new(1_000_000, 31_622).unwrap();
        let alpha = 1.0 / (10.0 * w.len() as f64);
        let p = PolynomialPhase::new(w.start() as i128, alloc::vec![Angle::from_f64(alpha)]).unwrap();
        let m = nit_approximation(&p, w, 1, NitOptions::for_degree(1).with_b(0.0)).unwrap();
        let expected = 2.0 * core::f64::consts::PI * m.n0 as f64 * alpha;
        assert!((m.t - expected).abs() <= 1e-9 * expected);
        assert!(m.max_dev <= 0.01);
        assert_eq!(m.h0, w.len());
    }

    #[test]
    fn zero_phase() {
        let w = Window::new(1_000_000, 31_622).unwrap();
        let p = PolynomialPhase::zero(w.start() as i128, 3).unwrap();
        let m = nit_approximation(&p, w, 1, NitOptions::for_degree(3).with_b(2.0)).unwrap();
        assert_eq!(m.t, 0.0);
        assert_eq!(m.max_dev, 0.0);
        assert!(m.eta_phase.iter().all(|&(_, e)| e == Angle::ZERO));
    }

    #[test]
    fn round_trip_from_taylor_polynomial() {
        let w = Window::from_theta(1_000_000, 0.75).unwrap();
        for t0 in [-9.0e5, -1234.5, 0.5, 77_777.0, 1.0e6] {
            let p = taylor_phase_of_nit(t0, 3, w.start()).unwrap();
            let m = nit_approximation(&p, w, 1, NitOptions::for_degree(3).with_b(2.0)).unwrap();
            assert!((m.t - t0).abs() <= 0.01 * t0.abs(), "t0 = {t0}, t = {}", m.t);
            assert!(m.max_dev <= 0.01, "t0 = {t0}, dev = {}", m.max_dev);
        }
    }

    #[test]
    fn rational_part_is_absorbed_per_class() {
        let w = Window::from_theta(1_000_000, 0.75).unwrap();
        let base = taylor_phase_of_nit(5_000.0, 2, w.start()).unwrap();
        let coeffs: Vec<Angle> = base
            .coeffs()
            .iter()
            .zip([Angle::parse("1/3").unwrap(), Angle::parse("1/6").unwrap()])
            .map(|(&a, r)| a + r)
            .collect();
        let p = PolynomialPhase::new(base.base(), coeffs).unwrap();
        let m = nit_approximation(&p, w, 3, NitOptions::for_degree(2).with_b(2.0)).unwrap();
        assert_eq!(m.modulus, 6);
        assert!((m.t - 5_000.0).abs() < 50.0);
        assert!(m.max_dev <= 0.01);
    }

    #[test]
    fn refuses_unstructured_phase() {
        let w = Window::from_theta(1_000_000, 0.75).unwrap();
        let p = PolynomialPhase::new(
            w.start() as i128,
            alloc::vec![Angle(0x3a9f_1e3c_9d2b_55aa_1234_9876_abcd_ef01); 3],
        )
        .unwrap();
        assert!(matches!(
            nit_approximation(&p, w, 1, NitOptions::for_degree(3).with_b(2.0)),
            Err(Error::Structure { .. })
        ));
        let p = PolynomialPhase::zero(w.start() as i128, 3).unwrap();
        assert!(nit_approximation(&p, w, 1, NitOptions::for_degree(3)).is_err());
    }
}
