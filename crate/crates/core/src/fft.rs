//! Iterative radix-2 FFT over `Complex64`, used for the archimedean
//! convolutions of the circle method.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest transform length accepted (complex entries).
pub const MAX_LEN: usize = 1 << 25;

fn twiddles(n: usize, inverse: bool) -> Vec<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n / 2)
        .map(|j| {
            let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * j as f64 / n as f64);
            Complex64::new(c, sign * s)
        })
        .collect()
}

/// In-place transform `X_j = Σ_m x_m e(∓jm/n)`; the inverse is scaled by `1/n`.
pub fn fft(buf: &mut [Complex64], inverse: bool) -> Result<()> {
    let n = buf.len();
    if n == 0 {
        return Ok(());
    }
    if !n.is_power_of_two() {
        return Err(Error::config(alloc::format!("FFT length {n} is not a power of two")));
    }
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let r = i.reverse_bits() >> (usize::BITS - bits);
            if i < r {
                buf.swap(i, r);
            }
        }
    }
    let tw = twiddles(n, inverse);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for chunk in buf.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (i, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * tw[i * step];
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
    Ok(())
}

/// Smallest power of two `>= n`, or a budget error beyond [`MAX_LEN`].
pub fn transform_len(n: usize) -> Result<usize> {
    let len = n.max(1).next_power_of_two();
    if len > MAX_LEN {
        return Err(Error::budget("FFT length", len as u128, MAX_LEN as u128));
    }
    Ok(len)
}

/// Linear convolution of two real sequences.
pub fn convolve_real(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let out_len = a.len() + b.len() - 1;
    let n = transform_len(out_len)?;
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    for (z, &x) in fa.iter_mut().zip(a) {
        z.re = x;
    }
    for (z, &y) in fa.iter_mut().zip(b) {
        z.im = y;
    }
    fft(&mut fa, false)?;
    // split the packed transform: A_j = (Z_j + conj Z_{-j})/2, B_j = (Z_j - conj Z_{-j})/(2i)
    let mut prod = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let zj = fa[j];
        let zc = fa[(n - j) % n].conj();
        let aj = (zj + zc) * 0.5;
        let bj = (zj - zc) * Complex64::new(0.0, -0.5);
        prod[j] = aj * bj;
    }
    fft(&mut prod, true)?;
    Ok(prod[..out_len].iter().map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(m, &v)| {
                        let t = -2.0 * core::f64::consts::PI * ((j * m) % n) as f64 / n as f64;
                        v * Complex64::new(t.cos(), t.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn rejects_bad_lengths() {
        let mut v = vec![Complex64::new(1.0, 0.0); 3];
        assert!(fft(&mut v, false).is_err());
        let mut e: Vec<Complex64> = Vec::new();
        assert!(fft(&mut e, false).is_ok());
        assert!(transform_len(MAX_LEN + 1).is_err());
    }

    proptest! {
        #[test]
        fn matches_naive_dft(bits in 0u32..8, seed in any::<u64>()) {
            let n = 1usize << bits;
            let x: Vec<Complex64> = (0..n as u64)
                .map(|i| Complex64::new(
                    crate::arith::unit_hash(seed, 2 * i) - 0.5,
                    crate::arith::unit_hash(seed, 2 * i + 1) - 0.5,
                ))
                .collect();
            let mut y = x.clone();
            fft(&mut y, false).unwrap();
            for (a, b) in y.iter().zip(naive_dft(&x)) {
                prop_assert!((a - b).norm() < 1e-10);
            }
            fft(&mut y, true).unwrap();
            for (a, b) in y.iter().zip(&x) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn convolution_matches_naive(
            a in proptest::collection::vec(-10.0f64..10.0, 1..60),
            b in proptest::collection::vec(-10.0f64..10.0, 1..60),
        ) {
            let c = convolve_real(&a, &b).unwrap();
            prop_assert_eq!(c.len(), a.len() + b.len() - 1);
            for (k, &ck) in c.iter().enumerate() {
                let direct: f64 = (0..a.len())
                    .filter(|&i| k >= i && k - i < b.len())
                    .map(|i| a[i] * b[k - i])
                    .sum();
                prop_assert!((ck - direct).abs() < 1e-9);
            }
        }
    }
}
