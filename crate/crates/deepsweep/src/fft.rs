//! Radix-2 FFT with a precomputed twiddle plan.
//!
//! The transform is the plain engineering convention:
//!
//! ```text
//! forward:  X[k] = sum_n x[n] · exp(-2πi·kn/N)
//! inverse:  x[n] = (1/N) · sum_k X[k] · exp(+2πi·kn/N)
//! ```
//!
//! A [`Fft`] plan owns the bit-reversal permutation and the twiddle table for
//! one size, so the per-transform cost on the hot path is just butterflies —
//! no allocation, no trig.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reusable transform plan for one power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    /// `twiddles[k] = exp(-2πi·k/n)` for `k < n/2`.
    twiddles: Vec<Complex64>,
    /// Bit-reversal partner of each index (identity for already-sorted pairs).
    reversed: Vec<u32>,
}

impl Fft {
    /// Build a plan for an `n`-point transform. `n` must be a power of two.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "fft size must be a power of two >= 2, got {n}"
            )));
        }
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let reversed = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        Ok(Fft {
            n,
            twiddles,
            reversed,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform. `buf.len()` must equal the plan size.
    pub fn forward(&self, buf: &mut [Complex64]) -> Result<()> {
        self.transform(buf, false)
    }

    /// In-place inverse transform including the `1/N` scale.
    pub fn inverse(&self, buf: &mut [Complex64]) -> Result<()> {
        self.transform(buf, true)?;
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) -> Result<()> {
        if buf.len() != self.n {
            return Err(Error::contract(format!(
                "fft buffer length {} does not match plan size {}",
                buf.len(),
                self.n
            )));
        }
        for i in 0..self.n {
            let j = self.reversed[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let step = self.n / len;
            for start in (0..self.n).step_by(len) {
                for j in 0..half {
                    let mut w = self.twiddles[j * step];
                    if inverse {
                        w = w.conj();
                    }
                    let u = buf[start + j];
                    let v = buf[start + j + half] * w;
                    buf[start + j] = u + v;
                    buf[start + j + half] = u - v;
                }
            }
            len *= 2;
        }
        Ok(())
    }
}

/// Swap the two halves of a spectrum so bins run in ascending frequency,
/// `-fs/2 .. +fs/2`, with DC landing at index `len/2`. Length must be even.
pub fn fft_shift<T>(buf: &mut [T]) {
    assert!(buf.len() % 2 == 0, "fft_shift requires an even length");
    buf.rotate_left(buf.len() / 2);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_power_of_two_sizes() {
        for n in [0usize, 1, 3, 6, 100] {
            assert!(matches!(Fft::new(n), Err(Error::Config(_))), "n = {n}");
        }
    }

    #[test]
    fn rejects_mismatched_buffer() {
        let plan = Fft::new(8).unwrap();
        let mut buf = vec![c(0.0, 0.0); 4];
        assert!(matches!(
            plan.forward(&mut buf),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn impulse_transforms_to_flat_spectrum() {
        let plan = Fft::new(16).unwrap();
        let mut buf = vec![c(0.0, 0.0); 16];
        buf[0] = c(1.0, 0.0);
        plan.forward(&mut buf).unwrap();
        for v in &buf {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_transforms_to_dc_only() {
        let plan = Fft::new(32).unwrap();
        let mut buf = vec![c(0.5, -0.25); 32];
        plan.forward(&mut buf).unwrap();
        assert!((buf[0] - c(16.0, -8.0)).norm() < 1e-12);
        for v in &buf[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn single_tone_lands_in_its_bin() {
        let n = 256;
        let plan = Fft::new(n).unwrap();
        for k in [1usize, 7, 128, 255] {
            let mut buf: Vec<Complex64> = (0..n)
                .map(|t| Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / n as f64))
                .collect();
            plan.forward(&mut buf).unwrap();
            for (bin, v) in buf.iter().enumerate() {
                let expect = if bin == k { n as f64 } else { 0.0 };
                assert!(
                    (v.norm() - expect).abs() < 1e-9,
                    "k = {k}, bin = {bin}, |X| = {}",
                    v.norm()
                );
            }
        }
    }

    #[test]
    fn forward_then_inverse_round_trips() {
        let n = 1024;
        let plan = Fft::new(n).unwrap();
        // Deterministic pseudo-random input, no RNG needed here.
        let original: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = crate::rng::unit_from_seed(i as u64) - 0.5;
                let y = crate::rng::unit_from_seed(1000 + i as u64) - 0.5;
                c(x, y)
            })
            .collect();
        let mut buf = original.clone();
        plan.forward(&mut buf).unwrap();
        plan.inverse(&mut buf).unwrap();
        for (a, b) in buf.iter().zip(&original) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_puts_dc_in_the_middle() {
        let mut bins: Vec<i32> = (0..8).collect(); // bin k holds value k
        fft_shift(&mut bins);
        // Ascending frequency order: -4,-3,-2,-1, 0(DC), 1, 2, 3
        assert_eq!(bins, vec![4, 5, 6, 7, 0, 1, 2, 3]);
        assert_eq!(bins[4], 0, "DC must land at len/2");
    }
}
