//! Minimal complex FFT (radix-2, iterative) and a 3-D transform, used as an
//! independent oracle for the generalized Fourier transform and the
//! convolution form of the plane-wave kernel.

use num_complex::Complex64;

/// In-place radix-2 FFT. `sign = -1` forward, `+1` inverse (unnormalized).
pub fn fft_inplace(a: &mut [Complex64], sign: f64) {
    let n = a.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    // bit reversal
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = a[i + k];
                let v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// In-place 3-D FFT on a cube of side `n` stored row-major (x fastest).
pub fn fft3_inplace(a: &mut [Complex64], n: usize, sign: f64) {
    assert_eq!(a.len(), n * n * n);
    let mut line = vec![Complex64::default(); n];
    // x lines
    for z in 0..n {
        for y in 0..n {
            let base = (z * n + y) * n;
            line.copy_from_slice(&a[base..base + n]);
            fft_inplace(&mut line, sign);
            a[base..base + n].copy_from_slice(&line);
        }
    }
    // y lines
    for z in 0..n {
        for x in 0..n {
            for y in 0..n {
                line[y] = a[(z * n + y) * n + x];
            }
            fft_inplace(&mut line, sign);
            for y in 0..n {
                a[(z * n + y) * n + x] = line[y];
            }
        }
    }
    // z lines
    for y in 0..n {
        for x in 0..n {
            for z in 0..n {
                line[z] = a[(z * n + y) * n + x];
            }
            fft_inplace(&mut line, sign);
            for z in 0..n {
                a[(z * n + y) * n + x] = line[z];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_recovers_signal() {
        let n = 16;
        let mut a: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let orig = a.clone();
        fft_inplace(&mut a, -1.0);
        fft_inplace(&mut a, 1.0);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x / n as f64 - y).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let mut a = vec![Complex64::default(); 8];
        a[0] = Complex64::new(1.0, 0.0);
        fft_inplace(&mut a, -1.0);
        for x in &a {
            assert!((x - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn fft3_parseval() {
        let n = 8;
        let mut a: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new(((i * 37) % 11) as f64 - 5.0, 0.0))
            .collect();
        let e0: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        fft3_inplace(&mut a, n, -1.0);
        let e1: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((e1 / (n * n * n) as f64 - e0).abs() < 1e-9 * e0.max(1.0));
    }
}
