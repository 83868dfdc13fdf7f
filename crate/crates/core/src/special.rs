//! Special functions: modified Bessel functions of the third kind K_ν for
//! integer and half-integer order, and a stable sinc.
//!
//! K₀ and K₁ follow the Abramowitz–Stegun rational approximations (9.8.5–
//! 9.8.8), giving ≤ 2e-7 absolute accuracy; higher integer orders come from
//! the forward recurrence K_{ν+1} = K_{ν-1} + (2ν/z) K_ν, which is stable
//! because K grows with ν. Half-integer orders use the exact closed forms.

use crate::scalar::Real;

fn poly<T: Real>(t: T, coeffs: &[f64]) -> T {
    let mut acc = T::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * t + T::of(c);
    }
    acc
}

/// Modified Bessel function I₀ (A&S 9.8.1/9.8.2).
pub fn bessel_i0<T: Real>(z: T) -> T {
    let az = z.abs();
    if az <= T::of(3.75) {
        let t = (z / T::of(3.75)) * (z / T::of(3.75));
        poly(
            t,
            &[
                1.0, 3.5156229, 3.0899424, 1.2067492, 0.2659732, 0.0360768, 0.0045813,
            ],
        )
    } else {
        let t = T::of(3.75) / az;
        let p = poly(
            t,
            &[
                0.39894228,
                0.01328592,
                0.00225319,
                -0.00157565,
                0.00916281,
                -0.02057706,
                0.02635537,
                -0.01647633,
                0.00392377,
            ],
        );
        az.exp() / az.sqrt() * p
    }
}

/// Modified Bessel function I₁ (A&S 9.8.3/9.8.4).
pub fn bessel_i1<T: Real>(z: T) -> T {
    let az = z.abs();
    let v = if az <= T::of(3.75) {
        let t = (z / T::of(3.75)) * (z / T::of(3.75));
        az * poly(
            t,
            &[
                0.5, 0.87890594, 0.51498869, 0.15084934, 0.02658733, 0.00301532, 0.00032411,
            ],
        )
    } else {
        let t = T::of(3.75) / az;
        let p = poly(
            t,
            &[
                0.39894228,
                -0.03988024,
                -0.00362018,
                0.00163801,
                -0.01031555,
                0.02282967,
                -0.02895312,
                0.01787654,
                -0.00420059,
            ],
        );
        az.exp() / az.sqrt() * p
    };
    if z < T::zero() {
        -v
    } else {
        v
    }
}

/// K₀(z) for z > 0 (A&S 9.8.5/9.8.6).
pub fn bessel_k0<T: Real>(z: T) -> T {
    assert!(z > T::zero(), "bessel_k0 requires z > 0");
    if z <= T::of(2.0) {
        let t = z * z / T::of(4.0);
        let series = poly(
            t,
            &[
                -0.57721566,
                0.42278420,
                0.23069756,
                0.03488590,
                0.00262698,
                0.00010750,
                0.00000740,
            ],
        );
        -(z / T::of(2.0)).ln() * bessel_i0(z) + series
    } else {
        let t = T::of(2.0) / z;
        let p = poly(
            t,
            &[
                1.25331414,
                -0.07832358,
                0.02189568,
                -0.01062446,
                0.00587872,
                -0.00251540,
                0.00053208,
            ],
        );
        (-z).exp() / z.sqrt() * p
    }
}

/// K₁(z) for z > 0 (A&S 9.8.7/9.8.8).
pub fn bessel_k1<T: Real>(z: T) -> T {
    assert!(z > T::zero(), "bessel_k1 requires z > 0");
    if z <= T::of(2.0) {
        let t = z * z / T::of(4.0);
        let series = poly(
            t,
            &[
                1.0,
                0.15443144,
                -0.67278579,
                -0.18156897,
                -0.01919402,
                -0.00110404,
                -0.00004686,
            ],
        );
        (z / T::of(2.0)).ln() * bessel_i1(z) + series / z
    } else {
        let t = T::of(2.0) / z;
        let p = poly(
            t,
            &[
                1.25331414,
                0.23498619,
                -0.03655620,
                0.01504268,
                -0.00780353,
                0.00325614,
                -0.00068245,
            ],
        );
        (-z).exp() / z.sqrt() * p
    }
}

/// K_ν(z) for 2ν = `two_nu` (integer or half-integer order), z > 0.
///
/// Half-integer orders use the closed form
/// K_{1/2}(z) = sqrt(π/2z) e^{-z}, lifted by the recurrence; integer orders
/// recurse from K₀, K₁.
pub fn bessel_k_halfint<T: Real>(two_nu: u32, z: T) -> T {
    assert!(z > T::zero(), "bessel_k requires z > 0");
    if two_nu % 2 == 0 {
        let n = two_nu / 2;
        match n {
            0 => bessel_k0(z),
            1 => bessel_k1(z),
            _ => {
                let mut km = bessel_k0(z);
                let mut k = bessel_k1(z);
                for j in 1..n {
                    let next = km + T::of(2.0 * j as f64) / z * k;
                    km = k;
                    k = next;
                }
                k
            }
        }
    } else {
        // K_{1/2} and K_{3/2}, then recurrence.
        let base = (T::PI() / (T::of(2.0) * z)).sqrt() * (-z).exp();
        let mut km = base; // nu = 1/2
        if two_nu == 1 {
            return km;
        }
        let mut k = base * (T::one() + T::one() / z); // nu = 3/2
        let mut cur = 3u32;
        while cur < two_nu {
            let nu = T::of(cur as f64 / 2.0);
            let next = km + T::of(2.0) * nu / z * k;
            km = k;
            k = next;
            cur += 2;
        }
        k
    }
}

/// sin(x)/x, with the series continuation near 0.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::of(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::of(6.0) + x2 * x2 / T::of(120.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from the standard tables.
    #[test]
    fn k0_k1_reference_values() {
        assert!((bessel_k0(1.0f64) - 0.421_024_438_2).abs() < 3e-7);
        assert!((bessel_k1(1.0f64) - 0.601_907_230_2).abs() < 3e-7);
        assert!((bessel_k0(2.0f64) - 0.113_893_872_7).abs() < 3e-7);
        assert!((bessel_k1(2.0f64) - 0.139_865_881_8).abs() < 3e-7);
        assert!((bessel_k0(0.1f64) - 2.427_069_0).abs() < 3e-6);
    }

    #[test]
    fn k2_by_recurrence() {
        let z = 1.0f64;
        let k2 = bessel_k_halfint(4, z);
        let expect = bessel_k0(z) + 2.0 * bessel_k1(z);
        assert!((k2 - expect).abs() < 1e-12);
        // K2(1) table value
        assert!((k2 - 1.624_838_9).abs() < 1e-6);
    }

    #[test]
    fn half_orders_match_closed_forms() {
        let z = 0.7f64;
        let k12 = bessel_k_halfint(1, z);
        let exact = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
        assert!((k12 - exact).abs() < 1e-14);
        let k52 = bessel_k_halfint(5, z);
        let exact52 = exact * (1.0 + 3.0 / z + 3.0 / (z * z));
        assert!((k52 - exact52).abs() < 1e-12);
    }

    #[test]
    fn small_z_asymptotics_of_k2() {
        // K_2(z) ~ 2/z² as z → 0
        let z = 1e-3f64;
        let k2 = bessel_k_halfint(4, z);
        assert!((k2 * z * z / 2.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sinc_is_continuous_at_zero() {
        assert!((sinc(0.0f64) - 1.0).abs() < 1e-15);
        assert!((sinc(1e-5f64) - (1.0 - 1e-10 / 6.0)).abs() < 1e-15);
        assert!((sinc(2.0f64) - (2.0f64).sin() / 2.0).abs() < 1e-15);
    }
}
