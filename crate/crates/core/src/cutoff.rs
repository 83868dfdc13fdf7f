//! Radial momentum cutoff profiles.
//!
//! The smeared field uses χ(k) = profile(|k|) / (2π)^{3/2}. Three shapes are
//! provided: a sharp ultraviolet ball, a Gaussian, and a sharp shell with an
//! infrared hole of radius σ. The shell is the only infrared-regular choice:
//! ∫ χ²/ω³ dk converges iff the profile vanishes near k = 0, and for the
//! sharp shell the integral is ln(Λ/σ)/(2π²) exactly.
//!
//! The Gaussian is the one shape with a pointwise nonnegative inverse
//! Fourier transform, which the absence-of-ground-state machinery requires;
//! sharp shapes get flagged when used there.

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape<T> {
    /// profile(r) = 1 for r < Λ.
    Sharp { lambda: T },
    /// profile(r) = exp(-r²/(2Λ²)).
    Gaussian { lambda: T },
    /// profile(r) = 1 for σ ≤ r < Λ, 0 below σ.
    IrRegularized { sigma: T, lambda: T },
}

/// Outcome of the infrared integral ∫ χ²/ω³ dk.
#[derive(Clone, Copy, Debug)]
pub enum IrIntegral<T> {
    Finite(T),
    /// χ(0) > 0: the integral diverges logarithmically; `log_rate` is the
    /// coefficient of ln(1/σ) an IR hole of radius σ would produce.
    Divergent { log_rate: T },
}

#[derive(Clone, Copy, Debug)]
pub struct CutoffProfile<T> {
    pub shape: Shape<T>,
}

impl<T: Real> CutoffProfile<T> {
    pub fn sharp(lambda: T) -> Result<Self> {
        if lambda <= T::zero() {
            return Err(Error::InvalidArgument("cutoff lambda must be > 0".into()));
        }
        Ok(Self {
            shape: Shape::Sharp { lambda },
        })
    }

    pub fn gaussian(lambda: T) -> Result<Self> {
        if lambda <= T::zero() {
            return Err(Error::InvalidArgument("cutoff lambda must be > 0".into()));
        }
        Ok(Self {
            shape: Shape::Gaussian { lambda },
        })
    }

    pub fn ir_regularized(sigma: T, lambda: T) -> Result<Self> {
        if !(sigma > T::zero() && lambda > sigma) {
            return Err(Error::InvalidArgument(
                "ir-regularized cutoff needs 0 < sigma < lambda".into(),
            ));
        }
        Ok(Self {
            shape: Shape::IrRegularized { sigma, lambda },
        })
    }

    /// Radial profile before the (2π)^{-3/2} normalization.
    pub fn profile(&self, r: T) -> T {
        match self.shape {
            Shape::Sharp { lambda } => {
                if r < lambda {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Shape::Gaussian { lambda } => (-r * r / (T::of(2.0) * lambda * lambda)).exp(),
            Shape::IrRegularized { sigma, lambda } => {
                if r >= sigma && r < lambda {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// χ(k) = profile(|k|)/(2π)^{3/2}.
    pub fn chi(&self, r: T) -> T {
        self.profile(r) * self.two_pi_pow_neg_3_2()
    }

    fn two_pi_pow_neg_3_2(&self) -> T {
        (T::of(2.0) * T::PI()).powf(T::of(-1.5))
    }

    /// UV scale Λ.
    pub fn lambda(&self) -> T {
        match self.shape {
            Shape::Sharp { lambda }
            | Shape::Gaussian { lambda }
            | Shape::IrRegularized { lambda, .. } => lambda,
        }
    }

    /// IR hole radius (zero when absent).
    pub fn sigma(&self) -> T {
        match self.shape {
            Shape::IrRegularized { sigma, .. } => sigma,
            _ => T::zero(),
        }
    }

    /// Radius beyond which the profile is negligible (integration support).
    pub fn support_radius(&self) -> T {
        match self.shape {
            Shape::Sharp { lambda } | Shape::IrRegularized { lambda, .. } => lambda,
            Shape::Gaussian { lambda } => T::of(7.0) * lambda,
        }
    }

    pub fn is_ir_regular(&self) -> bool {
        matches!(self.shape, Shape::IrRegularized { .. })
    }

    /// Whether the inverse transform χ̌ is pointwise nonnegative.
    pub fn chi_check_nonneg(&self) -> bool {
        matches!(self.shape, Shape::Gaussian { .. })
    }

    /// χ̌(x) as a function of ρ = |x|: (2π)^{-3} ∫ profile e^{ik·x} dk.
    ///
    /// Normalized so that ∫ χ̌ d³x = profile(0).
    pub fn chi_check(&self, rho: T) -> T {
        let two_pi2 = T::of(2.0) * T::PI() * T::PI();
        match self.shape {
            Shape::Sharp { lambda } => sharp_ball_check(lambda, rho, two_pi2),
            Shape::IrRegularized { sigma, lambda } => {
                sharp_ball_check(lambda, rho, two_pi2) - sharp_ball_check(sigma, rho, two_pi2)
            }
            Shape::Gaussian { lambda } => {
                // (Λ³/(2π)^{3/2}) e^{-Λ²ρ²/2}
                let c = lambda * lambda * lambda * self.two_pi_pow_neg_3_2();
                c * (-lambda * lambda * rho * rho / T::of(2.0)).exp()
            }
        }
    }

    /// ∫ χ²/ω³ dk, the infrared regularity integral.
    pub fn ir_integral(&self) -> IrIntegral<T> {
        let two_pi2 = T::of(2.0) * T::PI() * T::PI();
        match self.shape {
            Shape::IrRegularized { sigma, lambda } => IrIntegral::Finite((lambda / sigma).ln() / two_pi2),
            Shape::Sharp { .. } | Shape::Gaussian { .. } => IrIntegral::Divergent {
                log_rate: self.profile(T::zero()).powi(2) / two_pi2,
            },
        }
    }

    /// ‖χ/ω‖² = ∫ χ²/ω² dk.
    pub fn norm_chi_over_omega_sq(&self) -> T {
        let two_pi2 = T::of(2.0) * T::PI() * T::PI();
        match self.shape {
            Shape::Sharp { lambda } => lambda / two_pi2,
            Shape::IrRegularized { sigma, lambda } => (lambda - sigma) / two_pi2,
            Shape::Gaussian { lambda } => {
                // ∫ e^{-r²/Λ²} dr = Λ√π/2
                lambda * T::PI().sqrt() / T::of(2.0) / two_pi2
            }
        }
    }

    /// ‖χ/√ω‖² = ∫ χ²/ω dk.
    pub fn norm_chi_over_sqrt_omega_sq(&self) -> T {
        let two_pi2 = T::of(2.0) * T::PI() * T::PI();
        match self.shape {
            Shape::Sharp { lambda } => lambda * lambda / (T::of(2.0) * two_pi2),
            Shape::IrRegularized { sigma, lambda } => {
                (lambda * lambda - sigma * sigma) / (T::of(2.0) * two_pi2)
            }
            Shape::Gaussian { lambda } => lambda * lambda / (T::of(2.0) * two_pi2),
        }
    }

    /// Quadrature of ∫ χ²/ω³ dk for cross-checks (finite case only).
    pub fn ir_integral_quadrature(&self, n: usize) -> Result<T> {
        match self.shape {
            Shape::IrRegularized { sigma, lambda } => {
                let two = T::of(2.0);
                let v = quad::integrate_log(
                    |r| self.profile(r).powi(2) / r,
                    sigma,
                    lambda * (T::one() + T::of(1e-12)),
                    n,
                );
                Ok(v / (two * T::PI() * T::PI()))
            }
            _ => Err(Error::InvalidArgument(
                "quadrature form only defined for the ir-regularized shell".into(),
            )),
        }
    }
}

/// χ̌ of the sharp ball of radius Λ: (sin Λρ − Λρ cos Λρ)/(2π² ρ³).
fn sharp_ball_check<T: Real>(lambda: T, rho: T, two_pi2: T) -> T {
    let z = lambda * rho;
    if z.abs() < T::of(1e-3) {
        // series: Λ³/(6π²)·(1 - z²/10·3 + ...) via (sin z - z cos z) ≈ z³/3 - z⁵/30
        let l3 = lambda * lambda * lambda;
        l3 / (T::of(3.0) * two_pi2) * (T::one() - z * z / T::of(10.0))
    } else {
        (z.sin() - z * z.cos()) / (two_pi2 * rho * rho * rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, SphereRule};

    #[test]
    fn ir_integral_sharp_shell_closed_form() {
        // Λ=1, σ=e^{-1}: value 1/(2π²)
        let c = CutoffProfile::ir_regularized((-1.0f64).exp(), 1.0).unwrap();
        match c.ir_integral() {
            IrIntegral::Finite(v) => {
                let expect = 1.0 / (2.0 * std::f64::consts::PI.powi(2));
                assert!((v - expect).abs() < 1e-12);
                assert!((v - 0.050660).abs() < 1e-6);
                let q = c.ir_integral_quadrature(64).unwrap();
                assert!((q - expect).abs() < 1e-8);
            }
            _ => panic!("shell must be ir-regular"),
        }
    }

    #[test]
    fn gaussian_and_sharp_are_ir_singular() {
        let g = CutoffProfile::gaussian(1.0f64).unwrap();
        assert!(matches!(g.ir_integral(), IrIntegral::Divergent { .. }));
        assert!(g.chi_check_nonneg());
        let s = CutoffProfile::sharp(1.0f64).unwrap();
        assert!(matches!(s.ir_integral(), IrIntegral::Divergent { .. }));
        assert!(!s.chi_check_nonneg());
    }

    #[test]
    fn ir_integral_monotone_as_sigma_decreases() {
        let mut last = 0.0;
        for sigma in [1e-1, 1e-2, 1e-3, 1e-4] {
            let c = CutoffProfile::ir_regularized(sigma, 1.0f64).unwrap();
            if let IrIntegral::Finite(v) = c.ir_integral() {
                assert!(v > last);
                last = v;
            } else {
                panic!();
            }
        }
    }

    /// χ̌ against a direct 3-D inverse transform by radial×angular quadrature.
    #[test]
    fn chi_check_matches_direct_inverse_transform() {
        let sphere = SphereRule::<f64>::points26();
        for c in [
            CutoffProfile::sharp(1.3f64).unwrap(),
            CutoffProfile::gaussian(0.9f64).unwrap(),
            CutoffProfile::ir_regularized(0.2, 1.1f64).unwrap(),
        ] {
            for rho in [0.0, 0.5, 1.7] {
                let x = [rho, 0.0, 0.0];
                // (2π)^{-3} ∫ profile(|k|) e^{ik·x} dk, radial × angular
                let mut direct = 0.0;
                let (rs, ws) =
                    crate::quad::gauss_legendre_on(200usize, 0.0, c.support_radius());
                for (&r, w) in rs.iter().zip(&ws) {
                    let mut ang = 0.0;
                    for (d, aw) in sphere.dirs.iter().zip(&sphere.weights) {
                        ang += aw * (r * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2])).cos();
                    }
                    direct += w * r * r * c.profile(r) * ang * 4.0 * std::f64::consts::PI;
                }
                direct /= (2.0 * std::f64::consts::PI).powi(3);
                assert!(
                    (direct - c.chi_check(rho)).abs() < 2e-4,
                    "shape {:?} rho {rho}: {direct} vs {}",
                    c.shape,
                    c.chi_check(rho)
                );
            }
        }
    }

    #[test]
    fn chi_check_total_mass_is_profile_at_zero() {
        // ∫ χ̌ d³x = (2π)^{3/2} χ(0) = profile(0); the Gaussian converges
        // absolutely (the sharp shapes only conditionally).
        let c = CutoffProfile::gaussian(1.0f64).unwrap();
        let mass = integrate(
            |r: f64| 4.0 * std::f64::consts::PI * r * r * c.chi_check(r),
            0.0,
            30.0,
            600,
        );
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
    }

    #[test]
    fn norm_chi_over_omega_matches_quadrature() {
        // Gaussian by smooth quadrature; the shell piecewise-exactly.
        let g = CutoffProfile::gaussian(1.4f64).unwrap();
        let direct =
            integrate(|r: f64| g.profile(r).powi(2), 0.0, g.support_radius(), 2000)
                / (2.0 * std::f64::consts::PI.powi(2));
        assert!((direct - g.norm_chi_over_omega_sq()).abs() < 1e-10);
        let c = CutoffProfile::ir_regularized(0.1, 2.0f64).unwrap();
        let direct = integrate(|r: f64| c.profile(r).powi(2), 0.1, 2.0 - 1e-12, 400)
            / (2.0 * std::f64::consts::PI.powi(2));
        assert!((direct - c.norm_chi_over_omega_sq()).abs() < 1e-8);
    }
}
