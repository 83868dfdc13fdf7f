//! Quadrature rules: Gauss–Legendre on intervals, point sets on the unit
//! sphere, and the radial × angular product rules used for 3-D momentum and
//! position integrals.

use crate::scalar::Real;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for n up to several hundred.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of(n as f64);
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x = T::of(theta.cos());
        let mut dp = T::one();
        for _ in 0..100 {
            // p_n(x) and its derivative by recurrence.
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::of(k as f64);
                let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // n == 1 leaves p1 = x, p0 = 1.
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { T::one() } else { p0 };
            dp = nf * (x * p - pm) / (x * x - T::one());
            let dx = p / dp;
            x = x - dx;
            if dx.abs() < T::of(1e-15) {
                break;
            }
        }
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = T::of(0.5);
    let mid = half * (a + b);
    let rad = half * (b - a);
    (
        x.iter().map(|&t| mid + rad * t).collect(),
        w.iter().map(|&t| rad * t).collect(),
    )
}

/// Integrate `f` over `[a, b]` with an n-point Gauss–Legendre rule.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let (x, w) = gauss_legendre_on(n, a, b);
    let mut s = T::zero();
    for i in 0..n {
        s = s + w[i] * f(x[i]);
    }
    s
}

/// Integrate over `[a, b]` with nodes geometric in `log`, for integrands
/// spanning several decades (`a > 0`).
pub fn integrate_log<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    assert!(a > T::zero() && b > a);
    let (u, w) = gauss_legendre_on(n, a.ln(), b.ln());
    let mut s = T::zero();
    for i in 0..n {
        let r = u[i].exp();
        s = s + w[i] * r * f(r);
    }
    s
}

/// A quadrature rule on the unit sphere: unit directions and weights that
/// sum to one (so `∫_{S²} f dΩ ≈ 4π Σ w_a f(u_a)`).
#[derive(Clone, Debug)]
pub struct SphereRule<T> {
    pub dirs: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> SphereRule<T> {
    /// 6-point octahedral rule, exact to degree 3.
    pub fn octahedral6() -> Self {
        let o = T::one();
        let z = T::zero();
        let dirs = vec![
            [o, z, z],
            [-o, z, z],
            [z, o, z],
            [z, -o, z],
            [z, z, o],
            [z, z, -o],
        ];
        let w = T::of(1.0 / 6.0);
        SphereRule {
            weights: vec![w; 6],
            dirs,
        }
    }

    /// 14-point rule (octahedron vertices + cube vertices), exact to degree 5.
    pub fn points14() -> Self {
        let mut dirs = Self::octahedral6().dirs;
        let c = T::of(1.0 / 3.0f64.sqrt());
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    dirs.push([c * T::of(sx), c * T::of(sy), c * T::of(sz)]);
                }
            }
        }
        let mut weights = vec![T::of(1.0 / 15.0); 6];
        weights.extend(vec![T::of(3.0 / 40.0); 8]);
        SphereRule { dirs, weights }
    }

    /// 26-point rule (vertices + edge midpoints + face diagonals of the
    /// cube), exact to degree 7. Weights 1/21, 4/105, 27/840.
    pub fn points26() -> Self {
        let o = T::one();
        let z = T::zero();
        let s2 = T::of(1.0 / 2.0f64.sqrt());
        let s3 = T::of(1.0 / 3.0f64.sqrt());
        let mut dirs = Vec::with_capacity(26);
        let mut weights = Vec::with_capacity(26);
        for d in [
            [o, z, z],
            [-o, z, z],
            [z, o, z],
            [z, -o, z],
            [z, z, o],
            [z, z, -o],
        ] {
            dirs.push(d);
            weights.push(T::of(1.0 / 21.0));
        }
        for i in 0..3usize {
            let j = (i + 1) % 3;
            for si in [-1.0, 1.0] {
                for sj in [-1.0, 1.0] {
                    let mut d = [z, z, z];
                    d[i] = s2 * T::of(si);
                    d[j] = s2 * T::of(sj);
                    dirs.push(d);
                    weights.push(T::of(4.0 / 105.0));
                }
            }
        }
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    dirs.push([s3 * T::of(sx), s3 * T::of(sy), s3 * T::of(sz)]);
                    weights.push(T::of(27.0 / 840.0));
                }
            }
        }
        SphereRule { dirs, weights }
    }

    /// Product Gauss rule: `n_theta` Gauss–Legendre nodes in cos θ times
    /// `n_phi` equispaced azimuths. Exact for spherical harmonics of degree
    /// < min(2 n_theta, n_phi); use for strongly oscillatory integrands.
    pub fn product(n_theta: usize, n_phi: usize) -> Self {
        let (ct, wt) = gauss_legendre::<T>(n_theta);
        let mut dirs = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let wphi = T::one() / T::of(n_phi as f64);
        for i in 0..n_theta {
            let c = ct[i];
            let s = (T::one() - c * c).sqrt();
            for j in 0..n_phi {
                let phi = T::of(2.0) * T::PI() * T::of(j as f64) / T::of(n_phi as f64);
                dirs.push([s * phi.cos(), s * phi.sin(), c]);
                // wt sums to 2 over [-1,1]; normalize total to 1.
                weights.push(wt[i] * T::of(0.5) * wphi);
            }
        }
        SphereRule { dirs, weights }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Pick a rule by requested node budget.
    pub fn by_nodes(n: usize) -> Self {
        if n <= 6 {
            Self::octahedral6()
        } else if n <= 14 {
            Self::points14()
        } else if n <= 26 {
            Self::points26()
        } else {
            let nt = ((n as f64) / 2.0).sqrt().ceil() as usize;
            Self::product(nt.max(4), (2 * nt).max(8))
        }
    }
}

/// `∫_{R³} f(y) d³y` by radial Gauss–Legendre × sphere rule, radius in `[r0, r1]`.
pub fn integrate_ball<T: Real, F: Fn(&[T; 3]) -> T>(
    f: F,
    center: &[T; 3],
    r0: T,
    r1: T,
    n_radial: usize,
    sphere: &SphereRule<T>,
) -> T {
    let (rs, ws) = gauss_legendre_on(n_radial, r0, r1);
    let four_pi = T::of(4.0) * T::PI();
    let mut total = T::zero();
    for i in 0..rs.len() {
        let r = rs[i];
        let mut ang = T::zero();
        for (d, w) in sphere.dirs.iter().zip(&sphere.weights) {
            let y = [
                center[0] + r * d[0],
                center[1] + r * d[1],
                center[2] + r * d[2],
            ];
            ang = ang + *w * f(&y);
        }
        total = total + ws[i] * r * r * ang * four_pi;
    }
    total
}

/// Composite trapezoid weight vector for `n+1` uniform samples of spacing `dt`.
pub fn trapezoid_weights(n_intervals: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; n_intervals + 1];
    w[0] = 0.5 * dt;
    w[n_intervals] = 0.5 * dt;
    if n_intervals == 0 {
        w[0] = 0.0;
    }
    w
}
