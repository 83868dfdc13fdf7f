//! The particle sector: grid Schrödinger ground states, the ground-state
//! transform, and the stationary diffusion it generates.
//!
//! `H = ½p² + V` is discretized with the 7-point Laplacian; the positive
//! ground state φ and energy E₀ come from Lanczos plus shifted inverse
//! power refinement. Conjugating by φ turns `H − E₀` into the generator of
//! the diffusion `dX = ∇log φ(X) dt + dB` with stationary law φ² dx, which
//! is sampled by Euler–Maruyama as two independent half-paths stitched at a
//! common stationary start.

use crate::error::{Error, Result};
use crate::grid::{Grid1, Grid3};
use crate::linalg::{self, SymOp};
use crate::quad::trapezoid_weights;
use crate::rng::{self, stream};
use crate::stats;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::sync::Arc;

/// Confining external potentials. `alpha` is the growth exponent:
/// V(x) ≳ |x|^{2α} outside a compact set.
#[derive(Clone)]
pub enum Potential {
    /// V(x) = coeff · |x|² (α = 1).
    Harmonic { coeff: f64 },
    /// V(x) = c · |x|^{2α}.
    PolyConfining { c: f64, alpha: f64 },
    /// User potential with declared growth (c, α).
    Custom {
        f: Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>,
        c: f64,
        alpha: f64,
    },
}

impl Potential {
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        match self {
            Potential::Harmonic { coeff } => coeff * r2,
            Potential::PolyConfining { c, alpha } => c * r2.powf(*alpha),
            Potential::Custom { f, .. } => f(x),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Potential::Harmonic { .. } => 1.0,
            Potential::PolyConfining { alpha, .. } => *alpha,
            Potential::Custom { alpha, .. } => *alpha,
        }
    }

    pub fn growth_c(&self) -> f64 {
        match self {
            Potential::Harmonic { coeff } => *coeff,
            Potential::PolyConfining { c, .. } => *c,
            Potential::Custom { c, .. } => *c,
        }
    }

    /// Whether V is a sum of identical per-axis terms, making φ² a product
    /// law that can be sampled by per-axis inverse CDF.
    pub fn separable(&self) -> bool {
        matches!(self, Potential::Harmonic { .. })
    }
}

/// Grid Hamiltonian ½p² + V with Dirichlet boundaries.
struct GridHamiltonian<'a> {
    grid: Grid3,
    v: &'a [f64],
}

impl SymOp for GridHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.grid.n;
        let h2 = self.grid.h() * self.grid.h();
        let diag = 3.0 / h2;
        let v = self.v;
        y.par_chunks_mut(n * n).enumerate().for_each(|(k, plane)| {
            for j in 0..n {
                for i in 0..n {
                    let p = (k * n + j) * n + i;
                    let mut nb = 0.0;
                    if i > 0 {
                        nb += x[p - 1];
                    }
                    if i + 1 < n {
                        nb += x[p + 1];
                    }
                    if j > 0 {
                        nb += x[p - n];
                    }
                    if j + 1 < n {
                        nb += x[p + n];
                    }
                    if k > 0 {
                        nb += x[p - n * n];
                    }
                    if k + 1 < n {
                        nb += x[p + n * n];
                    }
                    plane[j * n + i] = diag * x[p] - 0.5 * nb / h2 + v[p] * x[p];
                }
            }
        });
    }
}

/// Exponential-decay envelope `φ(x) ≤ C e^{-δ |x|^{α+1}}` fitted on the
/// outer shell of the grid.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    pub c: f64,
    pub delta: f64,
    pub alpha_fit: f64,
}

/// Ground-state data of the particle Hamiltonian on a grid.
pub struct ParticleModel {
    pub grid: Grid3,
    pub potential: Potential,
    /// Ground state, positive, normalized so Σ φ² h³ = 1.
    pub phi: Vec<f64>,
    pub e0: f64,
    /// ∇log φ at the nodes (centered differences, one-sided on the ring).
    pub drift: Vec<[f64; 3]>,
    pub decay: DecayFit,
    /// Lowest eigenpairs (E_m, ψ_m) when requested via `solve_modes`.
    pub modes: Vec<(f64, Vec<f64>)>,
    /// Per-axis inverse-CDF table for the stationary law (separable V only).
    axis_cdf: Option<(Vec<f64>, Vec<f64>)>,
}

fn weighted_normalize(grid: &Grid3, v: &mut [f64]) {
    let h3 = grid.h().powi(3);
    let nrm = (v.iter().map(|x| x * x).sum::<f64>() * h3).sqrt();
    for x in v.iter_mut() {
        *x /= nrm;
    }
}

/// Solve for the lowest eigenpair and build the transformed model.
pub fn solve_ground_state(potential: Potential, grid: Grid3) -> Result<ParticleModel> {
    solve_modes(potential, grid, 1)
}

/// Same, keeping the lowest `n_modes` eigenpairs.
pub fn solve_modes(potential: Potential, grid: Grid3, n_modes: usize) -> Result<ParticleModel> {
    // the well must be resolved: the harmonic length needs several cells
    if let Potential::Harmonic { coeff } = potential {
        let length = 1.0 / (2.0 * coeff).sqrt().sqrt();
        if grid.h() > length / 1.5 {
            return Err(Error::InvalidArgument(
                "grid too coarse for the potential well".into(),
            ));
        }
    }
    let v = grid.sample(|x| potential.eval(x));
    let op = GridHamiltonian { grid, v: &v };
    let iters = 60 + 26 * n_modes.max(2);
    let (vals, vecs) = linalg::lanczos_lowest(&op, n_modes.max(1), iters, 1e-9, 0x5eed)?;
    let gap = if vals.len() > 1 {
        (vals[1] - vals[0]).max(1e-3)
    } else {
        0.5
    };
    let (e0, mut phi) =
        linalg::refine_eigenpair(&op, vecs[0].clone(), vals[0], 0.25 * gap, 1e-8)?;

    // sign fixed positive; interior zeros violate the assumptions
    if phi.iter().sum::<f64>() < 0.0 {
        for x in phi.iter_mut() {
            *x = -*x;
        }
    }
    let interior_min = (0..grid.len())
        .filter(|&p| {
            let x = grid.position(p);
            x.iter().all(|c| c.abs() < grid.extent - grid.h() / 2.0)
        })
        .map(|p| phi[p])
        .fold(f64::INFINITY, f64::min);
    if interior_min <= 0.0 {
        return Err(Error::PositivityViolated(
            "ground state has an interior zero".into(),
        ));
    }
    weighted_normalize(&grid, &mut phi);

    // growth check on the boundary ring: V ≥ ½ c |x|^{2α} there
    let c = potential.growth_c();
    let alpha = potential.alpha();
    for p in 0..grid.len() {
        let x = grid.position(p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r >= grid.extent {
            let vx = potential.eval(&x);
            if vx < 0.5 * c * r.powf(2.0 * alpha) {
                return Err(Error::AssumptionViolated(format!(
                    "potential fails the growth bound at |x| = {r:.3}: V = {vx:.3e}"
                )));
            }
        }
    }

    let drift = build_drift(&grid, &phi);
    let decay = fit_decay(&grid, &phi, alpha)?;
    let axis_cdf = if potential.separable() {
        Some(build_axis_cdf(&grid, &phi))
    } else {
        None
    };

    let mut modes = Vec::new();
    for (m, val) in vals.iter().enumerate().take(n_modes) {
        let mut w = vecs[m].clone();
        weighted_normalize(&grid, &mut w);
        modes.push((*val, w));
    }
    if !modes.is_empty() {
        modes[0] = (e0, phi.clone());
    }

    Ok(ParticleModel {
        grid,
        potential,
        phi,
        e0,
        drift,
        decay,
        modes,
        axis_cdf,
    })
}

fn build_drift(grid: &Grid3, phi: &[f64]) -> Vec<[f64; 3]> {
    let n = grid.n;
    let h = grid.h();
    // floor φ at 1e-10 of its peak: below that the eigensolver residual
    // dominates the value and the region carries no stationary mass
    let peak = phi.iter().cloned().fold(0.0f64, f64::max);
    let floor = peak * 1e-10;
    let logphi: Vec<f64> = phi.iter().map(|p| p.max(floor).ln()).collect();
    let mut drift = vec![[0.0; 3]; grid.len()];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let p = grid.idx(i, j, k);
                let strides = [(i, 1usize), (j, n), (k, n * n)];
                for (c, (pos, stride)) in strides.iter().enumerate() {
                    drift[p][c] = match (*pos > 0, *pos + 1 < n) {
                        (true, true) => (logphi[p + stride] - logphi[p - stride]) / (2.0 * h),
                        (false, true) => (logphi[p + stride] - logphi[p]) / h,
                        (true, false) => (logphi[p] - logphi[p - stride]) / h,
                        (false, false) => 0.0,
                    };
                }
            }
        }
    }
    drift
}

fn fit_decay(grid: &Grid3, phi: &[f64], alpha: f64) -> Result<DecayFit> {
    // fit log φ ≈ log C − δ |x|^{α+1} on the outer 20% (euclidean shell)
    let r_lo = 0.8 * grid.extent;
    let r_hi = grid.extent;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut radii = Vec::new();
    for p in 0..grid.len() {
        let pos = grid.position(p);
        let r = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt();
        if r >= r_lo && r <= r_hi && phi[p] > 1e-280 {
            xs.push(r.powf(alpha + 1.0));
            ys.push(phi[p].ln());
            radii.push(r);
        }
    }
    if xs.len() < 16 {
        return Err(Error::EigenFailure(
            "too few outer-shell nodes for the decay fit".into(),
        ));
    }
    let (logc, slope, _se, _r2) = stats::linear_fit(&xs, &ys);
    let delta = -slope;
    if delta <= 0.0 {
        return Err(Error::AssumptionViolated(
            "ground state does not decay on the outer shell".into(),
        ));
    }
    // enforce the envelope pointwise on the fit region
    let mut c = logc.exp();
    for (i, &r) in radii.iter().enumerate() {
        let need = ys[i].exp() / (-delta * r.powf(alpha + 1.0)).exp();
        if need > c {
            c = need;
        }
    }
    // α refit: log(−log(φ/C)) = log δ + (α_fit+1) log r
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let t = (ys[i] - c.ln()).min(-1e-12);
        lx.push(r.ln());
        ly.push((-t).ln());
    }
    let (_b0, b1, _se2, _r22) = stats::linear_fit(&lx, &ly);
    Ok(DecayFit {
        c,
        delta,
        alpha_fit: b1 - 1.0,
    })
}

fn build_axis_cdf(grid: &Grid3, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    // marginal of φ² along the first axis; for separable potentials the
    // joint is the product of the per-axis marginals
    let n = grid.n;
    let mut marg = vec![0.0; n];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let p = grid.idx(i, j, k);
                marg[i] += phi[p] * phi[p];
            }
        }
    }
    let h = grid.h();
    let mut cdf = vec![0.0; n];
    for i in 1..n {
        cdf[i] = cdf[i - 1] + 0.5 * (marg[i - 1] + marg[i]) * h;
    }
    let total = cdf[n - 1];
    for c in cdf.iter_mut() {
        *c /= total;
    }
    let nodes: Vec<f64> = (0..n).map(|i| grid.coord(i)).collect();
    (nodes, cdf)
}

impl ParticleModel {
    /// ∇log φ at an arbitrary point (trilinear); `None` outside the grid.
    pub fn drift_at(&self, x: &[f64; 3]) -> Option<[f64; 3]> {
        if !self.grid.contains(x) {
            return None;
        }
        let h = self.grid.h();
        let n = self.grid.n;
        // trilinear on the vector field without materializing components
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..3 {
            let t = (x[d] + self.grid.extent) / h;
            let i = (t.floor() as usize).min(n - 2);
            base[d] = i;
            frac[d] = (t - i as f64).clamp(0.0, 1.0);
        }
        let mut out = [0.0f64; 3];
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = (if dx == 1 { frac[0] } else { 1.0 - frac[0] })
                        * (if dy == 1 { frac[1] } else { 1.0 - frac[1] })
                        * (if dz == 1 { frac[2] } else { 1.0 - frac[2] });
                    let d = self.drift[self.grid.idx(base[0] + dx, base[1] + dy, base[2] + dz)];
                    for c in 0..3 {
                        out[c] += w * d[c];
                    }
                }
            }
        }
        Some(out)
    }

    /// Largest Euler–Maruyama step the drift field tolerates.
    pub fn dt_max(&self) -> f64 {
        let sup = self
            .drift
            .iter()
            .map(|d| (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt())
            .fold(0.0f64, f64::max);
        0.35 / sup.max(1e-9)
    }

    /// Draw from the stationary law φ² dx.
    pub fn sample_stationary(&self, rng: &mut impl Rng) -> [f64; 3] {
        if let Some((nodes, cdf)) = &self.axis_cdf {
            let mut out = [0.0; 3];
            for o in out.iter_mut() {
                let u: f64 = rng.random();
                let j = match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                    Ok(j) => j.max(1),
                    Err(j) => j.clamp(1, cdf.len() - 1),
                };
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                *o = nodes[j - 1] + t * (nodes[j] - nodes[j - 1]);
            }
            out
        } else {
            // Metropolis random walk with a long burn-in
            let mut x = [0.0f64; 3];
            let mut fx = self.grid.trilinear(&self.phi, &x).unwrap_or(1e-300).powi(2);
            let step = 0.5;
            for _ in 0..10_000 {
                let mut y = x;
                for c in y.iter_mut() {
                    let g: f64 = StandardNormal.sample(rng);
                    *c += step * g;
                }
                if !self.grid.contains(&y) {
                    continue;
                }
                let fy = self.grid.trilinear(&self.phi, &y).unwrap_or(0.0).powi(2);
                let u: f64 = rng.random();
                if fy > 0.0 && u < (fy / fx).min(1.0) {
                    x = y;
                    fx = fy;
                }
            }
            x
        }
    }

    /// ⟨a, b⟩_{L²(μ)} = Σ a b φ² h³.
    pub fn mu_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let h3 = self.grid.h().powi(3);
        a.iter()
            .zip(b)
            .zip(&self.phi)
            .map(|((x, y), p)| x * y * p * p)
            .sum::<f64>()
            * h3
    }

    /// Dirichlet form ½ ∫ ∇a·∇b dμ by centered differences.
    pub fn dirichlet_form(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.grid.n;
        let h = self.grid.h();
        let h3 = h.powi(3);
        let mut acc = 0.0;
        for k in 1..n - 1 {
            for j in 1..n - 1 {
                for i in 1..n - 1 {
                    let p = self.grid.idx(i, j, k);
                    let ga = [
                        (a[p + 1] - a[p - 1]) / (2.0 * h),
                        (a[p + n] - a[p - n]) / (2.0 * h),
                        (a[p + n * n] - a[p - n * n]) / (2.0 * h),
                    ];
                    let gb = [
                        (b[p + 1] - b[p - 1]) / (2.0 * h),
                        (b[p + n] - b[p - n]) / (2.0 * h),
                        (b[p + n * n] - b[p - n * n]) / (2.0 * h),
                    ];
                    acc += (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2])
                        * self.phi[p]
                        * self.phi[p];
                }
            }
        }
        0.5 * acc * h3
    }

    /// Apply `e^{-t L̄}` to a node field via the ground-state transform and a
    /// Krylov exponential of `H − E₀`.
    pub fn semigroup_apply(&self, f: &[f64], t: f64) -> Result<Vec<f64>> {
        let v = self.grid.sample(|x| self.potential.eval(x));
        struct Shifted<'a> {
            inner: GridHamiltonian<'a>,
            shift: f64,
        }
        impl SymOp for Shifted<'_> {
            fn dim(&self) -> usize {
                self.inner.dim()
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                self.inner.apply(x, y);
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi -= self.shift * xi;
                }
            }
        }
        let sop = Shifted {
            inner: GridHamiltonian {
                grid: self.grid,
                v: &v,
            },
            shift: self.e0,
        };
        let w: Vec<f64> = f.iter().zip(&self.phi).map(|(a, p)| a * p).collect();
        let mut steps = 1usize;
        let mut dt = t;
        while dt > 1.0 {
            steps *= 2;
            dt = t / steps as f64;
        }
        let mut cur = w;
        for _ in 0..steps {
            cur = linalg::expmv(&sop, &cur, dt, 48)?;
        }
        Ok(cur.iter().zip(&self.phi).map(|(a, p)| a / p).collect())
    }
}

/// A discretized two-sided trajectory on `[-T, T]`.
#[derive(Clone, Debug)]
pub struct ParticlePath {
    pub t_horizon: f64,
    pub dt: f64,
    /// 2n+1 positions at times -T, -T+dt, …, T.
    pub positions: Vec<[f64; 3]>,
    pub seed: u64,
    /// Steps whose proposal left the grid and was reflected.
    pub excursions: u64,
}

impl ParticlePath {
    pub fn n_steps_half(&self) -> usize {
        (self.positions.len() - 1) / 2
    }

    pub fn time(&self, idx: usize) -> f64 {
        -self.t_horizon + self.dt * idx as f64
    }

    /// Index of t = 0.
    pub fn center(&self) -> usize {
        self.n_steps_half()
    }

    pub fn position_at_time(&self, t: f64) -> [f64; 3] {
        let idx = ((t + self.t_horizon) / self.dt).round() as usize;
        self.positions[idx.min(self.positions.len() - 1)]
    }
}

/// Euler–Maruyama sample of the two-sided stationary diffusion.
///
/// The forward and backward halves use independent streams given the shared
/// stationary start, matching the independence of the two sides of the
/// process.
pub fn sample_path(
    model: &ParticleModel,
    t_horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ParticlePath> {
    if dt <= 0.0 || t_horizon < 0.0 {
        return Err(Error::InvalidArgument("need dt > 0, T >= 0".into()));
    }
    if dt > model.dt_max() {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} exceeds stability bound {:.4}",
            model.dt_max()
        )));
    }
    let n = (t_horizon / dt).round() as usize;
    let mut init_rng = stream(seed, &[rng::TAG_PATH_INIT]);
    let x0 = model.sample_stationary(&mut init_rng);
    let mut excursions = 0u64;

    let half = |tag: u64, exc: &mut u64| -> Vec<[f64; 3]> {
        let mut r = stream(seed, &[tag]);
        let sqdt = dt.sqrt();
        let mut xs = Vec::with_capacity(n);
        let mut x = x0;
        for _ in 0..n {
            let d = model.drift_at(&x).unwrap_or([0.0; 3]);
            let mut y = [0.0; 3];
            for c in 0..3 {
                let g: f64 = StandardNormal.sample(&mut r);
                y[c] = x[c] + d[c] * dt + sqdt * g;
            }
            if !model.grid.contains(&y) {
                *exc += 1;
                let l = model.grid.extent;
                for yc in y.iter_mut() {
                    if *yc > l {
                        *yc = 2.0 * l - *yc;
                    }
                    if *yc < -l {
                        *yc = -2.0 * l - *yc;
                    }
                    *yc = yc.clamp(-l, l);
                }
            }
            x = y;
            xs.push(x);
        }
        xs
    };

    let fwd = half(rng::TAG_PATH_FORWARD, &mut excursions);
    let bwd = half(rng::TAG_PATH_BACKWARD, &mut excursions);

    let mut positions = Vec::with_capacity(2 * n + 1);
    for i in (0..n).rev() {
        positions.push(bwd[i]);
    }
    positions.push(x0);
    positions.extend_from_slice(&fwd);

    for p in &positions {
        if !p.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument(
                "path produced non-finite state".into(),
            ));
        }
    }

    Ok(ParticlePath {
        t_horizon,
        dt,
        positions,
        seed,
        excursions,
    })
}

/// Comparison of a Monte Carlo multi-time product expectation against the
/// grid semigroup evaluation.
#[derive(Clone, Copy, Debug)]
pub struct FkCheck {
    pub mc_mean: f64,
    pub mc_se: f64,
    pub deterministic: f64,
    pub z: f64,
}

/// E[∏_j f_j(X_{t_j})] versus (f₀, e^{-Δt₁ L̄} f₁ ⋯ f_n)_{L²(μ)}.
pub fn feynman_kac_check(
    model: &ParticleModel,
    times: &[f64],
    observables: &[Vec<f64>],
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<FkCheck> {
    if times.len() != observables.len() || times.is_empty() {
        return Err(Error::InvalidArgument(
            "need one observable per time point".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be ordered".into()));
    }
    // deterministic side, right to left
    let mut w = observables.last().unwrap().clone();
    for j in (1..times.len()).rev() {
        w = model.semigroup_apply(&w, times[j] - times[j - 1])?;
        for (wi, fi) in w.iter_mut().zip(&observables[j - 1]) {
            *wi *= fi;
        }
    }
    let ones = vec![1.0; model.grid.len()];
    let deterministic = model.mu_inner(&ones, &w);

    // Monte Carlo side
    let horizon = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let samples: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let path = sample_path(model, horizon, dt, rng::mix(seed, &[p as u64])).unwrap();
            let mut prod = 1.0;
            for (t, f) in times.iter().zip(observables) {
                let x = path.position_at_time(*t);
                prod *= model.grid.trilinear(f, &x).unwrap_or(0.0);
            }
            prod
        })
        .collect();
    let mc_mean = stats::mean(&samples);
    let mc_se = stats::stderr_of_mean(&samples);
    let z = (mc_mean - deterministic) / mc_se.max(1e-300);
    Ok(FkCheck {
        mc_mean,
        mc_se,
        deterministic,
        z,
    })
}

/// Monte Carlo excursion probability against the Dirichlet-form envelope.
#[derive(Clone, Copy, Debug)]
pub struct TailReport {
    pub estimate: f64,
    pub stderr: f64,
    pub envelope: f64,
}

/// Smooth ramp equal to |x| above `b` and 0 below `b-1`.
fn ramp(r: f64, b: f64) -> f64 {
    if r <= b - 1.0 {
        0.0
    } else if r >= b {
        r
    } else {
        let u = r - (b - 1.0);
        let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        r * s
    }
}

/// P(sup_{|s|<a} |X_s| > b) estimated over paths and bounded by
/// `(6/b) sqrt((f,f) + a (f, L̄ f))` with the smooth ramp `f`.
pub fn tail_probability(
    model: &ParticleModel,
    a: f64,
    b: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<TailReport> {
    let hits: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let path = sample_path(model, a, dt, rng::mix(seed, &[0xfa11, p as u64])).unwrap();
            let sup = path
                .positions
                .iter()
                .map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
                .fold(0.0f64, f64::max);
            if sup > b {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let estimate = stats::mean(&hits);
    let stderr = stats::stderr_of_mean(&hits);

    let f = model.grid.sample(|x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        ramp(r, b)
    });
    let ff = model.mu_inner(&f, &f);
    let dirichlet = model.dirichlet_form(&f, &f);
    let envelope = 6.0 / b * (ff + a * dirichlet).sqrt();
    Ok(TailReport {
        estimate,
        stderr,
        envelope,
    })
}

/// ξ(T) e^{-(δ/4) T^{λ(α+1)}}: the confinement-failure bound assembled from
/// the fitted decay envelope by grid quadrature.
pub fn confinement_bound(model: &ParticleModel, t_horizon: f64, lambda: f64) -> f64 {
    let alpha = model.potential.alpha();
    let DecayFit { c, delta, .. } = model.decay;
    let level = t_horizon.powf(lambda);
    let h3 = model.grid.h().powi(3);

    // raise C so the envelope really dominates φ on the ramp support
    let mut c_eff = c;
    for p in 0..model.grid.len() {
        let x = model.grid.position(p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r >= level - 1.0 {
            let need = model.phi[p] / (-delta * r.powf(alpha + 1.0)).exp();
            if need > c_eff {
                c_eff = need;
            }
        }
    }

    let mut a1 = 0.0;
    let mut a2 = 0.0;
    let mut a3 = 0.0;
    let mut a4 = 0.0;
    let n = model.grid.n;
    let h = model.grid.h();
    for p in 0..model.grid.len() {
        let x = model.grid.position(p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let env = (-delta * r.powf(alpha + 1.0)).exp();
        let f = ramp(r, level);
        a1 += c_eff * c_eff * f * f * env * h3;
        a2 += c_eff * c_eff * f * f * model.potential.eval(&x) * env * h3;
        a4 += c_eff * c_eff * env * h3;
        // G = f² Δφ + 2 f ∇φ·∇f + f φ Δf on interior nodes
        let i = p % n;
        let j = (p / n) % n;
        let k = p / (n * n);
        if i > 0 && i + 1 < n && j > 0 && j + 1 < n && k > 0 && k + 1 < n && f > 0.0 {
            let phi_at = |q: usize| model.phi[q];
            let f_at = |q: usize| {
                let y = model.grid.position(q);
                ramp((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt(), level)
            };
            let lap = |field: &dyn Fn(usize) -> f64| -> f64 {
                (field(p + 1) + field(p - 1) + field(p + n) + field(p - n) + field(p + n * n)
                    + field(p - n * n)
                    - 6.0 * field(p))
                    / (h * h)
            };
            let grad = |field: &dyn Fn(usize) -> f64| -> [f64; 3] {
                [
                    (field(p + 1) - field(p - 1)) / (2.0 * h),
                    (field(p + n) - field(p - n)) / (2.0 * h),
                    (field(p + n * n) - field(p - n * n)) / (2.0 * h),
                ]
            };
            let gphi = grad(&phi_at);
            let gf = grad(&f_at);
            let g = f * f * lap(&phi_at)
                + 2.0 * f * (gphi[0] * gf[0] + gphi[1] * gf[1] + gphi[2] * gf[2])
                + f * model.phi[p] * lap(&f_at);
            a3 += c_eff * (-0.5 * delta * r.powf(alpha + 1.0)).exp() * g.abs() * h3;
        }
    }
    let xi = 12.0 / level * ((a1 - model.e0).abs() + t_horizon * (a2 + a3)).sqrt() + a4;
    xi * (-(delta / 4.0) * t_horizon.powf(lambda * (alpha + 1.0))).exp()
}

/// Monte Carlo estimate of P(sup_{|s|≤T} |X_s| > T^λ), the confinement
/// failure probability.
pub fn confinement_failure_mc(
    model: &ParticleModel,
    t_horizon: f64,
    lambda: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let level = t_horizon.powf(lambda);
    let hits: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let path =
                sample_path(model, t_horizon, dt, rng::mix(seed, &[0xA7, p as u64])).unwrap();
            let sup = path
                .positions
                .iter()
                .map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
                .fold(0.0f64, f64::max);
            if sup > level {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok((stats::mean(&hits), stats::stderr_of_mean(&hits)))
}

/// 1-D ground state for sanity checks (dimension tag 1).
pub fn solve_ground_state_1d(v: impl Fn(f64) -> f64, grid: Grid1) -> Result<(f64, Vec<f64>)> {
    struct Op1 {
        v: Vec<f64>,
        h: f64,
    }
    impl SymOp for Op1 {
        fn dim(&self) -> usize {
            self.v.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            let n = x.len();
            for i in 0..n {
                let mut nb = 0.0;
                if i > 0 {
                    nb += x[i - 1];
                }
                if i + 1 < n {
                    nb += x[i + 1];
                }
                y[i] = (x[i] - 0.5 * nb) / (self.h * self.h) + self.v[i] * x[i];
            }
        }
    }
    let vv: Vec<f64> = (0..grid.n).map(|i| v(grid.coord(i))).collect();
    let op = Op1 { v: vv, h: grid.h() };
    let (vals, vecs) = linalg::lanczos_lowest(&op, 1, 120, 1e-10, 0x1d)?;
    let (e0, mut phi) = linalg::refine_eigenpair(&op, vecs[0].clone(), vals[0], 0.2, 1e-9)?;
    if phi.iter().sum::<f64>() < 0.0 {
        for x in phi.iter_mut() {
            *x = -*x;
        }
    }
    let nrm = (phi.iter().map(|x| x * x).sum::<f64>() * grid.h()).sqrt();
    for x in phi.iter_mut() {
        *x /= nrm;
    }
    Ok((e0, phi))
}

/// Trapezoid weights matching a path's uniform time grid.
pub fn path_weights(path: &ParticlePath) -> Vec<f64> {
    trapezoid_weights(path.positions.len() - 1, path.dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_model(n: usize, extent: f64) -> ParticleModel {
        solve_ground_state(
            Potential::Harmonic { coeff: 0.5 },
            Grid3::new(n, extent).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn harmonic_ground_energy_and_state() {
        let m = harmonic_model(33, 4.5);
        let h = m.grid.h();
        assert!(
            (m.e0 - 1.5).abs() < 0.2 * h * h,
            "E0 = {}, h^2 = {}",
            m.e0,
            h * h
        );
        // φ ∝ e^{-|x|²/2} up to the O(h²) width shift of the discrete state
        let p0 = m.grid.trilinear(&m.phi, &[0.0, 0.0, 0.0]).unwrap();
        let p1 = m.grid.trilinear(&m.phi, &[1.0, 0.0, 0.0]).unwrap();
        assert!((p1 / p0 - (-0.5f64).exp()).abs() < 0.2 * h * h);
    }

    #[test]
    fn one_d_harmonic_sanity() {
        let (e0, _phi) =
            solve_ground_state_1d(|x| 0.5 * x * x, Grid1::new(201, 7.0).unwrap()).unwrap();
        assert!((e0 - 0.5).abs() < 2e-4, "E0 = {e0}");
    }

    #[test]
    fn constant_shift_moves_energy_only() {
        let base = harmonic_model(25, 4.5);
        let shifted = solve_ground_state(
            Potential::Custom {
                f: Arc::new(|x: &[f64; 3]| 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) + 2.0),
                c: 0.5,
                alpha: 1.0,
            },
            Grid3::new(25, 4.5).unwrap(),
        )
        .unwrap();
        assert!((shifted.e0 - base.e0 - 2.0).abs() < 1e-6);
        let diff: f64 = base
            .phi
            .iter()
            .zip(&shifted.phi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6, "phi changed by {diff}");
    }

    #[test]
    fn eigen_residual_is_tight() {
        let m = harmonic_model(25, 4.5);
        let v = m.grid.sample(|x| m.potential.eval(x));
        let op = GridHamiltonian {
            grid: m.grid,
            v: &v,
        };
        let mut hphi = vec![0.0; m.phi.len()];
        op.apply(&m.phi, &mut hphi);
        let mut res = hphi;
        for (r, p) in res.iter_mut().zip(&m.phi) {
            *r -= m.e0 * p;
        }
        let rn = linalg::norm(&res) / linalg::norm(&m.phi);
        assert!(rn <= 1e-8, "residual {rn}");
    }

    #[test]
    fn drift_matches_linear_ou_drift() {
        let m = harmonic_model(25, 4.0);
        let tol = 0.6 * m.grid.h() * m.grid.h();
        for x in [[0.5, 0.0, 0.0], [1.0, -1.0, 0.3]] {
            let d = m.drift_at(&x).unwrap();
            for c in 0..3 {
                assert!(
                    (d[c] + x[c]).abs() < tol * (1.0 + x[c].abs()),
                    "drift {d:?} at {x:?}"
                );
            }
        }
    }

    #[test]
    fn generator_matches_dirichlet_form() {
        // (f, (I − e^{-tL̄})g)_μ / t → ½ ∫ ∇f·∇g dμ
        let m = harmonic_model(21, 4.0);
        let f = m
            .grid
            .sample(|x| (0.3 * x[0]).sin() * (-0.1 * x[1] * x[1]).exp());
        let g = m.grid.sample(|x| x[2] * (-0.2 * (x[0] * x[0])).exp());
        let dt = 0.02;
        let eg = m.semigroup_apply(&g, dt).unwrap();
        let mut diff = g.clone();
        for (d, e) in diff.iter_mut().zip(&eg) {
            *d -= e;
        }
        let lhs = m.mu_inner(&f, &diff) / dt;
        let rhs = m.dirichlet_form(&f, &g);
        assert!(
            (lhs - rhs).abs() < 0.05 * rhs.abs().max(0.05),
            "lhs {lhs} rhs {rhs}"
        );
    }

    #[test]
    fn paths_are_reproducible_and_stitched() {
        let m = harmonic_model(21, 4.5);
        let p1 = sample_path(&m, 1.0, 0.01, 42).unwrap();
        let p2 = sample_path(&m, 1.0, 0.01, 42).unwrap();
        assert_eq!(p1.positions.len(), 201);
        assert_eq!(p1.positions, p2.positions);
        let p3 = sample_path(&m, 1.0, 0.01, 43).unwrap();
        assert_ne!(p1.positions, p3.positions);
    }

    #[test]
    fn dt_above_stability_bound_is_rejected() {
        let m = harmonic_model(21, 4.5);
        assert!(sample_path(&m, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn ou_conditional_mean_decays() {
        // E[X_t | X₀ = x] = x e^{-t} for the harmonic model
        let m = harmonic_model(33, 4.5);
        let t = 1.0;
        let n_paths = 4000u64;
        let samples: Vec<(f64, f64)> = (0..n_paths)
            .into_par_iter()
            .map(|p| {
                let path = sample_path(&m, t, 0.005, rng::mix(99, &[p])).unwrap();
                let x0 = path.positions[path.center()][0];
                let xt = path.positions[path.positions.len() - 1][0];
                (x0 * xt, x0 * x0)
            })
            .collect();
        let num: f64 = samples.iter().map(|s| s.0).sum();
        let den: f64 = samples.iter().map(|s| s.1).sum();
        // regression slope of X_T on X₀ estimates e^{-T}
        let slope = num / den;
        let expect = (-t).exp();
        assert!(
            (slope - expect).abs() < 0.03,
            "slope {slope} vs e^-T {expect}"
        );
    }

    #[test]
    fn stationarity_and_time_reversal_by_ks() {
        let m = harmonic_model(33, 4.5);
        let n_paths = 1500usize;
        let paths: Vec<ParticlePath> = (0..n_paths)
            .into_par_iter()
            .map(|p| sample_path(&m, 1.0, 0.01, rng::mix(7, &[p as u64])).unwrap())
            .collect();
        let x0: Vec<f64> = paths.iter().map(|p| p.positions[p.center()][0]).collect();
        let xt: Vec<f64> = paths
            .iter()
            .map(|p| p.positions[p.positions.len() - 1][0])
            .collect();
        let xmt: Vec<f64> = paths.iter().map(|p| p.positions[0][0]).collect();
        let (_d, p_stat) = stats::ks_two_sample(&x0, &xt);
        assert!(p_stat > 0.01, "stationarity KS p = {p_stat}");
        let (_d, p_rev) = stats::ks_two_sample(&xt, &xmt);
        assert!(p_rev > 0.01, "time-reversal KS p = {p_rev}");
    }

    #[test]
    fn fk_single_constant_observable_is_one() {
        let m = harmonic_model(21, 4.5);
        let ones = vec![1.0; m.grid.len()];
        let chk = feynman_kac_check(&m, &[0.0], &[ones], 50, 0.01, 5).unwrap();
        assert!((chk.deterministic - 1.0).abs() < 1e-9);
        assert!((chk.mc_mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fk_two_time_covariance_matches_ou() {
        // f₀ = f₁ = x₁: E[X₀ X₁] = e^{-1}·Var = e^{-1}/2 per axis
        let m = harmonic_model(33, 4.5);
        let fx = m.grid.sample(|x| x[0]);
        let chk = feynman_kac_check(&m, &[0.0, 1.0], &[fx.clone(), fx], 4000, 0.005, 21).unwrap();
        let ou = 0.5 * (-1.0f64).exp();
        assert!(
            (chk.deterministic - ou).abs() < 5e-3,
            "grid side {} vs OU {}",
            chk.deterministic,
            ou
        );
        assert!(chk.z.abs() <= 3.5, "z = {}", chk.z);
    }

    #[test]
    fn decay_fit_recovers_gaussian_tail() {
        let m = harmonic_model(33, 4.5);
        assert!(
            (m.decay.alpha_fit - 1.0).abs() < 0.1,
            "alpha_fit = {}",
            m.decay.alpha_fit
        );
        for p in 0..m.grid.len() {
            let x = m.grid.position(p);
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r >= 0.8 * m.grid.extent && r <= m.grid.extent {
                let env = m.decay.c * (-m.decay.delta * r.powf(2.0)).exp();
                assert!(m.phi[p] <= env * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn tail_probability_below_envelope() {
        let m = harmonic_model(33, 4.5);
        let rep = tail_probability(&m, 1.0, 4.0, 400, 0.01, 77).unwrap();
        assert!(
            rep.estimate <= rep.envelope,
            "estimate {} envelope {}",
            rep.estimate,
            rep.envelope
        );
        // envelope² is affine in the horizon a
        let r1 = tail_probability(&m, 1.0, 4.0, 10, 0.01, 77).unwrap();
        let r2 = tail_probability(&m, 2.0, 4.0, 10, 0.01, 77).unwrap();
        let r3 = tail_probability(&m, 3.0, 4.0, 10, 0.01, 77).unwrap();
        let d21 = r2.envelope.powi(2) - r1.envelope.powi(2);
        let d32 = r3.envelope.powi(2) - r2.envelope.powi(2);
        assert!((d21 - d32).abs() < 1e-9 * d21.abs().max(1e-12));
    }

    #[test]
    fn confinement_failure_below_bound() {
        let m = harmonic_model(33, 4.5);
        let lambda = 0.75;
        for t in [2.0, 4.0] {
            let (p, _se) = confinement_failure_mc(&m, t, lambda, 300, 0.01, 3).unwrap();
            let bound = confinement_bound(&m, t, lambda);
            assert!(p <= bound, "T={t}: mc {p} bound {bound}");
        }
    }

    #[test]
    fn excursions_are_rare() {
        let m = harmonic_model(33, 4.5);
        let mut total_steps = 0u64;
        let mut total_exc = 0u64;
        for p in 0..50u64 {
            let path = sample_path(&m, 4.0, 0.01, rng::mix(31, &[p])).unwrap();
            total_steps += (path.positions.len() - 1) as u64;
            total_exc += path.excursions;
        }
        assert!(
            (total_exc as f64) < 1e-4 * total_steps as f64,
            "{total_exc} excursions in {total_steps} steps"
        );
    }

    #[test]
    fn markov_increment_proxy() {
        // increments gathered in one spatial cell at early vs late times
        let m = harmonic_model(33, 4.5);
        let mut early = Vec::new();
        let mut late = Vec::new();
        for p in 0..600u64 {
            let path = sample_path(&m, 2.0, 0.01, rng::mix(13, &[p])).unwrap();
            let half = path.positions.len() / 2;
            for idx in 0..path.positions.len() - 1 {
                let x = path.positions[idx];
                if x[0].abs() < 0.3 && x[1].abs() < 0.3 && x[2].abs() < 0.3 {
                    let inc = path.positions[idx + 1][0] - x[0];
                    if idx < half {
                        early.push(inc);
                    } else {
                        late.push(inc);
                    }
                }
            }
        }
        let (_d, pv) = stats::ks_two_sample(&early, &late);
        assert!(pv > 0.01, "KS p = {pv}");
    }
}
