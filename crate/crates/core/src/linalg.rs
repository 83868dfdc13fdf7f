//! Matrix-free symmetric eigensolvers and Krylov propagators used by the
//! grid Schrödinger problems and the truncated Fock Hamiltonian.
//!
//! * Lanczos with full reorthogonalization for the lowest Ritz pairs of a
//!   sparse symmetric operator, refined by shifted inverse power iteration
//!   with conjugate gradients;
//! * implicit-shift QL for symmetric tridiagonals;
//! * cyclic Jacobi for small dense symmetric matrices;
//! * a Lanczos `exp(-t A) v` propagator.

use crate::error::{Error, Result};
use crate::rng::stream;
use rand::Rng;

/// Matrix-free symmetric operator.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit-shift
/// QL. `d` is the diagonal, `e` the sub-diagonal (`e[0]` unused). Returns
/// eigenvalues ascending with the rotation matrix `z` (columns are vectors)
/// updated in place.
pub fn tridiag_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    // z is n x n row-major, initialized by the caller (identity for plain use)
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenFailure("tridiagonal QL stalled".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort ascending, permuting columns of z
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let dc = d.to_vec();
    let zc = z.to_vec();
    for (new, &old) in order.iter().enumerate() {
        d[new] = dc[old];
        for k in 0..n {
            z[k * n + new] = zc[k * n + old];
        }
    }
    Ok(())
}

/// Lowest `n_pairs` Ritz pairs of a symmetric operator by Lanczos with full
/// reorthogonalization.
pub fn lanczos_lowest(
    op: &dyn SymOp,
    n_pairs: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.dim();
    let m_max = max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);

    let mut rng = stream(seed, &[0x1a2c, n as u64]);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);

    let mut w = vec![0.0; n];
    let mut converged_at = m_max;
    for j in 0..m_max {
        op.apply(&v, &mut w);
        let a = dot(&v, &w);
        alpha.push(a);
        axpy(-a, &v, &mut w);
        if j > 0 {
            let bprev = beta[j - 1];
            axpy(-bprev, &basis[j - 1], &mut w);
        }
        // full reorthogonalization (twice for safety)
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
            let c = dot(&v, &w);
            axpy(-c, &v, &mut w);
        }
        basis.push(std::mem::replace(&mut v, vec![0.0; n]));
        let b = norm(&w);
        beta.push(b);
        if b < 1e-12 {
            converged_at = j + 1;
            break;
        }
        v.copy_from_slice(&w);
        scale(1.0 / b, &mut v);

        // convergence check on the residual of the lowest Ritz pairs
        if j + 1 >= n_pairs.max(8) && (j + 1) % 8 == 0 {
            let m = j + 1;
            let mut d = alpha.clone();
            let mut e = vec![0.0; m];
            for i in 1..m {
                e[i] = beta[i - 1];
            }
            let mut z = vec![0.0; m * m];
            for i in 0..m {
                z[i * m + i] = 1.0;
            }
            tridiag_ql(&mut d, &mut e, &mut z)?;
            let worst = (0..n_pairs.min(m))
                .map(|p| (beta[m - 1] * z[(m - 1) * m + p]).abs())
                .fold(0.0f64, f64::max);
            if worst < tol {
                converged_at = m;
                break;
            }
        }
    }
    let m = converged_at.min(basis.len());
    if m < n_pairs {
        return Err(Error::EigenFailure(format!(
            "Krylov space exhausted at dimension {m}, need {n_pairs} pairs"
        )));
    }
    let mut d = alpha[..m].to_vec();
    let mut e = vec![0.0; m];
    for i in 1..m {
        e[i] = beta[i - 1];
    }
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }
    tridiag_ql(&mut d, &mut e, &mut z)?;
    let mut vals = Vec::with_capacity(n_pairs);
    let mut vecs = Vec::with_capacity(n_pairs);
    for p in 0..n_pairs {
        vals.push(d[p]);
        let mut x = vec![0.0; n];
        for (jj, q) in basis.iter().enumerate().take(m) {
            axpy(z[jj * m + p], q, &mut x);
        }
        let nx = norm(&x);
        scale(1.0 / nx, &mut x);
        vecs.push(x);
    }
    Ok((vals, vecs))
}

/// Conjugate gradients for a positive-definite shifted operator
/// `y = (A - shift I)^{-1} b`.
pub fn cg_shifted(
    op: &dyn SymOp,
    shift: f64,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs = dot(&r, &r);
    let b_norm = rs.sqrt().max(1e-300);
    for _ in 0..max_iter {
        op.apply(&p, &mut ap);
        axpy(-shift, &p, &mut ap);
        let alpha = rs / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() < tol * b_norm {
            return Ok(x);
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::EigenFailure("CG did not converge".into()))
}

/// Refine an eigenpair by shifted inverse power iteration until
/// `‖A x − λ x‖ ≤ tol ‖x‖`.
pub fn refine_eigenpair(
    op: &dyn SymOp,
    mut x: Vec<f64>,
    lambda0: f64,
    shift_gap: f64,
    tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = x.len();
    let mut ax = vec![0.0; n];
    let _ = lambda0;
    let mut lambda;
    for _ in 0..40 {
        op.apply(&x, &mut ax);
        lambda = dot(&x, &ax);
        let mut res = ax.clone();
        axpy(-lambda, &x, &mut res);
        if norm(&res) <= tol {
            return Ok((lambda, x));
        }
        let shift = lambda - shift_gap;
        let y = cg_shifted(op, shift, &x, 1e-10, 20 * n.max(100))?;
        let ny = norm(&y);
        x = y;
        scale(1.0 / ny, &mut x);
    }
    Err(Error::EigenFailure(
        "inverse iteration failed to reach residual tolerance".into(),
    ))
}

/// All eigenpairs of a small dense symmetric matrix (row-major) by cyclic
/// Jacobi. Returns eigenvalues ascending and eigenvectors as columns of `v`.
pub fn jacobi_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off.sqrt() < 1e-13 * (1.0 + norm(&m)) {
            break;
        }
        if sweep == 99 {
            return Err(Error::EigenFailure("Jacobi sweeps exhausted".into()));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[x].partial_cmp(&vals[y]).unwrap());
    let vals_sorted: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut v_sorted = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            v_sorted[k * n + new] = v[k * n + old];
        }
    }
    vals = vals_sorted;
    Ok((vals, v_sorted))
}

/// `exp(-t A) b` by an m-step Lanczos approximation (A symmetric, t ≥ 0).
pub fn expmv(op: &dyn SymOp, b: &[f64], t: f64, m_krylov: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let beta0 = norm(b);
    if beta0 == 0.0 || t == 0.0 {
        return Ok(b.to_vec());
    }
    let m = m_krylov.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v: Vec<f64> = b.iter().map(|x| x / beta0).collect();
    let mut w = vec![0.0; n];
    let mut m_eff = m;
    for j in 0..m {
        op.apply(&v, &mut w);
        let a = dot(&v, &w);
        alpha.push(a);
        axpy(-a, &v, &mut w);
        if j > 0 {
            let bp = betas[j - 1];
            axpy(-bp, &basis[j - 1], &mut w);
        }
        for q in &basis {
            let c = dot(q, &w);
            axpy(-c, q, &mut w);
        }
        basis.push(std::mem::replace(&mut v, vec![0.0; n]));
        let bnext = norm(&w);
        if bnext < 1e-13 {
            m_eff = j + 1;
            break;
        }
        betas.push(bnext);
        v.copy_from_slice(&w);
        scale(1.0 / bnext, &mut v);
    }
    let mm = m_eff.min(basis.len());
    let mut d = alpha[..mm].to_vec();
    let mut e = vec![0.0; mm];
    for i in 1..mm {
        e[i] = betas[i - 1];
    }
    let mut z = vec![0.0; mm * mm];
    for i in 0..mm {
        z[i * mm + i] = 1.0;
    }
    tridiag_ql(&mut d, &mut e, &mut z)?;
    // y = Z exp(-tΛ) Zᵀ e₁ β₀
    let mut coeff = vec![0.0; mm];
    for p in 0..mm {
        let zp0 = z[p]; // z[0*mm + p]
        let ep = (-t * d[p]).exp();
        for q in 0..mm {
            coeff[q] += z[q * mm + p] * ep * zp0;
        }
    }
    let mut out = vec![0.0; n];
    for (q, base) in basis.iter().enumerate().take(mm) {
        axpy(beta0 * coeff[q], base, &mut out);
    }
    Ok(out)
}
