//! Small statistics toolbox: log-sum-exp reductions, jackknife errors,
//! weighted least squares and a two-sample Kolmogorov–Smirnov test.
//!
//! Reductions run in fixed index order so results do not depend on worker
//! scheduling.

/// log(Σ exp(x_i)) with max shift.
pub fn logsumexp(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// log of the mean of exp(x_i).
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    logsumexp(xs) - (xs.len() as f64).ln()
}

/// Self-normalized weights from log-weights; returns (weights, ess).
pub fn normalized_weights(logw: &[f64]) -> (Vec<f64>, f64) {
    let lse = logsumexp(logw);
    let w: Vec<f64> = logw.iter().map(|l| (l - lse).exp()).collect();
    let ess = 1.0 / w.iter().map(|x| x * x).sum::<f64>();
    (w, ess)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Jackknife standard error of an arbitrary statistic given its leave-one-out
/// replicates.
pub fn jackknife_se(replicates: &[f64]) -> f64 {
    let n = replicates.len() as f64;
    let m = mean(replicates);
    let ss: f64 = replicates.iter().map(|r| (r - m) * (r - m)).sum();
    ((n - 1.0) / n * ss).sqrt()
}

/// Leave-one-out replicates of log-mean-exp, computed in O(n) from the sums.
pub fn jackknife_log_mean_exp(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    let n = xs.len() as f64;
    xs.iter()
        .map(|x| m + ((total - (x - m).exp()).max(1e-300) / (n - 1.0)).ln())
        .collect()
}

/// Ordinary least squares y = a + b x; returns (a, b, se_b, r_squared).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(u, v)| {
            let e = v - (a + b * u);
            e * e
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let se_b = if n > 2.0 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, b, se_b, r2)
}

/// Weighted least squares with per-point standard deviations; returns
/// (a, b, se_b).
pub fn weighted_linear_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> (f64, f64, f64) {
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let swx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let swy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let swxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let swxy: f64 = w
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (x, y))| w * x * y)
        .sum();
    let det = sw * swxx - swx * swx;
    let b = (sw * swxy - swx * swy) / det;
    let a = (swxx * swy - swx * swxy) / det;
    let se_b = (sw / det).sqrt();
    (a, b, se_b)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let xv = xs[i];
        let yv = ys[j];
        if xv <= yv {
            i += 1;
        }
        if yv <= xv {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    // Q_KS(λ) = 2 Σ (-1)^{j-1} e^{-2 j² λ²}
    let mut p = 0.0;
    let mut term;
    for k in 1..=100 {
        term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        p += term;
        if term.abs() < 1e-10 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_handles_large_offsets() {
        let xs = [1000.0, 1000.0];
        assert!((logsumexp(&xs) - (1000.0 + 2.0f64.ln())).abs() < 1e-12);
        assert!((log_mean_exp(&xs) - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn weights_normalize_and_ess_counts() {
        let (w, ess) = normalized_weights(&[0.0, 0.0, 0.0, 0.0]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((ess - 4.0).abs() < 1e-10);
        let (_, ess1) = normalized_weights(&[100.0, 0.0, 0.0, 0.0]);
        assert!(ess1 < 1.0 + 1e-10);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        let (a, b, _se, r2) = linear_fit(&x, &y);
        assert!((a - 2.0).abs() < 1e-10 && (b + 3.0).abs() < 1e-10);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_same_distribution_high_p() {
        let a: Vec<f64> = (0..500).map(|i| ((i * 1103 + 7) % 1000) as f64).collect();
        let b: Vec<f64> = (0..500).map(|i| ((i * 419 + 13) % 1000) as f64).collect();
        let (_d, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01, "p = {p}");
        // shifted sample should be rejected
        let c: Vec<f64> = a.iter().map(|v| v + 300.0).collect();
        let (_d, p) = ks_two_sample(&a, &c);
        assert!(p < 1e-6);
    }
}
