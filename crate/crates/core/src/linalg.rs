//! Small dense kernels on row-major `n x n` slices.

pub(crate) const POWER_TOL: f64 = 1e-10;
pub(crate) const POWER_MAX_STEPS: usize = 10_000;

pub(crate) fn mat_vec(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for (row, o) in a.chunks_exact(n).zip(out.iter_mut()) {
        *o = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

pub(crate) fn symmetric_part(a: &[f64], n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    s
}

pub(crate) fn is_symmetric(a: &[f64], n: usize) -> bool {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-14 * scale.max(1.0);
    (0..n).all(|i| (0..i).all(|j| (a[i * n + j] - a[j * n + i]).abs() <= tol))
}

/// `aᵀa`.
pub(crate) fn gram(a: &[f64], n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum();
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration on the Rayleigh quotient, started from the normalized all-ones
/// vector. A second deterministic start guards against the all-ones vector
/// being orthogonal to the dominant eigenspace.
pub(crate) fn largest_eigenvalue_psd(s: &[f64], n: usize) -> f64 {
    let ones = vec![1.0; n];
    let irregular: Vec<f64> = (0..n).map(|j| ((j as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5).collect();
    power_iteration(s, n, &ones).max(power_iteration(s, n, &irregular))
}

fn power_iteration(s: &[f64], n: usize, start: &[f64]) -> f64 {
    let mut v = start.to_vec();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_STEPS {
        mat_vec(s, n, &v, &mut w);
        let next: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        let converged = (next - lambda).abs() <= POWER_TOL * next.abs();
        lambda = next;
        if converged {
            break;
        }
    }
    lambda
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(s: &[f64], n: usize) -> Vec<f64> {
    let mut a = s.to_vec();
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
