//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration with partial pivoting for the eigenvectors,
//! and Gram–Schmidt within eigenvalue clusters.

use crate::numerics::sum::NeumaierSum;

/// Number of eigenvalues of the tridiagonal (diag, off) strictly below `x`,
/// by the Sturm sequence of leading-principal-minor ratios.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0usize;
    let mut q = 1.0f64;
    for (i, &a) in diag.iter().enumerate() {
        let b_sq = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        if q == 0.0 {
            q = f64::MIN_POSITIVE;
        }
        q = (a - x) - b_sq / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues in ascending order, by bisection on Gershgorin brackets.
fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i == 0 { 0.0 } else { off[i - 1].abs() }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let pad = 16.0 * f64::EPSILON * scale;
    lo -= pad;
    hi += pad;

    (0..n)
        .map(|k| {
            let mut a = lo;
            let mut b = hi;
            // stop once the bracket is at rounding width
            while b - a > 4.0 * f64::EPSILON * (a.abs().max(b.abs()).max(1.0)) {
                let mid = 0.5 * (a + b);
                if sturm_count(diag, off, mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Solve (T - shift I) x = rhs for tridiagonal symmetric T, Gaussian
/// elimination with partial pivoting (fill-in limited to a second
/// superdiagonal). `rhs` is consumed.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, mut x: Vec<f64>) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        let p = safe_pivot(diag[0] - shift, 1.0);
        x[0] /= p;
        return x;
    }
    let mut d: Vec<f64> = diag.iter().map(|&a| a - shift).collect();
    let mut u: Vec<f64> = (0..n - 1).map(|i| off[i]).collect();
    let mut u2 = vec![0.0f64; n]; // second superdiagonal after pivoting
    let mut l: Vec<f64> = off.to_vec();

    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1.0);

    for i in 0..n - 1 {
        if l[i].abs() > d[i].abs() {
            // swap rows i and i+1
            std::mem::swap(&mut d[i], &mut l[i]);
            let old_upper = u[i];
            u[i] = d[i + 1];
            d[i + 1] = old_upper;
            if i + 1 < n - 1 {
                u2[i] = u[i + 1];
                u[i + 1] = 0.0;
            }
            x.swap(i, i + 1);
        }
        let p = safe_pivot(d[i], scale);
        let m = l[i] / p;
        d[i + 1] -= m * u[i];
        if i + 1 < n - 1 {
            u[i + 1] -= m * u2[i];
        }
        x[i + 1] -= m * x[i];
        d[i] = p;
    }

    x[n - 1] /= safe_pivot(d[n - 1], scale);
    if n >= 2 {
        x[n - 2] = (x[n - 2] - u[n - 2] * x[n - 1]) / safe_pivot(d[n - 2], scale);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - u[i] * x[i + 1] - u2[i] * x[i + 2]) / safe_pivot(d[i], scale);
    }
    x
}

#[inline]
fn safe_pivot(p: f64, scale: f64) -> f64 {
    let floor = f64::EPSILON * f64::EPSILON * scale;
    if p.abs() >= floor {
        p
    } else if p < 0.0 {
        -floor
    } else {
        floor
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &x in v.iter() {
        acc.add(x * x);
    }
    let norm = acc.value().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

/// Full eigendecomposition of a symmetric tridiagonal matrix. Returns the
/// eigenvalues in ascending order with matching unit eigenvectors.
pub fn eigen_symmetric_tridiagonal(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
    let n = diag.len();
    let vals = eigenvalues(diag, off);
    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1.0);
    let cluster_tol = 1e-7 * scale;

    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut cluster_start = 0usize;
    for k in 0..n {
        if k > 0 && (vals[k] - vals[k - 1]).abs() > cluster_tol {
            cluster_start = k;
        }
        // deterministic start vector, never orthogonal to anything structured
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.7391).sin())
            .collect();
        normalize(&mut v);
        for _ in 0..4 {
            v = solve_shifted(diag, off, vals[k], v);
            // keep inverse iteration out of previously converged directions
            // within the same eigenvalue cluster
            for prev in vecs[cluster_start..].iter() {
                let c = dot(&v, prev);
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= c * pi;
                }
            }
            let growth = normalize(&mut v);
            if growth > 1.0 / (f64::EPSILON * scale) {
                break;
            }
        }
        vecs.push(v);
    }
    (vals, vecs)
}
