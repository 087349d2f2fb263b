//! Dense symmetric / Hermitian eigensolver.
//!
//! Classic Householder reduction to tridiagonal form followed by the
//! implicit-shift QL iteration with eigenvector accumulation, specialized to
//! run single-threaded with a fixed operation order so results are
//! reproducible bit-for-bit. Complex Hermitian matrices are handled through
//! the standard 2n real symmetric embedding [[X, −Y], [Y, X]].

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 50;

/// Eigenvalues (ascending) and eigenvectors (column-major, orthonormal in the
/// standard ℓ² sense) of a real symmetric matrix given in row-major order.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(matrix.len(), n * n);
    let (mut d, mut e, mut z) = if let Some((d, e)) = as_tridiagonal(matrix, n) {
        let mut z = vec![0.0; n * n];
        for k in 0..n {
            z[k * n + k] = 1.0;
        }
        (d, e, z)
    } else {
        let mut a = matrix.to_vec();
        let (d, e) = tred2(&mut a, n);
        // transpose the accumulated transform into column-major storage
        let mut z = vec![0.0; n * n];
        for row in 0..n {
            for col in 0..n {
                z[col * n + row] = a[row * n + col];
            }
        }
        (d, e, z)
    };
    tql2(&mut d, &mut e, &mut z, n)?;
    sort_ascending(&mut d, &mut z, n);
    Ok((d, z))
}

/// Eigenvalues (ascending) and eigenvectors (column-major, complex) of a
/// Hermitian matrix in row-major order. Real input takes the direct path;
/// genuinely complex input goes through the real embedding.
pub fn hermitian_eigen(matrix: &[Complex64], n: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    assert_eq!(matrix.len(), n * n);
    let scale = matrix.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    let max_im = matrix.iter().map(|v| v.im.abs()).fold(0.0_f64, f64::max);
    if max_im <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
        let real: Vec<f64> = matrix.iter().map(|v| v.re).collect();
        let (d, z) = symmetric_eigen(&real, n)?;
        let zc = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        return Ok((d, zc));
    }
    hermitian_eigen_embedded(matrix, n, scale)
}

fn hermitian_eigen_embedded(
    matrix: &[Complex64],
    n: usize,
    scale: f64,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let m = 2 * n;
    let mut embed = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let v = matrix[i * n + j];
            embed[i * m + j] = v.re;
            embed[i * m + (n + j)] = -v.im;
            embed[(n + i) * m + j] = v.im;
            embed[(n + i) * m + (n + j)] = v.re;
        }
    }
    let (d2, z2) = symmetric_eigen(&embed, m)?;

    // Every eigenvalue appears twice; each 2n-eigenvector (u; w) maps to the
    // complex vector u + i·w, and the duplicate within a pair is the image
    // under multiplication by i. Keep one representative per pair, Gram-Schmidt
    // filtering duplicates inside eigenvalue clusters.
    let cluster_tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let mut values: Vec<f64> = Vec::with_capacity(n);
    let mut vectors: Vec<Complex64> = Vec::with_capacity(n * n);
    for k in 0..m {
        if values.len() == n {
            break;
        }
        let lambda = d2[k];
        let col = &z2[k * m..(k + 1) * m];
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(col[i], col[n + i]))
            .collect();
        // orthogonalize against accepted vectors of the same cluster
        for (j, &mu) in values.iter().enumerate() {
            if (lambda - mu).abs() <= cluster_tol.max(1e-9 * lambda.abs()) {
                let prev = &vectors[j * n..(j + 1) * n];
                let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= overlap * p;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            values.push(lambda);
            vectors.extend_from_slice(&v);
        }
    }
    if values.len() != n {
        return Err(Error::EigenNoConvergence { index: values.len() });
    }
    Ok((values, vectors))
}

/// Detect an already-tridiagonal symmetric matrix and extract its diagonal
/// and subdiagonal. Saves the O(n³) Householder pass for the second-difference
/// operators this crate mostly decomposes.
fn as_tridiagonal(matrix: &[f64], n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    for i in 0..n {
        for j in 0..n {
            if j + 1 < i || j > i + 1 {
                if matrix[i * n + j] != 0.0 {
                    return None;
                }
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| matrix[i * n + i]).collect();
    let mut e = vec![0.0; n];
    for i in 1..n {
        let lower = matrix[i * n + (i - 1)];
        let upper = matrix[(i - 1) * n + i];
        if (lower - upper).abs() > 1e-14 * (lower.abs() + upper.abs()).max(f64::MIN_POSITIVE) {
            return None;
        }
        e[i] = lower;
    }
    Some((d, e))
}

/// Householder reduction of a real symmetric matrix (row-major, modified in
/// place to hold the accumulated orthogonal transform). Returns the diagonal
/// and subdiagonal of the tridiagonal form; e[0] is unused.
fn tred2(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;

    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for j in 0..i {
            a[j * n + i] = 0.0;
            a[i * n + j] = 0.0;
        }
    }
    (d, e)
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix with
/// eigenvector accumulation. `z` is column-major; on entry it holds the basis
/// in which the tridiagonal form is expressed, on exit its columns are the
/// eigenvectors.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
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
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenNoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate eigenvector columns i and i+1
                let (left, right) = z.split_at_mut((i + 1) * n);
                let zi = &mut left[i * n..(i + 1) * n];
                let zi1 = &mut right[..n];
                for k in 0..n {
                    f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_ascending(d: &mut [f64], z: &mut [f64], n: usize) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("eigenvalue NaN"));
    let sorted_d: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut sorted_z = vec![0.0; n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        sorted_z[new_k * n..(new_k + 1) * n].copy_from_slice(&z[old_k * n..(old_k + 1) * n]);
    }
    d.copy_from_slice(&sorted_d);
    z.copy_from_slice(&sorted_z);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_residual(matrix: &[f64], n: usize, d: &[f64], z: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..n {
            let v = &z[k * n..(k + 1) * n];
            for i in 0..n {
                let mut av = 0.0;
                for j in 0..n {
                    av += matrix[i * n + j] * v[j];
                }
                worst = worst.max((av - d[k] * v[i]).abs());
            }
        }
        worst
    }

    #[test]
    fn dirichlet_second_difference_spectrum() {
        // closed form: lambda_k = 2(1 − cos(kπ/(n+1))), eigenvectors sin(ikπ/(n+1))
        let n = 64;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i > 0 {
                a[i * n + i - 1] = -1.0;
            }
            if i + 1 < n {
                a[i * n + i + 1] = -1.0;
            }
        }
        let (d, z) = symmetric_eigen(&a, n).unwrap();
        let theta = std::f64::consts::PI / (n as f64 + 1.0);
        for (k, &lambda) in d.iter().enumerate() {
            let exact = 2.0 * (1.0 - ((k as f64 + 1.0) * theta).cos());
            assert!(
                (lambda - exact).abs() < 1e-12 * 4.0,
                "k={k}: {lambda} vs {exact}"
            );
        }
        assert!(max_residual(&a, n, &d, &z) < 1e-12);
    }

    #[test]
    fn dense_symmetric_roundtrip() {
        // deterministic pseudo-random symmetric matrix
        let n = 40;
        let mut a = vec![0.0; n * n];
        let mut state = 0x2545f4914f6cdd1d_u64;
        let mut rand = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in 0..=i {
                let v = rand();
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let (d, z) = symmetric_eigen(&a, n).unwrap();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        assert!(max_residual(&a, n, &d, &z) < 1e-12);
        // orthonormality
        for p in 0..n {
            for q in 0..=p {
                let dot: f64 = (0..n).map(|i| z[p * n + i] * z[q * n + i]).sum();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12, "p={p} q={q} dot={dot}");
            }
        }
    }

    #[test]
    fn complex_hermitian_via_embedding() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(2.0, 0.0),
        ];
        let (d, z) = hermitian_eigen(&a, 2).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!((d[1] - 3.0).abs() < 1e-12);
        for k in 0..2 {
            let v = &z[k * 2..(k + 1) * 2];
            for i in 0..2 {
                let av: Complex64 = (0..2).map(|j| a[i * 2 + j] * v[j]).sum();
                assert!((av - d[k] * v[i]).norm() < 1e-12);
            }
        }
        // orthonormal
        let dot: Complex64 = (0..2).map(|i| z[i].conj() * z[2 + i]).sum();
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn complex_hermitian_with_degenerate_pair() {
        // diag(5, 5, 1) rotated by a complex unitary-ish similarity would be
        // overkill; a plain degenerate diagonal with a complex off-block
        // exercises the cluster filter.
        let a = vec![
            Complex64::new(5.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(5.0, 0.0),
        ];
        let (d, z) = hermitian_eigen(&a, 3).unwrap();
        assert!((d[0] - 3.0).abs() < 1e-12);
        assert!((d[1] - 5.0).abs() < 1e-12);
        assert!((d[2] - 7.0).abs() < 1e-12);
        for p in 0..3 {
            for q in 0..p {
                let dot: Complex64 = (0..3).map(|i| z[p * 3 + i].conj() * z[q * 3 + i]).sum();
                assert!(dot.norm() < 1e-11, "p={p} q={q} overlap {dot}");
            }
        }
    }
}
