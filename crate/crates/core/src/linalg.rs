//! Small dense complex linear algebra for the operator-level checks.
//!
//! Everything here targets desk-scale matrices (dim <= 16), favoring
//! accuracy over asymptotics: the matrix exponential scales the argument
//! below 1/16 and sums the series to machine precision before squaring
//! back, and the eigensolver is a cyclic complex Jacobi iteration.

use ndarray::Array2;
use num_complex::Complex64 as C64;

pub(crate) fn identity(n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub(crate) fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((c, r), |(i, j)| a[(j, i)].conj())
}

pub(crate) fn frobenius_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    frobenius_norm(&(a - &adjoint(a)))
}

pub(crate) fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    frobenius_norm(&(adjoint(u).dot(u) - identity(n)))
}

/// Matrix exponential by scaling-and-squaring around a machine-precision
/// truncated series (accurate to ~1e-14 for the matrix sizes used here).
pub(crate) fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let norm = frobenius_norm(a);
    let squarings = if norm > 0.0625 {
        (norm / 0.0625).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = 2f64.powi(-(squarings as i32));
    let scaled = a.mapv(|v| v * scale);

    // Horner evaluation of the truncated exponential series.
    const TERMS: usize = 18;
    let mut result = identity(n);
    for k in (1..=TERMS).rev() {
        result = result.mapv(|v| v / k as f64);
        result = scaled.dot(&result) + identity(n);
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. No eigenvalue ordering is imposed; the columns of `vectors`
/// are orthonormal and `a = V diag(values) V^dagger`.
pub(crate) struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

pub(crate) fn eigh(a: &Array2<C64>) -> Eigh {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = identity(n);
    let scale = frobenius_norm(a).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |q| *q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phi = apq.arg();
                let r = apq.norm();
                // Rotation angle for the phase-stripped real 2x2 block.
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary block G = diag(1, e^{-i phi}) . [[c, s], [-s, c]]:
                // G[p][p] = c, G[p][q] = s, G[q][p] = -s e^{-i phi},
                // G[q][q] = c e^{-i phi}; update M <- G^dagger M G, V <- V G.
                let e_pos = C64::from_polar(1.0, phi);
                let e_neg = C64::from_polar(1.0, -phi);
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * s * e_neg;
                    m[(i, q)] = mip * s + miq * c * e_neg;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * s * e_pos;
                    m[(q, j)] = mpj * s + mqj * c * e_pos;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * s * e_neg;
                    v[(i, q)] = vip * s + viq * c * e_neg;
                }
            }
        }
    }

    let values = (0..n).map(|i| m[(i, i)].re).collect();
    Eigh { values, vectors: v }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LogFailure {
    /// An eigenvalue sits on the branch cut (holonomy phase at +-pi).
    BranchCut,
}

/// Eigendecomposition of a unitary (normal) matrix through its commuting
/// Hermitian parts: eigenspaces of `(U+U^dagger)/2` are refined by
/// diagonalizing the projection of `(U-U^dagger)/(2i)` inside each
/// cluster. Returns unimodular eigenvalues and orthonormal eigenvectors.
pub(crate) fn unitary_eig(u: &Array2<C64>) -> (Vec<C64>, Array2<C64>) {
    let n = u.nrows();
    let uh = adjoint(u);
    let real_part = Array2::from_shape_fn((n, n), |(i, j)| (u[(i, j)] + uh[(i, j)]) / 2.0);
    let imag_part = Array2::from_shape_fn((n, n), |(i, j)| {
        (u[(i, j)] - uh[(i, j)]) / C64::new(0.0, 2.0)
    });

    let first = eigh(&real_part);
    // Cluster nearly equal eigenvalues of the real part; within each
    // cluster the imaginary part separates the eigenvectors.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| first.values[i].partial_cmp(&first.values[j]).unwrap());
    let tol = 1e-7 * (1.0 + frobenius_norm(&real_part));

    let mut vectors = Array2::zeros((n, n));
    let mut next_col = 0;
    let mut idx = 0;
    while idx < order.len() {
        let mut cluster = vec![order[idx]];
        while idx + cluster.len() < order.len()
            && (first.values[order[idx + cluster.len()]] - first.values[order[idx]]).abs() <= tol
        {
            cluster.push(order[idx + cluster.len()]);
        }
        let k = cluster.len();
        if k == 1 {
            for i in 0..n {
                vectors[(i, next_col)] = first.vectors[(i, cluster[0])];
            }
            next_col += 1;
        } else {
            // Project the imaginary part into the cluster subspace.
            let basis = Array2::from_shape_fn((n, k), |(i, c)| first.vectors[(i, cluster[c])]);
            let projected = adjoint(&basis).dot(&imag_part).dot(&basis);
            let inner = eigh(&projected);
            let refined = basis.dot(&inner.vectors);
            for c in 0..k {
                for i in 0..n {
                    vectors[(i, next_col + c)] = refined[(i, c)];
                }
            }
            next_col += k;
        }
        idx += k;
    }

    // Rayleigh quotients give the unitary eigenvalues; renormalize to the
    // unit circle to strip residual roundoff.
    let mut values = Vec::with_capacity(n);
    for c in 0..n {
        let mut uv = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                uv[i] += u[(i, j)] * vectors[(j, c)];
            }
        }
        let mut lambda = C64::new(0.0, 0.0);
        for i in 0..n {
            lambda += vectors[(i, c)].conj() * uv[i];
        }
        let modulus = lambda.norm();
        if modulus > 0.0 {
            lambda /= modulus;
        } else {
            lambda = C64::new(1.0, 0.0);
        }
        values.push(lambda);
    }
    (values, vectors)
}

/// Principal matrix logarithm of a unitary: eigenphases are taken in
/// `(-pi, pi)` and phases within `branch_tol` of the cut are rejected.
pub(crate) fn principal_log_unitary(
    u: &Array2<C64>,
    branch_tol: f64,
) -> Result<Array2<C64>, LogFailure> {
    let n = u.nrows();
    let (values, vectors) = unitary_eig(u);
    for lambda in &values {
        if std::f64::consts::PI - lambda.arg().abs() < branch_tol {
            return Err(LogFailure::BranchCut);
        }
    }
    let mut log = Array2::zeros((n, n));
    for c in 0..n {
        let theta = values[c].arg();
        for i in 0..n {
            for j in 0..n {
                log[(i, j)] += vectors[(i, c)] * vectors[(j, c)].conj() * C64::new(0.0, theta);
            }
        }
    }
    Ok(log)
}
