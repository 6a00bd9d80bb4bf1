//! One-sided Jacobi SVD and cyclic Jacobi symmetric eigensolver.
//!
//! Both routines are dense `O(n³)` per sweep and intended for the few-hundred
//! dimensional matrices that appear in the game constructions.

use super::matrix::DenseMatrix;
use super::{dot, norm};
use crate::error::{check_len, Error, Result};

/// Singular values below `ZERO_SV_REL * σ_max` are treated as exact zeros.
pub const ZERO_SV_REL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, one per column of the thin factor (`rows × k`).
    pub u: DenseMatrix,
    /// Singular values, sorted descending.
    pub s: Vec<f64>,
    /// Right singular vectors (`cols × k`).
    pub v: DenseMatrix,
}

impl Svd {
    /// Numerical rank under the [`ZERO_SV_REL`] threshold.
    pub fn rank(&self) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&s| s >= ZERO_SV_REL * smax).count()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &DenseMatrix) -> Svd {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.transpose());
        Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        }
    }
}

fn svd_tall(a: &DenseMatrix) -> Svd {
    let m = a.rows();
    let n = a.cols();
    // column-major working copies
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..m).map(|r| a.get(r, c)).collect())
        .collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let eps = f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = vcols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = DenseMatrix::zeros(m, n);
    let mut v = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sj = norms[j];
        s.push(sj);
        for r in 0..m {
            u.set(r, k, if sj > 0.0 { cols[j][r] / sj } else { 0.0 });
        }
        for r in 0..n {
            v.set(r, k, vcols[j][r]);
        }
    }
    Svd { u, s, v }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigensolver. Rejects inputs whose asymmetry exceeds `1e-12`
/// relative to the largest entry.
pub fn symmetric_eigen(s: &DenseMatrix) -> Result<SymmetricEigen> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            context: "symmetric_eigen (square)",
            expected: s.rows(),
            actual: s.cols(),
        });
    }
    let scale = s.max_abs().max(1.0);
    let asym = s.max_asymmetry();
    if asym > 1e-12 * scale {
        return Err(Error::Asymmetric(asym));
    }
    let n = s.rows();
    let mut a = s.symmetrized();
    let mut v = DenseMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.get(p, q) * a.get(p, q);
            }
        }
        let diag: f64 = (0..n).map(|i| a.get(i, i) * a.get(i, i)).sum();
        if off <= 1e-32 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok(SymmetricEigen { values, vectors })
}

/// `(σ_max, σ_min_nonzero)`; a matrix with no nonzero singular value is degenerate.
pub fn extremal_singular_values(a: &DenseMatrix) -> Result<(f64, f64)> {
    let s = svd(a).s;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::Degenerate(
            "matrix has no nonzero singular value".into(),
        ));
    }
    let smin = s
        .iter()
        .copied()
        .filter(|&v| v >= ZERO_SV_REL * smax)
        .fold(f64::INFINITY, f64::min);
    Ok((smax, smin))
}

/// `(λ_max, λ_min)` of a symmetric matrix.
pub fn extremal_symmetric_eigs(s: &DenseMatrix) -> Result<(f64, f64)> {
    let e = symmetric_eigen(s)?;
    match (e.values.last(), e.values.first()) {
        (Some(&hi), Some(&lo)) => Ok((hi, lo)),
        _ => Err(Error::Degenerate("empty matrix".into())),
    }
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn solve_least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_len("solve_least_squares", a.rows(), b.len())?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares right-hand side"));
    }
    let dec = svd(a);
    let rank = dec.rank();
    let mut x = vec![0.0; a.cols()];
    for k in 0..rank {
        let mut coef = 0.0;
        for r in 0..a.rows() {
            coef += dec.u.get(r, k) * b[r];
        }
        coef /= dec.s[k];
        for (c, xc) in x.iter_mut().enumerate() {
            *xc += coef * dec.v.get(c, k);
        }
    }
    Ok(x)
}

/// Orthonormal `n × n` matrix from modified Gram–Schmidt on the columns of `g`.
pub fn orthonormalize(g: &DenseMatrix) -> Result<DenseMatrix> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch {
            context: "orthonormalize (square)",
            expected: g.rows(),
            actual: g.cols(),
        });
    }
    let n = g.rows();
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| g.get(r, c)).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = dot(&done[k], &rest[0]);
            for (x, &q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        let nj = norm(&cols[j]);
        if nj < 1e-12 {
            return Err(Error::Degenerate("columns are linearly dependent".into()));
        }
        cols[j].iter_mut().for_each(|x| *x /= nj);
    }
    Ok(DenseMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.standard_normal())
    }

    #[test]
    fn identity_solve() {
        let x = solve_least_squares(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneous_system_gives_zero() {
        let mut rng = RngStream::new(3, 0);
        let a = random_matrix(5, 4, &mut rng);
        let x = solve_least_squares(&a, &[0.0; 5]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spd_residual_is_tiny() {
        let mut rng = RngStream::new(7, 0);
        let g = random_matrix(8, 8, &mut rng);
        let a = g
            .transpose()
            .matmul(&g)
            .unwrap()
            .add(&DenseMatrix::identity(8))
            .unwrap();
        let b: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
        let x = solve_least_squares(&a, &b).unwrap();
        let ax = a.matvec(&x).unwrap();
        let res: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&res) / norm(&b) <= 1e-10);
    }

    #[test]
    fn least_squares_residual_orthogonal_to_range() {
        let mut rng = RngStream::new(8, 0);
        let a = random_matrix(9, 4, &mut rng);
        let b: Vec<f64> = (0..9).map(|_| rng.standard_normal()).collect();
        let x = solve_least_squares(&a, &b).unwrap();
        let ax = a.matvec(&x).unwrap();
        let res: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        let proj = a.tmatvec(&res).unwrap();
        assert!(norm(&proj) <= 1e-10 * norm(&b) * a.frobenius_norm());
    }

    #[test]
    fn min_norm_for_rank_deficient() {
        // x1 + x2 = 2 has minimum-norm solution (1, 1)
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let x = solve_least_squares(&a, &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = solve_least_squares(&DenseMatrix::identity(3), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn extremal_sv_examples() {
        assert_eq!(
            extremal_singular_values(&DenseMatrix::identity(4)).unwrap(),
            (1.0, 1.0)
        );
        let (hi, lo) = extremal_singular_values(&DenseMatrix::from_diag(&[3.0, 0.0, 1.0])).unwrap();
        assert!((hi - 3.0).abs() < 1e-14 && (lo - 1.0).abs() < 1e-14);
        assert!(matches!(
            extremal_singular_values(&DenseMatrix::zeros(3, 2)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn extremal_eig_examples() {
        let (hi, lo) = extremal_symmetric_eigs(&DenseMatrix::from_diag(&[2.0, -1.0])).unwrap();
        assert_eq!((hi, lo), (2.0, -1.0));
        assert_eq!(
            extremal_symmetric_eigs(&DenseMatrix::zeros(3, 3)).unwrap(),
            (0.0, 0.0)
        );
        let asym = DenseMatrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            extremal_symmetric_eigs(&asym),
            Err(Error::Asymmetric(_))
        ));
    }

    #[test]
    fn rayleigh_quotients_are_bracketed() {
        let mut rng = RngStream::new(12, 0);
        let g = random_matrix(12, 12, &mut rng);
        let s = g.symmetrized();
        let (hi, lo) = extremal_symmetric_eigs(&s).unwrap();
        for _ in 0..100 {
            let v: Vec<f64> = (0..12).map(|_| rng.standard_normal()).collect();
            let rq = s.quad_form(&v) / dot(&v, &v);
            assert!(rq <= hi * (1.0 + 1e-12) + 1e-12 && rq >= lo - 1e-12 * lo.abs() - 1e-12);
        }
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = RngStream::new(5, 1);
        for &(r, c) in &[(6, 4), (4, 6), (5, 5)] {
            let a = random_matrix(r, c, &mut rng);
            let d = svd(&a);
            for i in 0..r {
                for j in 0..c {
                    let mut v = 0.0;
                    for k in 0..d.s.len() {
                        v += d.u.get(i, k) * d.s[k] * d.v.get(j, k);
                    }
                    assert!((v - a.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn orthonormal_basis_is_orthonormal() {
        let mut rng = RngStream::new(9, 0);
        let q = orthonormalize(&random_matrix(6, 6, &mut rng)).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq.get(i, j) - want).abs() < 1e-12);
            }
        }
    }
}
