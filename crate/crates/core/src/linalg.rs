//! Dense linear-algebra helpers over the reals and their complexification.
//!
//! Complex vectors and matrices are plain `nalgebra` values over
//! `Complex<f64>`; the helpers here add rank-revealing routines on top of
//! the SVD and an eigenvalue clustering step used by every spectral test.

use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}

pub fn complexify_vec(v: &DVector<f64>) -> CVector {
    v.map(|x| C64::new(x, 0.0))
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_c(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

/// Pads a wide matrix with zero rows so the SVD returns a full right basis.
fn square_up(a: &CMatrix) -> CMatrix {
    if a.nrows() >= a.ncols() {
        a.clone()
    } else {
        let mut padded = CMatrix::zeros(a.ncols(), a.ncols());
        padded.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
        padded
    }
}

fn threshold(singular_values: &DVector<f64>, rel_tol: f64) -> f64 {
    let smax = singular_values.iter().cloned().fold(0.0, f64::max);
    rel_tol * smax
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> CMatrix {
    null_space_below(a, |sv| threshold(sv, rel_tol))
}

/// Kernel of `a` with singular values at most `abs_tol` treated as zero.
pub fn null_space_abs(a: &CMatrix, abs_tol: f64) -> CMatrix {
    null_space_below(a, |_| abs_tol)
}

fn null_space_below(a: &CMatrix, cutoff: impl Fn(&DVector<f64>) -> f64) -> CMatrix {
    let n = a.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 || max_abs_c(a) == 0.0 {
        return CMatrix::identity(n, n);
    }
    let sq = square_up(a);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let thr = cutoff(&svd.singular_values);
    let cols: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= thr)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 || max_abs_c(a) == 0.0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let thr = threshold(&sv, rel_tol);
    sv.iter().filter(|s| **s > thr).count()
}

pub fn real_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 || max_abs(a) == 0.0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let thr = threshold(&sv, rel_tol);
    sv.iter().filter(|s| **s > thr).count()
}

/// Orthonormal basis (as columns) of the kernel of a real matrix.
pub fn real_null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 || max_abs(a) == 0.0 {
        return DMatrix::identity(n, n);
    }
    let sq = if a.nrows() >= n {
        a.clone()
    } else {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    };
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let thr = threshold(&svd.singular_values, rel_tol);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= thr)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of the span of the given columns.
pub fn column_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 || max_abs(a) == 0.0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let thr = threshold(&svd.singular_values, rel_tol);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > thr)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Least-squares coefficients of `v` in the column span of `basis`, together
/// with the residual norm.
pub fn project_coeffs(basis: &DMatrix<f64>, v: &DVector<f64>) -> (DVector<f64>, f64) {
    if basis.ncols() == 0 {
        return (DVector::zeros(0), v.norm());
    }
    let svd = basis.clone().svd(true, true);
    let coeffs = svd
        .solve(v, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(basis.ncols()));
    let residual = (basis * &coeffs - v).norm();
    (coeffs, residual)
}

/// Complex analogue of [`project_coeffs`] for a real basis.
pub fn project_coeffs_c(basis: &DMatrix<f64>, v: &CVector) -> (CVector, f64) {
    let re = v.map(|z| z.re);
    let im = v.map(|z| z.im);
    let (cr, rr) = project_coeffs(basis, &re);
    let (ci, ri) = project_coeffs(basis, &im);
    let coeffs = cr.zip_map(&ci, C64::new);
    (coeffs, rr.hypot(ri))
}

/// A group of numerically coincident eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub value: C64,
    pub multiplicity: usize,
}

/// Eigenvalues of a real square matrix, merged into clusters when they lie
/// within `rel_tol · max(1, spectral radius)` of each other.
pub fn eigen_clusters(a: &DMatrix<f64>, rel_tol: f64) -> Vec<EigenCluster> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    cluster_values(&eigenvalues(a), rel_tol)
}

/// Eigenvalues of a real square matrix. The real Schur iteration can stall
/// on exactly block-structured input, so failed attempts are retried on
/// orthogonally conjugated copies.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, 2000) {
        return s.complex_eigenvalues().iter().cloned().collect();
    }
    for attempt in 1..=8 {
        let r = DMatrix::from_fn(n, n, |i, j| ((attempt * 31 + i * 7 + j * 13) as f64).sin());
        let q = r.qr().q();
        let conj = q.transpose() * a * &q;
        if let Some(s) = Schur::try_new(conj, f64::EPSILON, 5000) {
            return s.complex_eigenvalues().iter().cloned().collect();
        }
    }
    panic!("Schur iteration failed to converge on a {n}x{n} matrix");
}

pub fn cluster_values(values: &[C64], rel_tol: f64) -> Vec<EigenCluster> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = rel_tol * scale;
    // single-linkage grouping
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &z in values {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|w| (w - z).norm() <= tol))
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [] => groups.push(vec![z]),
            [first, rest @ ..] => {
                let first = *first;
                for &r in rest.iter().rev() {
                    let g = groups.remove(r);
                    groups[first].extend(g);
                }
                groups[first].push(z);
            }
        }
    }
    let mut clusters: Vec<EigenCluster> = groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            let mut mean = g.iter().fold(C64::new(0.0, 0.0), |acc, z| acc + z) / n as f64;
            if mean.im.abs() <= 1e-14 * scale {
                mean.im = 0.0;
            }
            EigenCluster {
                value: mean,
                multiplicity: n,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap()
            .then(a.value.im.partial_cmp(&b.value.im).unwrap())
    });
    clusters
}

/// Reciprocal condition number (σ_min / σ_max) of a square complex matrix.
pub fn inverse_condition(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 {
        0.0
    } else {
        smin / smax
    }
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}
