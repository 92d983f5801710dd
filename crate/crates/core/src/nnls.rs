//! Nonnegative least squares (Lawson–Hanson active set) and the minimum-norm
//! point of a finitely generated convex hull built on top of it.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual: f64,
}

fn solve_subset(a: &DMatrix<f64>, b: &DVector<f64>, set: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), set.len(), |i, j| a[(i, set[j])]);
    let svd = sub.svd(true, true);
    svd.solve(b, 1e-13).unwrap_or_else(|_| DVector::zeros(set.len()))
}

/// Minimizes `‖A x - b‖` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    if n == 0 {
        return NnlsSolution { x, residual: b.norm() };
    }
    let scale = a.amax().max(1e-300) * (1.0 + b.amax());
    let tol = 10.0 * f64::EPSILON * scale * (a.nrows().max(n) as f64);
    let mut passive = vec![false; n];
    let max_outer = 30 * n.max(3);
    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let t = match candidate {
            Some(t) if w[t] > tol => t,
            _ => break,
        };
        passive[t] = true;
        loop {
            let set: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z_sub = solve_subset(a, b, &set);
            if z_sub.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &j) in set.iter().enumerate() {
                    x[j] = z_sub[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in set.iter().enumerate() {
                if z_sub[k] <= 0.0 {
                    let denom = x[j] - z_sub[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &j) in set.iter().enumerate() {
                x[j] += alpha * (z_sub[k] - x[j]);
            }
            for &j in &set {
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual = (a * &x - b).norm();
    NnlsSolution { x, residual }
}

/// Approximate minimum-norm point of `conv(vectors)`, found by NNLS with a
/// heavily weighted row enforcing `Σ y = 1`. At the optimum every vector
/// `v` satisfies `v·p > 0` whenever the hull avoids the origin, so a nonzero
/// result strictly separates the hull from 0.
pub fn min_norm_point(vectors: &[DVector<f64>]) -> (DVector<f64>, DVector<f64>) {
    let k = vectors.len();
    let d = vectors.first().map_or(0, |v| v.len());
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let weight = 1e3 * scale;
    let mut a = DMatrix::zeros(d + 1, k);
    for (j, v) in vectors.iter().enumerate() {
        a.view_mut((0, j), (d, 1)).copy_from(v);
        a[(d, j)] = weight;
    }
    let mut b = DVector::zeros(d + 1);
    b[d] = weight;
    let sol = nnls(&a, &b);
    let mut p = DVector::zeros(d);
    for (j, v) in vectors.iter().enumerate() {
        p += v * sol.x[j];
    }
    (sol.x, p)
}

/// Some `x` with `v·x > 0` for every given vector, if one exists.
pub fn strictly_positive_point(vectors: &[DVector<f64>]) -> Option<DVector<f64>> {
    let (_, p) = min_norm_point(vectors);
    let pn = p.norm();
    if pn == 0.0 {
        return None;
    }
    vectors
        .iter()
        .all(|v| v.dot(&p) > 1e-9 * v.norm() * pn)
        .then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simple_cases() {
        let a = DMatrix::identity(2, 2);
        let s = nnls(&a, &DVector::from_vec(vec![2.0, 3.0]));
        assert!(s.residual < 1e-12);
        let s = nnls(&a, &DVector::from_vec(vec![-1.0, 3.0]));
        assert!((s.residual - 1.0).abs() < 1e-12);
        assert_eq!(s.x[0], 0.0);
    }

    #[test]
    fn separation() {
        let v = |a: f64, b: f64| DVector::from_vec(vec![a, b]);
        assert!(strictly_positive_point(&[v(1.0, 0.0), v(0.0, 1.0)]).is_some());
        assert!(strictly_positive_point(&[v(1.0, 0.0), v(-1.0, 0.0)]).is_none());
        assert!(strictly_positive_point(&[v(1.0, 0.0), v(-1.0, 1e-3)]).is_some());
        assert!(strictly_positive_point(&[v(1.0, 1.0), v(-1.0, 0.0), v(0.0, -1.0)]).is_none());
    }

    proptest! {
        #[test]
        fn kkt_conditions(entries in prop::collection::vec(-3.0f64..3.0, 12), rhs in prop::collection::vec(-3.0f64..3.0, 4)) {
            let a = DMatrix::from_vec(4, 3, entries);
            let b = DVector::from_vec(rhs);
            let s = nnls(&a, &b);
            let w = a.transpose() * (&b - &a * &s.x);
            for j in 0..3 {
                prop_assert!(s.x[j] >= 0.0);
                prop_assert!(w[j] <= 1e-8);
                if s.x[j] > 0.0 {
                    prop_assert!(w[j].abs() <= 1e-8);
                }
            }
        }
    }
}
