//! Double description (Motzkin) conversion from `{x : A x >= 0}` to
//! generators, with explicit lineality.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    /// Extreme rays modulo the lineality space, unit length.
    pub rays: Vec<DVector<f64>>,
    /// Orthonormal-ish basis of the lineality space.
    pub lineality: Vec<DVector<f64>>,
}

struct Ray {
    v: DVector<f64>,
    /// Indices of processed constraints tight at `v`.
    zeros: Vec<bool>,
}

const ZERO: f64 = 1e-10;

fn normalized(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Generators of `{x ∈ R^dim : a·x >= 0 for every row a}`.
pub fn generators_of(dim: usize, rows: &[DVector<f64>]) -> Generated {
    let mut lineality: Vec<DVector<f64>> = (0..dim)
        .map(|i| DVector::from_fn(dim, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    let m = rows.len();
    for (step, a) in rows.iter().enumerate() {
        let a = normalized(a.clone());
        let pivot = lineality
            .iter()
            .enumerate()
            .map(|(i, l)| (i, a.dot(l)))
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap());
        match pivot {
            Some((p, ap)) if ap.abs() > ZERO => {
                let mut lstar = lineality.remove(p);
                let mut ap = ap;
                if ap < 0.0 {
                    lstar = -lstar;
                    ap = -ap;
                }
                lineality = lineality
                    .into_iter()
                    .map(|l| {
                        let c = a.dot(&l) / ap;
                        normalized(l - &lstar * c)
                    })
                    .collect();
                for r in rays.iter_mut() {
                    let c = a.dot(&r.v) / ap;
                    r.v = normalized(&r.v - &lstar * c);
                    r.zeros[step] = true;
                }
                // tight on every earlier constraint, since l* was in the lineality space
                let zeros = (0..m).map(|k| k < step).collect();
                rays.push(Ray {
                    v: normalized(lstar),
                    zeros,
                });
            }
            _ => {
                let vals: Vec<f64> = rays.iter().map(|r| a.dot(&r.v)).collect();
                let plus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > ZERO).collect();
                let minus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -ZERO).collect();
                let mut next: Vec<Ray> = Vec::new();
                for &i in &plus {
                    next.push(Ray {
                        v: rays[i].v.clone(),
                        zeros: rays[i].zeros.clone(),
                    });
                }
                for (i, r) in rays.iter().enumerate() {
                    if vals[i].abs() <= ZERO {
                        let mut zeros = r.zeros.clone();
                        zeros[step] = true;
                        next.push(Ray { v: r.v.clone(), zeros });
                    }
                }
                for &i in &plus {
                    for &j in &minus {
                        if !adjacent(&rays, i, j, step) {
                            continue;
                        }
                        let v = &rays[i].v * (-vals[j]) + &rays[j].v * vals[i];
                        let mut zeros: Vec<bool> = rays[i]
                            .zeros
                            .iter()
                            .zip(&rays[j].zeros)
                            .map(|(a, b)| *a && *b)
                            .collect();
                        zeros[step] = true;
                        next.push(Ray {
                            v: normalized(v),
                            zeros,
                        });
                    }
                }
                rays = next;
            }
        }
    }
    let mut out: Vec<DVector<f64>> = Vec::new();
    for r in rays {
        if r.v.norm() > 0.5 && !out.iter().any(|o| (o - &r.v).amax() <= 1e-9) {
            out.push(r.v);
        }
    }
    Generated { rays: out, lineality }
}

/// Combinatorial adjacency: no third ray is tight on every constraint that
/// is tight at both `i` and `j`.
fn adjacent(rays: &[Ray], i: usize, j: usize, upto: usize) -> bool {
    let common: Vec<usize> = (0..upto).filter(|&k| rays[i].zeros[k] && rays[j].zeros[k]).collect();
    !rays
        .iter()
        .enumerate()
        .any(|(k, r)| k != i && k != j && common.iter().all(|&c| r.zeros[c]))
}

/// Generators of the dual cone `{φ : φ(g) >= 0}`, returned as a matrix with
/// one generator per column (lineality directions appear with both signs).
pub fn dual_generators(dim: usize, gens: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let g = generators_of(dim, gens);
    let mut out = g.rays;
    for l in g.lineality {
        out.push(-&l);
        out.push(l);
    }
    out
}

pub fn as_matrix(dim: usize, vs: &[DVector<f64>]) -> DMatrix<f64> {
    if vs.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(vs)
    }
}
