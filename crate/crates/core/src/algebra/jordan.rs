//! Multiplicative Jordan decomposition `g = g_e g_h g_u` of an invertible
//! real matrix and the escape classifier for orbits `n ↦ gⁿ v`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::AlgebraError;
use crate::linalg::{self, CMatrix, CVector, C64};

/// Commuting elliptic, hyperbolic and unipotent factors.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanTriple {
    pub elliptic: DMatrix<f64>,
    pub hyperbolic: DMatrix<f64>,
    pub unipotent: DMatrix<f64>,
}

impl JordanTriple {
    pub fn product(&self) -> DMatrix<f64> {
        &self.elliptic * &self.hyperbolic * &self.unipotent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Escape {
    Bounded,
    EscapesForward,
    EscapesBackward,
}

/// Spectral data: `P` whose column blocks span the generalized eigenspaces,
/// with one refined eigenvalue per block.
struct Spectral {
    p: CMatrix,
    p_inv: CMatrix,
    blocks: Vec<(C64, usize, usize)>,
}

const CLUSTER_LADDER: [f64; 6] = [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

fn spectral(g: &DMatrix<f64>) -> Result<Spectral, AlgebraError> {
    let n = g.nrows();
    let gc = linalg::complexify(g);
    let eig = linalg::eigenvalues(g);
    let mut last = String::new();
    // Defective eigenvalues come back split by roughly eps^(1/m); widen the
    // clustering radius until the generalized eigenspaces fill the space.
    for &tol in &CLUSTER_LADDER {
        let clusters = linalg::cluster_values(&eig, tol);
        let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (a, ca) in clusters.iter().enumerate() {
            for cb in clusters.iter().skip(a + 1) {
                if (ca.value - cb.value).norm() < 1e-10 * scale {
                    return Err(AlgebraError::NumericalDegeneracy(format!(
                        "eigenvalues {} and {} are closer than 1e-10",
                        ca.value, cb.value
                    )));
                }
            }
        }
        let mut cols: Vec<CVector> = Vec::with_capacity(n);
        let mut ranges = Vec::new();
        let mut ok = true;
        for c in &clusters {
            let shifted = &gc - CMatrix::identity(n, n) * c.value;
            let mut power = shifted.clone();
            for _ in 1..c.multiplicity {
                power = &power * &shifted;
            }
            let base = shifted.norm().max(1e-300);
            let ns = linalg::null_space_abs(&power, 1e-8_f64.max(tol * 10.0) * base.powi(c.multiplicity as i32));
            if ns.ncols() != c.multiplicity {
                ok = false;
                last = format!(
                    "generalized eigenspace of {} has dimension {} but multiplicity {}",
                    c.value,
                    ns.ncols(),
                    c.multiplicity
                );
                break;
            }
            let start = cols.len();
            cols.extend(ns.column_iter().map(|col| col.into_owned()));
            ranges.push((start, c.multiplicity));
        }
        if !ok {
            continue;
        }
        let p = CMatrix::from_columns(&cols);
        let rcond = linalg::inverse_condition(&p);
        if rcond < 1e-10 {
            last = format!("eigenvector basis is ill-conditioned (1/cond = {rcond:.2e})");
            continue;
        }
        let p_inv = p.clone().try_inverse().ok_or_else(|| {
            AlgebraError::NumericalDegeneracy("eigenvector basis is singular".into())
        })?;
        let b = &p_inv * &gc * &p;
        let blocks = ranges
            .into_iter()
            .map(|(s, m)| {
                let tr = (s..s + m).fold(C64::new(0.0, 0.0), |acc, i| acc + b[(i, i)]);
                (tr / m as f64, s, m)
            })
            .collect();
        return Ok(Spectral { p, p_inv, blocks });
    }
    Err(AlgebraError::NumericalDegeneracy(last))
}

impl Spectral {
    fn function(&self, f: impl Fn(C64) -> C64) -> DMatrix<f64> {
        let n = self.p.nrows();
        let mut d = CMatrix::zeros(n, n);
        for &(mu, s, m) in &self.blocks {
            let v = f(mu);
            for i in s..s + m {
                d[(i, i)] = v;
            }
        }
        linalg::real_part(&(&self.p * d * &self.p_inv))
    }
}

fn check_invertible(g: &DMatrix<f64>) -> Result<(), AlgebraError> {
    if g.nrows() != g.ncols() {
        return Err(AlgebraError::NotSquare {
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    let det = g.determinant();
    if det.abs() <= 1e-12 {
        return Err(AlgebraError::SingularMatrix { det: det.abs() });
    }
    Ok(())
}

/// Splits `g` into commuting factors: `S` is the semisimple part of the
/// additive Jordan–Chevalley decomposition, `g_u = S⁻¹g`, and `S = g_e g_h`
/// factors each eigenvalue `μ` as `(μ/|μ|)·|μ|` on its spectral subspace.
pub fn multiplicative_jordan(g: &DMatrix<f64>) -> Result<JordanTriple, AlgebraError> {
    check_invertible(g)?;
    let sp = spectral(g)?;
    let s_inv = sp.function(|mu| C64::new(1.0, 0.0) / mu);
    Ok(JordanTriple {
        elliptic: sp.function(|mu| mu / mu.norm()),
        hyperbolic: sp.function(|mu| C64::new(mu.norm(), 0.0)),
        unipotent: s_inv * g,
    })
}

/// Classifies the orbit `{gⁿ v}`: bounded iff `g_h g_u v = v`; otherwise by
/// the largest modulus among the spectral components of `v` (polynomial
/// growth on the unit circle counts as forward escape).
pub fn escape_classifier(g: &DMatrix<f64>, v: &nalgebra::DVector<f64>) -> Result<Escape, AlgebraError> {
    check_invertible(g)?;
    if v.len() != g.nrows() {
        return Err(AlgebraError::DimensionMismatch {
            expected: g.nrows(),
            found: v.len(),
        });
    }
    let sp = spectral(g)?;
    let vn = v.norm();
    let hu = sp.function(|mu| C64::new(mu.norm(), 0.0)) * sp.function(|mu| C64::new(1.0, 0.0) / mu) * g;
    if (&hu * v - v).norm() <= 1e-8 * (1.0 + vn) {
        return Ok(Escape::Bounded);
    }
    let n = g.nrows();
    let gc = linalg::complexify(g);
    let coeffs = &sp.p_inv * linalg::complexify_vec(v);
    let mut forward = false;
    let mut backward = false;
    for &(mu, s, m) in &sp.blocks {
        let mut comp = CVector::zeros(n);
        for i in s..s + m {
            comp += sp.p.column(i) * coeffs[i];
        }
        if comp.norm() <= 1e-8 * (1.0 + vn) {
            continue;
        }
        let modulus = mu.norm();
        if modulus > 1.0 + 1e-9 {
            forward = true;
        } else if modulus < 1.0 - 1e-9 {
            backward = true;
        } else {
            let nil = (&gc - CMatrix::identity(n, n) * mu) * &comp;
            if nil.norm() > 1e-8 * (1.0 + comp.norm()) {
                forward = true;
            }
        }
    }
    Ok(if forward {
        Escape::EscapesForward
    } else if backward {
        Escape::EscapesBackward
    } else {
        Escape::Bounded
    })
}
