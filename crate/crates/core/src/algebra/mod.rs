//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! A [`LieAlgebra`] stores the dense tensor `c[i][j][k]` with
//! `[e_i, e_j] = Σ_k c[i][j][k] e_k`. Construction always goes through the
//! sparse-triple form `(i, j, k, value)` with `i < j`; the antisymmetric
//! completion is automatic and the Jacobi identity is checked on the way in.

mod catalog;
mod io;
mod jordan;

pub use catalog::*;
pub use io::{AlgebraFile, MetaFile};
pub use jordan::{escape_classifier, multiplicative_jordan, Escape, JordanTriple};

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::config::Tolerances;
use crate::linalg::{self, CVector, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{field}: {reason}")]
    InvalidStructure { field: String, reason: String },
    #[error("structure: Jacobi identity violated with residual {residual:.3e} at basis triple ({i}, {j}, {k})")]
    JacobiViolation {
        residual: f64,
        i: usize,
        j: usize,
        k: usize,
    },
    #[error("meta.{field}: {reason}")]
    InvalidMeta { field: String, reason: String },
    #[error("matrix is singular (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
}

macro_rules! coeff_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(DVector<f64>);

        impl $name {
            pub fn new(coeffs: Vec<f64>) -> Self {
                Self(DVector::from_vec(coeffs))
            }

            pub fn from_vector(v: DVector<f64>) -> Self {
                Self(v)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(DVector::zeros(dim))
            }

            /// The `i`-th (dual) basis vector.
            pub fn basis(dim: usize, i: usize) -> Self {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                Self(v)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coeffs(&self) -> &DVector<f64> {
                &self.0
            }

            pub fn into_vector(self) -> DVector<f64> {
                self.0
            }

            pub fn to_vec(&self) -> Vec<f64> {
                self.0.iter().cloned().collect()
            }
        }

        impl Deref for $name {
            type Target = DVector<f64>;
            fn deref(&self) -> &DVector<f64> {
                &self.0
            }
        }

        impl From<DVector<f64>> for $name {
            fn from(v: DVector<f64>) -> Self {
                Self(v)
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self::new(v)
            }
        }

        impl Add for &$name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name(&self.0 + &rhs.0)
            }
        }

        impl Sub for &$name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name(&self.0 - &rhs.0)
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, rhs: f64) -> $name {
                $name(&self.0 * rhs)
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-&self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_seq(self.0.iter())
            }
        }
    };
}

coeff_newtype!(
    /// An element of the algebra, in the basis `e_0 … e_{dim-1}`.
    Element
);
coeff_newtype!(
    /// A linear functional on the algebra, in the dual basis.
    Functional
);

impl Functional {
    /// The pairing `λ(x)`.
    pub fn eval(&self, x: &Element) -> f64 {
        self.0.dot(&x.0)
    }
}

/// Structural metadata of a Spindler-type decomposition `g = (z ⊕ V) ⋊ l`,
/// together with a compactly embedded Cartan subalgebra. An empty `cartan`
/// means no Cartan subalgebra was supplied.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecompositionMeta {
    pub center: Vec<DVector<f64>>,
    pub cartan: Vec<DVector<f64>>,
    pub v_space: Vec<DVector<f64>>,
    pub levi: Vec<DVector<f64>>,
}

impl DecompositionMeta {
    pub fn has_cartan(&self) -> bool {
        !self.cartan.is_empty()
    }
}

pub(crate) fn columns(vectors: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    if vectors.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(vectors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    name: String,
    basis_names: Vec<String>,
    structure: Vec<f64>,
    meta: Option<DecompositionMeta>,
}

impl LieAlgebra {
    /// Builds an algebra from sparse structure constants `(i, j, k, c)` with
    /// `i < j`, meaning `[e_i, e_j] ∋ c·e_k`. Repeated `(i, j, k)` entries are
    /// summed.
    pub fn from_triples(
        name: impl Into<String>,
        basis_names: Vec<String>,
        triples: &[(usize, usize, usize, f64)],
        meta: Option<DecompositionMeta>,
    ) -> Result<Self, AlgebraError> {
        let dim = basis_names.len();
        if dim == 0 {
            return Err(AlgebraError::InvalidStructure {
                field: "dim".into(),
                reason: "must be positive".into(),
            });
        }
        let mut structure = vec![0.0; dim * dim * dim];
        for (n, &(i, j, k, v)) in triples.iter().enumerate() {
            if i >= dim || j >= dim || k >= dim {
                return Err(AlgebraError::InvalidStructure {
                    field: format!("structure[{n}]"),
                    reason: format!("index out of range for dimension {dim}"),
                });
            }
            if i >= j {
                return Err(AlgebraError::InvalidStructure {
                    field: format!("structure[{n}]"),
                    reason: format!("requires i < j, got i = {i}, j = {j}"),
                });
            }
            if !v.is_finite() {
                return Err(AlgebraError::InvalidStructure {
                    field: format!("structure[{n}]"),
                    reason: "value is not finite".into(),
                });
            }
            structure[(i * dim + j) * dim + k] += v;
            structure[(j * dim + i) * dim + k] -= v;
        }
        let algebra = LieAlgebra {
            name: name.into(),
            basis_names,
            structure,
            meta: None,
        };
        algebra.check_jacobi(&Tolerances::DEFAULT)?;
        match meta {
            Some(m) => algebra.with_meta(m),
            None => Ok(algebra),
        }
    }

    /// Builds an algebra from a dense bracket function on basis indices.
    pub(crate) fn from_bracket_fn(
        name: impl Into<String>,
        basis_names: Vec<String>,
        bracket: impl Fn(usize, usize) -> DVector<f64>,
    ) -> Result<Self, AlgebraError> {
        let dim = basis_names.len();
        let mut triples = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = bracket(i, j);
                for (k, &c) in v.iter().enumerate() {
                    if c.abs() > 1e-14 {
                        triples.push((i, j, k, c));
                    }
                }
            }
        }
        Self::from_triples(name, basis_names, &triples, None)
    }

    /// Attaches decomposition metadata after validating it.
    pub fn with_meta(mut self, meta: DecompositionMeta) -> Result<Self, AlgebraError> {
        self.validate_meta(&meta, &Tolerances::DEFAULT)?;
        self.meta = Some(meta);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn meta(&self) -> Option<&DecompositionMeta> {
        self.meta.as_ref()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `c[i][j][k]`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    /// Sparse triples `(i, j, k, c)` with `i < j` describing the algebra.
    pub fn triples(&self) -> Vec<(usize, usize, usize, f64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let c = self.structure_constant(i, j, k);
                    if c != 0.0 {
                        out.push((i, j, k, c));
                    }
                }
            }
        }
        out
    }

    pub fn element(&self, coeffs: Vec<f64>) -> Result<Element, AlgebraError> {
        self.check_len(coeffs.len())?;
        Ok(Element::new(coeffs))
    }

    pub fn functional(&self, coeffs: Vec<f64>) -> Result<Functional, AlgebraError> {
        self.check_len(coeffs.len())?;
        Ok(Functional::new(coeffs))
    }

    fn check_len(&self, n: usize) -> Result<(), AlgebraError> {
        if n != self.dim() {
            Err(AlgebraError::DimensionMismatch {
                expected: self.dim(),
                found: n,
            })
        } else {
            Ok(())
        }
    }

    pub fn bracket(&self, a: &Element, b: &Element) -> Result<Element, AlgebraError> {
        self.check_len(a.dim())?;
        self.check_len(b.dim())?;
        Ok(Element(self.bracket_vec(a, b)))
    }

    /// Bracket on raw coordinate vectors; lengths are not checked.
    pub fn bracket_vec(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let ab = a[i] * b[j];
                if ab == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += ab * self.structure[base + k];
                }
            }
        }
        out
    }

    /// Complex-bilinear extension of the bracket to `g_C`.
    pub fn bracket_c(&self, a: &CVector, b: &CVector) -> CVector {
        let d = self.dim();
        let mut out = CVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let ab = a[i] * b[j];
                if ab == C64::new(0.0, 0.0) {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += ab * self.structure[base + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad x`; column `j` is `[x, e_j]`.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let base = (i * d + j) * d;
                for k in 0..d {
                    m[(k, j)] += x[i] * self.structure[base + k];
                }
            }
        }
        m
    }

    /// `κ(x, y) = tr(ad x ad y)`.
    pub fn killing_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (self.ad_matrix(x) * self.ad_matrix(y)).trace()
    }

    pub fn killing_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let ads: Vec<DMatrix<f64>> = (0..d)
            .map(|i| self.ad_matrix(&DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })))
            .collect();
        DMatrix::from_fn(d, d, |i, j| (&ads[i] * &ads[j]).trace())
    }

    /// `ad x` is semisimple with purely imaginary spectrum.
    pub fn is_elliptic_element(&self, x: &DVector<f64>, tol: &Tolerances) -> bool {
        is_elliptic_matrix(&self.ad_matrix(x), tol)
    }

    /// `Ad(exp y) = e^{ad y}`.
    pub fn adjoint_exp(&self, y: &DVector<f64>) -> DMatrix<f64> {
        self.ad_matrix(y).exp()
    }

    /// Matrix of the coadjoint action of `exp y` on functional coordinates:
    /// `λ ↦ λ ∘ Ad(exp(-y))`.
    pub fn coadjoint_exp(&self, y: &DVector<f64>) -> DMatrix<f64> {
        (-self.ad_matrix(y)).exp().transpose()
    }

    /// Maximum absolute Jacobi residual over all basis triples.
    pub fn jacobi_residual(&self) -> (f64, (usize, usize, usize)) {
        let d = self.dim();
        let mut worst = (0.0, (0, 0, 0));
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    for l in 0..d {
                        let mut s = 0.0;
                        for m in 0..d {
                            s += self.structure_constant(i, j, m) * self.structure_constant(m, k, l)
                                + self.structure_constant(j, k, m) * self.structure_constant(m, i, l)
                                + self.structure_constant(k, i, m) * self.structure_constant(m, j, l);
                        }
                        if s.abs() > worst.0 {
                            worst = (s.abs(), (i, j, k));
                        }
                    }
                }
            }
        }
        worst
    }

    fn check_jacobi(&self, tol: &Tolerances) -> Result<(), AlgebraError> {
        let (residual, (i, j, k)) = self.jacobi_residual();
        let scale = self.structure.iter().fold(1.0_f64, |a, c| a.max(c.abs()));
        if residual > tol.algebraic * scale * scale {
            return Err(AlgebraError::JacobiViolation { residual, i, j, k });
        }
        Ok(())
    }

    /// Basis (columns) of the centralizer of a family of elements.
    pub fn centralizer(&self, elements: &[DVector<f64>], tol: &Tolerances) -> DMatrix<f64> {
        let d = self.dim();
        if elements.is_empty() {
            return DMatrix::identity(d, d);
        }
        let mut stacked = DMatrix::zeros(d * elements.len(), d);
        for (n, h) in elements.iter().enumerate() {
            stacked
                .view_mut((n * d, 0), (d, d))
                .copy_from(&self.ad_matrix(h));
        }
        linalg::real_null_space(&stacked, tol.rank)
    }

    /// Basis (columns) of the center `z(g)`.
    pub fn center(&self, tol: &Tolerances) -> DMatrix<f64> {
        let d = self.dim();
        let basis: Vec<DVector<f64>> = (0..d).map(|i| unit(d, i)).collect();
        self.centralizer(&basis, tol)
    }

    fn validate_meta(&self, meta: &DecompositionMeta, tol: &Tolerances) -> Result<(), AlgebraError> {
        let d = self.dim();
        let sets = [
            ("center", &meta.center),
            ("cartan", &meta.cartan),
            ("v_space", &meta.v_space),
            ("levi", &meta.levi),
        ];
        for (field, set) in sets {
            for (n, v) in set.iter().enumerate() {
                if v.len() != d {
                    return Err(AlgebraError::InvalidMeta {
                        field: format!("{field}[{n}]"),
                        reason: format!("length {} does not match dimension {d}", v.len()),
                    });
                }
            }
            let m = columns(set, d);
            if linalg::real_rank(&m, tol.rank) != set.len() {
                return Err(AlgebraError::InvalidMeta {
                    field: field.into(),
                    reason: "basis vectors are linearly dependent".into(),
                });
            }
        }
        let scale = |v: &DVector<f64>| 1.0 + v.norm();
        for (n, z) in meta.center.iter().enumerate() {
            if linalg::max_abs(&self.ad_matrix(z)) > tol.spectral * scale(z) {
                return Err(AlgebraError::InvalidMeta {
                    field: format!("center[{n}]"),
                    reason: "element is not central".into(),
                });
            }
        }
        if meta.has_cartan() {
            let cartan = columns(&meta.cartan, d);
            for (n, z) in meta.center.iter().enumerate() {
                if linalg::project_coeffs(&cartan, z).1 > tol.spectral * scale(z) {
                    return Err(AlgebraError::InvalidMeta {
                        field: format!("center[{n}]"),
                        reason: "center is not contained in cartan".into(),
                    });
                }
            }
            for (a, x) in meta.cartan.iter().enumerate() {
                for y in meta.cartan.iter().skip(a + 1) {
                    if self.bracket_vec(x, y).amax() > tol.spectral * scale(x) * scale(y) {
                        return Err(AlgebraError::InvalidMeta {
                            field: "cartan".into(),
                            reason: "subspace is not abelian".into(),
                        });
                    }
                }
            }
            let cent = self.centralizer(&meta.cartan, tol);
            if cent.ncols() != meta.cartan.len() {
                return Err(AlgebraError::InvalidMeta {
                    field: "cartan".into(),
                    reason: format!(
                        "centralizer has dimension {} but the subspace has dimension {}",
                        cent.ncols(),
                        meta.cartan.len()
                    ),
                });
            }
        }
        let vl: Vec<DVector<f64>> = meta.v_space.iter().chain(meta.levi.iter()).cloned().collect();
        if linalg::real_rank(&columns(&vl, d), tol.rank) != vl.len() {
            return Err(AlgebraError::InvalidMeta {
                field: "levi".into(),
                reason: "v_space and levi intersect nontrivially".into(),
            });
        }
        let center = columns(&meta.center, d);
        for (a, v) in meta.v_space.iter().enumerate() {
            for w in meta.v_space.iter().skip(a + 1) {
                let b = self.bracket_vec(v, w);
                if linalg::project_coeffs(&center, &b).1 > tol.spectral * scale(v) * scale(w) {
                    return Err(AlgebraError::InvalidMeta {
                        field: "v_space".into(),
                        reason: "[V, V] is not contained in the center".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.name, self.dim())
    }
}

pub(crate) fn unit(d: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

/// Semisimple with purely imaginary spectrum: every eigen-cluster has
/// negligible real part and full geometric multiplicity.
pub fn is_elliptic_matrix(m: &DMatrix<f64>, tol: &Tolerances) -> bool {
    let n = m.nrows();
    let scale = 1.0_f64.max(linalg::max_abs(m));
    let clusters = linalg::eigen_clusters(m, tol.spectral);
    let mc = linalg::complexify(m);
    clusters.iter().all(|c| {
        if c.value.re.abs() > tol.spectral * scale {
            return false;
        }
        let shifted = &mc - linalg::CMatrix::identity(n, n) * c.value;
        let geometric = n - linalg::rank(&shifted, tol.rank);
        geometric == c.multiplicity
    })
}
