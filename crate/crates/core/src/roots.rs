//! Root decomposition of `g_C` with respect to a compactly embedded Cartan
//! subalgebra `t`, positive systems, Weyl groups and cone potential.
//!
//! Sign convention: every root is stored through `beta`, with
//! `α(h) = i·beta(h)` on `t`. Formulas phrased with `iα` go through
//! [`RootDatum::i_alpha`], which returns `iα(x) = -beta(x)`. A positive
//! system determined by a regular `x0` is `Δ⁺ = {α : iα(x0) > 0}`.
//!
//! Elements of `t` are handled in Cartan coordinates: a vector `a` of length
//! `dim t` stands for `Σ a_j h_j` where `h_j` is the supplied Cartan basis.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{columns, is_elliptic_matrix, LieAlgebra};
use crate::config::{Tolerances, DEFAULT_SEED};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::nnls;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("algebra has no Cartan subalgebra in its metadata")]
    MissingCartan,
    #[error("not a Cartan subalgebra: centralizer has dimension {centralizer} but t has dimension {cartan}")]
    NotACartan { centralizer: usize, cartan: usize },
    #[error("Cartan basis element {index} is not elliptic")]
    NotCompactlyEmbedded { index: usize },
    #[error("Cartan basis elements {0} and {1} do not commute")]
    NotAbelian(usize, usize),
    #[error("simultaneous diagonalization failed after {attempts} generic combinations")]
    DecompositionFailed { attempts: usize },
    #[error("no regular element found")]
    NoRegularElement,
    #[error("Weyl group closure exceeded {limit} elements")]
    ClosureOverflow { limit: usize },
    #[error("root space origin undetermined: no metadata and the Killing form is degenerate on [g, g]")]
    UnclassifiableOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootKind {
    Compact,
    NonCompact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootOrigin {
    Solvable,
    Semisimple,
}

/// Inertia of the hermitian form `x ↦ α([x, x*])` on a root space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn is_mixed(&self) -> bool {
        self.positive > 0 && (self.negative > 0 || self.zero > 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    /// Real coefficients in the dual of the Cartan basis, `α = i·beta`.
    pub beta: DVector<f64>,
    /// Orthonormal basis of `g_C^α`, one column per vector.
    pub space_basis: CMatrix,
    pub kind: RootKind,
    pub origin: RootOrigin,
    pub multiplicity: usize,
    pub signature: Signature,
    /// Some nonzero `x` in the root space has `[x, x*] = 0`.
    pub zero_bracket: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootDatum {
    algebra: LieAlgebra,
    cartan: DMatrix<f64>,
    roots: Vec<Root>,
    tol: Tolerances,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSystem {
    /// Regular element `x0` in Cartan coordinates.
    pub regular_element: DVector<f64>,
    /// Indices into [`RootDatum::roots`].
    pub positive_roots: Vec<usize>,
    pub noncompact_positive: Vec<usize>,
    pub adapted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylGroup {
    /// Matrices acting on Cartan coordinates.
    pub elements: Vec<DMatrix<f64>>,
    pub generators: Vec<DMatrix<f64>>,
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Distinct points `w·x`.
    pub fn orbit(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let mut out: Vec<DVector<f64>> = Vec::new();
        for w in &self.elements {
            let y = w * x;
            if !out.iter().any(|z| (z - &y).amax() <= 1e-9 * (1.0 + y.amax())) {
                out.push(y);
            }
        }
        out
    }
}

/// Weyl group closure aborts past this many elements.
pub const WEYL_LIMIT: usize = 1_000_000;

const MAX_ATTEMPTS: usize = 5;

/// `[a, b]` for complex vectors, expressed in Cartan coordinates; the second
/// value is the residual outside `t_C`.
fn cartan_part(algebra: &LieAlgebra, cartan: &DMatrix<f64>, a: &CVector, b: &CVector) -> (CVector, f64) {
    linalg::project_coeffs_c(cartan, &algebra.bracket_c(a, b))
}

/// `x* = -conj(x)`.
pub fn star(x: &CVector) -> CVector {
    x.map(|z| -z.conj())
}

pub fn root_decomposition(
    algebra: &LieAlgebra,
    cartan: &[DVector<f64>],
    seed: u64,
) -> Result<RootDatum, RootError> {
    let tol = Tolerances::DEFAULT;
    let d = algebra.dim();
    let r = cartan.len();
    if r == 0 {
        return Err(RootError::MissingCartan);
    }
    for a in 0..r {
        for b in (a + 1)..r {
            if algebra.bracket_vec(&cartan[a], &cartan[b]).amax()
                > tol.spectral * (1.0 + cartan[a].norm()) * (1.0 + cartan[b].norm())
            {
                return Err(RootError::NotAbelian(a, b));
            }
        }
    }
    let ads: Vec<DMatrix<f64>> = cartan.iter().map(|h| algebra.ad_matrix(h)).collect();
    for (index, ad) in ads.iter().enumerate() {
        if !is_elliptic_matrix(ad, &tol) {
            return Err(RootError::NotCompactlyEmbedded { index });
        }
    }
    let centralizer = algebra.centralizer(cartan, &tol).ncols();
    if centralizer != r {
        return Err(RootError::NotACartan { centralizer, cartan: r });
    }
    let cmat = columns(cartan, d);
    let ads_c: Vec<CMatrix> = ads.iter().map(linalg::complexify).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let weights: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();
        let mut generic = DMatrix::zeros(d, d);
        for (w, ad) in weights.iter().zip(&ads) {
            generic += ad * *w;
        }
        if let Some(spaces) = split_spaces(&generic, &ads_c, &tol) {
            let origin_fallback = origin_without_meta(algebra, &tol);
            let mut roots = Vec::with_capacity(2 * spaces.len());
            for (beta, basis) in spaces {
                let neg = basis.map(|z| z.conj());
                for (b, z) in [(beta.clone(), basis), (-beta, neg)] {
                    roots.push(make_root(algebra, &cmat, b, z, origin_fallback.clone(), &tol)?);
                }
            }
            return Ok(RootDatum {
                algebra: algebra.clone(),
                cartan: cmat,
                roots,
                tol,
            });
        }
    }
    Err(RootError::DecompositionFailed {
        attempts: MAX_ATTEMPTS,
    })
}

/// Eigenspaces of the generic element with positive imaginary eigenvalue,
/// validated as joint eigenspaces of every Cartan basis element.
fn split_spaces(generic: &DMatrix<f64>, ads_c: &[CMatrix], tol: &Tolerances) -> Option<Vec<(DVector<f64>, CMatrix)>> {
    let d = generic.nrows();
    let gc = linalg::complexify(generic);
    let scale = ads_c.iter().map(linalg::max_abs_c).fold(1.0, f64::max);
    let mut out = Vec::new();
    let mut total = 0;
    for cl in linalg::eigen_clusters(generic, tol.spectral) {
        if cl.value.im <= tol.spectral * scale {
            continue;
        }
        let shifted = &gc - CMatrix::identity(d, d) * C64::new(0.0, cl.value.im);
        let basis = linalg::null_space(&shifted, tol.rank);
        if basis.ncols() != cl.multiplicity {
            return None;
        }
        let z = basis.column(0).into_owned();
        let znorm = z.norm_squared();
        let beta = DVector::from_iterator(
            ads_c.len(),
            ads_c.iter().map(|ad| (z.adjoint() * ad * &z)[(0, 0)].im / znorm),
        );
        for (j, ad) in ads_c.iter().enumerate() {
            let res = ad * &basis - &basis * C64::new(0.0, beta[j]);
            if linalg::max_abs_c(&res) > tol.rank * scale {
                return None;
            }
        }
        total += 2 * cl.multiplicity;
        out.push((beta, basis));
    }
    (total + ads_c.len() == d).then_some(out)
}

fn origin_without_meta(algebra: &LieAlgebra, tol: &Tolerances) -> Option<RootOrigin> {
    let d = algebra.dim();
    let mut brackets = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let e_i = DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
            let e_j = DVector::from_fn(d, |k, _| if k == j { 1.0 } else { 0.0 });
            brackets.push(algebra.bracket_vec(&e_i, &e_j));
        }
    }
    let derived = linalg::column_space(&columns(&brackets, d), tol.rank);
    if derived.ncols() == 0 {
        return None;
    }
    let k = derived.transpose() * algebra.killing_matrix() * &derived;
    (linalg::real_rank(&k, tol.rank) == derived.ncols()).then_some(RootOrigin::Semisimple)
}

fn hermitian_form(algebra: &LieAlgebra, cartan: &DMatrix<f64>, beta: &DVector<f64>, basis: &CMatrix) -> CMatrix {
    let m = basis.ncols();
    let alpha = |h: &CVector| -> C64 {
        let s = h.iter().zip(beta.iter()).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * *b);
        C64::new(0.0, 1.0) * s
    };
    let mut g = CMatrix::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            let zk = basis.column(k).into_owned();
            let zl = star(&basis.column(l).into_owned());
            let (h, _) = cartan_part(algebra, cartan, &zk, &zl);
            g[(l, k)] = alpha(&h);
        }
    }
    // enforce exact hermitian symmetry before diagonalizing
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

fn make_root(
    algebra: &LieAlgebra,
    cartan: &DMatrix<f64>,
    beta: DVector<f64>,
    basis: CMatrix,
    origin_fallback: Option<RootOrigin>,
    tol: &Tolerances,
) -> Result<Root, RootError> {
    let m = basis.ncols();
    let g = hermitian_form(algebra, cartan, &beta, &basis);
    let eig = g.symmetric_eigenvalues();
    let scale = 1.0 + beta.norm();
    let cut = tol.spectral * scale;
    let signature = Signature {
        positive: eig.iter().filter(|&&e| e > cut).count(),
        negative: eig.iter().filter(|&&e| e < -cut).count(),
        zero: eig.iter().filter(|&&e| e.abs() <= cut).count(),
    };
    let kind = if signature.positive == m {
        RootKind::Compact
    } else {
        RootKind::NonCompact
    };
    let zero_bracket = has_zero_bracket(algebra, &basis, tol);
    let origin = match algebra.meta() {
        Some(meta) if !meta.v_space.is_empty() || !meta.levi.is_empty() || !meta.center.is_empty() => {
            let d = algebra.dim();
            let solv: Vec<DVector<f64>> = meta.v_space.iter().chain(meta.center.iter()).cloned().collect();
            let inside = |span: &[DVector<f64>]| {
                let sm = columns(span, d);
                basis
                    .column_iter()
                    .all(|z| linalg::project_coeffs_c(&sm, &z.into_owned()).1 <= tol.rank)
            };
            if inside(&solv) {
                RootOrigin::Solvable
            } else if inside(&meta.levi) {
                RootOrigin::Semisimple
            } else {
                origin_fallback.ok_or(RootError::UnclassifiableOrigin)?
            }
        }
        _ => origin_fallback.ok_or(RootError::UnclassifiableOrigin)?,
    };
    Ok(Root {
        beta,
        space_basis: basis,
        kind,
        origin,
        multiplicity: m,
        signature,
        zero_bracket,
    })
}

fn has_zero_bracket(algebra: &LieAlgebra, basis: &CMatrix, tol: &Tolerances) -> bool {
    let zero = |x: &CVector| algebra.bracket_c(x, &star(x)).norm() <= tol.spectral * x.norm_squared();
    if basis.column_iter().any(|z| zero(&z.into_owned())) {
        return true;
    }
    if basis.ncols() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        for _ in 0..20 {
            let coeffs = CVector::from_fn(basis.ncols(), |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            if zero(&(basis * coeffs)) {
                return true;
            }
        }
    }
    false
}

impl RootDatum {
    /// Root decomposition with respect to the Cartan subalgebra recorded in
    /// the algebra's metadata.
    pub fn from_meta(algebra: &LieAlgebra) -> Result<Self, RootError> {
        let meta = algebra.meta().ok_or(RootError::MissingCartan)?;
        if !meta.has_cartan() {
            return Err(RootError::MissingCartan);
        }
        root_decomposition(algebra, &meta.cartan, DEFAULT_SEED)
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    /// Cartan basis as columns (algebra coordinates).
    pub fn cartan(&self) -> &DMatrix<f64> {
        &self.cartan
    }

    pub fn rank(&self) -> usize {
        self.cartan.ncols()
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn zero_space_dim(&self) -> usize {
        self.rank()
    }

    /// `iα(x) = -beta(x)` for `x` in Cartan coordinates.
    pub fn i_alpha(&self, index: usize, x: &DVector<f64>) -> f64 {
        -self.roots[index].beta.dot(x)
    }

    /// Algebra coordinates of an element of `t` given in Cartan coordinates.
    pub fn embed(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.cartan * x
    }

    /// Cartan coordinates of `x`, or `None` when `x ∉ t`.
    pub fn to_cartan(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let (c, res) = linalg::project_coeffs(&self.cartan, x);
        (res <= self.tol.rank * (1.0 + x.norm())).then_some(c)
    }

    /// Restriction of a functional on `g` to Cartan coordinates.
    pub fn restrict(&self, lambda: &DVector<f64>) -> DVector<f64> {
        self.cartan.transpose() * lambda
    }

    /// Index of the root `-α`.
    pub fn negative_of(&self, index: usize) -> usize {
        index ^ 1
    }

    pub fn is_regular(&self, x: &DVector<f64>) -> bool {
        (0..self.roots.len()).all(|i| self.i_alpha(i, x).abs() > self.tol.spectral * (1.0 + x.norm()))
    }

    pub fn cone_potential(&self) -> bool {
        self.roots
            .iter()
            .filter(|r| r.kind == RootKind::NonCompact)
            .all(|r| !r.zero_bracket)
    }

    /// Cartan coordinates of `i[x, x*]` for a root vector `x` (the second
    /// value is the residual outside `t_C`).
    pub fn bracket_with_star(&self, x: &CVector) -> DVector<f64> {
        let (h, _) = cartan_part(&self.algebra, &self.cartan, x, &star(x));
        h.map(|z| -z.im)
    }

    /// Real element `h_α ∈ t` with `α∨ = i·h_α`, for a root whose form
    /// `α([x, x*])` is nonzero on the first basis vector.
    pub fn coroot(&self, index: usize) -> Option<DVector<f64>> {
        let root = &self.roots[index];
        let x = root.space_basis.column(0).into_owned();
        let (h, _) = cartan_part(&self.algebra, &self.cartan, &x, &star(&x));
        let alpha_h = h.iter().zip(root.beta.iter()).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * *b)
            * C64::new(0.0, 1.0);
        if alpha_h.norm() <= self.tol.spectral {
            return None;
        }
        let coroot = h * (C64::new(2.0, 0.0) / alpha_h);
        Some(coroot.map(|z| z.im))
    }

    /// Reflection `r_α(x) = x - α(x)α∨ = x + beta(x)·h_α` on Cartan coordinates.
    pub fn reflection(&self, index: usize) -> Option<DMatrix<f64>> {
        let h = self.coroot(index)?;
        let r = self.rank();
        Some(DMatrix::identity(r, r) + &h * self.roots[index].beta.transpose())
    }

    pub fn weyl_group(&self) -> Result<WeylGroup, RootError> {
        let r = self.rank();
        let mut generators: Vec<DMatrix<f64>> = Vec::new();
        for (i, root) in self.roots.iter().enumerate() {
            if root.kind != RootKind::Compact || i % 2 == 1 {
                continue;
            }
            if let Some(refl) = self.reflection(i) {
                if !generators.iter().any(|g| (g - &refl).amax() <= 1e-9) {
                    generators.push(refl);
                }
            }
        }
        let same = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).amax() <= 1e-9 * (1.0 + a.amax());
        let mut elements = vec![DMatrix::identity(r, r)];
        let mut frontier = elements.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                for g in &generators {
                    let p = g * w;
                    if !elements.iter().any(|e| same(e, &p)) && !next.iter().any(|e| same(e, &p)) {
                        next.push(p);
                    }
                }
            }
            elements.extend(next.iter().cloned());
            if elements.len() > WEYL_LIMIT {
                return Err(RootError::ClosureOverflow { limit: WEYL_LIMIT });
            }
            frontier = next;
        }
        Ok(WeylGroup { elements, generators })
    }

    /// Groups root pairs `±α` whose functionals are proportional; returns a
    /// representative `beta` per group.
    fn hyperplanes(&self) -> Vec<DVector<f64>> {
        let mut reps: Vec<DVector<f64>> = Vec::new();
        for root in self.roots.iter().step_by(2) {
            let b = root.beta.normalize();
            if !reps.iter().any(|r| (r.dot(&b).abs() - 1.0).abs() <= 1e-9) {
                reps.push(b);
            }
        }
        reps
    }

    /// Positive system determined by a regular element `x0`.
    pub fn system_at(&self, x0: &DVector<f64>, weyl: &WeylGroup) -> PositiveSystem {
        let positive_roots: Vec<usize> = (0..self.roots.len()).filter(|&i| self.i_alpha(i, x0) > 0.0).collect();
        let noncompact_positive = positive_roots
            .iter()
            .cloned()
            .filter(|&i| self.roots[i].kind == RootKind::NonCompact)
            .collect();
        let mut sys = PositiveSystem {
            regular_element: x0.clone(),
            positive_roots,
            noncompact_positive,
            adapted: false,
        };
        sys.adapted = self.is_adapted(&sys, weyl);
        sys
    }

    /// All positive systems, one per chamber of the arrangement `{beta = 0}`.
    pub fn positive_systems(&self) -> Result<Vec<PositiveSystem>, RootError> {
        let weyl = self.weyl_group()?;
        let planes = self.hyperplanes();
        let r = self.rank();
        let mut points: Vec<DVector<f64>> = Vec::new();
        if planes.is_empty() {
            points.push(DVector::from_element(r, 1.0));
        } else if planes.len() <= 12 {
            for mask in 0u32..(1u32 << planes.len()) {
                let rows: Vec<DVector<f64>> = planes
                    .iter()
                    .enumerate()
                    .map(|(k, p)| if mask >> k & 1 == 1 { p.clone() } else { -p })
                    .collect();
                if let Some(x) = nnls::strictly_positive_point(&rows) {
                    points.push(x);
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
            for _ in 0..4096 {
                points.push(DVector::from_fn(r, |_, _| rng.random_range(-1.0..1.0)));
            }
        }
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        for x in points {
            if !self.is_regular(&x) {
                continue;
            }
            let sys = self.system_at(&x, &weyl);
            if seen.insert(sys.positive_roots.clone()) {
                out.push(sys);
            }
        }
        if out.is_empty() {
            return Err(RootError::NoRegularElement);
        }
        Ok(out)
    }

    /// `w·Δ_p⁺ = Δ_p⁺` for every Weyl element, comparing functionals.
    pub fn is_adapted(&self, system: &PositiveSystem, weyl: &WeylGroup) -> bool {
        let betas: Vec<&DVector<f64>> = system.noncompact_positive.iter().map(|&i| &self.roots[i].beta).collect();
        weyl.elements.iter().all(|w| {
            betas.iter().all(|b| {
                let moved = w.transpose() * *b;
                betas.iter().any(|c| (&moved - *c).amax() <= 1e-9 * (1.0 + c.amax()))
            })
        })
    }

    /// A regular element of `t` (Cartan coordinates), drawn from a fixed seed.
    pub fn generic_regular(&self) -> Option<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        (0..64)
            .map(|_| DVector::from_fn(self.rank(), |_, _| rng.random_range(0.5..1.5)))
            .find(|x| self.is_regular(x))
    }

    /// Projection `p_t : g -> t` along `[t, g]`, as a `rank × dim` matrix
    /// returning Cartan coordinates.
    pub fn cartan_projector(&self) -> DMatrix<f64> {
        let d = self.algebra.dim();
        let r = self.rank();
        let h = self.generic_regular().unwrap_or_else(|| DVector::from_element(r, 1.0));
        let comp = linalg::column_space(&self.algebra.ad_matrix(&self.embed(&h)), self.tol.rank);
        let mut cols: Vec<DVector<f64>> = self.cartan.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(comp.column_iter().map(|c| c.into_owned()));
        let b = columns(&cols, d);
        let inv = b.clone().try_inverse().unwrap_or_else(|| b.pseudo_inverse(1e-12).expect("nonnegative epsilon"));
        inv.rows(0, r).into_owned()
    }

    /// Extension of `λ ∈ t★` to `g` vanishing on `[t, g]`.
    pub fn extend(&self, lambda_t: &DVector<f64>) -> DVector<f64> {
        self.cartan_projector().transpose() * lambda_t
    }

    /// Cartan coordinates of some `h ∈ t` with `h = Ad(g)x`, found by damped
    /// Gauss-Newton on the component of `Ad(exp y)x` outside `t`. `None` when
    /// `x` is not elliptic or the iteration stalls.
    pub fn conjugate_into_cartan(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        if !self.algebra.is_elliptic_element(x, &self.tol) {
            return None;
        }
        let d = self.algebra.dim();
        let p = self.cartan_projector();
        let off = DMatrix::identity(d, d) - &self.cartan * &p;
        let target = 1e-11 * (1.0 + x.norm());
        let mut cur = x.clone();
        for _ in 0..200 {
            let r = &off * &cur;
            let rn = r.norm();
            if rn <= target {
                return Some(&p * &cur);
            }
            // Ad(exp y)cur ≈ cur - ad(cur) y
            let jac = &off * self.algebra.ad_matrix(&cur);
            let eps = 1e-10 * (1.0 + linalg::max_abs(&jac));
            let y = jac.pseudo_inverse(eps).ok()? * &r;
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand = self.algebra.adjoint_exp(&(&y * step)) * &cur;
                if (&off * &cand).norm() < rn {
                    cur = cand;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                return None;
            }
        }
        None
    }

    pub fn report(&self) -> RootReport {
        RootReport {
            rank: self.rank(),
            roots: self
                .roots
                .iter()
                .map(|r| RootEntry {
                    beta: r.beta.iter().cloned().collect(),
                    kind: r.kind,
                    origin: r.origin,
                    multiplicity: r.multiplicity,
                    signature: r.signature,
                    zero_bracket: r.zero_bracket,
                })
                .collect(),
            cone_potential: self.cone_potential(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootEntry {
    pub beta: Vec<f64>,
    pub kind: RootKind,
    pub origin: RootOrigin,
    pub multiplicity: usize,
    pub signature: Signature,
    pub zero_bracket: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub rank: usize,
    pub roots: Vec<RootEntry>,
    pub cone_potential: bool,
}
