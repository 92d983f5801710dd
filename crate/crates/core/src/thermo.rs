//! Closed-form thermodynamics of coadjoint orbits: partition functions from
//! the catalog formulas, the Gaussian integral and the Duistermaat-Heckman
//! sum, together with geometric heat, entropy, Fisher-Rao metric and
//! temperedness fits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{sp_basis_matrices, symplectic_j};
use crate::cones::{c_max, c_min, lambda_in_cmin_star, lambda_in_cmin_star_interior, Cone, ConeError};
use crate::linalg::{self, complexify};
use crate::orbits::{Family, OrbitModel};
use crate::roots::{PositiveSystem, RootDatum, RootError, RootKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("x is not regular: |iα(wx)| = {value:e} for root {root}")]
    NotRegular { root: usize, value: f64 },
    #[error("functional is not in C_min★")]
    NotAdmissibleFunctional,
    #[error("x is not in the interior of C_max")]
    OutsideCmax,
    #[error("functional does not vanish on [t, g]")]
    NotInCartanDual,
    #[error("no adapted positive system with λ in C_min★")]
    NoAdmissibleSystem,
    #[error("log Z is not finite near x")]
    DivergentNeighborhood,
    #[error("Z(x) is infinite")]
    DivergentPoint,
    #[error("x is not conjugate into t")]
    NotConjugate,
    #[error("expected dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "DH")]
    Dh,
    Catalog,
    Gaussian,
    Product,
    Oracle,
}

/// `Z = ∞` is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Value {
    Finite(f64),
    Divergent,
}

impl Value {
    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Divergent => None,
        }
    }
}

/// `(2π)^{-n/2} ∫ e^{-½⟨Av,v⟩ - ⟨ξ,v⟩} dv`.
pub fn gaussian_laplace(a: &DMatrix<f64>, xi: &DVector<f64>) -> Value {
    match gaussian_log_laplace(a, xi) {
        Some(l) => Value::Finite(l.exp()),
        None => Value::Divergent,
    }
}

/// Logarithm of [`gaussian_laplace`]; `None` unless `A` is positive definite
/// (all eigenvalues above `1e-12`).
pub fn gaussian_log_laplace(a: &DMatrix<f64>, xi: &DVector<f64>) -> Option<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().any(|&e| e <= 1e-12) {
        return None;
    }
    let log_det: f64 = eig.eigenvalues.iter().map(|e| e.ln()).sum();
    let chol = sym.cholesky()?;
    let u = chol.solve(xi);
    Some(-0.5 * log_det + 0.5 * u.dot(xi))
}

/// A log-partition function on some coordinate space.
pub trait LogPartition: Sync {
    fn dim(&self) -> usize;

    fn method(&self) -> Method;

    /// `None` where `Z` is infinite or undefined.
    fn log_z(&self, x: &DVector<f64>) -> Option<f64>;

    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        fd_gradient(self, x, fd_step(x)).map(|(g, _)| g)
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        fd_hessian(self, x)
    }
}

/// Central-difference step `1e-5·(1 + ‖x‖)`.
pub fn fd_step(x: &DVector<f64>) -> f64 {
    1e-5 * (1.0 + x.norm())
}

/// Richardson-extrapolated central differences of `log Z` at steps `h` and
/// `h/2`; the second value is the discrepancy `‖g(h) - g(h/2)‖ / (1 + ‖g‖)`.
pub fn fd_gradient<F: LogPartition + ?Sized>(f: &F, x: &DVector<f64>, h: f64) -> Option<(DVector<f64>, f64)> {
    let central = |h: f64| -> Option<DVector<f64>> {
        let mut g = DVector::zeros(x.len());
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            g[i] = (f.log_z(&xp)? - f.log_z(&xm)?) / (2.0 * h);
        }
        Some(g)
    };
    let g1 = central(h)?;
    let g2 = central(0.5 * h)?;
    let disc = (&g1 - &g2).norm() / (1.0 + g2.norm());
    Some(((4.0 * &g2 - g1) / 3.0, disc))
}

/// Symmetrized central differences of the gradient.
pub fn fd_hessian<F: LogPartition + ?Sized>(f: &F, x: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = x.len();
    let h = 10.0 * fd_step(x);
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let d = (f.gradient(&xp)? - f.gradient(&xm)?) / (2.0 * h);
        m.set_column(j, &d);
    }
    Some((&m + m.transpose()) * 0.5)
}

/// `Q(x) = -d log Z(x)`, requiring `Z` finite on a ball of radius `2h`.
pub fn geometric_heat<F: LogPartition + ?Sized>(f: &F, x: &DVector<f64>) -> Result<DVector<f64>, ThermoError> {
    let h = fd_step(x);
    for i in 0..x.len() {
        for s in [-2.0, 2.0] {
            let mut y = x.clone();
            y[i] += s * h;
            f.log_z(&y).ok_or(ThermoError::DivergentNeighborhood)?;
        }
    }
    f.gradient(x).map(|g| -g).ok_or(ThermoError::DivergentNeighborhood)
}

/// `s(x) = Q(x)(x) + log Z(x)`.
pub fn entropy(q: &DVector<f64>, x: &DVector<f64>, log_z: f64) -> f64 {
    q.dot(x) + log_z
}

pub fn fisher_rao<F: LogPartition + ?Sized>(f: &F, x: &DVector<f64>) -> Result<DMatrix<f64>, ThermoError> {
    f.log_z(x).ok_or(ThermoError::DivergentNeighborhood)?;
    let h = f.hessian(x).ok_or(ThermoError::DivergentNeighborhood)?;
    Ok((&h + h.transpose()) * 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperedFit {
    pub k: f64,
    pub residual: f64,
}

/// Least-squares slope of `log Z(tx)` against `-log t` on `t = 2^-3, …, 2^-10`.
pub fn temperedness_exponent<F: LogPartition + ?Sized>(f: &F, x: &DVector<f64>) -> Result<TemperedFit, ThermoError> {
    let pts: Vec<(f64, f64)> = (3..=10)
        .map(|j| {
            let t = 2f64.powi(-j);
            f.log_z(&(x * t)).map(|l| (-t.ln(), l)).ok_or(ThermoError::DivergentPoint)
        })
        .collect::<Result<_, _>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let k = sxy / sxx;
    let residual = (pts.iter().map(|p| (p.1 - my - k * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(TemperedFit { k, residual })
}

// ---------------------------------------------------------------------------
// Catalog closed forms

/// Closed-form `log Z` of an orbit model with analytic derivatives.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    model: OrbitModel,
}

type Derivs = (f64, DVector<f64>, DMatrix<f64>);

impl ClosedForm {
    pub fn new(model: OrbitModel) -> Self {
        ClosedForm { model }
    }

    pub fn model(&self) -> &OrbitModel {
        &self.model
    }

    /// `Z(x)` as a value.
    pub fn z(&self, x: &DVector<f64>) -> Value {
        match self.log_z(x) {
            Some(l) => Value::Finite(l.exp()),
            None => Value::Divergent,
        }
    }

    pub fn derivatives(&self, x: &DVector<f64>) -> Option<Derivs> {
        if x.len() != self.model.dim() {
            return None;
        }
        model_derivs(&self.model, x.as_slice())
    }
}

impl LogPartition for ClosedForm {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn method(&self) -> Method {
        match self.model.family() {
            Family::Product(_) => Method::Product,
            _ => Method::Catalog,
        }
    }

    fn log_z(&self, x: &DVector<f64>) -> Option<f64> {
        self.derivatives(x).map(|d| d.0)
    }

    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.derivatives(x).map(|d| d.1)
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.derivatives(x).map(|d| d.2)
    }
}

fn model_derivs(model: &OrbitModel, x: &[f64]) -> Option<Derivs> {
    match model.family() {
        Family::Sl2Nilpotent => lorentz(x, |tau| {
            // log Z = log 2π - log τ
            Some(((2.0 * std::f64::consts::PI).ln() - tau.ln(), -1.0 / tau, 1.0 / (tau * tau)))
        }),
        Family::Sl2Hyperboloid { m } => lorentz(x, |tau| Some((-m * tau - tau.ln(), -m - 1.0 / tau, 1.0 / (tau * tau)))),
        Family::Su2Sphere { rho } => Some(sphere(*rho, x)),
        Family::OscPlane { lambda_c, lambda_z } => {
            let half = DMatrix::identity(2, 2) * 0.5;
            let (g, gw, gk, hww, hwk, hkk) = affine(*lambda_c, 1, &x[1..3], &[half], &x[3..4])?;
            let mut grad = DVector::zeros(4);
            grad[0] = -lambda_c;
            grad.rows_mut(1, 2).copy_from(&gw);
            grad[3] = gk[0] - lambda_z;
            let mut hess = DMatrix::zeros(4, 4);
            hess.view_mut((1, 1), (2, 2)).copy_from(&hww);
            hess.view_mut((1, 3), (2, 1)).copy_from(&hwk);
            hess.view_mut((3, 1), (1, 2)).copy_from(&hwk.transpose());
            hess[(3, 3)] = hkk[(0, 0)];
            Some((g - lambda_c * x[0] - lambda_z * x[3], grad, hess))
        }
        Family::HspAffine { n, lambda_c } => {
            let n = *n;
            let m = 2 * n;
            let k = n * (2 * n + 1);
            let j = symplectic_j(n);
            let mats: Vec<DMatrix<f64>> = sp_basis_matrices(n).iter().map(|xm| -(&j * xm)).collect();
            let (g, gw, gk, hww, hwk, hkk) = affine(*lambda_c, n, &x[1..1 + m], &mats, &x[1 + m..])?;
            let d = 1 + m + k;
            let mut grad = DVector::zeros(d);
            grad[0] = -lambda_c;
            grad.rows_mut(1, m).copy_from(&gw);
            grad.rows_mut(1 + m, k).copy_from(&gk);
            let mut hess = DMatrix::zeros(d, d);
            hess.view_mut((1, 1), (m, m)).copy_from(&hww);
            hess.view_mut((1, 1 + m), (m, k)).copy_from(&hwk);
            hess.view_mut((1 + m, 1), (k, m)).copy_from(&hwk.transpose());
            hess.view_mut((1 + m, 1 + m), (k, k)).copy_from(&hkk);
            Some((g - lambda_c * x[0], grad, hess))
        }
        Family::Point { lambda0 } => {
            let l = DVector::from_vec(lambda0.clone());
            let v = -l.dot(&DVector::from_vec(x.to_vec()));
            Some((v, -l, DMatrix::zeros(x.len(), x.len())))
        }
        Family::Product(ms) => {
            let d = x.len();
            let mut total = 0.0;
            let mut grad = DVector::zeros(d);
            let mut hess = DMatrix::zeros(d, d);
            let mut offset = 0;
            for f in ms {
                let k = f.dim();
                let (v, g, h) = model_derivs(f, &x[offset..offset + k])?;
                total += v;
                grad.rows_mut(offset, k).copy_from(&g);
                hess.view_mut((offset, offset), (k, k)).copy_from(&h);
                offset += k;
            }
            Some((total, grad, hess))
        }
    }
}

/// Functions of `τ = √(x0² - x1² - x2²)` on the forward cone. `f` returns
/// `(f(τ), f'(τ), f''(τ))`.
fn lorentz(x: &[f64], f: impl Fn(f64) -> Option<(f64, f64, f64)>) -> Option<Derivs> {
    let q = x[0] * x[0] - x[1] * x[1] - x[2] * x[2];
    if x[0] <= 0.0 || q <= 0.0 {
        return None;
    }
    let tau = q.sqrt();
    let (v, d1, d2) = f(tau)?;
    let eta_x = DVector::from_vec(vec![x[0], -x[1], -x[2]]);
    let eta = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0]));
    let dtau = &eta_x / tau;
    let d2tau = &eta / tau - &eta_x * eta_x.transpose() / (tau * tau * tau);
    let grad = &dtau * d1;
    let hess = &dtau * dtau.transpose() * d2 + d2tau * d1;
    Some((v, grad, hess))
}

/// `log(2 sinh(ρr)/r)` with `r = |x|`, stable at `r → 0`.
fn sphere(rho: f64, x: &[f64]) -> Derivs {
    let xv = DVector::from_vec(x.to_vec());
    let r = xv.norm();
    let u = rho * r;
    let (v, d1_over_r, d2) = if u < 1e-4 {
        let u2 = u * u;
        (
            (2.0 * rho).ln() + u2 / 6.0,
            rho * rho / 3.0 - rho.powi(4) * r * r / 45.0,
            rho * rho / 3.0 - rho.powi(4) * r * r / 15.0,
        )
    } else {
        let v = u + (-(-2.0 * u).exp()).ln_1p() - r.ln();
        let d1 = rho / u.tanh() - 1.0 / r;
        let d2 = -(rho / u.sinh()).powi(2) + 1.0 / (r * r);
        (v, d1 / r, d2)
    };
    let grad = &xv * d1_over_r;
    let n = x.len();
    let hess = if r == 0.0 {
        DMatrix::identity(n, n) * d2
    } else {
        let e = &xv / r;
        let p = &e * e.transpose();
        &p * d2 + (DMatrix::identity(n, n) - &p) * d1_over_r
    };
    (v, grad, hess)
}

type AffineDerivs = (f64, DVector<f64>, DVector<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>);

/// `g(w, a) = -½ log det S + (λ_c/2) ξᵀ S⁻¹ ξ` with `S = Σ a_k S_k`,
/// `ξ = J w`, and its derivatives in `w` and `a`.
fn affine(lc: f64, n: usize, w: &[f64], mats: &[DMatrix<f64>], a: &[f64]) -> Option<AffineDerivs> {
    let m = 2 * n;
    let s = mats.iter().zip(a).fold(DMatrix::zeros(m, m), |acc, (sk, ak)| acc + sk * *ak);
    let s = (&s + s.transpose()) * 0.5;
    let chol = s.clone().cholesky()?;
    let sinv = chol.inverse();
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let j = symplectic_j(n);
    let xi = &j * DVector::from_vec(w.to_vec());
    let u = &sinv * &xi;
    let g = -0.5 * log_det + 0.5 * lc * xi.dot(&u);
    let gw = j.transpose() * &u * lc;
    let k = mats.len();
    let gk = DVector::from_fn(k, |i, _| -0.5 * (&sinv * &mats[i]).trace() - 0.5 * lc * u.dot(&(&mats[i] * &u)));
    let hww = j.transpose() * &sinv * &j * lc;
    let mut hwk = DMatrix::zeros(m, k);
    for i in 0..k {
        hwk.set_column(i, &(-(j.transpose() * &sinv * &mats[i] * &u) * lc));
    }
    let sm: Vec<DMatrix<f64>> = mats.iter().map(|sk| &sinv * sk).collect();
    let hkk = DMatrix::from_fn(k, k, |p, q| {
        0.5 * (&sm[p] * &sm[q]).trace() + lc * u.dot(&(&mats[p] * &sinv * &mats[q] * &u))
    });
    Some((g, gw, gk, hww, hwk, hkk))
}

/// Gaussian route for the affine `hsp`/oscillator families: evaluates the
/// momentum-image integral through [`gaussian_log_laplace`] directly.
pub fn gaussian_route(model: &OrbitModel, x: &DVector<f64>) -> Option<Value> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let (n, lc, shift, s) = match model.family() {
        Family::OscPlane { lambda_c, lambda_z } => {
            let s = DMatrix::identity(2, 2) * (0.5 * x[3]);
            (1, *lambda_c, lambda_c * x[0] + lambda_z * x[3], s)
        }
        Family::HspAffine { n, lambda_c } => {
            let n = *n;
            let j = symplectic_j(n);
            let coords = x.rows(1 + 2 * n, n * (2 * n + 1));
            let xm = crate::algebra::sp_matrix(n, coords.as_slice());
            (n, *lambda_c, lambda_c * x[0], -(&j * xm))
        }
        _ => return None,
    };
    let j = symplectic_j(n);
    let w = x.rows(1, 2 * n).into_owned();
    // H(v) = λ_c c + λ_c ⟨Jᵀw, v⟩ + ½ vᵀ(λ_c S)v, measure (λ_c/2π)^n dv
    let a = &s * lc;
    let xi = j.transpose() * w * lc;
    Some(match gaussian_log_laplace(&a, &xi) {
        Some(l) => {
            let log_norm = n as f64 * (lc / two_pi).ln() + n as f64 * two_pi.ln();
            Value::Finite((l + log_norm - shift).exp() * crate::orbits::C_V)
        }
        None => Value::Divergent,
    })
}

// ---------------------------------------------------------------------------
// Duistermaat-Heckman

/// Evaluation mode of the Weyl sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DhMode {
    /// Full sum over `Δ_λ`.
    Full,
    /// Compact-part sum over `Δ_λ ∩ Δ_k⁺`, divided by
    /// `Π_{Δ_p⁺} iα(x)^{dim g_C^α}`.
    Factorized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootFactor {
    pub root: usize,
    pub exponent: usize,
    pub dim: usize,
    pub compact: bool,
}

/// Duistermaat-Heckman partition function of `O_λ`, on Cartan coordinates.
#[derive(Debug, Clone)]
pub struct DhPartition {
    datum: RootDatum,
    system: PositiveSystem,
    lambda: DVector<f64>,
    classes: Vec<DMatrix<f64>>,
    factors: Vec<RootFactor>,
    noncompact: Vec<RootFactor>,
    cmax: Cone,
    mode: DhMode,
}

/// Pole distance below which the sum is treated as near-singular.
const NEAR_SINGULAR: f64 = 1e-4;

/// Adapted positive system with pointed `C_min ⊆ C_max` and `λ ∈ C_min★`,
/// preferring the first such system in chamber order.
pub fn system_for(datum: &RootDatum, lambda_t: &DVector<f64>) -> Result<PositiveSystem, ThermoError> {
    for sys in datum.positive_systems()? {
        if !sys.adapted {
            continue;
        }
        let cmin = c_min(datum, &sys);
        if lambda_in_cmin_star(lambda_t, &cmin)? {
            return Ok(sys);
        }
    }
    Err(ThermoError::NoAdmissibleSystem)
}

impl DhPartition {
    pub fn new(datum: RootDatum, system: PositiveSystem, lambda_t: DVector<f64>, mode: DhMode) -> Result<Self, ThermoError> {
        let cmin = c_min(&datum, &system);
        let admissible = match mode {
            DhMode::Full => lambda_in_cmin_star(&lambda_t, &cmin)?,
            DhMode::Factorized => lambda_in_cmin_star_interior(&lambda_t, &cmin)?,
        };
        if !admissible {
            return Err(ThermoError::NotAdmissibleFunctional);
        }
        let weyl = datum.weyl_group()?;
        let compact_pos: Vec<usize> = system
            .positive_roots
            .iter()
            .cloned()
            .filter(|&i| datum.roots()[i].kind == RootKind::Compact)
            .collect();
        // W_k-conjugate of λ with λ(h_α) <= 0 on compact positive coroots
        let coroots: Vec<DVector<f64>> = compact_pos.iter().filter_map(|&i| datum.coroot(i)).collect();
        let lambda = weyl
            .elements
            .iter()
            .map(|w| w.transpose() * &lambda_t)
            .find(|l| coroots.iter().all(|h| l.dot(h) <= 1e-12 * (1.0 + l.norm())))
            .unwrap_or_else(|| lambda_t.clone());
        let mut classes: Vec<(DVector<f64>, DMatrix<f64>)> = Vec::new();
        for w in &weyl.elements {
            let lw = w.transpose() * &lambda;
            if !classes.iter().any(|(l, _)| (l - &lw).amax() <= 1e-9 * (1.0 + lw.amax())) {
                classes.push((lw, w.clone()));
            }
        }
        let all = stabilizer_factors(&datum, &system, &lambda);
        let (factors, noncompact) = match mode {
            DhMode::Full => (all, Vec::new()),
            DhMode::Factorized => {
                let compact = all.into_iter().filter(|f| f.compact).collect();
                let nc = system
                    .noncompact_positive
                    .iter()
                    .map(|&i| RootFactor {
                        root: i,
                        exponent: datum.roots()[i].multiplicity,
                        dim: datum.roots()[i].multiplicity,
                        compact: false,
                    })
                    .collect();
                (compact, nc)
            }
        };
        let cmax = c_max(&datum, &system);
        Ok(DhPartition {
            datum,
            system,
            lambda,
            classes: classes.into_iter().map(|(_, w)| w).collect(),
            factors,
            noncompact,
            cmax,
            mode,
        })
    }

    /// DH partition for a model whose base point lies in `t★`.
    pub fn for_model(model: &OrbitModel, mode: DhMode) -> Result<Self, ThermoError> {
        let datum = RootDatum::from_meta(model.algebra())?;
        let lambda_t = datum.restrict(model.base_point());
        let ext = datum.extend(&lambda_t);
        if (&ext - model.base_point()).amax() > 1e-9 * (1.0 + model.base_point().amax()) {
            return Err(ThermoError::NotInCartanDual);
        }
        let system = system_for(&datum, &lambda_t)?;
        DhPartition::new(datum, system, lambda_t, mode)
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn system(&self) -> &PositiveSystem {
        &self.system
    }

    /// The conjugate of `λ` used in the sum.
    pub fn lambda(&self) -> &DVector<f64> {
        &self.lambda
    }

    pub fn factors(&self) -> &[RootFactor] {
        &self.factors
    }

    /// Roots with `0 < m_α^λ < dim g_C^α`, reported rather than trusted.
    pub fn partial_roots(&self) -> Vec<usize> {
        self.factors.iter().filter(|f| f.exponent < f.dim).map(|f| f.root).collect()
    }

    pub fn classes(&self) -> usize {
        self.classes.len()
    }

    pub fn cmax(&self) -> &Cone {
        &self.cmax
    }

    /// `Z(x)` for `x` in Cartan coordinates.
    pub fn value(&self, x: &DVector<f64>) -> Result<f64, ThermoError> {
        if x.len() != self.datum.rank() {
            return Err(ThermoError::DimensionMismatch {
                expected: self.datum.rank(),
                found: x.len(),
            });
        }
        if !self.cmax.contains(x, true) {
            return Err(ThermoError::OutsideCmax);
        }
        let mut nearest = f64::INFINITY;
        for w in &self.classes {
            let wx = w * x;
            for f in &self.factors {
                let v = self.datum.i_alpha(f.root, &wx);
                if v.abs() <= 1e-9 {
                    return Err(ThermoError::NotRegular { root: f.root, value: v });
                }
                nearest = nearest.min(v.abs());
            }
        }
        let (sum, abs_sum) = self.weyl_sum(x);
        let denom = self.noncompact_denominator(x);
        if nearest >= NEAR_SINGULAR {
            return Ok(sum / denom);
        }
        let cancellation = 1e-16 * self.classes.len() as f64 * abs_sum / sum.abs();
        if cancellation <= 1e-6 {
            return Ok(sum / denom);
        }
        self.extrapolated(x)
    }

    /// Compensated Weyl sum and the sum of absolute terms.
    fn weyl_sum(&self, x: &DVector<f64>) -> (f64, f64) {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut abs_sum = 0.0;
        for w in &self.classes {
            let wx = w * x;
            let mut log_mag = -self.lambda.dot(&wx);
            let mut sign = 1.0;
            for f in &self.factors {
                let v = self.datum.i_alpha(f.root, &wx);
                log_mag -= f.exponent as f64 * v.abs().ln();
                if v < 0.0 && f.exponent % 2 == 1 {
                    sign = -sign;
                }
            }
            let term = sign * log_mag.exp();
            abs_sum += term.abs();
            // Neumaier summation
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        (sum + comp, abs_sum)
    }

    fn noncompact_denominator(&self, x: &DVector<f64>) -> f64 {
        self.noncompact
            .iter()
            .map(|f| self.datum.i_alpha(f.root, x).powi(f.exponent as i32))
            .product()
    }

    /// Symmetric Richardson extrapolation from `x ± δu` along a regular
    /// direction, for sums whose terms cancel catastrophically.
    fn extrapolated(&self, x: &DVector<f64>) -> Result<f64, ThermoError> {
        let u = self
            .datum
            .generic_regular()
            .map(|u| u.normalize())
            .unwrap_or_else(|| DVector::from_element(x.len(), 1.0).normalize());
        let at = |d: f64| -> f64 {
            let (a, _) = self.weyl_sum(&(x + &u * d));
            let (b, _) = self.weyl_sum(&(x - &u * d));
            0.5 * (a / self.noncompact_denominator(&(x + &u * d)) + b / self.noncompact_denominator(&(x - &u * d)))
        };
        let d = 1e-3 * (1.0 + x.norm());
        Ok((4.0 * at(0.5 * d) - at(d)) / 3.0)
    }

    /// `Z(x)` for `x ∈ g`, through a conjugate of `x` in `t`.
    pub fn value_ambient(&self, x: &DVector<f64>) -> Result<f64, ThermoError> {
        let h = match self.datum.to_cartan(x) {
            Some(h) => h,
            None => self.datum.conjugate_into_cartan(x).ok_or(ThermoError::NotConjugate)?,
        };
        self.value(&h)
    }

    pub fn mode(&self) -> DhMode {
        self.mode
    }

    /// View on algebra coordinates.
    pub fn ambient(&self) -> AmbientDh<'_> {
        AmbientDh(self)
    }
}

/// `m_α^λ = dim g_C^α - dim(g_λ,C ∩ g_C^α)` for positive roots with
/// `m_α^λ > 0`.
fn stabilizer_factors(datum: &RootDatum, system: &PositiveSystem, lambda_t: &DVector<f64>) -> Vec<RootFactor> {
    let g = datum.algebra();
    let d = g.dim();
    let lam = datum.extend(lambda_t);
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        let ad = g.ad_matrix(&crate::algebra::unit(d, i));
        let row = ad.transpose() * &lam;
        for j in 0..d {
            a[(j, i)] = row[j];
        }
    }
    let stab = complexify(&linalg::real_null_space(&a, 1e-8));
    let stab_dim = stab.ncols();
    system
        .positive_roots
        .iter()
        .filter_map(|&i| {
            let root = &datum.roots()[i];
            let dim = root.space_basis.ncols();
            let mut both = linalg::CMatrix::zeros(d, dim + stab_dim);
            both.view_mut((0, 0), (d, dim)).copy_from(&root.space_basis);
            if stab_dim > 0 {
                both.view_mut((0, dim), (d, stab_dim)).copy_from(&stab);
            }
            let inter = dim + stab_dim - linalg::rank(&both, 1e-8);
            let m = dim - inter.min(dim);
            (m > 0).then_some(RootFactor {
                root: i,
                exponent: m,
                dim,
                compact: root.kind == RootKind::Compact,
            })
        })
        .collect()
}

impl LogPartition for DhPartition {
    fn dim(&self) -> usize {
        self.datum.rank()
    }

    fn method(&self) -> Method {
        Method::Dh
    }

    fn log_z(&self, x: &DVector<f64>) -> Option<f64> {
        self.value(x).ok().filter(|v| *v > 0.0).map(f64::ln)
    }
}

/// [`DhPartition`] on algebra coordinates.
pub struct AmbientDh<'a>(&'a DhPartition);

impl LogPartition for AmbientDh<'_> {
    fn dim(&self) -> usize {
        self.0.datum.algebra().dim()
    }

    fn method(&self) -> Method {
        Method::Dh
    }

    fn log_z(&self, x: &DVector<f64>) -> Option<f64> {
        self.0.value_ambient(x).ok().filter(|v| *v > 0.0).map(f64::ln)
    }
}

/// Wraps the Gaussian route as a partition function.
pub struct GaussianForm(pub OrbitModel);

impl LogPartition for GaussianForm {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn method(&self) -> Method {
        Method::Gaussian
    }

    fn log_z(&self, x: &DVector<f64>) -> Option<f64> {
        gaussian_route(&self.0, x)?.finite().map(f64::ln)
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoReport {
    pub x: Vec<f64>,
    #[serde(rename = "Z")]
    pub z: Option<f64>,
    pub divergent: bool,
    #[serde(rename = "logZ")]
    pub log_z: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<Vec<f64>>,
    pub entropy: Option<f64>,
    pub fisher: Option<Vec<Vec<f64>>>,
    pub fisher_eigenvalues: Option<Vec<f64>>,
    pub method: Method,
}

impl ThermoReport {
    pub fn compute<F: LogPartition + ?Sized>(f: &F, x: &DVector<f64>) -> Self {
        let log_z = f.log_z(x);
        let mut report = ThermoReport {
            x: x.iter().cloned().collect(),
            z: log_z.map(f64::exp),
            divergent: log_z.is_none(),
            log_z,
            q: None,
            entropy: None,
            fisher: None,
            fisher_eigenvalues: None,
            method: f.method(),
        };
        let Some(lz) = log_z else { return report };
        if let Ok(q) = geometric_heat(f, x) {
            report.entropy = Some(entropy(&q, x, lz));
            report.q = Some(q.iter().cloned().collect());
        }
        if let Ok(h) = fisher_rao(f, x) {
            let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().cloned().collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            report.fisher_eigenvalues = Some(ev);
            report.fisher = Some(h.row_iter().map(|r| r.iter().cloned().collect()).collect());
        }
        report
    }

    /// CSV header for grids of dimension `d`.
    pub fn csv_header(d: usize) -> Vec<String> {
        let mut h: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        h.push("Z".into());
        h.push("logZ".into());
        h.extend((0..d).map(|i| format!("Q{i}")));
        h.push("entropy".into());
        h.extend((0..d).map(|i| format!("fisher_ev{i}")));
        h
    }

    pub fn csv_record(&self) -> Vec<String> {
        let d = self.x.len();
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.17e}")).unwrap_or_else(|| "inf".into());
        let mut r: Vec<String> = self.x.iter().map(|v| format!("{v}")).collect();
        r.push(opt(self.z));
        r.push(opt(self.log_z));
        let empty = |k: usize| -> Vec<String> { vec![String::new(); k] };
        match &self.q {
            Some(q) => r.extend(q.iter().map(|v| format!("{v:.17e}"))),
            None => r.extend(empty(d)),
        }
        r.push(self.entropy.map(|v| format!("{v:.17e}")).unwrap_or_default());
        match &self.fisher_eigenvalues {
            Some(ev) => r.extend(ev.iter().map(|v| format!("{v:.17e}"))),
            None => r.extend(empty(d)),
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn gaussian_values() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(gaussian_laplace(&one, &v(&[0.0])), Value::Finite(1.0));
        let four = DMatrix::from_element(1, 1, 4.0);
        let g = gaussian_laplace(&four, &v(&[2.0])).finite().unwrap();
        assert!((g - 0.5 * 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(gaussian_laplace(&(-one), &v(&[0.0])), Value::Divergent);
    }

    #[test]
    fn catalog_values() {
        let hyp = ClosedForm::new(OrbitModel::sl2_hyperboloid(1.0).unwrap());
        let z = hyp.z(&v(&[2.0, 0.0, 0.0])).finite().unwrap();
        assert!((z - (-2.0f64).exp() / 2.0).abs() < 1e-15);
        let sph = ClosedForm::new(OrbitModel::su2_sphere(1.0).unwrap());
        assert!((sph.z(&v(&[0.0, 0.0, 1.0])).finite().unwrap() - 2.0 * 1f64.sinh()).abs() < 1e-14);
        assert!((sph.z(&v(&[0.0, 0.0, 0.0])).finite().unwrap() - 2.0).abs() < 1e-15);
        let nil = ClosedForm::new(OrbitModel::sl2_nilpotent());
        assert!((nil.z(&v(&[2.0, 1.0, 0.0])).finite().unwrap() - 2.0 * PI / 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(nil.z(&v(&[1.0, 2.0, 0.0])), Value::Divergent);
        let osc = ClosedForm::new(OrbitModel::osc_plane(1.0, 0.0).unwrap());
        let z = osc.z(&v(&[1.0, 0.0, 0.0, 1.0])).finite().unwrap();
        assert!((z - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let cases: Vec<(OrbitModel, DVector<f64>)> = vec![
            (OrbitModel::sl2_nilpotent(), v(&[1.3, 0.4, -0.2])),
            (OrbitModel::sl2_hyperboloid(1.5).unwrap(), v(&[2.0, 0.3, 0.5])),
            (OrbitModel::su2_sphere(1.2).unwrap(), v(&[0.3, -0.7, 0.2])),
            (OrbitModel::su2_sphere(1.2).unwrap(), v(&[1e-6, 0.0, 2e-6])),
            (OrbitModel::osc_plane(1.4, 0.3).unwrap(), v(&[0.2, 0.5, -0.4, 1.1])),
            (OrbitModel::hsp_affine(1, 0.8).unwrap(), v(&[0.1, 0.3, -0.2, 1.2, 0.3, 0.9])),
            ("product:point:1,2+sl2-hyperboloid:1".parse().unwrap(), v(&[0.3, -0.2, 1.5, 0.2, 0.1])),
        ];
        for (m, x) in cases {
            let f = ClosedForm::new(m);
            let (_, g, h) = f.derivatives(&x).unwrap();
            let (gfd, _) = fd_gradient(&f, &x, fd_step(&x)).unwrap();
            assert!((&g - &gfd).norm() <= 1e-6 * (1.0 + g.norm()), "{:?}: {g} vs {gfd}", f.model().family());
            let hfd = fd_hessian(&f, &x).unwrap();
            assert!((&h - &hfd).norm() <= 1e-6 * (1.0 + h.norm()), "{:?}", f.model().family());
        }
    }

    #[test]
    fn gaussian_route_matches_catalog() {
        let osc = OrbitModel::osc_plane(1.3, -0.4).unwrap();
        let hsp = OrbitModel::hsp_affine(2, 0.7).unwrap();
        let x_osc = v(&[0.2, 0.5, -0.4, 1.1]);
        let mut x_hsp = DVector::zeros(hsp.dim());
        x_hsp[0] = 0.4;
        x_hsp[1] = 0.3;
        x_hsp[4] = -0.2;
        // S = diag(1, 2, 1.5, 1) plus a small off-diagonal coupling
        let s = DMatrix::from_row_slice(4, 4, &[1.0, 0.1, 0.0, 0.0, 0.1, 2.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.2, 0.0, 0.0, 0.2, 1.0]);
        let xm = symplectic_j(2) * &s;
        let coords = crate::algebra::sp_coords(2, &xm);
        x_hsp.rows_mut(5, 10).copy_from(&coords);
        for (m, x) in [(osc, x_osc), (hsp, x_hsp)] {
            let a = ClosedForm::new(m.clone()).z(&x).finite().unwrap();
            let b = gaussian_route(&m, &x).unwrap().finite().unwrap();
            assert!((a - b).abs() <= 1e-12 * a, "{a} {b}");
        }
    }

    #[test]
    fn dh_examples() {
        let hyp = OrbitModel::sl2_hyperboloid(1.0).unwrap();
        let dh = DhPartition::for_model(&hyp, DhMode::Full).unwrap();
        assert!((dh.value(&v(&[2.0])).unwrap() - (-2.0f64).exp() / 2.0).abs() < 1e-15);
        let fac = DhPartition::for_model(&hyp, DhMode::Factorized).unwrap();
        assert!((fac.value(&v(&[2.0])).unwrap() - (-2.0f64).exp() / 2.0).abs() < 1e-15);
        assert_eq!(dh.value(&v(&[-1.0])), Err(ThermoError::OutsideCmax));

        let sph = OrbitModel::su2_sphere(1.0).unwrap();
        let dh = DhPartition::for_model(&sph, DhMode::Full).unwrap();
        assert_eq!(dh.classes(), 2);
        for t in [1.0, -0.7, 3.0] {
            assert!((dh.value(&v(&[t])).unwrap() - 2.0 * f64::sinh(t) / t).abs() < 1e-13);
        }
        // near the singular wall the poles cancel
        assert!((dh.value(&v(&[3e-5])).unwrap() - 2.0).abs() < 1e-8);
        assert!(matches!(dh.value(&v(&[1e-10])), Err(ThermoError::NotRegular { .. })));

        // W_k-fixed central shift: Z_{λ+λ0} = e^{-λ0(x)} Z_λ
        let prod: OrbitModel = "product:point:0.7+sl2-hyperboloid:1".parse().unwrap();
        let dh = DhPartition::for_model(&prod, DhMode::Full).unwrap();
        let z = dh.value(&v(&[0.5, 2.0])).unwrap();
        assert!((z - (-0.35f64).exp() * (-2.0f64).exp() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dh_small_time_limit() {
        let hyp = OrbitModel::sl2_hyperboloid(1.0).unwrap();
        let fac = DhPartition::for_model(&hyp, DhMode::Factorized).unwrap();
        let t = 1e-6;
        assert!((fac.value(&v(&[t])).unwrap() * t - 1.0).abs() < 1e-5);
    }

    #[test]
    fn heat_entropy_examples() {
        let nil = ClosedForm::new(OrbitModel::sl2_nilpotent());
        let x = v(&[1.0, 0.0, 0.0]);
        let q = geometric_heat(&nil, &x).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-12 && q[1].abs() < 1e-12);
        let s = entropy(&q, &x, nil.log_z(&x).unwrap());
        assert!((s - (1.0 + (2.0 * PI).ln())).abs() < 1e-12);
        let h = fisher_rao(&nil, &x).unwrap();
        assert!((h.view((0, 0), (2, 2)).into_owned() - DMatrix::identity(2, 2)).amax() < 1e-12);

        let hyp = ClosedForm::new(OrbitModel::sl2_hyperboloid(1.0).unwrap());
        assert!((geometric_heat(&hyp, &x).unwrap()[0] - 2.0).abs() < 1e-12);

        let pt = ClosedForm::new(OrbitModel::point(vec![1.5, -0.5]));
        let x = v(&[0.3, 0.9]);
        let q = geometric_heat(&pt, &x).unwrap();
        assert!(entropy(&q, &x, pt.log_z(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn temperedness() {
        let x = v(&[1.0, 0.0, 0.0]);
        let k = |m: OrbitModel| temperedness_exponent(&ClosedForm::new(m), &x).unwrap().k;
        assert!((k(OrbitModel::sl2_nilpotent()) - 1.0).abs() < 0.05);
        assert!((k(OrbitModel::sl2_hyperboloid(1.0).unwrap()) - 1.0).abs() < 0.05);
        assert!(k(OrbitModel::su2_sphere(1.0).unwrap()).abs() < 0.05);
    }

    #[test]
    fn report_fields() {
        let f = ClosedForm::new(OrbitModel::sl2_nilpotent());
        let r = ThermoReport::compute(&f, &v(&[2.0, 1.0, 0.0]));
        assert!(!r.divergent);
        assert_eq!(r.csv_record().len(), ThermoReport::csv_header(3).len());
        let r = ThermoReport::compute(&f, &v(&[1.0, 2.0, 0.0]));
        assert!(r.divergent && r.z.is_none());
    }
}
