//! Parametrized coadjoint orbits with Liouville densities.
//!
//! Each model maps a parameter domain in `R^{2n}` into `g★` (dual
//! coordinates) and carries the Liouville density with respect to Lebesgue
//! measure on the parameters, normalized as `ω^n / ((2π)^n n!)`.
//!
//! The sl2 families live on `so(1,2)` (basis `z0, b1, b2`), where the
//! invariant quadratic form on `g★` is `x0² - x1² - x2²`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use thiserror::Error;

use crate::algebra::{build_abelian, build_hsp, build_osc, build_so12, build_su2, direct_sum, symplectic_j, LieAlgebra};

/// Hyperboloid density constant: `κ / √(m² + r²)` in the coordinates
/// `(x1, x2)`. Matching `∫ e^{-t x0} dμ = e^{-tm}/t` gives
/// `2πκ ∫_m^∞ e^{-tu} du = e^{-tm}/t`, i.e. `κ = 1/(2π)`.
pub const HYPERBOLOID_KAPPA: f64 = 1.0 / (2.0 * PI);

/// Sphere density per unit radius: `(ρ/2π) sin θ`, fixed by total mass `2ρ`.
pub const SPHERE_NORMALIZATION: f64 = 1.0 / (2.0 * PI);

/// Gaussian constant for the affine `hsp` orbits. With Liouville measure
/// `(λ_c/2π)^n dv` the Laplace transform is exactly
/// `e^{-λ_c c} det(S)^{-1/2} e^{(λ_c/2) (Jw)ᵀ S⁻¹ (Jw)}`, so `c_V = 1`.
pub const C_V: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("expected {expected} parameters, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown orbit family '{0}'")]
    UnknownFamily(String),
    #[error("malformed family arguments in '{0}'")]
    BadArguments(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Sl2Nilpotent,
    Sl2Hyperboloid { m: f64 },
    Su2Sphere { rho: f64 },
    OscPlane { lambda_c: f64, lambda_z: f64 },
    HspAffine { n: usize, lambda_c: f64 },
    Point { lambda0: Vec<f64> },
    Product(Vec<OrbitModel>),
}

/// Shape of one parameter axis, used by the integration oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Real,
    /// `(0, ∞)`.
    HalfLine,
    Interval(f64, f64),
    /// `[0, period)`, integrand periodic.
    Periodic(f64),
}

impl Axis {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Axis::Interval(..) | Axis::Periodic(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitModel {
    algebra: LieAlgebra,
    base_point: DVector<f64>,
    family: Family,
}

fn positive(name: &'static str, value: f64) -> Result<f64, OrbitError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(OrbitError::NonPositive { name, value })
    }
}

impl OrbitModel {
    /// Nilpotent cone `x0 = |x⃗|`, parameters `(r, φ)`, density 1.
    pub fn sl2_nilpotent() -> Self {
        OrbitModel {
            algebra: build_so12(),
            base_point: DVector::from_vec(vec![1.0, 1.0, 0.0]),
            family: Family::Sl2Nilpotent,
        }
    }

    /// Upper sheet of `x0² - x1² - x2² = m²`, parameters `(x1, x2)`.
    pub fn sl2_hyperboloid(m: f64) -> Result<Self, OrbitError> {
        let m = positive("m", m)?;
        Ok(OrbitModel {
            algebra: build_so12(),
            base_point: DVector::from_vec(vec![m, 0.0, 0.0]),
            family: Family::Sl2Hyperboloid { m },
        })
    }

    /// Sphere of radius `ρ` in `su2★`, parameters `(θ, φ)`.
    pub fn su2_sphere(rho: f64) -> Result<Self, OrbitError> {
        let rho = positive("rho", rho)?;
        Ok(OrbitModel {
            algebra: build_su2(),
            base_point: DVector::from_vec(vec![0.0, 0.0, rho]),
            family: Family::Su2Sphere { rho },
        })
    }

    /// Oscillator orbit through `λ` with `λ(c) = λ_c`, `λ(z0) = λ_z`,
    /// `λ|_V = 0`; parameters `v ∈ R²`.
    pub fn osc_plane(lambda_c: f64, lambda_z: f64) -> Result<Self, OrbitError> {
        let lambda_c = positive("lambda_c", lambda_c)?;
        Ok(OrbitModel {
            algebra: build_osc(),
            base_point: DVector::from_vec(vec![lambda_c, 0.0, 0.0, lambda_z]),
            family: Family::OscPlane { lambda_c, lambda_z },
        })
    }

    /// Orbit of `λ_c·ev_0` in `hsp(2n)★`; parameters `v ∈ R^{2n}`.
    pub fn hsp_affine(n: usize, lambda_c: f64) -> Result<Self, OrbitError> {
        let lambda_c = positive("lambda_c", lambda_c)?;
        let algebra = build_hsp(n);
        let mut base_point = DVector::zeros(algebra.dim());
        base_point[0] = lambda_c;
        Ok(OrbitModel {
            algebra,
            base_point,
            family: Family::HspAffine { n, lambda_c },
        })
    }

    /// One-point orbit `{λ0}` of the abelian algebra `R^k`.
    pub fn point(lambda0: Vec<f64>) -> Self {
        let k = lambda0.len().max(1);
        let mut l = lambda0;
        l.resize(k, 0.0);
        OrbitModel {
            algebra: build_abelian(k),
            base_point: DVector::from_vec(l.clone()),
            family: Family::Point { lambda0: l },
        }
    }

    /// Product orbit in the dual of the direct sum of the factor algebras.
    pub fn product(models: Vec<OrbitModel>) -> Result<Self, OrbitError> {
        let first = models.first().ok_or_else(|| OrbitError::BadArguments("empty product".into()))?;
        let mut algebra = first.algebra.clone();
        for m in &models[1..] {
            algebra = direct_sum(&algebra, &m.algebra);
        }
        let base: Vec<f64> = models.iter().flat_map(|m| m.base_point.iter().cloned()).collect();
        Ok(OrbitModel {
            algebra,
            base_point: DVector::from_vec(base),
            family: Family::Product(models),
        })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.base_point
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn axes(&self) -> Vec<Axis> {
        match &self.family {
            Family::Sl2Nilpotent => vec![Axis::HalfLine, Axis::Periodic(2.0 * PI)],
            Family::Sl2Hyperboloid { .. } => vec![Axis::Real, Axis::Real],
            Family::Su2Sphere { .. } => vec![Axis::Interval(0.0, PI), Axis::Periodic(2.0 * PI)],
            Family::OscPlane { .. } => vec![Axis::Real, Axis::Real],
            Family::HspAffine { n, .. } => vec![Axis::Real; 2 * n],
            Family::Point { .. } => Vec::new(),
            Family::Product(ms) => ms.iter().flat_map(|m| m.axes()).collect(),
        }
    }

    pub fn param_dim(&self) -> usize {
        self.axes().len()
    }

    /// Parameters mapped to the base point.
    pub fn reference_param(&self) -> DVector<f64> {
        match &self.family {
            Family::Sl2Nilpotent => DVector::from_vec(vec![1.0, 0.0]),
            Family::Product(ms) => {
                DVector::from_vec(ms.iter().flat_map(|m| m.reference_param().iter().cloned().collect::<Vec<_>>()).collect())
            }
            _ => DVector::zeros(self.param_dim()),
        }
    }

    fn check_params(&self, p: &DVector<f64>) -> Result<(), OrbitError> {
        if p.len() != self.param_dim() {
            Err(OrbitError::DimensionMismatch {
                expected: self.param_dim(),
                found: p.len(),
            })
        } else {
            Ok(())
        }
    }

    /// The momentum image `Ψ(p) ∈ g★`.
    pub fn embed(&self, p: &DVector<f64>) -> Result<DVector<f64>, OrbitError> {
        self.check_params(p)?;
        Ok(self.embed_unchecked(p.as_slice()))
    }

    pub(crate) fn embed_unchecked(&self, p: &[f64]) -> DVector<f64> {
        match &self.family {
            Family::Sl2Nilpotent => {
                let (r, phi) = (p[0], p[1]);
                DVector::from_vec(vec![r, r * phi.cos(), r * phi.sin()])
            }
            Family::Sl2Hyperboloid { m } => {
                let x0 = (m * m + p[0] * p[0] + p[1] * p[1]).sqrt();
                DVector::from_vec(vec![x0, p[0], p[1]])
            }
            Family::Su2Sphere { rho } => {
                let (st, ct) = p[0].sin_cos();
                let (sp, cp) = p[1].sin_cos();
                DVector::from_vec(vec![rho * st * cp, rho * st * sp, rho * ct])
            }
            Family::OscPlane { lambda_c, lambda_z } => {
                let (q, pp) = (p[0], p[1]);
                // Jv = (p, -q)
                DVector::from_vec(vec![
                    *lambda_c,
                    lambda_c * pp,
                    -lambda_c * q,
                    lambda_c * 0.25 * (q * q + pp * pp) + lambda_z,
                ])
            }
            Family::HspAffine { n, lambda_c } => hsp_embed(*n, *lambda_c, p),
            Family::Point { lambda0 } => DVector::from_vec(lambda0.clone()),
            Family::Product(ms) => {
                let mut out = Vec::with_capacity(self.dim());
                let mut offset = 0;
                for m in ms {
                    let k = m.param_dim();
                    out.extend(m.embed_unchecked(&p[offset..offset + k]).iter().cloned());
                    offset += k;
                }
                DVector::from_vec(out)
            }
        }
    }

    /// Liouville density with respect to Lebesgue measure on parameters.
    pub fn density(&self, p: &DVector<f64>) -> Result<f64, OrbitError> {
        self.check_params(p)?;
        Ok(self.density_unchecked(p.as_slice()))
    }

    pub(crate) fn density_unchecked(&self, p: &[f64]) -> f64 {
        match &self.family {
            Family::Sl2Nilpotent => 1.0,
            Family::Sl2Hyperboloid { m } => HYPERBOLOID_KAPPA / (m * m + p[0] * p[0] + p[1] * p[1]).sqrt(),
            Family::Su2Sphere { rho } => SPHERE_NORMALIZATION * rho * p[0].sin(),
            Family::OscPlane { lambda_c, .. } => C_V * lambda_c / (2.0 * PI),
            Family::HspAffine { n, lambda_c } => C_V * (lambda_c / (2.0 * PI)).powi(*n as i32),
            Family::Point { .. } => 1.0,
            Family::Product(ms) => {
                let mut offset = 0;
                let mut out = 1.0;
                for m in ms {
                    let k = m.param_dim();
                    out *= m.density_unchecked(&p[offset..offset + k]);
                    offset += k;
                }
                out
            }
        }
    }

    /// `H_x(p) = Ψ(p)(x)`.
    pub fn hamiltonian(&self, x: &DVector<f64>, p: &[f64]) -> f64 {
        self.embed_unchecked(p).dot(x)
    }

    /// Left inverse of [`embed`](Self::embed) on the image.
    pub fn chart(&self, xi: &DVector<f64>) -> DVector<f64> {
        match &self.family {
            Family::Sl2Nilpotent => {
                let r = 0.5 * (xi[0] + (xi[1] * xi[1] + xi[2] * xi[2]).sqrt());
                DVector::from_vec(vec![r, xi[2].atan2(xi[1]).rem_euclid(2.0 * PI)])
            }
            Family::Sl2Hyperboloid { .. } => DVector::from_vec(vec![xi[1], xi[2]]),
            Family::Su2Sphere { .. } => {
                let r = xi.norm();
                let theta = if r > 0.0 { (xi[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
                DVector::from_vec(vec![theta, xi[1].atan2(xi[0]).rem_euclid(2.0 * PI)])
            }
            Family::OscPlane { lambda_c, .. } => DVector::from_vec(vec![-xi[2] / lambda_c, xi[1] / lambda_c]),
            Family::HspAffine { n, lambda_c } => {
                // ξ_w = λ_c J v, so v = -J ξ_w / λ_c
                let xw = xi.rows(1, 2 * n).into_owned();
                -(symplectic_j(*n) * xw) / *lambda_c
            }
            Family::Point { .. } => DVector::zeros(0),
            Family::Product(ms) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for m in ms {
                    let d = m.dim();
                    out.extend(m.chart(&xi.rows(offset, d).into_owned()).iter().cloned());
                    offset += d;
                }
                DVector::from_vec(out)
            }
        }
    }

    /// Distance from `Ad*(exp y) Ψ(p)` to the embedded image, measured
    /// through the chart.
    pub fn equivariance_defect(&self, y: &DVector<f64>, p: &DVector<f64>) -> Result<f64, OrbitError> {
        let xi = self.embed(p)?;
        let moved = self.algebra.coadjoint_exp(y) * xi;
        let back = self.embed_unchecked(self.chart(&moved).as_slice());
        Ok((back - &moved).norm() / (1.0 + moved.norm()))
    }

    /// Factors of a product model (the model itself otherwise).
    pub fn factors(&self) -> Vec<&OrbitModel> {
        match &self.family {
            Family::Product(ms) => ms.iter().collect(),
            _ => vec![self],
        }
    }
}

fn hsp_embed(n: usize, lambda_c: f64, v: &[f64]) -> DVector<f64> {
    let m = 2 * n;
    let d = 1 + m + n * (2 * n + 1);
    let mut out = DVector::zeros(d);
    out[0] = lambda_c;
    // Jv: (p, -q)
    for k in 0..n {
        out[1 + k] = lambda_c * v[n + k];
        out[1 + n + k] = -lambda_c * v[k];
    }
    // x_ab = J S_ab: H = ½ vᵀ S_ab v
    let mut idx = 1 + m;
    for a in 0..m {
        for b in a..m {
            out[idx] = if a == b {
                lambda_c * 0.5 * v[a] * v[a]
            } else {
                lambda_c * v[a] * v[b]
            };
            idx += 1;
        }
    }
    out
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Sl2Nilpotent => write!(f, "sl2-nilpotent"),
            Family::Sl2Hyperboloid { m } => write!(f, "sl2-hyperboloid:{m}"),
            Family::Su2Sphere { rho } => write!(f, "su2:{rho}"),
            Family::OscPlane { lambda_c, lambda_z } => write!(f, "osc:{lambda_c},{lambda_z}"),
            Family::HspAffine { n, lambda_c } => write!(f, "hsp:{n},{lambda_c}"),
            Family::Point { lambda0 } => {
                let parts: Vec<String> = lambda0.iter().map(|v| v.to_string()).collect();
                write!(f, "point:{}", parts.join(","))
            }
            Family::Product(ms) => {
                let parts: Vec<String> = ms.iter().map(|m| m.family.to_string()).collect();
                write!(f, "product:{}", parts.join("+"))
            }
        }
    }
}

fn numbers(text: &str, args: &str) -> Result<Vec<f64>, OrbitError> {
    args.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| OrbitError::BadArguments(text.into())))
        .collect()
}

impl FromStr for OrbitModel {
    type Err = OrbitError;

    /// `sl2-nilpotent | sl2-hyperboloid:m | su2:rho | osc:lc,lz | hsp:n,lc |
    /// point:l1,..,lk | product:A+B+...`
    fn from_str(text: &str) -> Result<Self, OrbitError> {
        let text = text.trim();
        let (name, args) = text.split_once(':').unwrap_or((text, ""));
        let nums = |expected: usize| -> Result<Vec<f64>, OrbitError> {
            let v = numbers(text, args)?;
            if v.len() == expected {
                Ok(v)
            } else {
                Err(OrbitError::BadArguments(text.into()))
            }
        };
        match name {
            "sl2-nilpotent" => Ok(OrbitModel::sl2_nilpotent()),
            "sl2-hyperboloid" => OrbitModel::sl2_hyperboloid(nums(1)?[0]),
            "su2" => OrbitModel::su2_sphere(nums(1)?[0]),
            "osc" => {
                let v = nums(2)?;
                OrbitModel::osc_plane(v[0], v[1])
            }
            "hsp" => {
                let v = nums(2)?;
                if v[0] < 1.0 || v[0].fract() != 0.0 {
                    return Err(OrbitError::BadArguments(text.into()));
                }
                OrbitModel::hsp_affine(v[0] as usize, v[1])
            }
            "point" => Ok(OrbitModel::point(numbers(text, args)?)),
            "product" => {
                let models = args.split('+').map(str::parse).collect::<Result<Vec<OrbitModel>, _>>()?;
                OrbitModel::product(models)
            }
            _ => Err(OrbitError::UnknownFamily(text.into())),
        }
    }
}
