//! Polyhedral cones in `t` and the invariant-cone data attached to a
//! positive system: `C_min` (generated by `i[x_α, x_α*]`, `α ∈ Δ_p⁺`) and
//! `C_max` (cut out by `iα >= 0`, `α ∈ Δ_p⁺`).

mod dd;
mod falsifier;

pub use dd::{generators_of, Generated};
pub use falsifier::{wmin_star_falsifier, FalsifierVerdict, Witness};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::DEFAULT_SEED;
use crate::linalg::{C64, CVector};
use crate::nnls;
use crate::roots::{PositiveSystem, RootDatum};

/// Exact polyhedral conversions are limited to this ambient dimension.
pub const MAX_CONE_DIM: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("ambient dimension {0} exceeds the limit of 12")]
    DimensionTooLarge(usize),
    #[error("vector of length {found} in a cone of dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Closure of all nonnegative combinations.
    Generators(Vec<DVector<f64>>),
    /// `{x : φ_i(x) >= 0}`.
    Inequalities(Vec<DVector<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    ambient_dim: usize,
    repr: Representation,
}

const ZERO_VECTOR: f64 = 1e-12;

fn clean(dim: usize, vectors: Vec<DVector<f64>>) -> Result<Vec<DVector<f64>>, ConeError> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        if v.len() != dim {
            return Err(ConeError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let n = v.norm();
        if n <= ZERO_VECTOR {
            continue;
        }
        let u = v / n;
        if !out.iter().any(|o| (o - &u).amax() <= 1e-9) {
            out.push(u);
        }
    }
    Ok(out)
}

impl Cone {
    /// Cone generated by the given vectors; zero vectors are dropped and the
    /// rest are normalized.
    pub fn from_generators(dim: usize, gens: Vec<DVector<f64>>) -> Result<Self, ConeError> {
        Ok(Cone {
            ambient_dim: dim,
            repr: Representation::Generators(clean(dim, gens)?),
        })
    }

    pub fn from_inequalities(dim: usize, rows: Vec<DVector<f64>>) -> Result<Self, ConeError> {
        Ok(Cone {
            ambient_dim: dim,
            repr: Representation::Inequalities(clean(dim, rows)?),
        })
    }

    pub fn zero(dim: usize) -> Self {
        Cone {
            ambient_dim: dim,
            repr: Representation::Generators(Vec::new()),
        }
    }

    pub fn whole(dim: usize) -> Self {
        Cone {
            ambient_dim: dim,
            repr: Representation::Inequalities(Vec::new()),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        match &self.repr {
            Representation::Generators(v) | Representation::Inequalities(v) => v,
        }
    }

    fn check_dim(&self) -> Result<(), ConeError> {
        if self.ambient_dim > MAX_CONE_DIM {
            Err(ConeError::DimensionTooLarge(self.ambient_dim))
        } else {
            Ok(())
        }
    }

    /// Generating set including both signs of every lineality direction.
    pub fn to_generators(&self) -> Result<Vec<DVector<f64>>, ConeError> {
        match &self.repr {
            Representation::Generators(g) => Ok(g.clone()),
            Representation::Inequalities(rows) => {
                self.check_dim()?;
                Ok(dd::dual_generators(self.ambient_dim, rows))
            }
        }
    }

    /// Defining inequalities; equalities appear as pairs `±φ`.
    pub fn to_inequalities(&self) -> Result<Vec<DVector<f64>>, ConeError> {
        match &self.repr {
            Representation::Inequalities(rows) => Ok(rows.clone()),
            Representation::Generators(g) => {
                self.check_dim()?;
                Ok(dd::dual_generators(self.ambient_dim, g))
            }
        }
    }

    /// `C★ = {φ : φ(c) >= 0 for all c ∈ C}`, with swapped representation.
    pub fn dual(&self) -> Result<Cone, ConeError> {
        self.check_dim()?;
        Ok(match &self.repr {
            Representation::Generators(g) => Cone {
                ambient_dim: self.ambient_dim,
                repr: Representation::Inequalities(g.clone()),
            },
            Representation::Inequalities(rows) => Cone {
                ambient_dim: self.ambient_dim,
                repr: Representation::Generators(rows.clone()),
            },
        })
    }

    /// Same cone, other representation.
    pub fn converted(&self) -> Result<Cone, ConeError> {
        Ok(match &self.repr {
            Representation::Generators(_) => Cone::from_inequalities(self.ambient_dim, self.to_inequalities()?)?,
            Representation::Inequalities(_) => Cone::from_generators(self.ambient_dim, self.to_generators()?)?,
        })
    }

    /// Membership with tolerance scaled by `1 + ‖p‖`; strict membership asks
    /// for the interior.
    pub fn contains(&self, p: &DVector<f64>, strict: bool) -> bool {
        if p.len() != self.ambient_dim {
            return false;
        }
        let scale = 1.0 + p.norm();
        match &self.repr {
            Representation::Inequalities(rows) => rows.iter().all(|a| {
                let v = a.dot(p);
                if strict {
                    v > 1e-9 * scale
                } else {
                    v >= -1e-9 * scale
                }
            }),
            Representation::Generators(g) => {
                if strict {
                    match self.to_inequalities() {
                        Ok(rows) => {
                            let full = Cone {
                                ambient_dim: self.ambient_dim,
                                repr: Representation::Inequalities(rows),
                            };
                            full.contains(p, true)
                        }
                        Err(_) => false,
                    }
                } else if g.is_empty() {
                    p.norm() <= 1e-8 * scale
                } else {
                    let a = dd::as_matrix(self.ambient_dim, g);
                    nnls::nnls(&a, p).residual <= 1e-8 * scale
                }
            }
        }
    }

    /// `C ∩ -C = {0}`.
    pub fn is_pointed(&self) -> bool {
        match &self.repr {
            Representation::Generators(g) => g.is_empty() || nnls::strictly_positive_point(g).is_some(),
            Representation::Inequalities(rows) => {
                crate::linalg::real_rank(&dd::as_matrix(self.ambient_dim, rows).transpose(), 1e-9)
                    == self.ambient_dim
            }
        }
    }

    /// `other ⊆ self`.
    pub fn contains_cone(&self, other: &Cone) -> Result<bool, ConeError> {
        Ok(other.to_generators()?.iter().all(|g| self.contains(g, false)))
    }

    pub fn equals(&self, other: &Cone) -> Result<bool, ConeError> {
        Ok(self.contains_cone(other)? && other.contains_cone(self)?)
    }

    /// A random nonnegative combination of the generators.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<DVector<f64>, ConeError> {
        let gens = self.to_generators()?;
        let mut out = DVector::zeros(self.ambient_dim);
        for g in &gens {
            out += g * rng.random_range(0.0..1.0);
        }
        Ok(out)
    }

    pub fn report(&self, subset_of_cmax: bool) -> ConeReport {
        let (representation, vectors) = match &self.repr {
            Representation::Generators(v) => ("generators", v),
            Representation::Inequalities(v) => ("inequalities", v),
        };
        ConeReport {
            representation: representation.to_string(),
            vectors: vectors.iter().map(|v| v.iter().cloned().collect()).collect(),
            pointed: self.is_pointed(),
            subset_of_cmax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub representation: String,
    pub vectors: Vec<Vec<f64>>,
    pub pointed: bool,
    pub subset_of_cmax: bool,
}

/// Random complex combinations added per root of multiplicity > 1.
const EXTRA_SAMPLES: usize = 8;

/// `C_min ⊆ t`, generated by the Cartan parts of `i[x_α, x_α*]` for root
/// vectors of the non-compact positive roots.
pub fn c_min(rd: &RootDatum, system: &PositiveSystem) -> Cone {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut gens = Vec::new();
    for &i in &system.noncompact_positive {
        let basis = &rd.roots()[i].space_basis;
        for col in basis.column_iter() {
            gens.push(rd.bracket_with_star(&col.into_owned()));
        }
        if basis.ncols() > 1 {
            for _ in 0..EXTRA_SAMPLES {
                let c = CVector::from_fn(basis.ncols(), |_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let x = basis * c;
                let n = x.norm();
                gens.push(rd.bracket_with_star(&(x / C64::new(n, 0.0))));
            }
        }
    }
    Cone::from_generators(rd.rank(), gens).expect("generators live in t")
}

/// `C_max = {x ∈ t : iα(x) >= 0 for α ∈ Δ_p⁺}`.
pub fn c_max(rd: &RootDatum, system: &PositiveSystem) -> Cone {
    let rows = system
        .noncompact_positive
        .iter()
        .map(|&i| -&rd.roots()[i].beta)
        .collect();
    Cone::from_inequalities(rd.rank(), rows).expect("functionals live on t")
}

/// `λ|_t ∈ C_min★`: nonnegative on every generator of `C_min`.
pub fn lambda_in_cmin_star(lambda_t: &DVector<f64>, cmin: &Cone) -> Result<bool, ConeError> {
    Ok(cmin.to_generators()?.iter().all(|g| lambda_t.dot(g) >= -1e-9))
}

/// Same test with strict inequality on every generator (interior of `C_min★`
/// when `C_min` is pointed).
pub fn lambda_in_cmin_star_interior(lambda_t: &DVector<f64>, cmin: &Cone) -> Result<bool, ConeError> {
    Ok(cmin.to_generators()?.iter().all(|g| lambda_t.dot(g) > 1e-9))
}
