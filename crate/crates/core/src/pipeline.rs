//! End-to-end flows: classification of `(g, λ)` pairs, domain scans against
//! the divergence probe, Legendre/heat checks and closed-form verification.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::LieAlgebra;
use crate::cones::{wmin_star_falsifier, FalsifierVerdict, Witness};
use crate::cones::{c_max, c_min, lambda_in_cmin_star, Cone, ConeError, ConeReport};
use crate::config::{Tolerances, DEFAULT_SEED};
use crate::linalg;
use crate::nnls;
use crate::oracle::{self, divergence_probe, laplace_mc, laplace_quadrature, OracleError, Probe, QuadSettings};
use crate::orbits::OrbitModel;
use crate::roots::{PositiveSystem, RootDatum, RootError, RootReport};
use crate::thermo::{fd_gradient, fd_step, ClosedForm, LogPartition};

pub const SCHEMA: u32 = 1;

/// Falsifier samples used by [`classify`] when `λ ∉ t★`.
pub const FALSIFIER_SAMPLES: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("algebra '{0}' has no Cartan metadata")]
    MissingCartanMeta(String),
    #[error("functional has {found} coefficients, algebra has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no Gibbs ensemble exists for this orbit")]
    NoGibbs,
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningCheck {
    pub spanning: bool,
    pub sampled_rank: usize,
    pub dim: usize,
    pub samples: usize,
    /// Basis of the sampled `O_λ⊥`; quotient coordinates when not spanning.
    pub annihilator: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub verdict: bool,
    pub cone_potential: bool,
    pub adapted_system_found: bool,
    pub cmin_pointed: bool,
    pub cmin_in_cmax: bool,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemReport {
    pub regular_element: Vec<f64>,
    pub positive_roots: Vec<usize>,
    pub noncompact_positive: Vec<usize>,
    pub adapted: bool,
}

impl From<&PositiveSystem> for SystemReport {
    fn from(s: &PositiveSystem) -> Self {
        SystemReport {
            regular_element: s.regular_element.iter().cloned().collect(),
            positive_roots: s.positive_roots.clone(),
            noncompact_positive: s.noncompact_positive.clone(),
            adapted: s.adapted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LambdaStatus {
    InCminStar,
    FalsifierNotRefuted { samples: usize },
    Refuted(Witness),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaDescription {
    /// Rows `a` of `C_max° = {h ∈ t : a·h > 0}` in Cartan coordinates.
    pub inequalities: Vec<Vec<f64>>,
    pub whole_algebra: bool,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub schema: u32,
    pub algebra: String,
    pub lambda: Vec<f64>,
    pub lambda_in_cartan_dual: bool,
    pub spanning_check: SpanningCheck,
    pub roots: RootReport,
    pub weyl_order: usize,
    pub admissible: Admissibility,
    pub chosen_system: Option<SystemReport>,
    pub cmin: Option<ConeReport>,
    pub cmax: Option<ConeReport>,
    pub lambda_status: LambdaStatus,
    pub gibbs_exists: bool,
    pub omega_description: OmegaDescription,
}

/// Intermediate products of [`classify`] that later stages reuse.
#[derive(Debug, Clone)]
pub struct Classification {
    pub report: ClassificationReport,
    pub datum: RootDatum,
    pub system: Option<PositiveSystem>,
    pub cmax: Option<Cone>,
}

fn spanning_check(algebra: &LieAlgebra, lambda: &DVector<f64>, seed: u64) -> SpanningCheck {
    let d = algebra.dim();
    let samples = 4 * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = vec![lambda.clone()];
    for _ in 0..samples {
        let y = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        cols.push(algebra.coadjoint_exp(&y) * lambda);
    }
    let m = DMatrix::from_columns(&cols);
    let rank = linalg::real_rank(&m, 1e-8);
    let ann = linalg::real_null_space(&m.transpose(), 1e-8);
    SpanningCheck {
        spanning: rank == d,
        sampled_rank: rank,
        dim: d,
        samples: samples + 1,
        annihilator: ann.column_iter().map(|c| c.iter().cloned().collect()).collect(),
    }
}

/// Gibbs-existence verdict for `(g, λ)` with `λ` in dual coordinates.
pub fn classify(algebra: &LieAlgebra, lambda: &DVector<f64>, seed: u64) -> Result<Classification, PipelineError> {
    if lambda.len() != algebra.dim() {
        return Err(PipelineError::DimensionMismatch {
            expected: algebra.dim(),
            found: lambda.len(),
        });
    }
    let datum = match RootDatum::from_meta(algebra) {
        Err(RootError::MissingCartan) => return Err(PipelineError::MissingCartanMeta(algebra.name().to_string())),
        other => other?,
    };
    let weyl = datum.weyl_group()?;
    let lambda_t = datum.restrict(lambda);
    let in_t_star = (datum.extend(&lambda_t) - lambda).amax() <= 1e-9 * (1.0 + lambda.amax());
    let systems = datum.positive_systems()?;

    struct Candidate {
        system: PositiveSystem,
        cmin: Cone,
        cmax: Cone,
        pointed: bool,
        contained: bool,
        lambda_ok: bool,
    }
    let mut candidates = Vec::new();
    for s in systems.iter().filter(|s| s.adapted) {
        let cmin = c_min(&datum, s);
        let cmax = c_max(&datum, s);
        candidates.push(Candidate {
            pointed: cmin.is_pointed(),
            contained: cmax.contains_cone(&cmin)?,
            lambda_ok: lambda_in_cmin_star(&lambda_t, &cmin)?,
            system: s.clone(),
            cmin,
            cmax,
        });
    }
    let chosen = candidates
        .iter()
        .position(|c| c.pointed && c.contained && c.lambda_ok)
        .or_else(|| candidates.iter().position(|c| c.pointed && c.contained))
        .or(if candidates.is_empty() { None } else { Some(0) });

    let cone_potential = datum.cone_potential();
    let mut reasons = Vec::new();
    if !cone_potential {
        reasons.push("cone potential fails: some non-compact root vector has [x, x*] = 0".to_string());
    }
    if candidates.is_empty() {
        reasons.push("no adapted positive system".to_string());
    }
    let (pointed, contained) = chosen.map_or((false, false), |i| (candidates[i].pointed, candidates[i].contained));
    if chosen.is_some() && !pointed {
        reasons.push("C_min is not pointed".to_string());
    }
    if chosen.is_some() && !contained {
        reasons.push("C_min is not contained in C_max".to_string());
    }
    let admissible = cone_potential && chosen.is_some() && pointed && contained;
    if admissible {
        reasons.push("cone potential, adapted system, pointed C_min ⊆ C_max".to_string());
    }

    let lambda_status = match chosen {
        None => LambdaStatus::FalsifierNotRefuted { samples: 0 },
        Some(i) => {
            let c = &candidates[i];
            if in_t_star && c.lambda_ok {
                LambdaStatus::InCminStar
            } else {
                let gens: Vec<DVector<f64>> = c.cmin.to_generators()?.iter().map(|g| datum.embed(g)).collect();
                match wmin_star_falsifier(algebra, &gens, lambda, FALSIFIER_SAMPLES, seed) {
                    FalsifierVerdict::NotRefuted { samples } => LambdaStatus::FalsifierNotRefuted { samples },
                    FalsifierVerdict::RefutedBy(w) => LambdaStatus::Refuted(w),
                }
            }
        }
    };
    let refuted = matches!(lambda_status, LambdaStatus::Refuted(_));
    let gibbs_exists = admissible && !refuted;

    let (system, cmin_report, cmax_report, cmax) = match chosen {
        Some(i) => {
            let c = &candidates[i];
            (
                Some(c.system.clone()),
                Some(c.cmin.report(c.contained)),
                Some(c.cmax.report(true)),
                Some(c.cmax.clone()),
            )
        }
        None => (None, None, None, None),
    };
    let whole = system.as_ref().is_some_and(|s| s.noncompact_positive.is_empty());
    let omega_description = OmegaDescription {
        inequalities: cmax
            .as_ref()
            .map(|c| c.vectors().iter().map(|v| v.iter().cloned().collect()).collect())
            .unwrap_or_default(),
        whole_algebra: whole && gibbs_exists,
        statement: if !gibbs_exists {
            "Ω_λ = ∅".to_string()
        } else if whole {
            "Ω_λ = Ad(G)·C_max° = g".to_string()
        } else {
            "Ω_λ = Ad(G)·C_max°".to_string()
        },
    };
    let report = ClassificationReport {
        schema: SCHEMA,
        algebra: algebra.name().to_string(),
        lambda: lambda.iter().cloned().collect(),
        lambda_in_cartan_dual: in_t_star,
        spanning_check: spanning_check(algebra, lambda, seed),
        roots: datum.report(),
        weyl_order: weyl.order(),
        admissible: Admissibility {
            verdict: admissible,
            cone_potential,
            adapted_system_found: !candidates.is_empty(),
            cmin_pointed: pointed,
            cmin_in_cmax: contained,
            reasons,
        },
        chosen_system: system.as_ref().map(SystemReport::from),
        cmin: cmin_report,
        cmax: cmax_report,
        lambda_status,
        gibbs_exists,
        omega_description,
    };
    Ok(Classification {
        report,
        datum,
        system,
        cmax,
    })
}

impl Classification {
    /// Predicted membership of `x ∈ g` in `Ω_λ = Ad(G)·C_max°`, using the
    /// Cartan coordinates when known and a conjugation into `t` otherwise.
    pub fn predict(&self, x: &DVector<f64>, cartan: Option<&DVector<f64>>) -> Prediction {
        let Some(cmax) = self.cmax.as_ref().filter(|_| self.report.gibbs_exists) else {
            return Prediction { inside: false, via: Via::NoGibbs };
        };
        let (h, via) = match cartan {
            Some(h) => (Some(h.clone()), Via::Cartan),
            None => match self.datum.to_cartan(x) {
                Some(h) => (Some(h), Via::Cartan),
                None => (self.datum.conjugate_into_cartan(x), Via::Conjugation),
            },
        };
        match h {
            Some(h) => Prediction {
                inside: cmax.contains(&h, true),
                via,
            },
            None => Prediction {
                inside: false,
                via: Via::NotConjugate,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Via {
    Cartan,
    Conjugation,
    NotConjugate,
    NoGibbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub inside: bool,
    pub via: Via,
}

/// A scan point in algebra coordinates, with its Cartan coordinates when it
/// was built as `Ad(exp y)h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub x: DVector<f64>,
    pub cartan: Option<DVector<f64>>,
}

impl GridPoint {
    pub fn raw(x: DVector<f64>) -> Self {
        GridPoint { x, cartan: None }
    }

    pub fn conjugated(datum: &RootDatum, h: DVector<f64>, y: &DVector<f64>) -> Self {
        let x = datum.algebra().adjoint_exp(y) * datum.embed(&h);
        GridPoint { x, cartan: Some(h) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub x: Vec<f64>,
    pub predicted_inside: bool,
    pub via: Via,
    pub probe_finite: bool,
    pub probe_value: Option<f64>,
    pub closed_form: Option<f64>,
    pub mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainScan {
    pub schema: u32,
    pub family: String,
    pub rows: Vec<ScanRow>,
    pub mismatches: usize,
}

/// Predicted `C_max°` membership against [`divergence_probe`] on each point.
pub fn domain_scan(model: &OrbitModel, grid: &[GridPoint], settings: &QuadSettings) -> Result<DomainScan, PipelineError> {
    let cls = classify(model.algebra(), model.base_point(), DEFAULT_SEED)?;
    let closed = ClosedForm::new(model.clone());
    let rows: Vec<ScanRow> = grid
        .iter()
        .map(|g| {
            let pred = cls.predict(&g.x, g.cartan.as_ref());
            let probe = divergence_probe(model, &g.x, settings);
            let (finite, value) = match &probe {
                Probe::Finite(e) => (true, Some(e.value)),
                Probe::Divergent(_) => (false, None),
            };
            ScanRow {
                x: g.x.iter().cloned().collect(),
                predicted_inside: pred.inside,
                via: pred.via,
                probe_finite: finite,
                probe_value: value,
                closed_form: closed.z(&g.x).finite(),
                mismatch: pred.inside != finite,
            }
        })
        .collect();
    let mismatches = rows.iter().filter(|r| r.mismatch).count();
    Ok(DomainScan {
        schema: SCHEMA,
        family: model.family().to_string(),
        rows,
        mismatches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendreReport {
    pub schema: u32,
    pub family: String,
    pub n_x: usize,
    pub n_orbit: usize,
    pub seed: u64,
    /// Largest hull distance of `Q(x)` relative to the sample spread.
    pub max_hull_distance: f64,
    pub containment_failures: usize,
    pub injectivity_pairs: usize,
    pub min_pair_separation: f64,
    pub injectivity_failures: usize,
    pub max_center_defect: f64,
    pub max_fd_error: f64,
    pub passed: bool,
}

pub const HULL_SLACK: f64 = 1e-3;
pub const SEPARATION: f64 = 1e-6;
pub const CENTER_TOL: f64 = 1e-7;
pub const FD_TOL: f64 = 1e-6;

/// Points of `Ω = Ad(G)·C_max°`: interior combinations of `C_max`
/// generators conjugated by `exp(ad y)` with `‖y‖ <= 0.5`.
pub fn sample_omega(cls: &Classification, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<GridPoint>, PipelineError> {
    let cmax = cls.cmax.as_ref().ok_or(PipelineError::NoGibbs)?;
    let r = cls.datum.rank();
    let gens = cmax.to_generators()?;
    let d = cls.datum.algebra().dim();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 100 * n {
        attempts += 1;
        let mut h = DVector::from_fn(r, |_, _| rng.random_range(-0.5..0.5));
        for g in &gens {
            h += g * rng.random_range(0.2..1.5);
        }
        if !cmax.contains(&h, true) || !cls.datum.is_regular(&h) {
            continue;
        }
        let y: DVector<f64> = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let y = &y * (rng.random_range(0.0..0.5) / y.norm().max(1e-12));
        out.push(GridPoint::conjugated(&cls.datum, h, &y));
    }
    Ok(out)
}

/// Hull distance of `q` from the points, relative to their RMS spread.
pub fn hull_distance(points: &[DVector<f64>], q: &DVector<f64>) -> f64 {
    let diffs: Vec<DVector<f64>> = points.iter().map(|p| p - q).collect();
    let spread = (diffs.iter().map(|v| v.norm_squared()).sum::<f64>() / diffs.len() as f64).sqrt();
    if spread == 0.0 {
        return 0.0;
    }
    let (_, p) = nnls::min_norm_point(&diffs);
    p.norm() / spread
}

/// Image of the heat map on sampled temperatures: hull containment,
/// injectivity modulo the center, center invariance and the
/// finite-difference identity `Q = -∇log Z`.
pub fn legendre_check(model: &OrbitModel, n_x: usize, n_orbit: usize, seed: u64, settings: &QuadSettings) -> Result<LegendreReport, PipelineError> {
    let cls = classify(model.algebra(), model.base_point(), seed)?;
    if !cls.report.gibbs_exists {
        return Err(PipelineError::NoGibbs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let closed = ClosedForm::new(model.clone());
    let points: Vec<GridPoint> = sample_omega(&cls, 4 * n_x, &mut rng)?
        .into_iter()
        .filter(|g| closed.log_z(&g.x).is_some())
        .take(n_x)
        .collect();
    let center = model.algebra().center(&Tolerances::DEFAULT);
    let mut max_hull: f64 = 0.0;
    let mut containment_failures = 0;
    let mut max_center: f64 = 0.0;
    let mut max_fd: f64 = 0.0;
    let mut qs = Vec::with_capacity(points.len());
    for (k, g) in points.iter().enumerate() {
        let q = -closed.gradient(&g.x).ok_or(PipelineError::NoGibbs)?;
        let (fd, _) = fd_gradient(&closed, &g.x, fd_step(&g.x)).ok_or(PipelineError::NoGibbs)?;
        max_fd = max_fd.max((&q + fd).norm() / (1.0 + q.norm()));
        let sample = oracle::gibbs_sample(model, &g.x, 20 * n_orbit, seed.wrapping_add(k as u64), settings)?;
        let orbit_pts = sample.resample(n_orbit, &mut rng);
        let dist = hull_distance(&orbit_pts, &q);
        max_hull = max_hull.max(dist);
        if dist > HULL_SLACK {
            containment_failures += 1;
        }
        if center.ncols() > 0 {
            let z = &center * DVector::from_fn(center.ncols(), |_, _| rng.random_range(-2.0..2.0));
            if let Some(qz) = closed.gradient(&(&g.x + z)) {
                max_center = max_center.max((-qz - &q).norm());
            }
        }
        qs.push(q);
    }
    // injectivity modulo z(g)
    let d = model.dim();
    let proj = if center.ncols() > 0 {
        DMatrix::identity(d, d) - &center * center.clone().pseudo_inverse(1e-12).expect("nonnegative epsilon")
    } else {
        DMatrix::identity(d, d)
    };
    let mut pairs = 0;
    let mut min_sep = f64::INFINITY;
    let mut injectivity_failures = 0;
    if points.len() >= 2 {
        for _ in 0..50 {
            let i = rng.random_range(0..points.len());
            let j = rng.random_range(0..points.len());
            if (&proj * (&points[i].x - &points[j].x)).norm() <= 1e-6 {
                continue;
            }
            pairs += 1;
            let sep = (&qs[i] - &qs[j]).norm();
            min_sep = min_sep.min(sep);
            if sep <= SEPARATION {
                injectivity_failures += 1;
            }
        }
    }
    let passed = containment_failures == 0 && injectivity_failures == 0 && max_center <= CENTER_TOL && max_fd <= FD_TOL;
    Ok(LegendreReport {
        schema: SCHEMA,
        family: model.family().to_string(),
        n_x: points.len(),
        n_orbit,
        seed,
        max_hull_distance: max_hull,
        containment_failures,
        injectivity_pairs: pairs,
        min_pair_separation: min_sep,
        injectivity_failures,
        max_center_defect: max_center,
        max_fd_error: max_fd,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub x: Vec<f64>,
    pub closed_form: Option<f64>,
    pub quadrature: Option<f64>,
    pub quadrature_rel_error: Option<f64>,
    pub monte_carlo: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// `|MC - closed| / stderr`.
    pub mc_z: Option<f64>,
    pub pass: bool,
}

/// Closed form against quadrature (when the parameter dimension allows) and
/// importance sampling on each grid point. A row passes when the quadrature
/// relative error is at most `tol` and the MC estimate lies within three
/// standard errors; divergent points pass when every route diverges.
pub fn verify_grid(model: &OrbitModel, grid: &[DVector<f64>], tol: f64, samples: usize, seed: u64, settings: &QuadSettings) -> Vec<VerifyRow> {
    let closed = ClosedForm::new(model.clone());
    grid.iter()
        .map(|x| {
            let z = closed.z(x).finite();
            let quad = if model.param_dim() <= 2 {
                laplace_quadrature(model, x, settings).ok().map(|e| e.value)
            } else {
                None
            };
            let mc = if samples > 0 { laplace_mc(model, x, samples, seed, settings).ok() } else { None };
            let rel = match (z, quad) {
                (Some(z), Some(q)) => Some((q - z).abs() / z.abs()),
                _ => None,
            };
            let mc_z = match (z, &mc) {
                (Some(z), Some(e)) if e.stderr > 0.0 => Some((e.value - z).abs() / e.stderr),
                (Some(z), Some(e)) => Some(if (e.value - z).abs() <= 1e-12 * z.abs() { 0.0 } else { f64::INFINITY }),
                _ => None,
            };
            let pass = match z {
                Some(_) => {
                    let quad_ok = model.param_dim() > 2 || rel.is_some_and(|r| r <= tol);
                    let mc_ok = samples == 0 || mc_z.is_some_and(|m| m <= 3.0);
                    quad_ok && mc_ok
                }
                None => quad.is_none() && !divergence_probe(model, x, settings).is_finite(),
            };
            VerifyRow {
                x: x.iter().cloned().collect(),
                closed_form: z,
                quadrature: quad,
                quadrature_rel_error: rel,
                monte_carlo: mc.as_ref().map(|e| e.value),
                mc_stderr: mc.as_ref().map(|e| e.stderr),
                mc_z,
                pass,
            }
        })
        .collect()
}

/// Five-point grid inside the geometric temperature of each catalog family.
pub fn default_grid(model: &OrbitModel) -> Vec<DVector<f64>> {
    use crate::orbits::Family;
    let v = |x: &[f64]| DVector::from_vec(x.to_vec());
    match model.family() {
        Family::Sl2Nilpotent => vec![v(&[1.0, 0.0, 0.0]), v(&[2.0, 1.0, 0.0]), v(&[1.0, 0.5, 0.0]), v(&[1.5, 0.3, -0.4]), v(&[3.0, 0.0, 2.0])],
        Family::Sl2Hyperboloid { .. } => vec![v(&[0.5, 0.0, 0.0]), v(&[1.0, 0.0, 0.0]), v(&[2.0, 0.0, 0.0]), v(&[1.5, 0.5, 0.2]), v(&[2.0, -1.0, 0.5])],
        Family::Su2Sphere { .. } => vec![v(&[0.0, 0.0, 0.5]), v(&[0.0, 0.0, 1.0]), v(&[0.0, 0.0, 2.0]), v(&[0.3, -0.4, 0.1]), v(&[-1.0, 0.5, -2.0])],
        Family::OscPlane { .. } => vec![
            v(&[0.0, 0.0, 0.0, 1.0]),
            v(&[1.0, 0.0, 0.0, 1.0]),
            v(&[0.5, 0.3, -0.2, 0.7]),
            v(&[-0.3, 1.0, 0.5, 2.0]),
            v(&[0.2, -0.4, 0.1, 0.4]),
        ],
        _ => {
            let cls = classify(model.algebra(), model.base_point(), DEFAULT_SEED);
            let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
            match cls.ok().and_then(|c| sample_omega(&c, 5, &mut rng).ok()) {
                Some(pts) => pts.into_iter().map(|g| g.x).collect(),
                None => Vec::new(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_mot2, build_so12, build_su2};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn sl2_verdicts() {
        let g = build_so12();
        let c = classify(&g, &v(&[1.0, 0.0, 0.0]), 42).unwrap().report;
        assert!(c.gibbs_exists);
        assert_eq!(c.lambda_status, LambdaStatus::InCminStar);
        assert!(c.spanning_check.spanning);
        let c = classify(&g, &v(&[0.0, 1.0, 0.0]), 42).unwrap().report;
        assert!(matches!(c.lambda_status, LambdaStatus::Refuted(_)));
        assert!(!c.gibbs_exists && c.admissible.verdict);
        let c = classify(&g, &v(&[1.0, 0.3, 0.1]), 42).unwrap().report;
        assert!(matches!(c.lambda_status, LambdaStatus::FalsifierNotRefuted { .. }));
        assert!(c.gibbs_exists);
    }

    #[test]
    fn su2_and_mot2() {
        let c = classify(&build_su2(), &v(&[0.2, -0.5, 1.0]), 42).unwrap().report;
        assert!(c.gibbs_exists && c.omega_description.whole_algebra);
        let c = classify(&build_mot2(), &v(&[1.0, 0.0, 0.0]), 42).unwrap().report;
        assert!(!c.admissible.cone_potential && !c.gibbs_exists);
    }

    #[test]
    fn idempotent() {
        let g = build_so12();
        let a = classify(&g, &v(&[1.0, 0.3, 0.1]), 7).unwrap().report;
        let b = classify(&g, &v(&[1.0, 0.3, 0.1]), 7).unwrap().report;
        assert_eq!(a, b);
    }

    #[test]
    fn hyperboloid_scan() {
        let m = OrbitModel::sl2_hyperboloid(1.0).unwrap();
        let grid: Vec<GridPoint> = [-1.0, -0.1, 0.1, 1.0].iter().map(|&t| GridPoint::raw(v(&[t, 0.0, 0.0]))).collect();
        let scan = domain_scan(&m, &grid, &QuadSettings::default()).unwrap();
        let finite: Vec<bool> = scan.rows.iter().map(|r| r.probe_finite).collect();
        assert_eq!(finite, vec![false, false, true, true]);
        assert_eq!(scan.mismatches, 0);
    }

    #[test]
    fn point_legendre() {
        let m = OrbitModel::point(vec![1.0]);
        let r = legendre_check(&m, 5, 10, 42, &QuadSettings::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_hull_distance == 0.0);
    }
}
