//! Independent numerical Laplace transforms over orbit parametrizations:
//! composite Gauss-Legendre quadrature with adaptive truncation, a
//! divergence probe over nested radii, and seeded importance sampling.
//!
//! Integrands are handled in log space. Monte Carlo work is split into
//! chunks of [`CHUNK`] samples; chunk `k` draws from stream `k` of a ChaCha8
//! generator seeded with the user seed, and partial sums are reduced in
//! chunk order, so results are bitwise reproducible for a fixed seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::orbits::{Axis, OrbitModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("likely divergent: no decay of the integrand up to radius {radius}")]
    NoDecayDirection { radius: f64 },
    #[error("infinite variance suspected: top weights carry {share:.3} of the total")]
    InfiniteVariance { share: f64 },
    #[error("quadrature supports at most {max} parameters, got {dim}")]
    TooManyDimensions { dim: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Monte Carlo standard error (0 for quadrature).
    pub stderr: f64,
    /// Quadrature refinement bound (0 for Monte Carlo).
    pub bound: f64,
    pub samples_or_nodes: usize,
    pub seed: Option<u64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadSettings {
    /// Panels per axis; each panel carries [`ORDER`] nodes.
    pub level: usize,
    /// Start radius is `radius_factor·(1 + 1/‖x‖)`.
    pub radius_factor: f64,
    /// Relative change allowed between a rule and its refinement.
    pub tol: f64,
    /// Divergence threshold on `I(8R)/I(2R)`.
    pub growth: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            level: 10,
            radius_factor: 30.0,
            tol: 1e-8,
            growth: 1.5,
        }
    }
}

/// Nodes per Gauss-Legendre panel.
pub const ORDER: usize = 20;
/// Required drop of the log-integrand from its peak to the truncation boundary.
pub const TAIL_GAP: f64 = 45.0;
pub const MAX_QUAD_DIM: usize = 4;
pub const CHUNK: usize = 4096;
const MAX_DOUBLINGS: usize = 4;
const MAX_TENSOR_NODES: usize = 20_000_000;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (nodes, weights)
}

/// One-dimensional rule with log-weights.
#[derive(Debug, Clone)]
struct Rule {
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
}

fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut log_weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            log_weights.push((0.5 * h * wi).ln());
        }
    }
    Rule { nodes, log_weights }
}

/// Running log-sum-exp.
#[derive(Debug, Clone, Copy)]
struct Lse {
    max: f64,
    sum: f64,
}

impl Lse {
    const EMPTY: Lse = Lse {
        max: f64::NEG_INFINITY,
        sum: 0.0,
    };

    fn push(&mut self, l: f64) {
        if l.is_nan() {
            self.max = f64::NAN;
            return;
        }
        if l == f64::NEG_INFINITY {
            return;
        }
        if l > self.max {
            self.sum = self.sum * (self.max - l).exp() + 1.0;
            self.max = l;
        } else {
            self.sum += (l - self.max).exp();
        }
    }

    fn merge(mut self, o: Lse) -> Lse {
        if o.max.is_nan() || self.max.is_nan() {
            self.max = f64::NAN;
            return self;
        }
        if o.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return o;
        }
        if o.max > self.max {
            Lse {
                max: o.max,
                sum: o.sum + self.sum * (self.max - o.max).exp(),
            }
        } else {
            Lse {
                max: self.max,
                sum: self.sum + o.sum * (o.max - self.max).exp(),
            }
        }
    }

    fn value(self) -> f64 {
        if self.max.is_nan() {
            f64::NAN
        } else if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `log ∫ e^{log_f}` over a tensor product of rules. Parallel over the first
/// axis with partial results combined in index order.
fn tensor_log_integral<F>(rules: &[Rule], log_f: &F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if rules.is_empty() {
        return log_f(&[]);
    }
    let first = &rules[0];
    let rest = &rules[1..];
    let partials: Vec<Lse> = (0..first.nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Lse::EMPTY;
            let mut p = vec![0.0; rules.len()];
            p[0] = first.nodes[i];
            let mut idx = vec![0usize; rest.len()];
            loop {
                let mut lw = first.log_weights[i];
                for (k, r) in rest.iter().enumerate() {
                    p[k + 1] = r.nodes[idx[k]];
                    lw += r.log_weights[idx[k]];
                }
                acc.push(lw + log_f(&p));
                // odometer
                let mut k = 0;
                while k < rest.len() {
                    idx[k] += 1;
                    if idx[k] < rest[k].nodes.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == rest.len() {
                    break;
                }
            }
            acc
        })
        .collect();
    partials.into_iter().fold(Lse::EMPTY, Lse::merge).value()
}

/// Truncation box: Real axes span `center ± radius`, half-lines `[0, radius]`.
#[derive(Debug, Clone, PartialEq)]
struct Window {
    center: Vec<f64>,
    radius: f64,
    peak: f64,
}

fn axis_range(axis: Axis, center: f64, radius: f64) -> (f64, f64) {
    match axis {
        Axis::Real => (center - radius, center + radius),
        Axis::HalfLine => (0.0, radius),
        Axis::Interval(a, b) => (a, b),
        Axis::Periodic(t) => (0.0, t),
    }
}

/// Peak of the log-integrand on a coarse grid, its location, and the largest
/// value on the faces where an unbounded axis reaches its cut.
fn coarse_scan<F>(axes: &[Axis], log_f: &F, center: &[f64], radius: f64) -> (f64, Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = axes.len();
    let pts = if k <= 2 { 33 } else { 9 };
    let grids: Vec<Vec<f64>> = axes
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let (lo, hi) = axis_range(a, center[i], radius);
            let m = if matches!(a, Axis::Periodic(_)) { pts - 1 } else { pts };
            (0..m).map(|j| lo + (hi - lo) * j as f64 / (pts - 1) as f64).collect()
        })
        .collect();
    let total: usize = grids.iter().map(|g| g.len()).product();
    let mut peak = f64::NEG_INFINITY;
    let mut arg = center.to_vec();
    let mut face = f64::NEG_INFINITY;
    let mut p = vec![0.0; k];
    for flat in 0..total {
        let mut rem = flat;
        let mut on_face = false;
        for (i, g) in grids.iter().enumerate() {
            let j = rem % g.len();
            rem /= g.len();
            p[i] = g[j];
            on_face |= match axes[i] {
                Axis::Real => j == 0 || j == g.len() - 1,
                Axis::HalfLine => j == g.len() - 1,
                _ => false,
            };
        }
        let l = log_f(&p);
        let l = if l.is_nan() { f64::INFINITY } else { l };
        if l > peak {
            peak = l;
            arg = p.clone();
        }
        if on_face {
            face = face.max(l);
        }
    }
    (peak, arg, face)
}

/// Chooses a truncation radius with a drop of at least [`TAIL_GAP`] from the
/// peak to the cut, doubling from `r0` and then halving while the drop holds.
fn window<F>(axes: &[Axis], log_f: &F, r0: f64) -> Result<Window, OracleError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = axes.len();
    let unbounded = axes.iter().any(|a| matches!(a, Axis::Real | Axis::HalfLine));
    let zero = vec![0.0; k];
    if !unbounded {
        let (peak, _, _) = coarse_scan(axes, log_f, &zero, 1.0);
        return Ok(Window {
            center: zero,
            radius: 1.0,
            peak,
        });
    }
    let recenter = |arg: &[f64]| -> Vec<f64> {
        axes.iter()
            .zip(arg)
            .map(|(a, &v)| if matches!(a, Axis::Real) { v } else { 0.0 })
            .collect()
    };
    let mut r = r0;
    let mut center = zero;
    let mut found = false;
    for _ in 0..=12 {
        let (peak, arg, face) = coarse_scan(axes, log_f, &center, r);
        if peak.is_finite() && peak - face >= TAIL_GAP {
            center = recenter(&arg);
            let (_, _, face) = coarse_scan(axes, log_f, &center, r);
            if peak - face >= TAIL_GAP {
                found = true;
                break;
            }
        }
        if peak.is_finite() {
            center = recenter(&arg);
        }
        r *= 2.0;
    }
    if !found {
        return Err(OracleError::NoDecayDirection { radius: r });
    }
    for _ in 0..10 {
        let (peak, arg, _) = coarse_scan(axes, log_f, &center, r);
        let trial = recenter(&arg);
        let (p2, _, face) = coarse_scan(axes, log_f, &trial, 0.5 * r);
        if p2 < peak - 1.0 || p2 - face < TAIL_GAP {
            break;
        }
        center = trial;
        r *= 0.5;
    }
    let (peak, _, _) = coarse_scan(axes, log_f, &center, r);
    Ok(Window { center, radius: r, peak })
}

fn start_radius(x: &DVector<f64>, settings: &QuadSettings) -> f64 {
    settings.radius_factor * (1.0 + 1.0 / x.norm().max(1e-3))
}

/// Tensor Gauss-Legendre integral of `e^{log_f}` over the parameter domain,
/// truncating unbounded axes adaptively and doubling the panel count until
/// the relative change drops below `settings.tol`.
pub fn quadrature<F>(axes: &[Axis], log_f: &F, r0: f64, settings: &QuadSettings) -> Result<Estimate, OracleError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = axes.len();
    if k > MAX_QUAD_DIM {
        return Err(OracleError::TooManyDimensions { dim: k, max: MAX_QUAD_DIM });
    }
    if k == 0 {
        return Ok(Estimate {
            value: log_f(&[]).exp(),
            stderr: 0.0,
            bound: 0.0,
            samples_or_nodes: 1,
            seed: None,
            radius: None,
        });
    }
    let w = window(axes, log_f, r0)?;
    let rules_at = |panels: usize| -> Vec<Rule> {
        axes.iter()
            .enumerate()
            .map(|(i, &a)| {
                let (lo, hi) = axis_range(a, w.center[i], w.radius);
                composite(lo, hi, panels, ORDER)
            })
            .collect()
    };
    let max_panels = ((MAX_TENSOR_NODES as f64).powf(1.0 / k as f64) / ORDER as f64).floor().max(1.0) as usize;
    let mut panels = settings.level.clamp(1, max_panels);
    let mut prev = tensor_log_integral(&rules_at(panels), log_f);
    let mut bound = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        if 2 * panels > max_panels {
            break;
        }
        panels *= 2;
        let next = tensor_log_integral(&rules_at(panels), log_f);
        bound = (next.exp() - prev.exp()).abs();
        let rel = (next - prev).abs();
        prev = next;
        if rel < settings.tol {
            break;
        }
    }
    let value = prev.exp();
    if !value.is_finite() {
        return Err(OracleError::NoDecayDirection { radius: w.radius });
    }
    Ok(Estimate {
        value,
        stderr: 0.0,
        bound,
        samples_or_nodes: (panels * ORDER).pow(k as u32),
        seed: None,
        radius: Some(w.radius),
    })
}

fn laplace_log_integrand<'a>(model: &'a OrbitModel, x: &DVector<f64>) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    let x = x.clone();
    move |p: &[f64]| {
        let d = model.density_unchecked(p);
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        d.ln() - model.hamiltonian(&x, p)
    }
}

/// `Z(x) = ∫ e^{-Ψ(p)(x)} density(p) dp` by quadrature.
pub fn laplace_quadrature(model: &OrbitModel, x: &DVector<f64>, settings: &QuadSettings) -> Result<Estimate, OracleError> {
    let f = laplace_log_integrand(model, x);
    quadrature(&model.axes(), &f, start_radius(x, settings), settings)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceEvidence {
    pub radii: Vec<f64>,
    pub log_integrals: Vec<f64>,
    /// `I(8R)/I(2R)`.
    pub growth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Probe {
    Finite(Estimate),
    Divergent(DivergenceEvidence),
}

impl Probe {
    pub fn is_finite(&self) -> bool {
        matches!(self, Probe::Finite(_))
    }
}

/// Segments of one axis: level 0 is the core, level `j` the shell between
/// radii `2^{j-1}R` and `2^j R`.
fn shells(axis: Axis, r: f64, levels: usize, core_panels: usize, shell_panels: usize, order: usize) -> Vec<(usize, Rule)> {
    match axis {
        Axis::Real => {
            let mut out = vec![(0, composite(-r, r, 2 * core_panels, order))];
            for j in 1..=levels {
                let (a, b) = (r * 2f64.powi(j as i32 - 1), r * 2f64.powi(j as i32));
                out.push((j, composite(-b, -a, shell_panels, order)));
                out.push((j, composite(a, b, shell_panels, order)));
            }
            out
        }
        Axis::HalfLine => {
            let mut out = vec![(0, composite(0.0, r, core_panels, order))];
            for j in 1..=levels {
                let (a, b) = (r * 2f64.powi(j as i32 - 1), r * 2f64.powi(j as i32));
                out.push((j, composite(a, b, shell_panels, order)));
            }
            out
        }
        Axis::Interval(a, b) => vec![(0, composite(a, b, core_panels, order))],
        Axis::Periodic(t) => vec![(0, composite(0.0, t, core_panels, order))],
    }
}

/// Truncated integrals at radii `R, 2R, 4R, 8R` with `R` the start radius;
/// divergent when `I(8R)/I(2R)` exceeds `settings.growth` or any truncated
/// integral is not finite.
pub fn divergence_probe(model: &OrbitModel, x: &DVector<f64>, settings: &QuadSettings) -> Probe {
    let f = laplace_log_integrand(model, x);
    probe(&model.axes(), &f, start_radius(x, settings), settings)
}

/// Shell probe of `∫ e^{log_f}` over the given axes from radius `r`.
pub fn probe<F>(axes: &[Axis], log_f: &F, r: f64, settings: &QuadSettings) -> Probe
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let f = log_f;
    let levels = 3;
    let (core, shell, order) = if axes.len() <= 2 { (5, 4, ORDER) } else { (1, 1, 8) };
    let per_axis: Vec<Vec<(usize, Rule)>> = axes.iter().map(|&a| shells(a, r, levels, core, shell, order)).collect();
    let mut by_level = vec![Lse::EMPTY; levels + 1];
    let counts: Vec<usize> = per_axis.iter().map(|s| s.len()).collect();
    let total: usize = counts.iter().product();
    for flat in 0..total {
        let mut rem = flat;
        let mut level = 0;
        let mut rules = Vec::with_capacity(axes.len());
        for s in &per_axis {
            let (lv, rule) = &s[rem % s.len()];
            rem /= s.len();
            level = level.max(*lv);
            rules.push(rule.clone());
        }
        let l = tensor_log_integral(&rules, &f);
        let mut acc = Lse::EMPTY;
        acc.push(l);
        by_level[level] = by_level[level].merge(acc);
    }
    let mut cumulative = Vec::with_capacity(levels + 1);
    let mut acc = Lse::EMPTY;
    for b in &by_level {
        acc = acc.merge(*b);
        cumulative.push(acc.value());
    }
    let radii: Vec<f64> = (0..=levels).map(|j| r * 2f64.powi(j as i32)).collect();
    let growth = (cumulative[levels] - cumulative[1]).exp();
    let finite = cumulative.iter().all(|v| v.is_finite() && *v < 700.0);
    if !finite || !(growth <= settings.growth) {
        return Probe::Divergent(DivergenceEvidence {
            radii,
            log_integrals: cumulative,
            growth,
        });
    }
    Probe::Finite(Estimate {
        value: cumulative[levels].exp(),
        stderr: 0.0,
        bound: (cumulative[levels].exp() - cumulative[levels - 1].exp()).abs(),
        samples_or_nodes: 0,
        seed: None,
        radius: Some(radii[levels]),
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// Heavy-tailed product proposal: Cauchy on real axes, half-Cauchy on
/// half-lines (location and scale from the truncation window, scale
/// `R/15`), uniform on bounded axes.
#[derive(Debug, Clone)]
struct Proposal {
    axes: Vec<Axis>,
    center: Vec<f64>,
    scale: f64,
    /// Log-integrand peak used as a weight shift.
    shift: f64,
}

impl Proposal {
    fn new<F>(axes: &[Axis], log_f: &F, r0: f64) -> Result<Self, OracleError>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let w = window(axes, log_f, r0)?;
        Ok(Proposal {
            axes: axes.to_vec(),
            center: w.center,
            scale: w.radius / 15.0,
            shift: w.peak,
        })
    }

    /// Draws a point and returns its log density.
    fn draw(&self, rng: &mut ChaCha8Rng, p: &mut [f64]) -> f64 {
        let pi = std::f64::consts::PI;
        let mut lq = 0.0;
        for (i, &a) in self.axes.iter().enumerate() {
            let u: f64 = rng.random_range(0.0..1.0);
            match a {
                Axis::Real => {
                    let z = (pi * (u - 0.5)).tan();
                    p[i] = self.center[i] + self.scale * z;
                    lq += -(pi * self.scale * (1.0 + z * z)).ln();
                }
                Axis::HalfLine => {
                    let z = (0.5 * pi * u).tan();
                    p[i] = self.scale * z;
                    lq += (2.0 / (pi * self.scale * (1.0 + z * z))).ln();
                }
                Axis::Interval(lo, hi) => {
                    p[i] = lo + (hi - lo) * u;
                    lq -= (hi - lo).ln();
                }
                Axis::Periodic(t) => {
                    p[i] = t * u;
                    lq -= t.ln();
                }
            }
        }
        lq
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

#[derive(Debug, Clone)]
struct ChunkSums {
    sum: f64,
    sum_sq: f64,
    top: Vec<f64>,
}

fn keep_top(top: &mut Vec<f64>, w: f64) {
    if top.len() < 10 {
        top.push(w);
        top.sort_by(|a, b| b.total_cmp(a));
    } else if w > top[9] {
        top[9] = w;
        top.sort_by(|a, b| b.total_cmp(a));
    }
}

fn infinite_variance_check(top: &[f64], sum: f64) -> Result<(), OracleError> {
    let share = top.iter().sum::<f64>() / sum;
    if !(share <= 0.5) {
        return Err(OracleError::InfiniteVariance { share });
    }
    Ok(())
}

/// Importance-sampling estimate of `∫ e^{log_f}`.
pub fn monte_carlo<F>(axes: &[Axis], log_f: &F, r0: f64, n: usize, seed: u64) -> Result<Estimate, OracleError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if axes.is_empty() {
        return Ok(Estimate {
            value: log_f(&[]).exp(),
            stderr: 0.0,
            bound: 0.0,
            samples_or_nodes: n,
            seed: Some(seed),
            radius: None,
        });
    }
    let prop = Proposal::new(axes, log_f, r0)?;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<ChunkSums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut p = vec![0.0; axes.len()];
            let mut s = ChunkSums {
                sum: 0.0,
                sum_sq: 0.0,
                top: Vec::new(),
            };
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                let lq = prop.draw(&mut rng, &mut p);
                let w = (log_f(&p) - lq - prop.shift).exp();
                s.sum += w;
                s.sum_sq += w * w;
                keep_top(&mut s.top, w);
            }
            s
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut top = Vec::new();
    for part in parts {
        sum += part.sum;
        sum_sq += part.sum_sq;
        for w in part.top {
            keep_top(&mut top, w);
        }
    }
    infinite_variance_check(&top, sum)?;
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) / (nf - 1.0).max(1.0);
    let scale = prop.shift.exp();
    Ok(Estimate {
        value: mean * scale,
        stderr: var.sqrt() * scale,
        bound: 0.0,
        samples_or_nodes: n,
        seed: Some(seed),
        radius: Some(prop.scale * 15.0),
    })
}

pub fn laplace_mc(model: &OrbitModel, x: &DVector<f64>, n: usize, seed: u64, settings: &QuadSettings) -> Result<Estimate, OracleError> {
    let f = laplace_log_integrand(model, x);
    monte_carlo(&model.axes(), &f, start_radius(x, settings), n, seed)
}

/// Self-normalized Gibbs moments of the momentum image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub mean_stderr: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub cov_stderr: Vec<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
}

impl Moments {
    pub fn mean_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.mean.clone())
    }

    pub fn cov_matrix(&self) -> DMatrix<f64> {
        let d = self.mean.len();
        DMatrix::from_fn(d, d, |i, j| self.cov[i][j])
    }
}

/// Gibbs mean `Q̂` and covariance of `Ψ(p)` under weight `e^{-H_x}`, with
/// delta-method standard errors. Two passes over the same streams.
pub fn moment_mc(model: &OrbitModel, x: &DVector<f64>, n: usize, seed: u64, settings: &QuadSettings) -> Result<Moments, OracleError> {
    let d = model.dim();
    if model.param_dim() == 0 {
        let xi = model.embed_unchecked(&[]);
        return Ok(Moments {
            mean: xi.iter().cloned().collect(),
            mean_stderr: vec![0.0; d],
            cov: vec![vec![0.0; d]; d],
            cov_stderr: vec![vec![0.0; d]; d],
            samples: n,
            seed,
        });
    }
    let f = laplace_log_integrand(model, x);
    let axes = model.axes();
    let prop = Proposal::new(&axes, &f, start_radius(x, settings))?;
    let chunks = n.div_ceil(CHUNK);
    struct Sums {
        sw: f64,
        sw2: f64,
        s1: DVector<f64>,
        s2: DMatrix<f64>,
        s3: DMatrix<f64>,
        s4: DMatrix<f64>,
        top: Vec<f64>,
    }
    let pass = |mean: Option<&DVector<f64>>| -> Vec<Sums> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(seed, c);
                let mut p = vec![0.0; axes.len()];
                let mut s = Sums {
                    sw: 0.0,
                    sw2: 0.0,
                    s1: DVector::zeros(d),
                    s2: DMatrix::zeros(d, d),
                    s3: DMatrix::zeros(d, d),
                    s4: DMatrix::zeros(d, d),
                    top: Vec::new(),
                };
                for _ in 0..CHUNK.min(n - c * CHUNK) {
                    let lq = prop.draw(&mut rng, &mut p);
                    let w = (f(&p) - lq - prop.shift).exp();
                    if w == 0.0 {
                        continue;
                    }
                    let xi = model.embed_unchecked(&p);
                    s.sw += w;
                    s.sw2 += w * w;
                    keep_top(&mut s.top, w);
                    match mean {
                        None => s.s1 += &xi * w,
                        Some(m) => {
                            let dev = &xi - m;
                            let g = &dev * dev.transpose();
                            s.s1 += dev.map(|v| v * v) * (w * w);
                            s.s2 += &g * w;
                            s.s3 += &g * (w * w);
                            s.s4 += g.map(|v| v * v) * (w * w);
                        }
                    }
                }
                s
            })
            .collect()
    };
    let mut sw = 0.0;
    let mut s1 = DVector::zeros(d);
    let mut top = Vec::new();
    for part in pass(None) {
        sw += part.sw;
        s1 += part.s1;
        for w in part.top {
            keep_top(&mut top, w);
        }
    }
    infinite_variance_check(&top, sw)?;
    let mean = s1 / sw;
    let mut dev2 = DVector::zeros(d);
    let mut sw2 = 0.0;
    let mut s2 = DMatrix::zeros(d, d);
    let mut s3 = DMatrix::zeros(d, d);
    let mut s4 = DMatrix::zeros(d, d);
    for part in pass(Some(&mean)) {
        dev2 += part.s1;
        sw2 += part.sw2;
        s2 += part.s2;
        s3 += part.s3;
        s4 += part.s4;
    }
    let cov = s2 / sw;
    // ratio-estimator variance Σ w²(g - ḡ)² / (Σw)²
    let mean_stderr = dev2.map(|v| v.sqrt() / sw);
    let cov_stderr = DMatrix::from_fn(d, d, |i, j| {
        let c = cov[(i, j)];
        (s4[(i, j)] - 2.0 * c * s3[(i, j)] + c * c * sw2).max(0.0).sqrt() / sw
    });
    Ok(Moments {
        mean: mean.iter().cloned().collect(),
        mean_stderr: mean_stderr.iter().cloned().collect(),
        cov: cov.row_iter().map(|r| r.iter().cloned().collect()).collect(),
        cov_stderr: cov_stderr.row_iter().map(|r| r.iter().cloned().collect()).collect(),
        samples: n,
        seed,
    })
}

/// Weighted draws from the Gibbs measure `e^{-H_x}/Z`: orbit points,
/// parameters, and self-normalized weights summing to one.
#[derive(Debug, Clone)]
pub struct GibbsSample {
    pub points: Vec<DVector<f64>>,
    pub params: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl GibbsSample {
    /// Effective sample size `1 / Σ w²`.
    pub fn effective_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Systematic resampling to `m` equally weighted orbit points, driven
    /// by one uniform from `rng`.
    pub fn resample(&self, m: usize, rng: &mut impl Rng) -> Vec<DVector<f64>> {
        let u0: f64 = rng.random_range(0.0..1.0);
        let mut out = Vec::with_capacity(m);
        let mut cum = 0.0;
        let mut i = 0;
        for k in 0..m {
            let u = (u0 + k as f64) / m as f64;
            while i + 1 < self.weights.len() && cum + self.weights[i] < u {
                cum += self.weights[i];
                i += 1;
            }
            out.push(self.points[i].clone());
        }
        out
    }
}

pub fn gibbs_sample(model: &OrbitModel, x: &DVector<f64>, n: usize, seed: u64, settings: &QuadSettings) -> Result<GibbsSample, OracleError> {
    if model.param_dim() == 0 {
        return Ok(GibbsSample {
            points: vec![model.embed_unchecked(&[])],
            params: vec![Vec::new()],
            weights: vec![1.0],
        });
    }
    let f = laplace_log_integrand(model, x);
    let axes = model.axes();
    let prop = Proposal::new(&axes, &f, start_radius(x, settings))?;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<(Vec<f64>, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut p = vec![0.0; axes.len()];
            (0..CHUNK.min(n - c * CHUNK))
                .map(|_| {
                    let lq = prop.draw(&mut rng, &mut p);
                    (p.clone(), (f(&p) - lq - prop.shift).exp())
                })
                .collect()
        })
        .collect();
    let all: Vec<(Vec<f64>, f64)> = parts.into_iter().flatten().collect();
    let total: f64 = all.iter().map(|a| a.1).sum();
    let mut top = Vec::new();
    for a in &all {
        keep_top(&mut top, a.1);
    }
    infinite_variance_check(&top, total)?;
    Ok(GibbsSample {
        points: all.iter().map(|(p, _)| model.embed_unchecked(p)).collect(),
        weights: all.iter().map(|(_, w)| w / total).collect(),
        params: all.into_iter().map(|(p, _)| p).collect(),
    })
}
