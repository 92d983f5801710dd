use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value as Json};

use orbit_thermo::algebra::{
    build_abelian, build_heis, build_hsp, build_mot2, build_osc, build_sl2, build_so12, build_sp, build_su2,
};
use orbit_thermo::cones::{c_max, c_min};
use orbit_thermo::oracle::{divergence_probe, laplace_mc, moment_mc, Probe, QuadSettings};
use orbit_thermo::orbits::OrbitModel;
use orbit_thermo::pipeline::{self, GridPoint, SystemReport, SCHEMA};
use orbit_thermo::roots::RootDatum;
use orbit_thermo::thermo::{ClosedForm, DhMode, DhPartition, GaussianForm, ThermoReport};
use orbit_thermo::{LieAlgebra, Tolerances, DEFAULT_SEED};

const VERIFY_CSV: &str = "x0..x{d-1}, closed_form, quadrature, quadrature_rel_error, monte_carlo, mc_stderr, mc_z, pass";
const PARTITION_CSV: &str = "x0..x{d-1}, Z, logZ, Q0..Q{d-1}, entropy, fisher_ev0..fisher_ev{d-1} (ascending)";
const SCAN_CSV: &str = "x0..x{d-1}, predicted_inside, via, probe_finite, probe_value, closed_form, mismatch";

#[derive(Parser, Debug)]
#[command(name = "orbit-thermo", version, about = "Gibbs ensembles on coadjoint orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunConfig,
}

/// Settings shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// RNG seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// Gauss-Legendre panels per axis (20 nodes each).
    #[arg(long, global = true, default_value_t = 10)]
    quad_level: usize,
    /// Truncation radius factor.
    #[arg(long, global = true, default_value_t = 30.0)]
    radius_factor: f64,
    /// Relative tolerance for closed form against quadrature.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// JSON file whose fields must match the output (numbers to 1e-6 relative).
    #[arg(long, global = true)]
    expect: Option<PathBuf>,
}

impl RunConfig {
    fn quad(&self) -> QuadSettings {
        QuadSettings {
            level: self.quad_level,
            radius_factor: self.radius_factor,
            ..QuadSettings::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dh,
    Catalog,
    Gaussian,
    Quad,
    Mc,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate an algebra and print roots, Weyl group, systems and cones.
    ///
    /// ALGEBRA is a JSON file or `catalog:NAME` with NAME one of sl2, su2,
    /// so12, osc, mot2, heis:n, abelian:k, sp:n, hsp:n.
    Check { algebra: String },
    /// Decide whether the orbit of a functional carries a Gibbs ensemble.
    Classify {
        algebra: String,
        /// Comma-separated coefficients of the functional in the dual basis.
        #[arg(long, allow_hyphen_values = true)]
        functional: String,
    },
    /// Partition function, heat, entropy and Fisher metric at a temperature.
    #[command(after_help = format!("CSV columns: {PARTITION_CSV}"))]
    Partition {
        /// sl2-nilpotent | sl2-hyperboloid:m | su2:rho | osc:lc,lz | hsp:n,lc | point:l1,.. | product:A+B
        #[arg(long)]
        family: String,
        /// Temperature coefficients in the algebra basis.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Rows `a,b;c,d` or a CSV file, instead of --at.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Catalog)]
        method: MethodArg,
    },
    /// Closed form against quadrature and Monte Carlo on a grid.
    #[command(after_help = format!("CSV columns: {VERIFY_CSV}\nExit code 2 when any row fails."))]
    Verify {
        #[arg(long)]
        family: String,
        /// Rows `a,b;c,d` or a CSV file; defaults to a family grid.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Predicted domain against the divergence probe on a grid.
    #[command(after_help = format!("CSV columns: {SCAN_CSV}\nExit code 2 on any mismatch."))]
    Scan {
        #[arg(long)]
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Image of the heat map: hull containment, injectivity and center invariance.
    Legendre {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 10)]
        nx: usize,
        #[arg(long, default_value_t = 200)]
        norbit: usize,
    },
    /// Write a catalog algebra as JSON.
    Export { algebra: String },
}

/// Result of a command: the document to print and whether it counts as a
/// failed verification.
struct Outcome {
    json: Json,
    csv: Option<Vec<Vec<String>>>,
    failed: bool,
}

fn load_algebra(source: &str) -> Result<LieAlgebra> {
    let Some(name) = source.strip_prefix("catalog:") else {
        return LieAlgebra::load(source).map_err(|e| anyhow!("{source}: {e}"));
    };
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a.parse::<usize>().with_context(|| format!("bad size in '{name}'"))?)),
        None => (name, None),
    };
    let n = arg.unwrap_or(1);
    Ok(match head {
        "sl2" => build_sl2(),
        "su2" => build_su2(),
        "so12" => build_so12(),
        "osc" => build_osc(),
        "mot2" => build_mot2(),
        "heis" => build_heis(n),
        "abelian" => build_abelian(n),
        "sp" => build_sp(n),
        "hsp" => build_hsp(n),
        _ => bail!("unknown catalog algebra '{head}'"),
    })
}

fn parse_vector(text: &str) -> Result<DVector<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number '{s}'")))
        .collect::<Result<_>>()?;
    Ok(DVector::from_vec(v))
}

fn parse_grid(source: &str) -> Result<Vec<DVector<f64>>> {
    if Path::new(source).is_file() {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(source)?;
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let parsed: Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() => rows.push(DVector::from_vec(v)),
                // header or blank line
                _ if rows.is_empty() => continue,
                _ => bail!("{source}: bad row {:?}", rec.iter().collect::<Vec<_>>()),
            }
        }
        return Ok(rows);
    }
    source.split(';').filter(|s| !s.trim().is_empty()).map(parse_vector).collect()
}

fn check_dim(model: &OrbitModel, xs: &[DVector<f64>]) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| x.len() != model.dim()) {
        bail!("point has {} coordinates, family '{}' lives in dimension {}", x.len(), model.family(), model.dim());
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("reports serialize")
}

fn cmd_check(source: &str) -> Result<Outcome> {
    let g = load_algebra(source)?;
    let (residual, _) = g.jacobi_residual();
    let center = g.center(&Tolerances::DEFAULT);
    let mut doc = json!({
        "schema": SCHEMA,
        "algebra": g.name(),
        "dim": g.dim(),
        "basis": g.basis_names(),
        "jacobi_residual": residual,
        "center_dim": center.ncols(),
        "has_cartan": g.meta().is_some_and(|m| !m.cartan.is_empty()),
    });
    if let Ok(datum) = RootDatum::from_meta(&g) {
        let weyl = datum.weyl_group()?;
        let systems = datum.positive_systems()?;
        let systems: Vec<Json> = systems
            .iter()
            .map(|s| {
                let cmin = c_min(&datum, s);
                let cmax = c_max(&datum, s);
                let contained = cmax.contains_cone(&cmin).unwrap_or(false);
                json!({
                    "system": to_json(&SystemReport::from(s)),
                    "cmin": to_json(&cmin.report(contained)),
                    "cmax": to_json(&cmax.report(true)),
                })
            })
            .collect();
        doc["roots"] = to_json(&datum.report());
        doc["weyl_order"] = json!(weyl.order());
        doc["positive_systems"] = Json::Array(systems);
    }
    Ok(Outcome {
        json: doc,
        csv: None,
        failed: false,
    })
}

fn cmd_classify(source: &str, functional: &str, run: &RunConfig) -> Result<Outcome> {
    let g = load_algebra(source)?;
    let lambda = parse_vector(functional)?;
    let c = pipeline::classify(&g, &lambda, run.seed)?;
    Ok(Outcome {
        json: to_json(&c.report),
        csv: None,
        failed: false,
    })
}

fn oracle_row(model: &OrbitModel, x: &DVector<f64>, method: MethodArg, run: &RunConfig) -> Result<Json> {
    let settings = run.quad();
    let probe = divergence_probe(model, x, &settings);
    let mut row = json!({ "x": x.as_slice(), "method": "Oracle", "settings": to_json(&settings) });
    match (&probe, method) {
        (Probe::Divergent(ev), _) => {
            row["divergent"] = json!(true);
            row["Z"] = Json::Null;
            row["evidence"] = to_json(ev);
        }
        (Probe::Finite(_), MethodArg::Quad) => {
            let e = orbit_thermo::oracle::laplace_quadrature(model, x, &settings)?;
            row["divergent"] = json!(false);
            row["Z"] = json!(e.value);
            row["estimate"] = to_json(&e);
        }
        (Probe::Finite(_), _) => {
            let e = laplace_mc(model, x, run.samples, run.seed, &settings)?;
            let m = moment_mc(model, x, run.samples, run.seed, &settings)?;
            row["divergent"] = json!(false);
            row["Z"] = json!(e.value);
            row["estimate"] = to_json(&e);
            row["Q"] = json!(m.mean);
            row["Q_stderr"] = json!(m.mean_stderr);
        }
    }
    Ok(row)
}

fn cmd_partition(family: &str, at: Option<&str>, grid: Option<&str>, method: MethodArg, run: &RunConfig) -> Result<Outcome> {
    let model: OrbitModel = family.parse()?;
    let xs = match (at, grid) {
        (Some(a), None) => vec![parse_vector(a)?],
        (None, Some(g)) => parse_grid(g)?,
        _ => bail!("give exactly one of --at and --grid"),
    };
    check_dim(&model, &xs)?;
    let mut partial_roots = None;
    let (rows, csv): (Vec<Json>, Option<Vec<Vec<String>>>) = match method {
        MethodArg::Quad | MethodArg::Mc => {
            let rows = xs.iter().map(|x| oracle_row(&model, x, method, run)).collect::<Result<_>>()?;
            (rows, None)
        }
        _ => {
            let reports: Vec<ThermoReport> = match method {
                MethodArg::Dh => {
                    let dh = DhPartition::for_model(&model, DhMode::Full)?;
                    partial_roots = Some(dh.partial_roots());
                    let amb = dh.ambient();
                    xs.iter().map(|x| ThermoReport::compute(&amb, x)).collect()
                }
                MethodArg::Gaussian => {
                    let f = GaussianForm(model.clone());
                    xs.iter().map(|x| ThermoReport::compute(&f, x)).collect()
                }
                _ => {
                    let f = ClosedForm::new(model.clone());
                    xs.iter().map(|x| ThermoReport::compute(&f, x)).collect()
                }
            };
            let mut table = vec![ThermoReport::csv_header(model.dim())];
            table.extend(reports.iter().map(ThermoReport::csv_record));
            (reports.iter().map(to_json).collect(), Some(table))
        }
    };
    Ok(Outcome {
        json: {
            let mut doc = json!({ "schema": SCHEMA, "family": model.family().to_string(), "rows": rows });
            // multiplicities with 0 < m < dim rest on the rank formula alone
            if let Some(p) = partial_roots {
                doc["partial_roots"] = json!(p);
            }
            doc
        },
        csv,
        failed: false,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.12e}")).unwrap_or_default()
}

fn cmd_verify(family: &str, grid: Option<&str>, run: &RunConfig) -> Result<Outcome> {
    if run.samples < 10_000 {
        bail!("verify needs --samples >= 10000, got {}", run.samples);
    }
    let model: OrbitModel = family.parse()?;
    let xs = match grid {
        Some(g) => parse_grid(g)?,
        None => pipeline::default_grid(&model),
    };
    check_dim(&model, &xs)?;
    let rows = pipeline::verify_grid(&model, &xs, run.tol, run.samples, run.seed, &run.quad());
    let failed = rows.iter().any(|r| !r.pass);
    let mut table = vec![{
        let mut h: Vec<String> = (0..model.dim()).map(|i| format!("x{i}")).collect();
        h.extend(
            ["closed_form", "quadrature", "quadrature_rel_error", "monte_carlo", "mc_stderr", "mc_z", "pass"]
                .map(String::from),
        );
        h
    }];
    for r in &rows {
        let mut rec: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
        rec.extend([
            opt(r.closed_form),
            opt(r.quadrature),
            opt(r.quadrature_rel_error),
            opt(r.monte_carlo),
            opt(r.mc_stderr),
            opt(r.mc_z),
            r.pass.to_string(),
        ]);
        table.push(rec);
    }
    Ok(Outcome {
        json: json!({
            "schema": SCHEMA,
            "family": model.family().to_string(),
            "tol": run.tol,
            "samples": run.samples,
            "seed": run.seed,
            "settings": to_json(&run.quad()),
            "rows": to_json(&rows),
            "all_pass": !failed,
        }),
        csv: Some(table),
        failed,
    })
}

fn cmd_scan(family: &str, grid: &str, run: &RunConfig) -> Result<Outcome> {
    let model: OrbitModel = family.parse()?;
    let xs = parse_grid(grid)?;
    check_dim(&model, &xs)?;
    let pts: Vec<GridPoint> = xs.into_iter().map(GridPoint::raw).collect();
    let scan = pipeline::domain_scan(&model, &pts, &run.quad())?;
    let mut table = vec![{
        let mut h: Vec<String> = (0..model.dim()).map(|i| format!("x{i}")).collect();
        h.extend(["predicted_inside", "via", "probe_finite", "probe_value", "closed_form", "mismatch"].map(String::from));
        h
    }];
    for r in &scan.rows {
        let mut rec: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
        rec.extend([
            r.predicted_inside.to_string(),
            format!("{:?}", r.via),
            r.probe_finite.to_string(),
            opt(r.probe_value),
            opt(r.closed_form),
            r.mismatch.to_string(),
        ]);
        table.push(rec);
    }
    Ok(Outcome {
        failed: scan.mismatches > 0,
        json: to_json(&scan),
        csv: Some(table),
    })
}

fn cmd_legendre(family: &str, nx: usize, norbit: usize, run: &RunConfig) -> Result<Outcome> {
    let model: OrbitModel = family.parse()?;
    let r = pipeline::legendre_check(&model, nx, norbit, run.seed, &run.quad())?;
    Ok(Outcome {
        failed: !r.passed,
        json: to_json(&r),
        csv: None,
    })
}

/// `expected` matches when every field it names matches in `actual`.
fn matches_expected(expected: &Json, actual: &Json) -> bool {
    match (expected, actual) {
        (Json::Object(e), Json::Object(a)) => e.iter().all(|(k, v)| a.get(k).is_some_and(|av| matches_expected(v, av))),
        (Json::Array(e), Json::Array(a)) => e.len() == a.len() && e.iter().zip(a).all(|(x, y)| matches_expected(x, y)),
        (Json::Number(e), Json::Number(a)) => {
            let (e, a) = (e.as_f64().unwrap_or(f64::NAN), a.as_f64().unwrap_or(f64::NAN));
            (e - a).abs() <= 1e-6 * e.abs().max(a.abs()).max(1e-300) || e == a
        }
        _ => expected == actual,
    }
}

/// Writes a document to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let run = &cli.run;
    let outcome = match &cli.command {
        Command::Check { algebra } => cmd_check(algebra)?,
        Command::Classify { algebra, functional } => cmd_classify(algebra, functional, run)?,
        Command::Partition { family, at, grid, method } => cmd_partition(family, at.as_deref(), grid.as_deref(), *method, run)?,
        Command::Verify { family, grid } => cmd_verify(family, grid.as_deref(), run)?,
        Command::Scan { family, grid } => cmd_scan(family, grid, run)?,
        Command::Legendre { family, nx, norbit } => cmd_legendre(family, *nx, *norbit, run)?,
        Command::Export { algebra } => {
            emit(&load_algebra(algebra)?.to_json())?;
            return Ok(true);
        }
    };
    match (run.output, &outcome.csv) {
        (Output::Csv, Some(table)) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for rec in table {
                w.write_record(rec)?;
            }
            emit(String::from_utf8(w.into_inner()?)?.trim_end())?;
        }
        (Output::Csv, None) => bail!("this command has no CSV form"),
        (Output::Json, _) => emit(&serde_json::to_string_pretty(&outcome.json)?)?,
    }
    let mut ok = !outcome.failed;
    if let Some(path) = &run.expect {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        let expected: Json = serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
        if !matches_expected(&expected, &outcome.json) {
            eprintln!("output does not match {}", path.display());
            ok = false;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("ORBIT_THERMO_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
