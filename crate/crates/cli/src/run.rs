use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use elastica_core::hecurve::{CurveError, CurveSpec, FiniteGapForm, HECurve, PeriodData, SigmaFunction};
use elastica_core::hillspec::{band_edges, discriminant_scan, finite_gap_potential, EdgeKind, PeriodicPotential};
use elastica_core::jetalg::kdv_rhs;
use elastica_core::loopflow::{classical_elastica, evolve_mkdv, random_closed_loop, Elastica, FlowParams, LoopState, Scheme};
use elastica_core::psido::frac_power;
use elastica_core::{JetPolyQ, Rational};

use crate::config::*;
use crate::error::{compute, CliError};
use crate::output::Sink;

/// Default real genus-one curve behind `builtin:lame`.
pub const LAME_BRANCH_POINTS: [f64; 3] = [-1.0, 0.4, 1.5];

/// Outcome of a subcommand: a JSON summary for the manifest, and whether
/// every check it ran passed (only `verify` can report `false`).
pub struct Report {
    pub results: Value,
    pub success: bool,
}

impl Report {
    fn ok(results: Value) -> Self {
        Self { results, success: true }
    }
}

pub fn execute(config: &RunConfig, sink: &mut Sink) -> Result<Report, CliError> {
    config.validate()?;
    match config {
        RunConfig::Hierarchy(c) => hierarchy(c, sink),
        RunConfig::Psdo(c) => psdo(c, sink),
        RunConfig::Flow(c) => flow(c, sink),
        RunConfig::Curve(c) => curve(c, sink),
        RunConfig::Spectrum(c) => spectrum(c, sink),
        RunConfig::Verify(c) => crate::verify::verify(c, sink),
    }
}

#[derive(Serialize)]
struct TermRow {
    n: usize,
    coefficient: String,
    monomial: String,
}

fn hierarchy(c: &HierarchyConfig, sink: &mut Sink) -> Result<Report, CliError> {
    let mut rows = Vec::new();
    let mut flows = serde_json::Map::new();
    for n in c.from..=c.n {
        let x: JetPolyQ = kdv_rhs::<Rational>(n);
        println!("n = {n}: u_t = {x}");
        flows.insert(n.to_string(), Value::String(x.to_string()));
        for (m, coeff) in x.terms() {
            rows.push(TermRow { n, coefficient: coeff.to_string(), monomial: m.to_string() });
        }
    }
    sink.table("hierarchy", &rows)?;
    Ok(Report::ok(json!({ "flows": flows })))
}

#[derive(Serialize)]
struct OperatorRow {
    degree: i32,
    coefficient: String,
}

fn psdo(c: &PsdoConfig, sink: &mut Sink) -> Result<Report, CliError> {
    let u = JetPolyQ::u(0);
    let op = frac_power(&u, c.power, c.depth).map_err(compute)?;
    let mut rows = Vec::new();
    println!("L^({}/2), exact down to ∂^-{}:", c.power, c.depth);
    for (k, coeff) in op.terms().rev() {
        println!("  ∂^{k}: {coeff}");
        rows.push(OperatorRow { degree: k, coefficient: coeff.to_string() });
    }
    let residue = op.residue().map_err(compute)?;
    println!("residue: {residue}");
    sink.table("operator", &rows)?;
    Ok(Report::ok(json!({ "residue": residue.to_string(), "terms": rows.len() })))
}

#[derive(Serialize)]
struct FrameRow {
    frame: usize,
    time: f64,
    j: usize,
    x: f64,
    y: f64,
    curvature: f64,
}

fn initial_loop(c: &FlowConfig) -> Result<LoopState<f64>, CliError> {
    match c.loop_kind {
        LoopKind::Circle => LoopState::circle(c.n, 1.0),
        LoopKind::Random => random_closed_loop(c.n, c.modes, c.amplitude, c.seed),
        LoopKind::FigureEight => classical_elastica(Elastica::FigureEight, c.n),
    }
    .map_err(compute)
}

fn flow(c: &FlowConfig, sink: &mut Sink) -> Result<Report, CliError> {
    let start = initial_loop(c)?;
    let mut params = FlowParams::new(c.dt, c.steps);
    params.scheme = match c.scheme {
        SchemeArg::Rk4 => Scheme::Rk4Spectral,
        SchemeArg::IntegratingFactor => Scheme::IntegratingFactor,
        SchemeArg::Etdrk4 => Scheme::Etdrk4,
    };
    params.save_every = c.save_every;
    let traj = evolve_mkdv(&start, params).map_err(compute)?;
    sink.table("diagnostics", &traj.diagnostics)?;
    if c.frames {
        let mut rows = Vec::new();
        for (f, (state, d)) in traj.frames.iter().zip(&traj.diagnostics).enumerate() {
            let k = state.curvature();
            for (j, (z, kj)) in state.gamma().iter().zip(&k).enumerate() {
                rows.push(FrameRow { frame: f, time: d.time, j, x: z.re, y: z.im, curvature: *kj });
            }
        }
        sink.table("frames", &rows)?;
    }
    let first = traj.diagnostics.first().expect("initial frame");
    let last = traj.diagnostics.last().expect("final frame");
    println!(
        "energy {:.15} → {:.15}, max drift {:.3e}, max closure defect {:.3e}, length {}",
        first.energy,
        last.energy,
        traj.max_energy_drift(),
        traj.max_closure_defect(),
        last.length
    );
    Ok(Report::ok(json!({
        "energy": first.energy,
        "final_energy": last.energy,
        "max_energy_drift": traj.max_energy_drift(),
        "max_closure_defect": traj.max_closure_defect(),
        "length": last.length,
        "winding": last.winding,
        "steps": c.steps,
    })))
}

pub fn load_curve(path: &Path) -> Result<HECurve, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let spec: CurveSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid curve file {}: {e}", path.display())))?;
    HECurve::from_spec(&spec).map_err(|e| match e {
        CurveError::InvalidInput(m) => CliError::Config(m),
        other => compute(other),
    })
}

#[derive(Serialize)]
struct ValueRow {
    point: usize,
    quantity: String,
    i: usize,
    j: usize,
    re: f64,
    im: f64,
}

fn curve(c: &CurveConfig, sink: &mut Sink) -> Result<Report, CliError> {
    let curve = match &c.curve {
        Some(p) => load_curve(p)?,
        None => HECurve::from_real(&c.branch_points).map_err(|e| CliError::Config(e.to_string()))?,
    };
    let g = curve.genus();
    let mut points: Vec<Vec<C64>> = Vec::new();
    for p in &c.points {
        if p.len() != 2 * g {
            return Err(CliError::Config(format!("point {p:?} needs {} numbers for genus {g}", 2 * g)));
        }
        points.push(p.chunks(2).map(|w| C64::new(w[0], w[1])).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    for _ in 0..c.random_points {
        points.push((0..g).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect());
    }
    let periods = PeriodData::compute(&curve).map_err(compute)?;
    sink.document("periods.json", &(periods.to_json() + "\n"))?;
    let sigma = SigmaFunction::from_periods(&curve, periods.clone()).map_err(compute)?;
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for (k, t) in points.iter().enumerate() {
        let s = sigma.sigma(t).map_err(compute)?;
        rows.push(ValueRow { point: k, quantity: "sigma".into(), i: 0, j: 0, re: s.re, im: s.im });
        match sigma.wp_tensor(t) {
            Ok(p) => {
                for i in 1..=g {
                    for j in i..=g {
                        let w = p.wp(i, j);
                        rows.push(ValueRow { point: k, quantity: "wp".into(), i, j, re: w.re, im: w.im });
                    }
                }
            }
            Err(CurveError::NearDivisor { .. }) => skipped += 1,
            Err(e) => return Err(compute(e)),
        }
    }
    sink.table("values", &rows)?;
    println!(
        "genus {g}; Legendre defect {:.2e}; min eigenvalue of Im T {:.4}; {} points ({skipped} on the theta divisor)",
        periods.legendre_defect(),
        periods.im_t_min_eigenvalue(),
        points.len()
    );
    Ok(Report::ok(json!({
        "genus": g,
        "lambda": curve.lambda().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "legendre_defect": periods.legendre_defect(),
        "im_t_min_eigenvalue": periods.im_t_min_eigenvalue(),
        "points": points.len(),
        "near_divisor": skipped,
    })))
}

fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| CliError::Config(format!("bad sample {s:?}: {e}"))))
        .collect()
}

pub fn genus_one_potential(curve: &HECurve, samples: usize) -> Result<PeriodicPotential<f64>, CliError> {
    let sigma = SigmaFunction::new(curve).map_err(compute)?;
    finite_gap_potential(&sigma, FiniteGapForm::NegativeShift, samples).map_err(compute)
}

#[derive(Serialize)]
struct ScanRow {
    xbar: f64,
    discriminant: f64,
    stable: bool,
}

#[derive(Serialize)]
struct EdgeRow {
    xbar: f64,
    level: i8,
    kind: EdgeKind,
    slope: f64,
}

fn spectrum(c: &SpectrumConfig, sink: &mut Sink) -> Result<Report, CliError> {
    let source = c.validate()?;
    let u = match source {
        PotentialSource::Zero => PeriodicPotential::zero(c.period),
        PotentialSource::File(p) => {
            PeriodicPotential::from_samples(read_samples(&p)?, c.period).map_err(|e| CliError::Config(e.to_string()))?
        }
        PotentialSource::Lame => genus_one_potential(&HECurve::from_real(&LAME_BRANCH_POINTS).map_err(compute)?, c.samples)?,
        PotentialSource::FromCurve(p) => genus_one_potential(&load_curve(&p)?, c.samples)?,
    };
    let grid: Vec<f64> = (0..c.points).map(|j| c.from + (c.to - c.from) * j as f64 / (c.points - 1) as f64).collect();
    let scan = discriminant_scan(&u, &grid).map_err(compute)?;
    let rows: Vec<ScanRow> =
        scan.points.iter().map(|p| ScanRow { xbar: p.xbar, discriminant: p.discriminant, stable: p.stable }).collect();
    sink.table("scan", &rows)?;
    let mut results = json!({
        "period": u.period(),
        "stable_intervals": scan.stable_intervals(),
        "max_det_defect": scan.max_det_defect(),
        "classification_mismatches": scan.classification_mismatches(),
    });
    println!(
        "period {:.12}; {} stable intervals on the grid; max |det M − 1| {:.2e}",
        u.period(),
        scan.stable_intervals().len(),
        scan.max_det_defect()
    );
    if c.edges {
        let edges = band_edges(&u, (c.from, c.to), c.max_edges).map_err(compute)?;
        let rows: Vec<EdgeRow> =
            edges.iter().map(|e| EdgeRow { xbar: e.xbar, level: e.level, kind: e.kind, slope: e.slope }).collect();
        sink.table("edges", &rows)?;
        let simple: Vec<f64> = edges.iter().filter(|e| e.kind == EdgeKind::Simple).map(|e| e.xbar).collect();
        for e in &edges {
            println!("  edge {:>16.10}  Δ = {:+}  {:?}", e.xbar, 2 * e.level, e.kind);
        }
        results["simple_edges"] = json!(simple);
        results["double_edges"] = json!(edges.len() - simple.len());
    }
    Ok(Report::ok(results))
}
