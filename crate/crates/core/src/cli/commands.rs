use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::output::{json, num, Csv, Svg};
use super::study::{Sample, Study, StudyConfig};
use super::verify::{self, property, Measured, VerifyReport};
use crate::alpha_rho::beta::rationals_in;
use crate::alpha_rho::{beta_oracle, detect_plateaus, inverse_rho, sample_alpha_curve, PlateauReport};
use crate::circle::wrap;
use crate::error::{Error, Result};
use crate::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use crate::orbits::{backward_orbit, calibration_residual, mather_set, twisted_vertical_minimizers};
use crate::twist::catalog::CATALOG_NAMES;
use crate::twist::{load, load_unchecked, MapCatalogEntry, MapParams};

/// What a command produced: text for standard output, files to write and
/// whether every convergence or property flag came out clean.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub clean: bool,
}

impl Outcome {
    fn new(stdout: String, clean: bool) -> Self {
        Self {
            stdout,
            clean,
            ..Self::default()
        }
    }
}

fn entry(cfg: &RunConfig) -> Result<MapCatalogEntry> {
    load(&cfg.map, &cfg.params)
}

fn discretization(cfg: &RunConfig, e: &MapCatalogEntry) -> Result<Discretization> {
    Ok(Discretization::new(e.map.generating_arc(), CircleGrid::new(cfg.grid)?))
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol,
        ..SolveOptions::default()
    }
}

#[derive(Serialize)]
struct CatalogItem {
    name: String,
    analytic_truth: bool,
    passed: bool,
    report: crate::twist::GeneratingReport,
}

pub fn catalog(_cfg: &RunConfig) -> Result<Outcome> {
    let items = CATALOG_NAMES
        .iter()
        .map(|name| {
            let e = load_unchecked(name, &MapParams::new())?;
            Ok(CatalogItem {
                name: e.name.clone(),
                analytic_truth: e.analytic_truth.is_some(),
                passed: e.report.passed(),
                report: e.report.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::new(json(&items), true))
}

#[derive(Serialize)]
struct SolveJson<'a> {
    c: f64,
    alpha: f64,
    residual: f64,
    converged: bool,
    iterations: usize,
    grid: usize,
    semiconcavity: f64,
    u: &'a [f64],
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let e = entry(cfg)?;
    let disc = discretization(cfg, &e)?;
    let sol = disc.solve(cfg.c, &solve_options(cfg))?;
    let mut out = Outcome::new(
        json(&SolveJson {
            c: sol.c,
            alpha: sol.alpha,
            residual: sol.residual,
            converged: sol.converged,
            iterations: sol.iterations,
            grid: sol.n(),
            semiconcavity: sol.semiconcavity_k,
            u: &sol.u,
        }),
        sol.converged,
    );
    if cfg.csv {
        let mut u = Csv::new(&["theta", "u"]);
        let mut p = Csv::new(&["theta", "p"]);
        let pg = Sample::new(sol.clone()).pg;
        for (i, &v) in sol.u.iter().enumerate() {
            u.nums(&[sol.grid.node(i), v]);
        }
        for &(x, y) in &pg.polyline {
            p.nums(&[x, y]);
        }
        out.files.push((cfg.out.join("u.csv"), u.into_string()));
        out.files.push((cfg.out.join("pseudograph.csv"), p.into_string()));
    }
    Ok(out)
}

pub fn alpha(cfg: &RunConfig) -> Result<Outcome> {
    let e = entry(cfg)?;
    let disc = discretization(cfg, &e)?;
    let steps = cfg.steps_or(81);
    let opts = SolveOptions {
        refine: false,
        ..solve_options(cfg)
    };
    let curve = sample_alpha_curve(&disc, cfg.range, steps, &opts)?;
    let flat_tol = 1e-4;
    let plateaus = detect_plateaus(&curve, cfg.qmax, flat_tol);
    let mut header = vec!["c", "alpha", "rho", "plateau"];
    if cfg.per_time.is_some() {
        header.push("rho_per_time");
    }
    let mut csv = Csv::new(&header);
    for i in 0..curve.len() {
        let c = curve.c_samples[i];
        let on = plateaus.iter().find(|p| p.contains(c));
        let rho = on.map_or(curve.rho_values[i], |p| p.rotation());
        let mut row = vec![num(c), num(curve.alpha_values[i]), num(rho), (on.is_some() as u8).to_string()];
        if let Some(t0) = cfg.per_time {
            row.push(num(rho / t0));
        }
        csv.row(&row);
    }
    let mut out = Outcome::new(csv.into_string(), curve.all_converged());
    out.files.push((cfg.out.join("plateaus.json"), json(&plateaus)));
    Ok(out)
}

pub fn beta(cfg: &RunConfig) -> Result<Outcome> {
    let e = entry(cfg)?;
    let mut csv = Csv::new(&["p", "q", "rho", "beta", "minimizers", "mather_points"]);
    let (lo, hi) = if cfg.range == RunConfig::default().range {
        (0.0, 1.0)
    } else {
        cfg.range
    };
    for (p, q) in rationals_in(lo, hi, cfg.qmax) {
        let b = beta_oracle(e.generating(), p, q, 8, cfg.seed)?;
        let pts: Vec<String> = b.mather_points().iter().map(|&x| num(x)).collect();
        csv.row(&[
            p.to_string(),
            q.to_string(),
            num(p as f64 / q as f64),
            num(b.value),
            b.minimizers.len().to_string(),
            pts.join(" "),
        ]);
    }
    Ok(Outcome::new(csv.into_string(), true))
}

/// Sweep, detect and refine plateaus over the configured range.
fn study(cfg: &RunConfig, e: MapCatalogEntry, steps: usize) -> Result<Study> {
    Study::new(
        e,
        &StudyConfig {
            grid: cfg.grid,
            range: cfg.range,
            steps,
            q_max: cfg.qmax,
            seed: cfg.seed,
            ..StudyConfig::default()
        },
    )
}

pub fn foliation(cfg: &RunConfig) -> Result<Outcome> {
    let e = entry(cfg)?;
    let steps = cfg.steps_or(41);
    let st = study(cfg, e, steps.max(81))?;
    let cs: Vec<f64> = (0..steps)
        .map(|i| cfg.range.0 + (cfg.range.1 - cfg.range.0) * i as f64 / (steps - 1).max(1) as f64)
        .collect();
    let mut samples = st.samples(&cs)?;
    let ends: Vec<(Sample, &str)> = st
        .plateaus
        .iter()
        .filter(|p| p.u_a.is_some())
        .flat_map(|p| {
            [
                (Sample::new(p.u_a.clone().expect("refined")), "#d62728"),
                (Sample::new(p.u_b.clone().expect("refined")), "#1f77b4"),
            ]
        })
        .collect();
    let clean = samples.iter().all(|s| s.sol.converged) && ends.iter().all(|(s, _)| s.sol.converged);
    let mut csv = Csv::new(&["c", "s", "theta", "p"]);
    let mut write = |s: &Sample| {
        let mut arc = 0.0;
        for (j, &(x, p)) in s.pg.polyline.iter().enumerate() {
            if j > 0 {
                let (x0, p0) = s.pg.polyline[j - 1];
                arc += (x - x0).hypot(p - p0);
            }
            csv.nums(&[s.c(), arc, x, p]);
        }
    };
    samples.extend(ends.iter().map(|(s, _)| s.clone()));
    samples.sort_by(|a, b| a.c().total_cmp(&b.c()));
    for s in &samples {
        write(s);
    }
    let mut out = Outcome::new(csv.into_string(), clean);
    if let Some(path) = &cfg.svg {
        let (lo, hi) = samples
            .iter()
            .flat_map(|s| s.pg.polyline.iter().map(|p| p.1))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p), b.max(p)));
        let pad = 0.05 * (hi - lo).max(1e-9);
        let mut svg = Svg::new(800.0, 600.0, (lo - pad, hi + pad));
        for s in &samples {
            let pts: Vec<(f64, f64)> = s.pg.polyline.iter().map(|&(x, p)| (x - s.pg.polyline[0].0, p)).collect();
            svg.polyline(&pts, "#999999", 0.6);
        }
        for (s, color) in &ends {
            let pts: Vec<(f64, f64)> = s.pg.polyline.iter().map(|&(x, p)| (x - s.pg.polyline[0].0, p)).collect();
            svg.polyline(&pts, color, 1.8);
        }
        out.files.push((path.clone(), svg.finish()));
    }
    Ok(out)
}

pub fn orbit(cfg: &RunConfig) -> Result<Outcome> {
    let e = entry(cfg)?;
    let disc = discretization(cfg, &e)?;
    let sol = disc.solve(cfg.c, &solve_options(cfg))?;
    let steps = cfg.steps_or(50);
    let seg = backward_orbit(&disc, &sol, wrap(cfg.theta), steps)?;
    let res = calibration_residual(e.generating(), &sol, &seg);
    let mut csv = Csv::new(&["k", "theta", "r", "calib_residual"]);
    for (j, &(x, r)) in seg.points.iter().enumerate() {
        let k = j as i64 - steps as i64;
        let calib = if k == 0 { 0.0 } else { res[(-k - 1) as usize] };
        csv.row(&[k.to_string(), num(x), num(r), num(calib)]);
    }
    Ok(Outcome::new(csv.into_string(), sol.converged))
}

#[derive(Serialize)]
struct VerticalPoint {
    theta: f64,
    p: f64,
}

#[derive(Serialize)]
struct VerticalJson {
    rho: f64,
    theta: f64,
    a: f64,
    b: f64,
    points: Vec<VerticalPoint>,
}

pub fn vertical(cfg: &RunConfig) -> Result<Outcome> {
    let e = entry(cfg)?;
    let map = e.map.clone();
    let st = study(cfg, e, cfg.steps_or(161))?;
    let (a, b) = inverse_rho(&st.curve, &st.plateaus, cfg.rho)?;
    let (sa, sb) = match st.plateaus.iter().find(|p| p.a == a && p.b == b && p.u_a.is_some()) {
        Some(p) => (
            Sample::new(p.u_a.clone().expect("refined")),
            Sample::new(p.u_b.clone().expect("refined")),
        ),
        None => {
            let s = Sample::new(st.solution(a, None)?);
            (s.clone(), s)
        }
    };
    let merge = 4.0 / cfg.grid as f64;
    let pts = twisted_vertical_minimizers(&map, &[&sa.pg, &sb.pg], wrap(cfg.theta), merge)?;
    let clean = sa.sol.converged && sb.sol.converged;
    let body = VerticalJson {
        rho: cfg.rho,
        theta: wrap(cfg.theta),
        a,
        b,
        points: pts.into_iter().map(|(theta, p)| VerticalPoint { theta, p }).collect(),
    };
    Ok(Outcome::new(json(&body), clean))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let e = load_unchecked(&cfg.map, &cfg.params)?;
    let mut report = VerifyReport::new(&e, cfg.grid, cfg.seed);
    report.push(property("generating_invariants", || Ok(verify::generating_invariants(&e))));
    if !report.passed {
        let clean = report.passed;
        return Ok(Outcome::new(json(&report), clean));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let st = study(cfg, e.clone(), cfg.steps_or(161))?;
    report.push(property("alpha_convexity", || {
        Ok(Measured::at_most(st.curve.convexity_defect, 1e-8, format!("{} samples", st.curve.len())))
    }));
    let (lo, hi) = cfg.range;
    let mut cs: Vec<f64> = (0..24).map(|_| rng.gen_range(lo..hi)).collect();
    let plateau = st.main_plateau().cloned();
    if let Some(p) = &plateau {
        cs.extend([p.a, p.b, 0.5 * (p.a + p.b)]);
    }
    let samples = st.samples(&cs)?;
    if let Some(truth) = e.analytic_truth {
        if truth.alpha(1.0).is_some() {
            let sols: Vec<_> = samples.iter().map(|s| s.sol.clone()).collect();
            report.push(property("alpha_truth", || verify::alpha_truth(&truth, &sols, 1e-6)));
            report.push(property("solution_truth", || verify::solution_truth(&truth, &sols, 3.0, 1e-6)));
        }
    }
    report.push(property("lipschitz_selection", || verify::lipschitz_pairs(&samples, cfg.pairs, &mut rng)));
    let rho: Vec<f64> = samples
        .iter()
        .map(|s| match st.plateaus.iter().find(|p| p.contains(s.c())) {
            Some(p) => Ok(p.rotation()),
            None => st.curve.rho_at(s.c()),
        })
        .collect::<Result<_>>()?;
    report.push(property("vertical_ordering", || {
        verify::ordering_pairs(&samples, &rho, cfg.pairs.min(50), &mut rng)
    }));
    let p_lo = samples.first().map_or(lo, |s| s.pg.polyline.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
    let p_hi = samples.last().map_or(hi, |s| s.pg.polyline.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max));
    report.push(property("covering", || {
        verify::covering(&st, &samples, cfg.points, (p_lo, p_hi), 1e-3, &mut rng)
    }));
    let hcs: Vec<f64> = (0..cfg.points.min(20)).map(|_| rng.gen_range(lo..hi - 0.04)).collect();
    report.push(property("hausdorff_continuity", || {
        verify::hausdorff_monotone(&st, &hcs, &[0.04, 0.02, 0.01])
    }));
    let lrange = plateau.as_ref().map_or(cfg.range, |p| ((p.a - 0.2).max(lo), (p.b + 0.2).min(hi)));
    report.push(property("legendre", || verify::legendre(&st, lrange, cfg.qmax, 8, cfg.seed)));
    let orbits = verify::collect_orbits(&st.disc, &samples, cfg.points.min(30), 50, &mut rng)?;
    report.push(property("orbit_calibration", || Ok(verify::orbit_calibration(&orbits))));
    report.push(property("orbit_rotation_bound", || Ok(verify::orbit_rotation_bound(&orbits, 1.05))));
    report.push(property("orbit_crossing", || verify::orbit_crossings(&[&orbits], 1e-8)));
    report.push(property("pullback_graph", || verify::pullback(&e.map, &samples)));
    if let Some(p) = &plateau {
        push_plateau_checks(&mut report, &st, &e, p, &samples, &orbits, &mut rng, cfg)?;
    }
    let clean = report.passed;
    Ok(Outcome::new(json(&report), clean))
}

#[allow(clippy::too_many_arguments)]
fn push_plateau_checks(
    report: &mut VerifyReport,
    st: &Study,
    e: &MapCatalogEntry,
    p: &PlateauReport,
    samples: &[Sample],
    orbits: &[verify::OrbitRecord],
    rng: &mut impl Rng,
    cfg: &RunConfig,
) -> Result<()> {
    let pga = Sample::new(p.u_a.clone().expect("refined"));
    let pgb = Sample::new(p.u_b.clone().expect("refined"));
    let mather = mather_set(e.generating(), p.p, p.q, 8, cfg.seed)?;
    report.push(property("orbit_squeeze", || Ok(verify::orbit_squeeze(orbits, p, &mather))));
    let thetas: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
    report.push(property("twisted_vertical", || {
        verify::twisted_vertical(&e.map, &pga.pg, &pgb.pg, &p.mather_points, &thetas, 0.01)
    }));
    let mid = samples
        .iter()
        .filter(|s| p.contains(s.c()))
        .min_by(|a, b| (a.c() - 0.5 * (p.a + p.b)).abs().total_cmp(&(b.c() - 0.5 * (p.a + p.b)).abs()));
    if let Some(mid) = mid {
        report.push(property("plateau_inclusion", || {
            Ok(verify::plateau_inclusion(&mid.pg, &pga.pg, &pgb.pg, 1e-2))
        }));
    }
    let h = st.disc.grid.h();
    report.push(property("plateau_coincidence", || {
        Ok(verify::coincidence(&pga.pg, &pgb.pg, &p.mather_points, h, 2.0))
    }));
    Ok(())
}

/// Whether an error comes from the configuration rather than the numerics.
pub fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::UnknownMap(_) | Error::InvalidParameter { .. } | Error::InvalidInput(_) | Error::OutOfRange(..) | Error::Io(_)
    )
}
