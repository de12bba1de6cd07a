use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakkam::cli::verify::{self, Measured, PropertyResult};
use weakkam::cli::{property, Sample, Study, StudyConfig};
use weakkam::alpha_rho::detect_plateaus;
use weakkam::circle::circle_dist;
use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions, WeakKamSolution};
use weakkam::orbits::mather_set;
use weakkam::pseudograph::{build_pseudograph, default_gap_tol, is_c1, FullPseudograph};
use weakkam::twist::catalog::{pendulum_separatrix, Pendulum, Scheme, PENDULUM_PLATEAU_HALF_WIDTH};
use weakkam::twist::{load, parse_params, AnalyticTruth, GeneratingFunction};

const GRID: usize = 1024;
const C_STEP: f64 = 0.005;
const SEED: u64 = 20240917;

struct Tally {
    failed: usize,
    start: Instant,
}

impl Tally {
    fn line(&mut self, id: &str, title: &str, r: &PropertyResult) {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        if !r.passed {
            self.failed += 1;
        }
        println!(
            "criterion {id:>2} {mark} {title}: measured {:.6e} tolerance {:.6e} ({}) [{:.1}s, total {:.0}s]",
            r.measured,
            r.tolerance,
            r.detail,
            r.seconds,
            self.start.elapsed().as_secs_f64()
        );
    }

    fn info(&self, title: &str, r: &PropertyResult) {
        let mark = if r.passed { "pass" } else { "fail" };
        println!(
            "   info      {mark} {title}: measured {:.6e} tolerance {:.6e} ({})",
            r.measured, r.tolerance, r.detail
        );
    }
}

fn all_pass(results: Vec<PropertyResult>) -> PropertyResult {
    let passed = results.iter().all(|r| r.passed);
    let worst = results
        .iter()
        .find(|r| !r.passed)
        .or_else(|| results.iter().max_by(|a, b| (a.measured / a.tolerance).total_cmp(&(b.measured / b.tolerance))))
        .expect("non-empty");
    PropertyResult {
        name: worst.name.clone(),
        passed,
        measured: worst.measured,
        tolerance: worst.tolerance,
        detail: results
            .iter()
            .map(|r| format!("{}: {:.3e}/{:.3e} {}", r.name, r.measured, r.tolerance, r.detail))
            .collect::<Vec<_>>()
            .join("; "),
        seconds: results.iter().map(|r| r.seconds).sum(),
    }
}

fn solve_all(disc: &Discretization, cs: &[f64]) -> Vec<WeakKamSolution> {
    disc.prepare(cs[0], cs[cs.len() - 1]).expect("table");
    cs.iter()
        .map(|&c| disc.solve(c, &SolveOptions::default()).expect("solve"))
        .collect()
}

/// Upper end of `ρ⁻¹(0)` by bisection on whether `α` leaves `α(0)`.
fn plateau_end(disc: &Discretization, lo: f64, hi: f64) -> (f64, f64) {
    let go = SolveOptions::grid_only();
    let a0 = disc.solve(0.0, &go).expect("solve").alpha;
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if disc.solve(mid, &go).expect("solve").alpha > a0 + 1e-8 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn pendulum_disc(t0: f64, substeps: usize, scheme: Scheme) -> Discretization {
    let gf: Arc<dyn GeneratingFunction> = Arc::new(Pendulum::new(t0, substeps).with_scheme(scheme));
    Discretization::new(gf, CircleGrid::new(GRID).unwrap())
}

/// Endpoint geometry at `c = â`: C¹ at the given gap and distance of the
/// thin nodes to the separatrix.
fn endpoint_geometry(disc: &Discretization) -> (f64, FullPseudograph) {
    disc.prepare(0.0, 1.8).unwrap();
    let (_, b_out) = plateau_end(disc, 0.3, 1.8);
    let sol = disc.solve(b_out, &SolveOptions::default()).unwrap();
    (b_out, build_pseudograph(&sol, default_gap_tol(&sol)))
}

fn separatrix_deviation(pg: &FullPseudograph) -> f64 {
    pg.thin_nodes()
        .map(|iv| (0.5 * (iv.p_minus + iv.p_plus) - pendulum_separatrix(iv.theta)).abs())
        .fold(0.0, f64::max)
}

fn main() -> ExitCode {
    let mut tally = Tally {
        failed: 0,
        start: Instant::now(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // 1. integrable exactness
    let integrable = load("integrable", &Default::default()).unwrap();
    let int_disc = Discretization::new(integrable.map.generating_arc(), CircleGrid::new(GRID).unwrap());
    let int_cs: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
    let int_sols = solve_all(&int_disc, &int_cs);
    let r = all_pass(vec![
        property("alpha", || verify::alpha_truth(&AnalyticTruth::Integrable, &int_sols, 1e-6)),
        property("u", || {
            let worst = int_sols
                .iter()
                .map(|s| s.u.iter().fold(0.0f64, |m, x| m.max(x.abs())))
                .fold(0.0, f64::max);
            Ok(Measured::at_most(worst, 1e-6, "sup |u_c|"))
        }),
    ]);
    tally.line("1", "integrable exactness", &r);

    // 2. conjugated ground truth
    let conjugated = load("conjugated", &parse_params("eps=0.1").unwrap()).unwrap();
    let truth = conjugated.analytic_truth.unwrap();
    let conj_disc = Discretization::new(conjugated.map.generating_arc(), CircleGrid::new(GRID).unwrap());
    let conj_sols = solve_all(&conj_disc, &[-1.0, -0.5, 0.5, 1.0]);
    let r = property("u", || verify::solution_truth(&truth, &conj_sols, 3.0, 0.0));
    tally.line("2", "conjugated ground truth", &r);

    // 3. pendulum plateau
    let pendulum = load("pendulum", &parse_params("t0=0.1").unwrap()).unwrap();
    let cfg = StudyConfig {
        grid: GRID,
        range: (-1.6, 1.6),
        steps: 641,
        seed: SEED,
        ..StudyConfig::default()
    };
    let study = Study::new(pendulum.clone(), &cfg).unwrap();
    println!("   study built [{:.0}s]", tally.start.elapsed().as_secs_f64());
    let plateau = study.main_plateau().expect("pendulum plateau").clone();
    let a_hat = 0.5 * (plateau.b - plateau.a);
    let detected = detect_plateaus(&study.curve, cfg.q_max, cfg.flat_tol)
        .into_iter()
        .find(|p| p.p == 0)
        .expect("ρ = 0 plateau");
    let study_hat = |t0: f64| {
        let disc = pendulum_disc(t0, 1, Scheme::Euler);
        disc.prepare(0.0, 1.8).unwrap();
        plateau_end(&disc, 0.3, 1.8).0
    };
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&t0| {
            let h = if t0 == 0.1 { a_hat } else { study_hat(t0) };
            (h / PENDULUM_PLATEAU_HALF_WIDTH - 1.0).abs()
        })
        .collect();
    let r = all_pass(vec![
        property("symmetry", || {
            Ok(Measured::at_most(
                (detected.a + detected.b).abs(),
                2.0 * C_STEP,
                format!("sweep detected [{}, {}], refined [{}, {}]", detected.a, detected.b, plateau.a, plateau.b),
            ))
        }),
        property("half-width", || {
            Ok(Measured::at_most(errs[1], 0.05, format!("â = {a_hat:.7} against 4/π")))
        }),
        property("convergence", || {
            let decreasing = errs[0] > errs[1] && errs[1] > errs[2];
            Ok(Measured::at_most(
                if decreasing { 0.0 } else { 1.0 },
                0.0,
                format!("relative errors at t0 = 0.2, 0.1, 0.05: {errs:.4?}"),
            ))
        }),
    ]);
    tally.line("3", "pendulum plateau", &r);

    // 4. endpoint geometry (on the sub-stepped map; the plain map is reported alongside)
    let pga = Sample::new(plateau.u_a.clone().unwrap());
    let pgb = Sample::new(plateau.u_b.clone().unwrap());
    let r = property("endpoint", || {
        let disc = pendulum_disc(0.1, 4, Scheme::Verlet);
        let (b, pg) = endpoint_geometry(&disc);
        let c1 = is_c1(&pg, 0.02);
        let dev = separatrix_deviation(&pg);
        Ok(Measured {
            passed: c1.is_c1 && dev <= 0.05,
            measured: dev,
            tolerance: 0.05,
            detail: format!(
                "substeps=4 verlet, â = {b:.7}, largest gap {:.4} at {:.4}, sup |â + u' - s⁺| = {dev:.4}",
                c1.max_gap, c1.at
            ),
        })
    });
    tally.line("4", "endpoint solution geometry", &r);
    let c1 = is_c1(&pgb.pg, 0.02);
    tally.info(
        "endpoint geometry on substeps=1",
        &PropertyResult {
            name: "endpoint".into(),
            passed: c1.is_c1 && separatrix_deviation(&pgb.pg) <= 0.05,
            measured: separatrix_deviation(&pgb.pg),
            tolerance: 0.05,
            detail: format!("largest gap {:.4} at {:.4}", c1.max_gap, c1.at),
            seconds: 0.0,
        },
    );

    // 5. selected c = 0
    let zero = Sample::new(study.solution(0.0, None).unwrap());
    let r = property("jumps", || {
        let h = 1.0 / GRID as f64;
        let js: Vec<f64> = zero.pg.jumps.iter().map(|j| j.theta).collect();
        let off = if js.len() == 2 {
            circle_dist(js[0], 0.25).max(circle_dist(js[1], 0.75)) / h
        } else {
            f64::INFINITY
        };
        Ok(Measured::at_most(off, 2.0, format!("jumps at {js:?}, offset in cells")))
    });
    tally.line("5", "selected c=0 solution", &r);

    // pool of selected solutions around the plateau
    let mut pool_cs: Vec<f64> = (0..40).map(|_| rng.gen_range(-a_hat - 0.3..a_hat + 0.3)).collect();
    pool_cs.extend([plateau.a, plateau.b, 0.0]);
    let pool = study.samples(&pool_cs).unwrap();
    println!("   pool of {} built [{:.0}s]", pool.len(), tally.start.elapsed().as_secs_f64());

    // 6. 1-Lipschitz selection
    let r = property("lipschitz", || verify::lipschitz_pairs(&pool, 200, &mut rng));
    tally.line("6", "1-Lipschitz selection", &r);

    // 7. vertical ordering
    let rho: Vec<f64> = pool
        .iter()
        .map(|s| {
            if plateau.contains(s.c()) {
                0.0
            } else {
                study.curve.rho_at(s.c()).unwrap()
            }
        })
        .collect();
    let r = property("ordering", || verify::ordering_pairs(&pool, &rho, 50, &mut rng));
    tally.line("7", "vertical ordering", &r);

    // 8. covering
    let mut cover_cs: Vec<f64> = (0..=26).map(|i| -2.6 + 0.2 * i as f64).collect();
    cover_cs.retain(|c| !plateau.contains(*c));
    let mut cover = study.samples(&cover_cs).unwrap();
    cover.extend(pool.iter().cloned());
    cover.sort_by(|a, b| a.c().total_cmp(&b.c()));
    let r = property("covering", || verify::covering(&study, &cover, 100, (-2.0, 2.0), 1e-3, &mut rng));
    tally.line("8", "covering", &r);

    // 9. Hausdorff continuity
    let hcs: Vec<f64> = (0..20).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let r = property("hausdorff", || verify::hausdorff_monotone(&study, &hcs, &[0.04, 0.02, 0.01]));
    tally.line("9", "Hausdorff continuity", &r);

    // 10. Legendre oracle
    let r = property("legendre", || {
        verify::legendre(&study, (plateau.a - 0.2, plateau.b + 0.2), 8, 8, SEED)
    });
    tally.line("10", "Legendre oracle", &r);

    // 11. orbit battery
    let r = property("orbits", || {
        let on: Vec<Sample> = pool.iter().filter(|s| plateau.contains(s.c())).cloned().collect();
        let pend = verify::collect_orbits(&study.disc, &on, 17, 50, &mut rng)?;
        let int_samples: Vec<Sample> = int_sols.iter().cloned().map(Sample::new).collect();
        let int = verify::collect_orbits(&int_disc, &int_samples, 17, 50, &mut rng)?;
        let conj_samples: Vec<Sample> = conj_sols.iter().cloned().map(Sample::new).collect();
        let conj = verify::collect_orbits(&conj_disc, &conj_samples, 16, 50, &mut rng)?;
        let all: Vec<_> = pend.iter().chain(&int).chain(&conj).cloned().collect();
        let mather = mather_set(study.disc.generating(), 0, 1, 8, SEED)?;
        let parts = vec![
            property("calibration", || Ok(verify::orbit_calibration(&all))),
            property("rotation", || Ok(verify::orbit_rotation_bound(&all, 1.05))),
            property("crossing", || verify::orbit_crossings(&[&pend, &int, &conj], 1e-8)),
            property("squeeze", || Ok(verify::orbit_squeeze(&pend, &plateau, &mather))),
        ];
        let r = all_pass(parts);
        Ok(Measured {
            passed: r.passed,
            measured: r.measured,
            tolerance: r.tolerance,
            detail: r.detail,
        })
    });
    tally.line("11", "orbit battery", &r);

    // 12. twisted vertical
    let thetas: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
    let r = property("vertical", || {
        verify::twisted_vertical(&pendulum.map, &pga.pg, &pgb.pg, &plateau.mather_points, &thetas, 0.01)
    });
    tally.line("12", "twisted vertical", &r);

    // 13. pullback graph
    let pcs: Vec<f64> = (0..10).map(|i| -2.0 + 4.0 * i as f64 / 9.0).collect();
    let r = property("pullback", || verify::pullback(&pendulum.map, &study.samples(&pcs)?));
    tally.line("13", "pullback graph", &r);

    // 14. plateau structure
    let h = 1.0 / GRID as f64;
    let r = all_pass(vec![
        property("inclusion", || Ok(verify::plateau_inclusion(&zero.pg, &pga.pg, &pgb.pg, 1e-2))),
        property("coincidence", || Ok(verify::coincidence(&pga.pg, &pgb.pg, &plateau.mather_points, h, 2.0))),
    ]);
    tally.line("14", "plateau structure", &r);
    tally.info(
        "coincidence locus at 1e-2",
        &property("coincidence", || Ok(verify::coincidence(&pga.pg, &pgb.pg, &plateau.mather_points, 1e-2, 2.0))),
    );

    println!(
        "{} of 14 criteria failed [{:.0}s]",
        tally.failed,
        tally.start.elapsed().as_secs_f64()
    );
    if tally.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
