use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakkam::circle::circle_dist;
use weakkam::cli::{Sample, Study, StudyConfig};
use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::orbits::{
    backward_orbit, calibration_residual, crossing_count, grid_tol, mather_set, rotation_number_of_segment,
    twisted_vertical_minimizers,
};
use weakkam::twist::{load, parse_params, MapParams};

#[test]
fn integrable_orbits_rotate_rigidly() {
    let e = load("integrable", &MapParams::new()).unwrap();
    let d = Discretization::new(e.map.generating_arc(), CircleGrid::new(128).unwrap());
    d.prepare(-1.0, 1.0).unwrap();
    for c in [-0.4, 0.25, 0.8] {
        let sol = d.solve(c, &SolveOptions::default()).unwrap();
        let seg = backward_orbit(&d, &sol, 0.3, 50).unwrap();
        for (j, &(theta, r)) in seg.points.iter().enumerate() {
            let k = j as f64 - 50.0;
            assert!((theta - (0.3 + k * c)).abs() < 1e-6 && (r - c).abs() < 1e-6, "{c} {k}: {theta} {r}");
        }
        let rot = rotation_number_of_segment(&seg).unwrap();
        assert!((rot.estimate - c).abs() < 1e-6);
        let res = calibration_residual(e.generating(), &sol, &seg);
        assert!(res.iter().all(|r| r.abs() <= 1e-6));
    }
}

#[test]
fn integrable_periodic_action() {
    let e = load("integrable", &MapParams::new()).unwrap();
    let m = mather_set(e.generating(), 1, 3, 4, 0).unwrap();
    let b = &m.orbits[0];
    assert!((b.average_action - 1.0 / 18.0).abs() < 1e-12);
}

#[test]
fn pendulum_orbits_and_vertical() {
    let entry = load("pendulum", &parse_params("t0=0.1").unwrap()).unwrap();
    let cfg = StudyConfig {
        grid: 512,
        range: (-1.6, 1.6),
        steps: 161,
        ..StudyConfig::default()
    };
    let study = Study::new(entry, &cfg).unwrap();
    let gf = study.entry.generating();
    let zero = study.solution(0.0, None).unwrap();

    let fixed = backward_orbit(&study.disc, &zero, 0.0, 20).unwrap();
    assert!(fixed.points.iter().all(|&(t, r)| t.abs() < 1e-9 && r.abs() < 1e-9));
    // exact up to the solver tolerance on α, once per step
    let fres = calibration_residual(gf, &zero, &fixed);
    for (k, r) in fres.iter().enumerate() {
        assert!(r.abs() <= 1e-9 * (k + 1) as f64, "k = {k}: {r}");
    }

    // the backward orbit from 0.3 runs monotonically into a fixed point
    let seg = backward_orbit(&study.disc, &zero, 0.3, 200).unwrap();
    let thetas = seg.thetas();
    let steps: Vec<f64> = thetas.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|s| *s >= -1e-12) || steps.iter().all(|s| *s <= 1e-12));
    let far = thetas[0];
    assert!(far.abs() < 1e-3 || (far - 0.5).abs() < 1e-3, "{far}");
    let res = calibration_residual(gf, &zero, &seg);
    let tol = grid_tol(&zero);
    for (j, r) in res.iter().rev().enumerate().take(51) {
        assert!(r.abs() <= 5.0 * tol * j.max(1) as f64, "k = -{j}: {r}");
    }
    let rot = rotation_number_of_segment(&seg).unwrap();
    assert!(rot.estimate.abs() < 1e-2 && rot.bound < 1.0);

    // distinct minimizing segments cross at most once
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let segs: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            let c = rng.gen_range(-1.0..1.0);
            let sol = study.solution(c, None).unwrap();
            backward_orbit(&study.disc, &sol, rng.gen_range(0.0..1.0), 40).unwrap().thetas()
        })
        .collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            assert!(crossing_count(&segs[i], &segs[j], 1e-8).unwrap() <= 1, "{i} {j}");
        }
    }

    let plateau = study.main_plateau().unwrap();
    let pga = Sample::new(plateau.u_a.clone().unwrap()).pg;
    let pgb = Sample::new(plateau.u_b.clone().unwrap()).pg;
    let tol = 4.0 / 512.0;
    let pts = twisted_vertical_minimizers(&study.entry.map, &[&pga, &pgb], 0.3, tol).unwrap();
    assert_eq!(pts.len(), 2, "{pts:?}");
    assert!(pts[0].1 * pts[1].1 < 0.0, "one candidate per separatrix branch: {pts:?}");
    // both candidates collapse onto the fixed point, up to the grid
    let pts = twisted_vertical_minimizers(&study.entry.map, &[&pga, &pgb], 0.0, tol).unwrap();
    assert!(!pts.is_empty() && pts.len() <= 2);
    assert!(pts.iter().all(|p| circle_dist(p.0, 0.0).hypot(p.1) < 2.0 * tol), "{pts:?}");

    let m = mather_set(gf, 0, 1, 8, 0).unwrap();
    assert!((m.y_plus(0.3) - 0.5).abs() < 1e-9 && m.y_minus(0.3).abs() < 1e-9);
    assert!(m.squeeze_defect(&seg) < 1e-9);
}
