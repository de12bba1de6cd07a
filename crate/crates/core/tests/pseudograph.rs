use weakkam::cli::{Sample, Study, StudyConfig};
use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::pseudograph::{
    build_pseudograph, covering_locate, default_gap_tol, hausdorff_distance, is_c1, pullback_graph_check,
    vertical_order_check,
};
use weakkam::twist::{load, parse_params, MapParams};

fn pendulum_study(grid: usize) -> Study {
    let entry = load("pendulum", &parse_params("t0=0.1").unwrap()).unwrap();
    let cfg = StudyConfig {
        grid,
        range: (-1.6, 2.8),
        steps: 221,
        ..StudyConfig::default()
    };
    Study::new(entry, &cfg).unwrap()
}

#[test]
fn integrable_circles_are_parallel() {
    let e = load("integrable", &MapParams::new()).unwrap();
    let d = Discretization::new(e.map.generating_arc(), CircleGrid::new(128).unwrap());
    d.prepare(-1.0, 2.0).unwrap();
    let pg = |c: f64| {
        let s = d.solve(c, &SolveOptions::default()).unwrap();
        build_pseudograph(&s, default_gap_tol(&s))
    };
    let (a, b) = (pg(0.0), pg(1.0));
    assert_eq!(hausdorff_distance(&a, &a), 0.0);
    assert!((hausdorff_distance(&a, &b) - 1.0).abs() < 1e-9);
    assert!((vertical_order_check(&a, &b).margin - 1.0).abs() < 1e-9);
    assert!(is_c1(&a, 1e-9).is_c1);
    assert!(pullback_graph_check(&e.map, &a).unwrap().is_graph());
    let hit = covering_locate(|c| Ok(pg(c)), 0.3, 0.7, (-0.5, 0.5), 1e-7).unwrap();
    assert!((hit.c - 0.7).abs() < 1e-6, "{hit:?}");
}

#[test]
fn pendulum_pseudographs() {
    let study = pendulum_study(512);
    let plateau = study.main_plateau().unwrap().clone();

    let zero = Sample::new(study.solution(0.0, None).unwrap());
    let thetas: Vec<f64> = zero.pg.jumps.iter().map(|j| j.theta).collect();
    assert_eq!(thetas.len(), 2, "{thetas:?}");
    let h = 1.0 / 512.0;
    assert!((thetas[0] - 0.25).abs() < 2.0 * h && (thetas[1] - 0.75).abs() < 2.0 * h);
    // bars span ±s⁺(1/4) = ±2 up to the discrete deformation of the separatrix
    let gap = is_c1(&zero.pg, 0.02);
    assert!(!gap.is_c1);
    for j in &zero.pg.jumps {
        assert!(j.top > 1.5 && j.bottom < -1.5, "{j:?}");
    }
    assert!(pullback_graph_check(&study.entry.map, &zero.pg).unwrap().is_graph());

    // outside the plateau, with ρ < 0 < ρ'
    let below = Sample::new(study.solution(plateau.a - 0.2, None).unwrap());
    let above = Sample::new(study.solution(plateau.b + 0.2, None).unwrap());
    assert!(vertical_order_check(&below.pg, &above.pg).margin > 0.0);

    // (1/4, 0) sits on the bar of the selected PG(0)
    let hit = covering_locate(
        |c| Ok(Sample::new(study.solution(c, None)?).pg),
        0.25,
        0.0,
        (plateau.a, plateau.b),
        2e-3,
    )
    .unwrap();
    assert!(plateau.contains(hit.c), "{hit:?}");
    assert!(hit.distance <= 2e-3);

    let hit = covering_locate(
        |c| Ok(Sample::new(study.solution(c, None)?).pg),
        0.0,
        2.0,
        (plateau.b, plateau.b + 0.6),
        1e-4,
    )
    .unwrap();
    let s = Sample::new(study.solution(hit.c, None).unwrap());
    assert!(s.pg.distance_to(0.0, 2.0) <= 1e-4, "{hit:?}");
}

#[test]
fn hausdorff_distance_shrinks_with_the_class_step() {
    let study = pendulum_study(512);
    // inside the plateau, and above the chaotic layer around the separatrix
    for c in [-0.6, 0.3, 2.5] {
        let base = Sample::new(study.solution(c, None).unwrap());
        let d: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|dc| {
                let next = study.solution(c + dc, Some(&base.sol)).unwrap();
                hausdorff_distance(&base.pg, &Sample::new(next).pg)
            })
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "c = {c}: {d:?}");
    }
}
