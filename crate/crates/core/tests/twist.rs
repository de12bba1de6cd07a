use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakkam::twist::{euler_lagrange_residual, load, parse_params, MapParams, MapCatalogEntry};

fn entries() -> Vec<MapCatalogEntry> {
    [
        ("integrable", ""),
        ("pendulum", "t0=0.1"),
        ("pendulum", "t0=0.1,substeps=4,scheme=verlet"),
        ("standard", "k=0.6"),
        ("conjugated", "eps=0.1"),
    ]
    .iter()
    .map(|(name, p)| load(name, &parse_params(p).unwrap()).unwrap())
    .collect()
}

#[test]
fn action_is_invariant_under_the_deck_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for e in entries() {
        let gf = e.generating();
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-3.0..3.0);
            let y = x + rng.gen_range(-1.5..1.5);
            let d = gf.eval(x + 1.0, y + 1.0) - gf.eval(x, y);
            assert!(d.abs() < 1e-12, "{} at ({x}, {y}): {d}", e.name);
        }
    }
}

#[test]
fn inverse_undoes_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for e in entries() {
        for _ in 0..100 {
            let (theta, r) = (rng.gen_range(0.0..1.0), rng.gen_range(-2.0..2.0));
            let (t1, r1) = e.map.map_forward(theta, r).unwrap();
            let (t0, r0) = e.map.map_inverse(t1, r1).unwrap();
            assert!((t0 - theta).abs() < 1e-9 && (r0 - r).abs() < 1e-9, "{}: ({theta}, {r})", e.name);
        }
    }
}

#[test]
fn inverse_commutes_with_the_deck_shift() {
    let e = load("pendulum", &parse_params("t0=0.1").unwrap()).unwrap();
    for (big_theta, big_r) in [(0.3, 0.4), (0.9, -1.2), (0.05, 2.0)] {
        let (a, ra) = e.map.map_inverse(big_theta + 1.0, big_r).unwrap();
        let (b, rb) = e.map.map_inverse(big_theta, big_r).unwrap();
        assert!((a - b - 1.0).abs() < 1e-12 && (ra - rb).abs() < 1e-12);
    }
}

#[test]
fn integrable_examples() {
    let e = load("integrable", &MapParams::new()).unwrap();
    assert_eq!(e.generating().eval(0.0, 0.5), 0.125);
    let (t, r) = e.map.map_forward(0.2, 0.3).unwrap();
    assert!((t - 0.5).abs() < 1e-15 && r == 0.3);
    let (t, r) = e.map.map_inverse(0.5, 0.3).unwrap();
    assert!((t - 0.2).abs() < 1e-15 && r == 0.3);
}

#[test]
fn straight_segments_are_critical_and_perturbations_are_not() {
    let e = load("integrable", &MapParams::new()).unwrap();
    let omega = 0.37;
    let mut seg: Vec<f64> = (0..12).map(|k| k as f64 * omega).collect();
    assert!(euler_lagrange_residual(e.generating(), &seg).iter().all(|r| r.abs() < 1e-12));
    seg[5] += 1e-3;
    let res = euler_lagrange_residual(e.generating(), &seg);
    let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    // ∂₁₁S + ∂₂₂S = 2 for the integrable action
    assert!((worst - 2e-3).abs() < 1e-9, "{worst}");

    let p = load("pendulum", &parse_params("t0=0.1").unwrap()).unwrap();
    assert!(euler_lagrange_residual(p.generating(), &[0.0; 8]).iter().all(|r| r.abs() < 1e-12));
}

#[test]
fn corrupted_twist_is_rejected() {
    let params = parse_params("corrupt=twist").unwrap();
    assert!(load("integrable", &params).is_err());
    let e = weakkam::twist::load_unchecked("integrable", &params).unwrap();
    assert!(!e.report.twist() && !e.report.passed());
}
