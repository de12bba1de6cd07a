use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakkam::alpha_rho::{beta_oracle, detect_plateaus, inverse_rho, sample_alpha_curve, AlphaCurve};
use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::twist::{load, parse_params};

fn curve_with(name: &str, params: &str, n: usize, range: (f64, f64), steps: usize, opts: &SolveOptions) -> AlphaCurve {
    let e = load(name, &parse_params(params).unwrap()).unwrap();
    let d = Discretization::new(e.map.generating_arc(), CircleGrid::new(n).unwrap());
    sample_alpha_curve(&d, range, steps, opts).unwrap()
}

fn curve(name: &str, params: &str, n: usize, range: (f64, f64), steps: usize) -> AlphaCurve {
    curve_with(name, params, n, range, steps, &SolveOptions::grid_only())
}

#[test]
fn integrable_alpha_and_rho() {
    let c = curve_with("integrable", "", 64, (-2.0, 2.0), 41, &SolveOptions::default());
    for i in 0..c.len() {
        let x = c.c_samples[i];
        assert!((c.alpha_values[i] - 0.5 * x * x).abs() < 1e-6);
        assert!((c.rho_values[i] - x).abs() < 1e-3, "rho({x}) = {}", c.rho_values[i]);
    }
    let plateaus = detect_plateaus(&c, 5, 1e-4);
    assert!(plateaus.iter().all(|p| p.width() <= c.step()), "{plateaus:?}");
    let (lo, hi) = inverse_rho(&c, &plateaus, 0.35).unwrap();
    assert!((lo - 0.35).abs() < 1e-3 && (hi - 0.35).abs() < 1e-3);
}

#[test]
fn alpha_is_convex_on_every_map() {
    for (name, params) in [("integrable", ""), ("pendulum", "t0=0.1"), ("standard", "k=0.6"), ("conjugated", "eps=0.1")] {
        let c = curve(name, params, 256, (-1.5, 1.5), 31);
        assert!(c.convexity_defect <= 1e-6, "{name}: {}", c.convexity_defect);
    }
}

#[test]
fn pendulum_plateau_is_symmetric_and_flat() {
    let c = curve("pendulum", "t0=0.1", 256, (-2.0, 2.0), 161);
    let plateaus = detect_plateaus(&c, 4, 1e-4);
    let (a, b) = inverse_rho(&c, &plateaus, 0.0).unwrap();
    assert!((a + b).abs() <= 2.0 * c.step(), "[{a}, {b}]");
    // the per-time half-width approaches 4/π as the step shrinks
    assert!(b > 1.0 && b < 1.35, "{b}");
    for i in 0..c.len() {
        if c.c_samples[i].abs() <= 0.3 {
            assert!((c.alpha_values[i] - 0.1).abs() < 1e-4);
        }
    }
}

#[test]
fn inverse_rho_contains_its_class() {
    let c = curve("standard", "k=0.6", 128, (-1.0, 1.0), 201);
    let plateaus = detect_plateaus(&c, 6, 1e-4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let x: f64 = rng.gen_range(-0.9..0.9);
        let (lo, hi) = inverse_rho(&c, &plateaus, c.rho_at(x).unwrap()).unwrap();
        assert!(lo - c.step() <= x && x <= hi + c.step(), "{x} not in [{lo}, {hi}]");
    }
}

#[test]
fn fenchel_inequality_against_periodic_actions() {
    let e = load("standard", &parse_params("k=0.6").unwrap()).unwrap();
    let c = curve("standard", "k=0.6", 256, (-1.0, 1.5), 51);
    for q in 1..=5u64 {
        for p in 0..=q as i64 {
            let beta = beta_oracle(e.generating(), p, q, 6, 9).unwrap();
            let rho = p as f64 / q as f64;
            for i in 0..c.len() {
                let gap = c.alpha_values[i] + beta.value - c.c_samples[i] * rho;
                assert!(gap >= -1e-6, "{p}/{q} at c = {}: {gap}", c.c_samples[i]);
            }
        }
    }
}

#[test]
fn pendulum_fixed_points_minimize() {
    let e = load("pendulum", &parse_params("t0=0.1").unwrap()).unwrap();
    let b = beta_oracle(e.generating(), 0, 1, 8, 3).unwrap();
    assert!((b.value + 0.1).abs() < 1e-12);
    let mut pts = b.mather_points();
    pts.sort_by(f64::total_cmp);
    assert_eq!(pts.len(), 2);
    assert!(pts[0].abs() < 1e-9 && (pts[1] - 0.5).abs() < 1e-9, "{pts:?}");
}
