use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::study::{Sample, Study};
use crate::alpha_rho::{beta_oracle, legendre_lower_bound, PlateauReport};
use crate::alpha_rho::beta::rationals_in;
use crate::circle::circle_dist;
use crate::error::{Error, Result};
use crate::lax_oleinik::{Discretization, WeakKamSolution};
use crate::orbits::{
    backward_orbit, calibration_residual, crossing_count, grid_tol, rotation_number_of_segment,
    twisted_vertical_minimizers, MatherSet, OrbitSegment,
};
use crate::pseudograph::{
    coincidence_locus, covering_locate, hausdorff_distance, inclusion_defect, pullback_graph_check,
    vertical_order_check, FullPseudograph,
};
use crate::twist::{AnalyticTruth, MapCatalogEntry, TwistMap};

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one property: `measured` is compared against `tolerance` in the
/// direction the property name implies.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub map: String,
    pub params: crate::twist::MapParams,
    pub grid: usize,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn new(entry: &MapCatalogEntry, grid: usize, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            map: entry.name.clone(),
            params: entry.params.clone(),
            grid,
            seed,
            passed: true,
            properties: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn push(&mut self, r: PropertyResult) {
        self.passed &= r.passed;
        self.seconds += r.seconds;
        self.properties.push(r);
    }
}

/// What a property body reports before timing is attached.
pub struct Measured {
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Measured {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `measured > tolerance`.
    pub fn above(measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            passed: measured > tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }
}

/// Runs `body`, turning errors into failed results.
pub fn property(name: &str, body: impl FnOnce() -> Result<Measured>) -> PropertyResult {
    let start = Instant::now();
    let out = body();
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Ok(m) => PropertyResult {
            name: name.to_string(),
            passed: m.passed && m.measured.is_finite(),
            measured: m.measured,
            tolerance: m.tolerance,
            detail: m.detail,
            seconds,
        },
        Err(e) => PropertyResult {
            name: name.to_string(),
            passed: false,
            measured: f64::NAN,
            tolerance: f64::NAN,
            detail: e.to_string(),
            seconds,
        },
    }
}

pub fn generating_invariants(entry: &MapCatalogEntry) -> Measured {
    let r = &entry.report;
    let failures = [r.periodic(), r.twist(), r.superlinear(), r.derivatives_consistent()]
        .iter()
        .filter(|ok| !**ok)
        .count();
    Measured::at_most(
        failures as f64,
        0.0,
        format!(
            "periodic {} twist {} superlinear {} derivatives {}",
            r.periodic(),
            r.twist(),
            r.superlinear(),
            r.derivatives_consistent()
        ),
    )
}

/// `sup |f - g - k|` over the best constant `k`.
pub fn sup_mod_constant(f: &[f64], g: &[f64]) -> f64 {
    let (lo, hi) = f
        .iter()
        .zip(g)
        .map(|(a, b)| a - b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), d| (l.min(d), h.max(d)));
    0.5 * (hi - lo)
}

/// Largest `|α(c) - α_true(c)|` over the solutions.
pub fn alpha_truth(truth: &AnalyticTruth, sols: &[WeakKamSolution], tol: f64) -> Result<Measured> {
    let mut worst: f64 = 0.0;
    for s in sols {
        let a = truth
            .alpha(s.c)
            .ok_or_else(|| Error::Unsupported("no closed-form α".into()))?;
        worst = worst.max((s.alpha - a).abs());
    }
    Ok(Measured::at_most(worst, tol, format!("{} classes", sols.len())))
}

/// Largest `sup |u_c - u_true - k|` divided by its tolerance, where the
/// tolerance is `cells` grid steps times the Lipschitz constant of the true
/// solution (at least `floor`).
pub fn solution_truth(truth: &AnalyticTruth, sols: &[WeakKamSolution], cells: f64, floor: f64) -> Result<Measured> {
    let mut worst_ratio: f64 = 0.0;
    let mut worst = (0.0, 0.0, 0.0);
    for s in sols {
        let nodes = s.grid.nodes();
        let exact = nodes
            .iter()
            .map(|&x| truth.u(s.c, x).ok_or_else(|| Error::Unsupported("no closed-form u".into())))
            .collect::<Result<Vec<_>>>()?;
        let fine = 8 * s.n();
        let lip = (0..fine)
            .map(|i| {
                let (a, b) = (i as f64 / fine as f64, (i + 1) as f64 / fine as f64);
                (truth.u(s.c, b).unwrap_or(0.0) - truth.u(s.c, a).unwrap_or(0.0)).abs() * fine as f64
            })
            .fold(0.0, f64::max);
        let tol = (cells * s.grid.h() * lip).max(floor);
        let err = sup_mod_constant(&s.u, &exact);
        if err / tol > worst_ratio {
            worst_ratio = err / tol;
            worst = (s.c, err, tol);
        }
    }
    Ok(Measured::at_most(
        worst_ratio,
        1.0,
        format!("worst c={} error {:.3e} against {:.3e}", worst.0, worst.1, worst.2),
    ))
}

/// `max (|u_c - u_c'|∞ - |c - c'|)` over random pairs.
pub fn lipschitz_pairs(samples: &[Sample], pairs: usize, rng: &mut impl Rng) -> Result<Measured> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let tol = 2.0 * samples.iter().map(|s| grid_tol(&s.sol)).fold(0.0, f64::max);
    let mut worst = f64::NEG_INFINITY;
    let mut at = (0.0, 0.0);
    for _ in 0..pairs {
        let i = rng.gen_range(0..samples.len());
        let j = (i + rng.gen_range(1..samples.len())) % samples.len();
        let (a, b) = (&samples[i].sol, &samples[j].sol);
        let sup = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let excess = sup - (a.c - b.c).abs();
        if excess > worst {
            worst = excess;
            at = (a.c, b.c);
        }
    }
    Ok(Measured::at_most(worst, tol, format!("{pairs} pairs, worst at ({}, {})", at.0, at.1)))
}

/// Smallest ordering margin over random pairs with `ρ(c) < ρ(c')`.
pub fn ordering_pairs(samples: &[Sample], rho: &[f64], pairs: usize, rng: &mut impl Rng) -> Result<Measured> {
    let mut candidates = Vec::new();
    for i in 0..samples.len() {
        for j in 0..samples.len() {
            if rho[j] - rho[i] > 1e-6 {
                candidates.push((i, j));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no pair with distinct rotation numbers".into()));
    }
    let chosen: Vec<_> = candidates.choose_multiple(rng, pairs).cloned().collect();
    let mut worst = f64::INFINITY;
    let mut at = (0.0, 0.0);
    for &(i, j) in &chosen {
        let rep = vertical_order_check(&samples[i].pg, &samples[j].pg);
        if rep.margin < worst {
            worst = rep.margin;
            at = (samples[i].c(), samples[j].c());
        }
    }
    Ok(Measured::above(
        worst,
        0.0,
        format!("{} pairs, tightest ({}, {})", chosen.len(), at.0, at.1),
    ))
}

/// Locates random points of `[0, 1) × [lo, hi]` on pseudographs, starting
/// from the tightest bracket among `samples` (sorted by `c`).
pub fn covering(
    study: &Study,
    samples: &[Sample],
    points: usize,
    p_range: (f64, f64),
    tol: f64,
    rng: &mut impl Rng,
) -> Result<Measured> {
    let mut worst: f64 = 0.0;
    let mut probes = 0;
    for _ in 0..points {
        let theta: f64 = rng.gen_range(0.0..1.0);
        let r: f64 = rng.gen_range(p_range.0..p_range.1);
        let above = samples.iter().rposition(|s| s.pg.position(theta, r) >= 0.0);
        let below = samples.iter().position(|s| s.pg.position(theta, r) <= 0.0);
        let (lo, hi) = match (above, below) {
            (Some(a), Some(b)) if samples[a].c() <= samples[b].c() => (a, b),
            (Some(a), Some(_)) => (a, a),
            (Some(a), None) => (a, a),
            (None, Some(b)) => (b, b),
            (None, None) => unreachable!("samples are non-empty"),
        };
        let (c_lo, c_hi) = if lo == hi {
            (samples[lo].c() - 0.1, samples[lo].c() + 0.1)
        } else {
            (samples[lo].c(), samples[hi].c())
        };
        let res = covering_locate(
            |c| {
                let near = samples
                    .iter()
                    .min_by(|a, b| (a.c() - c).abs().total_cmp(&(b.c() - c).abs()))
                    .map(|s| &s.sol);
                study.solution(c, near).map(|s| Sample::new(s).pg)
            },
            theta,
            r,
            (c_lo, c_hi),
            tol,
        )?;
        probes += res.probes;
        worst = worst.max(res.distance);
    }
    Ok(Measured::at_most(worst, tol, format!("{points} points, {probes} solves")))
}

/// Count of classes where `d_H(PG(c), PG(c + δ))` fails to decrease as `δ`
/// runs through `deltas` (largest first).
pub fn hausdorff_monotone(study: &Study, cs: &[f64], deltas: &[f64]) -> Result<Measured> {
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut note = String::new();
    for &c in cs {
        let base = Sample::new(study.solution(c, None)?);
        let d = deltas
            .iter()
            .map(|&dl| Ok(hausdorff_distance(&base.pg, &Sample::new(study.solution(c + dl, Some(&base.sol))?).pg)))
            .collect::<Result<Vec<_>>>()?;
        let ok = d.windows(2).all(|w| w[1] < w[0]);
        for w in d.windows(2) {
            worst_ratio = worst_ratio.max(w[1] / w[0]);
        }
        if !ok {
            failures += 1;
            if note.is_empty() {
                note = format!(", first failure at c={c}: {d:?}");
            }
        }
    }
    Ok(Measured::at_most(
        failures as f64,
        0.0,
        format!("{} classes, largest ratio {:.3}{note}", cs.len(), worst_ratio),
    ))
}

/// `max |α(c) - max_{p/q} (c p/q - A(p/q))|` over the sampled classes in
/// `range`, with `q <= q_max`.
pub fn legendre(study: &Study, range: (f64, f64), q_max: u64, restarts: usize, seed: u64) -> Result<Measured> {
    let curve = &study.curve;
    let idx: Vec<usize> = (0..curve.len())
        .filter(|&i| (range.0..=range.1).contains(&curve.c_samples[i]))
        .collect();
    if idx.is_empty() {
        return Err(Error::InvalidInput("no sampled class in range".into()));
    }
    let (r_lo, r_hi) = idx
        .iter()
        .map(|&i| curve.rho_values[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)));
    let margin = 1.0 / q_max as f64;
    let values = rationals_in(r_lo - margin, r_hi + margin, q_max)
        .into_iter()
        .map(|(p, q)| {
            beta_oracle(study.disc.generating(), p, q, restarts, seed).map(|b| (p as f64 / q as f64, b.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for &i in &idx {
        let c = curve.c_samples[i];
        let gap = (curve.alpha_values[i] - legendre_lower_bound(&values, c)).abs();
        if gap > worst {
            worst = gap;
            at = c;
        }
    }
    Ok(Measured::at_most(
        worst,
        5e-3,
        format!("{} classes, {} rationals, worst at c={at}", idx.len(), values.len()),
    ))
}

/// One computed backward orbit with the checks made against its solution.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub c: f64,
    pub segment: OrbitSegment,
    /// `max_k |residual_k| / |k|`.
    pub calibration_per_step: f64,
    pub grid_tol: f64,
    pub rotation_bound: f64,
}

/// `count` backward orbits of `steps` steps from random smooth nodes of
/// random samples.
pub fn collect_orbits(
    disc: &Discretization,
    samples: &[Sample],
    count: usize,
    steps: usize,
    rng: &mut impl Rng,
) -> Result<Vec<OrbitRecord>> {
    let gf = disc.generating();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let s = &samples[rng.gen_range(0..samples.len())];
        let i = rng.gen_range(0..s.sol.n());
        if !s.pg.smooth[i] {
            continue;
        }
        let seg = backward_orbit(disc, &s.sol, s.sol.grid.node(i), steps)?;
        let calibration_per_step = calibration_residual(gf, &s.sol, &seg)
            .iter()
            .enumerate()
            .map(|(j, r)| r.abs() / (j + 1) as f64)
            .fold(0.0, f64::max);
        let rot = rotation_number_of_segment(&seg)?;
        out.push(OrbitRecord {
            c: s.c(),
            segment: seg,
            calibration_per_step,
            grid_tol: grid_tol(&s.sol),
            rotation_bound: rot.bound,
        });
    }
    Ok(out)
}

/// Largest calibration residual per step relative to `5 · grid tol`.
pub fn orbit_calibration(orbits: &[OrbitRecord]) -> Measured {
    let worst = orbits
        .iter()
        .map(|o| o.calibration_per_step / (5.0 * o.grid_tol))
        .fold(0.0, f64::max);
    Measured::at_most(worst, 1.0, format!("{} orbits, ratio to 5·grid tol", orbits.len()))
}

pub fn orbit_rotation_bound(orbits: &[OrbitRecord], limit: f64) -> Measured {
    let worst = orbits.iter().map(|o| o.rotation_bound).fold(0.0, f64::max);
    Measured::at_most(worst, limit, format!("{} orbits, sup |θ_k - θ_0 - kρ|", orbits.len()))
}

/// Largest crossing count over all pairs of distinct orbits within each group.
pub fn orbit_crossings(groups: &[&[OrbitRecord]], tol: f64) -> Result<Measured> {
    let mut worst = 0;
    let mut pairs = 0;
    for group in groups {
        let seqs: Vec<Vec<f64>> = group.iter().map(|o| o.segment.thetas()).collect();
        for i in 0..seqs.len() {
            for j in i + 1..seqs.len() {
                let same = seqs[i].iter().zip(&seqs[j]).all(|(a, b)| (a - b).abs() <= tol);
                if same {
                    continue;
                }
                pairs += 1;
                worst = worst.max(crossing_count(&seqs[i], &seqs[j], tol)?);
            }
        }
    }
    Ok(Measured::at_most(worst as f64, 1.0, format!("{pairs} pairs")))
}

/// Largest squeeze violation for the orbits whose class lies strictly inside
/// `plateau`. The end classes are only known to bisection accuracy.
pub fn orbit_squeeze(orbits: &[OrbitRecord], plateau: &PlateauReport, mather: &MatherSet) -> Measured {
    let on: Vec<_> = orbits.iter().filter(|o| plateau.a < o.c && o.c < plateau.b).collect();
    let (worst, tol) = on
        .iter()
        .map(|o| (mather.squeeze_defect(&o.segment), o.grid_tol))
        .fold((0.0, f64::INFINITY), |(w, t), (d, g)| (f64::max(w, d), f64::min(t, g)));
    Measured::at_most(worst, tol, format!("{} orbits on the plateau", on.len()))
}

/// Candidate counts on the twisted vertical: at most two everywhere and
/// exactly two farther than `away` from the Mather points.
pub fn twisted_vertical(
    map: &TwistMap,
    pga: &FullPseudograph,
    pgb: &FullPseudograph,
    mather_points: &[f64],
    thetas: &[f64],
    away: f64,
) -> Result<Measured> {
    let merge = 4.0 / pga.n() as f64;
    let mut bad = 0;
    let mut counts = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let pts = twisted_vertical_minimizers(map, &[pga, pgb], t, merge)?;
        let far = mather_points.iter().all(|&m| circle_dist(m, t) > away);
        if pts.len() > 2 || (far && pts.len() != 2) {
            bad += 1;
        }
        counts.push(pts.len());
    }
    Ok(Measured::at_most(bad as f64, 0.0, format!("counts {counts:?}")))
}

/// Number of pseudographs whose pullback fails to be a graph.
pub fn pullback(map: &TwistMap, samples: &[Sample]) -> Result<Measured> {
    let mut bad = Vec::new();
    let mut worst: f64 = f64::INFINITY;
    for s in samples {
        let rep = pullback_graph_check(map, &s.pg)?;
        worst = worst.min(rep.min_increment / rep.resolution);
        if !rep.is_graph() {
            bad.push(s.c());
        }
    }
    Ok(Measured::at_most(
        bad.len() as f64,
        0.0,
        format!(
            "{} classes, smallest increment {:.3} resolutions, failing {bad:?}",
            samples.len(),
            worst
        ),
    ))
}

/// Thin nodes of `pg` against `PG(a) ∪ PG(b)`.
pub fn plateau_inclusion(pg: &FullPseudograph, pga: &FullPseudograph, pgb: &FullPseudograph, tol: f64) -> Measured {
    Measured::at_most(inclusion_defect(pg, &[pga, pgb]), tol, format!("c = {}", pg.c))
}

/// Largest distance, in grid cells, from the near-coincidence locus of
/// `PG(a)` and `PG(b)` to the Mather points.
pub fn coincidence(
    pga: &FullPseudograph,
    pgb: &FullPseudograph,
    mather_points: &[f64],
    tol: f64,
    cells: f64,
) -> Measured {
    let locus = coincidence_locus(pga, pgb, tol);
    let n = pga.n() as f64;
    let far = locus
        .iter()
        .map(|&x| mather_points.iter().map(|&m| circle_dist(x, m)).fold(f64::INFINITY, f64::min) * n)
        .fold(0.0, f64::max);
    Measured::at_most(far, cells, format!("{} nodes within {tol:.3e}", locus.len()))
}
