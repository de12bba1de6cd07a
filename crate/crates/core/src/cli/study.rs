use rayon::prelude::*;

use crate::alpha_rho::{
    detect_plateaus, refine_plateau, sample_alpha_curve, AlphaCurve, PlateauRefinement, PlateauReport,
    SelectedFamily,
};
use crate::error::Result;
use crate::lax_oleinik::{solve_with, CircleGrid, Discretization, SolveOptions, WeakKamSolution};
use crate::pseudograph::{build_pseudograph, default_gap_tol, FullPseudograph};
use crate::twist::MapCatalogEntry;

/// A map discretized at one grid size, with its sampled `α` curve and the
/// plateaus wide enough to be refined.
pub struct Study {
    pub entry: MapCatalogEntry,
    pub disc: Discretization,
    pub curve: AlphaCurve,
    pub plateaus: Vec<PlateauReport>,
    pub opts: SolveOptions,
}

/// A solution together with its full pseudograph.
#[derive(Debug, Clone)]
pub struct Sample {
    pub sol: WeakKamSolution,
    pub pg: FullPseudograph,
}

impl Sample {
    pub fn new(sol: WeakKamSolution) -> Self {
        let pg = build_pseudograph(&sol, default_gap_tol(&sol));
        Self { sol, pg }
    }

    pub fn c(&self) -> f64 {
        self.sol.c
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StudyConfig {
    pub grid: usize,
    pub range: (f64, f64),
    pub steps: usize,
    pub q_max: u64,
    /// `|ρ - p/q|` below which a sample counts as on the plateau.
    pub flat_tol: f64,
    /// Plateaus spanning fewer sweep steps are left unrefined.
    pub min_plateau_steps: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            grid: 1024,
            range: (-2.0, 2.0),
            steps: 801,
            q_max: 8,
            flat_tol: 1e-4,
            min_plateau_steps: 4,
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn step(&self) -> f64 {
        (self.range.1 - self.range.0) / (self.steps - 1) as f64
    }
}

impl Study {
    pub fn new(entry: MapCatalogEntry, cfg: &StudyConfig) -> Result<Self> {
        let disc = Discretization::new(entry.map.generating_arc(), CircleGrid::new(cfg.grid)?);
        let curve = sample_alpha_curve(&disc, cfg.range, cfg.steps, &SolveOptions::grid_only())?;
        let opts = SolveOptions::default();
        let step = cfg.step();
        let mut plateaus = Vec::new();
        for mut p in detect_plateaus(&curve, cfg.q_max, cfg.flat_tol) {
            if p.width() >= cfg.min_plateau_steps as f64 * step {
                let refine = PlateauRefinement {
                    seed: cfg.seed,
                    ..PlateauRefinement::default()
                };
                refine_plateau(&disc, &mut p, step, &refine, &opts)?;
            }
            plateaus.push(p);
        }
        Ok(Self {
            entry,
            disc,
            curve,
            plateaus,
            opts,
        })
    }

    pub fn family(&self) -> SelectedFamily<'_> {
        SelectedFamily::new(&self.disc, self.plateaus.clone(), self.opts)
    }

    /// The widest refined plateau.
    pub fn main_plateau(&self) -> Option<&PlateauReport> {
        self.plateaus
            .iter()
            .filter(|p| p.u_a.is_some())
            .max_by(|a, b| a.width().total_cmp(&b.width()))
    }

    /// The selected solution at `c`; outside refined plateaus the iteration
    /// starts from `warm` when given.
    pub fn solution(&self, c: f64, warm: Option<&WeakKamSolution>) -> Result<WeakKamSolution> {
        let family = self.family();
        if family.plateau_at(c).is_some() {
            return family.solution(c);
        }
        let mut op = self.disc.operator(c)?;
        solve_with(&mut op, warm.map(|w| w.u.as_slice()), &self.opts)
    }

    /// Selected solutions with pseudographs at every `c`, sorted by `c`.
    pub fn samples(&self, cs: &[f64]) -> Result<Vec<Sample>> {
        let (lo, hi) = cs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
        self.disc.prepare(lo, hi)?;
        let mut out = cs
            .par_iter()
            .map(|&c| self.solution(c, None).map(Sample::new))
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| a.c().total_cmp(&b.c()));
        Ok(out)
    }
}
