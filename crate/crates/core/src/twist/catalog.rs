//! Built-in maps with closed-form generating functions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::generating::{validate, GeneratingFunction, GeneratingReport};
use super::map::TwistMap;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

/// `S(x, y) = (y - x)^2 / 2`, generating `(θ, r) ↦ (θ + r, r)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integrable;

impl GeneratingFunction for Integrable {
    fn eval(&self, x: f64, y: f64) -> f64 {
        0.5 * (y - x) * (y - x)
    }
    fn d1(&self, x: f64, y: f64) -> f64 {
        x - y
    }
    fn d2(&self, x: f64, y: f64) -> f64 {
        y - x
    }
    fn d11(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn d12(&self, _: f64, _: f64) -> f64 {
        -1.0
    }
    fn d22(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn superlinearity_bound(&self, m: f64) -> f64 {
        2.0 * m.max(0.0)
    }
}

/// Quadrature used for the potential along each sub-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Potential at the start of the sub-step (symplectic Euler).
    #[default]
    Euler,
    /// Potential averaged over both ends (Störmer–Verlet).
    Verlet,
}

/// Discrete Lagrangian of the double pendulum `H = p²/2 + cos(4πθ)`.
///
/// With `substeps = 1` and the Euler scheme this is
/// `S(x, y) = (y - x)²/(2 t0) - t0 cos(4πx)`. For `substeps = m > 1` the step
/// is split into `m` sub-steps of length `t0 / m` and the intermediate points
/// are minimized out, which generates the `m`-fold composition and approaches
/// the time-`t0` flow map as `m` grows.
#[derive(Debug, Clone, Copy)]
pub struct Pendulum {
    pub t0: f64,
    pub substeps: usize,
    pub scheme: Scheme,
}

impl Pendulum {
    pub fn new(t0: f64, substeps: usize) -> Self {
        Self {
            t0,
            substeps: substeps.max(1),
            scheme: Scheme::Euler,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn h(&self) -> f64 {
        self.t0 / self.substeps as f64
    }

    /// Potential weights of the first and last chain points.
    fn end_weights(&self) -> (f64, f64) {
        match self.scheme {
            Scheme::Euler => (1.0, 0.0),
            Scheme::Verlet => (0.5, 0.5),
        }
    }

    fn interior_hessian(&self, z: &[f64]) -> Vec<f64> {
        let h = self.h();
        z[1..z.len() - 1]
            .iter()
            .map(|&zk| 2.0 / h + FOUR_PI * FOUR_PI * h * (FOUR_PI * zk).cos())
            .collect()
    }

    /// Minimizes the interior points of the sub-stepped chain from `x` to `y`.
    /// Returns the full chain `z_0 = x, ..., z_m = y`.
    fn chain(&self, x: f64, y: f64) -> Vec<f64> {
        let m = self.substeps;
        let h = self.h();
        let mut z: Vec<f64> = (0..=m).map(|k| x + (y - x) * k as f64 / m as f64).collect();
        if m == 1 {
            return z;
        }
        let mut grad = vec![0.0; m - 1];
        let mut step = vec![0.0; m - 1];
        for _ in 0..50 {
            let mut gnorm: f64 = 0.0;
            for k in 1..m {
                grad[k - 1] =
                    (2.0 * z[k] - z[k - 1] - z[k + 1]) / h + FOUR_PI * h * (FOUR_PI * z[k]).sin();
                gnorm = gnorm.max(grad[k - 1].abs());
            }
            if gnorm < 1e-13 {
                break;
            }
            let diag = self.interior_hessian(&z);
            solve_tridiagonal_const_off(&diag, -1.0 / h, &grad, &mut step);
            for k in 1..m {
                z[k] -= step[k - 1];
            }
            if gnorm < 1e-9 {
                // the quadratic step just taken is already below roundoff
                break;
            }
        }
        z
    }

    /// Entries `(J⁻¹)_{11}`, `(J⁻¹)_{mm}` and `(J⁻¹)_{1m}` of the inverse
    /// interior Hessian along an optimal chain.
    fn inverse_corners(&self, z: &[f64]) -> (f64, f64, f64) {
        let inner = self.substeps - 1;
        let diag = self.interior_hessian(z);
        let off = -1.0 / self.h();
        let mut e = vec![0.0; inner];
        let mut col = vec![0.0; inner];
        e[0] = 1.0;
        solve_tridiagonal_const_off(&diag, off, &e, &mut col);
        let first = col[0];
        let corner = col[inner - 1];
        e[0] = 0.0;
        e[inner - 1] = 1.0;
        solve_tridiagonal_const_off(&diag, off, &e, &mut col);
        (first, col[inner - 1], corner)
    }

    fn action(&self, z: &[f64]) -> f64 {
        let h = self.h();
        let (w0, wm) = self.end_weights();
        let m = self.substeps;
        let kinetic: f64 = z.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>() / (2.0 * h);
        let potential: f64 = z
            .iter()
            .enumerate()
            .map(|(k, &zk)| {
                let w = if k == 0 {
                    w0
                } else if k == m {
                    wm
                } else {
                    1.0
                };
                w * (FOUR_PI * zk).cos()
            })
            .sum();
        kinetic - h * potential
    }
}

/// Solves `A s = rhs` for symmetric tridiagonal `A` with constant off-diagonal.
fn solve_tridiagonal_const_off(diag: &[f64], off: f64, rhs: &[f64], out: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
}

impl GeneratingFunction for Pendulum {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.action(&self.chain(x, y))
    }
    fn d1(&self, x: f64, y: f64) -> f64 {
        let h = self.h();
        let z1 = if self.substeps == 1 { y } else { self.chain(x, y)[1] };
        -(z1 - x) / h + self.end_weights().0 * FOUR_PI * h * (FOUR_PI * x).sin()
    }
    fn d2(&self, x: f64, y: f64) -> f64 {
        let h = self.h();
        let zl = if self.substeps == 1 {
            x
        } else {
            self.chain(x, y)[self.substeps - 1]
        };
        (y - zl) / h + self.end_weights().1 * FOUR_PI * h * (FOUR_PI * y).sin()
    }
    fn d11(&self, x: f64, y: f64) -> f64 {
        let h = self.h();
        let base = 1.0 / h + self.end_weights().0 * FOUR_PI * FOUR_PI * h * (FOUR_PI * x).cos();
        if self.substeps == 1 {
            return base;
        }
        let (first, _, _) = self.inverse_corners(&self.chain(x, y));
        base - first / (h * h)
    }
    fn d12(&self, x: f64, y: f64) -> f64 {
        let h = self.h();
        if self.substeps == 1 {
            return -1.0 / h;
        }
        let (_, _, corner) = self.inverse_corners(&self.chain(x, y));
        -corner / (h * h)
    }
    fn d22(&self, x: f64, y: f64) -> f64 {
        let h = self.h();
        let base = 1.0 / h + self.end_weights().1 * FOUR_PI * FOUR_PI * h * (FOUR_PI * y).cos();
        if self.substeps == 1 {
            return base;
        }
        let (_, last, _) = self.inverse_corners(&self.chain(x, y));
        base - last / (h * h)
    }
    fn eval_d1_d11(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let h = self.h();
        let w0 = self.end_weights().0;
        let z = self.chain(x, y);
        let s = self.action(&z);
        let d1 = -(z[1] - x) / h + w0 * FOUR_PI * h * (FOUR_PI * x).sin();
        let mut d11 = 1.0 / h + w0 * FOUR_PI * FOUR_PI * h * (FOUR_PI * x).cos();
        if self.substeps > 1 {
            d11 -= self.inverse_corners(&z).0 / (h * h);
        }
        (s, d1, d11)
    }
    fn superlinearity_bound(&self, m: f64) -> f64 {
        // S >= d²/(2 t0) - t0
        let m = m.max(0.0);
        self.t0 * (m + (m * m + 2.0).sqrt())
    }
}

/// The standard family `S(x, y) = (y - x)²/2 + (k / 4π²) cos(2πx)`.
#[derive(Debug, Clone, Copy)]
pub struct Standard {
    pub k: f64,
}

impl GeneratingFunction for Standard {
    fn eval(&self, x: f64, y: f64) -> f64 {
        0.5 * (y - x) * (y - x) + self.k / (TWO_PI * TWO_PI) * (TWO_PI * x).cos()
    }
    fn d1(&self, x: f64, y: f64) -> f64 {
        x - y - self.k / TWO_PI * (TWO_PI * x).sin()
    }
    fn d2(&self, x: f64, y: f64) -> f64 {
        y - x
    }
    fn d11(&self, x: f64, _: f64) -> f64 {
        1.0 - self.k * (TWO_PI * x).cos()
    }
    fn d12(&self, _: f64, _: f64) -> f64 {
        -1.0
    }
    fn d22(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn superlinearity_bound(&self, m: f64) -> f64 {
        let m = m.max(0.0);
        let a = self.k.abs() / (TWO_PI * TWO_PI);
        m + (m * m + 2.0 * a).sqrt()
    }
}

/// The integrable map conjugated by `H(θ, r) = (h(θ), r / h'(θ))` with
/// `h(t) = t + ε sin²(πt)`. Its generating function is
/// `S(x, y) = (g(y) - g(x))² / 2` where `g` is the lift of `h⁻¹`.
#[derive(Debug, Clone, Copy)]
pub struct Conjugated {
    pub eps: f64,
}

impl Conjugated {
    /// `d(t) = ε sin²(πt)`.
    pub fn d(&self, t: f64) -> f64 {
        let s = (PI * t).sin();
        self.eps * s * s
    }

    pub fn h(&self, t: f64) -> f64 {
        t + self.d(t)
    }

    fn h_prime(&self, t: f64) -> f64 {
        1.0 + self.eps * PI * (TWO_PI * t).sin()
    }

    fn h_second(&self, t: f64) -> f64 {
        self.eps * TWO_PI * PI * (TWO_PI * t).cos()
    }

    /// Lift of `h⁻¹`, by Newton from `t`.
    pub fn g(&self, t: f64) -> f64 {
        let mut s = t;
        for _ in 0..60 {
            let f = self.h(s) - t;
            let step = f / self.h_prime(s);
            s -= step;
            if step.abs() < 1e-16 * (1.0 + t.abs()) {
                break;
            }
        }
        s
    }

    fn g_prime(&self, t: f64) -> f64 {
        1.0 / self.h_prime(self.g(t))
    }

    fn g_second(&self, t: f64) -> f64 {
        let s = self.g(t);
        let hp = self.h_prime(s);
        -self.h_second(s) / (hp * hp * hp)
    }
}

impl GeneratingFunction for Conjugated {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let d = self.g(y) - self.g(x);
        0.5 * d * d
    }
    fn d1(&self, x: f64, y: f64) -> f64 {
        -(self.g(y) - self.g(x)) * self.g_prime(x)
    }
    fn d2(&self, x: f64, y: f64) -> f64 {
        (self.g(y) - self.g(x)) * self.g_prime(y)
    }
    fn d11(&self, x: f64, y: f64) -> f64 {
        let gp = self.g_prime(x);
        gp * gp - (self.g(y) - self.g(x)) * self.g_second(x)
    }
    fn d12(&self, x: f64, y: f64) -> f64 {
        -self.g_prime(x) * self.g_prime(y)
    }
    fn d22(&self, x: f64, y: f64) -> f64 {
        let gp = self.g_prime(y);
        gp * gp + (self.g(y) - self.g(x)) * self.g_second(y)
    }
    fn superlinearity_bound(&self, m: f64) -> f64 {
        let k = 1.0 + self.eps.abs() * PI;
        2.0 * m.max(0.0) * k * k
    }
}

/// `-S` for a wrapped generating function: flips the twist sign. Only used as
/// a negative control for the invariant checks.
#[derive(Debug, Clone)]
pub struct Negated(pub Arc<dyn GeneratingFunction>);

impl GeneratingFunction for Negated {
    fn eval(&self, x: f64, y: f64) -> f64 {
        -self.0.eval(x, y)
    }
    fn d1(&self, x: f64, y: f64) -> f64 {
        -self.0.d1(x, y)
    }
    fn d2(&self, x: f64, y: f64) -> f64 {
        -self.0.d2(x, y)
    }
    fn d11(&self, x: f64, y: f64) -> f64 {
        -self.0.d11(x, y)
    }
    fn d12(&self, x: f64, y: f64) -> f64 {
        -self.0.d12(x, y)
    }
    fn d22(&self, x: f64, y: f64) -> f64 {
        -self.0.d22(x, y)
    }
    fn superlinearity_bound(&self, m: f64) -> f64 {
        self.0.superlinearity_bound(m)
    }
}

/// Closed-form data attached to a catalog entry for use as a test oracle.
#[derive(Debug, Clone, Copy)]
pub enum AnalyticTruth {
    /// `α(c) = c²/2`, `u_c ≡ 0`, `ρ(c) = c`.
    Integrable,
    /// `α(c) = c²/2`, `u_c = -c·d∘h⁻¹`, `ρ(c) = c`, `h_c = h⁻¹`.
    Conjugated(Conjugated),
    /// The fixed points `θ = 0, 1/2` and `α(0) = t0`; separatrix `√(2 - 2cos 4πθ)`.
    Pendulum { t0: f64 },
}

impl AnalyticTruth {
    pub fn alpha(&self, c: f64) -> Option<f64> {
        match self {
            AnalyticTruth::Integrable | AnalyticTruth::Conjugated(_) => Some(0.5 * c * c),
            AnalyticTruth::Pendulum { t0 } if c == 0.0 => Some(*t0),
            AnalyticTruth::Pendulum { .. } => None,
        }
    }

    /// `u_c(θ)` normalized by `u_c(0) = 0`, when known in closed form.
    pub fn u(&self, c: f64, theta: f64) -> Option<f64> {
        match self {
            AnalyticTruth::Integrable => Some(0.0),
            AnalyticTruth::Conjugated(m) => {
                let t = crate::circle::wrap(theta);
                Some(-c * (t - m.g(t)))
            }
            AnalyticTruth::Pendulum { .. } => None,
        }
    }

    pub fn rho(&self, c: f64) -> Option<f64> {
        match self {
            AnalyticTruth::Integrable | AnalyticTruth::Conjugated(_) => Some(c),
            AnalyticTruth::Pendulum { .. } => None,
        }
    }
}

/// Upper separatrix `s⁺(θ) = √(2 - 2 cos 4πθ)` of the double pendulum.
pub fn pendulum_separatrix(theta: f64) -> f64 {
    (2.0 - 2.0 * (FOUR_PI * theta).cos()).max(0.0).sqrt()
}

/// Closed form of `∫₀¹ √(2 - 2cos 4πθ) dθ = 4/π`.
pub const PENDULUM_PLATEAU_HALF_WIDTH: f64 = 4.0 / PI;

/// Key-value parameters of a catalog entry, e.g. `t0=0.1`.
pub type MapParams = BTreeMap<String, String>;

fn param(params: &MapParams, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.trim().parse::<f64>().map_err(|e| Error::InvalidParameter {
            key: key.to_string(),
            reason: e.to_string(),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct MapCatalogEntry {
    pub name: String,
    pub params: MapParams,
    pub map: TwistMap,
    pub analytic_truth: Option<AnalyticTruth>,
    pub report: GeneratingReport,
}

impl MapCatalogEntry {
    pub fn generating(&self) -> &dyn GeneratingFunction {
        self.map.generating()
    }
}

pub const CATALOG_NAMES: [&str; 4] = ["integrable", "pendulum", "standard", "conjugated"];

/// Builds a catalog entry and checks the generating-function invariants.
///
/// Recognized parameters: `t0`, `substeps`, `scheme` (pendulum), `k` (standard), `eps`
/// (conjugated) and `corrupt=twist`, which negates the action.
pub fn load(name: &str, params: &MapParams) -> Result<MapCatalogEntry> {
    let entry = load_unchecked(name, params)?;
    validate(entry.generating())?;
    Ok(entry)
}

/// Builds a catalog entry without rejecting it; the report still records the
/// invariant checks.
pub fn load_unchecked(name: &str, params: &MapParams) -> Result<MapCatalogEntry> {
    let (gf, truth): (Arc<dyn GeneratingFunction>, Option<AnalyticTruth>) = match name {
        "integrable" => (Arc::new(Integrable), Some(AnalyticTruth::Integrable)),
        "pendulum" => {
            let t0 = param(params, "t0", 0.1)?;
            let substeps = param(params, "substeps", 1.0)?;
            if !(t0 > 0.0 && t0 < 0.25) {
                return Err(Error::InvalidParameter {
                    key: "t0".into(),
                    reason: "must lie in (0, 0.25)".into(),
                });
            }
            if substeps < 1.0 || substeps.fract() != 0.0 {
                return Err(Error::InvalidParameter {
                    key: "substeps".into(),
                    reason: "must be a positive integer".into(),
                });
            }
            let scheme = match params.get("scheme").map(String::as_str) {
                None | Some("euler") => Scheme::Euler,
                Some("verlet") => Scheme::Verlet,
                Some(other) => {
                    return Err(Error::InvalidParameter {
                        key: "scheme".into(),
                        reason: format!("expected euler or verlet, got `{other}`"),
                    })
                }
            };
            (
                Arc::new(Pendulum::new(t0, substeps as usize).with_scheme(scheme)),
                Some(AnalyticTruth::Pendulum { t0 }),
            )
        }
        "standard" => {
            let k = param(params, "k", 0.6)?;
            (Arc::new(Standard { k }), None)
        }
        "conjugated" => {
            let eps = param(params, "eps", 0.1)?;
            if eps.abs() * PI >= 1.0 {
                return Err(Error::InvalidParameter {
                    key: "eps".into(),
                    reason: "h must be a diffeomorphism (|eps| < 1/π)".into(),
                });
            }
            let m = Conjugated { eps };
            (Arc::new(m), Some(AnalyticTruth::Conjugated(m)))
        }
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    let (gf, truth) = match params.get("corrupt").map(String::as_str) {
        None | Some("none") => (gf, truth),
        Some("twist") => (Arc::new(Negated(gf)) as Arc<dyn GeneratingFunction>, None),
        Some(other) => {
            return Err(Error::InvalidParameter {
                key: "corrupt".into(),
                reason: format!("unknown corruption `{other}`"),
            })
        }
    };
    let report = super::generating::inspect(gf.as_ref());
    Ok(MapCatalogEntry {
        name: name.to_string(),
        params: params.clone(),
        map: TwistMap::new(gf),
        analytic_truth: truth,
        report,
    })
}

/// Parses `key=value` pairs separated by commas or whitespace.
pub fn parse_params(spec: &str) -> Result<MapParams> {
    let mut out = MapParams::new();
    for item in spec
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|s| !s.is_empty())
    {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::InvalidParameter {
            key: item.to_string(),
            reason: "expected key=value".into(),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrable_eval() {
        assert_eq!(Integrable.eval(0.0, 0.5), 0.125);
    }

    #[test]
    fn pendulum_eval_at_origin() {
        let p = Pendulum::new(0.1, 1);
        assert!((p.eval(0.0, 0.0) + 0.1).abs() < 1e-15);
        // constant chain sits on the fixed point for any number of sub-steps
        let p8 = Pendulum::new(0.1, 8);
        assert!((p8.eval(0.0, 0.0) + 0.1).abs() < 1e-14);
    }

    #[test]
    fn substepped_pendulum_partials_match_finite_differences() {
        let p = Pendulum::new(0.1, 6);
        for &(x, y) in &[(0.13, 0.21), (0.4, 0.3), (0.77, 1.05)] {
            let e = 1e-6;
            let fd11 = (p.d1(x + e, y) - p.d1(x - e, y)) / (2.0 * e);
            let fd12 = (p.d1(x, y + e) - p.d1(x, y - e)) / (2.0 * e);
            let fd22 = (p.d2(x, y + e) - p.d2(x, y - e)) / (2.0 * e);
            assert!((fd11 - p.d11(x, y)).abs() < 1e-5 * (1.0 + fd11.abs()));
            assert!((fd12 - p.d12(x, y)).abs() < 1e-5 * (1.0 + fd12.abs()));
            assert!((fd22 - p.d22(x, y)).abs() < 1e-5 * (1.0 + fd22.abs()));
        }
    }

    #[test]
    fn verlet_partials_match_finite_differences() {
        let p = Pendulum::new(0.1, 4).with_scheme(Scheme::Verlet);
        for &(x, y) in &[(0.13, 0.21), (0.4, 0.3)] {
            let e = 1e-6;
            let fd1 = (p.eval(x + e, y) - p.eval(x - e, y)) / (2.0 * e);
            let fd2 = (p.eval(x, y + e) - p.eval(x, y - e)) / (2.0 * e);
            assert!((fd1 - p.d1(x, y)).abs() < 1e-6);
            assert!((fd2 - p.d2(x, y)).abs() < 1e-6);
            let fd11 = (p.d1(x + e, y) - p.d1(x - e, y)) / (2.0 * e);
            assert!((fd11 - p.d11(x, y)).abs() < 1e-5 * (1.0 + fd11.abs()));
            let (s, d1, d11) = p.eval_d1_d11(x, y);
            assert_eq!((s, d1, d11), (p.eval(x, y), p.d1(x, y), p.d11(x, y)));
        }
    }

    #[test]
    fn conjugacy_inverse() {
        let m = Conjugated { eps: 0.1 };
        for i in 0..20 {
            let t = -1.0 + 0.137 * i as f64;
            assert!((m.h(m.g(t)) - t).abs() < 1e-14);
            assert!((m.g(t + 1.0) - m.g(t) - 1.0).abs() < 1e-13);
        }
        assert_eq!(m.g(0.0), 0.0);
    }

    #[test]
    fn catalog_rejects_unknown_and_corrupt() {
        assert!(matches!(
            load("nope", &MapParams::new()),
            Err(Error::UnknownMap(_))
        ));
        let params = parse_params("corrupt=twist").unwrap();
        assert!(load("integrable", &params).is_err());
        let e = load_unchecked("integrable", &params).unwrap();
        assert!(!e.report.twist());
    }

    #[test]
    fn every_entry_loads() {
        for name in CATALOG_NAMES {
            load(name, &MapParams::new()).unwrap();
        }
        load("pendulum", &parse_params("t0=0.1 substeps=8").unwrap()).unwrap();
    }

    #[test]
    fn params_parse() {
        let p = parse_params("t0=0.05, k=0.9 eps=0.2").unwrap();
        assert_eq!(p["t0"], "0.05");
        assert_eq!(p["k"], "0.9");
        assert!(parse_params("t0").is_err());
    }
}
