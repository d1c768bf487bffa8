//! The Liouville change of variables `y(z) = ∫₀^z √(ε μ)` and the
//! Schrödinger potentials of the transformed mode operators.
//!
//! Everything is evaluated through the `z` chart: for a point `y` the preimage
//! `z(y)` is found first and the closed-form derivatives of ε and μ are pushed
//! through the chain rule. No derivative is ever formed by differencing.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profile::{Classification, CoefficientProfile};
use crate::quadrature::ChebAntiderivative;

/// Absolute accuracy of the stored forward map.
pub const MAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Chart {
    /// Antiderivative on a window containing the non-constant part of the
    /// coefficients, continued linearly with slope `√(ε*μ*)` outside.
    Stabilizing { f: ChebAntiderivative, origin: f64, slope: f64 },
    /// Antiderivative over one period `[0, a]`, continued by `y(z + a) = y(z) + b`.
    Periodic { f: ChebAntiderivative, a: f64, b: f64 },
}

/// The transform data for one coefficient profile.
#[derive(Debug, Clone)]
pub struct LiouvilleData {
    profile: CoefficientProfile,
    chart: Chart,
}

impl LiouvilleData {
    /// Builds the transform. `window` is a `z` interval the caller intends to
    /// work on; it is ignored for periodic profiles and widened to cover the
    /// non-constant part of a stabilizing profile.
    pub fn build(profile: &CoefficientProfile, window: Option<(f64, f64)>) -> Result<Self> {
        if let Some((lo, hi)) = window {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Window(format!("degenerate window [{lo}, {hi}]")));
            }
        }
        let p = profile.clone();
        let s = move |z: f64| (p.epsilon.eval(z, 0) * p.mu.eval(z, 0)).sqrt();
        let chart = match profile.classification {
            Classification::Periodic { period } => {
                let f = ChebAntiderivative::build(&s, 0.0, period, MAP_TOLERANCE)?;
                let b = f.total();
                Chart::Periodic { f, a: period, b }
            }
            Classification::Stabilizing { eps_inf, mu_inf } => {
                let (mut lo, mut hi) = profile.structure_window();
                if let Some((wl, wh)) = window {
                    lo = lo.min(wl);
                    hi = hi.max(wh);
                }
                lo = lo.min(-1.0);
                hi = hi.max(1.0);
                let f = ChebAntiderivative::build(&s, lo, hi, MAP_TOLERANCE)?;
                let origin = f.eval(0.0);
                Chart::Stabilizing {
                    f,
                    origin,
                    slope: (eps_inf * mu_inf).sqrt(),
                }
            }
        };
        Ok(LiouvilleData {
            profile: profile.clone(),
            chart,
        })
    }

    pub fn profile(&self) -> &CoefficientProfile {
        &self.profile
    }

    /// The same transform for the profile with ε and μ exchanged. The map
    /// `y(z)` depends on εμ only and is shared.
    pub fn swapped(&self) -> Self {
        LiouvilleData {
            profile: self.profile.swapped(),
            chart: self.chart.clone(),
        }
    }

    /// `b = ∫₀ᵃ √(εμ)` for periodic profiles.
    pub fn period_b(&self) -> Option<f64> {
        match &self.chart {
            Chart::Periodic { b, .. } => Some(*b),
            Chart::Stabilizing { .. } => None,
        }
    }

    /// `dy/dz = √(ε(z) μ(z))`.
    pub fn dy_dz(&self, z: f64) -> f64 {
        (self.profile.epsilon.eval(z, 0) * self.profile.mu.eval(z, 0)).sqrt()
    }

    pub fn y_of_z(&self, z: f64) -> f64 {
        match &self.chart {
            Chart::Stabilizing { f, origin, slope } => {
                let (lo, hi) = f.domain();
                if z < lo {
                    f.eval(lo) - origin - slope * (lo - z)
                } else if z > hi {
                    f.eval(hi) - origin + slope * (z - hi)
                } else {
                    f.eval(z) - origin
                }
            }
            Chart::Periodic { f, a, b } => {
                let m = (z / a).floor();
                m * b + f.eval(z - m * a)
            }
        }
    }

    pub fn z_of_y(&self, y: f64) -> f64 {
        let s = |z: f64| self.dy_dz(z);
        match &self.chart {
            Chart::Stabilizing { f, origin, slope } => {
                let (lo, hi) = f.domain();
                let (ylo, yhi) = (f.eval(lo) - origin, f.eval(hi) - origin);
                if y < ylo {
                    lo - (ylo - y) / slope
                } else if y > yhi {
                    hi + (y - yhi) / slope
                } else {
                    f.invert(y + origin, s)
                }
            }
            Chart::Periodic { f, a, b } => {
                let m = (y / b).floor();
                m * a + f.invert(y - m * b, s)
            }
        }
    }

    /// `[ε̃, ε̃', ε̃'']` at `y`, derivatives taken in `y`.
    pub fn eps_tilde(&self, y: f64) -> [f64; 3] {
        let z = self.z_of_y(y);
        let e = self.profile.eps_jet(z);
        let m = self.profile.mu_jet(z);
        transported(e, m)
    }

    /// `[μ̃, μ̃', μ̃'']` at `y`.
    pub fn mu_tilde(&self, y: f64) -> [f64; 3] {
        let z = self.z_of_y(y);
        let e = self.profile.eps_jet(z);
        let m = self.profile.mu_jet(z);
        transported(m, e)
    }

    /// `ν(y) = ε̃^{1/4} μ̃^{-1/4}`.
    pub fn nu(&self, y: f64) -> f64 {
        let z = self.z_of_y(y);
        (self.profile.epsilon.eval(z, 0) / self.profile.mu.eval(z, 0)).powf(0.25)
    }

    /// `η(y) = ν'/ν = ¼(ε̃'/ε̃ − μ̃'/μ̃)`.
    pub fn eta(&self, y: f64) -> f64 {
        self.gauge_z(self.z_of_y(y)).eta
    }

    /// `dη/dy`.
    pub fn eta_prime(&self, y: f64) -> f64 {
        self.gauge_z(self.z_of_y(y)).eta_prime
    }

    /// η, η' and `1/(εμ)` at the point with axial coordinate `z`.
    pub fn gauge_z(&self, z: f64) -> Gauge {
        let [e, e1, e2] = self.profile.eps_jet(z);
        let [m, m1, m2] = self.profile.mu_jet(z);
        let em = e * m;
        let s = em.sqrt();
        let ds = (e1 * m + e * m1) / (2.0 * s);
        let g = 0.25 * (e1 / e - m1 / m);
        let dg = 0.25 * ((e2 / e - m2 / m) - ((e1 / e).powi(2) - (m1 / m).powi(2)));
        let eta = g / s;
        let deta_dz = dg / s - g * ds / em;
        Gauge {
            eta,
            eta_prime: deta_dz / s,
            inv_eps_mu: 1.0 / em,
        }
    }
}

/// Chain rule for `f̃(y) = f(z(y))` where `dy/dz = √(f g)`.
fn transported(f: [f64; 3], g: [f64; 3]) -> [f64; 3] {
    let [f0, f1, f2] = f;
    let [g0, g1, _] = g;
    let fg = f0 * g0;
    let s = fg.sqrt();
    [
        f0,
        f1 / s,
        f2 / fg - f1 * f1 / (2.0 * f0 * f0 * g0) - f1 * g1 / (2.0 * f0 * g0 * g0),
    ]
}

/// Gauge quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gauge {
    pub eta: f64,
    pub eta_prime: f64,
    pub inv_eps_mu: f64,
}

/// Which decomposed operator a potential belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "flavor", content = "index", rename_all = "snake_case")]
pub enum Flavor {
    /// `A_k^el` with Dirichlet eigenvalue `λ_k` (1-based `k`).
    Electric(usize),
    /// `A_l^m` with Neumann eigenvalue `κ_l` (1-based `l ≥ 2`).
    Magnetic(usize),
    /// `A⁰`, present for multiply connected cross-sections.
    Zero,
    /// A potential given directly in the `y` variable.
    External,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Electric(k) => write!(f, "el{k}"),
            Flavor::Magnetic(l) => write!(f, "m{l}"),
            Flavor::Zero => write!(f, "zero"),
            Flavor::External => write!(f, "external"),
        }
    }
}

type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// `η² − η' + c/(ε̃μ̃)` from a transform (already swapped for magnetic modes).
    Transform(Arc<LiouvilleData>),
    Analytic { v: PotentialFn, period: Option<f64> },
}

/// `V(y)` of one mode operator `−d²/dy² + V`.
#[derive(Clone)]
pub struct ModePotential {
    pub flavor: Flavor,
    pub mode_constant: f64,
    /// `c/(ε*μ*)`; `None` for periodic potentials.
    pub threshold: Option<f64>,
    /// `c / sup(εμ)`.
    pub lower_bound: f64,
    shape: Shape,
}

impl fmt::Debug for ModePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModePotential")
            .field("flavor", &self.flavor)
            .field("mode_constant", &self.mode_constant)
            .field("threshold", &self.threshold)
            .field("lower_bound", &self.lower_bound)
            .field("period", &self.period())
            .finish()
    }
}

/// Potential of the mode `flavor` with constant `mode_constant` (λ_k, κ_l or 0).
/// `n_boundary` is the number of boundary components of the cross-section.
pub fn build_potential(
    data: &Arc<LiouvilleData>,
    flavor: Flavor,
    mode_constant: f64,
    n_boundary: usize,
) -> Result<ModePotential> {
    if !(mode_constant.is_finite() && mode_constant >= 0.0) {
        return Err(invalid(format!("mode constant must be nonnegative, got {mode_constant}")));
    }
    let data = match flavor {
        Flavor::Electric(_) | Flavor::Magnetic(_) if mode_constant == 0.0 => {
            return Err(invalid(format!("mode {flavor} needs a positive mode constant")));
        }
        Flavor::Electric(_) => data.clone(),
        Flavor::Magnetic(_) => Arc::new(data.swapped()),
        Flavor::Zero => {
            if n_boundary < 2 {
                return Err(Error::Topology(
                    "the zero branch exists only for cross-sections with at least two boundary components".into(),
                ));
            }
            if mode_constant != 0.0 {
                return Err(invalid("the zero branch has mode constant 0"));
            }
            data.clone()
        }
        Flavor::External => return Err(invalid("external potentials are built with ModePotential::analytic")),
    };
    let bounds = data.profile().essential_bounds();
    let threshold = data.profile().limits().map(|(e, m)| mode_constant / (e * m));
    Ok(ModePotential {
        flavor,
        mode_constant,
        threshold,
        lower_bound: mode_constant / bounds.sup_eps_mu,
        shape: Shape::Transform(data),
    })
}

impl ModePotential {
    /// A potential given in closed form in `y`. Exactly one of `threshold`
    /// (decaying case) and `period` should be set.
    pub fn analytic(
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        threshold: Option<f64>,
        period: Option<f64>,
        lower_bound: f64,
    ) -> Self {
        ModePotential {
            flavor: Flavor::External,
            mode_constant: 0.0,
            threshold,
            lower_bound,
            shape: Shape::Analytic {
                v: Arc::new(v),
                period,
            },
        }
    }

    /// Period in `y` for periodic potentials.
    pub fn period(&self) -> Option<f64> {
        match &self.shape {
            Shape::Transform(d) => d.period_b(),
            Shape::Analytic { period, .. } => *period,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.period().is_some()
    }

    pub fn transform(&self) -> Option<&Arc<LiouvilleData>> {
        match &self.shape {
            Shape::Transform(d) => Some(d),
            Shape::Analytic { .. } => None,
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        match &self.shape {
            Shape::Transform(d) => self.value_z(d.z_of_y(y)),
            Shape::Analytic { v, .. } => v(y),
        }
    }

    /// `V` at the point with axial coordinate `z`. For analytic potentials the
    /// chart is the identity.
    pub fn value_z(&self, z: f64) -> f64 {
        match &self.shape {
            Shape::Transform(d) => {
                let g = d.gauge_z(z);
                g.eta * g.eta - g.eta_prime + self.mode_constant * g.inv_eps_mu
            }
            Shape::Analytic { v, .. } => v(z),
        }
    }

    /// `dy/dz` of the chart used by [`ModePotential::value_z`].
    pub fn dy_dz(&self, z: f64) -> f64 {
        match &self.shape {
            Shape::Transform(d) => d.dy_dz(z),
            Shape::Analytic { .. } => 1.0,
        }
    }

    pub fn y_of_z(&self, z: f64) -> f64 {
        match &self.shape {
            Shape::Transform(d) => d.y_of_z(z),
            Shape::Analytic { .. } => z,
        }
    }

    pub fn z_of_y(&self, y: f64) -> f64 {
        match &self.shape {
            Shape::Transform(d) => d.z_of_y(y),
            Shape::Analytic { .. } => y,
        }
    }

    /// Chart period in `z` (the coefficient period, or `b` for analytic potentials).
    pub fn z_period(&self) -> Option<f64> {
        match &self.shape {
            Shape::Transform(d) => d.profile().period(),
            Shape::Analytic { period, .. } => *period,
        }
    }

    /// `(1/b) ∫₀ᵇ V dy` for periodic potentials.
    pub fn mean(&self) -> Option<f64> {
        let b = self.period()?;
        let a = self.z_period()?;
        crate::quadrature::integrate(|z| self.value_z(z) * self.dy_dz(z), 0.0, a, 1e-13)
            .ok()
            .map(|v| v / b)
    }
}
