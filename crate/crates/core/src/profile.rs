//! Scalar coefficient profiles ε(z), μ(z) with closed-form derivatives.
//!
//! Two structural classes are supported. Stabilizing profiles are built from
//! constants and localized bumps and tend to a positive limit at ±∞; periodic
//! profiles are built from constants and cosines sharing a common period.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smallest admissible lower bound of a coefficient unless configured otherwise.
pub const DEFAULT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    Constant {
        value: f64,
    },
    /// `base + amplitude · exp(−((z − center)/width)²)`
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `base + amplitude · sech²((z − center)/width)`
    Sech2Bump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `mean + amplitude · cos(2πz/period)`
    CosinePeriodic {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    Sum {
        terms: Vec<ProfileFamily>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Constant,
    Localized,
    Periodic,
}

impl ProfileFamily {
    pub fn constant(value: f64) -> Self {
        ProfileFamily::Constant { value }
    }

    pub fn gaussian(base: f64, amplitude: f64, center: f64, width: f64) -> Self {
        ProfileFamily::GaussianBump {
            base,
            amplitude,
            center,
            width,
        }
    }

    pub fn sech2(base: f64, amplitude: f64, center: f64, width: f64) -> Self {
        ProfileFamily::Sech2Bump {
            base,
            amplitude,
            center,
            width,
        }
    }

    pub fn cosine(mean: f64, amplitude: f64, period: f64) -> Self {
        ProfileFamily::CosinePeriodic { mean, amplitude, period }
    }

    /// Value (`order = 0`) or derivative (`order = 1, 2`) at `z`.
    pub fn eval(&self, z: f64, order: u8) -> f64 {
        match self {
            ProfileFamily::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    0.0
                }
            }
            ProfileFamily::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let u = (z - center) / width;
                let g = amplitude * (-u * u).exp();
                match order {
                    0 => base + g,
                    1 => -2.0 * u * g / width,
                    _ => (4.0 * u * u - 2.0) * g / (width * width),
                }
            }
            ProfileFamily::Sech2Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                let u = (z - center) / width;
                let sech2 = sech2(u);
                let th = u.tanh();
                match order {
                    0 => base + amplitude * sech2,
                    1 => -2.0 * amplitude * sech2 * th / width,
                    _ => amplitude * (4.0 * sech2 * th * th - 2.0 * sech2 * sech2) / (width * width),
                }
            }
            ProfileFamily::CosinePeriodic { mean, amplitude, period } => {
                let k = 2.0 * PI / period;
                match order {
                    0 => mean + amplitude * (k * z).cos(),
                    1 => -amplitude * k * (k * z).sin(),
                    _ => -amplitude * k * k * (k * z).cos(),
                }
            }
            ProfileFamily::Sum { terms } => terms.iter().map(|t| t.eval(z, order)).sum(),
        }
    }

    fn class(&self) -> Result<Class> {
        Ok(match self {
            ProfileFamily::Constant { .. } => Class::Constant,
            ProfileFamily::GaussianBump { .. } | ProfileFamily::Sech2Bump { .. } => Class::Localized,
            ProfileFamily::CosinePeriodic { .. } => Class::Periodic,
            ProfileFamily::Sum { terms } => {
                let mut class = Class::Constant;
                for t in terms {
                    match (class, t.class()?) {
                        (_, Class::Constant) => {}
                        (Class::Constant, c) => class = c,
                        (a, b) if a == b => {}
                        _ => return Err(invalid("a sum may not mix localized bumps and periodic terms")),
                    }
                }
                class
            }
        })
    }

    /// Check parameters, ignoring the positivity floor.
    fn check_parameters(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            ProfileFamily::Constant { value } => {
                if !finite(&[*value]) {
                    return Err(invalid("constant must be finite"));
                }
            }
            ProfileFamily::GaussianBump {
                base,
                amplitude,
                center,
                width,
            }
            | ProfileFamily::Sech2Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                if !finite(&[*base, *amplitude, *center, *width]) || *width <= 0.0 {
                    return Err(invalid("bump parameters must be finite with positive width"));
                }
            }
            ProfileFamily::CosinePeriodic { mean, amplitude, period } => {
                if !finite(&[*mean, *amplitude, *period]) || *period <= 0.0 {
                    return Err(invalid("cosine parameters must be finite with positive period"));
                }
            }
            ProfileFamily::Sum { terms } => {
                if terms.is_empty() {
                    return Err(invalid("empty sum"));
                }
                for t in terms {
                    t.check_parameters()?;
                }
            }
        }
        self.class().map(|_| ())
    }

    /// Limit at ±∞ for constant and localized families.
    pub fn limit(&self) -> Option<f64> {
        match self {
            ProfileFamily::Constant { value } => Some(*value),
            ProfileFamily::GaussianBump { base, .. } | ProfileFamily::Sech2Bump { base, .. } => Some(*base),
            ProfileFamily::CosinePeriodic { .. } => None,
            ProfileFamily::Sum { terms } => terms.iter().map(|t| t.limit()).sum(),
        }
    }

    /// Smallest common period of the cosine terms, `None` if there are none.
    pub fn natural_period(&self) -> Option<f64> {
        let mut periods = Vec::new();
        self.collect_periods(&mut periods);
        periods.into_iter().reduce(f64::max)
    }

    fn collect_periods(&self, out: &mut Vec<f64>) {
        match self {
            ProfileFamily::CosinePeriodic { period, .. } => out.push(*period),
            ProfileFamily::Sum { terms } => terms.iter().for_each(|t| t.collect_periods(out)),
            _ => {}
        }
    }

    /// Whether every cosine term repeats after `a`.
    fn has_period(&self, a: f64) -> bool {
        let mut periods = Vec::new();
        self.collect_periods(&mut periods);
        periods.iter().all(|&p| {
            let ratio = a / p;
            ratio >= 1.0 - 1e-12 && (ratio - ratio.round()).abs() <= 1e-12 * ratio.max(1.0)
        })
    }

    fn is_constant(&self) -> bool {
        matches!(self.class(), Ok(Class::Constant))
    }

    /// Interval `[a, b]` containing all the structure of a localized family.
    fn support_hint(&self) -> Option<(f64, f64)> {
        match self {
            ProfileFamily::GaussianBump { center, width, .. } | ProfileFamily::Sech2Bump { center, width, .. } => {
                Some((center - 14.0 * width, center + 14.0 * width))
            }
            ProfileFamily::Sum { terms } => terms
                .iter()
                .filter_map(|t| t.support_hint())
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            _ => None,
        }
    }

    fn finest_scale(&self) -> f64 {
        match self {
            ProfileFamily::Constant { .. } => f64::INFINITY,
            ProfileFamily::GaussianBump { width, .. } | ProfileFamily::Sech2Bump { width, .. } => *width,
            ProfileFamily::CosinePeriodic { period, .. } => *period / (2.0 * PI),
            ProfileFamily::Sum { terms } => terms.iter().map(|t| t.finest_scale()).fold(f64::INFINITY, f64::min),
        }
    }

    /// Infimum and supremum over ℝ.
    pub fn range(&self) -> Extrema {
        match self {
            ProfileFamily::Constant { value } => Extrema::flat(*value, 0.0),
            ProfileFamily::GaussianBump {
                base, amplitude, center, ..
            }
            | ProfileFamily::Sech2Bump {
                base, amplitude, center, ..
            } => {
                let peak = base + amplitude;
                let far = f64::INFINITY;
                if *amplitude >= 0.0 {
                    Extrema {
                        inf: *base,
                        sup: peak,
                        arg_inf: far,
                        arg_sup: *center,
                    }
                } else {
                    Extrema {
                        inf: peak,
                        sup: *base,
                        arg_inf: *center,
                        arg_sup: far,
                    }
                }
            }
            ProfileFamily::CosinePeriodic { mean, amplitude, period } => {
                let (hi_at, lo_at) = if *amplitude >= 0.0 { (0.0, period / 2.0) } else { (period / 2.0, 0.0) };
                Extrema {
                    inf: mean - amplitude.abs(),
                    sup: mean + amplitude.abs(),
                    arg_inf: lo_at,
                    arg_sup: hi_at,
                }
            }
            ProfileFamily::Sum { .. } => {
                let (lo, hi) = self.scan_window();
                numeric_extrema(
                    |z| self.eval(z, 0),
                    |z| self.eval(z, 1),
                    |z| self.eval(z, 2),
                    lo,
                    hi,
                    self.finest_scale(),
                    self.limit(),
                )
            }
        }
    }

    fn scan_window(&self) -> (f64, f64) {
        if let Some(p) = self.natural_period() {
            (0.0, p)
        } else {
            self.support_hint().unwrap_or((0.0, 1.0))
        }
    }
}

fn sech2(u: f64) -> f64 {
    let a = u.abs();
    if a > 350.0 {
        return 0.0;
    }
    let e = (-2.0 * a).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Infimum/supremum over ℝ with the points where they are reached.
/// An argument of `±∞` means the value is approached at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub inf: f64,
    pub sup: f64,
    pub arg_inf: f64,
    pub arg_sup: f64,
}

impl Extrema {
    fn flat(v: f64, at: f64) -> Self {
        Extrema {
            inf: v,
            sup: v,
            arg_inf: at,
            arg_sup: at,
        }
    }
}

/// Dense sampling on `[lo, hi]` followed by Newton refinement of each local
/// extremum on `f' = 0`. `limit`, when present, is the value at ±∞.
fn numeric_extrema(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    d2f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    scale: f64,
    limit: Option<f64>,
) -> Extrema {
    let step = (scale / 32.0).min((hi - lo) / 64.0);
    let n = ((hi - lo) / step).ceil() as usize;
    let h = (hi - lo) / n as f64;
    let zs: Vec<f64> = (0..=n).map(|i| lo + h * i as f64).collect();
    let vals: Vec<f64> = zs.iter().map(|&z| f(z)).collect();

    let mut ext = match limit {
        Some(v) => Extrema {
            inf: v,
            sup: v,
            arg_inf: f64::INFINITY,
            arg_sup: f64::INFINITY,
        },
        None => Extrema::flat(vals[0], zs[0]),
    };
    let mut consider = |z: f64, v: f64| {
        if v > ext.sup {
            ext.sup = v;
            ext.arg_sup = z;
        }
        if v < ext.inf {
            ext.inf = v;
            ext.arg_inf = z;
        }
    };
    for (i, (&z, &v)) in zs.iter().zip(&vals).enumerate() {
        consider(z, v);
        let interior = i > 0 && i < n;
        let local_extremum = interior
            && ((v >= vals[i - 1] && v >= vals[i + 1]) || (v <= vals[i - 1] && v <= vals[i + 1]));
        if local_extremum || (limit.is_none() && (i == 0 || i == n)) {
            let mut x = z;
            for _ in 0..50 {
                let d2 = d2f(x);
                if d2 == 0.0 {
                    break;
                }
                let dx = df(x) / d2;
                let nx = (x - dx).clamp(z - h, z + h);
                if (nx - x).abs() <= 1e-15 * x.abs().max(1.0) {
                    x = nx;
                    break;
                }
                x = nx;
            }
            consider(x, f(x));
        }
    }
    ext
}

/// Coefficient bounds over ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialBounds {
    pub eps_min: f64,
    pub eps_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// `‖εμ‖_∞`
    pub sup_eps_mu: f64,
    /// Point where the supremum of εμ is reached (`±∞` if only approached).
    pub arg_sup_eps_mu: f64,
    /// Infimum of εμ.
    pub inf_eps_mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Stabilizing { eps_inf: f64, mu_inf: f64 },
    Periodic { period: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    pub epsilon: ProfileFamily,
    pub mu: ProfileFamily,
    pub classification: Classification,
    bounds: EssentialBounds,
}

impl CoefficientProfile {
    /// Profile tending to `(ε*, μ*)` at infinity. Only constants and bumps are accepted.
    pub fn stabilizing(epsilon: ProfileFamily, mu: ProfileFamily) -> Result<Self> {
        Self::stabilizing_with_floor(epsilon, mu, DEFAULT_FLOOR)
    }

    pub fn stabilizing_with_floor(epsilon: ProfileFamily, mu: ProfileFamily, floor: f64) -> Result<Self> {
        for f in [&epsilon, &mu] {
            f.check_parameters()?;
            if f.class()? == Class::Periodic {
                return Err(invalid("stabilizing profiles may not contain periodic terms"));
            }
        }
        let eps_inf = epsilon.limit().expect("localized family has a limit");
        let mu_inf = mu.limit().expect("localized family has a limit");
        Self::finish(
            epsilon,
            mu,
            Classification::Stabilizing { eps_inf, mu_inf },
            floor,
        )
    }

    /// Periodic profile; the period is the largest cosine period present.
    pub fn periodic(epsilon: ProfileFamily, mu: ProfileFamily) -> Result<Self> {
        let period = [epsilon.natural_period(), mu.natural_period()]
            .into_iter()
            .flatten()
            .reduce(f64::max)
            .ok_or_else(|| invalid("constant profiles need an explicit period"))?;
        Self::periodic_with_period(epsilon, mu, period)
    }

    pub fn periodic_with_period(epsilon: ProfileFamily, mu: ProfileFamily, period: f64) -> Result<Self> {
        Self::periodic_with_floor(epsilon, mu, period, DEFAULT_FLOOR)
    }

    pub fn periodic_with_floor(epsilon: ProfileFamily, mu: ProfileFamily, period: f64, floor: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        for f in [&epsilon, &mu] {
            f.check_parameters()?;
            if f.class()? == Class::Localized {
                return Err(invalid("periodic profiles may not contain localized bumps"));
            }
            if !f.has_period(period) {
                return Err(invalid(format!("coefficient is not {period}-periodic")));
            }
        }
        Self::finish(epsilon, mu, Classification::Periodic { period }, floor)
    }

    fn finish(epsilon: ProfileFamily, mu: ProfileFamily, classification: Classification, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(invalid("floor must be positive"));
        }
        let bounds = compute_bounds(&epsilon, &mu, &classification);
        if bounds.eps_min < floor || bounds.mu_min < floor {
            return Err(invalid(format!(
                "coefficients must stay above {floor}: inf epsilon = {}, inf mu = {}",
                bounds.eps_min, bounds.mu_min
            )));
        }
        Ok(CoefficientProfile {
            epsilon,
            mu,
            classification,
            bounds,
        })
    }

    pub fn essential_bounds(&self) -> EssentialBounds {
        self.bounds
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.classification, Classification::Periodic { .. })
    }

    pub fn period(&self) -> Option<f64> {
        match self.classification {
            Classification::Periodic { period } => Some(period),
            _ => None,
        }
    }

    /// `(ε*, μ*)` for stabilizing profiles.
    pub fn limits(&self) -> Option<(f64, f64)> {
        match self.classification {
            Classification::Stabilizing { eps_inf, mu_inf } => Some((eps_inf, mu_inf)),
            _ => None,
        }
    }

    /// The same profile with ε and μ exchanged.
    pub fn swapped(&self) -> Self {
        let classification = match self.classification {
            Classification::Stabilizing { eps_inf, mu_inf } => Classification::Stabilizing {
                eps_inf: mu_inf,
                mu_inf: eps_inf,
            },
            c => c,
        };
        let b = self.bounds;
        CoefficientProfile {
            epsilon: self.mu.clone(),
            mu: self.epsilon.clone(),
            classification,
            bounds: EssentialBounds {
                eps_min: b.mu_min,
                eps_max: b.mu_max,
                mu_min: b.eps_min,
                mu_max: b.eps_max,
                ..b
            },
        }
    }

    /// `[ε, ε', ε'']` at `z`.
    pub fn eps_jet(&self, z: f64) -> [f64; 3] {
        [self.epsilon.eval(z, 0), self.epsilon.eval(z, 1), self.epsilon.eval(z, 2)]
    }

    pub fn mu_jet(&self, z: f64) -> [f64; 3] {
        [self.mu.eval(z, 0), self.mu.eval(z, 1), self.mu.eval(z, 2)]
    }

    /// Region outside of which a stabilizing profile equals its limits to
    /// within `1e-16` relative.
    pub fn structure_window(&self) -> (f64, f64) {
        match (self.epsilon.support_hint(), self.mu.support_hint()) {
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => (-1.0, 1.0),
        }
    }
}

fn compute_bounds(eps: &ProfileFamily, mu: &ProfileFamily, class: &Classification) -> EssentialBounds {
    let e = eps.range();
    let m = mu.range();
    let (sup, arg_sup, inf) = if mu.is_constant() {
        let c = mu.eval(0.0, 0);
        (c * e.sup, e.arg_sup, c * e.inf)
    } else if eps.is_constant() {
        let c = eps.eval(0.0, 0);
        (c * m.sup, m.arg_sup, c * m.inf)
    } else {
        let (lo, hi) = match class {
            Classification::Periodic { period } => (0.0, *period),
            Classification::Stabilizing { .. } => {
                let w = |f: &ProfileFamily| f.support_hint().unwrap_or((0.0, 1.0));
                let (a, b) = (w(eps), w(mu));
                (a.0.min(b.0), a.1.max(b.1))
            }
        };
        let limit = match class {
            Classification::Stabilizing { eps_inf, mu_inf } => Some(eps_inf * mu_inf),
            _ => None,
        };
        let p = |z: f64| eps.eval(z, 0) * mu.eval(z, 0);
        let dp = |z: f64| eps.eval(z, 1) * mu.eval(z, 0) + eps.eval(z, 0) * mu.eval(z, 1);
        let d2p = |z: f64| {
            eps.eval(z, 2) * mu.eval(z, 0) + 2.0 * eps.eval(z, 1) * mu.eval(z, 1) + eps.eval(z, 0) * mu.eval(z, 2)
        };
        let ext = numeric_extrema(p, dp, d2p, lo, hi, eps.finest_scale().min(mu.finest_scale()), limit);
        (ext.sup, ext.arg_sup, ext.inf)
    };
    EssentialBounds {
        eps_min: e.inf,
        eps_max: e.sup,
        mu_min: m.inf,
        mu_max: m.sup,
        sup_eps_mu: sup,
        arg_sup_eps_mu: arg_sup,
        inf_eps_mu: inf,
    }
}

/// Outcome of comparing εμ with its limit `ε*μ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProductCheck {
    /// `ε(z)μ(z) ≤ ε*μ*` for every z: no mode binds below its threshold.
    EverywhereBelow,
    /// `ε(z₀)μ(z₀) > ε*μ*`: high modes acquire bound states.
    ExceedsAt { z0: f64 },
}

/// Compare εμ with `ε*μ*` over ℝ for a stabilizing profile.
pub fn check_product_below_limit(profile: &CoefficientProfile) -> Result<ProductCheck> {
    let (e, m) = profile
        .limits()
        .ok_or_else(|| invalid("product check needs a stabilizing profile"))?;
    let b = profile.essential_bounds();
    let limit = e * m;
    if b.sup_eps_mu <= limit * (1.0 + 4.0 * f64::EPSILON) || !b.arg_sup_eps_mu.is_finite() {
        Ok(ProductCheck::EverywhereBelow)
    } else {
        Ok(ProductCheck::ExceedsAt { z0: b.arg_sup_eps_mu })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<ProfileFamily> {
        vec![
            ProfileFamily::constant(2.0),
            ProfileFamily::gaussian(1.0, 0.5, 0.3, 0.8),
            ProfileFamily::sech2(1.0, -0.3, -0.5, 1.2),
            ProfileFamily::cosine(1.0, 0.3, 1.0),
            ProfileFamily::Sum {
                terms: vec![ProfileFamily::gaussian(0.5, 0.4, 1.0, 0.5), ProfileFamily::sech2(0.7, 0.2, -1.0, 1.0)],
            },
            ProfileFamily::Sum {
                terms: vec![ProfileFamily::cosine(1.0, 0.2, 1.0), ProfileFamily::cosine(0.5, 0.1, 0.5)],
            },
        ]
    }

    #[test]
    fn constant_eval() {
        let c = ProfileFamily::constant(2.0);
        assert_eq!(c.eval(7.0, 0), 2.0);
        assert_eq!(c.eval(7.0, 1), 0.0);
    }

    #[test]
    fn gaussian_second_derivative_at_center() {
        let g = ProfileFamily::gaussian(1.0, 0.5, 0.0, 1.0);
        assert!((g.eval(0.0, 2) + 1.0).abs() < 1e-15);
        // finite-difference oracle at h = 1e-5
        let h = 1e-5;
        let fd = (g.eval(h, 0) - 2.0 * g.eval(0.0, 0) + g.eval(-h, 0)) / (h * h);
        assert!((fd + 1.0).abs() < 1e-4);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for f in families() {
            for i in 0..100 {
                let z = -3.0 + 6.0 * i as f64 / 99.0;
                let d1 = (f.eval(z + h, 0) - f.eval(z - h, 0)) / (2.0 * h);
                let d2 = (f.eval(z + h, 1) - f.eval(z - h, 1)) / (2.0 * h);
                assert!((d1 - f.eval(z, 1)).abs() < 1e-7, "{f:?} z={z}");
                assert!((d2 - f.eval(z, 2)).abs() < 1e-7, "{f:?} z={z}");
            }
        }
    }

    #[test]
    fn periodic_families_repeat() {
        let f = ProfileFamily::Sum {
            terms: vec![ProfileFamily::cosine(1.0, 0.2, 1.0), ProfileFamily::cosine(0.5, 0.1, 0.5)],
        };
        let a = f.natural_period().unwrap();
        for i in 0..1000 {
            let z = -2.0 + 4.0 * i as f64 / 999.0;
            assert!((f.eval(z + a, 0) - f.eval(z, 0)).abs() <= 1e-14);
        }
    }

    #[test]
    fn bounds_examples() {
        let one = ProfileFamily::constant(1.0);
        let p = CoefficientProfile::stabilizing(one.clone(), one.clone()).unwrap();
        let b = p.essential_bounds();
        assert_eq!((b.eps_min, b.eps_max, b.mu_min, b.mu_max, b.sup_eps_mu), (1.0, 1.0, 1.0, 1.0, 1.0));

        let p = CoefficientProfile::stabilizing(ProfileFamily::gaussian(1.0, 1.0, 0.0, 1.0), one.clone()).unwrap();
        let b = p.essential_bounds();
        assert_eq!((b.eps_min, b.eps_max, b.mu_min, b.mu_max, b.sup_eps_mu), (1.0, 2.0, 1.0, 1.0, 2.0));

        let p = CoefficientProfile::periodic(ProfileFamily::cosine(1.0, 0.3, 1.0), ProfileFamily::constant(2.0)).unwrap();
        assert!((p.essential_bounds().sup_eps_mu - 2.6).abs() < 1e-15);
    }

    #[test]
    fn bounds_bracket_dense_samples() {
        let eps = ProfileFamily::Sum {
            terms: vec![ProfileFamily::gaussian(0.5, 0.4, 1.0, 0.5), ProfileFamily::sech2(0.7, -0.2, -1.0, 1.0)],
        };
        let mu = ProfileFamily::sech2(1.0, 0.3, 0.5, 0.7);
        let p = CoefficientProfile::stabilizing(eps.clone(), mu.clone()).unwrap();
        let b = p.essential_bounds();
        for i in 0..20001 {
            let z = -10.0 + 20.0 * i as f64 / 20000.0;
            let (e, m) = (eps.eval(z, 0), mu.eval(z, 0));
            assert!(e >= b.eps_min - 1e-15 && e <= b.eps_max + 1e-15);
            assert!(m >= b.mu_min - 1e-15 && m <= b.mu_max + 1e-15);
            assert!(e * m <= b.sup_eps_mu + 1e-15);
            assert!(e * m >= b.inf_eps_mu - 1e-15);
        }
    }

    #[test]
    fn product_check_examples() {
        let one = ProfileFamily::constant(1.0);
        let below = CoefficientProfile::stabilizing(ProfileFamily::sech2(1.0, -0.3, 0.0, 1.0), one.clone()).unwrap();
        assert_eq!(check_product_below_limit(&below).unwrap(), ProductCheck::EverywhereBelow);

        let above = CoefficientProfile::stabilizing(ProfileFamily::sech2(1.0, 0.5, 0.0, 1.0), one.clone()).unwrap();
        assert_eq!(check_product_below_limit(&above).unwrap(), ProductCheck::ExceedsAt { z0: 0.0 });

        let flat = CoefficientProfile::stabilizing(one.clone(), one).unwrap();
        assert_eq!(check_product_below_limit(&flat).unwrap(), ProductCheck::EverywhereBelow);
    }

    #[test]
    fn class_mismatch_and_floor() {
        let cos = ProfileFamily::cosine(1.0, 0.3, 1.0);
        let bump = ProfileFamily::gaussian(1.0, 0.3, 0.0, 1.0);
        assert!(CoefficientProfile::stabilizing(cos.clone(), ProfileFamily::constant(1.0)).is_err());
        assert!(CoefficientProfile::periodic(bump.clone(), ProfileFamily::constant(1.0)).is_err());
        assert!(CoefficientProfile::periodic(ProfileFamily::constant(1.0), ProfileFamily::constant(1.0)).is_err());
        assert!(CoefficientProfile::periodic_with_period(cos, ProfileFamily::constant(1.0), 0.7).is_err());
        let deep = ProfileFamily::sech2(1.0, -1.0, 0.0, 1.0);
        assert!(CoefficientProfile::stabilizing(deep, ProfileFamily::constant(1.0)).is_err());
        let mixed = ProfileFamily::Sum { terms: vec![bump, ProfileFamily::cosine(1.0, 0.1, 1.0)] };
        assert!(CoefficientProfile::stabilizing(mixed, ProfileFamily::constant(1.0)).is_err());
    }

    #[test]
    fn swap_exchanges_limits() {
        let p = CoefficientProfile::stabilizing(ProfileFamily::sech2(2.0, 0.5, 0.0, 1.0), ProfileFamily::constant(3.0))
            .unwrap();
        let s = p.swapped();
        assert_eq!(s.limits(), Some((3.0, 2.0)));
        assert_eq!(s.essential_bounds().eps_min, 3.0);
        assert_eq!(s.essential_bounds().mu_max, 2.5);
    }
}
