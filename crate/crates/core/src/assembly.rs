//! Assembly of the Maxwell spectrum from per-mode spectra.
//!
//! `σ(ℳ²)` is the union of the spectra of all mode operators; `σ(ℳ)` is the
//! set `{±√E : E ∈ σ(ℳ²)}`. Everything is computed up to a common energy
//! cap `e_max` (in units of `ℳ²`).

use serde::{Deserialize, Serialize};

use crate::cross_section::CrossSectionSpectrum;
use crate::error::{Error, Result};
use crate::liouville::{Flavor, ModePotential};
use crate::profile::CoefficientProfile;
use crate::schrodinger::{BandStructure, BoundStateResult};

/// Intervals closer than this are coalesced.
pub const MERGE_TOLERANCE: f64 = 1e-9;
/// Gaps narrower than this are reported as possibly closed.
pub const GAP_REPORT_THRESHOLD: f64 = 1e-6;
/// Band bottoms of the zero branch within this of 0 are snapped to 0.
const ZERO_BRANCH_SNAP: f64 = 1e-8;

/// Closed interval `[lo, hi]`, serialized as a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Sorts and coalesces intervals that overlap or are closer than [`MERGE_TOLERANCE`].
pub fn merge(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo - last.hi <= MERGE_TOLERANCE => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Which mode a spectral component comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(flatten)]
    pub flavor: Flavor,
    pub mode_constant: f64,
}

impl Provenance {
    pub fn label(&self) -> String {
        self.flavor.to_string()
    }
}

/// Eigenvalue with an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEigenvalue {
    pub value: f64,
    pub error: f64,
    pub provenance: Provenance,
}

/// Spectrum of one mode operator below `e_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub provenance: Provenance,
    pub e_max: f64,
    /// `c/(ε*μ*)` for decaying modes.
    pub threshold: Option<f64>,
    /// `c / sup(εμ)`.
    pub lower_bound: f64,
    /// Disjoint ascending intervals; the last one is cut at `e_max`.
    pub ac_part: Vec<Interval>,
    pub point_part: Vec<PointEigenvalue>,
    /// Band gaps of periodic modes, closed ones included.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub band_gaps: Vec<Interval>,
}

impl ModeSpectrum {
    fn provenance_of(potential: &ModePotential) -> Provenance {
        Provenance {
            flavor: potential.flavor,
            mode_constant: potential.mode_constant,
        }
    }

    /// `[threshold, e_max]` plus the bound states below `e_max`.
    pub fn from_bound_states(potential: &ModePotential, states: &BoundStateResult, e_max: f64) -> Self {
        let provenance = Self::provenance_of(potential);
        let ac_part = if states.threshold <= e_max {
            vec![Interval::new(states.threshold, e_max)]
        } else {
            Vec::new()
        };
        let point_part = states
            .eigenvalues
            .iter()
            .zip(&states.refinement_estimate)
            .filter(|(v, _)| **v <= e_max)
            .map(|(&value, &error)| PointEigenvalue {
                value,
                error,
                provenance,
            })
            .collect();
        ModeSpectrum {
            provenance,
            e_max,
            threshold: Some(states.threshold),
            lower_bound: potential.lower_bound,
            ac_part,
            point_part,
            band_gaps: Vec::new(),
        }
    }

    /// Bands of a periodic mode; there is no point spectrum.
    pub fn from_bands(potential: &ModePotential, bands: &BandStructure) -> Self {
        let mut ac_part: Vec<Interval> = bands.bands.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect();
        if potential.flavor == Flavor::Zero {
            if let Some(first) = ac_part.first_mut() {
                if first.lo.abs() < ZERO_BRANCH_SNAP {
                    first.lo = 0.0;
                }
            }
        }
        let mut band_gaps: Vec<Interval> = bands
            .gaps
            .iter()
            .chain(&bands.closed_gaps)
            .map(|g| Interval::new(g.lo, g.hi))
            .collect();
        band_gaps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        ModeSpectrum {
            provenance: Self::provenance_of(potential),
            e_max: bands.e_max,
            threshold: None,
            lower_bound: potential.lower_bound,
            ac_part,
            point_part: Vec::new(),
            band_gaps,
        }
    }

    /// A mode with an explicitly given spectrum.
    pub fn explicit(provenance: Provenance, e_max: f64, ac_part: Vec<Interval>, point_part: Vec<PointEigenvalue>) -> Self {
        ModeSpectrum {
            provenance,
            e_max,
            threshold: None,
            lower_bound: 0.0,
            ac_part,
            point_part,
            band_gaps: Vec::new(),
        }
    }
}

/// Modes that can contribute below `e_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBudget {
    pub e_max: f64,
    /// Largest `k` with `λ_k / sup(εμ) ≤ e_max` (0 if none).
    pub k_max: usize,
    /// Largest `l` with `κ_l / sup(εμ) ≤ e_max`; magnetic modes use `2 ≤ l ≤ l_max`.
    pub l_max: usize,
    pub include_zero_branch: bool,
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
}

impl ModeBudget {
    /// `(flavor, mode constant)` of every operator in the budget.
    pub fn modes(&self) -> Vec<(Flavor, f64)> {
        let mut out: Vec<(Flavor, f64)> = (1..=self.k_max)
            .map(|k| (Flavor::Electric(k), self.dirichlet[k - 1]))
            .collect();
        out.extend((2..=self.l_max).map(|l| (Flavor::Magnetic(l), self.neumann[l - 1])));
        if self.include_zero_branch {
            out.push((Flavor::Zero, 0.0));
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.k_max == 0 && self.l_max < 2 && !self.include_zero_branch
    }
}

/// Modes whose lower bound `c / sup(εμ)` does not exceed `e_max`. The
/// cross-section lists must extend beyond `e_max · sup(εμ)`.
pub fn mode_budget(cross: &CrossSectionSpectrum, profile: &CoefficientProfile, e_max: f64) -> Result<ModeBudget> {
    if !(e_max.is_finite() && e_max > 0.0) {
        return Err(Error::InvalidInput(format!("e_max must be positive, got {e_max}")));
    }
    let sup = profile.essential_bounds().sup_eps_mu;
    let within = |c: f64| c / sup <= e_max;
    let k_max = cross.dirichlet.iter().take_while(|&&c| within(c)).count();
    let l_max = cross.neumann.iter().take_while(|&&c| within(c)).count();
    Ok(ModeBudget {
        e_max,
        k_max,
        l_max,
        include_zero_branch: cross.n_boundary_components >= 2,
        dirichlet: cross.dirichlet[..k_max].to_vec(),
        neumann: cross.neumann[..l_max].to_vec(),
    })
}

/// A component of `σ(ℳ²)` with the modes contributing to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionInterval {
    pub interval: Interval,
    pub modes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSquared {
    /// Merged absolutely continuous part.
    pub ac: Vec<UnionInterval>,
    /// All point eigenvalues, ascending.
    pub points: Vec<PointEigenvalue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maxwell {
    /// Symmetric interval list: `−√` images followed by `+√` images.
    pub intervals: Vec<Interval>,
    /// `±√E` for the point eigenvalues of `ℳ²`, ascending.
    pub points: Vec<f64>,
    /// The set is described on `(−√e_max, √e_max)`.
    pub window: f64,
}

impl Maxwell {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x)) || self.points.contains(&x)
    }
}

/// A point eigenvalue of `ℳ²` lying in the a.c. spectrum of another mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedEigenvalue {
    pub value: f64,
    pub maxwell_value: f64,
    pub error: f64,
    pub provenance: Provenance,
    /// Labels of the modes whose a.c. spectrum contains the value.
    pub hosts: Vec<String>,
}

/// A point eigenvalue not covered by any a.c. spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatedEigenvalue {
    pub value: f64,
    pub maxwell_value: f64,
    pub error: f64,
    pub provenance: Provenance,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub e_max: f64,
    pub n_boundary_components: usize,
    pub mode_budget: Option<ModeBudget>,
    pub modes: Vec<ModeSpectrum>,
    pub msquared: MSquared,
    pub maxwell: Maxwell,
    /// Open gaps of `σ(ℳ)` inside the window, at least [`GAP_REPORT_THRESHOLD`] wide.
    pub gaps: Vec<Interval>,
    /// Gaps narrower than [`GAP_REPORT_THRESHOLD`].
    pub possibly_closed_gaps: Vec<Interval>,
    pub central_gap: Option<Interval>,
    pub embedded_eigenvalues: Vec<EmbeddedEigenvalue>,
    pub isolated_eigenvalues: Vec<IsolatedEigenvalue>,
}

/// Union of the mode spectra and the `±√` map.
pub fn assemble(modes: Vec<ModeSpectrum>, n_boundary: usize, budget: Option<ModeBudget>) -> Result<SpectrumReport> {
    let e_max = match modes.first() {
        Some(m) => m.e_max,
        None => budget
            .as_ref()
            .map(|b| b.e_max)
            .ok_or_else(|| Error::Assembly("no modes and no budget to fix e_max".into()))?,
    };
    if let Some(bad) = modes.iter().find(|m| m.e_max != e_max) {
        return Err(Error::Assembly(format!(
            "mode {} was computed up to {} but others up to {e_max}",
            bad.provenance.label(),
            bad.e_max
        )));
    }
    if let Some(b) = &budget {
        if b.e_max != e_max {
            return Err(Error::Assembly(format!("budget e_max {} differs from {e_max}", b.e_max)));
        }
    }
    for m in &modes {
        let negative = m.ac_part.iter().any(|iv| iv.lo < 0.0) || m.point_part.iter().any(|p| p.value < 0.0);
        if negative {
            return Err(Error::Assembly(format!(
                "mode {} has negative spectrum; the square of a self-adjoint operator is nonnegative",
                m.provenance.label()
            )));
        }
    }

    let clipped = |iv: &Interval| {
        if iv.lo > e_max {
            None
        } else {
            Some(Interval::new(iv.lo, iv.hi.min(e_max)))
        }
    };
    let merged = merge(modes.iter().flat_map(|m| m.ac_part.iter().filter_map(clipped)).collect());
    let ac: Vec<UnionInterval> = merged
        .iter()
        .map(|iv| {
            let mut labels: Vec<String> = modes
                .iter()
                .filter(|m| m.ac_part.iter().any(|a| a.lo <= iv.hi && a.hi >= iv.lo))
                .map(|m| m.provenance.label())
                .collect();
            labels.dedup();
            UnionInterval {
                interval: *iv,
                modes: labels,
            }
        })
        .collect();
    let mut points: Vec<PointEigenvalue> = modes
        .iter()
        .flat_map(|m| m.point_part.iter().copied())
        .filter(|p| p.value <= e_max)
        .collect();
    points.sort_by(|a, b| a.value.total_cmp(&b.value));

    // σ(ℳ): build the positive half and reflect it.
    let positive: Vec<Interval> = merged.iter().map(|iv| Interval::new(iv.lo.sqrt(), iv.hi.sqrt())).collect();
    let mut intervals: Vec<Interval> = positive.iter().rev().map(|iv| Interval::new(-iv.hi, -iv.lo)).collect();
    if let (Some(last_neg), Some(first_pos)) = (intervals.last_mut(), positive.first()) {
        // [−a, −0] and [0, a] are one interval
        if first_pos.lo == 0.0 {
            last_neg.hi = first_pos.hi;
            intervals.extend(positive.iter().skip(1).copied());
        } else {
            intervals.extend(positive.iter().copied());
        }
    }
    let mut pos_points: Vec<f64> = points.iter().map(|p| p.value.sqrt()).collect();
    pos_points.dedup();
    let mut maxwell_points: Vec<f64> = pos_points.iter().rev().map(|x| -x).collect();
    maxwell_points.extend(pos_points.iter().filter(|&&x| x > 0.0));
    let window = e_max.sqrt();
    let maxwell = Maxwell {
        intervals,
        points: maxwell_points,
        window,
    };

    // gaps: complement of intervals and points inside (−window, window)
    let mut occupied: Vec<Interval> = maxwell.intervals.clone();
    occupied.extend(maxwell.points.iter().map(|&x| Interval::new(x, x)));
    let occupied = merge(occupied);
    let mut gaps = Vec::new();
    let mut narrow = Vec::new();
    let mut cursor = -window;
    for iv in occupied.iter().chain(std::iter::once(&Interval::new(window, window))) {
        if iv.lo > cursor {
            let g = Interval::new(cursor, iv.lo);
            if g.width() >= GAP_REPORT_THRESHOLD {
                gaps.push(g);
            } else {
                narrow.push(g);
            }
        }
        cursor = cursor.max(iv.hi);
    }
    // Components touching the window boundary are not gaps.
    gaps.retain(|g| g.lo > -window && g.hi < window);
    narrow.retain(|g| g.lo > -window && g.hi < window);
    let central_gap = gaps.iter().copied().find(|g| g.lo < 0.0 && g.hi > 0.0);

    let mut embedded = Vec::new();
    let mut isolated = Vec::new();
    for p in &points {
        let hosts: Vec<String> = modes
            .iter()
            .filter(|m| m.provenance != p.provenance)
            .filter(|m| m.ac_part.iter().any(|iv| iv.contains(p.value)))
            .map(|m| m.provenance.label())
            .collect();
        if hosts.is_empty() {
            isolated.push(IsolatedEigenvalue {
                value: p.value,
                maxwell_value: p.value.sqrt(),
                error: p.error,
                provenance: p.provenance,
                note: "outside a.c. support; whether such eigenvalues exist in the stabilizing case is an open question"
                    .into(),
            });
        } else {
            embedded.push(EmbeddedEigenvalue {
                value: p.value,
                maxwell_value: p.value.sqrt(),
                error: p.error,
                provenance: p.provenance,
                hosts,
            });
        }
    }

    Ok(SpectrumReport {
        e_max,
        n_boundary_components: n_boundary,
        mode_budget: budget,
        modes,
        msquared: MSquared { ac, points },
        maxwell,
        gaps,
        possibly_closed_gaps: narrow,
        central_gap,
        embedded_eigenvalues: embedded,
        isolated_eigenvalues: isolated,
    })
}

/// Outcome of the finite-gap argument for two periodic electric modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub w1: f64,
    pub w2: f64,
    pub b: f64,
    pub delta: f64,
    /// Band index from which all edges follow their asymptotics within δ.
    pub n: usize,
    /// Above `k` the two spectra together have no gaps.
    pub k: f64,
    pub verified: bool,
    /// Why the certificate could not be checked, if so.
    pub inconclusive: Option<String>,
    /// Grid spacing of the coverage check.
    pub grid_step: f64,
}

fn inconclusive(w1: f64, w2: f64, b: f64, reason: String) -> GapCertificate {
    GapCertificate {
        w1,
        w2,
        b,
        delta: f64::NAN,
        n: 0,
        k: f64::NAN,
        verified: false,
        inconclusive: Some(reason),
        grid_step: COVERAGE_STEP,
    }
}

const COVERAGE_STEP: f64 = 1e-3;

/// Computes `δ`, `N` and `K` from the band edges of two modes with mean
/// potentials `w1 ≠ w2` and checks on a grid that `[K, e_max]` lies in the
/// union of their bands.
///
/// `δ = (w₂ − w₁)/4`; `N` is the least index with `(2N+1)π² > (w₂ − w₁ + 2δ)b²`
/// beyond which every computed edge is within `δ` of `π²(n−1)²/b² + w` (band
/// bottoms) or `π²n²/b² + w` (band tops); `K = π²N²/b² + w₂ + δ`.
pub fn finite_gap_certificate(first: &BandStructure, second: &BandStructure, w1: f64, w2: f64) -> GapCertificate {
    let b = first.period_b;
    let scale = w1.abs().max(w2.abs()).max(1.0);
    if (w2 - w1).abs() <= 1e-12 * scale {
        return inconclusive(w1, w2, b, "the two mean potentials coincide".into());
    }
    if (second.period_b - b).abs() > 1e-12 * b {
        return inconclusive(w1, w2, b, "the two modes have different periods".into());
    }
    let ((lo_w, lo_bands), (hi_w, hi_bands)) = if w1 < w2 {
        ((w1, first), (w2, second))
    } else {
        ((w2, second), (w1, first))
    };
    let delta = 0.25 * (hi_w - lo_w);
    let pi2 = std::f64::consts::PI.powi(2);
    let e_max = first.e_max.min(second.e_max);
    let mut n = 1usize;
    while ((2 * n + 1) as f64) * pi2 <= (hi_w - lo_w + 2.0 * delta) * b * b {
        n += 1;
    }
    let deviation_from = |bands: &BandStructure, w: f64, idx: usize| -> bool {
        bands.raw_bands.iter().filter(|band| band.index >= idx).any(|band| {
            let k = band.index as f64;
            let bottom = (band.alpha - (pi2 * (k - 1.0).powi(2) / (b * b) + w)).abs() >= delta;
            let top = !band.truncated && (band.beta - (pi2 * k * k / (b * b) + w)).abs() >= delta;
            bottom || top
        })
    };
    while deviation_from(lo_bands, lo_w, n) || deviation_from(hi_bands, hi_w, n) {
        n += 1;
        let last = lo_bands.raw_bands.len().max(hi_bands.raw_bands.len());
        if n > last {
            return inconclusive(w1, w2, b, "band edges never settle within δ of their asymptotics".into());
        }
    }
    let k = pi2 * (n * n) as f64 / (b * b) + hi_w + delta;
    if k >= e_max {
        return GapCertificate {
            w1,
            w2,
            b,
            delta,
            n,
            k,
            verified: false,
            inconclusive: Some(format!("K = {k} is not below e_max = {e_max}")),
            grid_step: COVERAGE_STEP,
        };
    }
    let steps = ((e_max - k) / COVERAGE_STEP).floor() as usize;
    let covered = (0..=steps).all(|i| {
        let e = k + i as f64 * COVERAGE_STEP;
        first.contains(e) || second.contains(e)
    });
    GapCertificate {
        w1,
        w2,
        b,
        delta,
        n,
        k,
        verified: covered,
        inconclusive: None,
        grid_step: COVERAGE_STEP,
    }
}
