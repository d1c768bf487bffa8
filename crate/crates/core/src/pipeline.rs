//! End-to-end computation: cross-section modes → transform → per-mode
//! spectra → assembled report.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, mode_budget, ModeBudget, ModeSpectrum, SpectrumReport};
use crate::cross_section::{CrossSectionSpec, CrossSectionSpectrum};
use crate::error::{Error, Result};
use crate::liouville::{build_potential, Flavor, LiouvilleData, ModePotential};
use crate::profile::CoefficientProfile;
use crate::schrodinger::{
    band_structure, bound_states, default_grid, default_window, lowest_eigenvalues_on, BandStructure, BoundStateResult,
};
use crate::weighted::{weighted_eigenvalues, WeightedOperatorSpec};

/// Discretization overrides; `None` picks the defaults per mode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Numerics {
    pub window_halfwidth: Option<f64>,
    pub grid: Option<usize>,
}

/// Per-mode solver output.
#[derive(Debug, Clone)]
pub enum ModeResult {
    Bound(BoundStateResult),
    Bands(BandStructure),
}

/// Everything computed for one mode.
#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub potential: ModePotential,
    pub result: ModeResult,
    pub spectrum: ModeSpectrum,
}

/// Budget of modes below `e_max`, with cross-section lists long enough to decide it.
pub fn budget_for(cross: &CrossSectionSpec, profile: &CoefficientProfile, e_max: f64) -> Result<ModeBudget> {
    let cap = e_max * profile.essential_bounds().sup_eps_mu;
    let (spectrum, exhausted) = CrossSectionSpectrum::up_to(cross, cap)?;
    if exhausted {
        let available = spectrum.dirichlet.len().min(spectrum.neumann.len());
        return Err(Error::InsufficientData {
            requested: available + 1,
            available,
        });
    }
    mode_budget(&spectrum, profile, e_max)
}

/// Spectrum of one mode up to `e_max`.
pub fn solve_mode(
    data: &Arc<LiouvilleData>,
    flavor: Flavor,
    mode_constant: f64,
    n_boundary: usize,
    e_max: f64,
    numerics: Numerics,
) -> Result<ModeOutcome> {
    let potential = build_potential(data, flavor, mode_constant, n_boundary)?;
    if potential.is_periodic() {
        let bands = band_structure(&potential, e_max)?;
        let spectrum = ModeSpectrum::from_bands(&potential, &bands);
        Ok(ModeOutcome {
            potential,
            result: ModeResult::Bands(bands),
            spectrum,
        })
    } else {
        let l = match numerics.window_halfwidth {
            Some(l) => l,
            None => default_window(&potential)?,
        };
        let n = numerics.grid.unwrap_or_else(|| default_grid(l));
        let states = bound_states(&potential, l, n)?;
        let spectrum = ModeSpectrum::from_bound_states(&potential, &states, e_max);
        Ok(ModeOutcome {
            potential,
            result: ModeResult::Bound(states),
            spectrum,
        })
    }
}

/// Runs `task` over `0..count` on up to `jobs` threads; results keep their index order.
pub fn parallel_map<T: Send>(count: usize, jobs: usize, task: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.max(1).min(count.max(1));
    if jobs == 1 {
        return (0..count).map(task).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = task(i);
                slots.lock().expect("no panics while holding the lock")[i] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .expect("threads joined")
        .into_iter()
        .map(|v| v.expect("every index is processed"))
        .collect()
}

/// Full analysis of one configuration.
pub struct Analysis {
    pub budget: ModeBudget,
    pub data: Arc<LiouvilleData>,
    pub outcomes: Vec<ModeOutcome>,
    pub report: SpectrumReport,
}

pub fn analyze(
    cross: &CrossSectionSpec,
    profile: &CoefficientProfile,
    e_max: f64,
    numerics: Numerics,
    jobs: usize,
) -> Result<Analysis> {
    let budget = budget_for(cross, profile, e_max)?;
    let data = Arc::new(LiouvilleData::build(profile, None)?);
    let n_boundary = cross.boundary_components();
    let modes = budget.modes();
    let results = parallel_map(modes.len(), jobs, |i| {
        let (flavor, c) = modes[i];
        solve_mode(&data, flavor, c, n_boundary, e_max, numerics)
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let report = assemble(
        outcomes.iter().map(|o| o.spectrum.clone()).collect(),
        n_boundary,
        Some(budget.clone()),
    )?;
    Ok(Analysis {
        budget,
        data,
        outcomes,
        report,
    })
}

/// One line of the weighted-versus-transformed comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    #[serde(flatten)]
    pub flavor: Flavor,
    pub mode_constant: f64,
    /// 1-based position in the ascending list.
    pub index: usize,
    /// Eigenvalue of the weighted operator discretized in `z`.
    pub weighted: f64,
    /// Eigenvalue of `−d²/dy² + V` discretized in `y`.
    pub transformed: f64,
    pub relative_deviation: f64,
}

/// The `count` lowest eigenvalues of one mode computed twice: in `z` on
/// `[−L, L]` and in `y` on the image window `[y(−L), y(L)]`, both with `grid`
/// intervals and Dirichlet ends.
pub fn oracle_comparison(
    data: &Arc<LiouvilleData>,
    flavor: Flavor,
    mode_constant: f64,
    n_boundary: usize,
    half_width: f64,
    grid: usize,
    count: usize,
) -> Result<Vec<OracleRow>> {
    let spec = WeightedOperatorSpec::new(flavor, mode_constant, data.profile().clone(), half_width, grid)?;
    let weighted = weighted_eigenvalues(&spec, count)?;
    let potential = build_potential(data, flavor, mode_constant, n_boundary)?;
    let (lo, hi) = (data.y_of_z(-half_width), data.y_of_z(half_width));
    let transformed = lowest_eigenvalues_on(&potential, lo, hi, grid, count)?;
    Ok(weighted
        .iter()
        .zip(&transformed)
        .enumerate()
        .map(|(i, (&w, &t))| OracleRow {
            flavor,
            mode_constant,
            index: i + 1,
            weighted: w,
            transformed: t,
            relative_deviation: (w - t).abs() / w.abs().max(f64::MIN_POSITIVE),
        })
        .collect())
}
