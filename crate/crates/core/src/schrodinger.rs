//! Spectral computations for `H = −d²/dy² + V(y)` on the real line.
//!
//! Decaying potentials: bound states below the threshold from the three-point
//! Dirichlet discretization on `[−L, L]`, counted by Sturm sequences and
//! Richardson-extrapolated from grids `n` and `2n`.
//!
//! Periodic potentials: the one-period monodromy matrix, its trace Δ(E) and the
//! band edges where `|Δ| = 2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::floquet::{floquet_eigenvalues, Floquet};
use crate::liouville::ModePotential;
use crate::ode::{propagate, Mat};
use crate::quadrature::integrate;
use crate::tridiag::SymTridiagonal;

/// `|V(±L) − threshold|` must be below this for a window to be accepted.
pub const WINDOW_TOLERANCE: f64 = 1e-6;
/// Target settling used when choosing a default window.
pub const DEFAULT_SETTLING: f64 = 1e-8;
/// Grid spacing used to choose a default grid size.
pub const DEFAULT_SPACING: f64 = 0.004;
/// Local tolerance of the monodromy integration.
pub const MONODROMY_TOLERANCE: f64 = 1e-12;
/// Gaps narrower than this are closed.
pub const CLOSED_GAP_WIDTH: f64 = 1e-9;
/// Required agreement between discriminant edges and one-period eigenvalues.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;

/// Bound states of a decaying potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStateResult {
    pub threshold: f64,
    /// Ascending, all below `threshold − margin`.
    pub eigenvalues: Vec<f64>,
    pub refinement_estimate: Vec<f64>,
    pub count: usize,
    pub margin: f64,
    pub window: (f64, f64),
    pub grid_size: usize,
}

fn threshold_of(potential: &ModePotential) -> Result<f64> {
    if potential.is_periodic() {
        return Err(invalid("bound states are computed for decaying potentials only"));
    }
    potential
        .threshold
        .ok_or_else(|| invalid("potential has no threshold"))
}

/// The tridiagonal matrix of `−u'' + Vu` with Dirichlet ends at `±L` on `n` intervals.
pub fn discretize(potential: &ModePotential, half_width: f64, n: usize) -> SymTridiagonal {
    discretize_on(potential, -half_width, half_width, n)
}

/// The same on an arbitrary window `[lo, hi]`.
pub fn discretize_on(potential: &ModePotential, lo: f64, hi: f64, n: usize) -> SymTridiagonal {
    let h = (hi - lo) / n as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag = (1..n)
        .map(|i| 2.0 * inv_h2 + potential.value(lo + i as f64 * h))
        .collect::<Vec<_>>();
    let off = vec![-inv_h2; n.saturating_sub(2)];
    SymTridiagonal::new(diag, off)
}

fn check_grid(half_width: f64, n: usize) -> Result<()> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::Window(format!("window half-width must be positive, got {half_width}")));
    }
    if n < 8 {
        return Err(invalid(format!("grid needs at least 8 intervals, got {n}")));
    }
    Ok(())
}

/// Checks that the potential has settled to its threshold at `±L`.
pub fn validate_window(potential: &ModePotential, half_width: f64) -> Result<()> {
    let threshold = threshold_of(potential)?;
    let tol = WINDOW_TOLERANCE * threshold.abs().max(1.0);
    for y in [-half_width, half_width] {
        let dev = (potential.value(y) - threshold).abs();
        if !(dev < tol) {
            return Err(Error::Window(format!(
                "potential differs from its threshold by {dev:e} at y = {y}; enlarge the window"
            )));
        }
    }
    Ok(())
}

/// Smallest `L` (from a geometric ladder) where `V` is within
/// [`DEFAULT_SETTLING`] of the threshold at both ends.
pub fn default_window(potential: &ModePotential) -> Result<f64> {
    let threshold = threshold_of(potential)?;
    let tol = DEFAULT_SETTLING * threshold.abs().max(1.0);
    let mut l = 4.0;
    while l < 1000.0 {
        let settled = [-l, l, -1.5 * l, 1.5 * l]
            .iter()
            .all(|&y| (potential.value(y) - threshold).abs() < tol);
        if settled {
            return Ok(l);
        }
        l *= 1.25;
    }
    Err(Error::Window("potential does not settle within |y| < 1000".into()))
}

/// Default grid for a window: spacing about [`DEFAULT_SPACING`], even, at least 2000.
pub fn default_grid(half_width: f64) -> usize {
    let n = (2.0 * half_width / DEFAULT_SPACING).ceil() as usize;
    (n.max(2000) + 1) & !1
}

/// Number of eigenvalues of the truncated operator strictly below `energy`.
pub fn count_below(potential: &ModePotential, energy: f64, half_width: f64, n: usize) -> Result<usize> {
    check_grid(half_width, n)?;
    Ok(discretize(potential, half_width, n).count_below(energy))
}

/// The `count` lowest eigenvalues of the operator truncated to `[lo, hi]`,
/// whether or not they lie below the threshold.
pub fn lowest_eigenvalues_on(potential: &ModePotential, lo: f64, hi: f64, n: usize, count: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Window(format!("degenerate window [{lo}, {hi}]")));
    }
    check_grid(1.0, n)?;
    Ok(discretize_on(potential, lo, hi, n).lowest(count))
}

/// Eigenvalues below the threshold on grids `n`, `2n` and `4n`, combined by
/// two levels of Richardson extrapolation. States that appear only on the
/// finer grids get fewer levels.
pub fn bound_states(potential: &ModePotential, half_width: f64, n: usize) -> Result<BoundStateResult> {
    check_grid(half_width, n)?;
    let threshold = threshold_of(potential)?;
    validate_window(potential, half_width)?;
    let levels: Vec<Vec<f64>> = [n, 2 * n, 4 * n]
        .iter()
        .map(|&m| discretize(potential, half_width, m).eigenvalues_below(threshold))
        .collect();
    let margin = 1e-10 * threshold.abs().max(1.0);
    let mut eigenvalues = Vec::new();
    let mut refinement_estimate = Vec::new();
    for (i, &e4) in levels[2].iter().enumerate() {
        let (value, estimate) = match (levels[0].get(i), levels[1].get(i)) {
            (Some(&e1), Some(&e2)) => {
                let r1 = (4.0 * e2 - e1) / 3.0;
                let r2 = (4.0 * e4 - e2) / 3.0;
                ((16.0 * r2 - r1) / 15.0, (r2 - r1).abs() / 15.0)
            }
            (_, Some(&e2)) => ((4.0 * e4 - e2) / 3.0, (e4 - e2).abs() / 3.0),
            _ => (e4, threshold - e4),
        };
        if value < threshold - margin {
            eigenvalues.push(value);
            refinement_estimate.push(estimate);
        }
    }
    Ok(BoundStateResult {
        threshold,
        count: eigenvalues.len(),
        eigenvalues,
        refinement_estimate,
        margin,
        window: (-half_width, half_width),
        grid_size: n,
    })
}

/// Bound states with the default window and grid.
pub fn bound_states_auto(potential: &ModePotential) -> Result<BoundStateResult> {
    let l = default_window(potential)?;
    bound_states(potential, l, default_grid(l))
}

/// Monodromy over one period together with its energy derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monodromy {
    pub matrix: Mat<2>,
    pub derivative: Mat<2>,
}

impl Monodromy {
    /// Δ(E) = tr M.
    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// dΔ/dE.
    pub fn trace_derivative(&self) -> f64 {
        self.derivative[0][0] + self.derivative[1][1]
    }

    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }
}

/// Transfer matrix of `(u, u')` over one period at energy `energy`.
pub fn monodromy(potential: &ModePotential, energy: f64) -> Result<Mat<2>> {
    Ok(monodromy_with_derivative(potential, energy)?.matrix)
}

/// Monodromy and `∂M/∂E` from the variational system, integrated in the `z`
/// chart where `dy/dz = s(z)`.
pub fn monodromy_with_derivative(potential: &ModePotential, energy: f64) -> Result<Monodromy> {
    let a = potential
        .z_period()
        .ok_or_else(|| invalid("monodromy needs a periodic potential"))?;
    let system = |z: f64| -> Mat<4> {
        let s = potential.dy_dz(z);
        let w = s * (potential.value_z(z) - energy);
        [[0.0, s, 0.0, 0.0], [w, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, s], [-s, 0.0, w, 0.0]]
    };
    let (p, _) = propagate(system, 0.0, a, MONODROMY_TOLERANCE)?;
    Ok(Monodromy {
        matrix: [[p[0][0], p[0][1]], [p[1][0], p[1][1]]],
        derivative: [[p[2][0], p[2][1]], [p[3][0], p[3][1]]],
    })
}

/// Δ(E) = tr M(E).
pub fn discriminant(potential: &ModePotential, energy: f64) -> Result<f64> {
    Ok(monodromy_with_derivative(potential, energy)?.trace())
}

/// One spectral band `[α_n, β_n]` (1-based `index`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    /// The band continues beyond `e_max`; `beta` is `e_max`.
    pub truncated: bool,
}

/// The gap `(β_n, α_{n+1})` after band `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Band-gap structure of a periodic potential up to `e_max`.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub period_b: f64,
    pub e_max: f64,
    /// Bands by index; consecutive bands touch where a gap is closed.
    pub raw_bands: Vec<Band>,
    /// Maximal disjoint intervals of the spectrum below `e_max`.
    pub bands: Vec<(f64, f64)>,
    /// Open gaps of positive length.
    pub gaps: Vec<Gap>,
    /// Gaps detected as closed (`β_n = α_{n+1}` within [`CLOSED_GAP_WIDTH`]).
    pub closed_gaps: Vec<Gap>,
    /// Largest deviation between edges and one-period eigenvalues.
    pub cross_check_deviation: f64,
    potential: ModePotential,
}

impl BandStructure {
    pub fn discriminant(&self, energy: f64) -> Result<f64> {
        discriminant(&self.potential, energy)
    }

    /// All band edges below `e_max` in ascending order, closed gaps counted twice.
    pub fn edges(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.raw_bands {
            out.push(b.alpha);
            if !b.truncated {
                out.push(b.beta);
            }
        }
        out
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.bands.iter().any(|&(lo, hi)| lo <= energy && energy <= hi)
    }
}

/// Roots of `det(A + tB) = 0` for 2×2 matrices, smallest magnitude first.
fn pencil_roots(a: &Mat<2>, b: &Mat<2>) -> (f64, f64) {
    let qa = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let qb = a[0][0] * b[1][1] + a[1][1] * b[0][0] - a[0][1] * b[1][0] - a[1][0] * b[0][1];
    let qc = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = qb.abs().max(qa.abs()).max(qc.abs());
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    if qa.abs() <= 1e-14 * scale {
        let t = if qb != 0.0 { -qc / qb } else { 0.0 };
        return (t, t);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        let t = -qb / (2.0 * qa);
        return (t, t);
    }
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / qa, qc / q) };
    if r1.abs() <= r2.abs() {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

fn shifted(m: &Mat<2>, sigma: f64) -> Mat<2> {
    [[m[0][0] - sigma, m[0][1]], [m[1][0], m[1][1] - sigma]]
}

/// Newton iteration on the pencil `det(M(E) − σI + t M_E(E)) = 0`, kept inside `[lo, hi]`.
fn polish_edge(potential: &ModePotential, sigma: f64, mut e: f64, lo: f64, hi: f64) -> Result<f64> {
    for _ in 0..30 {
        let m = monodromy_with_derivative(potential, e)?;
        let (t, _) = pencil_roots(&shifted(&m.matrix, sigma), &m.derivative);
        let next = (e + t).clamp(lo, hi);
        let step = (next - e).abs();
        e = next;
        if step <= 4.0 * f64::EPSILON * e.abs().max(1.0) {
            break;
        }
    }
    Ok(e)
}

/// Root of `σΔ − 2` on `[lo, hi]` where it is monotone with a sign change,
/// by Newton steps safeguarded with bisection.
fn edge_in_bracket(potential: &ModePotential, sigma: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f = |e: f64| -> Result<(f64, f64)> {
        let m = monodromy_with_derivative(potential, e)?;
        Ok((sigma * m.trace() - 2.0, sigma * m.trace_derivative()))
    };
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Resolution(format!(
            "band edge not bracketed in [{lo}, {hi}]; refine the energy scan"
        )));
    }
    let lo_sign = flo.signum();
    let mut e = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fe, de) = f(e)?;
        if fe == 0.0 {
            return Ok(e);
        }
        if fe.signum() == lo_sign {
            lo = e;
        } else {
            hi = e;
        }
        if hi - lo <= 1e-10 * e.abs().max(1.0) {
            break;
        }
        let newton = e - fe / de;
        e = if de != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(0.5 * (lo + hi))
}

/// Critical point of Δ in `[lo, hi]` where `Δ'` changes sign.
fn critical_point(potential: &ModePotential, mut lo: f64, mut hi: f64) -> Result<f64> {
    let d = |e: f64| -> Result<f64> { Ok(monodromy_with_derivative(potential, e)?.trace_derivative()) };
    let lo_sign = d(lo)?.signum();
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid)?.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples of the energy scan per `π/b` in `k = √(E − E₀)`.
const SCAN_DENSITY: usize = 48;

/// Band edges of a periodic potential up to `e_max`.
///
/// Δ is scanned on a grid uniform in `k = √(E − E₀)`, which tracks the
/// asymptotic band spacing. Each sign change of Δ' marks the single critical
/// point inside a gap; the gap edges are the roots of `σΔ = 2` on the
/// monotone pieces to either side, polished by Newton steps on the matrix
/// pencil `M − σI + t ∂M/∂E`. The result is checked against the sorted union
/// of periodic and antiperiodic eigenvalues.
pub fn band_structure(potential: &ModePotential, e_max: f64) -> Result<BandStructure> {
    let b = potential
        .period()
        .ok_or_else(|| invalid("band structure needs a periodic potential"))?;
    let a = potential.z_period().expect("periodic");
    let vmin = (0..512)
        .map(|j| potential.value_z(a * j as f64 / 512.0))
        .fold(f64::INFINITY, f64::min);
    if !(e_max > vmin) {
        return Err(invalid(format!("e_max = {e_max} must exceed min V = {vmin}")));
    }
    let e0 = vmin - 1.0;
    let dk = std::f64::consts::PI / b / SCAN_DENSITY as f64;
    let k_top = (e_max - e0).sqrt() + std::f64::consts::PI / b;
    let steps = (k_top / dk).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| e0 + (i as f64 * dk).powi(2)).collect();
    let mut scan = Vec::with_capacity(grid.len());
    for &e in &grid {
        scan.push(monodromy_with_derivative(potential, e)?);
    }
    if scan[0].trace() < 2.0 {
        return Err(Error::NumericalFailure(format!(
            "discriminant below 2 under the potential minimum (Δ = {})",
            scan[0].trace()
        )));
    }
    // critical points of Δ
    let mut crits = Vec::new();
    for i in 1..scan.len() {
        let (d0, d1) = (scan[i - 1].trace_derivative(), scan[i].trace_derivative());
        if d0 == 0.0 {
            crits.push(grid[i - 1]);
        } else if d0.signum() != d1.signum() && d1 != 0.0 {
            crits.push(critical_point(potential, grid[i - 1], grid[i])?);
        }
    }
    let top = *grid.last().expect("nonempty");
    // α_1
    let first_hi = crits.first().copied().unwrap_or(top);
    // No critical point and Δ > 2 throughout: the spectrum starts above the scan.
    let above_scan = crits.is_empty() && scan.last().expect("nonempty").trace() > 2.0;
    let alpha1 = if above_scan {
        f64::INFINITY
    } else {
        polish_edge(potential, 1.0, edge_in_bracket(potential, 1.0, e0, first_hi)?, e0, first_hi)?
    };
    let mut raw = Vec::new();
    let mut gaps = Vec::new();
    let mut closed = Vec::new();
    let mut alpha = alpha1;
    for (j, &ec) in crits.iter().enumerate() {
        let left = if j == 0 { alpha1 } else { crits[j - 1] };
        let right = crits.get(j + 1).copied().unwrap_or(top);
        let m = monodromy_with_derivative(potential, ec)?;
        let sigma = if m.trace() >= 0.0 { 1.0 } else { -1.0 };
        let excess = sigma * m.trace() - 2.0;
        // The scan may end inside this gap; the next band then starts above it.
        let open_above = j + 1 == crits.len() && sigma * scan.last().expect("nonempty").trace() - 2.0 > 0.0;
        let (lo_edge, hi_edge) = if excess > 1e-4 || open_above {
            let l = edge_in_bracket(potential, sigma, left, ec)?;
            let l = polish_edge(potential, sigma, l, left, ec)?;
            if open_above {
                (l, f64::INFINITY)
            } else {
                let r = edge_in_bracket(potential, sigma, ec, right)?;
                (l, polish_edge(potential, sigma, r, ec, right)?)
            }
        } else {
            let (t1, t2) = pencil_roots(&shifted(&m.matrix, sigma), &m.derivative);
            let (s1, s2) = (ec + t1.min(t2), ec + t1.max(t2));
            let l = polish_edge(potential, sigma, s1.clamp(left, ec), left, ec)?;
            let r = polish_edge(potential, sigma, s2.clamp(ec, right), ec, right)?;
            (l, r)
        };
        let index = j + 1;
        if lo_edge >= e_max {
            break;
        }
        raw.push(Band {
            index,
            alpha,
            beta: lo_edge,
            truncated: false,
        });
        let gap = Gap {
            index,
            lo: lo_edge,
            hi: hi_edge.max(lo_edge).min(top),
        };
        if gap.width() < CLOSED_GAP_WIDTH {
            closed.push(gap);
        } else {
            gaps.push(gap);
        }
        alpha = hi_edge.max(lo_edge);
        if alpha >= e_max {
            break;
        }
    }
    if alpha < e_max {
        raw.push(Band {
            index: raw.len() + 1,
            alpha,
            beta: e_max,
            truncated: true,
        });
    }
    let mut bands: Vec<(f64, f64)> = Vec::new();
    for band in &raw {
        match bands.last_mut() {
            Some(last) if band.alpha - last.1 < CLOSED_GAP_WIDTH => last.1 = band.beta,
            _ => bands.push((band.alpha, band.beta)),
        }
    }
    let mut structure = BandStructure {
        period_b: b,
        e_max,
        raw_bands: raw,
        bands,
        gaps,
        closed_gaps: closed,
        cross_check_deviation: 0.0,
        potential: potential.clone(),
    };
    structure.cross_check_deviation = cross_check(&structure)?;
    Ok(structure)
}

/// Compares the band edges with the merged periodic/antiperiodic spectrum.
fn cross_check(structure: &BandStructure) -> Result<f64> {
    let e_max = structure.e_max;
    let mut reference = floquet_eigenvalues(&structure.potential, Floquet::Periodic, e_max)?;
    reference.extend(floquet_eigenvalues(&structure.potential, Floquet::Antiperiodic, e_max)?);
    reference.sort_by(f64::total_cmp);
    let edges = structure.edges();
    // Edges within the tolerance of e_max may fall on either side.
    let guard = CROSS_CHECK_TOLERANCE * e_max.abs().max(1.0);
    let edges: Vec<f64> = edges.into_iter().filter(|e| *e < e_max - guard).collect();
    let reference: Vec<f64> = reference.into_iter().filter(|e| *e < e_max - guard).collect();
    if edges.len() != reference.len() {
        return Err(Error::Resolution(format!(
            "found {} band edges but {} one-period eigenvalues below {e_max}; refine the energy scan",
            edges.len(),
            reference.len()
        )));
    }
    let mut worst = 0.0f64;
    for (e, r) in edges.iter().zip(&reference) {
        let dev = (e - r).abs() / r.abs().max(1.0);
        worst = worst.max(dev);
    }
    if worst > CROSS_CHECK_TOLERANCE {
        return Err(Error::Resolution(format!(
            "band edges deviate from one-period eigenvalues by {worst:e}; refine the energy scan"
        )));
    }
    Ok(worst)
}

/// Outcome of the trapezoid test function `ζ` centred at `y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalBound {
    pub delta1: f64,
    pub delta2: f64,
    pub y0: f64,
    /// `h[ζ]/‖ζ‖²`
    pub quotient: f64,
    /// `∫ ζ'² + (η² ∓ η')ζ²`, independent of the mode constant.
    pub alpha: f64,
    /// `α/(2δ₁δ₂)`: any mode constant above it binds a state.
    pub sufficient_constant: f64,
    pub norm_sq: f64,
}

/// Integral of `g(y) ζ(y)^p` over the support of the trapezoid.
fn trapezoid_integral(g: impl Fn(f64) -> f64, y0: f64, d1: f64, power: i32) -> Result<f64> {
    let zeta = |y: f64| (2.0 - (y - y0).abs() / d1).clamp(0.0, 1.0);
    let f = |y: f64| g(y) * zeta(y).powi(power);
    let tol = 1e-12;
    Ok(integrate(f, y0 - 2.0 * d1, y0 - d1, tol)?
        + integrate(f, y0 - d1, y0 + d1, tol)?
        + integrate(f, y0 + d1, y0 + 2.0 * d1, tol)?)
}

/// Largest `δ₂` with `1/(ε̃μ̃) ≤ 1/(ε*μ*) − δ₂` on `|y − y0| < 2δ₁`.
pub fn admissible_delta2(potential: &ModePotential, y0: f64, delta1: f64) -> Result<f64> {
    let data = potential
        .transform()
        .ok_or_else(|| invalid("the variational test needs a transformed potential"))?;
    let (e, m) = data
        .profile()
        .limits()
        .ok_or_else(|| invalid("the variational test needs a stabilizing profile"))?;
    let samples = 400;
    let worst = (0..=samples)
        .map(|i| {
            let y = y0 - 2.0 * delta1 + 4.0 * delta1 * i as f64 / samples as f64;
            data.gauge_z(data.z_of_y(y)).inv_eps_mu
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 / (e * m) - worst)
}

/// `h[ζ]/‖ζ‖²` for the trapezoid `ζ` (plateau `|y − y0| ≤ δ₁`, support `|y − y0| ≤ 2δ₁`).
pub fn variational_upper_bound(potential: &ModePotential, delta1: f64, delta2: f64, y0: f64) -> Result<VariationalBound> {
    if !(delta1 > 0.0 && delta2 > 0.0) {
        return Err(Error::InvalidWitness(format!(
            "δ₁ and δ₂ must be positive, got {delta1}, {delta2}"
        )));
    }
    let slack = admissible_delta2(potential, y0, delta1)?;
    if delta2 > slack {
        return Err(Error::InvalidWitness(format!(
            "1/(ε̃μ̃) exceeds 1/(ε*μ*) − δ₂ near y0 = {y0} (largest admissible δ₂ is {slack:e})"
        )));
    }
    let data = potential.transform().expect("checked above");
    let c = potential.mode_constant;
    let gauge = |y: f64| potential.value(y) - c * data.gauge_z(data.z_of_y(y)).inv_eps_mu;
    let slope = 2.0 / delta1; // ∫ζ'² = 2δ₁ · (1/δ₁)²
    let norm_sq = 8.0 * delta1 / 3.0;
    let alpha = slope + trapezoid_integral(gauge, y0, delta1, 2)?;
    let h = slope + trapezoid_integral(|y| potential.value(y), y0, delta1, 2)?;
    Ok(VariationalBound {
        delta1,
        delta2,
        y0,
        quotient: h / norm_sq,
        alpha,
        sufficient_constant: alpha / (2.0 * delta1 * delta2),
        norm_sq,
    })
}

/// Grid search over `δ₁` (with the largest admissible `δ₂`) minimizing the
/// sufficient mode constant `α/(2δ₁δ₂)`.
pub fn find_witness(potential: &ModePotential, y0: f64) -> Result<VariationalBound> {
    let mut best: Option<VariationalBound> = None;
    for i in 0..60 {
        let d1 = 0.02 * (250.0f64).powf(i as f64 / 59.0);
        let d2 = admissible_delta2(potential, y0, d1)?;
        if !(d2 > 0.0) {
            continue;
        }
        let bound = variational_upper_bound(potential, d1, d2, y0)?;
        if best.is_none_or(|b| bound.sufficient_constant < b.sufficient_constant) {
            best = Some(bound);
        }
    }
    best.ok_or_else(|| {
        Error::InvalidWitness(format!(
            "no δ₁, δ₂ > 0 satisfy the product condition around y0 = {y0}"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sech2(y: f64) -> f64 {
        1.0 / y.cosh().powi(2)
    }

    fn dense_eigenvalues(t: &SymTridiagonal) -> Vec<f64> {
        let n = t.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.diag[i]
            } else if i + 1 == j {
                t.off[i]
            } else if j + 1 == i {
                t.off[j]
            } else {
                0.0
            }
        });
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn constant_potential_has_no_bound_states() {
        let v = ModePotential::analytic(|_| 3.0, Some(3.0), None, 3.0);
        let r = bound_states(&v, 10.0, 1000).unwrap();
        assert_eq!(r.count, 0);
    }

    #[test]
    fn reflectionless_well() {
        let c = 5.0;
        let v = ModePotential::analytic(move |y| c - 2.0 * sech2(y), Some(c), None, c - 2.0);
        let r = bound_states(&v, 15.0, 4000).unwrap();
        assert_eq!(r.count, 1);
        // oracle: dense solves on coarser grids, extrapolated the same way
        let dense = dense_eigenvalues(&discretize(&v, 15.0, 800));
        let dense_fine = dense_eigenvalues(&discretize(&v, 15.0, 1600));
        let oracle = (4.0 * dense_fine[0] - dense[0]) / 3.0;
        assert!((r.eigenvalues[0] - oracle).abs() < 1e-6);
        assert!((r.eigenvalues[0] - (c - 1.0)).abs() < 1e-4);
    }

    #[test]
    fn shallow_well_binds_once() {
        let c = 1.0;
        let v = ModePotential::analytic(move |y| c - 0.1 * sech2(y), Some(c), None, c - 0.1);
        let r = bound_states(&v, 150.0, 30000).unwrap();
        assert_eq!(r.count, 1);
        assert!(r.eigenvalues[0] > c - 0.1 && r.eigenvalues[0] < c);
    }

    #[test]
    fn sturm_counts() {
        let v = ModePotential::analytic(|y| -2.0 * sech2(y), Some(0.0), None, -2.0);
        assert_eq!(count_below(&v, -0.5, 15.0, 2000).unwrap(), 1);
        assert_eq!(count_below(&v, -1.5, 15.0, 2000).unwrap(), 0);
        let free = ModePotential::analytic(|_| 0.0, Some(0.0), None, 0.0);
        assert_eq!(count_below(&free, -1.0, 15.0, 2000).unwrap(), 0);
    }

    #[test]
    fn sturm_matches_dense() {
        let v = ModePotential::analytic(|y| 3.0 - 6.0 * (-y * y / 4.0).exp() + 0.2 * y.sin(), Some(3.0), None, -4.0);
        let t = discretize(&v, 12.0, 600);
        let dense = dense_eigenvalues(&t);
        let ours = t.lowest(40);
        for (a, b) in ours.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
    }

    #[test]
    fn window_must_settle() {
        let v = ModePotential::analytic(|y| 1.0 - (-y * y / 50.0).exp(), Some(1.0), None, 0.0);
        assert!(matches!(bound_states(&v, 5.0, 1000), Err(Error::Window(_))));
    }

    #[test]
    fn free_monodromy() {
        let b = 1.7;
        let c = 2.0;
        let v = ModePotential::analytic(move |_| c, None, Some(b), c);
        for e in [2.5, 7.0, 30.0] {
            let d = discriminant(&v, e).unwrap();
            assert!((d - 2.0 * (b * (e - c).sqrt()).cos()).abs() < 1e-10);
        }
        let m = monodromy(&v, c).unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-12 && (m[0][1] - b).abs() < 1e-12);
        assert!(m[1][0].abs() < 1e-12 && (m[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_band_structure() {
        let v = ModePotential::analytic(|_| 1.0, None, Some(2.0), 1.0);
        let bs = band_structure(&v, 40.0).unwrap();
        assert_eq!(bs.bands.len(), 1);
        assert!((bs.bands[0].0 - 1.0).abs() < 1e-9);
        assert_eq!(bs.bands[0].1, 40.0);
        assert!(bs.gaps.is_empty());
    }

    #[test]
    fn mathieu_gap() {
        let q = 0.5;
        let v = ModePotential::analytic(move |y| 2.0 * q * (2.0 * y).cos(), None, Some(std::f64::consts::PI), -1.0);
        let m = monodromy(&v, 1.0).unwrap();
        assert!((m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).abs() < 1e-9);
        let bs = band_structure(&v, 30.0).unwrap();
        let g = bs.gaps[0];
        assert!(g.lo < 1.0 && g.hi > 1.0);
        assert!((g.width() - 2.0 * q).abs() < 0.2 * 2.0 * q, "width {}", g.width());
        assert!(bs.cross_check_deviation < 1e-6);
    }
}
