//! Direct discretization of the weighted operators in the axial variable:
//!
//! `A^el = −(1/μ) d/dz((1/ε) d/dz) + λ/(εμ)` in `L²(ℝ, μ dz)`,
//!
//! with `A^m` obtained by exchanging ε and μ and `A⁰ = A^el` at `λ = 0`.
//! Nothing here uses the Liouville transform.
//!
//! The stiffness matrix has face coefficients `2/(ε_i + ε_{i+1})` and the
//! diagonal mass matrix `μ_i h`; the pencil is reduced to the symmetric
//! tridiagonal matrix `M^{-1/2} K M^{-1/2}`.

use crate::error::{invalid, Result};
use crate::liouville::Flavor;
use crate::profile::{CoefficientProfile, ProfileFamily};
use crate::tridiag::SymTridiagonal;

/// One weighted operator truncated to `[−L, L]` with Dirichlet ends.
#[derive(Debug, Clone)]
pub struct WeightedOperatorSpec {
    pub flavor: Flavor,
    pub mode_constant: f64,
    pub profile: CoefficientProfile,
    pub half_width: f64,
    /// Number of grid intervals.
    pub grid: usize,
}

impl WeightedOperatorSpec {
    pub fn new(flavor: Flavor, mode_constant: f64, profile: CoefficientProfile, half_width: f64, grid: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(format!("window half-width must be positive, got {half_width}")));
        }
        if grid < 4 {
            return Err(invalid(format!("grid needs at least 4 intervals, got {grid}")));
        }
        if !(mode_constant.is_finite() && mode_constant >= 0.0) {
            return Err(invalid(format!("mode constant must be nonnegative, got {mode_constant}")));
        }
        if flavor == Flavor::Zero && mode_constant != 0.0 {
            return Err(invalid("the zero branch has mode constant 0"));
        }
        if flavor == Flavor::External {
            return Err(invalid("weighted operators are defined for el, m and zero flavors"));
        }
        Ok(WeightedOperatorSpec {
            flavor,
            mode_constant,
            profile,
            half_width,
            grid,
        })
    }

    fn step(&self) -> f64 {
        2.0 * self.half_width / self.grid as f64
    }

    /// `(stiffness weight, mass weight)`: `(ε, μ)`, exchanged for the m flavor.
    fn weights(&self) -> (&ProfileFamily, &ProfileFamily) {
        match self.flavor {
            Flavor::Magnetic(_) => (&self.profile.mu, &self.profile.epsilon),
            _ => (&self.profile.epsilon, &self.profile.mu),
        }
    }

    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.step();
        let (stiff, mass) = self.weights();
        (0..=self.grid)
            .map(|i| {
                let z = -self.half_width + i as f64 * h;
                (stiff.eval(z, 0), mass.eval(z, 0))
            })
            .unzip()
    }

    /// The symmetric tridiagonal form on the interior nodes.
    pub fn matrix(&self) -> SymTridiagonal {
        let h = self.step();
        let (e, m) = self.nodes();
        let face = |i: usize| 2.0 / (e[i] + e[i + 1]);
        let n = self.grid;
        let diag = (1..n)
            .map(|i| ((face(i - 1) + face(i)) / h + self.mode_constant * h / e[i]) / (m[i] * h))
            .collect();
        let off = (1..n - 1)
            .map(|i| -face(i) / h / (h * (m[i] * m[i + 1]).sqrt()))
            .collect();
        SymTridiagonal::new(diag, off)
    }
}

/// The `how_many` lowest eigenvalues, ascending.
pub fn weighted_eigenvalues(spec: &WeightedOperatorSpec, how_many: usize) -> Result<Vec<f64>> {
    if how_many == 0 {
        return Err(invalid("ask for at least one eigenvalue"));
    }
    Ok(spec.matrix().lowest(how_many))
}

/// Discrete `∫ ε⁻¹(|p'|² + λ|p|²) dz` for nodal values `p_0 … p_n` with
/// `p_0 = p_n = 0`; this is exactly `pᵀ K p` for the stiffness matrix used above.
pub fn quadratic_form_value(spec: &WeightedOperatorSpec, p: &[f64]) -> Result<f64> {
    check_grid_function(spec, p)?;
    let h = spec.step();
    let (e, _) = spec.nodes();
    let kinetic: f64 = (0..spec.grid)
        .map(|i| 2.0 / (e[i] + e[i + 1]) * (p[i + 1] - p[i]).powi(2) / h)
        .sum();
    let potential: f64 = (1..spec.grid).map(|i| h * p[i] * p[i] / e[i]).sum();
    Ok(kinetic + spec.mode_constant * potential)
}

/// Discrete `∫ μ |p|² dz` matching the mass matrix.
pub fn weighted_norm_sq(spec: &WeightedOperatorSpec, p: &[f64]) -> Result<f64> {
    check_grid_function(spec, p)?;
    let h = spec.step();
    let (_, m) = spec.nodes();
    Ok((1..spec.grid).map(|i| h * m[i] * p[i] * p[i]).sum())
}

fn check_grid_function(spec: &WeightedOperatorSpec, p: &[f64]) -> Result<()> {
    if p.len() != spec.grid + 1 {
        return Err(invalid(format!(
            "grid function has {} values, expected {}",
            p.len(),
            spec.grid + 1
        )));
    }
    let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p[0].abs() > 1e-12 * scale || p[spec.grid].abs() > 1e-12 * scale {
        return Err(invalid("grid function must vanish at both ends"));
    }
    Ok(())
}
