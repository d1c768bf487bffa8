//! Dirichlet and Neumann Laplace eigenvalues of the cylinder cross-section.
//!
//! Rectangles and disks have semi-analytic spectra. Any other domain enters as
//! a `Synthetic` list of eigenvalues together with its number of boundary
//! components; only those numbers are consumed downstream.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossSectionSpec {
    Rectangle {
        width: f64,
        height: f64,
    },
    Disk {
        radius: f64,
    },
    Synthetic {
        dirichlet: Vec<f64>,
        neumann: Vec<f64>,
        boundary_components: usize,
    },
}

impl CrossSectionSpec {
    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        let spec = CrossSectionSpec::Rectangle { width, height };
        spec.validate()?;
        Ok(spec)
    }

    pub fn disk(radius: f64) -> Result<Self> {
        let spec = CrossSectionSpec::Disk { radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn synthetic(dirichlet: Vec<f64>, neumann: Vec<f64>, boundary_components: usize) -> Result<Self> {
        let spec = CrossSectionSpec::Synthetic {
            dirichlet,
            neumann,
            boundary_components,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Build a synthetic spec from two files holding one eigenvalue per line.
    pub fn synthetic_from_csv(
        dirichlet: impl AsRef<Path>,
        neumann: impl AsRef<Path>,
        boundary_components: usize,
    ) -> Result<Self> {
        let d = read_eigenvalue_file(dirichlet.as_ref())?;
        let n = read_eigenvalue_file(neumann.as_ref())?;
        Self::synthetic(d, n, boundary_components)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CrossSectionSpec::Rectangle { width, height } => {
                if !(width.is_finite() && *width > 0.0 && height.is_finite() && *height > 0.0) {
                    return Err(invalid(format!(
                        "rectangle dimensions must be positive, got {width} x {height}"
                    )));
                }
            }
            CrossSectionSpec::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid(format!("disk radius must be positive, got {radius}")));
                }
            }
            CrossSectionSpec::Synthetic {
                dirichlet,
                neumann,
                boundary_components,
            } => {
                if *boundary_components < 1 {
                    return Err(invalid("boundary_components must be at least 1"));
                }
                if dirichlet.is_empty() {
                    return Err(invalid("synthetic Dirichlet list is empty"));
                }
                if !is_sorted(dirichlet) || dirichlet.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(invalid("synthetic Dirichlet list must be positive and nondecreasing"));
                }
                if neumann.first() != Some(&0.0) {
                    return Err(invalid("synthetic Neumann list must begin with 0"));
                }
                if !is_sorted(neumann) || neumann[1..].iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(invalid(
                        "synthetic Neumann list must be nondecreasing with exactly one zero",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of connected components of the boundary.
    pub fn boundary_components(&self) -> usize {
        match self {
            CrossSectionSpec::Synthetic {
                boundary_components, ..
            } => *boundary_components,
            _ => 1,
        }
    }

    /// How many eigenvalues a synthetic list can supply; `None` for built-in geometries.
    pub fn available(&self) -> Option<(usize, usize)> {
        match self {
            CrossSectionSpec::Synthetic { dirichlet, neumann, .. } => Some((dirichlet.len(), neumann.len())),
            _ => None,
        }
    }
}

fn is_sorted(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

fn read_eigenvalue_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let field = l.split(',').next().unwrap_or(l).trim();
            field
                .parse::<f64>()
                .map_err(|e| invalid(format!("{}: bad eigenvalue {field:?}: {e}", path.display())))
        })
        .collect()
}

/// First `count` Dirichlet eigenvalues, nondecreasing, multiplicities repeated.
pub fn dirichlet_eigenvalues(spec: &CrossSectionSpec, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    spec.validate()?;
    match spec {
        CrossSectionSpec::Rectangle { width, height } => Ok(rectangle_levels(*width, *height, count, 1)),
        CrossSectionSpec::Disk { radius } => Ok(disk_levels(*radius, count, Boundary::Dirichlet)),
        CrossSectionSpec::Synthetic { dirichlet, .. } => take(dirichlet, count),
    }
}

/// First `count` Neumann eigenvalues; the leading 0 appears exactly once.
pub fn neumann_eigenvalues(spec: &CrossSectionSpec, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    spec.validate()?;
    match spec {
        CrossSectionSpec::Rectangle { width, height } => Ok(rectangle_levels(*width, *height, count, 0)),
        CrossSectionSpec::Disk { radius } => Ok(disk_levels(*radius, count, Boundary::Neumann)),
        CrossSectionSpec::Synthetic { neumann, .. } => take(neumann, count),
    }
}

fn take(list: &[f64], count: usize) -> Result<Vec<f64>> {
    if list.len() < count {
        return Err(Error::InsufficientData {
            requested: count,
            available: list.len(),
        });
    }
    Ok(list[..count].to_vec())
}

/// `π²(m²/w² + n²/h²)` with `m, n ≥ min_index`, excluding `m = n = 0`.
/// Ties are ordered by `(m, n)`.
fn rectangle_levels(width: f64, height: f64, count: usize, min_index: u64) -> Vec<f64> {
    let level = |m: u64, n: u64| PI * PI * ((m * m) as f64 / (width * width) + (n * n) as f64 / (height * height));
    let mut cap = level(1, 1).max(PI * PI / width.max(height).powi(2));
    loop {
        let mut found: Vec<(f64, u64, u64)> = Vec::new();
        let m_max = (width * cap.sqrt() / PI).floor() as u64 + 1;
        let n_max = (height * cap.sqrt() / PI).floor() as u64 + 1;
        for m in min_index..=m_max {
            for n in min_index..=n_max {
                if m == 0 && n == 0 {
                    if min_index == 0 {
                        found.push((0.0, 0, 0));
                    }
                    continue;
                }
                let v = level(m, n);
                if v <= cap {
                    found.push((v, m, n));
                }
            }
        }
        if found.len() >= count {
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            return found.into_iter().take(count).map(|t| t.0).collect();
        }
        cap *= 2.0;
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Boundary {
    Dirichlet,
    Neumann,
}

/// Disk levels `(j_{m,n}/R)²` or `(j'_{m,n}/R)²`; orders `m ≥ 1` carry multiplicity 2.
fn disk_levels(radius: f64, count: usize, bc: Boundary) -> Vec<f64> {
    // Weyl: N(λ) ≈ R²λ/4, so start from a cap that should hold `count` levels.
    let mut x_cap = (4.0 * count as f64 + 16.0).sqrt().max(4.0);
    loop {
        let mut found: Vec<(f64, u32, usize)> = Vec::new();
        if bc == Boundary::Neumann {
            found.push((0.0, 0, 0));
        }
        let mut m = 0u32;
        while (m as f64) < x_cap {
            let zeros = match bc {
                Boundary::Dirichlet => bessel::bessel_zeros(m, x_cap),
                Boundary::Neumann => bessel::bessel_prime_zeros(m, x_cap),
            };
            let mult = if m == 0 { 1 } else { 2 };
            for (n, z) in zeros.into_iter().enumerate() {
                let v = (z / radius).powi(2);
                for _ in 0..mult {
                    found.push((v, m, n));
                }
            }
            m += 1;
        }
        if found.len() >= count {
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            return found.into_iter().take(count).map(|t| t.0).collect();
        }
        x_cap *= 1.5;
    }
}

/// Cross-section eigenvalue data consumed by the rest of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpectrum {
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
    pub n_boundary_components: usize,
}

impl CrossSectionSpectrum {
    /// Compute the first `dirichlet_count` / `neumann_count` eigenvalues and
    /// reject data violating `κ₂ < λ₁`.
    pub fn compute(spec: &CrossSectionSpec, dirichlet_count: usize, neumann_count: usize) -> Result<Self> {
        let spectrum = CrossSectionSpectrum {
            dirichlet: dirichlet_eigenvalues(spec, dirichlet_count)?,
            neumann: neumann_eigenvalues(spec, neumann_count.max(2))?,
            n_boundary_components: spec.boundary_components(),
        };
        if !validate_friedlander(&spectrum) {
            return Err(invalid(format!(
                "cross-section data violate kappa_2 < lambda_1 (kappa_2 = {}, lambda_1 = {})",
                spectrum.neumann[1], spectrum.dirichlet[0]
            )));
        }
        Ok(spectrum)
    }

    /// All eigenvalues of both kinds not exceeding `cap`, growing the lists as
    /// needed. Synthetic lists are returned in full when they end below `cap`.
    pub fn up_to(spec: &CrossSectionSpec, cap: f64) -> Result<(Self, bool)> {
        let mut count = 8usize;
        loop {
            let (d_avail, n_avail) = spec.available().unwrap_or((usize::MAX, usize::MAX));
            let dc = count.min(d_avail);
            let nc = count.min(n_avail);
            let spectrum = Self::compute(spec, dc, nc)?;
            let d_done = spectrum.dirichlet.last().is_some_and(|&v| v > cap) || dc == d_avail;
            let n_done = spectrum.neumann.last().is_some_and(|&v| v > cap) || nc == n_avail;
            if d_done && n_done {
                let exhausted = (dc == d_avail && spectrum.dirichlet.last().is_some_and(|&v| v <= cap))
                    || (nc == n_avail && spectrum.neumann.last().is_some_and(|&v| v <= cap));
                return Ok((spectrum, exhausted));
            }
            count *= 2;
        }
    }
}

/// True iff `κ₂ < λ₁` strictly.
pub fn validate_friedlander(spectrum: &CrossSectionSpectrum) -> bool {
    match (spectrum.neumann.get(1), spectrum.dirichlet.first()) {
        (Some(k2), Some(l1)) => k2 < l1,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn unit_square_dirichlet() {
        let s = CrossSectionSpec::rectangle(1.0, 1.0).unwrap();
        let d = dirichlet_eigenvalues(&s, 3).unwrap();
        let pi2 = PI * PI;
        assert!(rel(d[0], 2.0 * pi2) < 1e-12);
        assert!(rel(d[1], 5.0 * pi2) < 1e-12);
        assert!(rel(d[2], 5.0 * pi2) < 1e-12);
    }

    #[test]
    fn rectangle_one_by_two() {
        let s = CrossSectionSpec::rectangle(1.0, 2.0).unwrap();
        let d = dirichlet_eigenvalues(&s, 1).unwrap();
        assert!(rel(d[0], PI * PI * 1.25) < 1e-12);
    }

    #[test]
    fn unit_square_neumann() {
        let s = CrossSectionSpec::rectangle(1.0, 1.0).unwrap();
        let n = neumann_eigenvalues(&s, 3).unwrap();
        assert_eq!(n[0], 0.0);
        assert!(rel(n[1], PI * PI) < 1e-12);
        assert!(rel(n[2], PI * PI) < 1e-12);
    }

    #[test]
    fn disk_first_levels() {
        let s = CrossSectionSpec::disk(1.0).unwrap();
        let d = dirichlet_eigenvalues(&s, 1).unwrap();
        assert!(rel(d[0], 2.404_825_557_695_773f64.powi(2)) < 1e-12);
        let n = neumann_eigenvalues(&s, 2).unwrap();
        assert_eq!(n[0], 0.0);
        assert!(rel(n[1], 1.841_183_781_340_659f64.powi(2)) < 1e-12);
    }

    #[test]
    fn disk_multiplicities() {
        let s = CrossSectionSpec::disk(2.0).unwrap();
        let d = dirichlet_eigenvalues(&s, 3).unwrap();
        // j_{0,1}, then j_{1,1} twice
        assert!(d[1] == d[2]);
        assert!(rel(d[1], (3.831_705_970_207_512f64 / 2.0).powi(2)) < 1e-12);
    }

    #[test]
    fn synthetic_passthrough_and_shortage() {
        let s = CrossSectionSpec::synthetic(vec![10.0], vec![0.0, 3.0], 2).unwrap();
        assert_eq!(neumann_eigenvalues(&s, 2).unwrap(), vec![0.0, 3.0]);
        assert_eq!(
            dirichlet_eigenvalues(&s, 2),
            Err(Error::InsufficientData {
                requested: 2,
                available: 1
            })
        );
    }

    #[test]
    fn synthetic_validation() {
        assert!(CrossSectionSpec::synthetic(vec![2.0, 1.0], vec![0.0], 1).is_err());
        assert!(CrossSectionSpec::synthetic(vec![1.0], vec![0.0, 0.0, 1.0], 1).is_err());
        assert!(CrossSectionSpec::synthetic(vec![1.0], vec![1.0], 1).is_err());
        assert!(CrossSectionSpec::synthetic(vec![1.0], vec![0.0, 1.0], 0).is_err());
        assert!(CrossSectionSpec::rectangle(0.0, 1.0).is_err());
        assert!(CrossSectionSpec::disk(-1.0).is_err());
    }

    #[test]
    fn friedlander() {
        let sq = CrossSectionSpectrum::compute(&CrossSectionSpec::rectangle(1.0, 1.0).unwrap(), 1, 2).unwrap();
        assert!(validate_friedlander(&sq));
        let disk = CrossSectionSpectrum::compute(&CrossSectionSpec::disk(1.0).unwrap(), 1, 2).unwrap();
        assert!(validate_friedlander(&disk));
        let bad = CrossSectionSpectrum {
            dirichlet: vec![1.0],
            neumann: vec![0.0, 2.0],
            n_boundary_components: 1,
        };
        assert!(!validate_friedlander(&bad));
        let spec = CrossSectionSpec::synthetic(vec![1.0], vec![0.0, 2.0], 1).unwrap();
        assert!(CrossSectionSpectrum::compute(&spec, 1, 2).is_err());
    }

    #[test]
    fn friedlander_over_aspect_ratios() {
        for &aspect in &[1.0, 2.0, 5.0, 10.0] {
            let spec = CrossSectionSpec::rectangle(1.0, aspect).unwrap();
            let s = CrossSectionSpectrum::compute(&spec, 4, 4).unwrap();
            assert!(validate_friedlander(&s), "aspect {aspect}");
        }
    }

    #[test]
    fn lists_are_sorted_with_single_zero() {
        for spec in [
            CrossSectionSpec::rectangle(1.0, 3.0).unwrap(),
            CrossSectionSpec::disk(0.7).unwrap(),
        ] {
            let d = dirichlet_eigenvalues(&spec, 60).unwrap();
            let n = neumann_eigenvalues(&spec, 60).unwrap();
            assert!(is_sorted(&d) && is_sorted(&n));
            assert!(d.iter().all(|&v| v > 0.0));
            assert_eq!(n.iter().filter(|&&v| v == 0.0).count(), 1);
        }
    }

    #[test]
    fn up_to_covers_cap() {
        let spec = CrossSectionSpec::rectangle(1.0, 1.0).unwrap();
        let (s, exhausted) = CrossSectionSpectrum::up_to(&spec, 200.0).unwrap();
        assert!(!exhausted);
        assert!(*s.dirichlet.last().unwrap() > 200.0);
        assert!(*s.neumann.last().unwrap() > 200.0);
    }
}
