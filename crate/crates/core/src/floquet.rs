//! Periodic and antiperiodic eigenvalues of `−d²/dy² + V` on one period.
//!
//! The operator is represented in the plane-wave bases `e^{2πimy/b}` and
//! `e^{iπ(2m+1)y/b}`; the matrix is Hermitian with entries
//! `k_m² δ_{mn} + V̂_{m−n}`. Fourier coefficients of `V` come from a direct DFT
//! on a sampling fine enough to avoid aliasing for every index that is used.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::liouville::ModePotential;

/// Boundary condition over one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Floquet {
    /// `u(y + b) = u(y)`
    Periodic,
    /// `u(y + b) = −u(y)`
    Antiperiodic,
}

/// Extra plane waves kept beyond those below the energy cap.
const PAD: usize = 40;

/// Eigenvalues `≤ cap` for the given condition, ascending with multiplicity.
pub fn floquet_eigenvalues(potential: &ModePotential, kind: Floquet, cap: f64) -> Result<Vec<f64>> {
    let b = potential
        .period()
        .ok_or_else(|| invalid("one-period eigenvalues need a periodic potential"))?;
    let samples = sample_period(potential, 512);
    let vmin = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let reach = (cap - vmin).max(0.0) + 1.0;
    let m_cap = (b * reach.sqrt() / (2.0 * std::f64::consts::PI)).ceil() as usize + 1;
    let coarse = solve(potential, kind, b, m_cap + PAD, cap)?;
    let fine = solve(potential, kind, b, m_cap + PAD + 20, cap)?;
    let n = coarse.len().min(fine.len());
    let drift = coarse
        .iter()
        .zip(&fine)
        .take(n)
        .map(|(a, f)| (a - f).abs() / f.abs().max(1.0))
        .fold(0.0f64, f64::max);
    if drift > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "plane-wave eigenvalues not converged (relative drift {drift:e})"
        )));
    }
    Ok(fine)
}

fn sample_period(potential: &ModePotential, n: usize) -> Vec<f64> {
    let b = potential.period().expect("periodic");
    (0..n).map(|j| potential.value(b * j as f64 / n as f64)).collect()
}

fn solve(potential: &ModePotential, kind: Floquet, b: f64, half: usize, cap: f64) -> Result<Vec<f64>> {
    let size = match kind {
        Floquet::Periodic => 2 * half + 1,
        Floquet::Antiperiodic => 2 * half,
    };
    let p = 8 * size;
    let samples = sample_period(potential, p);
    // V̂_j for |j| < size
    let tau = 2.0 * std::f64::consts::PI / p as f64;
    let vhat: Vec<Complex64> = (0..size)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, v) in samples.iter().enumerate() {
                let phase = -tau * ((j * q) % p) as f64;
                acc += Complex64::from_polar(*v, phase);
            }
            acc / p as f64
        })
        .collect();
    let freq = |m: usize| -> f64 {
        let pi = std::f64::consts::PI;
        match kind {
            Floquet::Periodic => 2.0 * pi * (m as f64 - half as f64) / b,
            Floquet::Antiperiodic => pi * (2.0 * (m as f64 - half as f64) + 1.0) / b,
        }
    };
    let h = DMatrix::from_fn(size, size, |r, c| {
        let offdiag = if r >= c { vhat[r - c] } else { vhat[c - r].conj() };
        if r == c {
            offdiag + Complex64::new(freq(r).powi(2), 0.0)
        } else {
            offdiag
        }
    });
    let eig = h.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().filter(|e| *e <= cap).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite plane-wave eigenvalue".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_potential() {
        let b = 2.0;
        let v = ModePotential::analytic(|_| 3.0, None, Some(b), 0.0);
        let per = floquet_eigenvalues(&v, Floquet::Periodic, 3.0 + 40.0).unwrap();
        let pi = std::f64::consts::PI;
        let mut expect = vec![3.0];
        for m in 1..=2 {
            let e = 3.0 + (2.0 * pi * m as f64 / b).powi(2);
            expect.push(e);
            expect.push(e);
        }
        assert_eq!(per.len(), expect.len());
        for (a, e) in per.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-10);
        }
        let anti = floquet_eigenvalues(&v, Floquet::Antiperiodic, 3.0 + 10.0).unwrap();
        assert_eq!(anti.len(), 2);
        assert!((anti[0] - 3.0 - (pi / b).powi(2)).abs() < 1e-10);
    }
}
