//! Propagators of linear systems `Y' = A(t) Y`.
//!
//! The integrator is the four-stage Gauss–Legendre collocation method (order
//! eight). It is symplectic, so propagators of Hamiltonian 2×2 systems keep a
//! unit determinant up to rounding. Step sizes are controlled by step doubling.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const STAGES: usize = 4;
const ORDER: i32 = 2 * STAGES as i32;

pub type Mat<const D: usize> = [[f64; D]; D];

struct Tableau {
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
    c: [f64; STAGES],
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let (x, w) = gauss_legendre(STAGES);
        let mut c = [0.0; STAGES];
        let mut b = [0.0; STAGES];
        for i in 0..STAGES {
            c[i] = 0.5 * (1.0 + x[i]);
            b[i] = 0.5 * w[i];
        }
        // a_ij = ∫_0^{c_i} ℓ_j, integrated exactly by the same rule on [0, c_i].
        let lagrange = |j: usize, t: f64| {
            (0..STAGES)
                .filter(|&m| m != j)
                .map(|m| (t - c[m]) / (c[j] - c[m]))
                .product::<f64>()
        };
        let mut a = [[0.0; STAGES]; STAGES];
        for i in 0..STAGES {
            for j in 0..STAGES {
                a[i][j] = (0..STAGES)
                    .map(|q| 0.5 * c[i] * w[q] * lagrange(j, 0.5 * c[i] * (1.0 + x[q])))
                    .sum();
            }
        }
        Tableau { a, b, c }
    })
}

pub fn identity<const D: usize>() -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matmul<const D: usize>(x: &Mat<D>, y: &Mat<D>) -> Mat<D> {
    let mut out = [[0.0; D]; D];
    for i in 0..D {
        for k in 0..D {
            let xik = x[i][k];
            if xik == 0.0 {
                continue;
            }
            for j in 0..D {
                out[i][j] += xik * y[k][j];
            }
        }
    }
    out
}

fn max_abs<const D: usize>(m: &Mat<D>) -> f64 {
    m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Transition matrix of one collocation step from `t` to `t + h`.
fn step<const D: usize>(a_of: &impl Fn(f64) -> Mat<D>, t: f64, h: f64) -> Option<Mat<D>> {
    let tab = tableau();
    let n = STAGES * D;
    let coeff: Vec<Mat<D>> = tab.c.iter().map(|ci| a_of(t + ci * h)).collect();
    // (I − h a_ij A_j) X = [I; …; I]
    let mut lhs = vec![0.0; n * n];
    let mut rhs = vec![0.0; n * D];
    for i in 0..STAGES {
        for r in 0..D {
            let row = i * D + r;
            lhs[row * n + row] += 1.0;
            rhs[row * D + r] = 1.0;
            for j in 0..STAGES {
                let f = h * tab.a[i][j];
                for q in 0..D {
                    lhs[row * n + j * D + q] -= f * coeff[j][r][q];
                }
            }
        }
    }
    solve_in_place(&mut lhs, &mut rhs, n, D)?;
    // T = I + h Σ b_i A_i X_i
    let mut out = identity::<D>();
    for i in 0..STAGES {
        for r in 0..D {
            for q in 0..D {
                let mut s = 0.0;
                for k in 0..D {
                    s += coeff[i][r][k] * rhs[(i * D + k) * D + q];
                }
                out[r][q] += h * tab.b[i] * s;
            }
        }
    }
    Some(out)
}

/// Gaussian elimination with partial pivoting; `rhs` is overwritten with the solution.
fn solve_in_place(a: &mut [f64], rhs: &mut [f64], n: usize, m: usize) -> Option<()> {
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col] == 0.0 || !a[piv * n + col].is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            for k in 0..m {
                rhs.swap(piv * m + k, col * m + k);
            }
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            for k in 0..m {
                rhs[row * m + k] -= f * rhs[col * m + k];
            }
        }
    }
    for col in (0..n).rev() {
        let d = a[col * n + col];
        for k in 0..m {
            let mut s = rhs[col * m + k];
            for j in col + 1..n {
                s -= a[col * n + j] * rhs[j * m + k];
            }
            rhs[col * m + k] = s / d;
        }
    }
    Some(())
}

/// Statistics of one propagation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Propagator of `Y' = A(t) Y` from `t0` to `t1` with local tolerance `tol`.
pub fn propagate<const D: usize>(a_of: impl Fn(f64) -> Mat<D>, t0: f64, t1: f64, tol: f64) -> Result<(Mat<D>, Stats)> {
    let mut stats = Stats::default();
    let mut prop = identity::<D>();
    if t1 == t0 {
        return Ok((prop, stats));
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut h = span / 8.0;
    let min_h = span.abs() * 1e-12;
    while (t1 - t) * span.signum() > 0.0 {
        if (t + h - t1) * span.signum() > 0.0 {
            h = t1 - t;
        }
        let full = step(&a_of, t, h);
        let half = step(&a_of, t, 0.5 * h).and_then(|s1| step(&a_of, t + 0.5 * h, 0.5 * h).map(|s2| matmul(&s2, &s1)));
        let (full, half) = match (full, half) {
            (Some(f), Some(hf)) => (f, hf),
            _ => {
                return Err(Error::NumericalFailure(format!("singular collocation system at t = {t}")));
            }
        };
        let mut diff = 0.0f64;
        for i in 0..D {
            for j in 0..D {
                diff = diff.max((full[i][j] - half[i][j]).abs());
            }
        }
        let err = diff / ((1u64 << ORDER) - 1) as f64 / max_abs(&half).max(1.0);
        if !err.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite propagator at t = {t}")));
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (tol / err).powf(1.0 / (ORDER as f64 + 1.0))).clamp(0.2, 4.0)
        };
        if err <= tol {
            prop = matmul(&half, &prop);
            t += h;
            stats.accepted += 1;
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= factor;
            if h.abs() < min_h {
                return Err(Error::NumericalFailure(format!(
                    "step size underflow at t = {t} (error estimate {err:e})"
                )));
            }
        }
        if stats.accepted + stats.rejected > 1_000_000 {
            return Err(Error::NumericalFailure("too many integration steps".into()));
        }
    }
    Ok((prop, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        let t = tableau();
        let sb: f64 = t.b.iter().sum();
        assert!((sb - 1.0).abs() < 1e-15);
        for i in 0..STAGES {
            let row: f64 = t.a[i].iter().sum();
            assert!((row - t.c[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_oscillator() {
        // u'' = -k² u
        let k = 7.3f64;
        let (p, _) = propagate(|_| [[0.0, 1.0], [-k * k, 0.0]], 0.0, 2.0, 1e-13).unwrap();
        let (c, s) = ((2.0 * k).cos(), (2.0 * k).sin());
        assert!((p[0][0] - c).abs() < 1e-11);
        assert!((p[0][1] - s / k).abs() < 1e-11);
        assert!((p[1][0] + k * s).abs() < 1e-10);
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        assert!((det - 1.0).abs() < 1e-13);
    }

    #[test]
    fn convergence_order() {
        let a = |t: f64| [[0.0, 1.0], [-(1.0 + 0.5 * t.cos()), 0.0]];
        let reference = {
            let mut p = identity::<2>();
            let n = 4096;
            for i in 0..n {
                p = matmul(&step(&a, i as f64 / n as f64 * 4.0, 4.0 / n as f64).unwrap(), &p);
            }
            p
        };
        let err = |n: usize| {
            let mut p = identity::<2>();
            for i in 0..n {
                p = matmul(&step(&a, i as f64 / n as f64 * 4.0, 4.0 / n as f64).unwrap(), &p);
            }
            (p[0][0] - reference[0][0]).abs()
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 150.0, "ratio {ratio}");
    }
}
