//! Quadrature rules and a piecewise Chebyshev antiderivative.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > tol {
        let magnitude: f64 = pieces.iter().map(|p| p.2.abs()).sum();
        total_err = pieces.iter().map(|p| p.3).sum();
        if total_err <= tol.max(50.0 * f64::EPSILON * magnitude) {
            break;
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::NumericalFailure(format!(
                "quadrature on [{a}, {b}] did not reach {tol:e} (estimate {total_err:e})"
            )));
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, err) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NumericalFailure(format!(
                "quadrature interval collapsed near {mid} (estimate {total_err:e})"
            )));
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total_err += e1 + e2 - err;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    Ok(pieces.iter().map(|p| p.2).sum())
}

/// Chebyshev degree used on each panel.
const CHEB_DEGREE: usize = 32;

/// Antiderivative `F(x) = ∫_{lo}^{x} f` stored as Chebyshev series on panels.
///
/// Panels are bisected until the trailing Chebyshev coefficients of `f` fall
/// below the tolerance, so `F` carries an error of at most `tol` per unit
/// length on top of rounding.
#[derive(Debug, Clone)]
pub struct ChebAntiderivative {
    breaks: Vec<f64>,
    /// `F` at each left break.
    offsets: Vec<f64>,
    /// Chebyshev coefficients of `F − offset` on each panel.
    coeffs: Vec<Vec<f64>>,
}

impl ChebAntiderivative {
    pub fn build(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
        }
        let mut panels = Vec::new();
        let mut stack = vec![(lo, hi)];
        while let Some((a, b)) = stack.pop() {
            let c = cheb_coeffs(&f, a, b);
            let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let tail = c[CHEB_DEGREE - 2].abs() + c[CHEB_DEGREE - 1].abs() + c[CHEB_DEGREE].abs();
            let budget = (tol / (hi - lo)).max(16.0 * f64::EPSILON * scale);
            if tail <= budget || b - a < 1e-9 * (hi - lo) {
                if !c.iter().all(|v| v.is_finite()) {
                    return Err(Error::NumericalFailure(format!("non-finite integrand on [{a}, {b}]")));
                }
                panels.push((a, b, c));
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
            }
            if panels.len() + stack.len() > 100_000 {
                return Err(Error::NumericalFailure("antiderivative needs too many panels".into()));
            }
        }
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut breaks = Vec::with_capacity(panels.len() + 1);
        let mut offsets = Vec::with_capacity(panels.len());
        let mut coeffs = Vec::with_capacity(panels.len());
        let mut acc = 0.0;
        for (a, b, c) in panels {
            let ic = integrate_series(&c, 0.5 * (b - a));
            breaks.push(a);
            offsets.push(acc);
            acc += clenshaw(&ic, 1.0);
            coeffs.push(ic);
        }
        breaks.push(hi);
        offsets.push(acc);
        Ok(ChebAntiderivative {
            breaks,
            offsets,
            coeffs,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().expect("nonempty"))
    }

    /// Integral over the whole domain.
    pub fn total(&self) -> f64 {
        *self.offsets.last().expect("nonempty")
    }

    fn panel_of(&self, x: f64) -> usize {
        let n = self.coeffs.len();
        match self.breaks[..n].binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// `F(x)`; `x` is clamped to the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.panel_of(x);
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        let t = (2.0 * x - a - b) / (b - a);
        self.offsets[i] + clenshaw(&self.coeffs[i], t)
    }

    /// Solve `F(x) = target` for increasing `F` with derivative `f`.
    pub fn invert(&self, target: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.coeffs.len();
        let i = match self.offsets[..n].binary_search_by(|v| v.total_cmp(&target)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let (mut a, mut b) = (self.breaks[i], self.breaks[i + 1]);
        let mut x = {
            let span = self.offsets[i + 1] - self.offsets[i];
            let frac = if span > 0.0 { (target - self.offsets[i]) / span } else { 0.5 };
            a + frac.clamp(0.0, 1.0) * (b - a)
        };
        for _ in 0..100 {
            let r = self.eval(x) - target;
            if r == 0.0 {
                return x;
            }
            if r > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let d = f(x);
            let mut next = x - r / d;
            if !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || b - a <= 4.0 * f64::EPSILON * x.abs() {
                return next;
            }
            x = next;
        }
        x
    }
}

/// Chebyshev coefficients of degree `CHEB_DEGREE` interpolating `f` at the
/// Chebyshev extreme points of `[a, b]`.
fn cheb_coeffs(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    let n = CHEB_DEGREE;
    let vals: Vec<f64> = (0..=n)
        .map(|j| {
            let t = (PI * j as f64 / n as f64).cos();
            f(0.5 * (a + b) + 0.5 * (b - a) * t)
        })
        .collect();
    let mut c = vec![0.0; n + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in vals.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += w * v * (PI * (k * j) as f64 / n as f64).cos();
        }
        *ck = 2.0 * s / n as f64;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    c
}

/// Coefficients of the antiderivative (in `x`, vanishing at `t = −1`) of a
/// series in `t = (2x − a − b)/(b − a)` with half-width `half`.
fn integrate_series(c: &[f64], half: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        let prev = c[k - 1] * if k == 1 { 2.0 } else { 1.0 };
        let next = if k + 1 < n { c[k + 1] } else { 0.0 };
        out[k] = half * (prev - next) / (2.0 * k as f64);
    }
    // fix the constant so that the value at t = -1 vanishes
    let at_minus_one: f64 = out
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .sum();
    out[0] = -at_minus_one;
    out
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn adaptive_integration() {
        let v = integrate(|x| x.sin(), 0.0, PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate(|x| (-x * x).exp(), -30.0, 30.0, 1e-13).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn antiderivative_and_inverse() {
        let f = |x: f64| 1.0 + 0.5 * (-x * x).exp();
        let a = ChebAntiderivative::build(f, -10.0, 10.0, 1e-13).unwrap();
        let exact = |x: f64| x + 10.0 + 0.25 * PI.sqrt() * (libm_erf(x) + 1.0);
        for i in 0..200 {
            let x = -10.0 + 20.0 * i as f64 / 199.0;
            assert!((a.eval(x) - exact(x)).abs() < 1e-12, "x={x}");
            let back = a.invert(a.eval(x), f);
            assert!((back - x).abs() < 1e-12, "x={x} back={back}");
        }
    }

    // erf via its Taylor series (adequate for |x| ≤ 10 with a complementary tail cut)
    fn libm_erf(x: f64) -> f64 {
        if x.abs() > 6.0 {
            return x.signum();
        }
        integrate(|t| 2.0 / PI.sqrt() * (-t * t).exp(), 0.0, x, 1e-15).unwrap()
    }
}
