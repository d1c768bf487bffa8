//! Bessel functions of the first kind of integer order and their zeros.
//!
//! Small arguments use the power series directly; larger arguments use Miller's
//! backward recurrence normalized by `J₀ + 2 Σ J₂ₖ = 1`, which stays accurate
//! where the alternating series cancels catastrophically.

/// Below this argument the power series is used.
const SERIES_LIMIT: f64 = 6.0;

/// Bisection stops once a bracketing interval is narrower than this.
pub const ZERO_TOLERANCE: f64 = 1e-13;

/// `J_m(x)` for `x ≥ 0`.
pub fn bessel_j(m: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        series(m, x)
    } else {
        miller(m, x)
    }
}

/// `J_m'(x)`.
pub fn bessel_j_prime(m: u32, x: f64) -> f64 {
    if m == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
    }
}

fn series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    // (x/2)^m / m!
    let mut term = 1.0;
    for j in 1..=m {
        term *= half / j as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(m: u32, x: f64) -> f64 {
    let order = m as usize;
    let reach = order.max(x.ceil() as usize);
    let mut start = reach + 30 + (50.0 * reach as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
        let idx = k - 1;
        if idx == order {
            wanted = cur;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * cur;
        }
    }
    norm += cur;
    wanted / norm
}

/// All positive zeros of `f` in `(lo, hi)`, found by sign-change bracketing on a
/// uniform scan of step `step` followed by bisection.
pub fn zeros_in(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    while a < hi {
        let b = (a + step).min(hi);
        let fb = f(b);
        if fb == 0.0 {
            out.push(b);
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            out.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > ZERO_TOLERANCE {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Zeros of `J_m` in `(0, hi)`.
pub fn bessel_zeros(m: u32, hi: f64) -> Vec<f64> {
    let lo = (m as f64).max(0.5);
    if lo >= hi {
        return Vec::new();
    }
    zeros_in(|x| bessel_j(m, x), lo, hi, 0.1)
}

/// Positive zeros of `J_m'` in `(0, hi)`.
pub fn bessel_prime_zeros(m: u32, hi: f64) -> Vec<f64> {
    // J_m' has no zero in (0, m) for m ≥ 1; J_0' = -J_1 vanishes at 0 only trivially.
    let lo = if m == 0 { 0.5 } else { (m as f64).max(0.5) };
    if lo >= hi {
        return Vec::new();
    }
    zeros_in(|x| bessel_j_prime(m, x), lo, hi, 0.1)
}
