//! Eigenvalues of real symmetric tridiagonal matrices by Sturm-sequence bisection.

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = if i == 0 { self.diag[0] - x } else { self.diag[i] - x - b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (lo, hi) = self.gershgorin();
        self.eigenvalue_in(k, lo, hi)
    }

    fn eigenvalue_in(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        let scale = lo.abs().max(hi.abs()).max(1.0);
        while hi - lo > 4.0 * f64::EPSILON * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues below `cap`, ascending.
    pub fn eigenvalues_below(&self, cap: f64) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let n = self.count_below(cap);
        (0..n).map(|k| self.eigenvalue_in(k, lo, hi.min(cap))).collect()
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn lowest(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        (0..count.min(self.len())).map(|k| self.eigenvalue_in(k, lo, hi)).collect()
    }
}
