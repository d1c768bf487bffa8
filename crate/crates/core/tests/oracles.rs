//! Independent oracles for the transform and the one-dimensional solvers.

use std::f64::consts::PI;
use std::sync::Arc;

use cylspec::liouville::{build_potential, Flavor, LiouvilleData, ModePotential};
use cylspec::pipeline::oracle_comparison;
use cylspec::profile::{CoefficientProfile, ProfileFamily};
use cylspec::schrodinger::{band_structure, bound_states};

fn sech2_bump() -> CoefficientProfile {
    CoefficientProfile::stabilizing(ProfileFamily::sech2(1.0, 0.5, 0.0, 1.0), ProfileFamily::constant(1.0)).unwrap()
}

/// Composite 8-point Gauss–Legendre rule.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    const X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
    const W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            X.iter()
                .zip(&W)
                .map(|(x, w)| w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

#[test]
fn axial_map_matches_gauss_quadrature() {
    let data = LiouvilleData::build(&sech2_bump(), None).unwrap();
    let oracle = gauss(|z| (1.0 + 0.5 / z.cosh().powi(2)).sqrt(), 0.0, 1.0, 64);
    // 30-digit quadrature of the same integral
    assert!((oracle - 1.1744042296914957).abs() < 1e-14);
    let y1 = data.y_of_z(1.0) - data.y_of_z(0.0);
    assert!((y1 - oracle).abs() < 1e-12, "{y1} vs {oracle}");
    let y_far = data.y_of_z(7.0) - data.y_of_z(-3.0);
    let far = gauss(|z| (1.0 + 0.5 / z.cosh().powi(2)).sqrt(), -3.0, 7.0, 400);
    assert!((y_far - far).abs() < 1e-11);

    let gaussian =
        CoefficientProfile::stabilizing(ProfileFamily::gaussian(1.0, 1.0, 0.0, 1.0), ProfileFamily::constant(1.0)).unwrap();
    let data = LiouvilleData::build(&gaussian, None).unwrap();
    let oracle = gauss(|z| (1.0 + (-z * z).exp()).sqrt(), 0.0, 1.0, 64);
    assert!((oracle - 1.319428558454117).abs() < 1e-14);
    assert!((data.y_of_z(1.0) - data.y_of_z(0.0) - oracle).abs() < 1e-12);
}

/// `η = (log ν)'` and `V = η² ∓ η' + c/(εμ)` by central differences in `y`.
fn potential_by_differences(data: &LiouvilleData, y: f64, c: f64, magnetic: bool) -> f64 {
    let h = 1e-3;
    let log_nu = |y: f64| data.nu(y).ln();
    let eta = (log_nu(y + h) - log_nu(y - h)) / (2.0 * h);
    let eta_prime = (log_nu(y + h) - 2.0 * log_nu(y) + log_nu(y - h)) / (h * h);
    let z = data.z_of_y(y);
    let p = data.profile();
    let sign = if magnetic { 1.0 } else { -1.0 };
    eta * eta + sign * eta_prime + c / (p.epsilon.eval(z, 0) * p.mu.eval(z, 0))
}

#[test]
fn potentials_match_finite_differences() {
    let profile = CoefficientProfile::stabilizing(
        ProfileFamily::gaussian(1.0, 0.4, 0.2, 0.9),
        ProfileFamily::sech2(1.5, -0.3, -0.4, 1.1),
    )
    .unwrap();
    let data = Arc::new(LiouvilleData::build(&profile, None).unwrap());
    let el = build_potential(&data, Flavor::Electric(1), 12.0, 1).unwrap();
    let m = build_potential(&data, Flavor::Magnetic(2), 7.0, 1).unwrap();
    for i in 0..61 {
        let y = -6.0 + 0.2 * i as f64;
        let e_fd = potential_by_differences(&data, y, 12.0, false);
        let m_fd = potential_by_differences(&data, y, 7.0, true);
        assert!((el.value(y) - e_fd).abs() < 1e-5, "el at {y}: {} vs {e_fd}", el.value(y));
        assert!((m.value(y) - m_fd).abs() < 1e-5, "m at {y}: {} vs {m_fd}", m.value(y));
    }
}

#[test]
fn magnetic_oracle_on_swapped_profile() {
    let profile = CoefficientProfile::stabilizing(
        ProfileFamily::constant(1.0),
        ProfileFamily::gaussian(1.0, 0.6, 0.0, 1.0),
    )
    .unwrap();
    let data = Arc::new(LiouvilleData::build(&profile, None).unwrap());
    let rows = oracle_comparison(&data, Flavor::Magnetic(2), PI * PI, 1, 12.0, 4000, 4).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r.relative_deviation < 1e-4, "{r:?}");
    }
}

#[test]
fn poschl_teller_levels() {
    // −l(l+1) sech² y has levels −(l − j)², j < l
    let v = ModePotential::analytic(|y| -6.0 / y.cosh().powi(2), Some(0.0), None, -6.0);
    let r = bound_states(&v, 20.0, 4000).unwrap();
    assert_eq!(r.count, 2);
    assert!((r.eigenvalues[0] + 4.0).abs() < 1e-6, "{:?}", r.eigenvalues);
    assert!((r.eigenvalues[1] + 1.0).abs() < 1e-6, "{:?}", r.eigenvalues);
    for (e, est) in r.eigenvalues.iter().zip(&r.refinement_estimate) {
        assert!(*est < 1e-6, "{e} {est}");
    }
}

#[test]
fn mathieu_characteristic_values() {
    // −u'' + 2q cos(2y) u at q = 1; band edges are a₀, b₁, a₁, b₂, a₂
    let v = ModePotential::analytic(|y| 2.0 * (2.0 * y).cos(), None, Some(PI), -2.0);
    let bs = band_structure(&v, 6.0).unwrap();
    let edges = bs.edges();
    let table = [
        -0.45513860410741364,
        -0.11024881699209521,
        1.8591080725143634,
        3.917024772998471,
        4.371300982735086,
    ];
    for (e, t) in edges.iter().zip(&table) {
        assert!((e - t).abs() < 1e-7, "{e} vs {t}");
    }
    assert!(edges.len() >= table.len());
}

#[test]
fn spectrum_entirely_above_cap_is_empty() {
    let profile =
        CoefficientProfile::periodic(ProfileFamily::cosine(1.0, 0.3, 1.0), ProfileFamily::constant(1.0)).unwrap();
    let data = Arc::new(LiouvilleData::build(&profile, None).unwrap());
    let v = build_potential(&data, Flavor::Electric(17), 26.0 * PI * PI, 1).unwrap();
    let bs = band_structure(&v, 200.0).unwrap();
    assert!(bs.bands.is_empty() && bs.gaps.is_empty());
}
