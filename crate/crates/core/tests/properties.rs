use std::sync::Arc;

use proptest::prelude::*;

use cylspec::assembly::{assemble, merge, mode_budget, Interval, ModeSpectrum, PointEigenvalue, Provenance};
use cylspec::cross_section::{CrossSectionSpec, CrossSectionSpectrum};
use cylspec::liouville::{build_potential, Flavor, LiouvilleData};
use cylspec::profile::{CoefficientProfile, ProfileFamily};
use cylspec::schrodinger::{count_below, monodromy};
use cylspec::tridiag::SymTridiagonal;
use cylspec::weighted::{quadratic_form_value, weighted_eigenvalues, weighted_norm_sq, WeightedOperatorSpec};

fn bump_profile(a: f64, w: f64, m: f64) -> CoefficientProfile {
    CoefficientProfile::stabilizing(ProfileFamily::sech2(1.0, a, 0.0, w), ProfileFamily::gaussian(1.0, m, 0.5, 1.0))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monodromy_is_unimodular(amp in -0.4f64..0.4, lambda in 1.0f64..60.0, energy in -20.0f64..200.0) {
        let p = CoefficientProfile::periodic(ProfileFamily::cosine(1.0, amp, 1.0), ProfileFamily::constant(1.0)).unwrap();
        let data = Arc::new(LiouvilleData::build(&p, None).unwrap());
        let v = build_potential(&data, Flavor::Electric(1), lambda, 1).unwrap();
        let m = monodromy(&v, energy).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let scale = m.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
        prop_assert!((det - 1.0).abs() < 1e-9 * scale * scale, "det {}", det);
    }

    #[test]
    fn axial_map_round_trip(a in -0.5f64..1.0, w in 0.3f64..2.0, m in -0.5f64..0.8, z in -40.0f64..40.0) {
        let data = LiouvilleData::build(&bump_profile(a, w, m), None).unwrap();
        let y = data.y_of_z(z);
        prop_assert!((data.z_of_y(y) - z).abs() <= 1e-10 * z.abs().max(1.0));
        prop_assert!(data.dy_dz(z) > 0.0);
    }

    #[test]
    fn budget_grows_with_cap(width in 0.5f64..2.0, e1 in 1.0f64..60.0, extra in 0.0f64..40.0) {
        let cross = CrossSectionSpec::rectangle(width, 1.0).unwrap();
        let profile = bump_profile(0.3, 1.0, 0.2);
        let cap = (e1 + extra) * profile.essential_bounds().sup_eps_mu;
        let (spectrum, _) = CrossSectionSpectrum::up_to(&cross, cap).unwrap();
        let small = mode_budget(&spectrum, &profile, e1).unwrap().modes();
        let large = mode_budget(&spectrum, &profile, e1 + extra).unwrap().modes();
        for mode in &small {
            prop_assert!(large.contains(mode));
        }
    }

    #[test]
    fn rayleigh_quotients_bound_the_lowest_eigenvalue(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 1..6),
        lambda in 0.0f64..30.0,
    ) {
        let profile = bump_profile(0.5, 1.0, -0.3);
        let n = 400;
        let spec = WeightedOperatorSpec::new(Flavor::Electric(1), lambda, profile, 6.0, n).unwrap();
        let lowest = weighted_eigenvalues(&spec, 1).unwrap()[0];
        let p: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                coeffs.iter().enumerate().map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * t).sin()).sum::<f64>()
            })
            .map(|v| if v.abs() < 1e-15 { 0.0 } else { v })
            .collect();
        let mut p = p;
        p[0] = 0.0;
        p[n] = 0.0;
        let norm = weighted_norm_sq(&spec, &p).unwrap();
        prop_assume!(norm > 1e-8);
        let q = quadratic_form_value(&spec, &p).unwrap() / norm;
        prop_assert!(q >= lowest * (1.0 - 1e-10), "{} < {}", q, lowest);
    }

    #[test]
    fn bound_count_grows_with_mode_constant(l1 in 0.0f64..200.0, dl in 0.0f64..200.0) {
        // εμ ≥ ε*μ* everywhere, so V − threshold decreases with the mode constant
        let profile = CoefficientProfile::stabilizing(ProfileFamily::sech2(1.0, 0.5, 0.0, 1.0), ProfileFamily::constant(1.0)).unwrap();
        let data = Arc::new(LiouvilleData::build(&profile, None).unwrap());
        let count = |c: f64| {
            let v = build_potential(&data, Flavor::Electric(1), c, 1).unwrap();
            count_below(&v, c, 12.0, 1200).unwrap()
        };
        prop_assert!(count(l1) <= count(l1 + dl));
    }

    #[test]
    fn sturm_count_matches_eigenvalues(diag in proptest::collection::vec(-5.0f64..5.0, 2..30), seed in 0.1f64..2.0) {
        let off: Vec<f64> = (1..diag.len()).map(|i| seed * (i as f64).sin()).collect();
        let t = SymTridiagonal::new(diag.clone(), off);
        let ev = t.lowest(diag.len());
        for (k, e) in ev.iter().enumerate() {
            prop_assert!(t.count_below(*e - 1e-9) <= k);
            prop_assert!(t.count_below(*e + 1e-9) > k);
        }
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn merged_intervals_are_disjoint_and_cover(raw in proptest::collection::vec((0.0f64..50.0, 0.0f64..5.0), 1..12), probe in 0.0f64..55.0) {
        let intervals: Vec<Interval> = raw.iter().map(|(lo, w)| Interval::new(*lo, lo + w)).collect();
        let merged = merge(intervals.clone());
        prop_assert!(merged.windows(2).all(|w| w[0].hi < w[1].lo));
        let before = intervals.iter().any(|iv| iv.contains(probe));
        let after = merged.iter().any(|iv| iv.contains(probe));
        prop_assert!(!before || after);
    }

    #[test]
    fn maxwell_spectrum_is_symmetric(
        bands in proptest::collection::vec((1.0f64..40.0, 0.0f64..10.0), 1..5),
        points in proptest::collection::vec(0.5f64..40.0, 0..5),
    ) {
        let modes: Vec<ModeSpectrum> = bands
            .iter()
            .enumerate()
            .map(|(i, (lo, w))| {
                let provenance = Provenance { flavor: Flavor::Electric(i + 1), mode_constant: *lo };
                let point_part = points
                    .iter()
                    .filter(|p| **p < *lo)
                    .map(|p| PointEigenvalue { value: *p, error: 0.0, provenance })
                    .collect();
                ModeSpectrum::explicit(provenance, 50.0, vec![Interval::new(*lo, (lo + w).min(50.0))], point_part)
            })
            .collect();
        let report = assemble(modes, 1, None).unwrap();
        let m = &report.maxwell;
        let mirrored: Vec<(f64, f64)> = m.intervals.iter().rev().map(|iv| (-iv.hi, -iv.lo)).collect();
        let original: Vec<(f64, f64)> = m.intervals.iter().map(|iv| (iv.lo, iv.hi)).collect();
        prop_assert_eq!(mirrored, original);
        let mut pts = m.points.clone();
        let mut neg: Vec<f64> = pts.iter().map(|p| -p).collect();
        pts.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        prop_assert_eq!(pts, neg);
    }
}
