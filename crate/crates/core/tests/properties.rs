use std::f64::consts::{PI, TAU};

use isospec::billiard::{billiard_map, map_jacobian, orbit, PhasePoint};
use isospec::geometry::{make_circle, make_ellipse, make_fourier, LiouvilleTable};
use isospec::numeric::wrap_centered;
use isospec::quasi::{coefficient_bounds, solve_recursion, BirkhoffData};
use isospec::radon::{
    liouville_radon, pushed_torus_invariant, symmetry_average, torus_invariant, BoundaryFunction, SymmetryGroup,
};
use isospec::rigidity::{invert_radon, radon_matrix, two_bounce_h_grid};
use isospec::spectra::{build_clusters, trap_constancy, Interval, IntervalClusterSet, QuasiPath, Spectrum, TrapOptions};
use isospec::tori::{circle_conjugacy, diophantine_kappa, disk_circle};
use isospec::wiener::{solve_homological, wiener_norm, TorusFunction};
use isospec::Error;
use num_complex::Complex64;
use proptest::prelude::*;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn trig_terms(max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_n)
}

fn trig(terms: &[(f64, f64)], t: f64) -> f64 {
    terms.iter().enumerate().map(|(n, (a, b))| a * (n as f64 * t).cos() + b * (n as f64 * t).sin()).sum()
}

fn zero_mean_poly() -> impl Strategy<Value = TorusFunction> {
    prop::collection::btree_map(1i64..=20, (-1.0..1.0f64, -1.0..1.0f64), 1..8).prop_map(|m| {
        let terms = m.into_iter().flat_map(|(k, (re, im))| {
            let c = Complex64::new(re, im);
            [(vec![k], c), (vec![-k], c.conj())]
        });
        TorusFunction::from_terms(1, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circle_and_ellipse_positions(s in 0.0..TAU, a in 1.05..3.0f64, ratio in 0.3..0.95f64) {
        let c = make_circle(1.0).unwrap();
        let p = c.position(s);
        prop_assert_eq!((p.x, p.y), (s.cos(), s.sin()));
        let b = a * ratio;
        let e = make_ellipse(a, b).unwrap();
        let r = e.position(s * e.total_length() / TAU).norm();
        prop_assert!(r >= b - 1e-12 && r <= a + 1e-12);
    }

    #[test]
    fn inward_normal_points_to_the_center(s in 0.0..1.0f64, a1 in -0.05..0.05f64, b2 in -0.03..0.03f64) {
        for curve in [make_ellipse(2.0, 1.0).unwrap(), make_fourier(&[1.0, a1, 0.0, 0.0, b2]).unwrap()] {
            let s = s * curve.total_length();
            let f = curve.frame(s);
            prop_assert!(f.inward_normal.dot(&(-f.position)) > 0.0);
        }
    }

    #[test]
    fn reflection_is_reversible(s in 0.0..1.0f64, xi in -0.97..0.97f64) {
        let curve = make_ellipse(2.0, 1.0).unwrap();
        let l = curve.total_length();
        let p = PhasePoint::new(s * l, xi);
        let (q, _) = billiard_map(&curve, p).unwrap();
        let (back, _) = billiard_map(&curve, PhasePoint::new(q.s, -q.xi)).unwrap();
        prop_assert!(wrap_centered(back.s - p.s, l).abs() < 1e-9);
        prop_assert!((back.xi + p.xi).abs() < 1e-9);
    }

    #[test]
    fn reflection_preserves_area(s in 0.0..1.0f64, xi in -0.95..0.95f64) {
        let curve = make_ellipse(2.0, 1.0).unwrap();
        let m = map_jacobian(&curve, PhasePoint::new(s * curve.total_length(), xi), 1, 1e-5).unwrap();
        prop_assert!((m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ellipse_integral_is_conserved(s in 0.0..1.0f64, xi in -0.95..0.95f64) {
        let curve = make_ellipse(2.0, 1.0).unwrap();
        let s = s * curve.total_length();
        let i0 = curve.first_integral(s, xi).unwrap();
        for c in orbit(&curve, PhasePoint::new(s, xi), 300).unwrap() {
            prop_assert!((curve.first_integral(c.target.s, c.target.xi).unwrap() - i0).abs() < 1e-9);
        }
    }

    #[test]
    fn kappa_symmetries(w in 0.01..0.99f64, kmax in 2u32..60) {
        let k = |x: f64, m: u32| diophantine_kappa(&[x], 1.0, m).unwrap().kappa_hat;
        let base = k(w, kmax);
        prop_assert_eq!(base, k(-w, kmax));
        prop_assert!((base - k(1.0 - w, kmax)).abs() <= 4.0 * f64::EPSILON * (kmax * kmax) as f64);
        prop_assert!(k(w, kmax + 5) <= base);
    }

    #[test]
    fn homological_solution_is_linear_equivariant_and_bounded(
        f in zero_mean_poly(), g in zero_mean_poly(), a in -2.0..2.0f64, shift in 0.0..TAU
    ) {
        let omega = [GOLDEN];
        let kappa = diophantine_kappa(&omega, 1.0, 20).unwrap().kappa_hat;
        let solve = |h: &TorusFunction| solve_homological(h, &omega, kappa, 1.0).unwrap().u;
        let (uf, ug) = (solve(&f), solve(&g));
        let combo = solve(&f.scale(Complex64::new(a, 0.0)).add(&g));
        let expect = uf.scale(Complex64::new(a, 0.0)).add(&ug);
        for k in -20i64..=20 {
            prop_assert!((combo.coeff(&[k]) - expect.coeff(&[k])).norm() < 1e-12 * (1.0 + expect.coeff(&[k]).norm()));
        }
        // f(φ + shift) ↦ u(φ + shift)
        let rot = |h: &TorusFunction| TorusFunction::from_terms(1, h.terms().map(|(k, c)| {
            (k.clone(), c * Complex64::from_polar(1.0, k[0] as f64 * shift))
        })).unwrap();
        let ur = solve(&rot(&f));
        let ru = rot(&uf);
        for k in -20i64..=20 {
            prop_assert!((ur.coeff(&[k]) - ru.coeff(&[k])).norm() < 1e-12 * (1.0 + ru.coeff(&[k]).norm()));
        }
        let sol = solve_homological(&f, &omega, kappa, 1.0).unwrap();
        prop_assert!(sol.bound(&f, 2.5).holds);
    }

    #[test]
    fn torus_invariant_is_linear_and_positive(xi in -0.9..0.9f64, k1 in trig_terms(4), k2 in trig_terms(4), a in -3.0..3.0f64) {
        let curve = make_circle(1.0).unwrap();
        let circle = disk_circle(&curve, xi).unwrap();
        let val = |terms: Vec<(f64, f64)>| {
            torus_invariant(std::slice::from_ref(&circle), &BoundaryFunction::new(TAU, move |s| trig(&terms, s))).unwrap().value
        };
        let (v1, v2) = (val(k1.clone()), val(k2.clone()));
        let combo: Vec<(f64, f64)> = (0..k1.len().max(k2.len())).map(|i| {
            let p = k1.get(i).copied().unwrap_or((0.0, 0.0));
            let q = k2.get(i).copied().unwrap_or((0.0, 0.0));
            (a * p.0 + q.0, a * p.1 + q.1)
        }).collect();
        prop_assert!((val(combo) - (a * v1 + v2)).abs() < 1e-10 * (1.0 + v1.abs() + v2.abs()));
        let pos: Vec<(f64, f64)> = std::iter::once((10.0, 0.0)).chain(k1.into_iter().skip(1)).collect();
        prop_assert!(val(pos) > 0.0);
    }

    #[test]
    fn symmetry_average_is_a_projection(terms in trig_terms(6)) {
        let len = 5.0;
        let t2 = terms.clone();
        let k = BoundaryFunction::new(len, move |s| trig(&t2, TAU * s / len));
        let g = SymmetryGroup;
        let once = symmetry_average(&k, &g);
        let twice = symmetry_average(&once, &g);
        for j in 0..64 {
            let s = len * j as f64 / 64.0;
            prop_assert!((once.eval(s) - twice.eval(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn p_perturbations_leave_the_leading_coefficients(
        re in prop::collection::vec(-5.0..5.0f64, 6), im in prop::collection::vec(-5.0..5.0f64, 6)
    ) {
        let data = BirkhoffData::disk(0.8).unwrap();
        let base = solve_recursion(&data, (150, 20), 210.0, 2).unwrap();
        let mut d = data.clone();
        for (i, (r, m)) in re.iter().zip(&im).enumerate() {
            d = d.with_p(i / 3, i % 3, Complex64::new(*r, *m));
        }
        let qe = solve_recursion(&d, (150, 20), 210.0, 2).unwrap();
        prop_assert_eq!(qe.c[0], base.c[0]);
        prop_assert_eq!(qe.b[0], base.b[0]);
    }

    #[test]
    fn clusters_are_sound_and_positive(gaps in prop::collection::vec(0.05..5.0f64, 30..120), c in 0.2..2.0f64, d in 1.1..2.0f64) {
        let mut lam = 20.0;
        let eig: Vec<f64> = gaps.iter().map(|g| { lam += g; lam }).collect();
        let spec = Spectrum::new(eig.clone(), 2).unwrap();
        let alpha = 25.0;
        let set = match build_clusters(&spec, c, d, alpha) {
            Ok(s) => s,
            Err(Error::EmptySpectrumAboveAlpha { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for &l in eig.iter().filter(|&&l| l >= alpha + 2.0 * c * l.powf(-d)) {
            let hits: Vec<usize> = set.components.iter().enumerate().filter(|(_, iv)| iv.contains(l)).map(|(k, _)| k).collect();
            prop_assert_eq!(hits.len(), 1);
            let iv = set.intervals[hits[0]];
            let dist = (iv.a - l).max(l - iv.b).max(0.0);
            prop_assert!(dist <= 1.5 * c * l.powf(-d) * (1.0 + 1e-12));
        }
        for (iv, comp) in set.intervals.iter().zip(&set.components) {
            if comp.a > alpha {
                prop_assert!(iv.b > iv.a);
                prop_assert!(iv.b - iv.a >= 0.5 * c * (comp.a.powf(-d) + comp.b.powf(-d))  - 1e-13 * comp.b, "{:?} {:?}", iv, comp);
            }
        }
    }

    #[test]
    fn trapping_is_monotone_in_interval_size(noise in prop::collection::vec(-1.0..1.0f64, 3 * 21), widen in 1.0..3.0f64) {
        let centers = [100.0f64, 400.0, 900.0];
        let t: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let paths: Vec<QuasiPath> = centers.iter().enumerate().map(|(i, c)| QuasiPath {
            q: (i as i64, 0),
            mu0: c.sqrt(),
            t: t.clone(),
            mu: (0..21).map(|j| c.sqrt() + 1e-4 * noise[21 * i + j] / c).collect(),
        }).collect();
        let set = |half: f64| IntervalClusterSet::from_intervals(
            centers.iter().map(|c| Interval { a: c - half / c.sqrt(), b: c + half / c.sqrt() }).collect(), 1.0, 1.0, 0.0, 2,
        ).unwrap();
        let opts = TrapOptions { s: 0, order: 3, lipschitz: None };
        let narrow = trap_constancy(&paths, &set(0.5), &opts);
        let wide = trap_constancy(&paths, &set(0.5 * widen), &opts);
        if matches!(narrow, Ok(ref r) if r.consistent) {
            prop_assert!(matches!(wide, Ok(ref r) if r.consistent));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn ellipse_circle_measure_is_invariant(xi in 0.8..0.95f64, terms in trig_terms(4)) {
        let curve = make_ellipse(2.0, 1.0).unwrap();
        let circle = match circle_conjugacy(&curve, PhasePoint::new(0.0, xi), 48) {
            Ok(c) => c,
            Err(Error::ResonantRotation { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let k = BoundaryFunction::in_param(&curve, move |t| 3.0 + trig(&terms, t));
        let direct = torus_invariant(std::slice::from_ref(&circle), &k).unwrap().value;
        let pushed = pushed_torus_invariant(&curve, &circle, &k, 2048).unwrap();
        prop_assert!((direct - pushed).abs() < 1e-8 * direct.abs(), "{} vs {}", direct, pushed);
    }
}

/// Fibonacci modes of the golden rotation nearly saturate the a-priori bound.
#[test]
fn loss_of_regularity_is_sharp_on_fibonacci_modes() {
    let omega = [GOLDEN];
    let (mut a, mut b) = (1i64, 1i64);
    let s = 2.0;
    for _ in 0..12 {
        (a, b) = (b, a + b);
        let f = TorusFunction::monomial(vec![b], Complex64::new(1.0, 0.0));
        let kappa = diophantine_kappa(&omega, 1.0, b as u32).unwrap().kappa_hat;
        let sol = solve_homological(&f, &omega, kappa, 1.0).unwrap();
        let ratio = wiener_norm(&sol.u, s - 1.0) / wiener_norm(&f, s);
        let cap = 1.0 / (4.0 * kappa);
        assert!(ratio <= cap && ratio >= cap / 4.0, "q = {b}: {ratio} vs {cap}");
    }
}

#[test]
fn recursion_coefficients_stay_bounded() {
    let data = BirkhoffData::disk(0.6).unwrap();
    let b = coefficient_bounds(&data, 0.2, 1..=10_000, 2).unwrap();
    assert!(b.count > 100);
    assert!(b.max_abs_c.iter().chain(&b.max_abs_b).all(|v| v.is_finite()));
}

#[test]
fn reconstruction_error_is_linear_in_noise() {
    let table = LiouvilleTable::ellipse_family(1.0, 1.0).unwrap();
    let m = radon_matrix(&table, &two_bounce_h_grid(&table, 20, 0.02, 0.98), 20).unwrap();
    let mut truth = vec![0.0; 20];
    truth[1] = 0.3;
    truth[2] = 0.1;
    let clean = m.apply(&truth).unwrap();
    let err = |delta: f64| {
        let noisy: Vec<f64> = clean.iter().enumerate().map(|(i, v)| v + delta * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = invert_radon(&m, &noisy, 1e-10).unwrap();
        truth.iter().zip(&r.coefficients).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    };
    let base = err(0.0);
    // ‖A⁺‖ = 1/σ_min bounds the response to a perturbation of norm δ√n
    let gain = (20f64).sqrt() / m.sigma_min();
    for delta in [1e-9, 1e-8, 1e-7, 1e-6] {
        assert!(err(delta) <= base + gain * delta * (1.0 + 1e-6), "delta {delta}");
    }
}

/// Barycentric interpolation on Chebyshev points of the second kind.
fn chebyshev_interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (xj, fj)) in nodes.iter().zip(values).enumerate() {
        if x == *xj {
            return *fj;
        }
        let w = if j == 0 || j == n { 0.5 } else { 1.0 } * if j % 2 == 0 { 1.0 } else { -1.0 };
        num += w * fj / (x - xj);
        den += w / (x - xj);
    }
    num / den
}

#[test]
fn radon_profiles_interpolate_off_grid() {
    let table = LiouvilleTable::ellipse_family(1.0, 1.0).unwrap();
    let k = BoundaryFunction::in_x(|x| 1.0 + 0.4 * (2.0 * x).cos() + 0.2 * (4.0 * x).cos());
    let (lo, hi) = (0.2, 0.8);
    let nodes: Vec<f64> = (0..=32).map(|j| 0.5 * (lo + hi) + 0.5 * (hi - lo) * (PI * j as f64 / 32.0).cos()).collect();
    let values: Vec<f64> = nodes.iter().map(|&h| liouville_radon(&table, &k, h).unwrap().plus).collect();
    for i in 0..10 {
        let h = lo + (hi - lo) * (i as f64 + 0.37) / 10.0;
        let direct = liouville_radon(&table, &k, h).unwrap().plus;
        let approx = chebyshev_interpolate(&nodes, &values, h);
        assert!((approx - direct).abs() < 1e-6 * direct.abs(), "h = {h}: {approx} vs {direct}");
    }
}
