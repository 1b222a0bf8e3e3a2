use std::ffi::{CStr, CString};
use std::ptr;

use isospec_ffi::*;

fn last_error() -> String {
    let p = isospec_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(isospec_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn disk_round_trip_through_handles() {
    unsafe {
        let mut curve = ptr::null_mut();
        assert_eq!(isospec_curve_circle(1.0, &mut curve), IsospecStatus::Ok);
        let mut len = 0.0;
        assert_eq!(isospec_curve_total_length(curve, &mut len), IsospecStatus::Ok);
        assert_eq!(len, std::f64::consts::TAU);

        let (mut s, mut xi, mut l) = (0.0, 0.0, 0.0);
        assert_eq!(isospec_billiard_map(curve, 0.0, 0.5, &mut s, &mut xi, &mut l), IsospecStatus::Ok);
        assert!((s - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert!((xi - 0.5).abs() < 1e-12 && (l - 3f64.sqrt()).abs() < 1e-12);

        let theta = std::f64::consts::PI / 5.0;
        let mut circle = ptr::null_mut();
        assert_eq!(isospec_circle_fit(curve, 0.0, theta.cos(), 32, 1, &mut circle), IsospecStatus::Ok);
        let mut rho = 0.0;
        isospec_circle_rotation(circle, &mut rho);
        assert!((rho - 0.2).abs() < 1e-14);

        let mut a = IsospecAction::default();
        assert_eq!(isospec_circle_action(curve, circle, &mut a), IsospecStatus::Ok);
        assert!((a.i0 - theta.cos()).abs() < 1e-9);
        assert!((a.a_avg - 2.0 * theta.sin()).abs() < 1e-9);
        assert!(a.identity_gap.abs() < 1e-8);

        // K ≡ 1 on ξ ≡ cos θ gives 1/sin θ
        let one = [1.0];
        let mut v = 0.0;
        assert_eq!(isospec_torus_invariant(curve, circle, one.as_ptr(), ptr::null(), 1, &mut v), IsospecStatus::Ok);
        assert!((v - 1.0 / theta.sin()).abs() < 1e-12);

        isospec_circle_free(circle);
        isospec_curve_free(curve);
    }
}

#[test]
fn json_curve_and_ellipse_antipode() {
    let spec = CString::new(r#"{"type":"ellipse","a":2,"b":1}"#).unwrap();
    unsafe {
        let mut curve = ptr::null_mut();
        assert_eq!(isospec_curve_from_json(spec.as_ptr(), &mut curve), IsospecStatus::Ok);
        let mut len = 0.0;
        isospec_curve_total_length(curve, &mut len);
        let (mut s, mut xi) = (0.0, 0.0);
        assert_eq!(isospec_billiard_map(curve, 0.0, 0.0, &mut s, &mut xi, ptr::null_mut()), IsospecStatus::Ok);
        assert!((s - 0.5 * len).abs() < 1e-9 && xi.abs() < 1e-9);
        let (mut x, mut y) = (0.0, 0.0);
        isospec_curve_position(curve, s, &mut x, &mut y);
        assert!((x + 2.0).abs() < 1e-9 && y.abs() < 1e-9);
        isospec_curve_free(curve);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut curve = ptr::null_mut();
        assert_eq!(isospec_curve_ellipse(-1.0, 1.0, &mut curve), IsospecStatus::InvalidArgument);
        assert!(curve.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new(r#"{"type":"square"}"#).unwrap();
        assert_eq!(isospec_curve_from_json(bad.as_ptr(), &mut curve), IsospecStatus::InvalidArgument);
        assert!(last_error().contains("parse"));

        assert_eq!(isospec_curve_circle(1.0, &mut curve), IsospecStatus::Ok);
        let (mut s, mut xi) = (0.0, 0.0);
        assert_eq!(isospec_billiard_map(curve, 0.0, 1.0, &mut s, &mut xi, ptr::null_mut()), IsospecStatus::InvalidArgument);
        assert!(last_error().contains("glancing"));
        assert_eq!(isospec_curve_total_length(ptr::null(), &mut s), IsospecStatus::NullPointer);
        assert_eq!(isospec_curve_total_length(curve, ptr::null_mut()), IsospecStatus::NullPointer);
        isospec_curve_free(curve);
        isospec_curve_free(ptr::null_mut());
    }
}

#[test]
fn golden_kappa() {
    let g = [(5f64.sqrt() - 1.0) / 2.0];
    let mut k = 0.0;
    assert_eq!(unsafe { isospec_diophantine_kappa(g.as_ptr(), 1, 1.0, 100, &mut k) }, IsospecStatus::Ok);
    assert!((k - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn recursion_matches_the_library() {
    let theta = 0.4f64;
    let d = isospec::quasi::BirkhoffData::disk(theta).unwrap();
    let data = IsospecBirkhoff {
        i0: d.i0,
        omega: d.omega,
        l0: d.l0,
        hess_l: d.hess_l,
        higher_jets: d.higher_jets.as_ptr(),
        n_jets: d.higher_jets.len(),
        maslov_theta0: 0,
        maslov_theta: 1,
    };
    let expected = isospec::quasi::solve_recursion(&d.clone().with_maslov(0, 1), (40, 7), 42.0, 2).unwrap();
    let (mut c, mut b, mut mu) = ([0.0; 3], [0.0; 4], 0.0);
    let st = unsafe { isospec_quasi_recursion(&data, 40, 7, 42.0, 2, c.as_mut_ptr(), b.as_mut_ptr(), &mut mu) };
    assert_eq!(st, IsospecStatus::Ok);
    assert_eq!(c.to_vec(), expected.c);
    assert_eq!(b.to_vec(), expected.b);
    assert_eq!(mu, isospec::quasi::evaluate_mu(&expected, &[]).0);

    let no_jets = IsospecBirkhoff { higher_jets: ptr::null(), n_jets: 0, ..data };
    let st = unsafe { isospec_quasi_recursion(&no_jets, 40, 7, 42.0, 2, c.as_mut_ptr(), ptr::null_mut(), &mut mu) };
    assert_eq!(st, IsospecStatus::InvalidArgument);
    assert!(last_error().contains("missing derivative"));
}

/// Compiles a small C translation unit against the generated header.
#[test]
fn header_compiles_as_c() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let header = std::fs::read_to_string(format!("{include}/isospec.h")).unwrap();
    for name in ["isospec_curve_from_json", "isospec_circle_fit", "isospec_quasi_recursion", "IsospecCurve", "ISOSPEC_STATUS_OK"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"isospec.h\"\nint probe(void) { IsospecCurve *c = 0; IsospecStatus s = isospec_curve_circle(1.0, &c); \
         isospec_curve_free(c); return s == ISOSPEC_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match std::process::Command::new(&cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include]).arg(&src).output() {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("no C compiler ({cc}: {e}); header syntax not checked"),
    }
}
